//! Pose-frame broadcast over TCP.
//!
//! Frames have a fixed 402-byte encoding (see [`wire`]), so the byte stream
//! needs no length prefixes: a subscriber reads 402-byte chunks.

pub mod client;
pub mod server;
pub mod wire;

pub use client::{format_frame_line, Subscription};
pub use server::{paced, Paced, ServeReport, Server, ServerConfig};
pub use wire::{decode_frame, encode_frame, WireError, WIRE_FRAME_LEN, WIRE_MAGIC, WIRE_VERSION};
