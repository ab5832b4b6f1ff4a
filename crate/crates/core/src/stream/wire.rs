//! Fixed-size binary encoding of a [`PoseFrame`].
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `POSE`                            |
//! | 4      | 1    | version (1)                             |
//! | 5      | 4    | seq, u32 LE                             |
//! | 9      | 8    | timestamp in microseconds, u64 LE       |
//! | 17     | 1    | joint count (24)                        |
//! | 18     | 384  | 24 × (x, y, z, confidence), f32 LE      |

use thiserror::Error;

use crate::pose::{Joint, PoseFrame};
use crate::scalar::Scalar;
use crate::skeleton::JOINT_COUNT;

pub const WIRE_MAGIC: [u8; 4] = *b"POSE";
pub const WIRE_VERSION: u8 = 1;
pub const WIRE_FRAME_LEN: usize = 4 + 1 + 4 + 8 + 1 + JOINT_COUNT * 16;

const JOINTS_AT: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported wire version {0}")]
    BadVersion(u8),
    #[error("joint count {0}, expected 24")]
    BadJointCount(u8),
    #[error("short read: {0} of 402 bytes")]
    ShortRead(usize),
}

pub fn encode_frame<T: Scalar>(frame: &PoseFrame<T>) -> [u8; WIRE_FRAME_LEN] {
    let mut b = [0u8; WIRE_FRAME_LEN];
    b[0..4].copy_from_slice(&WIRE_MAGIC);
    b[4] = WIRE_VERSION;
    b[5..9].copy_from_slice(&frame.seq.to_le_bytes());
    b[9..17].copy_from_slice(&frame.timestamp_us.to_le_bytes());
    b[17] = JOINT_COUNT as u8;
    for (rec, joint) in b[JOINTS_AT..].chunks_exact_mut(16).zip(frame.joints.iter()) {
        let fields = [joint.pos[0], joint.pos[1], joint.pos[2], joint.confidence];
        for (slot, v) in rec.chunks_exact_mut(4).zip(fields) {
            slot.copy_from_slice(&v.to_storage().to_le_bytes());
        }
    }
    b
}

/// Decodes the first 402 bytes of `bytes`.
pub fn decode_frame<T: Scalar>(bytes: &[u8]) -> Result<PoseFrame<T>, WireError> {
    if bytes.len() < WIRE_FRAME_LEN {
        return Err(WireError::ShortRead(bytes.len()));
    }
    let magic = [bytes[0], bytes[1], bytes[2], bytes[3]];
    if magic != WIRE_MAGIC {
        return Err(WireError::BadMagic(magic));
    }
    if bytes[4] != WIRE_VERSION {
        return Err(WireError::BadVersion(bytes[4]));
    }
    if bytes[17] as usize != JOINT_COUNT {
        return Err(WireError::BadJointCount(bytes[17]));
    }
    let seq = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
    let timestamp_us = u64::from_le_bytes(bytes[9..17].try_into().expect("8 bytes"));
    let real = |at: usize| T::from_storage(f32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")));
    let joints = std::array::from_fn(|j| {
        let at = JOINTS_AT + 16 * j;
        Joint {
            pos: [real(at), real(at + 4), real(at + 8)],
            confidence: real(at + 12),
        }
    });
    Ok(PoseFrame {
        seq,
        timestamp_us,
        joints,
    })
}
