//! Reference subscriber.

use std::io::{self, BufReader, Read};
use std::net::{TcpStream, ToSocketAddrs};
use std::fmt::Write as _;

use thiserror::Error;

use super::wire::{decode_frame, WireError, WIRE_FRAME_LEN};
use crate::pose::PoseFrame;

#[derive(Debug, Error)]
pub enum SubscriptionError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// Blocking iterator over frames from a server. Ends cleanly when the
/// server closes the connection on a frame boundary.
pub struct Subscription {
    reader: BufReader<TcpStream>,
    done: bool,
}

impl Subscription {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self::from_stream(stream))
    }

    pub fn from_stream(stream: TcpStream) -> Self {
        Self {
            reader: BufReader::with_capacity(WIRE_FRAME_LEN * 16, stream),
            done: false,
        }
    }

    /// Next raw 402-byte frame, `Ok(None)` at a clean end of stream.
    pub fn next_raw(&mut self) -> Result<Option<[u8; WIRE_FRAME_LEN]>, SubscriptionError> {
        let mut buf = [0u8; WIRE_FRAME_LEN];
        let mut filled = 0;
        while filled < WIRE_FRAME_LEN {
            match self.reader.read(&mut buf[filled..]) {
                Ok(0) if filled == 0 => return Ok(None),
                Ok(0) => return Err(WireError::ShortRead(filled).into()),
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                // a reset after the server dropped us reads as end of stream
                Err(e) if filled == 0 && e.kind() == io::ErrorKind::ConnectionReset => return Ok(None),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(Some(buf))
    }
}

impl Iterator for Subscription {
    type Item = Result<PoseFrame<f32>, SubscriptionError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match self.next_raw() {
            Ok(Some(raw)) => decode_frame(&raw).map_err(SubscriptionError::from),
            Ok(None) => {
                self.done = true;
                return None;
            }
            Err(e) => Err(e),
        };
        if item.is_err() {
            self.done = true;
        }
        Some(item)
    }
}

/// One-line text form: `seq timestamp_us` followed by 24 × `x y z confidence`.
pub fn format_frame_line(frame: &PoseFrame<f32>) -> String {
    let mut line = format!("{} {}", frame.seq, frame.timestamp_us);
    for j in &frame.joints {
        let _ = write!(
            line,
            " {:.6} {:.6} {:.6} {:.6}",
            j.pos[0], j.pos[1], j.pos[2], j.confidence
        );
    }
    line
}
