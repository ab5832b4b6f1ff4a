//! Heatmap/offset volumes and the `.hmoseq` sequence file format.
//!
//! File layout (all integers and reals little-endian):
//!
//! | bytes  | field                        |
//! |--------|------------------------------|
//! | 0..4   | magic `HMOS`                 |
//! | 4      | version (1)                  |
//! | 5..8   | reserved, zero               |
//! | 8..12  | frame count (u32)            |
//! | 12..16 | joint count (24)             |
//! | 16..20 | grid side (28)               |
//! | 20..24 | depth bins (28)              |
//! | 24..28 | input side (448)             |
//! | 28..32 | reserved, zero               |
//!
//! followed by `frame count` frames of 672×28×28 heatmap reals and then
//! 2016×28×28 offset reals, each stored as f32. Within a volume the channel
//! varies slowest, then the row, then the column.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::skeleton::{GridGeometry, JOINT_COUNT};

pub const MAGIC: [u8; 4] = *b"HMOS";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

/// Heatmap rows and columns.
pub const GRID_SIDE: usize = 28;
pub const DEPTH_BINS: usize = 28;
pub const CELLS_PER_CHANNEL: usize = GRID_SIDE * GRID_SIDE;
pub const HEATMAP_CHANNELS: usize = JOINT_COUNT * DEPTH_BINS;
pub const OFFSET_CHANNELS: usize = 3 * HEATMAP_CHANNELS;
/// Encoded size of one frame in bytes.
pub const FRAME_BYTES: usize = (HEATMAP_CHANNELS + OFFSET_CHANNELS) * CELLS_PER_CHANNEL * 4;

#[derive(Debug, Error)]
pub enum TensorIoError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, expected \"HMOS\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("header shape mismatch: {field} is {found}, expected {expected}")]
    ShapeMismatch {
        field: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("truncated header ({0} bytes)")]
    TruncatedHeader(usize),
    #[error("frame {frame} is truncated")]
    TruncatedFrame { frame: u32 },
    #[error("frame {frame}: non-finite {volume} value at channel {channel}, row {row}, column {col}")]
    NonFinite {
        frame: u32,
        volume: &'static str,
        channel: usize,
        row: usize,
        col: usize,
    },
    #[error("frame {frame} has a non-canonical shape")]
    NonCanonicalFrame { frame: u32 },
    #[error("declared {declared} frames but {written} were written")]
    FrameCountMismatch { declared: u32, written: u32 },
}

/// Dense `channels × 28 × 28` volume, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume<T> {
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> Volume<T> {
    pub fn zeros(channels: usize) -> Self {
        Self {
            channels,
            data: vec![T::zero(); channels * CELLS_PER_CHANNEL],
        }
    }

    /// Wraps an existing buffer; `None` if its length does not match.
    pub fn from_vec(channels: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == channels * CELLS_PER_CHANNEL).then_some(Self { channels, data })
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn flat_index(channel: usize, row: usize, col: usize) -> usize {
        (channel * GRID_SIDE + row) * GRID_SIDE + col
    }

    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> T {
        self.data[Self::flat_index(channel, row, col)]
    }

    #[inline]
    pub fn set(&mut self, channel: usize, row: usize, col: usize, value: T) {
        self.data[Self::flat_index(channel, row, col)] = value;
    }

    /// Cells of one channel, row-major.
    #[inline]
    pub fn channel(&self, channel: usize) -> &[T] {
        let start = channel * CELLS_PER_CHANNEL;
        &self.data[start..start + CELLS_PER_CHANNEL]
    }

    pub fn channel_range(&self, first: usize, count: usize) -> &[T] {
        let start = first * CELLS_PER_CHANNEL;
        &self.data[start..start + count * CELLS_PER_CHANNEL]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Volume<U> {
        Volume {
            channels: self.channels,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// One inference output: heatmap (672 channels) and offsets (2016 channels).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFrame<T = f32> {
    pub heatmap: Volume<T>,
    pub offsets: Volume<T>,
    pub frame_index: u32,
}

impl<T: Scalar> TensorFrame<T> {
    pub fn zeros(frame_index: u32) -> Self {
        Self {
            heatmap: Volume::zeros(HEATMAP_CHANNELS),
            offsets: Volume::zeros(OFFSET_CHANNELS),
            frame_index,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.heatmap.channels() == HEATMAP_CHANNELS && self.offsets.channels() == OFFSET_CHANNELS
    }

    pub fn cast<U: Scalar>(&self) -> TensorFrame<U> {
        TensorFrame {
            heatmap: self.heatmap.map(|v| U::from_storage(v.to_storage())),
            offsets: self.offsets.map(|v| U::from_storage(v.to_storage())),
            frame_index: self.frame_index,
        }
    }
}

/// Parsed `.hmoseq` header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceHeader {
    pub version: u8,
    pub frame_count: u32,
    pub joint_count: u32,
    pub geometry: GridGeometry,
}

impl SequenceHeader {
    pub fn canonical(frame_count: u32) -> Self {
        Self {
            version: FORMAT_VERSION,
            frame_count,
            joint_count: JOINT_COUNT as u32,
            geometry: GridGeometry::CANONICAL,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4] = self.version;
        b[8..12].copy_from_slice(&self.frame_count.to_le_bytes());
        b[12..16].copy_from_slice(&self.joint_count.to_le_bytes());
        b[16..20].copy_from_slice(&self.geometry.grid_side().to_le_bytes());
        b[20..24].copy_from_slice(&self.geometry.depth_bins().to_le_bytes());
        b[24..28].copy_from_slice(&self.geometry.input_side().to_le_bytes());
        b
    }

    /// Validates magic, version and that every declared shape is canonical.
    pub fn parse(b: &[u8; HEADER_LEN]) -> Result<Self, TensorIoError> {
        let magic = [b[0], b[1], b[2], b[3]];
        if magic != MAGIC {
            return Err(TensorIoError::BadMagic(magic));
        }
        if b[4] != FORMAT_VERSION {
            return Err(TensorIoError::UnsupportedVersion(b[4]));
        }
        let word = |at: usize| u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]]);
        let canon = GridGeometry::CANONICAL;
        let checks: [(&'static str, u32, u32); 6] = [
            ("reserved bytes 5..8", 0, u32::from_le_bytes([0, b[5], b[6], b[7]])),
            ("joint count", JOINT_COUNT as u32, word(12)),
            ("grid side", canon.grid_side(), word(16)),
            ("depth bins", canon.depth_bins(), word(20)),
            ("input side", canon.input_side(), word(24)),
            ("reserved bytes 28..32", 0, word(28)),
        ];
        for (field, expected, found) in checks {
            if expected != found {
                return Err(TensorIoError::ShapeMismatch {
                    field,
                    expected,
                    found,
                });
            }
        }
        Ok(Self::canonical(word(8)))
    }
}

/// Incremental writer for sequences whose length is known up front.
pub struct SequenceWriter<W: Write> {
    sink: W,
    declared: u32,
    written: u32,
    bytes: u64,
    scratch: Vec<u8>,
}

impl<W: Write> SequenceWriter<W> {
    pub fn new(mut sink: W, frame_count: u32) -> Result<Self, TensorIoError> {
        sink.write_all(&SequenceHeader::canonical(frame_count).to_bytes())?;
        Ok(Self {
            sink,
            declared: frame_count,
            written: 0,
            bytes: HEADER_LEN as u64,
            scratch: Vec::with_capacity(CELLS_PER_CHANNEL * 4 * 64),
        })
    }

    pub fn write_frame<T: Scalar>(&mut self, frame: &TensorFrame<T>) -> Result<(), TensorIoError> {
        if !frame.is_canonical() {
            return Err(TensorIoError::NonCanonicalFrame {
                frame: frame.frame_index,
            });
        }
        if self.written == self.declared {
            return Err(TensorIoError::FrameCountMismatch {
                declared: self.declared,
                written: self.written + 1,
            });
        }
        for volume in [&frame.heatmap, &frame.offsets] {
            for chunk in volume.as_slice().chunks(CELLS_PER_CHANNEL * 64) {
                self.scratch.clear();
                for v in chunk {
                    self.scratch.extend_from_slice(&v.to_storage().to_le_bytes());
                }
                self.sink.write_all(&self.scratch)?;
            }
        }
        self.written += 1;
        self.bytes += FRAME_BYTES as u64;
        Ok(())
    }

    /// Flushes and checks that exactly the declared number of frames was written.
    pub fn finish(mut self) -> Result<u64, TensorIoError> {
        self.sink.flush()?;
        if self.written != self.declared {
            return Err(TensorIoError::FrameCountMismatch {
                declared: self.declared,
                written: self.written,
            });
        }
        Ok(self.bytes)
    }
}

/// Writes a complete sequence, returning the number of bytes emitted.
pub fn write_sequence<T: Scalar, W: Write>(frames: &[TensorFrame<T>], sink: W) -> Result<u64, TensorIoError> {
    let count = u32::try_from(frames.len()).expect("frame count fits in u32");
    let mut writer = SequenceWriter::new(sink, count)?;
    for frame in frames {
        writer.write_frame(frame)?;
    }
    writer.finish()
}

/// Streaming reader; yields one frame at a time and holds at most one
/// channel of raw bytes beyond the frame being built.
pub struct SequenceReader<R, T = f32> {
    source: R,
    header: SequenceHeader,
    next: u32,
    failed: bool,
    buf: Vec<u8>,
    _scalar: std::marker::PhantomData<T>,
}

impl<R: Read, T: Scalar> SequenceReader<R, T> {
    pub fn new(mut source: R) -> Result<Self, TensorIoError> {
        let mut raw = [0u8; HEADER_LEN];
        let mut filled = 0;
        while filled < HEADER_LEN {
            match source.read(&mut raw[filled..]) {
                Ok(0) => return Err(TensorIoError::TruncatedHeader(filled)),
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        let header = SequenceHeader::parse(&raw)?;
        Ok(Self {
            source,
            header,
            next: 0,
            failed: false,
            buf: vec![0u8; CELLS_PER_CHANNEL * 4],
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn header(&self) -> &SequenceHeader {
        &self.header
    }

    fn read_volume(&mut self, channels: usize, name: &'static str) -> Result<Volume<T>, TensorIoError> {
        let frame = self.next;
        let mut data = Vec::with_capacity(channels * CELLS_PER_CHANNEL);
        for channel in 0..channels {
            self.source.read_exact(&mut self.buf).map_err(|e| match e.kind() {
                io::ErrorKind::UnexpectedEof => TensorIoError::TruncatedFrame { frame },
                _ => TensorIoError::Io(e),
            })?;
            for (cell, bytes) in self.buf.chunks_exact(4).enumerate() {
                let v = f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
                if !v.is_finite() {
                    return Err(TensorIoError::NonFinite {
                        frame,
                        volume: name,
                        channel,
                        row: cell / GRID_SIDE,
                        col: cell % GRID_SIDE,
                    });
                }
                data.push(T::from_storage(v));
            }
        }
        Ok(Volume { channels, data })
    }

    fn read_frame(&mut self) -> Result<TensorFrame<T>, TensorIoError> {
        let heatmap = self.read_volume(HEATMAP_CHANNELS, "heatmap")?;
        let offsets = self.read_volume(OFFSET_CHANNELS, "offset")?;
        Ok(TensorFrame {
            heatmap,
            offsets,
            frame_index: self.next,
        })
    }
}

impl<R: Read, T: Scalar> Iterator for SequenceReader<R, T> {
    type Item = Result<TensorFrame<T>, TensorIoError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next >= self.header.frame_count {
            return None;
        }
        let result = self.read_frame();
        match result {
            Ok(_) => self.next += 1,
            Err(_) => self.failed = true,
        }
        Some(result)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.header.frame_count - self.next) as usize;
        (0, Some(left))
    }
}

/// Opens a sequence for lazy reading. The header is validated eagerly.
pub fn read_sequence<T: Scalar, R: Read>(source: R) -> Result<SequenceReader<R, T>, TensorIoError> {
    SequenceReader::new(source)
}
