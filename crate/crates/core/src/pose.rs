//! Decoded pose containers shared by smoothing, streaming and the CLI.

use crate::scalar::Scalar;
use crate::skeleton::{grid_to_image, GridGeometry, JOINT_COUNT};

/// One joint position with its detection confidence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Joint<T> {
    pub pos: [T; 3],
    pub confidence: T,
}

/// All 24 joints in canonical order.
pub type Joints<T> = [Joint<T>; JOINT_COUNT];

pub fn zero_joints<T: Scalar>() -> Joints<T> {
    [Joint {
        pos: [T::zero(); 3],
        confidence: T::zero(),
    }; JOINT_COUNT]
}

/// A timestamped pose ready for consumers: x and y in input-image pixels,
/// z in grid units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseFrame<T = f32> {
    pub seq: u32,
    pub timestamp_us: u64,
    pub joints: Joints<T>,
}

impl<T: Scalar> PoseFrame<T> {
    pub fn zeroed(seq: u32, timestamp_us: u64) -> Self {
        Self {
            seq,
            timestamp_us,
            joints: zero_joints(),
        }
    }

    /// Converts grid-space joints into a frame with image-space x/y.
    pub fn from_grid(seq: u32, timestamp_us: u64, joints: &Joints<T>, geom: &GridGeometry) -> Self {
        let joints = joints.map(|j| Joint {
            pos: grid_to_image(j.pos, geom),
            confidence: j.confidence,
        });
        Self {
            seq,
            timestamp_us,
            joints,
        }
    }
}
