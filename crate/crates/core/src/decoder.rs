//! Per-joint heatmap argmax with offset refinement.
//!
//! Joint `j` owns heatmap channels `j*28 .. j*28+28` (one per depth bin).
//! The highest cell `(k, v, u)` in that slab is the coarse location; the
//! offset volume stores the x, y and z corrections in three consecutive
//! 672-channel blocks, each indexed by the same `j*28 + k`.
//!
//! Ties resolve to the lexicographically smallest `(k, v, u)`.

use rayon::prelude::*;

use crate::pose::{Joint, Joints};
use crate::scalar::Scalar;
use crate::skeleton::{JointId, JOINT_COUNT};
use crate::tensor::{TensorFrame, Volume, DEPTH_BINS, GRID_SIDE, HEATMAP_CHANNELS};

/// Heatmap cell as (depth, row, column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub k: usize,
    pub v: usize,
    pub u: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawJoint<T = f32> {
    pub joint: JointId,
    /// (x, y, z) in grid units.
    pub grid_pos: [T; 3],
    pub peak_cell: Cell,
    /// Heatmap value at the peak.
    pub confidence: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawPose<T = f32> {
    pub joints: [RawJoint<T>; JOINT_COUNT],
    pub frame_index: u32,
}

impl<T: Scalar> RawPose<T> {
    /// Positions and confidences without the decode bookkeeping.
    pub fn to_joints(&self) -> Joints<T> {
        self.joints.map(|j| Joint {
            pos: j.grid_pos,
            confidence: j.confidence,
        })
    }
}

/// Finds the peak of a joint's 28-channel slab.
pub fn argmax_slab<T: Scalar>(heatmap: &Volume<T>, joint: JointId) -> (Cell, T) {
    let slab = heatmap.channel_range(joint.index() * DEPTH_BINS, DEPTH_BINS);
    let mut best = 0;
    let mut best_val = slab[0];
    for (i, &v) in slab.iter().enumerate().skip(1) {
        // strict comparison keeps the first (smallest flat index) maximum
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    let cell = Cell {
        k: best / (GRID_SIDE * GRID_SIDE),
        v: (best / GRID_SIDE) % GRID_SIDE,
        u: best % GRID_SIDE,
    };
    (cell, best_val)
}

/// Reads the (dx, dy, dz) correction stored for `joint` at `cell`.
#[inline]
pub fn read_offsets<T: Scalar>(offsets: &Volume<T>, joint: JointId, cell: Cell) -> [T; 3] {
    let channel = joint.index() * DEPTH_BINS + cell.k;
    [0, 1, 2].map(|axis| offsets.get(axis * HEATMAP_CHANNELS + channel, cell.v, cell.u))
}

pub fn decode_joint<T: Scalar>(frame: &TensorFrame<T>, joint: JointId) -> RawJoint<T> {
    let (cell, score) = argmax_slab(&frame.heatmap, joint);
    let [dx, dy, dz] = read_offsets(&frame.offsets, joint, cell);
    RawJoint {
        joint,
        grid_pos: [
            T::from_index(cell.u) + dx,
            T::from_index(cell.v) + dy,
            T::from_index(cell.k) + dz,
        ],
        peak_cell: cell,
        confidence: score,
    }
}

/// Decodes all 24 joints in canonical order.
pub fn decode_pose<T: Scalar>(frame: &TensorFrame<T>) -> RawPose<T> {
    debug_assert!(frame.is_canonical());
    RawPose {
        joints: std::array::from_fn(|i| decode_joint(frame, JointId::new(i).expect("index < 24"))),
        frame_index: frame.frame_index,
    }
}

/// Same result as [`decode_pose`], with joints decoded on the rayon pool.
pub fn decode_pose_parallel<T: Scalar>(frame: &TensorFrame<T>) -> RawPose<T> {
    let decoded: Vec<RawJoint<T>> = JointId::all()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|j| decode_joint(frame, j))
        .collect();
    RawPose {
        joints: decoded.try_into().expect("24 joints"),
        frame_index: frame.frame_index,
    }
}
