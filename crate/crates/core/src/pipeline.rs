//! Decode → smooth → image-space conversion for a stream of tensor frames.

use crate::decoder::{decode_pose, decode_pose_parallel, RawPose};
use crate::pose::{Joints, PoseFrame};
use crate::scalar::Scalar;
use crate::skeleton::GridGeometry;
use crate::smoothing::{SmootherState, SmoothingError};
use crate::tensor::TensorFrame;

#[derive(Debug, Clone)]
pub struct Pipeline<T = f32> {
    smoother: Option<SmootherState<T>>,
    geometry: GridGeometry,
    parallel: bool,
    next_seq: u32,
}

impl<T: Scalar> Pipeline<T> {
    /// `smooth = None` bypasses the temporal filter.
    pub fn new(smooth: Option<T>) -> Result<Self, SmoothingError> {
        Ok(Self {
            smoother: smooth.map(SmootherState::new).transpose()?,
            geometry: GridGeometry::CANONICAL,
            parallel: false,
            next_seq: 0,
        })
    }

    pub fn with_parallel_decode(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn decode(&self, frame: &TensorFrame<T>) -> RawPose<T> {
        if self.parallel {
            decode_pose_parallel(frame)
        } else {
            decode_pose(frame)
        }
    }

    /// Grid-space smoothing; identity when smoothing is disabled.
    pub fn smooth(&mut self, raw: &RawPose<T>) -> Joints<T> {
        let joints = raw.to_joints();
        match &mut self.smoother {
            Some(state) => state.smooth_pose(&joints),
            None => joints,
        }
    }

    pub fn to_frame(&mut self, joints: &Joints<T>, timestamp_us: u64) -> PoseFrame<T> {
        let seq = self.next_seq;
        self.next_seq = self.next_seq.wrapping_add(1);
        PoseFrame::from_grid(seq, timestamp_us, joints, &self.geometry)
    }

    /// Runs all stages for one frame. Sequence numbers count up from 0.
    pub fn process(&mut self, frame: &TensorFrame<T>, timestamp_us: u64) -> PoseFrame<T> {
        let raw = self.decode(frame);
        let joints = self.smooth(&raw);
        self.to_frame(&joints, timestamp_us)
    }

    pub fn reset(&mut self) {
        if let Some(s) = &mut self.smoother {
            s.reset();
        }
        self.next_seq = 0;
    }
}
