//! Real-time 3D pose decoding from volumetric heatmap/offset tensors.
//!
//! The crate turns recorded network outputs (`.hmoseq` files) into 24-joint
//! poses, smooths them over time, and broadcasts them as fixed-size binary
//! frames. A synthetic renderer and an exhaustive reference decoder live in
//! [`synth`] so every numeric path can be checked without a trained model.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common instantiations.

pub mod bench;
pub mod decoder;
pub mod pipeline;
pub mod pose;
pub mod preprocess;
pub mod scalar;
pub mod skeleton;
pub mod smoothing;
pub mod stream;
pub mod synth;
pub mod tensor;

pub use decoder::{argmax_slab, decode_joint, decode_pose, decode_pose_parallel, read_offsets, Cell, RawJoint, RawPose};
pub use pose::{Joint, Joints, PoseFrame};
pub use scalar::Scalar;
pub use skeleton::{bone_lengths, grid_to_image, joint_index, GridGeometry, JointId, SkeletonTopology, JOINT_COUNT};
pub use smoothing::{new_smoother, SmootherState};
pub use tensor::{read_sequence, write_sequence, TensorFrame, Volume};

pub type TensorFrame32 = tensor::TensorFrame<f32>;
pub type TensorFrame64 = tensor::TensorFrame<f64>;
pub type RawPose32 = decoder::RawPose<f32>;
pub type RawPose64 = decoder::RawPose<f64>;
pub type PoseFrame32 = pose::PoseFrame<f32>;
pub type PoseFrame64 = pose::PoseFrame<f64>;
pub type Smoother32 = smoothing::SmootherState<f32>;
pub type Smoother64 = smoothing::SmootherState<f64>;
pub type Pipeline32 = pipeline::Pipeline<f32>;
pub type GroundTruthPose32 = synth::GroundTruthPose<f32>;
