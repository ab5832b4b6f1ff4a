//! Synthetic tensors with known answers, and a deliberately naive decoder.
//!
//! [`render_frame`] inverts the decoder: it plants a single peak per joint
//! slab over background noise bounded by half the peak, then writes the
//! exact sub-cell remainder into the offset volume. [`oracle_decode`]
//! re-implements decoding with plain nested loops over the raw buffers so
//! it can be checked against the optimized path.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decoder::{Cell, RawJoint, RawPose};
use crate::scalar::Scalar;
use crate::skeleton::{JointId, JOINT_COUNT};
use crate::tensor::{TensorFrame, DEPTH_BINS, GRID_SIDE, HEATMAP_CHANNELS, OFFSET_CHANNELS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("joint {joint} coordinate {value} outside [0, 28)")]
    OutOfGrid { joint: usize, value: f64 },
    #[error("peak value must be positive and finite, got {0}")]
    BadPeak(f64),
    #[error("malformed ground-truth line: {0}")]
    Parse(String),
}

/// Known joint positions in grid units.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthPose<T = f32> {
    positions: [[T; 3]; JOINT_COUNT],
    peak_value: T,
}

impl<T: Scalar> GroundTruthPose<T> {
    pub fn new(positions: [[T; 3]; JOINT_COUNT], peak_value: T) -> Result<Self, SynthError> {
        let limit = T::from_index(GRID_SIDE);
        for (joint, p) in positions.iter().enumerate() {
            for &c in p {
                if !(c >= T::zero() && c < limit) {
                    return Err(SynthError::OutOfGrid {
                        joint,
                        value: c.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        if !(peak_value > T::zero() && peak_value.is_finite()) {
            return Err(SynthError::BadPeak(peak_value.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self {
            positions,
            peak_value,
        })
    }

    /// Uniformly random positions in the grid with peak value 1.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let limit = GRID_SIDE as f64;
        let positions = std::array::from_fn(|_| {
            std::array::from_fn(|_| {
                let mut c = T::from_f64_lossy(rng.gen_range(0.0..limit));
                // narrowing may round up onto the open bound
                while c >= T::from_index(GRID_SIDE) {
                    c = T::from_f64_lossy(rng.gen_range(0.0..limit));
                }
                c
            })
        });
        Self::new(positions, T::one()).expect("random pose is in range")
    }

    pub fn positions(&self) -> &[[T; 3]; JOINT_COUNT] {
        &self.positions
    }

    pub fn peak_value(&self) -> T {
        self.peak_value
    }

    /// Sidecar text form: 72 space-separated reals (x y z per joint),
    /// printed in shortest round-trip form.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self
            .positions
            .iter()
            .flat_map(|p| p.iter().map(|c| c.to_string()))
            .collect();
        parts.join(" ")
    }

    pub fn parse_line(line: &str) -> Result<Self, SynthError> {
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| SynthError::Parse(format!("{t}: {e}"))))
            .collect::<Result<_, _>>()?;
        if values.len() != 3 * JOINT_COUNT {
            return Err(SynthError::Parse(format!("expected 72 values, found {}", values.len())));
        }
        let positions =
            std::array::from_fn(|j| std::array::from_fn(|a| T::from_f64_lossy(values[3 * j + a])));
        Self::new(positions, T::one())
    }
}

/// Nearest heatmap index for a grid coordinate; 27.5 and above map to 27.
fn nearest_cell<T: Scalar>(c: T) -> usize {
    c.round().to_usize().unwrap_or(0).min(GRID_SIDE - 1)
}

/// Renders heatmap and offset volumes from which the decoder recovers
/// `truth` exactly.
pub fn render_frame<T: Scalar, R: Rng + ?Sized>(
    truth: &GroundTruthPose<T>,
    frame_index: u32,
    rng: &mut R,
) -> TensorFrame<T> {
    let peak = truth.peak_value.to_f64().expect("finite peak");
    let half = peak / 2.0;
    let mut frame = TensorFrame::zeros(frame_index);
    for v in frame.heatmap.as_mut_slice() {
        *v = T::from_f64_lossy(rng.gen_range(0.0..half));
    }
    for v in frame.offsets.as_mut_slice() {
        *v = T::from_f64_lossy(rng.gen_range(-1.0..1.0));
    }
    for (j, &[x, y, z]) in truth.positions.iter().enumerate() {
        let (u, v, k) = (nearest_cell(x), nearest_cell(y), nearest_cell(z));
        let channel = j * DEPTH_BINS + k;
        frame.heatmap.set(channel, v, u, truth.peak_value);
        let planted = [
            x - T::from_index(u),
            y - T::from_index(v),
            z - T::from_index(k),
        ];
        for (axis, d) in planted.into_iter().enumerate() {
            frame.offsets.set(axis * HEATMAP_CHANNELS + channel, v, u, d);
        }
    }
    frame
}

/// Flavours of random heatmap content for oracle comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapNoise {
    /// Uniform in [0, 1).
    Continuous,
    /// Integers in `0..levels`; produces many exact ties.
    Quantized(u32),
    /// One value everywhere; every cell ties.
    Constant,
}

/// Arbitrary finite frame (not a rendered pose).
pub fn random_frame<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    noise: HeatmapNoise,
    frame_index: u32,
) -> TensorFrame<T> {
    let mut frame = TensorFrame::zeros(frame_index);
    let constant: f64 = rng.gen_range(-2.0..2.0);
    for v in frame.heatmap.as_mut_slice() {
        let x = match noise {
            HeatmapNoise::Continuous => rng.gen::<f64>(),
            HeatmapNoise::Quantized(levels) => rng.gen_range(0..levels.max(1)) as f64,
            HeatmapNoise::Constant => constant,
        };
        *v = T::from_f64_lossy(x);
    }
    for v in frame.offsets.as_mut_slice() {
        *v = T::from_f64_lossy(rng.gen_range(-1.0..1.0));
    }
    frame
}

/// Reference decoder: exhaustive loops over the flat buffers.
///
/// Conformance rule shared with the optimized decoder: the peak is the first
/// maximum met when scanning depth, then row, then column in increasing
/// order, i.e. ties go to the lexicographically smallest (k, v, u).
pub fn oracle_decode<T: Scalar>(frame: &TensorFrame<T>) -> RawPose<T> {
    assert_eq!(frame.heatmap.channels(), HEATMAP_CHANNELS);
    assert_eq!(frame.offsets.channels(), OFFSET_CHANNELS);
    let heat = frame.heatmap.as_slice();
    let off = frame.offsets.as_slice();
    let n = GRID_SIDE;
    let joints = std::array::from_fn(|j| {
        let mut best_k = 0;
        let mut best_v = 0;
        let mut best_u = 0;
        let mut best = heat[j * 28 * n * n];
        for k in 0..28 {
            for v in 0..n {
                for u in 0..n {
                    let value = heat[(j * 28 + k) * n * n + v * n + u];
                    if value > best {
                        best = value;
                        best_k = k;
                        best_v = v;
                        best_u = u;
                    }
                }
            }
        }
        let at = |block: usize| off[(block * 672 + j * 28 + best_k) * n * n + best_v * n + best_u];
        let ku = T::from_f64_lossy(best_u as f64);
        let kv = T::from_f64_lossy(best_v as f64);
        let kk = T::from_f64_lossy(best_k as f64);
        RawJoint {
            joint: JointId::new(j).expect("j < 24"),
            grid_pos: [ku + at(0), kv + at(1), kk + at(2)],
            peak_cell: Cell {
                k: best_k,
                v: best_v,
                u: best_u,
            },
            confidence: best,
        }
    });
    RawPose {
        joints,
        frame_index: frame.frame_index,
    }
}

/// Deterministic stream of `(truth, rendered frame)` pairs.
pub struct SynthSequence<T = f32> {
    rng: ChaCha8Rng,
    next: u32,
    count: u32,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> SynthSequence<T> {
    pub fn new(count: u32, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next: 0,
            count,
            _scalar: std::marker::PhantomData,
        }
    }
}

impl<T: Scalar> Iterator for SynthSequence<T> {
    type Item = (GroundTruthPose<T>, TensorFrame<T>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.count {
            return None;
        }
        let truth = GroundTruthPose::random(&mut self.rng);
        let frame = render_frame(&truth, self.next, &mut self.rng);
        self.next += 1;
        Some((truth, frame))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.count - self.next) as usize;
        (left, Some(left))
    }
}

impl<T: Scalar> ExactSizeIterator for SynthSequence<T> {}
