//! Cascaded low-pass filter over a window of recent poses.
//!
//! The window holds seven slots per coordinate: slot 0 is the newest raw
//! pose and slots 1..=6 hold previously smoothed values. Each new pose
//! shifts the window by one, lands in slot 0, and is then swept forward:
//!
//! ```text
//! for i in 1..=6: H[i] = H[i-1] * smooth + H[i] * (1 - smooth)
//! ```
//!
//! Slot 6 is the output. With `smooth = 0` the sweep is the identity and the
//! filter degenerates to a six-frame delay line.

use thiserror::Error;

use crate::pose::{Joint, Joints};
use crate::scalar::Scalar;
use crate::skeleton::JOINT_COUNT;

/// Slots in the window: the current frame plus six historical frames.
pub const WINDOW_LEN: usize = 7;
pub const DEFAULT_SMOOTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("smoothing coefficient {0} outside [0, 1)")]
pub struct SmoothingError(pub f64);

type Positions<T> = [[T; 3]; JOINT_COUNT];

#[derive(Debug, Clone, PartialEq)]
pub struct SmootherState<T = f32> {
    smooth: T,
    window: Option<[Positions<T>; WINDOW_LEN]>,
}

impl<T: Scalar> SmootherState<T> {
    pub fn new(smooth: T) -> Result<Self, SmoothingError> {
        // also rejects NaN
        if !(smooth >= T::zero() && smooth < T::one()) {
            return Err(SmoothingError(smooth.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { smooth, window: None })
    }

    pub fn smooth(&self) -> T {
        self.smooth
    }

    pub fn is_initialized(&self) -> bool {
        self.window.is_some()
    }

    /// Window slots, newest raw first. `None` before the first frame.
    pub fn window(&self) -> Option<&[Positions<T>; WINDOW_LEN]> {
        self.window.as_ref()
    }

    /// Filters one pose. Confidences are copied from `raw` unchanged.
    pub fn smooth_pose(&mut self, raw: &Joints<T>) -> Joints<T> {
        let incoming: Positions<T> = raw.map(|j| j.pos);
        let window = match &mut self.window {
            None => {
                self.window = Some([incoming; WINDOW_LEN]);
                return *raw;
            }
            Some(w) => w,
        };
        window.rotate_right(1);
        window[0] = incoming;
        let keep = T::one() - self.smooth;
        for i in 1..WINDOW_LEN {
            let (done, rest) = window.split_at_mut(i);
            let prev = &done[i - 1];
            for (cur, prev) in rest[0].iter_mut().zip(prev.iter()) {
                for (c, p) in cur.iter_mut().zip(prev.iter()) {
                    *c = *p * self.smooth + *c * keep;
                }
            }
        }
        let out = &window[WINDOW_LEN - 1];
        std::array::from_fn(|i| Joint {
            pos: out[i],
            confidence: raw[i].confidence,
        })
    }

    /// Forgets the history; the coefficient is kept.
    pub fn reset(&mut self) {
        self.window = None;
    }
}

/// Validates `smooth` and builds an empty state.
pub fn new_smoother<T: Scalar>(smooth: T) -> Result<SmootherState<T>, SmoothingError> {
    SmootherState::new(smooth)
}
