//! Per-stage latency measurement for the decode/smooth/encode pipeline.

use std::borrow::Borrow;
use std::fmt::{self, Write as _};
use std::time::Instant;

use thiserror::Error;

use crate::pose::PoseFrame;
use crate::pipeline::Pipeline;
use crate::smoothing::SmoothingError;
use crate::stream::wire::encode_frame;
use crate::tensor::TensorFrame;

/// Fraction of leading samples discarded as warm-up.
pub const WARMUP_FRACTION: f64 = 0.10;
/// Nominal frame period used for synthetic timestamps (30 fps).
const NOMINAL_PERIOD_US: u64 = 33_333;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark needs at least one frame")]
    EmptySequence,
    #[error(transparent)]
    Smoothing(#[from] SmoothingError),
    #[error("parallel decode diverged from serial decode at iteration {0}")]
    ParallelMismatch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Decode,
    DecodeParallel,
    Smooth,
    Encode,
    Total,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Decode => "decode",
            Stage::DecodeParallel => "decode_parallel",
            Stage::Smooth => "smooth",
            Stage::Encode => "encode",
            Stage::Total => "total",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: Stage,
    /// Post-warm-up samples in microseconds, in measurement order.
    pub samples_us: Vec<f64>,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    pub mean_us: f64,
    pub fps: f64,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl StageTiming {
    pub fn from_samples(stage: Stage, samples_us: Vec<f64>) -> Self {
        let mut sorted = samples_us.clone();
        sorted.sort_by(f64::total_cmp);
        let mean_us = sorted.iter().sum::<f64>() / sorted.len() as f64;
        Self {
            stage,
            p50_us: percentile(&sorted, 50.0),
            p95_us: percentile(&sorted, 95.0),
            p99_us: percentile(&sorted, 99.0),
            mean_us,
            fps: if mean_us > 0.0 { 1e6 / mean_us } else { f64::INFINITY },
            samples_us,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Pipeline steps actually timed, warm-up included.
    pub iterations: usize,
    pub warmup: usize,
    pub hardware: String,
    pub stages: Vec<StageTiming>,
    /// Pipeline output for every iteration, warm-up included.
    pub outputs: Vec<PoseFrame<f32>>,
}

impl BenchReport {
    pub fn stage(&self, stage: Stage) -> Option<&StageTiming> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    /// Text report: `#` metadata lines, a column header, then one line per
    /// stage with name, p50, p95, p99, mean (all µs) and fps.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# iterations={} warmup={}",
            self.iterations, self.warmup
        );
        let _ = writeln!(out, "# hardware: {}", self.hardware);
        let _ = writeln!(out, "stage p50_us p95_us p99_us mean_us fps");
        for s in &self.stages {
            let _ = writeln!(
                out,
                "{} {:.3} {:.3} {:.3} {:.3} {:.2}",
                s.stage, s.p50_us, s.p95_us, s.p99_us, s.mean_us, s.fps
            );
        }
        out
    }
}

/// CPU model and logical core count, best effort.
pub fn hardware_summary() -> String {
    let model = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|info| {
            info.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_owned())
        })
        .unwrap_or_else(|| "unknown cpu".to_owned());
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{model}; {threads} logical cpus; {} {}", std::env::consts::OS, std::env::consts::ARCH)
}

fn micros(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e6
}

/// Runs up to `iterations` pipeline steps, one per frame pulled from
/// `frames`. Pass a cycling iterator to repeat a short sequence.
///
/// Stages are timed individually with a monotonic clock; `total` spans
/// decode + smooth + encode for the same step. With `parallel`, a rayon
/// decode of the same frame is timed as its own stage and checked against
/// the serial result.
pub fn run_bench<I>(frames: I, iterations: usize, smooth: Option<f32>, parallel: bool) -> Result<BenchReport, BenchError>
where
    I: IntoIterator,
    I::Item: Borrow<TensorFrame<f32>>,
{
    let mut pipeline = Pipeline::new(smooth)?;
    let mut decode = Vec::with_capacity(iterations);
    let mut smooth_t = Vec::with_capacity(iterations);
    let mut encode = Vec::with_capacity(iterations);
    let mut total = Vec::with_capacity(iterations);
    let mut par = Vec::new();
    let mut outputs = Vec::with_capacity(iterations);
    let mut sink = 0u8;

    for (i, frame) in frames.into_iter().take(iterations).enumerate() {
        let frame = frame.borrow();
        let t0 = Instant::now();
        let raw = pipeline.decode(frame);
        let t_decode = micros(t0);

        let t1 = Instant::now();
        let joints = pipeline.smooth(&raw);
        let pose = pipeline.to_frame(&joints, i as u64 * NOMINAL_PERIOD_US);
        let t_smooth = micros(t1);

        let t2 = Instant::now();
        let bytes = encode_frame(&pose);
        let t_encode = micros(t2);
        let t_total = micros(t0);
        sink ^= bytes[401];

        decode.push(t_decode);
        smooth_t.push(t_smooth);
        encode.push(t_encode);
        total.push(t_total);
        outputs.push(pose);

        if parallel {
            let t3 = Instant::now();
            let par_raw = crate::decoder::decode_pose_parallel(frame);
            par.push(micros(t3));
            if par_raw != raw {
                return Err(BenchError::ParallelMismatch(i));
            }
        }
    }
    std::hint::black_box(sink);
    let iterations = outputs.len();
    if iterations == 0 {
        return Err(BenchError::EmptySequence);
    }

    let warmup = (iterations as f64 * WARMUP_FRACTION).floor() as usize;
    let trim = |v: Vec<f64>| v[warmup..].to_vec();
    let mut stages = vec![
        StageTiming::from_samples(Stage::Decode, trim(decode)),
        StageTiming::from_samples(Stage::Smooth, trim(smooth_t)),
        StageTiming::from_samples(Stage::Encode, trim(encode)),
        StageTiming::from_samples(Stage::Total, trim(total)),
    ];
    if parallel {
        stages.insert(1, StageTiming::from_samples(Stage::DecodeParallel, trim(par)));
    }
    Ok(BenchReport {
        iterations,
        warmup,
        hardware: hardware_summary(),
        stages,
        outputs,
    })
}
