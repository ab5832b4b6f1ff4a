use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use posewire::preprocess::DEFAULT_SIGMA;
use posewire::smoothing::DEFAULT_SMOOTH;
use posewire::stream::server::{DEFAULT_QUEUE_DEPTH, DEFAULT_SEND_BUFFER};

const FORMATS: &str = "\
Formats:
  .hmoseq tensor sequence, version 1: 32-byte header (magic HMOS), then per frame
    672x28x28 heatmap and 2016x28x28 offset values, f32 little-endian.
  Wire protocol, version 1: fixed 402-byte frames (magic POSE, seq u32, timestamp_us u64,
    joint count 24, then 24 x (x, y, z, confidence) f32), little-endian.

Logging: set POSEWIRE_LOG to error, info or debug.";

/// Decode, smooth and stream 3D poses from volumetric heatmap/offset tensors.
#[derive(Debug, Parser)]
#[command(name = "posewire", version, after_help = FORMATS)]
pub struct RunConfig {
    /// More log output (overrides POSEWIRE_LOG)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode a tensor sequence to one text line per frame
    Decode(DecodeArgs),
    /// Replay a tensor sequence to TCP subscribers
    Stream(StreamArgs),
    /// Connect to a stream and print frames as text
    Tail(TailArgs),
    /// Measure per-stage pipeline latency
    Bench(BenchArgs),
    /// Write a synthetic tensor sequence and its ground truth
    Synth(SynthArgs),
    /// Blur frame backgrounds using person masks
    Blur(BlurArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SmoothArgs {
    /// Low-pass coefficient in [0, 1)
    #[arg(long, default_value_t = DEFAULT_SMOOTH as f32, value_parser = parse_smooth, conflicts_with = "no_smooth")]
    pub smooth: f32,

    /// Skip temporal smoothing
    #[arg(long)]
    pub no_smooth: bool,
}

impl SmoothArgs {
    pub fn coefficient(&self) -> Option<f32> {
        (!self.no_smooth).then_some(self.smooth)
    }
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Input .hmoseq file
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,

    #[command(flatten)]
    pub smoothing: SmoothArgs,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Input .hmoseq file
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,

    /// Listen address, e.g. 127.0.0.1:7400
    #[arg(long)]
    pub bind: SocketAddr,

    #[command(flatten)]
    pub smoothing: SmoothArgs,

    /// Replay rate in frames per second
    #[arg(long, default_value_t = 30.0, value_parser = parse_positive)]
    pub fps: f64,

    /// Frames buffered per subscriber before it is dropped
    #[arg(long, default_value_t = DEFAULT_QUEUE_DEPTH, value_parser = parse_depth)]
    pub queue_depth: usize,

    /// Kernel send buffer per subscriber, in bytes
    #[arg(long, value_name = "BYTES", default_value_t = DEFAULT_SEND_BUFFER)]
    pub send_buffer: usize,

    /// Wait for this many subscribers before sending the first frame
    #[arg(long, default_value_t = 0)]
    pub wait_for: usize,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    /// Server address
    pub addr: String,

    /// Stop after this many frames
    #[arg(long)]
    pub count: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Input .hmoseq file; omit to benchmark a synthetic sequence
    #[arg(long = "in", value_name = "FILE", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,

    /// Generate this many synthetic frames instead of reading a file
    #[arg(long, value_name = "FRAMES", conflicts_with = "input", value_parser = clap::value_parser!(u32).range(1..))]
    pub synthetic: Option<u32>,

    /// Seed for --synthetic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Pipeline steps to time (frames are cycled)
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,

    #[command(flatten)]
    pub smoothing: SmoothArgs,

    /// Also time rayon per-joint decoding as its own stage
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of frames to generate
    #[arg(long, default_value_t = 1)]
    pub frames: u32,

    /// RNG seed; the same seed gives byte-identical output
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output .hmoseq file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Ground-truth sidecar path [default: <out>.truth]
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BlurArgs {
    /// Directory of NNNNNN.ppm frames
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,

    /// Directory of NNNNNN.pgm masks
    #[arg(long, value_name = "DIR")]
    pub masks: PathBuf,

    /// Gaussian sigma in pixels
    #[arg(long, default_value_t = DEFAULT_SIGMA, value_parser = parse_positive)]
    pub sigma: f64,

    /// Soften the mask edge over this many pixels
    #[arg(long, value_name = "PX")]
    pub feather: Option<usize>,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

fn parse_smooth(s: &str) -> Result<f32, String> {
    let v: f32 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

fn parse_depth(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("queue depth must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}
