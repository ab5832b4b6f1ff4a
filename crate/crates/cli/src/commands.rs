use std::cell::RefCell;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use log::info;

use posewire::bench::run_bench;
use posewire::pipeline::Pipeline;
use posewire::preprocess::{blur_background, pnm, threshold_mask};
use posewire::stream::{format_frame_line, paced, Server, ServerConfig, Subscription};
use posewire::synth::SynthSequence;
use posewire::tensor::{read_sequence, SequenceReader, SequenceWriter, TensorFrame};
use posewire::PoseFrame;

use crate::args::{BenchArgs, BlurArgs, DecodeArgs, StreamArgs, SynthArgs, TailArgs};

fn open_sequence(path: &Path) -> Result<SequenceReader<BufReader<File>, f32>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_sequence(BufReader::new(file)).with_context(|| format!("tensorio: {}", path.display()))
}

/// `frame_index` followed by 24 × `x y z confidence`, six decimals.
pub fn decode_line(frame_index: u32, pose: &PoseFrame<f32>) -> String {
    let mut line = frame_index.to_string();
    for j in &pose.joints {
        let _ = write!(line, " {:.6} {:.6} {:.6} {:.6}", j.pos[0], j.pos[1], j.pos[2], j.confidence);
    }
    line
}

pub fn run_decode(args: &DecodeArgs) -> Result<()> {
    let reader = open_sequence(&args.input)?;
    let mut pipeline = Pipeline::new(args.smoothing.coefficient()).context("smoothing")?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for frame in reader {
        let frame = frame.with_context(|| format!("tensorio: {}", args.input.display()))?;
        let pose = pipeline.process(&frame, 0);
        writeln!(out, "{}", decode_line(frame.frame_index, &pose))?;
    }
    out.flush()?;
    Ok(())
}

pub fn run_stream(args: &StreamArgs) -> Result<()> {
    let reader = open_sequence(&args.input)?;
    let frame_count = reader.header().frame_count;
    let mut pipeline = Pipeline::new(args.smoothing.coefficient()).context("smoothing")?;
    let config = ServerConfig {
        queue_depth: args.queue_depth,
        send_buffer_bytes: Some(args.send_buffer),
    };
    let server = Server::bind(args.bind, config).with_context(|| format!("stream: cannot bind {}", args.bind))?;
    eprintln!("posewire: streaming {frame_count} frames on {}", server.local_addr());
    if args.wait_for > 0 {
        info!("waiting for {} subscribers", args.wait_for);
        while !server.wait_for_subscribers(args.wait_for, Duration::from_secs(1)) {}
    }

    let failure = RefCell::new(None);
    let start = Instant::now();
    let frames = reader
        .map_while(|f| match f {
            Ok(f) => Some(f),
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                None
            }
        })
        .map(|f: TensorFrame<f32>| {
            let raw = pipeline.decode(&f);
            let joints = pipeline.smooth(&raw);
            pipeline.to_frame(&joints, start.elapsed().as_micros() as u64)
        });
    let report = server.serve(paced(frames, args.fps)).context("stream")?;
    info!(
        "sent {} frames to {} subscribers ({} dropped as slow, {} failed)",
        report.frames_sent, report.subscribers_accepted, report.subscribers_dropped_slow, report.subscribers_failed
    );
    if let Some(e) = failure.into_inner() {
        return Err(anyhow::Error::new(e).context(format!("tensorio: {}", args.input.display())));
    }
    Ok(())
}

pub fn run_tail(args: &TailArgs) -> Result<()> {
    let sub = Subscription::connect(&args.addr).with_context(|| format!("stream: cannot connect to {}", args.addr))?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let limit = args.count.unwrap_or(u64::MAX);
    for (n, frame) in sub.enumerate() {
        if n as u64 >= limit {
            break;
        }
        let frame = frame.context("stream")?;
        if let Err(e) = writeln!(out, "{}", format_frame_line(&frame)) {
            if e.kind() == io::ErrorKind::BrokenPipe {
                return Ok(());
            }
            return Err(e.into());
        }
    }
    Ok(())
}

pub fn run_bench_cmd(args: &BenchArgs) -> Result<()> {
    let iterations = usize::try_from(args.iters).context("bench: --iters too large")?;
    let smooth = args.smoothing.coefficient();
    let report = match (&args.input, args.synthetic) {
        (Some(path), _) => {
            if open_sequence(path)?.header().frame_count == 0 {
                bail!("bench: {} holds no frames", path.display());
            }
            // re-read the file as often as needed; frames are streamed, not held
            let failure = RefCell::new(None);
            let frames = std::iter::repeat_with(|| open_sequence(path))
                .map_while(|r| r.map_err(|e| *failure.borrow_mut() = Some(e)).ok())
                .flatten()
                .map_while(|f| {
                    f.map_err(|e| *failure.borrow_mut() = Some(anyhow::Error::new(e).context(format!("tensorio: {}", path.display()))))
                        .ok()
                });
            let report = run_bench(frames, iterations, smooth, args.parallel);
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            report
        }
        (None, Some(n)) => {
            // synthetic frames are rendered on demand, outside the timed region
            let frames = std::iter::repeat_with(|| SynthSequence::<f32>::new(n, args.seed).map(|(_, f)| f)).flatten();
            run_bench(frames, iterations, smooth, args.parallel)
        }
        (None, None) => bail!("bench: either --in or --synthetic is required"),
    }
    .context("bench")?;
    print!("{}", report.render());
    Ok(())
}

fn truth_path(args: &SynthArgs) -> PathBuf {
    args.truth.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".truth");
        PathBuf::from(p)
    })
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let out = File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let truth_file = truth_path(args);
    let truth = File::create(&truth_file).with_context(|| format!("cannot create {}", truth_file.display()))?;
    let mut truth = BufWriter::new(truth);
    let mut writer = SequenceWriter::new(BufWriter::new(out), args.frames).context("tensorio")?;
    for (pose, frame) in SynthSequence::<f32>::new(args.frames, args.seed) {
        writer.write_frame(&frame).context("tensorio")?;
        writeln!(truth, "{}", pose.to_line())?;
    }
    let bytes = writer.finish().context("tensorio")?;
    truth.flush()?;
    info!("wrote {bytes} bytes to {}", args.out.display());
    Ok(())
}

fn read_image(path: &Path) -> Result<posewire::preprocess::RasterImage> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    pnm::read_pnm(BufReader::new(file)).with_context(|| format!("preprocess: {}", path.display()))
}

pub fn run_blur(args: &BlurArgs) -> Result<()> {
    let mut frames: Vec<PathBuf> = fs::read_dir(&args.frames)
        .with_context(|| format!("cannot read {}", args.frames.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    frames.retain(|p| p.extension().is_some_and(|e| e == "ppm"));
    frames.sort();
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    for frame_path in &frames {
        let stem = frame_path.file_stem().expect("file has a name");
        let mask_path = args.masks.join(stem).with_extension("pgm");
        if !mask_path.exists() {
            bail!("preprocess: missing mask {} for frame {}", mask_path.display(), frame_path.display());
        }
        let frame = read_image(frame_path)?;
        if frame.channels() != 3 {
            bail!("preprocess: {} is not an RGB image", frame_path.display());
        }
        let mask = threshold_mask(&read_image(&mask_path)?).with_context(|| format!("preprocess: {}", mask_path.display()))?;
        let blurred = blur_background(&frame, &mask, args.sigma, args.feather)
            .with_context(|| format!("preprocess: {}", frame_path.display()))?;
        let out_path = args.out.join(frame_path.file_name().expect("file has a name"));
        let out = File::create(&out_path).with_context(|| format!("cannot create {}", out_path.display()))?;
        pnm::write_pnm(&blurred, BufWriter::new(out))?;
    }
    info!("blurred {} frames", frames.len());
    Ok(())
}
