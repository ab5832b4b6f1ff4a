use std::fs::{self, File};
use std::io::BufWriter;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use posewire::preprocess::{pnm, RasterImage};
use posewire::tensor::{write_sequence, TensorFrame};

fn posewire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posewire"))
        .args(args)
        .output()
        .expect("run posewire")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write_zero_sequence(path: &Path, frames: u32) {
    let frames: Vec<TensorFrame<f32>> = (0..frames).map(TensorFrame::zeros).collect();
    write_sequence(&frames, BufWriter::new(File::create(path).unwrap())).unwrap();
}

#[test]
fn decode_zero_frame() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.hmoseq");
    write_zero_sequence(&path, 1);
    let out = posewire(&["decode", "--in", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let expected = format!("0{}\n", " 0.000000 0.000000 0.000000 0.000000".repeat(24));
    assert_eq!(text(&out.stdout), expected);
}

#[test]
fn decode_missing_file_names_path() {
    let out = posewire(&["decode", "--in", "/nonexistent/input.hmoseq"]);
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("/nonexistent/input.hmoseq"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn decode_reports_truncated_frame() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.hmoseq");
    write_zero_sequence(&path, 2);
    let len = fs::metadata(&path).unwrap().len();
    File::options().write(true).open(&path).unwrap().set_len(len - 100).unwrap();
    let out = posewire(&["decode", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("tensorio"));
    assert!(text(&out.stderr).contains("frame 1 is truncated"));
    // the intact first frame is still emitted
    assert_eq!(text(&out.stdout).lines().count(), 1);
}

#[test]
fn usage_errors() {
    let out = posewire(&["decode", "--in", "a.hmoseq", "--smooth", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = posewire(&["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    for sub in ["decode", "stream", "tail", "bench", "synth", "blur"] {
        assert!(err.contains(sub), "{err}");
    }
    let out = posewire(&["decode", "--in", "a", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_documents_formats() {
    let out = posewire(&["--help"]);
    assert!(out.status.success());
    let help = text(&out.stdout);
    assert!(help.contains(".hmoseq tensor sequence, version 1"));
    assert!(help.contains("Wire protocol, version 1"));
    assert!(help.contains("POSEWIRE_LOG"));
    let out = posewire(&["stream", "--help"]);
    let help = text(&out.stdout);
    for flag in ["--in", "--bind", "--smooth", "--no-smooth", "--fps", "--queue-depth"] {
        assert!(help.contains(flag), "missing {flag}");
    }
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = posewire(&["synth", "--frames", "2", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        (fs::read(&out).unwrap(), fs::read_to_string(dir.path().join(format!("{name}.truth"))).unwrap())
    };
    let a = run("a.hmoseq", "9");
    let b = run("b.hmoseq", "9");
    let c = run("c.hmoseq", "10");
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
    assert_eq!(a.1.lines().count(), 2);
}

#[test]
fn bench_report_format() {
    let out = posewire(&["bench", "--synthetic", "5", "--iters", "40", "--parallel"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report = text(&out.stdout);
    let lines: Vec<&str> = report.lines().collect();
    assert!(lines[0].starts_with("# iterations=40 warmup=4"));
    assert!(lines[1].starts_with("# hardware: "));
    assert_eq!(lines[2], "stage p50_us p95_us p99_us mean_us fps");
    let stages: Vec<&str> = lines[3..].iter().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(stages, ["decode", "decode_parallel", "smooth", "encode", "total"]);
    for line in &lines[3..] {
        let nums: Vec<f64> = line.split(' ').skip(1).map(|t| t.parse().unwrap()).collect();
        assert_eq!(nums.len(), 5);
        assert!(nums[0] <= nums[1] && nums[1] <= nums[2], "{line}");
    }
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn stream_to_tail() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("s.hmoseq");
    let o = posewire(&["synth", "--frames", "4", "--seed", "1", "--out", seq.to_str().unwrap()]);
    assert!(o.status.success());
    let addr = format!("127.0.0.1:{}", free_port());
    let mut server = Command::new(env!("CARGO_BIN_EXE_posewire"))
        .args(["stream", "--in", seq.to_str().unwrap(), "--bind", &addr, "--fps", "50", "--wait-for", "1", "--no-smooth"])
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();

    let deadline = Instant::now() + Duration::from_secs(10);
    let tail = loop {
        let out = posewire(&["tail", &addr]);
        if out.status.success() || Instant::now() > deadline {
            break out;
        }
        thread::sleep(Duration::from_millis(50));
    };
    assert!(server.wait().unwrap().success());
    assert!(tail.status.success(), "{}", text(&tail.stderr));
    let lines: Vec<String> = text(&tail.stdout).lines().map(String::from).collect();
    assert_eq!(lines.len(), 4);

    let decoded = posewire(&["decode", "--in", seq.to_str().unwrap(), "--no-smooth"]);
    for (i, (streamed, offline)) in lines.iter().zip(text(&decoded.stdout).lines()).enumerate() {
        let s: Vec<&str> = streamed.split(' ').collect();
        let d: Vec<&str> = offline.split(' ').collect();
        assert_eq!(s[0], i.to_string());
        assert_eq!(s.len(), 2 + 96);
        // same joint values; the streamed line carries seq and timestamp first
        assert_eq!(&s[2..], &d[1..]);
    }
}

fn write_image(path: &Path, img: &RasterImage) {
    pnm::write_pnm(img, BufWriter::new(File::create(path).unwrap())).unwrap();
}

#[test]
fn blur_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (frames, masks, out) = (dir.path().join("f"), dir.path().join("m"), dir.path().join("o"));
    fs::create_dir_all(&frames).unwrap();
    fs::create_dir_all(&masks).unwrap();
    let px: Vec<u8> = (0..16 * 12 * 3).map(|i| (i * 29 % 256) as u8).collect();
    let frame = RasterImage::new(16, 12, 3, px).unwrap();
    let mask_px: Vec<u8> = (0..16 * 12).map(|i| if i % 16 < 8 { 255 } else { 0 }).collect();
    write_image(&frames.join("000000.ppm"), &frame);
    write_image(&masks.join("000000.pgm"), &RasterImage::new(16, 12, 1, mask_px).unwrap());

    let args = |extra: &[&str]| {
        let mut v = vec![
            "blur",
            "--frames",
            frames.to_str().unwrap(),
            "--masks",
            masks.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--sigma",
            "2",
        ];
        v.extend_from_slice(extra);
        v.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let o = posewire(&args(&[]).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", text(&o.stderr));
    let result = pnm::read_pnm(std::io::BufReader::new(File::open(out.join("000000.ppm")).unwrap())).unwrap();
    for y in 0..12 {
        for x in 0..8 {
            for c in 0..3 {
                assert_eq!(result.get(x, y, c), frame.get(x, y, c));
            }
        }
    }
    assert_ne!(result, frame);

    write_image(&frames.join("000001.ppm"), &frame);
    let o = posewire(&args(&["--feather", "2"]).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("000001.pgm"), "{}", text(&o.stderr));
}
