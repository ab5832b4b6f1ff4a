use posewire::decoder::{decode_joint, decode_pose, decode_pose_parallel};
use posewire::synth::{oracle_decode, random_frame, render_frame, GroundTruthPose, HeatmapNoise};
use posewire::tensor::{TensorFrame, DEPTH_BINS};
use posewire::{JointId, JOINT_COUNT};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NOISES: [HeatmapNoise; 4] = [
    HeatmapNoise::Continuous,
    HeatmapNoise::Quantized(3),
    HeatmapNoise::Quantized(50),
    HeatmapNoise::Constant,
];

#[test]
fn decoder_matches_oracle_on_random_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..120u32 {
        let frame: TensorFrame<f32> = random_frame(&mut rng, NOISES[i as usize % 4], i);
        assert_eq!(decode_pose(&frame), oracle_decode(&frame), "frame {i}");
    }
}

#[test]
fn decoder_matches_oracle_in_f64() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..12u32 {
        let frame: TensorFrame<f64> = random_frame(&mut rng, NOISES[i as usize % 4], i);
        assert_eq!(decode_pose(&frame), oracle_decode(&frame));
        assert_eq!(decode_pose_parallel(&frame), oracle_decode(&frame));
    }
}

#[test]
fn render_decode_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..60 {
        let truth = GroundTruthPose::<f32>::random(&mut rng);
        let frame = render_frame(&truth, i, &mut rng);
        let pose = decode_pose(&frame);
        for (rj, want) in pose.joints.iter().zip(truth.positions()) {
            assert_eq!(&rj.grid_pos, want);
            assert_eq!(rj.confidence, truth.peak_value());
        }
        assert_eq!(oracle_decode(&frame), pose);
    }
}

#[test]
fn perturbing_one_joint_leaves_others_alone() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base: TensorFrame<f32> = random_frame(&mut rng, HeatmapNoise::Quantized(4), 0);
    let before = decode_pose(&base);
    for a in [0usize, 11, 23] {
        let mut frame = base.clone();
        for k in 0..DEPTH_BINS {
            for v in 0..28 {
                for u in 0..28 {
                    let ch = a * DEPTH_BINS + k;
                    frame.heatmap.set(ch, v, u, rng.gen_range(-5.0..5.0));
                    for block in 0..3 {
                        frame.offsets.set(block * 672 + ch, v, u, rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        let after = decode_pose(&frame);
        for b in 0..JOINT_COUNT {
            if b != a {
                assert_eq!(after.joints[b], before.joints[b], "joint {b} moved when {a} changed");
            }
        }
    }
}

#[test]
fn strictly_increasing_map_keeps_peaks() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let frame: TensorFrame<f64> = random_frame(&mut rng, HeatmapNoise::Quantized(6), 0);
    let before = decode_pose(&frame);
    let maps: [fn(f64) -> f64; 3] = [|x| x.exp(), |x| 3.0 * x - 7.0, |x| x * x * x + x];
    for f in maps {
        let mut mapped = frame.clone();
        mapped.heatmap = frame.heatmap.map(f);
        let after = decode_pose(&mapped);
        for (a, b) in after.joints.iter().zip(before.joints.iter()) {
            assert_eq!(a.peak_cell, b.peak_cell);
            assert_eq!(a.grid_pos, b.grid_pos);
            assert_eq!(a.confidence, f(b.confidence));
        }
    }
}

#[test]
fn decoding_is_pure() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let frame: TensorFrame<f32> = random_frame(&mut rng, HeatmapNoise::Continuous, 4);
    let copy = frame.clone();
    let a = decode_pose(&frame);
    let b = decode_pose(&frame);
    assert_eq!(a, b);
    assert_eq!(frame, copy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Planting a handful of peaks (possibly tied) in one slab: decoder and
    /// oracle agree on the winner.
    #[test]
    fn planted_ties_agree(
        joint in 0usize..24,
        peaks in prop::collection::vec((0usize..28, 0usize..28, 0usize..28, 0u8..3), 1..6),
        dx in -1.0f32..1.0,
    ) {
        let mut frame = TensorFrame::<f32>::zeros(0);
        for (k, v, u, level) in &peaks {
            frame.heatmap.set(joint * 28 + k, *v, *u, 1.0 + *level as f32);
            frame.offsets.set(joint * 28 + k, *v, *u, dx);
        }
        let id = JointId::new(joint).unwrap();
        let oracle = oracle_decode(&frame);
        prop_assert_eq!(decode_joint(&frame, id), oracle.joints[joint]);
        let top = peaks.iter().map(|p| p.3).max().unwrap();
        let expected = peaks.iter().filter(|p| p.3 == top).map(|p| (p.0, p.1, p.2)).min().unwrap();
        let cell = oracle.joints[joint].peak_cell;
        prop_assert_eq!((cell.k, cell.v, cell.u), expected);
    }

    #[test]
    fn any_valid_truth_round_trips(
        coords in prop::collection::vec(0.0f32..27.999, 72),
        peak in 0.01f32..1000.0,
        seed in any::<u64>(),
    ) {
        let positions = std::array::from_fn(|j| [coords[3 * j], coords[3 * j + 1], coords[3 * j + 2]]);
        let truth = GroundTruthPose::new(positions, peak).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pose = decode_pose(&render_frame(&truth, 0, &mut rng));
        for (rj, want) in pose.joints.iter().zip(truth.positions()) {
            prop_assert_eq!(&rj.grid_pos, want);
        }
    }
}
