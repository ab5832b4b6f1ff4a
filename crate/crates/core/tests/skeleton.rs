use posewire::pose::{zero_joints, Joint};
use posewire::skeleton::{bone_lengths, grid_to_image, GridGeometry, SkeletonTopology};
use posewire::{JointId, JOINT_COUNT};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_pose_bone_lengths_match_direct_distances() {
    let topo = SkeletonTopology::canonical();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut joints = zero_joints::<f64>();
    for j in joints.iter_mut() {
        *j = Joint {
            pos: [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(0.0..28.0)],
            confidence: 1.0,
        };
    }
    let lengths = bone_lengths(&joints, &topo);
    assert_eq!(lengths.len(), 23);
    let mut expected_children: Vec<usize> = (0..JOINT_COUNT).filter(|&j| j != 23).collect();
    expected_children.sort();
    assert_eq!(lengths.iter().map(|(b, _)| b.child.index()).collect::<Vec<_>>(), expected_children);
    for (bone, len) in lengths {
        let p = joints[topo.parent(bone.child).unwrap().index()].pos;
        let c = joints[bone.child.index()].pos;
        let direct = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
        assert!((len - direct).abs() <= 1e-12 * direct.max(1.0));
    }
}

#[test]
fn every_joint_reachable_from_root() {
    let topo = SkeletonTopology::canonical();
    for j in JointId::all() {
        let mut at = j;
        let mut hops = 0;
        while let Some(p) = topo.parent(at) {
            at = p;
            hops += 1;
            assert!(hops < JOINT_COUNT, "cycle through {j}");
        }
        assert_eq!(at, JointId::ROOT);
    }
}

proptest! {
    #[test]
    fn grid_to_image_is_linear(x in -100.0f64..100.0, y in -100.0f64..100.0, z in -5.0f64..40.0, a in -8.0f64..8.0) {
        let g = GridGeometry::CANONICAL;
        let scaled = grid_to_image([a * x, a * y, a * z], &g);
        let base = grid_to_image([x, y, z], &g);
        prop_assert!((scaled[0] - a * base[0]).abs() <= 1e-9 * (1.0 + base[0].abs() * a.abs()));
        prop_assert!((scaled[1] - a * base[1]).abs() <= 1e-9 * (1.0 + base[1].abs() * a.abs()));
        prop_assert_eq!(base[2], z);
    }
}
