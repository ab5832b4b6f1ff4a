//! Joint taxonomy, bone topology and grid/image coordinate conversion.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pose::Joint;
use crate::scalar::Scalar;

/// Number of joints produced per frame.
pub const JOINT_COUNT: usize = 24;

/// Canonical joint names. The position in this list is the joint index used
/// in tensor files, decoding and the wire protocol.
pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "rShldrBend",
    "rForearmBend",
    "rHand",
    "rThumb2",
    "rMid1",
    "lShldrBend",
    "lForearmBend",
    "lHand",
    "lThumb2",
    "lMid1",
    "lEar",
    "lEye",
    "rEar",
    "rEye",
    "Nose",
    "rThighBend",
    "rShin",
    "rFoot",
    "rToe",
    "lThighBend",
    "lShin",
    "lFoot",
    "lToe",
    "abdomenUpper",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkeletonError {
    #[error("unknown joint name `{0}`")]
    UnknownJoint(String),
    #[error("joint index {0} out of range (expected < {JOINT_COUNT})")]
    IndexOutOfRange(usize),
    #[error("invalid grid geometry: {0}")]
    Geometry(String),
}

/// Index of one of the 24 canonical joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointId(u8);

impl JointId {
    pub const ROOT: JointId = JointId(23);

    pub fn new(index: usize) -> Result<Self, SkeletonError> {
        if index < JOINT_COUNT {
            Ok(JointId(index as u8))
        } else {
            Err(SkeletonError::IndexOutOfRange(index))
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        JOINT_NAMES[self.index()]
    }

    /// All joints in canonical order.
    pub fn all() -> impl ExactSizeIterator<Item = JointId> + Clone {
        (0..JOINT_COUNT as u8).map(JointId)
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointId {
    type Err = SkeletonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        joint_index(s)
    }
}

/// Looks up a joint by its exact (case-sensitive) name.
pub fn joint_index(name: &str) -> Result<JointId, SkeletonError> {
    JOINT_NAMES
        .iter()
        .position(|n| *n == name)
        .map(|i| JointId(i as u8))
        .ok_or_else(|| SkeletonError::UnknownJoint(name.to_owned()))
}

/// Network input and heatmap grid dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridGeometry {
    input_side: u32,
    grid_side: u32,
    depth_bins: u32,
}

impl GridGeometry {
    /// 448×448 input, 28×28 grid, 28 depth bins.
    pub const CANONICAL: GridGeometry = GridGeometry {
        input_side: 448,
        grid_side: 28,
        depth_bins: 28,
    };

    pub fn new(input_side: u32, grid_side: u32, depth_bins: u32) -> Result<Self, SkeletonError> {
        if grid_side == 0 || input_side == 0 {
            return Err(SkeletonError::Geometry("sides must be positive".into()));
        }
        if input_side % grid_side != 0 {
            return Err(SkeletonError::Geometry(format!(
                "input side {input_side} is not a multiple of grid side {grid_side}"
            )));
        }
        if depth_bins != grid_side {
            return Err(SkeletonError::Geometry(format!(
                "depth bins {depth_bins} must equal grid side {grid_side}"
            )));
        }
        Ok(Self {
            input_side,
            grid_side,
            depth_bins,
        })
    }

    pub fn input_side(&self) -> u32 {
        self.input_side
    }

    pub fn grid_side(&self) -> u32 {
        self.grid_side
    }

    pub fn depth_bins(&self) -> u32 {
        self.depth_bins
    }

    /// Input pixels per grid cell.
    pub fn stride(&self) -> u32 {
        self.input_side / self.grid_side
    }
}

impl Default for GridGeometry {
    fn default() -> Self {
        Self::CANONICAL
    }
}

/// Scales x and y from grid cells to input-image pixels. Depth is left in
/// grid units. Out-of-range positions are passed through.
#[inline]
pub fn grid_to_image<T: Scalar>(grid_pos: [T; 3], geom: &GridGeometry) -> [T; 3] {
    let stride = T::from_index(geom.stride() as usize);
    [grid_pos[0] * stride, grid_pos[1] * stride, grid_pos[2]]
}

/// A parent→child link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bone {
    pub parent: JointId,
    pub child: JointId,
}

/// Joint hierarchy rooted at `abdomenUpper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonTopology {
    parent: [Option<JointId>; JOINT_COUNT],
    bones: Vec<Bone>,
}

impl SkeletonTopology {
    /// The default anatomical tree: arms and legs hang off the abdomen, as
    /// does the head chain Nose → Eye → Ear.
    pub fn canonical() -> Self {
        const LINKS: [(&str, &str); 23] = [
            ("abdomenUpper", "rShldrBend"),
            ("rShldrBend", "rForearmBend"),
            ("rForearmBend", "rHand"),
            ("rHand", "rThumb2"),
            ("rHand", "rMid1"),
            ("abdomenUpper", "lShldrBend"),
            ("lShldrBend", "lForearmBend"),
            ("lForearmBend", "lHand"),
            ("lHand", "lThumb2"),
            ("lHand", "lMid1"),
            ("abdomenUpper", "Nose"),
            ("Nose", "lEye"),
            ("lEye", "lEar"),
            ("Nose", "rEye"),
            ("rEye", "rEar"),
            ("abdomenUpper", "rThighBend"),
            ("rThighBend", "rShin"),
            ("rShin", "rFoot"),
            ("rFoot", "rToe"),
            ("abdomenUpper", "lThighBend"),
            ("lThighBend", "lShin"),
            ("lShin", "lFoot"),
            ("lFoot", "lToe"),
        ];
        let mut parent = [None; JOINT_COUNT];
        for (p, c) in LINKS {
            let p = joint_index(p).expect("canonical joint name");
            let c = joint_index(c).expect("canonical joint name");
            parent[c.index()] = Some(p);
        }
        Self::from_parents(parent)
    }

    /// Builds the topology from a parent table; bones are ordered by child index.
    pub fn from_parents(parent: [Option<JointId>; JOINT_COUNT]) -> Self {
        let bones = JointId::all()
            .filter_map(|child| parent[child.index()].map(|parent| Bone { parent, child }))
            .collect();
        Self { parent, bones }
    }

    pub fn parent(&self, joint: JointId) -> Option<JointId> {
        self.parent[joint.index()]
    }

    pub fn bones(&self) -> &[Bone] {
        &self.bones
    }

    pub fn roots(&self) -> Vec<JointId> {
        JointId::all().filter(|j| self.parent(*j).is_none()).collect()
    }

    pub fn children(&self, joint: JointId) -> impl Iterator<Item = JointId> + '_ {
        self.bones
            .iter()
            .filter(move |b| b.parent == joint)
            .map(|b| b.child)
    }

    /// Depth-first preorder from `root`, children visited by ascending index.
    pub fn dfs(&self, root: JointId) -> Vec<JointId> {
        let mut order = Vec::with_capacity(JOINT_COUNT);
        let mut stack = vec![root];
        let mut seen = [false; JOINT_COUNT];
        while let Some(j) = stack.pop() {
            if std::mem::replace(&mut seen[j.index()], true) {
                continue;
            }
            order.push(j);
            let mut kids: Vec<_> = self.children(j).collect();
            kids.reverse();
            stack.extend(kids);
        }
        order
    }
}

impl Default for SkeletonTopology {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Euclidean length of every bone, in the same order as [`SkeletonTopology::bones`].
pub fn bone_lengths<T: Scalar>(joints: &[Joint<T>; JOINT_COUNT], topo: &SkeletonTopology) -> Vec<(Bone, T)> {
    topo.bones()
        .iter()
        .map(|bone| {
            let a = joints[bone.parent.index()].pos;
            let b = joints[bone.child.index()].pos;
            let d2 = a
                .iter()
                .zip(b.iter())
                .fold(T::zero(), |acc, (p, q)| acc + (*q - *p) * (*q - *p));
            (*bone, d2.sqrt())
        })
        .collect()
}
