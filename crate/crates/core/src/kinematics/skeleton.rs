//! Simplified articulated body: a 24-joint tree with a linear shape basis,
//! capsule surface samples standing in for mesh vertices, and rigidly
//! attached anchor points for the 17-keypoint observation layout.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUM_JOINTS: usize = 24;
/// Non-root joints carrying pose parameters.
pub const NUM_POSE_JOINTS: usize = 23;
/// Non-root joints in the latent motion state (hands excluded).
pub const NUM_STATE_JOINTS: usize = 21;
pub const NUM_SHAPE: usize = 10;
pub const NUM_KEYPOINTS: usize = 17;
pub const SAMPLES_PER_BONE: usize = 8;
pub const NUM_BONES: usize = NUM_JOINTS - 1;
pub const NUM_SURFACE: usize = NUM_BONES * SAMPLES_PER_BONE;

pub const PELVIS: usize = 0;
pub const LEFT_HIP: usize = 1;
pub const RIGHT_HIP: usize = 2;
pub const LEFT_KNEE: usize = 4;
pub const RIGHT_KNEE: usize = 5;
pub const LEFT_ANKLE: usize = 7;
pub const RIGHT_ANKLE: usize = 8;
pub const LEFT_FOOT: usize = 10;
pub const RIGHT_FOOT: usize = 11;
pub const NECK: usize = 12;
pub const HEAD: usize = 15;
pub const LEFT_SHOULDER: usize = 16;
pub const RIGHT_SHOULDER: usize = 17;
pub const LEFT_ELBOW: usize = 18;
pub const RIGHT_ELBOW: usize = 19;
pub const LEFT_WRIST: usize = 20;
pub const RIGHT_WRIST: usize = 21;

/// Joints whose mean defines the torso center for HVIP purposes.
pub const TORSO_JOINTS: [usize; 4] = [LEFT_HIP, RIGHT_HIP, LEFT_SHOULDER, RIGHT_SHOULDER];

/// Joints carrying contact probabilities: ankles as heel proxies, foot tips as toes.
pub const CONTACT_JOINTS: [usize; 4] = [LEFT_ANKLE, RIGHT_ANKLE, LEFT_FOOT, RIGHT_FOOT];

/// 2D keypoint indices of the torso (shoulders and hips) in the 17-point layout.
pub const TORSO_KEYPOINTS: [usize; 4] = [5, 6, 11, 12];

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("skeleton document parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid skeleton: {0}")]
    Invalid(String),
}

/// One capsule surface sample, parameterized on its bone so shape scaling
/// moves it consistently: position = bone_offset(beta) * frac + radial * radius.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceSample {
    /// Child joint of the bone this sample belongs to (1..NUM_JOINTS).
    pub bone: usize,
    pub frac: f64,
    /// Unit radial direction in the parent-joint frame.
    pub radial: Vector3<f64>,
}

/// JSON document form of a skeleton definition.
#[derive(Debug, Serialize, Deserialize)]
pub struct SkeletonDoc {
    pub parents: Vec<i32>,
    pub offsets: Vec<[f64; 3]>,
    pub shape_basis: Vec<Vec<f64>>,
    pub capsule_radii: Vec<f64>,
    pub keypoint_anchors: Vec<KeypointAnchorDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KeypointAnchorDoc {
    pub joint: usize,
    pub offset: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct Skeleton {
    /// parent[i] for i >= 1; the root has none.
    pub parents: [usize; NUM_JOINTS],
    pub rest_offsets: [Vector3<f64>; NUM_JOINTS],
    /// Per-bone linear length scales: scale_i(beta) = 1 + sum_k basis[i][k] * beta_k.
    pub shape_basis: [[f64; NUM_SHAPE]; NUM_JOINTS],
    pub capsule_radii: [f64; NUM_JOINTS],
    pub keypoint_anchors: [(usize, Vector3<f64>); NUM_KEYPOINTS],
    pub surface_samples: Vec<SurfaceSample>,
}

impl Skeleton {
    /// The default body template shipped with the crate.
    pub fn default_template() -> Self {
        Self::from_doc(&serde_json::from_str(DEFAULT_SKELETON_JSON).expect("embedded skeleton"))
            .expect("embedded skeleton is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, SkeletonError> {
        Self::from_doc(&serde_json::from_str(text)?)
    }

    pub fn from_doc(doc: &SkeletonDoc) -> Result<Self, SkeletonError> {
        if doc.parents.len() != NUM_JOINTS
            || doc.offsets.len() != NUM_JOINTS
            || doc.shape_basis.len() != NUM_JOINTS
            || doc.capsule_radii.len() != NUM_JOINTS
        {
            return Err(SkeletonError::Invalid(format!(
                "expected {NUM_JOINTS} joints in every per-joint table"
            )));
        }
        if doc.keypoint_anchors.len() != NUM_KEYPOINTS {
            return Err(SkeletonError::Invalid(format!(
                "expected {NUM_KEYPOINTS} keypoint anchors"
            )));
        }
        if doc.parents[0] != -1 {
            return Err(SkeletonError::Invalid("root parent must be -1".into()));
        }
        let mut parents = [0usize; NUM_JOINTS];
        for (i, &p) in doc.parents.iter().enumerate().skip(1) {
            if p < 0 || p as usize >= i {
                // parent < child also guarantees the tree is acyclic
                return Err(SkeletonError::Invalid(format!(
                    "joint {i} parent {p} must precede it"
                )));
            }
            parents[i] = p as usize;
        }
        let mut rest_offsets = [Vector3::zeros(); NUM_JOINTS];
        for (i, o) in doc.offsets.iter().enumerate() {
            rest_offsets[i] = Vector3::new(o[0], o[1], o[2]);
            if i > 0 && rest_offsets[i].norm() <= 0.0 {
                return Err(SkeletonError::Invalid(format!("bone {i} has zero length")));
            }
        }
        let mut shape_basis = [[0.0; NUM_SHAPE]; NUM_JOINTS];
        for (i, row) in doc.shape_basis.iter().enumerate() {
            if row.len() != NUM_SHAPE {
                return Err(SkeletonError::Invalid("shape basis rows must have 10 entries".into()));
            }
            shape_basis[i].copy_from_slice(row);
        }
        let mut capsule_radii = [0.0; NUM_JOINTS];
        capsule_radii.copy_from_slice(&doc.capsule_radii);
        let mut keypoint_anchors = [(0usize, Vector3::zeros()); NUM_KEYPOINTS];
        for (i, a) in doc.keypoint_anchors.iter().enumerate() {
            if a.joint >= NUM_JOINTS {
                return Err(SkeletonError::Invalid(format!("anchor joint {} out of range", a.joint)));
            }
            keypoint_anchors[i] = (a.joint, Vector3::new(a.offset[0], a.offset[1], a.offset[2]));
        }
        let mut skel = Self {
            parents,
            rest_offsets,
            shape_basis,
            capsule_radii,
            keypoint_anchors,
            surface_samples: Vec::new(),
        };
        skel.surface_samples = skel.build_surface_samples();
        Ok(skel)
    }

    pub fn to_doc(&self) -> SkeletonDoc {
        SkeletonDoc {
            parents: (0..NUM_JOINTS)
                .map(|i| if i == 0 { -1 } else { self.parents[i] as i32 })
                .collect(),
            offsets: self.rest_offsets.iter().map(|o| [o.x, o.y, o.z]).collect(),
            shape_basis: self.shape_basis.iter().map(|r| r.to_vec()).collect(),
            capsule_radii: self.capsule_radii.to_vec(),
            keypoint_anchors: self
                .keypoint_anchors
                .iter()
                .map(|(j, o)| KeypointAnchorDoc { joint: *j, offset: [o.x, o.y, o.z] })
                .collect(),
        }
    }

    /// Bone length scale for the bone ending at `joint`.
    pub fn bone_scale(&self, joint: usize, betas: &[f64; NUM_SHAPE]) -> f64 {
        let mut s = 1.0;
        for k in 0..NUM_SHAPE {
            s += self.shape_basis[joint][k] * betas[k];
        }
        s
    }

    /// Shape-scaled parent-to-joint offset.
    pub fn offset(&self, joint: usize, betas: &[f64; NUM_SHAPE]) -> Vector3<f64> {
        self.rest_offsets[joint] * self.bone_scale(joint, betas)
    }

    /// Two rings of four samples per bone capsule.
    fn build_surface_samples(&self) -> Vec<SurfaceSample> {
        let mut out = Vec::with_capacity(NUM_SURFACE);
        for bone in 1..NUM_JOINTS {
            let axis = self.rest_offsets[bone].normalize();
            let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let u = (helper - axis * axis.dot(&helper)).normalize();
            let v = axis.cross(&u);
            for (ring, frac) in [0.25, 0.75].iter().enumerate() {
                for step in 0..4 {
                    // offset the second ring by 45 degrees to spread coverage
                    let angle = std::f64::consts::FRAC_PI_2 * step as f64
                        + ring as f64 * std::f64::consts::FRAC_PI_4;
                    out.push(SurfaceSample {
                        bone,
                        frac: *frac,
                        radial: u * angle.cos() + v * angle.sin(),
                    });
                }
            }
        }
        debug_assert_eq!(out.len(), NUM_SURFACE);
        out
    }

    /// Pelvis height above ground at which the rest pose exactly touches
    /// the plane with its lowest surface sample.
    pub fn standing_pelvis_height(&self, betas: &[f64; NUM_SHAPE]) -> f64 {
        let params = super::body::BodyParams::rest(*betas);
        let pose = super::body::forward_kinematics(self, &params);
        let lowest = pose
            .surface
            .iter()
            .map(|p| p.z)
            .fold(f64::INFINITY, f64::min);
        -lowest
    }

    /// Rest-pose height of the torso center above the ground when standing.
    pub fn standing_torso_height(&self, betas: &[f64; NUM_SHAPE]) -> f64 {
        let params = super::body::BodyParams::rest(*betas);
        let pose = super::body::forward_kinematics(self, &params);
        let torso = TORSO_JOINTS
            .iter()
            .map(|&j| pose.joints[j])
            .sum::<Vector3<f64>>()
            / 4.0;
        torso.z + self.standing_pelvis_height(betas)
    }
}

pub(crate) const DEFAULT_SKELETON_JSON: &str = r#"{
  "parents": [-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21],
  "offsets": [
    [0.0, 0.0, 0.0],
    [0.09, 0.0, -0.06],
    [-0.09, 0.0, -0.06],
    [0.0, 0.0, 0.11],
    [0.0, 0.0, -0.40],
    [0.0, 0.0, -0.40],
    [0.0, 0.0, 0.12],
    [0.0, 0.0, -0.40],
    [0.0, 0.0, -0.40],
    [0.0, 0.0, 0.12],
    [0.0, 0.14, -0.05],
    [0.0, 0.14, -0.05],
    [0.0, 0.0, 0.10],
    [0.045, 0.0, 0.05],
    [-0.045, 0.0, 0.05],
    [0.0, 0.0, 0.12],
    [0.13, 0.0, 0.02],
    [-0.13, 0.0, 0.02],
    [0.02, 0.0, -0.26],
    [-0.02, 0.0, -0.26],
    [0.0, 0.0, -0.25],
    [0.0, 0.0, -0.25],
    [0.0, 0.0, -0.08],
    [0.0, 0.0, -0.08]
  ],
  "shape_basis": [
    [0.05, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0.02, 0, 0, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0.02, 0, 0, 0, 0, 0],
    [0.05, 0, 0.03, 0, 0, 0, 0, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0, 0, 0, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0, 0, 0, 0, 0, 0],
    [0.05, 0, 0.03, 0, 0, 0, 0, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0, 0, 0, 0, 0.015, 0],
    [0.05, 0.03, 0, 0, 0, 0, 0, 0, 0.015, 0],
    [0.05, 0, 0.03, 0, 0, 0, 0, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0, 0, 0.02, 0, 0, 0],
    [0.05, 0.03, 0, 0, 0, 0, 0.02, 0, 0, 0],
    [0.05, 0, 0.03, 0, 0, 0, 0, 0, 0, 0.01],
    [0.05, 0, 0, 0.03, 0.02, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0.02, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0, 0, 0.02, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0.02, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0.02, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0, 0, 0, 0.015, 0, 0],
    [0.05, 0, 0, 0.03, 0, 0, 0, 0.015, 0, 0],
    [0.05, 0, 0, 0.03, 0, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0, 0, 0, 0, 0, 0],
    [0.05, 0, 0, 0.03, 0, 0, 0, 0, 0, 0]
  ],
  "capsule_radii": [0.0, 0.10, 0.10, 0.11, 0.07, 0.07, 0.11, 0.05, 0.05, 0.11, 0.03, 0.03, 0.05, 0.06, 0.06, 0.10, 0.06, 0.06, 0.045, 0.045, 0.035, 0.035, 0.03, 0.03],
  "keypoint_anchors": [
    {"joint": 15, "offset": [0.0, 0.10, 0.03]},
    {"joint": 15, "offset": [0.035, 0.09, 0.06]},
    {"joint": 15, "offset": [-0.035, 0.09, 0.06]},
    {"joint": 15, "offset": [0.07, 0.01, 0.05]},
    {"joint": 15, "offset": [-0.07, 0.01, 0.05]},
    {"joint": 16, "offset": [0.0, 0.0, 0.0]},
    {"joint": 17, "offset": [0.0, 0.0, 0.0]},
    {"joint": 18, "offset": [0.0, 0.0, 0.0]},
    {"joint": 19, "offset": [0.0, 0.0, 0.0]},
    {"joint": 20, "offset": [0.0, 0.0, 0.0]},
    {"joint": 21, "offset": [0.0, 0.0, 0.0]},
    {"joint": 1, "offset": [0.0, 0.0, 0.0]},
    {"joint": 2, "offset": [0.0, 0.0, 0.0]},
    {"joint": 4, "offset": [0.0, 0.0, 0.0]},
    {"joint": 5, "offset": [0.0, 0.0, 0.0]},
    {"joint": 7, "offset": [0.0, 0.0, 0.0]},
    {"joint": 8, "offset": [0.0, 0.0, 0.0]}
  ]
}"#;
