//! Forward kinematics over the 24-joint tree, with a reverse-mode adjoint
//! pass used by every differentiable energy term.
//!
//! The forward pass can be driven either by axis-angle `BodyParams` or by raw
//! per-joint 3x3 blocks (as decoded from the motion prior, which are only
//! approximately orthonormal). Gradients flow back to blocks, shape and
//! translation; a wrapper chains block adjoints to axis-angle.

use nalgebra::{Matrix3, Vector3};

use super::rotation::{chain_adjoint_to_axis_angle, exp_so3};
use super::skeleton::{Skeleton, NUM_JOINTS, NUM_KEYPOINTS, NUM_POSE_JOINTS, NUM_SHAPE};

/// Pose, shape, root rotation and translation of one person at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyParams {
    /// Axis-angle triples for the non-root joints, indexed by joint-1.
    pub pose: [Vector3<f64>; NUM_POSE_JOINTS],
    pub betas: [f64; NUM_SHAPE],
    pub root_rotation: Vector3<f64>,
    pub translation: Vector3<f64>,
}

impl BodyParams {
    pub fn rest(betas: [f64; NUM_SHAPE]) -> Self {
        Self {
            pose: [Vector3::zeros(); NUM_POSE_JOINTS],
            betas,
            root_rotation: Vector3::zeros(),
            translation: Vector3::zeros(),
        }
    }

    /// Per-joint rotation blocks including the root block at index 0.
    pub fn blocks(&self) -> [Matrix3<f64>; NUM_JOINTS] {
        let mut blocks = [Matrix3::identity(); NUM_JOINTS];
        blocks[0] = exp_so3(&self.root_rotation);
        for j in 1..NUM_JOINTS {
            blocks[j] = exp_so3(&self.pose[j - 1]);
        }
        blocks
    }
}

/// Derived pose: joints, per-joint global rotations, capsule surface samples
/// and the 17 keypoint anchor points.
#[derive(Debug, Clone)]
pub struct BodyPose {
    pub joints: [Vector3<f64>; NUM_JOINTS],
    pub globals: [Matrix3<f64>; NUM_JOINTS],
    pub surface: Vec<Vector3<f64>>,
    pub anchors: [Vector3<f64>; NUM_KEYPOINTS],
}

/// Forward kinematics from raw rotation blocks.
pub fn forward_from_blocks(
    skel: &Skeleton,
    blocks: &[Matrix3<f64>; NUM_JOINTS],
    betas: &[f64; NUM_SHAPE],
    translation: &Vector3<f64>,
) -> BodyPose {
    let mut joints = [Vector3::zeros(); NUM_JOINTS];
    let mut globals = [Matrix3::identity(); NUM_JOINTS];
    globals[0] = blocks[0];
    joints[0] = *translation;
    for i in 1..NUM_JOINTS {
        let p = skel.parents[i];
        globals[i] = globals[p] * blocks[i];
        joints[i] = joints[p] + globals[p] * skel.offset(i, betas);
    }
    let mut surface = Vec::with_capacity(skel.surface_samples.len());
    for s in &skel.surface_samples {
        let p = skel.parents[s.bone];
        let local = skel.offset(s.bone, betas) * s.frac + s.radial * skel.capsule_radii[s.bone];
        surface.push(joints[p] + globals[p] * local);
    }
    let mut anchors = [Vector3::zeros(); NUM_KEYPOINTS];
    for (k, (j, off)) in skel.keypoint_anchors.iter().enumerate() {
        anchors[k] = joints[*j] + globals[*j] * off;
    }
    BodyPose { joints, globals, surface, anchors }
}

/// Forward kinematics from axis-angle parameters (Rodrigues per joint).
pub fn forward_kinematics(skel: &Skeleton, params: &BodyParams) -> BodyPose {
    forward_from_blocks(skel, &params.blocks(), &params.betas, &params.translation)
}

/// Adjoint seeds for the backward pass. Sparse lists keep terms that touch a
/// single sample (contact) cheap.
#[derive(Debug, Default, Clone)]
pub struct PoseAdjoint {
    pub joints: Vec<(usize, Vector3<f64>)>,
    pub surface: Vec<(usize, Vector3<f64>)>,
    pub anchors: Vec<(usize, Vector3<f64>)>,
}

impl PoseAdjoint {
    pub fn is_empty(&self) -> bool {
        self.joints.is_empty() && self.surface.is_empty() && self.anchors.is_empty()
    }
}

/// Gradient of a scalar energy with respect to the forward inputs.
#[derive(Debug, Clone)]
pub struct FkGrad {
    pub blocks: [Matrix3<f64>; NUM_JOINTS],
    pub betas: [f64; NUM_SHAPE],
    pub translation: Vector3<f64>,
}

impl FkGrad {
    pub fn zeros() -> Self {
        Self {
            blocks: [Matrix3::zeros(); NUM_JOINTS],
            betas: [0.0; NUM_SHAPE],
            translation: Vector3::zeros(),
        }
    }

    pub fn add_scaled(&mut self, other: &FkGrad, s: f64) {
        for i in 0..NUM_JOINTS {
            self.blocks[i] += other.blocks[i] * s;
        }
        for k in 0..NUM_SHAPE {
            self.betas[k] += other.betas[k] * s;
        }
        self.translation += other.translation * s;
    }
}

/// Reverse pass: pull adjoint seeds on joints / surface samples / anchors back
/// to rotation blocks, shape coefficients and the root translation.
pub fn backward(
    skel: &Skeleton,
    blocks: &[Matrix3<f64>; NUM_JOINTS],
    betas: &[f64; NUM_SHAPE],
    pose: &BodyPose,
    adj: &PoseAdjoint,
) -> FkGrad {
    let mut g_rot = [Matrix3::zeros(); NUM_JOINTS];
    let mut g_pos = [Vector3::zeros(); NUM_JOINTS];
    let mut out = FkGrad::zeros();

    for &(j, g) in &adj.joints {
        g_pos[j] += g;
    }
    for &(k, g) in &adj.anchors {
        let (j, off) = skel.keypoint_anchors[k];
        g_pos[j] += g;
        g_rot[j] += g * off.transpose();
    }
    for &(si, g) in &adj.surface {
        let s = &skel.surface_samples[si];
        let p = skel.parents[s.bone];
        let local = skel.offset(s.bone, betas) * s.frac + s.radial * skel.capsule_radii[s.bone];
        g_pos[p] += g;
        g_rot[p] += g * local.transpose();
        let dir = pose.globals[p] * skel.rest_offsets[s.bone];
        let coeff = g.dot(&dir) * s.frac;
        for k in 0..NUM_SHAPE {
            out.betas[k] += coeff * skel.shape_basis[s.bone][k];
        }
    }

    for i in (1..NUM_JOINTS).rev() {
        let p = skel.parents[i];
        // G_i = G_p * B_i
        out.blocks[i] += pose.globals[p].transpose() * g_rot[i];
        g_rot[p] += g_rot[i] * blocks[i].transpose();
        // p_i = p_p + G_p * t_i(beta)
        g_pos[p] += g_pos[i];
        g_rot[p] += g_pos[i] * skel.offset(i, betas).transpose();
        let dir = pose.globals[p] * skel.rest_offsets[i];
        let coeff = g_pos[i].dot(&dir);
        for k in 0..NUM_SHAPE {
            out.betas[k] += coeff * skel.shape_basis[i][k];
        }
    }
    out.blocks[0] += g_rot[0];
    out.translation = g_pos[0];
    out
}

/// Gradient of a scalar with respect to axis-angle `BodyParams`.
#[derive(Debug, Clone)]
pub struct ParamsGrad {
    pub pose: [Vector3<f64>; NUM_POSE_JOINTS],
    pub betas: [f64; NUM_SHAPE],
    pub root_rotation: Vector3<f64>,
    pub translation: Vector3<f64>,
}

/// Chain an [`FkGrad`] through the Rodrigues maps of `params`.
pub fn chain_to_params(params: &BodyParams, g: &FkGrad) -> ParamsGrad {
    let mut pose = [Vector3::zeros(); NUM_POSE_JOINTS];
    for j in 1..NUM_JOINTS {
        pose[j - 1] = chain_adjoint_to_axis_angle(&params.pose[j - 1], &g.blocks[j]);
    }
    ParamsGrad {
        pose,
        betas: g.betas,
        root_rotation: chain_adjoint_to_axis_angle(&params.root_rotation, &g.blocks[0]),
        translation: g.translation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::rotation::exp_so3;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub fn random_params(rng: &mut ChaCha8Rng, pose_scale: f64) -> BodyParams {
        let mut params = BodyParams::rest([0.0; NUM_SHAPE]);
        for j in 0..NUM_POSE_JOINTS {
            params.pose[j] = Vector3::new(
                rng.gen_range(-pose_scale..pose_scale),
                rng.gen_range(-pose_scale..pose_scale),
                rng.gen_range(-pose_scale..pose_scale),
            );
        }
        for k in 0..NUM_SHAPE {
            params.betas[k] = rng.gen_range(-1.0..1.0);
        }
        params.root_rotation = Vector3::new(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
        );
        params.translation = Vector3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        params
    }

    #[test]
    fn rest_pose_is_template_at_origin() {
        let skel = Skeleton::default_template();
        let pose = forward_kinematics(&skel, &BodyParams::rest([0.0; NUM_SHAPE]));
        assert_relative_eq!(pose.joints[0], Vector3::zeros());
        // accumulate offsets down the left leg by hand
        let l_ankle = skel.rest_offsets[1] + skel.rest_offsets[4] + skel.rest_offsets[7];
        assert_relative_eq!(pose.joints[7], l_ankle, epsilon = 1e-12);
    }

    #[test]
    fn rigid_equivariance() {
        let skel = Skeleton::default_template();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut params = random_params(&mut rng, 0.8);
            let rot = params.root_rotation;
            let trans = params.translation;
            let posed = forward_kinematics(&skel, &params);
            params.root_rotation = Vector3::zeros();
            params.translation = Vector3::zeros();
            let local = forward_kinematics(&skel, &params);
            let r = exp_so3(&rot);
            for j in 0..NUM_JOINTS {
                assert_relative_eq!(posed.joints[j], r * local.joints[j] + trans, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn elbow_rotation_two_link_chain() {
        // rotate the left elbow 90 degrees about +y; wrist and hand pivot
        // around the elbow joint; everything else stays at rest.
        let skel = Skeleton::default_template();
        let mut params = BodyParams::rest([0.0; NUM_SHAPE]);
        let half_pi = std::f64::consts::FRAC_PI_2;
        params.pose[18 - 1] = Vector3::new(0.0, half_pi, 0.0);
        let pose = forward_kinematics(&skel, &params);
        let rest = forward_kinematics(&skel, &BodyParams::rest([0.0; NUM_SHAPE]));
        assert_relative_eq!(pose.joints[18], rest.joints[18], epsilon = 1e-12);
        // hand-composed: wrist = elbow + R_y(90) * offset(20)
        let ry = exp_so3(&Vector3::new(0.0, half_pi, 0.0));
        let expect_wrist = rest.joints[18] + ry * skel.rest_offsets[20];
        assert_relative_eq!(pose.joints[20], expect_wrist, epsilon = 1e-12);
        let expect_hand = expect_wrist + ry * skel.rest_offsets[22];
        assert_relative_eq!(pose.joints[22], expect_hand, epsilon = 1e-12);
    }

    /// Central-difference check of the full analytic Jacobian of every joint
    /// coordinate with respect to every parameter.
    #[test]
    fn jacobian_matches_finite_differences() {
        let skel = Skeleton::default_template();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n_states = 100;
        let mut checked = 0usize;
        for _ in 0..n_states {
            let params = random_params(&mut rng, 0.9);
            let blocks = params.blocks();
            let pose = forward_kinematics(&skel, &params);
            // pick a random joint coordinate to keep the test fast
            let j = rng.gen_range(0..NUM_JOINTS);
            let c = rng.gen_range(0..3);
            let mut seed = Vector3::zeros();
            seed[c] = 1.0;
            let adj = PoseAdjoint { joints: vec![(j, seed)], ..Default::default() };
            let g = chain_to_params(&params, &backward(&skel, &blocks, &params.betas, &pose, &adj));

            let eval = |p: &BodyParams| forward_kinematics(&skel, p).joints[j][c];
            let h = 1e-5;
            let check = |analytic: f64, fd: f64| {
                let denom = fd.abs().max(analytic.abs()).max(1e-3);
                assert!(
                    (analytic - fd).abs() / denom < 1e-4,
                    "analytic {analytic} vs fd {fd}"
                );
            };
            for jj in 0..NUM_POSE_JOINTS {
                for cc in 0..3 {
                    let mut pp = params;
                    let mut pm = params;
                    pp.pose[jj][cc] += h;
                    pm.pose[jj][cc] -= h;
                    check(g.pose[jj][cc], (eval(&pp) - eval(&pm)) / (2.0 * h));
                }
            }
            for cc in 0..3 {
                let mut pp = params;
                let mut pm = params;
                pp.root_rotation[cc] += h;
                pm.root_rotation[cc] -= h;
                check(g.root_rotation[cc], (eval(&pp) - eval(&pm)) / (2.0 * h));
                let mut tp = params;
                let mut tm = params;
                tp.translation[cc] += h;
                tm.translation[cc] -= h;
                check(g.translation[cc], (eval(&tp) - eval(&tm)) / (2.0 * h));
            }
            for k in 0..NUM_SHAPE {
                let mut bp = params;
                let mut bm = params;
                bp.betas[k] += h;
                bm.betas[k] -= h;
                check(g.betas[k], (eval(&bp) - eval(&bm)) / (2.0 * h));
            }
            checked += 1;
        }
        assert_eq!(checked, n_states);
    }

    #[test]
    fn surface_and_anchor_adjoints_match_fd() {
        let skel = Skeleton::default_template();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let params = random_params(&mut rng, 0.9);
            let blocks = params.blocks();
            let pose = forward_kinematics(&skel, &params);
            let si = rng.gen_range(0..pose.surface.len());
            let ai = rng.gen_range(0..NUM_KEYPOINTS);
            let c = rng.gen_range(0..3);
            let mut seed = Vector3::zeros();
            seed[c] = 1.0;
            let adj = PoseAdjoint {
                joints: vec![],
                surface: vec![(si, seed)],
                anchors: vec![(ai, seed)],
            };
            let g = chain_to_params(&params, &backward(&skel, &blocks, &params.betas, &pose, &adj));
            let eval = |p: &BodyParams| {
                let fp = forward_kinematics(&skel, p);
                fp.surface[si][c] + fp.anchors[ai][c]
            };
            let h = 1e-5;
            for jj in [0usize, 4, 11, 16] {
                for cc in 0..3 {
                    let mut pp = params;
                    let mut pm = params;
                    pp.pose[jj][cc] += h;
                    pm.pose[jj][cc] -= h;
                    let fd = (eval(&pp) - eval(&pm)) / (2.0 * h);
                    let denom = fd.abs().max(g.pose[jj][cc].abs()).max(1e-3);
                    assert!((g.pose[jj][cc] - fd).abs() / denom < 1e-4);
                }
            }
            for k in 0..NUM_SHAPE {
                let mut bp = params;
                let mut bm = params;
                bp.betas[k] += h;
                bm.betas[k] -= h;
                let fd = (eval(&bp) - eval(&bm)) / (2.0 * h);
                let denom = fd.abs().max(g.betas[k].abs()).max(1e-3);
                assert!((g.betas[k] - fd).abs() / denom < 1e-4);
            }
        }
    }
}
