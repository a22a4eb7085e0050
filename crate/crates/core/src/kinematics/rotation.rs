//! Axis-angle rotations and their derivatives.
//!
//! Axis-angle is the canonical rotation parameterization across the crate;
//! 3x3 matrix blocks are derived views. The derivative of the exponential
//! map follows the closed form of Gallego & Yezzi.

use nalgebra::{Matrix3, Vector3};

/// Small-angle cutoff below which series expansions replace the closed forms.
const EPS_ANGLE: f64 = 1e-8;

/// Skew-symmetric cross-product matrix `[v]x`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rodrigues formula: axis-angle vector to rotation matrix.
pub fn exp_so3(v: &Vector3<f64>) -> Matrix3<f64> {
    let angle = v.norm();
    let k = skew(v);
    if angle < EPS_ANGLE {
        // R = I + [v]x + [v]x^2 / 2 to second order
        Matrix3::identity() + k + k * k * 0.5
    } else {
        let (s, c) = angle.sin_cos();
        Matrix3::identity() + k * (s / angle) + k * k * ((1.0 - c) / (angle * angle))
    }
}

/// Logarithm map: rotation matrix to axis-angle, canonicalized to angle <= pi.
pub fn log_so3(r: &Matrix3<f64>) -> Vector3<f64> {
    let trace = r.trace();
    let cos_angle = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = cos_angle.acos();
    if angle < EPS_ANGLE {
        // antisymmetric part gives v directly at small angles
        return Vector3::new(
            (r[(2, 1)] - r[(1, 2)]) * 0.5,
            (r[(0, 2)] - r[(2, 0)]) * 0.5,
            (r[(1, 0)] - r[(0, 1)]) * 0.5,
        );
    }
    if (std::f64::consts::PI - angle).abs() < 1e-6 {
        // near pi the antisymmetric part vanishes; recover axis from R + I
        let m = r + Matrix3::identity();
        let col = if m.column(0).norm() > m.column(1).norm() {
            if m.column(0).norm() > m.column(2).norm() { 0 } else { 2 }
        } else if m.column(1).norm() > m.column(2).norm() {
            1
        } else {
            2
        };
        let mut axis = m.column(col).normalize();
        // fix sign using the largest antisymmetric entry
        let w = Vector3::new(
            r[(2, 1)] - r[(1, 2)],
            r[(0, 2)] - r[(2, 0)],
            r[(1, 0)] - r[(0, 1)],
        );
        if w.dot(&axis) < 0.0 {
            axis = -axis;
        }
        return axis * angle;
    }
    let w = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    w * (angle / (2.0 * angle.sin()))
}

/// Canonicalize an axis-angle vector so the rotation angle lies in [0, pi].
pub fn canonicalize(v: &Vector3<f64>) -> Vector3<f64> {
    let angle = v.norm();
    if angle <= std::f64::consts::PI || angle < EPS_ANGLE {
        return *v;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let wrapped = angle % two_pi;
    let (new_angle, flip) = if wrapped > std::f64::consts::PI {
        (two_pi - wrapped, true)
    } else {
        (wrapped, false)
    };
    let axis = v / angle;
    let sign = if flip { -1.0 } else { 1.0 };
    axis * new_angle * sign
}

/// Derivative of `exp_so3` with respect to each axis-angle component.
///
/// Returns `[dR/dv0, dR/dv1, dR/dv2]` evaluated at `v` (Gallego & Yezzi,
/// "A compact formula for the derivative of a 3-D rotation in exponential
/// coordinates").
pub fn exp_so3_jacobian(v: &Vector3<f64>) -> [Matrix3<f64>; 3] {
    let angle_sq = v.norm_squared();
    if angle_sq < EPS_ANGLE * EPS_ANGLE {
        return [
            skew(&Vector3::x()),
            skew(&Vector3::y()),
            skew(&Vector3::z()),
        ];
    }
    let r = exp_so3(v);
    let mut out = [Matrix3::zeros(); 3];
    let i_minus_r = Matrix3::identity() - r;
    for c in 0..3 {
        let e_c = Vector3::ith(c, 1.0);
        let term = v.cross(&(i_minus_r * e_c));
        out[c] = (skew(v) * v[c] + skew(&term)) * r / angle_sq;
    }
    out
}

/// Contract a matrix adjoint against the exponential-map Jacobian:
/// given dE/dR, returns dE/dv for R = exp_so3(v).
pub fn chain_adjoint_to_axis_angle(v: &Vector3<f64>, r_adj: &Matrix3<f64>) -> Vector3<f64> {
    let jac = exp_so3_jacobian(v);
    Vector3::new(
        jac[0].component_mul(r_adj).sum(),
        jac[1].component_mul(r_adj).sum(),
        jac[2].component_mul(r_adj).sum(),
    )
}

/// Project an arbitrary 3x3 matrix to the nearest rotation (polar projection
/// via SVD, determinant forced positive).
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // flip the axis of least singular value
        let mut u_fixed = u;
        for i in 0..3 {
            u_fixed[(i, 2)] = -u_fixed[(i, 2)];
        }
        r = u_fixed * vt;
    }
    r
}

/// Geodesic angle between two rotations, squared, with a smooth gradient
/// through the first argument.
///
/// Accepts raw (possibly non-orthonormal) blocks: the trace formula is
/// evaluated as-is and its argument clamped. Returns the squared angle and
/// d(angle^2)/d(R1) as a 3x3 adjoint.
pub fn geodesic_angle_sq_grad(r1: &Matrix3<f64>, r2: &Matrix3<f64>) -> (f64, Matrix3<f64>) {
    let u = ((r1.transpose() * r2).trace() - 1.0) * 0.5;
    let uc = u.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    let angle = uc.acos();
    // d(angle^2)/du = -2*angle/sin(angle); finite limit -2 as angle -> 0
    let dpsi2_du = if angle < 1e-6 {
        -2.0 - angle * angle / 3.0
    } else {
        -2.0 * angle / angle.sin()
    };
    // du/dR1 = R2 / 2
    let grad = if u.abs() < 1.0 - 1e-12 {
        r2 * (0.5 * dpsi2_du)
    } else {
        // clamped region: subgradient zero
        Matrix3::zeros()
    };
    (angle * angle, grad)
}
