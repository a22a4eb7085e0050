//! Least-squares rigid / similarity alignment of point sets (Kabsch-Umeyama).

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProcrustesError {
    #[error("point sets must have equal cardinality >= 3, got {0} and {1}")]
    CardinalityMismatch(usize, usize),
    #[error("source point set has rank < 2")]
    DegenerateConfiguration,
}

/// Transform `T(x) = scale * rotation * x + translation` minimizing
/// `sum ||T(source_i) - target_i||^2`.
#[derive(Debug, Clone, Copy)]
pub struct SimilarityTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub scale: f64,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros(), scale: 1.0 }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p * self.scale + self.translation
    }
}

/// Result of an alignment: the transform and the residual sum of squares.
#[derive(Debug, Clone, Copy)]
pub struct Alignment {
    pub transform: SimilarityTransform,
    pub residual_sq: f64,
}

/// Optimal rigid (or similarity, when `with_scale`) alignment of `source`
/// onto `target`.
pub fn procrustes(
    source: &[Vector3<f64>],
    target: &[Vector3<f64>],
    with_scale: bool,
) -> Result<Alignment, ProcrustesError> {
    if source.len() != target.len() || source.len() < 3 {
        return Err(ProcrustesError::CardinalityMismatch(source.len(), target.len()));
    }
    let n = source.len() as f64;
    let mu_s: Vector3<f64> = source.iter().sum::<Vector3<f64>>() / n;
    let mu_t: Vector3<f64> = target.iter().sum::<Vector3<f64>>() / n;

    let mut cov = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, t) in source.iter().zip(target) {
        let ds = s - mu_s;
        let dt = t - mu_t;
        cov += dt * ds.transpose();
        var_s += ds.norm_squared();
    }
    if var_s / n < 1e-18 {
        return Err(ProcrustesError::DegenerateConfiguration);
    }
    let svd = cov.svd(true, true);
    // rank < 2 means the spread is essentially a point or the cross-covariance
    // cannot pin down a rotation about more than one axis
    let sv = svd.singular_values;
    let source_rank = {
        let mut gram = Matrix3::zeros();
        for s in source {
            let d = s - mu_s;
            gram += d * d.transpose();
        }
        gram.svd(false, false)
            .singular_values
            .iter()
            .filter(|&&v| v > 1e-12 * var_s.max(1.0))
            .count()
    };
    if source_rank < 2 {
        return Err(ProcrustesError::DegenerateConfiguration);
    }
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut d = Matrix3::identity();
    if (u * vt).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = u * d * vt;
    let scale = if with_scale {
        let traced = sv[0] + sv[1] + d[(2, 2)] * sv[2];
        traced / var_s
    } else {
        1.0
    };
    let translation = mu_t - rotation * mu_s * scale;
    let transform = SimilarityTransform { rotation, translation, scale };
    let residual_sq = source
        .iter()
        .zip(target)
        .map(|(s, t)| (transform.apply(s) - t).norm_squared())
        .sum();
    Ok(Alignment { transform, residual_sq })
}
