//! Pinhole camera intrinsics and perspective projection.

use nalgebra::{Matrix2x3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Depth below which a point counts as behind the camera.
pub const MIN_DEPTH: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("point depth {0} is not positive")]
    NonPositiveDepth(f64),
}

/// Pinhole intrinsics in pixels; no lens distortion.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CameraIntrinsics {
    pub focal_x: f64,
    pub focal_y: f64,
    pub principal_x: f64,
    pub principal_y: f64,
}

impl CameraIntrinsics {
    pub fn new(focal_x: f64, focal_y: f64, principal_x: f64, principal_y: f64) -> Self {
        assert!(focal_x > 0.0 && focal_y > 0.0, "focal lengths must be positive");
        Self { focal_x, focal_y, principal_x, principal_y }
    }

    /// Perspective projection of a camera-frame point:
    /// `(fx*x/z + cx, fy*y/z + cy)`.
    pub fn project(&self, p: &Vector3<f64>) -> Result<Vector2<f64>, ProjectionError> {
        if p.z <= MIN_DEPTH {
            return Err(ProjectionError::NonPositiveDepth(p.z));
        }
        let inv_z = 1.0 / p.z;
        Ok(Vector2::new(
            self.focal_x * p.x * inv_z + self.principal_x,
            self.focal_y * p.y * inv_z + self.principal_y,
        ))
    }

    /// Jacobian of `project` with respect to the 3D point.
    pub fn project_jacobian(&self, p: &Vector3<f64>) -> Result<Matrix2x3<f64>, ProjectionError> {
        if p.z <= MIN_DEPTH {
            return Err(ProjectionError::NonPositiveDepth(p.z));
        }
        let inv_z = 1.0 / p.z;
        let inv_z2 = inv_z * inv_z;
        Ok(Matrix2x3::new(
            self.focal_x * inv_z, 0.0, -self.focal_x * p.x * inv_z2,
            0.0, self.focal_y * inv_z, -self.focal_y * p.y * inv_z2,
        ))
    }

    /// Unit ray through a pixel, in the camera frame.
    pub fn unproject_ray(&self, px: &Vector2<f64>) -> Vector3<f64> {
        Vector3::new(
            (px.x - self.principal_x) / self.focal_x,
            (px.y - self.principal_y) / self.focal_y,
            1.0,
        )
        .normalize()
    }

    /// Invert the projection given a known depth.
    pub fn unproject(&self, px: &Vector2<f64>, depth: f64) -> Vector3<f64> {
        Vector3::new(
            (px.x - self.principal_x) / self.focal_x * depth,
            (px.y - self.principal_y) / self.focal_y * depth,
            depth,
        )
    }
}
