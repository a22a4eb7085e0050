//! Ground plane geometry: signed heights, projections, ray intersection and
//! an in-plane coordinate chart.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlaneError {
    #[error("ray is parallel to the plane or intersects behind its origin")]
    RayParallelToPlane,
}

/// Ground plane `{ p : normal . p + offset = 0 }` with a unit normal oriented
/// so that agents have positive height.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroundPlane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl GroundPlane {
    pub fn new(normal: Vector3<f64>, offset: f64) -> Self {
        let n = normal.norm();
        assert!((n - 1.0).abs() <= 1e-9, "plane normal must be unit length");
        Self { normal: normal / n, offset }
    }

    /// Signed distance to the plane; positive on the agents' side.
    pub fn height(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(p) + self.offset
    }

    /// Orthogonal projection onto the plane along the normal.
    pub fn project_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        p - self.normal * self.height(p)
    }

    /// A fixed point on the plane (foot of the normal from the origin).
    pub fn origin_point(&self) -> Vector3<f64> {
        -self.normal * self.offset
    }

    /// Intersect the ray `origin + s*dir` (s > 0) with the plane shifted to
    /// height `lift` above the ground.
    pub fn intersect_ray(
        &self,
        origin: &Vector3<f64>,
        dir: &Vector3<f64>,
        lift: f64,
    ) -> Result<Vector3<f64>, PlaneError> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-12 {
            return Err(PlaneError::RayParallelToPlane);
        }
        let s = (lift - self.offset - self.normal.dot(origin)) / denom;
        if s <= 0.0 {
            return Err(PlaneError::RayParallelToPlane);
        }
        Ok(origin + dir * s)
    }

    /// Orthonormal in-plane basis (e1, e2) with e1 x e2 = normal.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let helper = if self.normal.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let e1 = (helper - self.normal * self.normal.dot(&helper)).normalize();
        let e2 = self.normal.cross(&e1);
        (e1, e2)
    }

    /// In-plane chart coordinates (u, v) of the orthogonal projection of `p`.
    pub fn to_plane_coords(&self, p: &Vector3<f64>) -> Vector2<f64> {
        let (e1, e2) = self.basis();
        let rel = p - self.origin_point();
        Vector2::new(e1.dot(&rel), e2.dot(&rel))
    }

    /// Inverse of [`to_plane_coords`] at a given height above the plane.
    pub fn from_plane_coords(&self, uv: &Vector2<f64>, height: f64) -> Vector3<f64> {
        let (e1, e2) = self.basis();
        self.origin_point() + e1 * uv.x + e2 * uv.y + self.normal * height
    }
}
