//! Synthetic object surfaces with analytic normals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Boxes span `[0, x] × [0, y] × [0, z]`, resting on `z = 0` with a corner at
/// the origin. Cylinders stand on `z = 0` with their axis along `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "UPPERCASE")]
pub enum Shape {
    Box { extents: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
}

impl Shape {
    pub fn surface_area(&self) -> f64 {
        match *self {
            Shape::Box { extents: [a, b, c] } => 2.0 * (a * b + a * c + b * c),
            Shape::Cylinder { radius, height } => 2.0 * std::f64::consts::PI * radius * (radius + height),
        }
    }

    fn validate(&self) -> Result<()> {
        let dims: Vec<f64> = match *self {
            Shape::Box { extents } => extents.to_vec(),
            Shape::Cylinder { radius, height } => vec![radius, height],
        };
        if dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(Error::DegenerateGeometry(format!("shape dimensions must be positive: {dims:?}")))
        }
    }
}

fn count(area: f64, density: f64) -> usize {
    (area * density).round() as usize
}

/// Random surface samples, `samples_per_unit_area` per m² on every face.
pub fn generate_synthetic<T: Real>(shape: &Shape, samples_per_unit_area: f64, seed: u64) -> Result<PointCloud<T>> {
    shape.validate()?;
    if !(samples_per_unit_area > 0.0) {
        return Err(Error::InvalidCloud("sample density must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<[f64; 3]> = Vec::new();
    let mut nrm: Vec<[f64; 3]> = Vec::new();
    match *shape {
        Shape::Box { extents } => {
            for axis in 0..3 {
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                let n = count(extents[u] * extents[v], samples_per_unit_area);
                for side in [0.0, 1.0] {
                    for _ in 0..n {
                        let mut p = [0.0; 3];
                        p[axis] = side * extents[axis];
                        p[u] = rng.gen::<f64>() * extents[u];
                        p[v] = rng.gen::<f64>() * extents[v];
                        let mut q = [0.0; 3];
                        q[axis] = if side == 0.0 { -1.0 } else { 1.0 };
                        pts.push(p);
                        nrm.push(q);
                    }
                }
            }
        }
        Shape::Cylinder { radius, height } => {
            let tau = std::f64::consts::TAU;
            let side = count(tau * radius * height, samples_per_unit_area);
            for _ in 0..side {
                let t = rng.gen::<f64>() * tau;
                let z = rng.gen::<f64>() * height;
                pts.push([radius * t.cos(), radius * t.sin(), z]);
                nrm.push([t.cos(), t.sin(), 0.0]);
            }
            let cap = count(0.5 * tau * radius * radius, samples_per_unit_area);
            for (z, nz) in [(0.0, -1.0), (height, 1.0)] {
                for _ in 0..cap {
                    let t = rng.gen::<f64>() * tau;
                    let r = radius * rng.gen::<f64>().sqrt();
                    pts.push([r * t.cos(), r * t.sin(), z]);
                    nrm.push([0.0, 0.0, nz]);
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptyCloud);
    }
    PointCloud::new(pts.into_iter().map(Vec3::from_f64).collect(), nrm.into_iter().map(Vec3::from_f64).collect())
}

/// Density giving roughly `target` points on `shape`.
pub fn density_for_count(shape: &Shape, target: usize) -> f64 {
    target as f64 / shape.surface_area()
}
