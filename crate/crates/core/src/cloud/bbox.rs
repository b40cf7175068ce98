use super::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat3, Vec3};
use crate::scalar::Real;
use crate::screws::Pose;

/// Oriented box; column `i` of `orientation` is the axis of `half_extents[i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox<T> {
    pub center: Vec3<T>,
    pub half_extents: [T; 3],
    pub orientation: Mat3<T>,
}

impl<T: Real> BoundingBox<T> {
    pub fn axis(&self, i: usize) -> Vec3<T> {
        self.orientation.col(i)
    }

    /// Corner `k`; bit `i` of `k` selects the `+` side of axis `i`.
    pub fn corner(&self, k: usize) -> Vec3<T> {
        (0..3).fold(self.center, |acc, i| {
            let s = if k & (1 << i) != 0 { T::one() } else { -T::one() };
            acc + self.axis(i) * (s * self.half_extents[i])
        })
    }

    pub fn corners(&self) -> [Vec3<T>; 8] {
        std::array::from_fn(|k| self.corner(k))
    }

    /// The 12 edges as pairs of corner indices.
    pub fn edges() -> [(usize, usize); 12] {
        let mut out = [(0, 0); 12];
        let mut n = 0;
        for k in 0..8usize {
            for i in 0..3 {
                let j = k | (1 << i);
                if j != k {
                    out[n] = (k, j);
                    n += 1;
                }
            }
        }
        out
    }

    pub fn contains(&self, p: Vec3<T>, inflate: T) -> bool {
        let d = p - self.center;
        (0..3).all(|i| d.dot(self.axis(i)).abs() <= self.half_extents[i] + inflate)
    }

    pub fn transformed(&self, g: &Pose<T>) -> Self {
        Self {
            center: g.transform_point(self.center),
            half_extents: self.half_extents,
            orientation: g.rotation * self.orientation,
        }
    }

    /// Center of the face with the lowest mean `z`.
    pub fn bottom_face_center(&self) -> Vec3<T> {
        let mut best: Option<(T, Vec3<T>)> = None;
        for i in 0..3 {
            for s in [-T::one(), T::one()] {
                let c = self.center + self.axis(i) * (s * self.half_extents[i]);
                if best.map_or(true, |(z, _)| c.z < z) {
                    best = Some((c.z, c));
                }
            }
        }
        best.unwrap().1
    }
}

/// PCA-aligned box, tightened by minimum-area caliper sweeps in each axis
/// plane. Axes are ordered by decreasing extent; each axis has its first
/// nonzero component positive.
pub fn oriented_bounding_box<T: Real>(cloud: &PointCloud<T>) -> Result<BoundingBox<T>> {
    let pts = cloud.points();
    if pts.len() < 3 {
        return Err(Error::DegenerateGeometry(format!("{} points cannot span a box", pts.len())));
    }
    let mean = cloud.centroid();
    let cov = pts.iter().fold(Mat3::zeros(), |acc, p| {
        let d = *p - mean;
        acc + Mat3::outer(d, d)
    });
    let cov = cov.scale(T::one() / T::from_usize(pts.len()).unwrap());
    let (vals, vecs) = symmetric_eigen(&cov);
    let scale = vals[2].abs();
    if scale <= T::epsilon() * T::lit(16.0) * mean.norm_squared().max(T::one()) {
        return Err(Error::DegenerateGeometry("coincident points".into()));
    }
    if vals[1] <= T::lit(1e-12) * scale {
        return Err(Error::DegenerateGeometry("collinear points".into()));
    }

    let pca = refine(pts, vecs);
    let world = refine(pts, Mat3::identity());
    let best = if volume(pts, &world) < volume(pts, &pca) * (T::one() - T::lit(1e-9)) { world } else { pca };
    Ok(finish(pts, &best))
}

fn extents<T: Real>(pts: &[Vec3<T>], axes: &Mat3<T>) -> [(T, T); 3] {
    std::array::from_fn(|i| {
        let a = axes.col(i);
        pts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
            let t = p.dot(a);
            (lo.min(t), hi.max(t))
        })
    })
}

fn volume<T: Real>(pts: &[Vec3<T>], axes: &Mat3<T>) -> T {
    extents(pts, axes).iter().fold(T::one(), |acc, (lo, hi)| acc * (*hi - *lo))
}

fn refine<T: Real>(pts: &[Vec3<T>], axes: Mat3<T>) -> Mat3<T> {
    let mut cols = [axes.col(0), axes.col(1), axes.col(2)];
    for _sweep in 0..8 {
        let mut improved = false;
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let (u, v) = (cols[i], cols[j]);
            let proj: Vec<[T; 2]> = pts.iter().map(|p| [p.dot(u), p.dot(v)]).collect();
            let current = rect_area(&proj, T::zero());
            let (angle, area) = min_area_angle(&proj);
            if area < current * (T::one() - T::lit(1e-10)) {
                let (s, c) = angle.sin_cos();
                cols[i] = u * c + v * s;
                cols[j] = v * c - u * s;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Mat3::from_cols(cols[0], cols[1], cols[2])
}

fn rect_area<T: Real>(pts: &[[T; 2]], angle: T) -> T {
    let (s, c) = angle.sin_cos();
    let (mut lo0, mut hi0, mut lo1, mut hi1) = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
    for p in pts {
        let a = p[0] * c + p[1] * s;
        let b = p[1] * c - p[0] * s;
        lo0 = lo0.min(a);
        hi0 = hi0.max(a);
        lo1 = lo1.min(b);
        hi1 = hi1.max(b);
    }
    (hi0 - lo0) * (hi1 - lo1)
}

/// Rotating calipers: the minimum-area rectangle has a side on a hull edge.
fn min_area_angle<T: Real>(pts: &[[T; 2]]) -> (T, T) {
    let hull = convex_hull(pts);
    let mut best = (T::zero(), rect_area(&hull, T::zero()));
    for k in 0..hull.len() {
        let a = hull[k];
        let b = hull[(k + 1) % hull.len()];
        let mut ang = (b[1] - a[1]).atan2(b[0] - a[0]);
        // fold into [-pi/4, pi/4): the rectangle is symmetric under quarter turns
        let q = T::FRAC_PI_2();
        ang = ang - (ang / q).round() * q;
        let area = rect_area(&hull, ang);
        if area < best.1 {
            best = (ang, area);
        }
    }
    best
}

fn convex_hull<T: Real>(pts: &[[T; 2]]) -> Vec<[T; 2]> {
    let mut p: Vec<[T; 2]> = pts.to_vec();
    p.sort_by(|a, b| {
        a[0].partial_cmp(&b[0]).unwrap_or(std::cmp::Ordering::Equal).then(a[1].partial_cmp(&b[1]).unwrap_or(std::cmp::Ordering::Equal))
    });
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [T; 2], a: [T; 2], b: [T; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[T; 2]> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= T::zero() {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<[T; 2]> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= T::zero() {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn finish<T: Real>(pts: &[Vec3<T>], axes: &Mat3<T>) -> BoundingBox<T> {
    let ext = extents(pts, axes);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ea = ext[a].1 - ext[a].0;
        let eb = ext[b].1 - ext[b].0;
        eb.partial_cmp(&ea).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut center = Vec3::zeros();
    let mut half = [T::zero(); 3];
    let mut cols = [Vec3::zeros(); 3];
    let two = T::lit(2.0);
    for (slot, &i) in order.iter().enumerate() {
        let a = axes.col(i);
        center += a * ((ext[i].0 + ext[i].1) / two);
        half[slot] = (ext[i].1 - ext[i].0) / two;
        cols[slot] = sign_normalized(a);
    }
    BoundingBox { center, half_extents: half, orientation: Mat3::from_cols(cols[0], cols[1], cols[2]) }
}

fn sign_normalized<T: Real>(a: Vec3<T>) -> Vec3<T> {
    let eps = T::lit(1e-9);
    for i in 0..3 {
        if a[i].abs() > eps {
            return if a[i] < T::zero() { -a } else { a };
        }
    }
    a
}
