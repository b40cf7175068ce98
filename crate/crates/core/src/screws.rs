//! Rigid transforms, unit screws in Plücker coordinates and constant-screw
//! motion between poses.
//!
//! Pitch is stored as translation per radian of rotation (`d / theta`). Pure
//! translations use [`Pitch::Infinite`] with a zero moment vector; the
//! direction then is the translation direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Element of SE(3): `x -> rotation * x + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> Default for Pose<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Vec3::zeros())
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self::new(Mat3::identity(), t)
    }

    pub fn from_rotation(r: Mat3<T>) -> Self {
        Self::new(r, Vec3::zeros())
    }

    /// Checks `R^T R = I` and `det R = +1` to within `1e-9` (scaled for f32).
    pub fn validate(&self) -> Result<()> {
        let tol = T::identity_tolerance();
        if !self.rotation.is_finite() || !self.translation.is_finite() {
            return Err(Error::InvalidPose("non-finite entries".into()));
        }
        let err = (self.rotation.transpose() * self.rotation).max_abs_diff(&Mat3::identity());
        if err > tol {
            return Err(Error::InvalidPose(format!("rotation not orthonormal (error {err})")));
        }
        if self.rotation.determinant() <= T::zero() {
            return Err(Error::InvalidPose("rotation has negative determinant".into()));
        }
        Ok(())
    }

    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.rotation * v
    }

    /// Largest entry-wise difference over rotation and translation.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.rotation
            .max_abs_diff(&other.rotation)
            .max((self.translation - other.translation).max_abs())
    }

    pub fn to_record(&self) -> PoseRecord {
        let q = self.rotation.to_quaternion();
        PoseRecord {
            position: self.translation.to_f64(),
            quaternion: [q[0].to_f64_lossy(), q[1].to_f64_lossy(), q[2].to_f64_lossy(), q[3].to_f64_lossy()],
        }
    }

    /// Builds a pose from its JSON record; the quaternion must be unit to
    /// within `1e-6` and is renormalized.
    pub fn from_record(rec: &PoseRecord) -> Result<Self> {
        let q = rec.quaternion;
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !n.is_finite() || (n - 1.0).abs() >= 1e-6 {
            return Err(Error::InvalidPose(format!("quaternion norm {n} is not 1")));
        }
        if rec.position.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPose("non-finite position".into()));
        }
        let q = [T::lit(q[0] / n), T::lit(q[1] / n), T::lit(q[2] / n), T::lit(q[3] / n)];
        Ok(Self::new(Mat3::from_quaternion(q), Vec3::from_f64(rec.position)))
    }
}

/// Composition `a ∘ b` (apply `b` first).
pub fn pose_compose<T: Real>(a: &Pose<T>, b: &Pose<T>) -> Pose<T> {
    Pose::new(a.rotation * b.rotation, a.rotation * b.translation + a.translation)
}

pub fn pose_inverse<T: Real>(g: &Pose<T>) -> Pose<T> {
    let rt = g.rotation.transpose();
    Pose::new(rt, -(rt * g.translation))
}

impl<T: Real> std::ops::Mul for Pose<T> {
    type Output = Pose<T>;
    fn mul(self, rhs: Pose<T>) -> Pose<T> {
        pose_compose(&self, &rhs)
    }
}

/// JSON form of a pose: position in meters, quaternion `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pitch<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Pitch<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Pitch::Infinite)
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Pitch::Finite(h) => Some(h),
            Pitch::Infinite => None,
        }
    }
}

/// Unit screw `(l, m, h)`: axis direction, axis moment `m = r × l` and pitch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitScrew<T> {
    direction: Vec3<T>,
    moment: Vec3<T>,
    pitch: Pitch<T>,
}

impl<T: Real> UnitScrew<T> {
    /// Validates `|l| = 1`, `l · m = 0` and `m = 0` for infinite pitch.
    pub fn new(direction: Vec3<T>, moment: Vec3<T>, pitch: Pitch<T>) -> Result<Self> {
        let tol = T::identity_tolerance();
        if !direction.is_finite() || !moment.is_finite() {
            return Err(Error::InvalidScrew("non-finite coordinates".into()));
        }
        if (direction.norm() - T::one()).abs() > tol {
            return Err(Error::InvalidScrew(format!("direction norm {} is not 1", direction.norm())));
        }
        match pitch {
            Pitch::Finite(h) => {
                if !h.is_finite() {
                    return Err(Error::InvalidScrew("non-finite pitch".into()));
                }
                if direction.dot(moment).abs() > tol {
                    return Err(Error::InvalidScrew("moment is not orthogonal to direction".into()));
                }
            }
            Pitch::Infinite => {
                if moment != Vec3::zeros() {
                    return Err(Error::InvalidScrew("pure translation must have zero moment".into()));
                }
            }
        }
        Ok(Self { direction, moment, pitch })
    }

    /// Screw whose axis has direction `l` (normalized here) and passes through `point`.
    pub fn through_point(l: Vec3<T>, point: Vec3<T>, pitch: T) -> Result<Self> {
        let l = l
            .try_normalize(T::identity_tolerance())
            .ok_or_else(|| Error::InvalidScrew("zero axis direction".into()))?;
        Self::new(l, point.cross(l), Pitch::Finite(pitch))
    }

    pub fn translation(direction: Vec3<T>) -> Result<Self> {
        let l = direction
            .try_normalize(T::identity_tolerance())
            .ok_or_else(|| Error::InvalidScrew("zero translation direction".into()))?;
        Self::new(l, Vec3::zeros(), Pitch::Infinite)
    }

    pub fn direction(&self) -> Vec3<T> {
        self.direction
    }

    pub fn moment(&self) -> Vec3<T> {
        self.moment
    }

    pub fn pitch(&self) -> Pitch<T> {
        self.pitch
    }

    /// Point of the axis closest to the origin, `l × m`. The origin for
    /// pure translations.
    pub fn axis_point(&self) -> Vec3<T> {
        self.direction.cross(self.moment)
    }

    /// Distance from `p` to the axis line.
    pub fn distance_to_axis(&self, p: Vec3<T>) -> T {
        let d = p - self.axis_point();
        (d - self.direction * d.dot(self.direction)).norm()
    }

    pub fn to_f64(&self) -> UnitScrew<f64> {
        UnitScrew {
            direction: Vec3::from_f64(self.direction.to_f64()),
            moment: Vec3::from_f64(self.moment.to_f64()),
            pitch: match self.pitch {
                Pitch::Finite(h) => Pitch::Finite(h.to_f64_lossy()),
                Pitch::Infinite => Pitch::Infinite,
            },
        }
    }
}

/// Displacement from the identity by `magnitude` along screw `s`
/// (radians for finite pitch, meters for pure translation).
pub fn screw_exp<T: Real>(s: &UnitScrew<T>, magnitude: T) -> Pose<T> {
    let l = s.direction;
    match s.pitch {
        Pitch::Infinite => Pose::from_translation(l * magnitude),
        Pitch::Finite(h) => {
            let r = s.axis_point();
            let rot = Mat3::from_axis_angle(l, magnitude);
            let t = r - rot * r + l * (h * magnitude);
            Pose::new(rot, t)
        }
    }
}

/// Screw and magnitude taking `a` to `b`, expressed in the body frame of `a`
/// so that `b = a ∘ screw_exp(screw, magnitude)`.
///
/// The rotation angle is taken in `(0, pi]`; at exactly `pi` the axis sign is
/// fixed so that its first nonzero component is positive.
pub fn screw_from_poses<T: Real>(a: &Pose<T>, b: &Pose<T>) -> Result<(UnitScrew<T>, T)> {
    let rel = pose_inverse(a) * *b;
    let tol = T::identity_tolerance();
    let rot = rel.rotation;
    let p = rel.translation;
    let two = T::lit(2.0);

    let cos_theta = ((rot.trace() - T::one()) / two).max(-T::one()).min(T::one());
    let vee = Vec3::new(
        rot.m[2][1] - rot.m[1][2],
        rot.m[0][2] - rot.m[2][0],
        rot.m[1][0] - rot.m[0][1],
    );
    // |vee| = 2 sin(theta); atan2 keeps full precision at both ends.
    let theta = vee.norm().atan2(two * cos_theta);

    if theta <= tol {
        let d = p.norm();
        if d <= tol {
            return Err(Error::IdentityDisplacement);
        }
        let screw = UnitScrew::new(p * (T::one() / d), Vec3::zeros(), Pitch::Infinite)?;
        return Ok((screw, d));
    }

    let l = if theta <= T::FRAC_PI_2() {
        vee.normalize()
    } else {
        // l l^T = (R + R^T - 2 cos I) / (2 (1 - cos))
        let sym = (rot + rot.transpose() - Mat3::identity().scale(two * cos_theta))
            .scale(T::one() / (two * (T::one() - cos_theta)));
        let mut best = 0;
        for i in 1..3 {
            if sym.m[i][i] > sym.m[best][best] {
                best = i;
            }
        }
        let mut l = sym.col(best).normalize();
        let skew_dot = l.dot(vee);
        if skew_dot.abs() > T::lit(64.0) * T::epsilon() {
            if skew_dot < T::zero() {
                l = -l;
            }
        } else {
            l = canonical_sign(l);
        }
        l
    };

    let d = l.dot(p);
    let p_perp = p - l * d;
    let half = theta / two;
    let r = (p_perp + l.cross(p_perp) * (half.cos() / half.sin())) * T::lit(0.5);
    let r = r - l * r.dot(l);
    let screw = UnitScrew::new(l, r.cross(l), Pitch::Finite(d / theta))?;
    Ok((screw, theta))
}

fn canonical_sign<T: Real>(v: Vec3<T>) -> Vec3<T> {
    let eps = T::lit(1e3) * T::epsilon();
    for i in 0..3 {
        if v[i].abs() > eps {
            return if v[i] < T::zero() { -v } else { v };
        }
    }
    v
}

/// Re-expresses a screw given in frame `B` in frame `A`, where `g` maps
/// `B` coordinates to `A` coordinates.
pub fn screw_transform<T: Real>(s: &UnitScrew<T>, g: &Pose<T>) -> UnitScrew<T> {
    let l = g.rotation * s.direction;
    let m = match s.pitch {
        Pitch::Infinite => Vec3::zeros(),
        Pitch::Finite(_) => g.rotation * s.moment + g.translation.cross(l),
    };
    UnitScrew { direction: l, moment: m, pitch: s.pitch }
}

/// Two consecutive plan poses joined by a constant screw motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScrewSegment<T> {
    pub start: Pose<T>,
    pub end: Pose<T>,
    /// In the body frame of `start`.
    pub screw: UnitScrew<T>,
    pub magnitude: T,
}

impl<T: Real> ScrewSegment<T> {
    pub fn from_poses(start: Pose<T>, end: Pose<T>) -> Result<Self> {
        let (screw, magnitude) = screw_from_poses(&start, &end)?;
        Ok(Self { start, end, screw, magnitude })
    }

    /// The segment's screw expressed in the frame `start` is given in.
    pub fn spatial_screw(&self) -> UnitScrew<T> {
        screw_transform(&self.screw, &self.start)
    }
}

/// Pose reached after fraction `t` of the segment's screw magnitude.
pub fn screw_interpolate<T: Real>(seg: &ScrewSegment<T>, t: T) -> Pose<T> {
    seg.start * screw_exp(&seg.screw, t * seg.magnitude)
}
