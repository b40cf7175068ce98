use super::{TaskContext, Wrench};
use crate::cloud::{ContactPair, PointCloud};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::lpsolve::{solve_lp, LinearProgram, LpStatus};
use crate::scalar::Real;
use crate::screws::{Pitch, UnitScrew};

/// Unit wrench the task asks for, about the axis point `l × m`: a couple
/// about the axis plus a force along it in proportion to the pitch, so a
/// rotation asks for pure moment and a translation for pure force.
pub fn unit_task_wrench<T: Real>(s: &UnitScrew<T>) -> Wrench<T> {
    let l = s.direction();
    let z = T::zero();
    match s.pitch() {
        Pitch::Infinite => [l.x, l.y, l.z, z, z, z],
        Pitch::Finite(h) => {
            let k = T::one() / (T::one() + h * h).sqrt();
            [l.x * h * k, l.y * h * k, l.z * h * k, l.x * k, l.y * k, l.z * k]
        }
    }
}

/// Tangent basis at a contact. The first tangent follows the task axis
/// projected into the contact plane so that the pyramid turns with the scene.
pub fn tangent_basis<T: Real>(normal: Vec3<T>, point: Vec3<T>, screw: &UnitScrew<T>) -> (Vec3<T>, Vec3<T>) {
    let eps = T::lit(1e-6);
    let project = |v: Vec3<T>| v - normal * v.dot(normal);
    let t1 = project(screw.direction())
        .try_normalize(eps)
        .or_else(|| project(point - screw.axis_point()).try_normalize(eps))
        .unwrap_or_else(|| normal.any_orthogonal().normalize());
    (t1, normal.cross(t1))
}

/// Edge directions of the inscribed friction pyramid. Every generator has
/// unit normal component, so generator weights sum to the normal force.
pub fn friction_generators<T: Real>(normal: Vec3<T>, t1: Vec3<T>, t2: Vec3<T>, mu: T, facets: usize) -> Vec<Vec3<T>> {
    let step = T::TAU() / T::from_usize(facets).unwrap();
    (0..facets)
        .map(|k| {
            let phi = step * T::from_usize(k).unwrap();
            normal + (t1 * phi.cos() + t2 * phi.sin()) * mu
        })
        .collect()
}

/// Wrench columns of one contact's generators, taken about `reference`.
pub fn contact_wrench_rows<T: Real>(point: Vec3<T>, generators: &[Vec3<T>], reference: Vec3<T>) -> Vec<Wrench<T>> {
    let arm = point - reference;
    generators
        .iter()
        .map(|f| {
            let m = arm.cross(*f);
            [f.x, f.y, f.z, m.x, m.y, m.z]
        })
        .collect()
}

/// Zeroes entries far below the largest one. Contacts placed on an axis by
/// chained frame changes sit a few ulps off it, and the resulting 1e-13
/// moments would otherwise become pivots.
fn drop_roundoff<T: Real>(w: &mut Wrench<T>) {
    let floor = w.iter().fold(T::zero(), |a, v| a.max(v.abs())) * T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
    for v in w.iter_mut() {
        if v.abs() < floor {
            *v = T::zero();
        }
    }
}

/// Largest task wrench magnitude the pair can produce against gravity and
/// with the environment contacts' help. Zero when the motion is infeasible.
pub fn eta_for_pair<T: Real>(pair: &ContactPair<T>, cloud: &PointCloud<T>, ctx: &TaskContext<T>) -> Result<T> {
    let n = cloud.len();
    if pair.index_a >= n || pair.index_b >= n || pair.index_a == pair.index_b {
        return Err(Error::InvalidContext(format!("pair ({}, {}) out of range", pair.index_a, pair.index_b)));
    }
    let screw = &ctx.task_screw;
    let r = screw.axis_point();
    let (pa, pb) = (cloud.point(pair.index_a), cloud.point(pair.index_b));
    let u = (pb - pa)
        .try_normalize(T::epsilon() * T::lit(16.0))
        .ok_or_else(|| Error::InvalidContext("pair points coincide".into()))?;

    // (point, inward normal, mu, is robot)
    let mut contacts = vec![(pa, u, ctx.mu_robot, true), (pb, -u, ctx.mu_robot, true)];
    for c in &ctx.environment_contacts {
        contacts.push((c.position, c.normal, c.mu, false));
    }

    let mut columns: Vec<Wrench<T>> = Vec::new();
    let mut robot_columns = Vec::new();
    for (p, nrm, mu, robot) in contacts {
        let (t1, t2) = tangent_basis(nrm, p, screw);
        let gens = friction_generators(nrm, t1, t2, mu, ctx.cone_facets);
        for mut w in contact_wrench_rows(p, &gens, r) {
            drop_roundoff(&mut w);
            if robot {
                robot_columns.push(columns.len());
            }
            columns.push(w);
        }
    }

    // gravity moved from the origin to the reference point
    let g = &ctx.gravity_wrench;
    let gf = Vec3::new(g[0], g[1], g[2]);
    let gm = Vec3::new(g[3], g[4], g[5]) - r.cross(gf);
    let gravity = [gf.x, gf.y, gf.z, gm.x, gm.y, gm.z];
    let target = unit_task_wrench(screw);

    let nv = columns.len() + 1;
    let eta_col = columns.len();
    let mut objective = vec![T::zero(); nv];
    objective[eta_col] = T::one();
    let mut lp = LinearProgram::new(objective);

    let row = |coef: &dyn Fn(&Wrench<T>) -> T, target_coef: T| -> Vec<T> {
        let mut v: Vec<T> = columns.iter().map(coef).collect();
        v.push(-target_coef);
        v
    };
    match screw.pitch() {
        Pitch::Finite(_) => {
            for k in 0..6 {
                lp.add_eq(row(&|w| w[k], target[k]), -gravity[k]);
            }
        }
        Pitch::Infinite => {
            // force along the axis and no twist about it; perpendicular
            // moments are not constrained
            for k in 0..3 {
                lp.add_eq(row(&|w| w[k], target[k]), -gravity[k]);
            }
            let l = screw.direction();
            let twist = |w: &Wrench<T>| w[3] * l.x + w[4] * l.y + w[5] * l.z;
            lp.add_eq(row(&twist, T::zero()), -twist(&gravity));
        }
    }
    let mut cap_row = vec![T::zero(); nv];
    for &j in &robot_columns {
        cap_row[j] = T::one();
    }
    lp.add_ub(cap_row, ctx.force_cap);

    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.x[eta_col].max(T::zero())),
        LpStatus::Infeasible => Ok(T::zero()),
        LpStatus::Unbounded => Err(Error::ModelUnbounded),
    }
}
