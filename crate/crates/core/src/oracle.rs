//! Reference values for the grasp metric with exact circular friction cones.
//!
//! The metric is a conic program; its value equals the minimum of the dual
//! support function
//!
//! ```text
//! F(d) = cap · max(0, s_a(d), s_b(d)) + C_env · Σ max(0, s_e(d)) + d · w_ext
//! ```
//!
//! over the hyperplane `d · ŵ = 1`, where `s_c(d) = v·n + μ |v_t|` is the
//! support of contact `c`'s unit-normal-force cone against the wrench
//! direction `d`. The environment contacts are given a large cap `C_env`
//! instead of none so that `F` stays finite. `F` is convex, so a Monte-Carlo
//! start followed by central-cut ellipsoid steps converges to the minimum.
//! Any `d` on the hyperplane bounds the metric from above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{ContactPair, PointCloud};
use crate::linalg::Vec3;
use crate::metric::{unit_task_wrench, TaskContext};
use crate::screws::Pitch;

struct Cone {
    arm: Vec3<f64>,
    normal: Vec3<f64>,
    mu: f64,
    robot: bool,
}

pub struct OracleOptions {
    /// Normal force cap standing in for "unbounded" at environment contacts.
    pub env_cap: f64,
    pub samples: usize,
    pub iterations: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { env_cap: 1e4, samples: 4000, iterations: 12000, radius: 1e4, seed: 1 }
    }
}

struct Problem {
    /// Selected wrench rows (each a 6-vector).
    rows: Vec<[f64; 6]>,
    cones: Vec<Cone>,
    cap: f64,
    env_cap: f64,
    external: Vec<f64>,
    /// Base point with `d · target = 1` and an orthonormal basis of the
    /// hyperplane directions.
    base: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl Problem {
    fn point(&self, z: &[f64]) -> Vec<f64> {
        let mut d = self.base.clone();
        for (b, zi) in self.basis.iter().zip(z) {
            for (dk, bk) in d.iter_mut().zip(b) {
                *dk += zi * bk;
            }
        }
        d
    }

    fn lift(&self, d: &[f64]) -> ([f64; 3], [f64; 3]) {
        let mut full = [0.0; 6];
        for (row, dk) in self.rows.iter().zip(d) {
            for j in 0..6 {
                full[j] += row[j] * dk;
            }
        }
        ([full[0], full[1], full[2]], [full[3], full[4], full[5]])
    }

    /// Value and a subgradient (in hyperplane coordinates).
    fn eval(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let d = self.point(z);
        let (df, dm) = self.lift(&d);
        let (df, dm) = (Vec3::from_f64(df), Vec3::from_f64(dm));
        let mut value: f64 = d.iter().zip(&self.external).map(|(a, b)| a * b).sum();
        let mut grad_full = [0.0; 6];
        let mut best_robot: Option<(f64, [f64; 6])> = None;
        for c in &self.cones {
            let v = df + dm.cross(c.arm);
            let vn = v.dot(c.normal);
            let vt = v - c.normal * vn;
            let vt_norm = vt.norm();
            let s = vn + c.mu * vt_norm;
            let q = if vt_norm > 1e-300 { c.normal + vt * (c.mu / vt_norm) } else { c.normal };
            let aq = c.arm.cross(q);
            let g = [q.x, q.y, q.z, aq.x, aq.y, aq.z];
            if c.robot {
                if s > 0.0 && best_robot.map_or(true, |(bs, _)| s > bs) {
                    best_robot = Some((s, g));
                }
            } else if s > 0.0 {
                value += self.env_cap * s;
                for j in 0..6 {
                    grad_full[j] += self.env_cap * g[j];
                }
            }
        }
        if let Some((s, g)) = best_robot {
            value += self.cap * s;
            for j in 0..6 {
                grad_full[j] += self.cap * g[j];
            }
        }
        // chain rule through the row selection, then onto the hyperplane
        let mut grad_d: Vec<f64> = self.rows.iter().map(|r| r.iter().zip(&grad_full).map(|(a, b)| a * b).sum()).collect();
        for (g, e) in grad_d.iter_mut().zip(&self.external) {
            *g += e;
        }
        let grad_z = self.basis.iter().map(|b| b.iter().zip(&grad_d).map(|(a, c)| a * c).sum()).collect();
        (value, grad_z)
    }
}

fn build(pair: &ContactPair<f64>, cloud: &PointCloud<f64>, ctx: &TaskContext<f64>, env_cap: f64) -> Problem {
    let screw = &ctx.task_screw;
    let r = screw.axis_point();
    let (pa, pb) = (cloud.point(pair.index_a), cloud.point(pair.index_b));
    let u = (pb - pa).normalize();
    let mut cones = vec![
        Cone { arm: pa - r, normal: u, mu: ctx.mu_robot, robot: true },
        Cone { arm: pb - r, normal: -u, mu: ctx.mu_robot, robot: true },
    ];
    for e in &ctx.environment_contacts {
        cones.push(Cone { arm: e.position - r, normal: e.normal, mu: e.mu, robot: false });
    }
    let rows: Vec<[f64; 6]> = match screw.pitch() {
        Pitch::Finite(_) => (0..6).map(|k| std::array::from_fn(|j| if j == k { 1.0 } else { 0.0 })).collect(),
        Pitch::Infinite => {
            let l = screw.direction();
            let mut rows: Vec<[f64; 6]> = (0..3).map(|k| std::array::from_fn(|j| if j == k { 1.0 } else { 0.0 })).collect();
            rows.push([0.0, 0.0, 0.0, l.x, l.y, l.z]);
            rows
        }
    };
    let g = ctx.gravity_wrench;
    let gf = Vec3::new(g[0], g[1], g[2]);
    let gm = Vec3::new(g[3], g[4], g[5]) - r.cross(gf);
    let gravity = [gf.x, gf.y, gf.z, gm.x, gm.y, gm.z];
    let target_full = unit_task_wrench(screw);
    let select = |w: &[f64; 6]| -> Vec<f64> { rows.iter().map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum()).collect() };
    let target = select(&target_full);
    let external = select(&gravity);
    let tt: f64 = target.iter().map(|v| v * v).sum();
    let base: Vec<f64> = target.iter().map(|v| v / tt).collect();
    // Gram-Schmidt on the coordinate axes against the target
    let k = rows.len();
    let unit_t: Vec<f64> = target.iter().map(|v| v / tt.sqrt()).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        for b in std::iter::once(&unit_t).chain(basis.iter()) {
            let p: f64 = e.iter().zip(b).map(|(a, c)| a * c).sum();
            for (x, y) in e.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let n: f64 = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-6 && basis.len() < k - 1 {
            basis.push(e.into_iter().map(|v| v / n).collect());
        }
    }
    Problem { rows, cones, cap: ctx.force_cap, env_cap, external, base, basis }
}

/// Metric of one pair with exact friction cones.
pub fn exact_cone_eta(pair: &ContactPair<f64>, cloud: &PointCloud<f64>, ctx: &TaskContext<f64>, opts: &OracleOptions) -> f64 {
    let prob = build(pair, cloud, ctx, opts.env_cap);
    let n = prob.basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut center = vec![0.0; n];
    let mut best = prob.eval(&center).0;
    for _ in 0..opts.samples {
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        let v = prob.eval(&z).0;
        if v < best {
            best = v;
            center = z;
        }
    }

    // central-cut ellipsoid, E = {x : (x-c)ᵀ P⁻¹ (x-c) ≤ 1}, restarted from
    // the best point with a ten times smaller ball each round
    let nf = n as f64;
    let rounds = 6;
    let per_round = opts.iterations / rounds;
    let mut radius = opts.radius;
    for _ in 0..rounds {
        let mut shape = vec![vec![0.0; n]; n];
        for (i, row) in shape.iter_mut().enumerate() {
            row[i] = radius * radius;
        }
        let mut c = center.clone();
        for _ in 0..per_round {
            let (v, g) = prob.eval(&c);
            if v < best {
                best = v;
                center = c.clone();
            }
            let pg: Vec<f64> = shape.iter().map(|row| row.iter().zip(&g).map(|(a, b)| a * b).sum()).collect();
            let gpg: f64 = g.iter().zip(&pg).map(|(a, b)| a * b).sum();
            if !(gpg > 1e-24) {
                break;
            }
            let s = gpg.sqrt();
            for (ci, p) in c.iter_mut().zip(&pg) {
                *ci -= p / (s * (nf + 1.0));
            }
            let f = nf * nf / (nf * nf - 1.0);
            let k = 2.0 / (nf + 1.0) / gpg;
            for i in 0..n {
                for j in 0..n {
                    shape[i][j] = f * (shape[i][j] - k * pg[i] * pg[j]);
                }
            }
        }
        radius *= 0.1;
    }
    best.max(0.0)
}
