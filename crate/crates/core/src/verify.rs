//! Seeded property checks runnable outside the test harness.
//!
//! Each instance draws a random chain of region sets and a random two-finger
//! contact scene, then checks the score against plain set arithmetic, greedy
//! against exhaustive partitioning, and the linearized metric against the
//! exact-cone bound.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{ContactPair, PointCloud};
use crate::error::Result;
use crate::linalg::Vec3;
use crate::metric::{eta_for_pair, TaskContext};
use crate::oracle::{exact_cone_eta, OracleOptions};
use crate::regrasp::{compute_score, greedy_partition, optimal_partition_bruteforce, Score};
use crate::screws::UnitScrew;

pub const UNIVERSE: usize = 40;
pub const MAX_REGIONS: usize = 10;
pub const THRESHOLDS: [f64; 3] = [0.1, 0.25, 0.5];

/// Score implementation under test.
pub type ScoreFn = fn(&[Vec<usize>]) -> Result<Score>;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub instances: usize,
    /// Run the metric check on every n-th instance; 0 disables it.
    pub metric_every: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, instances: 500, metric_every: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub instance: usize,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instance {} failed {}: {}", self.instance, self.check, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifySummary {
    pub instances: usize,
    pub checks: usize,
    pub failure: Option<Counterexample>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn random_regions(rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let count = rng.gen_range(1..=MAX_REGIONS);
    // a shared core keeps some instances from collapsing into all singletons
    let core: Vec<usize> = (0..UNIVERSE).filter(|_| rng.gen_bool(0.3)).collect();
    (0..count)
        .map(|_| {
            let keep = rng.gen_range(0.5..1.0);
            let extra = rng.gen_range(0.0..0.4);
            let mut r: BTreeSet<usize> = core.iter().copied().filter(|_| rng.gen_bool(keep)).collect();
            r.extend((0..UNIVERSE).filter(|_| rng.gen_bool(extra)));
            r.into_iter().collect()
        })
        .collect()
}

fn direct_score(regions: &[Vec<usize>]) -> (Vec<usize>, Vec<f64>) {
    let sets: Vec<BTreeSet<usize>> = regions.iter().map(|r| r.iter().copied().collect()).collect();
    let mut inter = sets[0].clone();
    for s in &sets[1..] {
        inter = inter.intersection(s).copied().collect();
    }
    let gammas = sets.iter().map(|s| if s.is_empty() { 0.0 } else { inter.len() as f64 / s.len() as f64 }).collect();
    (inter.into_iter().collect(), gammas)
}

fn check_score(regions: &[Vec<usize>], score: ScoreFn) -> std::result::Result<(), String> {
    let got = score(regions).map_err(|e| e.to_string())?;
    let (inter, gammas) = direct_score(regions);
    let expected_min = gammas.iter().copied().fold(f64::INFINITY, f64::min);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-15;
    let ok = got.intersection == inter
        && got.gamma_list.len() == gammas.len()
        && got.gamma_list.iter().zip(&gammas).all(|(a, b)| close(*a, *b))
        && close(got.gamma, expected_min);
    if ok {
        Ok(())
    } else {
        Err(format!(
            "regions {regions:?}: got gamma {} {:?}, expected {} {:?}",
            got.gamma, got.gamma_list, expected_min, gammas
        ))
    }
}

fn check_partition(regions: &[Vec<usize>], gamma_th: f64) -> std::result::Result<(), String> {
    let greedy = greedy_partition(regions, gamma_th);
    let best = optimal_partition_bruteforce(regions, gamma_th).map_err(|e| e.to_string())?;
    if greedy.alpha() != best.alpha() {
        return Err(format!(
            "regions {regions:?}, threshold {gamma_th}: greedy {:?} vs optimal {:?}",
            greedy.ranges(),
            best.ranges()
        ));
    }
    for g in &greedy.groups {
        if g.segment_count() > 1 && g.score.gamma < gamma_th {
            return Err(format!("group {:?} scored {} below {gamma_th}", (g.first, g.last), g.score.gamma));
        }
    }
    Ok(())
}

fn check_monotone(regions: &[Vec<usize>]) -> std::result::Result<(), String> {
    let mut prev = f64::INFINITY;
    for end in 1..=regions.len() {
        let g = direct_score(&regions[..end]).1.into_iter().fold(f64::INFINITY, f64::min);
        if g > prev {
            return Err(format!("gamma rose from {prev} to {g} when region {end} joined"));
        }
        prev = g;
    }
    Ok(())
}

fn random_scene(rng: &mut ChaCha8Rng) -> (PointCloud<f64>, ContactPair<f64>, TaskContext<f64>) {
    let mut v = || Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_range(0.0..0.2));
    let (a, mut b) = (v(), v());
    if (b - a).norm() < 1e-3 {
        b = a + Vec3::new(0.05, 0.0, 0.0);
    }
    let point = v();
    let u = (b - a).normalize();
    let cloud = PointCloud::new(vec![a, b], vec![-u, u]).expect("two finite points");
    let pair = ContactPair { index_a: 0, index_b: 1, axis: u };
    let dir = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.2..1.0));
    let ctx = TaskContext {
        task_screw: UnitScrew::through_point(dir, point, 0.0).expect("nonzero direction"),
        environment_contacts: Vec::new(),
        gravity_wrench: [0.0; 6],
        mu_robot: rng.gen_range(0.2..1.0),
        cone_facets: 16,
        force_cap: rng.gen_range(0.5..5.0),
    };
    (cloud, pair, ctx)
}

fn check_metric(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let (cloud, pair, ctx) = random_scene(rng);
    let lp = eta_for_pair(&pair, &cloud, &ctx).map_err(|e| e.to_string())?;
    let opts = OracleOptions { samples: 300, iterations: 1500, ..Default::default() };
    // any dual point the oracle evaluates bounds the true value from above
    let bound = exact_cone_eta(&pair, &cloud, &ctx, &opts);
    if lp > bound * (1.0 + 1e-6) + 1e-9 {
        return Err(format!("pyramid metric {lp} exceeds the exact-cone bound {bound}"));
    }
    let mut wider = ctx.clone();
    wider.mu_robot *= 1.5;
    let lp_wider = eta_for_pair(&pair, &cloud, &wider).map_err(|e| e.to_string())?;
    if lp_wider < lp - 1e-9 {
        return Err(format!("metric fell from {lp} to {lp_wider} when friction grew"));
    }
    Ok(())
}

/// Runs every check with the library's own score function.
pub fn run_verify(opts: &VerifyOptions) -> VerifySummary {
    run_verify_with(opts, |r| compute_score(r))
}

/// Runs every check, stopping at the first counterexample.
pub fn run_verify_with(opts: &VerifyOptions, score: ScoreFn) -> VerifySummary {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut summary = VerifySummary::default();
    for instance in 0..opts.instances {
        let regions = random_regions(&mut rng);
        let gamma_th = THRESHOLDS[rng.gen_range(0..THRESHOLDS.len())];
        let mut checks: Vec<(&'static str, std::result::Result<(), String>)> = vec![
            ("score", check_score(&regions, score)),
            ("partition", check_partition(&regions, gamma_th)),
            ("monotone", check_monotone(&regions)),
        ];
        if opts.metric_every > 0 && instance % opts.metric_every == 0 {
            checks.push(("metric", check_metric(&mut rng)));
        }
        summary.instances += 1;
        for (check, outcome) in checks {
            summary.checks += 1;
            if let Err(detail) = outcome {
                summary.failure = Some(Counterexample { instance, check, detail });
                return summary;
            }
        }
    }
    summary
}
