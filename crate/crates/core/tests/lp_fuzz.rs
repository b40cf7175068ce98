//! Random LPs checked against exhaustive vertex enumeration, plus a dual
//! certificate check on every optimal solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regrasp_core::lpsolve::{solve_lp, LinearProgram, LpSolution, LpStatus};

/// Solves the square-or-tall system `rows · x = rhs` if it has full column
/// rank and is consistent.
fn solve_system(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().zip(rhs).map(|(r, b)| {
        let mut r = r.clone();
        r.push(*b);
        r
    }).collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let best = (pivot_row..m).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[best][col].abs() < 1e-10 {
            return None;
        }
        a.swap(pivot_row, best);
        let p = a[pivot_row][col];
        for v in a[pivot_row].iter_mut() {
            *v /= p;
        }
        for i in 0..m {
            if i != pivot_row {
                let f = a[i][col];
                if f != 0.0 {
                    for k in 0..=n {
                        a[i][k] -= f * a[pivot_row][k];
                    }
                }
            }
        }
        pivot_row += 1;
    }
    for row in a.iter().skip(n) {
        if row[n].abs() > 1e-9 {
            return None;
        }
    }
    Some((0..n).map(|i| a[i][n]).collect())
}

fn combinations(n: usize, k: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, out, cur, i + 1);
        cur.pop();
    }
}

/// Max of `c·x` over the vertices of `{eq x = beq, ub x ≤ bub}`; `None` when
/// no vertex is feasible. The polyhedron must be pointed.
fn best_vertex(c: &[f64], eq: &[Vec<f64>], beq: &[f64], ub: &[Vec<f64>], bub: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut best: Option<f64> = None;
    for k in 0..=n.min(ub.len()) {
        let mut subsets = Vec::new();
        combinations(ub.len(), k, &mut subsets, &mut Vec::new(), 0);
        for s in subsets {
            let mut rows: Vec<Vec<f64>> = eq.to_vec();
            let mut rhs: Vec<f64> = beq.to_vec();
            for &i in &s {
                rows.push(ub[i].clone());
                rhs.push(bub[i]);
            }
            if rows.len() < n {
                continue;
            }
            let Some(x) = solve_system(&rows, &rhs, n) else { continue };
            let dot = |r: &[f64]| r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            let feasible = eq.iter().zip(beq).all(|(r, b)| (dot(r) - b).abs() <= 1e-7)
                && ub.iter().zip(bub).all(|(r, b)| dot(r) <= b + 1e-7);
            if feasible {
                let v = dot(c);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    }
    best
}

/// Status and optimum by enumeration. Free variables are split in two.
fn oracle(lp: &LinearProgram<f64>) -> (LpStatus, f64) {
    let mut cols: Vec<(usize, f64)> = Vec::new();
    for (j, lb) in lp.lower_bounds.iter().enumerate() {
        cols.push((j, 1.0));
        if lb.is_none() {
            cols.push((j, -1.0));
        }
    }
    let n = cols.len();
    let expand = |r: &[f64]| -> Vec<f64> { cols.iter().map(|&(j, s)| s * r[j]).collect() };
    let c = expand(&lp.objective);
    let eq: Vec<Vec<f64>> = lp.eq_matrix.iter().map(|r| expand(r)).collect();
    let mut ub: Vec<Vec<f64>> = lp.ub_matrix.iter().map(|r| expand(r)).collect();
    let mut bub = lp.ub_rhs.clone();
    let mut bounds = Vec::new();
    for (k, &(j, s)) in cols.iter().enumerate() {
        let mut r = vec![0.0; n];
        r[k] = -1.0;
        let lb = if s > 0.0 { lp.lower_bounds[j].unwrap_or(0.0) } else { 0.0 };
        bounds.push((r, -lb));
    }
    for (r, b) in &bounds {
        ub.push(r.clone());
        bub.push(*b);
    }
    let Some(best) = best_vertex(&c, &eq, &lp.eq_rhs, &ub, &bub) else {
        return (LpStatus::Infeasible, 0.0);
    };
    // recession directions normalized to the simplex
    let mut req: Vec<Vec<f64>> = eq.clone();
    let mut rbeq = vec![0.0; eq.len()];
    req.push(vec![1.0; n]);
    rbeq.push(1.0);
    let rbub = vec![0.0; ub.len()];
    match best_vertex(&c, &req, &rbeq, &ub, &rbub) {
        Some(v) if v > 1e-9 => (LpStatus::Unbounded, 0.0),
        _ => (LpStatus::Optimal, best),
    }
}

fn check_certificate(lp: &LinearProgram<f64>, s: &LpSolution<f64>) {
    let n = lp.num_vars();
    for y in &s.ub_duals {
        assert!(*y >= -1e-9, "negative inequality dual {y}");
    }
    let mut reduced = lp.objective.clone();
    for (row, y) in lp.eq_matrix.iter().zip(&s.eq_duals).chain(lp.ub_matrix.iter().zip(&s.ub_duals)) {
        for j in 0..n {
            reduced[j] -= row[j] * y;
        }
    }
    let mut dual_value: f64 = lp.eq_rhs.iter().zip(&s.eq_duals).map(|(b, y)| b * y).sum::<f64>()
        + lp.ub_rhs.iter().zip(&s.ub_duals).map(|(b, y)| b * y).sum::<f64>();
    for j in 0..n {
        match lp.lower_bounds[j] {
            Some(lb) => {
                assert!(reduced[j] <= 1e-7, "dual infeasible at column {j}: {}", reduced[j]);
                dual_value += reduced[j] * lb;
            }
            None => assert!(reduced[j].abs() <= 1e-7, "free column {j} has reduced cost {}", reduced[j]),
        }
    }
    assert!((dual_value - s.objective_value).abs() <= 1e-6, "dual {dual_value} vs primal {}", s.objective_value);
}

fn check_primal(lp: &LinearProgram<f64>, s: &LpSolution<f64>) {
    let dot = |r: &[f64]| r.iter().zip(&s.x).map(|(a, b)| a * b).sum::<f64>();
    for (r, b) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        assert!((dot(r) - b).abs() <= 1e-7);
    }
    for (r, b) in lp.ub_matrix.iter().zip(&lp.ub_rhs) {
        assert!(dot(r) <= b + 1e-7);
    }
    for (x, lb) in s.x.iter().zip(&lp.lower_bounds) {
        if let Some(lb) = lb {
            assert!(*x >= lb - 1e-9);
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram<f64> {
    let n = rng.gen_range(1..=8);
    let m_ub = rng.gen_range(0..=8);
    let m_eq = rng.gen_range(0..=2usize).min(n);
    let coef = |rng: &mut ChaCha8Rng| rng.gen_range(-3i32..=3) as f64;
    let mut lp = LinearProgram::new((0..n).map(|_| coef(rng)).collect());
    lp.lower_bounds = (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0 => None,
            1 => Some(-(rng.gen_range(0..=2) as f64)),
            _ => Some(0.0),
        })
        .collect();
    // a known point keeps most instances feasible
    let x0: Vec<f64> = lp.lower_bounds.iter().map(|lb| lb.unwrap_or(-1.0) + rng.gen_range(0..=2) as f64).collect();
    let plant = rng.gen_bool(0.8);
    for _ in 0..m_eq {
        let row: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
        let b = if plant { row.iter().zip(&x0).map(|(a, x)| a * x).sum() } else { coef(rng) };
        lp.add_eq(row, b);
    }
    for _ in 0..m_ub {
        let row: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
        let b = if plant {
            row.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>() + rng.gen_range(0..=3) as f64
        } else {
            coef(rng)
        };
        lp.add_ub(row, b);
    }
    lp
}

#[test]
fn random_programs_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut counts = [0usize; 3];
    for case in 0..500 {
        let lp = random_lp(&mut rng);
        let s = solve_lp(&lp).unwrap();
        let (status, value) = oracle(&lp);
        assert_eq!(s.status, status, "case {case}: {lp:?}");
        match status {
            LpStatus::Optimal => {
                counts[0] += 1;
                assert!((s.objective_value - value).abs() <= 1e-6, "case {case}: {} vs {value}", s.objective_value);
                check_primal(&lp, &s);
                check_certificate(&lp, &s);
            }
            LpStatus::Infeasible => counts[1] += 1,
            LpStatus::Unbounded => counts[2] += 1,
        }
    }
    // the generator should exercise every outcome
    assert!(counts.iter().all(|&c| c > 10), "{counts:?}");
}

#[test]
fn certificate_on_worked_example() {
    let mut lp = LinearProgram::new(vec![1.0, 1.0]);
    lp.add_ub(vec![1.0, 1.0], 1.0).add_ub(vec![1.0, 0.0], 0.25);
    let s = solve_lp(&lp).unwrap();
    assert_eq!(oracle(&lp), (LpStatus::Optimal, 1.0));
    assert!((s.objective_value - 1.0).abs() <= 1e-9);
    check_certificate(&lp, &s);
}

#[test]
fn identical_inputs_give_identical_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let lp = random_lp(&mut rng);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a, b);
    }
}

/// A pivot-segment grasp program: six homogeneous equality rows over 65
/// nearly-parallel pyramid columns plus the force cap. Small pivots on its
/// degenerate ties once corrupted the tableau.
#[test]
fn degenerate_grasp_program() {
    let v: serde_json::Value = serde_json::from_str(include_str!("data/degenerate_grasp_lp.json")).unwrap();
    let rows = |k: &str| -> Vec<Vec<f64>> { serde_json::from_value(v[k].clone()).unwrap() };
    let vals = |k: &str| -> Vec<f64> { serde_json::from_value(v[k].clone()).unwrap() };
    let mut lp = LinearProgram::new(vals("c"));
    for (r, b) in rows("aeq").into_iter().zip(vals("beq")) {
        lp.add_eq(r, b);
    }
    for (r, b) in rows("aub").into_iter().zip(vals("bub")) {
        lp.add_ub(r, b);
    }
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    // reference optimum from an independent interior-point solve
    assert!((s.objective_value - 0.47189214).abs() <= 1e-7, "{}", s.objective_value);
    check_primal(&lp, &s);
    check_certificate(&lp, &s);
}
