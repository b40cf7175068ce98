//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `maximize cᵀx` subject to `A_eq x = b_eq`, `A_ub x ≤ b_ub` and
//! `x ≥ lb` where each lower bound may be `-∞`. Sizes are small (tens of
//! columns), so the whole tableau is kept dense. The pivot sequence depends
//! only on the input bits, so solves are reproducible.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub eq_matrix: Vec<Vec<T>>,
    pub eq_rhs: Vec<T>,
    pub ub_matrix: Vec<Vec<T>>,
    pub ub_rhs: Vec<T>,
    /// `None` is an unbounded-below variable.
    pub lower_bounds: Vec<Option<T>>,
}

impl<T: Real> LinearProgram<T> {
    /// `n` variables, all with lower bound zero and no constraints.
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        Self {
            objective,
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ub_matrix: Vec::new(),
            ub_rhs: Vec::new(),
            lower_bounds: vec![Some(T::zero()); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_ub(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.ub_matrix.push(row);
        self.ub_rhs.push(rhs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let dims = |what: &str, got: usize, want: usize| -> Result<()> {
            if got != want {
                Err(Error::DimensionMismatch(format!("{what}: {got} != {want}")))
            } else {
                Ok(())
            }
        };
        dims("equality rhs", self.eq_rhs.len(), self.eq_matrix.len())?;
        dims("inequality rhs", self.ub_rhs.len(), self.ub_matrix.len())?;
        dims("lower bounds", self.lower_bounds.len(), n)?;
        for (i, r) in self.eq_matrix.iter().enumerate() {
            dims(&format!("equality row {i}"), r.len(), n)?;
        }
        for (i, r) in self.ub_matrix.iter().enumerate() {
            dims(&format!("inequality row {i}"), r.len(), n)?;
        }
        let finite = self.objective.iter().chain(self.eq_rhs.iter()).chain(self.ub_rhs.iter()).all(|v| v.is_finite())
            && self.eq_matrix.iter().chain(self.ub_matrix.iter()).flatten().all(|v| v.is_finite())
            && self.lower_bounds.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::DimensionMismatch("non-finite coefficient".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Meaningful only when `status` is `Optimal`.
    pub x: Vec<T>,
    pub objective_value: T,
    /// Dual multipliers of the equality rows (free sign).
    pub eq_duals: Vec<T>,
    /// Dual multipliers of the inequality rows (nonnegative).
    pub ub_duals: Vec<T>,
}

impl<T: Real> LpSolution<T> {
    fn without_point(status: LpStatus, lp: &LinearProgram<T>) -> Self {
        Self {
            status,
            x: vec![T::zero(); lp.num_vars()],
            objective_value: T::zero(),
            eq_duals: vec![T::zero(); lp.eq_matrix.len()],
            ub_duals: vec![T::zero(); lp.ub_matrix.len()],
        }
    }
}

const MAX_ITERATIONS: usize = 50_000;

#[derive(Clone, Copy)]
enum Column {
    Shifted { var: usize },
    Positive { var: usize },
    Negative { var: usize },
    Slack,
    Artificial,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    cost: Vec<T>,
    basis: Vec<usize>,
    kinds: Vec<Column>,
    width: usize,
}

impl<T: Real> Tableau<T> {
    fn rhs(&self, i: usize) -> T {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let inv = T::one() / self.rows[r][s];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][s] = T::one();
        let pivot_row = self.rows[r].clone();
        // a difference this far below its operands is cancellation residue
        let noise = T::epsilon() * T::lit(64.0);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[s];
            if f != T::zero() {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    let d = f * *p;
                    let next = *v - d;
                    *v = if next.abs() <= noise * v.abs().max(d.abs()) { T::zero() } else { next };
                }
                row[s] = T::zero();
            }
        }
        let f = self.cost[s];
        if f != T::zero() {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * *p;
            }
            self.cost[s] = T::zero();
        }
        self.basis[r] = s;
    }

    /// Bland's rule iterations until optimal or unbounded. `bounded` marks a
    /// phase whose objective cannot grow without limit.
    fn run(&mut self, allow: impl Fn(usize) -> bool, bounded: bool, iterations: &mut usize) -> Result<LpStatus> {
        let dtol = T::feasibility_tolerance() * T::lit(1e-2);
        let ptol = T::pivot_tolerance();
        let mut blocked = vec![false; self.width];
        loop {
            *iterations += 1;
            if *iterations > MAX_ITERATIONS {
                return Err(Error::NumericalBreakdown("iteration limit reached".into()));
            }
            let Some(s) = (0..self.width).find(|&j| allow(j) && !blocked[j] && self.cost[j] > dtol) else {
                return Ok(LpStatus::Optimal);
            };
            // Harris ratio test: the loosest bound within tolerance of the
            // tightest, then the largest pivot among the rows under it
            let ftol = T::feasibility_tolerance();
            let mut bound: Option<T> = None;
            let mut tiny_step = T::zero();
            let mut tiny_positive = false;
            for i in 0..self.rows.len() {
                let a = self.rows[i][s];
                if a > ptol {
                    let ratio = (self.rhs(i).max(T::zero()) + ftol) / a;
                    bound = Some(bound.map_or(ratio, |b| b.min(ratio)));
                } else if a > T::zero() {
                    tiny_positive = true;
                    tiny_step = tiny_step.max(self.rhs(i));
                }
            }
            let mut leave: Option<(usize, T)> = None;
            if let Some(bound) = bound {
                for i in 0..self.rows.len() {
                    let a = self.rows[i][s];
                    if a > ptol && self.rhs(i).max(T::zero()) / a <= bound {
                        let better = match leave {
                            None => true,
                            Some((li, la)) => a > la || (a == la && self.basis[i] < self.basis[li]),
                        };
                        if better {
                            leave = Some((i, a));
                        }
                    }
                }
            }
            match leave {
                Some((r, _)) => {
                    self.pivot(r, s);
                    blocked.fill(false);
                }
                // Only roundoff-level entries stand in the way: the step is
                // either zero (degenerate rows) or past any meaningful scale.
                None if tiny_positive && (bounded || tiny_step <= T::feasibility_tolerance()) => blocked[s] = true,
                None => return Ok(LpStatus::Unbounded),
            }
        }
    }
}

/// Maximizes `lp.objective · x`.
pub fn solve_lp<T: Real>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    lp.validate()?;
    let n = lp.num_vars();
    let m_eq = lp.eq_matrix.len();
    let m = m_eq + lp.ub_matrix.len();

    // structural columns
    let mut kinds = Vec::new();
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    for (j, lb) in lp.lower_bounds.iter().enumerate() {
        let c = kinds.len();
        match lb {
            Some(_) => {
                kinds.push(Column::Shifted { var: j });
                var_cols.push((c, None));
            }
            None => {
                kinds.push(Column::Positive { var: j });
                kinds.push(Column::Negative { var: j });
                var_cols.push((c, Some(c + 1)));
            }
        }
    }
    let n_struct = kinds.len();
    let row_of = |i: usize| -> (&Vec<T>, T) {
        if i < m_eq {
            (&lp.eq_matrix[i], lp.eq_rhs[i])
        } else {
            (&lp.ub_matrix[i - m_eq], lp.ub_rhs[i - m_eq])
        }
    };

    // shifted rhs and sign normalization
    let mut dense: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut rhs: Vec<T> = Vec::with_capacity(m);
    let mut sign: Vec<T> = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b) = row_of(i);
        let mut row = vec![T::zero(); n_struct];
        let mut b = b;
        for j in 0..n {
            let (p, q) = var_cols[j];
            row[p] = a[j];
            if let Some(q) = q {
                row[q] = -a[j];
            }
            if let Some(lb) = lp.lower_bounds[j] {
                b -= a[j] * lb;
            }
        }
        let s = if b < T::zero() { -T::one() } else { T::one() };
        if s < T::zero() {
            for v in row.iter_mut() {
                *v = -*v;
            }
            b = -b;
        }
        dense.push(row);
        rhs.push(b);
        sign.push(s);
    }

    // slack and artificial columns; identity[i] is the column that starts as e_i
    let mut identity = vec![0usize; m];
    let mut slack_of = vec![None; m];
    for i in m_eq..m {
        slack_of[i] = Some(kinds.len());
        kinds.push(Column::Slack);
    }
    let mut artificial_rows = Vec::new();
    for i in 0..m {
        let needs_artificial = i < m_eq || sign[i] < T::zero();
        if needs_artificial {
            identity[i] = kinds.len();
            kinds.push(Column::Artificial);
            artificial_rows.push(i);
        } else {
            identity[i] = slack_of[i].unwrap();
        }
    }
    let width = kinds.len();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut r = vec![T::zero(); width + 1];
        r[..n_struct].copy_from_slice(&dense[i]);
        if let Some(s) = slack_of[i] {
            r[s] = sign[i];
        }
        r[identity[i]] = T::one();
        r[width] = rhs[i];
        rows.push(r);
    }
    let is_artificial = |j: usize, kinds: &[Column]| j < kinds.len() && matches!(kinds[j], Column::Artificial);

    // phase 1: maximize -sum(artificials)
    let mut cost = vec![T::zero(); width + 1];
    for &i in &artificial_rows {
        for j in 0..=width {
            if !is_artificial(j, &kinds) {
                cost[j] += rows[i][j];
            }
        }
    }
    let mut tab = Tableau { rows, cost, basis: identity.clone(), kinds, width };
    let mut iterations = 0;
    if !artificial_rows.is_empty() {
        let kinds = tab.kinds.clone();
        tab.run(|j| !is_artificial(j, &kinds), true, &mut iterations)?;
        let infeasibility = tab.cost[width];
        let scale = T::one() + rhs.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        if infeasibility > T::feasibility_tolerance() * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, lp));
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < tab.rows.len() {
            if is_artificial(tab.basis[r], &tab.kinds) {
                let candidate = (0..width)
                    .filter(|&j| !is_artificial(j, &tab.kinds))
                    .find(|&j| tab.rows[r][j].abs() > T::pivot_tolerance());
                match candidate {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        // redundant row; keep it but it can never constrain anything
                        for j in 0..width {
                            if !is_artificial(j, &tab.kinds) {
                                tab.rows[r][j] = T::zero();
                            }
                        }
                    }
                }
            }
            r += 1;
        }
    }

    // phase 2
    let mut struct_cost = vec![T::zero(); width];
    for (c, kind) in tab.kinds.iter().enumerate() {
        struct_cost[c] = match *kind {
            Column::Shifted { var } | Column::Positive { var } => lp.objective[var],
            Column::Negative { var } => -lp.objective[var],
            Column::Slack | Column::Artificial => T::zero(),
        };
    }
    let mut cost = vec![T::zero(); width + 1];
    cost[..width].copy_from_slice(&struct_cost);
    for (i, row) in tab.rows.iter().enumerate() {
        let cb = struct_cost[tab.basis[i]];
        if cb != T::zero() {
            for j in 0..=width {
                cost[j] -= cb * row[j];
            }
        }
    }
    tab.cost = cost;
    let kinds = tab.kinds.clone();
    let status = tab.run(|j| !is_artificial(j, &kinds), false, &mut iterations)?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, lp));
    }

    let mut col_val = vec![T::zero(); width];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_val[b] = tab.rhs(i);
    }
    let mut x = vec![T::zero(); n];
    for j in 0..n {
        let (p, q) = var_cols[j];
        x[j] = match lp.lower_bounds[j] {
            Some(lb) => lb + col_val[p],
            None => col_val[p] - col_val[q.unwrap()],
        };
    }
    check_residuals(lp, &x)?;
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| *c * *v).sum();
    // y_i = c_B B⁻¹ e_i = -(reduced cost of the column that started as e_i)
    let duals: Vec<T> = (0..m).map(|i| -tab.cost[identity[i]] * sign[i]).collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        eq_duals: duals[..m_eq].to_vec(),
        ub_duals: duals[m_eq..].to_vec(),
    })
}

/// Rejects a point that drifted off the original constraints, which only a
/// numerically corrupted tableau can produce.
fn check_residuals<T: Real>(lp: &LinearProgram<T>, x: &[T]) -> Result<()> {
    let tol = T::feasibility_tolerance() * T::lit(10.0);
    let excess = |a: &[T], b: T| -> (T, T) {
        let mut scale = b.abs();
        let mut dot = T::zero();
        for (aj, xj) in a.iter().zip(x) {
            dot += *aj * *xj;
            scale = scale.max((*aj * *xj).abs());
        }
        (dot - b, T::one() + scale)
    };
    for (i, (a, b)) in lp.eq_matrix.iter().zip(&lp.eq_rhs).enumerate() {
        let (r, scale) = excess(a, *b);
        if r.abs() > tol * scale {
            return Err(Error::NumericalBreakdown(format!("equality row {i} off by {r:?}")));
        }
    }
    for (i, (a, b)) in lp.ub_matrix.iter().zip(&lp.ub_rhs).enumerate() {
        let (r, scale) = excess(a, *b);
        if r > tol * scale {
            return Err(Error::NumericalBreakdown(format!("inequality row {i} exceeded by {r:?}")));
        }
    }
    for (j, (v, lb)) in x.iter().zip(&lp.lower_bounds).enumerate() {
        if let Some(lb) = lb {
            if *v < *lb - tol * (T::one() + lb.abs()) {
                return Err(Error::NumericalBreakdown(format!("variable {j} below its bound")));
            }
        }
    }
    Ok(())
}
