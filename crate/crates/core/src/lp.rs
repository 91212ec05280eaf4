//! Dense two-phase simplex and the happiness-ratio program.
//!
//! Programs here are tiny (at most d+1 variables and k+3 rows for the
//! happiness program), so the solver keeps a full tableau and uses Bland's
//! rule throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Point;

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const ITERATION_CAP: usize = 10_000;

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective·x` subject to linear rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
}

impl LinearProgram {
    /// A minimization program over `objective.len()` variables, each bounded below by 0.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { objective, constraints: Vec::new(), lower: vec![0.0; n], upper: vec![None; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self, var: usize) -> (f64, Option<f64>) {
        (self.lower[var], self.upper[var])
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::MalformedProgram(format!(
                "row has {} coefficients, program has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProgram("non-finite coefficient".into()));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: Option<f64>) -> Result<()> {
        if var >= self.num_vars() {
            return Err(Error::MalformedProgram(format!("no variable {var}")));
        }
        if !lower.is_finite() || upper.is_some_and(|u| !u.is_finite()) {
            return Err(Error::MalformedProgram("bounds must be finite".into()));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - xj);
            if let Some(u) = self.upper[j] {
                worst = worst.max(xj - u);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration cap was hit; no answer is claimed.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub variable_values: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize) -> Self {
        LpSolution { status, objective_value: f64::NAN, variable_values: vec![f64::NAN; n] }
    }
}

struct Tableau {
    /// rows × (cols + 1); the last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.a[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64]) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = cost[col];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Reduced-cost row for `c` (length cols) given the current basis; last entry is -z.
    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = c.iter().copied().chain(std::iter::once(0.0)).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (v, t) in r.iter_mut().zip(&self.a[i]) {
                    *v -= cb * t;
                }
            }
        }
        r
    }

    /// Bland's-rule simplex over columns `0..allowed`, spending pivots from `budget`.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize, budget: &mut usize) -> LpStatus {
        loop {
            let Some(col) = (0..allowed).find(|&j| cost[j] < -OPTIMALITY_TOL) else {
                return LpStatus::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][col];
                if aij > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aij;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return LpStatus::Unbounded;
            };
            if *budget == 0 {
                return LpStatus::IterationLimit;
            }
            *budget -= 1;
            self.pivot(row, col, cost);
        }
    }
}

/// Solves `lp` with the two-phase simplex method.
///
/// Equalities are split into two opposing inequalities and upper bounds become
/// rows, so the solver sees only `≤` rows over shifted nonnegative variables.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();

    // rows a·x' <= b over x' = x - lower >= 0
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
        let b = c.rhs - shift;
        match c.relation {
            Relation::Le => rows.push((c.coeffs.clone(), b)),
            Relation::Ge => rows.push((c.coeffs.iter().map(|a| -a).collect(), -b)),
            Relation::Eq => {
                rows.push((c.coeffs.clone(), b));
                rows.push((c.coeffs.iter().map(|a| -a).collect(), -b));
            }
        }
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            rows.push((e, u - lp.lower[j]));
        }
    }

    let m = rows.len();
    let negative: Vec<usize> = (0..m).filter(|&i| rows[i].1 < 0.0).collect();
    let n_art = negative.len();
    let cols = n + m + n_art;
    let mut tab = Tableau { a: vec![vec![0.0; cols + 1]; m], basis: vec![0; m], cols };
    let mut art = 0;
    for (i, (coeffs, b)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        let r = &mut tab.a[i];
        for j in 0..n {
            r[j] = sign * coeffs[j];
        }
        r[n + i] = sign;
        r[cols] = sign * b;
        if *b < 0.0 {
            r[n + m + art] = 1.0;
            tab.basis[i] = n + m + art;
            art += 1;
        } else {
            tab.basis[i] = n + i;
        }
    }

    let mut budget = ITERATION_CAP;
    if n_art > 0 {
        let mut c1 = vec![0.0; cols];
        for c in c1.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        let mut cost = tab.reduced_costs(&c1);
        match tab.optimize(&mut cost, cols, &mut budget) {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => return LpSolution::without_point(LpStatus::IterationLimit, n),
            // phase one is bounded below by zero
            LpStatus::Unbounded | LpStatus::Infeasible => unreachable!("phase one cannot be unbounded"),
        }
        let scale = 1.0 + rows.iter().map(|(_, b)| b.abs()).fold(0.0, f64::max);
        if -cost[cols] > FEASIBILITY_TOL * scale {
            return LpSolution::without_point(LpStatus::Infeasible, n);
        }
        // drive zero-valued artificials out of the basis where possible
        for i in 0..m {
            if tab.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| tab.a[i][j].abs() > 1e-9) {
                    tab.pivot(i, j, &mut cost);
                }
            }
        }
    }

    let mut c2 = vec![0.0; cols];
    c2[..n].copy_from_slice(&lp.objective);
    let mut cost = tab.reduced_costs(&c2);
    match tab.optimize(&mut cost, n + m, &mut budget) {
        LpStatus::Optimal => {}
        status => return LpSolution::without_point(status, n),
    }

    let mut x = lp.lower.clone();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] += tab.rhs(i).max(0.0);
        }
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpSolution { status: LpStatus::Optimal, objective_value, variable_values: x }
}

/// Builds the happiness program for candidate `p` against the selected set `s`:
///
/// ```text
/// min y  s.t.  q·v <= y  for q in s,   p·v = 1,   v >= 0,   y <= 1
/// ```
///
/// Variables are `v[0..d]` followed by `y`. Its optimum is the restricted
/// happiness ratio of `s` against `s ∪ {p}`; an infeasible program means
/// that ratio is 1.
pub fn build_happiness_lp(s: &[&Point], p: &Point) -> Result<LinearProgram> {
    if s.is_empty() {
        return Err(Error::Empty("happiness program needs a nonempty selected set"));
    }
    let d = p.dim();
    if let Some(q) = s.iter().find(|q| q.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: q.dim() });
    }
    if s.iter().any(|q| q.id == p.id) {
        return Err(Error::CandidateInSet(p.id));
    }
    if !p.coords.iter().any(|&c| c > 0.0) {
        return Err(Error::ZeroCandidate);
    }
    let mut objective = vec![0.0; d + 1];
    objective[d] = 1.0;
    let mut lp = LinearProgram::minimize(objective);
    for q in s {
        let mut row = q.coords.clone();
        row.push(-1.0);
        lp.add_constraint(row, Relation::Le, 0.0)?;
    }
    let mut norm = p.coords.clone();
    norm.push(0.0);
    lp.add_constraint(norm, Relation::Eq, 1.0)?;
    let mut cap = vec![0.0; d + 1];
    cap[d] = 1.0;
    lp.add_constraint(cap, Relation::Le, 1.0)?;
    Ok(lp)
}
