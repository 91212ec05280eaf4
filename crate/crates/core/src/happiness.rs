//! Happiness and regret evaluation.
//!
//! For a finite class every ratio is a direct max/max computation. For the
//! full nonnegative-linear class the minimum happiness of `S` over `D` is
//! evaluated per candidate point: `H_D(S) = min over p in D \ S` of the
//! happiness program's optimum for `(S, p)`. Each per-candidate value is
//! `inf_u max_S u / max(max_S u, u(p))`, and taking the minimum over `p`
//! recovers `inf_u max_S u / max_D u` exactly.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{build_happiness_lp, solve, LpStatus};
use crate::types::{dot, Dataset, FiniteClass, Point, UtilityClass, UtilityVector};

/// Happiness ratio of the selected ids under one utility vector.
pub fn happiness_ratio(data: &Dataset, selected: &[usize], u: &UtilityVector) -> Result<f64> {
    if u.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: u.dim() });
    }
    if selected.is_empty() {
        return Err(Error::Empty("happiness ratio of an empty selection"));
    }
    let pos = data.positions(selected)?;
    let pts = data.points();
    let best_all = pts.iter().map(|p| dot(u.weights(), &p.coords)).fold(0.0, f64::max);
    if best_all <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    let best_sel = pos.iter().map(|&i| dot(u.weights(), &pts[i].coords)).fold(0.0, f64::max);
    Ok((best_sel / best_all).clamp(0.0, 1.0))
}

/// Minimum happiness ratio of the selected ids over the class. An empty selection scores 0.
pub fn min_happiness(data: &Dataset, selected: &[usize], class: &UtilityClass) -> Result<f64> {
    let eval = Evaluator::new(data, class)?;
    eval.min_happiness(&data.positions(selected)?)
}

/// `1 - min_happiness`.
pub fn max_regret_ratio(data: &Dataset, selected: &[usize], class: &UtilityClass) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::Empty("regret of an empty selection"));
    }
    Ok(1.0 - min_happiness(data, selected, class)?)
}

/// Increase in minimum happiness from adding `candidate` to `selected`.
pub fn marginal_gain(data: &Dataset, selected: &[usize], candidate: usize, class: &UtilityClass) -> Result<f64> {
    let eval = Evaluator::new(data, class)?;
    let pos = data.positions(selected)?;
    let p = data.position(candidate).ok_or(Error::UnknownId(candidate))?;
    if pos.contains(&p) {
        return Err(Error::CandidateInSet(candidate));
    }
    eval.gain(&pos, p)
}

/// Happiness of `selected` measured against `selected ∪ {candidate}` only.
///
/// This is the quantity the preselection greedy minimizes at each step.
pub fn restricted_min_happiness(selected: &[&Point], candidate: &Point, class: &UtilityClass) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::Empty("restricted happiness needs a nonempty selection"));
    }
    if selected.iter().any(|q| q.id == candidate.id) {
        return Err(Error::CandidateInSet(candidate.id));
    }
    if let Some(q) = selected.iter().find(|q| q.dim() != candidate.dim()) {
        return Err(Error::DimensionMismatch { expected: candidate.dim(), got: q.dim() });
    }
    match class {
        UtilityClass::Finite(f) => {
            class.check_dim(candidate.dim())?;
            Ok(restricted_finite(f, selected.iter().copied(), candidate))
        }
        UtilityClass::FullNonnegativeLinear => restricted_full(selected, candidate),
    }
}

fn restricted_finite<'p>(class: &FiniteClass, selected: impl Iterator<Item = &'p Point> + Clone, p: &Point) -> f64 {
    (0..class.vectors().len())
        .map(|j| {
            let best_sel = selected.clone().map(|q| class.eval(j, q)).fold(0.0, f64::max);
            let up = class.eval(j, p);
            let denom = best_sel.max(up);
            if denom > 0.0 {
                best_sel / denom
            } else {
                1.0
            }
        })
        .fold(1.0, f64::min)
}

/// Happiness program optimum for `(selected, p)`, with the infeasible case read as 1.
pub(crate) fn restricted_full(selected: &[&Point], p: &Point) -> Result<f64> {
    if p.is_zero() {
        // no nonnegative utility prefers the zero point
        return Ok(1.0);
    }
    let lp = build_happiness_lp(selected, p)?;
    let sol = solve(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective_value.clamp(0.0, 1.0)),
        // the y <= 1 cap cut off every weight vector: the uncapped optimum exceeds 1
        LpStatus::Infeasible => Ok(1.0),
        LpStatus::Unbounded => Err(Error::MalformedProgram("happiness program reported unbounded".into())),
        LpStatus::IterationLimit => Err(Error::NumericalFailure(crate::lp::ITERATION_CAP)),
    }
}

/// Evaluation context over one dataset and class. Selections are given as
/// positions into [`Dataset::points`], not ids.
///
/// Counts every linear program it solves.
pub struct Evaluator<'a> {
    data: &'a Dataset,
    class: &'a UtilityClass,
    /// Finite class only: best utility over the dataset per vector.
    best_overall: Vec<f64>,
    lps: AtomicU64,
}

impl<'a> Evaluator<'a> {
    pub fn new(data: &'a Dataset, class: &'a UtilityClass) -> Result<Self> {
        class.check_dim(data.dim())?;
        let best_overall = match class {
            UtilityClass::Finite(f) => {
                (0..f.vectors().len()).map(|j| data.points().iter().map(|p| f.eval(j, p)).fold(0.0, f64::max)).collect()
            }
            UtilityClass::FullNonnegativeLinear => Vec::new(),
        };
        Ok(Evaluator { data, class, best_overall, lps: AtomicU64::new(0) })
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn class(&self) -> &'a UtilityClass {
        self.class
    }

    pub fn lp_count(&self) -> u64 {
        self.lps.load(Ordering::Relaxed)
    }

    fn points_at(&self, positions: &[usize]) -> Vec<&'a Point> {
        let pts = self.data.points();
        positions.iter().map(|&i| &pts[i]).collect()
    }

    /// `H_D(S)` for positions `s`; 0 for an empty set.
    pub fn min_happiness(&self, s: &[usize]) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        match self.class {
            UtilityClass::Finite(f) => {
                let pts = self.data.points();
                let mut h = 1.0f64;
                for (j, &best) in self.best_overall.iter().enumerate() {
                    if best <= 0.0 {
                        return Err(Error::UndefinedRatio);
                    }
                    let sel = s.iter().map(|&i| f.eval(j, &pts[i])).fold(0.0, f64::max);
                    h = h.min(sel / best);
                }
                Ok(h.clamp(0.0, 1.0))
            }
            UtilityClass::FullNonnegativeLinear => {
                let mut in_set = vec![false; self.data.len()];
                for &i in s {
                    in_set[i] = true;
                }
                let others: Vec<usize> = (0..self.data.len()).filter(|&i| !in_set[i]).collect();
                let values = self.restricted_many(s, &others)?;
                Ok(values.into_iter().fold(1.0, f64::min))
            }
        }
    }

    /// `H_{S ∪ {p}}(S)` for positions.
    pub fn restricted(&self, s: &[usize], p: usize) -> Result<f64> {
        let cand = &self.data.points()[p];
        match self.class {
            UtilityClass::Finite(f) => {
                let pts = self.data.points();
                Ok(restricted_finite(f, s.iter().map(|&i| &pts[i]), cand))
            }
            UtilityClass::FullNonnegativeLinear => {
                if !cand.is_zero() {
                    self.lps.fetch_add(1, Ordering::Relaxed);
                }
                restricted_full(&self.points_at(s), cand)
            }
        }
    }

    /// Restricted values for each candidate, in candidate order, evaluated in parallel.
    pub fn restricted_many(&self, s: &[usize], candidates: &[usize]) -> Result<Vec<f64>> {
        candidates.par_iter().map(|&p| self.restricted(s, p)).collect()
    }

    /// `Δ_S(p) = H(S ∪ {p}) - H(S)`, floored at 0 against round-off.
    pub fn gain(&self, s: &[usize], p: usize) -> Result<f64> {
        let base = self.min_happiness(s)?;
        let mut with = s.to_vec();
        with.push(p);
        Ok((self.min_happiness(&with)? - base).max(0.0))
    }
}
