//! Greedy submodularity ratio and greedy curvature estimates, and the
//! approximation bounds they feed.
//!
//! Both estimates range over the prefixes `S_0 = ∅, S_1, ..., S_{k-1}` of a
//! greedy trace and over context sets `T` with `|T| = k`. Pairs whose
//! denominator is zero constrain nothing and are skipped.

use std::collections::HashSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::happiness::Evaluator;
use crate::selection::{binomial, exhaustive_optimal, pres_greed, Combinations};
use crate::types::{Dataset, GreedyTrace, UtilityClass};

/// Gains at or below this are treated as zero when deciding vacuous pairs.
pub const GAIN_TOL: f64 = 1e-9;

pub const DEFAULT_SUBSET_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetMode {
    /// Every k-subset was evaluated; estimates are exact.
    Exhaustive,
    /// `count` distinct k-subsets drawn uniformly with `seed`. The ratio
    /// estimate is then an upper bound and the curvature a lower bound.
    Sampled { count: usize, seed: u64 },
}

/// Context sets (as ids, ascending within each set) plus how they were obtained.
#[derive(Debug, Clone)]
pub struct SubsetStream {
    pub mode: SubsetMode,
    pub subsets: Vec<Vec<usize>>,
}

/// All k-subsets of the candidates when there are at most `budget` of them,
/// otherwise `budget` distinct uniformly sampled ones.
pub fn enumerate_subsets(c: &Dataset, k: usize, budget: usize, seed: u64) -> Result<SubsetStream> {
    if k > c.len() {
        return Err(Error::Domain(format!("k = {k} exceeds the {} candidates", c.len())));
    }
    let mut ids = c.ids();
    ids.sort_unstable();
    let total = binomial(c.len(), k);
    if total <= budget as u128 {
        let subsets = Combinations::new(c.len(), k).map(|combo| combo.iter().map(|&i| ids[i]).collect()).collect();
        return Ok(SubsetStream { mode: SubsetMode::Exhaustive, subsets });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(budget);
    let mut subsets = Vec::with_capacity(budget);
    while subsets.len() < budget {
        let mut pick: Vec<usize> = index::sample(&mut rng, c.len(), k).into_iter().map(|i| ids[i]).collect();
        pick.sort_unstable();
        if seen.insert(pick.clone()) {
            subsets.push(pick);
        }
    }
    Ok(SubsetStream { mode: SubsetMode::Sampled { count: budget, seed }, subsets })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub value: f64,
    /// No pair constrained the scalar; `value` is the conventional default.
    pub vacuous: bool,
    /// Number of constraining (prefix, T) pairs.
    pub pairs: usize,
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = a.to_vec();
    for &x in b {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn trace_positions(c: &Dataset, trace: &GreedyTrace) -> Result<Vec<usize>> {
    c.positions(&trace.chosen())
}

/// Largest γ with `Σ_{p ∈ T \ S_i} Δ_{S_i}(p) >= γ Δ_{S_i}(T)` over the trace
/// prefixes `i = 0..k-1` and the given context sets. Clamped to [0, 1];
/// reported as 1 with the vacuous flag when nothing constrains it.
pub fn greedy_submodularity_ratio(
    c: &Dataset,
    trace: &GreedyTrace,
    k: usize,
    class: &UtilityClass,
    subsets: &SubsetStream,
) -> Result<RatioEstimate> {
    let eval = Evaluator::new(c, class)?;
    let chosen = trace_positions(c, trace)?;
    let sets: Vec<Vec<usize>> = subsets.subsets.iter().map(|t| c.positions(t)).collect::<Result<_>>()?;
    let last = k.saturating_sub(1).min(chosen.len());
    let mut best = f64::INFINITY;
    let mut pairs = 0;
    for i in 0..=last {
        let prefix = &chosen[..i];
        let base = eval.min_happiness(prefix)?;
        let singles: Vec<f64> = (0..c.len())
            .into_par_iter()
            .map(|p| {
                if prefix.contains(&p) {
                    Ok(0.0)
                } else {
                    let mut with = prefix.to_vec();
                    with.push(p);
                    Ok((eval.min_happiness(&with)? - base).max(0.0))
                }
            })
            .collect::<Result<_>>()?;
        let found = sets
            .par_iter()
            .map(|t| {
                let set_gain = eval.min_happiness(&union(prefix, t))? - base;
                if set_gain <= GAIN_TOL {
                    return Ok(None);
                }
                let sum: f64 = t.iter().filter(|p| !prefix.contains(p)).map(|&p| singles[p]).sum();
                Ok(Some(sum / set_gain))
            })
            .collect::<Result<Vec<Option<f64>>>>()?;
        for r in found.into_iter().flatten() {
            pairs += 1;
            best = best.min(r);
        }
    }
    Ok(if pairs == 0 {
        RatioEstimate { value: 1.0, vacuous: true, pairs }
    } else {
        RatioEstimate { value: best.clamp(0.0, 1.0), vacuous: false, pairs }
    })
}

/// Smallest α with `Δ_{S_{i-1} ∪ T}(q_i) >= (1 - α) Δ_{S_{i-1}}(q_i)` over
/// the trace steps `i = 1..k-1` and context sets not containing `q_i`.
/// Clamped to [0, 1]; reported as 0 with the vacuous flag when nothing constrains it.
pub fn greedy_curvature(
    c: &Dataset,
    trace: &GreedyTrace,
    k: usize,
    class: &UtilityClass,
    subsets: &SubsetStream,
) -> Result<RatioEstimate> {
    let eval = Evaluator::new(c, class)?;
    let chosen = trace_positions(c, trace)?;
    let sets: Vec<Vec<usize>> = subsets.subsets.iter().map(|t| c.positions(t)).collect::<Result<_>>()?;
    let last = k.saturating_sub(1).min(chosen.len());
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for i in 1..=last {
        let before = &chosen[..i - 1];
        let q = chosen[i - 1];
        let own_gain = eval.min_happiness(&chosen[..i])? - eval.min_happiness(before)?;
        if own_gain <= GAIN_TOL {
            continue;
        }
        let found = sets
            .par_iter()
            .filter(|t| !t.contains(&q))
            .map(|t| {
                let ctx = union(before, t);
                let mut with = ctx.clone();
                with.push(q);
                let ctx_gain = (eval.min_happiness(&with)? - eval.min_happiness(&ctx)?).max(0.0);
                Ok(1.0 - ctx_gain / own_gain)
            })
            .collect::<Result<Vec<f64>>>()?;
        pairs += found.len();
        worst = found.into_iter().fold(worst, f64::max);
    }
    Ok(if pairs == 0 {
        RatioEstimate { value: 0.0, vacuous: true, pairs }
    } else {
        RatioEstimate { value: worst.clamp(0.0, 1.0), vacuous: false, pairs }
    })
}

/// Deterministic guarantee `(1/α)[1 - (1 - αγ/k)^{k-1}]`; at `α = 0` its limit `γ(k-1)/k`.
pub fn presgreed_bound(alpha: f64, gamma: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("alpha = {alpha}, gamma = {gamma} must lie in [0, 1]")));
    }
    if k < 2 {
        return Err(Error::Domain("bound needs k >= 2".into()));
    }
    let kf = k as f64;
    if alpha == 0.0 {
        return Ok(gamma * (kf - 1.0) / kf);
    }
    let bound = -((kf - 1.0) * (-alpha * gamma / kf).ln_1p()).exp_m1() / alpha;
    Ok(bound.clamp(0.0, 1.0))
}

/// Expected-value guarantee of the sampling greedy, `1 - exp(-(1-ε)(k-1)γ/(λk))`.
pub fn stoc_bound(eps: f64, lambda: f64, gamma: f64, k: usize) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) || !(lambda >= 1.0 && lambda.is_finite()) || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("eps = {eps}, lambda = {lambda}, gamma = {gamma} out of range")));
    }
    if k < 2 {
        return Err(Error::Domain("bound needs k >= 2".into()));
    }
    let kf = k as f64;
    Ok(-(-(1.0 - eps) * (kf - 1.0) * gamma / (lambda * kf)).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub subset_budget: usize,
    pub seed: u64,
    pub eps: f64,
    pub lambda: f64,
    /// Run the exhaustive optimum when it needs at most this many subsets.
    pub oracle_budget: Option<u128>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            subset_budget: DEFAULT_SUBSET_BUDGET,
            seed: 0,
            eps: 0.1,
            lambda: 1.1,
            oracle_budget: Some(crate::selection::DEFAULT_EXHAUSTIVE_BUDGET),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub k: usize,
    pub gamma_g: f64,
    pub gamma_vacuous: bool,
    pub alpha_g: f64,
    pub alpha_vacuous: bool,
    pub subset_mode: SubsetMode,
    pub presgreed_bound: f64,
    pub stoc_bound: f64,
    pub greedy_ids: Vec<usize>,
    pub greedy_value: f64,
    pub optimal_value: Option<f64>,
    /// `greedy_value >= presgreed_bound * optimal_value`, when the optimum was computed.
    pub bound_holds: Option<bool>,
}

/// Runs the preselection greedy and estimates everything needed to check its guarantees.
pub fn analyze(c: &Dataset, k: usize, class: &UtilityClass, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    if k < 2 {
        return Err(Error::Domain("analysis needs k >= 2".into()));
    }
    let greedy = pres_greed(c, k, class)?;
    let subsets = enumerate_subsets(c, k.min(c.len()), cfg.subset_budget, cfg.seed)?;
    let gamma = greedy_submodularity_ratio(c, &greedy.trace, k, class, &subsets)?;
    let alpha = greedy_curvature(c, &greedy.trace, k, class, &subsets)?;
    let pg = presgreed_bound(alpha.value, gamma.value, k)?;
    let sb = stoc_bound(cfg.eps, cfg.lambda, gamma.value, k)?;
    let optimal_value = match cfg.oracle_budget {
        Some(budget) => match exhaustive_optimal(c, k, class, budget) {
            Ok(r) => Some(r.min_happiness),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let bound_holds = optimal_value.map(|opt| greedy.min_happiness >= pg * opt - 1e-9);
    Ok(AnalysisReport {
        k,
        gamma_g: gamma.value,
        gamma_vacuous: gamma.vacuous,
        alpha_g: alpha.value,
        alpha_vacuous: alpha.vacuous,
        subset_mode: subsets.mode,
        presgreed_bound: pg,
        stoc_bound: sb,
        greedy_ids: greedy.selected_ids,
        greedy_value: greedy.min_happiness,
        optimal_value,
        bound_holds,
    })
}
