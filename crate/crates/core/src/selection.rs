//! Greedy selection: the plain greedy baseline, greedy with a preselected
//! axis-extreme point, its sampling variant, and an exhaustive oracle.

use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::happiness::Evaluator;
use crate::types::{Dataset, GreedyTrace, SelectionResult, StepRecord, UtilityClass};

/// A candidate must beat the incumbent by more than this to replace it.
pub const IMPROVEMENT_TOL: f64 = 1e-10;

/// Default budget of subsets for [`exhaustive_optimal`].
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// Per-iteration sample size `ceil((n/k) ln(λ / (λ - 1 + ε)))`, at least 1.
pub fn sample_size(n: usize, k: usize, eps: f64, lambda: f64) -> Result<usize> {
    if n == 0 || k == 0 {
        return Err(Error::Domain("n and k must be at least 1".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps} is outside (0, 1]")));
    }
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} must be >= 1")));
    }
    let denom = lambda - 1.0 + eps;
    if denom <= 0.0 {
        return Err(Error::Domain("lambda - 1 + eps must be positive".into()));
    }
    let s = (n as f64 / k as f64) * (lambda / denom).ln();
    Ok((s.ceil() as usize).max(1))
}

/// Chooses the points evaluated at one sampling-greedy iteration.
///
/// `pool` holds the ids not yet selected, ascending. Implementations return a
/// subset of `pool`.
pub trait Sampler {
    fn sample(&mut self, step: usize, pool: &[usize], size: usize) -> Vec<usize>;
}

/// Uniform sampling without replacement from a seeded ChaCha stream.
pub struct UniformSampler {
    rng: ChaCha8Rng,
}

impl UniformSampler {
    pub fn new(seed: u64) -> Self {
        UniformSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Sampler for UniformSampler {
    fn sample(&mut self, _step: usize, pool: &[usize], size: usize) -> Vec<usize> {
        let size = size.min(pool.len());
        index::sample(&mut self.rng, pool.len(), size).into_iter().map(|i| pool[i]).collect()
    }
}

/// Sampling greedy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StocConfig {
    pub eps: f64,
    pub lambda: f64,
    pub seed: u64,
    /// Dimension whose maximizer is preselected.
    pub axis: usize,
    /// Evaluate `H(S_i)` after every step so the trace carries marginal gains.
    /// Costs one full evaluation per step.
    pub track_gains: bool,
}

impl StocConfig {
    pub fn new(eps: f64, lambda: f64, seed: u64) -> Self {
        StocConfig { eps, lambda, seed, axis: 0, track_gains: true }
    }
}

fn sorted_by_id(data: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by_key(|&i| data.points()[i].id);
    order
}

fn check_args(c: &Dataset, k: usize, class: &UtilityClass) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if c.is_empty() {
        return Err(Error::Empty("no candidates"));
    }
    class.check_dim(c.dim())
}

/// Everything, when more points are requested than exist.
fn take_all(c: &Dataset, class: &UtilityClass) -> Result<SelectionResult> {
    let ids: Vec<usize> = sorted_by_id(c).into_iter().map(|i| c.points()[i].id).collect();
    let eval = Evaluator::new(c, class)?;
    let all: Vec<usize> = (0..c.len()).collect();
    let h = eval.min_happiness(&all)?;
    let steps = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| StepRecord { step: i + 1, chosen: id, restricted_value: None, gain: None, evaluated: 0 })
        .collect();
    Ok(SelectionResult {
        selected_ids: ids,
        trace: GreedyTrace { steps, ..GreedyTrace::default() },
        min_happiness: h,
        max_regret: 1.0 - h,
        truncated: true,
    })
}

/// How each iteration's candidate pool is chosen.
enum Pool<'s> {
    Full,
    Sampled { size: usize, sampler: &'s mut dyn Sampler, track_gains: bool },
}

fn preselect_greedy(
    c: &Dataset,
    k: usize,
    class: &UtilityClass,
    axis: usize,
    mut pool: Pool<'_>,
) -> Result<SelectionResult> {
    check_args(c, k, class)?;
    if axis >= c.dim() {
        return Err(Error::Domain(format!("axis {axis} out of range for d = {}", c.dim())));
    }
    if k > c.len() {
        return take_all(c, class);
    }
    let start = Instant::now();
    let eval = Evaluator::new(c, class)?;
    let tracker = Evaluator::new(c, class)?;
    let pts = c.points();
    let by_id = sorted_by_id(c);

    let first = by_id
        .iter()
        .copied()
        .fold(None::<usize>, |best, i| match best {
            Some(b) if pts[b].coords[axis] >= pts[i].coords[axis] => Some(b),
            _ => Some(i),
        })
        .expect("nonempty");
    let mut selected = vec![first];
    let mut in_set = vec![false; c.len()];
    in_set[first] = true;
    let mut steps =
        vec![StepRecord { step: 1, chosen: pts[first].id, restricted_value: None, gain: None, evaluated: 0 }];
    // h[i] = H(S_{i+1}) when known
    let mut h: Vec<Option<f64>> = vec![None];

    for step in 2..=k {
        let remaining: Vec<usize> = by_id.iter().copied().filter(|&i| !in_set[i]).collect();
        let candidates = match &mut pool {
            Pool::Full => remaining.clone(),
            Pool::Sampled { size, sampler, .. } => {
                let ids: Vec<usize> = remaining.iter().map(|&i| pts[i].id).collect();
                let mut chosen = sampler.sample(step, &ids, *size);
                chosen.sort_unstable();
                chosen.dedup();
                let positions = c.positions(&chosen)?;
                if let Some(&bad) = positions.iter().find(|&&i| in_set[i]) {
                    return Err(Error::CandidateInSet(pts[bad].id));
                }
                positions
            }
        };
        let values = eval.restricted_many(&selected, &candidates)?;

        let mut h_star = 1.0;
        let mut winner = None;
        for (&p, &v) in candidates.iter().zip(&values) {
            if v < h_star - IMPROVEMENT_TOL {
                h_star = v;
                winner = Some(p);
            }
        }
        if matches!(pool, Pool::Full) {
            // a full scan's minimum is exactly H(S_{i-1})
            let prev = values.iter().copied().fold(1.0, f64::min);
            *h.last_mut().expect("nonempty") = Some(prev);
        }
        let Some(q) = winner else {
            break;
        };
        selected.push(q);
        in_set[q] = true;
        steps.push(StepRecord {
            step,
            chosen: pts[q].id,
            restricted_value: Some(h_star),
            gain: None,
            evaluated: candidates.len(),
        });
        let tracked = match &pool {
            Pool::Sampled { track_gains: true, .. } => Some(tracker.min_happiness(&selected)?),
            _ => None,
        };
        h.push(tracked);
    }
    let lp_evaluations = eval.lp_count();
    let elapsed = start.elapsed();

    let final_h = match h.last().copied().flatten() {
        Some(v) => v,
        None => tracker.min_happiness(&selected)?,
    };
    *h.last_mut().expect("nonempty") = Some(final_h);
    if let Pool::Sampled { track_gains: true, .. } = pool {
        h[0] = Some(tracker.min_happiness(&selected[..1])?);
    }
    let mut prev = 0.0;
    for (rec, hv) in steps.iter_mut().zip(&h) {
        if let Some(v) = *hv {
            rec.gain = Some((v - prev).max(0.0));
            prev = v;
        } else {
            break;
        }
    }

    Ok(SelectionResult {
        selected_ids: selected.iter().map(|&i| pts[i].id).collect(),
        trace: GreedyTrace { steps, lp_evaluations, elapsed },
        min_happiness: final_h,
        max_regret: 1.0 - final_h,
        truncated: false,
    })
}

/// Greedy with one preselected point: start from the maximizer of the first
/// dimension, then repeatedly add the candidate whose restricted happiness
/// `H_{S ∪ {p}}(S)` is smallest. Stops early when no candidate scores below 1.
pub fn pres_greed(c: &Dataset, k: usize, class: &UtilityClass) -> Result<SelectionResult> {
    preselect_greedy(c, k, class, 0, Pool::Full)
}

/// [`pres_greed`] preselecting the maximizer of dimension `axis`.
pub fn pres_greed_on_axis(c: &Dataset, k: usize, class: &UtilityClass, axis: usize) -> Result<SelectionResult> {
    preselect_greedy(c, k, class, axis, Pool::Full)
}

/// [`pres_greed`] evaluating only a uniform sample of the remaining candidates
/// at each iteration, sized by [`sample_size`] over `|C|`.
pub fn stoc_pres_greed(
    c: &Dataset,
    k: usize,
    class: &UtilityClass,
    eps: f64,
    lambda: f64,
    seed: u64,
) -> Result<SelectionResult> {
    stoc_pres_greed_with(c, k, class, &StocConfig::new(eps, lambda, seed))
}

pub fn stoc_pres_greed_with(c: &Dataset, k: usize, class: &UtilityClass, cfg: &StocConfig) -> Result<SelectionResult> {
    check_args(c, k, class)?;
    let s = sample_size(c.len(), k, cfg.eps, cfg.lambda)?;
    let mut sampler = UniformSampler::new(cfg.seed);
    stoc_pres_greed_with_sampler(c, k, class, s, &mut sampler, cfg.axis, cfg.track_gains)
}

/// Sampling greedy driven by an arbitrary [`Sampler`].
pub fn stoc_pres_greed_with_sampler(
    c: &Dataset,
    k: usize,
    class: &UtilityClass,
    sample_size: usize,
    sampler: &mut dyn Sampler,
    axis: usize,
    track_gains: bool,
) -> Result<SelectionResult> {
    preselect_greedy(c, k, class, axis, Pool::Sampled { size: sample_size, sampler, track_gains })
}

/// The classical greedy: from the empty set, repeatedly add the point that
/// maximizes the minimum happiness of the enlarged set. Ties go to the lowest id.
pub fn naive_greedy(c: &Dataset, k: usize, class: &UtilityClass) -> Result<SelectionResult> {
    check_args(c, k, class)?;
    if k > c.len() {
        return take_all(c, class);
    }
    let start = Instant::now();
    let eval = Evaluator::new(c, class)?;
    let pts = c.points();
    let by_id = sorted_by_id(c);
    let mut selected: Vec<usize> = Vec::new();
    let mut in_set = vec![false; c.len()];
    let mut steps = Vec::new();
    let mut current = 0.0;
    for step in 1..=k {
        let candidates: Vec<usize> = by_id.iter().copied().filter(|&i| !in_set[i]).collect();
        let values = candidates
            .par_iter()
            .map(|&p| {
                let mut with = selected.clone();
                with.push(p);
                eval.min_happiness(&with)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut best = (candidates[0], values[0]);
        for (&p, &v) in candidates.iter().zip(&values).skip(1) {
            if v > best.1 + IMPROVEMENT_TOL {
                best = (p, v);
            }
        }
        selected.push(best.0);
        in_set[best.0] = true;
        steps.push(StepRecord {
            step,
            chosen: pts[best.0].id,
            restricted_value: None,
            gain: Some((best.1 - current).max(0.0)),
            evaluated: candidates.len(),
        });
        current = current.max(best.1);
    }
    Ok(SelectionResult {
        selected_ids: selected.iter().map(|&i| pts[i].id).collect(),
        trace: GreedyTrace { steps, lp_evaluations: eval.lp_count(), elapsed: start.elapsed() },
        min_happiness: current,
        max_regret: 1.0 - current,
        truncated: false,
    })
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic k-combinations of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations { n, cur: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < self.n - k + i {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Best subset of size `min(k, |C|)` by brute force; ties go to the
/// lexicographically smallest id sequence. Refuses when the number of subsets
/// exceeds `budget`.
pub fn exhaustive_optimal(c: &Dataset, k: usize, class: &UtilityClass, budget: u128) -> Result<SelectionResult> {
    check_args(c, k, class)?;
    let m = k.min(c.len());
    let subsets = binomial(c.len(), m);
    if subsets > budget {
        return Err(Error::BudgetExceeded { subsets, budget });
    }
    let start = Instant::now();
    let eval = Evaluator::new(c, class)?;
    let by_id = sorted_by_id(c);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut combos = Combinations::new(c.len(), m);
    loop {
        let batch: Vec<Vec<usize>> = combos.by_ref().take(4096).collect();
        if batch.is_empty() {
            break;
        }
        let values = batch
            .par_iter()
            .map(|combo| {
                let pos: Vec<usize> = combo.iter().map(|&i| by_id[i]).collect();
                eval.min_happiness(&pos)
            })
            .collect::<Result<Vec<f64>>>()?;
        for (combo, v) in batch.into_iter().zip(values) {
            if best.as_ref().is_none_or(|(_, b)| v > *b + IMPROVEMENT_TOL) {
                best = Some((combo, v));
            }
        }
    }
    let (combo, value) = best.expect("at least one subset");
    let pts = c.points();
    let ids: Vec<usize> = combo.iter().map(|&i| pts[by_id[i]].id).collect();
    Ok(SelectionResult {
        selected_ids: ids,
        trace: GreedyTrace { steps: Vec::new(), lp_evaluations: eval.lp_count(), elapsed: start.elapsed() },
        min_happiness: value,
        max_regret: 1.0 - value,
        truncated: false,
    })
}
