//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use kregret::analysis::{analyze, stoc_bound, AnalysisConfig, SubsetMode};
use kregret::data::{gen_anticorrelated, nba_toy};
use kregret::happiness::{restricted_min_happiness, Evaluator};
use kregret::selection::{pres_greed, sample_size, stoc_pres_greed, stoc_pres_greed_with, Sampler, StocConfig};
use kregret::skyline::{compute_skyline, normalize};
use kregret::types::{Dataset, FiniteClass, Point, UtilityClass, UtilityVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn cents(x: f64) -> i64 {
    (x * 100.0 + 1e-9).round() as i64
}

fn toy_point(data: &Dataset, id: usize) -> &Point {
    data.get(id).expect("toy id")
}

/// Restricted value `H_{S ∪ {p}}(S)` on the toy fixture, by ids.
fn toy_restricted(data: &Dataset, class: &UtilityClass, s: &[usize], p: usize) -> f64 {
    let sel: Vec<&Point> = s.iter().map(|&i| toy_point(data, i)).collect();
    restricted_min_happiness(&sel, toy_point(data, p), class).expect("restricted value")
}

fn toy_ratio_grid() -> Outcome {
    let start = Instant::now();
    let (data, class) = nba_toy();
    let UtilityClass::Finite(f) = &class else { unreachable!() };
    #[rustfmt::skip]
    let utilities: [[f64; 4]; 9] = [
        [0.96, 0.60, 0.61, 0.72], [0.88, 0.54, 0.67, 0.69], [0.80, 0.39, 0.73, 0.64],
        [0.74, 0.66, 0.32, 0.57], [0.68, 0.85, 0.46, 0.66], [0.66, 0.40, 0.68, 0.58],
        [0.66, 0.85, 0.48, 0.66], [0.64, 0.29, 0.73, 0.56], [0.62, 0.95, 0.44, 0.67],
    ];
    #[rustfmt::skip]
    let ratios: [[f64; 4]; 9] = [
        [1.00, 0.63, 0.84, 1.00], [0.92, 0.57, 0.92, 0.96], [0.83, 0.41, 1.00, 0.89],
        [0.77, 0.69, 0.44, 0.79], [0.71, 0.89, 0.63, 0.92], [0.69, 0.42, 0.93, 0.81],
        [0.69, 0.89, 0.66, 0.92], [0.67, 0.31, 1.00, 0.78], [0.62 / 0.96, 1.00, 0.60, 0.93],
    ];
    let mins = [0.63, 0.57, 0.41, 0.44, 0.63, 0.42, 0.66, 0.31, 0.60];

    let best: Vec<f64> = (0..4).map(|j| data.points().iter().map(|p| f.eval(j, p)).fold(0.0, f64::max)).collect();
    let mut cells = 0;
    for (row, p) in data.points().iter().enumerate() {
        let mut min_hr = f64::INFINITY;
        for j in 0..4 {
            let u = f.eval(j, p);
            let hr = u / best[j];
            min_hr = min_hr.min(hr);
            ensure(near(u, utilities[row][j], 0.005), || format!("utility id {} v{j}: {u}", p.id))?;
            ensure(near(hr, ratios[row][j], 0.005), || format!("ratio id {} v{j}: {hr}", p.id))?;
            cells += 2;
        }
        ensure(cents(min_hr) == cents(mins[row]), || format!("min ratio id {}: {min_hr}", p.id))?;
        let via_eval = Evaluator::new(&data, &class).unwrap().min_happiness(&[row]).unwrap();
        ensure(near(via_eval, min_hr, 1e-12), || format!("evaluator disagrees for id {}", p.id))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{cells} cells and 9 minima match; id 9 under v0 checked against its fraction 0.62/0.96"))
}

fn toy_greedy_walk() -> Outcome {
    let start = Instant::now();
    let (data, class) = nba_toy();
    let r = pres_greed(&data, 3, &class).map_err(|e| e.to_string())?;
    ensure(r.selected_ids == vec![1, 9, 3], || format!("selected {:?}", r.selected_ids))?;
    let first = [(2, 0.91), (3, 0.84), (4, 0.91), (5, 0.71), (6, 0.90), (7, 0.71), (8, 0.84), (9, 0.63)];
    for (j, expected) in first {
        let h = toy_restricted(&data, &class, &[1], j);
        ensure(near(h, expected, 0.005), || format!("H_1,{j} = {h}, expected {expected}"))?;
    }
    let second = [(2, 0.91), (3, 0.84), (4, 1.00), (5, 1.00), (6, 0.90), (7, 1.00), (8, 0.84)];
    for (j, expected) in second {
        let h = toy_restricted(&data, &class, &[1, 9], j);
        ensure(near(h, expected, 0.005), || format!("H_2,{j} = {h}, expected {expected}"))?;
    }
    let recorded: Vec<f64> = r.trace.steps.iter().filter_map(|s| s.restricted_value).collect();
    ensure(recorded.len() == 2 && near(recorded[0], 0.63, 0.005) && near(recorded[1], 0.84, 0.005), || {
        format!("trace values {recorded:?}")
    })?;
    ensure(near(r.min_happiness, 1.0, 1e-12), || format!("final H = {}", r.min_happiness))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("selected [1, 9, 3], 15 intermediate values match, H = {:.2}", r.min_happiness))
}

/// Replays fixed sample sets, one per iteration.
struct Scripted {
    sets: Vec<Vec<usize>>,
}

impl Sampler for Scripted {
    fn sample(&mut self, step: usize, pool: &[usize], size: usize) -> Vec<usize> {
        let set = self.sets[step - 2].clone();
        assert_eq!(set.len(), size, "scripted sample size");
        assert!(set.iter().all(|id| pool.contains(id)), "scripted sample outside the pool");
        set
    }
}

fn toy_sampled_walk() -> Outcome {
    let (data, class) = nba_toy();
    let runs: [(Vec<Vec<usize>>, [usize; 3], f64); 4] = [
        (vec![vec![2, 3, 6, 7, 8, 9], vec![2, 3, 4, 5, 6, 8]], [1, 9, 3], 1.00),
        (vec![vec![2, 5, 6, 7, 9], vec![2, 4, 5, 6, 8]], [1, 9, 8], 1.00),
        (vec![vec![2, 4, 7, 8], vec![3, 4, 5, 9]], [1, 7, 3], 0.89),
        (vec![vec![2, 6, 7], vec![2, 4, 5]], [1, 7, 2], 0.89),
    ];
    // expected H_{2,j} for the runs whose second prefix is {1, 7}
    let after_lee = [(3, 0.84), (4, 1.00), (5, 1.00), (9, 0.89), (2, 0.91)];
    for &(j, expected) in &after_lee {
        let h = toy_restricted(&data, &class, &[1, 7], j);
        ensure(near(h, expected, 0.005), || format!("H_2,{j} after {{1,7}} = {h}, expected {expected}"))?;
    }
    let mut values = Vec::new();
    for (i, (sets, ids, min_ratio)) in runs.into_iter().enumerate() {
        let size = sets[0].len();
        let mut sampler = Scripted { sets };
        let r = kregret::selection::stoc_pres_greed_with_sampler(&data, 3, &class, size, &mut sampler, 0, true)
            .map_err(|e| e.to_string())?;
        ensure(r.selected_ids == ids, || format!("run {} selected {:?}", i + 1, r.selected_ids))?;
        ensure(cents(r.min_happiness) == cents(min_ratio), || {
            format!("run {} min ratio {} vs expected {min_ratio}", i + 1, r.min_happiness)
        })?;
        values.push(r.min_happiness);
    }
    let mean = values.iter().sum::<f64>() / 4.0;
    ensure(near(mean, 0.945, 0.005), || format!("mean {mean}"))?;
    Ok(format!("four result sets match; minima {values:.3?}, mean {mean:.4} vs 0.945"))
}

fn non_submodular_instance() -> Outcome {
    let d = Dataset::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let class = UtilityClass::finite(vec![
        UtilityVector::new(vec![1.0, 0.0]).unwrap(),
        UtilityVector::new(vec![0.0, 1.0]).unwrap(),
    ])
    .unwrap();
    let e = Evaluator::new(&d, &class).unwrap();
    let h = |s: &[usize]| e.min_happiness(s).unwrap();
    let (all, s1, s2, none) = (h(&[0, 1]), h(&[0]), h(&[1]), h(&[]));
    ensure(near(all, 1.0, 1e-12), || format!("H(D) = {all}"))?;
    ensure(near(s1, 0.0, 1e-12) && near(s2, 0.0, 1e-12) && near(none, 0.0, 1e-12), || {
        format!("H(S1) = {s1}, H(S2) = {s2}, H(empty) = {none}")
    })?;
    // submodularity would need H(S1) + H(S2) >= H(S1 ∪ S2) + H(S1 ∩ S2)
    ensure(s1 + s2 < all + none - 0.5, || "inequality not violated".into())?;
    Ok(format!("H(D) = {all}, H(S1) = H(S2) = H(empty) = 0: 0 + 0 < 1 + 0"))
}

fn fixed_utility_submodularity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e44a1);
    let mut checked = 0u64;
    for inst in 0..1000 {
        let n = rng.random_range(1..=8usize);
        let d = rng.random_range(1..=4usize);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let data = Dataset::from_rows(rows).unwrap();
        let mut w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        w[rng.random_range(0..d)] += 0.1;
        let class = UtilityClass::Finite(FiniteClass::new(vec![UtilityVector::new(w).unwrap()]).unwrap());
        let e = Evaluator::new(&data, &class).unwrap();
        let h: Vec<f64> = (0..1u32 << n)
            .map(|mask| {
                let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                e.min_happiness(&s).unwrap()
            })
            .collect();
        for big in 0..1u32 << n {
            // every subset `small` of `big`, including empty and `big` itself
            let mut small = big;
            loop {
                ensure(h[small as usize] <= h[big as usize] + 1e-12, || {
                    format!("instance {inst}: monotonicity fails for {small:b} within {big:b}")
                })?;
                for p in (0..n).filter(|&p| big >> p & 1 == 0) {
                    let bit = 1u32 << p;
                    let d_small = h[(small | bit) as usize] - h[small as usize];
                    let d_big = h[(big | bit) as usize] - h[big as usize];
                    ensure(d_small >= d_big - 1e-12, || {
                        format!("instance {inst}: gain of {p} on {small:b} is {d_small} < {d_big} on {big:b}")
                    })?;
                    checked += 1;
                }
                if small == 0 {
                    break;
                }
                small = (small - 1) & big;
            }
        }
    }
    Ok(format!("1000 instances, {checked} nested gain comparisons, zero violations"))
}

fn simplex_grid(d: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, steps: usize, out: &mut Vec<Vec<f64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[i] = c;
            rec(i + 1, left - c, cur, steps, out);
        }
    }
    rec(0, steps, &mut cur, steps, &mut out);
    out
}

fn lp_versus_grid() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e1d);
    let mut worst_gap = 0.0f64;
    let mut capped = 0;
    for d in [2usize, 3] {
        let grid = simplex_grid(d, 100);
        for inst in 0..100 {
            let m = rng.random_range(1..=5usize);
            let pts: Vec<Point> =
                (0..=m).map(|i| Point::new(i, (0..d).map(|_| rng.random::<f64>()).collect()).unwrap()).collect();
            let (p, s) = pts.split_last().unwrap();
            let sel: Vec<&Point> = s.iter().collect();
            let lp = restricted_min_happiness(&sel, p, &UtilityClass::FullNonnegativeLinear).unwrap();
            let mut grid_min = 1.0f64;
            for v in &grid {
                let best_s = s.iter().map(|q| dot(v, &q.coords)).fold(0.0, f64::max);
                let denom = best_s.max(dot(v, &p.coords));
                if denom > 0.0 {
                    grid_min = grid_min.min(best_s / denom);
                }
            }
            if lp == 1.0 {
                capped += 1;
            }
            ensure(lp <= grid_min + 1e-9, || format!("d={d} instance {inst}: LP {lp} above grid {grid_min}"))?;
            ensure(grid_min - lp <= 0.02, || format!("d={d} instance {inst}: LP {lp}, grid {grid_min}"))?;
            worst_gap = worst_gap.max(grid_min - lp);
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("200 instances ({capped} at the cap), LP never above grid, largest gap {worst_gap:.2e}"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Normalized skyline of anti-correlated data, trimmed to at most `max` points.
fn candidates(n: usize, d: usize, max: usize, seed: u64) -> Dataset {
    let sky = compute_skyline(&gen_anticorrelated(n, d, seed).unwrap()).unwrap();
    let keep: Vec<usize> = (0..sky.len().min(max)).collect();
    normalize(&sky.subset(&keep).unwrap()).unwrap()
}

fn random_finite_class(rng: &mut ChaCha8Rng, d: usize) -> UtilityClass {
    let m = rng.random_range(2..=6usize);
    let vectors = (0..m)
        .map(|_| {
            let mut w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            w[rng.random_range(0..d)] += 0.1;
            UtilityVector::new(w).unwrap()
        })
        .collect();
    UtilityClass::finite(vectors).unwrap()
}

fn deterministic_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e01);
    let mut tightest = f64::INFINITY;
    let mut nontrivial = 0;
    for inst in 0..200u64 {
        let d = rng.random_range(2..=4usize);
        let k = rng.random_range(2..=4usize);
        let c = candidates(rng.random_range(k + 2..=14), d, 12, inst);
        if c.len() < k {
            continue;
        }
        let class = if inst % 2 == 0 { UtilityClass::FullNonnegativeLinear } else { random_finite_class(&mut rng, d) };
        let cfg =
            AnalysisConfig { oracle_budget: Some(1_000_000), subset_budget: 1_000_000, ..AnalysisConfig::default() };
        let rep = analyze(&c, k, &class, &cfg).map_err(|e| format!("instance {inst}: {e}"))?;
        ensure(rep.subset_mode == SubsetMode::Exhaustive, || format!("instance {inst}: subsets were sampled"))?;
        let opt = rep.optimal_value.expect("oracle ran");
        let required = rep.presgreed_bound * opt;
        ensure(rep.greedy_value >= required - 1e-9, || {
            format!(
                "instance {inst}: greedy {} < bound {} x opt {opt} (alpha {}, gamma {})",
                rep.greedy_value, rep.presgreed_bound, rep.alpha_g, rep.gamma_g
            )
        })?;
        if required > 0.0 {
            nontrivial += 1;
            tightest = tightest.min(rep.greedy_value - required);
        }
    }
    Ok(format!("200 instances, zero violations; {nontrivial} with a positive bound, smallest slack {tightest:.3}"))
}

fn sampled_guarantee() -> Outcome {
    let start = Instant::now();
    let c = candidates(400, 4, 50, 2024);
    ensure(c.len() == 50, || format!("only {} candidates", c.len()))?;
    let class = UtilityClass::FullNonnegativeLinear;
    let (k, eps, lambda) = (8, 0.1, 1.1);
    let cfg = AnalysisConfig { subset_budget: 2000, eps, lambda, ..AnalysisConfig::default() };
    let rep = analyze(&c, k, &class, &cfg).map_err(|e| e.to_string())?;
    let bound = stoc_bound(eps, lambda, rep.gamma_g, k).map_err(|e| e.to_string())?;
    let reference = rep.greedy_value;
    let runs: Vec<f64> = (0..200u64)
        .map(|seed| {
            let mut sc = StocConfig::new(eps, lambda, seed);
            sc.track_gains = false;
            stoc_pres_greed_with(&c, k, &class, &sc).map(|r| r.min_happiness)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let n = runs.len() as f64;
    let mean = runs.iter().sum::<f64>() / n;
    let var = runs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let target = bound * reference;
    ensure(mean >= target - 3.0 * se, || format!("mean {mean} < {target} - 3 x {se}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "mean {mean:.4} (se {se:.4}) >= bound {bound:.4} x greedy {reference:.4} = {target:.4}; gamma {:.3}",
        rep.gamma_g
    ))
}

fn speedup() -> Outcome {
    let (d, k) = (6, 30);
    let mut n = 8000;
    let c = loop {
        let sky = compute_skyline(&gen_anticorrelated(n, d, 99).unwrap()).unwrap();
        if sky.len() >= 5000 {
            break normalize(&sky).unwrap();
        }
        n += n / 2;
    };
    let class = UtilityClass::FullNonnegativeLinear;
    let full = pres_greed(&c, k, &class).map_err(|e| e.to_string())?;
    let mut good = 0;
    let mut worst_ratio = 0.0f64;
    let mut worst_diff = f64::NEG_INFINITY;
    for seed in 0..20u64 {
        let mut sc = StocConfig::new(0.1, 1.1, seed);
        sc.track_gains = false;
        let r = stoc_pres_greed_with(&c, k, &class, &sc).map_err(|e| e.to_string())?;
        let ratio = r.trace.lp_evaluations as f64 / full.trace.lp_evaluations as f64;
        let diff = r.max_regret - full.max_regret;
        worst_ratio = worst_ratio.max(ratio);
        worst_diff = worst_diff.max(diff);
        if ratio <= 0.5 && diff <= 0.1 {
            good += 1;
        }
    }
    ensure(good >= 18, || format!("only {good}/20 runs within limits"))?;
    Ok(format!(
        "|C| = {} from n = {n}: {good}/20 runs pass; LP ratio at most {worst_ratio:.3}, regret gap at most {worst_diff:.3}",
        c.len()
    ))
}

fn monotone_k() -> Outcome {
    let c = candidates(600, 4, usize::MAX, 31);
    let class = UtilityClass::FullNonnegativeLinear;
    let mut prev = f64::INFINITY;
    let mut regrets = Vec::new();
    for k in 1..=15 {
        let r = pres_greed(&c, k, &class).map_err(|e| e.to_string())?;
        ensure(r.max_regret <= prev + 1e-12, || format!("k = {k}: regret {} after {prev}", r.max_regret))?;
        prev = r.max_regret;
        regrets.push(r.max_regret);
    }
    Ok(format!("|C| = {}, regret falls from {:.3} to {:.3}", c.len(), regrets[0], regrets[14]))
}

fn sample_sizes() -> Outcome {
    let a = sample_size(10_000, 10, 0.1, 1.1).map_err(|e| e.to_string())?;
    let b = sample_size(10_000, 10, 1.0, 1.0).map_err(|e| e.to_string())?;
    let c = sample_size(10_000, 10, 0.01, 1.01).map_err(|e| e.to_string())?;
    ensure((a, b, c) == (1705, 1, 3922), || format!("got {a}, {b}, {c}"))?;
    // the sampled run on a tiny instance must still make progress
    let (toy, class) = nba_toy();
    let r = stoc_pres_greed(&toy, 3, &class, 1.0, 1.0, 0).map_err(|e| e.to_string())?;
    ensure(r.selected_ids.len() >= 2, || "clamped sample made no progress".into())?;
    Ok(format!("{a}, {b}, {c}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("utility and ratio table", toy_ratio_grid),
        ("preselection greedy walk-through", toy_greedy_walk),
        ("sampled greedy walk-through", toy_sampled_walk),
        ("non-submodular counterexample", non_submodular_instance),
        ("fixed-utility monotone submodularity", fixed_utility_submodularity),
        ("happiness program vs weight grid", lp_versus_grid),
        ("deterministic guarantee end to end", deterministic_guarantee),
        ("sampled guarantee in expectation", sampled_guarantee),
        ("sampling cuts program count", speedup),
        ("regret nonincreasing in k", monotone_k),
        ("sample size formula", sample_sizes),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
