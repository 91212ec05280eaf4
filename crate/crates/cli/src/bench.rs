//! Parameter sweeps. Output is long format: one row per (cell, repeat), with
//! failures recorded in the `error` column instead of aborting the sweep.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use crate::source::{ClassSpec, Source};
use crate::{output, run_algo, Algo};

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    source: Source,
    /// Values of k: a comma list whose items are numbers or inclusive ranges `a..b`.
    #[arg(long, default_value = "10")]
    k: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algo::Presgreed, Algo::Stocpresgreed])]
    algos: Vec<Algo>,
    /// Sampling greedy eps values (comma list).
    #[arg(long, value_delimiter = ',', default_values_t = [0.1])]
    eps: Vec<f64>,
    /// Sampling greedy lambda values (comma list).
    #[arg(long, value_delimiter = ',', default_values_t = [1.1])]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Repeat `r` uses seed `seed + r`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "full")]
    class: ClassSpec,
    /// Run cells concurrently. Each cell still runs on its own.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Debug)]
struct Row {
    algo: &'static str,
    k: usize,
    eps: Option<f64>,
    lambda: Option<f64>,
    repeat: usize,
    seed: u64,
    min_happiness: Option<f64>,
    regret: Option<f64>,
    time_ms: Option<f64>,
    lp_count: Option<u64>,
    error: String,
}

#[derive(Clone, Copy)]
struct Cell {
    algo: Algo,
    k: usize,
    params: Option<(f64, f64)>,
    repeat: usize,
    seed: u64,
}

pub fn parse_k_list(spec: &str) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
            if a > b {
                bail!("empty k range {item}");
            }
            ks.extend(a..=b);
        } else {
            ks.push(item.parse()?);
        }
    }
    if ks.is_empty() {
        bail!("no k values in {spec:?}");
    }
    if ks.contains(&0) {
        bail!("k must be at least 1");
    }
    Ok(ks)
}

fn cells(args: &BenchArgs, ks: &[usize]) -> Vec<Cell> {
    let mut out = Vec::new();
    for &algo in &args.algos {
        let grid: Vec<Option<(f64, f64)>> = if algo == Algo::Stocpresgreed {
            args.eps.iter().flat_map(|&e| args.lambda.iter().map(move |&l| Some((e, l)))).collect()
        } else {
            vec![None]
        };
        for &k in ks {
            for &params in &grid {
                for repeat in 0..args.repeats {
                    out.push(Cell { algo, k, params, repeat, seed: args.seed + repeat as u64 });
                }
            }
        }
    }
    out
}

fn run_cell(cell: Cell, data: &kregret::Dataset, class: &kregret::UtilityClass) -> Row {
    let (eps, lambda) = cell.params.unzip();
    let result = run_algo(cell.algo, data, cell.k, class, eps.unwrap_or(0.1), lambda.unwrap_or(1.1), cell.seed);
    let mut row = Row {
        algo: cell.algo.name(),
        k: cell.k,
        eps,
        lambda,
        repeat: cell.repeat,
        seed: cell.seed,
        min_happiness: None,
        regret: None,
        time_ms: None,
        lp_count: None,
        error: String::new(),
    };
    match result {
        Ok(r) => {
            row.min_happiness = Some(r.min_happiness);
            row.regret = Some(r.max_regret);
            row.time_ms = Some(r.trace.elapsed.as_secs_f64() * 1e3);
            row.lp_count = Some(r.trace.lp_evaluations);
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    if args.algos.is_empty() {
        bail!("no algorithms selected");
    }
    let ks = parse_k_list(&args.k)?;
    let prepared = args.source.prepare()?;
    let class = args.class.load()?;
    eprintln!("{}: {} candidates after skyline", prepared.label, prepared.candidates.len());
    let todo = cells(&args, &ks);
    let rows: Vec<Row> = if args.parallel {
        todo.par_iter().map(|&c| run_cell(c, &prepared.candidates, &class)).collect()
    } else {
        todo.iter().map(|&c| run_cell(c, &prepared.candidates, &class)).collect()
    };
    let mut w = csv::Writer::from_writer(output(args.out.as_ref())?);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("5").unwrap(), vec![5]);
        assert_eq!(parse_k_list("1..3, 10").unwrap(), vec![1, 2, 3, 10]);
        assert!(parse_k_list("3..1").is_err());
        assert!(parse_k_list("0,2").is_err());
        assert!(parse_k_list("x").is_err());
        assert!(parse_k_list("").is_err());
    }
}
