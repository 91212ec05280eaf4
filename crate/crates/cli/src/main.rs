mod bench;
mod source;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kregret::analysis::{analyze, AnalysisConfig, AnalysisReport, SubsetMode, DEFAULT_SUBSET_BUDGET};
use kregret::data::{gen_anticorrelated, gen_uniform, write_csv, write_csv_to};
use kregret::selection::{naive_greedy, pres_greed, stoc_pres_greed_with, StocConfig};
use kregret::{SelectionResult, UtilityClass};
use serde::Serialize;

use crate::source::{ClassSpec, Source};

#[derive(Parser)]
#[command(name = "kregret", version, about = "Select k representative points with small maximum regret")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Gen {
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Kind::Anti)]
        kind: Kind,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run one selection: skyline, normalize, then the chosen algorithm.
    Select {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum, default_value_t = Algo::Presgreed)]
        algo: Algo,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.1)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `full`, `toy`, or `file:<path>` with one weight vector per row.
        #[arg(long, default_value = "full")]
        class: ClassSpec,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a per-step trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sweep algorithms and parameters, one CSV row per cell and repeat.
    Bench(bench::BenchArgs),
    /// Estimate the greedy's submodularity ratio and curvature and evaluate its bounds.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        k: u64,
        #[arg(long, default_value = "full")]
        class: ClassSpec,
        /// Context sets to evaluate before switching to sampling.
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: usize,
        /// Subsets the exhaustive optimum may visit; 0 skips it.
        #[arg(long, default_value_t = 1_000_000)]
        oracle_budget: u128,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.1)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Anti,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Greedy,
    Presgreed,
    Stocpresgreed,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Greedy => "greedy",
            Algo::Presgreed => "presgreed",
            Algo::Stocpresgreed => "stocpresgreed",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

pub fn run_algo(
    algo: Algo,
    c: &kregret::Dataset,
    k: usize,
    class: &UtilityClass,
    eps: f64,
    lambda: f64,
    seed: u64,
) -> kregret::Result<SelectionResult> {
    match algo {
        Algo::Greedy => naive_greedy(c, k, class),
        Algo::Presgreed => pres_greed(c, k, class),
        Algo::Stocpresgreed => {
            let mut cfg = StocConfig::new(eps, lambda, seed);
            cfg.track_gains = false;
            stoc_pres_greed_with(c, k, class, &cfg)
        }
    }
}

pub fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct SelectRow<'a> {
    source: &'a str,
    algo: &'a str,
    k: usize,
    eps: f64,
    lambda: f64,
    seed: u64,
    class: &'a str,
    candidates: usize,
    selected_ids: String,
    min_happiness: f64,
    max_regret: f64,
    lp_count: u64,
    time_ms: f64,
    prep_ms: f64,
    truncated: bool,
}

fn write_trace(path: &PathBuf, header: &str, r: &SelectionResult) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(f, "# {header}")?;
    writeln!(f, "step\tchosen\trestricted\tgain\tevaluated")?;
    let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    for s in &r.trace.steps {
        writeln!(f, "{}\t{}\t{}\t{}\t{}", s.step, s.chosen, show(s.restricted_value), show(s.gain), s.evaluated)?;
    }
    Ok(())
}

/// Flat form of the analysis report for CSV output.
#[derive(Serialize)]
struct AnalysisRow {
    k: usize,
    gamma_g: f64,
    gamma_vacuous: bool,
    alpha_g: f64,
    alpha_vacuous: bool,
    subset_mode: &'static str,
    subsets: Option<usize>,
    presgreed_bound: f64,
    stoc_bound: f64,
    greedy_ids: String,
    greedy_value: f64,
    optimal_value: Option<f64>,
    bound_holds: Option<bool>,
}

impl From<&AnalysisReport> for AnalysisRow {
    fn from(r: &AnalysisReport) -> Self {
        let (subset_mode, subsets) = match r.subset_mode {
            SubsetMode::Exhaustive => ("exhaustive", None),
            SubsetMode::Sampled { count, .. } => ("sampled", Some(count)),
        };
        AnalysisRow {
            k: r.k,
            gamma_g: r.gamma_g,
            gamma_vacuous: r.gamma_vacuous,
            alpha_g: r.alpha_g,
            alpha_vacuous: r.alpha_vacuous,
            subset_mode,
            subsets,
            presgreed_bound: r.presgreed_bound,
            stoc_bound: r.stoc_bound,
            greedy_ids: join_ids(&r.greedy_ids),
            greedy_value: r.greedy_value,
            optimal_value: r.optimal_value,
            bound_holds: r.bound_holds,
        }
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var("KREGRET_WORKERS") {
        let n: usize = v.parse().with_context(|| format!("KREGRET_WORKERS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Gen { n, d, seed, kind, out } => {
            let data = match kind {
                Kind::Anti => gen_anticorrelated(n as usize, d as usize, seed)?,
                Kind::Uniform => gen_uniform(n as usize, d as usize, seed)?,
            };
            match out {
                Some(path) => write_csv(&data, path)?,
                None => write_csv_to(&data, io::stdout().lock())?,
            }
        }
        Command::Select { source, k, algo, eps, lambda, seed, class, out, trace } => {
            let prepared = source.prepare()?;
            let utilities = class.load()?;
            let k = k as usize;
            let r = run_algo(algo, &prepared.candidates, k, &utilities, eps, lambda, seed)?;
            let row = SelectRow {
                source: &prepared.label,
                algo: algo.name(),
                k,
                eps,
                lambda,
                seed,
                class: class.label(),
                candidates: prepared.candidates.len(),
                selected_ids: join_ids(&r.selected_ids),
                min_happiness: r.min_happiness,
                max_regret: r.max_regret,
                lp_count: r.trace.lp_evaluations,
                time_ms: r.trace.elapsed.as_secs_f64() * 1e3,
                prep_ms: prepared.prep_ms,
                truncated: r.truncated,
            };
            let mut w = csv::Writer::from_writer(output(out.as_ref())?);
            w.serialize(&row)?;
            w.flush()?;
            if let Some(path) = trace {
                let header = format!(
                    "source={} algo={} k={k} eps={eps} lambda={lambda} seed={seed} class={}",
                    prepared.label,
                    algo.name(),
                    class.label()
                );
                write_trace(&path, &header, &r)?;
            }
        }
        Command::Bench(args) => bench::run(args)?,
        Command::Analyze { source, k, class, budget, oracle_budget, seed, eps, lambda, format, out } => {
            if !(2..=6).contains(&k) {
                eprintln!("warning: k = {k} is outside [2, 6]; subset enumeration grows as C(|C|, k)");
            }
            if budget == 0 {
                bail!("--budget must be positive");
            }
            let prepared = source.prepare()?;
            let utilities = class.load()?;
            let cfg = AnalysisConfig {
                subset_budget: budget,
                seed,
                eps,
                lambda,
                oracle_budget: (oracle_budget > 0).then_some(oracle_budget),
            };
            let start = Instant::now();
            let report = analyze(&prepared.candidates, k as usize, &utilities, &cfg)?;
            if report.optimal_value.is_none() && oracle_budget > 0 {
                eprintln!("note: exhaustive optimum skipped, more than {oracle_budget} subsets");
            }
            eprintln!("analysis took {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
            let mut w = output(out.as_ref())?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
                Format::Csv => {
                    let mut c = csv::Writer::from_writer(w);
                    c.serialize(AnalysisRow::from(&report))?;
                    c.flush()?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
