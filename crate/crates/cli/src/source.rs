//! Where candidate points and utility classes come from.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, ValueEnum};
use kregret::data::{gen_anticorrelated, gen_uniform, nba_2009, nba_toy, read_csv, read_utility_class};
use kregret::{compute_skyline, normalize, Dataset, UtilityClass};

#[derive(Args, Clone, Debug)]
#[command(group(ArgGroup::new("data").required(true).args(["input", "builtin", "generate"])))]
pub struct Source {
    /// CSV of points, one per row; a non-numeric first row is treated as a header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// One of the embedded datasets.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Generate in memory: `anti:<n>:<d>[:<seed>]` or `uniform:<n>:<d>[:<seed>]`.
    #[arg(long)]
    pub generate: Option<GenSpec>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Builtin {
    /// Nine normalized players, already a skyline.
    Toy,
    /// The 16-player skyline, raw counts.
    Nba2009,
}

#[derive(Clone, Debug)]
pub struct GenSpec {
    pub anti: bool,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let usage = || format!("expected anti|uniform:<n>:<d>[:<seed>], got {s:?}");
        if !(3..=4).contains(&parts.len()) {
            return Err(usage());
        }
        let anti = match parts[0] {
            "anti" => true,
            "uniform" => false,
            _ => return Err(usage()),
        };
        let n: usize = parts[1].parse().map_err(|_| usage())?;
        let d: usize = parts[2].parse().map_err(|_| usage())?;
        let seed = match parts.get(3) {
            Some(x) => x.parse().map_err(|_| usage())?,
            None => 0,
        };
        if n == 0 || d == 0 {
            return Err("n and d must be positive".into());
        }
        Ok(GenSpec { anti, n, d, seed })
    }
}

pub struct Prepared {
    pub candidates: Dataset,
    pub label: String,
    /// Skyline plus normalization time.
    pub prep_ms: f64,
}

impl Source {
    fn load(&self) -> Result<(Dataset, String)> {
        if let Some(path) = &self.input {
            let data = read_csv(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok((data, path.display().to_string()));
        }
        if let Some(b) = self.builtin {
            return Ok(match b {
                Builtin::Toy => (nba_toy().0, "toy".into()),
                Builtin::Nba2009 => (nba_2009(), "nba2009".into()),
            });
        }
        if let Some(g) = &self.generate {
            let data = if g.anti { gen_anticorrelated(g.n, g.d, g.seed)? } else { gen_uniform(g.n, g.d, g.seed)? };
            let kind = if g.anti { "anti" } else { "uniform" };
            return Ok((data, format!("{kind}:{}:{}:{}", g.n, g.d, g.seed)));
        }
        bail!("no data source given")
    }

    /// Loads the points, keeps the skyline and scales each dimension to max 1.
    /// Data flagged as normalized is left as is.
    pub fn prepare(&self) -> Result<Prepared> {
        let (data, label) = self.load()?;
        let start = Instant::now();
        let sky = compute_skyline(&data)?;
        let candidates = if sky.is_normalized() { sky } else { normalize(&sky)? };
        Ok(Prepared { candidates, label, prep_ms: start.elapsed().as_secs_f64() * 1e3 })
    }
}

#[derive(Clone, Debug)]
pub enum ClassSpec {
    Full,
    Toy,
    File(PathBuf, String),
}

impl FromStr for ClassSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(ClassSpec::Full),
            "toy" => Ok(ClassSpec::Toy),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(ClassSpec::File(PathBuf::from(p), s.to_string())),
                _ => Err(format!("expected full, toy or file:<path>, got {s:?}")),
            },
        }
    }
}

impl ClassSpec {
    pub fn label(&self) -> &str {
        match self {
            ClassSpec::Full => "full",
            ClassSpec::Toy => "toy",
            ClassSpec::File(_, raw) => raw,
        }
    }

    pub fn load(&self) -> Result<UtilityClass> {
        Ok(match self {
            ClassSpec::Full => UtilityClass::FullNonnegativeLinear,
            ClassSpec::Toy => nba_toy().1,
            ClassSpec::File(path, _) => {
                read_utility_class(path).with_context(|| format!("reading utility vectors from {}", path.display()))?
            }
        })
    }
}
