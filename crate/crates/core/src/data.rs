//! Dataset generators, CSV ingestion, and the embedded NBA fixtures.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::types::{Dataset, FiniteClass, Point, UtilityClass, UtilityVector};

const NBA_2009_CSV: &str = include_str!("../fixtures/nba2009_skyline.csv");
const NBA_2009_NAMES: &str = include_str!("../fixtures/nba2009_names.txt");

/// The 16 skyline players of the 2009 regular season on (points, rebounds, steals),
/// raw counts, ids 0..15 in listed order.
pub fn nba_2009() -> Dataset {
    parse_csv(NBA_2009_CSV.as_bytes()).expect("embedded fixture parses")
}

/// Player names for [`nba_2009`], indexed by id.
pub fn nba_2009_names() -> Vec<&'static str> {
    NBA_2009_NAMES.lines().collect()
}

/// The nine-player example: normalized coordinates at two decimals (ids 1..9)
/// and the four-vector utility class.
///
/// The class rounds utilities to two decimals, matching the reference
/// utility and ratio values for this example.
pub fn nba_toy() -> (Dataset, UtilityClass) {
    const ROWS: [[f64; 3]; 9] = [
        [1.00, 0.58, 0.59],
        [0.91, 0.51, 0.66],
        [0.83, 0.34, 0.75],
        [0.77, 0.68, 0.28],
        [0.68, 0.88, 0.42],
        [0.67, 0.37, 0.70],
        [0.66, 0.88, 0.45],
        [0.66, 0.24, 0.76],
        [0.61, 1.00, 0.40],
    ];
    let points = ROWS
        .iter()
        .enumerate()
        .map(|(i, r)| Point::new(i + 1, r.to_vec()).expect("fixture coordinates are valid"))
        .collect();
    let data = Dataset::new(points).expect("fixture is well formed").with_normalized(true);
    let vectors = [[0.9, 0.05, 0.05], [0.05, 0.9, 0.05], [0.05, 0.05, 0.9], [0.33, 0.33, 0.34]]
        .iter()
        .map(|w| UtilityVector::new(w.to_vec()).expect("fixture weights are valid"))
        .collect();
    let class = FiniteClass::new(vectors).expect("nonempty").with_utility_decimals(Some(2));
    (data, UtilityClass::Finite(class))
}

/// Anti-correlated data: each point's coordinate total is drawn near a constant
/// plane, then shuffled across dimensions by random pairwise transfers that keep
/// the total fixed, so being good on one dimension costs on another.
pub fn gen_anticorrelated(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if d < 2 {
        return Err(Error::Domain("anti-correlated data needs d >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let df = d as f64;
    let total = Normal::new(0.5 * df, 0.05 * df).expect("valid normal parameters");
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let t = total.sample(&mut rng).clamp(1e-6, df);
        let mut x = vec![t / df; d];
        for _round in 0..d {
            for j in 0..d {
                let mut l = rng.random_range(0..d - 1);
                if l >= j {
                    l += 1;
                }
                // move h from l to j, keeping both inside [0, 1]
                let lo = (-x[j]).max(x[l] - 1.0);
                let hi = (1.0 - x[j]).min(x[l]);
                if hi > lo {
                    let h = rng.random_range(lo..=hi);
                    x[j] += h;
                    x[l] -= h;
                }
            }
        }
        rows.push(x.into_iter().map(|c| c.clamp(0.0, 1.0)).collect());
    }
    Dataset::from_rows(rows)
}

/// Independent uniform coordinates in [0, 1).
pub fn gen_uniform(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::Domain("n and d must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    Dataset::from_rows(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_csv(File::open(path)?)
}

/// Parses comma-separated numeric rows. A first row that is not entirely
/// numeric is taken as a header. Ids are 0-based data-row indices.
pub fn parse_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(_) => {
                let cell = rec.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or("");
                return Err(Error::Parse { line, message: format!("non-numeric cell {cell:?}") });
            }
        };
        first = false;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::Parse { line, message: format!("expected {w} columns, found {}", values.len()) })
            }
            _ => {}
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Parse { line, message: format!("value {v} is negative or not finite") });
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    Dataset::from_rows(rows)
}

/// Writes coordinates only, one row per point, LF line endings, no header.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut f = File::create(path)?;
    write_csv_to(data, &mut f)
}

pub fn write_csv_to<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for p in data.points() {
        w.write_record(p.coords.iter().map(|c| c.to_string())).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a finite utility class: one weight vector per row, same CSV rules as datasets.
pub fn read_utility_class(path: impl AsRef<Path>) -> Result<UtilityClass> {
    let rows = read_csv(path)?;
    let vectors = rows.points().iter().map(|p| UtilityVector::new(p.coords.clone())).collect::<Result<Vec<_>>>()?;
    UtilityClass::finite(vectors)
}
