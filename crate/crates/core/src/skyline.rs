//! Dominance, skyline filtering, and per-dimension normalization.

use crate::error::{Error, Result};
use crate::types::{Dataset, Point};

/// True iff `p` is at least as good as `q` everywhere and strictly better somewhere.
pub fn dominates(p: &Point, q: &Point) -> Result<bool> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: q.dim() });
    }
    Ok(dominates_unchecked(&p.coords, &q.coords))
}

pub(crate) fn dominates_unchecked(p: &[f64], q: &[f64]) -> bool {
    let mut strict = false;
    for (a, b) in p.iter().zip(q) {
        if a < b {
            return false;
        }
        if a > b {
            strict = true;
        }
    }
    strict
}

/// Points of `data` not dominated by any other point, in input order.
///
/// Block-nested-loop over points sorted by descending coordinate sum: a
/// dominator always has a strictly larger sum, so each point only needs to
/// be checked against the skyline window accumulated before it.
pub fn compute_skyline(data: &Dataset) -> Result<Dataset> {
    if data.is_empty() {
        return Err(Error::Empty("skyline of an empty dataset"));
    }
    let pts = data.points();
    let sums: Vec<f64> = pts.iter().map(|p| p.coords.iter().sum()).collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));

    let mut window: Vec<usize> = Vec::new();
    for &i in &order {
        let q = &pts[i].coords;
        if !window.iter().any(|&w| dominates_unchecked(&pts[w].coords, q)) {
            window.push(i);
        }
    }
    window.sort_unstable();
    data.subset(&window)
}

/// Divides every coordinate by its dimension's maximum. All-zero dimensions stay zero.
pub fn normalize(data: &Dataset) -> Result<Dataset> {
    if data.is_empty() {
        return Err(Error::Empty("normalize of an empty dataset"));
    }
    let d = data.dim();
    let mut maxima = vec![0.0f64; d];
    for p in data.points() {
        for (m, &c) in maxima.iter_mut().zip(&p.coords) {
            *m = m.max(c);
        }
    }
    let points = data
        .points()
        .iter()
        .map(|p| {
            let coords = p.coords.iter().zip(&maxima).map(|(&c, &m)| if m > 0.0 { c / m } else { 0.0 }).collect();
            Point { id: p.id, coords }
        })
        .collect();
    Ok(Dataset::new(points)?.with_normalized(true))
}
