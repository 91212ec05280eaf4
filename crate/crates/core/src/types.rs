//! Shared domain types: points, datasets, utility vectors and classes, and
//! the result records produced by the selection algorithms.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A d-dimensional point with nonnegative coordinates and a stable id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: usize,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(id: usize, coords: Vec<f64>) -> Result<Self> {
        if let Some(&value) = coords.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidCoordinate { id, value });
        }
        Ok(Point { id, coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }
}

/// An ordered collection of points sharing one dimensionality.
///
/// Ids are unique; lookups by id go through an index built at construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<Point>,
    dim: usize,
    normalized: bool,
    index: HashMap<usize, usize>,
}

impl Dataset {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().ok_or(Error::Empty("dataset has no points"))?.dim();
        if dim == 0 {
            return Err(Error::Empty("points have zero dimensions"));
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if index.insert(p.id, i).is_some() {
                return Err(Error::DuplicateId(p.id));
            }
        }
        Ok(Dataset { points, dim, normalized: false, index })
    }

    /// Builds a dataset from raw rows, assigning ids by row order (0-based).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let points =
            rows.into_iter().enumerate().map(|(id, coords)| Point::new(id, coords)).collect::<Result<Vec<_>>>()?;
        Dataset::new(points)
    }

    pub(crate) fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn ids(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.id).collect()
    }

    /// Position of the point with `id` in [`Dataset::points`].
    pub fn position(&self, id: usize) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn get(&self, id: usize) -> Option<&Point> {
        self.position(id).map(|i| &self.points[i])
    }

    /// Resolves a list of ids into positions, rejecting unknown and repeated ids.
    pub fn positions(&self, ids: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for &id in ids {
            let pos = self.position(id).ok_or(Error::UnknownId(id))?;
            if out.contains(&pos) {
                return Err(Error::DuplicateId(id));
            }
            out.push(pos);
        }
        Ok(out)
    }

    /// A new dataset holding the points at `positions`, in that order.
    pub fn subset(&self, positions: &[usize]) -> Result<Dataset> {
        let points = positions.iter().map(|&i| self.points[i].clone()).collect();
        Ok(Dataset::new(points)?.with_normalized(self.normalized))
    }
}

/// Weights of a nonnegative linear utility function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityVector {
    weights: Vec<f64>,
}

impl UtilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidUtility(format!("negative or non-finite weight in {weights:?}")));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidUtility("all weights are zero".into()));
        }
        Ok(UtilityVector { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Utility of `p` under `u`: the dot product of weights and coordinates.
pub fn utility(u: &UtilityVector, p: &Point) -> Result<f64> {
    if u.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: p.dim() });
    }
    Ok(dot(u.weights(), &p.coords))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A finite list of utility vectors.
///
/// `utility_decimals` rounds every utility (half away from zero) before any
/// ratio is formed. It exists to reproduce reference values computed from
/// utilities kept at fixed precision; leave it `None` for ordinary use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteClass {
    vectors: Vec<UtilityVector>,
    utility_decimals: Option<u32>,
}

impl FiniteClass {
    pub fn new(vectors: Vec<UtilityVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty("finite utility class has no vectors"));
        }
        let d = vectors[0].dim();
        if let Some(v) = vectors.iter().find(|v| v.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
        }
        Ok(FiniteClass { vectors, utility_decimals: None })
    }

    pub fn with_utility_decimals(mut self, decimals: Option<u32>) -> Self {
        self.utility_decimals = decimals;
        self
    }

    pub fn vectors(&self) -> &[UtilityVector] {
        &self.vectors
    }

    pub fn utility_decimals(&self) -> Option<u32> {
        self.utility_decimals
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    /// Utility of `p` under vector `j`, with the class's rounding applied.
    pub fn eval(&self, j: usize, p: &Point) -> f64 {
        let raw = dot(self.vectors[j].weights(), &p.coords);
        match self.utility_decimals {
            Some(dec) => round_half_up(raw, dec),
            None => raw,
        }
    }
}

fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    // nudge so that values like 0.665 stored as 0.66499999... round up
    ((x * scale) * (1.0 + 1e-12) + 1e-9).round() / scale
}

/// The class of utility functions a query is answered against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UtilityClass {
    Finite(FiniteClass),
    /// Every nonnegative linear utility function; evaluated by linear programming.
    FullNonnegativeLinear,
}

impl UtilityClass {
    pub fn finite(vectors: Vec<UtilityVector>) -> Result<Self> {
        Ok(UtilityClass::Finite(FiniteClass::new(vectors)?))
    }

    pub fn is_full(&self) -> bool {
        matches!(self, UtilityClass::FullNonnegativeLinear)
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            UtilityClass::Finite(f) if f.dim() != d => Err(Error::DimensionMismatch { expected: d, got: f.dim() }),
            _ => Ok(()),
        }
    }
}

/// One greedy step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    pub chosen: usize,
    /// Winning restricted happiness value h*; `None` for the preselected point.
    pub restricted_value: Option<f64>,
    /// Marginal gain of the chosen point, when it was tracked.
    pub gain: Option<f64>,
    /// Number of candidates evaluated at this step.
    pub evaluated: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub steps: Vec<StepRecord>,
    /// Linear programs solved during selection (evaluation of the final set excluded).
    pub lp_evaluations: u64,
    pub elapsed: Duration,
}

impl GreedyTrace {
    /// Chosen ids in selection order.
    pub fn chosen(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.chosen).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected_ids: Vec<usize>,
    pub trace: GreedyTrace,
    pub min_happiness: f64,
    pub max_regret: f64,
    /// Set when k exceeded the candidate count and every candidate was returned.
    pub truncated: bool,
}
