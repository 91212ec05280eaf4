//! Representative-subset selection by minimizing the maximum regret ratio
//! over a class of linear utility functions.
//!
//! The pipeline is: load or generate a [`Dataset`], reduce it to its skyline
//! with [`compute_skyline`], [`normalize`] it, then pick `k` points with
//! [`pres_greed`] or [`stoc_pres_greed`]. The [`analysis`] module estimates
//! how far a greedy run can be from the optimum.

pub mod analysis;
pub mod data;
pub mod error;
pub mod happiness;
pub mod lp;
pub mod selection;
pub mod skyline;
pub mod types;

pub use analysis::{analyze, presgreed_bound, stoc_bound, AnalysisConfig, AnalysisReport};
pub use data::{gen_anticorrelated, nba_toy, read_csv, write_csv};
pub use error::{Error, Result};
pub use happiness::{happiness_ratio, marginal_gain, max_regret_ratio, min_happiness, Evaluator};
pub use selection::{naive_greedy, pres_greed, sample_size, stoc_pres_greed, Sampler, StocConfig, UniformSampler};
pub use skyline::{compute_skyline, dominates, normalize};
pub use types::{Dataset, FiniteClass, GreedyTrace, Point, SelectionResult, StepRecord, UtilityClass, UtilityVector};
