//! Monte Carlo probability estimation over translated models.
//!
//! Each trial draws an independent substream from (seed, trial index), so
//! runs are reproducible and shard merges are order-independent sums of
//! counts.

use super::{sample_input, Event, SemanticsError};
use crate::reparam::{TableEntry, TranslationTable};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub hits: u64,
    pub trials: u64,
}

impl McEstimate {
    fn from_counts(hits: u64, trials: u64) -> McEstimate {
        let n = trials.max(1) as f64;
        let p = hits as f64 / n;
        McEstimate {
            estimate: p,
            standard_error: (p * (1.0 - p) / n).sqrt(),
            hits,
            trials,
        }
    }
}

/// Estimate the probability of an event under a translated model's measure
/// by i.i.d. evaluation of the pure function on sampled inputs.
pub fn mc_probability(
    entry: &TableEntry,
    table: &TranslationTable,
    event: &Event,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, SemanticsError> {
    let mut hits = 0u64;
    for trial in 0..trials {
        let mut rng = CounterRng::new(seed, trial);
        let drawn = sample_input(entry, table, &mut rng, false)?;
        let out = super::eval_pure(&entry.pure_fn, &drawn.vector)?;
        if event.eval(&out)? {
            hits += 1;
        }
    }
    Ok(McEstimate::from_counts(hits, trials))
}
