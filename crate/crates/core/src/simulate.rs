//! Monte Carlo erasure simulation.
//!
//! Each trial encodes a random message, erases symbols according to the
//! model and runs the chosen repair policy. Trial seeds are drawn up front
//! from the master seed so results do not depend on thread count.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{self, Codeword, ErasurePattern, ReceivedWord};
use crate::construct::LrcCode;
use crate::verify::{binomial, for_each_subset_with_first, EXHAUSTIVE_BUDGET, RNG_NAME};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErasureModel {
    FixedCount { t: usize },
    Bernoulli { rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairPolicy {
    LocalOnly,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub model: ErasureModel,
    pub trials: u64,
    pub seed: u64,
    pub policy: RepairPolicy,
    /// Enumerate every fixed-count pattern (on one random codeword) instead
    /// of sampling; `trials` is then ignored.
    pub exhaustive: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("erasure probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("cannot erase {t} of {n} symbols")]
    TooManyErasures { t: usize, n: usize },
    #[error("exhaustive enumeration needs a fixed erasure count")]
    ExhaustiveNeedsFixedCount,
    #[error("exhaustive enumeration of {needed} patterns exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

impl SimulationConfig {
    pub fn validate(&self, n: usize) -> Result<(), SimulationError> {
        match self.model {
            ErasureModel::FixedCount { t } if t > n => {
                return Err(SimulationError::TooManyErasures { t, n })
            }
            ErasureModel::Bernoulli { rho } if !(0.0..=1.0).contains(&rho) => {
                return Err(SimulationError::BadProbability(rho))
            }
            _ => {}
        }
        if self.exhaustive {
            let ErasureModel::FixedCount { t } = self.model else {
                return Err(SimulationError::ExhaustiveNeedsFixedCount);
            };
            let needed = binomial(n, t);
            if needed > EXHAUSTIVE_BUDGET {
                return Err(SimulationError::BudgetExceeded {
                    needed,
                    budget: EXHAUSTIVE_BUDGET,
                });
            }
        } else if self.trials == 0 {
            return Err(SimulationError::NoTrials);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationStats {
    pub config: SimulationConfig,
    pub rng: &'static str,
    pub trials: u64,
    /// Trials in which local repair alone restored every erasure.
    pub local_successes: u64,
    /// Trials ending with the original codeword.
    pub recoveries: u64,
    pub erased_symbols: u64,
    pub repaired_symbols: u64,
    /// Symbols read over recovered trials.
    pub symbols_read: u64,
    /// `cell_histogram[e]` counts recovery cells holding `e` erasures.
    pub cell_histogram: Vec<u64>,
    /// Lowest-index trial that was not recovered, with its pattern.
    pub first_failure: Option<(u64, Vec<usize>)>,
}

#[derive(Debug, Clone, Default)]
struct TrialResult {
    erased: usize,
    local_complete: bool,
    recovered: bool,
    repaired: usize,
    reads: usize,
    cells: Vec<u64>,
}

fn run_trial(
    code: &LrcCode,
    policy: RepairPolicy,
    codeword: &Codeword,
    pattern: &ErasurePattern,
) -> TrialResult {
    let domain = code.domain();
    let mut cells = vec![0u64; domain.cell_size() + 1];
    for range in domain.cells() {
        let e = range
            .filter(|p| pattern.positions().binary_search(p).is_ok())
            .count();
        cells[e] += 1;
    }
    let received = ReceivedWord::erased(codeword, pattern);
    let (local_complete, local_reads) = local_fixed_point(code, &received);
    let mut result = TrialResult {
        erased: pattern.len(),
        local_complete: local_complete.is_some(),
        cells,
        ..Default::default()
    };
    match policy {
        RepairPolicy::LocalOnly => {
            if let Some(word) = local_complete {
                result.recovered = &word == codeword;
                result.repaired = pattern.len();
                result.reads = local_reads;
            }
        }
        RepairPolicy::Hybrid => {
            if let Ok(out) = codec::hybrid_decode(code, &received) {
                if &out.codeword == codeword {
                    result.recovered = true;
                    result.repaired = pattern.len();
                    result.reads = out.symbols_read();
                }
            }
        }
    }
    result
}

/// Repeated single-erasure cell repair; `Some` if it fills every erasure.
fn local_fixed_point(code: &LrcCode, received: &ReceivedWord) -> (Option<Codeword>, usize) {
    let mut word = received.clone();
    let mut reads = 0;
    loop {
        let mut progressed = false;
        for cell in code.domain().cells() {
            let missing: Vec<usize> = cell.filter(|&p| word.symbols()[p].is_none()).collect();
            if let [only] = missing[..] {
                let Ok(fix) = codec::local_repair(code, &word, only) else {
                    return (None, reads);
                };
                reads += fix.reads.len();
                word.fill(only, fix.value);
                progressed = true;
            }
        }
        if !progressed {
            return (word.complete(), reads);
        }
    }
}

fn draw_pattern<R: Rng>(model: ErasureModel, n: usize, rng: &mut R) -> ErasurePattern {
    match model {
        ErasureModel::FixedCount { t } => ErasurePattern::new(sample(rng, n, t).into_vec()),
        ErasureModel::Bernoulli { rho } => {
            ErasurePattern::new((0..n).filter(|_| rng.random_bool(rho)).collect())
        }
    }
}

pub fn simulate(
    code: &LrcCode,
    config: &SimulationConfig,
) -> Result<SimulationStats, SimulationError> {
    let n = code.n();
    config.validate(n)?;
    let field = code.field();
    let mut master = Pcg64::seed_from_u64(config.seed);

    let results: Vec<(TrialResult, Vec<usize>)> = if config.exhaustive {
        let ErasureModel::FixedCount { t } = config.model else {
            unreachable!("validated");
        };
        let msg = codec::random_message(field, code.k(), &mut master);
        let cw = codec::encode(field, code.generator(), &msg).expect("message length k");
        let mut patterns = Vec::new();
        if t == 0 {
            patterns.push(Vec::new());
        } else {
            for first in 0..n {
                for_each_subset_with_first(n, t, first, |s| {
                    patterns.push(s.to_vec());
                    true
                });
            }
        }
        patterns
            .into_par_iter()
            .map(|p| {
                let pattern = ErasurePattern::new(p.clone());
                (run_trial(code, config.policy, &cw, &pattern), p)
            })
            .collect()
    } else {
        let seeds: Vec<u64> = (0..config.trials).map(|_| master.random()).collect();
        seeds
            .into_par_iter()
            .map(|s| {
                let mut rng = Pcg64::seed_from_u64(s);
                let msg = codec::random_message(field, code.k(), &mut rng);
                let cw = codec::encode(field, code.generator(), &msg).expect("message length k");
                let pattern = draw_pattern(config.model, n, &mut rng);
                let p = pattern.positions().to_vec();
                (run_trial(code, config.policy, &cw, &pattern), p)
            })
            .collect()
    };

    let trials = results.len() as u64;
    let mut stats = SimulationStats {
        config: config.clone(),
        rng: RNG_NAME,
        trials,
        local_successes: 0,
        recoveries: 0,
        erased_symbols: 0,
        repaired_symbols: 0,
        symbols_read: 0,
        cell_histogram: vec![0; code.domain().cell_size() + 1],
        first_failure: None,
    };
    for (i, (r, pattern)) in results.into_iter().enumerate() {
        stats.erased_symbols += r.erased as u64;
        stats.local_successes += r.local_complete as u64;
        if r.recovered {
            stats.recoveries += 1;
            stats.repaired_symbols += r.repaired as u64;
            stats.symbols_read += r.reads as u64;
        } else if stats.first_failure.is_none() {
            stats.first_failure = Some((i as u64, pattern));
        }
        for (h, c) in stats.cell_histogram.iter_mut().zip(&r.cells) {
            *h += c;
        }
    }
    Ok(stats)
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

// Rates are derived on demand; the serialized stats hold exact counts only.
impl SimulationStats {
    pub fn local_success_rate(&self) -> f64 {
        ratio(self.local_successes, self.trials)
    }

    pub fn recovery_rate(&self) -> f64 {
        ratio(self.recoveries, self.trials)
    }

    pub fn mean_reads_per_repaired_symbol(&self) -> f64 {
        ratio(self.symbols_read, self.repaired_symbols)
    }
}
