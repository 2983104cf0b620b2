//! Machine checks for distance, locality, the four-point rank lemma and the
//! parameter bounds.
//!
//! Distance is certified through the parity-check matrix: `d >= w` iff every
//! `w - 1` columns of `H` are linearly independent. Exhaustive searches walk
//! subsets in lexicographic order and always report the lexicographically
//! first failure, even when the work is split across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::codec::{self, ErasurePattern, ReceivedWord};
use crate::construct::{CodeParams, LrcCode};
use crate::field::{Fe, Field};
use crate::matrix::{linear_dependency, rank_of_vectors, Matrix};

/// Name of the seeded generator used by every sampled check and simulation.
pub const RNG_NAME: &str = "pcg64 (PCG XSL-RR 128/64, rand_pcg::Pcg64, seed_from_u64)";

/// Upper limit on subsets an exhaustive search may enumerate.
pub const EXHAUSTIVE_BUDGET: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("search needs {needed} subset checks, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("points are not distinct")]
    NotDistinct,
    #[error("point ({0}, {1}) is not in F_q* x F_q*")]
    NotInDomain(Fe, Fe),
    #[error("weight {w} exceeds n - k + 1 = {max}")]
    WeightTooLarge { w: usize, max: usize },
    #[error("equivalence does not apply: d - 2 = {d_minus_2} ≡ r = {r} (mod r + 1)")]
    ConditionViolated { d_minus_2: usize, r: usize },
    #[error("(r+1) = {cell} does not divide n = {n}")]
    NotDivisible { cell: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Linearly dependent parity-check columns and the dependency.
    DependentColumns {
        columns: Vec<usize>,
        coefficients: Vec<usize>,
    },
    /// A nonzero codeword, symbols as field indices.
    Codeword {
        weight: usize,
        support: Vec<usize>,
        symbols: Vec<usize>,
    },
    /// Four points whose lemma matrix is rank deficient.
    Points {
        points: Vec<[usize; 2]>,
        rank: usize,
        case: BetaPattern,
        coefficients: Vec<usize>,
    },
    Position {
        position: usize,
        detail: String,
    },
    /// Parity row and generator row whose inner product is nonzero.
    RowPair {
        parity_row: usize,
        generator_row: usize,
    },
    /// No object of the requested kind exists within the searched range.
    Exhausted {
        searched_weights: usize,
        subsets: u64,
    },
    Values {
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub mode: ModeTag,
    pub trials: u64,
    pub result: Outcome,
    pub witness: Option<Witness>,
    pub seed: Option<u64>,
    pub millis: Option<u64>,
    pub details: BTreeMap<String, Value>,
}

impl VerificationReport {
    fn new(claim: impl Into<String>, mode: SearchMode, trials: u64) -> Self {
        let (mode, seed) = match mode {
            SearchMode::Exhaustive => (ModeTag::Exhaustive, None),
            SearchMode::Sampled { seed, .. } => (ModeTag::Sampled, Some(seed)),
        };
        VerificationReport {
            claim: claim.into(),
            mode,
            trials,
            result: Outcome::Pass,
            witness: None,
            seed,
            millis: None,
            details: BTreeMap::new(),
        }
    }

    fn fail(mut self, witness: Witness) -> Self {
        self.result = Outcome::Fail;
        self.witness = Some(witness);
        self
    }

    /// Keeps an informational witness on a passing report.
    fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    fn detail(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    fn timed(mut self, start: Instant) -> Self {
        self.millis = Some(start.elapsed().as_millis() as u64);
        self
    }

    pub fn passed(&self) -> bool {
        self.result == Outcome::Pass
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let result = match self.result {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
        };
        let mode = match (self.mode, self.seed) {
            (ModeTag::Exhaustive, _) => "exhaustive".to_string(),
            (ModeTag::Sampled, Some(seed)) => format!("sampled, seed {seed}"),
            (ModeTag::Sampled, None) => "sampled".to_string(),
        };
        write!(
            f,
            "[{result}] {} ({mode}, {} checks",
            self.claim, self.trials
        )?;
        if let Some(ms) = self.millis {
            write!(f, ", {ms} ms")?;
        }
        writeln!(f, ")")?;
        for (k, v) in &self.details {
            writeln!(f, "    {k}: {v}")?;
        }
        if let Some(w) = &self.witness {
            writeln!(
                f,
                "    witness: {}",
                serde_json::to_string(w).unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Visits every `k`-subset of `0..n` whose smallest element is `first`, in
/// lexicographic order, until `visit` returns `false`.
pub(crate) fn for_each_subset_with_first(
    n: usize,
    k: usize,
    first: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    if k == 0 {
        visit(&[]);
        return;
    }
    if first + k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).map(|i| first + i).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        // advance positions 1..k, leaving idx[0] fixed
        let mut i = k;
        loop {
            if i == 1 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `(failures, first failing subset)` over all `k`-subsets of `0..n`, in
/// parallel over the first element.
fn scan_subsets<F>(n: usize, k: usize, stop_at_first: bool, is_bad: F) -> (u64, Option<Vec<usize>>)
where
    F: Fn(&[usize]) -> bool + Sync,
{
    if k == 0 {
        return if is_bad(&[]) {
            (1, Some(Vec::new()))
        } else {
            (0, None)
        };
    }
    (0..n)
        .into_par_iter()
        .map(|first| {
            let mut count = 0u64;
            let mut witness = None;
            for_each_subset_with_first(n, k, first, |s| {
                if is_bad(s) {
                    count += 1;
                    if witness.is_none() {
                        witness = Some(s.to_vec());
                    }
                    if stop_at_first {
                        return false;
                    }
                }
                true
            });
            (count, witness)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, None), |(c, w), (c2, w2)| (c + c2, w.or(w2)))
}

fn sampled_subsets(n: usize, k: usize, trials: u64, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = Pcg64::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

fn column_refs<'a>(columns: &'a [Vec<Fe>], subset: &[usize]) -> Vec<&'a [Fe]> {
    subset.iter().map(|&c| columns[c].as_slice()).collect()
}

fn indices(v: &[Fe]) -> Vec<usize> {
    v.iter().map(|x| x.index()).collect()
}

/// Checks that every `w - 1` columns of `h` are independent, i.e. `d >= w`.
pub fn verify_distance_at_least(
    field: &Field,
    h: &Matrix,
    w: usize,
    mode: SearchMode,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let n = h.cols();
    let max = h.rows() + 1;
    if w > max {
        return Err(VerifyError::WeightTooLarge { w, max });
    }
    let size = w.saturating_sub(1);
    let columns = h.columns();
    let is_dependent = |s: &[usize]| rank_of_vectors(field, &column_refs(&columns, s)) < s.len();
    let claim = format!("minimum distance >= {w}");

    let (report, failures, witness) = match mode {
        SearchMode::Exhaustive => {
            let needed = binomial(n, size);
            if needed > EXHAUSTIVE_BUDGET {
                return Err(VerifyError::BudgetExceeded {
                    needed,
                    budget: EXHAUSTIVE_BUDGET,
                });
            }
            let (failures, witness) = scan_subsets(n, size, false, is_dependent);
            (
                VerificationReport::new(claim, mode, needed as u64),
                failures,
                witness,
            )
        }
        SearchMode::Sampled { trials, seed } => {
            let subsets = if size == 0 {
                Vec::new()
            } else {
                sampled_subsets(n, size, trials, seed)
            };
            let flags: Vec<bool> = subsets.par_iter().map(|s| is_dependent(s)).collect();
            let failures = flags.iter().filter(|&&b| b).count() as u64;
            let witness = flags.iter().position(|&b| b).map(|i| subsets[i].clone());
            (
                VerificationReport::new(claim, mode, trials),
                failures,
                witness,
            )
        }
    };
    let report = report
        .detail("subset_size", json!(size))
        .detail("dependent_subsets", json!(failures));
    let report = match witness {
        None => report,
        Some(columns_hit) => {
            let coefficients = linear_dependency(field, &column_refs(&columns, &columns_hit))
                .map(|d| indices(&d))
                .unwrap_or_default();
            report.fail(Witness::DependentColumns {
                columns: columns_hit,
                coefficients,
            })
        }
    };
    Ok(report.timed(start))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinWeightSearch {
    /// Smallest weight of a nonzero codeword, if one exists within the cap.
    pub weight: Option<usize>,
    pub codeword: Option<codec::Codeword>,
    /// Dependency checks performed.
    pub checked: u64,
    pub w_cap: usize,
    pub millis: u64,
}

/// Lexicographically first minimum-weight codeword of weight `<= w_cap`,
/// found as a minimal dependent set of parity-check columns.
pub fn find_min_weight_codeword(
    field: &Field,
    h: &Matrix,
    w_cap: usize,
) -> Result<MinWeightSearch, VerifyError> {
    let start = Instant::now();
    let n = h.cols();
    let needed: u128 = (1..=w_cap.min(n)).map(|w| binomial(n, w)).sum();
    if needed > EXHAUSTIVE_BUDGET {
        return Err(VerifyError::BudgetExceeded {
            needed,
            budget: EXHAUSTIVE_BUDGET,
        });
    }
    let columns = h.columns();
    let mut checked = 0u64;
    for w in 1..=w_cap.min(n) {
        let dependent = |s: &[usize]| rank_of_vectors(field, &column_refs(&columns, s)) < s.len();
        let (_, first) = scan_subsets(n, w, true, dependent);
        match first {
            None => checked += binomial(n, w) as u64,
            Some(subset) => {
                // Lexicographic rank of the witness bounds the work done at this weight.
                checked += lex_rank(n, &subset) + 1;
                let coeffs = linear_dependency(field, &column_refs(&columns, &subset))
                    .expect("subset is dependent");
                let mut symbols = vec![Fe::ZERO; n];
                for (&c, &a) in subset.iter().zip(&coeffs) {
                    symbols[c] = a;
                }
                let cw = codec::Codeword(symbols);
                return Ok(MinWeightSearch {
                    weight: Some(cw.weight()),
                    codeword: Some(cw),
                    checked,
                    w_cap,
                    millis: start.elapsed().as_millis() as u64,
                });
            }
        }
    }
    Ok(MinWeightSearch {
        weight: None,
        codeword: None,
        checked,
        w_cap,
        millis: start.elapsed().as_millis() as u64,
    })
}

/// Number of `k`-subsets lexicographically before `subset`.
fn lex_rank(n: usize, subset: &[usize]) -> u64 {
    let k = subset.len();
    let mut rank = 0u128;
    let mut prev = 0usize;
    for (i, &s) in subset.iter().enumerate() {
        for v in prev..s {
            rank += binomial(n - v - 1, k - i - 1);
        }
        prev = s + 1;
    }
    rank as u64
}

/// Checks that `H` is a parity-check matrix for `G`: `H·Gᵀ = 0` and
/// `rank H = n - k`. Catches matrices edited after generation.
pub fn verify_parity_consistency(code: &LrcCode) -> VerificationReport {
    let start = Instant::now();
    let field = code.field();
    let g = &code.generator().0;
    let h = &code.parity().0;
    let product = h.mul(field, &g.transpose());
    let rank = h.rank(field);
    let mut report = VerificationReport::new(
        "parity-check matrix annihilates the generator",
        SearchMode::Exhaustive,
        (h.rows() * g.rows()) as u64,
    )
    .detail("parity_rank", json!(rank));
    let bad = (0..product.rows())
        .flat_map(|i| (0..product.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| !product.get(i, j).is_zero());
    if let Some((parity_row, generator_row)) = bad {
        report = report.fail(Witness::RowPair {
            parity_row,
            generator_row,
        });
    } else if rank != code.n() - code.k() {
        report = report.fail(Witness::Values {
            detail: format!("rank {rank}, expected {}", code.n() - code.k()),
        });
    }
    report.timed(start)
}

/// Report for "the minimum distance is exactly `d`".
pub fn exact_distance_report(search: &MinWeightSearch, d: usize) -> VerificationReport {
    let mut report = VerificationReport::new(
        format!("minimum distance = {d}"),
        SearchMode::Exhaustive,
        search.checked,
    )
    .detail("w_cap", json!(search.w_cap))
    .detail("min_weight_found", json!(search.weight));
    let witness = match &search.codeword {
        Some(cw) => Witness::Codeword {
            weight: cw.weight(),
            support: cw.support(),
            symbols: indices(cw.symbols()),
        },
        None => Witness::Exhausted {
            searched_weights: search.w_cap,
            subsets: search.checked,
        },
    };
    if search.weight == Some(d) {
        report = report.with_witness(witness);
    } else {
        report = report.fail(witness);
    }
    report.millis = Some(search.millis);
    report
}

/// Which β-coincidence case of the rank lemma four points fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPattern {
    AllEqual,
    AllDistinct,
    ThreeEqual,
    OnePair,
    TwoPairs,
}

impl BetaPattern {
    pub const ALL: [BetaPattern; 5] = [
        BetaPattern::AllEqual,
        BetaPattern::AllDistinct,
        BetaPattern::ThreeEqual,
        BetaPattern::OnePair,
        BetaPattern::TwoPairs,
    ];

    pub fn classify(points: &[(Fe, Fe); 4]) -> BetaPattern {
        let mut counts: BTreeMap<Fe, usize> = BTreeMap::new();
        for &(_, b) in points {
            *counts.entry(b).or_default() += 1;
        }
        let mut shape: Vec<usize> = counts.into_values().collect();
        shape.sort_unstable_by(|a, b| b.cmp(a));
        match shape[..] {
            [4] => BetaPattern::AllEqual,
            [1, 1, 1, 1] => BetaPattern::AllDistinct,
            [3, 1] => BetaPattern::ThreeEqual,
            [2, 1, 1] => BetaPattern::OnePair,
            _ => BetaPattern::TwoPairs,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BetaPattern::AllEqual => "all_equal",
            BetaPattern::AllDistinct => "all_distinct",
            BetaPattern::ThreeEqual => "three_equal",
            BetaPattern::OnePair => "one_pair",
            BetaPattern::TwoPairs => "two_pairs",
        }
    }
}

/// The 7×4 matrix with rows `1, αβ, α²β, α³β, αβ², αβ³, αβ⁴` evaluated at
/// four points.
pub fn lemma_matrix(field: &Field, points: &[(Fe, Fe); 4]) -> Matrix {
    const EXPONENTS: [(u64, u64); 7] = [(0, 0), (1, 1), (2, 1), (3, 1), (1, 2), (1, 3), (1, 4)];
    let mut m = Matrix::zeros(7, 4);
    for (r, &(ea, eb)) in EXPONENTS.iter().enumerate() {
        for (c, &(a, b)) in points.iter().enumerate() {
            m.set(r, c, field.mul(field.powu(a, ea), field.powu(b, eb)));
        }
    }
    m
}

fn check_points(field: &Field, points: &[(Fe, Fe); 4]) -> Result<(), VerifyError> {
    for &(a, b) in points {
        if a.is_zero() || b.is_zero() || a.index() >= field.q() || b.index() >= field.q() {
            return Err(VerifyError::NotInDomain(a, b));
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if points[i] == points[j] {
                return Err(VerifyError::NotDistinct);
            }
        }
    }
    Ok(())
}

/// Rank of the lemma matrix at four distinct points of V.
pub fn check_lemma_matrix(field: &Field, points: &[(Fe, Fe); 4]) -> Result<usize, VerifyError> {
    check_points(field, points)?;
    Ok(lemma_matrix(field, points).rank(field))
}

/// All points of V ordered by `(α, β)` index.
pub fn grid_points(field: &Field) -> Vec<(Fe, Fe)> {
    field
        .units()
        .flat_map(|a| field.units().map(move |b| (a, b)))
        .collect()
}

/// Checks the lemma on every (or a sample of) 4-subsets of V, binned by
/// β-pattern.
pub fn verify_lemma_exhaustive(
    field: &Field,
    mode: SearchMode,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let grid = grid_points(field);
    let v = grid.len();
    let subsets: Vec<Vec<usize>> = match mode {
        SearchMode::Exhaustive => {
            let needed = binomial(v, 4);
            if needed > EXHAUSTIVE_BUDGET {
                return Err(VerifyError::BudgetExceeded {
                    needed,
                    budget: EXHAUSTIVE_BUDGET,
                });
            }
            let mut all = Vec::with_capacity(needed as usize);
            for first in 0..v {
                for_each_subset_with_first(v, 4, first, |s| {
                    all.push(s.to_vec());
                    true
                });
            }
            all
        }
        SearchMode::Sampled { trials, seed } => sampled_subsets(v, 4, trials, seed),
    };
    let results: Vec<(BetaPattern, usize)> = subsets
        .par_iter()
        .map(|s| {
            let pts = [grid[s[0]], grid[s[1]], grid[s[2]], grid[s[3]]];
            (
                BetaPattern::classify(&pts),
                lemma_matrix(field, &pts).rank(field),
            )
        })
        .collect();

    let mut per_case: BTreeMap<&str, (u64, u64)> = BetaPattern::ALL
        .iter()
        .map(|p| (p.name(), (0, 0)))
        .collect();
    let mut first_fail = None;
    for (i, &(case, rank)) in results.iter().enumerate() {
        let entry = per_case.get_mut(case.name()).expect("all cases present");
        entry.0 += 1;
        if rank < 4 {
            entry.1 += 1;
            first_fail.get_or_insert(i);
        }
    }
    let failures: u64 = per_case.values().map(|c| c.1).sum();
    let trials = subsets.len() as u64;
    let mut report = VerificationReport::new(
        "lemma matrix has rank 4 at any 4 distinct points",
        mode,
        trials,
    )
    .detail(
        "case_counts",
        json!(per_case
            .iter()
            .map(|(k, v)| (k.to_string(), v.0))
            .collect::<BTreeMap<_, _>>()),
    )
    .detail(
        "case_failures",
        json!(per_case
            .iter()
            .map(|(k, v)| (k.to_string(), v.1))
            .collect::<BTreeMap<_, _>>()),
    )
    .detail("rank_deficient_subsets", json!(failures));
    if let Some(i) = first_fail {
        let s = &subsets[i];
        let pts = [grid[s[0]], grid[s[1]], grid[s[2]], grid[s[3]]];
        let m = lemma_matrix(field, &pts);
        let cols = m.columns();
        let coefficients = linear_dependency(
            field,
            &cols.iter().map(|c| c.as_slice()).collect::<Vec<_>>(),
        )
        .map(|d| indices(&d))
        .unwrap_or_default();
        report = report.fail(Witness::Points {
            points: pts.iter().map(|&(a, b)| [a.index(), b.index()]).collect(),
            rank: results[i].1,
            case: results[i].0,
            coefficients,
        });
    }
    Ok(report.timed(start))
}

/// Each position is determined by the rest of its recovery set: algebraically
/// (the cell's dual vector is nonzero there) and behaviourally (erase,
/// repair, compare on random codewords).
pub fn verify_locality(code: &LrcCode, trials: u64, seed: u64) -> VerificationReport {
    let start = Instant::now();
    let field = code.field();
    let domain = code.domain();
    let g = &code.generator().0;
    let mut algebraic_fail = None;
    for cell in 0..domain.cell_count() {
        let v = code.local_parity(cell);
        let range = domain.cell(cell);
        let cols: Vec<usize> = range.clone().collect();
        let restricted = g.select_columns(&cols);
        let annihilates = restricted.mul_vec(field, v).iter().all(|x| x.is_zero());
        for (s, pos) in range.enumerate() {
            if (!annihilates || v[s].is_zero()) && algebraic_fail.is_none() {
                algebraic_fail = Some(pos);
            }
        }
    }

    let mut rng = Pcg64::seed_from_u64(seed);
    let mut behavioural_fail: Option<(usize, String)> = None;
    let mut repairs = 0u64;
    let mut max_reads = 0usize;
    'outer: for _ in 0..trials {
        let msg = codec::random_message(field, code.k(), &mut rng);
        let cw = codec::encode(field, code.generator(), &msg).expect("message length k");
        for pos in 0..code.n() {
            let w = ReceivedWord::erased(&cw, &ErasurePattern::new(vec![pos]));
            let store = codec::CountingStore::new(&w);
            let outcome = codec::local_repair(code, &store, pos);
            repairs += 1;
            max_reads = max_reads.max(store.read_count());
            let problem = match outcome {
                Ok(fix) if fix.value != cw.symbols()[pos] => {
                    Some("repaired value differs".to_string())
                }
                Ok(_) if store.read_count() != code.r() => Some(format!(
                    "read {} symbols, expected {}",
                    store.read_count(),
                    code.r()
                )),
                Ok(_) => None,
                Err(e) => Some(e.to_string()),
            };
            if let Some(detail) = problem {
                behavioural_fail = Some((pos, detail));
                break 'outer;
            }
        }
    }

    let mut report = VerificationReport::new(
        format!(
            "locality {}: every position repairable from its recovery set",
            code.r()
        ),
        SearchMode::Sampled { trials, seed },
        repairs,
    )
    .detail("positions", json!(code.n()))
    .detail("algebraic", json!(algebraic_fail.is_none()))
    .detail("max_reads", json!(max_reads));
    if let Some(pos) = algebraic_fail {
        report = report.fail(Witness::Position {
            position: pos,
            detail: "local dual vector vanishes at this position".into(),
        });
    } else if let Some((pos, detail)) = behavioural_fail {
        report = report.fail(Witness::Position {
            position: pos,
            detail,
        });
    }
    report.timed(start)
}

/// `n - k - ceil(k / r) + 2`.
pub fn singleton_like_bound(n: usize, k: usize, r: usize) -> i64 {
    n as i64 - k as i64 - k.div_ceil(r) as i64 + 2
}

/// Closed-form optimality test `n - k = n/(r+1) + d - 2 - floor((d-2)/(r+1))`,
/// valid when `d - 2 ≢ r (mod r + 1)`.
pub fn check_optimality_equiv(params: &CodeParams, d: usize) -> Result<bool, VerifyError> {
    let (n, k, r) = (params.n, params.k, params.r);
    if n % (r + 1) != 0 {
        return Err(VerifyError::NotDivisible { cell: r + 1, n });
    }
    let dm2 = d - 2;
    if dm2 % (r + 1) == r {
        return Err(VerifyError::ConditionViolated { d_minus_2: dm2, r });
    }
    Ok(n - k == n / (r + 1) + dm2 - dm2 / (r + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthRegime {
    /// `n / (r + 1)`.
    pub hypothesis_lhs: usize,
    /// `(3 - floor(3/(r+1))) (3r + 2) + floor(3/(r+1)) + 1`.
    pub hypothesis_rhs: usize,
    pub hypothesis_holds: bool,
    /// `ceil((q - 1) / (r + 1))`.
    pub cosets_ceil: usize,
    pub cosets_exceed_three: bool,
}

pub fn check_length_regime(params: &CodeParams) -> LengthRegime {
    let r = params.r;
    let lhs = params.n / (r + 1);
    let f = 3 / (r + 1);
    let rhs = (3 - f) * (3 * r + 2) + f + 1;
    let cosets = (params.q - 1).div_ceil(r + 1);
    LengthRegime {
        hypothesis_lhs: lhs,
        hypothesis_rhs: rhs,
        hypothesis_holds: lhs >= rhs,
        cosets_ceil: cosets,
        cosets_exceed_three: cosets > 3,
    }
}

impl LengthRegime {
    /// Informational report; the two conditions are recorded, not enforced.
    pub fn report(&self) -> VerificationReport {
        let start = Instant::now();
        VerificationReport::new(
            "length-regime conditions (informational)",
            SearchMode::Exhaustive,
            2,
        )
        .detail(
            "long_enough_hypothesis",
            json!({
                "lhs": self.hypothesis_lhs,
                "rhs": self.hypothesis_rhs,
                "holds": self.hypothesis_holds,
            }),
        )
        .detail(
            "cosets_ceil_gt_3",
            json!({"value": self.cosets_ceil, "holds": self.cosets_exceed_three}),
        )
        .timed(start)
    }
}

/// Singleton-like bound and closed-form optimality for a constructed code,
/// assuming the designed distance.
pub fn bounds_report(params: &CodeParams) -> VerificationReport {
    let start = Instant::now();
    let d = params.d_target;
    let bound = singleton_like_bound(params.n, params.k, params.r);
    let equiv = check_optimality_equiv(params, d);
    let mut report = VerificationReport::new(
        format!("parameter bounds consistent with d = {d}"),
        SearchMode::Exhaustive,
        2,
    )
    .detail("singleton_like_bound", json!(bound))
    .detail(
        "optimality_equivalence",
        match &equiv {
            Ok(b) => json!(b),
            Err(e) => json!(format!("inapplicable: {e}")),
        },
    )
    .detail("optimal_regime", json!(params.optimal_regime));
    let consistent = bound >= d as i64
        && match (params.optimal_regime, &equiv) {
            (true, Ok(true)) => bound == d as i64,
            (true, _) => false,
            (false, _) => true,
        };
    if !consistent {
        report = report.fail(Witness::Values {
            detail: format!(
                "bound {bound}, equivalence {equiv:?}, optimal_regime {}",
                params.optimal_regime
            ),
        });
    }
    report.timed(start)
}

/// Exhaustive-or-bounded check that every erasure pattern of a given size is
/// recoverable; used by the acceptance suite and `simulate`.
pub fn count_unrecoverable_patterns(
    code: &LrcCode,
    codeword: &codec::Codeword,
    size: usize,
) -> (u64, u64, Option<Vec<usize>>) {
    let n = code.n();
    let field = code.field();
    let h = code.parity();
    let total = binomial(n, size) as u64;
    let (bad, first) = scan_subsets(n, size, false, |s| {
        let w = ReceivedWord::erased(codeword, &ErasurePattern::new(s.to_vec()));
        !matches!(codec::erasure_decode(field, h, &w), Ok(ref c) if c == codeword)
    });
    (total, bad, first)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn pts(f: &Field, raw: [(u64, u64); 4]) -> [(Fe, Fe); 4] {
        raw.map(|(a, b)| (f.element(a).unwrap(), f.element(b).unwrap()))
    }

    #[test]
    fn binomials_and_ranks() {
        assert_eq!(binomial(36, 4), 58_905);
        assert_eq!(binomial(36, 5), 376_992);
        assert_eq!(binomial(16, 4), 1_820);
        assert_eq!(binomial(4, 5), 0);
        // brute-force lexicographic enumeration agrees with lex_rank
        let mut seen = Vec::new();
        for first in 0..7 {
            for_each_subset_with_first(7, 3, first, |s| {
                seen.push(s.to_vec());
                true
            });
        }
        assert_eq!(seen.len(), 35);
        for (i, s) in seen.iter().enumerate() {
            assert_eq!(lex_rank(7, s), i as u64);
        }
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(sorted, seen);
    }

    #[test]
    fn lemma_examples_from_each_case() {
        let f = gf(7);
        assert_eq!(
            check_lemma_matrix(&f, &pts(&f, [(1, 1), (2, 1), (3, 1), (4, 1)])).unwrap(),
            4
        );
        assert_eq!(
            check_lemma_matrix(&f, &pts(&f, [(1, 1), (1, 2), (1, 3), (1, 4)])).unwrap(),
            4
        );
        assert_eq!(
            check_lemma_matrix(&f, &pts(&f, [(1, 1), (2, 1), (1, 3), (2, 3)])).unwrap(),
            4
        );
        assert_eq!(
            check_lemma_matrix(&f, &pts(&f, [(1, 1), (1, 1), (1, 3), (2, 3)])),
            Err(VerifyError::NotDistinct)
        );
        assert!(matches!(
            check_lemma_matrix(&f, &pts(&f, [(0, 1), (1, 1), (1, 3), (2, 3)])),
            Err(VerifyError::NotInDomain(..))
        ));
    }

    /// Hand-checked dependency 1·c1 + 3·c2 + 2·c3 + 1·c4 = 0 over GF(7).
    #[test]
    fn lemma_two_pair_counterexample() {
        let f = gf(7);
        let p = pts(&f, [(1, 1), (2, 1), (4, 3), (6, 3)]);
        assert_eq!(BetaPattern::classify(&p), BetaPattern::TwoPairs);
        let m = lemma_matrix(&f, &p);
        let combo = m.mul_vec(&f, &[Fe::ONE, f.from_int(3), f.from_int(2), Fe::ONE]);
        assert!(combo.iter().all(|x| x.is_zero()));
        assert_eq!(check_lemma_matrix(&f, &p).unwrap(), 3);
    }

    #[test]
    fn classify_patterns() {
        let f = gf(7);
        assert_eq!(
            BetaPattern::classify(&pts(&f, [(1, 1), (2, 1), (3, 1), (4, 1)])),
            BetaPattern::AllEqual
        );
        assert_eq!(
            BetaPattern::classify(&pts(&f, [(1, 1), (1, 2), (1, 3), (1, 4)])),
            BetaPattern::AllDistinct
        );
        assert_eq!(
            BetaPattern::classify(&pts(&f, [(1, 1), (2, 1), (3, 1), (1, 4)])),
            BetaPattern::ThreeEqual
        );
        assert_eq!(
            BetaPattern::classify(&pts(&f, [(1, 1), (2, 1), (1, 3), (1, 4)])),
            BetaPattern::OnePair
        );
        assert_eq!(
            BetaPattern::classify(&pts(&f, [(1, 1), (2, 1), (1, 3), (2, 3)])),
            BetaPattern::TwoPairs
        );
    }

    #[test]
    fn distance_vacuous_and_guard() {
        let code = LrcCode::build(gf(5), 3).unwrap();
        let h = &code.parity().0;
        let r = verify_distance_at_least(code.field(), h, 1, SearchMode::Exhaustive).unwrap();
        assert!(r.passed());
        assert_eq!(r.trials, 1);
        assert!(matches!(
            verify_distance_at_least(code.field(), h, 9, SearchMode::Exhaustive),
            Err(VerifyError::WeightTooLarge { w: 9, max: 8 })
        ));
    }

    #[test]
    fn distance_on_instance_with_d_at_least_5() {
        let code = LrcCode::build(gf(7), 2).unwrap();
        let h = &code.parity().0;
        let r = verify_distance_at_least(code.field(), h, 5, SearchMode::Exhaustive).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.trials, binomial(36, 4) as u64);
        let s = verify_distance_at_least(
            code.field(),
            h,
            5,
            SearchMode::Sampled {
                trials: 2000,
                seed: 9,
            },
        )
        .unwrap();
        assert!(s.passed());
        assert_eq!(s.seed, Some(9));
    }

    #[test]
    fn min_weight_on_mds_toy_code() {
        // [4, 2] Reed-Solomon over GF(5): d = 3, parity check is Vandermonde.
        let f = gf(5);
        let h = Matrix::from_rows(
            vec![vec![Fe::ONE; 4], (1..5).map(|a| f.from_int(a)).collect()],
            4,
        );
        let none = find_min_weight_codeword(&f, &h, 2).unwrap();
        assert_eq!(none.weight, None);
        let some = find_min_weight_codeword(&f, &h, 3).unwrap();
        assert_eq!(some.weight, Some(3));
        let cw = some.codeword.clone().unwrap();
        assert!(h.mul_vec(&f, cw.symbols()).iter().all(|x| x.is_zero()));
        assert!(exact_distance_report(&some, 3).passed());
        assert!(!exact_distance_report(&none, 3).passed());
        assert!(exact_distance_report(&none, 3).witness.is_some());
    }

    #[test]
    fn min_weight_budget_guard() {
        let code = LrcCode::build(gf(11), 4).unwrap();
        assert!(matches!(
            find_min_weight_codeword(code.field(), &code.parity().0, 5),
            Err(VerifyError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sampled_distance_detects_tampering() {
        let code = LrcCode::build(gf(7), 2).unwrap();
        let f = code.field();
        let mut h = code.parity().0.clone();
        // make column 1 a copy of column 0
        for r in 0..h.rows() {
            h.set(r, 1, h.get(r, 0));
        }
        let rep = verify_distance_at_least(f, &h, 5, SearchMode::Exhaustive).unwrap();
        assert!(!rep.passed());
        match rep.witness {
            Some(Witness::DependentColumns { ref columns, .. }) => {
                assert_eq!(&columns[..2], &[0, 1])
            }
            ref other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn parity_consistency_catches_edits() {
        let code = LrcCode::build(gf(7), 2).unwrap();
        assert!(verify_parity_consistency(&code).passed());
        let mut h = code.parity().0.clone();
        let v = code.field().add(h.get(2, 5), Fe::ONE);
        h.set(2, 5, v);
        let tampered = LrcCode::with_matrices(gf(7), 2, code.generator().0.clone(), h).unwrap();
        let rep = verify_parity_consistency(&tampered);
        assert!(!rep.passed());
        assert!(matches!(
            rep.witness,
            Some(Witness::RowPair { parity_row: 2, .. })
        ));
    }

    #[test]
    fn bounds_arithmetic() {
        assert_eq!(singleton_like_bound(36, 27, 5), 5);
        assert_eq!(singleton_like_bound(100, 77, 4), 5);
        assert_eq!(singleton_like_bound(16, 9, 3), 6);

        let p = crate::construct::validate_params(&gf(7), 5).unwrap();
        assert_eq!(check_optimality_equiv(&p, 5), Ok(true));
        let p = crate::construct::validate_params(&gf(11), 4).unwrap();
        assert_eq!(check_optimality_equiv(&p, 5), Ok(true));
        let p = crate::construct::validate_params(&gf(5), 3).unwrap();
        assert_eq!(
            check_optimality_equiv(&p, 5),
            Err(VerifyError::ConditionViolated { d_minus_2: 3, r: 3 })
        );
        let p = crate::construct::validate_params(&gf(7), 2).unwrap();
        assert_eq!(check_optimality_equiv(&p, 5), Ok(false));
    }

    #[test]
    fn length_regime_examples() {
        let p = crate::construct::validate_params(&gf(7), 5).unwrap();
        let l = check_length_regime(&p);
        assert_eq!(
            (l.hypothesis_lhs, l.hypothesis_rhs, l.hypothesis_holds),
            (6, 52, false)
        );
        assert_eq!((l.cosets_ceil, l.cosets_exceed_three), (1, false));
        let p = crate::construct::validate_params(&gf(13), 3).unwrap();
        let l = check_length_regime(&p);
        assert_eq!(
            (l.hypothesis_lhs, l.hypothesis_rhs, l.hypothesis_holds),
            (36, 34, true)
        );
        let p = crate::construct::validate_params(&gf(29), 3).unwrap();
        let l = check_length_regime(&p);
        assert_eq!((l.cosets_ceil, l.cosets_exceed_three), (7, true));
        assert!(l.report().passed());
    }

    #[test]
    fn locality_passes() {
        let code = LrcCode::build(gf(7), 5).unwrap();
        let r = verify_locality(&code, 20, 1);
        assert!(r.passed(), "{r}");
        assert_eq!(r.trials, 20 * 36);
        assert_eq!(r.details["max_reads"], json!(5));
    }

    #[test]
    fn reports_serialize_with_required_fields() {
        let code = LrcCode::build(gf(5), 3).unwrap();
        let r = verify_distance_at_least(code.field(), &code.parity().0, 4, SearchMode::Exhaustive)
            .unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "claim", "mode", "trials", "result", "witness", "seed", "millis",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["mode"], "exhaustive");
    }
}
