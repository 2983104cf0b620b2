//! Encoding, local repair, erasure decoding and small-radius error correction.

use std::cell::RefCell;

use rand::Rng;
use thiserror::Error;

use crate::construct::{GeneratorMatrix, LrcCode, ParityCheckMatrix};
use crate::field::{Fe, Field};
use crate::matrix::{dot, Matrix, SolveError};

/// Longest code accepted by [`error_correct_bd`].
pub const BD_MAX_LENGTH: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("position {position} out of range for length {n}")]
    PositionOutOfRange { position: usize, n: usize },
    #[error("position {0} is not erased")]
    NotErased(usize),
    #[error(
        "cell {cell} has other erasures {others:?}; local repair of {position} needs all r helpers"
    )]
    LocalRepairImpossible {
        position: usize,
        cell: usize,
        others: Vec<usize>,
    },
    #[error("{erased} erasures exceed the redundancy n - k = {max}")]
    TooManyErasures { erased: usize, max: usize },
    #[error("erasure pattern {positions:?} is not uniquely recoverable (rank {rank} < {})", positions.len())]
    AmbiguousErasures { positions: Vec<usize>, rank: usize },
    #[error("surviving symbols are inconsistent with every codeword")]
    Inconsistent,
    #[error("no error pattern of weight <= 2 matches the syndrome")]
    Undecodable,
    #[error("brute-force correction limited to n <= {max}, got {n}")]
    TooLong { n: usize, max: usize },
}

impl CodecError {
    /// Stable identifier used in machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            CodecError::LengthMismatch { .. } => "LengthMismatch",
            CodecError::PositionOutOfRange { .. } => "PositionOutOfRange",
            CodecError::NotErased(_) => "NotErased",
            CodecError::LocalRepairImpossible { .. } => "LocalRepairImpossible",
            CodecError::TooManyErasures { .. } => "TooManyErasures",
            CodecError::AmbiguousErasures { .. } => "AmbiguousErasures",
            CodecError::Inconsistent => "Inconsistent",
            CodecError::Undecodable => "Undecodable",
            CodecError::TooLong { .. } => "TooLong",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword(pub Vec<Fe>);

impl Codeword {
    pub fn symbols(&self) -> &[Fe] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|s| !s.is_zero()).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len())
            .filter(|&i| !self.0[i].is_zero())
            .collect()
    }
}

/// Sorted, duplicate-free erasure positions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ErasurePattern(Vec<usize>);

impl ErasurePattern {
    pub fn new(mut positions: Vec<usize>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        ErasurePattern(positions)
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A word with some symbols lost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedWord {
    symbols: Vec<Option<Fe>>,
}

impl ReceivedWord {
    pub fn new(symbols: Vec<Option<Fe>>) -> Self {
        ReceivedWord { symbols }
    }

    pub fn from_codeword(c: &Codeword) -> Self {
        ReceivedWord {
            symbols: c.0.iter().copied().map(Some).collect(),
        }
    }

    /// `c` with the given positions erased.
    pub fn erased(c: &Codeword, pattern: &ErasurePattern) -> Self {
        let mut w = Self::from_codeword(c);
        for &p in pattern.positions() {
            w.symbols[p] = None;
        }
        w
    }

    pub fn symbols(&self) -> &[Option<Fe>] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn erasures(&self) -> ErasurePattern {
        ErasurePattern(
            (0..self.symbols.len())
                .filter(|&i| self.symbols[i].is_none())
                .collect(),
        )
    }

    pub fn fill(&mut self, position: usize, value: Fe) {
        self.symbols[position] = Some(value);
    }

    /// The completed codeword, if nothing is erased.
    pub fn complete(&self) -> Option<Codeword> {
        self.symbols
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(Codeword)
    }
}

/// Storage abstraction for repair: erasure status is metadata, fetching a
/// symbol's value is a read.
pub trait SymbolStore {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn is_erased(&self, position: usize) -> bool;
    fn read(&self, position: usize) -> Option<Fe>;
}

impl SymbolStore for ReceivedWord {
    fn len(&self) -> usize {
        self.symbols.len()
    }

    fn is_erased(&self, position: usize) -> bool {
        self.symbols[position].is_none()
    }

    fn read(&self, position: usize) -> Option<Fe> {
        self.symbols[position]
    }
}

/// Wraps a store and records every read.
pub struct CountingStore<'a, S> {
    inner: &'a S,
    reads: RefCell<Vec<usize>>,
}

impl<'a, S: SymbolStore> CountingStore<'a, S> {
    pub fn new(inner: &'a S) -> Self {
        CountingStore {
            inner,
            reads: RefCell::new(Vec::new()),
        }
    }

    pub fn reads(&self) -> Vec<usize> {
        self.reads.borrow().clone()
    }

    pub fn read_count(&self) -> usize {
        self.reads.borrow().len()
    }
}

impl<S: SymbolStore> SymbolStore for CountingStore<'_, S> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn is_erased(&self, position: usize) -> bool {
        self.inner.is_erased(position)
    }

    fn read(&self, position: usize) -> Option<Fe> {
        self.reads.borrow_mut().push(position);
        self.inner.read(position)
    }
}

pub fn encode(field: &Field, g: &GeneratorMatrix, message: &[Fe]) -> Result<Codeword, CodecError> {
    if message.len() != g.0.rows() {
        return Err(CodecError::LengthMismatch {
            expected: g.0.rows(),
            got: message.len(),
        });
    }
    Ok(Codeword(g.0.vec_mul(field, message)))
}

pub fn random_message<R: Rng + ?Sized>(field: &Field, k: usize, rng: &mut R) -> Vec<Fe> {
    (0..k)
        .map(|_| {
            field
                .element(rng.random_range(0..field.q() as u64))
                .expect("in range")
        })
        .collect()
}

pub fn syndrome(field: &Field, h: &ParityCheckMatrix, word: &[Fe]) -> Vec<Fe> {
    h.0.mul_vec(field, word)
}

pub fn is_codeword(field: &Field, h: &ParityCheckMatrix, word: &[Fe]) -> bool {
    syndrome(field, h, word).iter().all(|s| s.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRepair {
    pub position: usize,
    pub value: Fe,
    /// Positions whose symbols were read, in cell order.
    pub reads: Vec<usize>,
}

/// Recovers one erased symbol from the other `r` symbols of its recovery set.
pub fn local_repair<S: SymbolStore>(
    code: &LrcCode,
    store: &S,
    position: usize,
) -> Result<LocalRepair, CodecError> {
    let n = code.n();
    if store.len() != n {
        return Err(CodecError::LengthMismatch {
            expected: n,
            got: store.len(),
        });
    }
    if position >= n {
        return Err(CodecError::PositionOutOfRange { position, n });
    }
    if !store.is_erased(position) {
        return Err(CodecError::NotErased(position));
    }
    let domain = code.domain();
    let cell = domain.cell_of(position);
    let range = domain.cell(cell);
    let others: Vec<usize> = range
        .clone()
        .filter(|&p| p != position && store.is_erased(p))
        .collect();
    if !others.is_empty() {
        return Err(CodecError::LocalRepairImpossible {
            position,
            cell,
            others,
        });
    }
    let field = code.field();
    let v = code.local_parity(cell);
    let mut acc = Fe::ZERO;
    let mut reads = Vec::with_capacity(code.r());
    let mut own = Fe::ZERO;
    for (s, p) in range.enumerate() {
        if p == position {
            own = v[s];
            continue;
        }
        let sym = store.read(p).expect("checked not erased");
        reads.push(p);
        acc = field.add(acc, field.mul(v[s], sym));
    }
    // v has full support on the cell, so own != 0 for a well-formed code.
    let value = field.neg(
        field
            .div(acc, own)
            .map_err(|_| CodecError::LocalRepairImpossible {
                position,
                cell,
                others: Vec::new(),
            })?,
    );
    Ok(LocalRepair {
        position,
        value,
        reads,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDecode {
    pub codeword: Codeword,
    /// Surviving positions with a nonzero coefficient in some parity row.
    pub reads: Vec<usize>,
}

/// Solves `H_E x_E = -H_Ē c_Ē` over all parity rows.
pub fn erasure_decode_with_reads(
    field: &Field,
    h: &ParityCheckMatrix,
    received: &ReceivedWord,
) -> Result<GlobalDecode, CodecError> {
    let h = &h.0;
    let n = h.cols();
    if received.len() != n {
        return Err(CodecError::LengthMismatch {
            expected: n,
            got: received.len(),
        });
    }
    let erased = received.erasures();
    if erased.is_empty() {
        return Ok(GlobalDecode {
            codeword: received.complete().expect("no erasures"),
            reads: Vec::new(),
        });
    }
    let redundancy = h.rows();
    if erased.len() > redundancy {
        return Err(CodecError::TooManyErasures {
            erased: erased.len(),
            max: redundancy,
        });
    }
    let e = erased.positions();
    let mut a = Matrix::zeros(h.rows(), e.len());
    let mut b = vec![Fe::ZERO; h.rows()];
    let mut read = vec![false; n];
    for r in 0..h.rows() {
        let row = h.row(r);
        for (ci, &c) in e.iter().enumerate() {
            a.set(r, ci, row[c]);
        }
        let mut acc = Fe::ZERO;
        for (c, sym) in received.symbols().iter().enumerate() {
            if let Some(s) = sym {
                if !row[c].is_zero() {
                    read[c] = true;
                    acc = field.add(acc, field.mul(row[c], *s));
                }
            }
        }
        b[r] = field.neg(acc);
    }
    let x = a.solve(field, &b).map_err(|err| match err {
        SolveError::Underdetermined { rank, .. } => CodecError::AmbiguousErasures {
            positions: e.to_vec(),
            rank,
        },
        SolveError::Inconsistent => CodecError::Inconsistent,
    })?;
    let mut word = received.clone();
    for (&p, &v) in e.iter().zip(&x) {
        word.fill(p, v);
    }
    Ok(GlobalDecode {
        codeword: word.complete().expect("all erasures filled"),
        reads: (0..n).filter(|&i| read[i]).collect(),
    })
}

/// Fills every erasure by solving the parity-check system; unique whenever at
/// most four symbols are missing.
pub fn erasure_decode(
    field: &Field,
    h: &ParityCheckMatrix,
    received: &ReceivedWord,
) -> Result<Codeword, CodecError> {
    erasure_decode_with_reads(field, h, received).map(|d| d.codeword)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridOutcome {
    pub codeword: Codeword,
    pub local: Vec<LocalRepair>,
    /// Positions filled by the global solve.
    pub global: Vec<usize>,
    pub global_reads: usize,
}

impl HybridOutcome {
    pub fn symbols_read(&self) -> usize {
        self.local.iter().map(|l| l.reads.len()).sum::<usize>() + self.global_reads
    }
}

/// Local repair to a fixed point (lowest cell first), then a global solve for
/// whatever is left.
pub fn hybrid_decode(code: &LrcCode, received: &ReceivedWord) -> Result<HybridOutcome, CodecError> {
    if received.len() != code.n() {
        return Err(CodecError::LengthMismatch {
            expected: code.n(),
            got: received.len(),
        });
    }
    let mut word = received.clone();
    let mut local = Vec::new();
    let domain = code.domain();
    loop {
        let mut progressed = false;
        for cell in domain.cells() {
            let missing: Vec<usize> = cell.filter(|&p| word.is_erased(p)).collect();
            if let [only] = missing[..] {
                let fix = local_repair(code, &word, only)?;
                word.fill(only, fix.value);
                local.push(fix);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    let global: Vec<usize> = word.erasures().positions().to_vec();
    let decoded = erasure_decode_with_reads(code.field(), code.parity(), &word)?;
    Ok(HybridOutcome {
        codeword: decoded.codeword,
        local,
        global,
        global_reads: decoded.reads.len(),
    })
}

/// Corrects up to two symbol errors by exhaustive search over error patterns
/// of weight one, then two, in lexicographic position order.
pub fn error_correct_bd(
    field: &Field,
    h: &ParityCheckMatrix,
    received: &[Fe],
) -> Result<Codeword, CodecError> {
    let n = h.0.cols();
    if received.len() != n {
        return Err(CodecError::LengthMismatch {
            expected: n,
            got: received.len(),
        });
    }
    if n > BD_MAX_LENGTH {
        return Err(CodecError::TooLong {
            n,
            max: BD_MAX_LENGTH,
        });
    }
    let s = syndrome(field, h, received);
    if s.iter().all(|x| x.is_zero()) {
        return Ok(Codeword(received.to_vec()));
    }
    let cols = h.0.columns();
    let correct = |errs: &[(usize, Fe)]| {
        let mut c = received.to_vec();
        for &(p, e) in errs {
            c[p] = field.sub(c[p], e);
        }
        Codeword(c)
    };

    for (i, col) in cols.iter().enumerate() {
        if let Some(e) = scalar_multiple(field, col, &s) {
            return Ok(correct(&[(i, e)]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if let Some((a, b)) = two_column_combination(field, &cols[i], &cols[j], &s) {
                return Ok(correct(&[(i, a), (j, b)]));
            }
        }
    }
    Err(CodecError::Undecodable)
}

/// Nonzero `e` with `e · col = target`.
fn scalar_multiple(field: &Field, col: &[Fe], target: &[Fe]) -> Option<Fe> {
    let pivot = col.iter().position(|x| !x.is_zero())?;
    let e = field.div(target[pivot], col[pivot]).ok()?;
    if e.is_zero() {
        return None;
    }
    col.iter()
        .zip(target)
        .all(|(&c, &t)| field.mul(e, c) == t)
        .then_some(e)
}

/// Nonzero `(a, b)` with `a · u + b · v = target`.
fn two_column_combination(field: &Field, u: &[Fe], v: &[Fe], target: &[Fe]) -> Option<(Fe, Fe)> {
    // Find two rows where (u, v) is invertible; otherwise u, v are parallel
    // and the weight-1 pass already covered any solution.
    let len = u.len();
    for r1 in 0..len {
        for r2 in r1 + 1..len {
            let det = field.sub(field.mul(u[r1], v[r2]), field.mul(u[r2], v[r1]));
            if det.is_zero() {
                continue;
            }
            let det_inv = field.inv(det).ok()?;
            let a = field.mul(
                det_inv,
                field.sub(field.mul(target[r1], v[r2]), field.mul(target[r2], v[r1])),
            );
            let b = field.mul(
                det_inv,
                field.sub(field.mul(u[r1], target[r2]), field.mul(u[r2], target[r1])),
            );
            if a.is_zero() || b.is_zero() {
                return None;
            }
            let fits =
                (0..len).all(|r| field.add(field.mul(a, u[r]), field.mul(b, v[r])) == target[r]);
            return fits.then_some((a, b));
        }
    }
    None
}

/// Evaluates a local parity check on a full word.
pub fn local_check(code: &LrcCode, word: &[Fe], cell: usize) -> Fe {
    let range = code.domain().cell(cell);
    dot(code.field(), code.local_parity(cell), &word[range])
}
