//! The Cartesian code C(V, L) on V = F_q* × F_q*.
//!
//! The message space is spanned by the monomials `x^i y^j`, `0 <= i, j <= q-2`,
//! with `i ≢ r (mod r+1)`, minus `1`, `x^(q-3) y^(q-2)` and `x^(q-4) y^(q-2)`.
//! Points are ordered row by row (fixed `y = g^t`), then by coset `g^c R` of
//! the order-(r+1) subgroup `R`, then by power `h^s` of its generator, so every
//! recovery set `g^c R × {g^t}` is a contiguous block of `r + 1` positions.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::field::{Fe, Field, FieldError, FieldSpec};
use crate::matrix::Matrix;

/// Designed minimum distance of every code built here.
pub const TARGET_DISTANCE: usize = 5;

/// Tag describing the point ordering; recorded in manifests.
pub const POINT_ORDER: &str = "row-coset-power";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("(r+1) must divide (q-1): r = {r}, q = {q}")]
    DivisibilityViolation { q: usize, r: usize },
    #[error("degenerate code for q = {q}, r = {r}: dimension {k} is not positive")]
    DegenerateCode { q: usize, r: usize, k: i64 },
    #[error(
        "locality r = 1 is not supported: x^(q-4) y^(q-2) already has odd x-degree, \
         so the basis would have n/2 - 2 monomials instead of n/2 - 3"
    )]
    CollapsedExclusion { q: usize, r: usize },
    #[error("point ({0}, {1}) is not in F_q* x F_q*")]
    NotInDomain(Fe, Fe),
    #[error("cell {cell} has a {dim}-dimensional local dual, expected 1")]
    LocalDual { cell: usize, dim: usize },
    #[error("matrix shape {got:?} does not match expected {expected:?}")]
    Shape {
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeParams {
    pub field: FieldSpec,
    pub q: usize,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    /// Number of recovery sets, `n / (r + 1)`.
    pub cells: usize,
    pub d_target: usize,
    /// The construction meets the Singleton-like bound when `r > 3`.
    pub optimal_regime: bool,
    /// `d - 2 ≡ r (mod r + 1)`, the case where the closed-form optimality
    /// test does not apply (happens exactly at `r = 3` for `d = 5`).
    pub equivalence_inapplicable: bool,
}

pub fn validate_params(field: &Field, r: usize) -> Result<CodeParams, ConstructError> {
    let q = field.q();
    if !(q - 1).is_multiple_of(r + 1) {
        return Err(ConstructError::DivisibilityViolation { q, r });
    }
    let n = (q - 1) * (q - 1);
    let cells = n / (r + 1);
    let k = n as i64 - cells as i64 - 3;
    if r == 0 || k <= 0 {
        return Err(ConstructError::DegenerateCode { q, r, k });
    }
    if r == 1 {
        return Err(ConstructError::CollapsedExclusion { q, r });
    }
    let d = TARGET_DISTANCE;
    Ok(CodeParams {
        field: field.spec().clone(),
        q,
        r,
        n,
        k: k as usize,
        cells,
        d_target: d,
        optimal_regime: r > 3,
        equivalence_inapplicable: (d - 2) % (r + 1) == r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Monomial {
    /// Exponent of `x`.
    pub i: usize,
    /// Exponent of `y`.
    pub j: usize,
}

impl Monomial {
    pub fn new(i: usize, j: usize) -> Self {
        Monomial { i, j }
    }

    pub fn eval(&self, field: &Field, x: Fe, y: Fe) -> Fe {
        field.mul(field.powu(x, self.i as u64), field.powu(y, self.j as u64))
    }
}

/// The monomial set L, sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    monomials: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn contains(&self, m: Monomial) -> bool {
        self.monomials.binary_search(&m).is_ok()
    }
}

/// The three monomials removed on top of the residue rule.
pub fn excluded_monomials(q: usize) -> [Monomial; 3] {
    [
        Monomial::new(0, 0),
        Monomial::new(q - 3, q - 2),
        Monomial::new(q - 4, q - 2),
    ]
}

pub fn build_monomial_basis(params: &CodeParams) -> MonomialBasis {
    let (q, r) = (params.q, params.r);
    let excluded = excluded_monomials(q);
    let monomials: Vec<Monomial> = (0..q - 1)
        .filter(|i| i % (r + 1) != r)
        .flat_map(|i| (0..q - 1).map(move |j| Monomial::new(i, j)))
        .filter(|m| !excluded.contains(m))
        .collect();
    debug_assert_eq!(monomials.len(), params.k);
    MonomialBasis { monomials }
}

/// Ordered points of V and their partition into recovery sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationDomain {
    points: Vec<(Fe, Fe)>,
    primitive: Fe,
    /// R, listed as `h^0, h^1, ..., h^r`.
    subgroup: Vec<Fe>,
    cell_size: usize,
    /// `lookup[x * q + y]` is the position of `(x, y)`, or `usize::MAX`.
    lookup: Vec<usize>,
    q: usize,
}

pub fn build_domain(field: &Field, params: &CodeParams) -> EvaluationDomain {
    let q = field.q();
    let cell_size = params.r + 1;
    let cosets = (q - 1) / cell_size;
    let subgroup = field
        .subgroup_of_order(cell_size)
        .expect("validated: r+1 divides q-1");
    let mut points = Vec::with_capacity(params.n);
    for t in 0..q - 1 {
        let y = field.exp(t);
        for c in 0..cosets {
            let base = field.exp(c);
            points.extend(subgroup.iter().map(|&h| (field.mul(base, h), y)));
        }
    }
    let mut lookup = vec![usize::MAX; q * q];
    for (pos, &(x, y)) in points.iter().enumerate() {
        lookup[x.index() * q + y.index()] = pos;
    }
    EvaluationDomain {
        points,
        primitive: field.primitive_element(),
        subgroup,
        cell_size,
        lookup,
        q,
    }
}

impl EvaluationDomain {
    pub fn points(&self) -> &[(Fe, Fe)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn primitive(&self) -> Fe {
        self.primitive
    }

    pub fn subgroup(&self) -> &[Fe] {
        &self.subgroup
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.points.len() / self.cell_size
    }

    pub fn cell_of(&self, position: usize) -> usize {
        position / self.cell_size
    }

    pub fn cell(&self, cell: usize) -> Range<usize> {
        cell * self.cell_size..(cell + 1) * self.cell_size
    }

    pub fn cells(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.cell_count()).map(|c| self.cell(c))
    }

    pub fn position(&self, point: (Fe, Fe)) -> Option<usize> {
        let (x, y) = point;
        if x.index() >= self.q || y.index() >= self.q {
            return None;
        }
        match self.lookup[x.index() * self.q + y.index()] {
            usize::MAX => None,
            pos => Some(pos),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix(pub Matrix);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix(pub Matrix);

pub fn build_generator_matrix(
    field: &Field,
    basis: &MonomialBasis,
    domain: &EvaluationDomain,
) -> GeneratorMatrix {
    let rows: Vec<Vec<Fe>> = basis
        .monomials()
        .iter()
        .map(|m| {
            domain
                .points()
                .iter()
                .map(|&(x, y)| m.eval(field, x, y))
                .collect()
        })
        .collect();
    GeneratorMatrix(Matrix::from_rows(rows, domain.len()))
}

/// Dual of the row space of `g`, in reduced row echelon form.
pub fn build_parity_check(field: &Field, g: &GeneratorMatrix) -> ParityCheckMatrix {
    ParityCheckMatrix(g.0.nullspace(field))
}

/// A bivariate polynomial with both degrees below `q - 1`, stored as a dense
/// `(q-1) × (q-1)` table; entry `(i, j)` is the coefficient of `x^i y^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    side: usize,
    coeffs: Vec<Fe>,
}

impl CoefficientTable {
    pub fn zero(q: usize) -> Self {
        CoefficientTable {
            side: q - 1,
            coeffs: vec![Fe::ZERO; (q - 1) * (q - 1)],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.coeffs[i * self.side + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.coeffs[i * self.side + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Monomials with a nonzero coefficient.
    pub fn support(&self) -> Vec<Monomial> {
        (0..self.side)
            .flat_map(|i| (0..self.side).map(move |j| Monomial::new(i, j)))
            .filter(|m| !self.get(m.i, m.j).is_zero())
            .collect()
    }

    pub fn evaluate(&self, field: &Field, x: Fe, y: Fe) -> Fe {
        // Horner in x over Horner-in-y rows.
        (0..self.side).rev().fold(Fe::ZERO, |acc, i| {
            let row = &self.coeffs[i * self.side..(i + 1) * self.side];
            let in_y = row
                .iter()
                .rev()
                .fold(Fe::ZERO, |a, &c| field.add(field.mul(a, y), c));
            field.add(field.mul(acc, x), in_y)
        })
    }

    pub fn evaluate_on(&self, field: &Field, domain: &EvaluationDomain) -> Vec<Fe> {
        domain
            .points()
            .iter()
            .map(|&(x, y)| self.evaluate(field, x, y))
            .collect()
    }
}

/// The polynomial `g_P` that is 1 at `P` and 0 on the rest of V.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationBasis {
    pub point: (Fe, Fe),
    pub table: CoefficientTable,
}

pub fn interpolation_poly(
    field: &Field,
    point: (Fe, Fe),
) -> Result<InterpolationBasis, ConstructError> {
    let (alpha, beta) = point;
    if alpha.is_zero() || beta.is_zero() || alpha.index() >= field.q() || beta.index() >= field.q()
    {
        return Err(ConstructError::NotInDomain(alpha, beta));
    }
    let q = field.q();
    let alpha_inv = field.inv(alpha)?;
    let beta_inv = field.inv(beta)?;
    let mut table = CoefficientTable::zero(q);
    let mut ai = Fe::ONE;
    for i in 0..q - 1 {
        let mut coeff = ai;
        for j in 0..q - 1 {
            table.set(i, j, coeff);
            coeff = field.mul(coeff, beta_inv);
        }
        ai = field.mul(ai, alpha_inv);
    }
    Ok(InterpolationBasis { point, table })
}

/// The unique polynomial with both degrees below `q - 1` taking `values` on
/// the domain, computed as `Σ values[v] · g_{P_v}`.
pub fn interpolate(field: &Field, domain: &EvaluationDomain, values: &[Fe]) -> CoefficientTable {
    assert_eq!(values.len(), domain.len(), "one value per domain point");
    let q = field.q();
    let mut out = CoefficientTable::zero(q);
    for (&value, &point) in values.iter().zip(domain.points()) {
        if value.is_zero() {
            continue;
        }
        let g = interpolation_poly(field, point).expect("domain points are in V");
        for (o, &c) in out.coeffs.iter_mut().zip(&g.table.coeffs) {
            *o = field.add(*o, field.mul(value, c));
        }
    }
    out
}

/// Polynomial in the span of `basis` with the given message as coefficients.
pub fn message_polynomial(
    field: &Field,
    basis: &MonomialBasis,
    message: &[Fe],
) -> CoefficientTable {
    assert_eq!(message.len(), basis.len());
    let mut t = CoefficientTable::zero(field.q());
    for (m, &c) in basis.monomials().iter().zip(message) {
        t.set(m.i, m.j, c);
    }
    t
}

/// The single local parity check of a recovery set: the spanning vector of
/// the dual of the code restricted to the cell, scaled so its first nonzero
/// entry is 1.
pub fn local_parity_vector(
    field: &Field,
    generator: &GeneratorMatrix,
    domain: &EvaluationDomain,
    cell: usize,
) -> Result<Vec<Fe>, ConstructError> {
    let cols: Vec<usize> = domain.cell(cell).collect();
    let restricted = generator.0.select_columns(&cols);
    let dual = restricted.nullspace(field);
    if dual.rows() != 1 {
        return Err(ConstructError::LocalDual {
            cell,
            dim: dual.rows(),
        });
    }
    // rref rows already lead with 1.
    Ok(dual.row(0).to_vec())
}

/// A fully built code.
#[derive(Debug, Clone)]
pub struct LrcCode {
    field: Field,
    params: CodeParams,
    basis: MonomialBasis,
    domain: EvaluationDomain,
    generator: GeneratorMatrix,
    parity: ParityCheckMatrix,
    local_parity: Vec<Vec<Fe>>,
}

impl LrcCode {
    pub fn build(field: Field, r: usize) -> Result<Self, ConstructError> {
        let params = validate_params(&field, r)?;
        let basis = build_monomial_basis(&params);
        let domain = build_domain(&field, &params);
        let generator = build_generator_matrix(&field, &basis, &domain);
        let parity = build_parity_check(&field, &generator);
        Self::assemble(field, params, basis, domain, generator, parity)
    }

    /// Like [`LrcCode::build`], but with externally supplied matrices (for
    /// instance read back from disk). Only shapes are checked.
    pub fn with_matrices(
        field: Field,
        r: usize,
        generator: Matrix,
        parity: Matrix,
    ) -> Result<Self, ConstructError> {
        let params = validate_params(&field, r)?;
        let expect = |m: &Matrix, shape: (usize, usize)| {
            if (m.rows(), m.cols()) == shape {
                Ok(())
            } else {
                Err(ConstructError::Shape {
                    got: (m.rows(), m.cols()),
                    expected: shape,
                })
            }
        };
        expect(&generator, (params.k, params.n))?;
        expect(&parity, (params.n - params.k, params.n))?;
        let basis = build_monomial_basis(&params);
        let domain = build_domain(&field, &params);
        Self::assemble(
            field,
            params,
            basis,
            domain,
            GeneratorMatrix(generator),
            ParityCheckMatrix(parity),
        )
    }

    fn assemble(
        field: Field,
        params: CodeParams,
        basis: MonomialBasis,
        domain: EvaluationDomain,
        generator: GeneratorMatrix,
        parity: ParityCheckMatrix,
    ) -> Result<Self, ConstructError> {
        let local_parity = (0..domain.cell_count())
            .map(|c| local_parity_vector(&field, &generator, &domain, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LrcCode {
            field,
            params,
            basis,
            domain,
            generator,
            parity,
            local_parity,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn domain(&self) -> &EvaluationDomain {
        &self.domain
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn parity(&self) -> &ParityCheckMatrix {
        &self.parity
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn r(&self) -> usize {
        self.params.r
    }

    /// Cached local parity vector of a cell.
    pub fn local_parity(&self, cell: usize) -> &[Fe] {
        &self.local_parity[cell]
    }
}
