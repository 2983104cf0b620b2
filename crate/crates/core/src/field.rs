//! Exact arithmetic in GF(p^m).
//!
//! Elements are packed into a single index: the coefficient vector of the
//! representative polynomial read as a base-p number, constant term as the
//! least significant digit. Index 0 is the additive zero and index 1 the
//! multiplicative one. Multiplication and inversion go through log/antilog
//! tables built once per field.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field order {p}^{m} exceeds 2^16")]
    TooLarge { p: u32, m: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{t} does not divide the group order {order}")]
    NotADivisor { t: usize, order: usize },
    #[error("element index {index} out of range for GF({q})")]
    OutOfRange { index: u64, q: usize },
}

/// A field element, stored as its packed index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serializable description of a finite field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    /// Monic modulus, constant term first, `m + 1` entries.
    pub modulus: Vec<u32>,
    pub q: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AddKind {
    Prime,
    Binary,
    General,
}

/// GF(p^m) with precomputed tables. Immutable once built.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    add_kind: AddKind,
    /// `exp[i] = g^i` for `i < 2(q-1)`, doubled to skip one reduction.
    exp: Vec<u16>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
    primitive: Fe,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomials over GF(p), constant term first, for table construction.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &bc) in b.iter().enumerate() {
            let sub = (factor as u64 * bc as u64 % p as u64) as u32;
            let slot = &mut r[shift + i];
            *slot = (*slot + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and small.
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn digits_of(mut index: usize, p: u32, m: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(m as usize);
    for _ in 0..m {
        out.push((index % p as usize) as u32);
        index /= p as usize;
    }
    out
}

fn index_of(digits: &[u32], p: u32) -> usize {
    digits
        .iter()
        .rev()
        .fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-p
/// digits of `code`.
fn monic_from_code(code: usize, p: u32, deg: u32) -> Vec<u32> {
    let mut poly = digits_of(code, p, deg);
    poly.push(1);
    poly
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = (poly.len() - 1) as u32;
    for d in 1..=deg / 2 {
        let count = (p as usize).pow(d);
        for code in 0..count {
            let divisor = monic_from_code(code, p, d);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `m`, ordered by the packed integer of
/// its lower coefficients (constant term least significant).
fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as usize).pow(m);
    (0..count)
        .map(|code| monic_from_code(code, p, m))
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial of every degree exists")
}

fn mul_slow(a: usize, b: usize, spec: &FieldSpec) -> usize {
    let p = spec.p;
    if spec.m == 1 {
        return a * b % p as usize;
    }
    let da = digits_of(a, p, spec.m);
    let db = digits_of(b, p, spec.m);
    let mut prod = vec![0u32; 2 * spec.m as usize - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let mut rem = poly_rem(&prod, &spec.modulus, p);
    rem.resize(spec.m as usize, 0);
    index_of(&rem, p)
}

fn pow_slow(a: usize, mut e: u64, spec: &FieldSpec) -> usize {
    let mut base = a;
    let mut acc = 1usize;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_slow(acc, base, spec);
        }
        base = mul_slow(base, base, spec);
        e >>= 1;
    }
    acc
}

impl Field {
    /// Builds GF(p^m) using the smallest irreducible modulus of degree `m`.
    pub fn new(p: u32, m: u32) -> Result<Self, FieldError> {
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::TooLarge { p, m })? as usize;
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, m)
        };
        let spec = FieldSpec { p, m, modulus, q };

        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let g = (1..q)
            .find(|&g| factors.iter().all(|&l| pow_slow(g, order / l, &spec) != 1))
            .expect("the multiplicative group of a finite field is cyclic");

        let mut exp = vec![0u16; 2 * (q - 1)];
        let mut log = vec![0u32; q];
        let mut x = 1usize;
        for i in 0..q - 1 {
            exp[i] = x as u16;
            exp[i + q - 1] = x as u16;
            log[x] = i as u32;
            x = mul_slow(x, g, &spec);
        }

        let add_kind = if m == 1 {
            AddKind::Prime
        } else if p == 2 {
            AddKind::Binary
        } else {
            AddKind::General
        };
        Ok(Field {
            spec,
            add_kind,
            exp,
            log,
            primitive: Fe(g as u16),
        })
    }

    /// GF(q) for a prime power `q`.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        if q < 2 {
            return Err(FieldError::NotPrime(q as u32));
        }
        if q > MAX_ORDER {
            let p = prime_factors(q)[0] as u32;
            return Err(FieldError::TooLarge { p, m: 0 });
        }
        let factors = prime_factors(q);
        if factors.len() != 1 {
            return Err(FieldError::NotPrime(q as u32));
        }
        let p = factors[0];
        let mut m = 0u32;
        let mut rest = q;
        while rest > 1 {
            rest /= p;
            m += 1;
        }
        Field::new(p as u32, m)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.spec.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn element(&self, index: u64) -> Result<Fe, FieldError> {
        if index < self.spec.q as u64 {
            Ok(Fe(index as u16))
        } else {
            Err(FieldError::OutOfRange {
                index,
                q: self.spec.q,
            })
        }
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.spec.q).map(|i| Fe(i as u16))
    }

    /// Nonzero elements in index order.
    pub fn units(&self) -> impl Iterator<Item = Fe> {
        (1..self.spec.q).map(|i| Fe(i as u16))
    }

    /// Image of an integer under the canonical map Z -> GF(p).
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.spec.p as i64) as u16)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match self.add_kind {
            AddKind::Binary => Fe(a.0 ^ b.0),
            AddKind::Prime => {
                let s = a.0 as u32 + b.0 as u32;
                let p = self.spec.p;
                Fe(if s >= p { s - p } else { s } as u16)
            }
            AddKind::General => self.digitwise(a, b, |x, y, p| (x + y) % p),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        match self.add_kind {
            AddKind::Binary => a,
            AddKind::Prime => {
                if a.0 == 0 {
                    a
                } else {
                    Fe((self.spec.p - a.0 as u32) as u16)
                }
            }
            AddKind::General => self.digitwise(Fe::ZERO, a, |x, y, p| (x + p - y) % p),
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        match self.add_kind {
            AddKind::Binary => Fe(a.0 ^ b.0),
            AddKind::Prime => self.add(a, self.neg(b)),
            AddKind::General => self.digitwise(a, b, |x, y, p| (x + p - y) % p),
        }
    }

    fn digitwise(&self, a: Fe, b: Fe, op: impl Fn(u32, u32, u32) -> u32) -> Fe {
        let p = self.spec.p;
        let (mut x, mut y) = (a.0 as u32, b.0 as u32);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.spec.m {
            out += op(x % p, y % p, p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Fe(out as u16)
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let l = self.log[a.index()] + self.log[b.index()];
        Fe(self.exp[l as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let order = self.spec.q as u32 - 1;
        let l = (order - self.log[a.index()]) % order;
        Ok(Fe(self.exp[l as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`; negative exponents go through the inverse.
    pub fn pow(&self, a: Fe, e: i64) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => Err(FieldError::DivisionByZero),
                std::cmp::Ordering::Equal => Ok(Fe::ONE),
                std::cmp::Ordering::Greater => Ok(Fe::ZERO),
            };
        }
        let order = self.spec.q as i64 - 1;
        Ok(self.powu(a, e.rem_euclid(order) as u64))
    }

    /// `a^e` for a non-negative exponent.
    pub fn powu(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let order = self.spec.q as u64 - 1;
        let l = self.log[a.index()] as u64 * (e % order) % order;
        Fe(self.exp[l as usize])
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Fe) -> Result<usize, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let group = self.spec.q - 1;
        Ok(group / gcd(group, self.log[a.index()] as usize))
    }

    /// The generator of F_q* with the smallest index.
    pub fn primitive_element(&self) -> Fe {
        self.primitive
    }

    /// `g^i` for the primitive element `g`.
    #[inline]
    pub fn exp(&self, i: usize) -> Fe {
        Fe(self.exp[i % (self.spec.q - 1)])
    }

    /// The subgroup of F_q* of order `t`, listed as consecutive powers of
    /// `g^((q-1)/t)` starting at 1.
    pub fn subgroup_of_order(&self, t: usize) -> Result<Vec<Fe>, FieldError> {
        let group = self.spec.q - 1;
        if t == 0 || !group.is_multiple_of(t) {
            return Err(FieldError::NotADivisor { t, order: group });
        }
        let step = group / t;
        Ok((0..t).map(|s| self.exp(s * step)).collect())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
