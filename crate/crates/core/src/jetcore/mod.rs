//! Differential polynomials in the jet variables of a skew-symmetric bivector.
//!
//! A [`DiffPoly`] is a polynomial with exact rational coefficients whose
//! variables ([`Factor`]s) are
//!
//! * jet variables `P^{ij}_σ` ([`JetVar`]), the `σ`-th partial derivative of a
//!   bivector coefficient,
//! * affine coordinates `x^k`, used for concrete (polynomial) bivectors,
//! * named constant parameters, used for undetermined coefficients and for
//!   the free constants of solution families.
//!
//! Total derivatives act on jets by extending the multi-index, on coordinates
//! by `d/dx^k x^l = δ_kl`, and annihilate parameters.

pub(crate) mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

pub use parse::{parse_poly, ParseError};

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

/// Shorthand for an integer-valued [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("coordinate index {index} out of range for dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Sorted multiset of coordinate indices (1-based) to differentiate by.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(mut entries: Vec<u8>) -> Self {
        entries.sort_unstable();
        MultiIndex(entries)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    /// Multiplicity of coordinate `k`.
    pub fn count(&self, k: u8) -> usize {
        self.0.iter().filter(|&&e| e == k).count()
    }

    /// `σ ∪ {k}`.
    pub fn with(&self, k: u8) -> Self {
        let pos = self.0.partition_point(|&e| e <= k);
        let mut entries = self.0.clone();
        entries.insert(pos, k);
        MultiIndex(entries)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The jet variable `P^{ij}_σ`, always stored with `i < j`.
///
/// Ordering is by `(i, j)`, then by `|σ|`, then lexicographically by `σ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVar {
    i: u8,
    j: u8,
    sigma: MultiIndex,
}

impl JetVar {
    /// Canonicalizes `P^{ij}_σ`: returns the sign picked up by swapping to
    /// `i < j`, or `None` when `i == j` (the coefficient is zero).
    pub fn new(i: u8, j: u8, sigma: MultiIndex) -> Option<(i8, JetVar)> {
        match i.cmp(&j) {
            Ordering::Less => Some((1, JetVar { i, j, sigma })),
            Ordering::Greater => Some((-1, JetVar { i: j, j: i, sigma })),
            Ordering::Equal => None,
        }
    }

    pub fn i(&self) -> u8 {
        self.i
    }

    pub fn j(&self) -> u8 {
        self.j
    }

    pub fn sigma(&self) -> &MultiIndex {
        &self.sigma
    }

    pub fn order(&self) -> usize {
        self.sigma.order()
    }

    fn differentiated(&self, k: u8) -> JetVar {
        JetVar {
            i: self.i,
            j: self.j,
            sigma: self.sigma.with(k),
        }
    }
}

/// A single variable of a differential polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// Named constant; killed by every total derivative.
    Param(String),
    /// Affine coordinate `x^k`.
    Coord(u8),
    Jet(JetVar),
}

impl Factor {
    pub fn as_jet(&self) -> Option<&JetVar> {
        match self {
            Factor::Jet(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_param(&self) -> Option<&str> {
        match self {
            Factor::Param(name) => Some(name),
            _ => None,
        }
    }
}

/// A coefficient times a sorted multiset of factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn new(coeff: Rational, mut factors: Vec<Factor>) -> Self {
        factors.sort();
        Monomial { coeff, factors }
    }

    pub fn jets(&self) -> impl Iterator<Item = &JetVar> {
        self.factors.iter().filter_map(Factor::as_jet)
    }
}

/// `wt_k`: total multiplicity of coordinate `k` across the jet factors.
pub fn weight(m: &Monomial, k: u8) -> usize {
    m.jets().map(|v| v.sigma.count(k)).sum()
}

/// Polynomial in [`Factor`]s with exact rational coefficients.
///
/// Terms are kept in a map from the sorted factor multiset to a nonzero
/// coefficient, so structural equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffPoly {
    dim: usize,
    terms: BTreeMap<Vec<Factor>, Rational>,
}

impl DiffPoly {
    pub fn zero(dim: usize) -> Self {
        DiffPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        let mut p = DiffPoly::zero(dim);
        p.add_term(Vec::new(), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        DiffPoly::constant(dim, Rational::one())
    }

    /// The jet `P^{ij}_σ` with skew-symmetry applied (`i == j` gives zero).
    pub fn jet(dim: usize, i: u8, j: u8, sigma: MultiIndex) -> Self {
        match JetVar::new(i, j, sigma) {
            Some((sign, v)) => DiffPoly::from_monomial(dim, rat(sign.into()), vec![Factor::Jet(v)]),
            None => DiffPoly::zero(dim),
        }
    }

    /// The 2D alias `u_σ = P^{12}_σ`.
    pub fn u(sigma: &[u8]) -> Self {
        DiffPoly::jet(2, 1, 2, MultiIndex::new(sigma.to_vec()))
    }

    pub fn coord(dim: usize, k: u8) -> Self {
        DiffPoly::from_monomial(dim, Rational::one(), vec![Factor::Coord(k)])
    }

    pub fn param(dim: usize, name: &str) -> Self {
        DiffPoly::from_monomial(dim, Rational::one(), vec![Factor::Param(name.to_owned())])
    }

    pub fn from_monomial(dim: usize, coeff: Rational, mut factors: Vec<Factor>) -> Self {
        factors.sort();
        let mut p = DiffPoly::zero(dim);
        p.add_term(factors, coeff);
        p
    }

    pub fn from_monomials(dim: usize, monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut p = DiffPoly::zero(dim);
        for m in monomials {
            let mut factors = m.factors;
            factors.sort();
            p.add_term(factors, m.coeff);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending key order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[Factor], &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|(k, v)| Monomial {
            coeff: v.clone(),
            factors: k.clone(),
        })
    }

    /// Coefficient of the monomial with exactly these (sorted) factors.
    pub fn coeff_of(&self, factors: &[Factor]) -> Rational {
        self.terms.get(factors).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c * factors`; `factors` must already be sorted.
    fn add_term(&mut self, factors: Vec<Factor>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(factors) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Re-sorts every factor list and merges; a no-op on values built
    /// through this API.
    pub fn normalized(&self) -> Self {
        DiffPoly::from_monomials(self.dim, self.monomials())
    }

    fn check_dim(&self, other: &DiffPoly) -> Result<(), JetError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(JetError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn checked_add(&self, other: &DiffPoly) -> Result<DiffPoly, JetError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &DiffPoly) -> Result<DiffPoly, JetError> {
        self.check_dim(other)?;
        let mut out = DiffPoly::zero(self.dim);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                out.add_term(merge_sorted(ka, kb), va * vb);
            }
        }
        Ok(out)
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, other: &DiffPoly, c: &Rational) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        let mut out = DiffPoly::zero(self.dim);
        out.add_scaled(self, c);
        out
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut out = DiffPoly::one(self.dim);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Total derivative `d/dx^k` (Leibniz rule over factors).
    pub fn total_derivative(&self, k: usize) -> Result<DiffPoly, JetError> {
        if k == 0 || k > self.dim {
            return Err(JetError::CoordinateOutOfRange {
                index: k,
                dim: self.dim,
            });
        }
        let k = k as u8;
        let mut out = DiffPoly::zero(self.dim);
        for (factors, c) in &self.terms {
            for (pos, f) in factors.iter().enumerate() {
                // Consecutive equal factors give equal summands; count them once.
                if pos > 0 && factors[pos - 1] == *f {
                    continue;
                }
                let mult = factors[pos..].iter().take_while(|g| *g == f).count();
                let replacement = match f {
                    Factor::Param(_) => continue,
                    Factor::Coord(l) if *l == k => None,
                    Factor::Coord(_) => continue,
                    Factor::Jet(v) => Some(Factor::Jet(v.differentiated(k))),
                };
                let mut rest = factors.clone();
                rest.remove(pos);
                if let Some(r) = replacement {
                    let at = rest.partition_point(|g| g < &r);
                    rest.insert(at, r);
                }
                out.add_term(rest, c * rat(mult as i64));
            }
        }
        Ok(out)
    }

    /// Iterated total derivative along a multi-index.
    pub fn derivative_along(&self, sigma: &MultiIndex) -> Result<DiffPoly, JetError> {
        let mut out = self.clone();
        for &k in sigma.entries() {
            out = out.total_derivative(k as usize)?;
        }
        Ok(out)
    }

    /// Names of the parameters that occur in the polynomial, sorted.
    pub fn params(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .terms
            .keys()
            .flat_map(|k| k.iter().filter_map(|f| f.as_param().map(str::to_owned)))
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Substitutes a rational value for a parameter.
    pub fn set_param(&self, name: &str, value: &Rational) -> DiffPoly {
        let mut out = DiffPoly::zero(self.dim);
        for (k, v) in &self.terms {
            let mut c = v.clone();
            let mut rest = Vec::with_capacity(k.len());
            for f in k {
                match f {
                    Factor::Param(p) if p == name => c *= value,
                    other => rest.push(other.clone()),
                }
            }
            out.add_term(rest, c);
        }
        out
    }

    /// Splits off the parameters: returns `(param-free part, {param: coefficient})`.
    /// Fails if some term is nonlinear in the parameters.
    pub fn linear_in_params(&self) -> Option<(DiffPoly, BTreeMap<String, DiffPoly>)> {
        let mut constant = DiffPoly::zero(self.dim);
        let mut by_param: BTreeMap<String, DiffPoly> = BTreeMap::new();
        for (k, v) in &self.terms {
            let params: Vec<&Factor> = k.iter().filter(|f| f.as_param().is_some()).collect();
            let rest: Vec<Factor> = k.iter().filter(|f| f.as_param().is_none()).cloned().collect();
            match params.as_slice() {
                [] => constant.add_term(rest, v.clone()),
                [Factor::Param(name)] => by_param
                    .entry(name.clone())
                    .or_insert_with(|| DiffPoly::zero(self.dim))
                    .add_term(rest, v.clone()),
                _ => return None,
            }
        }
        Some((constant, by_param))
    }

    /// Same polynomial reinterpreted in another dimension (used to lift 2D
    /// formulas into the uniform `P[i,j]` representation of higher `n`).
    pub fn with_dim(&self, dim: usize) -> DiffPoly {
        DiffPoly {
            dim,
            terms: self.terms.clone(),
        }
    }
}

fn merge_sorted(a: &[Factor], b: &[Factor]) -> Vec<Factor> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i].clone());
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn poly_add(p: &DiffPoly, q: &DiffPoly) -> Result<DiffPoly, JetError> {
    p.checked_add(q)
}

pub fn poly_mul(p: &DiffPoly, q: &DiffPoly) -> Result<DiffPoly, JetError> {
    p.checked_mul(q)
}

pub fn total_derivative(p: &DiffPoly, k: usize) -> Result<DiffPoly, JetError> {
    p.total_derivative(k)
}

// Operator sugar. These panic on a dimension mismatch; use the `checked_*`
// methods where the dimensions come from user input.

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        self.checked_add(rhs).expect("DiffPoly addition")
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: DiffPoly) -> DiffPoly {
        &self + &rhs
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: DiffPoly) -> DiffPoly {
        &self - &rhs
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.checked_mul(rhs).expect("DiffPoly multiplication")
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&-Rational::one())
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

// ---------------------------------------------------------------------------
// Printing

const AXES: [char; 3] = ['x', 'y', 'z'];

pub(crate) fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_factor(f: &Factor, dim: usize) -> String {
    match f {
        Factor::Param(name) => name.clone(),
        Factor::Coord(k) if (*k as usize) <= AXES.len() => AXES[*k as usize - 1].to_string(),
        Factor::Coord(k) => format!("x[{k}]"),
        Factor::Jet(v) if dim == 2 => {
            if v.sigma.order() == 0 {
                "u".to_owned()
            } else {
                let letters: String = v.sigma.entries().iter().map(|&e| AXES[e as usize - 1]).collect();
                format!("u_{letters}")
            }
        }
        Factor::Jet(v) => {
            if v.sigma.order() == 0 {
                format!("P[{},{}]", v.i, v.j)
            } else {
                let digits: String = v.sigma.entries().iter().map(|e| e.to_string()).collect();
                format!("P[{},{};{}]", v.i, v.j, digits)
            }
        }
    }
}

/// Factor product in display order: parameters, coordinates, then jets by
/// decreasing derivative order. Repeated factors print as powers.
fn fmt_factors(factors: &[Factor], dim: usize) -> String {
    let split = factors.partition_point(|f| !matches!(f, Factor::Jet(_)));
    let mut jets: Vec<&Factor> = factors[split..].iter().collect();
    jets.sort_by_key(|f| std::cmp::Reverse(f.as_jet().map_or(0, JetVar::order)));
    let ordered = factors[..split].iter().chain(jets);
    let mut parts: Vec<String> = Vec::new();
    let mut last: Option<&Factor> = None;
    let mut run = 0u32;
    let flush = |f: Option<&Factor>, run: u32, parts: &mut Vec<String>| {
        if let Some(f) = f {
            let s = fmt_factor(f, dim);
            parts.push(if run > 1 { format!("{s}^{run}") } else { s });
        }
    };
    for f in ordered {
        if Some(f) == last {
            run += 1;
        } else {
            flush(last, run, &mut parts);
            last = Some(f);
            run = 1;
        }
    }
    flush(last, run, &mut parts);
    parts.join("*")
}

impl fmt::Display for DiffPoly {
    /// Terms print in descending key order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (factors, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let body = fmt_factors(factors, self.dim);
            if body.is_empty() {
                write!(f, "{}", fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{body}")?;
            } else {
                write!(f, "{}*{body}", fmt_rational(&abs))?;
            }
        }
        Ok(())
    }
}
