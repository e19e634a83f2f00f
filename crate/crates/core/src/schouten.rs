//! Polyvector fields with [`DiffPoly`] coefficients and the Schouten bracket.
//!
//! A `p`-vector is stored as `Σ_{i₁<…<i_p} A^{i₁…i_p} ∂_{i₁}∧…∧∂_{i_p}`. In
//! odd-coordinate notation (`ξ_i` for `∂_i`) the bracket is
//!
//! ```text
//! [[A, B]] = Σ_k (A ∂⃖_{x^k})(∂⃗_{ξ_k} B) − (A ∂⃖_{ξ_k})(∂⃗_{x^k} B)
//! ```
//!
//! which is the sign convention giving, for a 2D bivector `P = u ∂_x∧∂_y`
//! and `X = F ∂_x + G ∂_y`, the single component
//! `[[P, X]]^{12} = u_x F + u_y G − u (F_x + G_y)`.
//! On vector fields this convention yields `[[X, Y]] = Y(X) − X(Y)`.

use std::collections::BTreeMap;
use std::fmt;

use num::One;
use thiserror::Error;

use crate::jetcore::parse::Cursor;
use crate::jetcore::{parse_poly, rat, DiffPoly, JetError, ParseError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchoutenError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected a {expected}-vector, got degree {found}")]
    Degree { expected: usize, found: usize },
    #[error("bracket of two functions is undefined")]
    FunctionBracket,
    #[error("component index {index:?} invalid for dimension {dim}")]
    BadIndex { index: Vec<usize>, dim: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Sign of the permutation sorting `idx`, or `None` when an index repeats.
pub fn sort_sign(idx: &[u8]) -> Option<(i8, Vec<u8>)> {
    let mut v = idx.to_vec();
    let mut sign = 1i8;
    // Insertion sort counting transpositions.
    for a in 1..v.len() {
        let mut b = a;
        while b > 0 && v[b - 1] > v[b] {
            v.swap(b - 1, b);
            sign = -sign;
            b -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((sign, v))
    }
}

/// `ξ_I ξ_J` for sorted `I`, `J`: the sign and sorted union, or `None` if
/// they share an index.
fn wedge_indices(a: &[u8], b: &[u8]) -> Option<(i8, Vec<u8>)> {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return None;
            }
            if x > y {
                inversions += 1;
            }
        }
    }
    let mut out: Vec<u8> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    Some((if inversions.is_multiple_of(2) { 1 } else { -1 }, out))
}

/// Degree-`p` polyvector field in dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVector {
    degree: usize,
    dim: usize,
    components: BTreeMap<Vec<u8>, DiffPoly>,
}

impl PolyVector {
    pub fn zero(degree: usize, dim: usize) -> Self {
        PolyVector {
            degree,
            dim,
            components: BTreeMap::new(),
        }
    }

    pub fn scalar(f: DiffPoly) -> Self {
        let mut v = PolyVector::zero(0, f.dim());
        v.insert(Vec::new(), f);
        v
    }

    /// Vector field from its `n` components.
    pub fn vector(components: Vec<DiffPoly>) -> Result<Self, SchoutenError> {
        let dim = components.len();
        let mut v = PolyVector::zero(1, dim);
        for (k, c) in components.into_iter().enumerate() {
            v.set(&[k + 1], c)?;
        }
        Ok(v)
    }

    /// The generic bivector `P^{ij}` with every coefficient a free jet.
    pub fn symbolic_bivector(dim: usize) -> Self {
        let mut p = PolyVector::zero(2, dim);
        for i in 1..=dim as u8 {
            for j in i + 1..=dim as u8 {
                p.insert(vec![i, j], DiffPoly::jet(dim, i, j, Default::default()));
            }
        }
        p
    }

    /// Nambu bivector `P^{ij} = ε^{ijk} ∂_k g` in three dimensions.
    pub fn nambu(g: &DiffPoly) -> Result<Self, SchoutenError> {
        if g.dim() != 3 {
            return Err(SchoutenError::DimensionMismatch {
                left: g.dim(),
                right: 3,
            });
        }
        let mut p = PolyVector::zero(2, 3);
        for (i, j, k) in [(1, 2, 3), (1, 3, 2), (2, 3, 1)] {
            let sign = if (i, j, k) == (1, 3, 2) { -1 } else { 1 };
            p.set(&[i, j], g.total_derivative(k)?.scale(&rat(sign)))?;
        }
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Nonzero components, keyed by strictly increasing 1-based indices.
    pub fn components(&self) -> impl Iterator<Item = (&[u8], &DiffPoly)> {
        self.components.iter().map(|(k, v)| (k.as_slice(), v))
    }

    fn insert(&mut self, key: Vec<u8>, value: DiffPoly) {
        if value.is_zero() {
            self.components.remove(&key);
        } else {
            self.components.insert(key, value);
        }
    }

    fn check_index(&self, idx: &[usize]) -> Result<Vec<u8>, SchoutenError> {
        if idx.len() != self.degree || idx.iter().any(|&i| i == 0 || i > self.dim) {
            return Err(SchoutenError::BadIndex {
                index: idx.to_vec(),
                dim: self.dim,
            });
        }
        Ok(idx.iter().map(|&i| i as u8).collect())
    }

    /// Component for an arbitrary index tuple: permutation sign applied,
    /// zero for repeated indices.
    pub fn get(&self, idx: &[usize]) -> Result<DiffPoly, SchoutenError> {
        let raw = self.check_index(idx)?;
        Ok(self.get_raw(&raw))
    }

    pub(crate) fn get_raw(&self, idx: &[u8]) -> DiffPoly {
        match sort_sign(idx) {
            Some((sign, key)) => match self.components.get(&key) {
                Some(c) if sign > 0 => c.clone(),
                Some(c) => -c,
                None => DiffPoly::zero(self.dim),
            },
            None => DiffPoly::zero(self.dim),
        }
    }

    /// Sets the component for an index tuple (the stored increasing
    /// component absorbs the permutation sign).
    pub fn set(&mut self, idx: &[usize], value: DiffPoly) -> Result<(), SchoutenError> {
        let raw = self.check_index(idx)?;
        if value.dim() != self.dim {
            return Err(SchoutenError::DimensionMismatch {
                left: self.dim,
                right: value.dim(),
            });
        }
        match sort_sign(&raw) {
            Some((1, key)) => self.insert(key, value),
            Some((_, key)) => self.insert(key, -value),
            None if value.is_zero() => {}
            None => {
                return Err(SchoutenError::BadIndex {
                    index: idx.to_vec(),
                    dim: self.dim,
                })
            }
        }
        Ok(())
    }

    fn same_shape(&self, other: &PolyVector) -> Result<(), SchoutenError> {
        if self.dim != other.dim {
            return Err(SchoutenError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(SchoutenError::Degree {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &PolyVector) -> Result<PolyVector, SchoutenError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        Ok(out)
    }

    pub fn checked_sub(&self, other: &PolyVector) -> Result<PolyVector, SchoutenError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        Ok(out)
    }

    /// `self += c * other`; shapes must agree.
    pub fn add_scaled(&mut self, other: &PolyVector, c: &Rational) {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        for (k, v) in &other.components {
            let mut cur = self.components.remove(k).unwrap_or_else(|| DiffPoly::zero(self.dim));
            cur.add_scaled(v, c);
            self.insert(k.clone(), cur);
        }
    }

    pub fn scale(&self, c: &Rational) -> PolyVector {
        self.map(|p| p.scale(c))
    }

    /// Multiplies every component by a function.
    pub fn mul_poly(&self, f: &DiffPoly) -> PolyVector {
        self.map(|p| p * f)
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> PolyVector {
        let mut out = PolyVector::zero(self.degree, self.dim);
        for (k, v) in &self.components {
            out.insert(k.clone(), f(v));
        }
        out
    }

    /// The only component of a top-degree (or scalar) polyvector.
    pub fn single_component(&self) -> Option<DiffPoly> {
        if self.component_slots() == 1 {
            let key: Vec<u8> = (1..=self.degree as u8).collect();
            Some(self.get_raw(&key))
        } else {
            None
        }
    }

    /// Number of independent components, `C(n, p)`.
    pub fn component_slots(&self) -> usize {
        binomial(self.dim, self.degree)
    }

    pub fn expect_degree(&self, degree: usize) -> Result<(), SchoutenError> {
        if self.degree == degree {
            Ok(())
        } else {
            Err(SchoutenError::Degree {
                expected: degree,
                found: self.degree,
            })
        }
    }

    /// Parses the polyvector text format: a `degree dim` header, then one
    /// `i1 ... ip : <polynomial>` line per component. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<PolyVector, SchoutenError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, 1, "missing 'degree dim' header"))?;
        let mut cur = Cursor::new(header);
        let degree = cur.unsigned().map_err(|e| e.offset(hline, 0))? as usize;
        let dim = cur.unsigned().map_err(|e| e.offset(hline, 0))? as usize;
        if !cur.at_end() || dim == 0 {
            return Err(ParseError::new(hline + 1, 1, "header must be 'degree dim'").into());
        }
        let mut out = PolyVector::zero(degree, dim);
        for (ln, line) in lines {
            let (idx_part, poly_part) = line
                .split_once(':')
                .ok_or_else(|| ParseError::new(ln + 1, 1, "expected 'indices : polynomial'"))?;
            let mut cur = Cursor::new(idx_part);
            let mut idx = Vec::new();
            while !cur.at_end() {
                let i = cur.unsigned().map_err(|e| e.offset(ln, 0))? as usize;
                idx.push(i);
            }
            if idx.len() != degree || idx.iter().any(|&i| i == 0 || i > dim) {
                return Err(ParseError::new(ln + 1, 1, format!("bad component index {idx:?}")).into());
            }
            let poly = parse_poly(poly_part, dim).map_err(|e| e.offset(ln, idx_part.len() + 1))?;
            let prev = out.get(&idx)?;
            out.set(&idx, &prev + &poly)?;
        }
        Ok(out)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl fmt::Display for PolyVector {
    /// The polyvector text format accepted by [`PolyVector::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.degree, self.dim)?;
        for (k, v) in &self.components {
            let idx: Vec<String> = k.iter().map(|i| i.to_string()).collect();
            write!(f, "\n{} : {}", idx.join(" "), v)?;
        }
        Ok(())
    }
}

/// The Schouten bracket `[[A, B]]`, of degree `p + q − 1`.
pub fn schouten_bracket(a: &PolyVector, b: &PolyVector) -> Result<PolyVector, SchoutenError> {
    if a.dim != b.dim {
        return Err(SchoutenError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    if a.degree + b.degree == 0 {
        return Err(SchoutenError::FunctionBracket);
    }
    let n = a.dim;
    let p = a.degree;
    let mut out: BTreeMap<Vec<u8>, DiffPoly> = BTreeMap::new();
    let mut acc = |key: Vec<u8>, val: DiffPoly, sign: i8| {
        let slot = out.entry(key).or_insert_with(|| DiffPoly::zero(n));
        slot.add_scaled(&val, &rat(sign.into()));
    };

    for k in 1..=n as u8 {
        // (A ∂⃖_{x^k}) (∂⃗_{ξ_k} B)
        for (ia, ca) in &a.components {
            let da = ca.total_derivative(k as usize)?;
            if da.is_zero() {
                continue;
            }
            for (jb, cb) in &b.components {
                let Some(r) = jb.iter().position(|&e| e == k) else {
                    continue;
                };
                let left_sign: i8 = if r % 2 == 0 { 1 } else { -1 };
                let mut rest = jb.clone();
                rest.remove(r);
                if let Some((ws, key)) = wedge_indices(ia, &rest) {
                    acc(key, &da * cb, left_sign * ws);
                }
            }
        }
        // −(A ∂⃖_{ξ_k}) (∂⃗_{x^k} B)
        for (ia, ca) in &a.components {
            let Some(r) = ia.iter().position(|&e| e == k) else {
                continue;
            };
            let right_sign: i8 = if (p - 1 - r).is_multiple_of(2) { 1 } else { -1 };
            let mut rest = ia.clone();
            rest.remove(r);
            for (jb, cb) in &b.components {
                let db = cb.total_derivative(k as usize)?;
                if db.is_zero() {
                    continue;
                }
                if let Some((ws, key)) = wedge_indices(&rest, jb) {
                    acc(key, ca * &db, -right_sign * ws);
                }
            }
        }
    }

    let mut result = PolyVector::zero(a.degree + b.degree - 1, n);
    for (k, v) in out {
        result.insert(k, v);
    }
    Ok(result)
}

/// `∂_P A = [[P, A]]`.
pub fn poisson_differential(p: &PolyVector, a: &PolyVector) -> Result<PolyVector, SchoutenError> {
    p.expect_degree(2)?;
    schouten_bracket(p, a)
}

/// `[[P, P]]`; vanishes exactly when `P` satisfies the Jacobi identity.
pub fn jacobiator(p: &PolyVector) -> Result<PolyVector, SchoutenError> {
    p.expect_degree(2)?;
    schouten_bracket(p, p)
}

/// `Σ_k d/dx^k X^k`.
pub fn divergence(x: &PolyVector) -> Result<DiffPoly, SchoutenError> {
    x.expect_degree(1)?;
    let mut out = DiffPoly::zero(x.dim);
    for k in 1..=x.dim {
        out = &out + &x.get(&[k])?.total_derivative(k)?;
    }
    Ok(out)
}
