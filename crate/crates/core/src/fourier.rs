//! Exact trigonometric polynomials on the unit torus `ℝⁿ/ℤⁿ`.
//!
//! A [`TrigPoly`] is stored as `Σ c · α^a · π^p · e^{2πi k·x}` with integer
//! wavevectors `k` and complex rational `c`. Real-valued functions satisfy
//! `c(−k) = conj(c(k))`. Products add wavevectors, so product-to-sum
//! reduction needs no rewrite rules; `d/dx^j` multiplies by `2πi k_j`.
//!
//! Text format (real form), a sum of terms such as
//!
//! ```text
//! 16*alpha^4*pi^6*sin(2*pi*4*x)*sin(2*pi*2*y)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::complex::Complex;
use num::{One, Signed, Zero};
use thiserror::Error;

use crate::jetcore::parse::Cursor;
use crate::jetcore::{fmt_rational, DiffPoly, Factor, JetVar, ParseError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FourierError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("parameter '{0}' has no value on the torus")]
    UnboundParameter(String),
    #[error("coordinate x{0} is not a periodic function")]
    CoordinateFactor(u8),
    #[error("no value given for P^{{{0}{1}}}")]
    MissingComponent(u8, u8),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

type Cx = Complex<Rational>;

fn cx(re: Rational, im: Rational) -> Cx {
    Complex::new(re, im)
}

fn cx_is_zero(c: &Cx) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// A real monomial coefficient `r · α^a · π^p`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrigCoeff {
    pub rational: Rational,
    pub alpha_power: u32,
    pub pi_power: u32,
}

impl TrigCoeff {
    pub fn is_zero(&self) -> bool {
        self.rational.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Key {
    k: Vec<i64>,
    alpha: u32,
    pi: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigPoly {
    dim: usize,
    terms: BTreeMap<Key, Cx>,
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        TrigPoly::monomial(dim, vec![0; dim], 0, 0, cx(c, Rational::zero()))
    }

    /// The amplitude symbol `α`.
    pub fn alpha(dim: usize) -> Self {
        TrigPoly::monomial(dim, vec![0; dim], 1, 0, cx(Rational::one(), Rational::zero()))
    }

    /// `π` as a symbolic constant.
    pub fn pi(dim: usize) -> Self {
        TrigPoly::monomial(dim, vec![0; dim], 0, 1, cx(Rational::one(), Rational::zero()))
    }

    fn monomial(dim: usize, k: Vec<i64>, alpha: u32, pi: u32, c: Cx) -> Self {
        let mut out = TrigPoly::zero(dim);
        out.add_term(Key { k, alpha, pi }, c);
        out
    }

    fn unit(dim: usize, coord: usize, freq: i64) -> Vec<i64> {
        let mut k = vec![0; dim];
        k[coord - 1] = freq;
        k
    }

    /// `sin(2π·freq·x^coord)`, 1-based `coord`.
    pub fn sin(dim: usize, coord: usize, freq: i64) -> Self {
        let half = Rational::new(1.into(), 2.into());
        let mut out = TrigPoly::zero(dim);
        out.add_term(
            Key {
                k: Self::unit(dim, coord, freq),
                alpha: 0,
                pi: 0,
            },
            cx(Rational::zero(), -half.clone()),
        );
        out.add_term(
            Key {
                k: Self::unit(dim, coord, -freq),
                alpha: 0,
                pi: 0,
            },
            cx(Rational::zero(), half),
        );
        out
    }

    /// `cos(2π·freq·x^coord)`, 1-based `coord`.
    pub fn cos(dim: usize, coord: usize, freq: i64) -> Self {
        let half = Rational::new(1.into(), 2.into());
        let mut out = TrigPoly::zero(dim);
        for f in [freq, -freq] {
            out.add_term(
                Key {
                    k: Self::unit(dim, coord, f),
                    alpha: 0,
                    pi: 0,
                },
                cx(half.clone(), Rational::zero()),
            );
        }
        out
    }

    fn add_term(&mut self, key: Key, c: Cx) {
        if cx_is_zero(&c) {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Cx::zero);
        *e += c;
        if cx_is_zero(e) {
            self.terms.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_dim(&self, other: &TrigPoly) {
        assert_eq!(self.dim, other.dim, "torus dimension mismatch");
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        self.check_dim(other);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, r: &Rational) -> TrigPoly {
        let mut out = TrigPoly::zero(self.dim);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.scale(r.clone()));
        }
        out
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        self.check_dim(other);
        let mut out = TrigPoly::zero(self.dim);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = Key {
                    k: ka.k.iter().zip(&kb.k).map(|(a, b)| a + b).collect(),
                    alpha: ka.alpha + kb.alpha,
                    pi: ka.pi + kb.pi,
                };
                out.add_term(key, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> TrigPoly {
        (0..e).fold(TrigPoly::constant(self.dim, Rational::one()), |acc, _| acc.mul(self))
    }

    /// `d/dx^j`, 1-based `j`.
    pub fn derivative(&self, j: usize) -> TrigPoly {
        let mut out = TrigPoly::zero(self.dim);
        for (key, c) in &self.terms {
            let kj = key.k[j - 1];
            if kj == 0 {
                continue;
            }
            let factor = cx(Rational::zero(), Rational::from_integer((2 * kj).into()));
            let next = Key {
                k: key.k.clone(),
                alpha: key.alpha,
                pi: key.pi + 1,
            };
            out.add_term(next, c * factor);
        }
        out
    }

    pub fn derivative_along(&self, sigma: &[u8]) -> TrigPoly {
        sigma.iter().fold(self.clone(), |acc, &j| acc.derivative(j as usize))
    }

    /// Whether `c(−k) = conj(c(k))` for every term.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(key, c)| {
            let mirror = Key {
                k: key.k.iter().map(|x| -x).collect(),
                alpha: key.alpha,
                pi: key.pi,
            };
            self.terms.get(&mirror) == Some(&c.conj())
        })
    }

    /// Wavevectors carrying a nonzero coefficient.
    pub fn support(&self) -> BTreeSet<Vec<i64>> {
        self.terms.keys().map(|k| k.k.clone()).collect()
    }

    /// Coefficients in the product basis `Π_j {cos, sin}(2π k_j x^j)` with
    /// `k_j ≥ 0`; `None` if the function is not real.
    pub fn real_terms(&self) -> Option<Vec<RealTerm>> {
        let mut acc: BTreeMap<(Vec<TrigFactor>, u32, u32), Cx> = BTreeMap::new();
        for (key, c) in &self.terms {
            // e^{iθ_j} = cos θ_j + i sin θ_j, with sin odd in k_j.
            let mut partial: Vec<(Vec<TrigFactor>, Cx)> = vec![(Vec::new(), c.clone())];
            for (j, &kj) in key.k.iter().enumerate() {
                if kj == 0 {
                    continue;
                }
                let freq = kj.unsigned_abs();
                let sign = Rational::from_integer(kj.signum().into());
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (fs, v) in partial {
                    let mut with_cos = fs.clone();
                    with_cos.push(TrigFactor {
                        kind: TrigKind::Cos,
                        coord: j + 1,
                        freq,
                    });
                    next.push((with_cos, v.clone()));
                    let mut with_sin = fs;
                    with_sin.push(TrigFactor {
                        kind: TrigKind::Sin,
                        coord: j + 1,
                        freq,
                    });
                    next.push((with_sin, v * cx(Rational::zero(), sign.clone())));
                }
                partial = next;
            }
            for (fs, v) in partial {
                *acc.entry((fs, key.alpha, key.pi)).or_insert_with(Cx::zero) += v;
            }
        }
        let mut out = Vec::new();
        for ((factors, alpha, pi), v) in acc {
            if !v.im.is_zero() {
                return None;
            }
            if v.re.is_zero() {
                continue;
            }
            out.push(RealTerm {
                coeff: TrigCoeff {
                    rational: v.re,
                    alpha_power: alpha,
                    pi_power: pi,
                },
                factors,
            });
        }
        out.sort_by(|a, b| {
            let ka: Vec<_> = a.factors.iter().map(|f| (f.coord, f.freq, f.kind)).collect();
            let kb: Vec<_> = b.factors.iter().map(|f| (f.coord, f.freq, f.kind)).collect();
            (a.coeff.alpha_power, a.coeff.pi_power, ka).cmp(&(b.coeff.alpha_power, b.coeff.pi_power, kb))
        });
        Some(out)
    }

    pub fn from_real_terms(dim: usize, terms: &[RealTerm]) -> TrigPoly {
        let mut out = TrigPoly::zero(dim);
        for t in terms {
            let mut p = TrigPoly::alpha(dim)
                .pow(t.coeff.alpha_power)
                .mul(&TrigPoly::pi(dim).pow(t.coeff.pi_power))
                .scale(&t.coeff.rational);
            for f in &t.factors {
                p = p.mul(&f.to_poly(dim));
            }
            out = out.add(&p);
        }
        out
    }

    pub fn parse(text: &str, dim: usize) -> Result<TrigPoly, FourierError> {
        let mut cur = Cursor::new(text);
        let mut out = TrigPoly::zero(dim);
        let mut negative = cur.eat('-');
        if !negative {
            cur.eat('+');
        }
        loop {
            let term = parse_term(&mut cur, dim)?;
            out = if negative { out.sub(&term) } else { out.add(&term) };
            match cur.peek() {
                Some('+') => negative = false,
                Some('-') => negative = true,
                None => break,
                Some(c) => return Err(cur.error(format!("unexpected '{c}'")).into()),
            }
            cur.bump();
        }
        Ok(out)
    }
}

/// Every wavevector is an integer vector by construction, so every
/// `TrigPoly` is periodic for `ℤⁿ`; the support is returned as the report.
pub fn is_lattice_periodic(f: &TrigPoly) -> (bool, BTreeSet<Vec<i64>>) {
    (true, f.support())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// `sin` or `cos` of `2π · freq · x^coord`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrigFactor {
    pub kind: TrigKind,
    pub coord: usize,
    pub freq: u64,
}

impl TrigFactor {
    fn to_poly(&self, dim: usize) -> TrigPoly {
        let f = self.freq as i64;
        match self.kind {
            TrigKind::Sin => TrigPoly::sin(dim, self.coord, f),
            TrigKind::Cos => TrigPoly::cos(dim, self.coord, f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealTerm {
    pub coeff: TrigCoeff,
    pub factors: Vec<TrigFactor>,
}

fn coord_name(j: usize) -> String {
    match j {
        1 => "x".into(),
        2 => "y".into(),
        3 => "z".into(),
        _ => format!("x[{j}]"),
    }
}

impl fmt::Display for TrigFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            TrigKind::Sin => "sin",
            TrigKind::Cos => "cos",
        };
        let x = coord_name(self.coord);
        if self.freq == 1 {
            write!(f, "{name}(2*pi*{x})")
        } else {
            write!(f, "{name}(2*pi*{}*{x})", self.freq)
        }
    }
}

impl fmt::Display for TrigPoly {
    /// Real form; falls back to the exponential listing for complex values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(terms) = self.real_terms() else {
            return write!(f, "<complex {:?}>", self.terms);
        };
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in terms.iter().enumerate() {
            let r = &t.coeff.rational;
            let mag = r.abs();
            if i == 0 {
                if r.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if r.is_negative() { '-' } else { '+' })?;
            }
            let mut parts = Vec::new();
            if !mag.is_one() {
                parts.push(fmt_rational(&mag));
            }
            match t.coeff.alpha_power {
                0 => {}
                1 => parts.push("alpha".into()),
                a => parts.push(format!("alpha^{a}")),
            }
            match t.coeff.pi_power {
                0 => {}
                1 => parts.push("pi".into()),
                p => parts.push(format!("pi^{p}")),
            }
            parts.extend(t.factors.iter().map(|x| x.to_string()));
            if parts.is_empty() {
                parts.push("1".into());
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

fn parse_term(cur: &mut Cursor<'_>, dim: usize) -> Result<TrigPoly, FourierError> {
    let mut term = TrigPoly::constant(dim, Rational::one());
    loop {
        let item = parse_item(cur, dim)?;
        term = term.mul(&item);
        if !cur.eat('*') {
            break;
        }
    }
    Ok(term)
}

fn parse_item(cur: &mut Cursor<'_>, dim: usize) -> Result<TrigPoly, FourierError> {
    let base = match cur.peek() {
        Some(c) if c.is_ascii_digit() => return Ok(TrigPoly::constant(dim, cur.rational()?)),
        Some(c) if c.is_ascii_alphabetic() => {
            let at = cur.here();
            let name = cur.identifier().expect("alphabetic start");
            match name.as_str() {
                "alpha" => TrigPoly::alpha(dim),
                "pi" => TrigPoly::pi(dim),
                "sin" | "cos" => {
                    let (coord, freq) = parse_argument(cur, dim)?;
                    if name == "sin" {
                        TrigPoly::sin(dim, coord, freq)
                    } else {
                        TrigPoly::cos(dim, coord, freq)
                    }
                }
                other => return Err(ParseError::new(at.0, at.1, format!("unknown symbol '{other}'")).into()),
            }
        }
        Some(c) => return Err(cur.error(format!("unexpected '{c}'")).into()),
        None => return Err(cur.error("unexpected end of input").into()),
    };
    if cur.eat('^') {
        let e = cur.unsigned()?;
        Ok(base.pow(e as u32))
    } else {
        Ok(base)
    }
}

/// `(2*pi*[k*]coord)` with an optionally signed integer `k`.
fn parse_argument(cur: &mut Cursor<'_>, dim: usize) -> Result<(usize, i64), FourierError> {
    cur.expect('(')?;
    let at = cur.here();
    if cur.unsigned()? != 2 {
        return Err(ParseError::new(at.0, at.1, "argument must start with '2*pi*'").into());
    }
    cur.expect('*')?;
    let at = cur.here();
    if cur.identifier().as_deref() != Some("pi") {
        return Err(ParseError::new(at.0, at.1, "argument must start with '2*pi*'").into());
    }
    cur.expect('*')?;
    let mut freq = 1;
    if matches!(cur.peek(), Some(c) if c.is_ascii_digit() || c == '-') {
        freq = cur.integer()?;
        cur.expect('*')?;
    }
    let at = cur.here();
    let name = cur.identifier().ok_or_else(|| cur.error("expected a coordinate"))?;
    let coord = match name.as_str() {
        "x" if !cur.eat('[') => 1,
        "x" => {
            let k = cur.unsigned()? as usize;
            cur.expect(']')?;
            k
        }
        "y" => 2,
        "z" => 3,
        _ => 0,
    };
    if coord == 0 || coord > dim {
        return Err(ParseError::new(at.0, at.1, format!("invalid coordinate '{name}' for dimension {dim}")).into());
    }
    cur.expect(')')?;
    Ok((coord, freq))
}

/// Replaces each jet `P^{ij}_σ` by the `σ`-derivative of `values[(i, j)]`
/// (`i < j`) and evaluates with trigonometric arithmetic.
pub fn substitute_table(p: &DiffPoly, values: &BTreeMap<(u8, u8), TrigPoly>) -> Result<TrigPoly, FourierError> {
    let dim = p.dim();
    if let Some(v) = values.values().find(|v| v.dim() != dim) {
        return Err(FourierError::DimensionMismatch {
            left: dim,
            right: v.dim(),
        });
    }
    let mut cache: BTreeMap<JetVar, TrigPoly> = BTreeMap::new();
    let mut out = TrigPoly::zero(dim);
    for (factors, c) in p.terms() {
        let mut term = TrigPoly::constant(dim, c.clone());
        for f in factors {
            let value = match f {
                Factor::Param(name) => return Err(FourierError::UnboundParameter(name.clone())),
                Factor::Coord(k) => return Err(FourierError::CoordinateFactor(*k)),
                Factor::Jet(v) => {
                    if !cache.contains_key(v) {
                        let base = values
                            .get(&(v.i(), v.j()))
                            .ok_or(FourierError::MissingComponent(v.i(), v.j()))?;
                        cache.insert(v.clone(), base.derivative_along(v.sigma().entries()));
                    }
                    &cache[v]
                }
            };
            term = term.mul(value);
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// Two-dimensional substitution `u = P^{12} ↦ u_value`.
pub fn substitute(p: &DiffPoly, u_value: &TrigPoly) -> Result<TrigPoly, FourierError> {
    let mut table = BTreeMap::new();
    table.insert((1, 2), u_value.clone());
    substitute_table(p, &table)
}

/// The 2D torus example: the flow, the potential `H` of the divergence-free
/// trivializing field and that field `(F, G) = (H_y, −H_x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusReport {
    pub u: TrigPoly,
    pub flow: TrigPoly,
    pub potential: TrigPoly,
    pub f: TrigPoly,
    pub g: TrigPoly,
}

impl TorusReport {
    /// `u(F_x + G_y) − u_x F − u_y G − flow`.
    pub fn conjugation_residual(&self) -> TrigPoly {
        let u = &self.u;
        let div = self.f.derivative(1).add(&self.g.derivative(2));
        u.mul(&div)
            .sub(&u.derivative(1).mul(&self.f))
            .sub(&u.derivative(2).mul(&self.g))
            .sub(&self.flow)
    }
}

/// Evaluates the flow and its trivializing field at [`torus_bivector`].
pub fn torus_demo() -> TorusReport {
    let u = torus_bivector();
    let p = crate::schouten::PolyVector::symbolic_bivector(2);
    let flow_poly = crate::tetraflow::gamma1(&p)
        .expect("bivector")
        .single_component()
        .expect("2D bivector");
    let potential_poly = crate::graphs::evaluate(&crate::graphs::GraphSum::single(crate::graphs::potential_graph()), 2)
        .expect("potential graph evaluates")
        .single_component()
        .expect("2D bivector");
    let flow = substitute(&flow_poly, &u).expect("jets only");
    let potential = substitute(&potential_poly, &u).expect("jets only");
    let f = potential.derivative(2);
    let g = potential.derivative(1).scale(&-Rational::one());
    TorusReport {
        u,
        flow,
        potential,
        f,
        g,
    }
}

/// `u = α sin(2πx) cos(2πy)` on the unit 2-torus.
pub fn torus_bivector() -> TrigPoly {
    TrigPoly::alpha(2)
        .mul(&TrigPoly::sin(2, 1, 1))
        .mul(&TrigPoly::cos(2, 2, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcore::{parse_poly, ratio};

    fn t2(s: &str) -> TrigPoly {
        TrigPoly::parse(s, 2).unwrap()
    }

    #[test]
    fn product_to_sum() {
        let s = TrigPoly::sin(1, 1, 1);
        let sq = s.mul(&s);
        let expected = TrigPoly::constant(1, ratio(1, 2)).sub(&TrigPoly::cos(1, 1, 2).scale(&ratio(1, 2)));
        assert_eq!(sq, expected);
        assert_eq!(sq.to_string(), "1/2 - 1/2*cos(2*pi*2*x)");
    }

    #[test]
    fn derivative_of_torus_bivector() {
        let u = torus_bivector();
        assert_eq!(u.derivative(1), t2("2*alpha*pi*cos(2*pi*x)*cos(2*pi*y)"));
        assert!(u.is_real());
        assert_eq!(u.support().len(), 4);
    }

    #[test]
    fn text_round_trip() {
        let text = "16*alpha^4*pi^6*sin(2*pi*2*x)*sin(2*pi*4*y) - 3/2*cos(2*pi*3*x)";
        let f = t2(text);
        assert_eq!(t2(&f.to_string()), f);
        assert_eq!(TrigPoly::from_real_terms(2, &f.real_terms().unwrap()), f);
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = TrigPoly::parse("sin(2*pi*x) + tan(2*pi*y)", 2).unwrap_err();
        assert_eq!(err, FourierError::Parse(ParseError::new(1, 15, "unknown symbol 'tan'")));
        assert!(TrigPoly::parse("sin(2*pi*z)", 2).is_err());
    }

    #[test]
    fn substitution_rejects_unbound_symbols() {
        let u = torus_bivector();
        assert!(matches!(
            substitute(&parse_poly("c*u", 2).unwrap(), &u),
            Err(FourierError::UnboundParameter(_))
        ));
        let sq = substitute(&parse_poly("u^2 + 3", 2).unwrap(), &u).unwrap();
        assert_eq!(sq, u.mul(&u).add(&TrigPoly::constant(2, crate::jetcore::rat(3))));
    }

    const PAPER_UNREDUCED_FLOW: &str = "-128*alpha^4*pi^6*cos(2*pi*x)*cos(2*pi*y)*sin(2*pi*x)^3*sin(2*pi*y)^3 \
        + 128*alpha^4*pi^6*sin(2*pi*x)*sin(2*pi*y)*cos(2*pi*x)^3*cos(2*pi*y)^3";
    const REDUCED_FLOW_BASIS: &str =
        "alpha^4*pi^6*sin(2*pi*4*x)*sin(2*pi*2*y) + alpha^4*pi^6*sin(2*pi*2*x)*sin(2*pi*4*y)";

    #[test]
    fn torus_example() {
        let r = torus_demo();
        assert_eq!(r.flow, t2(PAPER_UNREDUCED_FLOW));
        assert_eq!(r.flow, t2(REDUCED_FLOW_BASIS).scale(&crate::jetcore::rat(8)));
        assert_eq!(r.f, r.potential.derivative(2));
        assert!(r.conjugation_residual().is_zero());
        let expected: BTreeSet<Vec<i64>> = [[4, 2], [2, 4]]
            .iter()
            .flat_map(|&[a, b]| [[a, b], [-a, b], [a, -b], [-a, -b]])
            .map(|k| k.to_vec())
            .collect();
        assert_eq!(r.flow.support(), expected);
    }
}
