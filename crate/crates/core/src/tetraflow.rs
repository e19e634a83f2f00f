//! The tetrahedral differential polynomials
//!
//! ```text
//! Γ₁^{ij} = Σ P^{ij}_{klm} P^{kk'}_{l'} P^{ll'}_{m'} P^{mm'}_{k'}
//! Γ₂^{im} = Σ P^{ij}_{kl} P^{km}_{k'l'} P^{k'l}_{m'} P^{m'l'}_{j}
//! ```
//!
//! summed over all repeated indices in `1..=n`, and the flow
//! `Q_{a:b} = a Γ₁ + b · ½(Γ₂^{im} − Γ₂^{mi})`.

use std::collections::HashMap;

use num::One;

use crate::jetcore::{rat, ratio, DiffPoly, MultiIndex, Rational};
use crate::schouten::{PolyVector, SchoutenError};

/// Balance `a : b` of the combined flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSpec {
    pub a: Rational,
    pub b: Rational,
}

impl FlowSpec {
    pub fn new(a: Rational, b: Rational) -> Self {
        FlowSpec { a, b }
    }
}

/// Memoized `P^{ij}_σ`, computed by total differentiation of the
/// components of `P`. Zero for `i == j`.
pub struct JetTable<'a> {
    p: &'a PolyVector,
    cache: HashMap<(u8, u8, MultiIndex), DiffPoly>,
}

impl<'a> JetTable<'a> {
    pub fn new(p: &'a PolyVector) -> Result<Self, SchoutenError> {
        p.expect_degree(2)?;
        Ok(JetTable {
            p,
            cache: HashMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn get(&mut self, i: u8, j: u8, sigma: &[u8]) -> DiffPoly {
        let sigma = MultiIndex::new(sigma.to_vec());
        if i == j {
            return DiffPoly::zero(self.p.dim());
        }
        if i > j {
            return -self.get(j, i, sigma.entries());
        }
        let key = (i, j, sigma);
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let value = self
            .p
            .get_raw(&[i, j])
            .derivative_along(&key.2)
            .expect("indices within dimension");
        self.cache.insert(key, value.clone());
        value
    }
}

/// Square table of `Γ₂^{im}`; not skew-symmetric in general.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gamma2Table {
    dim: usize,
    entries: Vec<DiffPoly>,
}

impl Gamma2Table {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ₂^{im}` for 1-based `i`, `m`.
    pub fn get(&self, i: usize, m: usize) -> &DiffPoly {
        &self.entries[(i - 1) * self.dim + (m - 1)]
    }
}

fn product4(a: &DiffPoly, b: &DiffPoly, c: &DiffPoly, d: &DiffPoly) -> DiffPoly {
    &(&(a * b) * c) * d
}

/// One nonzero summand of `Γ₁^{ij}`: the index tuple `(k,l,m,k',l',m')`
/// and its value.
pub type Contribution = ([u8; 6], DiffPoly);

/// The nonzero summands of `Γ₁^{ij}`, skipping every index assignment that
/// hits a diagonal coefficient `P^{aa}`.
pub fn gamma1_contributions(p: &PolyVector, i: u8, j: u8) -> Result<Vec<Contribution>, SchoutenError> {
    let mut jets = JetTable::new(p)?;
    let n = p.dim() as u8;
    let mut out = Vec::new();
    if i == j {
        return Ok(out);
    }
    for k in 1..=n {
        for l in 1..=n {
            for m in 1..=n {
                let top = jets.get(i, j, &[k, l, m]);
                if top.is_zero() {
                    continue;
                }
                for kp in (1..=n).filter(|&kp| kp != k) {
                    for lp in (1..=n).filter(|&lp| lp != l) {
                        for mp in (1..=n).filter(|&mp| mp != m) {
                            let f2 = jets.get(k, kp, &[lp]);
                            let f3 = jets.get(l, lp, &[mp]);
                            let f4 = jets.get(m, mp, &[kp]);
                            let v = product4(&top, &f2, &f3, &f4);
                            if !v.is_zero() {
                                out.push(([k, l, m, kp, lp, mp], v));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Γ₁(P)` as a bivector.
pub fn gamma1(p: &PolyVector) -> Result<PolyVector, SchoutenError> {
    p.expect_degree(2)?;
    let n = p.dim();
    let mut out = PolyVector::zero(2, n);
    for i in 1..=n as u8 {
        for j in i + 1..=n as u8 {
            let mut sum = DiffPoly::zero(n);
            for (_, v) in gamma1_contributions(p, i, j)? {
                sum.add_scaled(&v, &Rational::one());
            }
            out.set(&[i as usize, j as usize], sum)?;
        }
    }
    Ok(out)
}

/// The raw table `Γ₂^{im}`, both orders kept.
pub fn gamma2(p: &PolyVector) -> Result<Gamma2Table, SchoutenError> {
    let mut jets = JetTable::new(p)?;
    let n = p.dim() as u8;
    let mut entries = Vec::with_capacity((n as usize).pow(2));
    for i in 1..=n {
        for m in 1..=n {
            let mut sum = DiffPoly::zero(n as usize);
            for j in (1..=n).filter(|&j| j != i) {
                for k in (1..=n).filter(|&k| k != m) {
                    for l in 1..=n {
                        let f1 = jets.get(i, j, &[k, l]);
                        if f1.is_zero() {
                            continue;
                        }
                        for kp in (1..=n).filter(|&kp| kp != l) {
                            for lp in 1..=n {
                                let f2 = jets.get(k, m, &[kp, lp]);
                                if f2.is_zero() {
                                    continue;
                                }
                                for mp in (1..=n).filter(|&mp| mp != lp) {
                                    let f3 = jets.get(kp, l, &[mp]);
                                    let f4 = jets.get(mp, lp, &[j]);
                                    sum.add_scaled(&product4(&f1, &f2, &f3, &f4), &Rational::one());
                                }
                            }
                        }
                    }
                }
            }
            entries.push(sum);
        }
    }
    Ok(Gamma2Table {
        dim: n as usize,
        entries,
    })
}

/// `½(Γ₂^{im} − Γ₂^{mi})` as a bivector.
pub fn gamma2_skew(p: &PolyVector) -> Result<PolyVector, SchoutenError> {
    let table = gamma2(p)?;
    skew_part(&table)
}

pub fn skew_part(table: &Gamma2Table) -> Result<PolyVector, SchoutenError> {
    let n = table.dim();
    let mut out = PolyVector::zero(2, n);
    for i in 1..=n {
        for m in i + 1..=n {
            let v = (table.get(i, m) - table.get(m, i)).scale(&ratio(1, 2));
            out.set(&[i, m], v)?;
        }
    }
    Ok(out)
}

/// `a Γ₁(P) + b Γ₂-skew(P)`.
pub fn flow(spec: &FlowSpec, p: &PolyVector) -> Result<PolyVector, SchoutenError> {
    let mut out = PolyVector::zero(2, p.dim());
    if spec.a != rat(0) {
        out.add_scaled(&gamma1(p)?, &spec.a);
    }
    if spec.b != rat(0) {
        out.add_scaled(&gamma2_skew(p)?, &spec.b);
    }
    Ok(out)
}
