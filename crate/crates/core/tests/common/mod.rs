#![allow(dead_code)]

use std::collections::BTreeMap;

use itertools::Itertools;
use kflow::jetcore::{rat, ratio};
use kflow::schouten::sort_sign;
use kflow::{DiffPoly, MultiIndex, PolyVector, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-4..=4);
    let den = rng.gen_range(1..=3);
    ratio(num, den)
}

/// Polynomial in the coordinates of total degree at most `max_deg`.
pub fn rand_coord_poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: usize, terms: usize) -> DiffPoly {
    let mut out = DiffPoly::zero(dim);
    for _ in 0..terms {
        let deg = rng.gen_range(0..=max_deg);
        let mut m = DiffPoly::constant(dim, rand_rational(rng));
        for _ in 0..deg {
            m = &m * &DiffPoly::coord(dim, rng.gen_range(1..=dim as u8));
        }
        out = &out + &m;
    }
    out
}

fn rand_jet(rng: &mut ChaCha8Rng, dim: usize, max_order: usize) -> DiffPoly {
    let i = rng.gen_range(1..dim as u8);
    let j = rng.gen_range(i + 1..=dim as u8);
    let order = rng.gen_range(0..=max_order);
    let sigma: Vec<u8> = (0..order).map(|_| rng.gen_range(1..=dim as u8)).collect();
    DiffPoly::jet(dim, i, j, MultiIndex::new(sigma))
}

/// Differential polynomial mixing jets, coordinates and (optionally) one
/// parameter.
pub fn rand_diff_poly(rng: &mut ChaCha8Rng, dim: usize, terms: usize) -> DiffPoly {
    let mut out = DiffPoly::zero(dim);
    for _ in 0..terms {
        let mut m = DiffPoly::constant(dim, rand_rational(rng));
        for _ in 0..rng.gen_range(0..=2) {
            m = &m * &rand_jet(rng, dim, 2);
        }
        if rng.gen_bool(0.3) {
            m = &m * &DiffPoly::coord(dim, rng.gen_range(1..=dim as u8));
        }
        if rng.gen_bool(0.15) {
            m = &m * &DiffPoly::param(dim, "c");
        }
        out = &out + &m;
    }
    out
}

pub fn rand_polyvector(
    rng: &mut ChaCha8Rng,
    degree: usize,
    dim: usize,
    mut component: impl FnMut(&mut ChaCha8Rng) -> DiffPoly,
) -> PolyVector {
    let mut out = PolyVector::zero(degree, dim);
    for idx in (1..=dim).combinations(degree) {
        if rng.gen_bool(0.75) {
            out.set(&idx, component(rng)).unwrap();
        }
    }
    out
}

/// `ϱ · ε^{ijk} ∂_k g` with random polynomial `g` and density `ϱ`; Poisson
/// for every choice.
pub fn rand_poisson_3d(rng: &mut ChaCha8Rng) -> PolyVector {
    let g = rand_coord_poly(rng, 3, 3, 4);
    let rho = &DiffPoly::constant(3, rat(rng.gen_range(1..=3))) + &rand_coord_poly(rng, 3, 1, 2);
    PolyVector::nambu(&g).unwrap().mul_poly(&rho)
}

pub fn wedge(a: &PolyVector, b: &PolyVector) -> PolyVector {
    assert_eq!(a.dim(), b.dim());
    let mut out: BTreeMap<Vec<u8>, DiffPoly> = BTreeMap::new();
    for (i, ca) in a.components() {
        for (j, cb) in b.components() {
            let joined = [i, j].concat();
            if let Some((sign, key)) = sort_sign(&joined) {
                let e = out.entry(key).or_insert_with(|| DiffPoly::zero(a.dim()));
                e.add_scaled(&(ca * cb), &rat(sign.into()));
            }
        }
    }
    let mut res = PolyVector::zero(a.degree() + b.degree(), a.dim());
    for (k, v) in out {
        let idx: Vec<usize> = k.iter().map(|&x| x as usize).collect();
        res.set(&idx, v).unwrap();
    }
    res
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Schouten bracket from the fully antisymmetric tensor formula
///
/// C^L = Σ_π sgn(π) [ Σ_k ∂_k A^{L_π[..p]} B^{k L_π[p..]} / (p!(q−1)!)
///                  − Σ_k A^{L_π[..p−1] k} ∂_k B^{L_π[p−1..]} / ((p−1)! q!) ].
pub fn bracket_by_tensor_formula(a: &PolyVector, b: &PolyVector) -> PolyVector {
    let (p, q, n) = (a.degree(), b.degree(), a.dim());
    let r = p + q - 1;
    let mut out = PolyVector::zero(r, n);
    for l in (1..=n).combinations(r) {
        let mut c = DiffPoly::zero(n);
        for perm in (0..r).permutations(r) {
            let lp: Vec<usize> = perm.iter().map(|&i| l[i]).collect();
            let sign = sort_sign(&perm.iter().map(|&i| i as u8).collect::<Vec<_>>()).unwrap().0;
            for k in 1..=n {
                if q >= 1 {
                    let ai = &lp[..p];
                    let bi = [&[k][..], &lp[p..]].concat();
                    let term = &a.get(ai).unwrap().total_derivative(k).unwrap() * &b.get(&bi).unwrap();
                    c.add_scaled(&term, &ratio(sign.into(), factorial(p) * factorial(q - 1)));
                }
                if p >= 1 {
                    let ai = [&lp[..p - 1], &[k][..]].concat();
                    let bi = &lp[p - 1..];
                    let term = &a.get(&ai).unwrap() * &b.get(bi).unwrap().total_derivative(k).unwrap();
                    c.add_scaled(&term, &ratio(-(sign as i64), factorial(p - 1) * factorial(q)));
                }
            }
        }
        out.set(&l, c).unwrap();
    }
    out
}

/// `P^{ij}_σ` by repeated total differentiation of the full tensor.
fn jet_of(p: &PolyVector, i: usize, j: usize, sigma: &[usize]) -> DiffPoly {
    sigma
        .iter()
        .fold(p.get(&[i, j]).unwrap(), |acc, &k| acc.total_derivative(k).unwrap())
}

/// `Γ₁^{ij}` summed over every index assignment, nothing skipped.
pub fn gamma1_all_indices(p: &PolyVector, i: usize, j: usize) -> DiffPoly {
    let n = p.dim();
    let mut cache: BTreeMap<(usize, usize, Vec<usize>), DiffPoly> = BTreeMap::new();
    let mut jet = |a: usize, b: usize, s: Vec<usize>| {
        cache
            .entry((a, b, s.clone()))
            .or_insert_with(|| jet_of(p, a, b, &s))
            .clone()
    };
    let mut sum = DiffPoly::zero(n);
    for idx in (0..6).map(|_| 1..=n).multi_cartesian_product() {
        let [k, l, m, kp, lp, mp] = idx[..] else { unreachable!() };
        let v = &(&(&jet(i, j, vec![k, l, m]) * &jet(k, kp, vec![lp])) * &jet(l, lp, vec![mp])) * &jet(m, mp, vec![kp]);
        sum = &sum + &v;
    }
    sum
}

/// `Γ₂^{im}` summed over every index assignment, nothing skipped.
pub fn gamma2_all_indices(p: &PolyVector, i: usize, m: usize) -> DiffPoly {
    let n = p.dim();
    let mut cache: BTreeMap<(usize, usize, Vec<usize>), DiffPoly> = BTreeMap::new();
    let mut jet = |a: usize, b: usize, s: Vec<usize>| {
        cache
            .entry((a, b, s.clone()))
            .or_insert_with(|| jet_of(p, a, b, &s))
            .clone()
    };
    let mut sum = DiffPoly::zero(n);
    for idx in (0..6).map(|_| 1..=n).multi_cartesian_product() {
        let [j, k, l, kp, lp, mp] = idx[..] else { unreachable!() };
        let v = &(&(&jet(i, j, vec![k, l]) * &jet(k, m, vec![kp, lp])) * &jet(kp, l, vec![mp])) * &jet(mp, lp, vec![j]);
        sum = &sum + &v;
    }
    sum
}

/// `X(f) = Σ X^j ∂_j f`.
pub fn apply_field(x: &PolyVector, f: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero(x.dim());
    for j in 1..=x.dim() {
        out = &out + &(&x.get(&[j]).unwrap() * &f.total_derivative(j).unwrap());
    }
    out
}

/// `(−1)^e` as a rational.
pub fn parity(e: usize) -> Rational {
    if e.is_multiple_of(2) {
        rat(1)
    } else {
        rat(-1)
    }
}
