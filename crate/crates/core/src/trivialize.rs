//! Search for vector fields `X = F ∂_x + G ∂_y` in two dimensions with
//! `[[X, P]] = Γ₁(P)`, i.e.
//!
//! ```text
//! u(F_x + G_y) − u_x F − u_y G = Γ₁^{12},
//! ```
//!
//! by the method of undetermined coefficients over a weight-homogeneous
//! cubic ansatz.

use itertools::Itertools;
use num::{One, Zero};
use thiserror::Error;

use crate::jetcore::{parse_poly, rat, DiffPoly, Factor, Rational};
use crate::linalg::{self, LinalgError};
use crate::schouten::{divergence, schouten_bracket, PolyVector, SchoutenError};
use crate::tetraflow::gamma1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrivializeError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Schouten(#[from] SchoutenError),
    #[error("residual is not linear in the unknown coefficients")]
    Nonlinear,
}

/// Weight `(wt_x, wt_y)` of each monomial of `F`; `G` has the transpose.
pub const F_WEIGHT: (usize, usize) = (2, 3);

/// Cubic monomials `u_σ₁ u_σ₂ u_σ₃` of prescribed weights, in canonical
/// monomial order, with unknowns `c1..` for `F` and `d1..` for `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ansatz {
    pub monomials_f: Vec<DiffPoly>,
    pub monomials_g: Vec<DiffPoly>,
    pub max_order: Option<usize>,
}

fn cubic_monomials(wx: usize, wy: usize, max_order: Option<usize>) -> Vec<DiffPoly> {
    let sigmas: Vec<Vec<u8>> = (0..=wx)
        .cartesian_product(0..=wy)
        .filter(|&(nx, ny)| max_order.is_none_or(|m| nx + ny <= m))
        .map(|(nx, ny)| [vec![1u8; nx], vec![2u8; ny]].concat())
        .collect();
    let mut out: Vec<DiffPoly> = sigmas
        .iter()
        .combinations_with_replacement(3)
        .filter(|c| {
            let nx: usize = c.iter().map(|s| s.iter().filter(|&&k| k == 1).count()).sum();
            let ny: usize = c.iter().map(|s| s.iter().filter(|&&k| k == 2).count()).sum();
            (nx, ny) == (wx, wy)
        })
        .map(|c| c.iter().fold(DiffPoly::one(2), |acc, s| &acc * &DiffPoly::u(s)))
        .collect();
    out.sort_by(|a, b| monomial_key(a).cmp(monomial_key(b)));
    out.dedup();
    out
}

fn monomial_key(p: &DiffPoly) -> &[Factor] {
    p.terms().next().map(|(k, _)| k).unwrap_or(&[])
}

/// All cubic monomials with the homogeneous weights of a trivializing field.
pub fn build_ansatz() -> Ansatz {
    build_ansatz_up_to(None)
}

/// As [`build_ansatz`], keeping only jets of order at most `max_order`.
pub fn build_ansatz_up_to(max_order: Option<usize>) -> Ansatz {
    let (wx, wy) = F_WEIGHT;
    Ansatz {
        monomials_f: cubic_monomials(wx, wy, max_order),
        monomials_g: cubic_monomials(wy, wx, max_order),
        max_order,
    }
}

impl Ansatz {
    pub fn len(&self) -> usize {
        self.monomials_f.len() + self.monomials_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unknowns(&self) -> Vec<String> {
        let f = (1..=self.monomials_f.len()).map(|i| format!("c{i}"));
        let g = (1..=self.monomials_g.len()).map(|j| format!("d{j}"));
        f.chain(g).collect()
    }

    /// The field with the given coefficient vector (unknown order).
    pub fn field(&self, coeffs: &[Rational]) -> PolyVector {
        let nf = self.monomials_f.len();
        let combine = |monos: &[DiffPoly], cs: &[Rational]| {
            let mut out = DiffPoly::zero(2);
            for (m, c) in monos.iter().zip(cs) {
                out.add_scaled(m, c);
            }
            out
        };
        PolyVector::vector(vec![
            combine(&self.monomials_f, &coeffs[..nf]),
            combine(&self.monomials_g, &coeffs[nf..]),
        ])
        .expect("two components")
    }

    /// The field with a free parameter in front of every monomial.
    pub fn symbolic_field(&self) -> PolyVector {
        let names = self.unknowns();
        let nf = self.monomials_f.len();
        let combine = |monos: &[DiffPoly], names: &[String]| {
            let mut out = DiffPoly::zero(2);
            for (m, name) in monos.iter().zip(names) {
                out = &out + &(&DiffPoly::param(2, name) * m);
            }
            out
        };
        PolyVector::vector(vec![
            combine(&self.monomials_f, &names[..nf]),
            combine(&self.monomials_g, &names[nf..]),
        ])
        .expect("two components")
    }

    /// Coefficient vector of a parameter-free 2D vector field, or `None` if
    /// it uses a monomial outside the ansatz.
    pub fn coefficients_of(&self, x: &PolyVector) -> Option<Vec<Rational>> {
        if x.degree() != 1 || x.dim() != 2 {
            return None;
        }
        let mut out = Vec::with_capacity(self.len());
        for (slot, monos) in [(1, &self.monomials_f), (2, &self.monomials_g)] {
            let comp = x.get(&[slot]).ok()?;
            let mut covered = 0;
            for m in monos {
                let c = comp.coeff_of(monomial_key(m));
                if !c.is_zero() {
                    covered += 1;
                }
                out.push(c);
            }
            if covered != comp.len() {
                return None;
            }
        }
        Some(out)
    }
}

/// `A x = b` over the ansatz unknowns, one equation per jet monomial of the
/// residual `[[X, P]] − Γ₁(P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub ansatz: Ansatz,
    pub unknowns: Vec<String>,
    /// The jet monomial each equation is read off from.
    pub equations: Vec<DiffPoly>,
    pub matrix: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    /// Residual, affine-linear in the unknowns.
    pub residual: DiffPoly,
}

impl LinearSystem {
    /// Residual with the unknowns set to `values`.
    pub fn residual_at(&self, values: &[Rational]) -> DiffPoly {
        self.unknowns
            .iter()
            .zip(values)
            .fold(self.residual.clone(), |acc, (name, v)| acc.set_param(name, v))
    }

    pub fn satisfied_by(&self, values: &[Rational]) -> bool {
        linalg::mat_vec(&self.matrix, values) == self.rhs
    }
}

/// The 2D target `Γ₁(P)` for `P = u ∂_x ∧ ∂_y`.
pub fn flow_target() -> PolyVector {
    gamma1(&PolyVector::symbolic_bivector(2)).expect("bivector")
}

pub fn assemble_system(ansatz: &Ansatz) -> Result<LinearSystem, TrivializeError> {
    let target = flow_target();
    let x = ansatz.symbolic_field();
    let residual = check_solution(&x, &target)?
        .single_component()
        .unwrap_or_else(|| DiffPoly::zero(2));
    let (constant, by_param) = residual.linear_in_params().ok_or(TrivializeError::Nonlinear)?;
    let unknowns = ansatz.unknowns();

    let mut keys: Vec<Vec<Factor>> = constant
        .terms()
        .chain(by_param.values().flat_map(|p| p.terms()))
        .map(|(k, _)| k.to_vec())
        .collect();
    keys.sort();
    keys.dedup();

    let zero = DiffPoly::zero(2);
    let mut matrix = Vec::with_capacity(keys.len());
    let mut rhs = Vec::with_capacity(keys.len());
    let mut equations = Vec::with_capacity(keys.len());
    for key in keys {
        let row = unknowns
            .iter()
            .map(|name| by_param.get(name).unwrap_or(&zero).coeff_of(&key))
            .collect();
        matrix.push(row);
        rhs.push(-constant.coeff_of(&key));
        equations.push(DiffPoly::from_monomial(2, rat(1), key));
    }
    Ok(LinearSystem {
        ansatz: ansatz.clone(),
        unknowns,
        equations,
        matrix,
        rhs,
        residual,
    })
}

/// Affine solution set `particular + span(kernel_basis)`.
///
/// When the named reference family spans the computed solutions, the
/// particular solution and kernel basis are expressed in its parameters
/// `a..e`; the raw elimination output is always kept alongside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSpace {
    pub particular: PolyVector,
    pub kernel_basis: Vec<PolyVector>,
    pub parameter_names: Vec<String>,
    pub matches_reference: bool,
    pub elimination_particular: PolyVector,
    pub elimination_kernel: Vec<PolyVector>,
    pub rank: usize,
    pub unknowns: usize,
}

impl SolutionSpace {
    /// `particular + Σ name_i · kernel_i` with symbolic parameters.
    pub fn general_field(&self) -> PolyVector {
        let mut out = self.particular.clone();
        for (name, k) in self.parameter_names.iter().zip(&self.kernel_basis) {
            let term = k.mul_poly(&DiffPoly::param(2, name));
            out = out.checked_add(&term).expect("same shape");
        }
        out
    }

    pub fn at(&self, values: &[Rational]) -> PolyVector {
        let mut out = self.particular.clone();
        for (v, k) in values.iter().zip(&self.kernel_basis) {
            out.add_scaled(k, v);
        }
        out
    }
}

/// Splits a field with parameters into its parameter-free part and one
/// direction per parameter.
pub fn split_family(x: &PolyVector) -> Option<(PolyVector, Vec<(String, PolyVector)>)> {
    let mut base = Vec::new();
    let mut dirs: std::collections::BTreeMap<String, Vec<DiffPoly>> = Default::default();
    let n = x.dim();
    for k in 1..=n {
        let (c, by) = x.get(&[k]).ok()?.linear_in_params()?;
        base.push(c);
        for (name, p) in by {
            dirs.entry(name).or_insert_with(|| vec![DiffPoly::zero(n); n])[k - 1] = p;
        }
    }
    let dirs = dirs
        .into_iter()
        .map(|(name, comps)| (name, PolyVector::vector(comps).expect("vector")))
        .collect();
    Some((PolyVector::vector(base).ok()?, dirs))
}

pub fn solve(system: &LinearSystem) -> Result<SolutionSpace, TrivializeError> {
    let cols = system.unknowns.len();
    let sol = linalg::solve_affine(&system.matrix, &system.rhs, cols)?;
    let ansatz = &system.ansatz;
    let elimination_particular = ansatz.field(&sol.particular);
    let elimination_kernel: Vec<PolyVector> = sol.kernel.iter().map(|k| ansatz.field(k)).collect();

    let mut space = SolutionSpace {
        particular: elimination_particular.clone(),
        kernel_basis: elimination_kernel.clone(),
        parameter_names: (1..=sol.kernel.len()).map(|i| format!("t{i}")).collect(),
        matches_reference: false,
        elimination_particular,
        elimination_kernel,
        rank: sol.rank(),
        unknowns: cols,
    };
    if let Some((base, dirs)) = reference_coordinates(system, sol.kernel.len()) {
        space.particular = ansatz.field(&base);
        space.parameter_names = dirs.iter().map(|(n, _)| n.clone()).collect();
        space.kernel_basis = dirs.iter().map(|(_, d)| ansatz.field(d)).collect();
        space.matches_reference = true;
    }
    Ok(space)
}

type Directions = Vec<(String, Vec<Rational>)>;

/// Coordinates of the reference family in the ansatz, provided its base
/// solves the system and the directions that fit in the ansatz form a
/// kernel basis.
fn reference_coordinates(system: &LinearSystem, kernel_dim: usize) -> Option<(Vec<Rational>, Directions)> {
    let (base, dirs) = split_family(&five_parameter_family())?;
    let ansatz = &system.ansatz;
    let base = ansatz.coefficients_of(&base)?;
    let dirs: Directions = dirs
        .into_iter()
        .filter_map(|(n, d)| Some((n, ansatz.coefficients_of(&d)?)))
        .collect();
    if dirs.len() != kernel_dim || !system.satisfied_by(&base) {
        return None;
    }
    let vectors: Vec<Vec<Rational>> = dirs.iter().map(|(_, d)| d.clone()).collect();
    let homogeneous = vectors
        .iter()
        .all(|d| linalg::is_zero_vec(&linalg::mat_vec(&system.matrix, d)));
    let independent = linalg::rank(&vectors, system.unknowns.len()).ok()? == kernel_dim;
    (homogeneous && independent).then_some((base, dirs))
}

/// `[[X, P]] − target` for the symbolic bivector `P` of the target's
/// dimension; zero exactly when `X` trivializes the target flow.
pub fn check_solution(x: &PolyVector, target: &PolyVector) -> Result<PolyVector, SchoutenError> {
    let p = PolyVector::symbolic_bivector(target.dim());
    check_solution_for(&p, x, target)
}

pub fn check_solution_for(p: &PolyVector, x: &PolyVector, target: &PolyVector) -> Result<PolyVector, SchoutenError> {
    x.expect_degree(1)?;
    schouten_bracket(x, p)?.checked_sub(target)
}

/// `div X(params)` split into a constant part and one image per parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceMap {
    pub constant: DiffPoly,
    pub images: Vec<(String, DiffPoly)>,
    pub rank: usize,
    /// Parameter vectors with vanishing divergence image.
    pub kernel: Vec<Vec<Rational>>,
}

pub fn divergence_map(space: &SolutionSpace) -> Result<DivergenceMap, SchoutenError> {
    let constant = divergence(&space.particular)?;
    let images: Vec<(String, DiffPoly)> = space
        .parameter_names
        .iter()
        .zip(&space.kernel_basis)
        .map(|(n, k)| Ok((n.clone(), divergence(k)?)))
        .collect::<Result<_, SchoutenError>>()?;
    let mut keys: Vec<Vec<Factor>> = images
        .iter()
        .flat_map(|(_, p)| p.terms().map(|(k, _)| k.to_vec()))
        .collect();
    keys.sort();
    keys.dedup();
    let matrix: Vec<Vec<Rational>> = keys
        .iter()
        .map(|k| images.iter().map(|(_, p)| p.coeff_of(k)).collect())
        .collect();
    let cols = images.len();
    let rank = linalg::rank(&matrix, cols).expect("uniform rows");
    let kernel = linalg::nullspace(&matrix, cols).expect("uniform rows");
    Ok(DivergenceMap {
        constant,
        images,
        rank,
        kernel,
    })
}

fn field_from_text(f: &str, g: &str) -> PolyVector {
    let f = parse_poly(f, 2).expect("valid reference text");
    let g = parse_poly(g, 2).expect("valid reference text");
    PolyVector::vector(vec![f, g]).expect("two components")
}

const DIVERGENCE_FREE_F: &str = "u_yyy*u_x^2 - 2*u_xyy*u_x*u_y + u_xxy*u_y^2 + 2*u_xx*u_yy*u_y - 2*u_xy^2*u_y + c*u_y";
const DIVERGENCE_FREE_G: &str = "-u_xxx*u_y^2 + 2*u_xxy*u_x*u_y - u_xyy*u_x^2 - 2*u_xx*u_yy*u_x + 2*u_xy^2*u_x - c*u_x";

const FAMILY_F: &str = "a*u_xxyyy*u^2 + b*u_xxyyy*u^2 + b*u_xxyy*u_y*u + c*u_xyyy*u_x*u \
    + u_xxy*u_y^2 + d*u_xxy*u_yy*u + e*u_xyy*u_xy*u + a*u_yyy*u_xx*u + d*u_yyy*u_xx*u \
    - 2*u_xyy*u_x*u_y + u_yyy*u_x^2 + 2*u_xx*u_yy*u_y - 2*u_xy^2*u_y";
const FAMILY_G: &str = "-a*u_xxxyy*u^2 - b*u_xxxyy*u^2 + a*u_xxxy*u_y*u \
    - a*u_xxyy*u_x*u - b*u_xxyy*u_x*u - c*u_xxyy*u_x*u - a*u_xxx*u_yy*u - d*u_xxx*u_yy*u \
    + a*u_xxy*u_xy*u + c*u_xxy*u_xy*u - e*u_xxy*u_xy*u \
    - a*u_xyy*u_xx*u - c*u_xyy*u_xx*u - d*u_xyy*u_xx*u \
    - u_xxx*u_y^2 + 2*u_xxy*u_x*u_y - u_xyy*u_x^2 - 2*u_xx*u_yy*u_x + 2*u_xy^2*u_x";

/// The divergence-free trivializing field of jet order ≤ 3, with a free
/// constant `c` in front of the Hamiltonian field `(u_y, −u_x)`.
pub fn divergence_free_field() -> PolyVector {
    field_from_text(DIVERGENCE_FREE_F, DIVERGENCE_FREE_G)
}

/// The five-parameter family (`a, b, c, d, e`) of cubic trivializing fields.
pub fn five_parameter_family() -> PolyVector {
    field_from_text(FAMILY_F, FAMILY_G)
}

/// The Hamiltonian vector field `(u_y, −u_x)` of `u`.
pub fn hamiltonian_field() -> PolyVector {
    field_from_text("u_y", "-u_x")
}

/// Sets every parameter of a field to the same value.
pub fn specialize(x: &PolyVector, values: &[(&str, Rational)]) -> PolyVector {
    x.map(|p| values.iter().fold(p.clone(), |acc, (n, v)| acc.set_param(n, v)))
}

pub fn all_params_zero(x: &PolyVector) -> PolyVector {
    x.map(|p| {
        p.params()
            .iter()
            .fold(p.clone(), |acc, n| acc.set_param(n, &Rational::zero()))
    })
}

pub fn all_params_one(x: &PolyVector) -> PolyVector {
    x.map(|p| {
        p.params()
            .iter()
            .fold(p.clone(), |acc, n| acc.set_param(n, &Rational::one()))
    })
}
