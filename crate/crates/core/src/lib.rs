//! Exact symbolic engine for Kontsevich's tetrahedral flows on Poisson
//! bivectors.
//!
//! * [`jetcore`]: differential polynomials in the jets of a bivector.
//! * [`schouten`]: polyvector fields, the Schouten bracket, `∂_P`.
//! * [`tetraflow`]: the tetrahedral differential polynomials Γ₁, Γ₂.
//! * [`trivialize`]: undetermined-coefficient search for vector fields `X`
//!   with `Γ₁(P) = [[X, P]]` in two dimensions.
//! * [`graphs`]: Kontsevich graphs and their evaluation.
//! * [`fourier`]: exact trigonometric polynomials on the torus.
//! * [`linalg`]: exact fraction-free linear algebra.

pub mod fourier;
pub mod graphs;
pub mod jetcore;
pub mod linalg;
pub mod schouten;
pub mod tetraflow;
pub mod trivialize;

pub use fourier::{TrigCoeff, TrigPoly};
pub use graphs::{GraphSum, KGraph};
pub use jetcore::{DiffPoly, Factor, JetVar, Monomial, MultiIndex, ParseError, Rational};
pub use schouten::PolyVector;
pub use trivialize::{Ansatz, LinearSystem, SolutionSpace};
