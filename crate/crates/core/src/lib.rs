//! Regularization and renormalization of a Gaussian functional integral,
//! computed two ways.
//!
//! The analytic track works with the infinite Gaussian product
//! `Φ(s, β) = ∏ (1 − is/β_j)^(−1/2)`, its deformation by a cutoff regulator,
//! the phase renormalization `e^(−is(r(Λ)+θ)/2)` and the Gaussian transform
//! to the quartic partition functional `Z(λ, β)`.
//!
//! The combinatorial track builds exact Wick moments `ℍ(S₁^k)` as rational
//! polynomials in loop values `b_k` and checks the formal-series
//! renormalization identity `ℍ((S₁−ζ)^n) = ℍ₁((S₁+ξ−ζ)^n)` symbolically.

pub mod acceptance;
pub mod characteristic;
pub mod diagrams;
pub mod error;
pub mod partition;
pub mod quadrature;
pub mod regulator;
pub mod spectrum;
pub mod summation;

mod layout;

pub use characteristic::ComplexValue;
pub use diagrams::{LoopValue, MomentOperator, MomentPolynomial, SeriesKind};
pub use error::{Error, Result};
pub use partition::McConfig;
pub use quadrature::QuadratureConfig;
pub use regulator::{DeformedBeta, DeformedSpectrum, Regulator};
pub use spectrum::Spectrum;
