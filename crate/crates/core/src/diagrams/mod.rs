//! Exact Wick-moment combinatorics for the single vertex `S₁ = Σ a_j²`.
//!
//! Moments `ℍ(S₁^k)` are polynomials in the loop values `b_m` with exact
//! rational coefficients. They are generated from the cumulant recurrence
//! and cross-checked against a brute-force enumeration of pairings.

mod moments;
mod polynomial;
mod series;

pub use moments::{
    h1_moment, renormalized_side, shifted_moment, verify_renorm_identity, wick_moment,
    wick_moment_bruteforce, wick_moments, wick_pairings, MomentOperator, PairingCount, BRUTEFORCE_MAX_K,
    IDENTITY_MAX_N, WICK_MAX_K,
};
pub use polynomial::{MomentPolynomial, Monomial};
pub use series::{partial_sum_scan, series_coefficients, LoopValue, ScanRow, SeriesKind, SCAN_MAX_ORDER};
