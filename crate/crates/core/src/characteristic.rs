//! The characteristic functional `Φ_n(s, β) = ∏_{j≤n} (1 − is/β_j)^(−1/2)`,
//! its renormalized limit `Φ(s, β, θ)` and the regularized flow.
//!
//! Products are evaluated in polar form: the modulus as `exp(−¼ Σ ln(1+v²))`
//! and the phase as `½ Σ arctan v` with `v = s/β_j`. Each arctan lies in
//! `(−π/2, π/2)`, so there is no branch ambiguity in the square root.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::layout::{arctan_defect, Layout, ModeFn};
use crate::quadrature::{integrate, Options, QuadratureConfig};
use crate::regulator::DeformedSpectrum;
use crate::spectrum::Spectrum;
use crate::summation::CompensatedSum;

/// Values of `Φ`. Every evaluation has modulus at most one.
pub type ComplexValue = Complex64;

/// Modulus `f` and raw phase `g` with `Φ = f·e^(ig/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub modulus: f64,
    pub phase: f64,
}

impl Polar {
    pub fn value(&self) -> ComplexValue {
        Complex64::from_polar(self.modulus, 0.5 * self.phase)
    }
}

/// `f_n(s)` and `g_n(s) = Σ_{j≤n} arctan(s/β_j)`.
pub fn polar_n(spec: &Spectrum, s: f64, n: u64) -> Polar {
    let mut log_modulus = CompensatedSum::new();
    let mut phase = CompensatedSum::new();
    for j in 1..=n {
        let v = s / spec.beta(j);
        log_modulus.add((v * v).ln_1p());
        phase.add(v.atan());
    }
    Polar { modulus: (-0.25 * log_modulus.value()).exp(), phase: phase.value() }
}

/// `Φ_n(s, β)`.
pub fn phi_n(spec: &Spectrum, s: f64, n: u64) -> ComplexValue {
    polar_n(spec, s, n).value()
}

/// `f_n(s)`.
pub fn f_n(spec: &Spectrum, s: f64, n: u64) -> f64 {
    polar_n(spec, s, n).modulus
}

/// Largest `n` accepted by [`phi_n_quadrature`].
pub const QUADRATURE_ORACLE_MAX_N: u64 = 12;

/// `Φ_n` from its definition as a product of one-dimensional Gaussian
/// integrals `∫ √(β/π) e^(−βa² + isa²) da`, each done by adaptive quadrature
/// on `|a| ≤ 8/√β`.
pub fn phi_n_quadrature(spec: &Spectrum, s: f64, n: u64, q: &QuadratureConfig) -> Result<ComplexValue> {
    if n == 0 || n > QUADRATURE_ORACLE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "quadrature oracle supports 1 ≤ n ≤ {QUADRATURE_ORACLE_MAX_N}, got {n}"
        )));
    }
    q.validate()?;
    let budget = q.max_nodes.min(1 << 16);
    let mut product = Complex64::new(1.0, 0.0);
    for j in 1..=n {
        let beta = spec.beta(j);
        let half_width = 8.0 / beta.sqrt();
        let norm = (beta / PI).sqrt();
        let exponent = Complex64::new(-beta, s);
        // Integrand is even in a.
        let integrand = |a: f64| (exponent * (a * a)).exp() * (2.0 * norm);
        let cycles = s.abs() * half_width * half_width / (2.0 * PI);
        let opts =
            Options::new(q.abs_tol * 1e-2, q.rel_tol * 1e-2, budget).panels(cycles.ceil() as usize + 1);
        let factor = integrate(integrand, 0.0, half_width, &opts)?;
        product *= factor.value;
    }
    Ok(product)
}

/// `f(s) = ∏_j (1 + s²/β_j²)^(−1/4)` to absolute accuracy `tol`.
pub fn f_limit(spec: &Spectrum, s: f64, tol: f64) -> Result<f64> {
    spec.require_class(2)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    let log_sum = Layout::plain(spec).sum(ModeFn::LogModulus(s), 4.0 * tol)?;
    Ok((-0.25 * log_sum.value).exp())
}

/// `g_r(s) = −sκ + Σ_j (s/β_j − arctan(s/β_j))`.
pub fn g_r(spec: &Spectrum, kappa: f64, s: f64, tol: f64) -> Result<f64> {
    spec.require_class(2)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let defect = Layout::plain(spec).sum(ModeFn::ArctanDefect(s), tol)?;
    Ok(-s * kappa + defect.value)
}

/// `Φ(s, β, θ) = f(s)·exp(−i(sθ + g_r(s))/2)`.
pub fn phi_renormalized(spec: &Spectrum, kappa: f64, s: f64, theta: f64, tol: f64) -> Result<ComplexValue> {
    polar_renormalized(spec, kappa, s, theta, tol).map(|p| p.value())
}

/// Polar form of [`phi_renormalized`]; the phase is `−(sθ + g_r(s))`.
pub fn polar_renormalized(spec: &Spectrum, kappa: f64, s: f64, theta: f64, tol: f64) -> Result<Polar> {
    let f = f_limit(spec, s, 0.5 * tol)?;
    let g = g_r(spec, kappa, s, tol)?;
    Ok(Polar { modulus: f, phase: -(s * theta + g) })
}

/// `Φ(s, β(Λ))` without any phase correction.
pub fn phi_regularized(d: &DeformedSpectrum, s: f64, tol: f64) -> Result<ComplexValue> {
    polar_regularized(d, s, tol).map(|p| p.value())
}

/// Polar form of [`phi_regularized`]; the phase is `Σ_j arctan(s/β_j(Λ))`.
pub fn polar_regularized(d: &DeformedSpectrum, s: f64, tol: f64) -> Result<Polar> {
    if s == 0.0 {
        return Ok(Polar { modulus: 1.0, phase: 0.0 });
    }
    let layout = Layout::deformed(d)?;
    let log_sum = layout.sum(ModeFn::LogModulus(s), 4.0 * tol)?;
    let phase = layout.sum(ModeFn::Arctan(s), tol)?;
    Ok(Polar { modulus: (-0.25 * log_sum.value).exp(), phase: phase.value })
}

/// The renormalized flow `Φ(s, β(Λ))·e^(−is(r(Λ)+θ)/2)`.
pub fn phi_flow(d: &DeformedSpectrum, s: f64, theta: f64, tol: f64) -> Result<ComplexValue> {
    polar_flow(d, s, theta, tol).map(|p| p.value())
}

/// Polar form of [`phi_flow`].
pub fn polar_flow(d: &DeformedSpectrum, s: f64, theta: f64, tol: f64) -> Result<Polar> {
    let r = d.r_of_lambda()?;
    let p = polar_regularized(d, s, tol)?;
    Ok(Polar { modulus: p.modulus, phase: p.phase - s * (r + theta) })
}

/// `Σ_{j≤n} (s/β_j − arctan(s/β_j))`, the convergent part of the raw phase.
pub fn phase_defect_n(spec: &Spectrum, s: f64, n: u64) -> f64 {
    (1..=n).map(|j| arctan_defect(s / spec.beta(j))).collect::<CompensatedSum>().value()
}
