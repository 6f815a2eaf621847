//! The partition functional `Z(λ, β)` obtained from `Φ` by the Gaussian
//! transform `T(Φ)(λ) = (4πλ)^(−1/2) ∫ e^(−s²/(4λ)) Φ(s) ds`, plus a direct
//! Monte-Carlo estimator of the finite-dimensional quartic integral.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristic::{self, ComplexValue};
use crate::error::{Error, Result};
pub use crate::quadrature::QuadratureConfig;
use crate::quadrature::{integrate, Options, NODES_PER_PANEL};
use crate::regulator::DeformedSpectrum;
use crate::spectrum::Spectrum;
use crate::summation::CompensatedSum;

/// Monte-Carlo settings for [`z_mc_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0x5eed_0f2e_9017 }
    }
}

/// Largest dimension accepted by [`z_mc_oracle`].
pub const MC_ORACLE_MAX_N: u64 = 64;
const MC_BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, Copy)]
pub struct Transformed {
    pub value: ComplexValue,
    pub abs_error: f64,
    pub nodes: usize,
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")))
    }
}

/// `T(φ)(λ)` over the window `±half_width_sigmas·√(2λ)`.
///
/// `phase_rate` bounds `|d arg φ/ds|` and sizes the initial panel grid and
/// the node budget check.
pub fn transform<F>(lambda: f64, q: &QuadratureConfig, phase_rate: f64, phi: F) -> Result<Transformed>
where
    F: Fn(f64) -> Result<ComplexValue> + Sync,
{
    validate_lambda(lambda)?;
    q.validate()?;
    let half_width = q.half_width_sigmas * (2.0 * lambda).sqrt();
    let cycles = phase_rate.abs() * 2.0 * half_width / (2.0 * PI);
    let panels = (2.0 * cycles).ceil() as usize + 2;
    let required = NODES_PER_PANEL * panels;
    if required > q.max_nodes {
        return Err(Error::OscillationBudgetExceeded { required, budget: q.max_nodes });
    }
    let norm = 1.0 / (4.0 * PI * lambda).sqrt();
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let integrand = |s: f64| -> ComplexValue {
        match phi(s) {
            Ok(v) => v * (norm * (-s * s / (4.0 * lambda)).exp()),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let opts = Options::new(q.abs_tol, q.rel_tol, q.max_nodes).panels(panels).parallel(true);
    let result = integrate(integrand, -half_width, half_width, &opts);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let quad = result?;
    Ok(Transformed { value: quad.value, abs_error: quad.abs_error, nodes: quad.nodes })
}

fn real_part(t: Transformed, q: &QuadratureConfig) -> Result<f64> {
    let tol = q.abs_tol.max(t.abs_error);
    if t.value.im.abs() > tol {
        return Err(Error::NotReal { residue: t.value.im.abs(), tol });
    }
    Ok(t.value.re)
}

fn inner_tol(q: &QuadratureConfig) -> f64 {
    (0.1 * q.abs_tol).max(1e-15)
}

/// `c_n = Σ_{j≤n} 1/β_j`.
pub fn c_n(spec: &Spectrum, n: u64) -> f64 {
    (1..=n).map(|j| 1.0 / spec.beta(j)).collect::<CompensatedSum>().value()
}

/// `Z_n(λ, β) = T(Φ_n)(λ)`.
pub fn z_n(spec: &Spectrum, lambda: f64, n: u64, q: &QuadratureConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let rate = 0.5 * c_n(spec, n);
    let t = transform(lambda, q, rate, |s| Ok(characteristic::phi_n(spec, s, n)))?;
    real_part(t, q)
}

/// Upper bound on `|Z_n(λ, β)|` from one integration by parts against the
/// oscillating factor `e^(isc_n/2)`, with the kernel moments
/// `E|s| = 2√(λ/π)` and `E s² = 2λ` done in closed form.
pub fn z_n_bound(spec: &Spectrum, lambda: f64, n: u64) -> Result<f64> {
    validate_lambda(lambda)?;
    spec.require_class(2)?;
    let b2 = spec.b_sum(2, 1e-13)?;
    let mu = spec.mu();
    let mean_abs = 2.0 * (lambda / PI).sqrt();
    let mean_sq = 2.0 * lambda;
    let inner = mean_abs / (2.0 * lambda) + mean_abs * b2 / 2.0 + mean_sq * b2 / (2.0 * mu);
    Ok(2.0 / c_n(spec, n) * inner)
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }
}

/// Monte-Carlo estimate of `Z_n(λ, β) = E[exp(−λ(Σ a_j²)²)]` with
/// `a_j ~ N(0, 1/(2β_j))`. Returns `(estimate, standard error)`.
///
/// Samples are drawn in fixed-size batches; batch `b` uses the ChaCha8
/// stream `b` of the seed, so the result is bit-identical regardless of
/// thread count or scheduling.
pub fn z_mc_oracle(spec: &Spectrum, lambda: f64, n: u64, mc: &McConfig) -> Result<(f64, f64)> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be ≥ 0, got {lambda}")));
    }
    if n == 0 || n > MC_ORACLE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "Monte-Carlo oracle supports 1 ≤ n ≤ {MC_ORACLE_MAX_N}, got {n}"
        )));
    }
    if mc.samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let sigmas: Vec<f64> = (1..=n).map(|j| (0.5 / spec.beta(j)).sqrt()).collect();
    let batches = mc.samples.div_ceil(MC_BATCH);
    let partials: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(b);
            let len = MC_BATCH.min(mc.samples - b * MC_BATCH);
            let mut m = Moments::default();
            for _ in 0..len {
                let s1: f64 = sigmas
                    .iter()
                    .map(|&sigma| {
                        let a = sigma * rng.sample::<f64, _>(StandardNormal);
                        a * a
                    })
                    .sum();
                m.push((-lambda * s1 * s1).exp());
            }
            m
        })
        .collect();
    let total = partials.into_iter().fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.count - 1) as f64;
    Ok((total.mean, (variance / total.count as f64).sqrt()))
}

/// Rough bound on the phase slope of the renormalized `Φ` over the window.
fn renormalized_rate(spec: &Spectrum, kappa: f64, theta: f64, window: f64) -> f64 {
    let near: f64 = (1..=4096u64).map(|j| spec.beta(j)).filter(|&b| b <= window).map(|b| 1.0 / b).sum();
    0.5 * (theta.abs() + kappa.abs() + near + 1.0)
}

/// `Z(λ, β, θ)`: the transform of the renormalized `Φ(s, β, θ)`,
/// `(πλ)^(−1/2) ∫_0^∞ e^(−s²/(4λ)) f(s) cos(sθ/2 + g_r(s)/2) ds`.
pub fn z_renormalized(
    spec: &Spectrum,
    kappa: f64,
    lambda: f64,
    theta: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    validate_lambda(lambda)?;
    q.validate()?;
    spec.require_class(2)?;
    let half_width = q.half_width_sigmas * (2.0 * lambda).sqrt();
    let rate = renormalized_rate(spec, kappa, theta, half_width);
    let panels = (rate * half_width / PI).ceil() as usize + 1;
    if NODES_PER_PANEL * panels > q.max_nodes {
        return Err(Error::OscillationBudgetExceeded {
            required: NODES_PER_PANEL * panels,
            budget: q.max_nodes,
        });
    }
    let tol = inner_tol(q);
    let norm = 1.0 / (PI * lambda).sqrt();
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let integrand = |s: f64| -> f64 {
        let value = characteristic::f_limit(spec, s, tol).and_then(|f| {
            characteristic::g_r(spec, kappa, s, tol).map(|g| f * (0.5 * (s * theta + g)).cos())
        });
        match value {
            Ok(v) => norm * (-s * s / (4.0 * lambda)).exp() * v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let opts = Options::new(q.abs_tol, q.rel_tol, q.max_nodes).panels(panels).parallel(true);
    let result = integrate(integrand, 0.0, half_width, &opts);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(result?.value)
}

/// `T` applied to the renormalized flow `Φ(s, β(Λ))·e^(−is(r(Λ)+θ)/2)`.
pub fn z_flow(d: &DeformedSpectrum, lambda: f64, theta: f64, q: &QuadratureConfig) -> Result<f64> {
    let tol = inner_tol(q);
    let r = d.r_of_lambda()?;
    let b1 = d.deformed_b1(tol)?;
    let rate = 0.5 * (theta.abs() + (b1 - r).abs() + 1.0);
    let t = transform(lambda, q, rate, |s| characteristic::phi_flow(d, s, theta, tol))?;
    real_part(t, q)
}

/// `T` applied to the regularized `Φ(s, β(Λ))` with no phase correction.
pub fn z_regularized(d: &DeformedSpectrum, lambda: f64, q: &QuadratureConfig) -> Result<f64> {
    let tol = inner_tol(q);
    let rate = 0.5 * d.deformed_b1(tol)?;
    let t = transform(lambda, q, rate, |s| characteristic::phi_regularized(d, s, tol))?;
    real_part(t, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized() {
        let q = QuadratureConfig::default();
        for lambda in [1e-6, 0.5, 1.0, 7.0] {
            let t = transform(lambda, &q, 0.0, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
            assert!((t.value.re - 1.0).abs() < 1e-12);
            assert!(t.value.im.abs() < 1e-15);
        }
    }

    #[test]
    fn small_lambda_is_delta() {
        let q = QuadratureConfig::default();
        let z = z_n(&Spectrum::harmonic(), 1e-12, 25, &q).unwrap();
        assert!((z - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mc_at_zero_coupling_is_exact() {
        let (est, se) =
            z_mc_oracle(&Spectrum::harmonic(), 0.0, 5, &McConfig { samples: 5000, seed: 3 }).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let spec = Spectrum::harmonic();
        let cfg = McConfig { samples: 40_000, seed: 11 };
        let a = z_mc_oracle(&spec, 1.0, 3, &cfg).unwrap();
        let b = z_mc_oracle(&spec, 1.0, 3, &cfg).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
        let c = z_mc_oracle(&spec, 1.0, 3, &McConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn bound_scales_inversely_with_c_n() {
        let h = Spectrum::harmonic();
        let b = z_n_bound(&h, 1.0, 100).unwrap();
        let b2 = PI * PI / 6.0;
        let mean_abs = 2.0 / PI.sqrt();
        let expected = 2.0 / c_n(&h, 100) * (mean_abs / 2.0 + mean_abs * b2 / 2.0 + 2.0 * b2 / 2.0);
        assert!((b - expected).abs() < 1e-12);
        // Halving every β doubles c_n and halves the 1/c_n prefactor; b₂ and μ change too,
        // so compare the prefactor alone.
        assert!((c_n(&Spectrum::power_law(0.5, 1.0).unwrap(), 100) - 2.0 * c_n(&h, 100)).abs() < 1e-12);
    }

    #[test]
    fn oscillation_budget_is_enforced() {
        let q = QuadratureConfig { max_nodes: 200, ..QuadratureConfig::default() };
        let r = z_n(&Spectrum::power_law(0.01, 1.0).unwrap(), 1.0, 50, &q);
        assert!(matches!(r, Err(Error::OscillationBudgetExceeded { .. })));
    }

    #[test]
    fn argument_validation() {
        let q = QuadratureConfig::default();
        let h = Spectrum::harmonic();
        assert!(z_n(&h, -1.0, 3, &q).is_err());
        assert!(z_n(&h, 1.0, 0, &q).is_err());
        assert!(z_mc_oracle(&h, 1.0, 65, &McConfig::default()).is_err());
    }
}
