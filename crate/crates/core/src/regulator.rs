//! Regularizing functions `ρ` and the deformed spectrum `β_j(Λ) = β_j / ρ(√(β_j/Λ))`.
//!
//! The inverse sum of the deformed spectrum splits as `r(Λ) + κ + o(1)`.
//! The split is fixed by requiring the closed form of `r` to carry no
//! additive constant, so every constant (including regulator-shape terms
//! such as `2 ln a / c`) lands in `κ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Layout, ModeFn};
use crate::spectrum::Spectrum;

/// Built-in regulator shapes. User-supplied `ρ` would slot in as another
/// variant together with its weight and tail description in `layout`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regulator {
    /// `ρ = 1` on `[0, a]`, zero beyond.
    SharpCutoff { a: f64 },
    /// `ρ(x) = e^(−x)`.
    Exponential,
}

impl Regulator {
    pub fn rho(&self, x: f64) -> f64 {
        match *self {
            Regulator::SharpCutoff { a } => {
                if x <= a {
                    1.0
                } else {
                    0.0
                }
            }
            Regulator::Exponential => (-x).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regulator::SharpCutoff { .. } => "sharp_cutoff",
            Regulator::Exponential => "exponential",
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Regulator = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Regulator::SharpCutoff { a } if !(a.is_finite() && a > 0.0) => {
                Err(Error::InvalidArgument(format!("cutoff a must be positive, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// `β_j(Λ)`; a mode removed by the regulator is `Infinite` and contributes `1/β = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeformedBeta {
    Finite(f64),
    Infinite,
}

impl DeformedBeta {
    pub fn recip(self) -> f64 {
        match self {
            DeformedBeta::Finite(b) => 1.0 / b,
            DeformedBeta::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, DeformedBeta::Infinite)
    }
}

/// Tail indices above 2^53 are no longer exact in `f64`.
pub(crate) const MAX_MODE_INDEX: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DeformedSpectrum {
    pub base: Spectrum,
    pub reg: Regulator,
    pub lambda: f64,
}

impl DeformedSpectrum {
    pub fn new(base: Spectrum, reg: Regulator, lambda: f64) -> Result<Self> {
        reg.validate()?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("Λ must be positive, got {lambda}")));
        }
        let d = Self { base, reg, lambda };
        if let Regulator::SharpCutoff { .. } = reg {
            d.sharp_cutoff_last()?;
        }
        Ok(d)
    }

    pub fn deformed_beta(&self, j: u64) -> DeformedBeta {
        let beta = self.base.beta(j);
        match self.reg {
            Regulator::SharpCutoff { a } => {
                if beta <= a * a * self.lambda {
                    DeformedBeta::Finite(beta)
                } else {
                    DeformedBeta::Infinite
                }
            }
            Regulator::Exponential => {
                let b = beta * (beta / self.lambda).sqrt().exp();
                if b.is_finite() {
                    DeformedBeta::Finite(b)
                } else {
                    DeformedBeta::Infinite
                }
            }
        }
    }

    /// Largest tail index `j` with `c·j^p ≤ a²Λ`, or `head_len` when none survive.
    pub(crate) fn sharp_cutoff_last(&self) -> Result<u64> {
        let Regulator::SharpCutoff { a } = self.reg else { unreachable!("only called for the sharp cutoff") };
        let (c, p) = self.base.tail();
        let threshold = a * a * self.lambda;
        let m = self.base.head_len();
        let approx = (threshold / c).powf(1.0 / p).floor();
        if approx > MAX_MODE_INDEX {
            return Err(Error::InvalidArgument(format!(
                "cutoff Λ = {} keeps more than 2^53 modes",
                self.lambda
            )));
        }
        let mut n = approx as u64;
        while c * ((n + 1) as f64).powf(p) <= threshold {
            n += 1;
        }
        while n > 0 && c * (n as f64).powf(p) > threshold {
            n -= 1;
        }
        Ok(n.max(m))
    }

    /// `Σ_j 1/β_j(Λ)`.
    pub fn deformed_b1(&self, tol: f64) -> Result<f64> {
        Layout::deformed(self)?.sum(ModeFn::Power(1), tol).map(|e| e.value)
    }

    /// Singular part `r(Λ)` of `Σ_j 1/β_j(Λ)` under the constant-free split.
    pub fn r_of_lambda(&self) -> Result<f64> {
        r_of_lambda(&self.base, &self.reg, self.lambda)
    }
}

pub fn r_of_lambda(base: &Spectrum, reg: &Regulator, lambda: f64) -> Result<f64> {
    let (c, p) = base.tail();
    if p > 1.0 {
        return Ok(0.0);
    }
    match *reg {
        Regulator::SharpCutoff { .. } if p == 1.0 => Ok(lambda.ln() / c),
        Regulator::SharpCutoff { a } => {
            let n = (a * a * lambda / c).powf(1.0 / p);
            Ok(n.powf(1.0 - p) / ((1.0 - p) * c))
        }
        Regulator::Exponential if p == 1.0 => Ok(lambda.ln() / c),
        Regulator::Exponential => Err(Error::UnsupportedRegulatorTail { regulator: reg.name(), p }),
    }
}

/// Settings for the `κ` extrapolation on the grid `Λ_k = Λ₀·2^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaGrid {
    pub lambda0: f64,
    pub max_steps: u32,
}

impl Default for KappaGrid {
    fn default() -> Self {
        Self { lambda0: 1024.0, max_steps: 90 }
    }
}

/// `κ = lim_{Λ→∞} (Σ_j 1/β_j(Λ) − r(Λ))`.
pub fn kappa(base: &Spectrum, reg: &Regulator, tol: f64) -> Result<f64> {
    kappa_on_grid(base, reg, tol, KappaGrid::default())
}

pub fn kappa_on_grid(base: &Spectrum, reg: &Regulator, tol: f64, grid: KappaGrid) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    reg.validate()?;
    base.require_class(2)?;
    // Fail early on unsupported tails.
    r_of_lambda(base, reg, grid.lambda0)?;

    let inner_tol = tol * 1e-2;
    let mut previous: Option<f64> = None;
    let mut previous_raw: Option<f64> = None;
    let mut last_diff = f64::INFINITY;
    for k in 0..=grid.max_steps {
        let lambda = grid.lambda0 * 2f64.powi(k as i32);
        let d = match DeformedSpectrum::new(base.clone(), *reg, lambda) {
            Ok(d) => d,
            // Cutoff keeps more modes than are addressable: the grid is exhausted.
            Err(Error::InvalidArgument(_)) => break,
            Err(e) => return Err(e),
        };
        let raw = d.deformed_b1(inner_tol)? - d.r_of_lambda()?;
        // The exponential regulator's remainder expands in powers of Λ^(−1/2);
        // one Richardson step removes the leading one. The sharp cutoff has a
        // floor-function remainder with no such expansion.
        let estimate = match (reg, previous_raw) {
            (Regulator::Exponential, Some(prev)) => {
                let r = std::f64::consts::SQRT_2;
                (r * raw - prev) / (r - 1.0)
            }
            _ => raw,
        };
        if let Some(prev) = previous {
            last_diff = (estimate - prev).abs();
            if last_diff < tol {
                return Ok(estimate);
            }
        }
        if matches!(reg, Regulator::Exponential) && previous_raw.is_none() {
            previous_raw = Some(raw);
            continue;
        }
        previous_raw = Some(raw);
        previous = Some(estimate);
    }
    Err(Error::NoConvergence { last_diff, tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn harmonic_sharp(lambda: f64) -> DeformedSpectrum {
        DeformedSpectrum::new(Spectrum::harmonic(), Regulator::SharpCutoff { a: 1.0 }, lambda).unwrap()
    }

    #[test]
    fn deformed_elements() {
        let d = harmonic_sharp(100.0);
        assert_eq!(d.deformed_beta(50), DeformedBeta::Finite(50.0));
        assert_eq!(d.deformed_beta(100), DeformedBeta::Finite(100.0));
        assert_eq!(d.deformed_beta(200), DeformedBeta::Infinite);
        let e = DeformedSpectrum::new(Spectrum::harmonic(), Regulator::Exponential, 100.0).unwrap();
        match e.deformed_beta(100) {
            DeformedBeta::Finite(b) => assert!((b - 100.0 * E).abs() < 1e-12),
            DeformedBeta::Infinite => panic!("finite expected"),
        }
        let huge = DeformedSpectrum::new(Spectrum::harmonic(), Regulator::Exponential, 1e-6).unwrap();
        assert!(huge.deformed_beta(1_000_000).is_infinite());
    }

    #[test]
    fn rho_shapes() {
        let s = Regulator::SharpCutoff { a: 2.0 };
        assert_eq!(s.rho(0.0), 1.0);
        assert_eq!(s.rho(2.0), 1.0);
        assert_eq!(s.rho(2.0 + 1e-12), 0.0);
        assert_eq!(Regulator::Exponential.rho(0.0), 1.0);
    }

    #[test]
    fn harmonic_cutoff_sum() {
        let h1000: f64 = (1..=1000).map(|j| 1.0 / j as f64).sum();
        assert!((harmonic_sharp(1000.0).deformed_b1(1e-13).unwrap() - h1000).abs() < 1e-12);
        assert!((h1000 - 7.485_470_860_550_345).abs() < 1e-12);
        assert_eq!(harmonic_sharp(1.0).deformed_b1(1e-13).unwrap(), 1.0);
    }

    #[test]
    fn singular_parts() {
        let lam = 10f64.exp();
        assert!((harmonic_sharp(lam).r_of_lambda().unwrap() - 10.0).abs() < 1e-12);
        let twice = Spectrum::power_law(2.0, 1.0).unwrap();
        let r = r_of_lambda(&twice, &Regulator::SharpCutoff { a: 1.0 }, lam).unwrap();
        assert!((r - 5.0).abs() < 1e-12);
        let sq = Spectrum::power_law(1.0, 2.0).unwrap();
        assert_eq!(r_of_lambda(&sq, &Regulator::Exponential, 1e6).unwrap(), 0.0);
        let root = Spectrum::power_law(1.0, 0.75).unwrap();
        assert!(matches!(
            r_of_lambda(&root, &Regulator::Exponential, 1e6),
            Err(Error::UnsupportedRegulatorTail { .. })
        ));
    }

    #[test]
    fn kappa_is_euler_gamma_for_harmonic_cutoff() {
        let k = kappa(&Spectrum::harmonic(), &Regulator::SharpCutoff { a: 1.0 }, 1e-9).unwrap();
        assert!((k - EULER_GAMMA).abs() < 1e-8, "{k}");
    }

    #[test]
    fn kappa_for_scaled_harmonic() {
        let twice = Spectrum::power_law(2.0, 1.0).unwrap();
        let k = kappa(&twice, &Regulator::SharpCutoff { a: 1.0 }, 1e-9).unwrap();
        let expected = EULER_GAMMA / 2.0 - 2f64.ln() / 2.0;
        assert!((k - expected).abs() < 1e-8);
        assert!((expected + 0.057_96).abs() < 1e-5);
    }

    #[test]
    fn kappa_absorbs_cutoff_shape() {
        let h = Spectrum::harmonic();
        let k1 = kappa(&h, &Regulator::SharpCutoff { a: 1.0 }, 1e-10).unwrap();
        let k3 = kappa(&h, &Regulator::SharpCutoff { a: 3.0 }, 1e-10).unwrap();
        assert!((k3 - k1 - 2.0 * 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn kappa_for_summable_spectrum_is_b1() {
        let sq = Spectrum::power_law(1.0, 2.0).unwrap();
        let k = kappa(&sq, &Regulator::SharpCutoff { a: 1.0 }, 1e-9).unwrap();
        assert!((k - PI * PI / 6.0).abs() < 1e-8);
        let ke = kappa(&sq, &Regulator::Exponential, 1e-7).unwrap();
        assert!((ke - PI * PI / 6.0).abs() < 1e-5, "{ke}");
    }

    #[test]
    fn kappa_for_exponential_harmonic_is_minus_gamma() {
        // Σ e^(−√(j/Λ))/j = ln Λ − γ + O(Λ^(−1/2)).
        let k = kappa(&Spectrum::harmonic(), &Regulator::Exponential, 1e-8).unwrap();
        assert!((k + EULER_GAMMA).abs() < 1e-6, "{k}");
    }

    #[test]
    fn sublinear_tail_kappa_is_zeta() {
        // β_j = j^(3/4): Σ_{j≤N} j^(−3/4) = 4 N^(1/4) + ζ(3/4) + o(1).
        let s = Spectrum::power_law(1.0, 0.75).unwrap();
        let k = kappa(&s, &Regulator::SharpCutoff { a: 1.0 }, 1e-6).unwrap();
        let zeta_three_quarters = -3.441_285_386_945_22;
        assert!((k - zeta_three_quarters).abs() < 1e-5, "{k}");
    }

    #[test]
    fn sharp_cutoff_sum_is_monotone_in_lambda() {
        let mut prev = 0.0;
        for lam in [1.0, 2.0, 3.5, 10.0, 99.0, 1e4] {
            let v = harmonic_sharp(lam).deformed_b1(1e-12).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
