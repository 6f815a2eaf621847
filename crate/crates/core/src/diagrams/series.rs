use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::moments::{binomial, wick_moments};
use super::polynomial::MomentPolynomial;
use crate::error::{Error, Result};

/// A numeric loop value `b_m`. `Infinite` marks a divergent sum (typically
/// `b₁` for spectra outside `B₁`) and can never enter arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopValue {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Coefficient of `(is)^j`: `ℍ(S₁^j)/j!`.
    PhiSeries,
    /// Coefficient of `(−λ)^j`: `ℍ(S₁^{2j})/j!`.
    ZSeries,
    /// `ℍ₁((S₁+ξ−ζ)^j)/j!`.
    PhiRenormSeries,
    /// `ℍ₁((S₁+ξ−ζ)^{2j})/j!`.
    ZRenormSeries,
}

impl SeriesKind {
    pub fn is_renormalized(self) -> bool {
        matches!(self, SeriesKind::PhiRenormSeries | SeriesKind::ZRenormSeries)
    }

    /// Power of `S₁` behind coefficient `j`.
    pub fn power(self, j: u32) -> u32 {
        match self {
            SeriesKind::PhiSeries | SeriesKind::PhiRenormSeries => j,
            SeriesKind::ZSeries | SeriesKind::ZRenormSeries => 2 * j,
        }
    }
}

fn exact(x: f64, what: &str) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidArgument(format!("{what} must be finite, got {x}")))
}

fn factorial(n: u32) -> BigRational {
    BigRational::from_integer((1..=n).fold(1.into(), |acc: num_bigint::BigInt, i| acc * i))
}

/// Coefficients `0..=order` of the chosen formal series, evaluated exactly
/// at the given loop values and `(ξ − ζ) = shift`, then rounded to `f64`.
///
/// `numeric_b[m−1]` is `b_m`; enough values must be supplied for the highest
/// power needed (`order` or `2·order`).
pub fn series_coefficients(
    kind: SeriesKind,
    order: u32,
    numeric_b: &[LoopValue],
    shift: f64,
) -> Result<Vec<f64>> {
    let top = kind.power(order);
    if (numeric_b.len() as u32) < top {
        return Err(Error::InvalidArgument(format!(
            "{kind:?} to order {order} needs b1..b{top}, got {} values",
            numeric_b.len()
        )));
    }
    let shift = exact(shift, "shift")?;
    let mut infinite = Vec::new();
    let mut values = Vec::with_capacity(numeric_b.len());
    for (i, b) in numeric_b.iter().enumerate() {
        match *b {
            LoopValue::Finite(x) => values.push(exact(x, &format!("b{}", i + 1))?),
            LoopValue::Infinite => {
                infinite.push(i + 1);
                values.push(BigRational::zero());
            }
        }
    }
    let mut moments = wick_moments(top);
    if kind.is_renormalized() {
        moments = moments.iter().map(MomentPolynomial::without_b1).collect();
    }
    let zero = BigRational::zero();
    let mut out = Vec::with_capacity(order as usize + 1);
    for j in 0..=order {
        let n = kind.power(j);
        let value = if kind.is_renormalized() {
            // Σ_i C(n,i)·ℍ₁(S₁^i)·shift^(n−i)
            let mut acc = BigRational::zero();
            let mut shift_pow = BigRational::from_integer(1.into());
            for i in (0..=n).rev() {
                let m = &moments[i as usize];
                check_finite(m, &infinite, j)?;
                acc += BigRational::from_integer(binomial(n, i)) * m.evaluate(&values, &zero)? * &shift_pow;
                shift_pow *= &shift;
            }
            acc
        } else {
            let m = &moments[n as usize];
            check_finite(m, &infinite, j)?;
            m.evaluate(&values, &zero)?
        };
        let coefficient = value / factorial(j);
        out.push(coefficient.to_f64().unwrap_or(f64::NAN));
    }
    Ok(out)
}

fn check_finite(p: &MomentPolynomial, infinite: &[usize], order: u32) -> Result<()> {
    for (m, _) in p.terms() {
        for &idx in infinite {
            if idx <= m.max_loop() && m.loop_exponent(idx) > 0 {
                return Err(Error::InfiniteCoefficient { order: order as usize, loop_index: idx });
            }
        }
    }
    Ok(())
}

/// Upper limit for [`partial_sum_scan`].
pub const SCAN_MAX_ORDER: u32 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub order: u32,
    pub partial_sum: Complex64,
    pub reference: Complex64,
    pub abs_error: f64,
}

/// Partial sums of `Σ_k (is)^k·(2k)!/(k!²·4^k)` for the single mode `β₁ = 1`
/// against `(1 − is)^(−1/2)`.
pub fn partial_sum_scan(s: f64, max_order: u32) -> Result<Vec<ScanRow>> {
    if max_order == 0 || max_order > SCAN_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "max_order must be in 1..={SCAN_MAX_ORDER}, got {max_order}"
        )));
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s must be finite, got {s}")));
    }
    let reference = Complex64::new(1.0, -s).powf(-0.5);
    let is = Complex64::new(0.0, s);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut rows = Vec::with_capacity(max_order as usize + 1);
    for k in 0..=max_order {
        sum += term;
        rows.push(ScanRow { order: k, partial_sum: sum, reference, abs_error: (sum - reference).norm() });
        let kf = k as f64;
        term *= is * ((2.0 * kf + 1.0) / (2.0 * (kf + 1.0)));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_phi_series() {
        let ones = vec![LoopValue::Finite(1.0); 4];
        let c = series_coefficients(SeriesKind::PhiSeries, 2, &ones, 0.0).unwrap();
        assert_eq!(c, vec![1.0, 0.5, 0.375]);
        let z = series_coefficients(SeriesKind::ZSeries, 0, &ones, 0.0).unwrap();
        assert_eq!(z, vec![1.0]);
    }

    #[test]
    fn infinite_b1() {
        let b = vec![LoopValue::Infinite, LoopValue::Finite(1.6), LoopValue::Finite(1.2)];
        assert!(matches!(
            series_coefficients(SeriesKind::PhiSeries, 1, &b, 0.0),
            Err(Error::InfiniteCoefficient { order: 1, loop_index: 1 })
        ));
        let c = series_coefficients(SeriesKind::PhiRenormSeries, 3, &b, 0.25).unwrap();
        assert!(c.iter().all(|x| x.is_finite()));
        assert_eq!(c[1], 0.25);
        assert!((c[2] - (0.8 + 0.0625) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_loop_values() {
        let b = vec![LoopValue::Finite(1.0); 3];
        assert!(series_coefficients(SeriesKind::ZSeries, 2, &b, 0.0).is_err());
    }

    #[test]
    fn scan_origin_is_exact() {
        let rows = partial_sum_scan(0.0, 5).unwrap();
        assert!(rows.iter().all(|r| r.partial_sum == Complex64::new(1.0, 0.0) && r.abs_error == 0.0));
    }
}
