//! Positive spectra `β = {β_j}` with power-law tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Layout, ModeFn};

/// A positive sequence with `β_j → +∞`.
///
/// Only power-law tails are representable, which keeps every class
/// membership question decidable and every tail sum boundable in closed
/// form. Ordering is not assumed: the head of [`Spectrum::ExplicitWithTail`]
/// may be arbitrary positive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", try_from = "SpectrumDescriptor", into = "SpectrumDescriptor")]
pub enum Spectrum {
    /// `β_j = c · j^p`.
    PowerLaw { c: f64, p: f64 },
    /// `β_j = head[j−1]` for `j ≤ head.len()`, then `tail_c · j^tail_p`.
    ExplicitWithTail { head: Vec<f64>, tail_c: f64, tail_p: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum SpectrumDescriptor {
    PowerLaw { c: f64, p: f64 },
    ExplicitWithTail { head: Vec<f64>, tail_c: f64, tail_p: f64 },
}

impl TryFrom<SpectrumDescriptor> for Spectrum {
    type Error = Error;

    fn try_from(d: SpectrumDescriptor) -> Result<Self> {
        match d {
            SpectrumDescriptor::PowerLaw { c, p } => Spectrum::power_law(c, p),
            SpectrumDescriptor::ExplicitWithTail { head, tail_c, tail_p } => {
                Spectrum::explicit_with_tail(head, tail_c, tail_p)
            }
        }
    }
}

impl From<Spectrum> for SpectrumDescriptor {
    fn from(s: Spectrum) -> Self {
        match s {
            Spectrum::PowerLaw { c, p } => SpectrumDescriptor::PowerLaw { c, p },
            Spectrum::ExplicitWithTail { head, tail_c, tail_p } => {
                SpectrumDescriptor::ExplicitWithTail { head, tail_c, tail_p }
            }
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {x}")))
    }
}

impl Spectrum {
    pub fn power_law(c: f64, p: f64) -> Result<Self> {
        positive("c", c)?;
        positive("p", p)?;
        Ok(Spectrum::PowerLaw { c, p })
    }

    pub fn explicit_with_tail(head: Vec<f64>, tail_c: f64, tail_p: f64) -> Result<Self> {
        for (i, &b) in head.iter().enumerate() {
            positive(&format!("head[{i}]"), b)?;
        }
        positive("tail_c", tail_c)?;
        positive("tail_p", tail_p)?;
        Ok(Spectrum::ExplicitWithTail { head, tail_c, tail_p })
    }

    /// `β_j = j`, the canonical member of `B₂ ∖ B₁`.
    pub fn harmonic() -> Self {
        Spectrum::PowerLaw { c: 1.0, p: 1.0 }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serializes")
    }

    /// Coefficient and exponent of the power-law tail.
    pub fn tail(&self) -> (f64, f64) {
        match *self {
            Spectrum::PowerLaw { c, p } => (c, p),
            Spectrum::ExplicitWithTail { tail_c, tail_p, .. } => (tail_c, tail_p),
        }
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail().1
    }

    /// Number of leading elements given explicitly.
    pub fn head_len(&self) -> u64 {
        match self {
            Spectrum::PowerLaw { .. } => 0,
            Spectrum::ExplicitWithTail { head, .. } => head.len() as u64,
        }
    }

    /// `β_j` for `j ≥ 1`.
    pub fn beta(&self, j: u64) -> f64 {
        assert!(j >= 1, "spectrum is indexed from 1");
        match self {
            Spectrum::PowerLaw { c, p } => c * (j as f64).powf(*p),
            Spectrum::ExplicitWithTail { head, tail_c, tail_p } => {
                if j as usize <= head.len() {
                    head[j as usize - 1]
                } else {
                    tail_c * (j as f64).powf(*tail_p)
                }
            }
        }
    }

    /// `β ∈ B_k`, i.e. `Σ β_j^(−k) < ∞`.
    pub fn in_class(&self, k: u32) -> bool {
        k as f64 * self.tail_exponent() > 1.0
    }

    /// `μ(β) = min_j β_j`.
    pub fn mu(&self) -> f64 {
        let (c, p) = self.tail();
        let m = self.head_len();
        // The tail is increasing, so its first element is its minimum.
        let tail_min = c * ((m + 1) as f64).powf(p);
        match self {
            Spectrum::PowerLaw { .. } => tail_min,
            Spectrum::ExplicitWithTail { head, .. } => head.iter().copied().fold(tail_min, f64::min),
        }
    }

    /// `b_k(β) = Σ_j β_j^(−k)` to absolute accuracy `tol`.
    pub fn b_sum(&self, k: u32, tol: f64) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("b_k is defined for k ≥ 1".into()));
        }
        if !self.in_class(k) {
            return Err(Error::DivergentSum { k, p: self.tail_exponent() });
        }
        Layout::plain(self).sum(ModeFn::Power(k), tol).map(|e| e.value)
    }

    /// Like [`Spectrum::b_sum`] but returns the error bound as well.
    pub fn b_sum_estimate(&self, k: u32, tol: f64) -> Result<crate::summation::Estimate> {
        if !self.in_class(k) {
            return Err(Error::DivergentSum { k, p: self.tail_exponent() });
        }
        Layout::plain(self).sum(ModeFn::Power(k), tol)
    }

    pub(crate) fn require_class(&self, k: u32) -> Result<()> {
        if self.in_class(k) {
            Ok(())
        } else {
            Err(Error::NotInClass { k, p: self.tail_exponent() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn element_access() {
        assert_eq!(Spectrum::harmonic().beta(7), 7.0);
        assert_eq!(Spectrum::power_law(2.0, 1.0).unwrap().beta(1), 2.0);
        let e = Spectrum::explicit_with_tail(vec![5.0, 3.0], 1.0, 1.0).unwrap();
        assert_eq!(e.beta(2), 3.0);
        assert_eq!(e.beta(3), 3.0);
        assert_eq!(e.beta(4), 4.0);
    }

    #[test]
    fn minimum() {
        assert_eq!(Spectrum::harmonic().mu(), 1.0);
        let e = Spectrum::explicit_with_tail(vec![5.0, 3.0], 1.0, 1.0).unwrap();
        assert_eq!(e.mu(), 3.0);
        assert_eq!(Spectrum::power_law(0.5, 2.0).unwrap().mu(), 0.5);
        let low_tail = Spectrum::explicit_with_tail(vec![5.0, 9.0], 0.1, 1.0).unwrap();
        assert!((low_tail.mu() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn class_membership() {
        let h = Spectrum::harmonic();
        assert!(!h.in_class(1));
        assert!(h.in_class(2));
        assert!(Spectrum::power_law(1.0, 2.0 / 3.0).unwrap().in_class(2));
        assert!(Spectrum::power_law(1.0, 3.0).unwrap().in_class(1));
    }

    #[test]
    fn basel_sum() {
        let b2 = Spectrum::harmonic().b_sum(2, 1e-10).unwrap();
        // ζ(2) to 40 digits: 1.644934066848226436472415166646025189219
        assert!((b2 - 1.644_934_066_848_226_4).abs() < 1e-10);
        let scaled = Spectrum::power_law(2.0, 1.0).unwrap().b_sum(2, 1e-10).unwrap();
        assert!((scaled - PI * PI / 24.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_b1_diverges() {
        assert_eq!(Spectrum::harmonic().b_sum(1, 1e-10), Err(Error::DivergentSum { k: 1, p: 1.0 }));
    }

    #[test]
    fn explicit_head_adds_exactly() {
        let e = Spectrum::explicit_with_tail(vec![5.0, 3.0], 1.0, 1.0).unwrap();
        let b2 = e.b_sum(2, 1e-12).unwrap();
        let expected = PI * PI / 6.0 - 1.0 - 0.25 + 1.0 / 25.0 + 1.0 / 9.0;
        assert!((b2 - expected).abs() < 1e-12);
    }

    #[test]
    fn json_descriptors() {
        let s = Spectrum::from_json(r#"{"family":"power_law","c":1.0,"p":1.0}"#).unwrap();
        assert_eq!(s, Spectrum::harmonic());
        let e = Spectrum::from_json(
            r#"{"family":"explicit_with_tail","head":[5.0,3.0],"tail_c":1.0,"tail_p":1.0}"#,
        )
        .unwrap();
        assert_eq!(e.head_len(), 2);
        assert_eq!(Spectrum::from_json(&e.to_json()).unwrap(), e);
        assert!(Spectrum::from_json(r#"{"family":"power_law","c":-1.0,"p":1.0}"#).is_err());
        assert!(Spectrum::from_json(r#"{"family":"weird"}"#).is_err());
    }
}
