// Reciprocal eigenvalues w_j = 1/β_j(Λ) of a (possibly truncated or
// deformed) spectrum, and sums Σ_j g(s·w_j) over them with a bounded error.
//
// A prefix j ≤ D is summed directly. Beyond D the tail is smooth, |s|·w_j ≤ 1/2,
// and g is expanded in powers of w; each power sum Σ_{j>D} w_j^k comes from
// Euler–Maclaurin. Every expansion used is alternating with decreasing
// terms, so the first omitted term bounds the truncation error.

use crate::error::{Error, Result};
use crate::regulator::{DeformedSpectrum, Regulator};
use crate::spectrum::Spectrum;
use crate::summation::{euler_maclaurin, CompensatedSum, Estimate, SmoothTerm};

/// Finite ranges at most this long are summed term by term.
const DIRECT_LIMIT: u64 = 4096;
const MIN_DIRECT: u64 = 256;
const MAX_DIRECT: u64 = 1 << 24;
const MAX_SERIES_TERMS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ModeFn {
    /// `w^k`
    Power(u32),
    /// `ln(1 + s²w²)`
    LogModulus(f64),
    /// `s·w − arctan(s·w)`
    ArctanDefect(f64),
    /// `arctan(s·w)`
    Arctan(f64),
}

pub(crate) fn arctan_defect(v: f64) -> f64 {
    if v.abs() < 0.05 {
        // v³/3 − v⁵/5 + … through v¹⁷
        let v2 = v * v;
        let mut term = v * v2;
        let mut acc = 0.0;
        for (i, denom) in [3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0, 17.0].iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / denom;
            term *= v2;
        }
        acc
    } else {
        v - v.atan()
    }
}

impl ModeFn {
    fn exact(self, w: f64) -> f64 {
        match self {
            ModeFn::Power(k) => w.powi(k as i32),
            ModeFn::LogModulus(s) => (s * s * w * w).ln_1p(),
            ModeFn::ArctanDefect(s) => arctan_defect(s * w),
            ModeFn::Arctan(s) => (s * w).atan(),
        }
    }

    fn s(self) -> f64 {
        match self {
            ModeFn::Power(_) => 0.0,
            ModeFn::LogModulus(s) | ModeFn::ArctanDefect(s) | ModeFn::Arctan(s) => s,
        }
    }

    /// m-th term of the expansion in powers of w: `(k, coefficient of w^k)`.
    fn series_term(self, m: usize) -> Option<(u32, f64)> {
        let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        match self {
            ModeFn::Power(k) => (m == 0).then_some((k, 1.0)),
            ModeFn::LogModulus(s) => {
                let k = 2 * (m + 1);
                Some((k as u32, sign(m) * s.powi(k as i32) / (m + 1) as f64))
            }
            ModeFn::ArctanDefect(s) => {
                let k = 2 * m + 3;
                Some((k as u32, sign(m) * s.powi(k as i32) / k as f64))
            }
            ModeFn::Arctan(s) => {
                let k = 2 * m + 1;
                Some((k as u32, sign(m) * s.powi(k as i32) / k as f64))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Plain,
    /// Projection onto the first n modes.
    #[cfg_attr(not(test), allow(dead_code))]
    Truncated(u64),
    /// Modes with β_j ≤ threshold survive; `last` is the last surviving tail index.
    Sharp {
        threshold: f64,
        last: u64,
    },
    Exponential {
        lambda: f64,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Layout<'a> {
    spectrum: &'a Spectrum,
    kind: Kind,
}

impl<'a> Layout<'a> {
    pub(crate) fn plain(spectrum: &'a Spectrum) -> Self {
        Self { spectrum, kind: Kind::Plain }
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn truncated(spectrum: &'a Spectrum, n: u64) -> Self {
        Self { spectrum, kind: Kind::Truncated(n) }
    }

    pub(crate) fn deformed(d: &'a DeformedSpectrum) -> Result<Self> {
        let kind = match d.reg {
            Regulator::SharpCutoff { a } => {
                Kind::Sharp { threshold: a * a * d.lambda, last: d.sharp_cutoff_last()? }
            }
            Regulator::Exponential => Kind::Exponential { lambda: d.lambda },
        };
        Ok(Self { spectrum: &d.base, kind })
    }

    pub(crate) fn weight(&self, j: u64) -> f64 {
        let beta = self.spectrum.beta(j);
        match self.kind {
            Kind::Plain => 1.0 / beta,
            Kind::Truncated(n) => {
                if j <= n {
                    1.0 / beta
                } else {
                    0.0
                }
            }
            Kind::Sharp { threshold, .. } => {
                if beta <= threshold {
                    1.0 / beta
                } else {
                    0.0
                }
            }
            Kind::Exponential { lambda } => (-(beta / lambda).sqrt()).exp() / beta,
        }
    }

    /// Last index with a possibly nonzero weight (`None` = infinitely many).
    fn last(&self) -> Option<u64> {
        match self.kind {
            Kind::Plain | Kind::Exponential { .. } => None,
            Kind::Truncated(n) => Some(n),
            Kind::Sharp { last, .. } => Some(last),
        }
    }

    /// `w_j^k` on the power-law tail as a smooth function of j.
    fn tail_term(&self, k: u32) -> SmoothTerm {
        let (c, p) = self.spectrum.tail();
        let kf = k as f64;
        let scale = c.powf(-kf);
        match self.kind {
            Kind::Exponential { lambda } => {
                SmoothTerm { scale, rate: kf * (c / lambda).sqrt(), h: 0.5 * p, q: kf * p }
            }
            _ => SmoothTerm::power(scale, kf * p),
        }
    }

    fn direct(&self, f: ModeFn, from: u64, to: u64) -> Estimate {
        let mut acc = CompensatedSum::new();
        let mut magnitude = 0.0;
        for j in from..=to {
            let w = self.weight(j);
            if w != 0.0 {
                let g = f.exact(w);
                acc.add(g);
                magnitude += g.abs();
            }
        }
        Estimate { value: acc.value(), error: 4.0 * f64::EPSILON * magnitude }
    }

    /// `Σ_{j>from} g(w_j)` over the smooth tail via the power expansion.
    fn tail_series(&self, f: ModeFn, from: u64, tol: f64) -> Result<Estimate> {
        let last = self.last();
        let (_, p) = self.spectrum.tail();
        let mut acc = CompensatedSum::new();
        let mut error = 0.0;
        for m in 0..MAX_SERIES_TERMS {
            let Some((k, coef)) = f.series_term(m) else {
                return Ok(Estimate { value: acc.value(), error });
            };
            if coef == 0.0 {
                return Ok(Estimate { value: acc.value(), error });
            }
            let term = self.tail_term(k);
            if last.is_none() && term.rate == 0.0 && term.q <= 1.0 {
                return Err(Error::DivergentSum { k, p });
            }
            let t = euler_maclaurin(&term, from, last)?;
            let contribution = coef * t.value;
            acc.add(contribution);
            error += coef.abs() * t.error;
            if matches!(f, ModeFn::Power(_)) {
                return Ok(Estimate { value: acc.value(), error });
            }
            if contribution.abs() <= 1e-3 * tol || contribution == 0.0 {
                // Alternating series with shrinking terms: the next one is smaller still.
                error += contribution.abs();
                return Ok(Estimate { value: acc.value(), error });
            }
        }
        Err(Error::NoConvergence { last_diff: error, tol })
    }

    pub(crate) fn sum(&self, f: ModeFn, tol: f64) -> Result<Estimate> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
        }
        let m = self.spectrum.head_len();
        if let Some(last) = self.last() {
            if last <= DIRECT_LIMIT.max(m) {
                return Ok(self.direct(f, 1, last));
            }
        }
        let (c, p) = self.spectrum.tail();
        // Beyond this index |s|·w_j ≤ 1/2 on the tail.
        let s_bound = (2.0 * f.s().abs() / c).powf(1.0 / p).ceil();
        if s_bound > MAX_DIRECT as f64 {
            return Err(Error::InvalidArgument(format!("|s| = {} too large for the tail expansion", f.s())));
        }
        let mut split = m.max(MIN_DIRECT).max(s_bound as u64);
        let mut head = self.direct(f, 1, split);
        loop {
            if let Some(last) = self.last() {
                if split >= last {
                    return Ok(head);
                }
            }
            let tail = self.tail_series(f, split, tol)?;
            let total = head + tail;
            // The head error is pure roundoff and only grows with the split,
            // so a tail that already meets the target ends the search.
            let floor = 16.0 * f64::EPSILON * total.value.abs();
            if total.error <= tol.max(floor) || tail.error <= 0.5 * tol {
                return Ok(total);
            }
            if split >= MAX_DIRECT {
                return Err(Error::NoConvergence { last_diff: total.error, tol });
            }
            let next = (split * 4).min(self.last().unwrap_or(u64::MAX));
            head = head + self.direct(f, split + 1, next);
            split = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_defect_branches_agree() {
        let long_series = |v: f64| -> f64 {
            (1..40)
                .map(|k| {
                    let e = 2 * k + 1;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign * v.powi(e) / e as f64
                })
                .sum()
        };
        for &v in &[0.049_999, -0.0499, 1e-3, 1e-8] {
            let reference = long_series(v);
            assert!((arctan_defect(v) - reference).abs() <= 1e-15 * reference.abs());
        }
        for &v in &[0.05, 0.08, -0.3] {
            let reference = long_series(v);
            assert!((arctan_defect(v) - reference).abs() <= 1e-11 * reference.abs());
        }
        assert!((arctan_defect(1e-6) - (1e-18 / 3.0 - 1e-30 / 5.0)).abs() < 1e-33);
    }

    #[test]
    fn tail_expansion_matches_direct_sum() {
        let spec = Spectrum::harmonic();
        let n = 200_000;
        let layout = Layout::truncated(&spec, n);
        for f in [ModeFn::LogModulus(1.5), ModeFn::ArctanDefect(-2.0), ModeFn::Arctan(0.7), ModeFn::Power(2)]
        {
            let fast = layout.sum(f, 1e-13).unwrap();
            let slow = layout.direct(f, 1, n);
            assert!(
                (fast.value - slow.value).abs() < 1e-12 + fast.error,
                "{f:?}: {} vs {}",
                fast.value,
                slow.value
            );
        }
    }

    #[test]
    fn divergent_tail_detected() {
        let spec = Spectrum::harmonic();
        let r = Layout::plain(&spec).sum(ModeFn::Arctan(1.0), 1e-10);
        assert!(matches!(r, Err(Error::DivergentSum { k: 1, .. })));
    }
}
