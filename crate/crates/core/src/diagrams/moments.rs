use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::polynomial::{MomentPolynomial, Monomial};

/// Soft upper limit for [`wick_moment`].
pub const WICK_MAX_K: u32 = 60;
/// Upper limit for [`wick_moment_bruteforce`].
pub const BRUTEFORCE_MAX_K: u32 = 8;
/// Upper limit for [`verify_renorm_identity`].
pub const IDENTITY_MAX_N: u32 = 20;

/// `ℍ` sums every pairing; `ℍ₁` additionally discards all `b₁` loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentOperator {
    H,
    H1,
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn ratio(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// `ℍ(S₁^0), …, ℍ(S₁^k)` from the cumulant recurrence
/// `m_k = Σ_{m=1..k} C(k−1, m−1)·κ_m·m_{k−m}` with `κ_m = (m−1)!·b_m/2`.
pub fn wick_moments(k: u32) -> Vec<MomentPolynomial> {
    let half = BigRational::new(1.into(), 2.into());
    let cumulants: Vec<MomentPolynomial> = (1..=k)
        .map(|m| MomentPolynomial::loop_symbol(m as usize).scale(&(ratio(factorial(m - 1)) * &half)))
        .collect();
    let mut moments = vec![MomentPolynomial::one()];
    for n in 1..=k {
        let mut acc = MomentPolynomial::zero();
        for m in 1..=n {
            let term = &cumulants[m as usize - 1] * &moments[(n - m) as usize];
            acc = acc + term.scale(&ratio(binomial(n - 1, m - 1)));
        }
        moments.push(acc);
    }
    moments
}

/// `ℍ(S₁^k)` as an exact polynomial in `b₁ … b_k`.
pub fn wick_moment(k: u32) -> MomentPolynomial {
    wick_moments(k).pop().expect("at least the constant moment")
}

/// Result of enumerating every perfect matching of the `2k` half-lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingCount {
    pub polynomial: MomentPolynomial,
    pub matchings: u64,
}

/// Loop-length histogram (index ℓ−1 counts loops through ℓ vertices) → multiplicity.
type Histogram = BTreeMap<Vec<u32>, u64>;

fn loop_histogram(partner: &[usize], k: usize) -> Vec<u32> {
    let mut seen = vec![false; k];
    let mut hist = vec![0u32; k];
    for start in 0..k {
        if seen[start] {
            continue;
        }
        // Walk: leave vertex v by half-line 2v, arrive at the partner's vertex,
        // leave that vertex by its other half-line.
        let mut length = 0;
        let mut h = 2 * start;
        loop {
            let v = h / 2;
            if seen[v] {
                break;
            }
            seen[v] = true;
            length += 1;
            h = partner[h] ^ 1;
        }
        hist[length - 1] += 1;
    }
    hist
}

fn enumerate(partner: &mut Vec<usize>, k: usize, out: &mut Histogram) {
    let Some(first) = partner.iter().position(|&p| p == usize::MAX) else {
        *out.entry(loop_histogram(partner, k)).or_insert(0) += 1;
        return;
    };
    for other in first + 1..2 * k {
        if partner[other] == usize::MAX {
            partner[first] = other;
            partner[other] = first;
            enumerate(partner, k, out);
            partner[first] = usize::MAX;
            partner[other] = usize::MAX;
        }
    }
}

/// Enumerates all `(2k−1)!!` pairings of the half-lines of `k` copies of the
/// vertex `S₁` and maps each closed loop through `ℓ` vertices to `b_ℓ/2^ℓ`.
pub fn wick_pairings(k: u32) -> PairingCount {
    assert!(k <= BRUTEFORCE_MAX_K, "brute force is limited to k ≤ {BRUTEFORCE_MAX_K}");
    let k = k as usize;
    if k == 0 {
        return PairingCount { polynomial: MomentPolynomial::one(), matchings: 1 };
    }
    let partials: Vec<Histogram> = (1..2 * k)
        .into_par_iter()
        .map(|first_partner| {
            let mut partner = vec![usize::MAX; 2 * k];
            partner[0] = first_partner;
            partner[first_partner] = 0;
            let mut hist = Histogram::new();
            enumerate(&mut partner, k, &mut hist);
            hist
        })
        .collect();
    let mut merged = Histogram::new();
    for h in partials {
        for (key, n) in h {
            *merged.entry(key).or_insert(0) += n;
        }
    }
    let mut polynomial = MomentPolynomial::zero();
    let mut matchings = 0;
    for (hist, n) in merged {
        matchings += n;
        let mut weight = BigRational::from_integer(n.into());
        for (i, &count) in hist.iter().enumerate() {
            let two_pow = BigInt::from(2).pow((i as u32 + 1) * count);
            weight /= BigRational::from_integer(two_pow);
        }
        polynomial.add_term(Monomial::new(hist, 0), weight);
    }
    PairingCount { polynomial, matchings }
}

pub fn wick_moment_bruteforce(k: u32) -> MomentPolynomial {
    wick_pairings(k).polynomial
}

/// `ℍ₁(S₁^k)`: [`wick_moment`] with every `b₁` monomial deleted.
pub fn h1_moment(k: u32) -> MomentPolynomial {
    wick_moment(k).without_b1()
}

fn moments_for(op: MomentOperator, n: u32) -> Vec<MomentPolynomial> {
    let all = wick_moments(n);
    match op {
        MomentOperator::H => all,
        MomentOperator::H1 => all.iter().map(MomentPolynomial::without_b1).collect(),
    }
}

/// `Σ_i C(n,i)·moments[i]·shift^(n−i)`.
fn binomial_expand(moments: &[MomentPolynomial], n: u32, shift: &MomentPolynomial) -> MomentPolynomial {
    let mut powers = vec![MomentPolynomial::one()];
    for _ in 0..n {
        let next = powers.last().unwrap() * shift;
        powers.push(next);
    }
    let mut out = MomentPolynomial::zero();
    for i in 0..=n {
        let term = &moments[i as usize] * &powers[(n - i) as usize];
        out = out + term.scale(&ratio(binomial(n, i)));
    }
    out
}

/// `op((S₁ − ζ)^n)` with `ζ` symbolic.
pub fn shifted_moment(op: MomentOperator, n: u32) -> MomentPolynomial {
    binomial_expand(&moments_for(op, n), n, &-&MomentPolynomial::zeta())
}

/// `ℍ₁((S₁ + ξ − ζ)^n)` with `ξ = b₁/2`.
pub fn renormalized_side(n: u32) -> MomentPolynomial {
    let xi = MomentPolynomial::loop_symbol(1).scale(&BigRational::new(1.into(), 2.into()));
    let shift = &xi - &MomentPolynomial::zeta();
    binomial_expand(&moments_for(MomentOperator::H1, n), n, &shift)
}

/// Exact check of `ℍ((S₁−ζ)^n) = ℍ₁((S₁+ξ−ζ)^n)` at `ξ = b₁/2`.
pub fn verify_renorm_identity(n: u32) -> bool {
    assert!(n <= IDENTITY_MAX_N, "identity check is limited to n ≤ {IDENTITY_MAX_N}");
    shifted_moment(MomentOperator::H, n) == renormalized_side(n)
}
