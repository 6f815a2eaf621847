use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Exponents of `b₁, b₂, …` (trailing zeros trimmed) and of the shift `ζ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    loops: Vec<u32>,
    zeta: u32,
}

impl Monomial {
    pub fn new(mut loops: Vec<u32>, zeta: u32) -> Self {
        while loops.last() == Some(&0) {
            loops.pop();
        }
        Self { loops, zeta }
    }

    /// Exponent of `b_m` (`m ≥ 1`).
    pub fn loop_exponent(&self, m: usize) -> u32 {
        assert!(m >= 1, "loop symbols are indexed from 1");
        self.loops.get(m - 1).copied().unwrap_or(0)
    }

    pub fn zeta_exponent(&self) -> u32 {
        self.zeta
    }

    /// Largest `m` with a nonzero exponent of `b_m`, or 0.
    pub fn max_loop(&self) -> usize {
        self.loops.len()
    }

    /// `Σ m·(exponent of b_m)`.
    pub fn loop_weight(&self) -> u64 {
        self.loops.iter().enumerate().map(|(i, &e)| (i as u64 + 1) * e as u64).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let len = self.loops.len().max(other.loops.len());
        let loops =
            (0..len).map(|i| self.loops.get(i).unwrap_or(&0) + other.loops.get(i).unwrap_or(&0)).collect();
        Monomial::new(loops, self.zeta + other.zeta)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors = Vec::new();
        for (i, &e) in self.loops.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(format!("b{}", i + 1)),
                _ => factors.push(format!("b{}^{}", i + 1, e)),
            }
        }
        match self.zeta {
            0 => {}
            1 => factors.push("zeta".into()),
            e => factors.push(format!("zeta^{e}")),
        }
        if factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", factors.join("*"))
        }
    }
}

/// Polynomial over `b₁, b₂, …, ζ` with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MomentPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl MomentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(Monomial::default(), c)
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// The loop symbol `b_m`.
    pub fn loop_symbol(m: usize) -> Self {
        assert!(m >= 1, "loop symbols are indexed from 1");
        let mut loops = vec![0; m];
        loops[m - 1] = 1;
        Self::term(Monomial::new(loops, 0), BigRational::one())
    }

    /// The shift symbol `ζ`.
    pub fn zeta() -> Self {
        Self::term(Monomial::new(Vec::new(), 1), BigRational::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Coefficient of a monomial given by its `b` exponents and `ζ` exponent.
    pub fn coefficient(&self, loops: &[u32], zeta: u32) -> BigRational {
        self.terms.get(&Monomial::new(loops.to_vec(), zeta)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Deletes every monomial containing `b₁`.
    pub fn without_b1(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.loop_exponent(1) == 0)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Replaces `b₁` by the polynomial `value`.
    pub fn substitute_b1(&self, value: &MomentPolynomial) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.loop_exponent(1);
            let mut rest = m.loops.clone();
            if !rest.is_empty() {
                rest[0] = 0;
            }
            let base = Self::term(Monomial::new(rest, m.zeta), c.clone());
            out = out + &base * &value.pow(e);
        }
        out
    }

    /// Exact evaluation at `b_m = loops[m−1]` and `ζ = zeta`. Symbols beyond
    /// the supplied values are an error.
    pub fn evaluate(&self, loops: &[BigRational], zeta: &BigRational) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            if m.max_loop() > loops.len() {
                return Err(Error::InvalidArgument(format!(
                    "b{} needed but only {} loop values supplied",
                    m.max_loop(),
                    loops.len()
                )));
            }
            let mut v = c.clone();
            for (i, &e) in m.loops.iter().enumerate() {
                if e > 0 {
                    v *= pow_rational(&loops[i], e);
                }
            }
            if m.zeta > 0 {
                v *= pow_rational(zeta, m.zeta);
            }
            acc += v;
        }
        Ok(acc)
    }

    /// `[{"exponents":{"b1":2,"zeta":1},"num":"-3","den":"4"}, …]`
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    let mut exps = Map::new();
                    for (i, &e) in m.loops.iter().enumerate() {
                        if e > 0 {
                            exps.insert(format!("b{}", i + 1), json!(e));
                        }
                    }
                    if m.zeta > 0 {
                        exps.insert("zeta".into(), json!(m.zeta));
                    }
                    json!({
                        "exponents": exps,
                        "num": c.numer().to_string(),
                        "den": c.denom().to_string(),
                    })
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("polynomial serializes")
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(format!("moment polynomial JSON: {msg}"));
        let items = v.as_array().ok_or_else(|| bad("expected an array".into()))?;
        let mut out = Self::zero();
        for item in items {
            let exps = item
                .get("exponents")
                .and_then(Value::as_object)
                .ok_or_else(|| bad("missing exponents".into()))?;
            let mut loops = Vec::new();
            let mut zeta = 0;
            for (key, e) in exps {
                let e = e
                    .as_u64()
                    .and_then(|e| u32::try_from(e).ok())
                    .ok_or_else(|| bad(format!("bad exponent for {key}")))?;
                if key == "zeta" {
                    zeta = e;
                } else if let Some(idx) = key.strip_prefix('b').and_then(|s| s.parse::<usize>().ok()) {
                    if idx == 0 {
                        return Err(bad("b0 is not a loop symbol".into()));
                    }
                    if loops.len() < idx {
                        loops.resize(idx, 0);
                    }
                    loops[idx - 1] = e;
                } else {
                    return Err(bad(format!("unknown symbol {key}")));
                }
            }
            let parse = |field: &str| -> Result<BigInt> {
                item.get(field)
                    .and_then(Value::as_str)
                    .and_then(|s| s.parse::<BigInt>().ok())
                    .ok_or_else(|| bad(format!("bad {field}")))
            };
            let den = parse("den")?;
            if den.is_zero() {
                return Err(bad("zero denominator".into()));
            }
            out.add_term(Monomial::new(loops, zeta), BigRational::new(parse("num")?, den));
        }
        Ok(out)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_json_value(&v)
    }
}

pub(crate) fn pow_rational(x: &BigRational, e: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

impl fmt::Display for MomentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let mono = m.to_string();
            match (a.is_one(), mono.as_str()) {
                (true, _) => write!(f, "{mono}")?,
                (false, "1") => write!(f, "{a}")?,
                (false, _) => write!(f, "{a}*{mono}")?,
            }
        }
        Ok(())
    }
}

impl Add<&MomentPolynomial> for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn add(self, rhs: &MomentPolynomial) -> MomentPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for MomentPolynomial {
    type Output = MomentPolynomial;
    fn add(self, rhs: MomentPolynomial) -> MomentPolynomial {
        &self + &rhs
    }
}

impl Neg for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn neg(self) -> MomentPolynomial {
        MomentPolynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Sub<&MomentPolynomial> for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn sub(self, rhs: &MomentPolynomial) -> MomentPolynomial {
        self + &(-rhs)
    }
}

impl Sub for MomentPolynomial {
    type Output = MomentPolynomial;
    fn sub(self, rhs: MomentPolynomial) -> MomentPolynomial {
        &self - &rhs
    }
}

impl Mul<&MomentPolynomial> for &MomentPolynomial {
    type Output = MomentPolynomial;
    fn mul(self, rhs: &MomentPolynomial) -> MomentPolynomial {
        let mut out = MomentPolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for MomentPolynomial {
    type Output = MomentPolynomial;
    fn mul(self, rhs: MomentPolynomial) -> MomentPolynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic_cancels() {
        let b1 = MomentPolynomial::loop_symbol(1);
        let z = MomentPolynomial::zeta();
        let sq = (&b1 - &z).pow(2);
        assert_eq!(sq.coefficient(&[1], 1), r(-2, 1));
        let back = &sq - &(&(&b1 * &b1) + &(&z * &z));
        assert_eq!(back, (&b1 * &z).scale(&r(-2, 1)));
        assert!((&sq - &sq).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let p = &MomentPolynomial::loop_symbol(1).pow(2).scale(&r(-3, 4)) * &MomentPolynomial::zeta()
            + MomentPolynomial::loop_symbol(12).scale(&r(5, 7))
            + MomentPolynomial::one();
        let s = p.to_json();
        assert!(s.contains(r#"{"exponents":{"b1":2,"zeta":1},"num":"-3","den":"4"}"#));
        let q = MomentPolynomial::from_json(&s).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.to_json(), s);
    }

    #[test]
    fn display() {
        let p = MomentPolynomial::loop_symbol(1).scale(&r(1, 2)) - MomentPolynomial::zeta();
        assert_eq!(p.to_string(), "-zeta + 1/2*b1");
    }

    #[test]
    fn evaluate_and_substitute() {
        let b1 = MomentPolynomial::loop_symbol(1);
        let b2 = MomentPolynomial::loop_symbol(2);
        let p = &(&b1 * &b2) + &MomentPolynomial::zeta();
        let v = p.evaluate(&[r(2, 1), r(1, 3)], &r(1, 2)).unwrap();
        assert_eq!(v, r(7, 6));
        assert!(p.evaluate(&[r(1, 1)], &r(0, 1)).is_err());
        let s = p.substitute_b1(&MomentPolynomial::zeta());
        assert_eq!(s, &(&MomentPolynomial::zeta() * &b2) + &MomentPolynomial::zeta());
    }
}
