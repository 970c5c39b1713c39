//! Truncated arithmetic in `Q_p`.
//!
//! A [`PadicNum`] is `p^val * unit` where the unit is known modulo `p^rel`
//! (its relative precision, at most the working precision `N`). Exact zero is
//! a distinguished value with infinite valuation. A difference of two close
//! numbers that cancels every known digit becomes an *inexact* zero `O(p^a)`,
//! which keeps the absolute precision `a` and is never confused with exact
//! zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

const INF_VAL: i64 = i64::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("precision {prec} out of range for p = {p} (allowed 1..={max})")]
    InvalidPrecision { p: u32, prec: u32, max: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: need {needed} digits, have {available}")]
    PrecisionExhausted { needed: i64, available: i64 },
    #[error("cannot parse p-adic literal {0:?}")]
    Parse(String),
}

/// Residue characteristic and working precision shared by a family of numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicConfig {
    p: u32,
    prec: u32,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PadicConfig {
    pub fn new(p: u32, prec: u32) -> Result<Self, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        let max = Self::max_precision(p);
        if prec == 0 || prec > max {
            return Err(PadicError::InvalidPrecision { p, prec, max });
        }
        Ok(PadicConfig { p, prec })
    }

    /// Largest `N` with `p^N < 2^63`, so residues fit a `u64` and products a `u128`.
    pub fn max_precision(p: u32) -> u32 {
        let mut n = 0u32;
        let mut acc: u128 = 1;
        while acc * (p as u128) < (1u128 << 63) {
            acc *= p as u128;
            n += 1;
        }
        n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `p^e` for `0 <= e <= prec`.
    pub fn pow_p(&self, e: u32) -> u64 {
        (self.p as u64).pow(e)
    }

    pub fn zero(&self) -> PadicNum {
        PadicNum { val: INF_VAL, unit: 0, rel: 0, cfg: *self }
    }

    pub fn one(&self) -> PadicNum {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> PadicNum {
        if n == 0 {
            return self.zero();
        }
        let p = self.p as i128;
        let mut m = n as i128;
        let mut v = 0i64;
        while m % p == 0 {
            m /= p;
            v += 1;
        }
        let modulus = self.pow_p(self.prec) as i128;
        PadicNum { val: v, unit: m.rem_euclid(modulus) as u64, rel: self.prec, cfg: *self }
    }

    /// `p^e` as an exact number.
    pub fn p_power(&self, e: i64) -> PadicNum {
        PadicNum { val: e, unit: 1, rel: self.prec, cfg: *self }
    }

    pub fn rational(&self, num: i64, den: i64) -> Result<PadicNum, PadicError> {
        self.int(num).checked_div(&self.int(den))
    }

    /// Parses an integer (`-12`), a rational (`1/3`) or a digit string (`v2:u31`).
    pub fn parse(&self, s: &str) -> Result<PadicNum, PadicError> {
        let s = s.trim();
        let err = || PadicError::Parse(s.to_string());
        if let Some(rest) = s.strip_prefix('v') {
            let (v, digits) = rest.split_once(":u").ok_or_else(err)?;
            if v == "inf" {
                return if digits.is_empty() { Ok(self.zero()) } else { Err(err()) };
            }
            let val: i64 = v.parse().map_err(|_| err())?;
            let rel = digits.len() as u32;
            if rel > self.prec {
                return Err(err());
            }
            let mut unit: u64 = 0;
            for ch in digits.chars().rev() {
                let d = ch.to_digit(36).filter(|d| *d < self.p).ok_or_else(err)?;
                unit = unit * self.p as u64 + d as u64;
            }
            if rel > 0 && unit.is_multiple_of(self.p as u64) {
                return Err(err());
            }
            return Ok(PadicNum { val, unit, rel, cfg: *self });
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| err())?;
            let d: i64 = d.trim().parse().map_err(|_| err())?;
            return self.rational(n, d);
        }
        let n: i64 = s.parse().map_err(|_| err())?;
        Ok(self.int(n))
    }
}

/// Valuation of a p-adic number; exact zero has `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicNum {
    val: i64,
    unit: u64,
    rel: u32,
    cfg: PadicConfig,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn inv_mod(a: u64, m: u64) -> u64 {
    // extended Euclid; a is coprime to m
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

impl PadicNum {
    pub fn config(&self) -> PadicConfig {
        self.cfg
    }

    pub fn p(&self) -> u32 {
        self.cfg.p
    }

    pub fn valuation(&self) -> Valuation {
        if self.val == INF_VAL {
            Valuation::Infinity
        } else {
            Valuation::Finite(self.val)
        }
    }

    /// Valuation as an integer, `i64::MAX` for exact zero. For an inexact
    /// zero this is the guaranteed lower bound.
    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    /// Number of known unit digits.
    pub fn rel_precision(&self) -> u32 {
        self.rel
    }

    /// Absolute precision `val + rel`; `i64::MAX` for exact zero.
    pub fn abs_precision(&self) -> i64 {
        if self.is_exact_zero() {
            INF_VAL
        } else {
            self.val + self.rel as i64
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.val == INF_VAL
    }

    /// True for exact zero and for numbers with no known nonzero digit.
    pub fn is_zero(&self) -> bool {
        self.val == INF_VAL || self.rel == 0
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    pub fn is_integral(&self) -> bool {
        self.val >= 0
    }

    fn modulus(&self) -> u64 {
        self.cfg.pow_p(self.rel)
    }

    fn big_o(cfg: PadicConfig, abs: i64) -> PadicNum {
        PadicNum { val: abs, unit: 0, rel: 0, cfg }
    }

    fn from_scaled(cfg: PadicConfig, base_val: i64, t: u64, rel: u32) -> PadicNum {
        // t is known mod p^rel relative to p^base_val
        if rel == 0 || t == 0 {
            return PadicNum::big_o(cfg, base_val + rel as i64);
        }
        let p = cfg.p as u64;
        let mut t = t;
        let mut j = 0u32;
        while t.is_multiple_of(p) {
            t /= p;
            j += 1;
        }
        let rel = rel - j;
        PadicNum { val: base_val + j as i64, unit: t % cfg.pow_p(rel), rel, cfg }
    }

    /// Decides `val(self) >= m`, failing if the known digits cannot tell.
    pub fn val_at_least(&self, m: i64) -> Result<bool, PadicError> {
        if self.is_exact_zero() {
            return Ok(true);
        }
        if self.rel == 0 && self.val < m {
            return Err(PadicError::PrecisionExhausted { needed: m, available: self.val });
        }
        Ok(self.val >= m)
    }

    /// Reduces the relative precision to at most `rel` digits.
    pub fn with_rel_precision(&self, rel: u32) -> PadicNum {
        if self.is_exact_zero() || rel >= self.rel {
            return *self;
        }
        PadicNum { val: self.val, unit: self.unit % self.cfg.pow_p(rel), rel, cfg: self.cfg }
    }

    pub fn checked_inv(&self) -> Result<PadicNum, PadicError> {
        if self.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        Ok(PadicNum { val: -self.val, unit: inv_mod(self.unit, self.modulus()), rel: self.rel, cfg: self.cfg })
    }

    pub fn checked_div(&self, other: &PadicNum) -> Result<PadicNum, PadicError> {
        Ok(*self * other.checked_inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<PadicNum, PadicError> {
        let base = if e < 0 { self.checked_inv()? } else { *self };
        let mut acc = self.cfg.one();
        let mut b = base;
        let mut e = e.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b;
            }
            b = b * b;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Multiplies by `p^e`.
    pub fn shift(&self, e: i64) -> PadicNum {
        if self.is_exact_zero() {
            return *self;
        }
        PadicNum { val: self.val + e, ..*self }
    }

    /// Least non-negative representative of `self mod p^m`: the digits of
    /// `self` strictly below position `m`. The result is exact.
    pub fn residue_mod(&self, m: i64) -> Result<PadicNum, PadicError> {
        if self.is_exact_zero() || self.val >= m {
            if !self.is_exact_zero() && self.rel == 0 && self.val < m {
                return Err(PadicError::PrecisionExhausted { needed: m, available: self.abs_precision() });
            }
            return Ok(self.cfg.zero());
        }
        let need = m - self.val;
        if need > self.rel as i64 {
            return Err(PadicError::PrecisionExhausted { needed: m, available: self.abs_precision() });
        }
        let unit = self.unit % self.cfg.pow_p(need as u32);
        Ok(PadicNum { val: self.val, unit, rel: self.cfg.prec, cfg: self.cfg })
    }

    /// For integral `self`, the integer in `[0, p^m)` congruent to it.
    pub fn to_u64_mod(&self, m: u32) -> Result<u64, PadicError> {
        debug_assert!(self.is_zero() || self.val >= 0);
        let r = self.residue_mod(m as i64)?;
        if r.is_exact_zero() {
            return Ok(0);
        }
        Ok(self.cfg.pow_p(r.val as u32) * r.unit)
    }

    /// Little-endian base-p digits of the unit.
    pub fn unit_digits(&self) -> Vec<u32> {
        let p = self.cfg.p as u64;
        let mut u = self.unit;
        (0..self.rel)
            .map(|_| {
                let d = (u % p) as u32;
                u /= p;
                d
            })
            .collect()
    }

    /// Deterministic total order on representations (not a field order).
    pub fn sort_key(&self) -> (i64, u64, u32) {
        (self.val, self.unit, self.rel)
    }

    pub fn cmp_repr(&self, other: &PadicNum) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for PadicNum {
    /// Serialized as `v<valuation>:u<unit digits, little-endian>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return write!(f, "vinf:u");
        }
        write!(f, "v{}:u", self.val)?;
        for d in self.unit_digits() {
            write!(f, "{}", std::char::from_digit(d, 36).unwrap())?;
        }
        Ok(())
    }
}

impl Neg for PadicNum {
    type Output = PadicNum;
    fn neg(self) -> PadicNum {
        if self.is_zero() {
            return self;
        }
        let m = self.modulus();
        PadicNum { unit: (m - self.unit) % m, ..self }
    }
}

impl Add for PadicNum {
    type Output = PadicNum;
    fn add(self, rhs: PadicNum) -> PadicNum {
        debug_assert_eq!(self.cfg.p, rhs.cfg.p);
        if self.is_exact_zero() {
            return rhs;
        }
        if rhs.is_exact_zero() {
            return self;
        }
        let abs = self.abs_precision().min(rhs.abs_precision());
        let base = self.val.min(rhs.val);
        if abs <= base {
            return PadicNum::big_o(self.cfg, abs);
        }
        let rel = (abs - base) as u32;
        let m = self.cfg.pow_p(rel);
        let term = |x: &PadicNum| -> u64 {
            let shift = x.val - base;
            if x.rel == 0 || shift >= rel as i64 {
                0
            } else {
                mulmod(x.unit % m, self.cfg.pow_p(shift as u32), m)
            }
        };
        let t = (term(&self) as u128 + term(&rhs) as u128) % m as u128;
        PadicNum::from_scaled(self.cfg, base, t as u64, rel)
    }
}

impl Sub for PadicNum {
    type Output = PadicNum;
    fn sub(self, rhs: PadicNum) -> PadicNum {
        self + (-rhs)
    }
}

impl Mul for PadicNum {
    type Output = PadicNum;
    fn mul(self, rhs: PadicNum) -> PadicNum {
        debug_assert_eq!(self.cfg.p, rhs.cfg.p);
        if self.is_exact_zero() || rhs.is_exact_zero() {
            return self.cfg.zero();
        }
        let val = self.val + rhs.val;
        let rel = self.rel.min(rhs.rel);
        if rel == 0 {
            return PadicNum::big_o(self.cfg, val + rel as i64);
        }
        let m = self.cfg.pow_p(rel);
        PadicNum { val, unit: mulmod(self.unit % m, rhs.unit % m, m), rel, cfg: self.cfg }
    }
}

impl Serialize for PadicNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for PadicConfig {
    type Err = PadicError;
    /// `"p:N"`, e.g. `"3:20"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, n) = s.split_once(':').ok_or_else(|| PadicError::Parse(s.to_string()))?;
        let p = p.parse().map_err(|_| PadicError::Parse(s.to_string()))?;
        let n = n.parse().map_err(|_| PadicError::Parse(s.to_string()))?;
        PadicConfig::new(p, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(p: u32) -> PadicConfig {
        PadicConfig::new(p, 12).unwrap()
    }

    #[test]
    fn literal_examples() {
        let c3 = cfg(3);
        let s = c3.int(9) + c3.int(18);
        assert_eq!((s.val(), s.unit()), (3, 1));

        let c2 = cfg(2);
        let x = c2.int(12);
        assert_eq!((x.val(), x.unit()), (2, 3));
        assert_eq!(x.valuation(), Valuation::Finite(2));

        let third = c3.rational(1, 3).unwrap();
        assert_eq!((third.val(), third.unit()), (-1, 1));
        assert_eq!(c3.int(9).valuation(), Valuation::Finite(2));
        assert_eq!(c3.zero().valuation(), Valuation::Infinity);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let c = cfg(5);
        assert_eq!(c.one().checked_div(&c.zero()), Err(PadicError::DivisionByZero));
        // an inexact zero is not invertible either
        let z = c.one() - c.one();
        assert!(z.is_zero() && !z.is_exact_zero());
        assert!(z.checked_inv().is_err());
    }

    #[test]
    fn cancellation_tracks_precision() {
        let c = cfg(3);
        let a = c.int(1);
        let b = c.int(1 + 81);
        let d = b - a;
        assert_eq!(d.val(), 4);
        assert_eq!(d.rel_precision(), 12 - 4);
        assert_eq!(d.abs_precision(), 12);
        let z = a - a;
        assert_eq!(z.abs_precision(), 12);
        assert!(z.is_zero());
    }

    #[test]
    fn negative_numbers_and_inverse() {
        let c = cfg(5);
        let m = c.int(-7);
        assert!((m + c.int(7)).is_zero());
        let inv = c.int(7).checked_inv().unwrap();
        let one = inv * c.int(7);
        assert_eq!(one, c.one());
        assert_eq!(c.int(2).pow(-3).unwrap() * c.int(8), c.one());
    }

    #[test]
    fn residues() {
        let c = cfg(3);
        let x = c.int(3 + 9 + 27);
        assert_eq!(x.residue_mod(2).unwrap(), c.int(3));
        assert!(x.residue_mod(1).unwrap().is_exact_zero());
        let y = c.rational(1, 3).unwrap() + c.int(2);
        assert_eq!(y.residue_mod(0).unwrap(), c.rational(1, 3).unwrap());
        assert_eq!(c.int(-1).to_u64_mod(2).unwrap(), 8);
    }

    #[test]
    fn parse_and_display() {
        let c = PadicConfig::new(3, 4).unwrap();
        let x = c.int(27);
        assert_eq!(x.to_string(), "v3:u1000");
        assert_eq!(c.parse("v3:u1000").unwrap(), x);
        assert_eq!(c.parse("1/3").unwrap(), c.rational(1, 3).unwrap());
        assert_eq!(c.parse("-2").unwrap(), c.int(-2));
        assert_eq!(c.parse("vinf:u").unwrap(), c.zero());
        assert!(c.parse("v0:u0").is_err());
        assert!(c.parse("v0:u3").is_err());
        assert!(PadicConfig::new(4, 3).is_err());
        assert!(PadicConfig::new(3, 0).is_err());
        assert_eq!("3:20".parse::<PadicConfig>().unwrap().prec(), 20);
    }

    fn arb(p: u32) -> impl Strategy<Value = PadicNum> {
        (-2i64..4, 0i64..3_000_000).prop_map(move |(v, n)| {
            let c = cfg(p);
            c.int(n) * c.p_power(v)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn ultrametric(x in arb(3), y in arb(3)) {
            let s = x + y;
            let m = x.val().min(y.val());
            prop_assert!(s.val() >= m);
            if x.val() != y.val() {
                prop_assert_eq!(s.val(), m);
            }
        }
    }

    proptest! {
        #[test]
        fn valuation_is_additive(x in arb(2), y in arb(2)) {
            prop_assume!(!x.is_zero() && !y.is_zero());
            prop_assert_eq!((x * y).val(), x.val() + y.val());
        }

        #[test]
        fn ring_laws(x in 0i64..100_000, y in 0i64..100_000, z in 0i64..100_000) {
            let c = cfg(5);
            let (x, y, z) = (c.int(x), c.int(y), c.int(z));
            prop_assert!(((x * y) * z - x * (y * z)).is_zero());
            prop_assert!((x * (y + z) - (x * y + x * z)).is_zero());
            prop_assert!(((x + y) + z - (x + (y + z))).is_zero());
        }

        #[test]
        fn display_round_trip(x in arb(3)) {
            let back = cfg(3).parse(&x.to_string()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
