//! Truncated p-adic integers.
//!
//! A [`PadicInt`] is an element of `Z_p` known modulo `p^K`. Every value
//! carries its own precision `K`; binary operations return the smaller of the
//! two precisions, and dividing by `p^m` drops `m` digits.

use std::cmp::min;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus we allow: products are formed in `u128` and reduced.
const MODULUS_LIMIT: u64 = 1 << 62;

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// `p^k`, or `None` if it reaches [`MODULUS_LIMIT`].
pub fn checked_pow(p: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
        if acc >= MODULUS_LIMIT {
            return None;
        }
    }
    Some(acc)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// p-adic valuation at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    /// The residue is zero; only `val >= K` is known.
    AtLeast(u32),
}

impl Valuation {
    /// The valuation as a lower bound (exact when finite).
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// An element of `Z_p` known modulo `p^K`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PadicRepr", into = "PadicRepr")]
pub struct PadicInt {
    prime: u64,
    precision: u32,
    modulus: u64,
    residue: u64,
}

#[derive(Serialize, Deserialize)]
struct PadicRepr {
    p: u64,
    k: u32,
    residue: u64,
}

impl From<PadicInt> for PadicRepr {
    fn from(a: PadicInt) -> Self {
        PadicRepr { p: a.prime, k: a.precision, residue: a.residue }
    }
}

impl TryFrom<PadicRepr> for PadicInt {
    type Error = Error;
    fn try_from(r: PadicRepr) -> Result<Self> {
        PadicInt::from_residue(r.p, r.k, r.residue)
    }
}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.prime, self.precision)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

impl PadicInt {
    pub fn new(prime: u64, precision: u32, value: i64) -> Result<Self> {
        let modulus = Self::check_params(prime, precision)?;
        let residue = (value as i128).rem_euclid(modulus as i128) as u64;
        Ok(PadicInt { prime, precision, modulus, residue })
    }

    pub fn from_residue(prime: u64, precision: u32, residue: u64) -> Result<Self> {
        let modulus = Self::check_params(prime, precision)?;
        Ok(PadicInt { prime, precision, modulus, residue: residue % modulus })
    }

    fn check_params(prime: u64, precision: u32) -> Result<u64> {
        if !is_odd_prime(prime) {
            return Err(Error::BadPrime(prime));
        }
        if precision == 0 {
            return Err(Error::BadPrecision { prime, precision });
        }
        checked_pow(prime, precision).ok_or(Error::BadPrecision { prime, precision })
    }

    /// Same prime and precision, new value.
    pub fn with_value(&self, value: i64) -> PadicInt {
        let residue = (value as i128).rem_euclid(self.modulus as i128) as u64;
        PadicInt { residue, ..*self }
    }

    pub fn with_residue(&self, residue: u64) -> PadicInt {
        PadicInt { residue: residue % self.modulus, ..*self }
    }

    /// `p^m` at the same precision (zero once `m >= K`).
    pub fn p_power(&self, m: u32) -> PadicInt {
        if m >= self.precision {
            return self.with_value(0);
        }
        self.with_residue(checked_pow(self.prime, m).expect("p^m below p^K"))
    }

    pub fn zero(prime: u64, precision: u32) -> Result<Self> {
        Self::new(prime, precision, 0)
    }

    pub fn one(prime: u64, precision: u32) -> Result<Self> {
        Self::new(prime, precision, 1)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    /// `p^K`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Residue in the symmetric range `(-p^K/2, p^K/2]`.
    pub fn signed_residue(&self) -> i64 {
        if self.residue > self.modulus / 2 {
            self.residue as i64 - self.modulus as i64
        } else {
            self.residue as i64
        }
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.residue % self.prime != 0
    }

    /// Residue modulo `p`.
    pub fn mod_p(&self) -> u64 {
        self.residue % self.prime
    }

    /// Drop to precision `k` (no-op when `k >= K`).
    pub fn truncate(&self, k: u32) -> PadicInt {
        if k >= self.precision {
            return *self;
        }
        let modulus = checked_pow(self.prime, k).expect("smaller power fits");
        PadicInt { precision: k, modulus, residue: self.residue % modulus, ..*self }
    }

    /// Reinterpret the residue at a higher precision `k`, padding with zero digits.
    ///
    /// Used for seeds and integer constants, where the extra digits are known.
    pub fn extend(&self, k: u32) -> Result<PadicInt> {
        PadicInt::from_residue(self.prime, k, self.residue)
    }

    /// `p^m * a`, which is known to precision `K + m`.
    pub fn mul_p_power(&self, m: u32) -> Result<PadicInt> {
        let k = self.precision + m;
        let modulus = checked_pow(self.prime, k)
            .ok_or(Error::BadPrecision { prime: self.prime, precision: k })?;
        let scale = checked_pow(self.prime, m).expect("p^m below p^(K+m)");
        Ok(PadicInt { precision: k, modulus, residue: self.residue * scale, ..*self })
    }

    fn same_prime(&self, other: &PadicInt) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    /// Ring operation at precision `min(K_a, K_b)`.
    pub fn arith(&self, other: &PadicInt, op: ArithOp) -> Result<PadicInt> {
        self.same_prime(other)?;
        let lo = if self.precision <= other.precision { self } else { other };
        let m = lo.modulus;
        let (a, b) = (self.residue % m, other.residue % m);
        let residue = match op {
            ArithOp::Add => (a + b) % m,
            ArithOp::Sub => (a + m - b) % m,
            ArithOp::Mul => mul_mod(a, b, m),
        };
        Ok(PadicInt { precision: lo.precision, modulus: m, residue, prime: self.prime })
    }

    pub fn try_add(&self, other: &PadicInt) -> Result<PadicInt> {
        self.arith(other, ArithOp::Add)
    }

    pub fn try_sub(&self, other: &PadicInt) -> Result<PadicInt> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn try_mul(&self, other: &PadicInt) -> Result<PadicInt> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn add_int(&self, c: i64) -> PadicInt {
        *self + self.with_value(c)
    }

    pub fn mul_int(&self, c: i64) -> PadicInt {
        *self * self.with_value(c)
    }

    pub fn pow(&self, exp: u64) -> PadicInt {
        self.with_residue(pow_mod(self.residue, exp, self.modulus))
    }

    pub fn valuation(&self) -> Valuation {
        if self.residue == 0 {
            return Valuation::AtLeast(self.precision);
        }
        let mut v = 0;
        let mut r = self.residue;
        while r % self.prime == 0 {
            r /= self.prime;
            v += 1;
        }
        Valuation::Finite(v)
    }

    pub fn invert(&self) -> Result<PadicInt> {
        if !self.is_unit() {
            return Err(Error::NotInvertible(format!("{self:?} has positive valuation")));
        }
        let inv = inv_mod(self.residue, self.modulus).expect("units are invertible");
        Ok(self.with_residue(inv))
    }

    /// `a / p^m` at precision `K - m`.
    pub fn div_by_p_power(&self, m: u32) -> Result<PadicInt> {
        if m >= self.precision {
            return Err(Error::NotDivisible(format!(
                "dividing {self:?} by p^{m} leaves no digits"
            )));
        }
        if self.valuation().lower_bound() < m {
            return Err(Error::NotDivisible(format!("{self:?} by p^{m}")));
        }
        let scale = checked_pow(self.prime, m).expect("p^m below p^K");
        PadicInt::from_residue(self.prime, self.precision - m, self.residue / scale)
    }

    /// Legendre symbol of the residue mod `p`; `0` on non-units.
    pub fn legendre(&self) -> i8 {
        let a = self.mod_p();
        if a == 0 {
            return 0;
        }
        if pow_mod(a, (self.prime - 1) / 2, self.prime) == 1 {
            1
        } else {
            -1
        }
    }

    /// Square root of a unit quadratic residue.
    ///
    /// The returned root reduces mod `p` into `[1, (p-1)/2]`; the lift to
    /// precision `K` is then unique.
    pub fn sqrt(&self) -> Result<PadicInt> {
        if self.legendre() != 1 {
            return Err(Error::NoSquareRoot(format!("{self:?} is not a unit square mod {}", self.prime)));
        }
        let p = self.prime;
        let mut r0 = tonelli_shanks(self.mod_p(), p);
        if r0 > (p - 1) / 2 {
            r0 = p - r0;
        }
        let mut r = self.with_residue(r0);
        // Each step at least doubles the number of correct digits.
        for _ in 0..=self.precision {
            let err = r * r - *self;
            if err.is_zero() {
                break;
            }
            let step = err * (r.mul_int(2)).invert()?;
            r = r - step;
        }
        debug_assert!((r * r - *self).is_zero());
        Ok(r)
    }
}

/// Square root modulo an odd prime; `a` must be a nonzero quadratic residue.
pub fn tonelli_shanks(a: u64, p: u64) -> u64 {
    let a = a % p;
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

fn poly_eval(coeffs: &[PadicInt], x: PadicInt) -> PadicInt {
    coeffs.iter().rev().fold(x.with_value(0), |acc, &c| acc * x + c)
}

/// The unique root of `F` congruent to `x0` modulo `p`, by Newton iteration.
///
/// `coeffs[i]` is the coefficient of `x^i`. The root is returned at the
/// smallest precision among the coefficients; `x0` only seeds the iteration.
pub fn newton_solve(coeffs: &[PadicInt], x0: PadicInt) -> Result<PadicInt> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::Singular("zero polynomial".into()))?;
    for c in coeffs {
        first.same_prime(c)?;
    }
    first.same_prime(&x0)?;
    let k = coeffs.iter().map(|c| c.precision()).min().expect("nonempty");
    let coeffs: Vec<PadicInt> = coeffs.iter().map(|c| c.truncate(k)).collect();
    let deriv: Vec<PadicInt> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_int(i as i64))
        .collect();
    let mut x = PadicInt::from_residue(x0.prime(), k, x0.residue())?;
    if poly_eval(&coeffs, x).mod_p() != 0 {
        return Err(Error::Singular(format!("seed {x0:?} is not a root mod p")));
    }
    if deriv.is_empty() || !poly_eval(&deriv, x).is_unit() {
        return Err(Error::Singular(format!("derivative at {x0:?} is not a unit")));
    }
    for _ in 0..=k {
        let fx = poly_eval(&coeffs, x);
        if fx.is_zero() {
            return Ok(x);
        }
        x = x - fx * poly_eval(&deriv, x).invert()?;
    }
    debug_assert!(poly_eval(&coeffs, x).is_zero());
    Ok(x)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl $tr for PadicInt {
            type Output = PadicInt;
            /// Panics on a prime mismatch; use [`PadicInt::arith`] to get an error instead.
            fn $method(self, rhs: PadicInt) -> PadicInt {
                match self.arith(&rhs, $op) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

forward_binop!(Add, add, ArithOp::Add);
forward_binop!(Sub, sub, ArithOp::Sub);
forward_binop!(Mul, mul, ArithOp::Mul);

impl Neg for PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        self.with_residue((self.modulus - self.residue) % self.modulus)
    }
}

/// `min` over precisions, handy when assembling results from several values.
pub fn min_precision<'a>(values: impl IntoIterator<Item = &'a PadicInt>) -> Option<u32> {
    values.into_iter().map(|v| v.precision()).reduce(min)
}
