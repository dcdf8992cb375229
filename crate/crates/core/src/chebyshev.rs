//! Monic Chebyshev polynomials `T_N`, `U_N` and the companion matrix
//! `C(x) = [[x, -1], [1, 0]]`, whose powers are
//! `C(x)^N = [[U_N, -U_{N-1}], [U_{N-1}, -U_{N-2}]]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PadicInt;
use crate::report::Report;

pub const DEFAULT_DEGREE_CAP: i64 = 10_000;

/// Dense polynomial with coefficients in `Z/p^K`, lowest degree first.
#[derive(Clone, PartialEq, Eq)]
pub struct DensePoly {
    prime: u64,
    precision: u32,
    coeffs: Vec<PadicInt>,
}

impl fmt::Debug for DensePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<i64> = self.coeffs.iter().map(|c| c.signed_residue()).collect();
        write!(f, "DensePoly{c:?} mod {}^{}", self.prime, self.precision)
    }
}

impl DensePoly {
    pub fn from_ints(prime: u64, precision: u32, coeffs: &[i64]) -> Result<Self> {
        let zero = PadicInt::zero(prime, precision)?;
        Ok(Self::from_coeffs(zero, coeffs.iter().map(|&c| zero.with_value(c)).collect()))
    }

    fn from_coeffs(zero: PadicInt, coeffs: Vec<PadicInt>) -> Self {
        let mut poly = DensePoly { prime: zero.prime(), precision: zero.precision(), coeffs };
        poly.trim();
        poly
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn zero_coeff(&self) -> PadicInt {
        PadicInt::zero(self.prime, self.precision).expect("validated on construction")
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[PadicInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> PadicInt {
        self.coeffs.get(i).copied().unwrap_or_else(|| self.zero_coeff())
    }

    /// Coefficients as symmetric residues, for display and comparison with integers.
    pub fn signed_coeffs(&self) -> Vec<i64> {
        self.coeffs.iter().map(|c| c.signed_residue()).collect()
    }

    pub fn eval(&self, x: PadicInt) -> PadicInt {
        let x = x.truncate(self.precision);
        self.coeffs.iter().rev().fold(x.with_value(0), |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &DensePoly) -> DensePoly {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DensePoly) -> DensePoly {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &DensePoly, op: impl Fn(PadicInt, PadicInt) -> PadicInt) -> DensePoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| op(self.coeff(i), other.coeff(i))).collect();
        Self::from_coeffs(self.zero_coeff(), coeffs)
    }

    pub fn scale(&self, c: PadicInt) -> DensePoly {
        Self::from_coeffs(self.zero_coeff(), self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Multiply by `x`.
    pub fn shift(&self) -> DensePoly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(self.zero_coeff());
        coeffs.extend_from_slice(&self.coeffs);
        Self::from_coeffs(self.zero_coeff(), coeffs)
    }

    pub fn mul(&self, other: &DensePoly) -> DensePoly {
        let zero = self.zero_coeff();
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::from_coeffs(zero, Vec::new());
        }
        let mut coeffs = vec![zero; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Self::from_coeffs(zero, coeffs)
    }

    /// Whether all coefficients agree modulo `p^k`.
    pub fn congruent(&self, other: &DensePoly, k: u32) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|i| (self.coeff(i) - other.coeff(i)).truncate(k).is_zero())
    }
}

fn chebyshev_family(
    n: i64,
    prime: u64,
    precision: u32,
    cap: i64,
    initial: (&[i64], &[i64]),
) -> Result<DensePoly> {
    if n.abs() > cap {
        return Err(Error::DegreeCap { n: n.abs(), cap });
    }
    let x = DensePoly::from_ints(prime, precision, &[0, 1])?;
    let mut prev = DensePoly::from_ints(prime, precision, initial.0)?; // index -1
    let mut cur = DensePoly::from_ints(prime, precision, initial.1)?; // index 0
    if n >= 0 {
        for _ in 0..n {
            let next = x.mul(&cur).sub(&prev);
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(cur)
    } else {
        // Run the recurrence backwards: F_{N-2} = x F_{N-1} - F_N.
        let (mut hi, mut lo) = (cur, prev);
        for _ in 0..(-n - 1) {
            let next = x.mul(&lo).sub(&hi);
            hi = std::mem::replace(&mut lo, next);
        }
        Ok(lo)
    }
}

/// `T_N` with `(T_{-1}, T_0) = (x, 2)`.
pub fn chebyshev_t(n: i64, prime: u64, precision: u32) -> Result<DensePoly> {
    chebyshev_t_capped(n, prime, precision, DEFAULT_DEGREE_CAP)
}

pub fn chebyshev_t_capped(n: i64, prime: u64, precision: u32, cap: i64) -> Result<DensePoly> {
    chebyshev_family(n, prime, precision, cap, (&[0, 1], &[2]))
}

/// `U_N` with `(U_{-1}, U_0) = (0, 1)`.
pub fn chebyshev_u(n: i64, prime: u64, precision: u32) -> Result<DensePoly> {
    chebyshev_u_capped(n, prime, precision, DEFAULT_DEGREE_CAP)
}

pub fn chebyshev_u_capped(n: i64, prime: u64, precision: u32, cap: i64) -> Result<DensePoly> {
    // U_{-N-2} = -U_N, so negative indices down to -2-cap are allowed.
    if n < 0 && n >= -2 - cap {
        let mirrored = chebyshev_family(-n - 2, prime, precision, cap, (&[], &[1]))?;
        return Ok(mirrored.scale(PadicInt::new(prime, precision, -1)?));
    }
    chebyshev_family(n, prime, precision, cap, (&[], &[1]))
}

/// A 2x2 matrix over `Z/p^K`.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: PadicInt,
    pub a12: PadicInt,
    pub a21: PadicInt,
    pub a22: PadicInt,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]] mod {}^{}",
            self.a11.signed_residue(),
            self.a12.signed_residue(),
            self.a21.signed_residue(),
            self.a22.signed_residue(),
            self.a11.prime(),
            self.precision()
        )
    }
}

impl Mat2 {
    pub fn new(a11: PadicInt, a12: PadicInt, a21: PadicInt, a22: PadicInt) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// Integer matrix embedded at the precision of `like`.
    pub fn from_ints(like: PadicInt, m: [[i64; 2]; 2]) -> Self {
        Mat2::new(like.with_value(m[0][0]), like.with_value(m[0][1]), like.with_value(m[1][0]), like.with_value(m[1][1]))
    }

    pub fn identity(like: PadicInt) -> Self {
        Self::from_ints(like, [[1, 0], [0, 1]])
    }

    pub fn zero(like: PadicInt) -> Self {
        Self::from_ints(like, [[0, 0], [0, 0]])
    }

    pub fn precision(&self) -> u32 {
        [self.a11, self.a12, self.a21, self.a22].iter().map(|a| a.precision()).min().expect("4 entries")
    }

    pub fn entries(&self) -> [PadicInt; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    fn map(&self, f: impl Fn(PadicInt) -> PadicInt) -> Mat2 {
        Mat2::new(f(self.a11), f(self.a12), f(self.a21), f(self.a22))
    }

    fn try_map(&self, f: impl Fn(PadicInt) -> Result<PadicInt>) -> Result<Mat2> {
        Ok(Mat2::new(f(self.a11)?, f(self.a12)?, f(self.a21)?, f(self.a22)?))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }

    pub fn scale(&self, c: PadicInt) -> Mat2 {
        self.map(|a| a * c)
    }

    pub fn det(&self) -> PadicInt {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> PadicInt {
        self.a11 + self.a22
    }

    pub fn truncate(&self, k: u32) -> Mat2 {
        self.map(|a| a.truncate(k))
    }

    pub fn div_by_p_power(&self, m: u32) -> Result<Mat2> {
        self.try_map(|a| a.div_by_p_power(m))
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det().invert()?;
        Ok(Mat2::new(self.a22 * d, -self.a12 * d, -self.a21 * d, self.a11 * d))
    }

    pub fn apply(&self, v: [PadicInt; 2]) -> [PadicInt; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn pow(&self, mut exp: u64) -> Mat2 {
        let mut acc = Mat2::identity(self.a11);
        let mut base = *self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// Entrywise congruence modulo `p^k`.
    pub fn congruent(&self, o: &Mat2, k: u32) -> bool {
        self.sub(o).entries().iter().all(|a| a.truncate(k).is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.congruent(&Mat2::identity(self.a11), self.precision())
    }
}

pub fn companion(x: PadicInt) -> Mat2 {
    Mat2::new(x, x.with_value(-1), x.with_value(1), x.with_value(0))
}

/// `C(x)^N` by binary exponentiation.
pub fn companion_power(x: PadicInt, n: u64) -> Mat2 {
    companion(x).pow(n)
}

/// `U_n(x)` evaluated at a point, for any integer `n`.
pub fn u_at(n: i64, x: PadicInt) -> PadicInt {
    if n >= 0 {
        companion_power(x, n as u64).a11
    } else if n == -1 {
        x.with_value(0)
    } else {
        -u_at(-n - 2, x)
    }
}

/// `T_n(x)` at a point; `T_n` is the trace of `C(x)^n`.
pub fn t_at(n: i64, x: PadicInt) -> PadicInt {
    companion_power(x, n.unsigned_abs()).trace()
}

/// `C_N'(x)` modulo `p^m` by the finite difference `(C_N(x + p^m) - C_N(x)) / p^m`.
///
/// The entries are integer polynomials, so the quotient is exact modulo `p^m`.
pub fn companion_derivative(x: PadicInt, n: u64, m: u32) -> Result<Mat2> {
    if m == 0 || x.precision() < 2 * m + 1 {
        return Err(Error::InsufficientPrecision(format!(
            "finite difference step p^{m} needs K >= {}, have {}",
            2 * m + 1,
            x.precision()
        )));
    }
    let step = x.p_power(m);
    let diff = companion_power(x + step, n).sub(&companion_power(x, n));
    Ok(diff.div_by_p_power(m)?.truncate(m))
}

/// Closed form of `C_N'(x)` for `x^2 - 4` a unit:
/// `N/(x^2-4) [[T_{N+1}, -T_N], [T_N, -T_{N-1}]] + U_{N-1}/(x^2-4) [[-2, x], [-x, 2]]`.
pub fn companion_derivative_formula(x: PadicInt, n: u64) -> Result<Mat2> {
    let n_i = n as i64;
    let inv = (x * x).add_int(-4).invert()?;
    let (t_next, t_cur, t_prev) = (t_at(n_i + 1, x), t_at(n_i, x), t_at(n_i - 1, x));
    let first = Mat2::new(t_next, -t_cur, t_cur, -t_prev).scale(x.with_value(n_i) * inv);
    let second = Mat2::new(x.with_value(-2), x, -x, x.with_value(2)).scale(u_at(n_i - 1, x) * inv);
    Ok(first.add(&second))
}

fn binomial_mod(n: u64, k: u64, like: PadicInt) -> PadicInt {
    if k > n {
        return like.with_value(0);
    }
    // Pascal's rule keeps everything integral.
    let k = k.min(n - k) as usize;
    let mut row = vec![like.with_value(0); k + 1];
    row[0] = like.with_value(1);
    for i in 1..=n as usize {
        for j in (1..=k.min(i)).rev() {
            row[j] = row[j] + row[j - 1];
        }
    }
    row[k]
}

/// `C_N'(±2) = (±1)^{N+1} [[C(N+2,3), ∓C(N+1,3)], [±C(N+1,3), -C(N,3)]]`.
pub fn companion_derivative_border(sign: i64, n: u64, like: PadicInt) -> Mat2 {
    let s = like.with_value(sign);
    let b = |top: u64| binomial_mod(top, 3, like);
    let m = Mat2::new(b(n + 2), -(s * b(n + 1)), s * b(n + 1), -b(n));
    if sign < 0 && n % 2 == 0 {
        m.scale(like.with_value(-1))
    } else {
        m
    }
}

/// `C_N(±2) = (±1)^N [[N+1, ∓N], [±N, 1-N]]`.
pub fn companion_power_border(sign: i64, n: u64, like: PadicInt) -> Mat2 {
    let n_i = n as i64;
    let m = Mat2::from_ints(like, [[n_i + 1, -sign * n_i], [sign * n_i, 1 - n_i]]);
    if sign < 0 && n % 2 == 1 {
        m.scale(like.with_value(-1))
    } else {
        m
    }
}

/// The fixed point of `T_p` in the residue class of `x0`.
///
/// `T_p` contracts each class `x0 + pZ_p` by `1/p`, so `K - 1` iterations
/// pin down all `K` digits.
pub fn fixed_point_tp(x0: PadicInt) -> PadicInt {
    let p = x0.prime() as i64;
    let mut x = x0;
    for _ in 1..x0.precision() {
        x = t_at(p, x);
    }
    x
}

fn divisors(n: u64) -> Vec<u64> {
    let mut ds: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    ds.sort_unstable();
    ds
}

/// Order of `x1` as a trace of rational rotation: the least divisor `r` of
/// `(p^2-1)/2` with `C(x1)^r = I` at full precision.
pub fn rotation_order(x1: PadicInt) -> Result<u64> {
    let p = x1.prime();
    let r = x1.mod_p();
    if r == 2 || r == p - 2 {
        return Err(Error::Unipotent(format!("{x1:?} is ±2 mod p")));
    }
    let c = companion(x1);
    divisors((p * p - 1) / 2)
        .into_iter()
        .find(|&d| c.pow(d).is_identity())
        .ok_or_else(|| Error::NotRotationTrace(format!("{x1:?} is not a fixed point of T_p")))
}

/// Checks `x^p = sum_{j <= (p-1)/2} C(p,j) T_{p-2j}(x)` coefficientwise mod `p^K`,
/// `T_p ≡ x^p (mod p)` coefficientwise, and both identities at the sample points.
pub fn verify_power_sum_identity(prime: u64, precision: u32, sample_xs: &[i64]) -> Result<Report> {
    let mut report = Report::new(format!("power-sum identity p={prime} K={precision}"));
    let like = PadicInt::zero(prime, precision)?;
    let mut xp = vec![0i64; prime as usize + 1];
    xp[prime as usize] = 1;
    let lhs = DensePoly::from_ints(prime, precision, &xp)?;
    let mut rhs = DensePoly::from_ints(prime, precision, &[])?;
    for j in 0..=(prime - 1) / 2 {
        let t = chebyshev_t((prime - 2 * j) as i64, prime, precision)?;
        rhs = rhs.add(&t.scale(binomial_mod(prime, j, like)));
    }
    report.check(lhs.congruent(&rhs, precision), || format!("x^p = {lhs:?} but sum = {rhs:?}"));

    let tp = chebyshev_t(prime as i64, prime, precision)?;
    report.check(tp.congruent(&lhs, 1), || format!("T_p = {tp:?} is not x^p mod p"));

    for &x in sample_xs {
        let xv = like.with_value(x);
        report.check(lhs.eval(xv) == rhs.eval(xv), || format!("identity fails at x={x}"));
        report.check((tp.eval(xv) - xv.pow(prime)).truncate(1).is_zero(), || {
            format!("T_p(x) != x^p mod p at x={x}")
        });
    }
    Ok(report)
}

/// Recurrences, `T_{-n} = T_n`, `U_{-n} = -U_{n-2}`, `T_n = U_n - U_{n-2}` for
/// `|n| <= max_n`, and the entries of `C(x)^N` against `U_N, U_{N-1}, U_{N-2}`
/// evaluated from the polynomials, at every sample point.
pub fn verify_chebyshev_suite(prime: u64, precision: u32, max_n: i64, sample_xs: &[i64]) -> Result<Report> {
    let mut report = Report::new(format!("chebyshev suite p={prime} K={precision} |N|<={max_n}"));
    let x = DensePoly::from_ints(prime, precision, &[0, 1])?;
    let like = PadicInt::zero(prime, precision)?;
    let range = -max_n - 2..=max_n + 1;
    let t: Vec<DensePoly> = range.clone().map(|n| chebyshev_t(n, prime, precision)).collect::<Result<_>>()?;
    let u: Vec<DensePoly> = range.clone().map(|n| chebyshev_u(n, prime, precision)).collect::<Result<_>>()?;
    let at = |n: i64| (n + max_n + 2) as usize;
    for n in -max_n..=max_n {
        for (name, f) in [("T", &t), ("U", &u)] {
            let rec = x.mul(&f[at(n)]).sub(&f[at(n - 1)]);
            report.check(rec.congruent(&f[at(n + 1)], precision), || format!("{name} recurrence fails at n={n}"));
        }
        report.check(t[at(n)].congruent(&t[at(-n)], precision), || format!("T_-n != T_n at n={n}"));
        if n - 2 >= -max_n - 2 {
            let neg = u[at(n - 2)].scale(like.with_value(-1));
            report.check(u[at(-n)].congruent(&neg, precision), || format!("U_-n != -U_(n-2) at n={n}"));
            let diff = u[at(n)].sub(&u[at(n - 2)]);
            report.check(t[at(n)].congruent(&diff, precision), || format!("T_n != U_n - U_(n-2) at n={n}"));
        }
    }
    for &xv in sample_xs {
        let xv = like.with_value(xv);
        for n in 1..=max_n {
            let c = companion_power(xv, n as u64);
            let (un, un1, un2) = (u[at(n)].eval(xv), u[at(n - 1)].eval(xv), u[at(n - 2)].eval(xv));
            let expected = Mat2::new(un, -un1, un1, -un2);
            report.check(c == expected, || format!("C(x)^{n} entries fail at x={}", xv.signed_residue()));
        }
    }
    Ok(report)
}

/// Checks the four companion-power estimates at `x0 + p u` for each sample `u`.
///
/// For `x0 ≢ ±2 (mod p)`, with `N = (p^2-1)/2`, `x1` the `T_p`-fixed point
/// and `M = [[x0, -2], [2, -x0]]`:
/// `C^N ≡ I + N/(x0^2-4) M (x0-x1+pu) (mod p^2)` and the `pN`-power analogue
/// mod `p^3`. For `x0 ≡ ±2`: `C^{2p} ≡ I + p B (mod p^2)` and
/// `C^{2p^2} ≡ I + p^2 B (mod p^3)` with `B = [[2, -x0], [x0, -2]]`.
pub fn verify_companion_estimates(x0: PadicInt, sample_us: &[PadicInt]) -> Result<Report> {
    if x0.precision() < 3 {
        return Err(Error::InsufficientPrecision("companion estimates need K >= 3".into()));
    }
    let p = x0.prime();
    let k = x0.precision();
    let r = x0.mod_p();
    let border = r == 2 || r == p - 2;
    if border && p <= 3 {
        return Err(Error::Hypothesis("border estimates need p > 3".into()));
    }
    let mut report = Report::new(format!(
        "companion estimates x0={} p={p} K={k} ({})",
        x0.signed_residue(),
        if border { "border" } else { "generic" }
    ));
    let n = (p * p - 1) / 2;
    let id = Mat2::identity(x0);
    let pv = |e: u32| x0.p_power(e);

    // Quantities independent of u.
    let generic = if border {
        None
    } else {
        let x1 = fixed_point_tp(x0);
        let coeff = x0.with_value(n as i64) * (x0 * x0).add_int(-4).invert()?;
        let m = Mat2::new(x0, x0.with_value(-2), x0.with_value(2), -x0);
        Some((x1, coeff, m))
    };
    let b = Mat2::new(x0.with_value(2), -x0, x0, x0.with_value(-2));

    for &u in sample_us {
        let pu = u.mul_p_power(1)?.truncate(k);
        let x = x0 + pu;
        let label = u.signed_residue();
        match generic {
            Some((x1, coeff, m)) => {
                let shift = x0 - x1 + pu;
                let c_n = companion_power(x, n);
                let rhs1 = id.add(&m.scale(coeff * shift));
                report.check(c_n.congruent(&rhs1, 2), || format!("N-power fails at u={label}: {c_n:?}"));
                let c_pn = c_n.pow(p);
                let rhs2 = id.add(&m.scale(coeff * pv(1) * shift));
                report.check(c_pn.congruent(&rhs2, 3), || format!("pN-power fails at u={label}: {c_pn:?}"));
            }
            None => {
                let c_2p = companion_power(x, 2 * p);
                let rhs1 = id.add(&b.scale(pv(1)));
                report.check(c_2p.congruent(&rhs1, 2), || format!("2p-power fails at u={label}: {c_2p:?}"));
                let c_2pp = c_2p.pow(p);
                let rhs2 = id.add(&b.scale(pv(2)));
                report.check(c_2pp.congruent(&rhs2, 3), || format!("2p^2-power fails at u={label}: {c_2pp:?}"));
            }
        }
    }
    Ok(report)
}
