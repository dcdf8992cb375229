//! Analytic flows of maps congruent to the identity mod `p`, and the
//! determinant tests for minimal actions on a residue disk of `Z_p^2`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chebyshev::Mat2;
use crate::error::{Error, Result};
use crate::padic::PadicInt;
use crate::report::Report;

pub type Pair = [PadicInt; 2];

type Evaluator = dyn Fn(Pair) -> Result<Pair> + Send + Sync;

/// The reduction of a map modulo `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapClass {
    IdentityModP,
    /// `f(w) ≡ A w + b (mod p)` with `A` invertible mod `p`.
    AffineModP { a: Mat2, b: Pair },
}

/// A map `Z_p^2 -> Z_p^2` given by an evaluator, with its declared class mod `p`.
#[derive(Clone)]
pub struct PointMap {
    prime: u64,
    class: MapClass,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for PointMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointMap").field("prime", &self.prime).field("class", &self.class).finish()
    }
}

/// Pseudo-random pairs at `precision`, reproducible from `seed`.
///
/// All `p^2` residue pairs mod `p` are included (lifted randomly) when
/// `exhaustive` is set.
pub fn sample_pairs(prime: u64, precision: u32, random: usize, exhaustive: bool, seed: u64) -> Result<Vec<Pair>> {
    let zero = PadicInt::zero(prime, precision)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modulus = zero.modulus();
    let mut out = Vec::new();
    if exhaustive {
        for u in 0..prime {
            for v in 0..prime {
                let lift = |r: u64, rng: &mut ChaCha8Rng| {
                    let hi = rng.gen_range(0..modulus / prime);
                    zero.with_residue(r + prime * hi)
                };
                out.push([lift(u, &mut rng), lift(v, &mut rng)]);
            }
        }
    }
    for _ in 0..random {
        out.push([zero.with_residue(rng.gen_range(0..modulus)), zero.with_residue(rng.gen_range(0..modulus))]);
    }
    Ok(out)
}

fn congruent_mod_p(a: Pair, b: Pair) -> bool {
    a[0].mod_p() == b[0].mod_p() && a[1].mod_p() == b[1].mod_p()
}

impl PointMap {
    /// Wrap an evaluator, checking the declared class on sample points at `precision`.
    pub fn new(
        prime: u64,
        precision: u32,
        class: MapClass,
        f: impl Fn(Pair) -> Result<Pair> + Send + Sync + 'static,
    ) -> Result<Self> {
        let map = PointMap::unchecked(prime, class, f);
        if let MapClass::AffineModP { a, .. } = &map.class {
            if !a.det().is_unit() {
                return Err(Error::MapClass(format!("linear part {a:?} is singular mod p")));
            }
        }
        let exhaustive = prime <= 13;
        let samples = sample_pairs(prime, precision, if exhaustive { 8 } else { 32 }, exhaustive, 0x5eed)?;
        map.verify_class(&samples)?;
        Ok(map)
    }

    /// Wrap an evaluator without sampling its class.
    pub fn unchecked(prime: u64, class: MapClass, f: impl Fn(Pair) -> Result<Pair> + Send + Sync + 'static) -> Self {
        PointMap { prime, class, eval: Arc::new(f) }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn class(&self) -> &MapClass {
        &self.class
    }

    pub fn is_identity_mod_p(&self) -> bool {
        self.class == MapClass::IdentityModP
    }

    pub fn eval(&self, w: Pair) -> Result<Pair> {
        if w[0].prime() != self.prime || w[1].prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, w[0].prime()));
        }
        (self.eval)(w)
    }

    /// `f^n(w)`.
    pub fn iterate(&self, w: Pair, n: u64) -> Result<Pair> {
        let mut cur = w;
        for _ in 0..n {
            cur = self.eval(cur)?;
        }
        Ok(cur)
    }

    /// The reduction `w -> A w + b` mod `p` predicted by the class.
    fn predicted_mod_p(&self, w: Pair) -> Pair {
        match &self.class {
            MapClass::IdentityModP => w,
            MapClass::AffineModP { a, b } => {
                let w1 = [w[0].truncate(1), w[1].truncate(1)];
                let aw = a.truncate(1).apply(w1);
                [aw[0] + b[0].truncate(1), aw[1] + b[1].truncate(1)]
            }
        }
    }

    pub fn verify_class(&self, samples: &[Pair]) -> Result<()> {
        for &w in samples {
            let fw = self.eval(w)?;
            let want = self.predicted_mod_p(w);
            if !congruent_mod_p(fw, want) {
                return Err(Error::MapClass(format!(
                    "f({}, {}) = ({}, {}) but class predicts ({}, {}) mod p",
                    w[0], w[1], fw[0], fw[1], want[0], want[1]
                )));
            }
        }
        Ok(())
    }

    /// `self ∘ other`, with the class computed from both classes.
    pub fn compose(&self, other: &PointMap) -> PointMap {
        use MapClass::*;
        let class = match (&self.class, &other.class) {
            (IdentityModP, c) | (c, IdentityModP) => c.clone(),
            (AffineModP { a: a1, b: b1 }, AffineModP { a: a2, b: b2 }) => {
                let ab = a1.apply(*b2);
                AffineModP { a: a1.mul(a2), b: [ab[0] + b1[0], ab[1] + b1[1]] }
            }
        };
        let (f, g) = (self.clone(), other.clone());
        PointMap::unchecked(self.prime, class, move |w| f.eval(g.eval(w)?))
    }
}

/// `v_p(n!)`.
pub fn factorial_valuation(p: u64, n: u64) -> u32 {
    let mut v = 0;
    let mut q = n / p;
    while q > 0 {
        v += q as u32;
        q /= p;
    }
    v
}

/// `Φ_f(t, w)` modulo `p^{k_out}` with the default truncation `J = 2 k_out`.
pub fn mahler_flow(f: &PointMap, t: PadicInt, w: Pair, k_out: u32) -> Result<Pair> {
    mahler_flow_truncated(f, t, w, k_out, 2 * k_out as u64)
}

/// Input precision needed by [`mahler_flow_truncated`] with `terms` terms.
pub fn required_input_precision(p: u64, k_out: u32, terms: u64) -> u32 {
    k_out + factorial_valuation(p, terms)
}

/// `Σ_{j ≤ terms} binom(t, j) Δ^j(w)` modulo `p^{k_out}`, where `Δ^j` are the
/// forward differences of the orbit `w, f(w), f^2(w), ...`.
pub fn mahler_flow_truncated(f: &PointMap, t: PadicInt, w: Pair, k_out: u32, terms: u64) -> Result<Pair> {
    if !f.is_identity_mod_p() {
        return Err(Error::MapClass("flow needs a map congruent to the identity mod p".into()));
    }
    let p = f.prime();
    let k_in = w[0].precision().min(w[1].precision());
    let need = required_input_precision(p, k_out, terms);
    if k_in < need || t.precision() < k_out {
        return Err(Error::InsufficientPrecision(format!(
            "flow to p^{k_out} with {terms} terms needs inputs mod p^{need}, got p^{k_in}"
        )));
    }
    let mut diffs = Vec::with_capacity(terms as usize + 1);
    diffs.push(w);
    for i in 0..terms as usize {
        let next = f.eval(diffs[i])?;
        if !congruent_mod_p(next, diffs[i]) {
            return Err(Error::MapClass("orbit step is not congruent to the identity mod p".into()));
        }
        diffs.push(next);
    }

    let t = t.truncate(k_out);
    let one = t.with_value(1);
    let mut falling = one;
    let mut unit_fact = one;
    let mut acc = [w[0].truncate(k_out), w[1].truncate(k_out)];
    for j in 1..=terms {
        // diffs[0..] becomes the j-th difference row
        for i in 0..diffs.len() - j as usize {
            diffs[i] = [diffs[i + 1][0] - diffs[i][0], diffs[i + 1][1] - diffs[i][1]];
        }
        falling = falling * (t - t.with_value(j as i64 - 1));
        let mut jj = j;
        while jj % p == 0 {
            jj /= p;
        }
        unit_fact = unit_fact * t.with_residue(jj % t.modulus());
        let v = factorial_valuation(p, j);
        let coef = falling * unit_fact.invert()?;
        for c in 0..2 {
            let d = if v == 0 { diffs[0][c] } else { diffs[0][c].div_by_p_power(v)? };
            acc[c] = acc[c] + coef * d.truncate(k_out);
        }
    }
    Ok(acc)
}

/// Checks `Φ_f(t, w) ≡ w + t (f(w) - w) (mod p^2)` on the given samples.
pub fn verify_flow_mod_p2(f: &PointMap, samples: &[(PadicInt, Pair)]) -> Result<Report> {
    let mut report = Report::new("flow mod p^2");
    for &(t, w) in samples {
        let flow = mahler_flow(f, t, w, 2)?;
        let fw = f.eval(w)?;
        let t2 = t.truncate(2);
        let want = [0, 1].map(|c| w[c].truncate(2) + (fw[c].truncate(2) - w[c].truncate(2)) * t2);
        report.check(flow == want, || {
            format!("t={t}, w=({}, {}): flow ({}, {}) vs ({}, {})", w[0], w[1], flow[0], flow[1], want[0], want[1])
        });
    }
    Ok(report)
}

/// Largest output precision `k >= 2` for which the flow suite fits in
/// inputs known modulo `p^{k_in}`.
pub fn flow_suite_precision(p: u64, k_in: u32) -> Option<u32> {
    (2..=k_in).rev().find(|&k| {
        let inner = required_input_precision(p, k, 2 * k as u64);
        required_input_precision(p, k, 2 * k as u64 + 4) <= k_in
            && required_input_precision(p, inner, 2 * inner as u64) <= k_in
    })
}

/// Flow checks for a map congruent to the identity mod `p` whose inputs may
/// be given modulo `p^{k_in}`: integer times against iteration (`n <= 20`),
/// `Φ(s + t) = Φ(s) ∘ Φ(t)` on 50 random pairs, the mod-`p^2` closed form on
/// 200 samples and agreement of `J` with `J + 4` terms.
pub fn verify_flow_suite(f: &PointMap, k_in: u32, seed: u64) -> Result<Report> {
    let p = f.prime();
    let k = flow_suite_precision(p, k_in).ok_or_else(|| {
        Error::InsufficientPrecision(format!("flow suite needs more than p^{k_in} input precision"))
    })?;
    let mut report = Report::new(format!("flow suite p={p} K_out={k}"));
    let ws = sample_pairs(p, k_in, 200, false, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let zero = PadicInt::zero(p, k_in)?;
    let random_t = |rng: &mut ChaCha8Rng| zero.with_residue(rng.gen_range(0..zero.modulus()));
    let cut = |w: Pair, k: u32| [w[0].truncate(k), w[1].truncate(k)];

    for &w in ws.iter().take(5) {
        for n in 0..=20u64 {
            let flow = mahler_flow(f, zero.with_value(n as i64), w, k)?;
            let it = cut(f.iterate(w, n)?, k);
            report.check(flow == it, || format!("flow at n={n} differs from iteration"));
        }
    }

    let inner_k = required_input_precision(p, k, 2 * k as u64);
    for &w in ws.iter().take(50) {
        let (s, t) = (random_t(&mut rng), random_t(&mut rng));
        let whole = mahler_flow(f, s + t, w, k)?;
        let mid = mahler_flow(f, t, w, inner_k)?;
        let split = mahler_flow(f, s, mid, k)?;
        report.check(whole == split, || format!("additivity fails at s={s}, t={t}"));
    }

    let samples: Vec<(PadicInt, Pair)> = ws.iter().map(|&w| (random_t(&mut rng), w)).collect();
    report.merge(verify_flow_mod_p2(f, &samples)?);

    for &(t, w) in samples.iter().take(20) {
        let j = 2 * k as u64;
        let a = mahler_flow_truncated(f, t, w, k, j)?;
        let b = mahler_flow_truncated(f, t, w, k, j + 4)?;
        report.check(a == b, || format!("J={j} and J+4 terms differ at t={t}"));
    }
    Ok(report)
}

/// Solves `f(x) = y` by Newton iteration with the mod-`p` linear part as Jacobian.
pub fn newton_inverse(f: &PointMap, y: Pair) -> Result<Pair> {
    let k = y[0].precision().min(y[1].precision());
    let y = [y[0].truncate(k), y[1].truncate(k)];
    let (a, b) = match f.class() {
        MapClass::IdentityModP => {
            let i = Mat2::identity(y[0]);
            (i, [y[0].with_value(0), y[0].with_value(0)])
        }
        MapClass::AffineModP { a, b } => {
            let lift = |v: PadicInt| v.extend(k.max(v.precision())).map(|e| e.truncate(k));
            (
                Mat2::new(lift(a.a11)?, lift(a.a12)?, lift(a.a21)?, lift(a.a22)?),
                [lift(b[0])?, lift(b[1])?],
            )
        }
    };
    let a_inv = a.inverse()?;
    let mut x = a_inv.apply([y[0] - b[0], y[1] - b[1]]);
    for _ in 0..=k {
        let fx = f.eval(x)?;
        let r = [fx[0].truncate(k) - y[0], fx[1].truncate(k) - y[1]];
        if r[0].is_zero() && r[1].is_zero() {
            return Ok(x);
        }
        let step = a_inv.apply(r);
        x = [x[0] - step[0], x[1] - step[1]];
    }
    Err(Error::Singular(format!("Newton inverse did not converge to p^{k}")))
}

/// A determinant and whether it is a `p`-adic unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetVerdict {
    pub det: PadicInt,
    pub unit: bool,
}

fn displacement_over_p(f: &PointMap, w: Pair) -> Result<Pair> {
    let fw = f.eval(w)?;
    let k = w[0].precision().min(w[1].precision());
    let d = [fw[0].truncate(k) - w[0], fw[1].truncate(k) - w[1]];
    Ok([d[0].div_by_p_power(1)?, d[1].div_by_p_power(1)?])
}

fn column_det(c1: Pair, c2: Pair) -> DetVerdict {
    let det = c1[0] * c2[1] - c2[0] * c1[1];
    DetVerdict { det, unit: det.is_unit() }
}

fn check_minimality_inputs(maps: &[&PointMap], w0: Pair) -> Result<()> {
    if w0[0].precision().min(w0[1].precision()) < 2 {
        return Err(Error::InsufficientPrecision("determinant test needs precision >= 2".into()));
    }
    if maps.iter().any(|m| !m.is_identity_mod_p()) {
        return Err(Error::MapClass("determinant test needs maps congruent to the identity mod p".into()));
    }
    Ok(())
}

/// `det[(f(w0) - w0)/p, (g(w0) - w0)/p]` modulo `p^{K-1}`.
///
/// A unit determinant shows `<f, g>` acts minimally on `w0 + (pZ_p)^2`.
pub fn local_minimality_det(f: &PointMap, g: &PointMap, w0: Pair) -> Result<DetVerdict> {
    check_minimality_inputs(&[f, g], w0)?;
    Ok(column_det(displacement_over_p(f, w0)?, displacement_over_p(g, w0)?))
}

/// `det[(f(w0) - w0)/p, A (f(w1) - w1)/p]` with `w1 = g^{-1}(w0)`.
///
/// A unit determinant shows `<f, g f g^{-1}>` acts minimally on `w0 + (pZ_p)^2`.
pub fn twisted_minimality_det(f: &PointMap, g: &PointMap, w0: Pair) -> Result<DetVerdict> {
    check_minimality_inputs(&[f], w0)?;
    let k = w0[0].precision().min(w0[1].precision());
    let a = match g.class() {
        MapClass::IdentityModP => Mat2::identity(w0[0].truncate(k - 1)),
        MapClass::AffineModP { a, .. } => {
            let lift = |v: PadicInt| v.extend(k.max(v.precision())).map(|e| e.truncate(k - 1));
            Mat2::new(lift(a.a11)?, lift(a.a12)?, lift(a.a21)?, lift(a.a22)?)
        }
    };
    let w1 = newton_inverse(g, w0)?;
    let c2 = a.apply(displacement_over_p(f, w1)?);
    Ok(column_det(displacement_over_p(f, w0)?, c2))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u64 = 7;

    fn pa(k: u32, v: i64) -> PadicInt {
        PadicInt::new(P, k, v).unwrap()
    }

    fn translation(dx: i64, dy: i64) -> PointMap {
        PointMap::new(P, 4, MapClass::IdentityModP, move |w: Pair| {
            Ok([w[0] + w[0].with_value(P as i64 * dx), w[1] + w[1].with_value(P as i64 * dy)])
        })
        .unwrap()
    }

    // (u, v) -> (u + p v^2 + p, v + p u)
    fn nonlinear() -> PointMap {
        PointMap::new(P, 4, MapClass::IdentityModP, |w: Pair| {
            let p = w[0].with_value(P as i64);
            Ok([w[0] + p * w[1] * w[1] + p, w[1] + p * w[0]])
        })
        .unwrap()
    }

    #[test]
    fn flow_small_integers_match_iteration() {
        let f = nonlinear();
        let k_out = 3;
        let k_in = required_input_precision(P, k_out, 6);
        let w = [pa(k_in, 3), pa(k_in, 5)];
        assert_eq!(mahler_flow(&f, pa(k_out, 0), w, k_out).unwrap(), [pa(k_out, 3), pa(k_out, 5)]);
        for n in 1..10 {
            let it = f.iterate(w, n).unwrap().map(|v| v.truncate(k_out));
            assert_eq!(mahler_flow(&f, pa(k_out, n as i64), w, k_out).unwrap(), it, "n={n}");
        }
    }

    #[test]
    fn flow_suite_on_polynomial_map() {
        assert_eq!(flow_suite_precision(P, 8), Some(5));
        let r = verify_flow_suite(&nonlinear(), 8, 1).unwrap();
        assert!(r.passed(), "{:?}", r.first_discrepancy);
        assert_eq!(r.checks, 5 * 21 + 50 + 200 + 20);
    }

    #[test]
    fn flow_minus_one_inverts() {
        let f = nonlinear();
        let k_in = required_input_precision(P, 3, 6);
        let w = [pa(k_in, 10), pa(k_in, 2)];
        let back = mahler_flow(&f, pa(3, -1), w, 3).unwrap();
        let lifted = back.map(|v| v.extend(k_in).unwrap());
        assert_eq!(f.eval(lifted).unwrap().map(|v| v.truncate(3)), w.map(|v| v.truncate(3)));
        let ni = newton_inverse(&f, w.map(|v| v.truncate(3))).unwrap();
        assert_eq!(ni, back);
    }

    #[test]
    fn flow_rejects_bad_inputs() {
        let f = nonlinear();
        let w = [pa(2, 1), pa(2, 1)];
        assert!(matches!(mahler_flow(&f, pa(3, 2), w, 3), Err(Error::InsufficientPrecision(_))));
        let swap = PointMap::unchecked(P, MapClass::AffineModP { a: Mat2::from_ints(pa(1, 0), [[0, 1], [1, 0]]), b: [pa(1, 0), pa(1, 0)] }, |w: Pair| Ok([w[1], w[0]]));
        assert!(matches!(mahler_flow(&swap, pa(3, 2), [pa(6, 1), pa(6, 2)], 3), Err(Error::MapClass(_))));
    }

    #[test]
    fn class_is_checked() {
        let bad = PointMap::new(P, 3, MapClass::IdentityModP, |w: Pair| Ok([w[0].add_int(1), w[1]]));
        assert!(matches!(bad, Err(Error::MapClass(_))));
    }

    #[test]
    fn newton_inverse_affine() {
        let like = pa(5, 0);
        let a = Mat2::from_ints(like, [[2, 1], [1, 1]]);
        let b = [like.with_value(3), like.with_value(-4)];
        let f = PointMap::new(P, 5, MapClass::AffineModP { a, b }, move |w: Pair| {
            let aw = a.apply(w);
            Ok([aw[0] + b[0], aw[1] + b[1]])
        })
        .unwrap();
        let y = [like.with_value(100), like.with_value(-7)];
        let x = newton_inverse(&f, y).unwrap();
        let direct = a.inverse().unwrap().apply([y[0] - b[0], y[1] - b[1]]);
        assert_eq!(x, direct);
    }

    #[test]
    fn determinant_examples() {
        let w0 = [pa(4, 0), pa(4, 0)];
        let d = local_minimality_det(&translation(1, 0), &translation(0, 1), w0).unwrap();
        assert_eq!(d.det.residue(), 1);
        assert!(d.unit);
        let d = local_minimality_det(&nonlinear(), &nonlinear(), w0).unwrap();
        assert!(d.det.is_zero() && !d.unit);
        assert!(local_minimality_det(&translation(1, 0), &translation(0, 1), [pa(1, 0), pa(1, 0)]).is_err());
    }

    #[test]
    fn twisted_examples() {
        let w0 = [pa(4, 0), pa(4, 0)];
        let like = pa(4, 0);
        let id = PointMap::new(P, 4, MapClass::AffineModP { a: Mat2::identity(like), b: [like, like] }, Ok).unwrap();
        let f = nonlinear();
        let d = twisted_minimality_det(&f, &id, w0).unwrap();
        assert_eq!(d.det, local_minimality_det(&f, &f, w0).unwrap().det);

        let shear = Mat2::from_ints(like, [[1, 1], [0, 1]]);
        let g = PointMap::new(P, 4, MapClass::AffineModP { a: shear, b: [like, like] }, move |w: Pair| Ok(shear.apply(w))).unwrap();
        let d = twisted_minimality_det(&translation(1, 0), &g, w0).unwrap();
        assert!(d.det.is_zero());
        // a rotation does move the translation direction
        let rot = Mat2::from_ints(like, [[0, -1], [1, 0]]);
        let g = PointMap::new(P, 4, MapClass::AffineModP { a: rot, b: [like, like] }, move |w: Pair| Ok(rot.apply(w))).unwrap();
        assert!(twisted_minimality_det(&translation(1, 0), &g, w0).unwrap().unit);
    }

    #[test]
    fn flow_mod_p2_closed_form() {
        let f = nonlinear();
        let k_in = required_input_precision(P, 2, 4);
        let samples: Vec<(PadicInt, Pair)> = (0..20)
            .map(|i| (pa(2, 13 * i - 40), [pa(k_in, 17 * i + 3), pa(k_in, 5 - 29 * i)]))
            .collect();
        let r = verify_flow_mod_p2(&f, &samples).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
