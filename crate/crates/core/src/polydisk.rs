//! Charts `Ψ: Z_p^2 -> U` of level-1 polydisks and the expansions of
//! stabilizing words in chart coordinates.
//!
//! A chart solves one coordinate (the "solved" role) implicitly from the two
//! others. Roles are cyclic: solving `x` uses `(y, z)`, solving `y` uses
//! `(z, x)`, solving `z` uses `(x, y)`. Below, `a, b, c` denote the
//! coordinates in role order, so the default chart has `(a, b, c) = (x, y, z)`.

use serde::{Deserialize, Serialize};

use crate::chebyshev::{fixed_point_tp, Mat2};
use crate::error::{Error, Result};
use crate::flow::{sample_pairs, MapClass, Pair, PointMap};
use crate::padic::{newton_solve, PadicInt};
use crate::report::Report;
use crate::surface::{AutWord, Coord, SurfacePoint};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolydiskChart {
    base: SurfacePoint,
    solved: Coord,
}

/// Which family of expansions to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilizerLemma {
    /// `f = Ψ^{-1} (s_b s_c)^p Ψ` when `a0 ≡ ±2`.
    ParabF,
    /// `g = Ψ^{-1} (s_c s_a)^{N/2} Ψ`, `h = Ψ^{-1} (s_a s_b)^{N/2} Ψ` and their `p`-th powers.
    GAndH,
    /// `f = Ψ^{-1} (s_b s_c)^{N/2} Ψ` when `a0 ≢ ±2`.
    NonparaF,
}

fn is_border(v: PadicInt) -> bool {
    let p = v.prime();
    let r = v.mod_p();
    r == 2 || r == p - 2
}

/// `N = (p^2 - 1)/2`.
pub fn half_order(p: u64) -> u64 {
    (p * p - 1) / 2
}

impl PolydiskChart {
    /// The chart of the level-1 polydisk of `pt` solving for `solved`.
    pub fn parametrize(pt: &SurfacePoint, solved: Coord) -> Result<Self> {
        let d = pt.partials()[solved.index()];
        if !d.is_unit() {
            return Err(Error::NoChart(format!("∂_{solved}P vanishes mod p at {pt:?}")));
        }
        Ok(PolydiskChart { base: pt.clone(), solved })
    }

    /// The chart for the first coordinate (in `x, y, z` order) with a unit partial.
    pub fn parametrize_any(pt: &SurfacePoint) -> Result<Self> {
        Coord::all()
            .into_iter()
            .find_map(|c| PolydiskChart::parametrize(pt, c).ok())
            .ok_or_else(|| Error::NoChart(format!("{pt:?} is singular")))
    }

    pub fn base(&self) -> &SurfacePoint {
        &self.base
    }

    pub fn solved(&self) -> Coord {
        self.solved
    }

    /// `[a, b, c]` role coordinates.
    pub fn roles(&self) -> [Coord; 3] {
        let a = self.solved;
        [a, a.next(), a.next().next()]
    }

    pub fn prime(&self) -> u64 {
        self.base.prime()
    }

    /// Precision of points; chart coordinates carry one digit less.
    pub fn precision(&self) -> u32 {
        self.base.precision()
    }

    /// Base coordinates in role order.
    pub fn base_roles(&self) -> [PadicInt; 3] {
        self.roles().map(|c| self.base.coord(c))
    }

    /// `(∂_aP, ∂_bP, ∂_cP)` at the base.
    pub fn partials(&self) -> [PadicInt; 3] {
        let d = self.base.partials();
        self.roles().map(|c| d[c.index()])
    }

    /// The root of `P(·, b, c) = D` congruent to `a0`.
    pub fn xi(&self, b: PadicInt, c: PadicInt) -> Result<PadicInt> {
        let dd = self.base.d;
        // s^2 - bc s + (b^2 + c^2 - D)
        let coeffs = [b * b + c * c - dd, -(b * c), b.with_value(1)];
        newton_solve(&coeffs, self.base_roles()[0])
    }

    fn assemble(&self, roles: [PadicInt; 3]) -> SurfacePoint {
        let mut c = [roles[0]; 3];
        for (r, v) in self.roles().into_iter().zip(roles) {
            c[r.index()] = v;
        }
        let k = roles.iter().map(|v| v.precision()).min().expect("3 values");
        SurfacePoint { x: c[0], y: c[1], z: c[2], d: self.base.d.truncate(k) }
    }

    /// `Ψ(u, v)`; inputs at precision `k` give a point at precision `k + 1`.
    pub fn psi(&self, uv: Pair) -> Result<SurfacePoint> {
        let k = uv[0].precision().min(uv[1].precision()) + 1;
        if k > self.precision() {
            return Err(Error::InsufficientPrecision(format!(
                "chart coordinates mod p^{} exceed the chart precision p^{}",
                k - 1,
                self.precision()
            )));
        }
        let [_, b0, c0] = self.base_roles().map(|v| v.truncate(k));
        let b = b0 + uv[0].truncate(k - 1).mul_p_power(1)?;
        let c = c0 + uv[1].truncate(k - 1).mul_p_power(1)?;
        let a = self.xi(b, c)?;
        Ok(self.assemble([a, b, c]))
    }

    fn check_in_disk(&self, c: [PadicInt; 3]) -> Result<()> {
        let base = self.base.coords();
        if (0..3).any(|i| c[i].mod_p() != base[i].mod_p()) {
            return Err(Error::LeavesPolydisk(format!(
                "({}, {}, {}) is not congruent to the chart base mod p",
                c[0], c[1], c[2]
            )));
        }
        Ok(())
    }

    /// `Ψ^{-1}`, at one digit less than the point.
    pub fn psi_inverse(&self, pt: &SurfacePoint) -> Result<Pair> {
        self.coords_to_chart(pt.coords())
    }

    fn coords_to_chart(&self, c: [PadicInt; 3]) -> Result<Pair> {
        self.check_in_disk(c)?;
        let [_, rb, rc] = self.roles();
        let [_, b0, c0] = self.base_roles();
        let u = (c[rb.index()] - b0).div_by_p_power(1)?;
        let v = (c[rc.index()] - c0).div_by_p_power(1)?;
        Ok([u, v])
    }

    /// `Ψ^{-1}(w · Ψ(u, v))`.
    pub fn chart_apply(&self, w: &AutWord, uv: Pair) -> Result<Pair> {
        let pt = self.psi(uv)?;
        self.coords_to_chart(w.apply_coords(pt.coords()))
    }

    /// The conjugated word as a [`PointMap`] whose class is checked on samples.
    pub fn conjugated_map(&self, w: &AutWord, class: MapClass) -> Result<PointMap> {
        let chart = self.clone();
        let w = w.clone();
        PointMap::new(self.prime(), self.precision() - 1, class, move |uv| chart.chart_apply(&w, uv))
    }

    /// The word `s_i s_j` for role indices `i, j`, raised to `n`.
    pub fn role_pair_power(&self, i: usize, j: usize, n: u64) -> AutWord {
        let r = self.roles();
        AutWord::vieta_pair(r[i], r[j]).pow(n)
    }

    /// Re-centre at the `T_p`-fixed points of the free coordinates.
    pub fn recentre(&self) -> Result<PolydiskChart> {
        let [_, b0, c0] = self.base_roles();
        if is_border(b0) || is_border(c0) {
            return Err(Error::Hypothesis("free coordinates must avoid ±2 mod p to recentre".into()));
        }
        let (b1, c1) = (fixed_point_tp(b0), fixed_point_tp(c0));
        let a1 = self.xi(b1, c1)?;
        let base = self.assemble([a1, b1, c1]);
        PolydiskChart::parametrize(&base, self.solved)
    }

    /// `c1 = -N ∂_aP / (b0^2 - 4)`.
    pub fn c1(&self) -> Result<PadicInt> {
        let [_, b0, _] = self.base_roles();
        let n = b0.with_value(half_order(self.prime()) as i64);
        Ok(-(n * self.partials()[0]) * (b0 * b0).add_int(-4).invert()?)
    }

    /// `c2 = N ∂_aP / (c0^2 - 4)`.
    pub fn c2(&self) -> Result<PadicInt> {
        let [_, _, c0] = self.base_roles();
        let n = c0.with_value(half_order(self.prime()) as i64);
        Ok(n * self.partials()[0] * (c0 * c0).add_int(-4).invert()?)
    }

    /// `w1 = N/(a0^2 - 4) (-∂_cP, ∂_bP)`.
    pub fn w1(&self) -> Result<Pair> {
        let [a0, _, _] = self.base_roles();
        let [_, db, dc] = self.partials();
        let s = a0.with_value(half_order(self.prime()) as i64) * (a0 * a0).add_int(-4).invert()?;
        Ok([-(s * dc), s * db])
    }

    /// `w2 = -1/∂_aP (∂_bP, ∂_cP)`.
    pub fn w2(&self) -> Result<Pair> {
        let [da, db, dc] = self.partials();
        let s = -da.invert()?;
        Ok([s * db, s * dc])
    }
}

fn eq_mod(a: Pair, b: Pair, k: u32) -> bool {
    a[0].truncate(k) == b[0].truncate(k) && a[1].truncate(k) == b[1].truncate(k)
}

fn show(w: Pair) -> String {
    format!("({}, {})", w[0], w[1])
}

/// Sample chart coordinates: every residue pair mod `p` when `p <= 13`, plus 100 random pairs.
pub fn chart_samples(chart: &PolydiskChart, seed: u64) -> Result<Vec<Pair>> {
    sample_pairs(chart.prime(), chart.precision() - 1, 100, chart.prime() <= 13, seed)
}

/// `ξ(b0 + pu, c0 + pv) ≡ a0 - (∂_bP/∂_aP) pu - (∂_cP/∂_aP) pv (mod p^2)`.
pub fn verify_xi_expansion(chart: &PolydiskChart, samples: &[Pair]) -> Result<Report> {
    if chart.precision() < 2 {
        return Err(Error::InsufficientPrecision("ξ expansion needs points mod p^2".into()));
    }
    let mut report = Report::new("xi expansion mod p^2");
    let [a0, b0, c0] = chart.base_roles().map(|v| v.truncate(2));
    let [da, db, dc] = chart.partials().map(|v| v.truncate(2));
    let inv = da.invert()?;
    let p = a0.with_value(chart.prime() as i64);
    for &[u, v] in samples {
        let (u, v) = (u.truncate(1).extend(2)?, v.truncate(1).extend(2)?);
        let xi = chart.xi(b0 + p * u, c0 + p * v)?;
        let want = a0 - db * inv * p * u - dc * inv * p * v;
        report.check(xi == want, || format!("(u, v) = ({u}, {v}): ξ = {xi}, expansion {want}"));
    }
    report.note(format!("pointwise over {} samples", samples.len()));
    Ok(report)
}

/// Pointwise checks of the selected expansions on chart samples.
pub fn verify_stabilizer_expansions(chart: &PolydiskChart, lemma: StabilizerLemma, samples: &[Pair]) -> Result<Report> {
    match lemma {
        StabilizerLemma::ParabF => verify_parab_f(chart, samples),
        StabilizerLemma::GAndH => verify_g_and_h(chart, samples),
        StabilizerLemma::NonparaF => verify_nonpara_f(chart, samples),
    }
}

fn verify_parab_f(chart: &PolydiskChart, samples: &[Pair]) -> Result<Report> {
    let [a0, _, _] = chart.base_roles();
    if !is_border(a0) {
        return Err(Error::Hypothesis(format!("solved coordinate {a0} is not ±2 mod p")));
    }
    let p = chart.prime();
    let f = chart.role_pair_power(1, 2, p);
    let [_, db, dc] = chart.partials();
    let mut report = Report::new(format!("({f}) ≡ id + (∂bP, -∂cP) mod p"));
    for &uv in samples {
        let got = chart.chart_apply(&f, uv)?;
        let want = [uv[0] + db, uv[1] - dc];
        report.check(eq_mod(got, want, 1), || format!("{}: {} vs {}", show(uv), show(got), show(want)));
    }
    Ok(report)
}

fn free_fixed_points(chart: &PolydiskChart) -> Result<[PadicInt; 2]> {
    let [_, b0, c0] = chart.base_roles();
    if is_border(b0) {
        return Err(Error::Hypothesis(format!("first free coordinate {b0} is ±2 mod p")));
    }
    if is_border(c0) {
        return Err(Error::Hypothesis(format!("second free coordinate {c0} is ±2 mod p")));
    }
    Ok([fixed_point_tp(b0), fixed_point_tp(c0)])
}

/// Which constant term to use in the `g^p` congruence mod `p^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpConstant {
    /// `(b0 - b1)/p · (0, p c1)`, matching the `g` congruence mod `p`.
    FirstFree,
    /// `(c0 - c1)/p · (0, p c1)`.
    SecondFree,
}

/// The `g^p` congruence mod `p^2` with the chosen constant term.
pub fn verify_gp(chart: &PolydiskChart, samples: &[Pair], constant: GpConstant) -> Result<Report> {
    if chart.precision() < 3 {
        return Err(Error::InsufficientPrecision("g^p expansion needs points mod p^3".into()));
    }
    let [b1, c1f] = free_fixed_points(chart)?;
    let [_, b0, c0] = chart.base_roles();
    let p = chart.prime();
    let c1 = chart.c1()?;
    let shift = match constant {
        GpConstant::FirstFree => (b0 - b1) * c1,
        GpConstant::SecondFree => (c0 - c1f) * c1,
    }
    .truncate(2);
    let gp = chart.role_pair_power(2, 0, half_order(p) / 2 * p);
    let mut report = Report::new(format!("g^p mod p^2 ({constant:?} constant)"));
    for &uv in samples {
        let got = chart.chart_apply(&gp, uv)?;
        let [u, v] = uv.map(|t| t.truncate(2));
        let pc1 = c1.truncate(2) * u.with_value(p as i64);
        let want = [u, v + pc1 * u + shift];
        report.check(eq_mod(got, want, 2), || format!("{}: {} vs {}", show(uv), show(got), show(want)));
    }
    Ok(report)
}

fn verify_g_and_h(chart: &PolydiskChart, samples: &[Pair]) -> Result<Report> {
    let [b1, c1f] = free_fixed_points(chart)?;
    if chart.precision() < 3 {
        return Err(Error::InsufficientPrecision("g and h expansions need points mod p^3".into()));
    }
    let [_, b0, c0] = chart.base_roles();
    let p = chart.prime();
    let e = half_order(p) / 2;
    let (c1, c2) = (chart.c1()?, chart.c2()?);
    let kb = (b0 - b1).div_by_p_power(1)?;
    let kc = (c0 - c1f).div_by_p_power(1)?;
    let g = chart.role_pair_power(2, 0, e);
    let h = chart.role_pair_power(0, 1, e);
    let hp = chart.role_pair_power(0, 1, e * p);

    let mut report = Report::new("g and h expansions");
    let mut rg = Report::new("g mod p");
    let mut rh = Report::new("h mod p");
    let mut rhp = Report::new("h^p mod p^2");
    for &uv in samples {
        let [u, v] = uv;
        let got = chart.chart_apply(&g, uv)?;
        let want = [u, v + c1 * (u + kb)];
        rg.check(eq_mod(got, want, 1), || format!("{}: {} vs {}", show(uv), show(got), show(want)));

        let got = chart.chart_apply(&h, uv)?;
        let want = [u + c2 * (v + kc), v];
        rh.check(eq_mod(got, want, 1), || format!("{}: {} vs {}", show(uv), show(got), show(want)));

        let got = chart.chart_apply(&hp, uv)?;
        let [u2, v2] = uv.map(|t| t.truncate(2));
        let pc2 = c2.truncate(2) * u2.with_value(p as i64);
        let want = [u2 + pc2 * v2 + ((c0 - c1f) * c2).truncate(2), v2];
        rhp.check(eq_mod(got, want, 2), || format!("{}: {} vs {}", show(uv), show(got), show(want)));
    }
    let rgp = verify_gp(chart, samples, GpConstant::FirstFree)?;
    let alt = verify_gp(chart, samples, GpConstant::SecondFree)?;
    for r in [rg, rgp, rh, rhp] {
        report.merge(r);
    }
    report.note(format!(
        "g^p with the second-free-coordinate constant: {}/{} samples agree",
        alt.checks - alt.failures,
        alt.checks
    ));
    report.note(format!("pointwise over {} samples", samples.len()));
    Ok(report)
}

fn verify_nonpara_f(chart: &PolydiskChart, samples: &[Pair]) -> Result<Report> {
    let [a0, _, _] = chart.base_roles();
    if is_border(a0) {
        return Err(Error::Hypothesis(format!("solved coordinate {a0} is ±2 mod p")));
    }
    let p = chart.prime();
    let a1 = fixed_point_tp(a0);
    let ka = (a0 - a1).div_by_p_power(1)?;
    let (w1, w2) = (chart.w1()?, chart.w2()?);
    // I + w1 w2^T
    let m = Mat2::new(w1[0] * w2[0], w1[0] * w2[1], w1[1] * w2[0], w1[1] * w2[1]).add(&Mat2::identity(a0));
    let f = chart.role_pair_power(1, 2, half_order(p) / 2);
    let mut report = Report::new("nonparabolic (s_b s_c)^{N/2} mod p");
    for &uv in samples {
        let got = chart.chart_apply(&f, uv)?;
        let mu = m.apply(uv);
        let want = [mu[0] + ka * w1[0], mu[1] + ka * w1[1]];
        report.check(eq_mod(got, want, 1), || format!("{}: {} vs {}", show(uv), show(got), show(want)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{eval_p, is_point};

    fn pa(p: u64, k: u32, v: i64) -> PadicInt {
        PadicInt::new(p, k, v).unwrap()
    }

    fn base333(k: u32) -> SurfacePoint {
        SurfacePoint::from_ints(7, k, [3, 3, 3], 0).unwrap()
    }

    #[test]
    fn chart_round_trip() {
        let chart = PolydiskChart::parametrize(&base333(4), Coord::X).unwrap();
        assert_eq!(chart.psi([pa(7, 3, 0), pa(7, 3, 0)]).unwrap(), base333(4));
        for uv in chart_samples(&chart, 1).unwrap() {
            let pt = chart.psi(uv).unwrap();
            assert!(is_point(pt.coords(), pt.d));
            assert_eq!(chart.psi_inverse(&pt).unwrap(), uv);
        }
    }

    #[test]
    fn chart_roles_are_cyclic() {
        let pt = base333(3);
        for c in Coord::all() {
            let chart = PolydiskChart::parametrize(&pt, c).unwrap();
            let q = chart.psi([pa(7, 2, 5), pa(7, 2, 11)]).unwrap();
            assert_eq!(eval_p(q.x, q.y, q.z), q.d);
            assert_eq!(q.coord(c.next()).residue(), 3 + 7 * 5);
        }
    }

    #[test]
    fn no_chart_when_partial_vanishes() {
        // (2, 2, 0) on D = 8: ∂_xP = 4 and ∂_zP = -4 but p = 3 would break; use p = 7, x-partial 4
        let pt = SurfacePoint::from_ints(7, 2, [2, 2, 0], 8).unwrap();
        assert!(PolydiskChart::parametrize(&pt, Coord::X).is_ok());
        // ∂_zP = 2z - xy = -4, unit; craft a vanishing one: (1, 2, z) with 2·1 - 2z ≡ 0 → z = 1
        let pt = SurfacePoint::from_ints(7, 2, [1, 2, 1], 4).unwrap();
        assert!(matches!(PolydiskChart::parametrize(&pt, Coord::X), Err(Error::NoChart(_))));
    }

    #[test]
    fn xi_expansion_examples() {
        let chart = PolydiskChart::parametrize(&base333(3), Coord::X).unwrap();
        let [da, db, dc] = chart.partials();
        assert_eq!((-db * da.invert().unwrap()).signed_residue(), -1);
        assert_eq!((-dc * da.invert().unwrap()).signed_residue(), -1);
        let r = verify_xi_expansion(&chart, &chart_samples(&chart, 2).unwrap()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn leaving_the_disk_is_an_error() {
        let chart = PolydiskChart::parametrize(&base333(3), Coord::X).unwrap();
        let w = AutWord::parse("sx").unwrap();
        // s_x moves 3 to 9 - 3 = 6 mod 7
        assert!(matches!(chart.chart_apply(&w, [pa(7, 2, 0), pa(7, 2, 0)]), Err(Error::LeavesPolydisk(_))));
        let uv = [pa(7, 2, 4), pa(7, 2, 9)];
        assert_eq!(chart.chart_apply(&AutWord::identity(), uv).unwrap(), uv);
    }

    #[test]
    fn stabilizers_stay_in_chart() {
        let chart = PolydiskChart::parametrize(&base333(3), Coord::X).unwrap();
        let w = chart.role_pair_power(1, 2, 12);
        for uv in chart_samples(&chart, 3).unwrap() {
            chart.chart_apply(&w, uv).unwrap();
        }
        // x0 = 2 on D = 8 at (2, 2, 0)
        let pt = SurfacePoint::from_ints(7, 3, [2, 2, 0], 8).unwrap();
        let chart = PolydiskChart::parametrize(&pt, Coord::X).unwrap();
        let w = chart.role_pair_power(1, 2, 7);
        for uv in chart_samples(&chart, 4).unwrap() {
            chart.chart_apply(&w, uv).unwrap();
        }
    }

    #[test]
    fn chart_apply_is_multiplicative() {
        let chart = PolydiskChart::parametrize(&base333(4), Coord::X).unwrap();
        let g = chart.role_pair_power(2, 0, 12);
        let h = chart.role_pair_power(0, 1, 12);
        let gh = g.compose(&h);
        for uv in chart_samples(&chart, 5).unwrap().into_iter().take(40) {
            let two = chart.chart_apply(&g, chart.chart_apply(&h, uv).unwrap()).unwrap();
            assert_eq!(chart.chart_apply(&gh, uv).unwrap(), two);
        }
    }

    #[test]
    fn recentre_examples() {
        // y0 = 1: T_7(1) = 1 already
        let pt = SurfacePoint::from_ints(7, 3, [1, 1, 1], 2).unwrap();
        let chart = PolydiskChart::parametrize(&pt, Coord::X).unwrap();
        let re = chart.recentre().unwrap();
        assert_eq!(re.base().y.residue(), 1);
        assert_eq!(re.recentre().unwrap(), re);
        let chart = PolydiskChart::parametrize(&base333(4), Coord::X).unwrap();
        let re = chart.recentre().unwrap();
        assert_eq!(re.recentre().unwrap(), re);
        assert_eq!(re.base().residues().map(|r| r % 7), [3, 3, 3]);
    }

    #[test]
    fn parabolic_expansion_p5() {
        // D = 3: base (sqrt(D - 4), 2, 0) with x0 = sqrt(-1) ≡ ±2 mod 5
        let d = pa(5, 4, 3);
        let s = d.add_int(-4).sqrt().unwrap();
        let pt = SurfacePoint::new(s, pa(5, 4, 2), pa(5, 4, 0), d).unwrap();
        let chart = PolydiskChart::parametrize(&pt, Coord::X).unwrap();
        let [_, db, dc] = chart.partials();
        assert_eq!(db.residue(), 4);
        assert_eq!(dc, -s.mul_int(2));
        let samples = chart_samples(&chart, 6).unwrap();
        let r = verify_stabilizer_expansions(&chart, StabilizerLemma::ParabF, &samples).unwrap();
        assert!(r.passed(), "{r:?}");
        // the translation is (4, 2 sqrt(D - 4)) mod 5
        let f = chart.role_pair_power(1, 2, 5);
        let zero = [pa(5, 3, 0), pa(5, 3, 0)];
        let moved = chart.chart_apply(&f, zero).unwrap();
        assert_eq!([moved[0].mod_p(), moved[1].mod_p()], [4, s.mul_int(2).mod_p()]);
    }

    #[test]
    fn g_and_h_expansions() {
        let chart = PolydiskChart::parametrize(&base333(3), Coord::X).unwrap();
        let samples = chart_samples(&chart, 7).unwrap();
        let r = verify_stabilizer_expansions(&chart, StabilizerLemma::GAndH, &samples).unwrap();
        assert!(r.passed(), "{r:?}");
        let re = chart.recentre().unwrap();
        let r = verify_stabilizer_expansions(&re, StabilizerLemma::GAndH, &samples).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn nonparabolic_expansion() {
        let chart = PolydiskChart::parametrize(&base333(3), Coord::X).unwrap();
        let r = verify_stabilizer_expansions(&chart, StabilizerLemma::NonparaF, &chart_samples(&chart, 8).unwrap()).unwrap();
        assert!(r.passed(), "{r:?}");
        let pt = SurfacePoint::from_ints(7, 3, [2, 2, 0], 8).unwrap();
        let chart = PolydiskChart::parametrize(&pt, Coord::X).unwrap();
        assert!(matches!(
            verify_stabilizer_expansions(&chart, StabilizerLemma::NonparaF, &[]),
            Err(Error::Hypothesis(_))
        ));
    }
}
