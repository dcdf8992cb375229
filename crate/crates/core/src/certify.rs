//! Minimal-polydisk certification and the exploratory XD scan.
//!
//! A certificate records a base point, the chart around it, a strict move
//! `γ` with `dist(pt, γ·pt) = p^{-1}`, the mod-`p` orbit structure of the
//! chart maps, and a determinant witnessing a minimal level-1 subdisk.
//! Everything stored is a residue or a word string, so a certificate can be
//! re-evaluated from its own contents.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{catalog_point, enumerate_points, unite, find, CatalogCase, EnumMode, Level};
use crate::chebyshev::{t_at, Mat2};
use crate::error::{Error, Result};
use crate::flow::{local_minimality_det, twisted_minimality_det, MapClass, Pair};
use crate::padic::PadicInt;
use crate::polydisk::{half_order, PolydiskChart};
use crate::surface::{
    apply_generator, dist, eval_p, lift_point, AutWord, Coord, DistClass, Letter, SurfacePoint, ALPHABET,
};
use crate::SCHEMA_VERSION;

/// Default bound on Γ-word length for searches.
pub const DEFAULT_WORD_BUDGET: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// `(D-4 / p) = 1`: the point `(2, t + √(D-4), t)`.
    SpecialPoint,
    /// `D ≡ 0 mod p^2`: the least point mod `p` with a unit `∂_xP`.
    ArbitraryPoint,
    /// `p = 5`, `D ≡ 3 mod 5`: the point `(√(D-4), 2, 0)`.
    P5Exceptional,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::SpecialPoint => "special-point",
            Route::ArbitraryPoint => "arbitrary-point",
            Route::P5Exceptional => "p5-exceptional",
        })
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p <= 3 {
        return Err(Error::Hypothesis(format!("certification needs p > 3, got p = {p}")));
    }
    Ok(())
}

/// Which recipe applies to `D`; `D` must be known modulo `p^2` at least.
pub fn route_for(d: PadicInt) -> Result<Route> {
    let p = d.prime();
    check_prime(p)?;
    if p == 5 && d.mod_p() == 3 {
        return Ok(Route::P5Exceptional);
    }
    if d.add_int(-4).legendre() == 1 {
        return Ok(Route::SpecialPoint);
    }
    if d.precision() >= 2 && d.truncate(2).is_zero() {
        return Ok(Route::ArbitraryPoint);
    }
    Err(Error::Hypothesis(format!(
        "need D ≡ 0 mod p^2 or (D-4 / p) = 1, got D = {} mod {p}^{}",
        d.residue(),
        d.precision()
    )))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialPoint {
    pub point: SurfacePoint,
    pub route: Route,
    /// The scanned parameter for the generic recipe.
    pub t: Option<u64>,
}

fn is_pm2(v: PadicInt) -> bool {
    let r = v.mod_p();
    r == 2 || r == v.prime() - 2
}

/// The special point: `(2, t + √(D-4), t)` with the least admissible `t`, or
/// `(√(D-4), 2, 0)` when `p = 5` and `D ≡ 3`.
pub fn find_special_point(d: PadicInt) -> Result<SpecialPoint> {
    let p = d.prime();
    check_prime(p)?;
    let s = d
        .add_int(-4)
        .sqrt()
        .map_err(|_| Error::NoSpecialPoint(format!("D - 4 is not a nonzero square mod {p}")))?;
    if p == 5 && d.mod_p() == 3 {
        let point = SurfacePoint::new(s, d.with_value(2), d.with_value(0), d)?;
        return Ok(SpecialPoint { point, route: Route::P5Exceptional, t: None });
    }
    for t in 0..p {
        let tt = d.with_value(t as i64);
        let y = tt + s;
        let dx = (tt * y).add_int(-4);
        if is_pm2(y) || is_pm2(tt) || !dx.is_unit() {
            continue;
        }
        let point = SurfacePoint::new(d.with_value(2), y, tt, d)?;
        return Ok(SpecialPoint { point, route: Route::SpecialPoint, t: Some(t) });
    }
    Err(Error::NoSpecialPoint(format!("every t mod {p} hits an exclusion")))
}

/// The least point mod `p` (by code) with `∂_xP` a unit and `y, z ≢ ±2`, lifted.
pub fn arbitrary_base_point(d: PadicInt) -> Result<SurfacePoint> {
    let level = Level::new(d.prime(), 1, d.mod_p() as i64)?;
    let points = enumerate_points(&level, EnumMode::Auto)?;
    let p = d.prime();
    let bad = |r: u64| r == 2 || r == p - 2;
    let t = points
        .triples()
        .find(|&t| level.partials(t)[0] != 0 && !bad(t[1]) && !bad(t[2]))
        .ok_or_else(|| Error::NoChart(format!("no point mod {p} with unit ∂_xP and y, z ≢ ±2")))?;
    lift_point(d, t)
}

/// How a strict move was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveStage {
    /// `(s_a s_b)^p` for a cyclic pair.
    PPower,
    /// `α^{-1} (s_a s_b)^{(p^2-1)/4} α` for a short `α`.
    QuarterPower,
    /// Two words agreeing mod `p` but not mod `p^2`.
    Pigeonhole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictMove {
    pub word: AutWord,
    pub dist: DistClass,
    pub stage: MoveStage,
}

fn cyclic_pairs() -> [AutWord; 3] {
    [
        AutWord::vieta_pair(Coord::Y, Coord::Z),
        AutWord::vieta_pair(Coord::Z, Coord::X),
        AutWord::vieta_pair(Coord::X, Coord::Y),
    ]
}

/// Reduced Γ-words of length at most `max_len`, shortest first.
pub fn short_gamma_words(max_len: usize) -> Vec<AutWord> {
    let mut out = vec![AutWord::identity()];
    let mut frontier = vec![AutWord::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in Letter::VIETA {
                if w.letters().first() == Some(&l) {
                    continue;
                }
                next.push(AutWord::new(std::iter::once(l).chain(w.letters().iter().copied())));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn is_strict(pt: &SurfacePoint, w: &AutWord) -> bool {
    w.gamma_only() && !w.is_empty() && dist(pt, &w.apply(pt)) == DistClass::Exact(1)
}

/// A Γ-word moving `pt` by exactly `p^{-1}`.
///
/// Tries `(s_a s_b)^p`, then conjugated `(s_a s_b)^{(p^2-1)/4}`, then a
/// pigeonhole search mod `p^2` over words of length at most `budget`.
pub fn strict_move_search(pt: &SurfacePoint, budget: usize) -> Result<StrictMove> {
    let p = pt.prime();
    if pt.precision() < 2 {
        return Err(Error::InsufficientPrecision("strict moves need precision >= 2".into()));
    }
    let found = |word: AutWord, stage| {
        let d = dist(pt, &word.apply(pt));
        debug_assert_eq!(d, DistClass::Exact(1));
        Ok(StrictMove { word, dist: d, stage })
    };
    for f in cyclic_pairs() {
        let w = f.pow(p);
        if is_strict(pt, &w) {
            return found(w, MoveStage::PPower);
        }
    }
    let e = (p * p - 1) / 4;
    for alpha in short_gamma_words(budget.min(3)) {
        for f in cyclic_pairs() {
            let w = f.pow(e).conjugate_by(&alpha);
            if is_strict(pt, &w) {
                return found(w, MoveStage::QuarterPower);
            }
        }
    }
    // Pigeonhole: key each image by its residue mod p; a second word with the
    // same key but a different residue mod p^2 gives γ = w1^{-1} w2.
    let start = pt.truncate(2);
    let mut by_key: HashMap<[u64; 3], (AutWord, [u64; 3])> = HashMap::new();
    let mut seen: HashSet<[u64; 3]> = HashSet::new();
    let key = |q: &SurfacePoint| q.coords().map(|v| v.mod_p());
    by_key.insert(key(&start), (AutWord::identity(), start.residues()));
    seen.insert(start.residues());
    let mut queue = VecDeque::from([(AutWord::identity(), start)]);
    while let Some((w, q)) = queue.pop_front() {
        if w.len() >= budget {
            continue;
        }
        for l in Letter::VIETA {
            if w.letters().first() == Some(&l) {
                continue;
            }
            let image = apply_generator(l, &q);
            let r = image.residues();
            if !seen.insert(r) {
                continue;
            }
            let word = AutWord::new(std::iter::once(l).chain(w.letters().iter().copied()));
            match by_key.get(&key(&image)) {
                Some((w1, r1)) if *r1 != r => {
                    let gamma = w1.inverse().compose(&word);
                    if is_strict(pt, &gamma) {
                        return found(gamma, MoveStage::Pigeonhole);
                    }
                }
                Some(_) => {}
                None => {
                    by_key.insert(key(&image), (word.clone(), r));
                }
            }
            queue.push_back((word, image));
        }
    }
    Err(Error::NoStrictMove(format!("no Γ-word of length <= {budget} moves {pt:?} by exactly 1/{p}")))
}

/// Orbit structure of chart maps on `(Z/p)^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualTransitivity {
    pub transitive: bool,
    /// Orbit sizes ordered by least member `u + p v`.
    pub orbit_sizes: Vec<usize>,
    /// Orbits under the generators alone, before adding the extra word.
    pub orbit_sizes_without_extra: Vec<usize>,
    /// Image of the origin under the extra word, mod `p`.
    pub origin_image: Option<[u64; 2]>,
}

fn residue_pair(p: u64, i: usize) -> Result<Pair> {
    let i = i as u64;
    Ok([PadicInt::from_residue(p, 1, i % p)?, PadicInt::from_residue(p, 1, i / p)?])
}

fn pair_index(p: u64, w: Pair) -> usize {
    (w[0].mod_p() + p * w[1].mod_p()) as usize
}

/// The permutation of `(Z/p)^2` induced by a stabilizing word.
pub fn mod_p_action(chart: &PolydiskChart, w: &AutWord) -> Result<Vec<usize>> {
    let p = chart.prime();
    if chart.precision() < 2 {
        return Err(Error::InsufficientPrecision("chart maps mod p need precision >= 2".into()));
    }
    (0..(p * p) as usize)
        .into_par_iter()
        .map(|i| Ok(pair_index(p, chart.chart_apply(w, residue_pair(p, i)?)?)))
        .collect()
}

fn orbit_sizes(n: usize, actions: &[Vec<usize>]) -> Vec<usize> {
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for a in actions {
        for (i, &j) in a.iter().enumerate() {
            unite(&mut parent, i as u32, j as u32);
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n as u32 {
        let r = find(&mut parent, i);
        sizes[r as usize] += 1;
    }
    (0..n).filter(|&i| parent[i] as usize == i).map(|i| sizes[i]).collect()
}

/// One orbit on `(Z/p)^2` under `gens` and `extra`?
pub fn residual_transitivity(chart: &PolydiskChart, gens: &[AutWord], extra: Option<&AutWord>) -> Result<ResidualTransitivity> {
    let p = chart.prime();
    let n = (p * p) as usize;
    let mut actions = gens.iter().map(|w| mod_p_action(chart, w)).collect::<Result<Vec<_>>>()?;
    let without = orbit_sizes(n, &actions);
    let mut origin_image = None;
    if let Some(w) = extra {
        let a = mod_p_action(chart, w)?;
        origin_image = Some([a[0] as u64 % p, a[0] as u64 / p]);
        actions.push(a);
    }
    let sizes = orbit_sizes(n, &actions);
    Ok(ResidualTransitivity {
        transitive: sizes.len() == 1,
        orbit_sizes: sizes,
        orbit_sizes_without_extra: without,
        origin_image,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub budget_words: usize,
    /// Use the order of the companion matrix instead of `(p^2-1)/4`.
    pub optimized_exponent: bool,
}

impl CertifyOptions {
    pub fn new(budget_words: usize) -> Self {
        CertifyOptions { budget_words, optimized_exponent: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    BasePoint,
    Chart,
    StrictMove,
    ResidualTransitivity,
    MinimalSubdisk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub solved: String,
    pub recentred: bool,
    /// Base point after re-centring, mod `p^K`.
    pub base: [u64; 3],
    pub partials: [u64; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub word: String,
    pub stage: MoveStage,
    pub dist: String,
    pub dist_exponent: u32,
    pub image: [u64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubdiskTest {
    /// `det[(f(w)-w)/p, (g(w)-w)/p]` for maps congruent to the identity.
    Local,
    /// `det[(f(w)-w)/p, A (f(g^{-1}w) - g^{-1}w)/p]` with `g ≡ A` mod `p`.
    Twisted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdiskRecord {
    pub test: SubdiskTest,
    pub maps: [String; 2],
    pub witness: [u64; 2],
    /// Linear part of the second map mod `p`, row major; twisted test only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub twist: Option<[u64; 4]>,
    pub det: u64,
    pub det_precision: u32,
    pub unit: bool,
    /// The closed-form value of the determinant mod `p`, when known.
    pub expected_mod_p: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalityCertificate {
    pub schema_version: u32,
    pub alphabet: String,
    pub p: u64,
    #[serde(rename = "K")]
    pub precision: u32,
    #[serde(rename = "D")]
    pub d: u64,
    pub route: Route,
    pub options: CertifyOptions,
    pub start_point: [u64; 3],
    pub chart: Option<ChartRecord>,
    pub strict_move: Option<MoveRecord>,
    pub generators: Vec<String>,
    pub residual: Option<ResidualTransitivity>,
    pub subdisk: Option<SubdiskRecord>,
    pub verdict: bool,
    pub failure: Option<StageFailure>,
}

impl MinimalityCertificate {
    pub fn passed(&self) -> bool {
        self.verdict
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Everything the evaluator needs; recoverable from a certificate.
#[derive(Debug, Clone)]
struct Plan {
    route: Route,
    start: [u64; 3],
    solved: Coord,
    recentre: bool,
    strict: Option<(AutWord, MoveStage)>,
    generators: Vec<AutWord>,
    test: SubdiskTest,
    maps: [AutWord; 2],
    witness: [u64; 2],
}

fn stage_err(stage: Stage) -> impl FnOnce(Error) -> StageFailure {
    move |e| StageFailure { stage, message: e.to_string() }
}

fn padic_d(p: u64, k: u32, d: u64) -> Result<PadicInt> {
    PadicInt::from_residue(p, k, d)
}

fn coord_name(c: Coord) -> String {
    c.to_string()
}

fn parse_coord(s: &str) -> Result<Coord> {
    Coord::all()
        .into_iter()
        .find(|c| c.to_string() == s)
        .ok_or_else(|| Error::WordParse(format!("unknown coordinate {s:?}")))
}

fn blank(d: PadicInt, route: Route, options: CertifyOptions, start: [u64; 3]) -> MinimalityCertificate {
    MinimalityCertificate {
        schema_version: SCHEMA_VERSION,
        alphabet: ALPHABET.into(),
        p: d.prime(),
        precision: d.precision(),
        d: d.residue(),
        route,
        options,
        start_point: start,
        chart: None,
        strict_move: None,
        generators: Vec::new(),
        residual: None,
        subdisk: None,
        verdict: false,
        failure: None,
    }
}

fn build_chart(d: PadicInt, plan: &Plan) -> Result<PolydiskChart> {
    let start = SurfacePoint::from_coords(plan.start.map(|r| d.with_residue(r)), d)?;
    let chart = PolydiskChart::parametrize(&start, plan.solved)?;
    if plan.recentre {
        chart.recentre()
    } else {
        Ok(chart)
    }
}

fn expected_det(chart: &PolydiskChart, plan: &Plan, options: CertifyOptions) -> Option<u64> {
    match plan.test {
        SubdiskTest::Local if !options.optimized_exponent => {
            let (c1, c2) = (chart.c1().ok()?, chart.c2().ok()?);
            let [u, v] = plan.witness.map(|r| c1.with_residue(r));
            Some((-(c1 * c2 * u * v)).mod_p())
        }
        SubdiskTest::Twisted => {
            let a0 = chart.base_roles()[0];
            Some(a0.pow(3).mul_int(24).mod_p())
        }
        _ => None,
    }
}

fn run_subdisk(chart: &PolydiskChart, plan: &Plan, options: CertifyOptions) -> Result<SubdiskRecord> {
    let k = chart.precision() - 1;
    let w0 = [
        PadicInt::from_residue(chart.prime(), k, plan.witness[0])?,
        PadicInt::from_residue(chart.prime(), k, plan.witness[1])?,
    ];
    let f = chart.conjugated_map(&plan.maps[0], MapClass::IdentityModP)?;
    let (verdict, twist) = match plan.test {
        SubdiskTest::Local => {
            let g = chart.conjugated_map(&plan.maps[1], MapClass::IdentityModP)?;
            (local_minimality_det(&f, &g, w0)?, None)
        }
        SubdiskTest::Twisted => {
            let c2 = chart.c2()?;
            let like = c2.truncate(1);
            let a = Mat2::new(like.with_value(1), c2.truncate(1), like.with_value(0), like.with_value(1));
            let class = MapClass::AffineModP { a, b: [like.with_value(0), like.with_value(0)] };
            let g = chart.conjugated_map(&plan.maps[1], class)?;
            let twist = [1, c2.mod_p(), 0, 1];
            (twisted_minimality_det(&f, &g, w0)?, Some(twist))
        }
    };
    Ok(SubdiskRecord {
        test: plan.test,
        maps: plan.maps.clone().map(|w| w.to_string()),
        witness: plan.witness,
        twist,
        det: verdict.det.residue(),
        det_precision: verdict.det.precision(),
        unit: verdict.unit,
        expected_mod_p: expected_det(chart, plan, options),
    })
}

/// Run every check of `plan`; stages after a failure are left empty.
fn evaluate(d: PadicInt, plan: &Plan, options: CertifyOptions) -> MinimalityCertificate {
    let mut cert = blank(d, plan.route, options, plan.start);
    cert.generators = plan.generators.iter().map(|w| w.to_string()).collect();
    if let Err(f) = evaluate_stages(d, plan, options, &mut cert) {
        cert.failure = Some(f);
        cert.verdict = false;
    }
    cert
}

fn evaluate_stages(
    d: PadicInt,
    plan: &Plan,
    options: CertifyOptions,
    cert: &mut MinimalityCertificate,
) -> std::result::Result<(), StageFailure> {
    let chart = build_chart(d, plan).map_err(stage_err(Stage::Chart))?;
    let base = chart.base().clone();
    cert.chart = Some(ChartRecord {
        solved: coord_name(plan.solved),
        recentred: plan.recentre,
        base: base.residues(),
        partials: base.partials().map(|v| v.residue()),
    });

    let fail = |stage, message: String| StageFailure { stage, message };
    let Some((gamma, stage)) = &plan.strict else {
        return Err(fail(Stage::StrictMove, "no strict move".into()));
    };
    if !gamma.gamma_only() {
        return Err(fail(Stage::StrictMove, format!("{gamma} is not a Γ-word")));
    }
    let image = gamma.apply(&base);
    let dd = dist(&base, &image);
    cert.strict_move = Some(MoveRecord {
        word: gamma.to_string(),
        stage: *stage,
        dist: dd.to_string(),
        dist_exponent: dd.exponent(),
        image: image.residues(),
    });
    if dd != DistClass::Exact(1) {
        return Err(fail(Stage::StrictMove, format!("{gamma} moves the base by {dd}, not exactly 1/p")));
    }

    let residual = residual_transitivity(&chart, &plan.generators, Some(gamma))
        .map_err(stage_err(Stage::ResidualTransitivity))?;
    let transitive = residual.transitive;
    let sizes = residual.orbit_sizes.len();
    cert.residual = Some(residual);
    if !transitive {
        return Err(fail(Stage::ResidualTransitivity, format!("{sizes} orbits on (Z/p)^2")));
    }

    let sub = run_subdisk(&chart, plan, options).map_err(stage_err(Stage::MinimalSubdisk))?;
    let unit = sub.unit;
    cert.subdisk = Some(sub);
    if !unit {
        return Err(fail(Stage::MinimalSubdisk, "determinant is not a unit".into()));
    }
    cert.verdict = true;
    Ok(())
}

fn generic_exponents(chart: &PolydiskChart, options: CertifyOptions) -> Result<(u64, u64)> {
    let p = chart.prime();
    let quarter = half_order(p) / 2;
    if !options.optimized_exponent {
        return Ok((quarter, quarter));
    }
    // (s_c s_a) acts as C(b)^2, so its order is ord C(b) / gcd(ord C(b), 2).
    let [_, b, c] = chart.base_roles();
    let half = |v: PadicInt| -> Result<u64> {
        let o = crate::chebyshev::rotation_order(v)?;
        Ok(if o % 2 == 0 { o / 2 } else { o })
    };
    Ok((half(b)?, half(c)?))
}

/// The base point for the route of `D`, before any re-centring.
pub fn certification_start(d: PadicInt) -> Result<(Route, SurfacePoint)> {
    let route = route_for(d)?;
    let start = match route {
        Route::SpecialPoint | Route::P5Exceptional => find_special_point(d)?.point,
        Route::ArbitraryPoint => arbitrary_base_point(d)?,
    };
    Ok((route, start))
}

/// The chart used by the certificate: solved for `x`, re-centred at the
/// `T_p`-fixed points except on the `p = 5` route.
pub fn certification_chart(d: PadicInt) -> Result<(Route, PolydiskChart)> {
    let (route, start) = certification_start(d)?;
    let chart = PolydiskChart::parametrize(&start, Coord::X)?;
    let chart = if route == Route::P5Exceptional { chart } else { chart.recentre()? };
    Ok((route, chart))
}

/// Generators for residual transitivity and the two subdisk maps.
pub fn certification_words(route: Route, chart: &PolydiskChart, options: CertifyOptions) -> Result<(Vec<AutWord>, [AutWord; 2])> {
    let p = chart.prime();
    Ok(match route {
        Route::P5Exceptional => (
            vec![chart.role_pair_power(2, 0, p), chart.role_pair_power(0, 1, 6)],
            [chart.role_pair_power(2, 0, p * p), chart.role_pair_power(0, 1, 6)],
        ),
        _ => {
            let (eg, eh) = generic_exponents(chart, options)?;
            let g = chart.role_pair_power(2, 0, eg);
            let h = chart.role_pair_power(0, 1, eh);
            let maps = [g.pow(p), h.pow(p)];
            (vec![g, h], maps)
        }
    })
}

/// Search for a plan: choose the base point and chart, find the strict move
/// and the subdisk maps.
fn make_plan(d: PadicInt, options: CertifyOptions) -> std::result::Result<Plan, (Route, [u64; 3], StageFailure)> {
    let route = route_for(d).map_err(|e| (Route::ArbitraryPoint, [0; 3], stage_err(Stage::BasePoint)(e)))?;
    let (_, start) = certification_start(d).map_err(|e| (route, [0; 3], stage_err(Stage::BasePoint)(e)))?;
    let residues = start.residues();
    let err = |stage| move |e: Error| (route, residues, stage_err(stage)(e));
    let p5 = route == Route::P5Exceptional;
    let mut plan = Plan {
        route,
        start: residues,
        solved: Coord::X,
        recentre: !p5,
        strict: None,
        generators: Vec::new(),
        test: if p5 { SubdiskTest::Twisted } else { SubdiskTest::Local },
        maps: [AutWord::identity(), AutWord::identity()],
        witness: if p5 { [0, 0] } else { [1, 1] },
    };
    let chart = build_chart(d, &plan).map_err(err(Stage::Chart))?;
    let (generators, maps) = certification_words(route, &chart, options).map_err(err(Stage::Chart))?;
    plan.generators = generators;
    plan.maps = maps;
    let mv = strict_move_search(chart.base(), options.budget_words).map_err(err(Stage::StrictMove))?;
    plan.strict = Some((mv.word, mv.stage));
    Ok(plan)
}

/// The full pipeline. Hypothesis violations are errors; failures of a
/// mathematical stage are recorded in the certificate.
pub fn certify_minimal_polydisk(p: u64, k: u32, d: i64, options: CertifyOptions) -> Result<MinimalityCertificate> {
    let dd = PadicInt::new(p, k, d)?;
    certify_padic(dd, options)
}

pub fn certify_padic(d: PadicInt, options: CertifyOptions) -> Result<MinimalityCertificate> {
    check_prime(d.prime())?;
    if d.precision() < 3 {
        return Err(Error::Hypothesis(format!("certification needs K >= 3, got K = {}", d.precision())));
    }
    route_for(d)?;
    match make_plan(d, options) {
        Ok(plan) => Ok(evaluate(d, &plan, options)),
        Err((route, start, failure)) => {
            let mut cert = blank(d, route, options, start);
            cert.failure = Some(failure);
            Ok(cert)
        }
    }
}

fn plan_from_certificate(cert: &MinimalityCertificate) -> Result<Option<Plan>> {
    let (Some(chart), Some(mv), Some(sub)) = (&cert.chart, &cert.strict_move, &cert.subdisk) else {
        return Ok(None);
    };
    let parse = |s: &String| AutWord::parse(s);
    Ok(Some(Plan {
        route: cert.route,
        start: cert.start_point,
        solved: parse_coord(&chart.solved)?,
        recentre: chart.recentred,
        strict: Some((parse(&mv.word)?, mv.stage)),
        generators: cert.generators.iter().map(parse).collect::<Result<_>>()?,
        test: sub.test,
        maps: [parse(&sub.maps[0])?, parse(&sub.maps[1])?],
        witness: sub.witness,
    }))
}

/// Re-evaluate a certificate from its recorded words and residues.
///
/// Certificates stopped before the subdisk stage are regenerated from scratch.
pub fn replay_certificate(cert: &MinimalityCertificate) -> Result<MinimalityCertificate> {
    let d = padic_d(cert.p, cert.precision, cert.d)?;
    match plan_from_certificate(cert)? {
        Some(plan) => Ok(evaluate(d, &plan, cert.options)),
        None => certify_padic(d, cert.options),
    }
}

/// Replay reproduces every recorded value.
pub fn verify_certificate(cert: &MinimalityCertificate) -> Result<bool> {
    Ok(replay_certificate(cert)? == *cert)
}

/// A witness for `P(T_p(α·pt)) ≢ D mod p^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XdWitness {
    pub point: [u64; 3],
    pub word: String,
    pub image: [u64; 3],
    /// `P(T_p(α·pt))` mod `p^2`.
    pub value: u64,
    /// A conjugated quarter power moving `pt` by exactly `p^{-1}`, if any.
    pub strict_move: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XdReport {
    pub schema_version: u32,
    pub alphabet: String,
    pub p: u64,
    #[serde(rename = "K")]
    pub precision: u32,
    #[serde(rename = "D")]
    pub d: u64,
    pub budget_words: usize,
    pub scope: String,
    pub found: bool,
    pub witness: Option<XdWitness>,
    pub points_scanned: usize,
    pub words_scanned: usize,
    /// Set when the certification hypotheses hold, so strict moves exist anyway.
    pub certify_route: Option<Route>,
}

fn xd_value(pt: &SurfacePoint) -> PadicInt {
    let p = pt.prime() as i64;
    let [x, y, z] = pt.coords().map(|v| t_at(p, v).truncate(2));
    eval_p(x, y, z)
}

fn xd_strict_move(pt: &SurfacePoint, alpha: &AutWord) -> Option<String> {
    let e = (pt.prime().pow(2) - 1) / 4;
    cyclic_pairs()
        .into_iter()
        .map(|f| f.pow(e).conjugate_by(alpha))
        .find(|w| is_strict(pt, w))
        .map(|w| w.to_string())
}

struct XdScan {
    witness: Option<XdWitness>,
    words: usize,
}

/// Γ-words of length at most `budget` from `pt`, deduplicated by the image mod `p`.
fn xd_scan_point(pt: &SurfacePoint, budget: usize, d2: PadicInt) -> XdScan {
    let mut seen: HashSet<[u64; 3]> = HashSet::new();
    let key = |q: &SurfacePoint| q.coords().map(|v| v.mod_p());
    seen.insert(key(pt));
    let mut queue = VecDeque::from([(AutWord::identity(), pt.clone())]);
    let mut words = 0;
    while let Some((w, q)) = queue.pop_front() {
        words += 1;
        let value = xd_value(&q);
        if value != d2 {
            return XdScan {
                witness: Some(XdWitness {
                    point: pt.residues(),
                    word: w.to_string(),
                    image: q.residues(),
                    value: value.residue(),
                    strict_move: xd_strict_move(pt, &w),
                }),
                words,
            };
        }
        if w.len() >= budget {
            continue;
        }
        for l in Letter::VIETA {
            let image = apply_generator(l, &q);
            if seen.insert(key(&image)) {
                let word = AutWord::new(std::iter::once(l).chain(w.letters().iter().copied()));
                queue.push_back((word, image));
            }
        }
    }
    XdScan { witness: None, words }
}

fn xd_report(d: PadicInt, budget: usize, scope: String) -> XdReport {
    XdReport {
        schema_version: SCHEMA_VERSION,
        alphabet: ALPHABET.into(),
        p: d.prime(),
        precision: d.precision(),
        d: d.residue(),
        budget_words: budget,
        scope,
        found: false,
        witness: None,
        points_scanned: 0,
        words_scanned: 0,
        certify_route: if d.prime() > 3 { route_for(d).ok() } else { None },
    }
}

/// Scan Γ-orbit representatives mod `p` (lifted to `p^K`) and Γ-words up to
/// `budget` for a witness of condition XD.
pub fn check_xd(dd: PadicInt, budget: usize) -> Result<XdReport> {
    let (p, k) = (dd.prime(), dd.precision());
    if k < 3 {
        return Err(Error::Hypothesis(format!("XD scan needs K >= 3, got K = {k}")));
    }
    let level = Level::new(p, 1, dd.mod_p() as i64)?;
    let points = enumerate_points(&level, EnumMode::Auto)?;
    let partition = crate::census::orbits(&points, &crate::census::GenSet::Gamma)?;
    let mut report = xd_report(dd, budget, "gamma-orbit representatives mod p".into());
    let d2 = dd.truncate(2);
    let lifted: Vec<SurfacePoint> = partition
        .orbits
        .iter()
        .filter_map(|o| lift_point(dd, o.representative).ok())
        .collect();
    for pt in lifted {
        report.points_scanned += 1;
        let scan = xd_scan_point(&pt, budget, d2);
        report.words_scanned += scan.words;
        if let Some(w) = scan.witness {
            report.found = true;
            report.witness = Some(w);
            break;
        }
    }
    Ok(report)
}

/// The XD scan restricted to the Γ-orbit of one catalog point.
pub fn check_xd_catalog(p: u64, k: u32, case: CatalogCase, d: Option<PadicInt>, budget: usize) -> Result<XdReport> {
    if k < 3 {
        return Err(Error::Hypothesis(format!("XD scan needs K >= 3, got K = {k}")));
    }
    let (coords, dd) = catalog_point(p, k, case, d)?
        .ok_or_else(|| Error::CatalogUnavailable(format!("{} has no named point", case.name())))?;
    let pt = SurfacePoint::from_coords(coords, dd)?;
    let mut report = xd_report(dd, budget, format!("orbit of the {} point", case.name()));
    let scan = xd_scan_point(&pt, budget, dd.truncate(2));
    report.points_scanned = 1;
    report.words_scanned = scan.words;
    report.found = scan.witness.is_some();
    report.witness = scan.witness;
    Ok(report)
}
