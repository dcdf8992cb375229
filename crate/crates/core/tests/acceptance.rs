//! One line per acceptance criterion: status, measured values, time against budget.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use markoff_padic::census::{
    check_orbit_divisibility, check_transitivity, count_points, finite_orbit_catalog, CatalogCase, EnumMode, GenSet,
    Level,
};
use markoff_padic::certify::{
    certification_chart, certification_words, certify_minimal_polydisk, find_special_point, strict_move_search,
    verify_certificate, CertifyOptions, DEFAULT_WORD_BUDGET,
};
use markoff_padic::chebyshev::{verify_chebyshev_suite, verify_companion_estimates, verify_power_sum_identity};
use markoff_padic::flow::{verify_flow_suite, MapClass, Pair, PointMap};
use markoff_padic::polydisk::{
    chart_samples, verify_gp, verify_stabilizer_expansions, verify_xi_expansion, GpConstant, PolydiskChart,
    StabilizerLemma,
};
use markoff_padic::surface::{dist, lift_point, AutWord, DistClass, Letter, SurfacePoint};
use markoff_padic::{PadicInt, Report};

struct Line {
    id: u32,
    pass: bool,
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (ok, detail) = f();
    let took = start.elapsed();
    let in_time = took <= budget;
    let pass = ok && in_time;
    println!(
        "[{}] {id:>2} {name}: {detail} ({:.2}s / {}s{})",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" }
    );
    Line { id, pass }
}

fn all_pass(reports: &[Report]) -> (bool, String) {
    let checks: usize = reports.iter().map(|r| r.checks).sum();
    let failed: Vec<&Report> = reports.iter().filter(|r| !r.passed()).collect();
    match failed.first() {
        None => (true, format!("{} reports, {checks} checks", reports.len())),
        Some(r) => (false, format!("{} of {} reports fail; first: {}: {:?}", failed.len(), reports.len(), r.name, r.first_discrepancy)),
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn counting() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, expected) in [(5u64, 10u64), (7, 28), (11, 88), (19, 304)] {
        let n = count_points(&Level::new(p, 1, 0).unwrap(), EnumMode::Brute).unwrap().count;
        ok &= n == expected;
        parts.push(if n == expected { format!("p={p}: {n}") } else { format!("p={p}: {n} (expected {expected})") });
    }
    (ok, parts.join(", "))
}

fn divisibility() -> (bool, String) {
    let reports: Vec<Report> = [7u64, 11]
        .into_iter()
        .map(|p| check_orbit_divisibility(&Level::new(p, 2, 0).unwrap()).unwrap())
        .collect();
    let notes: Vec<String> = reports.iter().flat_map(|r| r.notes.clone()).collect();
    let (ok, detail) = all_pass(&reports);
    (ok, format!("{detail}; {}", notes.join("; ")))
}

fn transitivity_lift() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, d) in [(7u64, 0i64), (11, 0), (13, 0), (5, 3)] {
        let base = check_transitivity(&Level::new(p, 1, d).unwrap(), &GenSet::Aut).unwrap();
        let lifts: Vec<bool> =
            [2, 3].into_iter().map(|k| check_transitivity(&Level::new(p, k, d).unwrap(), &GenSet::Aut).unwrap()).collect();
        ok &= base && lifts.iter().all(|&b| b);
        parts.push(format!("(p={p},D={d}) mod p {base}, p^2 {}, p^3 {}", lifts[0], lifts[1]));
    }
    (ok, parts.join("; "))
}

fn chebyshev() -> (bool, String) {
    let mut reports = Vec::new();
    for p in [3u64, 5, 7, 11, 13] {
        let xs: Vec<i64> = (0..p as i64).chain([p as i64 + 2, -7, 1000]).collect();
        reports.push(verify_chebyshev_suite(p, 3, 200, &xs).unwrap());
        reports.push(verify_power_sum_identity(p, 3, &xs).unwrap());
    }
    all_pass(&reports)
}

fn companion_estimates() -> (bool, String) {
    let mut reports = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in [5u64, 7, 11, 13] {
        let mut us: Vec<PadicInt> = (0..p).map(|u| PadicInt::from_residue(p, 2, u).unwrap()).collect();
        us.extend((0..100).map(|_| PadicInt::from_residue(p, 2, rng.gen_range(0..p * p)).unwrap()));
        let generic: Vec<u64> = (0..p).filter(|&r| r != 2 && r != p - 2).collect();
        let mut bases: Vec<u64> = (0..10).map(|i| generic[i % generic.len()] + p * i as u64).collect();
        bases.extend((0..5).flat_map(|j| [2 + p * j, p - 2 + p * j]));
        for b in bases {
            reports.push(verify_companion_estimates(PadicInt::from_residue(p, 3, b).unwrap(), &us).unwrap());
        }
    }
    all_pass(&reports)
}

fn flow_engine() -> (bool, String) {
    let mut reports = Vec::new();
    for p in [5u64, 7] {
        let poly = PointMap::new(p, 3, MapClass::IdentityModP, move |w: Pair| {
            let pp = w[0].with_value(p as i64);
            Ok([w[0] + pp * w[1] * w[1] + pp, w[1] + pp * w[0]])
        })
        .unwrap();
        reports.push(verify_flow_suite(&poly, 8, p).unwrap());
    }
    for (p, d) in [(7u64, 0i64), (5, 0)] {
        let (route, chart) = certification_chart(PadicInt::new(p, 8, d).unwrap()).unwrap();
        let (_, maps) = certification_words(route, &chart, CertifyOptions::new(DEFAULT_WORD_BUDGET)).unwrap();
        let f = chart.conjugated_map(&maps[0], MapClass::IdentityModP).unwrap();
        reports.push(verify_flow_suite(&f, chart.precision() - 1, 11).unwrap());
    }
    all_pass(&reports)
}

fn chart_at(p: u64, d: i64) -> PolydiskChart {
    certification_chart(PadicInt::new(p, 3, d).unwrap()).unwrap().1
}

fn expansions() -> (bool, String) {
    use StabilizerLemma::*;
    let cases: [(u64, i64, &[StabilizerLemma], bool); 4] = [
        (5, 3, &[ParabF], false),
        (5, 0, &[ParabF, GAndH], true),
        (7, 0, &[GAndH, NonparaF], true),
        (13, 0, &[ParabF, GAndH], true),
    ];
    let mut reports = Vec::new();
    for (p, d, lemmas, gp) in cases {
        let chart = chart_at(p, d);
        let samples = chart_samples(&chart, p ^ 0x77).unwrap();
        reports.push(verify_xi_expansion(&chart, &samples).unwrap());
        for &l in lemmas {
            reports.push(verify_stabilizer_expansions(&chart, l, &samples).unwrap());
        }
        if gp {
            reports.push(verify_gp(&chart, &samples, GpConstant::FirstFree).unwrap());
        }
    }
    all_pass(&reports)
}

fn strict_moves() -> (bool, String) {
    let sp = find_special_point(PadicInt::new(13, 3, 0).unwrap()).unwrap().point;
    let gamma = AutWord::parse("(sy sz)^13").unwrap();
    let d13 = dist(&sp, &gamma.apply(&sp));
    let found13 = strict_move_search(&sp, DEFAULT_WORD_BUDGET).unwrap();
    let (_, chart7) = certification_chart(PadicInt::new(7, 3, 0).unwrap()).unwrap();
    let mv7 = strict_move_search(chart7.base(), DEFAULT_WORD_BUDGET).unwrap();
    let d7 = dist(chart7.base(), &mv7.word.apply(chart7.base()));
    let ok = d13 == DistClass::Exact(1) && found13.word == gamma && d7 == DistClass::Exact(1);
    (ok, format!("p=13: ({gamma}) gives {d13}, search returns ({}); p=7: ({}) gives {d7}", found13.word, mv7.word))
}

fn certification() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, k, d) in [(7u64, 3u32, 0i64), (11, 3, 0), (13, 3, 0), (5, 3, 3)] {
        let c = certify_minimal_polydisk(p, k, d, CertifyOptions::new(DEFAULT_WORD_BUDGET)).unwrap();
        let replays = verify_certificate(&c).unwrap();
        ok &= c.verdict && replays;
        let det = c.subdisk.as_ref().map(|s| s.det).unwrap_or_default();
        parts.push(format!("({p},{k},{d}) {} via {} det {det} replay {replays}", c.verdict, c.route));
    }
    (ok, parts.join("; "))
}

fn catalog() -> (bool, String) {
    let cases = [
        (7u64, CatalogCase::D2),
        (7, CatalogCase::D3Sqrt2),
        (11, CatalogCase::GoldenZero),
        (11, CatalogCase::GoldenPhi),
        (11, CatalogCase::GoldenInvPhi),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, case) in cases {
        let e = finite_orbit_catalog(p, 4, case, None).unwrap();
        ok &= e.matches();
        let collapse = if e.matches() { "" } else { " collapsed" };
        parts.push(format!(
            "{} p={p}: Γ {} Aut {} (expected {}){collapse}",
            e.case,
            e.gamma_size.unwrap_or(0),
            e.aut_size.unwrap_or(0),
            e.expected.unwrap_or(0)
        ));
    }
    (ok, parts.join("; "))
}

fn random_point(rng: &mut ChaCha8Rng, base: &[SurfacePoint]) -> SurfacePoint {
    let mut pt = base[rng.gen_range(0..base.len())].clone();
    for _ in 0..rng.gen_range(0..12) {
        pt = Letter::ALL[rng.gen_range(0..9)].apply_to(&pt);
    }
    pt
}

trait ApplyTo {
    fn apply_to(self, pt: &SurfacePoint) -> SurfacePoint;
}

impl ApplyTo for Letter {
    fn apply_to(self, pt: &SurfacePoint) -> SurfacePoint {
        AutWord::new([self]).apply(pt)
    }
}

fn properties() -> (bool, String) {
    let mut failures = 0usize;
    let mut checks = 0usize;
    let mut check = |ok: bool| {
        checks += 1;
        failures += usize::from(!ok);
    };
    // exhaustive ring laws at tiny sizes
    for (p, k) in [(3u64, 2u32), (5, 2)] {
        let q = p.pow(k);
        let x = |v: u64| PadicInt::from_residue(p, k, v).unwrap();
        for a in 0..q {
            for b in 0..q {
                check((x(a) * x(b)).residue() == a * b % q && (x(a) + x(b)).residue() == (a + b) % q);
                check(x(a) * x(b) == x(b) * x(a));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = [3u64, 5, 7, 11, 13][rng.gen_range(0..5)];
        let k = rng.gen_range(1..6);
        let q = p.pow(k) as i128;
        let [a, b, c] = [(); 3].map(|_| rng.gen_range(-1_000_000i64..1_000_000));
        let x = |v: i64| PadicInt::new(p, k, v).unwrap();
        check(x(a) * (x(b) + x(c)) == x(a) * x(b) + x(a) * x(c));
        check((x(a) * x(b)).residue() as i128 == (a as i128 * b as i128).rem_euclid(q));
    }
    // ultrametric, isometry and chart round trips on points mod 7^4
    let d = PadicInt::new(7, 4, 0).unwrap();
    let level = Level::new(7, 1, 0).unwrap();
    let base: Vec<SurfacePoint> = markoff_padic::census::enumerate_points(&level, EnumMode::Auto)
        .unwrap()
        .triples()
        .map(|t| lift_point(d, t).unwrap())
        .collect();
    for _ in 0..1000 {
        let (a, b, c) = (random_point(&mut rng, &base), random_point(&mut rng, &base), random_point(&mut rng, &base));
        check(dist(&a, &c) <= dist(&a, &b).max(dist(&b, &c)));
        let w = AutWord::new((0..rng.gen_range(0..10)).map(|_| Letter::ALL[rng.gen_range(0..9)]));
        check(dist(&w.apply(&a), &w.apply(&b)) == dist(&a, &b));
        let chart = PolydiskChart::parametrize_any(&a).unwrap();
        let z = PadicInt::zero(7, 3).unwrap();
        let uv = [z.with_value(rng.gen_range(0..343)), z.with_value(rng.gen_range(0..343))];
        check(chart.psi_inverse(&chart.psi(uv).unwrap()).unwrap() == uv);
    }
    for (p, dd) in [(7u64, 0i64), (5, 3)] {
        let c1 = certify_minimal_polydisk(p, 3, dd, CertifyOptions::new(8)).unwrap();
        let c2 = certify_minimal_polydisk(p, 3, dd, CertifyOptions::new(8)).unwrap();
        check(c1.to_json().unwrap() == c2.to_json().unwrap());
        check(verify_certificate(&c1).unwrap());
    }
    (failures == 0, format!("{checks} checks, {failures} failures"))
}

#[test]
fn acceptance() {
    let lines = vec![
        criterion(1, "point counts |X_0^*(F_p)| = p(p-3)", secs(5), counting),
        criterion(2, "Γ-orbits on X_0^*(Z/p^2) have size divisible by p^2", secs(60), divisibility),
        criterion(3, "Aut transitivity lifts to p^2 and p^3", secs(300), transitivity_lift),
        criterion(4, "Chebyshev identity suite", secs(10), chebyshev),
        criterion(5, "companion-power estimates", secs(60), companion_estimates),
        criterion(6, "flow engine", secs(60), flow_engine),
        criterion(7, "expansion congruences on charts", secs(120), expansions),
        criterion(8, "strict moves", secs(60), strict_moves),
        criterion(9, "minimal polydisk certificates", secs(300), certification),
        criterion(10, "finite-orbit catalog sizes at K=4", secs(60), catalog),
        criterion(11, "property suites", secs(60), properties),
    ];
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("{} of {} criteria pass; failing: {failed:?}", lines.len() - failed.len(), lines.len());

    // Criterion 1 fails for p = 5 only: the closed form p(p-3) needs p ≡ 3 mod 4,
    // and the measured count 40 is pinned here. Any other failure is a regression.
    let n5 = count_points(&Level::new(5, 1, 0).unwrap(), EnumMode::Brute).unwrap().count;
    assert_eq!(n5, 40);
    for p in [7u64, 11, 19] {
        assert_eq!(count_points(&Level::new(p, 1, 0).unwrap(), EnumMode::Brute).unwrap().count, p * (p - 3));
    }
    assert_eq!(failed, vec![1], "unexpected acceptance failures");
}
