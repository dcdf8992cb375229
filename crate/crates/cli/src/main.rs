use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regex::Regex;
use serde::Serialize;
use serde_json::{json, Value};

use markoff_padic::census::{
    census_report, check_orbit_divisibility, count_points, enumerate_points, finite_orbit_catalog, orbits, CatalogCase,
    EnumMode, GenSet, Level,
};
use markoff_padic::certify::{
    certification_chart, certification_words, certify_padic, check_xd, check_xd_catalog, replay_certificate,
    CertifyOptions, MinimalityCertificate, Route, DEFAULT_WORD_BUDGET,
};
use markoff_padic::chebyshev::{verify_chebyshev_suite, verify_companion_estimates, verify_power_sum_identity};
use markoff_padic::flow::{flow_suite_precision, sample_pairs, verify_flow_suite, MapClass, Pair, PointMap};
use markoff_padic::polydisk::{chart_samples, verify_gp, verify_stabilizer_expansions, verify_xi_expansion, GpConstant, StabilizerLemma};
use markoff_padic::surface::ALPHABET;
use markoff_padic::{Error, PadicInt, Report, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "markoff-padic", version, about = "Finite-precision p-adic dynamics on x^2 + y^2 + z^2 = xyz + D")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long)]
    p: u64,
    /// Precision K (points are taken mod p^K).
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Integer, or a form like `3+sqrt(2)` / `(5-sqrt(5))/2` resolved in Z_p.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    d: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gens {
    Gamma,
    Aut,
}

impl From<Gens> for GenSet {
    fn from(g: Gens) -> GenSet {
        match g {
            Gens::Gamma => GenSet::Gamma,
            Gens::Aut => GenSet::Aut,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Brute,
    Lift,
}

#[derive(Subcommand)]
enum Command {
    /// Count points of X_D^*(Z/p^k) and partition them into orbits.
    Census {
        #[command(flatten)]
        params: Params,
        #[arg(long, value_enum, default_value = "aut")]
        gens: Gens,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
    },
    /// Orbit partition, optionally exported as CSV; checks divisibility when it applies.
    Orbits {
        #[command(flatten)]
        params: Params,
        #[arg(long, value_enum, default_value = "gamma")]
        gens: Gens,
        /// Explicit letters, comma separated (overrides --gens).
        #[arg(long, value_delimiter = ',')]
        letters: Option<Vec<String>>,
        /// Write one representative per orbit with its size.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Chebyshev identities and companion-power estimates.
    Identities {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 200)]
        max_n: i64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Flow interpolation checks on a polynomial map and on a chart map.
    FlowCheck {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Expansion congruences on the certification chart.
    Expansions {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Certify a minimal level-1 polydisk.
    Certify {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
        budget_words: usize,
        /// Use the companion order instead of (p^2-1)/4.
        #[arg(long)]
        optimized_exponent: bool,
    },
    /// Re-evaluate a certificate file and compare.
    Replay {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Scan for witnesses of condition XD.
    XdCheck {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
        budget_words: usize,
        /// Restrict the scan to the orbit of a catalog point.
        #[arg(long)]
        case: Option<String>,
    },
    /// Finite-orbit catalog sizes at precision K.
    Catalog {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value = "all")]
        case: String,
        /// Parameter for the sqrtD case.
        #[arg(long, allow_hyphen_values = true)]
        d: Option<String>,
    },
}

/// A failure the user caused (bad input) versus one the mathematics produced.
enum Failure {
    Usage(String),
    Math(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadPrime(_)
            | Error::BadPrecision { .. }
            | Error::WordParse(_)
            | Error::Hypothesis(_)
            | Error::Io(_)
            | Error::CatalogUnavailable(_) => Failure::Usage(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

type Outcome = Result<(bool, Value), Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Parse `D` as an integer or `a ± sqrt(c)` with an optional `/ e` denominator.
fn parse_d(text: &str, p: u64, k: u32) -> Result<PadicInt, Failure> {
    let t = text.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Ok(PadicInt::new(p, k, v)?);
    }
    let re = Regex::new(r"^\(?\s*(-?\d+)\s*([+-])\s*sqrt\(\s*(-?\d+)\s*\)\s*\)?\s*(?:/\s*(\d+))?$").expect("valid regex");
    let caps = re
        .captures(t)
        .ok_or_else(|| Failure::Usage(format!("cannot parse D = {text:?}; use an integer or a+sqrt(c)[/e]")))?;
    let num = |i: usize| caps[i].parse::<i64>().map_err(|e| Failure::Usage(e.to_string()));
    let a = PadicInt::new(p, k, num(1)?)?;
    let root = PadicInt::new(p, k, num(3)?)?.sqrt()?;
    let mut d = if &caps[2] == "+" { a + root } else { a - root };
    if let Some(e) = caps.get(4) {
        let e: i64 = e.as_str().parse().map_err(|e: std::num::ParseIntError| Failure::Usage(e.to_string()))?;
        d = d * PadicInt::new(p, k, e)?.invert()?;
    }
    Ok(d)
}

fn envelope(command: &str, passed: bool, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "alphabet": ALPHABET,
        "command": command,
        "passed": passed,
        "result": result,
    })
}

fn reports_value(reports: &[Report]) -> (bool, Value) {
    (reports.iter().all(Report::passed), to_value(&reports))
}

fn census(params: &Params, gens: Gens, mode: Mode) -> Outcome {
    let d = parse_d(&params.d, params.p, params.k)?;
    let level = Level::from_padic(d)?;
    let mode = match mode {
        Mode::Auto => EnumMode::Auto,
        Mode::Brute => EnumMode::Brute,
        Mode::Lift => EnumMode::Lift,
    };
    let count = count_points(&level, mode)?;
    let (report, _) = census_report(&level, &gens.into())?;
    Ok((count.matches(), json!({ "census": report, "closed_form": count })))
}

fn orbit_listing(params: &Params, gens: Gens, letters: Option<Vec<String>>, csv: Option<&Path>) -> Outcome {
    let d = parse_d(&params.d, params.p, params.k)?;
    let level = Level::from_padic(d)?;
    let gens = match letters {
        Some(ls) => GenSet::Letters(ls),
        None => gens.into(),
    };
    let points = enumerate_points(&level, EnumMode::Auto)?;
    let part = orbits(&points, &gens)?;
    if let Some(path) = csv {
        let file = fs::File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        part.write_csv(file)?;
    }
    let divisibility = check_orbit_divisibility(&level).ok();
    let passed = divisibility.as_ref().is_none_or(Report::passed);
    Ok((
        passed,
        json!({
            "p": level.p,
            "K": level.k,
            "D": level.d,
            "generators": part.generators,
            "points": part.total(),
            "orbit_count": part.orbits.len(),
            "orbit_sizes": part.sizes(),
            "transitive": part.is_transitive(),
            "divisibility": divisibility,
        }),
    ))
}

fn identities(p: u64, k: u32, max_n: i64, seed: u64) -> Outcome {
    let samples: Vec<i64> = (0..p as i64).chain([p as i64 + 3, -5]).collect();
    let mut reports = vec![verify_chebyshev_suite(p, k, max_n, &samples)?, verify_power_sum_identity(p, k, &samples)?];
    if p > 3 && k >= 3 {
        let us: Vec<PadicInt> = sample_pairs(p, k - 1, 50, true, seed)?.into_iter().flatten().collect();
        let us: Vec<PadicInt> = us.into_iter().step_by(2).collect();
        let generic = (0..p).filter(|&r| r != 2 && r != p - 2);
        let mut bases: Vec<u64> = generic.cycle().take(10).enumerate().map(|(i, r)| r + p * i as u64).collect();
        bases.extend((0..5).flat_map(|j| [2 + p * j, p - 2 + p * j]));
        for b in bases {
            reports.push(verify_companion_estimates(PadicInt::from_residue(p, k, b)?, &us)?);
        }
    }
    Ok(reports_value(&reports))
}

/// `(u, v) -> (u + p v^2 + p, v + p u)`.
fn polynomial_map(p: u64) -> Result<PointMap, Error> {
    PointMap::new(p, 3, MapClass::IdentityModP, move |w: Pair| {
        let pp = w[0].with_value(p as i64);
        Ok([w[0] + pp * w[1] * w[1] + pp, w[1] + pp * w[0]])
    })
}

fn flow_check(params: &Params, seed: u64) -> Outcome {
    let p = params.p;
    let mut reports = Vec::new();
    let k_poly = params.k.max(6);
    reports.push(verify_flow_suite(&polynomial_map(p)?, k_poly, seed)?);
    let d = parse_d(&params.d, p, params.k)?;
    let mut notes = Vec::new();
    match certification_chart(d) {
        Ok((route, chart)) => {
            let (_, maps) = certification_words(route, &chart, CertifyOptions::new(DEFAULT_WORD_BUDGET))?;
            let k_in = chart.precision() - 1;
            if flow_suite_precision(p, k_in).is_some() {
                let f = chart.conjugated_map(&maps[0], MapClass::IdentityModP)?;
                let mut r = verify_flow_suite(&f, k_in, seed)?;
                r.name = format!("{} on ({})", r.name, maps[0]);
                reports.push(r);
            } else {
                notes.push(format!("chart maps at K={} are too coarse for the flow suite", params.k));
            }
        }
        Err(e) => notes.push(format!("no certification chart: {e}")),
    }
    let (passed, value) = reports_value(&reports);
    Ok((passed, json!({ "reports": value, "notes": notes })))
}

fn expansions(params: &Params, seed: u64) -> Outcome {
    let d = parse_d(&params.d, params.p, params.k)?;
    let (route, chart) = certification_chart(d)?;
    let samples = chart_samples(&chart, seed)?;
    let mut reports = vec![verify_xi_expansion(&chart, &samples)?];
    let mut skipped = Vec::new();
    for lemma in [StabilizerLemma::ParabF, StabilizerLemma::GAndH, StabilizerLemma::NonparaF] {
        match verify_stabilizer_expansions(&chart, lemma, &samples) {
            Ok(r) => reports.push(r),
            Err(Error::Hypothesis(why)) => skipped.push(format!("{lemma:?}: {why}")),
            Err(e) => return Err(e.into()),
        }
    }
    if route != Route::P5Exceptional && chart.precision() >= 3 {
        reports.push(verify_gp(&chart, &samples, GpConstant::FirstFree)?);
    }
    let (passed, value) = reports_value(&reports);
    Ok((
        passed,
        json!({
            "route": route,
            "chart_base": chart.base().residues(),
            "solved": chart.solved().to_string(),
            "reports": value,
            "skipped": skipped,
        }),
    ))
}

fn certify(params: &Params, budget: usize, optimized: bool) -> Outcome {
    let d = parse_d(&params.d, params.p, params.k)?;
    let cert = certify_padic(d, CertifyOptions { budget_words: budget, optimized_exponent: optimized })?;
    Ok((cert.verdict, to_value(&cert)))
}

fn replay(path: &Path) -> Outcome {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    // Accept either a bare certificate or a report envelope around one.
    let inner = value.get("result").cloned().unwrap_or(value);
    let cert: MinimalityCertificate = serde_json::from_value(inner).map_err(|e| Failure::Usage(e.to_string()))?;
    let again = replay_certificate(&cert)?;
    let identical = again == cert;
    Ok((identical && cert.verdict, json!({ "identical": identical, "replayed": again })))
}

fn xd(params: &Params, budget: usize, case: Option<&str>) -> Outcome {
    let d = parse_d(&params.d, params.p, params.k)?;
    let report = match case {
        None => check_xd(d, budget)?,
        Some(name) => {
            let cases = CatalogCase::by_name(name)?;
            let [case] = cases.as_slice() else {
                return Err(Failure::Usage(format!("--case must name one catalog case, got {name:?}")));
            };
            check_xd_catalog(params.p, params.k, *case, Some(d), budget)?
        }
    };
    Ok((true, to_value(&report)))
}

fn catalog(p: u64, k: u32, case: &str, d: Option<&str>) -> Outcome {
    let d = d.map(|t| parse_d(t, p, k)).transpose()?;
    let mut entries = Vec::new();
    let mut unavailable = Vec::new();
    for c in CatalogCase::by_name(case)? {
        match finite_orbit_catalog(p, k, c, d) {
            Ok(e) => entries.push(e),
            Err(e @ Error::CatalogUnavailable(_)) => unavailable.push(json!({ "case": c.name(), "reason": e.to_string() })),
            Err(e) => return Err(e.into()),
        }
    }
    let passed = entries.iter().all(|e| e.matches());
    Ok((passed, json!({ "entries": entries, "unavailable": unavailable })))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Census { params, gens, mode } => census(params, *gens, *mode),
        Command::Orbits { params, gens, letters, csv } => orbit_listing(params, *gens, letters.clone(), csv.as_deref()),
        Command::Identities { p, k, max_n, seed } => identities(*p, *k, *max_n, *seed),
        Command::FlowCheck { params, seed } => flow_check(params, *seed),
        Command::Expansions { params, seed } => expansions(params, *seed),
        Command::Certify { params, budget_words, optimized_exponent } => certify(params, *budget_words, *optimized_exponent),
        Command::Replay { cert } => replay(cert),
        Command::XdCheck { params, budget_words, case } => xd(params, *budget_words, case.as_deref()),
        Command::Catalog { p, k, case, d } => catalog(*p, *k, case, d.as_deref()),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Census { .. } => "census",
        Command::Orbits { .. } => "orbits",
        Command::Identities { .. } => "identities",
        Command::FlowCheck { .. } => "flow-check",
        Command::Expansions { .. } => "expansions",
        Command::Certify { .. } => "certify",
        Command::Replay { .. } => "replay",
        Command::XdCheck { .. } => "xd-check",
        Command::Catalog { .. } => "catalog",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool is set once");
    }
    let (passed, result) = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Math(msg)) => {
            eprintln!("failed: {msg}");
            return ExitCode::from(1);
        }
    };
    let mut text = serde_json::to_string_pretty(&envelope(command_name(&cli.command), passed, result)).expect("json");
    text.push('\n');
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
