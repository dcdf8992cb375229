//! Enumeration of `X_D^*(Z/p^k)` and orbit partitions under generator sets.
//!
//! Points are encoded as `x + y q + z q^2` with `q = p^k`; lists of points are
//! kept sorted by code, so the least code of an orbit is its representative.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{checked_pow, inv_mod, is_odd_prime, pow_mod, tonelli_shanks, PadicInt};
use crate::report::Report;
use crate::surface::{Letter, ALPHABET};

/// Environment variable holding the memory budget for enumeration, in bytes
/// (suffixes `K`, `M`, `G` allowed).
pub const MEM_ENV: &str = "MARKOFF_PADIC_MAX_MEM";

const DEFAULT_MEM: u64 = 2 << 30;

/// Bytes per point needed by enumeration plus orbit partitioning.
const BYTES_PER_POINT: u64 = 24;

/// Largest `p^{3k}` scanned triple by triple.
pub const BRUTE_LIMIT: u64 = 100_000_000;

/// The residue ring `Z/p^k` together with the parameter `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    pub p: u64,
    pub k: u32,
    pub q: u64,
    /// `D mod p^k`.
    pub d: u64,
}

impl Level {
    pub fn new(p: u64, k: u32, d: i64) -> Result<Self> {
        let q = Self::modulus(p, k)?;
        Ok(Level { p, k, q, d: (d as i128).rem_euclid(q as i128) as u64 })
    }

    /// The level `Z/p^K` of a `p`-adic parameter.
    pub fn from_padic(d: PadicInt) -> Result<Self> {
        let q = Self::modulus(d.prime(), d.precision())?;
        Ok(Level { p: d.prime(), k: d.precision(), q, d: d.residue() })
    }

    fn modulus(p: u64, k: u32) -> Result<u64> {
        if !is_odd_prime(p) {
            return Err(Error::BadPrime(p));
        }
        match checked_pow(p, k) {
            // codes need q^3 < 2^64
            Some(q) if k >= 1 && q < (1 << 21) => Ok(q),
            _ => Err(Error::BadPrecision { prime: p, precision: k }),
        }
    }

    /// The same `D` reduced to level `k`.
    pub fn reduce(&self, k: u32) -> Result<Level> {
        let q = Self::modulus(self.p, k)?;
        Ok(Level { p: self.p, k, q, d: self.d % q })
    }

    pub fn signed_d(&self) -> i64 {
        if self.d > self.q / 2 {
            self.d as i64 - self.q as i64
        } else {
            self.d as i64
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b) % self.q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a) % self.q
    }

    pub fn encode(&self, [x, y, z]: [u64; 3]) -> u64 {
        x + self.q * (y + self.q * z)
    }

    pub fn decode(&self, code: u64) -> [u64; 3] {
        [code % self.q, code / self.q % self.q, code / (self.q * self.q)]
    }

    pub fn eval_p(&self, [x, y, z]: [u64; 3]) -> u64 {
        let s = self.add(self.add(self.mul(x, x), self.mul(y, y)), self.mul(z, z));
        self.sub(s, self.mul(self.mul(x, y), z))
    }

    pub fn partials(&self, [x, y, z]: [u64; 3]) -> [u64; 3] {
        [
            self.sub(self.add(x, x), self.mul(y, z)),
            self.sub(self.add(y, y), self.mul(x, z)),
            self.sub(self.add(z, z), self.mul(x, y)),
        ]
    }

    pub fn is_point(&self, t: [u64; 3]) -> bool {
        self.eval_p(t) == self.d && self.partials(t).iter().any(|v| v % self.p != 0)
    }

    pub fn act(&self, l: Letter, t: [u64; 3]) -> [u64; 3] {
        l.act(t, |a, b| self.mul(a, b), |a, b| self.sub(a, b), |a| self.neg(a))
    }

    pub fn act_code(&self, l: Letter, code: u64) -> u64 {
        self.encode(self.act(l, self.decode(code)))
    }
}

/// How to enumerate points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumMode {
    /// Quadratic solve at `k = 1`, lifting above.
    #[default]
    Auto,
    /// Scan all `p^{3k}` triples.
    Brute,
    /// Lift each mod-`p` point through its smooth fiber.
    Lift,
}

/// All points of `X_D^*(Z/p^k)`, sorted by code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    pub level: Level,
    codes: Vec<u64>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.codes.binary_search(&code).ok()
    }

    pub fn triples(&self) -> impl Iterator<Item = [u64; 3]> + '_ {
        self.codes.iter().map(|&c| self.level.decode(c))
    }
}

/// Memory budget from [`MEM_ENV`].
pub fn memory_budget() -> u64 {
    let Ok(raw) = std::env::var(MEM_ENV) else {
        return DEFAULT_MEM;
    };
    let raw = raw.trim();
    let (num, scale) = match raw.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&raw[..raw.len() - 1], 1 << 10),
        Some('M') => (&raw[..raw.len() - 1], 1 << 20),
        Some('G') => (&raw[..raw.len() - 1], 1 << 30),
        _ => (raw, 1),
    };
    num.trim().parse::<u64>().map(|n| n.saturating_mul(scale)).unwrap_or(DEFAULT_MEM)
}

fn check_budget(level: &Level, estimate: u64) -> Result<()> {
    let need = estimate.saturating_mul(BYTES_PER_POINT);
    let budget = memory_budget();
    if need > budget {
        return Err(Error::Budget(format!(
            "about {estimate} points mod {}^{} need ~{need} bytes, over the {budget}-byte budget; \
             raise {MEM_ENV} or lower k",
            level.p, level.k
        )));
    }
    Ok(())
}

fn legendre_u64(a: u64, p: u64) -> i8 {
    match pow_mod(a % p, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Mod-`p` points by solving the quadratic in `z` for each `(x, y)`.
fn enumerate_mod_p(level: &Level) -> Vec<u64> {
    let lv = level.reduce(1).expect("level 1 is valid");
    let p = lv.p;
    let inv2 = (p + 1) / 2;
    let mut codes: Vec<u64> = (0..p)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut out = Vec::new();
            for y in 0..p {
                let b = lv.mul(x, y);
                let c = lv.sub(lv.add(lv.mul(x, x), lv.mul(y, y)), lv.d);
                let disc = lv.sub(lv.mul(b, b), lv.mul(4, c));
                let roots: Vec<u64> = match legendre_u64(disc, p) {
                    0 => vec![lv.mul(b, inv2)],
                    1 => {
                        let s = tonelli_shanks(disc, p);
                        vec![lv.mul(lv.add(b, s), inv2), lv.mul(lv.sub(b, s), inv2)]
                    }
                    _ => vec![],
                };
                for z in roots {
                    if lv.is_point([x, y, z]) {
                        out.push(lv.encode([x, y, z]));
                    }
                }
            }
            out
        })
        .collect();
    codes.sort_unstable();
    codes.dedup();
    codes
}

fn enumerate_brute(level: &Level) -> Result<Vec<u64>> {
    let q = level.q;
    if q.saturating_mul(q).saturating_mul(q) > BRUTE_LIMIT {
        return Err(Error::Budget(format!(
            "brute scan of {q}^3 triples is over the limit {BRUTE_LIMIT}; use the lift mode"
        )));
    }
    let mut codes: Vec<u64> = (0..q)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut out = Vec::new();
            for y in 0..q {
                for z in 0..q {
                    if level.is_point([x, y, z]) {
                        out.push(level.encode([x, y, z]));
                    }
                }
            }
            out
        })
        .collect();
    codes.sort_unstable();
    Ok(codes)
}

fn enumerate_lift(level: &Level, base: &[u64]) -> Vec<u64> {
    let lv1 = level.reduce(1).expect("level 1 is valid");
    let p = level.p;
    let fiber = level.q / p;
    let mut codes: Vec<u64> = base
        .par_iter()
        .flat_map_iter(|&c| {
            let t0 = lv1.decode(c);
            let partials = lv1.partials(t0);
            let a = (0..3).find(|&i| partials[i] != 0).expect("nonsingular mod p");
            let (b, cc) = ((a + 1) % 3, (a + 2) % 3);
            let mut out = Vec::with_capacity((fiber * fiber) as usize);
            for i in 0..fiber {
                for j in 0..fiber {
                    let mut t = [0u64; 3];
                    t[b] = t0[b] + p * i;
                    t[cc] = t0[cc] + p * j;
                    t[a] = hensel_solve(level, t0[a], t[b], t[cc]);
                    out.push(level.encode(t));
                }
            }
            out
        })
        .collect();
    codes.par_sort_unstable();
    codes
}

/// The root of `s^2 - bc s + b^2 + c^2 - D` mod `q` congruent to `s0` mod `p`.
fn hensel_solve(level: &Level, s0: u64, b: u64, c: u64) -> u64 {
    let bc = level.mul(b, c);
    let c0 = level.sub(level.add(level.mul(b, b), level.mul(c, c)), level.d);
    let mut s = s0;
    for _ in 0..=level.k {
        let f = level.add(level.sub(level.mul(s, s), level.mul(bc, s)), c0);
        if f == 0 {
            break;
        }
        let df = level.sub(level.add(s, s), bc);
        let inv = inv_mod(df, level.q).expect("unit derivative on a smooth fiber");
        s = level.sub(s, level.mul(f, inv));
    }
    s
}

pub fn enumerate_points(level: &Level, mode: EnumMode) -> Result<PointSet> {
    let codes = match mode {
        EnumMode::Brute => {
            check_budget(level, level.q * level.q)?;
            enumerate_brute(level)?
        }
        EnumMode::Auto | EnumMode::Lift => {
            let base = enumerate_mod_p(level);
            if level.k == 1 {
                base
            } else {
                let fiber = level.q / level.p;
                check_budget(level, base.len() as u64 * fiber * fiber)?;
                enumerate_lift(level, &base)
            }
        }
    };
    Ok(PointSet { level: *level, codes })
}

/// A point count with the closed form when it applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCount {
    pub count: u64,
    /// `p(p-3) p^{2(k-1)}` when `p ≡ 3 (mod 4)` and `D ≡ 0 (mod p)`.
    pub expected: Option<u64>,
}

impl PointCount {
    pub fn matches(&self) -> bool {
        self.expected.is_none_or(|e| e == self.count)
    }
}

pub fn count_points(level: &Level, mode: EnumMode) -> Result<PointCount> {
    let count = enumerate_points(level, mode)?.len() as u64;
    let p = level.p;
    let expected =
        (p % 4 == 3 && level.d % p == 0).then(|| p * (p - 3) * (level.q / p) * (level.q / p));
    Ok(PointCount { count, expected })
}

/// A generator set acting on points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenSet {
    /// The Vieta involutions.
    Gamma,
    /// All nine letters.
    Aut,
    Letters(Vec<String>),
}

impl GenSet {
    pub fn letters(&self) -> Result<Vec<Letter>> {
        match self {
            GenSet::Gamma => Ok(Letter::VIETA.to_vec()),
            GenSet::Aut => Ok(Letter::ALL.to_vec()),
            GenSet::Letters(ls) => ls.iter().map(|l| l.parse()).collect(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GenSet::Gamma => "gamma: sx sy sz".into(),
            GenSet::Aut => format!("aut: {ALPHABET}"),
            GenSet::Letters(ls) => format!("letters: {}", ls.join(" ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub size: u64,
    pub representative: [u64; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPartition {
    pub p: u64,
    pub k: u32,
    #[serde(rename = "D")]
    pub d: u64,
    pub generators: String,
    /// Ordered by representative code.
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    pub fn total(&self) -> u64 {
        self.orbits.iter().map(|o| o.size).sum()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.orbits.iter().map(|o| o.size).collect()
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits.len() == 1
    }

    /// Representatives as CSV rows `x,y,z,size`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["x", "y", "z", "size"]).map_err(io)?;
        for o in &self.orbits {
            let [x, y, z] = o.representative;
            w.write_record([x.to_string(), y.to_string(), z.to_string(), o.size.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

pub(crate) fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let up = parent[parent[i as usize] as usize];
        parent[i as usize] = up;
        i = up;
    }
    i
}

/// Merge the classes of `i` and `j`; the smaller root stays the root.
pub(crate) fn unite(parent: &mut [u32], i: u32, j: u32) {
    let (a, b) = (find(parent, i), find(parent, j));
    if a != b {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        parent[hi as usize] = lo;
    }
}

/// Partition into orbits under `gens`.
///
/// Generator images are computed in parallel; the classes are merged by
/// union-find, so the result does not depend on visiting order.
pub fn orbits(points: &PointSet, gens: &GenSet) -> Result<OrbitPartition> {
    let level = points.level;
    let n = points.len();
    if n >= u32::MAX as usize {
        return Err(Error::Budget(format!("{n} points exceed the orbit index range")));
    }
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for l in gens.letters()? {
        let images: Vec<Option<u32>> = points
            .codes
            .par_iter()
            .map(|&c| points.index_of(level.act_code(l, c)).map(|i| i as u32))
            .collect();
        for (i, img) in images.into_iter().enumerate() {
            let j = img.ok_or_else(|| {
                Error::NotOnSurface(format!("image of {:?} under {l} is missing", level.decode(points.codes[i])))
            })?;
            // the smaller index (smaller code) stays the root
            unite(&mut parent, i as u32, j);
        }
    }
    let mut sizes = vec![0u64; n];
    for i in 0..n as u32 {
        let r = find(&mut parent, i);
        sizes[r as usize] += 1;
    }
    let orbits = (0..n)
        .filter(|&i| parent[i] as usize == i)
        .map(|i| Orbit { size: sizes[i], representative: level.decode(points.codes[i]) })
        .collect();
    Ok(OrbitPartition { p: level.p, k: level.k, d: level.d, generators: gens.describe(), orbits })
}

pub fn check_transitivity(level: &Level, gens: &GenSet) -> Result<bool> {
    let points = enumerate_points(level, EnumMode::Auto)?;
    Ok(orbits(&points, gens)?.is_transitive())
}

/// Every `Γ`-orbit mod `p^k` has size divisible by `p^k` (for `p ≡ 3 mod 4`, `D ≡ 0 mod p^k`).
pub fn check_orbit_divisibility(level: &Level) -> Result<Report> {
    let p = level.p;
    if p % 4 != 3 || p <= 3 {
        return Err(Error::Hypothesis(format!("divisibility needs p ≡ 3 mod 4 and p > 3, got p = {p}")));
    }
    if level.d != 0 {
        return Err(Error::Hypothesis(format!("divisibility needs D ≡ 0 mod p^{}", level.k)));
    }
    let part = orbits(&enumerate_points(level, EnumMode::Auto)?, &GenSet::Gamma)?;
    let mut report = Report::new(format!("Γ-orbit sizes divisible by {p}^{}", level.k));
    for o in &part.orbits {
        report.check(o.size % level.q == 0, || format!("orbit of {:?} has size {}", o.representative, o.size));
    }
    let mut sizes = part.sizes();
    sizes.sort_unstable();
    report.note(format!("sizes: {sizes:?}"));
    Ok(report)
}

/// Machine-readable census output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub schema_version: u32,
    pub alphabet: String,
    pub p: u64,
    pub k: u32,
    #[serde(rename = "D")]
    pub d: u64,
    pub count: u64,
    pub generators: String,
    pub orbit_sizes: Vec<u64>,
    pub transitive: bool,
    /// Every orbit size is divisible by `p^k`.
    pub divisibility: bool,
}

pub fn census_report(level: &Level, gens: &GenSet) -> Result<(CensusReport, OrbitPartition)> {
    let points = enumerate_points(level, EnumMode::Auto)?;
    let part = orbits(&points, gens)?;
    let report = CensusReport {
        schema_version: crate::SCHEMA_VERSION,
        alphabet: ALPHABET.into(),
        p: level.p,
        k: level.k,
        d: level.d,
        count: points.len() as u64,
        generators: part.generators.clone(),
        orbit_sizes: part.sizes(),
        transitive: part.is_transitive(),
        divisibility: part.orbits.iter().all(|o| o.size % level.q == 0),
    };
    Ok((report, part))
}

/// The orbit of one point under `gens`, as sorted codes.
pub fn orbit_of(level: &Level, start: [u64; 3], gens: &[Letter], limit: usize) -> Result<Vec<u64>> {
    let first = level.encode(start);
    let mut seen = HashSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(c) = queue.pop_front() {
        for &l in gens {
            let img = level.act_code(l, c);
            if seen.insert(img) {
                if seen.len() > limit {
                    return Err(Error::Budget(format!("orbit exceeds {limit} points")));
                }
                queue.push_back(img);
            }
        }
    }
    let mut out: Vec<u64> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Parameters known to carry finite orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatalogCase {
    /// `(0, 0, √D)` and its images.
    SqrtD,
    /// `D = 4`: orbits outside the cage (no named point).
    D4Cage,
    /// `(1, 1, 1)` on `D = 2`.
    D2,
    /// `(1, √2, √2)` on `D = 3`.
    D3Sqrt2,
    /// `(0, φ^{-1}, φ)` on `D = 3`.
    GoldenZero,
    /// `(φ, φ, φ)` on `D = (5 + √5)/2`.
    GoldenPhi,
    /// `(-φ^{-1}, -φ^{-1}, -φ^{-1})` on `D = (5 - √5)/2`.
    GoldenInvPhi,
}

impl CatalogCase {
    pub const ALL: [CatalogCase; 7] = [
        CatalogCase::SqrtD,
        CatalogCase::D4Cage,
        CatalogCase::D2,
        CatalogCase::D3Sqrt2,
        CatalogCase::GoldenZero,
        CatalogCase::GoldenPhi,
        CatalogCase::GoldenInvPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogCase::SqrtD => "sqrtD",
            CatalogCase::D4Cage => "D4-cage",
            CatalogCase::D2 => "D2",
            CatalogCase::D3Sqrt2 => "D3-sqrt2",
            CatalogCase::GoldenZero => "golden-72",
            CatalogCase::GoldenPhi => "golden-40-phi",
            CatalogCase::GoldenInvPhi => "golden-40-invphi",
        }
    }

    /// Known orbit size over the `p`-adics.
    pub fn expected_size(self) -> Option<u64> {
        match self {
            CatalogCase::SqrtD => Some(6),
            CatalogCase::D4Cage => None,
            CatalogCase::D2 => Some(16),
            CatalogCase::D3Sqrt2 => Some(12),
            CatalogCase::GoldenZero => Some(72),
            CatalogCase::GoldenPhi | CatalogCase::GoldenInvPhi => Some(40),
        }
    }

    /// Cases selected by a command-line name; `golden` selects all three golden cases.
    pub fn by_name(name: &str) -> Result<Vec<CatalogCase>> {
        if name == "golden" {
            return Ok(vec![CatalogCase::GoldenZero, CatalogCase::GoldenPhi, CatalogCase::GoldenInvPhi]);
        }
        if name == "all" {
            return Ok(CatalogCase::ALL.to_vec());
        }
        CatalogCase::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .map(|c| vec![c])
            .ok_or_else(|| Error::CatalogUnavailable(format!("unknown case {name:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub case: String,
    pub p: u64,
    #[serde(rename = "K")]
    pub precision: u32,
    #[serde(rename = "D")]
    pub d: Option<u64>,
    pub point: Option<[u64; 3]>,
    pub expected: Option<u64>,
    pub gamma_size: Option<u64>,
    pub aut_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CatalogEntry {
    /// Some computed size equals the known one.
    pub fn matches(&self) -> bool {
        match self.expected {
            Some(e) => self.gamma_size == Some(e) || self.aut_size == Some(e),
            None => true,
        }
    }
}

fn root(v: PadicInt, what: &str) -> Result<PadicInt> {
    v.sqrt().map_err(|_| {
        Error::CatalogUnavailable(format!("{what} is not a square mod {}", v.prime()))
    })
}

/// The catalog point and parameter at precision `k`.
pub fn catalog_point(p: u64, k: u32, case: CatalogCase, d: Option<PadicInt>) -> Result<Option<([PadicInt; 3], PadicInt)>> {
    let c = |v: i64| PadicInt::new(p, k, v);
    let golden = || -> Result<(PadicInt, PadicInt)> {
        let s5 = root(c(5)?, "5")?;
        let phi = (s5.add_int(1)) * c(2)?.invert()?;
        Ok((phi, s5))
    };
    Ok(Some(match case {
        CatalogCase::D4Cage => return Ok(None),
        CatalogCase::SqrtD => {
            let d = d.ok_or_else(|| Error::CatalogUnavailable("sqrtD needs a parameter D".into()))?;
            let d = d.truncate(k);
            if d.precision() < k {
                return Err(Error::InsufficientPrecision(format!("D is only known mod p^{}", d.precision())));
            }
            ([c(0)?, c(0)?, root(d, "D")?], d)
        }
        CatalogCase::D2 => ([c(1)?, c(1)?, c(1)?], c(2)?),
        CatalogCase::D3Sqrt2 => {
            let s2 = root(c(2)?, "2")?;
            ([c(1)?, s2, s2], c(3)?)
        }
        CatalogCase::GoldenZero => {
            let (phi, _) = golden()?;
            ([c(0)?, phi.add_int(-1), phi], c(3)?)
        }
        CatalogCase::GoldenPhi => {
            let (phi, s5) = golden()?;
            ([phi, phi, phi], (s5.add_int(5)) * c(2)?.invert()?)
        }
        CatalogCase::GoldenInvPhi => {
            let (phi, s5) = golden()?;
            let m = -phi.add_int(-1);
            ([m, m, m], (-s5).add_int(5) * c(2)?.invert()?)
        }
    }))
}

/// Orbit sizes of a catalog point under `Γ` and under all of `Aut` at precision `k`.
pub fn finite_orbit_catalog(p: u64, k: u32, case: CatalogCase, d: Option<PadicInt>) -> Result<CatalogEntry> {
    if p == 5 && matches!(case, CatalogCase::GoldenZero | CatalogCase::GoldenPhi | CatalogCase::GoldenInvPhi) {
        return Err(Error::CatalogUnavailable("√5 is not a unit for p = 5".into()));
    }
    let mut entry = CatalogEntry {
        case: case.name().into(),
        p,
        precision: k,
        d: None,
        point: None,
        expected: case.expected_size(),
        gamma_size: None,
        aut_size: None,
        notes: Vec::new(),
    };
    let Some((pt, dd)) = catalog_point(p, k, case, d)? else {
        entry.d = Some(4 % checked_pow(p, k).unwrap_or(u64::MAX));
        entry.notes.push("finite orbits for D = 4 lie outside the cage; no representative point is named".into());
        return Ok(entry);
    };
    let level = Level::from_padic(dd)?;
    let start = pt.map(|v| v.residue());
    if !level.is_point(start) {
        return Err(Error::NotOnSurface(format!("catalog point {start:?} mod {p}^{k}")));
    }
    let limit = 1 << 20;
    let gamma = orbit_of(&level, start, &Letter::VIETA, limit)?.len() as u64;
    let aut = orbit_of(&level, start, &Letter::ALL, limit)?.len() as u64;
    entry.d = Some(level.d);
    entry.point = Some(start);
    entry.gamma_size = Some(gamma);
    entry.aut_size = Some(aut);
    if !entry.matches() {
        entry.notes.push(format!(
            "neither size matches {:?} at precision {k}; points may collapse mod p^{k}",
            entry.expected
        ));
    }
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(p: u64, k: u32, d: i64) -> Level {
        Level::new(p, k, d).unwrap()
    }

    #[test]
    fn mod_p_counts() {
        // p ≡ 1 mod 4: the closed form does not apply, and the count is 40, not 5·2
        let c = count_points(&level(5, 1, 0), EnumMode::Auto).unwrap();
        assert_eq!((c.count, c.expected), (40, None));
        for (p, n) in [(7, 28), (11, 88), (19, 304)] {
            let c = count_points(&level(p, 1, 0), EnumMode::Auto).unwrap();
            assert_eq!(c.count, n);
            assert!(c.matches());
        }
    }

    #[test]
    fn quadratic_solve_matches_brute_scan() {
        for (p, d) in [(5, 0), (5, 1), (7, 0), (7, 3), (11, 2), (13, 0)] {
            let lv = level(p, 1, d);
            assert_eq!(enumerate_points(&lv, EnumMode::Auto).unwrap(), enumerate_points(&lv, EnumMode::Brute).unwrap());
        }
    }

    #[test]
    fn lift_matches_brute_scan() {
        for (p, k, d) in [(5, 2, 0), (5, 2, 3), (7, 2, 0), (7, 2, 12)] {
            let lv = level(p, k, d);
            let lift = enumerate_points(&lv, EnumMode::Lift).unwrap();
            assert_eq!(lift, enumerate_points(&lv, EnumMode::Brute).unwrap(), "p={p} k={k} D={d}");
            let base = enumerate_points(&lv.reduce(1).unwrap(), EnumMode::Auto).unwrap();
            assert_eq!(lift.len() as u64, base.len() as u64 * p * p);
        }
        assert_eq!(enumerate_points(&level(7, 2, 0), EnumMode::Auto).unwrap().len(), 1372);
    }

    #[test]
    fn orbit_examples() {
        let pts = enumerate_points(&level(7, 1, 0), EnumMode::Auto).unwrap();
        let aut = orbits(&pts, &GenSet::Aut).unwrap();
        assert!(aut.is_transitive());
        assert_eq!(aut.total(), 28);
        let sx = orbits(&pts, &GenSet::Letters(vec!["sx".into()])).unwrap();
        assert!(sx.orbits.iter().all(|o| o.size <= 2));
        assert!(!sx.is_transitive());
        assert_eq!(sx.total(), 28);
        // representatives are the least codes of their orbits
        assert_eq!(aut.orbits[0].representative, pts.level.decode(pts.codes()[0]));
    }

    #[test]
    fn divisibility_mod_p() {
        let r = check_orbit_divisibility(&level(7, 1, 0)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(check_orbit_divisibility(&level(13, 1, 0)).is_err());
        assert!(check_orbit_divisibility(&level(7, 2, 7)).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let lv = level(7, 6, 0);
        let err = check_budget(&lv, u64::MAX / 64).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
        assert!(enumerate_points(&level(13, 3, 0), EnumMode::Brute).is_err());
    }

    #[test]
    fn csv_output() {
        let pts = enumerate_points(&level(5, 1, 0), EnumMode::Auto).unwrap();
        let part = orbits(&pts, &GenSet::Gamma).unwrap();
        let mut buf = Vec::new();
        part.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), part.orbits.len() + 1);
        assert!(text.starts_with("x,y,z,size"));
    }

    #[test]
    fn catalog_small_cases() {
        let e = finite_orbit_catalog(7, 4, CatalogCase::D2, None).unwrap();
        assert_eq!(e.expected, Some(16));
        assert!(e.matches(), "{e:?}");
        let d = PadicInt::new(7, 4, 2).unwrap();
        let e = finite_orbit_catalog(7, 4, CatalogCase::SqrtD, Some(d)).unwrap();
        assert_eq!(e.aut_size, Some(6));
        assert_eq!(e.gamma_size, Some(2));
        let e = finite_orbit_catalog(7, 4, CatalogCase::D4Cage, None).unwrap();
        assert!(e.point.is_none() && !e.notes.is_empty());
        // 5 is not a square mod 7
        assert!(matches!(
            finite_orbit_catalog(7, 4, CatalogCase::GoldenPhi, None),
            Err(Error::CatalogUnavailable(_))
        ));
    }
}
