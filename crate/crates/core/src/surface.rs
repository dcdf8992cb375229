//! Points of `X_D^*` over `Z/p^K` and the automorphisms acting on them.
//!
//! The surface is `P(x, y, z) = x^2 + y^2 + z^2 - xyz = D` with at least one
//! partial derivative a unit. Automorphisms are words in three families of
//! involutive letters: the Vieta involutions `s_x, s_y, s_z`, the double sign
//! changes, and the coordinate transpositions.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::chebyshev::{companion_power, Mat2};
use crate::padic::{newton_solve, PadicInt};

/// Text used for the generator alphabet in reports.
pub const ALPHABET: &str = "sx sy sz ex ey ez pxy pyz pzx";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coord {
    X,
    Y,
    Z,
}

impl Coord {
    pub fn index(self) -> usize {
        self as usize
    }

    /// The next coordinate in the cyclic order `x -> y -> z -> x`.
    pub fn next(self) -> Coord {
        match self {
            Coord::X => Coord::Y,
            Coord::Y => Coord::Z,
            Coord::Z => Coord::X,
        }
    }

    pub fn all() -> [Coord; 3] {
        [Coord::X, Coord::Y, Coord::Z]
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coord::X => "x",
            Coord::Y => "y",
            Coord::Z => "z",
        })
    }
}

/// One generator of `Aut(X_D^*)`. Every letter is an involution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    /// `(x, y, z) -> (yz - x, y, z)`
    Sx,
    /// `(x, y, z) -> (x, xz - y, z)`
    Sy,
    /// `(x, y, z) -> (x, y, xy - z)`
    Sz,
    /// `(x, y, z) -> (x, -y, -z)`
    ExSign,
    /// `(x, y, z) -> (-x, y, -z)`
    EySign,
    /// `(x, y, z) -> (-x, -y, z)`
    EzSign,
    SwapXY,
    SwapYZ,
    SwapZX,
}

impl Letter {
    pub const ALL: [Letter; 9] = [
        Letter::Sx,
        Letter::Sy,
        Letter::Sz,
        Letter::ExSign,
        Letter::EySign,
        Letter::EzSign,
        Letter::SwapXY,
        Letter::SwapYZ,
        Letter::SwapZX,
    ];

    pub const VIETA: [Letter; 3] = [Letter::Sx, Letter::Sy, Letter::Sz];

    pub fn vieta(c: Coord) -> Letter {
        match c {
            Coord::X => Letter::Sx,
            Coord::Y => Letter::Sy,
            Coord::Z => Letter::Sz,
        }
    }

    pub fn is_vieta(self) -> bool {
        matches!(self, Letter::Sx | Letter::Sy | Letter::Sz)
    }

    pub fn name(self) -> &'static str {
        match self {
            Letter::Sx => "sx",
            Letter::Sy => "sy",
            Letter::Sz => "sz",
            Letter::ExSign => "ex",
            Letter::EySign => "ey",
            Letter::EzSign => "ez",
            Letter::SwapXY => "pxy",
            Letter::SwapYZ => "pyz",
            Letter::SwapZX => "pzx",
        }
    }

    /// Action on a coordinate triple over any ring given by closures.
    pub fn act<T: Copy>(self, [x, y, z]: [T; 3], mul: impl Fn(T, T) -> T, sub: impl Fn(T, T) -> T, neg: impl Fn(T) -> T) -> [T; 3] {
        match self {
            Letter::Sx => [sub(mul(y, z), x), y, z],
            Letter::Sy => [x, sub(mul(x, z), y), z],
            Letter::Sz => [x, y, sub(mul(x, y), z)],
            Letter::ExSign => [x, neg(y), neg(z)],
            Letter::EySign => [neg(x), y, neg(z)],
            Letter::EzSign => [neg(x), neg(y), z],
            Letter::SwapXY => [y, x, z],
            Letter::SwapYZ => [x, z, y],
            Letter::SwapZX => [z, y, x],
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Letter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Letter::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::WordParse(format!("unknown letter {s:?}")))
    }
}

/// A word in the generators, read as a composition: the rightmost letter acts first.
///
/// Words are kept freely reduced (adjacent equal letters cancel).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AutWord {
    letters: Vec<Letter>,
}

impl AutWord {
    pub fn identity() -> Self {
        AutWord::default()
    }

    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        AutWord { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True when only Vieta involutions occur, i.e. the word lies in `Γ`.
    pub fn gamma_only(&self) -> bool {
        self.letters.iter().all(|l| l.is_vieta())
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &AutWord) -> AutWord {
        AutWord::new(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> AutWord {
        AutWord::new(self.letters.iter().rev().copied())
    }

    pub fn pow(&self, n: u64) -> AutWord {
        let mut letters = Vec::with_capacity(self.letters.len() * n as usize);
        for _ in 0..n {
            letters.extend_from_slice(&self.letters);
        }
        AutWord::new(letters)
    }

    /// `alpha^{-1} ∘ self ∘ alpha`.
    pub fn conjugate_by(&self, alpha: &AutWord) -> AutWord {
        alpha.inverse().compose(self).compose(alpha)
    }

    /// The pair word `s_a s_b` (with `s_b` acting first).
    pub fn vieta_pair(a: Coord, b: Coord) -> AutWord {
        AutWord::new([Letter::vieta(a), Letter::vieta(b)])
    }

    /// Parse a word; groups may be raised to powers: `"sy (sz sx)^3 sy"`.
    pub fn parse(text: &str) -> Result<AutWord> {
        let mut stack: Vec<Vec<Letter>> = vec![Vec::new()];
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let mut tokens = spaced.split_whitespace().peekable();
        while let Some(tok) = tokens.next() {
            match tok {
                "(" => stack.push(Vec::new()),
                ")" => {
                    let group = stack.pop().expect("stack never empty");
                    let outer = stack
                        .last_mut()
                        .ok_or_else(|| Error::WordParse(format!("unbalanced ')' in {text:?}")))?;
                    let mut reps = 1usize;
                    if let Some(next) = tokens.peek() {
                        if let Some(exp) = next.strip_prefix('^') {
                            reps = exp
                                .parse()
                                .map_err(|_| Error::WordParse(format!("bad exponent {next:?}")))?;
                            tokens.next();
                        }
                    }
                    for _ in 0..reps {
                        outer.extend_from_slice(&group);
                    }
                    if stack.is_empty() {
                        return Err(Error::WordParse(format!("unbalanced ')' in {text:?}")));
                    }
                }
                "id" | "1" => {}
                letter => stack.last_mut().expect("nonempty").push(letter.parse()?),
            }
        }
        if stack.len() != 1 {
            return Err(Error::WordParse(format!("unbalanced '(' in {text:?}")));
        }
        Ok(AutWord::new(stack.pop().expect("one frame")))
    }

    pub fn apply(&self, pt: &SurfacePoint) -> SurfacePoint {
        let [x, y, z] = self.apply_coords(pt.coords());
        SurfacePoint { x, y, z, d: pt.d }
    }

    /// Apply, refusing letters outside `Γ`.
    pub fn apply_gamma(&self, pt: &SurfacePoint) -> Result<SurfacePoint> {
        if let Some(l) = self.letters.iter().find(|l| !l.is_vieta()) {
            return Err(Error::NotInGamma(l.to_string()));
        }
        Ok(self.apply(pt))
    }

    /// Apply to a bare coordinate triple (no surface check).
    ///
    /// Long alternating runs of two Vieta letters are evaluated as powers of
    /// the companion matrix.
    pub fn apply_coords(&self, c: [PadicInt; 3]) -> [PadicInt; 3] {
        let acting: Vec<Letter> = self.letters.iter().rev().copied().collect();
        let mut c = c;
        let mut i = 0;
        while i < acting.len() {
            let run = alternating_run(&acting[i..]);
            if run >= 4 && acting[i].is_vieta() && acting[i + 1].is_vieta() {
                c = apply_vieta_run(c, acting[i], acting[i + 1], run as u64);
                i += run;
            } else {
                c = act_padic(acting[i], c);
                i += 1;
            }
        }
        c
    }

    /// Letter-by-letter application.
    pub fn apply_coords_naive(&self, c: [PadicInt; 3]) -> [PadicInt; 3] {
        self.letters.iter().rev().fold(c, |q, &l| act_padic(l, q))
    }
}

fn act_padic(l: Letter, c: [PadicInt; 3]) -> [PadicInt; 3] {
    l.act(c, |a, b| a * b, |a, b| a - b, |a| -a)
}

/// Length of the longest prefix of the form `a b a b ...` with `a != b`.
fn alternating_run(ls: &[Letter]) -> usize {
    if ls.len() < 2 || ls[0] == ls[1] {
        return ls.len().min(1);
    }
    let mut n = 2;
    while n < ls.len() && ls[n] == ls[n - 2] {
        n += 1;
    }
    n
}

/// `len` letters alternating `first, second, first, ...` in acting order.
fn apply_vieta_run(c: [PadicInt; 3], first: Letter, second: Letter, len: u64) -> [PadicInt; 3] {
    let idx = |l: Letter| match l {
        Letter::Sx => 0,
        Letter::Sy => 1,
        _ => 2,
    };
    let (f, s) = (idx(first), idx(second));
    let t = 3 - f - s;
    let x = c[t];
    let mut out = c;
    // `s_second s_first` multiplies (c_second, c_first) by C(x)^2 when the
    // pair is in cyclic order; otherwise it is the inverse of that move.
    if f == (s + 1) % 3 {
        let m = companion_power(x, 2 * (len / 2));
        [out[s], out[f]] = m.apply([c[s], c[f]]);
    } else {
        let inv = Mat2::new(x.with_value(0), x.with_value(1), x.with_value(-1), x);
        let m = inv.pow(2 * (len / 2));
        [out[f], out[s]] = m.apply([c[f], c[s]]);
    }
    if len % 2 == 1 {
        out = act_padic(first, out);
    }
    out
}

impl fmt::Display for AutWord {
    /// Alternating runs of length at least 4 are written as `(a b)^n`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("id");
        }
        let ls = &self.letters;
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < ls.len() {
            let run = alternating_run(&ls[i..]);
            if run >= 4 {
                parts.push(format!("({} {})^{}", ls[i], ls[i + 1], run / 2));
                if run % 2 == 1 {
                    parts.push(ls[i].to_string());
                }
                i += run;
            } else {
                parts.push(ls[i].to_string());
                i += 1;
            }
        }
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for AutWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AutWord::parse(s)
    }
}

/// `P(x, y, z) = x^2 + y^2 + z^2 - xyz`.
pub fn eval_p(x: PadicInt, y: PadicInt, z: PadicInt) -> PadicInt {
    x * x + y * y + z * z - x * y * z
}

/// `(∂_x P, ∂_y P, ∂_z P) = (2x - yz, 2y - xz, 2z - xy)`.
pub fn partials([x, y, z]: [PadicInt; 3]) -> [PadicInt; 3] {
    [x.mul_int(2) - y * z, y.mul_int(2) - x * z, z.mul_int(2) - x * y]
}

/// Equation and nonsingularity hold at the working precision.
pub fn is_point(c: [PadicInt; 3], d: PadicInt) -> bool {
    let [x, y, z] = c;
    let same = c.iter().all(|v| v.prime() == d.prime());
    same && (eval_p(x, y, z) - d).is_zero() && partials(c).iter().any(|v| v.is_unit())
}

/// A point of `X_D^*(Z/p^K)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: PadicInt,
    pub y: PadicInt,
    pub z: PadicInt,
    pub d: PadicInt,
}

impl fmt::Debug for SurfacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}) on D={} mod {}^{}",
            self.x.signed_residue(),
            self.y.signed_residue(),
            self.z.signed_residue(),
            self.d.signed_residue(),
            self.prime(),
            self.precision()
        )
    }
}

impl SurfacePoint {
    pub fn new(x: PadicInt, y: PadicInt, z: PadicInt, d: PadicInt) -> Result<Self> {
        let k = [x, y, z, d].iter().map(|v| v.precision()).min().expect("4 values");
        let (x, y, z, d) = (x.truncate(k), y.truncate(k), z.truncate(k), d.truncate(k));
        for v in [y, z, d] {
            if v.prime() != x.prime() {
                return Err(Error::PrimeMismatch(x.prime(), v.prime()));
            }
        }
        if !(eval_p(x, y, z) - d).is_zero() {
            return Err(Error::NotOnSurface(format!(
                "P({}, {}, {}) != {} mod {}^{k}",
                x, y, z, d, x.prime()
            )));
        }
        if !partials([x, y, z]).iter().any(|v| v.is_unit()) {
            return Err(Error::NotOnSurface(format!("({x}, {y}, {z}) is singular mod p")));
        }
        Ok(SurfacePoint { x, y, z, d })
    }

    pub fn from_ints(prime: u64, precision: u32, [x, y, z]: [i64; 3], d: i64) -> Result<Self> {
        let c = |v| PadicInt::new(prime, precision, v);
        SurfacePoint::new(c(x)?, c(y)?, c(z)?, c(d)?)
    }

    pub fn from_coords(c: [PadicInt; 3], d: PadicInt) -> Result<Self> {
        SurfacePoint::new(c[0], c[1], c[2], d)
    }

    pub fn coords(&self) -> [PadicInt; 3] {
        [self.x, self.y, self.z]
    }

    pub fn coord(&self, c: Coord) -> PadicInt {
        self.coords()[c.index()]
    }

    pub fn prime(&self) -> u64 {
        self.x.prime()
    }

    pub fn precision(&self) -> u32 {
        self.x.precision()
    }

    pub fn partials(&self) -> [PadicInt; 3] {
        partials(self.coords())
    }

    pub fn truncate(&self, k: u32) -> SurfacePoint {
        SurfacePoint { x: self.x.truncate(k), y: self.y.truncate(k), z: self.z.truncate(k), d: self.d.truncate(k) }
    }

    /// Residues of the coordinates.
    pub fn residues(&self) -> [u64; 3] {
        [self.x.residue(), self.y.residue(), self.z.residue()]
    }
}

/// Lift a point given mod `p` (or mod any `p^l`) to a point over `D`'s precision.
///
/// The coordinate with the first unit partial is re-solved by Newton's method;
/// the other two keep their residues.
pub fn lift_point(d: PadicInt, residues: [u64; 3]) -> Result<SurfacePoint> {
    let c = residues.map(|r| d.with_residue(r));
    let partials = partials(c);
    let a = (0..3)
        .find(|&i| partials[i].is_unit())
        .ok_or_else(|| Error::NotOnSurface(format!("{residues:?} is singular mod p")))?;
    let (b, cc) = (c[(a + 1) % 3], c[(a + 2) % 3]);
    let coeffs = [b * b + cc * cc - d, -(b * cc), d.with_value(1)];
    let mut out = c;
    out[a] = newton_solve(&coeffs, c[a])?;
    SurfacePoint::from_coords(out, d)
}

/// Image of a point under one generator; the equation is preserved exactly.
pub fn apply_generator(g: Letter, pt: &SurfacePoint) -> SurfacePoint {
    let [x, y, z] = g.act(pt.coords(), |a, b| a * b, |a, b| a - b, |a| -a);
    SurfacePoint { x, y, z, d: pt.d }
}

pub fn apply_word(w: &AutWord, pt: &SurfacePoint) -> SurfacePoint {
    w.apply(pt)
}

/// The ℓ∞ distance class `max |·|_p` of the coordinate differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistClass {
    /// Exactly `p^{-e}` with `e < K`.
    Exact(u32),
    /// At most `p^{-K}`: indistinguishable at working precision.
    Below(u32),
}

impl DistClass {
    /// `e` in `p^{-e}` (a lower bound for [`DistClass::Below`]).
    pub fn exponent(self) -> u32 {
        match self {
            DistClass::Exact(e) | DistClass::Below(e) => e,
        }
    }
}

impl Ord for DistClass {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger exponent = smaller distance
        other
            .exponent()
            .cmp(&self.exponent())
            .then_with(|| matches!(self, DistClass::Exact(_)).cmp(&matches!(other, DistClass::Exact(_))))
    }
}

impl PartialOrd for DistClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DistClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistClass::Exact(0) => f.write_str("1"),
            DistClass::Exact(e) => write!(f, "p^-{e}"),
            DistClass::Below(k) => write!(f, "<=p^-{k}"),
        }
    }
}

pub fn dist_coords(a: [PadicInt; 3], b: [PadicInt; 3]) -> DistClass {
    let k = a.iter().chain(b.iter()).map(|v| v.precision()).min().expect("6 values");
    let e = (0..3)
        .map(|i| (a[i] - b[i]).truncate(k).valuation().lower_bound())
        .min()
        .expect("3 coords");
    if e >= k {
        DistClass::Below(k)
    } else {
        DistClass::Exact(e)
    }
}

pub fn dist(a: &SurfacePoint, b: &SurfacePoint) -> DistClass {
    dist_coords(a.coords(), b.coords())
}

/// Coordinate residues modulo `p^level`.
pub fn reduce(pt: &SurfacePoint, level: u32) -> Result<[u64; 3]> {
    if level == 0 || level > pt.precision() {
        return Err(Error::ReductionLevel(level));
    }
    Ok(pt.coords().map(|v| v.truncate(level).residue()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(p: u64, k: u32, c: [i64; 3], d: i64) -> SurfacePoint {
        SurfacePoint::from_ints(p, k, c, d).unwrap()
    }

    fn pa(p: u64, k: u32, v: i64) -> PadicInt {
        PadicInt::new(p, k, v).unwrap()
    }

    #[test]
    fn eval_p_examples() {
        let c = |v| pa(101, 2, v);
        assert_eq!(eval_p(c(3), c(3), c(3)).residue(), 0);
        assert_eq!(eval_p(c(1), c(1), c(1)).residue(), 2);
        assert_eq!(eval_p(c(0), c(0), c(0)).residue(), 0);
    }

    #[test]
    fn is_point_examples() {
        let c = |v| pa(7, 3, v);
        assert!(is_point([c(3), c(3), c(3)], c(0)));
        assert!(!is_point([c(0), c(0), c(0)], c(0)));
        assert!(!is_point([c(1), c(1), c(1)], c(0)));
        assert!(SurfacePoint::from_ints(7, 3, [0, 0, 0], 0).is_err());
    }

    #[test]
    fn generator_examples() {
        let a = pt(101, 2, [3, 3, 3], 0);
        assert_eq!(apply_generator(Letter::Sx, &a).residues(), [6, 3, 3]);
        let c = |v| pa(101, 2, v);
        let b = Letter::ExSign.act([c(1), c(2), c(3)], |a, b| a * b, |a, b| a - b, |a| -a);
        assert_eq!(b.map(|v| v.signed_residue()), [1, -2, -3]);
        for l in Letter::ALL {
            assert_eq!(apply_generator(l, &apply_generator(l, &a)), a, "{l}");
        }
    }

    #[test]
    fn word_semantics_and_reduction() {
        let a = pt(101, 3, [3, 5, 7], 9 + 25 + 49 - 105);
        assert_eq!(AutWord::identity().apply(&a), a);
        // s_y s_z acts on (y, z) as C(x)^2
        let w = AutWord::parse("sy sz").unwrap();
        let img = w.apply(&a);
        let c2 = crate::chebyshev::companion_power(a.x, 2).apply([a.y, a.z]);
        assert_eq!([img.y, img.z], c2);
        assert_eq!(AutWord::parse("sx sx sy").unwrap(), AutWord::parse("sy").unwrap());
        assert!(AutWord::parse("sx sx").unwrap().is_empty());
    }

    #[test]
    fn fast_runs_match_letterwise() {
        let a = pt(101, 3, [3, 5, 7], 9 + 25 + 49 - 105);
        for text in [
            "(sz sx)^40",
            "(sx sz)^41 sx",
            "sy (sy sz)^7 ex (sz sy)^9 sz pxy (sx sy)^3",
            "(sx sy)^2 sx",
        ] {
            let w = AutWord::parse(text).unwrap();
            assert_eq!(w.apply_coords(a.coords()), w.apply_coords_naive(a.coords()), "{text}");
        }
    }

    #[test]
    fn parse_and_display() {
        let w = AutWord::parse("sy (sz sx)^3 ex").unwrap();
        assert_eq!(w.to_string(), "sy (sz sx)^3 ex");
        assert_eq!(w.letters().len(), 8);
        assert_eq!(AutWord::parse(&w.to_string()).unwrap(), w);
        assert!(!w.gamma_only());
        assert!(AutWord::parse("(sz sx").is_err());
        assert!(AutWord::parse("sz sx)").is_err());
        assert!(AutWord::parse("sq").is_err());
        assert_eq!(AutWord::parse("id").unwrap(), AutWord::identity());
        let a = pt(7, 2, [3, 3, 3], 0);
        assert!(matches!(w.apply_gamma(&a), Err(Error::NotInGamma(_))));
    }

    #[test]
    fn dist_examples() {
        let a = pt(7, 3, [3, 3, 3], 0);
        assert_eq!(dist(&a, &a), DistClass::Below(3));
        let c = |v| pa(7, 3, v);
        assert_eq!(dist_coords([c(1), c(0), c(0)], [c(8), c(0), c(0)]), DistClass::Exact(1));
        assert!(DistClass::Exact(0) > DistClass::Exact(1));
        assert!(DistClass::Exact(2) > DistClass::Below(3));
    }

    #[test]
    fn reduce_examples() {
        let a = pt(7, 2, [3, 3, 3], 0);
        assert_eq!(reduce(&a, 2).unwrap(), a.residues());
        let c = |v| pa(7, 2, v);
        let b = SurfacePoint { x: c(50), y: c(0), z: c(0), d: c(0) };
        assert_eq!(reduce(&b, 1).unwrap()[0], 1);
        assert!(reduce(&a, 3).is_err());
        assert!(reduce(&a, 0).is_err());
    }
}
