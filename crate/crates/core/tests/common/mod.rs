//! Naive reference implementations used as oracles by the integration tests.
//! Everything here works on plain integers and shares no code with the library.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

pub fn modp(a: i128, q: i128) -> i128 {
    a.rem_euclid(q)
}

pub fn on_surface([x, y, z]: [i128; 3], d: i128, q: i128) -> bool {
    modp(x * x + y * y + z * z - x * y * z - d, q) == 0
}

pub fn smooth_mod_p([x, y, z]: [i128; 3], p: i128) -> bool {
    [2 * x - y * z, 2 * y - x * z, 2 * z - x * y].iter().any(|v| modp(*v, p) != 0)
}

/// `|X_D^*(Z/q)|` by scanning every triple.
pub fn brute_count(p: i128, k: u32, d: i128) -> usize {
    let q = p.pow(k);
    let mut n = 0;
    for x in 0..q {
        for y in 0..q {
            for z in 0..q {
                if on_surface([x, y, z], d, q) && smooth_mod_p([x, y, z], p) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Letter action written out from the formulas.
pub fn act(name: &str, [x, y, z]: [i128; 3], q: i128) -> [i128; 3] {
    let t = match name {
        "sx" => [y * z - x, y, z],
        "sy" => [x, x * z - y, z],
        "sz" => [x, y, x * y - z],
        "ex" => [x, -y, -z],
        "ey" => [-x, y, -z],
        "ez" => [-x, -y, z],
        "pxy" => [y, x, z],
        "pyz" => [x, z, y],
        "pzx" => [z, y, x],
        _ => panic!("unknown letter {name}"),
    };
    t.map(|v| modp(v, q))
}

pub const GAMMA: [&str; 3] = ["sx", "sy", "sz"];
pub const AUT: [&str; 9] = ["sx", "sy", "sz", "ex", "ey", "ez", "pxy", "pyz", "pzx"];

/// BFS orbit of one triple.
pub fn orbit(start: [i128; 3], gens: &[&str], q: i128) -> HashSet<[i128; 3]> {
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for g in gens {
            let u = act(g, t, q);
            if seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    seen
}

/// All smooth points mod `p^k`, found by lifting each mod-`p` point digit by digit.
pub fn points(p: i128, k: u32, d: i128) -> Vec<[i128; 3]> {
    let mut cur: Vec<[i128; 3]> = Vec::new();
    for x in 0..p {
        for y in 0..p {
            for z in 0..p {
                if on_surface([x, y, z], d, p) && smooth_mod_p([x, y, z], p) {
                    cur.push([x, y, z]);
                }
            }
        }
    }
    let mut q = p;
    for _ in 1..k {
        let next_q = q * p;
        let mut next = Vec::new();
        for t in &cur {
            for a in 0..p {
                for b in 0..p {
                    for c in 0..p {
                        let u = [t[0] + a * q, t[1] + b * q, t[2] + c * q];
                        if on_surface(u, d, next_q) {
                            next.push(u);
                        }
                    }
                }
            }
        }
        cur = next;
        q = next_q;
    }
    cur.sort();
    cur
}

/// Orbit sizes of all points mod `p^k`, sorted.
pub fn orbit_sizes(p: i128, k: u32, d: i128, gens: &[&str]) -> Vec<usize> {
    let q = p.pow(k);
    let pts = points(p, k, d);
    let mut done: HashSet<[i128; 3]> = HashSet::new();
    let mut sizes = Vec::new();
    for t in pts {
        if done.contains(&t) {
            continue;
        }
        let o = orbit(t, gens, q);
        sizes.push(o.len());
        done.extend(o);
    }
    sizes.sort();
    sizes
}

/// Chebyshev `U_n(x)` mod `q` by the recurrence on integers.
pub fn cheb_u(n: i64, x: i128, q: i128) -> i128 {
    let (mut a, mut b) = (0i128, 1i128); // U_{-1}, U_0
    if n < 0 {
        return modp(-cheb_u(-n - 2, x, q), q);
    }
    for _ in 0..n {
        let c = modp(x * b - a, q);
        a = b;
        b = c;
    }
    b
}

/// Smallest power of `p` dividing every coordinate difference, capped at `k`.
pub fn dist_exponent(a: [i128; 3], b: [i128; 3], p: i128, k: u32) -> u32 {
    let mut e = 0;
    let mut q = p;
    while e < k && (0..3).all(|i| modp(a[i] - b[i], q) == 0) {
        e += 1;
        q *= p;
    }
    e
}
