//! Dense modular gcd of multivariate polynomials over `F_p`, by evaluation
//! and Newton interpolation over an extension `GF(p^d)` large enough to
//! supply evaluation points.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::poly::{mod_inv, Monomial, Poly, MAX_PARAMS};

const MIN_FIELD_SIZE: u64 = 1 << 12;

type Exp = [u16; MAX_PARAMS];
/// Terms sorted by decreasing lexicographic exponent.
type GPoly = Vec<(Exp, u32)>;

/// `GF(p^d)`, elements encoded as integers whose base-`p` digits are the
/// coordinates in the power basis of a primitive root.
struct Gf {
    p: u32,
    d: u32,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Gf {
    fn new(p: u32) -> Gf {
        let mut d = 1u32;
        let mut q = p as u64;
        while q < MIN_FIELD_SIZE {
            d += 1;
            q *= p as u64;
        }
        let q = q as u32;
        if d == 1 {
            return Gf { p, d, q, exp: Vec::new(), log: Vec::new() };
        }
        for low in 1..q {
            if low % p == 0 {
                continue;
            }
            let m: Vec<u32> = (0..d).map(|i| low / p.pow(i) % p).collect();
            if let Some(exp) = power_table(&m, p, q) {
                let mut log = vec![0u32; q as usize];
                for (k, &e) in exp.iter().enumerate() {
                    log[e as usize] = k as u32;
                }
                return Gf { p, d, q, exp, log };
            }
        }
        unreachable!("primitive polynomials exist in every degree")
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        if self.d == 1 {
            return ((a as u64 + b as u64) % self.p as u64) as u32;
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        while a > 0 || b > 0 {
            out += (a % self.p + b % self.p) % self.p * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    fn neg(&self, a: u32) -> u32 {
        if self.d == 1 {
            return (self.p - a) % self.p;
        }
        if self.p == 2 {
            return a;
        }
        let (mut a, mut out, mut place) = (a, 0, 1);
        while a > 0 {
            out += (self.p - a % self.p) % self.p * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.d == 1 {
            return (a as u64 * b as u64 % self.p as u64) as u32;
        }
        let k = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % (self.q as u64 - 1);
        self.exp[k as usize]
    }

    fn inv(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        if self.d == 1 {
            return mod_inv(a, self.p);
        }
        let k = (self.q - 1 - self.log[a as usize]) % (self.q - 1);
        self.exp[k as usize]
    }
}

/// Powers of `x` modulo the monic `x^d + sum m_i x^i`, if `x` has order
/// exactly `q - 1` (so the quotient is a field and `x` generates it).
fn power_table(m: &[u32], p: u32, q: u32) -> Option<Vec<u32>> {
    let d = m.len();
    let encode = |v: &[u32]| v.iter().rev().fold(0u32, |acc, &c| acc * p + c);
    let mut exp = Vec::with_capacity(q as usize - 1);
    let mut cur = vec![0u32; d];
    cur[0] = 1;
    for k in 0..q - 1 {
        let code = encode(&cur);
        if k > 0 && code == 1 {
            return None;
        }
        exp.push(code);
        let top = cur[d - 1];
        for i in (1..d).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for i in 0..d {
                cur[i] = (cur[i] + (p - m[i]) % p * top) % p;
            }
        }
    }
    (encode(&cur) == 1).then_some(exp)
}

fn field(p: u32) -> Arc<Gf> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Gf>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(gf) = cache.lock().unwrap().get(&p) {
        return gf.clone();
    }
    let gf = Arc::new(Gf::new(p));
    cache.lock().unwrap().entry(p).or_insert(gf).clone()
}

// dense univariate polynomials over GF, lowest degree first, no trailing zeros

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn uni_eval(gf: &Gf, f: &[u32], x: u32) -> u32 {
    f.iter().rev().fold(0, |acc, &c| gf.add(gf.mul(acc, x), c))
}

fn uni_mul(gf: &Gf, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate().filter(|(_, &x)| x != 0) {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = gf.add(out[i + j], gf.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

fn uni_add(gf: &Gf, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = (0..a.len().max(b.len()))
        .map(|i| gf.add(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0)))
        .collect();
    trim(&mut out);
    out
}

fn uni_scale(gf: &Gf, a: &[u32], c: u32) -> Vec<u32> {
    let mut out: Vec<u32> = a.iter().map(|&x| gf.mul(x, c)).collect();
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` nonzero.
fn uni_divrem(gf: &Gf, a: &[u32], b: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = gf.inv(b[db]);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quot = vec![0u32; r.len() - db];
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let f = gf.mul(*r.last().unwrap(), lead_inv);
        quot[shift] = f;
        for (k, &bk) in b.iter().enumerate() {
            r[k + shift] = gf.sub(r[k + shift], gf.mul(f, bk));
        }
        trim(&mut r);
    }
    (quot, r)
}

fn uni_monic(gf: &Gf, a: Vec<u32>) -> Vec<u32> {
    match a.last() {
        Some(&l) if l != 1 => uni_scale(gf, &a, gf.inv(l)),
        _ => a,
    }
}

fn uni_gcd(gf: &Gf, a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = uni_divrem(gf, &a, &b).1;
        a = b;
        b = r;
    }
    uni_monic(gf, a)
}

// multivariate helpers

fn monic(gf: &Gf, mut a: GPoly) -> GPoly {
    if let Some(&(_, l)) = a.first() {
        if l != 1 {
            let inv = gf.inv(l);
            a.iter_mut().for_each(|t| t.1 = gf.mul(t.1, inv));
        }
    }
    a
}

/// Coefficients with respect to `y`, keyed by the remaining exponent.
fn y_coefficients(a: &GPoly, y: usize) -> BTreeMap<Exp, Vec<u32>> {
    let mut out: BTreeMap<Exp, Vec<u32>> = BTreeMap::new();
    for &(e, c) in a {
        let mut key = e;
        let k = key[y] as usize;
        key[y] = 0;
        let v = out.entry(key).or_default();
        if v.len() <= k {
            v.resize(k + 1, 0);
        }
        v[k] = c;
    }
    out
}

fn from_y_coefficients(map: &BTreeMap<Exp, Vec<u32>>, y: usize) -> GPoly {
    let mut out: GPoly = Vec::new();
    for (key, v) in map {
        for (k, &c) in v.iter().enumerate().filter(|(_, &c)| c != 0) {
            let mut e = *key;
            e[y] = k as u16;
            out.push((e, c));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

fn eval_y(gf: &Gf, map: &BTreeMap<Exp, Vec<u32>>, x: u32) -> GPoly {
    map.iter()
        .rev()
        .filter_map(|(key, v)| {
            let c = uni_eval(gf, v, x);
            (c != 0).then_some((*key, c))
        })
        .collect()
}

fn divides(gf: &Gf, h: &GPoly, f: &GPoly) -> bool {
    let (lead, lc) = h[0];
    let lc_inv = gf.inv(lc);
    let mut r: BTreeMap<Exp, u32> = f.iter().copied().collect();
    while let Some((&e, &c)) = r.last_key_value() {
        if (0..MAX_PARAMS).any(|k| e[k] < lead[k]) {
            return false;
        }
        let mut shift = e;
        for k in 0..MAX_PARAMS {
            shift[k] -= lead[k];
        }
        let t = gf.mul(c, lc_inv);
        for &(he, hc) in h {
            let mut key = he;
            for k in 0..MAX_PARAMS {
                key[k] += shift[k];
            }
            let old = r.get(&key).copied().unwrap_or(0);
            let new = gf.sub(old, gf.mul(t, hc));
            if new == 0 {
                r.remove(&key);
            } else {
                r.insert(key, new);
            }
        }
    }
    true
}

/// Monic gcd of nonzero `a`, `b` in variables `0..n`, or `None` if the
/// field runs out of evaluation points.
fn gcd_rec(gf: &Gf, a: &GPoly, b: &GPoly, n: usize) -> Option<GPoly> {
    if n == 1 {
        let dense = |f: &GPoly| {
            let mut v = vec![0u32; f.first().map_or(0, |t| t.0[0] as usize + 1)];
            for &(e, c) in f {
                v[e[0] as usize] = c;
            }
            v
        };
        let g = uni_gcd(gf, &dense(a), &dense(b));
        let mut out: GPoly = Vec::new();
        for (k, &c) in g.iter().enumerate().rev().filter(|(_, &c)| c != 0) {
            let mut e = [0u16; MAX_PARAMS];
            e[0] = k as u16;
            out.push((e, c));
        }
        return Some(out);
    }
    let y = n - 1;
    let ya = y_coefficients(a, y);
    let yb = y_coefficients(b, y);
    let content = |m: &BTreeMap<Exp, Vec<u32>>| m.values().fold(Vec::new(), |g, v| uni_gcd(gf, &g, v));
    let (ca, cb) = (content(&ya), content(&yb));
    let c = uni_gcd(gf, &ca, &cb);
    let prim = |m: BTreeMap<Exp, Vec<u32>>, cm: &[u32]| -> BTreeMap<Exp, Vec<u32>> {
        m.into_iter().map(|(k, v)| (k, uni_divrem(gf, &v, cm).0)).collect()
    };
    let (pa, pb) = (prim(ya, &ca), prim(yb, &cb));
    let (a1, b1) = (from_y_coefficients(&pa, y), from_y_coefficients(&pb, y));
    let (lca, lcb) = (pa.last_key_value().unwrap().1, pb.last_key_value().unwrap().1);
    let gamma = uni_gcd(gf, lca, lcb);
    let ydeg = |m: &BTreeMap<Exp, Vec<u32>>| m.values().map(|v| v.len() - 1).max().unwrap();
    let bound = ydeg(&pa).min(ydeg(&pb)) + gamma.len() - 1;

    let mut interp: BTreeMap<Exp, Vec<u32>> = BTreeMap::new();
    let mut modulus: Vec<u32> = vec![1];
    let mut lead: Option<Exp> = None;
    let mut count = 0;
    for x in 0..gf.q {
        let gx = uni_eval(gf, &gamma, x);
        if gx == 0 || uni_eval(gf, lca, x) == 0 || uni_eval(gf, lcb, x) == 0 {
            continue;
        }
        let h = gcd_rec(gf, &eval_y(gf, &pa, x), &eval_y(gf, &pb, x), n - 1)?;
        let hl = h[0].0;
        let linear = vec![gf.neg(x), 1];
        match lead {
            Some(l) if hl > l => continue,
            Some(l) if hl == l => {
                let m_inv = gf.inv(uni_eval(gf, &modulus, x));
                let image: BTreeMap<Exp, u32> = h.iter().map(|&(e, c)| (e, gf.mul(c, gx))).collect();
                let keys: Vec<Exp> = interp.keys().chain(image.keys()).copied().collect();
                for key in keys {
                    let old = interp.get(&key).map_or(0, |v| uni_eval(gf, v, x));
                    let new = image.get(&key).copied().unwrap_or(0);
                    let diff = gf.sub(new, old);
                    if diff != 0 {
                        let step = uni_scale(gf, &modulus, gf.mul(diff, m_inv));
                        let entry = interp.entry(key).or_default();
                        *entry = uni_add(gf, entry, &step);
                        if entry.is_empty() {
                            interp.remove(&key);
                        }
                    }
                }
                modulus = uni_mul(gf, &modulus, &linear);
                count += 1;
            }
            _ => {
                interp = h.iter().map(|&(e, c)| (e, vec![gf.mul(c, gx)])).collect();
                modulus = linear;
                lead = Some(hl);
                count = 1;
            }
        }
        if count > bound {
            let cont = content(&interp);
            let prim_interp = prim(interp.clone(), &cont);
            let cand = monic(gf, from_y_coefficients(&prim_interp, y));
            if divides(gf, &cand, &a1) && divides(gf, &cand, &b1) {
                let mut out: BTreeMap<Exp, u32> = BTreeMap::new();
                for &(e, cc) in &cand {
                    for (k, &ck) in c.iter().enumerate().filter(|(_, &ck)| ck != 0) {
                        let mut key = e;
                        key[y] += k as u16;
                        let v = out.entry(key).or_insert(0);
                        *v = gf.add(*v, gf.mul(cc, ck));
                    }
                }
                let result: GPoly = out.into_iter().rev().filter(|t| t.1 != 0).collect();
                return Some(monic(gf, result));
            }
        }
    }
    None
}

/// Gcd of two polynomials that use the same variables (at least two),
/// monic in the ordering of [`Poly`]. `None` means the caller should fall
/// back to another method.
pub(crate) fn gcd(a: &Poly, b: &Poly, p: u32, used: &[bool; MAX_PARAMS]) -> Option<Poly> {
    let mut vars: Vec<usize> = (0..MAX_PARAMS).filter(|&k| used[k]).collect();
    // univariate remainders run in the highest degree variable
    vars.sort_by_key(|&k| std::cmp::Reverse(a.degree_in(k).max(b.degree_in(k))));
    let gf = field(p);
    let convert = |f: &Poly| -> GPoly {
        let mut out: GPoly = f
            .terms()
            .iter()
            .map(|&(m, c)| {
                let mut e = [0u16; MAX_PARAMS];
                for (i, &v) in vars.iter().enumerate() {
                    e[i] = m.0[v];
                }
                (e, c)
            })
            .collect();
        out.sort_by(|x, y| y.0.cmp(&x.0));
        out
    };
    let g = gcd_rec(&gf, &convert(a), &convert(b), vars.len())?;
    let mut terms = Vec::with_capacity(g.len());
    for (e, c) in g {
        if c >= p {
            // not over the prime field: a bug upstream, let the caller recompute
            debug_assert!(false, "modular gcd left the prime field");
            return None;
        }
        let mut m = [0u16; MAX_PARAMS];
        for (i, &v) in vars.iter().enumerate() {
            m[v] = e[i];
        }
        terms.push((Monomial(m), c));
    }
    Some(Poly::from_terms(terms, p).monic(p))
}
