//! Sparse multivariate polynomials over a prime field.
//!
//! Terms are kept sorted by descending graded-lexicographic order of their
//! exponent vectors, so the leading term is always `terms[0]` and two equal
//! polynomials have identical term vectors.

use std::cmp::Ordering;
use std::fmt;

use crate::modgcd;

/// Maximum number of parameters of a coefficient field.
pub const MAX_PARAMS: usize = 6;

/// Exponent vector over the declared parameters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u16; MAX_PARAMS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; MAX_PARAMS]);

    pub fn var(k: usize, e: u16) -> Self {
        let mut m = Self::ONE;
        m.0[k] = e;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = [0u16; MAX_PARAMS];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.0[k]
                .checked_add(other.0[k])
                .expect("parameter exponent overflow");
        }
        Monomial(out)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let mut out = [0u16; MAX_PARAMS];
        for (k, o) in out.iter_mut().enumerate() {
            *o = other.0[k] - self.0[k];
        }
        Monomial(out)
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = [0u16; MAX_PARAMS];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.0[k].min(other.0[k]);
        }
        Monomial(out)
    }

    pub fn scale(&self, factor: u32) -> Monomial {
        let mut out = [0u16; MAX_PARAMS];
        for (k, o) in out.iter_mut().enumerate() {
            let e = self.0[k] as u32 * factor;
            *o = u16::try_from(e).expect("parameter exponent overflow");
        }
        Monomial(out)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0)
    }
}

pub(crate) fn mod_inv(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    mod_pow(a, p - 2, p)
}

pub(crate) fn mod_pow(b: u32, mut e: u32, p: u32) -> u32 {
    let mut acc: u64 = 1;
    let mut base = (b % p) as u64;
    let p64 = p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p64;
        }
        base = base * base % p64;
        e >>= 1;
    }
    acc as u32
}

/// A polynomial in `F_p[t_1, ..., t_m]`. The prime is not stored; every
/// operation takes it explicitly.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, u32)>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.terms.iter()).finish()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::ONE, 1)
    }

    pub fn constant(c: u32, p: u32) -> Self {
        Self::monomial(Monomial::ONE, c % p)
    }

    pub fn monomial(m: Monomial, c: u32) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, unreduced) terms.
    pub fn from_terms(mut terms: Vec<(Monomial, u32)>, p: u32) -> Self {
        for t in terms.iter_mut() {
            t.1 %= p;
        }
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, u32)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = (last.1 + c) % p,
                _ => out.push((m, c)),
            }
            if let Some(last) = out.last() {
                if last.1 == 0 {
                    out.pop();
                }
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Monomial, u32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1 == 1
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Monomial, u32)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.0.degree())
    }

    pub fn add(&self, other: &Poly, p: u32) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = (a[i].1 + b[j].1) % p;
                    if c != 0 {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self, p: u32) -> Poly {
        Poly {
            terms: self.terms.iter().map(|&(m, c)| (m, (p - c) % p)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly, p: u32) -> Poly {
        self.add(&other.neg(p), p)
    }

    pub fn scale(&self, c: u32, p: u32) -> Poly {
        let c = c % p;
        if c == 0 {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|&(m, a)| (m, ((a as u64 * c as u64) % p as u64) as u32))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: u32, p: u32) -> Poly {
        let c = c % p;
        if c == 0 {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|&(t, a)| (t.mul(m), ((a as u64 * c as u64) % p as u64) as u32))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly, p: u32) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if other.terms.len() == 1 {
            let (m, c) = other.terms[0];
            return self.mul_monomial(&m, c, p);
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms[0];
            return other.mul_monomial(&m, c, p);
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ma, ca) in &self.terms {
            for &(mb, cb) in &other.terms {
                terms.push((ma.mul(&mb), ((ca as u64 * cb as u64) % p as u64) as u32));
            }
        }
        Poly::from_terms(terms, p)
    }

    pub fn pow(&self, mut e: u32, p: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, p);
            }
        }
        acc
    }

    /// Raises to the `p^j`-th power by scaling exponents; prime-field
    /// coefficients are fixed by Frobenius.
    pub fn frobenius(&self, p: u32, j: u32) -> Poly {
        let factor = p.pow(j);
        let mut terms: Vec<_> = self.terms.iter().map(|&(m, c)| (m.scale(factor), c)).collect();
        // exponent scaling preserves the graded-lex order
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Inverse of [`Poly::frobenius`] when every exponent is divisible by `p^j`.
    pub fn frobenius_root(&self, p: u32, j: u32) -> Option<Poly> {
        let factor = p.pow(j) as u16;
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(m, c) in &self.terms {
            let mut e = [0u16; MAX_PARAMS];
            for k in 0..MAX_PARAMS {
                if m.0[k] % factor != 0 {
                    return None;
                }
                e[k] = m.0[k] / factor;
            }
            terms.push((Monomial(e), c));
        }
        Some(Poly { terms })
    }

    pub fn monic(&self, p: u32) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(&(_, 1)) => self.clone(),
            Some(&(_, c)) => self.scale(mod_inv(c, p), p),
        }
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a
    /// remainder.
    pub fn div_exact(&self, divisor: &Poly, p: u32) -> Option<Poly> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if divisor.is_one() {
            return Some(self.clone());
        }
        let (lm, lc) = divisor.terms[0];
        let lc_inv = mod_inv(lc, p);
        if divisor.terms.len() == 1 {
            let mut terms = Vec::with_capacity(self.terms.len());
            for &(m, c) in &self.terms {
                if !lm.divides(&m) {
                    return None;
                }
                terms.push((lm.quotient_of(&m), ((c as u64 * lc_inv as u64) % p as u64) as u32));
            }
            return Some(Poly { terms });
        }
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some(&(m, c)) = rem.leading() {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient_of(&m);
            let qc = ((c as u64 * lc_inv as u64) % p as u64) as u32;
            quot.push((qm, qc));
            rem = rem.sub(&divisor.mul_monomial(&qm, qc, p), p);
        }
        Some(Poly::from_terms(quot, p))
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let first = match it.next() {
            Some(t) => t.0,
            None => return Monomial::ONE,
        };
        it.fold(first, |acc, t| acc.gcd(&t.0))
    }

    pub(crate) fn degree_in(&self, v: usize) -> u16 {
        self.terms.iter().map(|t| t.0 .0[v]).max().unwrap_or(0)
    }

    pub(crate) fn vars_used(&self) -> [bool; MAX_PARAMS] {
        let mut used = [false; MAX_PARAMS];
        for t in &self.terms {
            for k in 0..MAX_PARAMS {
                if t.0 .0[k] > 0 {
                    used[k] = true;
                }
            }
        }
        used
    }

    /// Coefficients with respect to variable `v`, indexed by the power of `v`.
    fn coefficients_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Monomial, u32)>> = vec![Vec::new(); deg + 1];
        for &(m, c) in &self.terms {
            let mut m2 = m;
            let e = m2.0[v] as usize;
            m2.0[v] = 0;
            buckets[e].push((m2, c));
        }
        // zeroing one coordinate changes degrees, so re-sort
        buckets
            .into_iter()
            .map(|mut b| {
                b.sort_unstable_by(|x, y| y.0.cmp(&x.0));
                Poly { terms: b }
            })
            .collect()
    }

    fn from_coefficients_in(coeffs: &[Poly], v: usize, p: u32) -> Poly {
        let mut terms = Vec::new();
        for (e, c) in coeffs.iter().enumerate() {
            for &(m, a) in &c.terms {
                let mut m2 = m;
                m2.0[v] = e as u16;
                terms.push((m2, a));
            }
        }
        Poly::from_terms(terms, p)
    }

    fn content_in(&self, v: usize, p: u32) -> Poly {
        let mut g = Poly::zero();
        for c in self.coefficients_in(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c, p);
            if g.is_one() {
                break;
            }
        }
        g
    }
}

/// Monic greatest common divisor. Univariate inputs use Euclid directly,
/// multivariate ones the dense modular algorithm with pseudo-remainder
/// sequences as the fallback.
pub fn gcd(a: &Poly, b: &Poly, p: u32) -> Poly {
    if a.is_zero() {
        return b.monic(p);
    }
    if b.is_zero() {
        return a.monic(p);
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic(p);
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    if a.is_monomial() || b.is_monomial() {
        let mono = if a.is_monomial() {
            a.terms[0].0.gcd(&mb)
        } else {
            b.terms[0].0.gcd(&ma)
        };
        return Poly::monomial(mono, 1);
    }
    let a1 = a.div_exact(&Poly::monomial(ma, 1), p).unwrap();
    let b1 = b.div_exact(&Poly::monomial(mb, 1), p).unwrap();
    let g = gcd_no_monomial_content(&a1, &b1, p);
    g.mul_monomial(&mg, 1, p).monic(p)
}

fn gcd_no_monomial_content(a: &Poly, b: &Poly, p: u32) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ua = a.vars_used();
    let ub = b.vars_used();
    if let Some(v) = (0..MAX_PARAMS).find(|&k| ua[k] && !ub[k]) {
        return gcd(&a.content_in(v, p), b, p);
    }
    if let Some(v) = (0..MAX_PARAMS).find(|&k| ub[k] && !ua[k]) {
        return gcd(a, &b.content_in(v, p), p);
    }
    let used = ua.iter().filter(|&&u| u).count();
    if used == 1 {
        let v = ua.iter().position(|&u| u).unwrap();
        let dense = |f: &Poly| {
            let mut out = vec![0u32; f.degree_in(v) as usize + 1];
            for (m, c) in &f.terms {
                out[m.0[v] as usize] = *c;
            }
            out
        };
        let g = univariate_gcd(dense(a), dense(b), p);
        let terms = g.iter().enumerate().filter(|(_, &c)| c != 0).map(|(e, &c)| (Monomial::var(v, e as u16), c)).collect();
        return Poly::from_terms(terms, p);
    }
    modgcd::gcd(a, b, p, &ua).unwrap_or_else(|| gcd_by_prs(a, b, p))
}

/// Gcd through primitive pseudo-remainder sequences; `a` and `b` are
/// nonconstant, free of monomial content and use the same variables.
pub(crate) fn gcd_by_prs(a: &Poly, b: &Poly, p: u32) -> Poly {
    let ua = a.vars_used();
    // lowest degree main variable keeps the remainder sequence short
    let v = (0..MAX_PARAMS)
        .filter(|&k| ua[k])
        .min_by_key(|&k| a.degree_in(k).max(b.degree_in(k)))
        .unwrap();
    let ca = a.content_in(v, p);
    let cb = b.content_in(v, p);
    let c = gcd(&ca, &cb, p);
    let pa = a.div_exact(&ca, p).unwrap();
    let pb = b.div_exact(&cb, p).unwrap();
    let g = primitive_prs(pa, pb, v, p);
    c.mul(&g, p).monic(p)
}

/// Monic gcd of two dense univariate polynomials, empty if both are zero.
fn univariate_gcd(mut a: Vec<u32>, mut b: Vec<u32>, p: u32) -> Vec<u32> {
    let trim = |v: &mut Vec<u32>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    let p64 = p as u64;
    while !b.is_empty() {
        let lead_inv = mod_inv(*b.last().unwrap(), p) as u64;
        let db = b.len() - 1;
        while a.len() > db {
            let shift = a.len() - 1 - db;
            let f = *a.last().unwrap() as u64 * lead_inv % p64;
            for (k, &bk) in b.iter().enumerate() {
                let t = f * bk as u64 % p64;
                a[k + shift] = ((a[k + shift] as u64 + p64 - t) % p64) as u32;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(&lead) = a.last() {
        let inv = mod_inv(lead, p) as u64;
        a.iter_mut().for_each(|c| *c = (*c as u64 * inv % p64) as u32);
    }
    a
}

/// Gcd of two polynomials that are primitive with respect to `v`.
fn primitive_prs(a: Poly, b: Poly, v: usize, p: u32) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        if b.degree_in(v) == 0 {
            // b is primitive of degree 0 in v, hence a unit
            return Poly::one();
        }
        let r = pseudo_rem(&a, &b, v, p);
        if r.is_zero() {
            return b.monic(p);
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        let cr = r.content_in(v, p);
        let r = r.div_exact(&cr, p).unwrap();
        a = b;
        b = r;
    }
}

fn pseudo_rem(a: &Poly, b: &Poly, v: usize, p: u32) -> Poly {
    let bc = b.coefficients_in(v);
    let db = bc.len() - 1;
    let lb = &bc[db];
    let mut rc = a.coefficients_in(v);
    while rc.len() > db && !rc.is_empty() {
        let dr = rc.len() - 1;
        let lr = rc[dr].clone();
        if lr.is_zero() {
            rc.pop();
            continue;
        }
        for c in rc.iter_mut() {
            *c = c.mul(lb, p);
        }
        let shift = dr - db;
        for (k, bk) in bc.iter().enumerate() {
            let t = lr.mul(bk, p);
            rc[k + shift] = rc[k + shift].sub(&t, p);
        }
        debug_assert!(rc[dr].is_zero());
        rc.pop();
        while rc.last().is_some_and(|c| c.is_zero()) {
            rc.pop();
        }
    }
    Poly::from_coefficients_in(&rc, v, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(k: usize) -> Poly {
        Poly::monomial(Monomial::var(k, 1), 1)
    }

    #[test]
    fn square_of_binomial_in_char_two() {
        let p = 2;
        let a = t(0).add(&Poly::one(), p);
        let sq = a.mul(&a, p);
        assert_eq!(sq, t(0).mul(&t(0), p).add(&Poly::one(), p));
        assert_eq!(sq.frobenius_root(p, 1).unwrap(), a);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let p = 3;
        let h = t(0).mul(&t(1), p).add(&Poly::constant(2, p), p);
        let u = t(0).add(&t(2), p);
        let w = t(1).mul(&t(1), p).add(&Poly::one(), p);
        let g = gcd(&h.mul(&u, p), &h.mul(&w, p), p);
        assert_eq!(g, h.monic(p));
    }

    #[test]
    fn exact_division_detects_remainder() {
        let p = 5;
        let a = t(0).mul(&t(0), p).sub(&Poly::one(), p);
        let b = t(0).sub(&Poly::one(), p);
        assert_eq!(a.div_exact(&b, p).unwrap(), t(0).add(&Poly::one(), p));
        assert!(a.div_exact(&t(1), p).is_none());
    }
}
