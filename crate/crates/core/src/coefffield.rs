//! The coefficient field `K0 = F_p(t_1, ..., t_m)`.
//!
//! Rational functions are kept in canonical form: numerator and denominator
//! coprime, denominator monic under graded-lex order, and zero stored as
//! `0/1`. Equality is therefore structural.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::Field;
use crate::poly::{gcd, mod_inv, Monomial, Poly, MAX_PARAMS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("division by zero in the coefficient field")]
    DivisionByZero,
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("at most {MAX_PARAMS} parameters are supported, got {0}")]
    TooManyParams(usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "{:?}/{:?}", self.num, self.den)
        }
    }
}

impl RatFunc {
    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True for nonzero elements of the prime field.
    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub(crate) fn size(&self) -> usize {
        let deg = (self.num.total_degree() + self.den.total_degree()) as usize;
        self.num.terms().len() + self.den.terms().len() + deg
    }
}

/// Context for arithmetic in `F_p(t_1, ..., t_m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffField {
    p: u32,
    names: Arc<[String]>,
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl CoeffField {
    pub fn new(p: u32, names: Vec<String>) -> Result<Self, CoeffError> {
        if !is_prime(p) || p > u16::MAX as u32 {
            return Err(CoeffError::NotPrime(p));
        }
        if names.len() > MAX_PARAMS {
            return Err(CoeffError::TooManyParams(names.len()));
        }
        Ok(CoeffField { p, names: names.into() })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn num_params(&self) -> usize {
        self.names.len()
    }

    pub fn param(&self, k: usize) -> RatFunc {
        assert!(k < self.names.len());
        RatFunc {
            num: Poly::monomial(Monomial::var(k, 1), 1),
            den: Poly::one(),
        }
    }

    pub fn constant(&self, c: i64) -> RatFunc {
        let c = c.rem_euclid(self.p as i64) as u32;
        RatFunc {
            num: Poly::constant(c, self.p),
            den: Poly::one(),
        }
    }

    pub fn from_poly(&self, num: Poly) -> RatFunc {
        RatFunc { num, den: Poly::one() }
    }

    /// Canonical form of `num / den`.
    pub fn fraction(&self, num: Poly, den: Poly) -> Result<RatFunc, CoeffError> {
        if den.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(self.reduce(num, den))
    }

    fn reduce(&self, num: Poly, den: Poly) -> RatFunc {
        let p = self.p;
        if num.is_zero() {
            return RatFunc { num, den: Poly::one() };
        }
        if den.is_one() {
            return RatFunc { num, den };
        }
        let g = gcd(&num, &den, p);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g, p).unwrap(), den.div_exact(&g, p).unwrap())
        };
        let lc = den.leading().unwrap().1;
        if lc == 1 {
            RatFunc { num, den }
        } else {
            let s = mod_inv(lc, p);
            RatFunc { num: num.scale(s, p), den: den.scale(s, p) }
        }
    }

    pub fn div(&self, a: &RatFunc, b: &RatFunc) -> Result<RatFunc, CoeffError> {
        let inv = self.inv(b).ok_or(CoeffError::DivisionByZero)?;
        Ok(self.mul(a, &inv))
    }

    pub fn pow(&self, a: &RatFunc, e: u32) -> RatFunc {
        // reduced fractions stay reduced under powers
        RatFunc { num: a.num.pow(e, self.p), den: a.den.pow(e, self.p) }
    }

    pub fn scale_int(&self, a: &RatFunc, c: u32) -> RatFunc {
        let c = c % self.p;
        if c == 0 {
            return self.zero();
        }
        RatFunc { num: a.num.scale(c, self.p), den: a.den.clone() }
    }

    /// `f^(p^j)`.
    pub fn frobenius(&self, f: &RatFunc, j: u32) -> RatFunc {
        if j == 0 {
            return f.clone();
        }
        RatFunc {
            num: f.num.frobenius(self.p, j),
            den: f.den.frobenius(self.p, j),
        }
    }

    /// The `p^j`-th root of `f` in `K0`, if it exists.
    pub fn pth_root(&self, f: &RatFunc, j: u32) -> Option<RatFunc> {
        if j == 0 {
            return Some(f.clone());
        }
        Some(RatFunc {
            num: f.num.frobenius_root(self.p, j)?,
            den: f.den.frobenius_root(self.p, j)?,
        })
    }

    /// Number of basis monomials `t^g` (all `g_k < p^j`) of `K0` over `K0^(p^j)`.
    pub fn twist_dim(&self, j: u32) -> usize {
        (self.p as usize).pow(j).pow(self.names.len() as u32)
    }

    /// The basis monomial of `K0` over `K0^(p^j)` with mixed-radix index `idx`.
    pub fn twist_monomial(&self, j: u32, mut idx: usize) -> Monomial {
        let base = (self.p as usize).pow(j);
        let mut m = Monomial::ONE;
        for k in 0..self.names.len() {
            m.0[k] = (idx % base) as u16;
            idx /= base;
        }
        m
    }

    fn twist_index(&self, j: u32, m: &Monomial) -> (usize, Monomial) {
        let base = (self.p as usize).pow(j);
        let mut idx = 0usize;
        let mut rest = Monomial::ONE;
        for k in (0..self.names.len()).rev() {
            let e = m.0[k] as usize;
            idx = idx * base + e % base;
            rest.0[k] = (e / base) as u16;
        }
        (idx, rest)
    }

    /// Writes `f = sum_g t^g * c_g^(p^j)` and returns the untwisted
    /// coordinates `c_g`, indexed as in [`CoeffField::twist_monomial`].
    pub fn untwist(&self, f: &RatFunc, j: u32) -> Vec<RatFunc> {
        let dim = self.twist_dim(j);
        let mut out = vec![self.zero(); dim];
        if f.is_zero() {
            return out;
        }
        if j == 0 {
            out[0] = f.clone();
            return out;
        }
        let p = self.p;
        // f = num * den^(p^j - 1) / den^(p^j)
        let den_frob = f.den.frobenius(p, j);
        let scaled = if f.den.is_one() {
            f.num.clone()
        } else {
            let cofactor = den_frob.div_exact(&f.den, p).unwrap();
            f.num.mul(&cofactor, p)
        };
        let mut buckets: Vec<Vec<(Monomial, u32)>> = vec![Vec::new(); dim];
        for &(m, c) in scaled.terms() {
            let (idx, rest) = self.twist_index(j, &m);
            buckets[idx].push((rest, c));
        }
        for (idx, terms) in buckets.into_iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            let num = Poly::from_terms(terms, p);
            out[idx] = self.reduce(num, f.den.clone());
        }
        out
    }

    /// Inverse of [`CoeffField::untwist`].
    pub fn retwist(&self, coords: &[RatFunc], j: u32) -> RatFunc {
        let p = self.p;
        let mut lcm = Poly::one();
        for c in coords.iter().filter(|c| !c.is_zero()) {
            if c.den != lcm && !c.den.is_one() {
                let g = gcd(&lcm, &c.den, p);
                lcm = lcm.mul(&c.den.div_exact(&g, p).unwrap(), p);
            }
        }
        // one reduction over the common denominator
        let mut num = Poly::zero();
        for (idx, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cofactor = lcm.div_exact(&c.den, p).unwrap();
            let term = c.num.mul(&cofactor, p).frobenius(p, j);
            num = num.add(&term.mul_monomial(&self.twist_monomial(j, idx), 1, p), p);
        }
        self.reduce(num, lcm.frobenius(p, j))
    }

    pub fn fmt_poly(&self, poly: &Poly) -> String {
        if poly.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for &(m, c) in poly.terms() {
            let mut factors = Vec::new();
            if c != 1 || m.is_one() {
                factors.push(c.to_string());
            }
            for (k, name) in self.names.iter().enumerate() {
                match m.0[k] {
                    0 => {}
                    1 => factors.push(name.clone()),
                    e => factors.push(format!("{name}^{e}")),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }

    pub fn fmt(&self, f: &RatFunc) -> String {
        let num = self.fmt_poly(&f.num);
        if f.den.is_one() {
            return num;
        }
        let num = if f.num.terms().len() > 1 { format!("({num})") } else { num };
        let den_simple = f.den.is_monomial()
            && f.den.terms()[0].1 == 1
            && f.den.terms()[0].0 .0.iter().filter(|&&e| e > 0).count() == 1;
        let den = self.fmt_poly(&f.den);
        if den_simple {
            format!("{num}/{den}")
        } else {
            format!("{num}/({den})")
        }
    }
}

impl Field for CoeffField {
    type Elem = RatFunc;

    fn zero(&self) -> RatFunc {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    fn one(&self) -> RatFunc {
        RatFunc { num: Poly::one(), den: Poly::one() }
    }

    fn is_zero(&self, a: &RatFunc) -> bool {
        a.num.is_zero()
    }

    fn is_one(&self, a: &RatFunc) -> bool {
        a.is_one()
    }

    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        let p = self.p;
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.den == b.den {
            let num = a.num.add(&b.num, p);
            return self.reduce(num, a.den.clone());
        }
        if a.den.is_one() {
            let num = a.num.mul(&b.den, p).add(&b.num, p);
            return RatFunc { num, den: b.den.clone() };
        }
        if b.den.is_one() {
            let num = b.num.mul(&a.den, p).add(&a.num, p);
            return RatFunc { num, den: a.den.clone() };
        }
        let g = gcd(&a.den, &b.den, p);
        let (ra, rb) = if g.is_one() {
            (a.den.clone(), b.den.clone())
        } else {
            (a.den.div_exact(&g, p).unwrap(), b.den.div_exact(&g, p).unwrap())
        };
        let num = a.num.mul(&rb, p).add(&b.num.mul(&ra, p), p);
        let den = a.den.mul(&rb, p);
        if g.is_one() {
            // denominators coprime: only a common factor with g could survive
            return RatFunc { num, den };
        }
        self.reduce(num, den)
    }

    fn neg(&self, a: &RatFunc) -> RatFunc {
        RatFunc { num: a.num.neg(self.p), den: a.den.clone() }
    }

    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        let p = self.p;
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        if a.is_one() {
            return b.clone();
        }
        if b.is_one() {
            return a.clone();
        }
        if a.den.is_one() && b.den.is_one() {
            return RatFunc { num: a.num.mul(&b.num, p), den: Poly::one() };
        }
        let g1 = gcd(&a.num, &b.den, p);
        let g2 = gcd(&b.num, &a.den, p);
        let an = if g1.is_one() { a.num.clone() } else { a.num.div_exact(&g1, p).unwrap() };
        let bd = if g1.is_one() { b.den.clone() } else { b.den.div_exact(&g1, p).unwrap() };
        let bn = if g2.is_one() { b.num.clone() } else { b.num.div_exact(&g2, p).unwrap() };
        let ad = if g2.is_one() { a.den.clone() } else { a.den.div_exact(&g2, p).unwrap() };
        let num = an.mul(&bn, p);
        let den = ad.mul(&bd, p);
        let lc = den.leading().unwrap().1;
        if lc == 1 {
            RatFunc { num, den }
        } else {
            let s = mod_inv(lc, p);
            RatFunc { num: num.scale(s, p), den: den.scale(s, p) }
        }
    }

    fn inv(&self, a: &RatFunc) -> Option<RatFunc> {
        if a.is_zero() {
            return None;
        }
        let lc = a.num.leading().unwrap().1;
        let s = mod_inv(lc, self.p);
        Some(RatFunc { num: a.den.scale(s, self.p), den: a.num.scale(s, self.p) })
    }

    fn weight(&self, a: &RatFunc) -> usize {
        a.size()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2(names: &[&str]) -> CoeffField {
        CoeffField::new(2, names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn sum_with_common_denominator_cancels() {
        let k = k2(&["t"]);
        let t = k.param(0);
        let t1 = k.add(&t, &k.one());
        let a = k.div(&t, &t1).unwrap();
        let b = k.div(&k.one(), &t1).unwrap();
        assert_eq!(k.add(&a, &b), k.one());
    }

    #[test]
    fn product_with_inverse_is_one() {
        let k = k2(&["t"]);
        let t = k.param(0);
        assert_eq!(k.mul(&t, &k.inv(&t).unwrap()), k.one());
    }

    #[test]
    fn quotient_reduces_via_freshmans_dream() {
        let k = k2(&["t"]);
        let t = k.param(0);
        let num = k.add(&k.mul(&t, &t), &k.one());
        let den = k.add(&t, &k.one());
        assert_eq!(k.div(&num, &den).unwrap(), den);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let k = k2(&["t"]);
        assert_eq!(k.div(&k.one(), &k.zero()), Err(CoeffError::DivisionByZero));
    }

    #[test]
    fn frobenius_examples() {
        let k = k2(&["s", "t"]);
        let (s, t) = (k.param(0), k.param(1));
        assert_eq!(k.frobenius(&t, 2), k.pow(&t, 4));
        let f = k.div(&k.add(&t, &k.one()), &s).unwrap();
        let expect = k.div(&k.add(&k.mul(&t, &t), &k.one()), &k.mul(&s, &s)).unwrap();
        assert_eq!(k.frobenius(&f, 1), expect);
        assert_eq!(k.frobenius(&k.one(), 3), k.one());
    }

    #[test]
    fn pth_root_examples() {
        let k = k2(&["s", "t"]);
        let (s, t) = (k.param(0), k.param(1));
        let f = k.div(&k.pow(&t, 4), &k.pow(&s, 2)).unwrap();
        assert_eq!(k.pth_root(&f, 1), Some(k.div(&k.pow(&t, 2), &s).unwrap()));
        assert_eq!(k.pth_root(&k.add(&t, &k.one()), 1), None);
        let g = k.div(&k.add(&k.pow(&t, 2), &k.one()), &k.pow(&s, 4)).unwrap();
        let root = k.pth_root(&g, 1).unwrap();
        assert_eq!(k.frobenius(&root, 1), g);
        assert_eq!(root, k.div(&k.add(&t, &k.one()), &k.pow(&s, 2)).unwrap());
    }

    #[test]
    fn untwist_round_trip() {
        let k = CoeffField::new(3, vec!["a".into(), "b".into()]).unwrap();
        let (a, b) = (k.param(0), k.param(1));
        let f = k.div(&k.add(&k.pow(&a, 5), &k.mul(&a, &b)), &k.add(&b, &k.constant(2))).unwrap();
        for j in 0..3 {
            let c = k.untwist(&f, j);
            assert_eq!(c.len(), k.twist_dim(j));
            assert_eq!(k.retwist(&c, j), f);
        }
    }

    #[test]
    fn canonical_display() {
        let k = k2(&["u", "v"]);
        let (u, v) = (k.param(0), k.param(1));
        let f = k.div(&v, &u).unwrap();
        assert_eq!(k.fmt(&f), "v/u");
        let g = k.div(&k.add(&v, &k.one()), &k.mul(&u, &v)).unwrap();
        assert_eq!(k.fmt(&g), "(v + 1)/(u*v)");
    }
}
