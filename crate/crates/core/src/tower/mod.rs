//! Triangular towers `L = K[x_1..x_n]/(x_i^{q_i} - g_i)` with `q_i = p^{d_i}`
//! and `g_i` supported on the earlier generators.
//!
//! Elements are stored in the monomial basis `x^r`, `0 <= r_i < q_i`. The
//! basis index is mixed radix with the first generator least significant,
//! so the intermediate field `K(x_1..x_i)` is exactly the set of elements
//! supported on indices below `q_1 * ... * q_i`.

mod build;
mod pickert;
mod subfield;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::coefffield::{CoeffError, CoeffField, RatFunc};
use crate::field::Field;
use crate::linalg;
use crate::poly::{gcd, Poly};

pub use build::{build_tower, eval_expr};
pub use pickert::{modular_by_pickert, pickert_order, structure_equation, PickertOutcome, PickertSequence};
pub use subfield::Subfield;

/// Largest supported `[L:K]`; the multiplication table has `N^2` entries.
pub const MAX_TOWER_DIM: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TowerError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("name {0} is declared twice")]
    DuplicateName(String),
    #[error("generator {generator}: degree must be p^d with d >= 1")]
    InvalidDegree { generator: String },
    #[error("generator {generator}: relation mentions {name}, which is not a parameter or an earlier generator")]
    NonTriangular { generator: String, name: String },
    #[error("generator {generator}: a divisor in the relation mentions a generator")]
    DivisionByGenerator { generator: String },
    #[error("generator {generator}: division by zero in the relation")]
    ZeroDenominator { generator: String },
    #[error("generator {generator}: declared degree {declared} is not minimal, {minimal} already suffices")]
    NonMinimalDegree { generator: String, declared: u64, minimal: u64 },
    #[error("[L:K] = {0} exceeds the supported maximum of {MAX_TOWER_DIM}")]
    TooLarge(usize),
    #[error("generator {generator} lies in the field generated by the others over K(L^p)")]
    RedundantGenerator { generator: String },
    #[error("structure equation of {generator} is not a polynomial in q-th powers of earlier generators")]
    StructureViolation { generator: String },
}

/// An element of `L` in normal form: sorted `(basis index, coefficient)`
/// pairs with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TowerElement {
    terms: Vec<(usize, RatFunc)>,
}

impl TowerElement {
    pub fn zero() -> Self {
        TowerElement { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(usize, RatFunc)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, idx: usize) -> Option<&RatFunc> {
        self.terms
            .binary_search_by_key(&idx, |t| t.0)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    /// Largest basis index in the support.
    pub fn max_index(&self) -> Option<usize> {
        self.terms.last().map(|t| t.0)
    }

    /// The element in K, if the support is `{0}` or empty.
    pub fn as_coeff(&self) -> Option<&RatFunc> {
        match self.terms.as_slice() {
            [] => None,
            [(0, c)] => Some(c),
            _ => None,
        }
    }

    fn from_dense(dense: Vec<RatFunc>) -> Self {
        let terms = dense.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        TowerElement { terms }
    }

    fn shifted(&self, offset: usize) -> Self {
        TowerElement { terms: self.terms.iter().map(|(i, c)| (i + offset, c.clone())).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub degree_exp: u32,
    pub q: usize,
    /// Normal form of `x^q`, supported on the earlier generators.
    pub relation: TowerElement,
}

/// A finite purely inseparable extension `L/K` given as a triangular tower.
#[derive(Clone)]
pub struct Tower {
    k: CoeffField,
    gens: Vec<Generator>,
    dim: usize,
    // products of basis monomials, row-major
    table: Arc<[TowerElement]>,
    // p-th powers of basis monomials
    frob: Arc<[TowerElement]>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self
            .gens
            .iter()
            .map(|g| format!("{}^{} = {}", g.name, g.q, self.fmt_elem(&g.relation)))
            .collect();
        f.debug_struct("Tower")
            .field("p", &self.k.characteristic())
            .field("params", &self.k.param_names())
            .field("gens", &gens)
            .finish()
    }
}

impl Tower {
    /// The trivial tower `L = K`.
    pub fn base(k: CoeffField) -> Tower {
        let one = TowerElement { terms: vec![(0, k.one())] };
        Tower { k, gens: Vec::new(), dim: 1, table: vec![one.clone()].into(), frob: vec![one].into() }
    }

    /// Adjoins `x` with `x^(p^degree_exp) = relation`. The relation must be
    /// an element of `self`; minimality is not checked here.
    pub fn extend(&self, name: &str, degree_exp: u32, relation: TowerElement) -> Result<Tower, TowerError> {
        if degree_exp == 0 {
            return Err(TowerError::InvalidDegree { generator: name.to_string() });
        }
        let p = self.k.characteristic() as usize;
        let q = p.saturating_pow(degree_exp);
        let od = self.dim;
        let nd = od.saturating_mul(q);
        if nd > MAX_TOWER_DIM {
            return Err(TowerError::TooLarge(nd));
        }
        assert!(relation.max_index().map_or(true, |i| i < od), "relation outside the prefix");
        let mut table = Vec::with_capacity(nd * nd);
        for a in 0..nd {
            let (ua, ia) = (a % od, a / od);
            for b in 0..nd {
                let (ub, ib) = (b % od, b / od);
                let prod = &self.table[ua * od + ub];
                let s = ia + ib;
                table.push(if s < q {
                    prod.shifted(s * od)
                } else {
                    self.mul(prod, &relation).shifted((s - q) * od)
                });
            }
        }
        let mut gens = self.gens.clone();
        gens.push(Generator { name: name.to_string(), degree_exp, q, relation });
        let mut tower = Tower { k: self.k.clone(), gens, dim: nd, table: table.into(), frob: Vec::new().into() };
        let frob: Vec<TowerElement> = (0..nd).map(|r| tower.pow(&tower.basis(r), p as u32)).collect();
        tower.frob = frob.into();
        Ok(tower)
    }

    pub fn coeff_field(&self) -> &CoeffField {
        &self.k
    }

    pub fn characteristic(&self) -> u32 {
        self.k.characteristic()
    }

    /// `[L:K]`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// `[K(x_1..x_i) : K]`.
    pub fn prefix_dim(&self, i: usize) -> usize {
        self.gens[..i].iter().map(|g| g.q).product()
    }

    /// The tower truncated to its first `i` generators.
    pub fn prefix(&self, i: usize) -> Tower {
        let mut t = Tower::base(self.k.clone());
        for g in &self.gens[..i] {
            t = t.extend(&g.name, g.degree_exp, g.relation.clone()).expect("prefix of a valid tower");
        }
        t
    }

    /// `sum_i d_i`; every element raised to `p^(this)` lies in K.
    pub fn total_degree_exp(&self) -> u32 {
        self.gens.iter().map(|g| g.degree_exp).sum()
    }

    /// Exponent vector of basis index `idx`.
    pub fn exps(&self, mut idx: usize) -> Vec<usize> {
        self.gens
            .iter()
            .map(|g| {
                let r = idx % g.q;
                idx /= g.q;
                r
            })
            .collect()
    }

    /// Basis index of an exponent vector with `r_i < q_i`.
    pub fn index(&self, exps: &[usize]) -> usize {
        let mut idx = 0;
        for (g, &r) in self.gens.iter().zip(exps).rev() {
            assert!(r < g.q);
            idx = idx * g.q + r;
        }
        idx
    }

    pub fn basis(&self, idx: usize) -> TowerElement {
        TowerElement { terms: vec![(idx, self.k.one())] }
    }

    /// The generator `x_i` as an element.
    pub fn gen(&self, i: usize) -> TowerElement {
        self.basis(self.prefix_dim(i))
    }

    /// Normal form of `x^exps` for arbitrary nonnegative exponents.
    pub fn monomial(&self, exps: &[usize]) -> TowerElement {
        let mut acc = self.one();
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                acc = self.mul(&acc, &self.pow(&self.gen(i), e as u32));
            }
        }
        acc
    }

    pub fn from_coeff(&self, c: RatFunc) -> TowerElement {
        if c.is_zero() {
            TowerElement::zero()
        } else {
            TowerElement { terms: vec![(0, c)] }
        }
    }

    pub fn coords(&self, a: &TowerElement) -> Vec<RatFunc> {
        let mut v = vec![self.k.zero(); self.dim];
        for (i, c) in &a.terms {
            v[*i] = c.clone();
        }
        v
    }

    pub fn from_coords(&self, v: &[RatFunc]) -> TowerElement {
        assert_eq!(v.len(), self.dim);
        TowerElement::from_dense(v.to_vec())
    }

    /// `c * a` for `c` in K.
    pub fn scale(&self, c: &RatFunc, a: &TowerElement) -> TowerElement {
        if c.is_zero() {
            return TowerElement::zero();
        }
        TowerElement { terms: a.terms.iter().map(|(i, x)| (*i, self.k.mul(c, x))).collect() }
    }

    pub fn pow(&self, a: &TowerElement, mut e: u32) -> TowerElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `a^(p^j)`.
    pub fn frobenius(&self, a: &TowerElement, j: u32) -> TowerElement {
        let mut cur = a.clone();
        for _ in 0..j {
            let mut acc = vec![self.k.zero(); self.dim];
            for (r, c) in &cur.terms {
                let cp = self.k.frobenius(c, 1);
                accumulate(&self.k, &mut acc, &cp, &self.frob[*r]);
            }
            cur = TowerElement::from_dense(acc);
        }
        cur
    }

    /// Whether `a` lies in `K(x_1..x_i)`; `i = 0` tests membership in K.
    pub fn prefix_membership(&self, a: &TowerElement, i: usize) -> bool {
        a.max_index().map_or(true, |m| m < self.prefix_dim(i))
    }

    /// Least `k` with `a^(p^k)` in `K(x_1..x_i)`.
    pub fn exponent_over_prefix(&self, a: &TowerElement, i: usize) -> u32 {
        let bound = self.total_degree_exp();
        let mut cur = a.clone();
        for k in 0..=bound {
            if self.prefix_membership(&cur, i) {
                return k;
            }
            cur = self.frobenius(&cur, 1);
        }
        panic!("exponent exceeds the sum of the degree exponents");
    }

    /// Inverse by solving `a * x = 1` against the multiplication matrix.
    pub fn inv_by_solve(&self, a: &TowerElement) -> Option<TowerElement> {
        if a.is_zero() {
            return None;
        }
        let cols = self.mult_columns(a);
        let mut rhs = vec![self.k.zero(); self.dim];
        rhs[0] = self.k.one();
        let x = linalg::solve(&self.k, &cols, &rhs).expect("nonzero elements of a field are invertible");
        Some(self.from_coords(&x))
    }

    /// Inverse through the norm: `a^(p^k)` lies in K for some `k`, and
    /// `a^(-1) = a^(p^k - 1) / a^(p^k)`.
    pub fn inv_by_norm(&self, a: &TowerElement) -> Option<TowerElement> {
        if a.is_zero() {
            return None;
        }
        let p = self.characteristic();
        // a = A / d with polynomial coordinates keeps the products gcd-free
        let mut d = Poly::one();
        for (_, c) in &a.terms {
            let den = c.denominator();
            if !den.is_one() && den != &d {
                let g = gcd(&d, den, p);
                d = d.mul(&den.div_exact(&g, p).unwrap(), p);
            }
        }
        let d = self.k.from_poly(d);
        let a = &self.scale(&d, a);
        // prod = a^(1 + p + ... + p^(k-1)), cur = a^(p^k)
        let mut prod = self.one();
        let mut cur = a.clone();
        while cur.max_index().unwrap() != 0 {
            prod = self.mul(&prod, &cur);
            cur = self.frobenius(&cur, 1);
        }
        let factor = self.k.div(&d, cur.as_coeff().unwrap()).ok()?;
        Some(self.scale(&factor, &self.pow(&prod, p - 1)))
    }

    /// Columns of the K-matrix of multiplication by `a`.
    pub fn mult_columns(&self, a: &TowerElement) -> Vec<Vec<RatFunc>> {
        (0..self.dim).map(|j| self.coords(&self.mul(a, &self.basis(j)))).collect()
    }

    pub fn fmt_monomial(&self, idx: usize) -> String {
        let parts: Vec<String> = self
            .exps(idx)
            .iter()
            .zip(&self.gens)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, g)| if e == 1 { g.name.clone() } else { format!("{}^{}", g.name, e) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Canonical text form, e.g. `b*s^2 + c` or `(v + 1)/u*z1`.
    pub fn fmt_elem(&self, a: &TowerElement) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = a
            .terms
            .iter()
            .map(|(i, c)| {
                let coef = self.k.fmt(c);
                if *i == 0 {
                    coef
                } else if c.is_one() {
                    self.fmt_monomial(*i)
                } else if coef.contains(' ') {
                    format!("({coef})*{}", self.fmt_monomial(*i))
                } else {
                    format!("{coef}*{}", self.fmt_monomial(*i))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// `acc += c * e` in dense coordinates.
fn accumulate(k: &CoeffField, acc: &mut [RatFunc], c: &RatFunc, e: &TowerElement) {
    for (i, x) in &e.terms {
        let term = if x.is_one() { c.clone() } else { k.mul(c, x) };
        acc[*i] = k.add(&acc[*i], &term);
    }
}

impl Field for Tower {
    type Elem = TowerElement;

    fn zero(&self) -> TowerElement {
        TowerElement::zero()
    }

    fn one(&self) -> TowerElement {
        self.basis(0)
    }

    fn is_zero(&self, a: &TowerElement) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() || j < b.terms.len() {
            let ia = a.terms.get(i).map_or(usize::MAX, |t| t.0);
            let ib = b.terms.get(j).map_or(usize::MAX, |t| t.0);
            if ia < ib {
                out.push(a.terms[i].clone());
                i += 1;
            } else if ib < ia {
                out.push(b.terms[j].clone());
                j += 1;
            } else {
                let s = self.k.add(&a.terms[i].1, &b.terms[j].1);
                if !s.is_zero() {
                    out.push((ia, s));
                }
                i += 1;
                j += 1;
            }
        }
        TowerElement { terms: out }
    }

    fn neg(&self, a: &TowerElement) -> TowerElement {
        TowerElement { terms: a.terms.iter().map(|(i, c)| (*i, self.k.neg(c))).collect() }
    }

    fn mul(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        if a.is_zero() || b.is_zero() {
            return TowerElement::zero();
        }
        if let Some(c) = a.as_coeff() {
            return self.scale(c, b);
        }
        if let Some(c) = b.as_coeff() {
            return self.scale(c, a);
        }
        let mut acc = vec![self.k.zero(); self.dim];
        for (ia, ca) in &a.terms {
            for (ib, cb) in &b.terms {
                let c = self.k.mul(ca, cb);
                accumulate(&self.k, &mut acc, &c, &self.table[ia * self.dim + ib]);
            }
        }
        TowerElement::from_dense(acc)
    }

    /// Solves the multiplication-by-`a` system over K.
    fn inv(&self, a: &TowerElement) -> Option<TowerElement> {
        if a.is_zero() {
            return None;
        }
        if let Some(c) = a.as_coeff() {
            return Some(self.from_coeff(self.k.inv(c)?));
        }
        self.inv_by_norm(a)
    }

    fn weight(&self, a: &TowerElement) -> usize {
        a.terms.iter().map(|(_, c)| c.size()).sum()
    }
}
