//! Linear algebra over the subfields `K^{p^j}` and `L^{p^j}`.
//!
//! An element of `L` is written `sum_{r, g} t^g x^r * c_{r,g}^{p^j}` with
//! `g_k < p^j`; the vector of `c_{r,g}` (the untwisted coordinates) is an
//! ordinary `K`-vector of length `N * p^{jm}`, and `K^{p^j}`-linear algebra on
//! `L` becomes `K`-linear algebra on these vectors.

use std::env;

use thiserror::Error;

use crate::coefffield::{CoeffField, RatFunc};
use crate::field::Field;
use crate::linalg::{self, Echelon};
use crate::linops::{Filtration, LinearOperator};
use crate::poly::Poly;
use crate::tower::{Subfield, Tower, TowerElement};

/// Default bound on `N^2 * p^{im}`, the `K^{p^i}`-dimension of `End_K L`.
pub const DEFAULT_DIM_CEILING: usize = 5000;

/// Dimension ceiling from `PITOWER_DIM_CEILING`, or the default when unset.
pub fn dim_ceiling_from_env() -> Result<usize, String> {
    match env::var("PITOWER_DIM_CEILING") {
        Err(_) => Ok(DEFAULT_DIM_CEILING),
        Ok(v) => v.trim().parse().map_err(|_| format!("PITOWER_DIM_CEILING is not a nonnegative integer: {v:?}")),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemilinearError {
    #[error("level {level} needs dimension {required}, above the ceiling {ceiling}")]
    CeilingExceeded { level: u32, required: usize, ceiling: usize },
}

/// `K^{p^i}`-dimension of `End_K L`, `N^2 p^{im}`.
pub fn twisted_end_dim(t: &Tower, i: u32) -> usize {
    t.dim().saturating_mul(t.dim()).saturating_mul(t.coeff_field().twist_dim(i))
}

pub fn check_ceiling(t: &Tower, i: u32, ceiling: usize) -> Result<(), SemilinearError> {
    let required = twisted_end_dim(t, i);
    if required > ceiling {
        Err(SemilinearError::CeilingExceeded { level: i, required, ceiling })
    } else {
        Ok(())
    }
}

/// Untwisted coordinates of `a` at level `j`, indexed `r * p^{jm} + g`.
pub fn untwisted_coords(t: &Tower, a: &TowerElement, j: u32) -> Vec<RatFunc> {
    let k = t.coeff_field();
    let pdim = k.twist_dim(j);
    let mut v = vec![k.zero(); t.dim() * pdim];
    for (r, c) in a.terms() {
        for (g, x) in k.untwist(c, j).into_iter().enumerate() {
            v[r * pdim + g] = x;
        }
    }
    v
}

/// Inverse of [`untwisted_coords`].
pub fn from_untwisted(t: &Tower, v: &[RatFunc], j: u32) -> TowerElement {
    let k = t.coeff_field();
    let pdim = k.twist_dim(j);
    let coords: Vec<RatFunc> = v.chunks(pdim).map(|chunk| k.retwist(chunk, j)).collect();
    t.from_coords(&coords)
}

/// A `K^{p^j}`-subspace of `L` in untwisted coordinates.
#[derive(Clone, Debug)]
pub struct TwistedSubspace {
    level: u32,
    ech: Echelon<CoeffField>,
}

impl TwistedSubspace {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Dimension over `K^{p^j}`.
    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn contains(&self, t: &Tower, a: &TowerElement) -> bool {
        self.ech.contains(t.coeff_field(), &untwisted_coords(t, a, self.level))
    }

    pub fn basis(&self, t: &Tower) -> Vec<TowerElement> {
        self.ech.rows().iter().map(|r| from_untwisted(t, r, self.level)).collect()
    }
}

/// The parameter monomial `t^g` with mixed-radix index `g` at level `j`.
fn param_monomial(t: &Tower, j: u32, g: usize) -> TowerElement {
    let k = t.coeff_field();
    t.from_coeff(k.from_poly(Poly::monomial(k.twist_monomial(j, g), 1)))
}

fn frobenius_basis(t: &Tower, j: u32) -> Vec<TowerElement> {
    (0..t.dim()).map(|s| t.frobenius(&t.basis(s), j)).collect()
}

/// `L^{p^j}` as a `K^{p^j}`-space, spanned by the `p^j`-th powers of the
/// basis monomials.
pub fn frobenius_image_subspace(t: &Tower, j: u32) -> TwistedSubspace {
    let k = t.coeff_field();
    let mut ech = Echelon::new(t.dim() * k.twist_dim(j));
    for w in frobenius_basis(t, j) {
        ech.insert(k, untwisted_coords(t, &w, j));
    }
    TwistedSubspace { level: j, ech }
}

/// The `p^j`-th root of `a` in `L`, if there is one.
pub fn pth_root_in_l(t: &Tower, a: &TowerElement, j: u32) -> Option<TowerElement> {
    if j == 0 || a.is_zero() {
        return Some(a.clone());
    }
    let k = t.coeff_field();
    // a = sum_s b_s^{p^j} m_s^{p^j} is K-linear in the untwisted b
    let cols: Vec<Vec<RatFunc>> = frobenius_basis(t, j).iter().map(|w| untwisted_coords(t, w, j)).collect();
    let b = linalg::solve(k, &cols, &untwisted_coords(t, a, j))?;
    let root = t.from_coords(&b);
    debug_assert_eq!(t.frobenius(&root, j), *a);
    Some(root)
}

/// `L^{p^j} ∩ K`: combinations of the `m_s^{p^j}` with no component
/// outside `K`.
pub fn intersect_with_field_k(t: &Tower, j: u32) -> TwistedSubspace {
    let k = t.coeff_field();
    let pdim = k.twist_dim(j);
    let vecs: Vec<Vec<RatFunc>> = frobenius_basis(t, j).iter().map(|w| untwisted_coords(t, w, j)).collect();
    let n = vecs.len();
    // rows are the coordinates outside K, columns the spanning vectors
    let mut rows = Echelon::new(n);
    for coord in pdim..t.dim() * pdim {
        let row: Vec<RatFunc> = vecs.iter().map(|v| v[coord].clone()).collect();
        if row.iter().any(|x| !x.is_zero()) {
            rows.insert(k, row);
            if rows.is_full() {
                break;
            }
        }
    }
    let mut ech = Echelon::new(t.dim() * pdim);
    for b in rows.kernel(k) {
        let mut v = vec![k.zero(); t.dim() * pdim];
        for (bs, vs) in b.iter().zip(&vecs) {
            if bs.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(vs) {
                if !y.is_zero() {
                    *x = k.add(x, &k.mul(bs, y));
                }
            }
        }
        ech.insert(k, v);
    }
    TwistedSubspace { level: j, ech }
}

/// `dim_{K^{p^j}} (L^{p^j} ∩ E)`, by `dim A + dim B - dim (A + B)`.
pub fn frobenius_image_meet_dim(t: &Tower, e: &Subfield, j: u32) -> usize {
    let k = t.coeff_field();
    let pdim = k.twist_dim(j);
    let len = t.dim() * pdim;
    let a = frobenius_image_subspace(t, j);
    let mut b = Echelon::new(len);
    let tw: Vec<TowerElement> = (0..pdim)
        .map(|g| param_monomial(t, j, g))
        .collect();
    for x in e.basis(t) {
        for m in &tw {
            b.insert(k, untwisted_coords(t, &t.mul(m, &x), j));
        }
    }
    let dim_b = b.rank();
    let mut sum = b;
    for row in a.ech.rows() {
        sum.insert(k, row.clone());
    }
    a.dim() + dim_b - sum.rank()
}

/// `L` as an `L^{p^i}`-space: a basis `tau_a` (with `tau_0 = 1`) and the
/// decomposition `alpha = sum_a (beta_a)^{p^i} tau_a`.
#[derive(Clone, Debug)]
pub struct FrobeniusModule {
    level: u32,
    taus: Vec<TowerElement>,
    // inverse of the matrix with columns u(m_s^{p^i} tau_a), index a * N + s
    inverse: Vec<Vec<RatFunc>>,
}

impl FrobeniusModule {
    pub fn new(t: &Tower, i: u32) -> FrobeniusModule {
        let k = t.coeff_field();
        let n = t.dim();
        let pdim = k.twist_dim(i);
        let ws = frobenius_basis(t, i);
        let mut ech = Echelon::new(n * pdim);
        let mut taus = Vec::new();
        let mut columns: Vec<Vec<RatFunc>> = Vec::new();
        'outer: for r in 0..n {
            for g in 0..pdim {
                let tau = t.mul(&param_monomial(t, i, g), &t.basis(r));
                let cols: Vec<Vec<RatFunc>> = ws.iter().map(|w| untwisted_coords(t, &t.mul(w, &tau), i)).collect();
                let mut trial = ech.clone();
                if cols.iter().all(|c| trial.insert(k, c.clone())) {
                    ech = trial;
                    taus.push(tau);
                    columns.extend(cols);
                    if ech.is_full() {
                        break 'outer;
                    }
                }
            }
        }
        assert!(ech.is_full(), "L has no basis over its Frobenius image");
        let len = n * pdim;
        let rows: Vec<Vec<RatFunc>> = (0..len).map(|row| columns.iter().map(|c| c[row].clone()).collect()).collect();
        let inverse = linalg::invert(k, &rows).expect("independent columns");
        FrobeniusModule { level: i, taus, inverse }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `[L : L^{p^i}]`.
    pub fn rank(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[TowerElement] {
        &self.taus
    }

    /// `beta` with `alpha = sum_a beta_a^{p^i} tau_a`.
    pub fn decompose(&self, t: &Tower, alpha: &TowerElement) -> Vec<TowerElement> {
        let k = t.coeff_field();
        let n = t.dim();
        let v = untwisted_coords(t, alpha, self.level);
        let nz: Vec<(usize, &RatFunc)> = v.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
        let c: Vec<RatFunc> = self
            .inverse
            .iter()
            .map(|row| {
                nz.iter().fold(k.zero(), |acc, (idx, x)| {
                    if row[*idx].is_zero() {
                        acc
                    } else {
                        k.add(&acc, &k.mul(&row[*idx], x))
                    }
                })
            })
            .collect();
        c.chunks(n).map(|chunk| t.from_coords(chunk)).collect()
    }

    pub fn recompose(&self, t: &Tower, beta: &[TowerElement]) -> TowerElement {
        beta.iter().zip(&self.taus).fold(t.zero(), |acc, (b, tau)| {
            t.add(&acc, &t.mul(&t.frobenius(b, self.level), tau))
        })
    }
}

/// `A_i`, stored as an `L^{p^i}`-basis.
#[derive(Clone, Debug)]
pub struct ASubspace {
    pub level: u32,
    pub ops: Vec<LinearOperator>,
}

impl ASubspace {
    /// Dimension over `K^{p^i}`.
    pub fn dim_twisted(&self, t: &Tower) -> usize {
        self.ops.len() * t.dim()
    }
}

/// Direct membership test for `A_i`: order at most `p^i` and every
/// `L^{p^j}`, `1 <= j <= i`, mapped into itself.
pub fn in_a(t: &Tower, filtration: &Filtration, i: u32, d: &LinearOperator) -> bool {
    let bound = (t.characteristic() as usize).pow(i);
    if !filtration.contains(bound, d) {
        return false;
    }
    (1..=i).all(|j| {
        (0..t.dim()).all(|r| {
            let w = t.frobenius(&t.basis(r), j);
            pth_root_in_l(t, &d.apply(t, &w), j).is_some()
        })
    })
}

/// `A_i = { D in Diff^{p^i} : D(L^{p^j}) <= L^{p^j} for 1 <= j <= i }`.
///
/// With an `L`-basis `B_b` of `Diff^{p^i}` and an `L^{p^i}`-basis `tau_a`
/// of `L`, every `D` in `Diff^{p^i}` is `sum y_{ab}^{p^i} tau_a B_b` with
/// `y_{ab}` in `L`, and the membership conditions become `L`-linear in `y`.
pub fn compute_a(t: &Tower, filtration: &Filtration, i: u32, ceiling: usize) -> Result<ASubspace, SemilinearError> {
    check_ceiling(t, i, ceiling)?;
    let k = t.coeff_field();
    let n = t.dim();
    let p = t.characteristic() as usize;
    let fm = FrobeniusModule::new(t, i);
    let prank = fm.rank();
    let bs = filtration.l_basis(p.pow(i));
    let unknowns = bs.len() * prank;

    let mut eqs: Echelon<Tower> = Echelon::new(unknowns);
    for j in 1..=i {
        // S_j: decompositions of an L^{p^i}-spanning set of L^{p^j}
        let mut sj: Echelon<Tower> = Echelon::new(prank);
        let inner = k.twist_dim(i - j);
        'span: for r in 0..n {
            for g in 0..inner {
                let mono = t.mul(&param_monomial(t, i - j, g), &t.basis(r));
                sj.insert(t, fm.decompose(t, &t.frobenius(&mono, j)));
                if sj.is_full() {
                    break 'span;
                }
            }
        }
        if sj.is_full() {
            continue;
        }
        for r in 0..n {
            let w = t.frobenius(&t.basis(r), j);
            // per unknown (b, a): reduced decomposition of tau_a B_b(w)
            let mut cols: Vec<Vec<TowerElement>> = Vec::with_capacity(unknowns);
            for b in &bs {
                let img = b.apply(t, &w);
                for tau in fm.taus() {
                    cols.push(sj.reduce(t, &fm.decompose(t, &t.mul(tau, &img))));
                }
            }
            for c in 0..prank {
                let row: Vec<TowerElement> = cols.iter().map(|col| col[c].clone()).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    eqs.insert(t, row);
                }
            }
        }
    }

    let mut ops = Vec::new();
    for y in eqs.kernel(t) {
        let mut d = LinearOperator::zero(t);
        for (bi, b) in bs.iter().enumerate() {
            for (ai, tau) in fm.taus().iter().enumerate() {
                let yab = &y[bi * prank + ai];
                if yab.is_zero() {
                    continue;
                }
                let coef = t.mul(&t.frobenius(yab, i), tau);
                d = d.add(t, &b.scale(t, &coef));
            }
        }
        ops.push(d);
    }
    Ok(ASubspace { level: i, ops })
}
