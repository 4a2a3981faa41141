//! K-linear endomorphisms of `L` and their order filtration.
//!
//! An operator is stored by the images of the basis monomials. Under left
//! multiplication `End_K L` is then the `L`-vector space `L^N`, and every
//! step of the order filtration is an `L`-subspace of it. Each level is kept
//! as the echelonized set of `L`-linear functionals cutting it out, so
//! membership tests and orders need no linear algebra over `K` in `N^2`
//! unknowns.

use thiserror::Error;

use crate::coefffield::RatFunc;
use crate::field::Field;
use crate::linalg::Echelon;
use crate::tower::{Tower, TowerElement};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearOperator {
    cols: Vec<TowerElement>,
}

impl LinearOperator {
    pub fn from_columns(cols: Vec<TowerElement>) -> Self {
        LinearOperator { cols }
    }

    pub fn from_fn(t: &Tower, f: impl FnMut(usize) -> TowerElement) -> Self {
        LinearOperator { cols: (0..t.dim()).map(f).collect() }
    }

    pub fn identity(t: &Tower) -> Self {
        Self::from_fn(t, |j| t.basis(j))
    }

    pub fn zero(t: &Tower) -> Self {
        Self::from_fn(t, |_| TowerElement::zero())
    }

    /// Operator with the given K-matrix, `m[row][col]`.
    pub fn from_k_matrix(t: &Tower, m: &[Vec<RatFunc>]) -> Self {
        Self::from_fn(t, |j| t.from_coords(&m.iter().map(|row| row[j].clone()).collect::<Vec<_>>()))
    }

    pub fn k_matrix(&self, t: &Tower) -> Vec<Vec<RatFunc>> {
        let cols: Vec<Vec<RatFunc>> = self.cols.iter().map(|c| t.coords(c)).collect();
        (0..t.dim()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
    }

    pub fn columns(&self) -> &[TowerElement] {
        &self.cols
    }

    pub fn size(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    pub fn apply(&self, t: &Tower, a: &TowerElement) -> TowerElement {
        let mut acc = TowerElement::zero();
        for (j, c) in a.terms() {
            acc = t.add(&acc, &t.scale(c, &self.cols[*j]));
        }
        acc
    }

    /// `self ∘ other`.
    pub fn compose(&self, t: &Tower, other: &LinearOperator) -> Self {
        LinearOperator { cols: other.cols.iter().map(|c| self.apply(t, c)).collect() }
    }

    pub fn add(&self, t: &Tower, other: &LinearOperator) -> Self {
        LinearOperator { cols: self.cols.iter().zip(&other.cols).map(|(a, b)| t.add(a, b)).collect() }
    }

    pub fn sub(&self, t: &Tower, other: &LinearOperator) -> Self {
        LinearOperator { cols: self.cols.iter().zip(&other.cols).map(|(a, b)| t.sub(a, b)).collect() }
    }

    /// `mult(alpha) ∘ self`.
    pub fn scale(&self, t: &Tower, alpha: &TowerElement) -> Self {
        LinearOperator { cols: self.cols.iter().map(|c| t.mul(alpha, c)).collect() }
    }

    /// `self ∘ mult(alpha) - mult(alpha) ∘ self`.
    pub fn commutator(&self, t: &Tower, alpha: &TowerElement) -> Self {
        LinearOperator {
            cols: (0..t.dim())
                .map(|j| {
                    let m = t.basis(j);
                    let left = self.apply(t, &t.mul(alpha, &m));
                    t.sub(&left, &t.mul(alpha, &self.cols[j]))
                })
                .collect(),
        }
    }

    /// Whether the operator maps `K(x_1..x_i)` into itself.
    pub fn preserves_prefix(&self, t: &Tower, i: usize) -> bool {
        let pd = t.prefix_dim(i);
        self.cols[..pd].iter().all(|c| c.max_index().map_or(true, |m| m < pd))
    }

    /// The operator read as an operator on `K(x_1..x_i)`.
    pub fn restrict_to_prefix(&self, t: &Tower, i: usize) -> Result<LinearOperator, LinopsError> {
        if !self.preserves_prefix(t, i) {
            return Err(LinopsError::PrefixViolation);
        }
        Ok(LinearOperator { cols: self.cols[..t.prefix_dim(i)].to_vec() })
    }
}

pub fn mult_operator(t: &Tower, alpha: &TowerElement) -> LinearOperator {
    LinearOperator::from_fn(t, |j| t.mul(alpha, &t.basis(j)))
}

/// `[D, alpha] = D ∘ alpha - alpha ∘ D`.
pub fn commutator_elem(t: &Tower, d: &LinearOperator, alpha: &TowerElement) -> LinearOperator {
    d.commutator(t, alpha)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinopsError {
    #[error("operator does not map the prefix field into itself")]
    PrefixViolation,
}

/// The `L`-subspaces `Diff^0 <= Diff^1 <= ...` of `End_K L`.
#[derive(Clone, Debug)]
pub struct Filtration {
    tower: Tower,
    // levels[n] spans the L-functionals vanishing exactly on Diff^n
    levels: Vec<Echelon<Tower>>,
    // the unreduced rows that raised the rank of levels[n]; same span, but
    // without the coefficient growth of normalized pivots
    raw: Vec<Vec<Vec<TowerElement>>>,
}

impl Filtration {
    /// Computes levels `0..=n_max`, stopping early once `Diff^n` is all of
    /// `End_K L`.
    pub fn new(t: &Tower, n_max: usize) -> Filtration {
        let n = t.dim();
        // x_k * m_j for every generator and basis index
        let shifts: Vec<Vec<TowerElement>> = (0..t.num_gens())
            .map(|k| (0..n).map(|j| t.mul(&t.gen(k), &t.basis(j))).collect())
            .collect();
        let gens: Vec<TowerElement> = (0..t.num_gens()).map(|k| t.gen(k)).collect();
        let mut prev: Vec<Vec<TowerElement>> = (0..n)
            .map(|l| (0..n).map(|j| if j == l { t.one() } else { t.zero() }).collect())
            .collect();
        let mut levels = Vec::new();
        let mut raw = Vec::new();
        for _ in 0..=n_max {
            let mut ech = Echelon::new(n);
            let mut kept = Vec::new();
            'rows: for e in &prev {
                for (k, xk) in gens.iter().enumerate() {
                    let mut out = vec![TowerElement::zero(); n];
                    for (j, ej) in e.iter().enumerate() {
                        if ej.is_zero() {
                            continue;
                        }
                        for (l, c) in shifts[k][j].terms() {
                            out[*l] = t.add(&out[*l], &t.scale(c, ej));
                        }
                        out[j] = t.sub(&out[j], &t.mul(xk, ej));
                    }
                    if out.iter().any(|x| !x.is_zero()) && ech.insert(t, out.clone()) {
                        kept.push(out);
                        if ech.is_full() {
                            break 'rows;
                        }
                    }
                }
            }
            let done = ech.rank() == 0;
            levels.push(ech);
            prev = kept.clone();
            raw.push(kept);
            if done {
                break;
            }
        }
        Filtration { tower: t.clone(), levels, raw }
    }

    /// Computes the whole filtration.
    pub fn complete(t: &Tower) -> Filtration {
        Self::new(t, order_bound(t))
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    /// Highest computed level.
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Whether every operator has order at most `max_level`.
    pub fn is_complete(&self) -> bool {
        self.levels.last().unwrap().rank() == 0
    }

    fn level(&self, n: usize) -> &Echelon<Tower> {
        match self.levels.get(n) {
            Some(l) => l,
            None if self.is_complete() => self.levels.last().unwrap(),
            None => panic!("filtration level {n} was not computed"),
        }
    }

    pub fn dim_l(&self, n: usize) -> usize {
        self.tower.dim() - self.level(n).rank()
    }

    pub fn dim_k(&self, n: usize) -> usize {
        self.tower.dim() * self.dim_l(n)
    }

    pub fn contains(&self, n: usize, d: &LinearOperator) -> bool {
        let t = &self.tower;
        let rows = match self.raw.get(n) {
            Some(r) => r,
            None => {
                assert!(self.is_complete(), "filtration level {n} was not computed");
                self.raw.last().unwrap()
            }
        };
        rows.iter().all(|row| {
            let mut acc = TowerElement::zero();
            for (e, c) in row.iter().zip(d.columns()) {
                if !e.is_zero() && !c.is_zero() {
                    acc = t.add(&acc, &t.mul(e, c));
                }
            }
            acc.is_zero()
        })
    }

    /// Least `n` with `d` in `Diff^n`, or `None` if above the computed range.
    pub fn order(&self, d: &LinearOperator) -> Option<usize> {
        (0..self.levels.len()).find(|&n| self.contains(n, d))
    }

    /// An `L`-basis of `Diff^n`.
    pub fn l_basis(&self, n: usize) -> Vec<LinearOperator> {
        self.level(n).kernel(&self.tower).into_iter().map(LinearOperator::from_columns).collect()
    }
}

/// `sum_i (q_i - 1)`: the nilpotency bound for the diagonal ideal, hence an
/// upper bound for every order.
pub fn order_bound(t: &Tower) -> usize {
    t.generators().iter().map(|g| g.q - 1).sum()
}

pub fn diff_filtration(t: &Tower, n_max: usize) -> Filtration {
    Filtration::new(t, n_max)
}

/// Order of `d`, computing the full filtration.
pub fn order(t: &Tower, d: &LinearOperator) -> usize {
    Filtration::complete(t).order(d).expect("every endomorphism is a differential operator")
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn lucas(mut n: u64, mut k: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut acc = 1u64;
    while k > 0 || n > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        acc = acc * small_binomial(a, b, p) % p;
        n /= p;
        k /= p;
    }
    acc as u32
}

fn small_binomial(n: u64, k: u64, p: u64) -> u64 {
    // n < p, so the factorials are invertible mod p
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * crate::poly::mod_inv(den as u32, p as u32) as u64 % p
}

/// The divided power `(d/dx_i)^[m]` relative to the monomial basis of `t`:
/// `x^r ↦ C(r_i, m) x^{r - m e_i}`.
pub fn monomial_divided_power(t: &Tower, i: usize, m: usize) -> LinearOperator {
    let p = t.characteristic();
    let k = t.coeff_field();
    LinearOperator::from_fn(t, |j| {
        let mut r = t.exps(j);
        if r[i] < m {
            return TowerElement::zero();
        }
        let c = lucas(r[i] as u64, m as u64, p);
        if c == 0 {
            return TowerElement::zero();
        }
        r[i] -= m;
        t.scale(&k.constant(c as i64), &t.basis(t.index(&r)))
    })
}

/// Extends an operator on `K(x_1..x_i)` (given with `prefix_dim(i)` columns)
/// to `L`, acting coefficientwise on the monomials in the later generators.
pub fn normal_extension(t: &Tower, d: &LinearOperator, i: usize) -> Result<LinearOperator, LinopsError> {
    let pd = t.prefix_dim(i);
    assert_eq!(d.size(), pd, "operator must act on the prefix field");
    if d.columns().iter().any(|c| c.max_index().is_some_and(|m| m >= pd)) {
        return Err(LinopsError::PrefixViolation);
    }
    Ok(LinearOperator::from_fn(t, |j| {
        let (u, rest) = (j % pd, j - j % pd);
        let img = &d.columns()[u];
        shift(t, img, rest)
    }))
}

fn shift(t: &Tower, a: &TowerElement, offset: usize) -> TowerElement {
    let mut out = TowerElement::zero();
    for (idx, c) in a.terms() {
        out = t.add(&out, &t.scale(c, &t.basis(idx + offset)));
    }
    out
}

/// An `L`-subspace of `End_K L`.
#[derive(Clone, Debug)]
pub struct OperatorSubspace {
    ech: Echelon<Tower>,
}

impl OperatorSubspace {
    pub fn new(t: &Tower) -> Self {
        OperatorSubspace { ech: Echelon::new(t.dim()) }
    }

    pub fn spanned_by(t: &Tower, ops: &[LinearOperator]) -> Self {
        let mut s = Self::new(t);
        for d in ops {
            s.insert(t, d);
        }
        s
    }

    pub fn insert(&mut self, t: &Tower, d: &LinearOperator) -> bool {
        self.ech.insert(t, d.columns().to_vec())
    }

    pub fn contains(&self, t: &Tower, d: &LinearOperator) -> bool {
        self.ech.contains(t, d.columns())
    }

    pub fn dim_l(&self) -> usize {
        self.ech.rank()
    }

    pub fn dim_k(&self, t: &Tower) -> usize {
        self.ech.rank() * t.dim()
    }

    /// An `L`-basis in reduced echelon form.
    pub fn l_basis(&self) -> Vec<LinearOperator> {
        self.ech.rows().iter().map(|r| LinearOperator::from_columns(r.clone())).collect()
    }
}

/// `dim_K` of the `L`-span of `ops`.
pub fn l_span_dim(t: &Tower, ops: &[LinearOperator]) -> usize {
    OperatorSubspace::spanned_by(t, ops).dim_k(t)
}
