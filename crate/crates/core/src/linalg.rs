//! Exact linear algebra over an arbitrary [`Field`] context.
//!
//! The central type is [`Echelon`], an incrementally maintained reduced row
//! echelon form. Pivots are normalized to one and every entry stays in the
//! field's canonical form, so coefficient growth is bounded by the
//! canonical representatives themselves.

use crate::field::Field;

#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    ncols: usize,
    rows: Vec<Vec<F::Elem>>,
    pivots: Vec<usize>,
    // pivots are taken from columns below this bound whenever possible
    pivot_limit: usize,
}

impl<F: Field> Echelon<F> {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new(), pivots: Vec::new(), pivot_limit: ncols }
    }

    /// Echelon form for augmented systems: the trailing columns only receive
    /// a pivot when the leading `limit` entries of a reduced row all vanish.
    pub fn augmented(ncols: usize, limit: usize) -> Self {
        Echelon { ncols, rows: Vec::new(), pivots: Vec::new(), pivot_limit: limit }
    }

    pub fn from_rows<I: IntoIterator<Item = Vec<F::Elem>>>(field: &F, ncols: usize, rows: I) -> Self {
        let mut e = Self::new(ncols);
        for r in rows {
            e.insert(field, r);
        }
        e
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<F::Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Remainder of `v` after eliminating every pivot column.
    pub fn reduce(&self, field: &F, v: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(v.len(), self.ncols);
        let mut v = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if field.is_zero(&v[pc]) {
                continue;
            }
            let c = v[pc].clone();
            axpy(field, &mut v, &c, row);
        }
        v
    }

    /// Coordinates of `v` in terms of the stored rows, if `v` lies in their span.
    pub fn express(&self, field: &F, v: &[F::Elem]) -> Option<Vec<F::Elem>> {
        let coeffs: Vec<F::Elem> = self.pivots.iter().map(|&pc| v[pc].clone()).collect();
        let rem = self.reduce(field, v);
        if rem.iter().all(|x| field.is_zero(x)) {
            Some(coeffs)
        } else {
            None
        }
    }

    pub fn contains(&self, field: &F, v: &[F::Elem]) -> bool {
        self.reduce(field, v).iter().all(|x| field.is_zero(x))
    }

    /// Adds `v` to the row space; returns whether the rank grew.
    pub fn insert(&mut self, field: &F, v: Vec<F::Elem>) -> bool {
        let mut v = self.reduce(field, &v);
        let Some(pc) = choose_pivot(field, &v[..self.pivot_limit])
            .or_else(|| choose_pivot(field, &v[self.pivot_limit..]).map(|c| c + self.pivot_limit))
        else {
            return false;
        };
        let inv = field.inv(&v[pc]).expect("nonzero pivot");
        for x in v.iter_mut() {
            if !field.is_zero(x) {
                *x = field.mul(x, &inv);
            }
        }
        for row in self.rows.iter_mut() {
            if field.is_zero(&row[pc]) {
                continue;
            }
            let c = row[pc].clone();
            axpy(field, row, &c, &v);
        }
        let pos = self.pivots.partition_point(|&q| q < pc);
        self.pivots.insert(pos, pc);
        self.rows.insert(pos, v);
        true
    }

    /// Basis of `{ x : row . x = 0 for every stored row }`.
    pub fn kernel(&self, field: &F) -> Vec<Vec<F::Elem>> {
        let mut is_pivot = vec![false; self.ncols];
        for &pc in &self.pivots {
            is_pivot[pc] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut x = vec![field.zero(); self.ncols];
            x[free] = field.one();
            for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                if !field.is_zero(&row[free]) {
                    x[pc] = field.neg(&row[free]);
                }
            }
            out.push(x);
        }
        out
    }
}

fn choose_pivot<F: Field>(field: &F, v: &[F::Elem]) -> Option<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !field.is_zero(x))
        .min_by_key(|(i, x)| (field.weight(x), *i))
        .map(|(i, _)| i)
}

/// `v -= c * row`.
fn axpy<F: Field>(field: &F, v: &mut [F::Elem], c: &F::Elem, row: &[F::Elem]) {
    for (x, r) in v.iter_mut().zip(row) {
        if field.is_zero(r) {
            continue;
        }
        *x = field.sub(x, &field.mul(c, r));
    }
}

/// Solves `sum_k x_k * columns[k] = rhs`. Returns `None` when inconsistent;
/// when the columns are dependent an arbitrary solution is returned.
pub fn solve<F: Field>(field: &F, columns: &[Vec<F::Elem>], rhs: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let ncols = columns.len();
    let nrows = rhs.len();
    let mut ech = Echelon::augmented(ncols + 1, ncols);
    for r in 0..nrows {
        let mut row: Vec<F::Elem> = columns.iter().map(|c| c[r].clone()).collect();
        row.push(rhs[r].clone());
        if row.iter().all(|x| field.is_zero(x)) {
            continue;
        }
        ech.insert(field, row);
    }
    if ech.pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![field.zero(); ncols];
    for (row, &pc) in ech.rows.iter().zip(&ech.pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}

/// Rank of a list of vectors.
pub fn rank<F: Field>(field: &F, ncols: usize, vectors: impl IntoIterator<Item = Vec<F::Elem>>) -> usize {
    Echelon::from_rows(field, ncols, vectors).rank()
}

/// Inverse of a square matrix given by rows, or `None` if singular.
pub fn invert<F: Field>(field: &F, rows: &[Vec<F::Elem>]) -> Option<Vec<Vec<F::Elem>>> {
    let n = rows.len();
    let mut ech = Echelon::augmented(2 * n, n);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), n);
        let mut row = r.clone();
        row.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
        ech.insert(field, row);
    }
    if ech.rank() < n || ech.pivots.iter().any(|&pc| pc >= n) {
        return None;
    }
    // pivots are 0..n in order
    Some(ech.rows.into_iter().map(|r| r[n..].to_vec()).collect())
}
