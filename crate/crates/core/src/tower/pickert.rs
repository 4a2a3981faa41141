use super::{Subfield, Tower, TowerElement, TowerError};
use crate::coefffield::{CoeffField, RatFunc};
use crate::field::Field;
use crate::linalg;

/// The generators reordered greedily by exponent, and the tower presented
/// in that order.
#[derive(Clone, Debug)]
pub struct PickertSequence {
    /// Declared generator indices in Pickert order.
    pub order: Vec<usize>,
    /// `e_1 >= e_2 >= ...`: exponent of each generator over the field
    /// generated by the previous ones.
    pub exponents: Vec<u32>,
    /// The same field presented with generators in Pickert order and
    /// degrees `p^{e_i}`.
    pub tower: Tower,
    // rows of the matrix taking declared coordinates to ordered ones
    to_ordered: Option<Vec<Vec<RatFunc>>>,
}

impl PickertSequence {
    pub fn is_identity(&self) -> bool {
        self.to_ordered.is_none()
    }

    /// Re-expresses an element of the declared tower in the ordered tower.
    pub fn to_ordered(&self, declared: &Tower, a: &TowerElement) -> TowerElement {
        let Some(m) = &self.to_ordered else {
            return a.clone();
        };
        let k = declared.coeff_field();
        self.tower.from_coords(&mat_vec(k, m, &declared.coords(a)))
    }
}

fn mat_vec(k: &CoeffField, rows: &[Vec<RatFunc>], v: &[RatFunc]) -> Vec<RatFunc> {
    rows.iter()
        .map(|row| {
            row.iter().zip(v).fold(k.zero(), |acc, (x, y)| {
                if x.is_zero() || y.is_zero() {
                    acc
                } else {
                    k.add(&acc, &k.mul(x, y))
                }
            })
        })
        .collect()
}

/// Greedy Pickert ordering: repeatedly pick the unchosen generator of
/// largest exponent over the field generated by the chosen ones, ties going
/// to declaration order.
pub fn pickert_order(tower: &Tower) -> Result<PickertSequence, TowerError> {
    let n = tower.num_gens();
    let mut chosen: Vec<usize> = Vec::new();
    let mut exponents = Vec::new();
    let mut field = Subfield::base(tower);
    while chosen.len() < n {
        let mut best: Option<(usize, u32)> = None;
        for g in (0..n).filter(|g| !chosen.contains(g)) {
            let e = field.exponent_of(tower, &tower.gen(g));
            if e == 0 {
                return Err(TowerError::RedundantGenerator { generator: tower.gens[g].name.clone() });
            }
            if best.map_or(true, |(_, b)| e > b) {
                best = Some((g, e));
            }
        }
        let (g, e) = best.unwrap();
        chosen.push(g);
        exponents.push(e);
        field = field.adjoin(tower, &tower.gen(g));
    }
    assert!(exponents.windows(2).all(|w| w[0] >= w[1]), "exponents must be non-increasing");

    if chosen.iter().enumerate().all(|(i, &g)| i == g) {
        return Ok(PickertSequence { order: chosen, exponents, tower: tower.clone(), to_ordered: None });
    }

    // ordered monomial basis, written in declared coordinates
    let k = tower.coeff_field();
    let p = tower.characteristic() as usize;
    let qs: Vec<usize> = exponents.iter().map(|&e| p.pow(e)).collect();
    let dim = tower.dim();
    assert_eq!(qs.iter().product::<usize>(), dim);
    let mut columns = Vec::with_capacity(dim);
    for mut idx in 0..dim {
        let mut exps = vec![0; n];
        for (slot, &q) in chosen.iter().zip(&qs) {
            exps[*slot] = idx % q;
            idx /= q;
        }
        columns.push(tower.coords(&tower.monomial(&exps)));
    }
    let b_rows: Vec<Vec<RatFunc>> = (0..dim).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();
    let inv = linalg::invert(k, &b_rows).expect("ordered monomials form a basis");

    let mut seq = PickertSequence {
        order: chosen.clone(),
        exponents: exponents.clone(),
        tower: Tower::base(k.clone()),
        to_ordered: Some(inv),
    };
    let mut prefix_dim = 1;
    for (slot, (&g, &e)) in chosen.iter().zip(&exponents).enumerate() {
        let y = tower.frobenius(&tower.gen(g), e);
        let v = mat_vec(k, seq.to_ordered.as_ref().unwrap(), &tower.coords(&y));
        if v[prefix_dim..].iter().any(|c| !c.is_zero()) {
            return Err(TowerError::StructureViolation { generator: tower.gens[g].name.clone() });
        }
        let rel = TowerElement::from_dense(v[..prefix_dim].to_vec());
        seq.tower = seq.tower.extend(&tower.gens[g].name, e, rel)?;
        prefix_dim *= qs[slot];
    }
    Ok(seq)
}

/// Normal form of `x_i^{q_i}` in the ordered tower, with the flag saying
/// whether it is a polynomial in `q_i`-th powers of earlier generators.
pub fn structure_equation(seq: &PickertSequence, i: usize) -> Result<(TowerElement, bool), TowerError> {
    let t = &seq.tower;
    let g = &t.generators()[i];
    let divisible = g.relation.terms().iter().all(|(idx, _)| t.exps(*idx).iter().all(|r| r % g.q == 0));
    if !divisible {
        return Err(TowerError::StructureViolation { generator: g.name.clone() });
    }
    Ok((g.relation.clone(), true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PickertOutcome {
    Modular,
    /// First position in Pickert order whose exponent over the prefix
    /// differs from its exponent over K. Not a non-modularity verdict.
    Inconclusive { index: usize },
}

/// Sound-only modularity test: if every `e_i` equals `exp[x_i:K]` then
/// `L` is the tensor product of the `K(x_i)`.
pub fn modular_by_pickert(seq: &PickertSequence) -> PickertOutcome {
    let t = &seq.tower;
    for (i, &e) in seq.exponents.iter().enumerate() {
        if t.exponent_over_prefix(&t.gen(i), 0) != e {
            return PickertOutcome::Inconclusive { index: i };
        }
    }
    PickertOutcome::Modular
}
