use super::{Tower, TowerElement};
use crate::coefffield::CoeffField;
use crate::field::Field;
use crate::linalg::Echelon;

/// An intermediate field `K <= E <= L`, stored as a K-subspace of `L` in
/// monomial coordinates.
#[derive(Clone, Debug)]
pub struct Subfield {
    ech: Echelon<CoeffField>,
}

impl Subfield {
    pub fn base(tower: &Tower) -> Subfield {
        Self::prefix(tower, 0)
    }

    pub fn whole(tower: &Tower) -> Subfield {
        Self::prefix(tower, tower.num_gens())
    }

    /// `K(x_1..x_i)`.
    pub fn prefix(tower: &Tower, i: usize) -> Subfield {
        let k = tower.coeff_field();
        let mut ech = Echelon::new(tower.dim());
        for idx in 0..tower.prefix_dim(i) {
            ech.insert(k, tower.coords(&tower.basis(idx)));
        }
        Subfield { ech }
    }

    /// `K(elems)`.
    pub fn generated_by(tower: &Tower, elems: &[TowerElement]) -> Subfield {
        Self::base(tower).adjoin_all(tower, elems)
    }

    /// `E(a)`.
    pub fn adjoin(&self, tower: &Tower, a: &TowerElement) -> Subfield {
        self.adjoin_all(tower, std::slice::from_ref(a))
    }

    /// `E(elems)`: in a finite extension the ring generated is already a
    /// field, so it is enough to close the span under multiplication.
    pub fn adjoin_all(&self, tower: &Tower, elems: &[TowerElement]) -> Subfield {
        let k = tower.coeff_field();
        let mut ech = self.ech.clone();
        let mut queue = self.basis(tower);
        while let Some(b) = queue.pop() {
            for g in elems {
                let prod = tower.mul(&b, g);
                if ech.insert(k, tower.coords(&prod)) {
                    queue.push(prod);
                }
            }
        }
        Subfield { ech }
    }

    /// The K-span of `elems`, provided it contains 1 and is closed under
    /// multiplication.
    pub fn from_basis(tower: &Tower, elems: &[TowerElement]) -> Option<Subfield> {
        let k = tower.coeff_field();
        let mut ech = Echelon::new(tower.dim());
        for e in elems {
            ech.insert(k, tower.coords(e));
        }
        let sub = Subfield { ech };
        if !sub.contains(tower, &tower.one()) {
            return None;
        }
        let basis = sub.basis(tower);
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i..] {
                if !sub.contains(tower, &tower.mul(a, b)) {
                    return None;
                }
            }
        }
        Some(sub)
    }

    /// `[E:K]`.
    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn echelon(&self) -> &Echelon<CoeffField> {
        &self.ech
    }

    pub fn contains(&self, tower: &Tower, a: &TowerElement) -> bool {
        self.ech.contains(tower.coeff_field(), &tower.coords(a))
    }

    /// A K-basis in reduced echelon form.
    pub fn basis(&self, tower: &Tower) -> Vec<TowerElement> {
        self.ech.rows().iter().map(|r| tower.from_coords(r)).collect()
    }

    pub fn same_as(&self, tower: &Tower, other: &Subfield) -> bool {
        self.dim() == other.dim() && other.basis(tower).iter().all(|b| self.contains(tower, b))
    }

    /// Least `k` with `a^(p^k)` in this field.
    pub fn exponent_of(&self, tower: &Tower, a: &TowerElement) -> u32 {
        let bound = tower.total_degree_exp();
        let mut cur = a.clone();
        for k in 0..=bound {
            if self.contains(tower, &cur) {
                return k;
            }
            cur = tower.frobenius(&cur, 1);
        }
        panic!("exponent exceeds the sum of the degree exponents");
    }
}
