use super::{Tower, TowerElement, TowerError};
use crate::coefffield::CoeffField;
use crate::field::Field;
use crate::semilinear::pth_root_in_l;
use crate::spec::{Expr, TowerSpec};

/// Validates a spec and builds its tower, rejecting non-triangular
/// relations, division by generators and non-minimal degrees.
pub fn build_tower(spec: &TowerSpec) -> Result<Tower, TowerError> {
    let k = CoeffField::new(spec.p, spec.params.clone())?;
    for (i, name) in spec.params.iter().enumerate() {
        if spec.params[..i].contains(name) {
            return Err(TowerError::DuplicateName(name.clone()));
        }
    }
    let mut tower = Tower::base(k);
    let p = spec.p as u64;
    for (i, g) in spec.gens.iter().enumerate() {
        if spec.params.contains(&g.name) || spec.gens[..i].iter().any(|h| h.name == g.name) {
            return Err(TowerError::DuplicateName(g.name.clone()));
        }
        if g.degree_exp == 0 {
            return Err(TowerError::InvalidDegree { generator: g.name.clone() });
        }
        let rel = eval_expr(&tower, &g.relation, &g.name)?;
        // X^(p^d) - g is irreducible over F exactly when g is not a p-th power in F
        let mut roots = 0;
        let mut cur = rel.clone();
        while roots < g.degree_exp {
            match pth_root_in_l(&tower, &cur, 1) {
                Some(r) => {
                    roots += 1;
                    cur = r;
                }
                None => break,
            }
        }
        if roots > 0 {
            return Err(TowerError::NonMinimalDegree {
                generator: g.name.clone(),
                declared: p.pow(g.degree_exp),
                minimal: p.pow(g.degree_exp - roots),
            });
        }
        tower = tower.extend(&g.name, g.degree_exp, rel)?;
        debug_assert_eq!(tower.exponent_over_prefix(&tower.gen(i), i), g.degree_exp);
    }
    Ok(tower)
}

/// Evaluates a relation expression in `tower`, whose generators are the
/// ones declared before `generator`.
pub fn eval_expr(tower: &Tower, expr: &Expr, generator: &str) -> Result<TowerElement, TowerError> {
    let k = tower.coeff_field();
    Ok(match expr {
        Expr::Int(n) => tower.from_coeff(k.constant((*n % k.characteristic() as u64) as i64)),
        Expr::Name(name) => {
            if let Some(j) = k.param_names().iter().position(|p| p == name) {
                tower.from_coeff(k.param(j))
            } else if let Some(j) = tower.generator_index(name) {
                tower.gen(j)
            } else {
                return Err(TowerError::NonTriangular { generator: generator.to_string(), name: name.clone() });
            }
        }
        Expr::Neg(a) => tower.neg(&eval_expr(tower, a, generator)?),
        Expr::Add(a, b) => tower.add(&eval_expr(tower, a, generator)?, &eval_expr(tower, b, generator)?),
        Expr::Sub(a, b) => tower.sub(&eval_expr(tower, a, generator)?, &eval_expr(tower, b, generator)?),
        Expr::Mul(a, b) => tower.mul(&eval_expr(tower, a, generator)?, &eval_expr(tower, b, generator)?),
        Expr::Div(a, b) => {
            if b.mentions(|n| tower.generator_index(n).is_some()) {
                return Err(TowerError::DivisionByGenerator { generator: generator.to_string() });
            }
            let den = eval_expr(tower, b, generator)?;
            let Some(den) = den.as_coeff() else {
                return Err(TowerError::ZeroDenominator { generator: generator.to_string() });
            };
            let inv = k.inv(den).expect("nonzero");
            tower.scale(&inv, &eval_expr(tower, a, generator)?)
        }
        Expr::Pow(a, e) => tower.pow(&eval_expr(tower, a, generator)?, *e),
    })
}
