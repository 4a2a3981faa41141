//! Modularity of `L/K`: the linear-disjointness oracle, the spanning test
//! through `A_i`, the constructive witness, the modular closure, and the
//! field/operator-algebra correspondence.

use rayon::prelude::*;
use thiserror::Error;

use crate::coefffield::RatFunc;
use crate::field::Field;
use crate::linalg::{self, Echelon};
use crate::linops::{
    l_span_dim, monomial_divided_power, mult_operator, normal_extension, Filtration, LinearOperator, OperatorSubspace,
};
use crate::semilinear::{
    compute_a, frobenius_image_meet_dim, intersect_with_field_k, pth_root_in_l, SemilinearError,
};
use crate::tower::{
    modular_by_pickert, pickert_order, structure_equation, PickertOutcome, PickertSequence, Subfield, Tower,
    TowerElement, TowerError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModularityError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
    #[error("witness construction failed verification: {0}")]
    VerificationFailed(String),
    #[error("the given subspace is not a subfield")]
    NotAField,
    #[error("the given operator space is not an algebra containing L")]
    NotAnAlgebra,
}

/// `max_k exp[x_k : K]`, the exponent of `L/K`.
pub fn exponent(t: &Tower) -> u32 {
    (0..t.num_gens()).map(|k| t.exponent_over_prefix(&t.gen(k), 0)).max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointLevel {
    pub level: u32,
    /// `dim_K K[L^{p^i}]`
    pub d1: usize,
    /// `dim_{K^{p^i}} (L^{p^i} ∩ K)`
    pub d2: usize,
    pub disjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointnessOutcome {
    pub modular: bool,
    pub levels: Vec<DisjointLevel>,
}

/// Reference oracle: `L/K` is modular iff `L^{p^i}` and `K` are linearly
/// disjoint over their intersection for every `i`, i.e.
/// `dim_K K[L^{p^i}] * dim (L^{p^i} ∩ K) = N`.
pub fn modular_by_disjointness(t: &Tower) -> DisjointnessOutcome {
    let k = t.coeff_field();
    let levels: Vec<DisjointLevel> = (1..exponent(t))
        .into_par_iter()
        .map(|i| {
            let ws = (0..t.dim()).map(|s| t.coords(&t.frobenius(&t.basis(s), i)));
            let d1 = linalg::rank(k, t.dim(), ws);
            let d2 = intersect_with_field_k(t, i).dim();
            DisjointLevel { level: i, d1, d2, disjoint: d1 * d2 == t.dim() }
        })
        .collect();
    DisjointnessOutcome { modular: levels.iter().all(|l| l.disjoint), levels }
}

/// The disjointness test for `L/E`, `E` an intermediate field:
/// `dim_K (E L^{p^i}) * dim_{K^{p^i}} (L^{p^i} ∩ E) = N * dim_K E`.
pub fn modular_over(t: &Tower, e: &Subfield) -> DisjointnessOutcome {
    let k = t.coeff_field();
    let ebasis = e.basis(t);
    let levels: Vec<DisjointLevel> = (1..exponent(t))
        .into_par_iter()
        .map(|i| {
            let mut span = Echelon::new(t.dim());
            for s in 0..t.dim() {
                let w = t.frobenius(&t.basis(s), i);
                for b in &ebasis {
                    span.insert(k, t.coords(&t.mul(b, &w)));
                }
            }
            let d1 = span.rank();
            let d2 = frobenius_image_meet_dim(t, e, i);
            DisjointLevel { level: i, d1, d2, disjoint: d1 * d2 == t.dim() * e.dim() }
        })
        .collect();
    DisjointnessOutcome { modular: levels.iter().all(|l| l.disjoint), levels }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanStatus {
    Surjective,
    NotSurjective,
    Refused { required: usize, ceiling: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanLevel {
    pub level: u32,
    pub status: SpanStatus,
    /// `dim_K` of the `L`-span of `A_i`, when computed.
    pub span_dim: Option<usize>,
    /// `dim_K Diff^{p^i}`.
    pub diff_dim: usize,
    /// Size of the `L^{p^i}`-basis of `A_i`, when computed.
    pub a_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanOutcome {
    /// `None` when some level was refused and no computed level failed.
    pub modular: Option<bool>,
    pub levels: Vec<SpanLevel>,
}

fn span_filtration(t: &Tower) -> Filtration {
    let e = exponent(t);
    let top = if e >= 2 { (t.characteristic() as usize).pow(e - 1) } else { 0 };
    Filtration::new(t, top)
}

/// Spanning test: for `1 <= i < e`, does the `L`-span of `A_i` fill
/// `Diff^{p^i}`?
pub fn modular_by_span(t: &Tower, ceiling: usize) -> SpanOutcome {
    let f = span_filtration(t);
    span_with(t, &f, ceiling)
}

fn span_with(t: &Tower, f: &Filtration, ceiling: usize) -> SpanOutcome {
    let p = t.characteristic() as usize;
    let levels: Vec<SpanLevel> = (1..exponent(t))
        .into_par_iter()
        .map(|i| {
            let diff_dim = f.dim_k(p.pow(i));
            match compute_a(t, f, i, ceiling) {
                Ok(a) => {
                    let span = l_span_dim(t, &a.ops);
                    let status = if span == diff_dim { SpanStatus::Surjective } else { SpanStatus::NotSurjective };
                    SpanLevel { level: i, status, span_dim: Some(span), diff_dim, a_rank: Some(a.ops.len()) }
                }
                Err(SemilinearError::CeilingExceeded { required, ceiling, .. }) => SpanLevel {
                    level: i,
                    status: SpanStatus::Refused { required, ceiling },
                    span_dim: None,
                    diff_dim,
                    a_rank: None,
                },
            }
        })
        .collect();
    let failed = levels.iter().any(|l| l.status == SpanStatus::NotSurjective);
    let refused = levels.iter().any(|l| matches!(l.status, SpanStatus::Refused { .. }));
    let modular = if failed {
        Some(false)
    } else if refused {
        None
    } else {
        Some(true)
    };
    SpanOutcome { modular, levels }
}

/// Non-modularity certificate, expressed in the Pickert-ordered tower.
#[derive(Clone, Debug)]
pub struct WitnessCertificate {
    /// Pickert position of `z`.
    pub index: usize,
    pub z_name: String,
    /// `q = p^{e_i}`
    pub q: usize,
    /// `z^q = f`, the structure equation.
    pub f: TowerElement,
    /// Basis indices of the terms of `f` whose coefficient is not a `q`-th power.
    pub c_terms: Vec<usize>,
    /// Pickert position of the chosen earlier variable.
    pub variable: usize,
    pub variable_name: String,
    pub b1: usize,
    /// Largest power of `p` not exceeding `q * b1`.
    pub big_q: usize,
    pub operator: LinearOperator,
    pub verification: WitnessVerification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessVerification {
    pub order: usize,
    /// `log_p Q`: the level whose `A`-span must miss the operator.
    pub level: u32,
    /// Operator applied to `z^q`.
    pub image_of_zq: TowerElement,
    pub image_has_qth_root: bool,
    /// Operator applied to `x^Q` for the chosen variable.
    pub image_of_xq: TowerElement,
}

impl WitnessVerification {
    pub fn passed(&self, big_q: usize) -> bool {
        !self.image_has_qth_root && self.image_of_xq.as_coeff().is_some_and(|c| c.is_one()) && self.order == big_q
    }
}

/// Re-derives the verification record of an operator claimed as a witness.
pub fn verify_witness(
    t: &Tower,
    z: usize,
    q_exp: u32,
    variable: usize,
    big_q: usize,
    d: &LinearOperator,
) -> WitnessVerification {
    let p = t.characteristic() as usize;
    let zq = t.frobenius(&t.gen(z), q_exp);
    let image_of_zq = d.apply(t, &zq);
    let image_has_qth_root = pth_root_in_l(t, &image_of_zq, q_exp).is_some();
    let image_of_xq = d.apply(t, &t.pow(&t.gen(variable), big_q as u32));
    let order = Filtration::new(t, big_q).order(d).unwrap_or(usize::MAX);
    let mut level = 0;
    while p.pow(level) < big_q {
        level += 1;
    }
    WitnessVerification { order, level, image_of_zq, image_has_qth_root, image_of_xq }
}

#[derive(Clone, Debug)]
pub struct WitnessSearch {
    pub sequence: PickertSequence,
    pub certificate: Option<WitnessCertificate>,
    /// One line per mismatch index that did not yield a witness.
    pub notes: Vec<String>,
}

/// Searches the Pickert sequence for the first exponent mismatch that
/// yields a verified witness operator. Errors when a witness was built but
/// failed verification and nothing else verified.
pub fn find_witness(t: &Tower) -> Result<WitnessSearch, ModularityError> {
    let seq = pickert_order(t)?;
    let tw = &seq.tower;
    let p = tw.characteristic() as usize;
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (i, &e) in seq.exponents.iter().enumerate() {
        let name = tw.generators()[i].name.clone();
        if tw.exponent_over_prefix(&tw.gen(i), 0) == e {
            continue;
        }
        let q = p.pow(e);
        let (f, _) = structure_equation(&seq, i)?;
        let c_terms: Vec<usize> = f
            .terms()
            .iter()
            .filter(|(_, c)| pth_root_in_l(tw, &tw.from_coeff(c.clone()), e).is_none())
            .map(|(r, _)| *r)
            .collect();
        if c_terms.len() < 2 {
            notes.push(format!(
                "{name}: {} coefficient(s) of the structure equation are not {q}-th powers",
                c_terms.len()
            ));
            continue;
        }
        let divided: Vec<Vec<usize>> = c_terms.iter().map(|&r| tw.exps(r).iter().map(|x| x / q).collect()).collect();
        let Some(var) = (0..i).find(|&k| divided.iter().any(|d| d[k] != divided[0][k])) else {
            notes.push(format!("{name}: the non-{q}-th-power terms share all divided degrees"));
            continue;
        };
        let b1 = divided.iter().map(|d| d[var]).max().unwrap();
        let mut big_q = 1;
        while big_q * p <= q * b1 {
            big_q *= p;
        }
        let prefix = tw.prefix(var + 1);
        let local = monomial_divided_power(&prefix, var, big_q);
        let operator = normal_extension(tw, &local, var + 1).expect("divided powers preserve their prefix");
        let verification = verify_witness(tw, i, e, var, big_q, &operator);
        let var_name = tw.generators()[var].name.clone();
        if verification.passed(big_q) {
            return Ok(WitnessSearch {
                certificate: Some(WitnessCertificate {
                    index: i,
                    z_name: name,
                    q,
                    f,
                    c_terms,
                    variable: var,
                    variable_name: var_name,
                    b1,
                    big_q,
                    operator,
                    verification,
                }),
                sequence: seq,
                notes,
            });
        }
        failures.push(format!(
            "{name}: divided power of {var_name} with Q = {big_q} has order {}, image {} ({})",
            verification.order,
            tw.fmt_elem(&verification.image_of_zq),
            if verification.image_has_qth_root { "a q-th power" } else { "not a q-th power" }
        ));
    }
    if !failures.is_empty() {
        return Err(ModularityError::VerificationFailed(failures.join("; ")));
    }
    Ok(WitnessSearch { sequence: seq, certificate: None, notes })
}

/// `{ alpha : [D, alpha] = 0 for every D }` for an `L`-spanning set of
/// operators, as a K-subspace of `L`.
fn commutant(t: &Tower, ops: &[LinearOperator]) -> Vec<TowerElement> {
    let k = t.coeff_field();
    let n = t.dim();
    let brackets: Vec<Vec<LinearOperator>> =
        ops.iter().map(|d| (0..n).map(|r| d.commutator(t, &t.basis(r))).collect()).collect();
    let mut ech: Echelon<_> = Echelon::new(n);
    'outer: for per_op in &brackets {
        for j in 0..n {
            let cols: Vec<Vec<RatFunc>> = per_op.iter().map(|c| t.coords(&c.columns()[j])).collect();
            for l in 0..n {
                let row: Vec<RatFunc> = cols.iter().map(|c| c[l].clone()).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    ech.insert(k, row);
                    if ech.is_full() {
                        break 'outer;
                    }
                }
            }
        }
    }
    ech.kernel(k).iter().map(|v| t.from_coords(v)).collect()
}

/// `End_E L = { D : [D, e] = 0 for e in E }`, an `L`-subspace of `End_K L`.
pub fn relative_endomorphisms(t: &Tower, e: &Subfield) -> Result<OperatorSubspace, ModularityError> {
    let basis = e.basis(t);
    if Subfield::from_basis(t, &basis).is_none() {
        return Err(ModularityError::NotAField);
    }
    let n = t.dim();
    let k = t.coeff_field();
    // [D, eps] m_j = sum_l c_{jl} D(m_l) - eps D(m_j), with eps m_j = sum_l c_{jl} m_l
    let mut ech: Echelon<Tower> = Echelon::new(n);
    'outer: for eps in &basis {
        for j in 0..n {
            let prod = t.mul(eps, &t.basis(j));
            let mut row: Vec<TowerElement> = (0..n).map(|l| t.from_coeff(prod.coeff(l).cloned().unwrap_or(k.zero()))).collect();
            row[j] = t.sub(&row[j], eps);
            if row.iter().any(|x| !x.is_zero()) {
                ech.insert(t, row);
                if ech.is_full() {
                    break 'outer;
                }
            }
        }
    }
    let ops: Vec<LinearOperator> = ech.kernel(t).into_iter().map(LinearOperator::from_columns).collect();
    Ok(OperatorSubspace::spanned_by(t, &ops))
}

/// The field of constants of an operator algebra containing `L`.
pub fn fixed_field(t: &Tower, r: &OperatorSubspace) -> Result<Subfield, ModularityError> {
    let basis = r.l_basis();
    if !r.contains(t, &LinearOperator::identity(t)) {
        return Err(ModularityError::NotAnAlgebra);
    }
    let gens: Vec<LinearOperator> = (0..t.num_gens()).map(|k| mult_operator(t, &t.gen(k))).collect();
    for a in &basis {
        for g in gens.iter().chain(&basis) {
            if !r.contains(t, &a.compose(t, g)) {
                return Err(ModularityError::NotAnAlgebra);
            }
        }
    }
    let elems = commutant(t, &basis);
    Subfield::from_basis(t, &elems).ok_or(ModularityError::NotAField)
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub field: Subfield,
    /// `[L:E]`
    pub index: usize,
    /// `dim_K` of the operator algebra generated by `L` and the `A_i`.
    pub algebra_dim: usize,
    /// Disjointness test of `L/E`.
    pub verification: DisjointnessOutcome,
}

/// The fixed field `E` of the algebra generated by `L` and every `A_i`,
/// with a check that `L/E` is modular.
pub fn modular_closure(t: &Tower, ceiling: usize) -> Result<ClosureResult, ModularityError> {
    let f = span_filtration(t);
    let a_sets: Vec<Result<Vec<LinearOperator>, SemilinearError>> =
        (1..exponent(t)).into_par_iter().map(|i| compute_a(t, &f, i, ceiling).map(|a| a.ops)).collect();
    let mut generators: Vec<LinearOperator> = (0..t.num_gens()).map(|k| mult_operator(t, &t.gen(k))).collect();
    for a in a_sets {
        generators.extend(a?);
    }
    let mut algebra = OperatorSubspace::new(t);
    let id = LinearOperator::identity(t);
    algebra.insert(t, &id);
    let mut queue = vec![id];
    while let Some(d) = queue.pop() {
        for g in &generators {
            let prod = d.compose(t, g);
            if algebra.insert(t, &prod) {
                queue.push(prod);
            }
        }
    }
    assert!(algebra.dim_k(t) <= t.dim() * t.dim());
    let elems = commutant(t, &algebra.l_basis());
    let field = Subfield::from_basis(t, &elems).ok_or(ModularityError::NotAField)?;
    let verification = modular_over(t, &field);
    Ok(ClosureResult { index: t.dim() / field.dim(), algebra_dim: algebra.dim_k(t), field, verification })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Pickert,
    Disjoint,
    Span,
    Witness,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pickert, Method::Disjoint, Method::Span, Method::Witness];
}

#[derive(Clone, Debug)]
pub enum WitnessOutcome {
    Found(WitnessSearch),
    None(WitnessSearch),
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct PickertReport {
    pub sequence: PickertSequence,
    pub outcome: PickertOutcome,
}

#[derive(Clone, Debug)]
pub struct ModularityReport {
    pub pickert: Option<PickertReport>,
    pub disjointness: DisjointnessOutcome,
    pub span: Option<SpanOutcome>,
    pub witness: Option<WitnessOutcome>,
    /// Always the disjointness verdict.
    pub modular: bool,
    pub flags: Vec<&'static str>,
}

impl ModularityReport {
    /// Witness found although the oracle says modular, or Pickert says
    /// modular although the oracle does not.
    pub fn soundness_violation(&self) -> bool {
        self.flags.iter().any(|f| f.ends_with("soundness_violation"))
    }
}

/// Runs the requested procedures; disjointness always runs and decides
/// the verdict.
pub fn analyze(t: &Tower, methods: &[Method], ceiling: usize) -> Result<ModularityReport, ModularityError> {
    let disjointness = modular_by_disjointness(t);
    let modular = disjointness.modular;
    let mut flags = Vec::new();

    let pickert = if methods.contains(&Method::Pickert) {
        let sequence = pickert_order(t)?;
        let outcome = modular_by_pickert(&sequence);
        match outcome {
            PickertOutcome::Modular if !modular => flags.push("pickert_soundness_violation"),
            PickertOutcome::Inconclusive { .. } => flags.push("pickert_inconclusive"),
            _ => {}
        }
        Some(PickertReport { sequence, outcome })
    } else {
        None
    };

    let span = methods.contains(&Method::Span).then(|| modular_by_span(t, ceiling));
    if let Some(s) = &span {
        match s.modular {
            Some(v) if v != modular => flags.push("span_discrepancy"),
            None => flags.push("span_refused"),
            _ => {}
        }
    }

    let witness = if methods.contains(&Method::Witness) {
        Some(match find_witness(t) {
            Ok(search) if search.certificate.is_some() => {
                if modular {
                    flags.push("witness_soundness_violation");
                }
                WitnessOutcome::Found(search)
            }
            Ok(search) => WitnessOutcome::None(search),
            Err(ModularityError::VerificationFailed(msg)) => {
                flags.push("witness_verification_failed");
                WitnessOutcome::Failed(msg)
            }
            Err(e) => return Err(e),
        })
    } else {
        None
    };

    Ok(ModularityReport { pickert, disjointness, span, witness, modular, flags })
}
