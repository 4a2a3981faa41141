//! Brute-force reference computations and seeded random towers for
//! cross-checking the fast paths.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::coefffield::{CoeffField, RatFunc};
use crate::field::Field;
use crate::linops::LinearOperator;
use crate::modularity::{analyze, Method, SpanStatus, WitnessOutcome};
use crate::spec::{Expr, GenSpec, TowerSpec};
use crate::tower::{build_tower, pickert_order, PickertOutcome, Tower};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("operator has no order at most {bound}")]
    BoundExceeded { bound: usize },
    #[error("no acceptable tower for index {index} after {attempts} attempts")]
    SamplingExhausted { index: usize, attempts: usize },
    #[error("invalid corpus configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Order of `D` straight from the definition: the least `n` such that every
/// `(n+1)`-fold iterated commutator with multiplications by basis monomials
/// vanishes. Since those multiplications commute, only multisets of basis
/// indices are enumerated.
pub fn brute_order(t: &Tower, d: &LinearOperator, bound: usize) -> Result<usize, OracleError> {
    let basis: Vec<_> = (0..t.dim()).map(|j| t.basis(j)).collect();
    let basis = &basis;
    let mut frontier = vec![(0usize, d.clone())];
    for n in 0..=bound {
        let extend = |(last, op): &(usize, LinearOperator)| {
            (*last..basis.len())
                .filter_map(|j| {
                    let c = op.commutator(t, &basis[j]);
                    (!c.is_zero()).then_some((j, c))
                })
                .collect::<Vec<_>>()
        };
        let next: Vec<(usize, LinearOperator)> = if frontier.len() < 16 {
            frontier.iter().flat_map(extend).collect()
        } else {
            frontier.par_iter().flat_map_iter(extend).collect()
        };
        if next.is_empty() {
            return Ok(n);
        }
        frontier = next;
    }
    Err(OracleError::BoundExceeded { bound })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub p: u32,
    pub max_gens: usize,
    /// Largest `d_i` with `q_i = p^{d_i}`.
    pub max_degree_exp: u32,
    pub max_params: usize,
    /// Terms per random coefficient.
    pub max_terms: usize,
    /// Total degree of each term of a random coefficient.
    pub max_coeff_degree: u32,
    pub max_dim: usize,
    pub ceiling: usize,
    pub attempts: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 1,
            count: 25,
            p: 2,
            max_gens: 3,
            max_degree_exp: 3,
            max_params: 3,
            max_terms: 3,
            max_coeff_degree: 2,
            max_dim: 16,
            ceiling: crate::semilinear::DEFAULT_DIM_CEILING,
            attempts: 500,
        }
    }
}

impl CorpusConfig {
    fn validate(&self) -> Result<(), OracleError> {
        if !(1..=3).contains(&self.max_gens) {
            return Err(OracleError::InvalidConfig("max_gens must be between 1 and 3"));
        }
        if !(1..=3).contains(&self.max_params) {
            return Err(OracleError::InvalidConfig("max_params must be between 1 and 3"));
        }
        if self.max_dim > 16 || self.max_dim < self.p as usize {
            return Err(OracleError::InvalidConfig("max_dim must lie between p and 16"));
        }
        if self.max_degree_exp == 0 || self.max_terms == 0 {
            return Err(OracleError::InvalidConfig("degrees and term counts must be positive"));
        }
        Ok(())
    }
}

/// Shape of a sampled tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    /// Every relation lies in `K`.
    Split,
    /// `x^q = c`, then `y^{q'} = c1 x^k + c2` with `q' < q`, like the
    /// standard non-modular example.
    Structured,
    /// Relations are random polynomials in the earlier generators.
    Generic,
}

impl Template {
    pub fn for_index(index: usize) -> Template {
        [Template::Split, Template::Structured, Template::Generic][index % 3]
    }

    pub fn name(self) -> &'static str {
        match self {
            Template::Split => "split",
            Template::Structured => "structured",
            Template::Generic => "generic",
        }
    }
}

struct Sampler<'a> {
    cfg: &'a CorpusConfig,
    rng: ChaCha8Rng,
    params: Vec<String>,
}

impl Sampler<'_> {
    fn coeff_int(&mut self) -> u64 {
        self.rng.gen_range(1..self.cfg.p as u64)
    }

    fn param_monomial(&mut self) -> Option<Expr> {
        let deg = self.rng.gen_range(0..=self.cfg.max_coeff_degree);
        let mut factors: Vec<usize> = (0..deg).map(|_| self.rng.gen_range(0..self.params.len())).collect();
        factors.sort();
        let mut out: Option<Expr> = None;
        for (k, chunk) in chunk_runs(&factors) {
            let base = Expr::name(&self.params[k]);
            let f = if chunk > 1 { Expr::pow(base, chunk as u32) } else { base };
            out = Some(match out {
                None => f,
                Some(e) => Expr::mul(e, f),
            });
        }
        out
    }

    /// A nonzero polynomial in the parameters.
    fn coefficient(&mut self) -> Expr {
        let terms = self.rng.gen_range(1..=self.cfg.max_terms);
        let mut out: Option<Expr> = None;
        for _ in 0..terms {
            let c = self.coeff_int();
            let term = match (c, self.param_monomial()) {
                (c, None) => Expr::Int(c),
                (1, Some(m)) => m,
                (c, Some(m)) => Expr::mul(Expr::Int(c), m),
            };
            out = Some(match out {
                None => term,
                Some(e) => Expr::add(e, term),
            });
        }
        out.unwrap()
    }

    fn gen_monomial(&mut self, names: &[String], degrees: &[u32]) -> Option<Expr> {
        let mut out: Option<Expr> = None;
        for (name, &d) in names.iter().zip(degrees) {
            let q = self.cfg.p.pow(d);
            let e = self.rng.gen_range(0..q);
            if e == 0 {
                continue;
            }
            let base = Expr::name(name);
            let f = if e > 1 { Expr::pow(base, e) } else { base };
            out = Some(match out {
                None => f,
                Some(x) => Expr::mul(x, f),
            });
        }
        out
    }

    fn degrees(&mut self, n: usize) -> Vec<u32> {
        let mut budget = self.cfg.max_dim;
        let mut out = Vec::new();
        for _ in 0..n {
            let mut opts = Vec::new();
            let mut d = 1;
            while d <= self.cfg.max_degree_exp && (self.cfg.p as usize).pow(d) <= budget {
                opts.push(d);
                d += 1;
            }
            let Some(&d) = opts.choose(&mut self.rng) else { break };
            budget /= (self.cfg.p as usize).pow(d);
            out.push(d);
        }
        out
    }

    fn candidate(&mut self, template: Template) -> TowerSpec {
        let m = self.rng.gen_range(1..=self.cfg.max_params);
        self.params = ["a", "b", "c"][..m].iter().map(|s| s.to_string()).collect();
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let mut gens = Vec::new();
        match template {
            Template::Split => {
                let n = self.rng.gen_range(1..=self.cfg.max_gens);
                for (i, d) in self.degrees(n).into_iter().enumerate() {
                    gens.push(GenSpec { name: names[i].clone(), degree_exp: d, relation: self.coefficient() });
                }
            }
            Template::Structured => {
                let top = self.cfg.max_degree_exp.max(2);
                let d1 = self.rng.gen_range(2..=top);
                let q1 = self.cfg.p.pow(d1);
                let d2 = self.rng.gen_range(1..d1);
                let q2 = self.cfg.p.pow(d2);
                // x^k with k a multiple of q2, so the relation is not obviously a q2-th power
                let k = q2 * self.rng.gen_range(1..q1 / q2);
                let rel = Expr::add(
                    Expr::mul(self.coefficient(), Expr::pow(Expr::name(&names[0]), k)),
                    self.coefficient(),
                );
                gens.push(GenSpec { name: names[0].clone(), degree_exp: d1, relation: self.coefficient() });
                gens.push(GenSpec { name: names[1].clone(), degree_exp: d2, relation: rel });
                if self.cfg.max_gens > 2 && (q1 * q2 * self.cfg.p) as usize <= self.cfg.max_dim && self.rng.gen_bool(0.3) {
                    gens.push(GenSpec { name: names[2].clone(), degree_exp: 1, relation: self.coefficient() });
                }
            }
            Template::Generic => {
                let n = self.rng.gen_range(1..=self.cfg.max_gens);
                let degrees = self.degrees(n);
                for i in 0..degrees.len() {
                    let terms = self.rng.gen_range(1..=self.cfg.max_terms);
                    let mut rel: Option<Expr> = None;
                    for _ in 0..terms {
                        let c = self.coefficient();
                        let term = match self.gen_monomial(&names[..i], &degrees[..i]) {
                            Some(m) => Expr::mul(c, m),
                            None => c,
                        };
                        rel = Some(match rel {
                            None => term,
                            Some(e) => Expr::add(e, term),
                        });
                    }
                    gens.push(GenSpec { name: names[i].clone(), degree_exp: degrees[i], relation: rel.unwrap() });
                }
            }
        }
        TowerSpec { p: self.cfg.p, params: self.params.clone(), gens }
    }
}

fn chunk_runs(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &k in sorted {
        match out.last_mut() {
            Some((last, n)) if *last == k => *n += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Deterministic in `(config.seed, index)`. Candidates are drawn until one
/// builds and has a Pickert ordering without redundant generators.
pub fn random_tower(config: &CorpusConfig, index: usize) -> Result<TowerSpec, OracleError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let mut sampler = Sampler { cfg: config, rng, params: Vec::new() };
    let template = Template::for_index(index);
    for _ in 0..config.attempts {
        let spec = sampler.candidate(template);
        if spec.gens.is_empty() {
            continue;
        }
        let Ok(t) = build_tower(&spec) else { continue };
        if t.dim() <= config.max_dim && pickert_order(&t).is_ok() {
            return Ok(spec);
        }
    }
    Err(OracleError::SamplingExhausted { index, attempts: config.attempts })
}

pub fn corpus(config: &CorpusConfig) -> Result<Vec<TowerSpec>, OracleError> {
    (0..config.count).into_par_iter().map(|i| random_tower(config, i)).collect()
}

/// A random element with small polynomial coefficients; roughly `density`
/// of the basis coordinates are nonzero.
pub fn random_element(t: &Tower, rng: &mut impl Rng, density: f64) -> crate::tower::TowerElement {
    let k = t.coeff_field();
    let coords: Vec<RatFunc> =
        (0..t.dim()).map(|_| if rng.gen_bool(density) { random_coeff(k, rng) } else { k.zero() }).collect();
    t.from_coords(&coords)
}

/// A polynomial of total degree at most 2 in the parameters, with at most
/// three terms.
pub fn random_coeff(k: &CoeffField, rng: &mut impl Rng) -> RatFunc {
    let p = k.characteristic() as i64;
    let mut acc = k.zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut term = k.constant(rng.gen_range(1..p));
        for _ in 0..rng.gen_range(0..=2) {
            if k.num_params() > 0 {
                term = k.mul(&term, &k.param(rng.gen_range(0..k.num_params())));
            }
        }
        acc = k.add(&acc, &term);
    }
    acc
}

pub fn random_operator(t: &Tower, rng: &mut impl Rng, density: f64) -> LinearOperator {
    LinearOperator::from_fn(t, |_| random_element(t, rng, density))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessRow {
    pub label: String,
    pub dim: usize,
    pub exponents: Vec<u32>,
    pub pickert_modular: bool,
    pub disjoint_modular: bool,
    /// `None` when a level was refused.
    pub span_modular: Option<bool>,
    /// Levels whose span computation was refused.
    pub span_refused_levels: Vec<u32>,
    pub witness: WitnessStatus,
    pub flags: Vec<String>,
    pub hard_failure: bool,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessStatus {
    Found { level: u32 },
    None,
    VerificationFailed,
    NotRun,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessReport {
    pub rows: Vec<HarnessRow>,
    pub hard_failures: usize,
    pub span_discrepancies: usize,
    pub span_refusals: usize,
}

fn harness_row(label: String, spec: &TowerSpec, ceiling: usize) -> HarnessRow {
    let failed = |dim, error: String| HarnessRow {
        label: label.clone(),
        dim,
        exponents: Vec::new(),
        pickert_modular: false,
        disjoint_modular: false,
        span_modular: None,
        span_refused_levels: Vec::new(),
        witness: WitnessStatus::NotRun,
        flags: Vec::new(),
        hard_failure: true,
        error: Some(error),
    };
    let t = match build_tower(spec) {
        Ok(t) => t,
        Err(e) => return failed(0, e.to_string()),
    };
    let report = match analyze(&t, &Method::ALL, ceiling) {
        Ok(r) => r,
        Err(e) => return failed(t.dim(), e.to_string()),
    };
    let pickert = report.pickert.as_ref().unwrap();
    let span = report.span.as_ref().unwrap();
    let witness = match report.witness.as_ref().unwrap() {
        WitnessOutcome::Found(s) => WitnessStatus::Found { level: s.certificate.as_ref().unwrap().verification.level },
        WitnessOutcome::None(_) => WitnessStatus::None,
        WitnessOutcome::Failed(_) => WitnessStatus::VerificationFailed,
    };
    HarnessRow {
        label,
        dim: t.dim(),
        exponents: pickert.sequence.exponents.clone(),
        pickert_modular: pickert.outcome == PickertOutcome::Modular,
        disjoint_modular: report.modular,
        span_modular: span.modular,
        span_refused_levels: span
            .levels
            .iter()
            .filter(|l| matches!(l.status, SpanStatus::Refused { .. }))
            .map(|l| l.level)
            .collect(),
        witness,
        flags: report.flags.iter().map(|s| s.to_string()).collect(),
        hard_failure: report.soundness_violation() || witness == WitnessStatus::VerificationFailed,
        error: None,
    }
}

/// Runs every procedure on every tower. Rows keep the input order.
pub fn agreement_harness(towers: &[(String, TowerSpec)], ceiling: usize) -> HarnessReport {
    let rows: Vec<HarnessRow> =
        towers.par_iter().map(|(label, spec)| harness_row(label.clone(), spec, ceiling)).collect();
    let count = |flag: &str| rows.iter().filter(|r| r.flags.iter().any(|f| f == flag)).count();
    HarnessReport {
        hard_failures: rows.iter().filter(|r| r.hard_failure).count(),
        span_discrepancies: count("span_discrepancy"),
        span_refusals: count("span_refused"),
        rows,
    }
}

/// The seeded corpus labelled `seed-S/i`.
pub fn labelled_corpus(config: &CorpusConfig) -> Result<Vec<(String, TowerSpec)>, OracleError> {
    Ok(corpus(config)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| (format!("seed-{}/{}", config.seed, i), s))
        .collect())
}
