//! Exhaustive certification of the construction, bound tables, width-cap
//! experiments and the approximation-exponent calculus.

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{
    build_completion, completion_instance, index_subsets, min_capacity, play_step1, split_sizes, AdversaryParams,
    CompletionTrace, GameState,
};
use crate::btmodel::{best_leaf_value, run_bt, tree_width, BTAlgorithm, PriorityOrder};
use crate::error::{Error, Result};
use crate::knapsack::{brute_force_optimum, Instance};
use crate::rational::{format_fraction, to_f64, to_rational};
use crate::weight::Weight;

/// `3·log₂3`, the exact constant behind the rounded 4.75.
pub fn three_log2_3() -> f64 {
    3.0 * 3f64.log2()
}

/// Step 1 plus one completion per `Q`, in lexicographic `Q` order.
#[derive(Clone, Debug)]
pub struct Construction {
    pub params: AdversaryParams,
    pub solver: String,
    pub state: GameState,
    pub completions: Vec<(CompletionTrace, Instance)>,
}

pub fn construct(params: &AdversaryParams, solver: &mut BTAlgorithm) -> Result<Construction> {
    let state = play_step1(solver, params)?;
    let completions = index_subsets(params.step1_count, params.q_size)
        .par_iter()
        .map(|q| {
            let trace = build_completion(&state, q, params)?;
            let inst = completion_instance(&state, &trace, params)?;
            Ok((trace, inst))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Construction { params: params.clone(), solver: solver.name(), state, completions })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    pub q_indices: Vec<usize>,
    pub instance: Instance,
    pub optimum: Weight,
    pub unique: bool,
    /// First maximizing index set reported by the oracle.
    pub witness: Vec<usize>,
    /// The solver's step-1 tree holds the partial solution "exactly Q".
    pub retained: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndispensabilityReport {
    pub n: usize,
    pub eps: String,
    pub capacity: Weight,
    pub solver: String,
    pub revealed: Vec<Weight>,
    pub classes: Vec<ClassRecord>,
    pub classes_total: usize,
    pub classes_passed: usize,
    /// Distinct `Q` of the same size never share a sum.
    pub distinct_q_sums: bool,
}

impl IndispensabilityReport {
    pub fn all_pass(&self) -> bool {
        self.classes_passed == self.classes_total && self.distinct_q_sums
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .classes
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                format!(
                    "Q = {:?}: optimum {} (capacity {}), unique = {}, witness {:?}",
                    c.q_indices, c.optimum, self.capacity, c.unique, c.witness
                )
            })
            .collect();
        if !self.distinct_q_sums {
            out.push("two distinct Q share the same sum".into());
        }
        out
    }
}

pub fn check_indispensable(params: &AdversaryParams, solver: &mut BTAlgorithm) -> Result<IndispensabilityReport> {
    let c = construct(params, solver)?;
    certify(&c)
}

/// Runs the oracle on every completion of an existing construction.
pub fn certify(c: &Construction) -> Result<IndispensabilityReport> {
    let p = &c.params;
    let classes = c
        .completions
        .par_iter()
        .map(|(trace, inst)| {
            let opt = brute_force_optimum(inst)?;
            let mut expected = trace.q_indices.clone();
            expected.extend(p.step1_count..p.n);
            let witness = opt.witnesses.first().cloned().unwrap_or_default();
            let pass = opt.unique && opt.best_value == p.capacity && witness == expected;
            let retained = c.state.partial_solutions.iter().any(|s| {
                s.taken.iter().enumerate().all(|(i, &t)| t == trace.q_indices.contains(&i))
            });
            Ok(ClassRecord {
                q_indices: trace.q_indices.clone(),
                instance: inst.clone(),
                optimum: opt.best_value,
                unique: opt.unique,
                witness,
                retained,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sums: Vec<&Weight> = c.completions.iter().map(|(t, _)| &t.q_sum).collect();
    sums.sort();
    let distinct_q_sums = sums.windows(2).all(|w| w[0] != w[1]);

    Ok(IndispensabilityReport {
        n: p.n,
        eps: p.eps_string(),
        capacity: p.capacity.clone(),
        solver: c.solver.clone(),
        revealed: c.state.revealed.clone(),
        classes_total: classes.len(),
        classes_passed: classes.iter().filter(|r| r.pass).count(),
        classes,
        distinct_q_sums,
    })
}

/// `C(n/2, n/4)`.
pub fn theorem1_bound(n: usize) -> Result<BigUint> {
    if !n.is_multiple_of(4) {
        return Err(Error::Domain(format!("n = {n} is not a multiple of 4")));
    }
    Ok(binomial(BigUint::from(n / 2), BigUint::from(n / 4)))
}

/// `C((2−ε)n/3, (2−ε)n/6)`.
pub fn theorem2_bound(n: usize, eps: &BigRational) -> Result<BigUint> {
    let (step1, q, _) = split_sizes(n, eps).map_err(Error::InvalidParams)?;
    Ok(binomial(BigUint::from(step1), BigUint::from(q)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub eps: String,
    pub theorem1: Option<BigUint>,
    pub theorem2: Option<BigUint>,
    /// `theorem2 / theorem1` when both apply.
    pub ratio: Option<f64>,
}

pub fn bounds_table(ns: &[usize], eps: &BigRational) -> Vec<BoundsRow> {
    ns.iter()
        .map(|&n| {
            let t1 = theorem1_bound(n).ok();
            let t2 = theorem2_bound(n, eps).ok();
            let ratio = match (&t1, &t2) {
                (Some(a), Some(b)) => {
                    let r = BigRational::new(b.clone().into(), a.clone().into());
                    Some(to_f64(&r))
                }
                _ => None,
            };
            BoundsRow { n, eps: format_fraction(eps), theorem1: t1, theorem2: t2, ratio }
        })
        .collect()
}

/// Exhaustive BT that processes the step-1 items in reveal order, then the rest.
pub fn replay_solver(c: &Construction) -> BTAlgorithm {
    BTAlgorithm::exhaustive(Box::new(PriorityOrder::new(c.state.revealed.clone()))).expect("fixed ordering")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CappedRun {
    pub q_indices: Vec<usize>,
    pub best_value: Weight,
    pub width: usize,
    pub reached_capacity: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthCapReport {
    pub cap: usize,
    pub theorem2_bound: BigUint,
    pub runs: Vec<CappedRun>,
    pub failures: usize,
    pub uncapped_all_reach: bool,
}

fn capped_runs(c: &Construction, cap: Option<usize>) -> Result<Vec<CappedRun>> {
    c.completions
        .par_iter()
        .map(|(trace, inst)| {
            let mut alg = replay_solver(c);
            let tree = run_bt(&mut alg, inst, cap)?;
            let best = best_leaf_value(&tree, inst);
            Ok(CappedRun {
                q_indices: trace.q_indices.clone(),
                reached_capacity: &best == inst.capacity(),
                best_value: best,
                width: tree_width(&tree),
            })
        })
        .collect()
}

/// Runs the capped exhaustive BT on every completion, and the uncapped one
/// for comparison.
pub fn width_cap_failure_demo(c: &Construction, cap: usize) -> Result<WidthCapReport> {
    let runs = capped_runs(c, Some(cap))?;
    let uncapped = capped_runs(c, None)?;
    Ok(WidthCapReport {
        cap,
        theorem2_bound: theorem2_bound(c.params.n, &c.params.eps)?,
        failures: runs.iter().filter(|r| !r.reached_capacity).count(),
        runs,
        uncapped_all_reach: uncapped.iter().all(|r| r.reached_capacity),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentRow {
    pub delta: String,
    /// `(2 − δ) / (3·log₂3)`.
    pub exponent: f64,
    /// `(2 − δ) / 4.75`.
    pub rounded: f64,
    /// `1 / exponent`.
    pub inverse: f64,
}

/// The width exponent `γ = Ω((1/ε)^e)` as a function of `δ ∈ (0, 1/2]`.
pub fn approx_exponent(delta: &BigRational) -> Result<ExponentRow> {
    if !delta.is_positive() || delta > &BigRational::new(1.into(), 2.into()) {
        return Err(Error::Domain(format!("δ = {} is outside (0, 1/2]", format_fraction(delta))));
    }
    let numer = 2.0 - to_f64(delta);
    let exponent = numer / three_log2_3();
    Ok(ExponentRow { delta: format_fraction(delta), exponent, rounded: numer / 4.75, inverse: 1.0 / exponent })
}

/// Parameters of the approximation argument for a capacity `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    pub delta: BigRational,
    /// Width exponent, see [`approx_exponent`].
    pub gamma_exponent: f64,
    /// Approximation slack reachable by integrality: `1/N`.
    pub eps_ratio: BigRational,
    /// Largest `n₀` with `⌈(1+δ)/δ⌉·n₀·3^{n₀} ≤ N` (0 if none).
    pub n0: usize,
}

impl ApproxParams {
    pub fn new(delta: &BigRational, capacity: &Weight) -> Result<Self> {
        if !delta.is_positive() || delta >= &BigRational::new(1.into(), 2.into()) {
            return Err(Error::Domain(format!("δ = {} is outside (0, 1/2)", format_fraction(delta))));
        }
        if capacity.is_zero() {
            return Err(Error::Domain("capacity must be positive".into()));
        }
        let mut n0 = 0;
        while &min_capacity(n0 + 1, delta)? <= capacity {
            n0 += 1;
        }
        Ok(ApproxParams {
            delta: delta.clone(),
            gamma_exponent: approx_exponent(delta)?.exponent,
            eps_ratio: BigRational::one() / to_rational(capacity),
            n0,
        })
    }
}

/// Appends zero-weight items up to `n` items.
pub fn pad_instance(inst: &Instance, n: usize) -> Result<Instance> {
    if n < inst.len() {
        return Err(Error::Domain(format!("cannot pad {} items down to {n}", inst.len())));
    }
    let mut weights = inst.weights().to_vec();
    weights.resize(n, Weight::zero());
    Instance::new(weights, inst.capacity().clone())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxRow {
    pub cap: usize,
    pub below_bound: bool,
    pub worst_value: Weight,
    /// Exact `worst_value / N`.
    pub worst_ratio: String,
    pub worst_ratio_f64: f64,
    /// `worst_value / N ≤ (N − 1) / N`.
    pub within_integrality: bool,
}

/// Worst achieved ratio of the capped exhaustive BT over all completions,
/// per width cap. Rows keep the order of `caps`.
pub fn approx_ratio_experiment(c: &Construction, caps: &[usize]) -> Result<Vec<ApproxRow>> {
    let bound = theorem2_bound(c.params.n, &c.params.eps)?;
    let cap_n = &c.params.capacity;
    let limit = cap_n - &Weight::one();
    caps.par_iter()
        .map(|&cap| {
            let runs = capped_runs(c, Some(cap))?;
            let worst = runs.iter().map(|r| r.best_value.clone()).min().unwrap_or_else(|| cap_n.clone());
            let ratio = to_rational(&worst) / to_rational(cap_n);
            Ok(ApproxRow {
                cap,
                below_bound: BigUint::from(cap) < bound,
                within_integrality: worst <= limit,
                worst_ratio: format_fraction(&ratio),
                worst_ratio_f64: to_f64(&ratio),
                worst_value: worst,
            })
        })
        .collect()
}
