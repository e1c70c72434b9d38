//! The solver–adversary game on Simple Knapsack and the hard-instance
//! construction that forces every balanced subset of the solver's first
//! picks to stay in its computation tree.
//!
//! Step 1: the solver names `step1_count` weights; after each one the
//! adversary forbids every `|ΣS₁ − ΣS₂|` and `|N − ΣS₁|` over the seen items.
//! Steps 2–3: for a chosen `Q`, the adversary picks `step2_count` weights
//! around the target `a`, then a pair that closes the sum to exactly `N`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::btmodel::{expand, root_solution, BTAlgorithm, ItemPool, PartialSolution};
use crate::error::{Error, Result};
use crate::knapsack::{extend_signed, extend_subset, Instance, DEFAULT_ENUMERATION_CAP};
use crate::rational::{ceil_nonneg, exact_integer, floor_nonneg, format_fraction, to_rational};
use crate::weight::Weight;

/// Validated construction parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryParams {
    pub n: usize,
    pub eps: BigRational,
    pub capacity: Weight,
    /// `U = 3^n`.
    pub window: Weight,
    /// `⌊3N/n⌋`, the largest weight in the universe `I`.
    pub universe_max: Weight,
    pub step1_count: usize,
    pub q_size: usize,
    pub r_size: usize,
    pub step2_count: usize,
}

impl AdversaryParams {
    pub fn eps_string(&self) -> String {
        format_fraction(&self.eps)
    }

    fn one_plus_eps_n(&self) -> BigRational {
        (BigRational::one() + &self.eps) * BigRational::from_integer(self.n.into())
    }
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn pow3(n: usize) -> BigUint {
    num_traits::pow(BigUint::from(3u32), n)
}

/// `⌈(1+ε)/ε⌉ · n · 3ⁿ`, the smallest capacity the construction accepts.
pub fn min_capacity(n: usize, eps: &BigRational) -> Result<Weight> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("ε must be positive, got {}", format_fraction(eps))));
    }
    let factor = ((BigRational::one() + eps) / eps).ceil().to_integer();
    let factor = factor.to_biguint().expect("positive");
    Ok(Weight::from(factor * BigUint::from(n) * pow3(n)))
}

/// Item counts `((2−ε)n/3, (2−ε)n/6, (1+ε)n/3)` when all three are integers.
pub fn split_sizes(n: usize, eps: &BigRational) -> std::result::Result<(usize, usize, usize), Vec<String>> {
    let mut problems = vec![];
    if !eps.is_positive() || eps > &ratio(1, 2) {
        problems.push(format!("ε = {} is outside (0, 1/2]", format_fraction(eps)));
    }
    let nq = BigRational::from_integer(n.into());
    let two = BigRational::from_integer(2.into());
    let mut count = |label: &str, value: BigRational| -> usize {
        match exact_integer(&value).and_then(|v| usize::try_from(v).ok()) {
            Some(c) => c,
            None => {
                problems.push(format!("{label} = {} is not a non-negative integer", format_fraction(&value)));
                0
            }
        }
    };
    let step1 = count("(2−ε)n/3", (&two - eps) * &nq / ratio(3, 1));
    let q = count("(2−ε)n/6", (&two - eps) * &nq / ratio(6, 1));
    let r = count("(1+ε)n/3", (BigRational::one() + eps) * &nq / ratio(3, 1));
    if problems.is_empty() {
        Ok((step1, q, r))
    } else {
        Err(problems)
    }
}

/// Checks ε range, divisibility, the non-degenerate sizes, and the capacity
/// bound, reporting every violated condition at once.
pub fn validate_params(n: usize, eps: &BigRational, capacity: &Weight) -> Result<AdversaryParams> {
    if n == 0 {
        return Err(Error::InvalidParams(vec!["n must be positive".into()]));
    }
    let (mut problems, sizes) = match split_sizes(n, eps) {
        Ok(s) => (vec![], Some(s)),
        Err(p) => (p, None),
    };
    if let Some((step1, q, r)) = sizes {
        debug_assert_eq!(step1 + r, n);
        if q == 0 {
            problems.push("(2−ε)n/6 must be at least 1".into());
        }
        if r < 2 {
            problems.push(format!("(1+ε)n/3 = {r} leaves no room for the closing pair"));
        }
    }
    if eps.is_positive() {
        let min = min_capacity(n, eps)?;
        if capacity < &min {
            problems.push(format!("capacity {capacity} is below ⌈(1+ε)/ε⌉·n·3ⁿ = {min}"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::InvalidParams(problems));
    }
    let (step1_count, q_size, r_size) = sizes.expect("no problems implies sizes");
    let universe_max = Weight::from((capacity.as_biguint() * 3u32) / BigUint::from(n));
    Ok(AdversaryParams {
        n,
        eps: eps.clone(),
        capacity: capacity.clone(),
        window: Weight::from(pow3(n)),
        universe_max,
        step1_count,
        q_size,
        r_size,
        step2_count: r_size - 2,
    })
}

/// Weights eliminated by the two deletion rules, grown one seen item at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenSet {
    capacity: Weight,
    seen: usize,
    signed: BTreeSet<Weight>,
    subsets: BTreeSet<Weight>,
    all: BTreeSet<Weight>,
}

impl ForbiddenSet {
    /// Nothing seen yet: `{0}` from `S₁ = S₂ = ∅` and `{N}` from `S₁ = ∅`.
    pub fn new(capacity: &Weight) -> Self {
        let zero = Weight::zero();
        ForbiddenSet {
            capacity: capacity.clone(),
            seen: 0,
            signed: BTreeSet::from([zero.clone()]),
            subsets: BTreeSet::from([zero.clone()]),
            all: BTreeSet::from([zero, capacity.clone()]),
        }
    }

    pub fn push(&mut self, x: &Weight) -> Result<()> {
        if self.seen >= DEFAULT_ENUMERATION_CAP {
            return Err(Error::OverCap { len: self.seen + 1, cap: DEFAULT_ENUMERATION_CAP });
        }
        self.seen += 1;
        let signed = extend_signed(&mut self.signed, x);
        let subsets = extend_subset(&mut self.subsets, x);
        self.all.extend(signed);
        let cap = &self.capacity;
        self.all.extend(subsets.iter().map(|s| s.abs_diff(cap)));
        Ok(())
    }

    pub fn contains(&self, w: &Weight) -> bool {
        self.all.contains(w)
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn seen(&self) -> usize {
        self.seen
    }

    pub fn values(&self) -> &BTreeSet<Weight> {
        &self.all
    }

    /// Positive forbidden weights. Each corresponds to a distinct 0/1/−1
    /// string over the seen items, so this never exceeds `3^seen`.
    pub fn deleted_count(&self) -> usize {
        self.all.len() - usize::from(self.all.contains(&Weight::zero()))
    }

    pub fn within_budget(&self) -> bool {
        BigUint::from(self.deleted_count()) <= pow3(self.seen)
    }

    fn check_budget(&self) -> Result<()> {
        if self.within_budget() {
            Ok(())
        } else {
            Err(Error::Contradiction(format!(
                "{} positive weights forbidden after {} items, above 3^{}",
                self.deleted_count(),
                self.seen,
                self.seen
            )))
        }
    }
}

/// `signed_sums(revealed) ∪ { |N − s| : s ∈ subset_sums(revealed) }`.
pub fn forbidden_weights(revealed: &[Weight], capacity: &Weight) -> Result<BTreeSet<Weight>> {
    let mut set = ForbiddenSet::new(capacity);
    for x in revealed {
        set.push(x)?;
    }
    Ok(set.all)
}

/// Universe `{0, …, max}` minus the forbidden set, queried lazily.
pub struct LivePool<'a> {
    pub max: &'a Weight,
    pub forbidden: &'a ForbiddenSet,
}

impl ItemPool for LivePool<'_> {
    fn contains(&self, w: &Weight) -> bool {
        w <= self.max && !self.forbidden.contains(w)
    }

    fn next_at_least(&self, w: &Weight) -> Option<Weight> {
        let mut c = w.clone();
        for f in self.forbidden.all.range(w..) {
            if *f != c {
                break;
            }
            c += &Weight::one();
        }
        (&c <= self.max).then_some(c)
    }

    fn next_at_most(&self, w: &Weight) -> Option<Weight> {
        let mut c = if w > self.max { self.max.clone() } else { w.clone() };
        for f in self.forbidden.all.range(..=c.clone()).rev() {
            if *f != c {
                break;
            }
            c = c.checked_sub(&Weight::one())?;
        }
        Some(c)
    }

    fn min_item(&self) -> Option<Weight> {
        self.next_at_least(&Weight::zero())
    }

    fn max_item(&self) -> Option<Weight> {
        self.next_at_most(self.max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub picked: Weight,
    pub forbidden_count: usize,
    pub tree_width: usize,
}

/// Game position after some rounds of step 1.
#[derive(Clone, Debug)]
pub struct GameState {
    pub round: usize,
    /// Items the solver has seen, in reveal order.
    pub revealed: Vec<Weight>,
    pub forbidden: ForbiddenSet,
    /// The solver's partial solutions over `revealed`.
    pub partial_solutions: Vec<PartialSolution>,
    pub history: Vec<RoundRecord>,
}

impl GameState {
    pub fn new(capacity: &Weight) -> Self {
        GameState {
            round: 0,
            revealed: vec![],
            forbidden: ForbiddenSet::new(capacity),
            partial_solutions: vec![root_solution()],
            history: vec![],
        }
    }
}

/// Step 1: the solver names `step1_count` live weights one at a time.
pub fn play_step1(solver: &mut BTAlgorithm, params: &AdversaryParams) -> Result<GameState> {
    let mut state = GameState::new(&params.capacity);
    for _ in 0..params.step1_count {
        play_round(solver, params, &mut state)?;
    }
    Ok(state)
}

/// One round: the solver names a weight, extends its partial solutions, and
/// the adversary updates the forbidden set.
pub fn play_round(solver: &mut BTAlgorithm, params: &AdversaryParams, state: &mut GameState) -> Result<()> {
    let pool = LivePool { max: &params.universe_max, forbidden: &state.forbidden };
    let picked = solver
        .ordering_mut()
        .next_item(&state.revealed, &pool)
        .ok_or_else(|| Error::ModelViolation("solver named no weight".into()))?;
    if picked > params.universe_max {
        return Err(Error::ModelViolation(format!(
            "weight {picked} lies outside the universe [0, {}]",
            params.universe_max
        )));
    }
    if state.forbidden.contains(&picked) {
        return Err(Error::ModelViolation(format!("weight {picked} has been deleted by the adversary")));
    }
    let next = expand(solver, &params.capacity, &state.revealed, &picked, &state.partial_solutions, None);
    state.partial_solutions = next;
    state.revealed.push(picked.clone());
    state.forbidden.push(&picked)?;
    state.forbidden.check_budget()?;
    state.round += 1;
    state.history.push(RoundRecord {
        round: state.round,
        picked,
        forbidden_count: state.forbidden.len(),
        tree_width: state.partial_solutions.len(),
    });
    Ok(())
}

/// Everything the adversary chose while completing one `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionTrace {
    pub q_indices: Vec<usize>,
    pub q: Vec<Weight>,
    pub q_sum: Weight,
    /// `3(N − ΣQ) / ((1+ε)n)`.
    pub a: BigRational,
    pub j_low: Weight,
    pub j_high: Weight,
    pub step2: Vec<Weight>,
    pub w: Weight,
    pub v: Weight,
    pub pair: (Weight, Weight),
    /// The `i` at which the pair scan succeeded.
    pub pair_offset: Weight,
    pub r: Vec<Weight>,
}

/// Scans `(⌊v/2⌋ − i, v − ⌊v/2⌋ + i)` for `i = 1, …, U + 1` and returns the
/// first pair with neither side blocked, along with its `i`.
pub fn find_pair(
    v: &Weight,
    window: &Weight,
    mut blocked: impl FnMut(&Weight) -> bool,
) -> Option<(Weight, Weight, Weight)> {
    let half = Weight::from(v.as_biguint() / 2u32);
    let upper_half = v - &half;
    let last = window + &Weight::one();
    let mut i = Weight::one();
    while i <= last {
        let lo = half.checked_sub(&i)?;
        let hi = &upper_half + &i;
        if !blocked(&lo) && !blocked(&hi) {
            return Some((lo, hi, i));
        }
        i += &Weight::one();
    }
    None
}

fn abs_dev(x: &BigRational, y: &BigRational) -> BigRational {
    (x - y).abs()
}

/// Steps 2 and 3 for one `Q ⊆ P` of size `q_size`.
pub fn build_completion(state: &GameState, q_indices: &[usize], params: &AdversaryParams) -> Result<CompletionTrace> {
    if state.revealed.len() != params.step1_count {
        return Err(Error::Domain(format!(
            "step 1 revealed {} items, expected {}",
            state.revealed.len(),
            params.step1_count
        )));
    }
    let distinct: BTreeSet<usize> = q_indices.iter().copied().collect();
    if q_indices.len() != params.q_size
        || distinct.len() != q_indices.len()
        || q_indices.iter().any(|&i| i >= state.revealed.len())
    {
        return Err(Error::Domain(format!(
            "Q must be {} distinct indices into the {} revealed items, got {q_indices:?}",
            params.q_size,
            state.revealed.len()
        )));
    }
    let mut q_indices = q_indices.to_vec();
    q_indices.sort_unstable();
    let q: Vec<Weight> = q_indices.iter().map(|&i| state.revealed[i].clone()).collect();
    let q_sum = Weight::sum(&q);
    let rest = params
        .capacity
        .checked_sub(&q_sum)
        .ok_or_else(|| Error::Contradiction(format!("ΣQ = {q_sum} exceeds the capacity")))?;

    let cap_q = to_rational(&params.capacity);
    let window_q = to_rational(&params.window);
    let a = ratio(3, 1) * to_rational(&rest) / params.one_plus_eps_n();

    let two = BigRational::from_integer(2.into());
    let a_lo = ratio(3, 1) * &params.eps * &cap_q / (&two * params.one_plus_eps_n());
    let a_hi = ratio(3, 1) * &cap_q / params.one_plus_eps_n();
    if a < a_lo || a > a_hi {
        return Err(Error::Contradiction(format!("a = {} escapes its range", format_fraction(&a))));
    }

    let j_low = ceil_nonneg(&(&a - &window_q))
        .ok_or_else(|| Error::Contradiction("J extends below zero".into()))?;
    let j_high = floor_nonneg(&(&a + &window_q)).expect("a + U is positive");
    if j_high > params.universe_max {
        return Err(Error::Contradiction("J extends past the universe".into()));
    }

    let mut forbidden = state.forbidden.clone();
    let live = |f: &ForbiddenSet, x: &Weight| x >= &j_low && x <= &j_high && !f.contains(x);
    let a_floor = floor_nonneg(&a).expect("a is positive");
    let a_ceil = ceil_nonneg(&a).expect("a is positive");
    let mut step2 = Vec::with_capacity(params.step2_count);
    let mut w = Weight::zero();
    for k in 0..params.step2_count {
        let drift = to_rational(&w) - &a * BigRational::from_integer(k.into());
        let above = drift.is_positive();
        let start = if above { &a_floor } else { &a_ceil };
        let pick = scan_outward(start, above, &j_low, &j_high, |x| live(&forbidden, x))
            .ok_or_else(|| Error::Contradiction("no live weight left in J".into()))?;
        forbidden.push(&pick)?;
        forbidden.check_budget()?;
        w += &pick;
        step2.push(pick);
    }
    let target = &a * BigRational::from_integer(params.step2_count.into());
    if abs_dev(&to_rational(&w), &target) > window_q {
        return Err(Error::Contradiction(format!("|w − a·{}| exceeds U", params.step2_count)));
    }

    let v = rest
        .checked_sub(&w)
        .ok_or_else(|| Error::Contradiction("step-2 weights overshoot N − ΣQ".into()))?;
    if abs_dev(&to_rational(&v), &(&two * &a)) > window_q {
        return Err(Error::Contradiction("|v − 2a| exceeds U".into()));
    }
    let (lo, hi, pair_offset) = find_pair(&v, &params.window, |x| x > &params.universe_max || forbidden.contains(x))
        .ok_or_else(|| Error::Contradiction("all U + 1 candidate pairs are deleted".into()))?;

    let mut r = step2.clone();
    r.push(lo.clone());
    r.push(hi.clone());
    if &q_sum + &Weight::sum(&r) != params.capacity {
        return Err(Error::Contradiction("ΣQ + ΣR differs from N".into()));
    }
    Ok(CompletionTrace { q_indices, q, q_sum, a, j_low, j_high, step2, w, v, pair: (lo, hi), pair_offset, r })
}

/// Nearest weight to `start` accepted by `ok`, trying `start` then
/// alternating sides (downward first when `down_first`), within `[low, high]`.
fn scan_outward(
    start: &Weight,
    down_first: bool,
    low: &Weight,
    high: &Weight,
    mut ok: impl FnMut(&Weight) -> bool,
) -> Option<Weight> {
    let one = Weight::one();
    let mut step = Weight::zero();
    loop {
        let down = start.checked_sub(&step).filter(|x| x >= low);
        let up = Some(start + &step).filter(|x| x <= high);
        if down.is_none() && up.is_none() {
            return None;
        }
        let order = if down_first { [down, up] } else { [up, down] };
        for c in order.into_iter().flatten() {
            if ok(&c) {
                return Some(c);
            }
        }
        step += &one;
    }
}

/// The step-1 items followed by the completion `R`; `n` items, capacity `N`.
pub fn completion_instance(state: &GameState, trace: &CompletionTrace, params: &AdversaryParams) -> Result<Instance> {
    let mut weights = state.revealed.clone();
    weights.extend(trace.r.iter().cloned());
    if weights.len() != params.n {
        return Err(Error::Contradiction(format!("completion has {} items, expected {}", weights.len(), params.n)));
    }
    Instance::new(weights, params.capacity.clone())
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    if k <= n {
        go(0, n, k, &mut vec![], &mut out);
    }
    out
}

impl CompletionTrace {
    /// Largest `|x − a|` over the weights of `R`.
    pub fn max_offset_from_a(&self) -> BigRational {
        self.r.iter().map(|x| abs_dev(&to_rational(x), &self.a)).max().unwrap_or_else(BigRational::zero)
    }

    pub fn a_string(&self) -> String {
        format_fraction(&self.a)
    }
}

/// `⌊a⌋ · k` stays within `k` of `a · k`; the steering check used by tests.
pub fn floor_picks_deviation(a: &BigRational, k: usize) -> BigRational {
    let kq = BigRational::from_integer(k.into());
    (a.floor() * &kq - a * &kq).abs()
}
