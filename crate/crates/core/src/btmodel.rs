//! Priority branching-tree (BT) algorithms: an ordering rule that picks the
//! next data item and a choice rule that extends each partial solution.
//!
//! Data items are weights. An ordering rule sees the items revealed so far and
//! a view of what is still available ([`ItemPool`]), never the choices made, so
//! only fixed and adaptive algorithms can be expressed.

use std::collections::BTreeMap;

use num_bigint::RandBigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::knapsack::{Instance, DEFAULT_ENUMERATION_CAP};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrderingKind {
    /// Order is a constant function of the data items.
    Fixed,
    /// Order may depend on the revealed items, not on the choices made.
    Adaptive,
    /// Order depends on prior choices too. Never accepted.
    FullyAdaptive,
}

/// Ordered-set view of the items an ordering rule may name next.
pub trait ItemPool {
    fn contains(&self, w: &Weight) -> bool;
    /// Smallest available item `>= w`.
    fn next_at_least(&self, w: &Weight) -> Option<Weight>;
    /// Largest available item `<= w`.
    fn next_at_most(&self, w: &Weight) -> Option<Weight>;
    fn min_item(&self) -> Option<Weight>;
    fn max_item(&self) -> Option<Weight>;
}

pub trait OrderingRule: Send {
    fn kind(&self) -> OrderingKind;
    fn name(&self) -> String;
    /// Head of the ordering over the available items.
    fn next_item(&mut self, revealed: &[Weight], pool: &dyn ItemPool) -> Option<Weight>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BTChoice {
    TakeItem,
    SkipItem,
    /// Terminates the choice list; later entries are ignored.
    Cut,
}

pub struct ChoiceContext<'a> {
    pub capacity: &'a Weight,
    pub revealed: &'a [Weight],
    pub current: &'a Weight,
    /// In/out decisions of this partial solution, aligned with `revealed`.
    pub prior: &'a [bool],
    pub load: &'a Weight,
}

impl ChoiceContext<'_> {
    pub fn fits(&self) -> bool {
        &(self.load + self.current) <= self.capacity
    }
}

pub trait ChoiceRule: Send {
    fn name(&self) -> String;
    fn choices(&self, ctx: &ChoiceContext<'_>) -> Vec<BTChoice>;
}

pub struct BTAlgorithm {
    ordering: Box<dyn OrderingRule>,
    choice: Box<dyn ChoiceRule>,
}

impl std::fmt::Debug for BTAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BTAlgorithm")
            .field("ordering", &self.ordering.name())
            .field("choice", &self.choice.name())
            .field("kind", &self.ordering.kind())
            .finish()
    }
}

impl BTAlgorithm {
    pub fn new(ordering: Box<dyn OrderingRule>, choice: Box<dyn ChoiceRule>) -> Result<Self> {
        if ordering.kind() == OrderingKind::FullyAdaptive {
            return Err(Error::Unsupported(format!(
                "ordering `{}` is fully adaptive; only fixed and adaptive orderings are modelled",
                ordering.name()
            )));
        }
        Ok(BTAlgorithm { ordering, choice })
    }

    /// Descending weight, take if it fits, otherwise skip, then cut.
    pub fn greedy() -> Self {
        Self::new(Box::new(LargestFirst), Box::new(GreedyChoice)).expect("fixed ordering")
    }

    /// Keeps both branches (take when it fits, skip) under the given ordering.
    pub fn exhaustive(ordering: Box<dyn OrderingRule>) -> Result<Self> {
        Self::new(ordering, Box::new(TakeOrSkip))
    }

    pub fn kind(&self) -> OrderingKind {
        self.ordering.kind()
    }

    pub fn name(&self) -> String {
        format!("{}+{}", self.ordering.name(), self.choice.name())
    }

    pub fn ordering_mut(&mut self) -> &mut dyn OrderingRule {
        self.ordering.as_mut()
    }

    pub fn choice_rule(&self) -> &dyn ChoiceRule {
        self.choice.as_ref()
    }

    fn choice_list(&self, ctx: &ChoiceContext<'_>) -> Vec<BTChoice> {
        let mut out = Vec::with_capacity(2);
        for c in self.choice.choices(ctx) {
            if c == BTChoice::Cut {
                break;
            }
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Built-in rules

/// Largest available weight first.
#[derive(Clone, Copy, Debug, Default)]
pub struct LargestFirst;

impl OrderingRule for LargestFirst {
    fn kind(&self) -> OrderingKind {
        OrderingKind::Fixed
    }
    fn name(&self) -> String {
        "largest-live".into()
    }
    fn next_item(&mut self, _revealed: &[Weight], pool: &dyn ItemPool) -> Option<Weight> {
        pool.max_item()
    }
}

/// Smallest available weight first.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmallestFirst;

impl OrderingRule for SmallestFirst {
    fn kind(&self) -> OrderingKind {
        OrderingKind::Fixed
    }
    fn name(&self) -> String {
        "smallest-live".into()
    }
    fn next_item(&mut self, _revealed: &[Weight], pool: &dyn ItemPool) -> Option<Weight> {
        pool.min_item()
    }
}

/// Draws a uniform point between the smallest and largest available item and
/// names the nearest available item at or above it (below, if none above).
#[derive(Clone, Debug)]
pub struct SeededRandom {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededRandom {
    pub fn new(seed: u64) -> Self {
        SeededRandom { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl OrderingRule for SeededRandom {
    fn kind(&self) -> OrderingKind {
        OrderingKind::Adaptive
    }
    fn name(&self) -> String {
        format!("seeded-random({})", self.seed)
    }
    fn next_item(&mut self, _revealed: &[Weight], pool: &dyn ItemPool) -> Option<Weight> {
        let lo = pool.min_item()?;
        let hi = pool.max_item()?;
        let upper = hi.as_biguint() + 1u32;
        let point = Weight::from(self.rng.gen_biguint_range(lo.as_biguint(), &upper));
        pool.next_at_least(&point).or_else(|| pool.next_at_most(&point))
    }
}

/// Names the listed weights first, in list order, then falls back to the
/// smallest available item. The order is a constant function of the items.
#[derive(Clone, Debug)]
pub struct PriorityOrder {
    front: Vec<Weight>,
}

impl PriorityOrder {
    pub fn new(front: Vec<Weight>) -> Self {
        PriorityOrder { front }
    }
}

impl OrderingRule for PriorityOrder {
    fn kind(&self) -> OrderingKind {
        OrderingKind::Fixed
    }
    fn name(&self) -> String {
        "priority".into()
    }
    fn next_item(&mut self, _revealed: &[Weight], pool: &dyn ItemPool) -> Option<Weight> {
        self.front.iter().find(|w| pool.contains(w)).cloned().or_else(|| pool.min_item())
    }
}

/// `[Take, Cut]` when the item fits, `[Skip, Cut]` otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyChoice;

impl ChoiceRule for GreedyChoice {
    fn name(&self) -> String {
        "greedy".into()
    }
    fn choices(&self, ctx: &ChoiceContext<'_>) -> Vec<BTChoice> {
        if ctx.fits() {
            vec![BTChoice::TakeItem, BTChoice::Cut]
        } else {
            vec![BTChoice::SkipItem, BTChoice::Cut]
        }
    }
}

/// `[Take, Skip]` when the item fits, `[Skip]` otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct TakeOrSkip;

impl ChoiceRule for TakeOrSkip {
    fn name(&self) -> String {
        "exhaustive".into()
    }
    fn choices(&self, ctx: &ChoiceContext<'_>) -> Vec<BTChoice> {
        if ctx.fits() {
            vec![BTChoice::TakeItem, BTChoice::SkipItem]
        } else {
            vec![BTChoice::SkipItem]
        }
    }
}

pub const SOLVER_NAMES: [&str; 3] = ["largest-live", "smallest-live", "seeded-random"];

/// Registry of the built-in solvers: the named ordering paired with the
/// exhaustive choice rule. New strategies plug in through [`OrderingRule`].
pub fn builtin_solver(name: &str, seed: u64) -> Result<BTAlgorithm> {
    let ordering: Box<dyn OrderingRule> = match name {
        "largest-live" => Box::new(LargestFirst),
        "smallest-live" => Box::new(SmallestFirst),
        "seeded-random" => Box::new(SeededRandom::new(seed)),
        other => {
            return Err(Error::Domain(format!(
                "unknown solver `{other}` (expected one of {})",
                SOLVER_NAMES.join(", ")
            )))
        }
    };
    BTAlgorithm::exhaustive(ordering)
}

// ---------------------------------------------------------------------------
// Finite pools and execution

/// The unprocessed items of a concrete instance (a multiset).
#[derive(Clone, Debug, Default)]
pub struct FinitePool {
    counts: BTreeMap<Weight, usize>,
}

impl FinitePool {
    pub fn new(items: &[Weight]) -> Self {
        let mut counts = BTreeMap::new();
        for w in items {
            *counts.entry(w.clone()).or_insert(0) += 1;
        }
        FinitePool { counts }
    }

    fn remove(&mut self, w: &Weight) -> bool {
        match self.counts.get_mut(w) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(w);
                true
            }
            None => false,
        }
    }
}

impl ItemPool for FinitePool {
    fn contains(&self, w: &Weight) -> bool {
        self.counts.contains_key(w)
    }
    fn next_at_least(&self, w: &Weight) -> Option<Weight> {
        self.counts.range(w..).next().map(|(k, _)| k.clone())
    }
    fn next_at_most(&self, w: &Weight) -> Option<Weight> {
        self.counts.range(..=w).next_back().map(|(k, _)| k.clone())
    }
    fn min_item(&self) -> Option<Weight> {
        self.counts.keys().next().cloned()
    }
    fn max_item(&self) -> Option<Weight> {
        self.counts.keys().next_back().cloned()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialSolution {
    /// Index into the previous level (`0` refers to the root on level one).
    pub parent: usize,
    /// In/out decision per processed item, in processing order.
    pub taken: Vec<bool>,
    pub load: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    /// Index of the processed item in the instance.
    pub item_index: usize,
    pub item_weight: Weight,
    pub solutions: Vec<PartialSolution>,
}

/// The tree of partial solutions, one level per processed item. The root
/// (empty solution) is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComputationTree {
    pub capacity: Weight,
    pub width_cap: Option<usize>,
    pub levels: Vec<Level>,
    pub width_per_level: Vec<usize>,
    /// Root plus every partial solution on every level.
    pub total_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub level: usize,
    pub item_weight: Weight,
    pub width: usize,
    pub nodes_total: usize,
}

impl ComputationTree {
    pub fn processing_order(&self) -> Vec<Weight> {
        self.levels.iter().map(|l| l.item_weight.clone()).collect()
    }

    /// One row per level with the running node count (root included).
    pub fn trace(&self) -> Vec<TraceRow> {
        let mut nodes = 1;
        self.levels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                nodes += l.solutions.len();
                TraceRow { level: k + 1, item_weight: l.item_weight.clone(), width: l.solutions.len(), nodes_total: nodes }
            })
            .collect()
    }

    /// Complete solutions, i.e. the last level (or the root if nothing was processed).
    pub fn leaves(&self) -> Vec<&PartialSolution> {
        match self.levels.last() {
            Some(l) => l.solutions.iter().collect(),
            None => vec![],
        }
    }
}

/// Expands each live partial solution by its choice list. Returns the next
/// level, truncated to `width_cap` in expansion order.
pub(crate) fn expand(
    alg: &BTAlgorithm,
    capacity: &Weight,
    revealed: &[Weight],
    current: &Weight,
    live: &[PartialSolution],
    width_cap: Option<usize>,
) -> Vec<PartialSolution> {
    let limit = width_cap.unwrap_or(usize::MAX);
    let mut next = Vec::new();
    'outer: for (pi, sol) in live.iter().enumerate() {
        let ctx = ChoiceContext { capacity, revealed, current, prior: &sol.taken, load: &sol.load };
        for c in alg.choice_list(&ctx) {
            if next.len() >= limit {
                break 'outer;
            }
            let take = c == BTChoice::TakeItem;
            let mut taken = sol.taken.clone();
            taken.push(take);
            let load = if take { &sol.load + current } else { sol.load.clone() };
            next.push(PartialSolution { parent: pi, taken, load });
        }
    }
    next
}

pub(crate) fn root_solution() -> PartialSolution {
    PartialSolution { parent: 0, taken: vec![], load: Weight::zero() }
}

pub fn run_bt(alg: &mut BTAlgorithm, inst: &Instance, width_cap: Option<usize>) -> Result<ComputationTree> {
    let n = inst.len();
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::OverCap { len: n, cap: DEFAULT_ENUMERATION_CAP });
    }
    if width_cap == Some(0) {
        return Err(Error::Domain("width cap must be at least 1".into()));
    }
    let mut pool = FinitePool::new(inst.weights());
    let mut processed = vec![false; n];
    let mut revealed: Vec<Weight> = Vec::with_capacity(n);
    let mut live = vec![root_solution()];
    let mut levels = Vec::with_capacity(n);
    let mut total_nodes = 1;

    for _ in 0..n {
        let w = alg
            .ordering
            .next_item(&revealed, &pool)
            .ok_or_else(|| Error::ModelViolation("ordering named no item while items remain".into()))?;
        if !pool.remove(&w) {
            return Err(Error::ModelViolation(format!("ordering named weight {w}, which is not among the remaining items")));
        }
        let item_index = (0..n)
            .find(|&i| !processed[i] && inst.weights()[i] == w)
            .expect("pool and index bookkeeping agree");
        processed[item_index] = true;

        let next = expand(alg, inst.capacity(), &revealed, &w, &live, width_cap);
        total_nodes += next.len();
        revealed.push(w.clone());
        levels.push(Level { item_index, item_weight: w, solutions: next.clone() });
        live = next;
    }

    let width_per_level = levels.iter().map(|l| l.solutions.len()).collect();
    Ok(ComputationTree { capacity: inst.capacity().clone(), width_cap, levels, width_per_level, total_nodes })
}

pub fn tree_width(tree: &ComputationTree) -> usize {
    tree.width_per_level.iter().copied().max().unwrap_or(0)
}

/// Best feasible load among the complete solutions.
pub fn best_leaf_value(tree: &ComputationTree, inst: &Instance) -> Weight {
    if tree.levels.is_empty() {
        return Weight::zero();
    }
    tree.leaves()
        .into_iter()
        .map(|s| &s.load)
        .filter(|l| *l <= inst.capacity())
        .max()
        .cloned()
        .unwrap_or_else(Weight::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::brute_force_optimum;
    use proptest::prelude::*;

    fn w(v: u64) -> Weight {
        Weight::from(v)
    }

    struct Scripted(Vec<Weight>);

    impl OrderingRule for Scripted {
        fn kind(&self) -> OrderingKind {
            OrderingKind::Adaptive
        }
        fn name(&self) -> String {
            "scripted".into()
        }
        fn next_item(&mut self, revealed: &[Weight], _pool: &dyn ItemPool) -> Option<Weight> {
            self.0.get(revealed.len()).cloned()
        }
    }

    struct PeekAtChoices;

    impl OrderingRule for PeekAtChoices {
        fn kind(&self) -> OrderingKind {
            OrderingKind::FullyAdaptive
        }
        fn name(&self) -> String {
            "peek".into()
        }
        fn next_item(&mut self, _: &[Weight], pool: &dyn ItemPool) -> Option<Weight> {
            pool.min_item()
        }
    }

    fn exhaustive_desc() -> BTAlgorithm {
        BTAlgorithm::exhaustive(Box::new(LargestFirst)).unwrap()
    }

    #[test]
    fn greedy_on_three_items() {
        let inst = Instance::from_u64(&[3, 5, 9], 9).unwrap();
        let tree = run_bt(&mut BTAlgorithm::greedy(), &inst, None).unwrap();
        assert_eq!(tree.width_per_level, vec![1, 1, 1]);
        assert_eq!(tree.processing_order(), vec![w(9), w(5), w(3)]);
        let leaf = tree.leaves()[0];
        assert_eq!(leaf.taken, vec![true, false, false]);
        assert_eq!(tree_width(&tree), 1);
        assert_eq!(best_leaf_value(&tree, &inst), w(9));
    }

    #[test]
    fn empty_instance_has_no_levels() {
        let inst = Instance::from_u64(&[], 4).unwrap();
        let tree = run_bt(&mut BTAlgorithm::greedy(), &inst, None).unwrap();
        assert!(tree.levels.is_empty());
        assert_eq!(tree.total_nodes, 1);
        assert_eq!(tree_width(&tree), 0);
        assert_eq!(best_leaf_value(&tree, &inst), Weight::zero());
    }

    #[test]
    fn exhaustive_matches_oracle_on_small_example() {
        let inst = Instance::from_u64(&[3, 5, 8], 10).unwrap();
        let tree = run_bt(&mut exhaustive_desc(), &inst, None).unwrap();
        assert!(*tree.width_per_level.last().unwrap() <= 8);
        assert_eq!(best_leaf_value(&tree, &inst), w(8));
    }

    #[test]
    fn exhaustive_width_doubles_when_everything_fits() {
        let inst = Instance::from_u64(&[1, 2, 3], 10).unwrap();
        let tree = run_bt(&mut exhaustive_desc(), &inst, None).unwrap();
        assert_eq!(tree.width_per_level, vec![2, 4, 8]);
        assert_eq!(tree_width(&tree), 8);
        assert_eq!(tree.total_nodes, 1 + 2 + 4 + 8);
        let last = tree.trace().pop().unwrap();
        assert_eq!((last.level, last.width, last.nodes_total), (3, 8, 15));
    }

    #[test]
    fn cap_keeps_earliest_expansions() {
        let inst = Instance::from_u64(&[1, 2, 3], 10).unwrap();
        let tree = run_bt(&mut exhaustive_desc(), &inst, Some(3)).unwrap();
        assert_eq!(tree.width_per_level, vec![2, 3, 3]);
        // Take-first order: {3,2,1}, {3,2}, {3,1}.
        let loads: Vec<_> = tree.leaves().iter().map(|s| s.load.clone()).collect();
        assert_eq!(loads, vec![w(6), w(5), w(4)]);
        assert!(run_bt(&mut exhaustive_desc(), &inst, Some(0)).is_err());
    }

    #[test]
    fn ordering_outside_remaining_is_a_violation() {
        let inst = Instance::from_u64(&[3, 5], 9).unwrap();
        let mut alg = BTAlgorithm::exhaustive(Box::new(Scripted(vec![w(3), w(3)]))).unwrap();
        match run_bt(&mut alg, &inst, None) {
            Err(Error::ModelViolation(m)) => assert!(m.contains('3'), "{m}"),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn fully_adaptive_is_rejected() {
        let err = BTAlgorithm::exhaustive(Box::new(PeekAtChoices)).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn cut_drops_the_rest_of_the_list() {
        struct CutFirst;
        impl ChoiceRule for CutFirst {
            fn name(&self) -> String {
                "cut".into()
            }
            fn choices(&self, _: &ChoiceContext<'_>) -> Vec<BTChoice> {
                vec![BTChoice::Cut, BTChoice::TakeItem]
            }
        }
        let inst = Instance::from_u64(&[1, 2], 10).unwrap();
        let mut alg = BTAlgorithm::new(Box::new(LargestFirst), Box::new(CutFirst)).unwrap();
        let tree = run_bt(&mut alg, &inst, None).unwrap();
        assert_eq!(tree.width_per_level, vec![0, 0]);
        assert_eq!(best_leaf_value(&tree, &inst), Weight::zero());
    }

    #[test]
    fn registry_knows_the_builtins() {
        for name in SOLVER_NAMES {
            assert_eq!(builtin_solver(name, 7).unwrap().choice_rule().name(), "exhaustive");
        }
        assert!(builtin_solver("oracle", 0).is_err());
        assert_eq!(builtin_solver("largest-live", 0).unwrap().kind(), OrderingKind::Fixed);
        assert_eq!(builtin_solver("seeded-random", 0).unwrap().kind(), OrderingKind::Adaptive);
    }

    fn permutations(v: &[u64]) -> Vec<Vec<u64>> {
        if v.len() <= 1 {
            return vec![v.to_vec()];
        }
        let mut out = vec![];
        for i in 0..v.len() {
            let mut rest = v.to_vec();
            let x = rest.remove(i);
            for mut p in permutations(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn fixed_orders_ignore_presentation() {
        let base = [4u64, 9, 1, 9, 6];
        let fixed: Vec<fn() -> Box<dyn OrderingRule>> = vec![
            || Box::new(LargestFirst),
            || Box::new(SmallestFirst),
            || Box::new(PriorityOrder::new(vec![w(6), w(1)])),
        ];
        for make in fixed {
            let mut orders = permutations(&base).into_iter().map(|p| {
                let inst = Instance::from_u64(&p, 20).unwrap();
                let mut alg = BTAlgorithm::exhaustive(make()).unwrap();
                assert_eq!(alg.kind(), OrderingKind::Fixed);
                run_bt(&mut alg, &inst, None).unwrap().processing_order()
            });
            let first = orders.next().unwrap();
            assert!(orders.all(|o| o == first));
        }
    }

    proptest! {
        #[test]
        fn uncapped_exhaustive_equals_oracle(weights in prop::collection::vec(0u64..60, 0..9), cap in 1u64..200, seed in 0u64..1000) {
            let inst = Instance::from_u64(&weights, cap).unwrap();
            let best = brute_force_optimum(&inst).unwrap().best_value;
            let mut alg = builtin_solver("seeded-random", seed).unwrap();
            let tree = run_bt(&mut alg, &inst, None).unwrap();
            prop_assert_eq!(best_leaf_value(&tree, &inst), best);
        }

        #[test]
        fn capped_width_never_exceeds_cap(weights in prop::collection::vec(0u64..60, 0..9), cap in 1u64..200, width in 1usize..10) {
            let inst = Instance::from_u64(&weights, cap).unwrap();
            let tree = run_bt(&mut exhaustive_desc(), &inst, Some(width)).unwrap();
            prop_assert!(tree_width(&tree) <= width);
        }

        #[test]
        fn greedy_is_width_one(weights in prop::collection::vec(0u64..60, 1..9), cap in 1u64..200) {
            let inst = Instance::from_u64(&weights, cap).unwrap();
            let tree = run_bt(&mut BTAlgorithm::greedy(), &inst, None).unwrap();
            prop_assert_eq!(tree_width(&tree), 1);
        }

        #[test]
        fn every_solution_extends_its_parent(weights in prop::collection::vec(0u64..60, 1..7), cap in 1u64..200) {
            let inst = Instance::from_u64(&weights, cap).unwrap();
            let tree = run_bt(&mut exhaustive_desc(), &inst, Some(5)).unwrap();
            for k in 1..tree.levels.len() {
                let prev = &tree.levels[k - 1].solutions;
                for s in &tree.levels[k].solutions {
                    prop_assert_eq!(&s.taken[..k], &prev[s.parent].taken[..]);
                }
            }
        }
    }
}
