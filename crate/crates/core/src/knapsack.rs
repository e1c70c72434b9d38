//! Simple Knapsack instances, the exhaustive optimum oracle, and the
//! subset-sum enumerations behind the adversary's deletion rules.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::Weight;

/// Largest item count any `2^n` / `3^n` enumeration will accept by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// A Simple Knapsack instance: each item's value equals its weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Instance {
    capacity: Weight,
    weights: Vec<Weight>,
}

#[derive(Deserialize)]
struct RawInstance {
    capacity: Weight,
    weights: Vec<Weight>,
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInstance::deserialize(d)?;
        Instance::new(raw.weights, raw.capacity).map_err(serde::de::Error::custom)
    }
}

impl Instance {
    pub fn new(weights: Vec<Weight>, capacity: Weight) -> Result<Self> {
        if capacity.is_zero() {
            return Err(Error::BadInstance("capacity must be positive".into()));
        }
        Ok(Instance { capacity, weights })
    }

    pub fn from_u64(weights: &[u64], capacity: u64) -> Result<Self> {
        Instance::new(weights.iter().map(|&w| Weight::from(w)).collect(), Weight::from(capacity))
    }

    pub fn capacity(&self) -> &Weight {
        &self.capacity
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn with_item(&self, w: Weight) -> Instance {
        let mut weights = self.weights.clone();
        weights.push(w);
        Instance { capacity: self.capacity.clone(), weights }
    }

    /// Parses `{"capacity": "<decimal>", "weights": ["<decimal>", ...]}`.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::BadInstance(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }
}

/// Outcome of the exhaustive scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub best_value: Weight,
    /// Every maximizing index subset, each sorted ascending, listed in
    /// ascending bitmask order.
    pub witnesses: Vec<Vec<usize>>,
    pub unique: bool,
}

fn check_cap(len: usize, cap: usize) -> Result<()> {
    if len > cap {
        Err(Error::OverCap { len, cap })
    } else {
        Ok(())
    }
}

pub fn brute_force_optimum(inst: &Instance) -> Result<OptResult> {
    brute_force_optimum_capped(inst, DEFAULT_ENUMERATION_CAP)
}

/// Scans all `2^n` subsets, walking them in Gray-code order so each step
/// adds or removes a single weight.
pub fn brute_force_optimum_capped(inst: &Instance, cap: usize) -> Result<OptResult> {
    let n = inst.len();
    check_cap(n, cap.min(63))?;
    let weights = inst.weights();
    let mut best = Weight::zero();
    let mut masks: Vec<u64> = vec![0];
    let mut mask = 0u64;
    let mut sum = Weight::zero();
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask & (1 << bit) != 0 {
            sum += &weights[bit];
        } else {
            sum = &sum - &weights[bit];
        }
        if sum > *inst.capacity() {
            continue;
        }
        match sum.cmp(&best) {
            std::cmp::Ordering::Greater => {
                best = sum.clone();
                masks.clear();
                masks.push(mask);
            }
            std::cmp::Ordering::Equal => masks.push(mask),
            std::cmp::Ordering::Less => {}
        }
    }
    masks.sort_unstable();
    let witnesses: Vec<Vec<usize>> = masks
        .iter()
        .map(|&m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect();
    Ok(OptResult { best_value: best, unique: witnesses.len() == 1, witnesses })
}

/// `{ |s₁ − s₋₁| }` over every assignment of the seen items to +1, −1 or 0.
///
/// Built one item at a time on absolute values: the signed set is closed
/// under negation, so `|±d ± x|` collapses to `d + x` and `|d − x|`.
pub fn signed_sums(seen: &[Weight]) -> Result<BTreeSet<Weight>> {
    signed_sums_capped(seen, DEFAULT_ENUMERATION_CAP)
}

pub fn signed_sums_capped(seen: &[Weight], cap: usize) -> Result<BTreeSet<Weight>> {
    check_cap(seen.len(), cap)?;
    let mut acc = BTreeSet::from([Weight::zero()]);
    for x in seen {
        extend_signed(&mut acc, x);
    }
    Ok(acc)
}

/// Returns the values that were not already present.
pub(crate) fn extend_signed(acc: &mut BTreeSet<Weight>, x: &Weight) -> Vec<Weight> {
    let candidates: Vec<Weight> = acc.iter().flat_map(|d| [d + x, d.abs_diff(x)]).collect();
    candidates.into_iter().filter(|c| acc.insert(c.clone())).collect()
}

/// All `2^|seen|` subset sums with duplicates collapsed.
pub fn subset_sums(seen: &[Weight]) -> Result<BTreeSet<Weight>> {
    subset_sums_capped(seen, DEFAULT_ENUMERATION_CAP)
}

pub fn subset_sums_capped(seen: &[Weight], cap: usize) -> Result<BTreeSet<Weight>> {
    check_cap(seen.len(), cap)?;
    let mut acc = BTreeSet::from([Weight::zero()]);
    for x in seen {
        extend_subset(&mut acc, x);
    }
    Ok(acc)
}

pub(crate) fn extend_subset(acc: &mut BTreeSet<Weight>, x: &Weight) -> Vec<Weight> {
    let candidates: Vec<Weight> = acc.iter().map(|s| s + x).collect();
    candidates.into_iter().filter(|c| acc.insert(c.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ws(v: &[u64]) -> Vec<Weight> {
        v.iter().map(|&x| Weight::from(x)).collect()
    }

    fn set(v: &[u64]) -> BTreeSet<Weight> {
        v.iter().map(|&x| Weight::from(x)).collect()
    }

    // Independent oracle: walk all 3^k sign vectors as base-3 numerals.
    fn signed_oracle(seen: &[u64]) -> BTreeSet<Weight> {
        let k = seen.len() as u32;
        (0..3u64.pow(k))
            .map(|mut code| {
                let (mut plus, mut minus) = (0u64, 0u64);
                for &x in seen {
                    match code % 3 {
                        1 => plus += x,
                        2 => minus += x,
                        _ => {}
                    }
                    code /= 3;
                }
                Weight::from(plus.abs_diff(minus))
            })
            .collect()
    }

    fn subset_oracle(seen: &[u64]) -> BTreeSet<Weight> {
        (0..1u64 << seen.len())
            .map(|m| {
                Weight::from(
                    seen.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, x)| x).sum::<u64>(),
                )
            })
            .collect()
    }

    // Independent oracle for the optimum: plain mask loop with u64 sums.
    fn optimum_oracle(weights: &[u64], cap: u64) -> (u64, Vec<Vec<usize>>) {
        let n = weights.len();
        let mut best = 0;
        let mut wit = vec![];
        for m in 0u64..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| m & (1 << i) != 0).collect();
            let s: u64 = idx.iter().map(|&i| weights[i]).sum();
            if s > cap {
                continue;
            }
            if s > best {
                best = s;
                wit.clear();
            }
            if s == best {
                wit.push(idx);
            }
        }
        (best, wit)
    }

    #[test]
    fn optimum_examples() {
        let r = brute_force_optimum(&Instance::from_u64(&[3, 5, 9], 9).unwrap()).unwrap();
        assert_eq!(r.best_value, Weight::from(9));
        assert_eq!(r.witnesses, vec![vec![2]]);
        assert!(r.unique);

        let r = brute_force_optimum(&Instance::from_u64(&[], 7).unwrap()).unwrap();
        assert_eq!(r.best_value, Weight::zero());
        assert_eq!(r.witnesses, vec![Vec::<usize>::new()]);
        assert!(r.unique);

        let r = brute_force_optimum(&Instance::from_u64(&[3, 5, 8], 10).unwrap()).unwrap();
        assert_eq!(r.best_value, Weight::from(8));
        assert_eq!(r.witnesses, vec![vec![0, 1], vec![2]]);
        assert!(!r.unique);
    }

    #[test]
    fn optimum_refuses_over_cap() {
        let inst = Instance::from_u64(&[1; 5], 3).unwrap();
        assert_eq!(brute_force_optimum_capped(&inst, 4), Err(Error::OverCap { len: 5, cap: 4 }));
        let big = Instance::from_u64(&[1; 25], 3).unwrap();
        let msg = brute_force_optimum(&big).unwrap_err().to_string();
        assert!(msg.contains("cap of 24"), "{msg}");
    }

    #[test]
    fn signed_sum_examples() {
        assert_eq!(signed_sums(&ws(&[5, 9])).unwrap(), set(&[0, 4, 5, 9, 14]));
        assert_eq!(signed_sums(&[]).unwrap(), set(&[0]));
        assert_eq!(signed_sums(&ws(&[2, 2])).unwrap(), set(&[0, 2, 4]));
    }

    #[test]
    fn subset_sum_examples() {
        assert_eq!(subset_sums(&ws(&[5, 9])).unwrap(), set(&[0, 5, 9, 14]));
        assert_eq!(subset_sums(&[]).unwrap(), set(&[0]));
        assert_eq!(subset_sums(&ws(&[1, 2, 3])).unwrap(), set(&[0, 1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn sums_refuse_over_cap() {
        let many = ws(&[1; 30]);
        assert!(matches!(signed_sums(&many), Err(Error::OverCap { len: 30, cap: 24 })));
        assert!(matches!(subset_sums(&many), Err(Error::OverCap { .. })));
    }

    #[test]
    fn instance_rejects_zero_capacity() {
        assert!(Instance::from_u64(&[1], 0).is_err());
        assert!(Instance::from_json(r#"{"capacity":"0","weights":[]}"#).is_err());
    }

    #[test]
    fn instance_json_shape() {
        let inst = Instance::from_u64(&[3, 5], 9).unwrap();
        let v: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        assert_eq!(v, serde_json::json!({"capacity": "9", "weights": ["3", "5"]}));
        assert!(Instance::from_json(r#"{"capacity":9,"weights":[]}"#).is_err());
    }

    proptest! {
        #[test]
        fn signed_sums_match_oracle(seen in prop::collection::vec(0u64..50, 0..7)) {
            let got = signed_sums(&ws(&seen)).unwrap();
            prop_assert!(got.len() as u64 <= 3u64.pow(seen.len() as u32));
            prop_assert_eq!(got, signed_oracle(&seen));
        }

        #[test]
        fn subset_sums_match_oracle_and_nest(seen in prop::collection::vec(0u64..50, 0..8)) {
            let subs = subset_sums(&ws(&seen)).unwrap();
            prop_assert!(subs.len() as u64 <= 1u64 << seen.len());
            prop_assert_eq!(&subs, &subset_oracle(&seen));
            let signed = signed_sums(&ws(&seen)).unwrap();
            prop_assert!(subs.is_subset(&signed));
        }

        #[test]
        fn optimum_matches_oracle(weights in prop::collection::vec(0u64..40, 0..10), cap in 1u64..150) {
            let r = brute_force_optimum(&Instance::from_u64(&weights, cap).unwrap()).unwrap();
            let (best, wit) = optimum_oracle(&weights, cap);
            prop_assert_eq!(r.best_value, Weight::from(best));
            prop_assert_eq!(r.unique, wit.len() == 1);
            prop_assert_eq!(r.witnesses, wit);
        }

        #[test]
        fn adding_an_item_never_hurts(weights in prop::collection::vec(0u64..40, 0..9), extra in 0u64..60, cap in 1u64..150) {
            let inst = Instance::from_u64(&weights, cap).unwrap();
            let before = brute_force_optimum(&inst).unwrap().best_value;
            let after = brute_force_optimum(&inst.with_item(Weight::from(extra))).unwrap().best_value;
            prop_assert!(after >= before);
        }

        #[test]
        fn zero_padding_keeps_optimum(weights in prop::collection::vec(0u64..40, 0..8), zeros in 0usize..4, cap in 1u64..150) {
            let inst = Instance::from_u64(&weights, cap).unwrap();
            let mut padded = inst.clone();
            for _ in 0..zeros {
                padded = padded.with_item(Weight::zero());
            }
            prop_assert_eq!(
                brute_force_optimum(&inst).unwrap().best_value,
                brute_force_optimum(&padded).unwrap().best_value
            );
        }
    }
}
