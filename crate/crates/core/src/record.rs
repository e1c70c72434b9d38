//! JSON records exchanged with the command line: the construction record and
//! its independent re-check.
//!
//! Every integer that can grow with `n` is a decimal string.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::adversary::{validate_params, AdversaryParams, ForbiddenSet};
use crate::analysis::Construction;
use crate::error::{Error, Result};
use crate::knapsack::{brute_force_optimum, Instance, DEFAULT_ENUMERATION_CAP};
use crate::rational::{format_fraction, parse_fraction, to_rational};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub n: String,
    pub eps: String,
    pub capacity: Weight,
    pub window: Weight,
    pub universe_max: Weight,
    pub step1_count: String,
    pub q_size: String,
    pub r_size: String,
    pub step2_count: String,
}

impl From<&AdversaryParams> for ParamsRecord {
    fn from(p: &AdversaryParams) -> Self {
        ParamsRecord {
            n: p.n.to_string(),
            eps: p.eps_string(),
            capacity: p.capacity.clone(),
            window: p.window.clone(),
            universe_max: p.universe_max.clone(),
            step1_count: p.step1_count.to_string(),
            q_size: p.q_size.to_string(),
            r_size: p.r_size.to_string(),
            step2_count: p.step2_count.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletionRecord {
    pub q_indices: Vec<usize>,
    pub q: Vec<Weight>,
    /// Exact `p/q` string.
    pub a: String,
    /// Inclusive bounds of `J`.
    pub j: [Weight; 2],
    pub step2: Vec<Weight>,
    pub w: Weight,
    pub v: Weight,
    pub pair: [Weight; 2],
    pub r: Vec<Weight>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionRecord {
    pub params: ParamsRecord,
    pub solver: String,
    pub revealed: Vec<Weight>,
    pub completions: Vec<CompletionRecord>,
}

impl From<&Construction> for ConstructionRecord {
    fn from(c: &Construction) -> Self {
        ConstructionRecord {
            params: ParamsRecord::from(&c.params),
            solver: c.solver.clone(),
            revealed: c.state.revealed.clone(),
            completions: c
                .completions
                .iter()
                .map(|(t, _)| CompletionRecord {
                    q_indices: t.q_indices.clone(),
                    q: t.q.clone(),
                    a: t.a_string(),
                    j: [t.j_low.clone(), t.j_high.clone()],
                    step2: t.step2.clone(),
                    w: t.w.clone(),
                    v: t.v.clone(),
                    pair: [t.pair.0.clone(), t.pair.1.clone()],
                    r: t.r.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassCheck {
    pub q_indices: Vec<usize>,
    pub pass: bool,
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordCheck {
    pub classes: Vec<ClassCheck>,
}

impl RecordCheck {
    pub fn all_pass(&self) -> bool {
        self.classes.iter().all(|c| c.pass)
    }

    pub fn passed(&self) -> usize {
        self.classes.iter().filter(|c| c.pass).count()
    }
}

fn strict_count(field: &str, s: &str) -> Result<usize> {
    let w = Weight::parse_decimal(s).map_err(|_| Error::BadRecord(format!("{field} = {s:?} is not a decimal count")))?;
    usize::try_from(w.into_biguint()).map_err(|_| Error::BadRecord(format!("{field} = {s} is out of range")))
}

impl ConstructionRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::BadRecord(e.to_string()))
    }

    /// Completion instance of one record entry: revealed items, then `R`.
    pub fn instance(&self, completion: &CompletionRecord) -> Result<Instance> {
        let mut weights = self.revealed.clone();
        weights.extend(completion.r.iter().cloned());
        Instance::new(weights, self.params.capacity.clone())
    }

    fn checked_params(&self) -> Result<AdversaryParams> {
        let n = strict_count("n", &self.params.n)?;
        let eps = parse_fraction(&self.params.eps).map_err(|e| Error::BadRecord(e.to_string()))?;
        let p = validate_params(n, &eps, &self.params.capacity)?;
        if ParamsRecord::from(&p) != self.params {
            return Err(Error::BadRecord("derived parameters disagree with the recorded ones".into()));
        }
        if p.n > DEFAULT_ENUMERATION_CAP {
            return Err(Error::OverCap { len: p.n, cap: DEFAULT_ENUMERATION_CAP });
        }
        Ok(p)
    }

    /// Re-derives every claim in the record from scratch: parameter
    /// validity, step-1 legality under the deletion rules, every completion's
    /// arithmetic, and the oracle's unique optimum `Q ∪ R`.
    ///
    /// Structural problems are errors; per-class problems are reported.
    pub fn check(&self) -> Result<RecordCheck> {
        let p = self.checked_params()?;
        if self.revealed.len() != p.step1_count {
            return Err(Error::BadRecord(format!("{} revealed items, expected {}", self.revealed.len(), p.step1_count)));
        }
        let mut forbidden = ForbiddenSet::new(&p.capacity);
        for x in &self.revealed {
            if x > &p.universe_max || forbidden.contains(x) {
                return Err(Error::BadRecord(format!("revealed weight {x} was not live when named")));
            }
            forbidden.push(x)?;
        }
        let expected = binomial(BigUint::from(p.step1_count), BigUint::from(p.q_size));
        if BigUint::from(self.completions.len()) != expected {
            return Err(Error::BadRecord(format!("{} completions, expected {expected}", self.completions.len())));
        }
        let mut seen_q = BTreeSet::new();
        for c in &self.completions {
            let set: BTreeSet<usize> = c.q_indices.iter().copied().collect();
            let sorted = c.q_indices.windows(2).all(|w| w[0] < w[1]);
            if !sorted || set.len() != p.q_size || set.iter().any(|&i| i >= p.step1_count) {
                return Err(Error::BadRecord(format!("Q indices {:?} are malformed", c.q_indices)));
            }
            if !seen_q.insert(c.q_indices.clone()) {
                return Err(Error::BadRecord(format!("Q indices {:?} appear twice", c.q_indices)));
            }
        }
        let classes = self.completions.iter().map(|c| self.check_class(&p, c)).collect::<Result<Vec<_>>>()?;
        Ok(RecordCheck { classes })
    }

    fn check_class(&self, p: &AdversaryParams, c: &CompletionRecord) -> Result<ClassCheck> {
        let mut problems = vec![];
        let q: Vec<Weight> = c.q_indices.iter().map(|&i| self.revealed[i].clone()).collect();
        if q != c.q {
            problems.push("Q weights do not match the revealed items".to_string());
        }
        let q_sum = Weight::sum(&q);
        if c.r.len() != p.r_size {
            problems.push(format!("|R| = {}, expected {}", c.r.len(), p.r_size));
        }
        let mut r_expected = c.step2.clone();
        r_expected.extend(c.pair.iter().cloned());
        if r_expected != c.r {
            problems.push("R is not step-2 picks followed by the pair".into());
        }
        if c.w != Weight::sum(&c.step2) {
            problems.push("w is not the step-2 sum".into());
        }
        match p.capacity.checked_sub(&q_sum) {
            Some(rest) => {
                let a = BigRational::from_integer(3.into()) * to_rational(&rest)
                    / ((BigRational::from_integer(1.into()) + &p.eps) * BigRational::from_integer(p.n.into()));
                if format_fraction(&a) != c.a {
                    problems.push(format!("a = {} does not match 3(N − ΣQ)/((1+ε)n) = {}", c.a, format_fraction(&a)));
                }
                if rest.checked_sub(&c.w).as_ref() != Some(&c.v) {
                    problems.push("v ≠ N − ΣQ − w".into());
                }
            }
            None => problems.push("ΣQ exceeds the capacity".into()),
        }
        if &q_sum + &Weight::sum(&c.r) != p.capacity {
            problems.push("ΣQ + ΣR ≠ N".into());
        }
        if c.r.iter().any(|x| x > &p.universe_max) {
            problems.push("a weight of R lies outside the universe".into());
        }
        let inst = self.instance(c)?;
        let opt = brute_force_optimum(&inst)?;
        let mut witness = c.q_indices.clone();
        witness.extend(p.step1_count..p.n);
        if opt.best_value != p.capacity {
            problems.push(format!("optimum is {}, not N = {}", opt.best_value, p.capacity));
        } else if !opt.unique {
            problems.push(format!("optimum N is reached by {} subsets", opt.witnesses.len()));
        } else if opt.witnesses[0] != witness {
            problems.push(format!("optimum is reached by {:?}, not Q ∪ R", opt.witnesses[0]));
        }
        Ok(ClassCheck { q_indices: c.q_indices.clone(), pass: problems.is_empty(), problems })
    }
}

/// Standalone check of an instance file: the optimum must equal the
/// capacity and be reached by exactly one subset.
pub fn check_instance(inst: &Instance) -> Result<(bool, String)> {
    let opt = brute_force_optimum(inst)?;
    let ok = opt.unique && &opt.best_value == inst.capacity();
    let msg = format!(
        "optimum {} of capacity {}, {} maximizing subset(s)",
        opt.best_value,
        inst.capacity(),
        opt.witnesses.len()
    );
    Ok((ok, msg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::construct;
    use crate::btmodel::builtin_solver;

    fn record() -> ConstructionRecord {
        let p = validate_params(8, &parse_fraction("1/2").unwrap(), &Weight::from(157464)).unwrap();
        let c = construct(&p, &mut builtin_solver("largest-live", 0).unwrap()).unwrap();
        ConstructionRecord::from(&c)
    }

    #[test]
    fn record_round_trips_and_checks() {
        let rec = record();
        let json = rec.to_json();
        let back = ConstructionRecord::from_json(&json).unwrap();
        assert_eq!(back, rec);
        let check = back.check().unwrap();
        assert_eq!(check.classes.len(), 6);
        assert!(check.all_pass(), "{check:?}");
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["params"]["capacity"], "157464");
        assert_eq!(v["params"]["n"], "8");
        assert!(v["completions"][0]["a"].is_string());
    }

    #[test]
    fn tampered_weight_fails_its_class() {
        let mut rec = record();
        let last = rec.completions[2].r.len() - 1;
        rec.completions[2].r[last] = &rec.completions[2].r[last] + &Weight::one();
        let check = rec.check().unwrap();
        assert!(!check.all_pass());
        assert!(!check.classes[2].pass);
        assert!(check.classes[2].problems.iter().any(|m| m.contains("ΣQ + ΣR")));
        assert_eq!(check.passed(), 5);
    }

    #[test]
    fn tampered_step1_is_structural() {
        let mut rec = record();
        rec.revealed[1] = rec.revealed[0].clone();
        assert!(matches!(rec.check(), Err(Error::BadRecord(_))));

        let mut rec = record();
        rec.params.capacity = Weight::from(100);
        assert!(rec.check().is_err());

        let mut rec = record();
        rec.completions.pop();
        assert!(rec.check().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&record().to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(ConstructionRecord::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn instance_check() {
        let good = Instance::from_u64(&[3, 5, 9], 9).unwrap();
        assert!(check_instance(&good).unwrap().0);
        let tied = Instance::from_u64(&[3, 5, 8], 8).unwrap();
        assert!(!check_instance(&tied).unwrap().0);
        let short = Instance::from_u64(&[3, 5], 9).unwrap();
        assert!(!check_instance(&short).unwrap().0);
    }
}
