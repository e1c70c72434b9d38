use btlab_core::adversary::{min_capacity, validate_params};
use btlab_core::analysis::{certify, construct, replay_solver};
use btlab_core::btmodel::{best_leaf_value, builtin_solver, run_bt, tree_width};
use btlab_core::knapsack::brute_force_optimum;
use btlab_core::rational::parse_fraction;
use btlab_core::record::ConstructionRecord;
use btlab_core::{Instance, Weight};

#[test]
fn construct_certify_and_reload() {
    let eps = parse_fraction("1/2").unwrap();
    let cap = min_capacity(8, &eps).unwrap();
    assert_eq!(cap, Weight::from(157_464u64));
    let p = validate_params(8, &eps, &cap).unwrap();

    let c = construct(&p, &mut builtin_solver("smallest-live", 0).unwrap()).unwrap();
    assert!(certify(&c).unwrap().all_pass());

    let json = ConstructionRecord::from(&c).to_json();
    let back = ConstructionRecord::from_json(&json).unwrap();
    assert!(back.check().unwrap().all_pass());

    for (_, inst) in &c.completions {
        let reread = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(&reread, inst);
        let opt = brute_force_optimum(&reread).unwrap();
        assert!(opt.unique);
        assert_eq!(opt.best_value, cap);
    }
}

#[test]
fn uncapped_replay_reaches_capacity() {
    let eps = parse_fraction("1/2").unwrap();
    let p = validate_params(4, &eps, &Weight::from(972u64)).unwrap();
    let c = construct(&p, &mut builtin_solver("largest-live", 0).unwrap()).unwrap();
    for (_, inst) in &c.completions {
        let tree = run_bt(&mut replay_solver(&c), inst, None).unwrap();
        assert!(tree_width(&tree) >= 1);
        assert_eq!(best_leaf_value(&tree, inst), p.capacity);
    }
}
