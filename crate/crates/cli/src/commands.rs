use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use btlab_core::adversary::{
    build_completion, completion_instance, index_subsets, min_capacity, play_round, validate_params, AdversaryParams,
    GameState,
};
use btlab_core::analysis::{approx_exponent, approx_ratio_experiment, bounds_table, certify, construct as build, replay_solver};
use btlab_core::btmodel::{builtin_solver, run_bt, tree_width};
use btlab_core::rational::{parse_count_list, parse_fraction};
use btlab_core::record::{check_instance, ConstructionRecord};
use btlab_core::{Instance, Weight};

use crate::GameArgs;

fn params(game: &GameArgs) -> Result<AdversaryParams> {
    let eps = parse_fraction(&game.eps)?;
    let capacity = match &game.capacity {
        Some(s) => Weight::parse_decimal(s)?,
        None => min_capacity(game.n, &eps)?,
    };
    Ok(validate_params(game.n, &eps, &capacity)?)
}

fn write_out(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner()?)
}

fn q_name(q: &[usize]) -> String {
    let parts: Vec<String> = q.iter().map(|i| i.to_string()).collect();
    format!("instances/q_{}.json", parts.join("_"))
}

pub fn construct(game: &GameArgs, out: Option<&Path>) -> Result<bool> {
    let p = params(game)?;
    let mut solver = builtin_solver(&game.solver, game.seed)?;
    let c = build(&p, &mut solver)?;
    let record = ConstructionRecord::from(&c);
    match out {
        Some(dir) => {
            write_out(dir, "construction.json", format!("{}\n", record.to_json()).as_bytes())?;
            for (trace, inst) in &c.completions {
                write_out(dir, &q_name(&trace.q_indices), format!("{}\n", inst.to_json()).as_bytes())?;
            }
            println!(
                "n={} eps={} N={} solver={}: {} completion instances written to {}",
                p.n,
                p.eps_string(),
                p.capacity,
                c.solver,
                c.completions.len(),
                dir.display()
            );
        }
        None => println!("{}", record.to_json()),
    }
    Ok(true)
}

fn read_input(path: &Path) -> Result<String> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut s)?;
    } else {
        s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(s)
}

pub fn verify(
    game: Option<&GameArgs>,
    record: Option<&Path>,
    instance: Option<&Path>,
    out: Option<&Path>,
) -> Result<bool> {
    if let Some(path) = instance {
        let inst = Instance::from_json(&read_input(path)?)?;
        let (mut ok, msg) = check_instance(&inst)?;
        println!("{}: {msg}", if ok { "PASS" } else { "FAIL" });
        if let Some(game) = game {
            let p = params(game)?;
            let c = build(&p, &mut builtin_solver(&game.solver, game.seed)?)?;
            match c.completions.iter().find(|(_, candidate)| candidate == &inst) {
                Some((trace, _)) => println!("PASS: matches the completion for Q={:?}", trace.q_indices),
                None => {
                    println!("FAIL: not a completion of the n={} eps={} construction", p.n, p.eps_string());
                    ok = false;
                }
            }
        }
        return Ok(ok);
    }
    if let Some(path) = record {
        let rec = ConstructionRecord::from_json(&read_input(path)?)?;
        let check = rec.check()?;
        for c in &check.classes {
            let status = if c.pass { "pass" } else { "FAIL" };
            println!("Q={:?} {status} {}", c.q_indices, c.problems.join("; "));
        }
        println!("{}/{} classes pass", check.passed(), check.classes.len());
        if let Some(dir) = out {
            write_out(dir, "record_check.json", format!("{}\n", serde_json::to_string_pretty(&check)?).as_bytes())?;
        }
        return Ok(check.all_pass());
    }
    let Some(game) = game else {
        bail!("verify needs --n/--eps, --record, or --instance");
    };
    let p = params(game)?;
    let mut solver = builtin_solver(&game.solver, game.seed)?;
    let report = certify(&build(&p, &mut solver)?)?;
    for c in &report.classes {
        println!(
            "Q={:?} {} optimum={} unique={} retained={}",
            c.q_indices,
            if c.pass { "pass" } else { "FAIL" },
            c.optimum,
            c.unique,
            c.retained
        );
    }
    for f in report.failures() {
        eprintln!("failure: {f}");
    }
    println!("{}/{} classes pass", report.classes_passed, report.classes_total);
    if let Some(dir) = out {
        write_out(dir, "indispensability.json", format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes())?;
    }
    Ok(report.all_pass())
}

pub fn bounds(ns: &str, eps: &str, out: Option<&Path>) -> Result<bool> {
    let ns = parse_count_list(ns)?;
    let eps = parse_fraction(eps)?;
    let rows = bounds_table(&ns, &eps);
    let opt = |v: &Option<_>| v.as_ref().map(ToString::to_string).unwrap_or_default();
    let bytes = csv_bytes(
        &["n", "eps", "theorem1", "theorem2", "ratio"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.eps.clone(),
                opt(&r.theorem1),
                opt(&r.theorem2),
                r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
            ]
        }),
    )?;
    emit(out, "bounds.csv", &bytes)?;
    Ok(true)
}

fn emit(out: Option<&Path>, name: &str, bytes: &[u8]) -> Result<()> {
    io::stdout().write_all(bytes)?;
    if let Some(dir) = out {
        write_out(dir, name, bytes)?;
    }
    Ok(())
}

pub fn approx(deltas: &[String], game: Option<&GameArgs>, caps: &str, out: Option<&Path>) -> Result<bool> {
    let mut exps = vec![];
    for d in deltas {
        exps.push(approx_exponent(&parse_fraction(d)?)?);
    }
    let bytes = csv_bytes(
        &["delta", "exponent", "rounded_4_75", "inverse"],
        exps.iter().map(|e| {
            vec![e.delta.clone(), format!("{:.6}", e.exponent), format!("{:.6}", e.rounded), format!("{:.4}", e.inverse)]
        }),
    )?;
    emit(out, "approx_exponents.csv", &bytes)?;

    let Some(game) = game else {
        return Ok(true);
    };
    let p = params(game)?;
    let caps = parse_count_list(caps)?;
    if caps.contains(&0) {
        bail!("width caps must be at least 1");
    }
    let c = build(&p, &mut builtin_solver(&game.solver, game.seed)?)?;
    let rows = approx_ratio_experiment(&c, &caps)?;
    let bytes = csv_bytes(
        &["cap", "below_bound", "worst_value", "worst_ratio", "worst_ratio_f64", "within_integrality"],
        rows.iter().map(|r| {
            vec![
                r.cap.to_string(),
                r.below_bound.to_string(),
                r.worst_value.to_string(),
                r.worst_ratio.clone(),
                format!("{:.9}", r.worst_ratio_f64),
                r.within_integrality.to_string(),
            ]
        }),
    )?;
    println!();
    emit(out, "approx_experiment.csv", &bytes)?;
    if let Some(dir) = out {
        write_out(dir, "approx_experiment.json", format!("{}\n", serde_json::to_string_pretty(&rows)?).as_bytes())?;
    }
    Ok(rows.iter().filter(|r| r.below_bound).all(|r| r.within_integrality))
}

pub fn play(game: &GameArgs, q: Option<&str>, caps: &str, dump_tree: bool, out: Option<&Path>) -> Result<bool> {
    let p = params(game)?;
    if p.n > btlab_core::knapsack::DEFAULT_ENUMERATION_CAP {
        bail!("n = {} exceeds the enumeration cap", p.n);
    }
    let mut solver = builtin_solver(&game.solver, game.seed)?;
    let mut state = GameState::new(&p.capacity);
    for _ in 0..p.step1_count {
        play_round(&mut solver, &p, &mut state)?;
    }
    let rounds = csv_bytes(
        &["round", "picked", "forbidden_count", "tree_width"],
        state.history.iter().map(|r| {
            vec![r.round.to_string(), r.picked.to_string(), r.forbidden_count.to_string(), r.tree_width.to_string()]
        }),
    )?;
    emit(out, "rounds.csv", &rounds)?;

    let q = match q {
        Some(s) => parse_count_list(s)?,
        None => index_subsets(p.step1_count, p.q_size).into_iter().next().unwrap_or_default(),
    };
    let trace = build_completion(&state, &q, &p)?;
    let inst = completion_instance(&state, &trace, &p)?;
    let cap = parse_count_list(caps)?.first().copied();
    let construction = btlab_core::analysis::Construction {
        params: p.clone(),
        solver: solver.name(),
        state,
        completions: vec![(trace, inst.clone())],
    };
    let tree = run_bt(&mut replay_solver(&construction), &inst, cap)?;
    let trace_csv = csv_bytes(
        &["level", "item_weight", "width", "nodes_total"],
        tree.trace().iter().map(|r| {
            vec![r.level.to_string(), r.item_weight.to_string(), r.width.to_string(), r.nodes_total.to_string()]
        }),
    )?;
    println!();
    emit(out, "tree_trace.csv", &trace_csv)?;
    let best = btlab_core::btmodel::best_leaf_value(&tree, &inst);
    println!();
    println!("Q={q:?} width={} best={best} capacity={}", tree_width(&tree), p.capacity);
    if dump_tree {
        let json = serde_json::to_string_pretty(&tree)?;
        match out {
            Some(dir) => write_out(dir, "tree.json", format!("{json}\n").as_bytes())?,
            None => println!("{json}"),
        }
    }
    Ok(true)
}
