//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use assignment_messages::cli::{
    random_message, run_theorem1_suite, run_with_io, search_counterexample, verify_search_witness,
    RandomParams, SearchConfig, SearchFamily, SearchOutcome, SuiteOptions,
};
use assignment_messages::engine::{compile, compiled_demand, to_valuation_table};
use assignment_messages::flows::{
    check_balanced, decompose_conformal, feasible_circulation, improving_cycle, solve_min_cost,
    Circulation, FlowNetwork,
};
use assignment_messages::model::{AssignmentMessage, PriceVector, ValuationTable};
use assignment_messages::properties::{
    bijection_failure_in, check_gross_substitutes_exact, check_strong_substitutes,
    exchange_failure_in,
};
use assignment_messages::rational::{int, ratio, Rational};
use common::{half, hypercube_demand, mask_bundle, BruteValuation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn set_text(s: &BTreeSet<usize>) -> String {
    let items: Vec<String> = s.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn parse_set(text: &str) -> BTreeSet<usize> {
    text.trim_matches(|c| c == '{' || c == '}')
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect()
}

/// Expected `(tail label, head label, set, bounds)` for every arc, read off
/// the equality rows of the message: at a tree-0 row the node's own arc
/// enters and its children leave; at a good-tree row the children enter and
/// the node's own arc leaves.
fn expected_incidence(
    msg: &AssignmentMessage,
) -> (BTreeSet<String>, BTreeSet<(String, String, String)>) {
    let mut trees: BTreeMap<usize, Vec<BTreeSet<usize>>> = BTreeMap::new();
    let mut bounds: BTreeMap<BTreeSet<usize>, (i64, i64)> = BTreeMap::new();
    for c in &msg.constraints {
        trees.entry(c.tree).or_default().push(c.members.clone());
        let b = bounds
            .entry(c.members.clone())
            .or_insert((i64::MIN, i64::MAX));
        *b = (b.0.max(c.lower), b.1.min(c.upper));
    }
    let parent = |tree: usize, set: &BTreeSet<usize>| -> Option<BTreeSet<usize>> {
        trees[&tree]
            .iter()
            .filter(|s| s.len() > set.len() && s.is_superset(set))
            .min_by_key(|s| s.len())
            .cloned()
    };
    let zero_row = |s: &BTreeSet<usize>| format!("(2) I={}", set_text(s));
    let good_row = |g: usize, s: &BTreeSet<usize>| format!("(3) i={g}, I={}", set_text(s));
    let roots = "(5) roots".to_string();

    let mut vertices = BTreeSet::from([roots.clone()]);
    for (&t, sets) in &trees {
        for s in sets.iter().filter(|s| s.len() > 1) {
            vertices.insert(if t == 0 { zero_row(s) } else { good_row(t, s) });
        }
    }
    let mut arcs = BTreeSet::new();
    for (set, (lo, hi)) in &bounds {
        let good = msg.variables[*set.iter().next().unwrap() - 1].good;
        let in_zero = trees[&0].contains(set);
        let in_good = trees.get(&good).is_some_and(|t| t.contains(set));
        let tail = if !in_zero {
            good_row(good, set)
        } else {
            parent(0, set).map_or(roots.clone(), |p| zero_row(&p))
        };
        let head = if !in_good {
            zero_row(set)
        } else {
            parent(good, set).map_or(roots.clone(), |p| good_row(good, &p))
        };
        arcs.insert((tail, head, format!("I={} [{lo},{hi}]", set_text(set))));
    }
    (vertices, arcs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut out = Vec::new();
    let code = run_with_io(
        ["am", "export-graph"],
        &mut common::EXAMPLE_ONE.as_bytes(),
        &mut out,
        &mut std::io::sink(),
    );
    let dot = String::from_utf8(out).unwrap();
    let mut labels: BTreeMap<String, String> = BTreeMap::new();
    let mut arcs = Vec::new();
    for line in dot.lines().map(str::trim) {
        let Some((lhs, rest)) = line.split_once(" [label=\"") else {
            continue;
        };
        let label = rest.trim_end_matches("\"];").to_string();
        match lhs.split_once(" -> ") {
            Some((t, h)) => arcs.push((t.to_string(), h.to_string(), label)),
            None => {
                labels.insert(lhs.to_string(), label);
            }
        }
    }
    let mut incidence = BTreeSet::new();
    let mut heads = 0;
    let mut tails = 0;
    for (t, h, label) in &arcs {
        if let (Some(tl), Some(hl)) = (labels.get(t), labels.get(h)) {
            tails += 1;
            heads += 1;
            incidence.insert((tl.clone(), hl.clone(), label.clone()));
        }
    }
    let (want_vertices, want_arcs) = expected_incidence(&common::example_one());
    let got_vertices: BTreeSet<String> = labels.values().cloned().collect();
    let elapsed = start.elapsed();
    let sets: BTreeSet<BTreeSet<usize>> = arcs
        .iter()
        .map(|(_, _, l)| parse_set(l.trim_start_matches("I=").split(' ').next().unwrap()))
        .collect();
    ensure(
        code == 0
            && labels.len() == 5
            && arcs.len() == 8
            && sets.len() == 8
            && heads == 8
            && tails == 8
            && got_vertices == want_vertices
            && incidence == want_arcs
            && elapsed.as_secs_f64() < 1.0,
        format!(
            "{} vertices, {} arcs, incidence {} the constraint rows, {:.1} ms",
            labels.len(),
            arcs.len(),
            if incidence == want_arcs {
                "matches"
            } else {
                "differs from"
            },
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn random_prices(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| half(rng.random_range(-12..=12))).collect()
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bundles = 0usize;
    let mut mismatches = Vec::new();
    for k in 0..500u64 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(n..=6);
        let msg = random_message(rng.random(), &RandomParams::new(n, m)).unwrap();
        let brute = BruteValuation::of(&msg);
        let table = to_valuation_table(&msg).unwrap();
        bundles += table.len();
        if table != brute.table() {
            mismatches.push(format!("message {k}: value table"));
        }
        let compiled = compile(&msg).unwrap();
        for _ in 0..20 {
            let p = random_prices(&mut rng, n);
            let got = compiled_demand(&compiled, &PriceVector::new(p.clone())).unwrap();
            if (got.indirect_utility, got.demand) != brute.demand(&p) {
                mismatches.push(format!("message {k}: demand"));
            }
        }
    }
    ensure(
        mismatches.is_empty(),
        format!(
            "500 messages x 20 prices, {bundles} bundle values, {} mismatches {:?}",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn random_network(rng: &mut ChaCha8Rng, max_v: usize, max_a: usize, bound: i64) -> FlowNetwork {
    let nv = rng.random_range(2..=max_v);
    let mut net = FlowNetwork::new();
    for v in 0..nv {
        net.add_vertex(format!("v{v}"));
    }
    for _ in 0..rng.random_range(1..=max_a) {
        let lo = rng.random_range(-bound..=bound);
        let hi = rng.random_range(lo..=bound);
        let cost = ratio(rng.random_range(-6..=6), rng.random_range(1..=3));
        net.add_arc(
            rng.random_range(0..nv),
            rng.random_range(0..nv),
            lo,
            hi,
            cost,
        )
        .unwrap();
    }
    net
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = Vec::new();
    let mut cycles = 0;
    for k in 0..1000 {
        let mut net = random_network(&mut rng, 10, 20, 0);
        let flow = common::balanced_flow(&net, || rng.random_range(-5..=5));
        for (a, &x) in flow.iter().enumerate() {
            net.clamp(a, x.min(0), x.max(0));
        }
        let f = Circulation { flow };
        let ok = check_balanced(&net, &f).unwrap()
            && decompose_conformal(&net, &f).is_ok_and(|cs| {
                cycles += cs.len();
                let sum = cs.iter().fold(Circulation::zero(net.num_arcs()), |acc, c| {
                    acc.add(&c.to_circulation(net.num_arcs()))
                });
                sum == f
                    && cs.iter().all(|c| {
                        c.is_well_formed(&net)
                            && c.arcs.iter().all(|&(a, o)| o as i64 == f.flow[a].signum())
                    })
            });
        if !ok {
            bad.push(format!("decomposition {k}"));
        }
    }
    let mut optimal = 0;
    let mut infeasible = 0;
    for k in 0..3000 {
        let net = random_network(&mut rng, 5, 8, 3);
        let brute = common::brute_min_cost(&net);
        match solve_min_cost(&net) {
            Ok(sol) => {
                optimal += 1;
                if Some(net.objective(&sol.flow)) != brute
                    || improving_cycle(&net, &sol.flow).unwrap().is_some()
                    || common::residual_has_negative_cycle(&net, &sol.flow.flow)
                {
                    bad.push(format!("network {k}"));
                }
            }
            Err(cut) => {
                infeasible += 1;
                if brute.is_some() || !cut.certifies(&net) || feasible_circulation(&net).is_ok() {
                    bad.push(format!("network {k}"));
                }
            }
        }
    }
    ensure(
        bad.is_empty(),
        format!(
            "1000 flows -> {cycles} conformal cycles; 3000 networks ({optimal} optimal, {infeasible} infeasible) vs enumeration; {} defects {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_4() -> Outcome {
    let report = run_theorem1_suite(1, &SuiteOptions::new(1000)).unwrap();
    // Demand recomputed by enumeration for the first 100 messages.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut brute_failures = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(n..=6);
        let msg = random_message(rng.random(), &RandomParams::new(n, m)).unwrap();
        let brute = BruteValuation::of(&msg);
        for _ in 0..10 {
            let (_, d) = brute.demand(&random_prices(&mut rng, n));
            if exchange_failure_in(&d).unwrap().is_some() {
                brute_failures += 1;
            }
        }
    }
    ensure(
        report.all_passed() && report.price_cases == 10_000 && brute_failures == 0,
        format!("{report}; enumeration cross-check: {brute_failures} failures in 1000 cases"),
    )
}

fn cube(n: usize, values: &[i64]) -> ValuationTable {
    let values: Vec<Rational> = values.iter().map(|&v| int(v)).collect();
    ValuationTable::from_hypercube(n, &values).unwrap()
}

fn criterion_5() -> Outcome {
    let mut detail = Vec::new();
    let mut disagreements = 0;
    for n in [2usize, 3] {
        let size = 1usize << n;
        let axis: Vec<i64> = (-2..=8).collect();
        let mut families: HashSet<Vec<usize>> = HashSet::new();
        let mut gs = 0;
        let mut gs_disagree = 0;
        let total = 4u64.pow(size as u32);
        for code in 0..total {
            let values: Vec<i64> = (0..size).map(|k| (code >> (2 * k) & 3) as i64).collect();
            let mut idx = vec![0usize; n];
            loop {
                let p: Vec<i64> = idx.iter().map(|&k| axis[k]).collect();
                families.insert(hypercube_demand(n, &values, &p));
                let Some(k) = (0..n).find(|&k| idx[k] + 1 < axis.len()) else {
                    break;
                };
                idx[..k].iter_mut().for_each(|x| *x = 0);
                idx[k] += 1;
            }
            let t = cube(n, &values);
            let exact = check_gross_substitutes_exact(&t).unwrap().is_holds();
            let grid = check_strong_substitutes(&t, None).unwrap().is_holds();
            gs += exact as u64;
            gs_disagree += (exact != grid) as u64;
        }
        let mut def_disagree = 0;
        let mut failing = 0;
        for fam in &families {
            let d = fam.iter().map(|&m| mask_bundle(n, m)).collect();
            let five = exchange_failure_in(&d).unwrap().is_some();
            let four = bijection_failure_in(&d).unwrap().is_some();
            def_disagree += (five != four) as u64;
            failing += five as u64;
        }
        disagreements += gs_disagree + def_disagree;
        detail.push(format!(
            "n={n}: {total} tables ({gs} GS), exact/grid disagreements {gs_disagree}; {} demand families ({failing} not exchangeable), correspondence/bijection disagreements {def_disagree}",
            families.len()
        ));
    }
    ensure(disagreements == 0, detail.join("; "))
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut found_small = false;
    let configs = [
        SearchConfig::new(2, 3, 1_000_000),
        SearchConfig::new(3, 3, 1_000_000),
        SearchConfig::new(4, 1, 1_000_000),
        SearchConfig::new(4, 2, 200_000),
        SearchConfig::new(4, 3, 1_000).with_family(SearchFamily::MatroidRank),
    ];
    for cfg in configs {
        let report = search_counterexample(&cfg).unwrap();
        if let SearchOutcome::Found(w) = &report.outcome {
            found_small |= verify_search_witness(w).unwrap().all();
        }
        lines.push(format!(
            "n={} cap={} {:?}: {}",
            cfg.num_goods,
            cfg.value_cap,
            cfg.family,
            match &report.outcome {
                SearchOutcome::Found(_) => "witness".to_string(),
                SearchOutcome::NotFound { complete } => if *complete {
                    "exhausted, none"
                } else {
                    "budget hit, none (exit 3)"
                }
                .to_string(),
            }
        ));
    }
    let wide = SearchConfig::new(6, 3, 100_000).with_family(SearchFamily::MatroidRank);
    let report = search_counterexample(&wide).unwrap();
    let evidence = match report.witness() {
        Some(w) => {
            let check = verify_search_witness(w).unwrap();
            format!(
                "n=6 matroid family: witness #{} re-verified (GS {}, no correspondence {}, no bijection {})",
                w.index, check.gross_substitutes, check.correspondence_absent, check.bijection_absent
            )
        }
        None => "n=6 matroid family: none".to_string(),
    };
    lines.push(evidence);
    ensure(found_small, lines.join("; "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut items = 0;
    for k in 0..200 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(n..=4);
        let msg = random_message(rng.random(), &RandomParams::new(n, m)).unwrap();
        let table = to_valuation_table(&msg).unwrap().restrict_nonnegative();
        match check_strong_substitutes(&table, None) {
            Ok(r) if r.is_holds() => items += r.cases,
            Ok(r) => failures.push(format!("message {k}: {r}")),
            Err(e) => failures.push(format!("message {k}: {e}")),
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "200 messages, {items} grid cases, {} failures {:?}",
            failures.len(),
            failures.iter().take(2).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("example-one graph structure", criterion_1),
        ("engine vs enumeration oracle", criterion_2),
        ("circulation kernel", criterion_3),
        ("exchangeability suite", criterion_4),
        ("definition equivalences", criterion_5),
        ("counterexample search (n <= 4)", criterion_6),
        ("message tables are strong substitutes", criterion_7),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (verdict, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} {verdict} [{name}] ({:.2} s): {detail}",
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of 7 criteria failed");
        std::process::exit(1);
    }
}
