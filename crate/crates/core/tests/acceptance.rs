//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see every line). Expected values are asserted
//! exactly as specified; where a measured exact value disagrees with the
//! stated constant, the test fails and reports both numbers.

mod support;

use num_rational::Ratio;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rbpebble_core::*;
use std::collections::BTreeSet;
use std::time::Instant;

fn report(name: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {name}: PASS");
    } else {
        println!("criterion {name}: FAIL");
        for f in failures {
            println!("  - {f}");
        }
        panic!("criterion {name} failed:\n{}", failures.join("\n"));
    }
}

fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> UndirectedGraph {
    UndirectedGraph::new(
        nodes.iter().map(|s| s.to_string()).collect(),
        &edges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Criterion 1: exact tradeoff curve for d=2, m=5 under oneshot must be
/// exactly (20, 10, 0) over R in {4,5,6}, within 60 s.
#[test]
fn criterion_1_tradeoff_curve() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let dag = gen_tradeoff_dag(2, 5).unwrap();
    let model = ModelSpec::new(Variant::Oneshot);
    let points = tradeoff_curve(&dag, &model, 4, 6, &SearchLimits::default()).unwrap();
    let expected = [20i64, 10, 0];
    for (pt, want) in points.iter().zip(expected) {
        if !pt.exhausted {
            failures.push(format!("R={}: search not exhausted", pt.r));
        }
        if pt.cost != Cost::from_integer(want) {
            failures.push(format!(
                "R={}: expected 2(d-i)*m = {want}, exact optimum is {}",
                pt.r, pt.cost
            ));
        }
    }
    if start.elapsed().as_secs() >= 60 {
        failures.push(format!("runtime {:?} exceeds 60 s", start.elapsed()));
    }
    report("1 (tradeoff curve)", &failures);
}

/// Criterion 2: over all 8 graphs on 3 labeled nodes, nodel exact cost is
/// at most (N-1)N = 6 iff the graph has a Hamiltonian path; decoding the
/// witness yields a valid path. Within 120 s.
#[test]
fn criterion_2_hampath_n3_exact() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let names = ["a", "b", "c"];
    let all_edges = [("a", "b"), ("a", "c"), ("b", "c")];
    let model = ModelSpec::new(Variant::Nodel);
    let threshold = Cost::from_integer(6);
    for mask in 0u8..8 {
        let edges: Vec<(&str, &str)> = all_edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| *e)
            .collect();
        let g = graph(&names, &edges);
        let has_path = g.has_hamiltonian_path();
        let inst = reduce_hampath(&g, &model).unwrap();
        let res = solve_exact(&inst.dag, &model, inst.r, &SearchLimits::default()).unwrap();
        assert!(res.exhausted);
        let within = res.cost <= threshold;
        if within != has_path {
            failures.push(format!(
                "edges {mask:03b}: exact cost {} vs threshold 6 says path={within}, \
                 brute-force says path={has_path}",
                res.cost
            ));
        }
        if has_path {
            let decoded = decode_hampath(&inst, &res.trace).unwrap();
            match decoded {
                Some(path) => {
                    let ok = path.len() == 3
                        && path.windows(2).all(|w| {
                            let i = names.iter().position(|n| *n == w[0]).unwrap();
                            let j = names.iter().position(|n| *n == w[1]).unwrap();
                            g.adjacent(i, j)
                        });
                    if !ok {
                        failures.push(format!("edges {mask:03b}: decoded {path:?} is not a path"));
                    }
                }
                None => failures.push(format!("edges {mask:03b}: witness decode returned none")),
            }
        }
    }
    if start.elapsed().as_secs() >= 120 {
        failures.push(format!("runtime {:?} exceeds 120 s", start.elapsed()));
    }
    report("2 (Hamiltonian path reduction, N=3 exact)", &failures);
}

/// Criterion 3: for N in {4,5}, 20 random graphs each, the analytical order
/// oracle's minimum is at most the per-model threshold iff a Hamiltonian
/// path exists. Within 60 s.
#[test]
fn criterion_3_hampath_oracle_n45() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    for n in [4usize, 5] {
        for trial in 0..20 {
            let g = support::random_graph(&mut rng, n, 0.45);
            let has_path = g.has_hamiltonian_path();
            for variant in Variant::ALL {
                let inst = reduce_hampath(&g, &ModelSpec::new(variant)).unwrap();
                let res = group_order_search(&inst).unwrap();
                let within = res.cost <= inst.threshold.unwrap();
                if within != has_path {
                    failures.push(format!(
                        "N={n} trial={trial} {variant}: oracle {} vs threshold {:?} \
                         disagrees with brute force (path={has_path})",
                        res.cost, inst.threshold
                    ));
                }
            }
        }
    }
    if start.elapsed().as_secs() >= 60 {
        failures.push(format!("runtime {:?} exceeds 60 s", start.elapsed()));
    }
    report("3 (Hamiltonian path via order oracle, N=4..5)", &failures);
}

/// Criterion 4: pebbling the node behind one hard-to-compute gadget costs
/// exactly 4 transfers in the base model for R in {3,4,5}.
#[test]
fn criterion_4_h2c_constant() {
    let mut failures = Vec::new();
    let single = dag::chain(&["v"]);
    let model = ModelSpec::new(Variant::Base);
    for r in [3usize, 4, 5] {
        match attach_h2c(&single, r, false) {
            Ok(gadget) => match solve_exact(&gadget, &model, r, &SearchLimits::default()) {
                Ok(res) => {
                    assert!(res.exhausted);
                    if res.cost != Cost::from_integer(4) {
                        failures.push(format!("R={r}: exact cost {} != 4", res.cost));
                    }
                }
                Err(e) => failures.push(format!("R={r}: solve failed: {e}")),
            },
            Err(e) => failures.push(format!("R={r}: gadget not solvable at R: {e}")),
        }
    }
    report("4 (hard-to-compute constant)", &failures);
}

/// Criterion 5: nodel chains of n in 3..=7 at R=2 cost exactly n-2,
/// meeting the n-R lower bound with equality.
#[test]
fn criterion_5_nodel_chain_cost() {
    let mut failures = Vec::new();
    let model = ModelSpec::new(Variant::Nodel);
    for n in 3usize..=7 {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let d = dag::chain(&refs);
        let res = solve_exact(&d, &model, 2, &SearchLimits::default()).unwrap();
        assert!(res.exhausted);
        if res.cost != Cost::from_integer(n as i64 - 2) {
            failures.push(format!("n={n}: exact cost {} != n-2 = {}", res.cost, n - 2));
        }
    }
    report("5 (nodel chain cost)", &failures);
}

/// Criterion 6: a single transformed group is free with R+1 pebbles; with
/// R pebbles the exact costs at h in {4,6,8} increase by exactly 4 per +2
/// in h. Within 120 s.
#[test]
fn criterion_6_cd_gadget() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let r = 4usize;
    let mut b = DagBuilder::new("grp");
    for m in ["m1", "m2", "m3"] {
        b.node(m);
    }
    b.node("t");
    for m in ["m1", "m2", "m3"] {
        b.edge(m, "t");
    }
    b.group(
        vec!["m1".into(), "m2".into(), "m3".into()],
        vec!["t".into()],
    );
    let base = b.build().unwrap();
    let model = ModelSpec::new(Variant::Oneshot);
    let mut tight_costs = Vec::new();
    for h in [4usize, 6, 8] {
        let g = cd_transform(&base, r, h).unwrap();
        let free = solve_exact(&g, &model, r + 1, &SearchLimits::default()).unwrap();
        assert!(free.exhausted);
        if free.cost != Cost::zero() {
            failures.push(format!("h={h}: cost {} with R+1 pebbles != 0", free.cost));
        }
        let tight = solve_exact(&g, &model, r, &SearchLimits::default()).unwrap();
        assert!(tight.exhausted);
        tight_costs.push((h, tight.cost));
    }
    for w in tight_costs.windows(2) {
        let (h0, c0) = w[0];
        let (h1, c1) = w[1];
        if c1 - c0 != Cost::from_integer(4) {
            failures.push(format!(
                "tight-budget increment h={h0}->{h1} is {} (costs {} -> {}), expected exactly 4",
                c1 - c0,
                c0,
                c1
            ));
        }
    }
    if start.elapsed().as_secs() >= 120 {
        failures.push(format!("runtime {:?} exceeds 120 s", start.elapsed()));
    }
    report("6 (constant-degree gadget)", &failures);
}

/// Criterion 7: at l=3, k=6, k'=4 the greedy visitation order sweeps the
/// columns right to left, bottom to top; greedy cost strictly exceeds the
/// exact optimum; the greedy/optimal ratio grows from l=2 to l=3; and at
/// l=8, k=40, k'=36 greedy costs at least 3x the canonical diagonal trace.
#[test]
fn criterion_7_greedy_grid() {
    let mut failures = Vec::new();
    let model = ModelSpec::new(Variant::Oneshot);

    let ratio_at = |l: usize, failures: &mut Vec<String>| -> Option<Ratio<i64>> {
        let g = gen_greedy_grid(l, 6, 4).unwrap();
        let trace = greedy_pebble(&g.dag, &model, g.r, GreedyPolicy::default()).unwrap();
        let greedy_cost = validate_trace(&g.dag, &model, g.r, &trace).unwrap().total;
        let exact = solve_exact(&g.dag, &model, g.r, &SearchLimits::default()).unwrap();
        if !exact.exhausted {
            failures.push(format!("l={l}: exact search not exhausted"));
            return None;
        }
        if l == 3 {
            let order = group_visit_order(&g.dag, &trace).unwrap();
            let labels: Vec<String> = order.iter().map(|&gi| g.layout[gi].label()).collect();
            let expected = ["S0", "3,1", "2,1", "2,2", "1,1", "1,2", "1,3"];
            if labels != expected {
                failures.push(format!(
                    "l=3 greedy visitation order {labels:?} != column sweep {expected:?}"
                ));
            }
            if greedy_cost <= exact.cost {
                failures.push(format!(
                    "l=3: greedy cost {greedy_cost} does not exceed optimum {}",
                    exact.cost
                ));
            }
        }
        Some(greedy_cost / exact.cost)
    };

    let r2 = ratio_at(2, &mut failures);
    let r3 = ratio_at(3, &mut failures);
    if let (Some(r2), Some(r3)) = (r2, r3) {
        if r3 <= r2 {
            failures.push(format!(
                "greedy/optimal ratio does not grow: l=2 gives {r2} ({}), l=3 gives {r3} ({})",
                ratio_str(r2),
                ratio_str(r3)
            ));
        }
    }

    // large instance: greedy vs the canonical diagonal schedule
    let g = gen_greedy_grid(8, 40, 36).unwrap();
    let trace = greedy_pebble(&g.dag, &model, g.r, GreedyPolicy::default()).unwrap();
    let greedy_cost = validate_trace(&g.dag, &model, g.r, &trace).unwrap().total;
    let canon = execute_group_order(&g.dag, &model, g.r, &g.canonical_diagonal_order()).unwrap();
    let canon_cost = validate_trace(&g.dag, &model, g.r, &canon).unwrap().total;
    if greedy_cost < canon_cost * Cost::from_integer(3) {
        failures.push(format!(
            "l=8: greedy {greedy_cost} is below 3x canonical {canon_cost}"
        ));
    }

    report("7 (greedy grid)", &failures);
}

fn ratio_str(r: Ratio<i64>) -> String {
    format!("{:.4}", *r.numer() as f64 / *r.denom() as f64)
}

/// Criterion 8: for P3 and K3 with k=8, decoding the order oracle's optimum
/// yields a minimum vertex cover, and the canonical cover trace validates
/// within 2(k-N)|cover| + c*N^2 for the pinned implementation constant c.
#[test]
fn criterion_8_vertex_cover() {
    // slack constant of the canonical schedule: every first-level target is
    // stored and reloaded at most once (2 per target, up to N(N-1) of them)
    // plus one store per second-level sink, which stays within 2*N^2
    const CANONICAL_SLACK_FACTOR: i64 = 2;
    let mut failures = Vec::new();
    let cases = [
        ("P3", graph(&["a", "b", "c"], &[("a", "b"), ("b", "c")])),
        (
            "K3",
            graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]),
        ),
    ];
    for (name, g) in cases {
        let k = 8usize;
        let inst = reduce_vertex_cover(&g, k).unwrap();
        let n = g.node_count();

        // order oracle optimum decodes to a minimum cover
        let oracle = group_order_search(&inst).unwrap();
        let trace = execute_group_order(&inst.dag, &inst.model, inst.r, &oracle.order).unwrap();
        let decoded = decode_vertex_cover(&inst, &trace).unwrap();
        let decoded_idx: BTreeSet<usize> = decoded
            .iter()
            .map(|v| g.nodes().iter().position(|x| x == v).unwrap())
            .collect();
        if !g.is_vertex_cover(&decoded_idx) {
            failures.push(format!("{name}: decoded set {decoded:?} is not a cover"));
        }
        let min_size = g.min_vertex_cover_size();
        if decoded_idx.len() != min_size {
            failures.push(format!(
                "{name}: decoded cover size {} != brute-force minimum {min_size}",
                decoded_idx.len()
            ));
        }

        // canonical trace for a minimum cover validates within the bound
        let cover: BTreeSet<usize> = (0u32..(1 << n))
            .map(|mask| -> BTreeSet<usize> {
                (0..n).filter(|i| mask >> i & 1 == 1).collect()
            })
            .filter(|s| s.len() == min_size && g.is_vertex_cover(s))
            .next()
            .unwrap();
        let canon = canonical_vc_trace(&inst, &g, &cover).unwrap();
        let rep = validate_trace(&inst.dag, &inst.model, inst.r, &canon).unwrap();
        let bound = Cost::from_integer(
            2 * (k as i64 - n as i64) * cover.len() as i64
                + CANONICAL_SLACK_FACTOR * (n * n) as i64,
        );
        if rep.total > bound {
            failures.push(format!(
                "{name}: canonical trace cost {} exceeds bound {bound}",
                rep.total
            ));
        }
    }
    report("8 (vertex cover reduction)", &failures);
}

/// Criterion 9a: the solver agrees with independent exhaustive enumeration
/// on every DAG with at most 5 nodes, R <= 3, in all four models (eps=1/4).
#[test]
fn criterion_9a_oracle_equivalence() {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    let eps = Ratio::new(1, 4);
    for n in 1..=5usize {
        for dag in support::enumerate_labeled_dags(n) {
            let lo = dag.feasibility_threshold();
            for r in lo..=3 {
                for variant in Variant::ALL {
                    let model = ModelSpec::with_epsilon(variant, eps).unwrap();
                    let res = solve_exact(&dag, &model, r, &SearchLimits::default()).unwrap();
                    assert!(res.exhausted);
                    let brute = support::brute_force_min_cost(&dag, &model, r).unwrap();
                    checked += 1;
                    if res.cost != brute {
                        failures.push(format!(
                            "{} R={r} {variant}: solver {} != brute force {brute}",
                            dag.name(),
                            res.cost
                        ));
                        if failures.len() > 10 {
                            report("9a (oracle equivalence)", &failures);
                        }
                    }
                }
            }
        }
    }
    println!("  checked {checked} instances");
    report("9a (oracle equivalence)", &failures);
}

/// Criterion 9b: every exact-solver trace passes the length bound check.
#[test]
fn criterion_9b_length_bounds() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    for trial in 0..50 {
        let dag = support::random_dag(&mut rng, 6, 0.4);
        for variant in Variant::ALL {
            let model = ModelSpec::with_epsilon(variant, Ratio::new(1, 4)).unwrap();
            let r = dag.feasibility_threshold() + (trial % 2);
            let res = solve_exact(&dag, &model, r, &SearchLimits::default()).unwrap();
            if !length_bound_check(&dag, &model, &res.trace) {
                failures.push(format!(
                    "trial {trial} {variant}: optimal trace of length {} over bound",
                    res.trace.len()
                ));
            }
        }
    }
    report("9b (length bounds)", &failures);
}

/// Criterion 9c: oneshot optima satisfy opt(R-1) <= opt(R) + 2n on 50
/// random instances.
#[test]
fn criterion_9c_lipschitz() {
    let mut failures = Vec::new();
    let model = ModelSpec::new(Variant::Oneshot);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut done = 0;
    while done < 50 {
        let dag = support::random_dag(&mut rng, 7, 0.35);
        let lo = dag.feasibility_threshold();
        if lo + 1 > 7 {
            continue;
        }
        done += 1;
        let n = dag.node_count() as i64;
        let mut prev: Option<Cost> = None; // opt at r-1
        for r in lo..=(lo + 2) {
            let res = solve_exact(&dag, &model, r, &SearchLimits::default()).unwrap();
            assert!(res.exhausted);
            if let Some(lower_r) = prev {
                // prev holds opt(r-1)
                if lower_r > res.cost + Cost::from_integer(2 * n) {
                    failures.push(format!(
                        "{}: opt({}) = {lower_r} > opt({r}) + 2n = {}",
                        dag.name(),
                        r - 1,
                        res.cost + Cost::from_integer(2 * n)
                    ));
                }
            }
            prev = Some(res.cost);
        }
    }
    report("9c (oneshot Lipschitz property)", &failures);
}

/// Criterion 9d: the naive baseline stays within (2*max_indegree+1)*n
/// (+ eps*n under compcost) on 50 random instances.
#[test]
fn criterion_9d_naive_bound() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xDADA);
    for trial in 0..50 {
        let dag = support::random_dag(&mut rng, 8, 0.3);
        let r = dag.feasibility_threshold();
        for variant in Variant::ALL {
            let model = ModelSpec::with_epsilon(variant, Ratio::new(1, 100)).unwrap();
            let trace = naive_topological(&dag, &model, r).unwrap();
            let rep = validate_trace(&dag, &model, r, &trace).unwrap();
            let n = dag.node_count() as i64;
            let delta = dag.max_indegree() as i64;
            let mut bound = Cost::from_integer((2 * delta + 1) * n);
            if variant == Variant::Compcost {
                bound += model.epsilon * Cost::from_integer(n);
            }
            if rep.total > bound {
                failures.push(format!(
                    "trial {trial} {variant}: naive cost {} over bound {bound}",
                    rep.total
                ));
            }
        }
    }
    report("9d (naive baseline bound)", &failures);
}

/// Criterion 9e: compcost optima cost at least eps * (non-source count).
#[test]
fn criterion_9e_compcost_floor() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE5);
    let eps = Ratio::new(1, 4);
    let model = ModelSpec::with_epsilon(Variant::Compcost, eps).unwrap();
    for trial in 0..30 {
        let dag = support::random_dag(&mut rng, 6, 0.4);
        let r = dag.feasibility_threshold() + (trial % 2);
        let res = solve_exact(&dag, &model, r, &SearchLimits::default()).unwrap();
        assert!(res.exhausted);
        let non_sources = dag
            .node_ids()
            .filter(|&v| !dag.is_source(v))
            .count() as i64;
        if res.cost < eps * Cost::from_integer(non_sources) {
            failures.push(format!(
                "trial {trial}: cost {} below eps * non-sources = {}",
                res.cost,
                eps * Cost::from_integer(non_sources)
            ));
        }
    }
    report("9e (compcost floor)", &failures);
}

/// Criterion 9f: determinism and format round-trips.
#[test]
fn criterion_9f_determinism_and_round_trips() {
    let mut failures = Vec::new();

    // identical runs produce byte-identical artifacts
    let dag = gen_tradeoff_dag(2, 4).unwrap();
    let model = ModelSpec::new(Variant::Oneshot);
    let a = solve_exact(&dag, &model, 4, &SearchLimits::default()).unwrap();
    let b = solve_exact(&dag, &model, 4, &SearchLimits::default()).unwrap();
    if serialize_trace(&dag, &a.trace) != serialize_trace(&dag, &b.trace) {
        failures.push("solver traces differ between identical runs".into());
    }
    let rep_a = validate_trace(&dag, &model, 4, &a.trace).unwrap();
    let rep_b = validate_trace(&dag, &model, 4, &b.trace).unwrap();
    if serde_json::to_string(&rep_a).unwrap() != serde_json::to_string(&rep_b).unwrap() {
        failures.push("cost reports differ between identical runs".into());
    }

    // dag json round-trip
    let text = serialize_dag(&dag);
    let re = parse_dag(&text).unwrap();
    if serialize_dag(&re) != text {
        failures.push("dag json round-trip not an identity".into());
    }

    // trace jsonl round-trip
    let tr_text = serialize_trace(&dag, &a.trace);
    let tr = parse_trace(&dag, &tr_text).unwrap();
    if serialize_trace(&dag, &tr) != tr_text {
        failures.push("trace jsonl round-trip not an identity".into());
    }

    // graph json round-trip
    let g = graph(&["a", "b", "c"], &[("a", "b")]);
    let g_text = serialize_graph(&g);
    if serialize_graph(&parse_graph(&g_text).unwrap()) != g_text {
        failures.push("graph json round-trip not an identity".into());
    }

    report("9f (determinism and round-trips)", &failures);
}
