//! Shared test helpers: an independent brute-force pebbling oracle and
//! small-DAG generators.

use rbpebble_core::dag::{Dag, DagBuilder};
use rbpebble_core::engine::{apply_move, initial_state, is_goal, legal_moves, PebbleState, Status};
use rbpebble_core::model::{Cost, ModelSpec};
use rand::Rng;
use std::collections::HashMap;

/// Exhaustive minimum pebbling cost, computed the slow way: enumerate every
/// reachable state over the raw legal move set, then relax costs to a fixed
/// point. Shares only the move semantics with the production solver; search
/// strategy, state keying, and pruning are all different.
pub fn brute_force_min_cost(dag: &Dag, model: &ModelSpec, r: usize) -> Option<Cost> {
    #[derive(PartialEq, Eq, Hash, Clone)]
    struct Key(Vec<u8>, Vec<bool>);
    fn key(dag: &Dag, s: &PebbleState) -> Key {
        Key(
            dag.node_ids()
                .map(|v| match s.status(v) {
                    Status::Empty => 0,
                    Status::Red => 1,
                    Status::Blue => 2,
                })
                .collect(),
            dag.node_ids().map(|v| s.is_computed(v)).collect(),
        )
    }

    let root = initial_state(dag, model);
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut states: Vec<PebbleState> = vec![root.clone()];
    index.insert(key(dag, &root), 0);
    // discover all reachable states
    let mut frontier = vec![0usize];
    let mut edges: Vec<(usize, usize, Cost)> = Vec::new();
    while let Some(i) = frontier.pop() {
        let state = states[i].clone();
        for mv in legal_moves(dag, model, r, &state) {
            let (next, cost) = apply_move(dag, model, r, &state, mv).expect("legal move applies");
            let k = key(dag, &next);
            let j = match index.get(&k) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    states.push(next);
                    index.insert(k, j);
                    frontier.push(j);
                    j
                }
            };
            edges.push((i, j, cost));
        }
    }
    // relax to fixed point (handles zero-cost cycles)
    let mut dist: Vec<Option<Cost>> = vec![None; states.len()];
    dist[0] = Some(Cost::from_integer(0));
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v, w) in &edges {
            if let Some(du) = dist[u] {
                let cand = du + w;
                if dist[v].map_or(true, |dv| cand < dv) {
                    dist[v] = Some(cand);
                    changed = true;
                }
            }
        }
    }
    states
        .iter()
        .zip(dist.iter())
        .filter(|(s, d)| d.is_some() && is_goal(dag, model, s))
        .filter_map(|(_, d)| *d)
        .min()
}

/// All DAGs on `n` topologically labeled nodes (edges only from lower to
/// higher index). Every small DAG shape appears under some labeling.
pub fn enumerate_labeled_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::with_capacity(1 << pairs.len());
    for mask in 0u32..(1 << pairs.len()) {
        let mut b = DagBuilder::new(format!("enum{n}.{mask}"));
        for v in 0..n {
            b.node(format!("v{v}"));
        }
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                b.edge(format!("v{i}"), format!("v{j}"));
            }
        }
        out.push(b.build().expect("upper-triangular edges are acyclic"));
    }
    out
}

/// Random DAG with edges from lower to higher topological index.
pub fn random_dag(rng: &mut impl Rng, n: usize, edge_prob: f64) -> Dag {
    let mut b = DagBuilder::new(format!("rand{n}"));
    for v in 0..n {
        b.node(format!("v{v}"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_prob) {
                b.edge(format!("v{i}"), format!("v{j}"));
            }
        }
    }
    b.build().expect("upper-triangular edges are acyclic")
}

/// Random undirected graph on `n` labeled nodes.
pub fn random_graph(
    rng: &mut impl Rng,
    n: usize,
    edge_prob: f64,
) -> rbpebble_core::UndirectedGraph {
    let nodes: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_prob) {
                edges.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    rbpebble_core::UndirectedGraph::new(nodes, &edges).expect("simple by construction")
}
