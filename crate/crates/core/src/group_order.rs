//! Analytical group-order search: enumerate precedence-respecting visitation
//! orders of the annotated input groups and score each order with the
//! reduction's closed-form cost model. Serves as an independent oracle for
//! instances whose full state space is out of reach.

use crate::model::{Cost, Variant};
use crate::reduction::{ReductionInstance, ReductionKind};
use num_rational::Ratio;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Factorial guard: orders are enumerated exhaustively.
pub const MAX_GROUPS: usize = 10;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum OrderSearchError {
    #[error("{0} groups exceed the enumeration cap of {MAX_GROUPS}")]
    TooManyGroups(usize),
    #[error("instance carries no group annotations")]
    NoGroups,
    #[error("instance parameters missing `{0}`")]
    MissingParam(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSearchResult {
    /// Group indices into `instance.dag.groups()` in optimal visit order.
    pub order: Vec<usize>,
    pub cost: Cost,
    pub orders_scored: u64,
}

/// Exhaustive minimum of the analytical cost over precedence-respecting
/// visitation orders, with a witness order.
pub fn group_order_search(
    instance: &ReductionInstance,
) -> Result<OrderSearchResult, OrderSearchError> {
    let groups = instance.dag.groups();
    let g = groups.len();
    if g == 0 {
        return Err(OrderSearchError::NoGroups);
    }
    if g > MAX_GROUPS {
        return Err(OrderSearchError::TooManyGroups(g));
    }

    // Precedence: group i before group j whenever a target of i is a member
    // of j.
    let mut before = vec![vec![false; g]; g];
    for (i, gi) in groups.iter().enumerate() {
        for (j, gj) in groups.iter().enumerate() {
            if i == j {
                continue;
            }
            if gi.targets.iter().any(|t| gj.members.contains(t)) {
                before[i][j] = true;
            }
        }
    }

    let scorer = CostModel::for_instance(instance)?;

    let mut best: Option<(Cost, Vec<usize>)> = None;
    let mut scored = 0u64;
    let mut order: Vec<usize> = Vec::with_capacity(g);
    let mut used = vec![false; g];
    enumerate(
        &mut order,
        &mut used,
        &before,
        &mut |order: &[usize]| {
            scored += 1;
            let cost = scorer.cost(instance, order);
            match &best {
                Some((c, _)) if *c <= cost => {}
                _ => best = Some((cost, order.to_vec())),
            }
        },
    );

    let (cost, order) = best.expect("at least one precedence-respecting order exists in a DAG");
    Ok(OrderSearchResult {
        order,
        cost,
        orders_scored: scored,
    })
}

fn enumerate(
    order: &mut Vec<usize>,
    used: &mut [bool],
    before: &[Vec<bool>],
    visit: &mut dyn FnMut(&[usize]),
) {
    let g = used.len();
    if order.len() == g {
        visit(order);
        return;
    }
    for i in 0..g {
        if used[i] {
            continue;
        }
        // all predecessors already placed?
        if (0..g).any(|j| before[j][i] && !used[j]) {
            continue;
        }
        used[i] = true;
        order.push(i);
        enumerate(order, used, before, visit);
        order.pop();
        used[i] = false;
    }
}

enum CostModel {
    /// Per-transition ledger of the path reduction. Adjacent consecutive
    /// visits share one contact and save one pebble move.
    HamPath {
        n: i64,
        m: i64,
        r: i64,
        variant: Variant,
        epsilon: Cost,
        adjacency: Vec<Vec<bool>>,
        node_of_group: Vec<usize>,
    },
    /// Every non-consecutive first/second-level pair spends 2 transfers on
    /// each of its k' common nodes.
    VertexCover { k_prime: i64, pair_of: Vec<usize> },
}

impl CostModel {
    fn for_instance(instance: &ReductionInstance) -> Result<Self, OrderSearchError> {
        let param = |k: &str| -> Result<i64, OrderSearchError> {
            instance
                .params
                .get(k)
                .and_then(|v| v.parse::<i64>().ok())
                .ok_or_else(|| OrderSearchError::MissingParam(k.to_string()))
        };
        match instance.kind {
            ReductionKind::HamPath => {
                let n = param("N")?;
                // node index per group from decode_meta ordering
                let names: Vec<&String> = {
                    let mut uniq: Vec<&String> = instance.decode_meta.values().collect();
                    uniq.sort();
                    uniq.dedup();
                    uniq
                };
                let idx: BTreeMap<&String, usize> =
                    names.iter().enumerate().map(|(i, &s)| (s, i)).collect();
                let g = instance.dag.groups().len();
                let mut node_of_group = vec![0usize; g];
                for (gi, node) in &instance.decode_meta {
                    node_of_group[*gi] = idx[node];
                }
                // adjacency between graph nodes: groups share a merged
                // contact exactly when the nodes are adjacent
                let groups = instance.dag.groups();
                let mut adjacency = vec![vec![false; names.len()]; names.len()];
                for (i, gi) in groups.iter().enumerate() {
                    for (j, gj) in groups.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        if gi.members.iter().any(|m| gj.members.contains(m)) {
                            adjacency[node_of_group[i]][node_of_group[j]] = true;
                        }
                    }
                }
                Ok(CostModel::HamPath {
                    n,
                    m: param("M")?,
                    r: param("R")?,
                    variant: instance.model.variant,
                    epsilon: instance.model.epsilon,
                    adjacency,
                    node_of_group,
                })
            }
            ReductionKind::VertexCover => {
                let k_prime = param("kprime")?;
                // groups come in first/second-level pairs per decode_meta
                let g = instance.dag.groups().len();
                let mut pair_of = vec![usize::MAX; g];
                let mut by_node: BTreeMap<&String, Vec<usize>> = BTreeMap::new();
                for (gi, node) in &instance.decode_meta {
                    by_node.entry(node).or_default().push(*gi);
                }
                for (_, gis) in by_node {
                    debug_assert_eq!(gis.len(), 2);
                    pair_of[gis[0]] = gis[1];
                    pair_of[gis[1]] = gis[0];
                }
                Ok(CostModel::VertexCover { k_prime, pair_of })
            }
        }
    }

    fn cost(&self, _instance: &ReductionInstance, order: &[usize]) -> Cost {
        match self {
            CostModel::HamPath {
                n,
                m,
                r,
                variant,
                epsilon,
                adjacency,
                node_of_group,
            } => {
                let n = *n;
                let m = *m;
                // Transition ledger: turning the previous sink blue costs 1;
                // moving a red pebble into the next group costs 1 per moved
                // pebble (store + free source recompute) without
                // recomputation restrictions, 2 (store + load) with them.
                // Adjacent nodes share a merged contact, saving one move.
                let per_move: i64 = match variant {
                    Variant::Nodel => 1,
                    _ => 2,
                };
                let mut transitions = Cost::zero();
                for w in order.windows(2) {
                    let a = node_of_group[w[0]];
                    let b = node_of_group[w[1]];
                    let moved = if adjacency[a][b] { n - 1 } else { n };
                    transitions += Cost::from_integer(1 + per_move * moved);
                }
                match variant {
                    Variant::Nodel => transitions,
                    Variant::Oneshot => {
                        // red pebbles leave spent sources by deletion, which
                        // removes one store per source outside the last group
                        let sources = n * (n - 1) - m;
                        transitions - Cost::from_integer(sources - (n - 1))
                    }
                    Variant::Base | Variant::Compcost => {
                        let sources = n * (n - 1) - m;
                        let mut c = transitions - Cost::from_integer(sources - (n - 1));
                        // each source costs 4 transfers through its private
                        // hard-to-compute gadget
                        c += Cost::from_integer(4 * sources);
                        if *variant == Variant::Compcost {
                            // gadget computes: s + (R-1) B nodes + 3
                            // starters + the source itself
                            c += Cost::from_integer(r + 4) * *epsilon
                                * Cost::from_integer(sources);
                            // plus one compute per target
                            c += *epsilon * Cost::from_integer(n);
                        }
                        c
                    }
                }
            }
            CostModel::VertexCover { k_prime, pair_of } => {
                let mut pos = vec![usize::MAX; pair_of.len()];
                for (p, &g) in order.iter().enumerate() {
                    pos[g] = p;
                }
                let mut nonconsecutive = 0i64;
                for g in 0..pair_of.len() {
                    let h = pair_of[g];
                    if g < h && pos[g].abs_diff(pos[h]) != 1 {
                        nonconsecutive += 1;
                    }
                }
                Ratio::from_integer(2 * k_prime * nonconsecutive)
            }
        }
    }
}
