//! Greedy pebbling heuristics, the naive topological baseline, and a shared
//! executor that turns a fixed visit schedule into a concrete trace.

use crate::dag::{Dag, NodeId};
use crate::engine::{Move, MoveKind, Trace};
use crate::model::{ModelSpec, StartConvention, Variant};
use crate::solver::SolveError;
use std::collections::HashMap;

/// Which ready node the greedy driver computes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyRule {
    /// Largest number of red pebbles among the inputs.
    MostRedInputs,
    /// Smallest number of blue pebbles among the inputs.
    FewestBlueInputs,
    /// Largest red-pebbles-to-inputs ratio.
    BestRedRatio,
}

/// Which red pebble to give up when the budget is full.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvictionPolicy {
    /// Store the pebble whose next use in the simulated greedy order is
    /// farthest away.
    FarthestNextUse,
    /// Store the lexicographically smallest node. Deterministic baseline.
    LowestId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyPolicy {
    pub rule: GreedyRule,
    pub eviction: EvictionPolicy,
}

impl Default for GreedyPolicy {
    fn default() -> Self {
        GreedyPolicy {
            rule: GreedyRule::MostRedInputs,
            eviction: EvictionPolicy::FarthestNextUse,
        }
    }
}

const ST_EMPTY: u8 = 0;
const ST_RED: u8 = 1;
const ST_BLUE: u8 = 2;

/// Ranks red pebbles for eviction; larger means needed later
/// (`usize::MAX` = never needed again, evict first).
type NextUse<'m> = dyn FnMut(NodeId) -> usize + 'm;

/// Trace-building simulator shared by the greedy driver, the canonical
/// schedules of the generators, and the naive baseline. It tracks pebble
/// placement, emits moves, and performs evictions: pebbles with no remaining
/// uses are deleted when the model allows, otherwise a victim is stored.
pub(crate) struct Executor<'a> {
    dag: &'a Dag,
    model: &'a ModelSpec,
    r: usize,
    pub status: Vec<u8>,
    pub computed: Vec<bool>,
    red: usize,
    moves: Vec<Move>,
    pinned: Vec<bool>,
}

impl<'a> Executor<'a> {
    pub fn new(dag: &'a Dag, model: &'a ModelSpec, r: usize) -> Self {
        let n = dag.node_count();
        let mut ex = Executor {
            dag,
            model,
            r,
            status: vec![ST_EMPTY; n],
            computed: vec![false; n],
            red: 0,
            moves: Vec::new(),
            pinned: vec![false; n],
        };
        if model.start == StartConvention::BlueSources {
            for v in dag.sources() {
                ex.status[v.index()] = ST_BLUE;
                ex.computed[v.index()] = true;
            }
        }
        ex
    }

    fn emit(&mut self, kind: MoveKind, v: NodeId) {
        let i = v.index();
        match kind {
            MoveKind::Load => {
                debug_assert_eq!(self.status[i], ST_BLUE);
                self.status[i] = ST_RED;
                self.red += 1;
            }
            MoveKind::Store => {
                debug_assert_eq!(self.status[i], ST_RED);
                self.status[i] = ST_BLUE;
                self.red -= 1;
            }
            MoveKind::Compute => {
                debug_assert_ne!(self.status[i], ST_RED);
                // a blue pebble is replaced, an empty slot is filled; either
                // way one more red pebble is on the board
                self.status[i] = ST_RED;
                self.red += 1;
                self.computed[i] = true;
            }
            MoveKind::Delete => {
                debug_assert_eq!(self.status[i], ST_RED);
                self.status[i] = ST_EMPTY;
                self.red -= 1;
            }
        }
        self.moves.push(Move::new(kind, v));
    }

    fn has_uncomputed_succ(&self, v: NodeId) -> bool {
        self.dag.succs(v).iter().any(|w| !self.computed[w.index()])
    }

    /// Free one red slot: delete a spent non-sink pebble when the model
    /// allows it, otherwise store the policy's victim.
    fn evict_one(&mut self, next_use: &mut NextUse) {
        if self.model.variant != Variant::Nodel {
            let victim = (0..self.status.len())
                .map(|i| NodeId(i as u32))
                .filter(|&v| {
                    self.status[v.index()] == ST_RED
                        && !self.pinned[v.index()]
                        && !self.dag.is_sink(v)
                        && !self.has_uncomputed_succ(v)
                })
                .min_by(|&a, &b| self.dag.node_name(a).cmp(self.dag.node_name(b)));
            if let Some(v) = victim {
                self.emit(MoveKind::Delete, v);
                return;
            }
        }
        let victim = (0..self.status.len())
            .map(|i| NodeId(i as u32))
            .filter(|&v| self.status[v.index()] == ST_RED && !self.pinned[v.index()])
            .max_by(|&a, &b| {
                next_use(a)
                    .cmp(&next_use(b))
                    .then_with(|| self.dag.node_name(b).cmp(self.dag.node_name(a)))
            })
            .expect("an unpinned red pebble always exists when eviction is required");
        self.emit(MoveKind::Store, victim);
    }

    fn ensure_slot(&mut self, next_use: &mut NextUse) {
        while self.red >= self.r {
            self.evict_one(next_use);
        }
    }

    /// Make `v` red: load it if blue, compute it if never computed. The
    /// drivers never evict values that are still needed, so a computed but
    /// empty node here means the schedule itself is broken.
    pub fn make_red(&mut self, v: NodeId, next_use: &mut NextUse) {
        let i = v.index();
        match self.status[i] {
            ST_RED => {}
            ST_BLUE => {
                self.ensure_slot(next_use);
                self.emit(MoveKind::Load, v);
            }
            _ => {
                assert!(
                    !self.computed[i],
                    "value of {} was deleted while still needed",
                    self.dag.node_name(v)
                );
                self.ensure_slot(next_use);
                self.emit(MoveKind::Compute, v);
            }
        }
    }

    /// Acquire all inputs of `v` in name order (pinning them), then compute
    /// `v` itself.
    pub fn compute_node(&mut self, v: NodeId, next_use: &mut NextUse) {
        let mut preds: Vec<NodeId> = self.dag.preds(v).to_vec();
        preds.sort_by(|&a, &b| self.dag.node_name(a).cmp(self.dag.node_name(b)));
        for &p in &preds {
            self.pinned[p.index()] = true;
        }
        for &p in &preds {
            self.make_red(p, next_use);
        }
        self.ensure_slot(next_use);
        self.emit(MoveKind::Compute, v);
        for &p in &preds {
            self.pinned[p.index()] = false;
        }
    }

    pub fn pin(&mut self, v: NodeId, on: bool) {
        self.pinned[v.index()] = on;
    }

    pub fn into_trace(self) -> Trace {
        Trace { moves: self.moves }
    }
}

fn store_red_sinks(ex: &mut Executor) {
    for v in ex.dag.sinks() {
        if ex.status[v.index()] == ST_RED {
            ex.emit(MoveKind::Store, v);
        }
    }
}

/// The greedy driver: repeatedly pick the most attractive node whose
/// non-source inputs are all computed (source inputs are produced on demand
/// as part of the visit), acquire its inputs, and compute it. Missing red
/// inputs are loaded; evictions follow the policy. Recomputation is never
/// chosen: the driver realizes an ordering of first computations.
pub fn greedy_pebble(
    dag: &Dag,
    model: &ModelSpec,
    r: usize,
    policy: GreedyPolicy,
) -> Result<Trace, SolveError> {
    let required = dag.feasibility_threshold();
    if r < required {
        return Err(SolveError::Infeasible { r, required });
    }

    let n = dag.node_count();
    let mut ex = Executor::new(dag, model, r);

    let candidates = |computed: &[bool]| -> Vec<NodeId> {
        (0..n)
            .map(|i| NodeId(i as u32))
            .filter(|&v| {
                !computed[v.index()]
                    && !dag.is_source(v)
                    && dag
                        .preds(v)
                        .iter()
                        .all(|&p| dag.is_source(p) || computed[p.index()])
            })
            .collect()
    };

    let score = |status: &[u8], v: NodeId| -> (usize, usize) {
        let mut red = 0;
        let mut blue = 0;
        for &p in dag.preds(v) {
            match status[p.index()] {
                ST_RED => red += 1,
                ST_BLUE => blue += 1,
                _ => {}
            }
        }
        (red, blue)
    };

    let pick = |status: &[u8], cands: &[NodeId]| -> NodeId {
        *cands
            .iter()
            .max_by(|&&a, &&b| {
                let (ra, ba) = score(status, a);
                let (rb, bb) = score(status, b);
                let better = match policy.rule {
                    GreedyRule::MostRedInputs => ra.cmp(&rb),
                    GreedyRule::FewestBlueInputs => bb.cmp(&ba),
                    GreedyRule::BestRedRatio => {
                        (ra * dag.indegree(b)).cmp(&(rb * dag.indegree(a)))
                    }
                };
                better.then_with(|| dag.node_name(b).cmp(dag.node_name(a)))
            })
            .expect("candidate set nonempty")
    };

    // Continuation of the greedy order with scores frozen at the current
    // pebble state; gives the farthest-next-use eviction its reference
    // stream.
    let plan_next_use = |ex: &Executor| -> HashMap<NodeId, usize> {
        let mut computed = ex.computed.clone();
        let mut first_use = HashMap::new();
        let mut pos = 0usize;
        loop {
            let cands = candidates(&computed);
            if cands.is_empty() {
                break;
            }
            let next = pick(&ex.status, &cands);
            for &p in dag.preds(next) {
                first_use.entry(p).or_insert(pos);
            }
            computed[next.index()] = true;
            pos += 1;
        }
        first_use
    };

    loop {
        let cands = candidates(&ex.computed);
        if cands.is_empty() {
            break;
        }
        let v = pick(&ex.status, &cands);
        let plan = match policy.eviction {
            EvictionPolicy::FarthestNextUse => Some(plan_next_use(&ex)),
            EvictionPolicy::LowestId => None,
        };
        let mut next_use = |u: NodeId| -> usize {
            plan.as_ref()
                .map_or(0, |m| m.get(&u).copied().unwrap_or(usize::MAX))
        };
        ex.compute_node(v, &mut next_use);
    }

    // Isolated sources that are sinks still need a pebble.
    let mut leftovers: Vec<NodeId> = (0..n)
        .map(|i| NodeId(i as u32))
        .filter(|&v| dag.is_source(v) && dag.is_sink(v) && !ex.computed[v.index()])
        .collect();
    leftovers.sort_by(|&a, &b| dag.node_name(a).cmp(dag.node_name(b)));
    for v in leftovers {
        let mut next_use = |_: NodeId| 0usize;
        ex.ensure_slot(&mut next_use);
        ex.emit(MoveKind::Compute, v);
    }

    if model.finish == crate::model::FinishConvention::BlueOnSinks {
        store_red_sinks(&mut ex);
    }

    Ok(ex.into_trace())
}

/// The baseline schedule: walk a topological order; before each node, turn
/// every red pebble outside its input set blue, then load blue inputs and
/// compute. Costs at most 2*max_indegree + 1 per node.
pub fn naive_topological(dag: &Dag, model: &ModelSpec, r: usize) -> Result<Trace, SolveError> {
    let required = dag.feasibility_threshold();
    if r < required {
        return Err(SolveError::Infeasible { r, required });
    }
    let mut ex = Executor::new(dag, model, r);
    for &v in dag.topo_order() {
        if model.start == StartConvention::BlueSources && dag.is_source(v) {
            continue; // already pebbled blue; loaded on demand by consumers
        }
        let evict: Vec<NodeId> = (0..dag.node_count())
            .map(|i| NodeId(i as u32))
            .filter(|&u| ex.status[u.index()] == ST_RED && !dag.preds(v).contains(&u))
            .collect();
        for u in evict {
            ex.emit(MoveKind::Store, u);
        }
        let mut next_use = |_: NodeId| 0usize;
        ex.compute_node(v, &mut next_use);
    }
    if model.finish == crate::model::FinishConvention::BlueOnSinks {
        store_red_sinks(&mut ex);
    }
    Ok(ex.into_trace())
}

/// Execute a fixed group visitation order: acquire every member of each
/// group in turn, then compute the group's targets. Evictions use exact
/// farthest-next-use against the known remainder of the schedule.
pub fn execute_group_order(
    dag: &Dag,
    model: &ModelSpec,
    r: usize,
    order: &[usize],
) -> Result<Trace, SolveError> {
    let required = dag.feasibility_threshold();
    if r < required {
        return Err(SolveError::Infeasible { r, required });
    }
    let mut ex = Executor::new(dag, model, r);

    for (step, &gi) in order.iter().enumerate() {
        // next appearance of each node as member or target downstream
        let mut first: HashMap<NodeId, usize> = HashMap::new();
        for (pos, &gj) in order.iter().enumerate().skip(step + 1) {
            let g = &dag.groups()[gj];
            for &m in g.members.iter().chain(g.targets.iter()) {
                first.entry(m).or_insert(pos);
            }
        }
        let mut next_use =
            move |u: NodeId| -> usize { first.get(&u).copied().unwrap_or(usize::MAX) };

        let g = dag.groups()[gi].clone();
        let mut members = g.members.clone();
        members.sort_by(|&a, &b| dag.node_name(a).cmp(dag.node_name(b)));
        for &m in &members {
            ex.pin(m, true);
        }
        for &m in &members {
            ex.make_red(m, &mut next_use);
        }
        let mut targets = g.targets.clone();
        targets.sort_by(|&a, &b| dag.node_name(a).cmp(dag.node_name(b)));
        for &t in &targets {
            if !ex.computed[t.index()] {
                ex.ensure_slot(&mut next_use);
                ex.emit(MoveKind::Compute, t);
            }
        }
        for &m in &members {
            ex.pin(m, false);
        }
    }

    // Sinks outside every group (bare contact sinks in some reductions)
    // still need a pebble.
    let mut rest: Vec<NodeId> = (0..dag.node_count())
        .map(|i| NodeId(i as u32))
        .filter(|&v| dag.is_sink(v) && ex.status[v.index()] == ST_EMPTY && !ex.computed[v.index()])
        .collect();
    rest.sort_by(|&a, &b| dag.node_name(a).cmp(dag.node_name(b)));
    for v in rest {
        let mut next_use = |_: NodeId| 0usize;
        ex.compute_node(v, &mut next_use);
    }

    if model.finish == crate::model::FinishConvention::BlueOnSinks {
        store_red_sinks(&mut ex);
    }
    Ok(ex.into_trace())
}
