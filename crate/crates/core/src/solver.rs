//! Exact optimal-cost search over pebble states.
//!
//! Uniform-cost search with integer bucket queues. Costs are scaled to
//! integers (by the epsilon denominator under `Compcost`), so zero-cost
//! compute/delete moves are simply expanded within the same bucket before
//! the next cost level opens.

use crate::dag::{Dag, NodeId};
use crate::engine::{self, Move, MoveKind, Status, Trace};
use crate::greedy::naive_topological;
use crate::model::{Cost, ModelSpec, StartConvention, Variant};
use num_rational::Ratio;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchLimits {
    /// Hard cap on expanded states before the search gives up.
    pub max_states: usize,
    /// Optional cost ceiling; states strictly above it are pruned.
    pub max_cost: Option<Cost>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_states: 5_000_000,
            max_cost: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimalResult {
    pub cost: Cost,
    pub trace: Trace,
    pub states_expanded: usize,
    /// True iff the search completed, guaranteeing `cost` is the minimum.
    pub exhausted: bool,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("R = {r} is below the feasibility threshold {required} (max indegree + 1)")]
    Infeasible { r: usize, required: usize },
    #[error("R range is empty or starts below the feasibility threshold")]
    BadRange,
}

/// One point of a tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub r: usize,
    pub cost: Cost,
    pub exhausted: bool,
}

// --- internal search state -------------------------------------------------

const EMPTY: u8 = 0;
const RED: u8 = 1;
const BLUE: u8 = 2;

struct SearchCtx<'a> {
    dag: &'a Dag,
    model: &'a ModelSpec,
    r: usize,
    n: usize,
    oneshot: bool,
    sink: Vec<bool>,
    source: Vec<bool>,
    status_words: usize,
    computed_words: usize,
    /// memo: computed bitset -> "still needed" bitset (oneshot only)
    needed_memo: HashMap<Box<[u64]>, Box<[u64]>>,
}

#[derive(Clone)]
struct SState {
    status: Vec<u8>,
    computed: Box<[u64]>,
    red: usize,
}

#[inline]
fn bit(words: &[u64], i: usize) -> bool {
    words[i / 64] >> (i % 64) & 1 == 1
}

#[inline]
fn set_bit(words: &mut [u64], i: usize) {
    words[i / 64] |= 1 << (i % 64);
}

impl<'a> SearchCtx<'a> {
    fn new(dag: &'a Dag, model: &'a ModelSpec, r: usize) -> Self {
        let n = dag.node_count();
        SearchCtx {
            dag,
            model,
            r,
            n,
            oneshot: model.variant == Variant::Oneshot,
            sink: dag.node_ids().map(|v| dag.is_sink(v)).collect(),
            source: dag.node_ids().map(|v| dag.is_source(v)).collect(),
            status_words: (2 * n).div_ceil(64),
            computed_words: n.div_ceil(64),
            needed_memo: HashMap::new(),
        }
    }

    fn initial(&self) -> SState {
        let init = engine::initial_state(self.dag, self.model);
        let mut status = vec![EMPTY; self.n];
        let mut computed = vec![0u64; self.computed_words].into_boxed_slice();
        let mut red = 0;
        for v in self.dag.node_ids() {
            let i = v.index();
            status[i] = match init.status(v) {
                Status::Empty => EMPTY,
                Status::Red => {
                    red += 1;
                    RED
                }
                Status::Blue => BLUE,
            };
            if init.is_computed(v) {
                set_bit(&mut computed, i);
            }
        }
        SState {
            status,
            computed,
            red,
        }
    }

    /// Pack the canonical search key: status bits always, computed bits only
    /// under oneshot (elsewhere the computed set never influences legality,
    /// cost, or the goal, so it is dropped to shrink the space).
    fn pack(&self, s: &SState) -> Box<[u64]> {
        let extra = if self.oneshot { self.computed_words } else { 0 };
        let mut key = vec![0u64; self.status_words + extra];
        for (i, &st) in s.status.iter().enumerate() {
            key[(2 * i) / 64] |= (st as u64) << ((2 * i) % 64);
        }
        if self.oneshot {
            key[self.status_words..].copy_from_slice(&s.computed);
        }
        key.into_boxed_slice()
    }

    fn is_goal(&self, s: &SState) -> bool {
        use crate::model::FinishConvention::*;
        (0..self.n).filter(|&i| self.sink[i]).all(|i| match self.model.finish {
            AnyPebbleOnSinks => s.status[i] != EMPTY,
            BlueOnSinks => s.status[i] == BLUE,
        })
    }

    /// Oneshot: bitset of nodes that still must be computed, i.e. uncomputed
    /// nodes that are uncomputed sinks or support one transitively.
    fn needed(&mut self, computed: &[u64]) -> Box<[u64]> {
        if let Some(hit) = self.needed_memo.get(computed) {
            return hit.clone();
        }
        let mut needed = vec![0u64; self.computed_words].into_boxed_slice();
        for &v in self.dag.topo_order().iter().rev() {
            let i = v.index();
            if bit(computed, i) {
                continue;
            }
            let req = self.sink[i]
                || self
                    .dag
                    .succs(v)
                    .iter()
                    .any(|w| bit(&needed, w.index()));
            if req {
                set_bit(&mut needed, i);
            }
        }
        self.needed_memo
            .insert(computed.to_vec().into_boxed_slice(), needed.clone());
        needed
    }

    fn has_needed_succ(&self, v: NodeId, needed: &[u64]) -> bool {
        self.dag.succs(v).iter().any(|w| bit(needed, w.index()))
    }

    /// Generate the successor moves of a state. Sound reductions only; the
    /// oneshot rules are aggressive because its instances are the large
    /// ones, the other variants stay close to the raw move set.
    fn moves(&mut self, s: &SState, out: &mut Vec<Move>) {
        out.clear();
        let slot = s.red < self.r;
        let needed = if self.oneshot {
            Some(self.needed(&s.computed))
        } else {
            None
        };

        // Computes
        for v in self.dag.topo_order() {
            let i = v.index();
            if s.status[i] == RED {
                continue;
            }
            if self.model.start == StartConvention::BlueSources && self.source[i] {
                continue;
            }
            if self.oneshot && bit(&s.computed, i) {
                continue;
            }
            if !slot {
                continue;
            }
            if self.dag.preds(*v).iter().any(|p| s.status[p.index()] != RED) {
                continue;
            }
            if let Some(needed) = &needed {
                // compute only nodes that still matter
                if self.source[i] {
                    if !self.lazy_source_ok(s, *v, needed) {
                        continue;
                    }
                } else if !bit(needed, i) {
                    continue;
                }
            }
            out.push(Move::new(MoveKind::Compute, *v));
        }

        // Loads
        for i in 0..self.n {
            if s.status[i] != BLUE || !slot {
                continue;
            }
            let v = NodeId(i as u32);
            if let Some(needed) = &needed {
                if !self.has_needed_succ(v, needed) {
                    continue;
                }
            }
            out.push(Move::new(MoveKind::Load, v));
        }

        // Stores
        for i in 0..self.n {
            if s.status[i] != RED {
                continue;
            }
            let v = NodeId(i as u32);
            if let Some(needed) = &needed {
                if !self.sink[i] && !self.has_needed_succ(v, needed) {
                    continue;
                }
            }
            out.push(Move::new(MoveKind::Store, v));
        }

        // Deletes. Deleting a blue pebble can never help: blue pebbles do
        // not occupy budget and removing one only risks the goal.
        if self.model.variant != Variant::Nodel {
            for i in 0..self.n {
                if s.status[i] != RED {
                    continue;
                }
                let v = NodeId(i as u32);
                if let Some(needed) = &needed {
                    // in oneshot a deleted value is gone for good
                    if self.sink[i] || self.has_needed_succ(v, needed) {
                        continue;
                    }
                }
                out.push(Move::new(MoveKind::Delete, v));
            }
        }
    }

    /// Lazy compute rule for oneshot sources: a free source compute is only
    /// expanded when it fills the lowest missing source slot of some still
    /// needed consumer whose other inputs are already red or are themselves
    /// pending sources. Any optimal pebbling can be reordered into this
    /// form, so the restriction loses nothing.
    fn lazy_source_ok(&self, s: &SState, v: NodeId, needed: &[u64]) -> bool {
        let i = v.index();
        if self.sink[i] {
            return true;
        }
        'consumers: for &w in self.dag.succs(v) {
            if !bit(needed, w.index()) {
                continue;
            }
            let mut lowest_missing_source: Option<NodeId> = None;
            for &p in self.dag.preds(w) {
                let pi = p.index();
                if s.status[pi] == RED {
                    continue;
                }
                if self.source[pi] && !bit(&s.computed, pi) {
                    if lowest_missing_source.map_or(true, |m| p < m) {
                        lowest_missing_source = Some(p);
                    }
                } else {
                    // some non-source or spent input is not red yet
                    continue 'consumers;
                }
            }
            if lowest_missing_source == Some(v) {
                return true;
            }
        }
        false
    }

    fn apply(&self, s: &SState, mv: Move) -> SState {
        let mut next = s.clone();
        let i = mv.node.index();
        match mv.kind {
            MoveKind::Load => {
                next.status[i] = RED;
                next.red += 1;
            }
            MoveKind::Store => {
                next.status[i] = BLUE;
                next.red -= 1;
            }
            MoveKind::Compute => {
                next.status[i] = RED;
                next.red += 1;
                set_bit(&mut next.computed, i);
            }
            MoveKind::Delete => {
                if next.status[i] == RED {
                    next.red -= 1;
                }
                next.status[i] = EMPTY;
            }
        }
        next
    }
}

/// Exact minimum pebbling cost and a witness trace.
pub fn solve_exact(
    dag: &Dag,
    model: &ModelSpec,
    r: usize,
    limits: &SearchLimits,
) -> Result<OptimalResult, SolveError> {
    let required = dag.feasibility_threshold();
    if r < required {
        return Err(SolveError::Infeasible { r, required });
    }

    // Scaled integer weights.
    let unit: u64 = if model.variant == Variant::Compcost {
        *model.epsilon.denom() as u64
    } else {
        1
    };
    let w_compute: u64 = if model.variant == Variant::Compcost {
        *model.epsilon.numer() as u64
    } else {
        0
    };
    let scale = |c: Cost| -> u64 {
        let scaled = c * Cost::from_integer(unit as i64);
        debug_assert!(scaled.is_integer());
        scaled.to_integer() as u64
    };
    let unscale = |d: u64| -> Cost { Ratio::new(d as i64, unit as i64) };

    // A guaranteed-achievable upper bound seeds the bucket queue.
    let naive = naive_topological(dag, model, r).expect("feasibility already checked");
    let naive_report =
        engine::validate_trace(dag, model, r, &naive).expect("naive schedule always validates");
    let mut ub = scale(naive_report.total);
    if let Some(cap) = limits.max_cost {
        ub = ub.min(scale(cap));
    }

    let mut ctx = SearchCtx::new(dag, model, r);
    let root = ctx.initial();
    let root_key = ctx.pack(&root);

    // Arena of discovered states; parents record the incoming move.
    let mut keys: Vec<Box<[u64]>> = vec![root_key.clone()];
    let mut dist: Vec<u64> = vec![0];
    let mut parent: Vec<(u32, Move)> = vec![(u32::MAX, Move::new(MoveKind::Compute, NodeId(0)))];
    let mut visited: HashMap<Box<[u64]>, u32> = HashMap::new();
    visited.insert(root_key, 0);

    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); (ub + 1) as usize];
    buckets[0].push(0);

    let reconstruct = |idx: u32, keys: &[Box<[u64]>], parent: &[(u32, Move)]| -> Trace {
        let _ = keys;
        let mut moves = Vec::new();
        let mut cur = idx;
        while parent[cur as usize].0 != u32::MAX {
            moves.push(parent[cur as usize].1);
            cur = parent[cur as usize].0;
        }
        moves.reverse();
        Trace { moves }
    };

    let mut expanded = 0usize;
    let mut best_goal: Option<(u64, u32)> = None;
    let mut move_buf: Vec<Move> = Vec::new();
    let mut exhausted_budget = false;

    'outer: for d in 0..=ub {
        let mut cursor = 0;
        while cursor < buckets[d as usize].len() {
            let idx = buckets[d as usize][cursor];
            cursor += 1;
            if dist[idx as usize] != d {
                continue; // stale entry
            }
            // Unpack the state by replaying the key.
            let state = unpack(&ctx, &keys[idx as usize]);
            if ctx.is_goal(&state) {
                return Ok(OptimalResult {
                    cost: unscale(d),
                    trace: reconstruct(idx, &keys, &parent),
                    states_expanded: expanded,
                    exhausted: true,
                });
            }
            expanded += 1;
            if expanded > limits.max_states {
                exhausted_budget = true;
                break 'outer;
            }
            ctx.moves(&state, &mut move_buf);
            let moves = std::mem::take(&mut move_buf);
            for &mv in &moves {
                let w = match mv.kind {
                    MoveKind::Load | MoveKind::Store => unit,
                    MoveKind::Compute => w_compute,
                    MoveKind::Delete => 0,
                };
                let nd = d + w;
                if nd > ub {
                    continue;
                }
                let next = ctx.apply(&state, mv);
                let key = ctx.pack(&next);
                match visited.get(&key) {
                    Some(&known) if dist[known as usize] <= nd => continue,
                    Some(&known) => {
                        dist[known as usize] = nd;
                        parent[known as usize] = (idx, mv);
                        buckets[nd as usize].push(known);
                        if ctx.is_goal(&next) {
                            match best_goal {
                                Some((bd, _)) if bd <= nd => {}
                                _ => best_goal = Some((nd, known)),
                            }
                        }
                    }
                    None => {
                        let new_idx = keys.len() as u32;
                        keys.push(key.clone());
                        dist.push(nd);
                        parent.push((idx, mv));
                        visited.insert(key, new_idx);
                        buckets[nd as usize].push(new_idx);
                        if ctx.is_goal(&next) {
                            match best_goal {
                                Some((bd, _)) if bd <= nd => {}
                                _ => best_goal = Some((nd, new_idx)),
                            }
                        }
                    }
                }
            }
            move_buf = moves;
        }
        buckets[d as usize].clear();
    }

    // Search ended without popping a goal: either the state budget ran out
    // or the cost cap cut the space. Report the best-known upper bound.
    let _ = exhausted_budget;
    if let Some((gd, gi)) = best_goal {
        Ok(OptimalResult {
            cost: unscale(gd),
            trace: reconstruct(gi, &keys, &parent),
            states_expanded: expanded,
            exhausted: false,
        })
    } else {
        Ok(OptimalResult {
            cost: naive_report.total,
            trace: naive,
            states_expanded: expanded,
            exhausted: false,
        })
    }
}

fn unpack(ctx: &SearchCtx, key: &[u64]) -> SState {
    let n = ctx.n;
    let mut status = vec![EMPTY; n];
    let mut red = 0;
    for (i, st) in status.iter_mut().enumerate() {
        *st = (key[(2 * i) / 64] >> ((2 * i) % 64) & 0b11) as u8;
        if *st == RED {
            red += 1;
        }
    }
    let computed = if ctx.oneshot {
        key[ctx.status_words..].to_vec().into_boxed_slice()
    } else {
        // outside oneshot the computed set does not constrain anything; mark
        // pebbled nodes as computed so the invariant holds on inspection
        let mut c = vec![0u64; ctx.computed_words].into_boxed_slice();
        for (i, &st) in status.iter().enumerate() {
            if st != EMPTY {
                set_bit(&mut c, i);
            }
        }
        c
    };
    SState {
        status,
        computed,
        red,
    }
}

/// Solve over a range of red-pebble counts; one exact solve per point.
pub fn tradeoff_curve(
    dag: &Dag,
    model: &ModelSpec,
    r_min: usize,
    r_max: usize,
    limits: &SearchLimits,
) -> Result<Vec<CurvePoint>, SolveError> {
    if r_min > r_max || r_min < dag.feasibility_threshold() {
        return Err(SolveError::BadRange);
    }
    let mut out = Vec::with_capacity(r_max - r_min + 1);
    for r in r_min..=r_max {
        let res = solve_exact(dag, model, r, limits)?;
        out.push(CurvePoint {
            r,
            cost: res.cost,
            exhausted: res.exhausted,
        });
    }
    Ok(out)
}
