//! Executable pebbling semantics: states, move legality, cost accounting,
//! goal detection, and trace validation.

use crate::dag::{Dag, NodeId};
use crate::model::{Cost, FinishConvention, ModelSpec, StartConvention, Variant};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Pebble status of a single node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Empty,
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    /// Step 3: place a red pebble on a node whose inputs are all red.
    Compute,
    /// Step 1: replace a blue pebble by a red one.
    Load,
    /// Step 2: replace a red pebble by a blue one.
    Store,
    /// Step 4: remove a pebble of either color.
    Delete,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Load => "load",
            MoveKind::Store => "store",
            MoveKind::Compute => "compute",
            MoveKind::Delete => "delete",
        }
    }
}

/// One move of a pebbling, referencing a node of the DAG being pebbled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub node: NodeId,
}

impl Move {
    pub fn new(kind: MoveKind, node: NodeId) -> Self {
        Move { kind, node }
    }
}

/// An ordered sequence of moves. Validity is relative to a DAG, model, and
/// red-pebble budget; see [`validate_trace`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub moves: Vec<Move>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Pebble placement plus computed-set bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebbleState {
    status: Vec<Status>,
    computed: Vec<bool>,
    red_count: usize,
}

impl PebbleState {
    pub fn status(&self, v: NodeId) -> Status {
        self.status[v.index()]
    }

    pub fn is_computed(&self, v: NodeId) -> bool {
        self.computed[v.index()]
    }

    pub fn red_count(&self) -> usize {
        self.red_count
    }

    pub fn statuses(&self) -> &[Status] {
        &self.status
    }

    pub fn computed_flags(&self) -> &[bool] {
        &self.computed
    }
}

/// Why a move was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum IllegalMoveReason {
    #[error("red pebble budget exceeded")]
    RedBudgetExceeded,
    #[error("not all inputs hold red pebbles")]
    InputsNotRed,
    #[error("node may not be (re)computed")]
    RecomputeForbidden,
    #[error("deletions are not available in this model")]
    DeleteForbidden,
    #[error("node holds no pebble")]
    NoPebble,
    #[error("node does not hold a blue pebble")]
    NotBlue,
    #[error("node does not hold a red pebble")]
    NotRed,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("illegal move at index {index} ({node}): {reason}")]
    IllegalMoveAt {
        index: usize,
        node: String,
        reason: IllegalMoveReason,
    },
    #[error("trace replays cleanly but the final state does not satisfy the goal")]
    GoalNotReached,
    #[error("trace line {line}: {msg}")]
    BadFormat { line: usize, msg: String },
    #[error("trace references unknown node `{0}`")]
    UnknownNode(String),
}

/// Move counts and exact total cost of a replayed trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub loads: u64,
    pub stores: u64,
    pub computes: u64,
    pub deletes: u64,
    #[serde(with = "crate::model::rational_serde")]
    pub total: Cost,
}

impl CostReport {
    /// Recompute the total from the move counts alone.
    pub fn from_counts(model: &ModelSpec, loads: u64, stores: u64, computes: u64, deletes: u64) -> Self {
        let mut total = Cost::from_integer((loads + stores) as i64);
        if model.variant == Variant::Compcost {
            total += model.epsilon * Cost::from_integer(computes as i64);
        }
        CostReport {
            loads,
            stores,
            computes,
            deletes,
            total,
        }
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "loads={} stores={} computes={} deletes={} total={}",
            self.loads, self.stores, self.computes, self.deletes, self.total
        )
    }
}

/// Starting state per the model's start convention.
pub fn initial_state(dag: &Dag, model: &ModelSpec) -> PebbleState {
    let n = dag.node_count();
    let mut state = PebbleState {
        status: vec![Status::Empty; n],
        computed: vec![false; n],
        red_count: 0,
    };
    if model.start == StartConvention::BlueSources {
        for v in dag.sources() {
            state.status[v.index()] = Status::Blue;
            state.computed[v.index()] = true;
        }
    }
    state
}

/// Check one move without applying it.
pub fn check_move(
    dag: &Dag,
    model: &ModelSpec,
    r: usize,
    state: &PebbleState,
    mv: Move,
) -> Result<(), IllegalMoveReason> {
    let v = mv.node;
    match mv.kind {
        MoveKind::Load => {
            if state.status(v) != Status::Blue {
                return Err(IllegalMoveReason::NotBlue);
            }
            if state.red_count >= r {
                return Err(IllegalMoveReason::RedBudgetExceeded);
            }
        }
        MoveKind::Store => {
            if state.status(v) != Status::Red {
                return Err(IllegalMoveReason::NotRed);
            }
        }
        MoveKind::Compute => {
            if model.start == StartConvention::BlueSources && dag.is_source(v) {
                return Err(IllegalMoveReason::RecomputeForbidden);
            }
            if state.status(v) == Status::Red {
                return Err(IllegalMoveReason::RecomputeForbidden);
            }
            if model.variant == Variant::Oneshot && state.is_computed(v) {
                return Err(IllegalMoveReason::RecomputeForbidden);
            }
            if dag.preds(v).iter().any(|&p| state.status(p) != Status::Red) {
                return Err(IllegalMoveReason::InputsNotRed);
            }
            // Placing a red pebble always occupies a budget slot, whether v
            // was empty or blue.
            if state.red_count >= r {
                return Err(IllegalMoveReason::RedBudgetExceeded);
            }
        }
        MoveKind::Delete => {
            if model.variant == Variant::Nodel {
                return Err(IllegalMoveReason::DeleteForbidden);
            }
            if state.status(v) == Status::Empty {
                return Err(IllegalMoveReason::NoPebble);
            }
        }
    }
    Ok(())
}

/// All moves legal in `state`, ordered by kind then node id.
pub fn legal_moves(dag: &Dag, model: &ModelSpec, r: usize, state: &PebbleState) -> Vec<Move> {
    let mut out = Vec::new();
    for kind in [MoveKind::Compute, MoveKind::Load, MoveKind::Store, MoveKind::Delete] {
        for v in dag.node_ids() {
            let mv = Move::new(kind, v);
            if check_move(dag, model, r, state, mv).is_ok() {
                out.push(mv);
            }
        }
    }
    out
}

/// Apply one legal move, returning the new state and the move's exact cost.
pub fn apply_move(
    dag: &Dag,
    model: &ModelSpec,
    r: usize,
    state: &PebbleState,
    mv: Move,
) -> Result<(PebbleState, Cost), IllegalMoveReason> {
    check_move(dag, model, r, state, mv)?;
    let mut next = state.clone();
    let v = mv.node;
    let cost = match mv.kind {
        MoveKind::Load => {
            next.status[v.index()] = Status::Red;
            next.red_count += 1;
            Cost::from_integer(1)
        }
        MoveKind::Store => {
            next.status[v.index()] = Status::Blue;
            next.red_count -= 1;
            Cost::from_integer(1)
        }
        MoveKind::Compute => {
            next.status[v.index()] = Status::Red;
            next.red_count += 1;
            next.computed[v.index()] = true;
            model.compute_cost()
        }
        MoveKind::Delete => {
            if next.status[v.index()] == Status::Red {
                next.red_count -= 1;
            }
            next.status[v.index()] = Status::Empty;
            Cost::zero()
        }
    };
    Ok((next, cost))
}

/// Goal test per the model's finish convention.
pub fn is_goal(dag: &Dag, model: &ModelSpec, state: &PebbleState) -> bool {
    dag.node_ids().filter(|&v| dag.is_sink(v)).all(|v| match model.finish {
        FinishConvention::AnyPebbleOnSinks => state.status(v) != Status::Empty,
        FinishConvention::BlueOnSinks => state.status(v) == Status::Blue,
    })
}

/// Replay an arbitrary trace from the initial state. Returns the cost report
/// on success; pinpoints the first illegal move or a missed goal otherwise.
pub fn validate_trace(
    dag: &Dag,
    model: &ModelSpec,
    r: usize,
    trace: &Trace,
) -> Result<CostReport, TraceError> {
    let mut state = initial_state(dag, model);
    let (mut loads, mut stores, mut computes, mut deletes) = (0u64, 0u64, 0u64, 0u64);
    for (index, &mv) in trace.moves.iter().enumerate() {
        match apply_move(dag, model, r, &state, mv) {
            Ok((next, _)) => {
                state = next;
                match mv.kind {
                    MoveKind::Load => loads += 1,
                    MoveKind::Store => stores += 1,
                    MoveKind::Compute => computes += 1,
                    MoveKind::Delete => deletes += 1,
                }
            }
            Err(reason) => {
                return Err(TraceError::IllegalMoveAt {
                    index,
                    node: dag.node_name(mv.node).to_string(),
                    reason,
                })
            }
        }
    }
    if !is_goal(dag, model, &state) {
        return Err(TraceError::GoalNotReached);
    }
    Ok(CostReport::from_counts(model, loads, stores, computes, deletes))
}

/// Check the trace length against the explicit per-model bound. The base
/// model claims no bound, so every trace passes there.
pub fn length_bound_check(dag: &Dag, model: &ModelSpec, trace: &Trace) -> bool {
    let n = dag.node_count() as i64;
    let delta = dag.max_indegree() as i64;
    let transfers = Cost::from_integer((2 * delta + 1) * n);
    let len = Cost::from_integer(trace.len() as i64);
    match model.variant {
        Variant::Base => true,
        // n computes + n deletes, plus the transfer allowance
        Variant::Oneshot => len <= Cost::from_integer(2 * n) + transfers,
        // n first computes + transfers + one recompute per store
        Variant::Nodel => len <= Cost::from_integer(n) + transfers * Cost::from_integer(2),
        // cost allowance (2*delta+1+eps)*n, and at most 2/eps non-transfer
        // steps per unit of it
        Variant::Compcost => {
            let allowance = (Cost::from_integer(2 * delta + 1) + model.epsilon)
                * Cost::from_integer(n);
            len <= allowance.clone() + allowance * Cost::from_integer(2) / model.epsilon
        }
    }
}

// ---------------------------------------------------------------------------
// Trace wire format: JSON Lines, one move per line.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MoveJson {
    op: String,
    node: String,
}

/// Parse the JSON-Lines trace format against a concrete DAG.
pub fn parse_trace(dag: &Dag, text: &str) -> Result<Trace, TraceError> {
    let mut moves = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let raw: MoveJson = serde_json::from_str(line).map_err(|e| TraceError::BadFormat {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let kind = match raw.op.as_str() {
            "load" => MoveKind::Load,
            "store" => MoveKind::Store,
            "compute" => MoveKind::Compute,
            "delete" => MoveKind::Delete,
            other => {
                return Err(TraceError::BadFormat {
                    line: i + 1,
                    msg: format!("unknown op `{other}`"),
                })
            }
        };
        let node = dag
            .node_id(&raw.node)
            .ok_or_else(|| TraceError::UnknownNode(raw.node.clone()))?;
        moves.push(Move::new(kind, node));
    }
    Ok(Trace { moves })
}

/// Serialize a trace to JSON Lines.
pub fn serialize_trace(dag: &Dag, trace: &Trace) -> String {
    let mut out = String::new();
    for mv in &trace.moves {
        let raw = MoveJson {
            op: mv.kind.as_str().to_string(),
            node: dag.node_name(mv.node).to_string(),
        };
        out.push_str(&serde_json::to_string(&raw).expect("trace serialization cannot fail"));
        out.push('\n');
    }
    out
}
