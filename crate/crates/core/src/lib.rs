//! Red-blue pebble games on DAGs: executable semantics for four cost
//! variants, an exact optimal-cost solver, greedy heuristics, and the
//! gadget/reduction generators that connect pebbling to Hamiltonian Path
//! and Vertex Cover.

pub mod dag;
pub mod engine;
pub mod generate;
pub mod greedy;
pub mod group_order;
pub mod model;
pub mod reduction;
pub mod solver;
pub mod transform;

pub use dag::{parse_dag, serialize_dag, Dag, DagBuilder, DagError, InputGroup, NodeId};
pub use engine::{
    apply_move, initial_state, is_goal, legal_moves, length_bound_check, parse_trace,
    serialize_trace, validate_trace, CostReport, IllegalMoveReason, Move, MoveKind, PebbleState,
    Status, Trace, TraceError,
};
pub use generate::{gen_greedy_grid, gen_tradeoff_dag, GenerateError, GridGroup, GridInstance};
pub use greedy::{
    execute_group_order, greedy_pebble, naive_topological, EvictionPolicy, GreedyPolicy,
    GreedyRule,
};
pub use group_order::{group_order_search, OrderSearchError, OrderSearchResult};
pub use model::{
    parse_epsilon, parse_ratio, Cost, FinishConvention, ModelError, ModelSpec, StartConvention,
    Variant,
};
pub use reduction::{
    canonical_vc_trace, decode_hampath, decode_vertex_cover, group_visit_order, parse_graph,
    reduce_hampath, reduce_vertex_cover, serialize_graph, serialize_sidecar, GraphError,
    ReductionError, ReductionInstance, ReductionKind, UndirectedGraph,
};
pub use solver::{solve_exact, tradeoff_curve, CurvePoint, OptimalResult, SearchLimits, SolveError};
pub use transform::{add_universal_source, attach_h2c, cd_transform, TransformError};
