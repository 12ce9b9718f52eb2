//! Graph transformations: universal source, hard-to-compute gadget, and the
//! constant-degree ladder rewrite.

use crate::dag::{Dag, DagBuilder, DagError, NodeId};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("gadget requires R >= 2, got {0}")]
    InvalidR(usize),
    #[error("R = {r} is below the feasibility threshold {required} of the transformed DAG")]
    InfeasibleR { r: usize, required: usize },
    #[error("group {group} has {size} members but the transform expects exactly {expected}")]
    GroupSizeMismatch {
        group: usize,
        size: usize,
        expected: usize,
    },
    #[error("transform target has no groups annotated")]
    NoGroups,
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Pick a node name that is not yet taken, starting from `base` and
/// suffixing `_1`, `_2`, ... on collision. The chosen name is recorded by
/// the callers in `meta`, so a collision is never resolved silently.
fn fresh_name(dag: &Dag, base: &str) -> String {
    if dag.node_id(base).is_none() {
        return base.to_string();
    }
    let mut i = 1;
    loop {
        let candidate = format!("{base}_{i}");
        if dag.node_id(&candidate).is_none() {
            return candidate;
        }
        i += 1;
    }
}

/// Add a fresh source `s0` with an edge to every original node. The result
/// has exactly one source; callers should solve it with one extra red pebble
/// (a pebble parks on `s0` for the whole run), which `meta` records.
pub fn add_universal_source(dag: &Dag) -> Result<Dag, TransformError> {
    let s0 = fresh_name(dag, "s0");
    let mut b = dag.to_builder();
    b.node(s0.clone());
    for v in dag.node_ids() {
        b.edge(s0.clone(), dag.node_name(v).to_string());
    }
    b.meta("universal_source", s0);
    b.meta("r_increment", "1");
    let out = b.build()?;
    let mut b = out.to_builder();
    b.meta(
        "feasibility_threshold",
        out.feasibility_threshold().to_string(),
    );
    Ok(b.build()?)
}

/// Attach the hard-to-compute gadget in front of every source.
///
/// Per original source `v`: three starter nodes `h2c.<v>.u1..u3`, each an
/// input of `v` and each fed by the entire group `B` of `R - 1` nodes; a
/// node `s` feeds every node of `B`. With `per_source_copies = false` a
/// single `s`/`B` pair is shared by all sources; with `true` every source
/// gets an independent copy, which makes per-source cost accounting exact.
///
/// Computing any starter pins all `R` red pebbles, so two of the three
/// starters must round-trip through slow memory before `v` can be computed:
/// producing `v` costs exactly 4 transfers and deleted gadget values are
/// never worth recomputing.
pub fn attach_h2c(dag: &Dag, r: usize, per_source_copies: bool) -> Result<Dag, TransformError> {
    let out = attach_h2c_unchecked(dag, r, per_source_copies)?;
    let required = out.feasibility_threshold();
    if r < required {
        return Err(TransformError::InfeasibleR { r, required });
    }
    Ok(out)
}

/// Gadget attachment without the feasibility gate. The path reduction needs
/// instances whose analytical cost model is evaluated without ever pebbling
/// them, and at the smallest graph sizes the starter triple pushes the
/// feasibility threshold past R.
pub(crate) fn attach_h2c_unchecked(
    dag: &Dag,
    r: usize,
    per_source_copies: bool,
) -> Result<Dag, TransformError> {
    if r < 2 {
        return Err(TransformError::InvalidR(r));
    }
    let sources = dag.sources();
    let mut b = dag.to_builder();

    let mut shared_b: Vec<String> = Vec::new();
    if !per_source_copies {
        let s = fresh_name(dag, "h2c.s");
        b.node(s.clone());
        for i in 1..r {
            let bn = fresh_name(dag, &format!("h2c.B.{i}"));
            b.node(bn.clone());
            b.edge(s.clone(), bn.clone());
            shared_b.push(bn);
        }
    }

    for &src in &sources {
        let v = dag.node_name(src).to_string();
        let b_nodes: Vec<String> = if per_source_copies {
            let s = fresh_name(dag, &format!("h2c.{v}.s"));
            b.node(s.clone());
            let mut own = Vec::new();
            for i in 1..r {
                let bn = fresh_name(dag, &format!("h2c.{v}.B.{i}"));
                b.node(bn.clone());
                b.edge(s.clone(), bn.clone());
                own.push(bn);
            }
            own
        } else {
            shared_b.clone()
        };
        for i in 1..=3 {
            let u = fresh_name(dag, &format!("h2c.{v}.u{i}"));
            b.node(u.clone());
            for bn in &b_nodes {
                b.edge(bn.clone(), u.clone());
            }
            b.edge(u, v.clone());
        }
    }

    b.meta("h2c_r", r.to_string());
    let out = b.build()?;
    let mut b = out.to_builder();
    b.meta(
        "feasibility_threshold",
        out.feasibility_threshold().to_string(),
    );
    Ok(b.build()?)
}

/// Replace every annotated input group's direct edges to its targets by `h`
/// layers of indegree-2 ladder nodes.
///
/// Each layer holds one node per group member; node `(layer, col)` has the
/// group's `col`-th member and the previous ladder node as its two inputs.
/// The final ladder node feeds all of the group's original targets. Walking
/// the ladder needs two red pebbles beyond the `R - 1` members, so the
/// rewritten DAG behaves like the original when solved with `R + 1` pebbles
/// (recorded in `meta`), while the largest introduced indegree is 2.
///
/// Group annotations are consumed: the member-to-target edges they describe
/// no longer exist in the result.
pub fn cd_transform(dag: &Dag, r: usize, h: usize) -> Result<Dag, TransformError> {
    if dag.groups().is_empty() {
        return Err(TransformError::NoGroups);
    }
    if r < 2 {
        return Err(TransformError::InvalidR(r));
    }
    for (gi, g) in dag.groups().iter().enumerate() {
        if g.members.len() != r - 1 {
            return Err(TransformError::GroupSizeMismatch {
                group: gi,
                size: g.members.len(),
                expected: r - 1,
            });
        }
    }

    // Drop the direct member -> target edges of every group, then wire the
    // ladders in.
    let mut removed: Vec<(NodeId, NodeId)> = Vec::new();
    for g in dag.groups() {
        for &m in &g.members {
            for &t in &g.targets {
                removed.push((m, t));
            }
        }
    }

    let mut b = DagBuilder::new(dag.name());
    for v in dag.node_ids() {
        b.node(dag.node_name(v).to_string());
    }
    for &(u, v) in dag.edges() {
        if !removed.contains(&(u, v)) {
            b.edge(dag.node_name(u).to_string(), dag.node_name(v).to_string());
        }
    }
    for (k, v) in dag.meta() {
        b.meta(k.clone(), v.clone());
    }

    for (gi, g) in dag.groups().iter().enumerate() {
        let mut prev: Option<String> = None;
        for layer in 1..=h {
            for (ci, &m) in g.members.iter().enumerate() {
                let w = format!("cd.{gi}.{layer}.{}", ci + 1);
                b.node(w.clone());
                b.edge(dag.node_name(m).to_string(), w.clone());
                if let Some(p) = prev {
                    b.edge(p, w.clone());
                }
                prev = Some(w);
            }
        }
        let last = prev.expect("h >= 1 and group nonempty");
        for &t in &g.targets {
            b.edge(last.clone(), dag.node_name(t).to_string());
        }
    }

    b.meta("r_increment", "1");
    b.meta("cd_h", h.to_string());
    let out = b.build()?;
    let mut b = out.to_builder();
    b.meta(
        "feasibility_threshold",
        out.feasibility_threshold().to_string(),
    );
    Ok(b.build()?)
}
