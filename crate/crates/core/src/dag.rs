//! Immutable DAG representation with validation and JSON I/O.
//!
//! Nodes are identified by strings; internally every node gets a dense
//! `NodeId` index so the engine and solvers can use flat arrays and bitsets.

use serde::{Deserialize, Serialize};
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};

/// Dense index of a node inside one [`Dag`]. Only meaningful together with
/// the `Dag` that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of nodes that are all inputs of every node in `targets`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputGroup {
    pub members: Vec<NodeId>,
    pub targets: Vec<NodeId>,
}

/// Immutable directed acyclic graph. `(u, v)` in `edges` means `u` is an
/// input of `v`. Construction validates all invariants; a `Dag` value is
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct Dag {
    name: String,
    nodes: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    preds: Vec<Vec<NodeId>>,
    succs: Vec<Vec<NodeId>>,
    groups: Vec<InputGroup>,
    meta: BTreeMap<String, String>,
    topo: Vec<NodeId>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DagError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge endpoint `{0}` is not a declared node")]
    UnknownEndpoint(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("group member `{member}` has no edge to group target `{target}`")]
    GroupMissingEdge { member: String, target: String },
    #[error("group member set and target set overlap at `{0}`")]
    GroupOverlap(String),
    #[error("{0}")]
    BadFormat(String),
}

/// Mutable builder; `build` performs all validation.
#[derive(Debug, Default, Clone)]
pub struct DagBuilder {
    name: String,
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    groups: Vec<(Vec<String>, Vec<String>)>,
    meta: BTreeMap<String, String>,
}

impl DagBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        DagBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn node(&mut self, id: impl Into<String>) -> &mut Self {
        self.nodes.push(id.into());
        self
    }

    pub fn edge(&mut self, from: impl Into<String>, to: impl Into<String>) -> &mut Self {
        self.edges.push((from.into(), to.into()));
        self
    }

    pub fn group(&mut self, members: Vec<String>, targets: Vec<String>) -> &mut Self {
        self.groups.push((members, targets));
        self
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn build(self) -> Result<Dag, DagError> {
        let mut index: HashMap<String, NodeId> = HashMap::with_capacity(self.nodes.len());
        for (i, id) in self.nodes.iter().enumerate() {
            match index.entry(id.clone()) {
                Entry::Occupied(_) => return Err(DagError::DuplicateNode(id.clone())),
                Entry::Vacant(slot) => {
                    slot.insert(NodeId(i as u32));
                }
            }
        }

        let n = self.nodes.len();
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut succs: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen = HashMap::with_capacity(self.edges.len());
        for (from, to) in &self.edges {
            let u = *index
                .get(from)
                .ok_or_else(|| DagError::UnknownEndpoint(from.clone()))?;
            let v = *index
                .get(to)
                .ok_or_else(|| DagError::UnknownEndpoint(to.clone()))?;
            if seen.insert((u, v), ()).is_some() {
                return Err(DagError::DuplicateEdge(from.clone(), to.clone()));
            }
            if u == v {
                return Err(DagError::CycleDetected(vec![from.clone(), to.clone()]));
            }
            edges.push((u, v));
            preds[v.index()].push(u);
            succs[u.index()].push(v);
        }

        let topo = toposort(&self.nodes, &preds, &succs)?;

        let mut groups = Vec::with_capacity(self.groups.len());
        for (members, targets) in &self.groups {
            let mut g = InputGroup {
                members: Vec::with_capacity(members.len()),
                targets: Vec::with_capacity(targets.len()),
            };
            for m in members {
                g.members.push(
                    *index
                        .get(m)
                        .ok_or_else(|| DagError::UnknownEndpoint(m.clone()))?,
                );
            }
            for t in targets {
                let tid = *index
                    .get(t)
                    .ok_or_else(|| DagError::UnknownEndpoint(t.clone()))?;
                if g.members.contains(&tid) {
                    return Err(DagError::GroupOverlap(t.clone()));
                }
                g.targets.push(tid);
            }
            for &m in &g.members {
                for &t in &g.targets {
                    if !succs[m.index()].contains(&t) {
                        return Err(DagError::GroupMissingEdge {
                            member: self.nodes[m.index()].clone(),
                            target: self.nodes[t.index()].clone(),
                        });
                    }
                }
            }
            groups.push(g);
        }

        Ok(Dag {
            name: self.name,
            nodes: self.nodes,
            index,
            edges,
            preds,
            succs,
            groups,
            meta: self.meta,
            topo,
        })
    }
}

/// Kahn's algorithm; on failure extracts one concrete cycle via DFS.
fn toposort(
    names: &[String],
    preds: &[Vec<NodeId>],
    succs: &[Vec<NodeId>],
) -> Result<Vec<NodeId>, DagError> {
    let n = names.len();
    let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut queue: Vec<NodeId> = (0..n as u32)
        .map(NodeId)
        .filter(|v| indeg[v.index()] == 0)
        .collect();
    let mut order = Vec::with_capacity(n);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        order.push(u);
        for &v in &succs[u.index()] {
            indeg[v.index()] -= 1;
            if indeg[v.index()] == 0 {
                queue.push(v);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Some node is on a cycle: walk predecessors among the leftover nodes
    // until a repeat shows up.
    let leftover: Vec<bool> = {
        let mut inside = vec![true; n];
        for v in &order {
            inside[v.index()] = false;
        }
        inside
    };
    let start = (0..n).find(|&i| leftover[i]).expect("cycle exists");
    let mut path = vec![start];
    let mut seen = vec![usize::MAX; n];
    seen[start] = 0;
    let mut cur = start;
    loop {
        let next = preds[cur]
            .iter()
            .map(|p| p.index())
            .find(|&p| leftover[p])
            .expect("cyclic node keeps a cyclic predecessor");
        if seen[next] != usize::MAX {
            let mut cycle: Vec<String> = path[seen[next]..]
                .iter()
                .map(|&i| names[i].clone())
                .collect();
            // the walk followed predecessors; reverse to edge direction and
            // close the loop
            cycle.reverse();
            cycle.push(cycle[0].clone());
            return Err(DagError::CycleDetected(cycle));
        }
        seen[next] = path.len();
        path.push(next);
        cur = next;
    }
}

impl Dag {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn preds(&self, v: NodeId) -> &[NodeId] {
        &self.preds[v.index()]
    }

    pub fn succs(&self, v: NodeId) -> &[NodeId] {
        &self.succs[v.index()]
    }

    pub fn indegree(&self, v: NodeId) -> usize {
        self.preds[v.index()].len()
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.preds[v.index()].is_empty()
    }

    pub fn is_sink(&self, v: NodeId) -> bool {
        self.succs[v.index()].is_empty()
    }

    pub fn sources(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&v| self.is_source(v)).collect()
    }

    pub fn sinks(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&v| self.is_sink(v)).collect()
    }

    /// Nodes in a topological order (inputs before outputs).
    pub fn topo_order(&self) -> &[NodeId] {
        &self.topo
    }

    pub fn groups(&self) -> &[InputGroup] {
        &self.groups
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    /// Largest indegree over all nodes; 0 for an edgeless DAG.
    pub fn max_indegree(&self) -> usize {
        self.preds.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Minimum red-pebble count admitting any valid pebbling: one pebble for
    /// the node being computed plus one per input.
    pub fn feasibility_threshold(&self) -> usize {
        self.max_indegree() + 1
    }

    /// Rebuild a builder seeded with this DAG's content. Used by the graph
    /// transforms, which produce fresh validated values.
    pub fn to_builder(&self) -> DagBuilder {
        DagBuilder {
            name: self.name.clone(),
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| (self.nodes[u.index()].clone(), self.nodes[v.index()].clone()))
                .collect(),
            groups: self
                .groups
                .iter()
                .map(|g| {
                    (
                        g.members
                            .iter()
                            .map(|&m| self.nodes[m.index()].clone())
                            .collect(),
                        g.targets
                            .iter()
                            .map(|&t| self.nodes[t.index()].clone())
                            .collect(),
                    )
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GroupJson {
    members: Vec<String>,
    targets: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DagJson {
    #[serde(default)]
    name: String,
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<GroupJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<BTreeMap<String, String>>,
}

/// Parse the JSON DAG format and validate every invariant.
pub fn parse_dag(text: &str) -> Result<Dag, DagError> {
    let raw: DagJson =
        serde_json::from_str(text).map_err(|e| DagError::BadFormat(e.to_string()))?;
    let mut b = DagBuilder::new(raw.name);
    for v in raw.nodes {
        b.node(v);
    }
    for (u, v) in raw.edges {
        b.edge(u, v);
    }
    for g in raw.groups.unwrap_or_default() {
        b.group(g.members, g.targets);
    }
    for (k, v) in raw.meta.unwrap_or_default() {
        b.meta(k, v);
    }
    b.build()
}

/// Serialize to the JSON wire format. Nodes and edges appear in insertion
/// order, so serialize/parse round-trips are identities and output is
/// deterministic.
pub fn serialize_dag(dag: &Dag) -> String {
    let raw = DagJson {
        name: dag.name.clone(),
        nodes: dag.nodes.clone(),
        edges: dag
            .edges
            .iter()
            .map(|&(u, v)| (dag.nodes[u.index()].clone(), dag.nodes[v.index()].clone()))
            .collect(),
        groups: if dag.groups.is_empty() {
            None
        } else {
            Some(
                dag.groups
                    .iter()
                    .map(|g| GroupJson {
                        members: g.members.iter().map(|&m| dag.nodes[m.index()].clone()).collect(),
                        targets: g.targets.iter().map(|&t| dag.nodes[t.index()].clone()).collect(),
                    })
                    .collect(),
            )
        },
        meta: if dag.meta.is_empty() {
            None
        } else {
            Some(dag.meta.clone())
        },
    };
    serde_json::to_string(&raw).expect("dag serialization cannot fail")
}

/// Convenience: a chain `v1 -> v2 -> ... -> vn`.
pub fn chain(names: &[&str]) -> Dag {
    let mut b = DagBuilder::new("chain");
    for v in names {
        b.node(*v);
    }
    for w in names.windows(2) {
        b.edge(w[0], w[1]);
    }
    b.build().expect("chain is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_dag_parses() {
        let d = parse_dag(r#"{"nodes":["a"],"edges":[]}"#).unwrap();
        assert_eq!(d.node_count(), 1);
        assert_eq!(d.edge_count(), 0);
        assert_eq!(d.max_indegree(), 0);
        assert_eq!(d.feasibility_threshold(), 1);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = parse_dag(r#"{"nodes":["a","b"],"edges":[["a","b"],["b","a"]]}"#).unwrap_err();
        assert!(matches!(err, DagError::CycleDetected(_)));
    }

    #[test]
    fn chain_stats() {
        let d = chain(&["a", "b", "c"]);
        assert_eq!(d.max_indegree(), 1);
        assert_eq!(d.feasibility_threshold(), 2);
        assert_eq!(d.sources(), vec![d.node_id("a").unwrap()]);
        assert_eq!(d.sinks(), vec![d.node_id("c").unwrap()]);
    }

    #[test]
    fn inward_star_indegree() {
        let mut b = DagBuilder::new("star");
        b.node("center");
        for leaf in ["l1", "l2", "l3", "l4"] {
            b.node(leaf);
            b.edge(leaf, "center");
        }
        let d = b.build().unwrap();
        assert_eq!(d.max_indegree(), 4);
    }

    #[test]
    fn duplicate_edge_is_a_hard_error() {
        let err =
            parse_dag(r#"{"nodes":["a","b"],"edges":[["a","b"],["a","b"]]}"#).unwrap_err();
        assert_eq!(err, DagError::DuplicateEdge("a".into(), "b".into()));
    }

    #[test]
    fn duplicate_node_rejected() {
        let err = parse_dag(r#"{"nodes":["a","a"],"edges":[]}"#).unwrap_err();
        assert_eq!(err, DagError::DuplicateNode("a".into()));
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let err = parse_dag(r#"{"nodes":["a"],"edges":[["a","z"]]}"#).unwrap_err();
        assert_eq!(err, DagError::UnknownEndpoint("z".into()));
    }

    #[test]
    fn self_loop_reports_a_cycle() {
        let err = parse_dag(r#"{"nodes":["a"],"edges":[["a","a"]]}"#).unwrap_err();
        assert!(matches!(err, DagError::CycleDetected(_)));
    }

    #[test]
    fn longer_cycle_is_reported_with_witness() {
        let err = parse_dag(
            r#"{"nodes":["a","b","c","d"],"edges":[["a","b"],["b","c"],["c","a"],["a","d"]]}"#,
        )
        .unwrap_err();
        match err {
            DagError::CycleDetected(cycle) => {
                assert!(cycle.len() >= 3);
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn group_invariants_enforced() {
        let err = parse_dag(
            r#"{"nodes":["a","b","t"],"edges":[["a","t"]],
                "groups":[{"members":["a","b"],"targets":["t"]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DagError::GroupMissingEdge { .. }));

        let err = parse_dag(
            r#"{"nodes":["a","t"],"edges":[["a","t"]],
                "groups":[{"members":["a","t"],"targets":["t"]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DagError::GroupOverlap(_)));
    }

    #[test]
    fn serialize_parse_round_trip() {
        let src = r#"{"name":"g","nodes":["x","y","t"],"edges":[["x","t"],["y","t"]],
                      "groups":[{"members":["x","y"],"targets":["t"]}],"meta":{"k":"v"}}"#;
        let d1 = parse_dag(src).unwrap();
        let text = serialize_dag(&d1);
        let d2 = parse_dag(&text).unwrap();
        assert_eq!(serialize_dag(&d2), text);
        assert_eq!(d2.name(), "g");
        assert_eq!(d2.groups().len(), 1);
        assert_eq!(d2.meta().get("k").map(String::as_str), Some("v"));
    }

    #[test]
    fn topo_order_respects_edges() {
        let d = parse_dag(
            r#"{"nodes":["a","b","c","d"],"edges":[["a","c"],["b","c"],["c","d"]]}"#,
        )
        .unwrap();
        let pos: Vec<usize> = d
            .node_ids()
            .map(|v| d.topo_order().iter().position(|&x| x == v).unwrap())
            .collect();
        for &(u, v) in d.edges() {
            assert!(pos[u.index()] < pos[v.index()]);
        }
    }
}
