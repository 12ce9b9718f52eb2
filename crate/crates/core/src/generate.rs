//! Instance generators: the alternating-chain tradeoff DAG and the grid of
//! input groups that defeats greedy scheduling.

use crate::dag::{Dag, DagBuilder, DagError};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("tradeoff DAG needs d >= 1 and m >= 2, got d={d}, m={m}")]
    BadTradeoffParams { d: usize, m: usize },
    #[error("grid needs l >= 2, got {0}")]
    GridTooSmall(usize),
    #[error(
        "grid extras do not fit: k = {k}, k' = {k_prime} leaves {slack} slots per group, \
         need at least 2 (dependency target + one misguidance node)"
    )]
    ParamsTooTight {
        k: usize,
        k_prime: usize,
        slack: usize,
    },
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Two control groups of `d` sources and a chain of `m` nodes; chain node
/// `c<i>` depends on its predecessor and on group A (odd `i`) or group B
/// (even `i`). The first chain node takes group A only, which keeps the
/// largest indegree at exactly `d + 1`.
pub fn gen_tradeoff_dag(d: usize, m: usize) -> Result<Dag, GenerateError> {
    if d < 1 || m < 2 {
        return Err(GenerateError::BadTradeoffParams { d, m });
    }
    let mut b = DagBuilder::new(format!("tradeoff.d{d}.m{m}"));
    let a_group: Vec<String> = (1..=d).map(|i| format!("a{i}")).collect();
    let b_group: Vec<String> = (1..=d).map(|i| format!("b{i}")).collect();
    for v in a_group.iter().chain(b_group.iter()) {
        b.node(v.clone());
    }
    for i in 1..=m {
        b.node(format!("c{i}"));
    }
    for i in 1..=m {
        let chain_node = format!("c{i}");
        if i > 1 {
            b.edge(format!("c{}", i - 1), chain_node.clone());
        }
        let control = if i % 2 == 1 { &a_group } else { &b_group };
        for v in control {
            b.edge(v.clone(), chain_node.clone());
        }
    }
    b.meta("feasibility_threshold", (d + 2).to_string());
    b.meta("d", d.to_string());
    b.meta("m", m.to_string());
    Ok(b.build()?)
}

/// Grid label of one input group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridGroup {
    Entry,
    /// (column, row), 1-based, column + row <= l + 1
    At(usize, usize),
}

impl GridGroup {
    pub fn label(&self) -> String {
        match self {
            GridGroup::Entry => "S0".to_string(),
            GridGroup::At(i, j) => format!("{i},{j}"),
        }
    }
}

/// Description of a generated grid instance: the DAG plus the group layout.
#[derive(Debug, Clone)]
pub struct GridInstance {
    pub dag: Dag,
    pub l: usize,
    pub k: usize,
    pub k_prime: usize,
    /// red-pebble budget the construction is designed for (`k + 1`)
    pub r: usize,
    /// label of every annotated group, indexed like `dag.groups()`
    pub layout: Vec<GridGroup>,
}

impl GridInstance {
    pub fn group_index(&self, g: GridGroup) -> usize {
        self.layout.iter().position(|&x| x == g).expect("group exists")
    }

    /// The schedule a clairvoyant scheduler follows: entry group first, then
    /// every anti-diagonal from its bottom node upward.
    pub fn canonical_diagonal_order(&self) -> Vec<usize> {
        let mut order = vec![self.group_index(GridGroup::Entry)];
        for i in 1..=self.l {
            for d in 0..i {
                order.push(self.group_index(GridGroup::At(i - d, 1 + d)));
            }
        }
        order
    }
}

/// Grid of input groups that misleads greedy scheduling into sweeping
/// columns right to left, revisiting every diagonal's common nodes over and
/// over.
///
/// Layout: groups sit at `(i, j)` with `1 <= i, j` and `i + j <= l + 1`.
/// Groups on one anti-diagonal share `k'` common source nodes. The target
/// of `(i, j)` is a member of `(i, j + 1)`, forcing bottom-up visits within
/// a column. Misguidance nodes are shared between the top group of column
/// `j` and the bottom group of column `j - 1`; the entry group shares a few
/// nodes with `(l, 1)` so the sweep starts at the rightmost column. All
/// groups are padded to exactly `k` members and the construction expects a
/// budget of `k + 1` red pebbles.
pub fn gen_greedy_grid(l: usize, k: usize, k_prime: usize) -> Result<GridInstance, GenerateError> {
    if l < 2 {
        return Err(GenerateError::GridTooSmall(l));
    }
    // per-group extras: 1 dependency target + c1 misguidance (+ c2 column
    // nodes); sized to the available slack, preferring misguidance
    let slack = k.saturating_sub(k_prime + 1);
    if k_prime < 1 || slack < 1 {
        return Err(GenerateError::ParamsTooTight {
            k,
            k_prime,
            slack,
        });
    }
    let c1 = slack.min(3);
    let c2 = (slack - c1).min(2);
    let c3 = c1.min(1);

    let mut b = DagBuilder::new(format!("grid.l{l}.k{k}.kp{k_prime}"));

    // shared source pools
    let commons: Vec<Vec<String>> = (2..=l + 1)
        .map(|x| {
            (1..=k_prime)
                .map(|i| format!("dg.{x}.{i}"))
                .collect::<Vec<_>>()
        })
        .collect();
    for pool in &commons {
        for v in pool {
            b.node(v.clone());
        }
    }
    let misguide: Vec<Vec<String>> = (2..=l)
        .map(|j| (1..=c1).map(|i| format!("mg.{j}.{i}")).collect::<Vec<_>>())
        .collect();
    for pool in &misguide {
        for v in pool {
            b.node(v.clone());
        }
    }
    let column_shared: Vec<Vec<String>> = (1..=l)
        .map(|i| (1..=c2).map(|c| format!("cs.{i}.{c}")).collect::<Vec<_>>())
        .collect();
    for pool in &column_shared {
        for v in pool {
            b.node(v.clone());
        }
    }

    // targets
    for i in 1..=l {
        b.node(format!("t.s0.{i}"));
        for j in 1..=(l + 1 - i) {
            b.node(format!("t.{i}.{j}"));
        }
    }

    let mut groups: Vec<(Vec<String>, Vec<String>, GridGroup)> = Vec::new();

    // entry group: the first c3 misguidance nodes of column l plus fillers
    let mut s0_members: Vec<String> = misguide[l - 2][..c3].to_vec();
    for i in 1..=(k - c3) {
        let f = format!("s0m.{i}");
        b.node(f.clone());
        s0_members.push(f);
    }
    let s0_targets: Vec<String> = (1..=l).map(|i| format!("t.s0.{i}")).collect();
    groups.push((s0_members, s0_targets, GridGroup::Entry));

    for i in 1..=l {
        for j in 1..=(l + 1 - i) {
            let mut members = commons[i + j - 2].clone();
            // dependency on the group below (or on the entry group)
            members.push(if j == 1 {
                format!("t.s0.{i}")
            } else {
                format!("t.{i}.{}", j - 1)
            });
            // misguidance: top of column i pulls toward column i - 1
            if i >= 2 && j == l + 1 - i {
                members.extend(misguide[i - 2].iter().cloned());
            }
            // bottom of column i is pulled from column i + 1
            if j == 1 && i + 1 <= l {
                members.extend(misguide[i - 1].iter().cloned());
            }
            members.extend(column_shared[i - 1].iter().cloned());
            let mut fill = 0;
            while members.len() < k {
                fill += 1;
                let f = format!("fl.{i}.{j}.{fill}");
                b.node(f.clone());
                members.push(f);
            }
            assert_eq!(members.len(), k, "group ({i},{j}) accounting is exact");
            groups.push((members, vec![format!("t.{i}.{j}")], GridGroup::At(i, j)));
        }
    }

    let mut layout = Vec::with_capacity(groups.len());
    for (members, targets, label) in &groups {
        for m in members {
            for t in targets {
                b.edge(m.clone(), t.clone());
            }
        }
        layout.push(*label);
    }
    for (members, targets, _) in &groups {
        b.group(members.clone(), targets.clone());
    }
    b.meta("feasibility_threshold", (k + 1).to_string());
    b.meta("l", l.to_string());
    b.meta("k", k.to_string());
    b.meta("kprime", k_prime.to_string());

    Ok(GridInstance {
        dag: b.build()?,
        l,
        k,
        k_prime,
        r: k + 1,
        layout,
    })
}
