//! Flow networks, flow assignments, and path/cycle decompositions.
//!
//! A [`FlowNetwork`] is a directed multigraph with integer edge capacities
//! and two distinguished nodes. A [`FlowAssignment`] is a nonnegative value
//! per edge; it may violate capacities (predictions usually do) but most
//! operations require it to conserve flow at every node other than the
//! source and sink.

use thiserror::Error;

/// Errors reported by the core flow types and algorithms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("source and sink must be distinct nodes")]
    SourceEqualsSink,
    #[error("node {node} out of range for {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("edge {edge} is a self-loop")]
    SelfLoop { edge: usize },
    #[error("edge {edge} has negative capacity")]
    NegativeCapacity { edge: usize },
    #[error("expected {expected} per-edge values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("flow value at index {index} is negative")]
    NegativeFlow { index: usize },
    #[error("flow does not conserve at some node other than source and sink")]
    NotConserving,
    #[error("flow exceeds capacity on edge {edge}")]
    Infeasible { edge: usize },
    #[error("instance too large for exhaustive search: {what} is {size}, limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("sample multiset is empty")]
    EmptySamples,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub(crate) fn add(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("flow arithmetic overflowed i64")
}

pub(crate) fn sub(a: i64, b: i64) -> i64 {
    a.checked_sub(b).expect("flow arithmetic overflowed i64")
}

pub(crate) fn mul(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("flow arithmetic overflowed i64")
}

/// A directed multigraph with integer capacities, a source, and a sink.
///
/// Nodes are `0..node_count`. Edges are stored in insertion order and
/// referred to by index everywhere (flows, decompositions, file formats).
/// Parallel edges and antiparallel pairs are allowed; self-loops are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    capacities: Vec<i64>,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    /// Validates and builds a network. Capacities must be nonnegative and
    /// aligned with `edges`; `source` and `sink` must be distinct in-range
    /// nodes; self-loops are rejected.
    pub fn new(
        node_count: usize,
        edges: Vec<(usize, usize)>,
        capacities: Vec<i64>,
        source: usize,
        sink: usize,
    ) -> Result<Self, FlowError> {
        if source == sink {
            return Err(FlowError::SourceEqualsSink);
        }
        for &node in &[source, sink] {
            if node >= node_count {
                return Err(FlowError::NodeOutOfRange {
                    node,
                    count: node_count,
                });
            }
        }
        if edges.len() != capacities.len() {
            return Err(FlowError::LengthMismatch {
                expected: edges.len(),
                actual: capacities.len(),
            });
        }
        for (edge, &(u, v)) in edges.iter().enumerate() {
            for &node in &[u, v] {
                if node >= node_count {
                    return Err(FlowError::NodeOutOfRange {
                        node,
                        count: node_count,
                    });
                }
            }
            if u == v {
                return Err(FlowError::SelfLoop { edge });
            }
            if capacities[edge] < 0 {
                return Err(FlowError::NegativeCapacity { edge });
            }
        }
        Ok(FlowNetwork {
            node_count,
            edges,
            capacities,
            source,
            sink,
        })
    }

    /// Same topology, new capacities. Used to instantiate sampled capacity
    /// vectors on a fixed graph.
    pub fn with_capacities(&self, capacities: Vec<i64>) -> Result<Self, FlowError> {
        FlowNetwork::new(
            self.node_count,
            self.edges.clone(),
            capacities,
            self.source,
            self.sink,
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Tail and head of edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn capacities(&self) -> &[i64] {
        &self.capacities
    }

    pub fn capacity(&self, e: usize) -> i64 {
        self.capacities[e]
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Out-edge indices per node, ascending by edge index.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count];
        for (e, &(u, _)) in self.edges.iter().enumerate() {
            out[u].push(e);
        }
        out
    }

    /// In-edge indices per node, ascending by edge index.
    pub fn in_edges(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.node_count];
        for (e, &(_, v)) in self.edges.iter().enumerate() {
            inc[v].push(e);
        }
        inc
    }

    fn check_len(&self, f: &FlowAssignment) -> Result<(), FlowError> {
        if f.len() != self.edges.len() {
            return Err(FlowError::LengthMismatch {
                expected: self.edges.len(),
                actual: f.len(),
            });
        }
        Ok(())
    }

    /// Net inflow minus outflow per node under `f`.
    pub fn node_balances(&self, f: &FlowAssignment) -> Result<Vec<i64>, FlowError> {
        self.check_len(f)?;
        let mut balance = vec![0i64; self.node_count];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let x = f.value(e);
            balance[u] = sub(balance[u], x);
            balance[v] = add(balance[v], x);
        }
        Ok(balance)
    }

    /// True when inflow equals outflow at every node except source and sink.
    pub fn is_conserving(&self, f: &FlowAssignment) -> Result<bool, FlowError> {
        let balance = self.node_balances(f)?;
        Ok(balance
            .iter()
            .enumerate()
            .all(|(node, &b)| node == self.source || node == self.sink || b == 0))
    }

    /// Value of `f`: net outflow of the source (outflow minus inflow).
    pub fn flow_value(&self, f: &FlowAssignment) -> Result<i64, FlowError> {
        let balance = self.node_balances(f)?;
        Ok(-balance[self.source])
    }

    /// Total capacity violation: sum over edges of `max(f(e) - c(e), 0)`.
    pub fn violation_delta(&self, f: &FlowAssignment) -> Result<i64, FlowError> {
        self.check_len(f)?;
        let mut delta = 0i64;
        for e in 0..self.edges.len() {
            let over = sub(f.value(e), self.capacities[e]);
            if over > 0 {
                delta = add(delta, over);
            }
        }
        Ok(delta)
    }

    /// True when `f(e) <= c(e)` on every edge.
    pub fn is_feasible(&self, f: &FlowAssignment) -> Result<bool, FlowError> {
        Ok(self.violation_delta(f)? == 0)
    }

    /// Checks `f` against capacities edge by edge, reporting the first
    /// offending edge.
    pub fn check_feasible(&self, f: &FlowAssignment) -> Result<(), FlowError> {
        self.check_len(f)?;
        for e in 0..self.edges.len() {
            if f.value(e) > self.capacities[e] {
                return Err(FlowError::Infeasible { edge: e });
            }
        }
        Ok(())
    }

    /// Decomposes a conserving flow into weighted source-sink paths plus
    /// weighted cycles whose edge multisets reproduce `f` exactly.
    ///
    /// Paths are peeled first, each carrying as much as its bottleneck
    /// allows without exceeding the remaining flow value, then the leftover
    /// circulation is peeled into cycles. Both phases walk edges in
    /// ascending index order, so the decomposition is deterministic. The
    /// total number of members never exceeds the number of edges.
    ///
    /// Capacities play no role here; `f` may be infeasible.
    pub fn decompose(&self, f: &FlowAssignment) -> Result<FlowDecomposition, FlowError> {
        self.check_len(f)?;
        if !self.is_conserving(f)? {
            return Err(FlowError::NotConserving);
        }
        let out = self.out_edges();
        let mut rem: Vec<i64> = f.values().to_vec();
        let mut paths = Vec::new();
        let mut cycles = Vec::new();

        let mut value = self.flow_value(f)?;
        while value > 0 {
            let path = support_path(self, &out, &rem, self.source, self.sink)
                .expect("conserving flow with positive value must carry a source-sink path");
            let bottleneck = path.iter().map(|&e| rem[e]).min().unwrap();
            let amount = bottleneck.min(value);
            for &e in &path {
                rem[e] -= amount;
            }
            value -= amount;
            paths.push(DecompositionMember {
                edges: path,
                multiplicity: amount,
            });
        }

        while let Some(start) = rem.iter().position(|&r| r > 0) {
            let cycle = support_cycle(self, &out, &rem, start);
            let amount = cycle.iter().map(|&e| rem[e]).min().unwrap();
            for &e in &cycle {
                rem[e] -= amount;
            }
            cycles.push(DecompositionMember {
                edges: cycle,
                multiplicity: amount,
            });
        }

        debug_assert!(rem.iter().all(|&r| r == 0));
        Ok(FlowDecomposition { paths, cycles })
    }
}

/// Simple path from `from` to `to` through edges with positive remaining
/// flow, found by depth-first search trying smaller edge indices first.
fn support_path(
    net: &FlowNetwork,
    out: &[Vec<usize>],
    rem: &[i64],
    from: usize,
    to: usize,
) -> Option<Vec<usize>> {
    let mut visited = vec![false; net.node_count()];
    visited[from] = true;
    let mut frames: Vec<(usize, usize)> = vec![(from, 0)];
    let mut path: Vec<usize> = Vec::new();
    while let Some(&mut (node, ref mut cursor)) = frames.last_mut() {
        let list = &out[node];
        if *cursor >= list.len() {
            frames.pop();
            path.pop();
            continue;
        }
        let e = list[*cursor];
        *cursor += 1;
        let (_, head) = net.edge(e);
        if rem[e] <= 0 || visited[head] {
            continue;
        }
        path.push(e);
        if head == to {
            return Some(path);
        }
        visited[head] = true;
        frames.push((head, 0));
    }
    None
}

/// Cycle through edges with positive remaining flow, starting from the tail
/// of `start` and greedily following the smallest-index positive out-edge
/// until a node repeats. Requires the remaining flow to be a circulation.
fn support_cycle(net: &FlowNetwork, out: &[Vec<usize>], rem: &[i64], start: usize) -> Vec<usize> {
    let (origin, _) = net.edge(start);
    let mut stack_pos = vec![usize::MAX; net.node_count()];
    let mut node_stack = vec![origin];
    let mut edge_stack: Vec<usize> = Vec::new();
    stack_pos[origin] = 0;
    loop {
        let node = *node_stack.last().unwrap();
        let e = out[node]
            .iter()
            .copied()
            .find(|&e| rem[e] > 0)
            .expect("circulation walk cannot get stuck at a node with positive inflow");
        let (_, head) = net.edge(e);
        if stack_pos[head] != usize::MAX {
            let mut cycle = edge_stack.split_off(stack_pos[head]);
            cycle.push(e);
            return cycle;
        }
        stack_pos[head] = node_stack.len();
        node_stack.push(head);
        edge_stack.push(e);
    }
}

/// A nonnegative value per edge of some network, indexed like the network's
/// edge list. Capacity violations are allowed; negativity is not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    values: Vec<i64>,
}

impl FlowAssignment {
    /// Validates nonnegativity and wraps the values.
    pub fn new(values: Vec<i64>) -> Result<Self, FlowError> {
        if let Some(index) = values.iter().position(|&x| x < 0) {
            return Err(FlowError::NegativeFlow { index });
        }
        Ok(FlowAssignment { values })
    }

    /// The all-zero assignment on `edge_count` edges.
    pub fn zero(edge_count: usize) -> Self {
        FlowAssignment {
            values: vec![0; edge_count],
        }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value(&self, e: usize) -> i64 {
        self.values[e]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// L1 distance to another assignment on the same edge set. This is the
    /// prediction error metric when `other` is an optimum.
    pub fn l1_distance(&self, other: &FlowAssignment) -> Result<i64, FlowError> {
        if self.len() != other.len() {
            return Err(FlowError::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let mut total = 0i64;
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            total = add(total, sub(*a, *b).abs());
        }
        Ok(total)
    }

    /// Sum of all edge values.
    pub fn l1_norm(&self) -> i64 {
        self.values.iter().fold(0i64, |acc, &x| add(acc, x))
    }
}

/// One weighted path or cycle of a decomposition: edge indices in traversal
/// order, each carrying `multiplicity` units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionMember {
    pub edges: Vec<usize>,
    pub multiplicity: i64,
}

/// Result of [`FlowNetwork::decompose`]: source-sink paths plus cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowDecomposition {
    pub paths: Vec<DecompositionMember>,
    pub cycles: Vec<DecompositionMember>,
}

impl FlowDecomposition {
    pub fn member_count(&self) -> usize {
        self.paths.len() + self.cycles.len()
    }

    /// Re-sums the members into a per-edge assignment.
    pub fn reconstruct(&self, edge_count: usize) -> FlowAssignment {
        let mut values = vec![0i64; edge_count];
        for member in self.paths.iter().chain(self.cycles.iter()) {
            for &e in &member.edges {
                values[e] = add(values[e], member.multiplicity);
            }
        }
        FlowAssignment { values }
    }
}
