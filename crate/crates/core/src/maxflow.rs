//! Residual networks and an instrumented Edmonds-Karp max-flow solver.
//!
//! The solver can start from any feasible conserving flow, which is what
//! warm-starting needs, and it counts its work (arcs scanned during
//! breadth-first searches) so that callers can interleave it with other
//! solvers under a work budget.
//!
//! Residual capacity between two nodes is `(c(u,v) - f(u,v)) + f(v,u)`,
//! where a missing edge has capacity and flow zero. Because networks are
//! multigraphs, parallel same-direction edges are merged internally by
//! capacity summation; when a solution is read back, each merged flow is
//! split greedily over its member edges in ascending edge-index order (any
//! split respecting member capacities is equivalent).

use std::collections::VecDeque;

use crate::graph::{add, sub, FlowAssignment, FlowError, FlowNetwork};

/// Work and outcome counters for one solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Number of augmenting paths applied.
    pub augmentation_count: u64,
    /// Total value gained, equal to final value minus start value.
    pub units_pushed: i64,
    /// Arcs examined during breadth-first searches; the unit of solver work.
    pub arcs_scanned: u64,
}

/// One merged edge of the internal multigraph-free view: parallel edges
/// `tail -> head` collapsed into a single capacity with their original
/// indices remembered for read-back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedEdgeInfo {
    pub tail: usize,
    pub head: usize,
    pub capacity: i64,
    pub flow: i64,
    /// Original edge indices merged here, ascending.
    pub members: Vec<usize>,
}

/// Which merged edge a residual arc belongs to, and in which direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcProvenance {
    /// Unused capacity of the merged edge with this index.
    ForwardOf(usize),
    /// Undoable flow on the merged edge with this index.
    BackwardOf(usize),
}

/// A single residual arc with nonnegative capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualArc {
    pub tail: usize,
    pub head: usize,
    pub capacity: i64,
    pub provenance: ArcProvenance,
}

/// Snapshot of the residual network of a feasible conserving flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualNetwork {
    node_count: usize,
    source: usize,
    sink: usize,
    arcs: Vec<ResidualArc>,
    merged: Vec<MergedEdgeInfo>,
}

impl ResidualNetwork {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// All residual arcs, one forward and one backward per merged edge.
    pub fn arcs(&self) -> &[ResidualArc] {
        &self.arcs
    }

    /// The merged view of the original edges; [`ArcProvenance`] indexes
    /// into this list.
    pub fn merged_edges(&self) -> &[MergedEdgeInfo] {
        &self.merged
    }

    /// Total residual capacity from `u` to `v`, summed over arcs.
    pub fn capacity_between(&self, u: usize, v: usize) -> i64 {
        self.arcs
            .iter()
            .filter(|a| a.tail == u && a.head == v)
            .fold(0, |acc, a| add(acc, a.capacity))
    }

    /// True when the sink is reachable from the source through arcs of
    /// positive residual capacity. A maximum flow admits no such path.
    pub fn has_augmenting_path(&self) -> bool {
        let mut adj = vec![Vec::new(); self.node_count];
        for arc in &self.arcs {
            if arc.capacity > 0 {
                adj[arc.tail].push(arc.head);
            }
        }
        let mut visited = vec![false; self.node_count];
        let mut queue = VecDeque::new();
        visited[self.source] = true;
        queue.push_back(self.source);
        while let Some(node) = queue.pop_front() {
            if node == self.sink {
                return true;
            }
            for &next in &adj[node] {
                if !visited[next] {
                    visited[next] = true;
                    queue.push_back(next);
                }
            }
        }
        false
    }
}

/// Builds the residual network of `f`, which must be feasible and
/// conserving.
pub fn residual(network: &FlowNetwork, f: &FlowAssignment) -> Result<ResidualNetwork, FlowError> {
    let g = MergedGraph::new(network, f)?;
    let mut arcs = Vec::with_capacity(g.edges.len() * 2);
    for (i, e) in g.edges.iter().enumerate() {
        arcs.push(ResidualArc {
            tail: e.tail,
            head: e.head,
            capacity: sub(e.capacity, e.flow),
            provenance: ArcProvenance::ForwardOf(i),
        });
        arcs.push(ResidualArc {
            tail: e.head,
            head: e.tail,
            capacity: e.flow,
            provenance: ArcProvenance::BackwardOf(i),
        });
    }
    let merged = g
        .edges
        .iter()
        .map(|e| MergedEdgeInfo {
            tail: e.tail,
            head: e.head,
            capacity: e.capacity,
            flow: e.flow,
            members: e.members.iter().map(|&(idx, _)| idx).collect(),
        })
        .collect();
    Ok(ResidualNetwork {
        node_count: g.node_count,
        source: g.source,
        sink: g.sink,
        arcs,
        merged,
    })
}

/// Runs Edmonds-Karp from `start` (zero flow for a cold start) to a maximum
/// flow. `start` must be feasible and conserving.
pub fn max_flow_from(
    network: &FlowNetwork,
    start: &FlowAssignment,
) -> Result<(FlowAssignment, SolveStats), FlowError> {
    let mut machine = EkMachine::new(network, start)?;
    machine.run();
    Ok((machine.flow(), machine.stats()))
}

/// Minimum s-t cut capacity by enumerating all `2^(n-2)` bipartitions.
/// Intended as an oracle for tiny instances; refuses more than 22 nodes.
pub fn min_cut_value_bruteforce(network: &FlowNetwork) -> Result<i64, FlowError> {
    const LIMIT: usize = 22;
    let n = network.node_count();
    if n > LIMIT {
        return Err(FlowError::TooLarge {
            what: "node count",
            size: n,
            limit: LIMIT,
        });
    }
    let source = network.source();
    let sink = network.sink();
    let interior: Vec<usize> = (0..n).filter(|&v| v != source && v != sink).collect();
    let mut side = vec![false; n];
    side[source] = true;
    let mut best = i64::MAX;
    for mask in 0u64..(1u64 << interior.len()) {
        for (bit, &v) in interior.iter().enumerate() {
            side[v] = mask >> bit & 1 == 1;
        }
        let mut cut = 0i64;
        for (e, &(u, v)) in network.edges().iter().enumerate() {
            if side[u] && !side[v] {
                cut = add(cut, network.capacity(e));
            }
        }
        best = best.min(cut);
    }
    Ok(best)
}

/// One direction of travel over a merged edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Arc {
    pub edge: usize,
    pub forward: bool,
    pub head: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct MergedEdge {
    pub tail: usize,
    pub head: usize,
    pub capacity: i64,
    pub flow: i64,
    /// (original edge index, original capacity), ascending by index.
    pub members: Vec<(usize, i64)>,
}

/// Multigraph collapsed to at most one edge per ordered node pair, with
/// adjacency lists sorted for deterministic breadth-first expansion.
#[derive(Debug, Clone)]
pub(crate) struct MergedGraph {
    pub node_count: usize,
    pub source: usize,
    pub sink: usize,
    pub edges: Vec<MergedEdge>,
    pub adj: Vec<Vec<Arc>>,
}

impl MergedGraph {
    /// Validates that `f` is feasible and conserving, then merges.
    pub fn new(network: &FlowNetwork, f: &FlowAssignment) -> Result<Self, FlowError> {
        network.check_feasible(f)?;
        if !network.is_conserving(f)? {
            return Err(FlowError::NotConserving);
        }
        let mut index_of = std::collections::HashMap::new();
        let mut edges: Vec<MergedEdge> = Vec::new();
        for (e, &(u, v)) in network.edges().iter().enumerate() {
            let cap = network.capacity(e);
            let i = *index_of.entry((u, v)).or_insert_with(|| {
                edges.push(MergedEdge {
                    tail: u,
                    head: v,
                    capacity: 0,
                    flow: 0,
                    members: Vec::new(),
                });
                edges.len() - 1
            });
            edges[i].capacity = add(edges[i].capacity, cap);
            edges[i].flow = add(edges[i].flow, f.value(e));
            edges[i].members.push((e, cap));
        }
        let mut adj = vec![Vec::new(); network.node_count()];
        for (i, e) in edges.iter().enumerate() {
            adj[e.tail].push(Arc {
                edge: i,
                forward: true,
                head: e.head,
            });
            adj[e.head].push(Arc {
                edge: i,
                forward: false,
                head: e.tail,
            });
        }
        for list in &mut adj {
            list.sort_by_key(|a| (a.head, a.edge, !a.forward));
        }
        Ok(MergedGraph {
            node_count: network.node_count(),
            source: network.source(),
            sink: network.sink(),
            edges,
            adj,
        })
    }

    pub fn residual_capacity(&self, arc: Arc) -> i64 {
        let e = &self.edges[arc.edge];
        if arc.forward {
            sub(e.capacity, e.flow)
        } else {
            e.flow
        }
    }

    pub fn apply(&mut self, arc: Arc, amount: i64) {
        let e = &mut self.edges[arc.edge];
        if arc.forward {
            e.flow = add(e.flow, amount);
        } else {
            e.flow = sub(e.flow, amount);
        }
        debug_assert!(e.flow >= 0 && e.flow <= e.capacity);
    }

    /// Splits merged flows back onto original edges, greedily in ascending
    /// edge-index order.
    pub fn unmerge(&self, edge_count: usize) -> FlowAssignment {
        let mut values = vec![0i64; edge_count];
        for e in &self.edges {
            let mut left = e.flow;
            for &(idx, cap) in &e.members {
                let give = left.min(cap);
                values[idx] = give;
                left -= give;
            }
            debug_assert_eq!(left, 0);
        }
        FlowAssignment::new(values).expect("unmerged flows are nonnegative")
    }
}

/// Resumable Edmonds-Karp. Work is metered in arcs scanned during
/// breadth-first search; [`EkMachine::advance`] runs until that budget is
/// exhausted or the flow is maximum, so two machines can be interleaved
/// fairly.
#[derive(Debug, Clone)]
pub(crate) struct EkMachine {
    g: MergedGraph,
    original_edges: usize,
    stats: SolveStats,
    bfs: BfsState,
    done: bool,
}

#[derive(Debug, Clone)]
struct BfsState {
    active: bool,
    queue: VecDeque<usize>,
    visited: Vec<bool>,
    parent: Vec<Option<(usize, Arc)>>,
    cursor: Option<(usize, usize)>,
}

impl EkMachine {
    pub fn new(network: &FlowNetwork, start: &FlowAssignment) -> Result<Self, FlowError> {
        let g = MergedGraph::new(network, start)?;
        let n = g.node_count;
        Ok(EkMachine {
            g,
            original_edges: network.edge_count(),
            stats: SolveStats::default(),
            bfs: BfsState {
                active: false,
                queue: VecDeque::new(),
                visited: vec![false; n],
                parent: vec![None; n],
                cursor: None,
            },
            done: false,
        })
    }

    /// Works until done (returns true) or the budget runs out (returns
    /// false). The budget is decremented once per arc scanned.
    pub fn advance(&mut self, budget: &mut u64) -> bool {
        while !self.done {
            if !self.bfs.active {
                self.begin_bfs();
            }
            let (node, pos) = match self.bfs.cursor {
                Some(at) => at,
                None => match self.bfs.queue.pop_front() {
                    Some(node) => (node, 0),
                    None => {
                        self.done = true;
                        self.bfs.active = false;
                        continue;
                    }
                },
            };
            if pos >= self.g.adj[node].len() {
                self.bfs.cursor = None;
                continue;
            }
            if *budget == 0 {
                self.bfs.cursor = Some((node, pos));
                return false;
            }
            *budget -= 1;
            self.stats.arcs_scanned += 1;
            self.bfs.cursor = Some((node, pos + 1));
            let arc = self.g.adj[node][pos];
            if self.g.residual_capacity(arc) > 0 && !self.bfs.visited[arc.head] {
                self.bfs.visited[arc.head] = true;
                self.bfs.parent[arc.head] = Some((node, arc));
                if arc.head == self.g.sink {
                    self.augment();
                    self.bfs.active = false;
                    self.bfs.cursor = None;
                } else {
                    self.bfs.queue.push_back(arc.head);
                }
            }
        }
        true
    }

    pub fn run(&mut self) {
        let mut unlimited = u64::MAX;
        while !self.advance(&mut unlimited) {}
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Current flow on the original edges.
    pub fn flow(&self) -> FlowAssignment {
        self.g.unmerge(self.original_edges)
    }

    fn begin_bfs(&mut self) {
        self.bfs.visited.fill(false);
        self.bfs.parent.fill(None);
        self.bfs.queue.clear();
        self.bfs.visited[self.g.source] = true;
        self.bfs.queue.push_back(self.g.source);
        self.bfs.cursor = None;
        self.bfs.active = true;
    }

    fn augment(&mut self) {
        let mut path = Vec::new();
        let mut node = self.g.sink;
        while node != self.g.source {
            let (tail, arc) = self.bfs.parent[node].expect("augmenting path is parent-linked");
            path.push(arc);
            node = tail;
        }
        let bottleneck = path
            .iter()
            .map(|&a| self.g.residual_capacity(a))
            .min()
            .expect("augmenting path is nonempty");
        debug_assert!(bottleneck > 0);
        for &a in &path {
            self.g.apply(a, bottleneck);
        }
        self.stats.augmentation_count += 1;
        self.stats.units_pushed = add(self.stats.units_pushed, bottleneck);
    }
}
