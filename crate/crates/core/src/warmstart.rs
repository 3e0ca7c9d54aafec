//! Warm-started maximum flow: feasibility repair, residual augmentation,
//! and a robustness race against a cold solver.
//!
//! A prediction is a conserving flow that may exceed capacities. Step 1
//! repairs it into a feasible flow, losing at most δ (the total capacity
//! violation) of value; step 2 augments the repaired flow to a maximum
//! flow. Two interchangeable repair variants are provided: direct
//! cancellation along cycles and paths through violating edges, and a
//! reduction to one auxiliary max-flow on a reversed graph.
//!
//! All stages are metered in the same work unit as the solver (arcs
//! scanned), so [`robust_race`] can interleave the warm pipeline with a
//! cold solve in fixed quanta and stop at the first finisher, paying at
//! most twice the better of the two plus one quantum.

use crate::graph::{add, sub, FlowAssignment, FlowError, FlowNetwork};
use crate::maxflow::{EkMachine, SolveStats};

/// How step 1 turns an infeasible prediction into a feasible flow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RepairVariant {
    /// Cancel flow along cycles or source-sink paths through violating
    /// edges, found by depth-first search on the positive-flow support.
    #[default]
    Cancel,
    /// Solve one auxiliary max-flow on the reversed graph and subtract the
    /// implied cancellation flow.
    Circulation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WarmStartOptions {
    pub variant: RepairVariant,
    /// Cancel one unit per located cycle/path instead of the full
    /// bottleneck. Slower, but mirrors the one-unit-per-round analysis
    /// exactly. Only affects [`RepairVariant::Cancel`].
    pub strict_units: bool,
}

/// What step 1 did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairReport {
    /// Total capacity violation of the prediction.
    pub delta: i64,
    /// Cancellation rounds (cycles/paths located, or auxiliary
    /// augmentations for the circulation variant). Never exceeds delta.
    pub rounds: u64,
    /// Total flow units removed, summed over edges. May exceed delta:
    /// cancelling along a long cycle removes one unit from many edges.
    pub cancelled_units: i64,
    pub value_before: i64,
    pub value_after: i64,
    /// Value of the auxiliary max-flow (circulation variant only); always
    /// equals delta.
    pub aux_value: Option<i64>,
    /// Arc scans and edge checks spent, in solver work units.
    pub work: u64,
}

/// Full report of a warm-started solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarmStartReport {
    pub variant: RepairVariant,
    pub delta: i64,
    pub repair_rounds: u64,
    pub repair_units: i64,
    pub repair_work: u64,
    pub value_before_repair: i64,
    pub value_after_repair: i64,
    pub final_value: i64,
    pub step2_stats: SolveStats,
    pub aux_value: Option<i64>,
    /// L1 distance from the prediction to the optimum this solve returned.
    pub eta_vs: Option<i64>,
}

impl WarmStartReport {
    /// Total metered work of both steps.
    pub fn total_work(&self) -> u64 {
        self.repair_work + self.step2_stats.arcs_scanned
    }
}

/// Repairs a prediction by cycle/path cancellation. The returned flow is
/// feasible and conserving, and loses at most `delta` value relative to
/// the prediction.
pub fn repair_cancel(
    network: &FlowNetwork,
    prediction: &FlowAssignment,
    strict_units: bool,
) -> Result<(FlowAssignment, RepairReport), FlowError> {
    let mut machine = CancelMachine::new(network, prediction, strict_units)?;
    let mut unlimited = u64::MAX;
    while !machine.advance(&mut unlimited) {}
    Ok(machine.into_outcome())
}

/// Repairs a prediction via the auxiliary max-flow construction: reverse
/// every edge with capacity `f(u,v)` (lowered to `c(u,v)` on violating
/// edges), add an `(s,t)` arc of capacity delta, connect a super source to
/// the tail and the head to a super sink of every violating edge with its
/// excess as capacity, and solve. The auxiliary flow always saturates the
/// super arcs; subtracting the implied cancellation flow (auxiliary flow
/// plus the per-edge excess) yields the repaired flow.
pub fn repair_circulation(
    network: &FlowNetwork,
    prediction: &FlowAssignment,
) -> Result<(FlowAssignment, RepairReport), FlowError> {
    let mut machine = CirculationMachine::new(network, prediction)?;
    let mut unlimited = u64::MAX;
    while !machine.advance(&mut unlimited) {}
    Ok(machine.into_outcome())
}

/// Repairs the prediction, then augments to a maximum flow.
pub fn warm_start_max_flow(
    network: &FlowNetwork,
    prediction: &FlowAssignment,
    options: WarmStartOptions,
) -> Result<(FlowAssignment, WarmStartReport), FlowError> {
    let mut machine = WarmStartMachine::new(network, prediction, options)?;
    let mut unlimited = u64::MAX;
    while !machine.advance(&mut unlimited) {}
    Ok(machine.into_result())
}

/// Work quantum of the race, in arc scans.
pub const RACE_QUANTUM: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceWinner {
    Warm,
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaceReport {
    pub winner: RaceWinner,
    /// Work spent by the warm pipeline inside the race.
    pub warm_work: u64,
    /// Work spent by the cold solver inside the race.
    pub cold_work: u64,
    pub quantum: u64,
}

impl RaceReport {
    pub fn total_work(&self) -> u64 {
        self.warm_work + self.cold_work
    }
}

/// Interleaves the warm-started pipeline and a cold solve in alternating
/// quanta of [`RACE_QUANTUM`] work units, warm going first, and returns
/// the first finisher's flow. Total metered work never exceeds twice the
/// cheaper standalone solve plus one quantum.
pub fn robust_race(
    network: &FlowNetwork,
    prediction: &FlowAssignment,
    options: WarmStartOptions,
) -> Result<(FlowAssignment, RaceReport), FlowError> {
    let mut warm = WarmStartMachine::new(network, prediction, options)?;
    let mut cold = EkMachine::new(network, &FlowAssignment::zero(network.edge_count()))
        .expect("a zero start is always feasible and conserving");
    loop {
        let mut budget = RACE_QUANTUM;
        if warm.advance(&mut budget) {
            let warm_work = warm.total_work();
            let cold_work = cold.stats().arcs_scanned;
            let (flow, _) = warm.into_result();
            return Ok((
                flow,
                RaceReport {
                    winner: RaceWinner::Warm,
                    warm_work,
                    cold_work,
                    quantum: RACE_QUANTUM,
                },
            ));
        }
        let mut budget = RACE_QUANTUM;
        if cold.advance(&mut budget) {
            return Ok((
                cold.flow(),
                RaceReport {
                    winner: RaceWinner::Cold,
                    warm_work: warm.total_work(),
                    cold_work: cold.stats().arcs_scanned,
                    quantum: RACE_QUANTUM,
                },
            ));
        }
    }
}

enum DfsOutcome {
    /// Edge indices of a simple path from the start to the target.
    Found(Vec<usize>),
    Exhausted,
    OutOfBudget,
}

/// Budget-aware depth-first search through edges with positive remaining
/// flow, trying smaller edge indices first. `adj` maps each node to
/// `(edge, next node)` pairs; passing in-edge lists walks backwards.
struct Dfs {
    start: usize,
    target: usize,
    visited: Vec<bool>,
    frames: Vec<(usize, usize)>,
    path: Vec<usize>,
}

impl Dfs {
    fn new(node_count: usize, start: usize, target: usize) -> Self {
        let mut visited = vec![false; node_count];
        visited[start] = true;
        Dfs {
            start,
            target,
            visited,
            frames: vec![(start, 0)],
            path: Vec::new(),
        }
    }

    fn advance(
        &mut self,
        adj: &[Vec<(usize, usize)>],
        rem: &[i64],
        work: &mut u64,
        budget: &mut u64,
    ) -> DfsOutcome {
        if self.start == self.target {
            return DfsOutcome::Found(Vec::new());
        }
        loop {
            let Some(&mut (node, ref mut cursor)) = self.frames.last_mut() else {
                return DfsOutcome::Exhausted;
            };
            let list = &adj[node];
            if *cursor >= list.len() {
                self.frames.pop();
                self.path.pop();
                continue;
            }
            if *budget == 0 {
                return DfsOutcome::OutOfBudget;
            }
            let (edge, next) = list[*cursor];
            *cursor += 1;
            *budget -= 1;
            *work += 1;
            if rem[edge] <= 0 || self.visited[next] {
                continue;
            }
            self.path.push(edge);
            if next == self.target {
                return DfsOutcome::Found(self.path.clone());
            }
            self.visited[next] = true;
            self.frames.push((next, 0));
        }
    }
}

enum CancelState {
    /// Looking for the smallest-index violating edge.
    Scan { next_edge: usize },
    /// Searching head-to-tail for a cycle through the violating edge.
    SearchCycle { edge: usize, dfs: Dfs },
    /// No cycle exists; searching head-to-sink along the support.
    SearchForward { edge: usize, dfs: Dfs },
    /// Sink reached; searching tail-to-source backwards along the support.
    SearchBackward {
        edge: usize,
        forward: Vec<usize>,
        dfs: Dfs,
    },
    Finished,
}

/// Resumable cycle/path cancellation.
///
/// Each round locates the smallest-index violating edge `e = (u, v)`,
/// then searches the positive-flow support for a simple cycle (a `v`-`u`
/// path closed by `e`) or, failing that, a simple `s`-`t` path through
/// `e` (an `s`-`u` prefix plus a `v`-`t` suffix; when no cycle exists the
/// two sides cannot share a node, so the path is simple), and decreases
/// flow along it. Preferring the cycle is what keeps the concatenation
/// simple. Work is metered per edge check and per arc scanned.
pub(crate) struct CancelMachine<'a> {
    net: &'a FlowNetwork,
    prediction: FlowAssignment,
    out_adj: Vec<Vec<(usize, usize)>>,
    in_adj: Vec<Vec<(usize, usize)>>,
    rem: Vec<i64>,
    strict: bool,
    delta: i64,
    value_before: i64,
    state: CancelState,
    rounds: u64,
    work: u64,
    done: bool,
}

impl<'a> CancelMachine<'a> {
    pub fn new(
        net: &'a FlowNetwork,
        prediction: &FlowAssignment,
        strict: bool,
    ) -> Result<Self, FlowError> {
        if !net.is_conserving(prediction)? {
            return Err(FlowError::NotConserving);
        }
        let mut out_adj = vec![Vec::new(); net.node_count()];
        let mut in_adj = vec![Vec::new(); net.node_count()];
        for (e, &(u, v)) in net.edges().iter().enumerate() {
            out_adj[u].push((e, v));
            in_adj[v].push((e, u));
        }
        Ok(CancelMachine {
            net,
            prediction: prediction.clone(),
            out_adj,
            in_adj,
            rem: prediction.values().to_vec(),
            strict,
            delta: net.violation_delta(prediction)?,
            value_before: net.flow_value(prediction)?,
            state: CancelState::Scan { next_edge: 0 },
            rounds: 0,
            work: 0,
            done: false,
        })
    }

    pub fn advance(&mut self, budget: &mut u64) -> bool {
        while !self.done {
            let state = std::mem::replace(&mut self.state, CancelState::Finished);
            match state {
                CancelState::Scan { mut next_edge } => {
                    loop {
                        if next_edge >= self.net.edge_count() {
                            self.done = true;
                            break;
                        }
                        if *budget == 0 {
                            self.state = CancelState::Scan { next_edge };
                            return false;
                        }
                        *budget -= 1;
                        self.work += 1;
                        let e = next_edge;
                        next_edge += 1;
                        if self.rem[e] > self.net.capacity(e) {
                            let (u, v) = self.net.edge(e);
                            self.state = CancelState::SearchCycle {
                                edge: e,
                                dfs: Dfs::new(self.net.node_count(), v, u),
                            };
                            break;
                        }
                    }
                }
                CancelState::SearchCycle { edge, mut dfs } => {
                    match dfs.advance(&self.out_adj, &self.rem, &mut self.work, budget) {
                        DfsOutcome::Found(mut member) => {
                            member.push(edge);
                            self.cancel(edge, &member);
                        }
                        DfsOutcome::Exhausted => {
                            let (_, v) = self.net.edge(edge);
                            self.state = CancelState::SearchForward {
                                edge,
                                dfs: Dfs::new(self.net.node_count(), v, self.net.sink()),
                            };
                        }
                        DfsOutcome::OutOfBudget => {
                            self.state = CancelState::SearchCycle { edge, dfs };
                            return false;
                        }
                    }
                }
                CancelState::SearchForward { edge, mut dfs } => {
                    match dfs.advance(&self.out_adj, &self.rem, &mut self.work, budget) {
                        DfsOutcome::Found(forward) => {
                            let (u, _) = self.net.edge(edge);
                            self.state = CancelState::SearchBackward {
                                edge,
                                forward,
                                dfs: Dfs::new(self.net.node_count(), u, self.net.source()),
                            };
                        }
                        DfsOutcome::Exhausted => unreachable!(
                            "a violating edge of a conserving flow lies on a support cycle \
                             or source-sink path"
                        ),
                        DfsOutcome::OutOfBudget => {
                            self.state = CancelState::SearchForward { edge, dfs };
                            return false;
                        }
                    }
                }
                CancelState::SearchBackward {
                    edge,
                    forward,
                    mut dfs,
                } => {
                    match dfs.advance(&self.in_adj, &self.rem, &mut self.work, budget) {
                        DfsOutcome::Found(backward) => {
                            let mut member = backward;
                            member.push(edge);
                            member.extend_from_slice(&forward);
                            self.cancel(edge, &member);
                        }
                        DfsOutcome::Exhausted => unreachable!(
                            "the source side of a support path must exist when the sink \
                             side does"
                        ),
                        DfsOutcome::OutOfBudget => {
                            self.state = CancelState::SearchBackward { edge, forward, dfs };
                            return false;
                        }
                    }
                }
                CancelState::Finished => {
                    self.done = true;
                }
            }
        }
        true
    }

    /// Decreases flow along a located member (cycle or s-t path) through
    /// the violating `edge`, and starts the next round.
    fn cancel(&mut self, edge: usize, member: &[usize]) {
        let excess = self.rem[edge] - self.net.capacity(edge);
        debug_assert!(excess > 0);
        let amount = if self.strict {
            1
        } else {
            member
                .iter()
                .map(|&e| self.rem[e])
                .min()
                .expect("member contains at least the violating edge")
                .min(excess)
        };
        debug_assert!(amount >= 1);
        for &e in member {
            self.rem[e] -= amount;
            debug_assert!(self.rem[e] >= 0);
        }
        self.rounds += 1;
        self.state = CancelState::Scan { next_edge: 0 };
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn into_outcome(self) -> (FlowAssignment, RepairReport) {
        assert!(self.done, "repair machine has not finished");
        let repaired = FlowAssignment::new(self.rem).expect("cancellation keeps flows nonnegative");
        let value_after = self
            .net
            .flow_value(&repaired)
            .expect("repaired flow is aligned with the network");
        let cancelled_units = self
            .prediction
            .l1_distance(&repaired)
            .expect("repaired flow is aligned with the prediction");
        let report = RepairReport {
            delta: self.delta,
            rounds: self.rounds,
            cancelled_units,
            value_before: self.value_before,
            value_after,
            aux_value: None,
            work: self.work,
        };
        (repaired, report)
    }
}

/// Resumable auxiliary-max-flow repair. Construction builds the auxiliary
/// network eagerly; `advance` charges the violation scan and the build as
/// up-front work, then drives the inner solver.
pub(crate) struct CirculationMachine<'a> {
    net: &'a FlowNetwork,
    prediction: FlowAssignment,
    excesses: Vec<i64>,
    delta: i64,
    value_before: i64,
    charge: u64,
    base_work: u64,
    aux: Option<EkMachine>,
    done: bool,
}

impl<'a> CirculationMachine<'a> {
    pub fn new(net: &'a FlowNetwork, prediction: &FlowAssignment) -> Result<Self, FlowError> {
        if !net.is_conserving(prediction)? {
            return Err(FlowError::NotConserving);
        }
        let value_before = net.flow_value(prediction)?;
        let excesses: Vec<i64> = (0..net.edge_count())
            .map(|e| (prediction.value(e) - net.capacity(e)).max(0))
            .collect();
        let delta = excesses.iter().fold(0i64, |acc, &x| add(acc, x));
        let (aux, aux_edges) = if delta == 0 {
            (None, 0)
        } else {
            let aux_net = build_auxiliary(net, prediction, &excesses, delta);
            let machine = EkMachine::new(&aux_net, &FlowAssignment::zero(aux_net.edge_count()))
                .expect("the auxiliary network admits a zero start");
            let count = aux_net.edge_count();
            (Some(machine), count)
        };
        Ok(CirculationMachine {
            net,
            prediction: prediction.clone(),
            excesses,
            delta,
            value_before,
            charge: (net.edge_count() + aux_edges) as u64,
            base_work: 0,
            aux,
            done: false,
        })
    }

    pub fn advance(&mut self, budget: &mut u64) -> bool {
        if self.done {
            return true;
        }
        let pay = self.charge.min(*budget);
        self.charge -= pay;
        *budget -= pay;
        self.base_work += pay;
        if self.charge > 0 {
            return false;
        }
        match &mut self.aux {
            None => {
                self.done = true;
                true
            }
            Some(machine) => {
                if machine.advance(budget) {
                    self.done = true;
                    true
                } else {
                    false
                }
            }
        }
    }

    pub fn work(&self) -> u64 {
        self.base_work
            + self
                .aux
                .as_ref()
                .map_or(0, |machine| machine.stats().arcs_scanned)
    }

    pub fn into_outcome(self) -> (FlowAssignment, RepairReport) {
        assert!(self.done, "repair machine has not finished");
        let work = self.work();
        let (repaired, rounds) = match self.aux {
            None => (self.prediction.clone(), 0),
            Some(machine) => {
                debug_assert!(machine.is_done());
                let aux_flow = machine.flow();
                let aux_value = machine.stats().units_pushed;
                assert_eq!(
                    aux_value, self.delta,
                    "auxiliary max flow must saturate every super-source arc"
                );
                let values: Vec<i64> = (0..self.net.edge_count())
                    .map(|e| {
                        let cancelled = add(aux_flow.value(e), self.excesses[e]);
                        sub(self.prediction.value(e), cancelled)
                    })
                    .collect();
                let repaired = FlowAssignment::new(values)
                    .expect("auxiliary capacities bound the cancellation by the prediction");
                (repaired, machine.stats().augmentation_count)
            }
        };
        let value_after = self
            .net
            .flow_value(&repaired)
            .expect("repaired flow is aligned with the network");
        let cancelled_units = self
            .prediction
            .l1_distance(&repaired)
            .expect("repaired flow is aligned with the prediction");
        let report = RepairReport {
            delta: self.delta,
            rounds,
            cancelled_units,
            value_before: self.value_before,
            value_after,
            aux_value: Some(self.delta),
            work,
        };
        (repaired, report)
    }
}

/// The reversed auxiliary network: per original edge `(u,v)` a reversed
/// arc `(v,u)` carrying the prediction (capped at `c` on violating
/// edges), an `(s,t)` arc of capacity delta, and super-source/super-sink
/// arcs of the per-edge excess around every violating edge.
fn build_auxiliary(
    net: &FlowNetwork,
    prediction: &FlowAssignment,
    excesses: &[i64],
    delta: i64,
) -> FlowNetwork {
    let n = net.node_count();
    let (super_source, super_sink) = (n, n + 1);
    let mut edges = Vec::new();
    let mut caps = Vec::new();
    for (e, &(u, v)) in net.edges().iter().enumerate() {
        let cap = if excesses[e] > 0 {
            net.capacity(e)
        } else {
            prediction.value(e)
        };
        edges.push((v, u));
        caps.push(cap);
    }
    edges.push((net.source(), net.sink()));
    caps.push(delta);
    for (e, &(u, v)) in net.edges().iter().enumerate() {
        if excesses[e] > 0 {
            edges.push((super_source, u));
            caps.push(excesses[e]);
            edges.push((v, super_sink));
            caps.push(excesses[e]);
        }
    }
    FlowNetwork::new(n + 2, edges, caps, super_source, super_sink)
        .expect("auxiliary construction yields a valid network")
}

enum WarmPhase<'a> {
    Cancel(CancelMachine<'a>),
    Circulation(CirculationMachine<'a>),
    Augment(EkMachine),
    Done,
}

/// The full warm-start pipeline as a resumable machine, so the race can
/// interleave it with a cold solve under a shared work budget.
pub(crate) struct WarmStartMachine<'a> {
    net: &'a FlowNetwork,
    prediction: FlowAssignment,
    options: WarmStartOptions,
    phase: WarmPhase<'a>,
    repair: Option<RepairReport>,
    result: Option<(FlowAssignment, WarmStartReport)>,
}

impl<'a> WarmStartMachine<'a> {
    pub fn new(
        net: &'a FlowNetwork,
        prediction: &FlowAssignment,
        options: WarmStartOptions,
    ) -> Result<Self, FlowError> {
        let phase = match options.variant {
            RepairVariant::Cancel => {
                WarmPhase::Cancel(CancelMachine::new(net, prediction, options.strict_units)?)
            }
            RepairVariant::Circulation => {
                WarmPhase::Circulation(CirculationMachine::new(net, prediction)?)
            }
        };
        Ok(WarmStartMachine {
            net,
            prediction: prediction.clone(),
            options,
            phase,
            repair: None,
            result: None,
        })
    }

    pub fn advance(&mut self, budget: &mut u64) -> bool {
        loop {
            let finished = match &mut self.phase {
                WarmPhase::Cancel(machine) => machine.advance(budget),
                WarmPhase::Circulation(machine) => machine.advance(budget),
                WarmPhase::Augment(machine) => machine.advance(budget),
                WarmPhase::Done => return true,
            };
            if !finished {
                return false;
            }
            match std::mem::replace(&mut self.phase, WarmPhase::Done) {
                WarmPhase::Cancel(machine) => {
                    let (repaired, report) = machine.into_outcome();
                    self.start_augment(repaired, report);
                }
                WarmPhase::Circulation(machine) => {
                    let (repaired, report) = machine.into_outcome();
                    self.start_augment(repaired, report);
                }
                WarmPhase::Augment(machine) => {
                    self.finalize(machine);
                    return true;
                }
                WarmPhase::Done => unreachable!("done phase returns above"),
            }
        }
    }

    fn start_augment(&mut self, repaired: FlowAssignment, report: RepairReport) {
        let machine = EkMachine::new(self.net, &repaired)
            .expect("repair always produces a feasible conserving flow");
        self.repair = Some(report);
        self.phase = WarmPhase::Augment(machine);
    }

    fn finalize(&mut self, machine: EkMachine) {
        let repair = self.repair.expect("augmentation follows repair");
        let flow = machine.flow();
        let stats = machine.stats();
        let final_value = self
            .net
            .flow_value(&flow)
            .expect("final flow is aligned with the network");
        debug_assert_eq!(stats.units_pushed, final_value - repair.value_after);
        let eta = self
            .prediction
            .l1_distance(&flow)
            .expect("final flow is aligned with the prediction");
        let report = WarmStartReport {
            variant: self.options.variant,
            delta: repair.delta,
            repair_rounds: repair.rounds,
            repair_units: repair.cancelled_units,
            repair_work: repair.work,
            value_before_repair: repair.value_before,
            value_after_repair: repair.value_after,
            final_value,
            step2_stats: stats,
            aux_value: repair.aux_value,
            eta_vs: Some(eta),
        };
        self.result = Some((flow, report));
    }

    /// Work spent so far, in the solver's work units.
    pub fn total_work(&self) -> u64 {
        match &self.phase {
            WarmPhase::Cancel(machine) => machine.work(),
            WarmPhase::Circulation(machine) => machine.work(),
            WarmPhase::Augment(machine) => {
                self.repair.map_or(0, |r| r.work) + machine.stats().arcs_scanned
            }
            WarmPhase::Done => self
                .result
                .as_ref()
                .map_or(0, |(_, report)| report.total_work()),
        }
    }

    pub fn into_result(self) -> (FlowAssignment, WarmStartReport) {
        self.result.expect("warm-start machine has not finished")
    }
}
