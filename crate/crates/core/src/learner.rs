//! Learning a flow prediction from sampled instances.
//!
//! Given k capacity samples for the same graph, the learner computes the
//! conserving integral flow minimizing the mean L1 distance to the
//! per-sample maximum flows. Each edge contributes a piecewise-linear
//! convex cost `cost_e(x) = sum_i w_i |x - x_i|` over the sorted sample
//! optima `x_i`; replacing every edge by one parallel arc per finite cost
//! segment (capacity = segment width, cost = segment slope) and adding a
//! zero-cost return arc turns the problem into a min-cost circulation,
//! solved exactly by negative-cycle canceling.
//!
//! Costs and objectives are exact rationals; arc costs are slopes scaled
//! by a common denominator so the solver works on integers.

use crate::graph::{add, mul, sub, FlowAssignment, FlowError, FlowNetwork};
use crate::maxflow::max_flow_from;
use crate::Rational;
use num_integer::lcm;

/// `sum_i w_i |x - x_i|` for one edge: positive weights summing to one
/// over nonnegative sample values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinearCost {
    breakpoints: Vec<i64>,
    weights: Vec<Rational>,
}

/// One finite segment of a cost curve, in breakpoint order. Slopes are
/// strictly increasing across the segments of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostSegment {
    pub capacity: i64,
    pub slope: Rational,
}

impl PiecewiseLinearCost {
    pub fn uniform(values: &[i64]) -> Result<Self, FlowError> {
        Self::weighted(values, &uniform_weights(values.len()))
    }

    pub fn weighted(values: &[i64], weights: &[Rational]) -> Result<Self, FlowError> {
        if values.is_empty() {
            return Err(FlowError::EmptySamples);
        }
        if weights.len() != values.len() {
            return Err(FlowError::LengthMismatch {
                expected: values.len(),
                actual: weights.len(),
            });
        }
        if values.iter().any(|&v| v < 0) {
            return Err(FlowError::InvalidParameter(
                "sample values must be nonnegative",
            ));
        }
        validate_weights(weights)?;
        let mut pairs: Vec<(i64, Rational)> =
            values.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by_key(|&(v, _)| v);
        let (breakpoints, weights) = pairs.into_iter().unzip();
        Ok(PiecewiseLinearCost {
            breakpoints,
            weights,
        })
    }

    /// Sorted sample values, duplicates kept.
    pub fn breakpoints(&self) -> &[i64] {
        &self.breakpoints
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn max_breakpoint(&self) -> i64 {
        *self
            .breakpoints
            .last()
            .expect("a cost curve has at least one breakpoint")
    }

    /// Exact cost at `x`.
    pub fn evaluate(&self, x: i64) -> Rational {
        self.breakpoints
            .iter()
            .zip(&self.weights)
            .fold(Rational::from_integer(0), |acc, (&b, &w)| {
                acc + w * Rational::from_integer(sub(x, b).abs())
            })
    }

    /// Finite positive-width segments from 0 to the largest breakpoint.
    /// The slope between the i-th and (i+1)-th sorted sample is
    /// `2 W_i - 1` where `W_i` is the weight at or below the left end;
    /// the unbounded tail beyond the last sample (slope +1) is omitted.
    pub fn segments(&self) -> Vec<CostSegment> {
        let mut out = Vec::new();
        let mut cum = Rational::from_integer(0);
        let mut left = 0i64;
        for (&b, &w) in self.breakpoints.iter().zip(&self.weights) {
            let width = b - left;
            if width > 0 {
                out.push(CostSegment {
                    capacity: width,
                    slope: cum + cum - Rational::from_integer(1),
                });
            }
            cum += w;
            left = b;
        }
        out
    }
}

fn validate_weights(weights: &[Rational]) -> Result<(), FlowError> {
    if weights.iter().any(|w| *w <= Rational::from_integer(0)) {
        return Err(FlowError::InvalidParameter("weights must be positive"));
    }
    let total = weights
        .iter()
        .fold(Rational::from_integer(0), |acc, w| acc + *w);
    if total != Rational::from_integer(1) {
        return Err(FlowError::InvalidParameter("weights must sum to one"));
    }
    Ok(())
}

/// `k` equal weights summing to one.
pub fn uniform_weights(k: usize) -> Vec<Rational> {
    (0..k).map(|_| Rational::new(1, k as i64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McfArc {
    pub tail: usize,
    pub head: usize,
    pub capacity: i64,
    /// Slope scaled by the instance's `cost_denominator`; may be negative.
    pub cost: i64,
    /// Original edge whose cost curve produced this arc; `None` for the
    /// return arc.
    pub origin: Option<usize>,
}

/// A min-cost circulation instance. The required flow value is free: the
/// return arc lets any amount circulate from sink to source at no cost,
/// so the solver just minimizes total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCostFlowInstance {
    pub node_count: usize,
    pub arcs: Vec<McfArc>,
    pub source: usize,
    pub sink: usize,
    /// True arc costs are `cost / cost_denominator`.
    pub cost_denominator: i64,
}

/// Expands each edge into parallel arcs, one per finite cost segment in
/// ascending cost order, and appends a zero-cost sink-to-source return
/// arc wide enough for every candidate optimum (twice the edge count
/// times the largest breakpoint).
pub fn reduce_to_mcf(
    network: &FlowNetwork,
    costs: &[PiecewiseLinearCost],
) -> Result<MinCostFlowInstance, FlowError> {
    if costs.len() != network.edge_count() {
        return Err(FlowError::LengthMismatch {
            expected: network.edge_count(),
            actual: costs.len(),
        });
    }
    let mut denominator = 1i64;
    for cost in costs {
        for w in cost.weights() {
            denominator = lcm(denominator, *w.denom());
        }
    }
    let mut arcs = Vec::new();
    let mut max_breakpoint = 0i64;
    for (e, cost) in costs.iter().enumerate() {
        let (tail, head) = network.edge(e);
        max_breakpoint = max_breakpoint.max(cost.max_breakpoint());
        let mut previous = i64::MIN;
        for segment in cost.segments() {
            let scaled = segment.slope * Rational::from_integer(denominator);
            debug_assert!(scaled.is_integer());
            let cost = scaled.to_integer();
            debug_assert!(cost > previous, "segment costs must increase strictly");
            previous = cost;
            arcs.push(McfArc {
                tail,
                head,
                capacity: segment.capacity,
                cost,
                origin: Some(e),
            });
        }
    }
    arcs.push(McfArc {
        tail: network.sink(),
        head: network.source(),
        capacity: mul(mul(2, network.edge_count() as i64), max_breakpoint),
        cost: 0,
        origin: None,
    });
    Ok(MinCostFlowInstance {
        node_count: network.node_count(),
        arcs,
        source: network.source(),
        sink: network.sink(),
        cost_denominator: denominator,
    })
}

/// Exact min-cost circulation by negative-cycle canceling from the zero
/// circulation. Only strictly negative residual cycles are canceled, so
/// among tied optima the result is the one with the least total flow.
pub fn min_cost_flow(instance: &MinCostFlowInstance) -> Result<Vec<i64>, FlowError> {
    let n = instance.node_count;
    let mut budget = 1i128;
    for arc in &instance.arcs {
        if arc.tail >= n || arc.head >= n {
            return Err(FlowError::NodeOutOfRange {
                node: arc.tail.max(arc.head),
                count: n,
            });
        }
        if arc.capacity < 0 {
            return Err(FlowError::InvalidParameter(
                "arc capacities must be nonnegative",
            ));
        }
        budget += arc.capacity as i128 * arc.cost.unsigned_abs() as i128;
    }
    let mut flows = vec![0i64; instance.arcs.len()];
    while let Some(cycle) = find_negative_cycle(instance, &flows) {
        let total: i128 = cycle
            .iter()
            .map(|&(arc, forward)| {
                let c = instance.arcs[arc].cost as i128;
                if forward {
                    c
                } else {
                    -c
                }
            })
            .sum();
        assert!(total < 0, "extracted residual cycle is not negative");
        let bottleneck = cycle
            .iter()
            .map(|&(arc, forward)| {
                if forward {
                    instance.arcs[arc].capacity - flows[arc]
                } else {
                    flows[arc]
                }
            })
            .min()
            .expect("a cycle has at least one arc");
        debug_assert!(bottleneck > 0);
        for &(arc, forward) in &cycle {
            if forward {
                flows[arc] += bottleneck;
            } else {
                flows[arc] -= bottleneck;
            }
        }
        // Every cancellation lowers the total cost by at least one scaled
        // unit, and the cost is bounded below, so this cannot spin.
        budget -= 1;
        assert!(budget > 0, "cycle canceling exceeded its cost budget");
    }
    Ok(flows)
}

/// Whether the residual graph of `flows` still contains a negative-cost
/// cycle; `false` certifies optimality.
pub fn has_negative_residual_cycle(instance: &MinCostFlowInstance, flows: &[i64]) -> bool {
    find_negative_cycle(instance, flows).is_some()
}

/// Bellman-Ford over the residual arcs with all distances started at
/// zero. An update in the n-th pass proves a negative cycle, which is
/// then read off the predecessor pointers. Entries are `(arc index,
/// forward?)`.
fn find_negative_cycle(instance: &MinCostFlowInstance, flows: &[i64]) -> Option<Vec<(usize, bool)>> {
    let n = instance.node_count;
    let mut residual: Vec<(usize, usize, i64, usize, bool)> = Vec::new();
    for (i, arc) in instance.arcs.iter().enumerate() {
        if flows[i] < arc.capacity {
            residual.push((arc.tail, arc.head, arc.cost, i, true));
        }
        if flows[i] > 0 {
            residual.push((arc.head, arc.tail, -arc.cost, i, false));
        }
    }
    let mut dist = vec![0i128; n];
    let mut pred: Vec<Option<(usize, usize, bool)>> = vec![None; n];
    let mut last_updated = None;
    for _ in 0..n {
        last_updated = None;
        for &(from, to, cost, arc, forward) in &residual {
            let candidate = dist[from] + cost as i128;
            if candidate < dist[to] {
                dist[to] = candidate;
                pred[to] = Some((from, arc, forward));
                last_updated = Some(to);
            }
        }
        last_updated?;
    }
    // Walk predecessors until a node repeats; the repeat closes a cycle.
    let mut seen = vec![false; n];
    let mut cursor = last_updated.expect("the n-th pass updated a node");
    while !seen[cursor] {
        seen[cursor] = true;
        cursor = pred[cursor].expect("updated nodes have predecessors").0;
    }
    let anchor = cursor;
    let mut cycle = Vec::new();
    let mut node = anchor;
    loop {
        let (from, arc, forward) = pred[node].expect("cycle nodes have predecessors");
        cycle.push((arc, forward));
        node = from;
        if node == anchor {
            break;
        }
    }
    Some(cycle)
}

/// Maximum flow for each sampled capacity vector, in sample order.
pub fn sample_optima(
    network: &FlowNetwork,
    samples: &[Vec<i64>],
) -> Result<Vec<FlowAssignment>, FlowError> {
    samples
        .iter()
        .map(|caps| {
            let instance = network.with_capacities(caps.clone())?;
            let start = FlowAssignment::zero(instance.edge_count());
            let (flow, _) = max_flow_from(&instance, &start)?;
            Ok(flow)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedPrediction {
    pub flow: FlowAssignment,
    /// Weighted mean L1 distance from `flow` to the sample optima; the
    /// global minimum over conserving integral flows.
    pub objective: Rational,
}

/// Learns the error-minimizing prediction for uniformly weighted samples.
pub fn learn_prediction(
    network: &FlowNetwork,
    samples: &[Vec<i64>],
) -> Result<LearnedPrediction, FlowError> {
    learn_prediction_weighted(network, samples, &uniform_weights(samples.len()))
}

/// Learns the prediction minimizing the weighted mean L1 distance to the
/// sample optima. Weights must be positive and sum to one.
pub fn learn_prediction_weighted(
    network: &FlowNetwork,
    samples: &[Vec<i64>],
    weights: &[Rational],
) -> Result<LearnedPrediction, FlowError> {
    if samples.is_empty() {
        return Err(FlowError::EmptySamples);
    }
    if weights.len() != samples.len() {
        return Err(FlowError::LengthMismatch {
            expected: samples.len(),
            actual: weights.len(),
        });
    }
    validate_weights(weights)?;
    let optima = sample_optima(network, samples)?;
    let m = network.edge_count();
    let costs: Vec<PiecewiseLinearCost> = (0..m)
        .map(|e| {
            let values: Vec<i64> = optima.iter().map(|f| f.value(e)).collect();
            PiecewiseLinearCost::weighted(&values, weights)
        })
        .collect::<Result<_, _>>()?;
    let instance = reduce_to_mcf(network, &costs)?;
    let arc_flows = min_cost_flow(&instance)?;
    let mut values = vec![0i64; m];
    for (arc, &g) in instance.arcs.iter().zip(&arc_flows) {
        if let Some(e) = arc.origin {
            values[e] = add(values[e], g);
        }
    }
    let flow = FlowAssignment::new(values).expect("arc flows are nonnegative");
    let objective = costs
        .iter()
        .enumerate()
        .fold(Rational::from_integer(0), |acc, (e, cost)| {
            acc + cost.evaluate(flow.value(e))
        });
    let c_max = samples
        .iter()
        .flat_map(|caps| caps.iter().copied())
        .max()
        .unwrap_or(0);
    assert!(
        flow.l1_norm() <= mul(mul(2, c_max), m as i64),
        "learned prediction exceeds twice the total sampled capacity"
    );
    debug_assert!(network
        .is_conserving(&flow)
        .expect("learned flow is aligned with the network"));
    debug_assert!(!has_negative_residual_cycle(&instance, &arc_flows));
    Ok(LearnedPrediction { flow, objective })
}

/// Exhaustive reference implementations for small instances.
pub mod bruteforce {
    use super::*;

    const SPACE_LIMIT: usize = 4_000_000;

    /// Minimizes the weighted mean L1 distance to `optima` over every
    /// conserving integral flow with `f(e)` at most the largest per-edge
    /// optimum (beyond that the per-edge costs only grow). Ties go to the
    /// lexicographically smallest flow. Refuses search spaces larger than
    /// four million assignments.
    pub fn best_conserving_flow(
        network: &FlowNetwork,
        optima: &[FlowAssignment],
        weights: &[Rational],
    ) -> Result<(FlowAssignment, Rational), FlowError> {
        if optima.is_empty() {
            return Err(FlowError::EmptySamples);
        }
        if weights.len() != optima.len() {
            return Err(FlowError::LengthMismatch {
                expected: optima.len(),
                actual: weights.len(),
            });
        }
        let m = network.edge_count();
        let boxes: Vec<i64> = (0..m)
            .map(|e| {
                optima
                    .iter()
                    .map(|f| f.value(e))
                    .max()
                    .expect("optima are nonempty")
            })
            .collect();
        let mut space = 1usize;
        for &b in &boxes {
            space = space.saturating_mul(b as usize + 1);
            if space > SPACE_LIMIT {
                return Err(FlowError::TooLarge {
                    what: "brute-force search space",
                    size: space,
                    limit: SPACE_LIMIT,
                });
            }
        }
        let mut current = vec![0i64; m];
        let mut best: Option<(FlowAssignment, Rational)> = None;
        loop {
            let candidate =
                FlowAssignment::new(current.clone()).expect("odometer values are nonnegative");
            if network.is_conserving(&candidate)? {
                let mut objective = Rational::from_integer(0);
                for (optimum, &w) in optima.iter().zip(weights) {
                    objective += w * Rational::from_integer(candidate.l1_distance(optimum)?);
                }
                if best.as_ref().is_none_or(|(_, b)| objective < *b) {
                    best = Some((candidate, objective));
                }
            }
            let mut pos = 0;
            loop {
                if pos == m {
                    return Ok(best.expect("the zero flow always conserves"));
                }
                if current[pos] < boxes[pos] {
                    current[pos] += 1;
                    break;
                }
                current[pos] = 0;
                pos += 1;
            }
        }
    }
}
