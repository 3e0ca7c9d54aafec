//! Seeded random networks, predictions, and controlled-error perturbation.
//!
//! Everything here is deterministic in the caller's RNG, so experiments
//! and property tests reproduce bit-for-bit from a recorded seed.

use crate::graph::{FlowAssignment, FlowNetwork};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random network with 2 to `max_nodes` nodes, up to `max_edges` edges
/// (parallel edges allowed, self-loops not), capacities in
/// `0..=max_cap`, and distinct random terminals.
pub fn random_network<R: Rng + ?Sized>(
    rng: &mut R,
    max_nodes: usize,
    max_edges: usize,
    max_cap: i64,
) -> FlowNetwork {
    let n = rng.random_range(2..=max_nodes.max(2));
    let source = rng.random_range(0..n);
    let sink = loop {
        let t = rng.random_range(0..n);
        if t != source {
            break t;
        }
    };
    let m = rng.random_range(0..=max_edges);
    let mut edges = Vec::with_capacity(m);
    let mut capacities = Vec::with_capacity(m);
    for _ in 0..m {
        let u = rng.random_range(0..n);
        let v = loop {
            let v = rng.random_range(0..n);
            if v != u {
                break v;
            }
        };
        edges.push((u, v));
        capacities.push(rng.random_range(0..=max_cap.max(0)));
    }
    FlowNetwork::new(n, edges, capacities, source, sink)
        .expect("generated networks satisfy the constructor invariants")
}

/// A uniformly shuffled copy of a node's edge list.
fn shuffled<R: Rng + ?Sized>(rng: &mut R, list: &[usize]) -> Vec<usize> {
    let mut copy = list.to_vec();
    copy.shuffle(rng);
    copy
}

/// A random simple path `from -> to` over the edges passing `allowed`,
/// found by depth-first search in shuffled order. `None` if no such path
/// exists.
fn random_path<R: Rng + ?Sized>(
    rng: &mut R,
    network: &FlowNetwork,
    from: usize,
    to: usize,
    allowed: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let out = network.out_edges();
    let mut visited = vec![false; network.node_count()];
    visited[from] = true;
    let mut frames = vec![(shuffled(rng, &out[from]), 0usize)];
    let mut path: Vec<usize> = Vec::new();
    while let Some((list, cursor)) = frames.last_mut() {
        if *cursor >= list.len() {
            frames.pop();
            path.pop();
            continue;
        }
        let e = list[*cursor];
        *cursor += 1;
        if !allowed(e) {
            continue;
        }
        let (_, head) = network.edge(e);
        if visited[head] {
            continue;
        }
        path.push(e);
        if head == to {
            return Some(path);
        }
        visited[head] = true;
        frames.push((shuffled(rng, &out[head]), 0));
    }
    None
}

/// A random simple directed cycle over the edges passing `allowed`,
/// found by depth-first search from every node in shuffled order. `None`
/// if the allowed subgraph is acyclic.
fn random_cycle<R: Rng + ?Sized>(
    rng: &mut R,
    network: &FlowNetwork,
    allowed: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let n = network.node_count();
    let out = network.out_edges();
    let mut finished = vec![false; n];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    for start in starts {
        if finished[start] {
            continue;
        }
        let mut position: Vec<Option<usize>> = vec![None; n];
        position[start] = Some(0);
        let mut frames = vec![(start, shuffled(rng, &out[start]), 0usize)];
        let mut path: Vec<usize> = Vec::new();
        while let Some((node, list, cursor)) = frames.last_mut() {
            if *cursor >= list.len() {
                let node = *node;
                position[node] = None;
                finished[node] = true;
                frames.pop();
                path.pop();
                continue;
            }
            let e = list[*cursor];
            *cursor += 1;
            if !allowed(e) {
                continue;
            }
            let (_, head) = network.edge(e);
            if let Some(pos) = position[head] {
                let mut cycle = path[pos..].to_vec();
                cycle.push(e);
                return Some(cycle);
            }
            if finished[head] {
                continue;
            }
            path.push(e);
            position[head] = Some(path.len());
            frames.push((head, shuffled(rng, &out[head]), 0));
        }
    }
    None
}

/// A random simple source-to-sink path over all edges, ignoring
/// capacities.
pub fn random_simple_path<R: Rng + ?Sized>(
    rng: &mut R,
    network: &FlowNetwork,
) -> Option<Vec<usize>> {
    random_path(rng, network, network.source(), network.sink(), &|_| true)
}

/// A random simple directed cycle over all edges, ignoring capacities.
pub fn random_simple_cycle<R: Rng + ?Sized>(
    rng: &mut R,
    network: &FlowNetwork,
) -> Option<Vec<usize>> {
    random_cycle(rng, network, &|_| true)
}

/// A conserving (not necessarily feasible) flow built by stacking random
/// cycles and source-sink paths with amounts in `1..=max_amount`.
pub fn random_conserving_prediction<R: Rng + ?Sized>(
    rng: &mut R,
    network: &FlowNetwork,
    moves: usize,
    max_amount: i64,
) -> FlowAssignment {
    let mut values = vec![0i64; network.edge_count()];
    for _ in 0..moves {
        let member = if rng.random_bool(0.5) {
            random_cycle(rng, network, &|_| true)
        } else {
            random_path(rng, network, network.source(), network.sink(), &|_| true)
        };
        if let Some(member) = member {
            if member.is_empty() {
                continue;
            }
            let amount = rng.random_range(1..=max_amount.max(1));
            for &e in &member {
                values[e] += amount;
            }
        }
    }
    FlowAssignment::new(values).expect("stacked positive amounts stay nonnegative")
}

/// Random unit perturbations of `base` (plus or minus one along a random
/// cycle or source-sink path, subtractions restricted to the current
/// positive support) until the L1 distance from `base` reaches
/// `target_eta` or `attempts` moves have been tried. Returns the
/// perturbed flow, the measured distance, and whether the target was
/// reached. Conservation is preserved by every move; capacities are
/// deliberately ignored, so the result may be infeasible.
pub fn perturb_to_error<R: Rng + ?Sized>(
    rng: &mut R,
    network: &FlowNetwork,
    base: &FlowAssignment,
    target_eta: i64,
    attempts: usize,
) -> (FlowAssignment, i64, bool) {
    let mut current = base.values().to_vec();
    let mut measured = 0i64;
    let mut tries = 0usize;
    while measured < target_eta && tries < attempts {
        tries += 1;
        let add = rng.random_bool(0.5);
        let want_cycle = rng.random_bool(0.5);
        let member = {
            let support = |e: usize| current[e] > 0;
            let everything = |_: usize| true;
            let allowed: &dyn Fn(usize) -> bool = if add { &everything } else { &support };
            if want_cycle {
                random_cycle(rng, network, allowed)
            } else {
                random_path(rng, network, network.source(), network.sink(), allowed)
            }
        };
        let Some(member) = member else { continue };
        if member.is_empty() {
            continue;
        }
        let step = if add { 1 } else { -1 };
        for &e in &member {
            current[e] += step;
        }
        measured = current
            .iter()
            .zip(base.values())
            .map(|(&a, &b)| (a - b).abs())
            .sum();
    }
    let reached = measured >= target_eta;
    let flow = FlowAssignment::new(current)
        .expect("subtractions are restricted to the positive support");
    (flow, measured, reached)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::diamond;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_is_path(net: &FlowNetwork, edges: &[usize], from: usize, to: usize) {
        let mut at = from;
        for &e in edges {
            let (u, v) = net.edge(e);
            assert_eq!(u, at);
            at = v;
        }
        assert_eq!(at, to);
    }

    #[test]
    fn random_networks_respect_their_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let net = random_network(&mut rng, 8, 14, 6);
            assert!(net.node_count() >= 2 && net.node_count() <= 8);
            assert!(net.edge_count() <= 14);
            assert_ne!(net.source(), net.sink());
            for e in 0..net.edge_count() {
                let (u, v) = net.edge(e);
                assert_ne!(u, v);
                assert!((0..=6).contains(&net.capacity(e)));
            }
        }
    }

    #[test]
    fn generation_is_seed_reproducible() {
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let net = random_network(&mut rng, 8, 14, 6);
            let pred = random_conserving_prediction(&mut rng, &net, 5, 3);
            (net, pred)
        };
        let (net_a, pred_a) = make();
        let (net_b, pred_b) = make();
        assert_eq!(net_a.edges(), net_b.edges());
        assert_eq!(net_a.capacities(), net_b.capacities());
        assert_eq!(pred_a, pred_b);
    }

    #[test]
    fn predictions_conserve_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let net = random_network(&mut rng, 8, 14, 6);
            let pred = random_conserving_prediction(&mut rng, &net, 6, 4);
            assert!(net.is_conserving(&pred).unwrap());
        }
    }

    #[test]
    fn path_sampling_finds_real_paths() {
        let net = diamond();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let path = random_simple_path(&mut rng, &net).expect("diamond connects s to t");
            assert_is_path(&net, &path, net.source(), net.sink());
        }
        let disconnected =
            FlowNetwork::new(4, vec![(2, 3)], vec![5], 0, 1).unwrap();
        assert_eq!(random_simple_path(&mut rng, &disconnected), None);
    }

    #[test]
    fn cycle_sampling_finds_cycles_exactly_when_they_exist() {
        // The diamond is acyclic.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(random_simple_cycle(&mut rng, &diamond()), None);
        let triangle = FlowNetwork::new(
            4,
            vec![(0, 1), (1, 2), (2, 1), (1, 3)],
            vec![1, 1, 1, 1],
            0,
            3,
        )
        .unwrap();
        for _ in 0..20 {
            let cycle = random_simple_cycle(&mut rng, &triangle).expect("1->2->1 is a cycle");
            let (first_tail, _) = triangle.edge(cycle[0]);
            assert_is_path(&triangle, &cycle, first_tail, first_tail);
            assert!(!cycle.is_empty());
        }
    }

    #[test]
    fn perturbation_reaches_small_targets_on_the_diamond() {
        let net = diamond();
        let base = crate::testutil::flow(&[2, 2, 2, 2, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (pred, measured, reached) = perturb_to_error(&mut rng, &net, &base, 6, 500);
        assert!(reached);
        assert!(measured >= 6);
        assert_eq!(base.l1_distance(&pred).unwrap(), measured);
        assert!(net.is_conserving(&pred).unwrap());
    }

    #[test]
    fn zero_target_returns_the_base_untouched() {
        let net = diamond();
        let base = crate::testutil::flow(&[1, 1, 1, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (pred, measured, reached) = perturb_to_error(&mut rng, &net, &base, 0, 100);
        assert_eq!(pred, base);
        assert_eq!(measured, 0);
        assert!(reached);
    }
}
