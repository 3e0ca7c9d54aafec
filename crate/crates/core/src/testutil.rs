//! Shared fixtures for the unit tests in this crate.

use crate::graph::{FlowAssignment, FlowNetwork};

/// Nodes s=0, a=1, b=2, t=3; edges s->a, s->b, a->t, b->t, a->b with
/// capacities (2,2,2,2,1). Max-flow value is 4 (cut {s} or {s,a,b}).
pub(crate) fn diamond() -> FlowNetwork {
    FlowNetwork::new(
        4,
        vec![(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)],
        vec![2, 2, 2, 2, 1],
        0,
        3,
    )
    .unwrap()
}

pub(crate) fn flow(values: &[i64]) -> FlowAssignment {
    FlowAssignment::new(values.to_vec()).unwrap()
}
