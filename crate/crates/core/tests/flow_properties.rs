//! Randomized end-to-end properties of the solver stack: warm starts in
//! every variant agree with the cold solver and the brute-force min cut,
//! repairs respect their violation bounds, races stay within twice the
//! better leg, and decompositions reconstruct their flows.

use predflow_core::maxflow::min_cut_value_bruteforce;
use predflow_core::synth::{perturb_to_error, random_conserving_prediction, random_network};
use predflow_core::warmstart::{
    robust_race, warm_start_max_flow, RepairVariant, WarmStartOptions, RACE_QUANTUM,
};
use predflow_core::{max_flow_from, residual, FlowAssignment, FlowNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 1000;

fn trial(seed: u64) -> (FlowNetwork, FlowAssignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, 8, 14, 6);
    let pred = random_conserving_prediction(&mut rng, &net, 4, 3);
    (net, pred)
}

fn variant_options() -> [WarmStartOptions; 3] {
    [
        WarmStartOptions {
            variant: RepairVariant::Cancel,
            strict_units: false,
        },
        WarmStartOptions {
            variant: RepairVariant::Cancel,
            strict_units: true,
        },
        WarmStartOptions {
            variant: RepairVariant::Circulation,
            strict_units: false,
        },
    ]
}

#[test]
fn warm_start_matches_cold_solve_and_min_cut_everywhere() {
    for seed in 0..TRIALS {
        let (net, pred) = trial(seed);
        let zero = FlowAssignment::zero(net.edge_count());
        let (cold, _) = max_flow_from(&net, &zero).unwrap();
        let cold_value = net.flow_value(&cold).unwrap();
        assert_eq!(
            cold_value,
            min_cut_value_bruteforce(&net).unwrap(),
            "seed {seed}: cold value vs cut enumeration"
        );
        for options in variant_options() {
            let (warm, report) = warm_start_max_flow(&net, &pred, options).unwrap();
            assert!(net.is_feasible(&warm).unwrap(), "seed {seed}");
            assert!(net.is_conserving(&warm).unwrap(), "seed {seed}");
            assert_eq!(
                net.flow_value(&warm).unwrap(),
                cold_value,
                "seed {seed} {options:?}"
            );
            assert_eq!(report.final_value, cold_value, "seed {seed}");
            assert!(
                !residual(&net, &warm).unwrap().has_augmenting_path(),
                "seed {seed}: final flow must have no augmenting path"
            );
        }
    }
}

#[test]
fn repair_and_step2_respect_the_error_bounds() {
    for seed in 0..TRIALS {
        let (net, pred) = trial(seed);
        let zero = FlowAssignment::zero(net.edge_count());
        let (cold, _) = max_flow_from(&net, &zero).unwrap();
        let eta = pred.l1_distance(&cold).unwrap();
        let delta = net.violation_delta(&pred).unwrap();
        assert!(delta <= eta, "seed {seed}: delta {delta} > eta {eta}");
        for options in variant_options() {
            let (_, report) = warm_start_max_flow(&net, &pred, options).unwrap();
            assert_eq!(report.delta, delta, "seed {seed}");
            assert!(
                report.repair_rounds as i64 <= delta,
                "seed {seed} {options:?}: rounds {} > delta {delta}",
                report.repair_rounds
            );
            assert!(
                report.value_before_repair - report.value_after_repair <= delta,
                "seed {seed} {options:?}: repair lost more than delta"
            );
            assert_eq!(
                report.step2_stats.units_pushed,
                report.final_value - report.value_after_repair,
                "seed {seed}"
            );
            assert!(
                report.step2_stats.units_pushed <= eta + delta,
                "seed {seed} {options:?}: step 2 pushed {} > eta {eta} + delta {delta}",
                report.step2_stats.units_pushed
            );
        }
    }
}

#[test]
fn circulation_repair_covers_every_violation_within_delta_value() {
    for seed in 0..TRIALS {
        let (net, pred) = trial(seed);
        let delta = net.violation_delta(&pred).unwrap();
        let (repaired, report) =
            predflow_core::warmstart::repair_circulation(&net, &pred).unwrap();
        assert_eq!(report.aux_value, Some(delta), "seed {seed}");
        let mut cancelled_value = 0i64;
        for e in 0..net.edge_count() {
            let cancelled = pred.value(e) - repaired.value(e);
            assert!(cancelled >= 0, "seed {seed}: repair added flow on {e}");
            assert!(
                cancelled >= pred.value(e) - net.capacity(e),
                "seed {seed}: violation on edge {e} not fully cancelled"
            );
            let (u, _) = net.edge(e);
            if u == net.source() {
                cancelled_value += cancelled;
            }
            let (_, v) = net.edge(e);
            if v == net.source() {
                cancelled_value -= cancelled;
            }
        }
        assert!(
            cancelled_value <= delta,
            "seed {seed}: cancellation value {cancelled_value} > delta {delta}"
        );
    }
}

#[test]
fn race_never_costs_more_than_twice_the_better_leg() {
    for seed in 0..TRIALS {
        let (net, pred) = trial(seed);
        let zero = FlowAssignment::zero(net.edge_count());
        let (_, cold_stats) = max_flow_from(&net, &zero).unwrap();
        for options in variant_options() {
            let (_, warm_report) = warm_start_max_flow(&net, &pred, options).unwrap();
            let (flow, race) = robust_race(&net, &pred, options).unwrap();
            assert_eq!(
                net.flow_value(&flow).unwrap(),
                min_cut_value_bruteforce(&net).unwrap(),
                "seed {seed}"
            );
            assert_eq!(race.quantum, RACE_QUANTUM);
            let better = warm_report.total_work().min(cold_stats.arcs_scanned);
            assert!(
                race.total_work() <= 2 * better + race.quantum,
                "seed {seed} {options:?}: race work {} > 2*{better} + {}",
                race.total_work(),
                race.quantum
            );
        }
    }
}

#[test]
fn decomposition_reconstructs_feasible_flows() {
    for seed in 0..300 {
        let (net, pred) = trial(seed);
        let (repaired, _) =
            predflow_core::warmstart::repair_cancel(&net, &pred, false).unwrap();
        let decomposition = net.decompose(&repaired).unwrap();
        assert_eq!(
            decomposition.reconstruct(net.edge_count()),
            repaired,
            "seed {seed}"
        );
    }
}

#[test]
fn perturbed_predictions_stay_conserving_and_bounded() {
    for seed in 0..300 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCDEF);
        let net = random_network(&mut rng, 8, 14, 6);
        let zero = FlowAssignment::zero(net.edge_count());
        let (optimum, _) = max_flow_from(&net, &zero).unwrap();
        let target = i64::from(rng.random_range(0u8..12)) ;
        let (pred, measured, reached) = perturb_to_error(&mut rng, &net, &optimum, target, 400);
        assert!(net.is_conserving(&pred).unwrap(), "seed {seed}");
        assert_eq!(optimum.l1_distance(&pred).unwrap(), measured, "seed {seed}");
        if reached {
            assert!(measured >= target, "seed {seed}");
        }
    }
}
