//! The acceptance gate: eight end-to-end checks, each printing one
//! PASS or FAIL line with its runtime. Every check runs even when an
//! earlier one fails; the test panics at the end if any line failed.
//! Run `cargo test --test acceptance -- --nocapture` to watch the lines.

use predflow_cli::experiments::{exp_generalization, exp_learner_exactness, SAMPLE_COUNT_CAP};
use predflow_core::formats::{
    parse_distribution, parse_flow, parse_network, parse_sample, serialize_flow,
    serialize_network, FormatError, ParseErrorKind,
};
use predflow_core::learner::learn_prediction;
use predflow_core::maxflow::min_cut_value_bruteforce;
use predflow_core::sampler::CapacityDistribution;
use predflow_core::synth::{random_conserving_prediction, random_network};
use predflow_core::warmstart::{
    repair_circulation, robust_race, warm_start_max_flow, RepairVariant, WarmStartOptions,
    RACE_QUANTUM,
};
use predflow_core::{max_flow_from, FlowAssignment, FlowNetwork, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::time::{Duration, Instant};

const TRIALS: u64 = 1000;
const LEARNER_TRIALS: u64 = 500;
const VARIANTS: [RepairVariant; 2] = [RepairVariant::Cancel, RepairVariant::Circulation];

/// One random instance with a random conserving (possibly infeasible)
/// prediction: at most 8 nodes, 14 edges, capacities at most 6.
fn trial_instance(seed: u64) -> (FlowNetwork, FlowAssignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let network = random_network(&mut rng, 8, 14, 6);
    let prediction = random_conserving_prediction(&mut rng, &network, 4, 3);
    (network, prediction)
}

fn l1(a: &FlowAssignment, b: &FlowAssignment) -> i64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum()
}

fn cold_solve(network: &FlowNetwork) -> Result<(FlowAssignment, u64), String> {
    let zero = FlowAssignment::zero(network.edge_count());
    let (flow, stats) = max_flow_from(network, &zero).map_err(|e| e.to_string())?;
    Ok((flow, stats.arcs_scanned))
}

fn criterion_parity() -> Result<(), String> {
    for seed in 0..TRIALS {
        let (network, prediction) = trial_instance(seed);
        let (cold, _) = cold_solve(&network).map_err(|e| format!("seed {seed}: {e}"))?;
        let cold_value = network
            .flow_value(&cold)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let cut = min_cut_value_bruteforce(&network).map_err(|e| format!("seed {seed}: {e}"))?;
        if cold_value != cut {
            return Err(format!("seed {seed}: cold value {cold_value} != min cut {cut}"));
        }
        for variant in VARIANTS {
            let options = WarmStartOptions {
                variant,
                strict_units: false,
            };
            let (_, report) = warm_start_max_flow(&network, &prediction, options)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            if report.final_value != cut {
                return Err(format!(
                    "seed {seed}: {variant:?} warm value {} != min cut {cut}",
                    report.final_value
                ));
            }
        }
    }
    Ok(())
}

fn criterion_work_bounds() -> Result<(), String> {
    for seed in 0..TRIALS {
        let (network, prediction) = trial_instance(seed);
        let (cold, _) = cold_solve(&network).map_err(|e| format!("seed {seed}: {e}"))?;
        let eta = l1(&prediction, &cold);
        let delta = network
            .violation_delta(&prediction)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if delta > eta {
            return Err(format!("seed {seed}: delta {delta} exceeds eta {eta}"));
        }
        for variant in VARIANTS {
            let options = WarmStartOptions {
                variant,
                strict_units: false,
            };
            let (_, report) = warm_start_max_flow(&network, &prediction, options)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            if report.repair_rounds as i64 > delta {
                return Err(format!(
                    "seed {seed}: {variant:?} repair rounds {} exceed delta {delta}",
                    report.repair_rounds
                ));
            }
            let drop = report.value_before_repair - report.value_after_repair;
            if drop > delta {
                return Err(format!(
                    "seed {seed}: {variant:?} repair value drop {drop} exceeds delta {delta}"
                ));
            }
            let units = report.step2_stats.units_pushed;
            if units > eta + delta {
                return Err(format!(
                    "seed {seed}: {variant:?} step-2 units {units} exceed eta {eta} + delta {delta}"
                ));
            }
            if units > 2 * eta {
                return Err(format!(
                    "seed {seed}: {variant:?} step-2 units {units} exceed 2 eta ({eta})"
                ));
            }
        }
    }
    Ok(())
}

fn criterion_circulation_conformance() -> Result<(), String> {
    for seed in 0..TRIALS {
        let (network, prediction) = trial_instance(seed);
        let (repaired, report) =
            repair_circulation(&network, &prediction).map_err(|e| format!("seed {seed}: {e}"))?;
        if report.aux_value != Some(report.delta) {
            return Err(format!(
                "seed {seed}: auxiliary flow value {:?} does not equal delta {}",
                report.aux_value, report.delta
            ));
        }
        for e in 0..network.edge_count() {
            let predicted = prediction.value(e);
            let kept = repaired.value(e);
            let cap = network.capacity(e);
            if kept < 0 || kept > predicted {
                return Err(format!(
                    "seed {seed}: edge {e} cancellation outside [0, prediction]"
                ));
            }
            if kept > cap {
                return Err(format!("seed {seed}: edge {e} still over capacity"));
            }
            if predicted > cap && predicted - kept < predicted - cap {
                return Err(format!(
                    "seed {seed}: edge {e} cancelled less than its excess"
                ));
            }
        }
        if !network
            .is_conserving(&repaired)
            .map_err(|e| format!("seed {seed}: {e}"))?
        {
            return Err(format!("seed {seed}: repaired flow is not conserving"));
        }
        let drop = network.flow_value(&prediction).unwrap() - network.flow_value(&repaired).unwrap();
        if drop < 0 || drop > report.delta {
            return Err(format!(
                "seed {seed}: cancellation value {drop} outside [0, delta {}]",
                report.delta
            ));
        }
    }
    Ok(())
}

fn criterion_learner_exactness() -> Result<(), String> {
    let output = exp_learner_exactness(LEARNER_TRIALS, 40).map_err(|e| e.to_string())?;
    if !output.passed() {
        return Err(output.failures.join("; "));
    }
    let rows = output.csv.lines().skip(2).count() as u64;
    if rows != LEARNER_TRIALS {
        return Err(format!("expected {LEARNER_TRIALS} rows, found {rows}"));
    }
    Ok(())
}

fn criterion_norm_bound() -> Result<(), String> {
    for seed in 0..LEARNER_TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_CAFE);
        let network = random_network(&mut rng, 5, 6, 3);
        let k = rng.random_range(1..=4usize);
        let samples: Vec<Vec<i64>> = (0..k)
            .map(|_| {
                (0..network.edge_count())
                    .map(|_| rng.random_range(0..=3))
                    .collect()
            })
            .collect();
        let learned =
            learn_prediction(&network, &samples).map_err(|e| format!("seed {seed}: {e}"))?;
        let c_max = samples.iter().flatten().copied().max().unwrap_or(0);
        let norm: i64 = learned.flow.values().iter().sum();
        let bound = 2 * c_max * network.edge_count() as i64;
        if norm > bound {
            return Err(format!(
                "seed {seed}: prediction norm {norm} exceeds 2 * {c_max} * {}",
                network.edge_count()
            ));
        }
    }
    Ok(())
}

fn criterion_generalization() -> Result<(), String> {
    let network = FlowNetwork::new(
        4,
        vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)],
        vec![3, 3, 3, 3, 3],
        0,
        3,
    )
    .expect("the fixed network is valid");
    let vectors = vec![
        vec![3, 0, 3, 0, 3],
        vec![1, 1, 1, 1, 1],
        vec![2, 2, 0, 2, 2],
        vec![0, 3, 1, 2, 1],
    ];
    let probs = vec![Rational::new(1, 4); 4];
    let dist = CapacityDistribution::finite_support(vectors, probs)
        .expect("the fixed support is valid");
    let reps = 20;
    let output =
        exp_generalization(&network, &dist, reps, 0xD157, None).map_err(|e| e.to_string())?;
    let mut rows = 0u64;
    for row in output.csv.lines().skip(2) {
        let cols: Vec<&str> = row.split(',').collect();
        rows += 1;
        let k_formula: u64 = cols[3].parse().map_err(|_| "bad k_formula cell")?;
        let k_used: u64 = cols[4].parse().map_err(|_| "bad k_used cell")?;
        if k_used != k_formula.min(SAMPLE_COUNT_CAP) {
            return Err(format!(
                "rep {}: k_used {k_used} is not min(formula {k_formula}, cap)",
                cols[0]
            ));
        }
        if cols[11] != "1" {
            return Err(format!("rep {}: gap {} exceeds 2", cols[0], cols[9]));
        }
        if cols[12] != "1" {
            return Err(format!("rep {}: deviation {} exceeds 1", cols[0], cols[10]));
        }
    }
    if rows != reps {
        return Err(format!("expected {reps} rows, found {rows}"));
    }
    if !output.passed() {
        return Err(output.failures.join("; "));
    }
    Ok(())
}

fn criterion_race_overhead() -> Result<(), String> {
    for seed in 0..TRIALS {
        let (network, prediction) = trial_instance(seed);
        let (_, cold_work) = cold_solve(&network).map_err(|e| format!("seed {seed}: {e}"))?;
        for variant in VARIANTS {
            let options = WarmStartOptions {
                variant,
                strict_units: false,
            };
            let (_, warm_report) = warm_start_max_flow(&network, &prediction, options)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let (_, race) = robust_race(&network, &prediction, options)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let best = warm_report.total_work().min(cold_work);
            if race.total_work() > 2 * best + RACE_QUANTUM {
                return Err(format!(
                    "seed {seed}: {variant:?} race work {} exceeds 2 * {best} + {RACE_QUANTUM}",
                    race.total_work()
                ));
            }
        }
    }
    Ok(())
}

fn criterion_formats() -> Result<(), String> {
    for seed in 0..TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF0F0_F0F0);
        let network = random_network(&mut rng, 9, 16, 9);
        let text = serialize_network(&network);
        let parsed = parse_network(&text).map_err(|e| format!("seed {seed}: reparse: {e}"))?;
        let fields_match = parsed.node_count() == network.node_count()
            && parsed.edges() == network.edges()
            && parsed.capacities() == network.capacities()
            && parsed.source() == network.source()
            && parsed.sink() == network.sink();
        if !fields_match || serialize_network(&parsed) != text {
            return Err(format!("seed {seed}: network round trip changed the instance"));
        }
        let values: Vec<i64> = (0..network.edge_count())
            .map(|_| rng.random_range(0..=12))
            .collect();
        let flow = FlowAssignment::new(values).expect("nonnegative values");
        let flow_text =
            serialize_flow(&network, &flow, "case").map_err(|e| format!("seed {seed}: {e}"))?;
        let reparsed =
            parse_flow(&flow_text, &network).map_err(|e| format!("seed {seed}: reparse: {e}"))?;
        if reparsed != flow {
            return Err(format!("seed {seed}: flow round trip changed the values"));
        }
    }
    golden_corpus()
}

/// Every golden bad file must fail with exactly the documented error
/// class at the documented line.
fn golden_corpus() -> Result<(), String> {
    use ParseErrorKind as K;
    fn at(line: usize, kind: ParseErrorKind) -> FormatError {
        FormatError::Parse { line, kind }
    }
    let bind_network =
        parse_network("p max 2 1\nn 1 s\nn 2 t\na 1 2 5\n").expect("binding network is valid");
    let cases: Vec<(&str, FormatError)> = vec![
        ("unknown_line_type.net", at(4, K::UnknownLineType("z".into()))),
        (
            "malformed_problem.net",
            at(1, K::Malformed("p max <nodes> <arcs>")),
        ),
        ("bad_integer_nodes.net", at(1, K::BadInteger("two".into()))),
        ("duplicate_problem.net", at(4, K::DuplicateProblemLine)),
        ("missing_problem_line.net", at(1, K::MissingProblemLine)),
        (
            "node_out_of_range.net",
            at(2, K::NodeIdOutOfRange { id: 3, max: 2 }),
        ),
        ("bad_node_role.net", at(2, K::BadNodeRole("x".into()))),
        ("duplicate_source.net", at(3, K::DuplicateSource)),
        ("duplicate_sink.net", at(3, K::DuplicateSink)),
        ("source_equals_sink.net", at(3, K::SourceEqualsSink)),
        ("self_loop.net", at(4, K::SelfLoopArc)),
        ("negative_capacity.net", at(4, K::BadCapacity)),
        ("missing_source.net", at(1, K::MissingSource)),
        ("missing_sink.net", at(1, K::MissingSink)),
        (
            "arc_count_mismatch.net",
            at(
                1,
                K::ArcCountMismatch {
                    declared: 2,
                    found: 1,
                },
            ),
        ),
        ("comment_only.net", at(1, K::MissingProblemLine)),
        ("missing_flow_header.flow", at(1, K::MissingFlowHeader)),
        (
            "edge_index_out_of_range.flow",
            at(2, K::EdgeIndexOutOfRange { index: 5, count: 1 }),
        ),
        (
            "duplicate_edge_record.flow",
            at(3, K::DuplicateEdgeRecord { index: 0 }),
        ),
        (
            "missing_edge_record.flow",
            at(1, K::MissingEdgeRecord { index: 0 }),
        ),
        ("bad_flow_value.flow", at(2, K::BadFlowValue)),
        ("duplicate_flow_header.flow", at(3, K::DuplicateFlowHeader)),
        (
            "sample_index_mismatch.caps",
            at(
                1,
                K::SampleIndexMismatch {
                    declared: 7,
                    expected: 0,
                },
            ),
        ),
        (
            "wrong_value_count.caps",
            at(
                1,
                K::WrongValueCount {
                    expected: 2,
                    actual: 1,
                },
            ),
        ),
        ("missing_sample_header.caps", at(1, K::MissingSampleHeader)),
        (
            "unknown_variant.dist",
            at(1, K::UnknownDistributionVariant("gaussian".into())),
        ),
        ("probability_sum.dist", at(1, K::ProbabilitySum)),
        ("bad_probability.dist", at(3, K::BadProbability)),
        (
            "cmax_mismatch.dist",
            at(
                2,
                K::CMaxMismatch {
                    declared: 5,
                    actual: 2,
                },
            ),
        ),
        ("bad_uniform_bounds.dist", at(4, K::BadUniformBounds)),
        (
            "missing_perturb_radius.dist",
            at(1, K::MissingDistributionField("r")),
        ),
        ("missing_dist_header.dist", at(1, K::MissingDistributionHeader)),
    ];
    assert!(cases.len() >= 20, "the corpus must stay at 20+ files");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (name, expected) in cases {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let actual = match name.rsplit('.').next().unwrap() {
            "net" => parse_network(&text).err(),
            "flow" => parse_flow(&text, &bind_network).err(),
            "caps" => parse_sample(&text, 0, 2).err(),
            "dist" => parse_distribution(&text).err(),
            other => return Err(format!("{name}: unknown extension {other}")),
        };
        match actual {
            Some(e) if e == expected => {}
            Some(e) => return Err(format!("{name}: got \"{e}\", expected \"{expected}\"")),
            None => return Err(format!("{name}: parsed cleanly, expected \"{expected}\"")),
        }
    }
    Ok(())
}

struct Criterion {
    number: u32,
    label: &'static str,
    budget: Duration,
    run: fn() -> Result<(), String>,
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion {
            number: 1,
            label: "warm == cold == min cut on 1000 random instances",
            budget: Duration::from_secs(30),
            run: criterion_parity,
        },
        Criterion {
            number: 2,
            label: "repair and augmentation work bounded by the prediction error",
            budget: Duration::from_secs(30),
            run: criterion_work_bounds,
        },
        Criterion {
            number: 3,
            label: "circulation repair cancels exactly within delta",
            budget: Duration::from_secs(30),
            run: criterion_circulation_conformance,
        },
        Criterion {
            number: 4,
            label: "learner matches brute force on 500 instances",
            budget: Duration::from_secs(60),
            run: criterion_learner_exactness,
        },
        Criterion {
            number: 5,
            label: "learned predictions obey the norm bound",
            budget: Duration::from_secs(60),
            run: criterion_norm_bound,
        },
        Criterion {
            number: 6,
            label: "sampled learning generalizes within the proven gap",
            budget: Duration::from_secs(300),
            run: criterion_generalization,
        },
        Criterion {
            number: 7,
            label: "racing never costs more than twice the better leg",
            budget: Duration::from_secs(30),
            run: criterion_race_overhead,
        },
        Criterion {
            number: 8,
            label: "formats round-trip and reject malformed input precisely",
            budget: Duration::from_secs(30),
            run: criterion_formats,
        },
    ];
    let mut failures = Vec::new();
    for criterion in criteria {
        let started = Instant::now();
        let outcome = (criterion.run)();
        let elapsed = started.elapsed();
        let mut problems = Vec::new();
        if let Err(message) = outcome {
            problems.push(message);
        }
        if elapsed > criterion.budget {
            problems.push(format!(
                "took {elapsed:.2?}, budget {:?}",
                criterion.budget
            ));
        }
        if problems.is_empty() {
            println!(
                "criterion {} ({}): PASS in {elapsed:.2?}",
                criterion.number, criterion.label
            );
        } else {
            let joined = problems.join("; ");
            println!(
                "criterion {} ({}): FAIL: {joined}",
                criterion.number, criterion.label
            );
            failures.push(format!("criterion {}: {joined}", criterion.number));
        }
    }
    assert!(
        failures.is_empty(),
        "{} criteria failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
