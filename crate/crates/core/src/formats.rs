//! Text formats for networks, flows, sample collections, and capacity
//! distributions.
//!
//! Networks use the DIMACS max-flow format: `c` comment lines, one
//! `p max <nodes> <arcs>` problem line, `n <id> s` / `n <id> t` terminal
//! declarations (1-based node ids), and `a <tail> <head> <capacity>` arc
//! lines in edge order. Flows use a small companion format: a header
//! `f <instance-name> <arcs>` followed by one `e <edge-index> <value>`
//! record per edge, 0-based indices matching the instance's edge order.
//! Sample collections are directories holding one instance file plus one
//! capacity-vector file per sample. Distributions use a line-oriented spec
//! described at [`parse_distribution`].
//!
//! Every parse error carries a 1-based line number. Errors detected only
//! once the whole file has been read (a missing terminal declaration, an
//! arc-count mismatch, a missing flow record) report the line of the header
//! that made the promise, since no later line is at fault.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::graph::{FlowAssignment, FlowNetwork};
use crate::sampler::{CapacityDistribution, DistributionKind};
use crate::Rational;

/// Errors from reading or writing the text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    /// The text violates a grammar rule at the given 1-based line.
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    /// The file is well-formed but does not fit the object it was bound to.
    #[error("{0}")]
    Binding(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// The documented parse error classes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown line type {0:?}")]
    UnknownLineType(String),
    #[error("malformed line, expected {0:?}")]
    Malformed(&'static str),
    #[error("bad integer {0:?}")]
    BadInteger(String),
    #[error("capacity must be a nonnegative integer")]
    BadCapacity,
    #[error("missing problem line \"p max <nodes> <arcs>\"")]
    MissingProblemLine,
    #[error("duplicate problem line")]
    DuplicateProblemLine,
    #[error("node id {id} out of range 1..={max}")]
    NodeIdOutOfRange { id: u64, max: usize },
    #[error("bad node role {0:?}, expected \"s\" or \"t\"")]
    BadNodeRole(String),
    #[error("duplicate source declaration")]
    DuplicateSource,
    #[error("duplicate sink declaration")]
    DuplicateSink,
    #[error("source and sink are the same node")]
    SourceEqualsSink,
    #[error("missing source declaration")]
    MissingSource,
    #[error("missing sink declaration")]
    MissingSink,
    #[error("arc is a self-loop")]
    SelfLoopArc,
    #[error("problem line declared {declared} arcs, file has {found}")]
    ArcCountMismatch { declared: usize, found: usize },
    #[error("missing flow header \"f <instance-name> <arcs>\"")]
    MissingFlowHeader,
    #[error("duplicate flow header")]
    DuplicateFlowHeader,
    #[error("edge index {index} out of range for {count} edges")]
    EdgeIndexOutOfRange { index: u64, count: usize },
    #[error("duplicate record for edge {index}")]
    DuplicateEdgeRecord { index: usize },
    #[error("missing record for edge {index}")]
    MissingEdgeRecord { index: usize },
    #[error("flow value must be a nonnegative integer")]
    BadFlowValue,
    #[error("missing sample header \"k <index>\"")]
    MissingSampleHeader,
    #[error("sample declares index {declared}, expected {expected}")]
    SampleIndexMismatch { declared: u64, expected: usize },
    #[error("expected {expected} per-edge values, got {actual}")]
    WrongValueCount { expected: usize, actual: usize },
    #[error("missing distribution header \"d <variant> <edges>\"")]
    MissingDistributionHeader,
    #[error("duplicate distribution header")]
    DuplicateDistributionHeader,
    #[error("unknown distribution variant {0:?}")]
    UnknownDistributionVariant(String),
    #[error("bad probability, expected a positive fraction \"<num>/<den>\"")]
    BadProbability,
    #[error("support probabilities must sum to 1")]
    ProbabilitySum,
    #[error("declared c_max {declared} does not match actual bound {actual}")]
    CMaxMismatch { declared: i64, actual: i64 },
    #[error("per-edge lower bound exceeds upper bound")]
    BadUniformBounds,
    #[error("distribution is missing its {0:?} line")]
    MissingDistributionField(&'static str),
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, FormatError> {
    Err(FormatError::Parse { line, kind })
}

fn parse_count(token: &str, line: usize) -> Result<usize, FormatError> {
    match token.parse::<usize>() {
        Ok(n) => Ok(n),
        Err(_) => err(line, ParseErrorKind::BadInteger(token.to_string())),
    }
}

/// 1-based node id within `1..=max`, returned 0-based.
fn parse_node_id(token: &str, max: usize, line: usize) -> Result<usize, FormatError> {
    let id: u64 = match token.parse() {
        Ok(id) => id,
        Err(_) => return err(line, ParseErrorKind::BadInteger(token.to_string())),
    };
    if id == 0 || id > max as u64 {
        return err(line, ParseErrorKind::NodeIdOutOfRange { id, max });
    }
    Ok((id - 1) as usize)
}

fn parse_capacity(token: &str, line: usize) -> Result<i64, FormatError> {
    match token.parse::<i64>() {
        Ok(c) if c >= 0 => Ok(c),
        _ => err(line, ParseErrorKind::BadCapacity),
    }
}

/// Lines as (1-based number, whitespace-split tokens), blank lines skipped.
fn tokenized(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            None
        } else {
            Some((i + 1, tokens))
        }
    })
}

/// Parses a DIMACS max-flow instance.
pub fn parse_network(text: &str) -> Result<FlowNetwork, FormatError> {
    let mut problem: Option<(usize, usize, usize)> = None;
    let mut source: Option<usize> = None;
    let mut sink: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut capacities: Vec<i64> = Vec::new();
    let mut last_line = 0;

    for (line, tokens) in tokenized(text) {
        last_line = line;
        match tokens[0] {
            "c" => {}
            "p" => {
                if problem.is_some() {
                    return err(line, ParseErrorKind::DuplicateProblemLine);
                }
                if tokens.len() != 4 || tokens[1] != "max" {
                    return err(line, ParseErrorKind::Malformed("p max <nodes> <arcs>"));
                }
                let nodes = parse_count(tokens[2], line)?;
                let arcs = parse_count(tokens[3], line)?;
                problem = Some((nodes, arcs, line));
            }
            "n" => {
                let Some((nodes, _, _)) = problem else {
                    return err(line, ParseErrorKind::MissingProblemLine);
                };
                if tokens.len() != 3 {
                    return err(line, ParseErrorKind::Malformed("n <id> s|t"));
                }
                let id = parse_node_id(tokens[1], nodes, line)?;
                match tokens[2] {
                    "s" => {
                        if source.is_some() {
                            return err(line, ParseErrorKind::DuplicateSource);
                        }
                        if sink == Some(id) {
                            return err(line, ParseErrorKind::SourceEqualsSink);
                        }
                        source = Some(id);
                    }
                    "t" => {
                        if sink.is_some() {
                            return err(line, ParseErrorKind::DuplicateSink);
                        }
                        if source == Some(id) {
                            return err(line, ParseErrorKind::SourceEqualsSink);
                        }
                        sink = Some(id);
                    }
                    role => return err(line, ParseErrorKind::BadNodeRole(role.to_string())),
                }
            }
            "a" => {
                let Some((nodes, _, _)) = problem else {
                    return err(line, ParseErrorKind::MissingProblemLine);
                };
                if tokens.len() != 4 {
                    return err(line, ParseErrorKind::Malformed("a <tail> <head> <cap>"));
                }
                let tail = parse_node_id(tokens[1], nodes, line)?;
                let head = parse_node_id(tokens[2], nodes, line)?;
                if tail == head {
                    return err(line, ParseErrorKind::SelfLoopArc);
                }
                capacities.push(parse_capacity(tokens[3], line)?);
                edges.push((tail, head));
            }
            tag => return err(line, ParseErrorKind::UnknownLineType(tag.to_string())),
        }
    }

    let Some((nodes, arcs, problem_line)) = problem else {
        return err(last_line.max(1), ParseErrorKind::MissingProblemLine);
    };
    let Some(source) = source else {
        return err(problem_line, ParseErrorKind::MissingSource);
    };
    let Some(sink) = sink else {
        return err(problem_line, ParseErrorKind::MissingSink);
    };
    if edges.len() != arcs {
        return err(
            problem_line,
            ParseErrorKind::ArcCountMismatch {
                declared: arcs,
                found: edges.len(),
            },
        );
    }
    Ok(FlowNetwork::new(nodes, edges, capacities, source, sink)
        .expect("parser enforces every construction invariant"))
}

/// Serializes a network canonically: problem line, source, sink, then arcs
/// in edge order, no comments. `parse_network(serialize_network(n)) == n`.
pub fn serialize_network(network: &FlowNetwork) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "p max {} {}\n",
        network.node_count(),
        network.edge_count()
    ));
    out.push_str(&format!("n {} s\n", network.source() + 1));
    out.push_str(&format!("n {} t\n", network.sink() + 1));
    for (e, &(u, v)) in network.edges().iter().enumerate() {
        out.push_str(&format!("a {} {} {}\n", u + 1, v + 1, network.capacity(e)));
    }
    out
}

/// Parses a flow file against the network it is bound to. The header's arc
/// count must match the network's edge count; the instance name is carried
/// for humans and not validated (networks do not store names). Values may
/// exceed capacities, since predictions are allowed to be infeasible.
pub fn parse_flow(text: &str, network: &FlowNetwork) -> Result<FlowAssignment, FormatError> {
    let edge_count = network.edge_count();
    let mut header_line: Option<usize> = None;
    let mut values: Vec<Option<i64>> = vec![None; edge_count];
    let mut last_line = 0;

    for (line, tokens) in tokenized(text) {
        last_line = line;
        match tokens[0] {
            "c" => {}
            "f" => {
                if header_line.is_some() {
                    return err(line, ParseErrorKind::DuplicateFlowHeader);
                }
                if tokens.len() != 3 {
                    return err(line, ParseErrorKind::Malformed("f <instance-name> <arcs>"));
                }
                let arcs = parse_count(tokens[2], line)?;
                if arcs != edge_count {
                    return Err(FormatError::Binding(format!(
                        "flow file declares {arcs} arcs but the instance has {edge_count} edges"
                    )));
                }
                header_line = Some(line);
            }
            "e" => {
                if header_line.is_none() {
                    return err(line, ParseErrorKind::MissingFlowHeader);
                }
                if tokens.len() != 3 {
                    return err(line, ParseErrorKind::Malformed("e <edge-index> <value>"));
                }
                let index: u64 = match tokens[1].parse() {
                    Ok(i) => i,
                    Err(_) => return err(line, ParseErrorKind::BadInteger(tokens[1].to_string())),
                };
                if index >= edge_count as u64 {
                    return err(
                        line,
                        ParseErrorKind::EdgeIndexOutOfRange {
                            index,
                            count: edge_count,
                        },
                    );
                }
                let index = index as usize;
                let value = match tokens[2].parse::<i64>() {
                    Ok(v) if v >= 0 => v,
                    _ => return err(line, ParseErrorKind::BadFlowValue),
                };
                if values[index].is_some() {
                    return err(line, ParseErrorKind::DuplicateEdgeRecord { index });
                }
                values[index] = Some(value);
            }
            tag => return err(line, ParseErrorKind::UnknownLineType(tag.to_string())),
        }
    }

    let Some(header_line) = header_line else {
        return err(last_line.max(1), ParseErrorKind::MissingFlowHeader);
    };
    if let Some(index) = values.iter().position(Option::is_none) {
        return err(header_line, ParseErrorKind::MissingEdgeRecord { index });
    }
    let values = values.into_iter().map(Option::unwrap).collect();
    Ok(FlowAssignment::new(values).expect("parser rejects negative values"))
}

/// Serializes a flow bound to `network` under the given instance name.
/// Whitespace in the name is replaced so the header stays parseable.
pub fn serialize_flow(
    network: &FlowNetwork,
    f: &FlowAssignment,
    instance_name: &str,
) -> Result<String, FormatError> {
    if f.len() != network.edge_count() {
        return Err(FormatError::Binding(format!(
            "flow has {} values but the instance has {} edges",
            f.len(),
            network.edge_count()
        )));
    }
    let name: String = if instance_name.is_empty() {
        "instance".to_string()
    } else {
        instance_name
            .chars()
            .map(|c| if c.is_whitespace() { '_' } else { c })
            .collect()
    };
    let mut out = format!("f {} {}\n", name, f.len());
    for (e, &v) in f.values().iter().enumerate() {
        out.push_str(&format!("e {e} {v}\n"));
    }
    Ok(out)
}

/// Parses one capacity-vector sample file: a `k <index>` header, then one
/// nonnegative integer per edge, in edge order. Comment lines allowed.
pub fn parse_sample(
    text: &str,
    expected_index: usize,
    edge_count: usize,
) -> Result<Vec<i64>, FormatError> {
    let mut header_line: Option<usize> = None;
    let mut values: Vec<i64> = Vec::new();
    let mut last_line = 0;

    for (line, tokens) in tokenized(text) {
        last_line = line;
        match tokens[0] {
            "c" => {}
            "k" => {
                if header_line.is_some() {
                    return err(line, ParseErrorKind::Malformed("one k header per sample"));
                }
                if tokens.len() != 2 {
                    return err(line, ParseErrorKind::Malformed("k <index>"));
                }
                let declared: u64 = match tokens[1].parse() {
                    Ok(i) => i,
                    Err(_) => return err(line, ParseErrorKind::BadInteger(tokens[1].to_string())),
                };
                if declared != expected_index as u64 {
                    return err(
                        line,
                        ParseErrorKind::SampleIndexMismatch {
                            declared,
                            expected: expected_index,
                        },
                    );
                }
                header_line = Some(line);
            }
            _ => {
                if header_line.is_none() {
                    return err(line, ParseErrorKind::MissingSampleHeader);
                }
                if tokens.len() != 1 {
                    return err(line, ParseErrorKind::Malformed("<capacity>"));
                }
                values.push(parse_capacity(tokens[0], line)?);
            }
        }
    }

    let Some(header_line) = header_line else {
        return err(last_line.max(1), ParseErrorKind::MissingSampleHeader);
    };
    if values.len() != edge_count {
        return err(
            header_line,
            ParseErrorKind::WrongValueCount {
                expected: edge_count,
                actual: values.len(),
            },
        );
    }
    Ok(values)
}

/// Serializes one sample file.
pub fn serialize_sample(index: usize, capacities: &[i64]) -> String {
    let mut out = format!("k {index}\n");
    for &c in capacities {
        out.push_str(&format!("{c}\n"));
    }
    out
}

/// Name of the instance file inside a sample directory.
pub const SAMPLE_DIR_INSTANCE: &str = "instance.dimacs";

fn sample_file_name(index: usize) -> String {
    format!("sample_{index:05}.caps")
}

fn io_error<T>(path: &Path, e: std::io::Error) -> Result<T, FormatError> {
    Err(FormatError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes a sample collection: `instance.dimacs` plus one
/// `sample_<index>.caps` file per capacity vector.
pub fn write_sample_dir(
    dir: &Path,
    network: &FlowNetwork,
    samples: &[Vec<i64>],
) -> Result<(), FormatError> {
    if let Err(e) = fs::create_dir_all(dir) {
        return io_error(dir, e);
    }
    let instance_path = dir.join(SAMPLE_DIR_INSTANCE);
    if let Err(e) = fs::write(&instance_path, serialize_network(network)) {
        return io_error(&instance_path, e);
    }
    for (i, sample) in samples.iter().enumerate() {
        let path = dir.join(sample_file_name(i));
        if let Err(e) = fs::write(&path, serialize_sample(i, sample)) {
            return io_error(&path, e);
        }
    }
    Ok(())
}

/// Reads a sample collection written by [`write_sample_dir`]. Sample files
/// are taken in ascending index order and each must declare its position.
/// Every vector is validated against the instance's edge count.
pub fn read_sample_dir(dir: &Path) -> Result<(FlowNetwork, Vec<Vec<i64>>), FormatError> {
    let instance_path = dir.join(SAMPLE_DIR_INSTANCE);
    let text = match fs::read_to_string(&instance_path) {
        Ok(t) => t,
        Err(e) => return io_error(&instance_path, e),
    };
    let network = parse_network(&text)?;

    let entries = match fs::read_dir(dir) {
        Ok(it) => it,
        Err(e) => return io_error(dir, e),
    };
    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => return io_error(dir, e),
        };
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with("sample_") && name.ends_with(".caps") {
            names.push(name);
        }
    }
    names.sort();

    let mut samples = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        let path = dir.join(name);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => return io_error(&path, e),
        };
        samples.push(parse_sample(&text, i, network.edge_count())?);
    }
    Ok((network, samples))
}

/// Parses a capacity-distribution spec.
///
/// Grammar (one record per line, `c` comments allowed anywhere):
///
/// ```text
/// d finite <edges>          header: variant and edge count
/// x <c_max>                 declared coordinate bound (validated)
/// v <num>/<den> <cap>...    one support vector with its probability
///
/// d uniform <edges>
/// x <c_max>
/// l <lo>...                 per-edge lower bounds
/// h <hi>...                 per-edge upper bounds
///
/// d perturbed <edges>
/// x <c_max>
/// b <base>...               base capacity vector
/// r <radius>                max additive perturbation (truncated at 0)
/// ```
pub fn parse_distribution(text: &str) -> Result<CapacityDistribution, FormatError> {
    #[derive(PartialEq)]
    enum Variant {
        Finite,
        Uniform,
        Perturbed,
    }
    let mut header: Option<(Variant, usize, usize)> = None;
    let mut declared_cmax: Option<(i64, usize)> = None;
    let mut support: Vec<(Rational, Vec<i64>)> = Vec::new();
    let mut lo: Option<Vec<i64>> = None;
    let mut hi: Option<(Vec<i64>, usize)> = None;
    let mut base: Option<Vec<i64>> = None;
    let mut radius: Option<i64> = None;
    let mut last_line = 0;

    let parse_vector = |tokens: &[&str], edges: usize, line: usize| -> Result<Vec<i64>, FormatError> {
        if tokens.len() != edges {
            return err(
                line,
                ParseErrorKind::WrongValueCount {
                    expected: edges,
                    actual: tokens.len(),
                },
            );
        }
        tokens.iter().map(|t| parse_capacity(t, line)).collect()
    };

    for (line, tokens) in tokenized(text) {
        last_line = line;
        let tag = tokens[0];
        if tag == "c" {
            continue;
        }
        if tag == "d" {
            if header.is_some() {
                return err(line, ParseErrorKind::DuplicateDistributionHeader);
            }
            if tokens.len() != 3 {
                return err(line, ParseErrorKind::Malformed("d <variant> <edges>"));
            }
            let variant = match tokens[1] {
                "finite" => Variant::Finite,
                "uniform" => Variant::Uniform,
                "perturbed" => Variant::Perturbed,
                other => {
                    return err(
                        line,
                        ParseErrorKind::UnknownDistributionVariant(other.to_string()),
                    )
                }
            };
            let edges = parse_count(tokens[2], line)?;
            header = Some((variant, edges, line));
            continue;
        }
        let Some((ref variant, edges, _)) = header else {
            return err(line, ParseErrorKind::MissingDistributionHeader);
        };
        match (tag, variant) {
            ("x", _) => {
                if tokens.len() != 2 {
                    return err(line, ParseErrorKind::Malformed("x <c_max>"));
                }
                declared_cmax = Some((parse_capacity(tokens[1], line)?, line));
            }
            ("v", Variant::Finite) => {
                if tokens.len() < 2 {
                    return err(line, ParseErrorKind::Malformed("v <num>/<den> <cap>..."));
                }
                let prob = parse_probability(tokens[1], line)?;
                let vector = parse_vector(&tokens[2..], edges, line)?;
                support.push((prob, vector));
            }
            ("l", Variant::Uniform) => lo = Some(parse_vector(&tokens[1..], edges, line)?),
            ("h", Variant::Uniform) => {
                hi = Some((parse_vector(&tokens[1..], edges, line)?, line))
            }
            ("b", Variant::Perturbed) => base = Some(parse_vector(&tokens[1..], edges, line)?),
            ("r", Variant::Perturbed) => {
                if tokens.len() != 2 {
                    return err(line, ParseErrorKind::Malformed("r <radius>"));
                }
                radius = Some(parse_capacity(tokens[1], line)?);
            }
            _ => return err(line, ParseErrorKind::UnknownLineType(tag.to_string())),
        }
    }

    let Some((variant, _, header_line)) = header else {
        return err(last_line.max(1), ParseErrorKind::MissingDistributionHeader);
    };
    let Some((declared, cmax_line)) = declared_cmax else {
        return err(header_line, ParseErrorKind::MissingDistributionField("x"));
    };

    let dist = match variant {
        Variant::Finite => {
            if support.is_empty() {
                return err(header_line, ParseErrorKind::MissingDistributionField("v"));
            }
            let total: Rational = support.iter().map(|(p, _)| *p).sum();
            if total != Rational::from_integer(1) {
                return err(header_line, ParseErrorKind::ProbabilitySum);
            }
            let (probs, vectors): (Vec<_>, Vec<_>) = support.into_iter().unzip();
            CapacityDistribution::finite_support(vectors, probs)
                .expect("parser validated the finite support")
        }
        Variant::Uniform => {
            let Some(lo) = lo else {
                return err(header_line, ParseErrorKind::MissingDistributionField("l"));
            };
            let Some((hi, hi_line)) = hi else {
                return err(header_line, ParseErrorKind::MissingDistributionField("h"));
            };
            if lo.iter().zip(hi.iter()).any(|(a, b)| a > b) {
                return err(hi_line, ParseErrorKind::BadUniformBounds);
            }
            CapacityDistribution::iid_uniform(lo, hi).expect("parser validated the bounds")
        }
        Variant::Perturbed => {
            let Some(base) = base else {
                return err(header_line, ParseErrorKind::MissingDistributionField("b"));
            };
            let Some(radius) = radius else {
                return err(header_line, ParseErrorKind::MissingDistributionField("r"));
            };
            CapacityDistribution::perturbed_base(base, radius)
                .expect("parser validated the base vector")
        }
    };
    let actual = dist.c_max();
    if declared != actual {
        return err(
            cmax_line,
            ParseErrorKind::CMaxMismatch {
                declared,
                actual,
            },
        );
    }
    Ok(dist)
}

fn parse_probability(token: &str, line: usize) -> Result<Rational, FormatError> {
    let Some((num, den)) = token.split_once('/') else {
        return err(line, ParseErrorKind::BadProbability);
    };
    let (Ok(num), Ok(den)) = (num.parse::<i64>(), den.parse::<i64>()) else {
        return err(line, ParseErrorKind::BadProbability);
    };
    if num <= 0 || den <= 0 {
        return err(line, ParseErrorKind::BadProbability);
    }
    Ok(Rational::new(num, den))
}

/// Serializes a distribution; round-trips through [`parse_distribution`].
pub fn serialize_distribution(dist: &CapacityDistribution) -> String {
    fn join(values: &[i64]) -> String {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
    let mut out = String::new();
    match dist.kind() {
        DistributionKind::FiniteSupport { vectors, probs } => {
            out.push_str(&format!("d finite {}\n", dist.edge_count()));
            out.push_str(&format!("x {}\n", dist.c_max()));
            for (p, v) in probs.iter().zip(vectors.iter()) {
                out.push_str(&format!("v {}/{} {}\n", p.numer(), p.denom(), join(v)));
            }
        }
        DistributionKind::IidUniform { lo, hi } => {
            out.push_str(&format!("d uniform {}\n", dist.edge_count()));
            out.push_str(&format!("x {}\n", dist.c_max()));
            out.push_str(&format!("l {}\n", join(lo)));
            out.push_str(&format!("h {}\n", join(hi)));
        }
        DistributionKind::PerturbedBase { base, radius } => {
            out.push_str(&format!("d perturbed {}\n", dist.edge_count()));
            out.push_str(&format!("x {}\n", dist.c_max()));
            out.push_str(&format!("b {}\n", join(base)));
            out.push_str(&format!("r {radius}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{diamond, flow};

    #[test]
    fn parse_single_edge_network() {
        let net = parse_network("p max 2 1\nn 1 s\nn 2 t\na 1 2 5\n").unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edges(), &[(0, 1)]);
        assert_eq!(net.capacities(), &[5]);
        assert_eq!((net.source(), net.sink()), (0, 1));
    }

    #[test]
    fn parse_edgeless_network() {
        let net = parse_network("c empty\np max 2 0\nn 1 s\nn 2 t\n").unwrap();
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn network_round_trip_on_diamond() {
        let net = diamond();
        let text = serialize_network(&net);
        assert_eq!(parse_network(&text).unwrap(), net);
        // Canonical body is stable, including edge order.
        assert_eq!(
            text,
            "p max 4 5\nn 1 s\nn 4 t\na 1 2 2\na 1 3 2\na 2 4 2\na 3 4 2\na 2 3 1\n"
        );
    }

    #[test]
    fn network_parse_errors_carry_lines() {
        let cases: Vec<(&str, usize, ParseErrorKind)> = vec![
            (
                "p max 2 1\nn 1 s\nn 2 t\nz 1 2 3\n",
                4,
                ParseErrorKind::UnknownLineType("z".to_string()),
            ),
            (
                "p max 2 1\nn 1 s\nn 1 t\na 1 2 1\n",
                3,
                ParseErrorKind::SourceEqualsSink,
            ),
            (
                "p max 2 1\nn 1 s\nn 2 t\na 1 2 -4\n",
                4,
                ParseErrorKind::BadCapacity,
            ),
            (
                "p max 2 1\nn 1 s\nn 2 t\na 1 3 1\n",
                4,
                ParseErrorKind::NodeIdOutOfRange { id: 3, max: 2 },
            ),
            (
                "p max 2 2\nn 1 s\nn 2 t\na 1 2 1\n",
                1,
                ParseErrorKind::ArcCountMismatch {
                    declared: 2,
                    found: 1,
                },
            ),
            (
                "p max 2 1\nn 2 t\na 1 2 1\n",
                1,
                ParseErrorKind::MissingSource,
            ),
        ];
        for (text, line, kind) in cases {
            assert_eq!(
                parse_network(text),
                Err(FormatError::Parse { line, kind }),
                "input: {text:?}"
            );
        }
    }

    #[test]
    fn flow_round_trip() {
        let net = diamond();
        let f = flow(&[1, 1, 1, 1, 0]);
        let text = serialize_flow(&net, &f, "diamond").unwrap();
        assert_eq!(parse_flow(&text, &net).unwrap(), f);
        let zero = FlowAssignment::zero(5);
        let text = serialize_flow(&net, &zero, "diamond").unwrap();
        assert_eq!(parse_flow(&text, &net).unwrap(), zero);
    }

    #[test]
    fn infeasible_flow_parses() {
        let net = diamond();
        let f = flow(&[9, 9, 9, 9, 9]);
        let text = serialize_flow(&net, &f, "overfull").unwrap();
        assert_eq!(parse_flow(&text, &net).unwrap(), f);
    }

    #[test]
    fn flow_parse_errors() {
        let net = diamond();
        assert_eq!(
            parse_flow("f d 5\ne 0 1\ne 1 -2\ne 2 0\ne 3 0\ne 4 0\n", &net),
            Err(FormatError::Parse {
                line: 3,
                kind: ParseErrorKind::BadFlowValue
            })
        );
        assert_eq!(
            parse_flow("f d 5\ne 0 1\ne 0 2\n", &net),
            Err(FormatError::Parse {
                line: 3,
                kind: ParseErrorKind::DuplicateEdgeRecord { index: 0 }
            })
        );
        assert_eq!(
            parse_flow("f d 5\ne 0 1\n", &net),
            Err(FormatError::Parse {
                line: 1,
                kind: ParseErrorKind::MissingEdgeRecord { index: 1 }
            })
        );
        assert!(matches!(
            parse_flow("f d 4\n", &net),
            Err(FormatError::Binding(_))
        ));
    }

    #[test]
    fn sample_round_trip() {
        let text = serialize_sample(3, &[1, 0, 2]);
        assert_eq!(parse_sample(&text, 3, 3).unwrap(), vec![1, 0, 2]);
        assert_eq!(
            parse_sample(&text, 4, 3),
            Err(FormatError::Parse {
                line: 1,
                kind: ParseErrorKind::SampleIndexMismatch {
                    declared: 3,
                    expected: 4
                }
            })
        );
        assert_eq!(
            parse_sample(&text, 3, 4),
            Err(FormatError::Parse {
                line: 1,
                kind: ParseErrorKind::WrongValueCount {
                    expected: 4,
                    actual: 3
                }
            })
        );
    }

    #[test]
    fn sample_dir_round_trip() {
        let dir = std::env::temp_dir().join(format!("predflow-fmt-{}", std::process::id()));
        let net = diamond();
        let samples = vec![vec![1, 2, 0, 1, 2], vec![0, 0, 0, 0, 0]];
        write_sample_dir(&dir, &net, &samples).unwrap();
        let (read_net, read_samples) = read_sample_dir(&dir).unwrap();
        assert_eq!(read_net, net);
        assert_eq!(read_samples, samples);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn distribution_round_trips() {
        let finite = CapacityDistribution::finite_support(
            vec![vec![1, 2], vec![3, 0]],
            vec![Rational::new(1, 4), Rational::new(3, 4)],
        )
        .unwrap();
        let uniform = CapacityDistribution::iid_uniform(vec![0, 1], vec![2, 5]).unwrap();
        let perturbed = CapacityDistribution::perturbed_base(vec![4, 4], 2).unwrap();
        for dist in [finite, uniform, perturbed] {
            let text = serialize_distribution(&dist);
            assert_eq!(parse_distribution(&text).unwrap(), dist, "text: {text}");
        }
    }

    #[test]
    fn distribution_parse_errors() {
        assert_eq!(
            parse_distribution("d gaussian 2\n"),
            Err(FormatError::Parse {
                line: 1,
                kind: ParseErrorKind::UnknownDistributionVariant("gaussian".to_string())
            })
        );
        assert_eq!(
            parse_distribution("d finite 2\nx 3\nv 1/2 1 2\nv 1/4 3 0\n"),
            Err(FormatError::Parse {
                line: 1,
                kind: ParseErrorKind::ProbabilitySum
            })
        );
        assert_eq!(
            parse_distribution("d finite 2\nx 9\nv 1/2 1 2\nv 1/2 3 0\n"),
            Err(FormatError::Parse {
                line: 2,
                kind: ParseErrorKind::CMaxMismatch {
                    declared: 9,
                    actual: 3
                }
            })
        );
        assert_eq!(
            parse_distribution("d uniform 2\nx 5\nl 3 3\nh 2 5\n"),
            Err(FormatError::Parse {
                line: 4,
                kind: ParseErrorKind::BadUniformBounds
            })
        );
    }
}
