//! Capacity distributions, seeded draws, and sample-count bounds.
//!
//! A [`CapacityDistribution`] models where capacity vectors come from.
//! Finite-support distributions list every possible vector with a rational
//! probability and therefore support exact expected-cost computation; the
//! two generative variants (per-edge iid uniform, perturbed base vector)
//! only support drawing, with expected costs estimated empirically.
//!
//! Draws take any [`rand::Rng`]. Everything in this crate that consumes
//! randomness is seeded from a `u64` through `ChaCha8Rng`, using one stream
//! per trial (`set_stream`), so any recorded trial replays bit-for-bit.

use num_integer::Integer;
use rand::Rng;

use crate::graph::{add, mul, FlowAssignment, FlowError};
use crate::maxflow::max_flow_from;
use crate::{FlowNetwork, Rational};

/// The shape of a capacity distribution. Obtained from
/// [`CapacityDistribution::kind`]; build distributions through the
/// validating constructors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistributionKind {
    /// Every possible capacity vector, with positive probabilities summing
    /// to 1.
    FiniteSupport {
        vectors: Vec<Vec<i64>>,
        probs: Vec<Rational>,
    },
    /// Each edge independently uniform on `lo[e]..=hi[e]`.
    IidUniform { lo: Vec<i64>, hi: Vec<i64> },
    /// A base vector plus, per edge, an independent uniform additive
    /// perturbation in `-radius..=radius`, truncated at 0.
    PerturbedBase { base: Vec<i64>, radius: i64 },
}

/// A validated distribution over capacity vectors for a fixed edge count,
/// with a declared coordinate bound `c_max` that every draw satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityDistribution {
    kind: DistributionKind,
    edge_count: usize,
    c_max: i64,
}

impl CapacityDistribution {
    pub fn finite_support(
        vectors: Vec<Vec<i64>>,
        probs: Vec<Rational>,
    ) -> Result<Self, FlowError> {
        if vectors.is_empty() {
            return Err(FlowError::InvalidParameter(
                "finite support needs at least one vector",
            ));
        }
        if probs.len() != vectors.len() {
            return Err(FlowError::LengthMismatch {
                expected: vectors.len(),
                actual: probs.len(),
            });
        }
        let edge_count = vectors[0].len();
        let mut c_max = 0i64;
        for vector in &vectors {
            if vector.len() != edge_count {
                return Err(FlowError::LengthMismatch {
                    expected: edge_count,
                    actual: vector.len(),
                });
            }
            for (edge, &c) in vector.iter().enumerate() {
                if c < 0 {
                    return Err(FlowError::NegativeCapacity { edge });
                }
                c_max = c_max.max(c);
            }
        }
        if probs.iter().any(|p| *p <= Rational::from_integer(0)) {
            return Err(FlowError::InvalidParameter(
                "support probabilities must be positive",
            ));
        }
        if probs.iter().sum::<Rational>() != Rational::from_integer(1) {
            return Err(FlowError::InvalidParameter(
                "support probabilities must sum to 1",
            ));
        }
        Ok(CapacityDistribution {
            kind: DistributionKind::FiniteSupport { vectors, probs },
            edge_count,
            c_max,
        })
    }

    pub fn iid_uniform(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self, FlowError> {
        if hi.len() != lo.len() {
            return Err(FlowError::LengthMismatch {
                expected: lo.len(),
                actual: hi.len(),
            });
        }
        for (edge, (&l, &h)) in lo.iter().zip(hi.iter()).enumerate() {
            if l < 0 {
                return Err(FlowError::NegativeCapacity { edge });
            }
            if l > h {
                return Err(FlowError::InvalidParameter(
                    "per-edge lower bound exceeds upper bound",
                ));
            }
        }
        let edge_count = lo.len();
        let c_max = hi.iter().copied().max().unwrap_or(0);
        Ok(CapacityDistribution {
            kind: DistributionKind::IidUniform { lo, hi },
            edge_count,
            c_max,
        })
    }

    pub fn perturbed_base(base: Vec<i64>, radius: i64) -> Result<Self, FlowError> {
        if let Some(edge) = base.iter().position(|&b| b < 0) {
            return Err(FlowError::NegativeCapacity { edge });
        }
        if radius < 0 {
            return Err(FlowError::InvalidParameter(
                "perturbation radius must be nonnegative",
            ));
        }
        let edge_count = base.len();
        let c_max = add(base.iter().copied().max().unwrap_or(0), radius);
        Ok(CapacityDistribution {
            kind: DistributionKind::PerturbedBase { base, radius },
            edge_count,
            c_max,
        })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Upper bound on any coordinate of any drawable vector.
    pub fn c_max(&self) -> i64 {
        self.c_max
    }

    /// Support vectors and probabilities, for finite-support distributions.
    pub fn support(&self) -> Option<(&[Vec<i64>], &[Rational])> {
        match &self.kind {
            DistributionKind::FiniteSupport { vectors, probs } => Some((vectors, probs)),
            _ => None,
        }
    }

    /// Draws one capacity vector. Every coordinate is asserted to lie in
    /// `0..=c_max`.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Vec<i64> {
        let vector = match &self.kind {
            DistributionKind::FiniteSupport { vectors, .. } => {
                vectors[self.draw_support_index(rng).unwrap()].clone()
            }
            DistributionKind::IidUniform { lo, hi } => lo
                .iter()
                .zip(hi.iter())
                .map(|(&l, &h)| rng.random_range(l..=h))
                .collect(),
            DistributionKind::PerturbedBase { base, radius } => base
                .iter()
                .map(|&b| (b + rng.random_range(-radius..=*radius)).max(0))
                .collect(),
        };
        assert!(
            vector.iter().all(|&c| (0..=self.c_max).contains(&c)),
            "draw escaped the declared c_max bound"
        );
        vector
    }

    /// Draws a support index according to the declared probabilities.
    /// `None` for generative distributions.
    pub fn draw_support_index<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        let DistributionKind::FiniteSupport { probs, .. } = &self.kind else {
            return None;
        };
        let denom = probs.iter().fold(1i64, |acc, p| acc.lcm(p.denom()));
        let mut roll = rng.random_range(0..denom);
        for (i, p) in probs.iter().enumerate() {
            let weight = mul(*p.numer(), denom / p.denom());
            if roll < weight {
                return Some(i);
            }
            roll -= weight;
        }
        unreachable!("probabilities sum to 1, so the roll lands in some bucket");
    }

    /// Expected prediction error of `f` under the distribution, exactly:
    /// the probability-weighted sum of L1 distances to the per-support
    /// optima, which the caller precomputes (element `i` of `optima` must
    /// be a maximum flow under support vector `i`).
    pub fn expected_cost(
        &self,
        f: &FlowAssignment,
        optima: &[FlowAssignment],
    ) -> Result<Rational, FlowError> {
        let Some((vectors, probs)) = self.support() else {
            return Err(FlowError::InvalidParameter(
                "expected_cost requires a finite-support distribution",
            ));
        };
        if optima.len() != vectors.len() {
            return Err(FlowError::LengthMismatch {
                expected: vectors.len(),
                actual: optima.len(),
            });
        }
        let mut total = Rational::from_integer(0);
        for (p, opt) in probs.iter().zip(optima.iter()) {
            total += *p * Rational::from_integer(f.l1_distance(opt)?);
        }
        Ok(total)
    }
}

/// Default number of draws when estimating expected costs of generative
/// distributions empirically.
pub const ESTIMATE_DRAWS: usize = 10_000;

/// Empirical estimate of the expected prediction error of `f`: averages
/// `||f - f*(c)||` over `draws` drawn capacity vectors, solving each drawn
/// instance exactly. Works for any distribution variant; the result is the
/// exact rational average of the sampled errors.
pub fn estimate_cost<R: Rng>(
    dist: &CapacityDistribution,
    network: &FlowNetwork,
    f: &FlowAssignment,
    draws: usize,
    rng: &mut R,
) -> Result<Rational, FlowError> {
    if draws == 0 {
        return Err(FlowError::InvalidParameter("draws must be at least 1"));
    }
    if network.edge_count() != dist.edge_count() {
        return Err(FlowError::LengthMismatch {
            expected: dist.edge_count(),
            actual: network.edge_count(),
        });
    }
    let zero = FlowAssignment::zero(network.edge_count());
    let mut total = 0i64;
    for _ in 0..draws {
        let caps = dist.draw(rng);
        let instance = network.with_capacities(caps)?;
        let (opt, _) = max_flow_from(&instance, &zero)?;
        total = add(total, f.l1_distance(&opt)?);
    }
    Ok(Rational::new(total, draws as i64))
}

/// Default failure probability for the sample-count bound:
/// `1 / (c_max·|E| + 2)^2`.
pub fn default_failure_prob(c_max: i64, edge_count: usize) -> f64 {
    let base = c_max as f64 * edge_count as f64 + 2.0;
    1.0 / (base * base)
}

fn hoeffding_raw(c_max: i64, edge_count: usize, failure_prob: f64) -> Result<f64, FlowError> {
    if c_max < 0 {
        return Err(FlowError::InvalidParameter("c_max must be nonnegative"));
    }
    if edge_count == 0 {
        return Err(FlowError::InvalidParameter("edge count must be at least 1"));
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        return Err(FlowError::InvalidParameter(
            "failure probability must lie strictly between 0 and 1",
        ));
    }
    let c = c_max as f64;
    let m = edge_count as f64;
    let log_terms = m * (2.0 * c * m + 1.0).ln() + (2.0 / failure_prob).ln();
    Ok(4.5 * c * c * m * m * log_terms)
}

/// Number of samples after which, with probability at least
/// `1 - failure_prob`, every candidate prediction's sample-average error
/// tracks its true expected error within 1:
///
/// ```text
/// k = ceil( (9/2) · c_max² · |E|² · ( |E|·ln(2·c_max·|E| + 1) + ln(2/p) ) )
/// ```
///
/// This is the exact union-bound solution for per-hypothesis deviation 1
/// over the `(2·c_max·|E| + 1)^|E|` candidate predictions, floored at 1.
pub fn hoeffding_sample_count(
    c_max: i64,
    edge_count: usize,
    failure_prob: f64,
) -> Result<u64, FlowError> {
    let raw = hoeffding_raw(c_max, edge_count, failure_prob)?.ceil();
    if raw > u64::MAX as f64 {
        return Err(FlowError::InvalidParameter(
            "sample count overflows a 64-bit integer",
        ));
    }
    Ok((raw as u64).max(1))
}

/// Variant of [`hoeffding_sample_count`] carrying the extra `log|E|`
/// factor of the pseudo-dimension route (which also covers fractional
/// predictions). Documented for comparison; not used by default.
pub fn hoeffding_sample_count_log_factor(
    c_max: i64,
    edge_count: usize,
    failure_prob: f64,
) -> Result<u64, FlowError> {
    let raw = hoeffding_raw(c_max, edge_count, failure_prob)?;
    let factor = (edge_count as f64).ln().max(1.0);
    let scaled = (raw * factor).ceil();
    if scaled > u64::MAX as f64 {
        return Err(FlowError::InvalidParameter(
            "sample count overflows a 64-bit integer",
        ));
    }
    Ok((scaled as u64).max(1))
}
