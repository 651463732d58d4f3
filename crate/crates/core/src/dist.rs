//! Reward and cost distributions, all supported on `[0, 1]` with closed-form
//! means.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
use crate::CoreError;

/// Tolerance for "probabilities sum to one" checks.
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// A finite-support distribution on `[0, 1]`.
///
/// `Fixed` is the degenerate point mass, used to model deterministic-cost
/// settings. Sampling any variant consumes exactly one stream value (`Fixed`
/// included, so swapping a distribution never shifts later draws).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSpec {
    Bernoulli { p: f64 },
    Multinomial { support: Vec<f64>, probs: Vec<f64> },
    Fixed { v: f64 },
}

fn in_unit(x: f64) -> bool {
    x.is_finite() && (0.0..=1.0).contains(&x)
}

impl DistributionSpec {
    pub fn bernoulli(p: f64) -> Self {
        Self::Bernoulli { p }
    }

    pub fn multinomial(support: Vec<f64>, probs: Vec<f64>) -> Self {
        Self::Multinomial { support, probs }
    }

    pub fn fixed(v: f64) -> Self {
        Self::Fixed { v }
    }

    /// Checks the type invariants: all values in `[0, 1]`, probabilities
    /// nonnegative and summing to one within [`PROB_SUM_TOLERANCE`].
    pub fn validate(&self) -> Result<(), CoreError> {
        match self {
            Self::Bernoulli { p } => {
                if !in_unit(*p) {
                    return Err(CoreError::InvalidProbability(*p));
                }
            }
            Self::Multinomial { support, probs } => {
                if support.is_empty() || support.len() != probs.len() {
                    return Err(CoreError::MalformedSupport {
                        support: support.len(),
                        probs: probs.len(),
                    });
                }
                for &s in support {
                    if !in_unit(s) {
                        return Err(CoreError::SupportOutOfRange(s));
                    }
                }
                for &p in probs {
                    if !p.is_finite() || p < 0.0 {
                        return Err(CoreError::InvalidProbability(p));
                    }
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
                    return Err(CoreError::ProbabilitiesDoNotSumToOne(total));
                }
            }
            Self::Fixed { v } => {
                if !in_unit(*v) {
                    return Err(CoreError::SupportOutOfRange(*v));
                }
            }
        }
        Ok(())
    }

    /// Closed-form expectation.
    pub fn exact_mean(&self) -> f64 {
        match self {
            Self::Bernoulli { p } => *p,
            Self::Multinomial { support, probs } => {
                support.iter().zip(probs).map(|(s, p)| s * p).sum()
            }
            Self::Fixed { v } => *v,
        }
    }

    /// True if this is a `{0, 1}`-valued Bernoulli distribution.
    pub fn is_bernoulli(&self) -> bool {
        matches!(self, Self::Bernoulli { .. })
    }

    /// One i.i.d. draw. Consumes exactly one stream value for every variant.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.next_unit();
        match self {
            Self::Bernoulli { p } => {
                if u < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Multinomial { support, probs } => {
                let mut cum = 0.0;
                for (s, p) in support.iter().zip(probs) {
                    cum += p;
                    if u < cum {
                        return *s;
                    }
                }
                // Rounding residue in the cumulative sum; the last value owns it.
                *support.last().expect("validated support is nonempty")
            }
            Self::Fixed { v } => *v,
        }
    }
}

/// A Bernoulli trial with success probability `x`, consuming one stream value.
///
/// This is the reduction that lets general `[0, 1]`-valued outcomes feed
/// binary success/failure counters: the trial's expectation equals `x`, so a
/// trial on a random outcome has the outcome's mean.
pub fn bernoulli_trial(x: f64, rng: &mut RngStream) -> Result<bool, CoreError> {
    if !in_unit(x) {
        return Err(CoreError::TrialProbabilityOutOfRange(x));
    }
    Ok(rng.next_unit() < x)
}
