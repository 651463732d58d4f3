//! Closed-form gap quantities and regret-bound constants.
//!
//! Everything here is pure arithmetic on an instance's exact means: the
//! two γ-parameterized ratio gaps and their matching identity, the
//! logarithmic-regret coefficients for the posterior-sampling policy and the
//! cost-aware confidence-bound baseline, and an exact finite-sum Beta CDF
//! used as a numerical cross-check target.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::instance::BanditInstance;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("gamma must lie in the open interval (0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("arm {arm} is not suboptimal")]
    NotSuboptimal { arm: usize },
    #[error("arm {arm}: mean cost minus its ratio gap is not positive")]
    DegenerateDenominator { arm: usize },
}

/// Which branch of the non-logarithmic remainder applies to an arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiRegime {
    /// The optimal arm's mean cost plus the arm's epsilon gap reaches 1;
    /// the remainder scales like `1 / eps^4`.
    CostSaturated,
    /// Otherwise the remainder scales like
    /// `1 / (eps^6 * (1 - optimal_mean_cost - eps))`.
    CostUnsaturated,
}

impl std::fmt::Display for PhiRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::CostSaturated => write!(f, "mu1_cost+eps >= 1: O(1/eps^4)"),
            Self::CostUnsaturated => {
                write!(f, "mu1_cost+eps < 1: O(1/(eps^6*(1-mu1_cost-eps)))")
            }
        }
    }
}

/// Gap quantities for one non-optimal arm at a given `gamma` and budget.
#[derive(Clone, Debug)]
pub struct ArmGaps {
    /// Arm index (0-based).
    pub arm: usize,
    /// Ratio gap to the optimal arm.
    pub gap: f64,
    /// The gamma-weighted slack below the arm's own ratio.
    pub delta_gap: f64,
    /// The (1-gamma)-weighted slack below the optimal arm's ratio.
    pub epsilon_gap: f64,
    /// `2 ln(budget) / delta_gap^2`, the pull-count scale attached to the
    /// logarithmic term.
    pub pull_bound: f64,
    pub phi_regime: PhiRegime,
    /// Value of the regime's scaling argument. Only the order is meaningful;
    /// no absolute constant is attached.
    pub phi_argument: f64,
}

/// Per-arm gap quantities for every non-optimal arm.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub gamma: f64,
    pub budget: u64,
    pub arms: Vec<ArmGaps>,
}

/// A `ln(budget)` regret coefficient plus the arms that had to be excluded
/// because they tie the optimal ratio (zero gap makes their term undefined).
#[derive(Clone, Debug)]
pub struct LnBudgetConstant {
    pub value: f64,
    pub excluded_arms: Vec<usize>,
}

fn check_gamma(gamma: f64) -> Result<(), TheoryError> {
    if gamma.is_finite() && gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(TheoryError::InvalidGamma(gamma))
    }
}

/// `gamma * mean_cost_i * gap_i / (optimal_ratio + 1)`.
fn delta_gap(instance: &BanditInstance, arm: usize, gamma: f64) -> f64 {
    gamma * instance.mean_cost(arm) * instance.gap(arm) / (instance.optimal_ratio() + 1.0)
}

/// `(1 - gamma) * optimal_mean_cost * gap_i / (ratio_i + 1)`.
fn epsilon_gap(instance: &BanditInstance, arm: usize, gamma: f64) -> f64 {
    (1.0 - gamma) * instance.mean_cost(instance.optimal_arm()) * instance.gap(arm)
        / (instance.ratio(arm) + 1.0)
}

/// Computes every per-arm gap quantity. Arms tying the optimal ratio get
/// zero gaps and infinite bounds rather than being dropped.
pub fn gaps(instance: &BanditInstance, gamma: f64, budget: u64) -> Result<GapReport, TheoryError> {
    check_gamma(gamma)?;
    let ln_budget = (budget as f64).ln();
    let mu1_cost = instance.mean_cost(instance.optimal_arm());
    let arms = (0..instance.k())
        .filter(|&arm| arm != instance.optimal_arm())
        .map(|arm| {
            let d = delta_gap(instance, arm, gamma);
            let e = epsilon_gap(instance, arm, gamma);
            let (phi_regime, phi_argument) = if mu1_cost + e >= 1.0 {
                (PhiRegime::CostSaturated, e.powi(-4))
            } else {
                (
                    PhiRegime::CostUnsaturated,
                    1.0 / (e.powi(6) * (1.0 - mu1_cost - e)),
                )
            };
            ArmGaps {
                arm,
                gap: instance.gap(arm),
                delta_gap: d,
                epsilon_gap: e,
                pull_bound: 2.0 * ln_budget / (d * d),
                phi_regime,
                phi_argument,
            }
        })
        .collect();
    Ok(GapReport {
        gamma,
        budget,
        arms,
    })
}

/// Absolute difference between the two sides of the gap-matching identity
///
/// `(mean_reward_i + delta) / (mean_cost_i - delta)
///    = (mean_reward_1 - eps) / (mean_cost_1 + eps)`,
///
/// which holds exactly in real arithmetic for every suboptimal arm and
/// `gamma` in (0, 1). The residual is pure floating-point noise, at most
/// about 1e-12 for means bounded away from zero.
pub fn ratio_gap_identity_residual(
    instance: &BanditInstance,
    arm: usize,
    gamma: f64,
) -> Result<f64, TheoryError> {
    check_gamma(gamma)?;
    if arm >= instance.k() {
        return Err(TheoryError::ArmOutOfRange {
            arm,
            arms: instance.k(),
        });
    }
    if arm == instance.optimal_arm() || instance.gap(arm) == 0.0 {
        return Err(TheoryError::NotSuboptimal { arm });
    }
    let d = delta_gap(instance, arm, gamma);
    let e = epsilon_gap(instance, arm, gamma);
    let lhs_den = instance.mean_cost(arm) - d;
    if lhs_den <= 0.0 {
        return Err(TheoryError::DegenerateDenominator { arm });
    }
    let optimal = instance.optimal_arm();
    let lhs = (instance.mean_reward(arm) + d) / lhs_den;
    let rhs = (instance.mean_reward(optimal) - e) / (instance.mean_cost(optimal) + e);
    Ok((lhs - rhs).abs())
}

/// Coefficient of `ln(budget)` in the posterior-sampling policy's regret
/// bound: `sum_i (2 / (gamma^2 mean_cost_i gap_i)) * (optimal_ratio + 1)^2`
/// over strictly suboptimal arms.
///
/// Arms that tie the optimal ratio are excluded from the sum and reported in
/// `excluded_arms`; with any such tie present the bound is vacuous.
pub fn bts_ln_budget_constant(
    instance: &BanditInstance,
    gamma: f64,
) -> Result<LnBudgetConstant, TheoryError> {
    check_gamma(gamma)?;
    let scale = (instance.optimal_ratio() + 1.0).powi(2) * 2.0 / (gamma * gamma);
    let mut value = 0.0;
    let mut excluded_arms = Vec::new();
    for arm in 0..instance.k() {
        if arm == instance.optimal_arm() {
            continue;
        }
        if instance.gap(arm) == 0.0 {
            excluded_arms.push(arm);
            continue;
        }
        value += scale / (instance.mean_cost(arm) * instance.gap(arm));
    }
    Ok(LnBudgetConstant {
        value,
        excluded_arms,
    })
}

/// One arm's share of the cost-aware confidence-bound baseline's constant.
pub(crate) fn ucb_bv1_arm_term(gap: f64, min_mean_cost: f64) -> f64 {
    (2.0 + 2.0 / min_mean_cost + gap) / (gap * min_mean_cost)
}

/// Coefficient of `ln(budget)` in the cost-aware confidence-bound baseline's
/// regret bound:
///
/// `optimal_ratio * sum_i term_i^2
///    + sum_{i: mean_reward_i < mean_reward_1} (mean_reward_1 - mean_reward_i) * term_i`
///
/// with `term_i = (2 + 2/min_mean_cost + gap_i) / (gap_i * min_mean_cost)`.
/// The second sum runs only over arms whose mean reward is strictly below
/// the optimal arm's. Tied arms are excluded and reported, as in
/// [`bts_ln_budget_constant`].
pub fn ucb_bv1_ln_budget_constant(instance: &BanditInstance) -> LnBudgetConstant {
    let optimal = instance.optimal_arm();
    let min_cost = instance.min_mean_cost();
    let mut value = 0.0;
    let mut excluded_arms = Vec::new();
    for arm in 0..instance.k() {
        if arm == optimal {
            continue;
        }
        if instance.gap(arm) == 0.0 {
            excluded_arms.push(arm);
            continue;
        }
        let term = ucb_bv1_arm_term(instance.gap(arm), min_cost);
        value += instance.optimal_ratio() * term * term;
        let reward_shortfall = instance.mean_reward(optimal) - instance.mean_reward(arm);
        if reward_shortfall > 0.0 {
            value += reward_shortfall * term;
        }
    }
    LnBudgetConstant {
        value,
        excluded_arms,
    }
}

/// CDF of `Beta(alpha, beta)` at `y` for integer shapes, via the exact
/// finite binomial sum: with `n = alpha + beta - 1`,
///
/// `F(y) = sum_{k=alpha}^{n} C(n, k) y^k (1-y)^{n-k}`.
///
/// The shorter of the two tails is summed (the other is obtained by
/// complement), each term is built in the log domain so binomial
/// coefficients up to `n ~ 1e4` cannot overflow, and the terms are
/// compensated-summed.
///
/// Panics if `alpha` or `beta` is zero or `y` is outside `[0, 1]`.
pub fn beta_binomial_cdf(alpha: u64, beta: u64, y: f64) -> f64 {
    assert!(alpha >= 1 && beta >= 1, "shape counts must be positive");
    assert!((0.0..=1.0).contains(&y), "y must lie in [0, 1]");
    if y == 0.0 {
        return 0.0;
    }
    if y == 1.0 {
        return 1.0;
    }
    let n = alpha + beta - 1;
    let (ln_y, ln_1my) = (y.ln(), (1.0 - y).ln());
    let ln_coef = |k: u64| {
        ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64)
    };
    let term = |k: u64| (ln_coef(k) + k as f64 * ln_y + (n - k) as f64 * ln_1my).exp();

    // Direct tail has beta terms (k = alpha..=n), complement has alpha.
    if beta <= alpha {
        kahan_sum((alpha..=n).map(term)).min(1.0)
    } else {
        (1.0 - kahan_sum((0..alpha).map(term))).max(0.0)
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
