//! Declarative experiment configuration and its validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::instance::{generate_instance, ArmModel, BanditInstance, Family};
use crate::policy::PolicyKind;
use crate::Mode;

use super::HarnessError;

/// The instance to simulate: either explicit arm distributions or a seeded
/// generator recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Explicit { arms: Vec<ArmModel> },
    Generated { generator: GeneratorSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub arms: usize,
    pub family: Family,
}

/// One policy entry in a config. `ucb_bv1` may omit `lambda`, in which case
/// the instance's true minimum mean cost is used, the strongest hint the
/// policy is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    Bts,
    EpsilonFirst {
        epsilon: f64,
    },
    PdBwk,
    UcbBv1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    KubeVariant,
}

impl PolicySpec {
    fn base_label(&self) -> &'static str {
        match self {
            Self::Bts => "bts",
            Self::EpsilonFirst { .. } => "epsilon_first",
            Self::PdBwk => "pd_bwk",
            Self::UcbBv1 { .. } => "ucb_bv1",
            Self::KubeVariant => "kube_variant",
        }
    }
}

/// A full experiment description; the JSON schema is field-for-field this
/// struct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub policies: Vec<PolicySpec>,
    /// Budget grid, strictly increasing.
    pub budgets: Vec<u64>,
    /// Monte Carlo repetitions per (policy, budget) cell.
    pub runs: u64,
    pub base_seed: u64,
    pub mode: Mode,
    /// When present, budget-anytime policies run once per repetition at the
    /// largest checkpoint and record a row per checkpoint instead of one
    /// fresh run per budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_budgets: Option<Vec<u64>>,
}

/// A policy entry after validation: resolved parameters plus its stable
/// position in the config list (used for seed derivation and row ordering).
#[derive(Clone, Debug)]
pub struct ResolvedPolicy {
    pub policy_id: u64,
    pub label: String,
    pub kind: PolicyKind,
}

/// A config checked and made executable: built instance plus resolved
/// policies.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub instance: BanditInstance,
    pub policies: Vec<ResolvedPolicy>,
    pub budgets: Vec<u64>,
    pub runs: u64,
    pub base_seed: u64,
    pub mode: Mode,
    pub checkpoint_budgets: Option<Vec<u64>>,
}

fn check_budget_grid(name: &str, grid: &[u64]) -> Result<(), HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::InvalidConfig(format!("{name} must be nonempty")));
    }
    if grid[0] == 0 {
        return Err(HarnessError::InvalidConfig(format!(
            "{name} must be positive integers"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::InvalidConfig(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build_instance(&self) -> Result<BanditInstance, HarnessError> {
        match &self.instance {
            InstanceSpec::Explicit { arms } => Ok(BanditInstance::new(arms.clone())?),
            InstanceSpec::Generated { generator } => Ok(generate_instance(
                generator.seed,
                generator.arms,
                generator.family,
            )?),
        }
    }

    /// Checks every config invariant and resolves defaults. All validation
    /// happens here, before any run starts.
    pub fn validate(&self) -> Result<ResolvedExperiment, HarnessError> {
        let instance = self.build_instance()?;
        if self.runs == 0 {
            return Err(HarnessError::InvalidConfig("runs must be at least 1".into()));
        }
        check_budget_grid("budgets", &self.budgets)?;
        if let Some(cb) = &self.checkpoint_budgets {
            check_budget_grid("checkpoint_budgets", cb)?;
        }
        if self.policies.is_empty() {
            return Err(HarnessError::InvalidConfig("policies must be nonempty".into()));
        }
        if self.mode == Mode::Bernoulli && !instance.is_all_bernoulli() {
            return Err(HarnessError::InvalidConfig(
                "bernoulli mode requires all reward and cost distributions to be bernoulli".into(),
            ));
        }

        let min_cost = instance.min_mean_cost();
        let mut policies = Vec::with_capacity(self.policies.len());
        for (idx, spec) in self.policies.iter().enumerate() {
            let kind = match spec {
                PolicySpec::Bts => PolicyKind::Bts,
                PolicySpec::EpsilonFirst { epsilon } => {
                    if !(*epsilon > 0.0 && *epsilon < 1.0) {
                        return Err(HarnessError::InvalidConfig(format!(
                            "policy {idx}: epsilon must lie in (0, 1), got {epsilon}"
                        )));
                    }
                    PolicyKind::EpsilonFirst { epsilon: *epsilon }
                }
                PolicySpec::PdBwk => PolicyKind::PdBwk,
                PolicySpec::UcbBv1 { lambda } => {
                    let lambda = lambda.unwrap_or(min_cost);
                    if lambda <= 0.0 || lambda > min_cost {
                        return Err(HarnessError::InvalidConfig(format!(
                            "policy {idx}: lambda must lie in (0, {min_cost}] \
                             (a valid lower bound on the minimum mean cost), got {lambda}"
                        )));
                    }
                    PolicyKind::UcbBv1 { lambda }
                }
                PolicySpec::KubeVariant => PolicyKind::KubeVariant,
            };
            policies.push(ResolvedPolicy {
                policy_id: idx as u64,
                label: spec.base_label().to_string(),
                kind,
            });
        }
        // Duplicate kinds get an occurrence suffix so CSV groups stay distinct.
        for i in 0..policies.len() {
            let occurrence = policies[..i]
                .iter()
                .filter(|p| p.label == policies[i].label || p.label.starts_with(&format!("{}#", policies[i].label)))
                .count();
            if occurrence > 0 {
                policies[i].label = format!("{}#{}", policies[i].label, occurrence + 1);
            }
        }

        Ok(ResolvedExperiment {
            instance,
            policies,
            budgets: self.budgets.clone(),
            runs: self.runs,
            base_seed: self.base_seed,
            mode: self.mode,
            checkpoint_budgets: self.checkpoint_budgets.clone(),
        })
    }
}
