use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attacks::AttackResult;
use crate::metrics::FairnessSummary;
use crate::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

/// Every random stream of a pipeline, derived from one base seed by fixed offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub base: u64,
    pub split: u64,
    pub target: u64,
    pub attack: u64,
    pub defense: u64,
    pub sample: u64,
}

impl SeedPlan {
    pub const SPLIT_OFFSET: u64 = 1;
    pub const TARGET_OFFSET: u64 = 2;
    pub const ATTACK_OFFSET: u64 = 3;
    pub const DEFENSE_OFFSET: u64 = 4;
    pub const SAMPLE_OFFSET: u64 = 5;

    pub fn from_base(base: u64) -> Self {
        Self {
            base,
            split: base.wrapping_add(Self::SPLIT_OFFSET),
            target: base.wrapping_add(Self::TARGET_OFFSET),
            attack: base.wrapping_add(Self::ATTACK_OFFSET),
            defense: base.wrapping_add(Self::DEFENSE_OFFSET),
            sample: base.wrapping_add(Self::SAMPLE_OFFSET),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBalance {
    pub p_s1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_y1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    /// Feature count; 0 when auditing a predictions file.
    pub d: usize,
    pub class_balance: ClassBalance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependency_ys: Option<f64>,
}

/// Utility of the hard predictions on the test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Utility {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    Soft,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub label_mode: LabelMode,
    #[serde(flatten)]
    pub result: AttackResult,
}

pub type AttackTable = BTreeMap<String, AttackRecord>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseReport {
    pub method: String,
    pub config: serde_json::Value,
    pub target_utility: Utility,
    pub fairness: FairnessSummary,
    /// Exact mixture dempar level on the training split (randomized defenses only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_dempar_level_train: Option<f64>,
    pub attacks: AttackTable,
}

/// Machine-readable result of one audit run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub report_version: u32,
    pub seeds: SeedPlan,
    pub config: serde_json::Value,
    pub dataset_summary: DatasetSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_utility: Option<Utility>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness: Option<FairnessSummary>,
    pub attacks: AttackTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense: Option<DefenseReport>,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidConfig(format!("{name} = {v} outside [0,1]")));
    }
    Ok(())
}

fn check_attacks(prefix: &str, attacks: &AttackTable) -> Result<()> {
    for (name, rec) in attacks {
        check_unit(
            &format!("{prefix}{name}.tuned_accuracy"),
            rec.result.tuned_accuracy,
        )?;
        check_unit(
            &format!("{prefix}{name}.eval_accuracy"),
            rec.result.eval_accuracy,
        )?;
        if rec.label_mode == LabelMode::Hard && rec.result.theoretical_bound.is_none() {
            return Err(Error::InvalidConfig(format!(
                "{prefix}{name} lacks theoretical_bound"
            )));
        }
    }
    Ok(())
}

impl AuditReport {
    /// Accuracies lie in `[0,1]` and every hard-label attack carries its bound.
    pub fn validate(&self) -> Result<()> {
        if let Some(u) = &self.target_utility {
            check_unit("target_utility.accuracy", u.accuracy)?;
            check_unit("target_utility.balanced_accuracy", u.balanced_accuracy)?;
        }
        check_attacks("attacks.", &self.attacks)?;
        if let Some(d) = &self.defense {
            check_unit("defense.target_utility.accuracy", d.target_utility.accuracy)?;
            check_attacks("defense.attacks.", &d.attacks)?;
        }
        Ok(())
    }
}

/// Flattens a JSON value into `key,value` rows with dotted keys.
pub fn flatten_json(value: &serde_json::Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            serde_json::Value::Object(map) => map.iter().for_each(|(k, v)| walk(&key(k), v, out)),
            serde_json::Value::Array(items) => items
                .iter()
                .enumerate()
                .for_each(|(i, v)| walk(&key(&i.to_string()), v, out)),
            serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}
