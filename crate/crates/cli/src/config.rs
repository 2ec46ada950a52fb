//! Flat JSON experiment configs.
//!
//! A file may leave any field out; [`ExperimentConfig::resolve`] fills in the
//! per-kind defaults and rejects fields that do not apply to the kind.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Root seed used by `validate` when none is given.
pub const DEFAULT_VALIDATE_SEED: u64 = 1729;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Thm1Sweep,
    QueueSweep,
    FadingSweep,
    WaterfillSweep,
    Validate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Thm1Sweep => "thm1_sweep",
            Self::QueueSweep => "queue_sweep",
            Self::FadingSweep => "fading_sweep",
            Self::WaterfillSweep => "waterfill_sweep",
            Self::Validate => "validate",
        }
    }
}

/// Config as written by the user.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_bits: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sub: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_scale: Option<f64>,
}

/// Fully specified config. Fields that do not apply to `kind` are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub kind: ExperimentKind,
    pub powers_db: Vec<f64>,
    pub payload_bits: Vec<u32>,
    pub s_counts: Vec<usize>,
    pub t_sub: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub samples: usize,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub simulate: bool,
    pub tolerance_scale: f64,
}

/// `p = 10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn db_range(from: i32, to: i32, step: usize) -> Vec<f64> {
    (from..=to).step_by(step).map(f64::from).collect()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies command-line overrides on top of file fields.
    pub fn with_overrides(
        mut self,
        seed: Option<u64>,
        trials: Option<usize>,
        output: Option<PathBuf>,
    ) -> Self {
        self.seed = seed.or(self.seed);
        self.trials = trials.or(self.trials);
        self.output = output.or(self.output);
        self
    }

    /// Fills per-kind defaults for `kind` and checks every invariant.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<ResolvedConfig> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::config(format!(
                    "config is for {} but {} was requested",
                    k.name(),
                    kind.name()
                )));
            }
        }
        let reject = |field: &str, set: bool| {
            if set {
                Err(CliError::config(format!("field {field} does not apply to {}", kind.name())))
            } else {
                Ok(())
            }
        };
        let mut r = ResolvedConfig {
            kind,
            powers_db: Vec::new(),
            payload_bits: Vec::new(),
            s_counts: Vec::new(),
            t_sub: Vec::new(),
            epsilons: Vec::new(),
            trials: 0,
            samples: 0,
            seed: self.seed,
            output: self.output.clone(),
            simulate: false,
            tolerance_scale: 1.0,
        };
        match kind {
            ExperimentKind::Validate => {
                reject("powers_db", self.powers_db.is_some())?;
                reject("payload_bits", self.payload_bits.is_some())?;
                reject("s_counts", self.s_counts.is_some())?;
                reject("t_sub", self.t_sub.is_some())?;
                reject("epsilons", self.epsilons.is_some())?;
                // the suite's trial counts are part of its criteria
                reject("trials", self.trials.is_some())?;
                reject("samples", self.samples.is_some())?;
                reject("simulate", self.simulate.is_some())?;
                r.seed = Some(self.seed.unwrap_or(DEFAULT_VALIDATE_SEED));
                r.tolerance_scale = self.tolerance_scale.unwrap_or(1.0);
                if !(r.tolerance_scale >= 0.0 && r.tolerance_scale.is_finite()) {
                    return Err(CliError::config("tolerance_scale must be finite and non-negative"));
                }
                return Ok(r);
            }
            ExperimentKind::Thm1Sweep => {
                reject("s_counts", self.s_counts.is_some())?;
                reject("t_sub", self.t_sub.is_some())?;
                r.powers_db = self.powers_db.clone().unwrap_or_else(|| db_range(-5, 10, 1));
                r.payload_bits = self.payload_bits.clone().unwrap_or_else(|| vec![300, 1000]);
            }
            ExperimentKind::QueueSweep => {
                reject("s_counts", self.s_counts.is_some())?;
                r.powers_db = self.powers_db.clone().unwrap_or_else(|| vec![0.0]);
                r.payload_bits = self.payload_bits.clone().unwrap_or_else(|| vec![300, 1000]);
                r.t_sub = self.t_sub.clone().unwrap_or_else(|| {
                    vec![400.0, 600.0, 800.0, 1000.0, 1300.0, 1600.0, 2000.0, 2500.0, 3000.0, 4000.0]
                });
            }
            ExperimentKind::FadingSweep => {
                reject("t_sub", self.t_sub.is_some())?;
                r.powers_db = self.powers_db.clone().unwrap_or_else(|| db_range(-5, 10, 1));
                r.payload_bits = self.payload_bits.clone().unwrap_or_else(|| vec![1000]);
                r.s_counts = self.s_counts.clone().unwrap_or_else(|| vec![2]);
            }
            ExperimentKind::WaterfillSweep => {
                reject("payload_bits", self.payload_bits.is_some())?;
                reject("t_sub", self.t_sub.is_some())?;
                reject("epsilons", self.epsilons.is_some())?;
                reject("trials", self.trials.is_some())?;
                reject("simulate", self.simulate.is_some())?;
                r.powers_db = self.powers_db.clone().unwrap_or_else(|| db_range(0, 20, 5));
                r.s_counts = self.s_counts.clone().unwrap_or_else(|| vec![1, 2, 4, 8]);
                r.samples = self.samples.unwrap_or(100_000);
            }
        }
        reject("tolerance_scale", self.tolerance_scale.is_some())?;
        if kind != ExperimentKind::WaterfillSweep {
            reject("samples", self.samples.is_some())?;
            r.epsilons = self.epsilons.clone().unwrap_or_else(|| vec![1e-3]);
            r.simulate = self.simulate.unwrap_or(false);
            r.trials = self.trials.unwrap_or(1000);
        }
        r.check()?;
        Ok(r)
    }
}

impl ResolvedConfig {
    fn check(&self) -> Result<()> {
        let nonempty = |name: &str, empty: bool| {
            if empty {
                Err(CliError::config(format!("grid {name} is empty")))
            } else {
                Ok(())
            }
        };
        nonempty("powers_db", self.powers_db.is_empty())?;
        if let Some(db) = self.powers_db.iter().find(|d| !d.is_finite()) {
            return Err(CliError::config(format!("power {db} dB is not finite")));
        }
        match self.kind {
            ExperimentKind::WaterfillSweep => {
                nonempty("s_counts", self.s_counts.is_empty())?;
            }
            _ => {
                nonempty("payload_bits", self.payload_bits.is_empty())?;
                nonempty("epsilons", self.epsilons.is_empty())?;
                if let Some(e) = self.epsilons.iter().find(|e| !(**e >= 0.0 && **e < 1.0)) {
                    return Err(CliError::config(format!("epsilon {e} is outside [0, 1)")));
                }
            }
        }
        if self.kind == ExperimentKind::FadingSweep {
            nonempty("s_counts", self.s_counts.is_empty())?;
        }
        if self.kind == ExperimentKind::QueueSweep {
            nonempty("t_sub", self.t_sub.is_empty())?;
        }
        if self.s_counts.contains(&0) {
            return Err(CliError::config("s_counts entries must be at least 1"));
        }
        if self.simulate && self.trials == 0 {
            return Err(CliError::config("simulation needs at least one trial"));
        }
        if self.is_stochastic() && self.seed.is_none() {
            return Err(CliError::config(format!(
                "{} draws random samples; a seed is required",
                self.kind.name()
            )));
        }
        Ok(())
    }

    pub fn is_stochastic(&self) -> bool {
        match self.kind {
            ExperimentKind::WaterfillSweep => self.samples > 0,
            ExperimentKind::Validate => true,
            _ => self.simulate,
        }
    }

    /// `(dB, linear)` pairs in grid order.
    pub fn power_points(&self) -> Vec<(f64, f64)> {
        self.powers_db.iter().map(|&db| (db, db_to_linear(db))).collect()
    }

    /// SHA-256 of the canonical JSON form, excluding the output path so the
    /// same experiment hashes the same wherever it is written.
    pub fn hash_hex(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_per_kind() {
        let c = ExperimentConfig::default();
        let t = c.resolve(ExperimentKind::Thm1Sweep).unwrap();
        assert_eq!(t.payload_bits, vec![300, 1000]);
        assert_eq!(t.powers_db.first(), Some(&-5.0));
        assert_eq!(t.powers_db.last(), Some(&10.0));
        assert!(!t.simulate);
        let v = c.resolve(ExperimentKind::Validate).unwrap();
        assert_eq!(v.seed, Some(DEFAULT_VALIDATE_SEED));
        // the water-filling sweep samples by default, so it needs a seed
        assert!(c.resolve(ExperimentKind::WaterfillSweep).is_err());
    }

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(-3.0) - 0.501_187_233_627_272_2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"powers_db": []}"#,
            r#"{"epsilons": [1.0]}"#,
            r#"{"simulate": true}"#,
            r#"{"t_sub": [100]}"#,
            r#"{"kind": "queue_sweep"}"#,
            r#"{"unknown_field": 1}"#,
        ];
        for text in bad {
            let r = ExperimentConfig::from_json(text).and_then(|c| c.resolve(ExperimentKind::Thm1Sweep));
            assert!(matches!(r, Err(CliError::Config(_))), "{text} accepted");
        }
        let v = ExperimentConfig::from_json(r#"{"trials": 10}"#).unwrap();
        assert!(v.resolve(ExperimentKind::Validate).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let c = ExperimentConfig::from_json(r#"{"seed": 1, "trials": 5}"#)
            .unwrap()
            .with_overrides(Some(9), None, Some("x.csv".into()));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.trials, Some(5));
        assert_eq!(c.output, Some(PathBuf::from("x.csv")));
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = ExperimentConfig::default().resolve(ExperimentKind::Thm1Sweep).unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere.csv".into());
        assert_eq!(a.hash_hex(), b.hash_hex());
        b.epsilons = vec![0.01];
        assert_ne!(a.hash_hex(), b.hash_hex());
    }

    proptest! {
        #[test]
        fn config_round_trips(
            powers in prop::option::of(prop::collection::vec(-20.0f64..30.0, 1..5)),
            bits in prop::option::of(prop::collection::vec(2u32..5000, 1..4)),
            eps in prop::option::of(prop::collection::vec(0.0f64..0.9, 1..3)),
            seed in prop::option::of(any::<u64>()),
            trials in prop::option::of(1usize..100_000),
            simulate in prop::option::of(any::<bool>()),
        ) {
            let c = ExperimentConfig {
                kind: Some(ExperimentKind::Thm1Sweep),
                powers_db: powers,
                payload_bits: bits,
                epsilons: eps,
                seed,
                trials,
                simulate,
                ..Default::default()
            };
            let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
            prop_assert_eq!(&back, &c);
            if let Ok(r) = c.resolve(ExperimentKind::Thm1Sweep) {
                let json = serde_json::to_string(&r).unwrap();
                let r2: ResolvedConfig = serde_json::from_str(&json).unwrap();
                prop_assert_eq!(r2, r);
            }
        }
    }
}
