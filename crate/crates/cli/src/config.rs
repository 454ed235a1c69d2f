//! Experiment configuration: presets, TOML files and their hash.
//!
//! A configuration is resolved in three layers: the preset (from `--preset`,
//! the file's `preset` key, or `paper-small`), the file's tables merged on
//! top, then command-line overrides such as `--seed`.

use std::path::Path;

use noma_qfl_core::orchestrator::{BcdConfig, BcdMode, BlockPlan, LatencyModel, Solver};
use noma_qfl_core::qaoa::QaoaConfig;
use noma_qfl_core::qfl::{DataSplit, FedConfig, Shots};
use noma_qfl_core::qubo::{PenaltyConfig, PowerSurrogate};
use noma_qfl_core::scenario::ScenarioConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

pub const PRESETS: [&str; 3] = ["paper-small", "paper-mid", "paper-large"];
pub const DEFAULT_PRESET: &str = "paper-small";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_devices: usize,
    pub n_channels: usize,
    pub cell_radius_m: f64,
    pub pathloss_exponent: f64,
    pub reference_loss_db: f64,
    pub shadowing_sigma_db: f64,
    pub epsilon: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
    pub p_max_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcdSection {
    pub solver: String,
    pub mode: String,
    pub max_iters: usize,
    pub tol: f64,
    pub patience: usize,
    pub q_bits: u32,
    /// Devices per sub-problem; 0 solves all devices as one block.
    pub block_size: usize,
    pub lambda_rate: f64,
    /// Negative selects the automatic weight.
    pub lambda_one_channel: f64,
    pub lambda_power_feas: f64,
    /// `chord`, `interference-priced` or `low-sinr`.
    pub surrogate: String,
    pub sca_iters: usize,
    pub model_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaSection {
    pub layers: usize,
    pub lr: f64,
    pub max_iters: usize,
    pub shots: u64,
    pub grad_eps: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QflSection {
    pub n_devices: usize,
    pub rounds: usize,
    pub local_iters: usize,
    pub lr: f64,
    pub batch: usize,
    /// Shot counts to sweep; 0 stands for exact expectations.
    pub shots: Vec<u64>,
    pub splits: Vec<String>,
    pub n_qubits: usize,
    pub layers: usize,
    pub samples_per_device: usize,
    pub test_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub seed: u64,
    pub scenario: ScenarioSection,
    pub bcd: BcdSection,
    pub qaoa: QaoaSection,
    pub qfl: QflSection,
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> CliResult<Self> {
        let n_devices = match name {
            "paper-small" => 50,
            "paper-mid" => 200,
            "paper-large" => 500,
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown preset `{name}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let sc = ScenarioConfig::default();
        let bcd = BcdConfig::default();
        let qaoa = QaoaConfig::default();
        let fed = FedConfig::default();
        Ok(Self {
            preset: name.to_string(),
            seed: 0,
            scenario: ScenarioSection {
                n_devices,
                n_channels: 4,
                cell_radius_m: sc.cell_radius_m,
                pathloss_exponent: sc.pathloss_exponent,
                reference_loss_db: sc.reference_loss_db,
                shadowing_sigma_db: sc.shadowing_sigma_db,
                epsilon: 0.6,
                noise_dbm: sc.noise_dbm,
                bandwidth_hz: sc.bandwidth_hz,
                p_max_dbm: sc.p_max_dbm,
            },
            bcd: BcdSection {
                solver: bcd.solver.name().to_string(),
                mode: bcd.mode.name().to_string(),
                max_iters: bcd.max_iters,
                tol: bcd.tol,
                patience: bcd.patience,
                q_bits: bcd.q_bits,
                block_size: 1,
                lambda_rate: bcd.penalties.lambda_rate,
                lambda_one_channel: -1.0,
                lambda_power_feas: bcd.penalties.lambda_power_feas,
                surrogate: "chord".to_string(),
                sca_iters: bcd.sca_iters,
                model_bits: bcd.latency.model_bits,
            },
            qaoa: QaoaSection {
                layers: qaoa.layers,
                lr: qaoa.lr,
                max_iters: qaoa.max_iters,
                shots: qaoa.shots,
                grad_eps: qaoa.grad_eps,
                tol: qaoa.tol,
            },
            qfl: QflSection {
                n_devices: fed.n_devices,
                rounds: fed.rounds,
                local_iters: fed.local_iters[0],
                lr: fed.lr,
                batch: fed.batch,
                shots: vec![1, 40, 100],
                splits: vec!["iid".to_string(), "non_iid".to_string()],
                n_qubits: fed.n_qubits,
                layers: fed.layers,
                samples_per_device: fed.samples_per_device,
                test_samples: fed.test_samples,
            },
        })
    }

    /// Resolves a configuration from an optional file and preset override.
    pub fn resolve(file: Option<&Path>, preset: Option<&str>, seed: Option<u64>) -> CliResult<Self> {
        let overlay = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
                Some(text.parse::<toml::Table>().map_err(|e| {
                    CliError::Runtime(format!("invalid config {}: {e}", path.display()))
                })?)
            }
            None => None,
        };
        let file_preset = overlay
            .as_ref()
            .and_then(|t| t.get("preset"))
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| CliError::Runtime("config key `preset` must be a string".into()))
            })
            .transpose()?;
        let name = preset.map(str::to_string).or(file_preset).unwrap_or_else(|| DEFAULT_PRESET.into());
        let base = Self::preset(&name)?;
        let mut table = toml::Table::try_from(&base).map_err(|e| CliError::Runtime(e.to_string()))?;
        if let Some(over) = overlay {
            merge(&mut table, over);
        }
        table.insert("preset".into(), toml::Value::String(name));
        let mut cfg: Self = table
            .try_into()
            .map_err(|e| CliError::Runtime(format!("invalid config: {e}")))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Converts every section, surfacing the first invalid value.
    pub fn validate(&self) -> CliResult<()> {
        self.scenario_config().validate()?;
        self.bcd_config()?.validate()?;
        for fed in self.fed_configs()? {
            fed.validate()?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// First 12 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn scenario_config(&self) -> ScenarioConfig {
        let s = &self.scenario;
        ScenarioConfig {
            n_devices: s.n_devices,
            n_channels: s.n_channels,
            cell_radius_m: s.cell_radius_m,
            pathloss_exponent: s.pathloss_exponent,
            reference_loss_db: s.reference_loss_db,
            shadowing_sigma_db: s.shadowing_sigma_db,
            epsilon: s.epsilon,
            noise_dbm: s.noise_dbm,
            bandwidth_hz: s.bandwidth_hz,
            p_max_dbm: s.p_max_dbm,
            seed: self.seed,
        }
    }

    pub fn qaoa_config(&self) -> QaoaConfig {
        let q = &self.qaoa;
        QaoaConfig {
            layers: q.layers,
            lr: q.lr,
            max_iters: q.max_iters,
            shots: q.shots,
            seed: self.seed,
            grad_eps: q.grad_eps,
            tol: q.tol,
            backtracking: true,
        }
    }

    pub fn bcd_config(&self) -> CliResult<BcdConfig> {
        let b = &self.bcd;
        let surrogate = match b.surrogate.as_str() {
            "interference-priced" => PowerSurrogate::InterferencePriced,
            "low-sinr" => PowerSurrogate::LowSinr,
            "chord" => PowerSurrogate::Chord,
            other => return Err(CliError::Runtime(format!("unknown surrogate `{other}`"))),
        };
        Ok(BcdConfig {
            solver: b.solver.parse::<Solver>()?,
            mode: b.mode.parse::<BcdMode>()?,
            max_iters: b.max_iters,
            tol: b.tol,
            patience: b.patience,
            q_bits: b.q_bits,
            penalties: PenaltyConfig {
                lambda_rate: b.lambda_rate,
                lambda_one_channel: (b.lambda_one_channel >= 0.0).then_some(b.lambda_one_channel),
                lambda_power_feas: b.lambda_power_feas,
            },
            surrogate,
            blocks: match b.block_size {
                0 => BlockPlan::Monolithic,
                k => BlockPlan::Groups(k),
            },
            qaoa: self.qaoa_config(),
            sca_iters: b.sca_iters,
            latency: LatencyModel {
                model_bits: b.model_bits,
                ..LatencyModel::default()
            },
            seed: self.seed,
        })
    }

    /// One federated run per (shot count, split), in configuration order.
    pub fn fed_configs(&self) -> CliResult<Vec<FedConfig>> {
        let q = &self.qfl;
        if q.shots.is_empty() || q.splits.is_empty() {
            return Err(CliError::Runtime("qfl.shots and qfl.splits must not be empty".into()));
        }
        let mut out = Vec::new();
        for split in &q.splits {
            let split: DataSplit = split.parse()?;
            for &h in &q.shots {
                out.push(FedConfig {
                    n_devices: q.n_devices,
                    rounds: q.rounds,
                    local_iters: vec![q.local_iters; q.n_devices],
                    lr: q.lr,
                    shots: if h == 0 { Shots::Exact } else { Shots::Finite(h) },
                    batch: q.batch,
                    split,
                    seed: self.seed,
                    n_qubits: q.n_qubits,
                    layers: q.layers,
                    samples_per_device: q.samples_per_device,
                    test_samples: q.test_samples,
                });
            }
        }
        Ok(out)
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn presets_have_the_expected_sizes() {
        for (name, n) in PRESETS.iter().zip([50, 200, 500]) {
            let cfg = ExperimentConfig::preset(name).unwrap();
            assert_eq!(cfg.scenario.n_devices, n);
            assert_eq!(cfg.scenario.n_channels, 4);
            assert_eq!(cfg.scenario.epsilon, 0.6);
            cfg.validate().unwrap();
        }
        assert!(matches!(ExperimentConfig::preset("paper-huge"), Err(CliError::Usage(_))));
    }

    #[test]
    fn file_overrides_merge_onto_the_preset() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "preset = \"paper-mid\"\nseed = 4\n[scenario]\nn_channels = 2\n[qfl]\nshots = [5]").unwrap();
        let cfg = ExperimentConfig::resolve(Some(f.path()), None, None).unwrap();
        assert_eq!(cfg.preset, "paper-mid");
        assert_eq!(cfg.scenario.n_devices, 200);
        assert_eq!(cfg.scenario.n_channels, 2);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.qfl.shots, vec![5]);
        let cli = ExperimentConfig::resolve(Some(f.path()), Some("paper-small"), Some(9)).unwrap();
        assert_eq!(cli.scenario.n_devices, 50);
        assert_eq!(cli.seed, 9);
    }

    #[test]
    fn bad_files_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "[scenario]\nn_devicez = 3").unwrap();
        assert!(ExperimentConfig::resolve(Some(f.path()), None, None).is_err());
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "[scenario]\nepsilon = 1.5").unwrap();
        assert!(ExperimentConfig::resolve(Some(g.path()), None, None).is_err());
        assert!(ExperimentConfig::resolve(Some(Path::new("/nonexistent/x.toml")), None, None).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::preset("paper-small").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 12);
    }

    #[test]
    fn default_shot_sweep() {
        let cfg = ExperimentConfig::preset("paper-small").unwrap();
        let runs = cfg.fed_configs().unwrap();
        assert_eq!(runs.len(), 6);
        let shots: Vec<Shots> = runs.iter().take(3).map(|r| r.shots).collect();
        assert_eq!(shots, vec![Shots::Finite(1), Shots::Finite(40), Shots::Finite(100)]);
    }
}
