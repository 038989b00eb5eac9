use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineKind;
use crate::data::{AugmentKind, AugmentSpec, LabelColumn, NoiseKind, NoiseSpec, SplitSpec};
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::evaluator::{Budget, EvaluatorKind, Metric};

/// Which transform the training split receives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    #[default]
    Original,
    DaSample,
    DaFeature,
    DnS1,
    DnS2,
    DnF,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Original => "original",
            Setting::DaSample => "da_sample",
            Setting::DaFeature => "da_feature",
            Setting::DnS1 => "dn_s1",
            Setting::DnS2 => "dn_s2",
            Setting::DnF => "dn_f",
        }
    }
}

impl FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "original" => Setting::Original,
            "da_sample" => Setting::DaSample,
            "da_feature" => Setting::DaFeature,
            "dn_s1" => Setting::DnS1,
            "dn_s2" => Setting::DnS2,
            "dn_f" => Setting::DnF,
            other => {
                return Err(format!(
                "unknown setting '{other}' (expected original, da_sample, da_feature, dn_s1, dn_s2 or dn_f)"
            ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub label: LabelColumn,
    /// Results directory name; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
}

impl DatasetConfig {
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
        })
    }
}

fn default_baselines() -> Vec<String> {
    BaselineKind::IDS.iter().map(|s| s.to_string()).collect()
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_seed() -> u64 {
    42
}

/// One experiment, as read from a TOML file. Field names mirror the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: Option<DatasetConfig>,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub setting: Setting,
    #[serde(default)]
    pub augment: Option<AugmentSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub evaluator: EvaluatorKind,
    /// Baseline ids run by `baseline --method all` and by `bench`.
    #[serde(default = "default_baselines")]
    pub baselines: Vec<String>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Root seed for the engine and the baselines.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            split: SplitSpec::default(),
            setting: Setting::default(),
            augment: None,
            noise: None,
            budget: Budget::default(),
            engine: EngineConfig::default(),
            evaluator: EvaluatorKind::default(),
            baselines: default_baselines(),
            out: default_out(),
            seed: default_seed(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub label: Option<LabelColumn>,
    pub setting: Option<Setting>,
    pub budget_samples: Option<usize>,
    pub budget_features: Option<usize>,
    pub rounds: Option<usize>,
    pub eta: Option<f64>,
    pub batch: Option<usize>,
    pub lr: Option<f64>,
    pub metric: Option<Metric>,
    /// `knn`, `oracle` or `bridge`.
    pub evaluator: Option<String>,
    pub bridge_cmd: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a TOML file. A relative dataset path is resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::from_toml(&text)?;
        if let (Some(ds), Some(dir)) = (cfg.dataset.as_mut(), path.parent()) {
            if ds.path.is_relative() {
                ds.path = dir.join(&ds.path);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("config").to_string();
            Error::config(field, e.to_string().trim())
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(p) = &o.dataset {
            let label = o
                .label
                .clone()
                .or_else(|| self.dataset.as_ref().map(|d| d.label.clone()))
                .ok_or_else(|| Error::config("label", "--dataset needs --label"))?;
            self.dataset = Some(DatasetConfig {
                path: p.clone(),
                label,
                name: None,
            });
        } else if let (Some(l), Some(ds)) = (&o.label, self.dataset.as_mut()) {
            ds.label = l.clone();
        }
        if let Some(s) = o.setting {
            self.setting = s;
        }
        if let Some(v) = o.budget_samples {
            self.budget.max_samples = v;
        }
        if let Some(v) = o.budget_features {
            self.budget.max_features = v;
        }
        if let Some(v) = o.rounds {
            self.engine.rounds = v;
        }
        if let Some(v) = o.eta {
            self.engine.eta = v;
        }
        if let Some(v) = o.batch {
            self.engine.batch = v;
        }
        if let Some(v) = o.lr {
            self.engine.learning_rate = v;
        }
        if let Some(v) = o.metric {
            self.engine.metric = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        match o.evaluator.as_deref() {
            None => {
                if let Some(cmd) = &o.bridge_cmd {
                    self.evaluator = bridge_from_command(cmd)?;
                }
            }
            Some("knn") => {
                if !matches!(self.evaluator, EvaluatorKind::Knn { .. }) {
                    self.evaluator = EvaluatorKind::default();
                }
            }
            Some("oracle") => {
                if !matches!(self.evaluator, EvaluatorKind::AdditiveOracle { .. }) {
                    return Err(Error::config(
                        "evaluator",
                        "the oracle needs its weights in the config file ([evaluator] kind = \"additive_oracle\")",
                    ));
                }
            }
            Some("bridge") => match (&o.bridge_cmd, &self.evaluator) {
                (Some(cmd), _) => self.evaluator = bridge_from_command(cmd)?,
                (None, EvaluatorKind::ExternalBridge { .. }) => {}
                (None, _) => {
                    return Err(Error::config(
                        "bridge_cmd",
                        "--evaluator bridge needs --bridge-cmd",
                    ))
                }
            },
            Some(other) => {
                return Err(Error::config(
                    "evaluator",
                    format!("unknown evaluator '{other}' (expected knn, oracle or bridge)"),
                ))
            }
        }
        Ok(())
    }

    /// Checks every section and the pairing of `setting` with its spec.
    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_none() {
            return Err(Error::config(
                "dataset",
                "no dataset given (config [dataset] or --dataset)",
            ));
        }
        self.split
            .validate()
            .map_err(|e| Error::config("split", e.to_string()))?;
        Budget::new(self.budget.max_samples, self.budget.max_features)
            .map_err(|e| Error::config("budget", e.to_string()))?;
        self.engine.validate()?;
        for b in &self.baselines {
            if BaselineKind::from_id(b).is_none() {
                return Err(Error::config("baselines", format!("unknown method '{b}'")));
            }
        }
        let augment_kind = self.augment.as_ref().map(|a| a.kind);
        let noise_kind = self.noise.as_ref().map(|n| n.kind);
        let pairing = match self.setting {
            Setting::Original => match (augment_kind, noise_kind) {
                (None, None) => Ok(()),
                (Some(_), _) => Err(("augment", "setting 'original' takes no augment spec")),
                (_, Some(_)) => Err(("noise", "setting 'original' takes no noise spec")),
            },
            Setting::DaSample | Setting::DaFeature => {
                let want = if self.setting == Setting::DaSample {
                    AugmentKind::SampleAffine
                } else {
                    AugmentKind::FeatureProjection
                };
                if noise_kind.is_some() {
                    Err(("noise", "augmentation settings take no noise spec"))
                } else if augment_kind != Some(want) {
                    Err(("augment", "setting needs an [augment] spec of the matching kind"))
                } else {
                    Ok(())
                }
            }
            Setting::DnS1 | Setting::DnS2 | Setting::DnF => {
                let ok = match self.setting {
                    Setting::DnS1 => noise_kind == Some(NoiseKind::S1Marginal),
                    Setting::DnS2 => noise_kind == Some(NoiseKind::S2Gaussian),
                    _ => matches!(
                        noise_kind,
                        Some(NoiseKind::F1Jitter | NoiseKind::F2Permute | NoiseKind::FMixed)
                    ),
                };
                if augment_kind.is_some() {
                    Err(("augment", "noise settings take no augment spec"))
                } else if !ok {
                    Err(("noise", "setting needs a [noise] spec of the matching kind"))
                } else {
                    Ok(())
                }
            }
        };
        pairing.map_err(|(field, msg)| {
            Error::config(field, format!("{msg} (setting = {})", self.setting.name()))
        })?;
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| Error::config("noise", e.to_string()))?;
        }
        if let Some(a) = &self.augment {
            let missing = match a.kind {
                AugmentKind::SampleAffine => a.target_n.is_none().then_some("augment.target_n"),
                AugmentKind::FeatureProjection => a.target_d.is_none().then_some("augment.target_d"),
            };
            if let Some(f) = missing {
                return Err(Error::config(f, "required for this augmentation kind"));
            }
        }
        Ok(())
    }

    /// Engine settings with the experiment seed applied.
    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            seed: self.seed,
            ..self.engine.clone()
        }
    }
}

fn bridge_from_command(cmd: &str) -> Result<EvaluatorKind> {
    let mut parts = cmd.split_whitespace().map(String::from);
    let command = parts
        .next()
        .ok_or_else(|| Error::config("bridge_cmd", "empty command"))?;
    Ok(EvaluatorKind::ExternalBridge {
        command,
        args: parts.collect(),
        timeout_secs: 60.0,
        connections: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let cfg = ExperimentConfig::from_toml("[dataset]\npath = \"a.csv\"\nlabel = \"y\"\n").unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.baselines.len(), 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn setting_needs_matching_spec() {
        let text = "setting = \"dn_s1\"\n[dataset]\npath = \"a.csv\"\nlabel = 0\n";
        let err = ExperimentConfig::from_toml(text).unwrap().validate().unwrap_err();
        assert!(
            matches!(err, Error::Config { ref field, .. } if field == "noise"),
            "{err}"
        );
        let text = format!("{text}[noise]\nkind = \"s2_gaussian\"\n");
        assert!(ExperimentConfig::from_toml(&text).unwrap().validate().is_err());
        let text = text.replace("s2_gaussian", "s1_marginal");
        ExperimentConfig::from_toml(&text).unwrap().validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_toml("sed = 1\n").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&Overrides {
            dataset: Some("x.csv".into()),
            label: Some(LabelColumn::Name("t".into())),
            rounds: Some(7),
            seed: Some(9),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.engine.rounds, 7);
        assert_eq!(cfg.engine_config().seed, 9);
        assert_eq!(cfg.dataset.unwrap().display_name(), "x");
    }
}
