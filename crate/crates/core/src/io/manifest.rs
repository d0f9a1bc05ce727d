//! Batch manifests: one TOML file describing subjects, their bundle
//! paths, analysis options, and (optionally) a synthetic-fixture recipe.
//!
//! Relative paths resolve against the manifest's directory. The full
//! schema is documented in `docs/formats.md`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::model::MetricConfig;
use crate::preprocess::PreprocessConfig;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid manifest: {0}")]
    Invalid(String),
}

/// Analysis options with every default made explicit.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub grid_step_deg: u32,
    pub n_perm: usize,
    pub alpha: f64,
    pub alpha_cluster: f64,
    pub out_dir: Option<PathBuf>,
    pub metric: MetricOptions,
    pub preprocess: PreprocessOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            grid_step_deg: 45,
            n_perm: 999,
            alpha: 0.05,
            alpha_cluster: 0.05,
            out_dir: None,
            metric: MetricOptions::default(),
            preprocess: PreprocessOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricOptions {
    pub epsilon: f64,
    pub onset_threshold_fraction: f64,
    pub upsample_factor: u32,
    pub freq_band_hz: Option<(f64, f64)>,
}

impl Default for MetricOptions {
    fn default() -> Self {
        let m = MetricConfig::default();
        Self {
            epsilon: m.epsilon,
            onset_threshold_fraction: m.onset_threshold_fraction,
            upsample_factor: m.upsample_factor,
            freq_band_hz: m.freq_band_hz,
        }
    }
}

impl MetricOptions {
    pub fn to_config(&self) -> MetricConfig {
        MetricConfig {
            epsilon: self.epsilon,
            onset_threshold_fraction: self.onset_threshold_fraction,
            upsample_factor: self.upsample_factor,
            freq_band_hz: self.freq_band_hz,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessOptions {
    pub fade_in_samples: usize,
    pub fade_out_samples: usize,
    pub target_length: usize,
    pub itd_padding_ms: f64,
    pub direction_match_tol_deg: f64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        let p = PreprocessConfig::default();
        Self {
            fade_in_samples: p.fade_in_samples,
            fade_out_samples: p.fade_out_samples,
            target_length: p.target_length,
            itd_padding_ms: p.itd_padding_ms,
            direction_match_tol_deg: p.direction_match_tol_deg,
        }
    }
}

impl PreprocessOptions {
    pub fn to_config(&self, metric: MetricConfig) -> PreprocessConfig {
        PreprocessConfig {
            fade_in_samples: self.fade_in_samples,
            fade_out_samples: self.fade_out_samples,
            target_length: self.target_length,
            itd_padding_ms: self.itd_padding_ms,
            direction_match_tol_deg: self.direction_match_tol_deg,
            metric,
            ..PreprocessConfig::default()
        }
    }
}

/// One subject's reference bundle and per-condition candidate bundles.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectEntry {
    pub id: String,
    pub reference: PathBuf,
    /// Condition name → bundle path; names are unique by construction.
    pub conditions: BTreeMap<String, PathBuf>,
}

/// Synthetic-fixture recipe consumed by the `synth` command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub subjects: usize,
    pub az_step_deg: u32,
    pub elevations_deg: Vec<f64>,
    pub impulse_length: usize,
    pub sample_rate_hz: u32,
    pub head_radius_m: f64,
    pub speed_of_sound_m_s: f64,
    /// "unity" or "cosine-shadow".
    pub gain_law: String,
    /// Extra impulse length on the raw sets so preprocessing has
    /// something to truncate.
    pub raw_length_extra: usize,
    /// Condition name → perturbation applied to the subject's reference.
    pub conditions: BTreeMap<String, PerturbOptions>,
    pub behavior: Option<SynthBehavior>,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            subjects: 2,
            az_step_deg: 30,
            elevations_deg: vec![-30.0, 0.0, 30.0],
            impulse_length: 256,
            sample_rate_hz: 48_000,
            head_radius_m: 0.0875,
            speed_of_sound_m_s: 343.0,
            gain_law: "cosine-shadow".into(),
            raw_length_extra: 64,
            conditions: BTreeMap::new(),
            behavior: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbOptions {
    pub left_gain_db: f64,
    pub right_gain_db: f64,
    pub left_delay_samples: i32,
    pub right_delay_samples: i32,
    /// (lo_hz, hi_hz, gain_db).
    pub band: Option<(f64, f64, f64)>,
    pub gain_jitter_db: f64,
}

/// Synthetic behavioural-log recipe: responses jittered around targets
/// in lateral–polar coordinates, with per-condition overrides.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthBehavior {
    pub participants: usize,
    pub trials_per_target: u32,
    pub lateral_sd_deg: f64,
    pub polar_sd_deg: f64,
    pub front_back_prob: f64,
    /// Condition name → overrides; conditions default to the scalars
    /// above.
    pub conditions: BTreeMap<String, BehaviorOverride>,
}

impl Default for SynthBehavior {
    fn default() -> Self {
        Self {
            participants: 4,
            trials_per_target: 3,
            lateral_sd_deg: 8.0,
            polar_sd_deg: 15.0,
            front_back_prob: 0.05,
            conditions: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BehaviorOverride {
    pub lateral_sd_deg: Option<f64>,
    pub polar_sd_deg: Option<f64>,
    pub front_back_prob: Option<f64>,
}

/// A parsed manifest with paths resolved against its directory.
#[derive(Debug, Clone)]
pub struct BatchManifest {
    pub path: PathBuf,
    pub options: AnalysisOptions,
    pub subjects: Vec<SubjectEntry>,
    pub synth: Option<SynthSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    options: AnalysisOptions,
    #[serde(default)]
    subjects: Vec<SubjectEntry>,
    synth: Option<SynthSection>,
}

impl BatchManifest {
    pub fn parse(text: &str, manifest_path: &Path) -> Result<Self, ManifestError> {
        let file: ManifestFile = toml::from_str(text)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let mut subjects = file.subjects;
        let mut seen = std::collections::HashSet::new();
        for s in subjects.iter_mut() {
            if !seen.insert(s.id.clone()) {
                return Err(ManifestError::Invalid(format!("duplicate subject id {:?}", s.id)));
            }
            s.reference = resolve(&s.reference);
            for path in s.conditions.values_mut() {
                *path = resolve(path);
            }
            if s.conditions.is_empty() {
                return Err(ManifestError::Invalid(format!(
                    "subject {:?} has no conditions",
                    s.id
                )));
            }
        }
        let mut options = file.options;
        if let Some(out) = &options.out_dir {
            options.out_dir = Some(resolve(out));
        }
        if let Some(synth) = &file.synth {
            if synth.subjects == 0 {
                return Err(ManifestError::Invalid("synth.subjects must be ≥ 1".into()));
            }
            if !matches!(synth.gain_law.as_str(), "unity" | "cosine-shadow") {
                return Err(ManifestError::Invalid(format!(
                    "synth.gain_law {:?} (expected \"unity\" or \"cosine-shadow\")",
                    synth.gain_law
                )));
            }
        }
        Ok(Self {
            path: manifest_path.to_path_buf(),
            options,
            subjects,
            synth: file.synth,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::IoFailure {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Errors with the offending path when any referenced bundle is
    /// missing.
    pub fn check_paths_exist(&self) -> Result<(), ManifestError> {
        for s in &self.subjects {
            for (what, path) in std::iter::once(("reference", &s.reference))
                .chain(s.conditions.iter().map(|(k, v)| (k.as_str(), v)))
            {
                if !path.exists() {
                    return Err(ManifestError::Invalid(format!(
                        "subject {:?} {what} bundle missing: {}",
                        s.id,
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_paths_resolve() {
        let text = r#"
[options]
seed = 42

[[subjects]]
id = "S01"
reference = "bundles/S01_measured.hrirb"
conditions = { pr = "bundles/S01_pr.hrirb" }
"#;
        let m = BatchManifest::parse(text, Path::new("/data/run/manifest.toml")).unwrap();
        assert_eq!(m.options.seed, 42);
        assert_eq!(m.options.grid_step_deg, 45);
        assert_eq!(m.options.n_perm, 999);
        assert_eq!(
            m.subjects[0].reference,
            PathBuf::from("/data/run/bundles/S01_measured.hrirb")
        );
        assert_eq!(
            m.subjects[0].conditions["pr"],
            PathBuf::from("/data/run/bundles/S01_pr.hrirb")
        );
    }

    #[test]
    fn synth_section_parses() {
        let text = r#"
[synth]
subjects = 4
az_step_deg = 45

[synth.conditions.pr]
right_gain_db = 6.0206

[synth.conditions.random]
right_delay_samples = 2
gain_jitter_db = 1.0

[synth.behavior]
participants = 4
trials_per_target = 3

[synth.behavior.conditions.pr]
front_back_prob = 0.3
"#;
        let m = BatchManifest::parse(text, Path::new("m.toml")).unwrap();
        let synth = m.synth.unwrap();
        assert_eq!(synth.subjects, 4);
        assert_eq!(synth.conditions["pr"].right_gain_db, 6.0206);
        assert_eq!(synth.conditions["random"].right_delay_samples, 2);
        let behavior = synth.behavior.unwrap();
        assert_eq!(
            behavior.conditions["pr"].front_back_prob,
            Some(0.3)
        );
    }

    #[test]
    fn invalid_manifests_rejected() {
        let dup = r#"
[[subjects]]
id = "S01"
reference = "a.hrirb"
conditions = { pr = "b.hrirb" }

[[subjects]]
id = "S01"
reference = "c.hrirb"
conditions = { pr = "d.hrirb" }
"#;
        assert!(matches!(
            BatchManifest::parse(dup, Path::new("m.toml")),
            Err(ManifestError::Invalid(_))
        ));

        let no_conditions = r#"
[[subjects]]
id = "S01"
reference = "a.hrirb"
conditions = {}
"#;
        assert!(matches!(
            BatchManifest::parse(no_conditions, Path::new("m.toml")),
            Err(ManifestError::Invalid(_))
        ));

        let unknown_key = "[options]\nbogus = 1\n";
        assert!(matches!(
            BatchManifest::parse(unknown_key, Path::new("m.toml")),
            Err(ManifestError::Parse(_))
        ));
    }

    #[test]
    fn missing_paths_reported() {
        let text = r#"
[[subjects]]
id = "S01"
reference = "/definitely/missing.hrirb"
conditions = { pr = "/also/missing.hrirb" }
"#;
        let m = BatchManifest::parse(text, Path::new("m.toml")).unwrap();
        let err = m.check_paths_exist().unwrap_err();
        assert!(err.to_string().contains("missing.hrirb"));
    }
}
