//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analysis::MIN_REPLICATES;
use crate::field::Structure;
use crate::group::Domain;
use crate::spectrum::PowerSpectrum;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Verification suites run by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Orthonormality,
    RoundTrip,
    Projection,
    Variance,
    Isotropy,
    Uncorrelatedness,
    Convergence,
}

impl Suite {
    pub fn is_statistical(self) -> bool {
        matches!(
            self,
            Suite::Variance | Suite::Isotropy | Suite::Uncorrelatedness | Suite::Convergence
        )
    }

    pub fn defaults() -> Vec<Suite> {
        vec![
            Suite::Orthonormality,
            Suite::RoundTrip,
            Suite::Uncorrelatedness,
            Suite::Convergence,
            Suite::Isotropy,
        ]
    }
}

/// Spectrum source: a file path or a named family such as `"geometric 0.5"`,
/// `"delta 1"`, `"polynomial 2"` or `"zero"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumSource {
    File { file: PathBuf },
    Family(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuggetConfig {
    pub variance: f64,
    pub off_diagonal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// `cyclic`, `circle`, `so3` or `sphere`.
    pub group: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub band_limit: usize,
    pub spectrum: SpectrumSource,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "Suite::defaults")]
    pub suites: Vec<Suite>,
    /// Band of the analysis quadrature; defaults to `band_limit`. Setting it
    /// lower is the aliasing negative control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_band: Option<usize>,
    #[serde(default = "default_structure")]
    pub structure: Structure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nugget: Option<NuggetConfig>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Coefficient file for `transform`; a sampled field is used otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_replicates() -> usize {
    2000
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_structure() -> Structure {
    Structure::Real
}

fn default_deltas() -> Vec<f64> {
    vec![0.01, 0.1, 0.5]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        // relative paths resolve against the config file
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        if let SpectrumSource::File { file } = &mut cfg.spectrum {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        if let Some(c) = &mut cfg.coefficients {
            if c.is_relative() {
                *c = base.join(&*c);
            }
        }
        Ok(cfg)
    }

    pub fn domain(&self) -> Result<Domain, HarnessError> {
        Domain::from_tag(&self.group, self.n).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn quadrature_band(&self) -> usize {
        self.quadrature_band.unwrap_or(self.band_limit)
    }

    /// Schema, replicate and band checks that do not need the spectrum.
    pub fn validate(&self, statistical: bool) -> Result<(), HarnessError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.domain()?;
        if statistical && self.replicates < MIN_REPLICATES {
            return Err(HarnessError::Config(format!(
                "statistical suites need at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// The configured spectrum, extended to `band_limit`.
    pub fn spectrum(&self) -> Result<PowerSpectrum, HarnessError> {
        let domain = self.domain()?;
        let config_err = |e: crate::Error| HarnessError::Config(e.to_string());
        match &self.spectrum {
            SpectrumSource::File { file } => {
                let spec = PowerSpectrum::load(file)
                    .map_err(|e| HarnessError::Config(format!("spectrum file {}: {e}", file.display())))?;
                if spec.domain() != domain {
                    return Err(HarnessError::Config(format!(
                        "spectrum file is for {}, config is for {domain}",
                        spec.domain()
                    )));
                }
                if spec.effective_band() > self.band_limit {
                    return Err(HarnessError::Config(format!(
                        "spectrum reaches band {} beyond band_limit {}",
                        spec.effective_band(),
                        self.band_limit
                    )));
                }
                PowerSpectrum::new(
                    domain,
                    self.band_limit,
                    spec.entries().iter().copied().filter(|(_, a)| *a != 0.0),
                )
                .map_err(config_err)
            }
            SpectrumSource::Family(name) => {
                let parts: Vec<&str> = name.split_whitespace().collect();
                let param = |i: usize| -> Result<f64, HarnessError> {
                    parts
                        .get(i)
                        .ok_or_else(|| HarnessError::Config(format!("spectrum family '{name}' needs a parameter")))?
                        .parse::<f64>()
                        .map_err(|_| HarnessError::Config(format!("bad parameter in spectrum family '{name}'")))
                };
                let spec = match parts.first().copied() {
                    Some("geometric") => PowerSpectrum::geometric(domain, self.band_limit, param(1)?),
                    Some("polynomial") => PowerSpectrum::polynomial(domain, self.band_limit, param(1)?),
                    Some("delta") => {
                        let at = param(1)?;
                        if at < 0.0 || at.fract() != 0.0 {
                            return Err(HarnessError::Config(format!("delta band must be a whole number, got {at}")));
                        }
                        PowerSpectrum::delta(domain, self.band_limit, at as usize)
                    }
                    Some("zero") => PowerSpectrum::zero(domain, self.band_limit),
                    _ => return Err(HarnessError::Config(format!("unknown spectrum family '{name}'"))),
                };
                spec.map_err(config_err)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn parse(json: &str) -> ExperimentConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn minimal_config_defaults() {
        let c = parse(r#"{"schema_version": 1, "group": "so3", "band_limit": 4, "spectrum": "geometric 0.5"}"#);
        assert_eq!(c.domain().unwrap(), Domain::Group(Group::Rotation));
        assert_eq!(c.suites, Suite::defaults());
        assert_eq!(c.quadrature_band(), 4);
        let s = c.spectrum().unwrap();
        assert_eq!(s.alpha(crate::IrrepLabel::RotationDegree(2)), 0.25);
    }

    #[test]
    fn families_and_errors() {
        let mut c = parse(r#"{"schema_version": 1, "group": "cyclic", "N": 6, "band_limit": 3, "spectrum": "delta 1"}"#);
        assert!(c.spectrum().unwrap().total_variance() == 2.0);
        c.spectrum = SpectrumSource::Family("banana 2".into());
        assert!(matches!(c.spectrum(), Err(HarnessError::Config(_))));
        c.spectrum = SpectrumSource::Family("geometric".into());
        assert!(c.spectrum().is_err());
        c.replicates = 10;
        assert!(c.validate(true).is_err());
        assert!(c.validate(false).is_ok());
        c.schema_version = 2;
        assert!(c.validate(false).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"schema_version": 1, "group": "so3", "band_limit": 4, "spectrum": "zero", "oops": 1}"#);
        assert!(r.is_err());
    }
}
