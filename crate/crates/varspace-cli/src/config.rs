//! Run configurations: one structured TOML file per experiment. Unknown
//! keys are rejected so typos cannot silently corrupt an experiment.

use serde::Deserialize;

use varspace::domain::QuadKind;
use varspace::{BoxDomain, DictionaryConfig, RidgeConfig, SolverOptions, SpectralConfig};

use crate::RunError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: String,
    pub seed: Option<u64>,
    pub domain: Option<DomainSection>,
    pub quadrature: Option<QuadratureSection>,
    pub dictionary: Option<DictionarySection>,
    pub solver: Option<SolverSection>,
    pub target: Option<TargetSection>,
    pub maurey: Option<MaureySection>,
    pub onedim: Option<OnedimSection>,
    pub spectral_equiv: Option<SpectralEquivSection>,
    pub cutoff: Option<CutoffSection>,
    pub barron: Option<BarronSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub kind: QuadKind,
    pub level: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySection {
    pub family: String,
    pub k: Option<u32>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub directions: Option<usize>,
    pub offsets: Option<usize>,
    pub s: Option<f64>,
    pub xi_step: Option<f64>,
    pub xi_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub epsilon_rel: Option<f64>,
    pub epsilon_abs: Option<f64>,
    pub budget: Option<usize>,
    pub lambda_floor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub kind: String,
    pub offset: Option<f64>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub axis: Option<usize>,
    pub xi: Option<Vec<f64>>,
    pub path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaureySection {
    pub n_values: Vec<usize>,
    pub seeds: usize,
    pub seed_base: Option<u64>,
    pub target_count: usize,
    pub target_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnedimSection {
    pub level: u32,
    pub c1: f64,
    pub c2: f64,
    pub offsets: usize,
    pub budget: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralEquivSection {
    pub pair: String,
    pub s_values: Vec<f64>,
    pub xi_step: f64,
    pub xi_radius: f64,
    pub r_max: f64,
    pub level: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSection {
    pub r_values: Vec<f64>,
    pub s: f64,
    pub l: f64,
    pub smoothness: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarronSection {
    pub dims: Vec<usize>,
    pub per_dim: usize,
    pub seed: u64,
    pub sample_level: Option<u32>,
}

impl Config {
    pub fn parse(text: &str, expected_experiment: &str) -> Result<Self, RunError> {
        let config: Config = toml::from_str(text)
            .map_err(|e| RunError::config(format!("configuration parse error: {e}")))?;
        if config.experiment != expected_experiment {
            return Err(RunError::config(format!(
                "config is for experiment '{}', subcommand expects '{}'",
                config.experiment, expected_experiment
            )));
        }
        Ok(config)
    }

    pub fn domain(&self) -> Result<BoxDomain, RunError> {
        let section = self
            .domain
            .as_ref()
            .ok_or_else(|| RunError::config("missing [domain] section".to_string()))?;
        BoxDomain::new(section.lo.clone(), section.hi.clone())
            .map_err(|e| RunError::config(format!("domain: {e}")))
    }

    pub fn quadrature_spec(&self) -> Result<(QuadKind, u32), RunError> {
        let section = self
            .quadrature
            .as_ref()
            .ok_or_else(|| RunError::config("missing [quadrature] section".to_string()))?;
        Ok((section.kind, section.level))
    }

    pub fn dictionary(&self, domain: &BoxDomain) -> Result<DictionaryConfig, RunError> {
        let section = self
            .dictionary
            .as_ref()
            .ok_or_else(|| RunError::config("missing [dictionary] section".to_string()))?;
        let missing = |field: &str| RunError::config(format!("dictionary.{field} is required"));
        match section.family.as_str() {
            "ridge" => {
                let cfg = RidgeConfig::new(
                    domain.clone(),
                    section.k.ok_or_else(|| missing("k"))?,
                    section.c1.ok_or_else(|| missing("c1"))?,
                    section.c2.ok_or_else(|| missing("c2"))?,
                    section.directions.ok_or_else(|| missing("directions"))?,
                    section.offsets.ok_or_else(|| missing("offsets"))?,
                )
                .map_err(|e| RunError::config(format!("dictionary: {e}")))?;
                Ok(DictionaryConfig::Ridge(cfg))
            }
            "spectral" => {
                let cfg = SpectralConfig::new(
                    domain.clone(),
                    section.s.ok_or_else(|| missing("s"))?,
                    section.xi_step.ok_or_else(|| missing("xi_step"))?,
                    section.xi_radius.ok_or_else(|| missing("xi_radius"))?,
                )
                .map_err(|e| RunError::config(format!("dictionary: {e}")))?;
                Ok(DictionaryConfig::Spectral(cfg))
            }
            other => Err(RunError::config(format!(
                "dictionary.family must be 'ridge' or 'spectral', got '{other}'"
            ))),
        }
    }

    pub fn solver_options(&self, f_norm: f64) -> SolverOptions {
        let mut options = SolverOptions::default();
        if let Some(section) = &self.solver {
            if let Some(abs) = section.epsilon_abs {
                options.epsilon = Some(abs);
            } else if let Some(rel) = section.epsilon_rel {
                options.epsilon = Some(rel * f_norm);
            }
            if let Some(budget) = section.budget {
                options.budget = budget;
            }
            if let Some(floor) = section.lambda_floor {
                options.lambda_floor = floor;
            }
        }
        options
    }
}
