//! Scenario configuration read from a TOML file.

use std::path::{Path, PathBuf};

use rvp_core::dynamics::{BlowupConfig, RunConfig, DEFAULT_CUT, DEFAULT_R_FLOOR};
use rvp_core::par::Execution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Constants,
    TrialFamily,
    Evolve,
    BlowupSweep,
    BoundsAudit,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Constants => "constants",
            Scenario::TrialFamily => "trial-family",
            Scenario::Evolve => "evolve",
            Scenario::BlowupSweep => "blowup-sweep",
            Scenario::BoundsAudit => "bounds-audit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub constants: ConstantsSection,
    pub family: FamilySection,
    pub initial: InitialSection,
    pub solver: SolverSection,
    pub blowup: BlowupConfig,
    pub sweep: SweepSection,
    pub audit: AuditSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: None,
            seed: 7,
            out: None,
            constants: ConstantsSection::default(),
            family: FamilySection::default(),
            initial: InitialSection::default(),
            solver: SolverSection::default(),
            blowup: BlowupConfig::default(),
            sweep: SweepSection::default(),
            audit: AuditSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSection {
    pub betas: Vec<f64>,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        ConstantsSection {
            betas: vec![1.5, 2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySection {
    /// Values of ε; each hyperbola is κλ = 1 + ε.
    pub epsilons: Vec<f64>,
    pub kappas: Vec<f64>,
    pub beta: f64,
    pub theta: f64,
    pub deltas: Vec<f64>,
}

impl Default for FamilySection {
    fn default() -> Self {
        FamilySection {
            epsilons: vec![-0.5, 0.0, 0.5, 1.0],
            kappas: vec![0.5, 1.0, 2.0, 4.0],
            beta: 1.3,
            theta: 3.0,
            deltas: vec![0.42],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    /// ‖f₀‖_{3/2}/C_{3/2}; ignored when `lambda` is set.
    pub ratio: Option<f64>,
    pub kappa: f64,
    pub lambda: Option<f64>,
    pub cut: f64,
    pub zero_energy: bool,
    pub n: usize,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            ratio: Some(0.5),
            kappa: 0.5,
            lambda: None,
            cut: DEFAULT_CUT,
            zero_energy: false,
            n: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub t_end: f64,
    pub cadence: f64,
    pub epsilon: f64,
    pub dt_min: f64,
    pub r_floor: f64,
    pub max_steps: u64,
    /// Evolve in the frozen initial field instead of the self-consistent one.
    pub frozen: bool,
    pub parallel: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = RunConfig::default();
        SolverSection {
            t_end: d.t_end,
            cadence: d.cadence,
            epsilon: d.epsilon,
            dt_min: d.dt_min,
            r_floor: DEFAULT_R_FLOOR,
            max_steps: d.max_steps,
            frozen: false,
            parallel: d.exec.is_parallel(),
        }
    }
}

impl SolverSection {
    pub fn run_config(&self, blowup: BlowupConfig) -> RunConfig {
        RunConfig {
            t_end: self.t_end,
            cadence: self.cadence,
            epsilon: self.epsilon,
            dt_min: self.dt_min,
            r_floor: self.r_floor,
            max_steps: self.max_steps,
            blowup,
            exec: if self.parallel { Execution::Parallel } else { Execution::Sequential },
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySign {
    Positive,
    Negative,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub ratios: Vec<f64>,
    pub signs: Vec<EnergySign>,
    /// κ for positive-energy rows.
    pub kappa_positive: f64,
    /// Largest κ tried when searching for negative energy.
    pub kappa_max: f64,
    pub n: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            ratios: vec![0.5, 2.0],
            signs: vec![EnergySign::Positive, EnergySign::Negative, EnergySign::Zero],
            kappa_positive: 0.5,
            kappa_max: 64.0,
            n: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSection {
    /// Lebesgue exponent α > 3 of the initial data used by the bounds.
    pub alpha: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection { alpha: 4.0 }
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, got {v}")))
    }
}

fn nonempty<T>(name: &'static str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(field(name, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenario.is_none() {
            return Err(field("scenario", "missing; set it in the file or pass --scenario"));
        }
        nonempty("constants.betas", &self.constants.betas)?;
        if let Some(b) = self.constants.betas.iter().find(|b| !(**b > 1.0 && b.is_finite())) {
            return Err(field("constants.betas", format!("every entry must exceed 1, got {b}")));
        }
        let f = &self.family;
        nonempty("family.epsilons", &f.epsilons)?;
        nonempty("family.kappas", &f.kappas)?;
        for &k in &f.kappas {
            positive("family.kappas", k)?;
        }
        if let Some(e) = f.epsilons.iter().find(|e| !(**e > -1.0 && e.is_finite())) {
            return Err(field("family.epsilons", format!("every entry must exceed -1, got {e}")));
        }
        if !(1.2..1.5).contains(&f.beta) {
            return Err(field("family.beta", format!("must lie in [1.2, 1.5), got {}", f.beta)));
        }
        positive("family.theta", f.theta)?;
        for &d in &f.deltas {
            positive("family.deltas", d)?;
        }
        let i = &self.initial;
        if let Some(l) = i.lambda {
            positive("initial.lambda", l)?;
        } else if let Some(r) = i.ratio {
            positive("initial.ratio", r)?;
        } else {
            return Err(field("initial", "set either ratio or lambda"));
        }
        positive("initial.kappa", i.kappa)?;
        if !(i.cut >= 0.0 && i.cut.is_finite()) {
            return Err(field("initial.cut", format!("must be nonnegative, got {}", i.cut)));
        }
        if i.n == 0 {
            return Err(field("initial.n", "must be at least 1"));
        }
        let s = &self.solver;
        positive("solver.t_end", s.t_end)?;
        positive("solver.cadence", s.cadence)?;
        positive("solver.epsilon", s.epsilon)?;
        positive("solver.dt_min", s.dt_min)?;
        positive("solver.r_floor", s.r_floor)?;
        if s.max_steps == 0 {
            return Err(field("solver.max_steps", "must be at least 1"));
        }
        positive("blowup.support_growth", self.blowup.support_growth)?;
        positive("blowup.second_moment_floor", self.blowup.second_moment_floor)?;
        let w = &self.sweep;
        nonempty("sweep.ratios", &w.ratios)?;
        nonempty("sweep.signs", &w.signs)?;
        for &r in &w.ratios {
            positive("sweep.ratios", r)?;
        }
        positive("sweep.kappa_positive", w.kappa_positive)?;
        positive("sweep.kappa_max", w.kappa_max)?;
        if w.n == 0 {
            return Err(field("sweep.n", "must be at least 1"));
        }
        if self.audit.alpha.is_nan() || self.audit.alpha <= 3.0 {
            return Err(field("audit.alpha", format!("must exceed 3, got {}", self.audit.alpha)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_uses_defaults() {
        let c = ScenarioConfig::parse("scenario = \"constants\"").unwrap();
        assert_eq!(c.scenario, Some(Scenario::Constants));
        assert_eq!(c.constants.betas, vec![1.5, 2.0, 3.0]);
        c.validate().unwrap();
    }

    #[test]
    fn field_errors_name_the_field() {
        let c = ScenarioConfig::parse("scenario = \"evolve\"\n[solver]\ncadence = -1.0").unwrap();
        let e = c.validate().unwrap_err().to_string();
        assert!(e.starts_with("solver.cadence:"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ScenarioConfig::parse("[solver]\ncadense = 0.1").unwrap_err().to_string();
        assert!(e.contains("cadense"), "{e}");
    }

    #[test]
    fn missing_scenario_is_reported() {
        let e = ScenarioConfig::default().validate().unwrap_err().to_string();
        assert!(e.starts_with("scenario:"), "{e}");
    }
}
