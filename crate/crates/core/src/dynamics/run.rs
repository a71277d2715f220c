//! Time loop with adaptive steps, cadence records and early termination.

use serde::{Deserialize, Serialize};

use super::blowup::{detect_blowup, first_trigger, BlowupConfig, Verdict};
use super::bounds::{BoundContext, BoundFlags};
use super::diagnostics::{attach_residuals, check_dilation_identity, check_second_virial, DiagnosticsRecord, ResidualSeries};
use super::state::{FieldMode, SimulationState, DEFAULT_R_FLOOR};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::phase_space::{Characteristic, Ensemble};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub cadence: f64,
    /// Accuracy parameter of the adaptive step.
    pub epsilon: f64,
    /// Upper step bound; defaults to the cadence.
    pub dt_max: Option<f64>,
    pub dt_min: f64,
    pub r_floor: f64,
    pub max_steps: u64,
    pub field: FieldMode,
    pub blowup: BlowupConfig,
    /// ‖f₀‖_{3/2}, used for the subcritical verdict and carried into records.
    pub norm_3_2: Option<f64>,
    pub bounds: Option<BoundContext>,
    pub exec: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_end: 10.0,
            cadence: 0.1,
            epsilon: 1e-2,
            dt_max: None,
            dt_min: 1e-14,
            r_floor: DEFAULT_R_FLOOR,
            max_steps: 50_000_000,
            field: FieldMode::SelfConsistent,
            blowup: BlowupConfig::default(),
            norm_3_2: None,
            bounds: None,
            exec: Execution::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("t_end", self.t_end)?;
        positive("cadence", self.cadence)?;
        positive("epsilon", self.epsilon)?;
        positive("dt_min", self.dt_min)?;
        positive("r_floor", self.r_floor)?;
        if let Some(d) = self.dt_max {
            positive("dt_max", d)?;
        }
        positive("support_growth", self.blowup.support_growth)?;
        positive("second_moment_floor", self.blowup.second_moment_floor)?;
        Ok(())
    }

    fn subcritical(&self) -> bool {
        self.norm_3_2
            .map(|n| n < crate::criticality::c_three_halves())
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drifts {
    /// max |E(t) − E(0)| over |E(0)|, or over E_p(0) when |E(0)| < 10⁻⁶E_p(0)
    pub energy: f64,
    /// max |M(t) − M(0)|
    pub mass: f64,
    /// max over characteristics of |L(t) − L(0)|
    pub angular_momentum: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub verdict: Verdict,
    pub steps: u64,
    pub reflections: usize,
    pub drifts: Drifts,
    pub dilation: ResidualSeries,
    pub second_virial: ResidualSeries,
    /// Union of all bound flags raised along the run.
    pub flags: BoundFlags,
    pub final_state: SimulationState,
    pub step_limit_reached: bool,
}

impl RunOutcome {
    pub fn t_final(&self) -> f64 {
        self.final_state.time()
    }

    pub fn final_characteristics(&self) -> Vec<Characteristic> {
        self.final_state.characteristics()
    }
}

/// Evolves `initial` until `t_end`, a blow-up trigger, or step underflow.
pub fn run(initial: &Ensemble, cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut state = SimulationState::new(initial, cfg.field.clone(), cfg.exec)?.with_r_floor(cfg.r_floor)?;
    let norm = cfg.norm_3_2.unwrap_or(f64::NAN);
    let bounds = cfg.bounds.as_ref();
    let mut records = vec![state.record(norm, 0.0, bounds)?];
    let p0 = records[0].support;
    let mut sup = p0;
    let dt_max = cfg.dt_max.unwrap_or(cfg.cadence);
    let mut k: u64 = 1;
    let next_time = |k: u64| (k as f64 * cfg.cadence).min(cfg.t_end);
    let mut target = next_time(k);
    let mut steps = 0u64;
    let mut verdict = None;
    let mut step_limit_reached = false;
    let snap = 1e-12 * cfg.cadence;

    'outer: while state.time() < cfg.t_end - snap {
        let (dt_phys, _) = state.scan(cfg.epsilon);
        if dt_phys < cfg.dt_min {
            records.push(state.record(norm, sup, bounds)?);
            verdict = Some(Verdict::UnresolvedCollapse { t: state.time() });
            break;
        }
        let remaining = target - state.time();
        let dt = dt_phys.min(dt_max).min(remaining);
        state.step(dt)?;
        steps += 1;
        let (_, support) = state.scan(cfg.epsilon);
        sup = sup.max(support);
        let on_cadence = target - state.time() <= snap;
        if on_cadence {
            state.t = target;
        }
        if on_cadence || sup > cfg.blowup.support_growth * p0 {
            records.push(state.record(norm, sup, bounds)?);
            if on_cadence {
                k += 1;
                target = next_time(k);
            }
            if first_trigger(&records, &cfg.blowup).is_some() {
                break 'outer;
            }
        }
        if steps >= cfg.max_steps {
            step_limit_reached = true;
            records.push(state.record(norm, sup, bounds)?);
            break;
        }
    }

    let verdict = verdict.unwrap_or_else(|| detect_blowup(&records, &cfg.blowup, cfg.subcritical() && !step_limit_reached));
    attach_residuals(&mut records);
    let e0 = records[0].energy;
    let scale = if e0.abs() < 1e-6 * records[0].kinetic { records[0].kinetic } else { e0.abs() };
    let m0 = records[0].mass;
    let drifts = Drifts {
        energy: records.iter().map(|r| (r.energy - e0).abs() / scale).fold(0.0, f64::max),
        mass: records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max),
        angular_momentum: initial
            .characteristics()
            .iter()
            .zip(state.characteristics())
            .map(|(a, b)| (a.l - b.l).abs())
            .fold(0.0, f64::max),
    };
    let flags = records.iter().fold(BoundFlags::empty(), |f, r| f | r.flags);
    Ok(RunOutcome {
        dilation: check_dilation_identity(&records),
        second_virial: check_second_virial(&records),
        records,
        verdict,
        steps,
        reflections: state.reflections(),
        drifts,
        flags,
        final_state: state,
        step_limit_reached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cold_collapse_of_few_shells_is_bounded_by_validation() {
        let ens = Ensemble::new(vec![Characteristic::new(1.0, 0.0, 1.0, 1.0)]).unwrap();
        let cfg = RunConfig {
            t_end: -1.0,
            ..RunConfig::default()
        };
        assert!(run(&ens, &cfg).is_err());
    }

    #[test]
    fn records_land_on_cadence() {
        let ens = Ensemble::new(
            (1..=50)
                .map(|i| Characteristic::new(i as f64 * 0.1, 0.0, 0.3, 0.02))
                .collect(),
        )
        .unwrap();
        let cfg = RunConfig {
            t_end: 1.0,
            cadence: 0.25,
            norm_3_2: Some(0.1),
            ..RunConfig::default()
        };
        let out = run(&ens, &cfg).unwrap();
        let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(out.verdict, Verdict::NoBlowUpObserved);
        assert_eq!(out.drifts.mass, 0.0);
        assert_eq!(out.drifts.angular_momentum, 0.0);
        assert!(out.drifts.energy < 1e-4, "{}", out.drifts.energy);
    }
}
