//! The five scenarios. Each writes its artifacts into the output directory as
//! soon as they exist and fills in the report.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rvp_core::criticality::{c_three_halves, cbeta_bounds, polytrope_cbeta_estimate};
use rvp_core::dynamics::{
    audit_grid, boost_to_zero_energy, plummer_at_ratio, plummer_data, run, write_diagnostics_csv, BoundContext,
    Drifts, FieldMode, InitialData, RunConfig, RunOutcome, Trigger, Verdict,
};
use rvp_core::profile::RadialProfile;
use rvp_core::radial_field::RadialField;
use rvp_core::trial_families::{cusp_flags, hyperbola_rows, squared_hminus_density};
use serde::Serialize;

use crate::config::{EnergySign, Scenario, ScenarioConfig};
use crate::plot::{line_chart, Series};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TriggerEvent {
    pub trigger: Trigger,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: &'static str,
    pub seed: u64,
    pub status: &'static str,
    pub verdict: Option<&'static str>,
    pub t_final: Option<f64>,
    pub triggers: Vec<TriggerEvent>,
    pub max_drifts: Option<Drifts>,
    pub flags: Vec<String>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
}

impl Report {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Report {
            scenario: scenario.name(),
            seed,
            status: "running",
            verdict: None,
            t_final: None,
            triggers: Vec::new(),
            max_drifts: None,
            flags: Vec::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
            error: None,
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    fn add_flags(&mut self, names: Vec<&'static str>) {
        for n in names {
            if !self.flags.iter().any(|f| f == n) {
                self.flags.push(n.to_string());
            }
        }
    }

    fn record_verdict(&mut self, verdict: Verdict) {
        if let Verdict::BlowUp { trigger, t } = verdict {
            self.triggers.push(TriggerEvent { trigger, t });
        }
    }

    /// 2 when a flag fired, 1 when a check failed, 0 otherwise.
    pub fn finish(&mut self) -> u8 {
        let (status, code) = if !self.flags.is_empty() {
            ("flags-fired", 2)
        } else if self.checks.iter().any(|c| !c.passed) {
            ("checks-failed", 1)
        } else {
            ("pass", 0)
        };
        self.status = status;
        code
    }
}

pub struct Runner<'a> {
    pub cfg: &'a ScenarioConfig,
    pub out: PathBuf,
    pub plot: bool,
    pub report: Report,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a ScenarioConfig, scenario: Scenario, out: PathBuf, plot: bool) -> Self {
        Runner {
            cfg,
            out,
            plot,
            report: Report::new(scenario, cfg.seed),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.report.artifacts.push(name.to_string());
        self.out.join(name)
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let w = self.create(name)?;
        serde_json::to_writer_pretty(w, value)?;
        Ok(())
    }

    fn chart(&mut self, name: &str, title: &str, x_label: &str, series: &[Series]) -> Result<()> {
        if self.plot {
            let path = self.path(name);
            line_chart(&path, title, x_label, series)?;
        }
        Ok(())
    }

    pub fn run(&mut self, scenario: Scenario) -> Result<()> {
        match scenario {
            Scenario::Constants => self.constants(),
            Scenario::TrialFamily => self.trial_family(),
            Scenario::Evolve => self.evolve(),
            Scenario::BlowupSweep => self.blowup_sweep(),
            Scenario::BoundsAudit => self.bounds_audit(),
        }
    }

    fn constants(&mut self) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            beta: f64,
            lower: f64,
            upper: f64,
            vanishing: bool,
            estimate: Option<f64>,
        }
        let mut rows = Vec::new();
        for &beta in &self.cfg.constants.betas {
            let b = cbeta_bounds(beta)?;
            let estimate = if beta > 1.5 {
                Some(polytrope_cbeta_estimate(beta)?)
            } else if beta == 1.5 {
                Some(c_three_halves())
            } else {
                None
            };
            rows.push(Row {
                beta,
                lower: b.lower,
                upper: b.upper,
                vanishing: b.vanishing,
                estimate,
            });
        }
        let mut w = csv::Writer::from_writer(self.create("constants.csv")?);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        for r in &rows {
            if r.beta == 1.5 {
                let gap = (r.upper - r.lower).abs();
                self.report.check("brackets coincide at 3/2", gap <= 1e-12, format!("gap {gap:.2e}"));
            } else if let Some(e) = r.estimate {
                let inside = r.lower <= e && e <= r.upper;
                self.report.check(
                    &format!("polytrope estimate in bracket at beta={}", r.beta),
                    inside,
                    format!("{:.6} <= {e:.6} <= {:.6}", r.lower, r.upper),
                );
            }
        }
        let pick = |f: fn(&Row) -> Option<f64>| rows.iter().filter_map(|r| f(r).map(|v| (r.beta, v))).collect();
        self.chart(
            "constants.svg",
            "C_beta brackets",
            "beta",
            &[
                Series { name: "lower", points: pick(|r| Some(r.lower)) },
                Series { name: "upper", points: pick(|r| Some(r.upper)) },
                Series { name: "polytrope", points: pick(|r| r.estimate) },
            ],
        )
    }

    fn trial_family(&mut self) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            epsilon: f64,
            kappa: f64,
            lambda: f64,
            norm_3_2: f64,
            k_tilde: f64,
            e_tilde: f64,
        }
        let fam = &self.cfg.family;
        let f = squared_hminus_density(&RadialProfile::plummer(1.0)?)?;
        let mut rows = Vec::new();
        for &eps in &fam.epsilons {
            for r in hyperbola_rows(&f, 1.0 + eps, &fam.kappas)? {
                rows.push(Row {
                    epsilon: eps,
                    kappa: r.kappa,
                    lambda: r.lambda,
                    norm_3_2: r.norm_3_2,
                    k_tilde: r.k_tilde,
                    e_tilde: r.e_tilde,
                });
            }
        }
        let mut w = csv::Writer::from_writer(self.create("family.csv")?);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let worst = rows
            .iter()
            .map(|r| (r.norm_3_2 / ((1.0 + r.epsilon) * c_three_halves()) - 1.0).abs())
            .fold(0.0, f64::max);
        self.report.check("norm constant along hyperbolas", worst < 1e-6, format!("max rel deviation {worst:.2e}"));

        let mut w = csv::Writer::from_writer(self.create("cusp.csv")?);
        let (beta, theta) = (fam.beta, fam.theta);
        for &delta in &fam.deltas {
            let c = cusp_flags(beta, theta, delta)?;
            w.serialize(c)?;
            if c.in_window {
                self.report.check(
                    &format!("cusp counterexample at delta={delta}"),
                    c.is_counterexample(),
                    format!("{c:?}"),
                );
            }
        }
        w.flush()?;

        let names: Vec<String> = fam.epsilons.iter().map(|e| format!("epsilon = {e}")).collect();
        let series: Vec<Series> = fam
            .epsilons
            .iter()
            .zip(&names)
            .map(|(&eps, name)| Series {
                name,
                points: rows.iter().filter(|r| r.epsilon == eps).map(|r| (r.kappa, r.e_tilde)).collect(),
            })
            .collect();
        self.chart("family.svg", "Energy along hyperbolas", "kappa", &series)
    }

    fn initial_data(&self, n: usize) -> Result<InitialData> {
        let i = &self.cfg.initial;
        let data = match i.lambda {
            Some(lambda) => plummer_data(i.kappa, lambda, i.cut, n, self.cfg.seed)?,
            None => plummer_at_ratio(i.ratio.expect("validated"), i.kappa, i.cut, n, self.cfg.seed)?,
        };
        Ok(if i.zero_energy { boost_to_zero_energy(&data)? } else { data })
    }

    /// Bound context for subcritical data with positive energy.
    fn bound_context(&self, data: &InitialData) -> Result<Option<BoundContext>> {
        let s = &data.summary;
        if s.norm_3_2 < c_three_halves() && s.energy.total > 0.0 && s.boost == 0.0 {
            Ok(Some(BoundContext::new(data.norms(self.cfg.audit.alpha)?)?))
        } else {
            Ok(None)
        }
    }

    fn run_config(&self, data: &InitialData, bounds: Option<BoundContext>) -> RunConfig {
        let field = if self.cfg.solver.frozen {
            FieldMode::Snapshot(RadialField::from_shells(&data.ensemble))
        } else {
            FieldMode::SelfConsistent
        };
        RunConfig {
            field,
            norm_3_2: Some(data.summary.norm_3_2),
            bounds,
            ..self.cfg.solver.run_config(self.cfg.blowup)
        }
    }

    fn write_run(&mut self, outcome: &RunOutcome) -> Result<()> {
        let w = self.create("diagnostics.csv")?;
        write_diagnostics_csv(&outcome.records, w)?;
        let r = &mut self.report;
        r.verdict = Some(outcome.verdict.label());
        r.t_final = Some(outcome.t_final());
        r.max_drifts = Some(outcome.drifts);
        r.record_verdict(outcome.verdict);
        r.add_flags(outcome.flags.names());
        let rec = &outcome.records;
        let pts = |f: fn(&rvp_core::dynamics::DiagnosticsRecord) -> f64| rec.iter().map(|r| (r.t, f(r))).collect();
        self.chart(
            "diagnostics.svg",
            "Diagnostics",
            "t",
            &[
                Series { name: "energy", points: pts(|r| r.energy) },
                Series { name: "virial V", points: pts(|r| r.virial) },
                Series { name: "second moment", points: pts(|r| r.second_moment) },
            ],
        )?;
        self.chart(
            "support.svg",
            "Momentum support",
            "t",
            &[Series { name: "P(t)", points: pts(|r| r.support_sup) }],
        )
    }

    fn conservation_checks(&mut self, outcome: &RunOutcome) {
        let d = outcome.drifts;
        let r = &mut self.report;
        r.check("mass conserved", d.mass == 0.0, format!("drift {:e}", d.mass));
        r.check("angular momentum conserved", d.angular_momentum == 0.0, format!("drift {:e}", d.angular_momentum));
        if !matches!(outcome.verdict, Verdict::BlowUp { .. } | Verdict::UnresolvedCollapse { .. }) {
            r.check("energy drift below 1e-3", d.energy < 1e-3, format!("drift {:.3e}", d.energy));
        }
        r.check("step limit not reached", !outcome.step_limit_reached, format!("{} steps", outcome.steps));
    }

    fn evolve(&mut self) -> Result<()> {
        let data = self.initial_data(self.cfg.initial.n)?;
        self.write_json("initial.json", &data.summary)?;
        let bounds = self.bound_context(&data)?;
        let outcome = run(&data.ensemble, &self.run_config(&data, bounds))?;
        self.write_run(&outcome)?;
        self.conservation_checks(&outcome);
        if outcome.verdict == Verdict::Inconclusive {
            self.report.check("verdict reached", false, "no trigger fired for non-subcritical data".into());
        }
        Ok(())
    }

    fn bounds_audit(&mut self) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            t: f64,
            dirichlet: f64,
            kinetic: f64,
            rho: f64,
            force: f64,
            support: f64,
            flags: String,
        }
        let data = self.initial_data(self.cfg.initial.n)?;
        self.write_json("initial.json", &data.summary)?;
        let Some(ctx) = self.bound_context(&data)? else {
            bail!("bounds audit needs unboosted subcritical data with positive energy");
        };
        self.write_json("bounds.json", &ctx)?;
        let outcome = run(&data.ensemble, &self.run_config(&data, Some(ctx)))?;
        self.write_run(&outcome)?;
        let rows: Vec<Row> = outcome
            .records
            .iter()
            .map(|r| Row {
                t: r.t,
                dirichlet: r.dirichlet / ctx.dirichlet_bound,
                kinetic: r.kinetic / ctx.kinetic_bound,
                rho: r.rho_norm / ctx.density_bound,
                force: r.max_force / ctx.force_bound(r.rho_norm, r.support),
                support: r.support_sup / ctx.support_bound,
                flags: r.flags.label(),
            })
            .collect();
        let mut w = csv::Writer::from_writer(self.create("audit.csv")?);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let last = outcome.records.last().expect("at least one record");
        let limit = ctx.force_bound(last.rho_norm, last.support);
        let field = outcome.final_state.field();
        let mut worst = 0.0f64;
        for &x in audit_grid().radii() {
            worst = worst.max(field.force_at(x)?.abs() / limit);
        }
        self.report.check("force bound on audit grid", worst <= 1.0, format!("max |F|/bound {worst:.3}"));
        self.report.check(
            "no blow-up for subcritical data",
            outcome.verdict == Verdict::NoBlowUpObserved,
            outcome.verdict.label().into(),
        );
        self.conservation_checks(&outcome);
        let pts = |f: fn(&Row) -> f64| rows.iter().map(|r| (r.t, f(r))).collect();
        self.chart(
            "audit.svg",
            "Quantities relative to their a-priori bounds",
            "t",
            &[
                Series { name: "dirichlet", points: pts(|r| r.dirichlet) },
                Series { name: "kinetic", points: pts(|r| r.kinetic) },
                Series { name: "density", points: pts(|r| r.rho) },
                Series { name: "force", points: pts(|r| r.force) },
            ],
        )
    }

    /// Sampled data at the given norm ratio with energy of the requested sign.
    fn sweep_data(&self, ratio: f64, sign: EnergySign) -> Result<Option<InitialData>> {
        let (s, i) = (&self.cfg.sweep, &self.cfg.initial);
        let at = |kappa: f64| plummer_at_ratio(ratio, kappa, i.cut, s.n, self.cfg.seed);
        if sign == EnergySign::Positive {
            let d = at(s.kappa_positive)?;
            return Ok((d.summary.energy.total > 0.0).then_some(d));
        }
        let mut kappa = 1.0;
        while kappa <= s.kappa_max {
            let d = at(kappa)?;
            if d.summary.energy.total < 0.0 {
                return Ok(Some(if sign == EnergySign::Zero { boost_to_zero_energy(&d)? } else { d }));
            }
            kappa *= 2.0;
        }
        Ok(None)
    }

    fn blowup_sweep(&mut self) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            ratio: f64,
            sign: EnergySign,
            kappa: f64,
            lambda: f64,
            energy: f64,
            virial: f64,
            verdict: &'static str,
            trigger: Option<Trigger>,
            t_final: f64,
            steps: u64,
        }
        let mut w = csv::Writer::from_writer(self.create("blowup_sweep.csv")?);
        let mut worst: Option<Drifts> = None;
        for &ratio in &self.cfg.sweep.ratios.clone() {
            for &sign in &self.cfg.sweep.signs.clone() {
                let label = format!("ratio={ratio} sign={sign:?}").to_lowercase();
                let Some(data) = self.sweep_data(ratio, sign)? else {
                    self.report.check(&format!("{label} skipped"), true, "no data with this energy sign".into());
                    continue;
                };
                let outcome = run(&data.ensemble, &self.run_config(&data, None))?;
                let s = data.summary;
                let trigger = match outcome.verdict {
                    Verdict::BlowUp { trigger, .. } => Some(trigger),
                    _ => None,
                };
                w.serialize(Row {
                    ratio,
                    sign,
                    kappa: s.kappa,
                    lambda: s.lambda,
                    energy: s.energy.total,
                    virial: s.virial,
                    verdict: outcome.verdict.label(),
                    trigger,
                    t_final: outcome.t_final(),
                    steps: outcome.steps,
                })?;
                w.flush()?;
                self.report.record_verdict(outcome.verdict);
                self.report.add_flags(outcome.flags.names());
                let d = outcome.drifts;
                worst = Some(match worst {
                    None => d,
                    Some(m) => Drifts {
                        energy: m.energy.max(d.energy),
                        mass: m.mass.max(d.mass),
                        angular_momentum: m.angular_momentum.max(d.angular_momentum),
                    },
                });
                let label_v = outcome.verdict.label();
                if ratio < 1.0 {
                    self.report.check(&label, outcome.verdict == Verdict::NoBlowUpObserved, label_v.into());
                } else if s.energy.total < 0.0 || (sign == EnergySign::Zero && s.virial <= -0.5) {
                    self.report.check(&label, outcome.verdict.is_blowup(), label_v.into());
                }
            }
        }
        self.report.max_drifts = worst;
        Ok(())
    }
}

/// Output directory: flag, then config, then `out/<scenario>`.
pub fn output_dir(flag: Option<&Path>, cfg: &ScenarioConfig, scenario: Scenario) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(scenario.name()))
}
