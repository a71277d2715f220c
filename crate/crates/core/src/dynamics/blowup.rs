//! Blow-up verdicts from diagnostics series.

use serde::{Deserialize, Serialize};

use super::diagnostics::DiagnosticsRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    /// Fires when P(t) exceeds this multiple of P(0).
    pub support_growth: f64,
    /// Fires when Σ w r²γ drops below this fraction of its initial value
    /// while decreasing at least as fast as 2V + 1 permits.
    pub second_moment_floor: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            support_growth: 1e3,
            second_moment_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    SupportGrowth,
    SecondMomentCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    BlowUp { trigger: Trigger, t: f64 },
    NoBlowUpObserved,
    Inconclusive,
    UnresolvedCollapse { t: f64 },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::BlowUp { .. } => "blow-up",
            Verdict::NoBlowUpObserved => "no blow-up observed",
            Verdict::Inconclusive => "inconclusive",
            Verdict::UnresolvedCollapse { .. } => "unresolved collapse",
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, Verdict::BlowUp { .. })
    }
}

/// First trigger that fired, scanning the records in order.
pub fn first_trigger(records: &[DiagnosticsRecord], cfg: &BlowupConfig) -> Option<(Trigger, f64)> {
    let first = records.first()?;
    let (p0, m0) = (first.support, first.second_moment);
    for (i, r) in records.iter().enumerate() {
        if r.support_sup > cfg.support_growth * p0 {
            return Some((Trigger::SupportGrowth, r.t));
        }
        if i > 0 && r.second_moment < cfg.second_moment_floor * m0 {
            let prev = &records[i - 1];
            let slope = (r.second_moment - prev.second_moment) / (r.t - prev.t);
            if slope <= 2.0 * r.virial.max(prev.virial) + 1.0 {
                return Some((Trigger::SecondMomentCollapse, r.t));
            }
        }
    }
    None
}

/// Verdict for a finished series. Runs without a trigger are reported as
/// "no blow-up observed" only for subcritical data.
pub fn detect_blowup(records: &[DiagnosticsRecord], cfg: &BlowupConfig, subcritical: bool) -> Verdict {
    match first_trigger(records, cfg) {
        Some((trigger, t)) => Verdict::BlowUp { trigger, t },
        None if subcritical => Verdict::NoBlowUpObserved,
        None => Verdict::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::bounds::BoundFlags;

    fn rec(t: f64, support: f64, m2: f64, v: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            energy: 0.0,
            kinetic: 1.0,
            potential: 0.0,
            ultra: 0.0,
            inverse_gamma: 1.0,
            virial: v,
            mass: 1.0,
            norm_3_2: 0.1,
            support,
            support_sup: support,
            second_moment: m2,
            sphericity: 0.0,
            force_virial: 0.0,
            dirichlet: 0.0,
            rho_norm: 0.0,
            max_force: 0.0,
            dilation_residual: 0.0,
            virial2_residual: 0.0,
            flags: BoundFlags::empty(),
        }
    }

    #[test]
    fn support_growth_fires() {
        let recs = [rec(0.0, 1.0, 1.0, 0.0), rec(1.0, 2e3, 1.0, 0.0)];
        let v = detect_blowup(&recs, &BlowupConfig::default(), false);
        assert_eq!(v, Verdict::BlowUp { trigger: Trigger::SupportGrowth, t: 1.0 });
    }

    #[test]
    fn second_moment_collapse_fires() {
        let recs = [rec(0.0, 1.0, 1.0, -0.7), rec(1.0, 1.0, 5e-4, -0.7)];
        let v = detect_blowup(&recs, &BlowupConfig::default(), false);
        assert_eq!(v, Verdict::BlowUp { trigger: Trigger::SecondMomentCollapse, t: 1.0 });
    }

    #[test]
    fn quiet_runs() {
        let recs = [rec(0.0, 1.0, 1.0, 0.0), rec(1.0, 1.1, 1.0, 0.0)];
        assert_eq!(detect_blowup(&recs, &BlowupConfig::default(), true), Verdict::NoBlowUpObserved);
        assert_eq!(detect_blowup(&recs, &BlowupConfig::default(), false), Verdict::Inconclusive);
    }
}
