//! Sampled initial data for the reference scenarios.

use serde::{Deserialize, Serialize};

use super::bounds::InitialNorms;
use crate::criticality::c_three_halves;
use crate::error::{Error, Result};
use crate::functionals::{energy, virial, EnergyBreakdown};
use crate::phase_space::{lp_norm, momentum_support, sample_ensemble, AnalyticDensity, Characteristic, Ensemble, PhaseDensity};
use crate::profile::RadialProfile;

/// Default cut |p × q| ≥ ℓ in unscaled coordinates.
pub const DEFAULT_CUT: f64 = 0.02;

/// Summary of sampled initial data; analytic quantities refer to the
/// closed-form density, the energy to the ensemble itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialSummary {
    pub kappa: f64,
    pub lambda: f64,
    pub norm_3_2: f64,
    pub support: f64,
    /// Uniform inward radial momentum added to every characteristic.
    pub boost: f64,
    pub energy: EnergyBreakdown,
    pub virial: f64,
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub density: AnalyticDensity,
    pub ensemble: Ensemble,
    pub summary: InitialSummary,
}

impl InitialData {
    /// Norms for the a-priori bounds, with ‖f₀‖_α from the closed form.
    pub fn norms(&self, alpha: f64) -> Result<InitialNorms> {
        let f = PhaseDensity::from(self.density.clone());
        Ok(InitialNorms {
            energy: self.summary.energy.total,
            norm_3_2: self.summary.norm_3_2,
            alpha,
            norm_alpha: lp_norm(&f, alpha)?,
            support: self.summary.support,
        })
    }
}

/// h₋²/‖h₋‖₂² for the Plummer potential with the angular-momentum cut.
pub fn plummer_base(cut: f64) -> Result<AnalyticDensity> {
    AnalyticDensity::hminus_power(RadialProfile::plummer(1.0)?, 2.0)?.with_angular_momentum_cut(cut)
}

/// Samples the double-scaled Plummer density f_{κ,λ}.
pub fn plummer_data(kappa: f64, lambda: f64, cut: f64, n: usize, seed: u64) -> Result<InitialData> {
    let density = plummer_base(cut)?.double_scale(kappa, lambda)?;
    let ensemble = sample_ensemble(&density, n, seed)?;
    summarize(density, ensemble, kappa, lambda, 0.0)
}

/// Plummer data with ‖f₀‖_{3/2} = ratio·C_{3/2} at the given κ.
pub fn plummer_at_ratio(ratio: f64, kappa: f64, cut: f64, n: usize, seed: u64) -> Result<InitialData> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::param("ratio", format!("must be positive, got {ratio}")));
    }
    let base = lp_norm(&plummer_base(cut)?.into(), 1.5)?;
    let lambda = ratio * c_three_halves() / (base * kappa);
    plummer_data(kappa, lambda, cut, n, seed)
}

/// Adds the inward radial momentum b that makes the ensemble energy vanish.
pub fn boost_to_zero_energy(data: &InitialData) -> Result<InitialData> {
    let e0 = data.summary.energy.total;
    if !(e0 < 0.0) {
        return Err(Error::param("energy", "boost to zero energy needs negative energy"));
    }
    let boosted = |b: f64| {
        data.ensemble
            .characteristics()
            .iter()
            .map(|c| Characteristic::new(c.r, c.p_r - b, c.l, c.w))
            .collect::<Vec<_>>()
    };
    let kinetic = |b: f64| boosted(b).iter().map(|c| c.w * c.gamma()).sum::<f64>();
    let target = -data.summary.energy.potential;
    let mut hi = 1.0;
    while kinetic(hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::param("energy", "no finite boost reaches zero energy"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kinetic(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = if (kinetic(lo) - target).abs() < (kinetic(hi) - target).abs() { lo } else { hi };
    let ensemble = Ensemble::new(boosted(b))?;
    let s = data.summary;
    summarize(data.density.clone(), ensemble, s.kappa, s.lambda, b)
}

fn summarize(density: AnalyticDensity, ensemble: Ensemble, kappa: f64, lambda: f64, boost: f64) -> Result<InitialData> {
    let f = PhaseDensity::from(density.clone());
    let norm_3_2 = lp_norm(&f, 1.5)?;
    let sampled = PhaseDensity::from(ensemble.clone());
    let summary = InitialSummary {
        kappa,
        lambda,
        norm_3_2,
        support: if boost == 0.0 { momentum_support(&f)? } else { ensemble.momentum_support() },
        boost,
        energy: energy(&sampled)?,
        virial: virial(&sampled),
    };
    Ok(InitialData { density, ensemble, summary })
}
