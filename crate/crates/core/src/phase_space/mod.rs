//! Phase-space densities: closed-form trial densities and weighted
//! characteristic ensembles in the spherical reduction (r, p_r, L).

mod analytic;
mod ensemble;
mod grid;
mod sampling;

pub use analytic::{AnalyticDensity, AnalyticForm, SpatialLaw, MOMENTUM_NODES};
pub use ensemble::{Characteristic, Ensemble, MASS_TOLERANCE, MIN_ANGULAR_MOMENTUM};
pub use grid::{RadialGrid, SpatialDensity};
pub use sampling::sample_ensemble;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::quadrature::Refined;

/// Default bound on the mass a projection may lose past the last grid node.
pub const ESCAPE_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    HminusPower,
    DoubleScaled,
    Product,
    Ensemble,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseDensity {
    Analytic(AnalyticDensity),
    Ensemble(Ensemble),
}

impl From<AnalyticDensity> for PhaseDensity {
    fn from(f: AnalyticDensity) -> Self {
        PhaseDensity::Analytic(f)
    }
}

impl From<Ensemble> for PhaseDensity {
    fn from(e: Ensemble) -> Self {
        PhaseDensity::Ensemble(e)
    }
}

impl PhaseDensity {
    pub fn kind(&self) -> DensityKind {
        match self {
            PhaseDensity::Ensemble(_) => DensityKind::Ensemble,
            PhaseDensity::Analytic(a) if a.is_scaled() => DensityKind::DoubleScaled,
            PhaseDensity::Analytic(a) => match a.form() {
                AnalyticForm::HminusPower { .. } => DensityKind::HminusPower,
                AnalyticForm::Product { .. } => DensityKind::Product,
            },
        }
    }

    pub fn as_analytic(&self) -> Option<&AnalyticDensity> {
        match self {
            PhaseDensity::Analytic(a) => Some(a),
            PhaseDensity::Ensemble(_) => None,
        }
    }

    pub fn as_ensemble(&self) -> Option<&Ensemble> {
        match self {
            PhaseDensity::Ensemble(e) => Some(e),
            PhaseDensity::Analytic(_) => None,
        }
    }

    pub fn double_scale(&self, kappa: f64, lambda: f64) -> Result<PhaseDensity> {
        if !(kappa > 0.0 && lambda > 0.0) {
            return Err(Error::param("kappa/lambda", "scales must be positive"));
        }
        Ok(match self {
            PhaseDensity::Analytic(a) => a.double_scale(kappa, lambda)?.into(),
            PhaseDensity::Ensemble(e) => e.double_scale(kappa, lambda).into(),
        })
    }
}

/// Spatial density on `grid`: deposition for ensembles, momentum quadrature
/// for closed forms.
pub fn project_spatial_density(f: &PhaseDensity, grid: &RadialGrid) -> Result<SpatialDensity> {
    project_spatial_density_with(f, grid, ESCAPE_TOLERANCE, Execution::default())
}

pub fn project_spatial_density_with(
    f: &PhaseDensity,
    grid: &RadialGrid,
    escape_tolerance: f64,
    exec: Execution,
) -> Result<SpatialDensity> {
    match f {
        PhaseDensity::Analytic(a) => a.project(grid, escape_tolerance, exec),
        PhaseDensity::Ensemble(e) => e.deposit(grid, escape_tolerance),
    }
}

/// (∬ f^α)^{1/α}.
pub fn lp_norm(f: &PhaseDensity, alpha: f64) -> Result<f64> {
    lp_norm_refined(f, alpha)?.finite(&format!("L^{alpha} norm"))
}

/// Like [`lp_norm`] but reports divergence instead of failing.
pub fn lp_norm_refined(f: &PhaseDensity, alpha: f64) -> Result<Refined> {
    if !(alpha >= 1.0) {
        return Err(Error::param("alpha", format!("must be >= 1, got {alpha}")));
    }
    match f {
        PhaseDensity::Ensemble(e) if alpha == 1.0 => Ok(Refined::Finite(e.total_mass())),
        PhaseDensity::Ensemble(_) => Err(Error::Unsupported {
            operation: "L^alpha norm with alpha > 1",
            representation: "ensemble",
        }),
        PhaseDensity::Analytic(a) => {
            let r = a.phase_integral_refined(&format!("L^{alpha} norm"), |v, _, _| v.powf(alpha))?;
            Ok(match r {
                Refined::Finite(v) => Refined::Finite(v.powf(1.0 / alpha)),
                d => d,
            })
        }
    }
}

/// sup |p| over the support.
pub fn momentum_support(f: &PhaseDensity) -> Result<f64> {
    match f {
        PhaseDensity::Ensemble(e) => Ok(e.momentum_support()),
        PhaseDensity::Analytic(a) => a.momentum_support(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialProfile;
    use approx::assert_relative_eq;

    #[test]
    fn ensembles_only_have_the_l1_norm() {
        let e: PhaseDensity = Ensemble::new(vec![Characteristic::new(1.0, 0.0, 1.0, 1.0)])
            .unwrap()
            .into();
        assert_eq!(lp_norm(&e, 1.0).unwrap(), 1.0);
        assert!(matches!(lp_norm(&e, 1.5), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn unit_product_norm() {
        let f: PhaseDensity = AnalyticDensity::product(1.0, SpatialLaw::UniformBall { radius: 1.0 })
            .unwrap()
            .into();
        let exact = (9.0 / (16.0 * std::f64::consts::PI.powi(2))).sqrt();
        assert_relative_eq!(lp_norm(&f, 2.0).unwrap(), exact, max_relative = 1e-10);
        assert_relative_eq!(lp_norm(&f, 1.0).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn plummer_trial_support_is_one() {
        let f: PhaseDensity =
            AnalyticDensity::hminus_power(RadialProfile::plummer(1.0).unwrap(), 2.0)
                .unwrap()
                .into();
        assert_eq!(momentum_support(&f).unwrap(), 1.0);
        assert_eq!(f.kind(), DensityKind::HminusPower);
        assert_eq!(f.double_scale(2.0, 1.0).unwrap().kind(), DensityKind::DoubleScaled);
    }

    #[test]
    fn cusp_support_is_unbounded() {
        let f: PhaseDensity =
            AnalyticDensity::hminus_power(RadialProfile::cusp(0.42, 1.0).unwrap(), 3.0)
                .unwrap()
                .into();
        assert!(matches!(momentum_support(&f), Err(Error::UnboundedMomentum)));
    }
}
