//! Explicit trial families: Plummer optimizers, h₋-power densities, the
//! double-scaling family and the cusp profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy, hminus_norm_pow, kinetic_moments};
use crate::phase_space::{lp_norm, lp_norm_refined, AnalyticDensity, PhaseDensity};
use crate::profile::RadialProfile;
use crate::quadrature::{integrate_radial, refine_toward_origin, Tolerance, RADIAL_HI};

/// φ_κ(r) = −κ(1+κ²r²)^{−1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlummerProfile {
    pub kappa: f64,
}

impl PlummerProfile {
    pub fn value(&self, r: f64) -> f64 {
        -self.kappa / (1.0 + self.kappa * self.kappa * r * r).sqrt()
    }

    pub fn profile(&self) -> RadialProfile {
        RadialProfile::Plummer { kappa: self.kappa }
    }

    /// ρ^{φ_κ}(r) = (3/4π)κ³(1+κ²r²)^{−5/2}.
    pub fn density(&self, r: f64) -> f64 {
        let k = self.kappa;
        0.75 / PI * k.powi(3) * (1.0 + k * k * r * r).powf(-2.5)
    }
}

impl From<PlummerProfile> for RadialProfile {
    fn from(p: PlummerProfile) -> Self {
        p.profile()
    }
}

/// ψ_δ(r) = −c·e^{−r}/r^δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspProfile {
    pub delta: f64,
    pub multiplier: f64,
}

impl CuspProfile {
    pub fn value(&self, r: f64) -> f64 {
        -self.multiplier * (-r).exp() / r.powf(self.delta)
    }

    pub fn profile(&self) -> RadialProfile {
        RadialProfile::Cusp {
            delta: self.delta,
            multiplier: self.multiplier,
        }
    }
}

impl From<CuspProfile> for RadialProfile {
    fn from(p: CuspProfile) -> Self {
        p.profile()
    }
}

pub fn plummer(kappa: f64) -> Result<PlummerProfile> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
    }
    Ok(PlummerProfile { kappa })
}

pub fn cusp(delta: f64, multiplier: f64) -> Result<CuspProfile> {
    RadialProfile::cusp(delta, multiplier)?;
    Ok(CuspProfile { delta, multiplier })
}

/// f^φ = h₋²/‖h₋‖₂².
pub fn squared_hminus_density(phi: &RadialProfile) -> Result<PhaseDensity> {
    power_hminus_density(phi, 2.0)
}

/// f̂^φ = h₋^ϑ/‖h₋‖_ϑ^ϑ.
pub fn power_hminus_density(phi: &RadialProfile, theta: f64) -> Result<PhaseDensity> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::param("theta", format!("must be positive, got {theta}")));
    }
    phi.check_nonpositive()?;
    Ok(AnalyticDensity::hminus_power(phi.clone(), theta)?.into())
}

/// ‖f̂^φ‖_β = ‖h₋‖_{ϑβ}^ϑ / ‖h₋‖_ϑ^ϑ.
pub fn power_density_norm(phi: &RadialProfile, theta: f64, beta: f64) -> Result<f64> {
    if !(beta >= 1.0) {
        return Err(Error::param("beta", format!("must be >= 1, got {beta}")));
    }
    let top = hminus_norm_pow(phi, theta * beta)?;
    let bottom = hminus_norm_pow(phi, theta)?;
    Ok(top.powf(1.0 / beta) / bottom)
}

/// ‖f^φ‖_{3/2} = ½(15/π)^{1/3}‖φ‖₆⁴/‖φ‖₅⁵.
pub fn squared_density_norm(phi: &RadialProfile) -> Result<f64> {
    let six = phi.norm_pow(6.0)?;
    let five = phi.norm_pow(5.0)?;
    Ok(0.5 * (15.0 / PI).cbrt() * six.powf(2.0 / 3.0) / five)
}

/// b(ϑ) in E_p^u(f̂^φ) = b(ϑ)‖φ‖_{ϑ+4}^{ϑ+4}/‖φ‖_{ϑ+3}^{ϑ+3}.
pub fn hminus_kinetic_coefficient(theta: f64) -> f64 {
    3.0 / (theta + 4.0)
}

/// f_{κ,λ}(p,q) = κ³λ³f(λp, κq).
pub fn double_scale(f: &PhaseDensity, kappa: f64, lambda: f64) -> Result<PhaseDensity> {
    f.double_scale(kappa, lambda)
}

/// Half-open interval [lower, upper) of admissible cusp exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub lower: f64,
    pub upper: f64,
}

impl DeltaWindow {
    pub fn is_empty(&self) -> bool {
        !(self.lower < self.upper)
    }

    pub fn contains(&self, delta: f64) -> bool {
        delta >= self.lower && delta < self.upper
    }

    pub fn midpoint(&self) -> Option<f64> {
        (!self.is_empty()).then_some(0.5 * (self.lower + self.upper))
    }
}

fn check_subcritical_beta(beta: f64) -> Result<()> {
    if !(1.2..1.5).contains(&beta) {
        return Err(Error::param("beta", format!("must lie in [6/5, 3/2), got {beta}")));
    }
    Ok(())
}

/// Open ϑ-range (2, 3/(5β−6)) for which the window is nonempty.
pub fn admissible_theta_range(beta: f64) -> Result<(f64, f64)> {
    check_subcritical_beta(beta)?;
    let d = 5.0 * beta - 6.0;
    Ok((2.0, if d > 0.0 { 3.0 / d } else { f64::INFINITY }))
}

/// Midpoint of the admissible ϑ-range, when bounded.
pub fn default_theta(beta: f64) -> Result<f64> {
    let (lo, hi) = admissible_theta_range(beta)?;
    if hi.is_finite() {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::param("beta", "theta range is unbounded at beta = 6/5"))
    }
}

/// [5/(6+2ϑ), min{3/(3+ϑβ), 3/(4+ϑ)}).
pub fn cusp_admissible_window(beta: f64, theta: f64) -> Result<DeltaWindow> {
    check_subcritical_beta(beta)?;
    if !(theta > 0.0) {
        return Err(Error::param("theta", format!("must be positive, got {theta}")));
    }
    Ok(DeltaWindow {
        lower: 5.0 / (6.0 + 2.0 * theta),
        upper: (3.0 / (3.0 + theta * beta)).min(3.0 / (4.0 + theta)),
    })
}

/// Integrability flags of the cusp density f̂^{ψ_δ} = h₋^ϑ/‖h₋‖_ϑ^ϑ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspFlags {
    pub beta: f64,
    pub theta: f64,
    pub delta: f64,
    pub in_window: bool,
    /// ‖f̂‖_β, or `None` when it diverges.
    pub norm_beta: Option<f64>,
    pub norm_3_2_divergent: bool,
    /// E_p^u(f̂), or `None` when it diverges.
    pub ultra: Option<f64>,
    pub density_6_5_divergent: bool,
}

impl CuspFlags {
    /// All four properties of the counterexample hold.
    pub fn is_counterexample(&self) -> bool {
        self.norm_beta.is_some() && self.norm_3_2_divergent && self.ultra.is_some() && self.density_6_5_divergent
    }
}

pub fn cusp_flags(beta: f64, theta: f64, delta: f64) -> Result<CuspFlags> {
    let in_window = cusp_admissible_window(beta, theta)?.contains(delta);
    let phi = RadialProfile::cusp(delta, 1.0)?;
    let density = AnalyticDensity::hminus_power(phi.clone(), theta)?;
    let f = PhaseDensity::from(density.clone());
    let norm_beta = lp_norm_refined(&f, beta)?;
    let norm_3_2 = lp_norm_refined(&f, 1.5)?;
    let ultra = match kinetic_moments(&density) {
        Ok((_, u, _)) => Some(u),
        Err(Error::Divergent { .. }) => None,
        Err(e) => return Err(e),
    };
    let breaks = phi.breakpoints();
    let rho = refine_toward_origin(|cut| {
        integrate_radial(
            |r| 4.0 * PI * r * r * density.spatial_density(r).powf(1.2),
            cut,
            RADIAL_HI,
            &breaks,
            Tolerance::default(),
        )
        .into_result("density L^6/5 norm")
    })?;
    Ok(CuspFlags {
        beta,
        theta,
        delta,
        in_window,
        norm_beta: norm_beta.finite("").ok(),
        norm_3_2_divergent: norm_3_2.is_divergent(),
        ultra,
        density_6_5_divergent: rho.is_divergent(),
    })
}

/// One row of the double-scaling table. K̃ and Ẽ are taken at the
/// self-consistent potential, where they reduce to E_p^u + E_q and E.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub kappa: f64,
    pub lambda: f64,
    pub norm_3_2: f64,
    pub k_tilde: f64,
    pub e_tilde: f64,
}

pub fn family_row(f: &PhaseDensity, kappa: f64, lambda: f64) -> Result<FamilyRow> {
    let g = f.double_scale(kappa, lambda)?;
    let e = energy(&g)?;
    Ok(FamilyRow {
        kappa,
        lambda,
        norm_3_2: lp_norm(&g, 1.5)?,
        k_tilde: e.ultra + e.potential,
        e_tilde: e.total,
    })
}

/// Rows along the hyperbola κλ = `product` for each κ.
pub fn hyperbola_rows(f: &PhaseDensity, product: f64, kappas: &[f64]) -> Result<Vec<FamilyRow>> {
    kappas.iter().map(|&k| family_row(f, k, product / k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::c_three_halves;
    use crate::functionals::{kato_form, kinetic_moments};
    use approx::assert_relative_eq;

    #[test]
    fn cusp_counterexample_flags() {
        let c = cusp_flags(1.3, 3.0, 0.42).unwrap();
        assert!(c.in_window && c.is_counterexample(), "{c:?}");
        let outside = cusp_flags(1.3, 3.0, 0.3).unwrap();
        assert!(!outside.in_window && !outside.density_6_5_divergent, "{outside:?}");
    }

    #[test]
    fn plummer_examples() {
        let p = plummer(1.0).unwrap();
        assert_eq!(p.value(0.0), -1.0);
        assert!(plummer(0.0).is_err());
        for k in [0.5, 1.0, 2.0] {
            let phi = plummer(k).unwrap().profile();
            let ratio = phi.norm(6.0).unwrap().powi(4) / phi.norm_pow(5.0).unwrap();
            assert_relative_eq!(ratio, 3.0 * PI.cbrt() / 4f64.powf(5.0 / 3.0), max_relative = 1e-9);
            let deficit = phi.dirichlet_energy().unwrap() - 3.0 * (PI / 2.0).powf(4.0 / 3.0) * phi.norm(6.0).unwrap().powi(2);
            assert!(deficit.abs() < 1e-8 * k);
        }
    }

    #[test]
    fn squared_density_norm_is_kappa_independent() {
        for k in [0.3, 1.0, 4.0] {
            let phi = plummer(k).unwrap().profile();
            assert_relative_eq!(squared_density_norm(&phi).unwrap(), c_three_halves(), max_relative = 1e-9);
            let f = squared_hminus_density(&phi).unwrap();
            assert_relative_eq!(lp_norm(&f, 1.5).unwrap(), c_three_halves(), max_relative = 1e-8);
            assert_relative_eq!(lp_norm(&f, 1.0).unwrap(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn power_norm_reduces_to_squared_case() {
        let phi = plummer(1.0).unwrap().profile();
        assert_relative_eq!(power_density_norm(&phi, 2.0, 1.5).unwrap(), 0.367_018_841_359_58, max_relative = 1e-9);
    }

    #[test]
    fn pairing_identity_for_squared_density() {
        let phi = RadialProfile::plummer(1.3).unwrap();
        let f = squared_hminus_density(&phi).unwrap();
        let paired = kato_form(&f, &phi).unwrap() - phi.dirichlet_energy().unwrap() / (8.0 * PI);
        let expected = -hminus_norm_pow(&phi, 3.0).unwrap() / hminus_norm_pow(&phi, 2.0).unwrap();
        assert_relative_eq!(paired, expected, max_relative = 1e-8);
    }

    #[test]
    fn kinetic_coefficient_matches_quadrature() {
        let phi = RadialProfile::Gaussian { depth: 0.8, width: 1.4 };
        for theta in [1.0, 2.5, 4.0] {
            let f = power_hminus_density(&phi, theta).unwrap();
            let (_, ultra, _) = kinetic_moments(f.as_analytic().unwrap()).unwrap();
            let closed = hminus_kinetic_coefficient(theta) * phi.norm_pow(theta + 4.0).unwrap()
                / phi.norm_pow(theta + 3.0).unwrap();
            assert_relative_eq!(ultra, closed, max_relative = 1e-8);
        }
    }

    #[test]
    fn cusp_window_examples() {
        assert_relative_eq!(admissible_theta_range(1.3).unwrap().1, 6.0, max_relative = 1e-12);
        let w = cusp_admissible_window(1.3, 3.0).unwrap();
        assert_relative_eq!(w.lower, 5.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(w.upper, 3.0 / 7.0, max_relative = 1e-15);
        assert!(w.contains(0.42) && !w.is_empty());
        assert!(cusp_admissible_window(1.3, 2.0).unwrap().is_empty());
        assert!(cusp_admissible_window(1.5, 3.0).is_err());
        assert!(cusp_admissible_window(1.1, 3.0).is_err());
        assert_relative_eq!(default_theta(1.3).unwrap(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn hyperbola_keeps_norm_fixed() {
        let f = squared_hminus_density(&RadialProfile::plummer(1.0).unwrap()).unwrap();
        let rows = hyperbola_rows(&f, 2.0, &[0.5, 1.0, 3.0]).unwrap();
        for row in rows {
            assert_relative_eq!(row.norm_3_2, 2.0 * c_three_halves(), max_relative = 1e-8);
            let expected = -3.0 * PI / 32.0 * 0.5 * row.kappa;
            assert_relative_eq!(row.k_tilde, expected, max_relative = 1e-6);
        }
    }
}
