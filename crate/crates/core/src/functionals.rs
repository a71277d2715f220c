//! Scalar functionals: energies, field-form energies, h₋ norms, Casimirs,
//! relative entropy, virial, momentum and angular momentum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::phase_space::{AnalyticDensity, Ensemble, PhaseDensity, RadialGrid, ESCAPE_TOLERANCE};
use crate::profile::RadialProfile;
use crate::radial_field::RadialField;
use crate::special::shifted_product;

const EIGHT_PI: f64 = 8.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// E = E_p + E_q
    pub total: f64,
    /// ∬ √(1+|p|²) f
    pub kinetic: f64,
    /// −‖∇φ_f‖²/8π
    pub potential: f64,
    /// ∬ |p| f
    pub ultra: f64,
    /// ∬ f/√(1+|p|²)
    pub inverse_gamma: f64,
}

/// h(p, q) = |p| + φ(|q|).
#[derive(Debug, Clone, PartialEq)]
pub struct UltraHamiltonian {
    profile: RadialProfile,
}

impl UltraHamiltonian {
    pub fn new(profile: RadialProfile) -> Result<Self> {
        profile.check_nonpositive()?;
        Ok(UltraHamiltonian { profile })
    }

    pub fn eval(&self, s: f64, r: f64) -> f64 {
        s + self.profile.value(r)
    }

    /// h₋ = max(−h, 0).
    pub fn negative_part(&self, s: f64, r: f64) -> f64 {
        (-self.eval(s, r)).max(0.0)
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }
}

/// Field of the unscaled density on a grid matched to its length scale.
pub(crate) fn base_field(f: &AnalyticDensity) -> Result<RadialField> {
    let base = f.unscaled();
    let scale = base.base_breakpoints().first().copied().unwrap_or(1.0);
    let grid = RadialGrid::geometric(1e-3 * scale, 1e3 * scale, 2048)?;
    let rho = base.project(&grid, ESCAPE_TOLERANCE, Execution::default())?;
    RadialField::from_density(&rho)
}

/// (E_p, E_p^u, ∬ f/γ) of a closed-form density.
pub fn kinetic_moments(f: &AnalyticDensity) -> Result<(f64, f64, f64)> {
    let kinetic = f.phase_integral("E_p", |v, s, _| v * (1.0 + s * s).sqrt())?;
    let ultra = f.phase_integral("E_p^u", |v, s, _| v * s)?;
    let inv = f.phase_integral("inverse gamma moment", |v, s, _| v / (1.0 + s * s).sqrt())?;
    Ok((kinetic, ultra, inv))
}

pub fn energy(f: &PhaseDensity) -> Result<EnergyBreakdown> {
    match f {
        PhaseDensity::Ensemble(e) => Ok(ensemble_energy(e, &RadialField::from_shells(e))),
        PhaseDensity::Analytic(a) => {
            if a.singular_base() {
                return Err(Error::Unsupported {
                    operation: "energy",
                    representation: "origin-singular analytic",
                });
            }
            let (kinetic, ultra, inverse_gamma) = kinetic_moments(a)?;
            let potential = -a.kappa() * base_field(a)?.dirichlet_energy() / EIGHT_PI;
            Ok(EnergyBreakdown {
                total: kinetic + potential,
                kinetic,
                potential,
                ultra,
                inverse_gamma,
            })
        }
    }
}

pub(crate) fn ensemble_energy(e: &Ensemble, field: &RadialField) -> EnergyBreakdown {
    let exec = Execution::default();
    let c = e.characteristics();
    let kinetic = exec.sum_by(c, |c| c.w * c.gamma());
    let ultra = exec.sum_by(c, |c| c.w * c.momentum());
    let inverse_gamma = exec.sum_by(c, |c| c.w / c.gamma());
    let potential = -field.dirichlet_energy() / EIGHT_PI;
    EnergyBreakdown {
        total: kinetic + potential,
        kinetic,
        potential,
        ultra,
        inverse_gamma,
    }
}

fn paired_energy(f: &PhaseDensity, phi: &RadialProfile, rest_mass: bool) -> Result<f64> {
    phi.check_nonpositive()?;
    let kin = |s: f64| {
        if rest_mass {
            (1.0 + s * s).sqrt()
        } else {
            s
        }
    };
    let coupling = match f {
        PhaseDensity::Analytic(a) => {
            a.phase_integral("paired energy", |v, s, r| v * (kin(s) + phi.value(r)))?
        }
        PhaseDensity::Ensemble(e) => Execution::default().sum_by(e.characteristics(), |c| {
            c.w * (kin(c.momentum()) + phi.value(c.r))
        }),
    };
    Ok(coupling + phi.dirichlet_energy()? / EIGHT_PI)
}

/// Ẽ(f, φ) = ∬(√(1+|p|²) + φ) f + ‖∇φ‖²/8π.
pub fn field_form_energy(f: &PhaseDensity, phi: &RadialProfile) -> Result<f64> {
    paired_energy(f, phi, true)
}

/// K̃(f, φ) = ∬(|p| + φ) f + ‖∇φ‖²/8π.
pub fn kato_form(f: &PhaseDensity, phi: &RadialProfile) -> Result<f64> {
    paired_energy(f, phi, false)
}

/// ‖h₋‖_τ^τ = 8π/∏_{k=1}^3(k+τ)·‖φ₋‖_{3+τ}^{3+τ}.
pub fn hminus_norm_pow(phi: &RadialProfile, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::param("tau", format!("must be positive, got {tau}")));
    }
    let order = 3.0 + tau;
    let norm = phi
        .norm_pow_refined(order)?
        .finite(&format!("potential norm of order {order}"))?;
    Ok(8.0 * PI / shifted_product(tau, 3) * norm)
}

/// ‖h₋‖_τ for h = |p| + φ.
pub fn hminus_norm(phi: &RadialProfile, tau: f64) -> Result<f64> {
    if !(tau >= 1.0) {
        return Err(Error::param("tau", format!("must be >= 1, got {tau}")));
    }
    Ok(hminus_norm_pow(phi, tau)?.powf(1.0 / tau))
}

/// ∬ g∘f for a closed-form density; g(0) must vanish.
pub fn casimir<G: Fn(f64) -> f64>(f: &PhaseDensity, g: G) -> Result<f64> {
    let a = analytic_only(f, "casimir")?;
    if g(0.0) != 0.0 {
        return Err(Error::Divergent {
            quantity: "casimir (g(0) != 0 over infinite volume)".into(),
        });
    }
    a.phase_integral("casimir", |v, _, _| g(v))
}

/// −∬ f log(f/f_*). The cut of `reference` must not exceed that of `f`.
pub fn relative_entropy(f: &PhaseDensity, reference: &PhaseDensity) -> Result<f64> {
    let a = analytic_only(f, "relative entropy")?;
    let b = analytic_only(reference, "relative entropy")?;
    if b.angular_momentum_cut() > a.angular_momentum_cut() * (1.0 + 1e-12) {
        return Err(Error::Unsupported {
            operation: "relative entropy against a reference with a wider cut",
            representation: "analytic",
        });
    }
    a.phase_integral("relative entropy", |v, s, r| {
        if v <= 0.0 {
            return 0.0;
        }
        let w = b.value(s, r);
        if w <= 0.0 {
            return f64::INFINITY;
        }
        -v * (v / w).ln()
    })
}

fn analytic_only<'a>(f: &'a PhaseDensity, op: &'static str) -> Result<&'a AnalyticDensity> {
    f.as_analytic().ok_or(Error::Unsupported {
        operation: op,
        representation: "ensemble",
    })
}

/// V = ∬ q·p f; zero for densities isotropic in p.
pub fn virial(f: &PhaseDensity) -> f64 {
    match f {
        PhaseDensity::Ensemble(e) => Execution::default().sum_by(e.characteristics(), |c| c.w * c.r * c.p_r),
        PhaseDensity::Analytic(_) => 0.0,
    }
}

/// Total momentum. Each reduced shell averages p over all directions, so
/// every contribution vanishes.
pub fn momentum(f: &PhaseDensity) -> [f64; 3] {
    shell_average(f)
}

/// Total angular momentum, likewise averaged over the shell orientations.
pub fn angular_momentum(f: &PhaseDensity) -> [f64; 3] {
    shell_average(f)
}

fn shell_average(_f: &PhaseDensity) -> [f64; 3] {
    [0.0; 3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Characteristic;
    use approx::assert_relative_eq;

    fn plummer(kappa: f64) -> PhaseDensity {
        AnalyticDensity::hminus_power(RadialProfile::plummer(kappa).unwrap(), 2.0)
            .unwrap()
            .into()
    }

    #[test]
    fn hminus_norm_examples() {
        let phi = RadialProfile::plummer(1.0).unwrap();
        let v = hminus_norm(&phi, 3.0).unwrap();
        assert_relative_eq!(v, (PI / 15.0 * PI * PI / 4.0).cbrt(), max_relative = 1e-10);
        assert_relative_eq!(v, 0.802477, max_relative = 1e-6);
        let two = hminus_norm_pow(&phi, 2.0).unwrap();
        assert_relative_eq!(two, 2.0 * PI / 15.0 * phi.norm_pow(5.0).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn plummer_trial_energies() {
        let f = plummer(1.0);
        let e = energy(&f).unwrap();
        assert_relative_eq!(e.ultra, 3.0 * PI / 32.0, max_relative = 1e-8);
        assert_relative_eq!(e.potential, -3.0 * PI / 32.0, max_relative = 1e-7);
        assert_relative_eq!(e.ultra + e.potential, 0.0, epsilon = 1e-8);
        assert!(e.total > 0.0 && e.total <= 15.0 * PI / 16.0);
        assert!(e.ultra < e.kinetic && e.kinetic <= 1.0 + e.ultra);
    }

    #[test]
    fn cold_shell_energy() {
        let f: PhaseDensity = Ensemble::new(vec![Characteristic::new(1.0, 0.0, 1e-6, 1.0)])
            .unwrap()
            .into();
        let e = energy(&f).unwrap();
        assert_relative_eq!(e.potential, -0.5, max_relative = 1e-14);
        assert_relative_eq!(e.total, 0.5, max_relative = 1e-10);
    }

    #[test]
    fn zero_potential_gives_kinetic_energy() {
        let f = plummer(1.3);
        let e = energy(&f).unwrap();
        let et = field_form_energy(&f, &RadialProfile::Zero).unwrap();
        assert_relative_eq!(et, e.kinetic, max_relative = 1e-12);
    }

    #[test]
    fn casimir_and_entropy_examples() {
        let f = plummer(1.0);
        assert_relative_eq!(casimir(&f, |v| v).unwrap(), 1.0, max_relative = 1e-9);
        let c32 = 0.375 * (15.0f64 / 16.0).cbrt();
        assert_relative_eq!(casimir(&f, |v| v.powf(1.5)).unwrap(), c32.powf(1.5), max_relative = 1e-8);
        assert_eq!(relative_entropy(&f, &f).unwrap(), 0.0);
        assert!(casimir(&f, |v| v + 1.0).is_err());
    }

    #[test]
    fn virial_of_single_characteristic() {
        let f: PhaseDensity = Ensemble::new(vec![Characteristic::new(2.0, 3.0, 1.0, 1.0)])
            .unwrap()
            .into();
        assert_eq!(virial(&f), 6.0);
        assert_eq!(momentum(&f), [0.0; 3]);
        assert_eq!(angular_momentum(&f), [0.0; 3]);
    }
}
