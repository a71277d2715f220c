//! A-priori bounds for subcritical data: uniform field-energy and kinetic
//! bounds, the interpolated density bound, the pointwise force bound and the
//! bootstrap bound on the momentum support.

use std::f64::consts::PI;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::criticality::{classify_norm, Classification};
use crate::error::{Error, Result};

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
    pub struct BoundFlags: u32 {
        /// ‖∇φ_t‖² > 8π ϰ E(f₀)
        const DIRICHLET = 1;
        /// E_p(f_t) > (1+ϰ) E(f₀)
        const KINETIC = 1 << 1;
        /// ‖ρ_t‖_γ above C(α)‖f₀‖_α^η((1+ϰ)E)^{1−η}
        const DENSITY = 1 << 2;
        /// sup|∇φ_t| above C_{α,γ}‖f₀‖_α^θ‖ρ_t‖_γ^{1−θ}P^ξ
        const FORCE = 1 << 3;
        /// P(t) above the bootstrap bound
        const SUPPORT = 1 << 4;
        /// |∬|q|² v·∇φ f| > 1
        const SPHERICITY = 1 << 5;
    }
}

impl BoundFlags {
    pub fn names(self) -> Vec<&'static str> {
        self.iter_names().map(|(n, _)| n).collect()
    }

    pub fn label(self) -> String {
        self.names().join("|")
    }
}

/// Exponents tied to a Lebesgue exponent α of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundExponents {
    pub alpha: f64,
    /// γ = (4α−3)/(3α−2)
    pub gamma: f64,
    /// η = α/(4α−3)
    pub eta: f64,
    /// θ = (1−γ/3)/(1−γ/α)
    pub theta: f64,
    /// ξ = 3(1−1/α)θ
    pub xi: f64,
}

impl BoundExponents {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0) {
            return Err(Error::param("alpha", format!("must be >= 1, got {alpha}")));
        }
        if alpha.is_infinite() {
            return Ok(BoundExponents {
                alpha,
                gamma: 4.0 / 3.0,
                eta: 0.25,
                theta: 5.0 / 9.0,
                xi: 5.0 / 3.0,
            });
        }
        let gamma = (4.0 * alpha - 3.0) / (3.0 * alpha - 2.0);
        let eta = alpha / (4.0 * alpha - 3.0);
        let theta = (1.0 - gamma / 3.0) / (1.0 - gamma / alpha);
        Ok(BoundExponents {
            alpha,
            gamma,
            eta,
            theta,
            xi: 3.0 * (1.0 - 1.0 / alpha) * theta,
        })
    }
}

/// C(α) in ‖ρ‖_γ ≤ C(α)‖f‖_α^η E_p^{1−η}: the minimum over P of
/// a P^b + G/P with b = 3(1−1/α) and a = (4π/3)^{1−1/α}.
pub fn density_constant(alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::param("alpha", format!("must be >= 1, got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let (b, eta, conj) = if alpha.is_infinite() {
        (3.0, 0.25, 1.0)
    } else {
        (3.0 * (1.0 - 1.0 / alpha), alpha / (4.0 * alpha - 3.0), 1.0 - 1.0 / alpha)
    };
    Ok((1.0 + 1.0 / b) * b.powf(eta) * (4.0 * PI / 3.0).powf(eta * conj))
}

/// C_{α,γ} in sup|∇φ| ≤ C_{α,γ}‖f‖_α^θ‖ρ‖_γ^{1−θ}P^ξ, from splitting the
/// Newton kernel at the optimal radius. Needs α > 3 and 3/2 < γ' i.e. γ < 3.
pub fn force_constant(alpha: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 3.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("force bound needs 3 < alpha < inf, got {alpha}")));
    }
    if !(gamma > 1.0 && gamma < 3.0) {
        return Err(Error::param("gamma", format!("force bound needs 1 < gamma < 3, got {gamma}")));
    }
    let ac = alpha / (alpha - 1.0);
    let gc = gamma / (gamma - 1.0);
    let c1 = (4.0 * PI / (3.0 - 2.0 * ac)).powf(1.0 / ac) * (4.0 * PI / 3.0).powf(1.0 / ac);
    let c2 = (4.0 * PI / (2.0 * gc - 3.0)).powf(1.0 / gc);
    let a = 1.0 - 3.0 / alpha;
    let b = 3.0 / gamma - 1.0;
    let theta = b / (a + b);
    Ok((1.0 + a / b) * (b / a).powf(1.0 - theta) * c1.powf(theta) * c2.powf(1.0 - theta))
}

/// Largest root of x = a + √c·x^{ξ/2}, for ξ < 2.
pub fn support_fixed_point(a: f64, c: f64, xi: f64) -> Result<f64> {
    if !(xi < 2.0) {
        return Err(Error::param("xi", format!("bootstrap needs xi < 2, got {xi}")));
    }
    if !(a >= 0.0 && c >= 0.0) {
        return Err(Error::param("a/c", "must be nonnegative"));
    }
    let sc = c.sqrt();
    let g = |x: f64| x - a - sc * x.powf(0.5 * xi);
    if sc == 0.0 {
        return Ok(a);
    }
    let mut lo = a;
    let mut hi = a.max(1.0);
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::param("xi", "bootstrap root is not finite"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Initial-data quantities entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    pub energy: f64,
    pub norm_3_2: f64,
    pub alpha: f64,
    pub norm_alpha: f64,
    pub support: f64,
}

/// Precomputed right-hand sides for auditing a subcritical run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub norms: InitialNorms,
    pub varkappa: f64,
    pub exponents: BoundExponents,
    pub density_constant: f64,
    pub force_constant: f64,
    pub dirichlet_bound: f64,
    pub kinetic_bound: f64,
    pub density_bound: f64,
    pub support_bound: f64,
}

impl BoundContext {
    pub fn new(norms: InitialNorms) -> Result<Self> {
        let c = classify_norm(norms.norm_3_2);
        let varkappa = match (c.class, c.varkappa) {
            (Classification::Subcritical, Some(v)) => v,
            _ => {
                return Err(Error::param(
                    "norm_3_2",
                    "a-priori bounds need subcritical data",
                ))
            }
        };
        if !(norms.energy > 0.0) {
            return Err(Error::param("energy", "must be positive for subcritical data"));
        }
        let ex = BoundExponents::new(norms.alpha)?;
        let dc = density_constant(norms.alpha)?;
        let fc = force_constant(norms.alpha, ex.gamma)?;
        let e = (1.0 + varkappa) * norms.energy;
        let density_bound = dc * norms.norm_alpha.powf(ex.eta) * e.powf(1.0 - ex.eta);
        let support_bound = predict_support_bound(&norms)?;
        Ok(BoundContext {
            norms,
            varkappa,
            exponents: ex,
            density_constant: dc,
            force_constant: fc,
            dirichlet_bound: 8.0 * PI * varkappa * norms.energy,
            kinetic_bound: e,
            density_bound,
            support_bound,
        })
    }

    /// Right-hand side of the force bound at given ‖ρ_t‖_γ and P(t).
    pub fn force_bound(&self, rho_norm: f64, support: f64) -> f64 {
        let ex = &self.exponents;
        self.force_constant
            * self.norms.norm_alpha.powf(ex.theta)
            * rho_norm.powf(1.0 - ex.theta)
            * support.powf(ex.xi)
    }
}

/// Bootstrap bound on P(t): solves x = P(0) + √(1+P(0)²) + C^{1/2}x^{ξ/2}
/// with C = C_{α,γ}‖f₀‖_α^θ[C(α)‖f₀‖_α^η((1+ϰ)E)^{1−η}]^{1−θ}.
pub fn predict_support_bound(norms: &InitialNorms) -> Result<f64> {
    if !(norms.alpha > 3.0) {
        return Err(Error::BootstrapExponent { alpha: norms.alpha });
    }
    let ex = BoundExponents::new(norms.alpha)?;
    let c = classify_norm(norms.norm_3_2);
    let varkappa = c
        .varkappa
        .ok_or_else(|| Error::param("norm_3_2", "support bound needs subcritical data"))?;
    let rho = density_constant(norms.alpha)?
        * norms.norm_alpha.powf(ex.eta)
        * ((1.0 + varkappa) * norms.energy).powf(1.0 - ex.eta);
    let cc = force_constant(norms.alpha, ex.gamma)? * norms.norm_alpha.powf(ex.theta) * rho.powf(1.0 - ex.theta);
    let p0 = norms.support;
    support_fixed_point(p0 + (1.0 + p0 * p0).sqrt(), cc, ex.xi)
}

/// Inputs measured on one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub dirichlet: f64,
    pub kinetic: f64,
    pub rho_norm: f64,
    pub max_force: f64,
    pub support: f64,
    pub support_sup: f64,
    pub sphericity: f64,
}

pub fn check_apriori_bounds(sample: &BoundSample, ctx: &BoundContext) -> BoundFlags {
    let mut f = BoundFlags::empty();
    f.set(BoundFlags::DIRICHLET, sample.dirichlet > ctx.dirichlet_bound);
    f.set(BoundFlags::KINETIC, sample.kinetic > ctx.kinetic_bound);
    f.set(BoundFlags::DENSITY, sample.rho_norm > ctx.density_bound);
    f.set(
        BoundFlags::FORCE,
        sample.max_force > ctx.force_bound(sample.rho_norm, sample.support),
    );
    f.set(BoundFlags::SUPPORT, sample.support_sup > ctx.support_bound);
    f.set(BoundFlags::SPHERICITY, sample.sphericity.abs() > 1.0);
    f
}
