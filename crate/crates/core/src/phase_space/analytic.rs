use std::f64::consts::PI;

use super::grid::{RadialGrid, SpatialDensity};
use crate::error::{Error, Result};
use crate::par::{ordered_sum, Execution};
use crate::profile::RadialProfile;
use crate::quadrature::{
    integrate_radial, refine_toward_origin, GaussLegendre, Refined, Tolerance, RADIAL_HI,
    RADIAL_LO,
};
use crate::special::{gamma, shifted_product};

const FOUR_PI: f64 = 4.0 * PI;

/// Default number of Gauss–Legendre nodes on the momentum ball.
pub const MOMENTUM_NODES: usize = 96;

/// Spatial factor of a product density.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialLaw {
    /// Indicator of the ball |q| ≤ radius.
    UniformBall { radius: f64 },
    /// |q|^{−a}·e^{−|q|}.
    PowerExponential { exponent: f64 },
}

impl SpatialLaw {
    fn eval(&self, r: f64) -> f64 {
        match self {
            SpatialLaw::UniformBall { radius } => {
                if r <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            SpatialLaw::PowerExponential { exponent } => r.powf(-exponent) * (-r).exp(),
        }
    }

    fn mass(&self) -> f64 {
        match self {
            SpatialLaw::UniformBall { radius } => FOUR_PI / 3.0 * radius.powi(3),
            SpatialLaw::PowerExponential { exponent } => FOUR_PI * gamma(3.0 - exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticForm {
    /// (−φ(|q|) − |p|)₊^ϑ
    HminusPower {
        profile: RadialProfile,
        exponent: f64,
    },
    /// χ(|p| ≤ P)·law(|q|)
    Product {
        momentum_radius: f64,
        spatial: SpatialLaw,
    },
}

/// Closed-form density, isotropic in p, of the shape
/// N·κ³λ³·F(λ|p|, κ|q|)·χ(|λp × κq| ≥ ℓ).
///
/// The cut ℓ removes nearly radial orbits; it is stored in the unscaled
/// coordinates so it follows the double scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticDensity {
    form: AnalyticForm,
    kappa: f64,
    lambda: f64,
    cut: f64,
    normalization: f64,
    momentum_nodes: usize,
}

impl AnalyticDensity {
    /// h₋^ϑ/‖h₋‖_ϑ^ϑ for h = |p| + φ(|q|).
    pub fn hminus_power(profile: RadialProfile, exponent: f64) -> Result<Self> {
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(Error::param(
                "exponent",
                format!("must be finite and >= 0, got {exponent}"),
            ));
        }
        profile.check_nonpositive()?;
        let order = 3.0 + exponent;
        let phi_norm = profile.norm_pow_refined(order)?;
        let Refined::Finite(phi_norm) = phi_norm else {
            return Err(Error::Divergent {
                quantity: format!("potential norm of order {order}"),
            });
        };
        let hminus = 8.0 * PI / shifted_product(exponent, 3) * phi_norm;
        if !(hminus > 0.0) {
            return Err(Error::param("profile", "h_- vanishes identically"));
        }
        Ok(AnalyticDensity {
            form: AnalyticForm::HminusPower { profile, exponent },
            kappa: 1.0,
            lambda: 1.0,
            cut: 0.0,
            normalization: 1.0 / hminus,
            momentum_nodes: MOMENTUM_NODES,
        })
    }

    /// Normalized product of a momentum-ball indicator and a spatial law.
    pub fn product(momentum_radius: f64, spatial: SpatialLaw) -> Result<Self> {
        if !(momentum_radius > 0.0) {
            return Err(Error::param("momentum_radius", "must be positive"));
        }
        match spatial {
            SpatialLaw::UniformBall { radius } if !(radius > 0.0) => {
                return Err(Error::param("radius", "must be positive"))
            }
            SpatialLaw::PowerExponential { exponent } if !(0.0..3.0).contains(&exponent) => {
                return Err(Error::param("exponent", "must lie in [0,3) for finite mass"))
            }
            _ => {}
        }
        let volume = FOUR_PI / 3.0 * momentum_radius.powi(3) * spatial.mass();
        Ok(AnalyticDensity {
            form: AnalyticForm::Product {
                momentum_radius,
                spatial,
            },
            kappa: 1.0,
            lambda: 1.0,
            cut: 0.0,
            normalization: 1.0 / volume,
            momentum_nodes: MOMENTUM_NODES,
        })
    }

    /// Removes phase-space points with |p × q| below `ell` (in the current
    /// scaled coordinates) and renormalizes.
    pub fn with_angular_momentum_cut(mut self, ell: f64) -> Result<Self> {
        if !(ell >= 0.0 && ell.is_finite()) {
            return Err(Error::param("min_angular_momentum", "must be finite and >= 0"));
        }
        self.cut = ell * self.kappa * self.lambda;
        if self.cut > 0.0 {
            let mass = self.base_integral("mass", |f, _| f)?.finite("mass")?;
            if !(mass > 0.0) {
                return Err(Error::param("min_angular_momentum", "cut removes all mass"));
            }
            self.normalization = 1.0 / mass;
        }
        Ok(self)
    }

    pub fn with_momentum_nodes(mut self, nodes: usize) -> Self {
        self.momentum_nodes = nodes.max(2);
        self
    }

    /// f ↦ κ³λ³f(λp, κq).
    pub fn double_scale(&self, kappa: f64, lambda: f64) -> Result<Self> {
        if !(kappa > 0.0 && lambda > 0.0) {
            return Err(Error::param("kappa/lambda", "scales must be positive"));
        }
        let mut out = self.clone();
        out.kappa *= kappa;
        out.lambda *= lambda;
        Ok(out)
    }

    pub fn form(&self) -> &AnalyticForm {
        &self.form
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn momentum_nodes(&self) -> usize {
        self.momentum_nodes
    }

    /// Angular-momentum cut in the scaled coordinates.
    pub fn angular_momentum_cut(&self) -> f64 {
        self.cut / (self.kappa * self.lambda)
    }

    pub(crate) fn base_cut(&self) -> f64 {
        self.cut
    }

    /// Same form with κ = λ = 1.
    pub fn unscaled(&self) -> Self {
        let mut out = self.clone();
        out.kappa = 1.0;
        out.lambda = 1.0;
        out
    }

    /// Same form without the angular-momentum cut; the normalization is
    /// left as is, so only relative quantities are meaningful.
    pub(crate) fn without_cut(&self) -> Self {
        let mut out = self.clone();
        out.cut = 0.0;
        out
    }

    pub fn is_scaled(&self) -> bool {
        self.kappa != 1.0 || self.lambda != 1.0
    }

    pub fn exponent(&self) -> Option<f64> {
        match &self.form {
            AnalyticForm::HminusPower { exponent, .. } => Some(*exponent),
            AnalyticForm::Product { .. } => None,
        }
    }

    pub(crate) fn singular_base(&self) -> bool {
        match &self.form {
            AnalyticForm::HminusPower { profile, .. } => profile.singular_at_origin(),
            AnalyticForm::Product { spatial, .. } => {
                matches!(spatial, SpatialLaw::PowerExponential { exponent } if *exponent > 0.0)
            }
        }
    }

    /// Momentum radius of the support at base radius `rb`.
    pub(crate) fn smax_base(&self, rb: f64) -> f64 {
        match &self.form {
            AnalyticForm::HminusPower { profile, .. } => (-profile.value(rb)).max(0.0),
            AnalyticForm::Product {
                momentum_radius,
                spatial,
            } => {
                if spatial.eval(rb) > 0.0 {
                    *momentum_radius
                } else {
                    0.0
                }
            }
        }
    }

    /// Unnormalized base form F(s, r).
    pub(crate) fn form_base(&self, s: f64, rb: f64) -> f64 {
        match &self.form {
            AnalyticForm::HminusPower { profile, exponent } => {
                let a = -profile.value(rb) - s;
                if a > 0.0 {
                    a.powf(*exponent)
                } else {
                    0.0
                }
            }
            AnalyticForm::Product {
                momentum_radius,
                spatial,
            } => {
                if s <= *momentum_radius {
                    spatial.eval(rb)
                } else {
                    0.0
                }
            }
        }
    }

    /// Isotropic part of the density at physical (|p|, |q|), cut ignored.
    pub fn value(&self, s: f64, r: f64) -> f64 {
        (self.kappa * self.lambda).powi(3)
            * self.normalization
            * self.form_base(self.lambda * s, self.kappa * r)
    }

    /// sup |p| over the support.
    pub fn momentum_support(&self) -> Result<f64> {
        let base = match &self.form {
            AnalyticForm::HminusPower { profile, .. } => {
                profile.depth().ok_or(Error::UnboundedMomentum)?
            }
            AnalyticForm::Product {
                momentum_radius, ..
            } => *momentum_radius,
        };
        Ok(base / self.lambda)
    }

    /// ∫ q(F, s)·4πs²·w_cut ds over the momentum ball at base radius `rb`,
    /// using s = √(s_c² + u²) so the cut weight u/s cancels the Jacobian.
    pub(crate) fn momentum_integral<Q: Fn(f64, f64) -> f64>(&self, rb: f64, q: Q) -> f64 {
        let smax = self.smax_base(rb);
        if !(smax > 0.0) {
            return 0.0;
        }
        let sc = if self.cut > 0.0 { self.cut / rb } else { 0.0 };
        if sc >= smax {
            return 0.0;
        }
        let umax = (smax * smax - sc * sc).sqrt();
        let rule = GaussLegendre::cached(self.momentum_nodes);
        rule.integrate(0.0, umax, |u| {
            let s = (sc * sc + u * u).sqrt().min(smax);
            let f = self.form_base(s, rb);
            if f == 0.0 {
                0.0
            } else {
                q(f, s) * FOUR_PI * u * u
            }
        })
    }

    /// Radii where r·smax(r) crosses the cut, plus form-specific breakpoints.
    pub(crate) fn base_breakpoints(&self) -> Vec<f64> {
        let mut breaks = match &self.form {
            AnalyticForm::HminusPower { profile, .. } => profile.breakpoints(),
            AnalyticForm::Product { spatial, .. } => match spatial {
                SpatialLaw::UniformBall { radius } => vec![*radius],
                SpatialLaw::PowerExponential { .. } => vec![1.0],
            },
        };
        if self.cut > 0.0 {
            let g = |r: f64| r * self.smax_base(r) - self.cut;
            let scale = breaks.first().copied().unwrap_or(1.0);
            let mut prev_r = scale * 1e-8;
            let mut prev = g(prev_r);
            for i in 1..=800 {
                let r = scale * 10f64.powf(-8.0 + 16.0 * i as f64 / 800.0);
                let cur = g(r);
                if (prev > 0.0) != (cur > 0.0) {
                    let (mut lo, mut hi) = (prev_r, r);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if (g(mid) > 0.0) == (prev > 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    breaks.push(0.5 * (lo + hi));
                }
                prev_r = r;
                prev = cur;
            }
        }
        breaks
    }

    /// ∫∫ q(F, s) in base coordinates (unnormalized F), refined toward the
    /// origin for singular forms.
    pub(crate) fn base_integral<Q: Fn(f64, f64) -> f64>(
        &self,
        quantity: &str,
        q: Q,
    ) -> Result<Refined> {
        let breaks = self.base_breakpoints();
        let tol = Tolerance::default();
        let radial = |rb: f64| FOUR_PI * rb * rb * self.momentum_integral(rb, &q);
        let at = |lo: f64| integrate_radial(radial, lo, RADIAL_HI, &breaks, tol).into_result(quantity);
        if self.singular_base() {
            refine_toward_origin(at)
        } else {
            Ok(Refined::Finite(at(RADIAL_LO)?))
        }
    }

    /// ∬ q(f(p,q), |p|, |q|) dp dq in physical coordinates.
    pub fn phase_integral_refined<Q: Fn(f64, f64, f64) -> f64>(
        &self,
        quantity: &str,
        q: Q,
    ) -> Result<Refined> {
        let kl3 = (self.kappa * self.lambda).powi(3);
        let amp = kl3 * self.normalization;
        let breaks = self.base_breakpoints();
        let tol = Tolerance::default();
        let radial = |rb: f64| {
            let r = rb / self.kappa;
            FOUR_PI * rb * rb * self.momentum_integral(rb, |f, sb| q(amp * f, sb / self.lambda, r))
                / kl3
        };
        let at = |lo: f64| integrate_radial(radial, lo, RADIAL_HI, &breaks, tol).into_result(quantity);
        if self.singular_base() {
            refine_toward_origin(at)
        } else {
            Ok(Refined::Finite(at(RADIAL_LO)?))
        }
    }

    pub fn phase_integral<Q: Fn(f64, f64, f64) -> f64>(&self, quantity: &str, q: Q) -> Result<f64> {
        self.phase_integral_refined(quantity, q)?.finite(quantity)
    }

    /// ρ at base radius `rb` for the unscaled density.
    pub(crate) fn base_density(&self, rb: f64) -> f64 {
        self.normalization * self.momentum_integral(rb, |f, _| f)
    }

    /// ρ(r) = ∫ f(p, r) dp.
    pub fn spatial_density(&self, r: f64) -> f64 {
        self.kappa.powi(3) * self.base_density(self.kappa * r)
    }

    /// Mass inside base radius `rb`.
    fn base_enclosed(&self, rb: f64) -> Result<f64> {
        let breaks = self.base_breakpoints();
        let tol = Tolerance::default();
        let radial = |x: f64| FOUR_PI * x * x * self.base_density(x);
        let at = |lo: f64| integrate_radial(radial, lo, rb, &breaks, tol).into_result("enclosed mass");
        if self.singular_base() {
            refine_toward_origin(at)?.finite("enclosed mass")
        } else {
            at(RADIAL_LO.min(rb * 1e-6))
        }
    }

    /// Momentum quadrature at every node; cumulative mass integrated per
    /// interval with a 7-point rule split at form breakpoints.
    pub fn project(
        &self,
        grid: &RadialGrid,
        escape_tolerance: f64,
        exec: Execution,
    ) -> Result<SpatialDensity> {
        let k = self.kappa;
        let rb: Vec<f64> = grid.radii().iter().map(|r| r * k).collect();
        let density: Vec<f64> = exec
            .map(&rb, |&x| self.base_density(x))
            .into_iter()
            .map(|d| d * k.powi(3))
            .collect();
        let breaks = self.base_breakpoints();
        let rule = GaussLegendre::cached(7);
        let pieces = exec.map_range(rb.len() - 1, |i| {
            let (a, b) = (rb[i], rb[i + 1]);
            let mut edges = vec![a];
            edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
            edges.push(b);
            ordered_sum(edges.windows(2).map(|w| {
                rule.integrate(w[0], w[1], |x| FOUR_PI * x * x * self.base_density(x))
            }))
        });
        let mut enclosed = Vec::with_capacity(rb.len());
        let mut acc = self.base_enclosed(rb[0])?;
        enclosed.push(acc);
        for p in pieces {
            acc += p;
            enclosed.push(acc);
        }
        let escaping = (1.0 - acc).max(0.0);
        if escaping > escape_tolerance {
            return Err(Error::GridCoverage { fraction: escaping });
        }
        SpatialDensity::with_enclosed(grid.clone(), density, enclosed, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plummer_trial() -> AnalyticDensity {
        AnalyticDensity::hminus_power(RadialProfile::plummer(1.0).unwrap(), 2.0).unwrap()
    }

    #[test]
    fn plummer_trial_is_normalized() {
        let f = plummer_trial();
        let m = f.phase_integral("mass", |v, _, _| v).unwrap();
        assert_relative_eq!(m, 1.0, max_relative = 1e-9);
        assert_relative_eq!(f.normalization(), 45.0 / (8.0 * PI * PI), max_relative = 1e-9);
    }

    #[test]
    fn plummer_density_at_origin() {
        let f = plummer_trial();
        assert_relative_eq!(f.spatial_density(0.0), 3.0 / (4.0 * PI), max_relative = 1e-10);
        let r: f64 = 0.7;
        let exact = 3.0 / (4.0 * PI) * (1.0 + r * r).powf(-2.5);
        assert_relative_eq!(f.spatial_density(r), exact, max_relative = 1e-10);
    }

    #[test]
    fn cut_renormalizes_and_follows_scaling() {
        let f = plummer_trial().with_angular_momentum_cut(0.05).unwrap();
        let m = f.phase_integral("mass", |v, _, _| v).unwrap();
        assert_relative_eq!(m, 1.0, max_relative = 1e-8);
        let g = f.double_scale(2.0, 3.0).unwrap();
        assert_relative_eq!(g.angular_momentum_cut(), 0.05 / 6.0, max_relative = 1e-14);
        let m = g.phase_integral("mass", |v, _, _| v).unwrap();
        assert_relative_eq!(m, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn unit_product_density_projects_to_uniform_ball() {
        let f = AnalyticDensity::product(1.0, SpatialLaw::UniformBall { radius: 1.0 }).unwrap();
        assert_relative_eq!(f.spatial_density(0.5), 3.0 / (4.0 * PI), max_relative = 1e-13);
        assert_eq!(f.spatial_density(1.5), 0.0);
        let grid = RadialGrid::geometric(1e-3, 10.0, 500).unwrap();
        let rho = f.project(&grid, 1e-9, Execution::Sequential).unwrap();
        let i = grid.locate(1.0);
        assert_relative_eq!(rho.enclosed()[i + 1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn projection_enclosed_mass_matches_plummer_law() {
        let f = plummer_trial();
        let grid = RadialGrid::default();
        let rho = f.project(&grid, 1e-5, Execution::default()).unwrap();
        for (i, &r) in grid.radii().iter().enumerate().step_by(97) {
            let exact = r.powi(3) / (1.0 + r * r).powf(1.5);
            assert_relative_eq!(rho.enclosed()[i], exact, max_relative = 1e-8, epsilon = 1e-14);
        }
        assert!(rho.escaping_mass() < 2e-6);
    }

    #[test]
    fn narrow_grid_reports_escaping_mass() {
        let f = plummer_trial();
        let grid = RadialGrid::geometric(1e-3, 2.0, 100).unwrap();
        match f.project(&grid, 1e-5, Execution::Sequential) {
            Err(Error::GridCoverage { fraction }) => {
                let exact = 1.0 - 8.0 / 5f64.powf(1.5);
                assert_relative_eq!(fraction, exact, max_relative = 1e-7);
            }
            other => panic!("expected coverage error, got {other:?}"),
        }
    }
}
