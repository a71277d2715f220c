//! Radial profiles: potentials φ(r) ≤ 0 given in closed form or on a grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate_radial, refine_toward_origin, GaussLegendre, Refined, Tolerance, RADIAL_HI,
    RADIAL_LO,
};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// −κ(1+κ²r²)^{−1/2}
    Plummer { kappa: f64 },
    /// −c·e^{−r}/r^δ
    Cusp { delta: f64, multiplier: f64 },
    /// −A·exp(−r²/w²)
    Gaussian { depth: f64, width: f64 },
    /// −A·exp(−r/a)
    Exponential { depth: f64, scale: f64 },
    /// −A·(1+(r/a)²)^{−m/2}
    SoftenedPower { depth: f64, scale: f64, exponent: f64 },
    /// base(r)·(1 + amplitude·exp(−(r−center)²/width²))
    Modulated {
        base: Box<RadialProfile>,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Sampled(Arc<SampledProfile>),
    Zero,
}

/// Cubic Hermite interpolant through (r_i, φ_i, φ'_i), continued by
/// φ ∝ r² inside the first node and by a Kepler tail −c/r beyond the last.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl SampledProfile {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let n = self.radii.len();
        let (r0, rn) = (self.radii[0], self.radii[n - 1]);
        if r <= r0 {
            let m0 = self.slopes[0];
            return (self.values[0] + m0 * (r * r - r0 * r0) / (2.0 * r0), m0 * r / r0);
        }
        if r >= rn {
            let c = -self.values[n - 1] * rn;
            return (-c / r, c / (r * r));
        }
        let i = self.radii.partition_point(|&x| x <= r) - 1;
        let (a, b) = (self.radii[i], self.radii[i + 1]);
        let h = b - a;
        let t = (r - a) / h;
        let (y0, y1, m0, m1) = (
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
        );
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let d = (6.0 * t2 - 6.0 * t) * (y0 - y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1;
        (v, d)
    }

    fn dirichlet(&self) -> f64 {
        let n = self.radii.len();
        let rule = GaussLegendre::cached(4);
        let r0 = self.radii[0];
        let inner = FOUR_PI * self.slopes[0].powi(2) * r0.powi(3) / 5.0;
        let rn = self.radii[n - 1];
        let outer = FOUR_PI * self.values[n - 1].powi(2) * rn;
        let body: f64 = self
            .radii
            .windows(2)
            .map(|w| {
                rule.integrate(w[0], w[1], |r| {
                    let (_, d) = self.eval(r);
                    FOUR_PI * d * d * r * r
                })
            })
            .sum();
        inner + body + outer
    }
}

impl RadialProfile {
    pub fn plummer(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
        }
        Ok(RadialProfile::Plummer { kappa })
    }

    pub fn cusp(delta: f64, multiplier: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("must lie in (0,1), got {delta}")));
        }
        if !(multiplier > 0.0 && multiplier <= 1.0) {
            return Err(Error::param(
                "multiplier",
                format!("must lie in (0,1], got {multiplier}"),
            ));
        }
        Ok(RadialProfile::Cusp { delta, multiplier })
    }

    pub fn sampled(radii: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() || radii.len() != slopes.len() {
            return Err(Error::param("radii", "need matching arrays of length >= 2"));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("radii", "must be positive and strictly increasing"));
        }
        if let Some(i) = values.iter().position(|&v| v > 0.0 || !v.is_finite()) {
            return Err(Error::PositivePotential { radius: radii[i] });
        }
        Ok(RadialProfile::Sampled(Arc::new(SampledProfile {
            radii,
            values,
            slopes,
        })))
    }

    pub fn modulated(base: RadialProfile, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if amplitude < -1.0 {
            return Err(Error::param(
                "amplitude",
                "must be >= -1 to keep the profile nonpositive",
            ));
        }
        if !(width > 0.0) || center < 0.0 {
            return Err(Error::param("width", "needs width > 0 and center >= 0"));
        }
        Ok(RadialProfile::Modulated {
            base: Box::new(base),
            amplitude,
            center,
            width,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    /// (φ(r), φ'(r)).
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match self {
            RadialProfile::Plummer { kappa } => {
                let s = 1.0 + kappa * kappa * r * r;
                let v = -kappa / s.sqrt();
                (v, kappa.powi(3) * r / (s * s.sqrt()))
            }
            RadialProfile::Cusp { delta, multiplier } => {
                if r <= 0.0 {
                    return (f64::NEG_INFINITY, f64::INFINITY);
                }
                let v = -multiplier * (-r).exp() * r.powf(-delta);
                (v, -v * (1.0 + delta / r))
            }
            RadialProfile::Gaussian { depth, width } => {
                let e = (-(r / width).powi(2)).exp();
                (-depth * e, 2.0 * depth * r / (width * width) * e)
            }
            RadialProfile::Exponential { depth, scale } => {
                let e = (-r / scale).exp();
                (-depth * e, depth / scale * e)
            }
            RadialProfile::SoftenedPower {
                depth,
                scale,
                exponent,
            } => {
                let s = 1.0 + (r / scale).powi(2);
                let v = -depth * s.powf(-exponent / 2.0);
                (v, -v * exponent * r / (scale * scale * s))
            }
            RadialProfile::Modulated {
                base,
                amplitude,
                center,
                width,
            } => {
                let (v, d) = base.eval(r);
                let z = (r - center) / width;
                let bump = (-z * z).exp();
                let factor = 1.0 + amplitude * bump;
                let dfactor = amplitude * bump * (-2.0 * z / width);
                (v * factor, d * factor + v * dfactor)
            }
            RadialProfile::Sampled(s) => s.eval(r),
            RadialProfile::Zero => (0.0, 0.0),
        }
    }

    /// Characteristic length used to place quadrature breakpoints.
    pub fn scale(&self) -> f64 {
        match self {
            RadialProfile::Plummer { kappa } => 1.0 / kappa,
            RadialProfile::Cusp { .. } | RadialProfile::Zero => 1.0,
            RadialProfile::Gaussian { width, .. } => *width,
            RadialProfile::Exponential { scale, .. } => *scale,
            RadialProfile::SoftenedPower { scale, .. } => *scale,
            RadialProfile::Modulated { base, .. } => base.scale(),
            RadialProfile::Sampled(s) => {
                let n = s.radii.len();
                (s.radii[0] * s.radii[n - 1]).sqrt()
            }
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.scale()];
        if let RadialProfile::Modulated {
            base,
            center,
            width,
            ..
        } = self
        {
            b.extend(base.breakpoints());
            b.extend([center - width, *center, center + width].into_iter().filter(|&x| x > 0.0));
        }
        if let RadialProfile::Sampled(s) = self {
            b.push(s.radii[0]);
            b.push(s.radii[s.radii.len() - 1]);
        }
        b
    }

    pub fn singular_at_origin(&self) -> bool {
        match self {
            RadialProfile::Cusp { .. } => true,
            RadialProfile::Modulated { base, .. } => base.singular_at_origin(),
            _ => false,
        }
    }

    /// Power p with |φ| ~ r^{−p} at infinity; `None` for faster than any power.
    pub fn tail_power(&self) -> Option<f64> {
        match self {
            RadialProfile::Plummer { .. } | RadialProfile::Sampled(_) => Some(1.0),
            RadialProfile::SoftenedPower { exponent, .. } => Some(*exponent),
            RadialProfile::Modulated { base, .. } => base.tail_power(),
            _ => None,
        }
    }

    /// sup(−φ); `None` when unbounded.
    pub fn depth(&self) -> Option<f64> {
        match self {
            RadialProfile::Plummer { kappa } => Some(*kappa),
            RadialProfile::Cusp { .. } => None,
            RadialProfile::Gaussian { depth, .. }
            | RadialProfile::Exponential { depth, .. }
            | RadialProfile::SoftenedPower { depth, .. } => Some(*depth),
            RadialProfile::Zero => Some(0.0),
            RadialProfile::Modulated { .. } | RadialProfile::Sampled(_) => {
                if self.singular_at_origin() {
                    return None;
                }
                let scale = self.scale();
                let mut best = -self.value(0.0);
                for i in 0..=4000 {
                    let r = scale * 10f64.powf(-6.0 + 12.0 * i as f64 / 4000.0);
                    best = best.max(-self.value(r));
                }
                Some(best)
            }
        }
    }

    /// Fails if φ is positive anywhere.
    pub fn check_nonpositive(&self) -> Result<()> {
        match self {
            RadialProfile::Modulated {
                base, amplitude, ..
            } => {
                if *amplitude < -1.0 {
                    return Err(Error::PositivePotential { radius: 0.0 });
                }
                base.check_nonpositive()
            }
            RadialProfile::Gaussian { depth, .. }
            | RadialProfile::Exponential { depth, .. }
            | RadialProfile::SoftenedPower { depth, .. }
                if *depth < 0.0 =>
            {
                Err(Error::PositivePotential { radius: 0.0 })
            }
            _ => Ok(()),
        }
    }

    /// ∫ g(r)·4πr² dr over (0, ∞) for an integrand built from this profile,
    /// refining toward the origin when the profile is singular there.
    pub(crate) fn radial_integral<G: Fn(f64) -> f64>(
        &self,
        quantity: &str,
        g: G,
        tol: Tolerance,
    ) -> Result<f64> {
        let breaks = self.breakpoints();
        let at = |lo: f64| {
            integrate_radial(|r| g(r) * FOUR_PI * r * r, lo, RADIAL_HI, &breaks, tol)
                .into_result(quantity)
        };
        if self.singular_at_origin() {
            refine_toward_origin(at)?.finite(quantity)
        } else {
            at(RADIAL_LO)
        }
    }

    /// Divergence-aware variant of [`Self::radial_integral`].
    pub(crate) fn radial_integral_refined<G: Fn(f64) -> f64>(
        &self,
        quantity: &str,
        g: G,
        tol: Tolerance,
    ) -> Result<Refined> {
        let breaks = self.breakpoints();
        let at = |lo: f64| {
            integrate_radial(|r| g(r) * FOUR_PI * r * r, lo, RADIAL_HI, &breaks, tol)
                .into_result(quantity)
        };
        if self.singular_at_origin() {
            refine_toward_origin(at)
        } else {
            Ok(Refined::Finite(at(RADIAL_LO)?))
        }
    }

    /// ‖φ₋‖_m^m = ∫ |min(φ,0)|^m d³q.
    pub fn norm_pow(&self, m: f64) -> Result<f64> {
        self.norm_pow_refined(m)?.finite(&format!("potential norm of order {m}"))
    }

    pub fn norm_pow_refined(&self, m: f64) -> Result<Refined> {
        if let Some(p) = self.tail_power() {
            if m * p <= 3.0 {
                return Ok(Refined::Divergent([f64::INFINITY; 4]));
            }
        }
        self.radial_integral_refined(
            &format!("potential norm of order {m}"),
            |r| (-self.value(r)).max(0.0).powf(m),
            Tolerance::default(),
        )
    }

    pub fn norm(&self, m: f64) -> Result<f64> {
        Ok(self.norm_pow(m)?.powf(1.0 / m))
    }

    /// ‖∇φ‖₂².
    pub fn dirichlet_energy(&self) -> Result<f64> {
        if let RadialProfile::Sampled(s) = self {
            return Ok(s.dirichlet());
        }
        if let Some(p) = self.tail_power() {
            if 2.0 * p <= 1.0 {
                return Err(Error::Divergent {
                    quantity: "dirichlet energy".into(),
                });
            }
        }
        self.radial_integral(
            "dirichlet energy",
            |r| self.derivative(r).powi(2),
            Tolerance::default(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn plummer_norms_match_beta_integrals() {
        let p = RadialProfile::plummer(1.0).unwrap();
        assert_relative_eq!(p.norm_pow(4.0).unwrap(), PI * PI, max_relative = 1e-9);
        assert_relative_eq!(p.norm_pow(5.0).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-10);
        assert_relative_eq!(p.norm_pow(6.0).unwrap(), PI * PI / 4.0, max_relative = 1e-10);
        assert_relative_eq!(p.dirichlet_energy().unwrap(), 0.75 * PI * PI, max_relative = 1e-9);
    }

    #[test]
    fn plummer_log_divergent_norm_is_reported() {
        let p = RadialProfile::plummer(1.0).unwrap();
        assert!(p.norm_pow(3.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = [
            RadialProfile::plummer(1.7).unwrap(),
            RadialProfile::cusp(0.42, 0.8).unwrap(),
            RadialProfile::Gaussian { depth: 1.3, width: 0.7 },
            RadialProfile::Exponential { depth: 0.9, scale: 2.0 },
            RadialProfile::SoftenedPower { depth: 1.0, scale: 1.5, exponent: 1.6 },
            RadialProfile::modulated(RadialProfile::plummer(1.0).unwrap(), 0.3, 1.0, 0.5).unwrap(),
        ];
        for p in &profiles {
            for &r in &[0.1, 0.8, 2.5] {
                let h = 1e-6 * r;
                let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
                assert_relative_eq!(p.derivative(r), fd, max_relative = 1e-6, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_sample_reproduces_plummer() {
        let exact = RadialProfile::plummer(1.0).unwrap();
        let radii: Vec<f64> = (0..800).map(|i| 1e-3 * 1.02f64.powi(i)).collect();
        let values = radii.iter().map(|&r| exact.value(r)).collect();
        let slopes = radii.iter().map(|&r| exact.derivative(r)).collect();
        let s = RadialProfile::sampled(radii, values, slopes).unwrap();
        assert_relative_eq!(s.value(0.37), exact.value(0.37), max_relative = 1e-9);
        assert_relative_eq!(s.derivative(2.2), exact.derivative(2.2), max_relative = 1e-6);
        assert_relative_eq!(
            s.dirichlet_energy().unwrap(),
            exact.dirichlet_energy().unwrap(),
            max_relative = 1e-3
        );
    }

    #[test]
    fn sampled_rejects_positive_values() {
        let r = RadialProfile::sampled(vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 0.0]);
        assert!(matches!(r, Err(Error::PositivePotential { .. })));
    }
}
