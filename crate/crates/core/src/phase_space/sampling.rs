//! Deterministic conversion of an analytic density into characteristics.
//!
//! Radii are drawn from stratified quantiles of the radial mass law and
//! momenta from stratified quantiles of the conditional law of |p| given r
//! (the two strata are paired by a random permutation). The direction cosine
//! μ = p̂·q̂ is uniform. Draws violating the angular-momentum cut are redrawn
//! without stratification. All randomness comes from a ChaCha8 stream seeded
//! with the caller's seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::analytic::{AnalyticDensity, AnalyticForm};
use super::ensemble::{Characteristic, Ensemble, MIN_ANGULAR_MOMENTUM};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::special::beta_quantile;

const TABLE_NODES: usize = 3000;
const MAX_REDRAWS: usize = 10_000;

struct RadialLaw {
    radii: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialLaw {
    fn new(f: &AnalyticDensity) -> Result<Self> {
        let uncut = f.unscaled().without_cut();
        let breaks = uncut.base_breakpoints();
        let scale = breaks.first().copied().unwrap_or(1.0);
        let (lo, hi) = (scale * 1e-6, scale * 1e6);
        let g = (hi / lo).powf(1.0 / (TABLE_NODES - 1) as f64);
        let radii: Vec<f64> = (0..TABLE_NODES).map(|i| lo * g.powi(i as i32)).collect();
        let rule = GaussLegendre::cached(7);
        let density = |x: f64| 4.0 * std::f64::consts::PI * x * x * uncut.base_density(x);
        let mut cdf = Vec::with_capacity(TABLE_NODES);
        let mut acc = density(lo) * lo / 3.0;
        cdf.push(acc);
        for w in radii.windows(2) {
            let mut edges = vec![w[0]];
            edges.extend(breaks.iter().copied().filter(|&x| x > w[0] && x < w[1]));
            edges.push(w[1]);
            acc += edges
                .windows(2)
                .map(|e| rule.integrate(e[0], e[1], density))
                .sum::<f64>();
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::param("density", "radial mass law is empty"));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(RadialLaw { radii, cdf })
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= self.cdf[0] {
            return self.radii[0] * (u / self.cdf[0]).max(0.0).cbrt();
        }
        let n = self.cdf.len();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, n - 1);
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        if !(c1 > c0) {
            return 0.5 * (r0 + r1);
        }
        // power-law interpolation of the mass below u and above it
        let (a, b, x) = if u < 0.5 {
            (c0, c1, u)
        } else {
            (1.0 - c0, 1.0 - c1, 1.0 - u)
        };
        if a > 0.0 && b > 0.0 && x > 0.0 {
            let t = (x / a).ln() / (b / a).ln();
            if t.is_finite() {
                return r0 * (r1 / r0).powf(t.clamp(0.0, 1.0));
            }
        }
        r0 + (u - c0) / (c1 - c0) * (r1 - r0)
    }
}

fn momentum_quantile(f: &AnalyticDensity, rb: f64, u: f64) -> f64 {
    match f.form() {
        AnalyticForm::HminusPower { exponent, .. } => {
            f.smax_base(rb) * beta_quantile(3.0, exponent + 1.0, u)
        }
        AnalyticForm::Product {
            momentum_radius, ..
        } => momentum_radius * u.cbrt(),
    }
}

/// Draws `n` equally weighted characteristics from `f`.
pub fn sample_ensemble(f: &AnalyticDensity, n: usize, seed: u64) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::param("particles", "must be positive"));
    }
    let law = RadialLaw::new(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairing: Vec<usize> = (0..n).collect();
    pairing.shuffle(&mut rng);
    let cut = f.base_cut();
    let (kappa, lambda) = (f.kappa(), f.lambda());
    let nf = n as f64;
    let w = 1.0 / nf;
    let mut out = Vec::with_capacity(n);
    for (i, &j) in pairing.iter().enumerate() {
        let mut ur = (i as f64 + rng.gen::<f64>()) / nf;
        let mut us = (j as f64 + rng.gen::<f64>()) / nf;
        let mut accepted = None;
        for _ in 0..MAX_REDRAWS {
            let mu: f64 = 2.0 * rng.gen::<f64>() - 1.0;
            let rb = law.quantile(ur);
            let sb = momentum_quantile(f, rb, us);
            let lb = rb * sb * (1.0 - mu * mu).max(0.0).sqrt();
            let l = lb / (kappa * lambda);
            if lb >= cut && l >= MIN_ANGULAR_MOMENTUM && sb > 0.0 {
                accepted = Some(Characteristic::new(rb / kappa, sb * mu / lambda, l, w));
                break;
            }
            ur = rng.gen();
            us = rng.gen();
        }
        out.push(accepted.ok_or_else(|| {
            Error::param("min_angular_momentum", "rejection sampling does not terminate")
        })?);
    }
    Ensemble::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialProfile;
    use approx::assert_relative_eq;

    fn plummer() -> AnalyticDensity {
        AnalyticDensity::hminus_power(RadialProfile::plummer(1.0).unwrap(), 2.0).unwrap()
    }

    #[test]
    fn radial_quantiles_follow_plummer_mass_law() {
        let law = RadialLaw::new(&plummer()).unwrap();
        for &u in &[0.01f64, 0.2, 0.5, 0.9, 0.99] {
            let exact = u.cbrt() / (1.0 - u.powf(2.0 / 3.0)).sqrt();
            assert_relative_eq!(law.quantile(u), exact, max_relative = 1e-5);
        }
    }

    #[test]
    fn same_seed_gives_identical_ensembles() {
        let f = plummer().with_angular_momentum_cut(0.01).unwrap();
        let a = sample_ensemble(&f, 500, 7).unwrap();
        let b = sample_ensemble(&f, 500, 7).unwrap();
        let c = sample_ensemble(&f, 500, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.characteristics().iter().all(|c| c.l >= 0.01 - 1e-15));
    }

    #[test]
    fn sample_moments_match_quadrature() {
        let f = plummer()
            .with_angular_momentum_cut(0.02)
            .unwrap()
            .double_scale(0.5, 2.0)
            .unwrap();
        let e = sample_ensemble(&f, 100_000, 3).unwrap();
        let kinetic: f64 = e.characteristics().iter().map(|c| c.w * c.momentum()).sum();
        let exact = f.phase_integral("E_p^u", |v, s, _| v * s).unwrap();
        assert_relative_eq!(kinetic, exact, max_relative = 2e-3);
        let inv_r: f64 = e.characteristics().iter().map(|c| c.w / c.r).sum();
        let exact = f.phase_integral("1/r", |v, _, r| v / r).unwrap();
        assert_relative_eq!(inv_r, exact, max_relative = 5e-3);
        assert!(e.momentum_support() <= f.momentum_support().unwrap());
    }
}
