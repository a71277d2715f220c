//! Critical constants C_β: the exact value at β = 3/2, closed-form brackets
//! for β > 3/2, a Lane–Emden polytrope estimate, and classification of data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::energy;
use crate::phase_space::{lp_norm, PhaseDensity};
use crate::special::{gamma, ln_gamma, shifted_product};

/// C_{3/2} = (3/8)(15/16)^{1/3}.
pub fn c_three_halves() -> f64 {
    0.375 * (15.0f64 / 16.0).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbetaBounds {
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    /// Set for β ∈ (1, 3/2), where C_β = 0.
    pub vanishing: bool,
}

pub fn cbeta_bounds(beta: f64) -> Result<CbetaBounds> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must exceed 1, got {beta}")));
    }
    if beta < 1.5 {
        return Ok(CbetaBounds {
            beta,
            lower: 0.0,
            upper: 0.0,
            vanishing: true,
        });
    }
    let e = 1.0 - 1.0 / beta;
    let lower = ((0.375f64).powi(3) * 15.0 / 16.0).powf(e);
    let inner = 8.0 * PI.powf(2.5) / shifted_product(2.0 * beta, 3) * gamma(beta) / gamma(beta + 1.5);
    let upper = 45.0 / (8.0 * PI * PI) * inner.powf(1.0 / beta);
    Ok(CbetaBounds {
        beta,
        lower,
        upper,
        vanishing: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classified {
    pub norm_3_2: f64,
    pub class: Classification,
    /// C_{3/2}/(C_{3/2} − ‖f‖_{3/2}), subcritical data only.
    pub varkappa: Option<f64>,
}

pub fn classify_norm(norm_3_2: f64) -> Classified {
    let c = c_three_halves();
    let (class, varkappa) = if norm_3_2 < c {
        (Classification::Subcritical, Some(c / (c - norm_3_2)))
    } else if norm_3_2 == c {
        (Classification::Critical, None)
    } else {
        (Classification::Supercritical, None)
    };
    Classified {
        norm_3_2,
        class,
        varkappa,
    }
}

pub fn classify(f: &PhaseDensity) -> Result<Classified> {
    Ok(classify_norm(lp_norm(f, 1.5)?))
}

/// K(f_{κ,λ}) = λ⁻¹E_p^u(f) + κE_q(f).
pub fn scaled_kato(ultra: f64, potential: f64, kappa: f64, lambda: f64) -> f64 {
    ultra / lambda + kappa * potential
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descent {
    pub kappa: f64,
    pub lambda: f64,
    pub product: f64,
    pub k_value: f64,
}

/// κλ at which K(f_{κ,λ}) changes sign.
pub fn zero_crossing_product(ultra: f64, potential: f64) -> Result<f64> {
    if !(potential < 0.0) {
        return Err(Error::NoDescent { potential });
    }
    if !(ultra > 0.0 && ultra.is_finite()) {
        return Err(Error::param("ultra", format!("E_p^u must be positive and finite, got {ultra}")));
    }
    Ok(ultra / -potential)
}

/// Scales along κλ = `product` until K reaches `target`. Without an explicit
/// product, negative targets use twice the zero-crossing product and
/// positive ones half of it; a zero target returns the crossing with κ = 1.
pub fn descent_from_energies(
    ultra: f64,
    potential: f64,
    target: f64,
    product: Option<f64>,
) -> Result<Descent> {
    let p0 = zero_crossing_product(ultra, potential)?;
    if target == 0.0 && product.is_none() {
        return Ok(Descent {
            kappa: 1.0,
            lambda: p0,
            product: p0,
            k_value: 0.0,
        });
    }
    let product = product.unwrap_or(if target < 0.0 { 2.0 * p0 } else { 0.5 * p0 });
    if !(product > 0.0) {
        return Err(Error::param("product", "must be positive"));
    }
    // K = κ·(E_p^u/(κλ) + E_q) along the hyperbola
    let slope = ultra / product + potential;
    let kappa = target / slope;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param(
            "target",
            format!("not reachable along kappa*lambda = {product}"),
        ));
    }
    let lambda = product / kappa;
    Ok(Descent {
        kappa,
        lambda,
        product,
        k_value: scaled_kato(ultra, potential, kappa, lambda),
    })
}

pub fn hyperbola_descent(f: &PhaseDensity, target: f64, product: Option<f64>) -> Result<Descent> {
    let e = energy(f)?;
    descent_from_energies(e.ultra, e.potential, target, product)
}

/// (E_p^u/(−E_q))^{3(1−1/β)}‖f‖_β for a normalized density.
pub fn cbeta_objective(f: &PhaseDensity, beta: f64) -> Result<f64> {
    let e = energy(f)?;
    if !(e.potential < 0.0) {
        return Err(Error::NoDescent {
            potential: e.potential,
        });
    }
    Ok((e.ultra / -e.potential).powf(3.0 * (1.0 - 1.0 / beta)) * lp_norm(f, beta)?)
}

/// Self-consistent polytrope f = c(E₀ − |p| − φ)₊^n with n = 1/(β−1).
/// With θ = E₀ − φ scaled so that θ(0) = 1, Poisson's equation becomes
/// θ'' + 2θ'/ξ = −θ^{n+3}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polytrope {
    pub beta: f64,
    pub index: f64,
    /// First zero of θ.
    pub radius: f64,
    pub mass: f64,
    pub ultra: f64,
    pub potential: f64,
    pub norm_beta: f64,
    /// Objective evaluated on the normalized polytrope.
    pub objective: f64,
}

const SHOOT_START: f64 = 1e-4;
const SHOOT_MAX_RADIUS: f64 = 1e4;
const SHOOT_RTOL: f64 = 1e-12;
const SHOOT_ATOL: f64 = 1e-15;

type State = [f64; 5];

struct LaneEmden {
    m: f64,
    q: f64,
}

impl LaneEmden {
    // (θ, θ', ∫ξ²θ^{m+1}, ∫ξ²θ'², ∫ξ²θ^q)
    fn rhs(&self, x: f64, y: &State) -> State {
        let t = y[0].max(0.0);
        let x2 = x * x;
        [
            y[1],
            -t.powf(self.m) - 2.0 * y[1] / x,
            x2 * t.powf(self.m + 1.0),
            x2 * y[1] * y[1],
            x2 * t.powf(self.q),
        ]
    }

    fn start(&self, x: f64) -> State {
        let x2 = x * x;
        let x3 = x2 * x;
        [
            1.0 - x2 / 6.0 + self.m * x2 * x2 / 120.0,
            -x / 3.0 + self.m * x3 / 30.0,
            x3 / 3.0,
            x3 * x2 / 45.0,
            x3 / 3.0,
        ]
    }
}

// Dormand–Prince 5(4)
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step(sys: &LaneEmden, x: f64, y: &State, h: f64) -> (State, f64) {
    let mut k = [[0.0; 5]; 7];
    k[0] = sys.rhs(x, y);
    for s in 0..6 {
        let mut yt = *y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            for i in 0..5 {
                yt[i] += h * A[s][j] * kj[i];
            }
        }
        k[s + 1] = sys.rhs(x + C[s] * h, &yt);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for i in 0..5 {
        let (mut d5, mut d4) = (0.0, 0.0);
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = SHOOT_ATOL + SHOOT_RTOL * y[i].abs().max(y5[i].abs());
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    (y5, err)
}

fn shoot(sys: &LaneEmden) -> Result<(f64, State)> {
    let mut x = SHOOT_START;
    let mut y = sys.start(x);
    let mut h = 1e-3;
    while x < SHOOT_MAX_RADIUS {
        let (yn, err) = dopri_step(sys, x, &y, h);
        if err <= 1.0 {
            if yn[0] <= 0.0 {
                return refine_zero(sys, x, &y, h);
            }
            x += h;
            y = yn;
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }
    Err(Error::Shooting(format!(
        "no zero of the Lane-Emden profile below xi = {SHOOT_MAX_RADIUS} (index {})",
        sys.m
    )))
}

// Newton on the step length so that θ(x + h) = 0.
fn refine_zero(sys: &LaneEmden, x: f64, y: &State, h_max: f64) -> Result<(f64, State)> {
    let (y_end, _) = dopri_step(sys, x, y, h_max);
    let mut h = h_max * y[0] / (y[0] - y_end[0]);
    for _ in 0..50 {
        let (yh, _) = dopri_step(sys, x, y, h);
        let dh = -yh[0] / yh[1];
        h = (h + dh).clamp(0.0, h_max);
        if dh.abs() <= 1e-15 * (x + h) {
            let (yh, _) = dopri_step(sys, x, y, h);
            return Ok((x + h, yh));
        }
    }
    Err(Error::Shooting(format!("root refinement stalled near xi = {}", x + h)))
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn polytrope(beta: f64) -> Result<Polytrope> {
    if !(beta > 1.5 && beta.is_finite()) {
        return Err(Error::param("beta", format!("polytrope needs beta > 3/2, got {beta}")));
    }
    let n = 1.0 / (beta - 1.0);
    let sys = LaneEmden {
        m: n + 3.0,
        q: n * beta + 3.0,
    };
    let (xi, y) = shoot(&sys)?;
    // ρ = θ^{n+3}/4π, normalization c = 1/(16π² B(3, n+1))
    let mass = -xi * xi * y[1];
    let ultra = 3.0 / (n + 4.0) * y[2];
    let potential = -0.5 * (y[3] + mass * mass / xi);
    let ln_c = -(16.0 * PI * PI).ln() - ln_beta(3.0, n + 1.0);
    let norm_pow = (16.0 * PI * PI).ln() + beta * ln_c + ln_beta(3.0, n * beta + 1.0) + y[4].ln();
    let norm_beta = (norm_pow / beta).exp();
    let e = 3.0 * (1.0 - 1.0 / beta);
    // unit-mass rescaling: E_p^u/M, E_q/M², ‖f‖_β/M
    let objective = (ultra * mass / -potential).powf(e) * norm_beta / mass;
    Ok(Polytrope {
        beta,
        index: n,
        radius: xi,
        mass,
        ultra,
        potential,
        norm_beta,
        objective,
    })
}

pub fn polytrope_cbeta_estimate(beta: f64) -> Result<f64> {
    Ok(polytrope(beta)?.objective)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub estimate: Option<f64>,
    pub norm_3_2: Option<f64>,
    pub classification: Option<Classification>,
    pub varkappa: Option<f64>,
}

pub fn criticality_report(beta: f64, f: Option<&PhaseDensity>) -> Result<CriticalityReport> {
    let b = cbeta_bounds(beta)?;
    let estimate = if beta > 1.5 {
        Some(polytrope_cbeta_estimate(beta)?)
    } else if beta == 1.5 {
        Some(c_three_halves())
    } else {
        None
    };
    let classified = f.map(classify).transpose()?;
    Ok(CriticalityReport {
        beta,
        lower: b.lower,
        upper: b.upper,
        estimate,
        norm_3_2: classified.map(|c| c.norm_3_2),
        classification: classified.map(|c| c.class),
        varkappa: classified.and_then(|c| c.varkappa),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bounds_examples() {
        let b = cbeta_bounds(1.5).unwrap();
        assert_relative_eq!(b.lower, c_three_halves(), max_relative = 1e-14);
        assert_relative_eq!(b.upper, c_three_halves(), max_relative = 1e-12);
        assert_relative_eq!(c_three_halves(), 0.367_018_841_359_58, max_relative = 1e-13);
        let b = cbeta_bounds(2.0).unwrap();
        assert_relative_eq!(b.lower, (405.0f64 / 8192.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b.lower, 0.22235, max_relative = 1e-4);
        assert_relative_eq!(b.upper, 0.25521, max_relative = 1e-4);
        let b = cbeta_bounds(1.2).unwrap();
        assert!(b.vanishing && b.lower == 0.0 && b.upper == 0.0);
        assert!(cbeta_bounds(1.0).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = classify_norm(0.1);
        assert_eq!(c.class, Classification::Subcritical);
        assert_relative_eq!(c.varkappa.unwrap(), 1.37451, max_relative = 1e-5);
        let c = classify_norm(c_three_halves());
        assert_eq!(c.class, Classification::Critical);
        assert!(c.varkappa.is_none());
        assert_eq!(classify_norm(2.0 * c_three_halves()).class, Classification::Supercritical);
    }

    #[test]
    fn descent_examples() {
        assert_eq!(scaled_kato(1.0, -2.0, 4.0, 0.25), -4.0);
        let d = descent_from_energies(1.0, -2.0, 0.0, None).unwrap();
        assert_eq!(d.product, 0.5);
        let e = 3.0 * PI / 32.0;
        let depth = 0.7;
        let d = descent_from_energies(e, -e, -depth, Some(2.0)).unwrap();
        assert_relative_eq!(d.kappa, 32.0 / (3.0 * PI) * 2.0 * depth, max_relative = 1e-14);
        assert_relative_eq!(d.k_value, -depth, max_relative = 1e-14);
        assert!(matches!(descent_from_energies(1.0, 0.0, -1.0, None), Err(Error::NoDescent { .. })));
    }

    #[test]
    fn polytrope_of_index_one() {
        // index-4 Lane–Emden has ξ₁ ≈ 14.97155
        let p = polytrope(2.0).unwrap();
        assert_relative_eq!(p.radius, 14.971_546, max_relative = 1e-6);
        let b = cbeta_bounds(2.0).unwrap();
        assert!(b.lower <= p.objective && p.objective <= b.upper);
    }

    #[test]
    fn polytrope_stays_in_brackets() {
        for beta in [1.6, 1.8, 2.5, 3.0, 4.0] {
            let p = polytrope(beta).unwrap();
            let b = cbeta_bounds(beta).unwrap();
            assert!(b.lower <= p.objective && p.objective <= b.upper, "{beta}: {p:?} {b:?}");
        }
        assert!(polytrope(1.5).is_err());
    }
}
