//! Special functions. Gamma and the incomplete beta come from `statrs`
//! (Lanczos approximation, about 15 significant digits).

use statrs::function::{beta, gamma as sgamma};

pub fn gamma(x: f64) -> f64 {
    sgamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// ∏_{k=1}^{m} (k + τ).
pub fn shifted_product(tau: f64, m: usize) -> f64 {
    (1..=m).map(|k| k as f64 + tau).product()
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta::beta_reg(a, b, x)
    }
}

/// Inverse of [`beta_cdf`] in x, by safeguarded Newton on [0, 1].
pub fn beta_quantile(a: f64, b: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let ln_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = (a / (a + b)).clamp(1e-6, 1.0 - 1e-6);
    for _ in 0..200 {
        let g = beta_cdf(a, b, x) - u;
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = (ln_norm + (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln()).exp();
        let mut next = x - g / pdf;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-15 * x.max(1e-300) || hi - lo < 1e-16 {
            return next;
        }
        x = next;
    }
    x
}
