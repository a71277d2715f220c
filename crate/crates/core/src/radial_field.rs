//! Spherical Poisson solve: enclosed mass, potential with φ ~ −M/r at
//! infinity, radial force and Dirichlet energy.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::par::ordered_sum;
use crate::phase_space::{Ensemble, RadialGrid, SpatialDensity};
use crate::profile::RadialProfile;

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Nodal values of a continuous density.
    Smooth,
    /// Infinitely thin shells at the node radii.
    Shells,
}

/// Immutable snapshot of a spherically symmetric field.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    kind: Kind,
    radii: Vec<f64>,
    enclosed: Vec<f64>,
    potential: Vec<f64>,
    /// ρ at nodes (smooth) or shell weights (shells).
    source: Vec<f64>,
    dirichlet: f64,
    total_mass: f64,
}

/// M at every grid node.
pub fn enclosed_mass(rho: &SpatialDensity) -> Vec<f64> {
    rho.enclosed().to_vec()
}

/// Solves for φ on the grid of `rho`.
pub fn potential(rho: &SpatialDensity) -> Result<RadialField> {
    RadialField::from_density(rho)
}

/// M(r)/r² at `r`.
pub fn radial_force(field: &RadialField, r: f64) -> Result<f64> {
    field.force_at(r)
}

pub fn dirichlet_energy(field: &RadialField) -> f64 {
    field.dirichlet_energy()
}

impl RadialField {
    /// Integrates M/s² inward from the last node with an end-corrected
    /// trapezoid rule (g' = 4πρ − 2M/s³ is known at the nodes). Mass beyond
    /// the grid is treated as sitting on the last node.
    pub fn from_density(rho: &SpatialDensity) -> Result<Self> {
        let r = rho.radii();
        let d = rho.density();
        let m = rho.enclosed();
        let n = r.len();
        if d[n - 1] > 0.0 && d[n - 2] > 0.0 {
            let slope = (d[n - 1] / d[n - 2]).ln() / (r[n - 1] / r[n - 2]).ln();
            if slope >= -2.0 {
                return Err(Error::Divergent {
                    quantity: format!("potential tail (outer log-slope of rho {slope:.3})"),
                });
            }
        }
        let total = rho.total_mass();
        let g = |i: usize| m[i] / (r[i] * r[i]);
        let dg = |i: usize| FOUR_PI * d[i] - 2.0 * m[i] / r[i].powi(3);
        let mut phi = vec![0.0; n];
        phi[n - 1] = -total / r[n - 1];
        for i in (0..n - 1).rev() {
            let h = r[i + 1] - r[i];
            let step = 0.5 * h * (g(i) + g(i + 1)) - h * h / 12.0 * (dg(i + 1) - dg(i));
            phi[i] = phi[i + 1] - step;
        }
        let e = |i: usize| m[i] * m[i] / (r[i] * r[i]);
        let de = |i: usize| 2.0 * m[i] * FOUR_PI * d[i] - 2.0 * m[i] * m[i] / r[i].powi(3);
        let body = ordered_sum((0..n - 1).map(|i| {
            let h = r[i + 1] - r[i];
            0.5 * h * (e(i) + e(i + 1)) - h * h / 12.0 * (de(i + 1) - de(i))
        }));
        let dirichlet = FOUR_PI * (m[0] * m[0] / (5.0 * r[0]) + body + total * total / r[n - 1]);
        Ok(RadialField {
            kind: Kind::Smooth,
            radii: r.to_vec(),
            enclosed: m.to_vec(),
            potential: phi,
            source: d.to_vec(),
            dirichlet,
            total_mass: total,
        })
    }

    /// Exact field of an ensemble of thin shells.
    pub fn from_shells(ensemble: &Ensemble) -> Self {
        let mut shells: Vec<(f64, f64)> = ensemble
            .characteristics()
            .iter()
            .map(|c| (c.r, c.w))
            .collect();
        shells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let radii: Vec<f64> = shells.iter().map(|s| s.0).collect();
        let weights: Vec<f64> = shells.iter().map(|s| s.1).collect();
        let mut enclosed = Vec::with_capacity(radii.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            enclosed.push(acc);
        }
        let total = acc;
        let mut potential = vec![0.0; radii.len()];
        let mut outer = 0.0;
        for k in (0..radii.len()).rev() {
            potential[k] = -enclosed[k] / radii[k] - outer;
            outer += weights[k] / radii[k];
        }
        let half = ordered_sum((0..radii.len()).map(|k| {
            let inner = if k == 0 { 0.0 } else { enclosed[k - 1] };
            weights[k] * (inner + 0.5 * weights[k]) / radii[k]
        }));
        RadialField {
            kind: Kind::Shells,
            radii,
            enclosed,
            potential,
            source: weights,
            dirichlet: 8.0 * PI * half,
            total_mass: total,
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn enclosed(&self) -> &[f64] {
        &self.enclosed
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// ‖∇φ‖₂².
    pub fn dirichlet_energy(&self) -> f64 {
        self.dirichlet
    }

    pub fn enclosed_at(&self, r: f64) -> f64 {
        let n = self.radii.len();
        match self.kind {
            Kind::Shells => {
                let k = self.radii.partition_point(|&x| x <= r);
                if k == 0 {
                    0.0
                } else {
                    self.enclosed[k - 1]
                }
            }
            Kind::Smooth => {
                let r0 = self.radii[0];
                if r <= r0 {
                    return self.enclosed[0] * (r / r0).powi(3);
                }
                if r >= self.radii[n - 1] {
                    return self.total_mass;
                }
                let i = self.radii.partition_point(|&x| x <= r) - 1;
                let (x0, x1) = (self.radii[i].powi(3), self.radii[i + 1].powi(3));
                let dx = x1 - x0;
                let t = (r.powi(3) - x0) / dx;
                let (d0, d1) = (self.source[i], self.source[i + 1]);
                self.enclosed[i] + FOUR_PI / 3.0 * dx * (d0 * t + 0.5 * (d1 - d0) * t * t)
            }
        }
    }

    pub fn potential_at(&self, r: f64) -> f64 {
        let n = self.radii.len();
        match self.kind {
            Kind::Shells => {
                let k = self.radii.partition_point(|&x| x <= r);
                if k == n {
                    return -self.total_mass / r;
                }
                // φ(r) = −M(r)/r − Σ_{r_j > r} w_j/r_j, using φ at the next shell
                let inner = if k == 0 { 0.0 } else { self.enclosed[k - 1] };
                let outer = -self.potential[k] - self.enclosed[k] / self.radii[k];
                -inner / r - outer - self.source[k] / self.radii[k]
            }
            Kind::Smooth => {
                let r0 = self.radii[0];
                if r <= r0 {
                    let m0 = self.enclosed[0];
                    return self.potential[0] + m0 * (r * r - r0 * r0) / (2.0 * r0.powi(3));
                }
                if r >= self.radii[n - 1] {
                    return -self.total_mass / r;
                }
                let i = self.radii.partition_point(|&x| x <= r) - 1;
                let (a, b) = (self.radii[i], self.radii[i + 1]);
                let h = b - a;
                let t = (r - a) / h;
                let (m0, m1) = (
                    self.enclosed[i] / (a * a),
                    self.enclosed[i + 1] / (b * b),
                );
                let (y0, y1) = (self.potential[i], self.potential[i + 1]);
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * h * m0
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * h * m1
            }
        }
    }

    /// |∇φ|(r) = M(r)/r².
    pub fn force_at(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::param("r", "must be nonnegative"));
        }
        if r == 0.0 {
            return match self.kind {
                Kind::Shells if self.radii[0] > 0.0 => Ok(0.0),
                Kind::Smooth if self.cubic_near_origin() => Ok(0.0),
                _ => Err(Error::SingularOrigin),
            };
        }
        Ok(self.enclosed_at(r) / (r * r))
    }

    fn cubic_near_origin(&self) -> bool {
        let (m0, m1) = (self.enclosed[0], self.enclosed[1]);
        if m0 <= 0.0 {
            return true;
        }
        let slope = (m1 / m0).ln() / (self.radii[1] / self.radii[0]).ln();
        slope > 2.9
    }

    /// Profile interpolating φ with slopes M/r² (smooth fields only).
    pub fn as_profile(&self) -> Result<RadialProfile> {
        if self.kind == Kind::Shells {
            return Err(Error::Unsupported {
                operation: "profile interpolation",
                representation: "shell-field",
            });
        }
        let slopes = self
            .radii
            .iter()
            .zip(&self.enclosed)
            .map(|(r, m)| m / (r * r))
            .collect();
        RadialProfile::sampled(self.radii.clone(), self.potential.clone(), slopes)
    }

    /// CSV `r,M,phi,force` at the nodes of `grid`.
    pub fn write_csv<W: Write>(&self, writer: W, grid: &RadialGrid) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "M", "phi", "force"])?;
        for &r in grid.radii() {
            let m = self.enclosed_at(r);
            let row = [r, m, self.potential_at(r), m / (r * r)];
            w.write_record(row.map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}
