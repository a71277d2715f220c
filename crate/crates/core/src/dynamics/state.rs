//! Characteristic state and the kick–drift–kick step.
//!
//! Each characteristic is a thin shell. The force on a shell uses
//! M̃ = (mass strictly inside) + w/2, the mean of the interior and exterior
//! enclosed masses. With that choice the shell system is Hamiltonian with
//! H = Σ w γ − Σ w M̃/r, and H coincides with the energy of the shell field.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::crossing::crossing_impulses;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::phase_space::{Characteristic, Ensemble};
use crate::radial_field::RadialField;

pub const DEFAULT_R_FLOOR: f64 = 1e-6;

/// Source of the force acting on the characteristics.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FieldMode {
    #[default]
    SelfConsistent,
    /// Fixed point mass at the origin.
    PointMass(f64),
    /// No force at all.
    Zero,
    /// Fixed field, e.g. a snapshot of an earlier state.
    Snapshot(RadialField),
}

impl FieldMode {
    pub fn is_frozen(&self) -> bool {
        !matches!(self, FieldMode::SelfConsistent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) struct Particle {
    pub r: f64,
    pub p_r: f64,
    pub l: f64,
    pub w: f64,
    /// Effective enclosed mass M̃ driving the force.
    pub m: f64,
    /// Potential at the particle (frozen modes only).
    pub phi: f64,
    pub id: u32,
}

impl Particle {
    #[inline]
    pub fn momentum_sq(&self) -> f64 {
        let t = self.l / self.r;
        self.p_r * self.p_r + t * t
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        (1.0 + self.momentum_sq()).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub(crate) t: f64,
    pub(crate) particles: Vec<Particle>,
    pub(crate) mode: FieldMode,
    pub(crate) exec: Execution,
    pub(crate) r_floor: f64,
    pub(crate) reflections: usize,
}

impl SimulationState {
    pub fn new(ensemble: &Ensemble, mode: FieldMode, exec: Execution) -> Result<Self> {
        if let FieldMode::PointMass(m) = mode {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::param("point_mass", "must be nonnegative"));
            }
        }
        if ensemble.len() > u32::MAX as usize {
            return Err(Error::param("particles", "too many characteristics"));
        }
        let particles = ensemble
            .characteristics()
            .iter()
            .enumerate()
            .map(|(i, c)| Particle {
                r: c.r,
                p_r: c.p_r,
                l: c.l,
                w: c.w,
                m: 0.0,
                phi: 0.0,
                id: i as u32,
            })
            .collect();
        let mut s = SimulationState {
            t: 0.0,
            particles,
            mode,
            exec,
            r_floor: DEFAULT_R_FLOOR,
            reflections: 0,
        };
        s.refresh();
        Ok(s)
    }

    pub fn with_r_floor(mut self, r_floor: f64) -> Result<Self> {
        if !(r_floor > 0.0) {
            return Err(Error::param("r_floor", "must be positive"));
        }
        self.r_floor = r_floor;
        Ok(self)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mode(&self) -> &FieldMode {
        &self.mode
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn reflections(&self) -> usize {
        self.reflections
    }

    /// Characteristics in their original order.
    pub fn characteristics(&self) -> Vec<Characteristic> {
        let mut out = vec![Characteristic::new(1.0, 0.0, 1.0, 0.0); self.particles.len()];
        for p in &self.particles {
            out[p.id as usize] = Characteristic::new(p.r, p.p_r, p.l, p.w);
        }
        out
    }

    pub fn ensemble(&self) -> Ensemble {
        Ensemble::from_trusted(self.characteristics())
    }

    /// Field generated by the characteristics (not the frozen field).
    pub fn field(&self) -> RadialField {
        RadialField::from_shells(&self.ensemble())
    }

    /// Recomputes M̃ (and φ in frozen modes) from the current radii.
    pub(crate) fn refresh(&mut self) {
        match &self.mode {
            FieldMode::SelfConsistent => {
                self.particles.sort_by(|a, b| a.r.total_cmp(&b.r));
                let mut inside = 0.0;
                for p in &mut self.particles {
                    p.m = inside + 0.5 * p.w;
                    inside += p.w;
                }
            }
            FieldMode::PointMass(mass) => {
                let mass = *mass;
                self.exec.for_each_mut(&mut self.particles, |_, p| {
                    p.m = mass;
                    p.phi = -mass / p.r;
                });
            }
            FieldMode::Zero => self.exec.for_each_mut(&mut self.particles, |_, p| {
                p.m = 0.0;
                p.phi = 0.0;
            }),
            FieldMode::Snapshot(field) => self.exec.for_each_mut(&mut self.particles, |_, p| {
                p.m = field.enclosed_at(p.r);
                p.phi = field.potential_at(p.r);
            }),
        }
    }

    fn kick(&mut self, h: f64) {
        self.exec.for_each_mut(&mut self.particles, |_, p| {
            p.p_r -= p.m / (p.r * p.r) * h;
        });
    }

    /// Free relativistic motion along a straight line for time `dt`.
    fn drift(&mut self, dt: f64) {
        let floor = self.r_floor;
        let hits = AtomicUsize::new(0);
        self.exec.for_each_mut(&mut self.particles, |_, p| {
            let (r, p_r) = free_flight(p, dt);
            p.r = r;
            p.p_r = p_r;
            if !(p.r >= floor) {
                p.r = floor;
                p.p_r = p.p_r.abs();
                hits.fetch_add(1, Ordering::Relaxed);
            }
        });
        self.reflections += hits.into_inner();
    }

    fn add_impulses(&mut self, impulse: &[f64], fraction: f64) {
        self.exec.for_each_mut(&mut self.particles, |i, p| p.p_r += fraction * impulse[i]);
    }

    fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.w).collect()
    }

    fn radii(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.r).collect()
    }

    /// Drift with shell-crossing corrections, split in two halves around the
    /// drift so that the step stays symmetric. The first half uses crossings
    /// of a predicted drift, the second those of the actual one.
    fn corrected_drift(&mut self, dt: f64) {
        let floor = self.r_floor;
        let r0 = self.radii();
        let w = self.weights();
        let predicted = self.exec.map(&self.particles, |p| free_flight(p, dt).0.max(floor));
        let first = crossing_impulses(&r0, &predicted, &w, dt);
        self.add_impulses(&first, 0.5);
        self.drift(dt);
        let second = crossing_impulses(&r0, &self.radii(), &w, dt);
        self.add_impulses(&second, 0.5);
    }

    /// One symmetric kick–drift–kick step; negative `dt` runs backwards.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::param("dt", format!("must be finite and nonzero, got {dt}")));
        }
        self.kick(0.5 * dt);
        if self.mode.is_frozen() {
            self.drift(dt);
        } else {
            self.corrected_drift(dt);
        }
        self.refresh();
        self.kick(0.5 * dt);
        self.t += dt;
        Ok(())
    }

    /// (min_i min{ε r/|v|, ε γ/|ṗ_r|}, max_i |p|).
    pub fn scan(&self, epsilon: f64) -> (f64, f64) {
        self.exec.extrema_by(&self.particles, |p| {
            let p2 = p.momentum_sq();
            let g = (1.0 + p2).sqrt();
            let speed = p2.sqrt() / g;
            let pdot = (p.l * p.l / (g * p.r.powi(3)) - p.m / (p.r * p.r)).abs();
            let a = if speed > 0.0 { epsilon * p.r / speed } else { f64::INFINITY };
            let b = if pdot > 0.0 { epsilon * g / pdot } else { f64::INFINITY };
            (a.min(b), p2.sqrt())
        })
    }

    pub fn support(&self) -> f64 {
        self.scan(1.0).1
    }
}

/// (r, p_r) after straight-line motion for time `dt`.
#[inline]
fn free_flight(p: &Particle, dt: f64) -> (f64, f64) {
    let p2 = p.momentum_sq();
    let tau = dt / (1.0 + p2).sqrt();
    let x = p.r + p.p_r * tau;
    let y = p.l * tau / p.r;
    let r = x.hypot(y);
    (r, (p.r * p.p_r + p2 * tau) / r)
}
