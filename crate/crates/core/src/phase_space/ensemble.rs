use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::grid::{RadialGrid, SpatialDensity};
use crate::error::{Error, Result};
use crate::par::ordered_sum;

/// Angular momenta below this are treated as zero.
pub const MIN_ANGULAR_MOMENTUM: f64 = 1e-12;
/// Allowed deviation of the total weight from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// One spherical shell of characteristics in reduced coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    pub r: f64,
    pub p_r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub w: f64,
}

impl Characteristic {
    pub fn new(r: f64, p_r: f64, l: f64, w: f64) -> Self {
        Characteristic { r, p_r, l, w }
    }

    /// |p|² = p_r² + L²/r².
    pub fn momentum_sq(&self) -> f64 {
        self.p_r * self.p_r + (self.l / self.r).powi(2)
    }

    pub fn momentum(&self) -> f64 {
        self.momentum_sq().sqrt()
    }

    pub fn gamma(&self) -> f64 {
        (1.0 + self.momentum_sq()).sqrt()
    }

    fn check(&self, index: usize) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidEnsemble(format!("characteristic {index}: {why}")));
        if ![self.r, self.p_r, self.l, self.w].iter().all(|v| v.is_finite()) {
            return bad("non-finite coordinate");
        }
        if self.r <= 0.0 {
            return bad("radius must be positive");
        }
        if self.l < MIN_ANGULAR_MOMENTUM {
            return bad("angular momentum vanishes (L < 1e-12)");
        }
        if self.w < 0.0 {
            return bad("negative weight");
        }
        Ok(())
    }
}

/// Weighted characteristic ensemble of unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    characteristics: Vec<Characteristic>,
}

impl Ensemble {
    pub fn new(characteristics: Vec<Characteristic>) -> Result<Self> {
        if characteristics.is_empty() {
            return Err(Error::InvalidEnsemble("no characteristics".into()));
        }
        for (i, c) in characteristics.iter().enumerate() {
            c.check(i)?;
        }
        let mass = ordered_sum(characteristics.iter().map(|c| c.w));
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidEnsemble(format!(
                "total weight {mass} differs from 1"
            )));
        }
        Ok(Ensemble { characteristics })
    }

    /// Skips validation; used by the integrator, which only moves radii and
    /// radial momenta of an ensemble that was valid on entry.
    pub(crate) fn from_trusted(characteristics: Vec<Characteristic>) -> Self {
        Ensemble { characteristics }
    }

    pub fn characteristics(&self) -> &[Characteristic] {
        &self.characteristics
    }

    pub fn into_characteristics(self) -> Vec<Characteristic> {
        self.characteristics
    }

    pub fn len(&self) -> usize {
        self.characteristics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characteristics.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        ordered_sum(self.characteristics.iter().map(|c| c.w))
    }

    pub fn momentum_support(&self) -> f64 {
        self.characteristics
            .iter()
            .map(Characteristic::momentum)
            .fold(0.0, f64::max)
    }

    /// Image under f ↦ κ³λ³f(λp, κq).
    pub fn double_scale(&self, kappa: f64, lambda: f64) -> Ensemble {
        Ensemble {
            characteristics: self
                .characteristics
                .iter()
                .map(|c| Characteristic {
                    r: c.r / kappa,
                    p_r: c.p_r / lambda,
                    l: c.l / (kappa * lambda),
                    w: c.w,
                })
                .collect(),
        }
    }

    /// Linear-in-r³ assignment of every weight to its two bracketing nodes.
    /// Weight beyond the last node is added there if it is at most
    /// `escape_tolerance`, otherwise the deposit fails.
    pub fn deposit(&self, grid: &RadialGrid, escape_tolerance: f64) -> Result<SpatialDensity> {
        let r = grid.radii();
        let n = r.len();
        let x: Vec<f64> = r.iter().map(|v| v.powi(3)).collect();
        let mut mass = vec![0.0; n];
        let mut escaped = 0.0;
        for c in &self.characteristics {
            if c.r <= r[0] {
                mass[0] += c.w;
            } else if c.r >= r[n - 1] {
                if c.r > r[n - 1] {
                    escaped += c.w;
                }
                mass[n - 1] += c.w;
            } else {
                let i = grid.locate(c.r);
                let a = (c.r.powi(3) - x[i]) / (x[i + 1] - x[i]);
                mass[i] += c.w * (1.0 - a);
                mass[i + 1] += c.w * a;
            }
        }
        if escaped > escape_tolerance {
            return Err(Error::GridCoverage { fraction: escaped });
        }
        let volumes = grid.control_volumes();
        let density: Vec<f64> = mass.iter().zip(&volumes).map(|(m, v)| m / v).collect();
        let four_pi_3 = 4.0 / 3.0 * std::f64::consts::PI;
        let mut enclosed = Vec::with_capacity(n);
        let mut acc = four_pi_3 * density[0] * x[0];
        enclosed.push(acc);
        for i in 1..n {
            acc += four_pi_3 * 0.5 * (density[i - 1] + density[i]) * (x[i] - x[i - 1]);
            enclosed.push(acc);
        }
        let total = ordered_sum(mass.iter().copied());
        SpatialDensity::with_enclosed(grid.clone(), density, enclosed, total)
    }

    /// CSV with header `r,p_r,L,w` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "p_r", "L", "w"])?;
        for c in &self.characteristics {
            w.write_record([c.r, c.p_r, c.l, c.w].map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "p_r", "L", "w"] {
            return Err(Error::InvalidEnsemble(format!(
                "expected header r,p_r,L,w, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows: std::result::Result<Vec<Characteristic>, _> = rdr.deserialize().collect();
        Ensemble::new(rows?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_vanishing_angular_momentum() {
        let e = Ensemble::new(vec![Characteristic::new(1.0, 0.0, 0.0, 1.0)]);
        assert!(matches!(e, Err(Error::InvalidEnsemble(_))));
        let e = Ensemble::new(vec![Characteristic::new(1.0, 0.0, 5e-13, 1.0)]);
        assert!(e.is_err());
    }

    #[test]
    fn rejects_wrong_mass_and_negative_weight() {
        assert!(Ensemble::new(vec![Characteristic::new(1.0, 0.0, 1.0, 0.5)]).is_err());
        assert!(Ensemble::new(vec![
            Characteristic::new(1.0, 0.0, 1.0, 1.5),
            Characteristic::new(2.0, 0.0, 1.0, -0.5),
        ])
        .is_err());
    }

    #[test]
    fn momentum_support_examples() {
        let e = Ensemble::new(vec![Characteristic::new(1.0, 3.0, 4.0, 1.0)]).unwrap();
        assert_relative_eq!(e.momentum_support(), 5.0);
        let e = Ensemble::new(vec![
            Characteristic::new(0.5, 0.0, 1.0, 0.5),
            Characteristic::new(2.0, 0.0, 1.0, 0.5),
        ])
        .unwrap();
        assert_relative_eq!(e.momentum_support(), 2.0);
    }

    #[test]
    fn single_shell_deposits_unit_mass_next_to_its_radius() {
        let e = Ensemble::new(vec![Characteristic::new(1.0, 0.0, 1.0, 1.0)]).unwrap();
        let grid = RadialGrid::default();
        let rho = e.deposit(&grid, 0.0).unwrap();
        assert_relative_eq!(rho.total_mass(), 1.0, max_relative = 1e-15);
        let i = grid.locate(1.0);
        let vols = grid.control_volumes();
        let near: f64 = (i..=i + 1).map(|k| rho.density()[k] * vols[k]).sum();
        assert_relative_eq!(near, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn escaping_weight_is_reported() {
        let e = Ensemble::new(vec![
            Characteristic::new(1.0, 0.0, 1.0, 0.9),
            Characteristic::new(5e3, 0.0, 1.0, 0.1),
        ])
        .unwrap();
        let err = e.deposit(&RadialGrid::default(), 1e-6).unwrap_err();
        assert!(matches!(err, Error::GridCoverage { fraction } if (fraction - 0.1).abs() < 1e-15));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let e = Ensemble::new(vec![
            Characteristic::new(0.1234567890123456, -0.3, 1.0 / 3.0, 0.25),
            Characteristic::new(2.0, 1e-7, 0.2, 0.75),
        ])
        .unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let back = Ensemble::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, e);
        assert!(String::from_utf8(buf).unwrap().starts_with("r,p_r,L,w\n"));
    }
}
