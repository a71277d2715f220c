use crate::error::{Error, Result};

const FOUR_PI_3: f64 = 4.0 * std::f64::consts::PI / 3.0;

/// Strictly increasing positive radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radii: Vec<f64>,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid::geometric(1e-3, 1e3, 2048).expect("default grid is valid")
    }
}

impl RadialGrid {
    pub fn geometric(r_min: f64, r_max: f64, nodes: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || nodes < 2 {
            return Err(Error::param(
                "grid",
                format!("need 0 < r_min < r_max and >= 2 nodes, got {r_min}, {r_max}, {nodes}"),
            ));
        }
        let g = (r_max / r_min).powf(1.0 / (nodes - 1) as f64);
        let mut radii: Vec<f64> = (0..nodes).map(|i| r_min * g.powi(i as i32)).collect();
        radii[nodes - 1] = r_max;
        Ok(RadialGrid { radii })
    }

    pub fn from_radii(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "grid",
                "radii must be positive and strictly increasing (>= 2 nodes)",
            ));
        }
        Ok(RadialGrid { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    /// Control volumes of the trapezoid rule in x = r³, with the ball
    /// [0, r₀] attached to the first node.
    pub fn control_volumes(&self) -> Vec<f64> {
        let n = self.radii.len();
        let x: Vec<f64> = self.radii.iter().map(|r| r.powi(3)).collect();
        let mut v = vec![0.0; n];
        v[0] = x[0];
        for i in 0..n - 1 {
            let half = 0.5 * (x[i + 1] - x[i]);
            v[i] += half;
            v[i + 1] += half;
        }
        v.iter().map(|&c| FOUR_PI_3 * c).collect()
    }

    /// Index i with r_i ≤ r < r_{i+1}, clamped to the grid.
    pub fn locate(&self, r: f64) -> usize {
        let n = self.radii.len();
        self.radii.partition_point(|&x| x <= r).clamp(1, n - 1) - 1
    }
}

/// ρ(r) on a grid together with the enclosed mass at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDensity {
    grid: RadialGrid,
    density: Vec<f64>,
    enclosed: Vec<f64>,
    total_mass: f64,
}

impl SpatialDensity {
    /// Density samples; the enclosed mass follows the trapezoid rule in x = r³
    /// with constant density on [0, r₀]. Mass beyond the grid is zero.
    pub fn from_samples(grid: RadialGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::param("density", "length must match the grid"));
        }
        if let Some(i) = density.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::param(
                "density",
                format!("negative or non-finite value at r = {:e}", grid.radii()[i]),
            ));
        }
        let enclosed = trapezoid_enclosed(&grid, &density);
        let total_mass = enclosed[enclosed.len() - 1];
        Ok(SpatialDensity {
            grid,
            density,
            enclosed,
            total_mass,
        })
    }

    /// Density with an exactly known cumulative mass; `total_mass` may exceed
    /// the mass inside the grid by a small escaping amount.
    pub fn with_enclosed(
        grid: RadialGrid,
        density: Vec<f64>,
        enclosed: Vec<f64>,
        total_mass: f64,
    ) -> Result<Self> {
        if density.len() != grid.len() || enclosed.len() != grid.len() {
            return Err(Error::param("density", "length must match the grid"));
        }
        if density.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::param("density", "must be nonnegative"));
        }
        Ok(SpatialDensity {
            grid,
            density,
            enclosed,
            total_mass,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.radii()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn enclosed(&self) -> &[f64] {
        &self.enclosed
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Mass outside the last node.
    pub fn escaping_mass(&self) -> f64 {
        self.total_mass - self.enclosed[self.enclosed.len() - 1]
    }

    /// ‖ρ‖_γ by the trapezoid rule in x = r³.
    pub fn lp_norm(&self, gamma: f64) -> f64 {
        let powered: Vec<f64> = self.density.iter().map(|d| d.powf(gamma)).collect();
        let e = trapezoid_enclosed(&self.grid, &powered);
        e[e.len() - 1].powf(1.0 / gamma)
    }
}

fn trapezoid_enclosed(grid: &RadialGrid, density: &[f64]) -> Vec<f64> {
    let r = grid.radii();
    let mut out = Vec::with_capacity(r.len());
    let mut acc = FOUR_PI_3 * density[0] * r[0].powi(3);
    out.push(acc);
    for i in 0..r.len() - 1 {
        let dx = r[i + 1].powi(3) - r[i].powi(3);
        acc += FOUR_PI_3 * 0.5 * (density[i] + density[i + 1]) * dx;
        out.push(acc);
    }
    out
}
