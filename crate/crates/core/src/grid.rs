//! Tabulated densities on an abscissa grid, with a declared total mass.

use std::io::Write;

use crate::error::{Error, Result};

/// Default relative tolerance between the declared mass and the trapezoidal
/// integral of the tabulated values.
pub const DEFAULT_MASS_TOL: f64 = 1e-3;

/// A density tabulated on strictly increasing abscissae.
///
/// The declared `mass` is the total integral the table is supposed to carry
/// (N for level densities, 1 for normalized eigenvalue distributions); the
/// constructor checks it against the trapezoidal integral.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    points: Vec<f64>,
    values: Vec<f64>,
    mass: f64,
    mass_tol: f64,
}

impl DensityGrid {
    pub fn new(points: Vec<f64>, values: Vec<f64>, mass: f64) -> Result<Self> {
        Self::with_tolerance(points, values, mass, DEFAULT_MASS_TOL)
    }

    pub fn with_tolerance(
        points: Vec<f64>,
        values: Vec<f64>,
        mass: f64,
        mass_tol: f64,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("DensityGrid", "need at least two grid points"));
        }
        if points.len() != values.len() {
            return Err(Error::domain(
                "DensityGrid",
                format!("{} points vs {} values", points.len(), values.len()),
            ));
        }
        if !points.iter().all(|p| p.is_finite()) {
            return Err(Error::domain("DensityGrid", "non-finite abscissa"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("DensityGrid", "points must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::domain("DensityGrid", format!("invalid density value {v}")));
        }
        if !(mass > 0.0) {
            return Err(Error::domain("DensityGrid", format!("mass must be positive, got {mass}")));
        }
        let grid = DensityGrid { points, values, mass, mass_tol };
        let integral = grid.trapezoid();
        if (integral - mass).abs() > mass_tol * mass {
            return Err(Error::inconsistency(
                "DensityGrid",
                format!("trapezoidal integral {integral} vs declared mass {mass}"),
            ));
        }
        Ok(grid)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mass_tolerance(&self) -> f64 {
        self.mass_tol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoidal integral of the tabulated values.
    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.points, &self.values)
    }

    /// Linear interpolation; zero outside the tabulated support.
    pub fn interpolate(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x < pts[0] || x > pts[pts.len() - 1] {
            return 0.0;
        }
        // partition_point: first index with pts[i] > x
        let hi = pts.partition_point(|p| *p <= x);
        if hi == 0 {
            return self.values[0];
        }
        if hi == pts.len() {
            return self.values[pts.len() - 1];
        }
        let lo = hi - 1;
        let t = (x - pts[lo]) / (pts[hi] - pts[lo]);
        self.values[lo] * (1.0 - t) + self.values[hi] * t
    }

    /// Two-column CSV with a metadata comment line:
    /// `# mass=<m> N=<N> kind=<tag>` then `x,density` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W, n: u32, kind: &str) -> Result<()> {
        writeln!(w, "# mass={} N={} kind={}", self.mass, n, kind)?;
        writeln!(w, "x,density")?;
        for (x, v) in self.points.iter().zip(self.values.iter()) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }
}

/// Trapezoidal rule over matched slices.
pub fn trapezoid(points: &[f64], values: &[f64]) -> f64 {
    points
        .windows(2)
        .zip(values.windows(2))
        .map(|(p, v)| 0.5 * (v[0] + v[1]) * (p[1] - p[0]))
        .sum()
}

/// Uniformly spaced grid of `n` points covering [a, b] inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && b > a);
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * h).collect()
}
