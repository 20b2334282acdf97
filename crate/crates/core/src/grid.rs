//! Uniform radial and spectral grids.

use serde::{Deserialize, Serialize};

/// Nodes r_i = i h for i = 0..=n_points, h = r_max / n_points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_points: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize) -> Self {
        RadialGrid { r_max, n_points }
    }

    /// Grid with spacing at most `h` covering [0, r_max].
    pub fn with_spacing(r_max: f64, h: f64) -> Self {
        RadialGrid { r_max, n_points: (r_max / h).ceil() as usize }
    }

    pub fn h(&self) -> f64 {
        self.r_max / self.n_points as f64
    }

    pub fn len(&self) -> usize {
        self.n_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }
}

/// Uniform nodes kappa_min + j dk, j = 0..n_points-1, ending at kappa_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub n_points: usize,
}

impl KGrid {
    pub fn new(kappa_min: f64, kappa_max: f64, n_points: usize) -> Self {
        KGrid { kappa_min, kappa_max, n_points }
    }

    /// Grid whose first node sits one spacing above zero.
    pub fn from_zero(kappa_max: f64, n_points: usize) -> Self {
        KGrid { kappa_min: kappa_max / n_points as f64, kappa_max, n_points }
    }

    pub fn dk(&self) -> f64 {
        if self.n_points < 2 {
            return 0.0;
        }
        (self.kappa_max - self.kappa_min) / (self.n_points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn kappa(&self, j: usize) -> f64 {
        self.kappa_min + j as f64 * self.dk()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.kappa(j)).collect()
    }

    /// True when the first node is one spacing above zero, so the grid
    /// extends to a virtual node at kappa = 0.
    pub fn starts_at_spacing(&self) -> bool {
        (self.kappa_min - self.dk()).abs() <= 1e-9 * self.dk()
    }

    /// Weights for \int_0^{kappa_max} F(k) dk with F ~ k^2 near zero.
    ///
    /// With a virtual zero node the plain trapezoid is used (F(0) = 0);
    /// otherwise the wedge [0, kappa_min] is integrated with the k^2 law.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = self.dk();
        let mut w = vec![dk; n];
        w[n - 1] = 0.5 * dk;
        if self.starts_at_spacing() {
            return w;
        }
        w[0] = 0.5 * dk + self.kappa_min / 3.0;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kgrid_weights_integrate_quadratic_times_gaussian() {
        let g = KGrid::from_zero(10.0, 2000);
        let w = g.weights();
        let s: f64 = (0..g.len()).map(|j| w[j] * g.kappa(j).powi(2) * (-g.kappa(j).powi(2)).exp()).sum();
        assert!((s - std::f64::consts::PI.sqrt() / 4.0).abs() < 1e-12);
    }
}
