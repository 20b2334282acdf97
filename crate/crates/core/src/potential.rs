//! Radial potentials, decay moments and the zero-energy bound-state detector.

use crate::grid::RadialGrid;
use crate::quadrature::simpson_halving;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Zero,
    Gaussian,
    Exponential,
    CompactBump,
}

/// A radial potential truncated to zero beyond `r_cut`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub kind: PotentialKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default = "default_rcut")]
    pub r_cut: f64,
}

fn one() -> f64 {
    1.0
}

fn default_rcut() -> f64 {
    12.0
}

impl Default for RadialPotential {
    fn default() -> Self {
        RadialPotential::gaussian(2.0, 1.0, 12.0)
    }
}

impl RadialPotential {
    pub fn zero() -> Self {
        RadialPotential { kind: PotentialKind::Zero, amplitude: 0.0, width: 1.0, r_cut: 12.0 }
    }

    pub fn gaussian(amplitude: f64, width: f64, r_cut: f64) -> Self {
        RadialPotential { kind: PotentialKind::Gaussian, amplitude, width, r_cut }
    }

    pub fn exponential(amplitude: f64, width: f64, r_cut: f64) -> Self {
        RadialPotential { kind: PotentialKind::Exponential, amplitude, width, r_cut }
    }

    pub fn compact_bump(amplitude: f64, width: f64, r_cut: f64) -> Self {
        RadialPotential { kind: PotentialKind::CompactBump, amplitude, width, r_cut }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == PotentialKind::Zero || self.amplitude == 0.0
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        RadialPotential { amplitude, ..*self }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.width > 0.0) || !(self.r_cut > 0.0) || !self.amplitude.is_finite() {
            return Err(crate::DspecError::Config(format!(
                "potential needs width > 0, r_cut > 0 and finite amplitude, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Radius beyond which |V| < 1e-8 |A| (never beyond r_cut).
    pub fn effective_range(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Gaussian => self.width * (1e8f64).ln().sqrt(),
            PotentialKind::Exponential => self.width * (1e8f64).ln(),
            PotentialKind::CompactBump => self.width,
        };
        r.min(self.r_cut)
    }
}

/// V(r), zero beyond the cutoff.
pub fn eval_potential(p: &RadialPotential, r: f64) -> f64 {
    if r > p.r_cut || p.kind == PotentialKind::Zero {
        return 0.0;
    }
    let x = r / p.width;
    match p.kind {
        PotentialKind::Zero => 0.0,
        PotentialKind::Gaussian => p.amplitude * (-x * x).exp(),
        PotentialKind::Exponential => p.amplitude * (-x).exp(),
        PotentialKind::CompactBump => {
            if x >= 1.0 {
                0.0
            } else {
                p.amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub moments: Vec<(u32, f64)>,
    pub max_derivative_norms: Vec<(u32, f64)>,
    /// Set when step-halving failed to settle for some order.
    pub diverged: bool,
}

/// Weighted moments \int (1+r)^n |V| r^2 dr and finite-difference
/// sup norms of V, V', V''.
pub fn decay_moments(p: &RadialPotential, orders: &[u32]) -> crate::Result<DecayReport> {
    if orders.is_empty() {
        return Err(crate::DspecError::Config("decay_moments needs at least one order".into()));
    }
    let mut moments = Vec::with_capacity(orders.len());
    let mut diverged = false;
    for &n in orders {
        if p.is_zero() {
            moments.push((n, 0.0));
            continue;
        }
        let (v, ok) = simpson_halving(
            |r| (1.0 + r).powi(n as i32) * eval_potential(p, r).abs() * r * r,
            0.0,
            p.r_cut,
            1e-11,
        );
        diverged |= !ok || !v.is_finite();
        moments.push((n, v));
    }
    let d = 1e-3;
    let steps = (p.r_cut / d) as usize;
    let mut sup = [0.0f64; 3];
    for i in 0..steps {
        let r = (i as f64 + 0.5) * d;
        let (a, b, c) = (eval_potential(p, r - d), eval_potential(p, r), eval_potential(p, r + d));
        sup[0] = sup[0].max(b.abs());
        if r > d {
            sup[1] = sup[1].max(((c - a) / (2.0 * d)).abs());
            sup[2] = sup[2].max(((c - 2.0 * b + a) / (d * d)).abs());
        }
    }
    Ok(DecayReport {
        moments,
        max_derivative_norms: vec![(0, sup[0]), (1, sup[1]), (2, sup[2])],
        diverged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostic {
    pub bound_state_counts: Vec<usize>,
    pub s_wave_zero_energy_slope: f64,
    pub is_generic: bool,
}

pub const RESONANCE_THRESHOLD: f64 = 1e-3;

/// Counts nodes of the zero-energy regular solution for each l <= l_max.
///
/// Beyond r_cut the solution is a r^{l+1} + b r^{-l}; a sign change of that
/// free continuation past the integration end is counted too.
pub fn detect_bound_states(p: &RadialPotential, l_max: usize, grid: &RadialGrid) -> SpectralDiagnostic {
    let h = grid.h();
    let r_end = p.r_cut.max(p.effective_range() + 1.0);
    let n_end = (r_end / h).ceil() as usize;
    let mut counts = Vec::with_capacity(l_max + 1);
    let mut slope = 0.0;
    for l in 0..=l_max {
        let (nodes, u, du, r) = zero_energy_solution(p, l, h, n_end);
        let ll = l as f64;
        // u = a r^{l+1} + b r^{-l}:  u' = (l+1) a r^l - l b r^{-l-1}
        let a = (ll * u + r * du) / ((2.0 * ll + 1.0) * r.powi(l as i32 + 1));
        let b = ((ll + 1.0) * u - r * du) / ((2.0 * ll + 1.0) * r.powf(-ll));
        let mut extra = 0;
        if a != 0.0 && a * b < 0.0 {
            let root = (-b / a).powf(1.0 / (2.0 * ll + 1.0));
            if root > r {
                extra = 1;
            }
        }
        counts.push(nodes + extra);
        if l == 0 {
            let scale = (u * u + (r * du) * (r * du)).sqrt();
            slope = if scale > 0.0 { r * du / scale } else { 0.0 };
        }
    }
    let is_generic = counts.iter().all(|&c| c == 0) && slope.abs() > RESONANCE_THRESHOLD;
    SpectralDiagnostic { bound_state_counts: counts, s_wave_zero_energy_slope: slope, is_generic }
}

/// Numerov at zero energy; returns (sign changes, u, u', r) at the last node,
/// with u rescaled whenever it exceeds 1e300.
fn zero_energy_solution(p: &RadialPotential, l: usize, h: f64, n_end: usize) -> (usize, f64, f64, f64) {
    let ll = (l * (l + 1)) as f64;
    let f = |i: usize| -> f64 {
        let r = i as f64 * h;
        if i == 0 {
            0.0
        } else {
            ll / (r * r) + eval_potential(p, r)
        }
    };
    let v0 = eval_potential(p, 0.0);
    let a2 = v0 / (2.0 * (2 * l + 3) as f64);
    let c = h * h / 12.0;
    let i_s = ((ll / 3.6).sqrt().ceil() as usize).max(1);
    let seed = |i: usize| {
        let r = i as f64 * h;
        r.powi(l as i32 + 1) * (1.0 + a2 * r * r)
    };
    // keep a short history for the end-point derivative
    let mut hist: Vec<f64> = vec![seed(i_s - 1), seed(i_s)];
    let mut y_prev = if i_s == 1 {
        if l == 1 { -2.0 * c } else { 0.0 }
    } else {
        (1.0 - c * f(i_s - 1)) * hist[0]
    };
    let mut y_cur = (1.0 - c * f(i_s)) * hist[1];
    let mut nodes = 0usize;
    let mut last_sign = hist[1].signum();
    for i in i_s..n_end {
        let fi = f(i);
        let ui = hist[hist.len() - 1];
        let y_next = 2.0 * y_cur + 12.0 * c * fi * ui - y_prev;
        let f_next = f(i + 1);
        let u_next = y_next / (1.0 - c * f_next);
        y_prev = y_cur;
        y_cur = y_next;
        let s = u_next.signum();
        if u_next != 0.0 && s != last_sign {
            nodes += 1;
            last_sign = s;
        }
        hist.push(u_next);
        if hist.len() > 8 {
            hist.remove(0);
        }
        if u_next.abs() > 1e300 {
            let k = 1e-300;
            for v in hist.iter_mut() {
                *v *= k;
            }
            y_prev *= k;
            y_cur *= k;
        }
    }
    let m = hist.len();
    let u = hist[m - 1];
    let du = (25.0 * hist[m - 1] - 48.0 * hist[m - 2] + 36.0 * hist[m - 3] - 16.0 * hist[m - 4]
        + 3.0 * hist[m - 5])
        / (12.0 * h);
    (nodes, u, du, n_end as f64 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(eval_potential(&RadialPotential::zero(), 1.0), 0.0);
        let g = RadialPotential::gaussian(2.0, 1.0, 12.0);
        assert_eq!(eval_potential(&g, 0.0), 2.0);
        assert!((eval_potential(&g, 1.0) - 0.7357588823428847).abs() < 1e-15);
        assert_eq!(eval_potential(&g, 12.5), 0.0);
    }

    #[test]
    fn gaussian_order_zero_moment() {
        let g = RadialPotential::gaussian(2.0, 1.0, 12.0);
        let rep = decay_moments(&g, &[0, 2]).unwrap();
        assert!((rep.moments[0].1 - 0.886_226_925_452_758).abs() < 1e-9);
        assert!(!rep.diverged);
    }

    #[test]
    fn zero_potential_is_generic() {
        let d = detect_bound_states(&RadialPotential::zero(), 3, &RadialGrid::new(20.0, 2000));
        assert_eq!(d.bound_state_counts, vec![0, 0, 0, 0]);
        assert!(d.is_generic);
    }
}
