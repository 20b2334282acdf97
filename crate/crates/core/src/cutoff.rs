//! Dyadic cutoffs: the even bump φ (equal to 1 on [-5/4, 5/4], supported in
//! [-8/5, 8/5]), its shells φ_J(x) = φ(x/2^J) - φ(x/2^{J-1}) and the
//! half-line transform χ̂(s) = ∫₀^∞ e^{isu} φ(u) du.

use crate::special::gauss_legendre;
use num_complex::Complex64;

pub const INNER: f64 = 1.25;
pub const OUTER: f64 = 1.6;

/// C^∞ step: 0 for t <= 0, 1 for t >= 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

pub fn phi(x: f64) -> f64 {
    smooth_step((OUTER - x.abs()) / (OUTER - INNER))
}

/// φ(x / 2^j).
pub fn phi_le(j: i32, x: f64) -> f64 {
    phi(x / 2f64.powi(j))
}

/// φ_J(x) = φ(x/2^J) - φ(x/2^{J-1}).
pub fn phi_shell(j: i32, x: f64) -> f64 {
    phi_le(j, x) - phi_le(j - 1, x)
}

/// Support [lo, hi] of the window piece `j` on the half line; the first
/// piece of a window is the ball φ(x/2^{j_min}).
pub fn piece_support(j: i32, j_min: i32) -> (f64, f64) {
    let s = 2f64.powi(j);
    if j == j_min {
        (0.0, OUTER * s)
    } else {
        (INNER * s / 2.0, OUTER * s)
    }
}

/// Window piece `j`: the ball for j == j_min, the shell φ_j otherwise.
pub fn piece(j: i32, j_min: i32, x: f64) -> f64 {
    if j == j_min {
        phi_le(j, x)
    } else {
        phi_shell(j, x)
    }
}

/// Breakpoints of the window piece `j` (edges of the flat parts).
pub fn piece_breaks(j: i32, j_min: i32) -> Vec<f64> {
    let s = 2f64.powi(j);
    if j == j_min {
        vec![0.0, INNER * s, OUTER * s]
    } else {
        vec![INNER * s / 2.0, OUTER * s / 2.0, INNER * s, OUTER * s]
    }
}

/// ∫₀^∞ φ(u) du.
pub fn phi_integral() -> f64 {
    chi_hat(0.0).re
}

/// χ̂(s) = ∫₀^∞ e^{isu} φ(u) du.
pub fn chi_hat(s: f64) -> Complex64 {
    let flat = if (s * INNER).abs() < 1e-6 {
        let z = s * INNER;
        Complex64::new(INNER * (1.0 - z * z / 6.0), INNER * (z / 2.0 - z * z * z / 24.0))
    } else {
        (Complex64::from_polar(1.0, s * INNER) - 1.0) / Complex64::new(0.0, s)
    };
    let width = OUTER - INNER;
    let panels = ((width * s.abs() / 2.0).ceil() as usize).max(16);
    let (x, w) = gauss_legendre(20);
    let pw = width / panels as f64;
    let mut edge = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = INNER + (p as f64 + 0.5) * pw;
        for (xi, wi) in x.iter().zip(&w) {
            let u = mid + 0.5 * pw * xi;
            edge += Complex64::from_polar(phi(u) * 0.5 * pw * wi, s * u);
        }
    }
    flat + edge
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_profile() {
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(phi(1.25), 1.0);
        assert_eq!(phi(-1.2), 1.0);
        assert_eq!(phi(1.6), 0.0);
        assert!(phi(1.4) > 0.0 && phi(1.4) < 1.0);
        assert!((phi(1.425) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shells_telescope() {
        for &x in &[0.3, 1.0, 2.7, 11.0, 50.0, 199.0] {
            let s: f64 = (1..=8).map(|j| phi_shell(j, x)).sum::<f64>() + phi_le(0, x);
            assert!((s - phi_le(8, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_hat_at_zero_and_large() {
        // by symmetry of the step about its midpoint, ∫ φ = (5/4 + 8/5)/2
        assert!((phi_integral() - 1.425).abs() < 1e-12);
        let s = 300.0;
        let v = chi_hat(s);
        // e^{isu} φ(u) integrates by parts to i/s plus a rapidly decaying rest
        assert!((v - Complex64::new(0.0, 1.0 / s)).norm() < 1e-2 / s);
    }
}
