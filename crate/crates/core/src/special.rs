//! Spherical Bessel functions, Legendre polynomials, Gauss-Legendre rules
//! and uniform-grid Lagrange interpolation.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Fills `out[0..=lmax]` with j_l(z) for z >= 0.
///
/// Upward recurrence when z exceeds lmax, Miller's downward recurrence
/// otherwise, normalized against whichever of j_0, j_1 is larger.
pub fn sph_j_array(lmax: usize, z: f64, out: &mut [f64]) {
    debug_assert!(out.len() > lmax);
    if z == 0.0 {
        out[0] = 1.0;
        for v in out.iter_mut().take(lmax + 1).skip(1) {
            *v = 0.0;
        }
        return;
    }
    let (s, c) = z.sin_cos();
    let j0 = s / z;
    let j1 = s / (z * z) - c / z;
    if z > lmax as f64 {
        out[0] = j0;
        if lmax >= 1 {
            out[1] = j1;
        }
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
        }
        return;
    }
    let start = lmax + 20 + (8.0 * (lmax.max(1) as f64).sqrt()) as usize + z as usize;
    let mut jp = 0.0f64;
    let mut jc = 1e-300f64;
    let mut tmp = vec![0.0f64; lmax + 1];
    for l in (1..=start).rev() {
        let jm = (2 * l + 1) as f64 / z * jc - jp;
        jp = jc;
        jc = jm;
        if l - 1 <= lmax {
            tmp[l - 1] = jc;
        }
        if jc.abs() > 1e250 {
            jc *= 1e-250;
            jp *= 1e-250;
            for v in tmp.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = if j0.abs() >= j1.abs() || lmax == 0 {
        j0 / tmp[0]
    } else {
        j1 / tmp[1]
    };
    for l in 0..=lmax {
        out[l] = tmp[l] * norm;
    }
}

/// Fills `out[0..=lmax]` with y_l(z) for z > 0 by upward recurrence.
pub fn sph_y_array(lmax: usize, z: f64, out: &mut [f64]) {
    let (s, c) = z.sin_cos();
    out[0] = -c / z;
    if lmax >= 1 {
        out[1] = -c / (z * z) - s / z;
    }
    for l in 1..lmax {
        out[l + 1] = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
    }
}

pub fn sph_j(l: usize, z: f64) -> f64 {
    let mut v = vec![0.0; l + 1];
    sph_j_array(l, z, &mut v);
    v[l]
}

pub fn sph_y(l: usize, z: f64) -> f64 {
    let mut v = vec![0.0; l + 1];
    sph_y_array(l, z, &mut v);
    v[l]
}

/// Outgoing spherical Hankel functions h_l = j_l + i y_l.
pub fn sph_h_array(lmax: usize, z: f64, out: &mut [Complex64]) {
    let mut j = vec![0.0; lmax + 1];
    let mut y = vec![0.0; lmax + 1];
    sph_j_array(lmax, z, &mut j);
    sph_y_array(lmax, z, &mut y);
    for l in 0..=lmax {
        out[l] = Complex64::new(j[l], y[l]);
    }
}

/// Fills `out[0..=lmax]` with P_l(x).
pub fn legendre_array(lmax: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if lmax >= 1 {
        out[1] = x;
    }
    for l in 1..lmax {
        out[l + 1] = ((2 * l + 1) as f64 * x * out[l] - l as f64 * out[l - 1]) / (l + 1) as f64;
    }
}

pub fn legendre(l: usize, x: f64) -> f64 {
    let mut v = vec![0.0; l + 1];
    legendre_array(l, x, &mut v);
    v[l]
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Six-point Lagrange interpolation of samples on the uniform grid i*h.
pub fn lagrange6<T>(values: &[T], h: f64, r: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = values.len();
    debug_assert!(n >= 6);
    let s = r / h;
    let mut i0 = s.floor() as isize - 2;
    i0 = i0.clamp(0, n as isize - 6);
    let i0 = i0 as usize;
    let mut acc: Option<T> = None;
    for a in 0..6 {
        let xa = (i0 + a) as f64;
        let mut wgt = 1.0;
        for b in 0..6 {
            if a != b {
                let xb = (i0 + b) as f64;
                wgt *= (s - xb) / (xa - xb);
            }
        }
        let term = values[i0 + a] * wgt;
        acc = Some(match acc {
            None => term,
            Some(v) => v + term,
        });
    }
    acc.unwrap()
}

/// Complex integer power of i.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_closed_forms() {
        for &z in &[0.3, 1.0, 2.5, 7.0, 31.0] {
            let (s, c) = f64::sin_cos(z);
            let j2 = (3.0 / (z * z) - 1.0) * s / z - 3.0 * c / (z * z);
            let y2 = -(3.0 / (z * z) - 1.0) * c / z - 3.0 * s / (z * z);
            let mut j = vec![0.0; 6];
            sph_j_array(5, z, &mut j);
            assert!((j[2] - j2).abs() < 1e-12 * (1.0 + j2.abs()), "z={z}");
            let mut y = vec![0.0; 6];
            sph_y_array(5, z, &mut y);
            assert!((y[2] - y2).abs() < 1e-9 * y2.abs().max(1.0));
        }
    }

    #[test]
    fn bessel_high_order_against_series() {
        // j_l(z) ~ z^l / (2l+1)!! (1 - z^2/(2(2l+3))) for small z
        let z: f64 = 0.01;
        let l = 12;
        let mut df = 1.0;
        for k in (1..=2 * l + 1).step_by(2) {
            df *= k as f64;
        }
        let series = z.powi(l as i32) / df * (1.0 - z * z / (2.0 * (2 * l + 3) as f64));
        let v = sph_j(l, z);
        assert!(((v - series) / series).abs() < 1e-9);
    }

    #[test]
    fn bessel_wronskian() {
        for &z in &[0.5, 3.0, 12.0, 40.0] {
            let mut j = vec![0.0; 31];
            let mut y = vec![0.0; 31];
            sph_j_array(30, z, &mut j);
            sph_y_array(30, z, &mut y);
            for l in 1..30 {
                let w = j[l] * y[l - 1] - j[l - 1] * y[l];
                assert!((w * z * z - 1.0).abs() < 1e-8, "l={l} z={z}");
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn lagrange_exact_for_quintics() {
        let h = 0.1;
        let v: Vec<f64> = (0..20).map(|i| (i as f64 * h).powi(5)).collect();
        let r = 1.234;
        assert!((lagrange6(&v, h, r) - r.powi(5)).abs() < 1e-12);
    }
}
