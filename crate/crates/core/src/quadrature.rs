//! Composite quadrature rules and finite differences on uniform grids.

use crate::special::gauss_legendre;
use std::ops::{Add, Mul, Sub};

/// Trapezoid weights for `n` uniform nodes with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Composite Simpson weights; an even number of nodes closes with the 3/8 rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 4 || n == 3, "simpson needs at least 3 nodes");
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if intervals % 2 == 1 {
        let s = simpson_end;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Composite Gauss-Legendre nodes and weights on [a, b].
pub fn gl_panels(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * width * xi);
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre over a list of breakpoints, with panels no
/// wider than `max_width`.
pub fn gl_breakpoints(breaks: &[f64], max_width: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
        let (x, w) = gl_panels(a, b, panels, order);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Integrates `f` on [a, b] by composite Simpson, halving the step until
/// successive values agree to `rel_tol`. Returns (value, converged).
pub fn simpson_halving<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, bool) {
    let mut n = 64usize;
    let eval = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let c = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += c * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut prev = eval(n);
    for _ in 0..14 {
        n *= 2;
        let cur = eval(n);
        let scale = cur.abs().max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= rel_tol * scale || cur == prev {
            return (cur, true);
        }
        prev = cur;
    }
    (prev, false)
}

/// Cumulative integral of uniformly sampled data, fourth order in h.
/// `out[i] = \int_{x_0}^{x_i} f`.
pub fn cumulative<T>(f: &[T], h: f64, zero: T) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    let mut out = vec![zero; n];
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + (f[i - 1] + f[i]) * (0.5 * h);
        }
        return out;
    }
    for i in 0..n - 1 {
        let inc = if i == 0 {
            (f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]) * (h / 24.0)
        } else if i == n - 2 {
            (f[n - 1] * 9.0 + f[n - 2] * 19.0 - f[n - 3] * 5.0 + f[n - 4]) * (h / 24.0)
        } else {
            (f[i] * 13.0 + f[i + 1] * 13.0 - f[i - 1] - f[i + 2]) * (h / 24.0)
        };
        out[i + 1] = out[i] + inc;
    }
    out
}

/// First derivative by fourth-order differences (one-sided at the ends).
pub fn derivative4<T>(f: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    assert!(n >= 5);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = if i >= 2 && i + 2 < n {
            (f[i - 2] - f[i + 2] + (f[i + 1] - f[i - 1]) * 8.0) * (1.0 / (12.0 * h))
        } else if i < 2 {
            let b = i;
            one_sided_first(&[f[0], f[1], f[2], f[3], f[4]], b, h)
        } else {
            let b = 4 - (n - 1 - i);
            let s = [f[n - 5], f[n - 4], f[n - 3], f[n - 2], f[n - 1]];
            one_sided_first(&s, b, h)
        };
        d.push(v);
    }
    d
}

/// Second derivative by fourth-order differences (one-sided at the ends).
pub fn second_derivative4<T>(f: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    assert!(n >= 6);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = if i >= 2 && i + 2 < n {
            (f[i + 1] * 16.0 + f[i - 1] * 16.0 - f[i] * 30.0 - f[i + 2] - f[i - 2])
                * (1.0 / (12.0 * h * h))
        } else if i < 2 {
            one_sided_second(&[f[0], f[1], f[2], f[3], f[4], f[5]], i, h)
        } else {
            let b = 5 - (n - 1 - i);
            let s = [f[n - 6], f[n - 5], f[n - 4], f[n - 3], f[n - 2], f[n - 1]];
            one_sided_second(&s, b, h)
        };
        d.push(v);
    }
    d
}

fn lagrange_diff_weights(m: usize, at: usize, order: usize) -> Vec<f64> {
    // Fornberg's algorithm on integer nodes 0..m-1 evaluated at node `at`.
    let x0 = at as f64;
    let mut c = vec![vec![0.0; order + 1]; m];
    let mut c1 = 1.0;
    let mut c4 = -x0;
    c[0][0] = 1.0;
    for i in 1..m {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = i as f64 - x0;
        for j in 0..i {
            let c3 = i as f64 - j as f64;
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

fn one_sided_first<T>(s: &[T], at: usize, h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let w = lagrange_diff_weights(s.len(), at, 1);
    let mut acc = s[0] * (w[0] / h);
    for k in 1..s.len() {
        acc = acc + s[k] * (w[k] / h);
    }
    acc
}

fn one_sided_second<T>(s: &[T], at: usize, h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let w = lagrange_diff_weights(s.len(), at, 2);
    let mut acc = s[0] * (w[0] / (h * h));
    for k in 1..s.len() {
        acc = acc + s[k] * (w[k] / (h * h));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_weights_exact_on_cubics() {
        for n in [5usize, 6, 9, 10] {
            let h = 1.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let s: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
            assert!((s - 0.25).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let h = 0.01;
        let f: Vec<f64> = (0..301).map(|i| (i as f64 * h).cos()).collect();
        let c = cumulative(&f, h, 0.0);
        for i in [1usize, 2, 150, 299, 300] {
            assert!((c[i] - (i as f64 * h).sin()).abs() < 1e-9, "i={i} err={}", c[i] - (i as f64 * h).sin());
        }
    }

    #[test]
    fn differences_are_fourth_order() {
        let h = 0.01;
        let f: Vec<f64> = (0..200).map(|i| (i as f64 * h).sin()).collect();
        let d = derivative4(&f, h);
        let dd = second_derivative4(&f, h);
        for i in [0usize, 1, 100, 198, 199] {
            let x = i as f64 * h;
            assert!((d[i] - x.cos()).abs() < 1e-8, "d i={i}");
            assert!((dd[i] + x.sin()).abs() < 1e-5, "dd i={i}");
        }
    }

    #[test]
    fn simpson_halving_gaussian() {
        let (v, ok) = simpson_halving(|r| (-r * r).exp() * r * r, 0.0, 12.0, 1e-12);
        assert!(ok);
        assert!((v - std::f64::consts::PI.sqrt() / 4.0).abs() < 1e-12);
    }
}
