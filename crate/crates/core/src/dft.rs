//! The s-wave distorted Fourier transform, its inverse, the wave operator,
//! the diagonal linear propagator and dispersive-decay scans.

use crate::error::{DspecError, Result};
use crate::grid::{KGrid, RadialGrid};
use crate::potential::{eval_potential, RadialPotential};
use crate::radialwave::EigenfunctionTable;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// (2 pi)^{-3/2} 4 pi.
pub fn transform_constant() -> f64 {
    (2.0 / PI).sqrt()
}

/// A radial function on a RadialGrid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

impl ProfileGrid {
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F) -> Self {
        ProfileGrid { grid, values: grid.nodes().into_iter().map(f).collect() }
    }

    pub fn from_real<F: Fn(f64) -> f64>(grid: RadialGrid, f: F) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        ProfileGrid { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// L2 norm with weight 4 pi r^2 dr (trapezoid).
    pub fn l2(&self) -> f64 {
        let h = self.grid.h();
        let n = self.values.len();
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == n - 1 { 0.5 } else { 1.0 };
                w * v.norm_sqr() * (i as f64 * h).powi(2)
            })
            .sum();
        (4.0 * PI * s * h).sqrt()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// (4 pi \int |f|^p r^2 dr)^{1/p}.
    pub fn lp(&self, p: f64) -> f64 {
        let h = self.grid.h();
        let n = self.values.len();
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == n - 1 { 0.5 } else { 1.0 };
                w * v.norm().powf(p) * (i as f64 * h).powi(2)
            })
            .sum();
        (4.0 * PI * s * h).powf(1.0 / p)
    }

    pub fn sub(&self, other: &ProfileGrid) -> ProfileGrid {
        ProfileGrid { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    /// Fraction of the squared norm carried by r > 0.8 r_max.
    pub fn tail_mass(&self) -> f64 {
        let total = self.l2().powi(2);
        if total == 0.0 {
            return 0.0;
        }
        let cut = 0.8 * self.grid.r_max;
        let h = self.grid.h();
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as f64 * h > cut)
            .map(|(i, v)| v.norm_sqr() * (i as f64 * h).powi(2))
            .sum();
        4.0 * PI * s * h / total
    }
}

/// A radial function of kappa on a KGrid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub kgrid: KGrid,
    pub values: Vec<Complex64>,
}

impl SpectralProfile {
    pub fn from_fn<F: Fn(f64) -> Complex64>(kgrid: KGrid, f: F) -> Self {
        SpectralProfile { kgrid, values: kgrid.nodes().into_iter().map(f).collect() }
    }

    pub fn zeros(kgrid: KGrid) -> Self {
        SpectralProfile { kgrid, values: vec![Complex64::new(0.0, 0.0); kgrid.len()] }
    }

    /// L2 norm with weight 4 pi kappa^2 dkappa.
    pub fn l2(&self) -> f64 {
        weighted_l2(&self.kgrid, &self.values)
    }

    pub fn sub(&self, other: &SpectralProfile) -> SpectralProfile {
        SpectralProfile { kgrid: self.kgrid, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> SpectralProfile {
        SpectralProfile { kgrid: self.kgrid, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// max |g| over the top tenth of the grid relative to max |g|.
    pub fn tail_ratio(&self) -> f64 {
        let m = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        let start = n - (n / 10).max(1);
        self.values[start..].iter().map(|v| v.norm()).fold(0.0, f64::max) / m
    }
}

pub(crate) fn weighted_l2(kgrid: &KGrid, values: &[Complex64]) -> f64 {
    let w = kgrid.weights();
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(j, v)| w[j] * v.norm_sqr() * kgrid.kappa(j).powi(2))
        .sum();
    (4.0 * PI * s).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TransformWarning {
    TailMass(f64),
    SpectralTail(f64),
}

/// Real s-wave kernel u_0(kappa_j, r_i)/(kappa_j r_i) on an arbitrary radial grid.
#[derive(Debug, Clone)]
pub struct SWaveKernel {
    pub grid: RadialGrid,
    n_k: usize,
    data: Vec<f64>,
}

impl SWaveKernel {
    pub fn new(t: &EigenfunctionTable, grid: RadialGrid) -> Self {
        Self::from_waves(&t.s_waves, grid)
    }

    pub fn from_waves(waves: &[crate::radialwave::PartialWaveSolution], grid: RadialGrid) -> Self {
        let nodes = grid.nodes();
        let data = waves
            .par_iter()
            .flat_map_iter(|w| nodes.iter().map(move |&r| w.q_at(r) / w.kappa).collect::<Vec<_>>())
            .collect();
        SWaveKernel { grid, n_k: waves.len(), data }
    }

    /// The flat kernel j_0(kappa r).
    pub fn flat(kgrid: &KGrid, grid: RadialGrid) -> Self {
        let nodes = grid.nodes();
        let data = (0..kgrid.len())
            .into_par_iter()
            .flat_map_iter(|j| {
                let k = kgrid.kappa(j);
                nodes.iter().map(move |&r| if r == 0.0 { 1.0 } else { (k * r).sin() / (k * r) }).collect::<Vec<_>>()
            })
            .collect();
        SWaveKernel { grid, n_k: kgrid.len(), data }
    }

    fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[j * n..(j + 1) * n]
    }

    /// sum_i K_ji x_i
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let xr: Vec<f64> = x.iter().map(|v| v.re).collect();
        let xi: Vec<f64> = x.iter().map(|v| v.im).collect();
        (0..self.n_k)
            .into_par_iter()
            .map(|j| {
                let row = self.row(j);
                let mut a = 0.0;
                let mut b = 0.0;
                for ((k, r), i) in row.iter().zip(&xr).zip(&xi) {
                    a += k * r;
                    b += k * i;
                }
                Complex64::new(a, b)
            })
            .collect()
    }

    /// sum_j K_ji y_j
    fn apply_transpose(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let chunk = 512usize;
        let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let lo = c * chunk;
                let hi = ((c + 1) * chunk).min(n);
                let mut re = vec![0.0; hi - lo];
                let mut im = vec![0.0; hi - lo];
                for (j, yj) in y.iter().enumerate() {
                    if yj.re == 0.0 && yj.im == 0.0 {
                        continue;
                    }
                    let row = &self.row(j)[lo..hi];
                    for ((k, a), b) in row.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
                        *a += k * yj.re;
                        *b += k * yj.im;
                    }
                }
                (re, im)
            })
            .collect();
        let mut out = Vec::with_capacity(n);
        for (re, im) in parts {
            out.extend(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)));
        }
        out
    }
}

fn radial_weights(grid: &RadialGrid) -> Vec<f64> {
    let h = grid.h();
    let n = grid.len();
    (0..n)
        .map(|i| {
            let w = if i == n - 1 { 0.5 * h } else { h };
            w * (i as f64 * h).powi(2)
        })
        .collect()
}

fn phases(t: &EigenfunctionTable) -> Vec<Complex64> {
    t.s_waves.iter().map(|w| w.norm_factor()).collect()
}

fn check_grid(a: &RadialGrid, b: &RadialGrid) -> Result<()> {
    if a != b {
        return Err(DspecError::Config(format!("profile grid {a:?} does not match table grid {b:?}")));
    }
    Ok(())
}

/// Forward transform with an explicit kernel; the phase e^{-i delta_0} is
/// applied per node unless `flat`.
fn forward_kernel(t: &EigenfunctionTable, k: &SWaveKernel, f: &ProfileGrid, flat: bool) -> SpectralProfile {
    let w = radial_weights(&k.grid);
    let x: Vec<Complex64> = f.values.iter().zip(&w).map(|(v, w)| v * *w).collect();
    let mut out = k.apply(&x);
    let c = transform_constant();
    if flat {
        out.iter_mut().for_each(|v| *v *= c);
    } else {
        for (v, ph) in out.iter_mut().zip(phases(t)) {
            *v *= ph.conj() * c;
        }
    }
    SpectralProfile { kgrid: t.kgrid, values: out }
}

fn inverse_kernel(t: &EigenfunctionTable, k: &SWaveKernel, g: &SpectralProfile, flat: bool) -> ProfileGrid {
    let w = t.kgrid.weights();
    let c = transform_constant();
    let ph = phases(t);
    let y: Vec<Complex64> = (0..g.values.len())
        .map(|j| {
            let p = if flat { Complex64::new(1.0, 0.0) } else { ph[j] };
            g.values[j] * p * (w[j] * t.kgrid.kappa(j).powi(2) * c)
        })
        .collect();
    ProfileGrid { grid: k.grid, values: k.apply_transpose(&y) }
}

/// f~(kappa) = (2 pi)^{-3/2} 4 pi \int conj(phi_0(r,kappa)) f(r) r^2 dr.
pub fn forward_dft(t: &EigenfunctionTable, f: &ProfileGrid) -> Result<SpectralProfile> {
    Ok(forward_dft_checked(t, f)?.0)
}

pub fn forward_dft_checked(t: &EigenfunctionTable, f: &ProfileGrid) -> Result<(SpectralProfile, Vec<TransformWarning>)> {
    check_grid(&f.grid, &t.grid)?;
    let mut warnings = Vec::new();
    let tm = f.tail_mass();
    if tm > 1e-8 {
        warnings.push(TransformWarning::TailMass(tm));
    }
    Ok((forward_kernel(t, t.kernel(), f, false), warnings))
}

/// f(r) = (2 pi)^{-3/2} 4 pi \int phi_0(r,kappa) g(kappa) kappa^2 dkappa.
pub fn inverse_dft(t: &EigenfunctionTable, g: &SpectralProfile) -> Result<ProfileGrid> {
    Ok(inverse_dft_checked(t, g)?.0)
}

pub fn inverse_dft_checked(t: &EigenfunctionTable, g: &SpectralProfile) -> Result<(ProfileGrid, Vec<TransformWarning>)> {
    let mut warnings = Vec::new();
    let tr = g.tail_ratio();
    if tr > 1e-8 {
        warnings.push(TransformWarning::SpectralTail(tr));
    }
    Ok((inverse_kernel(t, t.kernel(), g, false), warnings))
}

/// Inverse transform onto a radial grid other than the table's.
pub fn inverse_dft_on(t: &EigenfunctionTable, k: &SWaveKernel, g: &SpectralProfile) -> ProfileGrid {
    inverse_kernel(t, k, g, false)
}

/// Forward transform of a field sampled on the kernel's grid.
pub fn forward_dft_on(t: &EigenfunctionTable, k: &SWaveKernel, f: &ProfileGrid) -> Result<SpectralProfile> {
    check_grid(&f.grid, &k.grid)?;
    Ok(forward_kernel(t, k, f, false))
}

/// Flat spherical transform sqrt(2/pi) (1/kappa) \int sin(kappa r) f(r) r dr on the table grids.
pub fn flat_forward(t: &EigenfunctionTable, f: &ProfileGrid) -> Result<SpectralProfile> {
    check_grid(&f.grid, &t.grid)?;
    Ok(forward_kernel(t, &SWaveKernel::flat(&t.kgrid, t.grid), f, true))
}

pub fn flat_inverse(t: &EigenfunctionTable, g: &SpectralProfile) -> ProfileGrid {
    inverse_kernel(t, &SWaveKernel::flat(&t.kgrid, t.grid), g, true)
}

/// -f'' - (2/r) f' + V f by second-order differences.
pub fn apply_h(p: &RadialPotential, f: &ProfileGrid) -> ProfileGrid {
    let h = f.grid.h();
    let v = &f.values;
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let r = i as f64 * h;
        let lap = if i == 0 {
            // f even in r: f'' (0) = 2 (f_1 - f_0)/h^2, and f''+2f'/r -> 3 f''(0)
            (v[1] - v[0]) * (6.0 / (h * h))
        } else if i == n - 1 {
            let d2 = (v[i] * 2.0 - v[i - 1] * 5.0 + v[i - 2] * 4.0 - v[i - 3]) / (h * h);
            let d1 = (v[i] * 3.0 - v[i - 1] * 4.0 + v[i - 2]) / (2.0 * h);
            d2 + d1 * (2.0 / r)
        } else {
            let d2 = (v[i + 1] - v[i] * 2.0 + v[i - 1]) / (h * h);
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
            d2 + d1 * (2.0 / r)
        };
        out.push(-lap + v[i] * eval_potential(p, r));
    }
    ProfileGrid { grid: f.grid, values: out }
}

/// e^{i time kappa^2} g and its inverse transform.
pub fn linear_propagate(t: &EigenfunctionTable, g: &SpectralProfile, time: f64) -> Result<(SpectralProfile, ProfileGrid)> {
    let s = propagate_spectral(g, time);
    let u = inverse_dft(t, &s)?;
    Ok((s, u))
}

pub fn propagate_spectral(g: &SpectralProfile, time: f64) -> SpectralProfile {
    SpectralProfile {
        kgrid: g.kgrid,
        values: g
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, time * g.kgrid.kappa(j).powi(2)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveDirection {
    Forward,
    Adjoint,
}

/// W = F~^{-1} F^ (forward) and W* = F^{-1} F~ (adjoint).
pub fn wave_operator_apply(t: &EigenfunctionTable, f: &ProfileGrid, direction: WaveDirection) -> Result<ProfileGrid> {
    match direction {
        WaveDirection::Forward => inverse_dft(t, &flat_forward(t, f)?),
        WaveDirection::Adjoint => Ok(flat_inverse(t, &forward_dft(t, f)?)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub sup_norm: f64,
    pub l6_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayScan {
    pub rows: Vec<DecayRow>,
    pub sup_exponent: f64,
    pub l6_exponent: f64,
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Propagates f linearly, records sup and L6 norms on `out_grid`, and fits
/// log-log slopes over the last half of the times.
pub fn decay_scan(t: &EigenfunctionTable, f: &ProfileGrid, times: &[f64], out_grid: RadialGrid) -> Result<DecayScan> {
    if times.len() < 5 {
        return Err(DspecError::WindowTooShort { got: times.len(), need: 5 });
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 2.0 || times[times.len() - 1] > 200.0 {
        return Err(DspecError::OutOfRange("decay times must increase within [2, 200]".into()));
    }
    let g = forward_dft(t, f)?;
    let kernel = SWaveKernel::new(t, out_grid);
    let rows: Vec<DecayRow> = times
        .iter()
        .map(|&time| {
            let u = inverse_dft_on(t, &kernel, &propagate_spectral(&g, time));
            DecayRow { t: time, sup_norm: u.sup(), l6_norm: u.lp(6.0) }
        })
        .collect();
    let half = rows.len() / 2;
    let tail = &rows[half..];
    let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let sup: Vec<f64> = tail.iter().map(|r| r.sup_norm).collect();
    let l6: Vec<f64> = tail.iter().map(|r| r.l6_norm).collect();
    Ok(DecayScan { sup_exponent: loglog_slope(&ts, &sup), l6_exponent: loglog_slope(&ts, &l6), rows })
}

/// Plancherel, round-trip and diagonalization residuals of the transform on
/// Gaussian profiles of the given widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSuite {
    pub plancherel_err: f64,
    pub roundtrip_err: f64,
    pub diag_err: f64,
}

pub fn transform_suite(t: &EigenfunctionTable, widths: &[f64]) -> Result<TransformSuite> {
    let mut out = TransformSuite { plancherel_err: 0.0, roundtrip_err: 0.0, diag_err: 0.0 };
    for &w in widths {
        let f = ProfileGrid::from_real(t.grid, |r| (-r * r / (2.0 * w * w)).exp());
        let g = forward_dft(t, &f)?;
        out.plancherel_err = out.plancherel_err.max((g.l2() - f.l2()).abs() / f.l2());
        let back = inverse_dft(t, &g)?;
        out.roundtrip_err = out.roundtrip_err.max(back.sub(&f).l2() / f.l2());
        let hg = forward_dft(t, &apply_h(&t.potential, &f))?;
        let k2g = SpectralProfile {
            kgrid: g.kgrid,
            values: g.values.iter().enumerate().map(|(j, v)| v * g.kgrid.kappa(j).powi(2)).collect(),
        };
        out.diag_err = out.diag_err.max(hg.sub(&k2g).l2() / k2g.l2());
    }
    Ok(out)
}


