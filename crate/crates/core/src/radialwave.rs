//! Partial waves, phase shifts and the assembled generalized eigenfunctions
//! psi(x,k), the remainder field psi_1 and its far-field limit g_0.

use crate::error::{DspecError, Result};
use crate::grid::{KGrid, RadialGrid};
use crate::potential::{eval_potential, RadialPotential};
use crate::quadrature::{cumulative, gl_panels};
use crate::special::{gauss_legendre, i_pow, lagrange6, legendre_array, sph_h_array, sph_j_array, sph_y_array};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest allowed h * kappa.
pub const RESOLUTION_LIMIT: f64 = 0.15;

/// Matching window length beyond r_cut.
pub fn matching_length(kappa: f64) -> f64 {
    4.0 / kappa.max(1.0)
}

/// Angular momentum cutoff ceil(kappa r_eff) + 8.
pub fn l_max_rule(p: &RadialPotential, kappa: f64) -> usize {
    (kappa * p.effective_range()).ceil() as usize + 8
}

/// Regular solution of -u'' + [l(l+1)/r^2 + V] u = kappa^2 u, normalized so
/// that u ~ sin(kappa r - l pi/2 + delta) in the free region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialWaveSolution {
    pub ell: usize,
    pub kappa: f64,
    pub phase_shift: f64,
    pub h: f64,
    /// u(r_i)/r_i on the numerical region, with the r -> 0 limit at i = 0.
    pub q: Vec<f64>,
    /// Beyond this radius u is evaluated from the Riccati-Bessel form.
    pub r_ext: f64,
    pub matching_residual: f64,
}

impl PartialWaveSolution {
    fn free(ell: usize, kappa: f64, h: f64) -> Self {
        PartialWaveSolution { ell, kappa, phase_shift: 0.0, h, q: Vec::new(), r_ext: 0.0, matching_residual: 0.0 }
    }

    pub fn norm_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase_shift)
    }

    /// u(r)/r.
    pub fn q_at(&self, r: f64) -> f64 {
        if r > self.r_ext || self.q.is_empty() {
            let z = self.kappa * r;
            if z == 0.0 {
                return if self.ell == 0 { self.kappa * self.phase_shift.cos() } else { 0.0 };
            }
            let mut j = vec![0.0; self.ell + 1];
            let mut y = vec![0.0; self.ell + 1];
            sph_j_array(self.ell, z, &mut j);
            sph_y_array(self.ell, z, &mut y);
            let (s, c) = self.phase_shift.sin_cos();
            return self.kappa * (j[self.ell] * c - y[self.ell] * s);
        }
        lagrange6(&self.q, self.h, r)
    }

    pub fn u_at(&self, r: f64) -> f64 {
        self.q_at(r) * r
    }

    /// e^{i delta} u on the nodes of `grid`.
    pub fn u_values(&self, grid: &RadialGrid) -> Vec<Complex64> {
        let nf = self.norm_factor();
        grid.nodes().iter().map(|&r| nf * self.u_at(r)).collect()
    }

    /// The scattered radial part S_l(r) = e^{i delta} u/(kappa r) - j_l(kappa r).
    pub fn scattered(&self, r: f64) -> Complex64 {
        scattered_all(std::slice::from_ref(self), r)[0]
    }
}

/// S_l(r) for a list of waves sharing one kappa (waves[l].ell == l).
pub fn scattered_all(waves: &[PartialWaveSolution], r: f64) -> Vec<Complex64> {
    let lmax = waves.iter().map(|w| w.ell).max().unwrap_or(0);
    let kappa = waves[0].kappa;
    let z = kappa * r;
    let mut out = vec![Complex64::new(0.0, 0.0); waves.len()];
    let exterior = waves.iter().all(|w| r > w.r_ext || w.q.is_empty());
    if exterior {
        if z == 0.0 {
            return out;
        }
        let mut h = vec![Complex64::new(0.0, 0.0); lmax + 1];
        sph_h_array(lmax, z, &mut h);
        for (o, w) in out.iter_mut().zip(waves) {
            let d = w.phase_shift;
            if d != 0.0 {
                *o = I * Complex64::from_polar(d.sin(), d) * h[w.ell];
            }
        }
        return out;
    }
    let mut j = vec![0.0; lmax + 1];
    sph_j_array(lmax, z, &mut j);
    for (o, w) in out.iter_mut().zip(waves) {
        *o = w.norm_factor() * (w.q_at(r) / kappa) - j[w.ell];
    }
    out
}

/// Tabulated V on the nodes of a uniform grid, shared by all waves.
pub struct PotentialSamples {
    pub h: f64,
    pub v: Vec<f64>,
}

impl PotentialSamples {
    pub fn new(p: &RadialPotential, h: f64, n: usize) -> Self {
        PotentialSamples { h, v: (0..=n).map(|i| eval_potential(p, i as f64 * h)).collect() }
    }
}

/// Checks the resolution and tail guards for one kappa.
pub fn check_guards(p: &RadialPotential, kappa: f64, grid: &RadialGrid) -> Result<()> {
    if !(kappa > 0.0) {
        return Err(DspecError::OutOfRange(format!("kappa must be positive, got {kappa}")));
    }
    let hk = grid.h() * kappa;
    if hk > RESOLUTION_LIMIT * (1.0 + 1e-12) {
        return Err(DspecError::Resolution { value: hk });
    }
    if !p.is_zero() {
        let needed = p.r_cut + matching_length(kappa);
        if grid.r_max < needed - 1e-12 {
            return Err(DspecError::TailNotFree { r_max: grid.r_max, needed });
        }
    }
    Ok(())
}

/// Solves one partial wave by Numerov integration and Riccati-Bessel matching.
pub fn solve_partial_wave(p: &RadialPotential, ell: usize, kappa: f64, grid: &RadialGrid) -> Result<PartialWaveSolution> {
    check_guards(p, kappa, grid)?;
    let h = grid.h();
    if p.is_zero() {
        return Ok(PartialWaveSolution::free(ell, kappa, h));
    }
    let n_b = ((p.r_cut + matching_length(kappa)) / h).ceil() as usize;
    let samples = PotentialSamples::new(p, h, n_b + 1);
    solve_with_samples(p, &samples, ell, kappa)
}

pub(crate) fn solve_with_samples(p: &RadialPotential, s: &PotentialSamples, ell: usize, kappa: f64) -> Result<PartialWaveSolution> {
    let h = s.h;
    let lm = matching_length(kappa);
    let n_b = ((p.r_cut + lm) / h).ceil() as usize;
    let n_a = ((p.r_cut + 0.5 * lm) / h).round() as usize;
    let n_c = ((p.r_cut + 0.75 * lm) / h).round() as usize;
    let k2 = kappa * kappa;
    let ll = (ell * (ell + 1)) as f64;
    let c = h * h / 12.0;
    let f = |i: usize| ll / ((i as f64 * h).powi(2)) + s.v[i] - k2;
    let mut u = vec![0.0f64; n_b + 1];
    // Series start r^{l+1}(1 + a2 r^2) up to the first node where h^2 F / 12 < 0.3,
    // keeping Numerov away from the centrifugal singularity.
    let a2 = (s.v[0] - k2) / (2.0 * (2 * ell + 3) as f64);
    let i_s = ((ll / 3.6).sqrt().ceil() as usize).max(1);
    for (i, ui) in u.iter_mut().enumerate().take(i_s + 1).skip(1) {
        let r = i as f64 * h;
        *ui = r.powi(ell as i32 + 1) * (1.0 + a2 * r * r);
    }
    let mut y_prev = if i_s == 1 {
        // (1 - cF) u at the origin is -c (F u)(0), nonzero only for l = 1
        if ell == 1 { -2.0 * c } else { 0.0 }
    } else {
        (1.0 - c * f(i_s - 1)) * u[i_s - 1]
    };
    let mut f_cur = f(i_s);
    let mut y_cur = (1.0 - c * f_cur) * u[i_s];
    for i in i_s..n_b {
        let y_next = 2.0 * y_cur - y_prev + h * h * f_cur * u[i];
        let f_next = f(i + 1);
        u[i + 1] = y_next / (1.0 - c * f_next);
        y_prev = y_cur;
        y_cur = y_next;
        f_cur = f_next;
    }
    let riccati = |i: usize| -> (f64, f64) {
        let r = i as f64 * h;
        let z = kappa * r;
        let mut j = vec![0.0; ell + 1];
        let mut y = vec![0.0; ell + 1];
        sph_j_array(ell, z, &mut j);
        sph_y_array(ell, z, &mut y);
        (z * j[ell], z * y[ell])
    };
    let (ja, ya) = riccati(n_a);
    let (jb, yb) = riccati(n_b);
    let det = ja * yb - jb * ya;
    let mut alpha = (u[n_a] * yb - u[n_b] * ya) / det;
    let mut beta = (ja * u[n_b] - jb * u[n_a]) / det;
    // signed amplitude keeps delta in (-pi/2, pi/2], where sin(delta) is exact
    let mut amp = alpha.hypot(beta);
    if alpha < 0.0 {
        alpha = -alpha;
        beta = -beta;
        amp = -amp;
    }
    let delta = (-beta).atan2(alpha);
    let (jc, yc) = riccati(n_c);
    let (sd, cd) = delta.sin_cos();
    let scale = u[n_a].abs().max(u[n_b].abs()).max(u[n_c].abs());
    let residual = (u[n_c] - amp * (jc * cd - yc * sd)).abs() / scale;
    if !(residual < 1e-6) {
        return Err(DspecError::MatchingResidual { ell, kappa, residual });
    }
    let mut q = Vec::with_capacity(n_b + 1);
    q.push(if ell == 0 { 1.0 / amp } else { 0.0 });
    for (i, ui) in u.iter().enumerate().skip(1) {
        q.push(ui / (amp * i as f64 * h));
    }
    Ok(PartialWaveSolution {
        ell,
        kappa,
        phase_shift: delta,
        h,
        q,
        r_ext: p.r_cut,
        matching_residual: residual,
    })
}

/// All partial waves l <= l_max at one kappa.
#[derive(Debug, Clone)]
pub struct ScatteringState {
    pub kappa: f64,
    pub waves: Vec<PartialWaveSolution>,
}

/// Trailing-term tolerance of the Legendre series.
pub const SERIES_TOL: f64 = 1e-5;

impl ScatteringState {
    pub fn new(p: &RadialPotential, kappa: f64, grid: &RadialGrid, l_max: usize) -> Result<Self> {
        check_guards(p, kappa, grid)?;
        let h = grid.h();
        let waves = if p.is_zero() {
            (0..=l_max).map(|l| PartialWaveSolution::free(l, kappa, h)).collect()
        } else {
            let n_b = ((p.r_cut + matching_length(kappa)) / h).ceil() as usize;
            let s = PotentialSamples::new(p, h, n_b + 1);
            (0..=l_max).map(|l| solve_with_samples(p, &s, l, kappa)).collect::<Result<Vec<_>>>()?
        };
        Ok(ScatteringState { kappa, waves })
    }

    pub fn l_max(&self) -> usize {
        self.waves.len() - 1
    }

    pub fn phase_shifts(&self) -> Vec<f64> {
        self.waves.iter().map(|w| w.phase_shift).collect()
    }

    /// (2l+1) i^l S_l(r), the Legendre coefficients of psi - e^{ik.x}.
    pub fn scattered_coefficients(&self, r: f64) -> Vec<Complex64> {
        scattered_all(&self.waves, r)
            .into_iter()
            .enumerate()
            .map(|(l, s)| s * i_pow(l as i64) * (2 * l + 1) as f64)
            .collect()
    }

    fn check_tail(&self, coeffs: &[Complex64], r: f64) -> Result<()> {
        let n = coeffs.len();
        let est: f64 = coeffs[n.saturating_sub(3)..].iter().map(|c| c.norm()).sum();
        if est > SERIES_TOL {
            return Err(DspecError::SeriesNotConverged { estimate: est, kappa: self.kappa, r });
        }
        Ok(())
    }

    /// psi(x,k) - e^{ik.x} at (r, c).
    pub fn scattered(&self, r: f64, c: f64) -> Result<Complex64> {
        let coeffs = self.scattered_coefficients(r);
        self.check_tail(&coeffs, r)?;
        let mut p = vec![0.0; coeffs.len()];
        legendre_array(coeffs.len() - 1, c, &mut p);
        Ok(coeffs.iter().zip(&p).map(|(a, b)| a * b).sum())
    }

    pub fn psi(&self, r: f64, c: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, self.kappa * r * c) + self.scattered(r, c)?)
    }

    /// Incoming eigenfunction psi_-(x,k), built with e^{-i delta}.
    pub fn psi_incoming(&self, r: f64, c: f64) -> Complex64 {
        let mut p = vec![0.0; self.waves.len()];
        legendre_array(self.waves.len() - 1, c, &mut p);
        let z = self.kappa * r;
        let lmax = self.l_max();
        let mut j = vec![0.0; lmax + 1];
        sph_j_array(lmax, z, &mut j);
        let mut acc = Complex64::from_polar(1.0, z * c);
        for (l, w) in self.waves.iter().enumerate() {
            let s = w.norm_factor().conj() * (w.q_at(r) / self.kappa) - j[l];
            acc += s * i_pow(l as i64) * ((2 * l + 1) as f64 * p[l]);
        }
        acc
    }

    /// Legendre coefficients of psi_1(r, .): psi_1 = sum_l Psi_l(r) P_l(c).
    pub fn psi1_coefficients(&self, r: f64) -> Vec<Complex64> {
        let f = Complex64::from_polar(-4.0 * PI * r, -self.kappa * r);
        self.scattered_coefficients(r).into_iter().map(|a| a * f).collect()
    }

    pub fn psi1(&self, r: f64, c: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(-4.0 * PI * r, -self.kappa * r) * self.scattered(r, c)?)
    }

    /// Far-field limit of psi_1 from the phase shifts:
    /// -(4 pi / kappa) sum (2l+1) e^{i delta} sin(delta) P_l(c).
    pub fn g0_series(&self, c: f64) -> Complex64 {
        let mut p = vec![0.0; self.waves.len()];
        legendre_array(self.waves.len() - 1, c, &mut p);
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, w) in self.waves.iter().enumerate() {
            let d = w.phase_shift;
            acc += Complex64::from_polar(d.sin(), d) * ((2 * l + 1) as f64 * p[l]);
        }
        acc * (-4.0 * PI / self.kappa)
    }
}

/// Phase shifts for l <= l_max on every KGrid node, the s-wave solutions,
/// and the real s-wave kernel u_0/(kappa r) on the radial nodes.
#[derive(Debug, Clone)]
pub struct EigenfunctionTable {
    pub potential: RadialPotential,
    pub grid: RadialGrid,
    pub kgrid: KGrid,
    pub l_max: usize,
    /// phase_shifts[l][j], unwrapped along kappa.
    pub phase_shifts: Vec<Vec<f64>>,
    pub s_waves: Vec<PartialWaveSolution>,
    kernel: crate::dft::SWaveKernel,
}

impl EigenfunctionTable {
    pub fn build(p: &RadialPotential, grid: RadialGrid, kgrid: KGrid, l_max: Option<usize>) -> Result<Self> {
        p.validate()?;
        validate_grids(p, &grid, &kgrid)?;
        let rule = l_max_rule(p, kgrid.kappa_max);
        let l_max = l_max.unwrap_or(rule);
        if l_max < rule {
            return Err(DspecError::Config(format!("l_max {l_max} is below the truncation rule {rule}")));
        }
        let h = grid.h();
        let n_b = ((p.r_cut + matching_length(kgrid.kappa_min)) / h).ceil() as usize;
        let samples = if p.is_zero() { None } else { Some(PotentialSamples::new(p, h, n_b + 1)) };
        let per_kappa: Vec<Vec<PartialWaveSolution>> = (0..kgrid.len())
            .into_par_iter()
            .map(|j| {
                let kappa = kgrid.kappa(j);
                (0..=l_max)
                    .map(|l| match &samples {
                        None => Ok(PartialWaveSolution::free(l, kappa, h)),
                        Some(s) => solve_with_samples(p, s, l, kappa),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut phase_shifts = vec![vec![0.0; kgrid.len()]; l_max + 1];
        let mut s_waves: Vec<PartialWaveSolution> = Vec::with_capacity(kgrid.len());
        for (j, waves) in per_kappa.into_iter().enumerate() {
            for (l, w) in waves.iter().enumerate() {
                phase_shifts[l][j] = w.phase_shift;
            }
            s_waves.push(waves.into_iter().next().unwrap());
        }
        // unwrap from the high-energy end where delta -> 0; the waves keep
        // their principal branch, which leaves e^{i delta} u unchanged
        let n = kgrid.len();
        for row in phase_shifts.iter_mut() {
            for j in (0..n.saturating_sub(1)).rev() {
                let jump = ((row[j + 1] - row[j]) / PI).round();
                row[j] += jump * PI;
            }
        }
        Ok(Self::assemble(*p, grid, kgrid, l_max, phase_shifts, s_waves))
    }

    pub(crate) fn assemble(
        potential: RadialPotential,
        grid: RadialGrid,
        kgrid: KGrid,
        l_max: usize,
        phase_shifts: Vec<Vec<f64>>,
        s_waves: Vec<PartialWaveSolution>,
    ) -> Self {
        let kernel = crate::dft::SWaveKernel::from_waves(&s_waves, grid);
        EigenfunctionTable { potential, grid, kgrid, l_max, phase_shifts, s_waves, kernel }
    }

    /// u_0(kappa_j, r_i)/(kappa_j r_i) on the table nodes.
    pub fn kernel(&self) -> &crate::dft::SWaveKernel {
        &self.kernel
    }

    /// Scattering state at an arbitrary kappa, l <= ceil(kappa r_eff) + 8.
    pub fn state(&self, kappa: f64) -> Result<ScatteringState> {
        ScatteringState::new(&self.potential, kappa, &self.grid, l_max_rule(&self.potential, kappa))
    }

    pub fn phase_shift(&self, ell: usize, j: usize) -> f64 {
        self.phase_shifts[ell][j]
    }
}

/// Checks the grid pairing guards shared by tables and configs.
pub fn validate_grids(p: &RadialPotential, grid: &RadialGrid, kgrid: &KGrid) -> Result<()> {
    if grid.n_points < 8 || !(grid.r_max > 0.0) {
        return Err(DspecError::Config("radial grid needs r_max > 0 and at least 8 points".into()));
    }
    if kgrid.n_points < 2 || !(kgrid.kappa_min > 0.0) || kgrid.kappa_max <= kgrid.kappa_min {
        return Err(DspecError::Config("kgrid needs 0 < kappa_min < kappa_max and 2+ points".into()));
    }
    check_guards(p, kgrid.kappa_max, grid)?;
    check_guards(p, kgrid.kappa_min, grid)?;
    Ok(())
}

/// psi(x,k) at (r, c, kappa) from freshly solved partial waves.
pub fn assemble_eigenfunction(t: &EigenfunctionTable, r: f64, c: f64, kappa: f64) -> Result<Complex64> {
    check_point(t, r, c)?;
    t.state(kappa)?.psi(r, c)
}

fn check_point(t: &EigenfunctionTable, r: f64, c: f64) -> Result<()> {
    if !(0.0..=t.grid.r_max).contains(&r) || !(-1.0..=1.0).contains(&c) {
        return Err(DspecError::OutOfRange(format!("(r, c) = ({r}, {c}) outside the table")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi1Sample {
    pub r: f64,
    pub c: f64,
    pub kappa: f64,
    pub value: Complex64,
}

/// psi_1 = -4 pi r e^{-i kappa r} (psi - e^{ik.x}).
pub fn extract_psi1(t: &EigenfunctionTable, r: f64, c: f64, kappa: f64) -> Result<Psi1Sample> {
    if !(r > 0.0) {
        return Err(DspecError::OutOfRange("extract_psi1 needs r > 0".into()));
    }
    let value = t.state(kappa)?.psi1(r, c)?;
    Ok(Psi1Sample { r, c, kappa, value })
}

/// Tabulated far-field symbol g_0(c, kappa).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolCoefficient {
    pub order: usize,
    pub cs: Vec<f64>,
    pub kappas: Vec<f64>,
    /// values[k][c]
    pub values: Vec<Vec<Complex64>>,
    pub class_order: usize,
}

/// g_0 on a (c, kappa) table from the phase-shift series.
pub fn symbol_g0_table(t: &EigenfunctionTable, cs: &[f64], kappas: &[f64]) -> Result<SymbolCoefficient> {
    let values = kappas
        .iter()
        .map(|&k| {
            let s = t.state(k)?;
            Ok(cs.iter().map(|&c| s.g0_series(c)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolCoefficient { order: 0, cs: cs.to_vec(), kappas: kappas.to_vec(), values, class_order: 0 })
}

/// \int rho^2 V(rho) \int dt \int dphi e^{s i kappa rho (c t + sqrt(1-c^2) sqrt(1-t^2) cos phi)} f(rho, t)
/// by Gauss-Legendre in rho and t and the trapezoid rule in phi.
pub fn g0_quadrature<F>(p: &RadialPotential, kappa: f64, c: f64, sign: f64, fine: bool, f: F) -> Complex64
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let r_top = p.effective_range();
    let width = if fine { 0.125 } else { 0.25 } / kappa.max(1.0);
    let panels = (r_top / width).ceil() as usize;
    let (rho, wr) = gl_panels(0.0, r_top, panels, 10);
    let bw = (kappa * r_top).ceil() as usize;
    let n_t = bw + if fine { 40 } else { 30 };
    let (t, wt) = gauss_legendre(n_t);
    let n_phi = bw + if fine { 40 } else { 30 };
    let sc = (1.0 - c * c).max(0.0).sqrt();
    let cosphi: Vec<f64> = (0..n_phi).map(|k| (2.0 * PI * k as f64 / n_phi as f64).cos()).collect();
    let wphi = 2.0 * PI / n_phi as f64;
    rho.par_iter()
        .zip(wr.par_iter())
        .map(|(&rr, &w)| {
            let v = eval_potential(p, rr);
            if v == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (ti, wti) in t.iter().zip(&wt) {
                let st = (1.0 - ti * ti).max(0.0).sqrt();
                let mut ang = Complex64::new(0.0, 0.0);
                for cp in &cosphi {
                    ang += Complex64::from_polar(1.0, sign * kappa * rr * (c * ti + sc * st * cp));
                }
                acc += ang * wphi * f(rr, *ti) * *wti;
            }
            acc * (w * rr * rr * v)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// g_0(omega, k) = \int e^{-i kappa omega.y} V(y) psi(y,k) dy, omega.k^ = c, by direct
/// quadrature; g_0 is the large-r limit of psi_1.
pub fn extract_g0(p: &RadialPotential, t: &EigenfunctionTable, c: f64, kappa: f64) -> Result<Complex64> {
    if p.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let state = ScatteringState::new(p, kappa, &t.grid, l_max_rule(p, kappa))?;
    let f = |rho: f64, tt: f64| state.psi(rho, tt).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let coarse = g0_quadrature(p, kappa, c, -1.0, false, f);
    let fine = g0_quadrature(p, kappa, c, -1.0, true, f);
    let dis = (fine - coarse).norm() / fine.norm().max(1e-300);
    if !(dis <= 1e-6) {
        return Err(DspecError::QuadratureStalled { disagreement: dis });
    }
    Ok(fine)
}

/// Radial Lippmann-Schwinger map for one partial wave:
/// R -> j_l - i kappa \int j_l(kappa r<) h_l(kappa r>) V R rho^2 d rho, on a
/// uniform grid of [0, r_top]; returns the cumulative integrals used to
/// evaluate the map anywhere.
struct RadialGreen {
    h: f64,
    j: Vec<f64>,
    hk: Vec<Complex64>,
    /// \int_0^rho j V R rho'^2
    inner: Vec<Complex64>,
    /// \int_rho^top h V R rho'^2
    outer: Vec<Complex64>,
}

impl RadialGreen {
    fn new(ell: usize, kappa: f64, v: &[f64], h: f64, r: &[Complex64]) -> Self {
        let n = v.len();
        let mut jv = vec![0.0; n];
        let mut hv = vec![Complex64::new(0.0, 0.0); n];
        let mut jb = vec![0.0; ell + 1];
        let mut hb = vec![Complex64::new(0.0, 0.0); ell + 1];
        for i in 0..n {
            let z = kappa * i as f64 * h;
            sph_j_array(ell, z, &mut jb);
            jv[i] = jb[ell];
            if i > 0 {
                sph_h_array(ell, z, &mut hb);
                hv[i] = hb[ell];
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        let fj: Vec<Complex64> = (0..n).map(|i| r[i] * (jv[i] * v[i] * (i as f64 * h).powi(2))).collect();
        let fh: Vec<Complex64> = (0..n)
            .map(|i| if i == 0 { zero } else { hv[i] * r[i] * (v[i] * (i as f64 * h).powi(2)) })
            .collect();
        let inner = cumulative(&fj, h, zero);
        // accumulate from the top so the irregular blow-up near the origin stays local
        let rev: Vec<Complex64> = fh.iter().rev().copied().collect();
        let mut outer = cumulative(&rev, h, zero);
        outer.reverse();
        RadialGreen { h, j: jv, hk: hv, inner, outer }
    }

    /// Applies the map on the grid nodes.
    fn on_nodes(&self, kappa: f64) -> Vec<Complex64> {
        (0..self.j.len())
            .map(|i| {
                let g = if i == 0 { self.j[0] * self.outer[0] } else { self.hk[i] * self.inner[i] + self.j[i] * self.outer[i] };
                self.j[i] - I * kappa * g
            })
            .collect()
    }

    /// The integral term i kappa [...] at an arbitrary radius.
    fn integral_at(&self, ell: usize, kappa: f64, r: f64) -> Complex64 {
        let n = self.j.len();
        let top = (n - 1) as f64 * self.h;
        let (a, b) = if r >= top {
            (self.inner[n - 1], Complex64::new(0.0, 0.0))
        } else {
            (lagrange6(&self.inner, self.h, r), lagrange6(&self.outer, self.h, r))
        };
        let z = kappa * r;
        let mut jb = vec![0.0; ell + 1];
        sph_j_array(ell, z, &mut jb);
        if z == 0.0 {
            return I * kappa * (b * jb[ell]);
        }
        let mut hb = vec![Complex64::new(0.0, 0.0); ell + 1];
        sph_h_array(ell, z, &mut hb);
        I * kappa * (hb[ell] * a + b * jb[ell])
    }
}

fn born_once(p: &RadialPotential, r: f64, c: f64, kappa: f64, order: usize, h: f64) -> Complex64 {
    let top = p.effective_range();
    let n = (top / h).ceil() as usize;
    let h = top / n as f64;
    let v: Vec<f64> = (0..=n).map(|i| eval_potential(p, i as f64 * h)).collect();
    let lmax = l_max_rule(p, kappa) + 2;
    let mut pl = vec![0.0; lmax + 1];
    legendre_array(lmax, c, &mut pl);
    let mut jr = vec![0.0; lmax + 1];
    sph_j_array(lmax, kappa * r, &mut jr);
    let mut acc = Complex64::from_polar(1.0, kappa * r * c);
    for l in 0..=lmax {
        let mut rad: Vec<Complex64> = {
            let mut jb = vec![0.0; l + 1];
            (0..=n)
                .map(|i| {
                    sph_j_array(l, kappa * i as f64 * h, &mut jb);
                    Complex64::new(jb[l], 0.0)
                })
                .collect()
        };
        if order == 0 {
            break;
        }
        for _ in 1..order {
            rad = RadialGreen::new(l, kappa, &v, h, &rad).on_nodes(kappa);
        }
        let g = RadialGreen::new(l, kappa, &v, h, &rad);
        let r_l = Complex64::new(jr[l], 0.0) - g.integral_at(l, kappa, r);
        acc += (r_l - jr[l]) * i_pow(l as i64) * ((2 * l + 1) as f64 * pl[l]);
    }
    acc
}

/// Born iterate psi^order of the Lippmann-Schwinger equation, from the
/// partial-wave expansion of the outgoing free Green's function.
pub fn born_eigenfunction(p: &RadialPotential, r: f64, c: f64, kappa: f64, order: usize) -> Result<Complex64> {
    if order > 2 {
        return Err(DspecError::OutOfRange("born order must be <= 2".into()));
    }
    if p.is_zero() || order == 0 {
        return Ok(Complex64::from_polar(1.0, kappa * r * c));
    }
    let h = (0.02f64).min(0.1 / kappa);
    let coarse = born_once(p, r, c, kappa, order, h);
    let fine = born_once(p, r, c, kappa, order, 0.5 * h);
    let dis = (fine - coarse).norm() / fine.norm().max(1e-300);
    if dis > 1e-4 {
        return Err(DspecError::QuadratureStalled { disagreement: dis });
    }
    Ok(fine)
}

/// Max over samples of |psi - (e^{ik.x} - R_0 V psi)| / max(|psi|, 1), with the
/// assembled psi inserted inside the integral after numerical Legendre projection.
pub fn lippmann_schwinger_residual(t: &EigenfunctionTable, samples: &[(f64, f64, f64)]) -> Result<f64> {
    let p = t.potential;
    let mut worst = 0.0f64;
    for &(r, c, kappa) in samples {
        check_point(t, r, c)?;
        if p.is_zero() {
            continue;
        }
        let state = t.state(kappa)?;
        let res = ls_residual_for_state(&p, &state, r, c)?;
        worst = worst.max(res);
    }
    Ok(worst)
}

pub(crate) fn ls_residual_for_state(p: &RadialPotential, state: &ScatteringState, r: f64, c: f64) -> Result<f64> {
    let kappa = state.kappa;
    let top = p.effective_range();
    let hb = (0.0025f64).min(0.0125 / kappa);
    let n = (top / hb).ceil() as usize;
    let hb = top / n as f64;
    let v: Vec<f64> = (0..=n).map(|i| eval_potential(p, i as f64 * hb)).collect();
    let lmax = state.l_max() + 6;
    let n_t = lmax + (kappa * top).ceil() as usize + 30;
    let (tn, tw) = gauss_legendre(n_t);
    let pls: Vec<Vec<f64>> = tn
        .iter()
        .map(|&x| {
            let mut pl = vec![0.0; lmax + 1];
            legendre_array(lmax, x, &mut pl);
            pl
        })
        .collect();
    // R_l(rho) = (1 / 2 i^l) \int psi(rho, t) P_l(t) dt
    let mut radial = vec![vec![Complex64::new(0.0, 0.0); n + 1]; lmax + 1];
    let rows: Vec<Vec<Complex64>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let rho = i as f64 * hb;
            let mut out = vec![Complex64::new(0.0, 0.0); lmax + 1];
            let coeffs = state.scattered_coefficients(rho);
            for (k, &x) in tn.iter().enumerate() {
                let mut psi = Complex64::from_polar(1.0, kappa * rho * x);
                for (l, a) in coeffs.iter().enumerate() {
                    psi += a * pls[k][l];
                }
                for l in 0..=lmax {
                    out[l] += psi * (tw[k] * pls[k][l]);
                }
            }
            out
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for l in 0..=lmax {
            radial[l][i] = row[l] / (i_pow(l as i64) * 2.0);
        }
    }
    let mut pl = vec![0.0; lmax + 1];
    legendre_array(lmax, c, &mut pl);
    let mut rhs = Complex64::from_polar(1.0, kappa * r * c);
    for l in 0..=lmax {
        let g = RadialGreen::new(l, kappa, &v, hb, &radial[l]);
        rhs -= g.integral_at(l, kappa, r) * i_pow(l as i64) * ((2 * l + 1) as f64 * pl[l]);
    }
    let lhs = state.psi(r, c)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi1Bounds {
    pub sup_psi1: f64,
    pub sup_dc_psi1_over_bracket_kappa: f64,
}

/// Sup of |psi_1| and of |d_c psi_1| / <kappa> over a sample table.
pub fn psi1_bounds(t: &EigenfunctionTable, rs: &[f64], cs: &[f64], kappas: &[f64]) -> Result<Psi1Bounds> {
    let mut sup = 0.0f64;
    let mut sup_d = 0.0f64;
    let dc = 1e-4;
    for &k in kappas {
        let s = t.state(k)?;
        for &r in rs {
            for &c in cs {
                let v = s.psi1(r, c)?;
                sup = sup.max(v.norm());
                let (a, b) = ((c - dc).max(-1.0), (c + dc).min(1.0));
                let d = (s.psi1(r, b)? - s.psi1(r, a)?) / (b - a);
                sup_d = sup_d.max(d.norm() / (1.0 + k * k).sqrt());
            }
        }
    }
    Ok(Psi1Bounds { sup_psi1: sup, sup_dc_psi1_over_bracket_kappa: sup_d })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerov_free_s_wave() {
        // the integrator on the free equation, bypassing the zero-potential shortcut
        let p = RadialPotential::gaussian(1e-300, 1.0, 5.0);
        let g = RadialGrid::new(20.0, 2000);
        let w = solve_partial_wave(&p, 0, 1.0, &g).unwrap();
        assert!(w.phase_shift.abs() < 1e-8, "delta = {}", w.phase_shift);
        for &r in &[0.5, 2.0, 4.9] {
            assert!((w.u_at(r) - r.sin()).abs() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn numerov_free_p_wave() {
        let p = RadialPotential::gaussian(1e-300, 1.0, 5.0);
        let g = RadialGrid::new(20.0, 4000);
        let w = solve_partial_wave(&p, 1, 2.0, &g).unwrap();
        assert!(w.phase_shift.abs() < 1e-9);
        for &r in &[0.3, 1.7, 4.0] {
            let exact = 2.0 * r * sph_j_array_single(1, 2.0 * r);
            assert!((w.u_at(r) - exact).abs() < 1e-8);
        }
    }

    fn sph_j_array_single(l: usize, z: f64) -> f64 {
        crate::special::sph_j(l, z)
    }

    #[test]
    fn guards() {
        let p = RadialPotential::default();
        assert!(matches!(
            solve_partial_wave(&p, 0, 1.0, &RadialGrid::new(14.0, 1400)),
            Err(DspecError::TailNotFree { .. })
        ));
        assert!(matches!(
            solve_partial_wave(&p, 0, 10.0, &RadialGrid::new(20.0, 1000)),
            Err(DspecError::Resolution { .. })
        ));
    }
}
