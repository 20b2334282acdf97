//! Time integration of i u_t + H u = u² for radial data.
//!
//! Two independent solvers share the distorted transform: RK4 on the profile
//! equation ∂_t f̃ = -i e^{-itκ²} F̃[(F̃⁻¹ e^{itκ²} f̃)²] and Strang splitting with
//! the exact pointwise nonlinear flow u ↦ u/(1 + iτu).

use crate::cutoff::phi;
use crate::dft::{forward_dft, forward_dft_on, inverse_dft_on, loglog_slope, propagate_spectral, ProfileGrid, SWaveKernel, SpectralProfile};
use crate::error::{DspecError, Result};
use crate::grid::RadialGrid;
use crate::potential::detect_bound_states;
use crate::quadrature::derivative4;
use crate::radialwave::EigenfunctionTable;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DuhamelRk4,
    SplitStepStrang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub eps0: f64,
    pub dt: f64,
    pub t_final: f64,
    pub method: Method,
    pub delta_n: f64,
    /// Exponent of the Sobolev proxy ‖⟨κ⟩^s f̃‖₂.
    pub sobolev_s: f64,
    pub hf_truncation: bool,
    /// Diagnostic switches; both on for the actual equation.
    pub nonlinear: bool,
    pub linear: bool,
    /// Time between snapshots and norm rows.
    pub snapshot_every: f64,
    /// Radius of the grid carrying the physical field (the table grid when None).
    pub field_r_max: Option<f64>,
    /// Width of the Gaussian initial data.
    pub data_width: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            eps0: 0.01,
            dt: 0.05,
            t_final: 50.0,
            method: Method::DuhamelRk4,
            delta_n: 0.1,
            sobolev_s: 4.0,
            hf_truncation: false,
            nonlinear: true,
            linear: true,
            snapshot_every: 1.0,
            field_r_max: Some(80.0),
            data_width: 4.5,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self, t: &EigenfunctionTable) -> Result<()> {
        let bad = |m: String| Err(DspecError::Config(m));
        if !(self.eps0 > 0.0) || self.eps0 > 0.05 {
            return bad(format!("eps0 = {} outside the small-data range (0, 0.05]", self.eps0));
        }
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) {
            return bad("dt must be positive and t_final nonnegative".into());
        }
        let k = t.kgrid.kappa_max;
        if self.dt * k * k > 0.5 {
            return bad(format!("phase-resolution guard: dt kappa_max^2 = {} > 0.5", self.dt * k * k));
        }
        if !(self.delta_n > 0.0 && self.delta_n < 0.25) {
            return bad(format!("delta_n = {} outside (0, 1/4)", self.delta_n));
        }
        if !(self.data_width > 0.0) {
            return bad("data_width must be positive".into());
        }
        if !(self.snapshot_every > 0.0) {
            return bad("snapshot_every must be positive".into());
        }
        Ok(())
    }
}

/// Norms of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    pub sobolev: f64,
    pub w1: f64,
    pub w2: f64,
    pub sup_u: f64,
    pub l6_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTrace {
    pub rows: Vec<NormRow>,
    /// Log-log slope of sup_u over the second half of the run.
    pub sup_decay_exponent: f64,
}

impl NormTrace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: EvolveConfig,
    pub snapshots: Vec<(f64, SpectralProfile)>,
    pub norm_trace: NormTrace,
}

impl Trajectory {
    pub fn final_profile(&self) -> &SpectralProfile {
        &self.snapshots.last().expect("trajectory has at least the initial snapshot").1
    }
}

/// u₀(r) = eps0 exp(-r²/(2 width²)) on the table grid.
pub fn gaussian_data(t: &EigenfunctionTable, eps0: f64, width: f64) -> ProfileGrid {
    ProfileGrid::from_real(t.grid, |r| eps0 * (-r * r / (2.0 * width * width)).exp())
}

/// `gaussian_data` with the configured amplitude and width.
pub fn initial_data(t: &EigenfunctionTable, cfg: &EvolveConfig) -> ProfileGrid {
    gaussian_data(t, cfg.eps0, cfg.data_width)
}

/// Free dispersion time width²/2 of the Gaussian data.
pub fn dispersive_time(cfg: &EvolveConfig) -> f64 {
    cfg.data_width * cfg.data_width / 2.0
}

/// Exact solution of i u_t = u² after time τ, pointwise.
pub fn nonlinear_substep(u: &mut [Complex64], tau: f64) -> Result<()> {
    let i = Complex64::new(0.0, 1.0);
    for v in u.iter_mut() {
        let d = 1.0 + i * tau * *v;
        if d.norm() < 1e-6 {
            return Err(DspecError::NonlinearPole { value: d.norm() });
        }
        *v /= d;
    }
    Ok(())
}

struct Solver<'a> {
    t: &'a EigenfunctionTable,
    cfg: &'a EvolveConfig,
    kernel: SWaveKernel,
}

impl<'a> Solver<'a> {
    fn new(t: &'a EigenfunctionTable, cfg: &'a EvolveConfig) -> Self {
        let grid = match cfg.field_r_max {
            Some(r) if r > t.grid.r_max => RadialGrid::with_spacing(r, t.grid.h()),
            _ => t.grid,
        };
        let kernel = if grid == t.grid { t.kernel().clone() } else { SWaveKernel::new(t, grid) };
        Solver { t, cfg, kernel }
    }

    fn field(&self, u_tilde: &SpectralProfile) -> ProfileGrid {
        inverse_dft_on(self.t, &self.kernel, u_tilde)
    }

    fn forward(&self, u: &ProfileGrid) -> SpectralProfile {
        forward_dft_on(self.t, &self.kernel, u).expect("field lives on the kernel grid")
    }

    fn hf_factor(&self, time: f64) -> Vec<f64> {
        let kg = self.t.kgrid;
        let scale = (1.0 + time * time).sqrt().powf(self.cfg.delta_n);
        (0..kg.len()).map(|j| if self.cfg.hf_truncation { phi(kg.kappa(j) / scale) } else { 1.0 }).collect()
    }

    fn phase(&self, time: f64) -> f64 {
        if self.cfg.linear {
            time
        } else {
            0.0
        }
    }

    /// -i e^{-itκ²} F̃[u²] with u = F̃⁻¹ e^{itκ²} f̃.
    fn rhs(&self, time: f64, f: &SpectralProfile) -> SpectralProfile {
        let s = self.phase(time);
        let u = self.field(&propagate_spectral(f, s));
        let sq = ProfileGrid { grid: u.grid, values: u.values.iter().map(|v| v * v).collect() };
        let n = propagate_spectral(&self.forward(&sq), -s);
        let hf = self.hf_factor(time);
        let mi = Complex64::new(0.0, -1.0);
        SpectralProfile { kgrid: n.kgrid, values: n.values.iter().zip(&hf).map(|(v, w)| v * mi * *w).collect() }
    }

    fn row(&self, time: f64, f: &SpectralProfile) -> NormRow {
        let u = self.field(&propagate_spectral(f, self.phase(time)));
        let (sobolev, w1, w2) = spectral_norms(f, self.cfg.sobolev_s);
        NormRow { t: time, sobolev, w1, w2, sup_u: u.sup(), l6_u: u.lp(6.0) }
    }

    fn rk4_step(&self, time: f64, f: &SpectralProfile, dt: f64) -> SpectralProfile {
        let add = |a: &SpectralProfile, b: &SpectralProfile, c: f64| SpectralProfile {
            kgrid: a.kgrid,
            values: a.values.iter().zip(&b.values).map(|(x, y)| x + y * c).collect(),
        };
        let k1 = self.rhs(time, f);
        let k2 = self.rhs(time + dt / 2.0, &add(f, &k1, dt / 2.0));
        let k3 = self.rhs(time + dt / 2.0, &add(f, &k2, dt / 2.0));
        let k4 = self.rhs(time + dt, &add(f, &k3, dt));
        let values = (0..f.values.len())
            .map(|j| f.values[j] + (k1.values[j] + (k2.values[j] + k3.values[j]) * 2.0 + k4.values[j]) * (dt / 6.0))
            .collect();
        SpectralProfile { kgrid: f.kgrid, values }
    }

    /// Half nonlinear, full linear, half nonlinear on ũ = e^{itκ²} f̃; the
    /// nonlinear substeps act on the field and return their increment.
    fn strang_step(&self, time: f64, u_tilde: &SpectralProfile, dt: f64) -> Result<SpectralProfile> {
        let half = |g: &SpectralProfile, at: f64| -> Result<SpectralProfile> {
            if !self.cfg.nonlinear {
                return Ok(g.clone());
            }
            let u = self.field(g);
            let mut v = u.values.clone();
            nonlinear_substep(&mut v, dt / 2.0)?;
            let delta = ProfileGrid { grid: u.grid, values: v.iter().zip(&u.values).map(|(a, b)| a - b).collect() };
            let d = self.forward(&delta);
            let hf = self.hf_factor(at);
            Ok(SpectralProfile { kgrid: g.kgrid, values: g.values.iter().zip(&d.values).zip(&hf).map(|((x, y), w)| x + y * *w).collect() })
        };
        let a = half(u_tilde, time)?;
        let b = if self.cfg.linear { propagate_spectral(&a, dt) } else { a };
        half(&b, time + dt)
    }
}

/// Sobolev proxy ‖⟨κ⟩^s f̃‖₂, w1 = ‖∂_κ f̃‖₂ and w2 = (∫(|f̃″|² + 2|f̃′/κ|²) 4πκ² dκ)^{1/2}.
pub fn spectral_norms(f: &SpectralProfile, s: f64) -> (f64, f64, f64) {
    let kg = f.kgrid;
    let w = kg.weights();
    let dk = kg.dk();
    let d1 = derivative4(&f.values, dk);
    let d2 = derivative4(&d1, dk);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for j in 0..f.values.len() {
        let k = kg.kappa(j);
        let m = w[j] * 4.0 * PI * k * k;
        a += m * (1.0 + k * k).powf(s) * f.values[j].norm_sqr();
        b += m * d1[j].norm_sqr();
        if k > 0.0 {
            c += m * (d2[j].norm_sqr() + 2.0 * (d1[j] / k).norm_sqr());
        }
    }
    (a.sqrt(), b.sqrt(), c.sqrt())
}

/// Norm row of a profile at time `time` on the table grid.
pub fn norm_trace_update(t: &EigenfunctionTable, f: &SpectralProfile, time: f64, cfg: &EvolveConfig) -> NormRow {
    let plain = EvolveConfig { field_r_max: None, ..cfg.clone() };
    Solver::new(t, &plain).row(time, f)
}

fn refuse_non_generic(t: &EigenfunctionTable) -> Result<()> {
    let d = detect_bound_states(&t.potential, t.l_max.min(4), &t.grid);
    if !d.is_generic {
        return Err(DspecError::BoundStatesPresent { counts: d.bound_state_counts, slope: d.s_wave_zero_energy_slope });
    }
    Ok(())
}

fn sup_exponent(rows: &[NormRow], t_final: f64) -> f64 {
    let late: Vec<&NormRow> = rows.iter().filter(|r| r.t >= t_final / 2.0 && r.t > 0.0 && r.sup_u > 0.0).collect();
    if late.len() < 2 {
        return f64::NAN;
    }
    let x: Vec<f64> = late.iter().map(|r| r.t).collect();
    let y: Vec<f64> = late.iter().map(|r| r.sup_u).collect();
    loglog_slope(&x, &y)
}

fn run(t: &EigenfunctionTable, u0: &ProfileGrid, cfg: &EvolveConfig, method: Method) -> Result<Trajectory> {
    cfg.validate(t)?;
    refuse_non_generic(t)?;
    let solver = Solver::new(t, cfg);
    let f0 = forward_dft(t, u0)?;
    let n0 = f0.l2();
    let steps = (cfg.t_final / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let every = ((cfg.snapshot_every / cfg.dt).round() as usize).max(1);
    let mut snapshots = vec![(0.0, f0.clone())];
    let mut rows = vec![solver.row(0.0, &f0)];
    // Duhamel state is the profile f̃, Strang state is ũ = e^{itκ²} f̃
    let mut state = f0.clone();
    let mut time = 0.0;
    for n in 0..steps {
        let dt = (cfg.t_final - time).min(cfg.dt);
        state = match method {
            Method::DuhamelRk4 => {
                if cfg.nonlinear {
                    solver.rk4_step(time, &state, dt)
                } else {
                    state
                }
            }
            Method::SplitStepStrang => solver.strang_step(time, &state, dt)?,
        };
        time = (n + 1) as f64 * cfg.dt;
        if n + 1 == steps {
            time = cfg.t_final;
        }
        let norm = state.l2();
        if !norm.is_finite() || norm > 10.0 * n0 {
            return Err(DspecError::BlowupGuard { norm, initial: n0 });
        }
        if (n + 1) % every == 0 || n + 1 == steps {
            let f = match method {
                Method::DuhamelRk4 => state.clone(),
                Method::SplitStepStrang => propagate_spectral(&state, -solver.phase(time)),
            };
            rows.push(solver.row(time, &f));
            snapshots.push((time, f));
        }
    }
    let sup_decay_exponent = sup_exponent(&rows, cfg.t_final);
    Ok(Trajectory { config: cfg.clone(), snapshots, norm_trace: NormTrace { rows, sup_decay_exponent } })
}

/// RK4 on the profile equation.
pub fn integrate_profile(t: &EigenfunctionTable, u0: &ProfileGrid, cfg: &EvolveConfig) -> Result<Trajectory> {
    run(t, u0, cfg, Method::DuhamelRk4)
}

/// Strang splitting with the exact nonlinear substep.
pub fn split_step(t: &EigenfunctionTable, u0: &ProfileGrid, cfg: &EvolveConfig) -> Result<Trajectory> {
    run(t, u0, cfg, Method::SplitStepStrang)
}

/// Dispatches on `cfg.method`.
pub fn evolve(t: &EigenfunctionTable, u0: &ProfileGrid, cfg: &EvolveConfig) -> Result<Trajectory> {
    run(t, u0, cfg, cfg.method)
}

/// Relative L² distance of two profiles.
pub fn relative_gap(a: &SpectralProfile, b: &SpectralProfile) -> f64 {
    a.sub(b).l2() / b.l2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub sobolev_ratio: f64,
    pub w1_ratio: f64,
    pub w2_growth_exponent: f64,
    pub sup_decay_exponent: f64,
    /// ‖f̃(t₂) - f̃(t₁)‖₂ over the dyadic windows [2^n, 2^{n+1}] ∩ [1, t_final].
    pub scattering_windows: Vec<(f64, f64, f64)>,
    /// First window start entering the monotonicity check.
    pub scattering_from: f64,
    pub scattering_decreasing: bool,
    pub sobolev_ok: bool,
    pub w1_ok: bool,
    pub w2_ok: bool,
    pub decay_ok: bool,
    pub passed: bool,
}

pub const SOBOLEV_RATIO_MAX: f64 = 1.5;
pub const W1_RATIO_MAX: f64 = 4.0;
pub const W2_EXPONENT_MAX: f64 = 0.8;
pub const SUP_EXPONENT_MAX: f64 = -1.0;

fn snapshot_at(traj: &Trajectory, time: f64) -> &SpectralProfile {
    let mut best = &traj.snapshots[0];
    for s in &traj.snapshots {
        if (s.0 - time).abs() < (best.0 - time).abs() {
            best = s;
        }
    }
    &best.1
}

pub fn bootstrap_report(traj: &Trajectory) -> BootstrapReport {
    let rows = &traj.norm_trace.rows;
    let r0 = rows[0];
    let max_of = |f: fn(&NormRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let sobolev_ratio = max_of(|r| r.sobolev) / r0.sobolev;
    let w1_ratio = max_of(|r| r.w1) / r0.w1;
    let t_final = traj.config.t_final;
    let late: Vec<&NormRow> = rows.iter().filter(|r| r.t >= t_final / 2.0 && r.t > 0.0).collect();
    let w2_growth_exponent = if late.len() >= 2 {
        loglog_slope(&late.iter().map(|r| r.t).collect::<Vec<_>>(), &late.iter().map(|r| r.w2).collect::<Vec<_>>())
    } else {
        f64::NAN
    };
    let mut scattering_windows = Vec::new();
    let mut a = 1.0;
    while a < t_final {
        let b = (2.0 * a).min(t_final);
        let d = snapshot_at(traj, b).sub(snapshot_at(traj, a)).l2();
        scattering_windows.push((a, b, d));
        a = b;
    }
    // monotonicity is asserted from the dyadic window holding the dispersive time on
    let start = 2f64.powf(dispersive_time(&traj.config).log2().floor()).max(1.0);
    let late_windows: Vec<&(f64, f64, f64)> = scattering_windows.iter().filter(|w| w.0 >= start).collect();
    let scattering_from = start;
    let scattering_decreasing = late_windows.len() >= 2 && late_windows.windows(2).all(|w| w[1].2 < w[0].2);
    let sup_decay_exponent = traj.norm_trace.sup_decay_exponent;
    let sobolev_ok = sobolev_ratio <= SOBOLEV_RATIO_MAX;
    let w1_ok = w1_ratio <= W1_RATIO_MAX;
    let w2_ok = w2_growth_exponent <= W2_EXPONENT_MAX;
    let decay_ok = sup_decay_exponent <= SUP_EXPONENT_MAX;
    BootstrapReport {
        sobolev_ratio,
        w1_ratio,
        w2_growth_exponent,
        sup_decay_exponent,
        scattering_windows,
        scattering_from,
        scattering_decreasing,
        sobolev_ok,
        w1_ok,
        w2_ok,
        decay_ok,
        passed: sobolev_ok && w1_ok && w2_ok && decay_ok && scattering_decreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substep_is_the_exact_flow() {
        let c = Complex64::new(0.3, -0.2);
        let mut u = vec![c];
        for _ in 0..10 {
            nonlinear_substep(&mut u, 0.1).unwrap();
        }
        let exact = c / (1.0 + Complex64::new(0.0, 1.0) * c);
        assert!((u[0] - exact).norm() < 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        let mut u = vec![Complex64::new(0.0, 1.0)];
        assert!(matches!(nonlinear_substep(&mut u, 1.0), Err(DspecError::NonlinearPole { .. })));
    }
}
