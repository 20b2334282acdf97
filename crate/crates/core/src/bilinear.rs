//! Phase algebra, Littlewood-Paley projections and flat bilinear operators
//!
//! B[b](g,h)(k) = ∫∫ g(l - k) h(m) b(k,l,m) [χ(2^j(|l| - |m|))] dl dm
//!
//! on radial spectral data with symbols depending on (|k|, |l|, |m|).

use crate::cutoff::{self, phi_le, phi_shell};
use crate::dft::{ProfileGrid, SpectralProfile};
use crate::error::{DspecError, Result};
use crate::grid::{KGrid, RadialGrid};
use crate::nsd::profile_at;
use crate::quadrature::{cumulative, gl_breakpoints};
use crate::special::{lagrange6, sph_j};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

pub type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub k: Vec3,
    pub l: Vec3,
    pub m: Vec3,
}

/// Phases and good-vectorfield derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlgebra {
    /// |l|² + 2k.l + |m|²
    pub phi: f64,
    /// -|k|² + |l|² + |m|²
    pub phi0: f64,
    /// -|k|² + |l|² + 2l.m + 2|m|²
    pub psi: f64,
    /// (∂_{|l|} + ∂_{|m|}) Φ
    pub x_phi: f64,
    /// |l|² + 2|m||l| - |m|²
    pub c: f64,
    /// -(|l| - |k|)(|l| + |k|) + 2|m|²
    pub d: f64,
    /// Derivative of Φ along the radial direction (l, m)/|(l, m)|.
    pub x_plus_phi: f64,
    /// m.∇_m Ψ / 2 = m.(l + 2m)... stored as m.(2l + 4m).
    pub m_grad_psi: f64,
    /// Flat phase -2k.l + 2|l|² (m = k - l) and (3l - k).∇_l of it.
    pub phi_flat: f64,
    pub flat_vector_derivative: f64,
}

/// Evaluates every phase quantity; derivatives use explicit gradients so
/// the identities below are checked rather than built in.
pub fn phase_algebra(pt: &PhasePoint) -> Result<PhaseAlgebra> {
    let PhasePoint { k, l, m } = pt;
    let (nk, nl, nm) = (norm(k), norm(l), norm(m));
    if nl == 0.0 {
        return Err(DspecError::DegenerateDirection);
    }
    let phi = nl * nl + 2.0 * dot(k, l) + nm * nm;
    let grad_l: Vec3 = [2.0 * (l[0] + k[0]), 2.0 * (l[1] + k[1]), 2.0 * (l[2] + k[2])];
    let grad_m: Vec3 = [2.0 * m[0], 2.0 * m[1], 2.0 * m[2]];
    let x_phi = dot(l, &grad_l) / nl + if nm > 0.0 { dot(m, &grad_m) / nm } else { 0.0 };
    let rad = (nl * nl + nm * nm).sqrt();
    let x_plus_phi = (dot(l, &grad_l) + dot(m, &grad_m)) / rad;
    let psi = -nk * nk + nl * nl + 2.0 * dot(l, m) + 2.0 * nm * nm;
    // ∇_m Ψ = 2l + 4m
    let m_grad_psi = dot(m, &[2.0 * l[0] + 4.0 * m[0], 2.0 * l[1] + 4.0 * m[1], 2.0 * l[2] + 4.0 * m[2]]);
    let phi_flat = -2.0 * dot(k, l) + 2.0 * nl * nl;
    let grad_flat: Vec3 = [4.0 * l[0] - 2.0 * k[0], 4.0 * l[1] - 2.0 * k[1], 4.0 * l[2] - 2.0 * k[2]];
    let v: Vec3 = [3.0 * l[0] - k[0], 3.0 * l[1] - k[1], 3.0 * l[2] - k[2]];
    Ok(PhaseAlgebra {
        phi,
        phi0: -nk * nk + nl * nl + nm * nm,
        psi,
        x_phi,
        c: nl * nl + 2.0 * nm * nl - nm * nm,
        d: -(nl - nk) * (nl + nk) + 2.0 * nm * nm,
        x_plus_phi,
        m_grad_psi,
        phi_flat,
        flat_vector_derivative: dot(&v, &grad_flat),
    })
}

/// Residuals of the four identities
/// |l| XΦ - Φ = c, Ψ - m.∇_mΨ = -d, √(|l|²+|m|²) X₊Φ = Φ + |l|² + |m|²,
/// (3l - k).∇_l Φ_flat = 2(|l|² + |k|²) + 5 Φ_flat.
pub fn identity_residuals(pt: &PhasePoint) -> Result<[f64; 4]> {
    let a = phase_algebra(pt)?;
    let (nk, nl, nm) = (norm(&pt.k), norm(&pt.l), norm(&pt.m));
    Ok([
        (nl * a.x_phi - a.phi - a.c).abs(),
        (a.psi - a.m_grad_psi + a.d).abs(),
        ((nl * nl + nm * nm).sqrt() * a.x_plus_phi - a.phi - nl * nl - nm * nm).abs(),
        (a.flat_vector_derivative - 2.0 * (nl * nl + nk * nk) - 5.0 * a.phi_flat).abs(),
    ])
}

/// Largest identity residual over `n` random points with coordinates in [-1, 1].
pub fn random_identity_check(n: usize, seed: u64) -> [f64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..n {
        let mut v = || [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let pt = PhasePoint { k: v(), l: v(), m: v() };
        if let Ok(r) = identity_residuals(&pt) {
            for i in 0..4 {
                worst[i] = worst[i].max(r[i]);
            }
        }
    }
    worst
}

/// Near-diagonal search: points with ||l| - |m|| < |l|/8 and |XΦ| < |l|/8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearDiagonal {
    pub samples: usize,
    /// min |Φ| / |l|² over the region.
    pub min_ratio: f64,
}

pub fn near_diagonal_check(n: usize, seed: u64) -> NearDiagonal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    let mut samples = 0;
    let unit = |rng: &mut ChaCha8Rng| -> Vec3 {
        loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let r = norm(&v);
            if r > 1e-3 && r <= 1.0 {
                return [v[0] / r, v[1] / r, v[2] / r];
            }
        }
    };
    while samples < n {
        let nl = rng.gen_range(0.01..10.0);
        let lhat = unit(&mut rng);
        let nm = nl * (1.0 + rng.gen_range(-0.125..0.125));
        let mhat = unit(&mut rng);
        // XΦ = 2 k.l̂ + 2|l| + 2|m|: aim k.l̂ near -(|l| + |m|)
        let target = -(nl + nm) + nl * rng.gen_range(-0.07..0.07);
        let perp = unit(&mut rng);
        let along = dot(&perp, &lhat);
        let t: Vec3 = [perp[0] - along * lhat[0], perp[1] - along * lhat[1], perp[2] - along * lhat[2]];
        let s = rng.gen_range(0.0..3.0) * nl;
        let k: Vec3 = [target * lhat[0] + s * t[0], target * lhat[1] + s * t[1], target * lhat[2] + s * t[2]];
        let l: Vec3 = [nl * lhat[0], nl * lhat[1], nl * lhat[2]];
        let m: Vec3 = [nm * mhat[0], nm * mhat[1], nm * mhat[2]];
        let pt = PhasePoint { k, l, m };
        let a = match phase_algebra(&pt) {
            Ok(a) => a,
            Err(_) => continue,
        };
        if (nl - nm).abs() < nl / 8.0 && a.x_phi.abs() < nl / 8.0 {
            samples += 1;
            min_ratio = min_ratio.min(a.phi.abs() / (nl * nl));
        }
    }
    NearDiagonal { samples, min_ratio }
}

/// P_K: multiplies by φ_K(|ξ|).
pub fn lp_project(f: &SpectralProfile, k: i32) -> SpectralProfile {
    let values = f.values.iter().enumerate().map(|(j, v)| v * phi_shell(k, f.kgrid.kappa(j))).collect();
    SpectralProfile { kgrid: f.kgrid, values }
}

/// A symbol b(|k|, |l|, |m|) with the metadata used by the operator bounds.
#[derive(Clone)]
pub struct BilinearSymbol {
    pub name: String,
    /// (K, L, M) when b carries φ_K(|k|) φ_L(|l|) φ_M(|m|).
    pub shells: Option<(i32, i32, i32)>,
    /// Frequency cap exponent A in the derivative bounds.
    pub a: f64,
    pub depends_on_k: bool,
    f: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for BilinearSymbol {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("BilinearSymbol").field("name", &self.name).field("shells", &self.shells).field("a", &self.a).finish()
    }
}

impl BilinearSymbol {
    pub fn one() -> Self {
        BilinearSymbol { name: "one".into(), shells: None, a: 1.0, depends_on_k: false, f: Arc::new(|_, _, _| 1.0) }
    }

    /// φ_K(|k|) φ_L(|l|) φ_M(|m|).
    pub fn shells(k: i32, l: i32, m: i32) -> Self {
        BilinearSymbol {
            name: format!("shells({k},{l},{m})"),
            shells: Some((k, l, m)),
            a: (k.max(l).max(m) + 1) as f64,
            depends_on_k: true,
            f: Arc::new(move |a, b, c| phi_shell(k, a) * phi_shell(l, b) * phi_shell(m, c)),
        }
    }

    pub fn custom<F>(name: &str, a: f64, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        BilinearSymbol { name: name.into(), shells: None, a, depends_on_k: true, f: Arc::new(f) }
    }

    pub fn eval(&self, k: f64, l: f64, m: f64) -> f64 {
        (self.f)(k, l, m)
    }

    /// Largest first-derivative ratio |∂_x b| 2^X / 2^A over samples (X the
    /// shell exponent of the differentiated variable, 0 without shells),
    /// by centered differences.
    pub fn derivative_bound(&self, samples: &[(f64, f64, f64)]) -> f64 {
        let (ek, el, em) = self.shells.unwrap_or((0, 0, 0));
        let scale = [2f64.powi(ek), 2f64.powi(el), 2f64.powi(em)];
        let mut worst = 0.0f64;
        for &(k, l, m) in samples {
            let x = [k, l, m];
            for i in 0..3 {
                let hstep = 1e-5 * scale[i];
                let mut a = x;
                let mut b = x;
                a[i] -= hstep;
                b[i] += hstep;
                let d = (self.eval(b[0], b[1], b[2]) - self.eval(a[0], a[1], a[2])) / (2.0 * hstep);
                worst = worst.max(d.abs() * scale[i] / 2f64.powf(self.a));
            }
        }
        worst
    }
}

/// B_j[b] with the window χ(s) = exp(-(s - shift)²).
#[derive(Debug, Clone)]
pub struct AnnulusOperatorSpec {
    pub j: i32,
    pub l: i32,
    pub symbol: BilinearSymbol,
    pub chi_shift: f64,
    /// Quadrature step near the annulus; defaults to 2^{-j}/8.
    pub step: Option<f64>,
}

impl AnnulusOperatorSpec {
    pub fn new(j: i32, l: i32) -> Self {
        AnnulusOperatorSpec { j, l, symbol: BilinearSymbol::one(), chi_shift: 0.0, step: None }
    }

    pub fn chi(&self, s: f64) -> f64 {
        (-(s - self.chi_shift).powi(2)).exp()
    }
}

/// Reach of the Gaussian window in units of its argument.
const CHI_REACH: f64 = 7.0;

/// Where |g| exceeds 1e-14 of its maximum.
fn support(g: &SpectralProfile) -> (f64, f64) {
    let mx = g.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let idx: Vec<usize> = (0..g.values.len()).filter(|&j| g.values[j].norm() > 1e-14 * mx).collect();
    if idx.is_empty() {
        return (0.0, 0.0);
    }
    let dk = g.kgrid.dk();
    ((g.kgrid.kappa(idx[0]) - dk).max(0.0), (g.kgrid.kappa(*idx.last().unwrap()) + dk).min(g.kgrid.kappa_max))
}

/// G1(s) = ∫₀^s g(u) u du on a fine uniform grid, for the angular average
/// ∫_{-1}^{1} g(|l - k|) dt = (G1(k + l) - G1(|k - l|)) / (k l).
struct RadialAverage {
    h: f64,
    g1: Vec<Complex64>,
    top: f64,
    g: SpectralProfile,
}

impl RadialAverage {
    fn new(g: &SpectralProfile) -> Self {
        let top = g.kgrid.kappa_max;
        let h = (g.kgrid.dk() / 8.0).min(0.01);
        let n = (top / h).ceil() as usize;
        let h = top / n as f64;
        let f: Vec<Complex64> = (0..=n).map(|i| profile_at(g, i as f64 * h) * (i as f64 * h)).collect();
        let g1 = cumulative(&f, h, Complex64::new(0.0, 0.0));
        RadialAverage { h, g1, top, g: g.clone() }
    }

    fn g1_at(&self, s: f64) -> Complex64 {
        if s >= self.top {
            return self.g1[self.g1.len() - 1];
        }
        lagrange6(&self.g1, self.h, s)
    }

    fn average(&self, k: f64, l: f64) -> Complex64 {
        if k * l < 1e-8 {
            return profile_at(&self.g, (k - l).abs()) * 2.0;
        }
        (self.g1_at(k + l) - self.g1_at((k - l).abs())) / (k * l)
    }
}

/// Shared core: out(k) = 2π ∫ l² H(k,l) ∫ dt g(|l - k|) dl with
/// H(k,l) = 4π ∫ h(ρ) b(k,l,ρ) w(l,ρ) ρ² dρ and w the annulus window or 1.
fn bilinear_core(
    g: &SpectralProfile,
    h: &SpectralProfile,
    symbol: &BilinearSymbol,
    window: Option<&AnnulusOperatorSpec>,
    out_grid: KGrid,
    step: f64,
) -> SpectralProfile {
    let avg = RadialAverage::new(g);
    let (h_lo, h_hi) = support(h);
    let (g_lo, g_hi) = support(g);
    let _ = g_lo;
    let out_top = out_grid.kappa_max;
    // l range: where H can be nonzero and g(l - k) can reach the output grid
    let (mut l_lo, mut l_hi) = match window {
        Some(s) => {
            let reach = (CHI_REACH + s.chi_shift.abs()) * 2f64.powi(-s.j);
            ((h_lo - reach).max(0.0), h_hi + reach)
        }
        None => (0.0, out_top + g_hi),
    };
    if let Some((_, el, _)) = symbol.shells {
        l_lo = l_lo.max(cutoff::INNER * 2f64.powi(el - 1));
        l_hi = l_hi.min(cutoff::OUTER * 2f64.powi(el));
    }
    l_hi = l_hi.min(out_top + g_hi);
    if l_hi <= l_lo {
        return SpectralProfile::zeros(out_grid);
    }
    let (ls, wl) = gl_breakpoints(&[l_lo, l_hi], 8.0 * step, 8);
    let rho_rule = |l: f64| -> (Vec<f64>, Vec<f64>) {
        match window {
            Some(s) => {
                let w = 2f64.powi(-s.j);
                let c = l - s.chi_shift * w;
                let a = (c - CHI_REACH * w).max(h_lo);
                let b = (c + CHI_REACH * w).min(h_hi);
                if b <= a {
                    return (vec![], vec![]);
                }
                gl_breakpoints(&[a, b], w, 16)
            }
            None => gl_breakpoints(&[h_lo, h_hi], (h.kgrid.dk() * 4.0).min(0.25), 16),
        }
    };
    let big_h = |k: f64, l: f64, rule: &(Vec<f64>, Vec<f64>)| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&rho, &w) in rule.0.iter().zip(&rule.1) {
            let win = window.map_or(1.0, |s| s.chi(2f64.powi(s.j) * (l - rho)));
            acc += profile_at(h, rho) * (w * rho * rho * win * symbol.eval(k, l, rho));
        }
        acc * (4.0 * PI)
    };
    let rules: Vec<(Vec<f64>, Vec<f64>)> = ls.iter().map(|&l| rho_rule(l)).collect();
    let fixed: Option<Vec<Complex64>> =
        if symbol.depends_on_k { None } else { Some(ls.iter().zip(&rules).map(|(&l, r)| big_h(0.0, l, r)).collect()) };
    let values = out_grid
        .nodes()
        .par_iter()
        .map(|&k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, (&l, &w)) in ls.iter().zip(&wl).enumerate() {
                let hv = match &fixed {
                    Some(v) => v[i],
                    None => big_h(k, l, &rules[i]),
                };
                if hv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                acc += hv * avg.average(k, l) * (w * l * l);
            }
            acc * (2.0 * PI)
        })
        .collect();
    SpectralProfile { kgrid: out_grid, values }
}

/// B_j[b](g,h) on the frequency grid `out_grid` (the physical output is its
/// inverse Fourier transform, with the same L² norm).
pub fn apply_annulus_operator(spec: &AnnulusOperatorSpec, g: &SpectralProfile, h: &SpectralProfile, out_grid: KGrid) -> Result<SpectralProfile> {
    let limit = 2f64.powi(-spec.j) / 8.0;
    let step = spec.step.unwrap_or(limit);
    if step > limit * (1.0 + 1e-12) {
        return Err(DspecError::AnnulusUnderResolved { step, limit });
    }
    Ok(bilinear_core(g, h, &spec.symbol, Some(spec), out_grid, step))
}

/// B[b](g,h) for a regular symbol restricted to the shells (K, L, M).
pub fn apply_regular_symbol_operator(
    b: &BilinearSymbol,
    shells: (i32, i32, i32),
    g: &SpectralProfile,
    h: &SpectralProfile,
    out_grid: KGrid,
) -> SpectralProfile {
    let (ek, el, em) = shells;
    let inner = b.clone();
    let step = (g.kgrid.dk().min(h.kgrid.dk()) / 2.0).min(2f64.powi(el) / 64.0);
    let name = format!("{} x shells({ek},{el},{em})", b.name);
    if !b.depends_on_k {
        // φ_K(|k|) factors out of the l, m integrals
        let sym = BilinearSymbol {
            name,
            shells: Some(shells),
            a: b.a,
            depends_on_k: false,
            f: Arc::new(move |k, l, m| phi_shell(el, l) * phi_shell(em, m) * inner.eval(k, l, m)),
        };
        let mut out = bilinear_core(g, h, &sym, None, out_grid, step);
        for (j, v) in out.values.iter_mut().enumerate() {
            *v *= phi_shell(ek, out_grid.kappa(j));
        }
        return out;
    }
    let sym = BilinearSymbol {
        name,
        shells: Some(shells),
        a: b.a,
        depends_on_k: true,
        f: Arc::new(move |k, l, m| phi_shell(ek, k) * phi_shell(el, l) * phi_shell(em, m) * inner.eval(k, l, m)),
    };
    bilinear_core(g, h, &sym, None, out_grid, step)
}

/// Radial Fourier transform (2π)^{-3/2} ∫ e^{-ix.ξ} f(ξ) dξ at the radii `rs`
/// (the same formula serves the inverse transform of a radial profile).
pub fn radial_transform_at(f: &SpectralProfile, rs: &[f64]) -> Vec<Complex64> {
    let (ks, wk) = gl_breakpoints(&[0.0, f.kgrid.kappa_max], (f.kgrid.dk() * 2.0).min(0.05), 8);
    let vals: Vec<Complex64> = ks.iter().zip(&wk).map(|(&k, &w)| profile_at(f, k) * (w * k * k)).collect();
    let c = (2.0 / PI).sqrt();
    rs.par_iter()
        .map(|&r| ks.iter().zip(&vals).map(|(&k, v)| v * sph_j(0, k * r)).sum::<Complex64>() * c)
        .collect()
}

/// `radial_transform_at` on r = i r_max / n, i = 0..=n.
pub fn radial_transform(f: &SpectralProfile, r_max: f64, n: usize) -> Vec<(f64, Complex64)> {
    let rs: Vec<f64> = (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
    let v = radial_transform_at(f, &rs);
    rs.into_iter().zip(v).collect()
}

/// Physical-side operator output F^{-1}[out] on a radial grid.
pub fn to_physical(out: &SpectralProfile, grid: RadialGrid) -> ProfileGrid {
    let values = radial_transform_at(out, &grid.nodes());
    ProfileGrid { grid, values }
}

/// ‖f̂‖_{L^q(R³)} of the physical-side transform, q = ∞ allowed; q = 2 uses Plancherel.
pub fn physical_norm(f: &SpectralProfile, q: f64) -> f64 {
    if q == 2.0 {
        return f.l2();
    }
    let r_max = 40.0;
    let n = ((r_max * f.kgrid.kappa_max * 2.0) as usize).max(2000);
    let t = radial_transform(f, r_max, n);
    if q.is_infinite() {
        return t.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    }
    let dr = r_max / n as f64;
    let s: f64 = t.iter().map(|(r, v)| v.norm().powf(q) * r * r).sum::<f64>() * dr * 4.0 * PI;
    s.powf(1.0 / q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    pub j_values: Vec<i32>,
    pub ratios: Vec<f64>,
    /// d log₂(ratio) / dj by least squares.
    pub fitted_slope: f64,
    pub fit_residual: f64,
    /// Ratios nonincreasing in j.
    pub monotone: bool,
}

/// ‖B_j(g,h)‖₂ / (‖ĝ‖_p ‖ĥ‖_q) over the family of specs.
pub fn estimate_operator_scaling(
    specs: &[AnnulusOperatorSpec],
    g: &SpectralProfile,
    h: &SpectralProfile,
    norms: (f64, f64),
    out_grid: KGrid,
) -> Result<OperatorNormEstimate> {
    if specs.len() < 4 {
        return Err(DspecError::OutOfRange(format!("{} values of j, need at least 4", specs.len())));
    }
    let ratios = specs.iter().map(|s| annulus_ratio(s, g, h, norms, out_grid)).collect::<Result<Vec<_>>>()?;
    let j_values: Vec<i32> = specs.iter().map(|s| s.j).collect();
    let x: Vec<f64> = j_values.iter().map(|&j| j as f64).collect();
    let y: Vec<f64> = ratios.iter().map(|r| r.log2()).collect();
    let (slope, resid) = linear_fit(&x, &y);
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    Ok(OperatorNormEstimate { j_values, ratios, fitted_slope: slope, fit_residual: resid, monotone })
}

/// ‖B_j(g,h)‖₂ / (‖ĝ‖_p ‖ĥ‖_q) for one spec.
pub fn annulus_ratio(spec: &AnnulusOperatorSpec, g: &SpectralProfile, h: &SpectralProfile, norms: (f64, f64), out_grid: KGrid) -> Result<f64> {
    let out = apply_annulus_operator(spec, g, h, out_grid)?;
    Ok(out.l2() / (physical_norm(g, norms.0) * physical_norm(h, norms.1)))
}

/// Output grid used by the scaling benchmark.
pub fn bench_out_grid() -> KGrid {
    KGrid::from_zero(30.0, 600)
}

/// Least-squares slope and RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Inputs concentrated on the annulus: h a Gaussian shell of width 1/2 at
/// radius 2^L, g a wide Gaussian of scale 10.
pub fn annulus_inputs(l: i32, kgrid: KGrid) -> (SpectralProfile, SpectralProfile) {
    let c = 2f64.powi(l);
    let g = SpectralProfile::from_fn(kgrid, |k| Complex64::new((-k * k / 200.0).exp(), 0.0));
    let h = SpectralProfile::from_fn(kgrid, |k| Complex64::new((-(k - c).powi(2) / 0.5).exp(), 0.0));
    (g, h)
}

/// Frequency grid wide enough for `annulus_inputs`.
pub fn annulus_grid() -> KGrid {
    KGrid::from_zero(60.0, 2400)
}

/// The b ≡ 1 regular operator through the physical side:
/// φ_K(k) (2π)^{3/2} F[ǧ · φ̌_L](k) ∫ h φ_M.
pub fn regular_product_route(
    shells: (i32, i32, i32),
    g: &SpectralProfile,
    h: &SpectralProfile,
    out_grid: KGrid,
) -> SpectralProfile {
    let (ek, el, em) = shells;
    let kg = g.kgrid;
    let pl = SpectralProfile::from_fn(kg, |k| Complex64::new(phi_shell(el, k), 0.0));
    let r_max = 60.0;
    let n = 4800;
    let gr = radial_transform(g, r_max, n);
    let pr = radial_transform(&pl, r_max, n);
    let dr = r_max / n as f64;
    let prod: Vec<(f64, Complex64)> = gr.iter().zip(&pr).map(|((r, a), (_, b))| (*r, a * b)).collect();
    let (rs, wr) = gl_breakpoints(&[0.0, h.kgrid.kappa_max], (h.kgrid.dk() * 2.0).min(0.05), 8);
    let hm: Complex64 = rs.iter().zip(&wr).map(|(&m, &w)| profile_at(h, m) * (4.0 * PI * w * m * m * phi_shell(em, m))).sum();
    let c = (2.0 / PI).sqrt() * (2.0 * PI).powf(1.5);
    let values = out_grid
        .nodes()
        .par_iter()
        .map(|&k| {
            if phi_shell(ek, k) == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // trapezoid on the uniform r grid; the product decays well before r_max
            let s: Complex64 = prod.iter().map(|(r, v)| v * (r * r * sph_j(0, k * r))).sum::<Complex64>() * dr;
            s * c * phi_shell(ek, k) * hm
        })
        .collect();
    SpectralProfile { kgrid: out_grid, values }
}

/// Hölder ratio ‖B[b](g,h)‖₂ / (‖ĝ‖₂ ‖ĥ‖_∞) and the same divided by 2^{3 max(L,M)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub shells: (i32, i32, i32),
    pub ratio: f64,
    pub normalized: f64,
}

pub fn regular_envelope(shells: &[(i32, i32, i32)], g: &SpectralProfile, h: &SpectralProfile, out_grid: KGrid) -> Vec<EnvelopePoint> {
    let denom = physical_norm(g, 2.0) * physical_norm(h, f64::INFINITY);
    shells
        .iter()
        .map(|&s| {
            let out = apply_regular_symbol_operator(&BilinearSymbol::one(), s, g, h, out_grid);
            let ratio = out.l2() / denom;
            EnvelopePoint { shells: s, ratio, normalized: ratio / 2f64.powi(3 * s.1.max(s.2)) }
        })
        .collect()
}

/// φ_{<=B}(|ξ|) restricted profile.
pub fn lp_low(f: &SpectralProfile, b: i32) -> SpectralProfile {
    let values = f.values.iter().enumerate().map(|(j, v)| v * phi_le(b, f.kgrid.kappa(j))).collect();
    SpectralProfile { kgrid: f.kgrid, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_point() {
        let e1 = [1.0, 0.0, 0.0];
        let a = phase_algebra(&PhasePoint { k: e1, l: e1, m: e1 }).unwrap();
        assert_eq!(a.phi, 4.0);
        assert_eq!(a.x_phi, 6.0);
        assert_eq!(a.c, 2.0);
    }

    #[test]
    fn degenerate_l() {
        let z = [0.0; 3];
        let e = phase_algebra(&PhasePoint { k: [1.0, 0.0, 0.0], l: z, m: z }).unwrap_err();
        assert_eq!(e, DspecError::DegenerateDirection);
    }
}
