//! The nonlinear spectral distribution at collinear frequencies.
//!
//! All vectors lie on one axis, so every angular integral reduces to the
//! polar variable c. Values are regularized by the dyadic window
//! φ(x/2^{J_min}) + Σ_{J_min<J<=J_max} φ_J(x) and reported shell by shell.

use crate::cutoff::{self, chi_hat, phi_integral, piece, piece_breaks};
use crate::dft::{forward_dft, inverse_dft, ProfileGrid, SpectralProfile};
use crate::error::{DspecError, Result};
use crate::quadrature::gl_breakpoints;
use crate::radialwave::{extract_g0, scattered_all, EigenfunctionTable, ScatteringState};
use crate::special::{gauss_legendre, i_pow, legendre_array, sph_j_array};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Collinear frequencies: magnitudes with orientations ±1 along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearConfig {
    pub magnitudes: Vec<f64>,
    pub signs: Vec<i8>,
}

impl CollinearConfig {
    pub fn pair(p: f64, q: f64, sp: i8, sq: i8) -> Self {
        CollinearConfig { magnitudes: vec![p, q], signs: vec![sp, sq] }
    }

    pub fn triple(k: f64, l: f64, m: f64, signs: [i8; 3]) -> Self {
        CollinearConfig { magnitudes: vec![k, l, m], signs: signs.to_vec() }
    }

    /// All orientations reversed.
    pub fn negated(&self) -> Self {
        CollinearConfig { magnitudes: self.magnitudes.clone(), signs: self.signs.iter().map(|s| -s).collect() }
    }

    pub fn validate(&self, arity: usize) -> Result<()> {
        if self.magnitudes.len() != arity || self.signs.len() != arity {
            return Err(DspecError::OutOfRange(format!("expected {arity} collinear vectors")));
        }
        if self.magnitudes.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(DspecError::OutOfRange("magnitudes must be positive".into()));
        }
        if self.signs.iter().any(|s| s.abs() != 1) {
            return Err(DspecError::OutOfRange("orientations must be +1 or -1".into()));
        }
        Ok(())
    }

    fn s(&self, i: usize) -> f64 {
        self.signs[i] as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NsdKind {
    Nu1,
    Nu2_1,
    Nu2_2,
    Mu3,
    BuildingBlock,
}

/// Dyadic window: the ball φ(x/2^{j_min}) and shells j_min < J <= j_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellWindow {
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for ShellWindow {
    fn default() -> Self {
        ShellWindow { j_min: 0, j_max: 7 }
    }
}

impl ShellWindow {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_max <= j_min {
            return Err(DspecError::OutOfRange(format!("empty shell window [{j_min}, {j_max}]")));
        }
        Ok(ShellWindow { j_min, j_max })
    }

    /// Smallest window reaching 2^{j_max} eps >= 256, never below the default;
    /// the last shell of every ladder sample then carries under 1% of its value.
    pub fn for_eps(eps_min: f64) -> Self {
        let need = (256.0 / eps_min).log2().ceil() as i32;
        ShellWindow { j_min: 0, j_max: need.max(7) }
    }

    pub fn radius(&self) -> f64 {
        cutoff::OUTER * 2f64.powi(self.j_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsdSample {
    pub config: CollinearConfig,
    pub kind: NsdKind,
    pub j_window: (i32, i32),
    pub value: Complex64,
    pub shell_values: Vec<Complex64>,
    /// Geometric tail |s_J| rho / (1 - rho) from the last two shells.
    pub tail_estimate: f64,
    pub singular_proximity: bool,
}

impl NsdSample {
    fn from_shells(config: CollinearConfig, kind: NsdKind, w: ShellWindow, shells: Vec<Complex64>, near: bool) -> Self {
        let value = shells.iter().sum();
        let n = shells.len();
        let last = shells[n - 1].norm();
        let prev = shells[n - 2].norm();
        let rho = if prev > 0.0 { last / prev } else { 0.0 };
        let tail_estimate = if rho < 1.0 { last * rho / (1.0 - rho) } else { f64::INFINITY };
        NsdSample { config, kind, j_window: (w.j_min, w.j_max), value, shell_values: shells, tail_estimate, singular_proximity: near }
    }

    /// |shell(J_max)| < 0.01 |value|, or the sample sits near its singular set.
    pub fn shells_decayed(&self) -> bool {
        self.singular_proximity || self.shell_values.last().map_or(0.0, |s| s.norm()) <= 0.01 * self.value.norm()
    }
}

/// Integrates f against every piece of the window with Gauss-Legendre
/// panels no wider than `width` (and fine enough for the cutoff edges).
fn window_shells<F>(w: ShellWindow, width: f64, f: F) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    (w.j_min..=w.j_max)
        .map(|j| {
            let edge = (cutoff::OUTER - cutoff::INNER) * 2f64.powi(j - 1) / 8.0;
            let (x, wt) = gl_breakpoints(&piece_breaks(j, w.j_min), width.min(edge), 16);
            x.par_iter().zip(wt.par_iter()).map(|(&r, &wr)| f(r) * (wr * piece(j, w.j_min, r))).collect::<Vec<_>>().into_iter().sum()
        })
        .collect()
}

fn check_kappa(t: &EigenfunctionTable, kappa: f64) -> Result<()> {
    let k = &t.kgrid;
    if kappa < k.kappa_min - 1e-12 || kappa > k.kappa_max + 1e-12 {
        return Err(DspecError::OutOfRange(format!("|q| = {kappa} outside the table range [{}, {}]", k.kappa_min, k.kappa_max)));
    }
    Ok(())
}

/// Regularized ν₁(p,q) = ∫ e^{ix.p} e^{i|q||x|}/|x| ψ₁(x,q) dx, config = (|p|, |q|).
///
/// With ψ₁ = -4π r e^{-iκr}(ψ - e^{ik.x}) the integrand reduces to
/// -16π² r² Σ (2l+1)(-σ)^l S_l(r) j_l(|p| r), σ = p̂.q̂.
pub fn nu1_regularized(t: &EigenfunctionTable, cfg: &CollinearConfig, w: ShellWindow) -> Result<NsdSample> {
    cfg.validate(2)?;
    if cfg.magnitudes[0] == cfg.magnitudes[1] {
        return Err(DspecError::OutOfRange("nu1 is singular on |p| = |q|".into()));
    }
    nu1_shells(t, cfg, w)
}

fn nu1_shells(t: &EigenfunctionTable, cfg: &CollinearConfig, w: ShellWindow) -> Result<NsdSample> {
    let (p, q) = (cfg.magnitudes[0], cfg.magnitudes[1]);
    check_kappa(t, q)?;
    let near = (p - q).abs() < 2f64.powi(-w.j_max);
    if t.potential.is_zero() {
        let n = (w.j_max - w.j_min + 1) as usize;
        return Ok(NsdSample::from_shells(cfg.clone(), NsdKind::Nu1, w, vec![ZERO; n], near));
    }
    let state = t.state(q)?;
    let sigma = cfg.s(0) * cfg.s(1);
    let lmax = state.l_max();
    let f = |r: f64| {
        let s = scattered_all(&state.waves, r);
        let mut jb = vec![0.0; lmax + 1];
        sph_j_array(lmax, p * r, &mut jb);
        let mut acc = ZERO;
        let mut sg = 1.0;
        for l in 0..=lmax {
            acc += s[l] * ((2 * l + 1) as f64 * sg * jb[l]);
            sg *= -sigma;
        }
        acc * (-16.0 * PI * PI * r * r)
    };
    let shells = window_shells(w, 1.6 / (p + 2.0 * q), f);
    Ok(NsdSample::from_shells(cfg.clone(), NsdKind::Nu1, w, shells, near))
}

/// Symbol in the building block 𝒦_J.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSymbol {
    ConstantOne,
    G0FromTable,
}

/// Largest number of (r, c) evaluations building_block accepts.
pub const BLOCK_BUDGET: usize = 400_000_000;

fn g0_coefficients(state: &ScatteringState) -> Vec<Complex64> {
    state
        .waves
        .iter()
        .enumerate()
        .map(|(l, w)| Complex64::from_polar(w.phase_shift.sin(), w.phase_shift) * (-4.0 * PI * (2 * l + 1) as f64 / state.kappa))
        .collect()
}

fn symbol_values(t: &EigenfunctionTable, g: BlockSymbol, q: f64) -> Result<Option<Vec<Complex64>>> {
    Ok(match g {
        BlockSymbol::ConstantOne => None,
        BlockSymbol::G0FromTable => Some(if t.potential.is_zero() { vec![ZERO] } else { g0_coefficients(&t.state(q)?) }),
    })
}

fn eval_symbol(coeffs: &Option<Vec<Complex64>>, x: f64) -> Complex64 {
    match coeffs {
        None => Complex64::new(1.0, 0.0),
        Some(a) => {
            let mut pl = vec![0.0; a.len()];
            legendre_array(a.len() - 1, x, &mut pl);
            a.iter().zip(&pl).map(|(c, p)| c * p).sum()
        }
    }
}

/// 𝒦_J(p,q) = ∫ e^{ix.p} e^{i|x||q|}/|x| g(ω,q) φ(x 2^{-J}) dx, config = (|p|, |q|),
/// by the 2D reduction 2π ∫ r dr e^{i|q|r} φ(r 2^{-J}) ∫ dc e^{i r |p| s_p c} g(s_q c).
pub fn building_block(t: &EigenfunctionTable, j: i32, cfg: &CollinearConfig, g: BlockSymbol) -> Result<Complex64> {
    cfg.validate(2)?;
    let (p, q) = (cfg.magnitudes[0], cfg.magnitudes[1]);
    check_kappa(t, q)?;
    let coeffs = symbol_values(t, g, q)?;
    let scale = 2f64.powi(j);
    // GL panels of 16 nodes, mean spacing 0.1/(|p|+|q|)
    let width = (1.6 / (p + q)).min((cutoff::OUTER - cutoff::INNER) * scale / 8.0);
    let (rs, wr) = gl_breakpoints(&[0.0, cutoff::INNER * scale, cutoff::OUTER * scale], width, 16);
    let n_c = |r: f64| (r * p).ceil() as usize + 30;
    let work: usize = rs.iter().map(|&r| n_c(r)).sum();
    if work > BLOCK_BUDGET {
        return Err(DspecError::UnderResolved(format!("building block needs {work} evaluations")));
    }
    let mut rules: HashMap<usize, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for &r in &rs {
        rules.entry(n_c(r)).or_insert_with(|| gauss_legendre(n_c(r)));
    }
    let (sp, sq) = (cfg.s(0), cfg.s(1));
    let total: Complex64 = rs
        .par_iter()
        .zip(wr.par_iter())
        .map(|(&r, &w)| {
            let (cn, cw) = &rules[&n_c(r)];
            let inner: Complex64 = cn
                .iter()
                .zip(cw)
                .map(|(&c, &wc)| Complex64::from_polar(wc, r * p * sp * c) * eval_symbol(&coeffs, sq * c))
                .sum();
            inner * Complex64::from_polar(w * r * cutoff::phi(r / scale), q * r)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total * (2.0 * PI))
}

/// Closed form of 𝒦_J for g ≡ 1:
/// (2π/(i|p|)) [2^J χ̂(2^J(|q|+|p|)) - 2^J χ̂(2^J(|q|-|p|))].
pub fn building_block_constant(j: i32, p: f64, q: f64) -> Complex64 {
    let s = 2f64.powi(j);
    (chi_hat(s * (q + p)) - chi_hat(s * (q - p))) * s * (2.0 * PI) / Complex64::new(0.0, p)
}

/// Leading asymptotic term (a₀/|p|) 2^J χ̂(2^J(|q|-|p|)), a₀ = 2πi g(-p̂, q).
pub fn building_block_leading(t: &EigenfunctionTable, j: i32, cfg: &CollinearConfig, g: BlockSymbol) -> Result<Complex64> {
    cfg.validate(2)?;
    let (p, q) = (cfg.magnitudes[0], cfg.magnitudes[1]);
    let coeffs = symbol_values(t, g, q)?;
    let a0 = Complex64::new(0.0, 2.0 * PI) * eval_symbol(&coeffs, -cfg.s(0) * cfg.s(1));
    let s = 2f64.powi(j);
    Ok(a0 / p * s * chi_hat(s * (q - p)))
}

/// Symmetric ladder ν₁(κ₀ ± ε, κ₀) around the circle |p| = |q| = κ₀, plus
/// the diagonal value used for the δ coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularLadder {
    pub kappa0: f64,
    pub sigma: i8,
    pub eps: Vec<f64>,
    pub plus: Vec<NsdSample>,
    pub minus: Vec<NsdSample>,
    pub diagonal: NsdSample,
}

pub fn nu1_ladder(t: &EigenfunctionTable, kappa0: f64, sigma: i8, eps: &[f64]) -> Result<SingularLadder> {
    if eps.iter().any(|e| !(*e > 0.0) || *e >= kappa0) {
        return Err(DspecError::OutOfRange("ladder needs 0 < eps < kappa0".into()));
    }
    let eps_min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let w = ShellWindow::for_eps(eps_min);
    let at = |p: f64| nu1_shells(t, &CollinearConfig::pair(p, kappa0, sigma, 1), w);
    let plus = eps.iter().map(|e| at(kappa0 + e)).collect::<Result<Vec<_>>>()?;
    let minus = eps.iter().map(|e| at(kappa0 - e)).collect::<Result<Vec<_>>>()?;
    let diagonal = at(kappa0)?;
    Ok(SingularLadder { kappa0, sigma, eps: eps.to_vec(), plus, minus, diagonal })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularFit {
    pub kappa_center: f64,
    pub pv_coefficient: Complex64,
    pub delta_coefficient: Complex64,
    pub b0_predicted: Complex64,
    pub relative_error: f64,
    /// ε [ν(κ₀+ε) - ν(κ₀-ε)] / 2 along the ladder.
    pub odd_products: Vec<Complex64>,
    /// max |S(ε) - S(ε_min)| / |S(ε_min)| over the ladder.
    pub spread: f64,
    /// Relative change of the δ estimate between the two outermost shells.
    pub delta_stability: f64,
    /// Largest |ν(κ₀+ε) + ν(κ₀-ε)| / 2 on the ladder.
    pub even_bound: f64,
}

/// b₀ = 2π g₀(-σ) from direct quadrature of the far-field symbol; the
/// p.v. coefficient of ν₁ on the circle is b₀/|p|.
pub fn b0_prediction(t: &EigenfunctionTable, kappa0: f64, sigma: i8) -> Result<Complex64> {
    let g = extract_g0(&t.potential, t, -(sigma as f64), kappa0)?;
    Ok(g * (2.0 * PI))
}

pub fn fit_singular_structure(t: &EigenfunctionTable, ladder: &SingularLadder) -> Result<SingularFit> {
    let n = ladder.eps.len();
    if n < 4 {
        return Err(DspecError::OutOfRange(format!("ladder has {n} values, need at least 4")));
    }
    let ratio = ladder.eps[0] / ladder.eps[1];
    if ladder.eps.windows(2).any(|e| ((e[0] / e[1]) - ratio).abs() > 1e-9 * ratio) || ratio <= 1.0 {
        return Err(DspecError::OutOfRange("ladder must be geometric and decreasing".into()));
    }
    let odd: Vec<Complex64> =
        (0..n).map(|i| (ladder.plus[i].value - ladder.minus[i].value) * (ladder.eps[i] / 2.0)).collect();
    let even_bound = (0..n).map(|i| ((ladder.plus[i].value + ladder.minus[i].value) / 2.0).norm()).fold(0.0, f64::max);
    let last = odd[n - 1];
    let spread = if last.norm() == 0.0 {
        if odd.iter().all(|v| v.norm() == 0.0) { 0.0 } else { f64::INFINITY }
    } else {
        odd.iter().map(|v| (v - last).norm()).fold(0.0, f64::max) / last.norm()
    };
    if spread > 0.25 {
        return Err(DspecError::FitUnstable { spread });
    }
    // the odd part of the regular remainder is O(ε²)
    let r2 = ratio * ratio;
    let mut seq = odd.clone();
    for _ in 0..2 {
        seq = seq.windows(2).map(|s| (s[1] * r2 - s[0]) / (r2 - 1.0)).collect();
    }
    let pv = seq[seq.len() - 1];
    let k0 = ladder.kappa0;
    let b0 = if t.potential.is_zero() { ZERO } else { b0_prediction(t, k0, ladder.sigma)? };
    let b0_predicted = b0 / k0;
    let relative_error = if b0_predicted.norm() == 0.0 {
        pv.norm()
    } else {
        (pv - b0_predicted).norm() / b0_predicted.norm()
    };
    // on the diagonal each shell carries (δ coefficient / π) ∫ φ_J
    let d = &ladder.diagonal.shell_values;
    let m = d.len();
    let j_max = ladder.diagonal.j_window.1;
    let shell_mass = |j: i32| 2f64.powi(j - 1) * phi_integral();
    let d1 = d[m - 1] * PI / shell_mass(j_max);
    let d0 = d[m - 2] * PI / shell_mass(j_max - 1);
    let delta_stability = if d1.norm() == 0.0 { 0.0 } else { (d1 - d0).norm() / d1.norm() };
    Ok(SingularFit {
        kappa_center: k0,
        pv_coefficient: pv,
        delta_coefficient: d1,
        b0_predicted,
        relative_error,
        odd_products: odd,
        spread,
        delta_stability,
        even_bound,
    })
}

/// Legendre coefficients C_L of a polynomial in c sampled on GL nodes.
fn project(values: &[Complex64], pls: &[Vec<f64>], w: &[f64], lmax: usize) -> Vec<Complex64> {
    (0..=lmax)
        .map(|l| {
            let s: Complex64 = values.iter().zip(pls).zip(w).map(|((v, p), wi)| v * (p[l] * wi)).sum();
            s * ((2 * l + 1) as f64 / 2.0)
        })
        .collect()
}

/// ψ₁(r, s c) on the GL nodes c from its Legendre coefficients.
fn psi1_on_nodes(coeffs: &[Complex64], s: f64, pls: &[Vec<f64>]) -> Vec<Complex64> {
    pls.iter()
        .map(|pl| {
            let mut acc = ZERO;
            let mut sg = 1.0;
            for (l, a) in coeffs.iter().enumerate() {
                acc += a * (sg * pl[l]);
                sg *= s;
            }
            acc
        })
        .collect()
}

struct Angular {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pls: Vec<Vec<f64>>,
    lmax: usize,
}

impl Angular {
    fn new(degree: usize) -> Self {
        let (nodes, weights) = gauss_legendre(degree + 2);
        let pls = nodes
            .iter()
            .map(|&x| {
                let mut p = vec![0.0; degree + 1];
                legendre_array(degree, x, &mut p);
                p
            })
            .collect();
        Angular { nodes, weights, pls, lmax: degree }
    }

    /// ∫_{-1}^{1} e^{i s z c} F(c) dc = Σ C_L 2 i^L s^L j_L(z).
    fn fourier(&self, f: &[Complex64], s: f64, z: f64) -> Complex64 {
        let c = project(f, &self.pls, &self.weights, self.lmax);
        let mut jb = vec![0.0; self.lmax + 1];
        sph_j_array(self.lmax, z, &mut jb);
        let mut sg = 1.0;
        let mut acc = ZERO;
        for l in 0..=self.lmax {
            acc += c[l] * i_pow(l as i64) * (2.0 * sg * jb[l]);
            sg *= s;
        }
        acc
    }

    fn mean(&self, f: &[Complex64]) -> Complex64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * *w).sum()
    }
}

fn zero_sample(cfg: &CollinearConfig, kind: NsdKind, w: ShellWindow, near: bool) -> NsdSample {
    NsdSample::from_shells(cfg.clone(), kind, w, vec![ZERO; (w.j_max - w.j_min + 1) as usize], near)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu2Part {
    Nu2_1,
    Nu2_2,
}

/// ν₂¹(k,l,m) = ∫ e^{-ix.k} e^{i(|l|+|m|)|x|}/|x|² ψ₁(x,l) ψ₁(x,m) dx, or
/// ν₂²(k,a,b) = ∫ e^{ix.a} e^{i|x|(-|k|+|b|)}/|x|² conj(ψ₁(x,k)) ψ₁(x,b) dx.
pub fn mu2_sample(t: &EigenfunctionTable, cfg: &CollinearConfig, which: Mu2Part, w: ShellWindow) -> Result<NsdSample> {
    cfg.validate(3)?;
    let [k, a, b] = [cfg.magnitudes[0], cfg.magnitudes[1], cfg.magnitudes[2]];
    let cut = 2f64.powi(-w.j_max);
    let (kind, near, wave_idx, plane_idx, radial_phase) = match which {
        Mu2Part::Nu2_1 => (NsdKind::Nu2_1, (k - a - b).abs() < cut, [1usize, 2], 0usize, a + b),
        Mu2Part::Nu2_2 => (NsdKind::Nu2_2, (k + a - b).abs() < cut || (k - a - b).abs() < cut, [0, 2], 1, b - k),
    };
    for &i in &wave_idx {
        check_kappa(t, cfg.magnitudes[i])?;
    }
    if t.potential.is_zero() {
        return Ok(zero_sample(cfg, kind, w, near));
    }
    let s1 = t.state(cfg.magnitudes[wave_idx[0]])?;
    let s2 = t.state(cfg.magnitudes[wave_idx[1]])?;
    let ang = Angular::new(s1.l_max() + s2.l_max() + 2);
    let conj_first = which == Mu2Part::Nu2_2;
    // plane wave e^{∓i r |k| s c}: ν₂¹ carries e^{-ix.k}, ν₂² carries e^{ix.a}
    let plane_sign = if which == Mu2Part::Nu2_1 { -cfg.s(0) } else { cfg.s(1) };
    let plane = cfg.magnitudes[plane_idx];
    let (sa, sb) = (cfg.s(wave_idx[0]), cfg.s(wave_idx[1]));
    let f = |r: f64| {
        let mut f1 = psi1_on_nodes(&s1.psi1_coefficients(r), sa, &ang.pls);
        if conj_first {
            f1.iter_mut().for_each(|v| *v = v.conj());
        }
        let f2 = psi1_on_nodes(&s2.psi1_coefficients(r), sb, &ang.pls);
        let prod: Vec<Complex64> = f1.iter().zip(&f2).map(|(x, y)| x * y).collect();
        ang.fourier(&prod, plane_sign, plane * r) * Complex64::from_polar(2.0 * PI, radial_phase * r)
    };
    let omega = 2.0 * (k + a + b);
    let shells = window_shells(w, 1.6 / omega, f);
    Ok(NsdSample::from_shells(cfg.clone(), kind, w, shells, near))
}

/// μ₃(k,l,m) = ∫ e^{i(-|k|+|l|+|m|)|x|}/|x|³ conj(ψ₁(x,k)) ψ₁(x,l) ψ₁(x,m) dx.
pub fn mu3_sample(t: &EigenfunctionTable, cfg: &CollinearConfig, w: ShellWindow) -> Result<NsdSample> {
    cfg.validate(3)?;
    let [k, l, m] = [cfg.magnitudes[0], cfg.magnitudes[1], cfg.magnitudes[2]];
    for &x in &cfg.magnitudes {
        check_kappa(t, x)?;
    }
    let near = (k - l - m).abs() < 2f64.powi(-w.j_max);
    if t.potential.is_zero() {
        return Ok(zero_sample(cfg, NsdKind::Mu3, w, near));
    }
    let states = [t.state(k)?, t.state(l)?, t.state(m)?];
    let deg: usize = states.iter().map(|s| s.l_max()).sum();
    let ang = Angular::new(deg);
    let f = |r: f64| {
        let mut prod = vec![Complex64::new(1.0, 0.0); ang.nodes.len()];
        for (i, s) in states.iter().enumerate() {
            let v = psi1_on_nodes(&s.psi1_coefficients(r), cfg.s(i), &ang.pls);
            for (p, x) in prod.iter_mut().zip(v) {
                *p *= if i == 0 { x.conj() } else { x };
            }
        }
        ang.mean(&prod) * Complex64::from_polar(2.0 * PI / r, (l + m - k) * r)
    };
    let omega = 2.0 * (k + l + m);
    let shells = window_shells(w, 1.6 / omega, f);
    Ok(NsdSample::from_shells(cfg.clone(), NsdKind::Mu3, w, shells, near))
}

/// Decay exponent of the integrand envelope: the shell-averaged |integrand|
/// (without the r² measure) falls like r^{-a}; returns the fitted a over
/// the shells J_min+1..=J_max.
pub fn integrand_decay_exponent(t: &EigenfunctionTable, kind: NsdKind, cfg: &CollinearConfig, w: ShellWindow) -> Result<f64> {
    let mut logs = Vec::new();
    let q = cfg.magnitudes[1];
    let states: Vec<ScatteringState> = match kind {
        NsdKind::Nu1 => vec![t.state(q)?],
        _ => cfg.magnitudes.iter().map(|&x| t.state(x)).collect::<Result<Vec<_>>>()?,
    };
    let power = match kind {
        NsdKind::Nu1 => 1,
        NsdKind::Nu2_1 | NsdKind::Nu2_2 => 2,
        _ => 3,
    };
    let n_psi = match kind {
        NsdKind::Nu1 => 1,
        NsdKind::Nu2_1 | NsdKind::Nu2_2 => 2,
        _ => 3,
    };
    for j in (w.j_min + 1)..=w.j_max {
        let (lo, hi) = (cutoff::OUTER * 2f64.powi(j - 1), cutoff::INNER * 2f64.powi(j));
        let n = 64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let mut prod = 1.0;
            for s in states.iter().cycle().take(n_psi) {
                prod *= s.psi1(r, 1.0)?.norm();
            }
            acc += prod / r.powi(power);
        }
        logs.push(((lo * hi).sqrt(), acc / n as f64));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = logs.into_iter().unzip();
    Ok(-crate::dft::loglog_slope(&x, &y))
}

/// Result of the product-route check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRoute {
    /// F̃(F̃⁻¹g · F̃⁻¹h) on the table's KGrid.
    pub product: SpectralProfile,
    /// Sample frequencies and the independent reference values there.
    pub sample_kappas: Vec<f64>,
    pub reference: Vec<Complex64>,
    /// max |product - reference| / max |reference|.
    pub residual: f64,
}

/// Number of frequencies sampled by the product-route check.
pub const PRODUCT_SAMPLES: usize = 16;

/// Computes F̃(F̃⁻¹g · F̃⁻¹h), which pairs g ⊗ h with μ without forming μ,
/// and compares it at 16 frequencies against an independent reference:
/// the flat convolution (2π)^{-3/2}(g*h) when V = 0, otherwise a direct
/// quadrature over x with fully assembled eigenfunctions.
pub fn product_route_identity(t: &EigenfunctionTable, g: &SpectralProfile, h: &SpectralProfile) -> Result<ProductRoute> {
    let gx = inverse_dft(t, g)?;
    let hx = inverse_dft(t, h)?;
    let prod = ProfileGrid { grid: gx.grid, values: gx.values.iter().zip(&hx.values).map(|(a, b)| a * b).collect() };
    let product = forward_dft(t, &prod)?;
    let n = t.kgrid.len();
    let idx: Vec<usize> = (0..PRODUCT_SAMPLES).map(|i| ((i + 1) * (n - 1)) / (PRODUCT_SAMPLES + 1)).collect();
    let sample_kappas: Vec<f64> = idx.iter().map(|&j| t.kgrid.kappa(j)).collect();
    let reference = if t.potential.is_zero() {
        sample_kappas.iter().map(|&k| flat_convolution(g, h, k)).collect()
    } else {
        direct_pairing(t, g, h, &sample_kappas)?
    };
    let scale = reference.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = idx.iter().zip(&reference).map(|(&j, r)| (product.values[j] - r).norm()).fold(0.0, f64::max);
    let residual = if scale > 0.0 { diff / scale } else { diff };
    Ok(ProductRoute { product, sample_kappas, reference, residual })
}

/// Local Lagrange interpolation of a radial spectral profile, extended
/// evenly through κ = 0 and by zero beyond κ_max.
pub fn profile_at(g: &SpectralProfile, kappa: f64) -> Complex64 {
    let kg = &g.kgrid;
    let x = kappa.abs();
    if x > kg.kappa_max {
        return ZERO;
    }
    let n = g.values.len();
    let mirror = kg.starts_at_spacing();
    let off = if mirror { n } else { 0 };
    let len = off + n;
    // merged node i: mirrored -kappa(n-1-i) for i < off, then kappa(i - off)
    let node = |i: usize| -> (f64, Complex64) {
        if i < off {
            (-kg.kappa(n - 1 - i), g.values[n - 1 - i])
        } else {
            (kg.kappa(i - off), g.values[i - off])
        }
    };
    let pos = ((x - kg.kappa_min) / kg.dk()).floor().max(-1.0) as i64 + off as i64;
    let start = (pos - 2).clamp(0, len as i64 - 6) as usize;
    let (xs, ys): (Vec<f64>, Vec<Complex64>) = (start..start + 6).map(node).unzip();
    lagrange_at(&xs, &ys, x)
}

fn lagrange_at(xs: &[f64], ys: &[Complex64], x: f64) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += ys[i] * w;
    }
    acc
}

/// (2π)^{-3/2} ∫ g(l) h(k - l) dl for radial g, h:
/// (2π)^{-1/2} ∫ l² g(l) ∫_{-1}^{1} h(√(k² + l² - 2klt)) dt dl.
pub fn flat_convolution(g: &SpectralProfile, h: &SpectralProfile, kappa: f64) -> Complex64 {
    let kmax = g.kgrid.kappa_max;
    let (ls, wl) = gl_breakpoints(&[0.0, kmax], 0.25, 16);
    let (ts, wt) = gauss_legendre(64);
    let total: Complex64 = ls
        .iter()
        .zip(&wl)
        .map(|(&l, &w)| {
            let gl = profile_at(g, l);
            let inner: Complex64 =
                ts.iter().zip(&wt).map(|(&t, &wti)| profile_at(h, (kappa * kappa + l * l - 2.0 * kappa * l * t).max(0.0).sqrt()) * wti).sum();
            gl * inner * (w * l * l)
        })
        .sum();
    total / (2.0 * PI).sqrt()
}

/// Direct quadrature of (2π)^{-3/2} ∫ conj ψ(x,k) G(x) H(x) dx with
/// G = (2π)^{-3/2} ∫ ψ(x,l) g(|l|) dl, every angular integral done over the
/// full Legendre series of ψ.
fn direct_pairing(t: &EigenfunctionTable, g: &SpectralProfile, h: &SpectralProfile, ks: &[f64]) -> Result<Vec<Complex64>> {
    let p = &t.potential;
    let kmax = t.kgrid.kappa_max;
    let (ls, wl) = gl_breakpoints(&[t.kgrid.kappa_min, kmax], 0.5, 8);
    let r_top = 16.0f64.min(t.grid.r_max);
    let (rs, wr) = gl_breakpoints(&[0.0, r_top], 0.5, 8);
    let lmax_of = |k: f64| crate::radialwave::l_max_rule(p, k);
    let states = ls.iter().map(|&l| ScatteringState::new(p, l, &t.grid, lmax_of(l))).collect::<Result<Vec<_>>>()?;
    // angular mean (1/2)∫ψ dc at radius r for one state
    let mean_psi = |s: &ScatteringState, r: f64| -> Result<Complex64> {
        let n = (s.kappa * r).ceil() as usize + 24;
        let (cs, wc) = gauss_legendre(n);
        let mut acc = ZERO;
        for (c, w) in cs.iter().zip(&wc) {
            acc += s.psi(r, *c)? * *w;
        }
        Ok(acc / 2.0)
    };
    let norm = (2.0 * PI).powf(-1.5);
    let gh: Vec<Complex64> = rs
        .par_iter()
        .map(|&r| {
            let mut gr = ZERO;
            let mut hr = ZERO;
            for ((s, &l), &w) in states.iter().zip(&ls).zip(&wl) {
                let m = mean_psi(s, r)? * (4.0 * PI * l * l * w);
                gr += m * profile_at(g, l);
                hr += m * profile_at(h, l);
            }
            Ok(gr * hr * norm * norm)
        })
        .collect::<Result<Vec<_>>>()?;
    ks.iter()
        .map(|&k| {
            let s = ScatteringState::new(p, k, &t.grid, lmax_of(k))?;
            let mut acc = ZERO;
            for ((&r, &w), v) in rs.iter().zip(&wr).zip(&gh) {
                acc += mean_psi(&s, r)?.conj() * v * (4.0 * PI * r * r * w);
            }
            Ok(acc * norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_for_eps() {
        assert_eq!(ShellWindow::for_eps(0.0125).j_max, 15);
        assert_eq!(ShellWindow::for_eps(1.0).j_max, 8);
        assert_eq!(ShellWindow::for_eps(4.0).j_max, 7);
    }

    #[test]
    fn lagrange_reproduces_quintic() {
        let xs = [0.0, 0.5, 1.1, 1.5, 2.0, 3.0];
        let f = |x: f64| 1.0 - x + 0.3 * x.powi(5);
        let ys: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        assert!((lagrange_at(&xs, &ys, 1.7).re - f(1.7)).abs() < 1e-12);
    }
}
