//! Run configuration: one JSON document covering every module, validated at
//! load against the resolution guards.

use crate::error::{DspecError, Result};
use crate::evolve::EvolveConfig;
use crate::grid::{KGrid, RadialGrid};
use crate::nsd::ShellWindow;
use crate::potential::RadialPotential;
use crate::radialwave::validate_grids;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// The shipped default, also embedded at compile time.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.json");

/// A radial grid paired with a frequency grid starting at its spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub n_r: usize,
    pub kappa_max: f64,
    pub n_k: usize,
    #[serde(default)]
    pub kappa_min: Option<f64>,
    #[serde(default)]
    pub l_max: Option<usize>,
}

impl GridConfig {
    pub fn radial(&self) -> RadialGrid {
        RadialGrid::new(self.r_max, self.n_r)
    }

    /// Uniform nodes from kappa_min (default: the spacing) to kappa_max.
    pub fn kgrid(&self) -> KGrid {
        match self.kappa_min {
            Some(k0) => KGrid::new(k0, self.kappa_max, self.n_k),
            None => KGrid::from_zero(self.kappa_max, self.n_k),
        }
    }

    pub fn validate(&self, p: &RadialPotential, what: &str) -> Result<()> {
        validate_grids(p, &self.radial(), &self.kgrid()).map_err(|e| DspecError::Config(format!("{what} grids: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub grids: GridConfig,
    pub out_r_max: f64,
    pub out_n_r: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_times: usize,
    pub data_width: f64,
}

impl DecayConfig {
    /// Geometric times from t_min to t_max.
    pub fn times(&self) -> Vec<f64> {
        let n = self.n_times.max(2);
        (0..n).map(|i| self.t_min * (self.t_max / self.t_min).powf(i as f64 / (n - 1) as f64)).collect()
    }

    pub fn out_grid(&self) -> RadialGrid {
        RadialGrid::new(self.out_r_max, self.out_n_r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsdConfig {
    pub j_min: i32,
    pub j_max: i32,
    pub center: f64,
    pub eps_ladder: Vec<f64>,
    /// Amplitude used for the weak-coupling halving check.
    pub weak_amplitude: f64,
}

impl NsdConfig {
    pub fn window(&self) -> Result<ShellWindow> {
        ShellWindow::new(self.j_min, self.j_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearConfig {
    pub j_min: i32,
    pub j_max: i32,
    pub shell: i32,
    /// Hölder exponents "p,q"; "inf" allowed.
    pub norms: String,
    /// Fixed j and the pair (L, L + 1) for the doubling check.
    pub doubling_j: i32,
    pub doubling_shell: i32,
}

/// Parses "p,q" with "inf" for ∞.
pub fn parse_norms(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(DspecError::Config(format!("norms '{s}' must be 'p,q'")));
    }
    let one = |x: &str| -> Result<f64> {
        let v = if x.eq_ignore_ascii_case("inf") { f64::INFINITY } else { x.parse::<f64>().map_err(|e| DspecError::Config(format!("norm '{x}': {e}")))? };
        if v < 1.0 {
            return Err(DspecError::Config(format!("norm exponent {v} below 1")));
        }
        Ok(v)
    };
    Ok((one(parts[0])?, one(parts[1])?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub grids: GridConfig,
    pub run: EvolveConfig,
    /// Cross-solver comparison step and horizon.
    pub cross_dt: f64,
    pub cross_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub cache_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: RadialPotential,
    /// Tables for eigenfunctions and the nonlinear spectral distribution.
    pub grids: GridConfig,
    /// Wider frequency range for the transform suite.
    pub transform: GridConfig,
    pub decay: DecayConfig,
    pub nsd: NsdConfig,
    pub bilinear: BilinearConfig,
    pub evolve: EvolveSection,
    pub output: OutputConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("shipped default config parses")
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| DspecError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    /// Every module's guards, named in the error message.
    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        self.grids.validate(&self.potential, "table")?;
        self.transform.validate(&self.potential, "transform")?;
        self.decay.grids.validate(&self.potential, "decay")?;
        self.evolve.grids.validate(&self.potential, "evolve")?;
        if self.decay.t_min < 2.0 || self.decay.t_max > 200.0 || self.decay.n_times < 5 || self.decay.t_max <= self.decay.t_min {
            return Err(DspecError::Config("decay: times must increase within [2, 200] with at least 5 samples".into()));
        }
        self.nsd.window().map_err(|e| DspecError::Config(format!("nsd window: {e}")))?;
        if self.nsd.eps_ladder.len() < 4 || self.nsd.eps_ladder.iter().any(|&e| !(e > 0.0)) {
            return Err(DspecError::Config("nsd: eps_ladder needs at least 4 positive values".into()));
        }
        if self.bilinear.j_max - self.bilinear.j_min < 3 {
            return Err(DspecError::Config("bilinear: need at least 4 values of j".into()));
        }
        parse_norms(&self.bilinear.norms)?;
        let k = self.evolve.grids.kappa_max;
        let ev = &self.evolve.run;
        for (dt, what) in [(ev.dt, "run"), (self.evolve.cross_dt, "cross-check")] {
            if dt * k * k > 0.5 {
                return Err(DspecError::Config(format!("evolve {what}: phase-resolution guard dt kappa_max^2 = {} > 0.5", dt * k * k)));
            }
        }
        if !(ev.eps0 > 0.0) || ev.eps0 > 0.05 {
            return Err(DspecError::Config(format!("evolve: eps0 = {} outside (0, 0.05]", ev.eps0)));
        }
        if !(ev.delta_n > 0.0 && ev.delta_n < 0.25) {
            return Err(DspecError::Config(format!("evolve: delta_n = {} outside (0, 1/4)", ev.delta_n)));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(self).expect("config serializes");
        hex_digest(s.as_bytes())
    }

    /// The same configuration with another potential.
    pub fn with_potential(&self, p: RadialPotential) -> Self {
        RunConfig { potential: p, ..self.clone() }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_validates() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.hash(), RunConfig::from_json(DEFAULT_CONFIG).unwrap().hash());
    }

    #[test]
    fn norms_parse() {
        assert_eq!(parse_norms("2,inf").unwrap(), (2.0, f64::INFINITY));
        assert!(parse_norms("2").is_err());
        assert!(parse_norms("0.5,2").is_err());
    }
}
