//! Command-line entry point.

use clap::{Parser, Subcommand, ValueEnum};
use dspec::acceptance::run_all;
use dspec::bilinear::{annulus_grid, annulus_inputs, bench_out_grid, estimate_operator_scaling, linear_fit, AnnulusOperatorSpec};
use dspec::cache::{load_or_build, table_hash};
use dspec::config::{parse_norms, RunConfig};
use dspec::dft::{decay_scan, forward_dft, transform_suite, ProfileGrid};
use dspec::evolve::{bootstrap_report, evolve, initial_data, EvolveConfig};
use dspec::io::{json_string, loglog_svg, write_csv, write_json, write_spectrum, write_svg, Series};
use dspec::nsd::{fit_singular_structure, mu2_sample, mu3_sample, nu1_ladder, CollinearConfig, Mu2Part, ShellWindow};
use dspec::potential::{decay_moments, detect_bound_states};
use dspec::radialwave::EigenfunctionTable;
use dspec::{DspecError, Result};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dspec", version, about = "Distorted Fourier transform toolkit")]
struct Cli {
    /// Run configuration (JSON). Defaults to the shipped configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Nu1,
    #[value(name = "nu2-1")]
    Nu21,
    #[value(name = "nu2-2")]
    Nu22,
    Mu3,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decay moments and bound-state diagnostic of the potential.
    PotentialCheck {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds the eigenfunction table, or loads it from the cache.
    EigenTable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes phase shifts per partial wave and frequency.
    DumpEigenfunctions {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plancherel, round-trip, diagonalization and decay exponents.
    DftCheck {
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of the transform of e^{-r²/2}.
        #[arg(long)]
        dump_spectrum: Option<PathBuf>,
    },
    /// Samples an NSD component on a symmetric ladder around the center.
    NsdScan {
        #[arg(long, value_enum, default_value = "nu1")]
        kind: Kind,
        #[arg(long)]
        center: Option<f64>,
        /// Comma-separated ε values.
        #[arg(long)]
        eps_ladder: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Singular-structure fit (nu1 only).
        #[arg(long)]
        fit_out: Option<PathBuf>,
    },
    /// Fits the p.v. coefficient of ν₁ and compares it with b₀/|p|.
    NsdFit {
        #[arg(long)]
        center: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator-norm scaling of annulus-restricted bilinear operators.
    BilinearBench {
        /// "j_min:j_max".
        #[arg(long)]
        j_range: Option<String>,
        #[arg(long)]
        shell: Option<i32>,
        /// "p,q" with "inf" allowed.
        #[arg(long)]
        norms: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nonlinear evolution with norm trace, snapshots and a plot.
    Evolve {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Report JSON (stdout when absent).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Runs the acceptance suite and emits one JSON verdict.
    Acceptance {
        /// Comma-separated criterion numbers.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Loads the config; `evolve` also accepts a bare evolve run section.
fn load_config(path: Option<&Path>, evolve_cmd: bool) -> Result<RunConfig> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| DspecError::Config(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    if evolve_cmd && v.get("potential").is_none() {
        let run: EvolveConfig = serde_json::from_value(v)?;
        let mut c = RunConfig::default();
        c.evolve.run = run;
        c.validate()?;
        return Ok(c);
    }
    RunConfig::from_json(&text)
}

fn emit<T: Serialize>(out: Option<&Path>, hash: &str, report: &T) -> Result<()> {
    match out {
        Some(p) => write_json(p, hash, report),
        None => {
            print!("{}", json_string(hash, report)?);
            Ok(())
        }
    }
}

fn default_path(cfg: &RunConfig, out: Option<PathBuf>, name: &str) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.dir.join(name))
}

fn table(cfg: &RunConfig) -> Result<EigenfunctionTable> {
    Ok(load_or_build(&cfg.output.cache_dir, &cfg.potential, &cfg.grids)?.0)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| DspecError::Config(format!("'{x}': {e}")))).collect()
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load_config(cli.config.as_deref(), matches!(cli.cmd, Cmd::Evolve { .. }))?;
    match cli.cmd {
        Cmd::PotentialCheck { out } => {
            let hash = cfg.hash();
            let decay = decay_moments(&cfg.potential, &[0, 1, 2, 3, 4])?;
            let spectral = detect_bound_states(&cfg.potential, 3, &cfg.grids.radial());
            let ok = spectral.is_generic && !decay.diverged;
            emit(out.as_deref(), &hash, &json!({ "potential": cfg.potential, "decay": decay, "spectral": spectral, "passed": ok }))?;
            Ok(ok)
        }
        Cmd::EigenTable { out } => {
            let hash = cfg.hash();
            let (t, hit) = load_or_build(&cfg.output.cache_dir, &cfg.potential, &cfg.grids)?;
            let path = dspec::cache::cache_path(&cfg.output.cache_dir, &cfg.potential, &cfg.grids);
            let report = json!({
                "cache_hit": hit,
                "cache_path": path,
                "table_hash": table_hash(&t),
                "n_kappa": t.kgrid.len(),
                "l_max": t.l_max,
            });
            emit(out.as_deref(), &hash, &report)?;
            Ok(true)
        }
        Cmd::DumpEigenfunctions { out } => {
            let hash = cfg.hash();
            let t = table(&cfg)?;
            let mut rows = Vec::new();
            for ell in 0..=t.l_max {
                for j in 0..t.kgrid.len() {
                    rows.push(vec![ell as f64, t.kgrid.kappa(j), t.phase_shift(ell, j)]);
                }
            }
            write_csv(&default_path(&cfg, out, "eigenfunctions.csv"), &hash, &["ell", "kappa", "phase_shift"], &rows)?;
            Ok(true)
        }
        Cmd::DftCheck { out, dump_spectrum } => {
            let hash = cfg.hash();
            let t = EigenfunctionTable::build(&cfg.potential, cfg.transform.radial(), cfg.transform.kgrid(), cfg.transform.l_max)?;
            let s = transform_suite(&t, &[1.0, 1.5, 2.0])?;
            if let Some(p) = dump_spectrum {
                let f = ProfileGrid::from_real(t.grid, |r| (-r * r / 2.0).exp());
                write_spectrum(&p, &hash, &forward_dft(&t, &f)?)?;
            }
            let d = &cfg.decay;
            let td = EigenfunctionTable::build(&cfg.potential, d.grids.radial(), d.grids.kgrid(), d.grids.l_max)?;
            let w = d.data_width;
            let f = ProfileGrid::from_real(td.grid, |r| (-r * r / (2.0 * w * w)).exp());
            let scan = decay_scan(&td, &f, &d.times(), d.out_grid())?;
            let ok = s.plancherel_err < 1e-4 && s.roundtrip_err < 1e-4 && s.diag_err < 1e-3;
            let report = json!({
                "plancherel_err": s.plancherel_err,
                "roundtrip_err": s.roundtrip_err,
                "diag_err": s.diag_err,
                "decay_exponents": { "sup": scan.sup_exponent, "l6": scan.l6_exponent },
                "passed": ok,
            });
            emit(out.as_deref(), &hash, &report)?;
            Ok(ok)
        }
        Cmd::NsdScan { kind, center, eps_ladder, out, fit_out } => {
            if let Some(c) = center {
                cfg.nsd.center = c;
            }
            if let Some(e) = eps_ladder {
                cfg.nsd.eps_ladder = parse_list(&e)?;
            }
            cfg.validate()?;
            let hash = cfg.hash();
            let t = table(&cfg)?;
            let k0 = cfg.nsd.center;
            let eps = cfg.nsd.eps_ladder.clone();
            let mut rows = Vec::new();
            let mut ok = true;
            if let Kind::Nu1 = kind {
                let ladder = nu1_ladder(&t, k0, 1, &eps)?;
                for (i, e) in eps.iter().enumerate() {
                    for (side, s) in [(1.0, &ladder.plus[i]), (-1.0, &ladder.minus[i])] {
                        rows.push(vec![side * e, k0 + side * e, s.value.re, s.value.im]);
                    }
                }
                if let Some(p) = fit_out {
                    let fit = fit_singular_structure(&t, &ladder)?;
                    ok = fit.relative_error <= 0.05 && fit.spread <= 0.25;
                    write_json(&p, &hash, &fit)?;
                }
            } else {
                let w = ShellWindow::for_eps(eps.iter().cloned().fold(f64::INFINITY, f64::min));
                for e in eps.iter().flat_map(|&e| [-e, e]) {
                    let c = CollinearConfig::triple(k0 + e, k0, 0.8 * k0, [1, 1, -1]);
                    let s = match kind {
                        Kind::Nu21 => mu2_sample(&t, &c, Mu2Part::Nu2_1, w)?,
                        Kind::Nu22 => mu2_sample(&t, &c, Mu2Part::Nu2_2, w)?,
                        _ => mu3_sample(&t, &c, w)?,
                    };
                    rows.push(vec![e, k0 + e, s.value.re, s.value.im]);
                }
            }
            write_csv(&default_path(&cfg, out, "nsd_scan.csv"), &hash, &["eps", "kappa", "re", "im"], &rows)?;
            Ok(ok)
        }
        Cmd::NsdFit { center, out } => {
            if let Some(c) = center {
                cfg.nsd.center = c;
            }
            cfg.validate()?;
            let hash = cfg.hash();
            let t = table(&cfg)?;
            let fit = fit_singular_structure(&t, &nu1_ladder(&t, cfg.nsd.center, 1, &cfg.nsd.eps_ladder)?)?;
            let ok = fit.relative_error <= 0.05 && fit.spread <= 0.25;
            write_json(&default_path(&cfg, out, "fit.json"), &hash, &fit)?;
            Ok(ok)
        }
        Cmd::BilinearBench { j_range, shell, norms, out } => {
            if let Some(r) = j_range {
                let (a, b) = r.split_once(':').ok_or_else(|| DspecError::Config(format!("j-range '{r}' must be 'a:b'")))?;
                let p = |x: &str| x.trim().parse::<i32>().map_err(|e| DspecError::Config(format!("j-range '{x}': {e}")));
                cfg.bilinear.j_min = p(a)?;
                cfg.bilinear.j_max = p(b)?;
            }
            if let Some(l) = shell {
                cfg.bilinear.shell = l;
            }
            if let Some(n) = norms {
                cfg.bilinear.norms = n;
            }
            cfg.validate()?;
            let hash = cfg.hash();
            let b = &cfg.bilinear;
            let (g, h) = annulus_inputs(b.shell, annulus_grid());
            let specs: Vec<AnnulusOperatorSpec> = (b.j_min..=b.j_max).map(|j| AnnulusOperatorSpec::new(j, b.shell)).collect();
            let est = estimate_operator_scaling(&specs, &g, &h, parse_norms(&b.norms)?, bench_out_grid())?;
            let x: Vec<f64> = est.j_values.iter().map(|&j| j as f64).collect();
            let y: Vec<f64> = est.ratios.iter().map(|r| r.log2()).collect();
            let rows: Vec<Vec<f64>> = (0..x.len())
                .map(|i| vec![x[i], est.ratios[i], if i == 0 { f64::NAN } else { linear_fit(&x[..=i], &y[..=i]).0 }])
                .collect();
            write_csv(&default_path(&cfg, out, "slopes.csv"), &hash, &["j", "ratio", "slope_so_far"], &rows)?;
            emit(None, &hash, &est)?;
            Ok((-1.25..=-0.75).contains(&est.fitted_slope))
        }
        Cmd::Evolve { out, snapshots, svg, report } => {
            let hash = cfg.hash();
            let g = &cfg.evolve.grids;
            let t = EigenfunctionTable::build(&cfg.potential, g.radial(), g.kgrid(), g.l_max)?;
            let run = &cfg.evolve.run;
            let traj = evolve(&t, &initial_data(&t, run), run)?;
            let rows: Vec<Vec<f64>> = traj.norm_trace.rows.iter().map(|r| vec![r.t, r.sobolev, r.w1, r.w2, r.sup_u, r.l6_u]).collect();
            write_csv(&default_path(&cfg, out, "traj.csv"), &hash, &["t", "sobolev", "w1", "w2", "sup_u", "l6_u"], &rows)?;
            if let Some(dir) = snapshots {
                for (time, f) in &traj.snapshots {
                    write_spectrum(&dir.join(format!("snapshot_t{time:09.3}.csv")), &hash, f)?;
                }
            }
            if let Some(p) = svg {
                let col = |i: usize| Series {
                    name: ["sobolev", "w1", "w2", "sup_u", "l6_u"][i - 1],
                    points: rows.iter().map(|r| (r[0], r[i])).collect(),
                };
                write_svg(&p, &loglog_svg(&hash, "norm trace", &(1..=5).map(col).collect::<Vec<_>>()))?;
            }
            let rep = bootstrap_report(&traj);
            emit(report.as_deref(), &hash, &rep)?;
            Ok(rep.passed)
        }
        Cmd::Acceptance { only, out } => {
            let hash = cfg.hash();
            let only: Vec<u8> = match only {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<u8>().map_err(|e| DspecError::Config(format!("criterion '{x}': {e}"))))
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let rep = run_all(&cfg, &only, |c| eprintln!("{}", c.line()))?;
            emit(out.as_deref(), &hash, &rep)?;
            Ok(rep.passed)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("DSPEC_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("{}", json!({ "error": "config", "message": format!("DSPEC_THREADS='{n}' is not a positive integer") }));
                return ExitCode::from(2);
            }
        }
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(if e.is_guard() { 2 } else { 1 })
        }
    }
}
