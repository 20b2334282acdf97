//! A short nonlinear run with both integrators and the bootstrap diagnostics.

use dspec::evolve::{bootstrap_report, evolve, initial_data, relative_gap, EvolveConfig, Method};
use dspec::radialwave::EigenfunctionTable;
use dspec::{KGrid, RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let p = RadialPotential::gaussian(2.0, 1.0, 12.0);
    let t = EigenfunctionTable::build(&p, RadialGrid::new(40.0, 1600), KGrid::from_zero(3.0, 375), None)?;
    let cfg = EvolveConfig { dt: 0.025, t_final: 20.0, ..EvolveConfig::default() };
    let u0 = initial_data(&t, &cfg);
    let rk = evolve(&t, &u0, &cfg)?;
    for r in rk.norm_trace.rows.iter().step_by(4) {
        println!("t {:5.1} sobolev {:.5e} w1 {:.5e} sup {:.4e}", r.t, r.sobolev, r.w1, r.sup_u);
    }
    let strang = evolve(&t, &u0, &EvolveConfig { method: Method::SplitStepStrang, ..cfg.clone() })?;
    println!("RK4 vs Strang at t = {}: {:.3e}", cfg.t_final, relative_gap(rk.final_profile(), strang.final_profile()));
    let rep = bootstrap_report(&rk);
    println!("sobolev ratio {:.4}, w1 ratio {:.4}, sup exponent {:.3}", rep.sobolev_ratio, rep.w1_ratio, rep.sup_decay_exponent);
    Ok(())
}
