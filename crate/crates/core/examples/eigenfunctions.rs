//! Phase shifts, the Lippmann-Schwinger residual and the far-field symbol.

use dspec::radialwave::{extract_g0, extract_psi1, lippmann_schwinger_residual, EigenfunctionTable};
use dspec::{KGrid, RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let p = RadialPotential::gaussian(2.0, 1.0, 12.0);
    let t = EigenfunctionTable::build(&p, RadialGrid::new(40.0, 3200), KGrid::from_zero(5.0, 100), None)?;
    println!("l_max {}", t.l_max);
    for j in [9, 19, 49, 99] {
        let k = t.kgrid.kappa(j);
        println!("kappa {k:.2}: delta_0 {:+.6} delta_1 {:+.6}", t.phase_shift(0, j), t.phase_shift(1, j));
    }
    let samples = [(0.5, 0.2, 0.7), (2.0, -0.9, 1.9), (6.0, 0.4, 4.1)];
    println!("LS residual {:.3e}", lippmann_schwinger_residual(&t, &samples)?);
    for r in [10.0, 20.0, 30.0] {
        println!("psi_1(r = {r}, c = -1, kappa = 1) = {:.6}", extract_psi1(&t, r, -1.0, 1.0)?.value);
    }
    println!("g_0(c = -1, kappa = 1) = {:.6}", extract_g0(&p, &t, -1.0, 1.0)?);
    Ok(())
}
