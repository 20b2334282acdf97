//! The singular part of nu_1 on the circle |p| = |q|: ladder, fit and the b0 prediction.

use dspec::nsd::{fit_singular_structure, nu1_ladder};
use dspec::radialwave::EigenfunctionTable;
use dspec::{KGrid, RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let p = RadialPotential::gaussian(2.0, 1.0, 12.0);
    let t = EigenfunctionTable::build(&p, RadialGrid::new(40.0, 3200), KGrid::from_zero(5.0, 100), None)?;
    let ladder = nu1_ladder(&t, 1.0, 1, &[0.1, 0.05, 0.025, 0.0125])?;
    for (i, e) in ladder.eps.iter().enumerate() {
        println!("eps {e:<7} nu1(1+eps) {:.4} nu1(1-eps) {:.4}", ladder.plus[i].value, ladder.minus[i].value);
    }
    let fit = fit_singular_structure(&t, &ladder)?;
    println!("p.v. coefficient {:.6}", fit.pv_coefficient);
    println!("b0/|p| prediction {:.6}", fit.b0_predicted);
    println!("relative error {:.3e}, Richardson spread {:.3e}", fit.relative_error, fit.spread);
    Ok(())
}
