//! Sup and L6 decay of the linear flow, with and without the potential.

use dspec::dft::{decay_scan, ProfileGrid};
use dspec::radialwave::EigenfunctionTable;
use dspec::{KGrid, RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let times: Vec<f64> = (0..12).map(|i| 5.0 * 20f64.powf(i as f64 / 11.0)).collect();
    for p in [RadialPotential::zero(), RadialPotential::gaussian(2.0, 1.0, 12.0)] {
        let t = EigenfunctionTable::build(&p, RadialGrid::new(40.0, 3200), KGrid::from_zero(5.0, 1000), None)?;
        let f = ProfileGrid::from_real(t.grid, |r| (-r * r / 2.0).exp());
        let s = decay_scan(&t, &f, &times, RadialGrid::new(400.0, 4000))?;
        println!("{:?}: sup exponent {:.4}, L6 exponent {:.4}", p.kind, s.sup_exponent, s.l6_exponent);
        for row in s.rows.iter().step_by(3) {
            println!("  t {:7.2}  sup {:.4e}  L6 {:.4e}", row.t, row.sup_norm, row.l6_norm);
        }
    }
    Ok(())
}
