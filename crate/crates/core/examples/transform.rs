//! Forward and inverse distorted transform of a Gaussian, and the transform suite.

use dspec::dft::{apply_h, forward_dft, inverse_dft, transform_suite, ProfileGrid};
use dspec::radialwave::EigenfunctionTable;
use dspec::{KGrid, RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let p = RadialPotential::gaussian(2.0, 1.0, 12.0);
    let t = EigenfunctionTable::build(&p, RadialGrid::new(40.0, 3200), KGrid::from_zero(8.0, 160), None)?;
    let f = ProfileGrid::from_real(t.grid, |r| (-r * r / 2.0).exp());
    let g = forward_dft(&t, &f)?;
    println!("|f| {:.10} |F f| {:.10}", f.l2(), g.l2());
    let back = inverse_dft(&t, &g)?;
    println!("round trip {:.3e}", back.sub(&f).l2() / f.l2());
    let hf = forward_dft(&t, &apply_h(&p, &f))?;
    for j in [10, 40, 80] {
        let k = t.kgrid.kappa(j);
        println!("kappa {k:.2}: F(Hf) {:.6e} kappa^2 F f {:.6e}", hf.values[j], g.values[j] * k * k);
    }
    println!("{:?}", transform_suite(&t, &[1.0, 1.5, 2.0])?);
    Ok(())
}
