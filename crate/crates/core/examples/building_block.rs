//! The dyadic building block: closed form for a constant symbol and the leading term.

use dspec::nsd::{building_block, building_block_constant, building_block_leading, BlockSymbol, CollinearConfig};
use dspec::radialwave::EigenfunctionTable;
use dspec::{KGrid, RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let p = RadialPotential::gaussian(2.0, 1.0, 12.0);
    let t = EigenfunctionTable::build(&p, RadialGrid::new(40.0, 3200), KGrid::from_zero(5.0, 100), None)?;
    let c = CollinearConfig::pair(1.0, 1.2, 1, 1);
    for j in 2..=6 {
        let num = building_block(&t, j, &c, BlockSymbol::ConstantOne)?;
        println!("J {j}: quadrature {:.8} closed form {:.8}", num, building_block_constant(j, 1.0, 1.2));
    }
    let c = CollinearConfig::pair(1.0, 1.0, 1, 1);
    for j in [4, 6, 8] {
        let full = building_block(&t, j, &c, BlockSymbol::G0FromTable)?;
        let lead = building_block_leading(&t, j, &c, BlockSymbol::G0FromTable)?;
        println!("J {j}: full {full:.4} leading {lead:.4} rel {:.3e}", (full - lead).norm() / lead.norm());
    }
    Ok(())
}
