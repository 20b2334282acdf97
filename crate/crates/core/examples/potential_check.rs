//! Decay moments and the bound-state / resonance diagnostic for a few potentials.

use dspec::potential::{decay_moments, detect_bound_states};
use dspec::{RadialGrid, RadialPotential};

fn main() -> dspec::Result<()> {
    let grid = RadialGrid::new(40.0, 3200);
    for p in [
        RadialPotential::gaussian(2.0, 1.0, 12.0),
        RadialPotential::exponential(1.0, 1.0, 20.0),
        RadialPotential::gaussian(-3.0, 1.0, 12.0),
    ] {
        let moments = decay_moments(&p, &[0, 2, 4])?;
        let diag = detect_bound_states(&p, 3, &grid);
        println!("{:?} amplitude {}", p.kind, p.amplitude);
        println!("  moments {:?}", moments.moments);
        println!("  bound states per l {:?}, generic {}", diag.bound_state_counts, diag.is_generic);
    }
    Ok(())
}
