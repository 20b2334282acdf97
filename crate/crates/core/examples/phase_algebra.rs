//! Phase identities at a point, random checks, and the near-diagonal lower bound.

use dspec::bilinear::{identity_residuals, near_diagonal_check, phase_algebra, random_identity_check, PhasePoint};

fn main() -> dspec::Result<()> {
    let pt = PhasePoint { k: [0.3, -1.1, 0.4], l: [1.0, 0.5, -0.2], m: [-0.7, 0.2, 0.9] };
    let a = phase_algebra(&pt)?;
    println!("phi {:.6} psi {:.6} X phi {:.6}", a.phi, a.psi, a.x_phi);
    println!("residuals at the point {:?}", identity_residuals(&pt)?);
    println!("max residuals over 1e4 points {:?}", random_identity_check(10_000, 7));
    let nd = near_diagonal_check(2_000, 7);
    println!("near-diagonal: {} samples, min |phi|/|l|^2 = {:.4}", nd.samples, nd.min_ratio);
    Ok(())
}
