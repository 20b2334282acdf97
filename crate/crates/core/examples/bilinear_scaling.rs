//! Operator-norm scaling of bilinear operators restricted to annuli of width 2^-j.

use dspec::bilinear::{annulus_grid, annulus_inputs, bench_out_grid, estimate_operator_scaling, AnnulusOperatorSpec};

fn main() -> dspec::Result<()> {
    let (g, h) = annulus_inputs(0, annulus_grid());
    let specs: Vec<AnnulusOperatorSpec> = (3..=6).map(|j| AnnulusOperatorSpec::new(j, 0)).collect();
    let est = estimate_operator_scaling(&specs, &g, &h, (2.0, f64::INFINITY), bench_out_grid())?;
    for (j, r) in est.j_values.iter().zip(&est.ratios) {
        println!("j {j}: ratio {r:.4}");
    }
    println!("slope {:.4} (rms {:.2e}), monotone {}", est.fitted_slope, est.fit_residual, est.monotone);
    Ok(())
}
