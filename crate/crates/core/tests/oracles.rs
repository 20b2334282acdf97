//! Numerical results checked against independent closed forms and
//! independently computed references.

use dspec::bilinear::{apply_regular_symbol_operator, regular_product_route, BilinearSymbol};
use dspec::dft::{decay_scan, forward_dft, inverse_dft, ProfileGrid, SpectralProfile};
use dspec::evolve::{evolve, initial_data, EvolveConfig};
use dspec::nsd::{building_block, building_block_constant, BlockSymbol, CollinearConfig};
use dspec::potential::eval_potential;
use dspec::radialwave::{solve_partial_wave, EigenfunctionTable};
use dspec::special::sph_j;
use dspec::{KGrid, RadialGrid, RadialPotential};
use num_complex::Complex64;

fn table(p: &RadialPotential, n_k: usize) -> EigenfunctionTable {
    EigenfunctionTable::build(p, RadialGrid::new(40.0, 3200), KGrid::from_zero(5.0, n_k), None).unwrap()
}

#[test]
fn free_transform_of_gaussian_is_gaussian() {
    let t = table(&RadialPotential::zero(), 100);
    let f = ProfileGrid::from_real(t.grid, |r| (-r * r / 2.0).exp());
    let g = forward_dft(&t, &f).unwrap();
    let worst = (0..t.kgrid.len())
        .map(|j| {
            let k = t.kgrid.kappa(j);
            (g.values[j] - Complex64::new((-k * k / 2.0).exp(), 0.0)).norm()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "max deviation {worst:e}");
}

#[test]
fn free_inverse_of_gaussian_is_gaussian() {
    let t = EigenfunctionTable::build(&RadialPotential::zero(), RadialGrid::new(40.0, 3200), KGrid::from_zero(8.0, 640), None).unwrap();
    let g = SpectralProfile::from_fn(t.kgrid, |k| Complex64::new((-k * k / 2.0).exp(), 0.0));
    let f = inverse_dft(&t, &g).unwrap();
    for (i, r) in t.grid.nodes().iter().enumerate().step_by(97).take(20) {
        assert!((f.values[i].re - (-r * r / 2.0).exp()).abs() < 1e-6, "r = {r}");
    }
}

/// Born approximation tan δ_l ≈ -κ ∫ V r² j_l(κr)² dr, by Simpson on a fine grid.
fn born_phase(p: &RadialPotential, l: usize, k: f64) -> f64 {
    let n = 20_000;
    let h = p.r_cut / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let r = i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let j = sph_j(l, k * r);
        s += w * eval_potential(p, r) * r * r * j * j;
    }
    -k * s * h / 3.0
}

#[test]
fn weak_potential_phase_shifts_follow_born() {
    let grid = RadialGrid::new(40.0, 3200);
    for a in [1e-3, -1e-3] {
        let p = RadialPotential::gaussian(a, 1.0, 12.0);
        for l in 0..3 {
            for k in [0.5, 1.5, 3.0] {
                let d = solve_partial_wave(&p, l, k, &grid).unwrap().phase_shift;
                let b = born_phase(&p, l, k);
                assert!((d - b).abs() <= 5e-3 * b.abs() + 1e-12, "l {l} k {k}: {d:e} vs Born {b:e}");
            }
        }
    }
}

#[test]
fn free_gaussian_sup_norm_matches_exact_spreading() {
    let t = table(&RadialPotential::zero(), 1000);
    let f = ProfileGrid::from_real(t.grid, |r| (-r * r / 2.0).exp());
    let times = [5.0, 10.0, 20.0, 40.0, 80.0];
    let scan = decay_scan(&t, &f, &times, RadialGrid::new(400.0, 4000)).unwrap();
    for row in &scan.rows {
        let exact = (1.0 + 4.0 * row.t * row.t).powf(-0.75);
        assert!((row.sup_norm - exact).abs() < 1e-3 * exact, "t {}: {} vs {}", row.t, row.sup_norm, exact);
    }
}

#[test]
fn constant_symbol_block_matches_closed_form() {
    let t = table(&RadialPotential::gaussian(2.0, 1.0, 12.0), 100);
    for (j, p, q, sp) in [(2, 0.8, 1.1, 1), (4, 1.3, 0.9, -1), (6, 2.0, 2.0, 1)] {
        let num = building_block(&t, j, &CollinearConfig::pair(p, q, sp, 1), BlockSymbol::ConstantOne).unwrap();
        let cf = building_block_constant(j, p, q);
        assert!((num - cf).norm() < 1e-9 * cf.norm().max(1.0), "J {j}: {num} vs {cf}");
    }
}

#[test]
fn regular_operator_matches_physical_product_route() {
    let kg = KGrid::from_zero(20.0, 800);
    let out = KGrid::from_zero(16.0, 320);
    let g = SpectralProfile::from_fn(kg, |k| Complex64::new((-k * k / 8.0).exp(), 0.0));
    for shells in [(1, 0, 0), (2, 2, 1)] {
        let a = apply_regular_symbol_operator(&BilinearSymbol::one(), shells, &g, &g, out);
        let b = regular_product_route(shells, &g, &g, out);
        let rel = a.sub(&b).l2() / b.l2();
        assert!(rel < 1e-4, "{shells:?}: {rel:e}");
    }
}

#[test]
fn linear_only_evolution_keeps_the_profile() {
    let t = EigenfunctionTable::build(&RadialPotential::gaussian(2.0, 1.0, 12.0), RadialGrid::new(40.0, 1600), KGrid::from_zero(3.0, 375), None)
        .unwrap();
    let cfg = EvolveConfig { dt: 0.05, t_final: 5.0, nonlinear: false, ..EvolveConfig::default() };
    let traj = evolve(&t, &initial_data(&t, &cfg), &cfg).unwrap();
    let f0 = &traj.snapshots[0].1;
    let rel = traj.final_profile().sub(f0).l2() / f0.l2();
    assert!(rel < 1e-12, "{rel:e}");
}
