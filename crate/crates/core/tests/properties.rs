//! Invariants checked on generated inputs.

use dspec::bilinear::{identity_residuals, lp_low, lp_project, PhasePoint};
use dspec::config::RunConfig;
use dspec::cutoff::{phi, phi_le, phi_shell};
use dspec::dft::{forward_dft, inverse_dft, ProfileGrid, SpectralProfile};
use dspec::evolve::nonlinear_substep;
use dspec::io::csv_string;
use dspec::nsd::ShellWindow;
use dspec::radialwave::EigenfunctionTable;
use dspec::{KGrid, RadialGrid, RadialPotential};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn table() -> &'static EigenfunctionTable {
    static T: OnceLock<EigenfunctionTable> = OnceLock::new();
    T.get_or_init(|| {
        EigenfunctionTable::build(&RadialPotential::gaussian(2.0, 1.0, 12.0), RadialGrid::new(40.0, 3200), KGrid::from_zero(8.0, 160), None)
            .unwrap()
    })
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn phase_identities_hold(k in vec3(), l in vec3(), m in vec3()) {
        prop_assume!(l.iter().map(|x| x * x).sum::<f64>() > 1e-4);
        let r = identity_residuals(&PhasePoint { k, l, m }).unwrap();
        for v in r {
            prop_assert!(v < 1e-12, "residuals {:?}", r);
        }
    }

    #[test]
    fn shells_telescope_to_the_ball(x in -300.0..300.0f64, j0 in -3i32..2, n in 1i32..8) {
        let sum: f64 = phi_le(j0, x) + (j0 + 1..=j0 + n).map(|j| phi_shell(j, x)).sum::<f64>();
        prop_assert!((sum - phi_le(j0 + n, x)).abs() < 1e-14);
    }

    #[test]
    fn bump_is_even_bounded_and_radially_decreasing(x in 0.0..2.0f64, dx in 0.0..0.5f64) {
        prop_assert_eq!(phi(x), phi(-x));
        prop_assert!((0.0..=1.0).contains(&phi(x)));
        prop_assert!(phi(x + dx) <= phi(x));
        if x <= 1.25 { prop_assert_eq!(phi(x), 1.0); }
        if x >= 1.6 { prop_assert_eq!(phi(x), 0.0); }
    }

    #[test]
    fn lp_pieces_sum_to_the_low_part(b in -2i32..2, n in 1i32..5) {
        let kg = KGrid::from_zero(20.0, 400);
        let f = SpectralProfile::from_fn(kg, |k| Complex64::new((-k / 3.0).exp(), k.sin()));
        let mut acc = lp_low(&f, b);
        for k in b + 1..=b + n {
            let p = lp_project(&f, k);
            acc = SpectralProfile { kgrid: kg, values: acc.values.iter().zip(&p.values).map(|(a, c)| a + c).collect() };
        }
        prop_assert!(acc.sub(&lp_low(&f, b + n)).l2() < 1e-13 * f.l2());
    }

    #[test]
    fn substeps_compose(re in -0.5..0.5f64, im in -0.5..0.5f64, tau in 0.0..1.0f64) {
        let mut a = vec![Complex64::new(re, im)];
        let mut b = a.clone();
        nonlinear_substep(&mut a, tau).unwrap();
        nonlinear_substep(&mut b, tau / 2.0).unwrap();
        nonlinear_substep(&mut b, tau / 2.0).unwrap();
        prop_assert!((a[0] - b[0]).norm() < 1e-14);
    }

    #[test]
    fn shell_window_reaches_the_ladder(eps in 1e-4..0.5f64) {
        let w = ShellWindow::for_eps(eps);
        prop_assert!(2f64.powi(w.j_max) * eps >= 256.0);
        prop_assert!(w.j_max >= 7);
    }

    #[test]
    fn csv_values_round_trip(v in proptest::collection::vec(-1e300..1e300f64, 1..6)) {
        let s = csv_string("h", &["a"], &[v.clone()]);
        let line = s.lines().nth(2).unwrap();
        let back: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        prop_assert_eq!(back, v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transform_is_unitary_on_gaussian_mixtures(w1 in 1.0..2.0f64, w2 in 1.0..2.0f64, c in -1.0..1.0f64) {
        let t = table();
        let f = ProfileGrid::from_fn(t.grid, |r| {
            Complex64::new((-r * r / (2.0 * w1 * w1)).exp(), 0.0)
                + Complex64::new(c, 0.5) * (r * r * (-r * r / (2.0 * w2 * w2)).exp())
        });
        let g = forward_dft(t, &f).unwrap();
        prop_assert!((g.l2() - f.l2()).abs() < 1e-6 * f.l2(), "{} vs {}", g.l2(), f.l2());
        let back = inverse_dft(t, &g).unwrap();
        prop_assert!(back.sub(&f).l2() < 1e-4 * f.l2(), "roundtrip {:e} plancherel {:e}", back.sub(&f).l2() / f.l2(), (g.l2() - f.l2()) / f.l2());
    }

    #[test]
    fn config_hash_tracks_content(seed in any::<u64>()) {
        let a = RunConfig::default();
        let b = RunConfig { seed, ..a.clone() };
        prop_assert_eq!(a.hash() == b.hash(), a.seed == seed);
        prop_assert_eq!(b.hash(), b.clone().hash());
    }
}
