//! Table cache: bit-identical reloads and rejection of foreign files.

use dspec::cache::{cache_path, load_or_build, load_table, save_table, table_bytes, table_from_bytes, table_hash};
use dspec::config::GridConfig;
use dspec::radialwave::EigenfunctionTable;
use dspec::{DspecError, RadialPotential};

fn grids() -> GridConfig {
    GridConfig { r_max: 30.0, n_r: 1200, kappa_max: 3.0, n_k: 30, kappa_min: None, l_max: None }
}

#[test]
fn reload_is_bit_identical() {
    let p = RadialPotential::gaussian(2.0, 1.0, 12.0);
    let g = grids();
    let t = EigenfunctionTable::build(&p, g.radial(), g.kgrid(), g.l_max).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.dspec");
    save_table(&path, &t).unwrap();
    let back = load_table(&path).unwrap();
    assert_eq!(table_bytes(&back), table_bytes(&t));
    assert_eq!(back.phase_shifts, t.phase_shifts);
}

#[test]
fn second_build_hits_the_cache() {
    let p = RadialPotential::exponential(1.0, 1.0, 20.0);
    let dir = tempfile::tempdir().unwrap();
    let (a, hit_a) = load_or_build(dir.path(), &p, &grids()).unwrap();
    let (b, hit_b) = load_or_build(dir.path(), &p, &grids()).unwrap();
    assert!(!hit_a && hit_b);
    assert_eq!(table_hash(&a), table_hash(&b));
    assert!(cache_path(dir.path(), &p, &grids()).exists());
    let other = cache_path(dir.path(), &p.with_amplitude(0.5), &grids());
    assert_ne!(other, cache_path(dir.path(), &p, &grids()));
}

#[test]
fn foreign_and_truncated_files_are_rejected() {
    assert!(matches!(table_from_bytes(b"NOTDSPEC"), Err(DspecError::Cache(_))));
    let p = RadialPotential::zero();
    let g = grids();
    let t = EigenfunctionTable::build(&p, g.radial(), g.kgrid(), g.l_max).unwrap();
    let bytes = table_bytes(&t);
    assert!(matches!(table_from_bytes(&bytes[..bytes.len() - 3]), Err(DspecError::Cache(_))));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(table_from_bytes(&extra), Err(DspecError::Cache(_))));
}
