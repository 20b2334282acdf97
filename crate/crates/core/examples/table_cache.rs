//! Loading the shipped configuration and caching an eigenfunction table.

use dspec::cache::{load_or_build, table_hash};
use dspec::config::RunConfig;

fn main() -> dspec::Result<()> {
    let cfg = RunConfig::default();
    println!("config hash {}", cfg.hash());
    let dir = std::env::temp_dir().join("dspec-example-cache");
    let (t, hit) = load_or_build(&dir, &cfg.potential, &cfg.grids)?;
    println!("first call: hit {hit}, table {}", table_hash(&t));
    let (t2, hit) = load_or_build(&dir, &cfg.potential, &cfg.grids)?;
    println!("second call: hit {hit}, table {}", table_hash(&t2));
    Ok(())
}
