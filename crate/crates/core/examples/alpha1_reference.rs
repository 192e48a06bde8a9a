//! Regenerates `blowdown::ALPHA_1`.
//!
//! cargo run --release -p obstacle-lab --example alpha1_reference

use obstacle_lab::blowdown::{richardson_limit, ALPHA_1_RADII};
use obstacle_lab::potential::ParaboloidDeviation;
use obstacle_lab::{matching_functional, FunctionalConfig, Paraboloid, PotentialConfig};

fn main() -> obstacle_lab::Result<()> {
    let w = ParaboloidDeviation::new(Paraboloid::new(1.0, 0.0)?, PotentialConfig::with_abs_tol(1e-9));
    let cfg = FunctionalConfig::new(4096, 2)?;
    let mut values = Vec::new();
    for r in ALPHA_1_RADII {
        let m = matching_functional(&w, r, &cfg)?;
        println!("r = {r:>5}: M = {m:.15}");
        values.push(m);
    }
    let alpha = richardson_limit(&ALPHA_1_RADII, &values)?;
    println!("alpha_1 = {alpha:.15}");
    Ok(())
}
