//! Split-spectral evolution of a free Gaussian packet: the width grows as
//! σ(t) = σ₀·√(1 + (ℏt/2mσ₀²)²) and the velocity divergence gives a uniform
//! residual L(t) = (ℏ²t/4m²σ₀⁴)/σ(t)² — both are compared against the run.

use std::sync::Arc;

use pilotwave::diagnostics::{chetaev_residual, uncertainty_check};
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::{evolve, EvolutionConfig, Method};
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();
    let grid = Arc::new(Grid::line(-16.0, 16.0, 512, Boundary::Periodic).unwrap());
    let psi0 = states::gaussian(&grid, &units, &[0.0], &[1.0], &[0.0]).unwrap();
    let free = eval_potential(&PotentialSpec::Free, &grid, &units).unwrap();
    let cfg =
        EvolutionConfig { dt: 0.005, steps: 400, method: Method::SplitSpectral, snapshot_stride: 50 };
    let timeline = evolve(&psi0, &free, &units, &cfg).unwrap();

    println!("free Gaussian, sigma_0 = 1 (natural units)");
    println!(
        "{:>6}  {:>12}  {:>12}  {:>12}  {:>12}",
        "t", "sigma", "sigma exact", "L", "L exact"
    );
    for (i, &t) in timeline.times().iter().enumerate() {
        let psi = timeline.snapshot(i);
        let record = uncertainty_check(psi, &units).unwrap();
        let sigma = record.var_x.sqrt();
        let var_exact = 1.0 + 0.25 * t * t;
        let (_, l) = chetaev_residual(psi, &units);
        let l_exact = 0.25 * t / var_exact;
        println!(
            "{t:>6.2}  {sigma:>12.8}  {:>12.8}  {l:>12.8}  {l_exact:>12.8}",
            var_exact.sqrt()
        );
    }
}
