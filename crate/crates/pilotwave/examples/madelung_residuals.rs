//! Hydrodynamic bookkeeping of an evolved packet: the continuity equation
//! ∂P/∂t + ∇·(Pv) = 0, the amplitude-transport equation, and the quantum
//! Hamilton–Jacobi equation all hold with residuals at solver accuracy.

use std::sync::Arc;

use pilotwave::diagnostics::{continuity_residual, madelung_residuals};
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::{evolve, EvolutionConfig, Method};
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();
    let grid = Arc::new(Grid::line(-12.0, 12.0, 512, Boundary::Periodic).unwrap());
    let psi0 = states::gaussian(&grid, &units, &[1.0], &[0.8], &[0.5]).unwrap();
    let potential =
        eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &grid, &units).unwrap();
    let cfg =
        EvolutionConfig { dt: 0.001, steps: 1000, method: Method::SplitSpectral, snapshot_stride: 100 };
    let timeline = evolve(&psi0, &potential, &units, &cfg).unwrap();

    let continuity = continuity_residual(&timeline).unwrap();
    let madelung = madelung_residuals(&timeline).unwrap();

    println!("packet in the harmonic well, residuals on interior snapshots");
    println!("{:>6}  {:>13}  {:>13}  {:>13}", "t", "continuity", "amplitude", "phase (HJ)");
    for (c, m) in continuity.iter().zip(&madelung) {
        println!("{:>6.2}  {:>13.3e}  {:>13.3e}  {:>13.3e}", c.time, c.norm, m.r_amp, m.r_phase);
    }
}
