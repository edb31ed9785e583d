//! The stationarity residual L = ∇·v of the phase flow and the dissipation
//! rate ε = (ℏ/2)·L: exactly zero for an energy eigenstate, and equal to the
//! closed-form σ̇/σ for a spreading Gaussian.

use std::sync::Arc;

use pilotwave::diagnostics::{chetaev_residual, epsilon_field};
use pilotwave::field::ComplexField;
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::{evolve, solve_eigenpairs, EvolutionConfig, Method};
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();

    // Eigenstates are stationary: the residual vanishes identically.
    let dgrid = Arc::new(Grid::line(-8.0, 8.0, 513, Boundary::DirichletZero).unwrap());
    let well = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &dgrid, &units).unwrap();
    let solution = solve_eigenpairs(&well, &units, 3).unwrap();
    println!("harmonic eigenstates (stationary flow):");
    for (n, state) in solution.states.iter().enumerate() {
        let (_, l) = chetaev_residual(&ComplexField::from_real(state), &units);
        println!("  n = {n}:  |L| = {l:.3e}");
    }

    // A spreading Gaussian is not: L(t) = σ̇/σ = (t/4)/σ(t)² for σ₀ = 1.
    let grid = Arc::new(Grid::line(-16.0, 16.0, 512, Boundary::Periodic).unwrap());
    let psi0 = states::gaussian(&grid, &units, &[0.0], &[1.0], &[0.0]).unwrap();
    let free = eval_potential(&PotentialSpec::Free, &grid, &units).unwrap();
    let cfg =
        EvolutionConfig { dt: 0.005, steps: 200, method: Method::SplitSpectral, snapshot_stride: 50 };
    let timeline = evolve(&psi0, &free, &units, &cfg).unwrap();
    println!("\nspreading free Gaussian:");
    println!("{:>6}  {:>12}  {:>12}  {:>12}", "t", "L", "L exact", "max |eps|");
    for (i, &t) in timeline.times().iter().enumerate() {
        let psi = timeline.snapshot(i);
        let (_, l) = chetaev_residual(psi, &units);
        let eps = epsilon_field(psi, &units);
        let eps_max = eps.data().iter().map(|v| v.abs()).fold(0.0, f64::max);
        let exact = 0.25 * t / (1.0 + 0.25 * t * t);
        println!("{t:>6.2}  {l:>12.8}  {exact:>12.8}  {eps_max:>12.8}");
    }
}
