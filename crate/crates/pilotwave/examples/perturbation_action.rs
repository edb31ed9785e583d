//! The amplitude-perturbation action ∫Q·P dV computed two ways — directly
//! and through the integrated-by-parts Fisher form (ℏ²/8m)∫(∇P)²/P dV —
//! plus a finite-difference stationarity probe: in the hard box the ground
//! state is an extremum of the action under norm-preserving perturbations.

use std::sync::Arc;

use num_complex::Complex64;
use pilotwave::diagnostics::{perturbation_action, stationarity_probe, BumpSpec};
use pilotwave::field::ComplexField;
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::solve_eigenpairs;
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();

    // Dual route on Gaussians: J = ℏ²/8mσ² exactly.
    let grid = Arc::new(Grid::line(-12.0, 12.0, 512, Boundary::Periodic).unwrap());
    println!("{:>6}  {:>14}  {:>14}  {:>10}  {:>12}", "sigma", "direct", "fisher form", "rel gap", "h^2/8msig^2");
    for sigma in [0.5, 1.0, 2.0] {
        let psi = states::gaussian(&grid, &units, &[0.0], &[sigma], &[0.0]).unwrap();
        let routes = perturbation_action(&psi, &units).unwrap();
        let rel = (routes.action - routes.fisher_form).abs() / routes.action.abs();
        println!(
            "{sigma:>6.2}  {:>14.10}  {:>14.10}  {rel:>10.2e}  {:>12.8}",
            routes.action,
            routes.fisher_form,
            0.125 / (sigma * sigma)
        );
    }

    // Stationarity probe in the box: extremal ground state vs a pinched state.
    let box_grid = Arc::new(Grid::line(0.0, 1.0, 513, Boundary::DirichletZero).unwrap());
    let potential = eval_potential(&PotentialSpec::BoxWell, &box_grid, &units).unwrap();
    let solution = solve_eigenpairs(&potential, &units, 1).unwrap();
    let ground = ComplexField::from_real(&solution.states[0]);
    let bump = BumpSpec { center: 0.5, width: 0.2 };
    let d_ground = stationarity_probe(&ground, &units, &bump, 1e-3).unwrap();

    let pinched = ComplexField::from_fn(box_grid.clone(), |p| {
        Complex64::new((-(p[0] - 0.5).powi(2) / 0.02).exp(), 0.0)
    })
    .normalized()
    .unwrap();
    let d_pinched = stationarity_probe(&pinched, &units, &bump, 1e-3).unwrap();

    println!("\nbox ground state  dJ = {d_ground:>12.3e}  (extremal: ~0)");
    println!("pinched Gaussian  dJ = {d_pinched:>12.3e}  (non-extremal)");
}
