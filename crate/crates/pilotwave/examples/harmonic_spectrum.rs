//! Bound-state energies of the harmonic well from the dense 1D eigensolver:
//! on a fine dirichlet grid the lowest levels approach (n + ½)·ℏω.

use std::sync::Arc;

use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::tdse::solve_eigenpairs;
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();
    let grid = Arc::new(Grid::line(-8.0, 8.0, 513, Boundary::DirichletZero).unwrap());
    let potential =
        eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &grid, &units).unwrap();
    let solution = solve_eigenpairs(&potential, &units, 8).unwrap();

    println!("harmonic well (omega = 1) on a 513-point dirichlet grid over [-8, 8]");
    println!("{:>3}  {:>16}  {:>10}  {:>9}", "n", "E_n", "n + 1/2", "error");
    for (n, e) in solution.energies.iter().enumerate() {
        let exact = n as f64 + 0.5;
        println!("{n:>3}  {e:>16.12}  {exact:>10.1}  {:>9.2e}", e - exact);
    }
}
