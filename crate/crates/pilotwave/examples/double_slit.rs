//! Double-slit interference painted by trajectories: a 2D packet crosses a
//! wall with slits at y = ±1, and the final transverse positions of the
//! ensemble reproduce the fringe pattern of |ψ|² downstream.

use std::sync::Arc;

use pilotwave::bohm::{integrate_trajectories, sample_initial_positions, Interpolation};
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::{evolve, EvolutionConfig, Method};
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();
    let grid = Arc::new(
        Grid::rectangle((-12.0, 12.0, 256), (-12.0, 12.0, 256), Boundary::Periodic).unwrap(),
    );
    let slit = PotentialSpec::DoubleSlit {
        height: 60.0,
        wall_x: 0.0,
        wall_thickness: 0.4,
        slit_centers: [-1.0, 1.0],
        slit_width: 0.5,
    };
    let potential = eval_potential(&slit, &grid, &units).unwrap();
    let psi0 =
        states::gaussian(&grid, &units, &[-6.0, 0.0], &[1.0, 1.5], &[6.0, 0.0]).unwrap();
    let cfg =
        EvolutionConfig { dt: 0.002, steps: 900, method: Method::SplitSpectral, snapshot_stride: 90 };
    let timeline = evolve(&psi0, &potential, &units, &cfg).unwrap();

    let p0 = timeline.snapshot(0).density();
    let starts = sample_initial_positions(&p0, 4000, 2718).unwrap();
    let ensemble = integrate_trajectories(&timeline, &starts, 6, Interpolation::Cubic).unwrap();

    // Histogram the transverse coordinate at the final time.
    let (lo, hi, bins) = (-8.0, 8.0, 33);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for particle in ensemble.at_time(ensemble.times().len() - 1) {
        let b = ((particle[1] - lo) / width).floor() as isize;
        if (0..bins as isize).contains(&b) {
            counts[b as usize] += 1;
        }
    }
    let peak = *counts.iter().max().unwrap();

    println!("final transverse histogram, t = 1.8, 4000 trajectories");
    for (b, &c) in counts.iter().enumerate() {
        let y = lo + (b as f64 + 0.5) * width;
        let bar = "#".repeat((c * 56 + peak / 2) / peak);
        println!("{y:>6.2} | {bar}");
    }
}
