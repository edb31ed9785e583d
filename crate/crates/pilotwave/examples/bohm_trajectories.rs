//! Guidance-equation trajectories riding a coherent packet: every particle
//! oscillates rigidly with the packet (x_k(t) = x_k(0) − 1 + cos t), so the
//! initial ordering is preserved exactly — 1D trajectories never cross.

use std::f64::consts::PI;
use std::sync::Arc;

use pilotwave::bohm::{
    integrate_trajectories, ordering_violations, sample_initial_positions, Interpolation,
};
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::{evolve, EvolutionConfig, Method};
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();
    let grid = Arc::new(Grid::line(-10.0, 10.0, 256, Boundary::Periodic).unwrap());
    let sigma = (0.5f64).sqrt();
    let psi0 = states::gaussian(&grid, &units, &[1.0], &[sigma], &[0.0]).unwrap();
    let potential =
        eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &grid, &units).unwrap();
    let steps = 2000;
    let cfg = EvolutionConfig {
        dt: PI / steps as f64,
        steps,
        method: Method::SplitSpectral,
        snapshot_stride: steps / 4,
    };
    let timeline = evolve(&psi0, &potential, &units, &cfg).unwrap();

    let p0 = timeline.snapshot(0).density();
    let starts = sample_initial_positions(&p0, 8, 42).unwrap();
    let ensemble = integrate_trajectories(&timeline, &starts, 8, Interpolation::Cubic).unwrap();

    println!("8 trajectories over half a period in the harmonic well");
    print!("{:>10}", "t");
    for k in 0..8 {
        print!("  {:>9}", format!("x_{k}"));
    }
    println!();
    for (i, &t) in ensemble.times().iter().enumerate() {
        print!("{t:>10.4}");
        for particle in ensemble.at_time(i) {
            print!("  {:>9.5}", particle[0]);
        }
        println!();
    }
    println!("ordering violations: {}", ordering_violations(&ensemble).unwrap());
    println!("escaped particles:   {}", ensemble.escaped_count());
}
