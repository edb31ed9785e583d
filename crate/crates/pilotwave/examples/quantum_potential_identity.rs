//! The quantum potential two ways: from the amplitude, Q = −(ℏ²/2m)·ΔA/A,
//! and from the phase-flow bookkeeping, Q = −∂S/∂t − (∇S)²/2m − U. For a
//! Gaussian at rest the first route reproduces the closed form; on an evolved
//! packet both routes agree to solver accuracy.

use std::sync::Arc;

use pilotwave::bohm::{quantum_potential, quantum_potential_hj};
use pilotwave::grid::{Boundary, Grid};
use pilotwave::potential::{eval_potential, PotentialSpec};
use pilotwave::states;
use pilotwave::tdse::{evolve, EvolutionConfig, Method};
use pilotwave::units::UnitSystem;

fn main() {
    let units = UnitSystem::natural();
    let grid = Arc::new(Grid::line(-10.0, 10.0, 512, Boundary::Periodic).unwrap());

    // Amplitude route on a σ = 1 Gaussian: Q(x) = (ℏ²/2m)(1/2σ² − x²/4σ⁴).
    let psi = states::gaussian(&grid, &units, &[0.0], &[1.0], &[0.0]).unwrap();
    let (amp, _, mask) = psi.polar(&units);
    let q = quantum_potential(&amp, &mask, &units).unwrap();
    println!("Gaussian at rest, sigma = 1");
    println!("{:>6}  {:>12}  {:>12}", "x", "Q", "Q exact");
    for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let i = grid.nearest_index(0, x);
        let exact = 0.25 - 0.125 * x * x;
        println!("{x:>6.1}  {:>12.8}  {exact:>12.8}", q.values.data()[i]);
    }

    // Both routes on a packet evolved in the harmonic well.
    let potential =
        eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &grid, &units).unwrap();
    let psi0 = states::gaussian(&grid, &units, &[1.0], &[0.8], &[0.0]).unwrap();
    let cfg =
        EvolutionConfig { dt: 0.002, steps: 300, method: Method::SplitSpectral, snapshot_stride: 10 };
    let timeline = evolve(&psi0, &potential, &units, &cfg).unwrap();
    let idx = timeline.len() / 2;
    let snap = timeline.snapshot(idx);
    let (amp, _, mask) = snap.polar(&units);
    let q_amp = quantum_potential(&amp, &mask, &units).unwrap();
    let q_hj = quantum_potential_hj(&timeline, idx).unwrap();

    let density = snap.density();
    let mut gap = 0.0;
    let mut weight = 0.0;
    for i in 0..grid.len() {
        if q_amp.mask.is_masked(i) || q_hj.mask.is_masked(i) {
            continue;
        }
        let d = q_amp.values.data()[i] - q_hj.values.data()[i];
        gap += d * d * density.data()[i] * grid.quad_weight(i);
        weight += density.data()[i] * grid.quad_weight(i);
    }
    println!("\nevolved packet at t = {:.3}", timeline.times()[idx]);
    println!("P-weighted route gap = {:.3e}", (gap / weight).sqrt());
}
