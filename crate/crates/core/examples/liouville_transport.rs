//! Transport a phase-space density by the classical flow and compare its
//! moments with the exact oscillator solution.

use std::f64::consts::PI;

use kvnlab::dynamics::IntegratorConfig;
use kvnlab::model::MonomialPotential;
use kvnlab::qgrid::{evolve_liouville, GridState2D, Representation, UniformAxis};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (q0, p0, s) = (1.0, 0.5, 0.7);
    let ax = UniformAxis::symmetric(5.0, 128)?;
    let psi = GridState2D::from_fn(ax, ax, 1.0, Representation::QP, |q, p| {
        Complex64::new((-((q - q0).powi(2) + (p - p0).powi(2)) / (2.0 * s * s)).exp(), 0.0)
    })?
    .normalized()?;
    let cfg = IntegratorConfig::default();
    let pot = MonomialPotential::harmonic(1.0);
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "<q>", "exact", "norm");
    for k in 0..=8 {
        let t = k as f64 * PI / 4.0;
        let out = evolve_liouville(&psi, &pot, t, &cfg)?.state;
        let mean = out.expectation(|q, _| q);
        println!("{t:8.4} {mean:12.8} {:12.8} {:12.8}", q0 * t.cos() + p0 * t.sin(), out.norm_sq());
    }

    let quartic = MonomialPotential::new(1.0, 4.0)?;
    let out = evolve_liouville(&psi, &quartic, 2.0, &cfg)?.state;
    println!("\nquartic at t = 2: <q> = {:.6}, <p> = {:.6}", out.expectation(|q, _| q), out.expectation(|_, p| p));
    Ok(())
}
