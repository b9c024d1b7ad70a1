//! Bohr-Sommerfeld levels of even monomial potentials and how the
//! similarity map shifts the quantized action off the lattice.

use kvnlab::model::{LmsParams, MonomialPotential};
use kvnlab::semiclassics::{action_integral, action_scaling_exponent, bohr_levels, lms_bohr_violation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hbar = 1.0;
    let alpha = 1.3;
    for n in [2.0, 4.0, 6.0] {
        let pot = MonomialPotential::new(1.0, n)?;
        let levels = bohr_levels(&pot, hbar, 5)?;
        println!("n = {n}");
        for (k, e) in levels.iter().enumerate() {
            let j = action_integral(&pot, *e)?;
            println!("  k = {k}: E = {e:.10}, J / (2 pi hbar) = {:.10}", j / (2.0 * std::f64::consts::PI * hbar));
        }
        let v = lms_bohr_violation(&pot, levels[0], &LmsParams::from_alpha(alpha, n), hbar)?;
        println!(
            "  alpha = {alpha}: delta J = {:.10} (predicted {:.10}), level mismatch {:.6}",
            v.delta_j, v.predicted_delta_j, v.level_mismatch
        );
        println!("  fitted action exponent {:.8}", action_scaling_exponent(&pot, levels[0], &[0.8, 0.9, 1.1, 1.25])?);
    }
    let v = lms_bohr_violation(&MonomialPotential::new(1.0, -2.0)?, 1.0, &LmsParams::from_alpha(alpha, -2.0), hbar)?;
    println!("n = -2: delta J = {}, exact invariance {}", v.delta_j, v.exact_invariance);
    Ok(())
}
