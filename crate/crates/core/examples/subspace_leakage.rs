//! Grid view of the obstruction: a product state `psi(Q) chi(Qb)` stays a
//! product under the extended generator, while the oscillator similarity
//! unitary entangles the two factors.

use kvnlab::model::MonomialPotential;
use kvnlab::qgrid::{apply_lms_unitary_harmonic, evolve_g, gaussian_profile, make_separable, schmidt, UniformAxis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ax = UniformAxis::symmetric(8.0, 64)?;
    let state = make_separable(
        &gaussian_profile(&ax, 0.5, 1.0, 0.3, 1.0),
        &gaussian_profile(&ax, -0.5, 1.0, -0.2, 1.0),
        ax,
        ax,
        1.0,
    )?;
    for n in [1.0, 2.0, 4.0] {
        let ev = evolve_g(&state, &MonomialPotential::new(1.0, n)?, 5.0, 500)?;
        println!("n = {n}: Schmidt ratio after t = 5: {:.3e} ({} warnings)", schmidt(&ev.state).ratio(), ev.warnings.len());
    }
    println!("\n{:>6} {:>12} {:>12} {:>12}", "alpha", "s1", "s2", "s2/s1");
    for k in 0..=10 {
        let alpha = 0.05 * k as f64;
        let sp = schmidt(&apply_lms_unitary_harmonic(&state, alpha)?);
        println!("{alpha:6.2} {:12.6} {:12.6} {:12.3e}", sp.values[0], sp.values[1], sp.ratio());
    }
    Ok(())
}
