//! Why the similarity cannot be realised inside ordinary quantum mechanics:
//! conjugating `Q` by the extended generator produces the barred operator
//! `Qb`, and no dilation of the Heisenberg algebra satisfies both conditions
//! unless `n = -2`.

use kvnlab::opalg::{
    adjoint_finite_quadratic, adjoint_infinitesimal, bopp_operators, leak_detect, lms_quantum_generator,
    no_go_standard_qm, AdjointMode, Scalar, SymbolicPotential,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (q, p, _, _) = bopp_operators();
    for n in [1, 3, 4] {
        let a = lms_quantum_generator(&SymbolicPotential::formal(n)?)?;
        let dq = adjoint_infinitesimal(&a, &q, &Scalar::alpha(), AdjointMode::Kvn);
        let leak = leak_detect(&dq);
        println!("n = {n}");
        println!("  U Q U^-1 = {}", leak.rewritten);
        println!("  barred part: {}", leak.barred);
        let dp = adjoint_infinitesimal(&a, &p, &Scalar::alpha(), AdjointMode::Kvn);
        println!("  U P U^-1 leaks: {}", leak_detect(&dp).leaks);
    }

    let a2 = lms_quantum_generator(&SymbolicPotential::formal(2)?)?;
    println!("\noscillator, finite scale:");
    println!("  Q -> {}", adjoint_finite_quadratic(&a2, &q)?);
    println!("  P -> {}", adjoint_finite_quadratic(&a2, &p)?);

    println!("\nstandard quantum mechanics:");
    for n in [-2.0, -1.0, 1.0, 3.0, 4.0] {
        let r = no_go_standard_qm(n)?;
        println!("  n = {n:>4}: solution {:?}, gap {:.4}", r.solution, r.gap);
    }
    Ok(())
}
