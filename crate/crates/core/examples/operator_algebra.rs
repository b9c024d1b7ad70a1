//! Exact operator algebra: the Bopp operators, the difference generator
//! `[H(Q,P) - H(Qb,Pb)] / hbar` and its expansion in powers of `hbar`.

use kvnlab::opalg::{bopp_operators, build_g, build_series_g, commutator, hamiltonian_vector_field, SymbolicPotential};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (q, p, qb, pb) = bopp_operators();
    println!("Q  = {q}\nP  = {p}\nQb = {qb}\nPb = {pb}");
    println!("[Q, P]   = {}", commutator(&q, &p));
    println!("[Qb, Pb] = {}", commutator(&qb, &pb));
    println!("[Q, Pb]  = {}", commutator(&q, &pb));

    for n in [2, 3, 4] {
        let pot = SymbolicPotential::formal(n)?;
        let g = build_g(&pot)?;
        let jmax = (n - 1).div_ceil(2);
        println!("\nn = {n}\n  G            = {g}");
        println!("  hbar^0 part  = {}", g.hbar_zero_part());
        println!("  Liouvillian  = {}", hamiltonian_vector_field(&pot.hamiltonian()));
        println!("  series == G: {}, hermitian: {}", build_series_g(&pot, jmax) == g, g.is_hermitian());
    }
    Ok(())
}
