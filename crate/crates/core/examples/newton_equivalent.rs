//! The family `p^2 / (2 gamma m) + gamma V` gives identical position
//! trajectories while its quantum spectrum rescales as `gamma^kappa`.

use kvnlab::model::{MonomialPotential, PhasePoint};
use kvnlab::semiclassics::{
    eigensolve_newton_equiv, newton_equiv_trajectory_check, spectral_scaling_exponent, EigenGrid, NewtonEquivParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pot = MonomialPotential::new(1.0, 4.0)?;
    let x0 = PhasePoint::new(1.0, 0.3);
    let gammas = [0.5, 1.0, 2.0, 10.0];
    for g in gammas {
        let r = newton_equiv_trajectory_check(&pot, &NewtonEquivParams::new(g, 1.0)?, &x0, 30.0, 301, 1e-12)?;
        println!("gamma {g:>4}: max |q_gamma - q| = {:.2e}, energy drift {:.2e}", r.max_q_diff, r.max_energy_dev);
    }

    let kappa = spectral_scaling_exponent(pot.n);
    let grid = EigenGrid { count: 2001, half_width: None };
    let base = eigensolve_newton_equiv(&pot, &NewtonEquivParams::new(1.0, 1.0)?, 1.0, 3, &grid)?;
    println!("\nkappa = {kappa:.6}");
    for g in gammas {
        let r = eigensolve_newton_equiv(&pot, &NewtonEquivParams::new(g, 1.0)?, 1.0, 3, &grid)?;
        let ratios: Vec<String> = r.eigenvalues.iter().zip(&base.eigenvalues).map(|(a, b)| format!("{:.8}", a / b)).collect();
        println!(
            "gamma {g:>4}: E = {:?}, ratios [{}] vs {:.8}, ground width {:.6}",
            r.eigenvalues.iter().map(|e| format!("{e:.8}")).collect::<Vec<_>>(),
            ratios.join(", "),
            g.powf(kappa),
            r.ground_width
        );
    }
    Ok(())
}
