//! Rescale a cubic orbit by the mechanical similarity map and compare with a
//! fresh integration from the rescaled initial state. Also shows that the
//! extended action is unchanged while the standard action picks up
//! `alpha^(1 + n/2)`.

use kvnlab::dynamics::{integrate_sampled, survivable_horizon, uniform_times, IntegratorConfig};
use kvnlab::model::{ExtendedPoint, LmsParams, MonomialPotential};
use kvnlab::symmetry::{action_kvn, action_standard, bracket_change, lms_map_trajectory_checked};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 3.0;
    let pot = MonomialPotential::new(1.0, n)?;
    let cfg = IntegratorConfig::default();
    let x0 = ExtendedPoint::new(0.4, -0.9, -0.5, 0.7);
    let horizon = survivable_horizon(&x0, &pot, 0.3, 20.0, &cfg)?;
    let tr = integrate_sampled(&x0, &pot, &uniform_times(horizon, 401), &cfg)?;

    for alpha in [0.8, 1.3, 2.0] {
        let prm = LmsParams::from_alpha(alpha, n);
        let mapped = lms_map_trajectory_checked(&tr, &prm, &pot)?;
        let fresh = integrate_sampled(&mapped.states[0], &pot, &mapped.times, &cfg)?;
        let dev = mapped.states.iter().zip(&fresh.states).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        let s_ratio = action_standard(&mapped, &pot)? / action_standard(&tr, &pot)?;
        let (standard, extended) = bracket_change(&prm, n);
        println!(
            "alpha {alpha:.2}: sup deviation {dev:.2e}, extended action {:.12} -> {:.12}, S ratio {s_ratio:.8} (alpha^(1+n/2) = {:.8}), brackets {standard:.6} / {extended}",
            action_kvn(&tr, &pot)?,
            action_kvn(&mapped, &pot)?,
            alpha.powf(1.0 + n / 2.0),
        );
    }
    Ok(())
}
