//! The tower of conserved charges built from the Liouvillian and the
//! similarity charge, for a few exponents.

use kvnlab::charges::virasoro_charge;
use kvnlab::dynamics::{integrate_sampled, survivable_horizon, uniform_times, IntegratorConfig};
use kvnlab::model::{ExtendedPoint, MonomialPotential};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    let x0 = ExtendedPoint::new(1.0, 0.3, 0.3, -0.2);
    for n in [-1.0, 1.0, 3.0, 4.0] {
        let pot = MonomialPotential::new(1.0, n)?;
        let horizon = survivable_horizon(&x0, &pot, 10.0, 20.0, &cfg)?;
        let tr = integrate_sampled(&x0, &pot, &uniform_times(horizon, 1001), &cfg)?;
        println!("n = {n}, horizon {horizon:.3}");
        for m in -1..=3 {
            let vals = tr.iter().map(|(t, x)| virasoro_charge(x, &pot, t, m)).collect::<Result<Vec<_>, _>>()?;
            let drift = vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0, f64::max);
            println!("  L{m:<2} = {:+.12e}   max drift {drift:.2e}", vals[0]);
        }
    }
    Ok(())
}
