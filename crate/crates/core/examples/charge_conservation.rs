//! Track the Liouvillian, the similarity charge and two Virasoro charges
//! along a quartic orbit in extended phase space.

use kvnlab::charges::{liouvillian_value, lms_charge, virasoro_charge};
use kvnlab::dynamics::{characteristic_time, integrate_sampled, uniform_times, IntegratorConfig};
use kvnlab::model::{ExtendedPoint, MonomialPotential};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pot = MonomialPotential::new(1.0, 4.0)?;
    let cfg = IntegratorConfig::default();
    let x0 = ExtendedPoint::new(1.0, 0.3, 0.3, -0.2);
    let period = characteristic_time(&x0.phase(), &pot, &cfg)?;
    let tr = integrate_sampled(&x0, &pot, &uniform_times(20.0 * period, 11), &cfg)?;

    println!("period {period:.6}");
    println!("{:>10} {:>14} {:>14} {:>14} {:>14}", "t", "H", "D", "L1", "L2");
    for (t, x) in tr.iter() {
        println!(
            "{t:10.4} {:14.10} {:14.10} {:14.10} {:14.10}",
            liouvillian_value(x, &pot)?,
            lms_charge(x, &pot, t)?,
            virasoro_charge(x, &pot, t, 1)?,
            virasoro_charge(x, &pot, t, 2)?,
        );
    }
    Ok(())
}
