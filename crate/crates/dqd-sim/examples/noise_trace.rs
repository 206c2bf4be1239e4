//! Generate one random-telegraph realization and check its statistics.
//!
//!     cargo run --example noise_trace
//!
//! Prints the first jumps of a single trajectory, then compares the
//! empirical autocorrelation against exp(-2*lag/tau_c).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dqd_sim::noise::{empirical_autocorrelation, value_at};
use dqd_sim::{generate_trajectory, InitialSignMode, Result, RtnParams};

fn main() -> Result<()> {
    let params = RtnParams::new(1.0, 9.0, InitialSignMode::RandomSymmetric)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let traj = generate_trajectory(&params, 100.0, &mut rng)?;
    println!(
        "one realization over 100 ns: initial sign {:+}, {} jumps",
        traj.initial_sign(),
        traj.jump_times().len()
    );
    for (k, t) in traj.jump_times().iter().take(6).enumerate() {
        println!("  jump {k} at t = {t:7.3} ns");
    }
    print!("  values at t = 0, 10, ..., 50:");
    for k in 0..=5 {
        print!(" {:+.0}", value_at(&traj, 10.0 * k as f64)?);
    }
    println!();

    println!("\nautocorrelation over 20000 realizations (tau_c = 9 ns):");
    println!("  lag/ns   measured   exp(-2 lag/tau_c)   std err");
    let lags = [0.0, 4.5, 9.0, 18.0, 27.0];
    for pt in empirical_autocorrelation(&params, &lags, 20_000, 60.0, &mut rng)? {
        let exact = (-2.0 * pt.lag / params.tau_c).exp();
        println!(
            "  {:5.1}    {:8.4}   {:8.4}            {:.4}",
            pt.lag, pt.estimate, exact, pt.std_error
        );
    }
    Ok(())
}
