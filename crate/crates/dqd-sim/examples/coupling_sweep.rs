//! Peak concurrence versus the two-qubit coupling ratio R.
//!
//!     cargo run --example coupling_sweep
//!
//! Scales J12 by R while the noise stays fixed, so larger R entangles
//! faster relative to the dephasing time. The gain saturates once the
//! entangling time drops well below tau_c.

use dqd_sim::protocol::{sweep_coupling, SweepConfig};
use dqd_sim::{InitialSignMode, Result, RtnParams};

fn main() -> Result<()> {
    let noise = RtnParams::new(11.6e-3, 9.0, InitialSignMode::RandomSymmetric)?;
    let cfg = SweepConfig {
        n_trajectories: 1000,
        batch_size: 100,
        master_seed: 3,
        ..SweepConfig::default()
    };

    println!("tau_prep = 25 ns, J0 = 11.6 MHz, tau_c = 9 ns, n = {}", cfg.n_trajectories);
    println!("\n    R     max C     at t/ns   stderr");
    for row in sweep_coupling(&[1.0, 2.0, 5.0, 10.0, 20.0, 50.0], 25.0, &noise, &cfg)? {
        println!(
            "  {:5.0}   {:.4}    {:7.1}   {:.4}",
            row.swept_value, row.max_concurrence, row.t_star_ns, row.stderr
        );
    }
    Ok(())
}
