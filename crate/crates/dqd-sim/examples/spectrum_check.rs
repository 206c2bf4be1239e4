//! Averaged telegraph-noise spectrum against the analytic Lorentzian.
//!
//!     cargo run --example spectrum_check
//!
//! Averages periodograms of simulated realizations, prints the ratio to
//! tau_c/(1+(pi f tau_c)^2) at a few frequencies, then fits a power law to
//! the high-frequency tail (slope -> 2 for a Lorentzian).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dqd_sim::{
    average_psd, fit_power_law, lorentzian_psd, InitialSignMode, Result, RtnParams,
};

fn main() -> Result<()> {
    let tau_c = 10.0;
    let params = RtnParams::new(1.0, tau_c, InitialSignMode::RandomSymmetric)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let (dt, duration) = (0.1, 2000.0);
    let spec = average_psd(&params, 1000, dt, duration, &mut rng)?;
    println!(
        "averaged {} realizations, {} frequency bins, df = {:.2e} /ns",
        spec.n_realizations,
        spec.frequencies.len(),
        spec.frequencies[1] - spec.frequencies[0]
    );
    println!("two-sided integral = {:.4} (variance J0^2 = 1)", spec.two_sided_integral());

    println!("\n  f/ns^-1     simulated    lorentzian   ratio");
    let knee = 1.0 / (std::f64::consts::PI * tau_c);
    for target in [0.002, knee / 2.0, knee, 2.0 * knee, 0.2, 0.5] {
        let m = spec
            .frequencies
            .iter()
            .position(|&f| f >= target)
            .unwrap();
        let (f, s) = (spec.frequencies[m], spec.psd[m]);
        let exact = lorentzian_psd(tau_c, f);
        println!("  {f:.4}      {s:9.4}    {exact:9.4}    {:.3}", s / exact);
    }

    let fit = fit_power_law(&spec, 10.0 * knee, 80.0 * knee)?;
    println!(
        "\ntail fit over [{:.3}, {:.3}] /ns: alpha = {:.3} (Lorentzian tail -> 2), residual {:.3}",
        10.0 * knee,
        80.0 * knee,
        fit.alpha,
        fit.residual
    );
    Ok(())
}
