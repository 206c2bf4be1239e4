//! Command implementations behind the binary's subcommands.
//!
//! Each command takes a parsed [`RunConfig`] and an output prefix, writes
//! CSV (and JSON for fits) with LF line endings, and returns the paths it
//! wrote. Numbers are printed with Rust's shortest round-trip formatting,
//! so identical doubles give identical bytes; together with the seeded rng
//! streams this makes every output file byte-stable across reruns and
//! worker counts.

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::montecarlo::run_ensemble;
use crate::noise::{generate_trajectory, value_at};
use crate::protocol::{sweep_coupling, sweep_prep, uniform_grid};
use crate::spectral::{average_psd, fit_power_law, lorentzian_psd, Spectrum};

#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
pub enum SweepMode {
    /// Sweep the coupling ratio R at fixed preparation time.
    #[value(alias = "R")]
    R,
    /// Sweep the preparation time at fixed coupling ratio.
    Prep,
}

fn out_path(prefix: &str, name: &str) -> PathBuf {
    if prefix.is_empty() {
        PathBuf::from(name)
    } else if prefix.ends_with('/') {
        PathBuf::from(format!("{prefix}{name}"))
    } else {
        PathBuf::from(format!("{prefix}_{name}"))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() && !dir.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{}: output directory does not exist", path.display()),
            )));
        }
    }
    std::fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// One telegraph realization sampled on the trace grid: t_ns,value.
pub fn cmd_noise_trace(cfg: &RunConfig, prefix: &str) -> Result<Vec<PathBuf>> {
    let params = cfg.rtn_params()?;
    let grid = uniform_grid(cfg.trace.duration_ns, cfg.trace.dt_ns);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    let traj = generate_trajectory(&params, cfg.trace.duration_ns, &mut rng)?;

    let mut out = String::from("t_ns,value\n");
    for &t in &grid {
        writeln!(out, "{},{}", t, value_at(&traj, t)?).unwrap();
    }
    let path = out_path(prefix, "noise_trace.csv");
    write_file(&path, &out)?;
    Ok(vec![path])
}

/// Averaged spectra, one file per correlation time, with the analytic
/// Lorentzian alongside: f_per_ns,psd,lorentzian_ref. A fit band in the
/// config adds one fit JSON per spectrum; a self-test block replays the
/// fit on synthetic power-law data and fails loudly if it is not exact.
pub fn cmd_spectrum(cfg: &RunConfig, prefix: &str) -> Result<Vec<PathBuf>> {
    let s = &cfg.spectrum;
    let mut written = Vec::new();

    for (k, &tau_c) in s.tau_c_values_ns.iter().enumerate() {
        let params = cfg.rtn_params_with_tau(tau_c)?;
        let j0_sq = params.amplitude_j0 * params.amplitude_j0;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed.wrapping_add(k as u64));
        let spec = average_psd(&params, s.n_realizations, s.dt_ns, s.duration_ns, &mut rng)?;

        let mut out = String::from("f_per_ns,psd,lorentzian_ref\n");
        for (f, p) in spec.frequencies.iter().zip(spec.psd.iter()) {
            writeln!(out, "{},{},{}", f, p, j0_sq * lorentzian_psd(tau_c, *f)).unwrap();
        }
        let path = out_path(prefix, &format!("spectrum_tau{tau_c}.csv"));
        write_file(&path, &out)?;
        written.push(path);

        if let Some([f_lo, f_hi]) = s.fit_band_per_ns {
            let fit = fit_power_law(&spec, f_lo, f_hi)?;
            let path = out_path(prefix, &format!("spectrum_tau{tau_c}_fit.json"));
            let mut text = serde_json::to_string_pretty(&fit).expect("fit serializes");
            text.push('\n');
            write_file(&path, &text)?;
            written.push(path);
        }
    }

    if let Some(st) = s.power_law_self_test {
        written.push(power_law_self_test(st.c, st.alpha, prefix)?);
    }
    Ok(written)
}

/// Round-trip check of the power-law fitter on data drawn from its own
/// model; recovery must be exact to 1e-10.
fn power_law_self_test(c: f64, alpha: f64, prefix: &str) -> Result<PathBuf> {
    let freqs: Vec<f64> = (1..=100).map(|m| m as f64 * 0.01).collect();
    let psd: Vec<f64> = freqs.iter().map(|&f| c * f.powf(-alpha)).collect();
    let spec = Spectrum::new(freqs, psd, 1, 0.01, 1.0)?;
    let fit = fit_power_law(&spec, 0.01, 1.0)?;
    if (fit.alpha - alpha).abs() > 1e-10 || (fit.c - c).abs() > 1e-10 * c.abs() {
        return Err(Error::Numerical(format!(
            "power-law self-test failed: gave (c={c}, alpha={alpha}), recovered (c={}, alpha={})",
            fit.c, fit.alpha
        )));
    }
    let report = serde_json::json!({
        "given": { "c": c, "alpha": alpha },
        "recovered": fit,
    });
    let path = out_path(prefix, "power_law_self_test.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_file(&path, &text)?;
    Ok(path)
}

/// Full ensemble run: t_ns,ddse,concurrence,ddse_stderr.
pub fn cmd_evolve(cfg: &RunConfig, prefix: &str) -> Result<Vec<PathBuf>> {
    let params = cfg.rtn_params()?;
    let protocol = cfg.protocol()?;
    let grid = uniform_grid(protocol.total_duration(), cfg.ensemble.sample_dt_ns);
    let result = run_ensemble(&protocol, &params, &cfg.ensemble_config(grid))?;

    let mut out = String::from("t_ns,ddse,concurrence,ddse_stderr\n");
    for (k, t) in result.times.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            t, result.ddse[k], result.concurrence[k], result.ddse_stderr[k]
        )
        .unwrap();
    }
    let path = out_path(prefix, "evolve.csv");
    write_file(&path, &out)?;
    Ok(vec![path])
}

/// Sweep of max concurrence: swept_value,max_concurrence,t_star_ns,stderr.
pub fn cmd_sweep(cfg: &RunConfig, mode: SweepMode, prefix: &str) -> Result<Vec<PathBuf>> {
    let params = cfg.rtn_params()?;
    let sweep_cfg = cfg.sweep_config();
    let values = &cfg.sweep.values;
    let (rows, name) = match mode {
        SweepMode::R => (
            sweep_coupling(values, cfg.protocol.tau_prep_ns, &params, &sweep_cfg)?,
            "sweep_r.csv",
        ),
        SweepMode::Prep => (
            sweep_prep(values, cfg.protocol.coupling_ratio, &params, &sweep_cfg)?,
            "sweep_prep.csv",
        ),
    };

    let mut out = String::from("swept_value,max_concurrence,t_star_ns,stderr\n");
    for row in &rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.swept_value, row.max_concurrence, row.t_star_ns, row.stderr
        )
        .unwrap();
    }
    let path = out_path(prefix, name);
    write_file(&path, &out)?;
    Ok(vec![path])
}
