//! Random telegraph noise: exponential waiting times, ±J0 values.
//!
//! A realization is an event list of jump times, never a grid: cumulative
//! sums of i.i.d. gaps −τc·ln(p) with p uniform on (0,1). The value at time
//! t is initial_sign·(−1)^(number of jumps ≤ t)·J0, so a jump landing
//! exactly on the query time has already taken effect (Θ(0)=1). The
//! normalized autocorrelation is exp(−2Δ/τc): each jump flips the sign, so
//! the product J(t)J(t+Δ) depends only on the parity of the Poisson count
//! in between, regardless of how the initial sign was chosen.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSignMode {
    /// Start every realization at +J0.
    FixedPlus,
    /// Start at ±J0 with probability ½ each; gives the stationary
    /// zero-mean process.
    #[default]
    RandomSymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RtnParams {
    /// Telegraph amplitude J0 in rad/ns; the process takes values ±J0.
    pub amplitude_j0: f64,
    /// Mean waiting time between jumps, ns.
    pub tau_c: f64,
    pub initial_sign_mode: InitialSignMode,
}

impl RtnParams {
    pub fn new(amplitude_j0: f64, tau_c: f64, initial_sign_mode: InitialSignMode) -> Result<Self> {
        let p = RtnParams { amplitude_j0, tau_c, initial_sign_mode };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_j0.is_finite() && self.amplitude_j0 >= 0.0) {
            return Err(Error::Parameter(format!(
                "amplitude_j0 must be finite and nonnegative, got {}",
                self.amplitude_j0
            )));
        }
        if !(self.tau_c.is_finite() && self.tau_c > 0.0) {
            return Err(Error::Parameter(format!(
                "tau_c must be finite and positive, got {}",
                self.tau_c
            )));
        }
        Ok(())
    }
}

/// One telegraph realization over [0, horizon].
#[derive(Clone, Debug, PartialEq)]
pub struct RtnTrajectory {
    jump_times: Vec<f64>,
    initial_sign: i8,
    amplitude_j0: f64,
    horizon: f64,
}

impl RtnTrajectory {
    /// Assemble from explicit parts, enforcing the invariants: jump times
    /// strictly increasing within (0, horizon], sign ±1.
    pub fn from_parts(
        jump_times: Vec<f64>,
        initial_sign: i8,
        amplitude_j0: f64,
        horizon: f64,
    ) -> Result<Self> {
        if initial_sign != 1 && initial_sign != -1 {
            return Err(Error::Parameter(format!(
                "initial_sign must be +1 or -1, got {initial_sign}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
        }
        if !(amplitude_j0.is_finite() && amplitude_j0 >= 0.0) {
            return Err(Error::Parameter(format!(
                "amplitude_j0 must be nonnegative, got {amplitude_j0}"
            )));
        }
        let mut prev = 0.0;
        for &t in &jump_times {
            if t <= prev || t > horizon {
                return Err(Error::Parameter(format!(
                    "jump times must be strictly increasing within (0, {horizon}], offending time {t}"
                )));
            }
            prev = t;
        }
        Ok(RtnTrajectory { jump_times, initial_sign, amplitude_j0, horizon })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn initial_sign(&self) -> i8 {
        self.initial_sign
    }

    pub fn amplitude_j0(&self) -> f64 {
        self.amplitude_j0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Sign (±1) at time t under the Θ(0)=1 convention.
    fn sign_at(&self, t: f64) -> f64 {
        let flips = self.jump_times.partition_point(|&tj| tj <= t);
        let s = self.initial_sign as f64;
        if flips % 2 == 0 {
            s
        } else {
            -s
        }
    }
}

fn draw_open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // rejects the measure-zero 0.0 so that ln(p) stays finite
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Build a trajectory from explicit uniform draws, one per gap. Deterministic
/// path used by generate_trajectory and directly by tests.
pub fn trajectory_from_uniform_draws<I>(
    params: &RtnParams,
    horizon: f64,
    initial_sign: i8,
    draws: I,
) -> Result<RtnTrajectory>
where
    I: IntoIterator<Item = f64>,
{
    params.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    let mut jump_times = Vec::new();
    let mut t = 0.0;
    for p in draws {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Parameter(format!("uniform draw must lie in (0,1), got {p}")));
        }
        t += -params.tau_c * p.ln();
        if t > horizon {
            break;
        }
        jump_times.push(t);
    }
    RtnTrajectory::from_parts(jump_times, initial_sign, params.amplitude_j0, horizon)
}

/// Draw one telegraph realization over [0, horizon]. The initial sign is
/// drawn first, then gaps until the horizon is crossed; the crossing jump
/// itself is discarded.
pub fn generate_trajectory<R: Rng + ?Sized>(
    params: &RtnParams,
    horizon: f64,
    rng: &mut R,
) -> Result<RtnTrajectory> {
    params.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    let initial_sign: i8 = match params.initial_sign_mode {
        InitialSignMode::FixedPlus => 1,
        InitialSignMode::RandomSymmetric => {
            if rng.gen_bool(0.5) {
                1
            } else {
                -1
            }
        }
    };
    let mut jump_times = Vec::with_capacity((1.5 * horizon / params.tau_c) as usize + 4);
    let mut t = 0.0;
    loop {
        t += -params.tau_c * draw_open_unit(rng).ln();
        if t > horizon {
            break;
        }
        jump_times.push(t);
    }
    RtnTrajectory::from_parts(jump_times, initial_sign, params.amplitude_j0, horizon)
}

/// Signed amplitude at time t.
pub fn value_at(traj: &RtnTrajectory, t: f64) -> Result<f64> {
    if !(0.0..=traj.horizon).contains(&t) {
        return Err(Error::Parameter(format!(
            "query time {t} outside trajectory span [0, {}]",
            traj.horizon
        )));
    }
    Ok(traj.sign_at(t) * traj.amplitude_j0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AutocorrPoint {
    pub lag: f64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimate the normalized autocorrelation ⟨J(t)J(t+Δ)⟩/J0² at the given
/// lags, averaging over realizations and over a base-time grid of step
/// τc/4. The standard error is across realizations (each realization
/// contributes one time-averaged product per lag).
pub fn empirical_autocorrelation<R: Rng + ?Sized>(
    params: &RtnParams,
    lags: &[f64],
    n_realizations: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<AutocorrPoint>> {
    params.validate()?;
    if lags.is_empty() {
        return Err(Error::Parameter("lag list is empty".into()));
    }
    if n_realizations < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 realizations, got {n_realizations}"
        )));
    }
    let max_lag = lags.iter().cloned().fold(0.0, f64::max);
    if lags.iter().any(|&l| l < 0.0) || max_lag >= horizon {
        return Err(Error::Parameter(format!(
            "lags must lie in [0, horizon={horizon}), max lag {max_lag}"
        )));
    }

    let step = params.tau_c / 4.0;
    let span = horizon - max_lag;
    let n_base = ((span / step).floor() as usize).clamp(1, 4096);

    // Welford accumulators over realizations, one per lag
    let mut mean = vec![0.0; lags.len()];
    let mut m2 = vec![0.0; lags.len()];

    for real_idx in 0..n_realizations {
        let traj = generate_trajectory(params, horizon, rng)?;
        for (li, &lag) in lags.iter().enumerate() {
            // two monotone scans, one for t and one for t + lag
            let mut idx_a = 0usize;
            let mut idx_b = 0usize;
            let jt = traj.jump_times.as_slice();
            let s0 = traj.initial_sign as f64;
            let mut acc = 0.0;
            for k in 0..n_base {
                let t = k as f64 * step;
                while idx_a < jt.len() && jt[idx_a] <= t {
                    idx_a += 1;
                }
                while idx_b < jt.len() && jt[idx_b] <= t + lag {
                    idx_b += 1;
                }
                let sa = if idx_a.is_multiple_of(2) { s0 } else { -s0 };
                let sb = if idx_b.is_multiple_of(2) { s0 } else { -s0 };
                acc += sa * sb;
            }
            let r = acc / n_base as f64;
            let delta = r - mean[li];
            mean[li] += delta / (real_idx + 1) as f64;
            m2[li] += delta * (r - mean[li]);
        }
    }

    let n = n_realizations as f64;
    Ok(lags
        .iter()
        .enumerate()
        .map(|(li, &lag)| AutocorrPoint {
            lag,
            estimate: mean[li],
            std_error: (m2[li] / (n - 1.0)).max(0.0).sqrt() / n.sqrt(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(tau_c: f64) -> RtnParams {
        RtnParams {
            amplitude_j0: 1.0,
            tau_c,
            initial_sign_mode: InitialSignMode::RandomSymmetric,
        }
    }

    #[test]
    fn explicit_draws_reproduce_hand_computed_jumps() {
        // gaps: -10*ln(e^-1) = 10, -10*ln(e^-0.5) = 5
        let traj = trajectory_from_uniform_draws(
            &params(10.0),
            100.0,
            1,
            [(-1.0_f64).exp(), (-0.5_f64).exp(), 1e-12],
        )
        .unwrap();
        assert_eq!(traj.jump_times().len(), 2);
        assert!((traj.jump_times()[0] - 10.0).abs() < 1e-12);
        assert!((traj.jump_times()[1] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn zero_horizon_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_trajectory(&params(10.0), 0.0, &mut rng).is_err());
        assert!(RtnParams::new(1.0, 0.0, InitialSignMode::FixedPlus).is_err());
        assert!(RtnParams::new(-1.0, 1.0, InitialSignMode::FixedPlus).is_err());
    }

    #[test]
    fn value_at_flips_after_each_jump() {
        let traj = RtnTrajectory::from_parts(vec![10.0, 15.0], 1, 1.0, 100.0).unwrap();
        assert_eq!(value_at(&traj, 5.0).unwrap(), 1.0);
        assert_eq!(value_at(&traj, 12.0).unwrap(), -1.0);
        assert_eq!(value_at(&traj, 20.0).unwrap(), 1.0);
        // jump exactly at the query time has taken effect
        assert_eq!(value_at(&traj, 10.0).unwrap(), -1.0);
        assert!(value_at(&traj, -0.1).is_err());
        assert!(value_at(&traj, 100.1).is_err());
    }

    #[test]
    fn no_jumps_constant_value() {
        let traj = RtnTrajectory::from_parts(vec![], 1, 2.5, 50.0).unwrap();
        for t in [0.0, 12.3, 50.0] {
            assert_eq!(value_at(&traj, t).unwrap(), 2.5);
        }
    }

    // Oracle: an independent Poisson sampler (Knuth product-of-uniforms),
    // never touching the trajectory code path. Counts over [0, T] must agree
    // with the trajectory jump counts in the mean.
    #[test]
    fn jump_counts_match_poisson_oracle() {
        let tau_c = 9.0;
        let horizon = 600.0;
        let n = 100_000usize;
        let p = params(tau_c);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut mean_traj = 0.0;
        let mut m2_traj = 0.0;
        for i in 0..n {
            let count = generate_trajectory(&p, horizon, &mut rng).unwrap().jump_times().len();
            let d = count as f64 - mean_traj;
            mean_traj += d / (i + 1) as f64;
            m2_traj += d * (count as f64 - mean_traj);
        }
        let se_traj = (m2_traj / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();

        let lambda = horizon / tau_c; // 66.67
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let floor = (-lambda).exp();
        let mut mean_pois = 0.0;
        let mut m2_pois = 0.0;
        for i in 0..n {
            let mut k = 0u64;
            let mut prod: f64 = 1.0;
            loop {
                prod *= rng.gen::<f64>();
                if prod <= floor {
                    break;
                }
                k += 1;
            }
            let d = k as f64 - mean_pois;
            mean_pois += d / (i + 1) as f64;
            m2_pois += d * (k as f64 - mean_pois);
        }
        let se_pois = (m2_pois / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();

        let se = (se_traj * se_traj + se_pois * se_pois).sqrt();
        assert!(
            (mean_traj - mean_pois).abs() <= 3.0 * se,
            "trajectory mean {mean_traj} vs Poisson oracle {mean_pois} (3 s.e. = {})",
            3.0 * se
        );
        assert!((mean_traj - lambda).abs() <= 4.0 * se_traj.max(1e-12));
    }

    #[test]
    fn gaps_pass_ks_test_against_exponential() {
        let tau_c = 7.0;
        let p = params(tau_c);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut gaps = Vec::with_capacity(20_000);
        while gaps.len() < 12_000 {
            let traj = generate_trajectory(&p, 2000.0, &mut rng).unwrap();
            let jt = traj.jump_times();
            let mut prev = 0.0;
            for &t in jt {
                gaps.push(t - prev);
                prev = t;
            }
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = gaps.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &g) in gaps.iter().enumerate() {
            let f = 1.0 - (-g / tau_c).exp();
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            d = d.max((f - lo).abs()).max((hi - f).abs());
        }
        // critical value at significance 0.001: sqrt(-ln(alpha/2)/2)
        let critical = (-(0.0005_f64).ln() / 2.0).sqrt();
        assert!(
            n.sqrt() * d < critical,
            "KS statistic sqrt(n)*D = {} exceeds {critical}",
            n.sqrt() * d
        );
    }

    #[test]
    fn autocorrelation_matches_exponential_both_sign_modes() {
        for mode in [InitialSignMode::RandomSymmetric, InitialSignMode::FixedPlus] {
            let tau_c = 10.0;
            let p = RtnParams { amplitude_j0: 1.0, tau_c, initial_sign_mode: mode };
            let lags = [0.0, tau_c / 2.0, tau_c, 2.0 * tau_c];
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let pts =
                empirical_autocorrelation(&p, &lags, 4000, 12.0 * tau_c, &mut rng).unwrap();
            for pt in &pts {
                let expect = (-2.0 * pt.lag / tau_c).exp();
                assert!(
                    (pt.estimate - expect).abs() <= 3.0 * pt.std_error + 1e-12,
                    "mode {mode:?} lag {}: estimate {} vs {expect}, se {}",
                    pt.lag,
                    pt.estimate,
                    pt.std_error
                );
            }
            // zero lag is exact: products of identical signs
            assert!((pts[0].estimate - 1.0).abs() < 1e-12);
            assert!(pts[0].std_error < 1e-12);
        }
    }

    #[test]
    fn independent_trajectories_uncorrelated() {
        let p = params(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let t_query = 12.0;
        let mut sum = 0.0;
        for _ in 0..n {
            let a = generate_trajectory(&p, 20.0, &mut rng).unwrap();
            let b = generate_trajectory(&p, 20.0, &mut rng).unwrap();
            sum += value_at(&a, t_query).unwrap() * value_at(&b, t_query).unwrap();
        }
        let mean = sum / n as f64;
        // products are ±1, so the s.e. of the mean is 1/sqrt(n)
        let se = 1.0 / (n as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "cross-moment {mean}, 3 s.e. {}", 3.0 * se);
    }

    #[test]
    fn symmetric_mode_mean_is_zero() {
        let p = params(8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40_000;
        for t_query in [0.0, 3.0, 15.0] {
            let mut sum = 0.0;
            for _ in 0..n {
                let traj = generate_trajectory(&p, 20.0, &mut rng).unwrap();
                sum += value_at(&traj, t_query).unwrap();
            }
            let mean = sum / n as f64;
            let se = 1.0 / (n as f64).sqrt();
            assert!(mean.abs() <= 3.0 * se, "mean {mean} at t={t_query}");
        }
    }

    #[test]
    fn autocorrelation_rejects_bad_input() {
        let p = params(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(empirical_autocorrelation(&p, &[], 100, 100.0, &mut rng).is_err());
        assert!(empirical_autocorrelation(&p, &[5.0], 1, 100.0, &mut rng).is_err());
        assert!(empirical_autocorrelation(&p, &[100.0], 100, 100.0, &mut rng).is_err());
    }
}
