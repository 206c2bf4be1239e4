//! Trajectory averaging with reproducible parallelism.
//!
//! Each trajectory index owns a counter-derived random stream (ChaCha with
//! the master seed as key and the index as stream number), so the ensemble
//! is a pure function of (protocol, noise, config) no matter how many
//! workers execute it. Trajectories are grouped into fixed batches; batches
//! are reduced in index order, which keeps the floating-point summation
//! order, and therefore every output bit, independent of scheduling.
//!
//! DDSE and concurrence are computed on the averaged ρ(t), not averaged over
//! per-trajectory values: the experimental curves this reproduces are
//! reconstructed from ensemble-averaged density matrices. Standard errors
//! come from the spread of per-batch DDSE values.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entanglement::ddse;
use crate::error::{Error, Result};
use crate::noise::{generate_trajectory, RtnParams};
use crate::protocol::Protocol;
use crate::qdyn::{normalized_projector, DensityMatrix, PropagatorTable, StateVector};

#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub n_trajectories: usize,
    pub batch_size: usize,
    pub master_seed: u64,
    /// Strictly increasing sample times within the protocol duration.
    pub sample_grid: Vec<f64>,
}

impl EnsembleConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::Parameter("n_trajectories must be at least 1".into()));
        }
        if self.batch_size == 0 || !self.n_trajectories.is_multiple_of(self.batch_size) {
            return Err(Error::Parameter(format!(
                "batch_size {} must divide n_trajectories {}",
                self.batch_size, self.n_trajectories
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub rho_avg: Vec<DensityMatrix>,
    pub ddse: Vec<f64>,
    pub concurrence: Vec<f64>,
    /// Standard error of DDSE at each time, from batch means.
    pub ddse_stderr: Vec<f64>,
}

/// The random stream owned by one trajectory index.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Run the full ensemble: per trajectory, draw one telegraph realization per
/// qubit (qubit 1 first), propagate |↑↑⟩, and accumulate |ψ(t)⟩⟨ψ(t)|.
pub fn run_ensemble(
    protocol: &Protocol,
    noise: &RtnParams,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    noise.validate()?;
    let total = protocol.total_duration();
    let grid = &cfg.sample_grid;
    let n_times = grid.len();

    let table = PropagatorTable::build(protocol, noise.amplitude_j0, noise.amplitude_j0)?;
    let psi0 = StateVector::up_up();

    let n_batches = cfg.n_trajectories / cfg.batch_size;
    let batch_sums: Vec<Result<Vec<Matrix4<C64>>>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Matrix4::<C64>::zeros(); n_times];
            for i in b * cfg.batch_size..(b + 1) * cfg.batch_size {
                let mut rng = trajectory_rng(cfg.master_seed, i as u64);
                let traj1 = generate_trajectory(noise, total, &mut rng)?;
                let traj2 = generate_trajectory(noise, total, &mut rng)?;
                let states =
                    crate::qdyn::propagate_with_table(&psi0, protocol, &traj1, &traj2, grid, &table)?;
                for (k, psi) in states.iter().enumerate() {
                    acc[k] += normalized_projector(psi.amplitudes());
                }
            }
            Ok(acc)
        })
        .collect();

    let mut batches = Vec::with_capacity(n_batches);
    for b in batch_sums {
        batches.push(b?);
    }

    // index-ordered reduction: bitwise identical for any worker count
    let scale = C64::new(1.0 / cfg.n_trajectories as f64, 0.0);
    let mut rho_avg = Vec::with_capacity(n_times);
    for k in 0..n_times {
        let mut sum = Matrix4::<C64>::zeros();
        for batch in &batches {
            sum += batch[k];
        }
        rho_avg.push(DensityMatrix::new(sum * scale)?);
    }

    let mut ddse_curve = Vec::with_capacity(n_times);
    let mut conc_curve = Vec::with_capacity(n_times);
    for rho in &rho_avg {
        let d = ddse(rho)?;
        ddse_curve.push(d);
        conc_curve.push(d.max(0.0));
    }

    let batch_scale = C64::new(1.0 / cfg.batch_size as f64, 0.0);
    let batch_ddse: Vec<Result<Vec<f64>>> = batches
        .par_iter()
        .map(|batch| {
            batch
                .iter()
                .map(|sum| ddse(&DensityMatrix::new(sum * batch_scale)?))
                .collect()
        })
        .collect();
    let mut per_batch = Vec::with_capacity(n_batches);
    for b in batch_ddse {
        per_batch.push(b?);
    }

    let ddse_stderr = (0..n_times)
        .map(|k| {
            if n_batches < 2 {
                return 0.0;
            }
            let mean = per_batch.iter().map(|b| b[k]).sum::<f64>() / n_batches as f64;
            let var = per_batch.iter().map(|b| (b[k] - mean).powi(2)).sum::<f64>()
                / (n_batches - 1) as f64;
            (var / n_batches as f64).sqrt()
        })
        .collect();

    Ok(EnsembleResult {
        times: grid.clone(),
        rho_avg,
        ddse: ddse_curve,
        concurrence: conc_curve,
        ddse_stderr,
    })
}

/// Sup-norm DDSE difference between runs at n and 2n trajectories, same
/// master seed. A convergence diagnostic, nothing more.
pub fn convergence_report(
    protocol: &Protocol,
    noise: &RtnParams,
    cfg: &EnsembleConfig,
) -> Result<f64> {
    let base = run_ensemble(protocol, noise, cfg)?;
    let doubled = run_ensemble(
        protocol,
        noise,
        &EnsembleConfig {
            n_trajectories: 2 * cfg.n_trajectories,
            ..cfg.clone()
        },
    )?;
    Ok(base
        .ddse
        .iter()
        .zip(doubled.ddse.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::InitialSignMode;
    use crate::protocol::{shulman_protocol, uniform_grid, DbMode};
    use crate::qdyn::{max_abs, propagate_trajectory};
    use crate::noise::RtnTrajectory;

    fn noise(j0: f64, tau_c: f64) -> RtnParams {
        RtnParams {
            amplitude_j0: j0,
            tau_c,
            initial_sign_mode: InitialSignMode::RandomSymmetric,
        }
    }

    fn small_cfg(n: usize, batch: usize, grid: Vec<f64>) -> EnsembleConfig {
        EnsembleConfig {
            n_trajectories: n,
            batch_size: batch,
            master_seed: 2024,
            sample_grid: grid,
        }
    }

    #[test]
    fn config_validation() {
        let protocol = shulman_protocol(25.0, 1.0, DbMode::Persistent, 100.0).unwrap();
        let bad = small_cfg(0, 1, vec![0.0]);
        assert!(run_ensemble(&protocol, &noise(0.0, 9.0), &bad).is_err());
        let bad = small_cfg(10, 3, vec![0.0]);
        assert!(run_ensemble(&protocol, &noise(0.0, 9.0), &bad).is_err());
    }

    #[test]
    fn noise_free_ensemble_is_pure_and_single_trajectory() {
        let protocol = shulman_protocol(25.0, 1.0, DbMode::OffAfterPrep, 300.0).unwrap();
        let grid = uniform_grid(protocol.total_duration(), 5.0);
        let result =
            run_ensemble(&protocol, &noise(0.0, 9.0), &small_cfg(40, 10, grid.clone())).unwrap();

        for rho in &result.rho_avg {
            assert!((rho.purity() - 1.0).abs() < 1e-10);
        }

        // equals one explicitly propagated trajectory
        let still = RtnTrajectory::from_parts(vec![], 1, 0.0, protocol.total_duration()).unwrap();
        let states =
            propagate_trajectory(&StateVector::up_up(), &protocol, &still, &still, &grid).unwrap();
        for (k, psi) in states.iter().enumerate() {
            let direct = psi.density_matrix();
            let diff = max_abs(&(result.rho_avg[k].matrix() - direct.matrix()));
            assert!(diff < 1e-12, "time {}: {diff}", grid[k]);
        }
        for se in &result.ddse_stderr {
            assert!(*se < 1e-12);
        }
    }

    #[test]
    fn single_trajectory_stays_pure_with_noise() {
        let protocol = shulman_protocol(10.0, 1.0, DbMode::Persistent, 200.0).unwrap();
        let grid = uniform_grid(protocol.total_duration(), 10.0);
        let result =
            run_ensemble(&protocol, &noise(0.05, 9.0), &small_cfg(1, 1, grid)).unwrap();
        for rho in &result.rho_avg {
            assert!((rho.purity() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn averaged_state_dephases() {
        let protocol = shulman_protocol(10.0, 1.0, DbMode::Persistent, 200.0).unwrap();
        let grid = vec![0.0, 10.0, 60.0, 130.0, 210.0];
        let result =
            run_ensemble(&protocol, &noise(0.05, 9.0), &small_cfg(400, 50, grid)).unwrap();
        assert!((result.rho_avg[0].purity() - 1.0).abs() < 1e-12);
        // purity decreases once noise has had time to act
        assert!(result.rho_avg[2].purity() < 1.0 - 1e-3);
        assert!(result.rho_avg[4].purity() < result.rho_avg[2].purity() + 1e-6);
        for rho in &result.rho_avg {
            assert!(rho.purity() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let protocol = shulman_protocol(25.0, 1.0, DbMode::Persistent, 150.0).unwrap();
        let grid = uniform_grid(protocol.total_duration(), 5.0);
        let cfg = small_cfg(60, 10, grid);
        let p = noise(0.02, 9.0);

        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| run_ensemble(&protocol, &p, &cfg)).unwrap();
        let r4 = pool4.install(|| run_ensemble(&protocol, &p, &cfg)).unwrap();

        for (a, b) in r1.rho_avg.iter().zip(r4.rho_avg.iter()) {
            for i in 0..4 {
                for j in 0..4 {
                    let (x, y) = (a.matrix()[(i, j)], b.matrix()[(i, j)]);
                    assert!(x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
                }
            }
        }
        for (a, b) in r1.ddse.iter().zip(r4.ddse.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn trajectory_streams_are_stable_under_reindexing() {
        // stream i draws the same trajectory no matter which batch ran first
        let p = noise(0.03, 7.0);
        let mut a = trajectory_rng(99, 5);
        let mut b = trajectory_rng(99, 5);
        let t1 = generate_trajectory(&p, 100.0, &mut a).unwrap();
        let t2 = generate_trajectory(&p, 100.0, &mut b).unwrap();
        assert_eq!(t1, t2);
        let mut c = trajectory_rng(99, 6);
        let t3 = generate_trajectory(&p, 100.0, &mut c).unwrap();
        assert_ne!(t1, t3);
    }

    #[test]
    fn density_matrix_invariants_along_run() {
        let protocol = shulman_protocol(25.0, 1.0, DbMode::Persistent, 100.0).unwrap();
        let grid = uniform_grid(protocol.total_duration(), 25.0);
        let result =
            run_ensemble(&protocol, &noise(0.0116, 9.0), &small_cfg(200, 50, grid)).unwrap();
        for (k, rho) in result.rho_avg.iter().enumerate() {
            let m = rho.matrix();
            assert!((m.trace().re - 1.0).abs() < 1e-12);
            assert!(m.trace().im.abs() < 1e-13);
            assert!(max_abs(&(m - m.adjoint())) < 1e-12);
            assert_eq!(
                result.concurrence[k],
                result.ddse[k].max(0.0),
                "concurrence must clamp ddse"
            );
        }
    }

    #[test]
    fn convergence_diagnostic_behaves() {
        let protocol = shulman_protocol(25.0, 1.0, DbMode::OffAfterPrep, 150.0).unwrap();
        let grid = uniform_grid(protocol.total_duration(), 5.0);

        // noise-free: every trajectory identical. Averaging n vs 2n copies
        // rounds differently in the last bit, and the sqrt at near-zero
        // eigenvalues amplifies that to ~1e-8.
        let d = convergence_report(&protocol, &noise(0.0, 9.0), &small_cfg(10, 5, grid.clone()))
            .unwrap();
        assert!(d.abs() < 1e-6, "noise-free convergence residue: {d}");

        // tiny vs moderate ensembles: difference shrinks with n
        let p = noise(0.0116, 9.0);
        let d_small = convergence_report(&protocol, &p, &small_cfg(10, 5, grid.clone())).unwrap();
        let d_large = convergence_report(&protocol, &p, &small_cfg(320, 40, grid)).unwrap();
        assert!(
            d_large < d_small,
            "sup|dDDSE| should shrink with n: {d_large} vs {d_small}"
        );
    }
}
