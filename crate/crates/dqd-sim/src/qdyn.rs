//! Two-qubit Hamiltonians and exact piecewise-constant propagation.
//!
//! Basis ordering is fixed as (|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩) with |↑⟩ the singlet
//! and |↓⟩ the triplet of each S-T0 qubit. Units: time in ns, angular
//! frequencies in rad/ns, ħ = 1.
//!
//! The total Hamiltonian (exchange + gradient + telegraph shifts) is real
//! symmetric in this basis, and it is exactly constant between telegraph
//! jumps, phase boundaries, and sample points. Each segment is therefore
//! advanced by spectral decomposition, exp(−iH dt) applied in the eigenbasis,
//! with no truncation error.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::noise::RtnTrajectory;
use crate::protocol::Protocol;

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

pub const HERMITICITY_TOL: f64 = 1e-13;
pub const DENSITY_TOL: f64 = 1e-12;
pub const PSD_EIGEN_FLOOR: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> Mat2 {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match axis {
        Axis::X => Mat2::new(zero, one, one, zero),
        Axis::Y => Mat2::new(zero, C64::new(0.0, -1.0), C64::new(0.0, 1.0), zero),
        Axis::Z => Mat2::new(one, zero, zero, -one),
    }
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// Kronecker product in the fixed basis ordering: `kron(a, b)` acts with `a`
/// on qubit 1 and `b` on qubit 2.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Largest entry modulus; the matrix-agreement measure used throughout.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// The five control amplitudes of the coherent two-qubit Hamiltonian,
/// all in rad/ns: exchange splittings `j1`, `j2`, capacitive coupling `j12`,
/// and gradient drives `db1`, `db2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlParams {
    pub j1: f64,
    pub j2: f64,
    pub j12: f64,
    pub db1: f64,
    pub db2: f64,
}

impl ControlParams {
    pub const ZERO: ControlParams = ControlParams {
        j1: 0.0,
        j2: 0.0,
        j12: 0.0,
        db1: 0.0,
        db2: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let vals = [self.j1, self.j2, self.j12, self.db1, self.db2];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("control amplitudes must be finite".into()));
        }
        Ok(())
    }
}

/// 4×4 Hermitian operator, checked at construction to 1e-13 entrywise.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp(Mat4);

impl HermitianOp {
    pub fn new(m: Mat4) -> Result<Self> {
        let adjoint = m.adjoint();
        for i in 0..4 {
            for j in 0..4 {
                let d = m[(i, j)] - adjoint[(i, j)];
                if d.norm() > HERMITICITY_TOL {
                    return Err(Error::Contract(format!(
                        "operator is not Hermitian: |H - H†| = {:.3e} at ({}, {})",
                        d.norm(),
                        i,
                        j
                    )));
                }
            }
        }
        Ok(HermitianOp(m))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }
}

/// Pure two-qubit state; Euclidean norm 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec4);

impl StateVector {
    pub fn new(v: Vec4) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Contract(format!(
                "state norm is {norm}, expected 1 within {DENSITY_TOL:e}"
            )));
        }
        Ok(StateVector(v))
    }

    pub(crate) fn new_unchecked(v: Vec4) -> Self {
        StateVector(v)
    }

    /// |↑↑⟩, both qubits in the singlet: the initial state of every run.
    pub fn up_up() -> Self {
        let mut v = Vec4::zeros();
        v[0] = C64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn amplitudes(&self) -> &Vec4 {
        &self.0
    }

    /// Projector |ψ⟩⟨ψ| divided by ⟨ψ|ψ⟩, so the trace is exactly 1 even
    /// after norm drift of order 1e-13 along a long trajectory.
    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix(normalized_projector(&self.0))
    }
}

pub(crate) fn normalized_projector(v: &Vec4) -> Mat4 {
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let mut out = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = v[i] * v[j].conj() / n2;
        }
    }
    out
}

/// Two-qubit density matrix: Hermitian to 1e-12, unit trace to 1e-12,
/// eigenvalues ≥ −1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    pub fn new(m: Mat4) -> Result<Self> {
        for i in 0..4 {
            for j in i..4 {
                let d = m[(i, j)] - m[(j, i)].conj();
                if d.norm() > DENSITY_TOL {
                    return Err(Error::Contract(format!(
                        "density matrix is not Hermitian: deviation {:.3e} at ({}, {})",
                        d.norm(),
                        i,
                        j
                    )));
                }
            }
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::Contract(format!(
                "density matrix trace is {trace}, expected 1 within {DENSITY_TOL:e}"
            )));
        }
        let eig = m.symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < PSD_EIGEN_FLOOR {
            return Err(Error::Contract(format!(
                "density matrix has eigenvalue {min:.3e} below {PSD_EIGEN_FLOOR:e}"
            )));
        }
        Ok(DensityMatrix(m))
    }

    pub(crate) fn new_unchecked(m: Mat4) -> Self {
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity() * C64::new(0.25, 0.0))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

/// H = ½(J1 σz⊗I + J2 I⊗σz) + (J12/4)(σz⊗σz − σz⊗I − I⊗σz)
///   + ½(ΔB1 σx⊗I + ΔB2 I⊗σx)
pub fn build_system_hamiltonian(p: &ControlParams) -> HermitianOp {
    let sz = pauli(Axis::Z);
    let sx = pauli(Axis::X);
    let id = identity2();
    let z1 = kron(&sz, &id);
    let z2 = kron(&id, &sz);
    let zz = kron(&sz, &sz);
    let x1 = kron(&sx, &id);
    let x2 = kron(&id, &sx);

    let c = |x: f64| C64::new(x, 0.0);
    let m = z1 * c(0.5 * p.j1)
        + z2 * c(0.5 * p.j2)
        + (zz - z1 - z2) * c(0.25 * p.j12)
        + x1 * c(0.5 * p.db1)
        + x2 * c(0.5 * p.db2);
    HermitianOp(m)
}

/// Telegraph-shift term v1 σz⊗I + v2 I⊗σz. No ½ factor, unlike the
/// exchange terms of the coherent Hamiltonian.
pub fn build_noise_hamiltonian(v1: f64, v2: f64) -> HermitianOp {
    let sz = pauli(Axis::Z);
    let id = identity2();
    let m = kron(&sz, &id) * C64::new(v1, 0.0) + kron(&id, &sz) * C64::new(v2, 0.0);
    HermitianOp(m)
}

/// Eigendecomposition of one constant Hamiltonian, reusable across segments
/// of any length: exp(−iH dt)ψ = V exp(−iE dt) V†ψ.
#[derive(Clone, Debug)]
pub struct SegmentPropagator {
    vecs: Mat4,
    vecs_adj: Mat4,
    vals: Vector4<f64>,
}

impl SegmentPropagator {
    pub fn new(h: &HermitianOp) -> Self {
        let eig = h.matrix().symmetric_eigen();
        SegmentPropagator {
            vecs_adj: eig.eigenvectors.adjoint(),
            vecs: eig.eigenvectors,
            vals: eig.eigenvalues,
        }
    }

    pub fn step(&self, psi: &Vec4, dt: f64) -> Vec4 {
        let mut c = self.vecs_adj * psi;
        for k in 0..4 {
            let phase = -self.vals[k] * dt;
            c[k] *= C64::new(phase.cos(), phase.sin());
        }
        self.vecs * c
    }

    /// Full unitary exp(−iH dt), used by invariant checks.
    pub fn unitary(&self, dt: f64) -> Mat4 {
        let mut d = Mat4::zeros();
        for k in 0..4 {
            let phase = -self.vals[k] * dt;
            d[(k, k)] = C64::new(phase.cos(), phase.sin());
        }
        self.vecs * d * self.vecs_adj
    }
}

/// Advance `psi` by exp(−i h dt). Exact up to roundoff; norm preserved
/// to 1e-12.
pub fn evolve_segment(psi: &StateVector, h: &HermitianOp, dt: f64) -> Result<StateVector> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::Parameter(format!(
            "segment length must be finite and nonnegative, got {dt}"
        )));
    }
    let prop = SegmentPropagator::new(h);
    Ok(StateVector::new_unchecked(prop.step(psi.amplitudes(), dt)))
}

/// Per-phase propagators for the four telegraph sign combinations.
/// Phases whose controls ignore the noise (inactive or zero amplitude)
/// collapse to a single entry.
pub(crate) struct PropagatorTable {
    phases: Vec<PhasePropagators>,
}

enum PhasePropagators {
    Uniform(Box<SegmentPropagator>),
    BySign(Box<[SegmentPropagator; 4]>),
}

fn sign_index(s1: i8, s2: i8) -> usize {
    let a = if s1 > 0 { 0 } else { 1 };
    let b = if s2 > 0 { 0 } else { 1 };
    2 * a + b
}

impl PropagatorTable {
    pub fn build(protocol: &Protocol, amp1: f64, amp2: f64) -> Result<PropagatorTable> {
        let mut phases = Vec::with_capacity(protocol.phases().len());
        for phase in protocol.phases() {
            phase.controls.validate()?;
            let h_sys = build_system_hamiltonian(&phase.controls);
            let coupled = phase.noise_active && (amp1 != 0.0 || amp2 != 0.0);
            if !coupled {
                phases.push(PhasePropagators::Uniform(Box::new(SegmentPropagator::new(&h_sys))));
                continue;
            }
            let make = |s1: f64, s2: f64| {
                let h_noise = build_noise_hamiltonian(s1 * amp1, s2 * amp2);
                let total = HermitianOp(h_sys.matrix() + h_noise.matrix());
                SegmentPropagator::new(&total)
            };
            phases.push(PhasePropagators::BySign(Box::new([
                make(1.0, 1.0),
                make(1.0, -1.0),
                make(-1.0, 1.0),
                make(-1.0, -1.0),
            ])));
        }
        Ok(PropagatorTable { phases })
    }

    fn get(&self, phase: usize, s1: i8, s2: i8) -> &SegmentPropagator {
        match &self.phases[phase] {
            PhasePropagators::Uniform(p) => p,
            PhasePropagators::BySign(arr) => &arr[sign_index(s1, s2)],
        }
    }

    /// True when the phase's propagator ignores the telegraph signs.
    fn sign_blind(&self, phase: usize) -> bool {
        matches!(self.phases[phase], PhasePropagators::Uniform(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    PhaseEnd,
    Jump1,
    Jump2,
    Sample(usize),
}

fn event_schedule(
    protocol: &Protocol,
    traj1: &RtnTrajectory,
    traj2: &RtnTrajectory,
    sample_grid: &[f64],
) -> Result<Vec<(f64, EventKind)>> {
    let total = protocol.total_duration();
    if traj1.horizon() < total || traj2.horizon() < total {
        return Err(Error::Parameter(format!(
            "trajectory horizons ({}, {}) shorter than protocol duration {}",
            traj1.horizon(),
            traj2.horizon(),
            total
        )));
    }
    if sample_grid.is_empty() {
        return Err(Error::Parameter("sample grid is empty".into()));
    }
    for w in sample_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Parameter("sample grid must be strictly increasing".into()));
        }
    }
    let first = sample_grid[0];
    let last = *sample_grid.last().unwrap();
    if first < 0.0 || last > total {
        return Err(Error::Parameter(format!(
            "sample grid [{first}, {last}] outside protocol duration [0, {total}]"
        )));
    }

    let mut events: Vec<(f64, EventKind)> = Vec::with_capacity(
        protocol.phases().len() + traj1.jump_times().len() + traj2.jump_times().len() + sample_grid.len(),
    );
    let mut t_acc = 0.0;
    for phase in protocol.phases() {
        t_acc += phase.duration;
        events.push((t_acc, EventKind::PhaseEnd));
    }
    for &t in traj1.jump_times().iter().take_while(|&&t| t <= total) {
        events.push((t, EventKind::Jump1));
    }
    for &t in traj2.jump_times().iter().take_while(|&&t| t <= total) {
        events.push((t, EventKind::Jump2));
    }
    for (k, &t) in sample_grid.iter().enumerate() {
        events.push((t, EventKind::Sample(k)));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(events)
}

/// Times at which the total Hamiltonian changes or the state is recorded:
/// phase boundaries, telegraph jumps of either qubit, and sample points.
/// Sorted, deduplicated, with 0 prepended.
pub fn segment_boundaries(
    protocol: &Protocol,
    traj1: &RtnTrajectory,
    traj2: &RtnTrajectory,
    sample_grid: &[f64],
) -> Result<Vec<f64>> {
    let events = event_schedule(protocol, traj1, traj2, sample_grid)?;
    let mut times = vec![0.0];
    for (t, _) in events {
        if t > *times.last().unwrap() {
            times.push(t);
        }
    }
    Ok(times)
}

/// Propagate through the protocol, holding the Hamiltonian constant between
/// events and recording the state at each sample point.
///
/// A jump at exactly time t takes effect at t (its new sign governs the
/// segment starting there), matching the telegraph convention Θ(0)=1.
pub fn propagate_trajectory(
    psi0: &StateVector,
    protocol: &Protocol,
    traj1: &RtnTrajectory,
    traj2: &RtnTrajectory,
    sample_grid: &[f64],
) -> Result<Vec<StateVector>> {
    let table = PropagatorTable::build(protocol, traj1.amplitude_j0(), traj2.amplitude_j0())?;
    propagate_with_table(psi0, protocol, traj1, traj2, sample_grid, &table)
}

pub(crate) fn propagate_with_table(
    psi0: &StateVector,
    protocol: &Protocol,
    traj1: &RtnTrajectory,
    traj2: &RtnTrajectory,
    sample_grid: &[f64],
    table: &PropagatorTable,
) -> Result<Vec<StateVector>> {
    let events = event_schedule(protocol, traj1, traj2, sample_grid)?;
    let n_phases = protocol.phases().len();

    let mut out = Vec::with_capacity(sample_grid.len());
    let mut psi = *psi0.amplitudes();
    let mut seg_start = 0.0;
    let mut phase = 0usize;
    let mut s1 = traj1.initial_sign();
    let mut s2 = traj2.initial_sign();

    for (t, kind) in events {
        // A jump inside a sign-blind phase only toggles bookkeeping.
        // Deferring the flush keeps segment splits independent of jump
        // times, so noise-free runs are bitwise stable across seeds.
        let flush = match kind {
            EventKind::Jump1 | EventKind::Jump2 => !table.sign_blind(phase),
            _ => true,
        };
        if flush && t > seg_start {
            psi = table.get(phase, s1, s2).step(&psi, t - seg_start);
            seg_start = t;
        }
        match kind {
            EventKind::PhaseEnd => {
                if phase + 1 < n_phases {
                    phase += 1;
                }
            }
            EventKind::Jump1 => s1 = -s1,
            EventKind::Jump2 => s2 = -s2,
            EventKind::Sample(_) => out.push(StateVector::new_unchecked(psi)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{InitialSignMode, RtnParams, RtnTrajectory};
    use crate::protocol::{Protocol, PulsePhase};
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag4(a: f64, b: f64, d: f64, e: f64) -> Mat4 {
        Mat4::from_diagonal(&Vec4::new(c(a), c(b), c(d), c(e)))
    }

    #[test]
    fn pauli_kron_basis_ordering() {
        let sz = pauli(Axis::Z);
        let id = identity2();
        assert_eq!(kron(&sz, &id), diag4(1.0, 1.0, -1.0, -1.0));
        assert_eq!(kron(&id, &sz), diag4(1.0, -1.0, 1.0, -1.0));
        assert_eq!(kron(&sz, &sz), diag4(1.0, -1.0, -1.0, 1.0));
    }

    #[test]
    fn kron_matches_nalgebra() {
        let sx = pauli(Axis::X);
        let sy = pauli(Axis::Y);
        assert_eq!(kron(&sx, &sy), sx.kronecker(&sy));
    }

    #[test]
    fn system_hamiltonian_zero_and_single_terms() {
        let zero = build_system_hamiltonian(&ControlParams::ZERO);
        assert_eq!(*zero.matrix(), Mat4::zeros());

        let p = ControlParams { j1: 2.0, ..ControlParams::ZERO };
        assert_eq!(*build_system_hamiltonian(&p).matrix(), diag4(1.0, 1.0, -1.0, -1.0));
    }

    // Oracle: substitute z1, z2 = ±1 directly into z1*z2 - z1 - z2 for the
    // four basis states, independent of any matrix algebra.
    #[test]
    fn coupling_term_diagonal_against_substitution_oracle() {
        let p = ControlParams { j12: 4.0, ..ControlParams::ZERO };
        let h = build_system_hamiltonian(&p);

        let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
        let expected: Vec<f64> = signs.iter().map(|(z1, z2)| z1 * z2 - z1 - z2).collect();
        assert_eq!(expected, vec![-1.0, -1.0, -1.0, 3.0]);

        for (k, want) in expected.iter().enumerate() {
            assert!((h.matrix()[(k, k)].re - want).abs() < 1e-15);
            assert!(h.matrix()[(k, k)].im.abs() < 1e-15);
        }
        // traceless, as any Pauli-product combination must be
        assert!(h.matrix().trace().norm() < 1e-15);
    }

    #[test]
    fn noise_hamiltonian_has_no_half_factor() {
        let j0 = 0.7;
        assert_eq!(
            *build_noise_hamiltonian(j0, 0.0).matrix(),
            diag4(j0, j0, -j0, -j0)
        );
        assert_eq!(
            *build_noise_hamiltonian(j0, -j0).matrix(),
            diag4(0.0, 2.0 * j0, -2.0 * j0, 0.0)
        );
        assert_eq!(*build_noise_hamiltonian(0.0, 0.0).matrix(), Mat4::zeros());
    }

    #[test]
    fn hermitian_op_rejects_non_hermitian() {
        let mut m = Mat4::zeros();
        m[(0, 1)] = c(1.0);
        assert!(HermitianOp::new(m).is_err());
    }

    #[test]
    fn state_vector_norm_checked() {
        let mut v = Vec4::zeros();
        v[0] = c(0.5);
        assert!(StateVector::new(v).is_err());
        v[0] = c(1.0);
        assert!(StateVector::new(v).is_ok());
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let psi = StateVector::up_up();
        let h = build_system_hamiltonian(&ControlParams {
            j1: 1.3,
            j2: -0.4,
            j12: 0.2,
            db1: 0.9,
            db2: 0.1,
        });
        let out = evolve_segment(&psi, &h, 0.0).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn evolve_rejects_negative_dt() {
        let psi = StateVector::up_up();
        let h = build_noise_hamiltonian(0.1, 0.0);
        assert!(evolve_segment(&psi, &h, -1.0).is_err());
    }

    // Oracle: closed-form single-qubit rotation exp(-i θ σx / 2) with θ = π/2
    // maps |↑⟩ to (|↑⟩ - i|↓⟩)/√2; the two-qubit result is its tensor square.
    #[test]
    fn prep_rotation_against_single_qubit_oracle() {
        let tau = 25.0;
        let db = PI / (2.0 * tau);
        let h = build_system_hamiltonian(&ControlParams {
            db1: db,
            db2: db,
            ..ControlParams::ZERO
        });
        let out = evolve_segment(&StateVector::up_up(), &h, tau).unwrap();

        let s = 1.0 / 2.0_f64.sqrt();
        let single = [C64::new(s, 0.0), C64::new(0.0, -s)];
        let mut expected = Vec4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                expected[2 * i + j] = single[i] * single[j];
            }
        }
        assert!((out.amplitudes() - expected).norm() < 1e-12);
    }

    #[test]
    fn diagonal_evolution_phases_only() {
        let e = 0.8;
        let h = HermitianOp::new(diag4(e, e, -e, -e)).unwrap();
        let mut v = Vec4::zeros();
        v[0] = c(s2());
        v[2] = c(s2());
        let psi = StateVector::new(v).unwrap();
        let t = 3.7;
        let out = evolve_segment(&psi, &h, t).unwrap();
        let expect0 = c(s2()) * C64::new((e * t).cos(), -(e * t).sin());
        let expect2 = c(s2()) * C64::new((e * t).cos(), (e * t).sin());
        assert!((out.amplitudes()[0] - expect0).norm() < 1e-12);
        assert!((out.amplitudes()[2] - expect2).norm() < 1e-12);
        // populations unchanged
        assert!((out.amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-12);
    }

    fn s2() -> f64 {
        1.0 / 2.0_f64.sqrt()
    }

    #[test]
    fn segment_unitarity_and_composition() {
        let h = build_system_hamiltonian(&ControlParams {
            j1: 1.76,
            j2: 2.01,
            j12: 0.022,
            db1: 0.06,
            db2: 0.06,
        });
        let prop = SegmentPropagator::new(&h);
        let u = prop.unitary(17.3);
        let err = max_abs(&(u.adjoint() * u - Mat4::identity()));
        assert!(err < 1e-12, "unitarity defect {err}");

        let psi = StateVector::up_up();
        let a = evolve_segment(&psi, &h, 5.0).unwrap();
        let ab = evolve_segment(&a, &h, 7.5).unwrap();
        let direct = evolve_segment(&psi, &h, 12.5).unwrap();
        assert!((ab.amplitudes() - direct.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn segment_energy_constant() {
        let h = build_system_hamiltonian(&ControlParams {
            j1: 0.9,
            j2: 0.3,
            j12: 0.1,
            db1: 0.2,
            db2: 0.05,
        });
        let psi0 = StateVector::up_up();
        let e0 = (psi0.amplitudes().adjoint() * h.matrix() * psi0.amplitudes())[(0, 0)].re;
        for &t in &[0.5, 3.0, 40.0, 400.0] {
            let psi = evolve_segment(&psi0, &h, t).unwrap();
            let e = (psi.amplitudes().adjoint() * h.matrix() * psi.amplitudes())[(0, 0)].re;
            assert!((e - e0).abs() < 1e-10, "energy drift {e} vs {e0} at t={t}");
        }
    }

    fn still_trajectory(horizon: f64) -> RtnTrajectory {
        RtnTrajectory::from_parts(vec![], 1, 0.0, horizon).unwrap()
    }

    #[test]
    fn propagate_single_phase_identity_grid_zero() {
        let protocol = Protocol::new(vec![PulsePhase {
            duration: 20.0,
            controls: ControlParams::ZERO,
            noise_active: true,
        }])
        .unwrap();
        let psi0 = StateVector::up_up();
        let out = propagate_trajectory(
            &psi0,
            &protocol,
            &still_trajectory(20.0),
            &still_trajectory(20.0),
            &[0.0],
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].amplitudes() - psi0.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn one_jump_gives_two_segments_plus_sample_splits() {
        let protocol = Protocol::new(vec![PulsePhase {
            duration: 20.0,
            controls: ControlParams::ZERO,
            noise_active: true,
        }])
        .unwrap();
        let jumpy = RtnTrajectory::from_parts(vec![10.0], 1, 0.5, 20.0).unwrap();
        let still = still_trajectory(20.0);

        let b = segment_boundaries(&protocol, &jumpy, &still, &[0.0]).unwrap();
        assert_eq!(b, vec![0.0, 10.0, 20.0]); // exactly 2 segments

        let b = segment_boundaries(&protocol, &jumpy, &still, &[0.0, 5.0, 20.0]).unwrap();
        assert_eq!(b, vec![0.0, 5.0, 10.0, 20.0]);
    }

    #[test]
    fn propagation_splits_at_jumps_match_manual_evolution() {
        // one phase, constant controls, one jump per qubit at distinct times
        let controls = ControlParams {
            j1: 0.8,
            j2: 0.5,
            j12: 0.07,
            db1: 0.11,
            db2: 0.04,
        };
        let protocol = Protocol::new(vec![PulsePhase {
            duration: 30.0,
            controls,
            noise_active: true,
        }])
        .unwrap();
        let amp = 0.03;
        let t1 = RtnTrajectory::from_parts(vec![12.0], 1, amp, 30.0).unwrap();
        let t2 = RtnTrajectory::from_parts(vec![21.0], -1, amp, 30.0).unwrap();

        let out = propagate_trajectory(&StateVector::up_up(), &protocol, &t1, &t2, &[30.0]).unwrap();

        // manual: [0,12) signs (+,-), [12,21) signs (-,-), [21,30] signs (-,+)
        let h_sys = build_system_hamiltonian(&controls);
        let seg = |s1: f64, s2: f64| {
            HermitianOp::new(h_sys.matrix() + build_noise_hamiltonian(s1 * amp, s2 * amp).matrix())
                .unwrap()
        };
        let psi = StateVector::up_up();
        let psi = evolve_segment(&psi, &seg(1.0, -1.0), 12.0).unwrap();
        let psi = evolve_segment(&psi, &seg(-1.0, -1.0), 9.0).unwrap();
        let psi = evolve_segment(&psi, &seg(-1.0, 1.0), 9.0).unwrap();

        assert!((out[0].amplitudes() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn norm_preserved_along_noisy_trajectory() {
        use rand::SeedableRng;
        let params = RtnParams {
            amplitude_j0: 0.05,
            tau_c: 5.0,
            initial_sign_mode: InitialSignMode::RandomSymmetric,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let total = 600.0;
        let t1 = crate::noise::generate_trajectory(&params, total, &mut rng).unwrap();
        let t2 = crate::noise::generate_trajectory(&params, total, &mut rng).unwrap();
        let protocol = crate::protocol::shulman_protocol(
            25.0,
            1.0,
            crate::protocol::DbMode::Persistent,
            total - 25.0,
        )
        .unwrap();
        let grid: Vec<f64> = (0..=600).map(|k| k as f64).collect();
        let out = propagate_trajectory(&StateVector::up_up(), &protocol, &t1, &t2, &grid).unwrap();
        for psi in &out {
            assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn short_trajectory_horizon_rejected() {
        let protocol = Protocol::new(vec![PulsePhase {
            duration: 50.0,
            controls: ControlParams::ZERO,
            noise_active: true,
        }])
        .unwrap();
        let short = still_trajectory(10.0);
        let ok = still_trajectory(50.0);
        assert!(propagate_trajectory(&StateVector::up_up(), &protocol, &short, &ok, &[0.0]).is_err());
    }
}
