//! Exact simulation of expanded circuits: state vector, full unitary and
//! density matrix.
//!
//! All three start from `|0…0⟩`, drop measurements, and report the
//! probability of index `i` under the shared bit convention (qubit `k` is
//! bit `k` of `i`). Gates act through the [`Lanes`] abstraction so the same
//! index-stride kernels serve amplitudes, matrix rows and (conjugated)
//! matrix columns.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::Distribution;
use crate::qasm::{expand_gate_calls, strip_measurements, PrimitiveGate, QasmError, QasmProgram};
use crate::scalar::Real;

pub const DEFAULT_UNITARY_LIMIT: usize = 12;
pub const DEFAULT_DM_LIMIT: usize = 10;
/// Memory guard for the state vector (2^26 amplitudes).
pub const SV_LIMIT: usize = 26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("{backend} simulation limited to {limit} qubits, circuit has {n}")]
    SizeLimit {
        backend: Backend,
        n: usize,
        limit: usize,
    },
    #[error("program declares no qubit register")]
    NoQubitRegister,
    #[error("gate acts on qubit {qubit} of a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error(transparent)]
    Qasm(QasmError),
}

impl From<QasmError> for SimError {
    fn from(err: QasmError) -> Self {
        match err {
            QasmError::UnknownGate { name, .. } => SimError::UnsupportedGate(name),
            other => SimError::Qasm(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Sv,
    Unitary,
    Dm,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Sv => "sv",
            Backend::Unitary => "unitary",
            Backend::Dm => "dm",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sv" => Ok(Backend::Sv),
            "unitary" => Ok(Backend::Unitary),
            "dm" => Ok(Backend::Dm),
            other => Err(format!("unknown simulation method `{other}`")),
        }
    }
}

/// Something gates can act on: a set of `dim` lanes addressed by basis
/// index, where a lane is an amplitude, a matrix row or a matrix column.
pub trait Lanes<T: Real> {
    fn swap(&mut self, i: usize, j: usize);
    fn scale(&mut self, i: usize, c: Complex<T>);
    /// `(lane_i, lane_j) ← m · (lane_i, lane_j)`.
    fn mix(&mut self, i: usize, j: usize, m: &[[Complex<T>; 2]; 2]);
}

/// Amplitude lanes. With `conjugate` the gate's coefficients are conjugated,
/// which turns left action on a row vector into right action by `G†`.
struct VecLanes<'a, T> {
    data: &'a mut [Complex<T>],
    conjugate: bool,
}

impl<T: Real> Lanes<T> for VecLanes<'_, T> {
    #[inline]
    fn swap(&mut self, i: usize, j: usize) {
        self.data.swap(i, j);
    }

    #[inline]
    fn scale(&mut self, i: usize, c: Complex<T>) {
        let c = if self.conjugate { c.conj() } else { c };
        self.data[i] = self.data[i] * c;
    }

    #[inline]
    fn mix(&mut self, i: usize, j: usize, m: &[[Complex<T>; 2]; 2]) {
        let (a, b) = (self.data[i], self.data[j]);
        if self.conjugate {
            self.data[i] = m[0][0].conj() * a + m[0][1].conj() * b;
            self.data[j] = m[1][0].conj() * a + m[1][1].conj() * b;
        } else {
            self.data[i] = m[0][0] * a + m[0][1] * b;
            self.data[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Rows of a row-major `dim × dim` matrix: left multiplication.
struct RowLanes<'a, T> {
    data: &'a mut [Complex<T>],
    dim: usize,
}

impl<T: Real> RowLanes<'_, T> {
    fn pair(&mut self, i: usize, j: usize) -> (&mut [Complex<T>], &mut [Complex<T>]) {
        debug_assert!(i < j);
        let (head, tail) = self.data.split_at_mut(j * self.dim);
        (
            &mut head[i * self.dim..(i + 1) * self.dim],
            &mut tail[..self.dim],
        )
    }
}

impl<T: Real> Lanes<T> for RowLanes<'_, T> {
    fn swap(&mut self, i: usize, j: usize) {
        let (a, b) = if i < j {
            self.pair(i, j)
        } else {
            self.pair(j, i)
        };
        a.swap_with_slice(b);
    }

    fn scale(&mut self, i: usize, c: Complex<T>) {
        let dim = self.dim;
        for v in &mut self.data[i * dim..(i + 1) * dim] {
            *v = *v * c;
        }
    }

    fn mix(&mut self, i: usize, j: usize, m: &[[Complex<T>; 2]; 2]) {
        let (ri, rj) = self.pair(i, j);
        for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    }
}

fn hadamard<T: Real>() -> [[Complex<T>; 2]; 2] {
    let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    [[s, s], [s, -s]]
}

fn mask_of(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, &q| m | (1 << q))
}

/// Visits index pairs `(i, i | bit)` with `bit` clear in `i`.
#[inline]
fn for_pairs(dim: usize, bit: usize, mut f: impl FnMut(usize, usize)) {
    let mut base = 0;
    while base < dim {
        for i in base..base + bit {
            f(i, i + bit);
        }
        base += 2 * bit;
    }
}

/// Applies `gate` to `dim` lanes. Cost O(dim) lane operations.
pub fn apply_gate<T: Real, L: Lanes<T>>(lanes: &mut L, dim: usize, gate: &PrimitiveGate) {
    let minus = Complex::new(-T::one(), T::zero());
    match gate {
        PrimitiveGate::H(q) => {
            let h = hadamard::<T>();
            for_pairs(dim, 1 << q, |i, j| lanes.mix(i, j, &h));
        }
        PrimitiveGate::X(q) => for_pairs(dim, 1 << q, |i, j| lanes.swap(i, j)),
        PrimitiveGate::Z(q) => {
            for_pairs(dim, 1 << q, |_, j| lanes.scale(j, minus));
        }
        PrimitiveGate::Rz { angle, qubit } => {
            let half = T::of(angle / 2.0);
            let lo = Complex::from_polar(T::one(), -half);
            let hi = Complex::from_polar(T::one(), half);
            for_pairs(dim, 1 << qubit, |i, j| {
                lanes.scale(i, lo);
                lanes.scale(j, hi);
            });
        }
        PrimitiveGate::Cx { control, target } => {
            let c = 1 << control;
            for_pairs(dim, 1 << target, |i, j| {
                if i & c != 0 {
                    lanes.swap(i, j);
                }
            });
        }
        PrimitiveGate::Cz(a, b) => {
            let mask = (1 << a) | (1 << b);
            for i in 0..dim {
                if i & mask == mask {
                    lanes.scale(i, minus);
                }
            }
        }
        PrimitiveGate::Mcmt(qubits) => {
            // diagonal: −1 on the all-ones subspace of the arguments
            let mask = mask_of(qubits);
            for i in 0..dim {
                if i & mask == mask {
                    lanes.scale(i, minus);
                }
            }
        }
        PrimitiveGate::Mcx { controls, target } => {
            let mask = mask_of(controls);
            for_pairs(dim, 1 << target, |i, j| {
                if i & mask == mask {
                    lanes.swap(i, j);
                }
            });
        }
    }
}

/// Length-`2^n` amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real = f64> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[0] = Complex::new(T::one(), T::zero());
        Self { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex<T>>) -> Self {
        assert_eq!(amps.len(), 1 << n, "amplitude count must be 2^n");
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn apply(&mut self, gate: &PrimitiveGate) {
        let dim = self.amps.len();
        apply_gate(
            &mut VecLanes {
                data: &mut self.amps,
                conjugate: false,
            },
            dim,
            gate,
        );
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Distribution<T> {
        Distribution::from_dense(self.n, self.amps.iter().map(|a| a.norm_sqr()))
    }
}

/// Row-major `2^n × 2^n` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T: Real = f64> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    /// `M ← G·M`.
    pub fn left_apply(&mut self, gate: &PrimitiveGate) {
        let dim = self.dim();
        apply_gate(
            &mut RowLanes {
                data: &mut self.data,
                dim,
            },
            dim,
            gate,
        );
    }

    /// `M ← M·G†`.
    pub fn right_apply_adjoint(&mut self, gate: &PrimitiveGate) {
        let dim = self.dim();
        for row in self.data.chunks_mut(dim) {
            apply_gate(
                &mut VecLanes {
                    data: row,
                    conjugate: true,
                },
                dim,
                gate,
            );
        }
    }

    /// `max |(M·M† − I)_ij|`.
    pub fn unitarity_error(&self) -> T {
        let dim = self.dim();
        let mut worst = T::zero();
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..dim {
                    acc = acc + self.get(i, k) * self.get(j, k).conj();
                }
                if i == j {
                    acc = acc - Complex::new(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Density matrix evolved by `ρ ← GρG†`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    rho: DenseMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        data[0] = Complex::new(T::one(), T::zero());
        Self {
            rho: DenseMatrix { n, data },
        }
    }

    pub fn apply(&mut self, gate: &PrimitiveGate) {
        self.rho.left_apply(gate);
        self.rho.right_apply_adjoint(gate);
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rho.dim())
            .map(|i| self.rho.get(i, i))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// `max |ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> T {
        let dim = self.rho.dim();
        let mut worst = T::zero();
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.rho.get(i, j) - self.rho.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Real diagonal, clamped at zero against rounding.
    pub fn probabilities(&self) -> Distribution<T> {
        Distribution::from_dense(
            self.rho.n,
            (0..self.rho.dim()).map(|i| self.rho.get(i, i).re.max(T::zero())),
        )
    }
}

/// Measurement-free primitive gate list and register width of a program.
pub fn prepare(program: &QasmProgram) -> Result<(usize, Vec<PrimitiveGate>), SimError> {
    let n = program.num_qubits().ok_or(SimError::NoQubitRegister)?;
    let gates = expand_gate_calls(&strip_measurements(program))?;
    if let Some(&qubit) = gates
        .iter()
        .flat_map(|g| g.qubits())
        .find(|&q| q >= n)
        .as_ref()
    {
        return Err(SimError::QubitOutOfRange { qubit, n });
    }
    Ok((n, gates))
}

fn check_limit(backend: Backend, n: usize, limit: usize) -> Result<(), SimError> {
    if n > limit {
        Err(SimError::SizeLimit { backend, n, limit })
    } else {
        Ok(())
    }
}

/// Gate-by-gate state-vector evolution, O(G·2^n).
pub fn sv_simulate<T: Real>(
    program: &QasmProgram,
) -> Result<(StateVector<T>, Distribution<T>), SimError> {
    let (n, gates) = prepare(program)?;
    check_limit(Backend::Sv, n, SV_LIMIT)?;
    let mut state = StateVector::zero(n);
    for gate in &gates {
        state.apply(gate);
    }
    let dist = state.probabilities();
    Ok((state, dist))
}

/// Builds the circuit unitary, then reads column 0 (`U|0…0⟩`).
pub fn unitary_simulate<T: Real>(program: &QasmProgram) -> Result<Distribution<T>, SimError> {
    unitary_simulate_with_limit(program, DEFAULT_UNITARY_LIMIT)
}

pub fn unitary_simulate_with_limit<T: Real>(
    program: &QasmProgram,
    limit: usize,
) -> Result<Distribution<T>, SimError> {
    let (n, gates) = prepare(program)?;
    let unitary = circuit_unitary::<T>(n, &gates, limit)?;
    Ok(Distribution::from_dense(
        n,
        (0..unitary.dim()).map(|i| unitary.get(i, 0).norm_sqr()),
    ))
}

pub fn circuit_unitary<T: Real>(
    n: usize,
    gates: &[PrimitiveGate],
    limit: usize,
) -> Result<DenseMatrix<T>, SimError> {
    check_limit(Backend::Unitary, n, limit)?;
    let mut unitary = DenseMatrix::identity(n);
    for gate in gates {
        unitary.left_apply(gate);
    }
    Ok(unitary)
}

/// Evolves `ρ` gate by gate; probabilities are the real diagonal.
pub fn dm_simulate<T: Real>(program: &QasmProgram) -> Result<Distribution<T>, SimError> {
    dm_simulate_with_limit(program, DEFAULT_DM_LIMIT)
}

pub fn dm_simulate_with_limit<T: Real>(
    program: &QasmProgram,
    limit: usize,
) -> Result<Distribution<T>, SimError> {
    let (n, gates) = prepare(program)?;
    check_limit(Backend::Dm, n, limit)?;
    let mut rho = DensityMatrix::zero(n);
    for gate in &gates {
        rho.apply(gate);
    }
    Ok(rho.probabilities())
}

/// Runs the chosen backend with its default size limit.
pub fn simulate<T: Real>(
    program: &QasmProgram,
    backend: Backend,
) -> Result<Distribution<T>, SimError> {
    match backend {
        Backend::Sv => sv_simulate(program).map(|(_, d)| d),
        Backend::Unitary => unitary_simulate(program),
        Backend::Dm => dm_simulate(program),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bitstring;
    use crate::qasm::fixtures::TWO_QUBIT_GROVER;
    use crate::qasm::parse_program;
    use approx::assert_abs_diff_eq;

    fn program(body: &str, n: usize) -> QasmProgram {
        parse_program(&format!("OPENQASM 3.0;\nqubit[{n}] q;\n{body}")).unwrap()
    }

    fn b(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn bell_pair_on_every_backend() {
        let p = program("h q[0];\ncx q[0], q[1];\n", 2);
        for backend in [Backend::Sv, Backend::Unitary, Backend::Dm] {
            let d: Distribution<f64> = simulate(&p, backend).unwrap();
            assert_abs_diff_eq!(d.prob(b("00")), 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(d.prob(b("11")), 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(d.prob(b("01")), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn x_on_qubit_zero_sets_rightmost_bit() {
        let p = program("x q[0];\n", 2);
        let d: Distribution<f64> = unitary_simulate(&p).unwrap();
        assert_eq!(d.prob(b("01")), 1.0);
    }

    #[test]
    fn identity_program_is_point_mass() {
        let p = program("", 3);
        for backend in [Backend::Sv, Backend::Unitary, Backend::Dm] {
            let d: Distribution<f64> = simulate(&p, backend).unwrap();
            assert_eq!(d.prob(b("000")), 1.0);
            assert_eq!(d.len(), 8);
        }
    }

    #[test]
    fn two_qubit_grover_finds_00() {
        let p = parse_program(TWO_QUBIT_GROVER).unwrap();
        let (state, d) = sv_simulate::<f64>(&p).unwrap();
        assert_abs_diff_eq!(d.prob(b("00")), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_precision_works() {
        let p = parse_program(TWO_QUBIT_GROVER).unwrap();
        let (_, d) = sv_simulate::<f32>(&p).unwrap();
        assert!((d.prob(b("00")) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rz_is_a_phase() {
        let p = program("h q[0];\nrz(0.7) q[0];\nh q[0];\n", 1);
        let d: Distribution<f64> = simulate(&p, Backend::Sv).unwrap();
        // H·Rz(θ)·H|0⟩ has P(1) = sin²(θ/2)
        assert_abs_diff_eq!(d.prob(b("1")), (0.35f64).sin().powi(2), epsilon = 1e-12);
        let dm: Distribution<f64> = simulate(&p, Backend::Dm).unwrap();
        assert_abs_diff_eq!(dm.prob(b("1")), (0.35f64).sin().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn mcmt_is_diagonal_phase_on_all_ones() {
        let mut state =
            StateVector::<f64>::from_amplitudes(3, vec![Complex::new(1.0 / 8f64.sqrt(), 0.0); 8]);
        state.apply(&PrimitiveGate::Mcmt(vec![0, 2]));
        for (i, a) in state.amplitudes().iter().enumerate() {
            let expected = if i & 0b101 == 0b101 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(a.re * 8f64.sqrt(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn mcx_flips_target_when_controls_set() {
        let p = program("x q[0];\nx q[1];\nmcx q[0], q[1], q[2];\n", 3);
        let d: Distribution<f64> = simulate(&p, Backend::Sv).unwrap();
        assert_eq!(d.prob(b("111")), 1.0);
        let p = program("x q[0];\nmcx q[0], q[1], q[2];\n", 3);
        let d: Distribution<f64> = simulate(&p, Backend::Sv).unwrap();
        assert_eq!(d.prob(b("001")), 1.0);
    }

    #[test]
    fn size_limits_and_missing_register() {
        let p = program("h q[0];\n", 4);
        assert!(matches!(
            unitary_simulate_with_limit::<f64>(&p, 3),
            Err(SimError::SizeLimit {
                backend: Backend::Unitary,
                n: 4,
                limit: 3
            })
        ));
        assert!(matches!(
            dm_simulate_with_limit::<f64>(&p, 3),
            Err(SimError::SizeLimit {
                backend: Backend::Dm,
                ..
            })
        ));
        let oracle_only = parse_program("OPENQASM 3.0;\ngate g a {\n  h a;\n}\n").unwrap();
        assert_eq!(
            sv_simulate::<f64>(&oracle_only).unwrap_err(),
            SimError::NoQubitRegister
        );
    }

    #[test]
    fn foreign_gates_are_unsupported() {
        let mut p = program("h q[0];\n", 2);
        if let crate::qasm::Statement::GateCall(call) = &mut p.statements[0] {
            call.name = "mcx_vchain_0".into();
        }
        assert!(matches!(
            sv_simulate::<f64>(&p),
            Err(SimError::UnsupportedGate(name)) if name == "mcx_vchain_0"
        ));
    }

    #[test]
    fn density_matrix_invariants_hold_per_gate() {
        let p = parse_program(TWO_QUBIT_GROVER).unwrap();
        let (n, gates) = prepare(&p).unwrap();
        let mut rho = DensityMatrix::<f64>::zero(n);
        for gate in &gates {
            rho.apply(gate);
            assert!(rho.hermiticity_error() < 1e-9);
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(rho.trace().im, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn backend_names() {
        assert_eq!("dm".parse::<Backend>(), Ok(Backend::Dm));
        assert!("gpu".parse::<Backend>().is_err());
        assert_eq!(Backend::Unitary.to_string(), "unitary");
    }
}
