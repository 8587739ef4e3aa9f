//! Dense state-vector reference implementation.
//!
//! Small-scale ground truth for the graph engine: builds the full 2^n vector
//! for a `GraphState`, projects Pauli measurements, and scores Bell fidelity
//! of a frame-corrected two-qubit remainder. Global phase is ignored
//! throughout. Not built for speed; capped at `MAX_QUBITS`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::clifford::{LocalClifford, Pauli};
use crate::graph::{GraphState, VertexId};

/// Hard cap on oracle size (2^26 amplitudes ~ 1 GiB transiently).
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} qubits exceed the dense-oracle cap of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("unknown qubit {0}")]
    UnknownQubit(VertexId),
    #[error("projection onto a zero-probability branch")]
    ZeroProbability,
    #[error("expected exactly 2 remaining qubits, found {0}")]
    WrongQubitCount(usize),
}

type C = Complex64;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn mat_h() -> [[C; 2]; 2] {
    let s = C::new(SQRT_HALF, 0.0);
    [[s, s], [s, -s]]
}

fn mat_s() -> [[C; 2]; 2] {
    [
        [C::new(1.0, 0.0), C::new(0.0, 0.0)],
        [C::new(0.0, 0.0), C::new(0.0, 1.0)],
    ]
}

fn mat_mul(a: [[C; 2]; 2], b: [[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// 2x2 unitary for a local Clifford, from its generator word (phase-arbitrary).
fn clifford_matrix(c: LocalClifford) -> [[C; 2]; 2] {
    let mut m = [
        [C::new(1.0, 0.0), C::new(0.0, 0.0)],
        [C::new(0.0, 0.0), C::new(1.0, 0.0)],
    ];
    // word is leftmost-applied-last; right-to-left application order
    for ch in c.word().chars().rev() {
        let g = match ch {
            'H' => mat_h(),
            'S' => mat_s(),
            _ => unreachable!("word alphabet is H,S"),
        };
        m = mat_mul(g, m);
    }
    m
}

fn pauli_matrix(p: Pauli) -> [[C; 2]; 2] {
    let o = C::new(0.0, 0.0);
    let l = C::new(1.0, 0.0);
    match p {
        Pauli::X => [[o, l], [l, o]],
        Pauli::Y => [[o, C::new(0.0, -1.0)], [C::new(0.0, 1.0), o]],
        Pauli::Z => [[l, o], [o, -l]],
    }
}

/// Dense state over an explicit, sorted list of qubit ids.
#[derive(Clone, Debug)]
pub struct DenseState {
    amplitudes: Vec<C>,
    qubit_order: Vec<VertexId>,
}

impl DenseState {
    /// Assemble a state from raw parts; for harnesses that project faster
    /// than `project_pauli`. The amplitude count must be 2^|qubits|.
    pub fn from_parts(
        amplitudes: Vec<C>,
        qubit_order: Vec<VertexId>,
    ) -> Result<Self, OracleError> {
        if qubit_order.len() > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(qubit_order.len()));
        }
        assert_eq!(amplitudes.len(), 1usize << qubit_order.len());
        Ok(DenseState {
            amplitudes,
            qubit_order,
        })
    }

    /// |+⟩^⊗n over the given ids (sorted ascending internally).
    pub fn plus_states(mut qubits: Vec<VertexId>) -> Result<Self, OracleError> {
        qubits.sort_unstable();
        qubits.dedup();
        let n = qubits.len();
        if n > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        let amp = C::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(DenseState {
            amplitudes: vec![amp; 1usize << n],
            qubit_order: qubits,
        })
    }

    pub fn qubit_order(&self) -> &[VertexId] {
        &self.qubit_order
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_order.len()
    }

    fn index_of(&self, q: VertexId) -> Result<usize, OracleError> {
        self.qubit_order
            .iter()
            .position(|&v| v == q)
            .ok_or(OracleError::UnknownQubit(q))
    }

    /// Bit position of qubit index i within a basis-state index; qubit 0 is
    /// the most significant bit.
    fn bit_shift(&self, i: usize) -> usize {
        self.qubit_order.len() - 1 - i
    }

    pub fn apply_single(&mut self, q: VertexId, m: [[C; 2]; 2]) -> Result<(), OracleError> {
        let i = self.index_of(q)?;
        let shift = self.bit_shift(i);
        let mask = 1usize << shift;
        for base in 0..self.amplitudes.len() {
            if base & mask == 0 {
                let a0 = self.amplitudes[base];
                let a1 = self.amplitudes[base | mask];
                self.amplitudes[base] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[base | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: VertexId, b: VertexId) -> Result<(), OracleError> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        let mi = 1usize << self.bit_shift(i);
        let mj = 1usize << self.bit_shift(j);
        for idx in 0..self.amplitudes.len() {
            if idx & mi != 0 && idx & mj != 0 {
                self.amplitudes[idx] = -self.amplitudes[idx];
            }
        }
        Ok(())
    }

    fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Build the dense vector for a graph state: |+⟩^⊗n, CZ per edge, then VOPs.
pub fn dense_from_graph(g: &GraphState) -> Result<DenseState, OracleError> {
    let qubits: Vec<VertexId> = g.vertices().collect();
    let mut d = DenseState::plus_states(qubits)?;
    for (a, b) in g.edges() {
        d.apply_cz(a, b)?;
    }
    for v in g.vertices() {
        let vop = g.vop(v).expect("vertex");
        if !vop.is_identity() {
            d.apply_single(v, clifford_matrix(vop))?;
        }
    }
    Ok(d)
}

/// Project a Pauli measurement outcome; returns the normalized state with the
/// measured qubit removed, plus the Born probability of that branch.
pub fn project_pauli(
    state: &DenseState,
    vertex: VertexId,
    basis: Pauli,
    outcome: bool,
) -> Result<(DenseState, f64), OracleError> {
    let i = state.index_of(vertex)?;
    let p = pauli_matrix(basis);
    let sign = if outcome { -1.0 } else { 1.0 };
    // projector (I + sign*P)/2
    let mut proj = [[C::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let idm = if r == c { 1.0 } else { 0.0 };
            proj[r][c] = (C::new(idm, 0.0) + C::new(sign, 0.0) * p[r][c]) * C::new(0.5, 0.0);
        }
    }
    let mut work = state.clone();
    work.apply_single(vertex, proj)?;
    let prob = work.norm().powi(2);
    if prob < 1e-12 {
        return Err(OracleError::ZeroProbability);
    }
    // factor out the measured qubit: contract against the eigenvector
    let eig: [C; 2] = match (basis, outcome) {
        (Pauli::Z, false) => [C::new(1.0, 0.0), C::new(0.0, 0.0)],
        (Pauli::Z, true) => [C::new(0.0, 0.0), C::new(1.0, 0.0)],
        (Pauli::X, false) => [C::new(SQRT_HALF, 0.0), C::new(SQRT_HALF, 0.0)],
        (Pauli::X, true) => [C::new(SQRT_HALF, 0.0), C::new(-SQRT_HALF, 0.0)],
        (Pauli::Y, false) => [C::new(SQRT_HALF, 0.0), C::new(0.0, SQRT_HALF)],
        (Pauli::Y, true) => [C::new(SQRT_HALF, 0.0), C::new(0.0, -SQRT_HALF)],
    };
    let shift = work.bit_shift(i);
    let mask = 1usize << shift;
    let half = work.amplitudes.len() / 2;
    let mut amps = vec![C::new(0.0, 0.0); half];
    for idx in 0..work.amplitudes.len() {
        let bit = (idx & mask) != 0;
        let low = idx & (mask - 1);
        let high = (idx >> (shift + 1)) << shift;
        let out_idx = high | low;
        let coeff = eig[bit as usize].conj();
        amps[out_idx] += coeff * work.amplitudes[idx];
    }
    let mut qubit_order = work.qubit_order.clone();
    qubit_order.remove(i);
    let mut out = DenseState {
        amplitudes: amps,
        qubit_order,
    };
    let n = out.norm();
    for a in &mut out.amplitudes {
        *a /= n;
    }
    Ok((out, prob))
}

/// Fidelity |⟨a|b⟩| between states over the same qubits.
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64, OracleError> {
    assert_eq!(a.qubit_order, b.qubit_order, "fidelity over mismatched qubits");
    let ip: C = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(ip.norm())
}

/// A Pauli correction per end-node qubit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PauliFrame {
    corrections: BTreeMap<VertexId, LocalClifford>,
}

impl PauliFrame {
    pub fn identity() -> Self {
        PauliFrame::default()
    }

    pub fn with(mut self, q: VertexId, p: Pauli) -> Self {
        self.insert(q, p);
        self
    }

    /// Fold a Pauli into the correction for `q` (compose, staying in the
    /// Pauli subgroup modulo phase).
    pub fn insert(&mut self, q: VertexId, p: Pauli) {
        let cur = self
            .corrections
            .entry(q)
            .or_insert_with(LocalClifford::identity);
        *cur = cur.compose(LocalClifford::from_pauli(p));
    }

    pub fn correction(&self, q: VertexId) -> LocalClifford {
        self.corrections
            .get(&q)
            .copied()
            .unwrap_or_else(LocalClifford::identity)
    }

    /// Frame as (Z-exponent on q1, Z-exponent on q2) when both corrections
    /// are in {I, Z}; None otherwise.
    pub fn as_z_bits(&self, q1: VertexId, q2: VertexId) -> Option<(bool, bool)> {
        let c1 = self.correction(q1);
        let c2 = self.correction(q2);
        if c1.is_i_or_z() && c2.is_i_or_z() {
            Some((
                c1 == LocalClifford::pauli_z(),
                c2 == LocalClifford::pauli_z(),
            ))
        } else {
            None
        }
    }
}

/// Fidelity of the frame-corrected two-qubit state with the graph-state Bell
/// pair CZ|++⟩ on {q1, q2}.
pub fn bell_fidelity(
    state: &DenseState,
    q1: VertexId,
    q2: VertexId,
    frame: &PauliFrame,
) -> Result<f64, OracleError> {
    if state.num_qubits() != 2 {
        return Err(OracleError::WrongQubitCount(state.num_qubits()));
    }
    let mut corrected = state.clone();
    for q in [q1, q2] {
        let c = frame.correction(q);
        if !c.is_identity() {
            corrected.apply_single(q, clifford_matrix(c))?;
        }
    }
    let mut bell = GraphState::new();
    let mut ids = [q1, q2];
    ids.sort_unstable();
    bell.add_vertex(ids[0]).expect("fresh");
    bell.add_vertex(ids[1]).expect("fresh");
    bell.apply_cz(ids[0], ids[1]).expect("edge");
    let reference = dense_from_graph(&bell)?;
    fidelity(&corrected, &reference)
}
