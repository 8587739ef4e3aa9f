//! Shared harness: exhaustive branch enumeration of exact-mode attempts,
//! with an optional dense-oracle co-walk that independently projects every
//! measurement on the full state vector.
//!
//! Compiled into each integration-test target; not every target uses every
//! helper.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64;

use rgsim::chain::{plan_chain, ChainConfig};
use rgsim::clifford::Pauli;
use rgsim::graph::{GraphState, VertexId};
use rgsim::oracle::{dense_from_graph, project_pauli, DenseState};
use rgsim::protocol::{
    build_chain_state_with_vops, run_attempt_exact, AttemptInputs, ChainLayout, PhysEvent,
    ScriptedOutcomes, TrialOutcome,
};
use rgsim::rgs::{BranchingVector, RgsSpec};

pub fn toy_config(distance_km: f64, m: u32, b: &[u32]) -> ChainConfig {
    ChainConfig {
        distance_km,
        rgss_spacing_km: 4.0,
        attenuation_db_per_km: 0.0,
        bsm_success_cap: 1.0,
        detector_efficiency: 1.0,
        rgs_spec: RgsSpec::new(m, BranchingVector::new(b.to_vec()).unwrap()).unwrap(),
        rng_seed: 0,
    }
}

pub struct Enumeration {
    pub config: ChainConfig,
    pub vop_bits: Vec<bool>,
    pub lost: BTreeSet<VertexId>,
}

pub struct Branch {
    pub bits: Vec<bool>,
    pub trial: TrialOutcome,
    pub graph: GraphState,
    /// Dense end state on the two kept memories (dense co-walk only).
    pub dense_pair: Option<DenseState>,
}

/// Single-pass projection used by the walk: returns the contracted,
/// normalized child state and the branch probability, or None for a
/// (numerically) impossible branch.
fn project_fast(
    state: &DenseState,
    qubit: VertexId,
    basis: Pauli,
    outcome: bool,
) -> Option<(DenseState, f64)> {
    let order = state.qubit_order();
    let i = order.iter().position(|&v| v == qubit).expect("qubit present");
    let shift = order.len() - 1 - i;
    let mask = 1usize << shift;
    let amps = state.amplitudes();
    let half = amps.len() / 2;
    let mut child = vec![Complex64::new(0.0, 0.0); half];
    let s = if outcome { -1.0 } else { 1.0 };
    let rt = std::f64::consts::FRAC_1_SQRT_2;
    for (j, out) in child.iter_mut().enumerate() {
        let low = j & (mask - 1);
        let high = (j >> shift) << (shift + 1);
        let i0 = high | low;
        let i1 = i0 | mask;
        // ⟨eigenvector| applied to the (a0, a1) pair
        *out = match basis {
            Pauli::Z => {
                if outcome {
                    amps[i1]
                } else {
                    amps[i0]
                }
            }
            Pauli::X => (amps[i0] + s * amps[i1]) * rt,
            Pauli::Y => (amps[i0] - Complex64::new(0.0, s) * amps[i1]) * rt,
        };
    }
    let p: f64 = child.iter().map(|a| a.norm_sqr()).sum();
    if p < 1e-9 {
        return None;
    }
    let norm = p.sqrt();
    for a in &mut child {
        *a /= norm;
    }
    let mut new_order = order.to_vec();
    new_order.remove(i);
    Some((DenseState::from_parts(child, new_order).unwrap(), p))
}

impl Enumeration {
    pub fn new(config: ChainConfig) -> Self {
        Enumeration {
            config,
            vop_bits: Vec::new(),
            lost: BTreeSet::new(),
        }
    }

    pub fn with_vops(mut self, bits: Vec<bool>) -> Self {
        self.vop_bits = bits;
        self
    }

    pub fn with_lost(mut self, lost: impl IntoIterator<Item = VertexId>) -> Self {
        self.lost = lost.into_iter().collect();
        self
    }

    fn build(&self) -> (GraphState, ChainLayout, AttemptInputs) {
        let topology = plan_chain(&self.config).unwrap();
        let mut i = 0usize;
        let vops = &self.vop_bits;
        let (g, layout) = build_chain_state_with_vops(&self.config, &topology, |_| {
            let bit = vops.get(i).copied().unwrap_or(false);
            i += 1;
            bit
        });
        let mut inputs =
            AttemptInputs::ideal(&layout, topology.n_absa(), self.config.rgs_spec.m);
        for v in &self.lost {
            inputs.arrived.remove(v);
        }
        (g, layout, inputs)
    }

    pub fn replay(&self, bits: Vec<bool>) -> (TrialOutcome, GraphState, ChainLayout, bool) {
        let (mut g, layout, inputs) = self.build();
        let mut outcomes = ScriptedOutcomes::new(bits);
        let trial = run_attempt_exact(&self.config, &mut g, &layout, &inputs, &mut outcomes);
        let exhausted = outcomes.exhausted;
        (trial, g, layout, exhausted)
    }

    /// Engine-only enumeration: every bit string that completes the protocol,
    /// via iterative deepening on the scripted outcome source.
    pub fn enumerate_engine(&self, mut leaf: impl FnMut(Branch)) {
        let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
        while let Some(bits) = stack.pop() {
            let (trial, graph, _, exhausted) = self.replay(bits.clone());
            if exhausted {
                let mut b0 = bits.clone();
                b0.push(false);
                let mut b1 = bits;
                b1.push(true);
                stack.push(b0);
                stack.push(b1);
            } else {
                leaf(Branch {
                    bits,
                    trial,
                    graph,
                    dense_pair: None,
                });
            }
        }
    }

    /// Dense co-walk enumeration with a full engine replay at every leaf.
    /// Exponential in photon count twice over; for the larger toys prefer
    /// `enumerate_dense` plus strided replays.
    pub fn enumerate_with_oracle(&self, mut leaf: impl FnMut(Branch)) {
        self.enumerate_dense(|bits, pair| {
            let (trial, graph, _, exhausted) = self.replay(bits.to_vec());
            assert!(!exhausted, "bit count mismatch between walk and replay");
            leaf(Branch {
                bits: bits.to_vec(),
                trial,
                graph,
                dense_pair: Some(pair.clone()),
            });
        });
    }

    /// Dense co-walk enumeration: projects the full state vector through the
    /// physical event trace, branching on every outcome with nonzero Born
    /// probability. Leaves receive the bit string and the independently
    /// computed dense state of the kept pair.
    pub fn enumerate_dense(&self, mut leaf: impl FnMut(&[bool], &DenseState)) {
        let (trial0, _, layout, _) = self.replay(Vec::new());
        let events = trial0.events.clone();
        let (g0, _, _) = self.build();
        let dense0 = dense_from_graph(&g0).unwrap();
        let kept = trial0
            .kept_end_qubits
            .expect("enumeration requires stage-1 success");
        let unkept_mems: Vec<VertexId> = layout
            .node_a
            .mems
            .iter()
            .chain(&layout.node_b.mems)
            .copied()
            .filter(|&v| v != kept.0 && v != kept.1)
            .collect();
        walk(&events, 0, dense0, &mut Vec::new(), &unkept_mems, &mut leaf);
    }
}

fn walk(
    events: &[PhysEvent],
    idx: usize,
    dense: DenseState,
    bits: &mut Vec<bool>,
    unkept_mems: &[VertexId],
    leaf: &mut impl FnMut(&[bool], &DenseState),
) {
    if idx == events.len() {
        // factor out unkept memories (pure, disconnected single qubits)
        let mut pair = dense;
        for &m in unkept_mems {
            pair = match project_pauli(&pair, m, Pauli::Z, false) {
                Ok((s, _)) => s,
                Err(_) => project_pauli(&pair, m, Pauli::Z, true).unwrap().0,
            };
        }
        leaf(bits, &pair);
        return;
    }
    match events[idx] {
        PhysEvent::Cz(a, b) => {
            let mut next = dense;
            next.apply_cz(a, b).unwrap();
            walk(events, idx + 1, next, bits, unkept_mems, leaf);
        }
        PhysEvent::Measure(v, _) | PhysEvent::Hidden(v) => {
            let basis = match events[idx] {
                PhysEvent::Measure(_, b) => b,
                _ => Pauli::Z,
            };
            for outcome in [false, true] {
                if let Some((next, _p)) = project_fast(&dense, v, basis, outcome) {
                    bits.push(outcome);
                    walk(events, idx + 1, next, bits, unkept_mems, leaf);
                    bits.pop();
                }
            }
        }
    }
}
