//! Graph-state simulation of all-photonic repeater chains.
//!
//! The crate is organized around five layers:
//!
//! - [`clifford`] / [`graph`]: exact graph states with per-vertex local
//!   Cliffords, edge operations, local complementation, and X/Z/XX
//!   measurements.
//! - [`oracle`]: a dense state-vector reference for verifying the graph
//!   engine at small scale, plus Bell-pair fidelity scoring.
//! - [`rgs`]: construction of repeater graph states RGS(m, b) with role and
//!   level labels, photon counts, and emission ordering.
//! - [`chain`] / [`protocol`] / [`accounting`] / [`logical`] /
//!   [`correction`]: chain layout, the three-stage adaptive measurement
//!   protocol under photon loss, loss-tolerant logical tree measurements,
//!   and the One-Stage vs Two-Stage classical correction methods with their
//!   bit ledgers.
//! - [`sweep`]: seeded parallel Monte Carlo sweeps with CSV/JSON output.

pub mod accounting;
pub mod chain;
pub mod clifford;
pub mod correction;
pub mod graph;
pub mod logical;
pub mod oracle;
pub mod protocol;
pub mod rgs;
pub mod sweep;

pub use chain::{plan_chain, survival_probability, ChainConfig, ChainTopology};
pub use clifford::{LocalClifford, Pauli};
pub use correction::{
    comms_ledger, correction_one_stage, correction_two_stage, summarize_absa, CommsLedger,
    CorrectionMethod, EndCorrection, TwoBitSummary,
};
pub use graph::{GraphState, MeasBasis, MeasurementRecord, VertexId};
pub use oracle::{bell_fidelity, dense_from_graph, project_pauli, DenseState, PauliFrame};
pub use rgs::{build_rgs, emission_order, photons_per_rgs, BranchingVector, RgsSpec, Side};
pub use sweep::{estimate_rate, run_sweep, SimMode, SweepRow, SweepSpec};
