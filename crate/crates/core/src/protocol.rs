//! Exact-mode chain protocol: builds every RGS and the end-node pairs in one
//! graph state, samples photon loss and BSM coins, and drives the three
//! adaptive measurement stages, producing per-ABSA reports.
//!
//! Measurement ordering inside the engine: lost photons are traced out first
//! (Z measurements whose outcomes the protocol never sees), then stage 1
//! BSMs left to right, stage 2 prunes, stage 3 tree measurements, and
//! finally one XX measurement per source joining its two kept roots. All
//! stage-2/3 measurements commute, so this ordering is a simulation choice;
//! outcome bits are attributed to the ABSA where each photon physically
//! arrives.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::chain::{plan_chain, survival_probability, ChainConfig, ChainTopology};
use crate::clifford::{LocalClifford, Pauli};
use crate::graph::{GraphState, VertexId};
use crate::logical::{level_basis, LogicalResult, PhotonRecord, TreeRecord};
use crate::rgs::{build_rgs, RgsInstance, Side, VopAssignment};

/// Supplies raw measurement outcome bits. Production draws from the trial
/// RNG; tests script exact bit sequences for exhaustive enumeration.
pub trait OutcomeSource {
    fn next_bit(&mut self) -> bool;
}

pub struct RngOutcomes<'a, R: Rng>(pub &'a mut R);

impl<R: Rng> OutcomeSource for RngOutcomes<'_, R> {
    fn next_bit(&mut self) -> bool {
        self.0.gen()
    }
}

/// Replays a fixed bit script; `exhausted` turns true once the script ran
/// out (further bits read as false), which drives iterative deepening in the
/// enumeration tests.
pub struct ScriptedOutcomes {
    bits: Vec<bool>,
    pos: usize,
    pub exhausted: bool,
}

impl ScriptedOutcomes {
    pub fn new(bits: Vec<bool>) -> Self {
        ScriptedOutcomes {
            bits,
            pos: 0,
            exhausted: false,
        }
    }

    pub fn bits_consumed(&self) -> usize {
        self.pos
    }
}

impl OutcomeSource for ScriptedOutcomes {
    fn next_bit(&mut self) -> bool {
        let b = self.bits.get(self.pos).copied();
        self.pos += 1;
        match b {
            Some(b) => b,
            None => {
                self.exhausted = true;
                false
            }
        }
    }
}

/// End-node ids: m memory qubits, each entangled with one emitted photon.
#[derive(Clone, Debug)]
pub struct EndNodeIds {
    pub mems: Vec<VertexId>,
    pub photons: Vec<VertexId>,
}

/// All vertex ids of one attempt plus the generation VOP bits that the
/// sources track classically (true = Z). End-node qubits are ideal and carry
/// no entry.
pub struct ChainLayout {
    pub node_a: EndNodeIds,
    pub sources: Vec<RgsInstance>,
    pub node_b: EndNodeIds,
    pub vop_bits: BTreeMap<VertexId, bool>,
}

impl ChainLayout {
    /// Every photon that travels fiber (memories stay home).
    pub fn flying_photons(&self) -> Vec<VertexId> {
        let mut out = self.node_a.photons.clone();
        for rgs in &self.sources {
            out.extend(rgs.vertices());
        }
        out.extend(self.node_b.photons.clone());
        out
    }

    pub fn vop_bit(&self, v: VertexId) -> bool {
        self.vop_bits.get(&v).copied().unwrap_or(false)
    }
}

/// Build the full chain state with explicit VOP bits per RGS photon.
pub fn build_chain_state_with_vops(
    config: &ChainConfig,
    topology: &ChainTopology,
    mut vop_of: impl FnMut(VertexId) -> bool,
) -> (GraphState, ChainLayout) {
    let m = config.rgs_spec.m as usize;
    let mut g = GraphState::new();
    let end_node = |g: &mut GraphState| {
        let mems: Vec<VertexId> = (0..m).map(|_| g.fresh_vertex()).collect();
        let photons: Vec<VertexId> = (0..m).map(|_| g.fresh_vertex()).collect();
        for (&q, &p) in mems.iter().zip(&photons) {
            g.apply_cz(q, p).expect("fresh pair");
        }
        EndNodeIds { mems, photons }
    };
    let node_a = end_node(&mut g);
    let mut sources = Vec::with_capacity(topology.n_rgss());
    let mut vop_bits = BTreeMap::new();
    for _ in 0..topology.n_rgss() {
        let inst = build_rgs(&mut g, &config.rgs_spec, VopAssignment::AllIdentity)
            .expect("validated spec");
        for v in inst.vertices() {
            let z = vop_of(v);
            vop_bits.insert(v, z);
            if z {
                g.set_vop(v, LocalClifford::pauli_z()).expect("vertex");
            }
        }
        sources.push(inst);
    }
    let node_b = end_node(&mut g);
    (
        g,
        ChainLayout {
            node_a,
            sources,
            node_b,
            vop_bits,
        },
    )
}

/// Build the chain with VOPs drawn Z with probability 1/2 per RGS photon.
pub fn build_chain_state<R: Rng>(
    config: &ChainConfig,
    topology: &ChainTopology,
    rng: &mut R,
) -> (GraphState, ChainLayout) {
    build_chain_state_with_vops(config, topology, |_| rng.gen::<bool>())
}

/// Sampled inputs of one attempt: which photons arrive, and the BSM coin per
/// (ABSA, arm). Coins are pre-drawn so scripted enumerations can control the
/// outcome bits independently of the Bernoulli draws.
#[derive(Clone, Debug)]
pub struct AttemptInputs {
    pub arrived: BTreeSet<VertexId>,
    pub bsm_coins: Vec<Vec<bool>>,
}

impl AttemptInputs {
    /// Lossless inputs with every BSM coin heads.
    pub fn ideal(layout: &ChainLayout, n_absa: usize, m: u32) -> Self {
        AttemptInputs {
            arrived: layout.flying_photons().into_iter().collect(),
            bsm_coins: vec![vec![true; m as usize]; n_absa],
        }
    }
}

/// Sample arrival flags for every flying photon. Loss events are definite:
/// a photon either arrives or is flagged lost, never silently dropped.
pub fn sample_arrivals<R: Rng>(
    config: &ChainConfig,
    topology: &ChainTopology,
    layout: &ChainLayout,
    rng: &mut R,
) -> BTreeSet<VertexId> {
    let p = survival_probability(
        topology.segment_km,
        config.attenuation_db_per_km,
        config.detector_efficiency,
    );
    let mut arrived = BTreeSet::new();
    for v in layout.flying_photons() {
        if rng.gen::<f64>() < p {
            arrived.insert(v);
        }
    }
    arrived
}

pub fn sample_inputs<R: Rng>(
    config: &ChainConfig,
    topology: &ChainTopology,
    layout: &ChainLayout,
    rng: &mut R,
) -> AttemptInputs {
    let arrived = sample_arrivals(config, topology, layout, rng);
    let n_absa = topology.n_absa();
    let bsm_coins = (0..n_absa)
        .map(|_| {
            (0..config.rgs_spec.m)
                .map(|_| rng.gen::<f64>() < config.bsm_success_cap)
                .collect()
        })
        .collect();
    AttemptInputs { arrived, bsm_coins }
}

/// Per-arm stage-1 result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsmResult {
    /// Both photons arrived and the BSM coin came up heads.
    Success { left_raw: bool, right_raw: bool },
    /// Both photons arrived but the linear-optics BSM failed.
    Fail,
    /// At least one photon never reached the ABSA.
    PhotonLost,
}

/// Everything one ABSA measured. Trees from the left RGS's right half sit in
/// `left_trees`, trees from the right RGS's left half in `right_trees`; the
/// boundary ABSAs have one of them empty.
#[derive(Clone, Debug)]
pub struct AbsaReport {
    pub index: usize,
    pub bsm_results: Vec<BsmResult>,
    pub chosen_arm_pair: Option<u32>,
    /// Kept-pair photon records (left photon, right photon of this ABSA).
    pub kept_left_photon: Option<PhotonRecord>,
    pub kept_right_photon: Option<PhotonRecord>,
    pub left_trees: Vec<TreeRecord>,
    pub right_trees: Vec<TreeRecord>,
}

impl AbsaReport {
    pub fn empty(index: usize, m: usize) -> Self {
        AbsaReport {
            index,
            bsm_results: vec![BsmResult::PhotonLost; m],
            chosen_arm_pair: None,
            kept_left_photon: None,
            kept_right_photon: None,
            left_trees: Vec::new(),
            right_trees: Vec::new(),
        }
    }

    /// Photons with recorded outcomes at this ABSA (BSM photons plus trees).
    pub fn measured_photons(&self) -> u64 {
        let bsm: u64 = self
            .bsm_results
            .iter()
            .map(|r| match r {
                BsmResult::Success { .. } => 2,
                _ => 0,
            })
            .sum();
        let trees: u64 = self
            .left_trees
            .iter()
            .chain(&self.right_trees)
            .map(|t| t.measured_count())
            .sum();
        bsm + trees
    }

    /// 2 bits (outcome + VOP) per measured photon.
    pub fn measured_bits(&self) -> u64 {
        2 * self.measured_photons()
    }

    pub fn logical_z_results(&self) -> impl Iterator<Item = (Side, u32, LogicalResult)> + '_ {
        self.left_trees
            .iter()
            .chain(&self.right_trees)
            .filter(|t| !t.kept)
            .map(|t| (t.side, t.arm, t.logical_z()))
    }

    pub fn x_logical_left(&self) -> Option<LogicalResult> {
        self.left_trees.iter().find(|t| t.kept).map(|t| t.logical_x())
    }

    pub fn x_logical_right(&self) -> Option<LogicalResult> {
        self.right_trees.iter().find(|t| t.kept).map(|t| t.logical_x())
    }
}

/// One physical event of an attempt, in execution order. Every `Measure` and
/// `Hidden` event consumed exactly one bit from the outcome source, so the
/// trace doubles as a bit-to-measurement map for enumeration harnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhysEvent {
    Cz(VertexId, VertexId),
    Measure(VertexId, Pauli),
    /// Trace-out of a lost or consumed photon; the outcome bit is hidden
    /// from the protocol.
    Hidden(VertexId),
}

/// Reason an attempt failed; absent means success.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// Some ABSA had zero successful BSMs.
    AllBsmsFailed { absa: usize },
    /// A pruned arm's logical Z was unrecoverable.
    LogicalZFailed { absa: usize },
    /// A kept arm's logical X was unrecoverable.
    LogicalXFailed { absa: usize },
}

/// One end-to-end attempt.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub success: bool,
    pub failure: Option<FailureReason>,
    pub reports: Vec<AbsaReport>,
    /// Kept memory qubits at the two end nodes (set when stage 1 passed).
    pub kept_end_qubits: Option<(VertexId, VertexId)>,
    /// Physical event trace (exact mode only; empty in accounting mode).
    pub events: Vec<PhysEvent>,
}

struct Measurer<'a> {
    g: &'a mut GraphState,
    arrived: &'a BTreeSet<VertexId>,
    vops: &'a BTreeMap<VertexId, bool>,
    outcomes: &'a mut dyn OutcomeSource,
    events: Vec<PhysEvent>,
}

impl Measurer<'_> {
    fn vop_bit(&self, v: VertexId) -> bool {
        self.vops.get(&v).copied().unwrap_or(false)
    }

    /// Trace out a photon: Z measurement whose outcome the protocol never
    /// learns.
    fn trace_out(&mut self, v: VertexId) {
        let hidden = self.outcomes.next_bit();
        self.events.push(PhysEvent::Hidden(v));
        self.g.measure_z(v, hidden).expect("vertex present");
    }

    /// Measure an arrived photon, returning its record with the generation
    /// VOP bit the source tracked.
    fn measure(&mut self, v: VertexId, basis: Pauli) -> PhotonRecord {
        let vop = self.vop_bit(v);
        let bit = self.outcomes.next_bit();
        self.events.push(PhysEvent::Measure(v, basis));
        let raw = match basis {
            Pauli::Z => self.g.measure_z(v, bit).expect("vertex present"),
            Pauli::X => self.g.measure_x(v, bit, None).expect("vertex present"),
            Pauli::Y => unreachable!("protocol measures X or Z"),
        }
        .outcome
        .expect("measured");
        PhotonRecord::measured(raw, vop)
    }

    fn tree_record(
        &mut self,
        rgs: &RgsInstance,
        side: Side,
        arm: u32,
        is_kept: bool,
    ) -> TreeRecord {
        let ids = rgs.arm(side, arm);
        let depth = rgs.spec.b.depth();
        let mut level_records: Vec<Vec<PhotonRecord>> = vec![Vec::new(); depth];
        for li in (0..depth).rev() {
            let basis = level_basis(li + 1);
            for &v in &ids.levels[li] {
                let rec = if self.arrived.contains(&v) {
                    self.measure(v, basis)
                } else {
                    PhotonRecord::lost(self.vop_bit(v))
                };
                level_records[li].push(rec);
            }
        }
        let root = if is_kept {
            // measured in stage 3b as half of a root pair; patched in then
            PhotonRecord::lost(self.vop_bit(ids.root))
        } else if self.arrived.contains(&ids.root) {
            self.measure(ids.root, Pauli::Z)
        } else {
            PhotonRecord::lost(self.vop_bit(ids.root))
        };
        TreeRecord {
            side,
            arm,
            kept: is_kept,
            root,
            levels: level_records,
        }
    }
}

/// The (left photon, right photon) of arm `j` at ABSA `i`.
pub fn bsm_pair(layout: &ChainLayout, i: usize, j: u32) -> (VertexId, VertexId) {
    let n = layout.sources.len();
    let left = if i == 0 {
        layout.node_a.photons[j as usize]
    } else {
        layout.sources[i - 1].arm(Side::Right, j).outer
    };
    let right = if i == n {
        layout.node_b.photons[j as usize]
    } else {
        layout.sources[i].arm(Side::Left, j).outer
    };
    (left, right)
}

/// Run one exact attempt over a pre-built chain state.
pub fn run_attempt_exact(
    config: &ChainConfig,
    g: &mut GraphState,
    layout: &ChainLayout,
    inputs: &AttemptInputs,
    outcomes: &mut dyn OutcomeSource,
) -> TrialOutcome {
    let m = config.rgs_spec.m;
    let n_rgss = layout.sources.len();
    let n_absa = n_rgss + 1;
    let mut mx = Measurer {
        g,
        arrived: &inputs.arrived,
        vops: &layout.vop_bits,
        outcomes,
        events: Vec::new(),
    };

    // Trace out everything lost in fiber, in id order.
    for v in layout.flying_photons() {
        if !mx.arrived.contains(&v) {
            mx.trace_out(v);
        }
    }

    let mut reports: Vec<AbsaReport> = (0..n_absa)
        .map(|i| AbsaReport::empty(i, m as usize))
        .collect();

    // Stage 1: BSM per arm pair, left to right.
    let mut kept: Vec<Option<u32>> = vec![None; n_absa];
    for i in 0..n_absa {
        for j in 0..m {
            let (lp, rp) = bsm_pair(layout, i, j);
            let l_ok = mx.arrived.contains(&lp);
            let r_ok = mx.arrived.contains(&rp);
            let result = if !(l_ok && r_ok) {
                // the surviving partner is still consumed by the analyzer
                if l_ok {
                    mx.trace_out(lp);
                }
                if r_ok {
                    mx.trace_out(rp);
                }
                BsmResult::PhotonLost
            } else if inputs.bsm_coins[i][j as usize] {
                let lv = mx.vop_bit(lp);
                let rv = mx.vop_bit(rp);
                mx.g.apply_cz(lp, rp).expect("diagonal vops");
                let bl = mx.outcomes.next_bit();
                let br = mx.outcomes.next_bit();
                mx.events.push(PhysEvent::Cz(lp, rp));
                mx.events.push(PhysEvent::Measure(lp, Pauli::X));
                mx.events.push(PhysEvent::Measure(rp, Pauli::X));
                let (rl, rr) = mx.g.measure_xx(lp, rp, (bl, br)).expect("adjacent pair");
                let (lraw, rraw) = (rl.outcome.unwrap(), rr.outcome.unwrap());
                if kept[i].is_none() {
                    kept[i] = Some(j);
                    reports[i].kept_left_photon = Some(PhotonRecord::measured(lraw, lv));
                    reports[i].kept_right_photon = Some(PhotonRecord::measured(rraw, rv));
                }
                BsmResult::Success {
                    left_raw: lraw,
                    right_raw: rraw,
                }
            } else {
                mx.trace_out(lp);
                mx.trace_out(rp);
                BsmResult::Fail
            };
            reports[i].bsm_results[j as usize] = result;
        }
        reports[i].chosen_arm_pair = kept[i];
        if kept[i].is_none() {
            return TrialOutcome {
                success: false,
                failure: Some(FailureReason::AllBsmsFailed { absa: i }),
                reports,
                kept_end_qubits: None,
                events: mx.events,
            };
        }
    }

    // Stages 2 and 3a: measure every tree, deepest level first. Pruned roots
    // are Z-measured here; kept roots are deferred to stage 3b.
    for k in 0..n_rgss {
        let rgs = &layout.sources[k];
        for side in Side::both() {
            let absa = if side == Side::Left { k } else { k + 1 };
            let kept_arm = kept[absa].expect("stage 1 passed");
            for arm in 0..m {
                let record = mx.tree_record(rgs, side, arm, arm == kept_arm);
                match side {
                    Side::Left => reports[k].right_trees.push(record),
                    Side::Right => reports[k + 1].left_trees.push(record),
                }
            }
        }
    }

    // Stage 3b: join the two kept roots of each source with an XX pair.
    for k in 0..n_rgss {
        let rgs = &layout.sources[k];
        let left_arm = kept[k].unwrap();
        let right_arm = kept[k + 1].unwrap();
        let rl = rgs.arm(Side::Left, left_arm).root;
        let rr = rgs.arm(Side::Right, right_arm).root;
        let l_ok = mx.arrived.contains(&rl);
        let r_ok = mx.arrived.contains(&rr);
        let mut left_rec = PhotonRecord::lost(mx.vop_bit(rl));
        let mut right_rec = PhotonRecord::lost(mx.vop_bit(rr));
        // On an intact chain the two roots are adjacent with disjoint
        // neighborhoods and form an XX pair. Upstream losses (a lost kept
        // root elsewhere) can have evolved the representation away from
        // that; such attempts fail at gating, but their surviving photons
        // are still consumed by independent X measurements.
        let pair_intact = l_ok && r_ok && mx.g.has_edge(rl, rr) && {
            let nl = mx.g.neighbors(rl).expect("present");
            let nr = mx.g.neighbors(rr).expect("present");
            nl.intersection(nr).all(|&w| w == rl || w == rr)
        };
        if pair_intact {
            let lv = mx.vop_bit(rl);
            let rv = mx.vop_bit(rr);
            let bl = mx.outcomes.next_bit();
            let br = mx.outcomes.next_bit();
            mx.events.push(PhysEvent::Measure(rl, Pauli::X));
            mx.events.push(PhysEvent::Measure(rr, Pauli::X));
            let (a, b) = mx.g.measure_xx(rl, rr, (bl, br)).expect("kept roots adjacent");
            left_rec = PhotonRecord::measured(a.outcome.unwrap(), lv);
            right_rec = PhotonRecord::measured(b.outcome.unwrap(), rv);
        } else {
            if l_ok {
                left_rec = mx.measure(rl, Pauli::X);
            }
            if r_ok {
                right_rec = mx.measure(rr, Pauli::X);
            }
        }
        patch_kept_root(&mut reports[k].right_trees, left_arm, left_rec);
        patch_kept_root(&mut reports[k + 1].left_trees, right_arm, right_rec);
    }

    // Logical gating: every prune and both kept trees per ABSA must succeed.
    let mut failure = None;
    'gate: for (i, report) in reports.iter().enumerate() {
        for (_, _, res) in report.logical_z_results() {
            if !res.success {
                failure = Some(FailureReason::LogicalZFailed { absa: i });
                break 'gate;
            }
        }
        for res in [report.x_logical_left(), report.x_logical_right()]
            .into_iter()
            .flatten()
        {
            if !res.success {
                failure = Some(FailureReason::LogicalXFailed { absa: i });
                break 'gate;
            }
        }
    }

    let kept_end = (
        layout.node_a.mems[kept[0].unwrap() as usize],
        layout.node_b.mems[kept[n_absa - 1].unwrap() as usize],
    );
    TrialOutcome {
        success: failure.is_none(),
        failure,
        reports,
        kept_end_qubits: Some(kept_end),
        events: mx.events,
    }
}

fn patch_kept_root(trees: &mut [TreeRecord], arm: u32, record: PhotonRecord) {
    let t = trees
        .iter_mut()
        .find(|t| t.kept && t.arm == arm)
        .expect("kept tree recorded");
    t.root = record;
}

/// Sample and run one full exact-mode attempt.
pub fn run_attempt<R: Rng>(config: &ChainConfig, rng: &mut R) -> (TrialOutcome, GraphState) {
    let topology = plan_chain(config).expect("validated config");
    let (mut g, layout) = build_chain_state(config, &topology, rng);
    let inputs = sample_inputs(config, &topology, &layout, rng);
    let mut outcomes = RngOutcomes(rng);
    let outcome = run_attempt_exact(config, &mut g, &layout, &inputs, &mut outcomes);
    (outcome, g)
}
