//! Pauli-frame computation from measurement records, via the two correction
//! methods, plus the classical-communication ledger.
//!
//! Both methods compute the same two Z-exponents (one per end-node qubit);
//! they differ in where the bits are reduced. One-Stage folds every recorded
//! outcome and VOP bit at the end nodes. Two-Stage reduces each ABSA's local
//! records to two bits first; the end nodes then just XOR the summaries.

use thiserror::Error;

use crate::clifford::Pauli;
use crate::graph::VertexId;
use crate::logical::PhotonRecord;
use crate::oracle::PauliFrame;
use crate::protocol::{AbsaReport, TrialOutcome};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorrectionError {
    #[error("correction requested for a failed attempt (ABSA {0})")]
    AttemptFailed(usize),
}

/// The frame as Z-exponents on the two kept end-node qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EndCorrection {
    pub z_a: bool,
    pub z_b: bool,
}

impl EndCorrection {
    pub fn to_frame(self, end_a: VertexId, end_b: VertexId) -> PauliFrame {
        let mut f = PauliFrame::identity();
        if self.z_a {
            f.insert(end_a, Pauli::Z);
        }
        if self.z_b {
            f.insert(end_b, Pauli::Z);
        }
        f
    }
}

/// Per-ABSA two-bit reduction: the corrected X outcomes of the kept trees
/// measured at this ABSA, with the local prune parities and the kept BSM
/// partner bits folded in. At the boundary ABSAs the missing-tree slot
/// carries the end-node byproduct bit of the kept BSM instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoBitSummary {
    pub x_outcome_left: bool,
    pub x_outcome_right: bool,
}

fn xhat(rec: &Option<PhotonRecord>, absa: usize) -> Result<bool, CorrectionError> {
    rec.as_ref()
        .and_then(|r| r.xhat())
        .ok_or(CorrectionError::AttemptFailed(absa))
}

fn check_success(reports: &[AbsaReport]) -> Result<(), CorrectionError> {
    for r in reports {
        if r.chosen_arm_pair.is_none() {
            return Err(CorrectionError::AttemptFailed(r.index));
        }
        for (_, _, z) in r.logical_z_results() {
            if !z.success {
                return Err(CorrectionError::AttemptFailed(r.index));
            }
        }
        for x in [r.x_logical_left(), r.x_logical_right()].into_iter().flatten() {
            if !x.success {
                return Err(CorrectionError::AttemptFailed(r.index));
            }
        }
    }
    Ok(())
}

/// Parity of the logical-Z outcomes of every pruned arm measured at this
/// ABSA (both half-trees).
fn prune_parity(report: &AbsaReport) -> Result<bool, CorrectionError> {
    let mut acc = false;
    for (_, _, z) in report.logical_z_results() {
        acc ^= z
            .outcome
            .ok_or(CorrectionError::AttemptFailed(report.index))?;
    }
    Ok(acc)
}

/// One-Stage method: the end nodes receive every outcome and VOP bit and
/// fold the whole chain's byproducts directly.
pub fn correction_one_stage(reports: &[AbsaReport]) -> Result<EndCorrection, CorrectionError> {
    check_success(reports)?;
    let n_absa = reports.len();
    let first = &reports[0];
    let last = &reports[n_absa - 1];
    // byproducts deposited on the end memories by the kept boundary BSMs
    let mut z_a = xhat(&first.kept_right_photon, first.index)?;
    let mut z_b = xhat(&last.kept_left_photon, last.index)?;
    // one source between reports k-1 and k
    for k in 1..n_absa {
        let left_half = &reports[k - 1]; // source's left half measured here
        let right_half = &reports[k]; // source's right half measured here
        let prune = prune_from_source(left_half, right_half, k)?;
        let xlog_right_tree = right_half
            .x_logical_left()
            .and_then(|r| r.outcome)
            .ok_or(CorrectionError::AttemptFailed(k))?;
        let xlog_left_tree = left_half
            .x_logical_right()
            .and_then(|r| r.outcome)
            .ok_or(CorrectionError::AttemptFailed(k - 1))?;
        z_a ^= xlog_right_tree ^ prune ^ xhat(&right_half.kept_right_photon, k)?;
        z_b ^= xlog_left_tree ^ prune ^ xhat(&left_half.kept_left_photon, k - 1)?;
    }
    Ok(EndCorrection { z_a, z_b })
}

/// Prune parity of one source, combining its two halves from the flanking
/// ABSA reports.
fn prune_from_source(
    left_absa: &AbsaReport,
    right_absa: &AbsaReport,
    k: usize,
) -> Result<bool, CorrectionError> {
    let mut acc = false;
    for t in left_absa.right_trees.iter().filter(|t| !t.kept) {
        acc ^= t
            .logical_z()
            .outcome
            .ok_or(CorrectionError::AttemptFailed(k - 1))?;
    }
    for t in right_absa.left_trees.iter().filter(|t| !t.kept) {
        acc ^= t.logical_z().outcome.ok_or(CorrectionError::AttemptFailed(k))?;
    }
    Ok(acc)
}

/// Local two-bit reduction of one ABSA's records.
pub fn summarize_absa(report: &AbsaReport) -> Result<TwoBitSummary, CorrectionError> {
    let i = report.index;
    if report.chosen_arm_pair.is_none() {
        return Err(CorrectionError::AttemptFailed(i));
    }
    let local_prunes = prune_parity(report)?;
    let left_tree_term = match report.x_logical_left() {
        Some(res) => res.outcome.ok_or(CorrectionError::AttemptFailed(i))?,
        None => false,
    };
    let right_tree_term = match report.x_logical_right() {
        Some(res) => res.outcome.ok_or(CorrectionError::AttemptFailed(i))?,
        None => false,
    };
    Ok(TwoBitSummary {
        x_outcome_left: xhat(&report.kept_right_photon, i)? ^ left_tree_term ^ local_prunes,
        x_outcome_right: xhat(&report.kept_left_photon, i)? ^ right_tree_term ^ local_prunes,
    })
}

/// Two-Stage method: XOR the per-ABSA summaries in chain order.
pub fn correction_two_stage(summaries: &[TwoBitSummary]) -> EndCorrection {
    let mut z_a = false;
    let mut z_b = false;
    for s in summaries {
        z_a ^= s.x_outcome_left;
        z_b ^= s.x_outcome_right;
    }
    EndCorrection { z_a, z_b }
}

/// Convenience: two-stage straight from the reports.
pub fn correction_two_stage_from_reports(
    reports: &[AbsaReport],
) -> Result<EndCorrection, CorrectionError> {
    check_success(reports)?;
    let summaries: Vec<TwoBitSummary> = reports
        .iter()
        .map(summarize_absa)
        .collect::<Result<_, _>>()?;
    Ok(correction_two_stage(&summaries))
}

/// Which correction method a ledger was computed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CorrectionMethod {
    OneStage,
    TwoStage,
}

/// Classical traffic of one node for one attempt.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct NodeTraffic {
    pub bits_received: u64,
    pub bits_processed: u64,
    pub bits_sent: u64,
}

/// Per-node classical bit accounting for one attempt.
///
/// Conventions (documented in the README): each measured photon yields two
/// bits, the outcome (produced at the measuring ABSA) and the VOP (tracked by
/// the photon's source). One-Stage sends both streams to both end nodes.
/// Two-Stage sends VOP bits only to the measuring ABSA, which processes its
/// two bits per photon and forwards a two-bit summary to each end node.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CommsLedger {
    pub method: CorrectionMethod,
    pub end_node_a: NodeTraffic,
    pub end_node_b: NodeTraffic,
    pub absas: Vec<NodeTraffic>,
    pub rgss: Vec<NodeTraffic>,
}

/// Measured-photon attribution for one source: tree photons from its two
/// flanking reports plus its outer photons consumed by successful BSMs.
fn source_measured_photons(reports: &[AbsaReport], k: usize) -> u64 {
    use crate::protocol::BsmResult;
    let left_absa = &reports[k];
    let right_absa = &reports[k + 1];
    let trees: u64 = left_absa
        .right_trees
        .iter()
        .chain(&right_absa.left_trees)
        .map(|t| t.measured_count())
        .sum();
    let outers_left: u64 = left_absa
        .bsm_results
        .iter()
        .filter(|r| matches!(r, BsmResult::Success { .. }))
        .count() as u64;
    let outers_right: u64 = right_absa
        .bsm_results
        .iter()
        .filter(|r| matches!(r, BsmResult::Success { .. }))
        .count() as u64;
    trees + outers_left + outers_right
}

pub fn comms_ledger(trial: &TrialOutcome, method: CorrectionMethod) -> CommsLedger {
    let reports = &trial.reports;
    let n_absa = reports.len();
    let n_rgss = n_absa - 1;
    let measured_per_absa: Vec<u64> = reports.iter().map(|r| r.measured_photons()).collect();
    let total_measured: u64 = measured_per_absa.iter().sum();
    let rgs_measured: Vec<u64> = (0..n_rgss)
        .map(|k| source_measured_photons(reports, k))
        .collect();

    match method {
        CorrectionMethod::OneStage => {
            let end = NodeTraffic {
                bits_received: 2 * total_measured,
                bits_processed: 2 * total_measured,
                bits_sent: 0,
            };
            let absas = measured_per_absa
                .iter()
                .map(|&m| NodeTraffic {
                    bits_received: 0,
                    bits_processed: m,
                    bits_sent: 2 * m, // outcome bits to both ends
                })
                .collect();
            let rgss = rgs_measured
                .iter()
                .map(|&v| NodeTraffic {
                    bits_received: 0,
                    bits_processed: v,
                    bits_sent: 2 * v, // VOP bits to both ends
                })
                .collect();
            CommsLedger {
                method,
                end_node_a: end,
                end_node_b: end,
                absas,
                rgss,
            }
        }
        CorrectionMethod::TwoStage => {
            let end = NodeTraffic {
                bits_received: 2 * n_absa as u64,
                bits_processed: 2 * n_absa as u64,
                bits_sent: 0,
            };
            let mut absas = Vec::with_capacity(n_absa);
            for (i, &m) in measured_per_absa.iter().enumerate() {
                // VOP bits received from adjacent sources; end-node photons
                // carry no VOP stream, and each successful BSM consumed one
                // outer from the source on each interior side
                let n_succ = reports[i]
                    .bsm_results
                    .iter()
                    .filter(|r| matches!(r, crate::protocol::BsmResult::Success { .. }))
                    .count() as u64;
                let mut vop_in = 0;
                if i > 0 {
                    let trees: u64 = reports[i].left_trees.iter().map(|t| t.measured_count()).sum();
                    vop_in += trees + n_succ;
                }
                if i < n_absa - 1 {
                    let trees: u64 =
                        reports[i].right_trees.iter().map(|t| t.measured_count()).sum();
                    vop_in += trees + n_succ;
                }
                absas.push(NodeTraffic {
                    bits_received: vop_in,
                    bits_processed: 2 * m,
                    bits_sent: 4, // 2-bit summary to each end
                });
            }
            let rgss = rgs_measured
                .iter()
                .map(|&v| NodeTraffic {
                    bits_received: 0,
                    bits_processed: v,
                    bits_sent: v,
                })
                .collect();
            CommsLedger {
                method,
                end_node_a: end,
                end_node_b: end,
                absas,
                rgss,
            }
        }
    }
}

