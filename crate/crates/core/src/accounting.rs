//! Accounting-mode attempts: the same protocol flow, reports, and correction
//! inputs as exact mode, but with loss, BSM coins, and raw outcome bits
//! sampled directly instead of driving the graph engine. Every measured
//! branch of the protocol has Born probability 1/2, so uniform raw bits are
//! distributionally faithful; this is what makes the large configurations
//! (hundreds of sources, hundreds of thousands of photons) cheap.

use rand::Rng;

use crate::chain::{survival_probability, ChainConfig, ChainTopology};
use crate::logical::{PhotonRecord, TreeRecord};
use crate::protocol::{AbsaReport, BsmResult, FailureReason, TrialOutcome};
use crate::rgs::{RgsSpec, Side};

fn sample_photon<R: Rng>(rng: &mut R, p_arrive: f64) -> PhotonRecord {
    let vop = rng.gen::<bool>();
    if rng.gen::<f64>() < p_arrive {
        PhotonRecord::measured(rng.gen(), vop)
    } else {
        PhotonRecord::lost(vop)
    }
}

fn sample_tree<R: Rng>(
    rng: &mut R,
    spec: &RgsSpec,
    side: Side,
    arm: u32,
    kept: bool,
    p_arrive: f64,
) -> TreeRecord {
    let root = sample_photon(rng, p_arrive);
    let levels = spec
        .b
        .level_sizes()
        .iter()
        .map(|&n| (0..n).map(|_| sample_photon(rng, p_arrive)).collect())
        .collect();
    TreeRecord {
        side,
        arm,
        kept,
        root,
        levels,
    }
}

/// Run one accounting-mode attempt. Mirrors the exact-mode staging: BSMs
/// left to right with early abort, then trees, then the gating rules.
pub fn run_attempt_accounting<R: Rng>(
    config: &ChainConfig,
    topology: &ChainTopology,
    rng: &mut R,
) -> TrialOutcome {
    let m = config.rgs_spec.m;
    let n_rgss = topology.n_rgss();
    let n_absa = n_rgss + 1;
    let p = survival_probability(
        topology.segment_km,
        config.attenuation_db_per_km,
        config.detector_efficiency,
    );

    let mut reports: Vec<AbsaReport> = (0..n_absa)
        .map(|i| AbsaReport::empty(i, m as usize))
        .collect();

    // Stage 1.
    let mut kept: Vec<u32> = Vec::with_capacity(n_absa);
    for i in 0..n_absa {
        let mut chosen: Option<u32> = None;
        for j in 0..m {
            let l_arrived = rng.gen::<f64>() < p;
            let r_arrived = rng.gen::<f64>() < p;
            let l_vop = rng.gen::<bool>();
            let r_vop = rng.gen::<bool>();
            let result = if !(l_arrived && r_arrived) {
                BsmResult::PhotonLost
            } else if rng.gen::<f64>() < config.bsm_success_cap {
                let left_raw = rng.gen::<bool>();
                let right_raw = rng.gen::<bool>();
                if chosen.is_none() {
                    chosen = Some(j);
                    reports[i].kept_left_photon = Some(PhotonRecord::measured(left_raw, l_vop));
                    reports[i].kept_right_photon = Some(PhotonRecord::measured(right_raw, r_vop));
                }
                BsmResult::Success { left_raw, right_raw }
            } else {
                BsmResult::Fail
            };
            reports[i].bsm_results[j as usize] = result;
        }
        reports[i].chosen_arm_pair = chosen;
        match chosen {
            Some(c) => kept.push(c),
            None => {
                return TrialOutcome {
                    success: false,
                    failure: Some(FailureReason::AllBsmsFailed { absa: i }),
                    reports,
                    kept_end_qubits: None,
                    events: Vec::new(),
                }
            }
        }
    }

    // Stages 2 and 3.
    for k in 0..n_rgss {
        for side in Side::both() {
            let absa = if side == Side::Left { k } else { k + 1 };
            for arm in 0..m {
                let record =
                    sample_tree(rng, &config.rgs_spec, side, arm, arm == kept[absa], p);
                match side {
                    Side::Left => reports[k].right_trees.push(record),
                    Side::Right => reports[k + 1].left_trees.push(record),
                }
            }
        }
    }

    // Gating.
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

    TrialOutcome {
        success: failure.is_none(),
        failure,
        reports,
        kept_end_qubits: None,
        events: Vec::new(),
    }
}
