//! Logical tree measurements: fixed basis patterns, loss-tolerant recovery of
//! Z results from descendants, and the logical success/outcome rules.
//!
//! Tree levels are counted from 1 at the root's children. Levels below the
//! root follow one pattern for both logical bases: odd levels are measured in
//! Z, even levels in X. The root itself is measured in Z when the arm is
//! pruned and in X when it is kept. A lost Z-level photon is recovered
//! indirectly when some child's X measurement succeeded and all of that
//! child's children have Z values (recursively); X results are never
//! recoverable.

use crate::clifford::Pauli;
use crate::rgs::Side;

/// Raw record for one photon: detector bit (None when lost) plus the
/// generation VOP bit (true = Z).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhotonRecord {
    pub raw: Option<bool>,
    pub vop: bool,
}

impl PhotonRecord {
    pub fn measured(raw: bool, vop: bool) -> Self {
        PhotonRecord {
            raw: Some(raw),
            vop,
        }
    }

    pub fn lost(vop: bool) -> Self {
        PhotonRecord { raw: None, vop }
    }

    /// VOP-corrected X outcome (a Z VOP flips X results only).
    pub fn xhat(&self) -> Option<bool> {
        self.raw.map(|r| r ^ self.vop)
    }
}

/// Result of a logical measurement on one arm's tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalResult {
    pub success: bool,
    pub outcome: Option<bool>,
}

impl LogicalResult {
    pub fn failed() -> Self {
        LogicalResult {
            success: false,
            outcome: None,
        }
    }
}

/// Physical basis for a tree level (1-based; the root is level 0).
pub fn level_basis(level: usize) -> Pauli {
    if level % 2 == 1 {
        Pauli::Z
    } else {
        Pauli::X
    }
}

/// Measurement records for one arm: root plus the tree levels below it.
#[derive(Clone, Debug)]
pub struct TreeRecord {
    pub side: Side,
    pub arm: u32,
    /// True when this arm was selected at stage 2 (root measured in X).
    pub kept: bool,
    pub root: PhotonRecord,
    /// levels[0] is level 1 (the root's children).
    pub levels: Vec<Vec<PhotonRecord>>,
}

impl TreeRecord {
    fn branching_at(&self, li: usize) -> usize {
        self.levels[li + 1].len() / self.levels[li].len()
    }

    /// Z value of the tree vertex at Z-measured level index `li` (0-based;
    /// li even), directly or recovered through descendants.
    fn z_value(&self, li: usize, pos: usize) -> Option<bool> {
        debug_assert_eq!(li % 2, 0, "z_value on an X-measured level");
        if let Some(raw) = self.levels[li][pos].raw {
            return Some(raw);
        }
        if li + 1 >= self.levels.len() {
            return None;
        }
        let bk = self.branching_at(li);
        for ci in 0..bk {
            let child_pos = pos * bk + ci;
            let Some(x) = self.levels[li + 1][child_pos].xhat() else {
                continue;
            };
            let mut acc = x;
            let mut complete = true;
            let gk = if li + 2 < self.levels.len() {
                self.branching_at(li + 1)
            } else {
                0
            };
            for gi in 0..gk {
                match self.z_value(li + 2, child_pos * gk + gi) {
                    Some(z) => acc ^= z,
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                return Some(acc);
            }
        }
        None
    }

    /// Parity of all level-1 Z values; None when any is unavailable.
    pub fn level1_parity(&self) -> Option<bool> {
        let mut acc = false;
        for pos in 0..self.levels[0].len() {
            acc ^= self.z_value(0, pos)?;
        }
        Some(acc)
    }

    /// Logical Z: prune outcome. Succeeds when the root arrived and every
    /// level-1 Z value is available; the outcome is the root's Z bit (a Z VOP
    /// does not flip Z results).
    pub fn logical_z(&self) -> LogicalResult {
        let Some(root_raw) = self.root.raw else {
            return LogicalResult::failed();
        };
        if self.level1_parity().is_none() {
            return LogicalResult::failed();
        }
        LogicalResult {
            success: true,
            outcome: Some(root_raw),
        }
    }

    /// Logical X: keep outcome. Succeeds under the same availability rule;
    /// the outcome folds the root's VOP-corrected X bit with the parity of
    /// the level-1 Z values it detached.
    pub fn logical_x(&self) -> LogicalResult {
        let Some(root_x) = self.root.xhat() else {
            return LogicalResult::failed();
        };
        let Some(parity) = self.level1_parity() else {
            return LogicalResult::failed();
        };
        LogicalResult {
            success: true,
            outcome: Some(root_x ^ parity),
        }
    }

    pub fn logical(&self, basis: Pauli) -> LogicalResult {
        match basis {
            Pauli::Z => self.logical_z(),
            Pauli::X => self.logical_x(),
            Pauli::Y => unreachable!("logical measurements are X or Z"),
        }
    }

    /// Photons with recorded outcomes, root included.
    pub fn measured_count(&self) -> u64 {
        let tree: u64 = self
            .levels
            .iter()
            .flatten()
            .filter(|p| p.raw.is_some())
            .count() as u64;
        tree + self.root.raw.is_some() as u64
    }

    /// Total photons in this arm's tree, root included, outer excluded.
    pub fn photon_count(&self) -> u64 {
        1 + self.levels.iter().map(|l| l.len() as u64).sum::<u64>()
    }
}

/// Probability that a logical measurement on a tree with branching `b`
/// succeeds when each photon independently arrives with probability
/// `p_arrive`, by exhaustive enumeration over all loss patterns. This is the
/// oracle for the Monte Carlo success-rate tests; it shares only the
/// availability rule with the sampler, not the sampling path.
pub fn logical_success_by_enumeration(b: &[u32], p_arrive: f64) -> f64 {
    let mut shape = vec![1usize];
    for (i, &bk) in b.iter().enumerate() {
        shape.push(shape[i] * bk as usize);
    }
    let total: usize = shape.iter().sum();
    assert!(total <= 20, "enumeration oracle is exponential in tree size");
    let mut prob = 0.0;
    for pattern in 0..(1u32 << total) {
        let arrived = |idx: usize| pattern & (1 << idx) != 0;
        let mut idx = 0;
        let root = PhotonRecord {
            raw: arrived(idx).then_some(false),
            vop: false,
        };
        idx += 1;
        let mut levels = Vec::new();
        for &n in &shape[1..] {
            let mut level = Vec::with_capacity(n);
            for _ in 0..n {
                level.push(PhotonRecord {
                    raw: arrived(idx).then_some(false),
                    vop: false,
                });
                idx += 1;
            }
            levels.push(level);
        }
        let record = TreeRecord {
            side: Side::Left,
            arm: 0,
            kept: false,
            root,
            levels,
        };
        if record.logical_z().success {
            let k = (0..total).filter(|&i| arrived(i)).count();
            prob += p_arrive.powi(k as i32) * (1.0 - p_arrive).powi((total - k) as i32);
        }
    }
    prob
}
