//! Construction of repeater graph states: 2m outer photons, a complete core
//! of 2m tree roots, and a loss-protection tree below each root.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::LocalClifford;
use crate::graph::{GraphState, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RgsError {
    #[error("branching vector must be non-empty with entries >= 1")]
    InvalidBranching,
    #[error("m must be >= 1")]
    InvalidArmCount,
}

/// Tree branching vector (b1, ..., bn): children per node at each level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchingVector(Vec<u32>);

impl BranchingVector {
    pub fn new(b: Vec<u32>) -> Result<Self, RgsError> {
        if b.is_empty() || b.contains(&0) {
            return Err(RgsError::InvalidBranching);
        }
        Ok(BranchingVector(b))
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Number of tree vertices below the root: Σ_k Π_{i<=k} b_i.
    pub fn tree_size(&self) -> u64 {
        let mut total = 0u64;
        let mut level = 1u64;
        for &b in &self.0 {
            level *= b as u64;
            total += level;
        }
        total
    }

    /// Vertices per level, root excluded: [b1, b1*b2, ...].
    pub fn level_sizes(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut level = 1u64;
        for &b in &self.0 {
            level *= b as u64;
            out.push(level);
        }
        out
    }
}

impl std::fmt::Display for BranchingVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// RGS shape: m arms per side plus the tree encoding of each root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RgsSpec {
    pub m: u32,
    pub b: BranchingVector,
}

impl RgsSpec {
    pub fn new(m: u32, b: BranchingVector) -> Result<Self, RgsError> {
        if m == 0 {
            return Err(RgsError::InvalidArmCount);
        }
        Ok(RgsSpec { m, b })
    }
}

/// Total photons in one RGS: per arm one outer, one root, and the tree.
pub fn photons_per_rgs(spec: &RgsSpec) -> u64 {
    2 * spec.m as u64 * (2 + spec.b.tree_size())
}

/// Which half of the RGS an arm belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn both() -> [Side; 2] {
        [Side::Left, Side::Right]
    }
}

/// Role of a vertex inside an RGS instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Outer {
        side: Side,
        arm: u32,
    },
    /// Tree vertex; level 0 is the root carrying the core and outer edges.
    InnerTree {
        side: Side,
        arm: u32,
        level: u32,
        position: u32,
    },
}

/// One arm: the outer photon, the root, and the tree levels below it.
#[derive(Clone, Debug)]
pub struct ArmIds {
    pub side: Side,
    pub arm: u32,
    pub outer: VertexId,
    pub root: VertexId,
    /// levels[k] holds level k+1 of the tree, in position order.
    pub levels: Vec<Vec<VertexId>>,
}

impl ArmIds {
    /// Children of a tree vertex at `level` (1-based; level 0 children are
    /// levels[0]).
    pub fn children(&self, level: u32, position: u32, b: &BranchingVector) -> &[VertexId] {
        let li = level as usize; // children live in levels[li]
        if li >= self.levels.len() {
            return &[];
        }
        let bk = b.entries()[li] as usize;
        let start = position as usize * bk;
        &self.levels[li][start..start + bk]
    }

    pub fn tree_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.levels.iter().flatten().copied()
    }
}

/// A constructed RGS living inside a GraphState.
#[derive(Clone, Debug)]
pub struct RgsInstance {
    pub spec: RgsSpec,
    pub arms: BTreeMap<(Side, u32), ArmIds>,
    roles: BTreeMap<VertexId, Role>,
}

impl RgsInstance {
    pub fn role(&self, v: VertexId) -> Option<Role> {
        self.roles.get(&v).copied()
    }

    pub fn arm(&self, side: Side, arm: u32) -> &ArmIds {
        &self.arms[&(side, arm)]
    }

    pub fn roots(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.arms.values().map(|a| a.root)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.roles.keys().copied()
    }
}

/// VOPs to stamp onto the freshly built instance.
pub enum VopAssignment<'a> {
    AllIdentity,
    /// Explicit I/Z choice per vertex; true means Z.
    Explicit(&'a BTreeMap<VertexId, bool>),
}

/// Build an RGS into `state`. Vertex numbering is deterministic: for each
/// side then arm, the outer photon, then the tree in level order.
pub fn build_rgs(
    state: &mut GraphState,
    spec: &RgsSpec,
    vops: VopAssignment<'_>,
) -> Result<RgsInstance, RgsError> {
    if spec.m == 0 {
        return Err(RgsError::InvalidArmCount);
    }
    let mut arms = BTreeMap::new();
    let mut roles = BTreeMap::new();
    for side in Side::both() {
        for arm in 0..spec.m {
            let outer = state.fresh_vertex();
            roles.insert(outer, Role::Outer { side, arm });
            let root = state.fresh_vertex();
            roles.insert(
                root,
                Role::InnerTree {
                    side,
                    arm,
                    level: 0,
                    position: 0,
                },
            );
            state.apply_cz(outer, root).expect("fresh vertices");
            let mut levels: Vec<Vec<VertexId>> = Vec::with_capacity(spec.b.depth());
            let mut parents = vec![root];
            for (k, &bk) in spec.b.entries().iter().enumerate() {
                let mut level = Vec::with_capacity(parents.len() * bk as usize);
                for &p in &parents {
                    for _ in 0..bk {
                        let c = state.fresh_vertex();
                        roles.insert(
                            c,
                            Role::InnerTree {
                                side,
                                arm,
                                level: k as u32 + 1,
                                position: level.len() as u32,
                            },
                        );
                        state.apply_cz(p, c).expect("fresh vertices");
                        level.push(c);
                    }
                }
                parents = level.clone();
                levels.push(level);
            }
            arms.insert(
                (side, arm),
                ArmIds {
                    side,
                    arm,
                    outer,
                    root,
                    levels,
                },
            );
        }
    }
    // complete graph among the 2m roots
    let roots: Vec<VertexId> = arms.values().map(|a| a.root).collect();
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            state.apply_cz(roots[i], roots[j]).expect("fresh vertices");
        }
    }
    if let VopAssignment::Explicit(map) = vops {
        for (&v, &z) in map {
            if z {
                state
                    .set_vop(v, LocalClifford::pauli_z())
                    .expect("vertex exists");
            }
        }
    }
    Ok(RgsInstance {
        spec: spec.clone(),
        arms,
        roles,
    })
}

/// Emission order for one side: all outer photons first (arm order), then
/// tree vertices level-major across arms (all roots, then all level-1, ...).
pub fn emission_order(instance: &RgsInstance, side: Side) -> Vec<VertexId> {
    let m = instance.spec.m;
    let mut out = Vec::new();
    for arm in 0..m {
        out.push(instance.arm(side, arm).outer);
    }
    for arm in 0..m {
        out.push(instance.arm(side, arm).root);
    }
    for level in 0..instance.spec.b.depth() {
        for arm in 0..m {
            out.extend(&instance.arm(side, arm).levels[level]);
        }
    }
    out
}
