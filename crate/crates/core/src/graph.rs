//! Exact graph-state manipulation with per-vertex local Cliffords.
//!
//! A state is a simple graph plus one `LocalClifford` per vertex: the
//! represented quantum state is `(⊗ᵥ vopᵥ) |G⟩` where |G⟩ is the canonical
//! graph state of the edge set. Edge operations, local complementation and
//! the Pauli measurements below keep that correspondence exact; every rule
//! here is pinned against the dense oracle in the test suites.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::clifford::{LocalClifford, Pauli};

/// Vertex index. Unique within a `GraphState`; ids of removed vertices are
/// never handed out again by `fresh_vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Measurement basis exposed by the public operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasBasis {
    X,
    Z,
}

impl MeasBasis {
    pub fn pauli(self) -> Pauli {
        match self {
            MeasBasis::X => Pauli::X,
            MeasBasis::Z => Pauli::Z,
        }
    }
}

/// Record of one physical single-qubit measurement.
///
/// `outcome` is the raw detector bit (0 ↦ +1 eigenvalue, 1 ↦ −1); it is
/// absent exactly when the photon was lost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub vertex: VertexId,
    pub basis: MeasBasis,
    pub outcome: Option<bool>,
    pub lost: bool,
}

impl MeasurementRecord {
    fn measured(vertex: VertexId, basis: MeasBasis, outcome: bool) -> Self {
        MeasurementRecord {
            vertex,
            basis,
            outcome: Some(outcome),
            lost: false,
        }
    }

    pub fn lost(vertex: VertexId, basis: MeasBasis) -> Self {
        MeasurementRecord {
            vertex,
            basis,
            outcome: None,
            lost: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex id {0} already present or retired")]
    VertexInUse(VertexId),
    #[error("self loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {0} has a non-diagonal VOP; CZ edge toggle would be inexact")]
    NonDiagonalVop(VertexId),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
    #[error("vertices {0} and {1} share a neighbor")]
    SharedNeighbor(VertexId, VertexId),
    #[error("special neighbor {special} is not adjacent to {vertex}")]
    SpecialNotNeighbor { vertex: VertexId, special: VertexId },
    #[error("VOP restriction violated: vertex {0} carries {1}")]
    VopRestriction(VertexId, String),
}

#[derive(Clone, Debug)]
struct VertexEntry {
    neighbors: BTreeSet<VertexId>,
    vop: LocalClifford,
}

/// Graph state with VOP tracking.
#[derive(Clone, Debug, Default)]
pub struct GraphState {
    vertices: BTreeMap<VertexId, VertexEntry>,
    next_fresh: u32,
}

impl GraphState {
    pub fn new() -> Self {
        GraphState::default()
    }

    /// Allocate a new vertex with the next unused id, VOP = I.
    pub fn fresh_vertex(&mut self) -> VertexId {
        let id = VertexId(self.next_fresh);
        self.next_fresh += 1;
        self.vertices.insert(
            id,
            VertexEntry {
                neighbors: BTreeSet::new(),
                vop: LocalClifford::identity(),
            },
        );
        id
    }

    /// Insert a vertex with a caller-chosen id. Ids below the fresh watermark
    /// are rejected so that removed ids are never reused.
    pub fn add_vertex(&mut self, id: VertexId) -> Result<(), GraphError> {
        if id.0 < self.next_fresh || self.vertices.contains_key(&id) {
            return Err(GraphError::VertexInUse(id));
        }
        self.next_fresh = id.0 + 1;
        self.vertices.insert(
            id,
            VertexEntry {
                neighbors: BTreeSet::new(),
                vop: LocalClifford::identity(),
            },
        );
        Ok(())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn neighbors(&self, v: VertexId) -> Result<&BTreeSet<VertexId>, GraphError> {
        self.vertices
            .get(&v)
            .map(|e| &e.neighbors)
            .ok_or(GraphError::UnknownVertex(v))
    }

    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        Ok(self.neighbors(v)?.len())
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.vertices
            .get(&u)
            .is_some_and(|e| e.neighbors.contains(&v))
    }

    /// Sorted edge list with u < v.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (&u, e) in &self.vertices {
            for &v in &e.neighbors {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn vop(&self, v: VertexId) -> Result<LocalClifford, GraphError> {
        self.vertices
            .get(&v)
            .map(|e| e.vop)
            .ok_or(GraphError::UnknownVertex(v))
    }

    pub fn set_vop(&mut self, v: VertexId, vop: LocalClifford) -> Result<(), GraphError> {
        self.vertices
            .get_mut(&v)
            .map(|e| e.vop = vop)
            .ok_or(GraphError::UnknownVertex(v))
    }

    /// Right-multiply the VOP: the new factor sits next to the graph state.
    fn fold_vop(&mut self, v: VertexId, factor: LocalClifford) {
        let e = self.vertices.get_mut(&v).expect("internal vertex");
        e.vop = e.vop.compose(factor);
    }

    fn toggle_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert_ne!(u, v);
        let had = self
            .vertices
            .get_mut(&u)
            .expect("internal vertex")
            .neighbors
            .insert(v);
        if !had {
            self.vertices.get_mut(&u).unwrap().neighbors.remove(&v);
            self.vertices.get_mut(&v).unwrap().neighbors.remove(&u);
        } else {
            self.vertices.get_mut(&v).unwrap().neighbors.insert(u);
        }
    }

    fn remove_vertex(&mut self, v: VertexId) {
        let entry = self.vertices.remove(&v).expect("internal vertex");
        for n in entry.neighbors {
            self.vertices.get_mut(&n).unwrap().neighbors.remove(&v);
        }
    }

    /// Toggle the edge (u, v). Exact only when both VOPs are diagonal, since
    /// diagonal Cliffords commute with CZ.
    pub fn apply_cz(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for w in [u, v] {
            if !self.contains(w) {
                return Err(GraphError::UnknownVertex(w));
            }
        }
        for w in [u, v] {
            if !self.vop(w)?.is_diagonal() {
                return Err(GraphError::NonDiagonalVop(w));
            }
        }
        self.toggle_edge(u, v);
        Ok(())
    }

    /// Local complementation at `v`: complement the edges among N(v) and fold
    /// the compensating Cliffords into the VOPs so the represented state is
    /// unchanged. v picks up e^{+iπ/4 X}, each neighbor e^{-iπ/4 Z}.
    pub fn local_complement(&mut self, v: VertexId) -> Result<(), GraphError> {
        let nbs: Vec<VertexId> = self.neighbors(v)?.iter().copied().collect();
        for i in 0..nbs.len() {
            for j in (i + 1)..nbs.len() {
                self.toggle_edge(nbs[i], nbs[j]);
            }
        }
        self.fold_vop(v, LocalClifford::sqrt_x_pos());
        for b in nbs {
            self.fold_vop(b, LocalClifford::sqrt_z_neg());
        }
        Ok(())
    }

    /// Bare-graph Z measurement: remove the vertex; on the −1 branch fold Z
    /// into every former neighbor.
    fn bare_z(&mut self, v: VertexId, minus: bool) {
        let nbs: Vec<VertexId> = self.vertices[&v].neighbors.iter().copied().collect();
        self.remove_vertex(v);
        if minus {
            for b in nbs {
                self.fold_vop(b, LocalClifford::pauli_z());
            }
        }
    }

    /// Bare-graph Y measurement: byproduct e^{∓iπ/4 Z} on each neighbor,
    /// complement the neighborhood, remove the vertex.
    fn bare_y(&mut self, v: VertexId, minus: bool) {
        let nbs: Vec<VertexId> = self.vertices[&v].neighbors.iter().copied().collect();
        let factor = if minus {
            LocalClifford::sqrt_z_pos()
        } else {
            LocalClifford::sqrt_z_neg()
        };
        for &b in &nbs {
            self.fold_vop(b, factor);
        }
        for i in 0..nbs.len() {
            for j in (i + 1)..nbs.len() {
                self.toggle_edge(nbs[i], nbs[j]);
            }
        }
        self.remove_vertex(v);
    }

    /// Measure `v` in a Pauli basis. The caller supplies the outcome bit for
    /// the random branches; if the outcome is deterministic (isolated vertex
    /// whose effective basis is X) the actual outcome is reported instead.
    /// Returns the raw outcome bit.
    fn measure_pauli(
        &mut self,
        v: VertexId,
        basis: Pauli,
        outcome: bool,
        special: Option<VertexId>,
    ) -> Result<bool, GraphError> {
        if !self.contains(v) {
            return Err(GraphError::UnknownVertex(v));
        }
        if let Some(s) = special {
            if !self.has_edge(v, s) {
                return Err(GraphError::SpecialNotNeighbor { vertex: v, special: s });
            }
        }
        let eff = self.vop(v)?.conjugate_basis(basis);
        match eff.pauli {
            Pauli::Z => {
                self.bare_z(v, outcome ^ eff.negative);
                Ok(outcome)
            }
            Pauli::Y => {
                self.bare_y(v, outcome ^ eff.negative);
                Ok(outcome)
            }
            Pauli::X => {
                if self.vertices[&v].neighbors.is_empty() {
                    // Isolated bare |+⟩: the ±X outcome is deterministic.
                    self.remove_vertex(v);
                    return Ok(eff.negative);
                }
                let b0 = special.unwrap_or_else(|| *self.vertices[&v].neighbors.first().unwrap());
                self.local_complement(b0)?;
                let eff2 = self.vop(v)?.conjugate_basis(basis);
                debug_assert_eq!(eff2.pauli, Pauli::Y);
                self.bare_y(v, outcome ^ eff2.negative);
                self.local_complement(b0)?;
                Ok(outcome)
            }
        }
    }

    /// Z-basis measurement. Both outcomes have probability 1/2 whenever the
    /// vertex has a neighbor and its VOP is in {I, Z}.
    pub fn measure_z(
        &mut self,
        v: VertexId,
        outcome: bool,
    ) -> Result<MeasurementRecord, GraphError> {
        let actual = self.measure_pauli(v, Pauli::Z, outcome, None)?;
        Ok(MeasurementRecord::measured(v, MeasBasis::Z, actual))
    }

    /// X-basis measurement. `special` must be a neighbor of `v` when given;
    /// by default the minimum-id neighbor is used.
    pub fn measure_x(
        &mut self,
        v: VertexId,
        outcome: bool,
        special: Option<VertexId>,
    ) -> Result<MeasurementRecord, GraphError> {
        let actual = self.measure_pauli(v, Pauli::X, outcome, special)?;
        Ok(MeasurementRecord::measured(v, MeasBasis::X, actual))
    }

    /// XX measurement on an adjacent pair with disjoint neighborhoods:
    /// removes both vertices and joins every former neighbor of `u` to every
    /// former neighbor of `v`, leaving {I, Z} byproducts determined by the
    /// two outcomes.
    pub fn measure_xx(
        &mut self,
        u: VertexId,
        v: VertexId,
        outcomes: (bool, bool),
    ) -> Result<(MeasurementRecord, MeasurementRecord), GraphError> {
        if !self.contains(u) {
            return Err(GraphError::UnknownVertex(u));
        }
        if !self.contains(v) {
            return Err(GraphError::UnknownVertex(v));
        }
        if !self.has_edge(u, v) {
            return Err(GraphError::NotAdjacent(u, v));
        }
        let shared: Vec<_> = self.vertices[&u]
            .neighbors
            .intersection(&self.vertices[&v].neighbors)
            .filter(|&&w| w != u && w != v)
            .collect();
        if !shared.is_empty() {
            return Err(GraphError::SharedNeighbor(u, v));
        }
        let ru = self.measure_x(u, outcomes.0, Some(v))?;
        let rv = self.measure_x(v, outcomes.1, None)?;
        Ok((ru, rv))
    }

    /// Check that every VOP is I or Z, the restricted alphabet the protocol
    /// layer hands across module boundaries.
    pub fn assert_vops_i_or_z(&self) -> Result<(), GraphError> {
        for (&v, e) in &self.vertices {
            if !e.vop.is_i_or_z() {
                return Err(GraphError::VopRestriction(v, e.vop.name()));
            }
        }
        Ok(())
    }

    /// Deterministic text dump: sorted "u v" edge lines, then "vop id name"
    /// lines for every vertex.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        for (&v, e) in &self.vertices {
            writeln!(out, "vop {v} {}", e.vop.name()).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> GraphState {
        // 1 - 2 - 3 using explicit ids 0,1,2
        let mut g = GraphState::new();
        let a = g.fresh_vertex();
        let b = g.fresh_vertex();
        let c = g.fresh_vertex();
        g.apply_cz(a, b).unwrap();
        g.apply_cz(b, c).unwrap();
        g
    }

    #[test]
    fn cz_toggles_edges() {
        let mut g = GraphState::new();
        let a = g.fresh_vertex();
        let b = g.fresh_vertex();
        g.apply_cz(a, b).unwrap();
        assert!(g.has_edge(a, b));
        g.apply_cz(a, b).unwrap();
        assert!(!g.has_edge(a, b));
    }

    #[test]
    fn cz_rejects_non_diagonal_vops() {
        let mut g = GraphState::new();
        let a = g.fresh_vertex();
        let b = g.fresh_vertex();
        g.set_vop(a, LocalClifford::hadamard()).unwrap();
        assert_eq!(g.apply_cz(a, b), Err(GraphError::NonDiagonalVop(a)));
        g.set_vop(a, LocalClifford::phase_s()).unwrap();
        g.apply_cz(a, b).unwrap();
    }

    #[test]
    fn z_measurement_removes_vertex_and_flags_byproduct() {
        let mut g = path3();
        let (a, b, c) = (VertexId(0), VertexId(1), VertexId(2));
        let rec = g.measure_z(b, false).unwrap();
        assert_eq!(rec.outcome, Some(false));
        assert!(!g.contains(b));
        assert!(g.edges().is_empty());
        assert!(g.vop(a).unwrap().is_identity());
        assert!(g.vop(c).unwrap().is_identity());

        let mut g = path3();
        g.measure_z(b, true).unwrap();
        assert_eq!(g.vop(a).unwrap(), LocalClifford::pauli_z());
        assert_eq!(g.vop(c).unwrap(), LocalClifford::pauli_z());
    }

    #[test]
    fn isolated_x_measurement_is_deterministic() {
        let mut g = GraphState::new();
        let v = g.fresh_vertex();
        let rec = g.measure_x(v, false, None).unwrap();
        assert_eq!(rec.outcome, Some(false));

        let mut g = GraphState::new();
        let v = g.fresh_vertex();
        g.set_vop(v, LocalClifford::pauli_z()).unwrap();
        // Z VOP flips the X outcome
        let rec = g.measure_x(v, false, None).unwrap();
        assert_eq!(rec.outcome, Some(true));
    }

    #[test]
    fn xx_on_chain_joins_endpoints() {
        // a - u - v - b
        let mut g = GraphState::new();
        let a = g.fresh_vertex();
        let u = g.fresh_vertex();
        let v = g.fresh_vertex();
        let b = g.fresh_vertex();
        g.apply_cz(a, u).unwrap();
        g.apply_cz(u, v).unwrap();
        g.apply_cz(v, b).unwrap();
        for (bu, bv) in [(false, false), (false, true), (true, false), (true, true)] {
            let mut h = g.clone();
            h.measure_xx(u, v, (bu, bv)).unwrap();
            assert_eq!(h.edges(), vec![(a, b)]);
            // byproducts: a side carries Z^{x(v)}, b side Z^{x(u)}
            let want_a = if bv {
                LocalClifford::pauli_z()
            } else {
                LocalClifford::identity()
            };
            let want_b = if bu {
                LocalClifford::pauli_z()
            } else {
                LocalClifford::identity()
            };
            assert_eq!(h.vop(a).unwrap(), want_a);
            assert_eq!(h.vop(b).unwrap(), want_b);
        }
    }

    #[test]
    fn xx_bell_pair_empties_graph() {
        let mut g = GraphState::new();
        let u = g.fresh_vertex();
        let v = g.fresh_vertex();
        g.apply_cz(u, v).unwrap();
        g.measure_xx(u, v, (false, false)).unwrap();
        assert_eq!(g.vertex_count(), 0);
    }

    #[test]
    fn xx_rejects_bad_pairs() {
        let mut g = GraphState::new();
        let u = g.fresh_vertex();
        let v = g.fresh_vertex();
        assert_eq!(
            g.measure_xx(u, v, (false, false)),
            Err(GraphError::NotAdjacent(u, v))
        );
        let w = g.fresh_vertex();
        g.apply_cz(u, v).unwrap();
        g.apply_cz(u, w).unwrap();
        g.apply_cz(v, w).unwrap();
        assert_eq!(
            g.measure_xx(u, v, (false, false)),
            Err(GraphError::SharedNeighbor(u, v))
        );
    }

    #[test]
    fn documented_local_complement_edge_changes() {
        // Documented neighborhood of vertex 3: N(3) = {1, 4, 5}, edge (1,4)
        // present, (1,5) and (4,5) absent. LC at 3 must delete (1,4) and
        // create (1,5), (4,5); edges outside N(3) stay put.
        let mut g = GraphState::new();
        let ids: Vec<VertexId> = (0..6).map(|_| g.fresh_vertex()).collect();
        let (v1, v2, v3, v4, v5) = (ids[1], ids[2], ids[3], ids[4], ids[5]);
        g.apply_cz(v3, v1).unwrap();
        g.apply_cz(v3, v4).unwrap();
        g.apply_cz(v3, v5).unwrap();
        g.apply_cz(v1, v4).unwrap();
        g.apply_cz(v1, v2).unwrap(); // bystander edge outside N(3)
        g.local_complement(v3).unwrap();
        assert!(!g.has_edge(v1, v4));
        assert!(g.has_edge(v1, v5));
        assert!(g.has_edge(v4, v5));
        assert!(g.has_edge(v1, v2));
        for n in [v1, v4, v5] {
            assert!(g.has_edge(v3, n));
        }
    }

    #[test]
    fn lc_is_involution_on_edges() {
        let mut g = path3();
        let before = g.edges();
        g.local_complement(VertexId(1)).unwrap();
        g.local_complement(VertexId(1)).unwrap();
        assert_eq!(g.edges(), before);
    }

    #[test]
    fn lc_on_isolated_vertex_is_noop() {
        let mut g = GraphState::new();
        let v = g.fresh_vertex();
        g.local_complement(v).unwrap();
        assert!(g.contains(v));
        assert!(g.edges().is_empty());
    }

    #[test]
    fn vertex_ids_never_reused() {
        let mut g = GraphState::new();
        let a = g.fresh_vertex();
        g.measure_z(a, false).unwrap();
        let b = g.fresh_vertex();
        assert_ne!(a, b);
        assert_eq!(g.add_vertex(a), Err(GraphError::VertexInUse(a)));
    }

    #[test]
    fn dump_is_deterministic() {
        let mut g = GraphState::new();
        let a = g.fresh_vertex();
        let b = g.fresh_vertex();
        let c = g.fresh_vertex();
        g.apply_cz(b, c).unwrap();
        g.apply_cz(a, b).unwrap();
        g.set_vop(c, LocalClifford::pauli_z()).unwrap();
        assert_eq!(g.dump(), "0 1\n1 2\nvop 0 I\nvop 1 I\nvop 2 Z\n");
    }

    #[test]
    fn vop_restriction_check() {
        let mut g = GraphState::new();
        let v = g.fresh_vertex();
        assert!(g.assert_vops_i_or_z().is_ok());
        g.set_vop(v, LocalClifford::hadamard()).unwrap();
        assert!(matches!(
            g.assert_vops_i_or_z(),
            Err(GraphError::VopRestriction(_, _))
        ));
    }
}
