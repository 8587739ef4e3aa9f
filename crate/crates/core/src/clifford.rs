//! The single-qubit Clifford group modulo global phase (24 elements), used as
//! vertex operators (VOPs) on graph-state vertices.
//!
//! Each element is identified by its conjugation action on the Pauli axes:
//! the images of X and Z under `U P U†`. That pair of signed Paulis determines
//! the element up to phase, which is all a graph-state representation needs.

use std::fmt;
use std::sync::LazyLock;

/// A Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pauli::X => write!(f, "X"),
            Pauli::Y => write!(f, "Y"),
            Pauli::Z => write!(f, "Z"),
        }
    }
}

/// A Pauli with a sign, e.g. -Y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedPauli {
    pub pauli: Pauli,
    pub negative: bool,
}

impl SignedPauli {
    const fn new(pauli: Pauli, negative: bool) -> Self {
        SignedPauli { pauli, negative }
    }
}

/// Signed result of i * P_a * P_b for distinct Paulis, as (P3, negative).
/// E.g. i*X*Y = i*(iZ) = -Z.
fn pauli_cross(a: Pauli, b: Pauli) -> (Pauli, bool) {
    match (a, b) {
        (Pauli::X, Pauli::Y) => (Pauli::Z, true),
        (Pauli::Y, Pauli::Z) => (Pauli::X, true),
        (Pauli::Z, Pauli::X) => (Pauli::Y, true),
        (Pauli::Y, Pauli::X) => (Pauli::Z, false),
        (Pauli::Z, Pauli::Y) => (Pauli::X, false),
        (Pauli::X, Pauli::Z) => (Pauli::Y, false),
        _ => unreachable!("cross of equal Paulis"),
    }
}

/// Conjugation signature: images of X and Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Action {
    x_img: SignedPauli,
    z_img: SignedPauli,
}

impl Action {
    const IDENTITY: Action = Action {
        x_img: SignedPauli::new(Pauli::X, false),
        z_img: SignedPauli::new(Pauli::Z, false),
    };

    /// Image of an arbitrary signed Pauli under this action.
    fn apply(&self, p: SignedPauli) -> SignedPauli {
        match p.pauli {
            Pauli::X => SignedPauli::new(self.x_img.pauli, self.x_img.negative ^ p.negative),
            Pauli::Z => SignedPauli::new(self.z_img.pauli, self.z_img.negative ^ p.negative),
            Pauli::Y => {
                // U Y U† = i (U X U†)(U Z U†); pauli_cross folds the i.
                let (p3, neg) = pauli_cross(self.x_img.pauli, self.z_img.pauli);
                SignedPauli::new(
                    p3,
                    self.x_img.negative ^ self.z_img.negative ^ neg ^ p.negative,
                )
            }
        }
    }

    /// Composition: self after other, i.e. (self ∘ other)(P) = self(other(P)).
    fn compose(&self, other: &Action) -> Action {
        Action {
            x_img: self.apply(other.x_img),
            z_img: self.apply(other.z_img),
        }
    }
}

struct GroupTables {
    /// Canonically ordered actions; the index is the element id.
    actions: Vec<Action>,
    /// mul[a][b] = a ∘ b
    mul: Vec<Vec<u8>>,
    /// adj[a] = a⁻¹ (equals a† modulo phase)
    adj: Vec<u8>,
    /// Shortest word over generators H, S producing each element (left to
    /// right application order: "HS" means apply S first, then H).
    words: Vec<String>,
}

fn build_tables() -> GroupTables {
    // Generators by their conjugation action.
    let h = Action {
        x_img: SignedPauli::new(Pauli::Z, false),
        z_img: SignedPauli::new(Pauli::X, false),
    };
    let s = Action {
        // S X S† = Y, S Z S† = Z
        x_img: SignedPauli::new(Pauli::Y, false),
        z_img: SignedPauli::new(Pauli::Z, false),
    };

    // BFS over words to enumerate the group and find shortest words.
    let mut found: Vec<(Action, String)> = vec![(Action::IDENTITY, String::new())];
    let mut frontier = vec![(Action::IDENTITY, String::new())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (a, w) in &frontier {
            for (g, gn) in [(h, "H"), (s, "S")] {
                let b = g.compose(a);
                if !found.iter().any(|(f, _)| *f == b) {
                    let word = format!("{gn}{w}");
                    found.push((b, word.clone()));
                    next.push((b, word));
                }
            }
        }
        frontier = next;
    }
    assert_eq!(found.len(), 24);

    // Canonical order: sort by signature so indices do not depend on BFS order.
    found.sort_by_key(|(a, _)| *a);
    let actions: Vec<Action> = found.iter().map(|(a, _)| *a).collect();
    let words: Vec<String> = found.into_iter().map(|(_, w)| w).collect();

    let idx_of = |a: &Action| -> u8 {
        actions.iter().position(|b| b == a).expect("closed group") as u8
    };
    let mul: Vec<Vec<u8>> = actions
        .iter()
        .map(|a| actions.iter().map(|b| idx_of(&a.compose(b))).collect())
        .collect();
    let mut adj = vec![0u8; 24];
    let id_idx = idx_of(&Action::IDENTITY);
    for (i, _) in actions.iter().enumerate() {
        let inv = (0..24)
            .find(|&j| mul[i][j] == id_idx)
            .expect("group has inverses");
        adj[i] = inv as u8;
    }
    GroupTables {
        actions,
        mul,
        adj,
        words,
    }
}

static TABLES: LazyLock<GroupTables> = LazyLock::new(build_tables);

/// One of the 24 single-qubit Cliffords, modulo global phase.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalClifford(u8);

fn by_action(x_img: SignedPauli, z_img: SignedPauli) -> LocalClifford {
    let a = Action { x_img, z_img };
    let i = TABLES
        .actions
        .iter()
        .position(|b| *b == a)
        .expect("valid clifford action");
    LocalClifford(i as u8)
}

static ELEMS: LazyLock<[LocalClifford; 11]> = LazyLock::new(|| {
    use Pauli::*;
    let sp = SignedPauli::new;
    [
        by_action(sp(X, false), sp(Z, false)), // I
        by_action(sp(X, false), sp(Z, true)),  // X
        by_action(sp(X, true), sp(Z, true)),   // Y
        by_action(sp(X, true), sp(Z, false)),  // Z
        by_action(sp(Z, false), sp(X, false)), // H
        by_action(sp(Y, false), sp(Z, false)), // S
        by_action(sp(Y, true), sp(Z, false)),  // S†
        // e^{+iπ/4 X}: X fixed, Z -> Y ; e^{-iπ/4 X}: Z -> -Y
        by_action(sp(X, false), sp(Y, false)), // sqrt(+iX)-type
        by_action(sp(X, false), sp(Y, true)),  // sqrt(-iX)-type
        // e^{+iπ/4 Z}: X -> -Y ; e^{-iπ/4 Z}: X -> Y  (both fix Z)
        by_action(sp(Y, true), sp(Z, false)),  // e^{+iπ/4 Z} == S up to phase
        by_action(sp(Y, false), sp(Z, false)), // e^{-iπ/4 Z} == S† up to phase
    ]
});

impl LocalClifford {
    pub const COUNT: usize = 24;

    pub const fn id(self) -> u8 {
        self.0
    }

    pub fn from_id(id: u8) -> Option<Self> {
        (id < 24).then_some(LocalClifford(id))
    }

    /// All 24 elements in canonical order.
    pub fn all() -> impl Iterator<Item = LocalClifford> {
        (0u8..24).map(LocalClifford)
    }

    pub fn identity() -> Self {
        ELEMS[0]
    }
    pub fn pauli_x() -> Self {
        ELEMS[1]
    }
    pub fn pauli_y() -> Self {
        ELEMS[2]
    }
    pub fn pauli_z() -> Self {
        ELEMS[3]
    }
    pub fn hadamard() -> Self {
        ELEMS[4]
    }
    pub fn phase_s() -> Self {
        ELEMS[5]
    }
    pub fn phase_sdg() -> Self {
        ELEMS[6]
    }
    /// e^{+iπ/4 X}
    pub fn sqrt_x_pos() -> Self {
        ELEMS[7]
    }
    /// e^{-iπ/4 X}
    pub fn sqrt_x_neg() -> Self {
        ELEMS[8]
    }
    /// e^{+iπ/4 Z}
    pub fn sqrt_z_pos() -> Self {
        ELEMS[9]
    }
    /// e^{-iπ/4 Z}
    pub fn sqrt_z_neg() -> Self {
        ELEMS[10]
    }

    pub fn from_pauli(p: Pauli) -> Self {
        match p {
            Pauli::X => Self::pauli_x(),
            Pauli::Y => Self::pauli_y(),
            Pauli::Z => Self::pauli_z(),
        }
    }

    /// Composition: `self.compose(other)` applies `other` first.
    #[must_use]
    pub fn compose(self, other: LocalClifford) -> LocalClifford {
        LocalClifford(TABLES.mul[self.0 as usize][other.0 as usize])
    }

    /// Inverse element (the adjoint, modulo phase).
    #[must_use]
    pub fn adjoint(self) -> LocalClifford {
        LocalClifford(TABLES.adj[self.0 as usize])
    }

    /// Image of a Pauli under conjugation `U P U†`.
    pub fn image(self, p: Pauli) -> SignedPauli {
        TABLES.actions[self.0 as usize].apply(SignedPauli::new(p, false))
    }

    /// `U† B U` for a measurement basis B: what measuring B on a qubit with
    /// this VOP looks like on the bare graph-state qubit.
    pub fn conjugate_basis(self, basis: Pauli) -> SignedPauli {
        self.adjoint().image(basis)
    }

    /// True for the four diagonal Cliffords (I, Z, S, S†): exactly the
    /// elements fixing Z with a plus sign. These commute with CZ.
    pub fn is_diagonal(self) -> bool {
        self.image(Pauli::Z) == SignedPauli::new(Pauli::Z, false)
    }

    pub fn is_identity(self) -> bool {
        self == Self::identity()
    }

    /// True if this element is I or Z (the alphabet the protocol layer emits).
    pub fn is_i_or_z(self) -> bool {
        self == Self::identity() || self == Self::pauli_z()
    }

    /// Short deterministic name: I/X/Y/Z/H/S/SDG for the common elements,
    /// otherwise the shortest generator word (apply right-to-left).
    pub fn name(self) -> String {
        if self == Self::identity() {
            "I".into()
        } else if self == Self::pauli_x() {
            "X".into()
        } else if self == Self::pauli_y() {
            "Y".into()
        } else if self == Self::pauli_z() {
            "Z".into()
        } else if self == Self::hadamard() {
            "H".into()
        } else if self == Self::phase_s() {
            "S".into()
        } else if self == Self::phase_sdg() {
            "SDG".into()
        } else {
            TABLES.words[self.0 as usize].clone()
        }
    }

    /// The generator word over H and S (empty for identity); leftmost gate
    /// applied last. Used by the dense oracle to build matrices.
    pub fn word(self) -> &'static str {
        &TABLES.words[self.0 as usize]
    }
}

impl fmt::Debug for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalClifford({})", self.name())
    }
}

impl fmt::Display for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}
