//! Measurement patterns for gate cells and the Pauli-frame bookkeeping that
//! goes with them.
//!
//! The frame is tracked per path: bits `x[j]`, `z[j]` mean the bond state of
//! the wires is `Π_j X_j^{x[j]} Z_j^{z[j]}` applied to the type-I encoding of
//! the ideal logical state. The per-wire [`PauliFrame`] view follows from it:
//! `v = x[u]`, `r = z[u] ⊕ z[l]`, and the encoding is type II iff
//! `x[u] ≠ x[l]`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::lattice::Role;
use crate::oracle::{MeasurementBasis, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Z,
    X,
    ZRot,
    XRot,
}

impl Family {
    pub fn basis(self, theta: f64) -> MeasurementBasis {
        match self {
            Family::Z => MeasurementBasis::Z,
            Family::X => MeasurementBasis::X,
            Family::ZRot => MeasurementBasis::ZRot(theta),
            Family::XRot => MeasurementBasis::XRot(theta),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::Z => "Z",
            Family::X => "X",
            Family::ZRot => "ZRot",
            Family::XRot => "XRot",
        }
    }
}

/// A path relative to the wire a role belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathRef {
    Upper,
    Lower,
    /// Upper path of the next wire down.
    NextUpper,
}

impl PathRef {
    pub fn resolve(self, wire: usize) -> usize {
        match self {
            PathRef::Upper => 2 * wire,
            PathRef::Lower => 2 * wire + 1,
            PathRef::NextUpper => 2 * wire + 2,
        }
    }
}

/// How the measured angle depends on the frame at measurement time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum RoleAngleRule {
    Fixed,
    /// `θ' = -θ` when the wire carries a logical X byproduct.
    NegateOnV,
    /// `θ' = -θ` when the wire carries a logical Z byproduct.
    NegateOnR,
}

/// Frame change caused by one measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "update")]
pub enum FrameUpdate {
    /// `z[path] ^= μ`.
    Z { path: PathRef },
    /// `x[path] ^= μ`.
    X { path: PathRef },
    /// `z[path] ^= μ(role)` for an earlier role of the same cell.
    ZFrom { path: PathRef, role: Role },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoleBasis {
    pub role: Role,
    /// 0 for the pattern's own wire, 1 for the wire below (CZ only).
    pub wire_offset: usize,
    pub family: Family,
    pub theta: f64,
    pub angle_rule: RoleAngleRule,
    pub updates: Vec<FrameUpdate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "theta")]
pub enum PatternKind {
    PathStep,
    RotZ(f64),
    RotX(f64),
    CzCouple,
    Init,
    Readout,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GatePattern {
    pub kind: PatternKind,
    pub assignments: Vec<RoleBasis>,
    /// CZ between role `f` of the upper wire and role `c` of the lower one.
    pub couple: Option<(Role, Role)>,
}

fn rb(role: Role, family: Family, updates: Vec<FrameUpdate>) -> RoleBasis {
    RoleBasis {
        role,
        wire_offset: 0,
        family,
        theta: 0.0,
        angle_rule: RoleAngleRule::Fixed,
        updates,
    }
}

fn z_on(path: PathRef) -> Vec<FrameUpdate> {
    vec![FrameUpdate::Z { path }]
}

fn x_on_wire() -> Vec<FrameUpdate> {
    vec![
        FrameUpdate::X { path: PathRef::Upper },
        FrameUpdate::X { path: PathRef::Lower },
    ]
}

/// Column `2t + 1` of every gate cell: the rung qubits and the path legs.
fn first_half() -> Vec<RoleBasis> {
    vec![
        // Measured after `d` of the wire above, so its outcome is fixed.
        rb(Role::A, Family::Z, vec![]),
        rb(Role::B, Family::X, z_on(PathRef::Upper)),
        rb(Role::C, Family::X, z_on(PathRef::Upper)),
        rb(
            Role::D,
            Family::Z,
            vec![
                FrameUpdate::X { path: PathRef::Lower },
                FrameUpdate::X { path: PathRef::NextUpper },
            ],
        ),
        rb(Role::E, Family::X, z_on(PathRef::Lower)),
        rb(Role::F, Family::X, z_on(PathRef::Lower)),
    ]
}

fn identity_second_half() -> Vec<RoleBasis> {
    vec![
        rb(Role::H, Family::X, z_on(PathRef::Upper)),
        rb(Role::I, Family::X, z_on(PathRef::Upper)),
        rb(Role::K, Family::X, z_on(PathRef::Lower)),
        rb(Role::L, Family::X, z_on(PathRef::Lower)),
        rb(Role::G, Family::Z, x_on_wire()),
        rb(Role::GPrime, Family::Z, vec![]),
    ]
}

/// Identity step: `Z` on the rungs, `X` on the path legs.
pub fn path_step() -> GatePattern {
    GatePattern {
        kind: PatternKind::PathStep,
        assignments: first_half().into_iter().chain(identity_second_half()).collect(),
        couple: None,
    }
}

/// Logical `e^{-iZθ/2}`: role `h` measured in the rotated Z basis.
pub fn rot_z(theta: f64) -> GatePattern {
    let mut p = path_step();
    p.kind = PatternKind::RotZ(theta);
    let h = p.role_mut(Role::H, 0);
    h.family = Family::ZRot;
    h.theta = theta;
    h.angle_rule = RoleAngleRule::NegateOnV;
    p
}

/// Logical `e^{-iXθ/2}`: role `g'` in `X` first, then `g` in the rotated X
/// basis.
pub fn rot_x(theta: f64) -> GatePattern {
    let mut p = path_step();
    p.kind = PatternKind::RotX(theta);
    let gp = p.role_mut(Role::GPrime, 0);
    gp.family = Family::X;
    gp.updates = z_on(PathRef::Upper);
    let g = p.role_mut(Role::G, 0);
    g.family = Family::XRot;
    g.theta = theta;
    g.angle_rule = RoleAngleRule::NegateOnR;
    g.updates = vec![
        FrameUpdate::X { path: PathRef::Upper },
        FrameUpdate::X { path: PathRef::Lower },
        FrameUpdate::ZFrom {
            path: PathRef::Upper,
            role: Role::GPrime,
        },
    ];
    p
}

/// Logical CZ between a wire and the one below: identity steps on both plus
/// a physical CZ between `f` of the upper wire and `c` of the lower wire.
pub fn cz_couple() -> GatePattern {
    let upper = path_step().assignments;
    let lower = path_step().assignments.into_iter().map(|mut r| {
        r.wire_offset = 1;
        r
    });
    GatePattern {
        kind: PatternKind::CzCouple,
        assignments: upper.into_iter().chain(lower).collect(),
        couple: Some((Role::F, Role::C)),
    }
}

/// Left end of a wire: the wire rung sets both bonds to `μ_g`.
pub fn init_leg() -> GatePattern {
    GatePattern {
        kind: PatternKind::Init,
        assignments: vec![
            rb(Role::G, Family::Z, x_on_wire()),
            rb(Role::GPrime, Family::Z, vec![]),
            rb(Role::I, Family::X, z_on(PathRef::Upper)),
            rb(Role::L, Family::X, z_on(PathRef::Lower)),
        ],
        couple: None,
    }
}

/// Terminal cell: a path step on the first column, then `Z` on every
/// remaining qubit. `h` and `k` read the upper and lower bonds.
pub fn readout() -> GatePattern {
    let mut assignments = first_half();
    assignments.extend([
        rb(Role::H, Family::Z, vec![]),
        rb(Role::K, Family::Z, vec![]),
        rb(Role::G, Family::Z, vec![]),
        rb(Role::GPrime, Family::Z, vec![]),
    ]);
    GatePattern {
        kind: PatternKind::Readout,
        assignments,
        couple: None,
    }
}

impl GatePattern {
    pub fn role(&self, role: Role, wire_offset: usize) -> Option<&RoleBasis> {
        self.assignments
            .iter()
            .find(|r| r.role == role && r.wire_offset == wire_offset)
    }

    fn role_mut(&mut self, role: Role, wire_offset: usize) -> &mut RoleBasis {
        self.assignments
            .iter_mut()
            .find(|r| r.role == role && r.wire_offset == wire_offset)
            .expect("pattern role")
    }

    /// Order of the roles on the second column of a cell. The rung qubit
    /// whose outcome is random goes first.
    pub fn second_column_order(&self) -> [Role; 6] {
        match self.kind {
            PatternKind::RotX(_) => [Role::H, Role::K, Role::GPrime, Role::G, Role::I, Role::L],
            _ => [Role::H, Role::K, Role::G, Role::GPrime, Role::I, Role::L],
        }
    }

    pub fn wire_span(&self) -> usize {
        self.assignments.iter().map(|r| r.wire_offset).max().unwrap_or(0) + 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("pattern serializes")
    }
}

/// Logical view of the frame of one wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PauliFrame {
    pub v: u8,
    pub r: u8,
    pub encoding: Encoding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Encoding {
    I,
    II,
}

impl PauliFrame {
    pub const IDENTITY: PauliFrame = PauliFrame {
        v: 0,
        r: 0,
        encoding: Encoding::I,
    };

    /// `X^v Z^r` on the logical qubit.
    pub fn byproduct(&self) -> DMatrix<C64> {
        let mut m = DMatrix::identity(2, 2);
        if self.r == 1 {
            m = pauli_z() * m;
        }
        if self.v == 1 {
            m = pauli_x() * m;
        }
        m
    }

    /// Composition: apply `self`, then `later`. The product is tracked up to
    /// sign, so the operation is commutative on the bits.
    pub fn then(&self, later: &PauliFrame) -> PauliFrame {
        PauliFrame {
            v: self.v ^ later.v,
            r: self.r ^ later.r,
            encoding: if self.encoding == later.encoding {
                Encoding::I
            } else {
                Encoding::II
            },
        }
    }
}

/// Per-path Pauli frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BondFrame {
    pub x: Vec<u8>,
    pub z: Vec<u8>,
}

impl BondFrame {
    pub fn new(paths: usize) -> Self {
        Self {
            x: vec![0; paths],
            z: vec![0; paths],
        }
    }

    pub fn paths(&self) -> usize {
        self.x.len()
    }

    pub fn wire(&self, wire: usize) -> PauliFrame {
        let (u, l) = (2 * wire, 2 * wire + 1);
        PauliFrame {
            v: self.x[u],
            r: self.z[u] ^ self.z[l],
            encoding: if self.x[u] == self.x[l] {
                Encoding::I
            } else {
                Encoding::II
            },
        }
    }

    pub fn wires(&self) -> Vec<PauliFrame> {
        (0..self.paths() / 2).map(|w| self.wire(w)).collect()
    }

    /// Conjugation through a CZ between the bonds of two paths.
    pub fn couple(&mut self, a: usize, b: usize) {
        self.z[a] ^= self.x[b];
        self.z[b] ^= self.x[a];
    }

    /// Angle actually measured for `theta` under `rule` on `wire`.
    pub fn adapt(&self, rule: RoleAngleRule, wire: usize, theta: f64) -> f64 {
        let f = self.wire(wire);
        let negate = match rule {
            RoleAngleRule::Fixed => false,
            RoleAngleRule::NegateOnV => f.v == 1,
            RoleAngleRule::NegateOnR => f.r == 1,
        };
        if negate {
            -theta
        } else {
            theta
        }
    }

    /// Operator `Π X^{x} Z^{z}` on the bonds of the listed paths, first path
    /// most significant.
    pub fn operator(&self, paths: &[usize]) -> DMatrix<C64> {
        let mut m = DMatrix::identity(1, 1);
        for &p in paths {
            let mut single = DMatrix::identity(2, 2);
            if self.z[p] == 1 {
                single = pauli_z() * single;
            }
            if self.x[p] == 1 {
                single = pauli_x() * single;
            }
            m = m.kronecker(&single);
        }
        m
    }
}

pub fn pauli_x() -> DMatrix<C64> {
    let (o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[o, i, i, o])
}

pub fn pauli_z() -> DMatrix<C64> {
    let (o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[i, o, o, -i])
}

/// Isometry from `w` logical qubits to their type-I bond encoding.
pub fn type_one_encoder(wires: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1 << (2 * wires), 1 << wires, C64::new(0.0, 0.0));
    for logical in 0..(1usize << wires) {
        let mut bonds = 0usize;
        for w in 0..wires {
            let bit = logical >> (wires - 1 - w) & 1;
            bonds = (bonds << 2) | (bit * 3);
        }
        m[(bonds, logical)] = C64::new(1.0, 0.0);
    }
    m
}
