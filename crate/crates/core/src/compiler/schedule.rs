//! Placement of circuit gates onto gate cells and emission of the ordered
//! measurement schedule.
//!
//! Wires occupy the even plaquette rows of the patch, so a patch for `W`
//! wires has `2W - 1` rows. Each wire runs through `cols` gate cells: an
//! initialization column at `x = 0`, cells `0..cols - 1` for gates, and the
//! last cell for readout.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;

use crate::compiler::circuit::{CircuitIR, Gate};
use crate::error::{Error, Result};
use crate::lattice::{role_site, LatticePatch, Role, SiteId, SiteRole};
use crate::patterns::{self, Family, FrameUpdate, GatePattern, PatternKind, RoleAngleRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Mode {
    /// Physical CZ applied during execution, where a logical CZ is placed.
    Live,
    /// CZ pre-applied to the resource on every adjacent wire pair in every
    /// `period`-th gate cell. Execution uses single-qubit measurements only.
    Precoupled { period: usize },
}

impl Mode {
    pub const DEFAULT_PERIOD: usize = 2;

    pub fn precoupled() -> Self {
        Mode::Precoupled {
            period: Self::DEFAULT_PERIOD,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mode::Live => "live",
            Mode::Precoupled { .. } => "precoupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "pauli", content = "path")]
pub enum FrameBit {
    X(usize),
    Z(usize),
}

/// Adaptive angle rule: the angle is negated when the XOR of the listed
/// frame bits is 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "bits")]
pub enum AngleRule {
    Fixed,
    NegateIf(Vec<FrameBit>),
}

/// `bit ^= outcome(source)` once the measurement is done.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flip {
    pub bit: FrameBit,
    pub source: SiteId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureOp {
    pub site: SiteId,
    pub wire: usize,
    pub role: Role,
    pub cell: usize,
    pub basis: Family,
    pub theta: f64,
    pub angle_rule: AngleRule,
    pub flips: Vec<Flip>,
}

/// CZ between two bonds. `physical` is false when the CZ is part of the
/// precoupled resource; the frame is updated either way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleOp {
    pub sites: [SiteId; 2],
    pub paths: [usize; 2],
    pub physical: bool,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum Op {
    Measure(MeasureOp),
    Couple(CoupleOp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Readout {
    pub wire: usize,
    pub upper_site: SiteId,
    pub lower_site: SiteId,
    pub upper_path: usize,
    pub lower_path: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellInfo {
    pub id: usize,
    pub wire: usize,
    /// Gate-cell index along the wire; `None` for the initialization column.
    pub step: Option<usize>,
    pub pattern: String,
    /// Index of the circuit gate this cell implements, if any.
    pub gate: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementSchedule {
    pub mode: Mode,
    pub rows: usize,
    pub cols: usize,
    pub wire_count: usize,
    pub circuit_wires: usize,
    pub prologue: Vec<Op>,
    pub entries: Vec<Op>,
    pub epilogue: Vec<Op>,
    pub decode: Vec<Readout>,
    pub cells: Vec<CellInfo>,
    /// CZ pairs built into the resource state (precoupled mode).
    pub precoupling: Vec<[SiteId; 2]>,
    /// Wire pairs whose last precoupled CZ has no partner to cancel it.
    pub uncancelled: Vec<usize>,
}

impl MeasurementSchedule {
    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.prologue.iter().chain(&self.entries).chain(&self.epilogue)
    }

    pub fn measure_ops(&self) -> impl Iterator<Item = &MeasureOp> {
        self.ops().filter_map(|op| match op {
            Op::Measure(m) => Some(m),
            Op::Couple(_) => None,
        })
    }

    /// Two-qubit operations executed at run time.
    pub fn physical_two_qubit_ops(&self) -> usize {
        self.ops()
            .filter(|op| matches!(op, Op::Couple(c) if c.physical))
            .count()
    }

    pub fn path_count(&self) -> usize {
        2 * self.wire_count
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("schedule serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Pattern(GatePattern, Option<usize>),
}

/// Gate-cell assignment before emission.
#[derive(Debug, Clone)]
struct Layout {
    /// `grid[t][w]`.
    grid: Vec<Vec<Slot>>,
    /// `(step, upper wire, physical, gate index)`.
    couples: Vec<(usize, usize, bool, Option<usize>)>,
    uncancelled: Vec<usize>,
}

fn identity_slot() -> Slot {
    Slot::Pattern(patterns::path_step(), None)
}

fn single_pattern(g: &Gate) -> GatePattern {
    match *g {
        Gate::RotZ { angle, .. } => patterns::rot_z(angle.radians()),
        Gate::RotX { angle, .. } => patterns::rot_x(angle.radians()),
        Gate::Identity { .. } => patterns::path_step(),
        Gate::Cz { .. } => unreachable!("cz is not a single-wire pattern"),
    }
}

/// Gate steps needed, with no capacity limit.
fn layout(ir: &CircuitIR, wires: usize, mode: Mode, limit: Option<usize>) -> Result<Layout> {
    match mode {
        Mode::Live => layout_live(ir, wires, limit),
        Mode::Precoupled { period } => layout_precoupled(ir, wires, period, limit),
    }
}

fn capacity(steps: usize, limit: usize) -> Error {
    Error::Capacity(format!(
        "circuit needs {steps} gate cell(s) per wire plus readout, patch offers {limit}"
    ))
}

fn layout_live(ir: &CircuitIR, wires: usize, limit: Option<usize>) -> Result<Layout> {
    let mut grid: Vec<Vec<Slot>> = Vec::new();
    let mut pos = vec![0usize; wires];
    let mut couples = Vec::new();
    let put = |grid: &mut Vec<Vec<Slot>>, t: usize, w: usize, s: Slot| {
        while grid.len() <= t {
            grid.push(vec![identity_slot(); wires]);
        }
        grid[t][w] = s;
    };
    for (gi, g) in ir.gates.iter().enumerate() {
        match *g {
            Gate::Cz { a, b } => {
                let (a, b) = (a.min(b), a.max(b));
                let t = pos[a].max(pos[b]);
                put(&mut grid, t, a, Slot::Pattern(patterns::path_step(), Some(gi)));
                put(&mut grid, t, b, Slot::Pattern(patterns::path_step(), Some(gi)));
                couples.push((t, a, true, Some(gi)));
                pos[a] = t + 1;
                pos[b] = t + 1;
            }
            _ => {
                let w = g.wires()[0];
                put(&mut grid, pos[w], w, Slot::Pattern(single_pattern(g), Some(gi)));
                pos[w] += 1;
            }
        }
    }
    if let Some(limit) = limit {
        if grid.len() > limit {
            return Err(capacity(grid.len(), limit + 1));
        }
        while grid.len() < limit {
            grid.push(vec![identity_slot(); wires]);
        }
    }
    Ok(Layout {
        grid,
        couples,
        uncancelled: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Item {
    Single(usize),
    Cz(usize, usize),
}

fn layout_precoupled(ir: &CircuitIR, wires: usize, period: usize, limit: Option<usize>) -> Result<Layout> {
    if period < 2 {
        return Err(Error::InvalidArgument(format!(
            "precoupling period must be at least 2, got {period}"
        )));
    }
    let mut queues: Vec<VecDeque<Item>> = vec![VecDeque::new(); wires];
    for (gi, g) in ir.gates.iter().enumerate() {
        match *g {
            Gate::Cz { a, b } => {
                let upper = a.min(b);
                queues[upper].push_back(Item::Cz(gi, upper));
                queues[upper + 1].push_back(Item::Cz(gi, upper));
            }
            _ => queues[g.wires()[0]].push_back(Item::Single(gi)),
        }
    }
    let pairs = wires.saturating_sub(1);
    let mut pending = vec![false; pairs];
    let mut grid = Vec::new();
    let mut couples = Vec::new();
    let hard_cap = 64 + 4 * period * (ir.gates.len() + 1);
    let mut t = 0;
    loop {
        let done = queues.iter().all(|q| q.is_empty()) && !pending.iter().any(|&p| p);
        let reached_limit = limit.is_some_and(|l| t >= l);
        if (limit.is_none() && done) || reached_limit {
            break;
        }
        if t > hard_cap {
            return Err(Error::Capacity("precoupled layout does not terminate".into()));
        }
        let mut row = vec![identity_slot(); wires];
        if pairs > 0 && t % period == period - 1 {
            for w in 0..pairs {
                let mut gate = None;
                if pending[w] {
                    pending[w] = false;
                } else if let (Some(&Item::Cz(gi, u)), Some(&Item::Cz(gj, _))) =
                    (queues[w].front(), queues[w + 1].front())
                {
                    if gi == gj && u == w {
                        queues[w].pop_front();
                        queues[w + 1].pop_front();
                        gate = Some(gi);
                        row[w] = Slot::Pattern(patterns::path_step(), Some(gi));
                        row[w + 1] = Slot::Pattern(patterns::path_step(), Some(gi));
                    } else {
                        pending[w] = true;
                    }
                } else {
                    pending[w] = true;
                }
                couples.push((t, w, false, gate));
            }
        } else {
            for w in 0..wires {
                let locked = (w > 0 && pending[w - 1]) || (w < pairs && pending[w]);
                if locked {
                    continue;
                }
                if let Some(&Item::Single(gi)) = queues[w].front() {
                    queues[w].pop_front();
                    row[w] = Slot::Pattern(single_pattern(&ir.gates[gi]), Some(gi));
                }
            }
        }
        grid.push(row);
        t += 1;
    }
    if limit.is_some() && queues.iter().any(|q| !q.is_empty()) {
        let needed = layout_precoupled(ir, wires, period, None)?.grid.len();
        return Err(capacity(needed, limit.unwrap_or(0) + 1));
    }
    let uncancelled = (0..pairs).filter(|&w| pending[w]).collect();
    Ok(Layout {
        grid,
        couples,
        uncancelled,
    })
}

/// Smallest `(rows, cols)` patch that runs `ir` in `mode`. In precoupled mode
/// the patch is long enough for every unused CZ to be cancelled.
pub fn minimal_patch(ir: &CircuitIR, mode: Mode) -> Result<(usize, usize)> {
    let steps = layout(ir, ir.wire_count, mode, None)?.grid.len();
    Ok((2 * ir.wire_count - 1, steps + 1))
}

fn cell_roles(patch: &LatticePatch, wire: usize, step: usize) -> Vec<SiteRole> {
    patch.wire_cell(wire, step).expect("cell inside the patch")
}

fn resolve_rule(rule: RoleAngleRule, wire: usize) -> AngleRule {
    let (u, l) = (2 * wire, 2 * wire + 1);
    match rule {
        RoleAngleRule::Fixed => AngleRule::Fixed,
        RoleAngleRule::NegateOnV => AngleRule::NegateIf(vec![FrameBit::X(u)]),
        RoleAngleRule::NegateOnR => AngleRule::NegateIf(vec![FrameBit::Z(u), FrameBit::Z(l)]),
    }
}

/// Resolves one role of a pattern to a measurement on `cell`.
pub fn measure_op(
    pattern: &GatePattern,
    role: Role,
    wire: usize,
    roles: &[SiteRole],
    cell: usize,
    path_count: usize,
) -> Option<MeasureOp> {
    let rb = pattern.role(role, 0)?;
    let site = role_site(roles, role)?;
    let flips = rb
        .updates
        .iter()
        .filter_map(|u| {
            let (bit, source) = match *u {
                FrameUpdate::Z { path } => (FrameBit::Z(path.resolve(wire)), site),
                FrameUpdate::X { path } => (FrameBit::X(path.resolve(wire)), site),
                FrameUpdate::ZFrom { path, role } => {
                    (FrameBit::Z(path.resolve(wire)), role_site(roles, role)?)
                }
            };
            let path = match bit {
                FrameBit::X(p) | FrameBit::Z(p) => p,
            };
            (path < path_count).then_some(Flip { bit, source })
        })
        .collect();
    Some(MeasureOp {
        site,
        wire,
        role,
        cell,
        basis: rb.family,
        theta: rb.theta,
        angle_rule: resolve_rule(rb.angle_rule, wire),
        flips,
    })
}

/// Ops for gate step `step` on every wire, column by column.
///
/// Column `2t + 1`: the coupling-rung qubits (`d` of each wire, then `a`
/// of the wire below), the CZ couplings, then `b, c, e, f`. Column `2t + 2`:
/// per wire `h, k`, the wire rung and `i, l`.
pub fn step_ops(
    patch: &LatticePatch,
    step: usize,
    patterns: &[(GatePattern, usize)],
    couples: &[(usize, bool, usize)],
) -> Vec<Op> {
    let paths = 2 * patch.wire_count();
    let cells: Vec<Vec<SiteRole>> = (0..patterns.len()).map(|w| cell_roles(patch, w, step)).collect();
    let mut ops = Vec::new();
    let push = |ops: &mut Vec<Op>, w: usize, role: Role| {
        let (pattern, cell) = &patterns[w];
        if let Some(op) = measure_op(pattern, role, w, &cells[w], *cell, paths) {
            ops.push(Op::Measure(op));
        }
    };
    for w in 0..patterns.len() {
        push(&mut ops, w, Role::D);
    }
    for w in 0..patterns.len() {
        push(&mut ops, w, Role::A);
    }
    for &(upper, physical, cell) in couples {
        let f = role_site(&cells[upper], Role::F).expect("upper wire has f");
        let c = role_site(&cells[upper + 1], Role::C).expect("lower wire has c");
        ops.push(Op::Couple(CoupleOp {
            sites: [f, c],
            paths: [2 * upper + 1, 2 * upper + 2],
            physical,
            cell,
        }));
    }
    for w in 0..patterns.len() {
        for role in [Role::B, Role::C, Role::E, Role::F] {
            push(&mut ops, w, role);
        }
    }
    for w in 0..patterns.len() {
        for role in patterns[w].0.second_column_order() {
            push(&mut ops, w, role);
        }
    }
    ops
}

/// Initialization column of every wire.
pub fn init_ops(patch: &LatticePatch, cells: &[usize]) -> Vec<Op> {
    let paths = 2 * patch.wire_count();
    let init = patterns::init_leg();
    let mut ops = Vec::new();
    for (w, &cell) in cells.iter().enumerate() {
        let roles = patch.init_cell(w).expect("wire inside the patch");
        for role in [Role::G, Role::GPrime, Role::I, Role::L] {
            if let Some(op) = measure_op(&init, role, w, &roles, cell, paths) {
                ops.push(Op::Measure(op));
            }
        }
    }
    ops
}

/// Compiles `ir` onto `patch`.
pub fn compile(ir: &CircuitIR, patch: &LatticePatch, mode: Mode) -> Result<MeasurementSchedule> {
    if !patch.is_hexagonal() {
        return Err(Error::InvalidArgument("compilation needs a hexagonal patch".into()));
    }
    if patch.rows() % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "wire patches have an odd number of rows, got {}",
            patch.rows()
        )));
    }
    let wires = patch.wire_count();
    if wires < ir.wire_count {
        return Err(Error::Capacity(format!(
            "circuit has {} wire(s), a {}x{} patch holds {wires}",
            ir.wire_count,
            patch.rows(),
            patch.cols()
        )));
    }
    let gate_steps = patch.cols() - 1;
    let lay = layout(ir, wires, mode, Some(gate_steps))?;

    let mut cells = Vec::new();
    let mut new_cell = |wire: usize, step: Option<usize>, pattern: &str, gate: Option<usize>| {
        let id = cells.len();
        cells.push(CellInfo {
            id,
            wire,
            step,
            pattern: pattern.to_string(),
            gate,
        });
        id
    };

    let init_cells: Vec<usize> = (0..wires).map(|w| new_cell(w, None, "init", None)).collect();
    let prologue = init_ops(patch, &init_cells);

    let mut entries = Vec::new();
    let mut precoupling = Vec::new();
    for (t, row) in lay.grid.iter().enumerate() {
        let mut pats = Vec::with_capacity(wires);
        for (w, Slot::Pattern(p, gate)) in row.iter().enumerate() {
            let coupled = lay.couples.iter().any(|c| c.0 == t && (c.1 == w || c.1 + 1 == w) && c.3.is_some());
            let label = match p.kind {
                PatternKind::RotZ(_) => "rot_z",
                PatternKind::RotX(_) => "rot_x",
                _ if coupled => "cz_couple",
                _ => "path_step",
            };
            let id = new_cell(w, Some(t), label, *gate);
            pats.push((p.clone(), id));
        }
        let couples: Vec<(usize, bool, usize)> = lay
            .couples
            .iter()
            .filter(|c| c.0 == t)
            .map(|&(_, upper, physical, _)| (upper, physical, pats[upper].1))
            .collect();
        let ops = step_ops(patch, t, &pats, &couples);
        for op in &ops {
            if let Op::Couple(c) = op {
                if !c.physical {
                    precoupling.push(c.sites);
                }
            }
        }
        entries.extend(ops);
    }

    let last = patch.cols() - 1;
    let readout = patterns::readout();
    let pats: Vec<(GatePattern, usize)> = (0..wires)
        .map(|w| (readout.clone(), new_cell(w, Some(last), "readout", None)))
        .collect();
    let epilogue = step_ops(patch, last, &pats, &[]);
    let decode = (0..wires)
        .map(|w| {
            let roles = cell_roles(patch, w, last);
            Readout {
                wire: w,
                upper_site: role_site(&roles, Role::H).expect("h"),
                lower_site: role_site(&roles, Role::K).expect("k"),
                upper_path: 2 * w,
                lower_path: 2 * w + 1,
            }
        })
        .collect();

    Ok(MeasurementSchedule {
        mode,
        rows: patch.rows(),
        cols: patch.cols(),
        wire_count: wires,
        circuit_wires: ir.wire_count,
        prologue,
        entries,
        epilogue,
        decode,
        cells,
        precoupling,
        uncancelled: lay.uncancelled,
    })
}

fn fmt_bit(b: &FrameBit) -> String {
    match b {
        FrameBit::X(p) => format!("X{p}"),
        FrameBit::Z(p) => format!("Z{p}"),
    }
}

fn fmt_op(out: &mut String, k: usize, op: &Op) {
    match op {
        Op::Measure(m) => {
            let basis = match m.basis {
                Family::ZRot | Family::XRot => format!("{}({:.6})", m.basis.label(), m.theta),
                _ => m.basis.label().to_string(),
            };
            let rule = match &m.angle_rule {
                AngleRule::Fixed => String::new(),
                AngleRule::NegateIf(bits) => format!(
                    " negate-if[{}]",
                    bits.iter().map(fmt_bit).collect::<Vec<_>>().join("^")
                ),
            };
            let flips: Vec<String> = m
                .flips
                .iter()
                .map(|f| format!("{}^=m{}", fmt_bit(&f.bit), f.source))
                .collect();
            let _ = write!(
                out,
                "{k:5}  measure site {:4} w{} {:2} cell {:3} {basis}{rule}",
                m.site, m.wire, m.role.label(), m.cell
            );
            if !flips.is_empty() {
                let _ = write!(out, "  {}", flips.join(" "));
            }
            out.push('\n');
        }
        Op::Couple(c) => {
            let _ = writeln!(
                out,
                "{k:5}  cz      sites {} {} paths {} {} cell {} {}",
                c.sites[0],
                c.sites[1],
                c.paths[0],
                c.paths[1],
                c.cell,
                if c.physical { "physical" } else { "precoupled" }
            );
        }
    }
}

/// Human-readable listing, one op per line.
pub fn print_schedule(s: &MeasurementSchedule) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "schedule: {} mode, {}x{} patch, {} wire(s), {} measurement(s), {} physical CZ",
        s.mode.label(),
        s.rows,
        s.cols,
        s.wire_count,
        s.measure_ops().count(),
        s.physical_two_qubit_ops()
    );
    if !s.precoupling.is_empty() {
        let _ = writeln!(out, "precoupling: {} CZ pair(s) in the resource", s.precoupling.len());
    }
    let mut k = 0;
    for (title, ops) in [("prologue", &s.prologue), ("entries", &s.entries), ("epilogue", &s.epilogue)] {
        let _ = writeln!(out, "{title}:");
        for op in ops.iter() {
            fmt_op(&mut out, k, op);
            k += 1;
        }
    }
    let _ = writeln!(out, "decode:");
    for r in &s.decode {
        let _ = writeln!(
            out,
            "  wire {}: m{} ^ X{} (check m{} ^ X{})",
            r.wire, r.upper_site, r.upper_path, r.lower_site, r.lower_path
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::circuit::parse_circuit;
    use crate::lattice::build_patch;
    use std::collections::HashSet;

    fn schedule(src: &str, mode: Mode) -> MeasurementSchedule {
        let ir = parse_circuit(src).unwrap();
        let (r, c) = minimal_patch(&ir, mode).unwrap();
        compile(&ir, &build_patch(r, c).unwrap(), mode).unwrap()
    }

    #[test]
    fn every_site_measured_once() {
        for mode in [Mode::Live, Mode::precoupled()] {
            let s = schedule("wires 2\nrz 0 0.3\ncz 0 1\nrx 1 0.2\n", mode);
            let patch = build_patch(s.rows, s.cols).unwrap();
            let sites: Vec<_> = s.measure_ops().map(|m| m.site).collect();
            let unique: HashSet<_> = sites.iter().collect();
            assert_eq!(sites.len(), unique.len());
            assert_eq!(sites.len(), patch.qubit_count());
        }
    }

    #[test]
    fn flip_sources_come_first() {
        let s = schedule("wires 2\nrx 0 0.3\ncz 0 1\nrx 1 0.2\nrz 0 1\n", Mode::Live);
        let mut seen = HashSet::new();
        for m in s.measure_ops() {
            seen.insert(m.site);
            for f in &m.flips {
                assert!(seen.contains(&f.source));
            }
        }
    }

    #[test]
    fn single_rotation_has_one_rotated_entry() {
        let s = schedule("wires 1\nrz 0 0.7\n", Mode::Live);
        let rot: Vec<_> = s.measure_ops().filter(|m| m.basis == Family::ZRot).collect();
        assert_eq!(rot.len(), 1);
        assert_eq!(rot[0].theta, 0.7);
        assert_eq!(s.measure_ops().filter(|m| m.basis == Family::XRot).count(), 0);
    }

    #[test]
    fn two_qubit_op_counts() {
        let live = schedule("wires 2\ncz 0 1\nrz 1 0.1\ncz 1 0\n", Mode::Live);
        assert_eq!(live.physical_two_qubit_ops(), 2);
        let pre = schedule("wires 2\ncz 0 1\nrz 1 0.1\ncz 1 0\n", Mode::precoupled());
        assert_eq!(pre.physical_two_qubit_ops(), 0);
        assert!(!pre.precoupling.is_empty());
        assert!(pre.uncancelled.is_empty());
    }

    #[test]
    fn capacity_error() {
        let ir = parse_circuit("wires 1\nrz 0 1\nrz 0 1\nrz 0 1\n").unwrap();
        let patch = build_patch(1, 3).unwrap();
        assert!(matches!(compile(&ir, &patch, Mode::Live), Err(Error::Capacity(_))));
        let patch = build_patch(1, 4).unwrap();
        assert!(compile(&ir, &patch, Mode::Live).is_ok());
        let two = parse_circuit("wires 2\n").unwrap();
        assert!(matches!(compile(&two, &patch, Mode::Live), Err(Error::Capacity(_))));
    }

    #[test]
    fn deterministic_output() {
        let a = schedule("wires 2\nrz 0 0.3\ncz 0 1\n", Mode::precoupled());
        let b = schedule("wires 2\nrz 0 0.3\ncz 0 1\n", Mode::precoupled());
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
        assert_eq!(print_schedule(&a), print_schedule(&b));
    }

    #[test]
    fn precoupled_cancels_unwanted_cz() {
        // The rotation on wire 1 waits until the unwanted CZ is cancelled.
        let s = schedule("wires 2\nrx 1 0.4\nrx 1 0.5\n", Mode::precoupled());
        assert!(s.uncancelled.is_empty());
        assert_eq!(s.precoupling.len(), 2);
        assert_eq!(s.cols, 6);
        let ir = parse_circuit("wires 2\n").unwrap();
        let patch = build_patch(3, 3).unwrap();
        assert!(compile(&ir, &patch, Mode::Precoupled { period: 1 }).is_err());
    }
}
