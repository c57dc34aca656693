//! Running measurement schedules: exhaustive branch enumeration, seeded
//! sampling, comparison with an ideal circuit simulation, and certification
//! of single gate-cell patterns.
//!
//! Two engines execute a schedule. [`Engine::Sweep`] contracts the patch
//! column by column with [`CorrelationState`]; it handles any patch size the
//! bond table allows. [`Engine::Dense`] runs on the full state vector and is
//! limited to tiny patches; it exists as a cross-check.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compiler::{
    compile, init_ops, step_ops, AngleRule, CircuitIR, FrameBit, Gate, MeasureOp, MeasurementSchedule, Mode, Op,
};
use crate::error::{Error, Result};
use crate::lattice::{LatticePatch, Role, SiteId};
use crate::oracle::{MeasurementBasis, StateVector, C64, DEFAULT_QUBIT_CAP, MIN_BRANCH_PROBABILITY};
use crate::patterns::{self, BondFrame, GatePattern, PatternKind, PauliFrame};
use crate::resource::{apply_precoupling, ground_state_with_cap};
use crate::tensornet::{CorrelationState, Fragment, SweepPlan};

/// Default limit on live branches during an exhaustive run.
pub const DEFAULT_BRANCH_CAP: usize = 1 << 18;

/// Most measurements a dense exhaustive run will enumerate.
pub const DENSE_MEASUREMENT_CAP: usize = 24;

/// Largest total-variation distance accepted by [`verify_against_ideal`].
pub const TVD_TOLERANCE: f64 = 1e-10;

/// Largest `1 - fidelity` accepted by [`verify_pattern`].
pub const PATTERN_TOLERANCE: f64 = 1e-10;

/// Two branch tables count as the same state when their normalized overlap
/// is within this of 1.
const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Sweep,
    Dense,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub engine: Engine,
    /// Live branch limit (sweep) or qubit limit (dense).
    pub cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Sweep,
            cap: DEFAULT_BRANCH_CAP,
        }
    }
}

/// One measurement record, or a class of records that leave the patch in the
/// same state with the same frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRecord {
    /// Outcomes in schedule order, as a `0`/`1` string. For merged branches
    /// this is the lexicographically first member.
    pub outcomes: String,
    pub probability: f64,
    /// Logical frame of every wire after the last measurement.
    pub frame: Vec<PauliFrame>,
    /// Decoded bits of the circuit wires, wire 0 first.
    pub decoded: Vec<u8>,
    /// Number of outcome strings in the class.
    pub multiplicity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub mode: Mode,
    pub engine: Engine,
    pub circuit_wires: usize,
    pub measurements: usize,
    pub total_probability: f64,
    /// `distribution[i]`: probability that wire `w` reads bit `w` of `i`.
    pub distribution: Vec<f64>,
    pub branches: Vec<BranchRecord>,
}

impl RunResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run result serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleResult {
    pub mode: Mode,
    pub seed: u64,
    pub shots: usize,
    pub circuit_wires: usize,
    /// Counts keyed by decoded bit string, wire 0 first.
    pub counts: BTreeMap<String, usize>,
    pub distribution: Vec<f64>,
}

impl SampleResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sample result serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub circuit: String,
    pub mode: Mode,
    pub rows: usize,
    pub cols: usize,
    pub branches: usize,
    pub ideal: Vec<f64>,
    pub observed: Vec<f64>,
    pub tvd: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn bits_label(bits: &[u8]) -> String {
    bits.iter().map(|&b| char::from(b'0' + b)).collect()
}

fn bits_index(bits: &[u8]) -> usize {
    bits.iter().enumerate().map(|(w, &b)| (b as usize) << w).sum()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different spaces");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Schedule data shared by every branch: which outcomes must be remembered
/// and until when.
struct Program {
    ops: Vec<Op>,
    /// `release[k]`: remembered sites whose last use is op `k`.
    release: Vec<Vec<SiteId>>,
    remember: Vec<bool>,
    measurements: usize,
}

impl Program {
    fn new(schedule: &MeasurementSchedule, qubits: usize) -> Self {
        let ops: Vec<Op> = schedule.ops().cloned().collect();
        let mut last_use: HashMap<SiteId, usize> = HashMap::new();
        for (k, op) in ops.iter().enumerate() {
            if let Op::Measure(m) = op {
                for f in &m.flips {
                    if f.source != m.site {
                        last_use.insert(f.source, k);
                    }
                }
            }
        }
        let mut remember = vec![false; qubits];
        for &s in last_use.keys() {
            remember[s] = true;
        }
        for r in &schedule.decode {
            remember[r.upper_site] = true;
            remember[r.lower_site] = true;
            last_use.remove(&r.upper_site);
            last_use.remove(&r.lower_site);
        }
        let mut release = vec![Vec::new(); ops.len()];
        for (s, k) in last_use {
            release[k].push(s);
        }
        let measurements = ops.iter().filter(|op| matches!(op, Op::Measure(_))).count();
        Self {
            ops,
            release,
            remember,
            measurements,
        }
    }
}

fn frame_bit(frame: &BondFrame, bit: FrameBit) -> u8 {
    match bit {
        FrameBit::X(p) => frame.x[p],
        FrameBit::Z(p) => frame.z[p],
    }
}

fn toggle(frame: &mut BondFrame, bit: FrameBit, value: u8) {
    match bit {
        FrameBit::X(p) => frame.x[p] ^= value,
        FrameBit::Z(p) => frame.z[p] ^= value,
    }
}

/// Basis actually measured for `op` under the current frame.
pub fn adapted_basis(op: &MeasureOp, frame: &BondFrame) -> MeasurementBasis {
    let negate = match &op.angle_rule {
        AngleRule::Fixed => 0,
        AngleRule::NegateIf(bits) => bits.iter().fold(0, |acc, &b| acc ^ frame_bit(frame, b)),
    };
    op.basis.basis(if negate == 1 { -op.theta } else { op.theta })
}

fn lookup(memo: &[(SiteId, u8)], site: SiteId) -> u8 {
    match memo.binary_search_by_key(&site, |e| e.0) {
        Ok(k) => memo[k].1,
        Err(_) => panic!("outcome of site {site} was not kept"),
    }
}

/// Frame and remembered outcomes of one branch.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Tracker {
    frame: BondFrame,
    memo: Vec<(SiteId, u8)>,
}

impl Tracker {
    fn new(paths: usize) -> Self {
        Self {
            frame: BondFrame::new(paths),
            memo: Vec::new(),
        }
    }

    fn record(&mut self, program: &Program, k: usize, op: &MeasureOp, outcome: u8) {
        for f in &op.flips {
            let value = if f.source == op.site {
                outcome
            } else {
                lookup(&self.memo, f.source)
            };
            toggle(&mut self.frame, f.bit, value);
        }
        if program.remember[op.site] {
            if let Err(pos) = self.memo.binary_search_by_key(&op.site, |e| e.0) {
                self.memo.insert(pos, (op.site, outcome));
            }
        }
        for s in &program.release[k] {
            if let Ok(pos) = self.memo.binary_search_by_key(s, |e| e.0) {
                self.memo.remove(pos);
            }
        }
    }

    fn decode(&self, schedule: &MeasurementSchedule) -> Result<Vec<u8>> {
        let mut bits = Vec::with_capacity(schedule.circuit_wires);
        for r in schedule.decode.iter().take(schedule.circuit_wires) {
            let upper = lookup(&self.memo, r.upper_site) ^ self.frame.x[r.upper_path];
            let lower = lookup(&self.memo, r.lower_site) ^ self.frame.x[r.lower_path];
            if upper != lower {
                return Err(Error::DecodeInconsistency {
                    wire: r.wire,
                    upper,
                    lower,
                });
            }
            bits.push(upper);
        }
        Ok(bits)
    }
}

#[derive(Clone)]
struct Branch {
    state: CorrelationState,
    tracker: Tracker,
    outcomes: Vec<u8>,
    probability: f64,
    multiplicity: f64,
}

fn finish(
    schedule: &MeasurementSchedule,
    engine: Engine,
    measurements: usize,
    mut records: Vec<BranchRecord>,
) -> RunResult {
    records.sort_by(|a, b| a.outcomes.cmp(&b.outcomes));
    let mut distribution = vec![0.0; 1 << schedule.circuit_wires];
    for r in &records {
        distribution[bits_index(&r.decoded)] += r.probability;
    }
    RunResult {
        mode: schedule.mode,
        engine,
        circuit_wires: schedule.circuit_wires,
        measurements,
        total_probability: records.iter().map(|r| r.probability).sum(),
        distribution,
        branches: records,
    }
}

fn check_patch(schedule: &MeasurementSchedule, patch: &LatticePatch) -> Result<()> {
    if patch.rows() != schedule.rows || patch.cols() != schedule.cols || !patch.is_hexagonal() {
        return Err(Error::InvalidArgument(format!(
            "schedule was compiled for a {}x{} patch",
            schedule.rows, schedule.cols
        )));
    }
    Ok(())
}

/// Enumerates every measurement branch of `schedule` with its probability.
pub fn run_exhaustive(
    schedule: &MeasurementSchedule,
    patch: Arc<LatticePatch>,
    options: RunOptions,
) -> Result<RunResult> {
    check_patch(schedule, &patch)?;
    match options.engine {
        Engine::Sweep => run_sweep(schedule, patch, options.cap),
        Engine::Dense => run_dense(schedule, &patch, options.cap),
    }
}

fn run_sweep(schedule: &MeasurementSchedule, patch: Arc<LatticePatch>, cap: usize) -> Result<RunResult> {
    let program = Program::new(schedule, patch.qubit_count());
    let plan = SweepPlan::full(Arc::clone(&patch))?;
    let mut live = vec![Branch {
        state: CorrelationState::new(plan),
        tracker: Tracker::new(schedule.path_count()),
        outcomes: Vec::with_capacity(program.measurements),
        probability: 1.0,
        multiplicity: 1.0,
    }];
    for (k, op) in program.ops.iter().enumerate() {
        match op {
            Op::Couple(c) => {
                for b in live.iter_mut() {
                    b.state.apply_cz(c.sites[0], c.sites[1])?;
                    b.tracker.frame.couple(c.paths[0], c.paths[1]);
                }
            }
            Op::Measure(m) => {
                let mut next = Vec::with_capacity(live.len() * 2);
                for mut b in live {
                    let basis = adapted_basis(m, &b.tracker.frame);
                    let p = b.state.probabilities(m.site, basis)?;
                    let keep: Vec<u8> = (0..2u8).filter(|&o| p[o as usize] > MIN_BRANCH_PROBABILITY).collect();
                    let mut parent = Some(b);
                    for (n, &o) in keep.iter().enumerate() {
                        let mut child = if n + 1 == keep.len() {
                            parent.take().expect("parent")
                        } else {
                            parent.as_ref().expect("parent").clone()
                        };
                        child.state.commit(m.site, basis, o)?;
                        child.tracker.record(&program, k, m, o);
                        child.outcomes.push(o);
                        child.probability *= p[o as usize];
                        next.push(child);
                    }
                }
                live = merge(next);
                if live.len() > cap {
                    return Err(Error::ResourceLimit {
                        what: "live branches",
                        actual: live.len(),
                        limit: cap,
                    });
                }
            }
        }
    }
    let records = live
        .into_iter()
        .map(|b| {
            Ok(BranchRecord {
                outcomes: bits_label(&b.outcomes),
                probability: b.probability,
                frame: b.tracker.frame.wires(),
                decoded: b.tracker.decode(schedule)?,
                multiplicity: b.multiplicity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(schedule, Engine::Sweep, program.measurements, records))
}

/// Folds branches with equal trackers and parallel tables into the first
/// one. Their futures are identical, so only the summed weight matters.
fn merge(branches: Vec<Branch>) -> Vec<Branch> {
    let mut out: Vec<Branch> = Vec::with_capacity(branches.len());
    let mut groups: HashMap<Tracker, Vec<usize>> = HashMap::new();
    for b in branches {
        let group = groups.entry(b.tracker.clone()).or_default();
        if let Some(&i) = group
            .iter()
            .find(|&&i| out[i].state.parallel_to(&b.state, MERGE_TOLERANCE))
        {
            out[i].probability += b.probability;
            out[i].multiplicity += b.multiplicity;
        } else {
            group.push(out.len());
            out.push(b);
        }
    }
    out
}

/// Dense state with a map from patch sites to register positions.
#[derive(Clone)]
struct DenseState {
    state: StateVector,
    position: Vec<Option<usize>>,
}

impl DenseState {
    fn at(&self, site: SiteId) -> usize {
        self.position[site].expect("site still in the register")
    }

    fn remove(&mut self, site: SiteId) {
        let k = self.at(site);
        self.position[site] = None;
        for p in self.position.iter_mut().flatten() {
            if *p > k {
                *p -= 1;
            }
        }
    }
}

fn run_dense(schedule: &MeasurementSchedule, patch: &LatticePatch, cap: usize) -> Result<RunResult> {
    let program = Program::new(schedule, patch.qubit_count());
    if program.measurements > DENSE_MEASUREMENT_CAP {
        return Err(Error::ResourceLimit {
            what: "measurements for a dense run",
            actual: program.measurements,
            limit: DENSE_MEASUREMENT_CAP,
        });
    }
    let cap = cap.min(DEFAULT_QUBIT_CAP);
    let mut resource = ground_state_with_cap(patch, cap)?;
    let pairs: Vec<(SiteId, SiteId)> = schedule.precoupling.iter().map(|p| (p[0], p[1])).collect();
    if !pairs.is_empty() {
        resource = apply_precoupling(&resource, &pairs)?;
    }
    let start = DenseState {
        position: (0..patch.qubit_count()).map(Some).collect(),
        state: resource.state,
    };
    let mut records = Vec::new();
    dense_dfs(
        schedule,
        &program,
        0,
        start,
        Tracker::new(schedule.path_count()),
        &mut Vec::new(),
        1.0,
        &mut records,
    )?;
    Ok(finish(schedule, Engine::Dense, program.measurements, records))
}

#[allow(clippy::too_many_arguments)]
fn dense_dfs(
    schedule: &MeasurementSchedule,
    program: &Program,
    k: usize,
    mut dense: DenseState,
    mut tracker: Tracker,
    outcomes: &mut Vec<u8>,
    probability: f64,
    records: &mut Vec<BranchRecord>,
) -> Result<()> {
    let mut k = k;
    while let Some(Op::Couple(c)) = program.ops.get(k) {
        if c.physical {
            let (a, b) = (dense.at(c.sites[0]), dense.at(c.sites[1]));
            dense.state.apply_cz(a, b)?;
        }
        tracker.frame.couple(c.paths[0], c.paths[1]);
        k += 1;
    }
    let Some(Op::Measure(m)) = program.ops.get(k) else {
        records.push(BranchRecord {
            outcomes: bits_label(outcomes),
            probability,
            frame: tracker.frame.wires(),
            decoded: tracker.decode(schedule)?,
            multiplicity: 1.0,
        });
        return Ok(());
    };
    let basis = adapted_basis(m, &tracker.frame);
    let pos = dense.at(m.site);
    let p = dense.state.outcome_probabilities(pos, basis)?;
    for o in 0..2u8 {
        if p[o as usize] <= MIN_BRANCH_PROBABILITY {
            continue;
        }
        let mut child = dense.clone();
        child.state = dense.state.project_out(pos, basis.bra(o))?;
        child.state.normalize();
        child.remove(m.site);
        let mut t = tracker.clone();
        t.record(program, k, m, o);
        outcomes.push(o);
        dense_dfs(schedule, program, k + 1, child, t, outcomes, probability * p[o as usize], records)?;
        outcomes.pop();
    }
    Ok(())
}

/// Runs `shots` independent executions with outcomes drawn from a ChaCha8
/// stream seeded with `seed`.
pub fn run_sampled(
    schedule: &MeasurementSchedule,
    patch: Arc<LatticePatch>,
    seed: u64,
    shots: usize,
) -> Result<SampleResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    check_patch(schedule, &patch)?;
    let program = Program::new(schedule, patch.qubit_count());
    let plan = SweepPlan::full(Arc::clone(&patch))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut distribution = vec![0.0; 1 << schedule.circuit_wires];
    for _ in 0..shots {
        let bits = sample_once(schedule, &program, &plan, &mut rng)?;
        *counts.entry(bits_label(&bits)).or_default() += 1;
        distribution[bits_index(&bits)] += 1.0;
    }
    distribution.iter_mut().for_each(|p| *p /= shots as f64);
    Ok(SampleResult {
        mode: schedule.mode,
        seed,
        shots,
        circuit_wires: schedule.circuit_wires,
        counts,
        distribution,
    })
}

fn sample_once<R: Rng>(
    schedule: &MeasurementSchedule,
    program: &Program,
    plan: &Arc<SweepPlan>,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let mut state = CorrelationState::new(Arc::clone(plan));
    let mut tracker = Tracker::new(schedule.path_count());
    for (k, op) in program.ops.iter().enumerate() {
        match op {
            Op::Couple(c) => {
                state.apply_cz(c.sites[0], c.sites[1])?;
                tracker.frame.couple(c.paths[0], c.paths[1]);
            }
            Op::Measure(m) => {
                let basis = adapted_basis(m, &tracker.frame);
                let (o, _) = state.measure(m.site, basis, None, rng)?;
                tracker.record(program, k, m, o);
            }
        }
    }
    tracker.decode(schedule)
}

fn mat(rows: usize, cols: usize, entries: &[C64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, entries)
}

/// `e^{-iZθ/2}`.
pub fn rz_matrix(theta: f64) -> DMatrix<C64> {
    let o = C64::new(0.0, 0.0);
    mat(2, 2, &[C64::from_polar(1.0, -theta / 2.0), o, o, C64::from_polar(1.0, theta / 2.0)])
}

/// `e^{-iXθ/2}`.
pub fn rx_matrix(theta: f64) -> DMatrix<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    mat(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
    )
}

pub fn cz_matrix() -> DMatrix<C64> {
    let mut m = DMatrix::identity(4, 4);
    m[(3, 3)] = C64::new(-1.0, 0.0);
    m
}

/// Output distribution of the ideal circuit on `|0...0>`, indexed like
/// [`RunResult::distribution`].
pub fn ideal_distribution(ir: &CircuitIR) -> Result<Vec<f64>> {
    let mut state = StateVector::zero(ir.wire_count)?;
    let as_array = |m: DMatrix<C64>| [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
    for g in &ir.gates {
        match *g {
            Gate::RotZ { wire, angle } => state.apply_single(wire, as_array(rz_matrix(angle.radians())))?,
            Gate::RotX { wire, angle } => state.apply_single(wire, as_array(rx_matrix(angle.radians())))?,
            Gate::Cz { a, b } => state.apply_cz(a, b)?,
            Gate::Identity { .. } => {}
        }
    }
    Ok(state.amplitudes().iter().map(|a| a.norm_sqr()).collect())
}

/// Compiles `ir` onto `patch`, enumerates every branch, and compares the
/// decoded distribution with the ideal one.
pub fn verify_against_ideal(ir: &CircuitIR, patch: Arc<LatticePatch>, mode: Mode) -> Result<VerifyReport> {
    let schedule = compile(ir, &patch, mode)?;
    let run = run_exhaustive(&schedule, Arc::clone(&patch), RunOptions::default())?;
    let ideal = ideal_distribution(ir)?;
    let tvd = total_variation(&ideal, &run.distribution);
    Ok(VerifyReport {
        circuit: ir.to_string(),
        mode,
        rows: patch.rows(),
        cols: patch.cols(),
        branches: run.branches.len(),
        ideal,
        observed: run.distribution,
        tvd,
        tolerance: TVD_TOLERANCE,
        pass: tvd < TVD_TOLERANCE,
    })
}

/// A single gate cell cut out of a small patch, with the ops that measure it.
#[derive(Debug, Clone)]
pub struct CellFragment {
    pub patch: Arc<LatticePatch>,
    pub ops: Vec<Op>,
    pub fragment: Fragment,
    /// Wires covered; the bond space is ordered by path, first most
    /// significant.
    pub wires: Vec<usize>,
    /// Rung qubits whose partner lies outside the fragment, with the path
    /// their outcome flips.
    pub external: Vec<(SiteId, usize)>,
    pub kind: PatternKind,
}

impl CellFragment {
    pub fn paths(&self) -> Vec<usize> {
        self.wires.iter().flat_map(|&w| [2 * w, 2 * w + 1]).collect()
    }

    pub fn has_input(&self) -> bool {
        self.kind != PatternKind::Init
    }

    pub fn has_output(&self) -> bool {
        self.kind != PatternKind::Readout
    }
}

/// Builds the fragment a pattern is certified on. Single-wire patterns sit
/// on the middle wire of a three-wire patch, so both coupling rungs are
/// present and dangle; the CZ uses both wires of a two-wire patch.
pub fn cell_fragment(pattern: &GatePattern) -> Result<CellFragment> {
    let (rows, wires, step) = match pattern.kind {
        PatternKind::CzCouple => (3, vec![0, 1], 0),
        PatternKind::Init => (1, vec![0], 0),
        PatternKind::Readout => (5, vec![1], 1),
        _ => (5, vec![1], 0),
    };
    let patch = Arc::new(LatticePatch::hexagonal(rows, 2)?);
    let all = patch.wire_count();
    let ops: Vec<Op> = match pattern.kind {
        PatternKind::Init => init_ops(&patch, &[0]),
        PatternKind::CzCouple => {
            let pats: Vec<(GatePattern, usize)> = (0..all).map(|w| (patterns::path_step(), w)).collect();
            step_ops(&patch, step, &pats, &[(0, true, 0)])
        }
        _ => {
            let pats: Vec<(GatePattern, usize)> = (0..all).map(|w| (pattern.clone(), w)).collect();
            step_ops(&patch, step, &pats, &[])
                .into_iter()
                .filter(|op| matches!(op, Op::Measure(m) if wires.contains(&m.wire)))
                .collect()
        }
    };
    let sites: Vec<SiteId> = ops
        .iter()
        .filter_map(|op| match op {
            Op::Measure(m) => Some(m.site),
            Op::Couple(_) => None,
        })
        .collect();
    let mut external = Vec::new();
    for op in &ops {
        if let Op::Measure(m) = op {
            if m.role == Role::A && !wires.contains(&(m.wire - 1)) {
                external.push((m.site, 2 * m.wire));
            }
        }
    }
    let (first, last) = match pattern.kind {
        PatternKind::Init => (0, 0),
        _ => (2 * step as i64 + 1, 2 * step as i64 + 2),
    };
    let paths = wires.iter().flat_map(|&w| [2 * w, 2 * w + 1]).collect();
    Ok(CellFragment {
        fragment: Fragment {
            paths,
            first_column: first,
            last_column: last,
            sites,
        },
        patch,
        ops,
        wires,
        external,
        kind: pattern.kind,
    })
}

/// End of one fragment branch.
#[derive(Debug, Clone)]
pub struct FragmentBranch {
    /// Operator from input to output bonds.
    pub operator: DMatrix<C64>,
    pub frame: BondFrame,
    pub outcomes: Vec<(SiteId, Role, u8)>,
    /// Outcome strings represented by this branch (see
    /// [`for_each_fragment_branch`]).
    pub multiplicity: f64,
    /// How many of them ran an adaptive measurement with a negated angle.
    pub adapted: f64,
}

fn run_fragment_op(
    cell: &CellFragment,
    state: &mut CorrelationState,
    frame: &mut BondFrame,
    outcomes: &[(SiteId, Role, u8)],
    m: &MeasureOp,
    o: u8,
) -> Result<()> {
    let basis = adapted_basis(m, frame);
    state.apply_bra(m.site, basis.bra(o))?;
    for f in &m.flips {
        let value = if f.source == m.site {
            o
        } else {
            outcomes
                .iter()
                .find(|e| e.0 == f.source)
                .map(|e| e.2)
                .expect("flip source measured earlier")
        };
        toggle(frame, f.bit, value);
    }
    for &(site, path) in &cell.external {
        if site == m.site {
            frame.x[path] ^= o;
        }
    }
    Ok(())
}

/// Runs the fragment with outcomes chosen by `choose` (defaults to 0 where
/// it returns `None`), starting from `frame`.
pub fn fragment_branch(
    cell: &CellFragment,
    frame: &BondFrame,
    choose: impl Fn(Role) -> Option<u8>,
) -> Result<FragmentBranch> {
    let plan = SweepPlan::fragment(Arc::clone(&cell.patch), &cell.fragment)?;
    let mut state = CorrelationState::new(plan);
    let mut frame = frame.clone();
    let mut outcomes = Vec::new();
    for op in &cell.ops {
        match op {
            Op::Couple(c) => {
                state.apply_cz(c.sites[0], c.sites[1])?;
                frame.couple(c.paths[0], c.paths[1]);
            }
            Op::Measure(m) => {
                let o = choose(m.role).unwrap_or(0) & 1;
                run_fragment_op(cell, &mut state, &mut frame, &outcomes, m, o)?;
                outcomes.push((m.site, m.role, o));
            }
        }
    }
    state.sweep_to(cell.fragment.last_column)?;
    Ok(FragmentBranch {
        operator: state.port_matrix()?,
        frame,
        outcomes,
        multiplicity: 1.0,
        adapted: 0.0,
    })
}

/// Visits every branch of the fragment, breadth first. Branches whose table
/// vanishes are cut as soon as that happens. Branches with the same frame,
/// the same outcomes on roles read later (`g'`, `h`, `k`), and parallel
/// tables have identical futures up to a scalar; they are visited once, with
/// `multiplicity` counting the outcome strings they stand for.
pub fn for_each_fragment_branch(
    cell: &CellFragment,
    frame: &BondFrame,
    mut visit: impl FnMut(FragmentBranch) -> Result<()>,
) -> Result<()> {
    #[derive(Clone)]
    struct Node {
        state: CorrelationState,
        frame: BondFrame,
        outcomes: Vec<(SiteId, Role, u8)>,
        multiplicity: f64,
        adapted: f64,
    }
    let kept = |outcomes: &[(SiteId, Role, u8)]| -> Vec<(SiteId, u8)> {
        outcomes
            .iter()
            .filter(|e| matches!(e.1, Role::GPrime | Role::H | Role::K))
            .map(|e| (e.0, e.2))
            .collect()
    };
    let plan = SweepPlan::fragment(Arc::clone(&cell.patch), &cell.fragment)?;
    let mut live = vec![Node {
        state: CorrelationState::new(plan),
        frame: frame.clone(),
        outcomes: Vec::new(),
        multiplicity: 1.0,
        adapted: 0.0,
    }];
    for op in &cell.ops {
        match op {
            Op::Couple(c) => {
                for n in live.iter_mut() {
                    n.state.apply_cz(c.sites[0], c.sites[1])?;
                    n.frame.couple(c.paths[0], c.paths[1]);
                }
            }
            Op::Measure(m) => {
                let mut next: Vec<Node> = Vec::with_capacity(2 * live.len());
                let mut groups: HashMap<(BondFrame, Vec<(SiteId, u8)>), Vec<usize>> = HashMap::new();
                for n in &live {
                    let before = n.state.table_norm_sqr();
                    let negated = match &m.angle_rule {
                        AngleRule::NegateIf(bits) => bits.iter().fold(0, |a, &b| a ^ frame_bit(&n.frame, b)) == 1,
                        AngleRule::Fixed => false,
                    };
                    for o in 0..2u8 {
                        let mut child = n.clone();
                        run_fragment_op(cell, &mut child.state, &mut child.frame, &n.outcomes, m, o)?;
                        if child.state.table_norm_sqr() <= 1e-24 * before {
                            continue;
                        }
                        child.outcomes.push((m.site, m.role, o));
                        if negated {
                            child.adapted = child.multiplicity;
                        }
                        let group = groups.entry((child.frame.clone(), kept(&child.outcomes))).or_default();
                        match group
                            .iter()
                            .find(|&&i| next[i].state.parallel_to(&child.state, MERGE_TOLERANCE))
                        {
                            Some(&i) => {
                                next[i].multiplicity += child.multiplicity;
                                next[i].adapted += child.adapted;
                            }
                            None => {
                                group.push(next.len());
                                next.push(child);
                            }
                        }
                    }
                }
                live = next;
            }
        }
    }
    for mut n in live {
        n.state.sweep_to(cell.fragment.last_column)?;
        visit(FragmentBranch {
            operator: n.state.port_matrix()?,
            frame: n.frame,
            outcomes: n.outcomes,
            multiplicity: n.multiplicity,
            adapted: n.adapted,
        })?;
    }
    Ok(())
}

/// Logical operator a pattern is meant to implement: the gate for gate
/// cells, `|0>` for the initialization column, and the identity (read in the
/// computational basis) for the readout cell.
pub fn pattern_target(pattern: &GatePattern) -> DMatrix<C64> {
    match pattern.kind {
        PatternKind::PathStep | PatternKind::Readout => DMatrix::identity(2, 2),
        PatternKind::RotZ(t) => rz_matrix(t),
        PatternKind::RotX(t) => rx_matrix(t),
        PatternKind::CzCouple => cz_matrix(),
        PatternKind::Init => mat(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
    }
}

/// Input frames a pattern is checked against: all sixteen on a single wire,
/// a fixed selection of type-I and type-II frames for the CZ, none for the
/// initialization column.
pub fn standard_frames(pattern: &GatePattern) -> Result<Vec<BondFrame>> {
    let cell = cell_fragment(pattern)?;
    let paths = cell.paths();
    let n = cell.patch.path_count();
    let make = |x: &[usize], z: &[usize]| {
        let mut f = BondFrame::new(n);
        x.iter().for_each(|&k| f.x[paths[k]] = 1);
        z.iter().for_each(|&k| f.z[paths[k]] = 1);
        f
    };
    Ok(match pattern.kind {
        PatternKind::Init => vec![BondFrame::new(n)],
        PatternKind::CzCouple => vec![
            make(&[], &[]),
            make(&[0], &[]),
            make(&[2], &[]),
            make(&[0, 1, 2, 3], &[]),
            make(&[], &[0, 3]),
            make(&[1], &[2]),
            make(&[0, 1, 3], &[1]),
            make(&[0, 2], &[0, 1, 2, 3]),
        ],
        _ => (0..16u8)
            .map(|bits| {
                let x: Vec<usize> = (0..2).filter(|k| bits >> k & 1 == 1).collect();
                let z: Vec<usize> = (0..2).filter(|k| bits >> (k + 2) & 1 == 1).collect();
                make(&x, &z)
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternCheck {
    pub pattern: String,
    pub theta: Option<f64>,
    pub frames: usize,
    /// Outcome strings with a nonvanishing operator, summed over frames.
    pub branches: f64,
    /// Distinct operators actually compared.
    pub classes: usize,
    /// Branches with a vanishing operator on the code space (they have zero
    /// probability on a full patch).
    pub null_branches: f64,
    /// Branches that ran with a negated angle.
    pub adapted_branches: f64,
    pub worst_deviation: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl PatternCheck {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("pattern check serializes")
    }
}

/// `1 - |tr(A†B)| / (|A| |B|)`, 0 when both vanish, 1 when only one does.
pub fn proportionality_deviation(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 && nb == 0.0 {
        return 0.0;
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let tr: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    (1.0 - tr.norm() / (na * nb)).max(0.0)
}

struct LeafCheck {
    multiplicity: f64,
    norm: f64,
    deviation: f64,
    expect_zero: bool,
    adapted: f64,
    label: String,
}

fn check_leaf(
    cell: &CellFragment,
    target: &DMatrix<C64>,
    input: &BondFrame,
    leaf: &FragmentBranch,
) -> LeafCheck {
    let paths = cell.paths();
    let encoder = patterns::type_one_encoder(cell.wires.len());
    let actual = if cell.has_input() {
        &leaf.operator * input.operator(&paths) * &encoder
    } else {
        leaf.operator.clone()
    };
    let mut expect_zero = false;
    let predicted = if cell.kind == PatternKind::Readout {
        let w = cell.wires[0];
        let mu = |role: Role| leaf.outcomes.iter().find(|e| e.1 == role).map(|e| e.2).unwrap_or(0);
        let z = mu(Role::H) ^ leaf.frame.x[2 * w];
        let check = mu(Role::K) ^ leaf.frame.x[2 * w + 1];
        expect_zero = z != check;
        DMatrix::from_fn(1, 2, |_, c| target[(z as usize, c)])
    } else {
        leaf.frame.operator(&paths) * &encoder * target
    };
    let norm = actual.norm();
    let deviation = if expect_zero {
        0.0
    } else {
        proportionality_deviation(&actual, &predicted)
    };
    let mut label = String::new();
    for (_, role, o) in &leaf.outcomes {
        let _ = write!(label, "{}={o} ", role.label());
    }
    LeafCheck {
        multiplicity: leaf.multiplicity,
        norm,
        deviation,
        expect_zero,
        adapted: leaf.adapted,
        label,
    }
}

fn pattern_label(kind: PatternKind) -> (&'static str, Option<f64>) {
    match kind {
        PatternKind::PathStep => ("path_step", None),
        PatternKind::RotZ(t) => ("rot_z", Some(t)),
        PatternKind::RotX(t) => ("rot_x", Some(t)),
        PatternKind::CzCouple => ("cz_couple", None),
        PatternKind::Init => ("init", None),
        PatternKind::Readout => ("readout", None),
    }
}

/// Certifies a pattern: for every input frame and every measurement branch,
/// the induced operator restricted to the type-I code space must equal the
/// predicted frame times `target`, up to a scalar. Frames run on separate
/// threads.
pub fn verify_pattern(pattern: &GatePattern, target: &DMatrix<C64>, frames: &[BondFrame]) -> Result<PatternCheck> {
    let cell = cell_fragment(pattern)?;
    let results: Vec<Result<Vec<LeafCheck>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = frames
            .iter()
            .map(|input| {
                let cell = &cell;
                scope.spawn(move || {
                    let mut leaves = Vec::new();
                    for_each_fragment_branch(cell, input, |leaf| {
                        leaves.push(check_leaf(cell, target, input, &leaf));
                        Ok(())
                    })?;
                    Ok(leaves)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("pattern thread")).collect()
    });
    let (name, theta) = pattern_label(pattern.kind);
    let mut report = PatternCheck {
        pattern: name.to_string(),
        theta,
        frames: frames.len(),
        branches: 0.0,
        classes: 0,
        null_branches: 0.0,
        adapted_branches: 0.0,
        worst_deviation: 0.0,
        tolerance: PATTERN_TOLERANCE,
        failures: Vec::new(),
        pass: true,
    };
    for (f, leaves) in results.into_iter().enumerate() {
        let leaves = leaves?;
        let scale = leaves.iter().map(|l| l.norm).fold(0.0, f64::max);
        for l in leaves {
            if l.norm <= 1e-8 * scale {
                report.null_branches += l.multiplicity;
                continue;
            }
            report.branches += l.multiplicity;
            report.adapted_branches += l.adapted;
            report.classes += 1;
            let deviation = if l.expect_zero { 1.0 } else { l.deviation };
            report.worst_deviation = report.worst_deviation.max(deviation);
            if deviation >= PATTERN_TOLERANCE && report.failures.len() < 16 {
                report
                    .failures
                    .push(format!("frame {f}: {}deviation {deviation:.3e}", l.label));
            }
        }
    }
    report.pass = report.worst_deviation < PATTERN_TOLERANCE && report.classes > 0;
    Ok(report)
}
