//! Command-line front end. `run_cli` returns the process exit code: 0 on
//! success, 1 when a verification fails, 2 on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::compiler::{compile, minimal_patch, parse_circuit, print_schedule, CircuitIR, Mode};
use crate::error::{Error, Result};
use crate::harness::{
    self, cell_fragment, fragment_branch, pattern_target, run_exhaustive, run_sampled, standard_frames,
    verify_against_ideal, verify_pattern, Engine, RunOptions,
};
use crate::lattice::{LatticePatch, Role};
use crate::oracle::{C64, DEFAULT_QUBIT_CAP};
use crate::patterns::{self, BondFrame, GatePattern};
use crate::resource::{self, LoopSuperposition};

#[derive(Debug, Parser)]
#[command(name = "stringnet", version, about = "Measurement-based computation on a hexagonal string-net patch")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the geometry of a patch.
    Describe(PatchArgs),
    /// Build the resource state of a patch.
    Resource(ResourceArgs),
    /// Compile a circuit into a measurement schedule.
    Compile(CircuitArgs),
    /// Execute a compiled circuit, exhaustively or by sampling.
    Run(RunArgs),
    /// Check a circuit against ideal simulation, or certify a gate pattern.
    Verify(VerifyArgs),
    /// Dump the operator one branch of a gate pattern induces.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Live,
    Precoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Sweep,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    PathStep,
    RotZ,
    RotX,
    CzCouple,
    Init,
    Readout,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Print JSON instead of a summary.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0, value_name = "U64")]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PatchArgs {
    /// Plaquette rows and columns, e.g. `3x4`.
    #[arg(long, value_name = "RxC")]
    pub patch: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    #[arg(long, value_name = "RxC")]
    pub patch: String,
    /// Qubit limit for the dense state.
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP, value_name = "N")]
    pub cap: usize,
    /// Allow `--cap` above the default.
    #[arg(long)]
    pub allow_large: bool,
    /// Apply the precoupling CZ pairs of this circuit's precoupled schedule.
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,
    #[arg(long, default_value_t = Mode::DEFAULT_PERIOD, value_name = "N")]
    pub period: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    #[arg(long, value_name = "FILE")]
    pub circuit: PathBuf,
    /// Defaults to the smallest patch that fits the circuit.
    #[arg(long, value_name = "RxC")]
    pub patch: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Live)]
    pub mode: ModeArg,
    /// Gate cells between precoupled CZ columns.
    #[arg(long, default_value_t = Mode::DEFAULT_PERIOD, value_name = "N")]
    pub period: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    /// Sample this many shots instead of enumerating every branch.
    #[arg(long, value_name = "N")]
    pub shots: Option<usize>,
    #[arg(long, value_enum, default_value_t = EngineArg::Sweep)]
    pub engine: EngineArg,
    /// Live-branch limit (sweep) or qubit limit (dense).
    #[arg(long, value_name = "N")]
    pub cap: Option<usize>,
    /// Include every branch record in the JSON report.
    #[arg(long)]
    pub branches: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_name = "FILE", conflicts_with = "pattern")]
    pub circuit: Option<PathBuf>,
    #[arg(long, value_name = "RxC")]
    pub patch: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Live)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = Mode::DEFAULT_PERIOD, value_name = "N")]
    pub period: usize,
    /// Certify a gate pattern instead of a circuit.
    #[arg(long, value_enum)]
    pub pattern: Option<PatternArg>,
    /// Rotation angle in radians for `rot-z` and `rot-x`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Outcomes by role, e.g. `h=1,g=0`; unlisted roles read 0.
    #[arg(long, default_value = "")]
    pub outcomes: String,
    #[command(flatten)]
    pub output: Output,
}

/// Parses `RxC`.
pub fn parse_patch_dims(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("patch must look like RxC, got {text:?}"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    Ok((r, c))
}

fn mode_of(arg: ModeArg, period: usize) -> Mode {
    match arg {
        ModeArg::Live => Mode::Live,
        ModeArg::Precoupled => Mode::Precoupled { period },
    }
}

fn pattern_of(arg: PatternArg, theta: f64) -> GatePattern {
    match arg {
        PatternArg::PathStep => patterns::path_step(),
        PatternArg::RotZ => patterns::rot_z(theta),
        PatternArg::RotX => patterns::rot_x(theta),
        PatternArg::CzCouple => patterns::cz_couple(),
        PatternArg::Init => patterns::init_leg(),
        PatternArg::Readout => patterns::readout(),
    }
}

fn read_circuit(path: &PathBuf) -> Result<CircuitIR> {
    parse_circuit(&fs::read_to_string(path)?)
}

fn patch_for(ir: &CircuitIR, patch: Option<&str>, mode: Mode) -> Result<Arc<LatticePatch>> {
    let (r, c) = match patch {
        Some(p) => parse_patch_dims(p)?,
        None => minimal_patch(ir, mode)?,
    };
    Ok(Arc::new(LatticePatch::hexagonal(r, c)?))
}

fn matrix_json(m: &DMatrix<C64>) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "entries": rows })
}

fn emit(output: &Output, mut report: Value, summary: String) -> Result<()> {
    if let Value::Object(map) = &mut report {
        map.insert("seed".into(), json!(output.seed));
    }
    if let Some(path) = &output.out {
        fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    let text = if output.json {
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        summary
    };
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = std::io::stdout().write_all(text.as_bytes());
    Ok(())
}

fn describe(args: &PatchArgs) -> Result<i32> {
    let (r, c) = parse_patch_dims(&args.patch)?;
    let patch = LatticePatch::hexagonal(r, c)?;
    let mut report = patch.to_json();
    if let Value::Object(map) = &mut report {
        map.insert("cycle_rank".into(), json!(patch.cycle_rank()));
    }
    let summary = format!(
        "{r}x{c} patch: {} vertices, {} edges, {} plaquettes, {} qubits, cycle rank {}, {} wire(s)\n",
        patch.vertices().len(),
        patch.edges().len(),
        patch.plaquettes().len(),
        patch.qubit_count(),
        patch.cycle_rank(),
        patch.wire_count()
    );
    emit(&args.output, report, summary)?;
    Ok(0)
}

fn resource_cmd(args: &ResourceArgs) -> Result<i32> {
    if args.cap > DEFAULT_QUBIT_CAP && !args.allow_large {
        return Err(Error::InvalidArgument(format!(
            "--cap above {DEFAULT_QUBIT_CAP} needs --allow-large"
        )));
    }
    let (r, c) = parse_patch_dims(&args.patch)?;
    let patch = LatticePatch::hexagonal(r, c)?;
    let pairs = match &args.circuit {
        Some(path) => {
            let ir = read_circuit(path)?;
            let s = compile(&ir, &patch, Mode::Precoupled { period: args.period })?;
            s.precoupling.iter().map(|p| (p[0], p[1])).collect()
        }
        None => Vec::new(),
    };
    if patch.qubit_count() <= args.cap {
        let mut state = resource::ground_state_with_cap(&patch, args.cap)?;
        if !pairs.is_empty() {
            state = resource::apply_precoupling(&state, &pairs)?;
        }
        let energy = resource::energy(&state.state, &patch)?;
        let mut report = state.to_json();
        if let Value::Object(map) = &mut report {
            map.insert("loops".into(), json!(state.signs.len()));
            map.insert("energy".into(), json!(energy));
            map.insert("qubits".into(), json!(patch.qubit_count()));
        }
        let summary = format!(
            "{} qubits, {} loop configurations, energy {energy:.12}, {} CZ pair(s)\n",
            patch.qubit_count(),
            state.signs.len(),
            pairs.len()
        );
        emit(&args.output, report, summary)?;
    } else {
        // Too large for a dense vector: report the sparse loop form.
        let sup = LoopSuperposition::plain(&patch)?.with_precoupling(&pairs)?;
        let negative = sup.signs().iter().filter(|&&s| s < 0).count();
        let report = json!({
            "kind": if pairs.is_empty() { "plain" } else { "modified" },
            "qubits": patch.qubit_count(),
            "loops": sup.loops.len(),
            "negative_loops": negative,
            "cz_pairs": pairs,
        });
        let summary = format!(
            "{} qubits (sparse form), {} loop configurations, {negative} with negative sign, {} CZ pair(s)\n",
            patch.qubit_count(),
            sup.loops.len(),
            pairs.len()
        );
        emit(&args.output, report, summary)?;
    }
    Ok(0)
}

fn compile_cmd(args: &CircuitArgs) -> Result<i32> {
    let ir = read_circuit(&args.circuit)?;
    let mode = mode_of(args.mode, args.period);
    let patch = patch_for(&ir, args.patch.as_deref(), mode)?;
    let schedule = compile(&ir, &patch, mode)?;
    emit(&args.output, schedule.to_json(), print_schedule(&schedule))?;
    Ok(0)
}

fn run_cmd(args: &RunArgs) -> Result<i32> {
    let c = &args.circuit;
    if args.shots == Some(0) {
        return Err(Error::InvalidArgument("--shots must be at least 1".into()));
    }
    let ir = read_circuit(&c.circuit)?;
    let mode = mode_of(c.mode, c.period);
    let patch = patch_for(&ir, c.patch.as_deref(), mode)?;
    let schedule = compile(&ir, &patch, mode)?;
    let (report, summary) = match args.shots {
        Some(shots) => {
            let res = run_sampled(&schedule, patch, c.output.seed, shots)?;
            let mut s = format!("{shots} shot(s), seed {}\n", c.output.seed);
            for (bits, n) in &res.counts {
                s += &format!("  {bits}: {n}\n");
            }
            (res.to_json(), s)
        }
        None => {
            let engine = match args.engine {
                EngineArg::Sweep => Engine::Sweep,
                EngineArg::Dense => Engine::Dense,
            };
            let cap = args.cap.unwrap_or(match engine {
                Engine::Sweep => harness::DEFAULT_BRANCH_CAP,
                Engine::Dense => DEFAULT_QUBIT_CAP,
            });
            let res = run_exhaustive(&schedule, patch, RunOptions { engine, cap })?;
            let mut s = format!(
                "{} measurement(s), {} branch class(es), total probability {:.12}\n",
                res.measurements,
                res.branches.len(),
                res.total_probability
            );
            for (i, p) in res.distribution.iter().enumerate() {
                let bits: String = (0..res.circuit_wires).map(|w| if i >> w & 1 == 1 { '1' } else { '0' }).collect();
                s += &format!("  {bits}: {p:.12}\n");
            }
            let mut v = res.to_json();
            if !args.branches {
                if let Value::Object(map) = &mut v {
                    map.insert("branches".into(), json!(res.branches.len()));
                }
            }
            (v, s)
        }
    };
    emit(&c.output, report, summary)?;
    Ok(0)
}

fn verify_cmd(args: &VerifyArgs) -> Result<i32> {
    if let Some(p) = args.pattern {
        let pattern = pattern_of(p, args.theta);
        let frames = standard_frames(&pattern)?;
        let check = verify_pattern(&pattern, &pattern_target(&pattern), &frames)?;
        let summary = format!(
            "{}: {} branch(es) over {} frame(s), worst deviation {:.3e} -> {}\n",
            check.pattern,
            check.branches,
            check.frames,
            check.worst_deviation,
            if check.pass { "pass" } else { "FAIL" }
        );
        let pass = check.pass;
        emit(&args.output, check.to_json(), summary)?;
        return Ok(if pass { 0 } else { 1 });
    }
    let Some(path) = &args.circuit else {
        return Err(Error::InvalidArgument("verify needs --circuit or --pattern".into()));
    };
    let ir = read_circuit(path)?;
    let mode = mode_of(args.mode, args.period);
    let patch = patch_for(&ir, args.patch.as_deref(), mode)?;
    let report = verify_against_ideal(&ir, patch, mode)?;
    let summary = format!(
        "{} mode on {}x{}: tvd {:.3e} over {} branch class(es) -> {}\n",
        mode.label(),
        report.rows,
        report.cols,
        report.tvd,
        report.branches,
        if report.pass { "pass" } else { "FAIL" }
    );
    let pass = report.pass;
    emit(&args.output, report.to_json(), summary)?;
    Ok(if pass { 0 } else { 1 })
}

fn parse_outcomes(text: &str) -> Result<Vec<(Role, u8)>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (role, bit) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {item:?} is not role=bit")))?;
        let role = Role::ALL
            .into_iter()
            .find(|r| r.label() == role.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown role {role:?}")))?;
        let bit = match bit.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::InvalidArgument(format!("outcome bit {other:?}"))),
        };
        out.push((role, bit));
    }
    Ok(out)
}

fn inspect_cmd(args: &InspectArgs) -> Result<i32> {
    let pattern = pattern_of(args.pattern, args.theta);
    let outcomes = parse_outcomes(&args.outcomes)?;
    let cell = cell_fragment(&pattern)?;
    let frame = BondFrame::new(cell.patch.path_count());
    let branch = fragment_branch(&cell, &frame, |role| {
        outcomes.iter().find(|(r, _)| *r == role).map(|&(_, b)| b)
    })?;
    let logical: Vec<_> = cell.wires.iter().map(|&w| branch.frame.wire(w)).collect();
    let report = json!({
        "pattern": pattern.to_json(),
        "paths": cell.paths(),
        "outcomes": branch.outcomes.iter().map(|(s, r, o)| json!({"site": s, "role": r.label(), "outcome": o})).collect::<Vec<_>>(),
        "frame": logical,
        "operator": matrix_json(&branch.operator),
    });
    let mut summary = format!(
        "{} branch on paths {:?}, frame {:?}\n",
        report["pattern"]["kind"]["kind"].as_str().unwrap_or("pattern"),
        cell.paths(),
        logical
    );
    for r in 0..branch.operator.nrows() {
        let row: Vec<String> = (0..branch.operator.ncols())
            .map(|c| {
                let z = branch.operator[(r, c)];
                format!("{:+.4}{:+.4}i", z.re, z.im)
            })
            .collect();
        summary += &format!("  {}\n", row.join(" "));
    }
    emit(&args.output, report, summary)?;
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Describe(a) => describe(a),
        Command::Resource(a) => resource_cmd(a),
        Command::Compile(a) => compile_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Inspect(a) => inspect_cmd(a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
