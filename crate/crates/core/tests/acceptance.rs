//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Tolerances and time limits are pinned here; reference values come from
//! independent computations inside this file (brute-force subset filters,
//! closed-form gate matrices, direct contraction with projected qubits).

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use stringnet::compiler::{compile, parse_circuit, print_circuit, Mode};
use stringnet::harness::{
    pattern_target, run_exhaustive, run_sampled, standard_frames, total_variation, verify_against_ideal,
    verify_pattern, RunOptions,
};
use stringnet::lattice::LatticePatch;
use stringnet::oracle::{PauliTerm, C64};
use stringnet::patterns;
use stringnet::resource::{
    apply_precoupling, cycle_basis, energy, ground_state, hamiltonian_terms, stabilizer_project, LoopSuperposition,
};
use stringnet::tensornet::contract_patch;
use stringnet::Error;

const AMPLITUDE_TOL: f64 = 1e-12;
const AGREEMENT_TOL: f64 = 1e-10;
const ENERGY_TOL: f64 = 1e-10;
const PATTERN_TOL: f64 = 1e-10;
const TVD_TOL: f64 = 1e-10;
const SAMPLED_TVD_TOL: f64 = 0.02;
const SHOTS: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

/// Closed-loop configurations by filtering every edge subset.
fn brute_force_loops(patch: &LatticePatch) -> Vec<u64> {
    let ne = patch.edges().len();
    (0u64..1 << ne)
        .filter(|mask| {
            (0..patch.vertices().len()).all(|v| patch.incident(v).iter().filter(|&&e| mask >> e & 1 == 1).count() % 2 == 0)
        })
        .collect()
}

fn ground_state_structure() -> Outcome {
    let mut notes = Vec::new();
    for (rows, cols, rank) in [(1, 1, 1), (1, 2, 2)] {
        let patch = LatticePatch::hexagonal(rows, cols).unwrap();
        if patch.cycle_rank() != rank {
            return fail(format!("{rows}x{cols}: cycle rank {}", patch.cycle_rank()));
        }
        let loops = brute_force_loops(&patch);
        if loops.len() != 1 << rank {
            return fail(format!("{rows}x{cols}: {} closed subsets", loops.len()));
        }
        let g = ground_state(&patch).unwrap();
        let expected = 1.0 / (loops.len() as f64).sqrt();
        let mut support = vec![false; g.state.amplitudes().len()];
        for mask in &loops {
            let idx: usize = (0..patch.qubit_count())
                .filter(|&q| mask >> patch.site_edge(q) & 1 == 1)
                .map(|q| 1usize << q)
                .sum();
            support[idx] = true;
        }
        for (idx, a) in g.state.amplitudes().iter().enumerate() {
            let want = if support[idx] { expected } else { 0.0 };
            if (a - C64::new(want, 0.0)).norm() > AMPLITUDE_TOL {
                return fail(format!("{rows}x{cols}: amplitude {a} at {idx}, expected {want}"));
            }
        }
        let projected = stabilizer_project(&patch).unwrap();
        let contracted = contract_patch(&patch).unwrap();
        let d1 = g.state.max_abs_diff(&projected.state);
        let d2 = g.state.max_abs_diff(&contracted);
        if d1 > AGREEMENT_TOL || d2 > AGREEMENT_TOL {
            return fail(format!("{rows}x{cols}: projection off by {d1:e}, contraction by {d2:e}"));
        }
        notes.push(format!("{rows}x{cols}: {} loops, max diff {:.1e}", loops.len(), d1.max(d2)));
    }
    ok(notes.join("; "))
}

fn energy_check() -> Outcome {
    let mut notes = Vec::new();
    for (rows, cols) in [(1, 1), (1, 2)] {
        let patch = LatticePatch::hexagonal(rows, cols).unwrap();
        let g = ground_state(&patch).unwrap();
        let s = patch.term_supports();
        let count = s.plaquettes.len() + s.vertices.len() + s.edges.len();
        let e = energy(&g.state, &patch).unwrap();
        if (e + count as f64).abs() > ENERGY_TOL {
            return fail(format!("{rows}x{cols}: energy {e}, expected -{count}"));
        }
        // Each term rebuilt from the supports, independent of the term list.
        let mut rebuilt: Vec<PauliTerm> = s.plaquettes.iter().map(|p| PauliTerm::x(p.clone())).collect();
        rebuilt.extend(s.vertices.iter().chain(&s.edges).map(|v| PauliTerm::z(v.clone())));
        if rebuilt.len() != hamiltonian_terms(&patch).len() {
            return fail(format!("{rows}x{cols}: term count mismatch"));
        }
        for t in &rebuilt {
            let v = g.state.expectation(t).unwrap();
            if (v - 1.0).abs() > ENERGY_TOL {
                return fail(format!("{rows}x{cols}: term {t:?} has expectation {v}"));
            }
        }
        notes.push(format!("{rows}x{cols}: E = {e:.12} over {count} terms"));
    }
    ok(notes.join("; "))
}

fn pattern_certification() -> Outcome {
    let mut rng = common::rng(2024);
    let mut angles: Vec<f64> = (0..16).map(|k| k as f64 * PI / 8.0).collect();
    angles.extend((0..8).map(|_| rng.random_range(-PI..PI)));
    let mut checks = Vec::new();
    for p in [patterns::path_step(), patterns::cz_couple(), patterns::init_leg(), patterns::readout()] {
        checks.push(p);
    }
    for &theta in &angles {
        checks.push(patterns::rot_z(theta));
        checks.push(patterns::rot_x(theta));
    }
    let mut branches = 0.0;
    let mut adapted = [0.0; 2];
    let mut worst: f64 = 0.0;
    for p in &checks {
        let frames = standard_frames(p).unwrap();
        let report = verify_pattern(p, &pattern_target(p), &frames).unwrap();
        worst = worst.max(report.worst_deviation);
        if !report.pass || report.worst_deviation >= PATTERN_TOL {
            return fail(format!("{} theta {:?}: {:?}", report.pattern, report.theta, report.failures));
        }
        branches += report.branches;
        match p.kind {
            patterns::PatternKind::RotZ(_) => adapted[0] += report.adapted_branches,
            patterns::PatternKind::RotX(_) => adapted[1] += report.adapted_branches,
            _ => {}
        }
    }
    if adapted[0] == 0.0 || adapted[1] == 0.0 {
        return fail("no branch exercised the negated angle");
    }
    ok(format!(
        "{} pattern instances, {} angles, {branches:.0} branches, {:.0}/{:.0} with -theta (rz/rx), worst {worst:.1e}",
        checks.len(),
        angles.len(),
        adapted[0],
        adapted[1]
    ))
}

struct E2E {
    outcome: Outcome,
    /// `(patch, precoupling pairs)` of every precoupled schedule.
    placements: Vec<(Arc<LatticePatch>, Vec<(usize, usize)>)>,
    precoupled_audit: Result<String, String>,
}

fn universality() -> E2E {
    let mut rng = common::rng(77);
    let mut worst: f64 = 0.0;
    let mut placements = Vec::new();
    let mut audit = Ok(());
    let (mut pairs_total, mut wanted_total) = (0, 0);
    for n in 0..50 {
        let ir = common::random_circuit(&mut rng, 4);
        for mode in [Mode::Live, Mode::precoupled()] {
            let patch = common::smallest_patch(&ir, mode);
            let report = match verify_against_ideal(&ir, Arc::clone(&patch), mode) {
                Ok(r) => r,
                Err(e) => {
                    return E2E {
                        outcome: fail(format!("circuit {n} ({mode:?}): {e}")),
                        placements,
                        precoupled_audit: Err("not reached".into()),
                    }
                }
            };
            worst = worst.max(report.tvd);
            if !report.pass {
                return E2E {
                    outcome: fail(format!("circuit {n} ({mode:?}) tvd {:e}:\n{}", report.tvd, print_circuit(&ir))),
                    placements,
                    precoupled_audit: Err("not reached".into()),
                };
            }
            if let Mode::Precoupled { .. } = mode {
                let s = compile(&ir, &patch, mode).unwrap();
                if s.physical_two_qubit_ops() != 0 {
                    audit = Err(format!("circuit {n}: {} physical CZ", s.physical_two_qubit_ops()));
                }
                if !s.uncancelled.is_empty() {
                    audit = Err(format!("circuit {n}: uncancelled pairs {:?}", s.uncancelled));
                }
                pairs_total += s.precoupling.len();
                wanted_total += ir.cz_count();
                placements.push((patch, s.precoupling.iter().map(|p| (p[0], p[1])).collect()));
            }
        }
    }
    let precoupled_audit = audit.map(|_| {
        format!(
            "{pairs_total} pre-placed CZ over 50 schedules, {wanted_total} used by the circuits, {} cancelled",
            pairs_total - wanted_total
        )
    });
    E2E {
        outcome: ok(format!("50 circuits x 2 modes, worst tvd {worst:.1e}")),
        placements,
        precoupled_audit,
    }
}

fn string_net_property(placements: &[(Arc<LatticePatch>, Vec<(usize, usize)>)]) -> Outcome {
    // Dense check on the largest patch a state vector holds.
    let small = LatticePatch::hexagonal(1, 2).unwrap();
    let g = ground_state(&small).unwrap();
    let norm = 1.0 / (g.signs.len() as f64).sqrt();
    let mut rng = common::rng(8);
    for _ in 0..20 {
        let pairs: Vec<(usize, usize)> = (0..rng.random_range(1..6))
            .map(|_| {
                let a = rng.random_range(0..small.qubit_count());
                (a, (a + rng.random_range(1..small.qubit_count())) % small.qubit_count())
            })
            .collect();
        let gp = apply_precoupling(&g, &pairs).unwrap();
        for a in gp.state.amplitudes() {
            let m = a.norm();
            if !(m < AMPLITUDE_TOL || ((m - norm).abs() < AMPLITUDE_TOL && a.im.abs() < AMPLITUDE_TOL)) {
                return fail(format!("dense amplitude {a} after {pairs:?}"));
            }
        }
    }
    // Placements from precoupled schedules, by contracting the patch with
    // every qubit projected: random loops and random broken strings.
    let mut loops_checked = 0;
    let mut with_pairs = 0;
    for (patch, pairs) in placements {
        if pairs.is_empty() {
            continue;
        }
        with_pairs += 1;
        let basis = cycle_basis(patch);
        let norm = 2f64.powf(-(basis.len() as f64) / 2.0);
        let occupied = |set: &stringnet::resource::EdgeSet, q: usize| set.contains(patch.site_edge(q));
        for trial in 0..6 {
            let mut set = stringnet::resource::EdgeSet::empty(patch.edges().len());
            for b in &basis {
                if rng.random::<bool>() {
                    set.xor_with(b);
                }
            }
            let amp = common::swept_amplitude(patch, pairs, &|q| occupied(&set, q) as u8);
            let sign = pairs.iter().filter(|&&(a, b)| occupied(&set, a) && occupied(&set, b)).count() % 2;
            let want = if sign == 1 { -norm } else { norm };
            if (amp - C64::new(want, 0.0)).norm() > AMPLITUDE_TOL {
                return fail(format!("loop amplitude {amp}, expected {want}"));
            }
            loops_checked += 1;
            if trial == 0 {
                let broken = common::swept_amplitude(patch, pairs, &|q| (occupied(&set, q) ^ (q == 1)) as u8);
                if broken.norm() > AMPLITUDE_TOL {
                    return fail(format!("broken string has amplitude {broken}"));
                }
            }
        }
        // Whole loop space where it is small enough to list.
        if basis.len() <= 12 {
            let sup = LoopSuperposition::plain(patch).unwrap().with_precoupling(pairs).unwrap();
            for (lp, a) in sup.loops.iter().zip(&sup.amplitudes) {
                let amp = common::swept_amplitude(patch, pairs, &|q| lp.site_occupied(q) as u8);
                if (amp - a).norm() > AMPLITUDE_TOL || (amp.norm() - norm).abs() > AMPLITUDE_TOL {
                    return fail(format!("loop amplitude {amp} vs {a}"));
                }
                loops_checked += 1;
            }
        }
    }
    ok(format!(
        "dense 1x2 with 20 random CZ sets; {with_pairs} schedule placements, {loops_checked} loop amplitudes contracted"
    ))
}

fn precoupled_audit(summary: &Result<String, String>) -> Outcome {
    let summary = match summary {
        Ok(s) => s.clone(),
        Err(e) => return fail(e.clone()),
    };
    // A circuit whose pre-placed CZs all go unused.
    let ir = parse_circuit("wires 2\nrx 0 0.7\nrx 1 1.9\nrz 0 0.4\nrx 1 -0.6\nrx 0 2.2\n").unwrap();
    let mode = Mode::precoupled();
    let patch = common::smallest_patch(&ir, mode);
    let s = compile(&ir, &patch, mode).unwrap();
    if s.physical_two_qubit_ops() != 0 || s.precoupling.is_empty() {
        return fail(format!("{} physical, {} pre-placed", s.physical_two_qubit_ops(), s.precoupling.len()));
    }
    let report = verify_against_ideal(&ir, patch, mode).unwrap();
    if !report.pass || report.tvd >= TVD_TOL {
        return fail(format!("all-cancelled circuit tvd {:e}", report.tvd));
    }
    ok(format!(
        "{summary}; CZ-free circuit with {} pre-placed pairs: tvd {:.1e}",
        s.precoupling.len(),
        report.tvd
    ))
}

fn parser_round_trip() -> Outcome {
    for src in common::CORPUS {
        let ir = match parse_circuit(src) {
            Ok(ir) => ir,
            Err(e) => return fail(format!("{src:?}: {e}")),
        };
        match parse_circuit(&print_circuit(&ir)) {
            Ok(again) if again == ir => {}
            other => return fail(format!("{src:?} re-parsed as {other:?}")),
        }
    }
    for (src, line, column) in common::MALFORMED {
        match parse_circuit(src) {
            Err(Error::Parse(p)) | Err(Error::Semantic(p)) if (p.line, p.column) == (line, column) => {}
            other => return fail(format!("{src:?}: {other:?}, expected {line}:{column}")),
        }
    }
    ok(format!(
        "{} programs round-trip, {} malformed inputs located",
        common::CORPUS.len(),
        common::MALFORMED.len()
    ))
}

fn sampling_consistency() -> Outcome {
    let mut notes = Vec::new();
    for src in ["wires 1\nrx 0 1.1\nrz 0 0.4\nrx 0 0.9\n", "wires 2\nrx 0 pi/3\nrx 1 2.1\ncz 0 1\nrx 0 0.8\nrx 1 -1.3\n"] {
        let ir = parse_circuit(src).unwrap();
        let mode = Mode::Live;
        let patch = common::smallest_patch(&ir, mode);
        let s = compile(&ir, &patch, mode).unwrap();
        let exact = run_exhaustive(&s, Arc::clone(&patch), RunOptions::default()).unwrap();
        let a = run_sampled(&s, Arc::clone(&patch), 1234, SHOTS).unwrap();
        let b = run_sampled(&s, Arc::clone(&patch), 1234, SHOTS).unwrap();
        if a.counts != b.counts {
            return fail("same seed gave different counts");
        }
        let tvd = total_variation(&exact.distribution, &a.distribution);
        if tvd >= SAMPLED_TVD_TOL {
            return fail(format!("{} wire(s): tvd {tvd}", ir.wire_count));
        }
        notes.push(format!("{} wire(s): tvd {tvd:.4}", ir.wire_count));
    }
    ok(format!("{SHOTS} shots, reproducible; {}", notes.join(", ")))
}

fn report(n: usize, name: &str, limit: Option<Duration>, start: Instant, outcome: Outcome, all: &mut bool) {
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = outcome.pass && in_time;
    *all &= pass;
    let limit = limit.map(|l| format!(" / {} s", l.as_secs())).unwrap_or_default();
    let late = if in_time { "" } else { " over time limit" };
    println!(
        "[{}] {n}. {name}: {} ({:.2} s{limit}{late})",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64()
    );
}

fn main() -> ExitCode {
    let mut all = true;

    let t = Instant::now();
    report(1, "ground-state structure", Some(Duration::from_secs(10)), t, ground_state_structure(), &mut all);

    let t = Instant::now();
    report(2, "energy check", None, t, energy_check(), &mut all);

    let t = Instant::now();
    report(3, "gate-pattern certification", Some(Duration::from_secs(60)), t, pattern_certification(), &mut all);

    let t = Instant::now();
    let e2e = universality();
    report(4, "end-to-end universality", Some(Duration::from_secs(300)), t, e2e.outcome, &mut all);

    let t = Instant::now();
    report(5, "precoupled string-net amplitudes", None, t, string_net_property(&e2e.placements), &mut all);

    let t = Instant::now();
    report(6, "precoupled execution audit", None, t, precoupled_audit(&e2e.precoupled_audit), &mut all);

    let t = Instant::now();
    report(7, "parser round trip", None, t, parser_round_trip(), &mut all);

    let t = Instant::now();
    report(8, "sampling consistency", None, t, sampling_consistency(), &mut all);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
