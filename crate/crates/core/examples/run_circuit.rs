//! Runs a compiled circuit exhaustively and by sampling, and compares both
//! with the ideal gate-model distribution.

use std::sync::Arc;

use stringnet::compiler::{compile, minimal_patch, parse_circuit, Mode};
use stringnet::harness::{ideal_distribution, run_exhaustive, run_sampled, total_variation, RunOptions};
use stringnet::lattice::LatticePatch;

fn main() -> stringnet::Result<()> {
    let ir = parse_circuit("wires 2\nrx 0 1.2\nrx 1 pi/3\ncz 0 1\nrx 0 0.5\n")?;
    let mode = Mode::Live;
    let (rows, cols) = minimal_patch(&ir, mode)?;
    let patch = Arc::new(LatticePatch::hexagonal(rows, cols)?);
    let schedule = compile(&ir, &patch, mode)?;

    let ideal = ideal_distribution(&ir)?;
    let exact = run_exhaustive(&schedule, Arc::clone(&patch), RunOptions::default())?;
    let sampled = run_sampled(&schedule, Arc::clone(&patch), 7, 20_000)?;

    println!("{rows}x{cols} patch, {} measurements, {} merged branches", exact.measurements, exact.branches.len());
    println!("outcome  ideal     exhaustive  sampled");
    for (i, p) in ideal.iter().enumerate() {
        println!("{i:02b}       {p:.6}  {:.6}    {:.4}", exact.distribution[i], sampled.distribution[i]);
    }
    println!("tvd exhaustive {:.1e}", total_variation(&ideal, &exact.distribution));
    println!("tvd sampled    {:.4}", total_variation(&ideal, &sampled.distribution));
    Ok(())
}
