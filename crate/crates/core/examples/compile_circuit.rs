//! Parses a circuit and prints the measurement schedule in both modes.

use stringnet::compiler::{compile, minimal_patch, parse_circuit, print_schedule, Mode};
use stringnet::lattice::LatticePatch;

const CIRCUIT: &str = "\
wires 2
rx 0 pi/4
rz 1 0.3
cz 0 1
rx 1 -pi/8
";

fn main() -> stringnet::Result<()> {
    let ir = parse_circuit(CIRCUIT)?;
    for mode in [Mode::Live, Mode::precoupled()] {
        let (rows, cols) = minimal_patch(&ir, mode)?;
        let patch = LatticePatch::hexagonal(rows, cols)?;
        let schedule = compile(&ir, &patch, mode)?;
        println!(
            "== {} on {rows}x{cols}: {} measurements, {} physical CZ, {} pre-placed",
            mode.label(),
            schedule.measure_ops().count(),
            schedule.physical_two_qubit_ops(),
            schedule.precoupling.len()
        );
        print!("{}", print_schedule(&schedule));
    }
    Ok(())
}
