//! Measures a single gate cell and prints the operator it induces on the
//! correlation-space bonds, then certifies every branch of the pattern.

use std::f64::consts::PI;

use stringnet::harness::{
    cell_fragment, fragment_branch, pattern_target, proportionality_deviation, standard_frames, verify_pattern,
};
use stringnet::lattice::Role;
use stringnet::patterns::{rot_z, BondFrame};

fn main() -> stringnet::Result<()> {
    let theta = PI / 5.0;
    let pattern = rot_z(theta);
    let cell = cell_fragment(&pattern)?;
    let frame = BondFrame::new(cell.patch.path_count());

    for h in [0, 1] {
        let branch = fragment_branch(&cell, &frame, |role| (role == Role::H).then_some(h))?;
        println!("outcome h = {h}, frame after cell {:?}", branch.frame.wire(cell.wires[0]));
        println!("{:.4}", branch.operator);
    }

    let report = verify_pattern(&pattern, &pattern_target(&pattern), &standard_frames(&pattern)?)?;
    println!(
        "rot_z({theta:.4}): {} frames, {} branches, {} with negated angle, worst deviation {:.1e}, pass {}",
        report.frames, report.branches, report.adapted_branches, report.worst_deviation, report.pass
    );
    let target = pattern_target(&pattern);
    println!("deviation of the target from itself {:.1e}", proportionality_deviation(&target, &target));
    Ok(())
}
