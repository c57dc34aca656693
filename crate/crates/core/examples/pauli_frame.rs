//! Tracking byproducts through couplings and adaptive angles.

use stringnet::patterns::{BondFrame, RoleAngleRule};

fn main() {
    // Two wires, four paths.
    let mut frame = BondFrame::new(4);
    frame.x[0] = 1;
    frame.x[1] = 1;
    frame.z[2] = 1;
    println!("before: {:?}", frame.wires());

    // CZ between the upper paths of the two wires.
    frame.couple(0, 2);
    println!("after coupling paths 0 and 2: {:?}", frame.wires());

    let theta = 0.3;
    println!(
        "angle on wire 0: x-rule {:+.2}, z-rule {:+.2}",
        frame.adapt(RoleAngleRule::NegateOnV, 0, theta),
        frame.adapt(RoleAngleRule::NegateOnR, 0, theta)
    );

    // A type II encoding: the two paths of a wire disagree in x.
    frame.x[1] = 0;
    let w = frame.wire(0);
    println!("wire 0 now {:?}, byproduct\n{}", w, w.byproduct());
}
