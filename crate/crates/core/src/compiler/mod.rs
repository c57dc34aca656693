//! Circuit programs and their compilation into measurement schedules.

pub mod circuit;
pub mod schedule;

pub use circuit::{parse_circuit, print_circuit, Angle, CircuitIR, Gate};
pub use schedule::{
    compile, init_ops, measure_op, minimal_patch, print_schedule, step_ops, AngleRule, CellInfo, CoupleOp, Flip, FrameBit,
    MeasureOp, MeasurementSchedule, Mode, Op, Readout,
};
