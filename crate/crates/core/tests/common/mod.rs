#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stringnet::compiler::{minimal_patch, Angle, CircuitIR, Gate, Mode};
use stringnet::lattice::LatticePatch;

/// Well-formed programs. Printing and re-parsing any of them must give the
/// same circuit.
pub const CORPUS: [&str; 30] = [
    "wires 1\n",
    "wires 1\nrz 0 pi\n",
    "wires 1\nrx 0 pi/2\n",
    "wires 1\nrx 0 -pi/4\n",
    "wires 1\nrz 0 3*pi/8\n",
    "wires 1\nrz 0 -5*pi/8\n",
    "wires 1\nrx 0 0.25\n",
    "wires 1\nrx 0 -1.5\n",
    "wires 1\nrz 0 1e-3\n",
    "wires 1\nid 0\n",
    "wires 1\nrx 0 pi/3\nrz 0 pi/5\nrx 0 2*pi/7\nrz 0 0.1\n",
    "# leading comment\nwires 1\nrx 0 pi # trailing\n",
    "\n\n   wires   1\n\n  rz   0   pi/2  \n",
    "wires 2\n",
    "wires 2\ncz 0 1\n",
    "wires 2\ncz 1 0\n",
    "wires 2\nrx 0 pi/2\nrx 1 pi/2\ncz 0 1\n",
    "wires 2\nrz 0 0.3\nrx 1 0.4\ncz 0 1\nrx 0 0.5\nrz 1 0.6\n",
    "wires 2\nid 0\nid 1\nrx 1 -pi\n",
    "wires 3\ncz 1 2\nrx 0 pi/8\n",
    "wires 3\nrx 0 1\nrx 1 2\nrx 2 3\ncz 0 1\ncz 1 2\n",
    "wires 4\nrz 3 -0.75\ncz 2 3\n",
    "wires 1\nrx 0 0\n",
    "wires 1\nrz 0 -0.0\n",
    "wires 1\nrx 0 12.5\n",
    "wires 1\nrz 0 16*pi/16\n",
    "wires 2\nrx 0 pi/16\nrx 0 pi/16\nrx 0 pi/16\nrx 0 pi/16\n",
    "wires 1\nrx 0 7*pi\n",
    "wires 5\ncz 3 4\ncz 0 1\nrz 4 pi/32\n",
    "wires 2\t# tabs\nrx\t1\tpi/2\n",
];

/// Malformed programs with the location the error must point at.
pub const MALFORMED: [(&str, usize, usize); 16] = [
    ("", 1, 1),
    ("# only a comment\n", 1, 1),
    ("rx 0 pi\n", 1, 1),
    ("wires\n", 1, 6),
    ("wires 0\n", 1, 7),
    ("wires two\n", 1, 7),
    ("wires 1\nwires 2\n", 2, 1),
    ("wires 1\nrx 1 pi\n", 2, 4),
    ("wires 1\nrx 0\n", 2, 5),
    ("wires 1\nrx 0 pie\n", 2, 6),
    ("wires 1\nrx 0 pi extra\n", 2, 9),
    ("wires 1\nry 0 pi\n", 2, 1),
    ("wires 2\ncz 0 0\n", 2, 6),
    ("wires 3\ncz 0 2\n", 2, 4),
    ("wires 1\nrz 0 pi/0\n", 2, 6),
    ("wires 1\n  rx 0 inf\n", 2, 8),
];

fn random_angle(rng: &mut ChaCha8Rng) -> Angle {
    if rng.random::<bool>() {
        Angle::PiFraction {
            num: rng.random_range(-15..=15),
            den: 8,
        }
    } else {
        Angle::from_radians(rng.random_range(-PI..PI))
    }
}

/// Random circuit on 1 or 2 wires: at most `depth` rotations per wire and,
/// on two wires, at most one CZ.
pub fn random_circuit(rng: &mut ChaCha8Rng, depth: usize) -> CircuitIR {
    let wires = rng.random_range(1..=2);
    let mut ir = CircuitIR::new(wires);
    let mut per_wire = vec![0; wires];
    let mut cz_left = wires == 2;
    let total = rng.random_range(1..=depth * wires);
    for _ in 0..total {
        if cz_left && rng.random_range(0..4) == 0 {
            ir.gates.push(Gate::Cz { a: 0, b: 1 });
            cz_left = false;
            continue;
        }
        let wire = rng.random_range(0..wires);
        if per_wire[wire] == depth {
            continue;
        }
        per_wire[wire] += 1;
        let angle = random_angle(rng);
        ir.gates.push(if rng.random::<bool>() {
            Gate::RotZ { wire, angle }
        } else {
            Gate::RotX { wire, angle }
        });
    }
    ir
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn smallest_patch(ir: &CircuitIR, mode: Mode) -> Arc<LatticePatch> {
    let (r, c) = minimal_patch(ir, mode).expect("layout");
    Arc::new(LatticePatch::hexagonal(r, c).expect("patch"))
}

/// `⟨ξ|G'⟩` computed by contracting the patch with every qubit projected on
/// the bits of `bits`, CZ pairs applied just before their first qubit.
pub fn swept_amplitude(
    patch: &Arc<LatticePatch>,
    pairs: &[(usize, usize)],
    bits: &dyn Fn(usize) -> u8,
) -> num_complex::Complex64 {
    use stringnet::oracle::MeasurementBasis;
    use stringnet::tensornet::{CorrelationState, SweepPlan};
    let plan = SweepPlan::full(Arc::clone(patch)).expect("plan");
    let mut state = CorrelationState::new(plan);
    let mut order: Vec<usize> = (0..patch.qubit_count()).collect();
    order.sort_by_key(|&s| patch.site_column(s));
    let mut applied = vec![false; pairs.len()];
    for s in order {
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if !applied[k] && (a == s || b == s) {
                state.apply_cz(a, b).expect("cz");
                applied[k] = true;
            }
        }
        state
            .apply_bra(s, MeasurementBasis::Z.bra(bits(s)))
            .expect("projection");
    }
    state.entries().iter().map(|e| e.1).sum()
}
