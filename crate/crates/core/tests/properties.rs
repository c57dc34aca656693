mod common;

use std::collections::HashSet;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use stringnet::compiler::{compile, Angle, CircuitIR, Gate, Mode, Op};
use stringnet::harness::{run_exhaustive, verify_against_ideal, RunOptions};
use stringnet::lattice::LatticePatch;
use stringnet::oracle::{MeasurementBasis, C64};
use stringnet::patterns::{pauli_x, pauli_z, type_one_encoder, BondFrame, Encoding};
use stringnet::resource::enumerate_loops;

fn deviation(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    stringnet::harness::proportionality_deviation(a, b)
}

fn bond_cz(paths: usize, a: usize, b: usize) -> DMatrix<C64> {
    let n = 1 << paths;
    DMatrix::from_fn(n, n, |r, c| {
        let bit = |p: usize| (c >> (paths - 1 - p)) & 1;
        if r != c {
            C64::new(0.0, 0.0)
        } else if bit(a) == 1 && bit(b) == 1 {
            C64::new(-1.0, 0.0)
        } else {
            C64::new(1.0, 0.0)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn patch_counts_are_consistent(rows in 1usize..7, cols in 1usize..7) {
        let p = LatticePatch::hexagonal(rows, cols).unwrap();
        prop_assert_eq!(p.qubit_count(), 2 * p.edges().len());
        prop_assert!(p.vertices().iter().all(|v| (1..=3).contains(&v.degree)));
        prop_assert!(p.plaquettes().iter().all(|pl| pl.edges.len() == 6));
        prop_assert_eq!(p.cycle_rank(), p.plaquettes().len());
        prop_assert_eq!(p.connected_components(), 1);
        for s in 0..p.qubit_count() {
            prop_assert_eq!(p.partner(p.partner(s)), s);
            prop_assert_eq!(p.site_edge(s), p.site_edge(p.partner(s)));
            prop_assert_ne!(p.site_vertex(s), p.site_vertex(p.partner(s)));
        }
    }

    #[test]
    fn loop_configurations_are_closed_and_distinct(rows in 1usize..4, cols in 1usize..4) {
        let p = LatticePatch::hexagonal(rows, cols).unwrap();
        let loops = enumerate_loops(&p).unwrap();
        prop_assert_eq!(loops.len(), 1usize << p.cycle_rank());
        let mut seen = HashSet::new();
        for lp in &loops {
            prop_assert!(lp.is_closed(&p));
            let key: Vec<usize> = lp.occupied_edges.iter().collect();
            prop_assert!(seen.insert(key));
        }
    }

    #[test]
    fn bases_are_orthonormal(theta in -10.0f64..10.0, family in 0u8..4) {
        let basis = match family {
            0 => MeasurementBasis::Z,
            1 => MeasurementBasis::X,
            2 => MeasurementBasis::ZRot(theta),
            _ => MeasurementBasis::XRot(theta),
        };
        let v = basis.vectors();
        for i in 0..2 {
            for j in 0..2 {
                let ip = v[i][0].conj() * v[j][0] + v[i][1].conj() * v[j][1];
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn type_one_frames_act_as_logical_paulis(bits in 0u8..16) {
        let mut f = BondFrame::new(2);
        f.x = vec![bits & 1, bits >> 1 & 1];
        f.z = vec![bits >> 2 & 1, bits >> 3 & 1];
        let view = f.wire(0);
        let encoded = f.operator(&[0, 1]) * type_one_encoder(1);
        if view.encoding == Encoding::I {
            let mut logical = DMatrix::identity(2, 2);
            if view.r == 1 { logical = pauli_z() * logical; }
            if view.v == 1 { logical = pauli_x() * logical; }
            prop_assert!(deviation(&encoded, &(type_one_encoder(1) * logical)) < 1e-12);
        } else {
            // Type II lands on the odd-parity bond states.
            for c in 0..2 {
                prop_assert!(encoded[(0, c)].norm() < 1e-12 && encoded[(3, c)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn couple_rule_is_cz_conjugation(bits in 0u16..256) {
        let mut f = BondFrame::new(4);
        f.x = (0..4).map(|k| (bits >> k & 1) as u8).collect();
        f.z = (0..4).map(|k| (bits >> (k + 4) & 1) as u8).collect();
        let cz = bond_cz(4, 1, 2);
        let conjugated = &cz * f.operator(&[0, 1, 2, 3]) * &cz;
        let mut g = f.clone();
        g.couple(1, 2);
        prop_assert!(deviation(&conjugated, &g.operator(&[0, 1, 2, 3])) < 1e-12);
    }

    #[test]
    fn schedules_measure_every_site_once(seed in 0u64..1000, precoupled in any::<bool>()) {
        let ir = common::random_circuit(&mut common::rng(seed), 4);
        let mode = if precoupled { Mode::precoupled() } else { Mode::Live };
        let patch = common::smallest_patch(&ir, mode);
        let s = compile(&ir, &patch, mode).unwrap();
        let mut seen = vec![false; patch.qubit_count()];
        for m in s.measure_ops() {
            prop_assert!(!seen[m.site], "site {} measured twice", m.site);
            seen[m.site] = true;
            for f in &m.flips {
                prop_assert!(seen[f.source]);
            }
        }
        prop_assert!(seen.iter().all(|&b| b));
        if precoupled {
            prop_assert_eq!(s.physical_two_qubit_ops(), 0);
        } else {
            prop_assert_eq!(s.physical_two_qubit_ops(), ir.cz_count());
        }
        for op in s.ops() {
            if let Op::Couple(c) = op {
                prop_assert_eq!(c.paths[1], c.paths[0] + 1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn single_wire_circuits_match_ideal(
        gates in proptest::collection::vec((any::<bool>(), -PI..PI), 1..4),
        precoupled in any::<bool>(),
    ) {
        let mut ir = CircuitIR::new(1);
        for (z, theta) in gates {
            let angle = Angle::from_radians(theta);
            ir.gates.push(if z { Gate::RotZ { wire: 0, angle } } else { Gate::RotX { wire: 0, angle } });
        }
        let mode = if precoupled { Mode::precoupled() } else { Mode::Live };
        let report = verify_against_ideal(&ir, common::smallest_patch(&ir, mode), mode).unwrap();
        prop_assert!(report.pass, "tvd {}", report.tvd);
    }
}

#[test]
fn branch_probabilities_sum_to_one() {
    for seed in 0..6 {
        let ir = common::random_circuit(&mut common::rng(seed), 3);
        let patch = common::smallest_patch(&ir, Mode::Live);
        let s = compile(&ir, &patch, Mode::Live).unwrap();
        let run = run_exhaustive(&s, Arc::clone(&patch), RunOptions::default()).unwrap();
        assert!((run.total_probability - 1.0).abs() < 1e-10, "{}", run.total_probability);
        let p: f64 = run.branches.iter().map(|b| b.probability).sum();
        assert!((p - 1.0).abs() < 1e-10);
    }
}

#[test]
fn deterministic_circuits_decode_identically() {
    for src in ["wires 1\nrx 0 pi\n", "wires 2\nrx 0 pi\nrz 1 0.7\ncz 0 1\n", "wires 1\nrx 0 pi/2\nrz 0 pi\nrx 0 pi/2\n"] {
        let ir = stringnet::compiler::parse_circuit(src).unwrap();
        for mode in [Mode::Live, Mode::precoupled()] {
            let patch = common::smallest_patch(&ir, mode);
            let s = compile(&ir, &patch, mode).unwrap();
            let run = run_exhaustive(&s, patch, RunOptions::default()).unwrap();
            let first = &run.branches[0].decoded;
            assert!(run.branches.iter().all(|b| &b.decoded == first), "{src:?}");
        }
    }
}
