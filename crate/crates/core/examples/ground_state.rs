//! The loop-gas ground state on small patches, built three ways.

use stringnet::lattice::LatticePatch;
use stringnet::resource::{energy, enumerate_loops, ground_state, stabilizer_project};
use stringnet::tensornet::contract_patch;

fn main() -> stringnet::Result<()> {
    for (rows, cols) in [(1, 1), (1, 2)] {
        let patch = LatticePatch::hexagonal(rows, cols)?;
        let loops = enumerate_loops(&patch)?;
        let g = ground_state(&patch)?;
        let projected = stabilizer_project(&patch)?;
        let contracted = contract_patch(&patch)?;
        let terms = patch.term_supports();
        let count = terms.plaquettes.len() + terms.vertices.len() + terms.edges.len();

        println!("{rows}x{cols}: {} qubits, {} loop configurations", patch.qubit_count(), loops.len());
        println!("  amplitude per loop  {:.6}", 1.0 / (loops.len() as f64).sqrt());
        println!("  energy              {:.10} (expected -{count})", energy(&g.state, &patch)?);
        println!("  |loop sum - projector|     {:.1e}", g.state.max_abs_diff(&projected.state));
        println!("  |loop sum - contraction|   {:.1e}", g.state.max_abs_diff(&contracted));
        for lp in loops.iter().take(4) {
            let occupied: Vec<usize> = lp.occupied_edges.iter().collect();
            println!("  loop on edges {occupied:?}");
        }
    }
    Ok(())
}
