//! Builds CZ bonds into the resource state and checks that it is still a
//! loop superposition, with signs from the pre-placed pairs.

use stringnet::lattice::LatticePatch;
use stringnet::resource::{apply_precoupling, ground_state, LoopSuperposition};

fn main() -> stringnet::Result<()> {
    let patch = LatticePatch::hexagonal(1, 2)?;
    let pairs = [(0, 5), (3, 9)];
    let g = ground_state(&patch)?;
    let coupled = apply_precoupling(&g, &pairs)?;

    let sup = LoopSuperposition::plain(&patch)?.with_precoupling(&pairs)?;
    for (lp, a) in sup.loops.iter().zip(&sup.amplitudes) {
        println!("loop {:?}: {a:.4}", lp.occupied_edges.iter().collect::<Vec<_>>());
    }
    let dense = sup.to_dense(patch.qubit_count())?;
    println!("dense vs loop form {:.1e}", coupled.state.max_abs_diff(&dense));

    let nonzero = coupled.state.amplitudes().iter().filter(|a| a.norm() > 1e-12).count();
    println!("{nonzero} nonzero amplitudes out of {}", coupled.state.amplitudes().len());
    Ok(())
}
