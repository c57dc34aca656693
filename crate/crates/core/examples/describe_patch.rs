//! Builds a brick-wall patch and prints its counts and Hamiltonian supports.
//!
//! cargo run --example describe_patch -- 3 4

use stringnet::lattice::LatticePatch;

fn main() -> stringnet::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("dimension"));
    let rows = args.next().unwrap_or(3);
    let cols = args.next().unwrap_or(2);
    let patch = LatticePatch::hexagonal(rows, cols)?;

    println!("{rows}x{cols} patch");
    println!("  vertices     {}", patch.vertices().len());
    println!("  edges        {}", patch.edges().len());
    println!("  qubits       {}", patch.qubit_count());
    println!("  plaquettes   {}", patch.plaquettes().len());
    println!("  boundary     {}", patch.boundary_legs().len());
    println!("  cycle rank   {}", patch.cycle_rank());
    println!("  wires        {}", patch.wire_count());

    let terms = patch.term_supports();
    println!(
        "  terms        {} plaquette, {} vertex, {} edge",
        terms.plaquettes.len(),
        terms.vertices.len(),
        terms.edges.len()
    );
    if let Some(p) = terms.plaquettes.first() {
        println!("  first plaquette acts on qubits {p:?}");
    }
    Ok(())
}
