//! Full duality sandwich for one state: the closed-form value pinned between
//! a verified dual witness (lower bound) and an explicit mixture of
//! k-supported vectors (upper bound).

use krobust::{canonicalize, certify};
use num_complex::Complex64;

fn main() {
    let raw: Vec<Complex64> = [0.7, 0.5, 0.3, 0.2, 0.13f64.sqrt()]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let state = canonicalize(&raw, 1e-9).expect("unit state");
    let k = 3;

    let cert = certify(&state, k, 1e-8).expect("certified");
    println!("n = {}, k = {k}", state.dim());
    println!("closed-form value   {}", cert.value);
    println!("dual objective      {}", cert.dual.objective);
    println!("primal slack trace  {}", cert.primal.s);
    println!();
    println!("branch ell          {}", cert.branch.ell);
    println!("witness kind        {:?}", cert.dual.kind);
    println!(
        "max k x k submatrix eigenvalue  {:.12} (feasible iff <= 1)",
        cert.dual_check.max_submatrix_eig
    );
    println!(
        "atoms: {} of support <= {k}, weights sum to {}",
        cert.primal.atoms.len(),
        cert.primal.weights.iter().sum::<f64>()
    );
    println!();
    println!("gaps (all must close within 1e-8):");
    println!("  |value - dual objective|  {:.3e}", cert.gaps.dual_objective);
    println!("  |value - slack trace|     {:.3e}", cert.gaps.primal_trace);
    println!("  reconstruction residual   {:.3e}", cert.gaps.reconstruction_residual);
    println!("  dual feasibility margin   {:.3e}", cert.gaps.dual_feasibility);
    println!("  |weight sum - 1|          {:.3e}", cert.gaps.weight_sum);
    println!("certified: {}", cert.certified);
}
