//! Direct use of the phase-1 simplex: find a non-negative point satisfying
//! equality and inequality constraints, or prove that none exists.

use krobust::lp::{solve_feasibility, LpProblem};

fn main() {
    // p1 + p2 + p3 = 1, p1 - p3 = 0.25, p2 <= 0.5
    let mut problem = LpProblem::new(3);
    problem.push_eq(vec![1.0, 1.0, 1.0], 1.0).unwrap();
    problem.push_eq(vec![1.0, 0.0, -1.0], 0.25).unwrap();
    problem.push_le(vec![0.0, 1.0, 0.0], 0.5).unwrap();

    let point = solve_feasibility(&problem, 1e-9).expect("feasible");
    println!("feasible point  {point:?}");
    println!("max violation   {:.3e}", problem.max_violation(&point));

    // Determinism: the pivot rule is Bland's, so reruns are bit-identical.
    let again = solve_feasibility(&problem, 1e-9).expect("feasible");
    println!("rerun identical {}", point == again);

    // An infeasible system is reported with its phase-1 residual.
    let mut bad = LpProblem::new(2);
    bad.push_eq(vec![1.0, 1.0], 1.0).unwrap();
    bad.push_le(vec![1.0, 1.0], 0.25).unwrap();
    match solve_feasibility(&bad, 1e-9) {
        Ok(p) => println!("unexpected point {p:?}"),
        Err(e) => println!("conflicting system: {e}"),
    }
}
