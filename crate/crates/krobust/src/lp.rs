//! Self-contained feasibility linear programming.
//!
//! The primal constructions only ever need a feasible point of
//! { p ≥ 0 : A_eq p = b_eq, A_le p ≤ b_le }, so this module implements just
//! phase 1 of the simplex method on a dense tableau, with Bland's rule for
//! anti-cycling. The arithmetic is generic: `f64` for the default numeric
//! pipeline, `BigRational` for the exact mode.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default pivot iteration cap.
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// Scalars the simplex tableau can be built over.
///
/// `pivot_epsilon` is the magnitude below which a tableau entry is treated
/// as zero when choosing pivots; exact types return a literal zero.
pub trait LpScalar: Clone + std::fmt::Debug + PartialOrd + Signed {
    fn pivot_epsilon() -> Self;
    fn approx_f64(&self) -> f64;
    fn is_valid(&self) -> bool;
}

impl LpScalar for f64 {
    fn pivot_epsilon() -> f64 {
        1e-11
    }
    fn approx_f64(&self) -> f64 {
        *self
    }
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
}

impl LpScalar for BigRational {
    fn pivot_epsilon() -> BigRational {
        BigRational::zero()
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn is_valid(&self) -> bool {
        true
    }
}

/// A feasibility problem over p ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<T> {
    num_vars: usize,
    equalities: Vec<(Vec<T>, T)>,
    inequalities: Vec<(Vec<T>, T)>,
}

impl<T: LpScalar> LpProblem<T> {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.equalities.len() + self.inequalities.len()
    }

    /// Add row·p = rhs.
    pub fn push_eq(&mut self, row: Vec<T>, rhs: T) -> Result<(), LpError> {
        self.check_row(&row, &rhs)?;
        self.equalities.push((row, rhs));
        Ok(())
    }

    /// Add row·p ≤ rhs.
    pub fn push_le(&mut self, row: Vec<T>, rhs: T) -> Result<(), LpError> {
        self.check_row(&row, &rhs)?;
        self.inequalities.push((row, rhs));
        Ok(())
    }

    fn check_row(&self, row: &[T], rhs: &T) -> Result<(), LpError> {
        if row.len() != self.num_vars {
            return Err(LpError::RowLength {
                row_len: row.len(),
                num_vars: self.num_vars,
            });
        }
        if !rhs.is_valid() || row.iter().any(|c| !c.is_valid()) {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }

    /// Largest constraint violation of `point`: max over p ≥ 0, equality
    /// residuals, and inequality excesses. Used to re-check solver output
    /// independently of the tableau state.
    pub fn max_violation(&self, point: &[T]) -> T {
        let mut worst = T::zero();
        let mut bump = |v: T| {
            if v > worst {
                worst = v;
            }
        };
        for p in point {
            bump(-p.clone());
        }
        for (row, rhs) in &self.equalities {
            bump((dot(row, point) - rhs.clone()).abs());
        }
        for (row, rhs) in &self.inequalities {
            bump(dot(row, point) - rhs.clone());
        }
        worst
    }
}

fn dot<T: LpScalar>(row: &[T], point: &[T]) -> T {
    row.iter()
        .zip(point)
        .fold(T::zero(), |acc, (c, p)| acc + c.clone() * p.clone())
}

/// Failure modes of the feasibility solve.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row has {row_len} coefficients, problem has {num_vars} variables")]
    RowLength { row_len: usize, num_vars: usize },

    #[error("non-finite coefficient in constraint")]
    NonFinite,

    #[error("problem is infeasible: phase-1 optimum {residual:.3e} exceeds the tolerance")]
    Infeasible { residual: f64 },

    #[error("simplex exceeded the iteration cap of {limit}")]
    IterationLimit { limit: usize },

    #[error("solver returned a point violating constraints by {violation:.3e}; this is a bug")]
    VerificationFailed { violation: f64 },
}

/// Find p ≥ 0 satisfying all constraints of `problem`, or prove phase-1
/// infeasibility above `tolerance`. Uses [`DEFAULT_MAX_ITERATIONS`].
pub fn solve_feasibility<T: LpScalar>(
    problem: &LpProblem<T>,
    tolerance: T,
) -> Result<Vec<T>, LpError> {
    solve_feasibility_capped(problem, tolerance, DEFAULT_MAX_ITERATIONS)
}

/// [`solve_feasibility`] with an explicit pivot iteration cap.
pub fn solve_feasibility_capped<T: LpScalar>(
    problem: &LpProblem<T>,
    tolerance: T,
    max_iterations: usize,
) -> Result<Vec<T>, LpError> {
    let point = Tableau::build(problem).solve(&tolerance, max_iterations)?;
    let violation = problem.max_violation(&point);
    if violation > tolerance {
        return Err(LpError::VerificationFailed {
            violation: violation.approx_f64(),
        });
    }
    Ok(point)
}

/// Dense phase-1 tableau.
///
/// Layout: columns [0, n_vars) are the problem variables, [n_vars,
/// n_vars + n_slack) the inequality slacks, then one artificial column per
/// row that needs one, then the rhs. Rows are normalized to rhs ≥ 0 before
/// basis setup; a slack serves as the initial basic variable where its
/// coefficient stayed +1, an artificial otherwise.
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    cost: Vec<T>,
    basis: Vec<usize>,
    n_vars: usize,
    first_artificial: usize,
    n_cols: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn build(problem: &LpProblem<T>) -> Self {
        let n_vars = problem.num_vars;
        let n_slack = problem.inequalities.len();
        let m = problem.num_constraints();

        // (coefficients, rhs, slack column or none), rhs made non-negative
        let mut staged: Vec<(Vec<T>, T, Option<usize>)> = Vec::with_capacity(m);
        for (row, rhs) in &problem.equalities {
            staged.push((row.clone(), rhs.clone(), None));
        }
        for (i, (row, rhs)) in problem.inequalities.iter().enumerate() {
            staged.push((row.clone(), rhs.clone(), Some(n_vars + i)));
        }

        let mut needs_artificial = Vec::with_capacity(m);
        for (row, rhs, slack) in staged.iter_mut() {
            let mut slack_coeff_positive = slack.is_some();
            if *rhs < T::zero() {
                for c in row.iter_mut() {
                    *c = -c.clone();
                }
                *rhs = -rhs.clone();
                slack_coeff_positive = false;
            }
            needs_artificial.push(!slack_coeff_positive);
        }

        let n_artificial = needs_artificial.iter().filter(|&&b| b).count();
        let first_artificial = n_vars + n_slack;
        let n_cols = first_artificial + n_artificial + 1;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_artificial = first_artificial;
        for (i, (coeffs, rhs, slack)) in staged.into_iter().enumerate() {
            let mut row = vec![T::zero(); n_cols];
            let negated = needs_artificial[i] && slack.is_some();
            for (j, c) in coeffs.into_iter().enumerate() {
                row[j] = c;
            }
            if let Some(s) = slack {
                row[s] = if negated { -T::one() } else { T::one() };
            }
            row[n_cols - 1] = rhs;
            if needs_artificial[i] {
                row[next_artificial] = T::one();
                basis.push(next_artificial);
                next_artificial += 1;
            } else {
                basis.push(slack.expect("slack-basic row"));
            }
            rows.push(row);
        }

        // Phase-1 reduced costs: unit cost on artificials, priced out against
        // the rows where they start basic.
        let mut cost = vec![T::zero(); n_cols];
        for c in &mut cost[first_artificial..n_cols - 1] {
            *c = T::one();
        }
        for (i, &b) in basis.iter().enumerate() {
            if b >= first_artificial {
                for j in 0..n_cols {
                    cost[j] = cost[j].clone() - rows[i][j].clone();
                }
            }
        }

        Tableau {
            rows,
            cost,
            basis,
            n_vars,
            first_artificial,
            n_cols,
        }
    }

    fn solve(mut self, tolerance: &T, max_iterations: usize) -> Result<Vec<T>, LpError> {
        let eps = T::pivot_epsilon();
        let m = self.rows.len();
        let rhs_col = self.n_cols - 1;
        // Artificial columns are dropped from entering consideration once
        // they leave the basis; track liveness per column.
        let mut live = vec![true; self.n_cols - 1];

        for _ in 0..max_iterations {
            // Bland: entering = smallest-index live column with negative
            // reduced cost (artificials never re-enter).
            let entering = (0..self.first_artificial)
                .find(|&j| live[j] && self.cost[j] < -eps.clone());
            let Some(col) = entering else {
                return self.extract(tolerance);
            };

            // Ratio test; ties broken by smallest basis variable index (Bland).
            let mut pivot_row: Option<usize> = None;
            for i in 0..m {
                let a = &self.rows[i][col];
                if *a <= eps {
                    continue;
                }
                let better = match pivot_row {
                    None => true,
                    Some(r) => {
                        let lhs = self.rows[i][rhs_col].clone() * self.rows[r][col].clone();
                        let rhs = self.rows[r][rhs_col].clone() * self.rows[i][col].clone();
                        lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[r])
                    }
                };
                if better {
                    pivot_row = Some(i);
                }
            }
            let Some(row) = pivot_row else {
                // Unbounded phase-1 objective cannot happen (it is bounded
                // below by 0); an empty column means the reduced cost sign
                // was rounding noise, so treat the column as unusable.
                live[col] = false;
                continue;
            };

            let leaving = self.basis[row];
            if leaving >= self.first_artificial {
                live[leaving] = false;
            }
            self.pivot(row, col);
        }
        Err(LpError::IterationLimit {
            limit: max_iterations,
        })
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..self.n_cols {
                let delta = factor.clone() * self.rows[row][j].clone();
                self.rows[i][j] = self.rows[i][j].clone() - delta;
            }
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for j in 0..self.n_cols {
                let delta = factor.clone() * self.rows[row][j].clone();
                self.cost[j] = self.cost[j].clone() - delta;
            }
        }
        self.basis[row] = col;
    }

    fn extract(self, tolerance: &T) -> Result<Vec<T>, LpError> {
        let rhs_col = self.n_cols - 1;
        // Recompute the phase-1 objective from scratch: the sum of the basic
        // artificial levels, independent of the incrementally updated cost row.
        let mut residual = T::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if b >= self.first_artificial {
                residual = residual + self.rows[i][rhs_col].clone();
            }
        }
        if residual > *tolerance {
            return Err(LpError::Infeasible {
                residual: residual.approx_f64(),
            });
        }
        let mut point = vec![T::zero(); self.n_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                let value = self.rows[i][rhs_col].clone();
                point[b] = if value < T::zero() { T::zero() } else { value };
            }
        }
        Ok(point)
    }
}
