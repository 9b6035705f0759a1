//! Primal decompositions: explicit mixtures of k-supported vectors proving
//! the robustness upper bound, plus the end-to-end [`certify`] entry point.
//!
//! Every decomposition here satisfies vvᵀ + S = Σ_b p_b x_b x_bᵀ with each
//! atom x_b supported on at most k coordinates and ‖x_b‖² = β², so that
//! σ = S/tr(S) is a k-incoherent state and s = tr(S) realizes the robustness.
//! The ℓ = k branch is written down in closed form; the ℓ < k branches find
//! their weights with a feasibility LP over k-subsets whose solvability is
//! guaranteed by the closed-form proof.

use crate::branch::{boundary_margin, BranchData};
use crate::closed_form::robustness_value;
use crate::dual::{build_dual_witness, verify_dual_witness, DualVerification, DualWitness};
use crate::lp::{solve_feasibility_capped, LpError, LpProblem};
use crate::state::CanonicalState;
use crate::util::{binomial, Combinations};
use crate::{Error, Result, BOUNDARY_FLAG_TOLERANCE};
use nalgebra::DMatrix;

/// Entrywise tolerance for the sign preconditions of [`decompose_into_i2`].
const I2_PRECONDITION_TOLERANCE: f64 = 1e-12;

/// Knobs for the feasibility LP behind the ℓ < k constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct LpConfig {
    /// Constraint tolerance passed to the simplex solve.
    pub tolerance: f64,
    /// Pivot iteration cap.
    pub max_iterations: usize,
    /// Hard cap on the number of k-subset variables C(n, k).
    pub max_atoms: usize,
    /// Weights below this are pruned and the rest renormalized.
    pub prune_threshold: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            tolerance: 1e-9,
            max_iterations: 1_000_000,
            max_atoms: 200_000,
            prune_threshold: 1e-12,
        }
    }
}

/// One 2×2-supported piece of the pairwise split: the matrix with
/// |coupling| at (i,i) and (j,j) and coupling at (i,j) and (j,i). It is
/// diagonally dominant, hence positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPart {
    pub i: usize,
    pub j: usize,
    /// The off-diagonal entry s_{ij} (non-positive for legal inputs).
    pub coupling: f64,
}

impl PairPart {
    /// Dense n×n form of this part.
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        m[(self.i, self.i)] = self.coupling.abs();
        m[(self.j, self.j)] = self.coupling.abs();
        m[(self.i, self.j)] = self.coupling;
        m[(self.j, self.i)] = self.coupling;
        m
    }
}

/// A matrix written as Σ G^{(i,j)} + D with every G 2×2-supported PSD and D
/// non-negative diagonal, certifying membership in the 2-incoherent cone.
#[derive(Debug, Clone, PartialEq)]
pub struct I2Decomposition {
    pub pair_parts: Vec<PairPart>,
    /// Diagonal of D.
    pub diagonal_part: Vec<f64>,
}

impl I2Decomposition {
    pub fn dim(&self) -> usize {
        self.diagonal_part.len()
    }

    /// Σ G^{(i,j)} + D.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            &self.diagonal_part,
        ));
        for part in &self.pair_parts {
            m[(part.i, part.i)] += part.coupling.abs();
            m[(part.j, part.j)] += part.coupling.abs();
            m[(part.i, part.j)] += part.coupling;
            m[(part.j, part.i)] += part.coupling;
        }
        m
    }
}

/// Split a symmetric matrix with non-negative diagonal, non-positive
/// off-diagonal, and non-negative row sums into 2×2-supported PSD parts plus
/// a non-negative diagonal, exactly.
pub fn decompose_into_i2(s: &DMatrix<f64>) -> Result<I2Decomposition> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected square",
            s.nrows(),
            s.ncols()
        )));
    }
    for i in 0..n {
        if s[(i, i)] < -I2_PRECONDITION_TOLERANCE {
            return Err(Error::NegativeDiagonal {
                row: i,
                value: s[(i, i)],
            });
        }
        for j in i + 1..n {
            let delta = (s[(i, j)] - s[(j, i)]).abs();
            if delta > I2_PRECONDITION_TOLERANCE {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    delta,
                });
            }
            if s[(i, j)] > I2_PRECONDITION_TOLERANCE {
                return Err(Error::PositiveOffDiagonal {
                    row: i,
                    col: j,
                    value: s[(i, j)],
                });
            }
        }
    }

    let mut pair_parts = Vec::new();
    let mut diagonal_part = Vec::with_capacity(n);
    for i in 0..n {
        // D_ii = S_ii − Σ_{j≠i} |s_ij| equals the row sum for legal signs and
        // keeps the reconstruction exact either way.
        let mut remaining = s[(i, i)];
        for j in 0..n {
            if j != i {
                remaining -= s[(i, j)].abs();
            }
        }
        if remaining < -I2_PRECONDITION_TOLERANCE {
            return Err(Error::NegativeRowSum {
                row: i,
                value: remaining,
            });
        }
        diagonal_part.push(remaining.max(0.0));
        for j in i + 1..n {
            if s[(i, j)] != 0.0 {
                pair_parts.push(PairPart {
                    i,
                    j,
                    coupling: s[(i, j)],
                });
            }
        }
    }

    Ok(I2Decomposition {
        pair_parts,
        diagonal_part,
    })
}

/// The primal side of a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDecomposition {
    /// tr(slack), the realized robustness.
    pub s: f64,
    /// S = Σ p_b x_b x_bᵀ − vvᵀ, block O_{ℓ−1} ⊕ S′.
    pub slack: DMatrix<f64>,
    /// Vectors with at most k non-zero entries, each of norm β.
    pub atoms: Vec<Vec<f64>>,
    /// Probability weights matching `atoms`.
    pub weights: Vec<f64>,
    /// Pairwise split showing slack/tr(slack) is 2-incoherent.
    pub sigma_parts: I2Decomposition,
}

impl PrimalDecomposition {
    /// Σ p_b x_b x_bᵀ.
    pub fn mixture(&self) -> DMatrix<f64> {
        let n = self.slack.nrows();
        let mut m = DMatrix::zeros(n, n);
        for (x, p) in self.atoms.iter().zip(&self.weights) {
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += p * x[i] * x[j];
                }
            }
        }
        m
    }

    /// Max-abs entry of Σ p x xᵀ − (vvᵀ + S).
    pub fn reconstruction_residual(&self, state: &CanonicalState) -> f64 {
        let n = self.slack.nrows();
        let v = state.entries();
        let mix = self.mixture();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((mix[(i, j)] - v[i] * v[j] - self.slack[(i, j)]).abs());
            }
        }
        worst
    }

    /// Largest atom support size.
    pub fn max_support(&self) -> usize {
        self.atoms
            .iter()
            .map(|x| x.iter().filter(|e| **e != 0.0).count())
            .max()
            .unwrap_or(0)
    }
}

fn trivial_decomposition(state: &CanonicalState) -> Result<PrimalDecomposition> {
    let n = state.dim();
    let slack = DMatrix::zeros(n, n);
    let sigma_parts = decompose_into_i2(&slack)?;
    Ok(PrimalDecomposition {
        s: 0.0,
        slack,
        atoms: vec![state.entries().to_vec()],
        weights: vec![1.0],
        sigma_parts,
    })
}

/// Closed-form construction for ℓ = k: one atom u_j per tail index j ≥ k,
/// u_j = Σ_{i<k} √(v_j/s_k)·v_i·eᵢ + √(s_k·v_j)·e_j, rescaled to norm β.
pub fn build_primal_ell_eq_k(
    state: &CanonicalState,
    branch: &BranchData,
) -> Result<PrimalDecomposition> {
    if branch.ell != branch.k {
        return Err(Error::BranchMismatch {
            expected: branch.ell,
            required: "ell = k",
        });
    }
    let n = state.dim();
    let k = branch.k;
    let v = state.entries();
    let s_k = branch.tail_sum(k);
    if s_k == 0.0 {
        // state is already k-incoherent
        return trivial_decomposition(state);
    }

    let beta = branch.beta_sq.sqrt();
    let mut atoms = Vec::with_capacity(n - k + 1);
    let mut weights = Vec::with_capacity(n - k + 1);
    for j in k - 1..n {
        if v[j] == 0.0 {
            continue;
        }
        let mut u = vec![0.0; n];
        let head_scale = (v[j] / s_k).sqrt();
        for i in 0..k - 1 {
            u[i] = head_scale * v[i];
        }
        u[j] = (s_k * v[j]).sqrt();
        let norm_sq: f64 = u.iter().map(|x| x * x).sum();
        let scale = beta / norm_sq.sqrt();
        for x in u.iter_mut() {
            *x *= scale;
        }
        atoms.push(u);
        weights.push(norm_sq / branch.beta_sq);
    }

    let mut slack = DMatrix::zeros(n, n);
    for i in k - 1..n {
        for j in k - 1..n {
            slack[(i, j)] = if i == j {
                v[i] * (s_k - v[i])
            } else {
                -v[i] * v[j]
            };
        }
    }
    let s = slack.trace();
    let sigma_parts = decompose_into_i2(&slack)?;
    Ok(PrimalDecomposition {
        s,
        slack,
        atoms,
        weights,
        sigma_parts,
    })
}

/// LP construction for ℓ = 1: weights over all k-subsets with atom entries
/// s₁/k, matching first moments exactly and second moments from below.
pub fn build_primal_ell_eq_1(
    state: &CanonicalState,
    branch: &BranchData,
    lp_config: &LpConfig,
) -> Result<PrimalDecomposition> {
    if branch.ell != 1 {
        return Err(Error::BranchMismatch {
            expected: branch.ell,
            required: "ell = 1",
        });
    }
    build_primal_lp(state, branch, lp_config)
}

/// LP construction for 1 < ℓ < k: the ℓ = 1 machinery on the tail
/// (v_ℓ,…,v_n) with k′ = k−ℓ+1 slots of size s_ℓ/k′, each atom lifted by the
/// untouched head (v₁,…,v_{ℓ−1}).
pub fn build_primal_middle(
    state: &CanonicalState,
    branch: &BranchData,
    lp_config: &LpConfig,
) -> Result<PrimalDecomposition> {
    if branch.ell <= 1 || branch.ell >= branch.k {
        return Err(Error::BranchMismatch {
            expected: branch.ell,
            required: "1 < ell < k",
        });
    }
    build_primal_lp(state, branch, lp_config)
}

/// Shared ℓ < k builder. The head (first ℓ−1 coordinates) rides along on
/// every atom; the LP only distributes the tail mass over k′-subsets.
fn build_primal_lp(
    state: &CanonicalState,
    branch: &BranchData,
    lp_config: &LpConfig,
) -> Result<PrimalDecomposition> {
    let n = state.dim();
    let k = branch.k;
    let ell = branch.ell;
    let head = ell - 1;
    let tail_len = n - head;
    let k_prime = k - head;
    let v = state.entries();
    let tail = &v[head..];
    let alpha = branch.alpha;

    let num_atoms = binomial(tail_len, k_prime).unwrap_or(usize::MAX);
    if num_atoms > lp_config.max_atoms {
        return Err(Error::TooManyAtoms {
            count: num_atoms,
            cap: lp_config.max_atoms,
        });
    }

    let subsets: Vec<Vec<usize>> = Combinations::new(tail_len, k_prime).collect();
    debug_assert_eq!(subsets.len(), num_atoms);

    // Membership and pair-containment rows in the normalized scale where the
    // atom entry is 1: Σ_{b∋i} p_b = ṽ_i/α and Σ_{b⊇{i,j}} p_b ≤ ṽ_iṽ_j/α².
    let mut lp = LpProblem::new(num_atoms);
    lp.push_eq(vec![1.0; num_atoms], 1.0)?;
    for (i, t) in tail.iter().enumerate() {
        let row: Vec<f64> = subsets
            .iter()
            .map(|b| if b.contains(&i) { 1.0 } else { 0.0 })
            .collect();
        lp.push_eq(row, t / alpha)?;
    }
    for i in 0..tail_len {
        for j in i + 1..tail_len {
            let row: Vec<f64> = subsets
                .iter()
                .map(|b| {
                    if b.contains(&i) && b.contains(&j) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            lp.push_le(row, tail[i] * tail[j] / (alpha * alpha))?;
        }
    }

    let p = match solve_feasibility_capped(&lp, lp_config.tolerance, lp_config.max_iterations) {
        Ok(p) => p,
        Err(LpError::Infeasible { residual }) => {
            return Err(Error::PrimalLpInfeasible { residual })
        }
        Err(other) => return Err(Error::Lp(other)),
    };

    // prune and renormalize
    let mut kept: Vec<(usize, f64)> = p
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > lp_config.prune_threshold)
        .map(|(b, &w)| (b, w))
        .collect();
    let total: f64 = kept.iter().map(|(_, w)| w).sum();
    for (_, w) in kept.iter_mut() {
        *w /= total;
    }

    let beta = branch.beta_sq.sqrt();
    let mut atoms = Vec::with_capacity(kept.len());
    let mut weights = Vec::with_capacity(kept.len());
    for (b, w) in &kept {
        let mut x = vec![0.0; n];
        x[..head].copy_from_slice(&v[..head]);
        for &t in &subsets[*b] {
            x[head + t] = alpha;
        }
        debug_assert!((x.iter().map(|e| e * e).sum::<f64>() - beta * beta).abs() < 1e-9);
        atoms.push(x);
        weights.push(*w);
    }

    // slack from the realized moments, symmetric entry by entry
    let mut membership = vec![0.0f64; tail_len];
    let mut pair: DMatrix<f64> = DMatrix::zeros(tail_len, tail_len);
    for (b, w) in &kept {
        let subset = &subsets[*b];
        for (pos, &i) in subset.iter().enumerate() {
            membership[i] += *w;
            for &j in &subset[pos + 1..] {
                pair[(i, j)] += *w;
                pair[(j, i)] += *w;
            }
        }
    }
    let mut slack = DMatrix::zeros(n, n);
    for i in 0..tail_len {
        slack[(head + i, head + i)] = alpha * alpha * membership[i] - tail[i] * tail[i];
        for j in i + 1..tail_len {
            let entry = alpha * alpha * pair[(i, j)] - tail[i] * tail[j];
            slack[(head + i, head + j)] = entry;
            slack[(head + j, head + i)] = entry;
        }
    }

    let s = slack.trace();
    let sigma_parts = decompose_into_i2(&slack)?;
    Ok(PrimalDecomposition {
        s,
        slack,
        atoms,
        weights,
        sigma_parts,
    })
}

/// Route to the branch-appropriate primal builder.
pub fn build_primal(
    state: &CanonicalState,
    branch: &BranchData,
    lp_config: &LpConfig,
) -> Result<PrimalDecomposition> {
    if branch.ell == branch.k {
        build_primal_ell_eq_k(state, branch)
    } else if branch.ell == 1 {
        build_primal_ell_eq_1(state, branch, lp_config)
    } else {
        build_primal_middle(state, branch, lp_config)
    }
}

/// Pairwise disagreements between the three readings of the value, plus the
/// feasibility margins that must vanish for a certificate to stand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateGaps {
    /// |value − dual objective|.
    pub dual_objective: f64,
    /// |value − tr(slack)|.
    pub primal_trace: f64,
    /// Max-abs entry of Σ p x xᵀ − (vvᵀ + S).
    pub reconstruction_residual: f64,
    /// How far the witness sits outside the dual cone (0 when feasible).
    pub dual_feasibility: f64,
    /// |Σ p − 1|.
    pub weight_sum: f64,
}

impl CertificateGaps {
    pub fn max_gap(&self) -> f64 {
        self.dual_objective
            .max(self.primal_trace)
            .max(self.reconstruction_residual)
            .max(self.dual_feasibility)
            .max(self.weight_sum)
    }
}

/// A complete optimality certificate: the closed-form value sandwiched
/// between a verified dual witness and an explicit primal decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub value: f64,
    pub k: usize,
    pub branch: BranchData,
    pub tolerance: f64,
    /// True when the state sits within [`BOUNDARY_FLAG_TOLERANCE`] of a
    /// branch boundary, where the LP is worst conditioned.
    pub near_boundary: bool,
    pub dual: DualWitness,
    pub dual_check: DualVerification,
    pub primal: PrimalDecomposition,
    pub gaps: CertificateGaps,
    pub certified: bool,
}

/// Produce and check the full duality sandwich for `state` at level `k`.
///
/// Returns `Ok` only when every gap closes within `tolerance`; otherwise the
/// failed certificate travels inside [`Error::CertificationFailed`] so
/// callers can still inspect or serialize it.
pub fn certify(state: &CanonicalState, k: usize, tolerance: f64) -> Result<Certificate> {
    certify_with(state, k, tolerance, &LpConfig::default())
}

/// [`certify`] with explicit LP configuration.
pub fn certify_with(
    state: &CanonicalState,
    k: usize,
    tolerance: f64,
    lp_config: &LpConfig,
) -> Result<Certificate> {
    let rv = robustness_value(state, k)?;
    let branch = rv.branch.clone();
    let dual = build_dual_witness(state, &branch);
    let dual_check = verify_dual_witness(&dual, state, tolerance)?;
    let primal = build_primal(state, &branch, lp_config)?;

    let weight_sum: f64 = primal.weights.iter().sum();
    let gaps = CertificateGaps {
        dual_objective: (rv.value - dual.objective).abs(),
        primal_trace: (rv.value - primal.s).abs(),
        reconstruction_residual: primal.reconstruction_residual(state),
        dual_feasibility: (dual_check.max_submatrix_eig - 1.0)
            .max(-dual_check.min_eigenvalue)
            .max(0.0),
        weight_sum: (weight_sum - 1.0).abs(),
    };
    let weights_ok = primal.weights.iter().all(|&w| w >= -tolerance);
    let supports_ok = primal.max_support() <= k;
    let certified =
        gaps.max_gap() <= tolerance && dual_check.feasible && weights_ok && supports_ok;

    let certificate = Certificate {
        value: rv.value,
        k,
        branch,
        tolerance,
        near_boundary: boundary_margin(state, k) < BOUNDARY_FLAG_TOLERANCE,
        dual,
        dual_check,
        primal,
        gaps,
        certified,
    };
    if !certified {
        let mut failures = Vec::new();
        if gaps.dual_objective > tolerance {
            failures.push(format!("dual objective gap {:.3e}", gaps.dual_objective));
        }
        if gaps.primal_trace > tolerance {
            failures.push(format!("primal trace gap {:.3e}", gaps.primal_trace));
        }
        if gaps.reconstruction_residual > tolerance {
            failures.push(format!(
                "reconstruction residual {:.3e}",
                gaps.reconstruction_residual
            ));
        }
        if !certificate.dual_check.feasible || gaps.dual_feasibility > tolerance {
            failures.push(format!(
                "dual infeasibility {:.3e}",
                gaps.dual_feasibility
            ));
        }
        if gaps.weight_sum > tolerance {
            failures.push(format!("weight sum error {:.3e}", gaps.weight_sum));
        }
        if !weights_ok {
            failures.push("negative weight".to_string());
        }
        if !supports_ok {
            failures.push(format!(
                "atom support {} exceeds k = {}",
                certificate.primal.max_support(),
                k
            ));
        }
        return Err(Error::CertificationFailed {
            tolerance,
            summary: failures.join("; "),
            certificate: Box::new(certificate),
        });
    }
    Ok(certificate)
}
