//! Randomized property suites exercising the whole pipeline end to end.
//!
//! The same eight suites back the `selftest` subcommand and the acceptance
//! integration tests: [`SelftestConfig::full`] reproduces the advertised
//! case counts, [`SelftestConfig::quick`] keeps a fast smoke profile.
//! Suites that promise checks "on the sandwich suite" regenerate the exact
//! same instances from the shared seed salt, so the suites stay independent
//! while talking about the same states.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::document::CertificateDocument;
use crate::document::{InputEcho, Status};
use crate::lp::{solve_feasibility, LpError, LpProblem};
use crate::state::CanonicalState;
use crate::{
    canonicalize, certify, cli, decompose_into_i2, entanglement_robustness, k_support_dual_norm,
    k_support_norm, robustness_value, schmidt_decompose, schmidt_tail_norm, select_branch,
    EntanglementCertificate, Error, SchmidtData, DEFAULT_NORM_TOLERANCE,
};

const SANDWICH_SALT: u64 = 0x73616e64;
const BRANCH_SALT: u64 = 0x6272616e;
const SPLIT_SALT: u64 = 0x73706c69;
const NORM_SALT: u64 = 0x6e6f726d;
const ENTANGLE_SALT: u64 = 0x656e7461;
const ANCHOR_SALT: u64 = 0x616e6368;
const LP_SALT: u64 = 0x6c705f31;

/// Pairwise agreement demanded between the three value computations.
const SANDWICH_PAIRWISE: f64 = 1e-7;
/// Reconstruction residual bound on the sandwich suite.
const SANDWICH_RESIDUAL: f64 = 1e-8;
/// Dual feasibility margin bound on the sandwich suite.
const SANDWICH_FEASIBILITY: f64 = 1e-8;

/// Case counts for every suite; the seed pins all randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Random states in the duality sandwich (each tested at every k).
    pub sandwich_states: usize,
    /// Random states for the branch-maximality scan.
    pub branch_states: usize,
    /// Random matrices for the 2-incoherent splitting.
    pub split_matrices: usize,
    /// Random vector pairs for the norm duality inequality.
    pub norm_pairs: usize,
    /// Random bipartite states for the entanglement layer.
    pub entangled_states: usize,
}

impl SelftestConfig {
    /// The advertised acceptance profile.
    pub fn full(seed: u64) -> Self {
        SelftestConfig {
            seed,
            sandwich_states: 500,
            branch_states: 10_000,
            split_matrices: 1_000,
            norm_pairs: 10_000,
            entangled_states: 200,
        }
    }

    /// A reduced profile for quick smoke runs.
    pub fn quick(seed: u64) -> Self {
        SelftestConfig {
            seed,
            sandwich_states: 40,
            branch_states: 800,
            split_matrices: 120,
            norm_pairs: 800,
            entangled_states: 25,
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub seconds: f64,
    /// Worst observed margins on success, first failure on failure.
    pub detail: String,
}

/// Run all eight suites in acceptance order.
pub fn run_all(config: &SelftestConfig) -> Vec<SuiteResult> {
    vec![
        sandwich_suite(config),
        anchors_suite(config),
        branch_suite(config),
        split_suite(config),
        norms_suite(config),
        entanglement_suite(config),
        lp_suite(config),
        roundtrip_suite(config),
    ]
}

/// One line per suite, `pass`/`FAIL` first so failures jump out.
pub fn write_table(results: &[SuiteResult], out: &mut dyn Write) {
    for r in results {
        let _ = writeln!(
            out,
            "{} {:<20} {:>6} cases {:>8.2}s  {}",
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            r.cases,
            r.seconds,
            r.detail
        );
    }
}

/// Failure bookkeeping shared by the suites: counts cases, keeps the first
/// failure message, and tracks named worst-case margins for the detail line.
struct Tally {
    name: &'static str,
    started: Instant,
    cases: usize,
    failures: usize,
    first_failure: Option<String>,
    margins: Vec<(&'static str, f64)>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            started: Instant::now(),
            cases: 0,
            failures: 0,
            first_failure: None,
            margins: Vec::new(),
        }
    }

    fn case(&mut self) {
        self.cases += 1;
    }

    fn require(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(message());
            }
        }
    }

    /// Track the running maximum of a named margin.
    fn margin(&mut self, name: &'static str, value: f64) {
        match self.margins.iter_mut().find(|(n, _)| *n == name) {
            Some((_, worst)) => *worst = worst.max(value),
            None => self.margins.push((name, value)),
        }
    }

    fn finish(self) -> SuiteResult {
        let detail = match &self.first_failure {
            Some(message) => format!("{} failures, first: {}", self.failures, message),
            None => self
                .margins
                .iter()
                .map(|(name, worst)| format!("{name} {worst:.1e}"))
                .collect::<Vec<_>>()
                .join(", "),
        };
        SuiteResult {
            name: self.name,
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            seconds: self.started.elapsed().as_secs_f64(),
            detail,
        }
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

/// A Haar-like random unit state: complex Gaussian entries, normalized.
fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CanonicalState {
    loop {
        let raw: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm = raw.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm > 1e-6 {
            let unit: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
            if let Ok(state) = canonicalize(&unit, DEFAULT_NORM_TOLERANCE) {
                return state;
            }
        }
    }
}

/// The (state, k) instances of the duality-sandwich suite. Suites that refer
/// back to the sandwich states rebuild the identical list from the seed.
fn sandwich_instances(config: &SelftestConfig) -> Vec<(CanonicalState, usize)> {
    let mut rng = rng_for(config.seed, SANDWICH_SALT);
    let mut instances = Vec::new();
    for _ in 0..config.sandwich_states {
        let n = rng.random_range(3..=8);
        let state = random_state(&mut rng, n);
        for k in 2..=n {
            instances.push((state.clone(), k));
        }
    }
    instances
}

fn certificate_or_fail(
    state: &CanonicalState,
    k: usize,
    tolerance: f64,
    tally: &mut Tally,
) -> Option<crate::Certificate> {
    match certify(state, k, tolerance) {
        Ok(cert) => Some(cert),
        Err(Error::CertificationFailed { certificate, .. }) => Some(*certificate),
        Err(e) => {
            tally.require(false, || format!("certify failed outright: {e}"));
            None
        }
    }
}

/// Suite 1: closed form, dual objective, and primal trace agree pairwise;
/// reconstruction and dual feasibility margins stay small.
fn sandwich_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("duality-sandwich");
    for (state, k) in sandwich_instances(config) {
        tally.case();
        let Some(cert) = certificate_or_fail(&state, k, SANDWICH_PAIRWISE, &mut tally) else {
            continue;
        };
        let pairwise = cert
            .gaps
            .dual_objective
            .max(cert.gaps.primal_trace)
            .max((cert.dual.objective - cert.primal.s).abs());
        tally.margin("pairwise", pairwise);
        tally.margin("residual", cert.gaps.reconstruction_residual);
        tally.margin("feasibility", cert.gaps.dual_feasibility);
        tally.require(pairwise <= SANDWICH_PAIRWISE, || {
            format!("pairwise gap {pairwise:.3e} at n={}, k={k}", state.dim())
        });
        tally.require(
            cert.gaps.reconstruction_residual <= SANDWICH_RESIDUAL,
            || {
                format!(
                    "reconstruction residual {:.3e} at n={}, k={k}",
                    cert.gaps.reconstruction_residual,
                    state.dim()
                )
            },
        );
        tally.require(
            cert.gaps.dual_feasibility <= SANDWICH_FEASIBILITY,
            || {
                format!(
                    "dual feasibility margin {:.3e} at n={}, k={k}",
                    cert.gaps.dual_feasibility,
                    state.dim()
                )
            },
        );
        tally.require(cert.certified, || {
            format!("uncertified at n={}, k={k}", state.dim())
        });
    }
    tally.finish()
}

fn uniform_state(n: usize) -> CanonicalState {
    let amp = 1.0 / (n as f64).sqrt();
    CanonicalState::from_sorted(vec![amp; n], DEFAULT_NORM_TOLERANCE).expect("uniform state")
}

/// Suite 2: uniform states hit n/k − 1, few-support states and k = n give an
/// exact zero.
fn anchors_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("anchors");
    let mut rng = rng_for(config.seed, ANCHOR_SALT);

    for n in 1..=10 {
        let state = uniform_state(n);
        for k in 1..=n {
            tally.case();
            let expected = n as f64 / k as f64 - 1.0;
            // k = 1 sits outside the k >= 2 evaluator but the k-support norm
            // covers it: the squared 1-support norm is the l1 norm squared.
            let value = if k == 1 {
                let complex: Vec<Complex64> =
                    state.entries().iter().map(|&x| Complex64::new(x, 0.0)).collect();
                match k_support_norm(&complex, 1) {
                    Ok(norm) => norm * norm - 1.0,
                    Err(e) => {
                        tally.require(false, || format!("norm failed at n={n}: {e}"));
                        continue;
                    }
                }
            } else {
                match robustness_value(&state, k) {
                    Ok(rv) => rv.value,
                    Err(e) => {
                        tally.require(false, || format!("value failed at n={n}, k={k}: {e}"));
                        continue;
                    }
                }
            };
            let gap = (value - expected).abs();
            tally.margin("uniform", gap);
            tally.require(gap <= 1e-12, || {
                format!("uniform n={n}, k={k}: value {value} vs {expected}")
            });
        }
    }

    // At most k non-zero entries: the tail form must collapse to an exact 0.
    for n in 3..=8 {
        for k in 2..=n - 1 {
            tally.case();
            let nonzeros = rng.random_range(1..=k);
            let mut entries: Vec<f64> = (0..nonzeros)
                .map(|_| rng.random_range(0.1..1.0f64))
                .collect();
            let norm = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
            entries.iter_mut().for_each(|x| *x /= norm);
            entries.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            entries.resize(n, 0.0);
            let state =
                CanonicalState::from_sorted(entries, DEFAULT_NORM_TOLERANCE).expect("unit state");
            match robustness_value(&state, k) {
                Ok(rv) => tally.require(rv.value == 0.0, || {
                    format!("{nonzeros} nonzeros at n={n}, k={k}: value {}", rv.value)
                }),
                Err(e) => tally.require(false, || format!("value failed: {e}")),
            }
        }
    }

    // k = n is an exact zero for every state.
    for n in 2..=10 {
        tally.case();
        let state = random_state(&mut rng, n);
        match robustness_value(&state, n) {
            Ok(rv) => tally.require(rv.value == 0.0, || {
                format!("k=n={n}: value {}", rv.value)
            }),
            Err(e) => tally.require(false, || format!("value failed: {e}")),
        }
    }

    tally.finish()
}

/// The largest qualifying branch index found by scanning every candidate.
fn brute_force_ell(v: &[f64], k: usize) -> usize {
    let n = v.len();
    for ell in (2..=k).rev() {
        let tail: f64 = v[ell - 1..n].iter().sum();
        if v[ell - 2] >= tail / (k - ell + 1) as f64 {
            return ell;
        }
    }
    1
}

/// Suite 3: the selected branch index matches a brute-force scan, and exact
/// boundary instances route upward and still certify.
fn branch_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("branch-correctness");
    let mut rng = rng_for(config.seed, BRANCH_SALT);

    for _ in 0..config.branch_states {
        tally.case();
        let n = rng.random_range(2..=12);
        let state = random_state(&mut rng, n);
        let k = rng.random_range(2..=n);
        match select_branch(&state, k) {
            Ok(branch) => {
                let expected = brute_force_ell(state.entries(), k);
                tally.require(branch.ell == expected, || {
                    format!(
                        "n={n}, k={k}: selected ell {} vs brute-force {expected}",
                        branch.ell
                    )
                });
            }
            Err(e) => tally.require(false, || format!("select_branch failed: {e}")),
        }
    }

    // Exact boundary states v_{ell-1} = s_ell/(k-ell+1). Entries are chosen
    // as power-of-two multiples so the equality survives normalization
    // bit-for-bit; (3,2,2,2) is kept as a deterministic middle-branch case.
    let mut boundary: Vec<(Vec<f64>, usize)> = vec![
        (vec![2.0, 1.0, 1.0], 2),
        (vec![4.0, 2.0, 2.0], 2),
        (vec![3.0, 2.0, 2.0, 2.0], 3),
    ];
    for k in 2..=6 {
        let mut raw = vec![2.0; k - 1];
        raw.extend([1.0, 1.0]);
        boundary.push((raw, k));
    }
    for (raw, k) in boundary {
        tally.case();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let entries: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let state =
            CanonicalState::from_sorted(entries, DEFAULT_NORM_TOLERANCE).expect("unit state");
        let margin = crate::boundary_margin(&state, k);
        tally.margin("boundary", margin.abs());
        tally.require(margin.abs() <= 1e-12, || {
            format!("boundary margin {margin:.3e} for {raw:?} at k={k}")
        });
        match select_branch(&state, k) {
            Ok(branch) => tally.require(branch.ell >= 2, || {
                format!("boundary {raw:?} at k={k} routed to ell={}", branch.ell)
            }),
            Err(e) => tally.require(false, || format!("select_branch failed: {e}")),
        }
        match certify(&state, k, 1e-8) {
            Ok(cert) => tally.require(cert.certified && cert.near_boundary, || {
                format!("boundary {raw:?} at k={k} not certified as near-boundary")
            }),
            Err(e) => tally.require(false, || format!("boundary certify failed: {e}")),
        }
    }

    tally.finish()
}

/// Suite 4: the 2-incoherent split reconstructs its input exactly and its
/// pair parts are PSD by the 2x2 trace/determinant signs.
fn split_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("i2-split");
    let mut rng = rng_for(config.seed, SPLIT_SALT);

    for _ in 0..config.split_matrices {
        tally.case();
        let n = rng.random_range(2..=10);
        // Symmetric, non-positive off-diagonal, diagonal = |row sum| + slack:
        // exactly the precondition set of `decompose_into_i2`. Every third
        // matrix gets zero slack so tight row sums are covered.
        let mut s: DMatrix<f64> = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_range(0.0..1.0f64) < 0.7 {
                    let g: f64 = rng.sample(StandardNormal);
                    s[(i, j)] = -g.abs();
                    s[(j, i)] = s[(i, j)];
                }
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| s[(i, j)].abs()).sum();
            let slack = if tally.cases.is_multiple_of(3) {
                0.0
            } else {
                rng.random_range(0.0..1.0f64)
            };
            s[(i, i)] = row + slack;
        }

        match decompose_into_i2(&s) {
            Ok(split) => {
                let residual = (split.reconstruct() - &s).abs().max();
                tally.margin("residual", residual);
                tally.require(residual <= 1e-12, || {
                    format!("reconstruction residual {residual:.3e} at n={n}")
                });
                for part in &split.pair_parts {
                    let trace = 2.0 * part.coupling.abs();
                    let det = part.coupling.abs() * part.coupling.abs()
                        - part.coupling * part.coupling;
                    tally.require(trace >= 0.0 && det >= -1e-18, || {
                        format!("pair part ({}, {}) not PSD", part.i, part.j)
                    });
                }
                tally.require(
                    split.diagonal_part.iter().all(|&d| d >= -1e-12),
                    || format!("negative diagonal part at n={n}"),
                );
            }
            Err(e) => tally.require(false, || format!("split rejected a legal matrix: {e}")),
        }
    }

    tally.finish()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

/// Suite 5: norm duality inequality, the k = 1 and k = n reductions, and the
/// squared-norm identity on the sandwich states.
fn norms_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("norm-properties");
    let mut rng = rng_for(config.seed, NORM_SALT);

    for _ in 0..config.norm_pairs {
        tally.case();
        let n = rng.random_range(1..=12);
        let k = rng.random_range(1..=n);
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);

        let (norm_x, dual_y) = match (k_support_norm(&x, k), k_support_dual_norm(&y, k)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                tally.require(false, || format!("norm failed at n={n}, k={k}: {e}"));
                continue;
            }
        };
        let inner: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let excess = inner.norm() - norm_x * dual_y;
        tally.margin("duality", excess);
        tally.require(excess <= 1e-9 * norm_x.mul_add(dual_y, 1.0), || {
            format!("duality violated by {excess:.3e} at n={n}, k={k}")
        });

        let l1: f64 = x.iter().map(|z| z.norm()).sum();
        let l2: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let linf = x.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let reductions = [
            (k_support_norm(&x, 1), l1, "norm at k=1 vs l1"),
            (k_support_norm(&x, n), l2, "norm at k=n vs l2"),
            (k_support_dual_norm(&x, 1), linf, "dual at k=1 vs max"),
            (k_support_dual_norm(&x, n), l2, "dual at k=n vs l2"),
        ];
        for (result, expected, what) in reductions {
            match result {
                Ok(got) => {
                    let gap = (got - expected).abs();
                    tally.margin("reduction", gap);
                    tally.require(gap <= 1e-10, || {
                        format!("{what}: {got} vs {expected} at n={n}")
                    });
                }
                Err(e) => tally.require(false, || format!("{what} failed: {e}")),
            }
        }
    }

    // The squared k-support norm of each sandwich state is value + 1, checked
    // through the original complex vector rather than the canonical form.
    for (state, k) in sandwich_instances(config) {
        tally.case();
        let original = state.reconstruct();
        match (k_support_norm(&original, k), robustness_value(&state, k)) {
            (Ok(norm), Ok(rv)) => {
                let gap = (norm * norm - (rv.value + 1.0)).abs();
                tally.margin("norm-sq", gap);
                tally.require(gap <= 1e-8, || {
                    format!(
                        "norm squared {} vs value+1 {} at n={}, k={k}",
                        norm * norm,
                        rv.value + 1.0,
                        state.dim()
                    )
                });
            }
            (Err(e), _) | (_, Err(e)) => {
                tally.require(false, || format!("sandwich norm check failed: {e}"))
            }
        }
    }

    tally.finish()
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    g.qr().q()
}

fn random_bipartite(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<Complex64> {
    let g = random_vector(rng, m * n);
    let norm = g.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    DMatrix::from_fn(m, n, |a, b| g[a * n + b] / norm)
}

/// |<b, psi>|^2 - 1 for the transported dual vector, which must recover the
/// entanglement value.
fn lifted_objective(schmidt: &SchmidtData, cert: &EntanglementCertificate) -> f64 {
    let state = schmidt.state_vector();
    let inner: Complex64 = cert
        .dual_vector_b
        .iter()
        .zip(&state)
        .map(|(b, s)| b.conj() * s)
        .sum();
    inner.norm_sqr() - 1.0
}

/// Suite 6: local-unitary invariance, the Bell and maximally entangled
/// anchors, the lifted dual objective, and atom Schmidt tails.
fn entanglement_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("entanglement-layer");
    let mut rng = rng_for(config.seed, ENTANGLE_SALT);

    for _ in 0..config.entangled_states {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(2..=4);
        let matrix = random_bipartite(&mut rng, m, n);
        let u = random_unitary(&mut rng, m);
        let v = random_unitary(&mut rng, n);
        let rotated = &u * &matrix * v.transpose();

        let (schmidt, schmidt_rotated) = match (
            schmidt_decompose(&matrix, crate::DEFAULT_TRUNCATION_TOLERANCE),
            schmidt_decompose(&rotated, crate::DEFAULT_TRUNCATION_TOLERANCE),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                tally.case();
                tally.require(false, || format!("schmidt failed at {m}x{n}: {e}"));
                continue;
            }
        };

        for k in 1..=m.min(n) {
            tally.case();
            let cert = match entanglement_robustness(&schmidt, k, 1e-8) {
                Ok(cert) => cert,
                Err(e) => {
                    tally.require(false, || format!("{m}x{n} at k={k} failed: {e}"));
                    continue;
                }
            };
            match entanglement_robustness(&schmidt_rotated, k, 1e-8) {
                Ok(rotated_cert) => {
                    let gap = (cert.value - rotated_cert.value).abs();
                    tally.margin("lu-invariance", gap);
                    tally.require(gap <= 1e-8, || {
                        format!(
                            "local unitaries moved the value by {gap:.3e} at {m}x{n}, k={k}"
                        )
                    });
                }
                Err(e) => tally.require(false, || format!("rotated certify failed: {e}")),
            }

            let objective_gap = (lifted_objective(&schmidt, &cert) - cert.value).abs();
            tally.margin("lifted-dual", objective_gap);
            tally.require(objective_gap <= 1e-8, || {
                format!("lifted dual off by {objective_gap:.3e} at {m}x{n}, k={k}")
            });

            for atom in &cert.lifted_atoms {
                match schmidt_tail_norm(atom, cert.dims, k) {
                    Ok(tail) => {
                        tally.margin("atom-tail", tail);
                        tally.require(tail < 1e-9, || {
                            format!("atom Schmidt tail {tail:.3e} at {m}x{n}, k={k}")
                        });
                    }
                    Err(e) => tally.require(false, || format!("tail norm failed: {e}")),
                }
            }
            let weight_gap = (cert.weights.iter().sum::<f64>() - 1.0).abs();
            tally.require(weight_gap <= 1e-8, || {
                format!("lifted weights sum off by {weight_gap:.3e}")
            });
        }
    }

    // Bell state at k = 1 has value exactly 1.
    tally.case();
    let w = Complex64::new(2f64.sqrt().recip(), 0.0);
    let bell = DMatrix::from_fn(2, 2, |a, b| if a == b { w } else { Complex64::default() });
    match schmidt_decompose(&bell, 1e-12).and_then(|s| entanglement_robustness(&s, 1, 1e-8)) {
        Ok(cert) => {
            let gap = (cert.value - 1.0).abs();
            tally.margin("bell", gap);
            tally.require(gap <= 1e-10, || format!("Bell k=1 value {}", cert.value));
        }
        Err(e) => tally.require(false, || format!("Bell case failed: {e}")),
    }

    // 3x3 maximally entangled at k = 2 has value exactly 1/2.
    tally.case();
    let t = Complex64::new(3f64.sqrt().recip(), 0.0);
    let mme = DMatrix::from_fn(3, 3, |a, b| if a == b { t } else { Complex64::default() });
    match schmidt_decompose(&mme, 1e-12).and_then(|s| entanglement_robustness(&s, 2, 1e-8)) {
        Ok(cert) => {
            let gap = (cert.value - 0.5).abs();
            tally.margin("mme", gap);
            tally.require(gap <= 1e-10, || format!("3x3 k=2 value {}", cert.value));
        }
        Err(e) => tally.require(false, || format!("3x3 case failed: {e}")),
    }

    tally.finish()
}

/// Suite 7: LP feasible points re-verified independently, infeasibility
/// detected, the uniform n=3, k=2 instance certified, and repeated runs
/// bitwise identical.
fn lp_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("lp-solver");
    let mut rng = rng_for(config.seed, LP_SALT);

    // Feasibility problems with a planted solution.
    for _ in 0..50 {
        tally.case();
        let vars = rng.random_range(2..=12);
        let eqs = rng.random_range(1..=vars.min(6));
        let planted: Vec<f64> = (0..vars).map(|_| rng.random_range(0.0..2.0f64)).collect();
        let mut problem = LpProblem::new(vars);
        let mut rows_ok = true;
        for _ in 0..eqs {
            let row: Vec<f64> = (0..vars).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let rhs: f64 = row.iter().zip(&planted).map(|(a, x)| a * x).sum();
            rows_ok &= problem.push_eq(row, rhs).is_ok();
        }
        // A slack inequality the planted point satisfies strictly.
        let row: Vec<f64> = (0..vars).map(|_| rng.random_range(0.0..1.0f64)).collect();
        let rhs: f64 = row.iter().zip(&planted).map(|(a, x)| a * x).sum::<f64>() + 1.0;
        rows_ok &= problem.push_le(row, rhs).is_ok();
        if !rows_ok {
            tally.require(false, || "constraint construction failed".into());
            continue;
        }
        match solve_feasibility(&problem, 1e-9) {
            Ok(point) => {
                let violation = problem.max_violation(&point);
                tally.margin("violation", violation);
                tally.require(violation <= 1e-9, || {
                    format!("re-verification violation {violation:.3e}")
                });
                tally.require(point.iter().all(|&x| x >= 0.0), || {
                    "negative coordinate in feasible point".into()
                });
            }
            Err(e) => tally.require(false, || format!("planted problem unsolved: {e}")),
        }
    }

    // Obviously infeasible systems must be reported as such.
    tally.case();
    let mut infeasible = LpProblem::new(3);
    infeasible
        .push_eq(vec![0.0, 0.0, 0.0], 1.0)
        .expect("legal row");
    tally.require(
        matches!(
            solve_feasibility(&infeasible, 1e-9),
            Err(LpError::Infeasible { residual }) if residual > 0.5
        ),
        || "zero-row system not reported infeasible".into(),
    );
    tally.case();
    let mut conflicting = LpProblem::new(2);
    conflicting.push_eq(vec![1.0, 1.0], 1.0).expect("legal row");
    conflicting.push_le(vec![1.0, 1.0], 0.25).expect("legal row");
    tally.require(
        matches!(
            solve_feasibility(&conflicting, 1e-9),
            Err(LpError::Infeasible { .. })
        ),
        || "conflicting system not reported infeasible".into(),
    );

    // The uniform n=3, k=2 instance goes through the LP branch and certifies.
    tally.case();
    match certify(&uniform_state(3), 2, 1e-8) {
        Ok(cert) => {
            tally.require(cert.certified, || "uniform n=3, k=2 not certified".into());
            tally.require((cert.value - 0.5).abs() <= 1e-12, || {
                format!("uniform n=3, k=2 value {}", cert.value)
            });
        }
        Err(e) => tally.require(false, || format!("uniform n=3, k=2 failed: {e}")),
    }

    // Determinism: identical inputs give bitwise identical outputs.
    tally.case();
    let state = {
        let mut seeded = rng_for(config.seed, SANDWICH_SALT);
        random_state(&mut seeded, 7)
    };
    match (certify(&state, 3, 1e-8), certify(&state, 3, 1e-8)) {
        (Ok(a), Ok(b)) => {
            tally.require(
                a.primal.weights == b.primal.weights
                    && a.primal.atoms == b.primal.atoms
                    && a.value == b.value,
                || "repeated certification runs disagree".into(),
            );
        }
        _ => tally.require(false, || "determinism probe failed to certify".into()),
    }

    tally.finish()
}

/// Suite 8: every sandwich instance survives the JSON round trip with a
/// matching re-verification, and the CLI honors its exit-code contract.
fn roundtrip_suite(config: &SelftestConfig) -> SuiteResult {
    let mut tally = Tally::new("cli-roundtrip");

    for (state, k) in sandwich_instances(config) {
        tally.case();
        let Some(cert) = certificate_or_fail(&state, k, SANDWICH_PAIRWISE, &mut tally) else {
            continue;
        };
        let doc = CertificateDocument::from_certificate(InputEcho::vector(&state.reconstruct()), &cert);
        let json = doc.to_json();
        let parsed = match CertificateDocument::from_json(&json) {
            Ok(parsed) => parsed,
            Err(e) => {
                tally.require(false, || format!("parse failed: {e}"));
                continue;
            }
        };
        tally.require(parsed.to_json() == json, || {
            format!("round trip not stable at n={}, k={k}", state.dim())
        });
        match parsed.reverify() {
            Ok(report) => {
                tally.margin("reverify", report.max_gap);
                tally.require(report.matches(&parsed), || {
                    format!(
                        "re-verification {:?} with gap {:.3e} disagrees with status {:?}",
                        report.status, report.max_gap, parsed.status
                    )
                });
                tally.require(report.status == Status::Certified, || {
                    format!("re-verification failed: {:?}", report.failures)
                });
            }
            Err(e) => tally.require(false, || format!("re-verification errored: {e}")),
        }
    }

    // Exit-code contract on crafted inputs.
    let s = 21f64.sqrt();
    let middle = format!("{},{},{},{}", 3.0 / s, 2.0 / s, 2.0 / s, 2.0 / s);
    let probes: Vec<(Vec<&str>, i32)> = vec![
        (vec!["value", "--vector", "0.5,0.5,0.5,0.5", "--k", "2"], cli::EXIT_OK),
        (vec!["norm", "--vector", "3,4", "--k", "1"], cli::EXIT_OK),
        (vec!["value", "--vector", "1,1", "--k", "2"], cli::EXIT_VALIDATION),
        (vec!["value", "--vector", "1,0", "--k", "9"], cli::EXIT_VALIDATION),
        (vec!["value", "--vector", "1,bad", "--k", "2"], cli::EXIT_VALIDATION),
        (vec!["certify", "--vector", "1,0,0"], cli::EXIT_VALIDATION),
        (
            vec!["certify", "--vector", &middle, "--k", "3", "--tolerance", "1e-30", "--json"],
            cli::EXIT_GAP,
        ),
    ];
    for (args, expected) in probes {
        tally.case();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("krobust").chain(args.iter().copied());
        let code = cli::run(argv, &mut out, &mut err);
        tally.require(code == expected, || {
            format!("{args:?} exited {code}, expected {expected}")
        });
        if expected == cli::EXIT_GAP {
            let text = String::from_utf8_lossy(&out);
            let gap_ok = CertificateDocument::from_json(&text)
                .map(|doc| doc.status == Status::GapExceeded)
                .unwrap_or(false);
            tally.require(gap_ok, || "gap exit did not carry a gap document".into());
        }
    }

    tally.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_profile_passes_every_suite() {
        let results = run_all(&SelftestConfig::quick(7));
        assert_eq!(results.len(), 8);
        for result in &results {
            assert!(
                result.passed,
                "{} failed: {}",
                result.name, result.detail
            );
            assert!(result.cases > 0, "{} ran no cases", result.name);
        }
    }

    #[test]
    fn table_reports_one_line_per_suite() {
        let results = vec![
            SuiteResult {
                name: "anchors",
                passed: true,
                cases: 3,
                seconds: 0.1,
                detail: "uniform 1.0e-15".into(),
            },
            SuiteResult {
                name: "lp-solver",
                passed: false,
                cases: 2,
                seconds: 0.2,
                detail: "1 failures, first: x".into(),
            },
        ];
        let mut out = Vec::new();
        write_table(&results, &mut out);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("pass anchors"));
        assert!(text.contains("FAIL lp-solver"));
    }

    #[test]
    fn brute_force_scan_matches_known_branches() {
        // Uniform states stay on ell = 1 below k = n.
        assert_eq!(brute_force_ell(uniform_state(5).entries(), 3), 1);
        // Any state hits ell = k at k = n.
        assert_eq!(brute_force_ell(uniform_state(4).entries(), 4), 4);
        let s = 21f64.sqrt();
        assert_eq!(brute_force_ell(&[3.0 / s, 2.0 / s, 2.0 / s, 2.0 / s], 3), 2);
    }

    #[test]
    fn seeds_change_the_sampled_states() {
        let a = sandwich_instances(&SelftestConfig::quick(1));
        let b = sandwich_instances(&SelftestConfig::quick(2));
        let same = sandwich_instances(&SelftestConfig::quick(1));
        assert_eq!(a, same);
        assert_ne!(a, b);
    }
}
