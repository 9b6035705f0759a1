//! Versioned JSON certificate documents.
//!
//! A [`CertificateDocument`] is the serialized face of a certificate: enough
//! data to re-check optimality without re-running the solver, plus an echo of
//! the exact input it was computed from. Serialization is deterministic
//! (struct field order is fixed and floats use shortest round-trip form), so
//! identical inputs produce byte-identical JSON.
//!
//! [`CertificateDocument::reverify`] rebuilds the certificates from the
//! document alone and replays every check: the round-trip invariant is that a
//! document emitted with status `certified` reverifies to `certified`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entangle::schmidt_tail_norm;
use crate::exact::parse_rational;
use crate::{
    canonicalize, exact_certify, robustness_value, schmidt_decompose, verify_dual_witness,
    Certificate, DualWitness, EntanglementCertificate, Error, ExactCertificate, Result,
    RobustnessValue, SchmidtData, WitnessKind, DEFAULT_NORM_TOLERANCE,
};

/// Current document schema version.
pub const SCHEMA_VERSION: &str = "1";

/// Schmidt-rank tolerance used when re-checking lifted atoms.
const LIFT_TAIL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Coherence,
    Entanglement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Closed-form value only; no certificates attached.
    ValueOnly,
    /// All gaps closed within the declared tolerance.
    Certified,
    /// Certificates attached but at least one gap exceeded the tolerance.
    GapExceeded,
}

/// One complex number; real inputs carry `im: 0.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexDoc {
    fn from(z: Complex64) -> Self {
        ComplexDoc { re: z.re, im: z.im }
    }
}

impl From<ComplexDoc> for Complex64 {
    fn from(z: ComplexDoc) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// The input exactly as received, so a document is self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputEcho {
    Vector {
        entries: Vec<ComplexDoc>,
    },
    /// Row-major amplitude matrix of a bipartite state.
    Matrix {
        rows: usize,
        cols: usize,
        entries: Vec<ComplexDoc>,
    },
}

impl InputEcho {
    pub fn vector(entries: &[Complex64]) -> Self {
        InputEcho::Vector {
            entries: entries.iter().copied().map(ComplexDoc::from).collect(),
        }
    }

    pub fn matrix(m: &DMatrix<Complex64>) -> Self {
        let (rows, cols) = m.shape();
        let entries = (0..rows)
            .flat_map(|a| (0..cols).map(move |b| (a, b)))
            .map(|(a, b)| ComplexDoc::from(m[(a, b)]))
            .collect();
        InputEcho::Matrix {
            rows,
            cols,
            entries,
        }
    }

    fn to_vector(&self) -> Result<Vec<Complex64>> {
        match self {
            InputEcho::Vector { entries } => {
                Ok(entries.iter().copied().map(Complex64::from).collect())
            }
            InputEcho::Matrix { .. } => Err(Error::InvalidInput(
                "document echoes a matrix where a vector is required".into(),
            )),
        }
    }

    fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        match self {
            InputEcho::Matrix {
                rows,
                cols,
                entries,
            } => {
                if entries.len() != rows * cols {
                    return Err(Error::InvalidInput(format!(
                        "matrix echo has {} entries for shape {rows}x{cols}",
                        entries.len()
                    )));
                }
                Ok(DMatrix::from_fn(*rows, *cols, |a, b| {
                    Complex64::from(entries[a * cols + b])
                }))
            }
            InputEcho::Vector { .. } => Err(Error::InvalidInput(
                "document echoes a vector where a matrix is required".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWitnessDoc {
    /// `rank_one` or `all_ones`.
    pub kind: String,
    /// Attaining unit vector; the witness matrix is its outer product
    /// (`all_ones` stores 1/√k in every coordinate).
    pub a: Vec<f64>,
    pub objective: f64,
    pub max_submatrix_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDoc {
    pub weights: Vec<f64>,
    pub atoms: Vec<Vec<f64>>,
    pub slack_trace: f64,
    pub reconstruction_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapsDoc {
    pub dual_objective: f64,
    pub primal_trace: f64,
    pub reconstruction_residual: f64,
    pub dual_feasibility: f64,
    pub weight_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtDoc {
    pub coefficients: Vec<f64>,
    pub dims: (usize, usize),
    pub rank: usize,
    pub truncation_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftDoc {
    pub gamma_norm: f64,
    pub dual_vector_b: Vec<ComplexDoc>,
    pub atoms: Vec<Vec<ComplexDoc>>,
    pub weights: Vec<f64>,
}

/// Exact-mode payload; rationals travel as `p/q` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDoc {
    pub amplitudes: Vec<String>,
    pub value: String,
    pub norm_sq: String,
    pub witness_pattern: Vec<String>,
    pub witness_scale: String,
    pub slack_trace: String,
    pub weights: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingsDoc {
    pub total_ms: f64,
}

/// Verdict of re-checking a parsed document.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverifyReport {
    /// Status the fresh checks arrive at.
    pub status: Status,
    /// Largest numeric gap observed.
    pub max_gap: f64,
    /// Human-readable failures; empty when the document stands.
    pub failures: Vec<String>,
}

impl ReverifyReport {
    /// True when re-checking reproduces the stored status.
    pub fn matches(&self, document: &CertificateDocument) -> bool {
        self.status == document.status
    }
}

/// Self-contained certificate record, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub schema_version: String,
    pub mode: Mode,
    pub status: Status,
    pub k: usize,
    pub tolerance: f64,
    pub value: f64,
    pub k_support_norm: f64,
    pub branch_ell: usize,
    pub near_boundary: bool,
    pub input_echo: InputEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_witness: Option<DualWitnessDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primal: Option<PrimalDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<GapsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schmidt: Option<SchmidtDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsDoc>,
}

fn witness_kind_str(kind: WitnessKind) -> &'static str {
    match kind {
        WitnessKind::RankOne => "rank_one",
        WitnessKind::AllOnes => "all_ones",
    }
}

impl CertificateDocument {
    /// Document for a closed-form evaluation without certificates.
    pub fn value_only(
        input_echo: InputEcho,
        rv: &RobustnessValue,
        k: usize,
        tolerance: f64,
        near_boundary: bool,
    ) -> Self {
        CertificateDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            mode: Mode::Coherence,
            status: Status::ValueOnly,
            k,
            tolerance,
            value: rv.value,
            k_support_norm: rv.k_support_norm_sq.sqrt(),
            branch_ell: rv.branch.ell,
            near_boundary,
            input_echo,
            dual_witness: None,
            primal: None,
            gaps: None,
            schmidt: None,
            lift: None,
            exact: None,
            timings: None,
        }
    }

    /// Document for a full coherence certificate.
    pub fn from_certificate(input_echo: InputEcho, cert: &Certificate) -> Self {
        CertificateDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            mode: Mode::Coherence,
            status: if cert.certified {
                Status::Certified
            } else {
                Status::GapExceeded
            },
            k: cert.k,
            tolerance: cert.tolerance,
            value: cert.value,
            k_support_norm: cert.branch.beta_sq.sqrt(),
            branch_ell: cert.branch.ell,
            near_boundary: cert.near_boundary,
            input_echo,
            dual_witness: Some(DualWitnessDoc {
                kind: witness_kind_str(cert.dual.kind).to_string(),
                a: cert.dual.attaining_vector(),
                objective: cert.dual.objective,
                max_submatrix_eig: cert.dual_check.max_submatrix_eig,
            }),
            primal: Some(PrimalDoc {
                weights: cert.primal.weights.clone(),
                atoms: cert.primal.atoms.clone(),
                slack_trace: cert.primal.s,
                reconstruction_residual: cert.gaps.reconstruction_residual,
            }),
            gaps: Some(GapsDoc {
                dual_objective: cert.gaps.dual_objective,
                primal_trace: cert.gaps.primal_trace,
                reconstruction_residual: cert.gaps.reconstruction_residual,
                dual_feasibility: cert.gaps.dual_feasibility,
                weight_sum: cert.gaps.weight_sum,
            }),
            schmidt: None,
            lift: None,
            exact: None,
            timings: None,
        }
    }

    /// Document for an entanglement certificate, including the Schmidt data
    /// and the lifted product-space certificates.
    pub fn from_entanglement(
        input_echo: InputEcho,
        schmidt: &SchmidtData,
        cert: &EntanglementCertificate,
        tolerance: f64,
    ) -> Self {
        let (max_gap, failures) = lift_gaps(schmidt, cert, tolerance);
        let coherence_ok = cert.coherence.as_ref().is_none_or(|c| c.certified);
        let status = if failures.is_empty() && max_gap <= tolerance && coherence_ok {
            Status::Certified
        } else {
            Status::GapExceeded
        };
        let base = cert.coherence.as_ref();
        CertificateDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            mode: Mode::Entanglement,
            status,
            k: cert.k,
            tolerance,
            value: cert.value,
            k_support_norm: cert.gamma_norm.sqrt(),
            branch_ell: base.map_or(1, |c| c.branch.ell),
            near_boundary: base.is_some_and(|c| c.near_boundary),
            input_echo,
            dual_witness: base.map(|c| DualWitnessDoc {
                kind: witness_kind_str(c.dual.kind).to_string(),
                a: c.dual.attaining_vector(),
                objective: c.dual.objective,
                max_submatrix_eig: c.dual_check.max_submatrix_eig,
            }),
            primal: base.map(|c| PrimalDoc {
                weights: c.primal.weights.clone(),
                atoms: c.primal.atoms.clone(),
                slack_trace: c.primal.s,
                reconstruction_residual: c.gaps.reconstruction_residual,
            }),
            gaps: base.map(|c| GapsDoc {
                dual_objective: c.gaps.dual_objective,
                primal_trace: c.gaps.primal_trace,
                reconstruction_residual: c.gaps.reconstruction_residual,
                dual_feasibility: c.gaps.dual_feasibility,
                weight_sum: c.gaps.weight_sum,
            }),
            schmidt: Some(SchmidtDoc {
                coefficients: schmidt.coefficients.clone(),
                dims: schmidt.dims,
                rank: schmidt.rank(),
                truncation_tolerance: schmidt.truncation_tolerance,
            }),
            lift: Some(LiftDoc {
                gamma_norm: cert.gamma_norm,
                dual_vector_b: cert
                    .dual_vector_b
                    .iter()
                    .copied()
                    .map(ComplexDoc::from)
                    .collect(),
                atoms: cert
                    .lifted_atoms
                    .iter()
                    .map(|x| x.iter().copied().map(ComplexDoc::from).collect())
                    .collect(),
                weights: cert.weights.clone(),
            }),
            exact: None,
            timings: None,
        }
    }

    /// Attach the exact-rational payload.
    pub fn attach_exact(&mut self, cert: &ExactCertificate) {
        let n = cert.dim();
        let slack_trace = (0..n).fold(num_rational::BigRational::default(), |acc, i| {
            acc + &cert.slack[(i, i)]
        });
        self.exact = Some(ExactDoc {
            amplitudes: cert.amplitudes.iter().map(ToString::to_string).collect(),
            value: cert.value.to_string(),
            norm_sq: cert.norm_sq.to_string(),
            witness_pattern: cert
                .witness_pattern
                .iter()
                .map(ToString::to_string)
                .collect(),
            witness_scale: cert.witness_scale.to_string(),
            slack_trace: slack_trace.to_string(),
            weights: cert
                .atoms
                .weights()
                .iter()
                .map(ToString::to_string)
                .collect(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("cannot parse certificate document: {e}")))
    }

    /// Rebuild the certificates from the document alone and replay every
    /// check. Returns `Err` only when the document is structurally unusable;
    /// numeric disagreements land in the report instead.
    pub fn reverify(&self) -> Result<ReverifyReport> {
        let mut failures = Vec::new();
        let mut max_gap = 0.0f64;
        let status = match self.mode {
            Mode::Coherence => self.reverify_coherence(&mut failures, &mut max_gap)?,
            Mode::Entanglement => self.reverify_entanglement(&mut failures, &mut max_gap)?,
        };
        self.reverify_exact(&mut failures)?;
        Ok(ReverifyReport {
            status,
            max_gap,
            failures,
        })
    }

    fn reverify_coherence(
        &self,
        failures: &mut Vec<String>,
        max_gap: &mut f64,
    ) -> Result<Status> {
        let entries = self.input_echo.to_vector()?;
        let state = canonicalize(&entries, DEFAULT_NORM_TOLERANCE)?;
        let tol = self.tolerance;
        let rv = robustness_value(&state, self.k)?;

        let value_gap = (rv.value - self.value).abs();
        bump(max_gap, value_gap);
        if value_gap > tol {
            failures.push(format!(
                "stored value differs from the recomputed closed form by {value_gap:.3e}"
            ));
        }
        if rv.branch.ell != self.branch_ell {
            failures.push(format!(
                "stored branch {} but the state selects {}",
                self.branch_ell, rv.branch.ell
            ));
        }

        match (&self.dual_witness, &self.primal) {
            (None, None) => {
                if failures.is_empty() {
                    return Ok(Status::ValueOnly);
                }
                Ok(Status::GapExceeded)
            }
            (Some(dual), Some(primal)) => {
                self.recheck_dual(dual, &state, failures, max_gap)?;
                self.recheck_primal(primal, state.entries(), failures, max_gap);
                if failures.is_empty() && *max_gap <= tol {
                    Ok(Status::Certified)
                } else {
                    Ok(Status::GapExceeded)
                }
            }
            _ => Err(Error::InvalidInput(
                "document carries only one of the dual/primal sections".into(),
            )),
        }
    }

    fn recheck_dual(
        &self,
        doc: &DualWitnessDoc,
        state: &crate::CanonicalState,
        failures: &mut Vec<String>,
        max_gap: &mut f64,
    ) -> Result<()> {
        let n = state.dim();
        let tol = self.tolerance;
        if doc.a.len() != n {
            failures.push("witness vector length does not match the state".into());
            return Ok(());
        }
        let (kind, a) = match doc.kind.as_str() {
            "rank_one" => (WitnessKind::RankOne, Some(doc.a.clone())),
            "all_ones" => (WitnessKind::AllOnes, None),
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown witness kind {other:?}"
                )))
            }
        };
        let matrix = match kind {
            WitnessKind::AllOnes => DMatrix::from_element(n, n, 1.0 / self.k as f64),
            WitnessKind::RankOne => DMatrix::from_fn(n, n, |i, j| doc.a[i] * doc.a[j]),
        };
        let witness = DualWitness {
            kind,
            a,
            matrix,
            objective: doc.objective,
            k: self.k,
        };
        let check = verify_dual_witness(&witness, state, tol)?;
        bump(max_gap, check.objective_gap);
        bump(max_gap, (doc.objective - self.value).abs());
        bump(max_gap, (check.max_submatrix_eig - 1.0).max(0.0));
        if !check.feasible {
            failures.push("rebuilt dual witness is infeasible".into());
        }
        if check.objective_gap > tol {
            failures.push(format!(
                "stored dual objective is {:.3e} away from ⟨v|W|v⟩ − 1",
                check.objective_gap
            ));
        }
        Ok(())
    }

    fn recheck_primal(
        &self,
        doc: &PrimalDoc,
        v: &[f64],
        failures: &mut Vec<String>,
        max_gap: &mut f64,
    ) {
        let n = v.len();
        let tol = self.tolerance;
        if doc.weights.len() != doc.atoms.len() || doc.atoms.iter().any(|x| x.len() != n) {
            failures.push("primal atom shapes do not match the state".into());
            return;
        }
        if doc.weights.iter().any(|&w| w < -tol) {
            failures.push("negative atom weight".into());
        }
        let weight_gap = (doc.weights.iter().sum::<f64>() - 1.0).abs();
        bump(max_gap, weight_gap);
        if weight_gap > tol {
            failures.push(format!("atom weights sum 1 ± {weight_gap:.3e}"));
        }
        if doc
            .atoms
            .iter()
            .any(|x| x.iter().filter(|&&e| e != 0.0).count() > self.k)
        {
            failures.push(format!("an atom has more than k = {} entries", self.k));
        }

        let mut slack: DMatrix<f64> = DMatrix::zeros(n, n);
        for (x, &w) in doc.atoms.iter().zip(&doc.weights) {
            for i in 0..n {
                for j in 0..n {
                    slack[(i, j)] += w * x[i] * x[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                slack[(i, j)] -= v[i] * v[j];
            }
        }
        let trace_gap = (slack.trace() - self.value).abs();
        bump(max_gap, trace_gap);
        if trace_gap > tol {
            failures.push(format!("slack trace misses the value by {trace_gap:.3e}"));
        }
        bump(max_gap, (doc.slack_trace - slack.trace()).abs());
        if let Err(e) = crate::decompose_into_i2(&slack) {
            failures.push(format!("slack is not a legal k-incoherent direction: {e}"));
        }
    }

    fn reverify_entanglement(
        &self,
        failures: &mut Vec<String>,
        max_gap: &mut f64,
    ) -> Result<Status> {
        let matrix = self.input_echo.to_matrix()?;
        let truncation = self
            .schmidt
            .as_ref()
            .map_or(crate::DEFAULT_TRUNCATION_TOLERANCE, |s| {
                s.truncation_tolerance
            });
        let schmidt = schmidt_decompose(&matrix, truncation)?;
        let cert = entanglement_from_doc(self, &schmidt)?;
        let tol = self.tolerance;

        let fresh = crate::entanglement_robustness(&schmidt, self.k, tol)?;
        let value_gap = (fresh.value - self.value).abs();
        bump(max_gap, value_gap);
        if value_gap > tol {
            failures.push(format!(
                "stored value differs from the recomputed one by {value_gap:.3e}"
            ));
        }

        let (lift_gap, mut lift_failures) = lift_gaps(&schmidt, &cert, tol);
        bump(max_gap, lift_gap);
        failures.append(&mut lift_failures);

        if failures.is_empty() && *max_gap <= tol {
            Ok(Status::Certified)
        } else {
            Ok(Status::GapExceeded)
        }
    }

    fn reverify_exact(&self, failures: &mut Vec<String>) -> Result<()> {
        let Some(doc) = &self.exact else {
            return Ok(());
        };
        let amplitudes = doc
            .amplitudes
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        let cert = exact_certify(&amplitudes, self.k)?;
        let stored = parse_rational(&doc.value)?;
        if stored != cert.value {
            failures.push("exact value does not reproduce".into());
        }
        Ok(())
    }
}

fn bump(max_gap: &mut f64, gap: f64) {
    if gap > *max_gap {
        *max_gap = gap;
    }
}

/// Reassemble an [`EntanglementCertificate`] from the serialized lift.
fn entanglement_from_doc(
    doc: &CertificateDocument,
    schmidt: &SchmidtData,
) -> Result<EntanglementCertificate> {
    let lift = doc
        .lift
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("entanglement document lacks a lift section".into()))?;
    Ok(EntanglementCertificate {
        value: doc.value,
        gamma_norm: lift.gamma_norm,
        k: doc.k,
        dims: schmidt.dims,
        dual_vector_b: lift
            .dual_vector_b
            .iter()
            .copied()
            .map(Complex64::from)
            .collect(),
        lifted_atoms: lift
            .atoms
            .iter()
            .map(|x| x.iter().copied().map(Complex64::from).collect())
            .collect(),
        weights: lift.weights.clone(),
        coherence: None,
    })
}

/// Numeric checks shared by document construction and reverification: the
/// dual vector attains the value, weights mix to 1, and every lifted atom
/// stays within Schmidt rank k.
fn lift_gaps(
    schmidt: &SchmidtData,
    cert: &EntanglementCertificate,
    tolerance: f64,
) -> (f64, Vec<String>) {
    let mut failures = Vec::new();
    let mut max_gap = 0.0f64;
    let v = schmidt.state_vector();
    let dim = v.len();

    if cert.dual_vector_b.len() != dim {
        failures.push("dual vector length does not match the product space".into());
        return (f64::INFINITY, failures);
    }
    let inner: Complex64 = cert
        .dual_vector_b
        .iter()
        .zip(&v)
        .map(|(b, s)| b.conj() * s)
        .sum();
    let attained = inner.norm_sqr() - 1.0;
    let objective_gap = (attained - cert.value).abs();
    bump(&mut max_gap, objective_gap);
    if objective_gap > tolerance {
        failures.push(format!(
            "dual vector attains {attained:.6}, value is {:.6}",
            cert.value
        ));
    }

    let weight_gap = (cert.weights.iter().sum::<f64>() - 1.0).abs();
    bump(&mut max_gap, weight_gap);
    if weight_gap > tolerance {
        failures.push(format!("lifted weights sum 1 ± {weight_gap:.3e}"));
    }
    if cert.weights.len() != cert.lifted_atoms.len() {
        failures.push("lifted atom and weight counts differ".into());
    }

    let tail_tol = LIFT_TAIL_TOLERANCE.max(tolerance);
    for (idx, atom) in cert.lifted_atoms.iter().enumerate() {
        match schmidt_tail_norm(atom, cert.dims, cert.k) {
            Ok(tail) => {
                if tail > tail_tol {
                    failures.push(format!(
                        "lifted atom {idx} has Schmidt tail {tail:.3e} beyond rank k"
                    ));
                }
            }
            Err(e) => failures.push(format!("lifted atom {idx} is malformed: {e}")),
        }
    }
    (max_gap, failures)
}
