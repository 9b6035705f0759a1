//! Exact rational certificates for small states with rational amplitudes.
//!
//! The floating-point pipeline closes the duality sandwich up to a tolerance.
//! When the amplitudes are rational, the same construction goes through in
//! `BigRational` arithmetic and every identity holds with zero gap. The input
//! does not need to be normalized: for amplitudes q the certified state is
//! q/√N with N = Σ qᵢ², and all stored quantities stay in the amplitude scale
//! so they remain rational.
//!
//! Scale conventions, with N = Σ qᵢ²:
//! - `value` is the robustness of the normalized state (scale-free),
//! - the dual witness is W = p pᵀ / B for the stored pattern p and scale B;
//!   W is entrywise rational even though the attaining vector p/√B is not,
//! - `slack` is N times the normalized slack matrix, so tr(slack) = N·value,
//! - pattern atoms x (norm² = B) mix as Σ w·x xᵀ = q qᵀ + slack; when the
//!   atoms themselves carry square roots their weighted Gram matrices are
//!   still rational and sum to the same mixture.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::lp::{solve_feasibility, LpError, LpProblem};
use crate::util::Combinations;
use crate::{Error, Result, MAX_EXACT_DIM};

/// Largest decimal exponent accepted by [`parse_rational`].
const MAX_PARSE_EXPONENT: i32 = 4096;

fn invalid(text: &str, why: &str) -> Error {
    Error::InvalidInput(format!("cannot parse {text:?} as a rational number: {why}"))
}

fn int(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parse a rational literal: a fraction `a/b`, a decimal such as `0.25` or
/// `-2.5e-3`, or a plain integer.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(invalid(text, "empty literal"));
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n: BigInt = numer
            .trim()
            .parse()
            .map_err(|_| invalid(text, "bad numerator"))?;
        let d: BigInt = denom
            .trim()
            .parse()
            .map_err(|_| invalid(text, "bad denominator"))?;
        if d.is_zero() {
            return Err(invalid(text, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exponent) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e.parse().map_err(|_| invalid(text, "bad exponent"))?;
            if exp.unsigned_abs() > MAX_PARSE_EXPONENT as u32 {
                return Err(invalid(text, "exponent out of range"));
            }
            (m, exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid(text, "no digits"));
    }
    let all_digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(invalid(text, "non-digit in mantissa"));
    }
    let numer: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| invalid(text, "bad digits"))?;
    let shift = frac_part.len() as i64 - exponent as i64;
    let ten = BigInt::from(10);
    let rational = if shift >= 0 {
        BigRational::new(numer, ten.pow(shift as u32))
    } else {
        BigRational::from_integer(numer * ten.pow((-shift) as u32))
    };
    Ok(if negative { -rational } else { rational })
}

/// Primal atoms of an exact certificate, in amplitude scale.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactAtoms {
    /// The atom vectors are themselves rational (every branch with ℓ < k,
    /// and k-incoherent states).
    Patterns {
        atoms: Vec<Vec<BigRational>>,
        weights: Vec<BigRational>,
    },
    /// ℓ = k atoms carry square roots, but their weight-scaled Gram matrices
    /// are rational; the mixture is the plain sum of the grams.
    Grams {
        grams: Vec<DMatrix<BigRational>>,
        weights: Vec<BigRational>,
    },
}

impl ExactAtoms {
    pub fn len(&self) -> usize {
        self.weights().len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights().is_empty()
    }

    pub fn weights(&self) -> &[BigRational] {
        match self {
            ExactAtoms::Patterns { weights, .. } | ExactAtoms::Grams { weights, .. } => weights,
        }
    }

    /// Coordinates each atom touches.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        match self {
            ExactAtoms::Patterns { atoms, .. } => atoms
                .iter()
                .map(|x| {
                    (0..x.len()).filter(|&i| !x[i].is_zero()).collect()
                })
                .collect(),
            ExactAtoms::Grams { grams, .. } => grams
                .iter()
                .map(|g| {
                    (0..g.nrows()).filter(|&i| !g[(i, i)].is_zero()).collect()
                })
                .collect(),
        }
    }

    /// Σ over atoms of the weighted outer product, in amplitude scale.
    pub fn mixture(&self, n: usize) -> DMatrix<BigRational> {
        let mut m = DMatrix::from_element(n, n, BigRational::zero());
        match self {
            ExactAtoms::Patterns { atoms, weights } => {
                for (x, w) in atoms.iter().zip(weights) {
                    for i in 0..n {
                        if x[i].is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            if x[j].is_zero() {
                                continue;
                            }
                            m[(i, j)] += w * &x[i] * &x[j];
                        }
                    }
                }
            }
            ExactAtoms::Grams { grams, .. } => {
                for g in grams {
                    for i in 0..n {
                        for j in 0..n {
                            m[(i, j)] += g[(i, j)].clone();
                        }
                    }
                }
            }
        }
        m
    }
}

/// An exact optimality certificate for a state with rational amplitudes.
/// Every field is rational and every identity checked by [`verify`] holds
/// with zero gap.
///
/// [`verify`]: ExactCertificate::verify
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCertificate {
    pub k: usize,
    /// Branch index of the closed form.
    pub ell: usize,
    /// Canonical amplitudes: moduli sorted non-increasing.
    pub amplitudes: Vec<BigRational>,
    /// N = Σ qᵢ²; the certified state is q/√N.
    pub norm_sq: BigRational,
    /// Robustness of the normalized state.
    pub value: BigRational,
    /// Witness pattern p; the dual witness is W = p pᵀ / `witness_scale`.
    pub witness_pattern: Vec<BigRational>,
    /// Σ of the k largest squared pattern entries (= ⟨p, q⟩ when ℓ ≥ 2).
    pub witness_scale: BigRational,
    /// Amplitude-scale slack: N times the normalized slack matrix.
    pub slack: DMatrix<BigRational>,
    pub atoms: ExactAtoms,
    /// I₂ couplings (i, j, sᵢⱼ) of the slack, each sᵢⱼ ≤ 0.
    pub pair_couplings: Vec<(usize, usize, BigRational)>,
    /// Diagonal remainder of the slack's I₂ decomposition.
    pub diagonal_part: Vec<BigRational>,
}

impl ExactCertificate {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// The dual witness W = p pᵀ / B, entrywise rational.
    pub fn witness_matrix(&self) -> DMatrix<BigRational> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            &self.witness_pattern[i] * &self.witness_pattern[j] / &self.witness_scale
        })
    }

    pub fn value_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    /// Re-checks every identity of the sandwich in exact arithmetic.
    pub fn verify(&self) -> Result<()> {
        let fail = |identity: &'static str| Err(Error::ExactIdentity { identity });
        let n = self.dim();
        let k = self.k;
        if n == 0 || k < 2 || k > n || self.witness_pattern.len() != n {
            return fail("shape");
        }
        if self.slack.nrows() != n || self.slack.ncols() != n {
            return fail("shape");
        }
        if self.amplitudes.iter().any(|x| x.is_negative()) {
            return fail("amplitude sign");
        }
        if self.amplitudes.windows(2).any(|w| w[0] < w[1]) {
            return fail("amplitude order");
        }
        let q = &self.amplitudes;
        let norm_sq = sum(q.iter().map(|x| x * x));
        if norm_sq != self.norm_sq || norm_sq.is_zero() {
            return fail("norm");
        }

        let tails = tail_sums(q);
        if select_ell(q, &tails, k) != self.ell {
            return fail("branch index");
        }
        let ell = self.ell;
        let denom = int(k - ell + 1);
        let s_ell = &tails[ell - 1];
        let tail_sq = sum(q[ell - 1..].iter().map(|x| x * x));
        if self.value != (s_ell * s_ell / &denom - tail_sq) / &norm_sq {
            return fail("closed-form value");
        }
        if self.value.is_negative() {
            return fail("value sign");
        }

        // Witness tightness: the top k×k principal submatrix of W = ppᵀ/B has
        // eigenvalue Σᵢ<k pᵢ²/B, which must be exactly 1; every other k-subset
        // sum is no larger because the pattern is sorted non-increasing.
        let p = &self.witness_pattern;
        if p.windows(2).any(|w| w[0] < w[1]) || p.iter().any(|x| x.is_negative()) {
            return fail("witness pattern order");
        }
        if sum(p[..k].iter().map(|x| x * x)) != self.witness_scale {
            return fail("witness tightness");
        }
        // Objective: ⟨p,q⟩²/(B·N) − 1 = value.
        let inner = sum(p.iter().zip(q).map(|(a, b)| a * b));
        let one_plus = &self.value + BigRational::one();
        if &inner * &inner != &one_plus * &self.witness_scale * &norm_sq {
            return fail("witness objective");
        }

        // Primal side.
        let weights = self.atoms.weights();
        if weights.is_empty() || weights.iter().any(|w| w.is_negative()) {
            return fail("weight sign");
        }
        if sum(weights.iter().map(Clone::clone)) != BigRational::one() {
            return fail("weight sum");
        }
        if self.atoms.supports().iter().any(|s| s.len() > k) {
            return fail("atom support");
        }
        // Atoms carry norm² = N·(value+1) regardless of branch; for grams the
        // trace is the weight times that.
        let beta_sq_scaled = &one_plus * &norm_sq;
        match &self.atoms {
            ExactAtoms::Patterns { atoms, .. } => {
                if atoms.len() != weights.len() || atoms.iter().any(|x| x.len() != n) {
                    return fail("shape");
                }
                if atoms
                    .iter()
                    .any(|x| sum(x.iter().map(|e| e * e)) != beta_sq_scaled)
                {
                    return fail("atom norm");
                }
            }
            ExactAtoms::Grams { grams, weights } => {
                if grams.len() != weights.len()
                    || grams.iter().any(|g| g.nrows() != n || g.ncols() != n)
                {
                    return fail("shape");
                }
                for (g, w) in grams.iter().zip(weights) {
                    let trace = sum((0..n).map(|i| g[(i, i)].clone()));
                    if trace != w * &beta_sq_scaled {
                        return fail("atom norm");
                    }
                }
            }
        }
        let mut expected = self.atoms.mixture(n);
        for i in 0..n {
            for j in 0..n {
                expected[(i, j)] -= &q[i] * &q[j];
            }
        }
        if expected != self.slack {
            return fail("primal reconstruction");
        }
        let trace = sum((0..n).map(|i| self.slack[(i, i)].clone()));
        if trace != &self.value * &norm_sq {
            return fail("slack trace");
        }

        // I₂ decomposition of the slack.
        let mut rebuilt = DMatrix::from_element(n, n, BigRational::zero());
        for (i, j, coupling) in &self.pair_couplings {
            if *i >= n || *j >= n || i >= j || coupling.is_positive() {
                return fail("pair coupling");
            }
            let size = coupling.abs();
            rebuilt[(*i, *i)] += &size;
            rebuilt[(*j, *j)] += &size;
            rebuilt[(*i, *j)] += coupling;
            rebuilt[(*j, *i)] += coupling;
        }
        if self.diagonal_part.len() != n || self.diagonal_part.iter().any(|d| d.is_negative()) {
            return fail("diagonal part");
        }
        for i in 0..n {
            rebuilt[(i, i)] += &self.diagonal_part[i];
        }
        if rebuilt != self.slack {
            return fail("slack decomposition");
        }
        Ok(())
    }
}

fn sum<I: IntoIterator<Item = BigRational>>(items: I) -> BigRational {
    items
        .into_iter()
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// tails[j] = Σ_{i ≥ j} q_i (0-based).
fn tail_sums(q: &[BigRational]) -> Vec<BigRational> {
    let mut tails = vec![BigRational::zero(); q.len()];
    let mut acc = BigRational::zero();
    for j in (0..q.len()).rev() {
        acc += &q[j];
        tails[j] = acc.clone();
    }
    tails
}

/// Largest ℓ in {2,…,k} with q_{ℓ−1} ≥ s_ℓ/(k−ℓ+1) (1-based), else 1.
fn select_ell(q: &[BigRational], tails: &[BigRational], k: usize) -> usize {
    for cand in (2..=k).rev() {
        if &q[cand - 2] * int(k - cand + 1) >= tails[cand - 1] {
            return cand;
        }
    }
    1
}

/// Build an exact certificate for the state with the given rational
/// amplitudes (any scale, any signs) at coherence level k.
///
/// The returned certificate has already passed [`ExactCertificate::verify`].
pub fn exact_certify(amplitudes: &[BigRational], k: usize) -> Result<ExactCertificate> {
    let n = amplitudes.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n > MAX_EXACT_DIM {
        return Err(Error::ExactDimTooLarge {
            n,
            max: MAX_EXACT_DIM,
        });
    }
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n, min: 2, max: n });
    }
    let mut q: Vec<BigRational> = amplitudes.iter().map(Signed::abs).collect();
    q.sort_by(|a, b| b.cmp(a));
    let norm_sq = sum(q.iter().map(|x| x * x));
    if norm_sq.is_zero() {
        return Err(Error::InvalidInput("amplitudes are all zero".into()));
    }

    let tails = tail_sums(&q);
    let ell = select_ell(&q, &tails, k);
    let denom = int(k - ell + 1);
    let s_ell = tails[ell - 1].clone();
    let alpha = &s_ell / &denom;
    let head_sq = sum(q[..ell - 1].iter().map(|x| x * x));
    let tail_sq = sum(q[ell - 1..].iter().map(|x| x * x));
    let value = (&s_ell * &s_ell / &denom - tail_sq) / &norm_sq;

    let (witness_pattern, witness_scale) = if ell == 1 {
        (vec![BigRational::one(); n], int(k))
    } else {
        let mut p = q[..ell - 1].to_vec();
        p.resize(n, alpha.clone());
        (p, &alpha * &s_ell + &head_sq)
    };

    let s_k = tails[k - 1].clone();
    let (atoms, slack) = if ell == k {
        if s_k.is_zero() {
            // Fewer than k non-zero amplitudes: the state is its own atom.
            let atoms = ExactAtoms::Patterns {
                atoms: vec![q.clone()],
                weights: vec![BigRational::one()],
            };
            (atoms, DMatrix::from_element(n, n, BigRational::zero()))
        } else {
            build_grams(&q, k, &s_k)
        }
    } else {
        build_lp_patterns(&q, k, ell, &alpha)?
    };

    let (pair_couplings, diagonal_part) = decompose_exact(&slack)?;
    let certificate = ExactCertificate {
        k,
        ell,
        amplitudes: q,
        norm_sq,
        value,
        witness_pattern,
        witness_scale,
        slack,
        atoms,
        pair_couplings,
        diagonal_part,
    };
    certificate.verify()?;
    Ok(certificate)
}

/// ℓ = k primal: one atom per non-zero tail coordinate j, with Gram
/// Gⱼ = uⱼuⱼᵀ for uⱼ = √(qⱼ/s)·(q₁,…,q_{k−1}) ⊕ √(s·qⱼ)·eⱼ. Entries of uⱼ
/// are irrational but every Gram entry is a plain product of rationals.
fn build_grams(q: &[BigRational], k: usize, s_k: &BigRational) -> (ExactAtoms, DMatrix<BigRational>) {
    let n = q.len();
    let mut grams = Vec::new();
    let mut weights = Vec::new();
    for j in k - 1..n {
        if q[j].is_zero() {
            continue;
        }
        let head_scale = &q[j] / s_k;
        let mut g = DMatrix::from_element(n, n, BigRational::zero());
        for a in 0..k - 1 {
            for b in 0..k - 1 {
                g[(a, b)] = &head_scale * &q[a] * &q[b];
            }
            let cross = &q[a] * &q[j];
            g[(a, j)] = cross.clone();
            g[(j, a)] = cross;
        }
        g[(j, j)] = s_k * &q[j];
        grams.push(g);
        weights.push(&q[j] / s_k);
    }
    let mut slack = DMatrix::from_element(n, n, BigRational::zero());
    for i in k - 1..n {
        for j in k - 1..n {
            slack[(i, j)] = if i == j {
                &q[i] * (s_k - &q[i])
            } else {
                -(&q[i] * &q[j])
            };
        }
    }
    (ExactAtoms::Grams { grams, weights }, slack)
}

/// ℓ < k primal: distribute the tail over (k−ℓ+1)-subsets by an exact
/// feasibility LP, mirroring the float builder with zero tolerance.
fn build_lp_patterns(
    q: &[BigRational],
    k: usize,
    ell: usize,
    alpha: &BigRational,
) -> Result<(ExactAtoms, DMatrix<BigRational>)> {
    let n = q.len();
    let head = ell - 1;
    let tail_len = n - head;
    let k_prime = k - head;
    let tail = &q[head..];

    let subsets: Vec<Vec<usize>> = Combinations::new(tail_len, k_prime).collect();
    let num_atoms = subsets.len();
    let one = BigRational::one;
    let mut lp = LpProblem::new(num_atoms);
    lp.push_eq(vec![one(); num_atoms], one())?;
    for (i, t) in tail.iter().enumerate() {
        let row: Vec<BigRational> = subsets
            .iter()
            .map(|b| if b.contains(&i) { one() } else { BigRational::zero() })
            .collect();
        lp.push_eq(row, t / alpha)?;
    }
    for i in 0..tail_len {
        for j in i + 1..tail_len {
            let row: Vec<BigRational> = subsets
                .iter()
                .map(|b| {
                    if b.contains(&i) && b.contains(&j) {
                        one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            lp.push_le(row, &tail[i] * &tail[j] / (alpha * alpha))?;
        }
    }
    let p = match solve_feasibility(&lp, BigRational::zero()) {
        Ok(p) => p,
        Err(LpError::Infeasible { residual }) => {
            return Err(Error::PrimalLpInfeasible { residual })
        }
        Err(other) => return Err(Error::Lp(other)),
    };

    let kept: Vec<(usize, BigRational)> = p
        .into_iter()
        .enumerate()
        .filter(|(_, w)| w.is_positive())
        .collect();
    let mut atoms = Vec::with_capacity(kept.len());
    let mut weights = Vec::with_capacity(kept.len());
    let mut membership = vec![BigRational::zero(); tail_len];
    let mut pair = DMatrix::from_element(tail_len, tail_len, BigRational::zero());
    for (b, w) in &kept {
        let mut x = q[..head].to_vec();
        x.resize(n, BigRational::zero());
        let subset = &subsets[*b];
        for (pos, &i) in subset.iter().enumerate() {
            x[head + i] = alpha.clone();
            membership[i] += w;
            for &j in &subset[pos + 1..] {
                pair[(i, j)] += w;
                pair[(j, i)] += w;
            }
        }
        atoms.push(x);
        weights.push(w.clone());
    }

    let alpha_sq = alpha * alpha;
    let mut slack = DMatrix::from_element(n, n, BigRational::zero());
    for i in 0..tail_len {
        slack[(head + i, head + i)] = &alpha_sq * &membership[i] - &tail[i] * &tail[i];
        for j in i + 1..tail_len {
            let entry = &alpha_sq * &pair[(i, j)] - &tail[i] * &tail[j];
            slack[(head + i, head + j)] = entry.clone();
            slack[(head + j, head + i)] = entry;
        }
    }
    Ok((ExactAtoms::Patterns { atoms, weights }, slack))
}

/// Pair couplings (i, j, s_ij) plus the non-negative diagonal rest.
type ExactSplit = (Vec<(usize, usize, BigRational)>, Vec<BigRational>);

/// Exact I₂ split: D_ii = S_ii − Σ_{j≠i}|s_ij| (the row sum), pair couplings
/// are the off-diagonal entries. Preconditions mirror the float decomposer.
fn decompose_exact(slack: &DMatrix<BigRational>) -> Result<ExactSplit> {
    let n = slack.nrows();
    let mut couplings = Vec::new();
    let mut diagonal = Vec::with_capacity(n);
    for i in 0..n {
        if slack[(i, i)].is_negative() {
            return Err(Error::NegativeDiagonal {
                row: i,
                value: to_f64(&slack[(i, i)]),
            });
        }
        let mut off_total = BigRational::zero();
        for j in 0..n {
            if j == i {
                continue;
            }
            let entry = &slack[(i, j)];
            if entry.is_positive() {
                return Err(Error::PositiveOffDiagonal {
                    row: i,
                    col: j,
                    value: to_f64(entry),
                });
            }
            if *entry != slack[(j, i)] {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    delta: to_f64(&(entry - &slack[(j, i)])),
                });
            }
            off_total += entry.abs();
            if j > i && !entry.is_zero() {
                couplings.push((i, j, entry.clone()));
            }
        }
        let d = &slack[(i, i)] - &off_total;
        if d.is_negative() {
            return Err(Error::NegativeRowSum {
                row: i,
                value: to_f64(&d),
            });
        }
        diagonal.push(d);
    }
    Ok((couplings, diagonal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{canonicalize, certify, robustness_value};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(values: &[i64]) -> Vec<BigRational> {
        values
            .iter()
            .map(|&v| BigRational::from_integer(BigInt::from(v)))
            .collect()
    }

    fn float_state(q: &[BigRational]) -> crate::CanonicalState {
        let norm: f64 = q.iter().map(|x| to_f64(x).powi(2)).sum::<f64>().sqrt();
        let raw: Vec<Complex64> = q
            .iter()
            .map(|x| Complex64::new(to_f64(x) / norm, 0.0))
            .collect();
        canonicalize(&raw, 1e-9).unwrap()
    }

    #[test]
    fn parses_fractions_decimals_and_integers() {
        let cases = [
            ("3/5", rat(3, 5)),
            ("-3/5", rat(-3, 5)),
            ("3/-6", rat(-1, 2)),
            ("0.6", rat(3, 5)),
            ("-1.25", rat(-5, 4)),
            (".5", rat(1, 2)),
            ("2.", rat(2, 1)),
            ("2", rat(2, 1)),
            ("+7", rat(7, 1)),
            ("0", rat(0, 1)),
            ("1e-2", rat(1, 100)),
            ("2.5E3", rat(2500, 1)),
            (" 4/6 ", rat(2, 3)),
        ];
        for (text, expected) in cases {
            assert_eq!(parse_rational(text).unwrap(), expected, "{text}");
        }
    }

    #[test]
    fn rejects_malformed_literals() {
        for text in ["", "1/0", "abc", "1.2.3", "--5", "1e", "e5", "5f", "1/2/3", "∞"] {
            assert!(
                matches!(parse_rational(text), Err(Error::InvalidInput(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn uniform_three_level_is_exactly_one_half() {
        let cert = exact_certify(&ints(&[1, 1, 1]), 2).unwrap();
        assert_eq!(cert.ell, 1);
        assert_eq!(cert.value, rat(1, 2));
        assert_eq!(cert.witness_scale, rat(2, 1));
        assert!(matches!(cert.atoms, ExactAtoms::Patterns { .. }));
        assert_eq!(
            sum(cert.atoms.weights().iter().cloned()),
            BigRational::one()
        );
        assert!(cert.atoms.supports().iter().all(|s| s.len() <= 2));
    }

    #[test]
    fn uniform_anchors_are_exact() {
        assert_eq!(exact_certify(&ints(&[1, 1, 1, 1]), 2).unwrap().value, rat(1, 1));
        assert_eq!(exact_certify(&ints(&[1, 1, 1, 1]), 3).unwrap().value, rat(1, 3));
        assert_eq!(exact_certify(&ints(&[1, 1, 1, 1]), 4).unwrap().value, rat(0, 1));
    }

    #[test]
    fn boundary_head_state_is_two_sevenths() {
        // q₁(k−ℓ+1) = s_ℓ holds with equality, the hardest spot for floats.
        let cert = exact_certify(&ints(&[3, 2, 2, 2]), 3).unwrap();
        assert_eq!(cert.ell, 2);
        assert_eq!(cert.value, rat(2, 7));
        assert_eq!(cert.witness_pattern, ints(&[3, 3, 3, 3]));
        assert_eq!(cert.witness_scale, rat(27, 1));
        assert_eq!(cert.witness_matrix()[(0, 0)], rat(1, 3));
    }

    #[test]
    fn ell_equals_k_grams_certify() {
        let cert = exact_certify(&ints(&[5, 4, 1]), 2).unwrap();
        assert_eq!(cert.ell, 2);
        assert_eq!(cert.value, rat(4, 21));
        let ExactAtoms::Grams { grams, weights } = &cert.atoms else {
            panic!("expected gram atoms");
        };
        assert_eq!(grams.len(), 2);
        assert_eq!(sum(weights.iter().cloned()), BigRational::one());

        let float = robustness_value(&float_state(&cert.amplitudes), 2).unwrap();
        assert!((float.value - cert.value_f64()).abs() < 1e-12);
    }

    #[test]
    fn k_incoherent_states_give_zero_with_trivial_slack() {
        // Two non-zero entries at k = 2, but s_k > 0: one gram atom, q itself.
        let cert = exact_certify(&ints(&[3, 4, 0]), 2).unwrap();
        assert_eq!(cert.value, rat(0, 1));
        assert_eq!(cert.amplitudes, ints(&[4, 3, 0]));
        let ExactAtoms::Grams { grams, weights } = &cert.atoms else {
            panic!("expected gram atoms");
        };
        assert_eq!(grams.len(), 1);
        assert_eq!(grams[0][(0, 1)], rat(12, 1));
        assert_eq!(weights.as_slice(), &[BigRational::one()]);
        assert!(cert.slack.iter().all(|e| e.is_zero()));

        // One non-zero entry: s_k = 0 routes to the pattern path.
        let cert = exact_certify(&ints(&[0, 5, 0]), 2).unwrap();
        assert_eq!(cert.value, rat(0, 1));
        let ExactAtoms::Patterns { atoms, weights } = &cert.atoms else {
            panic!("expected pattern atoms");
        };
        assert_eq!(atoms.as_slice(), &[ints(&[5, 0, 0])]);
        assert_eq!(weights.as_slice(), &[BigRational::one()]);
        assert!(cert.slack.iter().all(|e| e.is_zero()));
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        assert!(matches!(
            exact_certify(&ints(&[1; 9]), 2),
            Err(Error::ExactDimTooLarge { n: 9, max: 8 })
        ));
        assert!(matches!(
            exact_certify(&ints(&[1, 1]), 1),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            exact_certify(&ints(&[1, 1]), 3),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            exact_certify(&ints(&[0, 0]), 2),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(exact_certify(&[], 2), Err(Error::EmptyInput)));
    }

    #[test]
    fn verify_catches_tampering() {
        let cert = exact_certify(&ints(&[3, 2, 2, 2]), 3).unwrap();

        let mut bad = cert.clone();
        bad.value += BigRational::one();
        assert!(matches!(
            bad.verify(),
            Err(Error::ExactIdentity { identity: "closed-form value" })
        ));

        let mut bad = cert.clone();
        bad.witness_scale += BigRational::one();
        assert!(bad.verify().is_err());

        let mut bad = cert.clone();
        bad.slack[(0, 0)] += BigRational::one();
        assert!(bad.verify().is_err());

        let mut bad = cert.clone();
        if let ExactAtoms::Patterns { weights, .. } = &mut bad.atoms {
            weights[0] += rat(1, 7);
        }
        assert!(bad.verify().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn exact_and_float_pipelines_agree(
            numers in proptest::collection::vec(0i64..6, 3..7),
            k_seed in 0usize..4,
        ) {
            prop_assume!(numers.iter().any(|&x| x > 0));
            let n = numers.len();
            let k = 2 + k_seed % (n - 1);
            let q = ints(&numers);
            let cert = exact_certify(&q, k).unwrap();
            prop_assert!(cert.verify().is_ok());

            let state = float_state(&cert.amplitudes);
            let float = robustness_value(&state, k).unwrap();
            prop_assert!((float.value - cert.value_f64()).abs() < 1e-10);
            let full = certify(&state, k, 1e-7).unwrap();
            prop_assert!(full.certified);
        }
    }
}
