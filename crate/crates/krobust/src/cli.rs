//! Command-line front end.
//!
//! Subcommands: `value` (closed form only), `certify` (full duality
//! sandwich), `entangle` (Schmidt pipeline), `norm` (k-support norm pair),
//! `selftest` (randomized property suite). Exit codes: 0 on success or a
//! certified result, 2 on validation errors, 3 when a certification gap
//! exceeds the tolerance or the selftest fails.

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::document::{CertificateDocument, InputEcho, Status, TimingsDoc};
use crate::selftest::{self, SelftestConfig};
use crate::{
    boundary_margin, canonicalize, certify, entanglement_robustness, exact_certify,
    k_support_dual_norm, k_support_norm, lift_certificates, parse_rational, robustness_value,
    schmidt_decompose, Error, ExactCertificate, Result, BOUNDARY_FLAG_TOLERANCE,
    DEFAULT_NORM_TOLERANCE, DEFAULT_TRUNCATION_TOLERANCE, DEFAULT_VERIFY_TOLERANCE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_GAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "krobust",
    version,
    about = "Robustness of k-coherence and Schmidt-rank-k entanglement, with optimality certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form robustness of k-coherence of a pure state.
    Value(ValueArgs),
    /// Certified evaluation: closed form + dual witness + primal mixture.
    Certify(CertifyArgs),
    /// Schmidt-rank-k entanglement robustness of a bipartite pure state.
    Entangle(EntangleArgs),
    /// k-support norm and its dual norm of an arbitrary vector.
    Norm(NormArgs),
    /// Randomized property suite over the whole pipeline.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct ValueArgs {
    /// Amplitudes: comma-separated reals or a+bi literals, or a CSV file path.
    #[arg(long)]
    vector: String,
    /// Coherence level, 2 <= k <= dimension.
    #[arg(long)]
    k: usize,
    /// Emit the certificate document as JSON.
    #[arg(long)]
    json: bool,
    /// Gap tolerance recorded in the document.
    #[arg(long, default_value_t = DEFAULT_VERIFY_TOLERANCE)]
    tolerance: f64,
    /// Also evaluate in exact rational arithmetic (real inputs, n <= 8).
    #[arg(long)]
    exact: bool,
    /// Record wall-clock timings in the document.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Amplitudes: comma-separated reals or a+bi literals, or a CSV file path.
    #[arg(long)]
    vector: String,
    /// Coherence level, 2 <= k <= dimension.
    #[arg(long)]
    k: usize,
    /// Emit the certificate document as JSON.
    #[arg(long)]
    json: bool,
    /// Largest acceptable certification gap.
    #[arg(long, default_value_t = DEFAULT_VERIFY_TOLERANCE)]
    tolerance: f64,
    /// Attach an exact rational certificate (real inputs, n <= 8).
    #[arg(long)]
    exact: bool,
    /// Record wall-clock timings in the document.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct EntangleArgs {
    /// Amplitude matrix: CSV file path, or inline rows separated by ';'.
    #[arg(long)]
    matrix: String,
    /// Schmidt-rank level, 1 <= k <= min(rows, cols).
    #[arg(long)]
    k: usize,
    /// Emit the certificate document as JSON.
    #[arg(long)]
    json: bool,
    /// Largest acceptable certification gap.
    #[arg(long, default_value_t = DEFAULT_VERIFY_TOLERANCE)]
    tolerance: f64,
    /// Record wall-clock timings in the document.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct NormArgs {
    /// Vector entries: comma-separated reals or a+bi literals, or a CSV file.
    #[arg(long)]
    vector: String,
    /// Norm level, 1 <= k <= dimension.
    #[arg(long)]
    k: usize,
    /// Emit the norms as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Seed for the random-state property runs.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Run reduced case counts (useful for a fast smoke check).
    #[arg(long)]
    quick: bool,
}

/// Parse `args` and execute; everything written goes to `out`/`err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version exit successfully through this path
            return if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_VALIDATION
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
        }
    };
    let outcome = match cli.command {
        Command::Value(a) => cmd_value(a, out),
        Command::Certify(a) => cmd_certify(a, out),
        Command::Entangle(a) => cmd_entangle(a, out),
        Command::Norm(a) => cmd_norm(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn cmd_value(args: ValueArgs, out: &mut dyn Write) -> Result<i32> {
    let (entries, tokens) = parse_vector_arg(&args.vector)?;
    let state = canonicalize(&entries, DEFAULT_NORM_TOLERANCE)?;
    let started = Instant::now();
    let rv = robustness_value(&state, args.k)?;
    let near = boundary_margin(&state, args.k) < BOUNDARY_FLAG_TOLERANCE;
    let exact = if args.exact {
        Some(exact_from_tokens(&tokens, &entries, args.k)?)
    } else {
        None
    };

    let mut doc = CertificateDocument::value_only(
        InputEcho::vector(&entries),
        &rv,
        args.k,
        args.tolerance,
        near,
    );
    if let Some(cert) = &exact {
        doc.attach_exact(cert);
    }
    if args.timings {
        doc.timings = Some(TimingsDoc {
            total_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    if args.json {
        let _ = writeln!(out, "{}", doc.to_json());
    } else {
        let _ = writeln!(out, "value: {}", doc.value);
        let _ = writeln!(out, "k-support norm: {}", doc.k_support_norm);
        let _ = writeln!(out, "branch ell: {}", doc.branch_ell);
        if doc.near_boundary {
            let _ = writeln!(out, "near boundary: yes");
        }
        if let Some(cert) = &exact {
            let _ = writeln!(out, "exact value: {}", cert.value);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_certify(args: CertifyArgs, out: &mut dyn Write) -> Result<i32> {
    let (entries, tokens) = parse_vector_arg(&args.vector)?;
    let state = canonicalize(&entries, DEFAULT_NORM_TOLERANCE)?;
    let started = Instant::now();
    let (cert, code) = match certify(&state, args.k, args.tolerance) {
        Ok(cert) => (cert, EXIT_OK),
        Err(Error::CertificationFailed { certificate, .. }) => (*certificate, EXIT_GAP),
        Err(e) => return Err(e),
    };
    let exact = if args.exact {
        Some(exact_from_tokens(&tokens, &entries, args.k)?)
    } else {
        None
    };

    let mut doc = CertificateDocument::from_certificate(InputEcho::vector(&entries), &cert);
    if let Some(exact_cert) = &exact {
        doc.attach_exact(exact_cert);
    }
    if args.timings {
        doc.timings = Some(TimingsDoc {
            total_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    if args.json {
        let _ = writeln!(out, "{}", doc.to_json());
    } else {
        write_certificate_summary(out, &doc);
        if let Some(exact_cert) = &exact {
            let _ = writeln!(out, "exact value: {}", exact_cert.value);
        }
    }
    Ok(code)
}

fn cmd_entangle(args: EntangleArgs, out: &mut dyn Write) -> Result<i32> {
    let matrix = parse_matrix_arg(&args.matrix)?;
    let started = Instant::now();
    let schmidt = schmidt_decompose(&matrix, DEFAULT_TRUNCATION_TOLERANCE)?;
    let cert = match entanglement_robustness(&schmidt, args.k, args.tolerance) {
        Ok(cert) => cert,
        // The coherence-level certificate is still complete on a gap, so
        // lift it and report it with its gaps rather than discarding it.
        Err(Error::CertificationFailed { certificate, .. }) => {
            lift_certificates(&schmidt, &certificate)?
        }
        Err(e) => return Err(e),
    };

    let mut doc = CertificateDocument::from_entanglement(
        InputEcho::matrix(&matrix),
        &schmidt,
        &cert,
        args.tolerance,
    );
    if args.timings {
        doc.timings = Some(TimingsDoc {
            total_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    let code = match doc.status {
        Status::Certified | Status::ValueOnly => EXIT_OK,
        Status::GapExceeded => EXIT_GAP,
    };

    if args.json {
        let _ = writeln!(out, "{}", doc.to_json());
    } else {
        let _ = writeln!(out, "status: {}", status_str(doc.status));
        let _ = writeln!(out, "value: {}", doc.value);
        let _ = writeln!(out, "gamma norm: {}", cert.gamma_norm);
        let _ = writeln!(
            out,
            "schmidt coefficients: {}",
            join_floats(&schmidt.coefficients)
        );
        let _ = writeln!(out, "lifted atoms: {}", cert.lifted_atoms.len());
    }
    Ok(code)
}

fn cmd_norm(args: NormArgs, out: &mut dyn Write) -> Result<i32> {
    let (entries, _) = parse_vector_arg(&args.vector)?;
    let norm = k_support_norm(&entries, args.k)?;
    let dual = k_support_dual_norm(&entries, args.k)?;
    if args.json {
        let body = serde_json::json!({
            "k": args.k,
            "k_support_norm": norm,
            "k_support_dual_norm": dual,
        });
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&body).expect("norms serialize")
        );
    } else {
        let _ = writeln!(out, "k-support norm: {norm}");
        let _ = writeln!(out, "k-support dual norm: {dual}");
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(args: SelftestArgs, out: &mut dyn Write) -> Result<i32> {
    let config = if args.quick {
        SelftestConfig::quick(args.seed)
    } else {
        SelftestConfig::full(args.seed)
    };
    let results = selftest::run_all(&config);
    selftest::write_table(&results, out);
    if results.iter().all(|r| r.passed) {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_GAP)
    }
}

fn status_str(status: Status) -> &'static str {
    match status {
        Status::ValueOnly => "value only",
        Status::Certified => "certified",
        Status::GapExceeded => "gap exceeded",
    }
}

fn write_certificate_summary(out: &mut dyn Write, doc: &CertificateDocument) {
    let _ = writeln!(out, "status: {}", status_str(doc.status));
    let _ = writeln!(out, "value: {}", doc.value);
    let _ = writeln!(out, "k-support norm: {}", doc.k_support_norm);
    let _ = writeln!(out, "branch ell: {}", doc.branch_ell);
    if doc.near_boundary {
        let _ = writeln!(out, "near boundary: yes");
    }
    if let Some(dual) = &doc.dual_witness {
        let _ = writeln!(
            out,
            "dual witness: {} (objective {}, max submatrix eig {})",
            dual.kind, dual.objective, dual.max_submatrix_eig
        );
    }
    if let Some(primal) = &doc.primal {
        let _ = writeln!(
            out,
            "primal: {} atoms, slack trace {}, reconstruction residual {:.3e}",
            primal.weights.len(),
            primal.slack_trace,
            primal.reconstruction_residual
        );
    }
    if let Some(gaps) = &doc.gaps {
        let max = gaps
            .dual_objective
            .max(gaps.primal_trace)
            .max(gaps.reconstruction_residual)
            .max(gaps.dual_feasibility)
            .max(gaps.weight_sum);
        let _ = writeln!(out, "max gap: {max:.3e} (tolerance {})", doc.tolerance);
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn exact_from_tokens(
    tokens: &[String],
    entries: &[Complex64],
    k: usize,
) -> Result<ExactCertificate> {
    if entries.iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidInput(
            "exact mode requires real rational amplitudes".into(),
        ));
    }
    let amplitudes = tokens
        .iter()
        .map(|t| parse_rational(t))
        .collect::<Result<Vec<_>>>()?;
    exact_certify(&amplitudes, k)
}

/// Inline comma/newline-separated entries, or the contents of a file when
/// the argument names one. Returns the parsed entries and the raw tokens
/// (the exact mode re-parses those as rationals).
fn parse_vector_arg(arg: &str) -> Result<(Vec<Complex64>, Vec<String>)> {
    let content = if std::path::Path::new(arg).is_file() {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))?
    } else {
        arg.to_string()
    };
    let tokens: Vec<String> = content
        .split([',', ';', '\n'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    let entries = tokens
        .iter()
        .map(|t| parse_complex(t))
        .collect::<Result<Vec<_>>>()?;
    Ok((entries, tokens))
}

/// CSV file (one row per left-system index) or inline rows separated by ';'.
fn parse_matrix_arg(arg: &str) -> Result<DMatrix<Complex64>> {
    let content = if std::path::Path::new(arg).is_file() {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))?
    } else {
        arg.replace(';', "\n")
    };
    let rows: Vec<Vec<Complex64>> = content
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(|line| {
            line.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m = rows.len();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    let n = rows[0].len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "matrix rows must be non-empty and of equal length".into(),
        ));
    }
    Ok(DMatrix::from_fn(m, n, |a, b| rows[a][b]))
}

/// Real literals plus `a+bi` forms: `1.5`, `2i`, `1-2i`, `-i`, `3e-2+1e-3i`.
fn parse_complex(token: &str) -> Result<Complex64> {
    let t = token.trim();
    let bad = || Error::InvalidInput(format!("cannot parse {token:?} as a number"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'I']) else {
        // Plain reals, including p/q fractions so exact-mode inputs parse.
        if let Some((num, den)) = t.split_once('/') {
            let num = num.trim().parse::<f64>().map_err(|_| bad())?;
            let den = den.trim().parse::<f64>().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            return Ok(Complex64::new(num / den, 0.0));
        }
        return t
            .parse::<f64>()
            .map(|x| Complex64::new(x, 0.0))
            .map_err(|_| bad());
    };
    // Split before the sign of the imaginary part; signs at the start or
    // inside an exponent do not separate the two parts.
    let split = body
        .char_indices()
        .rev()
        .find(|&(pos, c)| {
            (c == '+' || c == '-') && pos != 0 && !matches!(body.as_bytes()[pos - 1], b'e' | b'E')
        })
        .map(|(pos, _)| pos);
    let (re_str, im_str) = match split {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() {
        0.0
    } else {
        re_str.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}
