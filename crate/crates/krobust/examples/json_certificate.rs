//! Certificates as self-contained JSON documents: serialize, parse back, and
//! re-verify from the document alone (no access to the original state).

use krobust::document::{CertificateDocument, InputEcho};
use krobust::{canonicalize, certify};
use num_complex::Complex64;

fn main() {
    let raw: Vec<Complex64> = vec![
        Complex64::new(0.5, 0.5),
        Complex64::new(0.0, -0.6),
        Complex64::new(0.375, 0.0),
        Complex64::new(0.05, 0.0),
    ];
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let unit: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
    let state = canonicalize(&unit, 1e-9).expect("unit state");

    let cert = certify(&state, 2, 1e-8).expect("certified");
    let doc = CertificateDocument::from_certificate(InputEcho::vector(&unit), &cert);
    let json = doc.to_json();
    println!("{json}");

    let parsed = CertificateDocument::from_json(&json).expect("well-formed");
    let report = parsed.reverify().expect("re-verifiable");
    println!();
    println!("re-verified from the document alone:");
    println!("  status   {:?}", report.status);
    println!("  max gap  {:.3e}", report.max_gap);
    println!("  failures {:?}", report.failures);
    println!("  byte-stable round trip: {}", parsed.to_json() == json);
}
