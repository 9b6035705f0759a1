//! Exact rational certification: for rational amplitudes the whole
//! certificate lives in BigRational arithmetic and every identity is checked
//! with zero tolerance. Inputs need not be normalized; the scale is carried
//! through exactly.

use krobust::{exact_certify, parse_rational};
use num_rational::BigRational;

fn main() {
    let amplitudes: Vec<BigRational> = ["3/5", "2/5", "2/5", "2/5"]
        .iter()
        .map(|t| parse_rational(t).expect("rational"))
        .collect();
    let norm_sq: BigRational = amplitudes.iter().map(|a| a * a).sum();
    println!("input (3,2,2,2)/5 with squared norm {norm_sq}");

    for k in 2..=4 {
        let cert = exact_certify(&amplitudes, k).expect("certified");
        println!();
        println!("k = {k}: exact value {} = {}", cert.value, cert.value_f64());
        println!("  branch ell        {}", cert.ell);
        let pattern: Vec<String> = cert.witness_pattern.iter().map(|r| r.to_string()).collect();
        let weights: Vec<String> = cert.atoms.weights().iter().map(|r| r.to_string()).collect();
        println!("  witness pattern   [{}] / {}", pattern.join(", "), cert.witness_scale);
        println!("  atom weights      [{}]", weights.join(", "));
        let trace: BigRational = (0..cert.dim()).map(|i| cert.slack[(i, i)].clone()).sum();
        println!("  slack trace       {trace} (value scaled by the squared norm)");
        cert.verify().expect("exact identities");
        println!("  verify(): every identity holds with zero tolerance");
    }
}
