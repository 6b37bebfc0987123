//! When basis columns appear several times, the diagonal spreads its weight
//! over the copies and plain top-r can pick two copies of one column. The
//! cluster postprocessing groups nearby columns first.

use hottopixx::instance::{gen_h_with_duplicates, gen_w_normal, SyntheticInstance};
use hottopixx::linalg::{DenseMatrix, RngStream};
use hottopixx::postprocess::{hybrid_from_certificate, matched_column_error, postprocess_certificate, residual_error};
use hottopixx::models::{solve_model_p, ModelOptions};
use hottopixx::select::select_from_certificate;

fn main() -> hottopixx::Result<()> {
    let mut rng = RngStream::new(5);
    let w = gen_w_normal(8, 3, &mut rng)?;
    // Two extra copies of each basis column.
    let (hbar, perm) = gen_h_with_duplicates(3, 18, 6, &mut rng)?;
    let noise = rng.normal_matrix(8, 18).scale(1e-4);
    let clean = SyntheticInstance::assemble(w, hbar, perm, DenseMatrix::zeros(8, 18), 0.0, 5)?;
    let inst = clean.with_noise(noise, 1e-4)?;

    let cert = solve_model_p(&inst.a, 3, &ModelOptions::default())?;
    let p: Vec<String> = cert.p.iter().map(|v| format!("{v:.2}")).collect();
    println!("diag(X) = [{}]", p.join(" "));

    for (name, res) in [
        ("top-r", select_from_certificate(&inst.a, 3, cert.clone())?),
        ("clusters", postprocess_certificate(&inst.a, 3, cert.clone())?),
        ("hybrid", hybrid_from_certificate(&inst.a, 3, cert)?),
    ] {
        println!(
            "{name:>8}: J = {:?}  residual {:.3e}  W error {:.3e}",
            res.j,
            residual_error(&inst.a, &res.j)?,
            matched_column_error(&inst.w, &res.w_out)?
        );
    }
    Ok(())
}
