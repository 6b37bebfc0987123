//! Anchor sets and qualifying clusters on an instance whose basis columns
//! are duplicated, at a radius inside and one outside the admissible regime.

use hottopixx::instance::{gen_h_with_duplicates, gen_w_normal, SyntheticInstance};
use hottopixx::linalg::{DenseMatrix, RngStream};
use hottopixx::models::{solve_model_p, ModelOptions};
use hottopixx::postprocess::analyze_anchor_structure;

fn main() -> hottopixx::Result<()> {
    let mut rng = RngStream::new(8);
    let w = gen_w_normal(6, 3, &mut rng)?;
    let (hbar, perm) = gen_h_with_duplicates(3, 12, 3, &mut rng)?;
    let inst = SyntheticInstance::assemble(w, hbar, perm, DenseMatrix::zeros(6, 12), 0.0, 8)?;
    let cert = solve_model_p(&inst.a, 3, &ModelOptions::default())?;

    for mu in [inst.kappa / 70.0, inst.omega] {
        println!("{}", analyze_anchor_structure(&inst, &cert, mu)?);
    }
    Ok(())
}
