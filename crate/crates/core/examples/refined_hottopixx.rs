//! Column selection from the model-P diagonal, first on a tiny matrix with
//! duplicated columns, then on a noisy synthetic instance.

use hottopixx::instance::DatasetSpec;
use hottopixx::linalg::DenseMatrix;
use hottopixx::select::{dedup_columns, refined_hottopixx, SelectOptions};

fn main() -> hottopixx::Result<()> {
    // Columns 0, 2, 3 are e1 and columns 1, 4 are e2.
    let a = DenseMatrix::from_rows(&[&[1.0, 0.0, 1.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0, 1.0]])?;
    let dedup = dedup_columns(&a, 0.0)?;
    println!("distinct columns kept: {:?}", dedup.keep);
    let res = refined_hottopixx(&a, 2, &SelectOptions::default())?;
    println!("selected: {:?}\n", res.j);

    let spec = DatasetSpec::new(1, 10, 16, 3, 4, 1, 11)?;
    let opts = SelectOptions { normalize: false, ..SelectOptions::default() };
    for k in 0..spec.deltas.len() {
        let inst = spec.instance(0, k)?;
        let res = refined_hottopixx(&inst.a, inst.r(), &opts)?;
        println!("delta {:.3}: J = {:?} (basis {:?}), theta {:.4}", inst.delta, res.j, inst.basis, res.certificate.theta);
    }
    Ok(())
}
