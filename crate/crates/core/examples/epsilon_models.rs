use hottopixx::instance::DatasetSpec;
use hottopixx::select::{hottopixx_original, model_r_selection, SelectOptions};

/// The older formulations need the noise level up front. Feeding them the
/// true value works; underestimating it can make them infeasible.
fn main() -> hottopixx::Result<()> {
    let spec = DatasetSpec::new(1, 8, 20, 3, 3, 1, 3)?;
    let inst = spec.instance(0, 1)?;
    let opts = SelectOptions { normalize: false, ..SelectOptions::default() };
    println!("basis {:?}, eps {:.4}", inst.basis, inst.epsilon);

    for scale in [1.0, 0.1] {
        let eps = inst.epsilon * scale;
        match hottopixx_original(&inst.a, inst.r(), eps, &opts) {
            Ok(res) => println!("Q  eps x{scale}: J = {:?}", res.j),
            Err(e) => println!("Q  eps x{scale}: {e}"),
        }
        match model_r_selection(&inst.a, eps, &opts) {
            Ok(res) => println!("R  eps x{scale}: J = {:?}", res.j),
            Err(e) => println!("R  eps x{scale}: {e}"),
        }
    }
    Ok(())
}
