//! Draw one instance of each dataset family, print its conditioning
//! parameters, and round-trip it through an on-disk bundle.

use hottopixx::instance::{DatasetSpec, SyntheticInstance};

fn main() -> hottopixx::Result<()> {
    let dir = std::env::temp_dir().join(format!("hottopixx-gen-{}", std::process::id()));

    println!("{:>7} {:>8} {:>10} {:>10} {:>8} {:>10}", "dataset", "delta", "kappa", "omega", "beta", "cond");
    for id in 1..=4 {
        let spec = DatasetSpec::desk(id, 2024)?;
        let inst = spec.instance(0, 3)?;
        println!(
            "{:>7} {:>8.4} {:>10.3e} {:>10.3e} {:>8.4} {:>10.3e}",
            id, inst.delta, inst.kappa, inst.omega, inst.beta, inst.cond_ratio
        );
        if id == 1 {
            inst.write_bundle(&dir)?;
        }
    }

    let back = SyntheticInstance::read_bundle(&dir)?;
    println!("\nbundle in {}:\n{}", dir.display(), back.manifest());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
