//! Successive projection on noiseless and noisy data.

use hottopixx::bench::recovery_rate;
use hottopixx::instance::DatasetSpec;
use hottopixx::spa::spa;

fn main() -> hottopixx::Result<()> {
    for id in [1, 4] {
        let spec = DatasetSpec::new(id, 20, 60, 5, 6, 1, 99)?;
        for k in 0..spec.deltas.len() {
            let inst = spec.instance(0, k)?;
            let picks = spa(&inst.a, inst.r())?;
            println!(
                "dataset {id} delta {:.3}: picks {:?} recovery {:.1}",
                inst.delta,
                picks,
                recovery_rate(&picks, &inst.basis, inst.r())
            );
        }
    }
    Ok(())
}
