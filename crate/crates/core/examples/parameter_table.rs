use hottopixx::bench::{params_csv, params_table};
use hottopixx::instance::DatasetSpec;

// Average conditioning over a few draws per dataset family. The reference
// values at d = 30, n = 200, r = 10 need `hottopixx params --scale full`.
fn main() -> hottopixx::Result<()> {
    let mut rows = Vec::new();
    for id in 1..=4 {
        let mut spec = DatasetSpec::new(id, 30, 200, 10, 2, 5, 17)?;
        spec.deltas.truncate(1);
        rows.push(params_table(&spec)?);
    }
    print!("{}", params_csv(&rows)?);
    Ok(())
}
