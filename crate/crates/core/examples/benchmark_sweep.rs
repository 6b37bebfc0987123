//! A miniature recovery sweep: CSV rows, recovery curves and the threshold
//! table. `hottopixx bench` runs the same code at the preset sizes.

use hottopixx::bench::{format_thresholds, records_to_csv, recovery_curves, run_benchmark, thresholds_from_records, Algorithm, BenchOptions};
use hottopixx::instance::DatasetSpec;

fn main() -> hottopixx::Result<()> {
    let spec = DatasetSpec::new(1, 8, 16, 2, 4, 2, 31)?;
    let algos = [Algorithm::RhhpHybrid, Algorithm::HottopixxQ, Algorithm::Spa];
    let records = run_benchmark(&spec, &algos, &BenchOptions::default())?;

    let csv = records_to_csv(&records)?;
    for line in csv.lines().take(7) {
        println!("{line}");
    }
    println!("... {} rows\n", records.len());

    for ((dataset, alg), curve) in recovery_curves(&records) {
        let pts: Vec<String> = curve.iter().map(|(d, m)| format!("{d:.3}:{m:.2}")).collect();
        println!("dataset {dataset} {alg:<12} {}", pts.join("  "));
    }
    println!("\n{}", format_thresholds(&thresholds_from_records(&records)));
    Ok(())
}
