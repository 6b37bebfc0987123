//! Solve the trace-pinned self-expressive LP with both backends and check the
//! certificate against the known noise level.

use std::time::Instant;

use hottopixx::instance::DatasetSpec;
use hottopixx::models::{solve_model_p, verify_certificate, Backend, ModelOptions};

fn main() -> hottopixx::Result<()> {
    let spec = DatasetSpec::new(1, 6, 12, 3, 3, 1, 7)?;
    let inst = spec.instance(0, 0)?;
    println!("n = {}, r = {}, eps = {:.4}, basis = {:?}", inst.n(), inst.r(), inst.epsilon, inst.basis);

    for backend in [Backend::Simplex, Backend::FirstOrder] {
        let t = Instant::now();
        let cert = solve_model_p(&inst.a, inst.r(), &ModelOptions::with_backend(backend))?;
        let diag: Vec<String> = cert.p.iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "\n{backend}: theta {:.6} ({:?}, {} iterations, {})",
            cert.theta,
            t.elapsed(),
            cert.diagnostics.iterations,
            cert.diagnostics.status
        );
        println!("diag(X) = [{}]", diag.join(", "));
        print!("{}", verify_certificate(inst.truth(), &cert)?);
    }
    Ok(())
}
