//! Benchmark sweeps over generated datasets: recovery-rate records, CSV
//! emission, threshold summaries and parameter tables.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::instance::{compute_beta, compute_kappa, compute_omega, cond_ratio, DatasetSpec, SyntheticInstance};
use crate::linalg::RngStream;
use crate::models::{solve_model_p, Backend, Certificate, ModelOptions, SolveStatus};
use crate::postprocess::{hybrid_from_certificate, postprocess_certificate};
use crate::select::{
    dedup_columns, hottopixx_original, model_r_selection, refined_hottopixx, select_from_certificate, SelectOptions,
    SelectionResult,
};
use crate::solvers::FirstOrderOptions;
use crate::spa::spa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    RhhpHybrid,
    RhhpPost,
    RhhpPlain,
    HottopixxQ,
    ModelR,
    Spa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::RhhpHybrid,
        Algorithm::RhhpPost,
        Algorithm::RhhpPlain,
        Algorithm::HottopixxQ,
        Algorithm::ModelR,
        Algorithm::Spa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RhhpHybrid => "RHHP-hybrid",
            Algorithm::RhhpPost => "RHHP-post",
            Algorithm::RhhpPlain => "RHHP-plain",
            Algorithm::HottopixxQ => "Hottopixx-Q",
            Algorithm::ModelR => "ModelR",
            Algorithm::Spa => "SPA",
        }
    }

    fn uses_model_p(self) -> bool {
        matches!(self, Algorithm::RhhpHybrid | Algorithm::RhhpPost | Algorithm::RhhpPlain)
    }

    /// Parses a comma-separated list such as `RHHP-hybrid,SPA`, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::ALL.to_vec());
        }
        let mut out: Vec<Algorithm> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let a: Algorithm = part.parse()?;
            if !out.contains(&a) {
                out.push(a);
            }
        }
        if out.is_empty() {
            return Err(Error::BadParameter("empty algorithm list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::BadParameter(format!("unknown algorithm {s:?}")))
    }
}

/// `|J ∩ basis| / r`.
pub fn recovery_rate(j: &[usize], basis: &[usize], r: usize) -> f64 {
    let hits = j.iter().filter(|u| basis.contains(u)).count();
    hits as f64 / r as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    /// The solver stopped at its iteration cap; `J` comes from its best iterate.
    IterLimit,
    Failed(&'static str),
}

impl RunStatus {
    fn from_error(e: &Error) -> Self {
        RunStatus::Failed(match e {
            Error::Infeasible => "infeasible",
            Error::Unbounded => "unbounded",
            Error::IterLimit(_) | Error::NoConvergence { .. } => "iteration-limit",
            Error::NoQualifyingCluster { .. } => "no-qualifying-cluster",
            Error::DegenerateResidual(_) => "degenerate-residual",
            Error::RankTooLarge { .. } => "rank-too-large",
            _ => "error",
        })
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, RunStatus::Failed(_))
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::IterLimit => f.write_str("iter-limit"),
            RunStatus::Failed(kind) => write!(f, "failed:{kind}"),
        }
    }
}

impl std::str::FromStr for RunStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        const KINDS: [&str; 7] = [
            "infeasible",
            "unbounded",
            "iteration-limit",
            "no-qualifying-cluster",
            "degenerate-residual",
            "rank-too-large",
            "error",
        ];
        match s {
            "ok" => Ok(RunStatus::Ok),
            "iter-limit" => Ok(RunStatus::IterLimit),
            _ => s
                .strip_prefix("failed:")
                .and_then(|k| KINDS.iter().find(|&&x| x == k))
                .map(|&k| RunStatus::Failed(k))
                .ok_or_else(|| Error::MalformedCsv(format!("unknown status {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub dataset: u8,
    pub delta: f64,
    pub algorithm: Algorithm,
    pub trial: usize,
    /// Selected columns, 0-based and ascending.
    pub j: Vec<usize>,
    pub recovery: f64,
    /// Wall time; `None` unless timing was requested.
    pub runtime_ms: Option<f64>,
    /// Backend of the LP solve, or `none` for SPA.
    pub backend: String,
    pub status: RunStatus,
}

pub const CSV_HEADER: [&str; 9] = ["dataset", "delta", "algorithm", "trial", "J", "recovery", "runtime_ms", "backend", "status"];

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub backend: Backend,
    pub first_order: FirstOrderOptions,
    /// Record wall times. Off by default so reruns are byte-identical.
    pub timing: bool,
    pub workers: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            first_order: FirstOrderOptions { max_iter: 10_000, ..FirstOrderOptions::default() },
            timing: false,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Named dataset sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// d = 10, n = 30, r = 3.
    Desk,
    /// d = 15, n = 60, r = 5.
    Trend,
    /// d = 30, n = 200, r = 10; long-running, first-order backend only.
    Full,
}

impl Scale {
    pub fn spec(self, id: u8, seed: u64) -> Result<DatasetSpec> {
        match self {
            Scale::Desk => DatasetSpec::desk(id, seed),
            Scale::Trend => DatasetSpec::trend(id, seed),
            Scale::Full => DatasetSpec::full(id, seed),
        }
    }

    /// Backend to use given the caller's choice.
    pub fn backend(self, requested: Backend) -> Backend {
        match self {
            Scale::Full => Backend::FirstOrder,
            _ => requested,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Trend => "trend",
            Scale::Full => "full",
        })
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "trend" => Ok(Scale::Trend),
            "full" => Ok(Scale::Full),
            _ => Err(Error::BadParameter(format!("unknown scale {s:?} (desk, trend, full)"))),
        }
    }
}

/// Distinct cost vectors for models Q and R, shuffled per trial so that
/// the cheapest diagonal positions carry no information about the basis.
fn trial_costs(spec: &DatasetSpec, trial: usize) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n;
    let perm = RngStream::derived(spec.master_seed, &[u64::from(spec.id), trial as u64, 0xC057]).permutation(n);
    let f: Vec<f64> = perm.iter().map(|&k| (k + 1) as f64 / n as f64).collect();
    let g = f.iter().map(|v| 1.0 + v).collect();
    (f, g)
}

fn solve_status(cert: &Certificate) -> RunStatus {
    match cert.diagnostics.status {
        SolveStatus::Optimal => RunStatus::Ok,
        SolveStatus::IterLimit => RunStatus::IterLimit,
    }
}

struct Runner<'a> {
    spec: &'a DatasetSpec,
    opts: &'a BenchOptions,
}

impl Runner<'_> {
    fn model_options(&self, spec: &DatasetSpec, trial: usize) -> ModelOptions {
        let (f, g) = trial_costs(spec, trial);
        ModelOptions {
            backend: self.opts.backend,
            first_order: self.opts.first_order.clone(),
            f: Some(f),
            g: Some(g),
            ..ModelOptions::default()
        }
    }

    fn instance_records(&self, trial: usize, k: usize, algos: &[Algorithm]) -> Vec<BenchRecord> {
        let spec = self.spec;
        let delta = spec.deltas[k];
        let record = |algorithm, j: Vec<usize>, recovery, runtime_ms, backend: String, status| BenchRecord {
            dataset: spec.id,
            delta,
            algorithm,
            trial,
            j,
            recovery,
            runtime_ms,
            backend,
            status,
        };
        let inst = match spec.instance(trial, k) {
            Ok(i) => i,
            Err(e) => {
                return algos
                    .iter()
                    .map(|&a| record(a, Vec::new(), 0.0, None, "none".into(), RunStatus::from_error(&e)))
                    .collect()
            }
        };
        let model = self.model_options(spec, trial);
        let backend = model.resolve_backend(inst.n()).to_string();
        let sel = SelectOptions { model, normalize: false, dedup_tau: 0.0 };
        let timed = |t: Instant| self.opts.timing.then(|| t.elapsed().as_secs_f64() * 1e3);

        // One model-P solve serves every RHHP variant.
        let t0 = Instant::now();
        let shared = if algos.iter().any(|a| a.uses_model_p()) {
            Some(solve_model_p(&inst.a, inst.r(), &sel.model))
        } else {
            None
        };
        let shared_ms = t0.elapsed().as_secs_f64() * 1e3;

        algos
            .iter()
            .map(|&alg| {
                let t = Instant::now();
                let outcome: Result<(Vec<usize>, RunStatus)> = match alg {
                    Algorithm::Spa => spa(&inst.a, inst.r()).map(|mut j| {
                        j.sort_unstable();
                        (j, RunStatus::Ok)
                    }),
                    Algorithm::HottopixxQ => {
                        hottopixx_original(&inst.a, inst.r(), inst.epsilon, &sel).map(|s| with_status(&s))
                    }
                    Algorithm::ModelR => model_r_selection(&inst.a, inst.epsilon, &sel).map(|s| with_status(&s)),
                    _ => match shared.as_ref().expect("solved above") {
                        Err(e) => Err(clone_error(e)),
                        Ok(cert) => self.rhhp(alg, &inst, cert.clone(), &sel),
                    },
                };
                let runtime = timed(t).map(|ms| if alg.uses_model_p() { ms + shared_ms } else { ms });
                let backend = if alg == Algorithm::Spa { "none".to_string() } else { backend.clone() };
                match outcome {
                    Ok((j, status)) => {
                        let rec = recovery_rate(&j, &inst.basis, inst.r());
                        record(alg, j, rec, runtime, backend, status)
                    }
                    Err(e) => record(alg, Vec::new(), 0.0, runtime, backend, RunStatus::from_error(&e)),
                }
            })
            .collect()
    }

    fn rhhp(&self, alg: Algorithm, inst: &SyntheticInstance, cert: Certificate, sel: &SelectOptions) -> Result<(Vec<usize>, RunStatus)> {
        let r = inst.r();
        let res = match alg {
            Algorithm::RhhpHybrid => hybrid_from_certificate(&inst.a, r, cert)?,
            Algorithm::RhhpPost => postprocess_certificate(&inst.a, r, cert)?,
            _ => {
                // Exact duplicates would change the model-P input; only then
                // is a separate solve needed.
                if dedup_columns(&inst.a, sel.dedup_tau)?.keep.len() == inst.n() {
                    select_from_certificate(&inst.a, r, cert)?
                } else {
                    refined_hottopixx(&inst.a, r, sel)?
                }
            }
        };
        Ok(with_status(&res))
    }
}

fn with_status(s: &SelectionResult) -> (Vec<usize>, RunStatus) {
    (s.j.clone(), solve_status(&s.certificate))
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::Infeasible => Error::Infeasible,
        Error::Unbounded => Error::Unbounded,
        Error::IterLimit(n) => Error::IterLimit(*n),
        other => Error::BadParameter(other.to_string()),
    }
}

/// Runs every algorithm on every `(draw, δ)` instance of `spec`. Rows are
/// ordered by draw, then δ, then the order of `algos`. Solver failures are
/// recorded in the row status and never stop the sweep.
pub fn run_benchmark(spec: &DatasetSpec, algos: &[Algorithm], opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    if algos.is_empty() {
        return Err(Error::BadParameter("no algorithms requested".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..spec.trials).flat_map(|t| (0..spec.deltas.len()).map(move |k| (t, k))).collect();
    let runner = Runner { spec, opts };
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, Vec<BenchRecord>)>> = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..opts.workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(t, k)) = jobs.get(idx) else { break };
                let recs = runner.instance_records(t, k, algos);
                done.lock().expect("no worker panics while holding the lock").push((idx, recs));
            });
        }
    });
    let mut done = done.into_inner().expect("workers finished");
    done.sort_by_key(|(idx, _)| *idx);
    Ok(done.into_iter().flat_map(|(_, recs)| recs).collect())
}

/// [`run_benchmark`] followed by [`write_records`].
pub fn run_benchmark_to(spec: &DatasetSpec, algos: &[Algorithm], opts: &BenchOptions, out: &Path) -> Result<Vec<BenchRecord>> {
    let records = run_benchmark(spec, algos, opts)?;
    write_records(out, &records)?;
    Ok(records)
}

fn join_indices(j: &[usize]) -> String {
    j.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(";")
}

pub fn records_to_csv(records: &[BenchRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.dataset.to_string(),
            r.delta.to_string(),
            r.algorithm.to_string(),
            r.trial.to_string(),
            join_indices(&r.j),
            r.recovery.to_string(),
            r.runtime_ms.map_or_else(|| "-".to_string(), |ms| format!("{ms:.3}")),
            r.backend.clone(),
            r.status.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<()> {
    fs::write(path, records_to_csv(records)?)?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).ok_or_else(|| Error::MalformedCsv(format!("line {line}: missing column {}", CSV_HEADER[idx])))?;
    raw.parse().map_err(|_| Error::MalformedCsv(format!("line {line}: bad {} value {raw:?}", CSV_HEADER[idx])))
}

/// Parses CSV text produced by [`records_to_csv`].
pub fn parse_records(text: &str) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::MalformedCsv(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::MalformedCsv(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::MalformedCsv(format!("line {line}: {e}")))?;
        if row.len() != CSV_HEADER.len() {
            return Err(Error::MalformedCsv(format!("line {line}: {} columns", row.len())));
        }
        let j_raw = row.get(4).unwrap_or_default();
        let j = if j_raw.is_empty() {
            Vec::new()
        } else {
            j_raw
                .split(';')
                .map(|s| s.parse().map_err(|_| Error::MalformedCsv(format!("line {line}: bad index {s:?}"))))
                .collect::<Result<_>>()?
        };
        let runtime_raw = row.get(6).unwrap_or_default();
        let recovery: f64 = field(&row, 5, line)?;
        let delta: f64 = field(&row, 1, line)?;
        if !(0.0..=1.0).contains(&recovery) || !(delta > 0.0) {
            return Err(Error::MalformedCsv(format!("line {line}: recovery {recovery} or delta {delta} out of range")));
        }
        out.push(BenchRecord {
            dataset: field(&row, 0, line)?,
            delta,
            algorithm: field(&row, 2, line)?,
            trial: field(&row, 3, line)?,
            j,
            recovery,
            runtime_ms: if runtime_raw == "-" { None } else { Some(field(&row, 6, line)?) },
            backend: row.get(7).unwrap_or_default().to_string(),
            status: field(&row, 8, line)?,
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>> {
    parse_records(&fs::read_to_string(path)?)
}

/// Mean recovery per `(dataset, algorithm, δ)`, δ ascending.
pub fn recovery_curves(records: &[BenchRecord]) -> BTreeMap<(u8, Algorithm), Vec<(f64, f64)>> {
    let mut acc: BTreeMap<(u8, Algorithm), Vec<(f64, f64, usize)>> = BTreeMap::new();
    for r in records {
        let curve = acc.entry((r.dataset, r.algorithm)).or_default();
        match curve.iter_mut().find(|(d, _, _)| *d == r.delta) {
            Some(slot) => {
                slot.1 += r.recovery;
                slot.2 += 1;
            }
            None => curve.push((r.delta, r.recovery, 1)),
        }
    }
    acc.into_iter()
        .map(|(key, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (key, pts.into_iter().map(|(d, s, c)| (d, s / c as f64)).collect())
        })
        .collect()
}

/// Largest noise level up to which the mean recovery stays at or above each
/// bar; `None` when the smallest level already misses it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub dataset: u8,
    pub algorithm: Algorithm,
    pub full: Option<f64>,
    pub eighty: Option<f64>,
}

fn threshold(curve: &[(f64, f64)], bar: f64) -> Option<f64> {
    curve.iter().take_while(|(_, m)| *m >= bar - 1e-12).last().map(|(d, _)| *d)
}

pub fn thresholds_from_records(records: &[BenchRecord]) -> Vec<ThresholdRow> {
    recovery_curves(records)
        .into_iter()
        .map(|((dataset, algorithm), curve)| ThresholdRow {
            dataset,
            algorithm,
            full: threshold(&curve, 1.0),
            eighty: threshold(&curve, 0.8),
        })
        .collect()
}

/// Reads a benchmark CSV and summarizes its thresholds.
pub fn summarize_thresholds(csv: &Path) -> Result<Vec<ThresholdRow>> {
    Ok(thresholds_from_records(&read_records(csv)?))
}

pub fn format_thresholds(rows: &[ThresholdRow]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |d| format!("{d:.3}"));
    let mut s = format!("{:<8} {:<12} {:>8} {:>8}\n", "dataset", "algorithm", "100%", "80%");
    for r in rows {
        s.push_str(&format!("{:<8} {:<12} {:>8} {:>8}\n", r.dataset, r.algorithm.name(), cell(r.full), cell(r.eighty)));
    }
    s
}

/// Averages of the conditioning parameters over a spec's draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsRow {
    pub dataset: u8,
    pub draws: usize,
    pub kappa: f64,
    pub omega: f64,
    pub cond: f64,
    pub beta: f64,
}

pub fn params_table(spec: &DatasetSpec) -> Result<ParamsRow> {
    spec.validate()?;
    let mut sums = [0.0f64; 4];
    for t in 0..spec.trials {
        let (w, hbar) = spec.draw_basis(t)?;
        let (kappa, omega) = if spec.r >= 2 { (compute_kappa(&w)?, compute_omega(&w)?) } else { (1.0, 2.0) };
        for (s, v) in sums.iter_mut().zip([kappa, omega, cond_ratio(&w)?, compute_beta(&hbar)]) {
            *s += v;
        }
    }
    let m = spec.trials as f64;
    Ok(ParamsRow { dataset: spec.id, draws: spec.trials, kappa: sums[0] / m, omega: sums[1] / m, cond: sums[2] / m, beta: sums[3] / m })
}

pub fn params_csv(rows: &[ParamsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dataset", "draws", "kappa", "omega", "cond", "beta"])?;
    for r in rows {
        w.write_record([
            r.dataset.to_string(),
            r.draws.to_string(),
            format!("{:.4e}", r.kappa),
            format!("{:.4e}", r.omega),
            format!("{:.4e}", r.cond),
            format!("{:.4e}", r.beta),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
