//! Subcommand bodies. Each returns the text destined for stdout.

use std::path::{Path, PathBuf};

use serde::Serialize;
use spectralset::bounds::{assemble_report, OmegaChoice, ReportConfig};
use spectralset::ensembles::{sample, Ensemble};
use spectralset::geometry::{boundary_mesh, farthest_point_modulus, min_radius_of_curvature, perimeter, SupportFn};
use spectralset::io::{write_atomic, MatrixFile};
use spectralset::ranges::{numrange_body, qrange_body, QParameter, QRangeOptions};
use spectralset::search::{conjecture_trial, Finding, SearchOptions, TrialOptions};
use spectralset::{Error, Operator, Result};
use spectralset_verify::{criteria, run, CriterionResult, VerifyConfig};

use crate::config::{Format, RunConfig};

#[derive(Debug, Serialize)]
struct BodySummary {
    name: String,
    q_abs: f64,
    degree: usize,
    perimeter: f64,
    w_omega: f64,
    min_rho: f64,
    csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RangeSummary {
    n: usize,
    grid_n: usize,
    fourier_k: usize,
    seed: u64,
    matrix_hash: String,
    bodies: Vec<BodySummary>,
}

fn mesh_csv(h: &SupportFn, cfg: &RunConfig) -> Result<Vec<u8>> {
    let mesh = boundary_mesh(h, cfg.grid_n, &cfg.tol)?;
    let mut buf = Vec::new();
    mesh.write_csv(&mut buf)?;
    Ok(buf)
}

/// Boundary polylines of `W(A)` and, with `q`, of `Ω_q`.
///
/// With `--out DIR` the CSVs go to `DIR/numerical_range.csv`,
/// `DIR/qrange.csv` and the summary to `DIR/summary.json`; stdout gets the
/// summary (json) or the last polyline (csv).
pub fn range(a: &Operator, cfg: &RunConfig) -> Result<String> {
    let tol = &cfg.tol;
    let mut bodies = vec![("numerical_range", 1.0, numrange_body(a, cfg.grid_n, cfg.fourier_k, tol)?)];
    if let Some(q) = cfg.q()? {
        let opts = QRangeOptions { seed: cfg.seed, ..QRangeOptions::default() };
        bodies.push(("qrange", q.abs(), qrange_body(a, q, cfg.grid_n, cfg.fourier_k, &opts, tol)?));
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut summaries = Vec::new();
    let mut last_csv = Vec::new();
    for (name, q_abs, h) in &bodies {
        let csv = mesh_csv(h, cfg)?;
        let path = match &cfg.out {
            Some(dir) => {
                let p = dir.join(format!("{name}.csv"));
                write_atomic(&p, &csv)?;
                Some(p)
            }
            None => None,
        };
        summaries.push(BodySummary {
            name: name.to_string(),
            q_abs: *q_abs,
            degree: h.degree(),
            perimeter: perimeter(h),
            w_omega: farthest_point_modulus(h),
            min_rho: min_radius_of_curvature(h, tol)?,
            csv: path,
        });
        last_csv = csv;
    }
    let summary = RangeSummary {
        n: a.dim(),
        grid_n: cfg.grid_n,
        fourier_k: cfg.fourier_k,
        seed: cfg.seed,
        matrix_hash: a.fingerprint(),
        bodies: summaries,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    if let Some(dir) = &cfg.out {
        write_atomic(&dir.join("summary.json"), json.as_bytes())?;
    }
    Ok(match cfg.format {
        Format::Json => json + "\n",
        Format::Csv => String::from_utf8(last_csv).expect("CSV is ASCII"),
    })
}

/// The full bounds report as JSON.
pub fn bounds(a: &Operator, cfg: &RunConfig, omega: OmegaChoice) -> Result<String> {
    if cfg.format != Format::Json {
        return Err(Error::input("bounds only writes JSON"));
    }
    let report = assemble_report(
        a,
        &ReportConfig {
            grid_n: cfg.grid_n,
            fourier_k: cfg.fourier_k,
            q: cfg.q()?,
            omega,
            seed: cfg.seed,
            tol: cfg.tol,
            qrange: QRangeOptions::default(),
        },
    )?;
    let json = report.to_json()? + "\n";
    if let Some(p) = &cfg.out {
        write_atomic(p, json.as_bytes())?;
    }
    Ok(json)
}

/// Where conjecture trials take their matrices from.
pub enum Source {
    Matrix(Operator),
    Ensemble { kind: Ensemble, n: usize, trials: usize },
}

#[derive(Debug, Serialize)]
struct QSummary {
    q_abs: f64,
    bound: f64,
    max_ratio: Option<f64>,
    mean_ratio: Option<f64>,
    trials: usize,
    violations: usize,
    errors: usize,
}

#[derive(Debug, Serialize)]
struct TrialError {
    trial: usize,
    seed: u64,
    q_abs: f64,
    message: String,
}

#[derive(Debug, Serialize)]
struct ConjectureSummary {
    source: String,
    n: usize,
    trials: usize,
    seed: u64,
    degree: usize,
    restarts: usize,
    grid_n: usize,
    fourier_k: usize,
    per_q: Vec<QSummary>,
    violations: usize,
    errors: Vec<TrialError>,
}

/// Outcome of a conjecture sweep; `failed` is set when some trial errored.
pub struct ConjectureRun {
    pub stdout: String,
    pub failed: Option<Error>,
}

/// Maximises the ratio on `Ω_q` for every matrix and `q`.
///
/// Every trial becomes one JSON line in `--out` (written once, atomically, at
/// the end). Ensemble trial `i` uses seed `seed + i` for both the matrix and
/// the search. A trial error on an explicit matrix aborts; in an ensemble
/// sweep it is recorded and the sweep continues.
pub fn conjecture(source: &Source, qs: &[f64], cfg: &RunConfig) -> Result<ConjectureRun> {
    let qs: Vec<QParameter> = qs.iter().map(|&q| QParameter::from_abs(q)).collect::<Result<_>>()?;
    let (name, n, trials) = match source {
        Source::Matrix(a) => ("matrix".to_string(), a.dim(), 1),
        Source::Ensemble { kind, n, trials } => (kind.name().to_string(), *n, *trials),
    };
    let mut per_q: Vec<(QParameter, Vec<f64>, usize, usize)> = qs.iter().map(|&q| (q, vec![], 0, 0)).collect();
    let mut lines = String::new();
    let mut csv = String::from("trial,seed,q_abs,ratio,bound,violation\n");
    let mut errors = Vec::new();
    let mut first_error = None;
    for i in 0..trials {
        let seed = cfg.seed.wrapping_add(i as u64);
        let a = match source {
            Source::Matrix(a) => a.clone(),
            Source::Ensemble { kind, n, .. } => sample(*kind, *n, seed)?,
        };
        for slot in per_q.iter_mut() {
            let q = slot.0;
            let opts = TrialOptions {
                grid_n: cfg.grid_n,
                fourier_k: cfg.fourier_k,
                search: SearchOptions {
                    degree: cfg.degree,
                    restarts: cfg.restarts,
                    seed,
                    ..SearchOptions::default()
                },
                qrange: QRangeOptions::default(),
                tol: cfg.tol,
            };
            match conjecture_trial(&a, q, &opts) {
                Ok(t) => {
                    slot.1.push(t.max_ratio);
                    if t.violation {
                        slot.2 += 1;
                        eprintln!(
                            "violation: trial {i} seed {seed} |q| = {}: ratio {} > bound {}",
                            q.abs(),
                            t.max_ratio,
                            t.bound
                        );
                    }
                    let finding = Finding::new(&a, q, &t, cfg.degree, seed);
                    lines.push_str(&serde_json::to_string(&finding)?);
                    lines.push('\n');
                    csv.push_str(&format!("{i},{seed},{},{},{},{}\n", q.abs(), t.max_ratio, t.bound, t.violation));
                }
                Err(e) if matches!(source, Source::Matrix(_)) => return Err(e),
                Err(e) => {
                    slot.3 += 1;
                    errors.push(TrialError { trial: i, seed, q_abs: q.abs(), message: e.to_string() });
                    first_error.get_or_insert(e);
                }
            }
        }
    }
    if let Some(p) = &cfg.out {
        write_atomic(p, lines.as_bytes())?;
    }
    let per_q: Vec<QSummary> = per_q
        .into_iter()
        .map(|(q, ratios, violations, errs)| QSummary {
            q_abs: q.abs(),
            bound: spectralset::bounds::conjecture_constant(q),
            max_ratio: ratios.iter().copied().reduce(f64::max),
            mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            trials: ratios.len(),
            violations,
            errors: errs,
        })
        .collect();
    let summary = ConjectureSummary {
        source: name,
        n,
        trials,
        seed: cfg.seed,
        degree: cfg.degree,
        restarts: cfg.restarts,
        grid_n: cfg.grid_n,
        fourier_k: cfg.fourier_k,
        violations: per_q.iter().map(|s| s.violations).sum(),
        per_q,
        errors,
    };
    let stdout = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
        Format::Csv => csv,
    };
    Ok(ConjectureRun { stdout, failed: first_error })
}

/// Runs the acceptance criteria `only` (all when empty), printing each line
/// as it finishes. Returns whether all passed.
pub fn verify(cfg: &RunConfig, only: &[u8], findings: Option<&Path>) -> Result<bool> {
    let vcfg = VerifyConfig {
        grid_n: cfg.grid_n,
        fourier_k: cfg.fourier_k,
        seed: cfg.seed,
        degree: cfg.degree,
        restarts: cfg.restarts,
        findings: findings.map(Path::to_path_buf),
        tol: cfg.tol,
    };
    let ids: Vec<u8> = if only.is_empty() {
        criteria().into_iter().map(|(id, _)| id).collect()
    } else {
        only.to_vec()
    };
    let mut results: Vec<CriterionResult> = Vec::new();
    for id in ids {
        let r = run(id, &vcfg).ok_or_else(|| Error::input(format!("no acceptance criterion {id} (valid: 1 to 12)")))?;
        println!("{r}");
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if let Some(p) = &cfg.out {
        let rows: Vec<_> = results
            .iter()
            .map(|r| {
                serde_json::json!({
                    "id": r.id, "name": r.name, "pass": r.pass, "check": r.label,
                    "measured": r.measured, "target": r.target, "tolerance": r.tolerance,
                    "checks": r.checks, "failed_checks": r.failed, "seconds": r.seconds, "error": r.error,
                })
            })
            .collect();
        write_atomic(p, (serde_json::to_string_pretty(&rows)? + "\n").as_bytes())?;
    }
    Ok(failed == 0)
}

/// Reads a matrix file (`-` for stdin).
pub fn read_matrix(path: &Path) -> Result<Operator> {
    if path.as_os_str() == "-" {
        let text = std::io::read_to_string(std::io::stdin())?;
        MatrixFile::parse(&text)?.to_operator()
    } else {
        MatrixFile::read(path)
    }
}
