//! Empirical Crouzeix ratios `‖p(A)‖ / max_{∂Ω}|p|` and conjecture trials.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::conjecture_constant;
use crate::error::{Error, Result};
use crate::geometry::{boundary_mesh, golden_section, BoundaryMesh};
use crate::io::MatrixFile;
use crate::poly::Polynomial;
use crate::potential::check_spectrum_inside;
use crate::ranges::{qrange_body, QParameter, QRangeOptions};
use crate::spectral::{operator_norm, Operator, Tolerances};

/// Violations are reported when the ratio exceeds the bound by more than this.
pub const VIOLATION_TOL: f64 = 1e-6;

fn mesh_sup(p: &Polynomial, mesh: &BoundaryMesh) -> (usize, f64) {
    let (k, sq) = mesh
        .points
        .iter()
        .map(|&z| p.eval(z).norm_sqr())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    (k, sq.sqrt())
}

/// `max_{∂Ω}|p|`: the mesh maximum, refined by golden-section search on the
/// exact boundary between the neighbours of the best node.
pub fn boundary_sup(p: &Polynomial, mesh: &BoundaryMesh) -> f64 {
    let (k, best) = mesh_sup(p, mesh);
    if mesh.len() < 3 {
        return best;
    }
    let dt = mesh.thetas[1] - mesh.thetas[0];
    let t = mesh.thetas[k];
    let h = mesh.support();
    let (_, refined) = golden_section(|s| p.eval(h.point(s)).norm(), t - dt, t + dt);
    best.max(refined)
}

fn ratio_unchecked(a: &Operator, p: &Polynomial, mesh: &BoundaryMesh) -> Result<f64> {
    let den = boundary_sup(p, mesh);
    if !(den > 0.0) {
        return Err(Error::input("polynomial vanishes on the boundary"));
    }
    Ok(operator_norm(&p.eval_matrix(a.matrix()))? / den)
}

/// `‖p(A)‖ / max_{∂Ω}|p|`.
pub fn ratio(a: &Operator, p: &Polynomial, mesh: &BoundaryMesh, tol: &Tolerances) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::input("ratio of the zero polynomial is undefined"));
    }
    check_spectrum_inside(a, mesh.support(), &mesh.thetas, tol.quad_tol)?;
    ratio_unchecked(a, p, mesh)
}

/// Polynomials searched over, written in powers of `z − c` with `c` the
/// Steiner point of the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    /// All polynomials of degree at most `d`. Constants give ratio 1, so the
    /// supremum is never below 1.
    Full,
    /// Polynomials vanishing at `c`.
    #[default]
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub degree: usize,
    pub restarts: usize,
    pub seed: u64,
    pub space: SearchSpace,
    /// Simplex evaluations allowed per restart and unknown.
    pub evals_per_dim: usize,
    /// Convergence tolerance on the spread of simplex values.
    pub ftol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            degree: 4,
            restarts: 32,
            seed: 0,
            space: SearchSpace::Centered,
            evals_per_dim: 200,
            ftol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatioResult {
    pub ratio: f64,
    pub polynomial: Polynomial,
    pub matrix_hash: String,
    pub omega: String,
    pub restarts_used: usize,
    /// Whether the restart that produced the best ratio converged.
    pub converged: bool,
}

struct Simplex {
    x: Vec<f64>,
    converged: bool,
}

/// Nelder–Mead minimisation with the standard coefficients.
fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> Simplex {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 1e-8 { step * p[i].abs().max(step) } else { step };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let mut converged = false;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= ftol * (1.0 + vals[0].abs()) {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |s: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + s * (pts[n][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    for j in 0..n {
                        pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
                    }
                    vals[i] = f(&pts[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    Simplex {
        x: pts[best].clone(),
        converged,
    }
}

/// Coefficients `b_k` of `Σ b_k ((z − c)/s)^k` packed as real unknowns.
struct Param {
    center: Complex64,
    scale: f64,
    degree: usize,
    first: usize,
}

impl Param {
    fn dim(&self) -> usize {
        2 * (self.degree + 1 - self.first)
    }

    fn polynomial(&self, x: &[f64]) -> Result<Polynomial> {
        let mut b = vec![Complex64::new(0.0, 0.0); self.degree + 1];
        for (i, k) in (self.first..=self.degree).enumerate() {
            b[k] = Complex64::new(x[2 * i], x[2 * i + 1]) / self.scale.powi(k as i32);
        }
        Polynomial::from_shifted(self.center, &b)
    }

    /// `p = z − c`.
    fn warm_start(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        let i = 1 - self.first;
        x[2 * i] = 1.0;
        x
    }
}

/// Ratio with the unrefined mesh maximum, for use inside the simplex search.
fn objective(a: &Operator, mesh: &BoundaryMesh, param: &Param, x: &[f64]) -> f64 {
    let Ok(p) = param.polynomial(x) else { return 0.0 };
    let (_, den) = mesh_sup(&p, mesh);
    if !(den > 0.0) {
        return 0.0;
    }
    operator_norm(&p.eval_matrix(a.matrix())).map_or(0.0, |n| n / den)
}

/// Best ratio found by seeded multi-start Nelder–Mead. Restart 0 starts at
/// `p = z − c`, so the result is never below that polynomial's ratio; in the
/// full space restart 1 starts at `p = 1`.
pub fn maximize_ratio(
    a: &Operator,
    mesh: &BoundaryMesh,
    opts: &SearchOptions,
    omega: &str,
    tol: &Tolerances,
) -> Result<RatioResult> {
    if opts.degree < 1 || opts.restarts < 1 {
        return Err(Error::input("maximize_ratio needs degree ≥ 1 and at least one restart"));
    }
    check_spectrum_inside(a, mesh.support(), &mesh.thetas, tol.quad_tol)?;
    let param = Param {
        center: mesh.support().steiner_point(),
        scale: mesh.support().a0().max(f64::MIN_POSITIVE),
        degree: opts.degree,
        first: match opts.space {
            SearchSpace::Full => 0,
            SearchSpace::Centered => 1,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![param.warm_start()];
    if opts.space == SearchSpace::Full && opts.restarts > 1 {
        let mut one = vec![0.0; param.dim()];
        one[0] = 1.0;
        starts.push(one);
    }
    while starts.len() < opts.restarts {
        starts.push((0..param.dim()).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let max_evals = opts.evals_per_dim * param.dim();
    let runs: Vec<Simplex> = starts
        .par_iter()
        .map(|x0| {
            let mut f = |x: &[f64]| -objective(a, mesh, &param, x);
            nelder_mead(&mut f, x0, 0.25, max_evals, opts.ftol)
        })
        .collect();
    let mut best: Option<(f64, Polynomial, bool)> = None;
    let candidates = runs.iter().map(|r| (&r.x, r.converged)).chain(starts.iter().map(|x| (x, false)));
    for (x, converged) in candidates {
        let p = param.polynomial(x)?;
        if p.is_zero() {
            continue;
        }
        let r = ratio_unchecked(a, &p, mesh)?;
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, p, converged));
        }
    }
    let (ratio, p, converged) = best.ok_or_else(|| Error::Consistency("every restart ended at p = 0".into()))?;
    let sup = boundary_sup(&p, mesh);
    let polynomial = p.scaled(Complex64::new(1.0 / sup, 0.0));
    Ok(RatioResult {
        ratio,
        polynomial,
        matrix_hash: a.fingerprint(),
        omega: omega.to_string(),
        restarts_used: runs.len(),
        converged,
    })
}

/// Settings for one conjecture trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub grid_n: usize,
    pub fourier_k: usize,
    pub search: SearchOptions,
    pub qrange: QRangeOptions,
    pub tol: Tolerances,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            grid_n: crate::geometry::DEFAULT_NODES,
            fourier_k: crate::geometry::DEFAULT_DEGREE,
            search: SearchOptions::default(),
            qrange: QRangeOptions::default(),
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub max_ratio: f64,
    pub bound: f64,
    pub violation: bool,
    pub best: RatioResult,
}

/// Maximises the ratio on `Ω_q` and compares it with the conjectured constant.
pub fn conjecture_trial(a: &Operator, q: QParameter, opts: &TrialOptions) -> Result<TrialOutcome> {
    let qr = QRangeOptions {
        seed: opts.search.seed,
        ..opts.qrange
    };
    let body = qrange_body(a, q, opts.grid_n, opts.fourier_k, &qr, &opts.tol)?;
    let mesh = boundary_mesh(&body, opts.grid_n, &opts.tol)?;
    let best = maximize_ratio(a, &mesh, &opts.search, &format!("qrange:{}", q.abs()), &opts.tol)?;
    let bound = conjecture_constant(q);
    Ok(TrialOutcome {
        max_ratio: best.ratio,
        bound,
        violation: best.ratio > bound + VIOLATION_TOL,
        best,
    })
}

/// One line of the findings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub matrix: MatrixFile,
    pub q_abs: f64,
    pub degree: usize,
    pub coeffs: Vec<[f64; 2]>,
    pub ratio: f64,
    pub bound: f64,
    pub violation: bool,
    pub seed: u64,
}

impl Finding {
    pub fn new(a: &Operator, q: QParameter, outcome: &TrialOutcome, degree: usize, seed: u64) -> Self {
        Self {
            matrix: MatrixFile::from_operator(a),
            q_abs: q.abs(),
            degree,
            coeffs: outcome.best.polynomial.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            ratio: outcome.max_ratio,
            bound: outcome.bound,
            violation: outcome.violation,
            seed,
        }
    }
}

/// Append-only JSONL writer for trial records.
pub struct FindingsLog {
    out: BufWriter<File>,
}

impl FindingsLog {
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { out: BufWriter::new(file) })
    }

    pub fn append(&mut self, finding: &Finding) -> Result<()> {
        serde_json::to_writer(&mut self.out, finding)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}
