//! Acceptance suite for `spectralset`.
//!
//! Each criterion compares library output with an independent oracle or a
//! closed form and reports its worst sub-check.

pub mod oracles;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectralset::bounds::{conjecture_constant, constant_thm25, geometric_gamma_bound, qrange_gamma_bound};
use spectralset::ensembles::{sample, Ensemble};
use spectralset::geometry::{boundary_mesh, farthest_point_modulus, perimeter, theta_grid, SupportFn};
use spectralset::poly::Polynomial;
use spectralset::potential::{
    cauchy_fcalc, cauchy_transform_op, gamma_one, potential_profile, potential_profile_at, s_operator,
    BoundaryFunction,
};
use spectralset::ranges::{
    numrange_body, numrange_support, perimeter_derivative_check, qrange_body, qrange_support, QParameter,
    QRangeOptions,
};
use spectralset::search::{conjecture_trial, ratio, Finding, FindingsLog, SearchOptions, TrialOptions};
use spectralset::spectral::{eigenvalues, gershgorin_discs, hermitian_eigen, operator_norm};
use spectralset::{CMatrix, Error, Operator, Result, Tolerances};

/// Suite settings.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub grid_n: usize,
    pub fourier_k: usize,
    pub seed: u64,
    pub degree: usize,
    pub restarts: usize,
    /// Conjecture violations are appended here as JSON lines.
    pub findings: Option<PathBuf>,
    pub tol: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            grid_n: 512,
            fourier_k: 64,
            seed: 0,
            degree: 4,
            restarts: 32,
            findings: None,
            tol: Tolerances::default(),
        }
    }
}

impl VerifyConfig {
    /// Fourier degree, capped so that the grid resolves it.
    fn k(&self) -> usize {
        self.fourier_k.min((self.grid_n / 2).saturating_sub(1)).max(1)
    }

    fn seed_for(&self, criterion: u64, i: u64) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(criterion * 10_000 + i)
    }

    fn rng(&self, criterion: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed_for(criterion, 9_999))
    }
}

/// Outcome of one criterion. The reported numbers are those of the worst
/// sub-check.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub label: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub checks: usize,
    pub failed: usize,
    pub seconds: f64,
    pub error: Option<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:>2} {:<34}", self.id, self.name)?;
        match &self.error {
            Some(e) => write!(f, " error: {e}")?,
            None => write!(
                f,
                " {}: measured {:.6e}, target {:.6e}, tol {:.0e} ({}/{} checks ok)",
                self.label,
                self.measured,
                self.target,
                self.tolerance,
                self.checks - self.failed,
                self.checks
            )?,
        }
        write!(f, " [{:.1}s]", self.seconds)
    }
}

#[derive(Debug, Clone)]
struct Check {
    label: String,
    measured: f64,
    target: f64,
    tol: f64,
    pass: bool,
    score: f64,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// `|measured − target| ≤ tol`.
    fn near(&mut self, label: impl Into<String>, measured: f64, target: f64, tol: f64) {
        let dev = (measured - target).abs();
        let pass = dev <= tol;
        self.push(label, measured, target, tol, pass, dev / tol.max(f64::MIN_POSITIVE));
    }

    /// `measured ≤ limit + tol`.
    fn at_most(&mut self, label: impl Into<String>, measured: f64, limit: f64, tol: f64) {
        let pass = measured <= limit + tol;
        self.push(label, measured, limit, tol, pass, (measured - limit) / tol.max(f64::MIN_POSITIVE));
    }

    /// `measured ≥ limit − tol`.
    fn at_least(&mut self, label: impl Into<String>, measured: f64, limit: f64, tol: f64) {
        let pass = measured >= limit - tol;
        self.push(label, measured, limit, tol, pass, (limit - measured) / tol.max(f64::MIN_POSITIVE));
    }

    fn truth(&mut self, label: impl Into<String>, ok: bool) {
        self.push(label, ok as u8 as f64, 1.0, 0.0, ok, if ok { f64::NEG_INFINITY } else { f64::INFINITY });
    }

    fn push(&mut self, label: impl Into<String>, measured: f64, target: f64, tol: f64, pass: bool, score: f64) {
        let score = if score.is_nan() { f64::INFINITY } else { score };
        self.0.push(Check {
            label: label.into(),
            measured,
            target,
            tol,
            pass: pass && measured.is_finite(),
            score,
        });
    }
}

type Criterion = fn(&VerifyConfig) -> Result<Checks>;

const CRITERIA: [(u8, &str, Criterion); 12] = [
    (1, "nilpotent anchor", nilpotent_anchor),
    (2, "partition identity", partition_identity),
    (3, "S-operator norm bound", s_norm_bound),
    (4, "perimeter identity", perimeter_identity),
    (5, "pointwise potential lower bound", pointwise_lower_bound),
    (6, "geometric gamma bound", geometric_bound),
    (7, "q-range anchor", qrange_anchor),
    (8, "q-range bound and perimeter slope", qrange_bound_and_slope),
    (9, "q-range nesting", qrange_nesting),
    (10, "functional calculus consistency", fcalc_consistency),
    (11, "conjecture sweep", conjecture_sweep),
    (12, "scalar anchor", scalar_anchor),
];

/// Identifiers and names of all criteria, in order.
pub fn criteria() -> Vec<(u8, &'static str)> {
    CRITERIA.iter().map(|(id, name, _)| (*id, *name)).collect()
}

/// Runs one criterion; `None` for an unknown id.
pub fn run(id: u8, cfg: &VerifyConfig) -> Option<CriterionResult> {
    let (_, name, f) = CRITERIA.iter().find(|(i, _, _)| *i == id)?;
    let start = Instant::now();
    let outcome = f(cfg);
    let seconds = start.elapsed().as_secs_f64();
    Some(match outcome {
        Ok(Checks(checks)) if !checks.is_empty() => {
            let failed = checks.iter().filter(|c| !c.pass).count();
            let worst = checks
                .iter()
                .max_by(|a, b| (!a.pass, a.score).partial_cmp(&(!b.pass, b.score)).unwrap_or(std::cmp::Ordering::Equal))
                .cloned()
                .expect("non-empty");
            CriterionResult {
                id,
                name,
                label: worst.label,
                measured: worst.measured,
                target: worst.target,
                tolerance: worst.tol,
                pass: failed == 0,
                checks: checks.len(),
                failed,
                seconds,
                error: None,
            }
        }
        Ok(_) => failure(id, name, seconds, "no checks were run".into()),
        Err(e) => failure(id, name, seconds, e.to_string()),
    })
}

fn failure(id: u8, name: &'static str, seconds: f64, error: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        label: String::new(),
        measured: f64::NAN,
        target: f64::NAN,
        tolerance: f64::NAN,
        pass: false,
        checks: 0,
        failed: 0,
        seconds,
        error: Some(error),
    }
}

/// Runs every criterion in order.
pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|(id, _, _)| run(*id, cfg)).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn nilpotent() -> Operator {
    Operator::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).expect("valid matrix")
}

fn ginibre(cfg: &VerifyConfig, criterion: u64, i: u64) -> Result<Operator> {
    sample(Ensemble::Ginibre, 3, cfg.seed_for(criterion, i))
}

fn random_polynomial(rng: &mut ChaCha8Rng, degree: usize) -> Result<Polynomial> {
    let coeffs = (0..=degree)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Polynomial::new(coeffs)
}

/// Disk about 0 of `factor` times the radius enclosing all Gershgorin discs.
fn gershgorin_disk(a: &Operator, factor: f64) -> Result<SupportFn> {
    let r = gershgorin_discs(a)
        .iter()
        .map(|d| d.center.norm() + d.radius)
        .fold(0.0, f64::max);
    SupportFn::disk(c(0.0, 0.0), factor * r)
}

/// `max_θ (h_W(θ) − Re(c e^{-iθ}))`, the farthest distance from `c` to `W(A)`.
fn numrange_radius_about(a: &Operator, center: Complex64) -> f64 {
    theta_grid(720)
        .into_iter()
        .map(|t| numrange_support(a, t) - (center * Complex64::from_polar(1.0, -t)).re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn nilpotent_anchor(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let a = nilpotent();
    let mut ch = Checks::default();
    let w = numrange_body(&a, cfg.grid_n, cfg.k(), tol)?;
    let dev = theta_grid(4096).into_iter().map(|t| (w.value(t) - 1.0).abs()).fold(0.0, f64::max);
    ch.near("max |h_W − 1|", dev, 0.0, 1e-8);
    let mesh = boundary_mesh(&w, cfg.grid_n, tol)?;
    let profile = potential_profile_at(&a, &mesh, tol)?;
    let lmax = profile.lambda_min().iter().map(|l| l.abs()).fold(0.0, f64::max);
    ch.near("max |λ_min|", lmax, 0.0, 1e-8);
    let z = BoundaryFunction::from_polynomial(&Polynomial::identity(), &mesh);
    let g = cauchy_transform_op(&a, &mesh, &z, tol)?;
    ch.near("‖g(A)‖ for f = z", operator_norm(&g)?, 0.0, 1e-8);
    let disk = boundary_mesh(&SupportFn::disk(c(0.0, 0.0), 1.0)?, cfg.grid_n, tol)?;
    ch.near("ratio(A, z, unit disk)", ratio(&a, &Polynomial::identity(), &disk, tol)?, 2.0, 1e-8);
    ch.near("constant_thm25(0, 0)", constant_thm25(0.0, 0.0)?, 2.0, 0.0);
    Ok(ch)
}

fn partition_identity(cfg: &VerifyConfig) -> Result<Checks> {
    let mut ch = Checks::default();
    for i in 0..20 {
        let a = ginibre(cfg, 2, i)?;
        let mesh = boundary_mesh(&gershgorin_disk(&a, 1.5)?, cfg.grid_n, &cfg.tol)?;
        let profile = potential_profile_at(&a, &mesh, &cfg.tol)?;
        ch.at_most(format!("‖Σμw − 2I‖ (matrix {i})"), profile.partition_residual(), 0.0, 1e-8);
    }
    Ok(ch)
}

fn s_norm_bound(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut rng = cfg.rng(3);
    let mut ch = Checks::default();
    let mut positive = 0;
    for i in 0..100 {
        let a = ginibre(cfg, 3, i)?;
        let center = a.matrix().trace() / c(3.0, 0.0);
        let spectral_radius = eigenvalues(&a)?.iter().map(|l| (l - center).norm()).fold(0.0, f64::max);
        let w_radius = numrange_radius_about(&a, center);
        let u: f64 = rng.random_range(0.0..1.0);
        let radius = if i % 2 == 0 {
            w_radius * (1.05 + 0.5 * u)
        } else {
            spectral_radius + ((w_radius - spectral_radius) * (0.05 + 0.5 * u)).max(0.05 * spectral_radius)
        };
        let mesh = boundary_mesh(&SupportFn::disk(center, radius)?, cfg.grid_n, tol)?;
        let f = BoundaryFunction::from_polynomial(&random_polynomial(&mut rng, 4)?, &mesh).normalized()?;
        let s = s_operator(&a, &mesh, &f, tol)?;
        if s.gamma1 > 0.0 {
            positive += 1;
        }
        ch.at_most(format!("‖S‖ − (2 + γ(1)) (trial {i})"), s.norm - s.bound(), 0.0, 1e-6);
    }
    ch.at_least("trials with γ(1) > 0", positive as f64, 1.0, 0.0);
    Ok(ch)
}

fn perimeter_identity(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut ch = Checks::default();
    let mut bodies = vec![
        ("disk", SupportFn::disk(c(0.3, -0.1), 1.7)?),
        ("ellipse (2,1)", SupportFn::ellipse(2.0, 1.0, cfg.k())?),
        ("W(nilpotent)", numrange_body(&nilpotent(), cfg.grid_n, cfg.k(), tol)?),
    ];
    for i in 0..3 {
        if let Ok(w) = numrange_body(&ginibre(cfg, 4, i)?, cfg.grid_n, cfg.k(), tol) {
            bodies.push(("W(ginibre)", w));
        }
    }
    for (name, h) in &bodies {
        let mesh = boundary_mesh(h, cfg.grid_n, tol)?;
        ch.near(format!("|2πa₀ − Σw| {name}"), (TAU * h.a0() - mesh.total_weight()).abs(), 0.0, 1e-10);
    }
    let polygon = oracles::polygon_perimeter(|t| c(2.0 * t.cos(), t.sin()), 1_000_000);
    ch.near("ellipse perimeter vs polygon", perimeter(&SupportFn::ellipse(2.0, 1.0, 64)?), polygon, 1e-4);
    ch.near("polygon perimeter of ellipse", polygon, 9.68845, 1e-4);
    Ok(ch)
}

struct ContainedTrial {
    a: Operator,
    omega: SupportFn,
    w_body: SupportFn,
}

/// 20 matrices with smooth `W(A)` and a domain `Ω ⊇ W(A)`: alternately a
/// disk about the Steiner point and the parallel body `W(A) + 0.3·D`.
fn contained_trials(cfg: &VerifyConfig) -> Result<Vec<ContainedTrial>> {
    let tol = &cfg.tol;
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < 20 && i < 200 {
        let a = ginibre(cfg, 5, i)?;
        i += 1;
        let w_body = match numrange_body(&a, cfg.grid_n, cfg.k(), tol) {
            Ok(w) => w,
            Err(Error::NonSmoothBoundary { .. }) => continue,
            Err(e) => return Err(e),
        };
        let omega = if out.len() % 2 == 0 {
            let center = w_body.steiner_point();
            SupportFn::disk(center, 1.3 * numrange_radius_about(&a, center))?
        } else {
            SupportFn::from_coefficients(
                w_body.a0() + 0.3,
                w_body.cos_coefficients().to_vec(),
                w_body.sin_coefficients().to_vec(),
            )?
        };
        out.push(ContainedTrial { a, omega, w_body });
    }
    Ok(out)
}

fn pointwise_lower_bound(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut ch = Checks::default();
    for (i, t) in contained_trials(cfg)?.iter().enumerate() {
        let mesh = boundary_mesh(&t.omega, cfg.grid_n, tol)?;
        let profile = potential_profile(&t.a, &mesh, tol)?;
        let mesh = profile.mesh();
        let floor = {
            let d = farthest_point_modulus(&t.omega) + 2.0 * farthest_point_modulus(&t.w_body);
            1.0 / (d * d)
        };
        let mut worst_lambda = f64::INFINITY;
        let mut worst_r = f64::INFINITY;
        for k in 0..mesh.len() {
            let r = oracles::min_resolvent_modulus(t.a.matrix(), mesh.points[k]);
            let theta = mesh.thetas[k];
            let rhs = r * (t.omega.value(theta) - numrange_support(&t.a, theta)) / PI;
            worst_lambda = worst_lambda.min(profile.lambda_min()[k] - rhs);
            worst_r = worst_r.min(r - floor);
        }
        ch.at_least(format!("min λ_min − r(h_Ω − h_W)/π (trial {i})"), worst_lambda, 0.0, 1e-8);
        ch.at_least(format!("min r − (w_Ω + 2w_W)⁻² (trial {i})"), worst_r, 0.0, 1e-10);
    }
    Ok(ch)
}

fn geometric_bound(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut ch = Checks::default();
    for (i, t) in contained_trials(cfg)?.iter().enumerate() {
        let mesh = boundary_mesh(&t.omega, cfg.grid_n, tol)?;
        let gamma1 = gamma_one(&potential_profile(&t.a, &mesh, tol)?, tol)?;
        let bound = geometric_gamma_bound(&t.a, &t.omega, &t.w_body, tol)?;
        ch.at_most(format!("γ(1) − bound (trial {i})"), gamma1 - bound, 0.0, 1e-8);
    }
    let a = nilpotent();
    let w = numrange_body(&a, cfg.grid_n, cfg.k(), tol)?;
    let big = SupportFn::disk(c(0.0, 0.0), 2.0)?;
    let bound = geometric_gamma_bound(&a, &big, &w, tol)?;
    ch.near("nilpotent bound, disk radius 2", bound, -0.25, 1e-10);
    let mesh = boundary_mesh(&big, cfg.grid_n, tol)?;
    let gamma1 = gamma_one(&potential_profile(&a, &mesh, tol)?, tol)?;
    ch.at_most("nilpotent γ(1), disk radius 2", gamma1, -0.25, 1e-8);
    Ok(ch)
}

fn trial_options(cfg: &VerifyConfig, seed: u64) -> TrialOptions {
    TrialOptions {
        grid_n: cfg.grid_n,
        fourier_k: cfg.k(),
        search: SearchOptions {
            degree: cfg.degree,
            restarts: cfg.restarts,
            seed,
            ..SearchOptions::default()
        },
        qrange: QRangeOptions::default(),
        tol: cfg.tol,
    }
}

fn qrange_anchor(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut ch = Checks::default();
    let a = nilpotent();
    let q = QParameter::from_abs(0.6)?;
    let body = qrange_body(&a, q, cfg.grid_n, cfg.k(), &QRangeOptions::default(), tol)?;
    let dev = theta_grid(4096).into_iter().map(|t| (body.value(t) - 3.0).abs()).fold(0.0, f64::max);
    ch.near("max |h_Ω − 3|", dev, 0.0, 1e-6);
    for theta in theta_grid(8) {
        let oracle = oracles::sphere_grid_support(a.matrix(), q.t(), theta);
        ch.near(format!("sphere-grid oracle at θ = {theta:.3}"), oracle, 3.0, 1e-6);
        let est = qrange_support(&a, q, theta, &QRangeOptions::default());
        ch.near(format!("support vs oracle at θ = {theta:.3}"), est.value, oracle, 1e-6);
    }
    ch.near("conjecture_constant(0.6)", conjecture_constant(q), 1.0, 0.0);
    let trial = conjecture_trial(&a, q, &trial_options(cfg, cfg.seed))?;
    ch.near("max ratio on Ω_0.6", trial.max_ratio, 2.0 / 3.0, 1e-6);
    ch.truth("no violation", !trial.violation);
    Ok(ch)
}

/// `λ_max − λ_next` of `Re(e^{-iθ}A)`, minimised over a grid.
fn min_top_gap(a: &Operator, tol: &Tolerances) -> Result<f64> {
    let mut gap = f64::INFINITY;
    for t in theta_grid(256) {
        let eig = hermitian_eigen(&a.rotated_hermitian_part(t), tol)?;
        let n = eig.values.len();
        gap = gap.min(eig.values[n - 1] - eig.values[n - 2]);
    }
    Ok(gap)
}

fn qrange_bound_and_slope(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut ch = Checks::default();
    let a = nilpotent();
    let q = QParameter::from_abs(0.6)?;
    let w = numrange_body(&a, cfg.grid_n, cfg.k(), tol)?;
    let oq = qrange_body(&a, q, cfg.grid_n, cfg.k(), &QRangeOptions::default(), tol)?;
    let bound = qrange_gamma_bound(&a, q, &oq, &w, cfg.grid_n, tol)?;
    ch.near("nilpotent bound at |q| = 0.6", bound, -0.32, 1e-9);
    let mesh = boundary_mesh(&oq, cfg.grid_n, tol)?;
    let gamma1 = gamma_one(&potential_profile(&a, &mesh, tol)?, tol)?;
    ch.at_most("nilpotent γ(1) on Ω_0.6", gamma1, bound, 1e-8);

    let mut used = 0;
    let mut i = 0;
    while used < 10 && i < 200 {
        let a = ginibre(cfg, 8, i)?;
        i += 1;
        if min_top_gap(&a, tol)? < 1e-3 {
            continue;
        }
        let check = match perimeter_derivative_check(&a, 1e-3, cfg.grid_n, cfg.k(), &QRangeOptions::default(), tol) {
            Ok(c) => c,
            Err(Error::NonSmoothBoundary { .. }) => continue,
            Err(e) => return Err(e),
        };
        ch.at_most(format!("|∫m − slope|/∫m (matrix {used})"), check.relative_gap(), 0.0, 1e-2);
        used += 1;
    }
    ch.at_least("matrices checked", used as f64, 10.0, 0.0);
    Ok(ch)
}

fn qrange_nesting(cfg: &VerifyConfig) -> Result<Checks> {
    let mut ch = Checks::default();
    let levels = [1.0, 0.9, 0.8, 0.6].map(|r| QParameter::from_abs(r).expect("valid |q|"));
    let opts = QRangeOptions::default();
    for i in 0..20 {
        let a = ginibre(cfg, 9, i)?;
        let mut worst = f64::NEG_INFINITY;
        for theta in theta_grid(64) {
            let h: Vec<f64> = levels.iter().map(|&q| qrange_support(&a, q, theta, &opts).value).collect();
            for w in h.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
        ch.at_most(format!("max h(|q|) − h(|q'| < |q|) (matrix {i})"), worst, 0.0, 1e-8);
    }
    Ok(ch)
}

fn fcalc_consistency(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut rng = cfg.rng(10);
    let mut ch = Checks::default();
    for i in 0..20u64 {
        let degree = 1 + (i as usize % 8);
        let a = ginibre(cfg, 10, i)?;
        let mesh = boundary_mesh(&gershgorin_disk(&a, 1.5)?, cfg.grid_n, tol)?;
        let p = random_polynomial(&mut rng, degree)?;
        let quad = cauchy_fcalc(&a, &mesh, &BoundaryFunction::from_polynomial(&p, &mesh), tol)?;
        let direct = oracles::power_series(a.matrix(), p.coeffs());
        let rel = (&quad - &direct).norm() / direct.norm().max(1.0);
        ch.at_most(format!("relative error, degree {degree} (trial {i})"), rel, 0.0, 1e-8);
    }
    Ok(ch)
}

fn conjecture_sweep(cfg: &VerifyConfig) -> Result<Checks> {
    let mut ch = Checks::default();
    let mut log = match &cfg.findings {
        Some(p) => Some(FindingsLog::open(p)?),
        None => None,
    };
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let seed = cfg.seed_for(11, i);
        let a = sample(Ensemble::Ginibre, 3, seed)?;
        for r in [0.6, 0.8, 0.9, 1.0] {
            let q = QParameter::from_abs(r)?;
            let t = conjecture_trial(&a, q, &trial_options(cfg, seed))?;
            worst = worst.max(t.max_ratio - t.bound);
            if t.violation {
                violations += 1;
                if let Some(log) = log.as_mut() {
                    log.append(&Finding::new(&a, q, &t, cfg.degree, seed))?;
                }
            }
        }
    }
    ch.at_most("max ratio − conjectured bound", worst, 0.0, 1e-6);
    ch.near("violations", violations as f64, 0.0, 0.0);
    Ok(ch)
}

fn scalar_anchor(cfg: &VerifyConfig) -> Result<Checks> {
    let tol = &cfg.tol;
    let mut ch = Checks::default();
    let a0 = c(0.2, 0.0);
    let a = Operator::new(CMatrix::from_element(1, 1, a0))?;
    let mesh = boundary_mesh(&SupportFn::disk(c(0.0, 0.0), 1.0)?, cfg.grid_n, tol)?;
    let profile = potential_profile_at(&a, &mesh, tol)?;
    ch.near("γ(1)", gamma_one(&profile, tol)?, -2.0, 1e-8);
    let n = mesh.len();
    for j in 0..8 {
        let k = j * n / 8;
        let expected = oracles::scalar_mu_unit_circle(a0, mesh.points[k]);
        ch.near(format!("λ_min at node {k}"), profile.lambda_min()[k], expected, 1e-10);
    }
    Ok(ch)
}
