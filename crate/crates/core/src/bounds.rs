//! Spectral-constant bounds assembled from geometry and potential data.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::geometry::{
    boundary_mesh, chebyshev_radius, contains, farthest_point_modulus, min_radius_of_curvature, perimeter, BoundaryMesh,
    SupportFn,
};
use crate::poly::Polynomial;
use crate::potential::{cauchy_transform_boundary, gamma_one, m_total, potential_profile, BoundaryFunction};
use crate::ranges::{m_integral, numrange_body, qrange_body, QParameter, QRangeOptions};
use crate::spectral::{Operator, Tolerances};

/// Highest degree in the default test family for `a(Ω)`.
pub const FAMILY_DEGREE: usize = 8;
/// Number of random polynomials in the default test family.
pub const FAMILY_RANDOM: usize = 16;
/// Inward offset, in mesh spacings, at which `g` is sampled.
pub const PULL_IN_SPACINGS: f64 = 3.0;

/// `1 + γ/2 + √(2 + γ + γ²/4 + m)`.
pub fn constant_thm22(gamma1: f64, m: f64) -> Result<f64> {
    let radicand = 2.0 + gamma1 + gamma1 * gamma1 / 4.0 + m;
    if !(radicand >= 0.0 && radicand.is_finite()) {
        return Err(Error::Domain(format!(
            "2 + γ(1) + γ(1)²/4 + m = {radicand} is negative (γ(1) = {gamma1}, m = {m})"
        )));
    }
    Ok(1.0 + gamma1 / 2.0 + radicand.sqrt())
}

/// `1 + γ/2 + √((1 + γ/2)² + a)`.
pub fn constant_thm25(gamma1: f64, a: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::input(format!("a(Ω) must be a non-negative number, got {a}")));
    }
    if !gamma1.is_finite() {
        return Err(Error::input(format!("γ(1) must be finite, got {gamma1}")));
    }
    let b = 1.0 + gamma1 / 2.0;
    Ok(b + (b * b + a).sqrt())
}

/// `(z − c)^k` for `k ≤ 8` and 16 random polynomials of degree at most 8,
/// each normalised to unit sup norm on the mesh. `c` is the Steiner point.
pub fn default_family(mesh: &BoundaryMesh, seed: u64) -> Result<Vec<BoundaryFunction>> {
    let c = mesh.support().steiner_point();
    let scale = mesh.support().a0().max(f64::MIN_POSITIVE);
    let mut family = Vec::with_capacity(FAMILY_DEGREE + 1 + FAMILY_RANDOM);
    for k in 0..=FAMILY_DEGREE {
        family.push(BoundaryFunction::from_polynomial(&Polynomial::shifted_power(c, k), mesh).normalized()?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 0..FAMILY_RANDOM {
        let degree = 1 + j % FAMILY_DEGREE;
        let b: Vec<Complex64> = (0..=degree)
            .map(|k| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) / scale.powi(k as i32)
            })
            .collect();
        let p = Polynomial::from_shifted(c, &b)?;
        family.push(BoundaryFunction::from_polynomial(&p, mesh).normalized()?);
    }
    Ok(family)
}

/// Lower estimate of `a(Ω)`: the largest Chebyshev radius of the Cauchy
/// transform of `conj f` sampled just inside the boundary, over the family.
pub fn a_lower_estimate(mesh: &BoundaryMesh, family: &[BoundaryFunction]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::input("a(Ω) estimate needs a non-empty family"));
    }
    let offset = PULL_IN_SPACINGS * mesh.spacing();
    let inner: Vec<Complex64> = mesh
        .points
        .iter()
        .zip(&mesh.normals)
        .map(|(p, n)| p - n * offset)
        .collect();
    let mut best: f64 = 0.0;
    for f in family {
        if f.sup_norm() > 1.0 + 1e-12 {
            return Err(Error::input(format!("family member has sup norm {} > 1", f.sup_norm())));
        }
        let g = inner
            .iter()
            .map(|&z| cauchy_transform_boundary(f, mesh, z))
            .collect::<Result<Vec<_>>>()?;
        best = best.max(chebyshev_radius(&g)?);
    }
    Ok(best)
}

fn require_interior(a: &Operator, tol: &Tolerances) -> Result<()> {
    if a.numerical_range_is_flat(tol.eig_tol) {
        return Err(Error::EmptyInterior);
    }
    Ok(())
}

/// `(1/π)(1/(w_Ω + 2w_W))²`.
fn geometric_factor(omega: &SupportFn, w_body: &SupportFn) -> f64 {
    let d = farthest_point_modulus(omega) + 2.0 * farthest_point_modulus(w_body);
    1.0 / (PI * d * d)
}

/// `−(1/π)(1/(w_Ω + 2w_W))² · min ρ_Ω · (|∂Ω| − |∂W(A)|)`, an upper bound on `γ(1)`.
pub fn geometric_gamma_bound(a: &Operator, omega: &SupportFn, w_body: &SupportFn, tol: &Tolerances) -> Result<f64> {
    require_interior(a, tol)?;
    if !contains(omega, w_body, tol) {
        return Err(Error::input("Ω does not contain W(A)"));
    }
    let rho = min_radius_of_curvature(omega, tol)?;
    let gap = (perimeter(omega) - perimeter(w_body)).max(0.0);
    Ok(-geometric_factor(omega, w_body) * rho * gap)
}

/// `−C · min ρ_{Ω_q} · t · ∫ m(θ) dθ` with `C` as in [`geometric_gamma_bound`]
/// and `t = √(1 − |q|²)/|q|`. Zero at `|q| = 1`.
pub fn qrange_gamma_bound(
    a: &Operator,
    q: QParameter,
    omega_q: &SupportFn,
    w_body: &SupportFn,
    nodes: usize,
    tol: &Tolerances,
) -> Result<f64> {
    require_interior(a, tol)?;
    if q.is_one() {
        return Ok(0.0);
    }
    let rho = min_radius_of_curvature(omega_q, tol)?;
    let m = m_integral(a, nodes, tol)?;
    Ok(-geometric_factor(omega_q, w_body) * rho * q.t() * m)
}

/// `max(1, 2|q|/(1 + √(1 − |q|²)))`.
pub fn conjecture_constant(q: QParameter) -> f64 {
    let r = q.abs();
    (2.0 * r / (1.0 + (1.0 - r * r).max(0.0).sqrt())).max(1.0)
}

/// Which domain `Ω` the potential is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OmegaChoice {
    #[default]
    NumericalRange,
    Disk {
        center: Complex64,
        radius: f64,
    },
    /// The scaled q-numerical range for the configured `q`.
    QRange,
}

impl OmegaChoice {
    pub fn describe(&self) -> String {
        match self {
            OmegaChoice::NumericalRange => "numerical_range".into(),
            OmegaChoice::Disk { center, radius } => format!("disk:{},{},{}", center.re, center.im, radius),
            OmegaChoice::QRange => "qrange".into(),
        }
    }
}

/// Inputs of [`assemble_report`].
#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub grid_n: usize,
    pub fourier_k: usize,
    pub q: Option<QParameter>,
    pub omega: OmegaChoice,
    pub seed: u64,
    pub tol: Tolerances,
    pub qrange: QRangeOptions,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            grid_n: crate::geometry::DEFAULT_NODES,
            fourier_k: crate::geometry::DEFAULT_DEGREE,
            q: None,
            omega: OmegaChoice::NumericalRange,
            seed: 0,
            tol: Tolerances::default(),
            qrange: QRangeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub n: usize,
    pub q_abs: Option<f64>,
    pub grid_n: usize,
    /// Node count after quadrature refinement.
    pub profile_n: usize,
    pub fourier_k: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub matrix_hash: String,
    pub omega: String,
    pub a_family_size: usize,
    /// `const_thm25` is computed with `a_lower ≤ a(Ω)`.
    pub const_thm25_basis: String,
}

/// Every computed bound, with the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub gamma1: f64,
    pub m_total: f64,
    pub a_lower: f64,
    pub const_thm22: f64,
    pub const_thm25: f64,
    pub geo_gamma_bound: Option<f64>,
    pub qrange_gamma_bound: Option<f64>,
    pub conjecture_constant: Option<f64>,
    pub meta: ReportMeta,
}

impl BoundsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptyInterior) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs ranges → geometry → potential → bounds for `A`.
pub fn assemble_report(a: &Operator, cfg: &ReportConfig) -> Result<BoundsReport> {
    let tol = &cfg.tol;
    tol.validate()?;
    if cfg.omega == OmegaChoice::QRange && cfg.q.is_none() {
        return Err(Error::input("Ω = Ω_q needs a value of q"));
    }
    let flat = a.numerical_range_is_flat(tol.eig_tol);
    let opts = QRangeOptions { seed: cfg.seed, ..cfg.qrange };

    let w_body = if flat {
        None
    } else {
        Some(numrange_body(a, cfg.grid_n, cfg.fourier_k, tol).stage("ranges")?)
    };
    let omega_q = match (cfg.q, flat) {
        (Some(q), false) => Some(qrange_body(a, q, cfg.grid_n, cfg.fourier_k, &opts, tol).stage("ranges")?),
        _ => None,
    };
    let omega = match cfg.omega {
        OmegaChoice::NumericalRange => match &w_body {
            Some(w) => w.clone(),
            // flat W(A) is a segment or point: reproduce the precise failure
            None => numrange_body(a, cfg.grid_n, cfg.fourier_k, tol).stage("ranges")?,
        },
        OmegaChoice::Disk { center, radius } => SupportFn::disk(center, radius).stage("geometry")?,
        OmegaChoice::QRange => match &omega_q {
            Some(w) => w.clone(),
            None => return Err(Error::EmptyInterior).stage("ranges"),
        },
    };

    let mesh = boundary_mesh(&omega, cfg.grid_n, tol).stage("geometry")?;
    let profile = potential_profile(a, &mesh, tol).stage("potential")?;
    let gamma1 = gamma_one(&profile, tol).stage("potential")?;
    let m = m_total(&profile);

    let family = default_family(profile.mesh(), cfg.seed).stage("bounds")?;
    let a_lower = a_lower_estimate(profile.mesh(), &family).stage("bounds")?;
    let const_thm22 = constant_thm22(gamma1, m).stage("bounds")?;
    let const_thm25 = constant_thm25(gamma1, a_lower).stage("bounds")?;
    let geo_gamma_bound = match &w_body {
        Some(w) if contains(&omega, w, tol) => optional(geometric_gamma_bound(a, &omega, w, tol)).stage("bounds")?,
        _ => None,
    };
    let qrange_gamma_bound = match (cfg.q, &omega_q, &w_body) {
        (Some(q), Some(oq), Some(w)) => {
            optional(qrange_gamma_bound(a, q, oq, w, cfg.grid_n, tol)).stage("bounds")?
        }
        _ => None,
    };
    let conjecture_constant = cfg.q.map(conjecture_constant);

    let report = BoundsReport {
        gamma1,
        m_total: m,
        a_lower,
        const_thm22,
        const_thm25,
        geo_gamma_bound,
        qrange_gamma_bound,
        conjecture_constant,
        meta: ReportMeta {
            n: a.dim(),
            q_abs: cfg.q.map(|q| q.abs()),
            grid_n: cfg.grid_n,
            profile_n: profile.mesh().len(),
            fourier_k: cfg.fourier_k,
            seed: cfg.seed,
            tol: *tol,
            matrix_hash: a.fingerprint(),
            omega: cfg.omega.describe(),
            a_family_size: family.len(),
            const_thm25_basis: "a_lower".into(),
        },
    };
    let finite = [gamma1, m, a_lower, const_thm22, const_thm25]
        .into_iter()
        .chain(geo_gamma_bound)
        .chain(qrange_gamma_bound)
        .chain(conjecture_constant)
        .all(f64::is_finite);
    if !finite {
        return Err(Error::Consistency("report contains a non-finite value".into())).stage("bounds");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::boundary_mesh;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn nilpotent() -> Operator {
        Operator::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn theorem_constants() {
        assert_eq!(constant_thm22(0.0, 0.0).unwrap(), 1.0 + SQRT_2);
        assert!((constant_thm22(0.0, 1.0).unwrap() - (1.0 + 3f64.sqrt())).abs() < 1e-15);
        assert!(matches!(constant_thm22(0.0, -5.0), Err(Error::Domain(_))));
        assert_eq!(constant_thm25(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(constant_thm25(0.0, 1.0).unwrap(), 1.0 + SQRT_2);
        assert_eq!(constant_thm25(-2.0, 1.0).unwrap(), 1.0);
        assert!(matches!(constant_thm25(0.0, -0.1), Err(Error::Input(_))));
    }

    #[test]
    fn thm25_is_monotone() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                let (g0, g1) = (w[0] - 2.0, w[1] - 2.0);
                assert!(constant_thm25(g1, a).unwrap() >= constant_thm25(g0, a).unwrap());
                assert!(constant_thm25(g0, w[1]).unwrap() >= constant_thm25(g0, w[0]).unwrap());
            }
        }
    }

    #[test]
    fn conjecture_constant_values() {
        let k = |r: f64| conjecture_constant(QParameter::from_abs(r).unwrap());
        assert_eq!(k(1.0), 2.0);
        assert_eq!(k(0.6), 1.0);
        assert!((k(0.8) - 1.0).abs() < 1e-15);
        assert!((k(0.9) - 1.8 / (1.0 + 0.19f64.sqrt())).abs() < 1e-15);
        assert!((k(0.9) - 1.25357).abs() < 1e-5);
        let mut prev = 0.0;
        for i in 1..=1000 {
            let v = k(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn a_lower_examples() {
        let mesh = boundary_mesh(&SupportFn::disk(c(0.0, 0.0), 1.0).unwrap(), 512, &tol()).unwrap();
        let one = vec![BoundaryFunction::constant(c(1.0, 0.0), &mesh)];
        assert!(a_lower_estimate(&mesh, &one).unwrap() < 1e-12);
        let z = vec![BoundaryFunction::from_polynomial(&Polynomial::identity(), &mesh)];
        // trapezoidal error at three spacings inside is about e^{-6π}
        assert!(a_lower_estimate(&mesh, &z).unwrap() < 1e-7);
        let family = default_family(&mesh, 0).unwrap();
        assert_eq!(family.len(), 25);
        let a = a_lower_estimate(&mesh, &family).unwrap();
        assert!((0.0..=1.0).contains(&a));
        assert!(a_lower_estimate(&mesh, &[]).is_err());
    }

    #[test]
    fn a_lower_positive_on_ellipse() {
        let mesh = boundary_mesh(&SupportFn::ellipse(2.0, 1.0, 64).unwrap(), 512, &tol()).unwrap();
        let a = a_lower_estimate(&mesh, &default_family(&mesh, 0).unwrap()).unwrap();
        assert!(a > 0.0 && a <= 1.0, "{a}");
    }

    #[test]
    fn geometric_bound_examples() {
        let tol = tol();
        let a = nilpotent();
        let w = numrange_body(&a, 512, 64, &tol).unwrap();
        assert!(geometric_gamma_bound(&a, &w, &w, &tol).unwrap().abs() < 1e-12);
        let big = SupportFn::disk(c(0.0, 0.0), 2.0).unwrap();
        assert!((geometric_gamma_bound(&a, &big, &w, &tol).unwrap() + 0.25).abs() < 1e-10);
        assert!(matches!(geometric_gamma_bound(&a, &w, &big, &tol), Err(Error::Input(_))));
        // the bound is scale invariant
        let a2 = a.scaled(c(2.0, 0.0));
        let w2 = numrange_body(&a2, 512, 64, &tol).unwrap();
        let big2 = SupportFn::disk(c(0.0, 0.0), 4.0).unwrap();
        assert!((geometric_gamma_bound(&a2, &big2, &w2, &tol).unwrap() + 0.25).abs() < 1e-10);
        let herm = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(geometric_gamma_bound(&herm, &big, &big, &tol), Err(Error::EmptyInterior)));
    }

    #[test]
    fn qrange_bound_examples() {
        let tol = tol();
        let a = nilpotent();
        let w = numrange_body(&a, 256, 32, &tol).unwrap();
        let q = QParameter::from_abs(0.6).unwrap();
        let oq = SupportFn::disk(c(0.0, 0.0), 3.0).unwrap();
        let b = qrange_gamma_bound(&a, q, &oq, &w, 256, &tol).unwrap();
        assert!((b + 0.32).abs() < 1e-9, "{b}");
        let one = QParameter::from_abs(1.0).unwrap();
        assert_eq!(qrange_gamma_bound(&a, one, &w, &w, 256, &tol).unwrap(), 0.0);
        let herm = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(qrange_gamma_bound(&herm, q, &oq, &oq, 64, &tol), Err(Error::EmptyInterior)));
    }

    #[test]
    fn report_for_nilpotent() {
        let a = nilpotent();
        let r = assemble_report(&a, &ReportConfig::default()).unwrap();
        assert!(r.gamma1.abs() < 1e-8);
        assert!(r.m_total < 1e-8);
        assert!(r.a_lower < 1e-8);
        assert!((r.const_thm22 - (1.0 + SQRT_2)).abs() < 1e-6);
        assert!((r.const_thm25 - 2.0).abs() < 1e-6);
        assert!(r.geo_gamma_bound.unwrap().abs() < 1e-8);
        assert_eq!(r.qrange_gamma_bound, None);
        assert_eq!(r.conjecture_constant, None);
        assert_eq!(r.meta.const_thm25_basis, "a_lower");
        let again = assemble_report(&a, &ReportConfig::default()).unwrap();
        assert_eq!(r.to_json().unwrap(), again.to_json().unwrap());
    }

    #[test]
    fn report_for_scalar_on_unit_disk() {
        let a = Operator::from_real_rows(&[&[0.2]]).unwrap();
        let cfg = ReportConfig {
            omega: OmegaChoice::Disk {
                center: c(0.0, 0.0),
                radius: 1.0,
            },
            ..Default::default()
        };
        let r = assemble_report(&a, &cfg).unwrap();
        assert!((r.gamma1 + 2.0).abs() < 1e-8);
        assert!((r.const_thm25 - r.a_lower.sqrt()).abs() < 1e-8);
        assert_eq!(r.geo_gamma_bound, None);
    }

    #[test]
    fn report_for_segment_numerical_range_fails() {
        let a = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let err = assemble_report(&a, &ReportConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "ranges", .. }));
        assert!(matches!(err.root(), Error::NonSmoothBoundary { .. }));
    }

    #[test]
    fn report_with_q() {
        let a = nilpotent();
        let cfg = ReportConfig {
            grid_n: 128,
            fourier_k: 32,
            q: Some(QParameter::from_abs(0.6).unwrap()),
            omega: OmegaChoice::QRange,
            ..Default::default()
        };
        let r = assemble_report(&a, &cfg).unwrap();
        assert!((r.qrange_gamma_bound.unwrap() + 0.32).abs() < 1e-6);
        assert!(r.gamma1 <= r.qrange_gamma_bound.unwrap());
        assert_eq!(r.conjecture_constant, Some(1.0));
    }
}
