//! The double-layer potential `μ(σ, A)` on a boundary mesh and the
//! quantities built from it.
//!
//! With `C(σ) = (τ/2πi)(σI − A)^{-1}` for the unit tangent `τ` at `σ`, the
//! potential is `μ = C + C*`. Boundary integrals are trapezoidal sums in the
//! normal angle with arc-length weights `w_k = ρ_k·2π/N`, so
//! `Σ_k μ_k w_k ≈ 2I` and `f(A) + g(A)* ≈ Σ_k f(σ_k) μ_k w_k`.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, SupportFn};
use crate::poly::Polynomial;
use crate::spectral::{eigenvalues, gershgorin_discs, hermitian_extremes, operator_norm, resolvent, CMatrix, Operator, Tolerances};

/// Finest mesh the profile refinement will try.
pub const MAX_NODES: usize = 4096;

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, TAU)
}

/// A function sampled at the nodes of a mesh.
#[derive(Debug, Clone)]
pub struct BoundaryFunction {
    values: Vec<Complex64>,
    sup_norm: f64,
    source: Option<Polynomial>,
}

impl BoundaryFunction {
    /// Samples `p` at the mesh nodes.
    pub fn from_polynomial(p: &Polynomial, mesh: &BoundaryMesh) -> Self {
        let values: Vec<Complex64> = mesh.points.iter().map(|&z| p.eval(z)).collect();
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Self {
            values,
            sup_norm,
            source: Some(p.clone()),
        }
    }

    pub fn constant(c: Complex64, mesh: &BoundaryMesh) -> Self {
        Self::from_polynomial(&Polynomial::constant(c), mesh)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `max_k |f(σ_k)|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        self.source.as_ref()
    }

    /// Rescaled to unit sup norm on the mesh.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.sup_norm > 0.0) {
            return Err(Error::input("cannot normalise a function that vanishes on the boundary"));
        }
        let s = Complex64::new(1.0 / self.sup_norm, 0.0);
        Ok(Self {
            values: self.values.iter().map(|v| v * s).collect(),
            sup_norm: 1.0,
            source: self.source.as_ref().map(|p| p.scaled(s)),
        })
    }

    /// The same function sampled on another mesh.
    pub fn resampled(&self, mesh: &BoundaryMesh) -> Result<Self> {
        let p = self
            .source
            .as_ref()
            .ok_or_else(|| Error::input("boundary function has no polynomial source to resample"))?;
        Ok(Self::from_polynomial(p, mesh))
    }

    fn aligned(&self, mesh: &BoundaryMesh) -> Result<()> {
        if self.values.len() != mesh.len() {
            return Err(Error::input(format!(
                "boundary function has {} samples but the mesh has {} nodes",
                self.values.len(),
                mesh.len()
            )));
        }
        Ok(())
    }
}

/// `μ(σ, A) = C + C*` with `C = (τ/2πi)(σI − A)^{-1}`.
pub fn mu_at(a: &Operator, sigma: Complex64, tangent: Complex64, tol: &Tolerances) -> Result<CMatrix> {
    if (tangent.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!("tangent {tangent} is not a unit vector")));
    }
    let c = resolvent(a, sigma, tol)? * (tangent / two_pi_i());
    Ok(&c + c.adjoint())
}

/// Fails unless every eigenvalue of `A` lies strictly inside the body.
///
/// Gershgorin discs are tried first; if some disc pokes through the boundary
/// the eigenvalues themselves are checked.
pub fn check_spectrum_inside(a: &Operator, h: &SupportFn, thetas: &[f64], margin: f64) -> Result<()> {
    let clearance = |center: Complex64| {
        thetas
            .iter()
            .map(|&t| h.value(t) - (center * Complex64::from_polar(1.0, -t)).re)
            .fold(f64::INFINITY, f64::min)
    };
    let discs = gershgorin_discs(a);
    if discs.iter().all(|d| clearance(d.center) > d.radius + margin) {
        return Ok(());
    }
    for lambda in eigenvalues(a)? {
        if clearance(lambda) <= margin {
            let disc = discs
                .iter()
                .find(|d| (lambda - d.center).norm() <= d.radius * (1.0 + 1e-12) + 1e-12)
                .copied()
                .unwrap_or(discs[0]);
            return Err(Error::SpectrumOutside {
                center: disc.center,
                radius: disc.radius,
                eigenvalue: lambda,
            });
        }
    }
    Ok(())
}

/// `μ_k` and `λ_min(μ_k)` at every node of a mesh.
#[derive(Debug, Clone)]
pub struct PotentialProfile {
    mesh: BoundaryMesh,
    mu: Vec<CMatrix>,
    lambda_min: Vec<f64>,
    partition_residual: f64,
}

impl PotentialProfile {
    /// The mesh the profile was computed on. May be finer than the one
    /// passed in if refinement was needed.
    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn mu(&self) -> &[CMatrix] {
        &self.mu
    }

    pub fn lambda_min(&self) -> &[f64] {
        &self.lambda_min
    }

    /// `‖Σ_k μ_k w_k − 2I‖`.
    pub fn partition_residual(&self) -> f64 {
        self.partition_residual
    }

    /// CSV `theta,lambda_min,weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,lambda_min,weight")?;
        for k in 0..self.mesh.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.mesh.thetas[k], self.lambda_min[k], self.mesh.weights[k]
            )?;
        }
        Ok(())
    }
}

fn profile_on(a: &Operator, mesh: BoundaryMesh, tol: &Tolerances) -> Result<PotentialProfile> {
    let pairs: Vec<Result<(CMatrix, f64)>> = (0..mesh.len())
        .into_par_iter()
        .map(|k| {
            let mu = mu_at(a, mesh.points[k], mesh.tangents[k], tol)?;
            let (lo, _) = hermitian_extremes(&mu, tol)?;
            Ok((mu, lo))
        })
        .collect();
    let n = a.dim();
    let mut sum = CMatrix::zeros(n, n);
    let mut mu = Vec::with_capacity(mesh.len());
    let mut lambda_min = Vec::with_capacity(mesh.len());
    for (k, r) in pairs.into_iter().enumerate() {
        let (m, lo) = r?;
        sum += &m * Complex64::new(mesh.weights[k], 0.0);
        mu.push(m);
        lambda_min.push(lo);
    }
    for i in 0..n {
        sum[(i, i)] -= Complex64::new(2.0, 0.0);
    }
    let partition_residual = operator_norm(&sum)?;
    Ok(PotentialProfile {
        mesh,
        mu,
        lambda_min,
        partition_residual,
    })
}

/// Evaluates the potential on exactly the given mesh, without refinement.
pub fn potential_profile_at(a: &Operator, mesh: &BoundaryMesh, tol: &Tolerances) -> Result<PotentialProfile> {
    check_spectrum_inside(a, mesh.support(), &mesh.thetas, tol.quad_tol)?;
    profile_on(a, mesh.clone(), tol)
}

/// Evaluates the potential along the mesh, doubling the node count (up to
/// [`MAX_NODES`]) until `‖Σ μ_k w_k − 2I‖ ≤ quad_tol`.
pub fn potential_profile(a: &Operator, mesh: &BoundaryMesh, tol: &Tolerances) -> Result<PotentialProfile> {
    let mut profile = potential_profile_at(a, mesh, tol)?;
    while profile.partition_residual > tol.quad_tol {
        if profile.mesh.len() * 2 > MAX_NODES {
            return Err(Error::Quadrature(format!(
                "‖Σ μ_k w_k − 2I‖ = {:.3e} at N = {}; the spectrum is too close to the boundary",
                profile.partition_residual,
                profile.mesh.len()
            )));
        }
        let finer = profile.mesh.refined(tol)?;
        profile = profile_on(a, finer, tol)?;
    }
    Ok(profile)
}

/// `γ(f) = −Σ_k λ_min,k f_k w_k`.
pub fn gamma(profile: &PotentialProfile, f: &BoundaryFunction) -> Result<Complex64> {
    f.aligned(&profile.mesh)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..f.len() {
        acc += f.values[k] * (profile.lambda_min[k] * profile.mesh.weights[k]);
    }
    Ok(-acc)
}

/// `γ(1)` as a real number, refusing a non-negligible imaginary part.
pub fn gamma_one(profile: &PotentialProfile, tol: &Tolerances) -> Result<f64> {
    let g = gamma(profile, &BoundaryFunction::constant(Complex64::new(1.0, 0.0), &profile.mesh))?;
    if g.im.abs() > tol.quad_tol {
        return Err(Error::Consistency(format!("γ(1) = {g} is not real")));
    }
    Ok(g.re)
}

/// `m = Σ_k |λ_min,k| w_k`.
pub fn m_total(profile: &PotentialProfile) -> f64 {
    profile
        .lambda_min
        .iter()
        .zip(&profile.mesh.weights)
        .map(|(l, w)| l.abs() * w)
        .sum()
}

fn cauchy_sum(a: &Operator, mesh: &BoundaryMesh, f: &[Complex64], tol: &Tolerances) -> Result<CMatrix> {
    check_spectrum_inside(a, mesh.support(), &mesh.thetas, tol.quad_tol)?;
    let terms: Vec<Result<CMatrix>> = (0..mesh.len())
        .into_par_iter()
        .map(|k| {
            let s = mesh.tangents[k] * mesh.weights[k] / two_pi_i() * f[k];
            Ok(resolvent(a, mesh.points[k], tol)? * s)
        })
        .collect();
    let n = a.dim();
    let mut acc = CMatrix::zeros(n, n);
    for t in terms {
        acc += t?;
    }
    Ok(acc)
}

/// `f(A) ≈ Σ_k (τ_k w_k / 2πi) (σ_k I − A)^{-1} f(σ_k)`.
pub fn cauchy_fcalc(a: &Operator, mesh: &BoundaryMesh, f: &BoundaryFunction, tol: &Tolerances) -> Result<CMatrix> {
    f.aligned(mesh)?;
    cauchy_sum(a, mesh, &f.values, tol)
}

/// `g(A) ≈ Σ_k (τ_k w_k / 2πi) (σ_k I − A)^{-1} conj(f(σ_k))`.
pub fn cauchy_transform_op(a: &Operator, mesh: &BoundaryMesh, f: &BoundaryFunction, tol: &Tolerances) -> Result<CMatrix> {
    f.aligned(mesh)?;
    let conj: Vec<Complex64> = f.values.iter().map(|v| v.conj()).collect();
    cauchy_sum(a, mesh, &conj, tol)
}

/// Scalar Cauchy transform of `conj f` at an interior point `z`.
///
/// Points closer than one mesh spacing to the boundary are refused: the
/// trapezoidal rule loses accuracy like `exp(−2π·dist/spacing)`.
pub fn cauchy_transform_boundary(f: &BoundaryFunction, mesh: &BoundaryMesh, z: Complex64) -> Result<Complex64> {
    f.aligned(mesh)?;
    let distance = mesh.interior_distance(z);
    let required = mesh.spacing();
    if distance < required {
        return Err(Error::NearBoundary { z, distance, required });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..mesh.len() {
        acc += f.values[k].conj() * mesh.tangents[k] * mesh.weights[k] / (mesh.points[k] - z);
    }
    Ok(acc / two_pi_i())
}

/// `S = f(A) + g(A)* + γ(f)I` together with the data of its norm bound.
#[derive(Debug, Clone)]
pub struct SOperator {
    pub matrix: CMatrix,
    pub norm: f64,
    /// Real part of `γ(1)`.
    pub gamma1: f64,
    /// `‖Σ μ_k w_k − 2I‖` on the mesh used.
    pub partition_residual: f64,
}

impl SOperator {
    /// `2 + γ(1)`.
    pub fn bound(&self) -> f64 {
        2.0 + self.gamma1
    }
}

/// Builds `S` for `f` with `sup_norm ≤ 1` and checks `‖S‖ ≤ 2 + γ(1)`.
pub fn s_operator(a: &Operator, mesh: &BoundaryMesh, f: &BoundaryFunction, tol: &Tolerances) -> Result<SOperator> {
    f.aligned(mesh)?;
    if f.sup_norm > 1.0 + tol.quad_tol {
        return Err(Error::input(format!("‖f‖ = {} exceeds 1 on the boundary", f.sup_norm)));
    }
    let profile = potential_profile(a, mesh, tol)?;
    let f = if profile.mesh.len() == mesh.len() {
        f.clone()
    } else {
        f.resampled(&profile.mesh)?
    };
    let mesh = &profile.mesh;
    let gamma1 = gamma_one(&profile, tol)?;
    let gf = gamma(&profile, &f)?;
    let mut s = cauchy_fcalc(a, mesh, &f, tol)? + cauchy_transform_op(a, mesh, &f, tol)?.adjoint();
    for i in 0..a.dim() {
        s[(i, i)] += gf;
    }
    let norm = operator_norm(&s)?;
    let slack = tol.psd_tol + profile.partition_residual * f.sup_norm.max(1.0);
    let out = SOperator {
        matrix: s,
        norm,
        gamma1,
        partition_residual: profile.partition_residual,
    };
    if norm > out.bound() * f.sup_norm.max(1.0) + slack {
        return Err(Error::Consistency(format!(
            "‖S‖ = {norm} exceeds 2 + γ(1) = {} beyond the quadrature slack {slack:.3e}",
            out.bound()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::boundary_mesh;
    use crate::spectral::cis;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn nilpotent() -> Operator {
        Operator::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
    }

    fn unit_disk(n: usize) -> BoundaryMesh {
        boundary_mesh(&SupportFn::disk(c(0.0, 0.0), 1.0).unwrap(), n, &tol()).unwrap()
    }

    fn random_operator(rng: &mut ChaCha8Rng, n: usize) -> Operator {
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        Operator::new(m).unwrap()
    }

    fn gershgorin_disk(a: &Operator, factor: f64) -> SupportFn {
        let r = gershgorin_discs(a)
            .iter()
            .map(|d| d.center.norm() + d.radius)
            .fold(0.0, f64::max);
        SupportFn::disk(c(0.0, 0.0), factor * r).unwrap()
    }

    #[test]
    fn mu_of_scalar_zero_on_unit_circle() {
        let a = Operator::from_real_rows(&[&[0.0]]).unwrap();
        for s in [0.0, 0.7, 2.5] {
            let mu = mu_at(&a, cis(s), c(0.0, 1.0) * cis(s), &tol()).unwrap();
            assert!((mu[(0, 0)] - c(1.0 / std::f64::consts::PI, 0.0)).norm() < 1e-15);
        }
        assert!(mu_at(&a, c(1.0, 0.0), c(0.0, 2.0), &tol()).is_err());
    }

    #[test]
    fn mu_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_operator(&mut rng, 3);
            let mu = mu_at(&a, c(5.0, 1.0), cis(rng.random_range(0.0..TAU)), &tol()).unwrap();
            assert!((&mu - mu.adjoint()).norm() <= tol().eig_tol);
        }
    }

    #[test]
    fn scalar_profile_is_constant_on_unit_disk() {
        let a = Operator::from_real_rows(&[&[0.0]]).unwrap();
        let p = potential_profile(&a, &unit_disk(256), &tol()).unwrap();
        for l in p.lambda_min() {
            assert!((l - 1.0 / std::f64::consts::PI).abs() < 1e-13);
        }
        assert!(p.partition_residual() < 1e-12);
        assert!((m_total(&p) - 2.0).abs() < 1e-12);
        assert!((gamma_one(&p, &tol()).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_profile_is_harmonic_measure_density() {
        // μ = 1/2π + Poisson kernel on the unit circle
        let a = Operator::from_real_rows(&[&[0.2]]).unwrap();
        let p = potential_profile(&a, &unit_disk(512), &tol()).unwrap();
        let mesh = p.mesh();
        for k in (0..mesh.len()).step_by(64) {
            let d = (mesh.points[k] - c(0.2, 0.0)).norm_sqr();
            let expected = (1.0 + (1.0 - 0.04) / d) / TAU;
            assert!((p.lambda_min()[k] - expected).abs() < 1e-13);
        }
        assert!((gamma_one(&p, &tol()).unwrap() + 2.0).abs() < 1e-8);
    }

    #[test]
    fn nilpotent_profile_vanishes_on_numerical_range() {
        let a = nilpotent();
        let p = potential_profile(&a, &unit_disk(512), &tol()).unwrap();
        assert!(p.lambda_min().iter().all(|l| l.abs() < 1e-8));
        assert!(m_total(&p) < 1e-8);
        assert!(gamma_one(&p, &tol()).unwrap().abs() < 1e-8);
    }

    #[test]
    fn nilpotent_profile_positive_on_larger_disk() {
        let a = nilpotent();
        let mesh = boundary_mesh(&SupportFn::disk(c(0.0, 0.0), 2.0).unwrap(), 512, &tol()).unwrap();
        let p = potential_profile(&a, &mesh, &tol()).unwrap();
        assert!(p.lambda_min().iter().all(|&l| l > 0.0));
        let g = gamma_one(&p, &tol()).unwrap();
        assert!((m_total(&p) + g).abs() < 1e-12);
    }

    #[test]
    fn spectrum_outside_is_reported() {
        let a = Operator::from_real_rows(&[&[0.0, 0.1], &[0.0, 3.0]]).unwrap();
        match potential_profile(&a, &unit_disk(64), &tol()) {
            Err(Error::SpectrumOutside { eigenvalue, .. }) => assert!((eigenvalue - c(3.0, 0.0)).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gamma_of_zero_and_mesh_mismatch() {
        let a = nilpotent();
        let p = potential_profile(&a, &unit_disk(64), &tol()).unwrap();
        let zero = BoundaryFunction::constant(c(0.0, 0.0), p.mesh());
        assert_eq!(gamma(&p, &zero).unwrap(), c(0.0, 0.0));
        let other = BoundaryFunction::constant(c(1.0, 0.0), &unit_disk(32));
        assert!(matches!(gamma(&p, &other), Err(Error::Input(_))));
    }

    #[test]
    fn functional_calculus_examples() {
        let a = nilpotent();
        let mesh = unit_disk(512);
        let one = BoundaryFunction::constant(c(1.0, 0.0), &mesh);
        let z = BoundaryFunction::from_polynomial(&Polynomial::identity(), &mesh);
        let z2 = BoundaryFunction::from_polynomial(&Polynomial::shifted_power(c(0.0, 0.0), 2), &mesh);
        let id = CMatrix::identity(2, 2);
        assert!((cauchy_fcalc(&a, &mesh, &one, &tol()).unwrap() - &id).norm() < 1e-12);
        assert!((cauchy_fcalc(&a, &mesh, &z, &tol()).unwrap() - a.matrix()).norm() < 1e-8);
        assert!(cauchy_fcalc(&a, &mesh, &z2, &tol()).unwrap().norm() < 1e-8);
        assert!((cauchy_transform_op(&a, &mesh, &one, &tol()).unwrap() - &id).norm() < 1e-12);
        assert!(cauchy_transform_op(&a, &mesh, &z, &tol()).unwrap().norm() < 1e-8);
    }

    #[test]
    fn scalar_cauchy_transform_matches_independent_quadrature() {
        // ellipse x²/4 + y² = 1 traversed by x = 2cos t, y = sin t
        let tol = tol();
        let mesh = boundary_mesh(&SupportFn::ellipse(2.0, 1.0, 64).unwrap(), 1024, &tol).unwrap();
        let p = Polynomial::new(vec![c(0.3, 0.1), c(-0.5, 0.2), c(0.0, 0.4)]).unwrap();
        let f = BoundaryFunction::from_polynomial(&p, &mesh);
        let a0 = c(0.4, -0.2);
        let n = 20_000;
        let mut oracle = c(0.0, 0.0);
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let s = c(2.0 * t.cos(), t.sin());
            let ds = c(-2.0 * t.sin(), t.cos()) * (TAU / n as f64);
            oracle += p.eval(s).conj() / (s - a0) * ds;
        }
        oracle /= two_pi_i();
        let a = Operator::new(CMatrix::from_element(1, 1, a0)).unwrap();
        let op = cauchy_transform_op(&a, &mesh, &f, &tol).unwrap()[(0, 0)];
        let scalar = cauchy_transform_boundary(&f, &mesh, a0).unwrap();
        assert!((op - oracle).norm() < 1e-8, "{op} vs {oracle}");
        assert!((scalar - oracle).norm() < 1e-8);
    }

    #[test]
    fn cauchy_transform_boundary_examples() {
        let mesh = unit_disk(256);
        let one = BoundaryFunction::constant(c(1.0, 0.0), &mesh);
        let z = BoundaryFunction::from_polynomial(&Polynomial::identity(), &mesh);
        let z2 = BoundaryFunction::from_polynomial(&Polynomial::shifted_power(c(0.0, 0.0), 2), &mesh);
        assert!((cauchy_transform_boundary(&one, &mesh, c(0.3, 0.2)).unwrap() - 1.0).norm() < 1e-12);
        assert!(cauchy_transform_boundary(&z, &mesh, c(0.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(cauchy_transform_boundary(&z2, &mesh, c(0.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(matches!(
            cauchy_transform_boundary(&one, &mesh, c(0.999, 0.0)),
            Err(Error::NearBoundary { .. })
        ));
    }

    #[test]
    fn s_operator_examples() {
        let a = nilpotent();
        let mesh = unit_disk(512);
        let one = BoundaryFunction::constant(c(1.0, 0.0), &mesh);
        let s = s_operator(&a, &mesh, &one, &tol()).unwrap();
        assert!((s.norm - s.bound()).abs() < 1e-8);
        let z = BoundaryFunction::from_polynomial(&Polynomial::identity(), &mesh);
        let s = s_operator(&a, &mesh, &z, &tol()).unwrap();
        assert!((&s.matrix - a.matrix()).norm() < 1e-8);
        assert!((s.norm - 2.0).abs() < 1e-8);
        let big = BoundaryFunction::constant(c(2.0, 0.0), &mesh);
        assert!(matches!(s_operator(&a, &mesh, &big, &tol()), Err(Error::Input(_))));
    }

    #[test]
    fn s_norm_bound_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = tol();
        for trial in 0..20 {
            let a = random_operator(&mut rng, 3);
            let mesh = boundary_mesh(&gershgorin_disk(&a, 1.2), 512, &tol).unwrap();
            let coeffs: Vec<Complex64> = (0..5).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let f = BoundaryFunction::from_polynomial(&Polynomial::new(coeffs).unwrap(), &mesh)
                .normalized()
                .unwrap();
            let s = s_operator(&a, &mesh, &f, &tol).unwrap();
            assert!(s.norm <= s.bound() + 1e-6, "trial {trial}: {} > {}", s.norm, s.bound());
        }
    }

    #[test]
    fn fcalc_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tol = tol();
        for d in 1..=8 {
            let a = random_operator(&mut rng, 3);
            let mesh = boundary_mesh(&gershgorin_disk(&a, 1.5), 512, &tol).unwrap();
            let coeffs: Vec<Complex64> = (0..=d).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let p = Polynomial::new(coeffs).unwrap();
            let f = BoundaryFunction::from_polynomial(&p, &mesh);
            let quad = cauchy_fcalc(&a, &mesh, &f, &tol).unwrap();
            let direct = p.eval_matrix(a.matrix());
            assert!((&quad - &direct).norm() <= 1e-8 * direct.norm().max(1.0), "degree {d}");
        }
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let a = nilpotent();
        let p = potential_profile(&a, &unit_disk(16), &tol()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,lambda_min,weight\n"));
        assert_eq!(text.lines().count(), p.mesh().len() + 1);
    }
}
