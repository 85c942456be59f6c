//! Numerical range `W(A)` and scaled q-numerical range `Ω_q = W_q(A)/q`,
//! both through their support functions.
//!
//! For a unit vector `x` the best partner `y` with `⟨x, y⟩ = |q|` gives
//!
//! ```text
//! h_{Ω_q}(θ) = sup_{‖x‖=1} Re⟨e^{-iθ}Ax, x⟩ + t·‖P_{x⊥} Ax‖,   t = √(1−|q|²)/|q|,
//! ```
//!
//! with `‖P_{x⊥}Ax‖² = ‖Ax‖² − |⟨Ax, x⟩|²`. The supremum is non-concave and
//! is estimated by multi-start projected ascent, so values are lower bounds.

use std::f64::consts::TAU;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fit_support_adaptive, theta_grid, SupportFn};
use crate::spectral::{hermitian_eigen, CMatrix, Operator, Tolerances};
use crate::sphere::{multi_start, random_starts, DefectObjective};

/// `q` with `0 < |q| ≤ 1`. Only `|q|` matters: `Ω_q = Ω_{|q|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParameter {
    q: Complex64,
}

impl QParameter {
    pub fn new(q: Complex64) -> Result<Self> {
        let r = q.norm();
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::input(format!("|q| must lie in (0, 1], got {r}")));
        }
        Ok(Self { q })
    }

    pub fn from_abs(q_abs: f64) -> Result<Self> {
        Self::new(Complex64::new(q_abs, 0.0))
    }

    /// `|q| = 1/√(1+t²)`.
    pub fn from_t(t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::input(format!("t must be finite and non-negative, got {t}")));
        }
        Self::from_abs(1.0 / (1.0 + t * t).sqrt())
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn abs(&self) -> f64 {
        self.q.norm()
    }

    /// `√(1−|q|²)/|q|`.
    pub fn t(&self) -> f64 {
        let r = self.abs();
        (1.0 - r * r).max(0.0).sqrt() / r
    }

    pub fn is_one(&self) -> bool {
        self.abs() >= 1.0
    }
}

fn top_eigenpair(h: &CMatrix) -> (f64, Vec<Complex64>) {
    let eig = SymmetricEigen::new(h.clone());
    let (i, &v) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    (v, eig.eigenvectors.column(i).iter().copied().collect())
}

/// `h_{W(A)}(θ) = λ_max((e^{-iθ}A + e^{iθ}A*)/2)`.
pub fn numrange_support(a: &Operator, theta: f64) -> f64 {
    top_eigenpair(&a.rotated_hermitian_part(theta)).0
}

/// Support function of `W(A)` fitted from `nodes` samples, with at least
/// `degree` Fourier modes.
pub fn numrange_body(a: &Operator, nodes: usize, degree: usize, tol: &Tolerances) -> Result<SupportFn> {
    let samples: Vec<(f64, f64)> = theta_grid(nodes)
        .into_iter()
        .map(|t| (t, numrange_support(a, t)))
        .collect();
    Ok(fit_support_adaptive(&samples, degree, tol)?.support)
}

/// Top eigenspace of `Re(e^{-iθ}A)`: the finite-dimensional form of the
/// approximate maximiser set `M_{θ,ε}`.
#[derive(Debug, Clone)]
pub struct MaximizerSet {
    pub theta: f64,
    /// Orthonormal columns spanning the eigenspace.
    pub basis: CMatrix,
    /// `h_{W(A)}(e^{iθ})`.
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Eigenvectors of `Re(e^{-iθ}A)` with eigenvalue `≥ λ_max − max(ε, eig_gap_tol)`.
pub fn maximizer_set(a: &Operator, theta: f64, eps: f64, tol: &Tolerances) -> Result<MaximizerSet> {
    if !(eps >= 0.0) {
        return Err(Error::input(format!("ε must be non-negative, got {eps}")));
    }
    let eig = hermitian_eigen(&a.rotated_hermitian_part(theta), tol)?;
    let n = eig.values.len();
    let top = eig.values[n - 1];
    let cut = top - eps.max(tol.eig_gap_tol);
    let first = eig.values.iter().position(|&v| v >= cut).unwrap_or(n - 1);
    let basis = eig.vectors.columns(first, n - first).into_owned();
    Ok(MaximizerSet {
        theta,
        basis,
        eigenvalue: top,
        multiplicity: n - first,
    })
}

/// `‖Ax‖² − |⟨Ax, x⟩|²`.
pub fn defect_squared(a: &CMatrix, x: &[Complex64]) -> f64 {
    let xv = nalgebra::DVector::from_column_slice(x);
    let ax = a * &xv;
    (ax.norm_squared() - xv.dotc(&ax).norm_sqr()).max(0.0)
}

/// Non-normality profile `m(θ) = sup_{x ∈ M_θ} √(‖Ax‖² − |⟨Ax, x⟩|²)`.
///
/// A simple top eigenvalue gives the closed form at its eigenvector. A
/// degenerate one is searched with `8·d` seeded starts inside the eigenspace.
pub fn m_theta(a: &Operator, theta: f64, tol: &Tolerances) -> Result<f64> {
    let set = maximizer_set(a, theta, 0.0, tol)?;
    let d = set.multiplicity;
    let first: Vec<Complex64> = set.basis.column(0).iter().copied().collect();
    if d == 1 {
        return Ok(defect_squared(a.matrix(), &first).sqrt());
    }
    let obj = DefectObjective::in_subspace(a.matrix(), &set.basis);
    let mut starts: Vec<Vec<Complex64>> = (0..d)
        .map(|j| (0..d).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    starts.extend(random_starts(d, 8 * d, 0x6d74));
    let best = multi_start(&obj, starts, 1e-13);
    Ok(best.value.max(0.0).sqrt())
}

/// Trapezoidal `∫₀^{2π} m(θ) dθ` on `nodes` equispaced angles.
pub fn m_integral(a: &Operator, nodes: usize, tol: &Tolerances) -> Result<f64> {
    if nodes == 0 {
        return Err(Error::input("need at least one node"));
    }
    let values: Vec<Result<f64>> = theta_grid(nodes).into_par_iter().map(|t| m_theta(a, t, tol)).collect();
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Ok(sum * TAU / nodes as f64)
}

/// Knobs for the q-range sphere search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QRangeOptions {
    /// Total starts, one of which is the `W(A)` maximiser.
    pub restarts: usize,
    pub seed: u64,
    /// Stop when the Riemannian gradient is this small.
    pub gtol: f64,
}

impl Default for QRangeOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            gtol: 1e-10,
        }
    }
}

/// Lower estimate of a support value together with the search outcome.
#[derive(Debug, Clone)]
pub struct SupportEstimate {
    pub value: f64,
    pub converged: bool,
    pub maximizer: Vec<Complex64>,
}

struct QRangeProblem<'a> {
    a: &'a Operator,
    t: f64,
}

impl<'a> QRangeProblem<'a> {
    fn new(a: &'a Operator, q: QParameter) -> Self {
        Self { a, t: q.t() }
    }

    fn solve(&self, theta: f64, opts: &QRangeOptions, extra: Option<&[Complex64]>) -> SupportEstimate {
        let h = self.a.rotated_hermitian_part(theta);
        let (top, vec) = top_eigenpair(&h);
        if self.t == 0.0 {
            return SupportEstimate {
                value: top,
                converged: true,
                maximizer: vec,
            };
        }
        let obj = DefectObjective::with_root(&h, self.a.matrix(), self.t);
        let mut starts = vec![vec];
        if let Some(x) = extra {
            starts.push(x.to_vec());
        }
        starts.extend(random_starts(self.a.dim(), opts.restarts.saturating_sub(starts.len()), opts.seed));
        let best = multi_start(&obj, starts, opts.gtol);
        SupportEstimate {
            value: best.value,
            converged: best.converged,
            maximizer: best.x,
        }
    }
}

/// `h_{Ω_q}(θ)`, estimated from below.
pub fn qrange_support(a: &Operator, q: QParameter, theta: f64, opts: &QRangeOptions) -> SupportEstimate {
    QRangeProblem::new(a, q).solve(theta, opts, None)
}

/// Samples of `h_{Ω_q}` on the uniform grid with `nodes` points.
pub fn qrange_samples(a: &Operator, q: QParameter, nodes: usize, opts: &QRangeOptions) -> Vec<SupportEstimate> {
    let problem = QRangeProblem::new(a, q);
    theta_grid(nodes)
        .into_par_iter()
        .map(|t| problem.solve(t, opts, None))
        .collect()
}

/// Support function of `Ω_q` fitted from `nodes` samples.
///
/// Refuses scalar `A`. Fails with [`Error::Consistency`] if a sample falls
/// below `h_{W(A)}` by more than `quad_tol`, since `W(A) ⊆ Ω_q`.
pub fn qrange_body(
    a: &Operator,
    q: QParameter,
    nodes: usize,
    degree: usize,
    opts: &QRangeOptions,
    tol: &Tolerances,
) -> Result<SupportFn> {
    if a.is_scalar_multiple_of_identity(tol.eig_tol) {
        return Err(Error::input("q-range routines need A ≠ λI"));
    }
    if q.is_one() {
        return numrange_body(a, nodes, degree, tol);
    }
    let thetas = theta_grid(nodes);
    let estimates = qrange_samples(a, q, nodes, opts);
    let mut samples = Vec::with_capacity(nodes);
    for (&t, est) in thetas.iter().zip(&estimates) {
        let floor = numrange_support(a, t);
        if est.value < floor - tol.quad_tol {
            return Err(Error::Consistency(format!(
                "q-range support {} below numerical-range support {floor} at θ = {t}",
                est.value
            )));
        }
        samples.push((t, est.value));
    }
    Ok(fit_support_adaptive(&samples, degree, tol)?.support)
}

/// Both sides of `∫₀^{2π} m(θ) dθ = d/dt|∂Ω(t)|` at `t = 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    /// Trapezoidal `∫ m(θ) dθ`.
    pub lhs: f64,
    /// `(|∂Ω(t)| − |∂W(A)|)/t`.
    pub rhs: f64,
}

impl DerivativeCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(f64::MIN_POSITIVE)
    }
}

/// Compares `∫ m` with the forward-difference slope of the `Ω(t)` perimeter.
pub fn perimeter_derivative_check(
    a: &Operator,
    t_step: f64,
    nodes: usize,
    degree: usize,
    opts: &QRangeOptions,
    tol: &Tolerances,
) -> Result<DerivativeCheck> {
    if !(t_step > 0.0 && t_step.is_finite()) {
        return Err(Error::input(format!("t_step must be positive, got {t_step}")));
    }
    // smoothness of W(A) is a precondition
    numrange_body(a, nodes, degree, tol)?;
    let thetas = theta_grid(nodes);
    let dt = TAU / nodes as f64;
    let lhs = m_integral(a, nodes, tol)?;
    let q = QParameter::from_t(t_step)?;
    let outer: f64 = qrange_samples(a, q, nodes, opts).iter().map(|e| e.value).sum::<f64>() * dt;
    let inner: f64 = thetas.iter().map(|&t| numrange_support(a, t)).sum::<f64>() * dt;
    Ok(DerivativeCheck {
        lhs,
        rhs: (outer - inner) / t_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::cis;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn nilpotent() -> Operator {
        Operator::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
    }

    fn sample_matrix() -> Operator {
        Operator::from_rows(&[
            vec![c(0.3, 0.1), c(1.0, -0.2), c(0.0, 0.4)],
            vec![c(-0.2, 0.0), c(-0.5, 0.6), c(0.8, 0.1)],
            vec![c(0.1, -0.3), c(0.2, 0.0), c(0.4, -0.7)],
        ])
        .unwrap()
    }

    #[test]
    fn q_parameter() {
        let q = QParameter::from_abs(0.6).unwrap();
        assert!((q.t() - 4.0 / 3.0).abs() < 1e-15);
        assert!((QParameter::from_t(4.0 / 3.0).unwrap().abs() - 0.6).abs() < 1e-15);
        assert_eq!(QParameter::from_abs(1.0).unwrap().t(), 0.0);
        assert!(QParameter::from_abs(0.0).is_err());
        assert!(QParameter::from_abs(1.2).is_err());
        assert_eq!(QParameter::new(c(0.0, 0.6)).unwrap().t(), QParameter::from_abs(0.6).unwrap().t());
    }

    #[test]
    fn numrange_support_examples() {
        for t in [0.0, 0.4, 2.0, 5.5] {
            assert!((numrange_support(&nilpotent(), t) - 1.0).abs() < 1e-14);
            let d = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
            assert!((numrange_support(&d, t) - t.cos().abs()).abs() < 1e-14);
            assert!((numrange_support(&Operator::identity(3), t) - t.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn numrange_bodies() {
        let unit = numrange_body(&nilpotent(), 512, 64, &tol()).unwrap();
        assert!((unit.a0() - 1.0).abs() < 1e-13);
        assert!(unit.cos_coefficients().iter().chain(unit.sin_coefficients()).all(|v| v.abs() < 1e-13));

        let jordan = Operator::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let body = numrange_body(&jordan, 512, 64, &tol()).unwrap();
        assert!((body.a0() - 0.5).abs() < 1e-13);
        assert!((body.cos_coefficients()[0] - 1.0).abs() < 1e-13);

        let seg = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(numrange_body(&seg, 512, 64, &tol()), Err(Error::NonSmoothBoundary { .. })));
    }

    #[test]
    fn maximizer_sets() {
        let s = maximizer_set(&nilpotent(), 0.0, 0.0, &tol()).unwrap();
        assert_eq!(s.multiplicity, 1);
        let x = s.basis.column(0);
        assert!((x[0].norm() - x[1].norm()).abs() < 1e-14);
        assert!(((x[1] / x[0]) - c(1.0, 0.0)).norm() < 1e-14);

        let s = maximizer_set(&Operator::identity(3), 1.0, 0.0, &tol()).unwrap();
        assert_eq!(s.multiplicity, 3);

        let d = Operator::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        let s = maximizer_set(&d, 0.0, 0.5, &tol()).unwrap();
        assert_eq!(s.multiplicity, 1);
        assert!((s.basis[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert_eq!(maximizer_set(&d, 0.0, 1.5, &tol()).unwrap().multiplicity, 2);
    }

    #[test]
    fn m_theta_examples() {
        for t in [0.0, 1.0, 3.0] {
            assert!((m_theta(&nilpotent(), t, &tol()).unwrap() - 1.0).abs() < 1e-13);
            assert!(m_theta(&Operator::identity(2), t, &tol()).unwrap().abs() < 1e-13);
        }
        let d = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(m_theta(&d, 0.0, &tol()).unwrap().abs() < 1e-13);
    }

    #[test]
    fn m_theta_degenerate_eigenspace() {
        // A = diag(J, J) with J the 2×2 nilpotent: every direction has a
        // two-dimensional top eigenspace, sup of the defect is still 1.
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 1)] = c(2.0, 0.0);
        m[(2, 3)] = c(2.0, 0.0);
        let a = Operator::new(m).unwrap();
        let set = maximizer_set(&a, 0.3, 0.0, &tol()).unwrap();
        assert_eq!(set.multiplicity, 2);
        assert!((m_theta(&a, 0.3, &tol()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qrange_examples() {
        let opts = QRangeOptions::default();
        let q = QParameter::from_abs(0.6).unwrap();
        for t in [0.0, 0.7, 2.5] {
            let est = qrange_support(&nilpotent(), q, t, &opts);
            assert!((est.value - 3.0).abs() < 1e-9, "{}", est.value);
            let one = qrange_support(&sample_matrix(), QParameter::from_abs(1.0).unwrap(), t, &opts);
            assert!((one.value - numrange_support(&sample_matrix(), t)).abs() < 1e-14);
            let id = qrange_support(&Operator::identity(2), q, t, &opts);
            assert!((id.value - t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn qrange_bodies() {
        let opts = QRangeOptions::default();
        let body = qrange_body(&nilpotent(), QParameter::from_abs(0.6).unwrap(), 128, 32, &opts, &tol()).unwrap();
        assert!((body.a0() - 3.0).abs() < 1e-9);
        let one = qrange_body(&nilpotent(), QParameter::from_abs(1.0).unwrap(), 128, 32, &opts, &tol()).unwrap();
        assert!((one.a0() - 1.0).abs() < 1e-12);
        let err = qrange_body(&Operator::identity(2), QParameter::from_abs(0.5).unwrap(), 128, 32, &opts, &tol());
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn nilpotent_derivative_identity() {
        let check = perimeter_derivative_check(&nilpotent(), 1e-3, 128, 32, &QRangeOptions::default(), &tol()).unwrap();
        assert!((check.lhs - TAU).abs() < 1e-10);
        // h_{Ω(t)} ≡ √(1+t²) + t for this matrix
        let t: f64 = 1e-3;
        let exact = TAU * ((1.0 + t * t).sqrt() + t - 1.0) / t;
        assert!((check.rhs - exact).abs() < 1e-8, "{}", check.rhs);
        assert!((check.rhs - TAU).abs() < 1e-2);
    }

    #[test]
    fn flat_range_has_no_derivative_check() {
        let d = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let r = perimeter_derivative_check(&d, 1e-3, 128, 32, &QRangeOptions::default(), &tol());
        assert!(matches!(r, Err(Error::NonSmoothBoundary { .. })));
    }

    #[test]
    fn rotation_translation_and_nesting() {
        let a = sample_matrix();
        let opts = QRangeOptions::default();
        let phi = 0.9;
        let rotated = a.scaled(cis(phi));
        let shift = c(0.4, -1.1);
        let moved = a.shifted(shift);
        let qs = [1.0, 0.9, 0.8, 0.6].map(|v| QParameter::from_abs(v).unwrap());
        for k in 0..8 {
            let t = 0.8 * k as f64;
            assert!((numrange_support(&rotated, t) - numrange_support(&a, t - phi)).abs() < 1e-12);
            assert!((numrange_support(&moved, t) - numrange_support(&a, t) - (shift * cis(-t)).re).abs() < 1e-12);
            let m0 = m_theta(&a, t, &tol()).unwrap();
            assert!((m_theta(&moved, t, &tol()).unwrap() - m0).abs() < 1e-10);
            assert!((m_theta(&rotated, t + phi, &tol()).unwrap() - m0).abs() < 1e-10);
            let vals: Vec<f64> = qs.iter().map(|&q| qrange_support(&a, q, t, &opts).value).collect();
            for w in vals.windows(2) {
                assert!(w[0] <= w[1] + 1e-8, "{vals:?}");
            }
            let r1 = qrange_support(&rotated, qs[3], t, &opts).value;
            let r0 = qrange_support(&a, qs[3], t - phi, &opts).value;
            assert!((r1 - r0).abs() < 1e-8);
        }
    }
}
