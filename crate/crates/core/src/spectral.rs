//! Dense complex matrix primitives.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Numerical tolerances shared across the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigen-solver residual bound.
    pub eig_tol: f64,
    /// Quadrature consistency bound.
    pub quad_tol: f64,
    /// Slack allowed for negative eigenvalues of PSD quantities.
    pub psd_tol: f64,
    /// Smallest admissible radius of curvature.
    pub curvature_tol: f64,
    /// Eigenvalues this close to the top one count as the same eigenspace.
    pub eig_gap_tol: f64,
    /// Resolvents with larger condition number are refused.
    pub cond_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            quad_tol: 1e-8,
            psd_tol: 1e-8,
            curvature_tol: 1e-8,
            eig_gap_tol: 1e-9,
            cond_cap: 1e12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("eig_tol", self.eig_tol),
            ("quad_tol", self.quad_tol),
            ("psd_tol", self.psd_tol),
            ("curvature_tol", self.curvature_tol),
            ("eig_gap_tol", self.eig_gap_tol),
            ("cond_cap", self.cond_cap),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A dense `n × n` complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: CMatrix,
}

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::input(format!(
                "operator must be square and non-empty, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("rows must all have length n"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds from separate real and imaginary parts, row-major.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im).any(|r| r.len() != n) {
            return Err(Error::input("re and im must both be n×n"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(re[i][j], im[i][j])))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("rows must all have length n"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    pub fn diagonal(d: &[Complex64]) -> Result<Self> {
        let n = d.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { Complex64::new(0.0, 0.0) }))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// `c·A`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self { m: &self.m * c }
    }

    /// `A + c·I`.
    pub fn shifted(&self, c: Complex64) -> Self {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self { m }
    }

    /// Hermitian part of `e^{-iθ}A`, i.e. `(e^{-iθ}A + e^{iθ}A*)/2`.
    pub fn rotated_hermitian_part(&self, theta: f64) -> CMatrix {
        let rot = Complex64::from_polar(1.0, -theta);
        let b = &self.m * rot;
        (&b + b.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn is_scalar_multiple_of_identity(&self, tol: f64) -> bool {
        let n = self.dim();
        let mean = self.m.trace() / n as f64;
        let dev = self.shifted(-mean).m.norm();
        dev <= tol * self.m.norm().max(1.0)
    }

    /// Whether `W(A)` is a segment or a point: `A = αH + βI` with `H` Hermitian.
    ///
    /// Writes `A = H + iK` and tests real linear dependence of `{H, K, I}`
    /// through the smallest eigenvalue of their real Gram matrix.
    pub fn numerical_range_is_flat(&self, tol: f64) -> bool {
        let n = self.dim();
        let a = &self.m;
        let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let k = (a - a.adjoint()) * Complex64::new(0.0, -0.5);
        let id = CMatrix::identity(n, n);
        let basis = [h, k, id];
        let gram = nalgebra::Matrix3::from_fn(|i, j| real_inner(&basis[i], &basis[j]));
        let eig = gram.symmetric_eigen();
        let max = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
        let min = eig.eigenvalues.min();
        min <= tol * max
    }

    /// Stable 64-bit FNV-1a fingerprint of the entries, as hex.
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: [u8; 8]| {
            for b in bytes {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed((self.dim() as u64).to_le_bytes());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.m[(i, j)];
                feed(z.re.to_bits().to_le_bytes());
                feed(z.im.to_bits().to_le_bytes());
            }
        }
        format!("{hash:016x}")
    }
}

fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("matrix has non-finite entries"))
    }
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(sv.max())
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn check_hermitian(h: &CMatrix, tol: &Tolerances) -> Result<()> {
    check_finite(h)?;
    if h.nrows() != h.ncols() {
        return Err(Error::input("Hermitian matrix must be square"));
    }
    let defect = (h - h.adjoint()).norm();
    let allowed = tol.eig_tol * h.norm().max(1.0);
    if defect > allowed {
        return Err(Error::NotHermitian { defect, allowed });
    }
    Ok(())
}

pub fn hermitian_eigen(h: &CMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    check_hermitian(h, tol)?;
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// `(λ_min, λ_max)` of a Hermitian matrix.
pub fn hermitian_extremes(h: &CMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    check_hermitian(h, tol)?;
    if h.nrows() == 1 {
        let v = h[(0, 0)].re;
        return Ok((v, v));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let vals = SymmetricEigen::new(sym).eigenvalues;
    Ok((vals.min(), vals.max()))
}

fn shifted_negative(a: &Operator, sigma: Complex64) -> CMatrix {
    let mut m = -a.matrix();
    for i in 0..m.nrows() {
        m[(i, i)] += sigma;
    }
    m
}

/// Extreme singular values of `σI − A`, refusing near-singular shifts.
fn shifted_singular_values(a: &Operator, sigma: Complex64, tol: &Tolerances) -> Result<(CMatrix, f64, f64)> {
    if !(sigma.re.is_finite() && sigma.im.is_finite()) {
        return Err(Error::input(format!("σ = {sigma} is not finite")));
    }
    let m = shifted_negative(a, sigma);
    let sv = m.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if smin <= tol.eig_tol * smax.max(1.0) || cond > tol.cond_cap {
        return Err(Error::Singular { sigma, cond });
    }
    Ok((m, smin, smax))
}

/// `(σI − A)^{-1}`.
pub fn resolvent(a: &Operator, sigma: Complex64, tol: &Tolerances) -> Result<CMatrix> {
    let (m, _, _) = shifted_singular_values(a, sigma, tol)?;
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { sigma, cond: f64::INFINITY })
}

/// `r(σ) = inf_{‖y‖=1} ‖(σ − A)^{-1} y‖² = 1/‖σI − A‖²`.
pub fn min_resolvent_modulus(a: &Operator, sigma: Complex64, tol: &Tolerances) -> Result<f64> {
    let (_, _, smax) = shifted_singular_values(a, sigma, tol)?;
    Ok(1.0 / (smax * smax))
}

/// A closed disc in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

/// Row Gershgorin discs; their union contains the spectrum.
pub fn gershgorin_discs(a: &Operator) -> Vec<Disc> {
    let m = a.matrix();
    (0..a.dim())
        .map(|i| Disc {
            center: m[(i, i)],
            radius: (0..a.dim()).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum(),
        })
        .collect()
}

/// Eigenvalues via complex Schur form. Only used when the Gershgorin
/// enclosure is too coarse for a containment check.
pub fn eigenvalues(a: &Operator) -> Result<Vec<Complex64>> {
    if a.dim() == 1 {
        return Ok(vec![a.matrix()[(0, 0)]]);
    }
    Schur::new(a.matrix().clone())
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Consistency("Schur decomposition did not converge".into()))
}

/// `e^{iθ}`.
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nilpotent() -> Operator {
        Operator::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn norms() {
        assert!((operator_norm(nilpotent().matrix()).unwrap() - 2.0).abs() < 1e-14);
        assert!((operator_norm(Operator::identity(4).matrix()).unwrap() - 1.0).abs() < 1e-14);
        let d = Operator::diagonal(&[c(0.0, 3.0), c(1.0, 0.0)]).unwrap();
        assert!((operator_norm(d.matrix()).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_rejected() {
        let m = CMatrix::from_element(2, 2, c(f64::NAN, 0.0));
        assert!(matches!(Operator::new(m.clone()), Err(Error::Input(_))));
        assert!(operator_norm(&m).is_err());
    }

    #[test]
    fn extremes() {
        let tol = Tolerances::default();
        let d = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert_eq!(hermitian_extremes(d.matrix(), &tol).unwrap(), (1.0, 2.0));
        let z = CMatrix::zeros(3, 3);
        assert_eq!(hermitian_extremes(&z, &tol).unwrap(), (0.0, 0.0));
        let p = Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let (lo, hi) = hermitian_extremes(p.matrix(), &tol).unwrap();
        assert!((lo + 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        assert!(matches!(
            hermitian_extremes(nilpotent().matrix(), &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn resolvent_examples() {
        let tol = Tolerances::default();
        let zero = Operator::new(CMatrix::zeros(2, 2)).unwrap();
        let r = resolvent(&zero, c(2.0, 0.0), &tol).unwrap();
        assert!((r - CMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-15);

        let r = resolvent(&nilpotent(), c(1.0, 0.0), &tol).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((r - expected).norm() < 1e-14);

        let err = resolvent(&Operator::identity(2), c(1.0, 0.0), &tol).unwrap_err();
        match err {
            Error::Singular { sigma, .. } => assert_eq!(sigma, c(1.0, 0.0)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn min_modulus_examples() {
        let tol = Tolerances::default();
        let zero = Operator::new(CMatrix::zeros(2, 2)).unwrap();
        assert!((min_resolvent_modulus(&zero, c(2.0, 0.0), &tol).unwrap() - 0.25).abs() < 1e-15);
        // ‖I − A‖² = 3 + 2√2 for the nilpotent example.
        let r = min_resolvent_modulus(&nilpotent(), c(1.0, 0.0), &tol).unwrap();
        assert!((r - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-14);
        let d = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!((min_resolvent_modulus(&d, c(2.0, 0.0), &tol).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn flat_numerical_range_detection() {
        let tol = 1e-12;
        let herm = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(herm.numerical_range_is_flat(tol));
        // rotated and shifted Hermitian is still a segment
        let seg = herm.scaled(cis(0.7)).shifted(c(0.3, -2.0));
        assert!(seg.numerical_range_is_flat(tol));
        assert!(Operator::identity(3).numerical_range_is_flat(tol));
        assert!(!nilpotent().numerical_range_is_flat(tol));
        let normal = Operator::diagonal(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        assert!(!normal.numerical_range_is_flat(tol));
    }

    #[test]
    fn scalar_detection_and_fingerprint() {
        assert!(Operator::identity(3).scaled(c(2.0, 1.0)).is_scalar_multiple_of_identity(1e-12));
        assert!(!nilpotent().is_scalar_multiple_of_identity(1e-12));
        assert_eq!(nilpotent().fingerprint(), nilpotent().fingerprint());
        assert_ne!(nilpotent().fingerprint(), Operator::identity(2).fingerprint());
    }

    #[test]
    fn gershgorin_contains_eigenvalues() {
        let a = Operator::from_rows(&[
            vec![c(1.0, 0.5), c(0.2, 0.0), c(0.0, 0.1)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.3, 0.3)],
            vec![c(0.1, 0.0), c(0.0, 0.0), c(0.0, 2.0)],
        ])
        .unwrap();
        let discs = gershgorin_discs(&a);
        for lam in eigenvalues(&a).unwrap() {
            assert!(discs.iter().any(|d| (lam - d.center).norm() <= d.radius + 1e-12));
        }
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Operator> {
        proptest::collection::vec(-2.0f64..2.0, 2 * n * n).prop_map(move |v| {
            Operator::new(CMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]))).unwrap()
        })
    }

    fn unit_vector(v: &[f64], n: usize) -> nalgebra::DVector<Complex64> {
        let x = nalgebra::DVector::from_fn(n, |i, _| c(v[2 * i], v[2 * i + 1]));
        let norm = x.norm().max(1e-12);
        x / c(norm, 0.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rayleigh_quotients_lie_between_extremes(
            a in arb_matrix(4),
            xs in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 8), 100),
        ) {
            let tol = Tolerances::default();
            let h = a.rotated_hermitian_part(0.3);
            let (lo, hi) = hermitian_extremes(&h, &tol).unwrap();
            for v in &xs {
                let x = unit_vector(v, 4);
                let q = (x.adjoint() * &h * &x)[(0, 0)].re;
                prop_assert!(q >= lo - 1e-10 && q <= hi + 1e-10);
            }
        }

        #[test]
        fn resolvent_inverts(a in arb_matrix(3), r in 0.0f64..5.0, phi in 0.0f64..6.3) {
            let tol = Tolerances::default();
            // outside every Gershgorin disc
            let reach = gershgorin_discs(&a).iter().map(|d| d.center.norm() + d.radius).fold(0.0, f64::max);
            let sigma = cis(phi) * (reach + 0.5 + r);
            let res = resolvent(&a, sigma, &tol).unwrap();
            let shifted = CMatrix::identity(3, 3) * sigma - a.matrix();
            prop_assert!((&shifted * &res - CMatrix::identity(3, 3)).norm() <= 1e-10);
            let rmod = min_resolvent_modulus(&a, sigma, &tol).unwrap();
            let norm = operator_norm(&shifted).unwrap();
            prop_assert!((rmod * norm * norm - 1.0).abs() <= 1e-10);
        }
    }
}
