//! Reference computations that share no code path with the library routines
//! they are compared against.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `sup_{‖x‖=1} Re⟨e^{-iθ}Ax, x⟩ + t‖Ax − ⟨Ax,x⟩x‖` for a 2×2 matrix, by
/// brute force over `x = (cos α, e^{iφ} sin α)` followed by repeated local
/// zooming of the grid.
pub fn sphere_grid_support(a: &DMatrix<Complex64>, t: f64, theta: f64) -> f64 {
    assert_eq!(a.shape(), (2, 2), "the sphere-grid oracle is for 2×2 matrices");
    let rot = Complex64::from_polar(1.0, -theta);
    let f = |alpha: f64, phi: f64| {
        let x = [Complex64::new(alpha.cos(), 0.0), Complex64::from_polar(alpha.sin(), phi)];
        let ax = [a[(0, 0)] * x[0] + a[(0, 1)] * x[1], a[(1, 0)] * x[0] + a[(1, 1)] * x[1]];
        let w = x[0].conj() * ax[0] + x[1].conj() * ax[1];
        let r0 = ax[0] - w * x[0];
        let r1 = ax[1] - w * x[1];
        (rot * w).re + t * (r0.norm_sqr() + r1.norm_sqr()).sqrt()
    };
    let (mut ca, mut cp, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    let (na, np) = (200, 400);
    for i in 0..=na {
        let alpha = FRAC_PI_2 * i as f64 / na as f64;
        for j in 0..np {
            let phi = TAU * j as f64 / np as f64;
            let v = f(alpha, phi);
            if v > best {
                (ca, cp, best) = (alpha, phi, v);
            }
        }
    }
    let (mut wa, mut wp) = (FRAC_PI_2 / na as f64, TAU / np as f64);
    for _ in 0..20 {
        let (mut na_best, mut np_best) = (ca, cp);
        for i in -10..=10 {
            let alpha = (ca + wa * i as f64 / 10.0).clamp(0.0, FRAC_PI_2);
            for j in -10..=10 {
                let phi = cp + wp * j as f64 / 10.0;
                let v = f(alpha, phi);
                if v > best {
                    (na_best, np_best, best) = (alpha, phi, v);
                }
            }
        }
        (ca, cp) = (na_best, np_best);
        wa /= 4.0;
        wp /= 4.0;
    }
    best
}

/// Length of the closed polygon through `n` samples of `curve` on `[0, 2π)`.
pub fn polygon_perimeter(curve: impl Fn(f64) -> Complex64, n: usize) -> f64 {
    let pt = |k: usize| curve(TAU * (k % n) as f64 / n as f64);
    (0..n).map(|k| (pt(k + 1) - pt(k)).norm()).sum()
}

/// The potential of the 1×1 matrix `[a]` on the unit circle: the constant
/// `1/2π` plus the Poisson kernel.
pub fn scalar_mu_unit_circle(a: Complex64, sigma: Complex64) -> f64 {
    (1.0 + (1.0 - a.norm_sqr()) / (sigma - a).norm_sqr()) / TAU
}

/// `1/‖σI − A‖²` with the norm from power iteration on `B*B`.
pub fn min_resolvent_modulus(a: &DMatrix<Complex64>, sigma: Complex64) -> f64 {
    let n = a.nrows();
    let b = DMatrix::<Complex64>::identity(n, n) * sigma - a;
    let g = b.adjoint() * &b;
    let mut v = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3 * i as f64));
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = &g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        let next = norm / v.norm();
        v = w / Complex64::new(norm, 0.0);
        if (next - lambda).abs() <= 1e-16 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    1.0 / lambda
}

/// `Σ c_k A^k` by repeated multiplication.
pub fn power_series(a: &DMatrix<Complex64>, coeffs: &[Complex64]) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for c in coeffs {
        acc += &power * *c;
        power = &power * a;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_grid_recovers_numerical_radius() {
        // t = 0 gives λ_max of the rotated Hermitian part; for [[0,2],[0,0]] that is 1
        let a = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0),
        ]);
        assert!((sphere_grid_support(&a, 0.0, 0.4) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polygon_of_circle() {
        let p = polygon_perimeter(|t| Complex64::from_polar(1.0, t), 100_000);
        assert!((p - TAU).abs() < 1e-8);
    }

    #[test]
    fn power_iteration_norm() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.5)]));
        let r = min_resolvent_modulus(&a, Complex64::new(0.0, 0.0));
        assert!((r - 0.25).abs() < 1e-12);
    }
}
