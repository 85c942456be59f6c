//! Seeded random matrix ensembles.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{operator_norm, CMatrix, Operator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble {
    /// i.i.d. standard complex Gaussian entries scaled by `1/√n`.
    Ginibre,
    /// A single Jordan block with the given eigenvalue and superdiagonal.
    Jordan { eigenvalue: Complex64, offdiag: Complex64 },
    /// Strictly upper shift with complex Gaussian superdiagonal weights.
    NilpotentShift,
    /// `U D U*` with `U` Haar-like unitary and `D` uniform in the unit disk,
    /// plus a perturbation of operator norm exactly `eps`.
    PerturbedNormal { eps: f64 },
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::Ginibre => "ginibre",
            Ensemble::Jordan { .. } => "jordan",
            Ensemble::NilpotentShift => "nilpotent_shift",
            Ensemble::PerturbedNormal { .. } => "perturbed_normal",
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    /// Names as in [`Ensemble::name`]; Jordan blocks default to eigenvalue 0
    /// and superdiagonal 1, perturbed normals to `eps = 0.1`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ginibre" => Ok(Ensemble::Ginibre),
            "jordan" => Ok(Ensemble::Jordan {
                eigenvalue: Complex64::new(0.0, 0.0),
                offdiag: Complex64::new(1.0, 0.0),
            }),
            "nilpotent_shift" => Ok(Ensemble::NilpotentShift),
            "perturbed_normal" => Ok(Ensemble::PerturbedNormal { eps: 0.1 }),
            other => Err(Error::input(format!(
                "unknown ensemble {other:?} (expected ginibre, jordan, nilpotent_shift or perturbed_normal)"
            ))),
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// Deterministic sample for `(kind, n, seed)`.
pub fn sample(kind: Ensemble, n: usize, seed: u64) -> Result<Operator> {
    Ok(sample_with_normal_part(kind, n, seed)?.0)
}

/// The sample and, for [`Ensemble::PerturbedNormal`], its unperturbed normal part.
pub fn sample_with_normal_part(kind: Ensemble, n: usize, seed: u64) -> Result<(Operator, Option<Operator>)> {
    if n < 1 {
        return Err(Error::input("matrix dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = match kind {
        Ensemble::Ginibre => gaussian_matrix(&mut rng, n) / Complex64::new((n as f64).sqrt(), 0.0),
        Ensemble::Jordan { eigenvalue, offdiag } => {
            CMatrix::from_fn(n, n, |i, j| match j as isize - i as isize {
                0 => eigenvalue,
                1 => offdiag,
                _ => Complex64::new(0.0, 0.0),
            })
        }
        Ensemble::NilpotentShift => {
            let w: Vec<Complex64> = (0..n.saturating_sub(1)).map(|_| gaussian(&mut rng)).collect();
            CMatrix::from_fn(n, n, |i, j| if j == i + 1 { w[i] } else { Complex64::new(0.0, 0.0) })
        }
        Ensemble::PerturbedNormal { eps } => {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::input(format!("perturbation size must be non-negative, got {eps}")));
            }
            let u = gaussian_matrix(&mut rng, n).qr().q();
            let d: Vec<Complex64> = (0..n)
                .map(|_| {
                    let r = rng.random::<f64>().sqrt();
                    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            let normal = &u * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * u.adjoint();
            let g = gaussian_matrix(&mut rng, n);
            let gn = operator_norm(&g)?;
            let pert = if gn > 0.0 { g * Complex64::new(eps / gn, 0.0) } else { g };
            let normal_op = Operator::new(normal.clone())?;
            return Ok((Operator::new(normal + pert)?, Some(normal_op)));
        }
    };
    Ok((Operator::new(m)?, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jordan_block() {
        let kind = Ensemble::Jordan {
            eigenvalue: Complex64::new(0.0, 0.0),
            offdiag: Complex64::new(2.0, 0.0),
        };
        let a = sample(kind, 2, 99).unwrap();
        let expected = Operator::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn deterministic_per_seed() {
        for name in ["ginibre", "jordan", "nilpotent_shift", "perturbed_normal"] {
            let kind: Ensemble = name.parse().unwrap();
            assert_eq!(kind.name(), name);
            assert_eq!(sample(kind, 3, 7).unwrap(), sample(kind, 3, 7).unwrap());
        }
        assert_ne!(sample(Ensemble::Ginibre, 3, 1).unwrap(), sample(Ensemble::Ginibre, 3, 2).unwrap());
        assert!("wishart".parse::<Ensemble>().is_err());
    }

    #[test]
    fn perturbation_is_bounded() {
        for seed in 0..10 {
            let (a, normal) = sample_with_normal_part(Ensemble::PerturbedNormal { eps: 0.05 }, 4, seed).unwrap();
            let normal = normal.unwrap();
            let diff = operator_norm(&(a.matrix() - normal.matrix())).unwrap();
            assert!(diff <= 0.05 + 1e-12);
            let nm = normal.matrix();
            assert!((nm * nm.adjoint() - nm.adjoint() * nm).norm() < 1e-12);
        }
    }

    #[test]
    fn nilpotent_shift_is_nilpotent() {
        let a = sample(Ensemble::NilpotentShift, 4, 3).unwrap();
        let m = a.matrix();
        assert!((m * m * m * m).norm() == 0.0);
    }

    #[test]
    fn empty_dimension_is_rejected() {
        assert!(matches!(sample(Ensemble::Ginibre, 0, 0), Err(Error::Input(_))));
    }
}
