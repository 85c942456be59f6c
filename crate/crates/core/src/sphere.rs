//! Projected gradient ascent on the complex unit sphere.
//!
//! Objectives have the form `f(x) = x*Hx + t·φ(‖Ax‖² − |⟨Ax,x⟩|²)` with
//! `φ = √·` or the identity, which covers both the scaled q-range support
//! objective and the non-normality defect.

use std::cell::RefCell;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type C = Complex64;

/// Row-major dense matrix for allocation-free inner loops.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl Dense {
    pub fn from_matrix(m: &DMatrix<C>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self { rows, cols, data }
    }

    fn mul_into(&self, x: &[C], out: &mut [C]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = M* x`.
    fn adjoint_mul_into(&self, x: &[C], out: &mut [C]) {
        out.iter_mut().for_each(|z| *z = C::default());
        for (i, xi) in x.iter().enumerate().take(self.rows) {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * xi;
            }
        }
    }
}

fn dot(x: &[C], y: &[C]) -> C {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[C]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn normalize(x: &mut [C]) -> bool {
    let n = norm(x);
    if !(n > 0.0 && n.is_finite()) {
        return false;
    }
    x.iter_mut().for_each(|z| *z /= n);
    true
}

/// `f(x) = x*Hx + t·φ(‖r‖²)` with `r = Bx − ⟨Bx, Ex⟩ Ex`.
///
/// `E` embeds the search space isometrically (identity when absent), so
/// `‖r‖² = ‖BEx‖² − |⟨BEx, Ex⟩|²` is the non-normality defect, evaluated
/// through the residual vector rather than by cancellation.
pub(crate) struct DefectObjective {
    h: Option<Dense>,
    b: Dense,
    e: Option<Dense>,
    t: f64,
    root: bool,
    scratch: RefCell<Scratch>,
}

struct Scratch {
    hx: Vec<C>,
    y: Vec<C>,
    ex: Vec<C>,
    r: Vec<C>,
    br: Vec<C>,
    ey: Vec<C>,
}

impl DefectObjective {
    /// `x*Hx + t·‖P_{x⊥} A x‖` on the unit sphere of `Cⁿ`.
    pub fn with_root(h: &DMatrix<C>, a: &DMatrix<C>, t: f64) -> Self {
        Self::build(Some(h), a, None, t, true)
    }

    /// `‖P_{v⊥} A v‖²` for `v = Vx`, `V` with orthonormal columns.
    pub fn in_subspace(a: &DMatrix<C>, v: &DMatrix<C>) -> Self {
        Self::build(None, &(a * v), Some(v), 1.0, false)
    }

    fn build(h: Option<&DMatrix<C>>, b: &DMatrix<C>, e: Option<&DMatrix<C>>, t: f64, root: bool) -> Self {
        let (n, d) = b.shape();
        Self {
            h: h.map(Dense::from_matrix),
            b: Dense::from_matrix(b),
            e: e.map(Dense::from_matrix),
            t,
            root,
            scratch: RefCell::new(Scratch {
                hx: vec![C::default(); d],
                y: vec![C::default(); n],
                ex: vec![C::default(); n],
                r: vec![C::default(); n],
                br: vec![C::default(); d],
                ey: vec![C::default(); d],
            }),
        }
    }

    /// Value, and the real gradient `2∂f/∂x̄` written into `grad`.
    fn value_grad(&self, x: &[C], grad: &mut [C]) -> f64 {
        let mut s = self.scratch.borrow_mut();
        let Scratch { hx, y, ex, r, br, ey } = &mut *s;
        self.b.mul_into(x, y);
        match &self.e {
            Some(e) => e.mul_into(x, ex),
            None => ex.copy_from_slice(x),
        }
        let w = dot(ex, y);
        for i in 0..r.len() {
            r[i] = y[i] - w * ex[i];
        }
        let d = r.iter().map(|z| z.norm_sqr()).sum::<f64>();
        // ∂d/∂x̄ = B*r − conj(w)·E*y
        self.b.adjoint_mul_into(r, br);
        match &self.e {
            Some(e) => e.adjoint_mul_into(y, ey),
            None => ey.copy_from_slice(y),
        }
        let lin = match &self.h {
            Some(h) => {
                h.mul_into(x, hx);
                dot(x, hx).re
            }
            None => {
                hx.iter_mut().for_each(|z| *z = C::default());
                0.0
            }
        };
        let (term, k) = if self.root {
            let root = d.sqrt();
            // √d is not differentiable at d = 0; drop that term there
            (root, if root > 1e-150 { 0.5 / root } else { 0.0 })
        } else {
            (d, 1.0)
        };
        for i in 0..grad.len() {
            let dd = br[i] - w.conj() * ey[i];
            grad[i] = (hx[i] + dd * (self.t * k)) * 2.0;
        }
        lin + self.t * term
    }

    #[cfg(test)]
    pub fn value(&self, x: &[C]) -> f64 {
        let mut g = vec![C::default(); x.len()];
        self.value_grad(x, &mut g)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Ascent {
    pub x: Vec<C>,
    pub value: f64,
    pub converged: bool,
}

const MAX_ITER: usize = 3000;

/// Riemannian gradient ascent with Barzilai–Borwein steps and Armijo backtracking.
pub(crate) fn ascend(obj: &DefectObjective, mut x: Vec<C>, gtol: f64) -> Ascent {
    let n = x.len();
    if !normalize(&mut x) {
        x = vec![C::default(); n];
        x[0] = C::new(1.0, 0.0);
    }
    let mut grad = vec![C::default(); n];
    let mut f = obj.value_grad(&x, &mut grad);
    project(&x, &mut grad);
    let mut alpha = 0.1;
    let mut trial = vec![C::default(); n];
    let mut trial_grad = vec![C::default(); n];
    let mut converged = false;
    let mut stalls = 0;
    for _ in 0..MAX_ITER {
        let gnorm2: f64 = grad.iter().map(|z| z.norm_sqr()).sum();
        if gnorm2.sqrt() <= gtol {
            converged = true;
            break;
        }
        let mut accepted = None;
        let mut a = alpha;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] + grad[i] * a;
            }
            normalize(&mut trial);
            let ft = obj.value_grad(&trial, &mut trial_grad);
            if ft >= f + 1e-4 * a * gnorm2 || (ft >= f && a < 1e-12) {
                accepted = Some(ft);
                break;
            }
            a *= 0.5;
        }
        let Some(ft) = accepted else {
            // no ascent direction left at working precision
            converged = gnorm2.sqrt() <= gtol.sqrt();
            break;
        };
        project(&trial, &mut trial_grad);
        // BB step on the tangent differences
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            let y = trial_grad[i] - grad[i];
            ss += s.norm_sqr();
            sy += (s.conj() * y).re;
        }
        alpha = if sy < 0.0 { (ss / -sy).clamp(1e-10, 1e6) } else { (a * 4.0).min(1e6) };
        let gain = ft - f;
        x.copy_from_slice(&trial);
        grad.copy_from_slice(&trial_grad);
        f = ft;
        if gain <= 1e-16 * f.abs().max(1e-300) {
            stalls += 1;
            if stalls >= 5 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ascent { x, value: f, converged }
}

fn project(x: &[C], g: &mut [C]) {
    let r = dot(x, g).re;
    for (gi, xi) in g.iter_mut().zip(x) {
        *gi -= xi * r;
    }
}

/// Seeded complex Gaussian unit vectors.
pub(crate) fn random_starts(n: usize, count: usize, seed: u64) -> Vec<Vec<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<C> = (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C::new(re, im)
                })
                .collect();
            if !normalize(&mut v) {
                v[0] = C::new(1.0, 0.0);
            }
            v
        })
        .collect()
}

/// Best of several ascents. Ties keep the earliest start.
pub(crate) fn multi_start(obj: &DefectObjective, starts: Vec<Vec<C>>, gtol: f64) -> Ascent {
    let mut best: Option<Ascent> = None;
    for s in starts {
        let r = ascend(obj, s, gtol);
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    best.expect("at least one start")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = DMatrix::from_row_slice(3, 3, &[
            c(0.1, 0.2), c(1.0, -0.3), c(0.0, 0.5),
            c(-0.4, 0.0), c(0.3, 0.3), c(0.7, 0.0),
            c(0.2, -0.1), c(0.0, 0.0), c(-0.5, 0.4),
        ]);
        let h = (&a + a.adjoint()) * c(0.5, 0.0);
        let obj = DefectObjective::with_root(&h, &a, 0.7);
        let mut x0 = vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.6, -0.4)];
        normalize(&mut x0);
        let mut g = vec![C::default(); 3];
        let f0 = obj.value_grad(&x0, &mut g);
        project(&x0, &mut g);
        let eps = 1e-6;
        for i in 0..3 {
            for dir in [c(1.0, 0.0), c(0.0, 1.0)] {
                let mut v = vec![C::default(); 3];
                v[i] = dir;
                project(&x0, &mut v);
                let step = |s: f64| {
                    let mut y: Vec<C> = x0.iter().zip(&v).map(|(a, b)| a + b * s).collect();
                    normalize(&mut y);
                    obj.value(&y)
                };
                let fd = (step(eps) - step(-eps)) / (2.0 * eps);
                let analytic: f64 = g.iter().zip(&v).map(|(gi, vi)| (gi.conj() * vi).re).sum();
                assert!((fd - analytic).abs() < 1e-6, "i={i} fd={fd} an={analytic} f0={f0}");
            }
        }
    }

    #[test]
    fn ascent_finds_top_eigenvalue_of_hermitian_form() {
        // with t = 0 the maximum is λ_max(H)
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let zero = DMatrix::zeros(2, 2);
        let obj = DefectObjective::with_root(&h, &zero, 0.0);
        let best = multi_start(&obj, random_starts(2, 4, 7), 1e-12);
        assert!((best.value - 2.0).abs() < 1e-12);
        assert!(best.converged);
    }
}
