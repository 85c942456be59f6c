//! Smoothly bounded convex bodies described by their support functions.
//!
//! A body is stored as a truncated Fourier series
//! `h(θ) = a₀ + Σ_k (a_k cos kθ + b_k sin kθ)` of its support function
//! `h(θ) = sup_{p∈Ω} Re(p e^{-iθ})`. Derivatives are exact, so the boundary
//! point `σ(θ) = (h + i h') e^{iθ}` and the radius of curvature `h + h''`
//! come out spectrally accurate.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{cis, Tolerances};

/// Default Fourier degree of fitted bodies.
pub const DEFAULT_DEGREE: usize = 64;
/// Default number of boundary nodes.
pub const DEFAULT_NODES: usize = 512;

const CHECK_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportFn {
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Result of a least-squares support-function fit.
#[derive(Debug, Clone)]
pub struct Fit {
    pub support: SupportFn,
    pub max_residual: f64,
}

impl SupportFn {
    /// From coefficients; `cos[k-1]`, `sin[k-1]` multiply `cos kθ`, `sin kθ`.
    pub fn from_coefficients(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::input("cos and sin coefficient lists differ in length"));
        }
        if !std::iter::once(&a0).chain(&cos).chain(&sin).all(|v| v.is_finite()) {
            return Err(Error::input("support coefficients must be finite"));
        }
        Ok(Self { a0, cos, sin })
    }

    /// Disc of radius `radius` centred at `center`.
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input(format!("disk radius must be positive, got {radius}")));
        }
        Self::from_coefficients(radius, vec![center.re], vec![center.im])
    }

    /// Fits `f` sampled on a uniform grid fine enough for degree `degree`.
    pub fn from_fn(f: impl Fn(f64) -> f64, degree: usize) -> Result<Self> {
        let m = (8 * degree + 8).max(256);
        let samples: Vec<(f64, f64)> = (0..m)
            .map(|j| {
                let t = TAU * j as f64 / m as f64;
                (t, f(t))
            })
            .collect();
        Ok(fit_support_unchecked(&samples, degree)?.support)
    }

    /// Ellipse with semi-axes `a` (along the real axis) and `b`, centred at 0.
    pub fn ellipse(a: f64, b: f64, degree: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::input("ellipse semi-axes must be positive"));
        }
        Self::from_fn(|t| (a * a * t.cos().powi(2) + b * b * t.sin().powi(2)).sqrt(), degree)
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    /// `(h, h', h'')` at `θ`.
    pub fn eval_all(&self, theta: f64) -> (f64, f64, f64) {
        let (mut h, mut d1, mut d2) = (self.a0, 0.0, 0.0);
        let step = cis(theta);
        let mut rot = step;
        for (k, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kf = (k + 1) as f64;
            let (c, s) = (rot.re, rot.im);
            h += a * c + b * s;
            d1 += kf * (b * c - a * s);
            d2 -= kf * kf * (a * c + b * s);
            rot *= step;
        }
        (h, d1, d2)
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval_all(theta).0
    }

    /// `h + h''`.
    pub fn radius_of_curvature(&self, theta: f64) -> f64 {
        let (h, _, d2) = self.eval_all(theta);
        h + d2
    }

    /// Boundary point with outward normal `e^{iθ}`.
    pub fn point(&self, theta: f64) -> Complex64 {
        let (h, d1, _) = self.eval_all(theta);
        Complex64::new(h, d1) * cis(theta)
    }

    /// Steiner point `a₁ + i b₁`; always interior for bodies with interior.
    pub fn steiner_point(&self) -> Complex64 {
        match (self.cos.first(), self.sin.first()) {
            (Some(&a), Some(&b)) => Complex64::new(a, b),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Body translated by `c`.
    pub fn translated(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        if out.cos.is_empty() {
            out.cos.push(0.0);
            out.sin.push(0.0);
        }
        out.cos[0] += c.re;
        out.sin[0] += c.im;
        out
    }

    /// Body scaled by `s > 0` about the origin.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a0: self.a0 * s,
            cos: self.cos.iter().map(|v| v * s).collect(),
            sin: self.sin.iter().map(|v| v * s).collect(),
        }
    }

    /// Minkowski sum with a disc of radius `eps`. Changes the domain.
    pub fn smoothed(&self, eps: f64) -> Self {
        Self {
            a0: self.a0 + eps,
            ..self.clone()
        }
    }

    /// Smallest `h + h''` on the check grid, and where it occurs.
    fn curvature_minimum(&self) -> (f64, f64) {
        let m = CHECK_GRID.max(32 * self.degree());
        let (theta, value) = (0..m)
            .map(|j| {
                let t = TAU * j as f64 / m as f64;
                (t, self.radius_of_curvature(t))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("check grid is non-empty");
        let h = TAU / m as f64;
        let (t, v) = golden_section(|t| -self.radius_of_curvature(t), theta - h, theta + h);
        if -v < value {
            (t.rem_euclid(TAU), -v)
        } else {
            (theta, value)
        }
    }

    /// Fails with [`Error::NonSmoothBoundary`] unless `h + h'' > curvature_tol`.
    pub fn check_smooth(&self, tol: &Tolerances) -> Result<()> {
        let (theta, value) = self.curvature_minimum();
        if value > tol.curvature_tol {
            Ok(())
        } else {
            Err(Error::NonSmoothBoundary { theta, value })
        }
    }
}

/// Maximises `f` on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn is_uniform_grid(samples: &[(f64, f64)]) -> bool {
    let m = samples.len() as f64;
    let t0 = samples[0].0;
    samples
        .iter()
        .enumerate()
        .all(|(j, &(t, _))| (t - t0 - TAU * j as f64 / m).abs() <= 1e-12)
}

fn fit_support_unchecked(samples: &[(f64, f64)], degree: usize) -> Result<Fit> {
    let m = samples.len();
    if m < 2 * degree + 1 {
        return Err(Error::input(format!(
            "need at least {} samples for degree {degree}, got {m}",
            2 * degree + 1
        )));
    }
    if samples.iter().any(|(t, h)| !t.is_finite() || !h.is_finite()) {
        return Err(Error::input("support samples must be finite"));
    }
    let support = if is_uniform_grid(samples) && 2 * degree < m {
        // Discrete orthogonality makes the least-squares solution a DFT.
        let mf = m as f64;
        let a0 = samples.iter().map(|s| s.1).sum::<f64>() / mf;
        let mut cos = vec![0.0; degree];
        let mut sin = vec![0.0; degree];
        for &(t, h) in samples {
            let step = cis(t);
            let mut rot = step;
            for k in 0..degree {
                cos[k] += h * rot.re;
                sin[k] += h * rot.im;
                rot *= step;
            }
        }
        for k in 0..degree {
            cos[k] *= 2.0 / mf;
            sin[k] *= 2.0 / mf;
        }
        SupportFn { a0, cos, sin }
    } else {
        let cols = 2 * degree + 1;
        let design = DMatrix::from_fn(m, cols, |j, c| {
            let t = samples[j].0;
            match c {
                0 => 1.0,
                c if c % 2 == 1 => (((c + 1) / 2) as f64 * t).cos(),
                c => ((c / 2) as f64 * t).sin(),
            }
        });
        let rhs = DVector::from_iterator(m, samples.iter().map(|s| s.1));
        let sol = design
            .svd(true, true)
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::Consistency(format!("least-squares fit failed: {e}")))?;
        SupportFn {
            a0: sol[0],
            cos: (0..degree).map(|k| sol[2 * k + 1]).collect(),
            sin: (0..degree).map(|k| sol[2 * k + 2]).collect(),
        }
    };
    let max_residual = samples
        .iter()
        .map(|&(t, h)| (support.value(t) - h).abs())
        .fold(0.0, f64::max);
    Ok(Fit { support, max_residual })
}

/// Least-squares trigonometric fit of degree `degree` to `(θ_j, h_j)` samples.
///
/// Fails with [`Error::NonSmoothBoundary`] when the fitted body has a
/// non-positive radius of curvature somewhere, which is how corners and flat
/// facets show up after truncation.
pub fn fit_support(samples: &[(f64, f64)], degree: usize, tol: &Tolerances) -> Result<Fit> {
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.0.rem_euclid(TAU)).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] < 1e-14) || (sorted.len() > 1 && sorted[0] + TAU - sorted[sorted.len() - 1] < 1e-14) {
        return Err(Error::input("sample angles must be distinct mod 2π"));
    }
    let fit = fit_support_unchecked(samples, degree)?;
    fit.support.check_smooth(tol)?;
    Ok(fit)
}

/// [`fit_support`] starting at `degree` and doubling it, up to the largest
/// degree the samples resolve, while the fit is non-smooth.
///
/// Smooth bodies with a tight bend need more modes than the default; genuine
/// corners and facets ring at every degree and still fail.
pub fn fit_support_adaptive(samples: &[(f64, f64)], degree: usize, tol: &Tolerances) -> Result<Fit> {
    let max_degree = samples.len().saturating_sub(1) / 2;
    let mut k = degree;
    loop {
        match fit_support(samples, k, tol) {
            Err(Error::NonSmoothBoundary { .. }) if k < max_degree => k = (2 * k).min(max_degree),
            other => return other,
        }
    }
}

/// Discretised boundary on the uniform normal-angle grid `θ_k = 2πk/N`.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    support: SupportFn,
    pub thetas: Vec<f64>,
    pub points: Vec<Complex64>,
    pub normals: Vec<Complex64>,
    pub tangents: Vec<Complex64>,
    /// Arc-length weights `ρ_k·2π/N`.
    pub weights: Vec<f64>,
    pub radii: Vec<f64>,
}

/// Builds the mesh with `nodes` points. Needs at least 4 nodes.
pub fn boundary_mesh(h: &SupportFn, nodes: usize, tol: &Tolerances) -> Result<BoundaryMesh> {
    if nodes < 4 {
        return Err(Error::input(format!("mesh needs at least 4 nodes, got {nodes}")));
    }
    let dt = TAU / nodes as f64;
    let mut mesh = BoundaryMesh {
        support: h.clone(),
        thetas: Vec::with_capacity(nodes),
        points: Vec::with_capacity(nodes),
        normals: Vec::with_capacity(nodes),
        tangents: Vec::with_capacity(nodes),
        weights: Vec::with_capacity(nodes),
        radii: Vec::with_capacity(nodes),
    };
    for k in 0..nodes {
        let t = dt * k as f64;
        let (hv, d1, d2) = h.eval_all(t);
        let rho = hv + d2;
        if rho <= tol.curvature_tol {
            return Err(Error::NonSmoothBoundary { theta: t, value: rho });
        }
        let v = cis(t);
        mesh.thetas.push(t);
        mesh.points.push(Complex64::new(hv, d1) * v);
        mesh.normals.push(v);
        mesh.tangents.push(Complex64::new(0.0, 1.0) * v);
        mesh.weights.push(rho * dt);
        mesh.radii.push(rho);
    }
    Ok(mesh)
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn support(&self) -> &SupportFn {
        &self.support
    }

    /// `Σ w_k`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mean arc length between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        self.total_weight() / self.len() as f64
    }

    /// Same body with twice the nodes.
    pub fn refined(&self, tol: &Tolerances) -> Result<BoundaryMesh> {
        boundary_mesh(&self.support, 2 * self.len(), tol)
    }

    /// Distance from `z` to the boundary, negative if `z` is outside.
    pub fn interior_distance(&self, z: Complex64) -> f64 {
        self.thetas
            .iter()
            .zip(&self.normals)
            .map(|(&t, v)| self.support.value(t) - (z * v.conj()).re)
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV `theta,re,im,weight,rho`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,re,im,weight,rho")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.thetas[k], self.points[k].re, self.points[k].im, self.weights[k], self.radii[k]
            )?;
        }
        Ok(())
    }
}

/// `|∂Ω| = ∫ h dθ = 2π a₀`.
pub fn perimeter(h: &SupportFn) -> f64 {
    TAU * h.a0
}

/// Minimum of `h + h''`.
pub fn min_radius_of_curvature(h: &SupportFn, tol: &Tolerances) -> Result<f64> {
    let (theta, value) = h.curvature_minimum();
    if value <= tol.curvature_tol {
        return Err(Error::NonSmoothBoundary { theta, value });
    }
    Ok(value)
}

/// `sup_{z∈Ω} |z|`, attained on the boundary.
pub fn farthest_point_modulus(h: &SupportFn) -> f64 {
    let m = CHECK_GRID;
    let (theta, value) = (0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            (t, h.point(t).norm())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    let step = TAU / m as f64;
    let (_, refined) = golden_section(|t| h.point(t).norm(), theta - step, theta + step);
    value.max(refined)
}

/// `inner ⊆ outer`, up to `quad_tol` in the support functions.
pub fn contains(outer: &SupportFn, inner: &SupportFn, tol: &Tolerances) -> bool {
    let m = CHECK_GRID;
    (0..m).all(|j| {
        let t = TAU * j as f64 / m as f64;
        inner.value(t) <= outer.value(t) + tol.quad_tol
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: Complex64) -> bool {
        (p - self.center).norm() <= self.radius * (1.0 + 1e-14) + 1e-300
    }

    fn diameter(a: Complex64, b: Complex64) -> Self {
        let center = (a + b) * 0.5;
        Circle {
            center,
            radius: (a - center).norm().max((b - center).norm()),
        }
    }

    fn circumscribed(a: Complex64, b: Complex64, c: Complex64) -> Option<Self> {
        // relative to the bounding-box centre for accuracy
        let ox = (a.re.min(b.re).min(c.re) + a.re.max(b.re).max(c.re)) / 2.0;
        let oy = (a.im.min(b.im).min(c.im) + a.im.max(b.im).max(c.im)) / 2.0;
        let o = Complex64::new(ox, oy);
        let (a, b, c) = (a - o, b - o, c - o);
        let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
        if d == 0.0 {
            return None;
        }
        let (na, nb, nc) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr());
        let x = (na * (b.im - c.im) + nb * (c.im - a.im) + nc * (a.im - b.im)) / d;
        let y = (na * (c.re - b.re) + nb * (a.re - c.re) + nc * (b.re - a.re)) / d;
        let p = Complex64::new(x, y);
        let radius = (p - a).norm().max((p - b).norm()).max((p - c).norm());
        Some(Circle { center: p + o, radius })
    }
}

fn cross(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let (u, v) = (b - a, c - a);
    u.re * v.im - u.im * v.re
}

/// Smallest enclosing circle (Welzl's algorithm, seeded shuffle).
pub fn smallest_enclosing_circle(points: &[Complex64]) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::input("smallest enclosing circle of an empty set"));
    }
    if points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(Error::input("points must be finite"));
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let mut circle: Option<Circle> = None;
    for i in 0..pts.len() {
        if circle.is_none_or(|c| !c.contains(pts[i])) {
            circle = Some(circle_with_one(&pts[..i], pts[i]));
        }
    }
    Ok(circle.expect("non-empty input"))
}

fn circle_with_one(pts: &[Complex64], p: Complex64) -> Circle {
    let mut c = Circle { center: p, radius: 0.0 };
    for (i, &q) in pts.iter().enumerate() {
        if !c.contains(q) {
            c = if c.radius == 0.0 {
                Circle::diameter(p, q)
            } else {
                circle_with_two(&pts[..i], p, q)
            };
        }
    }
    c
}

fn circle_with_two(pts: &[Complex64], p: Complex64, q: Complex64) -> Circle {
    let circ = Circle::diameter(p, q);
    let mut left: Option<Circle> = None;
    let mut right: Option<Circle> = None;
    for &r in pts {
        if circ.contains(r) {
            continue;
        }
        let cr = cross(p, q, r);
        let Some(c) = Circle::circumscribed(p, q, r) else { continue };
        if cr > 0.0 && left.is_none_or(|l| cross(p, q, c.center) > cross(p, q, l.center)) {
            left = Some(c);
        } else if cr < 0.0 && right.is_none_or(|l| cross(p, q, c.center) < cross(p, q, l.center)) {
            right = Some(c);
        }
    }
    match (left, right) {
        (None, None) => circ,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.radius <= r.radius {
                l
            } else {
                r
            }
        }
    }
}

/// Radius of the smallest enclosing disc, i.e. `inf_λ max_k |p_k − λ|`.
pub fn chebyshev_radius(points: &[Complex64]) -> Result<f64> {
    Ok(smallest_enclosing_circle(points)?.radius)
}

/// Uniform grid `2πk/n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}
