//! Scalar and tangent-vector fields on the catalog manifolds.
//!
//! `SpectralField` stores eigenbasis coefficients: raw exponential
//! coefficients on tori (f = Σ a_k e^{ik·x}, conjugate-symmetric) and real
//! orthonormal spherical-harmonic coefficients on the sphere. Because the
//! torus convention is unnormalized, spectral norms on tori carry the
//! volume factor so that they agree with quadrature norms: on 𝕋ⁿ,
//! ‖f‖²_{L²} = vol · Σ |a_k|², while on 𝕊² the factor is 1.
//!
//! Fractional powers of the Laplace–Beltrami operator act as multipliers
//! λ_k^s on mode k, with the zero mode annihilated for s ≠ 0 (λ₀ = 0 is
//! not invertible; the velocity only ever sees Λ^{-1+α} through a
//! gradient, which kills constants anyway) and kept for s = 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::manifold::{ManifoldKind, ManifoldSpec};
use crate::sphere::{sh_degree, sh_index};
use crate::transform::{bin_to_mode, mode_to_bin, plan_for, Plan};

/// Field values on the manifold's quadrature grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalField {
    manifold: ManifoldSpec,
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(manifold: ManifoldSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != manifold.grid_len() {
            return Err(CoreError::GridMismatch {
                expected: manifold.grid_len(),
                found: values.len(),
            });
        }
        Ok(NodalField { manifold, values })
    }

    pub fn constant(manifold: ManifoldSpec, c: f64) -> Self {
        NodalField {
            values: vec![c; manifold.grid_len()],
            manifold,
        }
    }

    /// Sample a function of the grid coordinates (tori: x or (x, y); sphere:
    /// (θ, φ)).
    pub fn from_fn(manifold: ManifoldSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = manifold.grid_points().iter().map(|p| f(p[0], p[1])).collect();
        NodalField { manifold, values }
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> NodalField {
        NodalField {
            manifold: self.manifold,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Quadrature sum Σ w_i f(x_i); exact for band-limited integrands.
    pub fn integrate(&self) -> f64 {
        let w = self.manifold.quadrature_weights();
        self.values.iter().zip(&w).map(|(&v, &wi)| v * wi).sum()
    }

    /// (∫ |f|^p)^{1/p}; grid max for p = ∞. Errors for p < 1.
    pub fn norm_lp(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self
                .values
                .iter()
                .fold(0.0f64, |acc, &v| acc.max(v.abs())));
        }
        if p < 1.0 || p.is_nan() {
            return Err(CoreError::Domain(format!("L^p norm requires p >= 1, got {p}")));
        }
        let w = self.manifold.quadrature_weights();
        let sum: f64 = self
            .values
            .iter()
            .zip(&w)
            .map(|(&v, &wi)| wi * v.abs().powf(p))
            .sum();
        Ok(sum.powf(1.0 / p))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &v| a.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
    }

    /// Eigenbasis projection a_k = ⟨f, φ_k⟩ (up to the torus convention);
    /// exact inverse of `synthesize` on band-limited fields.
    pub fn analyze(&self) -> Result<SpectralField> {
        let plan = plan_for(&self.manifold);
        let coeffs = match &*plan {
            Plan::Torus1(p) => Coeffs::Complex(p.analyze(&self.values)),
            Plan::Torus2(p) => Coeffs::Complex(p.analyze(&self.values)),
            Plan::Sphere(p) => Coeffs::Real(p.analyze(&self.values)),
        };
        Ok(SpectralField {
            manifold: self.manifold,
            coeffs,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Coeffs {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
}

/// A scalar field as coefficients in the Laplace–Beltrami eigenbasis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralField {
    manifold: ManifoldSpec,
    coeffs: Coeffs,
}

impl SpectralField {
    pub fn zeros(manifold: ManifoldSpec) -> Self {
        let coeffs = match manifold.kind {
            ManifoldKind::Torus1D | ManifoldKind::Torus2D => {
                Coeffs::Complex(vec![Complex64::new(0.0, 0.0); manifold.spectral_len()])
            }
            ManifoldKind::Sphere2D => Coeffs::Real(vec![0.0; manifold.spectral_len()]),
        };
        SpectralField { manifold, coeffs }
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn band_limit(&self) -> usize {
        self.manifold.band_limit()
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    /// Torus coefficient for mode k (kx for 𝕋¹ with ky ignored).
    pub fn torus_coeff(&self, kx: i64, ky: i64) -> Complex64 {
        let n = self.manifold.resolution;
        match (&self.coeffs, self.manifold.kind) {
            (Coeffs::Complex(c), ManifoldKind::Torus1D) => c[mode_to_bin(kx, n)],
            (Coeffs::Complex(c), ManifoldKind::Torus2D) => {
                c[mode_to_bin(kx, n) * n + mode_to_bin(ky, n)]
            }
            _ => panic!("torus_coeff on a sphere field"),
        }
    }

    pub fn set_torus_coeff(&mut self, kx: i64, ky: i64, v: Complex64) {
        let n = self.manifold.resolution;
        match (&mut self.coeffs, self.manifold.kind) {
            (Coeffs::Complex(c), ManifoldKind::Torus1D) => {
                c[mode_to_bin(kx, n)] = v;
                c[mode_to_bin(-kx, n)] = v.conj();
                if kx == 0 {
                    c[0] = Complex64::new(v.re, 0.0);
                }
            }
            (Coeffs::Complex(c), ManifoldKind::Torus2D) => {
                c[mode_to_bin(kx, n) * n + mode_to_bin(ky, n)] = v;
                c[mode_to_bin(-kx, n) * n + mode_to_bin(-ky, n)] = v.conj();
                if kx == 0 && ky == 0 {
                    c[0] = Complex64::new(v.re, 0.0);
                }
            }
            _ => panic!("set_torus_coeff on a sphere field"),
        }
    }

    pub fn sphere_coeff(&self, l: usize, m: i64) -> f64 {
        match &self.coeffs {
            Coeffs::Real(c) => c[sh_index(l, m)],
            _ => panic!("sphere_coeff on a torus field"),
        }
    }

    pub fn set_sphere_coeff(&mut self, l: usize, m: i64, v: f64) {
        match &mut self.coeffs {
            Coeffs::Real(c) => c[sh_index(l, m)] = v,
            _ => panic!("set_sphere_coeff on a torus field"),
        }
    }

    /// Visit every stored mode as (flat index, λ).
    pub fn for_each_lambda(&self, mut f: impl FnMut(usize, f64)) {
        let n = self.manifold.resolution;
        match self.manifold.kind {
            ManifoldKind::Torus1D => {
                for i in 0..n {
                    f(i, bin_to_mode(i, n).abs() as f64);
                }
            }
            ManifoldKind::Torus2D => {
                for ix in 0..n {
                    let kx = bin_to_mode(ix, n) as f64;
                    for iy in 0..n {
                        let ky = bin_to_mode(iy, n) as f64;
                        f(ix * n + iy, (kx * kx + ky * ky).sqrt());
                    }
                }
            }
            ManifoldKind::Sphere2D => {
                let len = self.manifold.spectral_len();
                for i in 0..len {
                    let l = sh_degree(i) as f64;
                    f(i, (l * (l + 1.0)).sqrt());
                }
            }
        }
    }

    fn map_multiplier(&self, mult: impl Fn(f64) -> f64) -> SpectralField {
        let mut out = self.clone();
        match &mut out.coeffs {
            Coeffs::Complex(c) => {
                let n = self.manifold.resolution;
                match self.manifold.kind {
                    ManifoldKind::Torus1D => {
                        for (i, v) in c.iter_mut().enumerate() {
                            *v *= mult(bin_to_mode(i, n).abs() as f64);
                        }
                    }
                    ManifoldKind::Torus2D => {
                        for ix in 0..n {
                            let kx = bin_to_mode(ix, n) as f64;
                            for iy in 0..n {
                                let ky = bin_to_mode(iy, n) as f64;
                                c[ix * n + iy] *= mult((kx * kx + ky * ky).sqrt());
                            }
                        }
                    }
                    ManifoldKind::Sphere2D => unreachable!(),
                }
            }
            Coeffs::Real(c) => {
                for (i, v) in c.iter_mut().enumerate() {
                    let l = sh_degree(i) as f64;
                    *v *= mult((l * (l + 1.0)).sqrt());
                }
            }
        }
        out
    }

    /// Λ_g^s: multiplier λ_k^s. The zero mode is annihilated for s ≠ 0 and
    /// kept for s = 0 (Λ⁰ = Id).
    pub fn fractional_laplacian(&self, s: f64) -> SpectralField {
        if s == 0.0 {
            return self.clone();
        }
        self.map_multiplier(|lam| if lam == 0.0 { 0.0 } else { lam.powf(s) })
    }

    /// Heat-semigroup mollifier J_ε = e^{εΔ}: multiplier e^{-ε λ²}.
    pub fn mollify(&self, eps: f64) -> Result<SpectralField> {
        if eps < 0.0 {
            return Err(CoreError::Domain(format!(
                "mollifier width must be nonnegative, got {eps}"
            )));
        }
        if eps == 0.0 {
            return Ok(self.clone());
        }
        Ok(self.map_multiplier(|lam| (-eps * lam * lam).exp()))
    }

    /// Mean value of the field (carried by the zero mode).
    pub fn mean(&self) -> f64 {
        match &self.coeffs {
            Coeffs::Complex(c) => c[0].re,
            Coeffs::Real(c) => c[0] / self.manifold.volume().sqrt(),
        }
    }

    fn norm_factor(&self) -> f64 {
        match self.manifold.kind {
            ManifoldKind::Torus1D | ManifoldKind::Torus2D => self.manifold.volume(),
            ManifoldKind::Sphere2D => 1.0,
        }
    }

    /// L² norm by Parseval (includes the mean).
    pub fn norm_l2(&self) -> f64 {
        let mut acc = 0.0;
        match &self.coeffs {
            Coeffs::Complex(c) => {
                for v in c {
                    acc += v.norm_sqr();
                }
            }
            Coeffs::Real(c) => {
                for v in c {
                    acc += v * v;
                }
            }
        }
        (self.norm_factor() * acc).sqrt()
    }

    /// Homogeneous Sobolev norm (Σ_{k≥1} λ_k^{2s} |a_k|²)^{1/2}; the zero
    /// mode is excluded.
    pub fn norm_sobolev(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        match &self.coeffs {
            Coeffs::Complex(c) => {
                self.for_each_lambda(|i, lam| {
                    if lam > 0.0 {
                        acc += lam.powf(2.0 * s) * c[i].norm_sqr();
                    }
                });
            }
            Coeffs::Real(c) => {
                self.for_each_lambda(|i, lam| {
                    if lam > 0.0 {
                        acc += lam.powf(2.0 * s) * c[i] * c[i];
                    }
                });
            }
        }
        (self.norm_factor() * acc).sqrt()
    }

    /// Full Sobolev norm √(‖f‖²_{L²} + ‖f‖²_{Ḣˢ}).
    pub fn norm_hs_full(&self, s: f64) -> f64 {
        let l2 = self.norm_l2();
        let hs = self.norm_sobolev(s);
        (l2 * l2 + hs * hs).sqrt()
    }

    /// Fraction of homogeneous spectral energy carried by modes above
    /// `cut_ratio` of the band limit (2/3 for the classical de-aliasing cut).
    pub fn tail_energy_fraction(&self, cut_ratio: f64) -> f64 {
        let cut = cut_ratio * self.manifold.band_limit() as f64;
        let mut total = 0.0;
        let mut tail = 0.0;
        let energy: Box<dyn Fn(usize) -> f64> = match &self.coeffs {
            Coeffs::Complex(c) => Box::new(move |i| c[i].norm_sqr()),
            Coeffs::Real(c) => Box::new(move |i| c[i] * c[i]),
        };
        let n = self.manifold.resolution;
        match self.manifold.kind {
            ManifoldKind::Torus1D => {
                for i in 0..n {
                    let k = bin_to_mode(i, n).abs() as f64;
                    if k == 0.0 {
                        continue;
                    }
                    let e = energy(i);
                    total += e;
                    if k > cut {
                        tail += e;
                    }
                }
            }
            ManifoldKind::Torus2D => {
                for ix in 0..n {
                    let kx = bin_to_mode(ix, n).abs() as f64;
                    for iy in 0..n {
                        let ky = bin_to_mode(iy, n).abs() as f64;
                        if kx == 0.0 && ky == 0.0 {
                            continue;
                        }
                        let e = energy(ix * n + iy);
                        total += e;
                        if kx.max(ky) > cut {
                            tail += e;
                        }
                    }
                }
            }
            ManifoldKind::Sphere2D => {
                for i in 1..self.manifold.spectral_len() {
                    let l = sh_degree(i) as f64;
                    let e = energy(i);
                    total += e;
                    if l > cut {
                        tail += e;
                    }
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Pointwise values Σ a_k φ_k at the manifold's grid nodes.
    pub fn synthesize(&self) -> NodalField {
        let plan = plan_for(&self.manifold);
        let values = match (&*plan, &self.coeffs) {
            (Plan::Torus1(p), Coeffs::Complex(c)) => p.synthesize(c),
            (Plan::Torus2(p), Coeffs::Complex(c)) => p.synthesize(c),
            (Plan::Sphere(p), Coeffs::Real(c)) => p.synthesize(c),
            _ => unreachable!("coefficient storage does not match manifold"),
        };
        NodalField {
            manifold: self.manifold,
            values,
        }
    }

    /// Same coefficients re-expanded on the grid of `resolution` (pad with
    /// zeros or drop modes). Used for oversampled suprema and de-aliasing.
    pub fn synthesize_on(&self, resolution: usize) -> Result<NodalField> {
        Ok(self.resample(resolution)?.synthesize())
    }

    /// Copy of the field at a different resolution: modes above the target
    /// band are dropped, new modes are zero.
    pub fn resample(&self, resolution: usize) -> Result<SpectralField> {
        if resolution == self.manifold.resolution {
            return Ok(self.clone());
        }
        let target = ManifoldSpec::new(self.manifold.kind, resolution)?;
        let mut out = SpectralField::zeros(target);
        match (&self.coeffs, &mut out.coeffs) {
            (Coeffs::Complex(src), Coeffs::Complex(dst)) => {
                let n_src = self.manifold.resolution;
                let n_dst = resolution;
                let band = self.manifold.band_limit().min(target.band_limit()) as i64;
                match self.manifold.kind {
                    ManifoldKind::Torus1D => {
                        for k in -band..=band {
                            dst[mode_to_bin(k, n_dst)] = src[mode_to_bin(k, n_src)];
                        }
                    }
                    ManifoldKind::Torus2D => {
                        for kx in -band..=band {
                            for ky in -band..=band {
                                dst[mode_to_bin(kx, n_dst) * n_dst + mode_to_bin(ky, n_dst)] =
                                    src[mode_to_bin(kx, n_src) * n_src + mode_to_bin(ky, n_src)];
                            }
                        }
                    }
                    ManifoldKind::Sphere2D => unreachable!(),
                }
            }
            (Coeffs::Real(src), Coeffs::Real(dst)) => {
                let l_copy = self.manifold.resolution.min(resolution);
                let n = (l_copy + 1) * (l_copy + 1);
                dst[..n].copy_from_slice(&src[..n]);
            }
            _ => unreachable!(),
        }
        Ok(out)
    }

    /// Max |f| over a 2× oversampled synthesis grid; a plain grid max
    /// systematically underestimates the supremum.
    pub fn sup_oversampled(&self) -> f64 {
        let (lo, hi) = self.minmax_oversampled();
        lo.abs().max(hi.abs())
    }

    pub fn minmax_oversampled(&self) -> (f64, f64) {
        let f = self
            .synthesize_on(self.oversampled_resolution())
            .expect("oversampled grid");
        (f.min_value(), f.max_value())
    }

    pub fn oversampled_resolution(&self) -> usize {
        2 * self.manifold.resolution
    }

    /// Grid resolution for exact de-aliasing of quadratic products.
    pub fn dealias_resolution(&self) -> usize {
        match self.manifold.kind {
            ManifoldKind::Torus1D | ManifoldKind::Torus2D => {
                let m = 3 * self.manifold.resolution / 2;
                m + m % 2
            }
            // products of gradients of degree-L fields live at degree ≤ 2L+2;
            // projecting back onto degree ≤ L needs quadrature exact at 3L+2
            ManifoldKind::Sphere2D => 3 * self.manifold.resolution / 2 + 2,
        }
    }

    /// Surface gradient in the chart/orthonormal frame on the manifold grid.
    pub fn gradient(&self) -> NodalVectorField {
        self.gradient_on(self.manifold.resolution)
            .expect("gradient on own grid")
    }

    /// Gradient synthesized on the grid of `resolution`.
    pub fn gradient_on(&self, resolution: usize) -> Result<NodalVectorField> {
        let field = self.resample(resolution)?;
        let plan = plan_for(&field.manifold);
        let components = match (&*plan, &field.coeffs) {
            (Plan::Torus1(p), Coeffs::Complex(c)) => {
                let d = derivative_coeffs_1d(c, field.manifold.resolution);
                vec![p.synthesize(&d)]
            }
            (Plan::Torus2(p), Coeffs::Complex(c)) => {
                let n = field.manifold.resolution;
                let (dx, dy) = derivative_coeffs_2d(c, n);
                vec![p.synthesize(&dx), p.synthesize(&dy)]
            }
            (Plan::Sphere(p), Coeffs::Real(c)) => {
                let (gt, gp) = p.synthesize_gradient(c);
                vec![gt, gp]
            }
            _ => unreachable!(),
        };
        Ok(NodalVectorField {
            manifold: field.manifold,
            components,
        })
    }

    /// Direct point evaluation (slow; oracle support). Points are (x, ·) on
    /// 𝕋¹, (x, y) on 𝕋², (θ, φ) on 𝕊².
    pub fn eval_at(&self, points: &[[f64; 2]]) -> Vec<f64> {
        match (&self.coeffs, self.manifold.kind) {
            (Coeffs::Complex(c), ManifoldKind::Torus1D) => {
                let n = self.manifold.resolution;
                points
                    .iter()
                    .map(|p| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (i, a) in c.iter().enumerate() {
                            let k = bin_to_mode(i, n) as f64;
                            acc += a * Complex64::from_polar(1.0, k * p[0]);
                        }
                        acc.re
                    })
                    .collect()
            }
            (Coeffs::Complex(c), ManifoldKind::Torus2D) => {
                let n = self.manifold.resolution;
                points
                    .iter()
                    .map(|p| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for ix in 0..n {
                            let kx = bin_to_mode(ix, n) as f64;
                            for iy in 0..n {
                                let ky = bin_to_mode(iy, n) as f64;
                                let a = c[ix * n + iy];
                                if a.norm_sqr() == 0.0 {
                                    continue;
                                }
                                acc += a * Complex64::from_polar(1.0, kx * p[0] + ky * p[1]);
                            }
                        }
                        acc.re
                    })
                    .collect()
            }
            (Coeffs::Real(c), ManifoldKind::Sphere2D) => {
                let plan = plan_for(&self.manifold);
                let Plan::Sphere(p) = &*plan else { unreachable!() };
                points.iter().map(|q| p.eval_at(c, q[0], q[1])).collect()
            }
            _ => unreachable!(),
        }
    }

    pub fn scale(&mut self, a: f64) {
        match &mut self.coeffs {
            Coeffs::Complex(c) => c.iter_mut().for_each(|v| *v *= a),
            Coeffs::Real(c) => c.iter_mut().for_each(|v| *v *= a),
        }
    }

    /// self += a · other (same manifold).
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.manifold, other.manifold, "axpy across manifolds");
        match (&mut self.coeffs, &other.coeffs) {
            (Coeffs::Complex(x), Coeffs::Complex(y)) => {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += a * v;
                }
            }
            (Coeffs::Real(x), Coeffs::Real(y)) => {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += a * v;
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.coeffs {
            Coeffs::Complex(c) => c.iter().all(|v| v.re.is_finite() && v.im.is_finite()),
            Coeffs::Real(c) => c.iter().all(|v| v.is_finite()),
        }
    }
}

/// Tangent-vector field: per-node components in the chart frame (∂_x on
/// tori) or the orthonormal spherical frame (e_θ, e_φ).
#[derive(Debug, Clone)]
pub struct NodalVectorField {
    manifold: ManifoldSpec,
    components: Vec<Vec<f64>>,
}

impl NodalVectorField {
    pub fn new(manifold: ManifoldSpec, components: Vec<Vec<f64>>) -> Result<Self> {
        let want = match manifold.kind {
            ManifoldKind::Torus1D => 1,
            _ => 2,
        };
        if components.len() != want {
            return Err(CoreError::Domain(format!(
                "expected {want} components, got {}",
                components.len()
            )));
        }
        for c in &components {
            if c.len() != manifold.grid_len() {
                return Err(CoreError::GridMismatch {
                    expected: manifold.grid_len(),
                    found: c.len(),
                });
            }
        }
        Ok(NodalVectorField { manifold, components })
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Pointwise metric norm (Euclidean in the stored frames).
    pub fn pointwise_norm(&self) -> NodalField {
        let mut vals = vec![0.0; self.manifold.grid_len()];
        for comp in &self.components {
            for (v, c) in vals.iter_mut().zip(comp) {
                *v += c * c;
            }
        }
        for v in vals.iter_mut() {
            *v = v.sqrt();
        }
        NodalField {
            manifold: self.manifold,
            values: vals,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.pointwise_norm().max_value()
    }

    /// Pointwise dot product with another vector field on the same grid.
    pub fn dot(&self, other: &NodalVectorField) -> Result<NodalField> {
        if self.manifold != other.manifold {
            return Err(CoreError::ManifoldMismatch(
                "dot product across different grids".into(),
            ));
        }
        let mut vals = vec![0.0; self.manifold.grid_len()];
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((v, &x), &y) in vals.iter_mut().zip(a).zip(b) {
                *v += x * y;
            }
        }
        Ok(NodalField {
            manifold: self.manifold,
            values: vals,
        })
    }

    /// div_g X as a spectral field. On tori this is spectral differentiation
    /// of the components; on the sphere the weak form −⟨X, ∇φ_k⟩, which is
    /// exact for band-limited X on a sufficiently fine grid.
    pub fn divergence(&self) -> Result<SpectralField> {
        let plan = plan_for(&self.manifold);
        let coeffs = match &*plan {
            Plan::Torus1(p) => {
                let c = p.analyze(&self.components[0]);
                Coeffs::Complex(derivative_coeffs_1d(&c, self.manifold.resolution))
            }
            Plan::Torus2(p) => {
                let n = self.manifold.resolution;
                let cx = p.analyze(&self.components[0]);
                let cy = p.analyze(&self.components[1]);
                let (dx, _) = derivative_coeffs_2d(&cx, n);
                let (_, dy) = derivative_coeffs_2d(&cy, n);
                let sum: Vec<Complex64> = dx.iter().zip(&dy).map(|(a, b)| a + b).collect();
                Coeffs::Complex(sum)
            }
            Plan::Sphere(p) => {
                Coeffs::Real(p.weak_divergence(&self.components[0], &self.components[1]))
            }
        };
        Ok(SpectralField {
            manifold: self.manifold,
            coeffs,
        })
    }
}

fn derivative_coeffs_1d(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, v) in c.iter().enumerate() {
        let k = bin_to_mode(i, n) as f64;
        out[i] = Complex64::new(0.0, k) * v;
    }
    out
}

fn derivative_coeffs_2d(c: &[Complex64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut dx = vec![Complex64::new(0.0, 0.0); n * n];
    let mut dy = vec![Complex64::new(0.0, 0.0); n * n];
    for ix in 0..n {
        let kx = bin_to_mode(ix, n) as f64;
        for iy in 0..n {
            let ky = bin_to_mode(iy, n) as f64;
            let v = c[ix * n + iy];
            dx[ix * n + iy] = Complex64::new(0.0, kx) * v;
            dy[ix * n + iy] = Complex64::new(0.0, ky) * v;
        }
    }
    (dx, dy)
}

/// u · ∇θ with the quadratic product formed in nodal space. With `dealias`
/// the product is zero-padded to the 3/2 grid before analysis, which is
/// exact for the quadratic nonlinearity.
pub fn advect(u_source: &SpectralField, theta: &SpectralField, dealias: bool) -> Result<SpectralField> {
    if u_source.manifold() != theta.manifold() {
        return Err(CoreError::ManifoldMismatch("advect across manifolds".into()));
    }
    let res = if dealias {
        theta.dealias_resolution()
    } else {
        theta.manifold.resolution
    };
    let u = u_source.gradient_on(res)?;
    let g = theta.gradient_on(res)?;
    let product = u.dot(&g)?;
    let fine = product.analyze()?;
    fine.resample(theta.manifold.resolution)
}
