//! Spherical harmonic transform on a Gauss–Legendre × equispaced grid.
//!
//! Analysis is FFT in longitude followed by Gauss–Legendre quadrature
//! against normalized associated Legendre functions in latitude; synthesis
//! is the transpose. With L+1 latitude nodes and 2L+2 longitudes the pair
//! is exact (to rounding) for fields band-limited at degree L: the GL rule
//! integrates the latitude factor of Y_ℓm Y_ℓ'm' up to degree 2L+1 and the
//! longitude trapezoid resolves |m − m'| ≤ 2L.
//!
//! Coefficients are real, indexed ℓ² + (m + ℓ), in the orthonormal real
//! convention of the `legendre` module.
//!
//! The plan also exposes the surface-gradient synthesis in the orthonormal
//! frame (e_θ, e_φ) and its adjoint, a weak-form divergence
//! b_ℓm = −∫ X·∇Y_ℓm, exact for band-limited vector fields on a grid
//! sized for the integrand degree.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::legendre::{gauss_legendre, AssocLegendreTable};

pub(crate) struct SpherePlan {
    pub l_max: usize,
    pub n_lat: usize,
    pub n_lon: usize,
    /// x_i = cos θ_i, descending (north to south)
    #[cfg_attr(not(test), allow(dead_code))]
    pub nodes: Vec<f64>,
    pub gl_weights: Vec<f64>,
    pub sin_theta: Vec<f64>,
    table: AssocLegendreTable,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl SpherePlan {
    pub fn new(l_max: usize) -> Self {
        let n_lat = l_max + 1;
        let n_lon = 2 * l_max + 2;
        let (nodes, gl_weights) = gauss_legendre(n_lat);
        let sin_theta: Vec<f64> = nodes.iter().map(|&x| (1.0 - x * x).max(0.0).sqrt()).collect();
        let table = AssocLegendreTable::new(l_max, &nodes);
        let mut planner = FftPlanner::new();
        SpherePlan {
            l_max,
            n_lat,
            n_lon,
            nodes,
            gl_weights,
            sin_theta,
            table,
            fft_fwd: planner.plan_fft(n_lon, FftDirection::Forward),
            fft_inv: planner.plan_fft(n_lon, FftDirection::Inverse),
        }
    }

    pub fn n_coeffs(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    /// Longitude FFT of every latitude row: returns F_m(i) for m = 0..=l_max,
    /// F_m(i) = (1/n_lon) Σ_j f(i, j) e^{-i m φ_j}.
    fn longitude_modes(&self, values: &[f64]) -> Vec<Complex64> {
        let (n_lat, n_lon) = (self.n_lat, self.n_lon);
        let mut out = vec![Complex64::new(0.0, 0.0); n_lat * (self.l_max + 1)];
        let mut row = vec![Complex64::new(0.0, 0.0); n_lon];
        for i in 0..n_lat {
            for j in 0..n_lon {
                row[j] = Complex64::new(values[i * n_lon + j], 0.0);
            }
            self.fft_fwd.process(&mut row);
            let scale = 1.0 / n_lon as f64;
            for m in 0..=self.l_max {
                out[i * (self.l_max + 1) + m] = row[m] * scale;
            }
        }
        out
    }

    /// Nodal values (row-major latitude × longitude) → real SH coefficients.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let lp1 = self.l_max + 1;
        let modes = self.longitude_modes(values);
        let mut coeffs = vec![0.0; self.n_coeffs()];
        let sqrt2 = std::f64::consts::SQRT_2;
        for m in 0..=self.l_max {
            for l in m..=self.l_max {
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for i in 0..self.n_lat {
                    let p = self.table.value(i, l, m) * self.gl_weights[i];
                    let f = modes[i * lp1 + m];
                    acc_re += p * f.re;
                    acc_im += p * f.im;
                }
                if m == 0 {
                    coeffs[sh_index(l, 0)] = 2.0 * PI * acc_re;
                } else {
                    coeffs[sh_index(l, m as i64)] = sqrt2 * 2.0 * PI * acc_re;
                    coeffs[sh_index(l, -(m as i64))] = -sqrt2 * 2.0 * PI * acc_im;
                }
            }
        }
        coeffs
    }

    /// Real SH coefficients → nodal values.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synthesize_rows(coeffs, SynthKind::Value)
    }

    /// Surface gradient in the orthonormal frame: (e_θ component, e_φ component).
    pub fn synthesize_gradient(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g_theta = self.synthesize_rows(coeffs, SynthKind::DTheta);
        let g_phi = self.synthesize_rows(coeffs, SynthKind::DPhiOverSin);
        (g_theta, g_phi)
    }

    /// Weak-form divergence: b_ℓm = −∫ (X_θ ∂_θ Y_ℓm + X_φ (1/sinθ) ∂_φ Y_ℓm).
    pub fn weak_divergence(&self, x_theta: &[f64], x_phi: &[f64]) -> Vec<f64> {
        let lp1 = self.l_max + 1;
        let mt = self.longitude_modes(x_theta);
        let mp = self.longitude_modes(x_phi);
        let mut coeffs = vec![0.0; self.n_coeffs()];
        let sqrt2 = std::f64::consts::SQRT_2;
        for m in 0..=self.l_max {
            let mf = m as f64;
            for l in m..=self.l_max {
                let mut c_re = 0.0; // against ∂θ of the cos-type harmonic
                let mut c_im = 0.0;
                let mut s_re = 0.0; // the (m/sinθ) P̄ pieces
                let mut s_im = 0.0;
                for i in 0..self.n_lat {
                    let w = self.gl_weights[i];
                    let dp = self.table.dtheta(i, l, m) * w;
                    let ft = mt[i * lp1 + m];
                    c_re += dp * ft.re;
                    c_im += dp * ft.im;
                    if m > 0 {
                        let q = mf / self.sin_theta[i] * self.table.value(i, l, m) * w;
                        let fp = mp[i * lp1 + m];
                        s_re += q * fp.re;
                        s_im += q * fp.im;
                    }
                }
                if m == 0 {
                    coeffs[sh_index(l, 0)] = -2.0 * PI * c_re;
                } else {
                    // cos-type: ∇Y = √2 dP̄ cos mφ e_θ − √2 (m/sinθ) P̄ sin mφ e_φ
                    coeffs[sh_index(l, m as i64)] =
                        -(sqrt2 * 2.0 * PI) * (c_re + s_im);
                    // sin-type: ∇Y = √2 dP̄ sin mφ e_θ + √2 (m/sinθ) P̄ cos mφ e_φ
                    coeffs[sh_index(l, -(m as i64))] =
                        -(sqrt2 * 2.0 * PI) * (-c_im + s_re);
                }
            }
        }
        coeffs
    }

    fn synthesize_rows(&self, coeffs: &[f64], kind: SynthKind) -> Vec<f64> {
        let n_lon = self.n_lon;
        let sqrt2_half = std::f64::consts::SQRT_2 * 0.5;
        let mut out = vec![0.0; self.n_lat * n_lon];
        let mut row = vec![Complex64::new(0.0, 0.0); n_lon];
        for i in 0..self.n_lat {
            for c in row.iter_mut() {
                *c = Complex64::new(0.0, 0.0);
            }
            for m in 0..=self.l_max {
                let mut g = 0.0; // Σ_l a_{l, m} basis
                let mut h = 0.0; // Σ_l a_{l,-m} basis
                match kind {
                    SynthKind::Value | SynthKind::DPhiOverSin => {
                        for l in m..=self.l_max {
                            let p = self.table.value(i, l, m);
                            g += coeffs[sh_index(l, m as i64)] * p;
                            if m > 0 {
                                h += coeffs[sh_index(l, -(m as i64))] * p;
                            }
                        }
                    }
                    SynthKind::DTheta => {
                        for l in m..=self.l_max {
                            let dp = self.table.dtheta(i, l, m);
                            g += coeffs[sh_index(l, m as i64)] * dp;
                            if m > 0 {
                                h += coeffs[sh_index(l, -(m as i64))] * dp;
                            }
                        }
                    }
                }
                match kind {
                    SynthKind::Value | SynthKind::DTheta => {
                        if m == 0 {
                            row[0] += Complex64::new(g, 0.0);
                        } else {
                            row[m] += Complex64::new(sqrt2_half * g, -sqrt2_half * h);
                        }
                    }
                    SynthKind::DPhiOverSin => {
                        if m > 0 {
                            let mf = m as f64 / self.sin_theta[i];
                            // derivative swaps cos/sin: coefficient of cos is m·h, of sin is −m·g
                            row[m] += Complex64::new(sqrt2_half * mf * h, sqrt2_half * mf * g);
                        }
                    }
                }
            }
            // hermitian completion, then inverse FFT (unnormalized)
            for m in 1..=self.l_max {
                row[n_lon - m] = row[m].conj();
            }
            self.fft_inv.process(&mut row);
            for j in 0..n_lon {
                out[i * n_lon + j] = row[j].re;
            }
        }
        out
    }

    /// Direct point evaluation Σ a_ℓm Y_ℓm(θ, φ); slow path for oracles.
    pub fn eval_at(&self, coeffs: &[f64], theta: f64, phi: f64) -> f64 {
        let t = AssocLegendreTable::new(self.l_max, &[theta.cos()]);
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut acc = 0.0;
        for l in 0..=self.l_max {
            acc += coeffs[sh_index(l, 0)] * t.value(0, l, 0);
            for m in 1..=l {
                let p = t.value(0, l, m);
                acc += coeffs[sh_index(l, m as i64)] * sqrt2 * p * (m as f64 * phi).cos();
                acc += coeffs[sh_index(l, -(m as i64))] * sqrt2 * p * (m as f64 * phi).sin();
            }
        }
        acc
    }
}

#[derive(Clone, Copy)]
enum SynthKind {
    Value,
    DTheta,
    DPhiOverSin,
}

/// Flat index of the real harmonic (ℓ, m), m ∈ [-ℓ, ℓ]: ℓ² + (m + ℓ).
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    l * l + (m + l as i64) as usize
}

/// Degree of the flat index: ℓ = ⌊√idx⌋.
#[inline]
pub fn sh_degree(idx: usize) -> usize {
    let mut l = (idx as f64).sqrt() as usize;
    while (l + 1) * (l + 1) <= idx {
        l += 1;
    }
    while l * l > idx {
        l -= 1;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sh_index_roundtrip() {
        for l in 0..12usize {
            for m in -(l as i64)..=(l as i64) {
                let idx = sh_index(l, m);
                assert_eq!(sh_degree(idx), l);
            }
        }
    }

    #[test]
    fn y10_synthesis_matches_closed_form() {
        let plan = SpherePlan::new(8);
        let mut coeffs = vec![0.0; plan.n_coeffs()];
        coeffs[sh_index(1, 0)] = 1.0;
        let vals = plan.synthesize(&coeffs);
        for i in 0..plan.n_lat {
            let expect = (3.0 / (4.0 * PI)).sqrt() * plan.nodes[i];
            for j in 0..plan.n_lon {
                assert!((vals[i * plan.n_lon + j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analyze_synthesize_roundtrip() {
        let plan = SpherePlan::new(10);
        let mut coeffs = vec![0.0; plan.n_coeffs()];
        // fill with a deterministic pattern
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5;
        }
        let vals = plan.synthesize(&coeffs);
        let back = plan.analyze(&vals);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn orthonormality_via_quadrature() {
        let plan = SpherePlan::new(6);
        // analyze(Y_lm) should give a unit vector
        for l in 0..=3usize {
            for m in -(l as i64)..=(l as i64) {
                let mut coeffs = vec![0.0; plan.n_coeffs()];
                coeffs[sh_index(l, m)] = 1.0;
                let vals = plan.synthesize(&coeffs);
                let back = plan.analyze(&vals);
                for (idx, &v) in back.iter().enumerate() {
                    let expect = if idx == sh_index(l, m) { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let plan = SpherePlan::new(12);
        let mut coeffs = vec![0.0; plan.n_coeffs()];
        coeffs[sh_index(2, 1)] = 0.8;
        coeffs[sh_index(3, -2)] = -0.4;
        coeffs[sh_index(5, 0)] = 0.3;
        let (gt, gp) = plan.synthesize_gradient(&coeffs);
        let h = 1e-5;
        for i in [1usize, plan.n_lat / 2, plan.n_lat - 2] {
            let theta = plan.nodes[i].acos();
            for j in [0usize, 3, plan.n_lon / 2] {
                let phi = 2.0 * PI * j as f64 / plan.n_lon as f64;
                let fd_t = (plan.eval_at(&coeffs, theta + h, phi)
                    - plan.eval_at(&coeffs, theta - h, phi))
                    / (2.0 * h);
                let fd_p = (plan.eval_at(&coeffs, theta, phi + h)
                    - plan.eval_at(&coeffs, theta, phi - h))
                    / (2.0 * h * theta.sin());
                assert!(
                    (gt[i * plan.n_lon + j] - fd_t).abs() < 1e-6,
                    "theta comp at ({i},{j})"
                );
                assert!(
                    (gp[i * plan.n_lon + j] - fd_p).abs() < 1e-6,
                    "phi comp at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn weak_divergence_of_gradient_is_minus_laplacian() {
        let plan = SpherePlan::new(10);
        let mut coeffs = vec![0.0; plan.n_coeffs()];
        coeffs[sh_index(1, 1)] = 0.5;
        coeffs[sh_index(4, -3)] = 0.25;
        coeffs[sh_index(2, 0)] = -0.75;
        let (gt, gp) = plan.synthesize_gradient(&coeffs);
        let div = plan.weak_divergence(&gt, &gp);
        for l in 0..=plan.l_max {
            let lam2 = (l * (l + 1)) as f64;
            for m in -(l as i64)..=(l as i64) {
                let idx = sh_index(l, m);
                let expect = -lam2 * coeffs[idx];
                assert!(
                    (div[idx] - expect).abs() < 1e-10,
                    "l={l} m={m}: {} vs {expect}",
                    div[idx]
                );
            }
        }
    }
}
