//! Transform plans: nodal ↔ spectral maps for each catalog manifold.
//!
//! Plans hold the precomputed pieces (FFT twiddles, Legendre tables,
//! quadrature weights) and are cached globally behind an `Arc`, keyed by
//! (kind, resolution). All plan methods are pure with respect to the plan
//! and deterministic for fixed input, so sharing across threads is safe.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::manifold::{ManifoldKind, ManifoldSpec};
use crate::sphere::SpherePlan;

pub(crate) enum Plan {
    Torus1(Torus1Plan),
    Torus2(Torus2Plan),
    Sphere(SpherePlan),
}

type PlanCache = Mutex<HashMap<(ManifoldKind, usize), Arc<Plan>>>;

static PLAN_CACHE: OnceLock<PlanCache> = OnceLock::new();

pub(crate) fn plan_for(m: &ManifoldSpec) -> Arc<Plan> {
    let cache = PLAN_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (m.kind, m.resolution);
    let mut guard = cache.lock().expect("plan cache poisoned");
    if let Some(p) = guard.get(&key) {
        return Arc::clone(p);
    }
    let plan = Arc::new(match m.kind {
        ManifoldKind::Torus1D => Plan::Torus1(Torus1Plan::new(m.resolution)),
        ManifoldKind::Torus2D => Plan::Torus2(Torus2Plan::new(m.resolution)),
        ManifoldKind::Sphere2D => Plan::Sphere(SpherePlan::new(m.resolution)),
    });
    guard.insert(key, Arc::clone(&plan));
    plan
}

/// Mode number of FFT bin `i` on an N-point circle: 0, 1, ..., N/2, -N/2+1, ..., -1.
#[inline]
pub(crate) fn bin_to_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
pub(crate) fn mode_to_bin(k: i64, n: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (k + n as i64) as usize
    }
}

pub(crate) struct Torus1Plan {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Torus1Plan {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Torus1Plan {
            n,
            fwd: planner.plan_fft(n, FftDirection::Forward),
            inv: planner.plan_fft(n, FftDirection::Inverse),
        }
    }

    /// Nodal values → raw exponential coefficients a_k with f = Σ a_k e^{ikx}.
    /// Modes above the band limit (including Nyquist) are zeroed and conjugate
    /// symmetry is enforced exactly.
    pub fn analyze(&self, values: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        let band = n / 2 - 1;
        for (i, c) in buf.iter_mut().enumerate() {
            if bin_to_mode(i, n).unsigned_abs() as usize > band {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        symmetrize_1d(&mut buf, n);
        buf
    }

    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inv.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

fn symmetrize_1d(buf: &mut [Complex64], n: usize) {
    buf[0] = Complex64::new(buf[0].re, 0.0);
    for k in 1..=(n / 2 - 1) {
        let a = buf[k];
        let b = buf[n - k];
        let half = 0.5 * (a + b.conj());
        buf[k] = half;
        buf[n - k] = half.conj();
    }
    buf[n / 2] = Complex64::new(0.0, 0.0);
}

pub(crate) struct Torus2Plan {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Torus2Plan {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Torus2Plan {
            n,
            fwd: planner.plan_fft(n, FftDirection::Forward),
            inv: planner.plan_fft(n, FftDirection::Inverse),
        }
    }

    /// Row-major layout: index = ix * n + iy, coefficients likewise
    /// (kx bin-major). f = Σ a_{kx,ky} e^{i(kx x + ky y)}.
    pub fn analyze(&self, values: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        // rows (y direction), then columns (x direction)
        for row in buf.chunks_exact_mut(n) {
            self.fwd.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = buf[i * n + j];
            }
            self.fwd.process(&mut col);
            for i in 0..n {
                buf[i * n + j] = col[i];
            }
        }
        let scale = 1.0 / (n * n) as f64;
        let band = n / 2 - 1;
        for i in 0..n {
            let kx = bin_to_mode(i, n);
            for j in 0..n {
                let ky = bin_to_mode(j, n);
                let idx = i * n + j;
                if kx.unsigned_abs() as usize > band || ky.unsigned_abs() as usize > band {
                    buf[idx] = Complex64::new(0.0, 0.0);
                } else {
                    buf[idx] *= scale;
                }
            }
        }
        symmetrize_2d(&mut buf, n);
        buf
    }

    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let mut buf = coeffs.to_vec();
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = buf[i * n + j];
            }
            self.inv.process(&mut col);
            for i in 0..n {
                buf[i * n + j] = col[i];
            }
        }
        for row in buf.chunks_exact_mut(n) {
            self.inv.process(row);
        }
        buf.into_iter().map(|c| c.re).collect()
    }
}

fn symmetrize_2d(buf: &mut [Complex64], n: usize) {
    let band = (n / 2 - 1) as i64;
    for kx in -band..=band {
        for ky in -band..=band {
            if (kx, ky) > (-kx, -ky) {
                continue;
            }
            let i = mode_to_bin(kx, n) * n + mode_to_bin(ky, n);
            let j = mode_to_bin(-kx, n) * n + mode_to_bin(-ky, n);
            if i == j {
                buf[i] = Complex64::new(buf[i].re, 0.0);
            } else {
                let half = 0.5 * (buf[i] + buf[j].conj());
                buf[i] = half;
                buf[j] = half.conj();
            }
        }
    }
}
