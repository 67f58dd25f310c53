//! Catalog manifolds with exact eigendata and quadrature grids.
//!
//! Three manifolds are supported: the flat circle (circumference 2π), the
//! flat square torus and the unit sphere. Each comes with a closed-form
//! Laplace–Beltrami spectrum, so no numerical eigensolver is involved:
//! `-Δ φ_k = λ_k² φ_k` with λ_k = |k| on tori and λ_ℓ = √(ℓ(ℓ+1)) on the
//! sphere.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::legendre::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldKind {
    #[serde(rename = "torus1d")]
    Torus1D,
    #[serde(rename = "torus2d")]
    Torus2D,
    #[serde(rename = "sphere2d")]
    Sphere2D,
}

impl ManifoldKind {
    pub fn dimension(self) -> usize {
        match self {
            ManifoldKind::Torus1D => 1,
            ManifoldKind::Torus2D | ManifoldKind::Sphere2D => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Torus1D => "torus1d",
            ManifoldKind::Torus2D => "torus2d",
            ManifoldKind::Sphere2D => "sphere2d",
        }
    }
}

/// A catalog manifold at a fixed spectral resolution.
///
/// `resolution` is the number of grid points per periodic direction for
/// tori and the maximum spherical-harmonic degree L for the sphere.
/// `scale` is reserved and must equal 1 (circumference 2π for tori, unit
/// radius for the sphere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub resolution: usize,
    pub scale: f64,
}

impl ManifoldSpec {
    pub fn new(kind: ManifoldKind, resolution: usize) -> Result<Self> {
        let spec = ManifoldSpec {
            kind,
            resolution,
            scale: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale != 1.0 {
            return Err(CoreError::InvalidManifold(
                "scale is reserved and must equal 1".into(),
            ));
        }
        if self.resolution < 8 {
            return Err(CoreError::InvalidManifold(format!(
                "resolution {} below minimum 8",
                self.resolution
            )));
        }
        match self.kind {
            ManifoldKind::Torus1D | ManifoldKind::Torus2D => {
                if !self.resolution.is_multiple_of(2) {
                    return Err(CoreError::InvalidManifold(format!(
                        "torus resolution {} must be even",
                        self.resolution
                    )));
                }
            }
            ManifoldKind::Sphere2D => {}
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    pub fn volume(&self) -> f64 {
        use std::f64::consts::PI;
        match self.kind {
            ManifoldKind::Torus1D => 2.0 * PI,
            ManifoldKind::Torus2D => 4.0 * PI * PI,
            ManifoldKind::Sphere2D => 4.0 * PI,
        }
    }

    /// Highest retained mode. Tori drop the Nyquist mode so conjugate
    /// symmetry stays clean; the sphere keeps every degree up to L.
    pub fn band_limit(&self) -> usize {
        match self.kind {
            ManifoldKind::Torus1D | ManifoldKind::Torus2D => self.resolution / 2 - 1,
            ManifoldKind::Sphere2D => self.resolution,
        }
    }

    /// Largest eigenvalue λ within the band limit.
    pub fn lambda_max(&self) -> f64 {
        let b = self.band_limit() as f64;
        match self.kind {
            ManifoldKind::Torus1D => b,
            ManifoldKind::Torus2D => b * std::f64::consts::SQRT_2,
            ManifoldKind::Sphere2D => (b * (b + 1.0)).sqrt(),
        }
    }

    /// Number of quadrature nodes.
    pub fn grid_len(&self) -> usize {
        match self.kind {
            ManifoldKind::Torus1D => self.resolution,
            ManifoldKind::Torus2D => self.resolution * self.resolution,
            ManifoldKind::Sphere2D => self.sphere_grid_dims().0 * self.sphere_grid_dims().1,
        }
    }

    /// (n_lat, n_lon) for the Gauss–Legendre × equispaced sphere grid.
    pub fn sphere_grid_dims(&self) -> (usize, usize) {
        let l = self.resolution;
        (l + 1, 2 * l + 2)
    }

    /// Number of spectral coefficients stored for a field on this manifold.
    pub fn spectral_len(&self) -> usize {
        match self.kind {
            ManifoldKind::Torus1D => self.resolution,
            ManifoldKind::Torus2D => self.resolution * self.resolution,
            ManifoldKind::Sphere2D => (self.resolution + 1) * (self.resolution + 1),
        }
    }

    /// Grid coordinates of every quadrature node, row-major.
    /// Tori: (x) or (x, y) in [0, 2π). Sphere: (θ colatitude, φ longitude).
    pub fn grid_points(&self) -> Vec<[f64; 2]> {
        use std::f64::consts::PI;
        match self.kind {
            ManifoldKind::Torus1D => {
                let n = self.resolution;
                (0..n).map(|j| [2.0 * PI * j as f64 / n as f64, 0.0]).collect()
            }
            ManifoldKind::Torus2D => {
                let n = self.resolution;
                let mut pts = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        pts.push([2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / n as f64]);
                    }
                }
                pts
            }
            ManifoldKind::Sphere2D => {
                let (n_lat, n_lon) = self.sphere_grid_dims();
                let (nodes, _) = gauss_legendre(n_lat);
                let mut pts = Vec::with_capacity(n_lat * n_lon);
                // nodes are x = cos θ in descending order: θ ascends from the north pole
                for x in nodes.iter().take(n_lat) {
                    let theta = x.acos();
                    for j in 0..n_lon {
                        pts.push([theta, 2.0 * PI * j as f64 / n_lon as f64]);
                    }
                }
                pts
            }
        }
    }

    /// Quadrature weights matching `grid_points`; sums to `volume()`.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        use std::f64::consts::PI;
        match self.kind {
            ManifoldKind::Torus1D => {
                let n = self.resolution;
                vec![2.0 * PI / n as f64; n]
            }
            ManifoldKind::Torus2D => {
                let n = self.resolution;
                let w = (2.0 * PI / n as f64).powi(2);
                vec![w; n * n]
            }
            ManifoldKind::Sphere2D => {
                let (n_lat, n_lon) = self.sphere_grid_dims();
                let (_, gl_w) = gauss_legendre(n_lat);
                let dphi = 2.0 * PI / n_lon as f64;
                let mut w = Vec::with_capacity(n_lat * n_lon);
                for gw in gl_w.iter().take(n_lat) {
                    for _ in 0..n_lon {
                        w.push(gw * dphi);
                    }
                }
                w
            }
        }
    }

    /// Representative nodal spacing used by the CFL condition.
    pub fn grid_spacing(&self) -> f64 {
        use std::f64::consts::PI;
        match self.kind {
            ManifoldKind::Torus1D | ManifoldKind::Torus2D => 2.0 * PI / self.resolution as f64,
            ManifoldKind::Sphere2D => PI / (self.resolution + 1) as f64,
        }
    }

    /// Exact count of eigenvalues λ_k ≤ R with multiplicity.
    pub fn weyl_count(&self, r: f64) -> usize {
        if r < 0.0 {
            return 0;
        }
        match self.kind {
            ManifoldKind::Torus1D => 2 * (r.floor() as usize) + 1,
            ManifoldKind::Torus2D => {
                let r2 = r * r;
                let kmax = r.floor() as i64;
                let mut count = 0usize;
                for kx in -kmax..=kmax {
                    let rem = r2 - (kx * kx) as f64;
                    if rem < 0.0 {
                        continue;
                    }
                    let ky_max = rem.sqrt().floor() as i64;
                    // Guard the floating floor against boundary lattice points.
                    let ky_max = adjust_lattice_bound(ky_max, kx, r2);
                    count += (2 * ky_max + 1) as usize;
                }
                count
            }
            ManifoldKind::Sphere2D => {
                // λ_ℓ² = ℓ(ℓ+1); count Σ (2ℓ+1) over ℓ(ℓ+1) ≤ R².
                let r2 = r * r;
                let mut l = ((-1.0 + (1.0 + 4.0 * r2).sqrt()) / 2.0).floor() as i64;
                if l < 0 {
                    l = 0;
                }
                // exact integer comparisons around the float estimate
                while ((l + 1) * (l + 2)) as f64 <= r2 {
                    l += 1;
                }
                while l > 0 && (l * (l + 1)) as f64 > r2 {
                    l -= 1;
                }
                if (l * (l + 1)) as f64 > r2 {
                    0
                } else {
                    ((l + 1) * (l + 1)) as usize
                }
            }
        }
    }

    /// Distinct eigenvalues λ ≤ R with multiplicities, sorted ascending.
    pub fn eigenvalues_up_to(&self, r: f64) -> Vec<(f64, usize)> {
        match self.kind {
            ManifoldKind::Torus1D => {
                let kmax = r.floor() as usize;
                let mut out = vec![(0.0, 1)];
                for k in 1..=kmax {
                    out.push((k as f64, 2));
                }
                out
            }
            ManifoldKind::Torus2D => {
                use std::collections::BTreeMap;
                let r2 = r * r;
                let kmax = r.floor() as i64;
                let mut mult: BTreeMap<i64, usize> = BTreeMap::new();
                for kx in -kmax..=kmax {
                    for ky in -kmax..=kmax {
                        let q = kx * kx + ky * ky;
                        if q as f64 <= r2 {
                            *mult.entry(q).or_insert(0) += 1;
                        }
                    }
                }
                mult.into_iter()
                    .map(|(q, m)| ((q as f64).sqrt(), m))
                    .collect()
            }
            ManifoldKind::Sphere2D => {
                let r2 = r * r;
                let mut out = Vec::new();
                let mut l = 0i64;
                while (l * (l + 1)) as f64 <= r2 {
                    out.push((((l * (l + 1)) as f64).sqrt(), (2 * l + 1) as usize));
                    l += 1;
                }
                out
            }
        }
    }
}

fn adjust_lattice_bound(mut ky: i64, kx: i64, r2: f64) -> i64 {
    while ((kx * kx + (ky + 1) * (ky + 1)) as f64) <= r2 {
        ky += 1;
    }
    while ky > 0 && ((kx * kx + ky * ky) as f64) > r2 {
        ky -= 1;
    }
    ky
}
