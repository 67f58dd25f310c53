//! Legendre machinery for the sphere transform.
//!
//! Two pieces live here: Gauss–Legendre quadrature nodes/weights (Newton
//! iteration on the three-term recurrence) and tables of fully normalized
//! associated Legendre functions P̄_ℓ^m together with their colatitude
//! derivatives. Normalization is chosen so that
//!
//! ```text
//! Y_{ℓ0}      = P̄_ℓ0(cos θ)
//! Y_{ℓm}      = √2 P̄_ℓm(cos θ) cos mφ      (m > 0)
//! Y_{ℓ,-m}    = √2 P̄_ℓm(cos θ) sin mφ      (m > 0)
//! ```
//!
//! form an orthonormal basis of L²(S²). The recurrences are normalized
//! on the fly so no factorials overflow; no Condon–Shortley phase.

use std::f64::consts::PI;

/// Gauss–Legendre nodes (descending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Standard initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_p_and_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_p_and_deriv(n, x);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // middle node is exactly zero
        nodes[m - 1] = 0.0;
        let (_, d) = legendre_p_and_deriv(n, 0.0);
        weights[m - 1] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) via the recurrence.
fn legendre_p_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x² - 1)
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Table of P̄_ℓm and dP̄_ℓm/dθ at a fixed set of x = cos θ nodes,
/// for all 0 ≤ m ≤ ℓ ≤ l_max.
pub struct AssocLegendreTable {
    l_max: usize,
    n_nodes: usize,
    /// values[node * n_pairs + pair(l, m)]
    values: Vec<f64>,
    /// same layout, derivative with respect to colatitude θ
    dtheta: Vec<f64>,
}

impl AssocLegendreTable {
    pub fn new(l_max: usize, nodes: &[f64]) -> Self {
        let n_pairs = (l_max + 1) * (l_max + 2) / 2;
        let n_nodes = nodes.len();
        let mut values = vec![0.0; n_nodes * n_pairs];
        let mut dtheta = vec![0.0; n_nodes * n_pairs];

        for (i, &x) in nodes.iter().enumerate() {
            let s = (1.0 - x * x).max(0.0).sqrt(); // sin θ > 0 at interior nodes
            let row = &mut values[i * n_pairs..(i + 1) * n_pairs];

            // Diagonal: P̄_00 = 1/√(4π); P̄_mm = √((2m+1)/(2m)) sinθ P̄_{m-1,m-1}
            let mut pmm = (1.0 / (4.0 * PI)).sqrt();
            row[pair_index(l_max, 0, 0)] = pmm;
            for m in 1..=l_max {
                pmm *= ((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt() * s;
                row[pair_index(l_max, m, m)] = pmm;
            }
            // Upward in ℓ at fixed m.
            for m in 0..=l_max {
                if m < l_max {
                    let p_mm = row[pair_index(l_max, m, m)];
                    row[pair_index(l_max, m + 1, m)] =
                        x * (2.0 * m as f64 + 3.0).sqrt() * p_mm;
                }
                for l in (m + 2)..=l_max {
                    let lf = l as f64;
                    let mf = m as f64;
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                        / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                        .sqrt();
                    row[pair_index(l_max, l, m)] = a
                        * (x * row[pair_index(l_max, l - 1, m)]
                            - b * row[pair_index(l_max, l - 2, m)]);
                }
            }
            // dP̄_ℓm/dθ = (ℓ x P̄_ℓm − c_ℓm P̄_{ℓ-1,m}) / sin θ,
            // c_ℓm = √((2ℓ+1)/(2ℓ-1) (ℓ²−m²)); the c term vanishes at ℓ = m.
            let drow = &mut dtheta[i * n_pairs..(i + 1) * n_pairs];
            for m in 0..=l_max {
                for l in m..=l_max {
                    let lf = l as f64;
                    let mf = m as f64;
                    let mut v = lf * x * values[i * n_pairs + pair_index(l_max, l, m)];
                    if l > m {
                        let c = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf))
                            .sqrt();
                        v -= c * values[i * n_pairs + pair_index(l_max, l - 1, m)];
                    }
                    drow[pair_index(l_max, l, m)] = v / s;
                }
            }
        }

        AssocLegendreTable {
            l_max,
            n_nodes,
            values,
            dtheta,
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    #[inline]
    pub fn value(&self, node: usize, l: usize, m: usize) -> f64 {
        debug_assert!(node < self.n_nodes);
        self.values[node * self.n_pairs() + pair_index(self.l_max, l, m)]
    }

    #[inline]
    pub fn dtheta(&self, node: usize, l: usize, m: usize) -> f64 {
        self.dtheta[node * self.n_pairs() + pair_index(self.l_max, l, m)]
    }

    #[inline]
    fn n_pairs(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 2) / 2
    }
}

/// Index of (ℓ, m) with m ≤ ℓ in the packed (m-major) layout.
#[inline]
fn pair_index(l_max: usize, l: usize, m: usize) -> usize {
    debug_assert!(m <= l && l <= l_max);
    // offset(m) = Σ_{m'<m} (l_max + 1 − m')
    m * (l_max + 1) - m * (m.wrapping_sub(1)) / 2 + (l - m)
}

/// P̄_ℓm at a single point (slow path; used by oracles and point evaluation).
pub fn normalized_assoc_legendre_point(l_max: usize, x: f64) -> AssocLegendreTable {
    AssocLegendreTable::new(l_max, &[x])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is exact for n = 8
        for p in 0..=15usize {
            let integral: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(p as i32)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!(
                (integral - exact).abs() < 1e-13,
                "degree {p}: {integral} vs {exact}"
            );
        }
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [5usize, 16, 65, 130] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn normalized_legendre_matches_explicit_harmonics() {
        // P̄_00 = √(1/4π), P̄_10 = √(3/4π) x, P̄_11 = √(3/8π) sinθ · √2 ... check
        // against the explicit normalized forms.
        let x = 0.3;
        let s = (1.0f64 - x * x).sqrt();
        let t = AssocLegendreTable::new(3, &[x]);
        assert!((t.value(0, 0, 0) - (1.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
        assert!((t.value(0, 1, 0) - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-14);
        // Y_11 = √2 P̄_11 cos φ must equal √(3/4π) sinθ cos φ  ⇒  P̄_11 = √(3/8π) sinθ
        assert!((t.value(0, 1, 1) - (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-14);
        // P̄_20 = √(5/16π)(3x² − 1)
        assert!(
            (t.value(0, 2, 0) - (5.0 / (16.0 * PI)).sqrt() * (3.0 * x * x - 1.0)).abs() < 1e-14
        );
        // P̄_22: Y_22 = (1/4)√(15/2π) sin²θ cos 2φ ⇒ P̄_22 = (1/4)√(15/2π)/√2·2 ... explicit:
        // P̄_22 = √(15/32π) sin²θ
        assert!((t.value(0, 2, 2) - (15.0 / (32.0 * PI)).sqrt() * s * s).abs() < 1e-14);
    }

    #[test]
    fn dtheta_matches_finite_difference() {
        let l_max = 12;
        let theta = 1.1f64;
        let h = 1e-6;
        let t0 = AssocLegendreTable::new(l_max, &[theta.cos()]);
        let tp = AssocLegendreTable::new(l_max, &[(theta + h).cos()]);
        let tm = AssocLegendreTable::new(l_max, &[(theta - h).cos()]);
        for m in 0..=l_max {
            for l in m..=l_max {
                let fd = (tp.value(0, l, m) - tm.value(0, l, m)) / (2.0 * h);
                let an = t0.dtheta(0, l, m);
                assert!(
                    (fd - an).abs() < 1e-6 * (1.0 + an.abs()),
                    "l={l} m={m}: fd {fd} vs {an}"
                );
            }
        }
    }

    #[test]
    fn orthonormal_under_gl_quadrature() {
        let l_max = 6;
        let (nodes, w) = gauss_legendre(l_max + 1);
        let t = AssocLegendreTable::new(l_max, &nodes);
        // ∫ P̄_ℓm P̄_ℓ'm dx · 2π·(factor) — latitude part only: the φ integral of
        // (√2 cos mφ)² over [0,2π] is 2π for m=0 and also 2π·1 for m>0 with the √2.
        for m in 0..=l_max {
            for l1 in m..=l_max {
                for l2 in m..=l_max {
                    let mut acc = 0.0;
                    for (i, wi) in w.iter().enumerate() {
                        acc += wi * t.value(i, l1, m) * t.value(i, l2, m);
                    }
                    acc *= 2.0 * PI;
                    let expect = if l1 == l2 { 1.0 } else { 0.0 };
                    assert!(
                        (acc - expect).abs() < 1e-12,
                        "m={m} l1={l1} l2={l2}: {acc}"
                    );
                }
            }
        }
    }
}
