//! Ladder measurements along recorded trajectories.

use asq_core::degiorgi::{check_virial, measure_ladder, truncate, TruncationLadder};
use asq_core::dynamics::{run, EvolutionConfig};
use asq_core::{ManifoldKind, ManifoldSpec, NodalField};

mod convexity {
    use asq_core::ineq::{check_pointwise_cc, random_band_limited, AmplitudeLaw, ConvexFn};
    use asq_core::{ManifoldKind, ManifoldSpec};

    /// The level-set dissipation bound rests on the pointwise convexity
    /// residual of the (smoothed) truncation profile staying within the
    /// band-limit tolerance; the weighted form [Λ^s θ_k − 1{θ>ℓ}Λ^s θ]·θ_k
    /// follows because the truncation factor is nonnegative.
    #[test]
    fn truncation_profile_residual_within_tolerance() {
        let m = ManifoldSpec::new(ManifoldKind::Torus1D, 64).unwrap();
        for (trial, alpha) in [(0u64, -0.5), (1, 0.0), (2, 0.5)] {
            let theta = random_band_limited(&m, 16, 55, trial, AmplitudeLaw::PowerDecay(1.5));
            let sup = theta.sup_oversampled();
            let level = 0.25 * sup;
            let rep = check_pointwise_cc(&theta, ConvexFn::SmoothedRelu { level }, 1.0 + alpha)
                .unwrap();
            assert!(
                rep.passed,
                "alpha={alpha} trial={trial}: residual {:.3e} vs tol {:.3e}",
                rep.max_residual,
                rep.tol
            );
            // the multiplying truncation is nonnegative by construction
            let fine = theta.synthesize_on(4 * m.resolution).unwrap();
            assert!(fine.values().iter().all(|&v| (v - level).max(0.0) >= 0.0));
        }
    }
}

fn t1(n: usize) -> ManifoldSpec {
    ManifoldSpec::new(ManifoldKind::Torus1D, n).unwrap()
}

#[test]
fn constant_run_ladder_energies() {
    // θ ≡ c: E_k = max(0, c − ℓ_k)·vol at every level, any window time valid
    let m = t1(64);
    let c = 0.4;
    let theta0 = NodalField::constant(m, c);
    let cfg = EvolutionConfig {
        t_end: 1.0,
        dt_init: 0.02,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    let k_const = 1.0; // c < K/2
    let series = measure_ladder(&out.snapshots, k_const, 0.9, 4, 0.0).unwrap();
    let ladder = TruncationLadder::new(k_const, 5).unwrap();
    for e in &series.entries {
        let expect = (c - ladder.levels[e.k]).max(0.0) * m.volume();
        assert!(
            (e.e_k - expect).abs() < 1e-10 * expect.max(1.0),
            "k={}: {} vs {expect}",
            e.k,
            e.e_k
        );
        assert!(e.d_k.abs() < 1e-20, "constant state has no dissipation");
    }
}

#[test]
fn k_max_zero_gives_initial_mass() {
    let m = t1(64);
    let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
    let cfg = EvolutionConfig {
        t_end: 0.5,
        dt_init: 0.01,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    let series = measure_ladder(&out.snapshots, 1.5, 0.4, 0, 0.0).unwrap();
    assert_eq!(series.entries.len(), 1);
    // E_0 = ∫ θ⁺(·, 0) = ∫ θ(·, 0) = 2π for positive data of mean 1
    assert!((series.entries[0].e_k - m.volume()).abs() < 1e-8);
    assert_eq!(series.entries[0].t_k, 0.0);
}

#[test]
fn empty_window_is_a_resolution_error() {
    let m = t1(64);
    let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
    let cfg = EvolutionConfig {
        t_end: 0.5,
        dt_init: 0.05,
        snapshot_every: 4,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    // deep windows are narrower than the snapshot cadence
    let err = measure_ladder(&out.snapshots, 1.5, 0.4, 8, 0.0);
    match err {
        Err(asq_core::CoreError::EmptyWindow { .. }) => {}
        other => panic!("expected an empty-window error, got {other:?}"),
    }
}

#[test]
fn dissipation_selection_satisfies_mean_value_bound() {
    // on a short recorded run every selected D_k obeys
    // D_k ≤ (2^{k+1}/t⋆) E_k within 5%
    let m = t1(256);
    let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
    let cfg = EvolutionConfig {
        t_end: 1.0,
        dt_init: 2e-3,
        cfl: 0.25,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    let t_star = 0.9;
    let k_max = 5;
    let series = measure_ladder(&out.snapshots, 1.5, t_star, k_max, 0.0).unwrap();
    for e in &series.entries {
        let bound = 2.0f64.powi(e.k as i32 + 1) / t_star * e.e_k;
        assert!(
            e.d_k <= 1.05 * bound + 1e-12,
            "k={}: D = {:.6e} vs bound {:.6e}",
            e.k,
            e.d_k,
            bound
        );
    }
    // selected times strictly increase towards t⋆
    for w in series.entries.windows(2) {
        assert!(w[0].t_k < w[1].t_k);
        assert!(w[1].t_k < t_star);
    }
}

#[test]
fn virial_residuals_nonpositive_along_run() {
    // the k = 0 residual is dominated by the ε-mollifier gap between
    // ‖θ‖² and ‖J_ε θ‖², which shrinks like (π/band)²; N = 512 puts it
    // inside the 1e-3 relative budget
    let m = t1(512);
    let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
    let cfg = EvolutionConfig {
        t_end: 0.8,
        dt_init: 2e-3,
        cfl: 0.25,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    let ladder = TruncationLadder::new(1.5, 4).unwrap();
    let report = check_virial(&out.snapshots, &ladder, 0.0, 200).unwrap();
    // k = 0 is an identity: residual magnitude ≤ 1e-3 × the initial scale
    let (k0, r0) = report.max_residual[0];
    assert_eq!(k0, 0);
    assert!(
        r0.abs() <= 1e-3 * report.scale[0],
        "k=0 residual {r0:.3e} vs scale {:.3e}",
        report.scale[0]
    );
    // deeper levels satisfy the inequality direction with tolerance
    for &(k, r) in &report.max_residual[1..] {
        assert!(
            r <= 1e-3 * report.scale[0].max(1.0),
            "k={k}: residual {r:.3e}"
        );
    }
}

#[test]
fn constant_state_virial_is_zero() {
    let m = t1(64);
    let theta0 = NodalField::constant(m, 0.8);
    let cfg = EvolutionConfig {
        t_end: 0.5,
        dt_init: 0.02,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    let ladder = TruncationLadder::new(1.0, 3).unwrap();
    let report = check_virial(&out.snapshots, &ladder, 0.0, 100).unwrap();
    for &(_, r) in &report.max_residual {
        assert!(r.abs() < 1e-12);
    }
}

#[test]
fn truncation_is_monotone_in_level_on_snapshots() {
    let m = t1(128);
    let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
    let cfg = EvolutionConfig {
        t_end: 0.3,
        ..EvolutionConfig::default()
    };
    let out = run(&theta0, &cfg).unwrap();
    let ladder = TruncationLadder::new(1.5, 6).unwrap();
    for snap in out.snapshots.iter().step_by(7) {
        let nodal = snap.theta.synthesize();
        for w in ladder.levels.windows(2) {
            let a = truncate(&nodal, w[1]);
            let b = truncate(&nodal, w[0]);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x <= y);
            }
        }
    }
}
