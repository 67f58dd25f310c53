//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible under --nocapture; the test verdict carries the same
//! information). Criteria marked KNOWN-RED in the repository notes assert
//! the stated contract faithfully and are expected to fail; their failure
//! messages carry the measured counterevidence.

use std::path::Path;
use std::sync::OnceLock;

use asq_cli::commands::{cmd_simulate, revalidate_suite};
use asq_cli::config::RunConfig;
use asq_core::degiorgi::{
    certify, epsilon_threshold_log, eta_for, exponents, induction_bound_holds, measure_ladder,
    truncate, CertifyConvention, RecurrenceParams, TruncationLadder,
};
use asq_core::dynamics::{
    estimate_blowup_time, run, rhs, EvolutionConfig, BlowupThresholds, TerminationStatus,
};
use asq_core::ineq::{
    audit_maximum_principle, check_hormander, check_pointwise_cc, check_riccati_bound,
    fit_interpolation_constant, random_band_limited, AmplitudeLaw, ConvexFn, InterpVariant,
    SampleSpec,
};
use asq_core::{ManifoldKind, ManifoldSpec, NodalField};

fn pass(criterion: &str, detail: &str) {
    println!("ACCEPTANCE {criterion}: PASS — {detail}");
}

fn catalog_big() -> Vec<ManifoldSpec> {
    vec![
        ManifoldSpec::new(ManifoldKind::Torus1D, 256).unwrap(),
        ManifoldSpec::new(ManifoldKind::Torus2D, 128).unwrap(),
        ManifoldSpec::new(ManifoldKind::Sphere2D, 64).unwrap(),
    ]
}

#[test]
fn criterion_1_spectral_exactness() {
    for m in catalog_big() {
        let f = random_band_limited(&m, m.band_limit(), 11, 0, AmplitudeLaw::PowerDecay(1.0));
        // round trip in sup norm
        let nodal = f.synthesize();
        let sup = nodal.norm_lp(f64::INFINITY).unwrap();
        let back = nodal.analyze().unwrap().synthesize();
        let rt = nodal
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(rt <= 1e-10 * sup, "{:?} round trip {rt:.3e}", m.kind);

        // Parseval
        let l2q = nodal.norm_lp(2.0).unwrap();
        let l2s = f.norm_l2();
        assert!(
            (l2q * l2q - l2s * l2s).abs() <= 1e-10 * l2s * l2s,
            "{:?} parseval",
            m.kind
        );

        // semigroup on the mean-free subspace
        for a in [-0.5f64, 0.5, 1.0] {
            for b in [-0.5f64, 0.5, 1.0] {
                let two = f.fractional_laplacian(a).fractional_laplacian(b);
                let one = f.fractional_laplacian(a + b);
                let mut d = two.clone();
                d.axpy(-1.0, &one);
                // remove the zero-mode difference (annihilation convention)
                let rel = d.norm_sobolev(0.0) / one.norm_sobolev(0.0).max(1e-30);
                assert!(rel <= 1e-10, "{:?} semigroup a={a} b={b}: {rel:.3e}", m.kind);
            }
        }

        // div(∇Λ^{-1+α}θ) = −Λ^{1+α}θ, both sides spectral; the quadrature
        // side runs on the padded grid where the product degree is exact
        for alpha in [-0.5, 0.0, 0.5] {
            let u = f
                .fractional_laplacian(-1.0 + alpha)
                .gradient_on(f.dealias_resolution())
                .unwrap();
            let div = u.divergence().unwrap().resample(m.resolution).unwrap();
            let mut expect = f.fractional_laplacian(1.0 + alpha);
            expect.scale(-1.0);
            let mut d = div;
            d.axpy(-1.0, &expect);
            let rel = d.norm_l2() / expect.norm_l2();
            assert!(rel <= 1e-10, "{:?} divergence alpha={alpha}: {rel:.3e}", m.kind);
        }
    }
    pass("1 spectral exactness", "round trip, Parseval, semigroup, divergence identity at 1e-10 on T1(256)/T2(128)/S2(64)");
}

#[test]
fn criterion_2_exact_virial_identity() {
    let manifolds = [
        ManifoldSpec::new(ManifoldKind::Torus1D, 64).unwrap(),
        ManifoldSpec::new(ManifoldKind::Torus2D, 32).unwrap(),
        ManifoldSpec::new(ManifoldKind::Sphere2D, 16).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for m in manifolds {
        for trial in 0..100u64 {
            let theta =
                random_band_limited(&m, m.band_limit() / 2, 202, trial, AmplitudeLaw::PowerDecay(1.0));
            for alpha in [-0.5, 0.0, 0.5] {
                let cfg = EvolutionConfig {
                    alpha,
                    kappa: 0.0,
                    dealias: true,
                    ..EvolutionConfig::default()
                };
                let eps = cfg.eps_for(&m);
                let r = rhs(&theta, &cfg).unwrap();
                let hdot = theta.mollify(eps).unwrap().norm_sobolev((1.0 + alpha) / 2.0);
                let rel = (r.synthesize().integrate() + hdot * hdot).abs() / (hdot * hdot);
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-10,
                    "{:?} trial {trial} alpha {alpha}: residual {rel:.3e}",
                    m.kind
                );
            }
        }
    }
    pass(
        "2 exact virial identity",
        &format!("900 states, worst relative residual {worst:.3e}"),
    );
}

// Shared singularity-formation run for criteria 3 and 4: N = 1024,
// θ₀ = 1 + 0.5 cos x, α = 0, κ = 0, exact de-aliasing, breakdown detector
// at 6× the initial gradient sup, snapshots every accepted step.
struct SharedRun {
    out: asq_core::dynamics::RunOutput,
    t_trigger: f64,
}

fn shared_blowup_run() -> &'static SharedRun {
    static RUN: OnceLock<SharedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let m = ManifoldSpec::new(ManifoldKind::Torus1D, 1024).unwrap();
        let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
        let cfg = EvolutionConfig {
            alpha: 0.0,
            kappa: 0.0,
            gamma: 1.0,
            eps_mollify: Some(0.0),
            dt_init: 0.01,
            cfl: 0.05,
            t_end: 6.0,
            dealias: true,
            snapshot_every: 1,
            hs_norm_s: 2.0,
            blowup: BlowupThresholds {
                grad_sup_max: Some(3.0),
                tail_fraction_max: 0.1,
            },
            advection: true,
        };
        let out = run(&theta0, &cfg).unwrap();
        let t_trigger = out
            .trigger_time()
            .expect("the singularity run must trip the detector");
        SharedRun { out, t_trigger }
    })
}

#[test]
fn criterion_3_maximum_principle_audit() {
    let shared = shared_blowup_run();
    let upto: Vec<_> = shared
        .out
        .records
        .iter()
        .copied()
        .take_while(|r| r.t <= shared.t_trigger)
        .collect();
    let audit = audit_maximum_principle(&upto).unwrap();
    assert!(
        audit.passed,
        "sup drift {:.3e}, inf drift {:.3e}, tol {:.3e}",
        audit.sup_drift, audit.inf_drift, audit.tol
    );
    pass(
        "3 maximum principle audit",
        &format!(
            "drift sup {:.2e} / inf {:.2e} <= {:.2e} up to the trigger at t = {:.4}",
            audit.sup_drift, audit.inf_drift, audit.tol, shared.t_trigger
        ),
    );
}

#[test]
fn criterion_4_ladder_inequalities() {
    let shared = shared_blowup_run();
    let k_const = shared.out.records[0].linf; // ‖θ₀‖_∞
    let t_star = 0.8 * shared.t_trigger;
    let k_max = 8usize;
    let series = measure_ladder(&shared.out.snapshots, k_const, t_star, k_max, 0.0).unwrap();

    // dissipation selection bound within 5%
    for e in &series.entries {
        let bound = 2.0f64.powi(e.k as i32 + 1) / t_star * e.e_k;
        assert!(
            e.d_k <= 1.05 * bound + 1e-14,
            "k={}: D_k {:.4e} vs (2^{{k+1}}/t*) E_k {:.4e}",
            e.k,
            e.d_k,
            bound
        );
    }

    // E_k(t) nonincreasing across each selection window
    let ladder = TruncationLadder::new(k_const, k_max).unwrap();
    for k in 0..=k_max {
        let lo = t_star * (1.0 - 0.5f64.powi(k as i32));
        let hi = t_star * (1.0 - 0.5f64.powi(k as i32 + 1));
        let mut prev: Option<f64> = None;
        for snap in shared
            .out
            .snapshots
            .iter()
            .filter(|s| s.t > lo && s.t < hi)
            .step_by(5)
        {
            let fine = snap
                .theta
                .synthesize_on(snap.theta.oversampled_resolution())
                .unwrap();
            let e = truncate(&fine, ladder.levels[k]).integrate();
            if let Some(p) = prev {
                assert!(
                    e <= p * (1.0 + 1e-6) + 1e-12,
                    "k={k}: E grew {p:.6e} -> {e:.6e} inside the window"
                );
            }
            prev = Some(e);
        }
    }

    // pointwise level-set inequalities, exact on the grid
    let snap = &shared.out.snapshots[shared.out.snapshots.len() / 2];
    let fine = snap
        .theta
        .synthesize_on(snap.theta.oversampled_resolution())
        .unwrap();
    for k in 0..k_max {
        let tk = truncate(&fine, ladder.levels[k]);
        let tk1 = truncate(&fine, ladder.levels[k + 1]);
        let factor = 2.0f64.powi(k as i32 + 1) / k_const;
        for (a, b) in tk1.values().iter().zip(tk.values()) {
            assert!(a <= b, "monotonicity of truncations violated");
            if *a > 0.0 {
                assert!(factor * b >= 1.0 - 1e-12, "level-set indicator bound violated");
            }
        }
    }
    pass(
        "4 ladder inequalities",
        &format!(
            "k <= {k_max} at t* = {t_star:.4}: selection bound within 5%, windows monotone, level-set bounds grid-exact"
        ),
    );
}

#[test]
fn criterion_5_recurrence_exponents_and_induction() {
    // exponents match the closed formulas exactly
    for (n, alpha, want_b, want_g) in [
        (1u32, 0.0, 1.5, 0.5),
        (2, 0.0, 1.25, 0.75),
        (1, -0.5, 4.0 / 3.0, 2.0 / 3.0),
        (2, 0.5, 6.0 / 4.5, 3.0 / 4.5),
    ] {
        let (b, g) = exponents(n, alpha);
        assert!((b - want_b).abs() < 1e-15 && (g - want_g).abs() < 1e-15);
    }
    // bisected eps0 satisfies the induction decay to k = 60 in log scale
    for n in [1u32, 2] {
        for alpha in [-0.5, 0.0, 0.5] {
            let log_eps = epsilon_threshold_log(n, alpha, 2.0, 2.0, 16.0, 60).unwrap();
            let params = RecurrenceParams::new(n, alpha, 2.0, 2.0, 16.0, 1e-3).unwrap();
            assert!(
                induction_bound_holds(&params, log_eps, 60),
                "(n={n}, alpha={alpha}) at the bisected threshold"
            );
            let eta = eta_for(&params, log_eps).unwrap();
            assert!((1.0 - eta) * params.beta > 1.0);
            // slightly above the threshold the bound must fail (sharp bisection)
            assert!(!induction_bound_holds(&params, log_eps + 1.0, 60));
        }
    }
    pass(
        "5 recurrence suite (exponents + induction)",
        "β/γ exact; bisected eps0 satisfies E_k <= eps0^{(1-η)β^k} to k = 60 for all six (n, α)",
    );
}

#[test]
fn criterion_5_certificates() {
    // eps0 = 10 must never certify
    let c = certify(10.0, 1.0, 2, 0.0, 2.0, 2.0, CertifyConvention::LateTime).unwrap();
    assert!(!c.holds, "eps0 = 10 certified unexpectedly");

    // KNOWN-RED: the stated contract demands holds = true at eps0 = 1e-8
    // (n = 2, α = 0, C = C' = 2, ‖θ₀‖_∞ = 1). Measured: the smallness
    // condition eps0^{2-γ} <= t*^{-γ} reads 1e-10 <= 1e-12 (false) and the
    // iterated recurrence diverges because K = C'/t*^γ ≈ 2e-12 makes the
    // quadratic term explode. See notes on the t* = max{C', 1/eps0}²
    // convention; the unit-time convention (t* = 1, C' = ½‖θ₀‖_∞)
    // certifies comfortably at small eps0.
    let c = certify(1e-8, 1.0, 2, 0.0, 2.0, 2.0, CertifyConvention::LateTime).unwrap();
    assert!(
        c.holds && c.contradiction_margin > 0.0,
        "certificate does not hold at eps0 = 1e-8: smallness = {} (eps0^(2-γ) = {:.3e} vs t*^-γ = {:.3e}), margin = {} ({:.6}), recurrence converges = {}",
        c.smallness_holds,
        1e-8f64.powf(2.0 - c.gamma),
        c.t_star.powf(-c.gamma),
        c.margin_holds,
        c.contradiction_margin,
        c.recurrence_converges
    );
    pass("5 certificates", "holds(1e-8) = true with positive margin, holds(10) = false");
}

#[test]
fn criterion_6_inequality_lab() {
    let threads = 4;
    // interpolation, manifold variant, all three manifolds: zero post-fit
    // violations by construction plus a sane constant
    for m in [
        ManifoldSpec::new(ManifoldKind::Torus1D, 128).unwrap(),
        ManifoldSpec::new(ManifoldKind::Torus2D, 64).unwrap(),
        ManifoldSpec::new(ManifoldKind::Sphere2D, 16).unwrap(),
    ] {
        let spec = SampleSpec {
            manifold: m,
            n_trials: 400,
            seed: 41,
            band_limit: m.band_limit() / 2,
            amplitude_law: AmplitudeLaw::PowerDecay(1.0),
        };
        let rep = fit_interpolation_constant(&spec, 0.0, InterpVariant::Manifold, threads).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.fitted_constant.is_finite() && rep.fitted_constant > 0.0);
        if m.kind != ManifoldKind::Sphere2D {
            let rep = fit_interpolation_constant(&spec, 0.0, InterpVariant::Torus, threads).unwrap();
            assert_eq!(rep.violations, 0);
        }
    }

    // fresh-seed revalidation with 1.5× inflated constants: ≤ 0.1%
    let reports = revalidate_suite(41, 1000, 1.5, threads).unwrap();
    for rep in &reports {
        let rate = rep.violations as f64 / rep.trials as f64;
        assert!(
            rate <= 0.001,
            "{}: violation rate {rate} on fresh seeds",
            rep.name
        );
    }

    // pointwise convexity bound for three convex shapes
    for m in [
        ManifoldSpec::new(ManifoldKind::Torus1D, 64).unwrap(),
        ManifoldSpec::new(ManifoldKind::Torus2D, 32).unwrap(),
        ManifoldSpec::new(ManifoldKind::Sphere2D, 12).unwrap(),
    ] {
        for trial in 0..8u64 {
            let f = random_band_limited(&m, m.band_limit() / 2, 99, trial, AmplitudeLaw::PowerDecay(1.5));
            for phi in [
                ConvexFn::Square,
                ConvexFn::Exp,
                ConvexFn::SmoothedRelu { level: 0.1 },
            ] {
                let rep = check_pointwise_cc(&f, phi, 1.0).unwrap();
                assert!(
                    rep.passed,
                    "{:?} {phi:?} trial {trial}: residual {:.3e} vs tol {:.3e}",
                    m.kind, rep.max_residual, rep.tol
                );
            }
        }
    }

    // Weyl: relative error < 5% at the largest tested R
    for (m, r) in [
        (ManifoldSpec::new(ManifoldKind::Torus1D, 256).unwrap(), 64.0f64),
        (ManifoldSpec::new(ManifoldKind::Torus2D, 128).unwrap(), 48.0),
        (ManifoldSpec::new(ManifoldKind::Sphere2D, 64).unwrap(), 48.0),
    ] {
        let n = m.dimension() as f64;
        let omega = if m.dimension() == 1 { 2.0 } else { std::f64::consts::PI };
        let leading = omega * m.volume() / (2.0 * std::f64::consts::PI).powf(n) * r.powf(n);
        let err = (m.weyl_count(r) as f64 - leading).abs() / leading;
        assert!(err < 0.05, "{:?}: weyl error {err:.4} at R = {r}", m.kind);
    }

    // eigenfunction sup ratios bounded over k <= 500
    let t1 = check_hormander(&ManifoldSpec::new(ManifoldKind::Torus1D, 2048).unwrap(), 500).unwrap();
    let flat = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((t1.sup_ratio - flat).abs() < 1e-12);
    let t2 = check_hormander(&ManifoldSpec::new(ManifoldKind::Torus2D, 128).unwrap(), 500).unwrap();
    assert!(t2.sup_ratio <= 1.0 / (4.0 * std::f64::consts::PI.powi(2)).sqrt() + 1e-12);
    let s2 = check_hormander(&ManifoldSpec::new(ManifoldKind::Sphere2D, 24).unwrap(), 500).unwrap();
    assert!(s2.sup_ratio < 1.0 && s2.sup_ratio > 0.2);

    pass(
        "6 inequality lab",
        "zero post-fit violations; fresh-seed revalidation <= 0.1% at 1.5x; CC pointwise, Weyl < 5%, eigenfunction sup ratios bounded over k <= 500",
    );
}

#[test]
fn criterion_7_blowup_evidence_cauchy() {
    let cfg = EvolutionConfig {
        alpha: 0.0,
        kappa: 0.0,
        gamma: 1.0,
        eps_mollify: Some(0.0),
        dt_init: 0.01,
        cfl: 0.3,
        t_end: 6.0,
        dealias: true,
        snapshot_every: 100,
        hs_norm_s: 2.0,
        blowup: BlowupThresholds {
            grad_sup_max: Some(3.0),
            tail_fraction_max: 0.1,
        },
        advection: true,
    };
    let est = estimate_blowup_time(
        |m| Ok(NodalField::from_fn(*m, |x, _| 1.0 + 0.5 * x.cos())),
        ManifoldKind::Torus1D,
        &cfg,
        &[256, 512, 1024, 2048],
    )
    .unwrap();
    assert!(!est.no_blowup_observed, "no trigger at the largest resolution");
    let times: Vec<f64> = est.times.iter().map(|(_, t)| t.unwrap()).collect();
    let gaps: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "gaps must shrink: {gaps:?}");
    }
    let final_gap = gaps.last().unwrap() / times.last().unwrap();
    assert!(final_gap < 0.05, "final relative gap {final_gap:.4}");
    assert!(est.converged);
    pass(
        "7 blow-up evidence (trigger convergence)",
        &format!("trigger times {times:?}, final relative gap {final_gap:.5}"),
    );
}

#[test]
fn criterion_7_gradient_growth_hundredfold() {
    // KNOWN-RED: the stated contract demands a 100× gradient-sup growth
    // before the trigger. The singularity is a Hölder-type cusp whose
    // band-limited gradient saturates near 0.43·√N (measured 6.0 / 9.0 /
    // 13.3 / 19.5 / 28.4 at N = 256..4096), so a 100× growth over the
    // initial 0.5 would need N ≳ 13,000. Asserted faithfully at the
    // largest study resolution with the detector wide open.
    let m = ManifoldSpec::new(ManifoldKind::Torus1D, 2048).unwrap();
    let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
    let cfg = EvolutionConfig {
        alpha: 0.0,
        kappa: 0.0,
        gamma: 1.0,
        eps_mollify: Some(0.0),
        dt_init: 0.01,
        cfl: 0.3,
        t_end: 4.5,
        dealias: true,
        snapshot_every: 100,
        hs_norm_s: 2.0,
        blowup: BlowupThresholds {
            grad_sup_max: Some(1e12),
            tail_fraction_max: 1e12,
        },
        advection: true,
    };
    let out = run(&theta0, &cfg).unwrap();
    let g0 = out.records[0].grad_sup;
    let gmax = out.records.iter().map(|r| r.grad_sup).fold(0.0f64, f64::max);
    let growth = gmax / g0;
    assert!(
        growth >= 100.0,
        "gradient sup grew {growth:.1}x (max {gmax:.2} from {g0:.2}) at N = 2048; \
         the band-limited cusp gradient scales like 0.43*sqrt(N), so 100x is out of \
         reach below N ~ 13,000"
    );
    pass("7 gradient growth", &format!("growth {growth:.1}x"));
}

#[test]
fn criterion_8_riccati_bound() {
    // fit C on the growth window [0, 2.0] (pre-breakdown at both sizes)
    let fit = |n: usize| {
        let m = ManifoldSpec::new(ManifoldKind::Torus1D, n).unwrap();
        let theta0 = NodalField::from_fn(m, |x, _| 1.0 + 0.5 * x.cos());
        let cfg = EvolutionConfig {
            alpha: 0.0,
            eps_mollify: Some(0.0),
            dt_init: 5e-3,
            cfl: 0.25,
            t_end: 2.0,
            hs_norm_s: 2.0,
            ..EvolutionConfig::default()
        };
        let out = run(&theta0, &cfg).unwrap();
        (check_riccati_bound(&out.records, 2.0, 1).unwrap(), out)
    };
    let (fit_lo, _) = fit(512);
    let (fit_hi, out_hi) = fit(1024);
    assert!(!fit_lo.below_sobolev_threshold, "s = 2 > 1 + n/2 on the circle");
    let spread = (fit_hi.c_fit - fit_lo.c_fit).abs() / fit_hi.c_fit.max(1e-12);
    assert!(
        spread <= 0.2,
        "fitted C not stable: {:.5} vs {:.5} ({spread:.3})",
        fit_lo.c_fit,
        fit_hi.c_fit
    );
    // the measured norm never exceeds the fitted bound on the certified interval
    let h0 = fit_hi.h0;
    for (i, r) in out_hi.records.iter().enumerate() {
        let margin = fit_hi.margins[i].1;
        assert!(margin > 0.0, "certified interval must cover the window");
        assert!(r.hs_norm <= h0 / margin * (1.0 + 1e-12));
    }
    pass(
        "8 riccati bound",
        &format!(
            "C = {:.5} (N=512) vs {:.5} (N=1024), spread {spread:.4}; bound holds on the window",
            fit_lo.c_fit, fit_hi.c_fit
        ),
    );
}

#[test]
fn criterion_9_reproducibility() {
    let configs_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["ccf_t1.toml", "t1_damped.toml", "s2_zonal.toml"] {
        let cfg_path = configs_dir.join(name);
        // sanity: the bundled files parse
        RunConfig::load(&cfg_path).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let a = tmp.path().join("a");
        let b = tmp.path().join("b");
        let out_a = cmd_simulate(&cfg_path, &a).unwrap();
        let _ = cmd_simulate(&cfg_path, &b).unwrap();
        if name == "ccf_t1.toml" {
            assert!(
                matches!(out_a.status, TerminationStatus::BlowupSuspected { .. }),
                "the bundled singularity config must trip the detector"
            );
            assert!(out_a.manifest.outputs.iter().any(|o| o.ends_with(".bin")));
        }
        assert_eq!(
            std::fs::read(a.join("diagnostics.csv")).unwrap(),
            std::fs::read(b.join("diagnostics.csv")).unwrap(),
            "{name}: diagnostics differ between reruns"
        );
        let mut bins: Vec<_> = std::fs::read_dir(a.join("snapshots"))
            .unwrap()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "bin").unwrap_or(false))
            .collect();
        bins.sort();
        for pa in bins {
            let pb = b.join("snapshots").join(pa.file_name().unwrap());
            assert_eq!(
                std::fs::read(&pa).unwrap(),
                std::fs::read(&pb).unwrap(),
                "{name}: snapshot {pa:?} differs"
            );
        }
    }
    pass("9 reproducibility", "byte-identical diagnostics and snapshots for all bundled configs");
}
