use kerrbit::dispersive::{coefficients, dispersive_validity, DriveContext, ResonanceGuard, Validity};
use kerrbit::presets::{self, KAPPA_MHZ, KERR_MHZ, LOCK_DETUNING_MHZ, POINT_A_MHZ, POINT_B_MHZ};
use kerrbit::semiclassical::*;
use kerrbit::units::{mhz, to_mhz};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn locked(omega_d_mhz: f64) -> DriveContext {
    DriveContext {
        omega_d: mhz(omega_d_mhz),
        omega_r: mhz(omega_d_mhz + LOCK_DETUNING_MHZ),
        kappa: mhz(KAPPA_MHZ),
        kerr: mhz(KERR_MHZ),
        eps_d: 0.0,
    }
}

fn cavity(detuning_mhz: f64, kerr_mhz: f64) -> KerrCavity {
    KerrCavity { level: 0, detuning: mhz(detuning_mhz), kerr: mhz(kerr_mhz), kappa: mhz(KAPPA_MHZ) }
}

#[test]
fn linear_cavity_on_resonance() {
    let cav = KerrCavity { level: 0, detuning: 0.0, kerr: 0.0, kappa: 2.0 };
    let roots = cav.steady_states(1.0);
    assert_eq!(roots.len(), 1);
    assert!((roots[0].alpha - C64::new(0.0, -1.0)).norm() < 1e-12);
    assert!((roots[0].n - 1.0).abs() < 1e-12);
}

#[test]
fn reduced_detuning_of_the_locked_resonator() {
    let cav = KerrCavity::bare(&locked(POINT_A_MHZ));
    assert!((cav.reduced_detuning() - 6.0).abs() < 1e-12);
    assert!((cav.reduced_detuning() / CRITICAL_REDUCED_DETUNING - 3.46).abs() < 0.01);
}

#[test]
fn critical_point_is_degenerate() {
    let c = 0.5 * KAPPA_MHZ;
    let cav = cavity(3f64.sqrt() * c, -0.4);
    let t = cav.thresholds().unwrap();
    assert!(!t.bistable);
    assert!((t.eps_l - t.eps_h).abs() < 1e-9 * t.eps_h);
    assert!(matches!(cavity(1.7 * c, -0.4).thresholds(), Err(kerrbit::Error::NotBistable { .. })));
    assert!(cavity(15.0, 0.4).thresholds().is_err());
}

#[test]
fn bare_locked_resonator_thresholds() {
    let t = KerrCavity::bare(&locked(POINT_A_MHZ)).thresholds().unwrap();
    assert!(t.bistable);
    assert!((to_mhz(t.eps_h) - 36.5).abs() < 0.1, "{}", to_mhz(t.eps_h));
    assert!((to_mhz(t.eps_l) - 15.25).abs() < 0.1, "{}", to_mhz(t.eps_l));
}

#[test]
fn roots_inside_and_outside_the_window() {
    let cav = KerrCavity::bare(&locked(POINT_A_MHZ));
    let t = cav.thresholds().unwrap();
    let mid = 0.5 * (t.eps_l + t.eps_h);
    let roots = cav.steady_states(mid);
    let branches: Vec<Branch> = roots.iter().map(|r| r.branch).collect();
    assert_eq!(branches, [Branch::Low, Branch::Unstable, Branch::High]);
    assert!(roots[0].n < roots[2].n);
    for r in &roots {
        assert!(cav.residual(mid, r.alpha) < 1e-9 * mid);
    }
    assert_eq!(cav.steady_states(0.5 * t.eps_l).len(), 1);
    assert_eq!(cav.steady_states(0.5 * t.eps_l)[0].branch, Branch::Low);
    assert_eq!(cav.steady_states(1.5 * t.eps_h)[0].branch, Branch::High);
}

#[test]
fn fold_collision() {
    let cav = KerrCavity::bare(&locked(POINT_A_MHZ));
    let t = cav.thresholds().unwrap();
    let gap = |f: f64| {
        let r = cav.steady_states(t.eps_h * f);
        r[1].n - r[0].n
    };
    assert!(gap(1.0 - 1e-8) < gap(1.0 - 1e-4));
    assert!(gap(1.0 - 1e-8) < 1e-2 * t.n_fold_l);
}

#[test]
fn response_curves() {
    let omegas: Vec<f64> = (-40..=160).map(|k| k as f64 * 0.1).collect();
    let kappa = mhz(KAPPA_MHZ);
    let weak = &response_curve(mhz(KERR_MHZ), kappa, &omegas, &[mhz(0.01)])[0];
    let peak = weak.points.iter().max_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
    assert!(peak.0.abs() < 0.15, "peak at {}", peak.0);
    assert_eq!(weak.points.len(), omegas.len());

    let strong = &response_curve(mhz(KERR_MHZ), kappa, &omegas, &[mhz(30.0)])[0];
    let peak = strong.points.iter().max_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
    assert!(peak.0 > 2.0, "back-bent peak at {}", peak.0);
    let multi: Vec<f64> = strong.points.iter().filter(|p| p.1 == Branch::Unstable).map(|p| p.0).collect();
    assert!(!multi.is_empty() && multi.iter().all(|om| *om > CRITICAL_REDUCED_DETUNING));

    // Branch ends coincide with the folds of the same cavity.
    let om = 6.0;
    let cav = KerrCavity { level: 0, detuning: 0.5 * kappa * om, kerr: mhz(KERR_MHZ), kappa };
    let t = cav.thresholds().unwrap();
    let end = &response_curve(mhz(KERR_MHZ), kappa, &[om], &[t.eps_h * (1.0 - 1e-12)])[0];
    let low = end.points.iter().find(|p| p.1 == Branch::Low).unwrap();
    assert!((low.2 / t.n_fold_l.sqrt() - 1.0).abs() < 1e-4);
}

#[test]
fn conditioned_thresholds_at_the_operating_points() {
    let spec = presets::reference_transmon(4).unwrap();
    let g = ResonanceGuard::default();
    let th = |f: f64, i: usize| to_mhz(thresholds(&spec, &locked(f), i, &g).unwrap().eps_h);
    let (a0, a1, b0, b1) = (th(POINT_A_MHZ, 0), th(POINT_A_MHZ, 1), th(POINT_B_MHZ, 0), th(POINT_B_MHZ, 1));
    assert!(a1 > a0 && b1 < b0);
    assert!((a0 - 32.0).abs() < 0.2 && (a1 - 45.8).abs() < 0.2, "{a0} {a1}");
    assert!((b0 - 43.1).abs() < 0.2 && (b1 - 37.2).abs() < 0.2, "{b0} {b1}");
    // Separation within ~30% of 10 MHz (A) and 5 MHz (B).
    assert!(((a1 - a0) - 10.0).abs() < 4.0);
    assert!(((b0 - b1) - 5.0).abs() < 2.0);

    let ctx = locked(POINT_A_MHZ).with_drive(mhz(0.5 * (a0 + a1)));
    let roots = steady_amplitudes(&spec, &ctx, 0, &g).unwrap();
    assert!(roots.len() == 1 && roots[0].branch == Branch::High);
    let roots = steady_amplitudes(&spec, &ctx, 1, &g).unwrap();
    assert_eq!(roots.len(), 3);
}

#[test]
fn frame_validity_at_point_a() {
    let spec = presets::reference_transmon(4).unwrap();
    let g = ResonanceGuard::default();
    let ctx0 = locked(POINT_A_MHZ);
    let eps = 0.9 * thresholds(&spec, &ctx0, 1, &g).unwrap().eps_h;
    let ctx = ctx0.with_drive(eps);
    let alphas: Vec<C64> = (0..4)
        .map(|i| steady_amplitudes(&spec, &ctx, i, &g).unwrap()[0].alpha)
        .collect();
    let c = coefficients(&spec, ctx.omega_d, &g).unwrap();
    let report = dispersive_validity(&c, &alphas);
    // Λ₁ ≈ 0.30: the 1 ↔ 2 transition lies 62 MHz from the drive.
    assert!((report.lambda_abs[1] - 0.2999).abs() < 1e-3);
    assert_eq!(report.verdict, Validity::Marginal);
    assert_eq!(report.per_level[0], Validity::Marginal);
}

proptest! {
    #[test]
    fn single_valued_below_critical(om in 0.0f64..1.7, k in -1.0f64..1.0, eps in 0.01f64..200.0) {
        let cav = KerrCavity { level: 0, detuning: 0.5 * mhz(KAPPA_MHZ) * om, kerr: mhz(k), kappa: mhz(KAPPA_MHZ) };
        let roots = cav.steady_states(mhz(eps));
        prop_assert_eq!(roots.len(), 1);
        prop_assert!(cav.residual(mhz(eps), roots[0].alpha) < 1e-9 * mhz(eps));
    }

    #[test]
    fn three_roots_inside_window(om in 1.8f64..12.0, k in 0.05f64..2.0, frac in 0.01f64..0.99) {
        let cav = KerrCavity { level: 0, detuning: 0.5 * mhz(KAPPA_MHZ) * om, kerr: -mhz(k), kappa: mhz(KAPPA_MHZ) };
        let t = cav.thresholds().unwrap();
        prop_assert!(t.bistable && t.eps_l < t.eps_h);
        let eps = t.eps_l + frac * (t.eps_h - t.eps_l);
        let roots = cav.steady_states(eps);
        prop_assert_eq!(roots.len(), 3);
        prop_assert!(roots[0].n < roots[2].n);
        for r in &roots {
            prop_assert!(cav.residual(eps, r.alpha) < 1e-9 * eps);
        }
    }

    #[test]
    fn amplitudes_scale_invariant(s in 0.01f64..100.0, om in -10.0f64..10.0, eps in 1.0f64..60.0) {
        let base = KerrCavity { level: 0, detuning: 0.5 * mhz(KAPPA_MHZ) * om, kerr: mhz(KERR_MHZ), kappa: mhz(KAPPA_MHZ) };
        let scaled = KerrCavity { detuning: base.detuning * s, kerr: base.kerr * s, kappa: base.kappa * s, ..base };
        let a = base.steady_states(mhz(eps));
        let b = scaled.steady_states(mhz(eps) * s);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.alpha - y.alpha).norm() < 1e-8 * x.alpha.norm().max(1.0));
        }
    }
}
