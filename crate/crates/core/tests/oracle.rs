use kerrbit::dispersive::{coefficients, ResonanceGuard};
use kerrbit::oracle::*;
use kerrbit::presets::{self, POINT_A_MHZ, POINT_B_MHZ};
use kerrbit::qubit::explicit_spec;
use kerrbit::units::{mhz, to_mhz};

#[test]
fn uncoupled_ladder_is_bare() {
    let spec = presets::reference_transmon(4).unwrap().with_scaled_couplings(1e-12).unwrap();
    let wr = mhz(5800.0);
    let ladder = dressed_energies(&spec, wr, 5).unwrap();
    for i in 0..4 {
        for n in 0..=5 {
            let bare = spec.freqs()[i] + n as f64 * wr;
            assert!((ladder.energy(i, n) - bare).abs() < 1e-9 * bare.max(1.0));
            assert!(ladder.overlap(i, n) > 1.0 - 1e-12);
        }
    }
    for c in extract_coefficients(&ladder, wr).unwrap() {
        assert!(to_mhz(c.stark).abs() < 1e-6 && to_mhz(c.kerr).abs() < 1e-6);
    }
}

#[test]
fn two_level_perturbative_limit() {
    let (g, det) = (13.5, 280.0);
    let spec = explicit_spec(&[0.0, mhz(6000.0)], &[mhz(g)]).unwrap();
    let wr = mhz(6000.0 - det);
    let ladder = dressed_energies(&spec, wr, 5).unwrap();
    // |1,0⟩ is pushed up by g²/Δ with Δ = ω₁ − ω_r.
    let shift = to_mhz(ladder.energy(1, 0) - spec.freqs()[1]);
    let second_order = g * g / det;
    assert!((shift - second_order).abs() < 2.0 * second_order * (g / det).powi(2));

    let c = extract_coefficients(&ladder, wr).unwrap();
    let chi = to_mhz(c[1].stark - c[0].stark);
    assert!((chi / (2.0 * g * g / det) - 1.0).abs() < 0.05, "{chi}");
}

#[test]
fn insufficient_points() {
    let spec = presets::reference_transmon(3).unwrap();
    let ladder = dressed_energies(&spec, mhz(POINT_A_MHZ), 3).unwrap();
    assert!(matches!(
        extract_coefficients(&ladder, mhz(POINT_A_MHZ)),
        Err(kerrbit::Error::InsufficientPoints { .. })
    ));
}

#[test]
fn assignments_unambiguous_at_point_a() {
    let spec = presets::reference_transmon(5).unwrap();
    let ladder = dressed_energies(&spec, mhz(POINT_A_MHZ), 5).unwrap();
    assert!(ladder.ambiguous().is_empty());
    for i in 0..5 {
        for n in 0..5 {
            assert!(ladder.energy(i, n + 1) > ladder.energy(i, n));
        }
    }
}

#[test]
fn reference_transmon_numeric_coefficients() {
    let spec = presets::reference_transmon(5).unwrap();
    let a = oracle_coefficients(&spec, mhz(POINT_A_MHZ), DEFAULT_N_FIT).unwrap();
    let b = oracle_coefficients(&spec, mhz(POINT_B_MHZ), DEFAULT_N_FIT).unwrap();
    let s = |c: &[OracleCoefficients], i: usize| to_mhz(c[i].stark);
    assert!((s(&a, 0) + 0.6449).abs() < 1e-3, "{}", s(&a, 0));
    assert!((s(&a, 1) - 5.9535).abs() < 1e-3, "{}", s(&a, 1));
    assert!((s(&b, 0) - 3.9969).abs() < 1e-3, "{}", s(&b, 0));
    assert!((s(&b, 1) + 2.6606).abs() < 1e-3, "{}", s(&b, 1));
    // Numerical pulls at the two operating points agree to about 1%.
    let (chi_a, chi_b) = (s(&a, 1) - s(&a, 0), s(&b, 1) - s(&b, 0));
    assert!(((chi_a.abs() - chi_b.abs()) / chi_a.abs()).abs() < 0.02, "{chi_a} {chi_b}");
}

#[test]
fn numeric_and_analytic_agree_at_point_a() {
    let spec = presets::reference_transmon(5).unwrap();
    let wd = mhz(POINT_A_MHZ);
    let num = oracle_coefficients(&spec, wd, DEFAULT_N_FIT).unwrap();
    let ana = coefficients(&spec, wd, &ResonanceGuard::default()).unwrap();
    for i in 0..2 {
        assert!(((num[i].stark - ana.stark[i]) / ana.stark[i]).abs() < 0.1);
        assert_eq!(num[i].kerr.signum(), ana.kerr[i].signum(), "level {i}");
    }
}
