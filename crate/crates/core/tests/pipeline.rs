//! End-to-end recoveries beyond the acceptance germs.

use parafrac::asymptotics::closed_form_k1;
use parafrac::dynamics::attracting_directions;
use parafrac::powerseries::{Germ, TruncatedSeries};
use parafrac::recovery::{analyze, recover_k, verify_invariance, AnalysisOptions, A1_TOLERANCE, IM_A_TOLERANCE, RE_A_TOLERANCE};
use parafrac::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn germ(coeffs: &[Complex64]) -> Germ {
    Germ::from_series(TruncatedSeries::new(coeffs.to_vec())).unwrap()
}

fn real_germ(coeffs: &[f64]) -> Germ {
    Germ::from_series(TruncatedSeries::from_real(coeffs)).unwrap()
}

#[test]
fn recover_k_inverts_dimension() {
    for k in 1..=10usize {
        assert_eq!(recover_k(1.0 - 1.0 / (k as f64 + 1.0)).unwrap(), k);
    }
}

#[test]
fn cubic_germ_from_explicit_start() {
    let f = real_germ(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let r = analyze(&f, Some(c(-0.4, 0.0)), None, &AnalysisOptions::default()).unwrap();
    assert_eq!(r.k_recovered, 1);
    assert!((r.fractal_recovery.a1 - 1.0).norm() < A1_TOLERANCE);
    assert!((r.fractal_recovery.a.re - 1.0).abs() < RE_A_TOLERANCE);
    assert!(!r.degraded, "{:?}", r.warnings);
}

#[test]
fn quadratic_germ_with_a1_two() {
    let f = real_germ(&[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let r = analyze(&f, Some(c(-0.3, 0.0)), None, &AnalysisOptions::default()).unwrap();
    assert_eq!(r.k_recovered, 1);
    assert!((r.fractal_recovery.a1 / 2.0 - 1.0).norm() < A1_TOLERANCE);
    assert!(r.fractal_recovery.a.re.abs() < RE_A_TOLERANCE);
}

#[test]
fn intermediate_coefficient_is_reduced_by_the_series() {
    // z + z³ + z⁴ + (1+i)z⁵: the z⁴ term shifts the fitted ε² log ε coefficient,
    // so only k, a₁ and the series value of a are pinned here.
    let f = germ(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let r = analyze(&f, None, None, &AnalysisOptions::default()).unwrap();
    assert_eq!(r.k_recovered, 2);
    assert!(r.deviations.a1_relative < A1_TOLERANCE);
    assert!((r.series_oracle.a - c(0.0, 1.0)).norm() < 1e-12, "{}", r.series_oracle.a);
    assert!(r.fractal_recovery.a.re.is_finite() && r.fractal_recovery.a.im.is_finite());
}

#[test]
fn higher_order_terms_change_neither_invariants_nor_recovery() {
    let base = real_germ(&[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
    let perturbed = real_germ(&[1.0, 0.0, 1.0, 0.0, 2.0, 0.7, -1.5, 0.4]);
    let opts = AnalysisOptions::default();
    let z0 = Some(c(0.0, 0.2));
    let r0 = analyze(&base, z0, None, &opts).unwrap();
    let r1 = analyze(&perturbed, z0, None, &opts).unwrap();
    assert_eq!(r0.series_oracle, r1.series_oracle);
    let (p, q) = (&r0.fractal_recovery, &r1.fractal_recovery);
    assert!((p.a1 / q.a1 - 1.0).norm() < A1_TOLERANCE);
    assert!((p.a.re - q.a.re).abs() < RE_A_TOLERANCE);
    assert!((p.a.im - q.a.im).abs() < IM_A_TOLERANCE * p.a.im.abs().max(1.0));
}

#[test]
fn sectors_of_a_k2_germ_differ_only_in_direction() {
    let f = germ(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let dirs = attracting_directions(&f);
    assert_eq!(dirs.len(), 2);
    let opts = AnalysisOptions::default();
    let r: Vec<_> = dirs.iter().map(|d| analyze(&f, Some(d.a * 0.5), None, &opts).unwrap()).collect();
    let (m0, m1) = (r[0].fractal.m_c, r[1].fractal.m_c);
    assert!((m0.norm() / m1.norm() - 1.0).abs() < 1e-4);
    let expected = dirs[1].nu / dirs[0].nu;
    assert!((m1 / m0 / expected - 1.0).norm() < 1e-4);
    for (rep, d) in r.iter().zip(&dirs) {
        let cf = closed_form_k1(2, f.a1(), d.nu);
        assert!((rep.fractal.m_c / cf - 1.0).norm() < 1e-3);
    }
}

#[test]
fn identity_conjugator_agrees_exactly() {
    let f = real_germ(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let r = verify_invariance(&f, &[TruncatedSeries::from_real(&[1.0])], None, None, None, &AnalysisOptions::default()).unwrap();
    assert!(r.holds);
    assert_eq!(r.conjugates[0].m_c, r.base.m_c);
    assert_eq!(r.conjugates[0].r_c, r.base.r_c);
}

#[test]
fn non_tangent_conjugators_are_rejected() {
    let f = real_germ(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(verify_invariance(&f, &[TruncatedSeries::from_real(&[2.0])], None, None, None, &AnalysisOptions::default()).is_err());
}
