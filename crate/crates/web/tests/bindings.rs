use parafrac_web::{analyze_impl, default_grid_impl, germ_from, orbit_impl};

#[test]
fn germ_is_padded_to_the_default_order() {
    let f = germ_from(&[1.0, 0.0, 1.0, 0.0]).unwrap();
    assert_eq!(f.k(), 1);
    assert!(f.order() >= 3);
    assert!(germ_from(&[1.0, 0.0, 1.0]).is_err());
    assert!(germ_from(&[2.0, 0.0, 1.0, 0.0]).is_err());
}

#[test]
fn orbit_starts_at_z0_and_follows_the_germ() {
    let pts = orbit_impl(&[1.0, 0.0, 1.0, 0.0], &[-0.5, 0.0], 100).unwrap();
    assert_eq!(pts.len(), 202);
    assert_eq!((pts[0], pts[1]), (-0.5, 0.0));
    assert!((pts[2] - (-0.25)).abs() < 1e-15);
}

#[test]
fn analysis_recovers_quadratic_germ() {
    let coeffs = [1.0, 0.0, 1.0, 0.0];
    let g = default_grid_impl(&coeffs).unwrap();
    let a = analyze_impl(&coeffs, &[], g[0], g[1], 32).unwrap();
    assert_eq!(a.eps().len(), 32);
    assert_eq!(a.directed().len(), 64);
    let inv = a.invariants();
    assert!((inv[0] - 0.5).abs() < 0.02);
    assert_eq!(inv[1], 1.0);
    assert!((inv[2] - 1.0).abs() < 0.02);
    assert_eq!(a.series(), vec![1.0, 1.0, 0.0, 0.0, 0.0]);
}
