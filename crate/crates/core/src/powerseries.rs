//! Truncated complex power series without constant term.
//!
//! Every map here fixes the origin, so a series stores `c₁ … c_N` for
//! `z¹ … z^N`. Products and compositions are exact through order `N`;
//! nothing past `N` is ever invented.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which a coefficient is treated as zero when
/// reading off the multiplicity of a germ.
pub const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    #[serde(with = "crate::serde_complex::vec")]
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    /// Builds a series from `c₁ … c_N`. Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "truncation order must be positive");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); order])
    }

    /// The identity map `z` truncated at `order`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(order, 1, Complex64::new(1.0, 0.0))
    }

    /// `c·z^power` truncated at `order` (zero if `power > order`).
    pub fn monomial(order: usize, power: usize, c: Complex64) -> Self {
        assert!(power >= 1, "series carry no constant term");
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power - 1] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^power`; zero beyond the truncation order.
    pub fn coeff(&self, power: usize) -> Complex64 {
        if power == 0 || power > self.order() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[power - 1]
        }
    }

    pub fn set_coeff(&mut self, power: usize, c: Complex64) {
        assert!(power >= 1 && power <= self.order());
        self.coeffs[power - 1] = c;
    }

    /// Re-truncates at `order`, padding with zeros when growing.
    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order, Complex64::new(0.0, 0.0));
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::new(
            (1..=order)
                .map(|p| self.coeff(p) + other.coeff(p))
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Horner evaluation of the polynomial.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z
    }

    /// Largest coefficient modulus, used to scale zero tests.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Cauchy product truncated at the common order.
pub fn mul(s: &TruncatedSeries, t: &TruncatedSeries) -> TruncatedSeries {
    let order = s.order().min(t.order());
    let mut out = vec![Complex64::new(0.0, 0.0); order];
    for i in 1..order {
        let si = s.coeff(i);
        if si == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 1..=(order - i) {
            out[i + j - 1] += si * t.coeff(j);
        }
    }
    TruncatedSeries::new(out)
}

/// `f(g(z))` through the common order. `g` has no constant term by
/// construction, so only `c₁ … c_N` of `f` can contribute.
pub fn compose(f: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    let order = f.order().min(g.order());
    let g = g.truncate(order);
    let mut out = TruncatedSeries::zero(order);
    let mut power = g.clone();
    for p in 1..=order {
        let c = f.coeff(p);
        if c != Complex64::new(0.0, 0.0) {
            out = out.add(&power.scale(c));
        }
        if p < order {
            power = mul(&power, &g);
        }
    }
    out
}

/// Compositional inverse, solved one order at a time: with `ψ₁ … ψ_{n-1}`
/// fixed, the `zⁿ` coefficient of `φ∘ψ` equals `c₁ψₙ` plus a quantity that
/// no longer depends on `ψₙ`.
pub fn comp_inverse(phi: &TruncatedSeries) -> Result<TruncatedSeries> {
    let c1 = phi.coeff(1);
    if c1.norm() <= ZERO_TOLERANCE * phi.norm_inf().max(1.0) {
        return Err(Error::NotInvertible);
    }
    let order = phi.order();
    let mut psi = TruncatedSeries::monomial(order, 1, c1.inv());
    for n in 2..=order {
        let partial = compose(&phi.truncate(n), &psi.truncate(n));
        psi.set_coeff(n, -partial.coeff(n) / c1);
    }
    Ok(psi)
}

/// A parabolic germ `z + a₁z^{k+1} + …` kept as its truncated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Germ {
    series: TruncatedSeries,
    k: usize,
}

impl Germ {
    /// Validates `c₁ = 1`, reads off `k` from the first nonzero nonlinear
    /// coefficient and checks that the order reaches `2k+1`. Coefficients
    /// at orders `2 … k` that are within [`ZERO_TOLERANCE`] of zero are
    /// snapped to exactly zero.
    pub fn from_series(series: TruncatedSeries) -> Result<Self> {
        let scale = series.norm_inf().max(1.0);
        let tol = ZERO_TOLERANCE * scale;
        if (series.coeff(1) - 1.0).norm() > tol {
            return Err(Error::NotParabolic(format!(
                "linear coefficient is {} instead of 1",
                series.coeff(1)
            )));
        }
        let mut series = series;
        series.set_coeff(1, Complex64::new(1.0, 0.0));
        let k = (2..=series.order())
            .find(|&p| series.coeff(p).norm() > tol)
            .map(|p| p - 1)
            .ok_or_else(|| {
                Error::NotParabolic("no nonzero nonlinear coefficient within the truncation".into())
            })?;
        if series.order() < 2 * k + 1 {
            return Err(Error::InsufficientOrder {
                needed: 2 * k + 1,
                got: series.order(),
            });
        }
        for p in 2..=k {
            series.set_coeff(p, Complex64::new(0.0, 0.0));
        }
        Ok(Self { series, k })
    }

    /// `z + a₁z^{k+1} + a₁²·a·z^{2k+1}` truncated at `order`.
    pub fn extended_normal_form(k: usize, a1: Complex64, a: Complex64, order: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::NotParabolic("k must be positive".into()));
        }
        let mut s = TruncatedSeries::identity(order.max(2 * k + 1));
        s.set_coeff(k + 1, a1);
        s.set_coeff(2 * k + 1, s.coeff(2 * k + 1) + a1 * a1 * a);
        Self::from_series(s)
    }

    /// Default truncation order for analysis germs.
    pub fn default_order(k: usize) -> usize {
        2 * k + 6
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a1(&self) -> Complex64 {
        self.series.coeff(self.k + 1)
    }

    /// Coefficient `a_i` in `f(z) = z + a₁z^{k+1} + a₂z^{k+2} + …`.
    pub fn a(&self, i: usize) -> Complex64 {
        self.series.coeff(self.k + i)
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.series.eval(z)
    }

    /// True when `a₂ = … = a_k = 0`, i.e. the orders strictly between
    /// `k+1` and `2k+1` vanish.
    pub fn has_vanishing_intermediate(&self) -> bool {
        let tol = ZERO_TOLERANCE * self.series.norm_inf().max(1.0);
        (2..=self.k).all(|i| self.a(i).norm() <= tol)
    }
}

/// `φ⁻¹ ∘ f ∘ φ` at the order of `f`, reading `φ` as a polynomial.
pub fn conjugate(f: &Germ, phi: &TruncatedSeries) -> Result<Germ> {
    let order = f.order();
    let phi = phi.truncate(order);
    let inv = comp_inverse(&phi)?;
    let g = compose(&inv, &compose(&f.series().truncate(order), &phi));
    Germ::from_series(g)
}

/// `Res(1/(f(z) − z), 0)`.
///
/// Writing `f(z) − z = a₁z^{k+1}(1 + u(z))`, the residue is `1/a₁` times the
/// `z^k` coefficient of `(1 + u)⁻¹`. For `z + z² + az³` this gives `−a`,
/// the opposite sign of the usual fixed-point index `Res(1/(z − f), 0)`.
pub fn residual_index(f: &Germ) -> Result<Complex64> {
    let k = f.k();
    let a1 = f.a1();
    if a1.norm() == 0.0 {
        return Err(Error::NotParabolic("a₁ vanishes".into()));
    }
    if f.order() < 2 * k + 1 {
        return Err(Error::InsufficientOrder {
            needed: 2 * k + 1,
            got: f.order(),
        });
    }
    // u_j = a_{1+j}/a₁ for j = 1..k; reciprocal of 1 + u by the recurrence
    // r_0 = 1, r_n = −Σ_{j=1..n} u_j r_{n−j}.
    let u: Vec<Complex64> = (1..=k).map(|j| f.a(1 + j) / a1).collect();
    let mut r = vec![Complex64::new(1.0, 0.0)];
    for n in 1..=k {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=n {
            acc -= u[j - 1] * r[n - j];
        }
        r.push(acc);
    }
    Ok(r[k] / a1)
}

/// Which route produced a set of invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantSource {
    SeriesOracle,
    FractalRecovery,
}

/// Extended formal type `(k, a₁, a)`, plus per-field uncertainties when the
/// values come from a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormalInvariants {
    pub k: usize,
    #[serde(with = "crate::serde_complex")]
    pub a1: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub a: Complex64,
    pub source: InvariantSource,
    /// One-sigma uncertainty of `a₁` (modulus), fractal recovery only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a1_sigma: Option<f64>,
    /// One-sigma uncertainties of `(Re a, Im a)`, fractal recovery only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_sigma: Option<[f64; 2]>,
    /// Set when `Im a` did not come from the fractal data (k = 1).
    #[serde(default)]
    pub im_a_from_series: bool,
}

/// Reduces `f` to `z + a₁z^{k+1} + a₁²·a·z^{2k+1}` by conjugating with
/// `z + c·z^l` for `l = 2 … k`. Each step shifts the order-`(k+l)`
/// coefficient by `a₁(k+1−l)c` and leaves lower orders untouched, so the
/// coefficients at orders `k+2 … 2k` are killed lowest first.
pub fn extended_normal_form(f: &Germ) -> Result<FormalInvariants> {
    let k = f.k();
    if f.order() < 2 * k + 1 {
        return Err(Error::InsufficientOrder {
            needed: 2 * k + 1,
            got: f.order(),
        });
    }
    let a1 = f.a1();
    let mut g = f.clone();
    for l in 2..=k {
        let target = g.series().coeff(k + l);
        if target == Complex64::new(0.0, 0.0) {
            continue;
        }
        let slope = a1 * (k + 1 - l) as f64;
        let c = -target / slope;
        let phi = TruncatedSeries::identity(g.order()).add(&TruncatedSeries::monomial(g.order(), l, c));
        g = conjugate(&g, &phi)?;
        // the step is exact in the linear term; clear rounding residue
        let mut s = g.series().clone();
        s.set_coeff(k + l, Complex64::new(0.0, 0.0));
        g = Germ::from_series(s)?;
    }
    let a = g.series().coeff(2 * k + 1) / (a1 * a1);
    Ok(FormalInvariants {
        k,
        a1,
        a,
        source: InvariantSource::SeriesOracle,
        a1_sigma: None,
        a_sigma: None,
        im_a_from_series: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_series_close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) {
        let order = a.order().min(b.order());
        for p in 1..=order {
            let (x, y) = (a.coeff(p), b.coeff(p));
            assert!(
                (x - y).norm() <= tol * x.norm().max(y.norm()).max(1.0),
                "order {p}: {x} vs {y}"
            );
        }
    }

    #[test]
    fn mul_examples() {
        let z = TruncatedSeries::from_real(&[1.0, 0.0, 0.0, 0.0]);
        let z_z2 = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(mul(&z, &z), TruncatedSeries::from_real(&[0.0, 1.0, 0.0, 0.0]));
        assert_eq!(mul(&z_z2, &z), TruncatedSeries::from_real(&[0.0, 1.0, 1.0, 0.0]));
        // (z + z²)² = z² + 2z³ + z⁴
        assert_eq!(mul(&z_z2, &z_z2), TruncatedSeries::from_real(&[0.0, 1.0, 2.0, 1.0]));
    }

    #[test]
    fn mul_discards_beyond_order() {
        let s = TruncatedSeries::from_real(&[1.0, 1.0, 1.0]);
        assert_eq!(mul(&s, &s), TruncatedSeries::from_real(&[0.0, 1.0, 2.0]));
    }

    #[test]
    fn compose_examples() {
        let sq = TruncatedSeries::from_real(&[0.0, 1.0, 0.0, 0.0, 0.0]);
        let g = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(compose(&sq, &g), TruncatedSeries::from_real(&[0.0, 1.0, 2.0, 1.0, 0.0]));
        let f = TruncatedSeries::new(vec![c(1.0, 0.0), c(0.5, -2.0), c(3.0, 1.0)]);
        let id = TruncatedSeries::identity(3);
        assert_eq!(compose(&f, &id), f);
        assert_eq!(compose(&id, &f), f);
    }

    #[test]
    fn comp_inverse_examples() {
        assert_eq!(comp_inverse(&TruncatedSeries::identity(4)).unwrap(), TruncatedSeries::identity(4));
        let two_z = TruncatedSeries::from_real(&[2.0, 0.0, 0.0]);
        assert_eq!(comp_inverse(&two_z).unwrap(), TruncatedSeries::from_real(&[0.5, 0.0, 0.0]));
        // w = z + z² inverts to z = (√(1+4w) − 1)/2: signed Catalan numbers
        let phi = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let inv = comp_inverse(&phi).unwrap();
        assert_eq!(inv, TruncatedSeries::from_real(&[1.0, -1.0, 2.0, -5.0, 14.0, -42.0]));
        assert_series_close(&compose(&phi, &inv), &TruncatedSeries::identity(6), 1e-14);
    }

    #[test]
    fn comp_inverse_rejects_vanishing_linear_term() {
        let s = TruncatedSeries::from_real(&[0.0, 1.0]);
        assert_eq!(comp_inverse(&s), Err(Error::NotInvertible));
    }

    #[test]
    fn germ_validation() {
        let g = Germ::from_series(TruncatedSeries::from_real(&[1.0, 0.0, 2.0, 0.0, 1.0])).unwrap();
        assert_eq!(g.k(), 2);
        assert_eq!(g.a1(), c(2.0, 0.0));
        assert!(matches!(
            Germ::from_series(TruncatedSeries::from_real(&[2.0, 1.0, 0.0])),
            Err(Error::NotParabolic(_))
        ));
        assert!(matches!(
            Germ::from_series(TruncatedSeries::from_real(&[1.0, 0.0, 1.0, 0.0])),
            Err(Error::InsufficientOrder { needed: 5, got: 4 })
        ));
        assert!(matches!(
            Germ::from_series(TruncatedSeries::from_real(&[1.0, 0.0, 0.0])),
            Err(Error::NotParabolic(_))
        ));
    }

    #[test]
    fn conjugate_examples() {
        let f = Germ::from_series(TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(conjugate(&f, &TruncatedSeries::identity(4)).unwrap(), f);
        let g = conjugate(&f, &TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!((g.k(), g.a1()), (1, c(1.0, 0.0)));
        // (1/2)·f(2z) = z + 2z²
        let h = conjugate(&f, &TruncatedSeries::from_real(&[2.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(h.series(), &TruncatedSeries::from_real(&[1.0, 2.0, 0.0, 0.0]));
    }

    #[test]
    fn residual_index_examples() {
        let f = Germ::from_series(TruncatedSeries::from_real(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(residual_index(&f).unwrap(), c(0.0, 0.0));
        let a = c(0.7, -1.3);
        let f = Germ::from_series(TruncatedSeries::new(vec![c(1.0, 0.0), c(1.0, 0.0), a])).unwrap();
        assert!((residual_index(&f).unwrap() + a).norm() < 1e-15);
        let phi = TruncatedSeries::new(vec![c(1.0, 0.0), c(0.3, 0.2), c(-1.0, 0.5)]);
        let g = conjugate(&f, &phi).unwrap();
        assert!((residual_index(&g).unwrap() - residual_index(&f).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn residual_index_of_extended_normal_form_is_minus_a() {
        for k in 1..=4 {
            let a = c(1.5, -0.25);
            let g = Germ::extended_normal_form(k, c(0.5, 2.0), a, 2 * k + 6).unwrap();
            assert!((residual_index(&g).unwrap() + a).norm() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn extended_normal_form_examples() {
        let f = Germ::from_series(TruncatedSeries::from_real(&[1.0, 0.0, 1.0, 0.0, 5.0])).unwrap();
        let inv = extended_normal_form(&f).unwrap();
        assert_eq!((inv.k, inv.a1, inv.a), (2, c(1.0, 0.0), c(5.0, 0.0)));
        let f = Germ::from_series(TruncatedSeries::from_real(&[1.0, 2.0, 8.0])).unwrap();
        let inv = extended_normal_form(&f).unwrap();
        assert_eq!((inv.k, inv.a1, inv.a), (1, c(2.0, 0.0), c(2.0, 0.0)));
        let g0 = Germ::extended_normal_form(2, c(1.0, 1.0), c(3.0, -1.0), 10).unwrap();
        let phi = TruncatedSeries::from_real(&[1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let f = conjugate(&g0, &phi).unwrap();
        assert!(f.a(2).norm() > 1.0, "conjugation must populate the z⁴ coefficient");
        let inv = extended_normal_form(&f).unwrap();
        assert_eq!(inv.k, 2);
        assert!((inv.a1 - c(1.0, 1.0)).norm() < 1e-12);
        assert!((inv.a - c(3.0, -1.0)).norm() < 1e-12 * 10.0_f64.sqrt());
    }

    #[test]
    fn higher_orders_do_not_affect_invariants() {
        let base = Germ::extended_normal_form(2, c(1.0, 0.0), c(0.5, 0.5), 10).unwrap();
        let mut s = base.series().clone();
        s.set_coeff(6, c(7.0, -3.0));
        s.set_coeff(9, c(-2.0, 11.0));
        let perturbed = Germ::from_series(s).unwrap();
        assert_eq!(extended_normal_form(&base).unwrap(), extended_normal_form(&perturbed).unwrap());
    }

    #[test]
    fn scaling_maps_a1_to_a1_lambda_k() {
        let f = Germ::extended_normal_form(3, c(0.5, 0.25), c(1.0, 2.0), 12).unwrap();
        let lambda = c(0.8, -0.6) * 1.7;
        let g = conjugate(&f, &TruncatedSeries::monomial(12, 1, lambda)).unwrap();
        assert_eq!(g.k(), 3);
        assert!((g.a1() - f.a1() * lambda.powu(3)).norm() < 1e-12 * g.a1().norm());
        for p in 1..=12 {
            let expect = f.series().coeff(p) * lambda.powu(p as u32 - 1);
            assert!((g.series().coeff(p) - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
    }

    fn arb_complex() -> impl Strategy<Value = Complex64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
    }

    proptest! {
        #[test]
        fn inverse_composes_to_identity(lin in arb_complex(), rest in prop::collection::vec(arb_complex(), 5)) {
            prop_assume!(lin.norm() > 0.2);
            let mut coeffs = vec![lin];
            coeffs.extend(rest);
            let phi = TruncatedSeries::new(coeffs);
            let inv = comp_inverse(&phi).unwrap();
            let id = TruncatedSeries::identity(6);
            let tol = 1e-10 * (1.0 + phi.norm_inf() / lin.norm()).powi(6);
            for p in 1..=6 {
                prop_assert!((compose(&phi, &inv).coeff(p) - id.coeff(p)).norm() <= tol);
                prop_assert!((compose(&inv, &phi).coeff(p) - id.coeff(p)).norm() <= tol);
            }
        }

        #[test]
        fn invariants_survive_tangent_conjugation(
            k in 1usize..=3,
            a1 in arb_complex(),
            a in arb_complex(),
            conj in prop::collection::vec(arb_complex(), 5),
        ) {
            prop_assume!(a1.norm() > 0.3);
            let order = 2 * k + 6;
            let g0 = Germ::extended_normal_form(k, a1, a, order).unwrap();
            let mut phi = TruncatedSeries::identity(order);
            for (i, c) in conj.iter().enumerate() {
                phi.set_coeff(i + 2, *c * 0.5);
            }
            let f = conjugate(&g0, &phi).unwrap();
            let inv = extended_normal_form(&f).unwrap();
            prop_assert_eq!(inv.k, k);
            prop_assert!((inv.a1 - a1).norm() <= 1e-10 * a1.norm());
            prop_assert!((inv.a - a).norm() <= 1e-10 * a.norm().max(1.0));
            let r0 = residual_index(&g0).unwrap();
            let r1 = residual_index(&f).unwrap();
            prop_assert!((r0 - r1).norm() <= 1e-10 * r0.norm().max(1.0));
        }
    }
}
