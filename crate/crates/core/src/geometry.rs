//! Exact area and center of mass of ε-neighborhoods of orbits.
//!
//! Past the critical index every new disc overlaps only its predecessor, so
//! the neighborhood splits into a tail of disjoint discs and a nucleus built
//! from one full disc followed by crescents `K(z_{m+1}, ε) \ K(z_m, ε)`.
//! Stored iterates are summed with the closed-form crescent area and
//! moment; streamed iterates use the odd Taylor expansion of the crescent
//! area in `d/2ε`, and the part of the orbit past the last iterate is closed
//! along the straight segment to the origin.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Orbit;
use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};

/// Default ratio `d/ε` below which the nucleus is summed from streamed sums.
pub const DEFAULT_THETA: f64 = 0.05;
/// Default closure budget as a fraction of `ε²|log ε|`.
pub const DEFAULT_BUDGET: f64 = 1e-3;

/// `t√(1−t²) + arcsin t`, so that a crescent has area `2ε²·G(d/2ε)`.
#[inline]
fn crescent_shape(t: f64) -> f64 {
    t * (1.0 - t * t).max(0.0).sqrt() + t.asin()
}

/// Area of `K(z, ε) \ K(w, ε)` for `|z − w| = d ≤ 2ε`.
pub fn crescent_area(d: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    if !(0.0..=2.0 * eps).contains(&d) {
        return Err(Error::OutOfRange(format!("distance {d} outside [0, 2ε] for ε = {eps}")));
    }
    Ok(2.0 * eps * eps * crescent_shape(d / (2.0 * eps)))
}

/// Center of mass of `K(z, ε) \ K(w, ε)` for `0 < |z − w| ≤ 2ε`.
pub fn crescent_centroid(z: Complex64, w: Complex64, eps: f64) -> Result<Complex64> {
    let d = (z - w).norm();
    if d == 0.0 {
        return Err(Error::OutOfRange("coincident centers give an empty crescent".into()));
    }
    let area = crescent_area(d, eps)?;
    let t = d / (2.0 * eps);
    let bracket = t * (1.0 - t * t).max(0.0).sqrt() - t.min(1.0).acos();
    Ok(z + (w - z) * (eps * eps * bracket / area))
}

/// Index `n` with `d_n < 2ε ≤ d_{n−1}`: one past the last gap that is at
/// least `2ε`, or 0 when every gap is shorter.
pub fn critical_index(orbit: &Orbit, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    let gaps = orbit.gaps();
    let two_eps = 2.0 * eps;
    if orbit.is_closed() && gaps.last().is_none_or(|&d| d >= two_eps) {
        return Err(Error::OrbitTooShort(format!(
            "no stored gap below 2ε = {two_eps:e}; iterate deeper"
        )));
    }
    let n0 = orbit.monotone_from().min(gaps.len());
    if n0 < gaps.len() && gaps[n0] >= two_eps {
        // strictly decreasing from n0 on: first gap below 2ε
        let first_below = n0 + gaps[n0..].partition_point(|&d| d >= two_eps);
        return Ok(first_below);
    }
    Ok(gaps[..n0]
        .iter()
        .rposition(|&d| d >= two_eps)
        .map_or(0, |n| n + 1))
}

/// `n_ε` disjoint discs `z₀ … z_{n_ε−1}`.
pub fn tail_area(n_eps: usize, eps: f64) -> f64 {
    n_eps as f64 * PI * eps * eps
}

/// Per-ε record of the exact decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodMeasurement {
    pub eps: f64,
    pub n_eps: usize,
    pub area: f64,
    #[serde(with = "crate::serde_complex")]
    pub centroid: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub directed_area: Complex64,
    pub tail_area: f64,
    pub nucleus_area: f64,
    /// Absolute bound on the area error from the streamed expansion and the
    /// closure past the last iterate.
    pub closure_error_bound: f64,
    /// Absolute bound on the error of `area·centroid` from the same sources.
    pub moment_error_bound: f64,
    pub points_used: usize,
}

struct Decomposition {
    n_eps: usize,
    tail_area: f64,
    tail_moment: Complex64,
    nucleus_area: f64,
    nucleus_moment: Complex64,
    area_bound: f64,
    moment_bound: f64,
    points_used: usize,
}

fn allowed_error(eps: f64, budget: f64) -> f64 {
    budget * eps * eps * eps.ln().abs()
}

fn decompose(orbit: &Orbit, eps: f64) -> Result<Decomposition> {
    let n_eps = critical_index(orbit, eps)?;
    let pts = orbit.points();
    let gaps = orbit.gaps();
    let eps2 = eps * eps;

    let mut tail = ComplexSum::new();
    for z in &pts[..n_eps] {
        tail.add(*z);
    }
    let tail_moment = tail.value() * (PI * eps2);

    // crescents of z_{m+1} against z_m for stored m ≥ n_ε
    let mut shape_sum = NeumaierSum::new();
    let mut shape_moment = ComplexSum::new();
    for m in n_eps..gaps.len() {
        let g = crescent_shape(gaps[m] / (2.0 * eps));
        shape_sum.add(g);
        shape_moment.add((pts[m] + pts[m + 1]) * g);
    }
    let mut area = NeumaierSum::new();
    area.add(PI * eps2);
    area.add(2.0 * eps2 * shape_sum.value());
    let mut moment = ComplexSum::new();
    moment.add(pts[n_eps] * (PI * eps2));
    moment.add(shape_moment.value() * eps2);

    let mut area_bound = 0.0;
    let mut moment_bound = 0.0;
    let far = orbit.far();
    let streamed = far.end - far.start;
    if streamed > 0 {
        let t_max = far.d_max / (2.0 * eps);
        if t_max > 0.5 {
            return Err(Error::OrbitTooShort(format!(
                "streamed gaps reach {t_max:.3}·2ε; store more iterates for ε = {eps:e}"
            )));
        }
        // 2ε²G(t) = 2εd − d³/(12ε) − d⁵/(320ε³) − …
        area.add(2.0 * eps * far.sum_d[0]);
        area.add(-far.sum_d[1] / (12.0 * eps));
        area.add(-far.sum_d[2] / (320.0 * eps.powi(3)));
        let m = far.sum_dz[0] * eps - far.sum_dz[1] / (24.0 * eps) - far.sum_dz[2] / (640.0 * eps.powi(3));
        moment.add(m);
        // remaining terms are at most t⁷/56 per unit, summed geometrically
        let rest = t_max.powi(6) / (56.0 * (1.0 - t_max * t_max));
        area_bound += eps * rest * far.sum_d[0];
        moment_bound += eps * rest * far.sum_d[0] * 2.0 * pts[far.start].norm();
    }

    let z_end = far.z_end;
    let r_end = z_end.norm();
    if orbit.is_closed() {
        // Σ (z_m − z_{m+1}) over the whole nucleus telescopes to z_{n_ε}
        moment.add(pts[n_eps] * (-FRAC_PI_2 * eps2));
        if r_end > 0.0 {
            // remaining orbit along the chord to 0 with gaps d(r) = d_next·(r/r_end)^{k+1}:
            // Σd → r_end, Σd³ → d_next²r_end/(2k+3), Σd(z+z') → r_end·z_end,
            // Σd³(z+z') → 2d_next²r_end·z_end/(2k+4)
            let germ = orbit.germ();
            let k = germ.k() as f64;
            let d_next = (germ.eval(z_end) - z_end).norm().min(2.0 * eps);
            let model = germ.a1().norm() * r_end.powf(k + 1.0);
            let rho = 2.0 * (d_next / model - 1.0).abs();
            let turn = (2.0 * far.end_turn).min(1.0);
            let stretch = 1.0 / turn.cos() - 1.0;
            let cubic_area = d_next * d_next * r_end / (12.0 * eps * (2.0 * k + 3.0));
            let cubic_moment = d_next * d_next * r_end / (12.0 * eps * (2.0 * k + 4.0));
            area.add(2.0 * eps * r_end);
            area.add(-cubic_area);
            moment.add(z_end * (eps * r_end - cubic_moment));
            // the orbit bends off the chord by δ(r) = z − ν|z|
            let nu = orbit.direction().nu;
            let delta_end = z_end - nu * r_end;
            let (shape, shape_err) = bend_shape(&far.marks, z_end, nu);
            moment.add(delta_end * (eps * r_end * shape));
            let quintic = d_next.powi(4) * r_end / (320.0 * eps.powi(3));
            area_bound += 2.0 * eps * r_end * stretch + (rho + stretch) * cubic_area + quintic;
            moment_bound += eps * r_end * (r_end * stretch + delta_end.norm() * shape_err)
                + (rho + turn) * cubic_moment * r_end
                + quintic * r_end;
        }
    } else {
        moment.add((pts[n_eps] - z_end) * (-FRAC_PI_2 * eps2));
    }

    let total_area = area.value();
    let nucleus_moment = moment.value();
    Ok(Decomposition {
        n_eps,
        tail_area: tail_area(n_eps, eps),
        tail_moment,
        nucleus_area: total_area,
        nucleus_moment,
        area_bound,
        moment_bound,
        points_used: pts.len() + streamed,
    })
}

/// Moment of the closure relative to the chord, per unit `ε·r_end·δ_end`.
///
/// Models the offset from the tangent ray as `δ(r) = δ_end·(r/r_end)^p` with
/// `p` read off the last mark, so `2∫δ dr − r_end·δ_end = r_end·δ_end·(1−p)/(1+p)`.
/// The error is the change of that factor against the exponent of the
/// previous pair of marks, plus the rotation of `δ` between marks.
fn bend_shape(marks: &[Complex64], z_end: Complex64, nu: Complex64) -> (f64, f64) {
    let shape = |p: f64| (1.0 - p) / (1.0 + p);
    let delta = |z: Complex64| z - nu * z.norm();
    let r_end = z_end.norm();
    let outer: Vec<Complex64> = marks.iter().copied().filter(|m| m.norm() >= 1.5 * r_end).collect();
    let d_end = delta(z_end);
    if outer.len() < 2 || d_end.norm() <= 1e-12 * r_end {
        return (0.0, 1.0);
    }
    let (m1, m2) = (outer[outer.len() - 2], outer[outer.len() - 1]);
    let (d1, d2) = (delta(m1), delta(m2));
    if d2.norm() == 0.0 || d1.norm() == 0.0 {
        return (0.0, 1.0);
    }
    let exponent = |da: Complex64, ra: f64, db: Complex64, rb: f64| ((da.norm() / db.norm()).ln() / (ra / rb).ln()).clamp(0.5, 8.0);
    let p_inner = exponent(d2, m2.norm(), d_end, r_end);
    let p_outer = exponent(d1, m1.norm(), d2, m2.norm());
    let rotation = (d2 / d_end).arg().abs();
    let err = (shape(p_inner) - shape(p_outer)).abs() + rotation;
    (shape(p_inner), err.min(1.0))
}

/// Nucleus area and its absolute error bound.
pub fn nucleus_area(orbit: &Orbit, eps: f64, budget: f64) -> Result<(f64, f64)> {
    let dec = decompose(orbit, eps)?;
    let allowed = allowed_error(eps, budget);
    if dec.area_bound > allowed {
        return Err(Error::BudgetUnreachable {
            bound: dec.area_bound,
            allowed,
        });
    }
    Ok((dec.nucleus_area, dec.area_bound))
}

/// Area, center of mass and directed area `A·t/|t|` of the ε-neighborhood.
pub fn directed_area(orbit: &Orbit, eps: f64, budget: f64) -> Result<NeighborhoodMeasurement> {
    let dec = decompose(orbit, eps)?;
    let allowed = allowed_error(eps, budget);
    if dec.area_bound > allowed {
        return Err(Error::BudgetUnreachable {
            bound: dec.area_bound,
            allowed,
        });
    }
    let area = dec.tail_area + dec.nucleus_area;
    let moment = dec.tail_moment + dec.nucleus_moment;
    if moment.norm() == 0.0 {
        return Err(Error::DegenerateCentroid);
    }
    // a moment error moves A·t/|t| by up to δt·A/|t|
    let directed_bound = dec.area_bound + dec.moment_bound * area / moment.norm();
    if directed_bound > allowed {
        return Err(Error::BudgetUnreachable {
            bound: directed_bound,
            allowed,
        });
    }
    Ok(NeighborhoodMeasurement {
        eps,
        n_eps: dec.n_eps,
        area,
        centroid: moment / area,
        directed_area: moment * (area / moment.norm()),
        tail_area: dec.tail_area,
        nucleus_area: dec.nucleus_area,
        closure_error_bound: dec.area_bound,
        moment_error_bound: dec.moment_bound,
        points_used: dec.points_used,
    })
}

/// Outcome of the geometric check that the decomposition applies.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChainCheck {
    pub eps: f64,
    /// Pairs of tail discs (including the first nucleus disc) that overlap.
    pub tail_overlaps: usize,
    /// Nucleus pairs `(i, j)`, `j < i − 1`, whose lens is not inside disc `i − 1`.
    pub lens_violations: usize,
    pub pairs_checked: usize,
    /// Nucleus points whose look-back window still overlapped at its far end.
    pub window_saturated: usize,
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.tail_overlaps == 0 && self.lens_violations == 0
    }
}

/// Largest distance from `c` to a point of `K(p, ε) ∩ K(q, ε)`.
fn lens_farthest(p: Complex64, q: Complex64, c: Complex64, eps: f64) -> f64 {
    let h = (p - q).norm();
    let mid = (p + q) * 0.5;
    let half = (eps * eps - h * h / 4.0).max(0.0).sqrt();
    let perp = Complex64::new(0.0, 1.0) * (q - p) / h;
    let mut best = (mid + perp * half - c).norm().max((mid - perp * half - c).norm());
    // antipode of c on each boundary circle, if it lies on the lens arc
    for (center, other) in [(p, q), (q, p)] {
        let away = center - c;
        if away.norm() == 0.0 {
            best = best.max(eps);
            continue;
        }
        let cand = center + away * (eps / away.norm());
        if (cand - other).norm() <= eps {
            best = best.max((cand - c).norm());
        }
    }
    best
}

/// Verifies, for stored iterates, that tail discs are pairwise disjoint and
/// that each nucleus disc meets earlier discs only inside its predecessor.
/// Lens containment is tested for look-back distances up to `window`.
pub fn check_chain_geometry(orbit: &Orbit, eps: f64, window: usize) -> Result<ChainCheck> {
    let n_eps = critical_index(orbit, eps)?;
    let pts = orbit.points();
    let two_eps = 2.0 * eps;
    let mut report = ChainCheck {
        eps,
        ..ChainCheck::default()
    };

    // sweep along the attracting direction
    let nu = orbit.direction().nu;
    let head = &pts[..=n_eps.min(pts.len() - 1)];
    let mut order: Vec<(f64, usize)> = head
        .iter()
        .enumerate()
        .map(|(i, z)| ((z * nu.conj()).re, i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (a, &(pa, ia)) in order.iter().enumerate() {
        for &(pb, ib) in &order[a + 1..] {
            if pb - pa >= two_eps {
                break;
            }
            report.pairs_checked += 1;
            if (head[ia] - head[ib]).norm() < two_eps {
                report.tail_overlaps += 1;
            }
        }
    }

    let tol = eps * (1.0 + 1e-9);
    for i in (n_eps + 2)..pts.len() {
        let lo = i.saturating_sub(window);
        for j in (lo..i - 1).rev() {
            if (pts[i] - pts[j]).norm() >= two_eps {
                break;
            }
            report.pairs_checked += 1;
            if j == lo && lo > 0 {
                report.window_saturated += 1;
            }
            if lens_farthest(pts[i], pts[j], pts[i - 1], eps) > tol {
                report.lens_violations += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate_orbit, StopRule};
    use crate::powerseries::{Germ, TruncatedSeries};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zz2() -> Germ {
        Germ::from_series(TruncatedSeries::from_real(&[1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn crescent_area_endpoints_and_midpoint() {
        assert_eq!(crescent_area(0.0, 0.3).unwrap(), 0.0);
        assert!((crescent_area(0.6, 0.3).unwrap() - PI * 0.09).abs() < 1e-15);
        // d = ε√2, ε = 1: t = 1/√2 so 2(1/2 + π/4)
        let v = crescent_area(2f64.sqrt(), 1.0).unwrap();
        assert!((v - (1.0 + FRAC_PI_2)).abs() < 1e-14);
        assert!(crescent_area(-1e-9, 1.0).is_err());
        assert!(crescent_area(2.0 + 1e-9, 1.0).is_err());
    }

    #[test]
    fn crescent_area_is_increasing() {
        let mut prev = -1.0;
        for i in 0..=1000 {
            let a = crescent_area(2.0 * i as f64 / 1000.0, 1.0).unwrap();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn crescent_centroid_values() {
        // disjoint case: full disc centered at z
        let z = c(0.3, -0.2);
        assert!((crescent_centroid(z, z + c(0.0, 2.0), 1.0).unwrap() - z).norm() < 1e-15);
        // z = 1, w = 0, ε = 1: moment π·1 − lens·½ with lens = π − A(D)
        let a_d = crescent_area(1.0, 1.0).unwrap();
        let expected = (PI - (PI - a_d) * 0.5) / a_d;
        let got = crescent_centroid(c(1.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert!((got - c(expected, 0.0)).norm() < 1e-14);
        assert!((got.re - 1.3210).abs() < 1e-4);
        let real = crescent_centroid(c(-0.7, 0.0), c(-0.2, 0.0), 0.4).unwrap();
        assert_eq!(real.im, 0.0);
        assert!(crescent_centroid(z, z, 1.0).is_err());
    }

    #[test]
    fn critical_index_examples() {
        let orbit = iterate_orbit(&zz2(), c(-0.5, 0.0), StopRule::points(50)).unwrap();
        assert_eq!(critical_index(&orbit, 0.02).unwrap(), 2);
        assert_eq!(critical_index(&orbit, 0.2).unwrap(), 0);
        // gaps 2^{-n}: 2ε = 2^{-5} = d_5 is not below 2ε, so n_ε = 6
        let f = zz2();
        let mut pts = vec![c(-4.0, 0.0)];
        for n in 0..30 {
            let last = *pts.last().unwrap();
            pts.push(last + 2f64.powi(-n));
        }
        let synthetic = Orbit::from_points(&f, pts).unwrap();
        assert_eq!(critical_index(&synthetic, 2f64.powi(-6)).unwrap(), 6);
        assert_eq!(critical_index(&synthetic, 2f64.powi(-6) * 1.01).unwrap(), 5);
    }

    #[test]
    fn critical_index_requires_deep_enough_orbit() {
        let orbit = iterate_orbit(&zz2(), c(-0.5, 0.0), StopRule::points(3)).unwrap();
        assert!(matches!(critical_index(&orbit, 1e-4), Err(Error::OrbitTooShort(_))));
    }

    #[test]
    fn tail_area_examples() {
        assert_eq!(tail_area(0, 0.1), 0.0);
        assert!((tail_area(5, 0.1) - 0.15707963267948966).abs() < 1e-15);
    }

    #[test]
    fn two_point_set() {
        let f = zz2();
        let (eps, d) = (0.5, 0.3);
        let orbit = Orbit::from_points(&f, vec![c(-1.0, 0.0), c(-1.0 + d, 0.0)]).unwrap();
        let m = directed_area(&orbit, eps, 1.0).unwrap();
        assert_eq!(m.n_eps, 0);
        let expected = PI * eps * eps + crescent_area(d, eps).unwrap();
        assert!((m.area - expected).abs() < 1e-15);
        assert!((m.nucleus_area - expected).abs() < 1e-15);
        // moment: disc at z0 plus crescent at z1
        let cres = crescent_area(d, eps).unwrap();
        let t = PI * eps * eps * c(-1.0, 0.0)
            + crescent_centroid(c(-1.0 + d, 0.0), c(-1.0, 0.0), eps).unwrap() * cres;
        assert!((m.centroid * m.area - t).norm() < 1e-14);
    }

    #[test]
    fn single_point_directed_area() {
        let f = Germ::from_series(TruncatedSeries::from_real(&[1.0, -1.0, 0.0])).unwrap();
        for (z, nu) in [(c(1.0, 0.0), c(1.0, 0.0)), (c(0.0, 1.0), c(0.0, 1.0)), (c(0.0, 3.0), c(0.0, 1.0))] {
            let orbit = Orbit::from_points(&f, vec![z]).unwrap();
            let m = directed_area(&orbit, 0.1, 1.0).unwrap();
            assert!((m.directed_area - nu * (PI * 0.01)).norm() < 1e-16);
            assert!((m.centroid - z).norm() < 1e-15);
        }
    }

    #[test]
    fn streamed_closure_matches_stored_sum() {
        let f = zz2();
        let eps = 1e-3;
        let all = iterate_orbit(&f, c(-0.5, 0.0), StopRule::points(400_000)).unwrap();
        let split = iterate_orbit(
            &f,
            c(-0.5, 0.0),
            StopRule {
                store_gap: Some(DEFAULT_THETA * eps),
                ..StopRule::points(400_000)
            },
        )
        .unwrap();
        assert!(split.points().len() < 2_000);
        let a = directed_area(&all, eps, DEFAULT_BUDGET).unwrap();
        let b = directed_area(&split, eps, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.n_eps, b.n_eps);
        assert!((a.area - b.area).abs() < 1e-15 + b.closure_error_bound, "{} vs {}", a.area, b.area);
        assert!((a.centroid * a.area - b.centroid * b.area).norm() < 1e-15 + b.moment_error_bound);
    }

    #[test]
    fn area_is_additive_and_directed_modulus_is_area() {
        let f = Germ::extended_normal_form(2, c(1.0, 1.0), c(1.0, 1.0), 10).unwrap();
        let z0 = crate::dynamics::attracting_directions(&f)[0].nu * 0.3;
        let orbit = iterate_orbit(
            &f,
            z0,
            StopRule {
                store_gap: Some(DEFAULT_THETA * 1e-4),
                cap: 2_000_000,
                r_floor: 0.0,
                allow_cap: true,
            },
        )
        .unwrap();
        for eps in [1e-4, 1e-3, 1e-2] {
            let m = directed_area(&orbit, eps, DEFAULT_BUDGET).unwrap();
            assert!((m.area - m.tail_area - m.nucleus_area).abs() <= 1e-15 * m.area);
            assert!((m.directed_area.norm() - m.area).abs() <= 1e-14 * m.area);
            assert!(m.closure_error_bound <= DEFAULT_BUDGET * eps * eps * eps.ln().abs());
        }
    }

    #[test]
    fn rotation_and_scaling() {
        let f = zz2();
        let base: Vec<Complex64> = (0..400).map(|n| c(-1.0 / (n as f64 + 2.0), 0.0)).collect();
        let eps = 2e-4;
        let m0 = directed_area(&Orbit::from_points(&f, base.clone()).unwrap(), eps, 1.0).unwrap();
        for u in [c(0.0, 1.0), Complex64::from_polar(1.0, PI / 7.0)] {
            let rotated: Vec<Complex64> = base.iter().map(|z| z * u).collect();
            let g = Germ::from_series(TruncatedSeries::new(vec![c(1.0, 0.0), u.inv(), c(0.0, 0.0)])).unwrap();
            let m = directed_area(&Orbit::from_points(&g, rotated).unwrap(), eps, 1.0).unwrap();
            assert!((m.directed_area - m0.directed_area * u).norm() < 1e-14 * m0.area);
        }
        let lambda = 3.5;
        let scaled: Vec<Complex64> = base.iter().map(|z| z * lambda).collect();
        let m = directed_area(&Orbit::from_points(&f, scaled).unwrap(), eps * lambda, 1.0).unwrap();
        assert!((m.area - m0.area * lambda * lambda).abs() < 1e-13 * m.area);
        let dir = |z: Complex64| z / z.norm();
        assert!((dir(m.centroid) - dir(m0.centroid)).norm() < 1e-14);
    }

    #[test]
    fn chain_structure_holds_on_parabolic_orbits() {
        for (germ, z0) in [
            (zz2(), c(-0.5, 0.0)),
            (Germ::extended_normal_form(2, c(1.0, 0.0), c(1.0, 1.0), 10).unwrap(), c(0.0, 0.3)),
        ] {
            let orbit = iterate_orbit(&germ, z0, StopRule::points(20_000)).unwrap();
            for eps in [3e-3, 1e-3, 3e-4] {
                let check = check_chain_geometry(&orbit, eps, 32).unwrap();
                assert!(check.holds(), "{check:?}");
                assert!(check.pairs_checked > 0);
            }
        }
    }

    #[test]
    fn chain_check_flags_a_folded_chain() {
        // third point returns next to the first: its disc meets disc 0 outside disc 1
        let f = zz2();
        let pts: Vec<Complex64> = [c(0.0, 0.0), c(0.5, 0.0), c(0.25, 0.6)].iter().map(|z| z + c(-1.0, 0.1)).collect();
        let orbit = Orbit::from_points(&f, pts).unwrap();
        let check = check_chain_geometry(&orbit, 0.4, 8).unwrap();
        assert!(!check.holds());
        assert_eq!(check.lens_violations, 1);
    }
}
