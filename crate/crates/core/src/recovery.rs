//! Invariants from fractal data, and the end-to-end pipelines.
//!
//! [`analyze`] runs orbit → directed areas → box dimension → multiplicity →
//! asymptotic fit → `(a₁, a)` and sets the result beside the invariants
//! reduced algebraically from the germ's series. [`verify_invariance`] repeats
//! the analysis on conjugated germs.

use std::f64::consts::PI;

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    b_constant, estimate_box_dimension, fit_with_basis, k1_constant, transverse_coefficient, AsymptoticFit, ScaleBasis,
};
use crate::dynamics::{attracting_directions, iterate_orbit, select_sector, Orbit, StopRule};
use crate::error::{Error, Result};
use crate::geometry::{directed_area, NeighborhoodMeasurement, DEFAULT_BUDGET, DEFAULT_THETA};
use crate::powerseries::{comp_inverse, conjugate, extended_normal_form, FormalInvariants, Germ, InvariantSource, TruncatedSeries};

/// Relative tolerance on `|â₁/a₁ − 1|`.
pub const A1_TOLERANCE: f64 = 0.02;
/// Absolute tolerance on `Re â`.
pub const RE_A_TOLERANCE: f64 = 0.1;
/// Tolerance on `Im â` relative to `max(1, |Im a|)`, `k ≥ 2`.
pub const IM_A_TOLERANCE: f64 = 0.15;
/// Relative tolerance on `K₁` between conjugate germs.
pub const CONTENT_TOLERANCE: f64 = 0.02;

/// Fractal data of one orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractalProperties {
    pub dim_b: f64,
    /// Minkowski content: leading coefficient of the (undirected) area.
    pub m: f64,
    /// Directed Minkowski content `K₁`.
    #[serde(with = "crate::serde_complex")]
    pub m_c: Complex64,
    /// Directed residual content `K_{k+1}`.
    #[serde(with = "crate::serde_complex")]
    pub r_c: Complex64,
}

/// `k = round(d/(1 − d))`, rejected when the unrounded value is 0.2 or more
/// away from an integer.
pub fn recover_k(dim_b: f64) -> Result<usize> {
    if !(dim_b > 0.25 && dim_b < 0.99) {
        return Err(Error::OutOfRange(format!("box dimension {dim_b} outside (0.25, 0.99)")));
    }
    let raw = dim_b / (1.0 - dim_b);
    let k = raw.round();
    if (raw - k).abs() >= 0.2 {
        return Err(Error::AmbiguousK(raw));
    }
    Ok(k as usize)
}

/// `a₁ = −(2M_c)^{−k} / (M·B^{k+1})` with `B = (k/√π)·Γ(3/2+x)/Γ(x)`,
/// `x = 1/(2k+2)`.
pub fn recover_a1(k: usize, m_c: Complex64, m: f64) -> Complex64 {
    let b = b_constant(k);
    -(m_c * 2.0).powi(-(k as i32)) / (m * b.powi(k as i32 + 1))
}

/// `|a₁|` from the Minkowski content alone.
pub fn recover_a1_modulus(k: usize, m: f64) -> f64 {
    2.0 * (k1_constant(k) / m).powi(k as i32 + 1)
}

/// Residual invariant `a` from `(M_c, M, R_c)`.
///
/// With `u = R_c/ν` and `ν = M_c/|M_c|`, `Re a = (k+1)/2 − (k+1)/π·Re u` and,
/// for `k ≥ 2`, `Im a = Im u / T(k)` with `T` from
/// [`transverse_coefficient`]. At `k = 1`, where `T` vanishes, the imaginary
/// part is taken from `series_im` when given.
pub fn recover_a(k: usize, m_c: Complex64, m: f64, r_c: Complex64, series_im: Option<f64>) -> Result<Complex64> {
    if !(m > 0.0) || m_c.norm() == 0.0 {
        return Err(Error::OutOfRange("Minkowski content must be positive".into()));
    }
    let kf = k as f64;
    let u = r_c / (m_c / m_c.norm());
    let re = (kf + 1.0) / 2.0 - (kf + 1.0) / PI * u.re;
    let im = if k == 1 {
        series_im.ok_or(Error::DegenerateImaginaryPart)?
    } else {
        u.im / transverse_coefficient(k)
    };
    Ok(Complex64::new(re, im))
}

/// Log-spaced ε values.
/// Placement of the grid values between `min` and `max`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl EpsGrid {
    /// Default grid for multiplicity `k` at unit scale `|a₁| = 1`:
    /// two and a half decades ending at `10^{-5.5}`, moved down by one decade
    /// per unit of `k` above 2 so that the remainder stays below the
    /// `K_{k+1}` term across the grid.
    pub fn default_for(k: usize) -> Self {
        let top = DEFAULT_GRID_TOP - (k.saturating_sub(2)) as f64 * DEFAULT_GRID_SHIFT;
        EpsGrid {
            min: 10f64.powf(top - DEFAULT_GRID_SPAN),
            max: 10f64.powf(top),
            count: 64,
            spacing: Spacing::Log,
        }
    }

    /// [`EpsGrid::default_for`] rescaled to the orbit length scale
    /// `|a₁|^{−1/k}` of `f`.
    pub fn default_for_germ(f: &Germ) -> Self {
        let scale = f.a1().norm().powf(-1.0 / f.k() as f64);
        let g = Self::default_for(f.k());
        EpsGrid {
            min: g.min * scale,
            max: (g.max * scale).min(0.5),
            count: g.count,
            spacing: g.spacing,
        }
    }

    pub fn log(min: f64, max: f64, count: usize) -> Self {
        EpsGrid {
            min,
            max,
            count,
            spacing: Spacing::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min < self.max && self.max < 1.0) {
            return Err(Error::OutOfRange(format!("grid needs 0 < min < max < 1, got [{}, {}]", self.min, self.max)));
        }
        if self.count < 8 {
            return Err(Error::InsufficientSamples { needed: 8, got: self.count });
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        match self.spacing {
            Spacing::Log => {
                let (lo, hi) = (self.min.ln(), self.max.ln());
                (0..n).map(|i| (lo + (hi - lo) * t(i)).exp()).collect()
            }
            Spacing::Linear => (0..n).map(|i| self.min + (self.max - self.min) * t(i)).collect(),
        }
    }
}

/// Tail discs below which ε is outside the asymptotic regime.
pub const MIN_TAIL: usize = 10;

const DEFAULT_GRID_TOP: f64 = -5.5;
const DEFAULT_GRID_SPAN: f64 = 2.5;
const DEFAULT_GRID_SHIFT: f64 = 1.0;

/// Remainder columns used when [`AnalysisOptions::remainder_terms`] is unset:
/// one for `k ≤ 2`, none above, where the extra column costs more in
/// conditioning than it removes in bias.
pub fn default_remainder_terms(k: usize) -> usize {
    usize::from(k <= 2)
}

/// Numerical controls of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Closure error allowed per ε, as a fraction of `ε²|log ε|`.
    pub budget: f64,
    /// Iterates are stored while their gap is at least `θ·ε_min`.
    pub theta: f64,
    /// Iteration cap for the streamed part of the orbit.
    pub cap: usize,
    /// Columns appended to the scale beyond `ε²`, see
    /// [`ScaleBasis::with_remainder`]; `None` picks
    /// [`default_remainder_terms`].
    pub remainder_terms: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            theta: DEFAULT_THETA,
            cap: 200_000_000,
            remainder_terms: None,
        }
    }
}

/// `½·A` for the first attracting direction, halved until the orbit stays
/// in the sector for a few thousand steps.
pub fn default_z0(f: &Germ) -> Result<Complex64> {
    let dir = attracting_directions(f)[0];
    let mut z0 = dir.a * 0.5;
    for _ in 0..40 {
        if iterate_orbit(f, z0, StopRule::points(4096)).is_ok() {
            return Ok(z0);
        }
        z0 *= 0.5;
    }
    Err(Error::Degenerate("no attracted initial point along the first attracting direction".into()))
}

/// Iterates deep enough that every ε of `grid` meets the closure budget.
pub fn generate_orbit(f: &Germ, z0: Complex64, grid: &EpsGrid, opts: &AnalysisOptions) -> Result<Orbit> {
    grid.validate()?;
    let eps = grid.min;
    let k = f.k() as f64;
    // start just inside the radius where gaps fall below θ·ε_min
    let r_store = (opts.theta * eps / f.a1().norm()).powf(1.0 / (k + 1.0));
    let mut r_floor = (0.5 * r_store).min(0.5 * z0.norm());
    let mut last_err = None;
    for _ in 0..24 {
        let stop = StopRule {
            r_floor,
            cap: opts.cap,
            store_gap: Some(opts.theta * eps),
            allow_cap: true,
        };
        let orbit = iterate_orbit(f, z0, stop)?;
        match directed_area(&orbit, eps, opts.budget) {
            Ok(_) => return Ok(orbit),
            Err(e @ Error::BudgetUnreachable { .. }) if orbit.reached_floor() => {
                last_err = Some(e);
                r_floor *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("loop ran"))
}

/// Exact measurements of `orbit` at every ε of `grid`, in grid order.
pub fn measure(orbit: &Orbit, grid: &EpsGrid, budget: f64) -> Result<Vec<NeighborhoodMeasurement>> {
    let eps = grid.values();
    #[cfg(feature = "parallel")]
    let iter = eps.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = eps.iter();
    iter.map(|&e| directed_area(orbit, e, budget)).collect()
}

/// Box dimension, fitted coefficients and the fractal properties derived
/// from measurements, for the given multiplicity.
pub fn fit_measurements(measurements: &[NeighborhoodMeasurement], k: usize, remainder_terms: usize) -> Result<(AsymptoticFit, AsymptoticFit)> {
    let basis = ScaleBasis::with_remainder(k, remainder_terms)?;
    let directed: Vec<(f64, Complex64)> = measurements.iter().map(|m| (m.eps, m.directed_area)).collect();
    let area: Vec<(f64, Complex64)> = measurements.iter().map(|m| (m.eps, Complex64::new(m.area, 0.0))).collect();
    Ok((fit_with_basis(&directed, basis.clone())?, fit_with_basis(&area, basis)?))
}

/// Relative and absolute deviations of the fractal recovery from the series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviations {
    pub a1_relative: f64,
    pub re_a_absolute: f64,
    /// `None` for `k = 1`, where the imaginary part is copied from the series.
    pub im_a_absolute: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    #[serde(with = "crate::serde_complex")]
    pub z0: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub attracting_direction: Complex64,
    pub grid: EpsGrid,
    pub options: AnalysisOptions,
    pub orbit_length: usize,
    pub stored_points: usize,
    pub measurements: Vec<NeighborhoodMeasurement>,
    pub k_recovered: usize,
    pub fit: AsymptoticFit,
    pub area_fit: AsymptoticFit,
    pub fractal: FractalProperties,
    pub fractal_recovery: FormalInvariants,
    pub series_oracle: FormalInvariants,
    pub deviations: Deviations,
    pub warnings: Vec<String>,
    pub degraded: bool,
}

/// Full pipeline on the orbit of `f` from `z0` (default: [`default_z0`]).
pub fn analyze(f: &Germ, z0: Option<Complex64>, grid: Option<EpsGrid>, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let z0 = match z0 {
        Some(z) => z,
        None => default_z0(f)?,
    };
    let direction = select_sector(f, z0)?;
    let grid = grid.unwrap_or_else(|| EpsGrid::default_for_germ(f));
    let orbit = generate_orbit(f, z0, &grid, opts)?;
    let measurements = measure(&orbit, &grid, opts.budget)?;
    let mut warnings = Vec::new();

    let areas: Vec<(f64, f64)> = measurements.iter().map(|m| (m.eps, m.area)).collect();
    let dim_b = estimate_box_dimension(&areas)?;
    let k = recover_k(dim_b)?;
    if k != f.k() {
        warnings.push(format!("recovered multiplicity {k} differs from the germ's {}", f.k()));
    }
    let (fit, area_fit) = fit_measurements(&measurements, k, opts.remainder_terms.unwrap_or_else(|| default_remainder_terms(k)))?;
    let fractal = FractalProperties {
        dim_b,
        m: area_fit.k1().re,
        m_c: fit.k1(),
        r_c: fit.kk1(),
    };
    if fractal.m <= 0.0 {
        return Err(Error::Degenerate(format!("fitted Minkowski content {} is not positive", fractal.m)));
    }

    let series = extended_normal_form(f)?;
    let a1 = recover_a1(k, fractal.m_c, fractal.m);
    let series_im = (k == 1).then_some(series.a.im);
    let a = recover_a(k, fractal.m_c, fractal.m, fractal.r_c, series_im)?;
    let m_c_sigma = fit.k1_stderr();
    let r_c_sigma = fit.kk1_stderr();
    let m_sigma = area_fit.k1_stderr()[0];
    let kf = k as f64;
    let a_sigma = [
        (kf + 1.0) / PI * r_c_sigma[0].hypot(r_c_sigma[1]),
        if k == 1 {
            0.0
        } else {
            r_c_sigma[0].hypot(r_c_sigma[1]) / transverse_coefficient(k)
        },
    ];
    let recovered = FormalInvariants {
        k,
        a1,
        a,
        source: InvariantSource::FractalRecovery,
        a1_sigma: Some(a1.norm() * (kf + 1.0) * (m_sigma.max(m_c_sigma[0].hypot(m_c_sigma[1])) / fractal.m)),
        a_sigma: Some(a_sigma),
        im_a_from_series: k == 1,
    };

    let deviations = Deviations {
        a1_relative: (a1 / series.a1 - 1.0).norm(),
        re_a_absolute: (a.re - series.a.re).abs(),
        im_a_absolute: (k >= 2).then(|| (a.im - series.a.im).abs()),
    };
    if deviations.a1_relative >= A1_TOLERANCE {
        warnings.push(format!("a1 deviates from the series value by {:.3e} (relative)", deviations.a1_relative));
    }
    if deviations.re_a_absolute >= RE_A_TOLERANCE {
        warnings.push(format!("Re a deviates from the series value by {:.3e}", deviations.re_a_absolute));
    }
    if let Some(d) = deviations.im_a_absolute {
        if d >= IM_A_TOLERANCE * series.a.im.abs().max(1.0) {
            warnings.push(format!("Im a deviates from the series value by {d:.3e}"));
        }
    }
    if fit.condition_number > 1e8 {
        warnings.push(format!("fit condition number {:.2e}", fit.condition_number));
    }
    let short = measurements.iter().filter(|m| m.n_eps < MIN_TAIL).count();
    if short > 0 {
        warnings.push(format!("{short} grid values of ε have fewer than {MIN_TAIL} tail discs"));
    }

    Ok(AnalysisReport {
        z0,
        attracting_direction: direction.nu,
        grid,
        options: *opts,
        orbit_length: orbit.len(),
        stored_points: orbit.points().len(),
        measurements,
        k_recovered: k,
        fit,
        area_fit,
        fractal,
        fractal_recovery: recovered,
        series_oracle: series,
        degraded: !warnings.is_empty(),
        deviations,
        warnings,
    })
}

/// Comparison of one conjugated germ with the base germ.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugateComparison {
    #[serde(with = "crate::serde_complex::vec")]
    pub conjugator: Vec<Complex64>,
    #[serde(with = "crate::serde_complex")]
    pub z0: Complex64,
    pub dim_b: f64,
    #[serde(with = "crate::serde_complex")]
    pub m_c: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub r_c: Complex64,
    pub dim_b_deviation: f64,
    pub m_c_relative_deviation: f64,
    pub r_c_deviation: f64,
    /// Allowed `|ΔR_c|`: 2% of `max(|R_c|, 1)` or three combined standard errors.
    pub r_c_tolerance: f64,
    pub agrees: bool,
}

/// Outcome of the non-tangent conjugation `z ↦ λz`.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingCheck {
    #[serde(with = "crate::serde_complex")]
    pub lambda: Complex64,
    pub dim_b: f64,
    pub dim_b_deviation: f64,
    /// Measured `|M_c(λ)|/|M_c|`.
    pub content_ratio: f64,
    /// `|λ|^{−k/(k+1)}`.
    pub expected_ratio: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub base: FractalProperties,
    pub k: usize,
    pub conjugates: Vec<ConjugateComparison>,
    pub scaling: Option<ScalingCheck>,
    pub holds: bool,
}

fn properties_for(f: &Germ, z0: Complex64, grid: &EpsGrid, opts: &AnalysisOptions) -> Result<(FractalProperties, AsymptoticFit)> {
    let orbit = generate_orbit(f, z0, grid, opts)?;
    let measurements = measure(&orbit, grid, opts.budget)?;
    let areas: Vec<(f64, f64)> = measurements.iter().map(|m| (m.eps, m.area)).collect();
    let dim_b = estimate_box_dimension(&areas)?;
    let (fit, area_fit) = fit_measurements(&measurements, f.k(), opts.remainder_terms.unwrap_or_else(|| default_remainder_terms(f.k())))?;
    Ok((
        FractalProperties {
            dim_b,
            m: area_fit.k1().re,
            m_c: fit.k1(),
            r_c: fit.kk1(),
        },
        fit,
    ))
}

/// Analyzes `f` and every `φ⁻¹∘f∘φ`, starting the conjugate orbit at
/// `φ⁻¹(z0)` so that both orbits are images of each other, and optionally
/// the scaled germ `f(λz)/λ` from `z0/λ`.
pub fn verify_invariance(
    f: &Germ,
    conjugators: &[TruncatedSeries],
    z0: Option<Complex64>,
    grid: Option<EpsGrid>,
    lambda: Option<Complex64>,
    opts: &AnalysisOptions,
) -> Result<InvarianceReport> {
    for phi in conjugators {
        if (phi.coeff(1) - 1.0).norm() > 1e-12 {
            return Err(Error::OutOfRange("conjugators must be tangent to the identity".into()));
        }
    }
    let z0 = match z0 {
        Some(z) => z,
        None => common_start(f, conjugators)?,
    };
    let k = f.k();
    let grid = grid.unwrap_or_else(|| EpsGrid::default_for_germ(f));
    let (base, base_fit) = properties_for(f, z0, &grid, opts)?;

    let run = |phi: &TruncatedSeries| -> Result<ConjugateComparison> {
        let phi = phi.truncate(f.order());
        let g = conjugate(f, &phi)?;
        let w0 = newton_preimage(&phi, z0)?;
        let (p, fit) = properties_for(&g, w0, &grid, opts)?;
        let dr = (p.r_c - base.r_c).norm();
        let s1 = base_fit.kk1_stderr();
        let s2 = fit.kk1_stderr();
        let combined = (s1[0].powi(2) + s1[1].powi(2) + s2[0].powi(2) + s2[1].powi(2)).sqrt();
        let r_tol = (CONTENT_TOLERANCE * base.r_c.norm().max(1.0)).max(3.0 * combined);
        let dm = (p.m_c - base.m_c).norm() / base.m_c.norm();
        let dd = (p.dim_b - base.dim_b).abs();
        Ok(ConjugateComparison {
            conjugator: phi.coeffs().to_vec(),
            z0: w0,
            dim_b: p.dim_b,
            m_c: p.m_c,
            r_c: p.r_c,
            dim_b_deviation: dd,
            m_c_relative_deviation: dm,
            r_c_deviation: dr,
            r_c_tolerance: r_tol,
            agrees: dm < CONTENT_TOLERANCE && dr <= r_tol && dd < 0.02,
        })
    };
    #[cfg(feature = "parallel")]
    let conjugates: Vec<ConjugateComparison> = conjugators.par_iter().map(run).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let conjugates: Vec<ConjugateComparison> = conjugators.iter().map(run).collect::<Result<_>>()?;

    let scaling = match lambda {
        None => None,
        Some(lambda) => {
            let phi = TruncatedSeries::monomial(f.order(), 1, lambda);
            let g = conjugate(f, &phi)?;
            let scaled_grid = scale_grid(&grid, lambda.norm());
            let (p, _) = properties_for(&g, z0 / lambda, &scaled_grid, opts)?;
            let ratio = p.m_c.norm() / base.m_c.norm();
            let expected = lambda.norm().powf(-(k as f64) / (k as f64 + 1.0));
            let dd = (p.dim_b - base.dim_b).abs();
            Some(ScalingCheck {
                lambda,
                dim_b: p.dim_b,
                dim_b_deviation: dd,
                content_ratio: ratio,
                expected_ratio: expected,
                agrees: (ratio / expected - 1.0).abs() < CONTENT_TOLERANCE && dd < 0.02,
            })
        }
    };
    let holds = conjugates.iter().all(|c| c.agrees) && scaling.as_ref().is_none_or(|s| s.agrees);
    Ok(InvarianceReport {
        base,
        k,
        conjugates,
        scaling,
        holds,
    })
}

/// Grid that the orbit `z_n/λ` sees in the same regime as `grid` sees `z_n`.
fn scale_grid(grid: &EpsGrid, modulus: f64) -> EpsGrid {
    EpsGrid {
        min: grid.min / modulus,
        max: (grid.max / modulus).min(0.5),
        count: grid.count,
        spacing: grid.spacing,
    }
}

/// [`default_z0`], halved until every conjugator has a preimage of it within
/// half its modulus.
fn common_start(f: &Germ, conjugators: &[TruncatedSeries]) -> Result<Complex64> {
    let mut z0 = default_z0(f)?;
    for _ in 0..40 {
        let near = |phi: &TruncatedSeries| newton_preimage(phi, z0).is_ok_and(|w| (w - z0).norm() < 0.5 * z0.norm());
        if conjugators.iter().all(near) {
            return Ok(z0);
        }
        z0 *= 0.5;
    }
    Err(Error::Degenerate("no initial point with preimages under every conjugator".into()))
}

/// Solves `φ(w) = z` near `w = z`, starting from the series inverse.
fn newton_preimage(phi: &TruncatedSeries, z: Complex64) -> Result<Complex64> {
    let inv = comp_inverse(phi)?;
    let mut w = inv.eval(z);
    let deriv: Vec<Complex64> = phi.coeffs().iter().enumerate().map(|(i, c)| c * (i + 1) as f64).collect();
    for _ in 0..50 {
        let fw = phi.eval(w) - z;
        let mut dw = Complex64::new(0.0, 0.0);
        for c in deriv.iter().rev() {
            dw = dw * w + c;
        }
        let step = fw / dw;
        w -= step;
        if step.norm() <= 1e-16 * w.norm() {
            break;
        }
    }
    if !w.is_finite() || (phi.eval(w) - z).norm() > 1e-12 * z.norm() {
        return Err(Error::Degenerate(format!("no preimage of {z} under the conjugator")));
    }
    Ok(w)
}
