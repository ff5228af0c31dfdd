//! Browser bindings: orbit and ε-discs, area curve with recovered
//! invariants, and the series invariants of a germ.
//!
//! Germs and points cross the boundary as flat `[re, im, re, im, …]`
//! arrays. The `*_impl` functions hold the logic and are usable natively.

use parafrac::dynamics::{iterate_orbit, StopRule};
use parafrac::powerseries::{extended_normal_form, Germ, TruncatedSeries};
use parafrac::recovery::{analyze, default_z0, AnalysisOptions, EpsGrid};
use parafrac::Complex64;
use wasm_bindgen::prelude::*;

/// Most iterates returned by [`orbit`].
pub const MAX_ORBIT_POINTS: usize = 200_000;

fn pairs(flat: &[f64]) -> Result<Vec<Complex64>, String> {
    if !flat.len().is_multiple_of(2) {
        return Err("expected an even number of values (re, im pairs)".into());
    }
    Ok(flat.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn flatten(zs: &[Complex64]) -> Vec<f64> {
    zs.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Germ from `c₁, c₂, …`, padded with zeros to the default order.
pub fn germ_from(coeffs: &[f64]) -> Result<Germ, String> {
    let c = pairs(coeffs)?;
    if c.is_empty() {
        return Err("no coefficients".into());
    }
    let series = TruncatedSeries::new(c);
    let n = series.order();
    let probe = Germ::from_series(series.truncate(2 * n + 1)).map_err(|e| e.to_string())?;
    Germ::from_series(series.truncate(n.max(Germ::default_order(probe.k())))).map_err(|e| e.to_string())
}

fn start(f: &Germ, z0: &[f64]) -> Result<Complex64, String> {
    match pairs(z0)?.first() {
        Some(z) => Ok(*z),
        None => default_z0(f).map_err(|e| e.to_string()),
    }
}

pub fn orbit_impl(coeffs: &[f64], z0: &[f64], n: usize) -> Result<Vec<f64>, String> {
    let f = germ_from(coeffs)?;
    let z0 = start(&f, z0)?;
    let o = iterate_orbit(&f, z0, StopRule::points(n.clamp(2, MAX_ORBIT_POINTS))).map_err(|e| e.to_string())?;
    Ok(flatten(o.points()))
}

/// Result of [`analyze_curve`].
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Analysis {
    eps: Vec<f64>,
    area: Vec<f64>,
    directed: Vec<f64>,
    invariants: Vec<f64>,
    series: Vec<f64>,
    warnings: String,
}

#[wasm_bindgen]
impl Analysis {
    pub fn eps(&self) -> Vec<f64> {
        self.eps.clone()
    }
    pub fn area(&self) -> Vec<f64> {
        self.area.clone()
    }
    /// Directed areas as `[re, im, …]`.
    pub fn directed(&self) -> Vec<f64> {
        self.directed.clone()
    }
    /// `[dim_B, k, Re a₁, Im a₁, Re a, Im a]` from the fit.
    pub fn invariants(&self) -> Vec<f64> {
        self.invariants.clone()
    }
    /// `[k, Re a₁, Im a₁, Re a, Im a]` from the series.
    pub fn series(&self) -> Vec<f64> {
        self.series.clone()
    }
    pub fn warnings(&self) -> String {
        self.warnings.clone()
    }
}

fn series_vec(f: &Germ) -> Result<Vec<f64>, String> {
    let s = extended_normal_form(f).map_err(|e| e.to_string())?;
    Ok(vec![s.k as f64, s.a1.re, s.a1.im, s.a.re, s.a.im])
}

pub fn analyze_impl(coeffs: &[f64], z0: &[f64], eps_min: f64, eps_max: f64, count: usize) -> Result<Analysis, String> {
    let f = germ_from(coeffs)?;
    let z0 = start(&f, z0)?;
    let grid = EpsGrid::log(eps_min, eps_max, count);
    let r = analyze(&f, Some(z0), Some(grid), &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    let rec = &r.fractal_recovery;
    Ok(Analysis {
        eps: r.measurements.iter().map(|m| m.eps).collect(),
        area: r.measurements.iter().map(|m| m.area).collect(),
        directed: r.measurements.iter().flat_map(|m| [m.directed_area.re, m.directed_area.im]).collect(),
        invariants: vec![r.fractal.dim_b, rec.k as f64, rec.a1.re, rec.a1.im, rec.a.re, rec.a.im],
        series: series_vec(&f)?,
        warnings: r.warnings.join("\n"),
    })
}

/// `[min, max]` of the default ε grid of a germ.
pub fn default_grid_impl(coeffs: &[f64]) -> Result<Vec<f64>, String> {
    let g = EpsGrid::default_for_germ(&germ_from(coeffs)?);
    Ok(vec![g.min, g.max])
}

/// `z0` (empty for the default start) and its first `n` iterates.
#[wasm_bindgen]
pub fn orbit(coeffs: &[f64], z0: &[f64], n: usize) -> Result<Vec<f64>, JsError> {
    orbit_impl(coeffs, z0, n).map_err(|e| JsError::new(&e))
}

/// Exact areas over a log grid, box dimension and invariants from the fit.
#[wasm_bindgen]
pub fn analyze_curve(coeffs: &[f64], z0: &[f64], eps_min: f64, eps_max: f64, count: usize) -> Result<Analysis, JsError> {
    analyze_impl(coeffs, z0, eps_min, eps_max, count).map_err(|e| JsError::new(&e))
}

/// `[k, Re a₁, Im a₁, Re a, Im a]` by formal reduction.
#[wasm_bindgen]
pub fn series_invariants(coeffs: &[f64]) -> Result<Vec<f64>, JsError> {
    germ_from(coeffs).and_then(|f| series_vec(&f)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn default_grid(coeffs: &[f64]) -> Result<Vec<f64>, JsError> {
    default_grid_impl(coeffs).map_err(|e| JsError::new(&e))
}
