//! Asymptotic scale of the directed area, least-squares fitting, Γ and the
//! closed forms of the leading and residual coefficients.
//!
//! For multiplicity `k` the directed area of the ε-neighborhood of an orbit
//! develops as
//!
//! ```text
//! K₁ε^{1+1/(k+1)} + … + K_{k−1}ε^{1+(k−1)/(k+1)}
//!     + K_k ε^{1+k/(k+1)} log ε + S ε^{1+k/(k+1)} + K_{k+1} ε² log ε + o(ε² log ε)
//! ```
//!
//! and the fit appends an `ε²` column to absorb the first unresolved term.
//! Logarithms are natural throughout.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::powerseries::Germ;

/// Largest accepted ratio of extreme singular values after normalization.
pub const CONDITION_LIMIT: f64 = 1e10;

/// One column `ε^power · (log ε)^{log}` of the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisTerm {
    pub power: f64,
    pub log: bool,
}

impl BasisTerm {
    pub fn eval(&self, eps: f64) -> f64 {
        let v = eps.powf(self.power);
        if self.log {
            v * eps.ln()
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleBasis {
    pub k: usize,
    pub terms: Vec<BasisTerm>,
}

impl ScaleBasis {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange("multiplicity k must be at least 1".into()));
        }
        let q = (k + 1) as f64;
        let mut terms: Vec<BasisTerm> = (1..k)
            .map(|i| BasisTerm {
                power: 1.0 + i as f64 / q,
                log: false,
            })
            .collect();
        let top = 1.0 + k as f64 / q;
        terms.push(BasisTerm { power: top, log: true });
        terms.push(BasisTerm { power: top, log: false });
        terms.push(BasisTerm { power: 2.0, log: true });
        terms.push(BasisTerm { power: 2.0, log: false });
        Ok(ScaleBasis { k, terms })
    }

    /// The scale followed by `extra` remainder columns, alternating
    /// `ε^{2+j/(k+1)} log ε` and `ε^{2+j/(k+1)}` for `j = 1, 2, …`.
    pub fn with_remainder(k: usize, extra: usize) -> Result<Self> {
        let mut basis = Self::new(k)?;
        let q = (k + 1) as f64;
        for i in 0..extra {
            basis.terms.push(BasisTerm {
                power: 2.0 + (1 + i / 2) as f64 / q,
                log: i % 2 == 0,
            });
        }
        Ok(basis)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Column of the leading coefficient `K₁`.
    pub fn k1_index(&self) -> usize {
        if self.k == 1 {
            1
        } else {
            0
        }
    }

    /// Column of the free coefficient `S` of `ε^{1+k/(k+1)}`.
    pub fn s_index(&self) -> usize {
        self.k
    }

    /// Column of the residual coefficient `K_{k+1}` of `ε² log ε`.
    pub fn residual_index(&self) -> usize {
        self.k + 1
    }

    pub fn eval(&self, eps: f64) -> Vec<f64> {
        self.terms.iter().map(|t| t.eval(eps)).collect()
    }
}

/// Basis values at `eps`, ordered from the dominant term down.
pub fn scale_basis(k: usize, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(ScaleBasis::new(k)?.eval(eps))
}

/// `2 − slope` of the ordinary least-squares line through `(log ε, log area)`.
pub fn estimate_box_dimension(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 8 {
        return Err(Error::InsufficientSamples {
            needed: 8,
            got: samples.len(),
        });
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(e, _)| (lo.min(e), hi.max(e)));
    if !(hi >= 10.0 * lo) {
        return Err(Error::InsufficientSamples { needed: 10, got: (hi / lo) as usize });
    }
    if samples.iter().any(|&(e, a)| !(e > 0.0 && a > 0.0)) {
        return Err(Error::OutOfRange("ε and area must be positive".into()));
    }
    let n = samples.len() as f64;
    let xm = samples.iter().map(|s| s.0.ln()).sum::<f64>() / n;
    let ym = samples.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(e, a) in samples {
        let dx = e.ln() - xm;
        sxy += dx * (a.ln() - ym);
        sxx += dx * dx;
    }
    Ok(2.0 - sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub k: usize,
    pub basis: ScaleBasis,
    #[serde(with = "crate::serde_complex::vec")]
    pub coefficients: Vec<Complex64>,
    /// Standard errors of the real and imaginary parts of each coefficient.
    pub stderr: Vec<[f64; 2]>,
    /// Residual 2-norm of the fit in units of `ε^{1+1/(k+1)}`.
    pub residual_norm: f64,
    pub condition_number: f64,
    pub eps_range: [f64; 2],
    pub sample_count: usize,
}

impl AsymptoticFit {
    pub fn k1(&self) -> Complex64 {
        self.coefficients[self.basis.k1_index()]
    }

    pub fn kk1(&self) -> Complex64 {
        self.coefficients[self.basis.residual_index()]
    }

    pub fn s(&self) -> Complex64 {
        self.coefficients[self.basis.s_index()]
    }

    pub fn k1_stderr(&self) -> [f64; 2] {
        self.stderr[self.basis.k1_index()]
    }

    pub fn kk1_stderr(&self) -> [f64; 2] {
        self.stderr[self.basis.residual_index()]
    }
}

/// Least-squares fit of measured directed areas onto the scale of
/// multiplicity `k`. Rows are divided by `ε^{1+1/(k+1)}` and columns by
/// their norms; real and imaginary parts share the real design matrix.
pub fn fit_directed_area(samples: &[(f64, Complex64)], k: usize) -> Result<AsymptoticFit> {
    fit_with_basis(samples, ScaleBasis::new(k)?)
}

/// [`fit_directed_area`] on an explicit basis, such as one from
/// [`ScaleBasis::with_remainder`].
pub fn fit_with_basis(samples: &[(f64, Complex64)], basis: ScaleBasis) -> Result<AsymptoticFit> {
    let k = basis.k;
    let m = basis.len();
    let n = samples.len();
    if n < 2 * m {
        return Err(Error::InsufficientSamples { needed: 2 * m, got: n });
    }
    let lead = 1.0 + 1.0 / (k + 1) as f64;
    let mut design = DMatrix::<f64>::zeros(n, m);
    let mut rhs = DMatrix::<f64>::zeros(n, 2);
    let mut range = [f64::INFINITY, 0.0f64];
    for (r, &(eps, value)) in samples.iter().enumerate() {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::OutOfRange(format!("eps must lie in (0, 1), got {eps}")));
        }
        let row = basis.eval(eps);
        let s = eps.powf(lead);
        for (c, v) in row.iter().enumerate() {
            design[(r, c)] = v / s;
        }
        rhs[(r, 0)] = value.re / s;
        rhs[(r, 1)] = value.im / s;
        range = [range[0].min(eps), range[1].max(eps)];
    }
    let norms: Vec<f64> = (0..m).map(|c| design.column(c).norm()).collect();
    for (c, &nc) in norms.iter().enumerate() {
        if nc == 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        design.column_mut(c).scale_mut(1.0 / nc);
    }
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned(condition));
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let resid = &rhs - &design * &sol;
    let dof = (n - m).max(1) as f64;
    let var = [resid.column(0).norm_squared() / dof, resid.column(1).norm_squared() / dof];
    // diag((AᵀA)⁻¹) = Σ_j V_ij² / σ_j²
    let v_t = svd.v_t.as_ref().expect("requested V");
    let inv_diag: DVector<f64> = DVector::from_fn(m, |i, _| {
        (0..m).map(|j| (v_t[(j, i)] / sv[j]).powi(2)).sum::<f64>()
    });
    let coefficients = (0..m)
        .map(|c| Complex64::new(sol[(c, 0)], sol[(c, 1)]) / norms[c])
        .collect();
    let stderr = (0..m)
        .map(|c| {
            let s = inv_diag[c].sqrt() / norms[c];
            [var[0].sqrt() * s, var[1].sqrt() * s]
        })
        .collect();
    Ok(AsymptoticFit {
        k,
        basis,
        coefficients,
        stderr,
        residual_norm: resid.norm(),
        condition_number: condition,
        eps_range: range,
        sample_count: n,
    })
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `x > 0`: Lanczos with `g = 7` and nine coefficients on
/// `x ≥ 1/2`, and `Γ(x) = Γ(x + 1)/x` below.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfRange(format!("gamma needs a finite x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok(lanczos(x + 1.0) / x);
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

fn g(x: f64) -> f64 {
    gamma(x).expect("positive argument")
}

/// `x = 1/(2k+2)`, the shift appearing in every closed form.
fn half_shift(k: usize) -> f64 {
    1.0 / (2 * k + 2) as f64
}

/// `Q(k)`: the ratio of Γ-quotients in the imaginary part of `K_{k+1}`.
fn q_ratio(k: usize) -> f64 {
    let x = half_shift(k);
    let sp = PI.sqrt();
    (g(0.5 + x) / g(2.0 + x) - sp) / (g(2.0 * x) / g(1.5 + 2.0 * x) + sp)
}

/// `|K₁|·(|a₁|/2)^{1/(k+1)}`.
pub(crate) fn k1_constant(k: usize) -> f64 {
    let x = half_shift(k);
    (k + 1) as f64 / k as f64 * PI.sqrt() * g(1.0 + x) / g(1.5 + x)
}

/// `(k/√π)·Γ(3/2 + x)/Γ(x)`, so that `|K₁| = (2/|a₁|)^{1/(k+1)}/(2B)`.
pub(crate) fn b_constant(k: usize) -> f64 {
    let x = half_shift(k);
    k as f64 / PI.sqrt() * g(1.5 + x) / g(x)
}

/// `φ(k) = k(k+1)/(k−1)·π^{−1/2}·Q(k)^{−1}·Γ(1+x)/Γ(3/2+x)` with
/// `Q(k) = [Γ(1/2+x)/Γ(2+x) − √π] / [Γ(2x)/Γ(3/2+2x) + √π]`; singular at
/// `k = 1`. Not used by the recovery, which inverts [`closed_form_kk1`]
/// through [`transverse_coefficient`].
pub fn phi_k(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Degenerate(format!("phi has a pole at k = {k}")));
    }
    let x = half_shift(k);
    let kf = k as f64;
    Ok(kf * (kf + 1.0) / (kf - 1.0) / PI.sqrt() / q_ratio(k) * g(1.0 + x) / g(1.5 + x))
}

/// `T(k)` with `Im(K_{k+1}/ν) = T(k)·Im(a − (k+1)/2)`:
///
/// ```text
/// T(k) = (k−1)/(k(k+1)) · √π · Γ(x)/Γ(3/2+x) · Γ(1/2+x)/Γ(2+x) · Γ(3/2+2x)/Γ(2x),  x = 1/(2k+2).
/// ```
///
/// It depends on `k` only, vanishes at `k = 1`, and is independent of `|a₁|`
/// as the residual coefficient must be under `z ↦ λz`, `λ > 0`.
pub fn transverse_coefficient(k: usize) -> f64 {
    let x = half_shift(k);
    let kf = k as f64;
    (kf - 1.0) / (kf * (kf + 1.0)) * PI.sqrt() * g(x) / g(1.5 + x) * g(0.5 + x) / g(2.0 + x) * g(1.5 + 2.0 * x) / g(2.0 * x)
}

/// Leading coefficient `K₁` of the directed area.
pub fn closed_form_k1(k: usize, a1: Complex64, nu_a: Complex64) -> Complex64 {
    nu_a * (k1_constant(k) * (2.0 / a1.norm()).powf(1.0 / (k + 1) as f64))
}

/// Directed Minkowski content of an orbit of `f` started at `z0`, built from
/// `B(k)` and the attracting direction of the sector containing `z0`.
pub fn directed_minkowski_content(f: &Germ, z0: Complex64) -> Result<Complex64> {
    let dir = crate::dynamics::select_sector(f, z0)?;
    let k = f.k();
    let m = (2.0 / f.a1().norm()).powf(1.0 / (k + 1) as f64) / (2.0 * b_constant(k));
    Ok(dir.nu * m)
}

/// Residual coefficient `K_{k+1}` for `z + a₁z^{k+1} + a_{k+1}z^{2k+1}`:
/// `ν·[−π/(k+1)·Re w + i·T(k)·Im w]` with `w = a_{k+1}/a₁² − (k+1)/2`.
pub fn closed_form_kk1(k: usize, a1: Complex64, a_k1: Complex64, nu_a: Complex64) -> Complex64 {
    let kf = k as f64;
    let w = a_k1 / (a1 * a1) - (kf + 1.0) / 2.0;
    nu_a * Complex64::new(-PI / (kf + 1.0) * w.re, transverse_coefficient(k) * w.im)
}

/// [`closed_form_kk1`] for a germ, which must have `a₂ = … = a_k = 0`.
pub fn closed_form_kk1_for(f: &Germ, nu_a: Complex64) -> Result<Complex64> {
    if !f.has_vanishing_intermediate() {
        return Err(Error::RequiresNormalForm);
    }
    let k = f.k();
    Ok(closed_form_kk1(k, f.a1(), f.series().coeff(2 * k + 1), nu_a))
}
