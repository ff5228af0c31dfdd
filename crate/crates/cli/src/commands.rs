use std::path::Path;

use anyhow::{Context, Result};
use parafrac::dynamics::Orbit;
use parafrac::geometry::directed_area;
use parafrac::oracle::{mc_union_measure, oracle_points, OracleEstimate, MIN_SAMPLES};
use parafrac::powerseries::{extended_normal_form, FormalInvariants, InvariantSource};
use parafrac::recovery::{
    analyze as run_analysis, default_z0, generate_orbit, recover_a, recover_a1, recover_k, verify_invariance, EpsGrid,
    FractalProperties,
};
use parafrac::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Pair, Run};
use crate::output::{json, measurements_csv, Outputs};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    Degraded = 2,
    OracleMismatch = 3,
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn envelope(run: &Run, body: Value) -> Value {
    let mut v = json!({
        "tool": "parafrac",
        "version": VERSION,
        "config": run.raw,
    });
    if let (Value::Object(head), Value::Object(rest)) = (&mut v, body) {
        head.extend(rest);
    }
    v
}

/// Estimated number of iterates from `z0` down to the stop radius used for
/// the smallest ε in use, from `z_n^{-k} ≈ z0^{-k} + k·|a₁|·n`.
pub fn orbit_length_estimate(run: &Run, with_oracle: bool) -> Result<(Complex64, f64, f64)> {
    let f = &run.germ;
    let z0 = match run.z0 {
        Some(z) => z,
        None => default_z0(f)?,
    };
    let k = f.k() as f64;
    let a1 = f.a1().norm();
    let mut eps = run.grid.min;
    if with_oracle {
        eps = run.oracle_eps().unwrap_or_default().iter().copied().fold(eps, f64::min);
    }
    let r_store = (run.options.theta * eps / a1).powf(1.0 / (k + 1.0));
    let r = (0.5 * r_store).min(0.5 * z0.norm());
    let n = (r.powf(-k) - z0.norm().powf(-k)) / (k * a1);
    Ok((z0, r, n.max(0.0)))
}

pub fn dry_run(run: &Run, with_oracle: bool) -> Result<Exit> {
    let (z0, r, n) = orbit_length_estimate(run, with_oracle)?;
    println!(
        "config ok: k = {}, {} grid values in [{:e}, {:e}]",
        run.germ.k(),
        run.grid.count,
        run.grid.min,
        run.grid.max
    );
    println!("orbit length estimate: {n:.0} iterates from z0 = {z0} to radius {r:.3e}");
    Ok(Exit::Ok)
}

pub fn analyze(run: &Run, dir: &Path) -> Result<Exit> {
    let report = run_analysis(&run.germ, run.z0, Some(run.grid), &run.options).context("analysis failed")?;
    let oracle = if run.config.oracle.enabled {
        Some(oracle_compare(run, None)?)
    } else {
        None
    };

    let mut body = serde_json::to_value(&report)?;
    let obj = body.as_object_mut().expect("report serializes to an object");
    obj.remove("measurements");
    let series = obj.remove("series_oracle");
    let fractal = obj.remove("fractal_recovery");
    obj.insert("invariants".into(), json!({ "series": series, "fractal": fractal }));
    if let Some(o) = &oracle {
        obj.insert("oracle".into(), serde_json::to_value(o)?);
    }

    let out = &run.config.output;
    let mut files = Outputs::default();
    files.add(out.measurements.clone(), measurements_csv(&report.measurements)?);
    files.add(out.report.clone(), json(&envelope(run, body))?);
    files.commit(dir)?;

    println!(
        "k = {}, dim_B = {:.6}, a1 = {} (series {}), a = {} (series {})",
        report.k_recovered,
        report.fractal.dim_b,
        report.fractal_recovery.a1,
        report.series_oracle.a1,
        report.fractal_recovery.a,
        report.series_oracle.a
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if oracle.as_ref().is_some_and(|o| !o.pass) {
        Exit::OracleMismatch
    } else if report.degraded {
        Exit::Degraded
    } else {
        Exit::Ok
    })
}

/// Invariants recovered from the fractal properties of the base orbit.
fn fractal_invariants(props: &FractalProperties, series: &FormalInvariants) -> Result<FormalInvariants> {
    let k = recover_k(props.dim_b)?;
    let series_im = (k == 1).then_some(series.a.im);
    Ok(FormalInvariants {
        k,
        a1: recover_a1(k, props.m_c, props.m),
        a: recover_a(k, props.m_c, props.m, props.r_c, series_im)?,
        source: InvariantSource::FractalRecovery,
        a1_sigma: None,
        a_sigma: None,
        im_a_from_series: k == 1,
    })
}

pub fn verify(run: &Run, dir: &Path) -> Result<Exit> {
    let conjugators = run.conjugators();
    let report = verify_invariance(&run.germ, &conjugators, run.z0, Some(run.grid), run.lambda(), &run.options)
        .context("invariance check failed")?;
    let series = extended_normal_form(&run.germ)?;
    let fractal = fractal_invariants(&report.base, &series)?;
    let body = json!({
        "invariance": report,
        "invariants": { "series": series, "fractal": fractal },
    });
    let mut files = Outputs::default();
    files.add(run.config.output.invariance.clone(), json(&envelope(run, body))?);
    files.commit(dir)?;

    for c in &report.conjugates {
        println!(
            "conjugator {:?}: dim_B {:+.2e}, K1 {:.2e} (relative), K_(k+1) {:.2e} (tolerance {:.2e}) {}",
            c.conjugator.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
            c.dim_b_deviation,
            c.m_c_relative_deviation,
            c.r_c_deviation,
            c.r_c_tolerance,
            if c.agrees { "ok" } else { "DEVIATES" }
        );
    }
    if let Some(s) = &report.scaling {
        println!(
            "scaling lambda = {}: dim_B {:+.2e}, |K1| ratio {:.6} (expected {:.6}) {}",
            s.lambda,
            s.dim_b_deviation,
            s.content_ratio,
            s.expected_ratio,
            if s.agrees { "ok" } else { "DEVIATES" }
        );
    }
    Ok(if report.holds { Exit::Ok } else { Exit::Degraded })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub eps: f64,
    pub exact_area: f64,
    pub exact_centroid: Pair,
    pub closure_error_bound: f64,
    pub points: usize,
    /// Expected samples inside one isolated disc of radius ε.
    pub disc_hits: f64,
    pub estimate: OracleEstimate,
    /// `|exact − estimate|` in units of the estimate's standard error.
    pub area_sigmas: f64,
    pub centroid_sigmas: Pair,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub requested_samples: usize,
    /// Samples per ε actually drawn, at least [`MIN_SAMPLES`].
    pub samples: usize,
    pub seed: u64,
    pub sigmas: f64,
    pub rows: Vec<OracleRow>,
    pub pass: bool,
}

/// Expected hits per isolated disc below which the sampler misses the
/// discs of the first iterates often enough to bias the centroid beyond
/// its sample standard error.
const MIN_DISC_HITS: f64 = 25.0;

/// `samples·πε²/|box|` for the sampling box of `points`.
fn disc_hits(points: &[Complex64], eps: f64, samples: usize) -> f64 {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let span = hi - lo;
    samples as f64 * std::f64::consts::PI * eps * eps / ((span.re + 2.0 * eps) * (span.im + 2.0 * eps))
}

/// Five ε log-spaced from the smallest grid value the sampler resolves
/// up to the top of the grid.
fn resolved_eps(orbit: &Orbit, grid: &EpsGrid, samples: usize) -> Result<Vec<f64>> {
    let lo = grid
        .values()
        .into_iter()
        .find(|&e| disc_hits(&oracle_points(orbit, e), e, samples) >= MIN_DISC_HITS)
        .with_context(|| {
            format!("no eps of the grid is resolved by {samples} samples; raise oracle.samples, move the grid up or list oracle.eps")
        })?;
    let n = 5;
    let (a, b) = (lo.ln(), grid.max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// Exact area and centroid against the Monte-Carlo sampler. `corrupt`
/// scales the exact area before comparison.
pub fn oracle_compare(run: &Run, corrupt: Option<f64>) -> Result<OracleComparison> {
    let f = &run.germ;
    let oc = &run.config.oracle;
    let samples = oc.samples.max(MIN_SAMPLES);
    if samples != oc.samples {
        eprintln!("warning: oracle.samples = {} raised to the sampler minimum {samples}", oc.samples);
    }
    let z0 = match run.z0 {
        Some(z) => z,
        None => default_z0(f)?,
    };
    let grid = match run.oracle_eps() {
        Some(eps) => {
            let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
            EpsGrid::log(lo, (2.0 * lo).min(0.99), 8)
        }
        None => run.grid,
    };
    let orbit = generate_orbit(f, z0, &grid, &run.options).context("orbit for the oracle comparison")?;
    let eps = match run.oracle_eps() {
        Some(eps) => eps.to_vec(),
        None => resolved_eps(&orbit, &run.grid, samples)?,
    };
    let mut rows = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let m = directed_area(&orbit, e, run.options.budget)?;
        let pts = oracle_points(&orbit, e);
        let hits = disc_hits(&pts, e, samples);
        if hits < MIN_DISC_HITS {
            eprintln!("warning: at eps = {e:e} an isolated disc expects {hits:.1} hits; the standard error is unreliable");
        }
        let est = mc_union_measure(&pts, e, samples, oc.seed.wrapping_add(i as u64))?;
        let area = m.area * corrupt.unwrap_or(1.0);
        let za = (area - est.area).abs() / est.area_stderr;
        let d = m.centroid - est.centroid;
        let zc = [d.re.abs() / est.centroid_stderr, d.im.abs() / est.centroid_stderr];
        let pass = za <= SIGMAS && zc[0] <= SIGMAS && zc[1] <= SIGMAS;
        rows.push(OracleRow {
            eps: e,
            exact_area: area,
            exact_centroid: pair(m.centroid),
            closure_error_bound: m.closure_error_bound,
            points: pts.len(),
            disc_hits: hits,
            estimate: est,
            area_sigmas: za,
            centroid_sigmas: zc,
            pass,
        });
    }
    Ok(OracleComparison {
        requested_samples: oc.samples,
        samples,
        seed: oc.seed,
        sigmas: SIGMAS,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

pub fn oracle_check(run: &Run, dir: &Path, corrupt: Option<f64>) -> Result<Exit> {
    let cmp = oracle_compare(run, corrupt)?;
    let body = json!({ "oracle": cmp });
    let mut files = Outputs::default();
    files.add(run.config.output.oracle.clone(), json(&envelope(run, body))?);
    files.commit(dir)?;
    for r in &cmp.rows {
        println!(
            "eps = {:.4e}: area {:.2}σ, centroid ({:.2}σ, {:.2}σ) {}",
            r.eps,
            r.area_sigmas,
            r.centroid_sigmas[0],
            r.centroid_sigmas[1],
            if r.pass { "ok" } else { "MISMATCH" }
        );
    }
    Ok(if cmp.pass { Exit::Ok } else { Exit::OracleMismatch })
}
