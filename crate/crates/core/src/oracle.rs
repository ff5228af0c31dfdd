//! Monte-Carlo estimate of the area and center of mass of a union of discs.
//!
//! Samples are uniform in the bounding box of the ε-neighborhood. Each sample
//! is tested against the points in the 3×3 block of grid cells of side ε
//! around it. Samples are drawn in fixed-size blocks, each from its own
//! ChaCha8 stream of the master seed, and block tallies are reduced in block
//! order, so the estimate depends only on the inputs and the seed.

use std::collections::HashMap;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::Orbit;
use crate::error::{Error, Result};

const BLOCK: usize = 1 << 16;
/// Fewest samples accepted by [`mc_union_measure`].
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub area: f64,
    pub area_stderr: f64,
    #[serde(with = "crate::serde_complex")]
    pub centroid: Complex64,
    /// Larger of the two componentwise standard errors of the centroid.
    pub centroid_stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

struct DiscGrid<'a> {
    points: &'a [Complex64],
    eps: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> DiscGrid<'a> {
    fn new(points: &'a [Complex64], eps: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell(*p, eps)).or_default().push(i as u32);
        }
        DiscGrid { points, eps, cells }
    }

    fn cell(p: Complex64, eps: f64) -> (i64, i64) {
        ((p.re / eps).floor() as i64, (p.im / eps).floor() as i64)
    }

    fn covers(&self, x: Complex64) -> bool {
        let (cx, cy) = Self::cell(x, self.eps);
        let eps2 = self.eps * self.eps;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    if bucket.iter().any(|&i| (self.points[i as usize] - x).norm_sqr() <= eps2) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    hits: u64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.hits += o.hits;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.syy += o.syy;
        self
    }
}

#[inline]
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Estimates area and centroid of `⋃ K(p, ε)` from `samples` uniform draws.
/// Coordinates inside a block are accumulated relative to the box center.
pub fn mc_union_measure(points: &[Complex64], eps: f64, samples: usize, seed: u64) -> Result<OracleEstimate> {
    if points.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples,
        });
    }
    if !(eps > 0.0) {
        return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    lo -= Complex64::new(eps, eps);
    hi += Complex64::new(eps, eps);
    let span = hi - lo;
    let center = (lo + hi) * 0.5;
    let box_area = span.re * span.im;
    let grid = DiscGrid::new(points, eps);

    let blocks = samples.div_ceil(BLOCK);
    let run_block = |b: usize| -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let n = BLOCK.min(samples - b * BLOCK);
        let mut t = Tally::default();
        for _ in 0..n {
            let x = lo + Complex64::new(unit(&mut rng) * span.re, unit(&mut rng) * span.im);
            if grid.covers(x) {
                let r = x - center;
                t.hits += 1;
                t.sx += r.re;
                t.sy += r.im;
                t.sxx += r.re * r.re;
                t.syy += r.im * r.im;
            }
        }
        t
    };
    #[cfg(feature = "parallel")]
    let tallies: Vec<Tally> = (0..blocks).into_par_iter().map(run_block).collect();
    #[cfg(not(feature = "parallel"))]
    let tallies: Vec<Tally> = (0..blocks).map(run_block).collect();
    let t = tallies.into_iter().fold(Tally::default(), Tally::merge);

    let n = samples as f64;
    let p = t.hits as f64 / n;
    let area = box_area * p;
    let area_stderr = box_area * (p * (1.0 - p) / n).sqrt();
    if t.hits < 2 {
        return Ok(OracleEstimate {
            area,
            area_stderr,
            centroid: center,
            centroid_stderr: span.norm(),
            samples,
            seed,
        });
    }
    let h = t.hits as f64;
    let (mx, my) = (t.sx / h, t.sy / h);
    let vx = (t.sxx / h - mx * mx).max(0.0) * h / (h - 1.0);
    let vy = (t.syy / h - my * my).max(0.0) * h / (h - 1.0);
    Ok(OracleEstimate {
        area,
        area_stderr,
        centroid: center + Complex64::new(mx, my),
        centroid_stderr: (vx.max(vy) / h).sqrt(),
        samples,
        seed,
    })
}

/// Disc centers whose union matches the ε-neighborhood measured by
/// [`crate::geometry::directed_area`]: stored iterates thinned to spacing
/// `ε/200`, then for closed orbits the segment from the last stored iterate
/// to the origin at spacing `ε/100`.
pub fn oracle_points(orbit: &Orbit, eps: f64) -> Vec<Complex64> {
    let pts = orbit.points();
    let min_gap = eps / 200.0;
    let mut out = Vec::with_capacity(pts.len());
    out.push(pts[0]);
    for p in &pts[1..] {
        if (p - out.last().unwrap()).norm() >= min_gap {
            out.push(*p);
        }
    }
    let last = *pts.last().unwrap();
    if *out.last().unwrap() != last {
        out.push(last);
    }
    if orbit.is_closed() {
        let steps = (last.norm() / (eps / 100.0)).ceil() as usize;
        for s in 1..=steps {
            out.push(last * (1.0 - s as f64 / steps as f64));
        }
    }
    out
}
