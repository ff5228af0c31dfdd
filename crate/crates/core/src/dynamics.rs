//! Orbits of parabolic germs inside an attracting sector.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::powerseries::Germ;
use crate::sum::{ComplexSum, NeumaierSum};

/// One of the `k` attracting directions `A = (−k·a₁)^{−1/k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttractingDirection {
    #[serde(with = "crate::serde_complex")]
    pub a: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub nu: Complex64,
    pub branch: usize,
}

fn arg_0_2pi(z: Complex64) -> f64 {
    let t = z.arg();
    if t < 0.0 {
        t + TAU
    } else {
        t
    }
}

/// Signed angle difference wrapped to `(−π, π]`.
fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// All `k` attracting directions, sorted by argument in `[0, 2π)`.
pub fn attracting_directions(f: &Germ) -> Vec<AttractingDirection> {
    let k = f.k();
    let w = -(f.a1() * k as f64).inv();
    let modulus = w.norm().powf(1.0 / k as f64);
    let base = w.arg();
    let mut args: Vec<f64> = (0..k)
        .map(|j| (base + TAU * j as f64) / k as f64)
        .map(|t| t.rem_euclid(TAU))
        .collect();
    args.sort_by(|a, b| a.total_cmp(b));
    args.into_iter()
        .enumerate()
        .map(|(branch, t)| {
            let nu = Complex64::from_polar(1.0, t);
            AttractingDirection {
                a: nu * modulus,
                nu,
                branch,
            }
        })
        .collect()
}

/// The attracting direction whose argument is closest to `arg z0`.
///
/// Points exactly on a repelling direction (angular distance `π/k` from the
/// two neighbouring attracting directions) are rejected.
pub fn select_sector(f: &Germ, z0: Complex64) -> Result<AttractingDirection> {
    if z0.norm() == 0.0 || !z0.is_finite() {
        return Err(Error::OutOfRange("initial point must be finite and nonzero".into()));
    }
    let theta = arg_0_2pi(z0);
    let dirs = attracting_directions(f);
    let (best, dist) = dirs
        .iter()
        .map(|d| (d, angle_diff(theta, arg_0_2pi(d.nu)).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("k >= 1");
    if (dist - PI / f.k() as f64).abs() <= 1e-12 {
        return Err(Error::AmbiguousSector);
    }
    Ok(*best)
}

/// When iteration stops and which iterates are kept in memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop once `|z_n| < r_floor`.
    pub r_floor: f64,
    /// Maximum number of iterations.
    pub cap: usize,
    /// Keep iterates in memory until a gap drops below this value; later
    /// iterates only feed the streamed [`FarField`] sums. `None` keeps all.
    pub store_gap: Option<f64>,
    /// Reaching `cap` ends the orbit normally instead of raising
    /// [`Error::IterationCap`]; the geometry layer then closes the
    /// remainder analytically.
    pub allow_cap: bool,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            r_floor: 1e-8,
            cap: 100_000_000,
            store_gap: None,
            allow_cap: false,
        }
    }
}

impl StopRule {
    pub fn points(n: usize) -> Self {
        Self {
            r_floor: 0.0,
            cap: n,
            store_gap: None,
            allow_cap: true,
        }
    }
}

/// Streamed sums over the iterates that were not stored.
///
/// With `d_n = |z_{n+1} − z_n|` and `n` running from the last stored index
/// `start` up to `end − 1`, the fields hold `Σ dₙᵖ` and
/// `Σ dₙᵖ (zₙ + zₙ₊₁)` for `p = 1, 3, 5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarField {
    pub start: usize,
    pub end: usize,
    #[serde(with = "crate::serde_complex")]
    pub z_end: Complex64,
    /// Last gap `d_{end−1}`, or the last stored gap when nothing was streamed.
    pub d_last: f64,
    /// Largest streamed gap (zero when nothing was streamed).
    pub d_max: f64,
    pub sum_d: [f64; 3],
    #[serde(skip)]
    pub sum_dz: [Complex64; 3],
    /// Angle between the final gap vector and the ray from `z_end` to 0.
    pub end_turn: f64,
    /// Number of streamed steps where the gap failed to decrease.
    pub nonmonotone_steps: usize,
    /// Iterates at which `|z|` first fell below half the previous mark,
    /// outermost first; the last few before `z_end`.
    #[serde(skip)]
    pub marks: Vec<Complex64>,
}

impl FarField {
    fn empty(index: usize, z: Complex64, d_last: f64) -> Self {
        Self {
            start: index,
            end: index,
            z_end: z,
            d_last,
            d_max: 0.0,
            sum_d: [0.0; 3],
            sum_dz: [Complex64::new(0.0, 0.0); 3],
            end_turn: 0.0,
            nonmonotone_steps: 0,
            marks: Vec::new(),
        }
    }
}

const KEPT_MARKS: usize = 4;

fn push_mark(marks: &mut Vec<Complex64>, z: Complex64) {
    if marks.last().is_none_or(|m| z.norm() <= 0.5 * m.norm()) {
        if marks.len() == KEPT_MARKS {
            marks.remove(0);
        }
        marks.push(z);
    }
}

#[derive(Debug, Clone)]
pub struct Orbit {
    points: Vec<Complex64>,
    gaps: Vec<f64>,
    direction: AttractingDirection,
    germ: Germ,
    monotone_from: usize,
    far: FarField,
    reached_floor: bool,
    closed: bool,
}

fn first_monotone_index(gaps: &[f64]) -> usize {
    let mut n0 = 0;
    for n in 1..gaps.len() {
        if gaps[n] >= gaps[n - 1] {
            n0 = n;
        }
    }
    n0
}

fn turn_angle(prev: Complex64, z: Complex64) -> f64 {
    let step = prev - z;
    if step.norm() == 0.0 || z.norm() == 0.0 {
        return 0.0;
    }
    angle_diff(step.arg(), z.arg()).abs()
}

impl Orbit {
    /// Wraps an explicit finite point sequence. Its ε-neighborhood is the
    /// union of discs around exactly these points.
    pub fn from_points(germ: &Germ, points: Vec<Complex64>) -> Result<Self> {
        let z0 = *points
            .first()
            .ok_or_else(|| Error::OrbitTooShort("no points".into()))?;
        let direction = select_sector(germ, z0)?;
        let gaps: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let monotone_from = first_monotone_index(&gaps);
        let last = points.len() - 1;
        let far = FarField::empty(last, points[last], gaps.last().copied().unwrap_or(0.0));
        Ok(Self {
            points,
            gaps,
            direction,
            germ: germ.clone(),
            monotone_from,
            far,
            reached_floor: false,
            closed: false,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn direction(&self) -> &AttractingDirection {
        &self.direction
    }

    pub fn germ(&self) -> &Germ {
        &self.germ
    }

    pub fn monotone_from(&self) -> usize {
        self.monotone_from
    }

    pub fn far(&self) -> &FarField {
        &self.far
    }

    /// Total number of iterates generated, stored or streamed.
    pub fn len(&self) -> usize {
        self.far.end + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn reached_floor(&self) -> bool {
        self.reached_floor
    }

    /// Whether the iterates beyond the last one are accounted for by an
    /// analytic closure (generated orbits) or absent (explicit point sets).
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Index and value of the deepest iterate.
    pub fn last(&self) -> (usize, Complex64) {
        (self.far.end, self.far.z_end)
    }
}

/// Iterates `f` from `z0` until `stop` fires.
pub fn iterate_orbit(f: &Germ, z0: Complex64, stop: StopRule) -> Result<Orbit> {
    let direction = select_sector(f, z0)?;
    let escape = 2.0 * z0.norm();
    let mut points = vec![z0];
    let mut gaps = Vec::new();
    let mut z = z0;
    let mut storing = true;
    let mut n = 0usize;
    let mut reached_floor = false;

    let mut far_start = 0usize;
    let mut sum_d = [NeumaierSum::new(); 3];
    let mut sum_dz = [ComplexSum::new(); 3];
    let mut prev_gap = f64::INFINITY;
    let mut nonmonotone = 0usize;
    let mut d_max = 0.0f64;
    let mut prev_z = z0;
    let mut marks = vec![z0];

    loop {
        if z.norm() < stop.r_floor || z.norm() == 0.0 {
            reached_floor = true;
            break;
        }
        if n >= stop.cap {
            if stop.allow_cap {
                break;
            }
            return Err(Error::IterationCap { cap: stop.cap });
        }
        let next = f.eval(z);
        let modulus = next.norm();
        if !modulus.is_finite() || modulus > escape {
            return Err(Error::LeftSector {
                index: n + 1,
                modulus,
            });
        }
        let d = (next - z).norm();
        if storing {
            points.push(next);
            gaps.push(d);
            if stop.store_gap.is_some_and(|g| d < g) {
                storing = false;
                far_start = n + 1;
            }
        } else {
            if d >= prev_gap {
                nonmonotone += 1;
            }
            d_max = d_max.max(d);
            let d2 = d * d;
            let d3 = d2 * d;
            let d5 = d3 * d2;
            let pair = z + next;
            sum_d[0].add(d);
            sum_d[1].add(d3);
            sum_d[2].add(d5);
            sum_dz[0].add(pair * d);
            sum_dz[1].add(pair * d3);
            sum_dz[2].add(pair * d5);
        }
        prev_gap = d;
        prev_z = z;
        z = next;
        n += 1;
        push_mark(&mut marks, z);
    }

    let monotone_from = first_monotone_index(&gaps);
    let far = if storing {
        let last = points.len() - 1;
        let mut far = FarField::empty(last, points[last], gaps.last().copied().unwrap_or(0.0));
        if last > 0 {
            far.end_turn = turn_angle(points[last - 1], points[last]);
        }
        far.marks = marks;
        far
    } else {
        FarField {
            start: far_start,
            end: n,
            z_end: z,
            d_last: prev_gap,
            d_max,
            sum_d: sum_d.map(|s| s.value()),
            sum_dz: sum_dz.map(|s| s.value()),
            end_turn: turn_angle(prev_z, z),
            nonmonotone_steps: nonmonotone,
            marks,
        }
    };
    Ok(Orbit {
        points,
        gaps,
        direction,
        germ: f.clone(),
        monotone_from,
        far,
        reached_floor,
        closed: true,
    })
}

/// Relative deviation `|z_n·n^{1/k}/A − 1|` at the deepest iterate.
pub fn zn_leading_check(orbit: &Orbit) -> Result<f64> {
    let (n, z) = orbit.last();
    if n < 10_000 {
        return Err(Error::OrbitTooShort(format!(
            "leading-term check needs 10^4 iterates, have {n}"
        )));
    }
    let k = orbit.germ().k() as f64;
    let a = orbit.direction().a;
    Ok((z * (n as f64).powf(1.0 / k) / a - 1.0).norm())
}
