use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::distance::Frame;
use super::{circumference, EllipseDomain, EllipseSpec, GeometryError};
use crate::grid::{CellGrid, LatticePoint};

/// Signed distance from every domain cell to the continuum boundary
/// (zero on cells outside the domain).
pub fn boundary_distances(domain: &EllipseDomain) -> CellGrid<f64> {
    let frame = Frame::new(domain.spec());
    let shape = domain.domain().shape();
    let values: Vec<f64> = (0..shape.len())
        .into_par_iter()
        .map(|i| if shape.mask()[i] { frame.signed_distance(shape.point(i).to_f64()) } else { 0.0 })
        .collect();
    CellGrid::from_parts(shape.origin(), shape.width(), shape.height(), values, shape.mask().to_vec())
        .expect("same shape as the domain")
}

/// `G_L`: the domain cells at continuum distance at least `l` from the
/// boundary. The returned grid shares the domain's mask.
pub fn g_set(domain: &EllipseDomain, l: f64) -> CellGrid<bool> {
    boundary_distances(domain).map(|&d| d >= l)
}

/// `|Ẽ ∖ G̃_L| = L (C_E − π L)`, valid while `L` is below the smallest
/// radius of curvature `√(2kλ₁)/λ₂`.
pub fn annulus_area(spec: &EllipseSpec, l: f64) -> Result<f64, GeometryError> {
    let limit = spec.spectrum().min_curvature_radius();
    if l >= limit {
        return Err(GeometryError::CurvatureViolated { l, limit });
    }
    Ok(l * (circumference(spec) - std::f64::consts::PI * l))
}

/// Monte-Carlo estimate of `|Ẽ ∖ G̃_L|` from uniform samples in the
/// bounding box of the ellipse's eigenframe. Samples are drawn in fixed
/// chunks with per-chunk seeds, so the estimate does not depend on the
/// thread count.
pub fn annulus_area_monte_carlo(spec: &EllipseSpec, l: f64, samples: u64, seed: u64) -> f64 {
    const CHUNK: u64 = 1 << 16;
    let frame = Frame::new(spec);
    let s = *frame.spectrum();
    // Points of (1 - L/r2)·Ẽ are at distance ≥ L from the boundary.
    let shrink = (1.0 - l / s.r2).max(0.0).powi(2);
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ c.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let n = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0u64;
            for _ in 0..n {
                let u = rng.random_range(-s.r1..s.r1);
                let w = rng.random_range(-s.r2..s.r2);
                let q = (u / s.r1).powi(2) + (w / s.r2).powi(2);
                if q >= 1.0 || q < shrink {
                    continue;
                }
                if frame.signed_distance(frame.to_world(u, w)) < l {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    4.0 * s.r1 * s.r2 * hits as f64 / samples as f64
}

/// The lattice covers of `G̃_L` by unit squares centred on lattice points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSets {
    /// Cells whose closed square lies inside `G̃_L`.
    pub inner: Vec<LatticePoint>,
    /// Cells whose square meets `G̃_L`; the smallest such cover.
    pub outer: Vec<LatticePoint>,
}

impl CoverSets {
    pub fn difference(&self) -> usize {
        self.outer.len() - self.inner.len()
    }
}

/// Builds both covers. The signed distance to the boundary of a convex set
/// is concave, so a square lies in `G̃_L` iff its corners do, and meets it
/// iff the maximum of the distance over the square reaches `L`.
pub fn cover_sets(spec: &EllipseSpec, l: f64) -> CoverSets {
    let frame = Frame::new(spec);
    let s = *frame.spectrum();
    let [px, py] = spec.center_f64();
    let reach = s.r1 + 1.0;
    let (x0, x1) = ((px - reach).floor() as i64, (px + reach).ceil() as i64);
    let (y0, y1) = ((py - reach).floor() as i64, (py + reach).ceil() as i64);
    let rows: Vec<(Vec<LatticePoint>, Vec<LatticePoint>)> = (y0..=y1)
        .into_par_iter()
        .map(|y| {
            let mut inner = Vec::new();
            let mut outer = Vec::new();
            for x in x0..=x1 {
                let c = [x as f64, y as f64];
                let d = frame.signed_distance(c);
                if d < l - std::f64::consts::FRAC_1_SQRT_2 {
                    continue;
                }
                let p = LatticePoint::new(x, y);
                let corners = [[-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5], [0.5, 0.5]];
                if corners.iter().all(|o| frame.signed_distance([c[0] + o[0], c[1] + o[1]]) >= l) {
                    inner.push(p);
                }
                if d >= l || square_max(&frame, c) >= l {
                    outer.push(p);
                }
            }
            (inner, outer)
        })
        .collect();
    let mut cover = CoverSets { inner: Vec::new(), outer: Vec::new() };
    for (i, o) in rows {
        cover.inner.extend(i);
        cover.outer.extend(o);
    }
    cover
}

/// Maximum of the (concave) signed distance over the unit square at `c`,
/// by nested golden-section search.
fn square_max(frame: &Frame, c: [f64; 2]) -> f64 {
    let row_max = |y: f64| golden_max(|x| frame.signed_distance([x, y]), c[0] - 0.5, c[0] + 0.5);
    golden_max(row_max, c[1] - 0.5, c[1] + 0.5)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..48 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    [fc, fd, f(a), f(b)].into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Outcome of random midpoint-convexity trials on `G̃_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub trials: usize,
    pub failures: usize,
    /// Smallest value of `d(tx + (1-t)y) - L` seen.
    pub worst_margin: f64,
}

/// Draws pairs of points of `G̃_L` and a random `t ∈ (0,1)`, and checks
/// that the segment point stays in `G̃_L`.
pub fn convexity_trials(spec: &EllipseSpec, l: f64, trials: usize, seed: u64) -> ConvexityReport {
    let frame = Frame::new(spec);
    let s = *frame.spectrum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConvexityReport { trials: 0, failures: 0, worst_margin: f64::INFINITY };
    if l >= s.r2 {
        return report;
    }
    let sample = |rng: &mut ChaCha8Rng| loop {
        let p = frame.to_world(rng.random_range(-s.r1..s.r1), rng.random_range(-s.r2..s.r2));
        if frame.signed_distance(p) >= l {
            return p;
        }
    };
    for _ in 0..trials {
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let t: f64 = rng.random_range(0.0..1.0);
        let z = [t * x[0] + (1.0 - t) * y[0], t * x[1] + (1.0 - t) * y[1]];
        let margin = frame.signed_distance(z) - l;
        report.trials += 1;
        report.worst_margin = report.worst_margin.min(margin);
        if margin < -1e-9 {
            report.failures += 1;
        }
    }
    report
}
