use super::{EllipseSpec, Spectrum};

const MAX_NEWTON: usize = 100;

/// Coordinates of a point in the eigenframe of the ellipse.
pub(crate) struct Frame {
    center: [f64; 2],
    spectrum: Spectrum,
}

impl Frame {
    pub(crate) fn new(spec: &EllipseSpec) -> Self {
        Frame { center: spec.center_f64(), spectrum: spec.spectrum() }
    }

    pub(crate) fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    fn local(&self, x: [f64; 2]) -> (f64, f64) {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let s = &self.spectrum;
        (d[0] * s.v1[0] + d[1] * s.v1[1], d[0] * s.v2[0] + d[1] * s.v2[1])
    }

    pub(crate) fn to_world(&self, u: f64, w: f64) -> [f64; 2] {
        let s = &self.spectrum;
        [self.center[0] + u * s.v1[0] + w * s.v2[0], self.center[1] + u * s.v1[1] + w * s.v2[1]]
    }

    pub(crate) fn signed_distance(&self, x: [f64; 2]) -> f64 {
        let (u, w) = self.local(x);
        let (e0, e1) = (self.spectrum.r1, self.spectrum.r2);
        let inside = (u / e0).powi(2) + (w / e1).powi(2) < 1.0;
        let d = foot_point_distance(e0, e1, u.abs(), w.abs())
            .unwrap_or_else(|| sampled_distance(e0, e1, u.abs(), w.abs(), 1 << 14));
        if inside {
            d
        } else {
            -d
        }
    }
}

/// Distance from `(y0, y1)` (first quadrant) to the ellipse with semi-axes
/// `e0 ≥ e1`. Solves the foot-point equation
/// `(e0 y0 / (t + e0²))² + (e1 y1 / (t + e1²))² = 1` for the Lagrange
/// multiplier by Newton's method; returns `None` without convergence.
fn foot_point_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> Option<f64> {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return Some(0.0);
            }
            let r0 = (e0 / e1).powi(2);
            let n0 = r0 * z0;
            // In the scaled variable s = t / e1², F is convex and decreasing
            // on (-1, ∞); starting left of the root Newton cannot overshoot.
            // Each term of F alone is at most 1 at the root, which bounds it
            // from below.
            let f = |s: f64| (n0 / (s + r0)).powi(2) + (z1 / (s + 1.0)).powi(2) - 1.0;
            let df = |s: f64| -2.0 * n0 * n0 / (s + r0).powi(3) - 2.0 * z1 * z1 / (s + 1.0).powi(3);
            let mut lo = (z1 - 1.0).max(n0 - r0);
            let mut hi = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
            let mut s = lo;
            let mut converged = false;
            for _ in 0..MAX_NEWTON {
                let fs = f(s);
                if fs == 0.0 {
                    converged = true;
                    break;
                }
                if fs > 0.0 {
                    lo = s;
                } else {
                    hi = s;
                }
                let mut next = s - fs / df(s);
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
                    s = next;
                    converged = true;
                    break;
                }
                s = next;
            }
            if !converged {
                return None;
            }
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            Some((x0 - y0).hypot(x1 - y1))
        } else {
            Some((y1 - e1).abs())
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde0 = numer / denom;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            Some((x0 - y0).hypot(x1))
        } else {
            Some((y0 - e0).abs())
        }
    }
}

/// Dense angular sampling followed by golden-section refinement.
fn sampled_distance(e0: f64, e1: f64, y0: f64, y1: f64, samples: usize) -> f64 {
    let d2 = |t: f64| (e0 * t.cos() - y0).powi(2) + (e1 * t.sin() - y1).powi(2);
    let step = std::f64::consts::TAU / samples as f64;
    let best = (0..samples).map(|i| i as f64 * step).min_by(|a, b| d2(*a).total_cmp(&d2(*b))).unwrap();
    let (mut a, mut b) = (best - step, best + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if d2(c) < d2(d) {
            b = d;
        } else {
            a = c;
        }
    }
    d2(0.5 * (a + b)).sqrt()
}

/// Signed Euclidean distance from `point` to the boundary of the continuum
/// ellipse: positive inside, negative outside.
pub fn distance_to_boundary(point: [f64; 2], spec: &EllipseSpec) -> f64 {
    Frame::new(spec).signed_distance(point)
}

/// Unsigned distance by brute-force angular sampling; slow, independent of
/// the foot-point solver.
pub fn distance_by_sampling(point: [f64; 2], spec: &EllipseSpec, samples: usize) -> f64 {
    let frame = Frame::new(spec);
    let (u, w) = frame.local(point);
    sampled_distance(frame.spectrum.r1, frame.spectrum.r2, u.abs(), w.abs(), samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Minimum over `n` evenly spaced boundary samples, no refinement.
    fn dense_oracle(spec: &EllipseSpec, x: [f64; 2], n: usize) -> f64 {
        let f = Frame::new(spec);
        let s = f.spectrum();
        (0..n)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / n as f64;
                let b = f.to_world(s.r1 * t.cos(), s.r2 * t.sin());
                (b[0] - x[0]).hypot(b[1] - x[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn circle_center_and_boundary() {
        let spec = EllipseSpec::parse("1", "0", "1", "12.5").unwrap();
        assert!((distance_to_boundary([0.0, 0.0], &spec) - 5.0).abs() < 1e-12);
        assert!(distance_to_boundary([3.0, 4.0], &spec).abs() < 1e-12);
        assert!((distance_to_boundary([6.0, 8.0], &spec) + 5.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_have_zero_distance() {
        let spec = EllipseSpec::parse_with_center("5/4", "1/2", "1", "64", ["0.3", "-1"]).unwrap();
        let f = Frame::new(&spec);
        let s = *f.spectrum();
        for i in 0..50 {
            let t = i as f64 * 0.1256;
            let b = f.to_world(s.r1 * t.cos(), s.r2 * t.sin());
            let d = distance_to_boundary(b, &spec);
            assert!(d.abs() < 1e-9, "{t} {d}");
        }
    }

    #[test]
    fn matches_dense_sampling_oracle() {
        let spec = EllipseSpec::parse("5/4", "1/2", "1", "100").unwrap();
        let s = spec.spectrum();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let x = [rng.random_range(-1.3 * s.r1..1.3 * s.r1), rng.random_range(-1.3 * s.r1..1.3 * s.r1)];
            let d = distance_to_boundary(x, &spec);
            let oracle = dense_oracle(&spec, x, 1_000_000);
            assert!((d.abs() - oracle).abs() < 1e-6, "{x:?}: {d} vs {oracle}");
            let inside = spec.quadratic_form_f64(x) < spec.k_f64();
            assert_eq!(d > 0.0, inside);
        }
        // Points on the axes, including inside the evolute.
        for x in [[0.0, 0.0], [s.r1 * 0.3, 0.0], [0.0, s.r2 * 0.5]] {
            let w = Frame::new(&spec).to_world(x[0], x[1]);
            let oracle = dense_oracle(&spec, w, 1_000_000);
            assert!((distance_to_boundary(w, &spec) - oracle).abs() < 1e-6);
        }
    }

    #[test]
    fn sampling_fallback_agrees_with_newton() {
        let spec = EllipseSpec::parse("1/2", "0", "3", "10").unwrap();
        for x in [[1.0, 0.5], [4.0, 0.01], [-7.0, 3.0], [0.2, -1.1]] {
            let a = distance_to_boundary(x, &spec).abs();
            let b = distance_by_sampling(x, &spec, 1 << 16);
            assert!((a - b).abs() < 1e-9, "{x:?} {a} {b}");
        }
    }
}
