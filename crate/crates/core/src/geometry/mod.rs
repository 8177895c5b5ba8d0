//! Elliptical lattice domains `{x : ½ (x-p)ᵀ A (x-p) < k}` and the
//! continuum geometry of the ellipse behind them.

mod distance;
mod perimeter;
mod sets;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::domain::{Domain, DomainError};
use crate::exact::{self, ParseExactError};
use crate::grid::LatticePoint;

pub use distance::{distance_by_sampling, distance_to_boundary};
pub use perimeter::{circumference, ellipse_perimeter};
pub use sets::{
    annulus_area, annulus_area_monte_carlo, boundary_distances, convexity_trials, cover_sets, g_set, ConvexityReport,
    CoverSets,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("k must be positive")]
    NonPositiveK,
    #[error("ellipse contains no lattice points")]
    EmptyDomain,
    #[error("L = {l} is not below the minimal radius of curvature {limit}")]
    CurvatureViolated { l: f64, limit: f64 },
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Parse(#[from] ParseExactError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Entries of a symmetric positive-definite `A`, the level `k` and the
/// centre `p`, all held exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EllipseSpec {
    a11: BigRational,
    a12: BigRational,
    a22: BigRational,
    k: BigRational,
    center: [BigRational; 2],
}

impl EllipseSpec {
    pub fn new(
        a11: BigRational,
        a12: BigRational,
        a22: BigRational,
        k: BigRational,
        center: [BigRational; 2],
    ) -> Result<Self, GeometryError> {
        if !a11.is_positive() || !(&a11 * &a22 - &a12 * &a12).is_positive() {
            return Err(GeometryError::NotPositiveDefinite);
        }
        if !k.is_positive() {
            return Err(GeometryError::NonPositiveK);
        }
        Ok(EllipseSpec { a11, a12, a22, k, center })
    }

    /// Parses every entry with [`exact::parse_exact`]; the centre is the origin.
    pub fn parse(a11: &str, a12: &str, a22: &str, k: &str) -> Result<Self, GeometryError> {
        Self::parse_with_center(a11, a12, a22, k, ["0", "0"])
    }

    pub fn parse_with_center(
        a11: &str,
        a12: &str,
        a22: &str,
        k: &str,
        center: [&str; 2],
    ) -> Result<Self, GeometryError> {
        let q = exact::parse_exact;
        Self::new(q(a11)?, q(a12)?, q(a22)?, q(k)?, [q(center[0])?, q(center[1])?])
    }

    /// Uses the exact binary value of every float.
    pub fn from_f64(a: [[f64; 2]; 2], k: f64, center: [f64; 2]) -> Result<Self, GeometryError> {
        if a[0][1] != a[1][0] {
            return Err(GeometryError::NotSymmetric);
        }
        let q = |x: f64| exact::exact_from_f64(x).ok_or(GeometryError::NonFinite(x));
        Self::new(q(a[0][0])?, q(a[0][1])?, q(a[1][1])?, q(k)?, [q(center[0])?, q(center[1])?])
    }

    /// Same matrix and centre with a different `k`.
    pub fn with_k(&self, k: BigRational) -> Result<Self, GeometryError> {
        Self::new(self.a11.clone(), self.a12.clone(), self.a22.clone(), k, self.center.clone())
    }

    pub fn with_center(&self, center: [BigRational; 2]) -> Result<Self, GeometryError> {
        Self::new(self.a11.clone(), self.a12.clone(), self.a22.clone(), self.k.clone(), center)
    }

    pub fn a11(&self) -> &BigRational {
        &self.a11
    }
    pub fn a12(&self) -> &BigRational {
        &self.a12
    }
    pub fn a22(&self) -> &BigRational {
        &self.a22
    }
    pub fn k(&self) -> &BigRational {
        &self.k
    }
    pub fn center(&self) -> &[BigRational; 2] {
        &self.center
    }

    pub fn matrix_f64(&self) -> [[f64; 2]; 2] {
        let a12 = exact::to_f64(&self.a12);
        [[exact::to_f64(&self.a11), a12], [a12, exact::to_f64(&self.a22)]]
    }

    pub fn k_f64(&self) -> f64 {
        exact::to_f64(&self.k)
    }

    pub fn center_f64(&self) -> [f64; 2] {
        [exact::to_f64(&self.center[0]), exact::to_f64(&self.center[1])]
    }

    pub fn is_centered(&self) -> bool {
        self.center.iter().all(Zero::is_zero)
    }

    /// `½ (x-p)ᵀ A (x-p)`, exactly.
    pub fn quadratic_form(&self, x: LatticePoint) -> BigRational {
        let dx = BigRational::from_integer(x.x.into()) - &self.center[0];
        let dy = BigRational::from_integer(x.y.into()) - &self.center[1];
        let two = BigRational::from_integer(2.into());
        (&self.a11 * &dx * &dx + &two * &self.a12 * &dx * &dy + &self.a22 * &dy * &dy) / two
    }

    /// `½ (x-p)ᵀ A (x-p)` in floating point, for continuum points.
    pub fn quadratic_form_f64(&self, x: [f64; 2]) -> f64 {
        let [[a, b], [_, c]] = self.matrix_f64();
        let p = self.center_f64();
        let (dx, dy) = (x[0] - p[0], x[1] - p[1]);
        0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy)
    }

    pub fn spectrum(&self) -> Spectrum {
        spectrum(self.matrix_f64(), self.k_f64())
    }

    /// Lattice membership test with all arithmetic done on integers.
    pub fn membership(&self) -> Membership {
        Membership::new(self)
    }
}

/// Integer form of `2·L·q1²·q2² · (½ (x-p)ᵀA(x-p) - k) < 0`, where `L`
/// clears the denominators of `A` and `k`, and `q1`, `q2` those of `p`.
#[derive(Debug, Clone)]
pub struct Membership {
    c11: BigInt,
    c12: BigInt,
    c22: BigInt,
    rhs: BigInt,
    n: [BigInt; 2],
    q: [BigInt; 2],
}

impl Membership {
    fn new(spec: &EllipseSpec) -> Self {
        let l = [&spec.a11, &spec.a12, &spec.a22, &spec.k]
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled = |v: &BigRational| (v * BigRational::from_integer(l.clone())).to_integer();
        let n = [spec.center[0].numer().clone(), spec.center[1].numer().clone()];
        let q = [spec.center[0].denom().clone(), spec.center[1].denom().clone()];
        let q1s = &q[0] * &q[0];
        let q2s = &q[1] * &q[1];
        Membership {
            c11: scaled(&spec.a11) * &q2s,
            c12: scaled(&spec.a12) * &q[0] * &q[1] * 2,
            c22: scaled(&spec.a22) * &q1s,
            rhs: scaled(&spec.k) * &q1s * &q2s * 2,
            n,
            q,
        }
    }

    pub fn contains(&self, x: LatticePoint) -> bool {
        let xs = BigInt::from(x.x) * &self.q[0] - &self.n[0];
        let ys = BigInt::from(x.y) * &self.q[1] - &self.n[1];
        let lhs = &self.c11 * &xs * &xs + &self.c12 * &xs * &ys + &self.c22 * &ys * &ys;
        lhs < self.rhs
    }
}

/// Eigen-decomposition of `A` and the semi-axes of the level set at `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Unit eigenvector of `lambda1`, the direction of the long axis.
    pub v1: [f64; 2],
    /// Unit eigenvector of `lambda2`, with `v1 × v2 = +1`.
    pub v2: [f64; 2],
    /// `√(2k/λ1)`, the semi-major axis.
    pub r1: f64,
    /// `√(2k/λ2)`, the semi-minor axis.
    pub r2: f64,
}

/// Closed-form eigendecomposition of a symmetric 2×2 matrix.
pub fn spectrum(a: [[f64; 2]; 2], k: f64) -> Spectrum {
    let (p, b, c) = (a[0][0], a[0][1], a[1][1]);
    let mean = 0.5 * (p + c);
    let rad = (0.5 * (p - c)).hypot(b);
    let lambda1 = mean - rad;
    let lambda2 = mean + rad;
    let v1 = if rad == 0.0 {
        [1.0, 0.0]
    } else {
        // Both candidates solve (A - λ1) v = 0; keep the better-conditioned one.
        let u = [b, lambda1 - p];
        let w = [lambda1 - c, b];
        let (nu, nw) = (u[0].hypot(u[1]), w[0].hypot(w[1]));
        if nu >= nw {
            [u[0] / nu, u[1] / nu]
        } else {
            [w[0] / nw, w[1] / nw]
        }
    };
    let v2 = [-v1[1], v1[0]];
    Spectrum { lambda1, lambda2, v1, v2, r1: (2.0 * k / lambda1).sqrt(), r2: (2.0 * k / lambda2).sqrt() }
}

impl Spectrum {
    /// Smallest radius of curvature of the boundary, reached at the ends of
    /// the major axis.
    pub fn min_curvature_radius(&self) -> f64 {
        self.r2 * self.r2 / self.r1
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.r1 * self.r2
    }
}

/// An elliptical lattice domain together with its defining data.
#[derive(Debug, Clone)]
pub struct EllipseDomain {
    spec: EllipseSpec,
    spectrum: Spectrum,
    domain: Domain,
}

/// Builds `E = {x ∈ Z² : ½ (x-p)ᵀ A (x-p) < k}` on a window reaching two
/// cells past the semi-major axis on every side.
pub fn build_domain(spec: &EllipseSpec) -> Result<EllipseDomain, GeometryError> {
    let spectrum = spec.spectrum();
    let reach = spectrum.r1 + 2.0;
    let [px, py] = spec.center_f64();
    let x0 = (px - reach).floor() as i64;
    let y0 = (py - reach).floor() as i64;
    let x1 = (px + reach).ceil() as i64;
    let y1 = (py + reach).ceil() as i64;
    let membership = spec.membership();
    let domain = Domain::from_predicate(
        LatticePoint::new(x0, y0),
        (x1 - x0 + 1) as usize,
        (y1 - y0 + 1) as usize,
        |p| membership.contains(p),
    )
    .map_err(|e| match e {
        DomainError::Empty => GeometryError::EmptyDomain,
        other => GeometryError::Domain(other),
    })?;
    Ok(EllipseDomain { spec: spec.clone(), spectrum, domain })
}

impl EllipseDomain {
    pub fn spec(&self) -> &EllipseSpec {
        &self.spec
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.domain.contains(p)
    }

    pub fn beta(&self, p: LatticePoint) -> Option<u8> {
        self.domain.beta(p)
    }

    pub fn outer_boundary(&self) -> Vec<LatticePoint> {
        self.domain.outer_boundary()
    }

    pub fn inner_boundary(&self) -> Vec<LatticePoint> {
        self.domain.inner_boundary()
    }

    /// Signed Euclidean distance from a lattice point to the continuum
    /// boundary, positive inside.
    pub fn distance(&self, p: LatticePoint) -> f64 {
        distance_to_boundary(p.to_f64(), &self.spec)
    }
}
