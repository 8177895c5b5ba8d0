//! The Apollonian band packing generated by the lines `x = 2m` and the unit
//! circles centred at `(2m + 1, 0)`, and the classification of symmetric
//! matrices against the cones erected over it.
//!
//! In the coordinates `(x, y, z) = (a − c, 2b, a + c)` of `A = [[a, b], [b, c]]`
//! the integer superharmonic matrices are the down-set of the slope-one
//! cones over the circles placed in the plane `z = 2`; the maximal ones sit
//! at the cone apexes.

use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use crate::exact;

/// A circle or one of the vertical lines of the packing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneralCircle {
    /// The line `{x = x}`.
    Line { x: f64 },
    Circle { center: [f64; 2], curvature: f64 },
}

impl GeneralCircle {
    pub fn curvature(&self) -> f64 {
        match self {
            GeneralCircle::Line { .. } => 0.0,
            GeneralCircle::Circle { curvature, .. } => *curvature,
        }
    }

    /// `None` for lines.
    pub fn radius(&self) -> Option<f64> {
        match self {
            GeneralCircle::Line { .. } => None,
            GeneralCircle::Circle { curvature, .. } => Some(1.0 / curvature),
        }
    }

    pub fn center(&self) -> Option<[f64; 2]> {
        match self {
            GeneralCircle::Line { .. } => None,
            GeneralCircle::Circle { center, .. } => Some(*center),
        }
    }

    /// Whether two general circles touch externally (or are adjacent
    /// lines of the band), up to `tol`.
    pub fn tangent_to(&self, other: &GeneralCircle, tol: f64) -> bool {
        use GeneralCircle::*;
        match (self, other) {
            (Line { x: a }, Line { x: b }) => ((a - b).abs() - 2.0).abs() <= tol,
            (Line { x }, Circle { center, curvature }) | (Circle { center, curvature }, Line { x }) => {
                ((center[0] - x).abs() - 1.0 / curvature).abs() <= tol
            }
            (Circle { center: c1, curvature: k1 }, Circle { center: c2, curvature: k2 }) => {
                let d = (c1[0] - c2[0]).hypot(c1[1] - c2[1]);
                (d - 1.0 / k1 - 1.0 / k2).abs() <= tol
            }
        }
    }
}

/// Integer data of a general circle: the curvature and curvature times
/// centre. For a line the second part is its unit normal pointing away
/// from the band, which is what the complex Descartes relation needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Exact {
    k: i64,
    kx: i64,
    ky: i64,
}

impl Exact {
    fn reflect(quad: &[Exact; 4], i: usize) -> Exact {
        let mut sum = Exact { k: 0, kx: 0, ky: 0 };
        for (j, c) in quad.iter().enumerate() {
            if j != i {
                sum.k += c.k;
                sum.kx += c.kx;
                sum.ky += c.ky;
            }
        }
        Exact { k: 2 * sum.k - quad[i].k, kx: 2 * sum.kx - quad[i].kx, ky: 2 * sum.ky - quad[i].ky }
    }
}

const LEFT: Exact = Exact { k: 0, kx: -1, ky: 0 };
const RIGHT: Exact = Exact { k: 0, kx: 1, ky: 0 };
const C0: Exact = Exact { k: 1, kx: 1, ky: 0 };
const C1: Exact = Exact { k: 1, kx: 1, ky: 2 };

/// A circle of the packing with exact integer data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PackedCircle {
    pub curvature: i64,
    /// Curvature times centre.
    pub kx: i64,
    pub ky: i64,
}

impl PackedCircle {
    pub fn center(&self) -> [f64; 2] {
        [self.kx as f64 / self.curvature as f64, self.ky as f64 / self.curvature as f64]
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.curvature as f64
    }

    pub fn general(&self) -> GeneralCircle {
        GeneralCircle::Circle { center: self.center(), curvature: self.curvature as f64 }
    }

    /// Exact centre.
    pub fn center_exact(&self) -> [BigRational; 2] {
        let k = num_bigint::BigInt::from(self.curvature);
        [BigRational::new(self.kx.into(), k.clone()), BigRational::new(self.ky.into(), k)]
    }
}

/// Worst residuals of the Descartes relations over every tangent quadruple
/// met during generation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DescartesAudit {
    pub quadruples: usize,
    /// Largest `|(Σk)² − 2Σk²|`, exact.
    pub max_curvature_residual: i128,
    /// Largest `|(Σw)² − 2Σw²|` over `w = k·centre` as Gaussian integers.
    pub max_center_residual: i128,
    /// Largest relative residual of the curvature relation in floating point.
    pub max_float_residual: f64,
}

/// The circles of the band packing with curvature at most `max_curvature`
/// whose centres lie in the period cell `[0, 2) × [0, 2)`. The packing is
/// invariant under translation by `(2, 0)` and `(0, 2)`.
#[derive(Debug, Clone)]
pub struct Packing {
    max_curvature: f64,
    circles: Vec<PackedCircle>,
    audit: DescartesAudit,
}

/// Builds the packing by Vieta jumping: within a tangent quadruple,
/// replacing one member by `2·(sum of the other three) − itself` gives the
/// other general circle tangent to the remaining three.
pub fn generate_packing(max_curvature: f64) -> Packing {
    let mut circles = vec![PackedCircle { curvature: 1, kx: 1, ky: 0 }];
    let mut audit = DescartesAudit::default();
    let root = [LEFT, RIGHT, C0, C1];
    record(&root, &mut audit);
    // The two curvilinear triangles between C0, C1 and the lines are filled
    // by replacing either line; the unit circles at (1, ±2) obtained by
    // replacing C0 or C1 are translates of C0.
    let mut stack: Vec<([Exact; 4], usize)> = Vec::new();
    for i in [0, 1] {
        let child = Exact::reflect(&root, i);
        if child.k as f64 <= max_curvature {
            let mut q = root;
            q[i] = child;
            stack.push((q, i));
        }
    }
    while let Some((quad, newest)) = stack.pop() {
        record(&quad, &mut audit);
        let c = quad[newest];
        circles.push(PackedCircle { curvature: c.k, kx: c.kx, ky: c.ky });
        for i in 0..4 {
            if i == newest {
                continue;
            }
            let child = Exact::reflect(&quad, i);
            if child.k as f64 <= max_curvature {
                let mut q = quad;
                q[i] = child;
                stack.push((q, i));
            }
        }
    }
    circles.sort_by_key(|c| (c.curvature, c.kx, c.ky));
    Packing { max_curvature, circles, audit }
}

fn record(quad: &[Exact; 4], audit: &mut DescartesAudit) {
    let ks: Vec<i128> = quad.iter().map(|c| c.k as i128).collect();
    let sum: i128 = ks.iter().sum();
    let sq: i128 = ks.iter().map(|k| k * k).sum();
    let residual = (sum * sum - 2 * sq).abs();
    // Gaussian integers w = kx + i ky: (Σw)² − 2Σw², real and imaginary parts.
    let (sx, sy) = quad.iter().fold((0i128, 0i128), |(a, b), c| (a + c.kx as i128, b + c.ky as i128));
    let (qx, qy) = quad.iter().fold((0i128, 0i128), |(a, b), c| {
        let (x, y) = (c.kx as i128, c.ky as i128);
        (a + x * x - y * y, b + 2 * x * y)
    });
    let re = sx * sx - sy * sy - 2 * qx;
    let im = 2 * sx * sy - 2 * qy;
    let fk: Vec<f64> = quad.iter().map(|c| c.k as f64).collect();
    let fsum: f64 = fk.iter().sum();
    let fres = (fsum * fsum - 2.0 * fk.iter().map(|k| k * k).sum::<f64>()).abs() / (fsum * fsum);
    audit.quadruples += 1;
    audit.max_curvature_residual = audit.max_curvature_residual.max(residual);
    audit.max_center_residual = audit.max_center_residual.max(re.abs().max(im.abs()));
    audit.max_float_residual = audit.max_float_residual.max(fres);
}

impl Packing {
    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    /// Circles with centre in the period cell, by increasing curvature.
    pub fn circles(&self) -> &[PackedCircle] {
        &self.circles
    }

    pub fn audit(&self) -> &DescartesAudit {
        &self.audit
    }

    /// All circles and lines meeting the window `[x0, x1] × [y0, y1]`,
    /// obtained by translating the period cell.
    pub fn in_window(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<GeneralCircle> {
        let mut out = Vec::new();
        let mut m = (x0 / 2.0).floor() as i64 - 1;
        while 2.0 * m as f64 <= x1 + 2.0 {
            let line = 2.0 * m as f64;
            if (x0..=x1).contains(&line) {
                out.push(GeneralCircle::Line { x: line });
            }
            let mut n = (y0 / 2.0).floor() as i64 - 1;
            while 2.0 * n as f64 <= y1 + 2.0 {
                for c in &self.circles {
                    let [cx, cy] = c.center();
                    let (cx, cy, r) = (cx + line, cy + 2.0 * n as f64, c.radius());
                    if cx + r >= x0 && cx - r <= x1 && cy + r >= y0 && cy - r <= y1 {
                        out.push(GeneralCircle::Circle { center: [cx, cy], curvature: c.curvature as f64 });
                    }
                }
                n += 1;
            }
            m += 1;
        }
        out
    }
}

/// The two general circles tangent to a pairwise tangent triple, from the
/// real and complex Descartes relations. Lines are given by their position;
/// the packing's lines are two apart so the triple's orientation is known.
pub fn soddy_circles(triple: [GeneralCircle; 3]) -> [GeneralCircle; 2] {
    // Curvature times centre, or for a line its unit normal pointing away
    // from the circles of the triple.
    let circle_x = triple.iter().find_map(|c| c.center().map(|c| c[0])).expect("a triple has a circle");
    let w = |c: &GeneralCircle| match c {
        GeneralCircle::Line { x } => Complex64::new((x - circle_x).signum(), 0.0),
        GeneralCircle::Circle { center, curvature } => Complex64::new(center[0] * curvature, center[1] * curvature),
    };
    let k: Vec<f64> = triple.iter().map(GeneralCircle::curvature).collect();
    let ws: Vec<Complex64> = triple.iter().map(w).collect();
    let ks = k[0] + k[1] + k[2];
    let kr = (k[0] * k[1] + k[1] * k[2] + k[2] * k[0]).max(0.0).sqrt();
    let wsum = ws[0] + ws[1] + ws[2];
    let wr = (ws[0] * ws[1] + ws[1] * ws[2] + ws[2] * ws[0]).sqrt();
    let centres = [wsum + 2.0 * wr, wsum - 2.0 * wr];
    let solve = |k4: f64| -> Vec<GeneralCircle> {
        if k4.abs() < 1e-12 {
            // A line, whose Descartes datum is its unit normal: tangent to the
            // triple's circle on the side the normal points to.
            let c = triple.iter().find(|c| c.center().is_some()).unwrap();
            let normal = centres.iter().min_by(|a, b| (a.norm() - 1.0).abs().total_cmp(&(b.norm() - 1.0).abs())).unwrap();
            let side = normal.re.signum();
            return vec![GeneralCircle::Line { x: c.center().unwrap()[0] + side * c.radius().unwrap() }];
        }
        let mut cands: Vec<GeneralCircle> = centres
            .iter()
            .map(|w| GeneralCircle::Circle { center: [w.re / k4, w.im / k4], curvature: k4 })
            .collect();
        cands.sort_by(|a, b| tangency_error(a, &triple).total_cmp(&tangency_error(b, &triple)));
        cands
    };
    if kr == 0.0 {
        // Both solutions share the curvature and differ in the centre.
        let both = solve(ks);
        return [both[0], *both.get(1).unwrap_or(&both[0])];
    }
    [solve(ks + 2.0 * kr)[0], solve(ks - 2.0 * kr)[0]]
}

fn tangency_error(c: &GeneralCircle, triple: &[GeneralCircle; 3]) -> f64 {
    triple
        .iter()
        .map(|t| match (c, t) {
            (GeneralCircle::Circle { center, curvature }, GeneralCircle::Line { x }) => {
                ((center[0] - x).abs() - 1.0 / curvature).abs()
            }
            (GeneralCircle::Circle { center: a, curvature: ka }, GeneralCircle::Circle { center: b, curvature: kb }) => {
                ((a[0] - b[0]).hypot(a[1] - b[1]) - 1.0 / ka - 1.0 / kb).abs()
            }
            _ => f64::INFINITY,
        })
        .sum()
}

/// Coordinates `(a − c, 2b, a + c)` of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn to_cone_coords(a: [[f64; 2]; 2]) -> ConePoint {
    ConePoint { x: a[0][0] - a[1][1], y: 2.0 * a[0][1], z: a[0][0] + a[1][1] }
}

/// Cone coordinates computed exactly and rounded once.
pub fn to_cone_coords_exact(a11: &BigRational, a12: &BigRational, a22: &BigRational) -> ConePoint {
    let two = BigRational::from_integer(2.into());
    ConePoint {
        x: exact::to_f64(&(a11 - a22)),
        y: exact::to_f64(&(&two * a12)),
        z: exact::to_f64(&(a11 + a22)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GammaClass {
    /// At the apex of a cone: a maximal integer superharmonic matrix.
    Peak,
    /// On the boundary of the down-set but not at an apex.
    Boundary,
    Interior,
    Outside,
}

impl GammaClass {
    pub fn name(&self) -> &'static str {
        match self {
            GammaClass::Peak => "peak",
            GammaClass::Boundary => "boundary",
            GammaClass::Interior => "interior",
            GammaClass::Outside => "outside",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: GammaClass,
    /// The circle whose cone decides the verdict, when there is one.
    pub witness: Option<GeneralCircle>,
    pub point: ConePoint,
    /// Height of the cone surface above `(x, y)`, relative to `z = 2`.
    pub height: f64,
    /// `z − 2 − height`: signed vertical distance to the boundary.
    pub excess: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error(
        "({x}, {y}) lies in no circle of curvature ≤ {bound}; z − 2 = {dz} cannot be resolved"
    )]
    Indeterminate { x: f64, y: f64, dz: f64, bound: f64 },
    #[error("non-finite cone coordinates")]
    NonFinite,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Locates `(x, y, z)` relative to the down-set of cones over `packing`.
pub fn classify(point: ConePoint, packing: &Packing, tol: f64) -> Result<Classification, ClassifyError> {
    if !(point.x.is_finite() && point.y.is_finite() && point.z.is_finite()) {
        return Err(ClassifyError::NonFinite);
    }
    let dz = point.z - 2.0;
    let rx = point.x.rem_euclid(2.0);
    let ry = point.y.rem_euclid(2.0);
    let shift = [point.x - rx, point.y - ry];
    // Circles with centre in the cell, plus the translate of C0 at (1, 2)
    // which covers the top of the cell.
    let translate = PackedCircle { curvature: 1, kx: 1, ky: 2 };
    let mut containing = None;
    let mut on_circle = None;
    for c in packing.circles.iter().chain(std::iter::once(&translate)) {
        let [cx, cy] = c.center();
        let r = c.radius();
        let d = (rx - cx).hypot(ry - cy);
        if d < r - tol {
            containing = Some((c, r - d));
            break;
        }
        if (d - r).abs() <= tol && on_circle.is_none() {
            on_circle = Some(c);
        }
    }
    let lift = |c: &PackedCircle| {
        let [cx, cy] = c.center();
        GeneralCircle::Circle { center: [cx + shift[0], cy + shift[1]], curvature: c.curvature as f64 }
    };
    let (height, witness) = match (containing, on_circle) {
        (Some((c, h)), _) => (h, Some(lift(c))),
        (None, Some(c)) => (0.0, Some(lift(c))),
        (None, None) => {
            // Any circle of the packing containing the point is smaller than
            // the generated ones, so its cone is lower than 1 / bound.
            let cap = 1.0 / packing.max_curvature;
            if dz < -tol {
                (0.0, None)
            } else if dz > cap + tol {
                return Ok(Classification { class: GammaClass::Outside, witness: None, point, height: cap, excess: dz - cap });
            } else {
                return Err(ClassifyError::Indeterminate { x: rx, y: ry, dz, bound: packing.max_curvature });
            }
        }
    };
    let excess = dz - height;
    let class = if excess.abs() <= tol {
        match (containing, witness) {
            (Some((c, _)), Some(_)) if (height - c.radius()).abs() <= tol => GammaClass::Peak,
            _ => GammaClass::Boundary,
        }
    } else if excess < 0.0 {
        GammaClass::Interior
    } else {
        GammaClass::Outside
    };
    Ok(Classification { class, witness, point, height, excess })
}
