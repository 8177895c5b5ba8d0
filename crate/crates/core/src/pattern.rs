//! Detection of the periodic pattern in the interior of an identity
//! element, and extraction of one period as a table.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{boundary_distances, EllipseDomain};
use crate::grid::{CellGrid, LatticePoint, SandpileConfig};
use crate::lattice::PeriodLattice;

pub const DEFAULT_SEARCH_RADIUS: i64 = 48;
pub const DEFAULT_WINDOWS: usize = 5;
/// Windows are never smaller than this, even on small domains.
pub const MIN_WINDOW_SIDE: i64 = 4;
const GLOBAL_CANDIDATES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("no interior window has a rank-2 group of periods")]
    NoPeriodFound,
    #[error("every candidate window contains a defect")]
    InconsistentRegion,
    #[error("configuration and domain have different shapes")]
    Shape,
}

/// One period of a biperiodic pattern. The value at `y` is
/// `values[lattice.coset_index(y - anchor)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternTable {
    lattice: PeriodLattice,
    values: Vec<u8>,
    anchor: LatticePoint,
}

impl PatternTable {
    /// Builds a table from values indexed by absolute coset, then picks the
    /// canonical phase: the translate whose value vector is smallest.
    pub fn new(lattice: PeriodLattice, absolute: Vec<u8>) -> Self {
        assert_eq!(absolute.len(), lattice.det() as usize);
        let n = absolute.len();
        let shifted = |s: usize| -> Vec<u8> {
            let o = lattice.coset_representative(s);
            (0..n).map(|i| absolute[lattice.coset_index(lattice.coset_representative(i) + o)]).collect()
        };
        let (s, values) = (0..n).map(|s| (s, shifted(s))).min_by(|a, b| a.1.cmp(&b.1)).expect("det ≥ 1");
        PatternTable { lattice, values, anchor: lattice.coset_representative(s) }
    }

    pub fn lattice(&self) -> &PeriodLattice {
        &self.lattice
    }

    /// Values by coset index relative to the anchor.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn anchor(&self) -> LatticePoint {
        self.anchor
    }

    pub fn value_at(&self, y: LatticePoint) -> u8 {
        self.values[self.lattice.coset_index(y - self.anchor)]
    }

    /// `(coset representative, value)` pairs, relative to the anchor.
    pub fn entries(&self) -> Vec<(LatticePoint, u8)> {
        (0..self.values.len()).map(|i| (self.lattice.coset_representative(i), self.values[i])).collect()
    }

    pub fn histogram(&self) -> [usize; 4] {
        let mut h = [0; 4];
        for &v in &self.values {
            h[v as usize] += 1;
        }
        h
    }
}

/// The interior square windows used for detection: side
/// `max(⌊r₂/3⌋, 4)`, laid out on a staggered grid around the centre and
/// kept when every cell lies in `G_{r₂/2}`, nearest first.
fn windows(domain: &EllipseDomain, dist: &CellGrid<f64>, side: i64, count: usize) -> Vec<LatticePoint> {
    let r2 = domain.spectrum().r2;
    let [px, py] = domain.spec().center_f64();
    let (cx, cy) = (px.round() as i64 - side / 2, py.round() as i64 - side / 2);
    let reach = (domain.spectrum().r1 / side as f64).ceil() as i64 + 1;
    let mut corners = Vec::new();
    for j in -reach..=reach {
        for i in -reach..=reach {
            let stagger = if j.rem_euclid(2) == 1 { side / 2 } else { 0 };
            corners.push(LatticePoint::new(cx + i * side + stagger, cy + j * side));
        }
    }
    let centre = |c: &LatticePoint| {
        let (dx, dy) = ((c.x + side / 2 - cx - side / 2) as f64, (c.y + side / 2 - cy - side / 2) as f64);
        dx * dx + dy * dy
    };
    corners.sort_by(|a, b| centre(a).total_cmp(&centre(b)).then(a.cmp(b)));
    let inside = |c: &LatticePoint| {
        (0..side).all(|dy| {
            (0..side).all(|dx| dist.get(LatticePoint::new(c.x + dx, c.y + dy)).is_some_and(|&d| d >= r2 / 2.0))
        })
    };
    corners.into_iter().filter(inside).take(count).collect()
}

fn window_side(domain: &EllipseDomain) -> i64 {
    ((domain.spectrum().r2 / 3.0).floor() as i64).max(MIN_WINDOW_SIDE)
}

fn value(e: &CellGrid<i64>, p: LatticePoint) -> Option<i64> {
    e.index(p).filter(|&i| e.mask()[i]).map(|i| e.values()[i])
}

/// All `t` with `|t|_∞ ≤ radius` such that `e(x + t) = e(x)` for every
/// `x` in the window.
fn window_periods(e: &CellGrid<i64>, corner: LatticePoint, side: i64, radius: i64) -> Vec<[i64; 2]> {
    let cells: Vec<(LatticePoint, i64)> = (0..side)
        .flat_map(|dy| (0..side).map(move |dx| corner + LatticePoint::new(dx, dy)))
        .map(|p| (p, value(e, p).expect("window inside the domain")))
        .collect();
    let mut periods = Vec::new();
    for ty in -radius..=radius {
        for tx in -radius..=radius {
            if (tx, ty) == (0, 0) {
                continue;
            }
            let t = LatticePoint::new(tx, ty);
            if cells.iter().all(|&(p, v)| value(e, p + t) == Some(v)) {
                periods.push([tx, ty]);
            }
        }
    }
    periods
}

/// Fraction of validation cells `x` with `x + u` in the domain and
/// `e(x + u) = e(x)`.
fn match_fraction(e: &CellGrid<i64>, region: &[LatticePoint], u: [i64; 2]) -> f64 {
    let t = LatticePoint::new(u[0], u[1]);
    let hit = region.iter().filter(|&&x| value(e, x + t).is_some_and(|w| Some(w) == value(e, x))).count();
    hit as f64 / region.len().max(1) as f64
}

/// The `count` translations in the upper half of the search box with the
/// highest match fraction over `region`.
fn best_translations(e: &CellGrid<i64>, region: &[LatticePoint], radius: i64, count: usize) -> Vec<[i64; 2]> {
    let half: Vec<[i64; 2]> = (0..=radius)
        .flat_map(|ty| (-radius..=radius).map(move |tx| [tx, ty]))
        .filter(|t| t[1] > 0 || t[0] > 0)
        .collect();
    let mut scored: Vec<(f64, [i64; 2])> = half.into_par_iter().map(|t| (match_fraction(e, region, t), t)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(count).map(|(_, t)| t).collect()
}

fn validation_region(dist: &CellGrid<f64>, r2: f64) -> Vec<LatticePoint> {
    dist.domain_indices().filter(|&i| dist.values()[i] >= r2 / 2.0).map(|i| dist.point(i)).collect()
}

fn check_shape(e: &SandpileConfig, domain: &EllipseDomain) -> Result<(), PatternError> {
    if e.grid().same_shape(domain.domain().shape()) {
        Ok(())
    } else {
        Err(PatternError::Shape)
    }
}

/// Finds the period lattice of the pattern dominating the interior of `e`.
///
/// Each window yields the group generated by its periods. Interior defects
/// can spoil every window on small domains, so the groups spanned by pairs
/// of the translations that agree best with `e` over `G_{r₂/2}` are also
/// candidates. The candidate whose reduced basis vectors agree best wins,
/// ties going to the smaller index.
pub fn detect_period_lattice(
    e: &SandpileConfig,
    domain: &EllipseDomain,
    search_radius: i64,
    window_count: usize,
) -> Result<PeriodLattice, PatternError> {
    check_shape(e, domain)?;
    let dist = boundary_distances(domain);
    let side = window_side(domain);
    let grid = e.grid();
    let corners = windows(domain, &dist, side, window_count);
    let mut candidates: Vec<PeriodLattice> = corners
        .par_iter()
        .filter_map(|&c| PeriodLattice::from_generators(&window_periods(grid, c, side, search_radius)))
        .collect();
    let region = validation_region(&dist, domain.spectrum().r2);
    let top = best_translations(grid, &region, search_radius, GLOBAL_CANDIDATES);
    for (i, &u) in top.iter().enumerate() {
        for &w in &top[i + 1..] {
            candidates.extend(PeriodLattice::from_basis(u, w));
        }
    }
    candidates.sort_by_key(|l| (l.det(), l.u1(), l.u2()));
    candidates.dedup();
    let score = |l: &PeriodLattice| match_fraction(grid, &region, l.u1()).min(match_fraction(grid, &region, l.u2()));
    let mut best: Option<(f64, PeriodLattice)> = None;
    for l in candidates {
        let s = score(&l);
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, l));
        }
    }
    best.map(|(_, l)| l).ok_or(PatternError::NoPeriodFound)
}

/// Side of the smallest square that meets every coset of `lattice`.
fn covering_side(lattice: &PeriodLattice) -> i64 {
    let det = lattice.det() as usize;
    (1..)
        .find(|&s| {
            let mut seen = vec![false; det];
            for y in 0..s {
                for x in 0..s {
                    seen[lattice.coset_index(LatticePoint::new(x, y))] = true;
                }
            }
            seen.iter().all(|&b| b)
        })
        .expect("a square of side det covers every coset")
}

/// The coset values read from a square window, or `None` if two cells of
/// one coset disagree.
fn read_window(e: &CellGrid<i64>, lattice: &PeriodLattice, corner: LatticePoint, side: i64) -> Option<Vec<u8>> {
    let mut table: Vec<Option<u8>> = vec![None; lattice.det() as usize];
    for dy in 0..side {
        for dx in 0..side {
            let p = corner + LatticePoint::new(dx, dy);
            let v = value(e, p).expect("window inside the domain") as u8;
            let slot = &mut table[lattice.coset_index(p)];
            match slot {
                Some(w) if *w != v => return None,
                _ => *slot = Some(v),
            }
        }
    }
    table.into_iter().collect()
}

/// Reads one period of `e` from an interior window. Windows whose cells
/// disagree within a coset are skipped; among consistent windows the one
/// whose table matches `e` best over `G_{r₂/2}` is used. When every
/// detection window contains a defect, squares one wider than the smallest
/// square meeting every coset are tried at each interior position instead.
pub fn extract_pattern(
    e: &SandpileConfig,
    lattice: &PeriodLattice,
    domain: &EllipseDomain,
) -> Result<PatternTable, PatternError> {
    check_shape(e, domain)?;
    let dist = boundary_distances(domain);
    let grid = e.grid();
    let r2 = domain.spectrum().r2;
    let region = validation_region(&dist, r2);
    // One cell wider than needed, so every window can contradict itself.
    let small = covering_side(lattice) + 1;
    let side = window_side(domain).max(small);
    let pick = |tables: Vec<Vec<u8>>| {
        tables
            .into_iter()
            .map(|t| (region.iter().filter(|&&x| value(grid, x) == Some(t[lattice.coset_index(x)] as i64)).count(), t))
            .fold(None, |best: Option<(usize, Vec<u8>)>, (h, t)| match best {
                Some((b, _)) if b >= h => best,
                _ => Some((h, t)),
            })
            .map(|(_, t)| t)
    };
    let spread: Vec<Vec<u8>> =
        windows(domain, &dist, side, DEFAULT_WINDOWS).into_iter().filter_map(|c| read_window(grid, lattice, c, side)).collect();
    let table = pick(spread).or_else(|| {
        let inside = |c: LatticePoint| {
            (0..small).all(|dy| (0..small).all(|dx| dist.get(c + LatticePoint::new(dx, dy)).is_some_and(|&d| d >= r2 / 2.0)))
        };
        let sliding: Vec<Vec<u8>> =
            region.iter().filter(|&&c| inside(c)).filter_map(|&c| read_window(grid, lattice, c, small)).collect();
        pick(sliding)
    });
    table.map(|t| PatternTable::new(*lattice, t)).ok_or(PatternError::InconsistentRegion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, EllipseSpec};
    use crate::identity::identity_boundary_source;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(k: &str) -> EllipseDomain {
        build_domain(&EllipseSpec::parse("1", "0", "1", k).unwrap()).unwrap()
    }

    fn tiled(domain: &EllipseDomain, lattice: &PeriodLattice, table: &[u8]) -> SandpileConfig {
        let shape = domain.domain().shape();
        let grid = shape.map(|_| 0i64);
        let values: Vec<i64> = (0..grid.len()).map(|i| table[lattice.coset_index(grid.point(i))] as i64).collect();
        let grid = CellGrid::from_parts(grid.origin(), grid.width(), grid.height(), values, grid.mask().to_vec()).unwrap();
        SandpileConfig::new(grid).unwrap()
    }

    #[test]
    fn recovers_synthetic_tiling() {
        let lattice = PeriodLattice::from_basis([3, 1], [-1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let table: Vec<u8> = (0..7).map(|_| rng.random_range(0..4)).collect();
        let domain = disc("800");
        let e = tiled(&domain, &lattice, &table);
        let found = detect_period_lattice(&e, &domain, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS).unwrap();
        assert_eq!(found, lattice);
        assert_eq!(found.det(), 7);
        let pattern = extract_pattern(&e, &found, &domain).unwrap();
        for p in domain.domain().points() {
            assert_eq!(pattern.value_at(p) as i64, e.get(p).unwrap());
        }
    }

    #[test]
    fn constant_grid_has_unit_lattice() {
        let domain = disc("200");
        let e = SandpileConfig::constant(domain.domain().shape(), 2).unwrap();
        let l = detect_period_lattice(&e, &domain, 10, 3).unwrap();
        assert_eq!(l, PeriodLattice::unit());
        let p = extract_pattern(&e, &l, &domain).unwrap();
        assert_eq!(p.values(), &[2]);
    }

    #[test]
    fn table_is_phase_independent() {
        let lattice = PeriodLattice::from_basis([4, 0], [1, 2]).unwrap();
        let table = [0, 3, 1, 2, 2, 3, 3, 1];
        let a = PatternTable::new(lattice, table.to_vec());
        for s in 0..8 {
            let o = lattice.coset_representative(s);
            let moved: Vec<u8> = (0..8).map(|i| table[lattice.coset_index(lattice.coset_representative(i) + o)]).collect();
            let b = PatternTable::new(lattice, moved);
            assert_eq!(a.values(), b.values());
            for y in [LatticePoint::new(0, 0), LatticePoint::new(5, -3)] {
                assert_eq!(b.value_at(y), table[lattice.coset_index(y + o)]);
            }
        }
        // Lattice translates of the absolute table are the same table.
        assert_eq!(PatternTable::new(lattice, table.to_vec()), a);
    }

    #[test]
    fn defect_window_reports_inconsistency() {
        let domain = disc("50");
        let mut grid = domain.domain().shape().map(|_| 3i64);
        for i in 0..grid.len() {
            let p = grid.point(i);
            grid.values_mut()[i] = if (p.x + p.y).rem_euclid(2) == 0 { 1 } else { 3 };
        }
        let e = SandpileConfig::new(grid).unwrap();
        // Claiming period Z² contradicts the checkerboard everywhere.
        assert_eq!(extract_pattern(&e, &PeriodLattice::unit(), &domain), Err(PatternError::InconsistentRegion));
    }

    fn detected(a11: &str, a12: &str, a22: &str, k: &str) -> (EllipseDomain, SandpileConfig, PeriodLattice) {
        let d = build_domain(&EllipseSpec::parse(a11, a12, a22, k).unwrap()).unwrap();
        let e = identity_boundary_source(d.domain()).unwrap().e;
        let l = detect_period_lattice(&e, &d, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS).unwrap();
        (d, e, l)
    }

    #[test]
    fn fig1a_lattice_is_stable_in_k() {
        let (_, _, small) = detected("10/9", "1/3", "1", "100");
        let (_, _, large) = detected("10/9", "1/3", "1", "324");
        assert_eq!(small, large);
    }

    #[test]
    fn tile_size_is_inverse_trace_excess() {
        // One tile of the pattern has (Tr A - 2)^-1 cells.
        for (a11, a12, a22, k, trace) in
            [("5/4", "1/2", "1", "1024", 9.0f64 / 4.0), ("10/9", "1/3", "1", "324", 19.0 / 9.0), ("4/3", "1/2", "3/4", "1600", 25.0 / 12.0)]
        {
            let (_, _, l) = detected(a11, a12, a22, k);
            assert_eq!(l.det() as f64, (1.0 / (trace - 2.0)).round(), "{a11} {a12} {a22}");
        }
    }

    #[test]
    fn fig2_pattern_is_stable_across_windows() {
        let (d, e, l) = detected("5/4", "1/2", "1", "1024");
        let p = extract_pattern(&e, &l, &d).unwrap();
        assert_eq!(p.values().len(), 4);
        assert_eq!(p.histogram(), [1, 0, 0, 3]);
        let dist = boundary_distances(&d);
        let side = window_side(&d);
        let tables: Vec<PatternTable> = windows(&d, &dist, side, DEFAULT_WINDOWS)
            .into_iter()
            .filter_map(|c| read_window(e.grid(), &l, c, side))
            .map(|t| PatternTable::new(l, t))
            .collect();
        assert!(tables.len() >= 3);
        assert!(tables.iter().all(|t| t.values() == p.values()));
    }
}
