//! Classification of `r`-good points: cells whose open `r`-ball matches some
//! translate of the pattern exactly.

use rayon::prelude::*;

use crate::geometry::{distance_to_boundary, g_set, EllipseDomain};
use crate::grid::{CellGrid, LatticePoint, SandpileConfig};
use crate::pattern::PatternTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Goodness {
    /// Outside the domain or closer than `r` to the boundary.
    Ineligible,
    Bad,
    Good,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessReport {
    pub r: u32,
    /// `|G_r|`.
    pub eligible: usize,
    pub good: usize,
    /// `1 − good/eligible`, and 1 when `G_r` is empty.
    pub f: f64,
    pub flags: CellGrid<Goodness>,
}

impl GoodnessReport {
    fn from_flags(r: u32, flags: CellGrid<Goodness>) -> Self {
        let eligible = flags.values().iter().filter(|&&g| g != Goodness::Ineligible).count();
        let good = flags.values().iter().filter(|&&g| g == Goodness::Good).count();
        let f = if eligible == 0 { 1.0 } else { 1.0 - good as f64 / eligible as f64 };
        GoodnessReport { r, eligible, good, f, flags }
    }

    /// Whether every cell good here is good in `smaller`, a report for a
    /// radius no larger than this one on the same configuration.
    pub fn refines(&self, smaller: &GoodnessReport) -> bool {
        smaller.r <= self.r
            && self
                .flags
                .values()
                .iter()
                .zip(smaller.flags.values())
                .all(|(&big, &small)| big != Goodness::Good || small == Goodness::Good)
    }
}

/// Half-widths of the rows of the open ball `|o| < r`: entry `dy + r − 1`
/// is the largest `w` with `w² + dy² < r²`.
fn ball_rows(r: u32) -> Vec<i64> {
    let r = r as i64;
    (1 - r..r)
        .map(|dy| {
            let mut w = 0;
            while (w + 1) * (w + 1) + dy * dy < r * r {
                w += 1;
            }
            w
        })
        .collect()
}

/// Classifies every cell of `G_r` as `r`-good or not.
///
/// For each of the `det` translates of the pattern, mismatches with `e` are
/// accumulated in row prefix sums, so each ball is tested in `O(r)` per
/// translate.
pub fn classify_r_good(e: &SandpileConfig, domain: &EllipseDomain, pattern: &PatternTable, r: u32) -> GoodnessReport {
    assert!(r >= 1, "r must be positive");
    let grid = e.grid();
    let (w, h) = (grid.width(), grid.height());
    let lattice = pattern.lattice();
    let det = lattice.det() as usize;
    let prefix: Vec<Vec<u32>> = (0..det)
        .into_par_iter()
        .map(|s| {
            let shift = lattice.coset_representative(s);
            let mut p = vec![0u32; h * (w + 1)];
            for row in 0..h {
                for col in 0..w {
                    let i = row * w + col;
                    let miss = grid.mask()[i] && grid.values()[i] != pattern.value_at(grid.point(i) - shift) as i64;
                    p[row * (w + 1) + col + 1] = p[row * (w + 1) + col] + miss as u32;
                }
            }
            p
        })
        .collect();
    let rows = ball_rows(r);
    let reach = r as i64 - 1;
    let eligible = g_set(domain, r as f64);
    let flags: Vec<Goodness> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !grid.mask()[i] || !eligible.values()[i] {
                return Goodness::Ineligible;
            }
            let (row, col) = ((i / w) as i64, (i % w) as i64);
            let matches = |p: &Vec<u32>| {
                rows.iter().enumerate().all(|(j, &half)| {
                    let y = (row + j as i64 - reach) as usize * (w + 1);
                    p[y + (col + half + 1) as usize] == p[y + (col - half) as usize]
                })
            };
            if prefix.iter().any(matches) {
                Goodness::Good
            } else {
                Goodness::Bad
            }
        })
        .collect();
    let flags = CellGrid::from_parts(grid.origin(), w, h, flags, grid.mask().to_vec()).expect("same shape as e");
    GoodnessReport::from_flags(r, flags)
}

/// A direct per-point checker: lattice membership by Cramer's rule, the
/// pattern looked up by scanning its entries, and every ball enumerated
/// afresh. Shares no code with [`classify_r_good`].
pub fn classify_r_good_naive(
    e: &SandpileConfig,
    domain: &EllipseDomain,
    pattern: &PatternTable,
    r: u32,
) -> GoodnessReport {
    let u = pattern.lattice().u1();
    let v = pattern.lattice().u2();
    let d = u[0] * v[1] - u[1] * v[0];
    let in_lattice = |z: LatticePoint| (z.x * v[1] - z.y * v[0]) % d == 0 && (u[0] * z.y - u[1] * z.x) % d == 0;
    let entries = pattern.entries();
    let anchor = pattern.anchor();
    let lookup = |z: LatticePoint| -> i64 {
        entries.iter().find(|(q, _)| in_lattice(z - anchor - *q)).map(|&(_, val)| val as i64).expect("entries cover Z²")
    };
    let spec = domain.spec();
    let grid = e.grid();
    let r = r as i64;
    let flags: Vec<Goodness> = (0..grid.len())
        .map(|i| {
            if !grid.mask()[i] {
                return Goodness::Ineligible;
            }
            let x = grid.point(i);
            if distance_to_boundary(x.to_f64(), spec) < r as f64 {
                return Goodness::Ineligible;
            }
            let fits = |t: LatticePoint| {
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx * dx + dy * dy >= r * r {
                            continue;
                        }
                        let y = LatticePoint::new(x.x + dx, x.y + dy);
                        if e.get(y) != Some(lookup(y - t)) {
                            return false;
                        }
                    }
                }
                true
            };
            if entries.iter().any(|&(t, _)| fits(t)) {
                Goodness::Good
            } else {
                Goodness::Bad
            }
        })
        .collect();
    let flags = CellGrid::from_parts(grid.origin(), grid.width(), grid.height(), flags, grid.mask().to_vec())
        .expect("same shape as e");
    GoodnessReport::from_flags(r as u32, flags)
}
