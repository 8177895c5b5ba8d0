//! Worklist stabilization engine with odometer tracking.
//!
//! Unstable cells are kept in a FIFO queue and toppled in bulk: a cell
//! holding `s` grains fires `s / 4` times in one visit. By the abelian
//! property the final configuration and odometer do not depend on the
//! visiting order, so the result is identical to any legal sequential
//! schedule.

use std::collections::VecDeque;

use crate::grid::{CellGrid, GridError, Odometer, SandpileConfig};

/// Default guard on the number of topplings in a single stabilization.
pub const DEFAULT_TOPPLE_BUDGET: u64 = 10_000_000_000;

const SINK: u32 = u32::MAX;

/// Outcome of one relaxation pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Relaxation {
    /// Grains that left the domain.
    pub absorbed: i64,
    /// Total topplings performed.
    pub toppled: u64,
}

/// Reusable stabilization state for a fixed window and domain mask.
///
/// Grains sent to masked-out cells, or off the window, are absorbed by the
/// sink.
#[derive(Debug, Clone)]
pub struct Stabilizer {
    cells: Vec<u32>,
    neighbors: Vec<[u32; 4]>,
    queued: Vec<bool>,
    queue: VecDeque<u32>,
}

impl Stabilizer {
    pub fn new<V>(shape: &CellGrid<V>) -> Self {
        let n = shape.len();
        assert!(n < SINK as usize, "window too large for the stabilizer");
        let mut neighbors = vec![[SINK; 4]; n];
        let mut cells = Vec::new();
        for idx in shape.domain_indices() {
            cells.push(idx as u32);
            let p = shape.point(idx);
            for (slot, q) in p.neighbors().into_iter().enumerate() {
                if let Some(j) = shape.index(q) {
                    if shape.mask()[j] {
                        neighbors[idx][slot] = j as u32;
                    }
                }
            }
        }
        Stabilizer { cells, neighbors, queued: vec![false; n], queue: VecDeque::new() }
    }

    /// Window indices of the domain cells.
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// Stabilizes `values` in place, adding topple counts into `odometer`.
    pub fn relax(&mut self, values: &mut [i64], odometer: &mut [i64], budget: u64) -> Result<Relaxation, GridError> {
        let cells = std::mem::take(&mut self.cells);
        let out = self.relax_from(cells.iter().copied(), values, odometer, budget);
        self.cells = cells;
        out
    }

    /// Like [`Stabilizer::relax`], but only `seeds` are inspected initially.
    /// Every unstable cell must either be a seed or become unstable through
    /// a toppling.
    pub fn relax_from(
        &mut self,
        seeds: impl IntoIterator<Item = u32>,
        values: &mut [i64],
        odometer: &mut [i64],
        budget: u64,
    ) -> Result<Relaxation, GridError> {
        debug_assert_eq!(values.len(), self.neighbors.len());
        debug_assert_eq!(odometer.len(), self.neighbors.len());
        self.queue.clear();
        for c in seeds {
            let ci = c as usize;
            if values[ci] >= 4 && !self.queued[ci] {
                self.queued[ci] = true;
                self.queue.push_back(c);
            }
        }
        let mut out = Relaxation::default();
        while let Some(c) = self.queue.pop_front() {
            let ci = c as usize;
            self.queued[ci] = false;
            let fires = values[ci] / 4;
            if fires == 0 {
                continue;
            }
            values[ci] -= 4 * fires;
            odometer[ci] += fires;
            out.toppled += fires as u64;
            if out.toppled > budget {
                self.queued.iter_mut().for_each(|q| *q = false);
                self.queue.clear();
                return Err(GridError::BudgetExceeded(budget));
            }
            for &n in &self.neighbors[ci] {
                if n == SINK {
                    out.absorbed += fires;
                    continue;
                }
                let ni = n as usize;
                values[ni] += fires;
                if values[ni] >= 4 && !self.queued[ni] {
                    self.queued[ni] = true;
                    self.queue.push_back(n);
                }
            }
        }
        Ok(out)
    }
}

/// Result of [`stabilize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilized {
    pub config: SandpileConfig,
    pub odometer: Odometer,
    /// Grains absorbed by the sink.
    pub absorbed: i64,
}

pub fn stabilize(sigma: &SandpileConfig) -> Result<Stabilized, GridError> {
    stabilize_with_budget(sigma, DEFAULT_TOPPLE_BUDGET)
}

pub fn stabilize_with_budget(sigma: &SandpileConfig, budget: u64) -> Result<Stabilized, GridError> {
    let mut engine = Stabilizer::new(sigma.grid());
    let mut config = sigma.clone();
    let mut odo = sigma.grid().map(|_| 0i64);
    let relax = engine.relax(config.values_mut(), odo.values_mut(), budget)?;
    Ok(Stabilized { config, odometer: Odometer::from_grid(odo), absorbed: relax.absorbed })
}

/// Sandpile group operation: pointwise sum followed by stabilization.
pub fn group_add(a: &SandpileConfig, b: &SandpileConfig) -> Result<SandpileConfig, GridError> {
    Ok(stabilize(&a.add(b)?)?.config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian_grid, Extension, LatticePoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(half: i64) -> CellGrid<i64> {
        CellGrid::filled(LatticePoint::new(-half, -half), (2 * half + 1) as usize, (2 * half + 1) as usize, 0)
            .unwrap()
    }

    fn point_mass(half: i64, grains: i64) -> SandpileConfig {
        let mut g = square(half);
        *g.get_mut(LatticePoint::ORIGIN).unwrap() = grains;
        SandpileConfig::new(g).unwrap()
    }

    /// Topples one randomly chosen unstable site at a time, optionally
    /// several times in a row.
    fn random_schedule(sigma: &SandpileConfig, rng: &mut ChaCha8Rng, batch: bool) -> (Vec<i64>, Vec<i64>) {
        let g = sigma.grid();
        let mut s = sigma.values().to_vec();
        let mut u = vec![0i64; s.len()];
        loop {
            let unstable: Vec<usize> = g.domain_indices().filter(|&i| s[i] >= 4).collect();
            if unstable.is_empty() {
                return (s, u);
            }
            let i = unstable[rng.random_range(0..unstable.len())];
            let times = if batch { rng.random_range(1..=s[i] / 4) } else { 1 };
            s[i] -= 4 * times;
            u[i] += times;
            for q in g.point(i).neighbors() {
                if let Some(j) = g.index(q) {
                    if g.mask()[j] {
                        s[j] += times;
                    }
                }
            }
        }
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> SandpileConfig {
        let w = rng.random_range(1..7);
        let h = rng.random_range(1..7);
        let mut g = CellGrid::from_fn(LatticePoint::new(-2, 3), w, h, |_| rng.random_range(0..12)).unwrap();
        let mask = (0..w * h).map(|_| rng.random_bool(0.8)).collect();
        g.set_mask(mask).unwrap();
        SandpileConfig::new(g).unwrap()
    }

    #[test]
    fn single_topple() {
        let out = stabilize(&point_mass(3, 4)).unwrap();
        assert_eq!(out.config.get(LatticePoint::ORIGIN), Some(0));
        for q in LatticePoint::ORIGIN.neighbors() {
            assert_eq!(out.config.get(q), Some(1));
        }
        assert_eq!(out.odometer.get(LatticePoint::ORIGIN), Some(1));
        assert_eq!(out.odometer.total_toppled(), 1);
    }

    #[test]
    fn stable_input_is_unchanged() {
        let g = CellGrid::from_fn(LatticePoint::ORIGIN, 5, 4, |p| (p.x + p.y).rem_euclid(4)).unwrap();
        let s = SandpileConfig::new(g).unwrap();
        let out = stabilize(&s).unwrap();
        assert_eq!(out.config, s);
        assert_eq!(out.odometer.total_toppled(), 0);
    }

    #[test]
    fn eight_grains_topple_twice() {
        let s = point_mass(3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (brute, brute_u) = random_schedule(&s, &mut rng, false);
        let out = stabilize(&s).unwrap();
        assert_eq!(out.config.values(), brute.as_slice());
        assert_eq!(out.odometer.grid().values(), brute_u.as_slice());
        assert_eq!(out.config.get(LatticePoint::ORIGIN), Some(0));
        for q in LatticePoint::ORIGIN.neighbors() {
            assert_eq!(out.config.get(q), Some(2));
        }
        assert_eq!(out.odometer.get(LatticePoint::ORIGIN), Some(2));
    }

    #[test]
    fn budget_guard_trips() {
        let s = point_mass(5, 400);
        assert_eq!(stabilize_with_budget(&s, 10), Err(GridError::BudgetExceeded(10)));
    }

    #[test]
    fn abelian_and_least_action_against_random_schedules() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..12 {
            let s = random_instance(&mut rng);
            let out = stabilize(&s).unwrap();
            for trial in 0..10 {
                let (fin, u) = random_schedule(&s, &mut rng, trial % 2 == 1);
                assert_eq!(out.config.values(), fin.as_slice());
                assert_eq!(out.odometer.grid().values(), u.as_slice());
            }
        }
    }

    #[test]
    fn group_add_zero_is_zero() {
        let z = SandpileConfig::zeros(&square(2));
        assert_eq!(group_add(&z, &z).unwrap(), z);
    }

    proptest! {
        #[test]
        fn conservation_and_odometer_linearity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_instance(&mut rng);
            let out = stabilize(&s).unwrap();
            prop_assert!(out.config.is_stable());
            prop_assert_eq!(s.total_grains(), out.config.total_grains() + out.absorbed);
            prop_assert_eq!(
                out.odometer.total_toppled() as i64,
                out.odometer.grid().values().iter().sum::<i64>()
            );
            let lap = laplacian_grid(out.odometer.grid(), &Extension::Zero).unwrap();
            for idx in s.grid().domain_indices() {
                prop_assert_eq!(out.config.values()[idx], s.values()[idx] + lap.values()[idx]);
            }
        }
    }
}
