//! Bounded lattice windows, grain configurations and the discrete Laplacian.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A site of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    /// The four axis-adjacent sites, in the order east, west, north, south.
    pub const fn neighbors(self) -> [LatticePoint; 4] {
        [
            LatticePoint::new(self.x + 1, self.y),
            LatticePoint::new(self.x - 1, self.y),
            LatticePoint::new(self.x, self.y + 1),
            LatticePoint::new(self.x, self.y - 1),
        ]
    }

    pub const fn norm_sq(self) -> i64 {
        self.x * self.x + self.y * self.y
    }

    pub fn to_f64(self) -> [f64; 2] {
        [self.x as f64, self.y as f64]
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("lattice point {0} cannot be resolved inside the window")]
    OutOfWindow(LatticePoint),
    #[error("grids do not share the same window and domain mask")]
    DomainMismatch,
    #[error("negative grain count {value} at {at}")]
    NegativeGrains { at: LatticePoint, value: i64 },
    #[error("window must have positive width and height (got {width}x{height})")]
    EmptyWindow { width: usize, height: usize },
    #[error("value buffer has {got} cells but the window needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("stabilization exceeded the budget of {0} topplings")]
    BudgetExceeded(u64),
}

/// A dense rectangular window of the lattice with a per-cell domain flag.
///
/// Cell `(i, j)` sits at lattice point `origin + (i, j)` and is stored at
/// `j * width + i`, so row 0 is the bottom row of the window.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellGrid<V> {
    origin: LatticePoint,
    width: usize,
    height: usize,
    values: Vec<V>,
    mask: Vec<bool>,
}

impl<V: Clone> CellGrid<V> {
    /// A window where every cell is in the domain and holds `fill`.
    pub fn filled(origin: LatticePoint, width: usize, height: usize, fill: V) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyWindow { width, height });
        }
        Ok(CellGrid {
            origin,
            width,
            height,
            values: vec![fill; width * height],
            mask: vec![true; width * height],
        })
    }

    /// Same window and mask as `self`, every value replaced by `fill`.
    pub fn with_fill<W: Clone>(&self, fill: W) -> CellGrid<W> {
        CellGrid {
            origin: self.origin,
            width: self.width,
            height: self.height,
            values: vec![fill; self.values.len()],
            mask: self.mask.clone(),
        }
    }
}

impl<V> CellGrid<V> {
    pub fn from_fn(
        origin: LatticePoint,
        width: usize,
        height: usize,
        mut f: impl FnMut(LatticePoint) -> V,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyWindow { width, height });
        }
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                values.push(f(origin + LatticePoint::new(i as i64, j as i64)));
            }
        }
        Ok(CellGrid { origin, width, height, values, mask: vec![true; width * height] })
    }

    pub fn from_parts(
        origin: LatticePoint,
        width: usize,
        height: usize,
        values: Vec<V>,
        mask: Vec<bool>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyWindow { width, height });
        }
        let expected = width * height;
        for got in [values.len(), mask.len()] {
            if got != expected {
                return Err(GridError::LengthMismatch { expected, got });
            }
        }
        Ok(CellGrid { origin, width, height, values, mask })
    }

    pub fn origin(&self) -> LatticePoint {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of cells in the window (inside or outside the domain).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, p: LatticePoint) -> Option<usize> {
        let i = p.x - self.origin.x;
        let j = p.y - self.origin.y;
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            return None;
        }
        Some(j as usize * self.width + i as usize)
    }

    pub fn point(&self, idx: usize) -> LatticePoint {
        let i = (idx % self.width) as i64;
        let j = (idx / self.width) as i64;
        self.origin + LatticePoint::new(i, j)
    }

    pub fn get(&self, p: LatticePoint) -> Option<&V> {
        self.index(p).map(|i| &self.values[i])
    }

    pub fn get_mut(&mut self, p: LatticePoint) -> Option<&mut V> {
        self.index(p).map(move |i| &mut self.values[i])
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [V] {
        &mut self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn set_mask(&mut self, mask: Vec<bool>) -> Result<(), GridError> {
        if mask.len() != self.values.len() {
            return Err(GridError::LengthMismatch { expected: self.values.len(), got: mask.len() });
        }
        self.mask = mask;
        Ok(())
    }

    /// True when `p` lies in the window and is flagged as part of the domain.
    pub fn in_domain(&self, p: LatticePoint) -> bool {
        self.index(p).is_some_and(|i| self.mask[i])
    }

    /// Window indices of all domain cells, in storage order.
    pub fn domain_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn domain_points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        self.domain_indices().map(|i| self.point(i))
    }

    pub fn domain_len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Same origin, dimensions and mask.
    pub fn same_shape<W>(&self, other: &CellGrid<W>) -> bool {
        self.origin == other.origin
            && self.width == other.width
            && self.height == other.height
            && self.mask == other.mask
    }

    pub fn map<W>(&self, mut f: impl FnMut(&V) -> W) -> CellGrid<W> {
        CellGrid {
            origin: self.origin,
            width: self.width,
            height: self.height,
            values: self.values.iter().map(&mut f).collect(),
            mask: self.mask.clone(),
        }
    }
}

/// How to read a field at sites that are not domain cells of the window.
pub enum Extension<'a> {
    /// Masked-out cells use their stored value; sites off the window are an error.
    Strict,
    /// Every non-domain site reads as zero.
    Zero,
    /// Every non-domain site reads as `f(site)`.
    With(&'a dyn Fn(LatticePoint) -> i64),
}

fn read(f: &CellGrid<i64>, p: LatticePoint, ext: &Extension<'_>) -> Result<i64, GridError> {
    match f.index(p) {
        Some(i) if f.mask[i] => Ok(f.values[i]),
        Some(i) => match ext {
            Extension::Strict => Ok(f.values[i]),
            Extension::Zero => Ok(0),
            Extension::With(g) => Ok(g(p)),
        },
        None => match ext {
            Extension::Strict => Err(GridError::OutOfWindow(p)),
            Extension::Zero => Ok(0),
            Extension::With(g) => Ok(g(p)),
        },
    }
}

/// `-4 f(x) + sum of f over the four neighbours of x`.
pub fn laplacian(f: &CellGrid<i64>, x: LatticePoint, ext: &Extension<'_>) -> Result<i64, GridError> {
    let centre = read(f, x, ext)?;
    let mut sum = -4 * centre;
    for y in x.neighbors() {
        sum += read(f, y, ext)?;
    }
    Ok(sum)
}

/// Laplacian evaluated on every domain cell; cells outside the domain hold 0.
pub fn laplacian_grid(f: &CellGrid<i64>, ext: &Extension<'_>) -> Result<CellGrid<i64>, GridError> {
    let mut out = f.with_fill(0i64);
    for idx in f.domain_indices() {
        out.values[idx] = laplacian(f, f.point(idx), ext)?;
    }
    Ok(out)
}

/// Grain counts on a domain. Cells outside the domain always hold 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SandpileConfig {
    grid: CellGrid<i64>,
}

impl SandpileConfig {
    /// Validates that every domain cell is non-negative and clears the
    /// cells outside the domain.
    pub fn new(mut grid: CellGrid<i64>) -> Result<Self, GridError> {
        for idx in 0..grid.values.len() {
            if !grid.mask[idx] {
                grid.values[idx] = 0;
            } else if grid.values[idx] < 0 {
                return Err(GridError::NegativeGrains { at: grid.point(idx), value: grid.values[idx] });
            }
        }
        Ok(SandpileConfig { grid })
    }

    /// The all-zero configuration on the window and mask of `shape`.
    pub fn zeros<V>(shape: &CellGrid<V>) -> Self {
        SandpileConfig { grid: shape.map(|_| 0) }
    }

    /// `value` grains on every domain cell of `shape`.
    pub fn constant<V>(shape: &CellGrid<V>, value: i64) -> Result<Self, GridError> {
        let mut grid = shape.map(|_| value);
        for (v, &m) in grid.values.iter_mut().zip(shape.mask.iter()) {
            if !m {
                *v = 0;
            }
        }
        SandpileConfig::new(grid)
    }

    pub fn grid(&self) -> &CellGrid<i64> {
        &self.grid
    }

    pub fn into_grid(self) -> CellGrid<i64> {
        self.grid
    }

    pub fn get(&self, p: LatticePoint) -> Option<i64> {
        self.grid.index(p).filter(|&i| self.grid.mask[i]).map(|i| self.grid.values[i])
    }

    pub fn values(&self) -> &[i64] {
        &self.grid.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [i64] {
        &mut self.grid.values
    }

    pub fn is_stable(&self) -> bool {
        self.grid.domain_indices().all(|i| self.grid.values[i] <= 3)
    }

    pub fn total_grains(&self) -> i64 {
        self.grid.values.iter().sum()
    }

    /// Pointwise sum on a common domain.
    pub fn add(&self, other: &SandpileConfig) -> Result<SandpileConfig, GridError> {
        if !self.grid.same_shape(&other.grid) {
            return Err(GridError::DomainMismatch);
        }
        let mut grid = self.grid.clone();
        for (a, b) in grid.values.iter_mut().zip(other.grid.values.iter()) {
            *a += *b;
        }
        Ok(SandpileConfig { grid })
    }
}

/// Per-cell topple counts produced by stabilization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odometer {
    grid: CellGrid<i64>,
    total_toppled: u64,
}

impl Odometer {
    pub fn zeros<V>(shape: &CellGrid<V>) -> Self {
        Odometer { grid: shape.map(|_| 0), total_toppled: 0 }
    }

    pub(crate) fn from_grid(grid: CellGrid<i64>) -> Self {
        let total_toppled = grid.values.iter().map(|&v| v as u64).sum();
        Odometer { grid, total_toppled }
    }

    pub fn grid(&self) -> &CellGrid<i64> {
        &self.grid
    }

    pub fn into_grid(self) -> CellGrid<i64> {
        self.grid
    }

    pub fn get(&self, p: LatticePoint) -> Option<i64> {
        self.grid.get(p).copied()
    }

    pub fn total_toppled(&self) -> u64 {
        self.total_toppled
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(half: i64) -> (LatticePoint, usize) {
        (LatticePoint::new(-half, -half), (2 * half + 1) as usize)
    }

    #[test]
    fn laplacian_of_zero_field() {
        let (o, n) = window(3);
        let f = CellGrid::filled(o, n, n, 0i64).unwrap();
        for p in f.domain_points().collect::<Vec<_>>() {
            assert_eq!(laplacian(&f, p, &Extension::Zero).unwrap(), 0);
        }
    }

    #[test]
    fn laplacian_of_three_halves_x_squared_is_three() {
        let g = |p: LatticePoint| 3 * p.x * (p.x + 1) / 2;
        let (o, n) = window(5);
        let f = CellGrid::from_fn(o, n, n, g).unwrap();
        for p in f.domain_points().collect::<Vec<_>>() {
            assert_eq!(laplacian(&f, p, &Extension::With(&g)).unwrap(), 3, "at {p}");
        }
    }

    #[test]
    fn laplacian_of_norm_squared_is_four() {
        let g = |p: LatticePoint| p.norm_sq();
        let (o, n) = window(4);
        let f = CellGrid::from_fn(o, n, n, g).unwrap();
        for p in f.domain_points().collect::<Vec<_>>() {
            assert_eq!(laplacian(&f, p, &Extension::With(&g)).unwrap(), 4);
        }
    }

    #[test]
    fn strict_extension_reports_out_of_window() {
        let f = CellGrid::filled(LatticePoint::ORIGIN, 2, 2, 1i64).unwrap();
        assert_eq!(
            laplacian(&f, LatticePoint::ORIGIN, &Extension::Strict),
            Err(GridError::OutOfWindow(LatticePoint::new(-1, 0)))
        );
        // Zero extension at the corner: -4 + two in-window neighbours.
        assert_eq!(laplacian(&f, LatticePoint::ORIGIN, &Extension::Zero), Ok(-2));
    }

    #[test]
    fn config_rejects_negative_and_clears_outside() {
        let mut g = CellGrid::filled(LatticePoint::ORIGIN, 2, 1, 5i64).unwrap();
        g.set_mask(vec![true, false]).unwrap();
        let c = SandpileConfig::new(g.clone()).unwrap();
        assert_eq!(c.values(), &[5, 0]);
        g.values_mut()[0] = -1;
        assert!(matches!(SandpileConfig::new(g), Err(GridError::NegativeGrains { .. })));
    }

    #[test]
    fn add_zero_and_doubling() {
        let g = CellGrid::from_fn(LatticePoint::new(2, -1), 3, 2, |p| p.x + 2 * p.y + 5).unwrap();
        let s = SandpileConfig::new(g).unwrap();
        let z = SandpileConfig::zeros(s.grid());
        assert_eq!(z.add(&s).unwrap(), s);
        let d = s.add(&s).unwrap();
        for (a, b) in d.values().iter().zip(s.values()) {
            assert_eq!(*a, 2 * b);
        }
    }

    #[test]
    fn add_random_configs_matches_elementwise_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = CellGrid::from_fn(LatticePoint::ORIGIN, 6, 5, |_| rng.random_range(0..10)).unwrap();
        let b = CellGrid::from_fn(LatticePoint::ORIGIN, 6, 5, |_| rng.random_range(0..10)).unwrap();
        let sum = SandpileConfig::new(a.clone()).unwrap().add(&SandpileConfig::new(b.clone()).unwrap()).unwrap();
        for j in 0..5 {
            for i in 0..6 {
                let p = LatticePoint::new(i, j);
                assert_eq!(sum.get(p).unwrap(), a.get(p).unwrap() + b.get(p).unwrap());
            }
        }
    }

    #[test]
    fn add_rejects_mismatched_domains() {
        let a = SandpileConfig::new(CellGrid::filled(LatticePoint::ORIGIN, 2, 2, 0).unwrap()).unwrap();
        let b = SandpileConfig::new(CellGrid::filled(LatticePoint::ORIGIN, 3, 2, 0).unwrap()).unwrap();
        assert_eq!(a.add(&b), Err(GridError::DomainMismatch));
    }
}
