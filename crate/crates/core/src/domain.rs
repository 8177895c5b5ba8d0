//! Finite lattice domains whose outer boundary is collapsed into one sink.

use thiserror::Error;

use crate::grid::{CellGrid, GridError, LatticePoint, SandpileConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("domain contains no lattice points")]
    Empty,
    #[error("domain cell {0} lies on the window edge; the window needs a margin")]
    TouchesWindowEdge(LatticePoint),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A finite set of lattice sites inside a window with at least one cell of
/// margin on every side. Each cell records `beta`, the number of its lattice
/// neighbours outside the domain (its edge multiplicity to the sink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    beta: CellGrid<u8>,
}

impl Domain {
    pub fn from_predicate(
        origin: LatticePoint,
        width: usize,
        height: usize,
        mut inside: impl FnMut(LatticePoint) -> bool,
    ) -> Result<Self, DomainError> {
        let grid = CellGrid::from_fn(origin, width, height, |_| 0u8)?;
        let mask: Vec<bool> = (0..grid.len()).map(|i| inside(grid.point(i))).collect();
        Self::from_mask(origin, width, height, mask)
    }

    pub fn from_mask(origin: LatticePoint, width: usize, height: usize, mask: Vec<bool>) -> Result<Self, DomainError> {
        let mut beta = CellGrid::filled(origin, width, height, 0u8)?;
        beta.set_mask(mask)?;
        let mut any = false;
        for idx in 0..beta.len() {
            if !beta.mask()[idx] {
                continue;
            }
            any = true;
            let i = idx % width;
            let j = idx / width;
            if i == 0 || j == 0 || i + 1 == width || j + 1 == height {
                return Err(DomainError::TouchesWindowEdge(beta.point(idx)));
            }
            let p = beta.point(idx);
            let outside = p.neighbors().iter().filter(|&&q| !beta.in_domain(q)).count();
            beta.values_mut()[idx] = outside as u8;
        }
        if !any {
            return Err(DomainError::Empty);
        }
        Ok(Domain { beta })
    }

    /// The window, mask and sink multiplicities.
    pub fn shape(&self) -> &CellGrid<u8> {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.beta.domain_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.beta.in_domain(p)
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        self.beta.domain_points()
    }

    /// Number of neighbours of `p` outside the domain, for domain cells.
    pub fn beta(&self, p: LatticePoint) -> Option<u8> {
        self.contains(p).then(|| *self.beta.get(p).unwrap())
    }

    /// Sites of the domain with at least one neighbour outside it.
    pub fn inner_boundary(&self) -> Vec<LatticePoint> {
        self.beta.domain_indices().filter(|&i| self.beta.values()[i] > 0).map(|i| self.beta.point(i)).collect()
    }

    /// Sites outside the domain adjacent to it, in window order.
    pub fn outer_boundary(&self) -> Vec<LatticePoint> {
        (0..self.beta.len())
            .filter(|&i| !self.beta.mask()[i])
            .map(|i| self.beta.point(i))
            .filter(|p| p.neighbors().iter().any(|&q| self.contains(q)))
            .collect()
    }

    /// One toppling of every outer boundary site, restricted to the domain.
    pub fn beta_config(&self) -> SandpileConfig {
        SandpileConfig::new(self.beta.map(|&b| b as i64)).expect("beta is non-negative")
    }

    pub fn zeros(&self) -> SandpileConfig {
        SandpileConfig::zeros(&self.beta)
    }

    pub fn constant(&self, grains: i64) -> Result<SandpileConfig, GridError> {
        SandpileConfig::constant(&self.beta, grains)
    }

    /// An integer field on the domain window, zero everywhere.
    pub fn zero_field(&self) -> CellGrid<i64> {
        self.beta.map(|_| 0)
    }
}
