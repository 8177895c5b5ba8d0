//! Rank-2 sublattices of `Z²`: Hermite normal form, Gauss reduction and
//! coset indexing.

use crate::grid::LatticePoint;

/// A full-rank sublattice of `Z²` with a canonical reduced basis.
///
/// `u1` is the shortest nonzero vector and `u2` the shortest vector
/// independent of it, each taken with positive orientation (`x > 0`, or
/// `x = 0` and `y > 0`) and ties broken lexicographically on `(|u|², x, y)`.
/// Then `|u1| ≤ |u2| ≤ |u1 ± u2|` and `det = |u1 × u2|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodLattice {
    u1: [i64; 2],
    u2: [i64; 2],
    det: i64,
    // Hermite normal form {(a, 0), (b, c)}, 0 ≤ b < a.
    a: i64,
    b: i64,
    c: i64,
}

fn cross(u: [i64; 2], v: [i64; 2]) -> i64 {
    u[0] * v[1] - u[1] * v[0]
}

fn norm2(u: [i64; 2]) -> i64 {
    u[0] * u[0] + u[1] * u[1]
}

fn positive(u: [i64; 2]) -> [i64; 2] {
    if u[0] > 0 || (u[0] == 0 && u[1] > 0) {
        u
    } else {
        [-u[0], -u[1]]
    }
}

impl PeriodLattice {
    /// The lattice spanned by `generators`, or `None` if they span less
    /// than rank 2.
    pub fn from_generators(generators: &[[i64; 2]]) -> Option<Self> {
        let mut vs: Vec<[i64; 2]> = generators.iter().copied().filter(|v| *v != [0, 0]).collect();
        // Euclid on the y components leaves one vector with y = gcd.
        loop {
            let pivot = vs
                .iter()
                .enumerate()
                .filter(|(_, v)| v[1] != 0)
                .min_by_key(|(_, v)| v[1].abs())
                .map(|(i, _)| i);
            let p = pivot?;
            let pv = vs[p];
            let mut changed = false;
            for (i, v) in vs.iter_mut().enumerate() {
                if i != p && v[1] != 0 {
                    let q = v[1].div_euclid(pv[1]);
                    v[0] -= q * pv[0];
                    v[1] -= q * pv[1];
                    changed = true;
                }
            }
            vs.retain(|v| *v != [0, 0]);
            if !changed {
                break;
            }
        }
        let p = vs.iter().position(|v| v[1] != 0)?;
        let mut col = vs[p];
        if col[1] < 0 {
            col = [-col[0], -col[1]];
        }
        let a = vs.iter().filter(|v| v[1] == 0).fold(0i64, |g, v| gcd(g, v[0].abs()));
        if a == 0 {
            return None;
        }
        Some(Self::from_hnf(a, col[0].rem_euclid(a), col[1]))
    }

    pub fn from_basis(u1: [i64; 2], u2: [i64; 2]) -> Option<Self> {
        Self::from_generators(&[u1, u2])
    }

    /// `Z²` itself.
    pub fn unit() -> Self {
        Self::from_hnf(1, 0, 1)
    }

    fn from_hnf(a: i64, b: i64, c: i64) -> Self {
        // Lagrange reduction of the HNF basis.
        let (mut u, mut v) = ([a, 0], [b, c]);
        loop {
            if norm2(v) < norm2(u) {
                std::mem::swap(&mut u, &mut v);
            }
            let n = norm2(u);
            let m = (2 * (u[0] * v[0] + u[1] * v[1]) + n).div_euclid(2 * n);
            if m == 0 {
                break;
            }
            v = [v[0] - m * u[0], v[1] - m * u[1]];
        }
        // Canonical choice among the short vectors.
        let mut short = Vec::new();
        for i in -3i64..=3 {
            for j in -3i64..=3 {
                let w = [i * u[0] + j * v[0], i * u[1] + j * v[1]];
                if w != [0, 0] {
                    short.push(positive(w));
                }
            }
        }
        short.sort_by_key(|w| (norm2(*w), w[0], w[1]));
        short.dedup();
        let det = a * c;
        let u1 = short[0];
        let u2 = *short.iter().find(|w| cross(u1, **w).abs() == det).expect("reduced basis is among short vectors");
        PeriodLattice { u1, u2, det, a, b, c }
    }

    pub fn u1(&self) -> [i64; 2] {
        self.u1
    }

    pub fn u2(&self) -> [i64; 2] {
        self.u2
    }

    /// Index of the lattice in `Z²`, the number of cosets.
    pub fn det(&self) -> i64 {
        self.det
    }

    /// `(a, b, c)` of the Hermite basis `{(a, 0), (b, c)}`.
    pub fn hnf(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    pub fn contains(&self, v: [i64; 2]) -> bool {
        self.coset_index(LatticePoint::new(v[0], v[1])) == 0
    }

    /// Canonical index in `0..det` of the coset of `p`.
    pub fn coset_index(&self, p: LatticePoint) -> usize {
        let q = p.y.div_euclid(self.c);
        let y = p.y - q * self.c;
        let x = (p.x - q * self.b).rem_euclid(self.a);
        (y * self.a + x) as usize
    }

    /// The representative of coset `idx` in `[0, a) × [0, c)`.
    pub fn coset_representative(&self, idx: usize) -> LatticePoint {
        let idx = idx as i64;
        LatticePoint::new(idx % self.a, idx / self.a)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
