//! Discs `B_R(0) ∩ Z²` and the background of their identities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::domain::{Domain, DomainError};
use crate::exact::{parse_exact, to_f64};
use crate::grid::{LatticePoint, SandpileConfig};

/// Largest radius accepted by [`disc_domain`].
pub const MAX_RADIUS: i64 = 2000;

/// Cells with `|x| < INTERIOR_FRACTION · R` count as interior.
pub const INTERIOR_FRACTION: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircleError {
    #[error("invalid radius {0:?}")]
    InvalidRadius(String),
    #[error("radius {0} exceeds the limit {MAX_RADIUS}")]
    RadiusTooLarge(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Parses a radius: a positive exact number no larger than [`MAX_RADIUS`].
pub fn parse_radius(text: &str) -> Result<BigRational, CircleError> {
    let r = parse_exact(text).map_err(|_| CircleError::InvalidRadius(text.to_string()))?;
    if r <= BigRational::zero() {
        return Err(CircleError::InvalidRadius(text.to_string()));
    }
    if r > BigRational::from_integer(BigInt::from(MAX_RADIUS)) {
        return Err(CircleError::RadiusTooLarge(text.to_string()));
    }
    Ok(r)
}

/// The cells with `x² + y² < R²`.
///
/// ```
/// use ellipse_sandpile::circle::{disc_domain, parse_radius};
/// let d = disc_domain(&parse_radius("2").unwrap()).unwrap();
/// assert_eq!(d.len(), 9);
/// ```
pub fn disc_domain(radius: &BigRational) -> Result<Domain, CircleError> {
    let r2 = radius * radius;
    let reach = radius.ceil().to_integer().to_i64().ok_or_else(|| CircleError::InvalidRadius(radius.to_string()))? + 1;
    let side = (2 * reach + 1) as usize;
    let inside = |p: LatticePoint| BigRational::from_integer(BigInt::from(p.norm_sq())) < r2;
    Ok(Domain::from_predicate(LatticePoint::new(-reach, -reach), side, side, inside)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub interior: usize,
    pub twos: usize,
    pub fraction: f64,
}

/// The share of interior cells of `e` holding two grains.
pub fn background_fraction(e: &SandpileConfig, radius: &BigRational) -> Background {
    let limit = INTERIOR_FRACTION * to_f64(radius);
    let grid = e.grid();
    let (interior, twos) = grid
        .domain_indices()
        .filter(|&i| (grid.point(i).norm_sq() as f64).sqrt() < limit)
        .fold((0, 0), |(n, t), i| (n + 1, t + (grid.values()[i] == 2) as usize));
    let fraction = if interior == 0 { 0.0 } else { twos as f64 / interior as f64 };
    Background { interior, twos, fraction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::{identity_boundary_source, structural_audit};

    #[test]
    fn radius_parsing() {
        assert!(matches!(parse_radius("0e"), Err(CircleError::InvalidRadius(_))));
        assert!(matches!(parse_radius("0"), Err(CircleError::InvalidRadius(_))));
        assert!(matches!(parse_radius("-3"), Err(CircleError::InvalidRadius(_))));
        assert!(matches!(parse_radius("2001"), Err(CircleError::RadiusTooLarge(_))));
        assert_eq!(to_f64(&parse_radius("5/2").unwrap()), 2.5);
    }

    #[test]
    fn disc_cell_counts() {
        let count = |r: i64| (-r..=r).flat_map(|y| (-r..=r).map(move |x| x * x + y * y)).filter(|&n| n < r * r).count();
        for r in [1, 3, 5, 10] {
            assert_eq!(disc_domain(&parse_radius(&r.to_string()).unwrap()).unwrap().len(), count(r));
        }
        assert_eq!(disc_domain(&parse_radius("1/2").unwrap()).unwrap().len(), 1);
    }

    #[test]
    fn radius_five_identity_is_recurrent() {
        let r = parse_radius("5").unwrap();
        let d = disc_domain(&r).unwrap();
        let id = identity_boundary_source(&d).unwrap();
        structural_audit(&id, &d, 20, 5).unwrap();
        let bg = background_fraction(&id.e, &r);
        assert!(bg.interior > 0 && bg.twos <= bg.interior);
    }
}
