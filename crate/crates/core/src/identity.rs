//! The recurrent identity element of a sink-collapsed domain, the odometer
//! of the boundary value problem behind it, and structural audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::Domain;
use crate::geometry::EllipseSpec;
use crate::grid::{laplacian_grid, CellGrid, Extension, GridError, LatticePoint, SandpileConfig};
use crate::stabilize::{group_add, stabilize, Stabilizer, DEFAULT_TOPPLE_BUDGET};

/// Guard on the number of boundary rounds.
pub const DEFAULT_MAX_ROUNDS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("no fixed point after {0} boundary rounds")]
    MaxRoundsExceeded(u64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// The identity `e`, the odometer `v` with `Δv = e` on the domain and
/// `v = 0` off it, and the number of boundary rounds `N` that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityResult {
    pub e: SandpileConfig,
    pub v: CellGrid<i64>,
    pub rounds: u64,
}

/// Topples the outer boundary once per round (adding `β` to the domain)
/// and stabilizes, starting from the empty configuration, until a round
/// leaves the configuration unchanged.
pub fn identity_boundary_source(domain: &Domain) -> Result<IdentityResult, IdentityError> {
    identity_boundary_source_with(domain, DEFAULT_MAX_ROUNDS, DEFAULT_TOPPLE_BUDGET)
}

pub fn identity_boundary_source_with(
    domain: &Domain,
    max_rounds: u64,
    budget: u64,
) -> Result<IdentityResult, IdentityError> {
    let shape = domain.shape();
    let mut engine = Stabilizer::new(shape);
    let seeds: Vec<u32> = engine.cells().iter().copied().filter(|&c| shape.values()[c as usize] > 0).collect();
    let mut values = vec![0i64; shape.len()];
    let mut odometer = vec![0i64; shape.len()];
    let mut previous = values.clone();
    for round in 1..=max_rounds {
        for &c in &seeds {
            values[c as usize] += shape.values()[c as usize] as i64;
        }
        engine.relax_from(seeds.iter().copied(), &mut values, &mut odometer, budget)?;
        if values == previous {
            let rounds = round as i64;
            let v: Vec<i64> =
                odometer.iter().zip(shape.mask()).map(|(&u, &inside)| if inside { u - rounds } else { 0 }).collect();
            let mask = shape.mask().to_vec();
            let v = CellGrid::from_parts(shape.origin(), shape.width(), shape.height(), v, mask.clone())?;
            let e = CellGrid::from_parts(shape.origin(), shape.width(), shape.height(), values, mask)?;
            return Ok(IdentityResult { e: SandpileConfig::new(e)?, v, rounds: round });
        }
        previous.copy_from_slice(&values);
    }
    Err(IdentityError::MaxRoundsExceeded(max_rounds))
}

/// One boundary round applied to `sigma`: returns the stabilized result and
/// the number of times each cell toppled.
pub fn boundary_round(domain: &Domain, sigma: &SandpileConfig) -> Result<(SandpileConfig, CellGrid<i64>), GridError> {
    let s = stabilize(&sigma.add(&domain.beta_config())?)?;
    Ok((s.config, s.odometer.into_grid()))
}

/// Independent construction `e = S(2δ − S(2δ))` with `δ ≡ 3`.
pub fn identity_two_delta(domain: &Domain) -> Result<SandpileConfig, GridError> {
    let six = domain.constant(6)?;
    let settled = stabilize(&six)?.config;
    let mut diff = six.into_grid();
    for (d, s) in diff.values_mut().iter_mut().zip(settled.values()) {
        *d -= s;
    }
    Ok(stabilize(&SandpileConfig::new(diff)?)?.config)
}

/// Result of the burning test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceVerdict {
    pub recurrent: bool,
    /// The cells left unburnt, which form the largest forbidden
    /// subconfiguration; `None` when recurrent.
    pub fsc_witness: Option<Vec<LatticePoint>>,
}

/// Burning test: with the sink burnt, a cell burns once its grain count is
/// at least its number of unburnt neighbours in the domain. The
/// configuration is recurrent iff every cell burns.
pub fn is_recurrent(sigma: &SandpileConfig) -> RecurrenceVerdict {
    let grid = sigma.grid();
    let n = grid.len();
    let mut unburnt_nbrs = vec![0i64; n];
    let mut burnt = vec![true; n];
    let mut stack = Vec::new();
    for i in grid.domain_indices() {
        burnt[i] = false;
        unburnt_nbrs[i] = grid.point(i).neighbors().iter().filter(|&&q| grid.in_domain(q)).count() as i64;
    }
    for i in grid.domain_indices() {
        if grid.values()[i] >= unburnt_nbrs[i] {
            burnt[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        for q in grid.point(i).neighbors() {
            let Some(j) = grid.index(q) else { continue };
            if burnt[j] {
                continue;
            }
            unburnt_nbrs[j] -= 1;
            if grid.values()[j] >= unburnt_nbrs[j] {
                burnt[j] = true;
                stack.push(j);
            }
        }
    }
    let rest: Vec<LatticePoint> = grid.domain_indices().filter(|&i| !burnt[i]).map(|i| grid.point(i)).collect();
    if rest.is_empty() {
        RecurrenceVerdict { recurrent: true, fsc_witness: None }
    } else {
        RecurrenceVerdict { recurrent: false, fsc_witness: Some(rest) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeutralityOutcome {
    pub trials: usize,
    /// A recurrent `r` with `S(e + r) ≠ r`, if one was found.
    pub counterexample: Option<SandpileConfig>,
}

impl NeutralityOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `S(e + r) = r` for `trials` recurrent configurations
/// `r = S(e + noise)` with noise uniform in `0..=6` per cell.
pub fn neutrality_check(e: &SandpileConfig, trials: usize, seed: u64) -> Result<NeutralityOutcome, GridError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = e.grid();
    let mut rs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let noise = grid.map(|_| rng.random_range(0..=6i64));
        rs.push(stabilize(&e.add(&SandpileConfig::new(noise)?)?)?.config);
    }
    neutrality_against(e, &rs)
}

/// Checks `S(e + r) = r` for every given `r`.
pub fn neutrality_against(e: &SandpileConfig, rs: &[SandpileConfig]) -> Result<NeutralityOutcome, GridError> {
    for r in rs {
        if group_add(e, r)? != *r {
            return Ok(NeutralityOutcome { trials: rs.len(), counterexample: Some(r.clone()) });
        }
    }
    Ok(NeutralityOutcome { trials: rs.len(), counterexample: None })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("Δv({at}) = {value} exceeds 3")]
    LaplacianTooLarge { at: LatticePoint, value: i64 },
    #[error("v({at}) = {value} off the domain")]
    NonzeroOutside { at: LatticePoint, value: i64 },
    #[error("v({at}) = {value} is positive on the domain")]
    Positive { at: LatticePoint, value: i64 },
    #[error("Δv is not recurrent; {0} cells remain unburnt")]
    NotRecurrent(usize),
    #[error("v can be lowered at {0} keeping Δv ≤ 3")]
    NotMinimal(LatticePoint),
    #[error("Δv({at}) = {laplacian} differs from e = {e}")]
    Mismatch { at: LatticePoint, laplacian: i64, e: i64 },
    #[error("v does not live on the domain window")]
    Shape,
    #[error("e is unstable at {0}")]
    Unstable(LatticePoint),
    #[error("e is not recurrent; {0} cells remain unburnt")]
    IdentityNotRecurrent(usize),
    #[error("S(e + r) differs from r for a recurrent r")]
    NotNeutral,
}

/// Summary of a successful boundary value problem audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BvpReport {
    /// `Δv` restricted to the domain, as a sandpile.
    pub laplacian: SandpileConfig,
    pub min_v: i64,
}

/// Checks that `v` solves the boundary value problem on `domain`: `Δv ≤ 3`
/// on the domain, `v = 0` off it and `v ≤ 0` on it, `Δv` recurrent, and
/// no single cell can be lowered by one without breaking `Δv ≤ 3`.
pub fn bvp_audit(v: &CellGrid<i64>, domain: &Domain) -> Result<BvpReport, AuditError> {
    if !v.same_shape(domain.shape()) {
        return Err(AuditError::Shape);
    }
    for i in 0..v.len() {
        let value = v.values()[i];
        if !v.mask()[i] && value != 0 {
            return Err(AuditError::NonzeroOutside { at: v.point(i), value });
        }
        if v.mask()[i] && value > 0 {
            return Err(AuditError::Positive { at: v.point(i), value });
        }
    }
    let lap = laplacian_grid(v, &Extension::Zero).map_err(|_| AuditError::Shape)?;
    for i in lap.domain_indices() {
        let value = lap.values()[i];
        if value > 3 {
            return Err(AuditError::LaplacianTooLarge { at: lap.point(i), value });
        }
        // Lowering v(x) by one raises Δv(x) by four.
        if value + 4 <= 3 {
            return Err(AuditError::NotMinimal(lap.point(i)));
        }
    }
    let laplacian = SandpileConfig::new(lap).map_err(|e| match e {
        GridError::NegativeGrains { at, .. } => AuditError::NotMinimal(at),
        _ => AuditError::Shape,
    })?;
    let verdict = is_recurrent(&laplacian);
    if let Some(w) = verdict.fsc_witness {
        return Err(AuditError::NotRecurrent(w.len()));
    }
    let min_v = v.domain_indices().map(|i| v.values()[i]).min().unwrap_or(0);
    Ok(BvpReport { laplacian, min_v })
}

impl IdentityResult {
    /// [`bvp_audit`] plus `Δv = e` cell by cell.
    pub fn audit(&self, domain: &Domain) -> Result<BvpReport, AuditError> {
        let report = bvp_audit(&self.v, domain)?;
        let lap = report.laplacian.grid();
        for i in lap.domain_indices() {
            let (l, e) = (lap.values()[i], self.e.values()[i]);
            if l != e {
                return Err(AuditError::Mismatch { at: lap.point(i), laplacian: l, e });
            }
        }
        Ok(report)
    }
}

/// Outcome of [`structural_audit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralReport {
    pub cells: usize,
    pub rounds: u64,
    pub neutrality_trials: usize,
    pub min_v: i64,
}

/// Stability, recurrence by the burning test, neutrality against
/// `trials` seeded random recurrent configurations, and the boundary value
/// problem audit of `v`.
pub fn structural_audit(
    result: &IdentityResult,
    domain: &Domain,
    trials: usize,
    seed: u64,
) -> Result<StructuralReport, AuditError> {
    let grid = result.e.grid();
    if let Some(i) = grid.domain_indices().find(|&i| grid.values()[i] > 3) {
        return Err(AuditError::Unstable(grid.point(i)));
    }
    if let Some(w) = is_recurrent(&result.e).fsc_witness {
        return Err(AuditError::IdentityNotRecurrent(w.len()));
    }
    let neutral = neutrality_check(&result.e, trials, seed).map_err(|_| AuditError::Shape)?;
    if !neutral.passed() {
        return Err(AuditError::NotNeutral);
    }
    let bvp = result.audit(domain)?;
    Ok(StructuralReport { cells: domain.len(), rounds: result.rounds, neutrality_trials: trials, min_v: bvp.min_v })
}

/// `sup_E |v + k − ½(x−p)ᵀA(x−p)|`: how far the shifted odometer strays
/// from the quadratic form.
pub fn quadratic_deviation(v: &CellGrid<i64>, spec: &EllipseSpec) -> f64 {
    let k = spec.k_f64();
    v.domain_indices()
        .map(|i| (v.values()[i] as f64 + k - spec.quadratic_form_f64(v.point(i).to_f64())).abs())
        .fold(0.0, f64::max)
}
