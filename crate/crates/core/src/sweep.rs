//! The full pipeline per scale: identity, period lattice, pattern and
//! goodness, one row per `k`.

use std::fmt::Write as _;
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::constants::constants;
use crate::geometry::{build_domain, EllipseDomain, EllipseSpec, GeometryError};
use crate::goodness::{classify_r_good, GoodnessReport};
use crate::identity::{identity_boundary_source, IdentityError, IdentityResult};
use crate::lattice::PeriodLattice;
use crate::pattern::{detect_period_lattice, extract_pattern, PatternError, PatternTable, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("r must be at least 1")]
    InvalidRadius,
}

pub const CSV_HEADER: &str = "k,r,lattice_det,eligible,good,f,f_k14_over_r,g_A,h2_A,wall_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub k: f64,
    pub r: u32,
    pub lattice_det: i64,
    pub eligible: usize,
    pub good: usize,
    pub f: f64,
    /// `f · k^{1/4} / r`.
    pub scaled: f64,
    /// `g(A)`.
    pub bound_g: f64,
    pub h2: f64,
    pub wall_ms: u128,
}

impl ScalingRow {
    /// One CSV line; the wall time is left empty unless `timing` is set so
    /// that output is reproducible.
    pub fn csv_line(&self, timing: bool) -> String {
        let wall = if timing { self.wall_ms.to_string() } else { String::new() };
        format!(
            "{},{},{},{},{},{:.9},{:.9},{:.9},{:.9},{}",
            self.k, self.r, self.lattice_det, self.eligible, self.good, self.f, self.scaled, self.bound_g, self.h2, wall
        )
    }
}

pub fn write_csv(rows: &[ScalingRow], timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(out, "{}", row.csv_line(timing)).expect("writing to a String");
    }
    out
}

/// Everything computed for one scale.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub domain: EllipseDomain,
    pub identity: IdentityResult,
    pub lattice: PeriodLattice,
    pub pattern: PatternTable,
    pub goodness: GoodnessReport,
    pub row: ScalingRow,
}

pub fn run_pipeline(spec: &EllipseSpec, r: u32) -> Result<PipelineRun, SweepError> {
    if r == 0 {
        return Err(SweepError::InvalidRadius);
    }
    let start = Instant::now();
    let domain = build_domain(spec)?;
    let identity = identity_boundary_source(domain.domain())?;
    let lattice = detect_period_lattice(&identity.e, &domain, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS)?;
    let pattern = extract_pattern(&identity.e, &lattice, &domain)?;
    let goodness = classify_r_good(&identity.e, &domain, &pattern, r);
    let c = constants(spec.matrix_f64());
    let k = spec.k_f64();
    let row = ScalingRow {
        k,
        r,
        lattice_det: lattice.det(),
        eligible: goodness.eligible,
        good: goodness.good,
        f: goodness.f,
        scaled: goodness.f * k.powf(0.25) / r as f64,
        bound_g: c.g,
        h2: c.h_squared,
        wall_ms: start.elapsed().as_millis(),
    };
    Ok(PipelineRun { domain, identity, lattice, pattern, goodness, row })
}

/// Runs the pipeline for each `k` with `r = r_rule(k)`, rows in the order
/// of `ks`.
pub fn scaling_sweep(
    template: &EllipseSpec,
    ks: &[BigRational],
    r_rule: impl Fn(f64) -> u32 + Sync,
) -> Result<Vec<ScalingRow>, SweepError> {
    ks.par_iter()
        .map(|k| {
            let spec = template.with_k(k.clone())?;
            Ok(run_pipeline(&spec, r_rule(spec.k_f64()))?.row)
        })
        .collect()
}
