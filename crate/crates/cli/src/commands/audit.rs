use std::path::PathBuf;

use clap::Args;
use ellipse_sandpile::apollonian::{classify, generate_packing, to_cone_coords_exact, DEFAULT_TOLERANCE};
use ellipse_sandpile::config::SpecJson;
use ellipse_sandpile::exact::canonical_string;
use ellipse_sandpile::geometry::{annulus_area, annulus_area_monte_carlo, circumference, convexity_trials, cover_sets};
use serde_json::{json, Value};

use super::{emit, DEFAULT_SEED};
use crate::error::CliError;
use crate::run_config::RunConfig;

pub const DEFAULT_MAX_CURVATURE: f64 = 1000.0;
pub const DEFAULT_SAMPLES: u64 = 4_000_000;
pub const DEFAULT_CONVEXITY_TRIALS: usize = 10_000;
/// Relative error allowed between the annulus formula and Monte Carlo.
pub const ANNULUS_TOLERANCE: f64 = 0.005;
/// `|B| − |A| ≤ COVER_FACTOR · C_E`.
pub const COVER_FACTOR: f64 = 16.0;

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// A specification file; only its matrix is used.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    pub spec: Option<PathBuf>,
    /// The matrix as JSON, e.g. '[["10/9","1/3"],["1/3",1]]'.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub max_curvature: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn run_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let spec = match (&args.spec, &args.matrix) {
        (Some(path), _) => RunConfig::load(path)?.spec,
        (None, Some(text)) => {
            let a: [[Value; 2]; 2] = serde_json::from_str(text).map_err(CliError::config)?;
            SpecJson { a, k: None, p: None }
        }
        (None, None) => return Err(CliError::config("give --spec or --matrix")),
    };
    let [a11, a12, a22] = spec.matrix()?;
    let bound = args.max_curvature.unwrap_or(DEFAULT_MAX_CURVATURE);
    let tol = args.tol.unwrap_or(DEFAULT_TOLERANCE);
    if !(bound >= 1.0 && bound.is_finite()) || !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::config("--max-curvature must be at least 1 and --tol non-negative"));
    }
    let packing = generate_packing(bound);
    let point = to_cone_coords_exact(&a11, &a12, &a22);
    let verdict = classify(point, &packing, tol)?;
    let witness = verdict.witness.map(|c| match (c.center(), c.radius()) {
        (Some(center), Some(radius)) => json!({"center": center, "radius": radius}),
        _ => json!({"line": true}),
    });
    emit(&json!({
        "matrix": [[canonical_string(&a11), canonical_string(&a12)], [canonical_string(&a12), canonical_string(&a22)]],
        "cone": [point.x, point.y, point.z],
        "class": verdict.class.name(),
        "height": verdict.height,
        "excess": verdict.excess,
        "witness": witness,
        "max_curvature": bound,
        "circles": packing.circles().len(),
    }));
    Ok(())
}

#[derive(Debug, Args)]
pub struct GeometryAuditArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub k: Option<String>,
    /// Comma-separated distances L.
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo samples for the annulus area.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
}

pub fn run_geometry_audit(args: GeometryAuditArgs) -> Result<(), CliError> {
    let config = RunConfig::load(&args.spec)?;
    let seed = args.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let samples = args.samples.unwrap_or(DEFAULT_SAMPLES);
    let trials = args.trials.or(config.trials).unwrap_or(DEFAULT_CONVEXITY_TRIALS);
    let ls: Vec<f64> = match (&args.l, &config.l) {
        (Some(text), _) => text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::config(format!("bad L {s:?}"))))
            .collect::<Result<_, _>>()?,
        (None, Some(ls)) => ls.clone(),
        (None, None) => vec![5.0],
    };
    if ls.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(CliError::config("every L must be positive"));
    }
    let mut checks = Vec::new();
    let mut all_pass = true;
    for spec in config.specs(args.k.as_deref())? {
        let c_e = circumference(&spec);
        for &l in &ls {
            let annulus = match annulus_area(&spec, l) {
                Ok(formula) => {
                    let mc = annulus_area_monte_carlo(&spec, l, samples, seed);
                    let rel = (formula - mc).abs() / formula;
                    let pass = rel < ANNULUS_TOLERANCE;
                    all_pass &= pass;
                    json!({"formula": formula, "monte_carlo": mc, "relative_error": rel, "pass": pass})
                }
                Err(e) => json!({"skipped": e.to_string()}),
            };
            let covers = cover_sets(&spec, l);
            let cover_pass = covers.difference() as f64 <= COVER_FACTOR * c_e;
            let convex = convexity_trials(&spec, l, trials, seed);
            let convex_pass = convex.failures == 0;
            all_pass &= cover_pass && convex_pass;
            checks.push(json!({
                "k": canonical_string(spec.k()),
                "l": l,
                "annulus": annulus,
                "cover": {
                    "inner": covers.inner.len(),
                    "outer": covers.outer.len(),
                    "difference": covers.difference(),
                    "bound": COVER_FACTOR * c_e,
                    "pass": cover_pass,
                },
                "convexity": {
                    "trials": convex.trials,
                    "failures": convex.failures,
                    "worst_margin": if convex.worst_margin.is_finite() { json!(convex.worst_margin) } else { json!(null) },
                    "pass": convex_pass,
                },
            }));
        }
    }
    emit(&json!({ "pass": all_pass, "checks": checks }));
    if all_pass {
        Ok(())
    } else {
        Err(CliError::audit("GeometryAudit", "at least one check failed"))
    }
}
