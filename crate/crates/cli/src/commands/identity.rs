use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use ellipse_sandpile::cache::{cache_key, decode_grains, encode_grains};
use ellipse_sandpile::circle::{background_fraction, disc_domain, parse_radius};
use ellipse_sandpile::config::canonical_json;
use ellipse_sandpile::exact::canonical_string;
use ellipse_sandpile::identity::{identity_boundary_source, identity_two_delta, structural_audit};
use ellipse_sandpile::render::{render_ppm, Palette};
use ellipse_sandpile::build_domain;
use serde_json::{json, Value};

use super::{cache_root, emit, obtain_identity, read_file, write_file, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::error::{CliError, EXIT_RUNTIME};
use crate::run_config::RunConfig;

#[derive(Debug, Args)]
pub struct IdentityArgs {
    /// Specification or run configuration (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Comma-separated values of k, overriding the file.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Seed of the neutrality spot-check.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Also build the identity as S(2δ − S(2δ)) and require equality.
    #[arg(long)]
    pub cross_check: bool,
    #[arg(long)]
    pub timing: bool,
}

pub fn run_identity(args: IdentityArgs) -> Result<(), CliError> {
    let config = RunConfig::load(&args.spec)?;
    let root = cache_root(args.cache, config.cache.as_ref());
    let seed = args.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let trials = args.trials.or(config.trials).unwrap_or(DEFAULT_TRIALS);
    let mut runs = Vec::new();
    for spec in config.specs(args.k.as_deref())? {
        let start = Instant::now();
        let domain = build_domain(&spec)?;
        let (result, cached) = obtain_identity(&spec, domain.domain(), Some(&root))?;
        let report = structural_audit(&result, domain.domain(), trials, seed)?;
        let oracle = if args.cross_check {
            let other = identity_two_delta(domain.domain()).map_err(|e| CliError::new(EXIT_RUNTIME, "Grid", e))?;
            if other != result.e {
                return Err(CliError::audit("OracleMismatch", format!("two identity constructions differ for k = {}", spec.k())));
            }
            Value::String("agree".into())
        } else {
            Value::Null
        };
        let mut run = json!({
            "spec": canonical_json(&spec),
            "key": cache_key(&spec),
            "k": canonical_string(spec.k()),
            "cells": report.cells,
            "rounds": report.rounds,
            "cached": cached,
            "stable": true,
            "recurrent": true,
            "neutrality": {"trials": report.neutrality_trials, "seed": seed, "passed": true},
            "min_v": report.min_v,
            "two_delta": oracle,
        });
        if args.timing {
            run["wall_ms"] = json!(start.elapsed().as_millis() as u64);
        }
        runs.push(run);
    }
    emit(&json!({ "runs": runs }));
    Ok(())
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// An SPG1 grain file.
    pub grid: PathBuf,
    /// Output PPM path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_render(args: RenderArgs) -> Result<(), CliError> {
    let grid = decode_grains(&read_file(&args.grid)?)?;
    let image = render_ppm(&grid, &Palette::default())?;
    write_file(&args.out, &image)?;
    emit(&json!({"width": grid.width(), "height": grid.height(), "out": args.out.display().to_string()}));
    Ok(())
}

#[derive(Debug, Args)]
pub struct CircleArgs {
    #[arg(long)]
    pub radius: String,
    /// Directory for `circle.spg` and `circle.ppm`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub timing: bool,
}

pub fn run_circle(args: CircleArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let radius = parse_radius(&args.radius)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let domain = disc_domain(&radius)?;
    let result = identity_boundary_source(&domain)?;
    let report = structural_audit(&result, &domain, args.trials.unwrap_or(DEFAULT_TRIALS), seed)?;
    let bg = background_fraction(&result.e, &radius);
    let mut out = json!({
        "radius": canonical_string(&radius),
        "cells": report.cells,
        "rounds": report.rounds,
        "recurrent": true,
        "neutrality": {"trials": report.neutrality_trials, "seed": seed, "passed": true},
        "min_v": report.min_v,
        "background": {"interior": bg.interior, "twos": bg.twos, "fraction": bg.fraction},
    });
    if let Some(dir) = args.out {
        let grains = result.e.grid();
        write_file(&dir.join("circle.spg"), &encode_grains(grains)?)?;
        write_file(&dir.join("circle.ppm"), &render_ppm(grains, &Palette::default())?)?;
    }
    if args.timing {
        out["wall_ms"] = json!(start.elapsed().as_millis() as u64);
    }
    emit(&out);
    Ok(())
}
