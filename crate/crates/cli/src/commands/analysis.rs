use std::path::PathBuf;

use clap::Args;
use ellipse_sandpile::build_domain;
use ellipse_sandpile::exact::canonical_string;
use ellipse_sandpile::goodness::{classify_r_good, classify_r_good_naive};
use ellipse_sandpile::pattern::{detect_period_lattice, extract_pattern, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS};
use ellipse_sandpile::sweep::{scaling_sweep, write_csv};
use serde_json::json;

use super::{emit, obtain_identity, write_file, DEFAULT_R};
use crate::error::CliError;
use crate::run_config::{parse_list, RunConfig};

#[derive(Debug, Args)]
pub struct PatternArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub k: Option<String>,
    /// Reuse or fill an identity cache.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Largest period coordinate searched.
    #[arg(long)]
    pub search_radius: Option<i64>,
    #[arg(long)]
    pub windows: Option<usize>,
}

pub fn run_pattern(args: PatternArgs) -> Result<(), CliError> {
    let config = RunConfig::load(&args.spec)?;
    let cache = args.cache.or(config.cache.clone());
    let radius = args.search_radius.or(config.search_radius).unwrap_or(DEFAULT_SEARCH_RADIUS);
    let windows = args.windows.or(config.windows).unwrap_or(DEFAULT_WINDOWS);
    if radius < 1 || windows < 1 {
        return Err(CliError::config("search radius and window count must be positive"));
    }
    let mut runs = Vec::new();
    for spec in config.specs(args.k.as_deref())? {
        let domain = build_domain(&spec)?;
        let (identity, _) = obtain_identity(&spec, domain.domain(), cache.as_deref())?;
        let lattice = detect_period_lattice(&identity.e, &domain, radius, windows)?;
        let table = extract_pattern(&identity.e, &lattice, &domain)?;
        let anchor = table.anchor();
        runs.push(json!({
            "k": canonical_string(spec.k()),
            "det": lattice.det(),
            "u1": lattice.u1(),
            "u2": lattice.u2(),
            "hnf": <[i64; 3]>::from(lattice.hnf()),
            "anchor": [anchor.x, anchor.y],
            "values": table.values(),
            "histogram": table.histogram(),
        }));
    }
    emit(&json!({ "runs": runs }));
    Ok(())
}

#[derive(Debug, Args)]
pub struct GoodnessArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Also run the per-point checker and require agreement.
    #[arg(long)]
    pub naive: bool,
}

pub fn run_goodness(args: GoodnessArgs) -> Result<(), CliError> {
    let config = RunConfig::load(&args.spec)?;
    let cache = args.cache.or(config.cache.clone());
    let r = args.r.or(config.r).unwrap_or(DEFAULT_R);
    if r == 0 {
        return Err(CliError::config("r must be at least 1"));
    }
    let mut runs = Vec::new();
    for spec in config.specs(args.k.as_deref())? {
        let domain = build_domain(&spec)?;
        let (identity, _) = obtain_identity(&spec, domain.domain(), cache.as_deref())?;
        let lattice = detect_period_lattice(&identity.e, &domain, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS)?;
        let table = extract_pattern(&identity.e, &lattice, &domain)?;
        let report = classify_r_good(&identity.e, &domain, &table, r);
        let naive = if args.naive {
            if classify_r_good_naive(&identity.e, &domain, &table, r) != report {
                return Err(CliError::audit("GoodnessMismatch", format!("classifiers disagree at k = {}", spec.k())));
            }
            json!("agree")
        } else {
            json!(null)
        };
        runs.push(json!({
            "k": canonical_string(spec.k()),
            "r": r,
            "det": lattice.det(),
            "eligible": report.eligible,
            "good": report.good,
            "f": report.f,
            "naive": naive,
        }));
    }
    emit(&json!({ "runs": runs }));
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub r: Option<u32>,
    /// CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the wall_ms column.
    #[arg(long)]
    pub timing: bool,
}

pub fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let config = RunConfig::load(&args.spec)?;
    let r = args.r.or(config.r).unwrap_or(DEFAULT_R);
    let template = config.spec.to_spec(Some(&num_rational::BigRational::from_integer(1.into())))?;
    let ks = match args.k.as_deref() {
        Some(list) => parse_list(list)?,
        None => config.specs(None)?.iter().map(|s| s.k().clone()).collect(),
    };
    let rows = scaling_sweep(&template, &ks, |_| r)?;
    let csv = write_csv(&rows, args.timing);
    match args.out.or(config.out) {
        Some(path) => write_file(&path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}
