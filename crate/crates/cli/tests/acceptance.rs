//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ellipse_sandpile::apollonian::{classify, generate_packing, to_cone_coords, to_cone_coords_exact, GammaClass, DEFAULT_TOLERANCE};
use ellipse_sandpile::circle::{background_fraction, disc_domain, parse_radius};
use ellipse_sandpile::constants::{constants_from_eigenvalues, g, h_squared, m_profile_max};
use ellipse_sandpile::exact::parse_exact;
use ellipse_sandpile::geometry::{annulus_area, annulus_area_monte_carlo, circumference, convexity_trials, cover_sets};
use ellipse_sandpile::goodness::{classify_r_good, classify_r_good_naive};
use ellipse_sandpile::identity::{
    boundary_round, identity_boundary_source, identity_two_delta, is_recurrent, neutrality_against, structural_audit,
    IdentityResult,
};
use ellipse_sandpile::pattern::{detect_period_lattice, extract_pattern, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS};
use ellipse_sandpile::sweep::{run_pipeline, scaling_sweep};
use ellipse_sandpile::{build_domain, Domain, EllipseDomain, EllipseSpec, LatticePoint, SandpileConfig};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG1A: [&str; 3] = ["10/9", "1/3", "1"];
const FIG1B: [&str; 3] = ["4/3", "1/2", "3/4"];
const FIG2: [&str; 3] = ["5/4", "1/2", "1"];
const SMALL_KS: [&str; 4] = ["36", "100", "8^2", "18^2"];
const SWEEP_KS: [&str; 4] = ["8^2", "16^2", "32^2", "64^2"];
const SWEEP_R: u32 = 10;
const ENVELOPE: f64 = 10.0;
const SLACK: f64 = 0.02;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn spec(m: [&str; 3], k: &str) -> EllipseSpec {
    EllipseSpec::parse(m[0], m[1], m[2], k).unwrap()
}

struct Computed {
    label: String,
    domain: EllipseDomain,
    identity: IdentityResult,
}

fn small_identities() -> (Vec<Computed>, f64) {
    let start = Instant::now();
    let mut out = Vec::new();
    for (name, m) in [("fig1a", FIG1A), ("fig1b", FIG1B), ("fig2", FIG2)] {
        for k in SMALL_KS {
            let domain = build_domain(&spec(m, k)).unwrap();
            let identity = identity_boundary_source(domain.domain()).unwrap();
            out.push(Computed { label: format!("{name} k={k}"), domain, identity });
        }
    }
    (out, start.elapsed().as_secs_f64())
}

fn cross_oracle(runs: &[Computed], secs: f64) -> Outcome {
    let start = Instant::now();
    let mut equal = 0;
    for c in runs {
        let other = identity_two_delta(c.domain.domain()).map_err(|e| e.to_string())?;
        if other != c.identity.e {
            return Err(format!("{}: boundary-source and 2δ identities differ", c.label));
        }
        equal += 1;
    }
    let total = secs + start.elapsed().as_secs_f64();
    if total >= 60.0 {
        return Err(format!("{equal}/{} equal but took {total:.1} s", runs.len()));
    }
    Ok(format!("{equal}/{} identities bit-identical, {total:.1} s", runs.len()))
}

fn structural(runs: &[Computed]) -> Outcome {
    let mut audited = 0;
    for c in runs {
        structural_audit(&c.identity, c.domain.domain(), 20, 7).map_err(|e| format!("{}: {e}", c.label))?;
        audited += 1;
    }
    for k in &SWEEP_KS[1..] {
        let domain = build_domain(&spec(FIG2, k)).unwrap();
        let identity = identity_boundary_source(domain.domain()).unwrap();
        structural_audit(&identity, domain.domain(), 20, 7).map_err(|e| format!("fig2 k={k}: {e}"))?;
        audited += 1;
    }
    Ok(format!("{audited} identities stable, recurrent, neutral on 20 seeds, BVP exact"))
}

/// Forbidden subconfigurations by direct enumeration of both nonempty
/// subsets of the two-cell domain.
fn two_cell_recurrent(a: i64, b: i64) -> bool {
    let single = a < 0 || b < 0;
    let pair = a < 1 && b < 1;
    !(single || pair)
}

fn two_cells() -> Outcome {
    let domain = Domain::from_predicate(LatticePoint::new(-1, -1), 4, 3, |p| p.y == 0 && (p.x == 0 || p.x == 1)).unwrap();
    let (p, q) = (LatticePoint::new(0, 0), LatticePoint::new(1, 0));
    let make = |a: i64, b: i64| {
        let mut g = domain.zero_field();
        *g.get_mut(p).unwrap() = a;
        *g.get_mut(q).unwrap() = b;
        SandpileConfig::new(g).unwrap()
    };
    let mut recurrent = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            let verdict = is_recurrent(&make(a, b)).recurrent;
            if verdict != two_cell_recurrent(a, b) {
                return Err(format!("burning test wrong on ({a}, {b})"));
            }
            if verdict {
                recurrent.push(make(a, b));
            }
        }
    }
    if recurrent.len() != 15 {
        return Err(format!("{} recurrent configurations, expected 15", recurrent.len()));
    }
    let e = identity_boundary_source(&domain).map_err(|e| e.to_string())?.e;
    if e != make(3, 3) || identity_two_delta(&domain).unwrap() != e {
        return Err("identity is not (3, 3)".into());
    }
    if !neutrality_against(&e, &recurrent).unwrap().passed() {
        return Err("(3, 3) is not neutral".into());
    }
    Ok("15/16 recurrent, identity (3,3), neutral against all 15".into())
}

fn stationarity(runs: &[Computed]) -> Outcome {
    for c in runs {
        let (next, odometer) = boundary_round(c.domain.domain(), &c.identity.e).map_err(|e| e.to_string())?;
        if next != c.identity.e {
            return Err(format!("{}: extra round moved e", c.label));
        }
        if odometer.domain_indices().any(|i| odometer.values()[i] != 1) {
            return Err(format!("{}: odometer increment is not uniformly 1", c.label));
        }
    }
    Ok(format!("{} identities fixed with unit odometer increment", runs.len()))
}

fn apollonian() -> Outcome {
    let start = Instant::now();
    let packing = generate_packing(1e4);
    let audit = packing.audit();
    if audit.max_curvature_residual != 0 || audit.max_center_residual != 0 || audit.max_float_residual > 1e-12 {
        return Err(format!("Descartes residuals {audit:?}"));
    }
    let cone = |m: [&str; 3]| {
        let q: Vec<BigRational> = m.iter().map(|s| parse_exact(s).unwrap()).collect();
        to_cone_coords_exact(&q[0], &q[1], &q[2])
    };
    let verdict = |m: [&str; 3]| classify(cone(m), &packing, DEFAULT_TOLERANCE).map(|c| c.class).map_err(|e| e.to_string());
    let expect = [
        ("fig1a", FIG1A, GammaClass::Peak),
        ("fig2", FIG2, GammaClass::Peak),
        ("A2", ["1", "49/100", "2/3"], GammaClass::Interior),
        ("A3", ["7/4", "45/99", "4/3"], GammaClass::Outside),
    ];
    for (name, m, class) in expect {
        let got = verdict(m)?;
        if got != class {
            return Err(format!("{name}: {} instead of {}", got.name(), class.name()));
        }
    }
    let s = FRAC_1_SQRT_2;
    let a1 = [[(63.0 + s) / 48.0, (24.0 + s) / 48.0], [(24.0 + s) / 48.0, (35.0 - s) / 48.0]];
    let v = classify(to_cone_coords(a1), &packing, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    if v.class != GammaClass::Boundary || v.excess.abs() > 1e-6 {
        return Err(format!("A1: {} at distance {:e}", v.class.name(), v.excess));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 30.0 {
        return Err(format!("verdicts right but took {secs:.1} s"));
    }
    Ok(format!(
        "{} quadruples exact, float residual {:.1e}; verdicts right, A1 distance {:.1e}; {secs:.1} s",
        audit.quadruples, audit.max_float_residual, v.excess.abs()
    ))
}

fn constants_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pair = || (rng.random_range(0.02..=1.0), rng.random_range(1.0001..5.0));
    let mut worst = 0f64;
    for _ in 0..100 {
        let (l1, l2) = pair();
        let c = constants_from_eigenvalues(l1, l2);
        let rhs = (l1.sqrt() + l2.sqrt()) * c.h_squared;
        worst = worst.max((c.g - rhs).abs() / rhs.max(1.0));
    }
    if worst > 1e-12 {
        return Err(format!("g differs from (√λ1+√λ2)h² by {worst:e}"));
    }
    let mut jump = 0f64;
    for l2 in [1.05, 1.5, 2.0, 3.0, 4.5] {
        let below = FRAC_1_SQRT_2 * (1.0 - 1e-15);
        jump = jump.max((h_squared(below, l2) - h_squared(FRAC_1_SQRT_2, l2)).abs());
        jump = jump.max((g(below, l2) - g(FRAC_1_SQRT_2, l2)).abs());
    }
    if jump > 1e-9 {
        return Err(format!("jump {jump:e} at the branch point"));
    }
    let k = 1e4;
    let mut rel = 0f64;
    for _ in 0..20 {
        let (l1, l2) = pair();
        let closed = if l1 >= FRAC_1_SQRT_2 {
            (k / l2).sqrt() + (2.0 * l2 * k).sqrt()
        } else {
            let d = 1.0 + 2.0 * l1 * l2;
            k.sqrt() * (((l1 + l2) / (l1 * l2 * d)).sqrt() + 2.0 * (l1 * l2 * (l1 + l2) / d).sqrt())
        };
        rel = rel.max((m_profile_max(l1, l2, k) - closed).abs() / closed);
    }
    if rel > 1e-6 {
        return Err(format!("profile maximum off by {rel:e} relative"));
    }
    Ok(format!("g identity {worst:.1e}, branch jump {jump:.1e}, profile maximum {rel:.1e} relative"))
}

fn geometry() -> Outcome {
    let fig2 = spec(FIG2, "64^2");
    let formula = annulus_area(&fig2, 20.0).map_err(|e| e.to_string())?;
    let mc = annulus_area_monte_carlo(&fig2, 20.0, 4_000_000, 11);
    let rel = (formula - mc).abs() / formula;
    if rel >= 0.005 {
        return Err(format!("annulus {formula} vs Monte Carlo {mc}"));
    }
    let mut tested = 0;
    for m in [FIG1A, FIG1B, FIG2] {
        for k in ["18^2", "64^2"] {
            let s = spec(m, k);
            let bound = 16.0 * circumference(&s);
            for l in [2.0, 5.0, 10.0, 20.0] {
                let d = cover_sets(&s, l).difference() as f64;
                if d > bound {
                    return Err(format!("cover difference {d} > {bound} at k={k}, L={l}"));
                }
                tested += 1;
            }
        }
    }
    let convex = convexity_trials(&fig2, 20.0, 10_000, 13);
    if convex.trials != 10_000 || convex.failures != 0 {
        return Err(format!("convexity: {} failures in {} trials", convex.failures, convex.trials));
    }
    Ok(format!("annulus error {:.2}%, cover bound on {tested} cases, 10^4 convexity trials", 100.0 * rel))
}

fn ks(list: &[&str]) -> Vec<BigRational> {
    list.iter().map(|k| parse_exact(k).unwrap()).collect()
}

fn scaling() -> Outcome {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let rows = pool.install(|| scaling_sweep(&spec(FIG2, "1"), &ks(&SWEEP_KS), |_| SWEEP_R)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let fs: Vec<f64> = rows.iter().map(|r| r.f).collect();
    let shown = fs.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>().join(" ");
    if rows.iter().any(|r| r.lattice_det != rows[0].lattice_det) {
        return Err(format!("lattice determinants {:?}", rows.iter().map(|r| r.lattice_det).collect::<Vec<_>>()));
    }
    if fs.windows(2).any(|w| w[1] > w[0] + SLACK) || fs[3] >= fs[0] {
        return Err(format!("f not decreasing: {shown}"));
    }
    if let Some(r) = rows.iter().find(|r| r.scaled > ENVELOPE * r.bound_g) {
        return Err(format!("k={}: f·k^(1/4)/r = {} above {ENVELOPE}·g", r.k, r.scaled));
    }
    if secs >= 600.0 {
        return Err(format!("took {secs:.0} s"));
    }
    let worst = rows.iter().map(|r| r.scaled / r.bound_g).fold(0.0, f64::max);
    Ok(format!("det {} at all k; f = {shown}; max f·k^(1/4)/(r·g) = {worst:.3}; {secs:.1} s", rows[0].lattice_det))
}

fn dual_goodness() -> Outcome {
    let mut compared = 0;
    for (name, m) in [("fig2", FIG2), ("fig1a", FIG1A)] {
        for k in ["8^2", "16^2"] {
            let domain = build_domain(&spec(m, k)).unwrap();
            let e = identity_boundary_source(domain.domain()).unwrap().e;
            let lattice = detect_period_lattice(&e, &domain, DEFAULT_SEARCH_RADIUS, DEFAULT_WINDOWS).map_err(|e| e.to_string())?;
            let table = extract_pattern(&e, &lattice, &domain).map_err(|e| e.to_string())?;
            for r in [3, 10] {
                if classify_r_good(&e, &domain, &table, r) != classify_r_good_naive(&e, &domain, &table, r) {
                    return Err(format!("{name} k={k} r={r}: classifiers disagree"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} (matrix, k, r) cases identical cell by cell"))
}

fn off_center() -> Outcome {
    let mut parts = Vec::new();
    for (name, m) in [("fig1a", FIG1A), ("fig2", FIG2)] {
        let centered = spec(m, "18^2");
        let shifted = EllipseSpec::parse_with_center(m[0], m[1], m[2], "18^2", ["0.47", "0.5"]).unwrap();
        let mut f = [0.0; 2];
        for (i, s) in [centered, shifted].iter().enumerate() {
            let run = run_pipeline(s, SWEEP_R).map_err(|e| format!("{name}: {e}"))?;
            structural_audit(&run.identity, run.domain.domain(), 20, 3).map_err(|e| format!("{name}: {e}"))?;
            f[i] = run.row.f;
        }
        if f[1] > 2.0 * f[0] || f[0] > 2.0 * f[1] {
            return Err(format!("{name}: f centered {:.3}, off-center {:.3}", f[0], f[1]));
        }
        parts.push(format!("{name} f {:.3} vs {:.3}", f[0], f[1]));
    }
    Ok(format!("audits pass; {}", parts.join(", ")))
}

fn circle() -> Outcome {
    let radius = parse_radius("100").unwrap();
    let domain = disc_domain(&radius).map_err(|e| e.to_string())?;
    let identity = identity_boundary_source(&domain).map_err(|e| e.to_string())?;
    structural_audit(&identity, &domain, 20, 5).map_err(|e| e.to_string())?;
    let bg = background_fraction(&identity.e, &radius);
    if bg.fraction <= 0.5 {
        return Err(format!("background-2 fraction {:.3}", bg.fraction));
    }
    Ok(format!("audits pass; {} of {} interior cells hold 2 ({:.3})", bg.twos, bg.interior, bg.fraction))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ellipse-sandpile")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (name, bytes) in tree(&path) {
                files.push((format!("{}/{name}", path.file_name().unwrap().to_string_lossy()), bytes));
            }
        } else {
            files.push((path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap()));
        }
    }
    files.sort();
    files
}

fn determinism() -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).max(4).to_string();
    let k_small = SMALL_KS.join(",");
    let k_sweep = SWEEP_KS.join(",");
    let mut compared = 0;
    for (name, m) in [("fig1a", FIG1A), ("fig1b", FIG1B), ("fig2", FIG2)] {
        let file = work.path().join(format!("{name}.json"));
        fs::write(&file, format!(r#"{{"a":[["{}","{}"],["{}","{}"]]}}"#, m[0], m[1], m[1], m[2])).unwrap();
        let file = file.to_str().unwrap();
        let mut outputs = Vec::new();
        for threads in ["1", n.as_str()] {
            let cache = work.path().join(format!("{name}-{threads}"));
            let cache = cache.to_str().unwrap();
            let stdout = cli(&["--threads", threads, "identity", "--spec", file, "--k", &k_small, "--cross-check", "--cache", cache])?;
            outputs.push((stdout, tree(Path::new(cache))));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name}: identity outputs differ between 1 and {n} threads"));
        }
        compared += 1;
        if name == "fig2" {
            let a = cli(&["--threads", "1", "sweep", "--spec", file, "--k", &k_sweep, "--r", "10"])?;
            let b = cli(&["--threads", &n, "sweep", "--spec", file, "--k", &k_sweep, "--r", "10"])?;
            if a != b {
                return Err(format!("sweep CSV differs between 1 and {n} threads"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} runs byte-identical with 1 and {n} threads (stdout and cache files)"))
}

fn main() {
    let (runs, secs) = small_identities();
    let criteria: Vec<(&str, Check)> = vec![
        ("cross-oracle identity", Box::new(|| cross_oracle(&runs, secs))),
        ("structural audit", Box::new(|| structural(&runs))),
        ("two-cell exhaustive", Box::new(two_cells)),
        ("fixed-point stationarity", Box::new(|| stationarity(&runs))),
        ("apollonian self-audit", Box::new(apollonian)),
        ("constants", Box::new(constants_check)),
        ("geometry", Box::new(geometry)),
        ("pattern and scaling", Box::new(scaling)),
        ("goodness dual implementations", Box::new(dual_goodness)),
        ("off-center ellipse", Box::new(off_center)),
        ("circle background", Box::new(circle)),
        ("thread-count determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
