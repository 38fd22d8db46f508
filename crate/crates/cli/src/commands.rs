use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squarepack_core::conditions::{
    ap_profile, check_prime_sum_lemmas, check_smooth_extension, check_ten_conditions,
    corollary31_bounds, corollary46_bounds, prime_profile, CorollaryBounds,
};
use squarepack_core::manifest::PlacementManifest;
use squarepack_core::recursive::{family_for_run, run, Outcome, RunOptions};
use squarepack_core::render::render_svg;
use squarepack_core::sequence::{FamilySpec, PackParams, SequenceError, SidelengthFamily};
use squarepack_core::verifier::{brute_force_overlap, sweep_overlaps, verify as verify_manifest};
use squarepack_core::{Precision, Rect};

use crate::{
    BoundsArgs, ConditionArgs, LemmaArgs, PackArgs, PrecisionArg, RenderArgs, RunArgs, VerifyArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATIONS: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

/// Published `log10 N0` lower bounds for `f(n) = n`.
pub const TABLE1: [(f64, i64); 7] = [
    (0.55, 35),
    (0.6, 38),
    (0.7, 50),
    (0.8, 114),
    (0.9, 563),
    (0.95, 2673),
    (0.99, 92863),
];

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

type CmdResult = Result<u8, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn failure(message: impl ToString) -> CliError {
    CliError {
        code: EXIT_FAILURE,
        message: message.to_string(),
    }
}

/// Argument errors are usage errors; everything else is a runtime failure.
fn from_sequence(e: SequenceError) -> CliError {
    match e {
        SequenceError::InvalidArgument(_) | SequenceError::InvalidFamily(_) => usage(e.to_string()),
        _ => failure(e),
    }
}

fn precision(p: PrecisionArg) -> Precision {
    match p {
        PrecisionArg::Double => Precision::Double,
        PrecisionArg::Extended => Precision::Extended,
    }
}

fn parse_family(s: &str) -> Result<FamilySpec, CliError> {
    let spec = FamilySpec::from_str(s).map_err(from_sequence)?;
    spec.validate().map_err(from_sequence)?;
    Ok(spec)
}

fn params(run: &RunArgs, n_max: u64) -> Result<PackParams, CliError> {
    Ok(PackParams::new(run.t, run.m, run.n0, n_max)
        .map_err(from_sequence)?
        .with_precision(precision(run.precision)))
}

fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| failure(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

pub fn pack(a: PackArgs) -> CmdResult {
    let spec = parse_family(&a.run.family)?;
    let params = params(&a.run, a.nmax)?;
    let fam = family_for_run(spec, &params).map_err(from_sequence)?;
    let opts = RunOptions {
        strict_budget: a.strict_budget,
        ..RunOptions::default()
    };
    let (manifest, report) = run(&fam, &params, &opts).map_err(from_sequence)?;
    if let Some(path) = &a.out {
        write_file(path, &manifest.to_json())?;
    }
    if let Some(path) = &a.svg {
        write_file(path, &render_svg(&manifest))?;
    }
    if a.json {
        println!("{}", to_json(&report));
    } else {
        println!("{}", report.summary());
    }
    Ok(match report.outcome {
        Outcome::Completed => EXIT_OK,
        Outcome::Failed { .. } => EXIT_FAILURE,
    })
}

fn bounds_rows(b: &CorollaryBounds, out: &mut String) {
    let m = match b.m_min_exact {
        Some(m) => m.to_string(),
        None => format!("10^{:.3}", b.m_min.log10()),
    };
    let _ = writeln!(
        out,
        "t = {}: M_min = {m}, log10 N0_min = {:.3} (ceil {})",
        b.t,
        b.n0_min.log10(),
        b.n0_log10_ceil()
    );
    for term in &b.m_terms {
        let _ = writeln!(
            out,
            "  M  term  log10 = {:>12.4}  {}",
            term.value.log10(),
            term.label
        );
    }
    for term in &b.n0_terms {
        let _ = writeln!(
            out,
            "  N0 term  log10 = {:>12.4}  {}",
            term.value.log10(),
            term.label
        );
    }
}

pub fn bounds(a: BoundsArgs) -> CmdResult {
    let spec = parse_family(&a.family)?;
    let compute = |t: f64| -> Result<CorollaryBounds, CliError> {
        if !(t > 0.5 && t < 1.0) {
            return Err(usage(format!("t = {t} must lie in (1/2, 1)")));
        }
        match spec {
            FamilySpec::Ap { q, r } => Ok(corollary31_bounds(q, r, t)),
            FamilySpec::Prime => {
                if !(a.theta > 0.0 && a.theta < 1.0) {
                    return Err(usage(format!("theta = {} must lie in (0, 1)", a.theta)));
                }
                Ok(corollary46_bounds(t, a.theta, a.n_theta))
            }
            _ => Err(usage("bounds are available for ap and prime families only")),
        }
    };

    if a.table1 {
        if !matches!(spec, FamilySpec::Ap { q, r } if q == 1.0 && r == 0.0) {
            return Err(usage("--table1 applies to ap:q=1,r=0"));
        }
        let rows: Vec<_> = TABLE1
            .iter()
            .map(|&(t, published)| {
                let b = corollary31_bounds(1.0, 0.0, t);
                (t, published, b.n0_log10_ceil(), b)
            })
            .collect();
        if a.json {
            let v: Vec<_> = rows
                .iter()
                .map(|(t, p, c, b)| serde_json::json!({"t": t, "published": p, "computed": c, "bounds": b}))
                .collect();
            println!("{}", to_json(&v));
        } else {
            println!(
                "{:>6}  {:>10}  {:>10}  {:>5}",
                "t", "published", "computed", "diff"
            );
            for (t, p, c, _) in &rows {
                println!("{t:>6}  {p:>10}  {c:>10}  {:>5}", c - p);
            }
        }
        return Ok(EXIT_OK);
    }

    if a.t.is_empty() {
        return Err(usage("give --t or --table1"));
    }
    let all =
        a.t.iter()
            .map(|&t| compute(t))
            .collect::<Result<Vec<_>, _>>()?;
    if a.json {
        println!("{}", to_json(&all));
    } else {
        let mut out = String::new();
        for b in &all {
            bounds_rows(b, &mut out);
        }
        print!("{out}");
    }
    Ok(EXIT_OK)
}

pub fn check_conditions(a: ConditionArgs) -> CmdResult {
    let spec = parse_family(&a.run.family)?;
    let params = params(&a.run, a.run.n0)?;
    let profile = match spec {
        FamilySpec::Ap { q, r } => ap_profile(q, r),
        FamilySpec::Prime => prime_profile(),
        _ => {
            return Err(usage(
                "conditions are available for ap and prime families only",
            ))
        }
    };
    let n0 = params.n0;
    let coverage =
        (((1.0 + profile.l) * n0 as f64).ceil() as u64 + 2).max(n0 + params.window() + 2);
    let fam = SidelengthFamily::from_spec(spec, coverage)
        .map_err(from_sequence)?
        .with_precision(params.precision);
    let report = check_ten_conditions(&fam, &profile, &params, n0);
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.overall {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

fn read_manifest(path: &std::path::Path) -> Result<PlacementManifest, CliError> {
    PlacementManifest::read_from(path).map_err(|e| failure(format!("{}: {e}", path.display())))
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    if a.self_test {
        return self_test(a.seed, a.trials);
    }
    let path = a
        .manifest
        .as_ref()
        .ok_or_else(|| usage("give a manifest path or --self-test"))?;
    let manifest = read_manifest(path)?;
    let report = verify_manifest(&manifest, a.tolerance_scale).map_err(failure)?;
    if a.json {
        println!("{}", to_json(&report));
    } else {
        println!(
            "items {}, tolerance {:.3e}\ndisjoint {}, contained {}, area ok {} (gap {:.3e})\nmax overlap depth {:.3e}, max leftover width {:.6e}",
            report.items,
            report.tolerance,
            report.disjoint,
            report.contained,
            report.area_ok,
            report.area_gap,
            report.max_overlap_depth,
            report.max_leftover_width
        );
        if let Some(b) = &report.budget {
            println!(
                "perim_delta(free) {:.6e}, budget {:.6e}, within {}",
                b.perim_delta_free, b.bound_value, b.within
            );
        }
        for v in &report.violations {
            println!(
                "violation {:?} {:?} magnitude {:.3e}",
                v.kind, v.ids, v.magnitude
            );
        }
        println!(
            "{}",
            if report.is_green() {
                "OK"
            } else {
                "VIOLATIONS"
            }
        );
    }
    Ok(if report.is_green() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

fn self_test(seed: u64, trials: usize) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for trial in 0..trials {
        let n = rng.gen_range(0..2000);
        let rects: Vec<Rect> = (0..n)
            .map(|_| {
                let (x, y) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
                Rect::from_origin(x, y, rng.gen_range(0.01..4.0), rng.gen_range(0.01..4.0))
                    .expect("positive extent")
            })
            .collect();
        let brute = brute_force_overlap(&rects, 1e-9).map_err(failure)?;
        if sweep_overlaps(&rects, 1e-9) != brute {
            mismatches += 1;
            println!("trial {trial}: sweep and brute force disagree");
        }
    }
    println!("{trials} instances, {mismatches} mismatches");
    Ok(if mismatches == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

pub fn render(a: RenderArgs) -> CmdResult {
    let manifest = read_manifest(&a.manifest)?;
    write_file(&a.svg, &render_svg(&manifest))?;
    Ok(EXIT_OK)
}

pub fn lemmas(a: LemmaArgs) -> CmdResult {
    if a.t.iter().any(|&t| !(t > 0.5 && t < 1.0)) {
        return Err(usage("every t must lie in (1/2, 1)"));
    }
    let fam = SidelengthFamily::prime_up_to(a.limit).map_err(from_sequence)?;
    let report = check_prime_sum_lemmas(&fam, &a.t, &a.x).map_err(from_sequence)?;
    let smooth_to = 10_000.min(fam.max_index().unwrap_or(0).saturating_sub(1));
    let smooth = check_smooth_extension(&fam, smooth_to, 100_001, 8).map_err(from_sequence)?;
    let ok = report.asserted_hold() && smooth.holds();
    if a.json {
        println!(
            "{}",
            to_json(&serde_json::json!({"lemmas": report, "smooth_extension": smooth}))
        );
    } else {
        let pb = &report.prime_bounds;
        println!(
            "prime bounds over {} primes: {} lower and {} upper exceptions",
            pb.checked,
            pb.lower_exceptions.len(),
            pb.upper_exceptions.len()
        );
        for r in &report.rows {
            println!(
                "t = {:<5} x = {:<9} upper chain {}  lower chain {}  sum bounds {} (proved range: {})",
                r.t,
                r.x,
                r.upper_chain.holds,
                r.lower_chain.holds,
                r.partial_sum_bounds.holds,
                r.partial_sum_bounds.in_range
            );
        }
        println!(
            "smooth extension: exact to {} ({} mismatches), max phi' {:.6}, f' <= 7 gap at {} samples ({} violations)",
            smooth.up_to,
            smooth.mismatches.len(),
            smooth.bump_max_derivative,
            smooth.derivative_samples,
            smooth.derivative_violations.len()
        );
        println!("{}", if ok { "OK" } else { "VIOLATIONS" });
    }
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATIONS })
}
