mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use bach3_core::catalog::{
    build_solution, run_scan, verify_solution, Observable, ScanParameter, ScanSpec, SolutionKind, SolutionSpec,
    ToleranceProfile, VerifyOptions,
};
use bach3_core::warped::{warp_build, Fiber, LapseProfile, WarpedSpec};
use bach3_core::{rnds_lapse_roots, DiffConfig, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, Provenance};

/// Verifies static electrovacuum solutions and their Cotton/Bach geometry.
#[derive(Parser, Debug)]
#[command(name = "bach3", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a catalog solution and check every residual on a grid.
    Verify(VerifyArgs),
    /// Print the positive roots of the RNdS lapse polynomial.
    Roots(RootsArgs),
    /// Sweep one parameter and record an observable per step.
    Scan(ScanArgs),
    /// Build a warped product and compare its curvature with the closed forms.
    Warp(WarpArgs),
}

#[derive(Args, Debug, Clone)]
struct SolutionArgs {
    /// nariai, cold, ultracold or rnds. May come from `--spec` instead.
    kind: Option<String>,
    /// key = value file with kind, lambda, phi2, q, m; flags override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct EvalArgs {
    /// Points per axis, e.g. 5x3x3.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 3]>,
    #[arg(long, value_enum, default_value_t = DiffArg::Ad)]
    diff: DiffArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    solution: SolutionArgs,
    #[command(flatten)]
    eval: EvalArgs,
    /// strict-ad, loose-fd, or explicit bounds such as `residual=1e-6,cotton=1e-5`
    /// layered over the default preset.
    #[arg(long)]
    tolerance: Option<String>,
    /// Bach divergence depth.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    depth: u8,
}

#[derive(Args, Debug)]
struct RootsArgs {
    #[arg(long, allow_negative_numbers = true)]
    m: f64,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    solution: SolutionArgs,
    #[command(flatten)]
    eval: EvalArgs,
    /// r, q, phi2, lambda or m.
    #[arg(long)]
    parameter: String,
    #[arg(long, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    hi: f64,
    /// Number of intervals; steps + 1 values are visited.
    #[arg(long)]
    steps: usize,
    /// q_value, q_sign, cotton_norm, residual_max or fc_minus_v.
    #[arg(long, default_value = "q_value")]
    observable: String,
}

#[derive(Args, Debug)]
struct WarpArgs {
    /// key = value file with profile, parameters, c1, c2, interval and
    /// optionally fiber_scalar.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// sin, sinh, linear or constant.
    #[arg(long)]
    profile: Option<String>,
    /// Comma separated profile parameters.
    #[arg(long, allow_hyphen_values = true)]
    parameters: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
    /// Radial interval as `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    fiber_scalar: Option<f64>,
    /// Number of radial samples.
    #[arg(long, default_value_t = 5)]
    radial: usize,
    #[arg(long, value_enum, default_value_t = DiffArg::Ad)]
    diff: DiffArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Bound applied to the Ricci defect and the fibre scalar spread.
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DiffArg {
    Ad,
    Fd,
}

impl DiffArg {
    fn config(self) -> DiffConfig {
        match self {
            DiffArg::Ad => DiffConfig::automatic(),
            DiffArg::Fd => DiffConfig::finite_difference(),
        }
    }
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Pass,
    CheckFailed,
}

/// Error that maps to exit status 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

type CmdResult = Result<Outcome, Usage>;

fn parse_grid(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 3 {
        return Err(format!("grid `{s}` is not of the form AxBxC"));
    }
    let mut out = [0usize; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("grid count `{part}` is not a non-negative integer"))?;
        if *slot == 0 {
            return Err("grid counts must be at least 1".into());
        }
    }
    Ok(out)
}

fn parse_tolerance(text: Option<&str>, diff: DiffArg) -> anyhow::Result<ToleranceProfile> {
    let base = match diff {
        DiffArg::Ad => ToleranceProfile::strict_ad(),
        DiffArg::Fd => ToleranceProfile::loose_fd(),
    };
    let Some(text) = text else {
        return Ok(base);
    };
    if !text.contains('=') {
        return Ok(ToleranceProfile::preset(text.trim())?);
    }
    let mut tol = ToleranceProfile {
        name: "custom".into(),
        ..base
    };
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("tolerance entry `{item}` is not key=value"))?;
        let value: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("tolerance `{key}` is not a number"))?;
        let slot = match key.trim() {
            "residual" => &mut tol.residual,
            "trace" => &mut tol.trace,
            "cotton" => &mut tol.cotton,
            "fc_minus_v" => &mut tol.fc_minus_v,
            "bach" => &mut tol.bach,
            "div_b" => &mut tol.div_b,
            other => bail!("unknown tolerance key `{other}`"),
        };
        *slot = value;
    }
    tol.validate()?;
    Ok(tol)
}

fn solution_spec(args: &SolutionArgs) -> anyhow::Result<SolutionSpec> {
    let from_file = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(SolutionSpec::from_kv(&text)?)
        }
        None => None,
    };
    let kind: SolutionKind = match (&args.kind, &from_file) {
        (Some(k), _) => k.parse()?,
        (None, Some(s)) => s.kind,
        (None, None) => bail!("a solution kind or --spec file is required"),
    };
    let mut spec = match from_file {
        Some(s) if s.kind == kind => s,
        _ => {
            let lambda = args.lambda.ok_or_else(|| anyhow!("--lambda is required"))?;
            SolutionSpec::new(kind, lambda)
        }
    };
    if let Some(l) = args.lambda {
        spec.lambda = l;
    }
    spec.phi2 = args.phi2.or(spec.phi2);
    spec.q = args.q.or(spec.q);
    spec.m = args.m.or(spec.m);
    Ok(spec)
}

fn run_verify(args: &VerifyArgs) -> CmdResult {
    let spec = solution_spec(&args.solution)?;
    let tolerance = parse_tolerance(args.tolerance.as_deref(), args.eval.diff)?;
    let opts = VerifyOptions {
        grid: args.eval.grid,
        tolerance,
        diff: args.eval.diff.config(),
        depth: args.depth,
    };
    let report = verify_solution(&spec, &opts).map_err(validation)?;
    let provenance = Provenance::new(opts.diff, report.grid_counts);
    output::write_report(&report, &provenance, args.eval.format, args.eval.output.as_deref())?;
    Ok(if report.verdict.pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn run_roots(args: &RootsArgs) -> CmdResult {
    match rnds_lapse_roots(args.m, args.q, args.lambda) {
        Ok(roots) => {
            output::write_roots(args.m, args.q, args.lambda, &roots, args.format)?;
            Ok(Outcome::Pass)
        }
        Err(Error::NoPositiveRoots) => {
            eprintln!("no positive roots for m = {}, q = {}, Λ = {}", args.m, args.q, args.lambda);
            output::write_roots(args.m, args.q, args.lambda, &[], args.format)?;
            Ok(Outcome::CheckFailed)
        }
        Err(e) => Err(validation(e)),
    }
}

fn run_scan_cmd(args: &ScanArgs) -> CmdResult {
    let spec = solution_spec(&args.solution)?;
    let scan = ScanSpec {
        parameter: args.parameter.parse::<ScanParameter>()?,
        lo: args.lo,
        hi: args.hi,
        steps: args.steps,
        observable: args.observable.parse::<Observable>()?,
    };
    scan.validate()?;
    build_solution(&spec).map_err(validation)?;
    let diff = args.eval.diff.config();
    let rows = run_scan(&spec, &scan, args.eval.grid, diff).map_err(validation)?;
    let provenance = Provenance::new(diff, args.eval.grid.unwrap_or([3, 1, 1]));
    output::write_scan(&spec, &scan, &rows, &provenance, args.eval.format, args.eval.output.as_deref())?;
    if rows.iter().any(|r| r.valid) {
        Ok(Outcome::Pass)
    } else {
        eprintln!("scan produced no valid rows");
        Ok(Outcome::CheckFailed)
    }
}

fn warped_spec(args: &WarpArgs) -> anyhow::Result<WarpedSpec> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(WarpedSpec::from_kv(&text)?)
        }
        None => None,
    };
    let numbers = |key: &str, v: &str| bach3_core::kv::numbers(key, v);
    let profile = match (&args.profile, &args.parameters) {
        (Some(family), Some(params)) => LapseProfile::from_parts(family, &numbers("parameters", params)?)?,
        (None, None) => spec
            .as_ref()
            .map(|s| s.profile)
            .ok_or_else(|| anyhow!("--profile and --parameters, or --spec, are required"))?,
        _ => bail!("--profile and --parameters must be given together"),
    };
    let interval = match &args.interval {
        Some(text) => {
            let v = numbers("interval", text)?;
            if v.len() != 2 {
                bail!("--interval takes two numbers");
            }
            [v[0], v[1]]
        }
        None => spec
            .as_ref()
            .map(|s| s.interval)
            .ok_or_else(|| anyhow!("--interval is required"))?,
    };
    let pick = |flag: Option<f64>, file: Option<f64>, name: &str| {
        flag.or(file).ok_or_else(|| anyhow!("--{name} is required"))
    };
    let base = spec.take();
    let fiber = match args.fiber_scalar {
        Some(scalar) => Fiber::ConstantCurvature { scalar },
        None => base.as_ref().map_or(Fiber::UnitSphere, |s| s.fiber),
    };
    Ok(WarpedSpec {
        profile,
        c1: pick(args.c1, base.as_ref().map(|s| s.c1), "c1")?,
        c2: pick(args.c2, base.as_ref().map(|s| s.c2), "c2")?,
        interval,
        fiber,
    })
}

fn run_warp(args: &WarpArgs) -> CmdResult {
    let spec = warped_spec(args)?;
    if args.radial == 0 {
        return Err(Usage(anyhow!("--radial must be at least 1")));
    }
    if !(args.tolerance > 0.0) {
        return Err(Usage(anyhow!("--tolerance must be positive")));
    }
    let mut product = warp_build(&spec).map_err(validation)?;
    product.metric.diff = args.diff.config();
    let report = output::warp_report(&product, args.radial, args.tolerance);
    let provenance = Provenance::new(product.metric.diff, [args.radial, 3, 3]);
    output::write_warp(&report, &provenance, args.format, args.output.as_deref())?;
    Ok(if report.pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn validation(e: Error) -> Usage {
    Usage(e.into())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("BACH3_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| anyhow!("BACH3_THREADS = `{value}` is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Roots(a) => run_roots(a),
        Command::Scan(a) => run_scan_cmd(a),
        Command::Warp(a) => run_warp(a),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("5x3x3"), Ok([5, 3, 3]));
        assert!(parse_grid("5x3").is_err());
        assert!(parse_grid("0x1x1").is_err());
        assert!(parse_grid("ax1x1").is_err());
    }

    #[test]
    fn tolerance_parsing() {
        assert_eq!(parse_tolerance(None, DiffArg::Fd).unwrap(), ToleranceProfile::loose_fd());
        assert_eq!(parse_tolerance(Some("strict-ad"), DiffArg::Fd).unwrap(), ToleranceProfile::strict_ad());
        let t = parse_tolerance(Some("residual=1e-3, cotton=2e-4"), DiffArg::Ad).unwrap();
        assert_eq!((t.residual, t.cotton, t.trace), (1e-3, 2e-4, 1e-8));
        assert!(parse_tolerance(Some("residual=-1"), DiffArg::Ad).is_err());
        assert!(parse_tolerance(Some("speed=1"), DiffArg::Ad).is_err());
        assert!(parse_tolerance(Some("medium"), DiffArg::Ad).is_err());
    }
}
