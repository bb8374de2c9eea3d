//! Command-line front end.
//!
//! Exit codes: `0` success, `1` input or usage error, `2` the target lies
//! outside the convex hull (a separating functional is printed).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, SeparationCertificate};
use crate::experiment::{format_sig, rows_to_csv, run_convergence, ExperimentConfig};
use crate::greedy::{ConvexTarget, GreedySolver, GreedyTrace, PointSet, DEFAULT_CONSTANT};
use crate::greedy::{required_k_with, theoretical_bound_with};
use crate::instances::{exact_k_hull_distance, lower_bound_floor, lower_bound_instance, symmetric_distance};
use crate::lp_geometry::{SpaceSpec, Vector};
use crate::maurey::{maurey_sample, power_of_two_grid, summarize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MEMBERSHIP: i32 = 2;

pub const TRACE_HEADER: &str = "k,chosen_index,residual_norm,bound";
pub const MAUREY_HEADER: &str = "k,median,mean,max";

/// Largest `k` for which `lowerbound` runs the exhaustive oracle.
const LOWERBOUND_ORACLE_MAX_K: usize = 2;
const WEIGHTS_SUM_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "caratheodory", version, about = "Greedy approximate Carathéodory in l_p spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Greedy sparse approximation of a point of the convex hull.
    Solve(SolveArgs),
    /// Colorful variant: step i draws from set i. The list of set files is
    /// cycled when --k exceeds its length.
    Colorful(ColorfulArgs),
    /// Random-sampling baseline drawing i.i.d. points from the weights.
    Maurey(MaureyArgs),
    /// Distance from the barycenter of {e_1..e_2k} to the k-convex hull.
    Lowerbound(LowerboundArgs),
    /// Evaluate the greedy error bound, or the smallest k reaching --eps.
    Bound(BoundArgs),
    /// Run a convergence experiment described by a JSON config.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("goal").required(true).args(["target", "weights"])))]
struct SolveArgs {
    /// CSV file, one point per row
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    k: usize,
    /// CSV file holding the target point as a single row
    #[arg(long)]
    target: Option<PathBuf>,
    /// Single-column convex weights; the target is their weighted mean
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Write the trace CSV here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print the trace as JSON
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    constant: f64,
}

#[derive(Debug, Args)]
struct ColorfulArgs {
    #[arg(long, num_args = 1.., required = true)]
    sets: Vec<PathBuf>,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    constant: f64,
}

#[derive(Debug, Args)]
struct MaureyArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    p: f64,
    /// Sample sizes 1, 2, 4, ... up to this value
    #[arg(long)]
    kmax: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LowerboundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("query").required(true).args(["eps", "k"])))]
struct BoundArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    diam: f64,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    constant: f64,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(anyhow::Error),
    Membership(SeparationCertificate, bool),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Entry point used by the binary.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Colorful(a) => cmd_colorful(a, out),
        Command::Maurey(a) => cmd_maurey(a, out),
        Command::Lowerbound(a) => cmd_lowerbound(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::Compare(a) => cmd_compare(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INPUT
        }
        Err(Failure::Membership(cert, json)) => {
            let _ = writeln!(err, "error: target is outside the convex hull");
            let _ = out.write_all(render_certificate(&cert, json).as_bytes());
            EXIT_MEMBERSHIP
        }
    }
}

fn smooth_space(p: f64, dim: usize) -> anyhow::Result<SpaceSpec> {
    let space = SpaceSpec::new(p, dim)?;
    space.require_smooth()?;
    Ok(space)
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Rows of a points CSV. Blank lines and lines starting with `#` are skipped.
pub fn parse_points(path: &Path) -> anyhow::Result<Vec<Vec<f64>>> {
    Ok(parse_numbered_rows(path)?.into_iter().map(|(_, row)| row).collect())
}

fn parse_numbered_rows(path: &Path) -> anyhow::Result<Vec<(usize, Vec<f64>)>> {
    let text = read_file(path)?;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let row = line
            .split(',')
            .map(|field| parse_finite(field, path, lineno))
            .collect::<anyhow::Result<Vec<f64>>>()?;
        if let Some((_, first)) = rows.first() {
            if first.len() != row.len() {
                bail!(
                    "{}:{lineno}: expected {} columns, found {}",
                    path.display(),
                    first.len(),
                    row.len()
                );
            }
        }
        rows.push((lineno, row));
    }
    if rows.is_empty() {
        bail!("{}: no rows found", path.display());
    }
    Ok(rows)
}

fn parse_finite(field: &str, path: &Path, lineno: usize) -> anyhow::Result<f64> {
    let field = field.trim();
    let value: f64 = field
        .parse()
        .map_err(|_| anyhow!("{}:{lineno}: cannot parse '{field}' as a number", path.display()))?;
    if !value.is_finite() {
        bail!("{}:{lineno}: non-finite value '{field}'", path.display());
    }
    Ok(value)
}

/// Single-column weights; renormalized when the sum is within `1e-8` of one.
pub fn parse_weights(path: &Path) -> anyhow::Result<Vec<f64>> {
    let rows = parse_numbered_rows(path)?;
    let mut weights = Vec::with_capacity(rows.len());
    for (lineno, row) in &rows {
        if row.len() != 1 {
            bail!("{}:{lineno}: weights file must have a single column", path.display());
        }
        if row[0] < 0.0 {
            bail!("{}:{lineno}: negative weight {}", path.display(), row[0]);
        }
        weights.push(row[0]);
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHTS_SUM_TOL {
        bail!("{}: weights sum to {sum}, not 1", path.display());
    }
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

fn parse_target(path: &Path) -> anyhow::Result<Vector> {
    let mut rows = parse_points(path)?;
    if rows.len() != 1 {
        bail!("{}: target file must contain exactly one point, found {}", path.display(), rows.len());
    }
    Ok(Vector::new(rows.pop().unwrap())?)
}

fn load_set(path: &Path, p: f64) -> anyhow::Result<PointSet> {
    let rows = parse_points(path)?;
    let space = smooth_space(p, rows[0].len())?;
    PointSet::from_rows(rows, &space).with_context(|| format!("{}", path.display()))
}

fn lift(e: Error, json: bool) -> Failure {
    match e {
        Error::MembershipViolated(cert) => Failure::Membership(*cert, json),
        other => Failure::Input(other.into()),
    }
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write) -> CmdResult {
    let set = load_set(&args.points, args.p)?;
    let space = *set.space();
    let target = match (&args.target, &args.weights) {
        (Some(path), None) => {
            let a = parse_target(path)?;
            space
                .check_dim(a.dim())
                .with_context(|| format!("{}", path.display()))?;
            ConvexTarget::point(a)
        }
        (None, Some(path)) => {
            let weights = parse_weights(path)?;
            if weights.len() != set.len() {
                return Err(anyhow!(
                    "{}: {} weights for {} points",
                    path.display(),
                    weights.len(),
                    set.len()
                )
                .into());
            }
            ConvexTarget::from_weights(&set, weights).map_err(anyhow::Error::from)?
        }
        _ => return Err(anyhow!("exactly one of --target and --weights is required").into()),
    };
    let solver = GreedySolver::new(space)
        .and_then(|s| s.with_constant(args.constant))
        .map_err(anyhow::Error::from)?;
    let trace = solver.run(&set, &target, args.k).map_err(|e| lift(e, args.json))?;
    emit_trace(&trace, args.trace.as_deref(), args.json, false, out)
}

fn cmd_colorful(args: ColorfulArgs, out: &mut dyn Write) -> CmdResult {
    let sets = args
        .sets
        .iter()
        .map(|path| load_set(path, args.p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let space = *sets[0].space();
    for (path, set) in args.sets.iter().zip(&sets) {
        space
            .check_dim(set.dim())
            .with_context(|| format!("{}", path.display()))?;
    }
    let a = parse_target(&args.target)?;
    space
        .check_dim(a.dim())
        .with_context(|| format!("{}", args.target.display()))?;
    let solver = GreedySolver::new(space)
        .and_then(|s| s.with_constant(args.constant))
        .map_err(anyhow::Error::from)?;
    let trace = solver
        .run_colorful(&sets, &[ConvexTarget::point(a)], args.k)
        .map_err(|e| lift(e, args.json))?;
    emit_trace(&trace, args.trace.as_deref(), args.json, true, out)
}

#[derive(Serialize)]
struct JsonTrace<'a> {
    chosen: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    sources: Option<&'a [usize]>,
    residual_norms: &'a [f64],
    bounds: &'a [f64],
    p: f64,
    dim: usize,
    diam: f64,
    #[serde(rename = "constant_C")]
    constant_c: f64,
}

pub fn trace_to_csv(trace: &GreedyTrace) -> String {
    let mut s = String::with_capacity(48 * (trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for j in 0..trace.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            j + 1,
            trace.chosen[j],
            trace.residual_norms[j],
            trace.bounds[j]
        );
    }
    s
}

fn emit_trace(trace: &GreedyTrace, csv_path: Option<&Path>, json: bool, colorful: bool, out: &mut dyn Write) -> CmdResult {
    let csv = trace_to_csv(trace);
    if let Some(path) = csv_path {
        fs::write(path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let text = if json {
        let doc = JsonTrace {
            chosen: &trace.chosen,
            sources: colorful.then_some(trace.sources.as_slice()),
            residual_norms: &trace.residual_norms,
            bounds: &trace.bounds,
            p: trace.space.p(),
            dim: trace.space.dim(),
            diam: trace.diam,
            constant_c: trace.constant_c,
        };
        let mut s = serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)?;
        s.push('\n');
        s
    } else if csv_path.is_some() {
        let last = trace.len() - 1;
        format!(
            "steps={} residual_norm={} bound={} diam={}\n",
            trace.len(),
            trace.residual_norms[last],
            trace.bounds[last],
            trace.diam
        )
    } else {
        csv
    };
    write_out(out, &text)
}

fn render_certificate(cert: &SeparationCertificate, json: bool) -> String {
    if json {
        #[derive(Serialize)]
        struct Doc<'a> {
            membership_violated: Inner<'a>,
        }
        #[derive(Serialize)]
        struct Inner<'a> {
            step: usize,
            set_index: Option<usize>,
            margin: f64,
            functional: &'a [f64],
        }
        let doc = Doc {
            membership_violated: Inner {
                step: cert.step,
                set_index: cert.set_index,
                margin: cert.margin,
                functional: cert.functional.as_slice(),
            },
        };
        return serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n";
    }
    let mut s = format!("membership violated at step {}", cert.step);
    if let Some(i) = cert.set_index {
        let _ = write!(s, " in set {i}");
    }
    let _ = writeln!(s, ": margin {}", cert.margin);
    s.push_str("separating_functional");
    for c in cert.functional.as_slice() {
        let _ = write!(s, ",{c}");
    }
    s.push('\n');
    s
}

fn cmd_maurey(args: MaureyArgs, out: &mut dyn Write) -> CmdResult {
    let set = load_set(&args.points, args.p)?;
    let weights = parse_weights(&args.weights)?;
    if weights.len() != set.len() {
        return Err(anyhow!(
            "{}: {} weights for {} points",
            args.weights.display(),
            weights.len(),
            set.len()
        )
        .into());
    }
    if args.kmax == 0 {
        return Err(anyhow!("--kmax must be at least 1").into());
    }
    let target = ConvexTarget::from_weights(&set, weights).map_err(anyhow::Error::from)?;
    let ks = power_of_two_grid(args.kmax);
    let report = maurey_sample(&set, &target, set.space(), &ks, args.trials, args.seed).map_err(anyhow::Error::from)?;
    let mut csv = String::from(MAUREY_HEADER);
    csv.push('\n');
    for s in summarize(&report) {
        let _ = writeln!(csv, "{},{},{},{}", s.k, format_sig(s.median), format_sig(s.mean), format_sig(s.max));
    }
    write_to(args.out.as_deref(), out, &csv)
}

fn cmd_lowerbound(args: LowerboundArgs, out: &mut dyn Write) -> CmdResult {
    if !(args.p >= 1.0 && args.p.is_finite()) {
        return Err(anyhow!("--p must be finite and at least 1").into());
    }
    let inst = lower_bound_instance(args.k, args.p).map_err(anyhow::Error::from)?;
    let mut text = format!("k={} n={} p={}\n", inst.k, inst.n, args.p);
    if args.k <= LOWERBOUND_ORACLE_MAX_K {
        let space = *inst.set.space();
        let d = exact_k_hull_distance(&inst.set, &inst.target.a, &space, args.k).map_err(anyhow::Error::from)?;
        let _ = writeln!(text, "oracle_distance={}", format_sig(d));
        let _ = writeln!(text, "symmetric_value={}", format_sig(symmetric_distance(args.k, args.p)));
    } else {
        let _ = writeln!(text, "oracle_distance=not computed (k > {LOWERBOUND_ORACLE_MAX_K})");
        let _ = writeln!(
            text,
            "symmetric_value={} (conjectured exact distance)",
            format_sig(symmetric_distance(args.k, args.p))
        );
    }
    let _ = writeln!(text, "floor={}", format_sig(lower_bound_floor(args.k, args.p)));
    write_out(out, &text)
}

fn cmd_bound(args: BoundArgs, out: &mut dyn Write) -> CmdResult {
    let space = smooth_space(args.p, 1)?;
    let text = match (args.eps, args.k) {
        (Some(eps), None) => {
            let k = required_k_with(&space, args.diam, eps, args.constant).map_err(anyhow::Error::from)?;
            let b = theoretical_bound_with(&space, k, args.diam, args.constant).map_err(anyhow::Error::from)?;
            format!("required_k={k}\nbound={}\n", format_sig(b))
        }
        (None, Some(k)) => {
            let b = theoretical_bound_with(&space, k, args.diam, args.constant).map_err(anyhow::Error::from)?;
            format!("bound={}\n", format_sig(b))
        }
        _ => return Err(anyhow!("exactly one of --eps and --k is required").into()),
    };
    write_out(out, &text)
}

fn cmd_compare(args: CompareArgs, out: &mut dyn Write) -> CmdResult {
    let text = read_file(&args.config)?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid experiment config", args.config.display()))?;
    let rows = run_convergence(&config).map_err(anyhow::Error::from)?;
    write_to(args.out.as_deref(), out, &rows_to_csv(&rows))
}

fn write_to(path: Option<&Path>, out: &mut dyn Write, text: &str) -> CmdResult {
    match path {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Input),
        None => write_out(out, text),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).context("cannot write output")?;
    Ok(())
}
