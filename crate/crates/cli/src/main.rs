//! `gkp-teleport`: densities, verdicts, fidelity statistics and angle
//! searches for the Fock-damped GKP gate-teleportation circuit.
//!
//! Angles accept a literal `pi` suffix (`0.25pi`, `-pi`), which multiplies
//! the number by π. Every flag can also be set through an environment
//! variable named `GKP_` plus the flag in upper snake case, e.g.
//! `GKP_BETA`, `GKP_THETA_R`, `GKP_GRID_POINTS`.
//!
//! # Outputs
//!
//! `pdf` writes `<out>.csv` (unless `--format json`) and `<out>.json`.
//! The CSV has the header `q_m,k,weight,theta,phi` and one row per grid
//! node, every float with 17 significant digits. The JSON summary has the
//! fields `command`, `params {beta, theta_r}`, `grid {q_min, q_max,
//! n_points}`, `bins_theta`, `bins_phi`, `clustering {top_n, merge_radius}`,
//! `total_weight`, `clusters [{point {theta, phi}, mass}]`,
//! `orbit_residual` and `marginals {theta, phi}` where each marginal is
//! `{lo, hi, mass [..]}`. `pdf --replay <summary.json>` rebuilds the same
//! density from a summary.
//!
//! The other commands write JSON to `--out` or stdout:
//!
//! - `classify`: `{u, v, theta_r, axis, rows [{ell, k, axis, sign, ratio,
//!   bloch?}]}` with `ratio` one of `0`, `inf`, `1`, `-1`, `i`, `-i`; rows
//!   cover one period `ℓ = 0 … 2v-1`. `bloch` is present with `--beta`.
//! - `fidelity`: `{beta, theta_r, squeezing_db, thresholds [{threshold,
//!   probability}], nearest_targets}`.
//! - `search`: `{theta_r, achieved, mass, distance}`, or with `--threshold`
//!   `{theta_r, threshold, probability}`.
//! - `trajectory`: `{samples [{theta_r, peaks}], tracks [[peak]]}`.
//! - `verify`: `[{name, cases, max_error, tolerance, passed}]`.
//!
//! With `--format csv`, `classify`, `fidelity` and `trajectory` write a
//! table instead.
//!
//! # Exit status
//!
//! 0 on success, 1 on invalid input, 2 on a numerical failure, 3 when
//! `verify` finds a failing property. Errors are printed to stderr as
//! `{"error": kind, "message": .., ..}`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gkp_teleport::analysis::{
    fidelity_report, search_success_probability, search_theta_r, trace_trajectory, SearchOptions,
};
use gkp_teleport::export::{write_csv, Clustering, DensitySummary};
use gkp_teleport::gauss_sums::{classify_zero_damping, PeakRatio, VerdictAxis};
use gkp_teleport::pushforward::{
    build_density, DensityOptions, OutcomeGrid, DEFAULT_BINS_PHI, DEFAULT_BINS_THETA, DEFAULT_GRID_POINTS,
    DEFAULT_Q_WINDOW, FULL_GRID_POINTS,
};
use gkp_teleport::teleport::{bloch_angles, coefficients};
use gkp_teleport::{verify, BlochPoint, Error, Execution, MeasurementOutcome, ProtocolParams, RationalAngle};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "gkp-teleport", version, about = "GKP gate teleportation under Fock damping")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true, env = "GKP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bloch-sphere density of the output state.
    Pdf(PdfArgs),
    /// Zero-damping Pauli verdict for tan θ_r = u/v.
    Classify(ClassifyArgs),
    /// Probability of landing near a magic state.
    Fidelity(FidelityArgs),
    /// Search θ_r for a target output state.
    Search(SearchArgs),
    /// Follow the dominant peaks across a θ_r interval.
    Trajectory(TrajectoryArgs),
    /// Run the built-in property checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct AngleArgs {
    /// Rotation angle, e.g. 0.0681pi.
    #[arg(long, env = "GKP_THETA_R", value_parser = parse_angle, allow_hyphen_values = true)]
    theta_r: Option<f64>,
    /// Numerator of tan θ_r = u/v.
    #[arg(long, env = "GKP_U", allow_hyphen_values = true)]
    u: Option<i64>,
    /// Denominator of tan θ_r = u/v.
    #[arg(long, env = "GKP_V")]
    v: Option<i64>,
}

impl AngleArgs {
    fn resolve(&self) -> Result<f64, Error> {
        match (self.theta_r, self.u, self.v) {
            (Some(t), None, None) => Ok(t),
            (None, Some(u), Some(v)) => Ok(RationalAngle::new(u, v)?.theta_r()),
            _ => Err(Error::InvalidInput("give either --theta-r or both --u and --v".into())),
        }
    }
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Half-width of the q_m window in units of √π.
    #[arg(long, env = "GKP_Q_WINDOW", default_value_t = DEFAULT_Q_WINDOW)]
    q_window: f64,
    #[arg(long, env = "GKP_GRID_POINTS", default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Use 2,000,000 grid points.
    #[arg(long, env = "GKP_PAPER_FIDELITY", conflicts_with = "grid_points")]
    paper_fidelity: bool,
    #[arg(long, env = "GKP_BINS_THETA", default_value_t = DEFAULT_BINS_THETA)]
    bins_theta: usize,
    #[arg(long, env = "GKP_BINS_PHI", default_value_t = DEFAULT_BINS_PHI)]
    bins_phi: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<OutcomeGrid, Error> {
        let n = if self.paper_fidelity { FULL_GRID_POINTS } else { self.grid_points };
        if !(self.q_window.is_finite() && self.q_window > 0.0) {
            return Err(Error::InvalidInput(format!("--q-window must be positive, got {}", self.q_window)));
        }
        OutcomeGrid::symmetric(self.q_window, n)
    }

    fn options(&self) -> Result<DensityOptions, Error> {
        if self.bins_theta == 0 || self.bins_phi == 0 {
            return Err(Error::InvalidInput("bin counts must be positive".into()));
        }
        Ok(DensityOptions {
            bins_theta: self.bins_theta,
            bins_phi: self.bins_phi,
            execution: Execution::Parallel,
        })
    }

    fn search_options(&self) -> Result<SearchOptions, Error> {
        Ok(SearchOptions {
            grid: self.grid()?,
            density: self.options()?,
            ..SearchOptions::default()
        })
    }
}

#[derive(Args, Debug)]
struct PdfArgs {
    #[arg(long, env = "GKP_BETA", allow_hyphen_values = true, required_unless_present = "replay")]
    beta: Option<f64>,
    #[command(flatten)]
    angle: AngleArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Number of clusters reported in the summary.
    #[arg(long, env = "GKP_TOP_N", default_value_t = 8)]
    top_n: usize,
    /// Cluster radius in radians.
    #[arg(long, env = "GKP_MERGE_RADIUS", default_value_t = 0.1)]
    merge_radius: f64,
    /// Path stem; `.csv` and `.json` are appended.
    #[arg(long, env = "GKP_OUT", default_value = "density")]
    out: PathBuf,
    #[arg(long, env = "GKP_FORMAT", value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Rebuild the density described by a JSON summary.
    #[arg(long, env = "GKP_REPLAY")]
    replay: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, env = "GKP_U", allow_hyphen_values = true)]
    u: i64,
    #[arg(long, env = "GKP_V")]
    v: i64,
    /// Also report the finite-damping Bloch point at each peak outcome.
    #[arg(long, env = "GKP_BETA", allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, env = "GKP_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "GKP_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[arg(long, env = "GKP_BETA", allow_hyphen_values = true)]
    beta: f64,
    #[command(flatten)]
    angle: AngleArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, env = "GKP_THRESHOLDS", value_delimiter = ',', default_value = "0.94,0.96,0.999")]
    thresholds: Vec<f64>,
    #[arg(long, env = "GKP_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "GKP_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, env = "GKP_BETA", allow_hyphen_values = true)]
    beta: f64,
    /// Search interval `lo,hi`, e.g. `0.38pi,0.385pi`.
    #[arg(long, env = "GKP_INTERVAL", value_parser = parse_interval, allow_hyphen_values = true)]
    interval: (f64, f64),
    /// Polar angle of the target state.
    #[arg(long, env = "GKP_TARGET_THETA", value_parser = parse_angle, allow_hyphen_values = true)]
    target_theta: Option<f64>,
    /// Azimuth of the target state.
    #[arg(long, env = "GKP_TARGET_PHI", value_parser = parse_angle, allow_hyphen_values = true)]
    target_phi: Option<f64>,
    /// Maximize the success probability at this fidelity instead.
    #[arg(long, env = "GKP_THRESHOLD", conflicts_with_all = ["target_theta", "target_phi"])]
    threshold: Option<f64>,
    #[arg(long, env = "GKP_GRID_STEPS", default_value_t = 8)]
    grid_steps: usize,
    #[arg(long, env = "GKP_REFINE_ITERS", default_value_t = 20)]
    refine_iters: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, env = "GKP_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[arg(long, env = "GKP_BETA", allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, env = "GKP_INTERVAL", value_parser = parse_interval, allow_hyphen_values = true)]
    interval: (f64, f64),
    #[arg(long, env = "GKP_STEPS", default_value_t = 20)]
    steps: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, env = "GKP_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "GKP_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Sample points per property.
    #[arg(long, env = "GKP_CASES", default_value_t = 100)]
    cases: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, env = "GKP_OUT")]
    out: Option<PathBuf>,
}

/// A number, optionally followed by `pi`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.strip_suffix("pi") {
        Some("") | Some("+") => PI,
        Some("-") => -PI,
        Some(head) => head.trim().parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"))? * PI,
        None => s.parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("angle {s:?} is not finite"))
    }
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("interval {s:?} must look like lo,hi"))?;
    Ok((parse_angle(lo)?, parse_angle(hi)?))
}

/// Failure reported to the user, with its exit code.
enum Failure {
    Lib(Error),
    Io(PathBuf, io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Lib(e) => {
                let mut v = json!({ "error": e.kind(), "message": e.to_string() });
                if let Error::SingularRotation { route, theta_r, beta } = e {
                    v["route"] = json!(route);
                    v["theta_r"] = json!(theta_r);
                    v["beta"] = json!(beta);
                }
                v
            }
            Failure::Io(path, e) => json!({
                "error": "Io",
                "message": e.to_string(),
                "path": path.display().to_string(),
            }),
            Failure::Usage(msg) => json!({ "error": "Usage", "message": msg }),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn params(beta: f64, theta_r: f64) -> Result<ProtocolParams, Error> {
    if !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be finite, got {beta}")));
    }
    ProtocolParams::new(beta, theta_r)
}

fn write_to(path: Option<&Path>, body: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io("<stdout>".into(), e))
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

fn run_pdf(args: PdfArgs) -> Outcome {
    let (density, summary) = match &args.replay {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.clone(), e))?;
            let summary = DensitySummary::from_json(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            summary.replay(Execution::Parallel)?
        }
        None => {
            let beta = args.beta.expect("clap enforces --beta without --replay");
            let params = params(beta, args.angle.resolve()?)?;
            let grid = args.grid.grid()?;
            let options = args.grid.options()?;
            if !(args.merge_radius > 0.0) {
                return Err(Error::InvalidInput("--merge-radius must be positive".into()).into());
            }
            let clustering = Clustering {
                top_n: args.top_n,
                merge_radius: args.merge_radius,
            };
            let density = build_density(&grid, params, &options)?;
            let summary = DensitySummary::new(&density, params, grid, &options, clustering);
            (density, summary)
        }
    };
    if args.format == Format::Csv {
        let path = with_extension(&args.out, "csv");
        let file = File::create(&path).map_err(|e| Failure::Io(path.clone(), e))?;
        write_csv(&density, BufWriter::new(file)).map_err(|e| Failure::Io(path.clone(), e))?;
    }
    let path = with_extension(&args.out, "json");
    let mut json = summary.to_json();
    json.push('\n');
    write_to(Some(&path), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn ratio_label(ratio: &PeakRatio) -> String {
    match ratio.quantized() {
        Some(PeakRatio::Infinite) => "inf".into(),
        Some(PeakRatio::Value(r)) if r.norm() == 0.0 => "0".into(),
        Some(PeakRatio::Value(r)) if r.im == 0.0 => format!("{}", r.re),
        Some(PeakRatio::Value(r)) if r.im > 0.0 => "i".into(),
        Some(PeakRatio::Value(_)) => "-i".into(),
        _ => "indeterminate".into(),
    }
}

fn axis_label(axis: VerdictAxis) -> &'static str {
    match axis {
        VerdictAxis::X => "X",
        VerdictAxis::Y => "Y",
        VerdictAxis::Z => "Z",
        VerdictAxis::PlusState => "X+",
        VerdictAxis::MinusState => "X-",
        VerdictAxis::Undetermined => "undetermined",
    }
}

fn run_classify(args: ClassifyArgs) -> Outcome {
    let angle = RationalAngle::new(args.u, args.v)?;
    let class = classify_zero_damping(angle);
    let p = args.beta.map(|b| ProtocolParams::from_rational(b, angle)).transpose()?;
    let mut rows = Vec::new();
    for (ell, verdict) in class.table.iter().enumerate() {
        let k = ell as f64 / angle.hypot();
        let mut row = json!({
            "ell": ell,
            "k": k,
            "axis": axis_label(verdict.axis),
            "sign": verdict.sign,
            "ratio": ratio_label(&verdict.ratio),
        });
        if let Some(p) = p {
            let point = bloch_angles(&coefficients(MeasurementOutcome::from_k(k), p)?)?;
            row["bloch"] = json!(point);
        }
        rows.push(row);
    }
    let body = match args.format {
        Format::Json => pretty(&json!({
            "u": angle.u(),
            "v": angle.v(),
            "theta_r": angle.theta_r(),
            "axis": axis_label(class.axis),
            "rows": rows,
        })),
        Format::Csv => {
            let mut s = String::from("ell,k,axis,sign,ratio\n");
            for (ell, verdict) in class.table.iter().enumerate() {
                let sign = verdict.sign.map(|x| x.to_string()).unwrap_or_default();
                let k = ell as f64 / angle.hypot();
                let _ = writeln!(s, "{ell},{k:.16e},{},{sign},{}", axis_label(verdict.axis), ratio_label(&verdict.ratio));
            }
            s
        }
    };
    write_to(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn run_fidelity(args: FidelityArgs) -> Outcome {
    let params = params(args.beta, args.angle.resolve()?)?;
    let density = build_density(&args.grid.grid()?, params, &args.grid.options()?)?;
    let report = fidelity_report(&density, params, &args.thresholds)?;
    let body = match args.format {
        Format::Json => pretty(&report),
        Format::Csv => {
            let mut s = String::from("threshold,probability\n");
            for t in &report.thresholds {
                let _ = writeln!(s, "{:.16e},{:.16e}", t.threshold, t.probability);
            }
            s
        }
    };
    write_to(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn run_search(args: SearchArgs) -> Outcome {
    let options = args.grid.search_options()?;
    let body = match (args.threshold, args.target_theta, args.target_phi) {
        (Some(f), None, None) => pretty(&search_success_probability(
            args.beta,
            f,
            args.interval,
            args.grid_steps,
            args.refine_iters,
            &options,
        )?),
        (None, Some(theta), Some(phi)) => pretty(&search_theta_r(
            args.beta,
            BlochPoint::new(theta, phi),
            args.interval,
            args.grid_steps,
            args.refine_iters,
            &options,
        )?),
        _ => return Err(Error::InvalidInput("give --target-theta and --target-phi, or --threshold".into()).into()),
    };
    write_to(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn run_trajectory(args: TrajectoryArgs) -> Outcome {
    let options = args.grid.search_options()?;
    let trajectory = trace_trajectory(args.beta, args.interval, args.steps, &options)?;
    let body = match args.format {
        Format::Json => pretty(&trajectory),
        Format::Csv => {
            let mut s = String::from("track,theta_r,theta,phi,mass\n");
            for (t, track) in trajectory.tracks.iter().enumerate() {
                for (sample, peak) in trajectory.samples.iter().zip(track) {
                    let _ = writeln!(
                        s,
                        "{t},{:.16e},{:.16e},{:.16e},{:.16e}",
                        sample.theta_r, peak.point.theta, peak.point.phi, peak.mass
                    );
                }
            }
            s
        }
    };
    write_to(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Outcome {
    if args.cases == 0 {
        return Err(Error::InvalidInput("--cases must be positive".into()).into());
    }
    let reports = verify::run_all(args.cases, &args.grid.grid()?)?;
    write_to(args.out.as_deref(), &pretty(&reports))?;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        eprintln!("{status} {} (max error {:.3e}, tolerance {:.1e})", r.name, r.max_error, r.tolerance);
    }
    Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

#[cfg(feature = "parallel")]
fn cap_threads(n: usize) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn cap_threads(_: usize) -> Result<(), Failure> {
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => cap_threads(n)?,
        None => {}
    }
    match cli.command {
        Command::Pdf(a) => run_pdf(a),
        Command::Classify(a) => run_classify(a),
        Command::Fidelity(a) => run_fidelity(a),
        Command::Search(a) => run_search(a),
        Command::Trajectory(a) => run_trajectory(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", Failure::Usage(e.to_string().trim_end().to_owned()).to_json());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code())
        }
    }
}
