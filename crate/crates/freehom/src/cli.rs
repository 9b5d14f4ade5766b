//! The `freehom` command line.
//!
//! Every invocation resolves to a [`RunConfig`], which can be saved with
//! `--dump-config` and replayed with `--config`. Output files and stdout are
//! byte-identical across reruns of the same config.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation limit exceeded,
//! 3 verification failure.

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freehom_core::correlation::{
    beam_splitter_output, full_state_expansion, g2_closed_form, gn_permanent, OutputDistribution,
};
use freehom_core::dipfinder::{
    canonical_dip, extract_contour_at, GridSpec, DEFAULT_RESOLUTION, DIP_TOLERANCE,
};
use freehom_core::geometry::{
    build_transfer_matrix, phases_from_geometry, Geometry, NormConvention, PhaseConfig,
};
use freehom_core::permanent::{Algorithm, FAST_LIMIT};
use freehom_core::{factorial, Complex64};
use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchOptions};
use crate::format::{self, fmt_f64, write_csv_row, write_json, write_json_file, GridSidecar};
use crate::parallel::{par_permanent, par_scan_grid};
use crate::verify::{self, Fault, VerifyOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] freehom_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use freehom_core::Error as E;
        match self {
            CliError::Compute(E::Limit { .. } | E::DimensionTooLarge { .. }) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "freehom",
    version,
    about = "Free-space N-photon Hong-Ou-Mandel interference simulator"
)]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    /// Run the JSON RunConfig in this file instead of a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved RunConfig as JSON and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Globals {
    /// Output file (output prefix for `contour`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Globals {
    fn overlay(self, cli: &Globals) -> Globals {
        Globals {
            out: cli.out.clone().or(self.out),
            format: cli.format.or(self.format),
            threads: cli.threads.or(self.threads),
            seed: cli.seed.or(self.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Bin,
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub globals: Globals,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Two-photon correlation: closed form next to the permanent route.
    G2(G2Args),
    /// N-photon correlation for one phase configuration.
    Gn(GnArgs),
    /// Scan G over two phases and trace its zero contour.
    Contour(ContourArgs),
    /// Beam-splitter Hong-Ou-Mandel distribution next to the free-space case.
    Bshom,
    /// Run the full self-check suite.
    Verify(VerifyArgs),
    /// Time the permanent algorithms.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct G2Args {
    /// Δφ₁ in radians.
    #[arg(allow_negative_numbers = true)]
    pub dp1: Option<f64>,
    /// Δφ₂ in radians.
    #[arg(allow_negative_numbers = true)]
    pub dp2: Option<f64>,
    /// Sweep Δφ₁ - Δφ₂ over this many points in [0, 2π).
    #[arg(long, conflicts_with_all = ["dp1", "dp2"])]
    pub sweep: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GnArgs {
    /// Comma-separated phases Δφ_m in radians.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phases: Option<Vec<f64>>,
    /// JSON geometry file {n, d, k, angles}.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Use the closed-form dip phases for N photons.
    #[arg(long)]
    pub canonical: Option<usize>,
    #[arg(long, default_value = "ryser")]
    pub alg: Algorithm,
    /// unit, sqrt_modes, or a positive number.
    #[arg(long, default_value = "unit")]
    pub norm: NormConvention,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ContourArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Hold phase I at value V, written I=V (1-based, repeatable). Unlisted phases are 0.
    #[arg(long = "fix", value_parser = parse_fix, allow_negative_numbers = true)]
    pub fix: Vec<(usize, f64)>,
    /// The two scanned phases (1-based).
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub free: Vec<usize>,
    /// Grid points per axis.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub res: usize,
    #[arg(long, default_value = "ryser")]
    pub alg: Algorithm,
    #[arg(long, default_value = "unit")]
    pub norm: NormConvention,
    /// Contour level on G; defaults to (1e-9·N!·c_norm^N)².
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Largest N for the closed-form dip check (at most 30).
    #[arg(long, default_value_t = 14)]
    pub n_max: usize,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultArg {
    RyserSign,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Algorithms to time (comma-separated).
    #[arg(long, value_delimiter = ',', default_values = ["naive", "ryser", "glynn"])]
    pub alg: Vec<Algorithm>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Spread each permanent over the thread pool.
    #[arg(long)]
    pub parallel: bool,
}

fn parse_fix(s: &str) -> Result<(usize, f64), String> {
    let (i, v) = s.split_once('=').ok_or("expected INDEX=VALUE")?;
    let i: usize = i.trim().parse().map_err(|e| format!("bad index: {e}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value: {e}"))?;
    if i == 0 {
        return Err("phase indices start at 1".into());
    }
    if !v.is_finite() {
        return Err("value must be finite".into());
    }
    Ok((i, v))
}

/// Parse `args`, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    match (&cli.config, &cli.command) {
        (Some(_), Some(_)) => Err(usage("give either --config or a subcommand, not both")),
        (None, None) => Err(usage("no subcommand given; see --help")),
        (None, Some(cmd)) => Ok(RunConfig {
            globals: cli.globals.clone(),
            command: cmd.clone(),
        }),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| usage(format!("bad config {}: {e}", path.display())))?;
            Ok(RunConfig {
                globals: cfg.globals.overlay(&cli.globals),
                command: cfg.command,
            })
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    if cli.dump_config {
        write_json(stdout, &cfg)?;
        return Ok(());
    }
    execute(&cfg, stdout)
}

/// Run a resolved configuration.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    // Output is buffered so the work can run on a dedicated pool.
    let mut buf = Vec::new();
    let result = match cfg.globals.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| usage(format!("cannot start thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(cfg, &mut buf))),
        None => dispatch(cfg, &mut buf),
    };
    stdout.write_all(&buf)?;
    stdout.flush()?;
    result
}

fn dispatch(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = &cfg.globals;
    match &cfg.command {
        Command::G2(a) => with_output(g, stdout, |w| cmd_g2(a, g.format.unwrap_or(Format::Csv), w)),
        Command::Gn(a) => with_output(g, stdout, |w| {
            cmd_gn(a, g.format.unwrap_or(Format::Json), w)
        }),
        Command::Contour(a) => cmd_contour(a, g, stdout),
        Command::Bshom => with_output(g, stdout, |w| {
            cmd_bshom(g.format.unwrap_or(Format::Json), w)
        }),
        Command::Verify(a) => with_output(g, stdout, |w| cmd_verify(a, g.seed.unwrap_or(0), w)),
        Command::Bench(a) => with_output(g, stdout, |w| cmd_bench(a, g.seed.unwrap_or(0), w)),
    }
}

fn with_output<F>(g: &Globals, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match &g.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let result = body(&mut w);
            w.flush()?;
            result
        }
        None => body(stdout),
    }
}

fn no_bin(format: Format) -> Result<(), CliError> {
    if format == Format::Bin {
        return Err(usage("--format bin is only available for contour grids"));
    }
    Ok(())
}

#[derive(Serialize)]
struct G2Row {
    dp1: f64,
    dp2: f64,
    g_closed_form: f64,
    g_permanent: f64,
}

fn g2_row(dp1: f64, dp2: f64) -> Result<G2Row, CliError> {
    let phases = PhaseConfig::new(vec![dp1, dp2])?;
    Ok(G2Row {
        dp1,
        dp2,
        g_closed_form: g2_closed_form(dp1, dp2).g_value,
        g_permanent: gn_permanent(&phases, NormConvention::Unit, Algorithm::Ryser)?.g_value,
    })
}

fn cmd_g2(a: &G2Args, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    no_bin(format)?;
    let rows = match (a.dp1, a.dp2, a.sweep) {
        (Some(dp1), Some(dp2), None) => vec![g2_row(dp1, dp2)?],
        (None, None, Some(0)) => return Err(usage("--sweep needs at least one point")),
        (None, None, Some(r)) => (0..r)
            .map(|k| g2_row(TAU * k as f64 / r as f64, 0.0))
            .collect::<Result<_, _>>()?,
        _ => return Err(usage("g2 takes either DP1 DP2 or --sweep R")),
    };
    match format {
        Format::Csv => {
            writeln!(w, "dp1,dp2,g_closed_form,g_permanent")?;
            for r in &rows {
                write_csv_row(w, &[r.dp1, r.dp2, r.g_closed_form, r.g_permanent])?;
            }
        }
        _ if a.sweep.is_some() => write_json(w, &rows)?,
        _ => write_json(w, &rows[0])?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct GnReport {
    pub n: usize,
    pub phases: PhaseConfig,
    pub algorithm: Algorithm,
    pub norm: NormConvention,
    pub c_norm: f64,
    pub g_value: f64,
    pub amplitude: Complex64,
    /// `|perm|/(N!·c_norm^N)`.
    pub normalized_residual: f64,
    pub dip: bool,
}

fn gn_phases(a: &GnArgs) -> Result<PhaseConfig, CliError> {
    match (&a.phases, &a.geometry, a.canonical) {
        (Some(p), None, None) => Ok(PhaseConfig::new(p.clone())?),
        (None, Some(path), None) => {
            let geom: Geometry = serde_json::from_str(&std::fs::read_to_string(path)?)
                .map_err(|e| usage(format!("bad geometry file {}: {e}", path.display())))?;
            Ok(phases_from_geometry(&geom)?)
        }
        (None, None, Some(n)) => Ok(canonical_dip(n)?),
        _ => Err(usage(
            "gn takes exactly one of --phases, --geometry, --canonical",
        )),
    }
}

pub fn evaluate_gn(
    phases: &PhaseConfig,
    alg: Algorithm,
    norm: NormConvention,
) -> Result<GnReport, CliError> {
    let n = phases.n();
    alg.check(n)?;
    let t = build_transfer_matrix(phases, norm)?;
    let amplitude = par_permanent(t.matrix(), alg)?.value;
    let scale = factorial(n) * t.c_norm().powi(n as i32);
    let normalized_residual = amplitude.norm() / scale;
    Ok(GnReport {
        n,
        phases: phases.clone(),
        algorithm: alg,
        norm,
        c_norm: t.c_norm(),
        g_value: amplitude.norm_sqr(),
        amplitude,
        normalized_residual,
        dip: normalized_residual <= DIP_TOLERANCE,
    })
}

fn cmd_gn(a: &GnArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    no_bin(format)?;
    let phases = gn_phases(a)?;
    let report = evaluate_gn(&phases, a.alg, a.norm)?;
    match format {
        Format::Csv => {
            writeln!(
                w,
                "n,algorithm,g_value,amplitude_re,amplitude_im,normalized_residual"
            )?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                report.n,
                report.algorithm,
                fmt_f64(report.g_value),
                fmt_f64(report.amplitude.re),
                fmt_f64(report.amplitude.im),
                fmt_f64(report.normalized_residual)
            )?;
        }
        _ => write_json(w, &report)?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct GridPoint {
    pub i: usize,
    pub j: usize,
    pub row_phase: f64,
    pub col_phase: f64,
    pub g: f64,
}

#[derive(Debug, Serialize)]
pub struct ContourSummary {
    pub grid_file: PathBuf,
    pub contour_file: PathBuf,
    pub resolution: usize,
    pub max: GridPoint,
    pub min: GridPoint,
    pub level: f64,
    pub polylines: usize,
    pub vertices: usize,
    pub max_vertex_g: f64,
    pub verified: bool,
    pub empty: bool,
}

#[derive(Serialize)]
struct GridJson<'a> {
    #[serde(flatten)]
    meta: GridSidecar,
    values: &'a [f64],
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_contour(a: &ContourArgs, g: &Globals, stdout: &mut dyn Write) -> Result<(), CliError> {
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    if a.free.len() != 2 {
        return Err(usage("--free takes exactly two phase indices"));
    }
    let mut template = vec![0.0; a.n];
    for &(i, v) in &a.fix {
        if i > a.n {
            return Err(usage(format!("--fix index {i} exceeds N = {}", a.n)));
        }
        if a.free.contains(&i) {
            return Err(usage(format!("phase {i} cannot be both fixed and scanned")));
        }
        template[i - 1] = v;
    }
    if a.free.iter().any(|&f| f == 0 || f > a.n) {
        return Err(usage(format!("--free indices must lie in 1..={}", a.n)));
    }
    if a.res < 2 {
        return Err(usage("--res must be at least 2"));
    }
    let spec = GridSpec {
        template,
        free: [a.free[0] - 1, a.free[1] - 1],
        ranges: [[0.0, TAU], [0.0, TAU]],
        resolution: a.res,
        algorithm: a.alg,
        norm: a.norm,
    };
    spec.validate()?;

    let grid = par_scan_grid(&spec)?;
    let level = a.level.unwrap_or_else(|| spec.zero_level());
    let contours = extract_contour_at(&grid, level)?;

    let prefix = g.out.clone().unwrap_or_else(|| PathBuf::from("contour"));
    let format = g.format.unwrap_or(Format::Csv);
    let grid_file = match format {
        Format::Csv => {
            let path = with_suffix(&prefix, ".grid.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            format::write_grid_csv(&mut w, &grid)?;
            w.flush()?;
            path
        }
        Format::Bin => {
            let path = with_suffix(&prefix, ".grid.bin");
            let mut w = BufWriter::new(File::create(&path)?);
            format::write_grid_bin(&mut w, &grid)?;
            w.flush()?;
            write_json_file(
                &with_suffix(&prefix, ".grid.meta.json"),
                &GridSidecar::for_spec(&spec),
            )?;
            path
        }
        Format::Json => {
            let path = with_suffix(&prefix, ".grid.json");
            write_json_file(
                &path,
                &GridJson {
                    meta: GridSidecar::for_spec(&spec),
                    values: &grid.values,
                },
            )?;
            path
        }
    };
    let contour_file = with_suffix(&prefix, ".contour.json");
    write_json_file(&contour_file, &contours)?;

    let point = |(i, j, v): (usize, usize, f64)| GridPoint {
        i,
        j,
        row_phase: spec.coordinate(0, i as f64),
        col_phase: spec.coordinate(1, j as f64),
        g: v,
    };
    let summary = ContourSummary {
        grid_file,
        contour_file,
        resolution: spec.resolution,
        max: point(grid.max()),
        min: point(grid.min()),
        level,
        polylines: contours.polylines.len(),
        vertices: contours.vertex_count,
        max_vertex_g: contours.max_vertex_g,
        verified: contours.verified,
        empty: contours.is_empty(),
    };
    write_json(stdout, &summary)?;
    if !contours.verified {
        return Err(CliError::Verification(format!(
            "contour vertex re-evaluated to G = {} above level {level}",
            contours.max_vertex_g
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FreeSpaceHom {
    pub phases: [f64; 2],
    pub g2_closed_form: f64,
    pub g2_permanent: f64,
    /// State expansion of the `1/√2`-normalized free-space matrix.
    pub distribution: OutputDistribution,
}

#[derive(Debug, Serialize)]
pub struct BsHomReport {
    pub beam_splitter: OutputDistribution,
    pub free_space: FreeSpaceHom,
}

pub fn bshom_report() -> Result<BsHomReport, CliError> {
    let beam_splitter = beam_splitter_output(&[1, 1])?;
    let phases = PhaseConfig::new(vec![0.0, PI])?;
    let t = build_transfer_matrix(&phases, NormConvention::SqrtModes)?;
    Ok(BsHomReport {
        beam_splitter,
        free_space: FreeSpaceHom {
            phases: [0.0, PI],
            g2_closed_form: g2_closed_form(0.0, PI).g_value,
            g2_permanent: gn_permanent(&phases, NormConvention::Unit, Algorithm::Ryser)?.g_value,
            distribution: full_state_expansion(t.matrix())?,
        },
    })
}

fn cmd_bshom(format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    no_bin(format)?;
    let report = bshom_report()?;
    match format {
        Format::Csv => {
            writeln!(w, "pattern,beam_splitter_weight,free_space_weight")?;
            for e in &report.beam_splitter.entries {
                let counts = e.pattern.counts();
                let label = counts
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join("-");
                writeln!(
                    w,
                    "{label},{},{}",
                    fmt_f64(e.weight),
                    fmt_f64(report.free_space.distribution.weight(counts))
                )?;
            }
        }
        _ => write_json(w, &report)?,
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, seed: u64, w: &mut dyn Write) -> Result<(), CliError> {
    if !(2..=FAST_LIMIT).contains(&a.n_max) {
        return Err(usage(format!("--n-max must lie in 2..={FAST_LIMIT}")));
    }
    let report = verify::run(&VerifyOptions {
        n_max: a.n_max,
        seed,
        fault: a.inject_fault.map(|FaultArg::RyserSign| Fault::RyserSign),
    })?;
    write_json(w, &report)?;
    if !report.pass {
        return Err(CliError::Verification(
            report.failed().collect::<Vec<_>>().join(", "),
        ));
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, seed: u64, w: &mut dyn Write) -> Result<(), CliError> {
    let rows = bench::run(&BenchOptions {
        n_min: a.n_min,
        n_max: a.n_max,
        algorithms: a.alg.clone(),
        reps: a.reps,
        seed,
        parallel: a.parallel,
    })?;
    bench::write_csv(w, &rows)?;
    Ok(())
}
