//! Command-line front end: `simulate`, `compare`, `replay`, `export`,
//! `analyze` and `serve`.
//!
//! Exit codes: 0 success, 2 usage, 3 data or contract error, 4 internal.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::brush::{build_ribbon, BrushKind, RibbonStrip, DEFAULT_EPSILON, DEFAULT_WIDTH};
use crate::error::{Error, Result};
use crate::io::{read_events, read_poses, split_strokes, write_poses};
use crate::metrics::{
    accuracy_report_with, read_metrics_csv, wrist_effort, write_metrics_csv, AccuracyOptions, EffortReport,
    EffortWeights, MetricsRow, DEFAULT_COVERAGE_SEED,
};
use crate::obj::to_obj;
use crate::planner::{coverage_plan, plan_to_poses, DEFAULT_OVERLAP, DEFAULT_SPEED};
use crate::session::{Session, SessionConfig};
use crate::stats::{paired_by_measure, paired_t, read_observations, read_summary_tuples, PairedSummary};
use crate::surface::{parse_key_values, ReferenceSurface, SurfaceKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ribbon-brush", version, about = "Ribbon brush simulator, metrics and statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan coverage strokes on a surface, build ribbons and measure them.
    Simulate(RunArgs),
    /// Per-shape differences (strip − normal) and paired tests across shapes.
    Compare(CompareArgs),
    /// Rebuild a session from an event log or saved session.
    Replay(FileArgs),
    /// Export ribbons as OBJ from a pose stream or a saved session.
    Export(FileArgs),
    /// Paired tests from raw observations or published summary tuples.
    Analyze(AnalyzeArgs),
    /// Run the websocket service for the drawing sandbox.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BrushChoice {
    Normal,
    Strip,
    Both,
}

impl BrushChoice {
    fn kinds(self) -> Vec<BrushKind> {
        match self {
            BrushChoice::Normal => vec![BrushKind::Normal],
            BrushChoice::Strip => vec![BrushKind::Strip],
            BrushChoice::Both => BrushKind::ALL.to_vec(),
        }
    }
}

/// Options shared by the commands that build ribbons.
#[derive(Debug, Clone, Default, Args)]
pub struct KernelArgs {
    /// Brush model.
    #[arg(long, value_enum)]
    pub brush: Option<BrushChoice>,
    /// Ribbon width in meters.
    #[arg(long)]
    pub width: Option<f64>,
    /// Resample distance in meters.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Key=value configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Reference surface name, or `all` for every registry surface.
    #[arg(long)]
    pub surface: Option<String>,
    /// Surface parameter override, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Effort weights `pitch,yaw,roll`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Distance between stroke centre lines (sets overlap = 1 − spacing/width).
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Overlap of neighbouring ribbons as a fraction of the width.
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Seed of the coverage sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Drawing speed in m/s.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// One metrics CSV holding both brushes, or two CSVs (normal, strip).
    pub inputs: Vec<PathBuf>,
    /// Published `measure,mean_diff,std,n` tuples instead of metrics.
    #[arg(long)]
    pub from_summary: Option<PathBuf>,
    /// Write `compare.csv` into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FileArgs {
    /// Event log (.jsonl), saved session (.json) or, for export, a pose stream.
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Output file or directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Observations CSV: participant,shape,tool,measure,value.
    pub input: Option<PathBuf>,
    /// Published `measure,mean_diff,std,n` tuples.
    #[arg(long)]
    pub from_summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub port: Option<u16>,
    /// Directory with the sandbox UI bundle.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let configs = if a.surface.as_deref() == Some("all") {
                SurfaceKind::ALL
                    .iter()
                    .map(|k| RunConfig::resolve(&RunArgs { surface: Some(k.to_string()), ..a.clone() }))
                    .collect::<Result<Vec<_>>>()?
            } else {
                vec![RunConfig::resolve(&a)?]
            };
            cmd_simulate(&configs, out)
        }
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Replay(a) => cmd_replay(&a, out),
        Command::Export(a) => cmd_export(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Serve(a) => cmd_serve(&a, out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::contract(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| usage(format!("bad value for {key}: `{v}` ({e})")))
}

/// Fully resolved settings of a `simulate` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: ReferenceSurface,
    pub surface_name: String,
    pub brushes: Vec<BrushKind>,
    pub width: f64,
    pub epsilon: f64,
    pub weights: EffortWeights,
    pub overlap: f64,
    pub speed: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Settings read from a key=value file, kept as strings until merged.
fn load_config_file(path: Option<&PathBuf>) -> Result<BTreeMap<String, String>> {
    match path {
        Some(p) => parse_key_values(&read_text(p)?, &p.display().to_string()),
        None => Ok(BTreeMap::new()),
    }
}

fn kernel_settings(k: &KernelArgs, file: &mut BTreeMap<String, String>) -> Result<(Option<BrushChoice>, f64, f64)> {
    let brush = match (k.brush, file.remove("brush")) {
        (Some(b), _) => Some(b),
        (None, Some(s)) => Some(BrushChoice::from_str(&s, true).map_err(|_| usage(format!("unknown brush `{s}`")))?),
        (None, None) => None,
    };
    let width = match (k.width, file.remove("width")) {
        (Some(w), _) => w,
        (None, Some(s)) => parse_num("width", &s)?,
        _ => DEFAULT_WIDTH,
    };
    let epsilon = match (k.epsilon, file.remove("epsilon")) {
        (Some(e), _) => e,
        (None, Some(s)) => parse_num("epsilon", &s)?,
        _ => DEFAULT_EPSILON,
    };
    if !(width > 0.0) || !(epsilon >= 0.0) {
        return Err(usage(format!("width must be > 0 and epsilon ≥ 0 (got {width}, {epsilon})")));
    }
    Ok((brush, width, epsilon))
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn resolve(a: &RunArgs) -> Result<RunConfig> {
        let mut file = load_config_file(a.kernel.config.as_ref())?;
        let (brush, width, epsilon) = kernel_settings(&a.kernel, &mut file)?;
        let surface_name = a
            .surface
            .clone()
            .or_else(|| file.remove("surface"))
            .ok_or_else(|| usage("--surface is required"))?;
        file.remove("surface");
        let weights = match a.weights.clone().or_else(|| file.remove("weights")) {
            Some(w) => w.parse()?,
            None => EffortWeights::default(),
        };
        let spacing = match (a.spacing, file.remove("spacing")) {
            (Some(s), _) => Some(s),
            (None, Some(s)) => Some(parse_num("spacing", &s)?),
            _ => None,
        };
        let overlap_setting = match (a.overlap, file.remove("overlap")) {
            (Some(o), _) => Some(o),
            (None, Some(s)) => Some(parse_num("overlap", &s)?),
            _ => None,
        };
        let overlap = match (spacing, overlap_setting) {
            (Some(_), Some(_)) if a.spacing.is_some() && a.overlap.is_some() => {
                return Err(usage("--spacing and --overlap are mutually exclusive"))
            }
            (Some(s), _) if a.spacing.is_some() || a.overlap.is_none() => 1.0 - s / width,
            (_, Some(o)) => o,
            _ => DEFAULT_OVERLAP,
        };
        if !(0.0..1.0).contains(&overlap) {
            return Err(usage(format!("overlap must be in [0, 1) (spacing must be in (0, width]), got {overlap}")));
        }
        let seed = match (a.seed, file.remove("seed")) {
            (Some(s), _) => s,
            (None, Some(s)) => parse_num("seed", &s)?,
            _ => DEFAULT_COVERAGE_SEED,
        };
        let speed = match (a.speed, file.remove("speed")) {
            (Some(s), _) => s,
            (None, Some(s)) => parse_num("speed", &s)?,
            _ => DEFAULT_SPEED,
        };
        let out = a.out.clone().or_else(|| file.remove("out").map(PathBuf::from));
        file.remove("port");

        // Remaining file keys are surface parameters; --param overrides them.
        let mut params = BTreeMap::new();
        for (k, v) in &file {
            params.insert(k.clone(), parse_num::<f64>(k, v)?);
        }
        for p in &a.params {
            let (k, v) = p.split_once('=').ok_or_else(|| usage(format!("--param expects K=V, got `{p}`")))?;
            params.insert(k.trim().to_string(), parse_num::<f64>(k, v.trim())?);
        }
        let surface = ReferenceSurface::from_name(&surface_name, &params).map_err(|e| match e {
            Error::Contract(m) => usage(m),
            other => other,
        })?;
        Ok(RunConfig {
            surface_name: surface.kind().to_string(),
            surface,
            brushes: brush.unwrap_or(BrushChoice::Strip).kinds(),
            width,
            epsilon,
            weights,
            overlap,
            speed,
            seed,
            out,
        })
    }
}

/// Result of simulating one brush on one surface.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub brush: BrushKind,
    pub strokes: Vec<Vec<crate::geometry::Pose>>,
    pub ribbons: Vec<RibbonStrip>,
    pub row: MetricsRow,
}

pub fn simulate(cfg: &RunConfig, brush: BrushKind) -> Result<Simulation> {
    let plan = coverage_plan(&cfg.surface, brush, cfg.width, cfg.overlap)?;
    let planned = plan_to_poses(&plan, cfg.speed, &cfg.weights)?;
    let mut effort = EffortReport::zero(cfg.weights);
    let mut ribbons = Vec::new();
    for s in &planned.strokes {
        if s.len() >= 2 {
            effort = effort.combine(&wrist_effort(s, cfg.weights)?);
        }
        ribbons.push(build_ribbon(s, brush, cfg.width, cfg.epsilon)?);
    }
    let drawn: Vec<RibbonStrip> = ribbons.iter().filter(|r| r.quad_count() > 0).cloned().collect();
    let opts = AccuracyOptions { seed: cfg.seed, ..AccuracyOptions::new(cfg.width / 2.0) };
    let accuracy = accuracy_report_with(&drawn, &cfg.surface, &opts)?;
    // Synthetic drawing time, so reruns stay byte-identical.
    let runtime = match (planned.strokes.first().and_then(|s| s.first()), planned.strokes.last().and_then(|s| s.last())) {
        (Some(a), Some(b)) => b.timestamp - a.timestamp,
        _ => 0.0,
    };
    let row = MetricsRow::new(&cfg.surface_name, brush.as_str(), &accuracy, &effort, planned.strokes.len(), 0, runtime);
    Ok(Simulation { brush, strokes: planned.strokes, ribbons, row })
}

fn cmd_simulate(configs: &[RunConfig], out: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    for (cfg, &brush) in configs.iter().flat_map(|c| c.brushes.iter().map(move |b| (c, b))) {
        let sim = simulate(cfg, brush)?;
        if let Some(dir) = &cfg.out {
            let tag = format!("{}_{}", cfg.surface_name, brush);
            for (i, s) in sim.strokes.iter().enumerate() {
                write_text(&dir.join(format!("{tag}_poses")).join(format!("stroke_{i:04}.jsonl")), &write_poses(s))?;
            }
            write_text(&dir.join(format!("{tag}.obj")), &to_obj(&sim.ribbons))?;
        }
        let r = &sim.row;
        writeln!(
            out,
            "{} {}: {} strokes, mean_dist {:.3e} m, coverage {:.4}, pitch {:.2}° yaw {:.2}° roll {:.2}°, weighted {:.4}",
            r.shape,
            r.brush,
            r.stroke_count,
            r.mean_dist,
            r.coverage,
            r.pitch.to_degrees(),
            r.yaw.to_degrees(),
            r.roll.to_degrees(),
            r.weighted_total
        )?;
        rows.push(sim.row);
    }
    if let Some(dir) = configs.first().and_then(|c| c.out.as_ref()) {
        fs::create_dir_all(dir)?;
        write_metrics_csv(fs::File::create(dir.join("metrics.csv"))?, &rows)?;
    }
    Ok(())
}

const METRIC_COLUMNS: [&str; 13] = [
    "mean_dist",
    "rms_dist",
    "max_dist",
    "mean_normal_dev",
    "max_normal_dev",
    "coverage",
    "pitch",
    "yaw",
    "roll",
    "weighted_total",
    "stroke_count",
    "correction_count",
    "runtime_s",
];

fn metric(r: &MetricsRow, col: &str) -> f64 {
    match col {
        "mean_dist" => r.mean_dist,
        "rms_dist" => r.rms_dist,
        "max_dist" => r.max_dist,
        "mean_normal_dev" => r.mean_normal_dev,
        "max_normal_dev" => r.max_normal_dev,
        "coverage" => r.coverage,
        "pitch" => r.pitch,
        "yaw" => r.yaw,
        "roll" => r.roll,
        "weighted_total" => r.weighted_total,
        "stroke_count" => r.stroke_count as f64,
        "correction_count" => r.correction_count as f64,
        _ => r.runtime_s,
    }
}

/// One line of the comparison: a shape's difference or a paired summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub diffs: BTreeMap<String, BTreeMap<&'static str, f64>>,
    pub summaries: BTreeMap<&'static str, PairedSummary>,
}

/// Per-shape `strip − normal` differences of every metric column.
pub fn compare_rows(rows: &[MetricsRow]) -> Result<Comparison> {
    let mut by_brush: BTreeMap<&str, BTreeMap<&str, &MetricsRow>> = BTreeMap::new();
    for r in rows {
        if by_brush.entry(&r.brush).or_default().insert(&r.shape, r).is_some() {
            return Err(Error::contract(format!("duplicate row for {} / {}", r.shape, r.brush)));
        }
    }
    let (Some(normal), Some(strip)) = (by_brush.get("normal"), by_brush.get("strip")) else {
        return Err(Error::contract("comparison needs rows for both normal and strip brushes"));
    };
    let a: Vec<_> = normal.keys().collect();
    let b: Vec<_> = strip.keys().collect();
    if a != b {
        return Err(Error::contract(format!("shape sets differ: normal {a:?} vs strip {b:?}")));
    }
    let mut diffs = BTreeMap::new();
    for (shape, n) in normal {
        let s = strip[shape];
        diffs.insert(shape.to_string(), METRIC_COLUMNS.iter().map(|c| (*c, metric(s, c) - metric(n, c))).collect());
    }
    let mut summaries = BTreeMap::new();
    if diffs.len() >= 2 {
        for c in METRIC_COLUMNS {
            let d: Vec<f64> = diffs.values().map(|m: &BTreeMap<&str, f64>| m[c]).collect();
            summaries.insert(c, paired_t(&d)?);
        }
    }
    Ok(Comparison { diffs, summaries })
}

fn write_summary(out: &mut dyn Write, label: &str, s: &PairedSummary) -> Result<()> {
    writeln!(
        out,
        "{label}: n={} diff={:.4} std={:.4} t={:.3} p={:.4} (one-tailed) CI=({:.3}, {:.3})",
        s.n, s.mean_diff, s.std_diff, s.t, s.p_one_tailed, s.ci95.0, s.ci95.1
    )?;
    Ok(())
}

fn summary_tuples(path: &Path, out: &mut dyn Write) -> Result<()> {
    for t in read_summary_tuples(&read_text(path)?, &path.display().to_string())? {
        write_summary(out, &t.measure, &PairedSummary::from_summary(t.mean_diff, t.std, t.n)?)?;
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(p) = &a.from_summary {
        return summary_tuples(p, out);
    }
    let mut rows = Vec::new();
    match a.inputs.len() {
        1 | 2 => {
            for p in &a.inputs {
                rows.extend(read_metrics_csv(&read_text(p)?, &p.display().to_string())?);
            }
        }
        _ => return Err(usage("compare takes one or two metrics CSVs, or --from-summary")),
    }
    let cmp = compare_rows(&rows)?;
    let mut csv_text = format!("shape,{}\n", METRIC_COLUMNS.join(","));
    for (shape, d) in &cmp.diffs {
        writeln!(out, "{shape}: weighted_total {:+.4}, yaw {:+.4}, mean_dist {:+.3e}", d["weighted_total"], d["yaw"], d["mean_dist"])?;
        let vals: Vec<String> = METRIC_COLUMNS.iter().map(|c| d[c].to_string()).collect();
        csv_text.push_str(&format!("{shape},{}\n", vals.join(",")));
    }
    for (c, s) in &cmp.summaries {
        write_summary(out, c, s)?;
    }
    if let Some(dir) = &a.out {
        write_text(&dir.join("compare.csv"), &csv_text)?;
    }
    Ok(())
}

fn session_config(k: &KernelArgs) -> Result<SessionConfig> {
    let mut file = load_config_file(k.config.as_ref())?;
    let (brush, width, epsilon) = kernel_settings(k, &mut file)?;
    let brush = match brush {
        None | Some(BrushChoice::Strip) => BrushKind::Strip,
        Some(BrushChoice::Normal) => BrushKind::Normal,
        Some(BrushChoice::Both) => return Err(usage("a session uses one brush at a time")),
    };
    Ok(SessionConfig { brush, width, epsilon })
}

fn load_session(path: &Path, k: &KernelArgs) -> Result<Session> {
    let text = read_text(path)?;
    let name = path.display().to_string();
    if path.extension().is_some_and(|e| e == "json") {
        Session::load(&text, &name)
    } else {
        Session::replay(session_config(k)?, read_events(&text, &name)?)
    }
}

fn cmd_replay(a: &FileArgs, out: &mut dyn Write) -> Result<()> {
    let s = load_session(&a.input, &a.kernel)?;
    writeln!(
        out,
        "strokes {} corrections {} elapsed {:.3} s digest {}",
        s.strokes().len(),
        s.correction_count(),
        s.elapsed(),
        s.digest()
    )?;
    if let Some(dir) = &a.out {
        write_text(&dir.join("session.json"), &s.save())?;
        write_text(&dir.join("drawing.obj"), &to_obj(s.ribbons()))?;
    }
    Ok(())
}

/// Ribbons of every stroke in a pose stream.
pub fn ribbons_from_poses(poses: &[crate::geometry::Pose], cfg: &SessionConfig) -> Result<Vec<RibbonStrip>> {
    split_strokes(poses).into_iter().map(|s| build_ribbon(s, cfg.brush, cfg.width, cfg.epsilon)).collect()
}

fn cmd_export(a: &FileArgs, out: &mut dyn Write) -> Result<()> {
    let name = a.input.display().to_string();
    let obj = match a.input.extension().and_then(|e| e.to_str()) {
        Some("json") => to_obj(Session::load(&read_text(&a.input)?, &name)?.ribbons()),
        _ => {
            let cfg = session_config(&a.kernel)?;
            let text = read_text(&a.input)?;
            // Event logs and pose streams share the extension; events carry a type tag.
            let is_events = text.lines().find(|l| !l.trim().is_empty()).is_some_and(|l| l.contains("\"type\""));
            if is_events {
                to_obj(Session::replay(cfg, read_events(&text, &name)?)?.ribbons())
            } else {
                to_obj(&ribbons_from_poses(&read_poses(&text, &name)?, &cfg)?)
            }
        }
    };
    match &a.out {
        Some(p) => write_text(p, &obj),
        None => Ok(out.write_all(obj.as_bytes())?),
    }
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    match (&a.input, &a.from_summary) {
        (_, Some(p)) => summary_tuples(p, out),
        (Some(p), None) => {
            let obs = read_observations(&read_text(p)?, &p.display().to_string())?;
            for (measure, (a, b, s)) in paired_by_measure(&obs)? {
                write_summary(out, &format!("{measure} ({b} − {a})"), &s)?;
            }
            Ok(())
        }
        (None, None) => Err(usage("analyze needs an observations CSV or --from-summary")),
    }
}

fn cmd_serve(a: &ServeArgs, out: &mut dyn Write) -> Result<()> {
    let mut file = load_config_file(a.kernel.config.as_ref())?;
    let port = match (a.port, file.remove("port")) {
        (Some(p), _) => p,
        (None, Some(s)) => parse_num("port", &s)?,
        _ => 8765,
    };
    let session = session_config(&a.kernel)?;
    let opts = crate::service::server::ServerOptions { session, static_dir: a.static_dir.clone() };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        crate::service::server::serve(listener, opts).await
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunArgs {
        match Cli::try_parse_from(std::iter::once("ribbon-brush").chain(args.iter().copied())).unwrap().command {
            Command::Simulate(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "surface = torus\nwidth=0.05\nminor = 0.1\n# note\nbrush=normal\n").unwrap();
        let c = cfg.to_str().unwrap();
        let r = RunConfig::resolve(&parse(&["simulate", "--config", c, "--width", "0.04"])).unwrap();
        assert_eq!(r.width, 0.04);
        assert_eq!(r.brushes, vec![BrushKind::Normal]);
        assert_eq!(r.surface.shape, crate::surface::Shape::Torus { major: 0.35, minor: 0.1 });
        assert_eq!(r.epsilon, DEFAULT_EPSILON);
        let r = RunConfig::resolve(&parse(&["simulate", "--config", c, "--param", "minor=0.05", "--surface", "torus"])).unwrap();
        assert_eq!(r.surface.shape, crate::surface::Shape::Torus { major: 0.35, minor: 0.05 });
    }

    #[test]
    fn spacing_sets_overlap() {
        let r = RunConfig::resolve(&parse(&["simulate", "--surface", "square", "--width", "0.1", "--spacing", "0.075"])).unwrap();
        assert!((r.overlap - 0.25).abs() < 1e-12);
        let e = RunConfig::resolve(&parse(&["simulate", "--surface", "square", "--spacing", "1"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
        let e = RunConfig::resolve(&parse(&["simulate", "--surface", "blob"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
    }

    #[test]
    fn compare_self_is_zero() {
        let row = |shape: &str, brush: &str, w: f64| MetricsRow {
            shape: shape.into(),
            brush: brush.into(),
            mean_dist: 0.0,
            rms_dist: 0.0,
            max_dist: 0.0,
            mean_normal_dev: 0.0,
            max_normal_dev: 0.0,
            coverage: 1.0,
            pitch: w,
            yaw: 0.0,
            roll: 0.0,
            weighted_total: w,
            stroke_count: 1,
            correction_count: 0,
            runtime_s: 1.0,
        };
        let rows = vec![row("a", "normal", 1.0), row("a", "strip", 1.0), row("b", "normal", 2.0), row("b", "strip", 2.0)];
        let c = compare_rows(&rows).unwrap();
        assert!(c.diffs.values().all(|d| d.values().all(|v| *v == 0.0)));
        let s = c.summaries["weighted_total"];
        assert_eq!((s.t, s.p_one_tailed), (0.0, 0.5));
        assert!(compare_rows(&rows[..3]).is_err());
    }
}
