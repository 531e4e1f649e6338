//! Batch experiment driver: argument/config-file resolution, experiment
//! execution, and deterministic CSV output.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Parser;

use crate::basis::Basis;
use crate::dg::Mesh1D;
use crate::diagnostics::{blowup_scan, burgers_smooth_exact, convergence_study, EntropyTrace};
use crate::driver::{
    ic_rarefaction, ic_sine_shock, ic_smooth, run_dg, snapshot_points, DgRunConfig, DgRunResult,
    DgScheme,
};
use crate::error::SolverError;
use crate::fv::fv_solve;
use crate::law::{Burgers, NumericalFlux};

/// Exit code on success.
pub const EXIT_OK: i32 = 0;
/// Exit code on usage or configuration errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit code when a simulation blows up.
pub const EXIT_BLOWUP: i32 = 2;
/// Exit code on I/O failures.
pub const EXIT_IO: i32 = 3;

/// Which batch experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// One solver run with solution snapshots.
    Run,
    /// Grid-refinement study with error norms and convergence orders.
    Converge,
    /// Per-cell entropy-inequality residuals over a corrected run.
    Entropy,
    /// Total-entropy comparison of the corrected schemes against a fine
    /// Godunov reference.
    Dafermos,
    /// Stability scan over orders, grids, and CFL numbers.
    Blowup,
}

impl Experiment {
    fn from_str(s: &str) -> Result<Experiment, String> {
        match s {
            "run" => Ok(Experiment::Run),
            "converge" => Ok(Experiment::Converge),
            "entropy" => Ok(Experiment::Entropy),
            "dafermos" => Ok(Experiment::Dafermos),
            "blowup" => Ok(Experiment::Blowup),
            other => Err(format!(
                "unknown experiment '{other}' (expected run, converge, entropy, dafermos, or blowup)"
            )),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Converge => "converge",
            Experiment::Entropy => "entropy",
            Experiment::Dafermos => "dafermos",
            Experiment::Blowup => "blowup",
        }
    }
}

/// Solver selection exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Ddg,
    Drkdg,
    Godunov,
    VanillaDg,
}

impl SchemeChoice {
    fn from_str(s: &str) -> Result<SchemeChoice, String> {
        match s {
            "ddg" => Ok(SchemeChoice::Ddg),
            "drkdg" => Ok(SchemeChoice::Drkdg),
            "godunov" => Ok(SchemeChoice::Godunov),
            "vanilla-dg" => Ok(SchemeChoice::VanillaDg),
            other => Err(format!(
                "unknown scheme '{other}' (expected ddg, drkdg, godunov, or vanilla-dg)"
            )),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            SchemeChoice::Ddg => "ddg",
            SchemeChoice::Drkdg => "drkdg",
            SchemeChoice::Godunov => "godunov",
            SchemeChoice::VanillaDg => "vanilla-dg",
        }
    }

    fn dg_scheme(self) -> Option<DgScheme> {
        match self {
            SchemeChoice::Ddg => Some(DgScheme::RhsCorrected),
            SchemeChoice::Drkdg => Some(DgScheme::StepCorrected),
            SchemeChoice::VanillaDg => Some(DgScheme::Vanilla),
            SchemeChoice::Godunov => None,
        }
    }
}

/// Initial-condition selection exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcChoice {
    SineShock,
    Rarefaction,
    Smooth,
}

impl IcChoice {
    fn from_str(s: &str) -> Result<IcChoice, String> {
        match s {
            "sine-shock" => Ok(IcChoice::SineShock),
            "rarefaction" => Ok(IcChoice::Rarefaction),
            "smooth" => Ok(IcChoice::Smooth),
            other => Err(format!(
                "unknown initial condition '{other}' (expected sine-shock, rarefaction, or smooth)"
            )),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            IcChoice::SineShock => "sine-shock",
            IcChoice::Rarefaction => "rarefaction",
            IcChoice::Smooth => "smooth",
        }
    }

    /// The initial profile as a plain function.
    pub fn profile(self) -> fn(f64) -> f64 {
        match self {
            IcChoice::SineShock => ic_sine_shock,
            IcChoice::Rarefaction => ic_rarefaction,
            IcChoice::Smooth => ic_smooth,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dafermos-dg",
    about = "Batch experiments for an entropy-rate corrected DG solver",
    disable_help_subcommand = true
)]
struct CliArgs {
    /// Experiment: run, converge, entropy, dafermos, or blowup.
    experiment: String,
    /// Solver: ddg, drkdg, godunov, or vanilla-dg.
    #[arg(long)]
    scheme: Option<String>,
    /// Initial condition: sine-shock, rarefaction, or smooth.
    #[arg(long)]
    ic: Option<String>,
    /// Polynomial order per cell.
    #[arg(long)]
    p: Option<usize>,
    /// Number of mesh cells.
    #[arg(long)]
    n: Option<usize>,
    /// CFL number.
    #[arg(long)]
    cfl: Option<f64>,
    /// Final simulation time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output CSV path (default: <experiment>.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plain-text config file with one `key = value` per line.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Snapshot times for the run experiment, comma separated.
    #[arg(long = "output-times", value_delimiter = ',')]
    output_times: Option<Vec<f64>>,
}

/// Values read from a config file or flags before defaults are applied.
#[derive(Debug, Default, Clone)]
struct Overlay {
    scheme: Option<String>,
    ic: Option<String>,
    p: Option<usize>,
    n: Option<usize>,
    cfl: Option<f64>,
    t_end: Option<f64>,
    out: Option<PathBuf>,
    output_times: Option<Vec<f64>>,
    p_list: Option<Vec<usize>>,
    n_list: Option<Vec<usize>>,
    cfl_list: Option<Vec<f64>>,
    godunov_n: Option<usize>,
}

/// Fully resolved experiment configuration (flags > config file > defaults).
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub scheme: SchemeChoice,
    pub ic: IcChoice,
    pub order: usize,
    pub n_cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    pub out_path: PathBuf,
    pub p_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub cfl_list: Vec<f64>,
    pub godunov_n: usize,
}

/// Failure modes of resolution and execution, tagged with their exit code.
#[derive(Debug)]
pub enum CliFailure {
    Usage(String),
    Io(String),
    Solver(SolverError),
}

impl CliFailure {
    fn exit_code(&self) -> i32 {
        match self {
            CliFailure::Usage(_) => EXIT_USAGE,
            CliFailure::Io(_) => EXIT_IO,
            CliFailure::Solver(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> String {
        match self {
            CliFailure::Usage(m) => m.clone(),
            CliFailure::Io(m) => m.clone(),
            CliFailure::Solver(e) => e.to_string(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>, String> {
    raw.split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| format!("invalid value '{}' in list for key '{key}'", item.trim()))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, String> {
    raw.parse::<T>()
        .map_err(|_| format!("invalid value '{raw}' for key '{key}'"))
}

fn parse_config_file(text: &str) -> Result<Overlay, String> {
    let mut overlay = Overlay::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "malformed config line {}: expected 'key = value', got '{raw_line}'",
                idx + 1
            ));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "scheme" => overlay.scheme = Some(value.to_string()),
            "ic" => overlay.ic = Some(value.to_string()),
            "p" => overlay.p = Some(parse_scalar(key, value)?),
            "n" => overlay.n = Some(parse_scalar(key, value)?),
            "cfl" => overlay.cfl = Some(parse_scalar(key, value)?),
            "t_end" => overlay.t_end = Some(parse_scalar(key, value)?),
            "out" => overlay.out = Some(PathBuf::from(value)),
            "output_times" => overlay.output_times = Some(parse_list(key, value)?),
            "p_list" => overlay.p_list = Some(parse_list(key, value)?),
            "n_list" => overlay.n_list = Some(parse_list(key, value)?),
            "cfl_list" => overlay.cfl_list = Some(parse_list(key, value)?),
            "godunov_n" => overlay.godunov_n = Some(parse_scalar(key, value)?),
            other => return Err(format!("unknown config key '{other}'")),
        }
    }
    Ok(overlay)
}

fn merge(flags: Overlay, file: Overlay) -> Overlay {
    Overlay {
        scheme: flags.scheme.or(file.scheme),
        ic: flags.ic.or(file.ic),
        p: flags.p.or(file.p),
        n: flags.n.or(file.n),
        cfl: flags.cfl.or(file.cfl),
        t_end: flags.t_end.or(file.t_end),
        out: flags.out.or(file.out),
        output_times: flags.output_times.or(file.output_times),
        p_list: flags.p_list.or(file.p_list),
        n_list: flags.n_list.or(file.n_list),
        cfl_list: flags.cfl_list.or(file.cfl_list),
        godunov_n: flags.godunov_n.or(file.godunov_n),
    }
}

fn resolve(args: &CliArgs) -> Result<ResolvedConfig, CliFailure> {
    let experiment = Experiment::from_str(&args.experiment).map_err(CliFailure::Usage)?;

    let file_overlay = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliFailure::Io(format!("cannot read config file {}: {e}", path.display()))
            })?;
            parse_config_file(&text).map_err(CliFailure::Usage)?
        }
        None => Overlay::default(),
    };
    let flag_overlay = Overlay {
        scheme: args.scheme.clone(),
        ic: args.ic.clone(),
        p: args.p,
        n: args.n,
        cfl: args.cfl,
        t_end: args.t_end,
        out: args.out.clone(),
        output_times: args.output_times.clone(),
        p_list: None,
        n_list: None,
        cfl_list: None,
        godunov_n: None,
    };
    let overlay = merge(flag_overlay, file_overlay);

    let default_ic = match experiment {
        Experiment::Converge => IcChoice::Smooth,
        _ => IcChoice::SineShock,
    };
    let default_n = match experiment {
        Experiment::Dafermos => 50,
        _ => 20,
    };
    let default_t_end = match experiment {
        Experiment::Converge => 8.0,
        _ => 1.0,
    };

    let scheme = match &overlay.scheme {
        Some(s) => SchemeChoice::from_str(s).map_err(CliFailure::Usage)?,
        None => SchemeChoice::Ddg,
    };
    let ic = match &overlay.ic {
        Some(s) => IcChoice::from_str(s).map_err(CliFailure::Usage)?,
        None => default_ic,
    };
    let order = overlay.p.unwrap_or(6);
    let n_cells = overlay.n.unwrap_or(default_n);
    let cfl = overlay.cfl.unwrap_or(0.5);
    let t_end = overlay.t_end.unwrap_or(default_t_end);
    let out_path = overlay
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.as_str())));

    if order == 0 {
        return Err(CliFailure::Usage(
            "invalid p: the polynomial order must be at least 1".to_string(),
        ));
    }
    if n_cells == 0 {
        return Err(CliFailure::Usage(
            "invalid n: the cell count must be at least 1".to_string(),
        ));
    }
    if !(cfl.is_finite() && cfl > 0.0) {
        return Err(CliFailure::Usage(format!(
            "invalid cfl: must be positive and finite, got {cfl}"
        )));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliFailure::Usage(format!(
            "invalid t_end: must be nonnegative and finite, got {t_end}"
        )));
    }

    let output_times = match (&overlay.output_times, experiment) {
        (Some(times), Experiment::Run) => {
            let mut ts: Vec<f64> = times
                .iter()
                .copied()
                .filter(|&t| t.is_finite() && t >= 0.0 && t <= t_end)
                .chain(std::iter::once(t_end))
                .collect();
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts.dedup();
            ts
        }
        (Some(_), _) => {
            return Err(CliFailure::Usage(
                "output_times is only accepted by the run experiment".to_string(),
            ));
        }
        (None, Experiment::Run) => {
            let mut ts: Vec<f64> = [0.25, 0.5, 1.0]
                .into_iter()
                .filter(|&t| t <= t_end)
                .chain(std::iter::once(t_end))
                .collect();
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts.dedup();
            ts
        }
        (None, Experiment::Dafermos) => (0..=50).map(|i| i as f64 * t_end / 50.0).collect(),
        (None, _) => Vec::new(),
    };

    match experiment {
        Experiment::Converge => {
            if scheme == SchemeChoice::Godunov {
                return Err(CliFailure::Usage(
                    "the converge experiment needs a DG scheme (ddg, drkdg, or vanilla-dg)"
                        .to_string(),
                ));
            }
            if ic != IcChoice::Smooth {
                return Err(CliFailure::Usage(
                    "the converge experiment requires ic = smooth (the only profile with a \
                     classical solution on the whole run)"
                        .to_string(),
                ));
            }
            if overlay.n.is_some() {
                return Err(CliFailure::Usage(
                    "the converge experiment scans the grids in n_list (config key); --n is not \
                     accepted"
                        .to_string(),
                ));
            }
        }
        Experiment::Entropy => {
            if scheme != SchemeChoice::Ddg {
                return Err(CliFailure::Usage(
                    "the entropy experiment records the semidiscrete corrected scheme and \
                     requires scheme = ddg"
                        .to_string(),
                ));
            }
        }
        Experiment::Dafermos => {
            if overlay.scheme.is_some() {
                return Err(CliFailure::Usage(
                    "the dafermos experiment always runs ddg, drkdg, and godunov; --scheme is \
                     not accepted"
                        .to_string(),
                ));
            }
        }
        Experiment::Run | Experiment::Blowup => {}
    }

    let p_list = match overlay.p {
        Some(p) => vec![p],
        None => overlay.p_list.unwrap_or_else(|| vec![3, 6]),
    };
    let n_list = match (experiment, overlay.n) {
        (Experiment::Blowup, Some(n)) => vec![n],
        _ => overlay
            .n_list
            .unwrap_or_else(|| match experiment {
                Experiment::Converge => vec![10, 15, 20, 25, 30],
                _ => vec![20, 40],
            }),
    };
    let cfl_list = match overlay.cfl {
        Some(c) => vec![c],
        None => overlay
            .cfl_list
            .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0]),
    };
    if p_list.is_empty() || n_list.is_empty() || cfl_list.is_empty() {
        return Err(CliFailure::Usage(
            "p_list, n_list, and cfl_list must not be empty".to_string(),
        ));
    }
    let godunov_n = overlay.godunov_n.unwrap_or(10_000);
    if godunov_n == 0 {
        return Err(CliFailure::Usage(
            "invalid godunov_n: the cell count must be at least 1".to_string(),
        ));
    }

    Ok(ResolvedConfig {
        experiment,
        scheme,
        ic,
        order,
        n_cells,
        cfl,
        t_end,
        output_times,
        out_path,
        p_list,
        n_list,
        cfl_list,
        godunov_n,
    })
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn header_line(cfg: &ResolvedConfig) -> String {
    let mut line = format!(
        "# dafermos-dg experiment={} scheme={} ic={} p={} n={} cfl={} t_end={}",
        cfg.experiment.as_str(),
        cfg.scheme.as_str(),
        cfg.ic.as_str(),
        cfg.order,
        cfg.n_cells,
        cfg.cfl,
        cfg.t_end,
    );
    match cfg.experiment {
        Experiment::Blowup => {
            let _ = write!(
                line,
                " p_list={} n_list={} cfl_list={}",
                fmt_list(&cfg.p_list),
                fmt_list(&cfg.n_list),
                fmt_list(&cfg.cfl_list)
            );
        }
        Experiment::Converge => {
            let _ = write!(line, " n_list={}", fmt_list(&cfg.n_list));
        }
        Experiment::Dafermos => {
            let _ = write!(line, " godunov_n={}", cfg.godunov_n);
        }
        Experiment::Run => {
            let _ = write!(line, " output_times={}", fmt_list(&cfg.output_times));
        }
        Experiment::Entropy => {}
    }
    let _ = write!(line, " out={}", cfg.out_path.display());
    line
}

fn dg_run(
    cfg: &ResolvedConfig,
    scheme: DgScheme,
    n_cells: usize,
    record_violations: bool,
) -> Result<DgRunResult, CliFailure> {
    let mesh = Mesh1D::new(0.0, 2.0, n_cells).map_err(CliFailure::Solver)?;
    let mut run_cfg = DgRunConfig::new(scheme, cfg.order, n_cells, cfg.cfl, cfg.t_end);
    run_cfg.output_times = cfg.output_times.clone();
    run_cfg.record_violations = record_violations;
    run_dg(
        &mesh,
        &Burgers,
        NumericalFlux::LocalLaxFriedrichs,
        cfg.ic.profile(),
        &run_cfg,
    )
    .map_err(CliFailure::Solver)
}

fn execute_run(cfg: &ResolvedConfig) -> Result<(String, i32), CliFailure> {
    let mut body = String::new();
    let blown;
    let achieved;
    if cfg.scheme == SchemeChoice::Godunov {
        let mesh = Mesh1D::new(0.0, 2.0, cfg.n_cells).map_err(CliFailure::Solver)?;
        let out = fv_solve(
            &mesh,
            &Burgers,
            NumericalFlux::Godunov,
            cfg.ic.profile(),
            cfg.cfl,
            cfg.t_end,
            &cfg.output_times,
        )
        .map_err(CliFailure::Solver)?;
        blown = out.blown_up;
        achieved = out.achieved_time;
        for (t, means) in &out.snapshots {
            for j in 0..mesh.n_cells {
                let _ = writeln!(
                    body,
                    "{},{},{}",
                    fmt_f(*t),
                    fmt_f(mesh.cell_center(j)),
                    fmt_f(means[j])
                );
            }
        }
    } else {
        let scheme = cfg.scheme.dg_scheme().expect("run scheme is a DG variant");
        let out = dg_run(cfg, scheme, cfg.n_cells, false)?;
        blown = out.blown_up;
        achieved = out.achieved_time;
        let basis = Basis::new(cfg.order).map_err(CliFailure::Solver)?;
        for (t, state) in &out.snapshots {
            for (x, u) in snapshot_points(state, &basis) {
                let _ = writeln!(body, "{},{},{}", fmt_f(*t), fmt_f(x), fmt_f(u));
            }
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "{}", header_line(cfg));
    let _ = writeln!(
        text,
        "# achieved_time={} blown_up={}",
        fmt_f(achieved),
        blown
    );
    let _ = writeln!(text, "time,x,u");
    text.push_str(&body);
    Ok((text, if blown { EXIT_BLOWUP } else { EXIT_OK }))
}

fn execute_converge(cfg: &ResolvedConfig) -> Result<(String, i32), CliFailure> {
    let scheme = cfg
        .scheme
        .dg_scheme()
        .expect("converge scheme is a DG variant");
    let ic = cfg.ic.profile();
    let t_end = cfg.t_end;
    let study = convergence_study(
        scheme,
        cfg.order,
        &cfg.n_list,
        cfg.cfl,
        t_end,
        &Burgers,
        NumericalFlux::LocalLaxFriedrichs,
        ic,
        |x| burgers_smooth_exact(&ic, x, t_end),
    );

    let mut text = String::new();
    let _ = writeln!(text, "{}", header_line(cfg));
    match study {
        Ok(table) => {
            let _ = writeln!(text, "# blown_up=false");
            let _ = writeln!(text, "n_cells,e1,e2,eoc1,eoc2");
            for (i, &n) in table.n_cells.iter().enumerate() {
                let (o1, o2) = if i == 0 {
                    (f64::NAN, f64::NAN)
                } else {
                    (table.eoc_1[i - 1], table.eoc_2[i - 1])
                };
                let _ = writeln!(
                    text,
                    "{},{},{},{},{}",
                    n,
                    fmt_f(table.errors_1norm[i]),
                    fmt_f(table.errors_2norm[i]),
                    fmt_f(o1),
                    fmt_f(o2)
                );
            }
            Ok((text, EXIT_OK))
        }
        Err(SolverError::NonFinite { .. }) | Err(SolverError::MagnitudeBlowup { .. }) => {
            let _ = writeln!(text, "# blown_up=true");
            let _ = writeln!(text, "n_cells,e1,e2,eoc1,eoc2");
            Ok((text, EXIT_BLOWUP))
        }
        Err(e) => Err(CliFailure::Solver(e)),
    }
}

fn execute_entropy(cfg: &ResolvedConfig) -> Result<(String, i32), CliFailure> {
    let out = dg_run(cfg, DgScheme::RhsCorrected, cfg.n_cells, true)?;
    let trace = EntropyTrace::from_trace(
        out.violation_trace
            .as_ref()
            .expect("entropy runs record violations"),
    );

    let mut text = String::new();
    let _ = writeln!(text, "{}", header_line(cfg));
    let _ = writeln!(
        text,
        "# achieved_time={} blown_up={}",
        fmt_f(out.achieved_time),
        out.blown_up
    );
    let _ = writeln!(text, "time,cell,violation_pos_log10,violation_neg_log10");
    for (i, &t) in trace.times.iter().enumerate() {
        for cell in 0..trace.positive_log10[i].len() {
            let _ = writeln!(
                text,
                "{},{},{},{}",
                fmt_f(t),
                cell,
                fmt_f(trace.positive_log10[i][cell]),
                fmt_f(trace.negative_log10[i][cell])
            );
        }
    }
    Ok((text, if out.blown_up { EXIT_BLOWUP } else { EXIT_OK }))
}

fn execute_dafermos(cfg: &ResolvedConfig) -> Result<(String, i32), CliFailure> {
    let ddg = dg_run(cfg, DgScheme::RhsCorrected, cfg.n_cells, false)?;
    let drkdg = dg_run(cfg, DgScheme::StepCorrected, cfg.n_cells, false)?;
    let mesh = Mesh1D::new(0.0, 2.0, cfg.godunov_n).map_err(CliFailure::Solver)?;
    let godunov = fv_solve(
        &mesh,
        &Burgers,
        NumericalFlux::Godunov,
        cfg.ic.profile(),
        cfg.cfl,
        cfg.t_end,
        &cfg.output_times,
    )
    .map_err(CliFailure::Solver)?;

    let blown = ddg.blown_up || drkdg.blown_up || godunov.blown_up;
    let mut text = String::new();
    let _ = writeln!(text, "{}", header_line(cfg));
    let _ = writeln!(
        text,
        "# achieved_time_ddg={} achieved_time_drkdg={} achieved_time_godunov={} blown_up={}",
        fmt_f(ddg.achieved_time),
        fmt_f(drkdg.achieved_time),
        fmt_f(godunov.achieved_time),
        blown
    );
    let _ = writeln!(text, "time,entropy_ddg,entropy_drkdg,entropy_godunov");
    let rows = ddg
        .entropy_at_outputs
        .iter()
        .zip(drkdg.entropy_at_outputs.iter())
        .zip(godunov.entropy_at_outputs.iter());
    for ((&(t, e_ddg), &(t_drkdg, e_drkdg)), &(t_god, e_god)) in rows {
        debug_assert_eq!(t, t_drkdg);
        debug_assert_eq!(t, t_god);
        let _ = writeln!(
            text,
            "{},{},{},{}",
            fmt_f(t),
            fmt_f(e_ddg),
            fmt_f(e_drkdg),
            fmt_f(e_god)
        );
    }
    Ok((text, if blown { EXIT_BLOWUP } else { EXIT_OK }))
}

fn execute_blowup(cfg: &ResolvedConfig) -> Result<(String, i32), CliFailure> {
    let scheme = cfg
        .scheme
        .dg_scheme()
        .ok_or_else(|| {
            CliFailure::Usage(
                "the blowup experiment scans a DG scheme (ddg, drkdg, or vanilla-dg)".to_string(),
            )
        })?;
    let rows = blowup_scan(
        scheme,
        &cfg.p_list,
        &cfg.n_list,
        &cfg.cfl_list,
        cfg.t_end,
        &Burgers,
        NumericalFlux::LocalLaxFriedrichs,
        cfg.ic.profile(),
    )
    .map_err(CliFailure::Solver)?;

    let mut text = String::new();
    let _ = writeln!(text, "{}", header_line(cfg));
    let _ = writeln!(text, "order,n_cells,cfl,achieved_time");
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            row.order,
            row.n_cells,
            fmt_f(row.cfl),
            fmt_f(row.achieved_time)
        );
    }
    Ok((text, EXIT_OK))
}

/// Executes a resolved configuration: runs the experiment and writes its CSV.
/// Returns the process exit code (0 success, 2 blow-up).
pub fn execute(cfg: &ResolvedConfig) -> Result<i32, CliFailure> {
    let (text, code) = match cfg.experiment {
        Experiment::Run => execute_run(cfg)?,
        Experiment::Converge => execute_converge(cfg)?,
        Experiment::Entropy => execute_entropy(cfg)?,
        Experiment::Dafermos => execute_dafermos(cfg)?,
        Experiment::Blowup => execute_blowup(cfg)?,
    };
    std::fs::write(&cfg.out_path, text).map_err(|e| {
        CliFailure::Io(format!("cannot write {}: {e}", cfg.out_path.display()))
    })?;
    Ok(code)
}

/// Parses raw arguments (without the program name) into a resolved config.
pub fn parse_args<I>(args: I) -> Result<ResolvedConfig, CliFailure>
where
    I: IntoIterator<Item = String>,
{
    let with_name = std::iter::once("dafermos-dg".to_string()).chain(args);
    match CliArgs::try_parse_from(with_name) {
        Ok(cli) => resolve(&cli),
        Err(e) => Err(CliFailure::Usage(e.to_string())),
    }
}

/// Full CLI entry point: parse, resolve, execute, report. Returns the exit
/// code for the process.
pub fn main_with_args<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let with_name = std::iter::once("dafermos-dg".to_string()).chain(args);
    let cli = match CliArgs::try_parse_from(with_name) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                EXIT_OK
            } else {
                EXIT_USAGE
            };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return f.exit_code();
        }
    };
    match execute(&cfg) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn defaults_resolve_per_experiment() {
        let cfg = parse_args(args(&["run"])).unwrap();
        assert_eq!(cfg.scheme, SchemeChoice::Ddg);
        assert_eq!(cfg.ic, IcChoice::SineShock);
        assert_eq!(cfg.order, 6);
        assert_eq!(cfg.n_cells, 20);
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.t_end, 1.0);
        assert_eq!(cfg.output_times, vec![0.25, 0.5, 1.0]);
        assert_eq!(cfg.out_path, PathBuf::from("run.csv"));

        let cfg = parse_args(args(&["converge"])).unwrap();
        assert_eq!(cfg.ic, IcChoice::Smooth);
        assert_eq!(cfg.t_end, 8.0);
        assert_eq!(cfg.n_list, vec![10, 15, 20, 25, 30]);

        let cfg = parse_args(args(&["dafermos"])).unwrap();
        assert_eq!(cfg.n_cells, 50);
        assert_eq!(cfg.godunov_n, 10_000);
        assert_eq!(cfg.output_times.len(), 51);
        assert_eq!(cfg.output_times[0], 0.0);
        assert_eq!(*cfg.output_times.last().unwrap(), 1.0);

        let cfg = parse_args(args(&["blowup"])).unwrap();
        assert_eq!(cfg.p_list, vec![3, 6]);
        assert_eq!(cfg.n_list, vec![20, 40]);
        assert_eq!(cfg.cfl_list, vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0]);
    }

    #[test]
    fn flags_override_defaults() {
        let cfg = parse_args(args(&[
            "run", "--scheme", "drkdg", "--ic", "smooth", "--p", "3", "--n", "40", "--cfl",
            "0.25", "--t-end", "2.5", "--out", "x.csv",
        ]))
        .unwrap();
        assert_eq!(cfg.scheme, SchemeChoice::Drkdg);
        assert_eq!(cfg.ic, IcChoice::Smooth);
        assert_eq!(cfg.order, 3);
        assert_eq!(cfg.n_cells, 40);
        assert_eq!(cfg.cfl, 0.25);
        assert_eq!(cfg.t_end, 2.5);
        assert_eq!(cfg.out_path, PathBuf::from("x.csv"));
        assert_eq!(*cfg.output_times.last().unwrap(), 2.5);
    }

    #[test]
    fn missing_experiment_is_a_usage_error() {
        assert!(matches!(
            parse_args(Vec::new()),
            Err(CliFailure::Usage(_))
        ));
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for bad in [
            vec!["run", "--cfl", "-1"],
            vec!["run", "--scheme", "upwind"],
            vec!["run", "--ic", "square"],
            vec!["warp"],
            vec!["run", "--p", "0"],
            vec!["run", "--t-end", "-2"],
            vec!["converge", "--scheme", "godunov"],
            vec!["converge", "--ic", "sine-shock"],
            vec!["converge", "--n", "12"],
            vec!["entropy", "--scheme", "drkdg"],
            vec!["dafermos", "--scheme", "ddg"],
            vec!["entropy", "--output-times", "0.5"],
        ] {
            let res = parse_args(args(&bad));
            assert!(
                matches!(res, Err(CliFailure::Usage(_))),
                "expected usage error for {bad:?}, got {res:?}"
            );
        }
    }

    #[test]
    fn config_file_values_sit_between_flags_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("base.cfg");
        std::fs::write(
            &path,
            "# experiment defaults\nscheme = drkdg\nn = 32\ncfl = 0.3 # inline comment\n",
        )
        .unwrap();
        let cfg = parse_args(args(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--cfl",
            "0.7",
        ]))
        .unwrap();
        assert_eq!(cfg.scheme, SchemeChoice::Drkdg); // from file
        assert_eq!(cfg.n_cells, 32); // from file
        assert_eq!(cfg.cfl, 0.7); // flag wins
        assert_eq!(cfg.order, 6); // default
    }

    #[test]
    fn unknown_config_keys_are_named_in_the_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "colour = blue\n").unwrap();
        match parse_args(args(&["run", "--config", path.to_str().unwrap()])) {
            Err(CliFailure::Usage(msg)) => assert!(msg.contains("colour"), "message: {msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_config_lines_are_rejected_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "cfl = 0.5\nnotakeyvalue\n").unwrap();
        match parse_args(args(&["run", "--config", path.to_str().unwrap()])) {
            Err(CliFailure::Usage(msg)) => assert!(msg.contains("line 2"), "message: {msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn missing_config_file_is_an_io_failure() {
        let res = parse_args(args(&["run", "--config", "/nonexistent/path.cfg"]));
        assert!(matches!(res, Err(CliFailure::Io(_))));
    }

    #[test]
    fn list_keys_parse_from_config_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.cfg");
        std::fs::write(&path, "p_list = 2, 4\nn_list = 10,20\ncfl_list = 0.5, 1.0\n").unwrap();
        let cfg = parse_args(args(&["blowup", "--config", path.to_str().unwrap()])).unwrap();
        assert_eq!(cfg.p_list, vec![2, 4]);
        assert_eq!(cfg.n_list, vec![10, 20]);
        assert_eq!(cfg.cfl_list, vec![0.5, 1.0]);
    }

    #[test]
    fn scalar_flags_narrow_the_blowup_scan() {
        let cfg = parse_args(args(&["blowup", "--p", "4", "--n", "10", "--cfl", "2.0"])).unwrap();
        assert_eq!(cfg.p_list, vec![4]);
        assert_eq!(cfg.n_list, vec![10]);
        assert_eq!(cfg.cfl_list, vec![2.0]);
    }

    #[test]
    fn float_formatting_has_seventeen_significant_digits() {
        assert_eq!(fmt_f(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_f(-1.0), "-1.0000000000000000e0");
        assert_eq!(fmt_f(1.0 / 3.0), "3.3333333333333331e-1");
    }
}
