//! Command-line front end: state descriptions in JSON, analyses written as
//! JSON or CSV, and the figure data sets.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{
    analytic_intensity_variance, analytic_single_photon_std, compare_exact, CompareOptions, ExecChoice, RegimeParams,
    SqueezeAngle, VarianceCase,
};
use crate::error::Error;
use crate::fock::FockSpace;
use crate::gops::{check_commutators, g_stats, squeeze_report, uncertainty_report, GStats};
use crate::interference::{fringe_from_stats, zero_reachable_regions, FringeConfig, FringePoint};
use crate::par::Execution;
use crate::sampling::uncertainty_sweep;
use crate::states::{build, StateKind, StateSpec, DEFAULT_LEAKAGE_TOL, SINGLE_PHOTON_NORM_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Desk-scale photon number of the bright-light figures.
pub const DESK_N_BAR: f64 = 32.0;
pub const FIG3_Q: [f64; 4] = [0.15, 0.4, 0.6, 0.8];
pub const FIG4_Q: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureName {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureName {
    fn stem(self) -> &'static str {
        match self {
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Gstats,
    Check,
    Fringe,
    Compare,
    Figure(FigureName),
}

impl Command {
    pub fn default_format(self) -> Format {
        match self {
            Command::Fringe | Command::Figure(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gspace",
    version,
    about = "Coherence statistics and double-slit fringe fluctuations of two-mode light"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// G-operator means, fluctuations, uncertainty relations and squeezing flags
    Gstats,
    /// Commutators and uncertainty relations on seeded random states
    Check,
    /// Mean intensity and its fluctuation across the fringe
    Fringe,
    /// Exact bright displaced-squeezed moments against the closed forms
    Compare,
    /// Write the data behind one figure into the --out directory
    Figure {
        #[arg(value_enum)]
        name: FigureName,
    },
}

#[derive(clap::Args, Debug)]
struct Opts {
    /// State as a JSON object, or a path to a file holding one
    #[arg(long, global = true)]
    state: Option<String>,
    /// Per-mode cutoff, `n` or `n1,n2`
    #[arg(long, global = true, value_parser = parse_cutoff)]
    cutoff: Option<(usize, usize)>,
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_angle)]
    phi_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_angle)]
    phi_max: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    k_abs: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (a directory for `figure`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Number of random states for `check`
    #[arg(long, global = true, default_value_t = 500)]
    count: usize,
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Squeeze angle, `0` or `pi` (radians accepted)
    #[arg(long, global = true, value_parser = parse_angle)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    nbar: Option<f64>,
    #[arg(long, global = true)]
    sequential: bool,
}

fn parse_cutoff(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<usize>().map_err(|e| format!("cutoff `{p}`: {e}"));
    match parts.as_slice() {
        [n] => num(n).map(|n| (n, n)),
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(format!("cutoff `{s}` must be `n` or `n1,n2`")),
    }
}

/// A number, optionally written with `pi` (`pi`, `-pi`, `1.5pi`, `-3pi/2`).
fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|e| format!("angle `{s}`: {e}"));
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.trim_end_matches('*').parse::<f64>().map_err(|e| format!("angle `{s}`: {e}"))?,
    };
    let divisor = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .ok_or_else(|| format!("angle `{s}`: unexpected `{d}`"))?
            .parse::<f64>()
            .map_err(|e| format!("angle `{s}`: {e}"))?,
    };
    Ok(factor * PI / divisor)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub phi_min: Option<f64>,
    pub phi_max: Option<f64>,
    pub points: Option<usize>,
    pub k_abs: Option<f64>,
}

impl Grid {
    fn config(&self, default: FringeConfig) -> crate::Result<FringeConfig> {
        FringeConfig::new(
            self.k_abs.unwrap_or(default.k_abs),
            self.phi_min.unwrap_or(default.phi_min),
            self.phi_max.unwrap_or(default.phi_max),
            self.points.unwrap_or(default.n_points),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub state: Option<String>,
    pub cutoff: Option<(usize, usize)>,
    pub grid: Grid,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub count: usize,
    pub q: Option<f64>,
    pub theta: Option<f64>,
    pub nbar: Option<f64>,
    pub sequential: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            state: None,
            cutoff: None,
            grid: Grid { phi_min: None, phi_max: None, points: None, k_abs: None },
            format: None,
            out: None,
            seed: 42,
            count: 500,
            q: None,
            theta: None,
            nbar: None,
            sequential: false,
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.default_format())
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let command = match cli.command {
            CliCommand::Gstats => Command::Gstats,
            CliCommand::Check => Command::Check,
            CliCommand::Fringe => Command::Fringe,
            CliCommand::Compare => Command::Compare,
            CliCommand::Figure { name } => Command::Figure(name),
        };
        let o = cli.opts;
        RunConfig {
            command,
            state: o.state,
            cutoff: o.cutoff,
            grid: Grid { phi_min: o.phi_min, phi_max: o.phi_max, points: o.points, k_abs: o.k_abs },
            format: o.format,
            out: o.out,
            seed: o.seed,
            count: o.count,
            q: o.q,
            theta: o.theta,
            nbar: o.nbar,
            sequential: o.sequential,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn report(&self) -> String {
        let (kind, message) = match self {
            Failure::Input(m) => ("input", m),
            Failure::Numeric(m) => ("numeric", m),
        };
        json!({ "error": { "kind": kind, "message": message, "exit_code": self.code() } }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parse argv and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli.into()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

/// Dispatch one command. Failures print a JSON error object on stderr.
pub fn run(config: &RunConfig) -> i32 {
    let result = match config.command {
        Command::Gstats => cmd_gstats(config),
        Command::Check => cmd_check(config),
        Command::Fringe => cmd_fringe(config),
        Command::Compare => cmd_compare(config),
        Command::Figure(name) => cmd_figure(config, name),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.report());
            f.code()
        }
    }
}

// ---------------------------------------------------------------- state specs

#[derive(Deserialize)]
#[serde(untagged)]
enum CutoffField {
    Same(usize),
    Pair([usize; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "type")]
    kind: String,
    n1: Option<usize>,
    n2: Option<usize>,
    alpha: Option<[f64; 2]>,
    beta: Option<[f64; 2]>,
    q: Option<f64>,
    theta: Option<f64>,
    c1: Option<[f64; 2]>,
    c2: Option<[f64; 2]>,
    amplitudes: Option<Vec<[f64; 2]>>,
    cutoff: Option<CutoffField>,
    leakage_tol: Option<f64>,
}

fn c64([re, im]: [f64; 2]) -> C64 {
    C64::new(re, im)
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Parse a JSON state description such as
/// `{"type":"displaced_squeezed","alpha":[4,0],"q":0.3,"theta":0}`.
pub fn parse_state_spec(text: &str) -> crate::Result<StateSpec> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let need = |v: Option<[f64; 2]>, name: &str| {
        v.map(c64).ok_or_else(|| Error::InvalidSpec(format!("`{}` needs `{name}`", raw.kind)))
    };
    let cutoff = raw.cutoff.map(|c| match c {
        CutoffField::Same(n) => (n, n),
        CutoffField::Pair([a, b]) => (a, b),
    });
    let kind = match raw.kind.as_str() {
        "vacuum" => StateKind::Vacuum,
        "fock" => StateKind::Fock { n1: raw.n1.unwrap_or(0), n2: raw.n2.unwrap_or(0) },
        "coherent" => StateKind::Coherent { alpha: need(raw.alpha, "alpha")?, beta: need(raw.beta, "beta")? },
        "displaced_squeezed" => StateKind::DisplacedSqueezed {
            alpha: need(raw.alpha, "alpha")?,
            q: raw.q.ok_or_else(|| Error::InvalidSpec("`displaced_squeezed` needs `q`".into()))?,
            theta: raw.theta.unwrap_or(0.0),
        },
        "single_photon" => {
            let (c1, c2) = (need(raw.c1, "c1")?, need(raw.c2, "c2")?);
            let n = c1.norm_sqr() + c2.norm_sqr();
            if !((n - 1.0).abs() <= SINGLE_PHOTON_NORM_TOL) {
                return Err(Error::InvalidSpec(format!("single photon |c1|^2 + |c2|^2 = {n:?}, expected 1")));
            }
            StateKind::SinglePhoton { c1, c2 }
        }
        "custom" => {
            let layout = cutoff.ok_or_else(|| Error::InvalidSpec("`custom` needs `cutoff`".into()))?;
            let amps = raw.amplitudes.ok_or_else(|| Error::InvalidSpec("`custom` needs `amplitudes`".into()))?;
            StateKind::Custom { cutoff: layout, amplitudes: amps.into_iter().map(c64).collect() }
        }
        other => return Err(Error::InvalidSpec(format!("unknown state type `{other}`"))),
    };
    let cutoff = if matches!(kind, StateKind::Custom { .. }) { None } else { cutoff };
    let spec = StateSpec { kind, cutoff, leakage_tol: raw.leakage_tol.unwrap_or(DEFAULT_LEAKAGE_TOL) };
    spec.validate()?;
    Ok(spec)
}

/// Inverse of [`parse_state_spec`].
pub fn state_spec_to_json(spec: &StateSpec) -> Value {
    let mut v = match &spec.kind {
        StateKind::Vacuum => json!({ "type": "vacuum" }),
        StateKind::Fock { n1, n2 } => json!({ "type": "fock", "n1": n1, "n2": n2 }),
        StateKind::Coherent { alpha, beta } => {
            json!({ "type": "coherent", "alpha": pair(*alpha), "beta": pair(*beta) })
        }
        StateKind::DisplacedSqueezed { alpha, q, theta } => {
            json!({ "type": "displaced_squeezed", "alpha": pair(*alpha), "q": q, "theta": theta })
        }
        StateKind::SinglePhoton { c1, c2 } => json!({ "type": "single_photon", "c1": pair(*c1), "c2": pair(*c2) }),
        StateKind::Custom { amplitudes, .. } => {
            json!({ "type": "custom", "amplitudes": amplitudes.iter().map(|a| pair(*a)).collect::<Vec<_>>() })
        }
    };
    let layout = match &spec.kind {
        StateKind::Custom { cutoff, .. } => Some(*cutoff),
        _ => spec.cutoff,
    };
    if let Some((a, b)) = layout {
        v["cutoff"] = json!([a, b]);
    }
    if spec.leakage_tol != DEFAULT_LEAKAGE_TOL {
        v["leakage_tol"] = json!(spec.leakage_tol);
    }
    v
}

fn load_state_spec(config: &RunConfig) -> Outcome<StateSpec> {
    let arg = config.state.as_deref().ok_or_else(|| Failure::Input("this command needs --state".into()))?;
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Input(format!("reading state file {arg}: {e}")))?
    };
    let mut spec = parse_state_spec(&text)?;
    if let Some(c) = config.cutoff {
        if let StateKind::Custom { cutoff, .. } = spec.kind {
            if cutoff != c {
                return Err(Failure::Input("--cutoff conflicts with the custom amplitude layout".into()));
            }
        }
        spec.cutoff = Some(c);
    }
    Ok(spec)
}

// ---------------------------------------------------------------- output

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write_text(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("writing {}: {e}", path.display())))
}

fn emit(config: &RunConfig, text: &str) -> Outcome<()> {
    match &config.out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Fringe rows with `#` parameter lines before the header.
pub fn fringe_csv(comments: &[String], points: &[FringePoint]) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    s.push_str("phi,mean,std_exact,std_analytic,zero_reachable\n");
    for p in points {
        let analytic = p.std_analytic.map(num).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            num(p.phi),
            num(p.mean_intensity),
            num(p.std_exact),
            analytic,
            u8::from(p.zero_reachable)
        );
    }
    s
}

fn fringe_json(comments: &[String], points: &[FringePoint]) -> String {
    to_json(&json!({
        "notes": comments,
        "points": points,
        "zero_reachable_regions": zero_reachable_regions(points),
    }))
}

fn render_fringe(format: Format, comments: &[String], points: &[FringePoint]) -> String {
    match format {
        Format::Csv => fringe_csv(comments, points),
        Format::Json => fringe_json(comments, points),
    }
}

fn grid_comment(cfg: &FringeConfig) -> String {
    format!(
        "k_abs={} phi_min={} phi_max={} points={}",
        num(cfg.k_abs),
        num(cfg.phi_min),
        num(cfg.phi_max),
        cfg.n_points
    )
}

// ---------------------------------------------------------------- commands

fn gstats_block(stats: &GStats) -> Outcome<Value> {
    let relations = uncertainty_report(stats)?;
    let squeeze = if stats.n_bar > 0.0 { Some(squeeze_report(stats)?) } else { None };
    Ok(json!({ "stats": stats, "relations": relations, "squeeze": squeeze }))
}

fn cmd_gstats(config: &RunConfig) -> Outcome<i32> {
    let spec = load_state_spec(config)?;
    let state = build(&spec)?;
    let stats = g_stats(&state)?;
    let (c1, c2) = state.space().cutoffs();
    match config.format() {
        Format::Json => {
            let mut v = gstats_block(&stats)?;
            v["state"] = state_spec_to_json(&spec);
            v["cutoff"] = json!([c1, c2]);
            v["leakage"] = json!(state.leakage());
            emit(config, &to_json(&v))?;
        }
        Format::Csv => {
            uncertainty_report(&stats)?;
            let mut s = format!(
                "# state: {}\n# cutoff={c1},{c2} leakage={}\n",
                state_spec_to_json(&spec),
                num(state.leakage())
            );
            s.push_str("quantity,g0,g1,g2,g3\n");
            for (name, row) in [("mean", stats.mean), ("std", stats.std)] {
                let _ = writeln!(s, "{name},{},{},{},{}", num(row[0]), num(row[1]), num(row[2]), num(row[3]));
            }
            emit(config, &s)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_check(config: &RunConfig) -> Outcome<i32> {
    let (c1, c2) = config.cutoff.unwrap_or((6, 6));
    let space = FockSpace::new(c1, c2)?;
    let commutators = if c1 >= 3 && c2 >= 3 { Some(check_commutators(space)?) } else { None };
    let sweep = uncertainty_sweep(space, config.seed, config.count, config.exec())?;
    let passed = sweep.passed();
    match config.format() {
        Format::Json => {
            emit(config, &to_json(&json!({ "commutators": commutators, "sweep": sweep, "passed": passed })))?
        }
        Format::Csv => {
            let mut s = format!("# cutoff={c1},{c2} seed={} count={}\n", config.seed, config.count);
            s.push_str("check,value\n");
            if let Some(c) = &commutators {
                for e in &c.entries {
                    let _ = writeln!(s, "{},{}", e.name, num(e.residual));
                }
            }
            for r in &sweep.relations {
                let _ = writeln!(s, "{},{}", r.name, num(r.min_slack));
            }
            let _ = writeln!(s, "max V^2+D^2,{}", num(sweep.max_vd_sum));
            let _ = writeln!(s, "max |G|-G0,{}", num(sweep.max_radius_excess));
            let _ = writeln!(s, "violations,{}", sweep.violations);
            emit(config, &s)?;
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_NUMERIC })
}

/// Closed-form fringe standard deviation for the states that have one.
/// Bright displaced-squeezed states use `n_bar` as given.
fn analytic_std(spec: &StateSpec, n_bar: f64, k_abs: f64, phi: f64) -> Option<(f64, bool)> {
    match &spec.kind {
        StateKind::Coherent { alpha, beta } => {
            let mean = k_abs * k_abs * (alpha + beta * C64::from_polar(1.0, phi)).norm_sqr();
            Some(((2.0 * k_abs * k_abs * mean).sqrt(), false))
        }
        StateKind::DisplacedSqueezed { alpha, q, theta } => {
            if alpha.im != 0.0 || alpha.re <= 0.0 {
                return None;
            }
            let angle = SqueezeAngle::from_radians(*theta).ok()?;
            let params = RegimeParams::new(n_bar, *q, angle, k_abs).ok()?;
            let case = if *q == 0.0 { VarianceCase::Coherent } else { angle.into() };
            let v = analytic_intensity_variance(&params, phi, case);
            Some((v.value.sqrt(), v.clamped))
        }
        StateKind::SinglePhoton { c1, c2 } => analytic_single_photon_std(*c1, *c2, k_abs, phi).ok().map(|s| (s, false)),
        _ => None,
    }
}

/// Exact fringe of `spec` plus its closed-form standard deviation; returns
/// the points, the G statistics and warnings for clamped approximations.
fn fringe_for(
    spec: &StateSpec,
    cfg: &FringeConfig,
    n_bar: Option<f64>,
) -> Outcome<(Vec<FringePoint>, GStats, Vec<String>)> {
    let state = build(spec)?;
    let stats = g_stats(&state)?;
    let mut points = fringe_from_stats(&stats, cfg)?;
    let mut clamped = Vec::new();
    for p in &mut points {
        if let Some((s, c)) = analytic_std(spec, n_bar.unwrap_or(stats.mean[0]), cfg.k_abs, p.phi) {
            p.std_analytic = Some(s);
            if c {
                clamped.push(p.phi);
            }
        }
    }
    let mut warnings = Vec::new();
    if !clamped.is_empty() {
        warnings
            .push(format!("warning: analytic variance negative and clamped to zero at {} grid points", clamped.len()));
    }
    let (c1, c2) = state.space().cutoffs();
    warnings.insert(0, format!("cutoff={c1},{c2} leakage={} n_bar_exact={}", num(state.leakage()), num(stats.mean[0])));
    Ok((points, stats, warnings))
}

fn cmd_fringe(config: &RunConfig) -> Outcome<i32> {
    let spec = load_state_spec(config)?;
    let cfg = config.grid.config(FringeConfig::default())?;
    let (points, _, notes) = fringe_for(&spec, &cfg, None)?;
    let mut comments = vec![format!("state: {}", state_spec_to_json(&spec)), grid_comment(&cfg)];
    comments.extend(notes);
    emit(config, &render_fringe(config.format(), &comments, &points))?;
    Ok(EXIT_OK)
}

fn cmd_compare(config: &RunConfig) -> Outcome<i32> {
    let theta = SqueezeAngle::from_radians(config.theta.unwrap_or(0.0))?;
    let params = RegimeParams::new(
        config.nbar.unwrap_or(DESK_N_BAR),
        config.q.unwrap_or(FIG4_Q),
        theta,
        config.grid.k_abs.unwrap_or(1.0),
    )?;
    let exec = if config.sequential { ExecChoice::Sequential } else { ExecChoice::Parallel };
    let opts = CompareOptions { cutoff: config.cutoff, leakage_tol: DEFAULT_LEAKAGE_TOL, exec };
    let report = compare_exact(&params, &opts)?;
    let mut warnings = Vec::new();
    if !report.in_regime {
        warnings.push(format!("n_bar / sinh q = {} is below the bright-light regime", num(report.regime_ratio)));
    }
    for p in report.phases.iter().filter(|p| p.clamped) {
        warnings.push(format!("analytic variance clamped to zero at phi = {}", num(p.phi)));
    }
    match config.format() {
        Format::Json => emit(config, &to_json(&json!({ "report": report, "warnings": warnings })))?,
        Format::Csv => {
            let mut s = String::new();
            for w in &warnings {
                let _ = writeln!(s, "# {w}");
            }
            let _ = writeln!(
                s,
                "# n_bar={} n_bar_exact={} q={} theta={} cutoff={},{} leakage={}",
                num(params.n_bar),
                num(report.n_bar_exact),
                num(params.q),
                num(theta.radians()),
                report.cutoff.0,
                report.cutoff.1,
                num(report.leakage)
            );
            s.push_str("phi,exact_variance,analytic_variance,rel_dev\n");
            for p in &report.phases {
                let rel = p.rel_dev.map(num).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{rel}", num(p.phi), num(p.exact_variance), num(p.analytic_variance));
            }
            emit(config, &s)?;
        }
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- figures

const DESK_SCALE_NOTE: &str =
    "n_bar=32 desk scale: bright-light photon numbers near 1e15 cannot be held in a truncated Fock basis";

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn bright_spec(q: f64, angle: SqueezeAngle) -> StateSpec {
    StateSpec::displaced_squeezed(C64::new((DESK_N_BAR / 2.0).sqrt(), 0.0), q, angle.radians())
}

fn bright_cases(q: f64) -> [(&'static str, StateSpec); 3] {
    let alpha = C64::new((DESK_N_BAR / 2.0).sqrt(), 0.0);
    [
        ("coherent", StateSpec::coherent(alpha, alpha)),
        ("theta0", bright_spec(q, SqueezeAngle::Zero)),
        ("thetaPi", bright_spec(q, SqueezeAngle::Pi)),
    ]
}

/// Closed-form curve for the nominal desk-scale photon number.
fn desk_analytic(case: &str, q: f64, k_abs: f64, phi: f64) -> f64 {
    let (angle, vc) = match case {
        "coherent" => (SqueezeAngle::Zero, VarianceCase::Coherent),
        "theta0" => (SqueezeAngle::Zero, VarianceCase::Theta0),
        _ => (SqueezeAngle::Pi, VarianceCase::ThetaPi),
    };
    let p = RegimeParams { n_bar: DESK_N_BAR, q, theta: angle, k_abs };
    analytic_intensity_variance(&p, phi, vc).value.sqrt()
}

fn cmd_figure(config: &RunConfig, name: FigureName) -> Outcome<i32> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if !dir.is_dir() {
        return Err(Failure::Input(format!("--out {} is not a directory", dir.display())));
    }
    let format = config.format();
    let written = match name {
        FigureName::Fig3 => figure3(config, &dir, format)?,
        FigureName::Fig4 => figure4(config, &dir, format)?,
        FigureName::Fig5 | FigureName::Fig6 => single_photon_figure(config, &dir, format, name)?,
    };
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn figure3(config: &RunConfig, dir: &Path, format: Format) -> Outcome<Vec<PathBuf>> {
    let cfg = config.grid.config(FringeConfig::one_period(1.0, 257)?)?;
    let mut written = Vec::new();
    for q in FIG3_Q {
        for (case, spec) in bright_cases(q) {
            let (mut points, _, notes) = fringe_for(&spec, &cfg, Some(DESK_N_BAR))?;
            for p in &mut points {
                p.std_analytic = Some(desk_analytic(case, q, cfg.k_abs, p.phi));
            }
            let mut comments = vec![
                format!("figure: fig3 case={case} q={}", num(q)),
                DESK_SCALE_NOTE.to_string(),
                format!("state: {}", state_spec_to_json(&spec)),
                grid_comment(&cfg),
            ];
            comments.extend(notes);
            comments.push("std_analytic at nominal n_bar; mean and std_exact from the truncated state".into());
            let path = dir.join(format!("fig3_q{}_{case}.{}", num(q), ext(format)));
            write_text(&path, &render_fringe(format, &comments, &points))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn figure4(config: &RunConfig, dir: &Path, format: Format) -> Outcome<Vec<PathBuf>> {
    let cfg = config.grid.config(FringeConfig::default())?;
    let mut written = Vec::new();
    let mut regions = serde_json::Map::new();
    for (case, spec) in bright_cases(FIG4_Q) {
        let (mut points, _, notes) = fringe_for(&spec, &cfg, Some(DESK_N_BAR))?;
        for p in &mut points {
            p.std_analytic = Some(desk_analytic(case, FIG4_Q, cfg.k_abs, p.phi));
        }
        regions.insert(case.to_string(), json!(zero_reachable_regions(&points)));
        let mut comments = vec![
            format!("figure: fig4 case={case} q={}", num(FIG4_Q)),
            DESK_SCALE_NOTE.to_string(),
            format!("state: {}", state_spec_to_json(&spec)),
            grid_comment(&cfg),
            "envelope: mean +/- std_exact; zero_reachable where mean - std_exact <= 0".into(),
        ];
        comments.extend(notes);
        let path = dir.join(format!("fig4_{case}.{}", ext(format)));
        write_text(&path, &render_fringe(format, &comments, &points))?;
        written.push(path);
    }
    let path = dir.join("fig4_regions.json");
    write_text(&path, &to_json(&Value::Object(regions)))?;
    written.push(path);
    Ok(written)
}

fn single_photon_figure(config: &RunConfig, dir: &Path, format: Format, name: FigureName) -> Outcome<Vec<PathBuf>> {
    let cfg = config.grid.config(FringeConfig::default())?;
    let (spec, envelope) = match name {
        FigureName::Fig5 => (
            StateSpec::single_photon(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)),
            "envelope: mean +/- std_exact/2",
        ),
        _ => {
            (StateSpec::single_photon(C64::new(1.0, 0.0), C64::new(0.0, 0.0)), "envelope: mean +/- std_exact/2 (flat)")
        }
    };
    let (points, stats, notes) = fringe_for(&spec, &cfg, None)?;
    let mut comments = vec![
        format!("figure: {}", name.stem()),
        format!("state: {}", state_spec_to_json(&spec)),
        grid_comment(&cfg),
        envelope.to_string(),
    ];
    comments.extend(notes);
    let path = dir.join(format!("{}.{}", name.stem(), ext(format)));
    write_text(&path, &render_fringe(format, &comments, &points))?;
    let gpath = dir.join(format!("{}_gstats.json", name.stem()));
    let mut block = gstats_block(&stats)?;
    block["state"] = state_spec_to_json(&spec);
    write_text(&gpath, &to_json(&block))?;
    Ok(vec![path, gpath])
}
