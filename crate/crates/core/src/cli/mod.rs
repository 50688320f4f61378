//! `epscan` command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid arguments or configuration, 1 for
//! runtime failures such as an unwritable output path.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::ep::{
    analytic_eps_on_trajectory, classify_z, locate_eps_2d, open_center, open_difference_discriminant, uniform_grid, EpRecord,
    DEFAULT_EP_TOL,
};
use crate::error::{EpError, ExportError};
use crate::model::{CouplingModel, ModelKind, ParamTrajectory};
use crate::scattering::{sample_line_shape, LineSource, ResonancePair};
use crate::spectral::{eigensystem, family_z};
use crate::sweep::{export_table, fig1_presets, fmt_f64, phase_jump_across, ExportFormat, PhaseJump, Preset};
use crate::config::{ConfigError, LineSpec, RunConfig, SearchMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const DEFAULT_SWEEP_GRID: usize = 1201;
const DEFAULT_LOCATOR_GRID: usize = 1024;
const DEFAULT_LINE_GRID: usize = 2001;

#[derive(Parser, Debug)]
#[command(name = "epscan", version, about = "Exceptional points of two-level non-Hermitian Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Output path (a directory for `fig1`)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Number of grid points
    #[arg(long)]
    pub grid: Option<usize>,
    /// Parameter (or energy) range
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
    /// EP acceptance tolerance on |Z|
    #[arg(long)]
    pub tol: Option<f64>,
    /// Run configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write both comparison panels and their metadata
    Fig1(Common),
    /// Sweep one trajectory
    Sweep(Common),
    /// Locate exceptional points
    EpFind(Common),
    /// Sample the scattering cross section
    Lineshape(Common),
    /// Tag each grid point with its coupling regime
    Regimes(Common),
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<EpError> for Failure {
    fn from(e: EpError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ExportError> for Failure {
    fn from(e: ExportError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fig1(c) => cmd_fig1(c, stdout),
        Command::Sweep(c) => cmd_sweep(c, stdout),
        Command::EpFind(c) => cmd_ep_find(c, stdout),
        Command::Lineshape(c) => cmd_lineshape(c, stdout),
        Command::Regimes(c) => cmd_regimes(c, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "epscan: {}", f.message());
            f.code()
        }
    }
}

/// Command-line options merged over the configuration file.
struct Resolved {
    cfg: RunConfig,
    out: Option<PathBuf>,
    format: ExportFormat,
    grid: Option<usize>,
    range: Option<(f64, f64)>,
    tol: f64,
}

fn resolve(c: &Common) -> Result<Resolved, Failure> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config FILE is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let format = match &c.format {
        Some(s) => s.parse().map_err(Failure::Config)?,
        None => cfg.format,
    };
    let range = match &c.range {
        Some(v) => Some((v[0], v[1])),
        None => cfg.range,
    };
    if let Some((lo, hi)) = range {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Failure::Config(format!("invalid range [{lo}, {hi}]")));
        }
    }
    let tol = c.tol.unwrap_or(cfg.tol);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Config(format!("tolerance must be positive, got {tol}")));
    }
    Ok(Resolved {
        out: c.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from)),
        grid: c.grid.or(cfg.grid_n),
        cfg,
        format,
        range,
        tol,
    })
}

fn require_range(r: &Resolved) -> Result<(f64, f64), Failure> {
    r.range
        .ok_or_else(|| Failure::Config("a range is required (--range A B or range.min/range.max)".into()))
}

fn require_grid(n: usize, need: usize) -> Result<usize, Failure> {
    if n < need {
        return Err(Failure::Config(format!("grid too small: {n} points, need at least {need}")));
    }
    Ok(n)
}

fn write_bytes(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(bytes).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn table_bytes(table: &crate::sweep::SweepTable, format: ExportFormat) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    export_table(table, format, &mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct EpMeta {
    a_star: f64,
    eigenvalue: (f64, f64),
    residual: f64,
    method: crate::ep::EpMethod,
}

impl From<&EpRecord> for EpMeta {
    fn from(e: &EpRecord) -> Self {
        EpMeta {
            a_star: e.a_star,
            eigenvalue: (e.eigenvalue.re, e.eigenvalue.im),
            residual: e.residual,
            method: e.method,
        }
    }
}

#[derive(Serialize)]
struct PanelMeta {
    file: String,
    family: ModelKind,
    trajectory: ParamTrajectory,
    a_min: f64,
    a_max: f64,
    grid_n: usize,
    eps: Vec<EpMeta>,
    analytic_eps: Vec<f64>,
    /// Jumps measured on the neighbouring grid points.
    phase_jumps_grid: Vec<PhaseJump>,
    /// Jumps measured at `a* ± 1e-6`.
    phase_jumps_local: Vec<PhaseJump>,
}

#[derive(Serialize)]
struct WidthSplit {
    a: f64,
    measured: f64,
    coupling_abs: f64,
}

#[derive(Serialize)]
struct Fig1Meta {
    tol: f64,
    panels: Vec<PanelMeta>,
    /// Half-width splitting `|Γ₁−Γ₂|/2` midway between the right-panel EPs.
    width_split_midpoint: Option<WidthSplit>,
}

fn panel(preset: &Preset, grid_n: usize, tol: f64, format: ExportFormat, dir: &Path) -> Result<(PanelMeta, Vec<EpRecord>), Failure> {
    let table = crate::sweep::run_sweep_with(
        &preset.trajectory,
        preset.a_min,
        preset.a_max,
        grid_n,
        &crate::sweep::SweepOptions {
            ep_tol: tol,
            ..Default::default()
        },
    )?;
    let file = format!("{}.{}", preset.name, format.extension());
    write_bytes(Some(&dir.join(&file)), &table_bytes(&table, format)?, &mut std::io::sink())?;
    let analytic = analytic_eps_on_trajectory(&preset.trajectory, preset.a_min, preset.a_max)
        .map(|v| v.iter().map(|e| e.a_star).collect())
        .unwrap_or_default();
    let meta = PanelMeta {
        file,
        family: preset.trajectory.kind,
        trajectory: preset.trajectory,
        a_min: preset.a_min,
        a_max: preset.a_max,
        grid_n,
        eps: table.eps.iter().map(EpMeta::from).collect(),
        analytic_eps: analytic,
        phase_jumps_grid: table.phase_jumps.clone(),
        phase_jumps_local: table.eps.iter().map(|e| phase_jump_across(&preset.trajectory, e.a_star, 1e-6)).collect(),
    };
    Ok((meta, table.eps))
}

fn cmd_fig1(c: &Common, stdout: &mut dyn Write) -> Result<(), Failure> {
    if c.config.is_some() || c.range.is_some() {
        return Err(Failure::Config("fig1 uses fixed presets; --config and --range are not accepted".into()));
    }
    let format: ExportFormat = match &c.format {
        Some(s) => s.parse().map_err(Failure::Config)?,
        None => ExportFormat::Csv,
    };
    let grid_n = require_grid(c.grid.unwrap_or(DEFAULT_SWEEP_GRID), 2)?;
    let tol = c.tol.unwrap_or(DEFAULT_EP_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Config(format!("tolerance must be positive, got {tol}")));
    }
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;

    let presets = fig1_presets();
    let (left, _) = panel(&presets.left, grid_n, tol, format, &dir)?;
    let (right, right_eps) = panel(&presets.right, grid_n, tol, format, &dir)?;

    let width_split_midpoint = match right_eps.as_slice() {
        [a, b, ..] => {
            let mid = 0.5 * (a.a_star + b.a_star);
            let sys = eigensystem(&presets.right.trajectory.matrix_at(mid));
            Some(WidthSplit {
                a: mid,
                measured: (sys.half_width(0) - sys.half_width(1)).abs(),
                coupling_abs: presets.right.trajectory.coupling.base().get().norm(),
            })
        }
        _ => None,
    };
    let meta = Fig1Meta {
        tol,
        panels: vec![left, right],
        width_split_midpoint,
    };
    let mut json = serde_json::to_vec_pretty(&meta).map_err(|e| Failure::Runtime(e.to_string()))?;
    json.push(b'\n');
    let meta_path = dir.join("fig1_meta.json");
    write_bytes(Some(&meta_path), &json, stdout)?;
    for p in &meta.panels {
        let eps: Vec<String> = p.eps.iter().map(|e| fmt_f64(e.a_star)).collect();
        writeln!(stdout, "{}: {} rows, EPs at [{}]", p.file, grid_n, eps.join(", ")).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn cmd_sweep(c: &Common, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = resolve(c)?;
    let (lo, hi) = require_range(&r)?;
    let n = require_grid(r.grid.unwrap_or(DEFAULT_SWEEP_GRID), 2)?;
    let table = crate::sweep::run_sweep_with(
        &r.cfg.trajectory,
        lo,
        hi,
        n,
        &crate::sweep::SweepOptions {
            ep_tol: r.tol,
            ..Default::default()
        },
    )?;
    write_bytes(r.out.as_deref(), &table_bytes(&table, r.format)?, stdout)
}

fn ep_csv(records: &[EpRecord]) -> String {
    let mut s = String::from("a_star,b_star,E_re,E_im,residual,method\n");
    for e in records {
        s.push_str(&format!(
            "{},{},{},{},{},{:?}\n",
            fmt_f64(e.a_star),
            e.b_star.map(fmt_f64).unwrap_or_default(),
            fmt_f64(e.eigenvalue.re),
            fmt_f64(e.eigenvalue.im),
            fmt_f64(e.residual),
            e.method
        ));
    }
    s
}

fn cmd_ep_find(c: &Common, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = resolve(c)?;
    let records = match r.cfg.search {
        SearchMode::OneD => {
            let (lo, hi) = require_range(&r)?;
            let n = require_grid(r.grid.unwrap_or(DEFAULT_LOCATOR_GRID), 16)?;
            crate::ep::locate_eps_1d(&r.cfg.trajectory, lo, hi, n, r.tol)?
        }
        SearchMode::TwoD => {
            let t = &r.cfg.trajectory;
            if t.kind != ModelKind::Open {
                return Err(Failure::Config("2d search is only defined for model = open".into()));
            }
            if !matches!(t.coupling, CouplingModel::Constant { .. }) {
                return Err(Failure::Config("2d search needs a constant coupling".into()));
            }
            let bx = r
                .cfg
                .search_box
                .ok_or_else(|| Failure::Config("2d search needs box.p_min/p_max/q_min/q_max".into()))?;
            let n = require_grid(r.grid.unwrap_or(201), 4)?;
            locate_eps_2d(
                open_difference_discriminant(t.coupling.base()),
                open_center(r.cfg.mean_energy, r.cfg.mean_gamma),
                ModelKind::Open,
                bx,
                n,
                r.tol,
            )?
        }
    };
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    if records.is_empty() {
        writeln!(stdout, "no exceptional points in range").map_err(io)?;
    } else {
        for e in &records {
            let b = e.b_star.map(|b| format!(" b*={}", fmt_f64(b))).unwrap_or_default();
            writeln!(
                stdout,
                "a*={}{b} E={}{:+}i |Z|={:e}",
                fmt_f64(e.a_star),
                fmt_f64(e.eigenvalue.re),
                e.eigenvalue.im,
                e.residual
            )
            .map_err(io)?;
        }
    }
    if let Some(p) = &r.out {
        write_bytes(Some(p), ep_csv(&records).as_bytes(), stdout)?;
    }
    Ok(())
}

fn cmd_lineshape(c: &Common, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = resolve(c)?;
    let line_spec = r
        .cfg
        .line
        .ok_or_else(|| Failure::Config("lineshape.kind is required".into()))?;
    let source = match line_spec {
        LineSpec::Fixed(s) => s,
        LineSpec::FromTrajectory(a) => {
            let sys = eigensystem(&r.cfg.trajectory.matrix_at(a));
            let pair = ResonancePair::from_eigenvalues(sys.eigenvalues).map_err(|e| Failure::Config(e.to_string()))?;
            if sys.defective {
                LineSource::DoublePole {
                    e_d: pair.e1,
                    g_d: pair.g1,
                }
            } else {
                LineSource::Pair(pair)
            }
        }
    };
    let (lo, hi) = require_range(&r)?;
    let n = require_grid(r.grid.unwrap_or(DEFAULT_LINE_GRID), 2)?;
    let shape = sample_line_shape(&source, lo, hi, n);
    let bytes = match r.format {
        ExportFormat::Csv => shape.to_csv().into_bytes(),
        ExportFormat::Json => {
            let mut v = serde_json::to_vec_pretty(&shape).map_err(|e| Failure::Runtime(e.to_string()))?;
            v.push(b'\n');
            v
        }
    };
    write_bytes(r.out.as_deref(), &bytes, stdout)
}

fn cmd_regimes(c: &Common, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = resolve(c)?;
    let (lo, hi) = require_range(&r)?;
    let n = require_grid(r.grid.unwrap_or(DEFAULT_SWEEP_GRID), 2)?;
    let mut s = String::from("a,regime,Z_re,Z_im\n");
    for a in uniform_grid(lo, hi, n) {
        let z = family_z(&r.cfg.trajectory.params_at(a));
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(a),
            classify_z(z, r.tol).code(),
            fmt_f64(z.re),
            fmt_f64(z.im)
        ));
    }
    write_bytes(r.out.as_deref(), s.as_bytes(), stdout)
}
