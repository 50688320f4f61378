//! Parameter sweeps with branch continuity, plus table export.
//!
//! A sweep runs in two phases. Per-point eigensystems are computed
//! independently (in parallel with the `parallel` feature), then a serial
//! pass stitches them: [`pair_branches`] chooses the labeling that keeps the
//! eigenvalues continuous and the eigenvector signs are propagated so that
//! component phases are comparable from row to row.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::f64::consts::PI;
use std::io::Write;

use crate::ep::{classify_regime, locate_eps_1d, uniform_grid, EpRecord, RegimeTag, DEFAULT_EP_TOL};
use crate::error::{EpError, ExportError};
use crate::model::{AffineLaw, ComplexScalar, CouplingModel, ParamTrajectory, PtVariant};
use crate::spectral::{eigensystem, mixing_coefficients, EigenSystem, Vec2};

pub const CSV_HEADER: &str =
    "a,E1,G1_half,E2,G2_half,b11,b12,b21,b22,th11,th12,th21,th22,r1,r2,A1,A2,regime,near_ep";

/// A named trajectory with its default sweep range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub trajectory: ParamTrajectory,
    pub a_min: f64,
    pub a_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig1Presets {
    /// PT balanced: `e = 0.5`, `γ(a) = 0.05·a`, `w = 0.05`.
    pub left: Preset,
    /// Open: `e_1 = 1 − 0.5a`, `e_2 = a`, `γ_1/2 = γ_2/2 = 0.5`, `ω = 0.05i`.
    pub right: Preset,
}

pub fn fig1_presets() -> Fig1Presets {
    let w = ComplexScalar::real(0.05).expect("finite");
    let omega = ComplexScalar::imag(0.05).expect("finite");
    Fig1Presets {
        left: Preset {
            name: "fig1_left",
            trajectory: ParamTrajectory::pt(
                PtVariant::BalancedGainLoss,
                AffineLaw::constant(0.5),
                AffineLaw::new(0.0, 0.05),
                CouplingModel::Constant { value: w },
            ),
            a_min: 0.0,
            a_max: 4.0,
        },
        right: Preset {
            name: "fig1_right",
            trajectory: ParamTrajectory::open(
                AffineLaw::new(1.0, -0.5),
                AffineLaw::new(0.0, 1.0),
                AffineLaw::constant(1.0),
                AffineLaw::constant(1.0),
                CouplingModel::Constant { value: omega },
            ),
            a_min: 0.0,
            a_max: 1.2,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    /// Acceptance tolerance of located EPs, in `|Z|` units.
    pub ep_tol: f64,
    /// Tolerance band for regime tags.
    pub regime_tol: f64,
    /// `near_ep` holds within this fraction of the EP spacing (or of the
    /// sweep range when fewer than two EPs are found).
    pub near_ep_fraction: f64,
    /// Grid used by the EP locator; never coarser than the sweep grid.
    pub locator_grid: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            ep_tol: DEFAULT_EP_TOL,
            regime_tol: DEFAULT_EP_TOL,
            near_ep_fraction: 0.05,
            locator_grid: 1024,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub e1: f64,
    pub g1_half: f64,
    pub e2: f64,
    pub g2_half: f64,
    /// `|b_ij|`, row-major.
    pub b_abs: [[f64; 2]; 2],
    /// `θ_ij` in radians, row-major.
    pub theta: [[f64; 2]; 2],
    pub r: [f64; 2],
    pub norms: [f64; 2],
    pub regime: RegimeTag,
    pub near_ep: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub n: usize,
}

/// Component phase jumps across one exceptional point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseJump {
    pub a_star: f64,
    pub a_before: f64,
    pub a_after: f64,
    /// `θ_ij(after) − θ_ij(before)`, wrapped into (−π, π].
    pub jumps: [[f64; 2]; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub trajectory: ParamTrajectory,
    pub grid: GridSpec,
    pub rows: Vec<SweepRow>,
    pub eps: Vec<EpRecord>,
    pub phase_jumps: Vec<PhaseJump>,
}

/// What the stitching pass remembers about the previous grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchState {
    pub eigenvalues: [Complex64; 2],
    /// Last non-defective right eigenvectors, in tracked order and gauge.
    pub right: Option<[Vec2; 2]>,
    /// Whether the previous step swapped the pointwise labels.
    pub swapped: bool,
}

impl BranchState {
    pub fn from_system(sys: &EigenSystem) -> Self {
        Self {
            eigenvalues: sys.eigenvalues,
            right: (!sys.defective).then_some(sys.right),
            swapped: false,
        }
    }
}

/// Decides whether the pointwise labels of `current` must be swapped to stay
/// continuous with `prev`. Ties keep the previous step's choice.
pub fn pair_branches(prev: &BranchState, current: &EigenSystem) -> bool {
    let [p0, p1] = prev.eigenvalues;
    let [c0, c1] = current.eigenvalues;
    let keep = (c0 - p0).norm() + (c1 - p1).norm();
    let swap = (c1 - p0).norm() + (c0 - p1).norm();
    let tie = (keep - swap).abs() <= 1e-9 * keep.max(swap);
    if tie {
        prev.swapped
    } else {
        swap < keep
    }
}

fn inner(u: Vec2, v: Vec2) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

/// Applies the pairing and sign continuity to `sys`, returning the tracked
/// system and the next state.
pub fn stitch(prev: &BranchState, sys: &EigenSystem) -> (EigenSystem, BranchState) {
    let swapped = pair_branches(prev, sys);
    let mut tracked = if swapped { sys.swapped() } else { *sys };
    if !tracked.defective {
        if let Some(reference) = prev.right {
            for k in 0..2 {
                if inner(reference[k], tracked.right[k]).re < 0.0 {
                    tracked.negate(k);
                }
            }
        }
    }
    let next = BranchState {
        eigenvalues: tracked.eigenvalues,
        right: if tracked.defective { prev.right } else { Some(tracked.right) },
        swapped,
    };
    (tracked, next)
}

fn eigensystems(traj: &ParamTrajectory, grid: &[f64]) -> Vec<EigenSystem> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(|&a| eigensystem(&traj.matrix_at(a))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(|&a| eigensystem(&traj.matrix_at(a))).collect()
    }
}

/// Stitched eigensystems along `grid`.
pub fn track(traj: &ParamTrajectory, grid: &[f64]) -> Vec<EigenSystem> {
    let raw = eigensystems(traj, grid);
    let mut out = Vec::with_capacity(raw.len());
    let mut state: Option<BranchState> = None;
    for sys in &raw {
        let (tracked, next) = match &state {
            None => (*sys, BranchState::from_system(sys)),
            Some(prev) => stitch(prev, sys),
        };
        out.push(tracked);
        state = Some(next);
    }
    out
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

fn jumps_between(before: &EigenSystem, after: &EigenSystem) -> [[f64; 2]; 2] {
    let tb = mixing_coefficients(before).phase;
    let ta = mixing_coefficients(after).phase;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = wrap_angle(ta[i][j] - tb[i][j]);
        }
    }
    out
}

/// Phase jumps across `a_star` measured at `a_star ± h`.
pub fn phase_jump_across(traj: &ParamTrajectory, a_star: f64, h: f64) -> PhaseJump {
    let grid = [a_star - h, a_star + h];
    let tracked = track(traj, &grid);
    PhaseJump {
        a_star,
        a_before: grid[0],
        a_after: grid[1],
        jumps: jumps_between(&tracked[0], &tracked[1]),
    }
}

pub fn run_sweep(traj: &ParamTrajectory, a_min: f64, a_max: f64, grid_n: usize) -> Result<SweepTable, EpError> {
    run_sweep_with(traj, a_min, a_max, grid_n, &SweepOptions::default())
}

pub fn run_sweep_with(
    traj: &ParamTrajectory,
    a_min: f64,
    a_max: f64,
    grid_n: usize,
    opts: &SweepOptions,
) -> Result<SweepTable, EpError> {
    if !(a_min < a_max) || !a_min.is_finite() || !a_max.is_finite() {
        return Err(EpError::InvalidInterval { min: a_min, max: a_max });
    }
    if grid_n < 2 {
        return Err(EpError::GridTooSmall { got: grid_n, need: 2 });
    }
    let grid = uniform_grid(a_min, a_max, grid_n);
    let systems = track(traj, &grid);
    let eps = locate_eps_1d(traj, a_min, a_max, opts.locator_grid.max(grid_n).max(16), opts.ep_tol)?;

    let spacing = if eps.len() >= 2 {
        eps.windows(2)
            .map(|w| w[1].a_star - w[0].a_star)
            .fold(f64::INFINITY, f64::min)
    } else {
        a_max - a_min
    };
    let near_radius = opts.near_ep_fraction * spacing;

    let rows = grid
        .iter()
        .zip(&systems)
        .map(|(&a, sys)| {
            let mix = mixing_coefficients(sys);
            SweepRow {
                a,
                e1: sys.energy(0),
                g1_half: sys.half_width(0),
                e2: sys.energy(1),
                g2_half: sys.half_width(1),
                b_abs: mix.magnitude,
                theta: mix.phase,
                r: sys.rigidity,
                norms: sys.norms,
                regime: classify_regime(&traj.params_at(a), opts.regime_tol),
                near_ep: eps.iter().any(|e| (a - e.a_star).abs() < near_radius),
            }
        })
        .collect::<Vec<_>>();

    let mut phase_jumps = Vec::new();
    for ep in &eps {
        let before = (0..grid_n)
            .rev()
            .find(|&i| grid[i] < ep.a_star && !systems[i].defective);
        let after = (0..grid_n).find(|&i| grid[i] > ep.a_star && !systems[i].defective);
        if let (Some(i), Some(j)) = (before, after) {
            phase_jumps.push(PhaseJump {
                a_star: ep.a_star,
                a_before: grid[i],
                a_after: grid[j],
                jumps: jumps_between(&systems[i], &systems[j]),
            });
        }
    }

    Ok(SweepTable {
        trajectory: *traj,
        grid: GridSpec { a_min, a_max, n: grid_n },
        rows,
        eps,
        phase_jumps,
    })
}

/// Shortest round-trip decimal; `inf` for the sentinel, `-0` folded to `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else if x.is_nan() {
        // never produced by the library; kept distinguishable
        "nan".to_string()
    } else {
        format!("{x:?}")
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok()
}

impl SweepRow {
    fn csv_fields(&self) -> Vec<String> {
        let mut f = vec![
            fmt_f64(self.a),
            fmt_f64(self.e1),
            fmt_f64(self.g1_half),
            fmt_f64(self.e2),
            fmt_f64(self.g2_half),
        ];
        f.extend(self.b_abs.iter().flatten().map(|x| fmt_f64(*x)));
        f.extend(self.theta.iter().flatten().map(|x| fmt_f64(*x)));
        f.extend(self.r.iter().map(|x| fmt_f64(*x)));
        f.extend(self.norms.iter().map(|x| fmt_f64(*x)));
        f.push(self.regime.code().to_string());
        f.push(if self.near_ep { "1" } else { "0" }.to_string());
        f
    }
}

/// Serializes a float as a JSON number, or the string `"inf"` for sentinels.
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(if self.0 == 0.0 { 0.0 } else { self.0 })
        } else {
            s.serialize_str(&fmt_f64(self.0))
        }
    }
}

impl Serialize for SweepRow {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SweepRow", 19)?;
        st.serialize_field("a", &Num(self.a))?;
        st.serialize_field("E1", &Num(self.e1))?;
        st.serialize_field("G1_half", &Num(self.g1_half))?;
        st.serialize_field("E2", &Num(self.e2))?;
        st.serialize_field("G2_half", &Num(self.g2_half))?;
        st.serialize_field("b11", &Num(self.b_abs[0][0]))?;
        st.serialize_field("b12", &Num(self.b_abs[0][1]))?;
        st.serialize_field("b21", &Num(self.b_abs[1][0]))?;
        st.serialize_field("b22", &Num(self.b_abs[1][1]))?;
        st.serialize_field("th11", &Num(self.theta[0][0]))?;
        st.serialize_field("th12", &Num(self.theta[0][1]))?;
        st.serialize_field("th21", &Num(self.theta[1][0]))?;
        st.serialize_field("th22", &Num(self.theta[1][1]))?;
        st.serialize_field("r1", &Num(self.r[0]))?;
        st.serialize_field("r2", &Num(self.r[1]))?;
        st.serialize_field("A1", &Num(self.norms[0]))?;
        st.serialize_field("A2", &Num(self.norms[1]))?;
        st.serialize_field("regime", self.regime.code())?;
        st.serialize_field("near_ep", &u8::from(self.near_ep))?;
        st.end()
    }
}

#[derive(Serialize)]
struct EpJson {
    a_star: f64,
    eigenvalue: (f64, f64),
    residual: f64,
    method: crate::ep::EpMethod,
}

#[derive(Serialize)]
struct TableJson<'a> {
    trajectory: &'a ParamTrajectory,
    grid: &'a GridSpec,
    eps: Vec<EpJson>,
    rows: &'a [SweepRow],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

pub fn export_table<W: Write>(table: &SweepTable, format: ExportFormat, mut sink: W) -> Result<(), ExportError> {
    match format {
        ExportFormat::Csv => {
            let mut out = String::with_capacity(64 * (table.rows.len() + 1));
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.csv_fields().join(","));
                out.push('\n');
            }
            sink.write_all(out.as_bytes())?;
        }
        ExportFormat::Json => {
            let doc = TableJson {
                trajectory: &table.trajectory,
                grid: &table.grid,
                eps: table
                    .eps
                    .iter()
                    .map(|e| EpJson {
                        a_star: e.a_star,
                        eigenvalue: (e.eigenvalue.re, e.eigenvalue.im),
                        residual: e.residual,
                        method: e.method,
                    })
                    .collect(),
                rows: &table.rows,
            };
            serde_json::to_writer_pretty(&mut sink, &doc)?;
            sink.write_all(b"\n")?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn export_to_vec(table: &SweepTable, format: ExportFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    export_table(table, format, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Reads rows written by [`export_table`] in CSV form.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, ExportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(ExportError::Parse {
                line: 1,
                msg: "missing or unexpected header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let err = |msg: &str| ExportError::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 19 {
            return Err(err("expected 19 fields"));
        }
        let nums: Vec<f64> = fields[..17]
            .iter()
            .map(|f| parse_f64(f).ok_or_else(|| err("bad number")))
            .collect::<Result<_, _>>()?;
        rows.push(SweepRow {
            a: nums[0],
            e1: nums[1],
            g1_half: nums[2],
            e2: nums[3],
            g2_half: nums[4],
            b_abs: [[nums[5], nums[6]], [nums[7], nums[8]]],
            theta: [[nums[9], nums[10]], [nums[11], nums[12]]],
            r: [nums[13], nums[14]],
            norms: [nums[15], nums[16]],
            regime: RegimeTag::from_code(fields[17]).ok_or_else(|| err("bad regime code"))?,
            near_ep: match fields[18] {
                "0" => false,
                "1" => true,
                _ => return Err(err("near_ep must be 0 or 1")),
            },
        });
    }
    Ok(rows)
}
