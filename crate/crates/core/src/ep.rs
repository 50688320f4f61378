//! Spectral regimes and exceptional-point location.
//!
//! The 1D locator scans `|D(a)|`, where `D` is the characteristic
//! discriminant of the matrix, brackets each grid minimum and refines it by
//! golden-section search. A refined minimum is accepted as an exceptional point
//! when `|Z| = ½·√|D|` falls below the tolerance and the off-diagonal coupling
//! does not vanish (a vanishing coupling gives a diabolic, non-defective
//! crossing).
//!
//! The 2D locator solves `Re D = Im D = 0` over two free real parameters by
//! damped Newton iteration from coarse-grid seeds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EpError;
use crate::model::{
    AffineLaw, ComplexScalar, CouplingModel, Matrix2, ModelKind, OpenParams, ParamTrajectory, Params, PtVariant,
};
use crate::spectral::{discriminant, family_z};

/// Default acceptance tolerance on `|Z|`.
pub const DEFAULT_EP_TOL: f64 = 1e-8;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    /// `Z` real: energies split, widths equal.
    LevelRepulsion,
    /// `Z` imaginary: widths split, energies equal.
    WidthBifurcation,
    MixedComplex,
    AtEp,
}

impl RegimeTag {
    pub fn code(self) -> &'static str {
        match self {
            RegimeTag::LevelRepulsion => "LR",
            RegimeTag::WidthBifurcation => "WB",
            RegimeTag::MixedComplex => "MX",
            RegimeTag::AtEp => "EP",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Some(match s {
            "LR" => RegimeTag::LevelRepulsion,
            "WB" => RegimeTag::WidthBifurcation,
            "MX" => RegimeTag::MixedComplex,
            "EP" => RegimeTag::AtEp,
            _ => return None,
        })
    }
}

/// Tags the spectrum from the family discriminant `Z` with an absolute
/// tolerance band `tol`.
pub fn classify_regime(params: &Params, tol: f64) -> RegimeTag {
    classify_z(family_z(params), tol)
}

pub fn classify_z(z: Complex64, tol: f64) -> RegimeTag {
    if z.norm() < tol {
        RegimeTag::AtEp
    } else if z.im.abs() <= tol {
        RegimeTag::LevelRepulsion
    } else if z.re.abs() <= tol {
        RegimeTag::WidthBifurcation
    } else {
        RegimeTag::MixedComplex
    }
}

/// The free quantity a threshold constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdQuantity {
    /// `e_1 − e_2`, with `γ_1 = γ_2` and `ω = i·ω_0`.
    EnergyDifference,
    /// The gain/loss rate `γ`.
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub quantity: ThresholdQuantity,
    pub value: f64,
}

/// Closed-form EP conditions for the three special families.
///
/// * open, imaginary `ω = iω_0`, equal widths: `e_1 − e_2 = ±2ω_0`
/// * PT balanced: `γ = ±2|w|`
/// * PT lossy: `γ = ±4|w|`
pub fn analytic_ep_thresholds(params: &Params) -> Result<[Threshold; 2], EpError> {
    let (quantity, magnitude) = match params {
        Params::Open(p) => {
            if p.omega.re() != 0.0 {
                return Err(EpError::UnsupportedFamily("open family needs a purely imaginary coupling"));
            }
            if p.gamma1 != p.gamma2 {
                return Err(EpError::UnsupportedFamily("open family needs equal widths"));
            }
            (ThresholdQuantity::EnergyDifference, 2.0 * p.omega.im().abs())
        }
        Params::Pt(p) => {
            let w = p.w.get().norm();
            let factor = match p.variant {
                PtVariant::BalancedGainLoss => 2.0,
                PtVariant::LossyOnly => 4.0,
            };
            (ThresholdQuantity::Gamma, factor * w)
        }
    };
    Ok([
        Threshold { quantity, value: -magnitude },
        Threshold { quantity, value: magnitude },
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpMethod {
    Analytic,
    NumericScanRefine,
    NumericNewton2d,
}

/// A located exceptional point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpRecord {
    /// Parameter value; for 2D searches the first coordinate.
    pub a_star: f64,
    /// Second coordinate of a 2D search.
    pub b_star: Option<f64>,
    pub eigenvalue: Complex64,
    /// `|Z|` at the located point.
    pub residual: f64,
    pub method: EpMethod,
    pub family: ModelKind,
}

/// `|Z|` of the trajectory at `a`.
pub fn z_residual(m: &Matrix2) -> f64 {
    0.5 * discriminant(m).norm().sqrt()
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..400 {
        if hi - lo <= width {
            // Carry on down to floating resolution: |Z| ∝ √|a − a*| near a root.
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
                break;
            }
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
        if !(lo < x1 && x1 <= x2 && x2 < hi) {
            break;
        }
    }
    let candidates = [lo, x1, x2, hi];
    candidates
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(0.5 * (lo + hi))
}

pub fn uniform_grid(a_min: f64, a_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a_min];
    }
    let step = (a_max - a_min) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { a_max } else { a_min + step * i as f64 })
        .collect()
}

/// Numerically locates exceptional points of `traj` in `[a_min, a_max]`.
pub fn locate_eps_1d(
    traj: &ParamTrajectory,
    a_min: f64,
    a_max: f64,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<EpRecord>, EpError> {
    if !(a_min < a_max) || !a_min.is_finite() || !a_max.is_finite() {
        return Err(EpError::InvalidInterval { min: a_min, max: a_max });
    }
    if grid_n < 16 {
        return Err(EpError::GridTooSmall { got: grid_n, need: 16 });
    }
    let objective = |a: f64| discriminant(&traj.matrix_at(a)).norm();
    let grid = uniform_grid(a_min, a_max, grid_n);
    let values: Vec<f64> = grid.iter().map(|&a| objective(a)).collect();
    let span = a_max - a_min;

    let mut found: Vec<EpRecord> = Vec::new();
    for i in 0..grid_n {
        let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
        let right = if i + 1 == grid_n { f64::INFINITY } else { values[i + 1] };
        if !(values[i] <= left && values[i] <= right) {
            continue;
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid_n - 1)];
        let a = golden_section(&objective, lo, hi, 1e-12 * span);
        let m = traj.matrix_at(a);
        let residual = z_residual(&m);
        if residual >= tol || (m.h12.norm() == 0.0 && m.h21.norm() == 0.0) {
            continue;
        }
        if found.iter().any(|r| (r.a_star - a).abs() < 1e-9 * span.max(1.0)) {
            continue;
        }
        found.push(EpRecord {
            a_star: a,
            b_star: None,
            eigenvalue: 0.5 * m.trace(),
            residual,
            method: EpMethod::NumericScanRefine,
            family: traj.kind,
        });
    }
    found.sort_by(|x, y| x.a_star.total_cmp(&y.a_star));
    Ok(found)
}

/// Exceptional points of an affine trajectory solved in closed form.
///
/// Supported: open kind with constant imaginary coupling and identical width
/// laws, and both PT kinds with constant coupling. Only roots inside
/// `[a_min, a_max]` are returned.
pub fn analytic_eps_on_trajectory(traj: &ParamTrajectory, a_min: f64, a_max: f64) -> Result<Vec<EpRecord>, EpError> {
    let CouplingModel::Constant { .. } = traj.coupling else {
        return Err(EpError::UnsupportedFamily("closed form needs a constant coupling"));
    };
    let thresholds = analytic_ep_thresholds(&traj.params_at(a_min))?;
    // The free quantity as an affine law in a.
    let law = match traj.kind {
        ModelKind::Open => {
            if traj.width1 != traj.width2 {
                return Err(EpError::UnsupportedFamily("open family needs identical width laws"));
            }
            AffineLaw::new(
                traj.energy1.intercept - traj.energy2.intercept,
                traj.energy1.slope - traj.energy2.slope,
            )
        }
        ModelKind::PtBalanced | ModelKind::PtLossy => traj.width1,
    };
    if law.slope == 0.0 {
        return Ok(Vec::new());
    }
    let mut out: Vec<EpRecord> = thresholds
        .iter()
        .map(|t| (t.value - law.intercept) / law.slope)
        .filter(|a| *a >= a_min && *a <= a_max)
        .map(|a| {
            let m = traj.matrix_at(a);
            EpRecord {
                a_star: a,
                b_star: None,
                eigenvalue: 0.5 * m.trace(),
                residual: z_residual(&m),
                method: EpMethod::Analytic,
                family: traj.kind,
            }
        })
        .collect();
    out.sort_by(|x, y| x.a_star.total_cmp(&y.a_star));
    out.dedup_by(|x, y| x.a_star == y.a_star);
    Ok(out)
}

/// Rectangular search region for [`locate_eps_2d`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl SearchBox {
    fn contains(&self, p: f64, q: f64) -> bool {
        p >= self.p_min && p <= self.p_max && q >= self.q_min && q <= self.q_max
    }
}

/// Open-family discriminant as a function of `p = e_1 − e_2` and
/// `q = γ_1 − γ_2` at fixed coupling `ω`.
pub fn open_difference_discriminant(omega: ComplexScalar) -> impl Fn(f64, f64) -> Complex64 {
    move |p, q| {
        let d = Complex64::new(p, 0.5 * q);
        let w = omega.get();
        d * d + 4.0 * w * w
    }
}

/// Solves `D(p, q) = 0` inside `bx`.
///
/// Seeds are the local minima of `|D|` on a `grid_n × grid_n` grid; each is
/// polished by damped Newton on `(Re D, Im D)` with a central-difference
/// Jacobian. Seeds that fail to converge are dropped. Roots closer than 1e-8
/// are merged. `eigenvalue_at` maps a root to the coalesced eigenvalue.
pub fn locate_eps_2d<D, E>(
    disc: D,
    eigenvalue_at: E,
    family: ModelKind,
    bx: SearchBox,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<EpRecord>, EpError>
where
    D: Fn(f64, f64) -> Complex64,
    E: Fn(f64, f64) -> Complex64,
{
    if !(bx.p_min < bx.p_max) {
        return Err(EpError::InvalidInterval { min: bx.p_min, max: bx.p_max });
    }
    if !(bx.q_min < bx.q_max) {
        return Err(EpError::InvalidInterval { min: bx.q_min, max: bx.q_max });
    }
    if grid_n < 4 {
        return Err(EpError::GridTooSmall { got: grid_n, need: 4 });
    }
    let ps = uniform_grid(bx.p_min, bx.p_max, grid_n);
    let qs = uniform_grid(bx.q_min, bx.q_max, grid_n);
    let mag: Vec<Vec<f64>> = ps
        .iter()
        .map(|&p| qs.iter().map(|&q| disc(p, q).norm()).collect())
        .collect();

    let mut seeds = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let v = mag[i][j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= grid_n as i64 || nj >= grid_n as i64 {
                        continue;
                    }
                    if mag[ni as usize][nj as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push((ps[i], qs[j]));
            }
        }
    }

    let scale = (bx.p_max - bx.p_min).max(bx.q_max - bx.q_min);
    let mut roots: Vec<EpRecord> = Vec::new();
    for (p0, q0) in seeds {
        let Some((p, q)) = newton_2d(&disc, p0, q0, scale) else {
            log::debug!("2d newton did not converge from seed ({p0}, {q0})");
            continue;
        };
        if !bx.contains(p, q) {
            continue;
        }
        let residual = 0.5 * disc(p, q).norm().sqrt();
        if residual >= tol {
            continue;
        }
        if roots
            .iter()
            .any(|r| (r.a_star - p).hypot(r.b_star.unwrap_or(f64::NAN) - q) < 1e-8)
        {
            continue;
        }
        roots.push(EpRecord {
            a_star: p,
            b_star: Some(q),
            eigenvalue: eigenvalue_at(p, q),
            residual,
            method: EpMethod::NumericNewton2d,
            family,
        });
    }
    roots.sort_by(|x, y| {
        x.a_star
            .total_cmp(&y.a_star)
            .then(x.b_star.unwrap_or(0.0).total_cmp(&y.b_star.unwrap_or(0.0)))
    });
    Ok(roots)
}

fn newton_2d<D: Fn(f64, f64) -> Complex64>(disc: &D, mut p: f64, mut q: f64, scale: f64) -> Option<(f64, f64)> {
    let mut f = disc(p, q);
    for _ in 0..100 {
        let fnorm = f.norm();
        if fnorm == 0.0 {
            return Some((p, q));
        }
        let h = 1e-7 * scale.max(p.abs()).max(q.abs()).max(1e-300);
        let dp = (disc(p + h, q) - disc(p - h, q)) / (2.0 * h);
        let dq = (disc(p, q + h) - disc(p, q - h)) / (2.0 * h);
        // [[dp.re, dq.re], [dp.im, dq.im]] · [sp, sq] = −[f.re, f.im]
        let det = dp.re * dq.im - dq.re * dp.im;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let sp = (-f.re * dq.im + dq.re * f.im) / det;
        let sq = (-dp.re * f.im + dp.im * f.re) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (np, nq) = (p + t * sp, q + t * sq);
            let nf = disc(np, nq);
            if nf.norm() < fnorm {
                p = np;
                q = nq;
                f = nf;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        // Stalled at floating resolution; the caller judges the residual.
        if !accepted || t * sp.hypot(sq) <= 4.0 * f64::EPSILON * p.abs().max(q.abs()) {
            return Some((p, q));
        }
    }
    Some((p, q))
}

/// Coalesced eigenvalue of the open family at difference coordinates,
/// given the averages `ē = (e_1+e_2)/2` and `γ̄ = (γ_1+γ_2)/2`.
pub fn open_center(mean_energy: f64, mean_gamma: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |_, _| Complex64::new(mean_energy, 0.5 * mean_gamma)
}

/// Builds open-family parameters from mean and difference coordinates.
pub fn open_from_differences(mean_energy: f64, mean_gamma: f64, p: f64, q: f64, omega: ComplexScalar) -> OpenParams {
    OpenParams {
        e1: mean_energy + 0.5 * p,
        e2: mean_energy - 0.5 * p,
        gamma1: mean_gamma + 0.5 * q,
        gamma2: mean_gamma - 0.5 * q,
        omega,
    }
}
