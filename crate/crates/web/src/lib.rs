//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain numbers or a `key = value`
//! configuration string and returns a JSON document for the page to plot.
//! The `*_json` functions hold the logic and are usable natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ep_core::config::{LineSpec, RunConfig};
use ep_core::ep::{locate_eps_1d, EpRecord};
use ep_core::scattering::{sample_line_shape, LineSource, ResonancePair};
use ep_core::spectral::eigensystem;
use ep_core::sweep::{run_sweep_with, SweepOptions};

const MAX_POINTS: usize = 20_001;

#[derive(Serialize)]
struct Ep {
    a: f64,
    re: f64,
    im: f64,
}

impl From<&EpRecord> for Ep {
    fn from(e: &EpRecord) -> Self {
        Ep {
            a: e.a_star,
            re: e.eigenvalue.re,
            im: e.eigenvalue.im,
        }
    }
}

/// Column layout; `null` stands in for the infinite sentinels at an EP.
#[derive(Serialize)]
struct SweepDoc {
    a: Vec<f64>,
    energy: [Vec<f64>; 2],
    half_width: [Vec<f64>; 2],
    rigidity: [Vec<f64>; 2],
    b_diag: [Vec<Option<f64>>; 2],
    regime: Vec<&'static str>,
    eps: Vec<Ep>,
}

#[derive(Serialize)]
struct LineDoc {
    e: Vec<f64>,
    sigma: Vec<f64>,
    peaks: Vec<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn check_points(n: usize) -> Result<usize, String> {
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("grid must have between 2 and {MAX_POINTS} points"));
    }
    Ok(n)
}

fn parse(config: &str) -> Result<(RunConfig, (f64, f64)), String> {
    let cfg = RunConfig::parse(config).map_err(|e| e.to_string())?;
    let range = cfg.range.ok_or("set range.min and range.max (or a preset)")?;
    Ok((cfg, range))
}

/// Sweeps the trajectory described by `config` on `n` points.
pub fn sweep_json(config: &str, n: usize) -> Result<String, String> {
    let (cfg, (lo, hi)) = parse(config)?;
    let n = check_points(n)?;
    let opts = SweepOptions {
        ep_tol: cfg.tol,
        regime_tol: cfg.tol,
        ..Default::default()
    };
    let table = run_sweep_with(&cfg.trajectory, lo, hi, n, &opts).map_err(|e| e.to_string())?;
    let col = |f: &dyn Fn(&ep_core::sweep::SweepRow) -> f64| table.rows.iter().map(f).collect::<Vec<_>>();
    let doc = SweepDoc {
        a: col(&|r| r.a),
        energy: [col(&|r| r.e1), col(&|r| r.e2)],
        half_width: [col(&|r| r.g1_half), col(&|r| r.g2_half)],
        rigidity: [col(&|r| r.r[0]), col(&|r| r.r[1])],
        b_diag: [
            table.rows.iter().map(|r| finite(r.b_abs[0][0])).collect(),
            table.rows.iter().map(|r| finite(r.b_abs[1][1])).collect(),
        ],
        regime: table.rows.iter().map(|r| r.regime.code()).collect(),
        eps: table.eps.iter().map(Ep::from).collect(),
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

/// Exceptional points of the trajectory described by `config`.
pub fn find_eps_json(config: &str) -> Result<String, String> {
    let (cfg, (lo, hi)) = parse(config)?;
    let n = cfg.grid_n.unwrap_or(1024).max(16);
    let eps = locate_eps_1d(&cfg.trajectory, lo, hi, n, cfg.tol).map_err(|e| e.to_string())?;
    serde_json::to_string(&eps.iter().map(Ep::from).collect::<Vec<_>>()).map_err(|e| e.to_string())
}

/// Cross section of the trajectory's two resonances at parameter `a`
/// (a double pole if the eigenvalues coalesce there).
pub fn line_shape_json(config: &str, a: f64, e_min: f64, e_max: f64, n: usize) -> Result<String, String> {
    let cfg = RunConfig::parse(config).map_err(|e| e.to_string())?;
    let n = check_points(n)?;
    if !(e_min < e_max) {
        return Err("energy range is empty".into());
    }
    let source = match cfg.line {
        Some(LineSpec::Fixed(s)) => s,
        _ => {
            let sys = eigensystem(&cfg.trajectory.matrix_at(a));
            let pair = ResonancePair::from_eigenvalues(sys.eigenvalues).map_err(|e| e.to_string())?;
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
    let shape = sample_line_shape(&source, e_min, e_max, n);
    let doc = LineDoc {
        e: shape.samples.iter().map(|p| p.e).collect(),
        sigma: shape.samples.iter().map(|p| p.sigma).collect(),
        peaks: shape.local_maxima().into_iter().map(|i| shape.samples[i].e).collect(),
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn sweep(config: &str, n: usize) -> Result<String, JsValue> {
    sweep_json(config, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn find_eps(config: &str) -> Result<String, JsValue> {
    find_eps_json(config).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn line_shape(config: &str, a: f64, e_min: f64, e_max: f64, n: usize) -> Result<String, JsValue> {
    line_shape_json(config, a, e_min, e_max, n).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_sweep_has_both_eps() {
        let doc: serde_json::Value = serde_json::from_str(&sweep_json("preset = fig1-right", 241).unwrap()).unwrap();
        let eps = doc["eps"].as_array().unwrap();
        assert_eq!(eps.len(), 2);
        assert!((eps[0]["a"].as_f64().unwrap() - 0.6).abs() < 1e-9);
        assert_eq!(doc["a"].as_array().unwrap().len(), 241);
    }

    #[test]
    fn find_eps_left_panel() {
        let v: serde_json::Value = serde_json::from_str(&find_eps_json("preset = fig1-left").unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 1);
        assert!((v[0]["a"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn line_shape_far_from_ep_has_peaks() {
        let v: serde_json::Value =
            serde_json::from_str(&line_shape_json("preset = fig1-right", 0.0, -1.0, 2.0, 1501).unwrap()).unwrap();
        assert!(!v["peaks"].as_array().unwrap().is_empty());
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(sweep_json("model = nope", 10).is_err());
        assert!(sweep_json("preset = fig1-right", 1).is_err());
        assert!(sweep_json("model = open", 10).is_err());
    }
}
