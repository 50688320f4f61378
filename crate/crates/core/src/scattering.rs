//! One-channel S matrix for two resonances and the double-pole line shape.
//!
//! Widths here are positive decay widths `Γ_k ≥ 0` with poles at
//! `E_k − iΓ_k/2`. Eigenvalues from the Hamiltonian side carry whatever sign
//! their width laws gave them; use [`ResonancePair::from_eigenvalues`] to
//! convert.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonancePair {
    pub e1: f64,
    pub e2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl ResonancePair {
    pub fn new(e1: f64, g1: f64, e2: f64, g2: f64) -> Result<Self, ModelError> {
        if ![e1, e2, g1, g2].iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite { what: "resonance parameter" });
        }
        if g1 < 0.0 || g2 < 0.0 {
            return Err(ModelError::NegativeWidth { what: "resonance width" });
        }
        Ok(Self { e1, e2, g1, g2 })
    }

    /// `E_k = Re ℰ_k`, `Γ_k = 2·|Im ℰ_k|`.
    pub fn from_eigenvalues(eigenvalues: [Complex64; 2]) -> Result<Self, ModelError> {
        let [a, b] = eigenvalues;
        Self::new(a.re, 2.0 * a.im.abs(), b.re, 2.0 * b.im.abs())
    }
}

fn factor(e: f64, pole: f64, width: f64) -> Complex64 {
    if width == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let x = e - pole;
    Complex64::new(x, 0.5 * width) / Complex64::new(x, -0.5 * width)
}

/// `S(E) = Π_k (E − E_k + iΓ_k/2)/(E − E_k − iΓ_k/2)`.
pub fn s_matrix(res: &ResonancePair, e: f64) -> Complex64 {
    factor(e, res.e1, res.g1) * factor(e, res.e2, res.g2)
}

/// `S(E) = 1 + 2iΓ_d/x − Γ_d²/x²` with `x = E − E_d − iΓ_d/2`.
pub fn s_matrix_double_pole(e_d: f64, g_d: f64, e: f64) -> Complex64 {
    let x = Complex64::new(e - e_d, -0.5 * g_d);
    let u = Complex64::new(0.0, g_d) / x;
    // 1 + 2u' − u'² with u' = iΓ/x is the expanded (x + iΓ)²/x².
    Complex64::new(1.0, 0.0) + 2.0 * u + u * u
}

/// `σ ∝ |1 − S|²`.
pub fn cross_section(s: Complex64) -> f64 {
    (Complex64::new(1.0, 0.0) - s).norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineSource {
    Pair(ResonancePair),
    DoublePole { e_d: f64, g_d: f64 },
}

impl LineSource {
    pub fn s_at(&self, e: f64) -> Complex64 {
        match self {
            LineSource::Pair(r) => s_matrix(r, e),
            LineSource::DoublePole { e_d, g_d } => s_matrix_double_pole(*e_d, *g_d, e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    pub e: f64,
    pub s: Complex64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineShape {
    pub samples: Vec<LineSample>,
}

impl LineShape {
    /// Indices of strict interior local maxima of `σ` (plateaus count once).
    pub fn local_maxima(&self) -> Vec<usize> {
        let s = &self.samples;
        let mut out = Vec::new();
        let mut i = 1;
        while i + 1 < s.len() {
            if s[i].sigma > s[i - 1].sigma {
                let mut j = i;
                while j + 1 < s.len() && s[j + 1].sigma == s[i].sigma {
                    j += 1;
                }
                if j + 1 < s.len() && s[j + 1].sigma < s[i].sigma {
                    out.push(i);
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("E,S_re,S_im,sigma\n");
        for p in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::sweep::fmt_f64(p.e),
                crate::sweep::fmt_f64(p.s.re),
                crate::sweep::fmt_f64(p.s.im),
                crate::sweep::fmt_f64(p.sigma)
            ));
        }
        out
    }
}

/// Samples `σ(E)` on `n` uniform points of `[e_min, e_max]`.
pub fn sample_line_shape(source: &LineSource, e_min: f64, e_max: f64, n: usize) -> LineShape {
    let samples = crate::ep::uniform_grid(e_min, e_max, n.max(2))
        .into_iter()
        .map(|e| {
            let s = source.s_at(e);
            LineSample { e, s, sigma: cross_section(s) }
        })
        .collect();
    LineShape { samples }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_is_transparent() {
        let r = ResonancePair::new(0.0, 0.1, 1.0, 0.2).unwrap();
        let s = s_matrix(&r, 1e6);
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(cross_section(s) < 1e-12);
        assert!((s_matrix_double_pole(0.0, 1.0, 1e6) - 1.0).norm() < 1e-5);
    }

    #[test]
    fn isolated_resonance_peak() {
        // E_2 far away: the first factor is exactly −1 at E = E_1
        let r = ResonancePair::new(0.0, 0.1, 1000.0, 0.1).unwrap();
        let s = s_matrix(&r, 0.0);
        assert!((s + 1.0).norm() < 1e-3);
        assert!((cross_section(s) - 4.0).abs() < 1e-3);
    }

    #[test]
    fn unitarity_on_real_axis() {
        let r = ResonancePair::new(0.3, 0.2, 0.35, 0.05).unwrap();
        for i in 0..1000 {
            let e = -1.0 + 0.003 * i as f64;
            assert!((s_matrix(&r, e).norm() - 1.0).abs() < 1e-12);
            assert!((s_matrix_double_pole(0.3, 0.2, e).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn double_pole_center_is_a_zero() {
        let s = s_matrix_double_pole(0.7, 0.4, 0.7);
        assert!(cross_section(s) < 1e-18, "{s}");
    }

    #[test]
    fn double_pole_two_symmetric_peaks() {
        let shape = sample_line_shape(&LineSource::DoublePole { e_d: 0.0, g_d: 1.0 }, -5.0, 5.0, 1001);
        let peaks = shape.local_maxima();
        assert_eq!(peaks.len(), 2);
        let (a, b) = (shape.samples[peaks[0]].e, shape.samples[peaks[1]].e);
        assert!((a + b).abs() < 1e-12);
        assert!((a + 0.5).abs() < 1e-9);
        assert!(shape.samples[500].sigma < 1e-18);
    }

    #[test]
    fn single_resonance_shape() {
        let r = ResonancePair::new(0.0, 0.2, 50.0, 0.2).unwrap();
        let shape = sample_line_shape(&LineSource::Pair(r), -1.0, 1.0, 2001);
        let peaks = shape.local_maxima();
        assert_eq!(peaks.len(), 1);
        let p = shape.samples[peaks[0]];
        assert!(p.e.abs() < 2e-3);
        assert!((p.sigma - 4.0).abs() < 1e-2);
    }

    #[test]
    fn two_point_sampling() {
        let shape = sample_line_shape(&LineSource::DoublePole { e_d: 0.0, g_d: 1.0 }, -1.0, 1.0, 2);
        assert_eq!(shape.samples.len(), 2);
        assert_eq!(shape.samples[0].e, -1.0);
        assert_eq!(shape.samples[1].e, 1.0);
        assert!(shape.local_maxima().is_empty());
    }

    #[test]
    fn conversion_takes_absolute_widths() {
        let r = ResonancePair::from_eigenvalues([Complex64::new(1.0, 0.3), Complex64::new(0.5, -0.2)]).unwrap();
        assert_eq!((r.g1, r.g2), (0.6, 0.4));
        assert!(ResonancePair::new(0.0, -1.0, 0.0, 1.0).is_err());
    }
}
