//! Extended-precision reference decomposition used to check `spectral`.
//!
//! Everything here runs in double-double arithmetic and shares no numerical
//! code with the working-precision path: eigenvalues come from the quadratic
//! formula, eigenvectors from adjugate columns of `m − λ`, followed by one
//! shifted inverse-iteration step.

pub mod dd;

use num_complex::Complex64;

use crate::model::Matrix2;
use dd::{Cdd, Dd};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleReport {
    pub eigenvalues: [Cdd; 2],
    /// Unit (conjugate-norm) eigenvectors; both slots hold the same
    /// direction when the input is defective.
    pub vectors: [[Cdd; 2]; 2],
    /// `|m·v_k − λ_k·v_k|∞` in extended precision.
    pub residuals: [f64; 2],
    /// `|λ_1 + λ_2 − tr m| / scale`.
    pub trace_error: f64,
    /// `|λ_1·λ_2 − det m| / scale²`.
    pub det_error: f64,
    pub gap: f64,
    pub defective: bool,
}

impl OracleReport {
    pub fn eigenvalues_f64(&self) -> [Complex64; 2] {
        self.eigenvalues.map(to_c64)
    }

    pub fn vector_f64(&self, k: usize) -> [Complex64; 2] {
        self.vectors[k].map(to_c64)
    }

    /// Relative eigenvalue disagreement with `other`, after matching the
    /// two values by the better of the two pairings.
    pub fn agreement(&self, other: [Complex64; 2]) -> f64 {
        let mine = self.eigenvalues_f64();
        let scale = mine[0].norm().max(mine[1].norm()).max(f64::MIN_POSITIVE);
        let keep = (mine[0] - other[0]).norm().max((mine[1] - other[1]).norm());
        let swap = (mine[0] - other[1]).norm().max((mine[1] - other[0]).norm());
        keep.min(swap) / scale
    }
}

fn to_c64(z: Cdd) -> Complex64 {
    let (re, im) = z.to_parts();
    Complex64::new(re, im)
}

fn lift(z: Complex64) -> Cdd {
    Cdd::from_parts(z.re, z.im)
}

fn unit(v: [Cdd; 2]) -> Option<[Cdd; 2]> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n.is_zero() || !n.hi.is_finite() {
        return None;
    }
    let inv = Dd::ONE / n;
    Some([v[0].scale(inv), v[1].scale(inv)])
}

fn apply(m: &[[Cdd; 2]; 2], v: [Cdd; 2]) -> [Cdd; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn max_component(v: [Cdd; 2]) -> Dd {
    v[0].abs().max(v[1].abs())
}

/// `|m·v − λ·v|∞` evaluated in double-double.
pub fn residual_check(m: &Matrix2, lambda: Complex64, v: [Complex64; 2]) -> f64 {
    let mm = lift_matrix(m);
    let lam = lift(lambda);
    let v = v.map(lift);
    let mv = apply(&mm, v);
    max_component([mv[0] - lam * v[0], mv[1] - lam * v[1]]).to_f64()
}

fn lift_matrix(m: &Matrix2) -> [[Cdd; 2]; 2] {
    [[lift(m.h11), lift(m.h12)], [lift(m.h21), lift(m.h22)]]
}

/// Reference eigen-decomposition of `m`.
pub fn reference_eigensystem(m: &Matrix2) -> OracleReport {
    let mm = lift_matrix(m);
    let [[a, b], [c, d]] = mm;
    let scale = m.max_abs().max(1.0);

    let half = Dd::from_f64(0.5);
    let tr = a + d;
    let det = a * d - b * c;
    let diff = a - d;
    let four = Cdd::from_parts(4.0, 0.0);
    let root = (diff * diff + four * b * c).sqrt();
    let lambdas = [(tr + root).scale(half), (tr - root).scale(half)];
    let gap = (lambdas[0] - lambdas[1]).abs().to_f64();

    let mut vectors = [[Cdd::ZERO; 2]; 2];
    let basis = [
        [Cdd::from_parts(1.0, 0.0), Cdd::ZERO],
        [Cdd::ZERO, Cdd::from_parts(1.0, 0.0)],
    ];
    for k in 0..2 {
        let lam = lambdas[k];
        let (p, s) = (a - lam, d - lam);
        // adjugate of [[p, b], [c, s]] is [[s, −b], [−c, p]]
        let col1 = [s, -c];
        let col2 = [-b, p];
        let n1 = col1[0].norm_sqr() + col1[1].norm_sqr();
        let n2 = col2[0].norm_sqr() + col2[1].norm_sqr();
        let pick = if n1.hi >= n2.hi { col1 } else { col2 };
        let mut v = unit(pick).unwrap_or(basis[k]);

        // One inverse-iteration step with a tiny shift off the eigenvalue.
        let mu = lam + Cdd::from_parts(1e-24 * scale, 1e-24 * scale);
        let (p, s) = (a - mu, d - mu);
        let det_shift = p * s - b * c;
        if !det_shift.re.is_zero() || !det_shift.im.is_zero() {
            let x = [(s * v[0] - b * v[1]) / det_shift, (p * v[1] - c * v[0]) / det_shift];
            if let Some(u) = unit(x) {
                v = u;
            }
        }
        vectors[k] = v;
    }

    let sin_angle = (vectors[0][0] * vectors[1][1] - vectors[0][1] * vectors[1][0])
        .abs()
        .to_f64();
    let defective = gap < 1e-15 * scale && sin_angle < 1e-7;
    if defective {
        vectors[1] = vectors[0];
    }

    let mut residuals = [0.0; 2];
    for k in 0..2 {
        let mv = apply(&mm, vectors[k]);
        let lam = lambdas[k];
        residuals[k] = max_component([mv[0] - lam * vectors[k][0], mv[1] - lam * vectors[k][1]]).to_f64();
    }

    let trace_error = (lambdas[0] + lambdas[1] - tr).abs().to_f64() / scale;
    let det_error = (lambdas[0] * lambdas[1] - det).abs().to_f64() / (scale * scale);

    OracleReport {
        eigenvalues: lambdas,
        vectors,
        residuals,
        trace_error,
        det_error,
        gap,
        defective,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_is_exact() {
        let m = Matrix2::diagonal(c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        let r = reference_eigensystem(&m);
        let mut ev: Vec<f64> = r.eigenvalues_f64().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![1.0, 2.0]);
        assert!(r.residuals.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn exact_eigenpair_has_zero_residual() {
        let m = Matrix2::diagonal(c(1.0, 0.5), c(-2.0, 0.0)).unwrap();
        assert_eq!(residual_check(&m, c(1.0, 0.5), [c(1.0, 0.0), c(0.0, 0.0)]), 0.0);
    }

    #[test]
    fn perturbed_vector_residual_scales_with_offset() {
        let m = Matrix2::new(c(0.3, 0.1), c(0.2, 0.0), c(0.2, 0.0), c(-0.4, 0.5)).unwrap();
        let r = reference_eigensystem(&m);
        let lam = r.eigenvalues_f64()[0];
        let mut v = r.vector_f64(0);
        v[0] += 1e-6;
        let res = residual_check(&m, lam, v);
        let expect = 1e-6 * m.max_abs();
        assert!(res > 0.1 * expect && res < 10.0 * expect, "{res}");
    }

    #[test]
    fn identities_hold_in_extended_precision() {
        let m = Matrix2::new(c(0.3, -0.7), c(0.11, 0.9), c(0.11, 0.9), c(-1.2, 0.25)).unwrap();
        let r = reference_eigensystem(&m);
        assert!(r.trace_error < 1e-30, "{}", r.trace_error);
        assert!(r.det_error < 1e-30, "{}", r.det_error);
        assert!(r.residuals.iter().all(|x| *x < 1e-20));
    }

    #[test]
    fn representable_ep_is_exactly_defective() {
        // same shape as the right preset, with ω₀ = 1/16 so that 2ω₀ is exact
        let w = c(0.0, 0.0625);
        let m = Matrix2::new(c(0.6 + 0.125, 0.5), w, w, c(0.6, 0.5)).unwrap();
        let r = reference_eigensystem(&m);
        assert!(r.gap < 1e-15, "{}", r.gap);
        assert!(r.defective);
        assert!(r.residuals.iter().all(|x| *x < 1e-15));
    }

    #[test]
    fn right_preset_ep_gap_floor() {
        // e1 − e2 is a multiple of 2⁻⁵³ near a = 3/5 while 2ω₀ = fl(0.1) is
        // not, so |D| ≥ ~5e-18 and the gap stays near 2e-9 at every float.
        let t = crate::sweep::fig1_presets().right.trajectory;
        let mut a = 0.6f64;
        let mut best = f64::INFINITY;
        for _ in 0..64 {
            a = f64::from_bits(a.to_bits() - 1);
        }
        for _ in 0..128 {
            best = best.min(reference_eigensystem(&t.matrix_at(a)).gap);
            a = f64::from_bits(a.to_bits() + 1);
        }
        assert!(best < 1e-8, "{best}");
        assert!(best > 1e-10, "{best}");
        let at = reference_eigensystem(&t.matrix_at(0.6));
        assert!(at.gap < 1e-8 && !at.defective);
    }
}
