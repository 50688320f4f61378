//! Eigenvalues and biorthogonal eigenvectors of 2×2 complex matrices, and the
//! observables derived from them.
//!
//! Eigenvectors are normalized with the bilinear (unconjugated) pairing
//! `L_k·R_k = 1`. The conjugate norm `A_k = ⟨R_k|R_k⟩` is then at least one,
//! equal to one for orthogonal eigenvectors and unbounded at an exceptional
//! point. Phase rigidity is `r_k = 1/A_k`.
//!
//! Index 1 (slot 0) always carries the `+Z` root, where `Z` is the principal
//! square root picked by [`principal_sqrt`]. Continuity along a parameter path
//! is a separate concern handled by the sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::model::{ComplexScalar, Matrix2, OpenParams, Params, PtVariant};

/// A column vector of two complex components.
pub type Vec2 = [Complex64; 2];

/// Relative eigenvalue gap below which a pair may be declared coalesced.
pub const DEFECTIVE_GAP: f64 = 1e-9;
/// Eigenvector angle (radians) below which a pair may be declared coalesced.
pub const DEFECTIVE_ANGLE: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Principal square root with non-negative real part; when the real part is
/// zero the imaginary part is made non-negative.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return ZERO;
    }
    let t = ((z.norm() + z.re.abs()) * 0.5).sqrt();
    let mut s = if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    };
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        s = -s;
    }
    s
}

/// `(h11 − h22)² + 4·h12·h21`; the eigenvalues coincide where it vanishes.
pub fn discriminant(m: &Matrix2) -> Complex64 {
    let d = m.h11 - m.h22;
    d * d + 4.0 * m.h12 * m.h21
}

/// `Z = ½·√((ε_1 − ε_2)² + 4ω²)` for the open family.
pub fn discriminant_z(p: &OpenParams) -> ComplexScalar {
    let d = p.eps1() - p.eps2();
    let w = p.omega.get();
    let z = 0.5 * principal_sqrt(d * d + 4.0 * w * w);
    ComplexScalar::try_from_complex(z).expect("finite parameters give a finite discriminant")
}

/// Family-specific half-splitting `Z`, `Z_PT` or `Z'_PT`.
pub fn family_z(params: &Params) -> Complex64 {
    match params {
        Params::Open(p) => discriminant_z(p).get(),
        Params::Pt(p) => {
            let w2 = p.w.get().norm_sqr();
            let g = match p.variant {
                PtVariant::BalancedGainLoss => p.gamma,
                PtVariant::LossyOnly => 0.5 * p.gamma,
            };
            0.5 * principal_sqrt(Complex64::new(4.0 * w2 - g * g, 0.0))
        }
    }
}

/// Eigenvalues from the family formulas, `+Z` branch first.
pub fn eigenvalues_closed_form(params: &Params) -> [Complex64; 2] {
    let z = family_z(params);
    let center = match params {
        Params::Open(p) => 0.5 * (p.eps1() + p.eps2()),
        Params::Pt(p) => match p.variant {
            PtVariant::BalancedGainLoss => Complex64::new(p.e, 0.0),
            PtVariant::LossyOnly => Complex64::new(p.e, -0.25 * p.gamma),
        },
    };
    [center + z, center - z]
}

#[inline]
fn bilinear(u: Vec2, v: Vec2) -> Complex64 {
    u[0] * v[0] + u[1] * v[1]
}

#[inline]
fn inner(u: Vec2, v: Vec2) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

#[inline]
fn norm_sqr(u: Vec2) -> f64 {
    u[0].norm_sqr() + u[1].norm_sqr()
}

#[inline]
fn scale(u: Vec2, c: Complex64) -> Vec2 {
    [u[0] * c, u[1] * c]
}

/// Angle in `[0, π/2]` between the complex lines spanned by two unit vectors.
fn line_angle(u: Vec2, v: Vec2) -> f64 {
    (u[0] * v[1] - u[1] * v[0]).norm().atan2(inner(u, v).norm())
}

/// Null direction of `m − λ` given the two off-diagonal entries and the
/// shifted diagonal `λ − h11`, `λ − h22`. Returns `None` when both
/// candidate columns vanish.
fn null_direction(upper: Complex64, lower: Complex64, shift11: Complex64, shift22: Complex64) -> Option<Vec2> {
    let first = [upper, shift11];
    let second = [shift22, lower];
    let (n1, n2) = (norm_sqr(first), norm_sqr(second));
    let (v, n) = if n1 >= n2 { (first, n1) } else { (second, n2) };
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(scale(v, Complex64::new(1.0 / n.sqrt(), 0.0)))
}

/// Flips the overall sign so that the larger-magnitude component has its
/// phase in (−π/2, π/2]. Returns true when a flip was applied.
fn fix_gauge(v: Vec2) -> bool {
    let (m0, m1) = (v[0].norm(), v[1].norm());
    let lead = if m1 > m0 * (1.0 + 1e-12) { v[1] } else { v[0] };
    !(lead.re > 0.0 || (lead.re == 0.0 && lead.im > 0.0))
}

/// Full eigen-decomposition of a 2×2 matrix with biorthogonal normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    /// `ℰ_k = E_k + i·Γ_k/2`.
    pub eigenvalues: [Complex64; 2],
    pub right: [Vec2; 2],
    pub left: [Vec2; 2],
    /// Conjugate norms `A_k`; `+∞` when defective.
    pub norms: [f64; 2],
    /// `[B_1^2, B_2^1]`; `+∞` when defective.
    pub overlaps: [Complex64; 2],
    pub rigidity: [f64; 2],
    pub defective: bool,
    /// `|ℰ_1 − ℰ_2|`.
    pub gap: f64,
    /// Angle between the two right eigendirections, radians.
    pub angle: f64,
}

impl EigenSystem {
    pub fn energy(&self, k: usize) -> f64 {
        self.eigenvalues[k].re
    }

    /// `Γ_k/2`, the literal imaginary part of `ℰ_k`.
    pub fn half_width(&self, k: usize) -> f64 {
        self.eigenvalues[k].im
    }

    /// Swaps the roles of the two eigenstates.
    pub fn swapped(&self) -> Self {
        let mut s = *self;
        s.eigenvalues.swap(0, 1);
        s.right.swap(0, 1);
        s.left.swap(0, 1);
        s.norms.swap(0, 1);
        s.overlaps.swap(0, 1);
        s.rigidity.swap(0, 1);
        s
    }

    /// Multiplies eigenpair `k` by −1, preserving `L_k·R_k = 1`.
    pub fn negate(&mut self, k: usize) {
        self.right[k] = scale(self.right[k], -ONE);
        self.left[k] = scale(self.left[k], -ONE);
        if !self.defective {
            self.overlaps = [
                inner(self.right[0], self.right[1]),
                inner(self.right[1], self.right[0]),
            ];
        }
    }
}

/// Decomposes `m`. Defective input is reported through the flag, with
/// norms and overlaps set to `+∞` and rigidity to zero.
pub fn eigensystem(m: &Matrix2) -> EigenSystem {
    let half_diff = 0.5 * (m.h11 - m.h22);
    let z = 0.5 * principal_sqrt(discriminant(m));
    let center = 0.5 * m.trace();
    let eigenvalues = [center + z, center - z];
    // λ − h11 and λ − h22 without rounding through the trace.
    let shifts = [(-half_diff + z, half_diff + z), (-half_diff - z, half_diff - z)];

    let basis = [[ONE, ZERO], [ZERO, ONE]];
    // Where both candidate columns vanish (scalar block) the basis is kept.
    let mut right = [basis[0], basis[1]];
    let mut left = right;
    for k in 0..2 {
        let (s11, s22) = shifts[k];
        if let Some(v) = null_direction(m.h12, m.h21, s11, s22) {
            right[k] = v;
        }
        if let Some(v) = null_direction(m.h21, m.h12, s11, s22) {
            left[k] = v;
        }
    }

    let scale_ref = m.max_abs().max(1.0);
    let gap = (eigenvalues[0] - eigenvalues[1]).norm();
    let angle = line_angle(right[0], right[1]);
    let defective = gap < DEFECTIVE_GAP * scale_ref && angle < DEFECTIVE_ANGLE;

    if defective {
        let inf = Complex64::new(f64::INFINITY, 0.0);
        return EigenSystem {
            eigenvalues,
            right: [right[0], right[0]],
            left: [left[0], left[0]],
            norms: [f64::INFINITY; 2],
            overlaps: [inf, inf],
            rigidity: [0.0; 2],
            defective,
            gap,
            angle,
        };
    }

    let symmetric = m.is_symmetric();
    let mut norms = [1.0; 2];
    let mut rigidity = [1.0; 2];
    for k in 0..2 {
        let p = bilinear(left[k], right[k]);
        let c = principal_sqrt(ONE / p);
        let mut r = scale(right[k], c);
        let mut l = if symmetric { r } else { scale(left[k], c) };
        if fix_gauge(r) {
            r = scale(r, -ONE);
            l = scale(l, -ONE);
        }
        right[k] = r;
        left[k] = l;
        norms[k] = norm_sqr(r);
        rigidity[k] = (1.0 / norms[k]).min(1.0);
    }
    let overlaps = [inner(right[0], right[1]), inner(right[1], right[0])];

    EigenSystem {
        eigenvalues,
        right,
        left,
        norms,
        overlaps,
        rigidity,
        defective,
        gap,
        angle,
    }
}

/// `r_k`, or the limit value zero for a defective system.
pub fn phase_rigidity(sys: &EigenSystem, k: usize) -> f64 {
    if sys.defective {
        0.0
    } else {
        sys.rigidity[k]
    }
}

/// Expansion coefficients `b_ij` of eigenvector `i` on unperturbed basis state `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingCoefficients {
    pub b: [[Complex64; 2]; 2],
    pub magnitude: [[f64; 2]; 2],
    /// `θ_ij` in (−π, π]; `+∞` when defective.
    pub phase: [[f64; 2]; 2],
}

/// Quadrant-correct phase in (−π, π].
pub fn phase_angle(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -PI {
        PI
    } else {
        t
    }
}

pub fn mixing_coefficients(sys: &EigenSystem) -> MixingCoefficients {
    let b = sys.right;
    if sys.defective {
        return MixingCoefficients {
            b,
            magnitude: [[f64::INFINITY; 2]; 2],
            phase: [[f64::INFINITY; 2]; 2],
        };
    }
    let mut magnitude = [[0.0; 2]; 2];
    let mut phase = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            magnitude[i][j] = b[i][j].norm();
            phase[i][j] = phase_angle(b[i][j]);
        }
    }
    MixingCoefficients { b, magnitude, phase }
}

/// `|⟨Φ_n|W|Φ_n⟩|·⟨Φ_n|Φ_n⟩` for `W = [[0, ω], [ω, 0]]`, per eigenstate.
pub fn nonlinear_source_strength(sys: &EigenSystem, coupling: ComplexScalar) -> [f64; 2] {
    if sys.defective {
        return [f64::INFINITY; 2];
    }
    let w = coupling.get();
    let mut out = [0.0; 2];
    for (n, slot) in out.iter_mut().enumerate() {
        let (l, r) = (sys.left[n], sys.right[n]);
        let bracket = w * (l[0] * r[1] + l[1] * r[0]);
        *slot = bracket.norm() * sys.norms[n];
    }
    out
}

/// Diagnostics of how close the two eigenvectors are to coalescing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coalescence {
    /// `(R_1·R_2)/√((R_1·R_1)(R_2·R_2))`, bilinear; `+∞` when defective.
    pub rho: Complex64,
    /// `R_k[0]/R_k[1]` for each eigenvector; both tend to the same `±i` at
    /// an EP of a symmetric matrix.
    pub component_ratio: [Complex64; 2],
    /// Angle between the eigendirections, radians.
    pub angle: f64,
    /// The single surviving eigendirection of a defective matrix.
    pub direction: Option<Vec2>,
}

pub fn coalescence_ratio(sys: &EigenSystem) -> Coalescence {
    if sys.defective {
        let inf = Complex64::new(f64::INFINITY, 0.0);
        let d = sys.right[0];
        let ratio = if d[1] == Complex64::new(0.0, 0.0) { inf } else { d[0] / d[1] };
        return Coalescence {
            rho: inf,
            component_ratio: [ratio; 2],
            angle: sys.angle,
            direction: Some(sys.right[0]),
        };
    }
    let [r1, r2] = sys.right;
    let rho = bilinear(r1, r2) / principal_sqrt(bilinear(r1, r1) * bilinear(r2, r2));
    let ratio = |v: Vec2| {
        if v[1] == Complex64::new(0.0, 0.0) {
            Complex64::new(f64::INFINITY, 0.0)
        } else {
            v[0] / v[1]
        }
    };
    Coalescence {
        rho,
        component_ratio: [ratio(r1), ratio(r2)],
        angle: sys.angle,
        direction: None,
    }
}
