//! Hamiltonian families and one-parameter trajectories.
//!
//! Three two-level families are supported:
//!
//! * `Open`: the symmetric resonance matrix with diagonal `e_i + (i/2)·γ_i`
//!   and equal off-diagonal coupling `ω`.
//! * `PtBalanced`: diagonal `e ∓ iγ/2` with couplings `(w, w*)`.
//! * `PtLossy`: diagonal `(e − iγ/2, e)` with couplings `(w, w*)`.
//!
//! No sign constraint is imposed on widths; the diagonal is built literally
//! from whatever sign the caller passes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ModelError;

/// A complex scalar whose components are both finite.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct ComplexScalar(Complex64);

impl ComplexScalar {
    pub const ZERO: Self = Self(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self, ModelError> {
        Self::try_from_complex(Complex64::new(re, im))
    }

    pub fn try_from_complex(z: Complex64) -> Result<Self, ModelError> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(Self(z))
        } else {
            Err(ModelError::NonFinite {
                what: "complex scalar",
            })
        }
    }

    pub fn real(re: f64) -> Result<Self, ModelError> {
        Self::new(re, 0.0)
    }

    pub fn imag(im: f64) -> Result<Self, ModelError> {
        Self::new(0.0, im)
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.0.re
    }

    #[inline]
    pub fn im(self) -> f64 {
        self.0.im
    }

    #[inline]
    pub fn get(self) -> Complex64 {
        self.0
    }
}

impl From<ComplexScalar> for Complex64 {
    fn from(z: ComplexScalar) -> Self {
        z.0
    }
}

impl TryFrom<(f64, f64)> for ComplexScalar {
    type Error = ModelError;

    fn try_from((re, im): (f64, f64)) -> Result<Self, Self::Error> {
        Self::new(re, im)
    }
}

impl From<ComplexScalar> for (f64, f64) {
    fn from(z: ComplexScalar) -> Self {
        (z.0.re, z.0.im)
    }
}

impl fmt::Display for ComplexScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im.is_sign_negative() {
            write!(f, "{}-{}i", self.0.re, -self.0.im)
        } else {
            write!(f, "{}+{}i", self.0.re, self.0.im)
        }
    }
}

/// A concrete 2×2 complex matrix `[[h11, h12], [h21, h22]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2 {
    pub h11: Complex64,
    pub h12: Complex64,
    pub h21: Complex64,
    pub h22: Complex64,
}

impl Matrix2 {
    pub fn new(
        h11: Complex64,
        h12: Complex64,
        h21: Complex64,
        h22: Complex64,
    ) -> Result<Self, ModelError> {
        let m = Self { h11, h12, h21, h22 };
        if m.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(m)
        } else {
            Err(ModelError::NonFinite {
                what: "matrix entry",
            })
        }
    }

    pub fn diagonal(d1: Complex64, d2: Complex64) -> Result<Self, ModelError> {
        Self::new(d1, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), d2)
    }

    #[inline]
    pub fn entries(&self) -> [Complex64; 4] {
        [self.h11, self.h12, self.h21, self.h22]
    }

    pub fn is_symmetric(&self) -> bool {
        self.h12 == self.h21
    }

    pub fn is_pt_form(&self) -> bool {
        self.h21 == self.h12.conj()
    }

    pub fn trace(&self) -> Complex64 {
        self.h11 + self.h22
    }

    pub fn det(&self) -> Complex64 {
        self.h11 * self.h22 - self.h12 * self.h21
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self {
            h11: self.h11,
            h12: self.h21,
            h21: self.h12,
            h22: self.h22,
        }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.h11 * v[0] + self.h12 * v[1],
            self.h21 * v[0] + self.h22 * v[1],
        ]
    }
}

/// Parameters of the open-system matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenParams {
    pub e1: f64,
    pub e2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub omega: ComplexScalar,
}

impl OpenParams {
    /// `ε_1 = e_1 + (i/2)·γ_1`.
    pub fn eps1(&self) -> Complex64 {
        Complex64::new(self.e1, 0.5 * self.gamma1)
    }

    /// `ε_2 = e_2 + (i/2)·γ_2`.
    pub fn eps2(&self) -> Complex64 {
        Complex64::new(self.e2, 0.5 * self.gamma2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtVariant {
    BalancedGainLoss,
    LossyOnly,
}

/// Parameters of the PT-symmetric matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtParams {
    pub e: f64,
    pub gamma: f64,
    pub w: ComplexScalar,
    pub variant: PtVariant,
}

/// Evaluated parameters of any family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    Open(OpenParams),
    Pt(PtParams),
}

impl Params {
    pub fn kind(&self) -> ModelKind {
        match self {
            Params::Open(_) => ModelKind::Open,
            Params::Pt(p) => match p.variant {
                PtVariant::BalancedGainLoss => ModelKind::PtBalanced,
                PtVariant::LossyOnly => ModelKind::PtLossy,
            },
        }
    }

    /// The off-diagonal coupling (`ω` or `w`).
    pub fn coupling(&self) -> ComplexScalar {
        match self {
            Params::Open(p) => p.omega,
            Params::Pt(p) => p.w,
        }
    }
}

impl From<OpenParams> for Params {
    fn from(p: OpenParams) -> Self {
        Params::Open(p)
    }
}

impl From<PtParams> for Params {
    fn from(p: PtParams) -> Self {
        Params::Pt(p)
    }
}

/// Places parameters into a concrete matrix.
pub fn build_matrix(params: &Params) -> Matrix2 {
    match params {
        Params::Open(p) => {
            let w = p.omega.get();
            Matrix2 {
                h11: p.eps1(),
                h12: w,
                h21: w,
                h22: p.eps2(),
            }
        }
        Params::Pt(p) => {
            let w = p.w.get();
            let half = 0.5 * p.gamma;
            let (h11, h22) = match p.variant {
                PtVariant::BalancedGainLoss => {
                    (Complex64::new(p.e, -half), Complex64::new(p.e, half))
                }
                PtVariant::LossyOnly => (Complex64::new(p.e, -half), Complex64::new(p.e, 0.0)),
            };
            Matrix2 {
                h11,
                h12: w,
                h21: w.conj(),
                h22,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Open,
    PtBalanced,
    PtLossy,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Open => "open",
            ModelKind::PtBalanced => "pt-balanced",
            ModelKind::PtLossy => "pt-lossy",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(ModelKind::Open),
            "pt-balanced" | "pt_balanced" => Ok(ModelKind::PtBalanced),
            "pt-lossy" | "pt_lossy" => Ok(ModelKind::PtLossy),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

/// `value(a) = intercept + slope·a`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineLaw {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineLaw {
    pub const fn new(intercept: f64, slope: f64) -> Self {
        Self { intercept, slope }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    #[inline]
    pub fn at(&self, a: f64) -> f64 {
        self.intercept + self.slope * a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CouplingModel {
    Constant { value: ComplexScalar },
    /// `base · exp(−(e_1(a) − e_2(a))²)`.
    GaussianFalloff { base: ComplexScalar },
}

impl CouplingModel {
    pub fn base(&self) -> ComplexScalar {
        match self {
            CouplingModel::Constant { value } => *value,
            CouplingModel::GaussianFalloff { base } => *base,
        }
    }

    pub fn at(&self, energy_gap: f64) -> ComplexScalar {
        match self {
            CouplingModel::Constant { value } => *value,
            CouplingModel::GaussianFalloff { base } => {
                let f = (-energy_gap * energy_gap).exp();
                ComplexScalar(base.get() * f)
            }
        }
    }
}

/// A one-parameter family `a ↦ Hamiltonian`.
///
/// For the PT kinds only `energy1` and `width1` are read (as `e` and `γ`);
/// the energy gap entering a Gaussian coupling is then zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamTrajectory {
    pub kind: ModelKind,
    pub energy1: AffineLaw,
    pub energy2: AffineLaw,
    pub width1: AffineLaw,
    pub width2: AffineLaw,
    pub coupling: CouplingModel,
}

impl ParamTrajectory {
    pub fn open(
        energy1: AffineLaw,
        energy2: AffineLaw,
        width1: AffineLaw,
        width2: AffineLaw,
        coupling: CouplingModel,
    ) -> Self {
        Self {
            kind: ModelKind::Open,
            energy1,
            energy2,
            width1,
            width2,
            coupling,
        }
    }

    pub fn pt(variant: PtVariant, energy: AffineLaw, gamma: AffineLaw, coupling: CouplingModel) -> Self {
        let kind = match variant {
            PtVariant::BalancedGainLoss => ModelKind::PtBalanced,
            PtVariant::LossyOnly => ModelKind::PtLossy,
        };
        Self {
            kind,
            energy1: energy,
            energy2: energy,
            width1: gamma,
            width2: AffineLaw::default(),
            coupling,
        }
    }

    /// Evaluates the laws at `a`.
    pub fn params_at(&self, a: f64) -> Params {
        match self.kind {
            ModelKind::Open => {
                let e1 = self.energy1.at(a);
                let e2 = self.energy2.at(a);
                Params::Open(OpenParams {
                    e1,
                    e2,
                    gamma1: self.width1.at(a),
                    gamma2: self.width2.at(a),
                    omega: self.coupling.at(e1 - e2),
                })
            }
            ModelKind::PtBalanced | ModelKind::PtLossy => {
                let variant = if self.kind == ModelKind::PtBalanced {
                    PtVariant::BalancedGainLoss
                } else {
                    PtVariant::LossyOnly
                };
                Params::Pt(PtParams {
                    e: self.energy1.at(a),
                    gamma: self.width1.at(a),
                    w: self.coupling.at(0.0),
                    variant,
                })
            }
        }
    }

    pub fn matrix_at(&self, a: f64) -> Matrix2 {
        build_matrix(&self.params_at(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_scalar_rejects_non_finite() {
        assert!(ComplexScalar::new(f64::NAN, 0.0).is_err());
        assert!(ComplexScalar::new(0.0, f64::INFINITY).is_err());
        assert!(ComplexScalar::new(1.0, -2.0).is_ok());
        assert!(Matrix2::new(c(0.0, 0.0), c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn zero_params_build_zero_matrix() {
        let p = Params::Open(OpenParams {
            e1: 0.0,
            e2: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            omega: ComplexScalar::ZERO,
        });
        let m = build_matrix(&p);
        assert!(m.entries().iter().all(|z| *z == c(0.0, 0.0)));
        assert!(m.is_symmetric());
    }

    #[test]
    fn open_matrix_placement() {
        let p = Params::Open(OpenParams {
            e1: 1.0,
            e2: 0.0,
            gamma1: 1.0,
            gamma2: 1.0,
            omega: ComplexScalar::imag(0.05).unwrap(),
        });
        let m = build_matrix(&p);
        assert_eq!(m.h11, c(1.0, 0.5));
        assert_eq!(m.h22, c(0.0, 0.5));
        assert_eq!(m.h12, c(0.0, 0.05));
        assert_eq!(m.h21, c(0.0, 0.05));
        assert!(m.is_symmetric());
    }

    #[test]
    fn pt_balanced_placement() {
        let p = Params::Pt(PtParams {
            e: 0.5,
            gamma: 0.1,
            w: ComplexScalar::real(0.05).unwrap(),
            variant: PtVariant::BalancedGainLoss,
        });
        let m = build_matrix(&p);
        assert_eq!(m.h11, c(0.5, -0.05));
        assert_eq!(m.h22, c(0.5, 0.05));
        assert_eq!(m.h12, c(0.05, 0.0));
        assert_eq!(m.h21, c(0.05, 0.0));
        assert!(m.is_pt_form());
        assert!(m.is_symmetric());
    }

    #[test]
    fn pt_lossy_placement_and_complex_coupling() {
        let p = Params::Pt(PtParams {
            e: 0.5,
            gamma: 0.4,
            w: ComplexScalar::new(0.03, 0.04).unwrap(),
            variant: PtVariant::LossyOnly,
        });
        let m = build_matrix(&p);
        assert_eq!(m.h11, c(0.5, -0.2));
        assert_eq!(m.h22, c(0.5, 0.0));
        assert_eq!(m.h21, c(0.03, -0.04));
        assert!(m.is_pt_form());
        assert!(!m.is_symmetric());
    }

    #[test]
    fn gaussian_falloff_is_unity_at_zero_gap() {
        let model = CouplingModel::GaussianFalloff {
            base: ComplexScalar::real(0.05).unwrap(),
        };
        assert_eq!(model.at(0.0).get(), c(0.05, 0.0));
        let far = model.at(2.0).get().norm();
        let near = model.at(0.5).get().norm();
        assert!(far < near && near < 0.05);
    }

    #[test]
    fn gaussian_trajectory_uses_energy_gap() {
        let t = ParamTrajectory::open(
            AffineLaw::new(1.0, -1.0),
            AffineLaw::new(0.0, 1.0),
            AffineLaw::constant(0.0),
            AffineLaw::constant(0.0),
            CouplingModel::GaussianFalloff {
                base: ComplexScalar::real(0.05).unwrap(),
            },
        );
        let Params::Open(p) = t.params_at(0.5) else {
            unreachable!()
        };
        assert_eq!(p.omega.get(), c(0.05, 0.0));
        let Params::Open(p) = t.params_at(0.0) else {
            unreachable!()
        };
        assert!((p.omega.re() - 0.05 * (-1.0f64).exp()).abs() < 1e-17);
    }

    #[test]
    fn model_kind_round_trips_through_str() {
        for k in [ModelKind::Open, ModelKind::PtBalanced, ModelKind::PtLossy] {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("closed".parse::<ModelKind>().is_err());
    }
}
