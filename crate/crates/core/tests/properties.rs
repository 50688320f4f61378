use ep_core::ep::{analytic_ep_thresholds, classify_regime, locate_eps_1d, z_residual, RegimeTag};
use ep_core::model::{AffineLaw, ComplexScalar, CouplingModel, OpenParams, ParamTrajectory, Params, PtParams, PtVariant};
use ep_core::oracle::{reference_eigensystem, residual_check};
use ep_core::scattering::{cross_section, s_matrix, s_matrix_double_pole, ResonancePair};
use ep_core::spectral::{eigensystem, eigenvalues_closed_form, phase_rigidity};
use ep_core::{build_matrix, Matrix2};
use num_complex::Complex64;
use proptest::prelude::*;

fn sorted(mut v: [Complex64; 2]) -> [Complex64; 2] {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn unit(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix() -> impl Strategy<Value = Matrix2> {
    (complex(), complex(), complex(), complex()).prop_map(|(a, b, c, d)| Matrix2::new(a, b, c, d).unwrap())
}

fn open_params() -> impl Strategy<Value = OpenParams> {
    (-2.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64, complex()).prop_map(|(e1, e2, gamma1, gamma2, w)| OpenParams {
        e1,
        e2,
        gamma1,
        gamma2,
        omega: ComplexScalar::try_from_complex(w).unwrap(),
    })
}

fn pt_params() -> impl Strategy<Value = PtParams> {
    (-1.0..1.0f64, 0.0..1.0f64, complex(), any::<bool>()).prop_map(|(e, gamma, w, lossy)| PtParams {
        e,
        gamma,
        w: ComplexScalar::try_from_complex(w).unwrap(),
        variant: if lossy { PtVariant::LossyOnly } else { PtVariant::BalancedGainLoss },
    })
}

fn params() -> impl Strategy<Value = Params> {
    prop_oneof![open_params().prop_map(Params::Open), pt_params().prop_map(Params::Pt)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn trace_and_determinant(m in matrix()) {
        let ev = eigensystem(&m).eigenvalues;
        let s = m.max_abs().max(1.0);
        prop_assert!((ev[0] + ev[1] - m.trace()).norm() < 1e-12 * s);
        prop_assert!((ev[0] * ev[1] - m.det()).norm() < 1e-12 * s * s);
    }

    #[test]
    fn residuals_are_small(m in matrix()) {
        let sys = eigensystem(&m);
        prop_assume!(!sys.defective);
        for k in 0..2 {
            let res = residual_check(&m, sys.eigenvalues[k], unit(sys.right[k]));
            prop_assert!(res < 1e-12 * m.max_abs().max(1.0), "{}", res);
        }
    }

    #[test]
    fn closed_form_matches_general(p in params()) {
        let a = sorted(eigenvalues_closed_form(&p));
        let b = sorted(eigensystem(&build_matrix(&p)).eigenvalues);
        prop_assert!((a[0] - b[0]).norm() < 1e-10 && (a[1] - b[1]).norm() < 1e-10, "{a:?} {b:?}");
    }

    #[test]
    fn oracle_agrees_away_from_defectivity(m in matrix()) {
        let sys = eigensystem(&m);
        prop_assume!(sys.gap > 1e-6);
        let r = reference_eigensystem(&m);
        prop_assert!(r.agreement(sys.eigenvalues) < 1e-10);
        prop_assert!(r.trace_error < 1e-12 && r.det_error < 1e-12);
    }

    #[test]
    fn rigidity_bounds(p in params()) {
        let m = build_matrix(&p);
        let sys = eigensystem(&m);
        for k in 0..2 {
            let r = phase_rigidity(&sys, k);
            prop_assert!((0.0..=1.0).contains(&r), "{}", r);
            if m.is_symmetric() && !sys.defective {
                prop_assert!((r - 1.0 / sys.norms[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn open_matrices_are_symmetric(p in open_params()) {
        prop_assert!(build_matrix(&Params::Open(p)).is_symmetric());
    }

    #[test]
    fn pt_with_real_coupling_is_symmetric(e in -1.0..1.0f64, gamma in 0.0..1.0f64, w in -1.0..1.0f64, lossy in any::<bool>()) {
        let p = PtParams {
            e,
            gamma,
            w: ComplexScalar::real(w).unwrap(),
            variant: if lossy { PtVariant::LossyOnly } else { PtVariant::BalancedGainLoss },
        };
        prop_assert!(build_matrix(&Params::Pt(p)).is_symmetric());
    }

    #[test]
    fn balanced_pt_reality(e in -1.0..1.0f64, gamma in 0.0..1.0f64, w in 0.01..1.0f64) {
        let g2 = gamma * gamma;
        let w2 = 4.0 * w * w;
        prop_assume!((g2 - w2).abs() > 1e-6);
        let p = Params::Pt(PtParams { e, gamma, w: ComplexScalar::real(w).unwrap(), variant: PtVariant::BalancedGainLoss });
        let ev = eigensystem(&build_matrix(&p)).eigenvalues;
        if g2 < w2 {
            prop_assert!(ev[0].im.abs() < 1e-12 && ev[1].im.abs() < 1e-12);
        } else {
            prop_assert!((ev[0] - ev[1].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn real_coupling_without_widths_always_repels(e1 in -2.0..2.0f64, e2 in -2.0..2.0f64, w in 0.001..1.0f64, g in -1.0..1.0f64) {
        let p = Params::Open(OpenParams { e1, e2, gamma1: g, gamma2: g, omega: ComplexScalar::real(w).unwrap() });
        prop_assert_eq!(classify_regime(&p, 1e-12), RegimeTag::LevelRepulsion);
        let ev = eigensystem(&build_matrix(&p)).eigenvalues;
        prop_assert!((ev[0].im - ev[1].im).abs() < 1e-12);
        prop_assert!((ev[0].re - ev[1].re).abs() > 0.0);
    }

    #[test]
    fn affine_midpoint(i1 in -2.0..2.0f64, s1 in -2.0..2.0f64, i2 in -2.0..2.0f64, s2 in -2.0..2.0f64, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let t = ParamTrajectory::open(
            AffineLaw::new(i1, s1),
            AffineLaw::new(i2, s2),
            AffineLaw::constant(0.1),
            AffineLaw::constant(0.2),
            CouplingModel::Constant { value: ComplexScalar::imag(0.05).unwrap() },
        );
        let (Params::Open(pa), Params::Open(pb), Params::Open(pm)) = (t.params_at(a), t.params_at(b), t.params_at(0.5 * (a + b))) else {
            unreachable!()
        };
        prop_assert!((pm.e1 - 0.5 * (pa.e1 + pb.e1)).abs() < 1e-12);
        prop_assert!((pm.e2 - 0.5 * (pa.e2 + pb.e2)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_coupling_decreases(base in complex(), g1 in 0.0..3.0f64, g2 in 0.0..3.0f64) {
        prop_assume!(base.norm() > 1e-3 && (g1 - g2).abs() > 1e-6);
        let c = CouplingModel::GaussianFalloff { base: ComplexScalar::try_from_complex(base).unwrap() };
        let (near, far) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(c.at(near).get().norm() > c.at(far).get().norm());
        prop_assert!(c.at(0.0).get().norm() >= c.at(near).get().norm());
        prop_assert!(c.at(-near).get().norm() == c.at(near).get().norm());
    }

    #[test]
    fn s_matrix_is_unitary(e1 in -2.0..2.0f64, e2 in -2.0..2.0f64, g1 in 0.0..1.0f64, g2 in 0.0..1.0f64, e in -5.0..5.0f64) {
        let r = ResonancePair::new(e1, g1, e2, g2).unwrap();
        prop_assert!((s_matrix(&r, e).norm() - 1.0).abs() < 1e-12);
        prop_assert!((s_matrix_double_pole(e1, g1.max(1e-3), e).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coalesced_pair_is_the_double_pole(ed in -2.0..2.0f64, gd in 1e-3..1.0f64, e in -5.0..5.0f64) {
        let r = ResonancePair::new(ed, gd, ed, gd).unwrap();
        prop_assert!((s_matrix(&r, e) - s_matrix_double_pole(ed, gd, e)).norm() < 1e-10);
    }

    #[test]
    fn cross_section_translation_invariant(e1 in -1.0..1.0f64, e2 in -1.0..1.0f64, g1 in 0.0..1.0f64, g2 in 0.0..1.0f64, e in -3.0..3.0f64, shift in -10.0..10.0f64) {
        let a = ResonancePair::new(e1, g1, e2, g2).unwrap();
        let b = ResonancePair::new(e1 + shift, g1, e2 + shift, g2).unwrap();
        let (s0, s1) = (cross_section(s_matrix(&a, e)), cross_section(s_matrix(&b, e + shift)));
        prop_assert!((s0 - s1).abs() < 1e-9, "{s0} {s1}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn located_eps_meet_tolerance(e1_0 in 0.5..1.5f64, slope in -1.0..-0.2f64, w in 0.01..0.2f64, g in 0.1..1.0f64) {
        let t = ParamTrajectory::open(
            AffineLaw::new(e1_0, slope),
            AffineLaw::new(0.0, 1.0),
            AffineLaw::constant(g),
            AffineLaw::constant(g),
            CouplingModel::Constant { value: ComplexScalar::imag(w).unwrap() },
        );
        let eps = locate_eps_1d(&t, -2.0, 3.0, 1024, 1e-8).unwrap();
        prop_assert_eq!(eps.len(), 2);
        for e in &eps {
            prop_assert!(e.residual < 1e-8);
            let again = z_residual(&t.matrix_at(e.a_star));
            prop_assert!(again <= 2.0 * e.residual.max(f64::MIN_POSITIVE));
            // e1 − e2 = ±2w
            let gap = (e1_0 + slope * e.a_star) - e.a_star;
            prop_assert!((gap.abs() - 2.0 * w).abs() < 1e-9, "{}", gap);
        }
        let Params::Open(p) = t.params_at(0.0) else { unreachable!() };
        let th = analytic_ep_thresholds(&Params::Open(p)).unwrap();
        prop_assert!((th[0].value.abs() - 2.0 * w).abs() < 1e-12);
    }
}
