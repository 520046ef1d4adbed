use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use stepfield::cert::{certify, p_poly, CertificateInput, TrialFunctionParams};
use stepfield::domain::{build_domain, compute_F, lambda_b, DomainShape, DomainSpec, VectorPotentialField};
use stepfield::eigen::{dense_reference_spectrum, smallest_eigenpairs};
use stepfield::gl::{gl_energy, GLState, GlProblem};
use stepfield::halfplane::StepAngleSpec;
use stepfield::output::{fmt_num, round_sig};
use stepfield::sparse::{HermitianBuilder, SparseHermitian};
use stepfield::C64;

fn disc_field() -> Arc<VectorPotentialField> {
    static F: OnceLock<Arc<VectorPotentialField>> = OnceLock::new();
    F.get_or_init(|| {
        let spec = DomainSpec { shape: DomainShape::unit_disc(), d: 0.2, a: -0.7 };
        let grid = Arc::new(build_domain(&spec, 0.1).unwrap());
        Arc::new(compute_F(&grid).unwrap())
    })
    .clone()
}

fn hermitian(n: usize, vals: &[(f64, f64)]) -> SparseHermitian {
    let mut b = HermitianBuilder::new(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let (re, im) = vals[k % vals.len()];
            k += 1;
            b.add(i, j, if i == j { C64::new(re, 0.0) } else { C64::new(re, im) });
        }
    }
    b.build()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn spectrum_invariant_under_phases(
        vals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 10..40),
        phi in prop::collection::vec(0.0..(2.0 * PI), 12),
    ) {
        let m = hermitian(12, &vals);
        let a = dense_reference_spectrum(&m).unwrap();
        let b = dense_reference_spectrum(&m.conjugate_by_phases(&phi)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let trace: f64 = m.diagonal().iter().sum();
        prop_assert!((a.iter().sum::<f64>() - trace).abs() < 1e-10 * (1.0 + trace.abs()));
    }

    #[test]
    fn eigenpairs_sorted_and_deterministic(vals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 30..60), seed in 0u64..100) {
        let m = hermitian(40, &vals);
        let p = smallest_eigenpairs(&m, 3, 1e-9, 5000, seed).unwrap();
        let q = smallest_eigenpairs(&m, 3, 1e-9, 5000, seed).unwrap();
        prop_assert!(p.windows(2).all(|w| w[0].value <= w[1].value));
        for (x, y) in p.iter().zip(&q) {
            prop_assert_eq!(x.value, y.value);
        }
    }

    #[test]
    fn polynomial_at_zero(alpha in 0.01..(PI - 0.01), a in -1.0..0.99f64, theta0 in 0.581..0.599f64) {
        prop_assume!(a.abs() > 1e-6);
        let inp = CertificateInput::new(alpha, a, theta0).unwrap();
        prop_assert_eq!(p_poly(&inp, 0.0), FRAC_PI_2);
        let r = certify(&inp);
        if let Some(x) = r.x_star {
            prop_assert!(x > 0.0);
            prop_assert!(r.p_min <= p_poly(&inp, 0.5 * x) + 1e-12);
            prop_assert!(r.p_min <= p_poly(&inp, 1.5 * x) + 1e-12);
        }
    }

    #[test]
    fn lower_theta0_is_more_conservative(alpha in 0.05..(PI - 0.05), a in -1.0..-0.01f64) {
        let lo = certify(&CertificateInput::new(alpha, a, 0.5901).unwrap());
        let hi = certify(&CertificateInput::new(alpha, a, 0.5902).unwrap());
        prop_assert!(!lo.admissible || hi.admissible);
    }

    #[test]
    fn trial_phase_is_continuous(c1 in -2.0..2.0f64, c2 in -2.0..2.0f64, c3 in -2.0..2.0f64) {
        let p = TrialFunctionParams { beta: 1.0, c1, c2, c3 };
        let (l, _) = p.g(-1e-12);
        let (r, _) = p.g(1e-12);
        prop_assert!((l - r).abs() < 1e-9);
    }

    #[test]
    fn potential_branches_agree_on_ray(alpha in 0.05..(PI - 0.05), a in -1.0..0.99f64, rho in 0.1..10.0f64) {
        prop_assume!(a.abs() > 1e-6);
        let s = StepAngleSpec::new(alpha, a).unwrap();
        let (b1, b2) = s.branches(rho * alpha.cos(), rho * alpha.sin());
        prop_assert!((b1 - b2).abs() < 1e-9 * (1.0 + rho));
    }

    #[test]
    fn twelve_digit_output_round_trips(x in -1e12..1e12f64) {
        let back: f64 = fmt_num(x).parse().unwrap();
        prop_assert_eq!(back, round_sig(x));
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn linear_ground_energy_gauge_and_sign(b in 0.5..6.0f64, phi in prop::collection::vec(0.0..(2.0 * PI), 1..2)) {
        let fld = disc_field();
        let m = fld.matrix(b);
        let phases: Vec<f64> = (0..m.dim()).map(|k| phi[0] * (k as f64).sin() * 5.0).collect();
        let a = dense_reference_spectrum(&m).unwrap();
        let c = dense_reference_spectrum(&m.conjugate_by_phases(&phases)).unwrap();
        prop_assert!((a[0] - c[0]).abs() < 1e-10);
        let lam = lambda_b(&fld, b).unwrap().lambda;
        prop_assert!(lam >= 0.0);
        prop_assert!((lam - a[0]).abs() < 1e-6 * (1.0 + a[0]));
    }

    #[test]
    fn gl_energy_phase_invariant_and_parts_signed(
        kappa in 1.0..4.0f64,
        hf in 0.5..2.5f64,
        amp in prop::collection::vec((0.0..1.0f64, 0.0..(2.0 * PI)), 8),
        rot in 0.0..(2.0 * PI),
    ) {
        let fld = disc_field();
        let p = GlProblem::new(fld.clone(), kappa, hf).unwrap();
        let psi: Vec<C64> = (0..fld.grid.len()).map(|k| {
            let (r, t) = amp[k % amp.len()];
            C64::from_polar(r, t + 0.3 * k as f64)
        }).collect();
        let s: Vec<f64> = (0..fld.dual_nodes.len()).map(|k| 1e-3 * ((k * 7 % 11) as f64 - 5.0)).collect();
        let st = GLState { psi: psi.clone(), s: s.clone(), kappa, h_field: hf, parts: Default::default() };
        let e0 = gl_energy(&p, &st).unwrap();
        prop_assert!(e0.kinetic >= 0.0 && e0.quartic >= 0.0 && e0.field >= 0.0 && e0.condensation <= 0.0);
        let z = C64::from_polar(1.0, rot);
        let st2 = GLState { psi: psi.iter().map(|v| v * z).collect(), s, kappa, h_field: hf, parts: Default::default() };
        let e1 = gl_energy(&p, &st2).unwrap();
        prop_assert!((e0.total() - e1.total()).abs() <= 1e-12 * e0.total().abs().max(1.0));
    }
}
