mod common;

use common::{f, fixture, floats};
use stepfield::cert::{
    certify, coeff_a, optimal_by_normal_equations, p_poly, trial_energy, trial_energy_closed, CertificateInput,
    QuadratureSpec, TrialFunctionParams,
};

#[test]
fn coefficient_matches_high_precision_transcription() {
    let fx = fixture("cert.json");
    for row in fx["coeff_a"].as_array().unwrap() {
        let (alpha, a) = (f(&row["alpha"]), f(&row["a"]));
        let want: f64 = row["A_str"].as_str().unwrap().parse().unwrap();
        let got = coeff_a(alpha, a);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "A({alpha},{a}) = {got} vs {want}");
    }
    // logged only
    println!("A(1,-0.5) = {}, A(π-1,-0.5) = {}", coeff_a(1.0, -0.5), coeff_a(std::f64::consts::PI - 1.0, -0.5));
}

#[test]
fn verdicts_match_oracle() {
    let fx = fixture("cert.json");
    for row in fx["certify"].as_array().unwrap() {
        let inp = CertificateInput::new(f(&row["alpha"]), f(&row["a"]), f(&row["theta0"])).unwrap();
        let r = certify(&inp);
        assert_eq!(r.admissible, row["admissible"].as_bool().unwrap(), "{inp:?}");
        if let Some(x) = row["x_star"].as_f64() {
            assert!((r.x_star.unwrap() - x).abs() < 1e-10 * x);
            assert!((r.p_min - f(&row["p_min"])).abs() < 1e-10);
        }
    }
}

#[test]
fn trial_energy_equals_polynomial_on_samples() {
    let fx = fixture("cert.json");
    let theta0 = f(&fx["theta0"]);
    let quad = QuadratureSpec::default();
    let samples = fx["trial"].as_array().unwrap();
    assert_eq!(samples.len(), 75);
    for s in samples {
        let (alpha, a, beta) = (f(&s["alpha"]), f(&s["a"]), f(&s["beta"]));
        let printed = TrialFunctionParams::optimal(alpha, a, beta);
        let want_c = floats(&s["c_printed"]);
        for (g, w) in [printed.c1, printed.c2, printed.c3].iter().zip(&want_c) {
            assert!((g - w).abs() < 1e-10 * (1.0 + w.abs()));
        }
        let normal = optimal_by_normal_equations(alpha, a, beta, theta0).unwrap();
        for (g, w) in [normal.c1, normal.c2, normal.c3].iter().zip([printed.c1, printed.c2, printed.c3]) {
            assert!((g - w).abs() < 1e-9 * (1.0 + w.abs()), "normal equations {g} vs printed {w}");
        }
        let p = f(&s["p_at_inv_beta"]);
        let inp_p = p_poly(&CertificateInput::new(alpha, a, theta0).unwrap(), 1.0 / beta);
        assert!((inp_p - p).abs() < 1e-10 * (1.0 + p.abs()));
        let e = trial_energy(alpha, a, &printed, theta0, &quad).unwrap();
        assert!((e - p).abs() <= 1e-6 * (1.0 + p.abs()), "({alpha},{a},{beta}): {e} vs {p}");
        let closed = trial_energy_closed(alpha, a, &printed, theta0);
        assert!((closed - f(&s["energy_moments"])).abs() < 1e-10 * (1.0 + p.abs()));
    }
}

#[test]
fn gaussian_only_trial_matches_moments() {
    let fx = fixture("cert.json");
    let theta0 = f(&fx["theta0"]);
    for s in fx["zero_g"].as_array().unwrap() {
        let (alpha, a, beta) = (f(&s["alpha"]), f(&s["a"]), f(&s["beta"]));
        let zero = TrialFunctionParams { beta, c1: 0.0, c2: 0.0, c3: 0.0 };
        let e = trial_energy(alpha, a, &zero, theta0, &QuadratureSpec::default()).unwrap();
        let want = f(&s["energy_moments"]);
        assert!((e - want).abs() < 1e-8, "{e} vs {want}");
        assert!((f(&s["energy_quad"]) - want).abs() < 1e-12);
    }
}

#[test]
fn optimum_is_a_local_minimum_in_c1() {
    let theta0 = stepfield::THETA0;
    for &(alpha, a, beta) in &[(1.5707963267948966, -1.0, 0.3), (1.0, -0.6, 1.0), (2.4, 0.5, 2.0)] {
        let c = TrialFunctionParams::optimal(alpha, a, beta);
        let e0 = trial_energy_closed(alpha, a, &c, theta0);
        for d in [1e-3, -1e-3] {
            let p = TrialFunctionParams { c1: c.c1 + d, ..c };
            assert!(trial_energy_closed(alpha, a, &p, theta0) > e0);
        }
    }
}

#[test]
fn quadrature_guard_rejects_short_range() {
    let c = TrialFunctionParams::optimal(1.0, -0.5, 1.0);
    let q = QuadratureSpec { rho_cut: 3.0, ..QuadratureSpec::default() };
    assert!(matches!(trial_energy(1.0, -0.5, &c, 0.59, &q), Err(stepfield::Error::Quadrature(_))));
}
