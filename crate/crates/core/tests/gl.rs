mod common;

use std::sync::Arc;

use common::{f, fixture};
use stepfield::domain::{build_domain, compute_F, solve_hc3, DomainShape, DomainSpec, VectorPotentialField};
use stepfield::gl::{
    giorgi_c1, gl_diagnostics, gl_energy, gl_minimize, onset_sweep, GLState, GlOptions, GlProblem, Init, Mode,
};
use stepfield::{Error, C64};

fn disc_field(a: f64, h: f64) -> Arc<VectorPotentialField> {
    let spec = DomainSpec { shape: DomainShape::unit_disc(), d: 0.0, a };
    let grid = Arc::new(build_domain(&spec, h).unwrap());
    Arc::new(compute_F(&grid).unwrap())
}

fn state(p: &GlProblem, psi: Vec<C64>, s: Vec<f64>) -> GLState {
    GLState { psi, s, kappa: p.kappa, h_field: p.h_field, parts: Default::default() }
}

#[test]
fn normal_state_has_zero_energy() {
    let fld = disc_field(-1.0, 0.05);
    let p = GlProblem::new(fld.clone(), 3.0, 2.0).unwrap();
    let st = state(&p, vec![C64::new(0.0, 0.0); fld.grid.len()], vec![0.0; fld.dual_nodes.len()]);
    assert_eq!(gl_energy(&p, &st).unwrap().total(), 0.0);
    // a stream perturbation only costs field energy
    let s: Vec<f64> = (0..fld.dual_nodes.len()).map(|k| 1e-3 * ((k % 7) as f64 - 3.0)).collect();
    let parts = gl_energy(&p, &state(&p, vec![C64::new(0.0, 0.0); fld.grid.len()], s)).unwrap();
    assert!(parts.field > 0.0);
    assert_eq!(parts.kinetic + parts.condensation + parts.quartic, 0.0);
    let bad = state(&p, vec![C64::new(0.0, 0.0); 3], vec![0.0; fld.dual_nodes.len()]);
    assert!(matches!(gl_energy(&p, &bad), Err(Error::Shape(_))));
}

#[test]
fn constant_order_parameter_matches_scalar_reduction() {
    let fx = fixture("field.json");
    let (kappa, hf, c) = (2.0, 1.0, 0.6);
    for row in fx["field_energy"].as_array().unwrap() {
        let a = f(&row["a"]);
        if a >= 1.0 {
            continue;
        }
        let fld = disc_field(a, 1.0 / 64.0);
        let p = GlProblem::new(fld.clone(), kappa, hf).unwrap();
        let st = state(&p, vec![C64::new(c, 0.0); fld.grid.len()], vec![0.0; fld.dual_nodes.len()]);
        let parts = gl_energy(&p, &st).unwrap();
        let k2 = kappa * kappa;
        let area = std::f64::consts::PI;
        let kin = k2 * hf * hf * c * c * f(&row["value"]);
        assert!((parts.kinetic - kin).abs() < 0.02 * kin, "a={a}: {} vs {kin}", parts.kinetic);
        assert!((parts.condensation + k2 * c * c * area).abs() < 0.01 * k2 * c * c * area);
        assert!((parts.quartic - 0.5 * k2 * c.powi(4) * area).abs() < 0.01 * k2 * c.powi(4) * area);
        assert_eq!(parts.field, 0.0);
    }
}

#[test]
fn phase_rotation_leaves_energy_unchanged() {
    let fld = disc_field(-1.0, 0.05);
    let p = GlProblem::new(fld.clone(), 3.0, 5.0).unwrap();
    let psi: Vec<C64> = fld
        .grid
        .lattice
        .nodes
        .iter()
        .map(|n| C64::from_polar(0.5 * (-n.x * n.x).exp(), 3.0 * n.y))
        .collect();
    let e0 = gl_energy(&p, &state(&p, psi.clone(), vec![0.0; fld.dual_nodes.len()])).unwrap().total();
    let rot = C64::from_polar(1.0, 0.7);
    let e1 = gl_energy(&p, &state(&p, psi.iter().map(|z| z * rot).collect(), vec![0.0; fld.dual_nodes.len()]))
        .unwrap()
        .total();
    assert!((e0 - e1).abs() <= 1e-12 * e0.abs().max(1.0));
}

#[test]
fn normal_state_is_critical() {
    let fld = disc_field(-1.0, 0.05);
    let p = GlProblem::new(fld, 3.0, 5.0).unwrap();
    for mode in [Mode::FrozenA, Mode::Coupled] {
        let (st, rep) = gl_minimize(&p, mode, &Init::Normal, &GlOptions::default()).unwrap();
        assert!(rep.residual_psi == 0.0 && rep.residual_a == 0.0);
        assert!(rep.is_normal && st.energy() == 0.0);
        let d = gl_diagnostics(&p, &st).unwrap();
        assert!(d.item1_holds && d.curl_ratio.is_none());
    }
}

#[test]
fn strong_field_is_normal_and_weak_field_is_not() {
    let kappa = 3.0;
    let fld = disc_field(-1.0, 0.05);
    let hc3 = solve_hc3(&fld, kappa, (0.8 * kappa / 0.5114, 1.25 * kappa / 0.5114)).unwrap().hc3;
    let strong = giorgi_c1(hc3, kappa) * kappa;
    let p = GlProblem::new(fld.clone(), kappa, strong).unwrap();
    let (_, rep) = gl_minimize(&p, Mode::FrozenA, &Init::Random { seed: 1 }, &GlOptions::default()).unwrap();
    assert!(rep.is_normal, "H = {strong}: mass {}", rep.mass);

    let p = GlProblem::new(fld, kappa, 0.8 * hc3).unwrap();
    let (st, rep) = gl_minimize(&p, Mode::FrozenA, &Init::Random { seed: 1 }, &GlOptions::default()).unwrap();
    assert!(!rep.is_normal);
    assert!(rep.sup_norm <= 1.0 + 1e-6);
    assert!(rep.energy < 0.0);
    assert!(gl_diagnostics(&p, &st).unwrap().item1_holds);
    // accepted steps never raise the energy
    for w in rep.energy_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
    }
    let d = gl_diagnostics(&p, &st).unwrap();
    assert_eq!(d.curl_ratio, Some(0.0));
}

#[test]
fn coupled_mode_lowers_the_frozen_energy() {
    let kappa = 3.0;
    let fld = disc_field(-1.0, 0.05);
    let hf = 4.5;
    let p = GlProblem::new(fld, kappa, hf).unwrap();
    let (frozen, _) = gl_minimize(&p, Mode::FrozenA, &Init::Random { seed: 4 }, &GlOptions::default()).unwrap();
    let (st, rep) =
        gl_minimize(&p, Mode::Coupled, &Init::Warm(Box::new(frozen.clone())), &GlOptions::default()).unwrap();
    assert!(rep.converged);
    assert!(st.energy() <= frozen.energy() + 1e-10);
    for w in rep.energy_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
    }
    let d = gl_diagnostics(&p, &st).unwrap();
    assert!(d.item1_holds);
    println!("coupled curl ratio {:?}", d.curl_ratio);
}

#[test]
fn sweep_mass_decreases_to_onset() {
    let kappa = 3.0;
    let fld = disc_field(-1.0, 0.05);
    let hs: Vec<f64> = (0..6).map(|k| 3.5 + 0.9 * k as f64).collect();
    let sw = onset_sweep(&fld, kappa, &hs, Mode::FrozenA, &GlOptions::default(), 3).unwrap();
    let masses: Vec<f64> = sw.rows.iter().map(|r| r.mass).collect();
    println!("sweep masses {masses:?}, onset {:?}", sw.onset);
    assert!(sw.mass_nonincreasing);
    assert!(sw.onset.is_some());
}

#[test]
fn resolution_guard() {
    let fld = disc_field(-1.0, 0.05);
    assert!(matches!(GlProblem::new(fld, 10.0, 20.0), Err(Error::Resolution(_))));
}

#[test]
fn nonlinear_onset_matches_linear_field_at_kappa_8() {
    let kappa = 8.0;
    let fld = disc_field(-1.0, 1.0 / 64.0);
    let hc3 = solve_hc3(&fld, kappa, (0.8 * kappa / 0.5114, 1.25 * kappa / 0.5114)).unwrap().hc3;
    let hs: Vec<f64> = [0.9, 0.95, 1.0, 1.05, 1.1, 1.2].iter().map(|s| s * hc3).collect();
    let sw = onset_sweep(&fld, kappa, &hs, Mode::FrozenA, &GlOptions::default(), 2).unwrap();
    let onset = sw.onset.expect("normal state reached on the sweep");
    println!("Hc3 {hc3}, onset {onset}, masses {:?}", sw.rows.iter().map(|r| r.mass).collect::<Vec<_>>());
    assert!((onset / hc3 - 1.0).abs() <= 0.15);
    assert!(sw.mass_nonincreasing);
    let last_sc = sw.rows.iter().filter(|r| !r.is_normal).last().expect("superconducting point below onset");
    assert!(last_sc.frac_p1 + last_sc.frac_p2 >= 0.5, "{last_sc:?}");
}
