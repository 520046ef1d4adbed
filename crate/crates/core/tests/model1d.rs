mod common;

use common::{f, fixture, floats};
use stepfield::model1d::{band_energy, de_gennes_theta0, iwatsuka_beta, FiberKind, Grid1D};
use stepfield::THETA0_LOW;

#[test]
fn theta0_matches_tridiagonal_oracle() {
    let fx = fixture("model1d.json");
    let th = &fx["theta0"];
    let hs = floats(&th["h"]);
    let vals = floats(&th["value"]);
    let xis = floats(&th["xi_star"]);
    for k in 0..2 {
        let r = de_gennes_theta0(&Grid1D::with_spacing(hs[k]), 1e-8).unwrap();
        assert!((r.energy - vals[k]).abs() < 1e-8, "h={} {} vs {}", hs[k], r.energy, vals[k]);
        assert!((r.xi_star - xis[k]).abs() < 1e-4);
    }
    let rich = f(&th["richardson"]);
    assert!((rich - 0.5901).abs() < 5e-4);
    assert!(rich >= THETA0_LOW - 1e-9);
}

#[test]
fn optimality_identity_at_the_minimum() {
    let r = de_gennes_theta0(&Grid1D::default_half_line(), 1e-8).unwrap();
    // μ₁(ξ) is the band; at the minimum the band value equals ξ*²
    let h = 1e-3;
    let d = (band_energy(FiberKind::HalfLineDeGennes, 1.0, r.xi_star + h, 0.01).unwrap()
        - band_energy(FiberKind::HalfLineDeGennes, 1.0, r.xi_star - h, 0.01).unwrap())
        / (2.0 * h);
    assert!(d.abs() < 1e-3, "band slope {d}");
    assert!((r.energy - r.xi_star * r.xi_star).abs() <= 1e-3);
}

#[test]
fn beta_matches_one_dimensional_oracle() {
    let fx = fixture("model1d.json");
    let grid = Grid1D::default_half_line();
    for (key, v) in fx["beta_1d"]["values"].as_object().unwrap() {
        let a: f64 = key.parse().unwrap();
        let r = iwatsuka_beta(a, &grid, 1e-7).unwrap();
        let want = f(&v["beta"]);
        assert!((r.energy - want).abs() < 2e-4, "a={a}: {} vs {want}", r.energy);
    }
}

#[test]
fn beta_minus_half_agrees_with_box_oracle() {
    let fx = fixture("model1d.json");
    let want = f(&fx["beta_box_m05"]["estimate"]);
    let r = iwatsuka_beta(-0.5, &Grid1D::default_half_line(), 1e-7).unwrap();
    assert!((r.energy - want).abs() < 2e-3, "{} vs {want}", r.energy);
    assert!(r.energy > 0.5 * THETA0_LOW && r.energy < 0.5);
}

#[test]
fn positive_step_approaches_a_from_above() {
    let r = iwatsuka_beta(0.5, &Grid1D::default_half_line(), 1e-7).unwrap();
    assert!(r.energy >= 0.5 - 1e-4 && r.energy < 0.5 + 2e-3, "{}", r.energy);
}
