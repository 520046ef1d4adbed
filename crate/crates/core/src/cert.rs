//! Closed-form bound-state certificate for the step half-plane operator.
//!
//! With the trial state u*(ρ,θ) = e^{−βρ²/2} e^{−iρg(θ)} the energy
//! I[u*] = q(u*) − |a|Θ₀‖u*‖² at the optimal g equals P(1/β) with
//! P(x) = Ax² − (π/2)|a|Θ₀x + π/2. A negative minimum of P over x > 0
//! places an eigenvalue below |a|Θ₀.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Admissible Θ₀ values for the certificate.
pub const THETA0_RANGE: (f64, f64) = (0.58, 0.60);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateInput {
    pub alpha: f64,
    pub a: f64,
    pub theta0: f64,
}

impl CertificateInput {
    pub fn new(alpha: f64, a: f64, theta0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(Error::Geometry(format!("angle {alpha} outside (0, π)")));
        }
        if !(-1.0..1.0).contains(&a) || a == 0.0 {
            return Err(Error::Input(format!("field value {a} outside [-1, 1) \\ {{0}}")));
        }
        if !(theta0 > THETA0_RANGE.0 && theta0 < THETA0_RANGE.1) {
            return Err(Error::Input(format!("theta0 {theta0} outside (0.58, 0.60)")));
        }
        Ok(Self { alpha, a, theta0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateResult {
    #[serde(rename = "A")]
    pub coeff_a: f64,
    /// Minimizer of P over x > 0; `None` when A ≤ 0 (P is unbounded below).
    pub x_star: Option<f64>,
    /// −∞ when A ≤ 0.
    pub p_min: f64,
    pub admissible: bool,
}

/// The quadratic coefficient A(α, a).
pub fn coeff_a(alpha: f64, a: f64) -> f64 {
    let csch = 1.0 / PI.sinh();
    let inner = -4.0 * a * PI + (3.0 - 2.0 * a + 3.0 * a * a) * PI * PI.cosh()
        + (-1.0 + a)
            * PI
            * ((-1.0 + a) * (PI - 2.0 * alpha).cosh() + 4.0 * (PI - alpha).cosh() - 4.0 * a * alpha.cosh())
        - 8.0 * (alpha + a * a * (PI - alpha)) * PI.sinh();
    -csch * inner / 64.0
}

/// P(x) = Ax² − (π/2)|a|Θ₀x + π/2.
pub fn p_poly(input: &CertificateInput, x: f64) -> f64 {
    coeff_a(input.alpha, input.a) * x * x - 0.5 * PI * input.a.abs() * input.theta0 * x + 0.5 * PI
}

/// Minimizes P over x > 0. Using a lower bound for Θ₀ keeps the verdict
/// conservative: P decreases in Θ₀ for x > 0.
pub fn certify(input: &CertificateInput) -> CertificateResult {
    let coeff = coeff_a(input.alpha, input.a);
    if coeff <= 0.0 {
        return CertificateResult { coeff_a: coeff, x_star: None, p_min: f64::NEG_INFINITY, admissible: true };
    }
    let x = 0.25 * PI * input.a.abs() * input.theta0 / coeff;
    let p = p_poly(input, x);
    CertificateResult { coeff_a: coeff, x_star: Some(x), p_min: p, admissible: p < 0.0 }
}

/// α_i = πi/n for i = 1..n−1.
pub fn alpha_grid(n: usize) -> Vec<f64> {
    (1..n).map(|i| PI * i as f64 / n as f64).collect()
}

/// a_j = −1 + 2j/n for j = 0..n−1, skipping 0.
pub fn a_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -1.0 + 2.0 * j as f64 / n as f64)
        .filter(|a| a.abs() > 1e-12)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub alpha: f64,
    pub a: f64,
    #[serde(flatten)]
    pub result: CertificateResult,
}

/// Certificate over the full α × a grid, α-major.
pub fn region_scan(alpha_grid: &[f64], a_grid: &[f64], theta0: f64) -> Result<Vec<RegionRow>> {
    let inputs: Vec<CertificateInput> = alpha_grid
        .iter()
        .flat_map(|&al| a_grid.iter().map(move |&a| (al, a)))
        .map(|(al, a)| CertificateInput::new(al, a, theta0))
        .collect::<Result<_>>()?;
    Ok(inputs
        .par_iter()
        .map(|inp| RegionRow { alpha: inp.alpha, a: inp.a, result: certify(inp) })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialFunctionParams {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl TrialFunctionParams {
    pub fn c4(&self) -> f64 {
        self.c1 + self.c2 - self.c3
    }

    /// g(θ) and g′(θ); the branch switches at θ = 0.
    pub fn g(&self, t: f64) -> (f64, f64) {
        let (p, q) = if t <= 0.0 { (self.c1, self.c2) } else { (self.c3, self.c4()) };
        let (e, f) = (t.exp(), (-t).exp());
        (p * e + q * f, p * e - q * f)
    }

    /// The optimal coefficients in closed form.
    pub fn optimal(alpha: f64, a: f64, beta: f64) -> Self {
        let sp = PI.sqrt();
        let sb = beta.sqrt();
        let coth_m1 = 1.0 / PI.tanh() - 1.0;
        let c1 = (PI - 2.0 * alpha).exp()
            * ((-1.0 + a) * PI.exp() + (-1.0 + a) * (PI + 2.0 * alpha).exp() + 2.0 * alpha.exp() * (-a + PI.exp()))
            * sp
            * coth_m1
            / (16.0 * sb);
        let c2 = (-1.0 + a + (-1.0 + a) * (2.0 * alpha).exp() - 2.0 * (-1.0 + a * PI.exp()) * alpha.exp())
            * sp
            * coth_m1
            / (16.0 * sb);
        let c3 = (-alpha).exp() * (-a + PI.exp() + (-1.0 + a) * (PI - alpha).cosh()) * sp / PI.sinh() / (8.0 * sb);
        Self { beta, c1, c2, c3 }
    }
}

/// I[u*] from the moment identities, with the θ-integrals done in closed form.
pub fn trial_energy_closed(alpha: f64, a: f64, params: &TrialFunctionParams, theta0: f64) -> f64 {
    let beta = params.beta;
    let (c1, c2, c3, c4) = (params.c1, params.c2, params.c3, params.c4());
    // ∫(g² + g′²) = [p²e^{2t} − q²e^{−2t}] over the branch
    let sq = |p: f64, q: f64, lo: f64, hi: f64| {
        p * p * ((2.0 * hi).exp() - (2.0 * lo).exp()) - q * q * ((-2.0 * hi).exp() - (-2.0 * lo).exp())
    };
    let jump = |p: f64, q: f64, lo: f64, hi: f64| (p * hi.exp() + q * (-hi).exp()) - (p * lo.exp() + q * (-lo).exp());
    let e1 = 1.0 / (2.0 * beta);
    let e2 = PI.sqrt() / (4.0 * beta.powf(1.5));
    let lo = -PI + alpha;
    e1 * sq(c1, c2, lo, 0.0) - a * e2 * jump(c1, c2, lo, 0.0) + e1 * sq(c3, c4, 0.0, alpha)
        - e2 * jump(c3, c4, 0.0, alpha)
        + 0.5 * PI
        - a.abs() * theta0 * PI / (2.0 * beta)
        + (alpha + a * a * (PI - alpha)) / (8.0 * beta * beta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per θ branch.
    pub n_theta: usize,
    /// Gauss–Legendre nodes per ρ panel.
    pub n_rho: usize,
    pub rho_panels: usize,
    /// ρ is integrated over [0, rho_cut/√β].
    pub rho_cut: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_theta: 40, n_rho: 30, rho_panels: 4, rho_cut: 9.0 }
    }
}

/// Smallest cut accepted: e^{−36} is far below the target accuracy.
pub const MIN_RHO_CUT: f64 = 6.0;

fn rule(n: usize) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(n).ok_or_else(|| Error::Quadrature("rule needs at least one node".into()))?;
    let gl = GaussLegendre::new(n);
    Ok(gl.as_node_weight_pairs().iter().map(|&(x, w)| (x, w)).collect())
}

/// I[u*] by direct quadrature over (0, ∞) × (−π+α, α) in polar coordinates,
/// in the gauge where the field enters as the angular potential σρ/2 with
/// σ = a for θ < 0 and 1 for θ > 0.
pub fn trial_energy(
    alpha: f64,
    a: f64,
    params: &TrialFunctionParams,
    theta0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(params.beta > 0.0) {
        return Err(Error::Input(format!("beta must be positive, got {}", params.beta)));
    }
    if !(quad.rho_cut >= MIN_RHO_CUT) {
        return Err(Error::Quadrature(format!(
            "rho cut {} does not resolve the Gaussian tail (need ≥ {MIN_RHO_CUT})",
            quad.rho_cut
        )));
    }
    if quad.rho_panels == 0 {
        return Err(Error::Quadrature("need at least one rho panel".into()));
    }
    let beta = params.beta;
    let tq = rule(quad.n_theta)?;
    let rq = rule(quad.n_rho)?;
    let rmax = quad.rho_cut / beta.sqrt();
    let pw = rmax / quad.rho_panels as f64;
    let mut rho_nodes = Vec::with_capacity(quad.rho_panels * rq.len());
    for k in 0..quad.rho_panels {
        let (lo, hi) = (k as f64 * pw, (k + 1) as f64 * pw);
        for &(x, w) in &rq {
            rho_nodes.push((lo + 0.5 * (x + 1.0) * (hi - lo), 0.5 * w * (hi - lo)));
        }
    }
    let mut total = 0.0;
    for (lo, hi, sigma) in [(-PI + alpha, 0.0, a), (0.0, alpha, 1.0)] {
        for &(x, w) in &tq {
            let t = lo + 0.5 * (x + 1.0) * (hi - lo);
            let wt = 0.5 * w * (hi - lo);
            let (g, dg) = params.g(t);
            let mut inner = 0.0;
            for &(rho, wr) in &rho_nodes {
                let d = dg - 0.5 * sigma * rho;
                let f = beta * beta * rho * rho + g * g + d * d - a.abs() * theta0;
                inner += wr * f * (-beta * rho * rho).exp() * rho;
            }
            total += wt * inner;
        }
    }
    Ok(total)
}

/// Optimal (c₁, c₂, c₃) from the normal equations of the quadratic I(c).
pub fn optimal_by_normal_equations(alpha: f64, a: f64, beta: f64, theta0: f64) -> Result<TrialFunctionParams> {
    let f = |c: [f64; 3]| {
        trial_energy_closed(alpha, a, &TrialFunctionParams { beta, c1: c[0], c2: c[1], c3: c[2] }, theta0)
    };
    let f0 = f([0.0; 3]);
    let unit = |i: usize, s: f64| {
        let mut c = [0.0; 3];
        c[i] = s;
        c
    };
    let mut h = Matrix3::zeros();
    let mut g = Vector3::zeros();
    for i in 0..3 {
        let (fp, fm) = (f(unit(i, 1.0)), f(unit(i, -1.0)));
        g[i] = 0.5 * (fp - fm);
        h[(i, i)] = fp + fm - 2.0 * f0;
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let mut c = unit(i, 1.0);
            c[j] = 1.0;
            let v = f(c) - f0 - g[i] - g[j] - 0.5 * h[(i, i)] - 0.5 * h[(j, j)];
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let c = h
        .lu()
        .solve(&(-g))
        .ok_or_else(|| Error::Solver("singular normal equations".into()))?;
    Ok(TrialFunctionParams { beta, c1: c[0], c2: c[1], c3: c[2] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::THETA0_LOW;

    #[test]
    fn p_at_zero() {
        let inp = CertificateInput::new(1.0, -0.5, THETA0_LOW).unwrap();
        assert_eq!(p_poly(&inp, 0.0), 0.5 * PI);
    }

    #[test]
    fn grids() {
        let al = alpha_grid(200);
        assert_eq!(al.len(), 199);
        assert!(al.iter().any(|&x| (x - 0.5 * PI).abs() < 1e-15));
        let a = a_grid(200);
        assert_eq!(a.len(), 199);
        assert_eq!(a[0], -1.0);
        assert!(a.iter().all(|&x| x != 0.0 && x < 1.0));
    }

    #[test]
    fn quadrature_guard() {
        let p = TrialFunctionParams { beta: 1.0, c1: 0.0, c2: 0.0, c3: 0.0 };
        let q = QuadratureSpec { rho_cut: 3.0, ..Default::default() };
        assert!(matches!(trial_energy(1.0, -1.0, &p, THETA0_LOW, &q), Err(Error::Quadrature(_))));
    }
}
