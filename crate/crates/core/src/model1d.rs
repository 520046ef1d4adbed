//! One-dimensional fiber operators: the de Gennes model on the half-line
//! and the Iwatsuka step model on the line.
//!
//! Fibers are discretized by second-order finite differences and the lowest
//! eigenvalue of the resulting tridiagonal matrix is found by Sturm
//! bisection. Band minima over ξ use a coarse scan followed by
//! golden-section refinement.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    pub left: f64,
    pub right: f64,
    pub n: usize,
    pub bc_left: Boundary,
    pub bc_right: Boundary,
}

impl Grid1D {
    pub fn new(left: f64, right: f64, n: usize, bc_left: Boundary, bc_right: Boundary) -> Result<Self> {
        if n < 3 || !(right > left) {
            return Err(Error::Input(format!("bad 1-D grid [{left}, {right}] with {n} nodes")));
        }
        Ok(Self { left, right, n, bc_left, bc_right })
    }

    /// Half-line grid [0, 12] with spacing 0.01, Neumann at 0.
    pub fn default_half_line() -> Self {
        Self::with_spacing(0.01)
    }

    pub fn with_spacing(h: f64) -> Self {
        let n = (12.0 / h).round() as usize + 1;
        Self { left: 0.0, right: (n - 1) as f64 * h, n, bc_left: Boundary::Neumann, bc_right: Boundary::Dirichlet }
    }

    pub fn h(&self) -> f64 {
        (self.right - self.left) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.left + i as f64 * self.h()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiberKind {
    HalfLineDeGennes,
    IwatsukaStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberSpec {
    pub kind: FiberKind,
    /// Field on t < 0 for the step fiber; ignored by the de Gennes fiber.
    pub a: f64,
    pub xi: f64,
}

impl FiberSpec {
    pub fn de_gennes(xi: f64) -> Self {
        Self { kind: FiberKind::HalfLineDeGennes, a: 1.0, xi }
    }

    pub fn iwatsuka(a: f64, xi: f64) -> Self {
        Self { kind: FiberKind::IwatsukaStep, a, xi }
    }

    pub fn potential(&self, t: f64) -> f64 {
        match self.kind {
            FiberKind::HalfLineDeGennes => (t - self.xi).powi(2),
            FiberKind::IwatsukaStep => {
                let s = if t > 0.0 { 1.0 } else { self.a };
                (self.xi - s * t).powi(2)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandMinimum {
    pub energy: f64,
    pub xi_star: f64,
    /// False when the infimum is only approached at the scan boundary.
    pub attained: bool,
}

const SAFETY: f64 = 10.0;

/// Lowest eigenvalue of −d²/dt² + V on the grid.
pub fn fiber_ground_energy(spec: &FiberSpec, grid: &Grid1D) -> Result<f64> {
    let energy = ground_unchecked(spec, grid)?;
    check_ends(spec, grid, energy)?;
    Ok(energy)
}

fn check_ends(spec: &FiberSpec, grid: &Grid1D, energy: f64) -> Result<()> {
    for (bc, t) in [(grid.bc_left, grid.left), (grid.bc_right, grid.right)] {
        if bc == Boundary::Dirichlet {
            let v = spec.potential(t);
            if v < SAFETY * energy {
                return Err(Error::Truncation(format!(
                    "potential {v:.4} at t={t} is below {SAFETY}x the eigenvalue {energy:.4}"
                )));
            }
        }
    }
    Ok(())
}

fn ground_unchecked(spec: &FiberSpec, grid: &Grid1D) -> Result<f64> {
    let h = grid.h();
    let n = grid.n;
    let lo = usize::from(grid.bc_left == Boundary::Dirichlet);
    let hi = if grid.bc_right == Boundary::Dirichlet { n - 1 } else { n };
    if hi <= lo + 1 {
        return Err(Error::Input("grid has fewer than two unknowns".into()));
    }
    let m = hi - lo;
    let inv = 1.0 / (h * h);
    let mut d = Vec::with_capacity(m);
    let mut e = vec![-inv; m - 1];
    for i in lo..hi {
        d.push(2.0 * inv + spec.potential(grid.node(i)));
    }
    // Neumann ends carry half weight; symmetric scaling gives √2 couplings.
    if grid.bc_left == Boundary::Neumann {
        e[0] *= std::f64::consts::SQRT_2;
    }
    if grid.bc_right == Boundary::Neumann {
        e[m - 2] *= std::f64::consts::SQRT_2;
    }
    Ok(lowest_tridiagonal(&d, &e))
}

/// Number of eigenvalues below `x` (Sturm sequence via LDLᵀ).
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let qq = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_tridiagonal(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fiber grid at spacing `h`, wide enough that the potential at the
/// truncated ends exceeds the safety factor times `e_est`.
pub fn fiber_window(spec: &FiberSpec, h: f64, e_est: f64) -> Grid1D {
    let reach = (SAFETY * e_est.max(1.0)).sqrt() + 3.0;
    let right = spec.xi.max(0.0) + reach;
    let left = match spec.kind {
        FiberKind::HalfLineDeGennes => 0.0,
        FiberKind::IwatsukaStep => {
            let well = (spec.xi / spec.a).min(0.0);
            // keep t = 0 on a node
            -(((reach / spec.a.abs()) - well) / h).ceil() * h
        }
    };
    let n = ((right - left) / h).ceil() as usize + 1;
    let bc_left = match spec.kind {
        FiberKind::HalfLineDeGennes => Boundary::Neumann,
        FiberKind::IwatsukaStep => Boundary::Dirichlet,
    };
    Grid1D { left, right: left + (n - 1) as f64 * h, n, bc_left, bc_right: Boundary::Dirichlet }
}

/// Band function at ξ with an adaptively sized window.
pub fn band_energy(kind: FiberKind, a: f64, xi: f64, h: f64) -> Result<f64> {
    let spec = FiberSpec { kind, a, xi };
    let mut e_est = 2.0;
    for _ in 0..12 {
        let grid = fiber_window(&spec, h, e_est);
        let e = ground_unchecked(&spec, &grid)?;
        if check_ends(&spec, &grid, e).is_ok() {
            return Ok(e);
        }
        e_est = (2.0 * e).max(2.0 * e_est);
    }
    Err(Error::Truncation(format!("window for xi={xi} could not be sized")))
}

/// Band values on a list of ξ.
pub fn band_table(kind: FiberKind, a: f64, xis: &[f64], h: f64) -> Result<Vec<(f64, f64)>> {
    xis.par_iter().map(|&xi| band_energy(kind, a, xi, h).map(|e| (xi, e))).collect()
}

/// True if the sampled values descend and then ascend at most once.
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut ascending = false;
    for w in values.windows(2) {
        if w[1] > w[0] {
            ascending = true;
        } else if ascending && w[1] < w[0] {
            return false;
        }
    }
    true
}

pub const XI_SCAN: (f64, f64, f64) = (-10.0, 10.0, 0.1);

fn scan_xis() -> Vec<f64> {
    let (lo, hi, step) = XI_SCAN;
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn golden<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

fn minimize_band(kind: FiberKind, a: f64, h: f64, xi_tol: f64) -> Result<(BandMinimum, Vec<(f64, f64)>)> {
    if !(xi_tol > 0.0) {
        return Err(Error::Input(format!("xi_tol must be positive, got {xi_tol}")));
    }
    let table = band_table(kind, a, &scan_xis(), h)?;
    let (imin, &(_, emin)) = table
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .expect("scan is nonempty");
    let last = table.len() - 1;
    let edge = table[0].1.min(table[last].1);
    if imin == 0 || imin == last || edge - emin < 1e-6 {
        let (xi, e) = if table[0].1 <= table[last].1 { table[0] } else { table[last] };
        return Ok((BandMinimum { energy: e.min(emin), xi_star: xi, attained: false }, table));
    }
    let (xi, e) = golden(|x| band_energy(kind, a, x, h), table[imin - 1].0, table[imin + 1].0, xi_tol)?;
    Ok((BandMinimum { energy: e, xi_star: xi, attained: true }, table))
}

/// Θ₀ as the minimum of the de Gennes band. The grid supplies the spacing;
/// the window is sized per ξ.
pub fn de_gennes_theta0(grid: &Grid1D, xi_tol: f64) -> Result<BandMinimum> {
    let (m, _) = minimize_band(FiberKind::HalfLineDeGennes, 1.0, grid.h(), xi_tol)?;
    if !m.attained {
        return Err(Error::Bracket(format!("de Gennes band minimum at scan edge xi={}", m.xi_star)));
    }
    Ok(m)
}

/// β_a as the infimum of the Iwatsuka band.
pub fn iwatsuka_beta(a: f64, grid: &Grid1D, xi_tol: f64) -> Result<BandMinimum> {
    check_step_value(a)?;
    Ok(minimize_band(FiberKind::IwatsukaStep, a, grid.h(), xi_tol)?.0)
}

pub(crate) fn check_step_value(a: f64) -> Result<()> {
    if !(-1.0..1.0).contains(&a) || a == 0.0 {
        return Err(Error::Input(format!("field value a={a} outside [-1,1) without 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_level() {
        let spec = FiberSpec::de_gennes(0.0);
        let e = fiber_ground_energy(&spec, &Grid1D::default_half_line()).unwrap();
        assert!((e - 1.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn uniform_unit_field_is_landau_level() {
        for xi in [-2.0, 0.0, 1.5] {
            let e = band_energy(FiberKind::IwatsukaStep, 1.0, xi, 0.01).unwrap();
            assert!((e - 1.0).abs() < 1e-4, "xi={xi}: {e}");
        }
    }

    #[test]
    fn truncation_is_detected() {
        let spec = FiberSpec::de_gennes(0.7);
        let grid = Grid1D::new(0.0, 2.0, 201, Boundary::Neumann, Boundary::Dirichlet).unwrap();
        assert!(matches!(fiber_ground_energy(&spec, &grid), Err(Error::Truncation(_))));
    }

    #[test]
    fn sturm_matches_small_dense() {
        // [[2,-1],[-1,2]] has eigenvalues 1 and 3
        let e = lowest_tridiagonal(&[2.0, 2.0], &[-1.0]);
        assert!((e - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unimodality_helper() {
        assert!(is_unimodal(&[3.0, 2.0, 1.0, 2.0, 5.0]));
        assert!(!is_unimodal(&[3.0, 1.0, 2.0, 1.0, 5.0]));
    }

    #[test]
    fn rejects_out_of_range_a() {
        let g = Grid1D::default_half_line();
        assert!(iwatsuka_beta(1.0, &g, 1e-6).is_err());
        assert!(iwatsuka_beta(0.0, &g, 1e-6).is_err());
    }
}
