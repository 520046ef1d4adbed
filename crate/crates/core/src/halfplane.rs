//! The corner-step half-plane operator −(∇ − iA_{α,a})² on {x₂ > 0} and the
//! unit-field sector operator, truncated to a disc of radius r with a
//! Dirichlet arc and a magnetic Neumann flat edge.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::eigen::{smallest_eigenpairs_with, EigOptions, EigenPair};
use crate::error::{Error, Result};
use crate::lattice::{Dir, Lattice, LatticeSpec, Shape, UpperHalfPlane, Wedge};
use crate::sparse::{SparseHermitian, C64};
use crate::THETA0;

/// Minimal number of grid steps per truncation radius.
pub const MIN_STEPS_PER_RADIUS: f64 = 40.0;

/// Default radius ladder for extrapolation.
pub const DEFAULT_LADDER: [f64; 4] = [6.0, 9.0, 12.0, 16.0];

/// Default spacing, shared by every radius of a ladder.
pub const DEFAULT_H: f64 = 0.15;

/// Successive ladder values closer than this count as converged.
pub const STALL_TOL: f64 = 1e-3;

/// Default ladder and spacing for `spec`, stretched by the longer magnetic
/// length ℓ = 1/√min(1, |a|): radii by ℓ, spacing by √ℓ. For |a| < 1 the
/// ground state spreads along the weak-field edge on the scale ℓ, and
/// unscaled radii leave the truncation shift far from its asymptotic form.
pub fn default_ladder(spec: &StepAngleSpec) -> (Vec<f64>, f64) {
    let ell = 1.0 / spec.a.abs().min(1.0).sqrt();
    (DEFAULT_LADDER.iter().map(|r| r * ell).collect(), DEFAULT_H * ell.sqrt())
}

const EIG_TOL: f64 = 1e-7;
const EIG_MAX_ITER: usize = 20_000;
const MIN_FRACTION: f64 = 0.05;

/// Field 1 in D¹ = {θ < α} and `a` in D² = {θ > α}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepAngleSpec {
    pub alpha: f64,
    pub a: f64,
}

impl StepAngleSpec {
    pub fn new(alpha: f64, a: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(Error::Geometry(format!("angle {alpha} outside (0, π)")));
        }
        if !(-1.0..1.0).contains(&a) || a == 0.0 {
            return Err(Error::Input(format!("field value {a} outside [-1, 1) \\ {{0}}")));
        }
        Ok(Self { alpha, a })
    }

    /// |a|Θ₀, the bottom of the essential spectrum.
    pub fn threshold(&self) -> f64 {
        self.a.abs() * THETA0
    }

    pub fn in_d1(&self, x: f64, y: f64) -> bool {
        y.atan2(x) < self.alpha
    }

    fn branch(&self, d1: bool, x: f64, y: f64) -> f64 {
        let (alpha, a) = (self.alpha, self.a);
        if alpha < FRAC_PI_2 {
            if d1 {
                x + (a - 1.0) / alpha.tan() * y
            } else {
                a * x
            }
        } else if alpha > FRAC_PI_2 {
            if d1 {
                x
            } else {
                a * x + (1.0 - a) / alpha.tan() * y
            }
        } else if d1 {
            x
        } else {
            a * x
        }
    }

    /// Second component of A_{α,a}; the first one vanishes.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        self.branch(self.in_d1(x, y), x, y)
    }

    /// Both branch formulas at one point, for continuity checks.
    pub fn branches(&self, x: f64, y: f64) -> (f64, f64) {
        (self.branch(true, x, y), self.branch(false, x, y))
    }

    /// ∫ A₂(x, t) dt over [y0, y1], exact: A₂ is linear in t on each side
    /// of the ray.
    pub fn vertical_integral(&self, x: f64, y0: f64, y1: f64) -> f64 {
        let mut cuts = vec![y0];
        let (s, c) = self.alpha.sin_cos();
        if x * c > 0.0 {
            let t = x * s / c;
            if t > y0 && t < y1 {
                cuts.push(t);
            }
        }
        cuts.push(y1);
        cuts.windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                self.potential(x, m) * (w[1] - w[0])
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    D1,
    D2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    NeumannFlat,
    /// Arc nodes are eliminated, so this label never appears on an active
    /// node; it is kept for completeness of the classification.
    DirichletArc,
}

/// Active nodes of a truncated half-disc or sector, with link angles.
#[derive(Clone, Debug)]
pub struct Grid2D {
    pub lattice: Arc<Lattice>,
    pub r: f64,
    pub region: Vec<Region>,
    pub boundary: Vec<Option<BoundaryKind>>,
    /// ∫ A·dl along each lattice edge.
    pub theta: Vec<f64>,
}

impl Grid2D {
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn matrix(&self) -> SparseHermitian {
        self.lattice.assemble(&self.theta, 1.0)
    }

    /// Matrix with the vector potential switched off.
    pub fn zero_field_matrix(&self) -> SparseHermitian {
        self.lattice.assemble(&vec![0.0; self.theta.len()], 1.0)
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.lattice.nodes.iter().map(|n| (n.x, n.y)).collect()
    }
}

fn check_resolution(r: f64, h: f64) -> Result<()> {
    if !(r > 0.0 && h > 0.0) {
        return Err(Error::Input(format!("radius {r} and spacing {h} must be positive")));
    }
    if r / h < MIN_STEPS_PER_RADIUS - 1e-9 {
        return Err(Error::Resolution(format!(
            "r/h = {:.2} is below {MIN_STEPS_PER_RADIUS}",
            r / h
        )));
    }
    Ok(())
}

fn truncated_lattice(shape: &dyn Shape, r: f64, h: f64) -> Arc<Lattice> {
    let n = (r / h).ceil() as i64 + 1;
    let outside = move |x: f64, y: f64| x * x + y * y >= r * r * (1.0 - 1e-12);
    Lattice::build(&LatticeSpec {
        h,
        i_range: (-n, n),
        j_range: (0, n),
        shape,
        dirichlet: &outside,
        min_fraction: MIN_FRACTION,
    })
}

fn labels(lattice: &Lattice, in_d1: impl Fn(f64, f64) -> bool) -> (Vec<Region>, Vec<Option<BoundaryKind>>) {
    let region = lattice
        .nodes
        .iter()
        .map(|n| if in_d1(n.x, n.y) { Region::D1 } else { Region::D2 })
        .collect();
    let boundary = lattice
        .nodes
        .iter()
        .map(|n| (n.j == 0).then_some(BoundaryKind::NeumannFlat))
        .collect();
    (region, boundary)
}

fn vertical_angles(lattice: &Lattice, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let h = lattice.h;
    lattice
        .edges
        .iter()
        .map(|e| match e.dir {
            Dir::X => 0.0,
            Dir::Y => {
                let n = &lattice.nodes[e.a];
                f(n.x, n.y, n.y + h)
            }
        })
        .collect()
}

/// Lattice and link angles for the truncated step operator on B_r⁺.
pub fn halfplane_grid(spec: &StepAngleSpec, r: f64, h: f64) -> Result<Grid2D> {
    let spec = StepAngleSpec::new(spec.alpha, spec.a)?;
    check_resolution(r, h)?;
    let lattice = truncated_lattice(&UpperHalfPlane, r, h);
    let (region, boundary) = labels(&lattice, |x, y| spec.in_d1(x, y));
    let theta = vertical_angles(&lattice, |x, y0, y1| spec.vertical_integral(x, y0, y1));
    Ok(Grid2D { lattice, r, region, boundary, theta })
}

pub fn assemble_halfplane(spec: &StepAngleSpec, r: f64, h: f64) -> Result<SparseHermitian> {
    Ok(halfplane_grid(spec, r, h)?.matrix())
}

/// Unit-field sector {0 < θ < α} truncated at radius r, gauge A = (0, x₁).
pub fn sector_grid(alpha: f64, r: f64, h: f64) -> Result<Grid2D> {
    if !(alpha > 0.0 && alpha <= PI) {
        return Err(Error::Geometry(format!("sector angle {alpha} outside (0, π]")));
    }
    check_resolution(r, h)?;
    let lattice = truncated_lattice(&Wedge { alpha }, r, h);
    let (region, boundary) = labels(&lattice, |_, _| true);
    let theta = vertical_angles(&lattice, |x, y0, y1| x * (y1 - y0));
    Ok(Grid2D { lattice, r, region, boundary, theta })
}

fn lowest(m: &SparseHermitian, k: usize, opts: &EigOptions) -> Result<Vec<EigenPair>> {
    let k = k.min(m.dim());
    smallest_eigenpairs_with(m, k, opts)
}

fn default_opts() -> EigOptions {
    EigOptions { tol: EIG_TOL, max_iter: EIG_MAX_ITER, seed: 7, ..EigOptions::default() }
}

#[derive(Clone, Debug)]
pub struct TruncatedEig {
    pub spec: StepAngleSpec,
    pub r: f64,
    pub h: f64,
    pub value: f64,
    /// Second eigenvalue, used to confirm separation from the threshold.
    pub second: Option<f64>,
    /// Weight-scaled ground state: |vector_k|² is the mass at node k.
    pub pair: EigenPair,
    pub grid: Grid2D,
}

pub fn mu_truncated(spec: &StepAngleSpec, r: f64, h: f64) -> Result<TruncatedEig> {
    solve_truncated(spec, r, h, None, false)
}

/// As [`mu_truncated`], also converging the second eigenvalue.
pub fn mu_truncated_with_second(spec: &StepAngleSpec, r: f64, h: f64) -> Result<TruncatedEig> {
    solve_truncated(spec, r, h, None, true)
}

/// Transfers a ground state to another grid with the same spacing by
/// matching lattice indices; unmatched nodes start at zero.
fn transfer(from: &Grid2D, y: &[C64], to: &Grid2D) -> Option<Vec<C64>> {
    if (from.lattice.h - to.lattice.h).abs() > 1e-15 {
        return None;
    }
    let u = from.lattice.unscale(y);
    let v: Vec<C64> = to
        .lattice
        .nodes
        .iter()
        .map(|n| from.lattice.node_index(n.i, n.j).map_or(C64::new(0.0, 0.0), |k| u[k]))
        .collect();
    Some(to.lattice.scale(&v))
}

/// As [`mu_truncated`], warm-started from a previous result.
pub fn mu_truncated_from(spec: &StepAngleSpec, r: f64, h: f64, prev: Option<&TruncatedEig>) -> Result<TruncatedEig> {
    solve_truncated(spec, r, h, prev, false)
}

fn solve_truncated(
    spec: &StepAngleSpec,
    r: f64,
    h: f64,
    prev: Option<&TruncatedEig>,
    second: bool,
) -> Result<TruncatedEig> {
    let grid = halfplane_grid(spec, r, h)?;
    let mut opts = default_opts();
    if let Some(v) = prev.and_then(|p| transfer(&p.grid, &p.pair.vector, &grid)) {
        opts = opts.with_initial(vec![v]);
    }
    let pairs = lowest(&grid.matrix(), if second { 2 } else { 1 }, &opts)?;
    let second = pairs.get(1).map(|p| p.value);
    let pair = pairs.into_iter().next().expect("at least one pair");
    Ok(TruncatedEig { spec: *spec, r, h, value: pair.value, second, pair, grid })
}

/// μ(α,a,r) at spacings h and 2h; the difference estimates the
/// discretization error of the finer value.
pub fn mu_refinement(spec: &StepAngleSpec, r: f64, h: f64) -> Result<(f64, f64)> {
    let fine = mu_truncated(spec, r, h)?.value;
    let coarse = mu_truncated(spec, r, 2.0 * h)?.value;
    Ok((fine, (fine - coarse).abs()))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Extrapolation {
    pub mu: f64,
    pub converged: bool,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// μ∞ of the fit μ(r) ≈ μ∞ + C/(r+δ)² over the last three radii.
    pub tail_fit: Option<f64>,
}

impl Extrapolation {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { radii: self.radii, values: self.values })
        }
    }
}

/// μ∞ in μ(r) ≈ μ∞ + C/(r+δ)², interpolating the last three values. Falls
/// back to a least-squares fit with δ = 0 when no δ > −r₁ reproduces them.
pub fn tail_fit(radii: &[f64], values: &[f64]) -> Option<f64> {
    let n = radii.len();
    if n < 2 || values.len() != n {
        return None;
    }
    if n >= 3 {
        let (r, v) = (&radii[n - 3..], &values[n - 3..]);
        if let Some(d) = solve_shift(r, v) {
            let g = |x: f64| 1.0 / ((x + d) * (x + d));
            let c = (v[1] - v[2]) / (g(r[1]) - g(r[2]));
            return Some(v[2] - c * g(r[2]));
        }
    }
    let xs: Vec<f64> = radii.iter().map(|r| 1.0 / (r * r)).collect();
    let m = n as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = values.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(my - sxy / sxx * mx)
}

/// δ with (v₀−v₁)/(v₁−v₂) = (g₀−g₁)/(g₁−g₂), g = (r+δ)^{-2}.
fn solve_shift(r: &[f64], v: &[f64]) -> Option<f64> {
    let (d01, d12) = (v[0] - v[1], v[1] - v[2]);
    if d12 == 0.0 || d01 / d12 <= 0.0 {
        return None;
    }
    let target = d01 / d12;
    let ratio = |d: f64| {
        let g = |x: f64| 1.0 / ((x + d) * (x + d));
        (g(r[0]) - g(r[1])) / (g(r[1]) - g(r[2]))
    };
    // the ratio decreases from +∞ at δ = −r₀ towards (r₁−r₀)/(r₂−r₁)
    let (mut lo, mut hi) = (-r[0] * (1.0 - 1e-6), 100.0 * r[2]);
    if !(ratio(lo) > target && ratio(hi) < target) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn extrapolate(radii: Vec<f64>, values: Vec<f64>) -> Extrapolation {
    let n = values.len();
    let last = values[n - 1];
    let converged = (values[n - 1] - values[n - 2]).abs() < STALL_TOL;
    let tail = tail_fit(&radii[n - 3..], &values[n - 3..]);
    let mu = if converged {
        last
    } else {
        tail.map_or(last, |t| t.min(last))
    };
    Extrapolation { mu, converged, radii, values, tail_fit: tail }
}

fn check_ladder(r_list: &[f64]) -> Result<()> {
    if r_list.len() < 3 {
        return Err(Error::Input(format!("need at least 3 radii, got {}", r_list.len())));
    }
    if r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// μ(α,a) from a ladder of truncation radii at a fixed spacing. Converged
/// when the last two values differ by less than [`STALL_TOL`]; otherwise
/// `mu` is the smaller of the last value and the tail fit.
pub fn mu_extrapolated(spec: &StepAngleSpec, r_list: &[f64], h: f64) -> Result<Extrapolation> {
    Ok(mu_extrapolated_with_state(spec, r_list, h)?.0)
}

/// As [`mu_extrapolated`], also returning the eigenpair at the largest radius.
pub fn mu_extrapolated_with_state(
    spec: &StepAngleSpec,
    r_list: &[f64],
    h: f64,
) -> Result<(Extrapolation, TruncatedEig)> {
    check_ladder(r_list)?;
    let mut values = Vec::with_capacity(r_list.len());
    let mut prev: Option<TruncatedEig> = None;
    for &r in r_list {
        let e = mu_truncated_from(spec, r, h, prev.as_ref())?;
        values.push(e.value);
        prev = Some(e);
    }
    let last = prev.expect("ladder is nonempty");
    Ok((extrapolate(r_list.to_vec(), values), last))
}

fn sector_ground(alpha: f64, r: f64, h: f64, prev: Option<&(Grid2D, EigenPair)>) -> Result<(Grid2D, EigenPair)> {
    let grid = sector_grid(alpha, r, h)?;
    let mut opts = default_opts();
    if let Some(v) = prev.and_then(|p| transfer(&p.0, &p.1.vector, &grid)) {
        opts = opts.with_initial(vec![v]);
    }
    let pair = lowest(&grid.matrix(), 1, &opts)?.remove(0);
    Ok((grid, pair))
}

/// μ(α) truncated at radius r.
pub fn sector_mu(alpha: f64, r: f64, h: f64) -> Result<f64> {
    Ok(sector_ground(alpha, r, h, None)?.1.value)
}

/// μ(α) extrapolated in r. The truncation shift of the sector problem decays
/// only like 1/r² when the ground state is not localized at the vertex, so
/// the tail fit is used whenever the ladder has not stalled.
pub fn sector_mu_extrapolated(alpha: f64, r_list: &[f64], h: f64) -> Result<Extrapolation> {
    check_ladder(r_list)?;
    let mut values = Vec::with_capacity(r_list.len());
    let mut prev = None;
    for &r in r_list {
        let g = sector_ground(alpha, r, h, prev.as_ref())?;
        values.push(g.1.value);
        prev = Some(g);
    }
    Ok(extrapolate(r_list.to_vec(), values))
}

/// Sector ground state at α = π/2 mirrored to the half-disc, û(x,y) = u(|x|,y),
/// and its Rayleigh quotient for the (π/2, −1) operator. Returns
/// (sector μ, quotient).
pub fn symmetrized_quotient(r: f64, h: f64) -> Result<(f64, f64)> {
    let (sector, pair) = sector_ground(FRAC_PI_2, r, h, None)?;
    let u = sector.lattice.unscale(&pair.vector);
    let spec = StepAngleSpec::new(FRAC_PI_2, -1.0)?;
    let hp = halfplane_grid(&spec, r, h)?;
    let mut v = vec![C64::new(0.0, 0.0); hp.len()];
    for (k, n) in hp.lattice.nodes.iter().enumerate() {
        if let Some(s) = sector.lattice.node_index(n.i.abs(), n.j) {
            v[k] = u[s];
        }
    }
    let q = hp.lattice.quadratic_form(&v, &hp.theta, 1.0);
    let norm: f64 = v.iter().zip(&hp.lattice.nodes).map(|(z, n)| z.norm_sqr() * n.weight).sum();
    Ok((pair.value, q / norm))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DecayFit {
    /// d/dρ of ½·ln(mass density) over the annuli.
    pub slope: f64,
    /// R² of the linear fit.
    pub fit_quality: f64,
    /// No measurable decay or too few annuli.
    pub degenerate: bool,
}

/// Radial decay rate of a nodal mass distribution. Annuli of width 2h
/// between r/4 and 3r/4; the fitted quantity is ½·ln(mass/area).
pub fn radial_decay(positions: &[(f64, f64)], weights: &[f64], mass: &[f64], r: f64, h: f64) -> DecayFit {
    let (lo, hi) = (0.25 * r, 0.75 * r);
    let width = 2.0 * h;
    let nb = ((hi - lo) / width).floor().max(1.0) as usize;
    let mut bm = vec![0.0; nb];
    let mut ba = vec![0.0; nb];
    let mut br = vec![0.0; nb];
    for ((p, w), m) in positions.iter().zip(weights).zip(mass) {
        let rho = p.0.hypot(p.1);
        if rho < lo || rho >= lo + nb as f64 * width {
            continue;
        }
        let b = ((rho - lo) / width) as usize;
        bm[b] += m;
        ba[b] += w;
        br[b] += rho * w;
    }
    let pts: Vec<(f64, f64)> = (0..nb)
        .filter(|&b| ba[b] > 0.0 && bm[b] > 0.0)
        .map(|b| (br[b] / ba[b], 0.5 * (bm[b] / ba[b]).ln()))
        .collect();
    let degenerate = DecayFit { slope: 0.0, fit_quality: 0.0, degenerate: true };
    if pts.len() < 3 {
        return degenerate;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    if syy <= 1e-12 * n {
        return DecayFit { slope, ..degenerate };
    }
    let fit_quality = sxy * sxy / (sxx * syy);
    DecayFit { slope, fit_quality, degenerate: slope > -1e-3 || fit_quality < 0.5 }
}

/// Decay rate of a bound state.
pub fn decay_profile(eig: &TruncatedEig) -> Result<DecayFit> {
    let threshold = eig.spec.threshold();
    if !(eig.value < threshold) {
        return Err(Error::NotBoundState { value: eig.value, threshold });
    }
    let mass: Vec<f64> = eig.pair.vector.iter().map(|z| z.norm_sqr()).collect();
    Ok(radial_decay(&eig.grid.positions(), &eig.grid.lattice.weights(), &mass, eig.r, eig.h))
}

/// Lower bound on the decay rate: √(|a|Θ₀ − μ − δ) with δ = (|a|Θ₀ − μ)/2.
pub fn agmon_rate(spec: &StepAngleSpec, mu: f64) -> f64 {
    ((spec.threshold() - mu) / 2.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_on_the_ray() {
        for &alpha in &[0.3, 1.0, FRAC_PI_2, 2.0, 2.9] {
            for &a in &[-1.0, -0.3, 0.5] {
                let s = StepAngleSpec::new(alpha, a).unwrap();
                for k in 1..10 {
                    let rho = k as f64 * 0.7;
                    let (b1, b2) = s.branches(rho * alpha.cos(), rho * alpha.sin());
                    assert!((b1 - b2).abs() < 1e-12, "{alpha} {a} {rho}");
                }
            }
        }
    }

    #[test]
    fn tail_fit_recovers_limit() {
        let radii = [6.0, 9.0, 12.0, 16.0];
        let v: Vec<f64> = radii.iter().map(|r| 0.3 + 5.0 / ((r + 1.5) * (r + 1.5))).collect();
        assert!((tail_fit(&radii, &v).unwrap() - 0.3).abs() < 1e-10);
        let flat = [0.5, 0.5, 0.5, 0.5];
        assert!((tail_fit(&radii, &flat).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(StepAngleSpec::new(0.0, -1.0), Err(Error::Geometry(_))));
        assert!(matches!(StepAngleSpec::new(PI, -1.0), Err(Error::Geometry(_))));
        assert!(StepAngleSpec::new(1.0, 0.0).is_err());
        assert!(StepAngleSpec::new(1.0, 1.0).is_err());
        let s = StepAngleSpec::new(1.0, -1.0).unwrap();
        assert!(matches!(assemble_halfplane(&s, 5.0, 0.25), Err(Error::Resolution(_))));
    }

    #[test]
    fn plaquette_flux_matches_field() {
        let s = StepAngleSpec::new(0.9, -0.4).unwrap();
        let g = halfplane_grid(&s, 4.0, 0.1).unwrap();
        let h = g.lattice.h;
        for n in &g.lattice.nodes {
            if n.j == 0 || n.x * n.x + n.y * n.y > 9.0 {
                continue;
            }
            let circ = s.vertical_integral(n.x + h, n.y, n.y + h) - s.vertical_integral(n.x, n.y, n.y + h);
            let corners = [(n.x, n.y), (n.x + h, n.y), (n.x, n.y + h), (n.x + h, n.y + h)];
            let d1 = corners.iter().filter(|c| s.in_d1(c.0, c.1)).count();
            let expect = match d1 {
                4 => h * h,
                0 => s.a * h * h,
                _ => continue,
            };
            assert!((circ - expect).abs() < 1e-13, "{circ} {expect}");
        }
    }
}
