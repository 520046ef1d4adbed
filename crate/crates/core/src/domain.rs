//! Bounded domains split by a straight barrier, the divergence-free
//! potential of the step field, and the linear ground-state energy λ(b).
//!
//! The barrier is the vertical line x₁ = d with Ω₁ = Ω ∩ {x₁ > d}. The
//! stream function lives on dual nodes (plaquette centres) and solves
//! −Δu = B₀ with u = 0 on ∂Ω, using a shortened-arm stencil at the boundary.
//! Link angles are differences of u across each edge, so the circulation
//! around a plaquette is h² times its cell-averaged B₀.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{smallest_eigenpairs_with, EigOptions};
use crate::error::{Error, Result};
use crate::lattice::{area_fraction, Dir, Lattice, LatticeSpec, Shape};
use crate::sparse::{SparseHermitian, C64};

/// Cells required across the narrower side of the barrier.
pub const MIN_CELLS_ACROSS: f64 = 8.0;

/// The magnetic length 1/√b must span this many cells.
pub const MIN_CELLS_PER_MAGNETIC_LENGTH: f64 = 4.0;

/// Localization radius in magnetic lengths.
pub const LOCALIZATION_RADIUS: f64 = 8.0;

/// Smallest shortened arm in the boundary stencil.
const MIN_ARM: f64 = 1e-3;
const MIN_FRACTION: f64 = 0.05;
const CG_TOL: f64 = 1e-12;
const EIG_TOL: f64 = 1e-7;
const EIG_MAX_ITER: usize = 20_000;

/// r(φ) = R(1 + Σ c_k cos kφ + s_k sin kφ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourierMode {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DomainShape {
    Disc { radius: f64 },
    Blob { radius: f64, modes: Vec<FourierMode> },
}

impl DomainShape {
    pub fn unit_disc() -> Self {
        DomainShape::Disc { radius: 1.0 }
    }

    /// Boundary radius in direction φ and its derivative.
    pub fn boundary_radius(&self, phi: f64) -> (f64, f64) {
        match self {
            DomainShape::Disc { radius } => (*radius, 0.0),
            DomainShape::Blob { radius, modes } => {
                let mut r = 1.0;
                let mut dr = 0.0;
                for m in modes {
                    let k = m.k as f64;
                    let (s, c) = (k * phi).sin_cos();
                    r += m.cos * c + m.sin * s;
                    dr += k * (m.sin * c - m.cos * s);
                }
                (radius * r, radius * dr)
            }
        }
    }

    /// Upper bound on the boundary radius.
    pub fn max_radius(&self) -> f64 {
        match self {
            DomainShape::Disc { radius } => *radius,
            DomainShape::Blob { radius, modes } => {
                radius * (1.0 + modes.iter().map(|m| m.cos.abs() + m.sin.abs()).sum::<f64>())
            }
        }
    }

    fn min_radius(&self) -> f64 {
        match self {
            DomainShape::Disc { radius } => *radius,
            DomainShape::Blob { radius, modes } => {
                radius * (1.0 - modes.iter().map(|m| m.cos.abs() + m.sin.abs()).sum::<f64>())
            }
        }
    }

    /// Area enclosed, ½∫r(φ)² dφ.
    pub fn area(&self) -> f64 {
        match self {
            DomainShape::Disc { radius } => PI * radius * radius,
            DomainShape::Blob { .. } => {
                let n = 4096;
                (0..n)
                    .map(|k| {
                        let r = self.boundary_radius(2.0 * PI * k as f64 / n as f64).0;
                        0.5 * r * r
                    })
                    .sum::<f64>()
                    * 2.0
                    * PI
                    / n as f64
            }
        }
    }
}

impl Shape for DomainShape {
    fn level(&self, x: f64, y: f64) -> f64 {
        match self {
            DomainShape::Disc { radius } => x.hypot(y) - radius,
            DomainShape::Blob { .. } => x.hypot(y) - self.boundary_radius(y.atan2(x)).0,
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            DomainShape::Disc { .. } => 1.0,
            DomainShape::Blob { radius, modes } => {
                let dmax = radius * modes.iter().map(|m| m.k as f64 * (m.cos.abs() + m.sin.abs())).sum::<f64>();
                (1.0 + (dmax / self.min_radius().max(1e-9)).powi(2)).sqrt()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainSpec {
    pub shape: DomainShape,
    /// Barrier offset: Γ = {x₁ = d}.
    pub d: f64,
    pub a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Subdomain {
    Omega1,
    Omega2,
}

/// A validated domain with the barrier endpoints and their angles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub spec: DomainSpec,
    /// Barrier endpoints, upper first.
    pub points: [(f64, f64); 2],
    /// Angle at each endpoint between Γ (pointing into Ω) and ∂Ω (pointing
    /// into Ω₁).
    pub angles: [f64; 2],
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        if !(-1.0..1.0).contains(&spec.a) || spec.a == 0.0 {
            return Err(Error::Input(format!("field value {} outside [-1, 1) \\ {{0}}", spec.a)));
        }
        if let DomainShape::Blob { radius, .. } = &spec.shape {
            if !(spec.shape.min_radius() > 0.0 && *radius > 0.0) {
                return Err(Error::Geometry("blob radius must stay positive".into()));
            }
        }
        if let DomainShape::Disc { radius } = &spec.shape {
            if !(*radius > 0.0) {
                return Err(Error::Geometry(format!("disc radius {radius} must be positive")));
            }
        }
        let shape = &spec.shape;
        let d = spec.d;
        let top = shape.max_radius() * 1.01;
        let n = 4000;
        let ys: Vec<f64> = (0..=n).map(|k| -top + 2.0 * top * k as f64 / n as f64).collect();
        let mut crossings = Vec::new();
        for w in ys.windows(2) {
            let (l0, l1) = (shape.level(d, w[0]), shape.level(d, w[1]));
            if (l0 <= 0.0) != (l1 <= 0.0) {
                let (mut lo, mut hi) = (w[0], w[1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if (shape.level(d, mid) <= 0.0) == (l0 <= 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                crossings.push(0.5 * (lo + hi));
            }
        }
        if crossings.len() != 2 {
            return Err(Error::Geometry(format!(
                "barrier x = {d} meets the boundary at {} points, expected 2",
                crossings.len()
            )));
        }
        let points = [(d, crossings[1]), (d, crossings[0])];
        let mut angles = [0.0; 2];
        for (k, &(x, y)) in points.iter().enumerate() {
            let (gx, gy) = gradient(shape, x, y);
            let g = gx.hypot(gy);
            // tangent oriented towards x₁ > d
            let (mut tx, mut ty) = (-gy / g, gx / g);
            if tx < 0.0 {
                tx = -tx;
                ty = -ty;
            }
            if tx < 1e-3 {
                return Err(Error::Geometry(format!("barrier is tangent to the boundary at ({x}, {y})")));
            }
            let vy = if k == 0 { -1.0 } else { 1.0 };
            angles[k] = (vy * ty).clamp(-1.0, 1.0).acos();
        }
        Ok(Self { spec, points, angles })
    }

    pub fn subdomain(&self, x: f64, _y: f64) -> Subdomain {
        if x > self.spec.d {
            Subdomain::Omega1
        } else {
            Subdomain::Omega2
        }
    }

    /// B₀ at a point.
    pub fn b0(&self, x: f64, y: f64) -> f64 {
        match self.subdomain(x, y) {
            Subdomain::Omega1 => 1.0,
            Subdomain::Omega2 => self.spec.a,
        }
    }

    /// Average of B₀ over the axis-aligned cell of side h centred at (x, y).
    pub fn b0_cell(&self, x: f64, _y: f64, h: f64) -> f64 {
        let f = ((x + 0.5 * h - self.spec.d) / h).clamp(0.0, 1.0);
        self.spec.a + (1.0 - self.spec.a) * f
    }

    /// Widths of Ω₁ and Ω₂ along the x-axis through the barrier midpoint.
    fn widths(&self) -> (f64, f64) {
        let ym = 0.5 * (self.points[0].1 + self.points[1].1);
        let shape = &self.spec.shape;
        let reach = |dir: f64| {
            let (mut lo, mut hi) = (0.0, 4.0 * shape.max_radius());
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if shape.level(self.spec.d + dir * mid, ym) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        (reach(1.0), reach(-1.0))
    }
}

fn gradient(s: &dyn Shape, x: f64, y: f64) -> (f64, f64) {
    let e = 1e-7;
    (
        (s.level(x + e, y) - s.level(x - e, y)) / (2.0 * e),
        (s.level(x, y + e) - s.level(x, y - e)) / (2.0 * e),
    )
}

/// Active lattice of a domain with region labels.
#[derive(Clone, Debug)]
pub struct DomainGrid {
    pub domain: Domain,
    pub lattice: Arc<Lattice>,
    pub region: Vec<Subdomain>,
    /// Nodes whose control square is cut by ∂Ω (magnetic Neumann).
    pub on_boundary: Vec<bool>,
    /// Dual (plaquette-centre) index ranges, inclusive.
    i_range: (i64, i64),
    j_range: (i64, i64),
}

impl DomainGrid {
    pub fn h(&self) -> f64 {
        self.lattice.h
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Inside area of Ω₁ and Ω₂ from the node weights.
    pub fn region_areas(&self) -> (f64, f64) {
        let mut out = (0.0, 0.0);
        for (n, r) in self.lattice.nodes.iter().zip(&self.region) {
            match r {
                Subdomain::Omega1 => out.0 += n.weight,
                Subdomain::Omega2 => out.1 += n.weight,
            }
        }
        out
    }
}

pub fn build_domain(spec: &DomainSpec, h: f64) -> Result<DomainGrid> {
    let domain = Domain::new(spec.clone())?;
    if !(h > 0.0) {
        return Err(Error::Input(format!("spacing {h} must be positive")));
    }
    let (w1, w2) = domain.widths();
    if w1.min(w2) < MIN_CELLS_ACROSS * h {
        return Err(Error::Resolution(format!(
            "spacing {h} leaves fewer than {MIN_CELLS_ACROSS} cells across the narrower side ({:.4})",
            w1.min(w2)
        )));
    }
    let n = (spec.shape.max_radius() / h).ceil() as i64 + 2;
    let never = |_: f64, _: f64| false;
    let lattice = Lattice::build(&LatticeSpec {
        h,
        i_range: (-n, n),
        j_range: (-n, n),
        shape: &spec.shape,
        dirichlet: &never,
        min_fraction: MIN_FRACTION,
    });
    let region = lattice.nodes.iter().map(|p| domain.subdomain(p.x, p.y)).collect();
    let on_boundary = lattice.nodes.iter().map(|p| p.weight < h * h * (1.0 - 1e-12)).collect();
    Ok(DomainGrid { domain, lattice, region, on_boundary, i_range: (-n - 1, n), j_range: (-n - 1, n) })
}

/// Stream function on the dual lattice and the resulting link angles.
#[derive(Clone, Debug)]
pub struct VectorPotentialField {
    pub grid: Arc<DomainGrid>,
    /// u at inside dual nodes.
    pub stream: Vec<f64>,
    /// (i, j) of each inside dual node; its centre is ((i+½)h, (j+½)h).
    pub dual_nodes: Vec<(i64, i64)>,
    /// ∫F·dl along each lattice edge.
    pub theta: Vec<f64>,
    /// Nodal F from the adjacent edge angles.
    pub f_nodes: Vec<(f64, f64)>,
    /// Cell-averaged field used as the right-hand side.
    pub b0_dual: Vec<f64>,
    dual_index: Vec<u32>,
    arms: Vec<[f64; 4]>,
}

const NONE: u32 = u32::MAX;
// arm order: +x, −x, +y, −y
const ARMS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl VectorPotentialField {
    fn dual(&self, i: i64, j: i64) -> Option<usize> {
        let (i0, i1) = self.grid.i_range;
        let (j0, j1) = self.grid.j_range;
        if i < i0 || i > i1 || j < j0 || j > j1 {
            return None;
        }
        let nx = (i1 - i0 + 1) as usize;
        match self.dual_index[(j - j0) as usize * nx + (i - i0) as usize] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// u(b) − u(a) across the dual arm a → a + (di, dj), with the boundary
    /// value 0 reached at the shortened arm length when b is outside.
    fn arm_difference(&self, i: i64, j: i64, di: i64, dj: i64) -> f64 {
        let arm = |di: i64, dj: i64| ARMS.iter().position(|&x| x == (di, dj)).expect("unit arm");
        match (self.dual(i, j), self.dual(i + di, j + dj)) {
            (Some(a), Some(b)) => self.stream[b] - self.stream[a],
            (Some(a), None) => -self.stream[a] / self.arms[a][arm(di, dj)],
            (None, Some(b)) => self.stream[b] / self.arms[b][arm(-di, -dj)],
            (None, None) => 0.0,
        }
    }

    /// Magnetic matrix −(∇ − ibF)² on the domain grid.
    pub fn matrix(&self, b: f64) -> SparseHermitian {
        self.grid.lattice.assemble(&self.theta, b)
    }

    /// Largest |div F| over nodes whose four surrounding duals are inside.
    pub fn max_interior_divergence(&self) -> f64 {
        let lat = &self.grid.lattice;
        let h = lat.h;
        let mut out_x = vec![None; lat.len()];
        let mut out_y = vec![None; lat.len()];
        let mut in_x = vec![None; lat.len()];
        let mut in_y = vec![None; lat.len()];
        for (e, &t) in lat.edges.iter().zip(&self.theta) {
            match e.dir {
                Dir::X => {
                    out_x[e.a] = Some(t);
                    in_x[e.b] = Some(t);
                }
                Dir::Y => {
                    out_y[e.a] = Some(t);
                    in_y[e.b] = Some(t);
                }
            }
        }
        let mut worst = 0.0f64;
        for (k, n) in lat.nodes.iter().enumerate() {
            let all_in = [(n.i - 1, n.j - 1), (n.i, n.j - 1), (n.i - 1, n.j), (n.i, n.j)]
                .iter()
                .all(|&(i, j)| self.dual(i, j).is_some());
            if !all_in {
                continue;
            }
            if let (Some(ox), Some(ix), Some(oy), Some(iy)) = (out_x[k], in_x[k], out_y[k], in_y[k]) {
                worst = worst.max(((ox - ix) + (oy - iy)).abs() / (h * h));
            }
        }
        worst
    }

    /// Plaquette curl (circulation / h²) at every inside dual whose four
    /// corner nodes are active, paired with the dual centre.
    pub fn plaquette_curls(&self) -> Vec<((f64, f64), f64)> {
        let lat = &self.grid.lattice;
        let h = lat.h;
        let mut edge_at = std::collections::HashMap::new();
        for (k, e) in lat.edges.iter().enumerate() {
            let n = &lat.nodes[e.a];
            edge_at.insert((n.i, n.j, e.dir == Dir::X), k);
        }
        let mut out = Vec::new();
        for &(i, j) in &self.dual_nodes {
            let bottom = edge_at.get(&(i, j, true));
            let right = edge_at.get(&(i + 1, j, false));
            let top = edge_at.get(&(i, j + 1, true));
            let left = edge_at.get(&(i, j, false));
            if let (Some(&b), Some(&r), Some(&t), Some(&l)) = (bottom, right, top, left) {
                let circ = self.theta[b] + self.theta[r] - self.theta[t] - self.theta[l];
                out.push((((i as f64 + 0.5) * h, (j as f64 + 0.5) * h), circ / (h * h)));
            }
        }
        out
    }
}

/// F for the step field of the grid's domain.
#[allow(non_snake_case)]
pub fn compute_F(grid: &Arc<DomainGrid>) -> Result<VectorPotentialField> {
    let dom = grid.domain.clone();
    compute_field_with(grid, &move |x, y, h| dom.b0_cell(x, y, h))
}

/// F for an arbitrary cell-averaged field B(x, y, h).
pub fn compute_field_with(
    grid: &Arc<DomainGrid>,
    b0_cell: &(dyn Fn(f64, f64, f64) -> f64 + Sync),
) -> Result<VectorPotentialField> {
    let h = grid.h();
    let shape = &grid.domain.spec.shape;
    let (i0, i1) = grid.i_range;
    let (j0, j1) = grid.j_range;
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    let centre = |i: i64, j: i64| ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
    let mut dual_index = vec![NONE; nx * ny];
    let mut dual_nodes = Vec::new();
    for jj in 0..ny {
        for ii in 0..nx {
            let (i, j) = (i0 + ii as i64, j0 + jj as i64);
            let (x, y) = centre(i, j);
            if shape.level(x, y) < 0.0 {
                dual_index[jj * nx + ii] = dual_nodes.len() as u32;
                dual_nodes.push((i, j));
            }
        }
    }
    let nd = dual_nodes.len();
    let lookup = |i: i64, j: i64| -> Option<usize> {
        if i < i0 || i > i1 || j < j0 || j > j1 {
            return None;
        }
        match dual_index[(j - j0) as usize * nx + (i - i0) as usize] {
            NONE => None,
            k => Some(k as usize),
        }
    };
    let mut nbrs = vec![[None; 4]; nd];
    let mut arms = vec![[1.0; 4]; nd];
    for (k, &(i, j)) in dual_nodes.iter().enumerate() {
        let (x, y) = centre(i, j);
        for (a, &(di, dj)) in ARMS.iter().enumerate() {
            match lookup(i + di, j + dj) {
                Some(m) => nbrs[k][a] = Some(m),
                None => {
                    let (mut lo, mut hi) = (0.0, 1.0);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if shape.level(x + di as f64 * h * mid, y + dj as f64 * h * mid) < 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    arms[k][a] = lo.max(MIN_ARM);
                }
            }
        }
    }
    let b0_dual: Vec<f64> = dual_nodes
        .iter()
        .map(|&(i, j)| {
            let (x, y) = centre(i, j);
            b0_cell(x, y, h)
        })
        .collect();
    let rhs: Vec<f64> = b0_dual.iter().map(|b| b * h * h).collect();
    let diag: Vec<f64> = (0..nd)
        .map(|k| (0..4).map(|a| if nbrs[k][a].is_some() { 1.0 } else { 1.0 / arms[k][a] }).sum())
        .collect();
    let apply = |u: &[f64], out: &mut [f64]| {
        for k in 0..nd {
            let mut s = diag[k] * u[k];
            for m in nbrs[k].iter().flatten() {
                s -= u[*m];
            }
            out[k] = s;
        }
    };
    let stream = pcg(nd, &apply, &diag, &rhs, CG_TOL, 20 * (nx + ny) + 1000)?;

    let mut field = VectorPotentialField {
        grid: grid.clone(),
        stream,
        dual_nodes,
        theta: Vec::new(),
        f_nodes: Vec::new(),
        b0_dual,
        dual_index,
        arms,
    };
    let lat = &grid.lattice;
    let theta: Vec<f64> = lat
        .edges
        .iter()
        .map(|e| {
            let n = &lat.nodes[e.a];
            match e.dir {
                Dir::X => field.arm_difference(n.i, n.j - 1, 0, 1),
                Dir::Y => -field.arm_difference(n.i - 1, n.j, 1, 0),
            }
        })
        .collect();
    let mut acc = vec![(0.0, 0, 0.0, 0); lat.len()];
    for (e, &t) in lat.edges.iter().zip(&theta) {
        for end in [e.a, e.b] {
            match e.dir {
                Dir::X => {
                    acc[end].0 += t / h;
                    acc[end].1 += 1;
                }
                Dir::Y => {
                    acc[end].2 += t / h;
                    acc[end].3 += 1;
                }
            }
        }
    }
    field.f_nodes = acc
        .iter()
        .map(|&(fx, nx, fy, ny)| (fx / nx.max(1) as f64, fy / ny.max(1) as f64))
        .collect();
    field.theta = theta;
    Ok(field)
}

/// Inside area h²·fraction of each dual cell of `field`.
pub fn area_weights(field: &VectorPotentialField) -> Vec<f64> {
    let h = field.grid.h();
    let shape = &field.grid.domain.spec.shape;
    field
        .dual_nodes
        .iter()
        .map(|&(i, j)| h * h * area_fraction(shape, (i as f64 + 0.5) * h, (j as f64 + 0.5) * h, h))
        .collect()
}

/// Jacobi-preconditioned conjugate gradients.
pub(crate) fn pcg(
    n: usize,
    apply: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= tol * bnorm {
            return Ok(x);
        }
        for k in 0..n {
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::Solver(format!("conjugate gradients did not reach {tol:e} in {max_iter} iterations")))
}

#[derive(Clone, Debug)]
pub struct LinearGroundState {
    pub b: f64,
    pub lambda: f64,
    /// Weight-scaled eigenvector with unit Euclidean norm.
    pub eigvec: Vec<C64>,
    /// Mass within 8/√b of each barrier endpoint.
    pub localization: [f64; 2],
}

fn check_magnetic_length(h: f64, b: f64) -> Result<()> {
    if b > 0.0 && 1.0 / b.sqrt() < MIN_CELLS_PER_MAGNETIC_LENGTH * h * (1.0 - 1e-12) {
        return Err(Error::Resolution(format!(
            "magnetic length {:.4} is below {MIN_CELLS_PER_MAGNETIC_LENGTH} cells of size {h}",
            1.0 / b.sqrt()
        )));
    }
    Ok(())
}

/// Largest b allowed by the magnetic-length guard.
pub fn max_resolvable_b(h: f64) -> f64 {
    1.0 / (MIN_CELLS_PER_MAGNETIC_LENGTH * h).powi(2)
}

pub fn lambda_b(field: &VectorPotentialField, b: f64) -> Result<LinearGroundState> {
    lambda_b_from(field, b, None)
}

/// As [`lambda_b`], warm-started from a previous eigenvector on the same grid.
pub fn lambda_b_from(field: &VectorPotentialField, b: f64, start: Option<&[C64]>) -> Result<LinearGroundState> {
    if !(b >= 0.0) {
        return Err(Error::Input(format!("field strength {b} must be nonnegative")));
    }
    let h = field.grid.h();
    check_magnetic_length(h, b)?;
    let m = field.matrix(b);
    let mut opts = EigOptions { tol: EIG_TOL, max_iter: EIG_MAX_ITER, seed: 11, ..EigOptions::default() };
    if let Some(v) = start {
        opts = opts.with_initial(vec![v.to_vec()]);
    }
    let pair = smallest_eigenpairs_with(&m, 1, &opts)?.remove(0);
    let localization = localization(&field.grid, &pair.vector, b);
    Ok(LinearGroundState { b, lambda: pair.value, eigvec: pair.vector, localization })
}

/// Mass of a weight-scaled vector within 8/√b of each barrier endpoint.
pub fn localization(grid: &DomainGrid, y: &[C64], b: f64) -> [f64; 2] {
    let total: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    let rad = if b > 0.0 { LOCALIZATION_RADIUS / b.sqrt() } else { f64::INFINITY };
    let mut out = [0.0; 2];
    for (k, p) in grid.domain.points.iter().enumerate() {
        let m: f64 = grid
            .lattice
            .nodes
            .iter()
            .zip(y)
            .filter(|(n, _)| (n.x - p.0).hypot(n.y - p.1) <= rad)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        out[k] = m / total;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub b: f64,
    pub lambda: f64,
    pub lambda_over_b: f64,
    pub frac_p1: f64,
    pub frac_p2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaCurve {
    pub rows: Vec<CurveRow>,
    /// Per consecutive pair: λ(b_{k+1}) > λ(b_k)(1 − 1e-6).
    pub increasing: Vec<bool>,
}

impl LambdaCurve {
    /// Monotonicity over the second half of the curve.
    pub fn tail_increasing(&self) -> bool {
        let n = self.increasing.len();
        self.increasing[n / 2..].iter().all(|&f| f)
    }
}

/// λ(b) over an increasing list, solved in parallel.
pub fn lambda_curve(field: &VectorPotentialField, b_list: &[f64]) -> Result<LambdaCurve> {
    if b_list.len() < 2 || b_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("b list must be strictly increasing with at least two entries".into()));
    }
    let h = field.grid.h();
    for &b in b_list {
        check_magnetic_length(h, b)?;
    }
    let states: Vec<LinearGroundState> = b_list.par_iter().map(|&b| lambda_b(field, b)).collect::<Result<_>>()?;
    let rows: Vec<CurveRow> = states
        .iter()
        .map(|s| CurveRow {
            b: s.b,
            lambda: s.lambda,
            lambda_over_b: if s.b > 0.0 { s.lambda / s.b } else { f64::NAN },
            frac_p1: s.localization[0],
            frac_p2: s.localization[1],
        })
        .collect();
    let increasing = rows.windows(2).map(|w| w[1].lambda > w[0].lambda * (1.0 - 1e-6)).collect();
    Ok(LambdaCurve { rows, increasing })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hc3Result {
    pub kappa: f64,
    #[serde(rename = "Hc3")]
    pub hc3: f64,
    /// λ(κ·Hc3)/κ² at the returned value.
    pub residual_ratio: f64,
    pub evaluations: usize,
}

/// Relative bracket width at which the root search stops.
pub const HC3_REL_TOL: f64 = 1e-4;

/// [0.7, 1.5]·κ/μ*.
pub fn default_bracket(kappa: f64, mu_star: f64) -> (f64, f64) {
    (0.7 * kappa / mu_star, 1.5 * kappa / mu_star)
}

/// Solves λ(κH) = κ² by bracketed false position.
pub fn solve_hc3(field: &VectorPotentialField, kappa: f64, bracket: (f64, f64)) -> Result<Hc3Result> {
    let (mut lo, mut hi) = bracket;
    if !(kappa > 0.0 && lo > 0.0 && hi > lo) {
        return Err(Error::Input(format!("invalid κ {kappa} or bracket ({lo}, {hi})")));
    }
    let k2 = kappa * kappa;
    let mut evals = 0;
    let mut eval = |hh: f64, start: Option<&[C64]>| -> Result<LinearGroundState> {
        evals += 1;
        lambda_b_from(field, kappa * hh, start)
    };
    let s_lo = eval(lo, None)?;
    let s_hi = eval(hi, Some(&s_lo.eigvec))?;
    let (f_lo, f_hi) = (s_lo.lambda - k2, s_hi.lambda - k2);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "λ(κH) − κ² has the same sign at H = {lo} ({f_lo:.4e}) and H = {hi} ({f_hi:.4e})"
        )));
    }
    // Illinois false position: λ(κH) is smooth and nearly linear in H
    let (mut f_lo, mut f_hi) = (f_lo, f_hi);
    let mut last = s_hi;
    let mut mid = hi;
    let mut ratio = last.lambda / k2;
    let mut side = 0i8;
    while (hi - lo) / mid >= HC3_REL_TOL {
        mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let s = eval(mid, Some(&last.eigvec))?;
        let f = s.lambda - k2;
        ratio = s.lambda / k2;
        if (f / k2).abs() < 0.1 * HC3_REL_TOL {
            break;
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        last = s;
    }
    Ok(Hc3Result { kappa, hc3: mid, residual_ratio: ratio, evaluations: evals })
}

/// Exponent p in H·μ*/κ − 1 ≈ C·κ^p, by least squares on log-log data.
/// Entries with a vanishing deviation are skipped.
pub fn remainder_exponent(kappas: &[f64], hc3: &[f64], mu_star: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = kappas
        .iter()
        .zip(hc3)
        .map(|(&k, &h)| (k.ln(), (h * mu_star / k - 1.0).abs()))
        .filter(|p| p.1 > 0.0)
        .map(|(x, y)| (x, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
