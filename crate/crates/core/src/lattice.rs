//! Cut-cell lattices for magnetic Laplacians.
//!
//! Nodes sit at (i·h, j·h). Each active node owns the part of its control
//! square inside the shape; each edge carries the inside fraction of its
//! dual face. With link angles θ_e = ∫_e A·dl the discrete form is
//!
//!   Q(u) = Σ_e c_e |e^{−ibθ_e} u_b − u_a|² + Σ_dirichlet c |u_a|²,
//!
//! and the assembled matrix is W^{-1/2} K W^{-1/2}, so Euclidean norms of
//! eigenvectors are grid L² norms.

use std::sync::Arc;

use crate::sparse::{HermitianBuilder, SparseHermitian, C64};

/// A region given by a level function, negative inside.
pub trait Shape: Send + Sync {
    fn level(&self, x: f64, y: f64) -> f64;

    /// Upper bound on |∇ level| near the boundary.
    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// {x₂ ≥ 0}
#[derive(Clone, Copy, Debug)]
pub struct UpperHalfPlane;

impl Shape for UpperHalfPlane {
    fn level(&self, _x: f64, y: f64) -> f64 {
        -y
    }
}

/// The sector {0 < θ < α} with α ∈ (0, π].
#[derive(Clone, Copy, Debug)]
pub struct Wedge {
    pub alpha: f64,
}

impl Shape for Wedge {
    fn level(&self, x: f64, y: f64) -> f64 {
        (-y).max(self.alpha.cos() * y - self.alpha.sin() * x)
    }
}

fn in_shape<S: Shape + ?Sized>(s: &S, x: f64, y: f64) -> bool {
    s.level(x, y) <= 0.0
}

/// Inside fraction of the segment p→q.
pub fn segment_fraction<S: Shape + ?Sized>(s: &S, p: (f64, f64), q: (f64, f64)) -> f64 {
    const PIECES: usize = 8;
    let at = |t: f64| (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1));
    let mut inside = 0.0;
    for k in 0..PIECES {
        let t0 = k as f64 / PIECES as f64;
        let t1 = (k + 1) as f64 / PIECES as f64;
        let (a0, a1) = (at(t0), at(t1));
        let i0 = in_shape(s, a0.0, a0.1);
        let i1 = in_shape(s, a1.0, a1.1);
        if i0 == i1 {
            if i0 {
                inside += t1 - t0;
            }
            continue;
        }
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let m = at(mid);
            if in_shape(s, m.0, m.1) == i0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cut = 0.5 * (lo + hi);
        inside += if i0 { cut - t0 } else { t1 - cut };
    }
    inside
}

/// Inside fraction of the axis-aligned square of side `h` centred at (xc, yc).
pub fn area_fraction<S: Shape + ?Sized>(s: &S, xc: f64, yc: f64, h: f64) -> f64 {
    const COLS: usize = 16;
    let l = s.level(xc, yc);
    let reach = 0.75 * h * s.lipschitz();
    if l < -reach {
        return 1.0;
    }
    if l > reach {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 0..COLS {
        let x = xc - 0.5 * h + (k as f64 + 0.5) * h / COLS as f64;
        total += segment_fraction(s, (x, yc - 0.5 * h), (x, yc + 0.5 * h));
    }
    total / COLS as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub i: i64,
    pub j: i64,
    pub x: f64,
    pub y: f64,
    /// Inside area of the control square (h² times the fraction).
    pub weight: f64,
}

/// Edge from node `a` to node `b = a + e_dir`.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub dir: Dir,
    /// Inside fraction of the dual face.
    pub face: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Outside,
    Dirichlet,
    Active,
}

pub struct LatticeSpec<'a> {
    pub h: f64,
    /// Inclusive index ranges.
    pub i_range: (i64, i64),
    pub j_range: (i64, i64),
    pub shape: &'a dyn Shape,
    /// Nodes where the field is pinned to zero and eliminated.
    pub dirichlet: &'a (dyn Fn(f64, f64) -> bool + Sync),
    /// Nodes with a smaller inside fraction are dropped.
    pub min_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    pub h: f64,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    index: Vec<u32>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Face weight of edges to eliminated Dirichlet nodes, per node.
    pub boundary_diag: Vec<f64>,
}

const NONE: u32 = u32::MAX;

impl Lattice {
    pub fn build(spec: &LatticeSpec) -> Arc<Self> {
        let h = spec.h;
        let (i0, i1) = spec.i_range;
        let (j0, j1) = spec.j_range;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let mut class = vec![Class::Outside; nx * ny];
        let mut frac = vec![0.0; nx * ny];
        for jj in 0..ny {
            for ii in 0..nx {
                let (x, y) = ((i0 + ii as i64) as f64 * h, (j0 + jj as i64) as f64 * h);
                let f = area_fraction(spec.shape, x, y, h);
                let k = jj * nx + ii;
                frac[k] = f;
                class[k] = if f < spec.min_fraction {
                    Class::Outside
                } else if (spec.dirichlet)(x, y) {
                    Class::Dirichlet
                } else {
                    Class::Active
                };
            }
        }
        let mut index = vec![NONE; nx * ny];
        let mut nodes = Vec::new();
        for k in 0..nx * ny {
            if class[k] == Class::Active {
                let (ii, jj) = (k % nx, k / nx);
                let (i, j) = (i0 + ii as i64, j0 + jj as i64);
                index[k] = nodes.len() as u32;
                nodes.push(Node { i, j, x: i as f64 * h, y: j as f64 * h, weight: frac[k] * h * h });
            }
        }
        let mut edges = Vec::new();
        let mut boundary_diag = vec![0.0; nodes.len()];
        let cls = |i: i64, j: i64| -> Class {
            if i < i0 || i > i1 || j < j0 || j > j1 {
                Class::Outside
            } else {
                class[((j - j0) as usize) * nx + (i - i0) as usize]
            }
        };
        let face = |x: f64, y: f64, dir: Dir| -> f64 {
            // dual face of the edge starting at (x, y)
            match dir {
                Dir::X => segment_fraction(spec.shape, (x + 0.5 * h, y - 0.5 * h), (x + 0.5 * h, y + 0.5 * h)),
                Dir::Y => segment_fraction(spec.shape, (x - 0.5 * h, y + 0.5 * h), (x + 0.5 * h, y + 0.5 * h)),
            }
        };
        for (a, node) in nodes.iter().enumerate() {
            let (i, j) = (node.i, node.j);
            for (dir, di, dj) in [(Dir::X, 1, 0), (Dir::Y, 0, 1)] {
                // forward neighbour
                let c = cls(i + di, j + dj);
                if c != Class::Outside {
                    let f = face(node.x, node.y, dir);
                    if f > 1e-12 {
                        if c == Class::Active {
                            let b = index[((j + dj - j0) as usize) * nx + (i + di - i0) as usize] as usize;
                            edges.push(Edge { a, b, dir, face: f });
                        } else {
                            boundary_diag[a] += f;
                        }
                    }
                }
                // backward neighbour, only when eliminated
                if cls(i - di, j - dj) == Class::Dirichlet {
                    let f = face(node.x - di as f64 * h, node.y - dj as f64 * h, dir);
                    if f > 1e-12 {
                        boundary_diag[a] += f;
                    }
                }
            }
        }
        Arc::new(Self { h, i0, j0, nx, ny, index, nodes, edges, boundary_diag })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, i: i64, j: i64) -> Option<usize> {
        if i < self.i0 || j < self.j0 {
            return None;
        }
        let (ii, jj) = ((i - self.i0) as usize, (j - self.j0) as usize);
        if ii >= self.nx || jj >= self.ny {
            return None;
        }
        match self.index[jj * self.nx + ii] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// W^{-1/2} K W^{-1/2} for link angles `theta` (one per edge) scaled by `b`.
    pub fn assemble(&self, theta: &[f64], b: f64) -> SparseHermitian {
        assert_eq!(theta.len(), self.edges.len());
        let n = self.nodes.len();
        let isw: Vec<f64> = self.nodes.iter().map(|n| 1.0 / n.weight.sqrt()).collect();
        let mut diag = self.boundary_diag.clone();
        let mut bld = HermitianBuilder::with_capacity(n, n + self.edges.len());
        for (e, &t) in self.edges.iter().zip(theta) {
            diag[e.a] += e.face;
            diag[e.b] += e.face;
            let v = C64::from_polar(-e.face * isw[e.a] * isw[e.b], -b * t);
            bld.add(e.a, e.b, v);
        }
        for (k, d) in diag.iter().enumerate() {
            bld.add_diag(k, d * isw[k] * isw[k]);
        }
        bld.build()
    }

    /// Q(u) for a nodal field (not weight-scaled).
    pub fn quadratic_form(&self, u: &[C64], theta: &[f64], b: f64) -> f64 {
        let mut q = 0.0;
        for (e, &t) in self.edges.iter().zip(theta) {
            let d = C64::from_polar(1.0, -b * t) * u[e.b] - u[e.a];
            q += e.face * d.norm_sqr();
        }
        for (k, d) in self.boundary_diag.iter().enumerate() {
            q += d * u[k].norm_sqr();
        }
        q
    }

    /// Nodal field from a weight-scaled eigenvector.
    pub fn unscale(&self, y: &[C64]) -> Vec<C64> {
        y.iter().zip(&self.nodes).map(|(v, n)| v / n.weight.sqrt()).collect()
    }

    pub fn scale(&self, u: &[C64]) -> Vec<C64> {
        u.iter().zip(&self.nodes).map(|(v, n)| v * n.weight.sqrt()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_plane_fractions_are_exact() {
        let s = UpperHalfPlane;
        assert_eq!(area_fraction(&s, 0.3, 0.0, 0.1), 0.5);
        assert_eq!(area_fraction(&s, 0.3, 0.2, 0.1), 1.0);
        let f = segment_fraction(&s, (0.0, -0.05), (0.0, 0.05));
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quarter_plane_corner() {
        let s = Wedge { alpha: std::f64::consts::FRAC_PI_2 };
        assert!((area_fraction(&s, 0.0, 0.0, 0.2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn wedge_of_angle_pi_is_half_plane() {
        let s = Wedge { alpha: std::f64::consts::PI };
        for (x, y) in [(1.0, 0.5), (-2.0, 0.1), (0.3, -0.2)] {
            assert!((s.level(x, y) - UpperHalfPlane.level(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_constant_is_in_kernel() {
        let s = UpperHalfPlane;
        let no = |_: f64, _: f64| false;
        let lat = Lattice::build(&LatticeSpec {
            h: 0.25,
            i_range: (-8, 8),
            j_range: (0, 8),
            shape: &s,
            dirichlet: &no,
            min_fraction: 0.05,
        });
        let theta = vec![0.0; lat.edges.len()];
        let u = vec![C64::new(1.0, 0.0); lat.len()];
        assert_eq!(lat.quadratic_form(&u, &theta, 1.0), 0.0);
        let m = lat.assemble(&theta, 1.0);
        let y = lat.scale(&u);
        let my = m.apply(&y);
        assert!(my.iter().all(|z| z.norm() < 1e-12));
    }
}
