//! Smallest eigenpairs of sparse Hermitian matrices.
//!
//! LOBPCG with a Jacobi preconditioner and soft locking. Small problems
//! fall back to dense diagonalization.
//!
//! Convergence is declared when ‖Mv − λv‖ ≤ tol·‖M‖ with ‖M‖ replaced by
//! its Gershgorin bound; the attainable absolute residual in double
//! precision scales with ‖M‖, so a bound relative to |λ| alone would stall
//! on fine grids.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, norm, SparseHermitian, Symmetry, C64};

/// Dense diagonalization is refused above this dimension.
pub const DENSE_GUARD: usize = 4096;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm. Assembled operators are scaled so this is the
    /// grid L² norm.
    pub vector: Vec<C64>,
    /// ‖Mv − λv‖₂ / ‖v‖₂
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct EigOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Block size; defaults to k + 3.
    pub block: Option<usize>,
    /// Warm-start vectors, used before random fill.
    pub initial: Vec<Vec<C64>>,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 5000, seed: 0, block: None, initial: Vec::new() }
    }
}

impl EigOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_initial(mut self, initial: Vec<Vec<C64>>) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_block(mut self, block: usize) -> Self {
        self.block = Some(block);
        self
    }
}

/// The `k` algebraically smallest eigenpairs, values nondecreasing.
pub fn smallest_eigenpairs(
    m: &SparseHermitian,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    let opts = EigOptions { tol, max_iter, seed, ..EigOptions::default() };
    smallest_eigenpairs_with(m, k, &opts)
}

pub fn smallest_eigenpairs_with(
    m: &SparseHermitian,
    k: usize,
    opts: &EigOptions,
) -> Result<Vec<EigenPair>> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Input(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let block = opts.block.unwrap_or(k + 3).max(k).min(n);
    if n <= 4 * block || n <= 24 {
        return dense_pairs(m, k);
    }
    lobpcg(m, k, block, opts)
}

/// Full spectrum by dense diagonalization, sorted ascending.
pub fn dense_reference_spectrum(m: &SparseHermitian) -> Result<Vec<f64>> {
    if m.dim() > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "dense reference refused for dim {} > {DENSE_GUARD}",
            m.dim()
        )));
    }
    let dense = m.to_dense();
    let mut v: Vec<f64> = match m.symmetry() {
        Symmetry::RealSymmetric => dense.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect(),
        Symmetry::Hermitian => dense.symmetric_eigenvalues().iter().copied().collect(),
    };
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn dense_pairs(m: &SparseHermitian, k: usize) -> Result<Vec<EigenPair>> {
    if m.dim() > DENSE_GUARD {
        return Err(Error::Dimension(format!("dense path refused for dim {}", m.dim())));
    }
    let eig = SymmetricEigen::new(m.to_dense());
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order[..k]
        .iter()
        .map(|&c| {
            let mut v: Vec<C64> = eig.eigenvectors.column(c).iter().copied().collect();
            let lam = eig.eigenvalues[c];
            normalize_phase(&mut v);
            let residual = residual_of(m, &v, lam);
            EigenPair { value: lam, vector: v, residual, iterations: 0 }
        })
        .collect())
}

fn residual_of(m: &SparseHermitian, v: &[C64], lam: f64) -> f64 {
    let mut r = m.apply(v);
    axpy(C64::new(-lam, 0.0), v, &mut r);
    norm(&r) / norm(v)
}

/// Rotates so the largest-modulus component is real and positive.
fn normalize_phase(v: &mut [C64]) {
    let nrm = norm(v);
    let mut best = 0;
    let mut bmag = -1.0;
    for (i, z) in v.iter().enumerate() {
        // small margin so ties resolve to the first index stably
        if z.norm_sqr() > bmag * (1.0 + 1e-9) {
            bmag = z.norm_sqr();
            best = i;
        }
    }
    let ph = if bmag > 0.0 { v[best].conj() / v[best].norm() } else { C64::new(1.0, 0.0) };
    for z in v.iter_mut() {
        *z = *z * ph / nrm;
    }
}

type Block = Vec<Vec<C64>>;

const DROP: f64 = 1e-8;

/// Projects `v` (and its image `av`) against an orthonormal basis and
/// normalizes. Returns false if `v` is numerically in the span.
fn orth_against(basis: &[Vec<C64>], abasis: Option<&[Vec<C64>]>, v: &mut [C64], mut av: Option<&mut [C64]>) -> bool {
    let n0 = norm(v);
    if n0 == 0.0 || !n0.is_finite() {
        return false;
    }
    for _pass in 0..2 {
        for (idx, b) in basis.iter().enumerate() {
            let c = dot(b, v);
            axpy(-c, b, v);
            if let (Some(ab), Some(av)) = (abasis, av.as_deref_mut()) {
                axpy(-c, &ab[idx], av);
            }
        }
    }
    let n1 = norm(v);
    if n1 < DROP * n0 {
        return false;
    }
    let s = 1.0 / n1;
    v.iter_mut().for_each(|z| *z *= s);
    if let Some(av) = av {
        av.iter_mut().for_each(|z| *z *= s);
    }
    true
}

fn rayleigh_ritz(s: &Block, as_: &Block) -> (Vec<f64>, DMatrix<C64>) {
    let q = s.len();
    let mut h = DMatrix::from_element(q, q, C64::new(0.0, 0.0));
    for i in 0..q {
        for j in i..q {
            let v = dot(&s[i], &as_[j]);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
        h[(i, i)] = C64::new(h[(i, i)].re, 0.0);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut c = DMatrix::from_element(q, q, C64::new(0.0, 0.0));
    for (new, &old) in order.iter().enumerate() {
        c.set_column(new, &eig.eigenvectors.column(old));
    }
    (vals, c)
}

/// Columns `cols` of S·C restricted to basis rows `from..`.
fn combine(s: &Block, c: &DMatrix<C64>, from: usize, cols: usize) -> Block {
    let n = s[0].len();
    (0..cols)
        .map(|j| {
            let mut out = vec![C64::new(0.0, 0.0); n];
            for (i, si) in s.iter().enumerate().skip(from) {
                axpy(c[(i, j)], si, &mut out);
            }
            out
        })
        .collect()
}

fn lobpcg(m: &SparseHermitian, k: usize, block: usize, opts: &EigOptions) -> Result<Vec<EigenPair>> {
    let n = m.dim();
    let dmax = m.diagonal().iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let floor = if dmax > 0.0 { 1e-8 * dmax } else { 1.0 };
    let prec: Vec<f64> = m.diagonal().iter().map(|d| 1.0 / d.abs().max(floor)).collect();
    let mnorm = m.norm_bound().max(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Block = Vec::with_capacity(block);
    let mut candidates: Block = opts.initial.iter().filter(|v| v.len() == n).take(block).cloned().collect();
    while x.len() < block {
        let mut v = match candidates.pop() {
            Some(v) => v,
            None => (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect(),
        };
        if orth_against(&x, None, &mut v, None) {
            x.push(v);
        }
    }
    let mut ax: Block = x.iter().map(|v| m.apply(v)).collect();
    let (mut theta, c) = rayleigh_ritz(&x, &ax);
    x = combine(&x, &c, 0, block);
    ax = combine(&ax, &c, 0, block);
    let mut p: Block = Vec::new();
    let mut best = f64::INFINITY;

    let scale = |_t: f64| mnorm;
    let residuals = |x: &Block, ax: &Block, theta: &[f64]| -> (Block, Vec<f64>) {
        let mut rs = Vec::with_capacity(x.len());
        let mut nr = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let mut r = ax[i].clone();
            axpy(C64::new(-theta[i], 0.0), &x[i], &mut r);
            nr.push(norm(&r));
            rs.push(r);
        }
        (rs, nr)
    };

    for it in 1..=opts.max_iter {
        if it % 20 == 0 {
            // limit drift between X and AX
            let mut fresh: Block = Vec::with_capacity(block);
            for v in x.iter() {
                let mut v = v.clone();
                if orth_against(&fresh, None, &mut v, None) {
                    fresh.push(v);
                }
            }
            while fresh.len() < block {
                let mut v: Vec<C64> =
                    (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
                if orth_against(&fresh, None, &mut v, None) {
                    fresh.push(v);
                }
            }
            x = fresh;
            ax = x.iter().map(|v| m.apply(v)).collect();
            let (t, c) = rayleigh_ritz(&x, &ax);
            theta = t;
            x = combine(&x, &c, 0, block);
            ax = combine(&ax, &c, 0, block);
        }
        let (r, rn) = residuals(&x, &ax, &theta);
        let conv: Vec<bool> = (0..block).map(|i| rn[i] <= opts.tol * scale(theta[i])).collect();
        let worst = (0..k).map(|i| rn[i] / scale(theta[i])).fold(0.0, f64::max);
        best = best.min(worst);
        if conv[..k].iter().all(|&c| c) {
            let exact: Block = x.iter().map(|v| m.apply(v)).collect();
            let (_, rn2) = residuals(&x, &exact, &theta);
            if (0..k).all(|i| rn2[i] <= opts.tol * scale(theta[i])) {
                let mut out = Vec::with_capacity(k);
                for i in 0..k {
                    let mut v = x[i].clone();
                    normalize_phase(&mut v);
                    out.push(EigenPair { value: theta[i], vector: v, residual: rn2[i], iterations: it });
                }
                return Ok(out);
            }
            ax = exact;
            p.clear();
            continue;
        }

        let mut s: Block = x.clone();
        let mut as_: Block = ax.clone();
        for i in 0..block {
            if conv[i] {
                continue;
            }
            let mut w: Vec<C64> = r[i].iter().zip(&prec).map(|(z, d)| z * d).collect();
            if orth_against(&s, None, &mut w, None) {
                let aw = m.apply(&w);
                s.push(w);
                as_.push(aw);
            }
        }
        for pv in p.iter() {
            let mut v = pv.clone();
            if orth_against(&s, None, &mut v, None) {
                as_.push(m.apply(&v));
                s.push(v);
            }
        }
        if s.len() == block {
            // nothing new to search: the basis is exhausted
            break;
        }
        let (t, c) = rayleigh_ritz(&s, &as_);
        theta = t[..block].to_vec();
        let nx = combine(&s, &c, 0, block);
        let nax = combine(&as_, &c, 0, block);
        p = combine(&s, &c, block, block);
        x = nx;
        ax = nax;
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, best_residual: best })
}
