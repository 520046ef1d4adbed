//! Sparse Hermitian matrices.
//!
//! The canonical data is the upper triangle; a full CSR copy is kept for
//! products. Matrices are immutable once built.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// All stored entries are real.
    RealSymmetric,
    Hermitian,
}

#[derive(Clone, Debug)]
pub struct SparseHermitian {
    dim: usize,
    upper: Vec<(usize, usize, C64)>,
    symmetry: Symmetry,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
    diag: Vec<f64>,
}

/// Accumulates entries; duplicates are summed.
#[derive(Clone, Debug)]
pub struct HermitianBuilder {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl HermitianBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self { dim, entries: Vec::with_capacity(cap) }
    }

    /// Adds `v` at (i, j) and implicitly its conjugate at (j, i).
    /// Diagonal entries keep only their real part.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.dim && j < self.dim, "entry ({i},{j}) out of range");
        if i == j {
            self.entries.push((i, i, C64::new(v.re, 0.0)));
        } else if i < j {
            self.entries.push((i, j, v));
        } else {
            self.entries.push((j, i, v.conj()));
        }
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.add(i, i, C64::new(v, 0.0));
    }

    pub fn build(mut self) -> SparseHermitian {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut upper: Vec<(usize, usize, C64)> = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            match upper.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => upper.push((i, j, v)),
            }
        }
        SparseHermitian::from_upper(self.dim, upper)
    }
}

impl SparseHermitian {
    fn from_upper(dim: usize, upper: Vec<(usize, usize, C64)>) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(i, j, _) in &upper {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for k in 0..dim {
            counts[k + 1] += counts[k];
        }
        let row_ptr = counts.clone();
        let nnz = row_ptr[dim];
        let mut fill = counts;
        let mut col_idx = vec![0usize; nnz];
        let mut vals = vec![C64::new(0.0, 0.0); nnz];
        let mut diag = vec![0.0; dim];
        for &(i, j, v) in &upper {
            col_idx[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
            if i != j {
                col_idx[fill[j]] = i;
                vals[fill[j]] = v.conj();
                fill[j] += 1;
            } else {
                diag[i] = v.re;
            }
        }
        let symmetry = if upper.iter().all(|e| e.2.im == 0.0) {
            Symmetry::RealSymmetric
        } else {
            Symmetry::Hermitian
        };
        Self { dim, upper, symmetry, row_ptr, col_idx, vals, diag }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut b = HermitianBuilder::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            b.add_diag(i, v);
        }
        b.build()
    }

    /// Builds from a dense matrix, reading the upper triangle only.
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut b = HermitianBuilder::new(n);
        for i in 0..n {
            for j in i..n {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Stored upper-triangle entries, sorted by (row, col).
    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.upper
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Gershgorin bound on the spectral norm (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// vᴴ M v.
    pub fn quad_form(&self, v: &[C64]) -> C64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Dᴴ M D with D = diag(exp(i φ_k)).
    pub fn conjugate_by_phases(&self, phi: &[f64]) -> Self {
        assert_eq!(phi.len(), self.dim);
        let upper = self
            .upper
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    (i, j, v)
                } else {
                    (i, j, v * C64::from_polar(1.0, phi[j] - phi[i]))
                }
            })
            .collect();
        Self::from_upper(self.dim, upper)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for &(i, j, v) in &self.upper {
            m[(i, j)] = v;
            if i != j {
                m[(j, i)] = v.conj();
            }
        }
        m
    }

    /// Writes MatrixMarket coordinate format (complex hermitian, lower
    /// triangle, 1-based `row col re im` lines).
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex hermitian")?;
        writeln!(w, "{} {} {}", self.dim, self.dim, self.upper.len())?;
        let mut lower: Vec<(usize, usize, C64)> =
            self.upper.iter().map(|&(i, j, v)| (j, i, v.conj())).collect();
        lower.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        for (r, c, v) in lower {
            writeln!(w, "{} {} {:e} {:e}", r + 1, c + 1, v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the format written by [`write_coordinate`](Self::write_coordinate).
    /// Entries from either triangle are accepted.
    pub fn read_coordinate<R: BufRead>(r: R) -> Result<Self> {
        let mut builder: Option<HermitianBuilder> = None;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: {t:?}", lineno + 1));
            match &mut builder {
                None => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let n: usize = parts[0].parse().map_err(|_| bad())?;
                    let m: usize = parts[1].parse().map_err(|_| bad())?;
                    if n != m {
                        return Err(Error::Dimension(format!("matrix is {n}x{m}")));
                    }
                    builder = Some(HermitianBuilder::new(n));
                }
                Some(b) => {
                    if parts.len() != 4 {
                        return Err(bad());
                    }
                    let i: usize = parts[0].parse().map_err(|_| bad())?;
                    let j: usize = parts[1].parse().map_err(|_| bad())?;
                    let re: f64 = parts[2].parse().map_err(|_| bad())?;
                    let im: f64 = parts[3].parse().map_err(|_| bad())?;
                    if i == 0 || j == 0 || i > b.dim || j > b.dim {
                        return Err(bad());
                    }
                    b.add(i - 1, j - 1, C64::new(re, im));
                }
            }
        }
        builder
            .map(HermitianBuilder::build)
            .ok_or_else(|| Error::Parse("missing size line".into()))
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// y += s * x
pub(crate) fn axpy(s: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn builder_merges_and_mirrors() {
        let mut b = HermitianBuilder::new(3);
        b.add(0, 1, c(1.0, 2.0));
        b.add(1, 0, c(1.0, -2.0));
        b.add_diag(2, 4.0);
        let m = b.build();
        assert_eq!(m.entries().len(), 2);
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], c(2.0, 4.0));
        assert_eq!(d[(1, 0)], c(2.0, -4.0));
        assert_eq!(m.symmetry(), Symmetry::Hermitian);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut b = HermitianBuilder::new(4);
        b.add_diag(0, 2.0);
        b.add(0, 3, c(0.5, -1.0));
        b.add(2, 1, c(-1.0, 0.25));
        b.add_diag(3, -1.0);
        let m = b.build();
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0), c(-1.0, 0.5)];
        let y = m.apply(&x);
        let d = m.to_dense();
        for i in 0..4 {
            let mut s = c(0.0, 0.0);
            for j in 0..4 {
                s += d[(i, j)] * x[j];
            }
            assert!((s - y[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn coordinate_round_trip() {
        let mut b = HermitianBuilder::new(3);
        b.add_diag(0, 1.5);
        b.add(0, 2, c(0.25, -0.75));
        b.add(1, 2, c(3.0, 1.0));
        let m = b.build();
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(2).unwrap().starts_with("1 1 "));
        let back = SparseHermitian::read_coordinate(&buf[..]).unwrap();
        assert_eq!(back.entries(), m.entries());
    }

    #[test]
    fn coordinate_rejects_garbage() {
        let text = "3 3 1\n1 x 0 0\n";
        assert!(SparseHermitian::read_coordinate(text.as_bytes()).is_err());
    }
}
