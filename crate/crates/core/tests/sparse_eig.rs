mod common;

use common::{f, fixture, floats, rel};
use nalgebra::DMatrix;
use stepfield::eigen::{dense_reference_spectrum, smallest_eigenpairs};
use stepfield::sparse::{HermitianBuilder, SparseHermitian};
use stepfield::C64;

fn laplacian_16() -> SparseHermitian {
    let n = 16;
    let mut b = HermitianBuilder::new(n * n);
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            b.add_diag(k, 4.0);
            if i + 1 < n {
                b.add(k, k + 1, C64::new(-1.0, 0.0));
            }
            if j + 1 < n {
                b.add(k, k + n, C64::new(-1.0, 0.0));
            }
        }
    }
    b.build()
}

#[test]
fn laplacian_matches_dense_oracle() {
    let fx = fixture("spectra.json");
    let want = floats(&fx["laplacian16"]["eigenvalues"]);
    let m = laplacian_16();
    let dense = dense_reference_spectrum(&m).unwrap();
    for (a, b) in dense.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    let pairs = smallest_eigenpairs(&m, 4, 1e-9, 5000, 1).unwrap();
    for (p, w) in pairs.iter().zip(&want) {
        assert!((p.value - w).abs() < 1e-8, "{} vs {w}", p.value);
        assert!(p.residual <= 1e-9 * m.norm_bound());
    }
}

#[test]
fn random_hermitian_trace_and_spectrum() {
    let fx = fixture("spectra.json");
    let h = &fx["hermitian50"];
    let n = h["n"].as_u64().unwrap() as usize;
    let re: Vec<Vec<f64>> = h["re"].as_array().unwrap().iter().map(floats).collect();
    let im: Vec<Vec<f64>> = h["im"].as_array().unwrap().iter().map(floats).collect();
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im[i][j]));
    let sp = SparseHermitian::from_dense(&m);
    let spec = dense_reference_spectrum(&sp).unwrap();
    let trace = f(&h["trace"]);
    let sum: f64 = spec.iter().sum();
    assert!(rel(sum, trace) < 1e-10, "{sum} vs {trace}");
    for (a, b) in spec.iter().zip(floats(&h["eigenvalues"])) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn lobpcg_values_are_sorted_with_small_residuals() {
    let m = laplacian_16();
    let pairs = smallest_eigenpairs(&m, 6, 1e-8, 5000, 3).unwrap();
    assert!(pairs.windows(2).all(|w| w[0].value <= w[1].value));
    // residuals are relative to the Gershgorin bound of M
    assert!(pairs.iter().all(|p| p.residual <= 1e-8 * m.norm_bound()));
}
