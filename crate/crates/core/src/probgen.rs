//! Deterministic test-problem generators.
//!
//! Stencils are unscaled (no 1/h^2 factor); the reaction term enters the
//! diagonal directly as a user shift.

use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Grid description for the 3D 7-point stencil generator.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Reaction shift subtracted from the diagonal.
    pub shift: f64,
}

impl GridSpec {
    pub fn cube(n: usize) -> Self {
        GridSpec {
            nx: n,
            ny: n,
            nz: n,
            shift: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.nx * self.ny * self.nz
    }
}

/// 7-point Laplacian on an `nx x ny x nz` box with homogeneous Dirichlet
/// truncation: diagonal `6 - shift`, six `-1` neighbor couplings,
/// lexicographic ordering (x fastest).
pub fn laplacian_7pt<S: Scalar>(spec: &GridSpec) -> CsrMatrix<S> {
    let (nx, ny, nz) = (spec.nx, spec.ny, spec.nz);
    let n = spec.n();
    assert!(n >= 1, "grid dimensions must be at least 1");
    let idx = |ix: usize, iy: usize, iz: usize| ix + nx * (iy + ny * iz);
    let mut triplets = Vec::with_capacity(7 * n);
    let minus_one = S::from_re(-1.0);
    let diag = S::from_re(6.0 - spec.shift);
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let row = idx(ix, iy, iz);
                triplets.push((row, row, diag));
                if ix > 0 {
                    triplets.push((row, idx(ix - 1, iy, iz), minus_one));
                }
                if ix + 1 < nx {
                    triplets.push((row, idx(ix + 1, iy, iz), minus_one));
                }
                if iy > 0 {
                    triplets.push((row, idx(ix, iy - 1, iz), minus_one));
                }
                if iy + 1 < ny {
                    triplets.push((row, idx(ix, iy + 1, iz), minus_one));
                }
                if iz > 0 {
                    triplets.push((row, idx(ix, iy, iz - 1), minus_one));
                }
                if iz + 1 < nz {
                    triplets.push((row, idx(ix, iy, iz + 1), minus_one));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, triplets).expect("stencil is structurally valid")
}

/// 5-point Laplacian on an `nx x ny` grid minus `shift * I`: diagonal
/// `4 - shift`, four `-1` neighbor couplings.
pub fn shifted_laplacian_2d<S: Scalar>(nx: usize, ny: usize, shift: f64) -> CsrMatrix<S> {
    let n = nx * ny;
    assert!(n >= 1, "grid dimensions must be at least 1");
    let idx = |ix: usize, iy: usize| ix + nx * iy;
    let mut triplets = Vec::with_capacity(5 * n);
    let minus_one = S::from_re(-1.0);
    let diag = S::from_re(4.0 - shift);
    for iy in 0..ny {
        for ix in 0..nx {
            let row = idx(ix, iy);
            triplets.push((row, row, diag));
            if ix > 0 {
                triplets.push((row, idx(ix - 1, iy), minus_one));
            }
            if ix + 1 < nx {
                triplets.push((row, idx(ix + 1, iy), minus_one));
            }
            if iy > 0 {
                triplets.push((row, idx(ix, iy - 1), minus_one));
            }
            if iy + 1 < ny {
                triplets.push((row, idx(ix, iy + 1), minus_one));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, triplets).expect("stencil is structurally valid")
}

/// Diagonal matrix with entries spread uniformly over `[lo, hi]`.
pub fn uniform_spectrum_diag<S: Scalar>(n: usize, lo: f64, hi: f64) -> CsrMatrix<S> {
    assert!(n >= 1 && lo < hi);
    let diag: Vec<S> = (0..n)
        .map(|i| {
            let t = if n == 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            S::from_re(lo + t * (hi - lo))
        })
        .collect();
    CsrMatrix::from_diagonal(&diag)
}

/// Analytic eigenvalues of [`shifted_laplacian_2d`]:
/// `4 - 2 cos(i pi/(nx+1)) - 2 cos(j pi/(ny+1)) - shift`.
pub fn shifted_laplacian_2d_eigenvalues(nx: usize, ny: usize, shift: f64) -> Vec<f64> {
    let mut eigs = Vec::with_capacity(nx * ny);
    for i in 1..=nx {
        for j in 1..=ny {
            let e = 4.0
                - 2.0 * (std::f64::consts::PI * i as f64 / (nx as f64 + 1.0)).cos()
                - 2.0 * (std::f64::consts::PI * j as f64 / (ny as f64 + 1.0)).cos();
            eigs.push(e - shift);
        }
    }
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}
