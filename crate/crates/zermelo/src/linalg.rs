//! Dense linear algebra for the saddle-point systems: a symmetric
//! indefinite LDL^T factorization with Bunch-Kaufman pivoting, a kernel
//! basis helper, and a generalized symmetric eigenvalue solve.
//!
//! The factorization doubles as the solver's singularity probe: a pivot
//! breakdown means the KKT matrix is not invertible at the iterate, which
//! is exactly a failure of the saddle-point solvability conditions.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SingularMatrix;

impl std::fmt::Display for SingularMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "symmetric factorization broke down: matrix is singular")
    }
}

impl std::error::Error for SingularMatrix {}

enum Pivot {
    Single,
    Double,
}

/// `P A P^T = L D L^T` with unit lower-triangular `L` and block-diagonal
/// `D` (1x1 and 2x2 blocks), Bunch-Kaufman partial pivoting.
pub struct SymmetricIndefinite {
    // Lower triangle holds L below the pivot blocks; the blocks hold D.
    a: DMatrix<f64>,
    pivots: Vec<(usize, Pivot)>,
    swaps: Vec<(usize, usize)>,
    n: usize,
}

const ALPHA: f64 = 0.6403882032022076; // (1 + sqrt(17)) / 8

impl SymmetricIndefinite {
    pub fn factor(mat: &DMatrix<f64>) -> Result<Self, SingularMatrix> {
        assert_eq!(mat.nrows(), mat.ncols());
        let n = mat.nrows();
        let mut a = mat.clone();
        let anorm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let tiny = anorm * 1e-14 * n as f64;
        let mut pivots = Vec::new();
        let mut swaps = Vec::new();

        let mut k = 0;
        while k < n {
            // Largest below-diagonal entry in column k of the active block.
            let (mut r, mut lambda) = (k, 0.0f64);
            for i in k + 1..n {
                if a[(i, k)].abs() > lambda {
                    lambda = a[(i, k)].abs();
                    r = i;
                }
            }
            let akk = a[(k, k)].abs();
            let use_double;
            if akk.max(lambda) <= tiny {
                return Err(SingularMatrix);
            }
            if akk >= ALPHA * lambda {
                use_double = false;
            } else {
                // Largest off-diagonal entry in row/column r of the block.
                let mut sigma = 0.0f64;
                for i in k..n {
                    if i != r {
                        let v = if i < r { a[(r, i)] } else { a[(i, r)] };
                        sigma = sigma.max(v.abs());
                    }
                }
                if akk * sigma >= ALPHA * lambda * lambda {
                    use_double = false;
                } else if a[(r, r)].abs() >= ALPHA * sigma {
                    swap_sym(&mut a, k, r);
                    swaps.push((k, r));
                    use_double = false;
                } else {
                    if r != k + 1 {
                        swap_sym(&mut a, k + 1, r);
                        swaps.push((k + 1, r));
                    }
                    use_double = true;
                }
            }

            if !use_double {
                let d = a[(k, k)];
                if d.abs() <= tiny {
                    return Err(SingularMatrix);
                }
                // Snapshot the pivot column: the update must use original
                // entries, not the multipliers written back below.
                let col: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
                for i in k + 1..n {
                    let l = col[i - k - 1] / d;
                    for j in k + 1..=i {
                        a[(i, j)] -= l * col[j - k - 1];
                    }
                }
                for i in k + 1..n {
                    a[(i, k)] = col[i - k - 1] / d;
                }
                pivots.push((k, Pivot::Single));
                k += 1;
            } else {
                let d11 = a[(k, k)];
                let d21 = a[(k + 1, k)];
                let d22 = a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                if det.abs() <= tiny * tiny {
                    return Err(SingularMatrix);
                }
                let col1: Vec<f64> = (k + 2..n).map(|i| a[(i, k)]).collect();
                let col2: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
                let mult = |i: usize| {
                    let b1 = col1[i - k - 2];
                    let b2 = col2[i - k - 2];
                    ((d22 * b1 - d21 * b2) / det, (d11 * b2 - d21 * b1) / det)
                };
                for i in k + 2..n {
                    let (l1, l2) = mult(i);
                    for j in k + 2..=i {
                        a[(i, j)] -= l1 * col1[j - k - 2] + l2 * col2[j - k - 2];
                    }
                }
                for i in k + 2..n {
                    let (l1, l2) = mult(i);
                    a[(i, k)] = l1;
                    a[(i, k + 1)] = l2;
                }
                pivots.push((k, Pivot::Double));
                k += 2;
            }
        }

        Ok(SymmetricIndefinite {
            a,
            pivots,
            swaps,
            n,
        })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.clone();
        for &(p, q) in &self.swaps {
            x.swap_rows(p, q);
        }
        // Forward substitution with unit lower L.
        for &(k, ref piv) in &self.pivots {
            match piv {
                Pivot::Single => {
                    let xk = x[k];
                    for i in k + 1..self.n {
                        x[i] -= self.a[(i, k)] * xk;
                    }
                }
                Pivot::Double => {
                    let (x1, x2) = (x[k], x[k + 1]);
                    for i in k + 2..self.n {
                        x[i] -= self.a[(i, k)] * x1 + self.a[(i, k + 1)] * x2;
                    }
                }
            }
        }
        // Block-diagonal solve.
        for &(k, ref piv) in &self.pivots {
            match piv {
                Pivot::Single => {
                    x[k] /= self.a[(k, k)];
                }
                Pivot::Double => {
                    let d11 = self.a[(k, k)];
                    let d21 = self.a[(k + 1, k)];
                    let d22 = self.a[(k + 1, k + 1)];
                    let det = d11 * d22 - d21 * d21;
                    let (b1, b2) = (x[k], x[k + 1]);
                    x[k] = (d22 * b1 - d21 * b2) / det;
                    x[k + 1] = (d11 * b2 - d21 * b1) / det;
                }
            }
        }
        // Backward substitution with L^T.
        for &(k, ref piv) in self.pivots.iter().rev() {
            match piv {
                Pivot::Single => {
                    let mut acc = 0.0;
                    for i in k + 1..self.n {
                        acc += self.a[(i, k)] * x[i];
                    }
                    x[k] -= acc;
                }
                Pivot::Double => {
                    let (mut a1, mut a2) = (0.0, 0.0);
                    for i in k + 2..self.n {
                        a1 += self.a[(i, k)] * x[i];
                        a2 += self.a[(i, k + 1)] * x[i];
                    }
                    x[k] -= a1;
                    x[k + 1] -= a2;
                }
            }
        }
        for &(p, q) in self.swaps.iter().rev() {
            x.swap_rows(p, q);
        }
        x
    }
}

/// Symmetric row/column swap on lower-triangular storage.
fn swap_sym(a: &mut DMatrix<f64>, p: usize, q: usize) {
    debug_assert!(p < q);
    let n = a.nrows();
    for j in 0..p {
        let t = a[(p, j)];
        a[(p, j)] = a[(q, j)];
        a[(q, j)] = t;
    }
    for i in p + 1..q {
        let t = a[(i, p)];
        a[(i, p)] = a[(q, i)];
        a[(q, i)] = t;
    }
    let t = a[(p, p)];
    a[(p, p)] = a[(q, q)];
    a[(q, q)] = t;
    for i in q + 1..n {
        let t = a[(i, p)];
        a[(i, p)] = a[(i, q)];
        a[(i, q)] = t;
    }
}

/// Orthonormal basis of the nullspace of `a`, columns of the result.
/// Computed from the spectral decomposition of `a^T a`.
pub fn nullspace(a: &DMatrix<f64>) -> DMatrix<f64> {
    let ata = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(ata);
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = max_ev.max(1e-300) * 1e-12;
    let cols: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].abs() <= tol)
        .collect();
    let mut z = DMatrix::zeros(a.ncols(), cols.len());
    for (j, &i) in cols.iter().enumerate() {
        z.set_column(j, &eig.eigenvectors.column(i));
    }
    z
}

/// Smallest eigenvalue of the pencil `(h, m)` with `m` symmetric positive
/// definite: `min theta` with `h u = theta m u`.
pub fn min_eig_generalized(h: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let chol = nalgebra::Cholesky::new(m.clone()).expect("mass matrix must be SPD");
    let l = chol.l();
    // C^-1 H C^-T, symmetrized against rounding.
    let y = l
        .clone()
        .solve_lower_triangular(h)
        .expect("triangular solve");
    let w = l
        .solve_lower_triangular(&y.transpose())
        .expect("triangular solve");
    let sym = (&w + w.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig_symmetric(h: &DMatrix<f64>) -> f64 {
    let sym = (h + h.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
