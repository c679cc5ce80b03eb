//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL with Wilkinson shifts.

use super::{ComplexMatrix, C64, HERMITIAN_TOL, ONE};
use crate::error::{Error, Result};

/// Iteration cap per eigenvalue in the QL sweep.
const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column_vec(k)
    }

    /// `sum_k lambda_k v_k v_k^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            self.eigenvalues.iter().enumerate().map(|(k, &l)| v[(i, k)] * v[(j, k)].conj() * l).sum()
        })
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Spectrum> {
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    if n == 0 {
        return Err(Error::Empty("eigenproblem of a 0x0 matrix"));
    }
    let (mut diag, mut off, mut z) = tridiagonalize(&m.hermitian_part());
    tql_implicit(&mut diag, &mut off, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| z[(i, order[j])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Reduces `a` to `Q T Q^dagger` with `T` real symmetric tridiagonal.
///
/// Returns (diagonal, off-diagonal with `off[i]` coupling `i` and `i+1`, Q).
fn tridiagonalize(a: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    let mut a = a.clone();
    let mut q = ComplexMatrix::identity(n);

    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = super::norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let off = k + 1;

        // A <- H A with H = I - beta v v^dagger acting on rows off..n.
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * a[(off + r, j)]).sum();
            let s = s * beta;
            for (r, vr) in v.iter().enumerate() {
                a[(off + r, j)] -= vr * s;
            }
        }
        // A <- A H, and Q <- Q H.
        for mat in [&mut a, &mut q] {
            for i in 0..n {
                let s: C64 = v.iter().enumerate().map(|(c, vc)| mat[(i, off + c)] * vc).sum();
                let s = s * beta;
                for (c, vc) in v.iter().enumerate() {
                    mat[(i, off + c)] -= s * vc.conj();
                }
            }
        }
    }

    // Diagonal phase rotation makes the sub-diagonal real and non-negative.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for i in 0..n {
        diag[i] = a[(i, i)].re;
        if i + 1 < n {
            let e = a[(i + 1, i)];
            let r = e.norm();
            off[i] = r;
            phases[i + 1] = if r > 0.0 { phases[i] * e / r } else { phases[i] };
        }
    }
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= phases[j];
        }
    }
    (diag, off, q)
}

/// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal
/// matrix, accumulating rotations into the columns of `z`.
fn tql_implicit(d: &mut [f64], e: &mut [f64], z: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence { index: l, iterations: MAX_QL_ITERATIONS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[(k, i + 1)];
                    let zi = z[(k, i)];
                    z[(k, i + 1)] = zi * s + zf * c;
                    z[(k, i)] = zi * c - zf * s;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
/// Largest `|(V^dagger V - I)_ij|` for a matrix with orthonormal columns.
pub(crate) fn orthonormality_defect(v: &ComplexMatrix) -> f64 {
    let g = &v.adjoint() * v;
    let n = g.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { super::ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}
