//! One-sided (Hestenes) Jacobi SVD for small complex matrices, and the rank
//! and polar-factor routines built on it.

use super::{ComplexMatrix, C64, RANK_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Right-orthogonalizes the columns of `m`: returns `(B, V)` with `M V = B`,
/// `V` unitary and the columns of `B` mutually orthogonal.
fn jacobi_orthogonalize(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    // Work column-major for cache-friendly column rotations.
    let mut b: Vec<Vec<C64>> = (0..cols).map(|j| m.column_vec(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = b[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = b[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = super::inner(&b[p], &b[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols_vec in [&mut b, &mut v] {
                    let (lo, hi) = cols_vec.split_at_mut(q);
                    let (xp, xq) = (&mut lo[p], &mut hi[0]);
                    for (a, bq) in xp.iter_mut().zip(xq.iter_mut()) {
                        let aq = *bq * phase;
                        let ap = *a;
                        *a = ap * c - aq * s;
                        *bq = ap * s + aq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let bm = ComplexMatrix::from_fn(rows, cols, |i, j| b[j][i]);
    let vm = ComplexMatrix::from_fn(cols, cols, |i, j| v[j][i]);
    (bm, vm)
}

/// Singular values in descending order (one per column).
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let (b, _) = jacobi_orthogonalize(m);
    let mut s: Vec<f64> = (0..b.cols()).map(|j| super::norm(&b.column_vec(j))).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Dimension of the span of `vectors`: the number of singular values of the
/// stacked matrix above `tol` times the largest one.
pub fn span_rank(vectors: &[Vec<C64>], tol: f64) -> Result<usize> {
    let first = vectors.first().ok_or(Error::Empty("span of an empty vector list"))?;
    let n = first.len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("vectors of unequal length".into()));
    }
    let stacked = ComplexMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    let s = singular_values(&stacked);
    let largest = s[0];
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol * largest).count())
}

/// Unitary factor `U` of the polar decomposition `M = U P`.
///
/// Fails with [`Error::RankDeficient`] when the smallest singular value is
/// below the default rank tolerance relative to the largest.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("polar factor of a {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let (mut b, v) = jacobi_orthogonalize(m);
    let norms: Vec<f64> = (0..n).map(|j| super::norm(&b.column_vec(j))).collect();
    let largest = norms.iter().cloned().fold(0.0, f64::max);
    let smallest = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
    if ratio <= RANK_TOL {
        return Err(Error::RankDeficient { ratio });
    }
    for i in 0..n {
        for (j, nj) in norms.iter().enumerate() {
            b[(i, j)] /= nj;
        }
    }
    Ok(&b * &v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::super::eigen::orthonormality_defect;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn polar_of_identity_and_diagonal() {
        let i3 = ComplexMatrix::identity(3);
        assert!(polar_unitary(&i3).unwrap().max_abs_diff(&i3) < 1e-15);
        let d = ComplexMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, -2.0]).unwrap();
        let expected = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(polar_unitary(&d).unwrap().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn polar_of_scaled_unitary_recovers_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=8 {
            let u0 = polar_unitary(&random_matrix(n, n, &mut rng)).unwrap();
            assert!(orthonormality_defect(&u0) < 1e-12);
            let u = polar_unitary(&u0.scale_real(2.0)).unwrap();
            assert!(u.max_abs_diff(&u0) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn polar_factorization_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(5, 5, &mut rng);
        let u = polar_unitary(&m).unwrap();
        assert!(orthonormality_defect(&u) < 1e-10);
        // P = U^dagger M must be Hermitian positive definite.
        let p = &u.adjoint() * &m;
        assert!(p.is_hermitian(1e-10));
        assert!(super::super::hermitian_eigen(&p.hermitian_part()).unwrap().min() > 0.0);
    }

    #[test]
    fn polar_rejects_rank_deficient() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(polar_unitary(&m), Err(Error::RankDeficient { .. })));
        assert!(matches!(polar_unitary(&ComplexMatrix::zeros(3, 3)), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_matrix(6, 4, &mut rng);
        let s = singular_values(&m);
        let gram = &m.adjoint() * &m;
        let mut ev = super::super::hermitian_eigen(&gram.hermitian_part()).unwrap().eigenvalues;
        ev.reverse();
        for (sv, l) in s.iter().zip(ev) {
            assert!((sv * sv - l).abs() < 1e-12);
        }
    }

    #[test]
    fn span_rank_examples() {
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(span_rank(&[e1.clone(), e1.clone()], RANK_TOL).unwrap(), 1);
        let e2 = vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)];
        let mix: Vec<C64> = e1.iter().zip(&e2).map(|(a, b)| a * c(2.0, 0.0) - b * c(0.0, 3.0)).collect();
        assert_eq!(span_rank(&[e1.clone(), e2, mix], RANK_TOL).unwrap(), 2);
        assert!(span_rank(&[], RANK_TOL).is_err());
        assert!(span_rank(&[e1, vec![c(1.0, 0.0)]], RANK_TOL).is_err());
    }

    #[test]
    fn span_rank_with_more_vectors_than_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<Vec<C64>> = (0..7).map(|_| random_matrix(4, 1, &mut rng).into_vec()).collect();
        assert_eq!(span_rank(&vs, RANK_TOL).unwrap(), 4);
    }
}
