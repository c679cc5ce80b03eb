//! Dense complex linear algebra sized for bipartite operators up to 64x64.
//!
//! Storage is row-major. Composite indices of a bipartite space follow the
//! convention `index = a * d_b + b`, with subsystem A as the first tensor
//! factor everywhere in the crate.

mod eigen;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{hermitian_eigen, Spectrum};
pub use svd::{polar_unitary, singular_values, span_rank};

pub type C64 = Complex64;

/// Tolerance on `||M - M^dagger||_F` for accepting an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Which tensor factor of a bipartite space an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Column vector holding `v`.
    pub fn column(v: &[C64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// Rank-one projector `|v><v|` (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn column_vec(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `||M - M^dagger||_F`; infinite for non-square matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        self.data.chunks_exact(self.cols).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `<v|M|v>`.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Commutator-free anticommutator `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.matmul(other)? + &other.matmul(self)?)
    }

    fn check_same_shape(&self, other: &Self) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "elementwise operation on mismatched shapes"
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a fallible product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; row index of the result is `a_row * b.rows + b_row`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x * b[(bi, bj)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn check_bipartite(m: &ComplexMatrix, (da, db): (usize, usize)) -> Result<()> {
    if !m.is_square() || m.rows != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not an operator on C^{da} (x) C^{db}",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Transposes the indices of one tensor factor.
///
/// For subsystem A, entry `((a,b),(a',b'))` of the result is entry
/// `((a',b),(a,b'))` of the input.
pub fn partial_transpose(m: &ComplexMatrix, dims: (usize, usize), subsystem: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    let mut out = ComplexMatrix::zeros(m.rows, m.cols);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let src = match subsystem {
                        Subsystem::A => m[(a2 * db + b, a * db + b2)],
                        Subsystem::B => m[(a * db + b2, a2 * db + b)],
                    };
                    out[(a * db + b, a2 * db + b2)] = src;
                }
            }
        }
    }
    Ok(out)
}

/// Traces out `traced`, returning the reduced operator on the other factor.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), traced: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    Ok(match traced {
        Subsystem::B => ComplexMatrix::from_fn(da, da, |a, a2| (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()),
        Subsystem::A => ComplexMatrix::from_fn(db, db, |b, b2| (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()),
    })
}

/// `Tr(AB)` as `sum_ij a_ij b_ji`, without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.rows != b.cols || a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "trace of {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = ZERO;
    for i in 0..a.rows {
        for j in 0..a.cols {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<u|v>`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    fn bell_phi_plus() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::outer(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)])
    }

    fn random_matrix(n: usize, m: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, m, |i, j| {
            let (re, im) = entries[(i * m + j) % entries.len()];
            c(re, im)
        })
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(matches!(ComplexMatrix::from_vec(2, 2, vec![ONE; 3]), Err(Error::DimensionMismatch(_))));
        assert_eq!(ComplexMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.0)]), Err(Error::NonFinite));
        assert_eq!(ComplexMatrix::from_vec(1, 1, vec![c(0.0, f64::INFINITY)]), Err(Error::NonFinite));
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zz = kron(&sigma_z(), &sigma_z());
        let expected = ComplexMatrix::diagonal(&[ONE, -ONE, -ONE, ONE]);
        assert_eq!(zz, expected);
    }

    #[test]
    fn kron_index_convention_puts_a_first() {
        // |1><0| (x) I_2 moves block (0,0) into row block 1.
        let mut e10 = ComplexMatrix::zeros(2, 2);
        e10[(1, 0)] = ONE;
        let k = kron(&e10, &ComplexMatrix::identity(3));
        assert_eq!(k.rows(), 6);
        assert_eq!(k[(3, 0)], ONE);
        assert_eq!(k[(5, 2)], ONE);
        assert_eq!(k[(0, 3)], ZERO);
    }

    #[test]
    fn partial_transpose_identity_and_dimension_check() {
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(partial_transpose(&i4, (2, 2), Subsystem::A).unwrap(), i4);
        assert!(partial_transpose(&i4, (2, 3), Subsystem::A).is_err());
        assert!(partial_transpose(&ComplexMatrix::zeros(4, 2), (2, 2), Subsystem::B).is_err());
    }

    #[test]
    fn partial_transpose_of_phi_plus_is_swap_over_two() {
        // Swap operator written out by hand: |00><00| + |01><10| + |10><01| + |11><11|.
        let mut swap = ComplexMatrix::zeros(4, 4);
        swap[(0, 0)] = ONE;
        swap[(1, 2)] = ONE;
        swap[(2, 1)] = ONE;
        swap[(3, 3)] = ONE;
        let pt = partial_transpose(&bell_phi_plus(), (2, 2), Subsystem::A).unwrap();
        assert!(pt.max_abs_diff(&swap.scale_real(0.5)) < 1e-15);
        let ptb = partial_transpose(&bell_phi_plus(), (2, 2), Subsystem::B).unwrap();
        assert!(ptb.max_abs_diff(&pt) < 1e-15);
    }

    #[test]
    fn partial_trace_of_phi_plus_is_maximally_mixed() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for side in [Subsystem::A, Subsystem::B] {
            let r = partial_trace(&bell_phi_plus(), (2, 2), side).unwrap();
            assert!(r.max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let a = random_matrix(2, 2, &[(0.3, 0.0), (0.1, 0.2), (0.1, -0.2), (0.7, 0.0)]);
        let b = random_matrix(3, 3, &[(0.2, 0.0), (0.0, 0.1), (0.05, 0.0), (0.0, -0.1), (0.5, 0.0)]);
        let ab = kron(&a, &b);
        let ra = partial_trace(&ab, (2, 3), Subsystem::B).unwrap();
        let rb = partial_trace(&ab, (2, 3), Subsystem::A).unwrap();
        assert!(ra.max_abs_diff(&a.scale(b.trace())) < 1e-14);
        assert!(rb.max_abs_diff(&b.scale(a.trace())) < 1e-14);
    }

    #[test]
    fn trace_product_examples() {
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(trace_product(&i4, &i4).unwrap(), c(4.0, 0.0));
        assert!(trace_product(&i4, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn matmul_shape_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(a.matmul(&a.transpose()).is_ok());
    }

    #[test]
    fn hermiticity_defect_detects_asymmetry() {
        let mut m = ComplexMatrix::identity(3);
        assert_eq!(m.hermiticity_defect(), 0.0);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, 1.0);
        assert!((m.hermiticity_defect() - 2.0_f64.sqrt() * 2.0).abs() < 1e-15);
        assert!(m.hermitian_part().is_hermitian(1e-15));
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
            .prop_map(move |v| ComplexMatrix::from_vec(n, n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_matrix(2), b in arb_matrix(3), cc in arb_matrix(2)) {
            let left = kron(&kron(&a, &b), &cc);
            let right = kron(&a, &kron(&b, &cc));
            prop_assert!(left.max_abs_diff(&right) <= 1e-12);
        }

        #[test]
        fn kron_is_bilinear(a in arb_matrix(2), a2 in arb_matrix(2), b in arb_matrix(4), s in -2.0..2.0f64) {
            let lhs = kron(&(&a + &a2.scale_real(s)), &b);
            let rhs = &kron(&a, &b) + &kron(&a2, &b).scale_real(s);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }

        #[test]
        fn partial_transpose_is_an_involution_preserving_trace(m in arb_matrix(6)) {
            for side in [Subsystem::A, Subsystem::B] {
                let once = partial_transpose(&m, (2, 3), side).unwrap();
                let twice = partial_transpose(&once, (2, 3), side).unwrap();
                prop_assert_eq!(&twice, &m);
                prop_assert!((once.trace() - m.trace()).norm() <= 1e-14);
            }
        }

        #[test]
        fn trace_product_is_symmetric(a in arb_matrix(4), b in arb_matrix(4)) {
            let ab = trace_product(&a, &b).unwrap();
            let ba = trace_product(&b, &a).unwrap();
            prop_assert!((ab - ba).norm() <= 1e-12);
            prop_assert!((ab - (&a * &b).trace()).norm() <= 1e-12);
        }
    }
}
