//! Local operator bases (Pauli, generalized Gell-Mann, spin-1) and the
//! decomposition of bipartite Hermitian operators over products of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64, HERMITIAN_TOL};

/// Coefficients at or below this fraction of the largest magnitude are
/// dropped from decompositions.
const COEFF_ZERO: f64 = 1e-12;

/// One element of a local operator basis.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub id: String,
    pub matrix: ComplexMatrix,
    /// Power of hbar carried by the physical observable (0 for dimensionless
    /// elements, 1 for spin components, 2 for their quadratic combinations).
    pub hbar_power: u32,
}

#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub id: String,
    pub dimension: usize,
    pub elements: Vec<BasisElement>,
    pub includes_identity: bool,
    /// Whether the elements are pairwise Hilbert-Schmidt orthogonal.
    pub orthogonal: bool,
}

impl LocalBasis {
    pub fn element(&self, id: &str) -> Option<&BasisElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    /// Checks Hermiticity, tracelessness of non-identity elements,
    /// completeness and (for orthogonal bases) pairwise orthogonality.
    pub fn check_invariants(&self) -> Result<()> {
        let d = self.dimension;
        let count = self.elements.len() + usize::from(!self.includes_identity);
        if count != d * d {
            return Err(Error::DimensionMismatch(format!("{count} elements for a complete basis in dimension {d}")));
        }
        for (i, e) in self.elements.iter().enumerate() {
            if e.matrix.rows() != d || !e.matrix.is_square() {
                return Err(Error::DimensionMismatch(format!("element {} is not {d}x{d}", e.id)));
            }
            let defect = e.matrix.hermiticity_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian { defect });
            }
            let is_identity = self.includes_identity && i == 0;
            if self.orthogonal && !is_identity && e.matrix.trace().norm() > 1e-12 {
                return Err(Error::OutOfRange(format!("element {} is not traceless", e.id)));
            }
            if self.orthogonal {
                for f in &self.elements[i + 1..] {
                    let overlap = crate::linalg::trace_product(&e.matrix, &f.matrix)?.norm();
                    if overlap > 1e-10 {
                        return Err(Error::OutOfRange(format!("{} and {} overlap by {overlap:e}", e.id, f.id)));
                    }
                }
            }
        }
        Ok(())
    }
}

fn element(id: impl Into<String>, matrix: ComplexMatrix, hbar_power: u32) -> BasisElement {
    BasisElement { id: id.into(), matrix, hbar_power }
}

fn unit(d: usize, j: usize, k: usize, value: C64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(j, k)] = value;
    m
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// `I, sigma_x, sigma_y, sigma_z`.
pub fn pauli_basis() -> LocalBasis {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let elements = vec![
        element("I", ComplexMatrix::identity(2), 0),
        element("X", &unit(2, 0, 1, one) + &unit(2, 1, 0, one), 0),
        element("Y", &unit(2, 0, 1, -i) + &unit(2, 1, 0, i), 0),
        element("Z", ComplexMatrix::diagonal(&[one, -one]), 0),
    ];
    LocalBasis { id: "pauli".into(), dimension: 2, elements, includes_identity: true, orthogonal: true }
}

/// `|j><k| + |k><j|` for `j < k` in lexicographic order.
pub fn symmetric_gellmann(d: usize) -> Result<Vec<ComplexMatrix>> {
    check_dim(d)?;
    let one = C64::new(1.0, 0.0);
    Ok(pairs(d).map(|(j, k)| &unit(d, j, k, one) + &unit(d, k, j, one)).collect())
}

/// `-i|j><k| + i|k><j|` for `0 <= j < k < d` in lexicographic order.
pub fn antisymmetric_gellmann(d: usize) -> Result<Vec<ComplexMatrix>> {
    check_dim(d)?;
    let i = C64::new(0.0, 1.0);
    Ok(pairs(d).map(|(j, k)| &unit(d, j, k, -i) + &unit(d, k, j, i)).collect())
}

/// `sqrt(2/(l(l+1))) (sum_{j<l} |j><j| - l |l><l|)` for `l = 1..d-1`.
pub fn diagonal_gellmann(d: usize) -> Result<Vec<ComplexMatrix>> {
    check_dim(d)?;
    Ok((1..d)
        .map(|l| {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let diag: Vec<C64> = (0..d)
                .map(|j| match j.cmp(&l) {
                    std::cmp::Ordering::Less => C64::new(norm, 0.0),
                    std::cmp::Ordering::Equal => C64::new(-(l as f64) * norm, 0.0),
                    std::cmp::Ordering::Greater => C64::new(0.0, 0.0),
                })
                .collect();
            ComplexMatrix::diagonal(&diag)
        })
        .collect())
}

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |j| (j + 1..d).map(move |k| (j, k)))
}

/// Identity followed by the generalized Gell-Mann matrices in block order:
/// symmetric `S{jk}`, antisymmetric `A{jk}`, then diagonal `D{l}`.
pub fn gellmann_basis(d: usize) -> Result<LocalBasis> {
    let mut elements = vec![element("I", ComplexMatrix::identity(d), 0)];
    for ((j, k), m) in pairs(d).zip(symmetric_gellmann(d)?) {
        elements.push(element(format!("S{j}{k}"), m, 0));
    }
    for ((j, k), m) in pairs(d).zip(antisymmetric_gellmann(d)?) {
        elements.push(element(format!("A{j}{k}"), m, 0));
    }
    for (l, m) in diagonal_gellmann(d)?.into_iter().enumerate() {
        elements.push(element(format!("D{}", l + 1), m, 0));
    }
    Ok(LocalBasis { id: format!("gellmann-{d}"), dimension: d, elements, includes_identity: true, orthogonal: true })
}

/// Position in the block-ordered Gell-Mann list (identity excluded) of the
/// conventional qutrit matrices `lambda^1 .. lambda^8`.
pub const QUTRIT_LAMBDA_ORDER: [usize; 8] = [0, 3, 6, 1, 4, 2, 5, 7];

/// The qutrit Gell-Mann matrices `lambda^1 .. lambda^8` in their conventional
/// interleaved order.
pub fn qutrit_lambdas() -> Vec<ComplexMatrix> {
    let basis = gellmann_basis(3).expect("d = 3 is valid");
    QUTRIT_LAMBDA_ORDER.iter().map(|&k| basis.elements[k + 1].matrix.clone()).collect()
}

/// Spin-1 observables with `hbar = 1`:
/// `I, Sx, Sy, Sz, Sx^2, Sy^2, {Sx,Sy}, {Sy,Sz}, {Sz,Sx}`.
///
/// `Sz^2 = 2I - Sx^2 - Sy^2` is omitted, so the nine operators are linearly
/// independent and span the 3x3 Hermitian matrices.
pub fn spin1_operators() -> Vec<(String, ComplexMatrix)> {
    spin1_basis().elements.into_iter().map(|e| (e.id, e.matrix)).collect()
}

pub fn spin1_basis() -> LocalBasis {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    let z = r(0.0);
    let sx = ComplexMatrix::from_vec(3, 3, vec![z, r(h), z, r(h), z, r(h), z, r(h), z]).unwrap();
    let sy = ComplexMatrix::from_vec(3, 3, vec![z, i(-h), z, i(h), z, i(-h), z, i(h), z]).unwrap();
    let sz = ComplexMatrix::diagonal(&[r(1.0), z, r(-1.0)]);
    let anti = |a: &ComplexMatrix, b: &ComplexMatrix| a.anticommutator(b).unwrap();
    let elements = vec![
        element("I", ComplexMatrix::identity(3), 0),
        element("Sx", sx.clone(), 1),
        element("Sy", sy.clone(), 1),
        element("Sz", sz.clone(), 1),
        element("Sx^2", &sx * &sx, 2),
        element("Sy^2", &sy * &sy, 2),
        element("{Sx,Sy}", anti(&sx, &sy), 2),
        element("{Sy,Sz}", anti(&sy, &sz), 2),
        element("{Sz,Sx}", anti(&sz, &sx), 2),
    ];
    LocalBasis { id: "spin1".into(), dimension: 3, elements, includes_identity: true, orthogonal: false }
}

/// One product term `coefficient * (left (x) right)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub left: String,
    pub right: String,
    /// Total hbar power of `left (x) right`; the coefficient of the physical
    /// observable carries `hbar^-hbar_power`.
    pub hbar_power: u32,
}

impl Term {
    pub fn label(&self) -> String {
        format!("{}(x){}", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBasisDecomposition {
    pub basis_id: String,
    pub terms: Vec<Term>,
}

impl LocalBasisDecomposition {
    /// Coefficient of `left (x) right`, zero when the term is absent.
    pub fn coefficient(&self, left: &str, right: &str) -> f64 {
        self.terms.iter().find(|t| t.left == left && t.right == right).map_or(0.0, |t| t.coefficient)
    }

    pub fn reconstruct(&self, basis: &LocalBasis) -> Result<ComplexMatrix> {
        if basis.id != self.basis_id {
            return Err(Error::DimensionMismatch(format!("decomposition over {} given basis {}", self.basis_id, basis.id)));
        }
        let n = basis.dimension * basis.dimension;
        let mut out = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            let (l, r) = lookup(basis, t)?;
            out = &out + &crate::linalg::kron(&l.matrix, &r.matrix).scale_real(t.coefficient);
        }
        Ok(out)
    }
}

pub(crate) fn lookup<'a>(basis: &'a LocalBasis, t: &Term) -> Result<(&'a BasisElement, &'a BasisElement)> {
    let find = |id: &str| basis.element(id).ok_or_else(|| Error::Format(format!("unknown basis element {id}")));
    Ok((find(&t.left)?, find(&t.right)?))
}

/// `Tr(op (a (x) b))` without forming the Kronecker product.
fn trace_against_product(op: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let (da, db) = (a.rows(), b.rows());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..da {
        for i2 in 0..da {
            let x = a[(i2, i)];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..db {
                for j2 in 0..db {
                    acc += op[(i * db + j, i2 * db + j2)] * x * b[(j2, j)];
                }
            }
        }
    }
    acc
}

/// Decomposes a Hermitian operator on `C^d (x) C^d` over products of basis
/// elements.
///
/// Orthogonal bases use `c_ij = Tr(op (B_i (x) B_j)) / (Tr B_i^2 Tr B_j^2)`.
/// Non-orthogonal bases solve the normal equations through the inverse local
/// Gram matrix, which is the least-squares solution over the product set.
pub fn decompose_bipartite(op: &ComplexMatrix, basis: &LocalBasis) -> Result<LocalBasisDecomposition> {
    let d = basis.dimension;
    if !op.is_square() || op.rows() != d * d {
        return Err(Error::DimensionMismatch(format!("{}x{} operator for basis of dimension {d}", op.rows(), op.cols())));
    }
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let k = basis.elements.len();
    let mut overlaps = vec![0.0; k * k];
    for (a, ea) in basis.elements.iter().enumerate() {
        for (b, eb) in basis.elements.iter().enumerate() {
            overlaps[a * k + b] = trace_against_product(op, &ea.matrix, &eb.matrix).re;
        }
    }

    let coefficients = if basis.orthogonal {
        let norms: Vec<f64> = basis.elements.iter().map(|e| crate::linalg::trace_product(&e.matrix, &e.matrix).map(|t| t.re)).collect::<Result<_>>()?;
        (0..k * k).map(|idx| overlaps[idx] / (norms[idx / k] * norms[idx % k])).collect::<Vec<_>>()
    } else {
        let ginv = inverse_gram(basis)?;
        // C = G^-1 T G^-1 (G symmetric).
        let t = ComplexMatrix::from_fn(k, k, |a, b| C64::new(overlaps[a * k + b], 0.0));
        let c = &(&ginv * &t) * &ginv;
        c.as_slice().iter().map(|z| z.re).collect()
    };

    let cutoff = COEFF_ZERO * coefficients.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
    let terms = coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > cutoff)
        .map(|(idx, &c)| {
            let (l, r) = (&basis.elements[idx / k], &basis.elements[idx % k]);
            Term { coefficient: c, left: l.id.clone(), right: r.id.clone(), hbar_power: l.hbar_power + r.hbar_power }
        })
        .collect();
    Ok(LocalBasisDecomposition { basis_id: basis.id.clone(), terms })
}

fn inverse_gram(basis: &LocalBasis) -> Result<ComplexMatrix> {
    let k = basis.elements.len();
    let gram = ComplexMatrix::from_fn(k, k, |a, b| {
        let t = crate::linalg::trace_product(&basis.elements[a].matrix, &basis.elements[b].matrix).unwrap();
        C64::new(t.re, 0.0)
    });
    let spec = hermitian_eigen(&gram)?;
    if spec.min() <= 1e-12 * spec.max().abs() {
        return Err(Error::Singular(format!("local Gram matrix of {} has eigenvalue {:e}", basis.id, spec.min())));
    }
    let inv_vals: Vec<C64> = spec.eigenvalues.iter().map(|l| C64::new(1.0 / l, 0.0)).collect();
    let v = &spec.eigenvectors;
    Ok(&(v * &ComplexMatrix::diagonal(&inv_vals)) * &v.adjoint())
}

/// Decomposition over the 81 products of the spin-1 observables.
pub fn decompose_spin1(op: &ComplexMatrix) -> Result<LocalBasisDecomposition> {
    decompose_bipartite(op, &spin1_basis())
}

/// The basis a named basis family provides in dimension `d`.
pub fn basis_by_name(name: &str, d: usize) -> Result<LocalBasis> {
    match name {
        "pauli" if d == 2 => Ok(pauli_basis()),
        "pauli" => Err(Error::DimensionMismatch(format!("pauli basis requires d = 2, got {d}"))),
        "spin1" if d == 3 => Ok(spin1_basis()),
        "spin1" => Err(Error::DimensionMismatch(format!("spin1 basis requires d = 3, got {d}"))),
        "gellmann" => gellmann_basis(d),
        other => Err(Error::Format(format!("unknown basis {other}"))),
    }
}

/// Resolves a basis from the id recorded in a decomposition.
pub fn basis_by_id(id: &str) -> Result<LocalBasis> {
    match id {
        "pauli" => Ok(pauli_basis()),
        "spin1" => Ok(spin1_basis()),
        other => match other.strip_prefix("gellmann-").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) => gellmann_basis(d),
            None => Err(Error::Format(format!("unknown basis id {other}"))),
        },
    }
}
