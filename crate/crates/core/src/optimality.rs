//! Optimality certificates from spanning sets of product vectors on which a
//! witness has zero expectation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, span_rank, ComplexMatrix, C64, RANK_TOL};
use crate::seeds::{self, derive_seed, stream};
pub use crate::states::ProductVector;
use crate::witness::{WitnessOperator, IMAG_TOL};

/// Expectations up to this magnitude count as zero.
pub const ZERO_EXPECTATION_TOL: f64 = 1e-9;
const MAX_DESCENT_SWEEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    OptimalCertified,
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedVector {
    pub e: Vec<C64>,
    pub f: Vec<C64>,
    pub expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCertificate {
    pub witness: String,
    pub vectors: Vec<CertifiedVector>,
    pub span_rank: usize,
    pub required_rank: usize,
    pub zero_tol: f64,
    pub rank_tol: f64,
    pub verdict: Verdict,
    pub note: String,
}

/// `<e,f|W|e,f>` from the local factors.
pub fn expectation_on_product(w: &WitnessOperator, v: &ProductVector) -> Result<f64> {
    if v.embedded.len() != w.matrix.rows() {
        return Err(Error::DimensionMismatch(format!(
            "product vector of length {} for a {}x{} witness",
            v.embedded.len(),
            w.matrix.rows(),
            w.matrix.cols()
        )));
    }
    let t = w.matrix.quadratic_form(&v.embedded);
    if t.im.abs() > IMAG_TOL {
        return Err(Error::NonRealExpectation(t.im));
    }
    Ok(t.re)
}

fn basis_vec(d: usize, entries: &[(usize, C64)]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    for &(k, z) in entries {
        v[k] = z;
    }
    v
}

/// The published zero-expectation product vectors, normalized.
///
/// `d = 2`: `(|0>+i|1>)(|0>-i|1>)`, `(|0>+|1>)^2`, `|00>`, `|11>`.
/// `d = 3`: `K1 .. K9`.
pub fn paper_kernel_vectors(d: usize) -> Result<Vec<ProductVector>> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let pairs: Vec<(Vec<C64>, Vec<C64>)> = match d {
        2 => {
            let b = |e: &[(usize, C64)]| basis_vec(2, e);
            vec![
                (b(&[(0, one), (1, i)]), b(&[(0, one), (1, -i)])),
                (b(&[(0, one), (1, one)]), b(&[(0, one), (1, one)])),
                (b(&[(0, one)]), b(&[(0, one)])),
                (b(&[(1, one)]), b(&[(1, one)])),
            ]
        }
        3 => {
            let b = |e: &[(usize, C64)]| basis_vec(3, e);
            let same = |v: Vec<C64>| (v.clone(), v);
            vec![
                same(b(&[(0, one)])),
                same(b(&[(1, one)])),
                same(b(&[(2, one)])),
                same(b(&[(0, one), (1, one), (2, one)])),
                (b(&[(0, one), (1, i)]), b(&[(0, one), (1, -i)])),
                (b(&[(0, one), (2, i)]), b(&[(0, one), (2, -i)])),
                (b(&[(1, one), (2, i)]), b(&[(1, one), (2, -i)])),
                same(b(&[(0, one), (1, -one), (2, -one)])),
                same(b(&[(0, one), (1, one), (2, -one)])),
            ]
        }
        other => return Err(Error::OutOfRange(format!("published kernel vectors exist for d = 2, 3 only, got {other}"))),
    };
    pairs.into_iter().map(|(e, f)| ProductVector::normalized(e, f)).collect()
}

/// Checks the span criterion: every vector has `|<e,f|W|e,f>| <= tol` and
/// the embedded vectors span `C^d (x) C^d`.
pub fn certify(w: &WitnessOperator, vectors: &[ProductVector], tol: f64) -> Result<OptimalityCertificate> {
    if vectors.is_empty() {
        return Err(Error::Empty("certificate without vectors"));
    }
    let required_rank = w.d * w.d;
    let mut certified = Vec::with_capacity(vectors.len());
    let mut worst: f64 = 0.0;
    for v in vectors {
        let expectation = expectation_on_product(w, v)?;
        worst = worst.max(expectation.abs());
        certified.push(CertifiedVector { e: v.e.clone(), f: v.f.clone(), expectation });
    }
    // Only kernel members count toward the span.
    let kernel: Vec<Vec<C64>> =
        vectors.iter().zip(&certified).filter(|(_, c)| c.expectation.abs() <= tol).map(|(v, _)| v.embedded.clone()).collect();
    let rank = if kernel.is_empty() { 0 } else { span_rank(&kernel, RANK_TOL)? };
    let verdict = if worst <= tol && rank == required_rank { Verdict::OptimalCertified } else { Verdict::NotCertified };
    let note = match verdict {
        Verdict::OptimalCertified => "zero-expectation product vectors span the composite space".to_string(),
        Verdict::NotCertified => "search incomplete, not evidence of non-optimality".to_string(),
    };
    Ok(OptimalityCertificate {
        witness: w.provenance.clone(),
        vectors: certified,
        span_rank: rank,
        required_rank,
        zero_tol: tol,
        rank_tol: RANK_TOL,
        verdict,
        note,
    })
}

/// `M[a,a'] = sum_{b,b'} conj(f_b) W[(a,b),(a',b')] f_b'`, so that
/// `<e,f|W|e,f> = <e|M|e>`.
pub fn contract_right(w: &ComplexMatrix, f: &[C64]) -> ComplexMatrix {
    let d = f.len();
    ComplexMatrix::from_fn(d, d, |a, a2| {
        let mut acc = C64::new(0.0, 0.0);
        for (b, fb) in f.iter().enumerate() {
            for (b2, fb2) in f.iter().enumerate() {
                acc += fb.conj() * w[(a * d + b, a2 * d + b2)] * fb2;
            }
        }
        acc
    })
}

/// `N[b,b'] = sum_{a,a'} conj(e_a) W[(a,b),(a',b')] e_a'`.
pub fn contract_left(w: &ComplexMatrix, e: &[C64]) -> ComplexMatrix {
    let d = e.len();
    ComplexMatrix::from_fn(d, d, |b, b2| {
        let mut acc = C64::new(0.0, 0.0);
        for (a, ea) in e.iter().enumerate() {
            for (a2, ea2) in e.iter().enumerate() {
                acc += ea.conj() * w[(a * d + b, a2 * d + b2)] * ea2;
            }
        }
        acc
    })
}

/// Trace of one alternating descent run.
#[derive(Debug, Clone)]
pub struct DescentRun {
    pub vector: ProductVector,
    pub value: f64,
    /// Objective after every half-step.
    pub history: Vec<f64>,
}

/// Minimizes `<e,f|W|e,f>` by alternately replacing `e` (then `f`) with the
/// lowest eigenvector of the partially contracted operator.
pub fn alternating_descent(w: &WitnessOperator, seed: u64, tol: f64) -> Result<DescentRun> {
    let d = w.d;
    let mut rng = seeds::rng(seed);
    let mut e = crate::states::PureState::normalized(seeds::complex_normal_vec(d, &mut rng))?.amplitudes().to_vec();
    let mut f = crate::states::PureState::normalized(seeds::complex_normal_vec(d, &mut rng))?.amplitudes().to_vec();
    let mut value = w.matrix.quadratic_form(&crate::linalg::kron_vec(&e, &f)).re;
    let mut history = vec![value];
    for _ in 0..MAX_DESCENT_SWEEPS {
        let before = value;
        let left = hermitian_eigen(&contract_right(&w.matrix, &f).hermitian_part())?;
        e = left.vector(0);
        history.push(left.min());
        let right = hermitian_eigen(&contract_left(&w.matrix, &e).hermitian_part())?;
        f = right.vector(0);
        value = right.min();
        history.push(value);
        if (before - value).abs() < tol {
            break;
        }
    }
    Ok(DescentRun { vector: ProductVector::new(e, f), value, history })
}

/// Runs up to `attempts` seeded descents and keeps the zero-expectation
/// results that grow the span, stopping at rank `d^2`. Fewer than `d^2`
/// vectors means the search was incomplete, not that the witness is
/// non-optimal.
pub fn search_kernel_vectors(w: &WitnessOperator, attempts: usize, seed: u64, tol: f64) -> Result<Vec<ProductVector>> {
    if attempts == 0 {
        return Err(Error::Empty("kernel search with zero attempts"));
    }
    let full = w.d * w.d;
    let mut kept: Vec<ProductVector> = Vec::new();
    let mut rank = 0;
    // Batches keep the parallel work bounded while the greedy filter runs in
    // attempt-index order.
    let batch = full.max(8);
    let mut next = 0;
    while next < attempts && rank < full {
        let count = batch.min(attempts - next);
        let runs = crate::indexed_map(count, |i| alternating_descent(w, derive_seed(seed, stream::KERNEL_SEARCH, (next + i) as u64), tol * 1e-3));
        for run in runs {
            let run = run?;
            if run.value.abs() > tol || rank == full {
                continue;
            }
            let mut candidate: Vec<Vec<C64>> = kept.iter().map(|v| v.embedded.clone()).collect();
            candidate.push(run.vector.embedded.clone());
            let new_rank = span_rank(&candidate, RANK_TOL)?;
            if new_rank > rank {
                rank = new_rank;
                kept.push(run.vector);
            }
        }
        next += count;
    }
    Ok(kept)
}
