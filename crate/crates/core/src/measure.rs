//! Finite-shot estimation of a witness expectation from local product
//! observables. Only shot noise is modelled.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bases::{basis_by_id, basis_by_name, decompose_bipartite, lookup, LocalBasisDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, kron_vec, ComplexMatrix, Spectrum};
use crate::seeds::{self, derive_seed, stream};
use crate::states::DensityMatrix;
use crate::witness::{Detection, WitnessOperator};

pub const DEFAULT_Z: f64 = 3.0;
/// Born probabilities down to this value are clipped to zero.
const PROB_CLIP: f64 = -1e-12;
const MASS_TOL: f64 = 1e-8;
/// Product eigenvalues closer than this are one outcome.
const MERGE_TOL: f64 = 1e-10;
const RECONSTRUCT_TOL: f64 = 1e-10;
const UNREACHABLE_TOL: f64 = 1e-12;

pub const NOTE: &str = "shot noise only; no detector, loss or crosstalk model";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermSample {
    pub mean: f64,
    pub variance: f64,
    pub shots: u64,
}

/// Measurement outcomes of `left (x) right` on `rho`: distinct eigenvalues
/// and their Born probabilities.
pub fn outcome_distribution(left: &ComplexMatrix, right: &ComplexMatrix, rho: &DensityMatrix) -> Result<Vec<(f64, f64)>> {
    let (da, db) = rho.dims();
    if left.rows() != da || right.rows() != db || !left.is_square() || !right.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "observable {}x{} (x) {}x{} on a {da}x{db} state",
            left.rows(),
            left.cols(),
            right.rows(),
            right.cols()
        )));
    }
    let (sl, sr) = (hermitian_eigen(left)?, hermitian_eigen(right)?);
    outcomes_from_spectra(&sl, &sr, rho)
}

fn outcomes_from_spectra(sl: &Spectrum, sr: &Spectrum, rho: &DensityMatrix) -> Result<Vec<(f64, f64)>> {
    let mut raw = Vec::with_capacity(sl.eigenvalues.len() * sr.eigenvalues.len());
    for (i, li) in sl.eigenvalues.iter().enumerate() {
        let u = sl.vector(i);
        for (j, rj) in sr.eigenvalues.iter().enumerate() {
            let v = kron_vec(&u, &sr.vector(j));
            let p = rho.matrix().quadratic_form(&v).re;
            if p < PROB_CLIP {
                return Err(Error::ProbabilityMass(p));
            }
            raw.push((li * rj, p.max(0.0)));
        }
    }
    let mass: f64 = raw.iter().map(|(_, p)| p).sum();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::ProbabilityMass(mass));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (value, p) in raw {
        match merged.last_mut() {
            Some(last) if (value - last.0).abs() <= MERGE_TOL => last.1 += p,
            _ => merged.push((value, p)),
        }
    }
    merged.retain(|&(_, p)| p > 0.0);
    for o in &mut merged {
        o.1 /= mass;
    }
    Ok(merged)
}

fn draw(outcomes: &[(f64, f64)], shots: u64, seed: u64) -> Result<TermSample> {
    if shots == 0 {
        return Err(Error::OutOfRange("shots must be at least 1".into()));
    }
    if outcomes.len() == 1 {
        return Ok(TermSample { mean: outcomes[0].0, variance: 0.0, shots });
    }
    // Multinomial counts as a chain of conditional binomials.
    let mut rng = seeds::rng(seed);
    let mut remaining = shots;
    let mut rest = 1.0;
    let mut counts = Vec::with_capacity(outcomes.len());
    for (k, &(_, p)) in outcomes.iter().enumerate() {
        let n = if k + 1 == outcomes.len() || remaining == 0 {
            remaining
        } else {
            let q = (p / rest).clamp(0.0, 1.0);
            Binomial::new(remaining, q).map_err(|e| Error::OutOfRange(e.to_string()))?.sample(&mut rng)
        };
        counts.push(n);
        remaining -= n;
        rest -= p;
    }
    let total = shots as f64;
    let mean = outcomes.iter().zip(&counts).map(|(o, &n)| o.0 * n as f64).sum::<f64>() / total;
    let variance = if shots > 1 {
        outcomes.iter().zip(&counts).map(|(o, &n)| n as f64 * (o.0 - mean).powi(2)).sum::<f64>() / (total - 1.0)
    } else {
        0.0
    };
    Ok(TermSample { mean, variance, shots })
}

/// Samples `shots` Born-rule outcomes of `left (x) right` and returns the
/// sample mean and unbiased sample variance of the eigenvalues.
pub fn sample_term(left: &ComplexMatrix, right: &ComplexMatrix, rho: &DensityMatrix, shots: u64, seed: u64) -> Result<TermSample> {
    draw(&outcome_distribution(left, right, rho)?, shots, seed)
}

/// `(Tr(rho O), Tr(rho O^2) - Tr(rho O)^2)` for `O = left (x) right`.
pub fn exact_moments(left: &ComplexMatrix, right: &ComplexMatrix, rho: &DensityMatrix) -> Result<(f64, f64)> {
    let o = kron(left, right);
    let mean = crate::linalg::trace_product(&o, rho.matrix())?.re;
    let second = crate::linalg::trace_product(&o.matmul(&o)?, rho.matrix())?.re;
    Ok((mean, (second - mean * mean).max(0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub decomposition: LocalBasisDecomposition,
    pub shots_per_term: u64,
    pub seed: u64,
}

impl MeasurementPlan {
    pub fn new(decomposition: LocalBasisDecomposition, shots_per_term: u64, seed: u64) -> Result<Self> {
        if shots_per_term == 0 {
            return Err(Error::OutOfRange("shots_per_term must be at least 1".into()));
        }
        Ok(Self { decomposition, shots_per_term, seed })
    }

    /// Plan over the default basis for `w.d`.
    pub fn for_witness(w: &WitnessOperator, shots_per_term: u64, seed: u64) -> Result<Self> {
        Self::with_basis(w, default_basis_name(w.d), shots_per_term, seed)
    }

    pub fn with_basis(w: &WitnessOperator, basis: &str, shots_per_term: u64, seed: u64) -> Result<Self> {
        let basis = basis_by_name(basis, w.d)?;
        Self::new(decompose_bipartite(&w.matrix, &basis)?, shots_per_term, seed)
    }
}

/// Spin-1 for qutrits, Pauli for qubits, Gell-Mann otherwise.
pub fn default_basis_name(d: usize) -> &'static str {
    match d {
        2 => "pauli",
        3 => "spin1",
        _ => "gellmann",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub term: String,
    pub coefficient: f64,
    pub mean: f64,
    pub variance: f64,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub point_estimate: f64,
    pub standard_error: f64,
    pub z: f64,
    pub verdict: Detection,
    pub basis_id: String,
    pub shots_per_term: u64,
    pub seed: u64,
    pub per_term: Vec<TermEstimate>,
    pub note: String,
}

fn check_plan(w: &WitnessOperator, rho: &DensityMatrix, plan: &MeasurementPlan) -> Result<crate::bases::LocalBasis> {
    let basis = basis_by_id(&plan.decomposition.basis_id)?;
    if basis.dimension != w.d || rho.dims() != (w.d, w.d) {
        return Err(Error::DimensionMismatch(format!(
            "witness d = {}, basis d = {}, state {:?}",
            w.d,
            basis.dimension,
            rho.dims()
        )));
    }
    let diff = plan.decomposition.reconstruct(&basis)?.max_abs_diff(&w.matrix);
    if diff > RECONSTRUCT_TOL {
        return Err(Error::DimensionMismatch(format!("decomposition misses the witness by {diff:e}")));
    }
    Ok(basis)
}

/// Estimates `Tr(W rho)` by sampling every decomposition term independently.
/// The verdict is `detected_useful` iff `estimate + z * standard_error < 0`.
pub fn estimate_witness_expectation(w: &WitnessOperator, rho: &DensityMatrix, plan: &MeasurementPlan, z: f64) -> Result<EstimateReport> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::OutOfRange(format!("z must be finite and non-negative, got {z}")));
    }
    if plan.shots_per_term == 0 {
        return Err(Error::OutOfRange("shots_per_term must be at least 1".into()));
    }
    let basis = check_plan(w, rho, plan)?;
    let terms = &plan.decomposition.terms;
    let samples = crate::indexed_map(terms.len(), |idx| -> Result<TermEstimate> {
        let t = &terms[idx];
        let (l, r) = lookup(&basis, t)?;
        let seed = derive_seed(plan.seed, stream::MEASURE_TERM, idx as u64);
        let s = sample_term(&l.matrix, &r.matrix, rho, plan.shots_per_term, seed)?;
        Ok(TermEstimate { term: t.label(), coefficient: t.coefficient, mean: s.mean, variance: s.variance, shots: s.shots, seed })
    });
    let per_term = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let point_estimate = per_term.iter().map(|t| t.coefficient * t.mean).sum::<f64>();
    let standard_error =
        per_term.iter().map(|t| t.coefficient * t.coefficient * t.variance / t.shots as f64).sum::<f64>().sqrt();
    let verdict = if point_estimate + z * standard_error < 0.0 { Detection::DetectedUseful } else { Detection::Inconclusive };
    Ok(EstimateReport {
        point_estimate,
        standard_error,
        z,
        verdict,
        basis_id: plan.decomposition.basis_id.clone(),
        shots_per_term: plan.shots_per_term,
        seed: plan.seed,
        per_term,
        note: NOTE.to_string(),
    })
}

/// Shots per term so that `|expectation| / standard_error >= z`, using exact
/// per-term variances.
pub fn shots_for_confidence(
    w: &WitnessOperator,
    decomposition: &LocalBasisDecomposition,
    rho: &DensityMatrix,
    exact_expectation: f64,
    z: f64,
) -> Result<u64> {
    if exact_expectation.abs() <= UNREACHABLE_TOL {
        return Err(Error::UnreachableConfidence(exact_expectation));
    }
    let plan = MeasurementPlan { decomposition: decomposition.clone(), shots_per_term: 1, seed: 0 };
    let basis = check_plan(w, rho, &plan)?;
    let mut weighted = 0.0;
    for t in &decomposition.terms {
        let (l, r) = lookup(&basis, t)?;
        let (_, var) = exact_moments(&l.matrix, &r.matrix, rho)?;
        weighted += t.coefficient * t.coefficient * var;
    }
    let n = (z * z * weighted / (exact_expectation * exact_expectation)).ceil();
    Ok(if n < 1.0 { 1 } else { n as u64 })
}
