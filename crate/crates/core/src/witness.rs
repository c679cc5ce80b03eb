//! Entanglement and teleportation witnesses: construction, evaluation,
//! classification and randomized validation.
//!
//! The teleportation witness for `d x d` systems is
//!
//! ```text
//! W_d = (1/d) sum_{j<k} A_jk (x) A_jk + (1/d) I - (|Phi><Phi|)^{T_A}
//! ```
//!
//! with `A_jk` the antisymmetric Gell-Mann matrices. It simplifies to
//! `I/d - |Phi><Phi|`, so `Tr(W_d rho) = 1/d - <Phi|rho|Phi>`.

use serde::{Deserialize, Serialize};

use crate::bases::antisymmetric_gellmann;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, partial_transpose, trace_product, ComplexMatrix, Subsystem, HERMITIAN_TOL};
use crate::seeds::{derive_seed, stream};
use crate::states::{self, DensityMatrix};

/// Values within this distance of zero are inconclusive.
pub const DEFAULT_DETECTION_TOL: f64 = 1e-9;
/// Imaginary parts of expectation values above this are rejected.
pub const IMAG_TOL: f64 = 1e-10;
/// A witness must have an eigenvalue below `-NEGATIVITY_TOL`.
pub const NEGATIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Entanglement,
    Teleportation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOperator {
    pub kind: WitnessKind,
    pub d: usize,
    pub matrix: ComplexMatrix,
    pub provenance: String,
}

impl WitnessOperator {
    /// Wraps a matrix as a witness after a shape check only; use
    /// [`WitnessOperator::check_invariants`] or [`validate`] to vet it.
    pub fn from_matrix(kind: WitnessKind, d: usize, matrix: ComplexMatrix, provenance: impl Into<String>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if !matrix.is_square() || matrix.rows() != d * d {
            return Err(Error::DimensionMismatch(format!("{}x{} witness for d = {d}", matrix.rows(), matrix.cols())));
        }
        Ok(Self { kind, d, matrix, provenance: provenance.into() })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigen(&self.matrix)?.min())
    }

    /// Hermiticity and at least one negative eigenvalue.
    pub fn check_invariants(&self) -> Result<()> {
        let min = self.min_eigenvalue()?;
        if min >= -NEGATIVITY_TOL {
            return Err(Error::OutOfRange(format!("witness has no negative eigenvalue (min {min:e})")));
        }
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// `(|Phi_d><Phi_d|)^{T_A}`, i.e. the swap operator divided by `d`.
pub fn entanglement_witness(d: usize) -> Result<WitnessOperator> {
    check_dim(d)?;
    let phi = states::max_entangled(d)?.projector();
    let matrix = partial_transpose(&phi, (d, d), Subsystem::A)?;
    WitnessOperator::from_matrix(WitnessKind::Entanglement, d, matrix, format!("partial transpose of |Phi_{d}><Phi_{d}|"))
}

/// Teleportation witness built from the entanglement witness and the
/// antisymmetric Gell-Mann products.
pub fn teleportation_witness(d: usize) -> Result<WitnessOperator> {
    let ent = entanglement_witness(d)?;
    let inv_d = 1.0 / d as f64;
    let mut m = ComplexMatrix::identity(d * d).scale_real(inv_d);
    for a in antisymmetric_gellmann(d)? {
        m = &m + &kron(&a, &a).scale_real(inv_d);
    }
    let m = &m - &ent.matrix;
    WitnessOperator::from_matrix(
        WitnessKind::Teleportation,
        d,
        m,
        format!("(1/{d}) sum A_jk(x)A_jk + (1/{d}) I - (|Phi_{d}><Phi_{d}|)^T_A"),
    )
}

/// Builds the witness of the requested kind.
pub fn build(kind: WitnessKind, d: usize) -> Result<WitnessOperator> {
    match kind {
        WitnessKind::Entanglement => entanglement_witness(d),
        WitnessKind::Teleportation => teleportation_witness(d),
    }
}

/// `Tr(W rho)`; errors if the imaginary part exceeds [`IMAG_TOL`].
pub fn evaluate(w: &WitnessOperator, rho: &DensityMatrix) -> Result<f64> {
    evaluate_matrix(&w.matrix, rho.matrix())
}

pub(crate) fn evaluate_matrix(w: &ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    let t = trace_product(w, rho)?;
    if t.im.abs() > IMAG_TOL {
        return Err(Error::NonRealExpectation(t.im));
    }
    Ok(t.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    DetectedUseful,
    Inconclusive,
}

impl Detection {
    pub fn as_str(self) -> &'static str {
        match self {
            Detection::DetectedUseful => "detected_useful",
            Detection::Inconclusive => "inconclusive",
        }
    }
}

/// A strictly negative value (below `-tol`) certifies usefulness; anything
/// else is inconclusive, never a certificate of uselessness.
pub fn classify(value: f64, tol: f64) -> Detection {
    if value < -tol {
        Detection::DetectedUseful
    } else {
        Detection::Inconclusive
    }
}

/// Source of lower bounds on the fully entangled fraction.
pub trait FefOracle: Sync {
    fn fef_lower_bound(&self, rho: &DensityMatrix) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationParams {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for ValidationParams {
    fn default() -> Self {
        Self { samples: 200, seed: 0, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Hermiticity,
    NegativeEigenvalue,
    FefInequality,
    SeparableNonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub check: Check,
    /// Seed of the offending sample, if the check was sampled.
    pub seed: Option<u64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub d: usize,
    pub kind: WitnessKind,
    pub params: ValidationParams,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: Option<f64>,
    /// Seeds of the random states used for the FEF inequality check.
    pub state_seeds: Vec<u64>,
    /// Seeds of the random product states used for the separable check.
    pub separable_seeds: Vec<u64>,
    /// Smallest observed `Tr(W rho) - (1/d - F_est(rho))`.
    pub worst_inequality_margin: Option<f64>,
    /// Smallest observed `Tr(W sigma)` over separable samples.
    pub worst_separable_value: Option<f64>,
    pub failures: Vec<CheckFailure>,
    pub note: String,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks (a) Hermiticity, (b) a negative eigenvalue, (c) the inequality
/// `Tr(W rho) >= 1/d - F_est(rho) - tol` on random states, and (d)
/// `Tr(W sigma) >= -tol` on random product states.
///
/// Sample `i` of each check is drawn from a seed derived from the master
/// seed and `i`, so the report does not depend on evaluation order.
pub fn validate(w: &WitnessOperator, oracle: &dyn FefOracle, params: &ValidationParams) -> Result<ValidationReport> {
    let d = w.d;
    let mut failures = Vec::new();
    let hermiticity_defect = w.matrix.hermiticity_defect();
    let note = if d > 3 {
        "d > 3: validity is numerically supported on the sampled states, not proven".to_string()
    } else {
        String::new()
    };
    let state_seeds: Vec<u64> = (0..params.samples).map(|i| derive_seed(params.seed, stream::VALIDATE_STATES, i as u64)).collect();
    let separable_seeds: Vec<u64> =
        (0..params.samples).map(|i| derive_seed(params.seed, stream::VALIDATE_SEPARABLE, i as u64)).collect();

    let mut report = ValidationReport {
        d,
        kind: w.kind,
        params: *params,
        hermiticity_defect,
        min_eigenvalue: None,
        state_seeds: state_seeds.clone(),
        separable_seeds: separable_seeds.clone(),
        worst_inequality_margin: None,
        worst_separable_value: None,
        failures: Vec::new(),
        note,
    };

    if hermiticity_defect > HERMITIAN_TOL {
        failures.push(CheckFailure { check: Check::Hermiticity, seed: None, value: hermiticity_defect, bound: HERMITIAN_TOL });
        // Expectation values of a non-Hermitian operator are not observables.
        report.failures = failures;
        return Ok(report);
    }

    let min = w.min_eigenvalue()?;
    report.min_eigenvalue = Some(min);
    if min >= -NEGATIVITY_TOL {
        failures.push(CheckFailure { check: Check::NegativeEigenvalue, seed: None, value: min, bound: -NEGATIVITY_TOL });
    }

    let threshold = 1.0 / d as f64;
    let margins = crate::indexed_map(state_seeds.len(), |i| -> Result<f64> {
        let rho = states::random_density(d, state_seeds[i])?;
        let value = evaluate(w, &rho)?;
        let fef = oracle.fef_lower_bound(&rho)?;
        Ok(value - (threshold - fef))
    });
    for (margin, &seed) in margins.into_iter().zip(&state_seeds) {
        let margin = margin?;
        report.worst_inequality_margin = Some(report.worst_inequality_margin.map_or(margin, |m: f64| m.min(margin)));
        if margin < -params.tol {
            failures.push(CheckFailure { check: Check::FefInequality, seed: Some(seed), value: margin, bound: -params.tol });
        }
    }

    let values = crate::indexed_map(separable_seeds.len(), |i| -> Result<f64> {
        let v = states::random_product_pure(d, separable_seeds[i])?;
        evaluate_matrix(&w.matrix, &v.projector())
    });
    for (value, &seed) in values.into_iter().zip(&separable_seeds) {
        let value = value?;
        report.worst_separable_value = Some(report.worst_separable_value.map_or(value, |m: f64| m.min(value)));
        if value < -params.tol {
            failures.push(CheckFailure { check: Check::SeparableNonNegative, seed: Some(seed), value, bound: -params.tol });
        }
    }

    report.failures = failures;
    Ok(report)
}
