//! Browser bindings for exploring teleportation witnesses.
//!
//! Every export returns a JSON string so the page needs no generated
//! bindings beyond `wasm-bindgen`'s own glue.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use telewit::fef::{fef_estimate, singlet_fraction, FefParams};
use telewit::measure::{estimate_witness_expectation, MeasurementPlan, TermEstimate};
use telewit::states::{bell_diagonal, bell_diagonal_eigenvalues, isotropic};
use telewit::witness::{classify, evaluate, teleportation_witness, Detection, DEFAULT_DETECTION_TOL};

const MAX_POINTS: u32 = 400;

#[derive(Debug, Serialize)]
pub struct IsotropicScan {
    pub d: usize,
    pub alpha: Vec<f64>,
    pub witness: Vec<f64>,
    pub singlet_fraction: Vec<f64>,
    pub fef: Vec<f64>,
    pub classical_limit: f64,
    /// First scanned alpha with a detecting witness value.
    pub detection_onset: Option<f64>,
}

/// Witness value, singlet fraction and FEF estimate across the isotropic
/// family, `alpha` from `-1/(d^2-1)` to 1.
pub fn scan_isotropic(d: usize, points: u32, restarts: usize) -> Result<IsotropicScan, String> {
    if !(2..=6).contains(&d) {
        return Err(format!("d must be in 2..=6, got {d}"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_POINTS}, got {points}"));
    }
    let w = teleportation_witness(d).map_err(|e| e.to_string())?;
    let lo = -1.0 / (d * d - 1) as f64;
    let params = FefParams { restarts, ..FefParams::default() };
    let mut scan = IsotropicScan {
        d,
        alpha: Vec::new(),
        witness: Vec::new(),
        singlet_fraction: Vec::new(),
        fef: Vec::new(),
        classical_limit: 1.0 / d as f64,
        detection_onset: None,
    };
    for k in 0..points {
        let alpha = lo + (1.0 - lo) * k as f64 / (points - 1) as f64;
        let rho = isotropic(d, alpha).map_err(|e| e.to_string())?;
        let value = evaluate(&w, &rho).map_err(|e| e.to_string())?;
        if scan.detection_onset.is_none() && classify(value, DEFAULT_DETECTION_TOL) == Detection::DetectedUseful {
            scan.detection_onset = Some(alpha);
        }
        scan.alpha.push(alpha);
        scan.witness.push(value);
        scan.singlet_fraction.push(singlet_fraction(&rho).map_err(|e| e.to_string())?);
        scan.fef.push(fef_estimate(&rho, &params).map_err(|e| e.to_string())?.estimate);
    }
    Ok(scan)
}

#[derive(Debug, Serialize)]
pub struct BellPoint {
    pub c: [f64; 3],
    pub eigenvalues: [f64; 4],
    pub valid: bool,
    pub witness: Option<f64>,
    pub verdict: Option<Detection>,
    pub fef: Option<f64>,
}

/// Evaluates the two-qubit witness on a Bell-diagonal state; points outside
/// the state tetrahedron come back with `valid = false`.
pub fn bell_point(c1: f64, c2: f64, c3: f64) -> Result<BellPoint, String> {
    let eigenvalues = bell_diagonal_eigenvalues(c1, c2, c3);
    let mut point = BellPoint { c: [c1, c2, c3], eigenvalues, valid: false, witness: None, verdict: None, fef: None };
    let Ok(rho) = bell_diagonal(c1, c2, c3) else {
        return Ok(point);
    };
    let w = teleportation_witness(2).map_err(|e| e.to_string())?;
    let value = evaluate(&w, &rho).map_err(|e| e.to_string())?;
    point.valid = true;
    point.witness = Some(value);
    point.verdict = Some(classify(value, DEFAULT_DETECTION_TOL));
    point.fef = Some(fef_estimate(&rho, &FefParams { restarts: 8, ..FefParams::default() }).map_err(|e| e.to_string())?.estimate);
    Ok(point)
}

#[derive(Debug, Serialize)]
pub struct MeasurementRun {
    pub alpha: f64,
    pub exact: f64,
    pub estimate: f64,
    pub standard_error: f64,
    pub z: f64,
    pub verdict: Detection,
    pub per_term: Vec<TermEstimate>,
}

/// Finite-shot estimate of the qutrit witness on `isotropic(3, alpha)` with
/// spin-1 product observables.
pub fn qutrit_measurement(alpha: f64, shots: u32, seed: u32, z: f64) -> Result<MeasurementRun, String> {
    let w = teleportation_witness(3).map_err(|e| e.to_string())?;
    let rho = isotropic(3, alpha).map_err(|e| e.to_string())?;
    let plan = MeasurementPlan::for_witness(&w, shots as u64, seed as u64).map_err(|e| e.to_string())?;
    let r = estimate_witness_expectation(&w, &rho, &plan, z).map_err(|e| e.to_string())?;
    Ok(MeasurementRun {
        alpha,
        exact: evaluate(&w, &rho).map_err(|e| e.to_string())?,
        estimate: r.point_estimate,
        standard_error: r.standard_error,
        z: r.z,
        verdict: r.verdict,
        per_term: r.per_term,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = isotropicScan)]
pub fn isotropic_scan(d: u32, points: u32, restarts: u32) -> Result<String, JsError> {
    to_js(scan_isotropic(d as usize, points, restarts as usize))
}

#[wasm_bindgen(js_name = bellDiagonalPoint)]
pub fn bell_diagonal_point(c1: f64, c2: f64, c3: f64) -> Result<String, JsError> {
    to_js(bell_point(c1, c2, c3))
}

#[wasm_bindgen(js_name = simulateMeasurement)]
pub fn simulate_measurement(alpha: f64, shots: u32, seed: u32, z: f64) -> Result<String, JsError> {
    to_js(qutrit_measurement(alpha, shots, seed, z))
}
