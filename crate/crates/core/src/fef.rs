//! Fully entangled fraction by multistart projected power iteration.
//!
//! `(U (x) I)|Phi>` is the row-major vectorization of `U` scaled by
//! `1/sqrt d`, so the objective `<Phi|(U^dagger (x) I) rho (U (x) I)|Phi>`
//! is the quadratic form `vec(U)^dagger rho vec(U) / d`. Since `rho` is
//! positive semidefinite the form is convex, and replacing `U` by the polar
//! factor of `reshape(rho vec(U))` never decreases it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{polar_unitary, ComplexMatrix, C64};
use crate::seeds::{self, derive_seed, stream};
use crate::states::{max_entangled, DensityMatrix};
use crate::witness::FefOracle;

/// Allowed per-step decrease of the objective before the iteration is
/// declared non-monotone.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FefParams {
    /// Random starts in addition to the deterministic `U = I` start.
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once a step improves the objective by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for FefParams {
    fn default() -> Self {
        Self { restarts: 32, max_iter: 500, tol: 1e-10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FefResult {
    /// Singlet fraction `<Phi|rho|Phi>`.
    pub lower_bound: f64,
    /// Best objective value found; a certified lower bound on the FEF.
    pub estimate: f64,
    #[serde(with = "crate::io::matrix_serde")]
    pub maximizer: ComplexMatrix,
    /// Random starts run, including replacements for abandoned starts.
    pub restarts_used: usize,
    /// Starts abandoned after a rank-deficient polar step.
    pub rank_deficient_restarts: usize,
    /// Index of the start that produced the estimate (0 is `U = I`).
    pub best_start: usize,
    pub converged: bool,
    pub params: FefParams,
}

fn local_dim(rho: &DensityMatrix) -> Result<usize> {
    let (da, db) = rho.dims();
    if da != db {
        return Err(Error::DimensionMismatch(format!("FEF needs equal local dimensions, got {da}x{db}")));
    }
    Ok(da)
}

/// `<Phi_d|rho|Phi_d>`.
pub fn singlet_fraction(rho: &DensityMatrix) -> Result<f64> {
    let d = local_dim(rho)?;
    Ok(rho.matrix().quadratic_form(max_entangled(d)?.amplitudes()).re)
}

/// `vec(U)^dagger rho vec(U) / d` with row-major `vec`.
pub fn objective(rho: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    rho.quadratic_form(u.as_slice()).re / u.rows() as f64
}

struct StartOutcome {
    value: f64,
    unitary: ComplexMatrix,
    converged: bool,
    abandoned: bool,
}

fn random_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    polar_unitary(&seeds::ginibre(d, d, &mut seeds::rng(seed)))
}

fn power_iterate(rho: &ComplexMatrix, start: ComplexMatrix, params: &FefParams) -> Result<StartOutcome> {
    let d = start.rows();
    let mut u = start;
    let mut value = objective(rho, &u);
    for _ in 0..params.max_iter {
        let image = ComplexMatrix::from_vec(d, d, rho.mul_vec(u.as_slice()))?;
        let next = match polar_unitary(&image) {
            Ok(next) => next,
            // Shifting rho by the identity changes the objective by a
            // constant on unitaries, and usually restores full rank.
            Err(Error::RankDeficient { .. }) => match polar_unitary(&(&image + &u)) {
                Ok(next) => next,
                Err(Error::RankDeficient { .. }) => {
                    return Ok(StartOutcome { value, unitary: u, converged: false, abandoned: true })
                }
                Err(e) => return Err(e),
            },
            Err(e) => return Err(e),
        };
        let next_value = objective(rho, &next);
        if next_value < value - MONOTONE_SLACK {
            return Err(Error::Monotonicity(value - next_value));
        }
        let improvement = next_value - value;
        u = next;
        value = next_value;
        if improvement < params.tol {
            return Ok(StartOutcome { value, unitary: u, converged: true, abandoned: false });
        }
    }
    Ok(StartOutcome { value, unitary: u, converged: false, abandoned: false })
}

/// Estimates the fully entangled fraction from the `U = I` start plus
/// `params.restarts` seeded random unitary starts.
///
/// Start `k >= 1` uses the seed derived from `(params.seed, k)`; starts
/// abandoned on a rank-deficient polar step are replaced by fresh starts
/// with the next indices, at most `params.restarts` times. Ties go to the
/// lowest start index, so the result does not depend on scheduling.
pub fn fef_estimate(rho: &DensityMatrix, params: &FefParams) -> Result<FefResult> {
    let d = local_dim(rho)?;
    let m = rho.matrix();
    let start_for = |k: usize| -> Result<ComplexMatrix> {
        if k == 0 {
            Ok(ComplexMatrix::identity(d))
        } else {
            random_unitary(d, derive_seed(params.seed, stream::FEF_RESTART, k as u64))
        }
    };
    let run = |k: usize| -> Result<StartOutcome> { power_iterate(m, start_for(k)?, params) };

    let mut outcomes: Vec<(usize, StartOutcome)> = Vec::with_capacity(params.restarts + 1);
    for (k, out) in crate::indexed_map(params.restarts + 1, run).into_iter().enumerate() {
        outcomes.push((k, out?));
    }
    let mut abandoned = outcomes.iter().filter(|(_, o)| o.abandoned).count();
    let mut rank_deficient_restarts = abandoned;
    let mut next_index = params.restarts + 1;
    let mut replacements = 0;
    while abandoned > 0 && replacements < params.restarts {
        let out = run(next_index)?;
        abandoned -= 1;
        if out.abandoned {
            abandoned += 1;
            rank_deficient_restarts += 1;
        }
        outcomes.push((next_index, out));
        next_index += 1;
        replacements += 1;
    }

    let (best_start, best) = outcomes
        .iter()
        .fold(None::<&(usize, StartOutcome)>, |acc, cand| match acc {
            Some(b) if b.1.value >= cand.1.value => Some(b),
            _ => Some(cand),
        })
        .expect("at least the identity start");
    Ok(FefResult {
        lower_bound: singlet_fraction(rho)?,
        estimate: best.value,
        maximizer: best.unitary.clone(),
        restarts_used: outcomes.len() - 1,
        rank_deficient_restarts,
        best_start: *best_start,
        converged: best.converged,
        params: *params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Usefulness {
    Useful,
    NotCertified,
}

/// `Useful` iff the FEF estimate exceeds `1/d + tol`. The estimate is a
/// lower bound, so `Useful` is sound; `NotCertified` makes no claim that
/// `F <= 1/d`.
pub fn is_useful(rho: &DensityMatrix, params: &FefParams, tol: f64) -> Result<(Usefulness, FefResult)> {
    let d = local_dim(rho)?;
    let res = fef_estimate(rho, params)?;
    let verdict = if res.estimate > 1.0 / d as f64 + tol { Usefulness::Useful } else { Usefulness::NotCertified };
    Ok((verdict, res))
}

/// [`FefOracle`] backed by [`fef_estimate`].
#[derive(Debug, Clone, Default)]
pub struct FefEngine {
    pub params: FefParams,
}

impl FefOracle for FefEngine {
    fn fef_lower_bound(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(fef_estimate(rho, &self.params)?.estimate)
    }
}

/// Applies `U (x) I` to `|Phi_d>`: the maximally entangled state rotated by `U`.
pub fn rotated_max_entangled(u: &ComplexMatrix) -> Vec<C64> {
    let scale = 1.0 / (u.rows() as f64).sqrt();
    u.as_slice().iter().map(|z| z * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::states::{isotropic, random_density, singlet};

    fn quick() -> FefParams {
        FefParams { restarts: 8, ..FefParams::default() }
    }

    fn unitarity_defect(u: &ComplexMatrix) -> f64 {
        (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.rows())).frobenius_norm()
    }

    #[test]
    fn singlet_fraction_examples() {
        for d in 2..=4 {
            let phi = max_entangled(d).unwrap().density((d, d)).unwrap();
            assert!((singlet_fraction(&phi).unwrap() - 1.0).abs() < 1e-14);
        }
        for alpha in [-0.125, 0.0, 0.3, 1.0] {
            let f = singlet_fraction(&isotropic(3, alpha).unwrap()).unwrap();
            assert!((f - (8.0 * alpha + 1.0) / 9.0).abs() < 1e-14);
        }
        assert!(singlet_fraction(&singlet().density((2, 2)).unwrap()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn vectorization_identity() {
        // (U (x) I)|Phi> computed by brute-force Kronecker product.
        let u = random_unitary(3, 4).unwrap();
        let full = crate::linalg::kron(&u, &ComplexMatrix::identity(3));
        let direct = full.mul_vec(max_entangled(3).unwrap().amplitudes());
        let fast = rotated_max_entangled(&u);
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn isotropic_closed_form() {
        for alpha in [-0.125, 0.0, 0.25, 0.5, 0.9, 1.0] {
            let rho = isotropic(3, alpha).unwrap();
            let r = fef_estimate(&rho, &quick()).unwrap();
            // For alpha < 0 a traceless U removes the singlet overlap.
            let exact = f64::max((8.0 * alpha + 1.0) / 9.0, (1.0 - alpha) / 9.0);
            assert!((r.estimate - exact).abs() < 1e-6, "alpha {alpha}: {}", r.estimate);
            assert!(r.converged);
        }
    }

    #[test]
    fn maximally_mixed_is_flat() {
        for d in 2..=4 {
            let rho = isotropic(d, 0.0).unwrap();
            let r = fef_estimate(&rho, &quick()).unwrap();
            assert!((r.estimate - 1.0 / (d * d) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn singlet_reaches_one() {
        let rho = singlet().density((2, 2)).unwrap();
        let r = fef_estimate(&rho, &quick()).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-6);
        assert!(r.lower_bound.abs() < 1e-15);
        // The maximizer maps phi+ onto psi- up to a phase.
        let v = rotated_max_entangled(&r.maximizer);
        let overlap = crate::linalg::inner(singlet().amplitudes(), &v).norm();
        assert!((overlap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn product_state_recovers_one_over_d() {
        // Pure product states make every unshifted polar step rank deficient.
        let v = crate::states::random_product_pure(3, 12).unwrap();
        let rho = DensityMatrix::new((3, 3), v.projector()).unwrap();
        let r = fef_estimate(&rho, &quick()).unwrap();
        assert!((r.estimate - 1.0 / 3.0).abs() < 1e-6, "{}", r.estimate);
    }

    #[test]
    fn result_invariants_on_random_states() {
        for seed in 0..20 {
            let d = 2 + (seed as usize % 2);
            let rho = random_density(d, seed).unwrap();
            let r = fef_estimate(&rho, &quick()).unwrap();
            let lmax = hermitian_eigen(rho.matrix()).unwrap().max();
            assert!(r.estimate >= r.lower_bound - 1e-10);
            assert!(r.estimate >= 1.0 / (d * d) as f64 - 1e-10);
            assert!(r.estimate <= lmax + 1e-10);
            assert!(unitarity_defect(&r.maximizer) <= 1e-8);
            assert!((objective(rho.matrix(), &r.maximizer) - r.estimate).abs() <= 1e-10);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let rho = random_density(3, 77).unwrap();
        let p = FefParams { seed: 5, ..quick() };
        assert_eq!(fef_estimate(&rho, &p).unwrap(), fef_estimate(&rho, &p).unwrap());
    }

    #[test]
    fn usefulness_verdicts() {
        let p = quick();
        assert_eq!(is_useful(&isotropic(3, 0.3).unwrap(), &p, 1e-9).unwrap().0, Usefulness::Useful);
        assert_eq!(is_useful(&isotropic(3, 0.25).unwrap(), &p, 1e-9).unwrap().0, Usefulness::NotCertified);
        assert_eq!(is_useful(&isotropic(3, 0.0).unwrap(), &p, 1e-9).unwrap().0, Usefulness::NotCertified);
    }

    #[test]
    fn rejects_unequal_dims() {
        let rho = DensityMatrix::new((2, 3), ComplexMatrix::identity(6).scale_real(1.0 / 6.0)).unwrap();
        assert!(matches!(fef_estimate(&rho, &quick()), Err(Error::DimensionMismatch(_))));
        assert!(singlet_fraction(&rho).is_err());
    }
}
