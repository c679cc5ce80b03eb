//! Reference states and seeded random states.

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, kron_vec, ComplexMatrix, Subsystem, C64, HERMITIAN_TOL};
use crate::seeds::{self, derive_seed, stream};

/// Eigenvalues down to this are accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;

/// Trace-one positive semidefinite operator on `C^dA (x) C^dB`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: (usize, usize),
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(dims: (usize, usize), matrix: ComplexMatrix) -> Result<Self> {
        let n = dims.0 * dims.1;
        if !matrix.is_square() || matrix.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let spectrum = hermitian_eigen(&matrix)?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        if spectrum.min() < -PSD_TOL {
            return Err(Error::NotPositive { eigenvalue: spectrum.min() });
        }
        Ok(Self { dims, matrix })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Local dimension `d` of a `d x d` state.
    pub fn local_dim(&self) -> Result<usize> {
        if self.dims.0 != self.dims.1 {
            return Err(Error::DimensionMismatch(format!("unequal local dimensions {:?}", self.dims)));
        }
        Ok(self.dims.0)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn reduced(&self, traced: Subsystem) -> ComplexMatrix {
        linalg::partial_trace(&self.matrix, self.dims, traced).expect("dims validated at construction")
    }
}

/// Unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = linalg::norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::OutOfRange(format!("pure state norm {n}")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = linalg::norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::OutOfRange("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|z| z / n).collect() })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }

    /// Density matrix of this state on a `d x d` bipartition.
    pub fn density(&self, dims: (usize, usize)) -> Result<DensityMatrix> {
        DensityMatrix::new(dims, self.projector())
    }
}

/// Product vector `|e> (x) |f>` with its composite embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    pub e: Vec<C64>,
    pub f: Vec<C64>,
    pub embedded: Vec<C64>,
    pub normalized: bool,
}

impl ProductVector {
    /// Keeps the local vectors as given.
    pub fn new(e: Vec<C64>, f: Vec<C64>) -> Self {
        let embedded = kron_vec(&e, &f);
        let normalized = (linalg::norm(&embedded) - 1.0).abs() <= NORM_TOL;
        Self { e, f, embedded, normalized }
    }

    /// Normalizes both local factors first.
    pub fn normalized(e: Vec<C64>, f: Vec<C64>) -> Result<Self> {
        let e = PureState::normalized(e)?.amplitudes;
        let f = PureState::normalized(f)?.amplitudes;
        Ok(Self::new(e, f))
    }

    pub fn local_dim(&self) -> usize {
        self.e.len()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.embedded)
    }

    /// Multiplies both factors by phases; the ray is unchanged.
    pub fn with_phases(&self, pe: f64, pf: f64) -> Self {
        let (ue, uf) = (C64::from_polar(1.0, pe), C64::from_polar(1.0, pf));
        Self::new(self.e.iter().map(|z| z * ue).collect(), self.f.iter().map(|z| z * uf).collect())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// `(1/sqrt d) sum_k |kk>`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    check_dim(d)?;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for k in 0..d {
        v[k * d + k] = amp;
    }
    PureState::new(v)
}

/// `(|01> - |10>) / sqrt 2`.
pub fn singlet() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    PureState::new(vec![z, C64::new(h, 0.0), C64::new(-h, 0.0), z]).expect("unit norm")
}

/// Two-qubit state with maximally mixed marginals,
/// `(1/4)(I(x)I + sum_i c_i sigma_i (x) sigma_i)`.
pub fn bell_diagonal(c1: f64, c2: f64, c3: f64) -> Result<DensityMatrix> {
    let eigs = bell_diagonal_eigenvalues(c1, c2, c3);
    if let Some(&worst) = eigs.iter().find(|&&l| l < -PSD_TOL) {
        return Err(Error::NotPositive { eigenvalue: worst });
    }
    let p = crate::bases::pauli_basis();
    let mut m = ComplexMatrix::identity(4);
    for (k, c) in [c1, c2, c3].into_iter().enumerate() {
        let s = &p.elements[k + 1].matrix;
        m = &m + &linalg::kron(s, s).scale_real(c);
    }
    DensityMatrix::new((2, 2), m.scale_real(0.25))
}

/// Eigenvalues of the Bell-diagonal state: `(1 -+ c1 -+ c2 -+ c3)/4` with an
/// even number of minus signs flipped from the all-plus pattern
/// `(1 - c1 - c2 - c3), (1 - c1 + c2 + c3), (1 + c1 - c2 + c3), (1 + c1 + c2 - c3)`.
pub fn bell_diagonal_eigenvalues(c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    [
        (1.0 - c1 - c2 - c3) / 4.0,
        (1.0 - c1 + c2 + c3) / 4.0,
        (1.0 + c1 - c2 + c3) / 4.0,
        (1.0 + c1 + c2 - c3) / 4.0,
    ]
}

/// `alpha |Phi_d><Phi_d| + (1 - alpha)/d^2 I` for `-1/(d^2-1) <= alpha <= 1`.
pub fn isotropic(d: usize, alpha: f64) -> Result<DensityMatrix> {
    check_dim(d)?;
    let lower = -1.0 / ((d * d - 1) as f64);
    if !(lower - 1e-15..=1.0 + 1e-15).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} outside [{lower}, 1] for d = {d}")));
    }
    let n = d * d;
    let phi = max_entangled(d)?.projector();
    let m = &phi.scale_real(alpha) + &ComplexMatrix::identity(n).scale_real((1.0 - alpha) / n as f64);
    DensityMatrix::new((d, d), m)
}

/// `G G^dagger / Tr(G G^dagger)` for a seeded `d^2 x d^2` Ginibre matrix `G`.
pub fn random_density(d: usize, seed: u64) -> Result<DensityMatrix> {
    check_dim(d)?;
    let n = d * d;
    let g = seeds::ginibre(n, n, &mut seeds::rng(seed));
    let ggd = (&g * &g.adjoint()).hermitian_part();
    let tr = ggd.trace().re;
    DensityMatrix::new((d, d), ggd.scale_real(1.0 / tr))
}

/// `|e> (x) |f>` with independent normalized complex-normal local vectors.
pub fn random_product_pure(d: usize, seed: u64) -> Result<ProductVector> {
    check_dim(d)?;
    let mut rng = seeds::rng(seed);
    let e = seeds::complex_normal_vec(d, &mut rng);
    let f = seeds::complex_normal_vec(d, &mut rng);
    ProductVector::normalized(e, f)
}

/// Uniform mixture of `terms` random product projectors.
pub fn random_separable(d: usize, terms: usize, seed: u64) -> Result<DensityMatrix> {
    check_dim(d)?;
    if terms == 0 {
        return Err(Error::Empty("separable mixture with zero terms"));
    }
    let n = d * d;
    let mut m = ComplexMatrix::zeros(n, n);
    for t in 0..terms {
        let v = random_product_pure(d, derive_seed(seed, stream::SEPARABLE_TERM, t as u64))?;
        m = &m + &v.projector();
    }
    DensityMatrix::new((d, d), m.scale_real(1.0 / terms as f64).hermitian_part())
}

/// Checks the density-matrix invariants of an arbitrary matrix (used on
/// file input).
pub fn is_valid_density(m: &ComplexMatrix) -> bool {
    m.is_hermitian(HERMITIAN_TOL)
        && (m.trace().re - 1.0).abs() <= TRACE_TOL
        && hermitian_eigen(m).map(|s| s.min() >= -PSD_TOL).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, partial_transpose, singular_values};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn max_entangled_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let phi2 = max_entangled(2).unwrap();
        for (a, b) in phi2.amplitudes().iter().zip([c(h, 0.0), z, z, c(h, 0.0)]) {
            assert!((a - b).norm() < 1e-15);
        }
        let s3 = 1.0 / 3f64.sqrt();
        let phi3 = max_entangled(3).unwrap();
        for (i, a) in phi3.amplitudes().iter().enumerate() {
            let want = if i % 4 == 0 { s3 } else { 0.0 };
            assert!((a - c(want, 0.0)).norm() < 1e-15);
        }
        for d in 2..=8 {
            assert!((linalg::norm(max_entangled(d).unwrap().amplitudes()) - 1.0).abs() < 1e-12);
        }
        assert_eq!(max_entangled(1).unwrap_err(), Error::InvalidDimension(1));
    }

    #[test]
    fn singlet_examples() {
        let s = singlet();
        assert_eq!(inner(s.amplitudes(), max_entangled(2).unwrap().amplitudes()), c(0.0, 0.0));
        let dec = crate::bases::decompose_bipartite(&s.projector(), &crate::bases::pauli_basis()).unwrap();
        for p in ["X", "Y", "Z"] {
            assert!((dec.coefficient(p, p) + 0.25).abs() < 1e-15, "{p}");
        }
        assert!((dec.coefficient("I", "I") - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bell_diagonal_examples() {
        let mixed = bell_diagonal(0.0, 0.0, 0.0).unwrap();
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let s = bell_diagonal(-1.0, -1.0, -1.0).unwrap();
        assert!(s.matrix().max_abs_diff(&singlet().projector()) < 1e-15);
        let p = bell_diagonal(1.0, -1.0, 1.0).unwrap();
        assert!(p.matrix().max_abs_diff(&max_entangled(2).unwrap().projector()) < 1e-15);
        match bell_diagonal(1.0, 1.0, 1.0) {
            Err(Error::NotPositive { eigenvalue }) => assert!((eigenvalue + 0.5).abs() < 1e-15),
            other => panic!("expected PSD rejection, got {other:?}"),
        }
    }

    #[test]
    fn bell_diagonal_eigenvalue_formula_matches_eigensolver() {
        for &(c1, c2, c3) in &[(0.1, -0.3, 0.2), (0.5, 0.5, -0.5), (-0.9, 0.0, 0.1), (0.3, 0.3, 0.3)] {
            let rho = bell_diagonal(c1, c2, c3).unwrap();
            let got = hermitian_eigen(rho.matrix()).unwrap().eigenvalues;
            let mut want = bell_diagonal_eigenvalues(c1, c2, c3);
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bell_diagonal_marginals_are_maximally_mixed() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for &(c1, c2, c3) in &[(0.1, -0.3, 0.2), (1.0, -1.0, 1.0), (-0.2, -0.2, -0.2)] {
            let rho = bell_diagonal(c1, c2, c3).unwrap();
            for side in [Subsystem::A, Subsystem::B] {
                assert!(rho.reduced(side).max_abs_diff(&half) <= 1e-12);
            }
        }
    }

    #[test]
    fn isotropic_examples() {
        let m = isotropic(3, 0.0).unwrap();
        assert!(m.matrix().max_abs_diff(&ComplexMatrix::identity(9).scale_real(1.0 / 9.0)) < 1e-15);
        let pure = isotropic(3, 1.0).unwrap();
        assert!(pure.matrix().max_abs_diff(&max_entangled(3).unwrap().projector()) < 1e-15);
        let edge = isotropic(3, -1.0 / 8.0).unwrap();
        assert!(hermitian_eigen(edge.matrix()).unwrap().min().abs() < 1e-14);
        assert!(matches!(isotropic(3, -0.2), Err(Error::OutOfRange(_))));
        assert!(matches!(isotropic(3, 1.01), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn isotropic_singlet_fraction_grid() {
        for d in 2..=4 {
            let phi = max_entangled(d).unwrap();
            let lower = -1.0 / ((d * d - 1) as f64);
            for k in 0..=10 {
                let alpha = lower + (1.0 - lower) * k as f64 / 10.0;
                let rho = isotropic(d, alpha).unwrap();
                let f = rho.matrix().quadratic_form(phi.amplitudes()).re;
                assert!((f - (alpha + (1.0 - alpha) / (d * d) as f64)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn random_density_is_valid_and_deterministic() {
        let a = random_density(3, 17).unwrap();
        assert_eq!(a, random_density(3, 17).unwrap());
        assert_ne!(a, random_density(3, 18).unwrap());
        assert!((a.matrix().trace().re - 1.0).abs() < 1e-14);
        for seed in 0..1000 {
            let r = random_density(2, seed).unwrap();
            assert!(hermitian_eigen(r.matrix()).unwrap().min() >= 0.0 - 1e-15);
        }
    }

    #[test]
    fn random_product_has_schmidt_rank_one() {
        let v = random_product_pure(3, 5).unwrap();
        assert_eq!(v, random_product_pure(3, 5).unwrap());
        assert!(v.normalized);
        assert!((linalg::norm(&v.embedded) - 1.0).abs() < 1e-12);
        // Reshape the composite amplitudes into a d x d matrix.
        let m = ComplexMatrix::from_vec(3, 3, v.embedded.clone()).unwrap();
        let s = singular_values(&m);
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1] < 1e-12 && s[2] < 1e-12);
    }

    #[test]
    fn random_separable_is_ppt_for_qubits() {
        for seed in 0..20 {
            let rho = random_separable(2, 4, seed).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
            let pt = partial_transpose(rho.matrix(), (2, 2), Subsystem::A).unwrap();
            assert!(hermitian_eigen(&pt).unwrap().min() >= -1e-10);
        }
        assert!(random_separable(2, 0, 1).is_err());
    }

    #[test]
    fn density_rejects_invalid() {
        let bad_trace = ComplexMatrix::identity(4);
        assert!(matches!(DensityMatrix::new((2, 2), bad_trace), Err(Error::BadTrace(_))));
        let bad_dims = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(DensityMatrix::new((2, 3), bad_dims).is_err());
        let negative = ComplexMatrix::diagonal(&[c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new((1, 2), negative), Err(Error::NotPositive { .. })));
    }
}
