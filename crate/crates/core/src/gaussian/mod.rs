//! Covariance-matrix formalism for bosonic and fermionic Gaussian states and
//! the Fock-basis bounds `C_F = ∓¼Tr(I − Δ)`.
//!
//! Bosonic covariances use the convention in which the vacuum has `V = I`.
//! Quadratures are stored as `(q₁…q_n, p₁…p_n)` ("qqpp"); conversion to the
//! interleaved `(q₁, p₁, q₂, p₂, …)` ordering goes through an explicit
//! permutation.

mod boson;
mod dirac;
mod fermion;
mod tfd;

pub use boson::{
    displacement_number, reduced_covariance, single_mode_bogoliubov, single_mode_covariance,
    two_mode_squeezing_map,
};
pub use dirac::{dirac_mode, dirac_summed, dirac_theta, MIN_DIRAC_GRID};
pub use fermion::{fermion_geometric, fermion_pair, FermionPairReport};
pub use tfd::{
    covariance_from_wavefunction, geometric_complexity, tfd_bounds, tfd_bounds_formula,
    tfd_covariances, tfd_evolution_map, tfd_time_evolved, GeometricComplexity, TfdBounds,
    TfdCovariances,
};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::StateFamily;

/// Tolerance for symmetry and antisymmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance for the defining relation of symplectic/orthogonal maps and
/// for physicality checks.
pub const MAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureOrdering {
    /// `(q₁…q_n, p₁…p_n)`.
    Qqpp,
    /// `(q₁, p₁, …, q_n, p_n)`.
    Qpqp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Boson,
    Fermion,
}

/// Symplectic form in the given ordering.
pub fn symplectic_form(n_modes: usize, ordering: QuadratureOrdering) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..n_modes {
        let (q, p) = match ordering {
            QuadratureOrdering::Qqpp => (i, n_modes + i),
            QuadratureOrdering::Qpqp => (2 * i, 2 * i + 1),
        };
        j[(q, p)] = 1.0;
        j[(p, q)] = -1.0;
    }
    j
}

/// Permutation `P` with `x_qpqp = P x_qqpp`.
pub fn ordering_permutation(n_modes: usize) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut p = DMatrix::zeros(dim, dim);
    for i in 0..n_modes {
        p[(2 * i, i)] = 1.0;
        p[(2 * i + 1, n_modes + i)] = 1.0;
    }
    p
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn square_even(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "phase-space matrices need a positive even dimension (got {})",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BosonCovariance {
    v: DMatrix<f64>,
    ordering: QuadratureOrdering,
    n_modes: usize,
}

impl BosonCovariance {
    /// Validates symmetry and the uncertainty relation `V + iJ ≥ 0`.
    pub fn new(v: DMatrix<f64>, ordering: QuadratureOrdering) -> Result<Self> {
        let n_modes = square_even(&v)?;
        let asym = max_abs(&(&v - v.transpose()));
        if asym > SYMMETRY_TOL * max_abs(&v).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "covariance is not symmetric (defect {asym:e})"
            )));
        }
        let cov = BosonCovariance {
            v,
            ordering,
            n_modes,
        };
        let min_eig = cov.uncertainty_min_eigenvalue();
        if min_eig < -MAP_TOL * max_abs(&cov.v).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "covariance violates the uncertainty relation (eigenvalue {min_eig:e})"
            )));
        }
        Ok(cov)
    }

    pub fn vacuum(n_modes: usize, ordering: QuadratureOrdering) -> Self {
        BosonCovariance {
            v: DMatrix::identity(2 * n_modes, 2 * n_modes),
            ordering,
            n_modes,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn ordering(&self) -> QuadratureOrdering {
        self.ordering
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn determinant(&self) -> f64 {
        self.v.determinant()
    }

    /// Smallest eigenvalue of the hermitian matrix `V + iJ`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let j = symplectic_form(self.n_modes, self.ordering);
        let m = DMatrix::from_fn(self.v.nrows(), self.v.ncols(), |r, c| {
            Complex64::new(self.v[(r, c)], j[(r, c)])
        });
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_ordering(&self, ordering: QuadratureOrdering) -> Self {
        if ordering == self.ordering {
            return self.clone();
        }
        let p = ordering_permutation(self.n_modes);
        let v = match ordering {
            QuadratureOrdering::Qpqp => &p * &self.v * p.transpose(),
            QuadratureOrdering::Qqpp => p.transpose() * &self.v * &p,
        };
        BosonCovariance {
            v,
            ordering,
            n_modes: self.n_modes,
        }
    }
}

/// Majorana-basis antisymmetric covariance, ordering `(q₁…q_n, p₁…p_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionCovariance {
    omega: DMatrix<f64>,
    n_modes: usize,
}

impl FermionCovariance {
    pub fn new(omega: DMatrix<f64>) -> Result<Self> {
        let n_modes = square_even(&omega)?;
        let asym = max_abs(&(&omega + omega.transpose()));
        if asym > SYMMETRY_TOL * max_abs(&omega).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "fermionic covariance is not antisymmetric (defect {asym:e})"
            )));
        }
        Ok(FermionCovariance { omega, n_modes })
    }

    /// `Ω = [[0, I], [−I, 0]]`, the state annihilated by every `aᵢ`.
    pub fn vacuum(n_modes: usize) -> Self {
        FermionCovariance {
            omega: symplectic_form(n_modes, QuadratureOrdering::Qqpp),
            n_modes,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// `max |ΩΩᵀ − I|`; zero for a pure state.
    pub fn purity_defect(&self) -> f64 {
        let dim = self.omega.nrows();
        max_abs(&(&self.omega * self.omega.transpose() - DMatrix::identity(dim, dim)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `M J Mᵀ = J`.
    Symplectic,
    /// `M Mᵀ = I`.
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    m: DMatrix<f64>,
    kind: MapKind,
    ordering: QuadratureOrdering,
}

impl LinearMap {
    pub fn new(m: DMatrix<f64>, kind: MapKind, ordering: QuadratureOrdering) -> Result<Self> {
        square_even(&m)?;
        let map = LinearMap { m, kind, ordering };
        let defect = map.defect();
        if defect > MAP_TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not {} (defect {defect:e})",
                match kind {
                    MapKind::Symplectic => "symplectic",
                    MapKind::Orthogonal => "orthogonal",
                }
            )));
        }
        Ok(map)
    }

    pub fn identity(n_modes: usize, kind: MapKind, ordering: QuadratureOrdering) -> Self {
        LinearMap {
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
            kind,
            ordering,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn ordering(&self) -> QuadratureOrdering {
        self.ordering
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    /// `max |M G Mᵀ − G|` with `G = J` or `I` by kind.
    pub fn defect(&self) -> f64 {
        let n = self.n_modes();
        let g = match self.kind {
            MapKind::Symplectic => symplectic_form(n, self.ordering),
            MapKind::Orthogonal => DMatrix::identity(2 * n, 2 * n),
        };
        max_abs(&(&self.m * &g * self.m.transpose() - g))
    }

    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if self.kind != inner.kind || self.ordering != inner.ordering {
            return Err(Error::OrderingMismatch);
        }
        if self.m.nrows() != inner.m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.m.nrows(),
                got: inner.m.nrows(),
            });
        }
        Ok(LinearMap {
            m: &self.m * &inner.m,
            kind: self.kind,
            ordering: self.ordering,
        })
    }

    fn check_target(&self, n_modes: usize, kind: MapKind, ordering: QuadratureOrdering) -> Result<()> {
        if self.kind != kind || self.ordering != ordering {
            return Err(Error::OrderingMismatch);
        }
        if self.n_modes() != n_modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_modes(),
                got: 2 * n_modes,
            });
        }
        Ok(())
    }
}

/// `V′ = M V Mᵀ` for a symplectic map in the covariance's ordering.
pub fn transform_covariance(map: &LinearMap, v: &BosonCovariance) -> Result<BosonCovariance> {
    map.check_target(v.n_modes, MapKind::Symplectic, v.ordering)?;
    let mut out = &map.m * &v.v * map.m.transpose();
    out = (&out + out.transpose()) * 0.5;
    Ok(BosonCovariance {
        v: out,
        ordering: v.ordering,
        n_modes: v.n_modes,
    })
}

/// `Ω′ = M Ω Mᵀ` for an orthogonal map in Majorana ordering.
pub fn transform_fermion_covariance(map: &LinearMap, omega: &FermionCovariance) -> Result<FermionCovariance> {
    map.check_target(omega.n_modes, MapKind::Orthogonal, QuadratureOrdering::Qqpp)?;
    let mut out = &map.m * &omega.omega * map.m.transpose();
    out = (&out - out.transpose()) * 0.5;
    Ok(FermionCovariance {
        omega: out,
        n_modes: omega.n_modes,
    })
}

/// `Δ = target · reference⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeCovariance {
    pub delta: DMatrix<f64>,
}

impl RelativeCovariance {
    /// Spectrum of `Δ` from a general (complex-capable) eigensolver.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.delta.complex_eigenvalues().iter().copied().collect()
    }
}

pub fn relative_covariance(target: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<RelativeCovariance> {
    if target.shape() != reference.shape() {
        return Err(Error::DimensionMismatch {
            expected: reference.nrows(),
            got: target.nrows(),
        });
    }
    let inv = reference
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix)?;
    if !inv.iter().all(|x| x.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(RelativeCovariance {
        delta: target * inv,
    })
}

pub fn relative_boson(target: &BosonCovariance, reference: &BosonCovariance) -> Result<RelativeCovariance> {
    if target.ordering != reference.ordering {
        return Err(Error::OrderingMismatch);
    }
    relative_covariance(&target.v, &reference.v)
}

pub fn relative_fermion(target: &FermionCovariance, reference: &FermionCovariance) -> Result<RelativeCovariance> {
    relative_covariance(&target.omega, &reference.omega)
}

fn sign(stats: Statistics) -> f64 {
    match stats {
        Statistics::Boson => -0.25,
        Statistics::Fermion => 0.25,
    }
}

fn checked_bound(value: f64) -> Result<f64> {
    if value < -MAP_TOL {
        return Err(Error::NegativeBound { value });
    }
    Ok(value.max(0.0))
}

/// `−¼Tr(I − Δ)` for bosons, `+¼Tr(I − Δ)` for fermions.
pub fn fock_bound(delta: &DMatrix<f64>, stats: Statistics) -> Result<f64> {
    if delta.nrows() != delta.ncols() {
        return Err(Error::DimensionMismatch {
            expected: delta.nrows(),
            got: delta.ncols(),
        });
    }
    let n = delta.nrows() as f64;
    checked_bound(sign(stats) * (n - delta.trace()))
}

/// The same bound from the spectrum of `Δ`; the imaginary part of the
/// eigenvalue sum must vanish.
pub fn fock_bound_from_spectrum(eigenvalues: &[Complex64], stats: Statistics) -> Result<f64> {
    let sum: Complex64 = eigenvalues.iter().sum();
    if sum.im.abs() > MAP_TOL * sum.re.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue sum has imaginary part {:e}",
            sum.im
        )));
    }
    checked_bound(sign(stats) * (eigenvalues.len() as f64 - sum.re))
}

/// Bosonic bound with a displacement: `−¼Tr(I − Δ) + ½|R̄|²`, `R̄` the mean
/// quadrature vector relative to the vacuum.
pub fn fock_bound_displaced(delta: &DMatrix<f64>, mean: &[f64]) -> Result<f64> {
    Ok(fock_bound(delta, Statistics::Boson)? + displacement_number(mean))
}

/// `C_F` of a family at time `t` (or at its own parameters for the static
/// families), assembled from covariance matrices. Multi-mode families use the
/// largest single-mode bound.
pub fn family_fock_bound(family: &StateFamily, t: f64) -> Result<f64> {
    family.validate()?;
    let vac = BosonCovariance::vacuum(1, QuadratureOrdering::Qqpp);
    match *family {
        StateFamily::Coherent { alpha } => {
            // e^{−iα(a+a†)t}|0⟩ is the coherent state with amplitude −iαt.
            let mean = [0.0, -std::f64::consts::SQRT_2 * alpha * t];
            fock_bound_displaced(&relative_boson(&vac, &vac)?.delta, &mean)
        }
        StateFamily::Squeezed { eta } => {
            let v = single_mode_covariance(eta * t, std::f64::consts::FRAC_PI_2, 0.0)?;
            fock_bound(&relative_boson(&v, &vac)?.delta, Statistics::Boson)
        }
        StateFamily::DisplacedSqueezed { alpha, eta } => {
            let v = single_mode_covariance(eta * t, 0.0, 0.0)?;
            let mean = [0.0, std::f64::consts::SQRT_2 * alpha * t];
            fock_bound_displaced(&relative_boson(&v, &vac)?.delta, &mean)
        }
        StateFamily::TwoMode { r, .. } => {
            let map = two_mode_squeezing_map(r * t)?;
            let v = transform_covariance(&map, &BosonCovariance::vacuum(2, QuadratureOrdering::Qqpp))?;
            let mut best: f64 = 0.0;
            for mode in 0..2 {
                let reduced = reduced_covariance(&v, mode)?;
                best = best.max(fock_bound(&relative_boson(&reduced, &vac)?.delta, Statistics::Boson)?);
            }
            Ok(best)
        }
        StateFamily::Tfd { params, minus } => {
            let bounds = tfd_bounds(&params)?;
            Ok(if minus { bounds.c_minus } else { bounds.c_plus })
        }
        StateFamily::FermionPair { theta, phi } => Ok(fermion_pair(theta, phi)?.bound_per_fermion),
        StateFamily::DiracMode { params, kind } => dirac_mode(&params, kind),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::TfdParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symplectic_forms_related_by_permutation() {
        for n in 1..4 {
            let p = ordering_permutation(n);
            let j_qqpp = symplectic_form(n, QuadratureOrdering::Qqpp);
            let j_qpqp = symplectic_form(n, QuadratureOrdering::Qpqp);
            assert_eq!(&p * j_qqpp * p.transpose(), j_qpqp);
        }
    }

    #[test]
    fn ordering_round_trip() {
        let v = transform_covariance(
            &two_mode_squeezing_map(0.4).unwrap(),
            &BosonCovariance::vacuum(2, QuadratureOrdering::Qqpp),
        )
        .unwrap();
        let interleaved = v.to_ordering(QuadratureOrdering::Qpqp);
        assert!(interleaved.uncertainty_min_eigenvalue() > -1e-10);
        assert_eq!(interleaved.matrix()[(0, 2)], v.matrix()[(0, 1)]);
        assert_eq!(interleaved.to_ordering(QuadratureOrdering::Qqpp), v);
    }

    #[test]
    fn mixed_orderings_rejected() {
        let a = BosonCovariance::vacuum(2, QuadratureOrdering::Qqpp);
        let b = BosonCovariance::vacuum(2, QuadratureOrdering::Qpqp);
        assert_eq!(relative_boson(&a, &b), Err(Error::OrderingMismatch));
        let map = two_mode_squeezing_map(0.1).unwrap();
        assert_eq!(transform_covariance(&map, &b), Err(Error::OrderingMismatch));
    }

    #[test]
    fn unphysical_covariance_rejected() {
        let v = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert!(BosonCovariance::new(v, QuadratureOrdering::Qqpp).is_err());
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(BosonCovariance::new(v, QuadratureOrdering::Qqpp).is_err());
    }

    #[test]
    fn identity_map_leaves_covariance_unchanged() {
        let v = single_mode_covariance(0.7, 0.3, 1.1).unwrap();
        let id = LinearMap::identity(1, MapKind::Symplectic, QuadratureOrdering::Qqpp);
        assert_eq!(transform_covariance(&id, &v).unwrap(), v);
    }

    #[test]
    fn relative_covariance_of_identical_states() {
        let v = single_mode_covariance(1.3, 0.2, -0.4).unwrap();
        let rel = relative_boson(&v, &v).unwrap();
        for z in rel.eigenvalues() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
        assert!(fock_bound(&rel.delta, Statistics::Boson).unwrap().abs() < 1e-12);
    }

    #[test]
    fn singular_reference() {
        let z = DMatrix::zeros(2, 2);
        assert_eq!(relative_covariance(&DMatrix::identity(2, 2), &z), Err(Error::SingularMatrix));
    }

    #[test]
    fn bound_examples() {
        let r: f64 = 0.9;
        let delta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![(2.0 * r).exp(), (-2.0 * r).exp()]));
        let b = fock_bound(&delta, Statistics::Boson).unwrap();
        assert!((b - r.sinh().powi(2)).abs() < 1e-12);
        assert_eq!(fock_bound(&DMatrix::identity(4, 4), Statistics::Fermion).unwrap(), 0.0);
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5]));
        assert!(matches!(fock_bound(&bad, Statistics::Boson), Err(Error::NegativeBound { .. })));
    }

    #[test]
    fn spectrum_route_matches_trace_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (r, th, ph) = (rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let v = single_mode_covariance(r, th, ph).unwrap();
            let rel = relative_boson(&v, &BosonCovariance::vacuum(1, QuadratureOrdering::Qqpp)).unwrap();
            let a = fock_bound(&rel.delta, Statistics::Boson).unwrap();
            let b = fock_bound_from_spectrum(&rel.eigenvalues(), Statistics::Boson).unwrap();
            assert!((a - b).abs() < 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn family_bounds_match_closed_forms() {
        let t: f64 = 0.7;
        let cases = [
            (StateFamily::Coherent { alpha: 2.0 }, 4.0 * t * t),
            (StateFamily::Squeezed { eta: 1.5 }, (1.5 * t).sinh().powi(2)),
            (StateFamily::TwoMode { r: 1.2, theta: 0.0 }, (1.2 * t).sinh().powi(2)),
            (
                StateFamily::DisplacedSqueezed { alpha: 3.0, eta: 0.5 },
                9.0 * t * t + (0.5 * t).sinh().powi(2),
            ),
        ];
        for (family, expected) in cases {
            let got = family_fock_bound(&family, t).unwrap();
            assert!((got - expected).abs() < 1e-10 * expected.max(1.0), "{}", family.name());
        }
        let tfd = StateFamily::Tfd { params: TfdParams::new(1.0, 1.0, 0.8).unwrap(), minus: false };
        assert!((family_fock_bound(&tfd, 0.0).unwrap() - 0.8f64.sinh().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn two_mode_full_covariance_counts_both_modes() {
        let r: f64 = 0.6;
        let v = transform_covariance(
            &two_mode_squeezing_map(r).unwrap(),
            &BosonCovariance::vacuum(2, QuadratureOrdering::Qqpp),
        )
        .unwrap();
        assert!((v.determinant() - 1.0).abs() < 1e-10);
        let rel = relative_boson(&v, &BosonCovariance::vacuum(2, QuadratureOrdering::Qqpp)).unwrap();
        let total = fock_bound(&rel.delta, Statistics::Boson).unwrap();
        assert!((total - 2.0 * r.sinh().powi(2)).abs() < 1e-12);
    }
}
