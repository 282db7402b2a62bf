use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    fock_bound, relative_fermion, transform_fermion_covariance, FermionCovariance, LinearMap,
    MapKind, QuadratureOrdering, Statistics,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FermionPairReport {
    pub m: LinearMap,
    pub omega_tilde: FermionCovariance,
    pub delta: DMatrix<f64>,
    /// Eigenvalues of `Δ`, sorted by argument.
    pub spectrum: Vec<Complex64>,
    pub bound_per_fermion: f64,
    pub bound_summed: f64,
}

fn phi_rotation(phi: f64) -> DMatrix<f64> {
    let (c, s) = (phi.cos(), phi.sin());
    #[rustfmt::skip]
    let r = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, c, 0.0, -s,
        0.0, 0.0, 1.0, 0.0,
        0.0, s, 0.0, c,
    ]);
    r
}

fn pair_rotation(theta: f64) -> DMatrix<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    #[rustfmt::skip]
    let r = DMatrix::from_row_slice(4, 4, &[
        c, s, 0.0, 0.0,
        -s, c, 0.0, 0.0,
        0.0, 0.0, c, -s,
        0.0, 0.0, s, c,
    ]);
    r
}

/// Two-mode fermionic Bogoliubov pair acting on the Majorana vacuum
/// `(q₁, q₂, p₁, p₂)`, `M = R(φ) · B(θ) · R(φ)ᵀ`.
pub fn fermion_pair(theta: f64, phi: f64) -> Result<FermionPairReport> {
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(Error::InvalidParameter("fermion pair angles must be finite".into()));
    }
    let r = phi_rotation(phi);
    let m = LinearMap::new(
        &r * pair_rotation(theta) * r.transpose(),
        MapKind::Orthogonal,
        QuadratureOrdering::Qqpp,
    )?;
    let omega = FermionCovariance::vacuum(2);
    let omega_tilde = transform_fermion_covariance(&m, &omega)?;
    let rel = relative_fermion(&omega_tilde, &omega)?;
    let mut spectrum = rel.eigenvalues();
    spectrum.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let bound_summed = fock_bound(&rel.delta, Statistics::Fermion)?;
    Ok(FermionPairReport {
        m,
        omega_tilde,
        delta: rel.delta,
        spectrum,
        bound_per_fermion: 0.5 * bound_summed,
        bound_summed,
    })
}

/// Geodesic length `2θ` of the pair transformation, `θ ∈ [0, π]`.
pub fn fermion_geometric(theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "geometric fermion complexity needs θ in [0, π] (got {theta})"
        )));
    }
    Ok(2.0 * theta)
}
