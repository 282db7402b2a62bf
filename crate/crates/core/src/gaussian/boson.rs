use nalgebra::DMatrix;

use super::{BosonCovariance, LinearMap, MapKind, QuadratureOrdering};
use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("Bogoliubov parameters must be finite".into()))
    }
}

/// `M = cosh r · R(φ) + sinh r · Q(θ)`, with `R(φ)` a rotation and
/// `Q(θ) = [[cos θ, sin θ], [sin θ, −cos θ]]`.
pub fn single_mode_bogoliubov(r: f64, theta: f64, phi: f64) -> Result<LinearMap> {
    check_finite(&[r, theta, phi])?;
    let (c, s) = (r.cosh(), r.sinh());
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            c * phi.cos() + s * theta.cos(),
            -c * phi.sin() + s * theta.sin(),
            c * phi.sin() + s * theta.sin(),
            c * phi.cos() - s * theta.cos(),
        ],
    );
    LinearMap::new(m, MapKind::Symplectic, QuadratureOrdering::Qqpp)
}

/// `V = M Mᵀ = cosh 2r · I + sinh 2r · Q(θ + φ)`.
pub fn single_mode_covariance(r: f64, theta: f64, phi: f64) -> Result<BosonCovariance> {
    let map = single_mode_bogoliubov(r, theta, phi)?;
    super::transform_covariance(&map, &BosonCovariance::vacuum(1, QuadratureOrdering::Qqpp))
}

/// Two-mode squeezer on `(q₁, q₂, p₁, p₂)`:
/// `q₁ → cosh r · q₁ − sinh r · q₂`, `p₁ → cosh r · p₁ + sinh r · p₂`.
pub fn two_mode_squeezing_map(r: f64) -> Result<LinearMap> {
    check_finite(&[r])?;
    let (c, s) = (r.cosh(), r.sinh());
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        c, -s, 0.0, 0.0,
        -s, c, 0.0, 0.0,
        0.0, 0.0, c, s,
        0.0, 0.0, s, c,
    ]);
    LinearMap::new(m, MapKind::Symplectic, QuadratureOrdering::Qqpp)
}

/// 2×2 covariance of one mode, tagged `Qqpp`.
pub fn reduced_covariance(v: &BosonCovariance, mode: usize) -> Result<BosonCovariance> {
    let n = v.n_modes();
    if mode >= n {
        return Err(Error::IndexOutOfRange { index: mode, len: n });
    }
    let (q, p) = match v.ordering() {
        QuadratureOrdering::Qqpp => (mode, n + mode),
        QuadratureOrdering::Qpqp => (2 * mode, 2 * mode + 1),
    };
    let m = v.matrix();
    let reduced = DMatrix::from_row_slice(2, 2, &[m[(q, q)], m[(q, p)], m[(p, q)], m[(p, p)]]);
    BosonCovariance::new(reduced, QuadratureOrdering::Qqpp)
}

/// Mean occupation from a displacement, `½|R̄|²`.
pub fn displacement_number(mean: &[f64]) -> f64 {
    0.5 * mean.iter().map(|x| x * x).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{fock_bound, relative_boson, Statistics};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn vac() -> BosonCovariance {
        BosonCovariance::vacuum(1, QuadratureOrdering::Qqpp)
    }

    #[test]
    fn covariance_closed_form() {
        let (r, th, ph) = (0.8_f64, 0.4_f64, -1.3_f64);
        let v = single_mode_covariance(r, th, ph).unwrap();
        let a = th + ph;
        let expected = [
            (2.0 * r).cosh() + (2.0 * r).sinh() * a.cos(),
            (2.0 * r).sinh() * a.sin(),
            (2.0 * r).sinh() * a.sin(),
            (2.0 * r).cosh() - (2.0 * r).sinh() * a.cos(),
        ];
        for (x, e) in v.matrix().iter().zip([expected[0], expected[2], expected[1], expected[3]]) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_spectrum_is_exp_two_r() {
        let r = 1.1_f64;
        let v = single_mode_covariance(r, 0.9, 2.0).unwrap();
        let mut eig: Vec<Complex64> = relative_boson(&v, &vac()).unwrap().eigenvalues();
        eig.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((eig[0].re - (-2.0 * r).exp()).abs() < 1e-10);
        assert!((eig[1].re - (2.0 * r).exp()).abs() < 1e-9);
        assert!(eig.iter().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn reduced_two_mode_is_thermal() {
        let r = 0.9_f64;
        let v = super::super::transform_covariance(
            &two_mode_squeezing_map(r).unwrap(),
            &BosonCovariance::vacuum(2, QuadratureOrdering::Qqpp),
        )
        .unwrap();
        for mode in 0..2 {
            let red = reduced_covariance(&v, mode).unwrap();
            let m = red.matrix();
            assert!((m[(0, 0)] - (2.0 * r).cosh()).abs() < 1e-12);
            assert!(m[(0, 1)].abs() < 1e-12);
        }
        let inter = reduced_covariance(&v.to_ordering(QuadratureOrdering::Qpqp), 1).unwrap();
        assert_eq!(inter, reduced_covariance(&v, 1).unwrap());
        assert!(reduced_covariance(&v, 2).is_err());
    }

    proptest! {
        #[test]
        fn bogoliubov_is_symplectic(r in 0.0f64..3.0, th in -6.3f64..6.3, ph in -6.3f64..6.3) {
            let m = single_mode_bogoliubov(r, th, ph).unwrap();
            prop_assert!(m.defect() < 1e-10 * (2.0 * r).cosh());
        }

        #[test]
        fn bound_is_phase_independent(r in 0.0f64..2.5, th in -6.3f64..6.3, ph in -6.3f64..6.3) {
            let v = single_mode_covariance(r, th, ph).unwrap();
            prop_assert!((v.determinant() - 1.0).abs() < 1e-9 * (2.0 * r).cosh().powi(2));
            let b = fock_bound(&relative_boson(&v, &vac()).unwrap().delta, Statistics::Boson).unwrap();
            let expected = r.sinh().powi(2);
            prop_assert!((b - expected).abs() < 1e-10 * expected.max(1.0));
        }
    }
}
