use nalgebra::DMatrix;

use super::{
    fock_bound, relative_boson, transform_covariance, BosonCovariance, LinearMap, MapKind,
    QuadratureOrdering, Statistics,
};
use crate::error::{Error, Result};
use crate::family::TfdParams;

/// Covariance of `ψ ∝ exp(−(a + ib) q²/2)`:
/// `V = [[1/a, −b/a], [−b/a, (a² + b²)/a]]`.
pub fn covariance_from_wavefunction(a: f64, b: f64) -> Result<BosonCovariance> {
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "wavefunction width must be positive and finite (got a = {a}, b = {b})"
        )));
    }
    let v = DMatrix::from_row_slice(2, 2, &[1.0 / a, -b / a, -b / a, (a * a + b * b) / a]);
    BosonCovariance::new(v, QuadratureOrdering::Qqpp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfdCovariances {
    pub v_r: BosonCovariance,
    pub v_0: BosonCovariance,
    pub plus: BosonCovariance,
    pub minus: BosonCovariance,
}

fn plus_mode(params: &TfdParams) -> Result<BosonCovariance> {
    covariance_from_wavefunction(params.lambda * (-2.0 * params.alpha).exp(), 0.0)
}

/// Reference, ground and static plus/minus-mode covariances.
pub fn tfd_covariances(params: &TfdParams) -> Result<TfdCovariances> {
    params.validate()?;
    Ok(TfdCovariances {
        v_r: covariance_from_wavefunction(params.lambda_r, 0.0)?,
        v_0: covariance_from_wavefunction(params.lambda, 0.0)?,
        plus: plus_mode(params)?,
        minus: plus_mode(&params.mirrored())?,
    })
}

/// Heisenberg map of `exp(−i t H₊ / 2)` with `H₊ = ω(p²/λ + λq²)/2`.
pub fn tfd_evolution_map(params: &TfdParams) -> Result<LinearMap> {
    params.validate()?;
    let th = 0.5 * params.omega * params.t;
    let l = params.lambda;
    let m = DMatrix::from_row_slice(2, 2, &[th.cos(), th.sin() / l, -l * th.sin(), th.cos()]);
    LinearMap::new(m, MapKind::Symplectic, QuadratureOrdering::Qqpp)
}

/// Plus-mode covariance at time `params.t`; the minus mode is
/// `tfd_time_evolved(&params.mirrored())`.
pub fn tfd_time_evolved(params: &TfdParams) -> Result<BosonCovariance> {
    transform_covariance(&tfd_evolution_map(params)?, &plus_mode(params)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfdBounds {
    pub c_plus: f64,
    pub c_minus: f64,
    pub c_max: f64,
    pub c_sigma: f64,
    pub dc_plus: f64,
    pub dc_minus: f64,
    pub dc_sigma: f64,
}

impl TfdBounds {
    fn assemble(c_plus: f64, c_minus: f64, base_plus: f64, base_minus: f64) -> Self {
        TfdBounds {
            c_plus,
            c_minus,
            c_max: c_plus.max(c_minus),
            c_sigma: c_plus + c_minus,
            dc_plus: c_plus - base_plus,
            dc_minus: c_minus - base_minus,
            dc_sigma: c_plus + c_minus - base_plus - base_minus,
        }
    }
}

fn mode_bound(params: &TfdParams, v_r: &BosonCovariance) -> Result<f64> {
    let v = tfd_time_evolved(params)?;
    fock_bound(&relative_boson(&v, v_r)?.delta, Statistics::Boson)
}

/// Bounds from the trace of the relative covariance of the time-evolved
/// modes against the reference `V_R`.
pub fn tfd_bounds(params: &TfdParams) -> Result<TfdBounds> {
    params.validate()?;
    let v_r = covariance_from_wavefunction(params.lambda_r, 0.0)?;
    let zero = TfdParams { alpha: 0.0, ..*params };
    let base = mode_bound(&zero, &v_r)?;
    Ok(TfdBounds::assemble(
        mode_bound(params, &v_r)?,
        mode_bound(&params.mirrored(), &v_r)?,
        base,
        base,
    ))
}

/// Closed-form counterpart of [`tfd_bounds`].
pub fn tfd_bounds_formula(params: &TfdParams) -> Result<TfdBounds> {
    params.validate()?;
    let (l, lr) = (params.lambda, params.lambda_r);
    let wt = params.omega * params.t;
    let c = |alpha: f64| {
        let num = (lr * lr + l * l) * (2.0 * alpha).cosh() + (lr * lr - l * l) * (2.0 * alpha).sinh() * wt.cos();
        -0.25 * (2.0 - num / (l * lr))
    };
    let a = params.alpha;
    let mut bounds = TfdBounds::assemble(c(a), c(-a), c(0.0), c(0.0));
    bounds.c_sigma = -1.0 + (2.0 * a).cosh() * (l * l + lr * lr) / (2.0 * l * lr);
    bounds.dc_sigma = a.sinh().powi(2) * (l * l + lr * lr) / (l * lr);
    Ok(bounds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricComplexity {
    pub cg_plus: f64,
    pub cg_minus: f64,
    pub cg_total: f64,
    /// `cg_total(α) − cg_total(0)`.
    pub formation: f64,
}

/// `C_G± = ±α + ½ log λ`, summed in absolute value.
pub fn geometric_complexity(lambda: f64, alpha: f64) -> Result<GeometricComplexity> {
    if !(lambda > 0.0 && lambda.is_finite() && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "geometric complexity needs λ > 0 and finite α (got {lambda}, {alpha})"
        )));
    }
    let half_log = 0.5 * lambda.ln();
    let cg_plus = alpha + half_log;
    let cg_minus = -alpha + half_log;
    let cg_total = cg_plus.abs() + cg_minus.abs();
    Ok(GeometricComplexity {
        cg_plus,
        cg_minus,
        cg_total,
        formation: cg_total - 2.0 * half_log.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(lambda: f64, lambda_r: f64, alpha: f64) -> TfdParams {
        TfdParams::new(lambda, lambda_r, alpha).unwrap()
    }

    #[test]
    fn static_covariances() {
        let p = params(2.0, 0.5, 0.3);
        let c = tfd_covariances(&p).unwrap();
        let diag = |v: &BosonCovariance| (v.matrix()[(0, 0)], v.matrix()[(1, 1)]);
        assert_eq!(diag(&c.v_r), (2.0, 0.5));
        assert_eq!(diag(&c.v_0), (0.5, 2.0));
        let (x, y) = diag(&c.plus);
        assert!((x - 0.6f64.exp() / 2.0).abs() < 1e-14 && (y - 2.0 * (-0.6f64).exp()).abs() < 1e-14);
        let (x, y) = diag(&c.minus);
        assert!((x - (-0.6f64).exp() / 2.0).abs() < 1e-14 && (y - 2.0 * 0.6f64.exp()).abs() < 1e-14);
        let z = tfd_covariances(&params(2.0, 0.5, 0.0)).unwrap();
        assert_eq!(z.plus, z.v_0);
        assert_eq!(z.minus, z.v_0);
    }

    #[test]
    fn wavefunction_covariance_rejects_bad_width() {
        assert!(covariance_from_wavefunction(0.0, 1.0).is_err());
        assert!(covariance_from_wavefunction(-1.0, 0.0).is_err());
        let v = covariance_from_wavefunction(1.0, 0.0).unwrap();
        assert_eq!(v, BosonCovariance::vacuum(1, QuadratureOrdering::Qqpp));
    }

    #[test]
    fn symmetric_point_reproduces_two_mode_result() {
        let b = tfd_bounds(&params(1.0, 1.0, 1.0)).unwrap();
        assert!((b.c_plus - 1f64.sinh().powi(2)).abs() < 1e-12);
        assert!((b.c_sigma - 2.0 * 1f64.sinh().powi(2)).abs() < 1e-12);
        assert!((b.dc_plus - 1f64.sinh().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_plug_in_value() {
        let a: f64 = 0.5;
        let b = tfd_bounds(&params(2.0, 1.0, a)).unwrap();
        let expected = -0.25 * (2.0 - ((2.0 * a).exp() + 4.0 * (-2.0 * a).exp()) / 2.0);
        assert!((b.c_plus - expected).abs() < 1e-12);
    }

    #[test]
    fn evolved_matches_explicit_matrix() {
        let p = params(1.7, 0.6, 0.4).at_time(1.3, 0.9);
        let v = tfd_time_evolved(&p).unwrap();
        let (ch, sh) = ((2.0 * p.alpha).cosh(), (2.0 * p.alpha).sinh());
        let wt = p.omega * p.t;
        let m = v.matrix();
        assert!((m[(0, 0)] - (ch + sh * wt.cos()) / p.lambda).abs() < 1e-12);
        assert!((m[(0, 1)] + sh * wt.sin()).abs() < 1e-12);
        assert!((m[(1, 1)] - p.lambda * (ch - sh * wt.cos())).abs() < 1e-12);
    }

    #[test]
    fn evolved_at_zero_is_static() {
        let p = params(1.7, 0.6, 0.4);
        assert!((tfd_time_evolved(&p).unwrap().matrix() - plus_mode(&p).unwrap().matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn geometric_values() {
        let g = geometric_complexity(1.0, 3.0).unwrap();
        assert_eq!(g.cg_total, 6.0);
        assert_eq!(g.formation, 6.0);
        let g = geometric_complexity(4.0, 0.2).unwrap();
        assert!((g.cg_total - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!(geometric_complexity(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn trace_route_matches_formula(
            l in 0.2f64..4.0, lr in 0.2f64..4.0, a in -2.0f64..2.0, w in 0.1f64..3.0, t in 0.0f64..10.0
        ) {
            let p = params(l, lr, a).at_time(w, t);
            let x = tfd_bounds(&p).unwrap();
            let y = tfd_bounds_formula(&p).unwrap();
            let scale = x.c_sigma.abs().max(1.0);
            for (u, v) in [
                (x.c_plus, y.c_plus), (x.c_minus, y.c_minus), (x.c_max, y.c_max),
                (x.c_sigma, y.c_sigma), (x.dc_plus, y.dc_plus), (x.dc_sigma, y.dc_sigma),
            ] {
                prop_assert!((u - v).abs() < 1e-10 * scale, "{} vs {}", u, v);
            }
        }

        #[test]
        fn evolved_determinant_is_one(l in 0.2f64..4.0, a in -2.0f64..2.0, wt in 0.0f64..6.3) {
            let p = params(l, 1.0, a).at_time(1.0, wt);
            let v = tfd_time_evolved(&p).unwrap();
            prop_assert!((v.determinant() - 1.0).abs() < 1e-10 * (2.0 * a).cosh().powi(2));
        }

        #[test]
        fn equal_frequencies_freeze_the_bound(l in 0.2f64..4.0, a in -2.0f64..2.0, wt in 0.0f64..6.3) {
            let p = params(l, l, a);
            let stat = tfd_bounds(&p).unwrap();
            let evolved = tfd_bounds(&p.at_time(1.0, wt)).unwrap();
            prop_assert!((stat.c_plus - evolved.c_plus).abs() < 1e-10 * stat.c_plus.max(1.0));
            prop_assert!((stat.c_sigma - evolved.c_sigma).abs() < 1e-10 * stat.c_sigma.max(1.0));
        }
    }
}
