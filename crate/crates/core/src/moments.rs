//! Survival-amplitude route: jets of `S(t)`, moments `μₙ = dⁿS/dtⁿ|₀`, and
//! the transforms between moments and Lanczos coefficients.
//!
//! Moments follow `S(t) = ⟨ψ₀|e^{iHt}|ψ₀⟩`, so `μₙ = ⟨(iH)ⁿ⟩` and the real
//! moments of the spectral measure are `mₖ = (−i)ᵏ μₖ`.

use crate::error::{Error, Result};
use crate::family::StateFamily;
use crate::jet::TaylorJet;
use crate::lanczos::TridiagonalData;
use crate::scalar::{CScalar, Rational, Scalar};

/// Default jet order (twelve Lanczos levels).
pub const DEFAULT_ORDER: usize = 24;

/// Sign convention attached to a [`MomentSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentConvention {
    /// `S(t) = ⟨ψ(t)|ψ(0)⟩ = ⟨ψ₀|e^{iHt}|ψ₀⟩`, `μₙ = ⟨(iH)ⁿ⟩`.
    SurvivalOverlap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence<S> {
    pub mu: Vec<CScalar<S>>,
    pub convention: MomentConvention,
    /// Number of weighted paths contributing to each moment, when the
    /// sequence was produced from Lanczos coefficients.
    pub path_counts: Option<Vec<u128>>,
}

impl<S: Scalar> MomentSequence<S> {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.mu.first().is_some_and(|m| {
            m.is_real() && m.re.sub(&m.re.one_like()).is_zero()
        })
    }

    /// Real moments `mₖ = (−i)ᵏ μₖ`, rejecting any with an imaginary part.
    pub fn real_moments(&self) -> Result<Vec<S>> {
        self.mu
            .iter()
            .enumerate()
            .map(|(k, mu)| {
                let m = mu.mul_i_pow(3 * k);
                if m.is_real() {
                    Ok(m.re)
                } else {
                    Err(Error::ComplexDiagonal { level: k / 2 })
                }
            })
            .collect()
    }
}

/// Jet of the survival amplitude through `order`.
///
/// The thermofield double is expanded in `α` rather than `t`; the plus mode
/// uses `e^{−2α}`, the minus mode `e^{+2α}`.
pub fn survival_jet<S: Scalar>(family: &StateFamily, order: usize, like: &S) -> Result<TaylorJet<S>> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!("jet order must be at least 2 (got {order})")));
    }
    family.validate()?;
    let num = |v: f64| like.from_f64_like(v);
    let t = TaylorJet::variable(like.one_like(), order);
    let half = like.one_like().div_i64(2)?;
    match *family {
        StateFamily::Coherent { alpha } => {
            let a = num(alpha)?;
            TaylorJet::monomial(a.mul(&a).mul(&half).neg(), 2, order).exp()
        }
        StateFamily::Squeezed { eta } => {
            let eta_t = t.scale(&num(eta)?);
            eta_t.cosh()?.sqrt()?.reciprocal()
        }
        StateFamily::DisplacedSqueezed { alpha, eta } => {
            let a = num(alpha)?;
            let half_a2 = a.mul(&a).mul(&half);
            let eta_t = t.scale(&num(eta)?);
            let (c, s) = eta_t.cosh_sinh()?;
            let tanh = s.div(&c)?;
            let t2 = TaylorJet::monomial(like.one_like(), 2, order);
            let exponent = t2.mul(&tanh).sub(&t2).scale(&half_a2);
            Ok(c.sqrt()?.reciprocal()?.mul(&exponent.exp()?))
        }
        StateFamily::TwoMode { r, .. } => t.scale(&num(r)?).cosh()?.reciprocal(),
        StateFamily::Tfd { params, minus } => {
            let rho = num(params.lambda)?.div(&num(params.lambda_r)?)?;
            let sign = if minus { 1 } else { -1 };
            let one = like.one_like();
            let one_plus_rho = one.add(&rho);
            let prefactor = one
                .mul_i64(2)
                .mul(&rho.sqrt()?)
                .div(&one_plus_rho)?
                .sqrt()?;
            let growth = t.scale(&one.mul_i64(2 * sign)).exp()?;
            let ratio = growth
                .scale(&rho)
                .add_constant(&one)
                .scale(&one.div(&one_plus_rho)?);
            let decay = t.scale(&half.mul_i64(sign)).exp()?;
            Ok(decay.mul(&ratio.sqrt()?.reciprocal()?).scale(&prefactor))
        }
        _ => Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "survival_jet",
        }),
    }
}

/// `μₙ = n!·c[n]`.
pub fn moments_from_jet<S: Scalar>(jet: &TaylorJet<S>) -> MomentSequence<S> {
    let mut factorial = jet.coeffs()[0].one_like();
    let mu = jet
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            if n > 0 {
                factorial = factorial.mul_i64(n as i64);
            }
            CScalar::real(c.mul(&factorial))
        })
        .collect();
    MomentSequence {
        mu,
        convention: MomentConvention::SurvivalOverlap,
        path_counts: None,
    }
}

/// Jacobi coefficients recovered from moments, with `b_squared[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentLanczos<S> {
    pub a: Vec<S>,
    pub b_squared: Vec<S>,
}

impl<S: Scalar> MomentLanczos<S> {
    /// Floating-point chain of `a.len()` sites; the last recovered `b` becomes
    /// the tail coupling.
    pub fn to_tridiagonal(&self) -> Result<TridiagonalData> {
        let len = self.a.len();
        let b: Vec<f64> = self.b_squared.iter().map(|b2| b2.to_f64().sqrt()).collect();
        TridiagonalData::new(
            self.a.iter().map(Scalar::to_f64).collect(),
            b[..len].to_vec(),
            false,
            b.get(len).copied(),
        )
    }

    pub fn b(&self) -> Vec<f64> {
        self.b_squared.iter().map(|b2| b2.to_f64().sqrt()).collect()
    }
}

/// Chebyshev's algorithm on the real moments `mₖ = (−i)ᵏμₖ`.
///
/// Returns `count` diagonal coefficients `a₀…a_{count−1}` and
/// `b²₀…b²_count`, where `b²_k` is the ratio of successive Hankel minors.
/// Needs `2·count + 1` moments.
pub fn lanczos_from_moments<S: Scalar>(mu: &MomentSequence<S>, count: usize) -> Result<MomentLanczos<S>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if mu.len() < 2 * count + 1 {
        return Err(Error::InvalidParameter(format!(
            "{count} levels need {} moments, got {}",
            2 * count + 1,
            mu.len()
        )));
    }
    let m = mu.real_moments()?;
    let m = &m[..=2 * count];
    let width = 2 * count + 1;
    let zero = m[0].zero_like();
    if !m[0].is_positive() {
        return Err(Error::MomentInconsistency {
            level: 0,
            value: m[0].to_f64(),
        });
    }

    // σ_{k,l} for l = k..=2count−k, stored with absolute index l.
    let mut prev2 = vec![zero.clone(); width];
    let mut prev = m.to_vec();
    let mut a = vec![m[1].div(&m[0])?];
    let mut b_squared = vec![zero.clone()];
    let mut beta_prev = m[0].clone();

    let check = |level: usize, x: &S| -> Result<()> {
        if x.lossy() {
            return Err(Error::PrecisionLoss { level });
        }
        Ok(())
    };
    check(0, &a[0])?;

    for k in 1..=count {
        let mut cur = vec![zero.clone(); width];
        let alpha = &a[k - 1];
        for l in k..=(2 * count - k) {
            cur[l] = prev[l + 1]
                .sub(&alpha.mul(&prev[l]))
                .sub(&beta_prev.mul(&prev2[l]));
        }
        let beta = cur[k].div(&prev[k - 1])?;
        check(k, &beta)?;
        if !beta.is_positive() {
            return Err(Error::MomentInconsistency {
                level: k,
                value: beta.to_f64(),
            });
        }
        b_squared.push(beta.clone());
        if k < count {
            let ak = cur[k + 1].div(&cur[k])?.sub(&prev[k].div(&prev[k - 1])?);
            check(k, &ak)?;
            a.push(ak);
        }
        beta_prev = beta;
        prev2 = prev;
        prev = cur;
    }
    Ok(MomentLanczos { a, b_squared })
}

/// Moments of a chain given exactly: `μₙ = iⁿ (Tⁿ)₀₀`.
///
/// Uses the similar non-symmetric matrix with `b²` above the diagonal and
/// ones below, so rational inputs stay rational. Also counts the paths of
/// nonzero weight from site 0 back to site 0.
pub fn moments_from_jacobi<S: Scalar>(a: &[S], b_squared: &[S], n_max: usize) -> Result<MomentSequence<S>> {
    let len = a.len();
    if len == 0 {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    if b_squared.len() < len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: b_squared.len(),
        });
    }
    let zero = a[0].zero_like();
    let mut w = vec![zero.clone(); len];
    w[0] = a[0].one_like();
    let mut paths = vec![0u128; len];
    paths[0] = 1;
    let mut mu = vec![CScalar::real(w[0].clone())];
    let mut counts = vec![1u128];
    for n in 1..=n_max {
        let mut next = vec![zero.clone(); len];
        let mut next_paths = vec![0u128; len];
        for k in 0..len {
            let mut acc = a[k].mul(&w[k]);
            let mut p = if a[k].is_zero() { 0 } else { paths[k] };
            if k + 1 < len {
                acc = acc.add(&b_squared[k + 1].mul(&w[k + 1]));
                if !b_squared[k + 1].is_zero() {
                    p = p.saturating_add(paths[k + 1]);
                }
            }
            if k > 0 {
                acc = acc.add(&w[k - 1]);
                if !b_squared[k].is_zero() {
                    p = p.saturating_add(paths[k - 1]);
                }
            }
            next[k] = acc;
            next_paths[k] = p;
        }
        w = next;
        paths = next_paths;
        mu.push(CScalar::real(w[0].clone()).mul_i_pow(n));
        counts.push(paths[0]);
    }
    Ok(MomentSequence {
        mu,
        convention: MomentConvention::SurvivalOverlap,
        path_counts: Some(counts),
    })
}

/// Moments of a floating-point chain, evaluated exactly on the binary values
/// of its coefficients.
pub fn moments_from_lanczos(tri: &TridiagonalData, n_max: usize) -> Result<MomentSequence<Rational>> {
    if tri.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    let a = tri
        .a
        .iter()
        .map(|&x| Rational::from_f64(x))
        .collect::<Result<Vec<_>>>()?;
    let b_squared = tri
        .b
        .iter()
        .map(|&x| Rational::from_f64(x).map(|b| b.mul(&b)))
        .collect::<Result<Vec<_>>>()?;
    moments_from_jacobi(&a, &b_squared, n_max)
}
