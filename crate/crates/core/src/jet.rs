//! Truncated power series ("jets") over a [`Scalar`] field.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `c[0] + c[1]·t + … + c[M]·t^M`, exact through order `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorJet<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TaylorJet<S> {
    pub fn new(coeffs: Vec<S>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("a jet needs at least one coefficient".into()));
        }
        Ok(TaylorJet { coeffs })
    }

    pub fn constant(c: S, order: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); order + 1];
        coeffs[0] = c;
        TaylorJet { coeffs }
    }

    /// The independent variable scaled by `scale`: `scale·t`.
    pub fn variable(scale: S, order: usize) -> Self {
        let mut coeffs = vec![scale.zero_like(); order + 1];
        if order >= 1 {
            coeffs[1] = scale;
        }
        TaylorJet { coeffs }
    }

    /// `c·t^power`, dropped entirely if `power > order`.
    pub fn monomial(c: S, power: usize, order: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); order + 1];
        if power <= order {
            coeffs[power] = c;
        }
        TaylorJet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&S> {
        self.coeffs.get(k)
    }

    fn zero(&self) -> S {
        self.coeffs[0].zero_like()
    }

    fn shared_order(&self, rhs: &Self) -> usize {
        self.order().min(rhs.order())
    }

    pub fn truncate(&self, order: usize) -> Self {
        TaylorJet {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let m = self.shared_order(rhs);
        TaylorJet {
            coeffs: (0..=m).map(|k| self.coeffs[k].add(&rhs.coeffs[k])).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let m = self.shared_order(rhs);
        TaylorJet {
            coeffs: (0..=m).map(|k| self.coeffs[k].sub(&rhs.coeffs[k])).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        TaylorJet {
            coeffs: self.coeffs.iter().map(Scalar::neg).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        TaylorJet {
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
        }
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].add(c);
        out
    }

    /// Cauchy product.
    pub fn mul(&self, rhs: &Self) -> Self {
        let m = self.shared_order(rhs);
        let coeffs = (0..=m)
            .map(|k| {
                (0..=k).fold(self.zero(), |acc, j| {
                    acc.add(&self.coeffs[j].mul(&rhs.coeffs[k - j]))
                })
            })
            .collect();
        TaylorJet { coeffs }
    }

    /// `g = 1/f`: `g₀ = 1/f₀`, `g_k = −(1/f₀)·Σ_{j=1..k} f_j g_{k−j}`.
    pub fn reciprocal(&self) -> Result<Self> {
        let f0 = &self.coeffs[0];
        if f0.is_zero() {
            return Err(Error::DivisionByZero("reciprocal of a jet with zero constant term"));
        }
        let mut g = vec![f0.one_like().div(f0)?];
        for k in 1..=self.order() {
            let s = (1..=k).fold(self.zero(), |acc, j| acc.add(&self.coeffs[j].mul(&g[k - j])));
            g.push(s.neg().div(f0)?);
        }
        Ok(TaylorJet { coeffs: g })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.reciprocal()?))
    }

    /// `g = √f`: `g_k = (f_k − Σ_{j=1..k−1} g_j g_{k−j}) / (2g₀)`.
    pub fn sqrt(&self) -> Result<Self> {
        let f0 = &self.coeffs[0];
        if f0.is_zero() {
            return Err(Error::DivisionByZero("square root of a jet with zero constant term"));
        }
        if !f0.is_positive() {
            return Err(Error::InvalidParameter(
                "square root of a jet with negative constant term".into(),
            ));
        }
        let g0 = f0.sqrt()?;
        let two_g0 = g0.mul_i64(2);
        let mut g = vec![g0];
        for k in 1..=self.order() {
            let s = (1..k).fold(self.zero(), |acc, j| acc.add(&g[j].mul(&g[k - j])));
            g.push(self.coeffs[k].sub(&s).div(&two_g0)?);
        }
        Ok(TaylorJet { coeffs: g })
    }

    fn require_zero_constant(&self, op: &str) -> Result<()> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Inexact(format!(
                "{op} of a jet needs a zero constant term"
            )));
        }
        Ok(())
    }

    /// `g = e^f` with `f₀ = 0`, from `g′ = f′g`: `k g_k = Σ_{j=1..k} j f_j g_{k−j}`.
    pub fn exp(&self) -> Result<Self> {
        self.require_zero_constant("exp")?;
        let mut g = vec![self.coeffs[0].one_like()];
        for k in 1..=self.order() {
            let s = (1..=k).fold(self.zero(), |acc, j| {
                acc.add(&self.coeffs[j].mul_i64(j as i64).mul(&g[k - j]))
            });
            g.push(s.div_i64(k as i64)?);
        }
        Ok(TaylorJet { coeffs: g })
    }

    /// `(cosh f, sinh f)` with `f₀ = 0`, from `c′ = f′s`, `s′ = f′c`.
    pub fn cosh_sinh(&self) -> Result<(Self, Self)> {
        self.require_zero_constant("cosh/sinh")?;
        let mut c = vec![self.coeffs[0].one_like()];
        let mut s = vec![self.zero()];
        for k in 1..=self.order() {
            let (mut ck, mut sk) = (self.zero(), self.zero());
            for j in 1..=k {
                let w = self.coeffs[j].mul_i64(j as i64);
                ck = ck.add(&w.mul(&s[k - j]));
                sk = sk.add(&w.mul(&c[k - j]));
            }
            c.push(ck.div_i64(k as i64)?);
            s.push(sk.div_i64(k as i64)?);
        }
        Ok((TaylorJet { coeffs: c }, TaylorJet { coeffs: s }))
    }

    pub fn cosh(&self) -> Result<Self> {
        Ok(self.cosh_sinh()?.0)
    }

    pub fn sinh(&self) -> Result<Self> {
        Ok(self.cosh_sinh()?.1)
    }

    pub fn tanh(&self) -> Result<Self> {
        let (c, s) = self.cosh_sinh()?;
        s.div(&c)
    }

    /// `p(f) = Σ_k poly[k]·f^k`, by Horner's rule.
    pub fn compose_with_polynomial(&self, poly: &[S]) -> Self {
        let order = self.order();
        let mut acc = TaylorJet::constant(self.zero(), order);
        for p in poly.iter().rev() {
            acc = acc.mul(self).add_constant(p);
        }
        acc
    }
}
