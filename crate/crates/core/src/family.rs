//! Parameter records for the Gaussian-state families.

use crate::error::{Error, Result};

/// Thermofield-double parameters.
///
/// `alpha` is the entangling parameter (`tanh α = e^{-βω/2}`), `lambda` and
/// `lambda_r` are the dimensionless frequencies of the target oscillator and
/// of the reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfdParams {
    pub lambda: f64,
    pub lambda_r: f64,
    pub alpha: f64,
    pub omega: f64,
    pub t: f64,
}

impl TfdParams {
    pub fn new(lambda: f64, lambda_r: f64, alpha: f64) -> Result<Self> {
        let params = TfdParams {
            lambda,
            lambda_r,
            alpha,
            omega: 1.0,
            t: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn at_time(self, omega: f64, t: f64) -> Self {
        TfdParams { omega, t, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda_r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda and lambda_R must be positive (got {}, {})",
                self.lambda, self.lambda_r
            )));
        }
        if !(self.alpha.is_finite() && self.omega.is_finite() && self.t.is_finite()) {
            return Err(Error::InvalidParameter("TFD parameters must be finite".into()));
        }
        Ok(())
    }

    /// The same state with the entangling parameter negated; this produces
    /// the minus-mode quantities from the plus-mode formulas.
    pub fn mirrored(self) -> Self {
        TfdParams {
            alpha: -self.alpha,
            ..self
        }
    }
}

/// Momentum mode of a free Dirac field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracModeParams {
    pub p_mag: f64,
    pub m: f64,
    pub cutoff: f64,
}

impl DiracModeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_mag >= 0.0 && self.m >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "|p| and m must be non-negative (got {}, {})",
                self.p_mag, self.m
            )));
        }
        if self.p_mag == 0.0 && self.m == 0.0 {
            return Err(Error::UndefinedMode);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiracKind {
    Ground,
    Excited,
}

/// Tagged parameter record for every state family the crate knows about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    /// `H = α(a† + a)` acting on the vacuum.
    Coherent { alpha: f64 },
    /// `H = η(a² + a†²)/2` acting on the vacuum.
    Squeezed { eta: f64 },
    /// `D(iαt) S(ηt)|0⟩`; no single generator, survival amplitude only.
    DisplacedSqueezed { alpha: f64, eta: f64 },
    /// Two-mode squeezing with rate `r` and phase `theta`.
    TwoMode { r: f64, theta: f64 },
    /// Thermofield double, plus (`minus = false`) or minus diagonal mode.
    Tfd { params: TfdParams, minus: bool },
    /// Fermionic two-mode Bogoliubov pair `M(θ, φ)`.
    FermionPair { theta: f64, phi: f64 },
    /// One momentum/spin mode of a Dirac field.
    DiracMode {
        params: DiracModeParams,
        kind: DiracKind,
    },
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::Coherent { .. } => "coherent",
            StateFamily::Squeezed { .. } => "squeezed",
            StateFamily::DisplacedSqueezed { .. } => "displaced_squeezed",
            StateFamily::TwoMode { .. } => "two_mode",
            StateFamily::Tfd { .. } => "tfd",
            StateFamily::FermionPair { .. } => "fermion_pair",
            StateFamily::DiracMode { .. } => "dirac",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match *self {
            StateFamily::Coherent { alpha } => finite(&[alpha]),
            StateFamily::Squeezed { eta } => finite(&[eta]),
            StateFamily::DisplacedSqueezed { alpha, eta } => finite(&[alpha, eta]),
            StateFamily::TwoMode { r, theta } => finite(&[r, theta]),
            StateFamily::Tfd { params, .. } => return params.validate(),
            StateFamily::FermionPair { theta, phi } => finite(&[theta, phi]),
            StateFamily::DiracMode { params, .. } => return params.validate(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} parameters must be finite",
                self.name()
            )))
        }
    }
}
