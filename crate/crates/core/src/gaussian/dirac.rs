use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::family::{DiracKind, DiracModeParams};

/// Smallest Simpson grid accepted by [`dirac_summed`].
pub const MIN_DIRAC_GRID: usize = 16;

/// Pair angle of a mode: `½ atan(|p|/m)` for the ground state,
/// `π/2 − ½ atan(|p|/m)` for the excited pair.
pub fn dirac_theta(params: &DiracModeParams, kind: DiracKind) -> Result<f64> {
    params.validate()?;
    let half = if params.m == 0.0 {
        FRAC_PI_4
    } else {
        0.5 * (params.p_mag / params.m).atan()
    };
    Ok(match kind {
        DiracKind::Ground => half,
        DiracKind::Excited => FRAC_PI_2 - half,
    })
}

/// `sin²θ` per spin, evaluated as `(1 ∓ m/E)/2`.
fn mode_value(p: f64, m: f64, kind: DiracKind) -> f64 {
    let ratio = if m.is_infinite() { 1.0 } else { m / p.hypot(m) };
    match kind {
        DiracKind::Ground => 0.5 * (1.0 - ratio),
        DiracKind::Excited => 0.5 * (1.0 + ratio),
    }
}

pub fn dirac_mode(params: &DiracModeParams, kind: DiracKind) -> Result<f64> {
    params.validate()?;
    Ok(mode_value(params.p_mag, params.m, kind))
}

/// Summed complexity per unit volume up to the cutoff `Λ`,
/// `2 · (1/2π²) ∫₀^Λ p² C(p) dp`, by composite Simpson on `n_grid`
/// intervals (rounded up to even).
pub fn dirac_summed(params: &DiracModeParams, kind: DiracKind, n_grid: usize) -> Result<f64> {
    let cutoff = params.cutoff;
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::InvalidParameter(format!("cutoff must be positive and finite (got {cutoff})")));
    }
    if !(params.m >= 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be non-negative (got {})", params.m)));
    }
    if n_grid < MIN_DIRAC_GRID {
        return Err(Error::InvalidParameter(format!(
            "n_grid must be at least {MIN_DIRAC_GRID} (got {n_grid})"
        )));
    }
    let n = n_grid + n_grid % 2;
    let h = cutoff / n as f64;
    let integrand = |i: usize| {
        if i == 0 {
            return 0.0;
        }
        let p = i as f64 * h;
        p * p * mode_value(p, params.m, kind)
    };
    let mut sum = integrand(0) + integrand(n);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i);
    }
    Ok(2.0 * sum * h / 3.0 / (2.0 * PI * PI))
}
