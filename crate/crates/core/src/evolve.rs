//! Krylov-chain propagation and spread-complexity curves.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::StateFamily;
use crate::gaussian;
use crate::hilbert::{DEFAULT_TAIL_TOL, TAIL_FRACTION};
use crate::lanczos::TridiagonalData;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationMethod {
    /// Eigendecomposition of the chain matrix.
    Spectral,
    /// Fixed-step fourth-order Runge–Kutta; `step_scale` bounds `h·‖T‖`.
    Rk4 { step_scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub tail_tol: f64,
    pub method: PropagationMethod,
    /// Fail on the first grid point whose tail mass exceeds `tail_tol`
    /// instead of marking it rejected.
    pub strict: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            tail_tol: DEFAULT_TAIL_TOL,
            method: PropagationMethod::Spectral,
            strict: true,
        }
    }
}

/// Amplitudes `ψₙ(tⱼ)` on a chain, one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub t_grid: Vec<f64>,
    pub psi: Vec<Vec<Complex64>>,
    /// Occupation of the last 5% of chain sites.
    pub tail_mass: Vec<f64>,
    pub accepted: Vec<bool>,
    pub tail_tol: f64,
}

impl AmplitudeSeries {
    pub fn chain_len(&self) -> usize {
        self.psi.first().map_or(0, Vec::len)
    }

    pub fn probabilities(&self, j: usize) -> Vec<f64> {
        self.psi[j].iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn first_rejected(&self) -> Option<f64> {
        self.accepted
            .iter()
            .position(|ok| !ok)
            .map(|j| self.t_grid[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialCurve {
    pub r: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityCurve {
    pub t_grid: Vec<f64>,
    pub c: Vec<f64>,
    pub partial: Option<PartialCurve>,
    pub bound: Option<Vec<f64>>,
    pub accepted: Vec<bool>,
    pub tail_mass: Vec<f64>,
}

impl ComplexityCurve {
    pub fn with_partial(mut self, r: usize, values: Vec<f64>) -> Result<Self> {
        self.check_len(values.len())?;
        self.partial = Some(PartialCurve { r, values });
        Ok(self)
    }

    pub fn with_bound(mut self, bound: Vec<f64>) -> Result<Self> {
        self.check_len(bound.len())?;
        self.bound = Some(bound);
        Ok(self)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.t_grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.t_grid.len(),
                got,
            });
        }
        Ok(())
    }

    /// Largest violation of `0 ≤ Cʳ ≤ C ≤ C_F` over accepted points, with
    /// `slack` allowed on the upper bound. Zero means the chain holds.
    pub fn bound_chain_violation(&self, slack: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for j in (0..self.t_grid.len()).filter(|&j| self.accepted[j]) {
            let c = self.c[j];
            worst = worst.max(-c);
            if let Some(p) = &self.partial {
                worst = worst.max(-p.values[j]).max(p.values[j] - c);
            }
            if let Some(b) = &self.bound {
                worst = worst.max(c - b[j] - slack);
            }
        }
        worst
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Evenly spaced grid of `steps` points on `[start, end]`.
pub fn linspace(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|j| start + (end - start) * j as f64 / (steps - 1) as f64)
            .collect(),
    }
}

fn chain_matrix(tri: &TridiagonalData, chain_len: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(chain_len, chain_len);
    for n in 0..chain_len {
        t[(n, n)] = tri.a[n];
        if n > 0 {
            t[(n, n - 1)] = tri.b[n];
            t[(n - 1, n)] = tri.b[n];
        }
    }
    t
}

/// Spectral data of a chain: `ψₙ(t) = Σ_k U[n,k] U[0,k] e^{−iλ_k t}`.
pub struct ChainPropagator {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl ChainPropagator {
    pub fn new(tri: &TridiagonalData, chain_len: usize) -> Result<Self> {
        check_chain_len(tri, chain_len)?;
        let eig = SymmetricEigen::new(chain_matrix(tri, chain_len));
        Ok(ChainPropagator {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn amplitudes(&self, t: f64) -> Vec<Complex64> {
        let weights: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lambda)| Complex64::from_polar(self.vectors[(0, k)], -lambda * t))
            .collect();
        (0..self.vectors.nrows())
            .map(|n| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * self.vectors[(n, k)])
                    .sum()
            })
            .collect()
    }
}

fn check_chain_len(tri: &TridiagonalData, chain_len: usize) -> Result<()> {
    if chain_len == 0 || chain_len > tri.len() {
        return Err(Error::InvalidParameter(format!(
            "chain length {chain_len} outside 1..={}",
            tri.len()
        )));
    }
    Ok(())
}

fn rk4_series(tri: &TridiagonalData, t_grid: &[f64], chain_len: usize, step_scale: f64) -> Vec<Vec<Complex64>> {
    let apply = |psi: &[Complex64]| -> Vec<Complex64> {
        (0..chain_len)
            .map(|n| {
                let mut acc = psi[n] * tri.a[n];
                if n > 0 {
                    acc += psi[n - 1] * tri.b[n];
                }
                if n + 1 < chain_len {
                    acc += psi[n + 1] * tri.b[n + 1];
                }
                acc * Complex64::new(0.0, -1.0)
            })
            .collect()
    };
    let norm = (0..chain_len)
        .map(|n| tri.a[n].abs() + tri.b[n] + if n + 1 < chain_len { tri.b[n + 1] } else { 0.0 })
        .fold(0.0, f64::max)
        .max(1e-300);
    let h_max = step_scale / norm;
    let mut psi = vec![ZERO; chain_len];
    psi[0] = Complex64::new(1.0, 0.0);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - now;
        let steps = (span.abs() / h_max).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            let k1 = apply(&psi);
            let shifted = |k: &[Complex64], c: f64| -> Vec<Complex64> {
                psi.iter().zip(k).map(|(p, k)| p + k * (c * h)).collect()
            };
            let k2 = apply(&shifted(&k1, 0.5));
            let k3 = apply(&shifted(&k2, 0.5));
            let k4 = apply(&shifted(&k3, 1.0));
            for n in 0..chain_len {
                psi[n] += (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]) * (h / 6.0);
            }
        }
        now = target;
        out.push(psi.clone());
    }
    out
}

/// `ψₙ(t) = (e^{−iTt})_{n0}` on the leading `chain_len` sites, failing on the
/// first grid point whose tail mass exceeds the default tolerance.
pub fn propagate(tri: &TridiagonalData, t_grid: &[f64], chain_len: usize) -> Result<AmplitudeSeries> {
    propagate_with(tri, t_grid, chain_len, PropagateOptions::default())
}

pub fn propagate_with(
    tri: &TridiagonalData,
    t_grid: &[f64],
    chain_len: usize,
    options: PropagateOptions,
) -> Result<AmplitudeSeries> {
    validate_grid(t_grid)?;
    check_chain_len(tri, chain_len)?;
    let psi: Vec<Vec<Complex64>> = match options.method {
        PropagationMethod::Spectral => {
            let prop = ChainPropagator::new(tri, chain_len)?;
            t_grid.par_iter().map(|&t| prop.amplitudes(t)).collect()
        }
        PropagationMethod::Rk4 { step_scale } => {
            if !(step_scale > 0.0) {
                return Err(Error::InvalidParameter("RK4 step scale must be positive".into()));
            }
            rk4_series(tri, t_grid, chain_len, step_scale)
        }
    };
    // An exhausted Krylov space has no truncation to monitor.
    let closed = tri.terminated && chain_len == tri.len();
    let width = ((TAIL_FRACTION * chain_len as f64).ceil() as usize).clamp(1, chain_len);
    let tail_mass: Vec<f64> = psi
        .iter()
        .map(|row| row[chain_len - width..].iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let accepted: Vec<bool> = tail_mass
        .iter()
        .map(|&tail| closed || tail <= options.tail_tol)
        .collect();
    if options.strict {
        if let Some(j) = accepted.iter().position(|ok| !ok) {
            return Err(Error::TruncationInsufficient {
                t: t_grid[j],
                tail: tail_mass[j],
                threshold: options.tail_tol,
            });
        }
    }
    Ok(AmplitudeSeries {
        t_grid: t_grid.to_vec(),
        psi,
        tail_mass,
        accepted,
        tail_tol: options.tail_tol,
    })
}

fn weighted_sum(row: &[Complex64], upto: usize) -> f64 {
    let mut terms: Vec<f64> = row[..=upto]
        .iter()
        .enumerate()
        .map(|(n, z)| n as f64 * z.norm_sqr())
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// `C(t) = Σₙ n|ψₙ(t)|²`, smallest terms first.
pub fn spread_complexity(amps: &AmplitudeSeries) -> ComplexityCurve {
    let last = amps.chain_len().saturating_sub(1);
    ComplexityCurve {
        t_grid: amps.t_grid.clone(),
        c: amps.psi.iter().map(|row| weighted_sum(row, last)).collect(),
        partial: None,
        bound: None,
        accepted: amps.accepted.clone(),
        tail_mass: amps.tail_mass.clone(),
    }
}

/// `Cʳ(t) = Σ_{n≤r} n|ψₙ(t)|²`.
pub fn partial_complexity(amps: &AmplitudeSeries, r: usize) -> Result<Vec<f64>> {
    if r >= amps.chain_len() {
        return Err(Error::IndexOutOfRange {
            index: r,
            len: amps.chain_len(),
        });
    }
    Ok(amps.psi.iter().map(|row| weighted_sum(row, r)).collect())
}

/// `|ψ₀|²`, `|ψ₁|²` and the small-`η` form of `|ψ₂|²` for the displaced
/// squeezed family.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovProbabilities {
    pub psi0_sq: Vec<f64>,
    pub psi1_sq: Vec<f64>,
    pub psi2_sq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub curve: ComplexityCurve,
    pub probabilities: Option<KrylovProbabilities>,
    /// The curve uses an approximate amplitude (small-`η` `|ψ₂|²`).
    pub approximate: bool,
}

pub fn displaced_squeezed_probabilities(alpha: f64, eta: f64, t: f64) -> (f64, f64, f64) {
    let a2 = alpha * alpha;
    let (c, s, th) = ((eta * t).cosh(), (eta * t).sinh(), (eta * t).tanh());
    let gauss = (a2 * t * t * (th - 1.0)).exp();
    let p0 = gauss / c;
    let inner = a2 * t * (eta * t / c + 2.0 * s - 2.0 * c) - eta * s;
    let p1 = inner * inner * gauss / ((4.0 * a2 + 2.0 * eta * eta) * c.powi(3));
    let u = 3.0 * eta * t - 2.0;
    let poly = a2 * t * u * u - 6.0 * eta * u + 12.0 * eta;
    let p2 = a2 * t * t * poly * poly * (a2 * t * t * (eta * t - 1.0)).exp()
        / (16.0 * (2.0 * a2 + 9.0 * eta * eta));
    (p0, p1, p2)
}

/// Reference curves: `α²t²`, `½sinh²(ηt)` (each chain step adds two
/// quanta, so half the Fock bound `sinh²(ηt)`), `sinh²(rt)`; for the
/// displaced squeezed family the three-level partial sum `|ψ₁|² + 2|ψ₂|²`
/// against `α²t² + sinh²(ηt)`.
pub fn closed_form(family: &StateFamily, t_grid: &[f64]) -> Result<ClosedForm> {
    validate_grid(t_grid)?;
    family.validate()?;
    let n = t_grid.len();
    let bound = t_grid
        .iter()
        .map(|&t| gaussian::family_fock_bound(family, t))
        .collect::<Result<Vec<_>>>()?;
    let base = |c: Vec<f64>| ComplexityCurve {
        t_grid: t_grid.to_vec(),
        c,
        partial: None,
        bound: None,
        accepted: vec![true; n],
        tail_mass: vec![0.0; n],
    };
    match *family {
        StateFamily::Coherent { alpha } => Ok(ClosedForm {
            curve: base(t_grid.iter().map(|t| alpha * alpha * t * t).collect()).with_bound(bound)?,
            probabilities: None,
            approximate: false,
        }),
        StateFamily::Squeezed { eta } => Ok(ClosedForm {
            curve: base(t_grid.iter().map(|t| 0.5 * (eta * t).sinh().powi(2)).collect())
                .with_bound(bound)?,
            probabilities: None,
            approximate: false,
        }),
        StateFamily::TwoMode { r, .. } => Ok(ClosedForm {
            curve: base(t_grid.iter().map(|t| (r * t).sinh().powi(2)).collect()).with_bound(bound)?,
            probabilities: None,
            approximate: false,
        }),
        StateFamily::DisplacedSqueezed { alpha, eta } => {
            let (mut p0, mut p1, mut p2) = (Vec::new(), Vec::new(), Vec::new());
            for &t in t_grid {
                let (a, b, c) = displaced_squeezed_probabilities(alpha, eta, t);
                p0.push(a);
                p1.push(b);
                p2.push(c);
            }
            let ck3: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a + 2.0 * b).collect();
            Ok(ClosedForm {
                curve: base(ck3.clone()).with_partial(2, ck3)?.with_bound(bound)?,
                probabilities: Some(KrylovProbabilities {
                    psi0_sq: p0,
                    psi1_sq: p1,
                    psi2_sq: p2,
                }),
                approximate: true,
            })
        }
        _ => Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "closed_form",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn coherent_poisson_amplitudes() {
        let tri = TridiagonalData::analytic(&StateFamily::Coherent { alpha: 1.0 }, 80).unwrap();
        let grid = linspace(0.0, 2.0, 21);
        let amps = propagate(&tri, &grid, 80).unwrap();
        for (j, &t) in grid.iter().enumerate() {
            let p = amps.probabilities(j);
            for n in 0..=10 {
                let expected = (-t * t).exp() * t.powi(2 * n as i32) / factorial(n);
                assert!((p[n] - expected).abs() < 1e-8, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn two_mode_geometric_distribution() {
        let tri = TridiagonalData::analytic(&StateFamily::TwoMode { r: 1.0, theta: 0.0 }, 200).unwrap();
        let grid = linspace(0.1, 1.5, 8);
        let amps = propagate(&tri, &grid, 200).unwrap();
        for (j, &t) in grid.iter().enumerate() {
            let p = amps.probabilities(j);
            for n in 0..8 {
                let expected = t.tanh().powi(2 * n as i32) / t.cosh().powi(2);
                assert!((p[n] - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_time_is_the_initial_site() {
        let tri = TridiagonalData::analytic(&StateFamily::Squeezed { eta: 1.0 }, 10).unwrap();
        let amps = propagate(&tri, &[0.0], 10).unwrap();
        assert!((amps.psi[0][0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(amps.psi[0][1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn closed_forms_reproduced() {
        let grid = linspace(0.1, 2.0, 40);
        for family in [
            StateFamily::Coherent { alpha: 1.0 },
            StateFamily::Squeezed { eta: 1.0 },
            StateFamily::TwoMode { r: 1.0, theta: 0.0 },
        ] {
            let tri = TridiagonalData::analytic(&family, 400).unwrap();
            let curve = spread_complexity(&propagate(&tri, &grid, 400).unwrap());
            let reference = closed_form(&family, &grid).unwrap().curve;
            for j in 0..grid.len() {
                assert!(rel(curve.c[j], reference.c[j]) < 1e-6, "{} t={}", family.name(), grid[j]);
            }
        }
    }

    #[test]
    fn short_chain_fails_on_first_bad_time() {
        let tri = TridiagonalData::analytic(&StateFamily::Coherent { alpha: 1.0 }, 10).unwrap();
        let grid = linspace(0.0, 3.0, 31);
        let err = propagate(&tri, &grid, 10).unwrap_err();
        let Error::TruncationInsufficient { t, .. } = err else { panic!("{err:?}") };
        let lenient = propagate_with(&tri, &grid, 10, PropagateOptions { strict: false, ..Default::default() }).unwrap();
        assert_eq!(lenient.first_rejected(), Some(t));
        assert!(t > 0.0 && t < 3.0);
    }

    #[test]
    fn chain_length_validated() {
        let tri = TridiagonalData::analytic(&StateFamily::Coherent { alpha: 1.0 }, 5).unwrap();
        assert!(propagate(&tri, &[0.1], 6).is_err());
        assert!(propagate(&tri, &[0.2, 0.1], 5).is_err());
    }

    #[test]
    fn partial_sums() {
        let tri = TridiagonalData::analytic(&StateFamily::Squeezed { eta: 1.0 }, 120).unwrap();
        let grid = linspace(0.0, 1.5, 16);
        let amps = propagate(&tri, &grid, 120).unwrap();
        let full = spread_complexity(&amps);
        assert_eq!(partial_complexity(&amps, 119).unwrap(), full.c);
        assert!(partial_complexity(&amps, 0).unwrap().iter().all(|&c| c == 0.0));
        let mut prev = vec![0.0; grid.len()];
        for r in 1..20 {
            let cur = partial_complexity(&amps, r).unwrap();
            assert!(cur.iter().zip(&prev).all(|(c, p)| c >= p));
            prev = cur;
        }
        assert!(partial_complexity(&amps, 120).is_err());
    }

    #[test]
    fn rk4_agrees_with_spectral() {
        let tri = TridiagonalData::analytic(&StateFamily::Squeezed { eta: 0.8 }, 60).unwrap();
        let grid = linspace(0.0, 1.2, 7);
        let spectral = propagate(&tri, &grid, 60).unwrap();
        let opts = PropagateOptions { method: PropagationMethod::Rk4 { step_scale: 0.02 }, ..Default::default() };
        let rk4 = propagate_with(&tri, &grid, 60, opts).unwrap();
        for (a, b) in spectral.psi.iter().flatten().zip(rk4.psi.iter().flatten()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn nalgebra_spectrum_matches_known_chain() {
        // Two-site chain [[0,b],[b,0]] has eigenvalues ±b.
        let tri = TridiagonalData::new(vec![0.0, 0.0], vec![0.0, 2.0], true, None).unwrap();
        let prop = ChainPropagator::new(&tri, 2).unwrap();
        let mut ev = prop.eigenvalues().to_vec();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 2.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
        // closed two-level system: |ψ₁|² = sin²(bt), always accepted
        let amps = propagate(&tri, &[0.3, 1.0], 2).unwrap();
        assert!((amps.probabilities(1)[1] - 2f64.sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn displaced_squeezed_limits() {
        let grid = linspace(0.01, 1.0, 10);
        for &t in &grid {
            // η → 0: |ψ₁|² → α²t² e^{−α²t²}, |ψ₂|² → (α²t²)² e^{−α²t²}/2
            let (p0, p1, p2) = displaced_squeezed_probabilities(1.3, 0.0, t);
            let x = 1.69 * t * t;
            assert!((p0 - (-x).exp()).abs() < 1e-14);
            assert!((p1 - x * (-x).exp()).abs() < 1e-14);
            assert!((p2 - x * x * (-x).exp() / 2.0).abs() < 1e-13);
            // α → 0: |ψ₁|² → sinh²/(2cosh³)
            let (_, q1, q2) = displaced_squeezed_probabilities(0.0, 0.7, t);
            let (c, s) = ((0.7 * t).cosh(), (0.7 * t).sinh());
            assert!((q1 - s * s / (2.0 * c.powi(3))).abs() < 1e-14);
            assert_eq!(q2, 0.0);
        }
    }

    #[test]
    fn closed_form_bounds() {
        let curve = closed_form(&StateFamily::Coherent { alpha: 100.0 }, &[0.01]).unwrap().curve;
        assert!((curve.c[0] - 1.0).abs() < 1e-12);
        let curve = closed_form(&StateFamily::Squeezed { eta: 3.0 }, &[1.0]).unwrap().curve;
        assert!(rel(curve.c[0], 0.5 * 100.357818061227947) < 1e-8);
        assert!(rel(curve.bound.as_ref().unwrap()[0], 100.357818061227947) < 1e-8);
        assert_eq!(curve.bound_chain_violation(1e-9), 0.0);
        assert!(closed_form(&StateFamily::FermionPair { theta: 0.2, phi: 0.0 }, &[1.0]).is_err());
    }
}
