//! Lanczos tridiagonalization of `(H, ψ₀)` with full reorthogonalization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::StateFamily;
use crate::hilbert::{FockSpace, OperatorMatrix, StateVector};


/// Relative breakdown tolerance, multiplied by `‖H‖`.
pub const DEFAULT_BREAKDOWN_REL: f64 = 1e-12;

/// Lanczos coefficients of a chain of `len()` Krylov vectors.
///
/// `b[0]` is always zero; `b[n]` couples `K_{n−1}` and `K_n`. When the chain
/// was cut short rather than exhausted, `b_tail` holds the coupling to the
/// first vector that was not retained.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalData {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub terminated: bool,
    pub b_tail: Option<f64>,
}

impl TridiagonalData {
    pub fn new(a: Vec<f64>, b: Vec<f64>, terminated: bool, b_tail: Option<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len().max(1),
                got: b.len(),
            });
        }
        if b[0] != 0.0 {
            return Err(Error::InvalidParameter("b[0] must be zero".into()));
        }
        if let Some(n) = (1..b.len()).find(|&n| !(b[n] > 0.0 && b[n].is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "b[{n}] = {} must be positive and finite",
                b[n]
            )));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("a coefficients must be finite".into()));
        }
        Ok(TridiagonalData {
            a,
            b,
            terminated,
            b_tail,
        })
    }

    /// Chain of `len` sites with coefficients given by closures of the level.
    pub fn from_fn(len: usize, a: impl Fn(usize) -> f64, b: impl Fn(usize) -> f64) -> Result<Self> {
        let av = (0..len).map(&a).collect();
        let bv = (0..len).map(|n| if n == 0 { 0.0 } else { b(n) }).collect();
        Self::new(av, bv, false, Some(b(len)))
    }

    /// Known closed-form coefficients for the families with a single generator.
    ///
    /// coherent `bₙ = α√n`; squeezed `bₙ = (η/2)√(2n(2n−1))`; two-mode `bₙ = n·r`.
    pub fn analytic(family: &StateFamily, len: usize) -> Result<Self> {
        family.validate()?;
        match *family {
            StateFamily::Coherent { alpha } => {
                Self::from_fn(len, |_| 0.0, |n| alpha.abs() * (n as f64).sqrt())
            }
            StateFamily::Squeezed { eta } => Self::from_fn(
                len,
                |_| 0.0,
                |n| {
                    let n = n as f64;
                    eta.abs() / 2.0 * (2.0 * n * (2.0 * n - 1.0)).sqrt()
                },
            ),
            StateFamily::TwoMode { r, .. } => Self::from_fn(len, |_| 0.0, |n| n as f64 * r.abs()),
            _ => Err(Error::UnsupportedFamily {
                family: family.name(),
                operation: "analytic Lanczos coefficients",
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// The leading `len` sites.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::IndexOutOfRange {
                index: len,
                len: self.len(),
            });
        }
        if len == self.len() {
            return Ok(self.clone());
        }
        Ok(TridiagonalData {
            a: self.a[..len].to_vec(),
            b: self.b[..len].to_vec(),
            terminated: false,
            b_tail: Some(self.b[len]),
        })
    }
}

#[derive(Debug, Clone)]
pub struct KrylovBasis {
    vectors: Vec<StateVector>,
    space: FockSpace,
}

impl KrylovBasis {
    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `max_{m,n} |⟨K_m|K_n⟩ − δ_{mn}|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, km) in self.vectors.iter().enumerate() {
            for (n, kn) in self.vectors.iter().enumerate().skip(m) {
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((km.inner(kn) - target).norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct LanczosRun {
    pub basis: KrylovBasis,
    pub tri: TridiagonalData,
    /// Set when `max_steps` exceeded the Hilbert-space dimension.
    pub clipped: bool,
}

/// Indices of every irreducible block of `h` on which `psi0` is nonzero.
fn reachable_indices(h: &OperatorMatrix, psi0: &StateVector) -> Vec<usize> {
    let amps = psi0.amplitudes();
    let mut active: Vec<usize> = h
        .irreducible_blocks()
        .into_iter()
        .filter(|block| block.iter().any(|&i| amps[i] != Complex64::new(0.0, 0.0)))
        .flatten()
        .collect();
    active.sort_unstable();
    active
}

/// One past the last nonzero entry.
fn last_nonzero(x: &[Complex64]) -> usize {
    x.iter().rposition(|z| z.re != 0.0 || z.im != 0.0).map_or(0, |i| i + 1)
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], c: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// Runs at most `max_steps` Lanczos steps from `psi0`.
///
/// `breakdown_tol = None` uses `1e-12·‖H‖`. Each new vector is
/// orthogonalized twice against every earlier one.
pub fn lanczos_iterate(
    h: &OperatorMatrix,
    psi0: &StateVector,
    max_steps: usize,
    breakdown_tol: Option<f64>,
) -> Result<LanczosRun> {
    let space = psi0.space();
    let dim = space.total_dim();
    if h.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: dim,
        });
    }
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm: norm0 });
    }
    let h_norm = h.norm_inf();
    let tol = breakdown_tol.unwrap_or(DEFAULT_BREAKDOWN_REL * h_norm);
    let clipped = max_steps > dim;
    let steps = max_steps.min(dim);

    // Krylov vectors never leave the invariant blocks touched by ψ₀, and in
    // the ascending Fock ordering they stay inside a growing prefix.
    let active = reachable_indices(h, psi0);
    let mut position = vec![usize::MAX; dim];
    for (p, &i) in active.iter().enumerate() {
        position[i] = p;
    }
    let rows: Vec<Vec<(usize, Complex64)>> = active
        .iter()
        .map(|&i| h.row(i).iter().map(|&(j, v)| (position[j], v)).collect())
        .collect();
    let apply = |x: &[Complex64], support: usize| -> Vec<Complex64> {
        rows.iter()
            .map(|row| {
                row.iter()
                    .filter(|(j, _)| *j < support)
                    .map(|&(j, v)| v * x[j])
                    .sum()
            })
            .collect()
    };
    let first: Vec<Complex64> = active.iter().map(|&i| psi0.amplitudes()[i]).collect();
    let mut support = last_nonzero(&first);

    let mut vectors: Vec<Vec<Complex64>> = vec![first];
    let mut a = Vec::new();
    let mut b = vec![0.0];
    let mut terminated = false;
    let mut b_tail = None;

    loop {
        let n = vectors.len() - 1;
        let mut w = apply(&vectors[n], support);
        support = support.max(last_nonzero(&w));
        let s = support;
        let an = dot(&vectors[n][..s], &w[..s]);
        if an.im.abs() > 1e-10 * h_norm.max(1.0) {
            return Err(Error::NotHermitian { defect: an.im.abs() });
        }
        a.push(an.re);
        axpy(&mut w[..s], Complex64::new(-an.re, 0.0), &vectors[n][..s]);
        if n > 0 {
            axpy(&mut w[..s], Complex64::new(-b[n], 0.0), &vectors[n - 1][..s]);
        }
        for _ in 0..2 {
            for k in &vectors {
                let c = dot(&k[..s], &w[..s]);
                axpy(&mut w[..s], -c, &k[..s]);
            }
        }
        let next_b = norm(&w[..s]);
        if next_b <= tol {
            terminated = true;
            break;
        }
        if vectors.len() == steps {
            b_tail = Some(next_b);
            break;
        }
        b.push(next_b);
        for z in &mut w {
            *z /= next_b;
        }
        vectors.push(w);
    }

    let vectors = vectors
        .into_iter()
        .map(|v| {
            let mut full = vec![Complex64::new(0.0, 0.0); dim];
            for (p, z) in v.into_iter().enumerate() {
                full[active[p]] = z;
            }
            StateVector::from_amplitudes(space, full)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LanczosRun {
        basis: KrylovBasis { vectors, space },
        tri: TridiagonalData {
            a,
            b,
            terminated,
            b_tail,
        },
        clipped,
    })
}

/// Largest `|⟨K_m|H|K_n⟩|` with `|m − n| ≥ 2`.
pub fn hessenberg_verify(h: &OperatorMatrix, basis: &KrylovBasis) -> f64 {
    let images: Vec<Vec<Complex64>> = basis
        .vectors
        .iter()
        .map(|k| h.apply(k.amplitudes()))
        .collect();
    let mut worst: f64 = 0.0;
    for (m, km) in basis.vectors.iter().enumerate() {
        for (n, hk) in images.iter().enumerate() {
            if m.abs_diff(n) >= 2 {
                worst = worst.max(dot(km.amplitudes(), hk).norm());
            }
        }
    }
    worst
}
