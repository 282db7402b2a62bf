//! Truncated Fock spaces, sparse operators on them, and a brute-force
//! evolution oracle used to cross-check the Krylov routes.
//!
//! Basis states of an `n_modes`-mode space are indexed with mode 0 varying
//! fastest: `index = Σ_k n_k · N^k`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::StateFamily;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default truncation for a single bosonic mode.
pub const DEFAULT_SINGLE_MODE_DIM: usize = 256;
/// Default per-mode truncation for two bosonic modes.
pub const DEFAULT_TWO_MODE_DIM: usize = 64;
/// Fraction of the highest Fock levels whose occupation is monitored.
pub const TAIL_FRACTION: f64 = 0.05;
/// Default bound on the tail occupation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_modes: usize,
    dim_per_mode: usize,
}

impl FockSpace {
    pub fn new(n_modes: usize, dim_per_mode: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("a Fock space needs at least one mode".into()));
        }
        if dim_per_mode < 2 {
            return Err(Error::InvalidParameter(format!(
                "truncation must keep at least two levels per mode (got {dim_per_mode})"
            )));
        }
        dim_per_mode
            .checked_pow(n_modes as u32)
            .ok_or_else(|| Error::InvalidParameter("Fock space dimension overflows".into()))?;
        Ok(FockSpace {
            n_modes,
            dim_per_mode,
        })
    }

    pub fn single_mode(dim: usize) -> Result<Self> {
        Self::new(1, dim)
    }

    pub fn two_mode(dim_per_mode: usize) -> Result<Self> {
        Self::new(2, dim_per_mode)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim_per_mode(&self) -> usize {
        self.dim_per_mode
    }

    pub fn total_dim(&self) -> usize {
        self.dim_per_mode.pow(self.n_modes as u32)
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim_per_mode.pow(mode as u32)
    }

    /// Basis index of an occupation-number configuration.
    pub fn index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: occupations.len(),
            });
        }
        let mut idx = 0;
        for (mode, &n) in occupations.iter().enumerate() {
            if n >= self.dim_per_mode {
                return Err(Error::IndexOutOfRange {
                    index: n,
                    len: self.dim_per_mode,
                });
            }
            idx += n * self.stride(mode);
        }
        Ok(idx)
    }

    /// Occupation numbers of a basis index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = Vec::with_capacity(self.n_modes);
        for _ in 0..self.n_modes {
            occ.push(index % self.dim_per_mode);
            index /= self.dim_per_mode;
        }
        occ
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    space: FockSpace,
}

impl StateVector {
    pub fn from_amplitudes(space: FockSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                got: amplitudes.len(),
            });
        }
        Ok(StateVector { amplitudes, space })
    }

    pub fn basis(space: FockSpace, occupations: &[usize]) -> Result<Self> {
        let mut amplitudes = vec![ZERO; space.total_dim()];
        amplitudes[space.index(occupations)?] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, space })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        let mut amplitudes = vec![ZERO; space.total_dim()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes, space }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DivisionByZero("cannot normalize a zero vector"));
        }
        for z in &mut self.amplitudes {
            *z /= n;
        }
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// Occupation of the top `fraction` of Fock levels in any mode.
    pub fn tail_occupation(&self, fraction: f64) -> f64 {
        let n = self.space.dim_per_mode;
        let width = ((fraction * n as f64).ceil() as usize).clamp(1, n);
        let first_tail_level = n - width;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                self.space
                    .occupations(*idx)
                    .iter()
                    .any(|&level| level >= first_tail_level)
            })
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Rejects a state whose top levels carry more than `threshold` probability.
    pub fn check_truncation(&self, t: f64, threshold: f64) -> Result<()> {
        let tail = self.tail_occupation(TAIL_FRACTION);
        if tail > threshold {
            return Err(Error::TruncationInsufficient { t, tail, threshold });
        }
        Ok(())
    }
}

/// Sparse complex matrix stored by rows, columns sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix {
            dim,
            rows: vec![Vec::new(); dim],
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| vec![(i, Complex64::new(1.0, 0.0))])
            .collect();
        OperatorMatrix {
            dim,
            rows,
            hermitian: true,
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed. The
    /// hermitian flag is set by checking the entries.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut maps: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); dim];
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: dim,
                });
            }
            *maps[i].entry(j).or_insert(ZERO) += v;
        }
        Ok(Self::from_row_maps(dim, maps))
    }

    fn from_row_maps(dim: usize, maps: Vec<BTreeMap<usize, Complex64>>) -> Self {
        let rows = maps
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, v)| *v != ZERO).collect())
            .collect();
        let mut op = OperatorMatrix {
            dim,
            rows,
            hermitian: false,
        };
        op.hermitian = op.hermitian_defect() <= 1e-12;
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(ZERO)
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |H − H†| / max |H|` (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        worst / scale
    }

    pub fn adjoint(&self) -> Self {
        let mut maps: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                maps[j].insert(i, v.conj());
            }
        }
        Self::from_row_maps(self.dim, maps)
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_dim(other)?;
        let maps = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BTreeMap::new();
                for &(k, v) in row {
                    for &(j, w) in &other.rows[k] {
                        *acc.entry(j).or_insert(ZERO) += v * w;
                    }
                }
                acc
            })
            .collect();
        Ok(Self::from_row_maps(self.dim, maps))
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_dim(other)?;
        let maps = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r1, r2)| {
                let mut acc: BTreeMap<usize, Complex64> = r1.iter().copied().collect();
                for &(j, w) in r2 {
                    *acc.entry(j).or_insert(ZERO) += w;
                }
                acc
            })
            .collect();
        Ok(Self::from_row_maps(self.dim, maps))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let maps = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| (j, c * v)).collect())
            .collect();
        Self::from_row_maps(self.dim, maps)
    }

    fn check_dim(&self, other: &OperatorMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn apply_state(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.space.total_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: psi.space.total_dim(),
            });
        }
        Ok(StateVector {
            amplitudes: self.apply(&psi.amplitudes),
            space: psi.space,
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Index sets of the irreducible diagonal blocks: connected components of
    /// the graph whose edges are the nonzero entries. Blocks are sorted by
    /// their smallest index and indices within a block ascend.
    pub fn irreducible_blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.dim).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.dim {
            let root = find(&mut parent, i);
            blocks.entry(root).or_default().push(i);
        }
        blocks.into_values().collect()
    }
}

/// Annihilation and creation operators of `mode`, truncated so that
/// `a†|N−1⟩ = 0`.
pub fn build_ladder(space: FockSpace, mode: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if mode >= space.n_modes() {
        return Err(Error::IndexOutOfRange {
            index: mode,
            len: space.n_modes(),
        });
    }
    let stride = space.stride(mode);
    let triplets: Vec<_> = (0..space.total_dim())
        .filter_map(|idx| {
            let n = space.occupations(idx)[mode];
            (n > 0).then(|| (idx - stride, idx, Complex64::new((n as f64).sqrt(), 0.0)))
        })
        .collect();
    let a = OperatorMatrix::from_triplets(space.total_dim(), &triplets)?;
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Number operator `a†a` of `mode`.
pub fn number_operator(space: FockSpace, mode: usize) -> Result<OperatorMatrix> {
    let (a, a_dag) = build_ladder(space, mode)?;
    a_dag.matmul(&a)
}

/// Generator of the family's time evolution on `space`.
///
/// * coherent: `α(a† + a)`
/// * squeezed: `η(a² + a†²)/2`
/// * two-mode: `i·r(e^{−iθ} ab − e^{iθ} a†b†)`, so `e^{−iHt}|0,0⟩ = Ŝ₂(rt e^{iθ})|0,0⟩`
pub fn build_hamiltonian(family: &StateFamily, space: FockSpace) -> Result<OperatorMatrix> {
    family.validate()?;
    let unsupported = || Error::UnsupportedFamily {
        family: family.name(),
        operation: "build_hamiltonian",
    };
    let single_mode = || {
        if space.n_modes() != 1 {
            Err(Error::InvalidParameter(format!(
                "{} needs a single-mode space",
                family.name()
            )))
        } else {
            Ok(())
        }
    };
    match *family {
        StateFamily::Coherent { alpha } => {
            single_mode()?;
            let (a, a_dag) = build_ladder(space, 0)?;
            Ok(a.add(&a_dag)?.scale(Complex64::new(alpha, 0.0)))
        }
        StateFamily::Squeezed { eta } => {
            single_mode()?;
            let (a, a_dag) = build_ladder(space, 0)?;
            let pair = a.matmul(&a)?.add(&a_dag.matmul(&a_dag)?)?;
            Ok(pair.scale(Complex64::new(eta / 2.0, 0.0)))
        }
        StateFamily::TwoMode { r, theta } => {
            if space.n_modes() != 2 {
                return Err(Error::InvalidParameter("two_mode needs a two-mode space".into()));
            }
            let (a, a_dag) = build_ladder(space, 0)?;
            let (b, b_dag) = build_ladder(space, 1)?;
            let phase = Complex64::from_polar(1.0, theta);
            let annihilate = a.matmul(&b)?.scale(phase.conj());
            let create = a_dag.matmul(&b_dag)?.scale(-phase);
            Ok(annihilate.add(&create)?.scale(Complex64::new(0.0, r)))
        }
        _ => Err(unsupported()),
    }
}

struct SpectralBlock {
    indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

/// Full eigendecomposition of a hermitian operator, computed block by block
/// over its irreducible components. Reusable across many evolution times.
pub struct SpectralOracle {
    dim: usize,
    blocks: Vec<SpectralBlock>,
}

impl SpectralOracle {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let defect = h.hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian { defect });
        }
        let blocks = h
            .irreducible_blocks()
            .into_iter()
            .map(|indices| {
                let n = indices.len();
                let mut m = DMatrix::zeros(n, n);
                for (bi, &i) in indices.iter().enumerate() {
                    for (bj, &j) in indices.iter().enumerate() {
                        m[(bi, bj)] = h.get(i, j);
                    }
                }
                let eig = SymmetricEigen::new(m);
                SpectralBlock {
                    indices,
                    eigenvalues: eig.eigenvalues.iter().copied().collect(),
                    eigenvectors: eig.eigenvectors,
                }
            })
            .collect();
        Ok(SpectralOracle {
            dim: h.dim(),
            blocks,
        })
    }

    /// `e^{−iHt} ψ`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be finite (got {t})")));
        }
        if psi.space.total_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: psi.space.total_dim(),
            });
        }
        let mut out = vec![ZERO; self.dim];
        for block in &self.blocks {
            let local = DVector::from_iterator(
                block.indices.len(),
                block.indices.iter().map(|&i| psi.amplitudes[i]),
            );
            if local.iter().all(|z| *z == ZERO) {
                continue;
            }
            let mut coeffs = block.eigenvectors.adjoint() * local;
            for (c, &lambda) in coeffs.iter_mut().zip(&block.eigenvalues) {
                *c *= Complex64::from_polar(1.0, -lambda * t);
            }
            let evolved = &block.eigenvectors * coeffs;
            for (&i, z) in block.indices.iter().zip(evolved.iter()) {
                out[i] = *z;
            }
        }
        Ok(StateVector {
            amplitudes: out,
            space: psi.space,
        })
    }
}

/// Reference evolution `e^{−iHt} ψ₀` through a full eigendecomposition of `H`.
pub fn evolve_oracle(h: &OperatorMatrix, psi0: &StateVector, t: f64) -> Result<StateVector> {
    SpectralOracle::new(h)?.evolve(psi0, t)
}
