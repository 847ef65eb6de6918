//! Dense states and operators on finite tensor-product Hilbert spaces.
//!
//! Flattening is row-major with factor 0 the slowest-varying index, so the
//! basis vector `|i_0 i_1 ... i_{n-1}>` sits at
//! `((i_0 * d_1 + i_1) * d_2 + i_2) ...`, matching the Kronecker product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_MAX_TOTAL_DIM: usize = 4096;

/// All comparison thresholds used by validation and invariance checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Invariance checks (trace distances, trace preservation, completeness).
    pub invariance: f64,
    /// Unitarity checks, `max |U^dag U - I|`.
    pub unitarity: f64,
    /// State normalization.
    pub normalization: f64,
    /// Hermiticity of density matrices and differences.
    pub hermiticity: f64,
    /// Lowest eigenvalue allowed for a density matrix, as `-positivity`.
    pub positivity: f64,
    /// Product-state test: second Schmidt coefficient below this is a product.
    pub schmidt: f64,
    pub max_total_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            invariance: 1e-10,
            unitarity: 1e-12,
            normalization: 1e-10,
            hermiticity: 1e-10,
            positivity: 1e-9,
            schmidt: 1e-8,
            max_total_dim: DEFAULT_MAX_TOTAL_DIM,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("invalid dimension list {0:?}: entries must be >= 1 and the list non-empty")]
    InvalidDims(Vec<usize>),
    #[error("total dimension {total} exceeds the configured cap {cap}")]
    DimensionOverflow { total: usize, cap: usize },
    #[error("amplitude count {got} does not match the dimension product {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix shape {got:?} does not match expected {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("dimension lists differ: {left:?} vs {right:?}")]
    DimsMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("invalid sector {indices:?} for {factors} tensor factors")]
    InvalidSector { indices: Vec<usize>, factors: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0:e} differs from 1")]
    TraceNotOne(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("state norm {0:e} differs from 1")]
    NotNormalized(f64),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("expected a single-qubit density matrix, got dimension {0}")]
    NotQubit(usize),
}

pub type QResult<T> = Result<T, QError>;

/// Ordered dimensions of the tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertDims(Vec<usize>);

impl HilbertDims {
    pub fn new(dims: Vec<usize>) -> QResult<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(QError::InvalidDims(dims));
        }
        Ok(Self(dims))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn factors(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &HilbertDims) -> HilbertDims {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        HilbertDims(dims)
    }

    /// Dimensions of the factors named by `sector`, in ascending factor order.
    pub fn select(&self, sector: &SectorIndex) -> QResult<HilbertDims> {
        sector.check(self)?;
        Ok(HilbertDims(sector.0.iter().map(|&i| self.0[i]).collect()))
    }

    fn check_cap(&self, cap: usize) -> QResult<()> {
        let total = self
            .0
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        if total > cap {
            return Err(QError::DimensionOverflow { total, cap });
        }
        Ok(())
    }
}

/// A set of tensor-factor positions, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SectorIndex(Vec<usize>);

impl SectorIndex {
    pub fn new(mut indices: Vec<usize>) -> QResult<Self> {
        let n = indices.len();
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() || indices.len() != n {
            return Err(QError::InvalidSector {
                indices,
                factors: 0,
            });
        }
        Ok(Self(indices))
    }

    pub fn single(index: usize) -> Self {
        Self(vec![index])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn check(&self, dims: &HilbertDims) -> QResult<()> {
        if self.0.iter().any(|&i| i >= dims.factors()) {
            return Err(QError::InvalidSector {
                indices: self.0.clone(),
                factors: dims.factors(),
            });
        }
        Ok(())
    }

    /// Every factor position not in this sector; `None` when the sector is everything.
    pub fn complement(&self, factors: usize) -> Option<SectorIndex> {
        let rest: Vec<usize> = (0..factors).filter(|i| !self.contains(*i)).collect();
        (!rest.is_empty()).then_some(SectorIndex(rest))
    }
}

/// Full-space indices grouped by (rest multi-index, sector multi-index).
///
/// `groups[r][a]` is the flat index whose sector digits encode `a` and whose
/// remaining digits encode `r`, both in row-major order.
#[derive(Debug, Clone)]
pub(crate) struct SectorSplit {
    pub groups: Vec<Vec<usize>>,
    pub sector_dim: usize,
}

impl SectorSplit {
    pub fn new(dims: &HilbertDims, sector: &SectorIndex) -> QResult<Self> {
        sector.check(dims)?;
        let d = dims.as_slice();
        let sector_dim: usize = sector.0.iter().map(|&i| d[i]).product();
        let rest_dim = dims.total() / sector_dim;
        let mut groups = vec![vec![0usize; sector_dim]; rest_dim];
        let mut digits = vec![0usize; d.len()];
        for flat in 0..dims.total() {
            let mut rem = flat;
            for k in (0..d.len()).rev() {
                digits[k] = rem % d[k];
                rem /= d[k];
            }
            let (mut a, mut r) = (0usize, 0usize);
            for k in 0..d.len() {
                if sector.contains(k) {
                    a = a * d[k] + digits[k];
                } else {
                    r = r * d[k] + digits[k];
                }
            }
            groups[r][a] = flat;
        }
        Ok(Self { groups, sector_dim })
    }
}

/// Pure state amplitudes over a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    dims: HilbertDims,
}

impl StateVector {
    pub fn new(amps: CVector, dims: HilbertDims) -> QResult<Self> {
        dims.check_cap(DEFAULT_MAX_TOTAL_DIM)?;
        if amps.len() != dims.total() {
            return Err(QError::LengthMismatch {
                expected: dims.total(),
                got: amps.len(),
            });
        }
        Ok(Self { amps, dims })
    }

    pub fn from_slice(amps: &[Complex64], dims: &[usize]) -> QResult<Self> {
        Self::new(
            CVector::from_column_slice(amps),
            HilbertDims::new(dims.to_vec())?,
        )
    }

    /// Real amplitudes on a single factor; convenient for small fixed states.
    pub fn from_real(amps: &[f64]) -> QResult<Self> {
        let v: Vec<Complex64> = amps.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_slice(&v, &[amps.len()])
    }

    pub fn basis(dims: &HilbertDims, index: usize) -> QResult<Self> {
        let total = dims.total();
        if index >= total {
            return Err(QError::LengthMismatch {
                expected: total,
                got: index + 1,
            });
        }
        let mut amps = CVector::zeros(total);
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps, dims.clone())
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> QResult<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(QError::ZeroNorm);
        }
        Ok(Self {
            amps: self.amps.unscale(n),
            dims: self.dims.clone(),
        })
    }

    pub fn check_normalized(&self, tol: f64) -> QResult<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(QError::NotNormalized(n));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            amps: self.amps.map(|z| z * c),
            dims: self.dims.clone(),
        }
    }

    pub fn add(&self, other: &StateVector) -> QResult<Self> {
        same_dims(&self.dims, &other.dims)?;
        Ok(Self {
            amps: &self.amps + &other.amps,
            dims: self.dims.clone(),
        })
    }

    pub fn tensor(&self, other: &StateVector) -> QResult<Self> {
        let dims = self.dims.concat(&other.dims);
        dims.check_cap(DEFAULT_MAX_TOTAL_DIM)?;
        let nb = other.amps.len();
        let amps = CVector::from_fn(self.amps.len() * nb, |i, _| {
            self.amps[i / nb] * other.amps[i % nb]
        });
        Ok(Self { amps, dims })
    }

    /// Applies a full-space operator.
    pub fn apply(&self, op: &CMatrix) -> QResult<Self> {
        let n = self.amps.len();
        if op.shape() != (n, n) {
            return Err(QError::ShapeMismatch {
                expected: (n, n),
                got: op.shape(),
            });
        }
        Ok(Self {
            amps: op * &self.amps,
            dims: self.dims.clone(),
        })
    }

    /// Applies `op` to the factors in `sector`, identity elsewhere.
    pub fn apply_local(&self, op: &CMatrix, sector: &SectorIndex) -> QResult<Self> {
        let split = SectorSplit::new(&self.dims, sector)?;
        let s = split.sector_dim;
        if op.shape() != (s, s) {
            return Err(QError::ShapeMismatch {
                expected: (s, s),
                got: op.shape(),
            });
        }
        let mut out = CVector::zeros(self.amps.len());
        for group in &split.groups {
            let local = CVector::from_iterator(s, group.iter().map(|&i| self.amps[i]));
            let mapped = op * local;
            for (a, &i) in group.iter().enumerate() {
                out[i] = mapped[a];
            }
        }
        Ok(Self {
            amps: out,
            dims: self.dims.clone(),
        })
    }

    /// Coefficient matrix `M[a, r]` with `a` the sector multi-index and `r` the rest.
    pub fn bipartite_matrix(&self, sector: &SectorIndex) -> QResult<CMatrix> {
        let split = SectorSplit::new(&self.dims, sector)?;
        let rest = split.groups.len();
        Ok(CMatrix::from_fn(split.sector_dim, rest, |a, r| {
            self.amps[split.groups[r][a]]
        }))
    }

    /// Schmidt coefficients across `sector | rest`, sorted descending.
    pub fn schmidt_coefficients(&self, sector: &SectorIndex) -> QResult<Vec<f64>> {
        let m = self.bipartite_matrix(sector)?;
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: &self.amps * self.amps.adjoint(),
            dims: self.dims.clone(),
        }
    }
}

/// A density operator over a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: HilbertDims,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace and positive within `tol`.
    pub fn new(mat: CMatrix, dims: HilbertDims, tol: &Tolerances) -> QResult<Self> {
        let rho = Self::from_parts(mat, dims)?;
        rho.validate(tol)?;
        Ok(rho)
    }

    /// Shape-checked constructor without the physical validity checks.
    pub fn from_parts(mat: CMatrix, dims: HilbertDims) -> QResult<Self> {
        dims.check_cap(DEFAULT_MAX_TOTAL_DIM)?;
        let n = dims.total();
        if mat.shape() != (n, n) {
            return Err(QError::ShapeMismatch {
                expected: (n, n),
                got: mat.shape(),
            });
        }
        Ok(Self { mat, dims })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij rho_ij rho_ji = sum |rho_ij|^2 for Hermitian rho.
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_entry(&(&self.mat - self.mat.adjoint()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, tol: &Tolerances) -> QResult<()> {
        let h = self.hermiticity_deviation();
        if h > tol.hermiticity {
            return Err(QError::NotHermitian(h));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol.invariance {
            return Err(QError::TraceNotOne(tr.re));
        }
        let min = self.min_eigenvalue();
        if min < -tol.positivity {
            return Err(QError::NotPositive(min));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> QResult<Self> {
        let dims = self.dims.concat(&other.dims);
        dims.check_cap(DEFAULT_MAX_TOTAL_DIM)?;
        Ok(Self {
            mat: self.mat.kronecker(&other.mat),
            dims,
        })
    }

    /// Reduced state on the factors in `keep`.
    pub fn partial_trace(&self, keep: &SectorIndex) -> QResult<DensityMatrix> {
        let split = SectorSplit::new(&self.dims, keep)?;
        let k = split.sector_dim;
        let mut out = CMatrix::zeros(k, k);
        for group in &split.groups {
            for (a, &i) in group.iter().enumerate() {
                for (b, &j) in group.iter().enumerate() {
                    out[(a, b)] += self.mat[(i, j)];
                }
            }
        }
        Ok(DensityMatrix {
            mat: out,
            dims: self.dims.select(keep)?,
        })
    }

    /// `op rho op^dag` for a full-space operator, without renormalization.
    pub fn conjugate_by(&self, op: &CMatrix) -> QResult<Self> {
        let n = self.mat.nrows();
        if op.shape() != (n, n) {
            return Err(QError::ShapeMismatch {
                expected: (n, n),
                got: op.shape(),
            });
        }
        Ok(Self {
            mat: op * &self.mat * op.adjoint(),
            dims: self.dims.clone(),
        })
    }
}

fn same_dims(a: &HilbertDims, b: &HilbertDims) -> QResult<()> {
    if a != b {
        return Err(QError::DimsMismatch {
            left: a.0.clone(),
            right: b.0.clone(),
        });
    }
    Ok(())
}

/// Embeds `op` (acting on the factors in `target`) into the full space of `dims`.
pub fn lift(op: &CMatrix, target: &SectorIndex, dims: &HilbertDims) -> QResult<CMatrix> {
    dims.check_cap(DEFAULT_MAX_TOTAL_DIM)?;
    let split = SectorSplit::new(dims, target)?;
    let s = split.sector_dim;
    if op.shape() != (s, s) {
        return Err(QError::ShapeMismatch {
            expected: (s, s),
            got: op.shape(),
        });
    }
    let n = dims.total();
    let mut out = CMatrix::zeros(n, n);
    for group in &split.groups {
        for (a, &i) in group.iter().enumerate() {
            for (b, &j) in group.iter().enumerate() {
                out[(i, j)] = op[(a, b)];
            }
        }
    }
    Ok(out)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn overlap(a: &StateVector, b: &StateVector) -> QResult<Complex64> {
    same_dims(&a.dims, &b.dims)?;
    Ok(a.amps.dotc(&b.amps))
}

/// Half the trace norm of `r1 - r2`, from the eigenvalues of the Hermitian difference.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> QResult<f64> {
    same_dims(&r1.dims, &r2.dims)?;
    let tol = Tolerances::default();
    for r in [r1, r2] {
        let h = r.hermiticity_deviation();
        if h > tol.hermiticity {
            return Err(QError::NotHermitian(h));
        }
    }
    let diff = &r1.mat - &r2.mat;
    let norm1: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum();
    Ok(0.5 * norm1)
}

/// Interference contrast of a path qubit: `2 |rho_01|`.
pub fn visibility(rho_a: &DensityMatrix) -> QResult<f64> {
    let n = rho_a.mat.nrows();
    if n != 2 {
        return Err(QError::NotQubit(n));
    }
    Ok(2.0 * rho_a.mat[(0, 1)].norm())
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U^dag U - I|` over entries; non-square input yields infinity.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_entry(&(u.adjoint() * u - identity(u.nrows())))
}

/// Eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Complex matrix from real entries given row by row.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}
