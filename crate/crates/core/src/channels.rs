//! Kraus channels acting on a sector of a tensor-product space.
//!
//! Operators are stored in the convention `E(rho) = sum_i K_i rho K_i^dag`
//! with completeness `sum_i K_i^dag K_i = I`. The adjoint convention
//! `E(rho) = sum_i K_i^dag rho K_i`, `sum_i K_i K_i^dag = I` describes the
//! same channel with operators `K_i^dag`; see
//! [`KrausChannel::adjoint_convention_operators`].

use nalgebra::linalg::QR;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::qcore::{
    c, identity, lift, max_abs_entry, unitarity_deviation, CMatrix, CVector, DensityMatrix,
    HilbertDims, QError, SectorIndex, SectorSplit, StateVector, Tolerances,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("a channel needs at least one Kraus operator")]
    Empty,
    #[error("Kraus operator {index} has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("completeness violated: max |sum K^dag K - I| = {0:e}")]
    Incomplete(f64),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),
    #[error("channel sector dims {channel:?} do not match state dims {state:?} on that sector")]
    SectorMismatch {
        channel: Vec<usize>,
        state: Vec<usize>,
    },
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error(transparent)]
    Q(#[from] QError),
}

pub type ChannelResult<T> = Result<T, ChannelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Unitary,
    NonselectiveMeasurement,
    General,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Unitary => "unitary",
            ChannelKind::NonselectiveMeasurement => "measurement",
            ChannelKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub max_deviation: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    sector: SectorIndex,
    sector_dims: HilbertDims,
    kind: ChannelKind,
}

/// Structural checks plus the completeness deviation of `operators`.
pub fn validate(operators: &[CMatrix], tol: &Tolerances) -> ChannelResult<ValidityReport> {
    let first = operators.first().ok_or(ChannelError::Empty)?;
    let n = first.nrows();
    for (index, k) in operators.iter().enumerate() {
        if k.shape() != (n, n) {
            return Err(ChannelError::ShapeMismatch {
                index,
                expected: (n, n),
                got: k.shape(),
            });
        }
    }
    let sum = operators
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * k);
    let max_deviation = max_abs_entry(&(sum - identity(n)));
    Ok(ValidityReport {
        max_deviation,
        valid: max_deviation < tol.invariance,
    })
}

impl KrausChannel {
    /// Builds a general channel; completeness is checked by [`Self::validate`]
    /// and enforced by [`Self::apply`].
    pub fn new(
        operators: Vec<CMatrix>,
        sector: SectorIndex,
        sector_dims: HilbertDims,
    ) -> ChannelResult<Self> {
        Self::with_kind(operators, sector, sector_dims, ChannelKind::General)
    }

    fn with_kind(
        operators: Vec<CMatrix>,
        sector: SectorIndex,
        sector_dims: HilbertDims,
        kind: ChannelKind,
    ) -> ChannelResult<Self> {
        if sector.indices().len() != sector_dims.factors() {
            return Err(ChannelError::InvalidSize(format!(
                "sector {:?} names {} factors but {} dims were given",
                sector.indices(),
                sector.indices().len(),
                sector_dims.factors()
            )));
        }
        let n = sector_dims.total();
        if operators.is_empty() {
            return Err(ChannelError::Empty);
        }
        for (index, k) in operators.iter().enumerate() {
            if k.shape() != (n, n) {
                return Err(ChannelError::ShapeMismatch {
                    index,
                    expected: (n, n),
                    got: k.shape(),
                });
            }
        }
        Ok(Self {
            operators,
            sector,
            sector_dims,
            kind,
        })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn sector(&self) -> &SectorIndex {
        &self.sector
    }

    pub fn sector_dims(&self) -> &HilbertDims {
        &self.sector_dims
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// The operators `K_i^dag`, for use with `E(rho) = sum_i K_i^dag rho K_i`.
    pub fn adjoint_convention_operators(&self) -> Vec<CMatrix> {
        self.operators.iter().map(|k| k.adjoint()).collect()
    }

    pub fn validate(&self, tol: &Tolerances) -> ChannelResult<ValidityReport> {
        validate(&self.operators, tol)
    }

    /// Operators embedded in the full space `dims`.
    pub fn lifted_operators(&self, dims: &HilbertDims) -> ChannelResult<Vec<CMatrix>> {
        self.check_sector(dims)?;
        self.operators
            .iter()
            .map(|k| lift(k, &self.sector, dims).map_err(ChannelError::from))
            .collect()
    }

    fn check_sector(&self, dims: &HilbertDims) -> ChannelResult<()> {
        let state = dims.select(&self.sector)?;
        if state != self.sector_dims {
            return Err(ChannelError::SectorMismatch {
                channel: self.sector_dims.as_slice().to_vec(),
                state: state.as_slice().to_vec(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> ChannelResult<DensityMatrix> {
        self.apply_with(rho, &Tolerances::default())
    }

    /// `sum_i L_i rho L_i^dag` with `L_i` the lifted operators.
    ///
    /// Evaluated block-wise: a lifted operator is block diagonal over the
    /// complement of the sector, so each `(r, r')` block of `rho` maps to
    /// `sum_i K_i rho_{rr'} K_i^dag`.
    pub fn apply_with(
        &self,
        rho: &DensityMatrix,
        tol: &Tolerances,
    ) -> ChannelResult<DensityMatrix> {
        let report = self.validate(tol)?;
        if !report.valid {
            return Err(ChannelError::Incomplete(report.max_deviation));
        }
        self.check_sector(rho.dims())?;
        let split = SectorSplit::new(rho.dims(), &self.sector)?;
        let s = split.sector_dim;
        let full = rho.matrix();
        let n = full.nrows();
        let adjoints: Vec<CMatrix> = self.operators.iter().map(|k| k.adjoint()).collect();
        let mut out = CMatrix::zeros(n, n);
        for rows in &split.groups {
            for cols in &split.groups {
                let block = CMatrix::from_fn(s, s, |a, b| full[(rows[a], cols[b])]);
                let mut mapped = CMatrix::zeros(s, s);
                for (k, kd) in self.operators.iter().zip(&adjoints) {
                    mapped += k * &block * kd;
                }
                for (a, &i) in rows.iter().enumerate() {
                    for (b, &j) in cols.iter().enumerate() {
                        out[(i, j)] = mapped[(a, b)];
                    }
                }
            }
        }
        Ok(DensityMatrix::from_parts(out, rho.dims().clone())?)
    }
}

/// Single-operator channel for a unitary on `sector`.
pub fn from_unitary(
    u: CMatrix,
    sector: SectorIndex,
    sector_dims: HilbertDims,
    tol: &Tolerances,
) -> ChannelResult<KrausChannel> {
    let dev = unitarity_deviation(&u);
    if dev > tol.unitarity {
        return Err(ChannelError::NotUnitary(dev));
    }
    KrausChannel::with_kind(vec![u], sector, sector_dims, ChannelKind::Unitary)
}

/// Non-selective measurement with the given orthogonal projectors.
pub fn nonselective_measurement(
    projectors: Vec<CMatrix>,
    sector: SectorIndex,
    sector_dims: HilbertDims,
    tol: &Tolerances,
) -> ChannelResult<KrausChannel> {
    let n = sector_dims.total();
    if projectors.is_empty() {
        return Err(ChannelError::Empty);
    }
    for (i, p) in projectors.iter().enumerate() {
        if p.shape() != (n, n) {
            return Err(ChannelError::ShapeMismatch {
                index: i,
                expected: (n, n),
                got: p.shape(),
            });
        }
        let herm = max_abs_entry(&(p - p.adjoint()));
        if herm > tol.invariance {
            return Err(ChannelError::InvalidProjectors(format!(
                "projector {i} is not Hermitian (deviation {herm:e})"
            )));
        }
        let idem = max_abs_entry(&(p * p - p));
        if idem > tol.invariance {
            return Err(ChannelError::InvalidProjectors(format!(
                "projector {i} is not idempotent (deviation {idem:e})"
            )));
        }
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            // For projectors ||P Q||_F^2 = Tr(P Q); compared squared, since
            // the square root would lift roundoff near 1e-17 to 3e-9.
            let cross = p.component_mul(&q.transpose()).sum().norm();
            if cross > tol.invariance {
                return Err(ChannelError::InvalidProjectors(format!(
                    "projectors {i} and {j} are not orthogonal (deviation {cross:e})"
                )));
            }
        }
    }
    let sum = projectors
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, p| acc + p);
    let dev = max_abs_entry(&(sum - identity(n)));
    if dev > tol.invariance {
        return Err(ChannelError::InvalidProjectors(format!(
            "projectors do not sum to the identity (deviation {dev:e})"
        )));
    }
    KrausChannel::with_kind(
        projectors,
        sector,
        sector_dims,
        ChannelKind::NonselectiveMeasurement,
    )
}

/// Rank-one projectors onto the columns of `basis`.
pub fn projectors_from_basis(basis: &CMatrix) -> Vec<CMatrix> {
    basis
        .column_iter()
        .map(|col| {
            let v = col.into_owned();
            &v * v.adjoint()
        })
        .collect()
}

/// Measurement in the computational basis of the sector.
pub fn computational_measurement(
    sector: SectorIndex,
    sector_dims: HilbertDims,
) -> ChannelResult<KrausChannel> {
    let n = sector_dims.total();
    nonselective_measurement(
        projectors_from_basis(&identity(n)),
        sector,
        sector_dims,
        &Tolerances::default(),
    )
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    })
}

/// Haar unitary from the QR decomposition of a complex Ginibre matrix, with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary_from(dim: usize, rng: &mut ChaCha8Rng) -> ChannelResult<CMatrix> {
    if dim == 0 {
        return Err(ChannelError::InvalidSize("dimension must be >= 1".into()));
    }
    let qr = QR::new(ginibre(dim, dim, rng));
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            c(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

pub fn random_unitary(dim: usize, seed: u64) -> ChannelResult<CMatrix> {
    random_unitary_from(dim, &mut rng(seed))
}

/// Haar-random pure state on `dims`.
pub fn random_state_from(dims: &HilbertDims, rng: &mut ChaCha8Rng) -> ChannelResult<StateVector> {
    let g = ginibre(dims.total(), 1, rng);
    let v = CVector::from_iterator(dims.total(), g.iter().copied());
    Ok(StateVector::new(v, dims.clone())?.normalized()?)
}

pub fn random_state(dims: &HilbertDims, seed: u64) -> ChannelResult<StateVector> {
    random_state_from(dims, &mut rng(seed))
}

/// Random channel from a Stinespring isometry `V: C^d -> C^(k d)`, taken as
/// the first `d` columns of a Haar unitary; `K_i` is the `i`-th `d x d`
/// row block of `V`.
pub fn random_channel_from(
    sector: SectorIndex,
    sector_dims: HilbertDims,
    kraus_count: usize,
    rng: &mut ChaCha8Rng,
) -> ChannelResult<KrausChannel> {
    if kraus_count == 0 {
        return Err(ChannelError::InvalidSize("kraus_count must be >= 1".into()));
    }
    let d = sector_dims.total();
    let u = random_unitary_from(d * kraus_count, rng)?;
    let ops: Vec<CMatrix> = (0..kraus_count)
        .map(|i| u.view((i * d, 0), (d, d)).into_owned())
        .collect();
    let kind = if kraus_count == 1 {
        ChannelKind::Unitary
    } else {
        ChannelKind::General
    };
    KrausChannel::with_kind(ops, sector, sector_dims, kind)
}

pub fn random_channel(
    sector: SectorIndex,
    sector_dims: HilbertDims,
    kraus_count: usize,
    seed: u64,
) -> ChannelResult<KrausChannel> {
    random_channel_from(sector, sector_dims, kraus_count, &mut rng(seed))
}

/// Rank-one measurement in a Haar-random basis of the sector.
pub fn random_measurement_from(
    sector: SectorIndex,
    sector_dims: HilbertDims,
    rng: &mut ChaCha8Rng,
) -> ChannelResult<KrausChannel> {
    let u = random_unitary_from(sector_dims.total(), rng)?;
    nonselective_measurement(
        projectors_from_basis(&u),
        sector,
        sector_dims,
        &Tolerances::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{real_matrix, trace_distance};

    fn qubit() -> (SectorIndex, HilbertDims) {
        (SectorIndex::single(0), HilbertDims::new(vec![2]).unwrap())
    }

    fn pauli_x() -> CMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn pauli_z() -> CMatrix {
        real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    fn plus_state() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[h, h]).unwrap().to_density()
    }

    #[test]
    fn identity_channel_is_valid() {
        let (s, d) = qubit();
        let ch = KrausChannel::new(vec![identity(2)], s, d).unwrap();
        let r = ch.validate(&Tolerances::default()).unwrap();
        assert!(r.valid);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn phase_flip_mixture_is_valid() {
        let (s, d) = qubit();
        let p: f64 = 0.3;
        let ops = vec![
            identity(2).scale(p.sqrt()),
            pauli_z().scale((1.0 - p).sqrt()),
        ];
        let ch = KrausChannel::new(ops, s, d).unwrap();
        assert!(ch.validate(&Tolerances::default()).unwrap().valid);
    }

    #[test]
    fn doubled_identity_is_invalid() {
        let (s, d) = qubit();
        let ch = KrausChannel::new(vec![identity(2), identity(2)], s, d).unwrap();
        let r = ch.validate(&Tolerances::default()).unwrap();
        assert!(!r.valid);
        assert!((r.max_deviation - 1.0).abs() < 1e-15);
        assert!(matches!(
            ch.apply(&plus_state()),
            Err(ChannelError::Incomplete(_))
        ));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            validate(&[], &Tolerances::default()),
            Err(ChannelError::Empty)
        );
        assert!(matches!(
            validate(&[identity(2), identity(3)], &Tolerances::default()),
            Err(ChannelError::ShapeMismatch { index: 1, .. })
        ));
        let (s, d) = qubit();
        assert!(matches!(
            KrausChannel::new(vec![identity(3)], s, d),
            Err(ChannelError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn identity_channel_leaves_state_unchanged() {
        let (s, d) = qubit();
        let ch = KrausChannel::new(vec![identity(2)], s, d).unwrap();
        let rho = plus_state();
        assert_eq!(ch.apply(&rho).unwrap(), rho);
    }

    #[test]
    fn dephasing_kills_off_diagonals() {
        let dims = HilbertDims::new(vec![2, 2]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_real(&[h, h])
            .unwrap()
            .tensor(&StateVector::from_real(&[h, h]).unwrap())
            .unwrap();
        let ch =
            computational_measurement(SectorIndex::single(1), HilbertDims::new(vec![2]).unwrap())
                .unwrap();
        assert_eq!(ch.kind(), ChannelKind::NonselectiveMeasurement);
        let out = ch.apply(&psi.to_density()).unwrap();
        assert_eq!(out.dims(), &dims);
        let r1 = out.partial_trace(&SectorIndex::single(1)).unwrap();
        assert!(r1.matrix()[(0, 1)].norm() < 1e-15);
        let r0 = out.partial_trace(&SectorIndex::single(0)).unwrap();
        assert!((r0.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sector_mismatch_is_rejected() {
        let ch = KrausChannel::new(
            vec![identity(3)],
            SectorIndex::single(0),
            HilbertDims::new(vec![3]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            ch.apply(&plus_state()),
            Err(ChannelError::SectorMismatch { .. })
        ));
    }

    #[test]
    fn unitary_channels() {
        let (s, d) = qubit();
        let tol = Tolerances::default();
        let id = from_unitary(identity(2), s.clone(), d.clone(), &tol).unwrap();
        assert_eq!(id.kind(), ChannelKind::Unitary);
        assert_eq!(id.operators(), &[identity(2)]);
        let x = from_unitary(pauli_x(), s.clone(), d.clone(), &tol).unwrap();
        let zero = StateVector::from_real(&[1.0, 0.0]).unwrap().to_density();
        let one = StateVector::from_real(&[0.0, 1.0]).unwrap().to_density();
        assert_eq!(x.apply(&zero).unwrap(), one);
        assert!(matches!(
            from_unitary(identity(2).scale(1.1), s, d, &tol),
            Err(ChannelError::NotUnitary(_))
        ));
    }

    #[test]
    fn unitary_channel_matches_dense_conjugation() {
        let dims = HilbertDims::new(vec![2, 3]).unwrap();
        let rho = random_state(&dims, 3).unwrap().to_density();
        let u = random_unitary(3, 4).unwrap();
        let sector = SectorIndex::single(1);
        let ch = from_unitary(
            u.clone(),
            sector.clone(),
            HilbertDims::new(vec![3]).unwrap(),
            &Tolerances::default(),
        )
        .unwrap();
        let lifted = lift(&u, &sector, &dims).unwrap();
        let oracle = &lifted * rho.matrix() * lifted.adjoint();
        assert!(max_abs_entry(&(ch.apply(&rho).unwrap().matrix() - oracle)) < 1e-12);
    }

    #[test]
    fn measurement_validation() {
        let (s, d) = qubit();
        let tol = Tolerances::default();
        let trivial =
            nonselective_measurement(vec![identity(2)], s.clone(), d.clone(), &tol).unwrap();
        assert_eq!(trivial.apply(&plus_state()).unwrap(), plus_state());
        let p0 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let incomplete = nonselective_measurement(vec![p0.clone()], s.clone(), d.clone(), &tol);
        assert!(matches!(
            incomplete,
            Err(ChannelError::InvalidProjectors(_))
        ));
        let overlapping = nonselective_measurement(
            vec![p0.clone(), real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5])],
            s.clone(),
            d.clone(),
            &tol,
        );
        assert!(matches!(
            overlapping,
            Err(ChannelError::InvalidProjectors(_))
        ));
        let not_idempotent = nonselective_measurement(
            vec![identity(2).scale(0.5), identity(2).scale(0.5)],
            s,
            d,
            &tol,
        );
        assert!(matches!(
            not_idempotent,
            Err(ChannelError::InvalidProjectors(_))
        ));
    }

    #[test]
    fn dephasing_is_idempotent() {
        let dims = HilbertDims::new(vec![3, 2]).unwrap();
        let rho = random_state(&dims, 11).unwrap().to_density();
        let ch =
            computational_measurement(SectorIndex::single(0), HilbertDims::new(vec![3]).unwrap())
                .unwrap();
        let once = ch.apply(&rho).unwrap();
        let twice = ch.apply(&once).unwrap();
        assert!(max_abs_entry(&(once.matrix() - twice.matrix())) < 1e-15);
    }

    #[test]
    fn random_unitary_properties() {
        let u = random_unitary(7, 42).unwrap();
        assert!(max_abs_entry(&(&u * u.adjoint() - identity(7))) < 1e-12);
        assert_eq!(u, random_unitary(7, 42).unwrap());
        assert_ne!(u, random_unitary(7, 43).unwrap());
        for col in u.column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        assert!(random_unitary(0, 1).is_err());
    }

    #[test]
    fn random_channel_properties() {
        let d = HilbertDims::new(vec![2, 2]).unwrap();
        let s = SectorIndex::new(vec![1, 2]).unwrap();
        let one = random_channel(s.clone(), d.clone(), 1, 5).unwrap();
        assert_eq!(one.kind(), ChannelKind::Unitary);
        assert!(unitarity_deviation(&one.operators()[0]) < 1e-12);

        let ch = random_channel(s.clone(), d.clone(), 3, 5).unwrap();
        assert_eq!(ch.operators().len(), 3);
        assert!(ch.validate(&Tolerances::default()).unwrap().max_deviation < 1e-10);
        let full = HilbertDims::new(vec![2, 2, 2]).unwrap();
        let rho = random_state(&full, 9).unwrap().to_density();
        let out = ch.apply(&rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!(out.trace().im.abs() < 1e-12);
        assert!(random_channel(s, d, 0, 5).is_err());
    }

    #[test]
    fn adjoint_convention_completeness() {
        let d = HilbertDims::new(vec![3]).unwrap();
        let ch = random_channel(SectorIndex::single(0), d, 2, 17).unwrap();
        let adj = ch.adjoint_convention_operators();
        let sum = adj
            .iter()
            .fold(CMatrix::zeros(3, 3), |acc, k| acc + k * k.adjoint());
        assert!(max_abs_entry(&(sum - identity(3))) < 1e-12);
    }

    #[test]
    fn apply_matches_lifted_oracle() {
        let dims = HilbertDims::new(vec![2, 3, 2]).unwrap();
        let sector = SectorIndex::new(vec![0, 2]).unwrap();
        let ch = random_channel(sector, HilbertDims::new(vec![2, 2]).unwrap(), 3, 8).unwrap();
        let rho = random_state(&dims, 21).unwrap().to_density();
        let oracle = ch
            .lifted_operators(&dims)
            .unwrap()
            .iter()
            .fold(CMatrix::zeros(12, 12), |acc, l| {
                acc + l * rho.matrix() * l.adjoint()
            });
        let got = ch.apply(&rho).unwrap();
        assert!(max_abs_entry(&(got.matrix() - oracle)) < 1e-13);
        assert!(trace_distance(&got, &got).unwrap() == 0.0);
    }
}
