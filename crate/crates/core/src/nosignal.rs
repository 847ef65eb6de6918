//! Source, field and probe ("A", "F", "B") states and the checks that
//! operations confined to F and B leave the reduced state of A untouched.
//!
//! Global states live on dims `[2, dim_f, dim_b]`: factor 0 is the path
//! qubit of the superposed source, factor 1 the field, factor 2 the probe.
//! Evolution between the two hypersurfaces that both contain the source's
//! recombination is the identity on A, so it is modeled as a single
//! channel on F, B or FB.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{
    self, random_channel_from, random_measurement_from, random_state_from, random_unitary_from,
    ChannelError, ChannelKind, KrausChannel,
};
use crate::qcore::{
    overlap, trace_distance, unitarity_deviation, CMatrix, DensityMatrix, HilbertDims, QError,
    SectorIndex, StateVector, Tolerances,
};

pub const ALICE: usize = 0;
pub const FIELD: usize = 1;
pub const BOB: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoSignalError {
    #[error("channel acts on the source factor (sector {0:?}); only field and probe operations are allowed")]
    TouchesAlice(Vec<usize>),
    #[error("global state has norm {0:e}")]
    NotNormalized(f64),
    #[error("branch states must share dims: {0}")]
    BranchMismatch(String),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Q(#[from] QError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

pub type NoSignalResult<T> = Result<T, NoSignalError>;

/// Logical stage of the evolution. `Sigma1` precedes the probe's operation,
/// `Sigma3` follows it, and both contain the source's recombination.
/// `Sigma2` (probe done, recombination not started) is carried for labeling
/// only; no check is defined on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypersurface {
    Sigma1,
    Sigma2,
    Sigma3,
}

/// `sum_i alpha_i |i>_A |Psi_i>_F |B0>_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    alice_amps: [Complex64; 2],
    field_branches: [StateVector; 2],
    bob_state: StateVector,
}

impl BranchState {
    /// The field branches need not be orthogonal: the path states of A are,
    /// so the global norm squared is `|alpha_0|^2 + |alpha_1|^2` regardless.
    pub fn new(
        alice_amps: [Complex64; 2],
        field_branches: [StateVector; 2],
        bob_state: StateVector,
        tol: &Tolerances,
    ) -> NoSignalResult<Self> {
        if field_branches[0].dims().total() != field_branches[1].dims().total() {
            return Err(NoSignalError::BranchMismatch(format!(
                "{:?} vs {:?}",
                field_branches[0].dims(),
                field_branches[1].dims()
            )));
        }
        for f in &field_branches {
            f.check_normalized(tol.normalization)?;
        }
        bob_state.check_normalized(tol.normalization)?;
        let norm = alice_amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol.normalization {
            return Err(NoSignalError::NotNormalized(norm));
        }
        Ok(Self {
            alice_amps,
            field_branches,
            bob_state,
        })
    }

    pub fn alice_amps(&self) -> [Complex64; 2] {
        self.alice_amps
    }

    pub fn field_branches(&self) -> &[StateVector; 2] {
        &self.field_branches
    }

    pub fn bob_state(&self) -> &StateVector {
        &self.bob_state
    }

    pub fn dim_f(&self) -> usize {
        self.field_branches[0].dims().total()
    }

    pub fn dim_b(&self) -> usize {
        self.bob_state.dims().total()
    }

    /// Global state on `[2, dim_f, dim_b]`, renormalized after the norm check.
    pub fn assemble(&self) -> NoSignalResult<StateVector> {
        let tol = Tolerances::default();
        let path = HilbertDims::new(vec![2])?;
        let flat_f = HilbertDims::new(vec![self.dim_f()])?;
        let flat_b = HilbertDims::new(vec![self.dim_b()])?;
        let bob = StateVector::new(self.bob_state.amplitudes().clone(), flat_b)?;
        let mut total: Option<StateVector> = None;
        for (i, (alpha, field)) in self.alice_amps.iter().zip(&self.field_branches).enumerate() {
            let field = StateVector::new(field.amplitudes().clone(), flat_f.clone())?;
            let term = StateVector::basis(&path, i)?
                .tensor(&field)?
                .tensor(&bob)?
                .scale(*alpha);
            total = Some(match total {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        let psi = total.expect("two branches");
        let n = psi.norm();
        if (n - 1.0).abs() > tol.normalization {
            return Err(NoSignalError::NotNormalized(n));
        }
        Ok(psi.normalized()?)
    }
}

/// Factor positions of the non-source part of a tripartite state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalSector {
    Field,
    Bob,
    FieldBob,
}

impl LocalSector {
    pub const ALL: [LocalSector; 3] = [LocalSector::Field, LocalSector::Bob, LocalSector::FieldBob];

    pub fn index(self) -> SectorIndex {
        match self {
            LocalSector::Field => SectorIndex::single(FIELD),
            LocalSector::Bob => SectorIndex::single(BOB),
            LocalSector::FieldBob => SectorIndex::new(vec![FIELD, BOB]).expect("distinct"),
        }
    }

    pub fn dims(self, dim_f: usize, dim_b: usize) -> HilbertDims {
        let d = match self {
            LocalSector::Field => vec![dim_f],
            LocalSector::Bob => vec![dim_b],
            LocalSector::FieldBob => vec![dim_f, dim_b],
        };
        HilbertDims::new(d).expect("positive dims")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LocalSector::Field => "F",
            LocalSector::Bob => "B",
            LocalSector::FieldBob => "FB",
        }
    }
}

fn alice_sector() -> SectorIndex {
    SectorIndex::single(ALICE)
}

pub fn alice_reduced(rho: &DensityMatrix) -> NoSignalResult<DensityMatrix> {
    Ok(rho.partial_trace(&alice_sector())?)
}

/// Trace distance between the source's reduced state before and after `ch`.
pub fn alice_invariance_check(bs: &BranchState, ch: &KrausChannel) -> NoSignalResult<f64> {
    invariance_check_state(&bs.assemble()?, ch)
}

/// As [`alice_invariance_check`], for any pure global state with the source on factor 0.
pub fn invariance_check_state(psi: &StateVector, ch: &KrausChannel) -> NoSignalResult<f64> {
    invariance_check_density(&psi.to_density(), ch)
}

pub fn invariance_check_density(rho: &DensityMatrix, ch: &KrausChannel) -> NoSignalResult<f64> {
    if ch.sector().contains(ALICE) {
        return Err(NoSignalError::TouchesAlice(ch.sector().indices().to_vec()));
    }
    let before = alice_reduced(rho)?;
    let after = alice_reduced(&ch.apply(rho)?)?;
    Ok(trace_distance(&before, &after)?)
}

/// Seeded generator of channels on a fixed sector.
pub trait ChannelFamily: Sync {
    fn sample(&self, seed: u64) -> NoSignalResult<KrausChannel>;
}

#[derive(Debug, Clone)]
pub struct IdentityFamily {
    pub sector: SectorIndex,
    pub dims: HilbertDims,
}

impl ChannelFamily for IdentityFamily {
    fn sample(&self, _seed: u64) -> NoSignalResult<KrausChannel> {
        let n = self.dims.total();
        Ok(KrausChannel::new(
            vec![CMatrix::identity(n, n)],
            self.sector.clone(),
            self.dims.clone(),
        )?)
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryFamily {
    pub sector: SectorIndex,
    pub dims: HilbertDims,
}

impl ChannelFamily for UnitaryFamily {
    fn sample(&self, seed: u64) -> NoSignalResult<KrausChannel> {
        let u = channels::random_unitary(self.dims.total(), seed)?;
        Ok(channels::from_unitary(
            u,
            self.sector.clone(),
            self.dims.clone(),
            &Tolerances::default(),
        )?)
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementFamily {
    pub sector: SectorIndex,
    pub dims: HilbertDims,
}

impl ChannelFamily for MeasurementFamily {
    fn sample(&self, seed: u64) -> NoSignalResult<KrausChannel> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(random_measurement_from(
            self.sector.clone(),
            self.dims.clone(),
            &mut rng,
        )?)
    }
}

/// Stinespring channels with a Kraus rank drawn uniformly from `1..=max_kraus`.
#[derive(Debug, Clone)]
pub struct GeneralFamily {
    pub sector: SectorIndex,
    pub dims: HilbertDims,
    pub max_kraus: usize,
}

impl ChannelFamily for GeneralFamily {
    fn sample(&self, seed: u64) -> NoSignalResult<KrausChannel> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=self.max_kraus.max(1));
        Ok(random_channel_from(
            self.sector.clone(),
            self.dims.clone(),
            k,
            &mut rng,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanReport {
    pub trials: usize,
    pub max_trace_distance: f64,
    pub worst_seed: u64,
}

/// Per-trial seed; the mixing keeps trial streams of nearby base seeds apart.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    let mut z = base
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(trial.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Largest source-state change over `trials` channels drawn from `family`.
/// Ties resolve to the smaller trial index, so the report is independent
/// of thread scheduling.
pub fn signaling_scan(
    bs: &BranchState,
    family: &dyn ChannelFamily,
    trials: usize,
    base_seed: u64,
) -> NoSignalResult<ScanReport> {
    if trials == 0 {
        return Err(NoSignalError::NoTrials);
    }
    let rho = bs.assemble()?.to_density();
    let results: Vec<(usize, u64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(base_seed, t as u64);
            let ch = family.sample(seed)?;
            Ok((t, seed, invariance_check_density(&rho, &ch)?))
        })
        .collect::<NoSignalResult<_>>()?;
    let (_, worst_seed, max) =
        results
            .into_iter()
            .fold((usize::MAX, 0, f64::NEG_INFINITY), |best, cur| {
                if cur.2 > best.2 || (cur.2 == best.2 && cur.0 < best.0) {
                    cur
                } else {
                    best
                }
            });
    Ok(ScanReport {
        trials,
        max_trace_distance: max,
        worst_seed,
    })
}

fn check_unitary(u: &CMatrix, n: usize, tol: &Tolerances) -> NoSignalResult<()> {
    if u.shape() != (n, n) {
        return Err(QError::ShapeMismatch {
            expected: (n, n),
            got: u.shape(),
        }
        .into());
    }
    let dev = unitarity_deviation(u);
    if dev > tol.unitarity {
        return Err(NoSignalError::NotUnitary(dev));
    }
    Ok(())
}

fn joint_branches(
    psi1: &StateVector,
    psi2: &StateVector,
    b0: &StateVector,
) -> NoSignalResult<[StateVector; 2]> {
    let flat = |s: &StateVector| {
        StateVector::new(
            s.amplitudes().clone(),
            HilbertDims::new(vec![s.dims().total()])?,
        )
    };
    let (f1, f2, b) = (flat(psi1)?, flat(psi2)?, flat(b0)?);
    if f1.dims() != f2.dims() {
        return Err(NoSignalError::BranchMismatch(format!(
            "{:?} vs {:?}",
            f1.dims(),
            f2.dims()
        )));
    }
    Ok([f1.tensor(&b)?, f2.tensor(&b)?])
}

/// `<Psi1 B0 | Psi2 B0>` and `<U Psi1 B0 | U Psi2 B0>`.
pub fn joint_overlap_conservation(
    psi1: &StateVector,
    psi2: &StateVector,
    b0: &StateVector,
    u: &CMatrix,
) -> NoSignalResult<(Complex64, Complex64)> {
    let [j1, j2] = joint_branches(psi1, psi2, b0)?;
    check_unitary(u, j1.amplitudes().len(), &Tolerances::default())?;
    let before = overlap(&j1, &j2)?;
    let after = overlap(&j1.apply(u)?, &j2.apply(u)?)?;
    Ok((before, after))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub factorizes: [bool; 2],
    /// Second Schmidt coefficient of each evolved branch across F|B.
    pub second_schmidt: [f64; 2],
    /// `|<Psi1|Psi2>|` before the evolution.
    pub field_overlap_before: f64,
    /// `|<Psi1'|Psi2'>|`, when both branches factorize.
    pub field_overlap_after: Option<f64>,
    /// `|<B1|B2>|`, when both branches factorize.
    pub bob_overlap_after: Option<f64>,
    /// `|<B1|B2>| >= |<Psi1|Psi2>|`, evaluated only when both branches factorize.
    pub bound_holds: Option<bool>,
}

/// Leading Schmidt factors `(field, probe)` and the second Schmidt coefficient.
///
/// The singular values decide factorization. The factors themselves come
/// from the matrix: its largest column, one power step through `M M^dagger`,
/// then `probe = M^T conj(field)`. SVD vectors for rank-deficient inputs with
/// repeated zero singular values proved unreliable.
fn leading_factors(joint: &StateVector) -> NoSignalResult<(StateVector, StateVector, f64)> {
    let m = joint.bipartite_matrix(&SectorIndex::single(0))?;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let second = sv.get(1).copied().unwrap_or(0.0);
    let best = (0..m.ncols())
        .max_by(|&a, &b| m.column(a).norm().total_cmp(&m.column(b).norm()))
        .expect("non-empty matrix");
    let seed = m.column(best).into_owned();
    let field = &m * (m.adjoint() * seed);
    let field = field.unscale(field.norm());
    let probe = m.transpose() * field.conjugate();
    let probe = probe.unscale(probe.norm());
    Ok((
        StateVector::new(field, HilbertDims::new(vec![m.nrows()])?)?,
        StateVector::new(probe, HilbertDims::new(vec![m.ncols()])?)?,
        second,
    ))
}

/// Checks whether `U (Psi_i x B0)` factorizes across F|B for both branches
/// and, if so, whether the probe's branch states are at least as close as
/// the original field branches.
pub fn factorized_bound_check(
    psi1: &StateVector,
    psi2: &StateVector,
    b0: &StateVector,
    u: &CMatrix,
) -> NoSignalResult<FactorizationReport> {
    let tol = Tolerances::default();
    let [j1, j2] = joint_branches(psi1, psi2, b0)?;
    check_unitary(u, j1.amplitudes().len(), &tol)?;
    let dim_f = psi1.dims().total();
    let dim_b = b0.dims().total();
    let split = HilbertDims::new(vec![dim_f, dim_b])?;
    let evolve = |j: &StateVector| -> NoSignalResult<StateVector> {
        Ok(StateVector::new(
            j.apply(u)?.amplitudes().clone(),
            split.clone(),
        )?)
    };
    let (f1, p1, s1) = leading_factors(&evolve(&j1)?)?;
    let (f2, p2, s2) = leading_factors(&evolve(&j2)?)?;
    let factorizes = [s1 < tol.schmidt, s2 < tol.schmidt];
    let field_overlap_before = overlap(&j1, &j2)?.norm();
    let (field_overlap_after, bob_overlap_after, bound_holds) = if factorizes[0] && factorizes[1] {
        let b = overlap(&p1, &p2)?.norm();
        (
            Some(overlap(&f1, &f2)?.norm()),
            Some(b),
            Some(b >= field_overlap_before - tol.invariance),
        )
    } else {
        (None, None, None)
    };
    Ok(FactorizationReport {
        factorizes,
        second_schmidt: [s1, s2],
        field_overlap_before,
        field_overlap_after,
        bob_overlap_after,
        bound_holds,
    })
}

/// `1 - |<phi1|phi2>|`.
pub fn decoherence_functional(phi1: &StateVector, phi2: &StateVector) -> NoSignalResult<f64> {
    let tol = Tolerances::default();
    phi1.check_normalized(tol.normalization)?;
    phi2.check_normalized(tol.normalization)?;
    Ok((1.0 - overlap(phi1, phi2)?.norm()).clamp(0.0, 1.0))
}

pub fn random_branch_state(
    dim_f: usize,
    dim_b: usize,
    rng: &mut ChaCha8Rng,
) -> NoSignalResult<BranchState> {
    let f = HilbertDims::new(vec![dim_f])?;
    let b = HilbertDims::new(vec![dim_b])?;
    let alpha = random_state_from(&HilbertDims::new(vec![2])?, rng)?;
    let amps = [alpha.amplitudes()[0], alpha.amplitudes()[1]];
    let psi1 = random_state_from(&f, rng)?;
    let psi2 = random_state_from(&f, rng)?;
    let b0 = random_state_from(&b, rng)?;
    BranchState::new(amps, [psi1, psi2], b0, &Tolerances::default())
}

/// Which initial global states a sweep draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialStates {
    /// Branch-form states with the probe initially unentangled.
    Branch,
    /// Haar-random pure states on `[2, dim_f, dim_b]`.
    Entangled,
}

impl InitialStates {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialStates::Branch => "branch",
            InitialStates::Entangled => "entangled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub trials: usize,
    pub seed: u64,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Largest Kraus rank for general channels.
    pub max_kraus: usize,
    /// Largest outcome count for measurements; basis vectors are grouped
    /// round-robin into this many projectors.
    pub max_outcomes: usize,
    pub initial: InitialStates,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            min_dim: 2,
            max_dim: 8,
            max_kraus: 4,
            max_outcomes: 8,
            initial: InitialStates::Branch,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub kind: ChannelKind,
    pub kraus_count: usize,
    pub sector: LocalSector,
    pub dim_f: usize,
    pub dim_b: usize,
    pub initial: InitialStates,
    pub trace_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub records: Vec<TrialRecord>,
    pub max_trace_distance: f64,
    pub worst_seed: u64,
}

/// Projectors onto `outcomes` groups of the columns of `basis`.
fn grouped_projectors(basis: &CMatrix, outcomes: usize) -> Vec<CMatrix> {
    let n = basis.nrows();
    let mut ps = vec![CMatrix::zeros(n, n); outcomes];
    for (j, col) in basis.column_iter().enumerate() {
        let v = col.into_owned();
        ps[j % outcomes] += &v * v.adjoint();
    }
    ps
}

/// One sweep trial, fully determined by `seed` and the config.
pub fn run_trial(trial: usize, seed: u64, cfg: &SweepConfig) -> NoSignalResult<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim_f = rng.random_range(cfg.min_dim..=cfg.max_dim);
    let dim_b = rng.random_range(cfg.min_dim..=cfg.max_dim);
    let sector = LocalSector::ALL[trial % 3];
    let kind = [
        ChannelKind::Unitary,
        ChannelKind::NonselectiveMeasurement,
        ChannelKind::General,
    ][(trial / 3) % 3];
    let sdims = sector.dims(dim_f, dim_b);
    let sidx = sector.index();
    let ch = match kind {
        ChannelKind::Unitary => {
            let u = random_unitary_from(sdims.total(), &mut rng)?;
            channels::from_unitary(u, sidx, sdims, &Tolerances::default())?
        }
        ChannelKind::NonselectiveMeasurement => {
            let u = random_unitary_from(sdims.total(), &mut rng)?;
            let outcomes = rng
                .random_range(2..=cfg.max_outcomes.max(2))
                .min(sdims.total());
            channels::nonselective_measurement(
                grouped_projectors(&u, outcomes),
                sidx,
                sdims,
                &Tolerances::default(),
            )?
        }
        ChannelKind::General => {
            let k = rng.random_range(2..=cfg.max_kraus.max(2));
            random_channel_from(sidx, sdims, k, &mut rng)?
        }
    };
    let psi = match cfg.initial {
        InitialStates::Branch => random_branch_state(dim_f, dim_b, &mut rng)?.assemble()?,
        InitialStates::Entangled => {
            random_state_from(&HilbertDims::new(vec![2, dim_f, dim_b])?, &mut rng)?
        }
    };
    let d = invariance_check_state(&psi, &ch)?;
    Ok(TrialRecord {
        trial,
        seed,
        kind,
        kraus_count: ch.operators().len(),
        sector,
        dim_f,
        dim_b,
        initial: cfg.initial,
        trace_distance: d,
    })
}

/// Seeded sweep over dims, sectors and channel kinds; records come back in
/// trial order whatever the thread count.
pub fn sweep(cfg: &SweepConfig) -> NoSignalResult<SweepReport> {
    if cfg.trials == 0 {
        return Err(NoSignalError::NoTrials);
    }
    if cfg.min_dim < 2 || cfg.min_dim > cfg.max_dim {
        return Err(NoSignalError::InvalidSweep(format!(
            "dimension range {}..={} must satisfy 2 <= min <= max",
            cfg.min_dim, cfg.max_dim
        )));
    }
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(t, trial_seed(cfg.seed, t as u64), cfg))
        .collect::<NoSignalResult<_>>()?;
    let worst = records.iter().fold(&records[0], |best, r| {
        if r.trace_distance > best.trace_distance {
            r
        } else {
            best
        }
    });
    Ok(SweepReport {
        max_trace_distance: worst.trace_distance,
        worst_seed: worst.seed,
        records,
    })
}

/// Exchanges the two factors of `C^d (x) C^d`.
pub fn swap_factors(d: usize) -> CMatrix {
    let n = d * d;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapScanReport {
    pub trials: usize,
    /// Largest `|<before> - <after>|` of the joint overlap over Haar unitaries.
    pub max_conservation_error: f64,
    /// Evolutions, Haar or swap-after-local, whose branches both factorized.
    pub factorizing: usize,
    pub bound_violations: usize,
    /// Smallest `|<B1|B2>| - |<Psi1|Psi2>|` over factorizing evolutions.
    pub min_bound_margin: f64,
}

/// Outcome of one overlap-scan trial, for the Haar and the built unitary.
struct ScanTrial {
    drift: f64,
    holds: [Option<bool>; 2],
    margin: [Option<f64>; 2],
}

/// Per trial: random `Psi1, Psi2, B0` on equal field and probe dimensions,
/// one Haar unitary on the joint space, and one unitary that factorizes by
/// construction (local unitaries followed by a swap of F and B).
pub fn overlap_scan(
    trials: usize,
    base_seed: u64,
    min_dim: usize,
    max_dim: usize,
) -> NoSignalResult<OverlapScanReport> {
    if trials == 0 {
        return Err(NoSignalError::NoTrials);
    }
    if min_dim < 2 || min_dim > max_dim {
        return Err(NoSignalError::InvalidSweep(format!(
            "dimension range {min_dim}..={max_dim} must satisfy 2 <= min <= max"
        )));
    }
    let per_trial: Vec<ScanTrial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(base_seed, t as u64));
            let d = rng.random_range(min_dim..=max_dim);
            let dims = HilbertDims::new(vec![d])?;
            let p1 = random_state_from(&dims, &mut rng)?;
            let p2 = random_state_from(&dims, &mut rng)?;
            let b0 = random_state_from(&dims, &mut rng)?;
            let haar = random_unitary_from(d * d, &mut rng)?;
            let local =
                random_unitary_from(d, &mut rng)?.kronecker(&random_unitary_from(d, &mut rng)?);
            let built = swap_factors(d) * local;
            let (before, after) = joint_overlap_conservation(&p1, &p2, &b0, &haar)?;
            let mut holds = [None, None];
            let mut margin = [None, None];
            for (k, u) in [&haar, &built].into_iter().enumerate() {
                let r = factorized_bound_check(&p1, &p2, &b0, u)?;
                holds[k] = r.bound_holds;
                margin[k] = r.bob_overlap_after.map(|b| b - r.field_overlap_before);
            }
            Ok(ScanTrial {
                drift: (before - after).norm(),
                holds,
                margin,
            })
        })
        .collect::<NoSignalResult<_>>()?;
    let mut report = OverlapScanReport {
        trials,
        max_conservation_error: 0.0,
        factorizing: 0,
        bound_violations: 0,
        min_bound_margin: f64::INFINITY,
    };
    for ScanTrial {
        drift,
        holds,
        margin,
    } in per_trial
    {
        report.max_conservation_error = report.max_conservation_error.max(drift);
        for h in holds.into_iter().flatten() {
            report.factorizing += 1;
            report.bound_violations += usize::from(!h);
        }
        for m in margin.into_iter().flatten() {
            report.min_bound_margin = report.min_bound_margin.min(m);
        }
    }
    Ok(report)
}
