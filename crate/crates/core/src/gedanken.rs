//! Scenario-level physics of the Alice-field-Bob setup.
//!
//! Causal-window inequalities, decoherence accumulated over many traps
//! (separable and entangled), the sphere-arrangement estimate and the
//! spacelike bookkeeping behind it. Units have `c = hbar = 1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::packets::{single_overlap, GaussianPacket, PacketError};
use crate::qcore::{self, QError, SectorIndex, StateVector};

/// Largest trap count for the dense tensor models.
pub const MAX_BRUTE_FORCE_TRAPS: usize = 8;
/// `N eps` below this is treated as the linear regime.
pub const LINEAR_REGIME: f64 = 0.1;
/// `(N eps)^2 / 2` at the edge of the linear regime, which bounds the
/// error of `1 - N eps` inside it.
pub const LINEARIZATION_BOUND: f64 = LINEAR_REGIME * LINEAR_REGIME / 2.0;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GedankenError {
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Alice-Bob distance D must be positive")]
    ZeroDistance,
    #[error("per-trap epsilon must lie in [0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("trap count must be at least 1")]
    NoTraps,
    #[error("{count} traps exceed the dense-model limit of {max}")]
    TooManyTraps { count: usize, max: usize },
    #[error("coefficients have squared norm {0}, expected 1")]
    Unnormalized(f64),
    #[error("phi must satisfy 0 < phi < 1 (T_B = phi l spacelike), got {0}")]
    PhiOutOfRange(f64),
    #[error("solid angle must lie in (0, 4 pi], got {0}")]
    SolidAngleOutOfRange(f64),
    #[error("sphere radius l must be positive, got {0}")]
    ZeroRadius(f64),
    #[error("sphere radii must be strictly increasing ({0} then {1})")]
    OverlappingRadii(f64, f64),
    #[error("the sphere arrangement has no gravitational counterpart")]
    GravitationalSpheres,
    #[error("branch model: {0}")]
    BranchModel(String),
    #[error(transparent)]
    Packet(#[from] PacketError),
    #[error(transparent)]
    Q(#[from] QError),
}

pub type GedankenResult<T> = Result<T, GedankenError>;

fn non_negative(name: &'static str, value: f64) -> GedankenResult<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GedankenError::Negative { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> GedankenResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GedankenError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Electromagnetic,
    Gravitational,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::Electromagnetic, Regime::Gravitational];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Electromagnetic => "electromagnetic",
            Regime::Gravitational => "gravitational",
        }
    }

    /// Power of `D` in the source's natural scale: dipole ~ length,
    /// quadrupole ~ length squared.
    fn order(self) -> i32 {
        match self {
            Regime::Electromagnetic => 1,
            Regime::Gravitational => 2,
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "electromagnetic" | "em" => Ok(Regime::Electromagnetic),
            "gravitational" | "grav" => Ok(Regime::Gravitational),
            other => Err(format!("unknown regime '{other}'")),
        }
    }
}

/// Parameters of one run of the thought experiment. The dipole and Bob's
/// charge are ignored in the gravitational regime and the quadrupole in
/// the electromagnetic one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Alice-Bob separation `D`.
    pub distance: f64,
    /// Separation `d` of Alice's two paths.
    pub path_separation: f64,
    pub t_alice: f64,
    pub t_bob: f64,
    /// Effective dipole moment `q_A d`.
    pub dipole: f64,
    /// Effective quadrupole moment.
    pub quadrupole: f64,
    pub charge_bob: f64,
    pub mass_bob: f64,
    pub regime: Regime,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            distance: 1.0,
            path_separation: 0.0,
            t_alice: 0.0,
            t_bob: 0.0,
            dipole: 0.0,
            quadrupole: 0.0,
            charge_bob: 1.0,
            mass_bob: 1.0,
            regime: Regime::Electromagnetic,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> GedankenResult<()> {
        non_negative("distance", self.distance)?;
        non_negative("path_separation", self.path_separation)?;
        non_negative("t_alice", self.t_alice)?;
        non_negative("t_bob", self.t_bob)?;
        non_negative("dipole", self.dipole)?;
        non_negative("quadrupole", self.quadrupole)?;
        non_negative("charge_bob", self.charge_bob)?;
        non_negative("mass_bob", self.mass_bob)?;
        Ok(())
    }

    /// Dipole or quadrupole, whichever the regime uses.
    pub fn source(&self) -> f64 {
        match self.regime {
            Regime::Electromagnetic => self.dipole,
            Regime::Gravitational => self.quadrupole,
        }
    }

    /// `q_B / m_B`, the width of Bob's packet in the sphere estimate.
    pub fn charge_to_mass(&self) -> GedankenResult<f64> {
        positive("mass_bob", self.mass_bob)?;
        Ok(self.charge_bob / self.mass_bob)
    }

    /// Both durations shorter than the light travel time between the labs.
    pub fn in_causal_window(&self) -> bool {
        self.t_alice < self.distance && self.t_bob < self.distance
    }
}

/// Alice can recombine without radiating which-path information:
/// dipole < T_A, or quadrupole < T_A^2.
pub fn alice_coherence_ok(s: &Scenario) -> bool {
    match s.regime {
        Regime::Electromagnetic => s.dipole < s.t_alice,
        Regime::Gravitational => s.quadrupole < s.t_alice * s.t_alice,
    }
}

/// Bob's particle is displaced by more than its spread within T_B:
/// `(dipole / D^3) T_B^2 > 1`, or `(quadrupole / D^4) T_B^2 > 1`.
pub fn bob_can_decohere(s: &Scenario) -> GedankenResult<bool> {
    if s.distance == 0.0 {
        return Err(GedankenError::ZeroDistance);
    }
    let d = s.distance;
    let tb2 = s.t_bob * s.t_bob;
    Ok(match s.regime {
        Regime::Electromagnetic => s.dipole / d.powi(3) * tb2 > 1.0,
        Regime::Gravitational => s.quadrupole / d.powi(4) * tb2 > 1.0,
    })
}

/// Grid for the causal-window scan. Each of the four axes has `n` points:
/// `D` log-spaced over `[1e-2, 1e2]`, `T_A = u D` and `T_B = v D` with
/// `u, v = k / (n + 1)`, and `source = 2 w D^k` with `w = j / (n + 1)`
/// (`k = 1` for a dipole, `2` for a quadrupole), so the source runs past
/// the coherence threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
}

impl GridSpec {
    pub fn points(&self) -> u64 {
        (self.n as u64).pow(4)
    }

    fn distance(&self, i: usize) -> f64 {
        if self.n <= 1 {
            1.0
        } else {
            10f64.powf(-2.0 + 4.0 * i as f64 / (self.n - 1) as f64)
        }
    }

    fn fraction(&self, k: usize) -> f64 {
        (k + 1) as f64 / (self.n + 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPoint {
    pub distance: f64,
    pub t_alice: f64,
    pub t_bob: f64,
    pub source: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowCertificate {
    pub regime: Regime,
    pub grid_points: u64,
    pub evaluated: u64,
    /// Points where Alice stays coherent inside the causal window.
    pub premise_holds: u64,
    /// Points where Bob could decohere, premise or not.
    pub bob_decoheres: u64,
    pub counterexamples: u64,
    pub first_counterexample: Option<WindowPoint>,
}

impl WindowCertificate {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0 && self.evaluated == self.grid_points
    }
}

#[derive(Default)]
struct Tally {
    evaluated: u64,
    premise: u64,
    bob: u64,
    counter: u64,
    first: Option<WindowPoint>,
}

fn scan_distance(grid: GridSpec, regime: Regime, i: usize) -> Tally {
    let n = grid.n;
    let d = grid.distance(i);
    let scale = d.powi(regime.order());
    let mut t = Tally::default();
    for a in 0..n {
        for b in 0..n {
            for w in 0..n {
                let p = WindowPoint {
                    distance: d,
                    t_alice: grid.fraction(a) * d,
                    t_bob: grid.fraction(b) * d,
                    source: 2.0 * grid.fraction(w) * scale,
                };
                let s = Scenario {
                    distance: p.distance,
                    t_alice: p.t_alice,
                    t_bob: p.t_bob,
                    dipole: p.source,
                    quadrupole: p.source,
                    regime,
                    ..Scenario::default()
                };
                t.evaluated += 1;
                let premise = alice_coherence_ok(&s) && s.in_causal_window();
                let bob = bob_can_decohere(&s).unwrap_or(false);
                t.premise += premise as u64;
                t.bob += bob as u64;
                if premise && bob {
                    t.counter += 1;
                    t.first.get_or_insert(p);
                }
            }
        }
    }
    t
}

/// Exhaustively checks that coherence for Alice inside the causal window
/// leaves Bob unable to decohere her.
pub fn no_superluminal_window(grid: GridSpec, regime: Regime) -> WindowCertificate {
    let tallies: Vec<Tally> = (0..grid.n)
        .into_par_iter()
        .map(|i| scan_distance(grid, regime, i))
        .collect();
    let mut cert = WindowCertificate {
        regime,
        grid_points: grid.points(),
        evaluated: 0,
        premise_holds: 0,
        bob_decoheres: 0,
        counterexamples: 0,
        first_counterexample: None,
    };
    for t in tallies {
        cert.evaluated += t.evaluated;
        cert.premise_holds += t.premise;
        cert.bob_decoheres += t.bob;
        cert.counterexamples += t.counter;
        if cert.first_counterexample.is_none() {
            cert.first_counterexample = t.first;
        }
    }
    cert
}

/// `N` traps, each reducing the branch overlap by a factor `1 - eps`,
/// optionally in a superposition of trap configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapArray {
    count: usize,
    per_trap_epsilon: f64,
    coefficients: Option<Vec<Complex64>>,
}

fn check_epsilon(eps: f64) -> GedankenResult<f64> {
    if (0.0..1.0).contains(&eps) {
        Ok(eps)
    } else {
        Err(GedankenError::EpsilonOutOfRange(eps))
    }
}

fn check_coefficients(c: &[Complex64]) -> GedankenResult<()> {
    let n2: f64 = c.iter().map(|a| a.norm_sqr()).sum();
    if c.is_empty() || (n2 - 1.0).abs() > NORM_TOL {
        return Err(GedankenError::Unnormalized(n2));
    }
    Ok(())
}

impl TrapArray {
    pub fn new(
        count: usize,
        per_trap_epsilon: f64,
        coefficients: Option<Vec<Complex64>>,
    ) -> GedankenResult<Self> {
        if count == 0 {
            return Err(GedankenError::NoTraps);
        }
        check_epsilon(per_trap_epsilon)?;
        if let Some(c) = &coefficients {
            check_coefficients(c)?;
        }
        Ok(Self {
            count,
            per_trap_epsilon,
            coefficients,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn per_trap_epsilon(&self) -> f64 {
        self.per_trap_epsilon
    }

    pub fn coefficients(&self) -> Option<&[Complex64]> {
        self.coefficients.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtrapOverlap {
    pub exact: f64,
    pub linearized: f64,
    pub n_epsilon: f64,
    /// `N eps` inside the linear regime.
    pub valid: bool,
}

/// `(1 - eps)^N` and its linearization `1 - N eps`.
pub fn ntrap_overlap(t: &TrapArray) -> NtrapOverlap {
    let eps = t.per_trap_epsilon;
    let n_epsilon = t.count as f64 * eps;
    NtrapOverlap {
        exact: (1.0 - eps).powi(t.count as i32),
        linearized: (1.0 - n_epsilon).max(0.0),
        n_epsilon,
        valid: n_epsilon < LINEAR_REGIME,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtrapRow {
    pub count: usize,
    pub overlap: NtrapOverlap,
    /// `|exact - linearized|`.
    pub linearization_error: f64,
    /// Dense-model visibility, for counts up to the dense limit.
    pub brute_force: Option<f64>,
    pub brute_force_error: Option<f64>,
}

/// One row per trap count `1..=N` of `t`.
pub fn ntrap_rows(t: &TrapArray) -> GedankenResult<Vec<NtrapRow>> {
    (1..=t.count)
        .map(|n| {
            let overlap = ntrap_overlap(&TrapArray::new(n, t.per_trap_epsilon, None)?);
            let brute_force = if n <= MAX_BRUTE_FORCE_TRAPS {
                Some(ntrap_brute_force(n, t.per_trap_epsilon)?)
            } else {
                None
            };
            Ok(NtrapRow {
                count: n,
                overlap,
                linearization_error: (overlap.exact - overlap.linearized).abs(),
                brute_force,
                brute_force_error: brute_force.map(|b| (b - overlap.exact).abs()),
            })
        })
        .collect()
}

/// Trap states `L = |0>` and `R = (1 - eps)|0> + sqrt(1 - (1 - eps)^2)|1>`.
fn trap_pair(eps: f64) -> GedankenResult<(StateVector, StateVector)> {
    let o = 1.0 - eps;
    let l = StateVector::from_real(&[1.0, 0.0])?;
    let r = StateVector::from_real(&[o, (1.0 - o * o).max(0.0).sqrt()])?;
    Ok((l, r))
}

/// Visibility of Alice's path qubit after `n` traps, from the explicit
/// state `(|0> L^n + |1> R^n) / sqrt 2` and its reduced density matrix.
pub fn ntrap_brute_force(n: usize, eps: f64) -> GedankenResult<f64> {
    if n == 0 {
        return Err(GedankenError::NoTraps);
    }
    if n > MAX_BRUTE_FORCE_TRAPS {
        return Err(GedankenError::TooManyTraps {
            count: n,
            max: MAX_BRUTE_FORCE_TRAPS,
        });
    }
    check_epsilon(eps)?;
    let (l, r) = trap_pair(eps)?;
    let mut left = StateVector::from_real(&[1.0, 0.0])?;
    let mut right = StateVector::from_real(&[0.0, 1.0])?;
    for _ in 0..n {
        left = left.tensor(&l)?;
        right = right.tensor(&r)?;
    }
    let psi = left
        .add(&right)?
        .scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    let rho_a = psi.to_density().partial_trace(&SectorIndex::single(0))?;
    Ok(qcore::visibility(&rho_a)?)
}

/// One separable trap configuration: the per-trap states that go with
/// Alice's left and right paths.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapBranch {
    pub left: Vec<Vec<Complex64>>,
    pub right: Vec<Vec<Complex64>>,
}

/// Superposition `sum_i a_i |psi^i>` of separable trap configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledTrapModel {
    coefficients: Vec<Complex64>,
    branches: Vec<TrapBranch>,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_unit(v: &[Complex64]) -> GedankenResult<()> {
    let n2 = inner(v, v).re;
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(GedankenError::BranchModel(format!(
            "trap state has squared norm {n2}"
        )));
    }
    Ok(())
}

impl EntangledTrapModel {
    pub fn new(coefficients: Vec<Complex64>, branches: Vec<TrapBranch>) -> GedankenResult<Self> {
        check_coefficients(&coefficients)?;
        if coefficients.len() != branches.len() {
            return Err(GedankenError::BranchModel(format!(
                "{} coefficients for {} branches",
                coefficients.len(),
                branches.len()
            )));
        }
        let traps = branches[0].left.len();
        if traps == 0 {
            return Err(GedankenError::NoTraps);
        }
        let dim = branches[0].left[0].len();
        for b in &branches {
            if b.left.len() != traps || b.right.len() != traps {
                return Err(GedankenError::BranchModel(
                    "branches disagree on the trap count".into(),
                ));
            }
            for v in b.left.iter().chain(&b.right) {
                if v.len() != dim {
                    return Err(GedankenError::BranchModel(format!(
                        "trap state of length {} in a model of dimension {dim}",
                        v.len()
                    )));
                }
                check_unit(v)?;
            }
        }
        Ok(Self {
            coefficients,
            branches,
        })
    }

    /// Each branch lives in its own two-dimensional block of every trap,
    /// shifted off `|0>` by `eps`, and mixed with amplitude `leak` into a
    /// state shared by all branches. Cross overlaps are `leak^(2N)`, so
    /// `leak = 0` makes them vanish.
    pub fn block_model(
        coefficients: Vec<Complex64>,
        traps: usize,
        eps: f64,
        leak: f64,
    ) -> GedankenResult<Self> {
        check_epsilon(eps)?;
        if !(0.0..=1.0).contains(&leak) {
            return Err(GedankenError::BranchModel(format!(
                "leak must lie in [0, 1], got {leak}"
            )));
        }
        let m = coefficients.len();
        let dim = 2 * m + 1;
        let own = (1.0 - leak * leak).sqrt();
        let o = 1.0 - eps;
        let s = (1.0 - o * o).max(0.0).sqrt();
        let branches = (0..m)
            .map(|i| {
                let mut l = vec![Complex64::new(0.0, 0.0); dim];
                l[2 * i] = Complex64::new(own, 0.0);
                l[2 * m] = Complex64::new(leak, 0.0);
                let mut r = l.clone();
                r[2 * i] = Complex64::new(own * o, 0.0);
                r[2 * i + 1] = Complex64::new(own * s, 0.0);
                TrapBranch {
                    left: vec![l; traps],
                    right: vec![r; traps],
                }
            })
            .collect();
        Self::new(coefficients, branches)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn branches(&self) -> &[TrapBranch] {
        &self.branches
    }

    pub fn traps(&self) -> usize {
        self.branches[0].left.len()
    }

    pub fn trap_dim(&self) -> usize {
        self.branches[0].left[0].len()
    }

    /// `<psi^i_L | psi^j_R>` as a product over traps.
    pub fn branch_overlap(&self, i: usize, j: usize) -> Complex64 {
        let (a, b) = (&self.branches[i], &self.branches[j]);
        a.left
            .iter()
            .zip(&b.right)
            .map(|(l, r)| inner(l, r))
            .product()
    }
}

/// `m` equal real amplitudes `1 / sqrt(m)`.
pub fn uniform_coefficients(m: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0 / (m as f64).sqrt(), 0.0); m]
}

/// Parameters of a block model, kept alongside it for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub branches: usize,
    pub traps: usize,
    pub eps: f64,
    pub leak: f64,
}

/// Seeded [`EntangledTrapModel::block_model`] with 1 to `max_branches`
/// Gaussian-random coefficients, 1 to `max_traps` traps, `eps` in
/// `[0, 0.5)` and `leak` in `[0, max_leak]`.
pub fn random_block_model(
    seed: u64,
    max_branches: usize,
    max_traps: usize,
    max_leak: f64,
) -> GedankenResult<(BlockParams, EntangledTrapModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=max_branches.max(1));
    let traps = rng.random_range(1..=max_traps.max(1));
    let eps = rng.random_range(0.0..0.5);
    let leak = rng.random::<f64>() * max_leak;
    let raw: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let coefficients = raw.into_iter().map(|z| z / norm).collect();
    let params = BlockParams {
        branches: m,
        traps,
        eps,
        leak,
    };
    Ok((
        params,
        EntangledTrapModel::block_model(coefficients, traps, eps, leak)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledOverlap {
    /// Full `<Psi_L | Psi_R>` including cross terms.
    pub exact: Complex64,
    /// Diagonal part `sum_i |a_i|^2 <psi^i_L | psi^i_R>`.
    pub approx: Complex64,
    /// `sum_{i != j} |a_i a_j|` times the largest cross overlap.
    pub cross_bound: f64,
}

impl EntangledOverlap {
    pub fn deviation(&self) -> f64 {
        (self.exact - self.approx).norm()
    }

    pub fn bound_holds(&self) -> bool {
        self.deviation() <= self.cross_bound
    }
}

pub fn entangled_traps_overlap(model: &EntangledTrapModel) -> EntangledOverlap {
    let a = &model.coefficients;
    let m = a.len();
    let mut exact = Complex64::new(0.0, 0.0);
    let mut approx = Complex64::new(0.0, 0.0);
    let mut weight = 0.0;
    let mut max_cross: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let o = model.branch_overlap(i, j);
            let term = a[i].conj() * a[j] * o;
            exact += term;
            if i == j {
                approx += term;
            } else {
                weight += (a[i] * a[j]).norm();
                max_cross = max_cross.max(o.norm());
            }
        }
    }
    EntangledOverlap {
        exact,
        approx,
        cross_bound: weight * max_cross,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPairReport {
    /// Overlap of the normalized pair state with its translate.
    pub exact: f64,
    /// `exp(-eps^2 / (4 delta^2))`.
    pub gaussian: f64,
    /// `(1 - e)^2` with `e = eps^2 / (8 delta^2)`.
    pub squared_linear: f64,
}

impl PlanarPairReport {
    /// `|exact - gaussian|`.
    pub fn gaussian_error(&self) -> f64 {
        (self.exact - self.gaussian).abs()
    }
}

/// Two particles entangled along x or y, translated by `eps` along x.
pub fn planar_pair_example(a: f64, delta: f64, eps: f64) -> GedankenResult<PlanarPairReport> {
    let o = crate::packets::entangled_pair_translation_overlap(a, delta, eps)?;
    let e = eps * eps / (8.0 * delta * delta);
    Ok(PlanarPairReport {
        exact: o.exact,
        gaussian: (-2.0 * e).exp(),
        squared_linear: (1.0 - e).powi(2),
    })
}

/// A patch of traps at radius `l` around Alice, released when a light
/// signal from the outermost sphere arrives, with Bob's time `T_B = phi l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereArrangement {
    radius: f64,
    density: f64,
    phi: f64,
    solid_angle: f64,
}

pub const FULL_SPHERE: f64 = 4.0 * std::f64::consts::PI;

fn check_solid_angle(omega: f64) -> GedankenResult<f64> {
    if omega > 0.0 && omega <= FULL_SPHERE {
        Ok(omega)
    } else {
        Err(GedankenError::SolidAngleOutOfRange(omega))
    }
}

impl SphereArrangement {
    pub fn new(radius: f64, density: f64, phi: f64, solid_angle: f64) -> GedankenResult<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GedankenError::ZeroRadius(radius));
        }
        positive("density", density)?;
        if !(phi > 0.0 && phi < 1.0) {
            return Err(GedankenError::PhiOutOfRange(phi));
        }
        check_solid_angle(solid_angle)?;
        Ok(Self {
            radius,
            density,
            phi,
            solid_angle,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn solid_angle(&self) -> f64 {
        self.solid_angle
    }

    /// `rho Omega l^2`, kept real.
    pub fn trap_count(&self) -> f64 {
        self.density * self.solid_angle * self.radius * self.radius
    }

    /// Typical nearest-neighbour spacing on the sphere, `rho^(-1/2)`.
    pub fn spacing(&self) -> f64 {
        self.density.powf(-0.5)
    }
}

/// `(q_B / m_B) dipole phi^2 / l`. Accepts `phi = 1` as the limiting case.
pub fn displacement_bound(sigma: f64, dipole: f64, phi: f64, radius: f64) -> GedankenResult<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GedankenError::ZeroRadius(radius));
    }
    Ok(sigma * dipole * phi * phi / radius)
}

/// `exp(-Omega rho dipole^2 phi^4 / 8)`, the total overlap of one sphere
/// patch. It has no `l` in it.
pub fn sphere_total_closed_form(
    solid_angle: f64,
    density: f64,
    dipole: f64,
    phi: f64,
) -> GedankenResult<f64> {
    check_solid_angle(solid_angle)?;
    non_negative("density", density)?;
    Ok((-solid_angle * density * dipole * dipole * phi.powi(4) / 8.0).exp())
}

fn require_em(s: &Scenario) -> GedankenResult<()> {
    match s.regime {
        Regime::Electromagnetic => Ok(()),
        Regime::Gravitational => Err(GedankenError::GravitationalSpheres),
    }
}

pub fn sphere_displacement(sa: &SphereArrangement, s: &Scenario) -> GedankenResult<f64> {
    require_em(s)?;
    displacement_bound(s.charge_to_mass()?, s.dipole, sa.phi, sa.radius)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereOverlap {
    pub displacement: f64,
    /// Overlap of one trapped particle's two branches.
    pub single: f64,
    pub trap_count: f64,
    /// `floor(trap_count)`, for integer cross-checks.
    pub trap_count_floor: u64,
    /// Closed form, identical for every radius.
    pub total: f64,
    /// `single^trap_count`, which agrees with `total` up to rounding.
    pub total_from_single: f64,
}

/// Bob-style packets of width `q_B / m_B` displaced by the field of
/// Alice's dipole, on every trap of the patch.
pub fn sphere_overlap(sa: &SphereArrangement, s: &Scenario) -> GedankenResult<SphereOverlap> {
    let displacement = sphere_displacement(sa, s)?;
    let sigma = s.charge_to_mass()?;
    let l = GaussianPacket::new(vec![0.0], sigma)?;
    let r = GaussianPacket::new(vec![displacement], sigma)?;
    let single = single_overlap(&l, &r)?;
    let trap_count = sa.trap_count();
    Ok(SphereOverlap {
        displacement,
        single,
        trap_count,
        trap_count_floor: trap_count.floor() as u64,
        total: sphere_total_closed_form(sa.solid_angle, sa.density, s.dipole, sa.phi)?,
        total_from_single: single.powf(trap_count),
    })
}

impl SphereOverlap {
    /// `|total_from_single - total|` in units of its rounding allowance
    /// `(4 ulp N + 1e-12) total`; rounding in `single`, which sits near 1,
    /// is amplified `N` times.
    pub fn rounding_ratio(&self) -> f64 {
        let allowance = (4.0 * f64::EPSILON * self.trap_count + 1e-12) * self.total;
        (self.total_from_single - self.total).abs() / allowance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackReport {
    pub per_sphere: Vec<SphereOverlap>,
    pub total: f64,
    /// Smallest of the in-sphere spacings and the radial gaps.
    pub min_pair_distance: f64,
}

/// Concentric patches ordered by increasing radius.
pub fn multi_sphere_stack(
    spheres: &[SphereArrangement],
    s: &Scenario,
) -> GedankenResult<StackReport> {
    for w in spheres.windows(2) {
        if w[1].radius <= w[0].radius {
            return Err(GedankenError::OverlappingRadii(w[0].radius, w[1].radius));
        }
    }
    let per_sphere = spheres
        .iter()
        .map(|sa| sphere_overlap(sa, s))
        .collect::<GedankenResult<Vec<_>>>()?;
    let total = per_sphere.iter().map(|o| o.total).product();
    let spacing = spheres
        .iter()
        .map(|sa| sa.spacing())
        .fold(f64::INFINITY, f64::min);
    let gap = spheres
        .windows(2)
        .map(|w| w[1].radius - w[0].radius)
        .fold(f64::INFINITY, f64::min);
    Ok(StackReport {
        per_sphere,
        total,
        min_pair_distance: spacing.min(gap),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: [f64; 3],
}

impl SpacetimeEvent {
    pub fn new(t: f64, x: [f64; 3]) -> Self {
        Self { t, x }
    }
}

pub fn spacelike_separated(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> bool {
    let dx: f64 =
        e1.x.iter()
            .zip(&e2.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
    dx > (e1.t - e2.t).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReleaseCheck {
    pub radius: f64,
    pub release: SpacetimeEvent,
    /// `l > T_A + (l_max - l)`.
    pub condition: bool,
    pub spacelike_from_start: bool,
    pub spacelike_from_end: bool,
}

impl ReleaseCheck {
    /// The sufficient condition is honoured by both ends of Alice's run.
    pub fn consistent(&self) -> bool {
        !self.condition || (self.spacelike_from_start && self.spacelike_from_end)
    }
}

/// A light signal sent inward from the outermost radius at `t = 0`
/// releases the traps at radius `l` at `t = l_max - l`. Each release is
/// compared with Alice's interval at the origin, `t` in `[0, T_A]`.
pub fn release_coordination(radii: &[f64], t_alice: f64) -> Vec<ReleaseCheck> {
    let l_max = radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = SpacetimeEvent::new(0.0, [0.0; 3]);
    let end = SpacetimeEvent::new(t_alice, [0.0; 3]);
    radii
        .iter()
        .map(|&l| {
            let release = SpacetimeEvent::new(l_max - l, [l, 0.0, 0.0]);
            ReleaseCheck {
                radius: l,
                release,
                condition: l > t_alice + (l_max - l),
                spacelike_from_start: spacelike_separated(&release, &start),
                spacelike_from_end: spacelike_separated(&release, &end),
            }
        })
        .collect()
}
