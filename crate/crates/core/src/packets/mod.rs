//! Closed-form overlaps of Gaussian wave packets.
//!
//! Packets are real and normalized,
//! `psi(x) = (2 pi delta^2)^(-d/4) exp(-|x - c|^2 / (4 delta^2))`,
//! so `delta` is the position standard deviation of `|psi|^2`. With equal
//! widths the overlap of two packets is `exp(-|c_p - c_q|^2 / (8 delta^2))`.

pub mod quadrature;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PacketError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("closed forms need equal widths ({0} vs {1})")]
    UnequalWidths(f64, f64),
    #[error("spatial dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("states have different particle counts ({0} vs {1})")]
    ParticleCountMismatch(usize, usize),
    #[error("a state needs at least one {0}")]
    Empty(&'static str),
}

pub type PacketResult<T> = Result<T, PacketError>;

fn positive(name: &'static str, value: f64) -> PacketResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(PacketError::NonPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> PacketResult<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(PacketError::Negative { name, value })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    center: Vec<f64>,
    width: f64,
}

impl GaussianPacket {
    pub fn new(center: Vec<f64>, width: f64) -> PacketResult<Self> {
        positive("width", width)?;
        if center.is_empty() {
            return Err(PacketError::Empty("coordinate"));
        }
        Ok(Self { center, width })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn translated(&self, shift: &[f64]) -> PacketResult<Self> {
        if shift.len() != self.dim() {
            return Err(PacketError::DimensionMismatch(self.dim(), shift.len()));
        }
        Ok(Self {
            center: self.center.iter().zip(shift).map(|(c, s)| c + s).collect(),
            width: self.width,
        })
    }

    /// Wavefunction value at `x`.
    pub fn amplitude(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let w2 = self.width * self.width;
        let r2: f64 = self
            .center
            .iter()
            .zip(x)
            .map(|(c, x)| (x - c) * (x - c))
            .sum();
        (2.0 * std::f64::consts::PI * w2).powf(-d / 4.0) * (-r2 / (4.0 * w2)).exp()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `<p|q>` for equal-width packets.
pub fn single_overlap(p: &GaussianPacket, q: &GaussianPacket) -> PacketResult<f64> {
    if p.dim() != q.dim() {
        return Err(PacketError::DimensionMismatch(p.dim(), q.dim()));
    }
    if p.width != q.width {
        return Err(PacketError::UnequalWidths(p.width, q.width));
    }
    let d2 = squared_distance(&p.center, &q.center);
    Ok((-d2 / (8.0 * p.width * p.width)).exp())
}

/// Product of single-particle packets, one per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketProductState {
    packets: Vec<GaussianPacket>,
}

impl PacketProductState {
    pub fn new(packets: Vec<GaussianPacket>) -> PacketResult<Self> {
        let first = packets.first().ok_or(PacketError::Empty("particle"))?;
        if let Some(p) = packets.iter().find(|p| p.dim() != first.dim()) {
            return Err(PacketError::DimensionMismatch(first.dim(), p.dim()));
        }
        Ok(Self { packets })
    }

    /// Particles with the given centers, all of width `width`.
    pub fn from_centers(centers: &[Vec<f64>], width: f64) -> PacketResult<Self> {
        Self::new(
            centers
                .iter()
                .map(|c| GaussianPacket::new(c.clone(), width))
                .collect::<PacketResult<_>>()?,
        )
    }

    pub fn packets(&self) -> &[GaussianPacket] {
        &self.packets
    }

    pub fn spatial_dim(&self) -> usize {
        self.packets[0].dim()
    }

    /// Rigid translation of every particle.
    pub fn translated(&self, shift: &[f64]) -> PacketResult<Self> {
        Ok(Self {
            packets: self
                .packets
                .iter()
                .map(|p| p.translated(shift))
                .collect::<PacketResult<_>>()?,
        })
    }

    /// Mean particle position (equal masses).
    pub fn center_of_mass(&self) -> Vec<f64> {
        let n = self.packets.len() as f64;
        (0..self.spatial_dim())
            .map(|k| self.packets.iter().map(|p| p.center[k]).sum::<f64>() / n)
            .collect()
    }

    /// Standard deviation of each center-of-mass coordinate.
    pub fn center_of_mass_spread(&self) -> f64 {
        let n = self.packets.len() as f64;
        self.packets
            .iter()
            .map(|p| p.width * p.width)
            .sum::<f64>()
            .sqrt()
            / n
    }
}

/// `prod_i <p_i|q_i>`.
pub fn product_overlap(s1: &PacketProductState, s2: &PacketProductState) -> PacketResult<f64> {
    if s1.packets.len() != s2.packets.len() {
        return Err(PacketError::ParticleCountMismatch(
            s1.packets.len(),
            s2.packets.len(),
        ));
    }
    s1.packets
        .iter()
        .zip(&s2.packets)
        .try_fold(1.0, |acc, (p, q)| Ok(acc * single_overlap(p, q)?))
}

/// `sum_i c_i |product_i>`; coefficients are taken as given, not normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSuperposition {
    terms: Vec<(Complex64, PacketProductState)>,
}

impl PacketSuperposition {
    pub fn new(terms: Vec<(Complex64, PacketProductState)>) -> PacketResult<Self> {
        let (_, first) = terms.first().ok_or(PacketError::Empty("term"))?;
        for (_, t) in &terms {
            if t.packets.len() != first.packets.len() {
                return Err(PacketError::ParticleCountMismatch(
                    first.packets.len(),
                    t.packets.len(),
                ));
            }
            if t.spatial_dim() != first.spatial_dim() {
                return Err(PacketError::DimensionMismatch(
                    first.spatial_dim(),
                    t.spatial_dim(),
                ));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Complex64, PacketProductState)] {
        &self.terms
    }

    pub fn translated(&self, shift: &[f64]) -> PacketResult<Self> {
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|(c, t)| Ok((*c, t.translated(shift)?)))
                .collect::<PacketResult<_>>()?,
        })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PacketSuperposition) -> PacketResult<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ci, si) in &self.terms {
            for (cj, sj) in &other.terms {
                acc += ci.conj() * cj * product_overlap(si, sj)?;
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> PacketResult<f64> {
        Ok(self.inner(self)?.re)
    }
}

/// Two particles in a plane, `(x1, x2)` at `(+a x, -a x)` or `(+a y, -a y)`,
/// each term with coefficient `1/sqrt(2)`.
pub fn entangled_pair_state(a: f64, delta: f64) -> PacketResult<PacketSuperposition> {
    positive("a", a)?;
    positive("delta", delta)?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PacketSuperposition::new(vec![(h, along_x(a, delta)?), (h, along_y(a, delta)?)])
}

fn along_x(a: f64, delta: f64) -> PacketResult<PacketProductState> {
    PacketProductState::from_centers(&[vec![a, 0.0], vec![-a, 0.0]], delta)
}

fn along_y(a: f64, delta: f64) -> PacketResult<PacketProductState> {
    PacketProductState::from_centers(&[vec![0.0, a], vec![0.0, -a]], delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTranslationOverlap {
    /// Overlap of the exactly normalized pair state with its translate.
    pub exact: f64,
    /// `exp(-(2a^2 + eps^2)/(4 delta^2)) + exp(-eps^2/(4 delta^2))`, which
    /// takes the `1/sqrt(2)` prefactor as the normalization.
    pub unnormalized_formula: f64,
}

/// Overlap of the entangled pair state with itself translated by `eps` along x.
pub fn entangled_pair_translation_overlap(
    a: f64,
    delta: f64,
    eps: f64,
) -> PacketResult<PairTranslationOverlap> {
    non_negative("eps", eps)?;
    let psi = entangled_pair_state(a, delta)?;
    let shifted = psi.translated(&[eps, 0.0])?;
    let exact = psi.inner(&shifted)?.re / psi.norm_sqr()?;
    let w = 4.0 * delta * delta;
    let unnormalized_formula = (-(2.0 * a * a + eps * eps) / w).exp() + (-(eps * eps) / w).exp();
    Ok(PairTranslationOverlap {
        exact,
        unnormalized_formula,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComCounterexample {
    pub com_mean_1: Vec<f64>,
    pub com_mean_2: Vec<f64>,
    /// Standard deviation of each center-of-mass coordinate (same for both).
    pub com_spread: f64,
    /// Two-particle overlap of the x- and y-aligned configurations.
    pub full_overlap_exact: f64,
    /// The printed value `exp(-a^2 / (4 delta^2))`.
    pub quoted_value: f64,
}

impl ComCounterexample {
    /// `ln(exact) / ln(printed)`; 2 when the printed value is the
    /// single-particle factor rather than the two-particle product.
    pub fn exponent_ratio(&self) -> f64 {
        self.full_overlap_exact.ln() / self.quoted_value.ln()
    }

    pub fn values_agree(&self, tol: f64) -> bool {
        (self.full_overlap_exact - self.quoted_value).abs() <= tol
    }
}

/// Two configurations with identical center-of-mass statistics but
/// nearly orthogonal two-particle states.
pub fn com_counterexample(a: f64, delta: f64) -> PacketResult<ComCounterexample> {
    positive("a", a)?;
    positive("delta", delta)?;
    let x = along_x(a, delta)?;
    let y = along_y(a, delta)?;
    Ok(ComCounterexample {
        com_mean_1: x.center_of_mass(),
        com_mean_2: y.center_of_mass(),
        com_spread: x.center_of_mass_spread(),
        full_overlap_exact: product_overlap(&x, &y)?,
        quoted_value: (-(a * a) / (4.0 * delta * delta)).exp(),
    })
}
