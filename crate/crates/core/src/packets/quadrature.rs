//! Tensor-product Gauss-Hermite quadrature for overlaps of Gaussian packets.
//!
//! This is an arbiter for the closed forms in the parent module: it
//! evaluates the packet wavefunctions pointwise on a grid and never uses
//! the overlap formulas. Each term is integrated on its own grid, centered
//! where the bra-ket product peaks and somewhat wider than it, with the
//! order raised until successive estimates agree.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{
    entangled_pair_state, entangled_pair_translation_overlap, single_overlap, GaussianPacket,
    PacketError, PacketSuperposition,
};

pub const MAX_DIMS: usize = 4;
const ORDERS: [usize; 9] = [8, 12, 16, 20, 24, 32, 40, 48, 64];
const REL_TOL: f64 = 1e-12;
/// Grid scale relative to the spread of the bra-ket product; above 1 so the
/// weighted integrand is not a constant and the order sequence does work.
const SCALE: f64 = 1.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand spans {0} real dimensions, at most {MAX_DIMS} supported")]
    TooManyDims(usize),
    #[error("bra and ket structure differ: {0}")]
    Structure(String),
    #[error("no convergence up to order {order}: last change {change:e}")]
    NonConvergence { order: usize, change: f64 },
    #[error(transparent)]
    Packet(#[from] PacketError),
}

/// Nodes and weights for `int exp(-t^2) f(t) dt ~ sum_i w_i f(t_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi
    /// matrix with off-diagonal `sqrt(k/2)`; weights are `sqrt(pi)` times
    /// the squared first eigenvector components.
    pub fn new(n: usize) -> Self {
        let mut j = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = (k as f64 / 2.0).sqrt();
            j[(k - 1, k)] = b;
            j[(k, k - 1)] = b;
        }
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// `coefficient * int prod_p bra_p(x_p) ket_p(x_p) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTerm {
    pub coefficient: Complex64,
    pub bra: Vec<GaussianPacket>,
    pub ket: Vec<GaussianPacket>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    pub terms: Vec<OverlapTerm>,
}

impl Integrand {
    pub fn single(p: &GaussianPacket, q: &GaussianPacket) -> Self {
        Self {
            terms: vec![OverlapTerm {
                coefficient: Complex64::new(1.0, 0.0),
                bra: vec![p.clone()],
                ket: vec![q.clone()],
            }],
        }
    }

    /// All term pairs of `<bra|ket>`.
    pub fn overlap(bra: &PacketSuperposition, ket: &PacketSuperposition) -> Self {
        let mut terms = Vec::new();
        for (ci, si) in bra.terms() {
            for (cj, sj) in ket.terms() {
                terms.push(OverlapTerm {
                    coefficient: ci.conj() * cj,
                    bra: si.packets().to_vec(),
                    ket: sj.packets().to_vec(),
                });
            }
        }
        Self { terms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Sum over terms of the last change in the estimate.
    pub error_estimate: f64,
    /// Highest order used by any term.
    pub order: usize,
}

struct Axis {
    bra_particle: usize,
    coord: usize,
    center: f64,
    scale: f64,
}

fn axes(term: &OverlapTerm) -> Result<Vec<Axis>, QuadratureError> {
    if term.bra.len() != term.ket.len() {
        return Err(QuadratureError::Structure(format!(
            "{} vs {} particles",
            term.bra.len(),
            term.ket.len()
        )));
    }
    let mut out = Vec::new();
    for (p, (b, k)) in term.bra.iter().zip(&term.ket).enumerate() {
        if b.dim() != k.dim() {
            return Err(QuadratureError::Structure(format!(
                "particle {p}: {} vs {} coordinates",
                b.dim(),
                k.dim()
            )));
        }
        // The product of the two packets peaks at the precision-weighted mean
        // with spread sigma, 1/(2 sigma^2) = 1/(4 wb^2) + 1/(4 wk^2).
        let (pb, pk) = (b.width().powi(-2), k.width().powi(-2));
        let sigma = (2.0 / (pb + pk)).sqrt();
        for c in 0..b.dim() {
            out.push(Axis {
                bra_particle: p,
                coord: c,
                center: (pb * b.center()[c] + pk * k.center()[c]) / (pb + pk),
                scale: SCALE * sigma,
            });
        }
    }
    if out.len() > MAX_DIMS {
        return Err(QuadratureError::TooManyDims(out.len()));
    }
    Ok(out)
}

fn integrate_term_at(term: &OverlapTerm, axes: &[Axis], rule: &GaussHermite) -> f64 {
    let n = rule.nodes.len();
    let dims = axes.len();
    // per axis: x(i) and the Jacobian-weighted factor w_i exp(t_i^2) sqrt(2) s
    let xs: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| {
            rule.nodes
                .iter()
                .map(|t| a.center + std::f64::consts::SQRT_2 * a.scale * t)
                .collect()
        })
        .collect();
    let fs: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| w * (t * t).exp() * std::f64::consts::SQRT_2 * a.scale)
                .collect()
        })
        .collect();
    let mut point: Vec<Vec<f64>> = term.bra.iter().map(|p| vec![0.0; p.dim()]).collect();
    let mut idx = vec![0usize; dims];
    let mut sum = 0.0;
    loop {
        let mut weight = 1.0;
        for (k, a) in axes.iter().enumerate() {
            point[a.bra_particle][a.coord] = xs[k][idx[k]];
            weight *= fs[k][idx[k]];
        }
        let g: f64 = term
            .bra
            .iter()
            .zip(&term.ket)
            .zip(&point)
            .map(|((b, k), x)| b.amplitude(x) * k.amplitude(x))
            .product();
        sum += weight * g;
        // odometer
        let mut k = 0;
        loop {
            if k == dims {
                return sum;
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Integrates every term, raising the order until two successive
/// estimates differ by less than `1e-12` relative.
pub fn integrate(integrand: &Integrand) -> Result<QuadratureResult, QuadratureError> {
    let rules: Vec<GaussHermite> = ORDERS.iter().map(|&n| GaussHermite::new(n)).collect();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error_estimate = 0.0;
    let mut order = 0;
    for term in &integrand.terms {
        let ax = axes(term)?;
        let mut prev = integrate_term_at(term, &ax, &rules[0]);
        let mut done = None;
        let mut change = f64::INFINITY;
        for rule in &rules[1..] {
            let cur = integrate_term_at(term, &ax, rule);
            change = (cur - prev).abs();
            if change <= REL_TOL * cur.abs() {
                done = Some((cur, change, rule.nodes.len()));
                break;
            }
            prev = cur;
        }
        let (v, ch, n) = done.ok_or(QuadratureError::NonConvergence {
            order: *ORDERS.last().unwrap(),
            change,
        })?;
        value += term.coefficient * v;
        error_estimate += term.coefficient.norm() * ch;
        order = order.max(n);
    }
    Ok(QuadratureResult {
        value,
        error_estimate,
        order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureComparison {
    pub displacement: f64,
    pub width: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub relative_error: f64,
}

/// Closed-form overlap of two equal-width packets against the quadrature.
pub fn compare_single(
    p: &GaussianPacket,
    q: &GaussianPacket,
) -> Result<QuadratureComparison, QuadratureError> {
    let closed_form = single_overlap(p, q)?;
    let quadrature = integrate(&Integrand::single(p, q))?.value.re;
    let displacement = p
        .center()
        .iter()
        .zip(q.center())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(QuadratureComparison {
        displacement,
        width: p.width(),
        closed_form,
        quadrature,
        relative_error: (quadrature - closed_form).abs() / closed_form,
    })
}

/// The entangled pair's normalized overlap with its translate by `eps`
/// along x, closed form against quadrature of both inner products.
pub fn compare_pair_translation(
    a: f64,
    delta: f64,
    eps: f64,
) -> Result<QuadratureComparison, QuadratureError> {
    let closed_form = entangled_pair_translation_overlap(a, delta, eps)?.exact;
    let psi = entangled_pair_state(a, delta)?;
    let shifted = psi.translated(&[eps, 0.0])?;
    let cross = integrate(&Integrand::overlap(&psi, &shifted))?.value.re;
    let norm = integrate(&Integrand::overlap(&psi, &psi))?.value.re;
    let quadrature = cross / norm;
    Ok(QuadratureComparison {
        displacement: eps,
        width: delta,
        closed_form,
        quadrature,
        relative_error: (quadrature - closed_form).abs() / closed_form,
    })
}

/// `count` seeded planar pairs: width in `[0.2, 3]`, displacement up to
/// six widths in a random direction.
pub fn sample_comparisons(
    count: usize,
    seed: u64,
) -> Result<Vec<QuadratureComparison>, QuadratureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let width = rng.random_range(0.2..3.0);
            let r = rng.random_range(0.0..6.0) * width;
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let origin = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let p = GaussianPacket::new(origin.to_vec(), width)?;
            let q = p.translated(&[r * theta.cos(), r * theta.sin()])?;
            compare_single(&p, &q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::{entangled_pair_state, single_overlap};

    fn packet(center: &[f64], width: f64) -> GaussianPacket {
        GaussianPacket::new(center.to_vec(), width).unwrap()
    }

    #[test]
    fn three_point_rule_matches_tables() {
        let r = GaussHermite::new(3);
        let x = (1.5f64).sqrt();
        let sp = std::f64::consts::PI.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-14 && r.nodes[1].abs() < 1e-14);
        assert!((r.nodes[2] - x).abs() < 1e-14);
        assert!((r.weights[0] - sp / 6.0).abs() < 1e-14);
        assert!((r.weights[1] - 2.0 * sp / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rule_integrates_polynomial_moments() {
        // int exp(-t^2) t^4 dt = 3 sqrt(pi) / 4
        let r = GaussHermite::new(8);
        let m4: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(t, w)| w * t.powi(4))
            .sum();
        assert!((m4 - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn normalized_packet_integrates_to_one() {
        for (c, w) in [
            (vec![0.0], 1.0),
            (vec![2.0, -1.0], 0.3),
            (vec![0.0, 0.0, 5.0], 4.0),
        ] {
            let p = packet(&c, w);
            let r = integrate(&Integrand::single(&p, &p)).unwrap();
            assert!((r.value.re - 1.0).abs() < 1e-12, "{r:?}");
            assert!(r.error_estimate < 1e-10);
        }
    }

    #[test]
    fn reproduces_single_overlap() {
        let p = packet(&[0.0, 0.0], 0.8);
        let q = packet(&[1.6, 0.0], 0.8);
        let r = integrate(&Integrand::single(&p, &q)).unwrap();
        let closed = single_overlap(&p, &q).unwrap();
        assert!((r.value.re - closed).abs() < 1e-8 * closed);
    }

    #[test]
    fn unequal_widths_match_the_general_formula() {
        // int psi_1 psi_2 = (2 d1 d2 / (d1^2 + d2^2))^(D/2) exp(-r^2 / (4 (d1^2 + d2^2)))
        let (d1, d2) = (0.5, 1.7);
        let p = packet(&[0.0, 1.0], d1);
        let q = packet(&[0.7, -0.2], d2);
        let r2 = 0.7f64 * 0.7 + 1.2 * 1.2;
        let s = d1 * d1 + d2 * d2;
        let want = (2.0 * d1 * d2 / s) * (-r2 / (4.0 * s)).exp();
        let got = integrate(&Integrand::single(&p, &q)).unwrap().value.re;
        assert!((got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn entangled_pair_norm_includes_cross_term() {
        let (a, delta) = (1.5, 1.0);
        let psi = entangled_pair_state(a, delta).unwrap();
        let r = integrate(&Integrand::overlap(&psi, &psi)).unwrap();
        let want = 1.0 + (-(a * a) / (2.0 * delta * delta)).exp();
        assert!((r.value.re - want).abs() < 1e-10);
    }

    #[test]
    fn too_many_dims_rejected() {
        let p = packet(&[0.0, 0.0, 0.0], 1.0);
        let t = OverlapTerm {
            coefficient: Complex64::new(1.0, 0.0),
            bra: vec![p.clone(), p.clone()],
            ket: vec![p.clone(), p],
        };
        assert_eq!(
            integrate(&Integrand { terms: vec![t] }),
            Err(QuadratureError::TooManyDims(6))
        );
    }

    #[test]
    fn sampled_comparisons_agree() {
        let c = sample_comparisons(10, 1).unwrap();
        assert_eq!(c.len(), 10);
        assert!(c.iter().all(|x| x.relative_error < 1e-8));
        assert_eq!(c, sample_comparisons(10, 1).unwrap());
    }

    #[test]
    fn pair_translation_agrees_with_quadrature() {
        let c = compare_pair_translation(1.2, 0.8, 0.3).unwrap();
        assert!(c.relative_error < 1e-10, "{c:?}");
    }
}
