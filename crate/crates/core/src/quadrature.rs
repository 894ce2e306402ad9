//! Exact product quadratures for normalized Haar measure and for the
//! normalized area measure on the sphere.
//!
//! A rule of band `B` integrates the product of any two band-`B`
//! functions exactly: uniform grids of `2B + 1` angles handle Fourier
//! factors up to frequency `2B`, and `B + 1` Gauss-Legendre nodes in the
//! cosine of the polar angle handle polynomial factors up to degree `2B + 1`.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{Domain, Group, GroupElement, SpherePoint};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let degree = NonZeroUsize::new(n).expect("Gauss-Legendre rule needs at least one node");
    let mut pairs = GaussLegendre::new(degree).into_node_weight_pairs().into_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Nodes and positive weights summing to one.
#[derive(Clone, Debug)]
pub struct QuadratureRule<P> {
    domain: Domain,
    band_limit: usize,
    nodes: Vec<P>,
    weights: Vec<f64>,
}

pub type GroupRule = QuadratureRule<GroupElement>;
pub type SphereRule = QuadratureRule<SpherePoint>;

impl<P> QuadratureRule<P> {
    fn normalized(domain: Domain, band_limit: usize, nodes: Vec<P>, mut weights: Vec<f64>) -> Self {
        let total: f64 = crate::stats::pairwise_sum(&weights);
        for w in weights.iter_mut() {
            *w /= total;
        }
        QuadratureRule {
            domain,
            band_limit,
            nodes,
            weights,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&P) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| f(p) * *w).sum()
    }

    /// Integral of values already sampled at the nodes.
    pub fn integrate_values(&self, values: &[Complex64]) -> Complex64 {
        assert_eq!(values.len(), self.nodes.len(), "one value per node");
        values.iter().zip(&self.weights).map(|(v, w)| v * *w).sum()
    }

    /// `<f, g> = integral of f conj(g)` for sampled values.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        assert_eq!(f.len(), self.nodes.len());
        assert_eq!(g.len(), self.nodes.len());
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b.conj() * *w).sum()
    }

    pub fn l2_norm_sq(&self, f: &[Complex64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a.norm_sqr() * w).sum()
    }
}

/// Product rule for normalized Haar measure, exact for products of two
/// functions of band at most `band_limit`.
pub fn haar_quadrature(group: Group, band_limit: usize) -> Result<GroupRule> {
    if band_limit < 1 {
        return Err(Error::InvalidBand { min: 1, got: band_limit });
    }
    let domain = Domain::Group(group);
    let rule = match group {
        Group::Cyclic { order } => {
            let nodes = (0..order as i64).map(|k| GroupElement::cyclic(order, k)).collect::<Result<Vec<_>>>()?;
            let weights = vec![1.0; nodes.len()];
            QuadratureRule::normalized(domain, band_limit, nodes, weights)
        }
        Group::Circle => {
            let n = 2 * band_limit + 1;
            let nodes = (0..n).map(|k| GroupElement::circle(TAU * k as f64 / n as f64)).collect();
            QuadratureRule::normalized(domain, band_limit, nodes, vec![1.0; n])
        }
        Group::Rotation => {
            let n_ang = 2 * band_limit + 1;
            let (xs, ws) = gauss_legendre(band_limit + 1);
            let mut nodes = Vec::with_capacity(n_ang * n_ang * xs.len());
            let mut weights = Vec::with_capacity(nodes.capacity());
            for i in 0..n_ang {
                let alpha = TAU * i as f64 / n_ang as f64;
                for (x, w) in xs.iter().zip(&ws) {
                    let beta = x.acos();
                    for j in 0..n_ang {
                        let gamma = TAU * j as f64 / n_ang as f64;
                        nodes.push(GroupElement::rotation(alpha, beta, gamma));
                        weights.push(*w);
                    }
                }
            }
            QuadratureRule::normalized(domain, band_limit, nodes, weights)
        }
    };
    Ok(rule)
}

/// Rule for the normalized area measure on the sphere, exact for
/// products of two functions of degree at most `band_limit`.
pub fn sphere_quadrature(band_limit: usize) -> SphereRule {
    let n_phi = 2 * band_limit + 1;
    let (xs, ws) = gauss_legendre(band_limit + 1);
    let mut nodes = Vec::with_capacity(n_phi * xs.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (x, w) in xs.iter().zip(&ws) {
        let theta = x.acos();
        for j in 0..n_phi {
            nodes.push(SpherePoint::new(theta, TAU * j as f64 / n_phi as f64));
            weights.push(*w);
        }
    }
    QuadratureRule::normalized(Domain::Sphere, band_limit, nodes, weights)
}
