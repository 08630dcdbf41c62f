//! Tensor Gauss–Chebyshev quadrature for the Chebyshev measure on the cube.

use std::f64::consts::PI;

use crate::chebpoly::ChebPoly;
use crate::error::{Error, Result};

/// Default cap on the number of tensor nodes.
pub const DEFAULT_NODE_BUDGET: u128 = 10_000_000;

/// Nodes and positive weights integrating polynomials against `μ`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    num_vars: usize,
    axis_nodes: Vec<f64>,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    exact_degree: u32,
}

/// Result of [`QuadratureRule::integrate`]. `exact` is false when some
/// per-variable degree exceeds the rule's exactness degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub exact: bool,
}

/// `m` Gauss–Chebyshev nodes `cos((2j−1)π/(2m))`, `j = 1..=m`.
pub fn gauss_chebyshev_nodes(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|j| {
            if 2 * j - 1 == m {
                0.0
            } else {
                ((2 * j - 1) as f64 * PI / (2 * m) as f64).cos()
            }
        })
        .collect()
}

/// Tensor product of the `m`-point Gauss–Chebyshev rule in `n` variables.
pub fn gauss_chebyshev(n: usize, m: usize) -> Result<QuadratureRule> {
    gauss_chebyshev_with_budget(n, m, DEFAULT_NODE_BUDGET)
}

pub fn gauss_chebyshev_with_budget(n: usize, m: usize, budget: u128) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one variable".into()));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node per axis".into()));
    }
    let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { points: total, budget });
    }
    let axis_nodes = gauss_chebyshev_nodes(m);
    let count = total as usize;
    let w = 1.0 / count as f64;
    let mut nodes = Vec::with_capacity(count);
    for flat in 0..count {
        let mut r = flat;
        let mut point = vec![0.0; n];
        for i in (0..n).rev() {
            point[i] = axis_nodes[r % m];
            r /= m;
        }
        nodes.push(point);
    }
    Ok(QuadratureRule {
        num_vars: n,
        axis_nodes,
        nodes,
        weights: vec![w; count],
        exact_degree: (2 * m - 1) as u32,
    })
}

impl QuadratureRule {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The univariate nodes the tensor rule is built from.
    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    /// Per-variable exactness degree `2m − 1`.
    pub fn exact_degree(&self) -> u32 {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of node `flat` along each axis (row-major, last axis fastest).
    pub fn node_axis_indices(&self, flat: usize) -> Vec<usize> {
        let m = self.axis_nodes.len();
        let mut r = flat;
        let mut idx = vec![0; self.num_vars];
        for i in (0..self.num_vars).rev() {
            idx[i] = r % m;
            r /= m;
        }
        idx
    }

    /// `Σ w_i f(y_i)` for an arbitrary function of the node.
    pub fn sum<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(y, w)| w * f(y)).sum()
    }

    pub fn integrate(&self, p: &ChebPoly) -> Result<Integral> {
        if p.num_vars() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: p.num_vars() });
        }
        let value = self.sum(|y| p.eval(y).expect("arity checked"));
        Ok(Integral { value, exact: p.max_var_degree() <= self.exact_degree })
    }
}
