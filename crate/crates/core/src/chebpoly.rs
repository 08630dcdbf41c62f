//! Sparse multivariate polynomials in the tensor Chebyshev basis.
//!
//! A [`ChebPoly`] stores plain basis coefficients `c_κ` of
//! `p = Σ c_κ T_κ` with `T_κ(x) = Π T_{κ_i}(x_i)`. The inner-product
//! coefficients `p_κ = ⟨T_κ, p⟩_μ = 2^{-w(κ)} c_κ` only appear where the
//! Chebyshev measure is involved ([`ChebPoly::inner_product`],
//! [`ChebPoly::inner_coeff`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest magnitude are dropped.
pub const CANONICAL_REL_TOL: f64 = 1e-14;

/// Default cap on the number of grid points visited by [`grid_extrema`].
pub const DEFAULT_POINT_BUDGET: u128 = 10_000_000;

/// A multi-index `κ ∈ ℕⁿ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multidegree(Vec<u32>);

impl Multidegree {
    pub fn new(entries: Vec<u32>) -> Self {
        Multidegree(entries)
    }

    pub fn zero(n: usize) -> Self {
        Multidegree(vec![0; n])
    }

    /// Unit multidegree `k·e_var` in `n` variables.
    pub fn axis(n: usize, var: usize, k: u32) -> Self {
        let mut e = vec![0; n];
        e[var] = k;
        Multidegree(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    /// `|κ| = Σ κ_i`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Hamming weight `w(κ)`: number of nonzero entries.
    pub fn weight(&self) -> u32 {
        self.0.iter().filter(|&&k| k != 0).count() as u32
    }

    pub fn max_entry(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl fmt::Debug for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl From<Vec<u32>> for Multidegree {
    fn from(v: Vec<u32>) -> Self {
        Multidegree(v)
    }
}

/// All `κ ∈ ℕⁿ` with `|κ| ≤ d`, in lexicographic order.
pub fn enumerate_multidegrees(n: usize, d: u32) -> Vec<Multidegree> {
    fn rec(prefix: &mut Vec<u32>, n: usize, budget: u32, out: &mut Vec<Multidegree>) {
        if prefix.len() == n {
            out.push(Multidegree(prefix.clone()));
            return;
        }
        for k in 0..=budget {
            prefix.push(k);
            rec(prefix, n, budget - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, d, &mut out);
    out
}

fn check_vars(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn canonicalize(map: &mut BTreeMap<Multidegree, f64>) {
    let max = map.values().fold(0.0f64, |m, c| m.max(c.abs()));
    let cut = CANONICAL_REL_TOL * max;
    map.retain(|_, c| *c != 0.0 && !(c.abs() < cut));
}

fn collect_map<I>(n: usize, terms: I) -> BTreeMap<Multidegree, f64>
where
    I: IntoIterator<Item = (Multidegree, f64)>,
{
    let mut map = BTreeMap::new();
    for (k, c) in terms {
        debug_assert_eq!(k.num_vars(), n);
        *map.entry(k).or_insert(0.0) += c;
    }
    canonicalize(&mut map);
    map
}

/// Accumulates `scale · Π_i (Σ_j a_{ij} T_{k_ij})` into `acc`, where
/// `factors[i]` lists the `(k, a)` pairs of variable `i`.
fn tensor_accumulate(factors: &[Vec<(u32, f64)>], scale: f64, acc: &mut HashMap<Vec<u32>, f64>) {
    let n = factors.len();
    let mut idx = vec![0usize; n];
    if factors.iter().any(|f| f.is_empty()) {
        return;
    }
    loop {
        let mut c = scale;
        let mut key = Vec::with_capacity(n);
        for i in 0..n {
            let (k, a) = factors[i][idx[i]];
            c *= a;
            key.push(k);
        }
        *acc.entry(key).or_insert(0.0) += c;
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            idx[i] += 1;
            if idx[i] < factors[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn from_accumulator(acc: HashMap<Vec<u32>, f64>) -> BTreeMap<Multidegree, f64> {
    let mut map: BTreeMap<Multidegree, f64> =
        acc.into_iter().map(|(k, c)| (Multidegree(k), c)).collect();
    canonicalize(&mut map);
    map
}

/// `T_0(x), …, T_deg(x)` by the three-term recurrence (valid for any real x).
pub fn cheb_values(x: f64, deg: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(deg + 1);
    t.push(1.0);
    if deg >= 1 {
        t.push(x);
    }
    for k in 2..=deg {
        let next = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(next);
    }
    t
}

/// Clenshaw summation of `Σ c_k T_k(x)`.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let two_x = 2.0 * x;
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (1..n).rev() {
        let b = two_x * b1 - b2 + coeffs[k];
        b2 = b1;
        b1 = b;
    }
    coeffs[0] + x * b1 - b2
}

/// Chebyshev coefficients of `x^k` for `k = 0..=deg` (row `k`, length `k+1`).
fn monomial_to_cheb_table(deg: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 1..=deg {
        let prev = &rows[k - 1];
        let mut row = vec![0.0; k + 1];
        for (j, &a) in prev.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            if j == 0 {
                row[1] += a;
            } else {
                row[j + 1] += 0.5 * a;
                row[j - 1] += 0.5 * a;
            }
        }
        rows.push(row);
    }
    rows
}

/// Monomial coefficients of `T_k` for `k = 0..=deg`.
fn cheb_to_monomial_table(deg: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    if deg >= 1 {
        rows.push(vec![0.0, 1.0]);
    }
    for k in 2..=deg {
        let mut row = vec![0.0; k + 1];
        for (j, &a) in rows[k - 1].iter().enumerate() {
            row[j + 1] += 2.0 * a;
        }
        for (j, &a) in rows[k - 2].iter().enumerate() {
            row[j] -= a;
        }
        rows.push(row);
    }
    rows
}

fn sparse_row(row: &[f64]) -> Vec<(u32, f64)> {
    row.iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(j, &a)| (j as u32, a))
        .collect()
}

/// Multivariate polynomial `Σ c_κ T_κ` in canonical sparse form.
#[derive(Clone, PartialEq)]
pub struct ChebPoly {
    num_vars: usize,
    coeffs: BTreeMap<Multidegree, f64>,
}

impl fmt::Debug for ChebPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChebPoly[n={}]{{", self.num_vars)?;
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}: {}", k, c)?;
        }
        write!(f, "}}")
    }
}

impl ChebPoly {
    pub fn zero(num_vars: usize) -> Self {
        assert!(num_vars > 0, "a polynomial needs at least one variable");
        ChebPoly { num_vars, coeffs: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        Self::from_terms(num_vars, [(Multidegree::zero(num_vars), c)])
    }

    /// The basis polynomial `T_κ`.
    pub fn basis(kappa: Multidegree) -> Self {
        let n = kappa.num_vars();
        Self::from_terms(n, [(kappa, 1.0)])
    }

    /// Builds a polynomial from `(κ, c_κ)` pairs; repeated keys are summed.
    ///
    /// Panics if a key has the wrong number of variables.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Multidegree, f64)>,
    {
        assert!(num_vars > 0, "a polynomial needs at least one variable");
        let terms: Vec<_> = terms.into_iter().collect();
        for (k, _) in &terms {
            assert_eq!(k.num_vars(), num_vars, "multidegree arity mismatch");
        }
        ChebPoly { num_vars, coeffs: collect_map(num_vars, terms) }
    }

    /// Univariate polynomial from dense coefficients `c_0, c_1, …`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Self::from_terms(
            1,
            coeffs.iter().enumerate().map(|(k, &c)| (Multidegree(vec![k as u32]), c)),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Multidegree, f64)> + '_ {
        self.coeffs.iter().map(|(k, &c)| (k, c))
    }

    /// Basis coefficient `c_κ` (zero if absent).
    pub fn coeff(&self, kappa: &Multidegree) -> f64 {
        self.coeffs.get(kappa).copied().unwrap_or(0.0)
    }

    /// Inner-product coefficient `p_κ = ⟨T_κ, p⟩_μ = 2^{-w(κ)} c_κ`.
    pub fn inner_coeff(&self, kappa: &Multidegree) -> f64 {
        self.coeff(kappa) * 0.5f64.powi(kappa.weight() as i32)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.total()).max()
    }

    /// Largest per-variable degree `max_κ max_i κ_i` (0 for the zero polynomial).
    pub fn max_var_degree(&self) -> u32 {
        self.coeffs.keys().map(|k| k.max_entry()).max().unwrap_or(0)
    }

    /// Degree in variable `var`.
    pub fn var_degree(&self, var: usize) -> u32 {
        self.coeffs.keys().map(|k| k.entries()[var]).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|k| k.is_zero())
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Multidegree::zero(self.num_vars))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `Σ |c_κ|`, an upper bound on the sup-norm over the cube.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).sum()
    }

    /// Dense coefficient vector of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Vec<f64> {
        assert_eq!(self.num_vars, 1, "univariate_coeffs needs n = 1");
        let len = self.degree().map_or(0, |d| d as usize + 1);
        let mut v = vec![0.0; len];
        for (k, c) in self.terms() {
            v[k.entries()[0] as usize] = c;
        }
        v
    }

    /// Places a univariate polynomial in variable `var` of an `n`-variate space.
    pub fn embed(&self, n: usize, var: usize) -> Self {
        assert_eq!(self.num_vars, 1, "embed needs a univariate polynomial");
        assert!(var < n);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, &c)| (Multidegree::axis(n, var, k.entries()[0]), c))
            .collect();
        ChebPoly { num_vars: n, coeffs }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        check_vars(self.num_vars, point.len())?;
        if self.num_vars == 1 {
            return Ok(clenshaw(&self.univariate_coeffs(), point[0]));
        }
        let tables: Vec<Vec<f64>> = (0..self.num_vars)
            .map(|i| cheb_values(point[i], self.var_degree(i) as usize))
            .collect();
        Ok(self
            .terms()
            .map(|(k, c)| {
                k.entries()
                    .iter()
                    .enumerate()
                    .fold(c, |acc, (i, &ki)| acc * tables[i][ki as usize])
            })
            .sum())
    }

    pub fn add(&self, other: &ChebPoly) -> Result<ChebPoly> {
        check_vars(self.num_vars, other.num_vars)?;
        let mut map = self.coeffs.clone();
        for (k, &c) in &other.coeffs {
            *map.entry(k.clone()).or_insert(0.0) += c;
        }
        canonicalize(&mut map);
        Ok(ChebPoly { num_vars: self.num_vars, coeffs: map })
    }

    pub fn sub(&self, other: &ChebPoly) -> Result<ChebPoly> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> ChebPoly {
        let mut map: BTreeMap<_, _> = self.coeffs.iter().map(|(k, &c)| (k.clone(), a * c)).collect();
        canonicalize(&mut map);
        ChebPoly { num_vars: self.num_vars, coeffs: map }
    }

    /// `p + c·T_0`.
    pub fn add_constant(&self, c: f64) -> ChebPoly {
        self.add(&ChebPoly::constant(self.num_vars, c)).expect("same arity")
    }

    /// Product via per-variable linearization `T_a T_b = (T_{a+b} + T_{|a−b|})/2`.
    pub fn mul(&self, other: &ChebPoly) -> Result<ChebPoly> {
        check_vars(self.num_vars, other.num_vars)?;
        let n = self.num_vars;
        let mut acc: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut factors: Vec<Vec<(u32, f64)>> = vec![Vec::with_capacity(2); n];
        for (ka, &ca) in &self.coeffs {
            for (kb, &cb) in &other.coeffs {
                for i in 0..n {
                    let (a, b) = (ka.0[i], kb.0[i]);
                    factors[i].clear();
                    if a == 0 || b == 0 {
                        factors[i].push((a + b, 1.0));
                    } else {
                        factors[i].push((a + b, 0.5));
                        factors[i].push((a.abs_diff(b), 0.5));
                    }
                }
                tensor_accumulate(&factors, ca * cb, &mut acc);
            }
        }
        Ok(ChebPoly { num_vars: n, coeffs: from_accumulator(acc) })
    }

    /// `⟨p, q⟩_μ = Σ_κ c_κ(p) c_κ(q) 2^{-w(κ)}`.
    pub fn inner_product(&self, other: &ChebPoly) -> Result<f64> {
        check_vars(self.num_vars, other.num_vars)?;
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        Ok(small
            .coeffs
            .iter()
            .filter_map(|(k, &c)| large.coeffs.get(k).map(|&d| c * d * 0.5f64.powi(k.weight() as i32)))
            .sum())
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> ChebPoly {
        assert!(var < self.num_vars);
        let mut terms = Vec::new();
        for (k, &c) in &self.coeffs {
            let deg = k.0[var];
            if deg == 0 {
                continue;
            }
            // d/dx T_k = 2k Σ T_j over j = k-1, k-3, …, with the T_0 term halved.
            let mut j = deg as i64 - 1;
            while j >= 0 {
                let mut key = k.0.clone();
                key[var] = j as u32;
                let factor = if j == 0 { deg as f64 } else { 2.0 * deg as f64 };
                terms.push((Multidegree(key), c * factor));
                j -= 2;
            }
        }
        ChebPoly::from_terms(self.num_vars, terms)
    }

    pub fn gradient(&self) -> Vec<ChebPoly> {
        (0..self.num_vars).map(|i| self.derivative(i)).collect()
    }

    /// Converts a monomial-basis polynomial to the Chebyshev basis.
    pub fn from_monomial(p: &MonoPoly) -> ChebPoly {
        let n = p.num_vars;
        let max_deg = p.coeffs.keys().map(|k| k.max_entry()).max().unwrap_or(0) as usize;
        let table: Vec<Vec<(u32, f64)>> =
            monomial_to_cheb_table(max_deg).iter().map(|r| sparse_row(r)).collect();
        let mut acc = HashMap::new();
        for (alpha, &a) in &p.coeffs {
            let factors: Vec<_> = alpha.0.iter().map(|&e| table[e as usize].clone()).collect();
            tensor_accumulate(&factors, a, &mut acc);
        }
        ChebPoly { num_vars: n, coeffs: from_accumulator(acc) }
    }

    /// Converts to the monomial basis.
    pub fn to_monomial(&self) -> MonoPoly {
        let n = self.num_vars;
        let table: Vec<Vec<(u32, f64)>> = cheb_to_monomial_table(self.max_var_degree() as usize)
            .iter()
            .map(|r| sparse_row(r))
            .collect();
        let mut acc = HashMap::new();
        for (kappa, &c) in &self.coeffs {
            let factors: Vec<_> = kappa.0.iter().map(|&e| table[e as usize].clone()).collect();
            tensor_accumulate(&factors, c, &mut acc);
        }
        MonoPoly { num_vars: n, coeffs: from_accumulator(acc) }
    }
}

/// Multivariate polynomial `Σ a_α x^α` in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MonoPoly {
    num_vars: usize,
    coeffs: BTreeMap<Multidegree, f64>,
}

impl MonoPoly {
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Multidegree, f64)>,
    {
        assert!(num_vars > 0, "a polynomial needs at least one variable");
        let terms: Vec<_> = terms.into_iter().collect();
        for (k, _) in &terms {
            assert_eq!(k.num_vars(), num_vars, "multidegree arity mismatch");
        }
        MonoPoly { num_vars, coeffs: collect_map(num_vars, terms) }
    }

    /// Univariate polynomial from dense coefficients `a_0, a_1, …`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Self::from_terms(
            1,
            coeffs.iter().enumerate().map(|(k, &c)| (Multidegree(vec![k as u32]), c)),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Multidegree, f64)> + '_ {
        self.coeffs.iter().map(|(k, &c)| (k, c))
    }

    pub fn coeff(&self, alpha: &Multidegree) -> f64 {
        self.coeffs.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.total()).max()
    }

    /// Re-embeds the polynomial into `n ≥ num_vars` variables.
    pub fn with_num_vars(&self, n: usize) -> Result<MonoPoly> {
        if n < self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: n });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, &c)| {
                let mut e = k.0.clone();
                e.resize(n, 0);
                (Multidegree(e), c)
            })
            .collect();
        Ok(MonoPoly { num_vars: n, coeffs })
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        check_vars(self.num_vars, point.len())?;
        Ok(self
            .terms()
            .map(|(k, c)| {
                k.0.iter()
                    .zip(point)
                    .fold(c, |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum())
    }
}

/// Ascending Chebyshev–Lobatto nodes `-cos(jπ/m)`, `j = 0..=m`.
pub fn lobatto_nodes(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            if 2 * j == m {
                0.0
            } else {
                -(j as f64 * std::f64::consts::PI / m as f64).cos()
            }
        })
        .collect()
}

/// Width of the Lobatto grid cell containing `x` (grid with `m` cells).
pub fn lobatto_cell_width(x: f64, m: usize) -> f64 {
    let nodes = lobatto_nodes(m);
    let pos = nodes.partition_point(|&t| t <= x);
    let j = pos.clamp(1, m);
    nodes[j] - nodes[j - 1]
}

/// Estimated extrema of a polynomial over `[-1,1]ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridExtrema {
    pub min: f64,
    pub argmin: Vec<f64>,
    pub max: f64,
    pub argmax: Vec<f64>,
}

/// Grid + local refinement estimate of `min`/`max` of `p` over the cube.
///
/// Evaluates `p` on the tensor Chebyshev–Lobatto grid with `points_per_axis`
/// nodes per axis and refines the best few grid points with coordinate-wise
/// golden-section search. Estimates only.
pub fn grid_extrema(p: &ChebPoly, points_per_axis: usize, refine_iters: usize) -> Result<GridExtrema> {
    grid_extrema_with_budget(p, points_per_axis, refine_iters, DEFAULT_POINT_BUDGET)
}

const REFINE_CANDIDATES: usize = 4;

pub fn grid_extrema_with_budget(
    p: &ChebPoly,
    points_per_axis: usize,
    refine_iters: usize,
    budget: u128,
) -> Result<GridExtrema> {
    if points_per_axis < 2 {
        return Err(Error::InvalidArgument("points_per_axis must be at least 2".into()));
    }
    let n = p.num_vars();
    let total = (points_per_axis as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { points: total, budget });
    }
    let m = points_per_axis - 1;
    let nodes = lobatto_nodes(m);

    if p.is_constant() {
        let c = p.constant_term();
        let corner = vec![-1.0; n];
        return Ok(GridExtrema { min: c, argmin: corner.clone(), max: c, argmax: corner });
    }

    // tables[i][k][j] = T_k(nodes[j])
    let tables: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            let deg = p.var_degree(i) as usize;
            let vals: Vec<Vec<f64>> = nodes.iter().map(|&x| cheb_values(x, deg)).collect();
            (0..=deg).map(|k| vals.iter().map(|v| v[k]).collect()).collect()
        })
        .collect();
    let terms: Vec<(Vec<usize>, f64)> = p
        .terms()
        .map(|(k, c)| (k.entries().iter().map(|&e| e as usize).collect(), c))
        .collect();

    let inner: usize = points_per_axis.pow(n as u32 - 1);
    let chunks: Vec<(Vec<(f64, usize)>, Vec<(f64, usize)>)> = (0..points_per_axis)
        .into_par_iter()
        .map(|j0| {
            let mut lows: Vec<(f64, usize)> = Vec::new();
            let mut highs: Vec<(f64, usize)> = Vec::new();
            let mut idx = vec![0usize; n];
            idx[0] = j0;
            for rest in 0..inner {
                let mut r = rest;
                for i in (1..n).rev() {
                    idx[i] = r % points_per_axis;
                    r /= points_per_axis;
                }
                let mut v = 0.0;
                for (k, c) in &terms {
                    let mut t = *c;
                    for i in 0..n {
                        t *= tables[i][k[i]][idx[i]];
                    }
                    v += t;
                }
                let flat = j0 * inner + rest;
                push_best(&mut lows, (v, flat), |a, b| a < b);
                push_best(&mut highs, (v, flat), |a, b| a > b);
            }
            (lows, highs)
        })
        .collect();
    let mut lows = Vec::new();
    let mut highs = Vec::new();
    for (l, h) in chunks {
        for c in l {
            push_best(&mut lows, c, |a, b| a < b);
        }
        for c in h {
            push_best(&mut highs, c, |a, b| a > b);
        }
    }

    let unflatten = |flat: usize| -> Vec<usize> {
        let mut idx = vec![0; n];
        let mut r = flat;
        for i in (0..n).rev() {
            idx[i] = r % points_per_axis;
            r /= points_per_axis;
        }
        idx
    };
    let eval = |x: &[f64]| p.eval(x).expect("arity checked");

    let refine = |cands: &[(f64, usize)], sign: f64| -> (f64, Vec<f64>) {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for &(_, flat) in cands {
            let idx = unflatten(flat);
            let start: Vec<f64> = idx.iter().map(|&j| nodes[j]).collect();
            let widths: Vec<f64> = idx
                .iter()
                .map(|&j| {
                    let left = if j > 0 { nodes[j] - nodes[j - 1] } else { 0.0 };
                    let right = if j < m { nodes[j + 1] - nodes[j] } else { 0.0 };
                    left.max(right)
                })
                .collect();
            let (v, x) = coordinate_search(&|x: &[f64]| sign * eval(x), start, &widths, refine_iters);
            let better = match &best {
                None => true,
                Some((bv, bx)) => v < *bv || (v == *bv && x < *bx),
            };
            if better {
                best = Some((v, x));
            }
        }
        let (v, x) = best.expect("at least one candidate");
        (sign * v, x)
    };

    let (min, argmin) = refine(&lows, 1.0);
    let (max, argmax) = refine(&highs, -1.0);
    Ok(GridExtrema { min, argmin, max, argmax })
}

/// Keeps the `REFINE_CANDIDATES` best entries, ordered best first; ties keep
/// the smaller flat index.
fn push_best(list: &mut Vec<(f64, usize)>, cand: (f64, usize), better: impl Fn(f64, f64) -> bool) {
    let pos = list
        .iter()
        .position(|&(v, i)| better(cand.0, v) || (cand.0 == v && cand.1 < i))
        .unwrap_or(list.len());
    if pos < REFINE_CANDIDATES {
        list.insert(pos, cand);
        list.truncate(REFINE_CANDIDATES);
    }
}

const GOLDEN_STEPS: usize = 60;

/// Coordinate-wise golden-section descent within `[x_i - w_i, x_i + w_i] ∩ [-1,1]`.
fn coordinate_search(
    f: &dyn Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    widths: &[f64],
    sweeps: usize,
) -> (f64, Vec<f64>) {
    let mut best = f(&x);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..sweeps {
        let before = best;
        for i in 0..x.len() {
            if widths[i] == 0.0 {
                continue;
            }
            let mut lo = (x[i] - widths[i]).max(-1.0);
            let mut hi = (x[i] + widths[i]).min(1.0);
            let mut probe = x.clone();
            let at = |t: f64, probe: &mut Vec<f64>| {
                probe[i] = t;
                f(probe)
            };
            let mut c = hi - inv_phi * (hi - lo);
            let mut d = lo + inv_phi * (hi - lo);
            let mut fc = at(c, &mut probe);
            let mut fd = at(d, &mut probe);
            for _ in 0..GOLDEN_STEPS {
                if fc < fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - inv_phi * (hi - lo);
                    fc = at(c, &mut probe);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + inv_phi * (hi - lo);
                    fd = at(d, &mut probe);
                }
            }
            for t in [lo, hi, 0.5 * (lo + hi)] {
                let v = at(t, &mut probe);
                if v < best {
                    best = v;
                    x[i] = t;
                }
            }
        }
        if best >= before {
            break;
        }
    }
    (best, x)
}
