//! Schmüdgen-type certificates on the cube built from the Jackson kernel,
//! their verification by re-expansion, and kernel lower bounds.
//!
//! For `g = K_r⁻¹(f + η) ≥ 0`, quadrature gives
//! `f + η = Σ_i w_i g(y_i) Π_j K_r(x_j, y_ij)`, and every univariate slice
//! splits as `σ₀ + (1 − x²)σ₁`. Expanding the products over the variables
//! yields `f + η = Σ_J σ_J Π_{j∈J} (1 − x_j²)`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::chebpoly::{grid_extrema, lobatto_cell_width, ChebPoly, GridExtrema, Multidegree};
use crate::error::{Error, Result};
use crate::jackson::JacksonSpectrum;
use crate::kernelop::{apply_inverse, constant_c, theorem_threshold};
use crate::quadrature::gauss_chebyshev;
use crate::sos1d::{decompose_slice, PreorderPair1D, NONNEG_GATE, RECONSTRUCTION_TOL};

/// Node weights `w_i g(y_i)` in `[-NODE_CLAMP, 0]` are dropped; below aborts.
pub const NODE_CLAMP: f64 = 1e-12;

const REFINE_ITERS: usize = 30;

/// Points per axis used by the nonnegativity gate and the bound routines.
pub fn default_grid(n: usize) -> usize {
    match n {
        0 | 1 => 4097,
        2 => 513,
        3 => 65,
        _ => 17,
    }
}

/// One term `scale · root²` of some `σ_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSquare {
    pub scale: f64,
    pub root: ChebPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmudgenCertificate {
    pub num_vars: usize,
    pub r: u32,
    pub eta: f64,
    /// `J` (sorted variable indices) to the squares of `σ_J`.
    pub terms: BTreeMap<Vec<usize>, Vec<WeightedSquare>>,
    /// Relative coefficient mismatch of the re-expansion against `f + η`.
    pub residual: f64,
}

impl SchmudgenCertificate {
    pub fn num_squares(&self) -> usize {
        self.terms.values().map(Vec::len).sum()
    }

    /// `Σ_J σ_J Π_{j∈J}(1 − x_j²)`.
    pub fn reconstruct(&self) -> ChebPoly {
        reconstruct_terms(self.num_vars, &self.terms)
    }

    pub fn is_valid(&self) -> bool {
        self.residual <= RECONSTRUCTION_TOL
    }
}

fn generator(n: usize, j: usize) -> ChebPoly {
    ChebPoly::univariate(&[0.5, 0.0, -0.5]).embed(n, j)
}

fn reconstruct_terms(n: usize, terms: &BTreeMap<Vec<usize>, Vec<WeightedSquare>>) -> ChebPoly {
    let mut acc = ChebPoly::zero(n);
    for (subset, squares) in terms {
        let parts: Vec<ChebPoly> = squares
            .par_iter()
            .map(|s| s.root.mul(&s.root).expect("arity checked").scale(s.scale))
            .collect();
        let mut sigma = ChebPoly::zero(n);
        for p in &parts {
            sigma = sigma.add(p).expect("arity checked");
        }
        for &j in subset {
            sigma = sigma.mul(&generator(n, j)).expect("arity checked");
        }
        acc = acc.add(&sigma).expect("arity checked");
    }
    acc
}

fn relative_mismatch(recon: &ChebPoly, target: &ChebPoly) -> f64 {
    let diff = recon.sub(target).expect("arity checked").max_abs_coeff();
    let scale = target.max_abs_coeff();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Outcome of [`verify`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub residual: f64,
    /// Number of variables and every `J` are well formed.
    pub shape_ok: bool,
    pub scales_positive: bool,
    /// Every `σ_J g_J` has per-variable degree at most `r + 1`.
    pub degrees_ok: bool,
    pub max_var_degree: u32,
    pub max_total_degree: u32,
    pub squares_per_subset: BTreeMap<Vec<usize>, usize>,
}

impl VerifyReport {
    pub fn is_valid(&self) -> bool {
        self.shape_ok && self.scales_positive && self.degrees_ok && self.residual <= RECONSTRUCTION_TOL
    }

    pub fn num_squares(&self) -> usize {
        self.squares_per_subset.values().sum()
    }
}

/// Re-expands the certificate and compares it against `f + η`.
pub fn verify(cert: &SchmudgenCertificate, f: &ChebPoly) -> VerifyReport {
    let n = cert.num_vars;
    let shape_ok = f.num_vars() == n
        && cert.terms.keys().all(|j| j.windows(2).all(|w| w[0] < w[1]) && j.iter().all(|&i| i < n))
        && cert.terms.values().flatten().all(|s| s.root.num_vars() == n);
    let scales_positive = cert.terms.values().flatten().all(|s| s.scale > 0.0 && s.scale.is_finite());
    let squares_per_subset = cert.terms.iter().map(|(j, s)| (j.clone(), s.len())).collect();
    if !shape_ok {
        return VerifyReport {
            residual: f64::INFINITY,
            shape_ok,
            scales_positive,
            degrees_ok: false,
            max_var_degree: 0,
            max_total_degree: 0,
            squares_per_subset,
        };
    }

    let mut max_var_degree = 0;
    let mut max_total_degree = 0;
    for (subset, squares) in &cert.terms {
        for s in squares {
            if s.root.is_zero() {
                continue;
            }
            let mut total = 0;
            for i in 0..n {
                let d = 2 * s.root.var_degree(i) + if subset.contains(&i) { 2 } else { 0 };
                max_var_degree = max_var_degree.max(d);
                total += d;
            }
            max_total_degree = max_total_degree.max(total);
        }
    }
    let target = f.add_constant(cert.eta);
    let residual = relative_mismatch(&cert.reconstruct(), &target);
    VerifyReport {
        residual: if residual.is_finite() { residual } else { f64::INFINITY },
        shape_ok,
        scales_positive,
        degrees_ok: max_var_degree <= cert.r + 1,
        max_var_degree,
        max_total_degree,
        squares_per_subset,
    }
}

/// Product `Π_i q_i(x_i)` of univariate factors, one per variable.
fn tensor_product(factors: &[&ChebPoly]) -> ChebPoly {
    let n = factors.len();
    let coeffs: Vec<Vec<f64>> = factors.iter().map(|q| q.univariate_coeffs()).collect();
    if coeffs.iter().any(|c| c.is_empty()) {
        return ChebPoly::zero(n);
    }
    let mut terms = Vec::new();
    let mut idx = vec![0usize; n];
    'outer: loop {
        let c: f64 = (0..n).map(|i| coeffs[i][idx[i]]).product();
        if c != 0.0 {
            terms.push((Multidegree::new(idx.iter().map(|&k| k as u32).collect()), c));
        }
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] < coeffs[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    ChebPoly::from_terms(n, terms)
}

/// All squares `Π_i q_i` for one quadrature node, grouped by `J`.
fn node_squares(scale: f64, pairs: &[&PreorderPair1D]) -> Vec<(Vec<usize>, WeightedSquare)> {
    let n = pairs.len();
    let mut out = Vec::new();
    for mask in 0..(1usize << n) {
        let lists: Vec<&Vec<ChebPoly>> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { &pairs[i].sigma1 } else { &pairs[i].sigma0 })
            .collect();
        if lists.iter().any(|l| l.is_empty()) {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let mut pick = vec![0usize; n];
        'outer: loop {
            let factors: Vec<&ChebPoly> = (0..n).map(|i| &lists[i][pick[i]]).collect();
            out.push((subset.clone(), WeightedSquare { scale, root: tensor_product(&factors) }));
            for i in (0..n).rev() {
                pick[i] += 1;
                if pick[i] < lists[i].len() {
                    continue 'outer;
                }
                pick[i] = 0;
            }
            break;
        }
    }
    out
}

fn check_eta(eta: f64) -> Result<()> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::InvalidArgument(format!("η must be finite and nonnegative, got {eta}")));
    }
    Ok(())
}

/// Builds a certificate of `f + η` in the preordering generated by the
/// `1 − x_j²`.
pub fn certify(f: &ChebPoly, eta: f64, r: u32) -> Result<SchmudgenCertificate> {
    check_eta(eta)?;
    let n = f.num_vars();
    if n == 0 {
        return Err(Error::InvalidArgument("polynomial has no variables".into()));
    }
    let target = f.add_constant(eta);
    let degree = target.max_var_degree();
    if degree > r {
        return Err(Error::DegreeExceeds { degree, r });
    }

    let mut terms: BTreeMap<Vec<usize>, Vec<WeightedSquare>> = BTreeMap::new();
    if target.is_constant() {
        let c = target.constant_term();
        if c < 0.0 {
            return Err(Error::NotCertifiable { min_value: c });
        }
        if c > 0.0 {
            terms.insert(Vec::new(), vec![WeightedSquare { scale: c, root: ChebPoly::constant(n, 1.0) }]);
        }
        return finish(n, r, eta, terms, &target);
    }

    let g = apply_inverse(&target, r)?;
    let ext = grid_extrema(&g, default_grid(n), REFINE_ITERS)?;
    if ext.min < -NONNEG_GATE * target.l1_norm() {
        return Err(Error::NotCertifiable { min_value: ext.min });
    }

    let rule = gauss_chebyshev(n, r as usize + 1)?;
    let spec = JacksonSpectrum::new(r);
    let slices: Vec<PreorderPair1D> = rule
        .axis_nodes()
        .par_iter()
        .map(|&y| decompose_slice(&spec, y))
        .collect::<Result<_>>()?;

    let mut weights = Vec::with_capacity(rule.len());
    for (y, w) in rule.nodes().iter().zip(rule.weights()) {
        let v = w * g.eval(y)?;
        if v < -NODE_CLAMP {
            return Err(Error::NotCertifiable { min_value: v / w });
        }
        weights.push(v);
    }
    let per_node: Vec<Vec<(Vec<usize>, WeightedSquare)>> = (0..rule.len())
        .into_par_iter()
        .map(|k| {
            if weights[k] <= 0.0 {
                return Vec::new();
            }
            let idx = rule.node_axis_indices(k);
            let pairs: Vec<&PreorderPair1D> = idx.iter().map(|&a| &slices[a]).collect();
            node_squares(weights[k], &pairs)
        })
        .collect();
    for (subset, sq) in per_node.into_iter().flatten() {
        terms.entry(subset).or_default().push(sq);
    }
    finish(n, r, eta, terms, &target)
}

fn finish(
    n: usize,
    r: u32,
    eta: f64,
    terms: BTreeMap<Vec<usize>, Vec<WeightedSquare>>,
    target: &ChebPoly,
) -> Result<SchmudgenCertificate> {
    let residual = relative_mismatch(&reconstruct_terms(n, &terms), target);
    if !(residual <= RECONSTRUCTION_TOL) {
        return Err(Error::ResidualTooLarge { residual });
    }
    Ok(SchmudgenCertificate { num_vars: n, r, eta, terms, residual })
}

/// Lower bound from the kernel operator together with the convergence check.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub r: u32,
    pub lambda_star: f64,
    pub fmin_est: f64,
    pub fmax_est: f64,
    /// `fmin_est − lambda_star`.
    pub gap: f64,
    /// Safety margin subtracted from the refined minimum of `K_r⁻¹ f`.
    pub delta: f64,
    pub c_used: f64,
    pub threshold: f64,
    /// `(fmax_est − fmin_est) · c_used / r²`.
    pub bound: f64,
    /// `None` when `r` is below the threshold or `f` is constant.
    pub theorem_satisfied: Option<bool>,
}

impl BoundReport {
    /// `r² · gap`.
    pub fn scaled_gap(&self) -> f64 {
        (self.r as f64).powi(2) * self.gap
    }
}

fn safety_margin(p: &ChebPoly, ext: &GridExtrema, grid: usize) -> f64 {
    let n = p.num_vars();
    if p.is_constant() {
        return 0.0;
    }
    let widths: Vec<f64> = ext.argmin.iter().map(|&x| lobatto_cell_width(x, grid - 1)).collect();
    let grad = p.gradient();
    let mut worst = 0.0f64;
    for corner in 0..(1usize << n) {
        let point: Vec<f64> = (0..n)
            .map(|i| {
                let s = if corner >> i & 1 == 1 { 1.0 } else { -1.0 };
                (ext.argmin[i] + s * widths[i]).clamp(-1.0, 1.0)
            })
            .collect();
        let rise: f64 = grad
            .iter()
            .zip(&widths)
            .map(|(d, w)| d.eval(&point).expect("arity checked").abs() * w)
            .sum();
        worst = worst.max(rise);
    }
    worst
}

/// `λ* = min K_r⁻¹ f − δ`, a lower bound for `f` on the cube.
pub fn kernel_lower_bound(f: &ChebPoly, r: u32, grid: usize) -> Result<BoundReport> {
    let n = f.num_vars();
    if n == 0 {
        return Err(Error::InvalidArgument("polynomial has no variables".into()));
    }
    let g = apply_inverse(f, r)?;
    let ge = grid_extrema(&g, grid, REFINE_ITERS)?;
    let fe = grid_extrema(f, grid, REFINE_ITERS)?;
    let delta = safety_margin(&g, &ge, grid);
    let lambda_star = ge.min - delta;
    let gap = fe.min - lambda_star;
    let d = f.degree().unwrap_or(0);
    let (c_used, threshold, bound, theorem_satisfied) = if d == 0 {
        (0.0, 0.0, 0.0, None)
    } else {
        let c = constant_c(n as u32, d)?.sharpest();
        let threshold = theorem_threshold(n as u32, d);
        let bound = (fe.max - fe.min) * c / (r as f64).powi(2);
        let ok = (r as f64 >= threshold).then_some(gap <= bound);
        (c, threshold, bound, ok)
    };
    Ok(BoundReport {
        r,
        lambda_star,
        fmin_est: fe.min,
        fmax_est: fe.max,
        gap,
        delta,
        c_used,
        threshold,
        bound,
        theorem_satisfied,
    })
}

/// Kernel degree at which a certificate of `f + η` is guaranteed.
pub fn corollary_degree(f: &ChebPoly, eta: f64) -> Result<u32> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("η must be positive, got {eta}")));
    }
    let n = f.num_vars();
    let d = f.degree().unwrap_or(0);
    if n == 0 || d == 0 {
        return Ok(0);
    }
    let e = grid_extrema(f, default_grid(n), REFINE_ITERS)?;
    let c = constant_c(n as u32, d)?.sharpest();
    let r = theorem_threshold(n as u32, d).max((c * (e.max - e.min) / eta).sqrt());
    Ok(r.ceil() as u32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<BoundReport>,
    /// Whether `lambda_star` is nondecreasing along the sweep.
    pub monotone: bool,
}

pub fn rate_sweep(f: &ChebPoly, r_values: &[u32], grid: usize) -> Result<SweepReport> {
    let rows: Vec<BoundReport> = r_values
        .par_iter()
        .map(|&r| kernel_lower_bound(f, r, grid))
        .collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[1].lambda_star >= w[0].lambda_star);
    Ok(SweepReport { rows, monotone })
}
