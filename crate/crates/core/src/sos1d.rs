//! Constructive univariate certificates on `[-1, 1]`.
//!
//! A polynomial `p ≥ 0` on `[-1,1]` given by Chebyshev coefficients is the
//! cosine series of `p(cos θ) ≥ 0`. A spectral factor `h` with
//! `|h(e^{iθ})|² = p(cos θ)` is split into real and imaginary parts,
//! which yields `p = u² + (1−x²)v²` (even degree) or
//! `p = (1+x)s² + (1−x)t²` (odd degree).
//!
//! Roots are found as eigenvalues of the colleague matrix of `p` (the
//! Chebyshev-basis companion matrix) and mapped to the unit disc by
//! `x = (z + 1/z)/2`; the factor is then polished by Gauss–Newton on the
//! autocorrelation equations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::chebpoly::{grid_extrema, ChebPoly};
use crate::error::{Error, Result};
use crate::jackson::JacksonSpectrum;

/// Sampled negativity below `-NONNEG_GATE · ‖q‖₁` rejects the input.
pub const NONNEG_GATE: f64 = 1e-10;
/// Maximum relative residual of `|h(e^{iθ})|²` against the cosine series.
pub const FACTOR_TOL: f64 = 1e-9;
/// Maximum relative coefficient residual of a reconstructed decomposition.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

const RESIDUAL_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// `p = u² + (1−x²)v²` (even) or `p = (1+x)s² + (1−x)t²` (odd).
#[derive(Clone, Debug, PartialEq)]
pub struct LukacsPair {
    pub parity: Parity,
    /// `u` (even) or `s` (odd).
    pub first: ChebPoly,
    /// `v` (even) or `t` (odd).
    pub second: ChebPoly,
    /// Degree of the decomposed polynomial.
    pub degree: u32,
}

fn one_minus_x_sq() -> ChebPoly {
    ChebPoly::univariate(&[0.5, 0.0, -0.5])
}

fn square(q: &ChebPoly) -> ChebPoly {
    q.mul(q).expect("univariate")
}

fn poly_degree(q: &ChebPoly) -> u32 {
    q.degree().unwrap_or(0)
}

fn relative_residual(recon: &ChebPoly, p: &ChebPoly) -> f64 {
    let scale = p.max_abs_coeff();
    let diff = recon.sub(p).expect("same arity");
    if scale == 0.0 {
        diff.max_abs_coeff()
    } else {
        diff.max_abs_coeff() / scale
    }
}

impl LukacsPair {
    pub fn reconstruct(&self) -> ChebPoly {
        match self.parity {
            Parity::Even => square(&self.first)
                .add(&square(&self.second).mul(&one_minus_x_sq()).expect("univariate"))
                .expect("univariate"),
            Parity::Odd => {
                let plus = ChebPoly::univariate(&[1.0, 1.0]);
                let minus = ChebPoly::univariate(&[1.0, -1.0]);
                square(&self.first)
                    .mul(&plus)
                    .and_then(|a| a.add(&square(&self.second).mul(&minus)?))
                    .expect("univariate")
            }
        }
    }

    pub fn residual(&self, p: &ChebPoly) -> f64 {
        relative_residual(&self.reconstruct(), p)
    }

    /// Checks the degree bounds `deg u ≤ m, deg v ≤ m−1` (degree `2m`) or
    /// `deg s, deg t ≤ m` (degree `2m+1`).
    pub fn degrees_ok(&self) -> bool {
        let m = self.degree / 2;
        let (a, b) = (poly_degree(&self.first), poly_degree(&self.second));
        match self.parity {
            Parity::Even => a <= m && (self.second.is_zero() || (m >= 1 && b < m)),
            Parity::Odd => a <= m && b <= m,
        }
    }
}

/// `p = Σ q² (q ∈ sigma0) + (1−x²) Σ q² (q ∈ sigma1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreorderPair1D {
    pub sigma0: Vec<ChebPoly>,
    pub sigma1: Vec<ChebPoly>,
}

impl PreorderPair1D {
    pub fn reconstruct(&self) -> ChebPoly {
        let mut acc = ChebPoly::zero(1);
        for q in &self.sigma0 {
            acc = acc.add(&square(q)).expect("univariate");
        }
        let g = one_minus_x_sq();
        for q in &self.sigma1 {
            acc = acc.add(&square(q).mul(&g).expect("univariate")).expect("univariate");
        }
        acc
    }

    pub fn residual(&self, p: &ChebPoly) -> f64 {
        relative_residual(&self.reconstruct(), p)
    }

    /// `(deg σ₀, deg σ₁·(1−x²))`; an empty list contributes degree 0.
    pub fn degrees(&self) -> (u32, u32) {
        let d0 = self.sigma0.iter().map(|q| 2 * poly_degree(q)).max().unwrap_or(0);
        let d1 = self.sigma1.iter().map(|q| 2 * poly_degree(q) + 2).max().unwrap_or(0);
        (d0, d1)
    }

    /// Both degrees are at most `deg p + 1`.
    pub fn degrees_ok(&self, degree: u32) -> bool {
        let (d0, d1) = self.degrees();
        d0 <= degree + 1 && d1 <= degree + 1
    }
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Clenshaw evaluation of `Σ c_k T_k(z)` at a complex point.
fn clenshaw_complex(coeffs: &[f64], z: Complex64) -> Complex64 {
    let n = coeffs.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let two_z = 2.0 * z;
    let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for k in (1..n).rev() {
        let b = two_z * b1 - b2 + coeffs[k];
        b2 = b1;
        b1 = b;
    }
    z * b1 - b2 + coeffs[0]
}

/// Chebyshev coefficients of the derivative.
fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n - 1];
    // c'_{k-1} = c'_{k+1} + 2k c_k
    for k in (1..n).rev() {
        let next = if k + 1 < n - 1 { d[k + 1] } else { 0.0 };
        d[k - 1] = next + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d
}

/// Diagonal similarity scaling by powers of two (Parlett–Reinsch balancing).
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, rr) = (c, r);
            while cc < rr / radix {
                cc *= radix * radix;
                f *= radix;
            }
            let mut cc2 = c;
            let mut f2 = 1.0;
            while cc2 > r * radix {
                cc2 /= radix * radix;
                f2 /= radix;
            }
            let f = if f != 1.0 { f } else { f2 };
            if f != 1.0 && (c * f + r / f) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Complex roots of `Σ c_k T_k(x)` (trailing coefficient nonzero).
/// Eigenvalues via real Schur form. The plain QR iteration can stall on
/// spectra symmetric about zero, so on failure retry after a fixed diagonal
/// similarity and then a small shift.
fn eigenvalues(a: DMatrix<f64>) -> Vec<Complex64> {
    let n = a.nrows();
    let max_iter = 200 * n.max(10);
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, max_iter) {
        return s.complex_eigenvalues().iter().copied().collect();
    }
    for attempt in 1..=4u32 {
        let d: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) * attempt as f64).sin()).collect();
        let shift = 0.0137 * attempt as f64;
        let mut b = a.clone();
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] *= d[i] / d[j];
            }
            b[(i, i)] += shift;
        }
        if let Some(s) = Schur::try_new(b, f64::EPSILON, max_iter) {
            return s
                .complex_eigenvalues()
                .iter()
                .map(|z| Complex64::new(z.re - shift, z.im))
                .collect();
        }
    }
    a.complex_eigenvalues().iter().copied().collect()
}

fn chebyshev_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(-c[0] / c[1], 0.0)];
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    a[(0, 1)] = 1.0;
    for k in 1..n - 1 {
        a[(k, k - 1)] = 0.5;
        a[(k, k + 1)] = 0.5;
    }
    a[(n - 1, n - 2)] = 0.5;
    for j in 0..n {
        a[(n - 1, j)] -= c[j] / (2.0 * c[n]);
    }
    balance(&mut a);
    let eig = eigenvalues(a);
    let dc = derivative_coeffs(c);
    eig.iter()
        .map(|&z0| {
            let mut z = Complex64::new(z0.re, z0.im);
            let mut fz = clenshaw_complex(c, z).norm();
            for _ in 0..8 {
                let d = clenshaw_complex(&dc, z);
                if d.norm() == 0.0 {
                    break;
                }
                let cand = z - clenshaw_complex(c, z) / d;
                let fc = clenshaw_complex(c, cand).norm();
                if !(fc < fz) {
                    break;
                }
                z = cand;
                fz = fc;
            }
            z
        })
        .collect()
}

/// The preimage of `x` under `z ↦ (z + 1/z)/2` inside the closed unit disc.
fn joukowski_inside(x: Complex64) -> Complex64 {
    let w = (x * x - 1.0).sqrt();
    let (a, b) = (x + w, x - w);
    // a·b = 1; invert the larger one for accuracy.
    if a.norm() >= b.norm() {
        1.0 / a
    } else {
        1.0 / b
    }
}

/// Selects one `z`-root per `x`-root so the result is conjugation-closed.
fn disc_roots(xroots: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut zs = Vec::with_capacity(xroots.len());
    let mut on_interval: Vec<f64> = Vec::new();
    for &x in xroots {
        if x.im == 0.0 && x.re.abs() <= 1.0 && 1.0 - x.re.abs() <= 1e-6 {
            // Roots at ±1 map to z = ±1 on their own.
            zs.push(Complex64::new(x.re.signum(), 0.0));
        } else if x.im == 0.0 && x.re.abs() < 1.0 {
            on_interval.push(x.re);
        } else {
            zs.push(joukowski_inside(x));
        }
    }
    on_interval.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    let mut i = 0;
    while i < on_interval.len() {
        if i + 1 < on_interval.len() {
            let x = 0.5 * (on_interval[i] + on_interval[i + 1]);
            let y = (1.0 - x * x).max(0.0).sqrt();
            zs.push(Complex64::new(x, y));
            zs.push(Complex64::new(x, -y));
            i += 2;
        } else {
            // A simple root inside (-1, 1) means a sign change.
            return Err(Error::IllConditioned { residual: f64::NAN });
        }
    }
    Ok(zs)
}

/// Monic polynomial with the given roots; real parts of its coefficients
/// (ascending powers).
fn real_poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, &a) in coeffs.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        coeffs = next;
    }
    coeffs.into_iter().map(|c| c.re).collect()
}

fn eval_power(h: &[f64], z: Complex64) -> Complex64 {
    h.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn sample_angles() -> impl Iterator<Item = f64> {
    (0..RESIDUAL_SAMPLES).map(|j| (j as f64 + 0.5) * PI / RESIDUAL_SAMPLES as f64)
}

/// `max_θ ||h(e^{iθ})|² − q(θ)| / max_θ |q(θ)|` over sampled angles.
fn factor_residual(h: &[f64], q: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for t in sample_angles().chain([0.0, PI]) {
        let target: f64 = q.iter().enumerate().map(|(k, &c)| c * (k as f64 * t).cos()).sum();
        let v = eval_power(h, Complex64::from_polar(1.0, t)).norm_sqr();
        worst = worst.max((v - target).abs());
        scale = scale.max(target.abs());
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Autocorrelation targets: `Σ_i h_i h_{i+k} = a_k` with `a_0 = q_0`, `a_k = q_k/2`.
fn autocorrelation_residual(h: &[f64], a: &[f64]) -> DVector<f64> {
    let n = h.len();
    DVector::from_iterator(
        n,
        (0..n).map(|k| (0..n - k).map(|i| h[i] * h[i + k]).sum::<f64>() - a[k]),
    )
}

/// Gauss–Newton refinement of the factor on the autocorrelation equations.
fn polish_factor(h: &mut [f64], q: &[f64]) {
    let n = h.len();
    let mut a: Vec<f64> = q.iter().map(|c| 0.5 * c).collect();
    a[0] = q[0];
    let mut res = autocorrelation_residual(h, &a);
    let mut norm = res.norm();
    let scale = a.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for _ in 0..40 {
        if norm <= 1e-16 * scale {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                let mut v = 0.0;
                if i + k < n {
                    v += h[i + k];
                }
                if i >= k {
                    v += h[i - k];
                }
                jac[(k, i)] = v;
            }
        }
        let svd = jac.svd(true, true);
        let max_sv = svd.singular_values.max();
        let step = match svd.solve(&(-&res), 1e-13 * max_sv) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let cand: Vec<f64> = h.iter().zip(step.iter()).map(|(x, d)| x + t * d).collect();
            let r = autocorrelation_residual(&cand, &a);
            let nr = r.norm();
            if nr < norm {
                h.copy_from_slice(&cand);
                res = r;
                norm = nr;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
}

fn check_nonnegative(p: &ChebPoly) -> Result<()> {
    let deg = poly_degree(p) as usize;
    let e = grid_extrema(p, (16 * deg + 1).max(513), 20)?;
    let tolerance = NONNEG_GATE * p.l1_norm();
    if e.min < -tolerance {
        return Err(Error::NotNonnegative { min_value: e.min, tolerance });
    }
    Ok(())
}

/// Spectral factor of a nonnegative cosine series `Σ q_k cos(kθ)`.
///
/// Returns real `h_0, …, h_N` (ascending powers of `z`, roots in the closed
/// unit disc) with `|h(e^{iθ})|² = Σ q_k cos(kθ)`.
pub fn fejer_riesz(q: &[f64]) -> Result<Vec<f64>> {
    let p = ChebPoly::univariate(q);
    let q = p.univariate_coeffs();
    if q.is_empty() {
        return Ok(vec![0.0]);
    }
    check_nonnegative(&p)?;
    let n = q.len() - 1;
    if n == 0 {
        return Ok(vec![q[0].max(0.0).sqrt()]);
    }
    let roots = chebyshev_roots(&q);
    let zs = disc_roots(&roots)?;
    let mut h = real_poly_from_roots(&zs);

    // Scale so that |h|² matches q in the least-squares sense on samples.
    let (mut num, mut den) = (0.0, 0.0);
    for t in sample_angles() {
        let target: f64 = q.iter().enumerate().map(|(k, &c)| c * (k as f64 * t).cos()).sum();
        let v = eval_power(&h, Complex64::from_polar(1.0, t)).norm_sqr();
        num += target * v;
        den += v * v;
    }
    if !(den > 0.0) || !(num >= 0.0) {
        return Err(Error::IllConditioned { residual: f64::NAN });
    }
    let alpha = (num / den).sqrt();
    h.iter_mut().for_each(|c| *c *= alpha);

    polish_factor(&mut h, &q);
    let residual = factor_residual(&h, &q);
    if !(residual <= FACTOR_TOL) {
        return Err(Error::IllConditioned { residual });
    }
    Ok(h)
}

/// Second-kind `U_0, …, U_deg` expressed in the first-kind basis.
fn u_in_t_basis(deg: usize) -> Vec<Vec<f64>> {
    (0..=deg)
        .map(|n| {
            let mut row = vec![0.0; n + 1];
            let mut i = n as i64;
            while i >= 0 {
                row[i as usize] = if i == 0 { 1.0 } else { 2.0 };
                i -= 2;
            }
            row
        })
        .collect()
}

fn combine_rows(rows: &[Vec<f64>], weights: &[(usize, f64)]) -> Vec<f64> {
    let len = weights.iter().map(|&(j, _)| rows[j].len()).max().unwrap_or(0);
    let mut out = vec![0.0; len];
    for &(j, w) in weights {
        for (i, &c) in rows[j].iter().enumerate() {
            out[i] += w * c;
        }
    }
    out
}

/// Drops a square root whose square is negligible against `scale`.
fn negligible(q: &ChebPoly, scale: f64) -> bool {
    q.max_abs_coeff().powi(2) <= 1e-20 * scale
}

/// Markov–Lukács decomposition of a univariate polynomial nonnegative on `[-1,1]`.
pub fn lukacs_decompose(p: &ChebPoly) -> Result<LukacsPair> {
    if p.num_vars() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: p.num_vars() });
    }
    let q = p.univariate_coeffs();
    if q.is_empty() {
        return Ok(LukacsPair {
            parity: Parity::Even,
            first: ChebPoly::zero(1),
            second: ChebPoly::zero(1),
            degree: 0,
        });
    }
    let degree = (q.len() - 1) as u32;
    if degree == 0 && q[0] < 0.0 {
        return Err(Error::NotNonnegative { min_value: q[0], tolerance: 0.0 });
    }
    let h = fejer_riesz(&q)?;
    let n = h.len() - 1;
    let (parity, first, second) = if n % 2 == 0 {
        let m = n / 2;
        let mut u = vec![0.0; m + 1];
        u[0] = h[m];
        for j in 1..=m {
            u[j] = h[m + j] + h[m - j];
        }
        let urows = u_in_t_basis(m.max(1));
        let weights: Vec<(usize, f64)> = (1..=m).map(|j| (j - 1, h[m + j] - h[m - j])).collect();
        let v = combine_rows(&urows, &weights);
        (Parity::Even, ChebPoly::univariate(&u), ChebPoly::univariate(&v))
    } else {
        let m = (n - 1) / 2;
        let urows = u_in_t_basis(m);
        let mut va = Vec::new();
        let mut wb = Vec::new();
        for j in 0..=m {
            let a = h[m + 1 + j] + h[m - j];
            let b = h[m + 1 + j] - h[m - j];
            // V_j = U_j − U_{j−1},  W_j = U_j + U_{j−1}
            va.push((j, a * FRAC_1_SQRT_2));
            wb.push((j, b * FRAC_1_SQRT_2));
            if j >= 1 {
                va.push((j - 1, -a * FRAC_1_SQRT_2));
                wb.push((j - 1, b * FRAC_1_SQRT_2));
            }
        }
        let s = combine_rows(&urows, &va);
        let t = combine_rows(&urows, &wb);
        (Parity::Odd, ChebPoly::univariate(&s), ChebPoly::univariate(&t))
    };
    let scale = p.max_abs_coeff();
    let clean = |q: ChebPoly| if negligible(&q, scale) { ChebPoly::zero(1) } else { q };
    let pair = LukacsPair { parity, first: clean(first), second: clean(second), degree };
    let residual = pair.residual(p);
    if !(residual <= RECONSTRUCTION_TOL) {
        return Err(Error::IllConditioned { residual });
    }
    Ok(pair)
}

/// Rewrites a Lukács pair as `σ₀ + σ₁(1−x²)` with explicit square roots.
pub fn to_preorder_pair(lp: &LukacsPair) -> PreorderPair1D {
    let keep = |v: Vec<ChebPoly>| v.into_iter().filter(|q| !q.is_zero()).collect::<Vec<_>>();
    match lp.parity {
        Parity::Even => PreorderPair1D {
            sigma0: keep(vec![lp.first.clone()]),
            sigma1: keep(vec![lp.second.clone()]),
        },
        Parity::Odd => {
            // (1 ± x) = ((1 ± x)² + (1 − x²)) / 2
            let plus = ChebPoly::univariate(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
            let minus = ChebPoly::univariate(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
            let s = &lp.first;
            let t = &lp.second;
            PreorderPair1D {
                sigma0: keep(vec![
                    s.mul(&plus).expect("univariate"),
                    t.mul(&minus).expect("univariate"),
                ]),
                sigma1: keep(vec![s.scale(FRAC_1_SQRT_2), t.scale(FRAC_1_SQRT_2)]),
            }
        }
    }
}

/// Decomposes the kernel slice `x ↦ K_r(x, y)` of a precomputed spectrum.
pub fn decompose_slice(spec: &JacksonSpectrum, y: f64) -> Result<PreorderPair1D> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::InvalidArgument(format!("slice point {y} outside [-1, 1]")));
    }
    let slice = spec.kernel_slice(y);
    let pair = to_preorder_pair(&lukacs_decompose(&slice)?);
    let residual = pair.residual(&slice);
    if !(residual <= RECONSTRUCTION_TOL) {
        return Err(Error::IllConditioned { residual });
    }
    Ok(pair)
}

pub fn decompose_kernel_slice(r: u32, y: f64) -> Result<PreorderPair1D> {
    decompose_slice(&JacksonSpectrum::new(r), y)
}
