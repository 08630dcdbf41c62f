//! The kernel operator `K_r` acting diagonally on Chebyshev coefficients,
//! its inverse, and the quantitative deviation bounds for `K_r⁻¹ p − p`.

use std::f64::consts::PI;

use crate::chebpoly::{enumerate_multidegrees, ChebPoly};
use crate::error::{Error, Result};
use crate::jackson::JacksonSpectrum;

fn check_degree(p: &ChebPoly, r: u32) -> Result<()> {
    let degree = p.max_var_degree();
    if degree > r {
        return Err(Error::DegreeExceeds { degree, r });
    }
    Ok(())
}

fn map_coeffs(p: &ChebPoly, r: u32, f: impl Fn(f64, f64) -> f64) -> Result<ChebPoly> {
    check_degree(p, r)?;
    let spec = JacksonSpectrum::new(r);
    let terms = p
        .terms()
        .map(|(k, c)| {
            let l = spec.multi_lambda(k).expect("degree checked");
            (k.clone(), f(c, l))
        })
        .collect::<Vec<_>>();
    Ok(ChebPoly::from_terms(p.num_vars(), terms))
}

/// `K_r p`: every `c_κ` multiplied by `λ_κ^r`.
///
/// Requires every per-variable degree of `p` to be at most `r`.
pub fn apply_forward(p: &ChebPoly, r: u32) -> Result<ChebPoly> {
    map_coeffs(p, r, |c, l| c * l)
}

/// `K_r⁻¹ p`: every `c_κ` divided by `λ_κ^r`.
pub fn apply_inverse(p: &ChebPoly, r: u32) -> Result<ChebPoly> {
    map_coeffs(p, r, |c, l| c / l)
}

/// `Σ_κ 2^{w(κ)} |p_κ| |1 − 1/λ_κ^r|`, a majorant of `‖K_r⁻¹ p − p‖_∞` on the cube.
pub fn deviation_bound_exact(p: &ChebPoly, r: u32) -> Result<f64> {
    check_degree(p, r)?;
    let spec = JacksonSpectrum::new(r);
    Ok(p.terms()
        .map(|(k, c)| {
            // 2^{w(κ)} p_κ is the basis coefficient c_κ.
            let l = spec.multi_lambda(k).expect("degree checked");
            c.abs() * (1.0 - 1.0 / l).abs()
        })
        .sum())
}

/// The constant `C(n, d)` in its several forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantC {
    /// `2π²d²n² 2^{n/2} (d+1)ⁿ`
    pub first_form: f64,
    /// `2π²d²n² 2^{d/2} (n+1)^d`
    pub second_form: f64,
    /// `|ℕⁿ_d| · max_κ 2^{w(κ)/2} · 2n²π²d²`
    pub exact: f64,
}

impl ConstantC {
    pub fn closed_form(&self) -> f64 {
        self.first_form.min(self.second_form)
    }

    /// The sharpest available value.
    pub fn sharpest(&self) -> f64 {
        self.exact.min(self.closed_form())
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn constant_c(n: u32, d: u32) -> Result<ConstantC> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("C(n, d) needs n ≥ 1 and d ≥ 1".into()));
    }
    let (nf, df) = (n as f64, d as f64);
    let base = 2.0 * PI * PI * df * df * nf * nf;
    let count = binomial((n + d) as u64, d as u64);
    Ok(ConstantC {
        first_form: base * 2f64.powf(nf / 2.0) * (df + 1.0).powi(n as i32),
        second_form: base * 2f64.powf(df / 2.0) * (nf + 1.0).powi(d as i32),
        exact: count * 2f64.powf(n.min(d) as f64 / 2.0) * base,
    })
}

/// `πd√(2n)`, the smallest kernel degree covered by the convergence bound.
pub fn theorem_threshold(n: u32, d: u32) -> f64 {
    PI * d as f64 * (2.0 * n as f64).sqrt()
}

/// Result of [`lemma_bounds_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub n: u32,
    pub d: u32,
    pub r: u32,
    /// Whether `r ≥ πd` (the `1 − λ` bound applies).
    pub lambda_bound_applies: bool,
    /// Whether `r ≥ πd√(2n)` (the `1 − 1/λ` bound applies).
    pub inverse_bound_applies: bool,
    /// `max_κ |1 − λ_κ^r|` over `ℕⁿ_d`, against `nπ²d²/r²`.
    pub worst_lambda_gap: f64,
    pub lambda_bound: f64,
    /// `max_κ |1 − 1/λ_κ^r|` over `ℕⁿ_d`, against `2nπ²d²/r²`.
    pub worst_inverse_gap: f64,
    pub inverse_bound: f64,
    /// `max_κ |p_κ| 2^{w(κ)/2}` over the normalized samples; must be ≤ 1.
    pub worst_coefficient_ratio: f64,
    pub samples_checked: usize,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        (!self.lambda_bound_applies || self.worst_lambda_gap <= self.lambda_bound)
            && (!self.inverse_bound_applies || self.worst_inverse_gap <= self.inverse_bound)
            && self.worst_coefficient_ratio <= 1.0
    }
}

/// Checks the eigenvalue bounds for every `κ ∈ ℕⁿ_d`, and the coefficient
/// bound `|p_κ| ≤ 2^{−w(κ)/2}` on each sample after scaling it by its
/// ℓ¹ coefficient norm (which makes its sup-norm at most one).
pub fn lemma_bounds_check(n: u32, d: u32, r: u32, samples: &[ChebPoly]) -> Result<LemmaReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if d > r {
        return Err(Error::DegreeExceeds { degree: d, r });
    }
    let spec = JacksonSpectrum::new(r);
    let (nf, df, rf) = (n as f64, d as f64, r as f64);
    let mut worst_lambda_gap = 0.0f64;
    let mut worst_inverse_gap = 0.0f64;
    for kappa in enumerate_multidegrees(n as usize, d) {
        let l = spec.multi_lambda(&kappa)?;
        worst_lambda_gap = worst_lambda_gap.max((1.0 - l).abs());
        worst_inverse_gap = worst_inverse_gap.max((1.0 - 1.0 / l).abs());
    }
    let mut worst_ratio = 0.0f64;
    for p in samples {
        if p.num_vars() != n as usize {
            return Err(Error::DimensionMismatch { expected: n as usize, found: p.num_vars() });
        }
        let norm = p.l1_norm();
        if norm == 0.0 {
            continue;
        }
        for (k, _) in p.terms() {
            let ratio = (p.inner_coeff(k) / norm).abs() * 2f64.powf(k.weight() as f64 / 2.0);
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    let lambda_bound = nf * PI * PI * df * df / (rf * rf);
    Ok(LemmaReport {
        n,
        d,
        r,
        lambda_bound_applies: rf >= PI * df,
        inverse_bound_applies: rf >= theorem_threshold(n, d),
        worst_lambda_gap,
        lambda_bound,
        worst_inverse_gap,
        inverse_bound: 2.0 * lambda_bound,
        worst_coefficient_ratio: worst_ratio,
        samples_checked: samples.len(),
    })
}
