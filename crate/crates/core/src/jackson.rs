//! Jackson damping coefficients and the Jackson kernel
//! `K_r(x, y) = 1 + 2 Σ_{k=1}^r λ_k^r T_k(x) T_k(y)`.

use std::f64::consts::PI;

use crate::chebpoly::{cheb_values, ChebPoly, Multidegree};
use crate::error::{Error, Result};

/// `λ_k^r`, with `λ_0^r = 1` and `θ_r = π/(r+2)`.
pub fn jackson_lambda(k: u32, r: u32) -> Result<f64> {
    if k > r {
        return Err(Error::InvalidArgument(format!("need k ≤ r, got k = {k}, r = {r}")));
    }
    Ok(lambda_unchecked(k, r))
}

fn lambda_unchecked(k: u32, r: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let theta = PI / (r + 2) as f64;
    let kt = k as f64 * theta;
    (((r + 2 - k) as f64) * kt.cos() + kt.sin() * theta.cos() / theta.sin()) / (r + 2) as f64
}

/// The eigenvalues `λ_0^r, …, λ_r^r` of the univariate kernel operator.
#[derive(Clone, Debug, PartialEq)]
pub struct JacksonSpectrum {
    r: u32,
    lambdas: Vec<f64>,
}

impl JacksonSpectrum {
    pub fn new(r: u32) -> Self {
        JacksonSpectrum { r, lambdas: (0..=r).map(|k| lambda_unchecked(k, r)).collect() }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        PI / (self.r + 2) as f64
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, k: u32) -> Result<f64> {
        self.lambdas.get(k as usize).copied().ok_or(Error::DegreeExceeds { degree: k, r: self.r })
    }

    /// `λ_κ^r = Π λ_{κ_i}^r`.
    pub fn multi_lambda(&self, kappa: &Multidegree) -> Result<f64> {
        kappa.entries().iter().try_fold(1.0, |acc, &k| Ok(acc * self.lambda(k)?))
    }

    pub fn kernel_1d(&self, x: f64, y: f64) -> f64 {
        let r = self.r as usize;
        let tx = cheb_values(x, r);
        let ty = cheb_values(y, r);
        1.0 + 2.0 * (1..=r).map(|k| self.lambdas[k] * tx[k] * ty[k]).sum::<f64>()
    }

    pub fn kernel_nd(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        Ok(x.iter().zip(y).map(|(&a, &b)| self.kernel_1d(a, b)).product())
    }

    /// The univariate polynomial `x ↦ K_r(x, y)` in the Chebyshev basis.
    pub fn kernel_slice(&self, y: f64) -> ChebPoly {
        let ty = cheb_values(y, self.r as usize);
        let coeffs: Vec<f64> = self
            .lambdas
            .iter()
            .zip(&ty)
            .enumerate()
            .map(|(k, (&l, &t))| if k == 0 { 1.0 } else { 2.0 * l * t })
            .collect();
        ChebPoly::univariate(&coeffs)
    }
}

pub fn spectrum(r: u32) -> JacksonSpectrum {
    JacksonSpectrum::new(r)
}

/// `λ_κ^r`; every component of `κ` must be at most `r`.
pub fn multi_lambda(kappa: &Multidegree, r: u32) -> Result<f64> {
    if kappa.max_entry() > r {
        return Err(Error::DegreeExceeds { degree: kappa.max_entry(), r });
    }
    Ok(kappa.entries().iter().map(|&k| lambda_unchecked(k, r)).product())
}

pub fn kernel_eval_1d(r: u32, x: f64, y: f64) -> f64 {
    JacksonSpectrum::new(r).kernel_1d(x, y)
}

pub fn kernel_eval_nd(r: u32, x: &[f64], y: &[f64]) -> Result<f64> {
    JacksonSpectrum::new(r).kernel_nd(x, y)
}

/// Outcome of the numerical check of the kernel's spectral properties.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop21Report {
    pub r: u32,
    pub d: u32,
    /// Smallest sampled kernel value on the grid.
    pub kernel_min: f64,
    pub nonnegative: bool,
    /// `min_k λ_k` and `max_k λ_k` over `0 ≤ k ≤ r`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambdas_in_range: bool,
    /// `π²d²/(r+2)² − max_{k≤d} (1 − λ_k)`; nonnegative when the bound holds.
    pub bound_margin: f64,
    pub bound: f64,
    pub bound_holds: bool,
}

impl Prop21Report {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.lambdas_in_range && self.bound_holds
    }
}

/// Kernel values at or above this are accepted as nonnegative.
pub const KERNEL_NONNEG_TOL: f64 = -1e-12;

/// Checks nonnegativity of `K_r` on a `grid × grid` sample of `[-1,1]²`,
/// `0 < λ_k ≤ 1`, and `1 − λ_k ≤ π²d²/(r+2)²` for `k ≤ d`.
pub fn verify_prop21(r: u32, d: u32, grid: usize) -> Result<Prop21Report> {
    if d > r {
        return Err(Error::InvalidArgument(format!("need d ≤ r, got d = {d}, r = {r}")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid must have at least 2 points".into()));
    }
    let spec = JacksonSpectrum::new(r);
    let pts: Vec<f64> = (0..grid).map(|j| -1.0 + 2.0 * j as f64 / (grid - 1) as f64).collect();
    let ru = r as usize;
    let tables: Vec<Vec<f64>> = pts.iter().map(|&x| cheb_values(x, ru)).collect();
    let mut kernel_min = f64::INFINITY;
    for tx in &tables {
        for ty in &tables {
            let v = 1.0 + 2.0 * (1..=ru).map(|k| spec.lambdas[k] * tx[k] * ty[k]).sum::<f64>();
            kernel_min = kernel_min.min(v);
        }
    }
    let lambda_min = spec.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = spec.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = PI * PI * (d * d) as f64 / ((r + 2) as f64).powi(2);
    let worst = spec.lambdas[..=d as usize].iter().map(|l| 1.0 - l).fold(0.0, f64::max);
    Ok(Prop21Report {
        r,
        d,
        kernel_min,
        nonnegative: kernel_min >= KERNEL_NONNEG_TOL,
        lambda_min,
        lambda_max,
        lambdas_in_range: lambda_min > 0.0 && lambda_max <= 1.0,
        bound_margin: bound - worst,
        bound,
        bound_holds: worst <= bound,
    })
}
