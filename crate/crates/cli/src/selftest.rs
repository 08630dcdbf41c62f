//! Built-in verification suites behind `jcert selftest`.

use std::time::Instant;

use jcert::certificate::{certify, verify};
use jcert::chebpoly::enumerate_multidegrees;
use jcert::jackson::{verify_prop21, JacksonSpectrum};
use jcert::kernelop::apply_inverse;
use jcert::quadrature::gauss_chebyshev;
use jcert::sos1d::{decompose_slice, lukacs_decompose, to_preorder_pair};
use jcert::{ChebPoly, MonoPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certjson::CertificateJson;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip)]
    pub seconds: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub level: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, check: &'static str, start: Instant) -> CheckResult {
        CheckResult {
            check,
            passed: self.failures.is_empty(),
            cases: self.cases,
            failures: self.failures.len(),
            seconds: start.elapsed().as_secs_f64(),
            detail: self.failures.into_iter().take(3).collect::<Vec<_>>().join("; "),
        }
    }
}

fn kernel_sweep(level: Level) -> CheckResult {
    let start = Instant::now();
    let (r_max, grid) = match level {
        Level::Quick => (40, 41),
        Level::Full => (200, 101),
    };
    let mut t = Tally::new();
    for r in 1..=r_max {
        match verify_prop21(r, r.min(20), grid) {
            Ok(rep) => t.check(rep.passed(), || format!("r={r}: {rep:?}")),
            Err(e) => t.check(false, || format!("r={r}: {e}")),
        }
    }
    t.finish("kernel_properties", start)
}

fn quadrature_exactness(level: Level) -> CheckResult {
    let start = Instant::now();
    let m_max = if level == Level::Quick { 6 } else { 12 };
    let mut t = Tally::new();
    for n in 1..=2usize {
        for m in 1..=m_max {
            let rule = gauss_chebyshev(n, m).expect("small rule");
            let top = (2 * m - 1) as u32;
            for kappa in enumerate_multidegrees(n, top * n as u32) {
                if kappa.max_entry() > top {
                    continue;
                }
                let want = if kappa.is_zero() { 1.0 } else { 0.0 };
                let got = rule.integrate(&ChebPoly::basis(kappa.clone())).expect("arity").value;
                t.check((got - want).abs() <= 1e-12, || format!("n={n} m={m} κ={kappa}: {got}"));
            }
        }
    }
    t.finish("quadrature_exactness", start)
}

fn random_uni(rng: &mut ChaCha8Rng, deg: usize) -> ChebPoly {
    ChebPoly::univariate(&(0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
}

fn lukacs_corpus(level: Level, rng: &mut ChaCha8Rng) -> CheckResult {
    let start = Instant::now();
    let (count, r_max, ys) = match level {
        Level::Quick => (40, 12, 10),
        Level::Full => (200, 30, 50),
    };
    let g = ChebPoly::univariate(&[0.5, 0.0, -0.5]);
    let mut t = Tally::new();
    for i in 0..count {
        let deg = 2 + 2 * (i % 12);
        let u = random_uni(rng, deg / 2);
        let v = random_uni(rng, deg / 2 - 1);
        let vv = v.mul(&v).expect("univariate").mul(&g).expect("univariate");
        let p = u.mul(&u).expect("univariate").add(&vv).expect("univariate");
        match lukacs_decompose(&p) {
            Ok(lp) => {
                let pair = to_preorder_pair(&lp);
                let res = pair.residual(&p);
                t.check(res <= 1e-8 && pair.degrees_ok(p.degree().unwrap_or(0)), || {
                    format!("random #{i}: residual {res:e}")
                });
            }
            Err(e) => t.check(false, || format!("random #{i}: {e}")),
        }
    }
    for r in 0..=r_max {
        let spec = JacksonSpectrum::new(r);
        for j in 0..ys {
            let y = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * ys) as f64).cos();
            match decompose_slice(&spec, y) {
                Ok(pair) => {
                    let res = pair.residual(&spec.kernel_slice(y));
                    t.check(res <= 1e-8, || format!("slice r={r} y={y}: residual {res:e}"));
                }
                Err(e) => t.check(false, || format!("slice r={r} y={y}: {e}")),
            }
        }
    }
    t.finish("lukacs_corpus", start)
}

fn certificate_round_trips(level: Level, rng: &mut ChaCha8Rng) -> CheckResult {
    let start = Instant::now();
    let (count, r_max) = match level {
        Level::Quick => (6, 8),
        Level::Full => (20, 12),
    };
    let mut t = Tally::new();
    let example = ChebPoly::from_monomial(&MonoPoly::univariate(&[1.0, 0.0, -1.0, -1.0, 1.0]));
    t.check(certify(&example, 0.1, 7).is_ok(), || "example at r=7 not certified".into());
    t.check(certify(&example, 0.1, 5).is_err(), || "example at r=5 certified".into());
    for i in 0..count {
        let n = rng.gen_range(1..=2usize);
        let d = rng.gen_range(1..=3u32);
        let r = rng.gen_range(d.max(3)..=r_max);
        let f = ChebPoly::from_terms(
            n,
            enumerate_multidegrees(n, d).into_iter().map(|k| (k, rng.gen_range(-1.0..1.0))).collect::<Vec<_>>(),
        );
        let g = apply_inverse(&f, r).expect("degree bounded");
        let e = jcert::chebpoly::grid_extrema(&g, if n == 1 { 1025 } else { 129 }, 20).expect("small grid");
        let eta = (-e.min + 0.02 * (e.max - e.min) + 0.01).max(0.0);
        let outcome = certify(&f, eta, r).map_err(|e| e.to_string()).and_then(|cert| {
            let text = serde_json::to_string(&CertificateJson::from(&cert)).map_err(|e| e.to_string())?;
            let back: CertificateJson = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let loaded = back.to_certificate()?;
            let rep = verify(&loaded, &f);
            if rep.is_valid() && (rep.residual - cert.residual).abs() <= 1e-12 {
                Ok(())
            } else {
                Err(format!("reloaded residual {} vs {}", rep.residual, cert.residual))
            }
        });
        match outcome {
            Ok(()) => t.check(true, String::new),
            Err(e) => t.check(false, || format!("instance #{i} (n={n}, r={r}): {e}")),
        }
    }
    t.finish("certificate_round_trips", start)
}

pub fn run(level: Level, seed: u64) -> Summary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        kernel_sweep(level),
        quadrature_exactness(level),
        lukacs_corpus(level, &mut rng),
        certificate_round_trips(level, &mut rng),
    ];
    Summary {
        level: if level == Level::Quick { "quick" } else { "full" },
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
