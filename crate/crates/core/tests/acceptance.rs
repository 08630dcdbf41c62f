//! Acceptance criteria 1 to 8. Each test prints one PASS/FAIL line.
//! Oracles here are written independently of the library internals.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use jcert::certificate::{certify, kernel_lower_bound, verify, SchmudgenCertificate};
use jcert::chebpoly::{enumerate_multidegrees, ChebPoly, MonoPoly, Multidegree};
use jcert::jackson::{jackson_lambda, JacksonSpectrum};
use jcert::kernelop::{apply_inverse, constant_c, deviation_bound_exact, lemma_bounds_check, theorem_threshold};
use jcert::quadrature::gauss_chebyshev;
use jcert::sos1d::{decompose_slice, lukacs_decompose, to_preorder_pair, PreorderPair1D};
use jcert::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, ok: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let status = if ok && elapsed <= budget { "PASS" } else { "FAIL" };
    println!("criterion {id}: {status} ({:.2}s of {:.0}s) {detail}", elapsed.as_secs_f64(), budget.as_secs_f64());
}

fn finish(id: u32, failures: &[String], start: Instant, budget_secs: u64, detail: &str) {
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    report(id, failures.is_empty(), elapsed, budget, detail);
    assert!(failures.is_empty(), "criterion {id}: {:#?}", &failures[..failures.len().min(10)]);
    assert!(elapsed <= budget, "criterion {id} over budget: {elapsed:?}");
}

/// `λ_k^r` as the normalized autocorrelation of `sin(π(j+1)/(r+2))`.
fn lambda_oracle(k: u32, r: u32) -> f64 {
    let a: Vec<f64> = (0..=r).map(|j| (PI * (j + 1) as f64 / (r + 2) as f64).sin()).collect();
    let num: f64 = (0..=(r - k) as usize).map(|j| a[j] * a[j + k as usize]).sum();
    num / a.iter().map(|x| x * x).sum::<f64>()
}

fn cheb_t(k: u32, x: f64) -> f64 {
    (k as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

fn example1() -> ChebPoly {
    ChebPoly::from_monomial(&MonoPoly::univariate(&[1.0, 0.0, -1.0, -1.0, 1.0]))
}

fn one_minus_sq(n: usize, j: usize) -> ChebPoly {
    let mut e = vec![0; n];
    e[j] = 2;
    ChebPoly::from_terms(n, vec![(Multidegree::zero(n), 0.5), (Multidegree::new(e), -0.5)])
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, d: u32) -> ChebPoly {
    let terms: Vec<(Multidegree, f64)> = enumerate_multidegrees(n, d)
        .into_iter()
        .map(|k| (k, rng.gen_range(-1.0..1.0)))
        .collect();
    ChebPoly::from_terms(n, terms)
}

/// Dense uniform grid plus coordinate golden-section refinement.
fn dense_extrema(f: &dyn Fn(&[f64]) -> f64, n: usize, per_axis: usize) -> (f64, f64) {
    let mut best_min = (f64::INFINITY, vec![0.0; n]);
    let mut best_max = (f64::NEG_INFINITY, vec![0.0; n]);
    let total = per_axis.pow(n as u32);
    let h = 2.0 / (per_axis - 1) as f64;
    for flat in 0..total {
        let mut rest = flat;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let i = rest % per_axis;
                rest /= per_axis;
                -1.0 + i as f64 * h
            })
            .collect();
        let v = f(&x);
        if v < best_min.0 {
            best_min = (v, x.clone());
        }
        if v > best_max.0 {
            best_max = (v, x);
        }
    }
    let refine = |start: Vec<f64>, sign: f64| -> f64 {
        let mut x = start;
        for _ in 0..4 {
            for i in 0..n {
                let (mut a, mut b) = ((x[i] - h).max(-1.0), (x[i] + h).min(1.0));
                let g = |t: f64, x: &mut Vec<f64>| {
                    x[i] = t;
                    sign * f(x)
                };
                for _ in 0..80 {
                    let c = b - (b - a) * 0.618_033_988_75;
                    let d = a + (b - a) * 0.618_033_988_75;
                    if g(c, &mut x) < g(d, &mut x) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                x[i] = 0.5 * (a + b);
            }
        }
        sign * f(&x)
    };
    let lo = refine(best_min.1.clone(), 1.0).min(best_min.0);
    let hi = refine(best_max.1.clone(), -1.0).max(best_max.0);
    (lo, hi)
}

#[test]
fn criterion_1_figure_one() {
    let start = Instant::now();
    let target = example1().add_constant(0.1);
    let plotted = [
        (5, [1.61985, 0.968875, -5.15883, -2.40175, 5.15883]),
        (7, [1.28978, 0.456657, -2.5182, -1.67305, 2.5182]),
    ];
    let mut failures = Vec::new();
    for (r, want) in plotted {
        let mono = apply_inverse(&target, r).unwrap().to_monomial();
        for (i, w) in want.iter().enumerate() {
            let got = mono.coeff(&Multidegree::new(vec![i as u32]));
            if (got - w).abs() > 1e-4 {
                failures.push(format!("r={r} x^{i}: {got} vs {w}"));
            }
        }
    }
    finish(1, &failures, start, 1, "K5^-1 and K7^-1 of f+0.1 match the plotted coefficients to 1e-4");
}

#[test]
fn criterion_2_example_dichotomy() {
    let start = Instant::now();
    let f = example1();
    let mut failures = Vec::new();
    match certify(&f, 0.1, 7) {
        Ok(cert) if cert.residual <= 1e-8 && verify(&cert, &f).is_valid() => {}
        other => failures.push(format!("r=7: {other:?}")),
    }
    match certify(&f, 0.1, 5) {
        Err(Error::NotCertifiable { .. }) => {}
        other => failures.push(format!("r=5 expected NotCertifiable: {:?}", other.map(|c| c.residual))),
    }
    // Independent image: coefficients divided by the oracle eigenvalues.
    let coeffs = f.add_constant(0.1).univariate_coeffs();
    let image = |x: f64| -> f64 {
        coeffs.iter().enumerate().map(|(k, c)| c / lambda_oracle(k as u32, 5) * cheb_t(k as u32, x)).sum()
    };
    let (lo, _) = dense_extrema(&|x: &[f64]| image(x[0]), 1, 4001);
    if !(lo < -1e-3) {
        failures.push(format!("grid minimum of K5^-1(f+0.1) is {lo}"));
    }
    finish(2, &failures, start, 5, &format!("r=7 certified, r=5 rejected with grid minimum {lo:.4}"));
}

#[test]
fn criterion_3_kernel_properties() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for r in 1..=200u32 {
        for k in 1..=r {
            let l = jackson_lambda(k, r).unwrap();
            if !(l > 0.0 && l <= 1.0) {
                failures.push(format!("λ_{k}^{r} = {l}"));
            }
            if (l - lambda_oracle(k, r)).abs() > 1e-12 {
                failures.push(format!("λ_{k}^{r} disagrees with oracle"));
            }
        }
        for d in 1..=r.min(20) {
            let bound = PI * PI * (d * d) as f64 / ((r + 2) as f64).powi(2);
            for k in 1..=d {
                let gap = 1.0 - jackson_lambda(k, r).unwrap();
                if gap > bound {
                    failures.push(format!("1-λ_{k}^{r} = {gap} > {bound} (d={d})"));
                }
            }
        }
    }
    let pts: Vec<f64> = (0..201).map(|j| -1.0 + j as f64 / 100.0).collect();
    let mut kernel_min = f64::INFINITY;
    for r in 1..=50u32 {
        let spec = JacksonSpectrum::new(r);
        let lam: Vec<f64> = (0..=r).map(|k| lambda_oracle(k, r)).collect();
        let tables: Vec<Vec<f64>> =
            pts.iter().map(|&x| (0..=r).map(|k| cheb_t(k, x)).collect()).collect();
        for (i, tx) in tables.iter().enumerate() {
            for (j, ty) in tables.iter().enumerate() {
                let v = 1.0 + 2.0 * (1..=r as usize).map(|k| lam[k] * tx[k] * ty[k]).sum::<f64>();
                kernel_min = kernel_min.min(v);
                if v < -1e-12 {
                    failures.push(format!("K_{r}({}, {}) = {v}", pts[i], pts[j]));
                }
                if (v - spec.kernel_1d(pts[i], pts[j])).abs() > 1e-10 * (1.0 + v.abs()) {
                    failures.push(format!("kernel_1d disagrees at r={r}"));
                }
            }
        }
    }
    finish(3, &failures, start, 60, &format!("eigenvalue range and gap bound hold, kernel minimum {kernel_min:.3e}"));
}

#[test]
fn criterion_4_operator_diagonality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=2usize);
        let r = rng.gen_range(1..=12u32);
        let kappa: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=r)).collect();
        let rule = gauss_chebyshev(n, r as usize + 1).unwrap();
        let spec = JacksonSpectrum::new(r);
        let lam: f64 = kappa.iter().map(|&k| lambda_oracle(k, r)).product();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let transform = rule.sum(|y| {
                spec.kernel_nd(&x, y).unwrap() * kappa.iter().zip(y).map(|(&k, &t)| cheb_t(k, t)).product::<f64>()
            });
            let want = lam * kappa.iter().zip(&x).map(|(&k, &t)| cheb_t(k, t)).product::<f64>();
            let err = (transform - want).abs();
            worst = worst.max(err);
            if err > 1e-10 {
                failures.push(format!("κ={kappa:?} r={r}: {transform} vs {want}"));
            }
        }
    }
    finish(4, &failures, start, 10, &format!("worst deviation {worst:.2e}"));
}

fn pair_pointwise_error(pair: &PreorderPair1D, p: &ChebPoly) -> f64 {
    (0..=400)
        .map(|j| {
            let x = -1.0 + j as f64 / 200.0;
            let s0: f64 = pair.sigma0.iter().map(|q| q.eval(&[x]).unwrap().powi(2)).sum();
            let s1: f64 = pair.sigma1.iter().map(|q| q.eval(&[x]).unwrap().powi(2)).sum();
            (s0 + (1.0 - x * x) * s1 - p.eval(&[x]).unwrap()).abs()
        })
        .fold(0.0, f64::max)
        / p.max_abs_coeff()
}

#[test]
fn criterion_5_lukacs_corpus() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let g = ChebPoly::univariate(&[0.5, 0.0, -0.5]);
    let plus = ChebPoly::univariate(&[1.0, 1.0]);
    let minus = ChebPoly::univariate(&[1.0, -1.0]);
    let rand_uni = |rng: &mut ChaCha8Rng, deg: usize| -> ChebPoly {
        ChebPoly::univariate(&(0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
    };
    for t in 0..200usize {
        let deg = 1 + t % 24;
        let p = if deg % 2 == 0 {
            let u = rand_uni(&mut rng, deg / 2);
            let v = rand_uni(&mut rng, deg / 2 - 1);
            u.mul(&u).unwrap().add(&v.mul(&v).unwrap().mul(&g).unwrap()).unwrap()
        } else {
            let s = rand_uni(&mut rng, deg / 2);
            let w = rand_uni(&mut rng, deg / 2);
            s.mul(&s).unwrap().mul(&plus).unwrap().add(&w.mul(&w).unwrap().mul(&minus).unwrap()).unwrap()
        };
        let deg_p = p.degree().unwrap();
        match lukacs_decompose(&p) {
            Ok(lp) => {
                let pair = to_preorder_pair(&lp);
                let res = pair.residual(&p).max(pair_pointwise_error(&pair, &p));
                worst = worst.max(res);
                if res > 1e-8 || !pair.degrees_ok(deg_p) {
                    failures.push(format!("random #{t} deg {deg_p}: residual {res:e}, degrees {:?}", pair.degrees()));
                }
            }
            Err(e) => failures.push(format!("random #{t} deg {deg_p}: {e}")),
        }
    }
    for r in 0..=30u32 {
        let spec = JacksonSpectrum::new(r);
        for j in 0..50 {
            let y = ((2 * j + 1) as f64 * PI / 100.0).cos();
            let slice = spec.kernel_slice(y);
            match decompose_slice(&spec, y) {
                Ok(pair) => {
                    let res = pair.residual(&slice).max(pair_pointwise_error(&pair, &slice));
                    worst = worst.max(res);
                    if res > 1e-8 || !pair.degrees_ok(slice.degree().unwrap_or(0)) {
                        failures.push(format!("slice r={r} y={y}: residual {res:e}"));
                    }
                }
                Err(e) => failures.push(format!("slice r={r} y={y}: {e}")),
            }
        }
    }
    finish(5, &failures, start, 60, &format!("200 random and 1550 kernel slices, worst residual {worst:.2e}"));
}

#[test]
fn criterion_6_convergence_rate() {
    let start = Instant::now();
    let mono = |n: usize, terms: &[(&[u32], f64)]| -> ChebPoly {
        ChebPoly::from_monomial(&MonoPoly::from_terms(
            n,
            terms.iter().map(|(k, c)| (Multidegree::new(k.to_vec()), *c)),
        ))
    };
    let corpus: Vec<ChebPoly> = vec![
        example1(),
        mono(1, &[(&[1], 1.0)]),
        mono(1, &[(&[2], 1.0)]),
        mono(1, &[(&[0], 0.3), (&[1], -0.5), (&[3], 1.0)]),
        mono(1, &[(&[2], -1.0), (&[4], 1.0)]),
        ChebPoly::basis(Multidegree::new(vec![4])),
        mono(2, &[(&[1, 1], 1.0)]),
        mono(2, &[(&[2, 0], 1.0), (&[0, 2], 1.0), (&[1, 0], -0.5)]),
        mono(2, &[(&[2, 2], 1.0), (&[1, 0], 0.3), (&[0, 1], -0.2)]),
        mono(2, &[(&[3, 0], 1.0), (&[1, 2], -1.0), (&[0, 0], 0.1)]),
        mono(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], -1.5), (&[1, 1], 0.5)]),
        mono(2, &[(&[0, 0], 1.0), (&[1, 0], -1.0), (&[0, 1], -1.0), (&[1, 1], 1.0)]),
    ];
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (idx, f) in corpus.iter().enumerate() {
        let n = f.num_vars();
        let d = f.degree().unwrap();
        let c = constant_c(n as u32, d).unwrap().sharpest();
        let first = theorem_threshold(n as u32, d).ceil() as u32;
        let grid = if n == 1 { 4097 } else { 513 };
        let (fmin, fmax) = dense_extrema(&|x: &[f64]| f.eval(x).unwrap(), n, if n == 1 { 20001 } else { 601 });
        let mut scaled = Vec::new();
        for r in (first..=100).step_by(8) {
            let rep = kernel_lower_bound(f, r, grid).unwrap();
            let gap = fmin - rep.lambda_star;
            let bound = (fmax - fmin) * c / (r as f64).powi(2);
            if !(gap <= bound) {
                failures.push(format!("poly #{idx} r={r}: gap {gap:e} > bound {bound:e}"));
            }
            if rep.lambda_star > fmin + 1e-9 {
                failures.push(format!("poly #{idx} r={r}: λ* {} above minimum {fmin}", rep.lambda_star));
            }
            scaled.push((r as f64).powi(2) * gap);
        }
        // r²·gap must not grow along the sweep.
        let head = scaled[..scaled.len().div_ceil(2)].iter().cloned().fold(0.0, f64::max);
        let tail = scaled.iter().cloned().fold(0.0, f64::max);
        if tail > 2.0 * head + 1e-4 {
            failures.push(format!("poly #{idx}: r²·gap grows {scaled:?}"));
        }
        lines.push(format!("#{idx} max r²gap {tail:.3}"));
    }
    finish(6, &failures, start, 600, &format!("{} polynomials; {}", corpus.len(), lines.join(", ")));
}

/// Independent re-expansion using only multiplication and the stored squares.
fn reexpand(cert: &SchmudgenCertificate) -> ChebPoly {
    let n = cert.num_vars;
    let mut acc = ChebPoly::zero(n);
    for (subset, squares) in &cert.terms {
        for sq in squares {
            let mut t = sq.root.mul(&sq.root).unwrap().scale(sq.scale);
            for &j in subset {
                t = t.mul(&one_minus_sq(n, j)).unwrap();
            }
            acc = acc.add(&t).unwrap();
        }
    }
    acc
}

#[test]
fn criterion_7_certificate_fuzz() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut squares = 0usize;
    for t in 0..100 {
        let n = rng.gen_range(1..=2usize);
        let d = rng.gen_range(1..=if n == 1 { 6 } else { 3 });
        let r = rng.gen_range(d.max(3)..=12u32);
        let f = random_poly(&mut rng, n, d);
        let g = apply_inverse(&f, r).unwrap();
        let (gmin, gmax) = dense_extrema(&|x: &[f64]| g.eval(x).unwrap(), n, if n == 1 { 2001 } else { 161 });
        let eta = (-gmin + 0.02 * (gmax - gmin) + 0.01).max(0.0);
        let cert = match certify(&f, eta, r) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("#{t} n={n} d={d} r={r}: {e}"));
                continue;
            }
        };
        let target = f.add_constant(eta);
        let res = reexpand(&cert).sub(&target).unwrap().max_abs_coeff() / target.max_abs_coeff();
        worst = worst.max(res);
        squares += cert.num_squares();
        if res > 1e-8 || !verify(&cert, &f).is_valid() {
            failures.push(format!("#{t}: re-expansion residual {res:e}"));
        }
        if cert.terms.values().flatten().any(|s| !(s.scale > 0.0)) {
            failures.push(format!("#{t}: nonpositive scale"));
        }

        let heaviest = |c: &SchmudgenCertificate| -> (Vec<usize>, usize) {
            let mut best = (Vec::new(), 0, f64::NEG_INFINITY);
            for (j, list) in &c.terms {
                for (i, s) in list.iter().enumerate() {
                    let w = s.scale * s.root.max_abs_coeff().powi(2);
                    if w > best.2 {
                        best = (j.clone(), i, w);
                    }
                }
            }
            (best.0, best.1)
        };
        let (j, i) = heaviest(&cert);
        let mut flipped = cert.clone();
        flipped.terms.get_mut(&j).unwrap()[i].scale *= -1.0;
        if verify(&flipped, &f).is_valid() {
            failures.push(format!("#{t}: sign flip not detected"));
        }
        let mut dropped = cert.clone();
        dropped.terms.get_mut(&j).unwrap().remove(i);
        if verify(&dropped, &f).is_valid() {
            failures.push(format!("#{t}: dropped term not detected"));
        }
    }
    finish(7, &failures, start, 300, &format!("100 certificates, {squares} squares, worst residual {worst:.2e}"));
}

#[test]
fn criterion_8_eigenvalue_lemmas() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut checks = 0usize;
    for n in 1..=3u32 {
        for d in 1..=6u32 {
            let samples: Vec<ChebPoly> = (0..3).map(|_| random_poly(&mut rng, n as usize, d)).collect();
            let first = theorem_threshold(n, d).ceil() as u32;
            for r in first..=120 {
                let rep = lemma_bounds_check(n, d, r, &samples).unwrap();
                let bound = n as f64 * PI * PI * (d * d) as f64 / (r * r) as f64;
                let (mut gap, mut inv) = (0.0f64, 0.0f64);
                for kappa in enumerate_multidegrees(n as usize, d) {
                    let l: f64 = kappa.entries().iter().map(|&k| lambda_oracle(k, r)).product();
                    gap = gap.max((1.0 - l).abs());
                    inv = inv.max((1.0 - 1.0 / l).abs());
                }
                if gap > bound || inv > 2.0 * bound || !rep.passed() {
                    failures.push(format!("n={n} d={d} r={r}: {gap:e} / {inv:e} vs {bound:e}"));
                }
                checks += 1;
            }
        }
    }
    let mut tightest = f64::INFINITY;
    for t in 0..50 {
        let n = rng.gen_range(1..=2usize);
        let d = rng.gen_range(1..=6u32);
        let r = rng.gen_range(d..=40);
        let p = random_poly(&mut rng, n, d);
        let dev = apply_inverse(&p, r).unwrap().sub(&p).unwrap();
        let (lo, hi) = dense_extrema(&|x: &[f64]| dev.eval(x).unwrap(), n, if n == 1 { 2001 } else { 201 });
        let measured = lo.abs().max(hi.abs());
        let majorant = deviation_bound_exact(&p, r).unwrap();
        tightest = tightest.min(majorant - measured);
        if measured > majorant * (1.0 + 1e-12) {
            failures.push(format!("#{t}: measured {measured} > majorant {majorant}"));
        }
    }
    finish(8, &failures, start, 60, &format!("{checks} (n,d,r) cases, deviation majorant holds on 50 samples"));
}
