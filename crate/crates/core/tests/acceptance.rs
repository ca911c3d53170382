//! Acceptance checks. Every test prints one `PASS`/`FAIL` line (written
//! straight to stdout so it shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssag::data::synthetic::{gaussian_returns, separable_2d};
use ssag::data::{load_libsvm, read_run_record};
use ssag::harness::cli::main_with_args;
use ssag::harness::random_feasible_points;
use ssag::linalg;
use ssag::problems::{DrpoInstance, DrpoOptions, DrpoPoint, DrsvmInstance, DrsvmOptions, Problem, SyntheticMax};
use ssag::projection::{project_psd, project_simplex, project_soc, FeasibleSet};
use ssag::smoothers::{AffineFamily, LogSumExpMaxSmoother, MoreauHingeSmoother, NesterovSimplexMaxSmoother};
use ssag::smoothing::{estimate_sigma_sq, SmoothedOracle, SmoothingParams};
use ssag::solver::{
    iteration_limit, next_alpha, ssag_run, subgrad_run, tune_subgrad_step, RunOptions, ScheduleState, SmoothingMode,
    StepRule, StoppingPolicy,
};

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("acceptance {id:>2} {name}: {verdict} ({detail})\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

fn gauss_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * gauss(rng)).collect()
}

const MUS: [f64; 3] = [1.0, 0.1, 0.01];

/// Worst sandwich, mu-Lipschitz and finite-difference errors of one smoother.
/// `lower_gap` / `upper_gap` bound `h - h~` and `h~ - h` as multiples of `kappa mu`.
#[derive(Default, Debug)]
struct ContractStats {
    sandwich: f64,
    lipschitz: f64,
    fd: f64,
}

fn contract(oracle: &dyn SmoothedOracle, points: &[Vec<f64>], below: bool) -> ContractStats {
    let kappa = oracle.params().kappa;
    let mut st = ContractStats::default();
    for x in points {
        let h = oracle.nonsmooth_value(x);
        let vals: Vec<f64> = MUS.iter().map(|&mu| oracle.value(x, mu)).collect();
        let tol = 1e-12 * (1.0 + h.abs());
        for (&mu, &v) in MUS.iter().zip(&vals) {
            // below: h - kappa mu <= v <= h; above: h <= v <= h + kappa mu
            let (lo, hi) = if below { (h - kappa * mu, h) } else { (h, h + kappa * mu) };
            st.sandwich = st.sandwich.max(lo - v - tol).max(v - hi - tol);
        }
        for i in 0..MUS.len() {
            for j in i + 1..MUS.len() {
                let excess = (vals[i] - vals[j]).abs() - kappa * (MUS[i] - MUS[j]).abs() - tol;
                st.lipschitz = st.lipschitz.max(excess);
            }
        }
        for &mu in &MUS {
            let g = oracle.grad(x, mu);
            let step = 1e-6 * (1.0 + linalg::norm(x)) * mu.sqrt();
            let mut fd = vec![0.0; x.len()];
            for (i, f) in fd.iter_mut().enumerate() {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[i] += step;
                b[i] -= step;
                *f = (oracle.value(&a, mu) - oracle.value(&b, mu)) / (2.0 * step);
            }
            let rel = linalg::dist(&fd, &g) / linalg::norm(&g).max(1.0);
            st.fd = st.fd.max(rel);
        }
    }
    st
}

#[test]
fn smoothing_contract() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (q, d) = (6, 4);
    let rows = gauss_vec(&mut rng, q * d, 1.0);
    let offsets = gauss_vec(&mut rng, q, 0.5);
    let lse = LogSumExpMaxSmoother::new(AffineFamily::new(d, rows.clone(), offsets.clone()).unwrap(), 1.0).unwrap();
    let nes = NesterovSimplexMaxSmoother::new(d, rows, offsets, 1.0).unwrap();
    let moreau = MoreauHingeSmoother::new(1.0);
    let pts: Vec<Vec<f64>> = (0..1000).map(|_| gauss_vec(&mut rng, d, 2.0)).collect();
    let scalars: Vec<Vec<f64>> = (0..1000).map(|_| vec![rng.random_range(-3.0..3.0)]).collect();

    assert!((lse.params().kappa - (q as f64).ln()).abs() < 1e-15);
    let stats = [
        ("log-sum-exp", contract(&lse, &pts, false)),
        ("nesterov", contract(&nes, &pts, true)),
        ("moreau", contract(&moreau, &scalars, true)),
    ];
    let ok = stats.iter().all(|(_, s)| s.sandwich <= 0.0 && s.lipschitz <= 0.0 && s.fd <= 1e-6);
    let elapsed = t0.elapsed();
    let detail = stats
        .iter()
        .map(|(n, s)| format!("{n}: sandwich {:.1e} lipschitz {:.1e} fd {:.1e}", s.sandwich.max(0.0), s.lipschitz.max(0.0), s.fd))
        .collect::<Vec<_>>()
        .join("; ");
    report(1, "smoothing contract", ok && elapsed < Duration::from_secs(30), &format!("{detail}; {elapsed:.1?}"));
    assert!(ok, "{stats:?}");
}

#[test]
fn schedule_identities() {
    let t0 = Instant::now();
    let mut alpha = 1.0f64;
    let (mut worst_identity, mut worst_bound) = (0.0f64, f64::NEG_INFINITY);
    for k in 1..=1_000_000u64 {
        let next = next_alpha(alpha).unwrap();
        let lhs = (1.0 - next) / (next * next);
        worst_identity = worst_identity.max((lhs - 1.0 / (alpha * alpha)).abs() / lhs.max(1.0));
        worst_bound = worst_bound.max(next - 2.0 / (k as f64 + 2.0));
        alpha = next;
    }
    let mut ok = worst_identity <= 1e-12 && worst_bound <= 0.0;

    let mut sched_err = 0.0f64;
    for (m, l_h, mu0) in [(1, 1.0, 1.0), (16, 5.4, 0.3), (2000, 0.02, 2.0)] {
        let params = SmoothingParams { kappa: 3f64.ln(), k_const: 0.7, l_h, mu_bar: mu0 };
        let mut s = ScheduleState::new(mu0, m, SmoothingMode::Diminishing, params).unwrap();
        let mut prev_beta = 0.0;
        for _ in 0..200_000 {
            s.check().unwrap();
            ok &= s.beta_k >= prev_beta && s.beta_k > s.l_mu();
            sched_err = sched_err
                .max((s.mu_k - mu0 * s.alpha_prev).abs())
                .max((s.theta_k - 2.0 * s.alpha_prev * s.beta_k).abs() / s.theta_k);
            prev_beta = s.beta_k;
            s.advance();
        }
    }
    ok &= sched_err <= 1e-12;
    let elapsed = t0.elapsed();
    report(
        2,
        "schedule identities",
        ok && elapsed < Duration::from_secs(5),
        &format!("recursion {worst_identity:.1e}, alpha - 2/(k+2) max {worst_bound:.1e}, mu/theta {sched_err:.1e}; {elapsed:.1?}"),
    );
    assert!(ok);
}

fn random_input(rng: &mut ChaCha8Rng, set: &FeasibleSet) -> Vec<f64> {
    let scale = if rng.random_bool(0.5) { 0.3 } else { 3.0 };
    gauss_vec(rng, set.dim(), scale)
}

/// Worst (idempotence, nonexpansiveness, infeasibility, VI residual).
fn projection_stats(set: &FeasibleSet, rng: &mut ChaCha8Rng, n: usize) -> [f64; 4] {
    let mut worst = [0.0f64; 4];
    for _ in 0..n {
        let u = random_input(rng, set);
        let v = random_input(rng, set);
        let pu = set.project(&u).unwrap();
        let pv = set.project(&v).unwrap();
        let ppu = set.project(&pu).unwrap();
        let scale = 1.0 + linalg::norm(&u);
        worst[0] = worst[0].max(linalg::dist(&ppu, &pu) / scale);
        worst[1] = worst[1].max(linalg::dist(&pu, &pv) - linalg::dist(&u, &v) - 1e-12 * scale);
        worst[2] = worst[2].max(set.violation(&pu));
        // <u - P(u), y - P(u)> <= 0 for feasible y
        for y in [&pv, &set.project(&random_input(rng, set)).unwrap()] {
            let r: Vec<f64> = u.iter().zip(&pu).map(|(a, b)| a - b).collect();
            let s: Vec<f64> = y.iter().zip(&pu).map(|(a, b)| a - b).collect();
            worst[3] = worst[3].max(linalg::dot(&r, &s) / (scale * (1.0 + linalg::norm(&s))));
        }
    }
    worst
}

#[test]
fn projection_suite() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sets = [
        ("simplex", FeasibleSet::Simplex(5)),
        ("soc", FeasibleSet::SecondOrderCone(4)),
        ("psd", FeasibleSet::PsdCone(3)),
        ("ball", FeasibleSet::Ball { center: vec![0.5, -1.0, 2.0], radius: 1.5 }),
        (
            "product",
            FeasibleSet::Product(vec![
                FeasibleSet::Simplex(3),
                FeasibleSet::SecondOrderCone(3),
                FeasibleSet::PsdCone(2),
                FeasibleSet::Ball { center: vec![0.0, 0.0], radius: 1.0 },
            ]),
        ),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, set) in &sets {
        let w = projection_stats(set, &mut rng, 10_000);
        ok &= w[0] <= 1e-12 && w[1] <= 0.0 && w[2] <= 1e-12 && w[3] <= 1e-12;
        detail.push(format!("{name} [{:.0e} {:.0e} {:.0e} {:.0e}]", w[0], w[1].max(0.0), w[2], w[3].max(0.0)));
    }

    let s = project_simplex(&[1.5, 0.5]).unwrap();
    let (w, lam) = project_soc(&[1.0, 0.0], 0.0);
    let psd = project_psd(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]))).unwrap();
    let closed = linalg::dist(&s, &[1.0, 0.0]) < 1e-15
        && linalg::dist(&w, &[0.5, 0.0]) < 1e-15
        && (lam - 0.5).abs() < 1e-15
        && (psd - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))).norm() < 1e-15;
    ok &= closed;
    let elapsed = t0.elapsed();
    report(
        3,
        "projection suite",
        ok && elapsed < Duration::from_secs(60),
        &format!("{}; closed forms {}; {elapsed:.1?}", detail.join(" "), if closed { "ok" } else { "wrong" }),
    );
    assert!(ok, "{detail:?}");
}

/// `max(x1, x2, 0.3 - x1 - x2)` minimized over the 2-simplex on a grid.
fn synthetic_grid_optimum(p: &SyntheticMax) -> f64 {
    (0..=10_000)
        .map(|i| {
            let t = i as f64 * 1e-4;
            p.objective(&[t, 1.0 - t])
        })
        .fold(f64::INFINITY, f64::min)
}

fn measured_sigma_sq(p: &dyn Problem, mu: f64) -> f64 {
    let pts = random_feasible_points(p, 100, 11).unwrap();
    estimate_sigma_sq(p, &pts, mu, 2000, &mut ChaCha8Rng::seed_from_u64(12)).unwrap()
}

fn final_gaps(p: &dyn Problem, mode: SmoothingMode, iters: u64, seeds: u64, opt: f64) -> Vec<f64> {
    let opts = RunOptions { log_every: Some(u64::MAX), ..Default::default() };
    (0..seeds)
        .map(|seed| {
            let sched = ScheduleState::new(1.0, 1, mode, p.params()).unwrap();
            let out = ssag_run(p, sched, &StoppingPolicy::iterations(iters), &opts, seed).unwrap();
            p.objective(&out.x) - opt
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// The same problem with every stochastic gradient replaced by the exact one.
struct Exact(SyntheticMax);

impl SmoothedOracle for Exact {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn params(&self) -> SmoothingParams {
        self.0.params()
    }
    fn value(&self, x: &[f64], mu: f64) -> f64 {
        self.0.value(x, mu)
    }
    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        self.0.grad_into(x, mu, out)
    }
    fn stoch_grad_into(&self, x: &[f64], mu: f64, _rng: &mut dyn RngCore, out: &mut [f64]) {
        self.0.grad_into(x, mu, out)
    }
    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        self.0.nonsmooth_value(x)
    }
}

impl Problem for Exact {
    fn name(&self) -> &str {
        "exact"
    }
    fn feasible_set(&self) -> &FeasibleSet {
        self.0.feasible_set()
    }
    fn initial_point(&self) -> Vec<f64> {
        self.0.initial_point()
    }
    fn subgrad_batch_into(&self, x: &[f64], m: usize, rng: &mut dyn RngCore, out: &mut [f64]) -> u64 {
        self.0.subgrad_batch_into(x, m, rng, out)
    }
    fn sample_count(&self) -> usize {
        self.0.sample_count()
    }
    fn fingerprint(&self) -> String {
        format!("exact-{}", self.0.fingerprint())
    }
}

#[test]
fn diminishing_rate() {
    let t0 = Instant::now();
    let p = SyntheticMax::piecewise_linear_2d();
    let opt = synthetic_grid_optimum(&p);
    let eps = 0.05;
    let sigma_sq = measured_sigma_sq(&p, 1.0);
    let n = iteration_limit(eps, 3f64.ln(), 1.0, sigma_sq.sqrt(), 1).unwrap();
    let gap = mean(&final_gaps(&p, SmoothingMode::Diminishing, n, 20, opt));
    let mut ok = gap <= eps;

    let exact = Exact(SyntheticMax::piecewise_linear_2d());
    let g = |iters| final_gaps(&exact, SmoothingMode::Diminishing, iters, 1, opt)[0];
    let (g500, g1000, g2000) = (g(500), g(1000), g(2000));
    // a gap already at rounding level cannot shrink by a constant factor
    let halves = |a: f64, b: f64| b <= 0.75 * a || b <= 1e-12;
    ok &= halves(g500, g1000) && halves(g1000, g2000);
    let elapsed = t0.elapsed();
    report(
        4,
        "diminishing-mu rate",
        ok && elapsed < Duration::from_secs(120),
        &format!(
            "sigma^2 {sigma_sq:.3}, N {n}, mean gap {gap:.4} <= {eps}; exact gaps {g500:.1e} {g1000:.1e} {g2000:.1e}; {elapsed:.1?}"
        ),
    );
    assert!(ok);
}

#[test]
fn fixed_mu_bound() {
    let t0 = Instant::now();
    let p = SyntheticMax::piecewise_linear_2d();
    let opt = synthetic_grid_optimum(&p);
    let (eps, kappa) = (0.05, 3f64.ln());
    let mu = eps / (4.0 * kappa);
    let sigma_sq = measured_sigma_sq(&p, mu);
    let n = iteration_limit(eps, kappa, 1.0, sigma_sq.sqrt(), 1).unwrap();
    let gap = mean(&final_gaps(&p, SmoothingMode::Fixed(mu), n, 20, opt));
    let bound = 1.2 * (2.0 * kappa * mu + 2.0 * sigma_sq / ((n + 1) as f64).sqrt());
    let ok = gap <= bound;
    let elapsed = t0.elapsed();
    report(
        5,
        "fixed-mu bound",
        ok && elapsed < Duration::from_secs(120),
        &format!("mu {mu:.4}, N {n}, mean gap {gap:.4} <= {bound:.4}; {elapsed:.1?}"),
    );
    assert!(ok);
}

/// Gradient of `0.5 |x|^2` plus an independent fair +-1 on each coordinate:
/// trace variance is exactly the dimension.
struct Coin(usize);

impl SmoothedOracle for Coin {
    fn dim(&self) -> usize {
        self.0
    }
    fn params(&self) -> SmoothingParams {
        SmoothingParams { kappa: 0.0, k_const: 1.0, l_h: 0.0, mu_bar: 1.0 }
    }
    fn value(&self, x: &[f64], _mu: f64) -> f64 {
        0.5 * linalg::norm_sq(x)
    }
    fn grad_into(&self, x: &[f64], _mu: f64, out: &mut [f64]) {
        out.copy_from_slice(x)
    }
    fn stoch_grad_into(&self, x: &[f64], _mu: f64, rng: &mut dyn RngCore, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = v + if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 };
        }
    }
    fn nonsmooth_value(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

fn minibatch_variance(p: &dyn Problem, x: &[f64], mu: f64, m: usize, reps: usize, rng: &mut ChaCha8Rng) -> f64 {
    let d = x.len();
    let mut draws = vec![0.0; reps * d];
    for chunk in draws.chunks_exact_mut(d) {
        p.minibatch_into(x, mu, m, rng, chunk);
    }
    let mut mean = vec![0.0; d];
    for chunk in draws.chunks_exact(d) {
        linalg::axpy(1.0 / reps as f64, chunk, &mut mean);
    }
    draws.chunks_exact(d).map(|g| linalg::dist(g, &mean).powi(2)).sum::<f64>() / (reps - 1) as f64
}

#[test]
fn variance_mechanics() {
    let t0 = Instant::now();
    let data = separable_2d(200, 0.2, 0).unwrap();
    let p = DrsvmInstance::new(&data, DrsvmOptions { tau: 0.005, ..Default::default() }, None).unwrap();
    let x = random_feasible_points(&p, 1, 5).unwrap().remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let reps = 20_000;
    let base = minibatch_variance(&p, &x, 0.5, 1, reps, &mut rng);
    let ratios: Vec<f64> = [4, 16, 64]
        .iter()
        .map(|&m| minibatch_variance(&p, &x, 0.5, m, reps, &mut rng) * m as f64 / base)
        .collect();
    let mut ok = ratios.iter().all(|r| (r - 1.0).abs() <= 0.2);

    let exact = Exact(SyntheticMax::piecewise_linear_2d());
    let pts = random_feasible_points(&exact, 20, 7).unwrap();
    let det = estimate_sigma_sq(&exact, &pts, 0.3, 50, &mut rng).unwrap();
    let coin_pts: Vec<Vec<f64>> = (0..20).map(|_| gauss_vec(&mut rng, 1, 1.0)).collect();
    let coin = estimate_sigma_sq(&Coin(1), &coin_pts, 1.0, 500, &mut rng).unwrap();
    ok &= det == 0.0 && (coin - 1.0).abs() <= 0.1;
    let elapsed = t0.elapsed();
    report(
        6,
        "variance mechanics",
        ok && elapsed < Duration::from_secs(60),
        &format!("m*var(m)/var(1) for m=4,16,64: {ratios:.3?}; deterministic {det}; coin {coin:.4} vs 1; {elapsed:.1?}"),
    );
    assert!(ok);
}

/// Coarse-to-fine search over `(w, lambda)` with `|w| <= lambda`: 21^3 points
/// per level, halving the spacing around the incumbent.
fn drsvm_grid_optimum(p: &DrsvmInstance) -> f64 {
    let (mut c, mut h) = ([0.0f64, 0.0, 2.0], 2.0f64);
    let mut best = f64::INFINITY;
    for _ in 0..14 {
        let mut bc = c;
        for i in -10..=10 {
            for j in -10..=10 {
                for l in -10..=10 {
                    let w = [c[0] + h * i as f64 / 10.0, c[1] + h * j as f64 / 10.0];
                    let lam = c[2] + h * l as f64 / 10.0;
                    if w[0].hypot(w[1]) > lam {
                        continue;
                    }
                    let v = p.true_objective(&w, lam);
                    if v < best {
                        best = v;
                        bc = [w[0], w[1], lam];
                    }
                }
            }
        }
        c = bc;
        h *= 0.5;
    }
    best
}

#[test]
fn drsvm_end_to_end() {
    let t0 = Instant::now();
    let data = separable_2d(200, 0.2, 0).unwrap();
    let p = DrsvmInstance::new(&data, DrsvmOptions { tau: 0.005, ..Default::default() }, None).unwrap();
    let opt = drsvm_grid_optimum(&p);
    let eps = 0.01;
    let sigma_sq = measured_sigma_sq(&p, 1.0);
    let n = iteration_limit(eps, p.params().kappa, 1.0, sigma_sq.sqrt(), 1).unwrap();

    let opts = RunOptions { log_every: Some(1), ..Default::default() };
    let race = StoppingPolicy { epsilon_gap: Some(eps), reference: Some(opt), max_sfo: Some(n), ..Default::default() };
    let c = tune_subgrad_step(&p, &[0.01, 0.1, 1.0, 10.0, 100.0], 1, &StoppingPolicy::iterations(500), 0).unwrap();

    let (mut min_acc, mut gaps, mut wins) = (f64::INFINITY, Vec::new(), 0);
    let (mut ssag_sfo, mut sub_sfo) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let sched = || ScheduleState::new(1.0, 1, SmoothingMode::Diminishing, p.params()).unwrap();
        let full = ssag_run(&p, sched(), &StoppingPolicy::iterations(n), &RunOptions::default(), seed).unwrap();
        min_acc = min_acc.min(p.accuracy(&full.x).unwrap());
        gaps.push(p.objective(&full.x) - opt);

        let a = ssag_run(&p, sched(), &race, &opts, seed).unwrap().record.sfo_to_gap(eps);
        let b = subgrad_run(&p, StepRule::InvSqrtK(c), 1, &race, &opts, seed).unwrap().record.sfo_to_gap(eps);
        if a.unwrap_or(u64::MAX) < b.unwrap_or(u64::MAX) {
            wins += 1;
        }
        ssag_sfo.push(a.map_or(-1, |v| v as i64));
        sub_sfo.push(b.map_or(-1, |v| v as i64));
    }
    let mean_gap = mean(&gaps);
    let worst_gap = gaps.iter().copied().fold(0.0, f64::max);
    let quality = min_acc == 1.0 && mean_gap.abs() <= 1e-2;
    let race_ok = wins >= 16;
    let elapsed = t0.elapsed();
    report(
        7,
        "drsvm end to end",
        quality && race_ok && elapsed < Duration::from_secs(180),
        &format!(
            "grid optimum {opt:.5}, N {n}, min accuracy {min_acc}, mean gap {mean_gap:.2e} (worst {worst_gap:.2e}); \
             SFO to gap {eps}: ssag beats subgradient (c = {c}) in {wins}/20 seeds, \
             median ssag {} vs subgradient {}; {elapsed:.1?}",
            median(&ssag_sfo),
            median(&sub_sfo)
        ),
    );
    assert!(quality, "accuracy {min_acc}, mean gap {mean_gap}");
    assert!(race_ok, "ssag won only {wins}/20 races: ssag {ssag_sfo:?} subgradient {sub_sfo:?}");
}

fn median(v: &[i64]) -> i64 {
    let mut s = v.to_vec();
    s.sort_unstable();
    s[s.len() / 2]
}

/// Plain-loop version of one DRPO scenario value: moments, both moment
/// matrices, and the Frobenius products.
fn dense_component(returns: &DMatrix<f64>, gamma1: f64, gamma2: f64, xi: usize, p: &DrpoPoint) -> f64 {
    let (q, d) = returns.shape();
    let mut m = vec![0.0; d];
    for r in 0..q {
        for j in 0..d {
            m[j] += returns[(r, j)] / q as f64;
        }
    }
    let mut s = vec![vec![0.0; d]; d];
    for r in 0..q {
        for i in 0..d {
            for j in 0..d {
                s[i][j] += (returns[(r, i)] - m[i]) * (returns[(r, j)] - m[j]) / (q - 1) as f64;
            }
        }
    }
    let z: Vec<f64> = (0..d).map(|j| returns[(xi, j)]).collect();
    let mut v = 0.0;
    for j in 0..d {
        v -= z[j] * p.x[j];
    }
    for i in 0..=d {
        for j in 0..=d {
            let phi1 = match (i == d, j == d) {
                (false, false) => -s[i][j],
                (false, true) => m[i] - z[i],
                (true, false) => m[j] - z[j],
                (true, true) => -gamma1,
            };
            v -= p.lambda1[(i, j)] * phi1;
        }
    }
    for i in 0..d {
        for j in 0..d {
            let phi2 = (z[i] - m[i]) * (z[j] - m[j]) - gamma2 * s[i][j];
            v -= p.lambda2[(i, j)] * phi2;
        }
    }
    v
}

#[test]
fn drpo_end_to_end() {
    let t0 = Instant::now();
    let (d, q) = (3, 50);
    let returns = gaussian_returns(q, d, 0).unwrap().returns;
    let opts = DrpoOptions::default();
    let p = DrpoInstance::new(&returns, opts).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut value_err = 0.0f64;
    for pt in random_feasible_points(&p, 200, 9).unwrap() {
        let mut pt = DrpoPoint::unpack(&pt, d).unwrap();
        pt.lambda1 *= rng.random_range(0.1..10.0);
        for xi in 0..q {
            let got = p.component_value(xi, &pt).unwrap();
            let want = dense_component(&returns, opts.gamma1, opts.gamma2, xi, &pt);
            value_err = value_err.max((got - want).abs() / want.abs().max(1.0));
        }
    }

    let sigma_sq = measured_sigma_sq(&p, 1.0);
    let n = iteration_limit(0.01, p.params().kappa, 1.0, sigma_sq.sqrt(), 1).unwrap().min(20_000);
    let log = RunOptions { log_every: Some((n / 50).max(1)), feasibility_tol: Some(1e-9), ..Default::default() };
    let curves: Vec<Vec<f64>> = (0..5)
        .map(|seed| {
            let sched = ScheduleState::new(1.0, 1, SmoothingMode::Diminishing, p.params()).unwrap();
            let out = ssag_run(&p, sched, &StoppingPolicy::iterations(n), &log, seed).expect("iterates stay feasible");
            out.record.rows.iter().map(|r| r.objective).collect()
        })
        .collect();
    let avg: Vec<f64> = (0..curves[0].len()).map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64).collect();
    let half = avg.len() / 2;
    let (first, last) = (avg[0], *avg.last().unwrap());
    let decreasing = last < first && mean(&avg[half..]) < mean(&avg[..half]);
    let ok = decreasing && value_err <= 1e-10;
    let elapsed = t0.elapsed();
    report(
        8,
        "drpo end to end",
        ok && elapsed < Duration::from_secs(120),
        &format!(
            "objective {first:.4} -> {last:.4} over {n} iterations (every iterate feasible to 1e-9); \
             component value vs dense {value_err:.1e}; {elapsed:.1?}"
        ),
    );
    assert!(ok);
}

fn files_under(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn bench_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bench.cfg");
    std::fs::write(
        &cfg,
        "problem = drsvm\nepsilon = 0.05\nbatch_size = auto\nbatch_candidates = 1,4,16\npilot_sfo = 2000\n\
         pilots_per_candidate = 2\nseeds = 0..3\nreference = auto\nreference_iters = 2000\nmax_sfo = 20000\n",
    )
    .unwrap();
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let code = main_with_args(["ssag", "bench", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        // the reference cache would short-circuit the second run
        let _ = std::fs::remove_file(out.join("reference_cache.csv"));
        files_under(&out)
    };
    let (a, b) = (run("a"), run("b"));
    // timings and the resolved config (which names the output directory) may differ
    let compared = |files: &[(PathBuf, Vec<u8>)]| -> Vec<(PathBuf, Vec<u8>)> {
        files.iter().filter(|(p, _)| p.starts_with("records") || p == Path::new("summary.csv")).cloned().collect()
    };
    let (a, b) = (compared(&a), compared(&b));
    let records = a.iter().filter(|(p, _)| p.starts_with("records")).count();
    for (p, _) in a.iter().filter(|(p, _)| p.starts_with("records")) {
        read_run_record(tmp.path().join("a").join(p)).unwrap();
    }
    let ok = a == b && records == 3 && a.len() == 4;
    let names: Vec<String> = a.iter().map(|(p, _)| p.display().to_string()).collect();
    report(9, "bench reproducibility", ok, &format!("byte-identical across reruns: {names:?}"));
    assert!(ok);
}

fn a8a_path() -> Option<PathBuf> {
    let from_env = std::env::var_os("SSAG_A8A").map(PathBuf::from);
    let local = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/a8a");
    from_env.into_iter().chain([local]).find(|p| p.is_file())
}

#[test]
fn a8a_large_scale() {
    let Some(path) = a8a_path() else {
        let line = "acceptance 10 a8a large scale: SKIPPED (a8a not found; set SSAG_A8A or place it at data/a8a)\n";
        let _ = std::io::stdout().lock().write_all(line.as_bytes());
        return;
    };
    let t0 = Instant::now();
    let data = load_libsvm(&path, Some(123)).unwrap();
    let p = DrsvmInstance::new(&data, DrsvmOptions::default(), None).unwrap();
    let (eps, m) = (0.001, 2000);
    let sigma_sq = measured_sigma_sq(&p, 1.0);
    let n = iteration_limit(eps, p.params().kappa, 1.0, sigma_sq.sqrt(), m).unwrap();
    let stop = StoppingPolicy { max_iters: Some(n), max_time: Some(Duration::from_secs(600)), ..Default::default() };
    let sched = ScheduleState::new(1.0, m, SmoothingMode::Diminishing, p.params()).unwrap();
    let out = ssag_run(&p, sched, &stop, &RunOptions { log_every: Some(u64::MAX), ..Default::default() }, 0).unwrap();
    let obj = p.objective(&out.x);
    let ok = obj <= 0.74;
    report(
        10,
        "a8a large scale",
        ok,
        &format!("{} samples, N {n}, {} iterations, objective {obj:.4} <= 0.74; {:.1?}", data.n_samples(), out.iterations, t0.elapsed()),
    );
    assert!(ok);
}
