//! Acceptance criteria. Each test prints one `AC<n> PASS|FAIL` line.
//!
//! Run with `cargo test -p cancelput-core --test acceptance -- --nocapture`
//! to see the table.

use std::time::{Duration, Instant};

use cancelput_core::mc::{
    discounted_terminal_price, estimate_value, simulate_paths, undershoot_stats, McConfig, McMode,
};
use cancelput_core::quad::{integrate, QuadOptions};
use cancelput_core::{
    bs_reference, g_payoff, generator_apply, h_function, Contract, ModelParams, Pricer, ScaleBasis,
};

const K: f64 = 100.0;
const H: f64 = 120.0;
const S0: f64 = 110.0;

fn bs() -> (ModelParams, Contract) {
    (
        ModelParams::new(0.05, 0.2, 0.0, 1.0).unwrap(),
        Contract::new(K, H, S0).unwrap(),
    )
}

fn jump() -> (ModelParams, Contract) {
    (
        ModelParams::new(0.05, 0.2, 5.0, 2.0).unwrap(),
        Contract::new(K, H, S0).unwrap(),
    )
}

fn verdict(id: &str, what: &str, pass: bool, detail: String) {
    println!(
        "{id} {} {what}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{id} failed: {what}: {detail}");
}

/// Analytic `G'(s)` for `s < K < h`.
fn payoff_slope(m: &ModelParams, s: f64) -> f64 {
    let a = m.alpha();
    -(H / s).powf(a) * (1.0 + a * (K - s) / s)
}

/// One-sided derivative at `x+` from forward differences at steps
/// `h, h/2, h/4`, Richardson-extrapolated twice.
fn richardson_forward<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |step: f64| (f(x + step) - f(x)) / step;
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = 2.0 * d2 - d1;
    let r2 = 2.0 * d3 - d2;
    (4.0 * r2 - r1) / 3.0
}

#[test]
fn ac1_black_scholes_benchmark() {
    let (m, c) = bs();
    let start = Instant::now();
    let pricer = Pricer::new(m, c).unwrap();
    let report = pricer.report().unwrap();
    let reference = bs_reference(&m, &c).unwrap();
    let elapsed = start.elapsed();

    let exact = 250.0 / 132f64.sqrt();
    let pass = (report.a_star - 50.0).abs() <= 1e-9
        && (report.value - exact).abs() <= 1e-9
        && (report.value - 21.76).abs() <= 5e-3
        && (reference.plain_put - 36.70).abs() <= 5e-3
        && elapsed < Duration::from_millis(10);
    verdict(
        "AC1",
        "Black-Scholes benchmark",
        pass,
        format!(
            "a*={:.12} V={:.12} (closed {exact:.12}) plain={:.6} in {elapsed:?}",
            report.a_star, report.value, reference.plain_put
        ),
    );
}

#[test]
fn ac2_jump_benchmark() {
    let (m, c) = jump();
    let start = Instant::now();
    let report = Pricer::new(m, c).unwrap().report().unwrap();
    let elapsed = start.elapsed();
    let pass = (report.a_star - 63.18).abs() <= 1e-2
        && (report.value - 18.99).abs() <= 1e-2
        && elapsed < Duration::from_millis(10);
    verdict(
        "AC2",
        "jump benchmark",
        pass,
        format!(
            "a*={:.6} V={:.6} in {elapsed:?}",
            report.a_star, report.value
        ),
    );
}

#[test]
fn ac3_threshold_matches_grid_argmax() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (name, (m, c)) in [("bs", bs()), ("jump", jump())] {
        let pricer = Pricer::new(m, c).unwrap();
        let step = 0.01;
        let (mut best_a, mut best_v) = (f64::NAN, f64::NEG_INFINITY);
        for k in 1..10_000 {
            let a = step * k as f64;
            let v = pricer.value_with_threshold(S0, a).unwrap();
            if v > best_v {
                best_a = a;
                best_v = v;
            }
        }
        pass &= (best_a - pricer.a_star).abs() <= step;
        details.push(format!("{name}: a*={:.6} grid={best_a:.2}", pricer.a_star));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    verdict(
        "AC3",
        "closed-form a* equals grid argmax",
        pass,
        format!("{} in {elapsed:?}", details.join(", ")),
    );
}

#[test]
fn ac4_scale_function_transform() {
    let start = Instant::now();
    let (m, _) = jump();
    let basis = ScaleBasis::new(&m).unwrap();
    let upper = 40.0;
    let mut pass = true;
    let mut details = Vec::new();
    for beta in [1.5, 2.0, 3.0] {
        let numeric = integrate(
            |x| (-beta * x).exp() * basis.w(x),
            0.0,
            upper,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = 1.0 / (m.laplace_exponent(beta).unwrap() - m.r());
        // W(x) <= C_1 e^x on x >= 0, so the tail beyond `upper` is at most this
        let tail = basis.c[0] * ((1.0 - beta) * upper).exp() / (beta - 1.0);
        let err = (numeric - exact).abs();
        pass &= err <= tail + 1e-8;
        details.push(format!(
            "beta={beta}: err={err:.2e} bound={:.2e}",
            tail + 1e-8
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    verdict(
        "AC4",
        "Laplace transform of W",
        pass,
        format!("{} in {elapsed:?}", details.join(", ")),
    );
}

#[test]
fn ac5_smooth_fit_and_value_matching() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, (m, c)) in [("bs", bs()), ("jump", jump())] {
        let p = Pricer::new(m, c).unwrap();
        let a = p.a_star;
        let matching = (p.value(a).unwrap() - g_payoff(&m, &c, a)).abs();
        let slope = richardson_forward(|s| p.value(s).unwrap(), a, 1e-4 * a);
        let target = payoff_slope(&m, a);
        let mismatch = (slope - target).abs();
        pass &= matching <= 1e-10 * K && mismatch <= 1e-6 * target.abs();
        details.push(format!(
            "{name}: |V-G|={matching:.1e} V'={slope:.10} G'={target:.10} rel={:.1e}",
            mismatch / target.abs()
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    verdict(
        "AC5",
        "value matching and smooth fit",
        pass,
        format!("{} in {elapsed:?}", details.join("; ")),
    );
}

#[test]
fn ac6_hjb_sign_and_generator() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, (m, c)) in [("bs", bs()), ("jump", jump())] {
        let p = Pricer::new(m, c).unwrap();
        let n = 10_000;
        let worst = (1..=n)
            .map(|k| h_function(&m, &c, p.a_star * k as f64 / (n + 1) as f64).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= worst < 0.0;

        let mut max_rel: f64 = 0.0;
        for k in 0..100 {
            let s = 0.1 * K + (0.9 * p.a_star - 0.1 * K) * (k as f64 + 0.5) / 100.0;
            let generated = generator_apply(&m, |x| g_payoff(&m, &c, x), s).unwrap();
            let lhs = generated - m.r() * g_payoff(&m, &c, s);
            let hs = h_function(&m, &c, s).unwrap();
            max_rel = max_rel.max((lhs - hs).abs() / hs.abs());
        }
        pass &= max_rel <= 1e-6;
        details.push(format!(
            "{name}: max H={worst:.3e} generator rel={max_rel:.1e}"
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(5);
    verdict(
        "AC6",
        "HJB sign and generator cross-check",
        pass,
        format!("{} in {elapsed:?}", details.join("; ")),
    );
}

#[test]
fn ac7_monte_carlo_agreement() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, (m, c), rel_budget, seed) in [
        ("bs", bs(), 0.01, 20_240_601),
        ("jump", jump(), 0.015, 20_240_602),
    ] {
        let p = Pricer::new(m, c).unwrap();
        let closed = p.value(S0).unwrap();
        let survival_cfg = McConfig::new(seed);
        let direct_cfg = McConfig {
            mode: McMode::DirectLastPassage,
            ..survival_cfg
        };
        let survival = estimate_value(&m, &c, p.a_star, &survival_cfg).unwrap();
        let direct = estimate_value(&m, &c, p.a_star, &direct_cfg).unwrap();

        let err = (survival.mean - closed).abs();
        let budget = (3.0 * survival.stderr).max(rel_budget * closed);
        let combined = (survival.stderr.powi(2) + direct.stderr.powi(2)).sqrt();
        let gap = (survival.mean - direct.mean).abs();
        let gap_budget = 3.0 * combined + survival.truncation_bound;
        pass &= err <= budget && gap <= gap_budget;
        details.push(format!(
            "{name}: closed={closed:.4} survival={:.4}±{:.4} (|d|={err:.4} <= {budget:.4}) direct={:.4}±{:.4} (|d|={gap:.4} <= {gap_budget:.4})",
            survival.mean, survival.stderr, direct.mean, direct.stderr
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(300);
    verdict(
        "AC7",
        "Monte Carlo agreement",
        pass,
        format!("{} in {elapsed:?}", details.join("; ")),
    );
}

#[test]
fn ac8_undershoot_law() {
    let (m, c) = jump();
    let p = Pricer::new(m, c).unwrap();
    let cfg = McConfig::new(77);
    let records = simulate_paths(&m, &c, p.a_star, &cfg);
    let stats = undershoot_stats(&records, p.a_star);
    let target = 1.0 / m.rho();
    let pass = stats.count >= 10_000 && (stats.mean - target).abs() <= 3.0 * stats.stderr;
    verdict(
        "AC8",
        "undershoot is Exp(rho)",
        pass,
        format!(
            "{} jump crossings, mean={:.5}±{:.5}, 1/rho={target}",
            stats.count, stats.mean, stats.stderr
        ),
    );
}

#[test]
fn ac9_degenerate_branch_continuity() {
    let (m0, c) = bs();
    let tiny = ModelParams::new(0.05, 0.2, 1e-6, 2.0).unwrap();
    let p0 = Pricer::new(m0, c).unwrap();
    let p1 = Pricer::new(tiny, c).unwrap();
    let (v0, v1) = (p0.value(S0).unwrap(), p1.value(S0).unwrap());
    let da = (p1.a_star - p0.a_star).abs() / p0.a_star;
    let dv = (v1 - v0).abs() / v0;
    verdict(
        "AC9",
        "lambda -> 0 continuity",
        da <= 1e-4 && dv <= 1e-4,
        format!(
            "a*: {:.8} vs {:.8} (rel {da:.1e}); V: {v1:.8} vs {v0:.8} (rel {dv:.1e})",
            p1.a_star, p0.a_star
        ),
    );
}

#[test]
fn ac10_determinism_across_workers() {
    let (m, c) = jump();
    let cfg = McConfig {
        n_paths: 4_000,
        ..McConfig::new(4242)
    };
    let run = |threads: usize, mode: McMode| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let cfg = McConfig { mode, ..cfg };
        pool.install(|| estimate_value(&m, &c, 63.18, &cfg).unwrap())
    };
    let mut pass = true;
    let mut details = Vec::new();
    for mode in [McMode::SurvivalWeighted, McMode::DirectLastPassage] {
        let one = run(1, mode);
        let four = run(4, mode);
        let same = one.mean.to_bits() == four.mean.to_bits()
            && one.stderr.to_bits() == four.stderr.to_bits();
        pass &= same;
        details.push(format!("{}: {} vs {}", mode.as_str(), one.mean, four.mean));
    }
    let terminal_one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| discounted_terminal_price(&m, &c, 1.0, &cfg));
    let terminal_three = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| discounted_terminal_price(&m, &c, 1.0, &cfg));
    pass &= terminal_one.mean.to_bits() == terminal_three.mean.to_bits();
    verdict(
        "AC10",
        "bit-identical across worker counts",
        pass,
        details.join("; "),
    );
}
