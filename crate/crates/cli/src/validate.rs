//! Check suites behind `cancelput validate`.

use cancelput_core::mc::{
    discounted_terminal_price, estimate_value, simulate_paths, undershoot_stats, McConfig, McMode,
};
use cancelput_core::quad::{integrate, QuadOptions};
use cancelput_core::{
    bs_reference, g_payoff, generator_apply, h_function, Pricer, Result, ScaleBranch,
};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(suite: &'static str, name: &'static str, ok: bool, detail: String) -> Self {
        Check {
            suite,
            name,
            status: Status::from_bool(ok),
            detail,
        }
    }

    fn skip(suite: &'static str, name: &'static str, why: &str) -> Self {
        Check {
            suite,
            name,
            status: Status::Skip,
            detail: why.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "name": self.name,
            "status": self.status.as_str(),
            "detail": self.detail,
        })
    }
}

/// Root residuals, transform identity, value matching, smooth fit, HJB sign,
/// generator and dominance checks.
pub fn analytic_suite(p: &Pricer) -> Result<Vec<Check>> {
    const S: &str = "analytic";
    let (m, c, b, a) = (&p.model, &p.contract, &p.basis, p.a_star);
    let (k, h) = (c.strike(), c.barrier());
    let mut out = Vec::new();

    let res = m.laplace_exponent(-m.alpha())?.abs();
    out.push(Check::new(
        S,
        "alpha_root",
        res <= 1e-12 && m.alpha() > -1.0 && m.alpha() < 0.0,
        format!("alpha={:.12} |Psi(-alpha)|={res:.1e}", m.alpha()),
    ));

    // roots may sit beyond the pole at -rho, so test (Psi(t) - r)(t + rho)
    let mut worst: f64 = 0.0;
    for (eta, _) in b.active() {
        let diffusive = m.mu() * eta + 0.5 * m.sigma2() * eta * eta - m.r();
        let residual = if m.has_jumps() {
            diffusive * (eta + m.rho()) - m.lambda() * eta
        } else {
            diffusive
        };
        worst = worst.max(residual.abs() / (1.0 + eta.abs().powi(3)));
    }
    out.push(Check::new(
        S,
        "scale_roots",
        worst <= 1e-10,
        format!("eta={:?} max residual={worst:.1e}", b.eta),
    ));

    let sum_c: f64 = b.active().map(|(_, c)| c).sum();
    let scale_c: f64 = b.active().map(|(_, c)| c.abs()).sum();
    let slope: f64 = b.active().map(|(eta, c)| c * eta).sum();
    let want = 2.0 / m.sigma2();
    let ok = sum_c.abs() <= 1e-12 * scale_c && (slope - want).abs() <= 1e-10 * want;
    out.push(Check::new(
        S,
        "scale_boundary",
        ok,
        format!("W(0)={sum_c:.1e} W'(0)={slope:.12} (2/sigma2={want})"),
    ));

    let sc = b.side_conditions(m);
    out.push(Check::new(
        S,
        "side_conditions",
        sc.hold(b.branch),
        format!(
            "C2={:.6e} C3={:.6e} weighted={:.6e}",
            sc.c2, sc.c3, sc.weighted_sum
        ),
    ));

    let upper = 40.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [1.5, 2.0, 3.0] {
        let numeric = integrate(
            |x| (-beta * x).exp() * b.w(x),
            0.0,
            upper,
            QuadOptions::default(),
        )?;
        let exact = 1.0 / (m.laplace_exponent(beta)? - m.r());
        let bound = b.c[0] * ((1.0 - beta) * upper).exp() / (beta - 1.0) + 1e-8;
        let err = (numeric - exact).abs();
        ok &= err <= bound;
        parts.push(format!("beta={beta}: err={err:.1e}"));
    }
    out.push(Check::new(S, "laplace_transform", ok, parts.join(" ")));

    let matching = (p.value(a)? - g_payoff(m, c, a)).abs();
    out.push(Check::new(
        S,
        "value_matching",
        matching <= 1e-10 * k,
        format!("|V(a*)-G(a*)|={matching:.1e}"),
    ));

    // G is smooth on (0, K), and a* < K
    let step = 1e-4 * a;
    let dv = |f: &dyn Fn(f64) -> f64| {
        let d = |s: f64| (f(a + s) - f(a)) / s;
        let (d1, d2, d3) = (d(step), d(step / 2.0), d(step / 4.0));
        (4.0 * (2.0 * d3 - d2) - (2.0 * d2 - d1)) / 3.0
    };
    let v_slope = dv(&|s| p.value(s).unwrap_or(f64::NAN));
    let g_slope = -(h / a).powf(m.alpha()) * (1.0 + m.alpha() * (k - a) / a);
    let rel = (v_slope - g_slope).abs() / g_slope.abs();
    out.push(Check::new(
        S,
        "smooth_fit",
        rel <= 1e-6,
        format!("V'(a*+)={v_slope:.10} G'(a*)={g_slope:.10} rel={rel:.1e}"),
    ));

    let n = 1000;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=n {
        worst = worst.max(h_function(m, c, a * i as f64 / (n + 1) as f64)?);
    }
    out.push(Check::new(
        S,
        "hjb_sign",
        worst < 0.0,
        format!("max H on (0, a*) = {worst:.3e}"),
    ));

    let mut max_rel: f64 = 0.0;
    for i in 0..100 {
        let s = a * (0.1 + 0.8 * (i as f64 + 0.5) / 100.0);
        let lhs = generator_apply(m, |x| g_payoff(m, c, x), s)? - m.r() * g_payoff(m, c, s);
        let hs = h_function(m, c, s)?;
        max_rel = max_rel.max((lhs - hs).abs() / hs.abs());
    }
    out.push(Check::new(
        S,
        "generator",
        max_rel <= 1e-6,
        format!("max rel |(L-r)G - H| = {max_rel:.1e}"),
    ));

    let (lo, hi) = (0.1 * a, 5.0 * h);
    let mut worst_gap = f64::INFINITY;
    for i in 0..500 {
        let s = lo * (hi / lo).powf(i as f64 / 499.0);
        worst_gap = worst_gap.min(p.value(s)? - g_payoff(m, c, s));
    }
    out.push(Check::new(
        S,
        "dominance",
        worst_gap >= -1e-10 * k,
        format!("min V-G on [{lo:.4}, {hi:.4}] = {worst_gap:.3e}"),
    ));

    if b.branch == ScaleBranch::TwoRoot {
        let bs = bs_reference(m, c)?;
        let v = p.value(c.spot())?;
        let ok = (bs.a_star - a).abs() <= 1e-9 * k
            && (bs.value - v).abs() <= 1e-9 * k
            && v <= bs.plain_put + 1e-12;
        out.push(Check::new(
            S,
            "black_scholes_reference",
            ok,
            format!(
                "a*={:.12} V={:.12} plain put={:.12}",
                bs.a_star, bs.value, bs.plain_put
            ),
        ));
    } else {
        out.push(Check::skip(S, "black_scholes_reference", "lambda > 0"));
    }
    Ok(out)
}

/// Monte Carlo cross-checks: value in both modes, undershoot law, martingale.
pub fn mc_suite(p: &Pricer, cfg: &McConfig) -> Result<Vec<Check>> {
    const S: &str = "mc";
    let (m, c, a) = (&p.model, &p.contract, p.a_star);
    let s0 = c.spot();
    let mut out = Vec::new();

    if a < s0 {
        let closed = p.value(s0)?;
        let survival_cfg = McConfig {
            mode: McMode::SurvivalWeighted,
            ..*cfg
        };
        let direct_cfg = McConfig {
            mode: McMode::DirectLastPassage,
            ..*cfg
        };
        let survival = estimate_value(m, c, a, &survival_cfg)?;
        let budget = (3.0 * survival.stderr).max(0.015 * closed);
        let err = (survival.mean - closed).abs();
        out.push(Check::new(
            S,
            "survival_vs_closed_form",
            err <= budget,
            format!(
                "closed={closed:.6} mc={:.6}+-{:.6} |d|={err:.4} <= {budget:.4}",
                survival.mean, survival.stderr
            ),
        ));

        let direct = estimate_value(m, c, a, &direct_cfg)?;
        let combined = survival.stderr.hypot(direct.stderr);
        let gap = (survival.mean - direct.mean).abs();
        let gap_budget = 3.0 * combined + survival.truncation_bound;
        out.push(Check::new(
            S,
            "direct_vs_survival",
            gap <= gap_budget,
            format!(
                "direct={:.6}+-{:.6} |d|={gap:.4} <= {gap_budget:.4}",
                direct.mean, direct.stderr
            ),
        ));

        if m.has_jumps() {
            let stats = undershoot_stats(&simulate_paths(m, c, a, cfg), a);
            let target = 1.0 / m.rho();
            let ok = stats.count >= 100 && (stats.mean - target).abs() <= 3.0 * stats.stderr;
            out.push(Check::new(
                S,
                "undershoot_law",
                ok,
                format!(
                    "{} jump crossings, mean={:.5}+-{:.5}, 1/rho={target:.5}",
                    stats.count, stats.mean, stats.stderr
                ),
            ));
        } else {
            out.push(Check::skip(S, "undershoot_law", "lambda = 0"));
        }
    } else {
        let why = "spot is in the exercise region";
        out.push(Check::skip(S, "survival_vs_closed_form", why));
        out.push(Check::skip(S, "direct_vs_survival", why));
        out.push(Check::skip(S, "undershoot_law", why));
    }

    let est = discounted_terminal_price(m, c, 1.0, cfg);
    let err = (est.mean - s0).abs();
    out.push(Check::new(
        S,
        "martingale",
        err <= 3.0 * est.stderr,
        format!("E[e^(-r) S_1]={:.6}+-{:.6} s0={s0}", est.mean, est.stderr),
    ));
    Ok(out)
}

/// Fixed-width pass/fail table.
pub fn table(checks: &[Check]) -> String {
    let mut s = String::new();
    for ch in checks {
        s.push_str(&format!(
            "{:<9} {:<26} {:<5} {}\n",
            ch.suite,
            ch.name,
            ch.status.as_str().to_uppercase(),
            ch.detail
        ));
    }
    s
}
