//! Closed-form pricing of the perpetual American put cancelled at the last
//! passage of the price above the barrier `h`.
//!
//! Conditioning on the survival process turns the cancellable problem into a
//! plain optimal stopping problem with the adjusted payoff
//!
//! ```text
//! G(s) = (K - s)^+ min((h/s)^alpha, 1)
//! ```
//!
//! and the optimal rule is the first passage below a threshold `a*`. The value
//! of a threshold rule splits into the creeping part, which pays `G(a)`, and
//! the jump part, which pays `G` at an exponentially distributed undershoot.

use crate::error::{PricingError, Result};
use crate::model::ModelParams;
use crate::quad::{integrate, QuadOptions};
use crate::scale::{ScaleBasis, ScaleBranch};

/// Strike, cancellation barrier and spot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    strike: f64,
    barrier: f64,
    spot: f64,
}

impl Contract {
    pub fn new(strike: f64, barrier: f64, spot: f64) -> Result<Self> {
        if !(strike.is_finite() && strike > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "strike must be > 0, got {strike}"
            )));
        }
        if !(barrier.is_finite() && barrier > strike) {
            return Err(PricingError::InvalidParams(format!(
                "barrier must exceed strike, got h = {barrier}, K = {strike}"
            )));
        }
        if !(spot.is_finite() && spot > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "spot must be > 0, got {spot}"
            )));
        }
        Ok(Contract {
            strike,
            barrier,
            spot,
        })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    /// Same strike and barrier at another spot.
    pub fn with_spot(&self, spot: f64) -> Result<Self> {
        Contract::new(self.strike, self.barrier, spot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Continuation,
    Exercise,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Continuation => "Continuation",
            Region::Exercise => "Exercise",
        }
    }
}

/// Price at the contract spot together with the pieces it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceReport {
    pub a_star: f64,
    pub value: f64,
    /// `E[e^{-r tau}; S_tau = a*]`; 1 in the exercise region.
    pub creeping_factor: f64,
    /// `E[e^{-r tau}; S_tau < a*]`; 0 in the exercise region.
    pub undershoot_factor: f64,
    pub g_at_a: f64,
    pub g_integral: f64,
    pub region: Region,
}

/// Adjusted payoff `(K - s)^+ min((h/s)^alpha, 1)`.
pub fn g_payoff(m: &ModelParams, c: &Contract, s: f64) -> f64 {
    if s >= c.strike {
        return 0.0;
    }
    let survival = (c.barrier / s).powf(m.alpha()).min(1.0);
    (c.strike - s) * survival
}

/// `int_0^inf rho e^{-rho y} G(a e^{-y}) dy` in closed form.
///
/// Zero without jumps: nothing can undershoot.
pub fn g_integral(m: &ModelParams, c: &Contract, a: f64) -> Result<f64> {
    check_threshold(c, a)?;
    if !m.has_jumps() {
        return Ok(0.0);
    }
    let (alpha, rho) = (m.alpha(), m.rho());
    // a e^{-y} < K < h, so G reduces to (K - s)(h/s)^alpha along the integral
    Ok((c.barrier / a).powf(alpha) * rho * (c.strike / (rho - alpha) - a / (rho - alpha + 1.0)))
}

fn check_threshold(c: &Contract, a: f64) -> Result<()> {
    if !(a > 0.0 && a < c.strike) {
        return Err(PricingError::DomainError(format!(
            "threshold a = {a} must lie in (0, {})",
            c.strike
        )));
    }
    Ok(())
}

fn clamp_unit(value: f64, what: &str) -> f64 {
    if !(-1e-10..=1.0 + 1e-10).contains(&value) {
        log::warn!("{what} = {value} outside [0, 1]; clamped");
    }
    value.clamp(0.0, 1.0)
}

/// Discounted probability of reaching `a` continuously from `s >= a`:
/// `(sigma^2/2)[W'(x) - Phi W(x)]` with `x = log(s/a)`.
pub fn creeping_factor(b: &ScaleBasis, s: f64, a: f64) -> f64 {
    clamp_unit(b.creeping_kernel((s / a).ln()), "creeping factor")
}

/// Discounted probability of jumping over `a` from `s >= a`:
/// `Z(x) - (sigma^2/2) W'(x) - W(x)(r/Phi - Phi sigma^2/2)`.
pub fn undershoot_factor(b: &ScaleBasis, s: f64, a: f64) -> f64 {
    if b.branch == ScaleBranch::TwoRoot {
        return 0.0;
    }
    clamp_unit(b.undershoot_kernel((s / a).ln()), "undershoot factor")
}

/// Value of stopping at the first passage below `a`, started from `s`.
///
/// Below the threshold the rule stops immediately and pays `G(s)`.
pub fn value_at_threshold(
    b: &ScaleBasis,
    m: &ModelParams,
    c: &Contract,
    s: f64,
    a: f64,
) -> Result<f64> {
    check_threshold(c, a)?;
    if s < a {
        return Ok(g_payoff(m, c, s));
    }
    let creep = creeping_factor(b, s, a);
    let under = undershoot_factor(b, s, a);
    let jump_part = if under == 0.0 {
        0.0
    } else {
        under * g_integral(m, c, a)?
    };
    Ok(creep * g_payoff(m, c, a) + jump_part)
}

/// Optimal exercise threshold `a*`.
pub fn optimal_threshold(b: &ScaleBasis, m: &ModelParams, c: &Contract) -> Result<f64> {
    let k = c.strike;
    let alpha = m.alpha();
    let a_star = match b.branch {
        ScaleBranch::TwoRoot => {
            let e = b.eta[1] + alpha;
            k * e / (e - 1.0)
        }
        ScaleBranch::ThreeRoot => {
            let (r, s2, rho) = (m.r(), m.sigma2(), m.rho());
            let sc = b.side_conditions(m);
            debug_assert!(sc.hold(b.branch), "side conditions violated: {sc:?}");
            let curvature: f64 = b
                .active()
                .skip(1)
                .map(|(eta, c)| c * eta * (eta - 1.0))
                .sum();
            let weighted = b
                .active()
                .skip(1)
                .map(|(eta, c)| c * eta * (r * (1.0 / eta - 1.0) - 0.5 * s2 * (eta - 1.0)))
                .sum::<f64>();
            let num = 0.5 * s2 * curvature + alpha + rho / (rho - alpha) * weighted;
            let den = 0.5 * s2 * curvature - (1.0 - alpha) + rho / (rho - alpha + 1.0) * weighted;
            k * num / den
        }
    };
    if !(a_star > 0.0 && a_star < k) {
        return Err(PricingError::ThresholdOutOfRange { a_star, strike: k });
    }
    Ok(a_star)
}

/// Price at the contract spot.
pub fn price(b: &ScaleBasis, m: &ModelParams, c: &Contract) -> Result<PriceReport> {
    let a_star = optimal_threshold(b, m, c)?;
    report_at(b, m, c, a_star, c.spot)
}

fn report_at(
    b: &ScaleBasis,
    m: &ModelParams,
    c: &Contract,
    a_star: f64,
    s: f64,
) -> Result<PriceReport> {
    let g_at_a = g_payoff(m, c, a_star);
    let g_int = g_integral(m, c, a_star)?;
    if s <= a_star {
        return Ok(PriceReport {
            a_star,
            value: g_payoff(m, c, s),
            creeping_factor: 1.0,
            undershoot_factor: 0.0,
            g_at_a,
            g_integral: g_int,
            region: Region::Exercise,
        });
    }
    let creep = creeping_factor(b, s, a_star);
    let under = undershoot_factor(b, s, a_star);
    Ok(PriceReport {
        a_star,
        value: creep * g_at_a + under * g_int,
        creeping_factor: creep,
        undershoot_factor: under,
        g_at_a,
        g_integral: g_int,
        region: Region::Continuation,
    })
}

/// `delta` in `H(s) = (h/s)^alpha (delta s - r K)`.
pub fn hjb_delta(m: &ModelParams) -> f64 {
    let alpha = m.alpha();
    let diffusive = alpha * m.sigma2();
    if !m.has_jumps() {
        return diffusive;
    }
    let (lambda, rho) = (m.lambda(), m.rho());
    diffusive - lambda / (1.0 + rho) + lambda * rho / ((rho - alpha) * (1.0 + rho - alpha))
}

/// `H(s) = (L G - r G)(s)` for `0 < s < K`.
pub fn h_function(m: &ModelParams, c: &Contract, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < c.strike) {
        return Err(PricingError::DomainError(format!(
            "H is defined on (0, {}), got s = {s}",
            c.strike
        )));
    }
    Ok((c.barrier / s).powf(m.alpha()) * (hjb_delta(m) * s - m.r() * c.strike))
}

/// Relative step for the central differences in [`generator_apply`].
pub const GENERATOR_FD_STEP: f64 = 1e-4;

/// Applies the price generator
///
/// ```text
/// L f(s) = mu~ s f'(s) + sigma^2 s^2 f''(s) / 2
///        + lambda rho int_0^inf (f(s e^{-y}) - f(s)) e^{-rho y} dy
/// ```
///
/// with derivatives by central differences (step [`GENERATOR_FD_STEP`]` * s`)
/// and the jump integral by adaptive quadrature, truncated where
/// `e^{-rho y} < 1e-14`.
pub fn generator_apply<F: Fn(f64) -> f64>(m: &ModelParams, f: F, s: f64) -> Result<f64> {
    generator_apply_with_step(m, f, s, GENERATOR_FD_STEP)
}

pub fn generator_apply_with_step<F: Fn(f64) -> f64>(
    m: &ModelParams,
    f: F,
    s: f64,
    rel_step: f64,
) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(PricingError::DomainError(format!(
            "generator needs s > 0, got {s}"
        )));
    }
    let h = rel_step * s;
    let (lo, mid, hi) = (f(s - h), f(s), f(s + h));
    let first = (hi - lo) / (2.0 * h);
    let second = (hi - 2.0 * mid + lo) / (h * h);
    let mut out = m.generator_drift() * s * first + 0.5 * m.sigma2() * s * s * second;
    if m.has_jumps() {
        let rho = m.rho();
        let upper = 14.0 * std::f64::consts::LN_10 / rho;
        let jumps = integrate(
            |y| (f(s * (-y).exp()) - mid) * (-rho * y).exp(),
            0.0,
            upper,
            QuadOptions {
                abs_tol: 1e-12 * (1.0 + mid.abs()),
                rel_tol: 1e-11,
                max_depth: 40,
            },
        )?;
        out += m.lambda() * rho * jumps;
    }
    Ok(out)
}

/// Black-Scholes reference values for the `lambda = 0` case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsReference {
    pub a_star: f64,
    pub value: f64,
    /// Perpetual American put without cancellation.
    pub plain_put: f64,
}

/// Threshold `K (eta_2 + alpha)/(eta_2 + alpha - 1)`, the cancellable value
/// `(K - a*)(s/a*)^{eta_2}(h/a*)^alpha`, and the plain perpetual put.
pub fn bs_reference(m: &ModelParams, c: &Contract) -> Result<BsReference> {
    if m.has_jumps() {
        return Err(PricingError::BranchError(
            "Black-Scholes reference needs lambda = 0".into(),
        ));
    }
    let (r, s2, alpha) = (m.r(), m.sigma2(), m.alpha());
    let (k, h, s) = (c.strike, c.barrier, c.spot);
    let eta2 = -2.0 * r / s2;
    let a_star = k * (eta2 + alpha) / (eta2 + alpha - 1.0);
    let value = if s > a_star {
        (k - a_star) * (s / a_star).powf(eta2) * (h / a_star).powf(alpha)
    } else {
        g_payoff(m, c, s)
    };
    Ok(BsReference {
        a_star,
        value,
        plain_put: plain_perpetual_put(r, s2, k, s),
    })
}

/// Perpetual American put on a non-dividend stock, `B s^{alpha-}` above the
/// exercise boundary `K alpha-/(alpha- - 1)` and `K - s` below it.
pub fn plain_perpetual_put(r: f64, sigma2: f64, strike: f64, s: f64) -> f64 {
    let am = -2.0 * r / sigma2;
    let boundary = strike / (1.0 - 1.0 / am);
    if s <= boundary {
        return strike - s;
    }
    let b = -(1.0 / am) * boundary.powf(1.0 - am);
    b * s.powf(am)
}

/// Model, basis, contract and threshold bundled for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Pricer {
    pub model: ModelParams,
    pub basis: ScaleBasis,
    pub contract: Contract,
    pub a_star: f64,
}

impl Pricer {
    pub fn new(model: ModelParams, contract: Contract) -> Result<Self> {
        let basis = ScaleBasis::new(&model)?;
        let a_star = optimal_threshold(&basis, &model, &contract)?;
        Ok(Pricer {
            model,
            basis,
            contract,
            a_star,
        })
    }

    pub fn payoff(&self, s: f64) -> f64 {
        g_payoff(&self.model, &self.contract, s)
    }

    /// Value at spot `s` under the optimal rule.
    pub fn value(&self, s: f64) -> Result<f64> {
        value_at_threshold(&self.basis, &self.model, &self.contract, s, self.a_star)
    }

    pub fn value_with_threshold(&self, s: f64, a: f64) -> Result<f64> {
        value_at_threshold(&self.basis, &self.model, &self.contract, s, a)
    }

    pub fn report(&self) -> Result<PriceReport> {
        self.report_at(self.contract.spot)
    }

    pub fn report_at(&self, s: f64) -> Result<PriceReport> {
        report_at(&self.basis, &self.model, &self.contract, self.a_star, s)
    }
}
