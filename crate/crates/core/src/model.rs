//! Jump-diffusion log-price model under the martingale measure.
//!
//! The log-price is `X_t = x + mu t + sigma B_t - sum_{k <= N_t} U_k` with `N`
//! a Poisson process of intensity `lambda` and `U_k ~ Exp(rho)`. Its Laplace
//! exponent is
//!
//! ```text
//! Psi(theta) = mu theta + sigma^2 theta^2 / 2 - lambda theta / (theta + rho)
//! ```
//!
//! and the drift is pinned by `Psi(1) = r`.

use crate::error::{PricingError, Result};

const ALPHA_NEWTON_TOL: f64 = 1e-14;
const ALPHA_NEWTON_MAX_ITER: usize = 50;

/// Market and model parameters, validated, with the derived drift and
/// cancellation exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    r: f64,
    sigma2: f64,
    lambda: f64,
    rho: f64,
    mu: f64,
    alpha: f64,
}

impl ModelParams {
    /// Validates the inputs and derives `mu` and `alpha`.
    ///
    /// With `lambda == 0` the jump rate `rho` is ignored and may be anything.
    pub fn new(r: f64, sigma2: f64, lambda: f64, rho: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "r must be > 0, got {r}"
            )));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "sigma2 must be > 0, got {sigma2}"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        if lambda > 0.0 && !(rho.is_finite() && rho > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "rho must be > 0 when lambda > 0, got {rho}"
            )));
        }

        let jump_compensator = if lambda > 0.0 {
            lambda / (1.0 + rho)
        } else {
            0.0
        };
        let mu = r - sigma2 / 2.0 + jump_compensator;

        let mut model = ModelParams {
            r,
            sigma2,
            lambda,
            rho,
            mu,
            alpha: f64::NAN,
        };
        let alpha = model.solve_alpha();
        if !alpha.is_finite() || alpha >= 0.0 {
            return Err(PricingError::DegenerateCancellation { alpha });
        }
        if alpha <= -1.0 {
            // Impossible under Psi(1) = r > 0, which forces the second zero of
            // Psi into (0, 1).
            return Err(PricingError::InvalidParams(format!(
                "cancellation exponent {alpha} is not in (-1, 0)"
            )));
        }
        model.alpha = alpha;
        Ok(model)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Jump-size rate. Meaningless when [`has_jumps`](Self::has_jumps) is false.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Martingale drift `r - sigma^2/2 + lambda/(1+rho)`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Cancellation exponent: the negative `alpha` with `Psi(-alpha) = 0`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn has_jumps(&self) -> bool {
        self.lambda > 0.0
    }

    /// Drift of the price generator, `r + lambda/(1+rho)`.
    pub fn generator_drift(&self) -> f64 {
        if self.has_jumps() {
            self.r + self.lambda / (1.0 + self.rho)
        } else {
            self.r
        }
    }

    /// Laplace exponent `Psi(theta)`.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        if self.has_jumps() && theta <= -self.rho {
            return Err(PricingError::PoleError {
                theta,
                neg_rho: -self.rho,
            });
        }
        Ok(self.psi(theta))
    }

    /// `Psi` without the pole check. Callers guarantee `theta > -rho`.
    pub(crate) fn psi(&self, theta: f64) -> f64 {
        let diffusive = self.mu * theta + 0.5 * self.sigma2 * theta * theta;
        if self.has_jumps() {
            diffusive - self.lambda * theta / (theta + self.rho)
        } else {
            diffusive
        }
    }

    pub(crate) fn psi_prime(&self, theta: f64) -> f64 {
        let diffusive = self.mu + self.sigma2 * theta;
        if self.has_jumps() {
            let d = theta + self.rho;
            diffusive - self.lambda * self.rho / (d * d)
        } else {
            diffusive
        }
    }

    fn solve_alpha(&self) -> f64 {
        if !self.has_jumps() {
            return 2.0 * self.mu / self.sigma2;
        }
        let half_rho = 0.5 * self.rho;
        let m = self.mu / self.sigma2;
        let d = half_rho - m;
        let mut alpha = half_rho + m - (d * d + 2.0 * self.lambda / self.sigma2).sqrt();

        // Polish on Psi(-alpha) = 0; the closed form loses digits when
        // lambda / sigma^2 dominates.
        if alpha < 0.0 {
            for _ in 0..ALPHA_NEWTON_MAX_ITER {
                let theta = -alpha;
                let slope = self.psi_prime(theta);
                if slope == 0.0 || !slope.is_finite() {
                    break;
                }
                let step = self.psi(theta) / slope;
                let next = -(theta - step);
                if !next.is_finite() || next >= 0.0 || -next <= -self.rho {
                    break;
                }
                let done = (next - alpha).abs() <= ALPHA_NEWTON_TOL * (1.0 + alpha.abs());
                alpha = next;
                if done {
                    break;
                }
            }
        }
        alpha
    }
}

/// Free-function form of [`ModelParams::new`].
pub fn make_model(r: f64, sigma2: f64, lambda: f64, rho: f64) -> Result<ModelParams> {
    ModelParams::new(r, sigma2, lambda, rho)
}

/// Free-function form of [`ModelParams::laplace_exponent`].
pub fn laplace_exponent(m: &ModelParams, theta: f64) -> Result<f64> {
    m.laplace_exponent(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs() -> ModelParams {
        ModelParams::new(0.05, 0.2, 0.0, f64::NAN).unwrap()
    }

    fn jump() -> ModelParams {
        ModelParams::new(0.05, 0.2, 5.0, 2.0).unwrap()
    }

    /// Bisection of Psi on (-1, 0) mapped to alpha; independent of the closed form.
    fn alpha_by_bisection(m: &ModelParams) -> f64 {
        // Psi(theta) < 0 just right of 0 and Psi(1) = r > 0
        let (mut lo, mut hi) = (1e-9, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if m.psi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        -0.5 * (lo + hi)
    }

    #[test]
    fn black_scholes_drift_and_alpha() {
        let m = bs();
        assert_eq!(m.mu(), 0.05 - 0.1);
        assert!((m.alpha() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn jump_alpha_matches_bisection() {
        let m = jump();
        assert_eq!(m.mu(), 0.05 - 0.1 + 5.0 / 3.0);
        let oracle = alpha_by_bisection(&m);
        assert!(
            (m.alpha() - oracle).abs() < 1e-12,
            "{} vs {}",
            m.alpha(),
            oracle
        );
        assert!(m.psi(-m.alpha()).abs() < 1e-12);
        assert!(m.alpha() > -1.0 && m.alpha() < 0.0);
    }

    #[test]
    fn laplace_exponent_examples() {
        let m = bs();
        assert_eq!(m.laplace_exponent(0.0).unwrap(), 0.0);
        assert!((m.laplace_exponent(1.0).unwrap() - 0.05).abs() < 1e-15);
        // the nonzero root sits at -alpha = 0.5
        let at_root = m.laplace_exponent(0.5).unwrap();
        assert!(at_root.abs() < 1e-15, "{at_root}");

        let j = jump();
        assert!((j.laplace_exponent(1.0).unwrap() - 0.05).abs() < 1e-14);
        assert!(matches!(
            j.laplace_exponent(-2.0),
            Err(PricingError::PoleError { .. })
        ));
        assert!(j.laplace_exponent(-1.99).is_ok());
    }

    #[test]
    fn rejects_bad_params() {
        for (r, s2, l, rho) in [
            (0.0, 0.2, 0.0, 1.0),
            (0.05, 0.0, 0.0, 1.0),
            (0.05, 0.2, -1.0, 1.0),
            (0.05, 0.2, 1.0, 0.0),
            (f64::NAN, 0.2, 1.0, 1.0),
        ] {
            assert!(matches!(
                ModelParams::new(r, s2, l, rho),
                Err(PricingError::InvalidParams(_))
            ));
        }
    }

    #[test]
    fn positive_drift_is_degenerate() {
        // r > sigma^2/2 without jumps gives mu > 0, hence alpha > 0
        let err = ModelParams::new(0.2, 0.2, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, PricingError::DegenerateCancellation { .. }));
    }

    #[test]
    fn deterministic_construction() {
        let a = ModelParams::new(0.031, 0.17, 2.3, 1.7).unwrap();
        let b = ModelParams::new(0.031, 0.17, 2.3, 1.7).unwrap();
        assert_eq!(a.alpha().to_bits(), b.alpha().to_bits());
        assert_eq!(a.mu().to_bits(), b.mu().to_bits());
    }

    proptest! {
        #[test]
        fn model_invariants(
            r in 0.01f64..0.1,
            sigma2 in 0.1f64..0.6,
            lambda in 0.0f64..10.0,
            rho in 0.5f64..5.0,
        ) {
            let Ok(m) = ModelParams::new(r, sigma2, lambda, rho) else {
                return Ok(());
            };
            prop_assert_eq!(m.psi(0.0), 0.0);
            prop_assert!((m.psi(1.0) - r).abs() <= 1e-12 * r);
            prop_assert!(m.psi(-m.alpha()).abs() <= 1e-12);
            prop_assert!(m.alpha() > -1.0 && m.alpha() < 0.0);
            if lambda == 0.0 {
                prop_assert!((m.alpha() - 2.0 * m.mu() / sigma2).abs() <= 1e-12);
            }
            // convexity via second differences on (-rho, 4)
            let lo = if m.has_jumps() { -rho + 0.05 } else { -4.0 };
            let step = (4.0 - lo) / 64.0;
            for k in 1..64 {
                let t = lo + step * k as f64;
                let second = m.psi(t - step) - 2.0 * m.psi(t) + m.psi(t + step);
                prop_assert!(second >= -1e-10);
            }
        }
    }
}
