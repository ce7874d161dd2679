//! Scale functions of the exponential-jump diffusion.
//!
//! `W^(r)` is the function with Laplace transform `1 / (Psi(beta) - r)`. For
//! this model it is a finite sum of exponentials `sum_i C_i exp(eta_i x)`
//! where the `eta_i` are the roots of `Psi(theta) = r` and the `C_i` are the
//! partial-fraction coefficients of
//!
//! ```text
//! (theta + rho) / (sigma^2/2 (theta - eta_1)(theta - eta_2)(theta - eta_3))
//! ```
//!
//! Under the martingale measure `eta_1 = 1 = Phi(r)` and the remaining roots
//! are negative, one on each side of the pole `-rho`.

use crate::error::{PricingError, Result};
use crate::model::ModelParams;

const ROOT_NEWTON_TOL: f64 = 1e-14;
const ROOT_NEWTON_MAX_ITER: usize = 50;
const ROOT_COINCIDENCE_TOL: f64 = 1e-10;

/// Which closed form backs the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleBranch {
    /// Jump-diffusion: three exponentials.
    ThreeRoot,
    /// Pure Brownian motion (`lambda = 0`): two exponentials, third slot zero.
    TwoRoot,
}

/// Exponents and coefficients of `W^(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleBasis {
    pub eta: [f64; 3],
    pub c: [f64; 3],
    /// Largest root of `Psi(beta) = r`.
    pub phi_r: f64,
    /// Discriminant of the quadratic factor of `Psi(theta) = r`.
    pub omega: f64,
    pub branch: ScaleBranch,
    r: f64,
    sigma2: f64,
}

impl ScaleBasis {
    /// Dispatches on the jump intensity.
    pub fn new(m: &ModelParams) -> Result<Self> {
        if m.has_jumps() {
            Self::three_root(m)
        } else {
            Self::two_root(m)
        }
    }

    /// Three-exponential basis for `lambda > 0`.
    pub fn three_root(m: &ModelParams) -> Result<Self> {
        if !m.has_jumps() {
            return Err(PricingError::BranchError(
                "three-root scale basis needs lambda > 0".into(),
            ));
        }
        let (r, s2, lambda, rho) = (m.r(), m.sigma2(), m.lambda(), m.rho());

        // (Psi(theta) - r)(theta + rho) = (theta - 1)(s2/2 theta^2 + b theta + c)
        let b = 0.5 * s2 * rho + r + lambda / (1.0 + rho);
        let c = r * rho;
        let omega = lambda * lambda
            + lambda * (rho + 1.0) * (2.0 * r + rho * s2)
            + (rho + 1.0).powi(2) * (r - 0.5 * rho * s2).powi(2);
        let sqrt_disc = omega.sqrt() / (1.0 + rho);

        let far = -(b + sqrt_disc) / s2;
        let near = c / (0.5 * s2 * far);
        let eta2 = polish_cubic_root(m, far);
        let eta3 = polish_cubic_root(m, near);
        let eta = [1.0, eta2, eta3];

        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (eta[i] - eta[j]).abs() <= ROOT_COINCIDENCE_TOL * (1.0 + eta[i].abs()) {
                return Err(PricingError::DegenerateRoots(eta));
            }
        }

        let mut coef = [0.0; 3];
        for i in 0..3 {
            let mut denom = 0.5 * s2;
            for j in 0..3 {
                if j != i {
                    denom *= eta[i] - eta[j];
                }
            }
            coef[i] = (eta[i] + rho) / denom;
        }

        let basis = ScaleBasis {
            eta,
            c: coef,
            phi_r: 1.0,
            omega,
            branch: ScaleBranch::ThreeRoot,
            r,
            sigma2: s2,
        };
        debug_assert!(eta2 < 0.0 && eta3 < 0.0, "negative roots expected: {eta:?}");
        debug_assert!(
            (eta2 < -rho) != (eta3 < -rho),
            "roots must straddle -rho: {eta:?}, rho = {rho}"
        );
        Ok(basis)
    }

    /// Two-exponential basis for `lambda = 0`.
    pub fn two_root(m: &ModelParams) -> Result<Self> {
        if m.has_jumps() {
            return Err(PricingError::BranchError(
                "two-root scale basis needs lambda = 0".into(),
            ));
        }
        let (r, s2) = (m.r(), m.sigma2());
        // s2/2 theta^2 + mu theta - r = 0 has root product -2r/s2 and eta_1 = 1
        let eta2 = -2.0 * r / s2;
        let c1 = 1.0 / (0.5 * s2 * (1.0 - eta2));
        Ok(ScaleBasis {
            eta: [1.0, eta2, 0.0],
            c: [c1, -c1, 0.0],
            phi_r: 1.0,
            omega: m.mu() * m.mu() + 2.0 * s2 * r,
            branch: ScaleBranch::TwoRoot,
            r,
            sigma2: s2,
        })
    }

    fn terms(&self) -> usize {
        match self.branch {
            ScaleBranch::ThreeRoot => 3,
            ScaleBranch::TwoRoot => 2,
        }
    }

    /// `(eta_i, C_i)` pairs that carry weight.
    pub fn active(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eta
            .iter()
            .copied()
            .zip(self.c.iter().copied())
            .take(self.terms())
    }

    /// `W^(r)(x)`; zero for `x < 0`.
    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        // factor out e^{eta_1 x} = e^x so the decaying terms cannot overflow
        let tail: f64 = self
            .active()
            .skip(1)
            .map(|(eta, c)| c * ((eta - 1.0) * x).exp())
            .sum();
        x.exp() * (self.c[0] + tail)
    }

    /// `W^(r)'(x)`; zero for `x < 0`.
    pub fn w_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let tail: f64 = self
            .active()
            .skip(1)
            .map(|(eta, c)| c * eta * ((eta - 1.0) * x).exp())
            .sum();
        x.exp() * (self.c[0] + tail)
    }

    /// `Z^(r)(x) = 1 + r int_0^x W^(r)`; one for `x < 0`.
    pub fn z(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        1.0 + self.r
            * self
                .active()
                .map(|(eta, c)| c * (eta * x).exp_m1() / eta)
                .sum::<f64>()
    }

    /// `(sigma^2/2) [W'(x) - Phi W(x)]`, expanded term by term. The `eta = Phi`
    /// term cancels exactly, leaving only decaying exponentials.
    pub(crate) fn creeping_kernel(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        0.5 * self.sigma2
            * self
                .active()
                .filter(|&(eta, _)| eta != self.phi_r)
                .map(|(eta, c)| c * (eta - self.phi_r) * (eta * x).exp())
                .sum::<f64>()
    }

    /// `Z(x) - (sigma^2/2) W'(x) - W(x)(r/Phi - Phi sigma^2/2)`, expanded term by
    /// term so the growing `e^x` parts cancel symbolically.
    pub(crate) fn undershoot_kernel(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        let k = self.r / self.phi_r - 0.5 * self.phi_r * self.sigma2;
        let constant = 1.0 - self.r * self.active().map(|(eta, c)| c / eta).sum::<f64>();
        let decaying: f64 = self
            .active()
            .filter(|&(eta, _)| eta != self.phi_r)
            .map(|(eta, c)| c * (self.r / eta - 0.5 * self.sigma2 * eta - k) * (eta * x).exp())
            .sum();
        constant + decaying
    }

    /// Quantities whose signs the optimal-threshold argument relies on.
    pub fn side_conditions(&self, m: &ModelParams) -> SideConditions {
        let r = m.r();
        let s2 = m.sigma2();
        let weighted: f64 = self
            .active()
            .skip(1)
            .map(|(eta, c)| c * eta * (r * (1.0 / eta - 1.0) - 0.5 * s2 * (eta - 1.0)))
            .sum();
        SideConditions {
            c2: self.c[1],
            c3: self.c[2],
            weighted_sum: weighted,
        }
    }
}

/// Sign diagnostics behind `0 < a* < K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideConditions {
    pub c2: f64,
    pub c3: f64,
    /// `sum_{i=2,3} C_i eta_i [r(1/eta_i - 1) - sigma^2/2 (eta_i - 1)]`.
    pub weighted_sum: f64,
}

impl SideConditions {
    pub fn hold(&self, branch: ScaleBranch) -> bool {
        match branch {
            ScaleBranch::ThreeRoot => self.c2 < 0.0 && self.c3 < 0.0 && self.weighted_sum > 0.0,
            ScaleBranch::TwoRoot => self.c2 < 0.0,
        }
    }
}

fn cubic(m: &ModelParams, t: f64) -> (f64, f64) {
    // (Psi(t) - r)(t + rho) expanded
    let (r, s2, lambda, rho, mu) = (m.r(), m.sigma2(), m.lambda(), m.rho(), m.mu());
    let a3 = 0.5 * s2;
    let a2 = 0.5 * s2 * rho + mu;
    let a1 = mu * rho - r - lambda;
    let a0 = -r * rho;
    let value = ((a3 * t + a2) * t + a1) * t + a0;
    let slope = (3.0 * a3 * t + 2.0 * a2) * t + a1;
    (value, slope)
}

fn polish_cubic_root(m: &ModelParams, start: f64) -> f64 {
    let mut t = start;
    for _ in 0..ROOT_NEWTON_MAX_ITER {
        let (v, d) = cubic(m, t);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = t - v / d;
        if !next.is_finite() {
            break;
        }
        let done = (next - t).abs() <= ROOT_NEWTON_TOL * (1.0 + t.abs());
        t = next;
        if done {
            break;
        }
    }
    t
}

/// Free-function form of [`ScaleBasis::three_root`].
pub fn build_scale_basis(m: &ModelParams) -> Result<ScaleBasis> {
    ScaleBasis::three_root(m)
}

/// Free-function form of [`ScaleBasis::two_root`].
pub fn build_scale_basis_bs(m: &ModelParams) -> Result<ScaleBasis> {
    ScaleBasis::two_root(m)
}
