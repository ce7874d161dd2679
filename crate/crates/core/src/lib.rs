//! Pricing of perpetual American puts that are cancelled at the last time the
//! underlying is at or above a barrier `h > K`.
//!
//! The log-price is a spectrally negative jump-diffusion (Brownian motion
//! with drift minus compound Poisson exponential jumps) under the martingale
//! measure. The crate provides
//!
//! * [`model`]: parameters, Laplace exponent and cancellation exponent,
//! * [`scale`]: the scale functions `W^(r)`, `Z^(r)` in closed form,
//! * [`pricer`]: the adjusted payoff, threshold values, the optimal
//!   threshold, the price and HJB diagnostics,
//! * [`mc`]: an independent Monte Carlo oracle,
//! * [`quad`]: adaptive quadrature used by the generator and by checks.

pub mod error;
pub mod mc;
pub mod model;
pub mod pricer;
pub mod quad;
pub mod scale;

pub use error::{PricingError, Result};
pub use mc::{
    estimate_passage_factors, estimate_value, grid_search_threshold, simulate_to_threshold,
    CrossingType, GridMethod, LogDynamics, McConfig, McEstimate, McMode, Passage, PathRecord,
};
pub use model::{laplace_exponent, make_model, ModelParams};
pub use pricer::{
    bs_reference, creeping_factor, g_integral, g_payoff, generator_apply, h_function,
    optimal_threshold, price, undershoot_factor, value_at_threshold, BsReference, Contract,
    PriceReport, Pricer, Region,
};
pub use scale::{build_scale_basis, build_scale_basis_bs, ScaleBasis, ScaleBranch};
