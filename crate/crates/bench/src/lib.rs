//! Fixtures shared by the criterion benchmarks.

use cancelput_core::{Contract, ModelParams};

/// Black-Scholes case: r = 5%, sigma^2 = 0.2, K = 100, h = 120, s0 = 110.
pub fn bs_setup() -> (ModelParams, Contract) {
    (
        ModelParams::new(0.05, 0.2, 0.0, 1.0).expect("valid parameters"),
        Contract::new(100.0, 120.0, 110.0).expect("valid contract"),
    )
}

/// Same contract with exponential down-jumps, lambda = 5, rho = 2.
pub fn jump_setup() -> (ModelParams, Contract) {
    (
        ModelParams::new(0.05, 0.2, 5.0, 2.0).expect("valid parameters"),
        Contract::new(100.0, 120.0, 110.0).expect("valid contract"),
    )
}
