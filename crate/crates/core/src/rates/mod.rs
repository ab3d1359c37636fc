//! Explicit rates as big naturals, over a small algebra of counterfunctions.

mod counterfn;
mod exact;
mod formulas;
mod value;

pub use counterfn::{BiCounterfunction, Counterfunction, FnNat, NatFunction, ParseError, MONOTONIZE_EXACT_LIMIT};
pub use exact::{ceil_div, ceil_ln, ceil_scaled_exp};
pub use formulas::{
    bound_n_star, hat, iterate, omega1, omega2, psi_from_phi, r_of_k, zeta, zeta_star, ChiT, RateContext, RateError, RateKind,
    ScenarioBounds, ITERATE_STEP_LIMIT,
};
pub use value::{Cap, RateValue, DEFAULT_CAP_BITS};
