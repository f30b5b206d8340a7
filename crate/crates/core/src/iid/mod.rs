//! Relay channels whose relay output is i.i.d. and independent of the input.

mod discrete;
mod gaussian;

pub use gaussian::{
    cor10_gaussian_estimate, iid_gaussian_aux_terms, iid_gaussian_link_residual,
    iid_gaussian_objective, prop4_iid_gaussian, prop4_iid_gaussian_maximizer,
    GaussianAuxiliaries, IidGaussianParams, IidGaussianPoint, K2_GRID,
};
pub use discrete::{
    cf_time_sharing, cor10_estimate, cor10_terms, tu_bound_discrete, tu_terms, Cor10Solution,
    IidDiscreteChannel, TuSolution, MAX_IID_ALPHABET, TIME_SHARING, V_ALPHABET, W_ALPHABET,
};
