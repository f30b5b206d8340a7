//! Information-theoretic primitives over small finite alphabets.
//!
//! All logarithms are base 2, so every quantity is in bits.

mod capacity;
mod envelope;
mod table;

pub use capacity::{dmc_capacity, DmcCapacity};
pub use envelope::{upper_concave_envelope, upper_hull_of_points, PiecewiseLinearFn};
pub use table::{
    entropy, mutual_information, mutual_information_given, ProbTable, NORMALIZATION_TOL,
    ZERO_MASS,
};

#[cfg(test)]
pub(crate) use table::cond_entropy;
pub(crate) use table::{cond_mi, entropy_of_slice};

use crate::error::{check_domain, Result};

/// Binary entropy `H2(x) = -x log x - (1-x) log(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_domain("x", x, 0.0, 1.0, "[0, 1]")?;
    Ok(h2(x))
}

/// Unchecked binary entropy; arguments are clamped into `[0, 1]`.
pub(crate) fn h2(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p > ZERO_MASS { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Binary convolution `a * b = a(1-b) + (1-a)b`.
pub(crate) fn bconv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Gaussian capacity function `C(x) = 0.5 log2(1 + x)`.
pub fn gaussian_capacity(snr: f64) -> Result<f64> {
    check_domain("snr", snr, 0.0, f64::INFINITY, "[0, inf)")?;
    Ok(cap(snr))
}

/// Unchecked `C(x)`.
#[inline]
pub(crate) fn cap(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}
