//! Gaussian product-form primitive relay `Y1 = X + W1`, `Yr = X + Wr` with a
//! noiseless relay link of capacity `C0`.
//!
//! Power is normalized to `P = 1`, so `N1 = 1/S13` and `Nr = 1/S12`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{check_domain, Error, Result};
use crate::info::cap;

/// Parameters of the Gaussian product-form relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveGaussianParams {
    pub s12: f64,
    pub s13: f64,
    /// Relay link capacity in bits.
    pub c0: f64,
    /// `2^{2 C0} - 1`.
    pub s23: f64,
}

impl PrimitiveGaussianParams {
    pub fn new(s12: f64, s13: f64, c0: f64) -> Result<Self> {
        check_domain("S12", s12, 0.0, f64::INFINITY, "[0, inf)")?;
        check_domain("S13", s13, 0.0, f64::INFINITY, "[0, inf)")?;
        check_domain("C0", c0, 0.0, f64::INFINITY, "[0, inf)")?;
        Ok(Self {
            s12,
            s13,
            c0,
            s23: (2.0 * c0).exp2() - 1.0,
        })
    }

    /// Parameters with the relay link given as an SNR.
    pub fn from_s23(s12: f64, s13: f64, s23: f64) -> Result<Self> {
        check_domain("S23", s23, 0.0, f64::INFINITY, "[0, inf)")?;
        let mut p = Self::new(s12, s13, 0.5 * (1.0 + s23).log2())?;
        p.s23 = s23;
        Ok(p)
    }

    /// `S13 + S23 + S13 S23`, the S12 threshold separating the two regimes.
    pub fn threshold(&self) -> f64 {
        self.s13 + self.s23 + self.s13 * self.s23
    }

    /// `(P, N1, Nr)` with `P = 1`.
    pub fn noise(&self) -> (f64, f64, f64) {
        (1.0, 1.0 / self.s13, 1.0 / self.s12)
    }
}

/// Upper bound from the auxiliary-receiver argument, closed form.
pub fn prop5_bound(p: &PrimitiveGaussianParams) -> f64 {
    let d = p.threshold();
    if p.s12 <= d {
        if d == 0.0 {
            return cap(p.s13);
        }
        cap(p.s13 + p.s12 * (p.s13 + 1.0) * p.s23 / d)
    } else {
        0.5 * ((1.0 + p.s13) * (1.0 + p.s23)).log2()
    }
}

pub fn df_product_form(p: &PrimitiveGaussianParams) -> f64 {
    if p.s12 <= p.threshold() {
        cap(p.s12)
    } else {
        0.5 * ((1.0 + p.s13) * (1.0 + p.s23)).log2()
    }
}

pub fn cf_product_form(p: &PrimitiveGaussianParams) -> f64 {
    let den = p.s12 + (p.s13 + 1.0) * (p.s23 + 1.0);
    cap(p.s13 + p.s12 * (p.s13 + 1.0) * p.s23 / den)
}

/// Cutset bound `min{C(S13) + C0, C(S13 + S12)}`.
pub fn cutset_product_form(p: &PrimitiveGaussianParams) -> f64 {
    (cap(p.s13) + p.c0).min(cap(p.s13 + p.s12))
}

/// Conditional covariance of `(X, Yr)` given the auxiliary, parameterized as
/// `[[K1, rho sqrt(K1 K2)], [rho sqrt(K1 K2), K2]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovPoint {
    pub k1: f64,
    pub k2: f64,
    pub rho: f64,
}

impl CovPoint {
    /// Slack of `(P-K1)(P+Nr-K2) >= (P - rho sqrt(K1 K2))^2`; nonnegative iff
    /// the covariance is dominated by that of `(X, Yr)`.
    pub fn psd_slack(&self, p: &PrimitiveGaussianParams) -> f64 {
        let (pw, _, nr) = p.noise();
        let cross = pw - self.rho * (self.k1 * self.k2).sqrt();
        (pw - self.k1) * (pw + nr - self.k2) - cross * cross
    }

    /// Slack of the relay-link constraint, `C0` minus its left side.
    pub fn link_slack(&self, p: &PrimitiveGaussianParams) -> f64 {
        let (pw, n1, nr) = p.noise();
        p.c0 - 0.5 * ((pw + nr) / self.k2).log2() - 0.5 * ((self.k1 + n1) / (pw + n1)).log2()
    }
}

/// Rate expression of the covariance program:
/// `0.5 log((P+Nr)/Nr) + 0.5 log((K1+N1)/N1) + 0.5 log(1-rho^2)`.
pub fn covariance_objective(p: &PrimitiveGaussianParams, point: &CovPoint) -> f64 {
    let (pw, n1, nr) = p.noise();
    0.5 * ((pw + nr) / nr).log2() + 0.5 * ((point.k1 + n1) / n1).log2() + 0.5 * (1.0 - point.rho * point.rho).log2()
}

/// The two roots in `K1` of the stationarity condition, `(K1a, K1b)`.
pub fn lemma14_roots(p: &PrimitiveGaussianParams) -> (f64, f64) {
    let (pw, n1, nr) = p.noise();
    let u = (-2.0 * p.c0).exp2();
    let zeta = (pw + nr) / (pw + n1);
    let k1a = -n1 * (zeta - u * zeta) / (1.0 - u * zeta) + pw * (1.0 - zeta) / (1.0 - u * zeta);
    let den = zeta * (u - 1.0) * ((n1 + pw).powi(2) - n1 * n1 * u) + (1.0 - zeta) * u * pw * pw;
    let k1b = pw * (1.0 - pw * (n1 + pw) * (u - 1.0) / den);
    (k1a, k1b)
}

/// Completes a `K1` to the point where both the link and the covariance
/// constraints are tight.
fn complete(p: &PrimitiveGaussianParams, k1: f64) -> CovPoint {
    let (pw, n1, nr) = p.noise();
    let k2 = (k1 + n1) * (pw + nr) / ((pw + n1) * (2.0 * p.c0).exp2());
    let q = ((pw - k1) * (pw + nr - k2)).max(0.0);
    let rho = (pw - q.sqrt()) / (k1 * k2).sqrt();
    CovPoint { k1, k2, rho }
}

/// Maximizer of the covariance program. Of the two stationary roots, the one
/// inside `[0, P]` that yields a valid correlation and the larger objective is
/// returned.
pub fn lemma14_optimizers(p: &PrimitiveGaussianParams) -> Result<CovPoint> {
    if !(p.s12 > 0.0 && p.s13 > 0.0) {
        return Err(Error::Domain {
            name: "S12, S13",
            value: p.s12.min(p.s13),
            domain: "(0, inf)",
        });
    }
    let (pw, _, nr) = p.noise();
    if p.c0 == 0.0 {
        // the link constraint forces K1 = P and K2 = P + Nr
        return Ok(CovPoint {
            k1: pw,
            k2: pw + nr,
            rho: (pw / (pw + nr)).sqrt(),
        });
    }
    let (k1a, k1b) = lemma14_roots(p);
    [k1a, k1b]
        .into_iter()
        .filter(|k| k.is_finite() && *k > 0.0 && *k <= pw * (1.0 + 1e-12))
        .map(|k| complete(p, k.min(pw)))
        .filter(|c| c.rho.is_finite() && (0.0..1.0).contains(&c.rho) && c.k2 > 0.0)
        .map(|c| (covariance_objective(p, &c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
        .ok_or_else(|| Error::Numeric(format!("no admissible stationary root for {p:?}")))
}

fn theta_floor(p: &PrimitiveGaussianParams) -> f64 {
    (1.0 / (1.0 + p.s23)).asin()
}

/// Inner function of the geometric bound,
/// `0.5 log((S12+S13+sin^2 w - 2 cos w sqrt(S12 S13)) sin^2 t / ((S13+1)(sin^2 t - cos^2 w)))`.
pub fn h_theta(p: &PrimitiveGaussianParams, theta: f64, omega: f64) -> Result<f64> {
    check_domain("theta", theta, theta_floor(p), FRAC_PI_2, "[arcsin(1/(1+S23)), pi/2]")?;
    let s2 = theta.sin().powi(2);
    let c = omega.cos();
    let gap = s2 - c * c;
    if !(omega > FRAC_PI_2 - theta && omega <= FRAC_PI_2) || !(gap > 0.0) {
        return Err(Error::Domain {
            name: "omega",
            value: omega,
            domain: "(pi/2 - theta, pi/2]",
        });
    }
    Ok(h_raw(p, s2, c))
}

fn h_raw(p: &PrimitiveGaussianParams, sin2_theta: f64, cos_omega: f64) -> f64 {
    let sin2_omega = 1.0 - cos_omega * cos_omega;
    let num = (p.s12 + p.s13 + sin2_omega - 2.0 * cos_omega * (p.s12 * p.s13).sqrt()) * sin2_theta;
    0.5 * (num / ((p.s13 + 1.0) * (sin2_theta - cos_omega * cos_omega))).log2()
}

/// Smaller root of `x^2 - ((S12+S13+cos^2 t)/sqrt(S12 S13)) x + sin^2 t`, the
/// cosine of the inner minimizer.
pub fn cos_omega_star(p: &PrimitiveGaussianParams, theta: f64) -> f64 {
    let k = (p.s12 * p.s13).sqrt();
    let c2 = theta.cos().powi(2);
    let s2 = 1.0 - c2;
    let b = p.s12 + p.s13 + c2;
    if k == 0.0 {
        return 0.0;
    }
    let disc = (b * b - 4.0 * k * k * s2).max(0.0);
    2.0 * k * s2 / (b + disc.sqrt())
}

/// `sin^2` of the outer maximizer when `S12 < S13 + S23 + S13 S23`.
pub fn sin2_theta_star(p: &PrimitiveGaussianParams) -> Result<f64> {
    let d = p.threshold();
    if !(p.s12 < d) {
        return Err(Error::Domain {
            name: "S12",
            value: p.s12,
            domain: "[0, S13 + S23 + S13 S23)",
        });
    }
    Ok((1.0 + p.s23 * p.s12 / d) / (1.0 + p.s23))
}

fn wu_at(p: &PrimitiveGaussianParams, sin2_theta: f64) -> f64 {
    let theta = sin2_theta.sqrt().min(1.0).asin();
    let link = p.c0 + 0.5 * sin2_theta.log2();
    let inner = h_raw(p, sin2_theta, cos_omega_star(p, theta));
    link.min(inner)
}

/// Geometric upper bound, evaluated with the closed-form inner minimizer and
/// outer maximizer.
pub fn wu_bound(p: &PrimitiveGaussianParams) -> f64 {
    let d = p.threshold();
    let base = cap(p.s13);
    let case1 = || wu_at(p, 1.0);
    let case2 = || wu_at(p, (1.0 + p.s23 * p.s12 / d) / (1.0 + p.s23));
    let sup = if p.s12 > d {
        case1()
    } else if p.s12 < d {
        case2()
    } else {
        case1().max(case2())
    };
    base + sup
}
