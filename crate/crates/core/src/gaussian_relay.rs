//! Scalar Gaussian relay channel `Y = g13 X + g23 Xr + Z`, `Yr = g12 X + Zr`:
//! cutset, decode-forward and compress-forward rates, and the auxiliary
//! receiver upper bound in its closed Gaussian form.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{check_domain, Error, Result};
use crate::info::cap;
use crate::optim::{golden_max, linspace, nelder_mead_max, SearchConfig};

/// Lower edge of the `alpha`, `beta` search box.
pub const ALPHA_BETA_FLOOR: f64 = 1e-6;

/// Discriminant slack tolerated before the `lambda_max` quadratic is declared
/// to have complex roots.
const DISC_TOL: f64 = 1e-12;

/// SNR triple of the scalar Gaussian relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRelaySnr {
    /// Source to relay.
    pub s12: f64,
    /// Source to destination.
    pub s13: f64,
    /// Relay to destination.
    pub s23: f64,
}

impl ScalarRelaySnr {
    pub fn new(s12: f64, s13: f64, s23: f64) -> Result<Self> {
        check_domain("S12", s12, 0.0, f64::INFINITY, "[0, inf)")?;
        check_domain("S13", s13, 0.0, f64::INFINITY, "[0, inf)")?;
        check_domain("S23", s23, 0.0, f64::INFINITY, "[0, inf)")?;
        Ok(Self { s12, s13, s23 })
    }

    fn cross(&self, rho: f64) -> f64 {
        self.s13 + self.s23 + 2.0 * rho * (self.s13 * self.s23).sqrt()
    }
}

/// Cutset bound, the max over `rho` in `[0, 1]` of
/// `min{C(S13+S23+2 rho sqrt(S13 S23)), C((1-rho^2)(S13+S12))}`.
pub fn cutset_gaussian(snr: &ScalarRelaySnr) -> f64 {
    let ScalarRelaySnr { s12, s13, s23 } = *snr;
    if s12 >= s23 && s13 + s12 > 0.0 {
        let num = (s12 * s23).sqrt() + (s13 * (s13 + s12 - s23)).sqrt();
        cap(num * num / (s13 + s12))
    } else {
        cap(s13 + s12)
    }
}

pub fn decode_forward_gaussian(snr: &ScalarRelaySnr) -> f64 {
    let ScalarRelaySnr { s12, s13, s23 } = *snr;
    if s12 >= s23 + s13 && s12 > 0.0 {
        let num = (s13 * (s12 - s23)).sqrt() + (s23 * (s12 - s13)).sqrt();
        cap(num * num / s12)
    } else {
        cap(s12)
    }
}

pub fn compress_forward_gaussian(snr: &ScalarRelaySnr) -> f64 {
    let ScalarRelaySnr { s12, s13, s23 } = *snr;
    cap(s13 + s12 * s23 / (s13 + s12 + s23 + 1.0))
}

/// Coefficients `(a, b, c)` of `a x^2 + b x + c` whose larger root is `lambda_max`.
pub fn lambda_quadratic(snr: &ScalarRelaySnr, rho: f64) -> (f64, f64, f64) {
    let ScalarRelaySnr { s12, s13, s23 } = *snr;
    let cross = 2.0 * rho * (s13 * s23).sqrt();
    let a = s12 + 1.0;
    let b = -(s23 * s12 * (1.0 - rho * rho) + s13 + s23 + s12 + 2.0 + cross);
    let c = cross + s13 + s23 + 1.0;
    (a, b, c)
}

fn lambda_roots(snr: &ScalarRelaySnr, rho: f64) -> Result<(f64, f64)> {
    let (a, b, c) = lambda_quadratic(snr, rho);
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc < -DISC_TOL * b * b.max(1.0) {
            return Err(Error::Numeric(format!(
                "lambda quadratic has complex roots (discriminant {disc}) at rho = {rho}"
            )));
        }
        disc = 0.0;
    }
    // b < 0 always, so -b + sqrt(disc) has no cancellation
    let big = (-b + disc.sqrt()) / (2.0 * a);
    Ok((big, c / (a * big)))
}

/// Larger root of the `lambda` quadratic.
pub fn lambda_max(snr: &ScalarRelaySnr, rho: f64) -> Result<f64> {
    check_domain("rho", rho, -1.0, 1.0, "[-1, 1]")?;
    Ok(lambda_roots(snr, rho)?.0)
}

/// The `(alpha, beta, rho)` operating point with its derived `sigma` and `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Point {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub sigma: f64,
    pub tcap: f64,
}

impl Theorem2Point {
    pub fn is_feasible(&self) -> bool {
        self.sigma.abs() <= 1.0
            && (1.0 - self.alpha) * (1.0 - self.beta)
                >= self.sigma * self.sigma * self.alpha * self.beta
    }
}

/// `sigma`, `T` and `D = sqrt(S12 (1-rho^2) alpha beta)` at a point; `None`
/// when `D = 0` leaves `sigma` undefined.
fn derive(snr: &ScalarRelaySnr, alpha: f64, beta: f64, rho: f64) -> Result<Option<(f64, f64, f64)>> {
    let s = 1.0 - rho * rho;
    let d = (snr.s12 * s * alpha * beta).sqrt();
    if !(d > 0.0) {
        return Ok(None);
    }
    let lam = lambda_roots(snr, rho)?.0;
    let t = ((1.0 + snr.cross(rho)) / (s * snr.s12 + 1.0)).min(lam);
    let sigma = (s * alpha * snr.s13 + 1.0) / (2.0 * t * d) - (s * alpha * snr.s12 + beta) / (2.0 * d);
    Ok(Some((sigma, t, d)))
}

fn check_point(alpha: f64, beta: f64, rho: f64) -> Result<()> {
    check_domain("alpha", alpha, 0.0, 1.0, "[0, 1]")?;
    check_domain("beta", beta, 0.0, 1.0, "[0, 1]")?;
    check_domain("rho", rho, -1.0, 1.0, "[-1, 1]")
}

/// Derived `sigma` and `T` at `(alpha, beta, rho)`; `None` when
/// `alpha beta (1 - rho^2) S12 = 0`.
pub fn theorem2_point(
    snr: &ScalarRelaySnr,
    alpha: f64,
    beta: f64,
    rho: f64,
) -> Result<Option<Theorem2Point>> {
    check_point(alpha, beta, rho)?;
    Ok(derive(snr, alpha, beta, rho)?.map(|(sigma, tcap, _)| Theorem2Point {
        alpha,
        beta,
        rho,
        sigma,
        tcap,
    }))
}

fn rate_unchecked(snr: &ScalarRelaySnr, alpha: f64, beta: f64, rho: f64) -> Result<Option<f64>> {
    let Some((sigma, _, d)) = derive(snr, alpha, beta, rho)? else {
        return Ok(None);
    };
    let feasible = sigma.abs() < 1.0 && (1.0 - alpha) * (1.0 - beta) >= sigma * sigma * alpha * beta;
    if !feasible {
        return Ok(None);
    }
    let s = 1.0 - rho * rho;
    let mid = beta + snr.s12 * s * alpha + 2.0 * sigma * d;
    if !(mid > 0.0) {
        return Ok(None);
    }
    let rate = 0.5 * (s * snr.s12 + 1.0).log2() - 0.5 * mid.log2()
        + 0.5 * (beta * (1.0 - sigma * sigma)).log2()
        + 0.5 * (s * alpha * snr.s13 + 1.0).log2();
    Ok(Some(rate))
}

/// Upper-bound expression at one `(alpha, beta, rho)`; `None` when the point
/// is infeasible or on the degenerate boundary `alpha beta (1-rho^2) = 0`.
pub fn theorem2_rate(snr: &ScalarRelaySnr, alpha: f64, beta: f64, rho: f64) -> Result<Option<f64>> {
    check_point(alpha, beta, rho)?;
    rate_unchecked(snr, alpha, beta, rho)
}

/// `T` at `rho`.
fn tcap(snr: &ScalarRelaySnr, rho: f64) -> Result<f64> {
    let s = 1.0 - rho * rho;
    Ok(((1.0 + snr.cross(rho)) / (s * snr.s12 + 1.0)).min(lambda_roots(snr, rho)?.0))
}

/// Best `beta` for fixed `(alpha, rho)` and its rate.
///
/// With `c2 = S12 (1-rho^2) alpha` and `K = ((1-rho^2) alpha S13 + 1) / T - (1-rho^2) alpha S12`,
/// `sigma = (K - beta) / (2 sqrt(c2 beta))` and the rate is
/// `0.5 log(((1-rho^2) S12 + 1) T g)` with `g = beta - (K - beta)^2 / (4 c2)`.
/// Both feasibility constraints are concave quadratics in `beta`, so the
/// feasible set is an interval and the maximizer is the clamped vertex
/// `K + 2 c2` of `g`.
fn best_beta(snr: &ScalarRelaySnr, alpha: f64, rho: f64, t: f64) -> Option<BestBeta> {
    let s = 1.0 - rho * rho;
    let c2 = snr.s12 * s * alpha;
    if !(c2 > 0.0) {
        return None;
    }
    let k = (s * alpha * snr.s13 + 1.0) / t - s * alpha * snr.s12;
    // |sigma| <= 1
    if k + c2 < 0.0 {
        return None;
    }
    let half = 2.0 * (c2 * (k + c2)).sqrt();
    let (mut lo, mut hi) = (k + 2.0 * c2 - half, k + 2.0 * c2 + half);
    // (1 - alpha)(1 - beta) >= sigma^2 alpha beta
    let m = 4.0 * c2 * (1.0 - alpha) / alpha;
    let disc = m * (m + 4.0 - 4.0 * k);
    if disc < 0.0 {
        return None;
    }
    lo = lo.max(0.5 * (2.0 * k - m - disc.sqrt())).max(ALPHA_BETA_FLOOR);
    hi = hi.min(0.5 * (2.0 * k - m + disc.sqrt())).min(1.0);
    if lo > hi {
        return None;
    }
    let beta = (k + 2.0 * c2).clamp(lo, hi);
    let g = beta - (k - beta).powi(2) / (4.0 * c2);
    (g > 0.0).then(|| BestBeta {
        beta,
        value: 0.5 * ((s * snr.s12 + 1.0) * t * g).log2(),
        lo,
        hi,
    })
}

#[derive(Debug, Clone, Copy)]
struct BestBeta {
    beta: f64,
    value: f64,
    lo: f64,
    hi: f64,
}

fn outer(snr: &ScalarRelaySnr, x: &[f64]) -> f64 {
    let inside = (ALPHA_BETA_FLOOR..=1.0).contains(&x[0]) && (-1.0..=1.0).contains(&x[1]);
    if !inside {
        return f64::NEG_INFINITY;
    }
    match tcap(snr, x[1]) {
        Ok(t) => best_beta(snr, x[0], x[1], t).map_or(f64::NEG_INFINITY, |b| b.value),
        Err(_) => f64::NEG_INFINITY,
    }
}

#[derive(Debug, Clone, Copy)]
struct Cand {
    value: f64,
    x: [f64; 2],
}

/// Larger value first; ties go to the lexicographically smallest point.
fn better(a: &Cand, b: &Cand) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| b.x[0].total_cmp(&a.x[0]))
        .then_with(|| b.x[1].total_cmp(&a.x[1]))
}

fn polish(snr: &ScalarRelaySnr, start: Cand, steps: [f64; 2], cfg: &SearchConfig) -> Cand {
    let bounds = [(ALPHA_BETA_FLOOR, 1.0), (-1.0, 1.0)];
    let mut cur = start;
    for _ in 0..cfg.polish_rounds {
        for k in 0..2 {
            let lo = (cur.x[k] - 2.0 * steps[k]).max(bounds[k].0);
            let hi = (cur.x[k] + 2.0 * steps[k]).min(bounds[k].1);
            let mut x = cur.x;
            let (xk, v) = golden_max(
                |t| {
                    x[k] = t;
                    outer(snr, &x)
                },
                lo,
                hi,
                cfg.tol,
            );
            if v > cur.value {
                cur.x[k] = xk;
                cur.value = v;
            }
        }
    }
    let step = steps[0].min(steps[1]) * 0.5;
    let (x, v) = nelder_mead_max(|x| outer(snr, x), &cur.x, step, 2000, 1e-15);
    if v > cur.value {
        cur = Cand {
            value: v,
            x: [x[0], x[1]],
        };
    }
    cur
}

/// Number of best grid cells that seed a local polish.
const POLISH_SEEDS: usize = 4;

/// Maximizer of [`theorem2_rate`] over the clipped box. For fixed
/// `(alpha, rho)` the best `beta` is exact; the outer `(alpha, rho)` search is
/// a grid followed by coordinate golden-section and Nelder-Mead polish.
pub fn theorem2_maximizer(snr: &ScalarRelaySnr, cfg: &SearchConfig) -> Result<(f64, Theorem2Point)> {
    if snr.s12 == 0.0 {
        return Err(Error::Domain {
            name: "S12",
            value: 0.0,
            domain: "(0, inf) for the auxiliary-receiver bound",
        });
    }
    let n = 4 * cfg.grid.max(2);
    let alphas = linspace(ALPHA_BETA_FLOOR, 1.0, n);
    let rhos = linspace(-1.0, 1.0, n);
    let ts = rhos.iter().map(|&r| tcap(snr, r)).collect::<Result<Vec<f64>>>()?;

    let mut cells: Vec<Cand> = alphas
        .par_iter()
        .flat_map_iter(|&a| {
            rhos.iter().zip(&ts).filter_map(move |(&r, &t)| {
                best_beta(snr, a, r, t).map(|b| Cand { value: b.value, x: [a, r] })
            })
        })
        .collect();
    if cells.is_empty() {
        return Err(Error::Search(format!(
            "no feasible grid point for S12={}, S13={}, S23={}",
            snr.s12, snr.s13, snr.s23
        )));
    }
    cells.sort_by(|a, b| better(b, a));
    let steps = [alphas[1] - alphas[0], rhos[1] - rhos[0]];
    let best = cells
        .iter()
        .take(POLISH_SEEDS)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|c| polish(snr, **c, steps, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .max_by(better)
        .expect("at least one seed");

    let [alpha, rho] = best.x;
    let bb = best_beta(snr, alpha, rho, tcap(snr, rho)?)
        .ok_or_else(|| Error::Search("polished point left the feasible set".into()))?;
    // the interval ends are exact only up to rounding, so step inside if needed
    let mid = 0.5 * (bb.lo + bb.hi);
    let mut found = None;
    for shrink in [0.0, 1e-12, 1e-10, 1e-8, 1e-6] {
        let b = bb.beta + shrink * (mid - bb.beta);
        if let Some(v) = rate_unchecked(snr, alpha, b, rho)? {
            found = Some((v, b));
            break;
        }
    }
    let (value, beta) = found.ok_or_else(|| Error::Search("maximizer failed the feasibility check".into()))?;
    let point = theorem2_point(snr, alpha, beta, rho)?.ok_or_else(|| {
        Error::Search("maximizer landed on the degenerate boundary".into())
    })?;
    Ok((value, point))
}

/// Upper bound: supremum of [`theorem2_rate`] over feasible points.
pub fn theorem2_bound(snr: &ScalarRelaySnr, cfg: &SearchConfig) -> Result<f64> {
    Ok(theorem2_maximizer(snr, cfg)?.0)
}
