//! Gaussian relay with i.i.d. relay output: `Yr = Zr`, `Y1 = X + Yr + Z1`,
//! power `P` on `X` and a relay link of `C0` bits.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{check_domain, Error, Result};
use crate::info::cap;
use crate::optim::{bisect, golden_max, nelder_mead_max, SearchConfig};

/// Samples of `K2` on the log grid of the outer search.
pub const K2_GRID: usize = 2000;
/// Samples of `K1` scanned for sign changes of the link residual.
const K1_SCAN: usize = 64;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidGaussianParams {
    pub p: f64,
    pub n1: f64,
    pub nr: f64,
    pub c0: f64,
}

impl IidGaussianParams {
    pub fn new(p: f64, n1: f64, nr: f64, c0: f64) -> Result<Self> {
        check_domain("P", p, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
        check_domain("N1", n1, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
        check_domain("Nr", nr, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
        check_domain("C0", c0, 0.0, f64::INFINITY, "[0, inf)")?;
        Ok(Self { p, n1, nr, c0 })
    }

    /// `C(P / N1)`: the rate with the relay output known at the destination.
    pub fn ceiling(&self) -> f64 {
        cap(self.p / self.n1)
    }

    /// `C(P / (N1 + Nr))`: the rate without the relay.
    pub fn floor(&self) -> f64 {
        cap(self.p / (self.n1 + self.nr))
    }
}

/// Conditional covariance `[[K1, rho sqrt(K1 K2)], [., K2]]` of `(X, Yr)`
/// given the auxiliary, with its bound value and constraint residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidGaussianPoint {
    pub k1: f64,
    pub k2: f64,
    pub rho: f64,
    pub value: f64,
    /// `I(V;Yr) - I(V;Y1) - C0`.
    pub link_residual: f64,
    /// `(P - K1)(Nr - K2) - rho^2 K1 K2`.
    pub covariance_residual: f64,
}

/// `I(X;Y1|V) - I(X;Yr|V)` at a conditional covariance.
pub fn iid_gaussian_objective(p: &IidGaussianParams, k1: f64, k2: f64, rho: f64) -> f64 {
    let signal = (k1.sqrt() + rho * k2.sqrt()).powi(2);
    0.5 * (1.0 + signal / (k2 * (1.0 - rho * rho) + p.n1)).log2() + 0.5 * (1.0 - rho * rho).log2()
}

/// `I(V;Yr) - I(V;Y1) - C0` at a conditional covariance.
pub fn iid_gaussian_link_residual(p: &IidGaussianParams, k1: f64, k2: f64, rho: f64) -> f64 {
    let y1_given_v = k1 + k2 + 2.0 * rho * (k1 * k2).sqrt() + p.n1;
    0.5 * (p.nr / k2).log2() - 0.5 * (p.p + p.nr + p.n1).log2() + 0.5 * y1_given_v.log2() - p.c0
}

/// Correlation that puts the covariance on the boundary `(P-K1)(Nr-K2) = rho^2 K1 K2`.
fn boundary_rho(p: &IidGaussianParams, k1: f64, k2: f64) -> f64 {
    let num = (p.p - k1).max(0.0) * (p.nr - k2).max(0.0);
    if num == 0.0 {
        0.0
    } else {
        (num / (k1 * k2)).sqrt().min(1.0)
    }
}

/// Best point on the covariance boundary with `K2` fixed and the link
/// constraint satisfied; `None` when no `K1` satisfies it. The feasible set
/// in `K1` is a union of intervals whose inner ends are the roots of the link
/// residual, found by bisection.
fn best_at_k2(p: &IidGaussianParams, k2: f64) -> Option<IidGaussianPoint> {
    // rho <= 1 requires K1 >= P (1 - K2/Nr)
    let lo = p.p * (1.0 - k2 / p.nr).max(0.0);
    let residual = |k1: f64| iid_gaussian_link_residual(p, k1, k2, boundary_rho(p, k1, k2));
    let objective = |k1: f64| iid_gaussian_objective(p, k1, k2, boundary_rho(p, k1, k2));
    let ks: Vec<f64> = (0..=K1_SCAN)
        .map(|i| lo + (p.p - lo) * i as f64 / K1_SCAN as f64)
        .collect();
    let rs: Vec<f64> = ks.iter().map(|&k| residual(k)).collect();
    let mut ends = vec![lo];
    for i in 0..K1_SCAN {
        if (rs[i] > 0.0) != (rs[i + 1] > 0.0) {
            if let Ok(k) = bisect(residual, ks[i], ks[i + 1], 1e-15 * p.p) {
                ends.push(k);
            }
        }
    }
    ends.push(p.p);
    let mut candidates = Vec::new();
    for w in ends.windows(2) {
        let (u, v) = (w[0], w[1]);
        if residual(0.5 * (u + v)) > 0.0 {
            continue;
        }
        candidates.extend([u, v, golden_max(objective, u, v, 1e-14 * p.p).0]);
    }
    candidates
        .into_iter()
        .filter(|&k1| k1 > 0.0 && residual(k1) <= RESIDUAL_TOL)
        .filter_map(|k1| {
            let rho = boundary_rho(p, k1, k2);
            let value = iid_gaussian_objective(p, k1, k2, rho);
            value.is_finite().then(|| IidGaussianPoint {
                k1,
                k2,
                rho,
                value,
                link_residual: iid_gaussian_link_residual(p, k1, k2, rho),
                covariance_residual: (p.p - k1) * (p.nr - k2) - rho * rho * k1 * k2,
            })
        })
        .max_by(|a, b| a.value.total_cmp(&b.value))
}

/// Maximizer of the auxiliary-variable upper bound for the Gaussian i.i.d.
/// output relay, over conditional covariances on the boundary of the input
/// covariance that satisfy the link constraint.
pub fn prop4_iid_gaussian_maximizer(
    p: &IidGaussianParams,
    cfg: &SearchConfig,
) -> Result<IidGaussianPoint> {
    // deep enough that C0 = 10 bits is reached well inside the grid
    let k2_min = p.nr * (1e-12f64).min((-2.0 * p.c0).exp2() * 1e-6);
    let (a, b) = (k2_min.ln(), p.nr.ln());
    let k2_at = |i: usize| {
        if i + 1 == K2_GRID {
            p.nr
        } else {
            (a + (b - a) * i as f64 / (K2_GRID - 1) as f64).exp()
        }
    };
    let grid: Vec<Option<IidGaussianPoint>> =
        (0..K2_GRID).into_par_iter().map(|i| best_at_k2(p, k2_at(i))).collect();
    let (best_i, mut best) = grid
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .fold(None, |acc: Option<(usize, IidGaussianPoint)>, (i, s)| match acc {
            Some((_, b)) if b.value >= s.value => acc,
            _ => Some((i, s)),
        })
        .ok_or_else(|| Error::Search("no K2 sample admits a feasible K1".into()))?;
    let lo = k2_at(best_i.saturating_sub(1)).ln();
    let hi = k2_at((best_i + 1).min(K2_GRID - 1)).ln();
    let (t, _) = golden_max(
        |t| best_at_k2(p, t.exp()).map_or(f64::NEG_INFINITY, |s| s.value),
        lo,
        hi,
        cfg.tol.max(1e-12),
    );
    if let Some(s) = best_at_k2(p, t.exp()) {
        if s.value > best.value {
            best = s;
        }
    }
    Ok(best)
}

/// Auxiliary-variable upper bound for the Gaussian i.i.d. output relay.
pub fn prop4_iid_gaussian(p: &IidGaussianParams, cfg: &SearchConfig) -> Result<f64> {
    Ok(prop4_iid_gaussian_maximizer(p, cfg)?.value)
}

/// Jointly Gaussian auxiliaries `W = Yr + Zw` and `V = a X + b Yr + Zv`
/// with `Zv` of unit variance and `Nw` the variance of `Zw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAuxiliaries {
    /// `None` when `W` is absent (independent of everything).
    pub nw: Option<f64>,
    pub a: f64,
    pub b: f64,
}

/// `(value, I(V,W;Yr) - I(V,W;Y1) - I(W;Yr), I(W;Yr))` of the auxiliary-receiver
/// bound with constant auxiliary receiver and degenerate time sharing.
pub fn iid_gaussian_aux_terms(p: &IidGaussianParams, aux: &GaussianAuxiliaries) -> (f64, f64, f64) {
    // variables: X, Yr, Y1, W, V
    const X: usize = 0;
    const YR: usize = 1;
    const Y1: usize = 2;
    const W: usize = 3;
    const V: usize = 4;
    let (a, b) = (aux.a, aux.b);
    let nw = aux.nw.unwrap_or(f64::INFINITY);
    let mut k = DMatrix::<f64>::zeros(5, 5);
    let mut set = |i: usize, j: usize, v: f64| {
        k[(i, j)] = v;
        k[(j, i)] = v;
    };
    set(X, X, p.p);
    set(YR, YR, p.nr);
    set(Y1, Y1, p.p + p.nr + p.n1);
    set(V, V, a * a * p.p + b * b * p.nr + 1.0);
    set(X, Y1, p.p);
    set(X, V, a * p.p);
    set(YR, Y1, p.nr);
    set(YR, V, b * p.nr);
    set(Y1, V, a * p.p + b * p.nr);
    let with_w = nw.is_finite();
    if with_w {
        set(W, W, p.nr + nw);
        set(YR, W, p.nr);
        set(Y1, W, p.nr);
        set(W, V, b * p.nr);
    } else {
        set(W, W, 1.0);
    }
    let logdet = |idx: &[usize]| {
        if idx.is_empty() {
            return 0.0;
        }
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| k[(idx[r], idx[c])]);
        sub.determinant().log2()
    };
    let cmi = |a: &[usize], b: &[usize], c: &[usize]| {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        (0.5 * (logdet(&ac) + logdet(&bc) - logdet(&abc) - logdet(c))).max(0.0)
    };
    let value = cmi(&[X], &[Y1], &[W, V]) - cmi(&[X], &[YR], &[W, V]);
    let w_yr = cmi(&[W], &[YR], &[]);
    let first = cmi(&[V, W], &[YR], &[]) - cmi(&[V, W], &[Y1], &[]) - w_yr;
    (value, first, w_yr)
}

/// Best value found for the auxiliary-receiver bound within the Gaussian
/// family of [`GaussianAuxiliaries`]. A lower estimate of that bound.
pub fn cor10_gaussian_estimate(
    p: &IidGaussianParams,
    cfg: &SearchConfig,
) -> Result<(f64, GaussianAuxiliaries)> {
    // W is parameterized by the fraction u of the link it uses
    let aux_of = |u: f64, la: f64, b: f64| {
        let nw = (u > 0.0).then(|| p.nr / ((2.0 * u * p.c0).exp2() - 1.0));
        GaussianAuxiliaries {
            nw: nw.filter(|v| v.is_finite() && *v > 0.0),
            a: la.exp2(),
            b,
        }
    };
    let feasible_value = |aux: &GaussianAuxiliaries| {
        let (v, first, w_yr) = iid_gaussian_aux_terms(p, aux);
        (first <= 1e-12 && w_yr <= p.c0 + 1e-12 && v.is_finite()).then_some(v)
    };
    let n = cfg.grid.max(8);
    let us: Vec<f64> = (0..=n / 2).map(|i| i as f64 / (n / 2) as f64).collect();
    let las: Vec<f64> = (0..=n).map(|i| -10.0 + 20.0 * i as f64 / n as f64).collect();
    let bs: Vec<f64> = (0..=n).map(|i| -4.0 + 8.0 * i as f64 / n as f64).collect();
    let mut points = Vec::with_capacity(us.len() * las.len() * bs.len());
    for &u in &us {
        for &la in &las {
            points.extend(bs.iter().map(|&b| (u, la, b)));
        }
    }
    let best = points
        .par_iter()
        .filter_map(|&(u, la, b)| feasible_value(&aux_of(u, la, b)).map(|v| (v, (u, la, b))))
        .reduce_with(|x, y| if y.0 > x.0 { y } else { x })
        .ok_or_else(|| Error::Search("no feasible Gaussian auxiliary on the grid".into()))?;
    let (x, v) = nelder_mead_max(
        |z| {
            if !(0.0..=1.0).contains(&z[0]) {
                return f64::NEG_INFINITY;
            }
            feasible_value(&aux_of(z[0], z[1], z[2])).unwrap_or(f64::NEG_INFINITY)
        },
        &[best.1 .0, best.1 .1, best.1 .2],
        0.05,
        2000,
        1e-13,
    );
    let (u, la, b) = best.1;
    let mut out = if v > best.0 {
        (v, aux_of(x[0], x[1], x[2]))
    } else {
        (best.0, aux_of(u, la, b))
    };
    let absent = GaussianAuxiliaries { nw: None, a: 0.0, b: 0.0 };
    if let Some(v) = feasible_value(&absent).filter(|&v| v > out.0) {
        out = (v, absent);
    }
    Ok(out)
}
