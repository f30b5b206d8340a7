//! One-dimensional searches, Nelder-Mead, and search configuration shared by
//! the bound evaluators.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Knobs for the grid/polish/multi-start searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Points per axis of the coarse grid phase.
    pub grid: usize,
    /// Rounds of coordinate-wise golden-section polish.
    pub polish_rounds: usize,
    /// Interval tolerance of each golden-section polish.
    pub tol: f64,
    /// Random restarts for multi-start searches.
    pub restarts: usize,
    /// Sweeps of coordinate ascent per restart.
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 50,
            polish_rounds: 3,
            tol: 1e-10,
            restarts: 64,
            sweeps: 60,
            seed: 0,
        }
    }
}

impl SearchConfig {
    /// Coarser grids and fewer restarts.
    pub fn fast() -> Self {
        Self {
            grid: 24,
            polish_rounds: 3,
            tol: 1e-10,
            restarts: 16,
            sweeps: 40,
            seed: 0,
        }
    }

    pub fn thorough() -> Self {
        Self::default()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`. Returns the
/// best point seen, including the endpoints.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f(lo));
    let fb = f(hi);
    if fb > best.1 {
        best = (hi, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a < f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Golden-section minimization, the mirror of [`golden_max`].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Root of `f` on `[lo, hi]` by bisection; the endpoint values must differ
/// in sign (a zero endpoint is returned directly).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::Numeric(format!(
            "no sign change on [{lo}, {hi}]: f = {fa}, {fb}"
        )));
    }
    let neg_at_a = fa < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= tol || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Nelder-Mead maximization from `x0` with initial simplex edge `step`.
/// Box constraints are the caller's business (return `-inf` outside).
pub fn nelder_mead_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let mut v = f(&x);
        if !v.is_finite() {
            x[i] = x0[i] - step;
            v = f(&x);
        }
        simplex.push((x, v));
    }
    let mut evals = n + 1;
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };

    while evals < max_evals {
        simplex.sort_by(|a, b| key(b.1).total_cmp(&key(a.1)));
        let best = key(simplex[0].1);
        let worst = key(simplex[n].1);
        if best.is_finite() && worst.is_finite() && (best - worst).abs() <= ftol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, w: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(w)
                .map(|(c, xw)| c + t * (c - xw))
                .collect()
        };
        let worst_x = simplex[n].0.clone();
        let xr = along(1.0, &worst_x);
        let fr = key(f(&xr));
        evals += 1;
        let second = key(simplex[n - 1].1);
        if fr > best {
            let xe = along(2.0, &worst_x);
            let fe = key(f(&xe));
            evals += 1;
            simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
        } else if fr > second {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr > worst {
                let xc = along(0.5, &worst_x);
                let fc = key(f(&xc));
                (xc, fc)
            } else {
                let xc = along(-0.5, &worst_x);
                let fc = key(f(&xc));
                (xc, fc)
            };
            evals += 1;
            if fc > worst.max(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xj, bj) in x.iter_mut().zip(&x_best) {
                        *xj = bj + 0.5 * (*xj - bj);
                    }
                    *v = key(f(x));
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| key(b.1).total_cmp(&key(a.1)));
    simplex.swap_remove(0)
}

/// Pairwise mass-transfer ascent over a product of simplices. `x` holds the
/// concatenated blocks listed in `blocks`; each move shifts mass between two
/// entries of one block, with the amount chosen by golden section. Stops after
/// `sweeps` passes or once a pass gains less than `gain_tol`. Returns the final
/// value, the number of objective evaluations, and whether the gain test (not
/// the sweep cap) ended the run.
pub fn simplex_ascent<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &mut [f64],
    blocks: &[std::ops::Range<usize>],
    sweeps: usize,
    line_tol: f64,
    gain_tol: f64,
) -> (f64, usize, bool) {
    let mut value = f(x);
    let mut evals = 1;
    let mut trial = x.to_vec();
    for _ in 0..sweeps {
        let start = value;
        for block in blocks {
            for i in block.clone() {
                for j in block.clone().filter(|&j| j > i) {
                    let (a, b) = (x[i], x[j]);
                    if a + b <= 0.0 {
                        continue;
                    }
                    // t moves mass from entry i to entry j
                    let (t, ft) = golden_max(
                        |t| {
                            trial[i] = a - t;
                            trial[j] = b + t;
                            evals += 1;
                            let v = f(&trial);
                            if v.is_nan() {
                                f64::NEG_INFINITY
                            } else {
                                v
                            }
                        },
                        -b,
                        a,
                        line_tol,
                    );
                    if ft > value {
                        value = ft;
                        x[i] = (a - t).max(0.0);
                        x[j] = (b + t).max(0.0);
                    }
                    trial[i] = x[i];
                    trial[j] = x[j];
                }
            }
        }
        if value - start < gain_tol {
            return (value, evals, true);
        }
    }
    (value, evals, false)
}

/// Generator for restart `stream` of a search seeded with `seed`.
pub(crate) fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Overwrites `p` with a uniform draw from the probability simplex.
pub(crate) fn random_simplex(rng: &mut ChaCha8Rng, p: &mut [f64]) {
    for v in p.iter_mut() {
        *v = -(1.0 - rng.random::<f64>()).ln();
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
}

/// Runs `run(0..n)` concurrently and keeps the largest value, preferring the
/// lowest index on ties. NaN values never win.
pub(crate) fn best_restart<T, F>(n: usize, run: F) -> Option<(usize, f64, T)>
where
    T: Send,
    F: Fn(usize) -> (f64, T) + Sync,
{
    let results: Vec<(f64, T)> = (0..n).into_par_iter().map(&run).collect();
    let mut best: Option<(usize, f64, T)> = None;
    for (i, (v, t)) in results.into_iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((i, v, t));
        }
    }
    best
}

/// `points` values evenly spaced on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}
