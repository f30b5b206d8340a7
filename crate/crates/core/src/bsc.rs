//! Symmetric binary primitive relay: `Y1` and `Yr` are independent BSC(rho)
//! observations of `X`, plus a relay link of capacity `C0`.

use rayon::prelude::*;

use crate::error::{check_domain, Error, Result};
use crate::info::{bconv, h2, upper_concave_envelope, upper_hull_of_points};
use crate::optim::{bisect, linspace, nelder_mead_max};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscParams {
    /// Crossover probability of both BSCs.
    pub rho: f64,
    pub c0: f64,
}

impl BscParams {
    pub fn new(rho: f64, c0: f64) -> Result<Self> {
        check_domain("rho", rho, 0.0, 0.5, "[0, 1/2]")?;
        check_domain("C0", c0, 0.0, f64::INFINITY, "[0, inf)")?;
        Ok(Self { rho, c0 })
    }
}

/// Grid densities for the `g_lambda` family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscGrids {
    /// Points of the `lambda` grid on `[0, 1]`.
    pub lambdas: usize,
    /// Points of the `c` grid on `[0, 1]`; `rho` is always added.
    pub cs: usize,
    /// Points per axis of the inner `(p01, p00)` grid.
    pub inner: usize,
}

impl Default for BscGrids {
    fn default() -> Self {
        Self {
            lambdas: 101,
            cs: 401,
            inner: 201,
        }
    }
}

impl BscGrids {
    pub fn fast() -> Self {
        Self {
            lambdas: 51,
            cs: 201,
            inner: 61,
        }
    }

    fn check(&self) -> Result<()> {
        if self.lambdas < 1 || self.cs < 2 || self.inner < 2 {
            return Err(Error::InvalidAbscissae(format!("grids too small: {self:?}")));
        }
        Ok(())
    }
}

/// The two `lambda`-free parts of the `g_lambda` objective at a joint law of
/// `(X, Yr)`: `H(Y1) - H(Yr)` and `H(Yr|X)`.
fn parts(rho: f64, c: f64, p01: f64, p00: f64) -> (f64, f64) {
    let p10 = c - p01;
    let p11 = 1.0 - c - p00;
    let p0 = p00 + p01;
    let p1 = p10 + p11;
    let hy1 = h2(bconv(rho, p1));
    let hyr = h2(p01 + p11);
    let cond = |mass: f64, part: f64| if mass > 0.0 { mass * h2(part / mass) } else { 0.0 };
    (hy1 - hyr, cond(p0, p01) + cond(p1, p11))
}

fn objective(rho: f64, lambda: f64, c: f64, x: &[f64]) -> f64 {
    let (p01, p00) = (x[0], x[1]);
    if !(0.0..=c).contains(&p01) || !(0.0..=1.0 - c).contains(&p00) {
        return f64::NEG_INFINITY;
    }
    let (d, cond) = parts(rho, c, p01, p00);
    (1.0 - lambda) * d + cond
}

/// Candidate `(p01, p00)` points of one `c` slice that can maximize
/// `(1 - lambda) d + cond` for some `lambda` in `[0, 1]`: the vertices of the
/// upper hull of `(d, cond)`.
struct Slice {
    c: f64,
    step: (f64, f64),
    vertices: Vec<(f64, f64, [f64; 2])>,
}

fn slice(rho: f64, c: f64, inner: usize) -> Slice {
    let p01s = linspace(0.0, c, inner);
    let p00s = linspace(0.0, 1.0 - c, inner);
    let mut pts = Vec::with_capacity(inner * inner);
    for &a in &p01s {
        for &b in &p00s {
            let (d, cond) = parts(rho, c, a, b);
            pts.push((d, cond, [a, b]));
        }
    }
    let cloud: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
    let hull = upper_hull_of_points(&cloud).expect("finite samples");
    let keep = |d: f64, cond: f64| {
        let xs = hull.breakpoints();
        let k = xs.partition_point(|&hd| hd < d);
        k < xs.len() && xs[k] == d && hull.ordinates()[k] == cond
    };
    let mut vertices: Vec<(f64, f64, [f64; 2])> = pts.into_iter().filter(|p| keep(p.0, p.1)).collect();
    vertices.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2[0].total_cmp(&b.2[0])).then(a.2[1].total_cmp(&b.2[1])));
    vertices.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let step = |n: usize, span: f64| span / (n - 1) as f64;
    Slice {
        c,
        step: (step(inner, c), step(inner, 1.0 - c)),
        vertices,
    }
}

impl Slice {
    fn g(&self, rho: f64, lambda: f64) -> f64 {
        let mut x0 = self.vertices[0].2;
        let mut best = f64::NEG_INFINITY;
        for v in &self.vertices {
            let val = (1.0 - lambda) * v.0 + v.1;
            if val > best {
                best = val;
                x0 = v.2;
            }
        }
        let step = self.step.0.max(self.step.1);
        if step == 0.0 {
            return objective(rho, lambda, self.c, &x0);
        }
        let f = |x: &[f64]| objective(rho, lambda, self.c, x);
        let (_, v) = nelder_mead_max(f, &x0, 0.5 * step, 600, 1e-15);
        v.max(objective(rho, lambda, self.c, &x0))
    }
}

/// `g_lambda(c)`: max over joint laws of `(X, Yr)` with `P(X != Yr) = c` of
/// `(1-lambda)(H(Y1) - H(Yr)) + H(Yr|X)`, by an `inner x inner` grid on
/// `(p01, p00)` and a Nelder-Mead polish from the best cell.
pub fn g_lambda(rho: f64, lambda: f64, c: f64, inner: usize) -> Result<f64> {
    check_domain("rho", rho, 0.0, 0.5, "[0, 1/2]")?;
    check_domain("lambda", lambda, 0.0, 1.0, "[0, 1]")?;
    check_domain("c", c, 0.0, 1.0, "[0, 1]")?;
    if inner < 2 {
        return Err(Error::InvalidAbscissae("inner grid needs two points".into()));
    }
    Ok(slice(rho, c, inner).g(rho, lambda))
}

/// The `c` grid used for envelopes: `cs` uniform points with `rho` inserted.
pub fn c_grid(rho: f64, cs: usize) -> Vec<f64> {
    let mut grid = linspace(0.0, 1.0, cs);
    let k = grid.partition_point(|&c| c < rho);
    if grid.get(k).is_none_or(|&c| (c - rho).abs() > 1e-12) {
        grid.insert(k, rho);
    } else {
        grid[k] = rho;
    }
    grid
}

/// Envelope values `C[g_lambda](rho)` for every `lambda` on the grid. These do
/// not depend on `C0`, so one table serves a whole `C0` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem7Table {
    pub rho: f64,
    pub lambdas: Vec<f64>,
    pub envelope_at_rho: Vec<f64>,
}

impl Theorem7Table {
    pub fn compute(rho: f64, grids: &BscGrids) -> Result<Self> {
        Self::for_lambdas(rho, linspace(0.0, 1.0, grids.lambdas.max(2)), grids)
    }

    pub fn for_lambdas(rho: f64, lambdas: Vec<f64>, grids: &BscGrids) -> Result<Self> {
        check_domain("rho", rho, 0.0, 0.5, "[0, 1/2]")?;
        grids.check()?;
        for &l in &lambdas {
            check_domain("lambda", l, 0.0, 1.0, "[0, 1]")?;
        }
        let cs = c_grid(rho, grids.cs);
        let slices: Vec<Slice> = cs.par_iter().map(|&c| slice(rho, c, grids.inner)).collect();
        let envelope_at_rho = lambdas
            .par_iter()
            .map(|&l| {
                let gs: Vec<f64> = slices.iter().map(|s| s.g(rho, l)).collect();
                upper_concave_envelope(&cs, &gs)?.eval(rho)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            rho,
            lambdas,
            envelope_at_rho,
        })
    }

    /// Bound for the `i`-th `lambda` at relay link `c0`.
    pub fn bound_at(&self, i: usize, c0: f64) -> f64 {
        1.0 - 2.0 * h2(self.rho) + self.lambdas[i] * c0 + self.envelope_at_rho[i]
    }

    /// Smallest bound over the `lambda` grid and the `lambda` attaining it
    /// (lowest `lambda` on ties).
    pub fn best(&self, c0: f64) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.lambdas.len() {
            let v = self.bound_at(i, c0);
            if v < best.0 {
                best = (v, self.lambdas[i]);
            }
        }
        best
    }
}

/// Samples of `g_lambda` on the envelope grid, for inspection.
pub fn g_lambda_samples(rho: f64, lambda: f64, grids: &BscGrids) -> Result<(Vec<f64>, Vec<f64>)> {
    check_domain("rho", rho, 0.0, 0.5, "[0, 1/2]")?;
    check_domain("lambda", lambda, 0.0, 1.0, "[0, 1]")?;
    grids.check()?;
    let cs = c_grid(rho, grids.cs);
    let gs = cs.par_iter().map(|&c| slice(rho, c, grids.inner).g(rho, lambda)).collect();
    Ok((cs, gs))
}

/// Upper bound `1 - 2 H2(rho) + lambda C0 + C[g_lambda](rho)` for one `lambda`.
pub fn theorem7_bound(params: &BscParams, lambda: f64, grids: &BscGrids) -> Result<f64> {
    let table = Theorem7Table::for_lambdas(params.rho, vec![lambda], grids)?;
    Ok(table.bound_at(0, params.c0))
}

/// Minimum of [`theorem7_bound`] over the `lambda` grid, with the minimizing `lambda`.
pub fn theorem7_best(params: &BscParams, grids: &BscGrids) -> Result<(f64, f64)> {
    Ok(Theorem7Table::compute(params.rho, grids)?.best(params.c0))
}

/// `I(X; Y1, V)` and `I(V; Yr | Y1)` for uniform `X` and `V = Yr xor Bern(s)`.
pub fn cf_bsc_terms(rho: f64, s: f64) -> (f64, f64) {
    let rs = bconv(rho, s);
    let rrs = bconv(rho, rs);
    let rate = 1.0 + h2(rrs) - h2(rho) - h2(rs);
    let link = (h2(rrs) - h2(s)).max(0.0);
    (rate, link)
}

/// Compress-forward rate with uniform input and the test channel
/// `V = Yr xor Bern(s)`: scan of `s` over `s_points` values in `[0, 1/2]`,
/// with bisection on every feasibility boundary crossed.
pub fn cf_bsc(params: &BscParams, s_points: usize) -> Result<f64> {
    if s_points < 2 {
        return Err(Error::InvalidAbscissae("s grid needs two points".into()));
    }
    let rho = params.rho;
    let slack = |s: f64| params.c0 - cf_bsc_terms(rho, s).1;
    let grid = linspace(0.0, 0.5, s_points);
    let mut best = f64::NEG_INFINITY;
    for (i, &s) in grid.iter().enumerate() {
        if slack(s) >= 0.0 {
            best = best.max(cf_bsc_terms(rho, s).0);
        }
        if i > 0 {
            let prev = grid[i - 1];
            if (slack(prev) >= 0.0) != (slack(s) >= 0.0) {
                let edge = bisect(slack, prev, s, 1e-15)?;
                for e in [edge, prev.max(edge - 1e-15), s.min(edge + 1e-15)] {
                    if slack(e) >= 0.0 {
                        best = best.max(cf_bsc_terms(rho, e).0);
                    }
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Search("no feasible test channel".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{mutual_information, mutual_information_given, ProbTable};

    const SMALL: BscGrids = BscGrids {
        lambdas: 11,
        cs: 101,
        inner: 41,
    };

    /// Plain 2-D grid maximum of the objective, no polish.
    fn grid_g(rho: f64, lambda: f64, c: f64, n: usize) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for a in linspace(0.0, c, n) {
            for b in linspace(0.0, 1.0 - c, n) {
                best = best.max(objective(rho, lambda, c, &[a, b]));
            }
        }
        best
    }

    fn mixture_sup(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..xs.len() {
            for j in i..xs.len() {
                if xs[i] <= x && x <= xs[j] {
                    let t = if j == i { 0.0 } else { (x - xs[i]) / (xs[j] - xs[i]) };
                    best = best.max((1.0 - t) * ys[i] + t * ys[j]);
                }
            }
        }
        best
    }

    /// Joint table of (X, Y1, Yr, V) for uniform X and V = Yr xor Bern(s).
    fn cf_joint(rho: f64, s: f64) -> ProbTable {
        let bern = |p: f64, bit: usize| if bit == 1 { p } else { 1.0 - p };
        let mut v = Vec::new();
        for x in 0..2 {
            for y1 in 0..2 {
                for yr in 0..2 {
                    for vv in 0..2 {
                        v.push(0.5 * bern(rho, x ^ y1) * bern(rho, x ^ yr) * bern(s, yr ^ vv));
                    }
                }
            }
        }
        ProbTable::new(vec![2, 2, 2, 2], v).unwrap()
    }

    #[test]
    fn g_one_is_binary_entropy() {
        for rho in [0.0, 0.1, 0.3] {
            for c in [0.0, 0.05, 0.2, 0.5, 0.77, 1.0] {
                let g = g_lambda(rho, 1.0, c, 41).unwrap();
                assert!((g - h2(c)).abs() < 1e-8, "rho {rho} c {c}: {g}");
                assert!(grid_g(rho, 1.0, c, 101) <= h2(c) + 1e-12);
            }
        }
    }

    #[test]
    fn g_at_zero_noiseless() {
        for lambda in [0.0, 0.3, 1.0] {
            assert!(g_lambda(0.0, lambda, 0.0, 41).unwrap().abs() < 1e-12);
            assert!(grid_g(0.0, lambda, 0.0, 201).abs() < 1e-12);
        }
    }

    #[test]
    fn g_dominates_symmetric_point_and_grid() {
        for (rho, lambda, c) in [(0.1, 0.0, 0.3), (0.1, 0.5, 0.1), (0.25, 0.2, 0.6), (0.4, 0.9, 0.05)] {
            let g = g_lambda(rho, lambda, c, 61).unwrap();
            let sym = objective(rho, lambda, c, &[c / 2.0, (1.0 - c) / 2.0]);
            assert!(g >= sym - 1e-12);
            assert!(g >= grid_g(rho, lambda, c, 61) - 1e-12);
        }
    }

    #[test]
    fn g_refinement_is_stable() {
        for (rho, lambda, c) in [(0.1, 0.0, 0.3), (0.1, 0.5, 0.12), (0.25, 0.2, 0.6)] {
            let coarse = grid_g(rho, lambda, c, 21);
            let fine = grid_g(rho, lambda, c, 201);
            // empirical Lipschitz constant of the objective on the coarse grid
            let step = 1.0 / 20.0;
            let mut lip: f64 = 0.0;
            let pts = linspace(0.0, 1.0, 21);
            for i in 0..20 {
                for j in 0..21 {
                    let x = |t: f64, u: f64| [t * c, u * (1.0 - c)];
                    let f = |p: [f64; 2]| objective(rho, lambda, c, &p);
                    let a = f(x(pts[i], pts[j]));
                    let b = f(x(pts[i + 1], pts[j]));
                    let d = f(x(pts[j], pts[i + 1]));
                    let e = f(x(pts[j], pts[i]));
                    lip = lip.max((a - b).abs() / step).max((d - e).abs() / step);
                }
            }
            assert!(fine >= coarse - 1e-12);
            assert!(fine - coarse <= 2.0 * lip * step, "{fine} {coarse} {lip}");
            let polished = g_lambda(rho, lambda, c, 21).unwrap();
            assert!(polished >= fine - 1e-9);
        }
    }

    #[test]
    fn envelope_of_g_matches_mixture_brute_force() {
        for lambda in [0.0, 0.4, 0.8] {
            let (cs, gs) = g_lambda_samples(0.1, lambda, &SMALL).unwrap();
            let env = upper_concave_envelope(&cs, &gs).unwrap();
            for x in [0.0, 0.03, 0.1, 0.27, 0.5, 0.9, 1.0] {
                assert!((env.eval(x).unwrap() - mixture_sup(&cs, &gs, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn envelope_of_g_one_is_binary_entropy() {
        let grids = BscGrids {
            lambdas: 1,
            cs: 2001,
            inner: 11,
        };
        for rho in [0.05, 0.1, 0.25, 0.4] {
            let t = Theorem7Table::for_lambdas(rho, vec![1.0], &grids).unwrap();
            assert!((t.envelope_at_rho[0] - h2(rho)).abs() < 1e-6);
        }
    }

    #[test]
    fn lambda_one_is_mac_side_cutset() {
        for rho in [0.0, 0.1, 0.4] {
            for c0 in [0.0, 0.3, 1.0] {
                let p = BscParams::new(rho, c0).unwrap();
                let b = theorem7_bound(&p, 1.0, &SMALL).unwrap();
                assert!((b - (1.0 - h2(rho) + c0)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn bound_is_affine_in_c0() {
        let t = Theorem7Table::compute(0.1, &SMALL).unwrap();
        for i in 0..t.lambdas.len() {
            let slope = (t.bound_at(i, 0.7) - t.bound_at(i, 0.2)) / 0.5;
            assert!((slope - t.lambdas[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn best_is_monotone_and_sandwiched() {
        let t = Theorem7Table::compute(0.1, &SMALL).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for c0 in linspace(0.0, 1.0, 11) {
            let (b, _) = t.best(c0);
            let p = BscParams::new(0.1, c0).unwrap();
            assert!(b >= prev - 1e-12);
            assert!(b <= 1.0 - h2(0.1) + c0 + 1e-12);
            assert!(cf_bsc(&p, 501).unwrap() <= b + 1e-3);
            prev = b;
        }
        let mut prev = f64::INFINITY;
        for rho in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
            let (b, _) = theorem7_best(&BscParams::new(rho, 0.5).unwrap(), &SMALL).unwrap();
            assert!(b <= prev + 1e-9, "rho {rho}");
            prev = b;
        }
    }

    #[test]
    fn noiseless_case() {
        for c0 in [0.0, 0.5, 2.0] {
            let p = BscParams::new(0.0, c0).unwrap();
            assert!(theorem7_best(&p, &SMALL).unwrap().0 >= 1.0 - 1e-12);
            assert!((cf_bsc(&p, 101).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cf_terms_match_table_evaluation() {
        for rho in [0.05, 0.1, 0.3] {
            for s in [0.0, 0.1, 0.25, 0.5] {
                let joint = cf_joint(rho, s);
                let rate = mutual_information(&joint, &[0], &[1, 3]).unwrap();
                let link = mutual_information_given(&joint, &[3], &[2], &[1]).unwrap();
                let (r, l) = cf_bsc_terms(rho, s);
                assert!((r - rate).abs() < 1e-12 && (l - link).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cf_limits() {
        for rho in [0.05, 0.1, 0.3] {
            let zero = cf_bsc(&BscParams::new(rho, 0.0).unwrap(), 201).unwrap();
            assert!((zero - (1.0 - h2(rho))).abs() < 1e-9);
            let big = cf_bsc(&BscParams::new(rho, 5.0).unwrap(), 201).unwrap();
            let joint = cf_joint(rho, 0.0);
            let full = mutual_information(&joint, &[0], &[1, 2]).unwrap();
            assert!((big - full).abs() < 1e-12);
        }
    }

    #[test]
    fn cf_matches_fine_sweep() {
        let p = BscParams::new(0.1, 0.4).unwrap();
        let sweep = linspace(0.0, 0.5, 200_001)
            .into_iter()
            .filter_map(|s| {
                let (r, l) = cf_bsc_terms(0.1, s);
                (l <= 0.4).then_some(r)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let v = cf_bsc(&p, 101).unwrap();
        assert!(v >= sweep - 1e-12 && v - sweep < 1e-5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BscParams::new(0.6, 0.1).is_err());
        assert!(g_lambda(0.1, 1.5, 0.2, 11).is_err());
        assert!(g_lambda(0.1, 0.5, 1.2, 11).is_err());
    }
}
