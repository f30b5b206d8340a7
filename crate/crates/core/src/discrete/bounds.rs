use nalgebra::DMatrix;

use super::channel::{PrimitiveChannel, MAX_ALPHABET};
use super::polish::{atoms_of, best_mixture, conditional_rows, MAX_ROUNDS};
use crate::error::{Error, Result};
use crate::info::ZERO_MASS;
#[cfg(test)]
use crate::info::{cond_mi, ProbTable};
use crate::optim::{
    best_restart, golden_min, random_simplex, restart_rng, simplex_ascent, SearchConfig,
};

#[cfg(test)]
const X: usize = 0;
#[cfg(test)]
const Y1: usize = 1;
#[cfg(test)]
const YR: usize = 2;
#[cfg(test)]
const V: usize = 3;

const LINE_TOL: f64 = 1e-8;
const GAIN_TOL: f64 = 1e-10;
/// Pattern search over the input law: step sizes, pricing rounds per point
/// and accepted moves per step size.
const INPUT_STEPS: [f64; 4] = [0.05, 0.01, 0.002, 0.0005];
const INPUT_ROUNDS: usize = 8;
const INPUT_MOVES_PER_STEP: usize = 20;

/// Rounding slack allowed on the compression constraint of a certificate.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Singular-value threshold below which the `p(y1|x)` matrix loses rank.
pub const RANK_TOL: f64 = 1e-10;

/// Auxiliary-variable certificate for a reported bound value.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSolution {
    pub px: Vec<f64>,
    /// Alphabet size of the auxiliary `V`.
    pub nv: usize,
    /// `p(v | x, yr)` flattened as `[x][yr][v]`.
    pub pv_given_xyr: Vec<f64>,
    pub objective: f64,
    /// The certificate satisfies the constraint of the bound it was built for.
    pub feasible: bool,
    /// Every restart behind the winner stopped on its gain test rather than on
    /// the sweep cap.
    pub converged: bool,
}

/// Information quantities of one `(p(x), p(v|x,yr))` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop4Terms {
    /// `I(X; Y1, V)`.
    pub i_x_y1v: f64,
    /// `I(V; X | Yr)`.
    pub i_vx_given_yr: f64,
    /// `I(X; Y1)`.
    pub i_x_y1: f64,
    /// `I(V; Yr | X, Y1)`.
    pub i_vyr_given_xy1: f64,
    /// `I(V; Yr | Y1)`, the compression rate of the compress-forward scheme.
    pub i_vyr_given_y1: f64,
    /// `I(V; Yr) - I(V; Y1)`, the constraint of the constrained form.
    pub constraint: f64,
    pub c0: f64,
}

impl Prop4Terms {
    /// `I(X;Y1,V) - I(V;X|Yr)`.
    pub fn first(&self) -> f64 {
        self.i_x_y1v - self.i_vx_given_yr
    }

    /// `I(X;Y1) + C0 - I(V;Yr|X,Y1)`.
    pub fn second(&self) -> f64 {
        self.i_x_y1 + self.c0 - self.i_vyr_given_xy1
    }

    /// Objective of the unconstrained form.
    pub fn value(&self) -> f64 {
        self.first().min(self.second())
    }

    /// Objective of the constrained form, `None` when `I(V;Yr) - I(V;Y1)`
    /// exceeds `C0`.
    pub fn constrained_value(&self) -> Option<f64> {
        (self.constraint <= self.c0 + FEASIBILITY_TOL).then(|| self.first())
    }
}

/// Joint table over `(X, Y1, Yr, V)`.
#[cfg(test)]
fn joint(ch: &PrimitiveChannel, px: &[f64], pv: &[f64], nv: usize) -> ProbTable {
    let (nx, ny1, nyr) = (ch.nx(), ch.ny1(), ch.nyr());
    let mut values = Vec::with_capacity(nx * ny1 * nyr * nv);
    for (x, &p) in px.iter().enumerate() {
        for y1 in 0..ny1 {
            for yr in 0..nyr {
                let pxy = p * ch.prob(x, y1, yr);
                let row = &pv[(x * nyr + yr) * nv..][..nv];
                values.extend(row.iter().map(|q| pxy * q));
            }
        }
    }
    ProbTable::from_raw(vec![nx, ny1, nyr, nv], values)
}

fn plogp_sum(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > ZERO_MASS)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Reusable buffers for evaluating [`Prop4Terms`] without allocation.
struct Evaluator {
    nx: usize,
    ny1: usize,
    nyr: usize,
    nv: usize,
    xy1v: Vec<f64>,
    xyrv: Vec<f64>,
    y1yrv: Vec<f64>,
    y1v: Vec<f64>,
    yrv: Vec<f64>,
    xy1yr: Vec<f64>,
    xy1: Vec<f64>,
    xyr: Vec<f64>,
    y1yr: Vec<f64>,
    y1: Vec<f64>,
    yr: Vec<f64>,
}

impl Evaluator {
    fn new(ch: &PrimitiveChannel, nv: usize) -> Self {
        let (nx, ny1, nyr) = (ch.nx(), ch.ny1(), ch.nyr());
        Self {
            nx,
            ny1,
            nyr,
            nv,
            xy1v: vec![0.0; nx * ny1 * nv],
            xyrv: vec![0.0; nx * nyr * nv],
            y1yrv: vec![0.0; ny1 * nyr * nv],
            y1v: vec![0.0; ny1 * nv],
            yrv: vec![0.0; nyr * nv],
            xy1yr: vec![0.0; nx * ny1 * nyr],
            xy1: vec![0.0; nx * ny1],
            xyr: vec![0.0; nx * nyr],
            y1yr: vec![0.0; ny1 * nyr],
            y1: vec![0.0; ny1],
            yr: vec![0.0; nyr],
        }
    }

    fn terms(&mut self, ch: &PrimitiveChannel, px: &[f64], pv: &[f64]) -> Prop4Terms {
        let (nx, ny1, nyr, nv) = (self.nx, self.ny1, self.nyr, self.nv);
        for buf in [
            &mut self.xy1v,
            &mut self.xyrv,
            &mut self.y1yrv,
            &mut self.y1v,
            &mut self.yrv,
            &mut self.xy1yr,
            &mut self.xy1,
            &mut self.xyr,
            &mut self.y1yr,
            &mut self.y1,
            &mut self.yr,
        ] {
            buf.fill(0.0);
        }
        let mut h_all = 0.0;
        let mut h_x = 0.0;
        for (x, &p) in px.iter().enumerate() {
            if p > ZERO_MASS {
                h_x -= p * p.log2();
            }
            for y1 in 0..ny1 {
                for yr in 0..nyr {
                    let pxy = p * ch.prob(x, y1, yr);
                    self.xy1yr[(x * ny1 + y1) * nyr + yr] = pxy;
                    if pxy <= 0.0 {
                        continue;
                    }
                    let row = &pv[(x * nyr + yr) * nv..][..nv];
                    for (v, &q) in row.iter().enumerate() {
                        let m = pxy * q;
                        if m > ZERO_MASS {
                            h_all -= m * m.log2();
                        }
                        self.xy1v[(x * ny1 + y1) * nv + v] += m;
                        self.xyrv[(x * nyr + yr) * nv + v] += m;
                        self.y1yrv[(y1 * nyr + yr) * nv + v] += m;
                    }
                }
            }
        }
        for y1 in 0..ny1 {
            for yr in 0..nyr {
                for v in 0..nv {
                    let m = self.y1yrv[(y1 * nyr + yr) * nv + v];
                    self.y1v[y1 * nv + v] += m;
                    self.yrv[yr * nv + v] += m;
                }
            }
        }
        for x in 0..nx {
            for y1 in 0..ny1 {
                for yr in 0..nyr {
                    let m = self.xy1yr[(x * ny1 + y1) * nyr + yr];
                    self.xy1[x * ny1 + y1] += m;
                    self.xyr[x * nyr + yr] += m;
                    self.y1yr[y1 * nyr + yr] += m;
                    self.y1[y1] += m;
                    self.yr[yr] += m;
                }
            }
        }
        let h_xy1v = plogp_sum(&self.xy1v);
        let h_xyrv = plogp_sum(&self.xyrv);
        let h_y1yrv = plogp_sum(&self.y1yrv);
        let h_y1v = plogp_sum(&self.y1v);
        let h_yrv = plogp_sum(&self.yrv);
        let h_xy1yr = plogp_sum(&self.xy1yr);
        let h_xy1 = plogp_sum(&self.xy1);
        let h_xyr = plogp_sum(&self.xyr);
        let h_y1yr = plogp_sum(&self.y1yr);
        let h_y1 = plogp_sum(&self.y1);
        let h_yr = plogp_sum(&self.yr);
        let i_v_yr = (h_yr + plogp_sum_v(&self.yrv, nv) - h_yrv).max(0.0);
        let i_v_y1 = (h_y1 + plogp_sum_v(&self.y1v, nv) - h_y1v).max(0.0);
        Prop4Terms {
            i_x_y1v: (h_x + h_y1v - h_xy1v).max(0.0),
            i_vx_given_yr: (h_yrv + h_xyr - h_xyrv - h_yr).max(0.0),
            i_x_y1: (h_x + h_y1 - h_xy1).max(0.0),
            i_vyr_given_xy1: (h_xy1v + h_xy1yr - h_all - h_xy1).max(0.0),
            i_vyr_given_y1: (h_y1v + h_y1yr - h_y1yrv - h_y1).max(0.0),
            constraint: i_v_yr - i_v_y1,
            c0: ch.c0(),
        }
    }
}

/// Entropy of the `V` marginal of a `[..][v]` table.
fn plogp_sum_v(t: &[f64], nv: usize) -> f64 {
    let mut pv = [0.0; MAX_ALPHABET * MAX_ALPHABET + 1];
    for row in t.chunks(nv) {
        for (a, b) in pv.iter_mut().zip(row) {
            *a += b;
        }
    }
    plogp_sum(&pv[..nv])
}

/// Reference evaluation through generic joint-table marginals.
#[cfg(test)]
fn terms_reference(ch: &PrimitiveChannel, px: &[f64], pv: &[f64], nv: usize) -> Prop4Terms {
    let j = joint(ch, px, pv, nv);
    Prop4Terms {
        i_x_y1v: cond_mi(&j, &[X], &[Y1, V], &[]),
        i_vx_given_yr: cond_mi(&j, &[V], &[X], &[YR]),
        i_x_y1: cond_mi(&j, &[X], &[Y1], &[]),
        i_vyr_given_xy1: cond_mi(&j, &[V], &[YR], &[X, Y1]),
        i_vyr_given_y1: cond_mi(&j, &[V], &[YR], &[Y1]),
        constraint: cond_mi(&j, &[V], &[YR], &[]) - cond_mi(&j, &[V], &[Y1], &[]),
        c0: ch.c0(),
    }
}

fn terms_unchecked(ch: &PrimitiveChannel, px: &[f64], pv: &[f64], nv: usize) -> Prop4Terms {
    Evaluator::new(ch, nv).terms(ch, px, pv)
}

fn check_rows(what: &str, p: &[f64], width: usize) -> Result<()> {
    for (i, row) in p.chunks(width).enumerate() {
        if row.iter().any(|v| !v.is_finite() || *v < 0.0)
            || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidTable(format!("{what} row {i} is not a pmf")));
        }
    }
    Ok(())
}

/// Evaluates both terms of the bound at `p(x)` and `p(v|x,yr)` (flattened
/// `[x][yr][v]`).
pub fn prop4_terms(
    ch: &PrimitiveChannel,
    px: &[f64],
    pv_given_xyr: &[f64],
    nv: usize,
) -> Result<Prop4Terms> {
    if px.len() != ch.nx() || nv == 0 || pv_given_xyr.len() != ch.nx() * ch.nyr() * nv {
        return Err(Error::InvalidTable("auxiliary tables have the wrong shape".into()));
    }
    check_rows("p(x)", px, px.len())?;
    check_rows("p(v|x,yr)", pv_given_xyr, nv)?;
    Ok(terms_unchecked(ch, px, pv_given_xyr, nv))
}

/// Alphabet size of the auxiliary in the discrete upper bound.
pub fn aux_alphabet(ch: &PrimitiveChannel) -> usize {
    ch.nx() * ch.nyr() + 1
}

fn point_mass_rows(rows: usize, nv: usize, symbol: impl Fn(usize) -> usize) -> Vec<f64> {
    let mut p = vec![0.0; rows * nv];
    for r in 0..rows {
        p[r * nv + symbol(r)] = 1.0;
    }
    p
}

/// `p(v|x,yr)` rows built from `p(v|yr)` rows, padded with zeros to `nv`.
fn embed_rows(ch: &PrimitiveChannel, pv_given_yr: &[f64], width: usize, nv: usize) -> Vec<f64> {
    let mut p = vec![0.0; ch.nx() * ch.nyr() * nv];
    fill_embedded(&mut p, pv_given_yr, ch.nx(), ch.nyr(), width);
    p
}

fn fill_embedded(p: &mut [f64], pv_given_yr: &[f64], nx: usize, nyr: usize, width: usize) {
    let nv = p.len() / (nx * nyr);
    for x in 0..nx {
        for yr in 0..nyr {
            p[(x * nyr + yr) * nv..][..width].copy_from_slice(&pv_given_yr[yr * width..][..width]);
        }
    }
}

fn blocks(nx: usize, rows: usize, width: usize) -> Vec<std::ops::Range<usize>> {
    let mut b = vec![0..nx];
    b.extend((0..rows).map(|r| nx + r * width..nx + (r + 1) * width));
    b
}

/// Compress-forward rate at `p(x)` and `p(v|yr)` (flattened `[yr][v]`),
/// `max I(X;Y1,V)` subject to `I(V;Yr|Y1) <= C0`. Returns the value together
/// with the terms, or `None` when the compression rate exceeds `C0`.
pub fn cf_rate(
    ch: &PrimitiveChannel,
    px: &[f64],
    pv_given_yr: &[f64],
    nv: usize,
) -> Result<Option<f64>> {
    if pv_given_yr.len() != ch.nyr() * nv {
        return Err(Error::InvalidTable("p(v|yr) has the wrong shape".into()));
    }
    let t = prop4_terms(ch, px, &embed_rows(ch, pv_given_yr, nv, nv), nv)?;
    Ok((t.i_vyr_given_y1 <= ch.c0() + FEASIBILITY_TOL).then_some(t.i_x_y1v))
}

/// Compress-forward lower bound, maximized over `p(x) p(v|yr)`.
///
/// The search runs on `min{I(X;Y1,V), I(X;Y1) + C0 - I(V;Yr|X,Y1)}`, whose
/// maximum equals the constrained maximum. A best point that violates the
/// compression constraint is repaired by erasing `V` with the probability that
/// makes the constraint tight, which never lowers the rate; the returned
/// certificate is therefore feasible and its value is the constrained
/// objective. Auxiliary tables are reported in the `p(v|x,yr)` layout with
/// `|V| = nx nyr + 1`.
pub fn cf_bound(ch: &PrimitiveChannel, cfg: &SearchConfig) -> Result<(f64, AuxSolution)> {
    let (nx, nyr) = (ch.nx(), ch.nyr());
    let width = nyr + 1;
    let dim = nx + nyr * width;
    let blocks = blocks(nx, nyr, width);
    let restarts = cfg.restarts.max(2);
    let (_, _, (p, converged)) = best_restart(restarts, |r| {
        let mut eval = Evaluator::new(ch, width);
        let mut pv = vec![0.0; nx * nyr * width];
        let objective = |p: &[f64]| {
            fill_embedded(&mut pv, &p[nx..], nx, nyr, width);
            let t = eval.terms(ch, &p[..nx], &pv);
            t.i_x_y1v.min(t.second())
        };
        let mut p = vec![1.0 / nx as f64; dim];
        match r {
            0 => p[nx..].copy_from_slice(&point_mass_rows(nyr, width, |yr| yr)),
            1 => p[nx..].copy_from_slice(&point_mass_rows(nyr, width, |_| 0)),
            _ => {
                let mut rng = restart_rng(cfg.seed, r as u64);
                for b in &blocks {
                    random_simplex(&mut rng, &mut p[b.clone()]);
                }
            }
        }
        let (v, _, converged) =
            simplex_ascent(objective, &mut p, &blocks, cfg.sweeps, LINE_TOL, GAIN_TOL);
        (v, (p, converged))
    })
    .ok_or_else(|| Error::Search("no compress-forward restart produced a value".into()))?;

    // repair: V' = V with probability theta, an erasure symbol otherwise
    let nv = aux_alphabet(ch);
    let px = p[..nx].to_vec();
    let mut rows = vec![0.0; nyr * (width + 1)];
    for yr in 0..nyr {
        rows[yr * (width + 1)..][..width].copy_from_slice(&p[nx + yr * width..][..width]);
    }
    let full = embed_rows(ch, &rows, width + 1, nv);
    let t = terms_unchecked(ch, &px, &full, nv);
    let theta = if t.i_vyr_given_y1 > ch.c0() {
        ch.c0() / t.i_vyr_given_y1
    } else {
        1.0
    };
    for yr in 0..nyr {
        let row = &mut rows[yr * (width + 1)..][..width + 1];
        row[..width].iter_mut().for_each(|q| *q *= theta);
        row[width] = 1.0 - theta;
    }
    let pv = embed_rows(ch, &rows, width + 1, nv);
    let t = terms_unchecked(ch, &px, &pv, nv);
    let value = t.i_x_y1v;
    Ok((
        value,
        AuxSolution {
            px,
            nv,
            pv_given_xyr: pv,
            objective: value,
            feasible: t.i_vyr_given_y1 <= ch.c0() + FEASIBILITY_TOL,
            converged,
        },
    ))
}

/// Upper bound for the primitive relay channel, maximized over
/// `p(x) p(v|x,yr)` with `|V| = nx nyr + 1`.
///
/// Multi-start pairwise ascent on the unconstrained (min of two terms) form.
/// Restart 0 starts from the compress-forward certificate, so the result never
/// falls below [`cf_bound`]; restarts 1 and 2 start from `V = Yr` and from a
/// constant `V`; the rest are random.
pub fn prop4_bound(ch: &PrimitiveChannel, cfg: &SearchConfig) -> Result<(f64, AuxSolution)> {
    let (_, cf) = cf_bound(ch, cfg)?;
    prop4_from(ch, cfg, &cf)
}

fn prop4_from(
    ch: &PrimitiveChannel,
    cfg: &SearchConfig,
    warm: &AuxSolution,
) -> Result<(f64, AuxSolution)> {
    let (nx, nyr) = (ch.nx(), ch.nyr());
    let nv = aux_alphabet(ch);
    let rows = nx * nyr;
    let dim = nx + rows * nv;
    let blocks = blocks(nx, rows, nv);
    let restarts = cfg.restarts.max(3);
    let (_, _, (p, converged)) = best_restart(restarts, |r| {
        let mut eval = Evaluator::new(ch, nv);
        let objective = |p: &[f64]| eval.terms(ch, &p[..nx], &p[nx..]).value();
        let mut p = vec![1.0 / nx as f64; dim];
        match r {
            0 => {
                p[..nx].copy_from_slice(&warm.px);
                p[nx..].copy_from_slice(&warm.pv_given_xyr);
            }
            1 => p[nx..].copy_from_slice(&point_mass_rows(rows, nv, |r| r % nyr)),
            2 => p[nx..].copy_from_slice(&point_mass_rows(rows, nv, |_| 0)),
            _ => {
                let mut rng = restart_rng(cfg.seed ^ 0x5eed, r as u64);
                for b in &blocks {
                    random_simplex(&mut rng, &mut p[b.clone()]);
                }
            }
        }
        let (v, _, converged) =
            simplex_ascent(objective, &mut p, &blocks, cfg.sweeps, LINE_TOL, GAIN_TOL);
        (v, (p, converged))
    })
    .ok_or_else(|| Error::Search("no restart produced a value".into()))?;
    let mut px = p[..nx].to_vec();
    let mut pv = p[nx..].to_vec();
    let mut eval = Evaluator::new(ch, nv);
    let mut value = eval.terms(ch, &px, &pv).value();

    let (refined, refined_rows) = refine_input(ch, cfg.seed, nv, &px, &pv);
    for (q, seed_rows) in [(px.clone(), pv.clone()), (refined, refined_rows)] {
        let mix = best_mixture(ch, &q, &atoms_of(ch, &q, &seed_rows, nv), MAX_ROUNDS, cfg.seed)?;
        if mix.atoms.len() <= nv {
            let rows = conditional_rows(ch, &q, &mix.atoms, nv);
            let polished = eval.terms(ch, &q, &rows).value();
            if polished > value {
                value = polished;
                px = q;
                pv = rows;
            }
        }
    }
    px.shrink_to_fit();
    Ok((
        value,
        AuxSolution {
            px,
            nv,
            pv_given_xyr: pv,
            objective: value,
            feasible: true,
            converged,
        },
    ))
}

/// Pattern search on `p(x)`, scoring each point by a mixture warm-started from
/// the last accepted conditional. Returns the input law and its conditional.
fn refine_input(
    ch: &PrimitiveChannel,
    seed: u64,
    nv: usize,
    px: &[f64],
    pv: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let nx = ch.nx();
    let score = |q: &[f64], rows: &[f64]| {
        let mix = best_mixture(ch, q, &atoms_of(ch, q, rows, nv), INPUT_ROUNDS, seed).ok()?;
        (mix.atoms.len() <= nv).then(|| (mix.value, conditional_rows(ch, q, &mix.atoms, nv)))
    };
    let (mut px, mut pv) = (px.to_vec(), pv.to_vec());
    let Some((mut best, rows)) = score(&px, &pv) else {
        return (px, pv);
    };
    pv = rows;
    for h in INPUT_STEPS {
        for _ in 0..INPUT_MOVES_PER_STEP {
            let mut moved = false;
            for (i, j) in (0..nx).flat_map(|i| (0..nx).map(move |j| (i, j))) {
                let t = h.min(px[i]);
                if i == j || t <= 0.0 {
                    continue;
                }
                let mut q = px.clone();
                q[i] -= t;
                q[j] += t;
                if let Some((v, rows)) = score(&q, &pv) {
                    if v > best + GAIN_TOL {
                        (best, px, pv, moved) = (v, q, rows, true);
                    }
                }
            }
            if !moved {
                break;
            }
        }
    }
    (px, pv)
}

/// Both bounds from one compress-forward search: `(cf, prop4)`.
pub fn cf_and_prop4(
    ch: &PrimitiveChannel,
    cfg: &SearchConfig,
) -> Result<((f64, AuxSolution), (f64, AuxSolution))> {
    let cf = cf_bound(ch, cfg)?;
    let p4 = prop4_from(ch, cfg, &cf.1)?;
    Ok((cf, p4))
}

fn mutual_info_rows(px: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let mut q = vec![0.0; ny];
    for (row, &p) in w.iter().zip(px) {
        for (qy, &wy) in q.iter_mut().zip(row) {
            *qy += p * wy;
        }
    }
    px.iter()
        .zip(w)
        .map(|(&p, row)| {
            p * row
                .iter()
                .zip(&q)
                .filter(|(&wy, _)| wy > 0.0)
                .map(|(&wy, &qy)| wy * (wy / qy).log2())
                .sum::<f64>()
        })
        .sum()
}

/// Cut-set bound `max_p(x) min{I(X;Y1) + C0, I(X;Y1,Yr)}`.
///
/// Both terms are concave in `p(x)`, so the value is
/// `min_mu max_p(x) mu (I(X;Y1) + C0) + (1 - mu) I(X;Y1,Yr)`; the outer
/// minimum is a golden-section search on the convex dual function.
pub fn cutset_primitive(ch: &PrimitiveChannel) -> f64 {
    let w1 = ch.y1_given_x();
    let wp = ch.pair_given_x();
    let nx = ch.nx();
    let c0 = ch.c0();
    let blocks = [0..nx];
    let dual = |mu: f64| {
        let mut p = vec![1.0 / nx as f64; nx];
        let (v, _, _) = simplex_ascent(
            |p| mu * (mutual_info_rows(p, &w1) + c0) + (1.0 - mu) * mutual_info_rows(p, &wp),
            &mut p,
            &blocks,
            500,
            1e-12,
            1e-15,
        );
        v
    };
    golden_min(dual, 0.0, 1.0, 1e-10).1
}

/// Rank test of the `p(y1|x)` matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genericity {
    /// Full row rank at [`RANK_TOL`].
    pub generic: bool,
    /// The `nx`-th singular value (zero when `ny1 < nx`).
    pub smallest_singular_value: f64,
}

/// Whether the `p(y1|x)` matrix has full row rank.
pub fn is_generic(ch: &PrimitiveChannel) -> Genericity {
    let w = ch.y1_given_x();
    let m = DMatrix::from_fn(ch.nx(), ch.ny1(), |i, j| w[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smallest = if ch.ny1() < ch.nx() { 0.0 } else { sv[ch.nx() - 1] };
    Genericity {
        generic: smallest > RANK_TOL,
        smallest_singular_value: smallest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{dmc_capacity, h2};
    use proptest::prelude::*;

    fn bsc(e: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - e, e], vec![e, 1.0 - e]]
    }

    fn fast() -> SearchConfig {
        SearchConfig::fast()
    }

    fn random_channel(seed: u64, c0: f64) -> PrimitiveChannel {
        let mut rng = restart_rng(seed, 0);
        let mut p = vec![vec![vec![0.0; 2]; 2]; 2];
        for slice in p.iter_mut() {
            let mut flat = [0.0; 4];
            random_simplex(&mut rng, &mut flat);
            for (k, v) in flat.iter().enumerate() {
                slice[k / 2][k % 2] = *v;
            }
        }
        PrimitiveChannel::new(&p, c0).unwrap()
    }

    fn capacity(w: &[Vec<f64>]) -> f64 {
        dmc_capacity(w, 1e-13, 1_000_000).unwrap().capacity
    }

    #[test]
    fn terms_of_product_channel_at_v_equal_yr() {
        let ch = PrimitiveChannel::product(&bsc(0.1), &bsc(0.2), 0.7).unwrap();
        let nv = aux_alphabet(&ch);
        let pv = point_mass_rows(4, nv, |r| r % 2);
        let t = prop4_terms(&ch, &[0.5, 0.5], &pv, nv).unwrap();
        // Y1 and Yr are BSC outputs of a uniform X
        let i_x_y1 = 1.0 - h2(0.1);
        let h_y1yr = 1.0 + h2(bconv(0.1, 0.2)) - (h2(0.1) + h2(0.2)) + h2(0.1) + h2(0.2);
        let i_x_y1yr = h_y1yr - h2(0.1) - h2(0.2);
        assert!((t.i_x_y1 - i_x_y1).abs() < 1e-12);
        assert!((t.i_x_y1v - i_x_y1yr).abs() < 1e-12);
        assert!(t.i_vx_given_yr.abs() < 1e-12);
        assert!((t.i_vyr_given_xy1 - h2(0.2)).abs() < 1e-12);
        assert!((t.i_vyr_given_y1 - (h_y1yr - 1.0)).abs() < 1e-12);
    }

    fn bconv(a: f64, b: f64) -> f64 {
        a * (1.0 - b) + (1.0 - a) * b
    }

    #[test]
    fn prop4_terms_rejects_bad_tables() {
        let ch = random_channel(1, 0.2);
        let nv = aux_alphabet(&ch);
        assert!(prop4_terms(&ch, &[0.5, 0.6], &vec![0.2; 4 * nv], nv).is_err());
        assert!(prop4_terms(&ch, &[0.5, 0.5], &vec![0.2; 3 * nv], nv).is_err());
        assert!(prop4_terms(&ch, &[0.5, 0.5], &vec![0.3; 4 * nv], nv).is_err());
    }

    #[test]
    fn noiseless_direct_link_gives_log_nx() {
        // Y1 = X, Yr arbitrary noise
        let ch = PrimitiveChannel::product(&bsc(0.0), &bsc(0.3), 0.4).unwrap();
        let (v, sol) = prop4_bound(&ch, &fast()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        assert!((cutset_primitive(&ch) - 1.0).abs() < 1e-9);
        assert!((sol.px[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn large_link_reaches_joint_capacity() {
        for seed in 0..4 {
            let ch = random_channel(seed, 1.0);
            let joint_cap = capacity(&ch.pair_given_x());
            let (cf, p4) = cf_and_prop4(&ch, &fast()).unwrap();
            assert!((cf.0 - joint_cap).abs() < 1e-4, "{seed}: {} vs {joint_cap}", cf.0);
            assert!((p4.0 - joint_cap).abs() < 1e-4, "{seed}: {} vs {joint_cap}", p4.0);
        }
    }

    #[test]
    fn zero_link_cf_is_direct_capacity() {
        for seed in 10..14 {
            let ch = random_channel(seed, 0.0);
            let direct = capacity(&ch.y1_given_x());
            let (cf, sol) = cf_bound(&ch, &fast()).unwrap();
            assert!((cf - direct).abs() < 1e-6, "{seed}: {cf} vs {direct}");
            assert!(sol.feasible);
            assert!((cutset_primitive(&ch) - direct).abs() < 1e-6);
        }
    }

    #[test]
    fn cf_certificate_is_feasible_and_reproduces_value() {
        for seed in 20..26 {
            let ch = random_channel(seed, 0.15);
            let (cf, sol) = cf_bound(&ch, &fast()).unwrap();
            let t = prop4_terms(&ch, &sol.px, &sol.pv_given_xyr, sol.nv).unwrap();
            assert!(sol.feasible);
            assert!(t.i_vyr_given_y1 <= ch.c0() + FEASIBILITY_TOL);
            assert!(t.i_vx_given_yr.abs() < 1e-12);
            assert_eq!(t.i_x_y1v, cf);
        }
    }

    #[test]
    fn cf_rate_checks_constraint() {
        let ch = PrimitiveChannel::product(&bsc(0.1), &bsc(0.2), 0.1).unwrap();
        let yr = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(cf_rate(&ch, &[0.5, 0.5], &yr, 2).unwrap(), None);
        let loose = ch.with_c0(1.0).unwrap();
        assert!(cf_rate(&loose, &[0.5, 0.5], &yr, 2).unwrap().is_some());
        let constant = [1.0, 0.0, 1.0, 0.0];
        let v = cf_rate(&ch, &[0.5, 0.5], &constant, 2).unwrap().unwrap();
        assert!((v - (1.0 - h2(0.1))).abs() < 1e-12);
    }

    #[test]
    fn ordering_cf_prop4_cutset() {
        for seed in 30..36 {
            let ch = random_channel(seed, 0.05 * seed as f64 - 1.4);
            let ((cf, _), (p4, sol)) = cf_and_prop4(&ch, &fast()).unwrap();
            let cs = cutset_primitive(&ch);
            assert!(cf <= p4 + 1e-12, "{seed}: cf {cf} > prop4 {p4}");
            assert!(p4 <= cs + 1e-6, "{seed}: prop4 {p4} > cutset {cs}");
            let t = prop4_terms(&ch, &sol.px, &sol.pv_given_xyr, sol.nv).unwrap();
            assert_eq!(t.value(), p4);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let ch = random_channel(40, 0.3);
        let a = prop4_bound(&ch, &fast()).unwrap();
        let b = prop4_bound(&ch, &fast()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constrained_form_matches_on_certificate() {
        let ch = random_channel(41, 0.3);
        let (_, sol) = cf_bound(&ch, &fast()).unwrap();
        let t = prop4_terms(&ch, &sol.px, &sol.pv_given_xyr, sol.nv).unwrap();
        // for V - Yr - X the constraint equals the compression rate
        assert!((t.constraint - t.i_vyr_given_y1).abs() < 1e-12);
        assert_eq!(t.constrained_value(), Some(t.first()));
    }

    #[test]
    fn genericity_examples() {
        let id = PrimitiveChannel::product(&bsc(0.0), &bsc(0.2), 0.0).unwrap();
        assert!(is_generic(&id).generic);
        let same = PrimitiveChannel::product(&[vec![0.3, 0.7], vec![0.3, 0.7]], &bsc(0.2), 0.0)
            .unwrap();
        let g = is_generic(&same);
        assert!(!g.generic);
        assert!(g.smallest_singular_value < RANK_TOL);
        for rho in [0.0, 0.1, 0.3, 0.49, 0.51, 0.9] {
            let ch = PrimitiveChannel::product(&bsc(rho), &bsc(0.2), 0.0).unwrap();
            let g = is_generic(&ch);
            assert!(g.generic);
            // singular values of [[1-r, r], [r, 1-r]] are 1 and |1 - 2r|
            assert!((g.smallest_singular_value - (1.0 - 2.0 * rho).abs()).abs() < 1e-12);
        }
        let half = PrimitiveChannel::product(&bsc(0.5), &bsc(0.2), 0.0).unwrap();
        assert!(!is_generic(&half).generic);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fast_terms_match_reference(seed in 0u64..1000, c0 in 0.0f64..2.0, sparse in 0usize..3) {
            let ch = random_channel(seed, c0);
            let nv = aux_alphabet(&ch);
            let mut rng = restart_rng(seed, 2);
            let mut px = vec![0.0; 2];
            random_simplex(&mut rng, &mut px);
            let mut pv = vec![0.0; 4 * nv];
            for row in pv.chunks_mut(nv) {
                random_simplex(&mut rng, &mut row[sparse..]);
            }
            let a = terms_unchecked(&ch, &px, &pv, nv);
            let b = terms_reference(&ch, &px, &pv, nv);
            for (u, w) in [
                (a.i_x_y1v, b.i_x_y1v),
                (a.i_vx_given_yr, b.i_vx_given_yr),
                (a.i_x_y1, b.i_x_y1),
                (a.i_vyr_given_xy1, b.i_vyr_given_xy1),
                (a.i_vyr_given_y1, b.i_vyr_given_y1),
                (a.constraint, b.constraint),
            ] {
                prop_assert!((u - w).abs() < 1e-12, "{u} vs {w}");
            }
        }

        #[test]
        fn terms_respect_identities(seed in 0u64..1000, c0 in 0.0f64..2.0) {
            let ch = random_channel(seed, c0);
            let nv = aux_alphabet(&ch);
            let mut rng = restart_rng(seed, 1);
            let mut px = vec![0.0; 2];
            random_simplex(&mut rng, &mut px);
            let mut pv = vec![0.0; 4 * nv];
            for row in pv.chunks_mut(nv) {
                random_simplex(&mut rng, row);
            }
            let t = prop4_terms(&ch, &px, &pv, nv).unwrap();
            // first term is I(X;Y1,Yr) - I(V;Y1|Yr) - I(X;Yr|V,Y1) <= I(X;Y1,Yr)
            let j = joint(&ch, &px, &pv, nv);
            let i_x_y1yr = cond_mi(&j, &[X], &[Y1, YR], &[]);
            let alt = i_x_y1yr - cond_mi(&j, &[V], &[Y1], &[YR]) - cond_mi(&j, &[X], &[YR], &[V, Y1]);
            prop_assert!((t.first() - alt).abs() < 1e-10);
            prop_assert!(t.value() <= cutset_primitive(&ch) + 1e-9);
        }
    }
}
