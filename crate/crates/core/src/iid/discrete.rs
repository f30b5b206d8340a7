//! Small discrete relay channels with i.i.d. relay output:
//! `p(yr) p(y1 | x, yr)` with a relay link of `C0` bits.
//!
//! Both searches return certificates that satisfy their constraints exactly.
//! Link-budget violations are repaired by erasing the auxiliary: replacing
//! `W` by an erasure symbol with probability `1 - theta` scales every
//! information term that involves `W` linearly in `theta`.

use serde::{Deserialize, Serialize};

use crate::discrete::{check_c0, check_pmf, FILE_SUM_TOL};
use crate::error::{Error, Result};
use crate::info::{cond_mi, upper_hull_of_points, ProbTable, NORMALIZATION_TOL};
use crate::optim::{best_restart, random_simplex, restart_rng, simplex_ascent, SearchConfig};

/// Largest alphabet accepted on any axis.
pub const MAX_IID_ALPHABET: usize = 3;
/// Time-sharing alphabet of both searches.
pub const TIME_SHARING: usize = 2;
/// Alphabet of `W` before the erasure symbol is added.
pub const W_ALPHABET: usize = 3;
/// Alphabet of `V` before the erasure symbol is added.
pub const V_ALPHABET: usize = 3;

const LINE_TOL: f64 = 1e-7;
const GAIN_TOL: f64 = 1e-10;

const X: usize = 0;
const YR: usize = 1;
const Y1: usize = 2;
const W: usize = 3;
const V: usize = 4;

/// Relay channel with i.i.d. relay output `p(yr) p(y1 | x, yr)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IidDiscreteChannel {
    nx: usize,
    nyr: usize,
    ny1: usize,
    pyr: Vec<f64>,
    c0: f64,
    /// Flattened `[x][yr][y1]`.
    p: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IidChannelFile {
    pyr: Vec<f64>,
    c0: f64,
    p: Vec<Vec<Vec<f64>>>,
}

fn check_alphabet(name: &str, n: usize) -> Result<()> {
    if !(2..=MAX_IID_ALPHABET).contains(&n) {
        return Err(Error::InvalidChannel(format!(
            "{name} = {n} is outside 2..={MAX_IID_ALPHABET}"
        )));
    }
    Ok(())
}

impl IidDiscreteChannel {
    /// Builds a channel from `p(yr)` and nested `p[x][yr][y1] = p(y1 | x, yr)`.
    pub fn new(pyr: &[f64], p: &[Vec<Vec<f64>>], c0: f64) -> Result<Self> {
        Self::with_tolerance(pyr, p, c0, NORMALIZATION_TOL)
    }

    fn with_tolerance(pyr: &[f64], p: &[Vec<Vec<f64>>], c0: f64, tol: f64) -> Result<Self> {
        let nx = p.len();
        check_alphabet("nx", nx)?;
        let nyr = pyr.len();
        check_alphabet("nyr", nyr)?;
        let ny1 = p[0].first().map_or(0, Vec::len);
        check_alphabet("ny1", ny1)?;
        check_c0(c0)?;
        let pyr = check_pmf("pyr", pyr, tol)?;
        let mut flat = Vec::with_capacity(nx * nyr * ny1);
        for (x, slice) in p.iter().enumerate() {
            if slice.len() != nyr {
                return Err(Error::InvalidChannel(format!(
                    "p[{x}] has {} rows but pyr has {nyr} entries",
                    slice.len()
                )));
            }
            for (yr, row) in slice.iter().enumerate() {
                if row.len() != ny1 {
                    return Err(Error::InvalidChannel(format!(
                        "p[{x}][{yr}] has {} entries, expected {ny1}",
                        row.len()
                    )));
                }
                flat.extend(check_pmf(&format!("p[{x}][{yr}]"), row, tol)?);
            }
        }
        Ok(Self {
            nx,
            nyr,
            ny1,
            pyr,
            c0,
            p: flat,
        })
    }

    /// Parses `{"pyr": [...], "c0": float, "p": [x][yr][y1]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: IidChannelFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidChannel(e.to_string()))?;
        if file.p.is_empty() {
            return Err(Error::InvalidChannel("p is empty".into()));
        }
        Self::with_tolerance(&file.pyr, &file.p, file.c0, FILE_SUM_TOL)
    }

    pub fn to_json(&self) -> String {
        let file = IidChannelFile {
            pyr: self.pyr.clone(),
            c0: self.c0,
            p: (0..self.nx)
                .map(|x| {
                    (0..self.nyr)
                        .map(|yr| (0..self.ny1).map(|y1| self.prob(x, yr, y1)).collect())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("channel serializes")
    }

    /// Binary channel `Y1 = X Yr xor N` with `P(Yr = 1) = q` and `P(N = 1) = e`.
    pub fn gated(q: f64, e: f64, c0: f64) -> Result<Self> {
        let p: Vec<Vec<Vec<f64>>> = (0..2)
            .map(|x| {
                (0..2)
                    .map(|yr| {
                        let clean = x & yr;
                        (0..2).map(|y1| if y1 == clean { 1.0 - e } else { e }).collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(&[1.0 - q, q], &p, c0)
    }

    pub fn with_c0(&self, c0: f64) -> Result<Self> {
        check_c0(c0)?;
        Ok(Self { c0, ..self.clone() })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nyr(&self) -> usize {
        self.nyr
    }

    pub fn ny1(&self) -> usize {
        self.ny1
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn pyr(&self) -> &[f64] {
        &self.pyr
    }

    /// `p(y1 | x, yr)`.
    pub fn prob(&self, x: usize, yr: usize, y1: usize) -> f64 {
        self.p[(x * self.nyr + yr) * self.ny1 + y1]
    }

    /// Table over `(X, Yr, Y1, W)` for one time-sharing slot, with `W` drawn
    /// from `pw[yr * nw + w]`.
    fn slot_table(&self, px: &[f64], pw: &[f64], nw: usize) -> ProbTable {
        let mut values = Vec::with_capacity(self.nx * self.nyr * self.ny1 * nw);
        for (x, &a) in px.iter().enumerate() {
            for (yr, &b) in self.pyr.iter().enumerate() {
                for y1 in 0..self.ny1 {
                    let m = a * b * self.prob(x, yr, y1);
                    values.extend(pw[yr * nw..][..nw].iter().map(|q| m * q));
                }
            }
        }
        ProbTable::from_raw(vec![self.nx, self.nyr, self.ny1, nw], values)
    }

    /// Table over `(X, Yr, Y1, W, V)` for one slot, with `V` drawn from
    /// `pv[((x * nyr + yr) * nw + w) * nv + v]`.
    fn slot_table_v(&self, px: &[f64], pw: &[f64], nw: usize, pv: &[f64], nv: usize) -> ProbTable {
        let mut values = Vec::with_capacity(self.nx * self.nyr * self.ny1 * nw * nv);
        for (x, &a) in px.iter().enumerate() {
            for (yr, &b) in self.pyr.iter().enumerate() {
                for y1 in 0..self.ny1 {
                    let m = a * b * self.prob(x, yr, y1);
                    for w in 0..nw {
                        let mw = m * pw[yr * nw + w];
                        let row = &pv[((x * self.nyr + yr) * nw + w) * nv..][..nv];
                        values.extend(row.iter().map(|q| mw * q));
                    }
                }
            }
        }
        ProbTable::from_raw(vec![self.nx, self.nyr, self.ny1, nw, nv], values)
    }
}

/// Fraction of an auxiliary kept so that `cost * theta <= budget`.
fn keep_fraction(cost: f64, budget: f64) -> f64 {
    if cost > budget {
        (budget / cost).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Rows `[yr][w]` of width `nw + 1` with the last symbol an erasure taken
/// with probability `1 - theta`.
fn erase_rows(rows: &[f64], nw: usize, theta: f64) -> Vec<f64> {
    rows.chunks(nw)
        .flat_map(|r| r.iter().map(|q| theta * q).chain([1.0 - theta]))
        .collect()
}

/// Certificate of the upper bound with time sharing and a relay description.
#[derive(Debug, Clone, PartialEq)]
pub struct TuSolution {
    pub value: f64,
    pub pt: Vec<f64>,
    /// `[t][x]`.
    pub px_given_t: Vec<Vec<f64>>,
    /// `[t][yr][w]`; the last symbol is the erasure.
    pub pw_given_yrt: Vec<Vec<Vec<f64>>>,
}

/// `(min{I(W,X;Y1|T), I(X;Y1|Yr,T)}, I(W;Yr|T))` for explicit auxiliaries,
/// evaluated on the full joint table.
pub fn tu_terms(
    ch: &IidDiscreteChannel,
    pt: &[f64],
    px_given_t: &[Vec<f64>],
    pw_given_yrt: &[Vec<Vec<f64>>],
) -> Result<(f64, f64)> {
    let nw = pw_given_yrt[0][0].len();
    let mut values = Vec::new();
    for (t, &q) in pt.iter().enumerate() {
        let rows: Vec<f64> = pw_given_yrt[t].iter().flatten().copied().collect();
        let slot = ch.slot_table(&px_given_t[t], &rows, nw);
        values.extend(slot.values().iter().map(|v| q * v));
    }
    let dims = vec![pt.len(), ch.nx, ch.nyr, ch.ny1, nw];
    let joint = ProbTable::new(dims, values)?;
    // axes shifted by one for T
    let (t, x, yr, y1, w) = (0, 1, 2, 3, 4);
    let first = cond_mi(&joint, &[w, x], &[y1], &[t]);
    let second = cond_mi(&joint, &[x], &[y1], &[yr, t]);
    Ok((first.min(second), cond_mi(&joint, &[w], &[yr], &[t])))
}

/// Search layout shared by both bounds: `p(t)`, then `p(x|t)` per slot, then
/// `p(w|yr,t)` rows per slot, then (for the estimate) `p(v|t,x,yr,w)` rows.
struct Layout {
    nx: usize,
    nyr: usize,
    nw: usize,
    nv: usize,
}

impl Layout {
    fn new(ch: &IidDiscreteChannel) -> Self {
        Self {
            nx: ch.nx,
            nyr: ch.nyr,
            nw: W_ALPHABET,
            nv: V_ALPHABET,
        }
    }

    fn px(&self, t: usize) -> usize {
        TIME_SHARING + t * self.nx
    }

    fn pw(&self, t: usize) -> usize {
        TIME_SHARING + TIME_SHARING * self.nx + t * self.nyr * self.nw
    }

    /// `V` rows cover the erasure symbol of `W` too.
    fn pv(&self, t: usize) -> usize {
        self.pw(TIME_SHARING) + t * self.nx * self.nyr * (self.nw + 1) * self.nv
    }

    fn dim(&self, with_v: bool) -> usize {
        if with_v {
            self.pv(TIME_SHARING)
        } else {
            self.pw(TIME_SHARING)
        }
    }

    fn blocks(&self, with_v: bool) -> Vec<std::ops::Range<usize>> {
        let mut b = vec![0..TIME_SHARING];
        for t in 0..TIME_SHARING {
            b.push(self.px(t)..self.px(t) + self.nx);
        }
        for t in 0..TIME_SHARING {
            for r in 0..self.nyr {
                let s = self.pw(t) + r * self.nw;
                b.push(s..s + self.nw);
            }
        }
        if with_v {
            let rows = TIME_SHARING * self.nx * self.nyr * (self.nw + 1);
            for r in 0..rows {
                let s = self.pv(0) + r * self.nv;
                b.push(s..s + self.nv);
            }
        }
        b
    }

    /// Starting point: uniform slots and inputs, `W` and `V` from the given
    /// row makers.
    fn start(
        &self,
        with_v: bool,
        w_row: impl Fn(usize) -> usize,
        v_row: impl Fn(usize, usize) -> usize,
    ) -> Vec<f64> {
        let mut z = vec![0.0; self.dim(with_v)];
        z[..TIME_SHARING].fill(1.0 / TIME_SHARING as f64);
        for t in 0..TIME_SHARING {
            z[self.px(t)..][..self.nx].fill(1.0 / self.nx as f64);
            for r in 0..self.nyr {
                z[self.pw(t) + r * self.nw + w_row(r)] = 1.0;
            }
            if with_v {
                for x in 0..self.nx {
                    for r in 0..self.nyr {
                        for w in 0..=self.nw {
                            let row = ((x * self.nyr + r) * (self.nw + 1) + w) * self.nv;
                            z[self.pv(t) + row + v_row(x, r)] = 1.0;
                        }
                    }
                }
            }
        }
        z
    }
}

fn starts(layout: &Layout, with_v: bool, r: usize, seed: u64) -> Vec<f64> {
    let identity_w = |yr: usize| yr.min(W_ALPHABET - 1);
    let identity_v = |x: usize, _: usize| x.min(V_ALPHABET - 1);
    match (r, with_v) {
        (0, _) => layout.start(with_v, |_| 0, |_, _| 0),
        (1, _) => layout.start(with_v, identity_w, |_, _| 0),
        (2, true) => layout.start(with_v, |_| 0, identity_v),
        (3, true) => layout.start(with_v, identity_w, identity_v),
        _ => {
            let mut rng = restart_rng(seed, r as u64);
            let mut z = vec![0.0; layout.dim(with_v)];
            for b in layout.blocks(with_v) {
                random_simplex(&mut rng, &mut z[b]);
            }
            z
        }
    }
}

/// `(min{I(W,X;Y1|T), I(X;Y1|Yr,T)}, theta)` after erasing `W` to meet the
/// link budget.
fn tu_value(ch: &IidDiscreteChannel, layout: &Layout, z: &[f64]) -> (f64, f64) {
    let nw = layout.nw;
    let (mut a, mut aw, mut b, mut c) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..TIME_SHARING {
        let q = z[t];
        if q <= 0.0 {
            continue;
        }
        let slot = ch.slot_table(&z[layout.px(t)..][..layout.nx], &z[layout.pw(t)..][..layout.nyr * nw], nw);
        a += q * cond_mi(&slot, &[X], &[Y1], &[]);
        aw += q * cond_mi(&slot, &[W], &[Y1], &[X]);
        b += q * cond_mi(&slot, &[X], &[Y1], &[YR]);
        c += q * cond_mi(&slot, &[W], &[YR], &[]);
    }
    let theta = keep_fraction(c, ch.c0);
    ((a + theta * aw).min(b), theta)
}

fn slots(layout: &Layout, z: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let pt = z[..TIME_SHARING].to_vec();
    let px = (0..TIME_SHARING)
        .map(|t| z[layout.px(t)..][..layout.nx].to_vec())
        .collect();
    (pt, px)
}

/// Upper bound for the i.i.d. output relay: the maximum over `p(x,t)` and
/// `p(w|yr,t)` of `min{I(W,X;Y1|T), I(X;Y1|Yr,T)}` subject to
/// `I(W;Yr|T) <= C0`, with `|T| = 2` and `|W| = 3` plus an erasure symbol.
pub fn tu_bound_discrete(ch: &IidDiscreteChannel, cfg: &SearchConfig) -> Result<(f64, TuSolution)> {
    let layout = Layout::new(ch);
    let blocks = layout.blocks(false);
    let (_, value, z) = best_restart(cfg.restarts.max(2), |r| {
        let mut z = starts(&layout, false, r, cfg.seed ^ 0x7u64);
        let (v, _, _) = simplex_ascent(|z| tu_value(ch, &layout, z).0, &mut z, &blocks, cfg.sweeps, LINE_TOL, GAIN_TOL);
        (v, z)
    })
    .ok_or_else(|| Error::Search("no restart produced a value".into()))?;
    let (_, theta) = tu_value(ch, &layout, &z);
    let (pt, px_given_t) = slots(&layout, &z);
    let pw_given_yrt = (0..TIME_SHARING)
        .map(|t| {
            erase_rows(&z[layout.pw(t)..][..layout.nyr * layout.nw], layout.nw, theta)
                .chunks(layout.nw + 1)
                .map(<[f64]>::to_vec)
                .collect()
        })
        .collect();
    Ok((
        value,
        TuSolution {
            value,
            pt,
            px_given_t,
            pw_given_yrt,
        },
    ))
}

/// Certificate of the auxiliary-receiver estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Cor10Solution {
    pub value: f64,
    pub pt: Vec<f64>,
    /// `[t][x]`.
    pub px_given_t: Vec<Vec<f64>>,
    /// `[t][yr][w]`; the last symbol is the erasure.
    pub pw_given_yrt: Vec<Vec<Vec<f64>>>,
    /// `[t][x][yr][w][v]`; the last symbol of `v` is the erasure.
    pub pv_given_txyrw: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

/// Terms of the auxiliary-receiver bound for explicit auxiliaries, on the
/// full joint table: `(I(X;Y1|T,W,V) - I(X;Yr|T,W,V),
/// I(V,W;Yr|T) - I(V,W;Y1|T) - I(W;Yr|T), I(W;Yr|T))`.
pub fn cor10_terms(ch: &IidDiscreteChannel, sol: &Cor10Solution) -> Result<(f64, f64, f64)> {
    let nw = sol.pw_given_yrt[0][0].len();
    let nv = sol.pv_given_txyrw[0][0][0][0].len();
    let mut values = Vec::new();
    for (t, &q) in sol.pt.iter().enumerate() {
        let pw: Vec<f64> = sol.pw_given_yrt[t].iter().flatten().copied().collect();
        let pv: Vec<f64> = sol.pv_given_txyrw[t].iter().flatten().flatten().flatten().copied().collect();
        let slot = ch.slot_table_v(&sol.px_given_t[t], &pw, nw, &pv, nv);
        values.extend(slot.values().iter().map(|v| q * v));
    }
    let dims = vec![sol.pt.len(), ch.nx, ch.nyr, ch.ny1, nw, nv];
    let joint = ProbTable::new(dims, values)?;
    let (t, x, yr, y1, w, v) = (0, 1, 2, 3, 4, 5);
    let value = cond_mi(&joint, &[x], &[y1], &[t, w, v]) - cond_mi(&joint, &[x], &[yr], &[t, w, v]);
    let w_yr = cond_mi(&joint, &[w], &[yr], &[t]);
    let first = cond_mi(&joint, &[v, w], &[yr], &[t]) - cond_mi(&joint, &[v, w], &[y1], &[t]) - w_yr;
    Ok((value, first, w_yr))
}

/// Per-slot terms that do not involve `V`.
#[derive(Clone, Default)]
struct WTerms {
    d0: f64,
    h: f64,
    h_yr_w: f64,
    h_y1_w: f64,
    rows: Vec<f64>,
}

/// Per-slot terms that involve `V`.
#[derive(Clone, Default)]
struct VTerms {
    d1: f64,
    h_vyr_w: f64,
    h_vy1_w: f64,
}

/// Evaluator of the estimate after erasing `W` (fraction kept `theta`) for
/// the link budget and then `V` (fraction kept `phi`) for the first
/// constraint. Slot terms are cached and recomputed only when their
/// coordinates change.
struct Cor10Eval<'a> {
    ch: &'a IidDiscreteChannel,
    layout: &'a Layout,
    w_key: Vec<f64>,
    theta: f64,
    w_terms: Vec<WTerms>,
    v_keys: Vec<Vec<f64>>,
    v_terms: Vec<VTerms>,
}

impl<'a> Cor10Eval<'a> {
    fn new(ch: &'a IidDiscreteChannel, layout: &'a Layout) -> Self {
        Self {
            ch,
            layout,
            w_key: Vec::new(),
            theta: 1.0,
            w_terms: vec![WTerms::default(); TIME_SHARING],
            v_keys: vec![Vec::new(); TIME_SHARING],
            v_terms: vec![VTerms::default(); TIME_SHARING],
        }
    }

    fn refresh_w(&mut self, z: &[f64]) {
        let l = self.layout;
        let nw = l.nw;
        let mut c = 0.0;
        for t in 0..TIME_SHARING {
            let slot = self.ch.slot_table(&z[l.px(t)..][..l.nx], &z[l.pw(t)..][..l.nyr * nw], nw);
            c += z[t] * cond_mi(&slot, &[W], &[YR], &[]);
        }
        self.theta = keep_fraction(c, self.ch.c0);
        for t in 0..TIME_SHARING {
            let rows = erase_rows(&z[l.pw(t)..][..l.nyr * nw], nw, self.theta);
            let slot = self.ch.slot_table(&z[l.px(t)..][..l.nx], &rows, nw + 1);
            self.w_terms[t] = WTerms {
                d0: cond_mi(&slot, &[X], &[Y1], &[W]) - cond_mi(&slot, &[X], &[YR], &[W]),
                h: cond_mi(&slot, &[W], &[Y1], &[]),
                h_yr_w: slot.entropy_of(&[YR, W]),
                h_y1_w: slot.entropy_of(&[Y1, W]),
                rows,
            };
            self.v_keys[t].clear();
        }
        self.w_key = z[..l.pv(0)].to_vec();
    }

    fn refresh_v(&mut self, z: &[f64], t: usize) {
        let l = self.layout;
        let (nw, nv) = (l.nw, l.nv);
        let pv = &z[l.pv(t)..][..l.nx * l.nyr * (nw + 1) * nv];
        let slot = self.ch.slot_table_v(&z[l.px(t)..][..l.nx], &self.w_terms[t].rows, nw + 1, pv, nv);
        let d1 = slot.entropy_of(&[Y1, W, V]) - slot.entropy_of(&[X, Y1, W, V])
            - slot.entropy_of(&[YR, W, V])
            + slot.entropy_of(&[X, YR, W, V]);
        self.v_terms[t] = VTerms {
            d1,
            h_vyr_w: slot.entropy_of(&[YR, W, V]),
            h_vy1_w: slot.entropy_of(&[Y1, W, V]),
        };
        self.v_keys[t] = pv.to_vec();
    }

    /// `(value, theta, phi)`.
    fn eval(&mut self, z: &[f64]) -> (f64, f64, f64) {
        let l = self.layout;
        if self.w_key.as_slice() != &z[..l.pv(0)] {
            self.refresh_w(z);
        }
        let span = l.nx * l.nyr * (l.nw + 1) * l.nv;
        let (mut d1, mut d0, mut g, mut h) = (0.0, 0.0, 0.0, 0.0);
        for t in 0..TIME_SHARING {
            let q = z[t];
            if q <= 0.0 {
                continue;
            }
            if self.v_keys[t].as_slice() != &z[l.pv(t)..][..span] {
                self.refresh_v(z, t);
            }
            let (w, v) = (&self.w_terms[t], &self.v_terms[t]);
            // I(V;Yr|W) - I(V;Y1|W)
            let gap = w.h_yr_w - v.h_vyr_w - w.h_y1_w + v.h_vy1_w;
            d1 += q * v.d1;
            d0 += q * w.d0;
            g += q * gap;
            h += q * w.h;
        }
        let phi = keep_fraction(g, h);
        (phi * d1 + (1.0 - phi) * d0, self.theta, phi)
    }
}

/// Best value found for the auxiliary-receiver bound with a constant
/// auxiliary receiver: `I(X;Y1|T,W,V) - I(X;Yr|T,W,V)` over `p(t,x)`,
/// `p(w|t,yr)`, `p(v|t,x,yr,w)` with `|T| = 2`, `|W| = 3`, `|V| = 3` (each
/// plus an erasure symbol) subject to
/// `I(V,W;Yr|T) - I(V,W;Y1|T) <= I(W;Yr|T) <= C0`. The reduced alphabets make
/// this a lower estimate of that bound.
pub fn cor10_estimate(ch: &IidDiscreteChannel, cfg: &SearchConfig) -> Result<(f64, Cor10Solution)> {
    let layout = Layout::new(ch);
    let blocks = layout.blocks(true);
    let (_, value, z) = best_restart(cfg.restarts.max(4), |r| {
        let mut z = starts(&layout, true, r, cfg.seed ^ 0xc010);
        let mut eval = Cor10Eval::new(ch, &layout);
        let (v, _, _) = simplex_ascent(|z| eval.eval(z).0, &mut z, &blocks, cfg.sweeps, LINE_TOL, GAIN_TOL);
        (v, z)
    })
    .ok_or_else(|| Error::Search("no restart produced a value".into()))?;
    let (_, theta, phi) = Cor10Eval::new(ch, &layout).eval(&z);
    let (nw, nv) = (layout.nw, layout.nv);
    let (pt, px_given_t) = slots(&layout, &z);
    let mut pw_given_yrt = Vec::new();
    let mut pv_given_txyrw = Vec::new();
    for t in 0..TIME_SHARING {
        let rows = erase_rows(&z[layout.pw(t)..][..layout.nyr * nw], nw, theta);
        pw_given_yrt.push(rows.chunks(nw + 1).map(<[f64]>::to_vec).collect());
        let pv = &z[layout.pv(t)..];
        pv_given_txyrw.push(
            (0..layout.nx)
                .map(|x| {
                    (0..layout.nyr)
                        .map(|yr| {
                            (0..=nw)
                                .map(|w| {
                                    let row = &pv[((x * layout.nyr + yr) * (nw + 1) + w) * nv..][..nv];
                                    row.iter().map(|q| phi * q).chain([1.0 - phi]).collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        );
    }
    Ok((
        value,
        Cor10Solution {
            value,
            pt,
            px_given_t,
            pw_given_yrt,
            pv_given_txyrw,
        },
    ))
}

/// Compress-forward rate with time sharing between two operating points.
/// Each point is an input law on a simplex grid and a symmetric description
/// `W` of `Yr` (kept with probability `1 - s`, otherwise uniform over the
/// other symbols), with rate `I(X;Y1,W)` and cost `I(W;Yr|Y1)`.
pub fn cf_time_sharing(ch: &IidDiscreteChannel, cfg: &SearchConfig) -> Result<f64> {
    let n = cfg.grid.max(4);
    let nyr = ch.nyr;
    let s_max = (nyr - 1) as f64 / nyr as f64;
    let mut points = Vec::new();
    for px in simplex_grid(ch.nx, n) {
        for i in 0..=n {
            let s = s_max * i as f64 / n as f64;
            let pw: Vec<f64> = (0..nyr)
                .flat_map(|yr| {
                    (0..nyr).map(move |w| if w == yr { 1.0 - s } else { s / (nyr - 1) as f64 })
                })
                .collect();
            let slot = ch.slot_table(&px, &pw, nyr);
            let rate = cond_mi(&slot, &[X], &[Y1, W], &[]);
            let cost = cond_mi(&slot, &[W], &[YR], &[Y1]);
            points.push((cost, rate));
        }
    }
    let hull = upper_hull_of_points(&points)?;
    let (lo, hi) = hull.domain();
    let mut best = hull.eval(ch.c0.clamp(lo, hi))?;
    for (&x, &y) in hull.breakpoints().iter().zip(hull.ordinates()) {
        if x <= ch.c0 {
            best = best.max(y);
        }
    }
    Ok(best)
}

/// Points of the `dims`-entry simplex with coordinates in multiples of `1 / steps`.
fn simplex_grid(dims: usize, steps: usize) -> Vec<Vec<f64>> {
    if dims == 1 {
        return vec![vec![1.0]];
    }
    let mut out = Vec::new();
    for k in 0..=steps {
        for mut rest in simplex_grid(dims - 1, steps - k) {
            let scale = (steps - k) as f64 / steps as f64;
            rest.iter_mut().for_each(|v| *v *= scale);
            rest.insert(0, k as f64 / steps as f64);
            out.push(rest);
        }
    }
    out
}
