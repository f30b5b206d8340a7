//! Conditional graph entropy of the relay observation given the destination
//! observation, for a function the destination wants to compute.
//!
//! Vertices of the characteristic graph are relay symbols. Two symbols are
//! joined when some destination symbol occurs with both and the function
//! separates them. `H_G(Yr|Y1)` is the minimum of `I(W;Yr|Y1)` over `W - Yr - Y1`
//! where `W` ranges over maximal independent sets containing `Yr`.

use super::channel::PrimitiveChannel;
use crate::error::{Error, Result};
use crate::info::{cond_mi, ProbTable};
use crate::optim::simplex_ascent;

/// Adjacency of the characteristic graph on the relay alphabet, given the
/// joint law `p(y1, yr)` and the function `f(y1, yr)`.
pub fn characteristic_graph<F: Fn(usize, usize) -> usize>(
    p_y1_yr: &ProbTable,
    f: F,
) -> Result<Vec<Vec<bool>>> {
    let dims = p_y1_yr.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidTable("expected a table over (Y1, Yr)".into()));
    }
    let (ny1, nyr) = (dims[0], dims[1]);
    let mut adj = vec![vec![false; nyr]; nyr];
    for y1 in 0..ny1 {
        for a in 0..nyr {
            for b in a + 1..nyr {
                if p_y1_yr.get(&[y1, a]) > 0.0 && p_y1_yr.get(&[y1, b]) > 0.0 && f(y1, a) != f(y1, b)
                {
                    adj[a][b] = true;
                    adj[b][a] = true;
                }
            }
        }
    }
    Ok(adj)
}

/// Maximal independent sets as bitmasks, in increasing numeric order.
pub fn maximal_independent_sets(adj: &[Vec<bool>]) -> Vec<u32> {
    let n = adj.len();
    assert!(n < 32, "graph too large for bitmask enumeration");
    let independent = |s: u32| {
        (0..n).all(|a| s >> a & 1 == 0 || (a + 1..n).all(|b| s >> b & 1 == 0 || !adj[a][b]))
    };
    (1u32..1 << n)
        .filter(|&s| independent(s))
        .filter(|&s| (0..n).all(|v| s >> v & 1 == 1 || !independent(s | 1 << v)))
        .collect()
}

/// `H_G(Yr | Y1)` for the joint law `p(y1, yr)` and function `f(y1, yr)`.
pub fn conditional_graph_entropy_joint<F: Fn(usize, usize) -> usize>(
    p_y1_yr: &ProbTable,
    f: F,
) -> Result<f64> {
    let adj = characteristic_graph(p_y1_yr, f)?;
    let sets = maximal_independent_sets(&adj);
    let (ny1, nyr) = (p_y1_yr.dims()[0], p_y1_yr.dims()[1]);
    let nw = sets.len();
    if nw == 1 {
        return Ok(0.0);
    }
    // per relay symbol, the sets that contain it; each row is one simplex block
    let allowed: Vec<Vec<usize>> = (0..nyr)
        .map(|yr| (0..nw).filter(|&w| sets[w] >> yr & 1 == 1).collect())
        .collect();
    let mut blocks = Vec::with_capacity(nyr);
    let mut start = 0;
    for a in &allowed {
        blocks.push(start..start + a.len());
        start += a.len();
    }
    let dim = start;

    let rate = |z: &[f64]| {
        let mut values = Vec::with_capacity(ny1 * nyr * nw);
        for y1 in 0..ny1 {
            for yr in 0..nyr {
                let p = p_y1_yr.get(&[y1, yr]);
                let mut row = vec![0.0; nw];
                for (k, &w) in allowed[yr].iter().enumerate() {
                    row[w] = z[blocks[yr].start + k];
                }
                values.extend(row.iter().map(|q| p * q));
            }
        }
        let t = ProbTable::new(vec![ny1, nyr, nw], values).expect("rows stay on the simplex");
        cond_mi(&t, &[2], &[1], &[0])
    };

    // grid: every deterministic choice of one set per symbol, plus the uniform split
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut uniform = vec![0.0; dim];
    for b in &blocks {
        let len = b.len() as f64;
        uniform[b.clone()].iter_mut().for_each(|v| *v = 1.0 / len);
    }
    starts.push(uniform);
    let combos: usize = allowed.iter().map(Vec::len).product();
    for mut code in 0..combos {
        let mut z = vec![0.0; dim];
        for b in &blocks {
            z[b.start + code % b.len()] = 1.0;
            code /= b.len();
        }
        starts.push(z);
    }
    let mut best = f64::INFINITY;
    for mut z in starts {
        let (v, _, _) = simplex_ascent(|z| -rate(z), &mut z, &blocks, 400, 1e-12, 1e-15);
        best = best.min(-v);
    }
    Ok(best.max(0.0))
}

/// `H_G(Yr | Y1)` for a channel in which `X = f(Y1, Yr)` with probability one
/// under a uniform input.
pub fn conditional_graph_entropy<F: Fn(usize, usize) -> usize>(
    ch: &PrimitiveChannel,
    f: F,
) -> Result<f64> {
    let (nx, ny1, nyr) = (ch.nx(), ch.ny1(), ch.nyr());
    let mut joint = vec![0.0; ny1 * nyr];
    for x in 0..nx {
        for y1 in 0..ny1 {
            for yr in 0..nyr {
                let p = ch.prob(x, y1, yr);
                if p <= 0.0 {
                    continue;
                }
                if f(y1, yr) != x {
                    return Err(Error::InvalidChannel(format!(
                        "f({y1}, {yr}) = {} but input {x} produces ({y1}, {yr})",
                        f(y1, yr)
                    )));
                }
                joint[y1 * nyr + yr] += p / nx as f64;
            }
        }
    }
    let t = ProbTable::new(vec![ny1, nyr], joint)?;
    conditional_graph_entropy_joint(&t, f)
}
