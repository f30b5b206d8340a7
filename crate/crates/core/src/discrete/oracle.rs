use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use super::channel::PrimitiveChannel;
use crate::error::{Error, Result};
use crate::info::entropy_of_slice;

/// Default cap on `(p(x) grid points) x (atoms)` for [`brute_force_oracle`].
pub const ORACLE_EVALUATION_CAP: u128 = 10_000_000;

/// Largest `nx * nyr` accepted by the oracle.
pub const ORACLE_MAX_CELLS: usize = 4;

/// Optimal oracle point: `p(x)` and the mixture of atoms `p(x, yr | v)` with
/// weights `p(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub value: f64,
    pub px: Vec<f64>,
    /// `(p(v), p(x, yr | v))` for every atom with positive weight; atoms are
    /// flattened `[x][yr]`.
    pub atoms: Vec<(f64, Vec<f64>)>,
}

/// All compositions of `total` into `parts` nonnegative integers, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(total - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Per-atom coefficients `H(X|Yr) - H(X|Y1)` and `H(Yr|X,Y1)` under
/// `p(x, yr) = q` and the channel's `p(y1 | x, yr)`.
fn atom_coefficients(ch: &PrimitiveChannel, q: &[f64]) -> (f64, f64) {
    let (nx, ny1, nyr) = (ch.nx(), ch.ny1(), ch.nyr());
    let pyr_x = ch.yr_given_x();
    let mut xy1yr = vec![0.0; nx * ny1 * nyr];
    for x in 0..nx {
        for yr in 0..nyr {
            let m = q[x * nyr + yr];
            if m <= 0.0 || pyr_x[x][yr] <= 0.0 {
                continue;
            }
            for y1 in 0..ny1 {
                xy1yr[(x * ny1 + y1) * nyr + yr] = m * ch.prob(x, y1, yr) / pyr_x[x][yr];
            }
        }
    }
    let mut xy1 = vec![0.0; nx * ny1];
    let mut y1 = vec![0.0; ny1];
    let mut yr = vec![0.0; nyr];
    for x in 0..nx {
        for b in 0..ny1 {
            for c in 0..nyr {
                let m = xy1yr[(x * ny1 + b) * nyr + c];
                xy1[x * ny1 + b] += m;
                y1[b] += m;
                yr[c] += m;
            }
        }
    }
    let h_x_given_yr = entropy_of_slice(q) - entropy_of_slice(&yr);
    let h_x_given_y1 = entropy_of_slice(&xy1) - entropy_of_slice(&y1);
    let h_yr_given_xy1 = entropy_of_slice(&xy1yr) - entropy_of_slice(&xy1);
    (h_x_given_yr - h_x_given_y1, h_yr_given_xy1)
}

fn solve_at(
    ch: &PrimitiveChannel,
    px: &[f64],
    atoms: &[Vec<f64>],
    coeffs: &[(f64, f64)],
) -> Result<(f64, Vec<(usize, f64)>)> {
    let (nx, nyr) = (ch.nx(), ch.nyr());
    let pyr_x = ch.yr_given_x();
    let target: Vec<f64> = (0..nx * nyr)
        .map(|c| px[c / nyr] * pyr_x[c / nyr][c % nyr])
        .collect();
    // constants I(X;Yr) and I(X;Y1) + C0 - H(Yr|X,Y1) under the target law
    let mut yr = vec![0.0; nyr];
    for (c, &t) in target.iter().enumerate() {
        yr[c % nyr] += t;
    }
    let h_x_given_yr = entropy_of_slice(&target) - entropy_of_slice(&yr);
    let a1 = entropy_of_slice(px) - h_x_given_yr;
    let (_, h_yr_given_xy1) = atom_coefficients(ch, &target);
    let a2 = mutual_info_x_y1(ch, px) + ch.c0() - h_yr_given_xy1;

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let z = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let w: Vec<_> = atoms.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let mut row1 = vec![(z, 1.0)];
    let mut row2 = vec![(z, 1.0)];
    for (&wa, &(c1, c2)) in w.iter().zip(coeffs) {
        row1.push((wa, -c1));
        row2.push((wa, -c2));
    }
    lp.add_constraint(row1.as_slice(), ComparisonOp::Le, a1);
    lp.add_constraint(row2.as_slice(), ComparisonOp::Le, a2);
    for (c, &t) in target.iter().enumerate() {
        let row: Vec<_> = w
            .iter()
            .zip(atoms)
            .filter(|(_, q)| q[c] > 0.0)
            .map(|(&wa, q)| (wa, q[c]))
            .collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, t);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Search(format!("oracle LP failed: {e}")))?
        .into_solution()
        .map_err(|_| Error::Search("oracle LP was interrupted".into()))?;
    let support = w
        .iter()
        .enumerate()
        .map(|(a, &wa)| (a, sol.var_value(wa)))
        .filter(|&(_, v)| v > 1e-12)
        .collect();
    Ok((sol.objective(), support))
}

/// `I(X;Y1)` at input law `px`.
fn mutual_info_x_y1(ch: &PrimitiveChannel, px: &[f64]) -> f64 {
    let w = ch.y1_given_x();
    let mut xy1 = Vec::with_capacity(px.len() * ch.ny1());
    let mut y1 = vec![0.0; ch.ny1()];
    for (row, &p) in w.iter().zip(px) {
        for (b, &wy) in row.iter().enumerate() {
            xy1.push(p * wy);
            y1[b] += p * wy;
        }
    }
    entropy_of_slice(px) + entropy_of_slice(&y1) - entropy_of_slice(&xy1)
}

/// Quantized oracle for the discrete upper bound.
///
/// Enumerates every `p(x)` on the simplex grid of spacing `step`. For each
/// one, the auxiliary `V` ranges over all mixtures of atoms `p(x, yr | v)` on
/// the same grid that reproduce `p(x, yr)`. Both terms of the bound are linear
/// in the mixture weights once `p(x)` is fixed, so the best mixture solves a
/// linear program whose basic optimum uses at most `nx nyr + 1` atoms. The
/// value is therefore attained by a valid auxiliary of the bound's cardinality
/// and never exceeds the true maximum; it is nondecreasing under grid
/// refinement because finer grids contain coarser ones.
pub fn brute_force_oracle(ch: &PrimitiveChannel, step: f64) -> Result<f64> {
    Ok(brute_force_oracle_with_cap(ch, step, ORACLE_EVALUATION_CAP)?.value)
}

/// [`brute_force_oracle`] with an explicit evaluation cap, returning the
/// optimal point.
pub fn brute_force_oracle_with_cap(
    ch: &PrimitiveChannel,
    step: f64,
    cap: u128,
) -> Result<OracleSolution> {
    let cells = ch.nx() * ch.nyr();
    if cells > ORACLE_MAX_CELLS {
        return Err(Error::Domain {
            name: "nx * nyr",
            value: cells as f64,
            domain: "<= 4",
        });
    }
    let m = (1.0 / step).round();
    if !(step > 0.0) || m < 1.0 || (m * step - 1.0).abs() > 1e-9 {
        return Err(Error::Domain {
            name: "step",
            value: step,
            domain: "1/step a positive integer",
        });
    }
    let m = m as usize;
    let needed = binomial((m + ch.nx() - 1) as u128, (ch.nx() - 1) as u128)
        * binomial((m + cells - 1) as u128, (cells - 1) as u128);
    if needed > cap {
        return Err(Error::Budget { needed, cap });
    }

    let atoms: Vec<Vec<f64>> = compositions(m, cells)
        .into_iter()
        .map(|k| k.into_iter().map(|v| v as f64 / m as f64).collect())
        .collect();
    let coeffs: Vec<(f64, f64)> = atoms.iter().map(|q| atom_coefficients(ch, q)).collect();
    let grid: Vec<Vec<f64>> = compositions(m, ch.nx())
        .into_iter()
        .map(|k| k.into_iter().map(|v| v as f64 / m as f64).collect())
        .collect();
    let results: Vec<Result<(f64, Vec<(usize, f64)>)>> = grid
        .par_iter()
        .map(|px| solve_at(ch, px, &atoms, &coeffs))
        .collect();
    let mut best: Option<(usize, f64, Vec<(usize, f64)>)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let (v, support) = r?;
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((i, v, support));
        }
    }
    let (i, value, support) = best.ok_or_else(|| Error::Search("empty oracle grid".into()))?;
    Ok(OracleSolution {
        value,
        px: grid[i].clone(),
        atoms: support
            .into_iter()
            .map(|(a, w)| (w, atoms[a].clone()))
            .collect(),
    })
}
