//! Exact re-optimization of the auxiliary for a fixed input law.
//!
//! With `p(x)` fixed, `V` is a mixture of atoms `q_v = p(x, yr | v)` with
//! weights `p(v)` that reproduce `p(x, yr)`, and both terms of the bound are
//! linear in the weights. Column generation alternates between the dual of
//! that linear program, whose prices define a smooth pricing function on the
//! atom simplex, and multi-start ascent on the pricing function to find new
//! atoms.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::channel::PrimitiveChannel;
use crate::error::{Error, Result};
use crate::info::ZERO_MASS;
use crate::optim::{random_simplex, restart_rng, simplex_ascent};

/// Column-generation rounds for a final certificate.
pub(super) const MAX_ROUNDS: usize = 30;
const NEW_ATOMS_PER_ROUND: usize = 4;
const PRICE_TOL: f64 = 1e-8;
const RANDOM_PRICING_STARTS: usize = 3;
const DISTINCT_ATOM_TOL: f64 = 1e-6;
/// Box on the dual prices; optimal prices are entropy-sized, and the box keeps
/// the solver away from spurious rays on nearly parallel columns.
const PRICE_BOUND: f64 = 1e4;

fn plogp_sum(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > ZERO_MASS)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Conditional entropies of an atom `q(x, yr)` pushed through `p(y1 | x, yr)`.
struct AtomEval<'a> {
    ch: &'a PrimitiveChannel,
    y1_given_xyr: Vec<f64>,
    xy1yr: Vec<f64>,
    xy1: Vec<f64>,
    y1: Vec<f64>,
    yr: Vec<f64>,
}

/// `(H(X|Yr), H(X|Y1), H(Yr|X,Y1))` of one atom, scaled by its mass.
#[derive(Clone, Copy)]
struct AtomEntropies {
    x_given_yr: f64,
    x_given_y1: f64,
    yr_given_xy1: f64,
}

impl<'a> AtomEval<'a> {
    fn new(ch: &'a PrimitiveChannel) -> Self {
        let (nx, ny1, nyr) = (ch.nx(), ch.ny1(), ch.nyr());
        let pyr = ch.yr_given_x();
        let mut y1_given_xyr = vec![0.0; nx * nyr * ny1];
        for x in 0..nx {
            for yr in 0..nyr {
                for y1 in 0..ny1 {
                    if pyr[x][yr] > 0.0 {
                        y1_given_xyr[(x * nyr + yr) * ny1 + y1] = ch.prob(x, y1, yr) / pyr[x][yr];
                    }
                }
            }
        }
        Self {
            ch,
            y1_given_xyr,
            xy1yr: vec![0.0; nx * ny1 * nyr],
            xy1: vec![0.0; nx * ny1],
            y1: vec![0.0; ny1],
            yr: vec![0.0; nyr],
        }
    }

    fn entropies(&mut self, q: &[f64]) -> AtomEntropies {
        let (nx, ny1, nyr) = (self.ch.nx(), self.ch.ny1(), self.ch.nyr());
        self.xy1.fill(0.0);
        self.y1.fill(0.0);
        self.yr.fill(0.0);
        for x in 0..nx {
            for r in 0..nyr {
                let m = q[x * nyr + r];
                self.yr[r] += m;
                for b in 0..ny1 {
                    let v = m * self.y1_given_xyr[(x * nyr + r) * ny1 + b];
                    self.xy1yr[(x * ny1 + b) * nyr + r] = v;
                    self.xy1[x * ny1 + b] += v;
                    self.y1[b] += v;
                }
            }
        }
        let h_xy1 = plogp_sum(&self.xy1);
        AtomEntropies {
            x_given_yr: plogp_sum(q) - plogp_sum(&self.yr),
            x_given_y1: h_xy1 - plogp_sum(&self.y1),
            yr_given_xy1: plogp_sum(&self.xy1yr) - h_xy1,
        }
    }

    /// Slopes of the two terms in the mixture weight of atom `q`.
    fn coefficients(&mut self, q: &[f64]) -> (f64, f64) {
        let e = self.entropies(q);
        (e.x_given_yr - e.x_given_y1, e.yr_given_xy1)
    }
}

/// Best mixture found for one input law.
#[derive(Debug, Clone)]
pub(super) struct Mixture {
    pub value: f64,
    /// `(p(v), p(x, yr | v))` over the support.
    pub atoms: Vec<(f64, Vec<f64>)>,
}

struct Master<'a> {
    target: &'a [f64],
    a1: f64,
    a2: f64,
}

impl Master<'_> {
    /// Dual prices `(value, mu1, mu2, pi)`.
    fn dual(&self, coeffs: &[(f64, f64)], atoms: &[Vec<f64>]) -> Result<(f64, f64, f64, Vec<f64>)> {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let mu1 = lp.add_var(self.a1, (0.0, f64::INFINITY));
        let mu2 = lp.add_var(self.a2, (0.0, f64::INFINITY));
        // prices of empty cells appear in no constraint and are left at zero
        let pi: Vec<_> = self
            .target
            .iter()
            .map(|&t| (t > 0.0).then(|| lp.add_var(t, (-PRICE_BOUND, PRICE_BOUND))))
            .collect();
        lp.add_constraint([(mu1, 1.0), (mu2, 1.0)].as_slice(), ComparisonOp::Eq, 1.0);
        for (q, &(c1, c2)) in atoms.iter().zip(coeffs) {
            let mut row = vec![(mu1, -c1), (mu2, -c2)];
            row.extend(
                pi.iter()
                    .zip(q)
                    .filter_map(|(p, &m)| p.filter(|_| m > 0.0).map(|p| (p, m))),
            );
            lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
        }
        let sol = solve(&lp)?;
        Ok((
            sol.objective(),
            sol.var_value(mu1),
            sol.var_value(mu2),
            pi.iter().map(|p| p.map_or(0.0, |p| sol.var_value(p))).collect(),
        ))
    }

    /// Optimal weights `(value, [(atom index, weight)])`.
    fn primal(&self, coeffs: &[(f64, f64)], atoms: &[Vec<f64>]) -> Result<(f64, Vec<(usize, f64)>)> {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let z = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        let w: Vec<_> = atoms.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        let mut row1 = vec![(z, 1.0)];
        let mut row2 = vec![(z, 1.0)];
        for (&wa, &(c1, c2)) in w.iter().zip(coeffs) {
            row1.push((wa, -c1));
            row2.push((wa, -c2));
        }
        lp.add_constraint(row1.as_slice(), ComparisonOp::Le, self.a1);
        lp.add_constraint(row2.as_slice(), ComparisonOp::Le, self.a2);
        for (c, &t) in self.target.iter().enumerate().filter(|(_, &t)| t > 0.0) {
            let row: Vec<_> = w
                .iter()
                .zip(atoms)
                .filter(|(_, q)| q[c] > 0.0)
                .map(|(&wa, q)| (wa, q[c]))
                .collect();
            lp.add_constraint(row.as_slice(), ComparisonOp::Eq, t);
        }
        let sol = solve(&lp)?;
        let support = w
            .iter()
            .enumerate()
            .map(|(a, &wa)| (a, sol.var_value(wa)))
            .filter(|&(_, v)| v > 0.0)
            .collect();
        Ok((sol.objective(), support))
    }
}

fn solve(lp: &Problem) -> Result<microlp::Solution> {
    lp.solve()
        .map_err(|e| Error::Search(format!("mixture LP failed: {e}")))?
        .into_solution()
        .map_err(|_| Error::Search("mixture LP was interrupted".into()))
}

/// Maximizes the bound over all auxiliaries for the input law `px`, starting
/// the atom pool from `seed_atoms` and running at most `rounds` pricing
/// rounds. Deterministic given `seed`.
pub(super) fn best_mixture(
    ch: &PrimitiveChannel,
    px: &[f64],
    seed_atoms: &[Vec<f64>],
    rounds: usize,
    seed: u64,
) -> Result<Mixture> {
    let nyr = ch.nyr();
    let cells = ch.nx() * nyr;
    let pyr = ch.yr_given_x();
    let target: Vec<f64> = (0..cells).map(|c| px[c / nyr] * pyr[c / nyr][c % nyr]).collect();
    let live: Vec<usize> = (0..cells).filter(|&c| target[c] > 0.0).collect();

    let mut eval = AtomEval::new(ch);
    let t = eval.entropies(&target);
    let h_x = plogp_sum(px);
    let master = Master {
        target: &target,
        a1: h_x - t.x_given_yr,
        a2: h_x - t.x_given_y1 + ch.c0() - t.yr_given_xy1,
    };

    // atoms outside the support of the target can never carry weight
    let mut atoms: Vec<Vec<f64>> = vec![target.clone()];
    for q in seed_atoms {
        if q.iter().enumerate().all(|(c, &m)| m <= 0.0 || target[c] > 0.0) {
            let s: f64 = q.iter().sum();
            if s > 0.0 {
                atoms.push(q.iter().map(|m| m / s).collect());
            }
        }
    }
    for &c in &live {
        let mut q = vec![0.0; cells];
        q[c] = 1.0;
        atoms.push(q);
    }
    let mut coeffs: Vec<(f64, f64)> = atoms.iter().map(|q| eval.coefficients(q)).collect();

    let mut rng = restart_rng(seed, 0xa70);
    let block = [0..live.len()];
    let expand = |z: &[f64], q: &mut [f64]| {
        q.fill(0.0);
        for (&c, &m) in live.iter().zip(z) {
            q[c] = m;
        }
    };
    let seeded = atoms.len();
    let mut support: Vec<usize> = (0..atoms.len()).collect();
    for _ in 0..rounds {
        let (mu1, mu2, pi) = match master.dual(&coeffs, &atoms) {
            Ok((_, mu1, mu2, pi)) => (mu1, mu2, pi),
            Err(_) if atoms.len() > seeded => break,
            Err(e) => return Err(e),
        };
        let mut q = vec![0.0; cells];
        let mut price = |z: &[f64]| {
            expand(z, &mut q);
            let (c1, c2) = eval.coefficients(&q);
            mu1 * c1 + mu2 * c2 - pi.iter().zip(&q).map(|(p, m)| p * m).sum::<f64>()
        };
        let mut starts: Vec<Vec<f64>> = support
            .iter()
            .map(|&a| live.iter().map(|&c| atoms[a][c]).collect())
            .collect();
        for _ in 0..RANDOM_PRICING_STARTS {
            let mut z = vec![0.0; live.len()];
            random_simplex(&mut rng, &mut z);
            starts.push(z);
        }
        let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
        for mut z in starts {
            let (v, _, _) = simplex_ascent(&mut price, &mut z, &block, 25, 1e-9, 1e-12);
            if v > PRICE_TOL {
                found.push((v, z));
            }
        }
        found.sort_by(|a, b| b.0.total_cmp(&a.0));
        let before = atoms.len();
        for (_, z) in found {
            let mut full = vec![0.0; cells];
            expand(&z, &mut full);
            if atoms.iter().all(|a| a.iter().zip(&full).any(|(u, w)| (u - w).abs() > DISTINCT_ATOM_TOL)) {
                coeffs.push(eval.coefficients(&full));
                atoms.push(full);
                if atoms.len() - before == NEW_ATOMS_PER_ROUND {
                    break;
                }
            }
        }
        if atoms.len() == before {
            break;
        }
        support = master.primal(&coeffs, &atoms)?.1.into_iter().map(|(a, _)| a).collect();
        support.extend(before..atoms.len());
    }
    let (value, support) = master.primal(&coeffs, &atoms)?;
    Ok(Mixture {
        value,
        atoms: support
            .into_iter()
            .map(|(a, w)| (w, atoms[a].clone()))
            .collect(),
    })
}

/// `p(v | x, yr)` rows (`[x][yr][v]`, width `nv`) of a mixture whose support
/// fits in `nv` symbols; rows of zero-probability cells are point masses.
pub(super) fn conditional_rows(
    ch: &PrimitiveChannel,
    px: &[f64],
    atoms: &[(f64, Vec<f64>)],
    nv: usize,
) -> Vec<f64> {
    let nyr = ch.nyr();
    let cells = ch.nx() * nyr;
    let pyr = ch.yr_given_x();
    let mut rows = vec![0.0; cells * nv];
    for c in 0..cells {
        let row = &mut rows[c * nv..][..nv];
        let target = px[c / nyr] * pyr[c / nyr][c % nyr];
        let total: f64 = atoms.iter().map(|(w, q)| w * q[c]).sum();
        if target <= 0.0 || total <= 0.0 {
            row[0] = 1.0;
            continue;
        }
        for (v, (w, q)) in atoms.iter().enumerate().take(nv) {
            row[v] = w * q[c] / total;
        }
    }
    rows
}

/// Atoms `p(x, yr | v)` with weights of a conditional table.
pub(super) fn atoms_of(ch: &PrimitiveChannel, px: &[f64], pv: &[f64], nv: usize) -> Vec<Vec<f64>> {
    let nyr = ch.nyr();
    let cells = ch.nx() * nyr;
    let pyr = ch.yr_given_x();
    (0..nv)
        .filter_map(|v| {
            let q: Vec<f64> = (0..cells)
                .map(|c| px[c / nyr] * pyr[c / nyr][c % nyr] * pv[c * nv + v])
                .collect();
            let s: f64 = q.iter().sum();
            (s > 0.0).then(|| q.iter().map(|m| m / s).collect())
        })
        .collect()
}
