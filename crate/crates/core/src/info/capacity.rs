use crate::error::{Error, Result};

/// Result of a Blahut-Arimoto run.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcCapacity {
    /// Capacity estimate in bits (the certified lower end of the final bracket).
    pub capacity: f64,
    /// Upper end of the final bracket, `max_x D(W(.|x) || q)`.
    pub upper: f64,
    /// Capacity-achieving input distribution.
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Per-input divergences `D(W(.|x) || q)` in bits.
fn divergences(w: &[Vec<f64>], px: &[f64]) -> Vec<f64> {
    let ny = w[0].len();
    let mut q = vec![0.0; ny];
    for (row, &p) in w.iter().zip(px) {
        for (qy, &wy) in q.iter_mut().zip(row) {
            *qy += p * wy;
        }
    }
    w.iter()
        .map(|row| {
            row.iter()
                .zip(&q)
                .filter(|(&wy, _)| wy > 0.0)
                .map(|(&wy, &qy)| wy * (wy / qy).log2())
                .sum()
        })
        .collect()
}

/// Capacity of the discrete memoryless channel with transition rows
/// `w[x][y] = W(y|x)` via Blahut-Arimoto iterations, stopped once the
/// upper/lower bracket is narrower than `tol`.
pub fn dmc_capacity(w: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<DmcCapacity> {
    if w.is_empty() || w[0].is_empty() {
        return Err(Error::InvalidChannel("empty transition matrix".into()));
    }
    let ny = w[0].len();
    for (x, row) in w.iter().enumerate() {
        if row.len() != ny {
            return Err(Error::InvalidChannel(format!("row {x} has wrong length")));
        }
        if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidChannel(format!("row {x} has a negative entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidChannel(format!("row {x} sums to {s}")));
        }
    }

    let nx = w.len();
    let mut px = vec![1.0 / nx as f64; nx];
    let mut iterations = 0;
    loop {
        let d = divergences(w, &px);
        let lower: f64 = px.iter().zip(&d).map(|(p, dx)| p * dx).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower <= tol || iterations >= max_iter {
            return Ok(DmcCapacity {
                capacity: lower,
                upper,
                input: px,
                iterations,
            });
        }
        let mut z = 0.0;
        for (p, dx) in px.iter_mut().zip(&d) {
            *p *= dx.exp2();
            z += *p;
        }
        px.iter_mut().for_each(|p| *p /= z);
        iterations += 1;
    }
}
