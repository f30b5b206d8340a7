use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::NORMALIZATION_TOL;

/// Largest alphabet accepted on any axis.
pub const MAX_ALPHABET: usize = 4;

/// Slack accepted on the row sums of a channel file.
pub const FILE_SUM_TOL: f64 = 1e-9;

/// Primitive relay channel `p(y1, yr | x)` with a relay-to-destination link of
/// `c0` bits per use.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveChannel {
    nx: usize,
    ny1: usize,
    nyr: usize,
    c0: f64,
    /// Flattened `[x][y1][yr]`.
    p: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelFile {
    nx: usize,
    ny1: usize,
    nyr: usize,
    c0: f64,
    p: Vec<Vec<Vec<f64>>>,
}

fn check_alphabet(name: &str, n: usize) -> Result<()> {
    if !(2..=MAX_ALPHABET).contains(&n) {
        return Err(Error::InvalidChannel(format!(
            "{name} = {n} is outside 2..={MAX_ALPHABET}"
        )));
    }
    Ok(())
}

pub(crate) fn check_c0(c0: f64) -> Result<()> {
    if !(c0 >= 0.0) || !c0.is_finite() {
        return Err(Error::InvalidChannel(format!("c0 = {c0} must be finite and >= 0")));
    }
    Ok(())
}

/// Checks that `row` is a pmf within `tol` and returns it renormalized.
pub(crate) fn check_pmf(what: &str, row: &[f64], tol: f64) -> Result<Vec<f64>> {
    if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidChannel(format!("{what} has entry {v}")));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::InvalidChannel(format!("{what} sums to {s}")));
    }
    Ok(row.iter().map(|v| v / s).collect())
}

impl PrimitiveChannel {
    /// Builds a channel from nested `p[x][y1][yr]`; each x-slice must sum to
    /// one within [`NORMALIZATION_TOL`].
    pub fn new(p: &[Vec<Vec<f64>>], c0: f64) -> Result<Self> {
        Self::with_tolerance(p, c0, NORMALIZATION_TOL)
    }

    fn with_tolerance(p: &[Vec<Vec<f64>>], c0: f64, tol: f64) -> Result<Self> {
        let nx = p.len();
        check_alphabet("nx", nx)?;
        let ny1 = p[0].len();
        check_alphabet("ny1", ny1)?;
        let nyr = p[0].first().map_or(0, Vec::len);
        check_alphabet("nyr", nyr)?;
        check_c0(c0)?;
        let mut flat = Vec::with_capacity(nx * ny1 * nyr);
        for (x, slice) in p.iter().enumerate() {
            if slice.len() != ny1 || slice.iter().any(|r| r.len() != nyr) {
                return Err(Error::InvalidChannel(format!(
                    "p[{x}] is not a {ny1}x{nyr} array"
                )));
            }
            let row: Vec<f64> = slice.iter().flatten().copied().collect();
            flat.extend(check_pmf(&format!("p[{x}]"), &row, tol)?);
        }
        Ok(Self {
            nx,
            ny1,
            nyr,
            c0,
            p: flat,
        })
    }

    /// Parses the JSON channel format
    /// `{"nx", "ny1", "nyr", "c0", "p": [x][y1][yr]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidChannel(e.to_string()))?;
        if file.p.len() != file.nx {
            return Err(Error::InvalidChannel(format!(
                "nx = {} but p has {} slices",
                file.nx,
                file.p.len()
            )));
        }
        let ch = Self::with_tolerance(&file.p, file.c0, FILE_SUM_TOL)?;
        if (ch.ny1, ch.nyr) != (file.ny1, file.nyr) {
            return Err(Error::InvalidChannel(format!(
                "declared ny1 = {}, nyr = {} but p is {}x{} per input",
                file.ny1, file.nyr, ch.ny1, ch.nyr
            )));
        }
        Ok(ch)
    }

    pub fn to_json(&self) -> String {
        let file = ChannelFile {
            nx: self.nx,
            ny1: self.ny1,
            nyr: self.nyr,
            c0: self.c0,
            p: (0..self.nx)
                .map(|x| {
                    (0..self.ny1)
                        .map(|y1| (0..self.nyr).map(|yr| self.prob(x, y1, yr)).collect())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("channel serializes")
    }

    /// Same channel with a different link capacity.
    pub fn with_c0(&self, c0: f64) -> Result<Self> {
        check_c0(c0)?;
        Ok(Self { c0, ..self.clone() })
    }

    /// Product-form channel `p(y1|x) p(yr|x)`.
    pub fn product(w1: &[Vec<f64>], wr: &[Vec<f64>], c0: f64) -> Result<Self> {
        if w1.len() != wr.len() {
            return Err(Error::InvalidChannel("component channels differ in nx".into()));
        }
        let p: Vec<Vec<Vec<f64>>> = w1
            .iter()
            .zip(wr)
            .map(|(r1, rr)| r1.iter().map(|a| rr.iter().map(|b| a * b).collect()).collect())
            .collect();
        Self::new(&p, c0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny1(&self) -> usize {
        self.ny1
    }

    pub fn nyr(&self) -> usize {
        self.nyr
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `p(y1, yr | x)`.
    pub fn prob(&self, x: usize, y1: usize, yr: usize) -> f64 {
        self.p[(x * self.ny1 + y1) * self.nyr + yr]
    }

    /// Marginal `p(y1 | x)` as an `nx x ny1` matrix.
    pub fn y1_given_x(&self) -> Vec<Vec<f64>> {
        (0..self.nx)
            .map(|x| {
                (0..self.ny1)
                    .map(|y1| (0..self.nyr).map(|yr| self.prob(x, y1, yr)).sum())
                    .collect()
            })
            .collect()
    }

    /// `p(y1, yr | x)` as an `nx x (ny1 nyr)` matrix.
    pub fn pair_given_x(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.ny1 * self.nyr).map(<[f64]>::to_vec).collect()
    }

    /// Marginal `p(yr | x)`.
    pub fn yr_given_x(&self) -> Vec<Vec<f64>> {
        (0..self.nx)
            .map(|x| {
                (0..self.nyr)
                    .map(|yr| (0..self.ny1).map(|y1| self.prob(x, y1, yr)).sum())
                    .collect()
            })
            .collect()
    }
}
