use crate::error::{Error, Result};

/// Normalization slack accepted by [`ProbTable::new`]; tables inside it are
/// renormalized, tables outside it are rejected.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Entries below this are treated as exact zeros in entropy sums.
pub const ZERO_MASS: f64 = 1e-15;

/// A joint probability mass function over a product of small finite alphabets.
///
/// Values are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl ProbTable {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidTable("a table needs at least one axis".into()));
        }
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidTable(format!("axis {axis} has an empty alphabet")));
        }
        let size: usize = dims.iter().product();
        if values.len() != size {
            return Err(Error::InvalidTable(format!(
                "expected {size} entries for dims {dims:?}, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidTable(format!("entry {i} is {v}")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidTable(format!("entries sum to {total}")));
        }
        let values = values.into_iter().map(|v| v / total).collect();
        Ok(Self { dims, values })
    }

    /// Uniform law over the product alphabet.
    pub fn uniform(dims: Vec<usize>) -> Result<Self> {
        let size: usize = dims.iter().product();
        Self::new(dims, vec![1.0 / size.max(1) as f64; size])
    }

    /// Builds a table without validation. Callers guarantee nonnegative
    /// entries summing to one up to rounding.
    pub(crate) fn from_raw(dims: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), dims.iter().product::<usize>());
        Self { dims, values }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Value at a multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, &d) in index.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        self.values[flat]
    }

    /// Marginal over `axes`, keeping the axes in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<ProbTable> {
        self.check_axes(axes)?;
        for (k, a) in axes.iter().enumerate() {
            if axes[..k].contains(a) {
                return Err(Error::OverlappingAxes(*a));
            }
        }
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let values = self.marginal_values(axes);
        Ok(ProbTable::from_raw(dims, values))
    }

    pub(crate) fn check_axes(&self, axes: &[usize]) -> Result<()> {
        match axes.iter().find(|&&a| a >= self.dims.len()) {
            Some(&axis) => Err(Error::AxisOutOfRange {
                axis,
                rank: self.dims.len(),
            }),
            None => Ok(()),
        }
    }

    /// Marginal masses over `axes` (assumed valid and distinct).
    pub(crate) fn marginal_values(&self, axes: &[usize]) -> Vec<f64> {
        let rank = self.dims.len();
        // stride of each source axis inside the marginal, zero when summed out
        let mut target_stride = vec![0usize; rank];
        let mut stride = 1;
        for &a in axes.iter().rev() {
            target_stride[a] = stride;
            stride *= self.dims[a];
        }
        let mut out = vec![0.0; stride];
        let mut counter = vec![0usize; rank];
        let mut target = 0usize;
        for &v in &self.values {
            out[target] += v;
            // odometer increment, last axis fastest
            for ax in (0..rank).rev() {
                counter[ax] += 1;
                target += target_stride[ax];
                if counter[ax] < self.dims[ax] {
                    break;
                }
                target -= target_stride[ax] * counter[ax];
                counter[ax] = 0;
            }
        }
        out
    }

    /// Entropy in bits of the marginal over `axes` (empty set gives 0).
    pub(crate) fn entropy_of(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        if axes.len() == self.dims.len() && axes.iter().enumerate().all(|(i, &a)| i == a) {
            return entropy_of_slice(&self.values);
        }
        entropy_of_slice(&self.marginal_values(axes))
    }
}

/// Shannon entropy in bits of a mass vector, with `0 log 0 = 0`.
pub(crate) fn entropy_of_slice(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&v| v > ZERO_MASS)
        .map(|&v| -v * v.log2())
        .sum();
    h.max(0.0)
}

/// Entropy of a joint table in bits.
pub fn entropy(p: &ProbTable) -> f64 {
    entropy_of_slice(&p.values)
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

fn check_disjoint(groups: &[&[usize]]) -> Result<()> {
    let mut seen = Vec::new();
    for g in groups {
        for &a in g.iter() {
            if seen.contains(&a) {
                return Err(Error::OverlappingAxes(a));
            }
            seen.push(a);
        }
    }
    Ok(())
}

/// `I(A;B)` in bits between two disjoint groups of axes.
pub fn mutual_information(joint: &ProbTable, group_a: &[usize], group_b: &[usize]) -> Result<f64> {
    mutual_information_given(joint, group_a, group_b, &[])
}

/// `I(A;B|C)` in bits for pairwise disjoint groups of axes.
pub fn mutual_information_given(
    joint: &ProbTable,
    group_a: &[usize],
    group_b: &[usize],
    given: &[usize],
) -> Result<f64> {
    joint.check_axes(group_a)?;
    joint.check_axes(group_b)?;
    joint.check_axes(given)?;
    check_disjoint(&[group_a, group_b, given])?;
    Ok(cond_mi(joint, group_a, group_b, given))
}

/// Unchecked `I(A;B|C)`, clamped at zero against rounding.
pub(crate) fn cond_mi(joint: &ProbTable, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let ac = union(a, c);
    let bc = union(b, c);
    let abc = union(&ac, b);
    let v = joint.entropy_of(&ac) + joint.entropy_of(&bc)
        - joint.entropy_of(&abc)
        - joint.entropy_of(&union(c, &[]));
    v.max(0.0)
}

/// Unchecked conditional entropy `H(A|C)`.
#[cfg(test)]
pub(crate) fn cond_entropy(joint: &ProbTable, a: &[usize], c: &[usize]) -> f64 {
    let ac = union(a, c);
    (joint.entropy_of(&ac) - joint.entropy_of(&union(c, &[]))).max(0.0)
}
