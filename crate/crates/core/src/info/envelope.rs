use crate::error::{Error, Result};

/// A concave piecewise-linear function given by its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinearFn {
    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Slopes of the linear pieces, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    /// Evaluates by linear interpolation; breakpoints return their ordinate
    /// exactly.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain {
                name: "x",
                value: x,
                domain: "envelope support",
            });
        }
        let k = self.xs.partition_point(|&b| b < x);
        if k < self.xs.len() && self.xs[k] == x {
            return Ok(self.ys[k]);
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        let t = (x - x0) / (x1 - x0);
        Ok(y0 + t * (y1 - y0))
    }
}

/// Upper boundary of the convex hull of the points `(xs[i], ys[i])`.
///
/// Monotone-chain construction; points on a chord are dropped.
pub fn upper_concave_envelope(xs: &[f64], ys: &[f64]) -> Result<PiecewiseLinearFn> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidAbscissae(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidAbscissae("need at least two samples".into()));
    }
    if let Some(i) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(Error::InvalidAbscissae(format!("non-finite sample at {i}")));
    }
    if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidAbscissae(format!(
            "abscissae not strictly increasing at index {}",
            i + 1
        )));
    }

    let mut hx: Vec<f64> = Vec::with_capacity(xs.len());
    let mut hy: Vec<f64> = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        while hx.len() >= 2 {
            let n = hx.len();
            let (ax, ay) = (hx[n - 2], hy[n - 2]);
            let (bx, by) = (hx[n - 1], hy[n - 1]);
            // b is dropped unless it lies strictly above the chord a -> (x, y)
            let cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
            if cross >= 0.0 {
                hx.pop();
                hy.pop();
            } else {
                break;
            }
        }
        hx.push(x);
        hy.push(y);
    }
    Ok(PiecewiseLinearFn { xs: hx, ys: hy })
}

/// Upper concave envelope of an unordered point cloud. Points sharing an
/// abscissa keep only the largest ordinate.
pub fn upper_hull_of_points(points: &[(f64, f64)]) -> Result<PiecewiseLinearFn> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidAbscissae("non-finite point".into()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|later, earlier| later.0 == earlier.0);
    if pts.len() == 1 {
        // degenerate cloud: a single abscissa
        let (x, y) = pts[0];
        return Ok(PiecewiseLinearFn {
            xs: vec![x],
            ys: vec![y],
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    upper_concave_envelope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::h2;
    use proptest::prelude::*;

    /// Sup over all two-point mixtures of samples that average to `x`.
    fn mixture_sup(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..xs.len() {
            if xs[i] == x {
                best = best.max(ys[i]);
            }
            for j in i + 1..xs.len() {
                if xs[i] <= x && x <= xs[j] {
                    let t = (x - xs[i]) / (xs[j] - xs[i]);
                    best = best.max((1.0 - t) * ys[i] + t * ys[j]);
                }
            }
        }
        best
    }

    #[test]
    fn concave_samples_are_their_own_envelope() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| h2(x)).collect();
        let env = upper_concave_envelope(&xs, &ys).unwrap();
        assert_eq!(env.breakpoints().len(), xs.len());
        for (&x, &y) in xs.iter().zip(&ys) {
            assert_eq!(env.eval(x).unwrap(), y);
        }
    }

    #[test]
    fn chord_dominates_dip() {
        let xs = [0.0, 0.5, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| (x - 0.5).abs()).collect();
        let env = upper_concave_envelope(&xs, &ys).unwrap();
        for x in [0.0, 0.2, 0.5, 0.77, 1.0] {
            assert!((env.eval(x).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_abscissae() {
        assert!(upper_concave_envelope(&[0.0, 0.0], &[1.0, 2.0]).is_err());
        assert!(upper_concave_envelope(&[0.5, 0.1], &[1.0, 2.0]).is_err());
        assert!(upper_concave_envelope(&[0.5], &[1.0]).is_err());
        assert!(upper_concave_envelope(&[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn eval_outside_support_is_domain_error() {
        let env = upper_concave_envelope(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!(env.eval(1.5).is_err());
        assert!(env.eval(-0.1).is_err());
    }

    #[test]
    fn point_cloud_keeps_highest_duplicate() {
        let env = upper_hull_of_points(&[(0.0, 0.0), (0.5, 0.1), (0.5, 0.4), (1.0, 0.0)]).unwrap();
        assert_eq!(env.eval(0.5).unwrap(), 0.4);
        assert!((env.eval(0.25).unwrap() - 0.2).abs() < 1e-15);
    }

    fn samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
            )
        })
        .prop_filter_map("duplicate abscissae", |(mut xs, ys)| {
            xs.sort_by(f64::total_cmp);
            xs.windows(2).all(|w| w[1] > w[0]).then_some((xs, ys))
        })
    }

    proptest! {
        #[test]
        fn envelope_is_concave_and_dominates((xs, ys) in samples()) {
            let env = upper_concave_envelope(&xs, &ys).unwrap();
            let slopes = env.slopes();
            for w in slopes.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            for (&x, &y) in xs.iter().zip(&ys) {
                prop_assert!(env.eval(x).unwrap() >= y - 1e-12);
            }
        }

        #[test]
        fn envelope_matches_mixture_brute_force((xs, ys) in samples(), t in 0.0f64..1.0) {
            let env = upper_concave_envelope(&xs, &ys).unwrap();
            let x = xs[0] + t * (xs[xs.len() - 1] - xs[0]);
            let brute = mixture_sup(&xs, &ys, x);
            prop_assert!((env.eval(x).unwrap() - brute).abs() < 1e-12);
        }
    }
}
