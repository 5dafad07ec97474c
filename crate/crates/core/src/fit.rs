use crate::error::{Error, Result};

/// Ordinary least-squares line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn line_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r2,
        residual: (sse / n).sqrt(),
    }
}

/// Fit of `log y` against `log x`; `None` if any value is not positive.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() < 2 || xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    Some(line_fit(&lx, &ly))
}

/// Power-law fit `value ~ C eps^slope` over a dyadic sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Set when the values vanish (or are not positive); slope is then NaN.
    pub degenerate: bool,
}

impl ScalingFit {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_floor(points, 0.0)
    }

    /// Values at or below `floor` count as zero.
    pub fn with_floor(points: Vec<(f64, f64)>, floor: f64) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::OutOfRange(format!(
                "scaling fit needs >= 4 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            let ratio = w[0].0 / w[1].0;
            if (ratio - 2.0).abs() > 1e-9 {
                return Err(Error::OutOfRange(format!(
                    "sweep parameters must halve at each step: {} -> {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let vanishing = ys.iter().any(|v| !(v.is_finite() && *v > floor));
        match (vanishing, loglog_fit(&xs, &ys)) {
            (false, Some(f)) => Ok(ScalingFit {
                points,
                slope: f.slope,
                intercept: f.intercept,
                r2: f.r2,
                degenerate: false,
            }),
            _ => Ok(ScalingFit {
                points,
                slope: f64::NAN,
                intercept: f64::NAN,
                r2: f64::NAN,
                degenerate: true,
            }),
        }
    }

    /// One-sided check `slope >= bound`; degenerate fits fail.
    pub fn at_least(&self, bound: f64) -> bool {
        !self.degenerate && self.slope >= bound
    }
}

/// `start, start/2, ...` with `n` entries.
pub fn dyadic(start: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start / 2f64.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let pts: Vec<(f64, f64)> = dyadic(0.4, 5)
            .into_iter()
            .map(|e| (e, 3.0 * e.powf(1.7)))
            .collect();
        let f = ScalingFit::new(pts).unwrap();
        assert!((f.slope - 1.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.at_least(1.69));
    }

    #[test]
    fn validates_sweep() {
        assert!(ScalingFit::new(vec![(0.4, 1.0), (0.2, 1.0), (0.1, 1.0)]).is_err());
        assert!(ScalingFit::new(vec![(0.4, 1.0), (0.2, 1.0), (0.1, 1.0), (0.04, 1.0)]).is_err());
    }

    #[test]
    fn flags_vanishing_values() {
        let f = ScalingFit::new(dyadic(0.4, 4).into_iter().map(|e| (e, 0.0)).collect()).unwrap();
        assert!(f.degenerate && !f.at_least(-100.0));
        let g = ScalingFit::with_floor(
            dyadic(0.4, 4).into_iter().map(|e| (e, 1e-18)).collect(),
            1e-15,
        )
        .unwrap();
        assert!(g.degenerate);
    }
}
