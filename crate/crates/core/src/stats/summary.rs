use serde::Serialize;

/// Count, mean, unbiased variance, range, and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub std_err: f64,
}

impl SummaryStats {
    /// Welford accumulation. An empty sample gives NaN moments.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (i, &x) in samples.iter().enumerate() {
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
            min = min.min(x);
            max = max.max(x);
        }
        let count = samples.len();
        let (mean, variance) = match count {
            0 => (f64::NAN, f64::NAN),
            1 => (mean, 0.0),
            _ => (mean, (m2 / (count - 1) as f64).max(0.0)),
        };
        Self {
            count,
            mean,
            variance,
            min,
            max,
            std_err: (variance / count as f64).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_moments() {
        let s = SummaryStats::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.count, 4);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert!((s.std_err - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let one = SummaryStats::from_samples(&[7.0]);
        assert_eq!((one.mean, one.variance), (7.0, 0.0));
    }
}
