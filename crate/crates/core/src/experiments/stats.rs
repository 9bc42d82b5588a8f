use crate::error::{AuctionError, Result};

/// Normal-approximation 95% quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    /// Half-width of the 95% confidence interval of the mean.
    pub ci95: f64,
}

pub fn aggregate(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(AuctionError::Domain("cannot aggregate an empty record set".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        n,
        mean,
        std,
        ci95: Z_95 * std / (n as f64).sqrt(),
    })
}

/// `100 (value - baseline) / baseline`.
pub fn improvement_pct(value: f64, baseline: f64) -> f64 {
    100.0 * (value - baseline) / baseline
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            out[k] = rank;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of the tie-averaged
/// ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(AuctionError::Domain(format!(
            "spearman needs two equal series of length >= 2, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (xs.len() + 1) as f64 / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean).powi(2);
        syy += (b - mean).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_constant_records() {
        let s = aggregate(&[3.5]).unwrap();
        assert_eq!((s.n, s.mean, s.std, s.ci95), (1, 3.5, 0.0, 0.0));
        let c = aggregate(&[2.0; 7]).unwrap();
        assert_eq!((c.mean, c.std, c.ci95), (2.0, 0.0, 0.0));
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn hand_computed_summary() {
        // mean 5, squared deviations sum to 32, sample variance 32 / 7
        let s = aggregate(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!((s.ci95 - 1.959_963_984_540_054 * s.std / 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn improvement() {
        assert!((improvement_pct(2.27, 1.0) - 127.0).abs() < 1e-12);
        assert_eq!(improvement_pct(1.0, 1.0), 0.0);
    }

    #[test]
    fn spearman_cases() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&x, &[1.0, 4.0, 9.0, 16.0, 25.0]).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[5.0, 3.0, 2.0, 1.0, 0.0]).unwrap(), -1.0);
        // ranks of y with a tie: 1, 2.5, 2.5, 4
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert!((r - 4.5 / (5.0f64 * 4.5).sqrt()).abs() < 1e-12);
        assert_eq!(spearman(&x, &[1.0; 5]).unwrap(), 0.0);
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }
}
