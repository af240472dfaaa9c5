use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Minimum expected count per cell after pooling.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit. Adjacent cells are pooled until every expected
/// count reaches 5; the p-value is the regularized upper incomplete gamma
/// `Q(dof / 2, statistic / 2)`.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected_probs.len() || observed.is_empty() {
        return Err(Error::Degenerate(
            "observed and expected must be nonempty and of equal length".into(),
        ));
    }
    if expected_probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Degenerate(
            "expected probabilities must be nonnegative".into(),
        ));
    }
    let total_prob: f64 = expected_probs.iter().sum();
    if (total_prob - 1.0).abs() > 1e-9 {
        return Err(Error::Degenerate(format!(
            "expected probabilities sum to {total_prob}"
        )));
    }
    for (o, p) in observed.iter().zip(expected_probs) {
        if *p == 0.0 && *o > 0 {
            return Err(Error::Degenerate(
                "observation in a cell with zero expected probability".into(),
            ));
        }
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::Degenerate("no observations".into()));
    }
    let n = n as f64;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (o, p) in observed.iter().zip(expected_probs) {
        obs += *o as f64;
        exp += p * n;
        if exp >= MIN_EXPECTED {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => cells.push((obs, exp)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate(
            "fewer than two cells after pooling".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let p_value = if statistic <= 0.0 {
        1.0
    } else {
        gamma_ur(dof as f64 / 2.0, statistic / 2.0)
    };
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}
