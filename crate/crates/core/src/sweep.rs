//! Comparative statics: one equilibrium solve per grid value of a parameter.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::model::{ContestParams, RegimeKind, SweepParam};
use crate::solver::solve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub k_star: Option<f64>,
    pub k_star_star: Option<f64>,
    pub regime: Option<RegimeKind>,
    pub error: Option<String>,
}

/// Evenly spaced grid of `n ≥ 2` points from `from` to `to` inclusive (`n = 1` gives `from`).
pub fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn sweep(
    base: &ContestParams,
    param: SweepParam,
    from: f64,
    to: f64,
    n: usize,
) -> Result<Vec<SweepRow>> {
    if n == 0 {
        return Err(ContestError::invalid("n", "must be at least 1"));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(ContestError::invalid("from", "range must be finite"));
    }
    Ok(linspace(from, to, n)
        .into_iter()
        .map(|value| match solve(&base.with(param, value)) {
            Ok(sol) => SweepRow {
                value,
                k_star: Some(sol.k_star),
                k_star_star: sol.k_star_star,
                regime: Some(sol.regime.kind),
                error: None,
            },
            Err(e) => SweepRow {
                value,
                k_star: None,
                k_star_star: None,
                regime: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.11e}")).unwrap_or_default()
}

/// CSV with columns value,k_star,k_star_star,regime,error.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,k_star,k_star_star,regime,error\n");
    for r in rows {
        let err = r
            .error
            .as_deref()
            .map(|e| format!("\"{}\"", e.replace('"', "\"\"")))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:.11e},{},{},{},{}",
            r.value,
            num(r.k_star),
            num(r.k_star_star),
            r.regime.map(|k| k.as_str()).unwrap_or(""),
            err
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(pi: f64) -> ContestParams {
        ContestParams::baseline(0.05, 1.0, 10.0, 0.2, pi, 0.5).unwrap()
    }

    fn k_stars(rows: &[SweepRow]) -> Vec<f64> {
        rows.iter().map(|r| r.k_star.unwrap()).collect()
    }

    #[test]
    fn prize_sweep_is_increasing() {
        let rows = sweep(&base(-0.1), SweepParam::Prize, 6.0, 40.0, 30).unwrap();
        assert!(k_stars(&rows).windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn lambda_sweep_is_single_peaked() {
        let rows = sweep(&base(-0.1), SweepParam::Lambda, 0.11, 5.0, 50).unwrap();
        let k = k_stars(&rows);
        let peaks = (1..k.len() - 1).filter(|&i| k[i] > k[i - 1] && k[i] > k[i + 1]).count();
        assert_eq!(peaks, 1, "{k:?}");
    }

    #[test]
    fn sigma_sweep_vanishes() {
        let rows = sweep(&base(-0.1), SweepParam::Sigma, 0.5, 0.005, 20).unwrap();
        let k = k_stars(&rows);
        assert!(k.windows(2).all(|w| w[1] < w[0]));
        assert!(*k.last().unwrap() < 1e-3);
    }

    #[test]
    fn invalid_points_become_error_rows() {
        let rows = sweep(&base(0.0), SweepParam::Cost, 1.0, 20.0, 3).unwrap();
        assert!(rows[0].error.is_none());
        assert!(rows[2].error.as_deref().unwrap().contains("not profitable"));
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(sweep(&base(0.0), SweepParam::Cost, 1.0, 2.0, 0).is_err());
    }
}
