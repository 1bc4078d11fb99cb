//! Model primitives: contest parameters, profitability and the
//! low/medium/high return classification of the risky move.
//!
//! The baseline contest is recovered with `hazard_follow = 0` and
//! `prize_lose = 0`; every formula below is written for the extended model
//! (follower hazard λ̲, loser prize P̲) and reduces to the baseline exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};

/// All primitives of the two-player contest.
///
/// Deserialization validates the structural invariants and requires a finite
/// profitability strictly above one. Design code that needs the infinite
/// continuation case builds the struct directly and calls
/// [`ContestParams::validate_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ContestParams {
    /// Discount rate.
    pub r: f64,
    /// Flow cost of effort.
    pub c: f64,
    /// Winner prize P̄ (baseline P).
    pub prize_win: f64,
    /// Loser prize P̲ (baseline 0).
    pub prize_lose: f64,
    /// Leader success rate λ̄ (baseline λ).
    pub hazard_lead: f64,
    /// Follower success rate λ̲ (baseline 0).
    pub hazard_follow: f64,
    /// Drift bonus of the risky move.
    pub pi: f64,
    /// Volatility of the risky move.
    pub sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    r: f64,
    c: f64,
    prize_win: f64,
    #[serde(default)]
    prize_lose: f64,
    hazard_lead: f64,
    #[serde(default)]
    hazard_follow: f64,
    pi: f64,
    sigma: f64,
}

impl TryFrom<RawParams> for ContestParams {
    type Error = ContestError;

    fn try_from(raw: RawParams) -> Result<Self> {
        ContestParams::new(
            raw.r,
            raw.c,
            raw.prize_win,
            raw.prize_lose,
            raw.hazard_lead,
            raw.hazard_follow,
            raw.pi,
            raw.sigma,
        )
    }
}

impl ContestParams {
    /// Builds and fully validates an extended-model parameter set.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        c: f64,
        prize_win: f64,
        prize_lose: f64,
        hazard_lead: f64,
        hazard_follow: f64,
        pi: f64,
        sigma: f64,
    ) -> Result<Self> {
        let params = ContestParams {
            r,
            c,
            prize_win,
            prize_lose,
            hazard_lead,
            hazard_follow,
            pi,
            sigma,
        };
        params.validate()?;
        Ok(params)
    }

    /// Baseline contest: winner takes `prize`, the follower never succeeds.
    pub fn baseline(r: f64, c: f64, prize: f64, hazard: f64, pi: f64, sigma: f64) -> Result<Self> {
        Self::new(r, c, prize, 0.0, hazard, 0.0, pi, sigma)
    }

    /// Checks sign and ordering constraints only.
    pub fn validate_structure(&self) -> Result<()> {
        let fields = [
            ("r", self.r),
            ("c", self.c),
            ("prize_win", self.prize_win),
            ("prize_lose", self.prize_lose),
            ("hazard_lead", self.hazard_lead),
            ("hazard_follow", self.hazard_follow),
            ("pi", self.pi),
            ("sigma", self.sigma),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ContestError::invalid(name, "must be finite"));
            }
        }
        if self.r <= 0.0 {
            return Err(ContestError::invalid("r", "must be positive"));
        }
        if self.c <= 0.0 {
            return Err(ContestError::invalid("c", "must be positive"));
        }
        if self.sigma <= 0.0 {
            return Err(ContestError::invalid("sigma", "must be positive"));
        }
        if self.prize_lose < 0.0 {
            return Err(ContestError::invalid("prize_lose", "must be non-negative"));
        }
        if self.prize_win < self.prize_lose {
            return Err(ContestError::invalid(
                "prize_win",
                "must be at least prize_lose",
            ));
        }
        if self.hazard_follow < 0.0 {
            return Err(ContestError::invalid("hazard_follow", "must be non-negative"));
        }
        if self.hazard_lead <= self.hazard_follow {
            return Err(ContestError::invalid(
                "hazard_lead",
                "must be strictly greater than hazard_follow",
            ));
        }
        Ok(())
    }

    /// Structural checks plus the effective-profit condition 1 < φ̄ < ∞.
    pub fn validate(&self) -> Result<f64> {
        self.validate_structure()?;
        let phi = profitability(self)?;
        if phi <= 1.0 {
            return Err(ContestError::NotProfitable { phi });
        }
        Ok(phi)
    }

    /// Total hazard λ̄ + λ̲ while both agents are in the contest.
    pub fn hazard_total(&self) -> f64 {
        self.hazard_lead + self.hazard_follow
    }

    /// Constant part of the value function on the leader side,
    /// (λ̄P̄ + λ̲P̲ − c)/(r + λ̄ + λ̲). This is also the sure-win value used for
    /// value matching at the opponent's dropout boundary.
    pub fn leader_constant(&self) -> f64 {
        (self.hazard_lead * self.prize_win + self.hazard_follow * self.prize_lose - self.c)
            / (self.r + self.hazard_total())
    }

    /// Constant part on the follower side, (λ̲P̄ + λ̄P̲ − c)/(r + λ̄ + λ̲).
    pub fn follower_constant(&self) -> f64 {
        (self.hazard_follow * self.prize_win + self.hazard_lead * self.prize_lose - self.c)
            / (self.r + self.hazard_total())
    }

    /// Expected flow of prize money per unit time for the agent in the given role.
    pub(crate) fn prize_flow(&self, leading: bool) -> f64 {
        if leading {
            self.hazard_lead * self.prize_win + self.hazard_follow * self.prize_lose
        } else {
            self.hazard_follow * self.prize_win + self.hazard_lead * self.prize_lose
        }
    }

    /// Returns a copy with one named parameter replaced (used by sweeps).
    pub fn with(&self, param: SweepParam, value: f64) -> ContestParams {
        let mut p = *self;
        match param {
            SweepParam::Prize => p.prize_win = value,
            SweepParam::Cost => p.c = value,
            SweepParam::Pi => p.pi = value,
            SweepParam::Sigma => p.sigma = value,
            SweepParam::Lambda => p.hazard_lead = value,
        }
        p
    }
}

/// Parameters a comparative-statics sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "P")]
    Prize,
    #[serde(rename = "c")]
    Cost,
    #[serde(rename = "pi")]
    Pi,
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "lambda")]
    Lambda,
}

impl std::str::FromStr for SweepParam {
    type Err = ContestError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" => Ok(SweepParam::Prize),
            "c" => Ok(SweepParam::Cost),
            "pi" => Ok(SweepParam::Pi),
            "sigma" => Ok(SweepParam::Sigma),
            "lambda" => Ok(SweepParam::Lambda),
            other => Err(ContestError::invalid(
                "vary",
                format!("unknown parameter `{other}`, expected one of P, c, pi, sigma, lambda"),
            )),
        }
    }
}

/// Generalized profitability φ̄ = (λ̄−λ̲)(P̄−P̲) / (c − (λ̲P̄ + λ̄P̲)).
///
/// A non-positive denominator means both agents would stay forever; that is
/// reported as [`ContestError::InfiniteProfitability`] rather than a float
/// infinity.
pub fn profitability(params: &ContestParams) -> Result<f64> {
    let denominator = params.c
        - (params.hazard_follow * params.prize_win + params.hazard_lead * params.prize_lose);
    if denominator <= 0.0 {
        return Err(ContestError::InfiniteProfitability { denominator });
    }
    Ok((params.hazard_lead - params.hazard_follow) * (params.prize_win - params.prize_lose)
        / denominator)
}

/// The threshold shape function f(φ), rising from 0 at φ = 1 towards 1.
pub fn f_of_phi(phi: f64) -> Result<f64> {
    if !(phi >= 1.0) {
        return Err(ContestError::Domain(format!(
            "f(φ) requires φ ≥ 1, got {phi}"
        )));
    }
    if phi.is_infinite() {
        return Ok(1.0);
    }
    let s = (phi * phi + 8.0).sqrt() + phi;
    let radicand = (2.0 * phi * s - 8.0).max(0.0);
    Ok(radicand.sqrt() / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Low,
    Medium,
    High,
}

impl RegimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeKind::Low => "low",
            RegimeKind::Medium => "medium",
            RegimeKind::High => "high",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Return classification of the risky move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// (√(r+λ̄+λ̲)/2)·f(φ̄)
    pub threshold: f64,
    /// π/σ
    pub ratio: f64,
    /// φ̄ used for the threshold.
    pub phi: f64,
}

/// Classifies the risky move as low, medium or high return.
///
/// A ratio exactly at the threshold classifies as high.
pub fn classify(params: &ContestParams) -> Result<Regime> {
    let phi = params.validate()?;
    let threshold = (params.r + params.hazard_total()).sqrt() / 2.0 * f_of_phi(phi)?;
    let ratio = params.pi / params.sigma;
    let kind = if params.pi <= 0.0 {
        RegimeKind::Low
    } else if ratio >= threshold {
        RegimeKind::High
    } else {
        RegimeKind::Medium
    };
    Ok(Regime {
        kind,
        threshold,
        ratio,
        phi,
    })
}
