//! Free-boundary solves for the symmetric well-behaved equilibrium in each
//! return regime.
//!
//! Every solve ends the same way: the region layout for the candidate k*
//! is fitted by value matching at both ends and C⁰/C¹ stitching inside, and
//! the remaining smooth-pasting condition V′(−k*) = 0 pins k*. For Low and
//! High the pasting condition is available as a scalar first-order condition
//! which is solved directly; Medium solves the pasting residual itself.

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::model::{classify, ContestParams, Regime, RegimeKind};
use crate::numeric::{bracketed_root, expand_bracket, ROOT_TOL};
use crate::valuefn::{char_roots, CharRoots, PiecewiseValueFunction, RegionSpec, Side};

/// Exponents beyond this overflow an f64.
const EXP_LIMIT: f64 = 700.0;
const BRACKET_START: f64 = 1e-6;

/// A half-line or bounded interval of Δk. `upper = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Interval {
    /// Membership for the half-open interval `(lower, upper)`, with the
    /// lower end included when `closed_lower` is set.
    fn contains(&self, dk: f64, closed_lower: bool) -> bool {
        let above = if closed_lower { dk >= self.lower } else { dk > self.lower };
        above && self.upper.is_none_or(|u| dk < u)
    }
}

/// Stopping rule plus action rule of one agent, as functions of its own gap Δk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    /// Drop out once Δk ≤ −stop_at.
    pub stop_at: f64,
    /// Gaps at which the risky move is taken.
    pub risky_regions: Vec<Interval>,
}

impl Strategy {
    pub fn for_regime(kind: RegimeKind, k_star: f64, k_star_star: Option<f64>) -> Strategy {
        let follower = Interval {
            lower: -k_star,
            upper: Some(0.0),
        };
        let risky_regions = match kind {
            RegimeKind::Low => vec![follower],
            RegimeKind::High => vec![Interval {
                lower: -k_star,
                upper: None,
            }],
            RegimeKind::Medium => vec![
                follower,
                Interval {
                    lower: k_star_star.unwrap_or(0.0),
                    upper: None,
                },
            ],
        };
        Strategy {
            stop_at: k_star,
            risky_regions,
        }
    }

    pub fn drops_out(&self, dk: f64) -> bool {
        dk <= -self.stop_at
    }

    /// Risky action at `dk`. Leader-side intervals include their lower end
    /// (the switching point is indifferent and resolved towards risky).
    pub fn is_risky(&self, dk: f64) -> bool {
        self.risky_regions
            .iter()
            .any(|iv| iv.contains(dk, iv.lower >= 0.0))
    }

    /// Like [`Strategy::is_risky`], but an exact tie counts as following.
    /// Both agents then play their follower action, so a symmetric start
    /// cannot freeze with both agents safe.
    pub fn is_risky_tie_follows(&self, dk: f64) -> bool {
        self.is_risky(if dk == 0.0 { -f64::MIN_POSITIVE } else { dk })
    }
}

/// Diagnostics of a solve, all in the natural units of V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Scaled first-order condition at k* (Low/High); the pasting residual for Medium.
    pub foc: f64,
    /// |V′(−k*)|
    pub smooth_pasting: f64,
    /// |V(−k*)|
    pub value_matching_follower: f64,
    /// |V(k*) − sure-win value|
    pub value_matching_leader: f64,
    pub continuity_c0: f64,
    pub continuity_c1: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [
            self.foc,
            self.smooth_pasting,
            self.value_matching_follower,
            self.value_matching_leader,
            self.continuity_c0,
            self.continuity_c1,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub regime: Regime,
    pub k_star: f64,
    /// Leader switching point, Medium only.
    pub k_star_star: Option<f64>,
    pub roots: CharRoots,
    pub value: PiecewiseValueFunction,
    pub strategy: Strategy,
    pub residuals: Residuals,
}

impl EquilibriumSolution {
    /// V(Δk) on the closed domain, using the one-sided limits at ±k*.
    pub fn value_at(&self, dk: f64) -> Result<f64> {
        if dk == -self.k_star {
            Ok(self.value.boundary_limit(Side::Lower, 0))
        } else if dk == self.k_star {
            Ok(self.value.boundary_limit(Side::Upper, 0))
        } else {
            self.value.eval(dk, 0)
        }
    }
}

pub fn solve(params: &ContestParams) -> Result<EquilibriumSolution> {
    let regime = classify(params)?;
    match regime.kind {
        RegimeKind::Low => solve_low(params),
        RegimeKind::Medium => solve_medium(params),
        RegimeKind::High => solve_high(params),
    }
}

fn require(regime: &Regime, expected: RegimeKind) -> Result<()> {
    if regime.kind != expected {
        return Err(ContestError::WrongRegime {
            expected: expected.as_str(),
            actual: regime.kind.as_str(),
        });
    }
    Ok(())
}

fn overflow_cap(roots: &CharRoots) -> f64 {
    EXP_LIMIT / roots.max_rate()
}

fn find_root<F: Fn(f64) -> f64>(f: F, roots: &CharRoots) -> Result<f64> {
    let (lo, hi) = expand_bracket(&f, BRACKET_START, overflow_cap(roots))?;
    bracketed_root(f, lo, hi, ROOT_TOL)
}

/// Symmetric Low-regime first-order condition scaled by e^{−2ξ₊k}:
/// (ξ₊+ξ₋)²e^{(ξ₊+ξ₋)k} − 2ξ₊ξ₋(e^{2ξ₊k}+e^{2ξ₋k}) − φ(ξ₊−ξ₋)(ξ₊e^{ξ₊k} − ξ₋e^{ξ₋k}).
pub fn low_foc_scaled(roots: &CharRoots, phi: f64, k: f64) -> f64 {
    let (p, m) = (roots.xi_plus, roots.xi_minus);
    let d = (m - p) * k;
    (p + m).powi(2) * d.exp() - 2.0 * p * m * (1.0 + (2.0 * d).exp())
        - phi * (p - m) * (p * (-p * k).exp() - m * ((m - 2.0 * p) * k).exp())
}

/// Asymmetric best-response condition for agent i against k_j, scaled by
/// e^{−ξ₊(k_i+k_j)}. Reduces to [`low_foc_scaled`] when k_i = k_j.
pub fn best_response_foc_scaled(roots: &CharRoots, phi: f64, k_i: f64, k_j: f64) -> f64 {
    let (p, m) = (roots.xi_plus, roots.xi_minus);
    (p + m) * (p * ((m - p) * k_i).exp() + m * ((m - p) * k_j).exp())
        - 2.0 * p * m * (1.0 + ((m - p) * (k_i + k_j)).exp())
        - phi * (p - m) * (p * (-p * k_i).exp() - m * (m * k_j - p * k_i - p * k_j).exp())
}

/// High-regime condition cosh(2ηk) = φ·cosh(ηk), scaled by 2e^{−2ηk}.
pub fn high_foc_scaled(eta: f64, phi: f64, k: f64) -> f64 {
    1.0 + (-4.0 * eta * k).exp() - phi * ((-eta * k).exp() + (-3.0 * eta * k).exp())
}

/// Closed-form High-regime boundary.
pub fn high_k_star_closed_form(eta: f64, phi: f64) -> f64 {
    let s = (phi * phi + 8.0).sqrt() + phi;
    let radicand = (2.0 * phi * s - 8.0).max(0.0);
    ((s + radicand.sqrt()) / 4.0).ln() / eta
}

/// High-regime boundary as a bracketed root of the scaled condition.
pub fn high_k_star_numeric(eta: f64, phi: f64) -> Result<f64> {
    let f = |k| high_foc_scaled(eta, phi, k);
    let (lo, hi) = expand_bracket(&f, BRACKET_START / eta, EXP_LIMIT / eta)?;
    bracketed_root(f, lo, hi, ROOT_TOL)
}

/// k* − k** in the Medium regime: (1/2η)·log((1+q)/(1−q)), q = 2π/(ησ²).
pub fn medium_gap(params: &ContestParams, roots: &CharRoots) -> Result<f64> {
    let q = 2.0 * params.pi / (roots.eta * params.sigma * params.sigma);
    if !(q > 0.0 && q < 1.0) {
        return Err(ContestError::Domain(format!(
            "switching gap needs 0 < 2π/(ησ²) < 1, got {q}"
        )));
    }
    Ok(q.atanh() / roots.eta)
}

fn low_specs(params: &ContestParams, roots: &CharRoots, k: f64) -> Vec<RegionSpec> {
    vec![
        RegionSpec {
            lower: -k,
            upper: 0.0,
            constant: params.follower_constant(),
            rates: [roots.xi_plus, roots.xi_minus],
        },
        RegionSpec {
            lower: 0.0,
            upper: k,
            constant: params.leader_constant(),
            rates: [-roots.xi_plus, -roots.xi_minus],
        },
    ]
}

fn high_specs(params: &ContestParams, roots: &CharRoots, k: f64) -> Vec<RegionSpec> {
    let rates = [roots.eta, -roots.eta];
    vec![
        RegionSpec {
            lower: -k,
            upper: 0.0,
            constant: params.follower_constant(),
            rates,
        },
        RegionSpec {
            lower: 0.0,
            upper: k,
            constant: params.leader_constant(),
            rates,
        },
    ]
}

fn medium_specs(params: &ContestParams, roots: &CharRoots, k: f64, kss: f64) -> Vec<RegionSpec> {
    let both = [roots.eta, -roots.eta];
    vec![
        RegionSpec {
            lower: -k,
            upper: -kss,
            constant: params.follower_constant(),
            rates: both,
        },
        RegionSpec {
            lower: -kss,
            upper: 0.0,
            constant: params.follower_constant(),
            rates: [roots.xi_plus, roots.xi_minus],
        },
        RegionSpec {
            lower: 0.0,
            upper: kss,
            constant: params.leader_constant(),
            rates: [-roots.xi_plus, -roots.xi_minus],
        },
        RegionSpec {
            lower: kss,
            upper: k,
            constant: params.leader_constant(),
            rates: both,
        },
    ]
}

fn fit(params: &ContestParams, specs: &[RegionSpec]) -> Result<PiecewiseValueFunction> {
    PiecewiseValueFunction::fit(specs, 0.0, params.leader_constant())
}

fn finish(
    params: &ContestParams,
    regime: Regime,
    roots: CharRoots,
    k_star: f64,
    k_star_star: Option<f64>,
    value: PiecewiseValueFunction,
    foc: f64,
) -> EquilibriumSolution {
    let (c0, c1) = value.continuity_jumps();
    let residuals = Residuals {
        foc: foc.abs(),
        smooth_pasting: value.boundary_limit(Side::Lower, 1).abs(),
        value_matching_follower: value.boundary_limit(Side::Lower, 0).abs(),
        value_matching_leader: (value.boundary_limit(Side::Upper, 0) - params.leader_constant())
            .abs(),
        continuity_c0: c0,
        continuity_c1: c1,
    };
    EquilibriumSolution {
        strategy: Strategy::for_regime(regime.kind, k_star, k_star_star),
        regime,
        k_star,
        k_star_star,
        roots,
        value,
        residuals,
    }
}

pub fn solve_low(params: &ContestParams) -> Result<EquilibriumSolution> {
    let regime = classify(params)?;
    require(&regime, RegimeKind::Low)?;
    let roots = char_roots(params)?;
    let k = find_root(|k| low_foc_scaled(&roots, regime.phi, k), &roots)?;
    let value = fit(params, &low_specs(params, &roots, k))?;
    let foc = low_foc_scaled(&roots, regime.phi, k);
    Ok(finish(params, regime, roots, k, None, value, foc))
}

pub fn solve_high(params: &ContestParams) -> Result<EquilibriumSolution> {
    let regime = classify(params)?;
    require(&regime, RegimeKind::High)?;
    let roots = char_roots(params)?;
    let k = high_k_star_closed_form(roots.eta, regime.phi);
    if !(k > 0.0 && k.is_finite()) {
        return Err(ContestError::NoConvergence(format!(
            "closed-form boundary {k} is not positive"
        )));
    }
    let value = fit(params, &high_specs(params, &roots, k))?;
    let foc = high_foc_scaled(roots.eta, regime.phi, k);
    Ok(finish(params, regime, roots, k, None, value, foc))
}

pub fn solve_medium(params: &ContestParams) -> Result<EquilibriumSolution> {
    let regime = classify(params)?;
    require(&regime, RegimeKind::Medium)?;
    let roots = char_roots(params)?;
    let gap = medium_gap(params, &roots)?;
    // Unknown is the switching point s = k**; k* = s + gap.
    let pasting = |s: f64| -> f64 {
        match fit(params, &medium_specs(params, &roots, s + gap, s)) {
            Ok(v) => v.boundary_limit(Side::Lower, 1),
            Err(_) => f64::NAN,
        }
    };
    let cap = overflow_cap(&roots);
    let far = pasting(cap.min(1.0).max(BRACKET_START));
    let near = pasting(BRACKET_START);
    let s = if near.signum() != far.signum() {
        let (lo, hi) = expand_bracket(&pasting, BRACKET_START, cap)?;
        bracketed_root(pasting, lo, hi, ROOT_TOL)?
    } else {
        // Root below the default bracket start: scan towards zero.
        let mut hi = BRACKET_START;
        let mut found = None;
        while hi > 1e-15 {
            let lo = hi / 10.0;
            let f_lo = pasting(lo);
            if f_lo.signum() != near.signum() {
                found = Some(bracketed_root(pasting, lo, hi, ROOT_TOL * 1e-3)?);
                break;
            }
            hi = lo;
        }
        match found {
            Some(s) => s,
            None => {
                // Either the root lies above the start with a double crossing
                // (impossible under uniqueness) or k** collapses to zero.
                match expand_bracket(&pasting, BRACKET_START, cap) {
                    Ok((lo, hi)) => bracketed_root(pasting, lo, hi, ROOT_TOL)?,
                    Err(_) => return Err(ContestError::DegenerateRegime { k_star_star: 0.0 }),
                }
            }
        }
    };
    if s <= 0.0 {
        return Err(ContestError::DegenerateRegime { k_star_star: s });
    }
    let k = s + gap;
    let value = fit(params, &medium_specs(params, &roots, k, s))?;
    let foc = value.boundary_limit(Side::Lower, 1);
    Ok(finish(params, regime, roots, k, Some(s), value, foc))
}

/// Value function of the regime's layout for an arbitrary candidate
/// boundary `k` (value matching and stitching only, no pasting). Medium
/// places the switching point at `k` minus the closed-form gap.
pub fn value_for_boundary(params: &ContestParams, kind: RegimeKind, k: f64) -> Result<PiecewiseValueFunction> {
    let roots = char_roots(params)?;
    match kind {
        RegimeKind::Low => fit(params, &low_specs(params, &roots, k)),
        RegimeKind::High => fit(params, &high_specs(params, &roots, k)),
        RegimeKind::Medium => {
            let gap = medium_gap(params, &roots)?;
            if k <= gap {
                return Err(ContestError::DegenerateRegime { k_star_star: k - gap });
            }
            fit(params, &medium_specs(params, &roots, k, k - gap))
        }
    }
}

/// Best response k*_i to an opponent boundary k*_j (Low regime).
pub fn best_response_kstar(params: &ContestParams, k_star_opponent: f64) -> Result<f64> {
    let regime = classify(params)?;
    require(&regime, RegimeKind::Low)?;
    if !(k_star_opponent > 0.0 && k_star_opponent.is_finite()) {
        return Err(ContestError::Domain(format!(
            "opponent boundary must be positive, got {k_star_opponent}"
        )));
    }
    let roots = char_roots(params)?;
    find_root(
        |k| best_response_foc_scaled(&roots, regime.phi, k, k_star_opponent),
        &roots,
    )
}
