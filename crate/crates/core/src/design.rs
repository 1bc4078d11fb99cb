//! Prize allocation under a budget, and the designer objectives that the
//! allocation drives (dropout boundary, follower time, time to success).

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::model::{ContestParams, RegimeKind};
use crate::sim::{expected_times, simulate_equilibrium, SimConfig};
use crate::solver::solve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignProblem {
    pub budget: f64,
    pub hazard_lead: f64,
    #[serde(default)]
    pub hazard_follow: f64,
    pub cost: f64,
    pub r: f64,
    pub pi: f64,
    pub sigma: f64,
    /// Initial gap at which objectives are evaluated.
    #[serde(default)]
    pub k0: f64,
}

impl DesignProblem {
    /// Contest parameters under a given prize pair (not validated).
    pub fn params_for(&self, prize_win: f64, prize_lose: f64) -> ContestParams {
        ContestParams {
            r: self.r,
            c: self.cost,
            prize_win,
            prize_lose,
            hazard_lead: self.hazard_lead,
            hazard_follow: self.hazard_follow,
            pi: self.pi,
            sigma: self.sigma,
        }
    }

    fn check(&self) -> Result<()> {
        self.params_for(self.budget, 0.0).validate_structure()?;
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(ContestError::invalid("budget", "must be positive"));
        }
        if !self.k0.is_finite() {
            return Err(ContestError::invalid("k0", "must be finite"));
        }
        let (hi, lo) = (self.hazard_lead * self.budget, self.hazard_follow * self.budget);
        if !(hi > self.cost && self.cost > lo) {
            return Err(ContestError::AssumptionViolated(format!(
                "need λ̄B > c > λ̲B, got λ̄B = {hi}, c = {}, λ̲B = {lo}",
                self.cost
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignCase {
    WinnerTakesAll,
    NearEqualSplit,
}

/// φ̄ of an allocation; a non-positive denominator means nobody ever drops out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiBar {
    Finite { value: f64 },
    InfiniteContinuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrizeAllocation {
    pub prize_win: f64,
    pub prize_lose: f64,
    pub case: DesignCase,
    /// Chosen split ε and the admissible open interval (0, ε_max).
    pub epsilon: Option<f64>,
    pub epsilon_interval: Option<(f64, f64)>,
    pub phi_bar: PhiBar,
}

impl PrizeAllocation {
    /// An arbitrary feasible pair, classified by its φ̄.
    pub fn custom(prob: &DesignProblem, prize_win: f64, prize_lose: f64) -> Result<PrizeAllocation> {
        if !(prize_win >= prize_lose && prize_lose >= 0.0) {
            return Err(ContestError::invalid("prize_win", "need prize_win ≥ prize_lose ≥ 0"));
        }
        if prize_win + prize_lose > prob.budget * (1.0 + 1e-12) {
            return Err(ContestError::invalid("prize_win", "prizes exceed the budget"));
        }
        Ok(PrizeAllocation {
            prize_win,
            prize_lose,
            case: if prize_lose == 0.0 && prize_win == prob.budget {
                DesignCase::WinnerTakesAll
            } else {
                DesignCase::NearEqualSplit
            },
            epsilon: None,
            epsilon_interval: None,
            phi_bar: phi_bar(prob, prize_win, prize_lose),
        })
    }
}

fn phi_bar(prob: &DesignProblem, prize_win: f64, prize_lose: f64) -> PhiBar {
    let denominator =
        prob.cost - (prob.hazard_follow * prize_win + prob.hazard_lead * prize_lose);
    if denominator <= 0.0 {
        PhiBar::InfiniteContinuation
    } else {
        PhiBar::Finite {
            value: (prob.hazard_lead - prob.hazard_follow) * (prize_win - prize_lose) / denominator,
        }
    }
}

/// Optimal prizes: winner-takes-all when (λ̄+λ̲)B/2 < c, otherwise a
/// near-equal split B/2 ± ε that keeps both agents in forever.
pub fn optimize_prizes(prob: &DesignProblem) -> Result<PrizeAllocation> {
    prob.check()?;
    let b = prob.budget;
    let mid = prob.hazard_lead.mul_add(b, prob.hazard_follow * b) / 2.0;
    if (mid - prob.cost).abs() <= 1e-12 * prob.cost.max(mid) {
        return Err(ContestError::KnifeEdge);
    }
    if mid < prob.cost {
        return Ok(PrizeAllocation {
            prize_win: b,
            prize_lose: 0.0,
            case: DesignCase::WinnerTakesAll,
            epsilon: None,
            epsilon_interval: None,
            phi_bar: phi_bar(prob, b, 0.0),
        });
    }
    let eps_max = (mid - prob.cost) / (prob.hazard_lead - prob.hazard_follow);
    let eps = eps_max / 2.0;
    Ok(PrizeAllocation {
        prize_win: b / 2.0 + eps,
        prize_lose: b / 2.0 - eps,
        case: DesignCase::NearEqualSplit,
        epsilon: Some(eps),
        epsilon_interval: Some((0.0, eps_max)),
        phi_bar: PhiBar::InfiniteContinuation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValues {
    pub success_time: f64,
    pub follower_time: f64,
    pub k_star: f64,
    pub regime: RegimeKind,
    /// Standard errors when the times come from simulation.
    pub success_time_se: Option<f64>,
    pub follower_time_se: Option<f64>,
}

/// Expected times with no dropout: both stay until the first success.
pub fn no_dropout_limit(prob: &DesignProblem) -> (f64, f64) {
    let t = 1.0 / (prob.hazard_lead + prob.hazard_follow);
    (t, t)
}

/// Largest power-of-two fraction of 1e-3 passing the simulation resolution guard.
fn default_sim(params: &ContestParams, k_star: f64, k0: f64) -> SimConfig {
    let mut dt = 1e-3;
    let vol = params.sigma * 2f64.sqrt();
    while params.pi.abs() * dt + 3.0 * vol * dt.sqrt() >= k_star / 10.0 && dt > 1e-9 {
        dt /= 2.0;
    }
    SimConfig::new(100_000, dt, k0, 0)
}

/// Designer objectives at `allocation`; analytic in the Low regime, simulated otherwise.
pub fn objective_values(prob: &DesignProblem, allocation: &PrizeAllocation) -> Result<ObjectiveValues> {
    objective_values_with(prob, allocation, None)
}

pub fn objective_values_with(
    prob: &DesignProblem,
    allocation: &PrizeAllocation,
    sim: Option<&SimConfig>,
) -> Result<ObjectiveValues> {
    if allocation.phi_bar == PhiBar::InfiniteContinuation {
        return Err(ContestError::InfiniteContinuation);
    }
    let params = prob.params_for(allocation.prize_win, allocation.prize_lose);
    let sol = solve(&params)?;
    if sol.regime.kind == RegimeKind::Low {
        let (follower_time, success_time) = expected_times(&params, sol.k_star, prob.k0)?;
        return Ok(ObjectiveValues {
            success_time,
            follower_time,
            k_star: sol.k_star,
            regime: sol.regime.kind,
            success_time_se: None,
            follower_time_se: None,
        });
    }
    let cfg = match sim {
        Some(c) => SimConfig { k0: prob.k0, ..c.clone() },
        None => default_sim(&params, sol.k_star, prob.k0),
    };
    let res = simulate_equilibrium(&params, &sol, &cfg)?;
    Ok(ObjectiveValues {
        success_time: res.mean_success_time.mean,
        follower_time: res.mean_follower_time.mean,
        k_star: sol.k_star,
        regime: sol.regime.kind,
        success_time_se: Some(res.mean_success_time.se),
        follower_time_se: Some(res.mean_follower_time.se),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub allocation: PrizeAllocation,
    pub objectives: ObjectiveValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    /// Indices into `rows`, best first for the designer.
    pub rank_by_k_star: Vec<usize>,
    pub rank_by_follower_time: Vec<usize>,
    pub rank_by_success_time: Vec<usize>,
    pub consistent: bool,
}

fn ranking(rows: &[EquivalenceRow], key: impl Fn(&ObjectiveValues) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| key(&rows[a].objectives).total_cmp(&key(&rows[b].objectives)));
    idx
}

/// Checks that larger k*, longer follower time and shorter success time
/// order the allocations identically.
pub fn check_objective_equivalence(
    prob: &DesignProblem,
    allocations: &[PrizeAllocation],
) -> Result<EquivalenceReport> {
    let rows = allocations
        .iter()
        .map(|a| {
            Ok(EquivalenceRow {
                allocation: *a,
                objectives: objective_values(prob, a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rank_by_k_star = ranking(&rows, |o| -o.k_star);
    let rank_by_follower_time = ranking(&rows, |o| -o.follower_time);
    let rank_by_success_time = ranking(&rows, |o| o.success_time);
    let consistent =
        rank_by_k_star == rank_by_follower_time && rank_by_k_star == rank_by_success_time;
    Ok(EquivalenceReport {
        rows,
        rank_by_k_star,
        rank_by_follower_time,
        rank_by_success_time,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn problem(c: f64) -> DesignProblem {
        DesignProblem {
            budget: 10.0,
            hazard_lead: 0.3,
            hazard_follow: 0.05,
            cost: c,
            r: 0.05,
            pi: -0.1,
            sigma: 0.5,
            k0: 0.0,
        }
    }

    #[test]
    fn winner_takes_all_case() {
        let a = optimize_prizes(&problem(2.0)).unwrap();
        assert_eq!(a.case, DesignCase::WinnerTakesAll);
        assert_eq!((a.prize_win, a.prize_lose), (10.0, 0.0));
        match a.phi_bar {
            PhiBar::Finite { value } => assert_relative_eq!(value, 2.5 / 1.5, epsilon = 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_case() {
        let prob = problem(1.0);
        let a = optimize_prizes(&prob).unwrap();
        assert_eq!(a.case, DesignCase::NearEqualSplit);
        let (lo, hi) = a.epsilon_interval.unwrap();
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 3.0, epsilon = 1e-14);
        assert_relative_eq!(a.epsilon.unwrap(), 1.5, epsilon = 1e-14);
        assert_relative_eq!(a.prize_win, 6.5, epsilon = 1e-14);
        assert_relative_eq!(a.prize_lose, 3.5, epsilon = 1e-14);
        assert_eq!(a.phi_bar, PhiBar::InfiniteContinuation);
        let denominator = prob.cost - (0.05 * a.prize_win + 0.3 * a.prize_lose);
        assert!(denominator <= 0.0);
        assert!(matches!(objective_values(&prob, &a), Err(ContestError::InfiniteContinuation)));
        assert_eq!(no_dropout_limit(&prob), (1.0 / 0.35, 1.0 / 0.35));
    }

    #[test]
    fn assumption_and_knife_edge() {
        let mut prob = problem(2.0);
        prob.hazard_lead = 0.15;
        assert!(matches!(optimize_prizes(&prob), Err(ContestError::AssumptionViolated(_))));
        assert!(matches!(optimize_prizes(&problem(1.75)), Err(ContestError::KnifeEdge)));
        let mut rich = problem(0.4);
        rich.hazard_follow = 0.05;
        assert!(matches!(optimize_prizes(&rich), Err(ContestError::AssumptionViolated(_))));
    }

    #[test]
    fn winner_takes_all_maximizes_phi_on_grid() {
        let prob = problem(2.0);
        let best = match optimize_prizes(&prob).unwrap().phi_bar {
            PhiBar::Finite { value } => value,
            _ => unreachable!(),
        };
        for i in 0..50 {
            for j in 0..50 {
                let pw = prob.budget * i as f64 / 49.0;
                let pl = prob.budget * j as f64 / 49.0;
                if pl > pw || pw + pl > prob.budget + 1e-12 {
                    continue;
                }
                if let PhiBar::Finite { value } = phi_bar(&prob, pw, pl) {
                    assert!(value <= best + 1e-12, "({pw}, {pl}) gives {value} > {best}");
                }
            }
        }
    }

    #[test]
    fn k_star_increasing_in_phi() {
        let prob = problem(2.0);
        let mut prev = (0.0, 0.0);
        for i in 0..20 {
            let pw = 7.0 + 3.0 * i as f64 / 19.0;
            let a = PrizeAllocation::custom(&prob, pw, 0.0).unwrap();
            let phi = match a.phi_bar {
                PhiBar::Finite { value } => value,
                _ => unreachable!(),
            };
            let o = objective_values(&prob, &a).unwrap();
            assert!(phi > prev.0 && o.k_star > prev.1);
            prev = (phi, o.k_star);
        }
    }

    #[test]
    fn equivalence_report() {
        let prob = problem(2.0);
        let allocs: Vec<PrizeAllocation> = [(10.0, 0.0), (9.0, 0.5), (8.5, 0.0), (8.0, 1.0), (7.5, 0.5)]
            .iter()
            .map(|&(w, l)| PrizeAllocation::custom(&prob, w, l).unwrap())
            .collect();
        let report = check_objective_equivalence(&prob, &allocs).unwrap();
        assert!(report.consistent, "{report:#?}");
        assert_eq!(report.rank_by_k_star[0], 0);
        let single = check_objective_equivalence(&prob, &allocs[..1]).unwrap();
        assert!(single.consistent);
    }

    #[test]
    fn symmetric_start_matches_expected_time_formula() {
        let prob = problem(2.0);
        let a = optimize_prizes(&prob).unwrap();
        let o = objective_values(&prob, &a).unwrap();
        let params = prob.params_for(10.0, 0.0);
        let psi = |th| crate::sim::laplace_psi_analytic(th, o.k_star, 0.0, 0.1, 0.5).unwrap();
        let expected = (1.0 - psi(0.35)) / 0.35 + psi(0.3) / 0.3;
        assert_relative_eq!(o.success_time, expected, epsilon = 1e-12);
        assert_eq!(o.regime, RegimeKind::Low);
        assert!(params.validate().is_ok());
    }
}
