//! Numerical certification of a solved equilibrium: Bellman residuals,
//! no-deviation inequalities and the structural lemmas on a fine grid.

use serde::{Deserialize, Serialize};

use crate::model::{ContestParams, RegimeKind};
use crate::solver::EquilibriumSolution;

pub const DEFAULT_TOL: f64 = 1e-7;
/// Grid points stay this far from region ends so one-sided limits are unambiguous.
const EDGE_OFFSET: f64 = 1e-10;

/// Sample point with the equilibrium actions of both agents.
#[derive(Debug, Clone, Copy)]
struct Node {
    dk: f64,
    region: usize,
    risky_i: bool,
    risky_j: bool,
}

fn nodes(sol: &EquilibriumSolution, grid_n: usize) -> Vec<Node> {
    let n = grid_n.max(2);
    let mut out = Vec::with_capacity(n * sol.value.regions.len());
    for (region, reg) in sol.value.regions.iter().enumerate() {
        let lo = reg.lower + EDGE_OFFSET;
        let hi = reg.upper - EDGE_OFFSET;
        for q in 0..n {
            let dk = lo + (hi - lo) * q as f64 / (n - 1) as f64;
            out.push(Node {
                dk,
                region,
                risky_i: sol.strategy.is_risky(dk),
                risky_j: sol.strategy.is_risky(-dk),
            });
        }
    }
    out
}

fn derivs(sol: &EquilibriumSolution, dk: f64) -> [f64; 4] {
    let mut d = [0.0; 4];
    for (order, slot) in d.iter_mut().enumerate() {
        // Nodes are strictly inside the domain by construction.
        *slot = sol.value.eval(dk, order as u32).unwrap_or(f64::NAN);
    }
    d
}

/// Largest absolute Bellman residual
/// (r+λ̄+λ̲)V − prize flow + c − (a_i−a_j)πV′ − ½(a_i²+a_j²)σ²V″
/// over a uniform grid of `grid_n` points per region.
pub fn check_bellman(sol: &EquilibriumSolution, params: &ContestParams, grid_n: usize) -> f64 {
    let rl = params.r + params.hazard_total();
    nodes(sol, grid_n)
        .into_iter()
        .map(|node| {
            let [v, v1, v2, _] = derivs(sol, node.dk);
            let ai = node.risky_i as u8 as f64;
            let aj = node.risky_j as u8 as f64;
            let flow = params.prize_flow(node.dk >= 0.0);
            let res = rl * v - flow + params.c
                - (ai - aj) * params.pi * v1
                - 0.5 * (ai + aj) * params.sigma * params.sigma * v2;
            if res.is_nan() {
                f64::INFINITY
            } else {
                res.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Signed no-deviation margin on one region; non-negative means no profitable deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationMargin {
    pub lower: f64,
    pub upper: f64,
    pub risky: bool,
    /// min of D where risky, min of −D where safe, with D = πV′ + ½σ²V″.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaChecks {
    /// The follower takes the risky move everywhere.
    pub follower_risky: bool,
    /// V″ < tol on the leader side.
    pub leader_concave: bool,
    /// If π/σ > √(r+λ̄+λ̲)/2 the leader is risky everywhere (vacuous otherwise).
    pub leader_risky_high_return: bool,
    /// Medium: the leader's risky set is an upper interval [k**, k*) and
    /// the sign of D agrees (vacuous otherwise).
    pub leader_switch_upper_interval: bool,
}

impl LemmaChecks {
    pub fn all(&self) -> bool {
        self.follower_risky
            && self.leader_concave
            && self.leader_risky_high_return
            && self.leader_switch_upper_interval
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_bellman_residual: f64,
    pub deviation_margin_by_region: Vec<DeviationMargin>,
    /// min of πV″ + ½σ²V‴ on the Medium leader region, where the switch to
    /// the risky move relies on D crossing zero from below.
    pub second_order_margin: Option<f64>,
    /// min of V over the grid; staying in must be worth at least dropping out.
    pub stay_margin: f64,
    /// |D(k**)|, Medium only.
    pub indifference_residual: Option<f64>,
    pub lemma_checks: LemmaChecks,
    pub grid_size: usize,
    pub tol: f64,
    pub passed: bool,
}

fn deviation_gain(params: &ContestParams, v1: f64, v2: f64) -> f64 {
    params.pi * v1 + 0.5 * params.sigma * params.sigma * v2
}

/// Evaluates the structural lemmas on the grid.
pub fn check_lemmas(
    sol: &EquilibriumSolution,
    params: &ContestParams,
    grid_n: usize,
    tol: f64,
) -> LemmaChecks {
    let grid = nodes(sol, grid_n);
    let follower_risky = grid.iter().filter(|n| n.dk < 0.0).all(|n| n.risky_i);
    let leader: Vec<&Node> = grid.iter().filter(|n| n.dk >= 0.0).collect();
    let leader_concave = leader.iter().all(|n| derivs(sol, n.dk)[2] < tol);
    let high_return =
        params.pi / params.sigma > (params.r + params.hazard_total()).sqrt() / 2.0;
    let leader_risky_high_return = !high_return || leader.iter().all(|n| n.risky_i);
    let leader_switch_upper_interval = match (sol.regime.kind, sol.k_star_star) {
        (RegimeKind::Medium, Some(kss)) => leader.iter().all(|n| {
            let d = derivs(sol, n.dk);
            let gain = deviation_gain(params, d[1], d[2]);
            if n.dk >= kss {
                n.risky_i && gain >= -tol
            } else {
                !n.risky_i && gain <= tol
            }
        }),
        (RegimeKind::Medium, None) => false,
        _ => true,
    };
    LemmaChecks {
        follower_risky,
        leader_concave,
        leader_risky_high_return,
        leader_switch_upper_interval,
    }
}

/// Full report: Bellman residual, deviation margins per region, the
/// second-order condition, indifference at k** and the lemmas.
pub fn check_deviations(
    sol: &EquilibriumSolution,
    params: &ContestParams,
    grid_n: usize,
) -> VerificationReport {
    verify_with_tol(sol, params, grid_n, DEFAULT_TOL)
}

pub fn verify_with_tol(
    sol: &EquilibriumSolution,
    params: &ContestParams,
    grid_n: usize,
    tol: f64,
) -> VerificationReport {
    let grid = nodes(sol, grid_n);
    let mut margins: Vec<DeviationMargin> = Vec::new();
    let medium = sol.regime.kind == RegimeKind::Medium;
    let mut second_order_margin = None::<f64>;
    let mut stay_margin = f64::INFINITY;
    for node in &grid {
        let d = derivs(sol, node.dk);
        let gain = deviation_gain(params, d[1], d[2]);
        let signed = if node.risky_i { gain } else { -gain };
        if medium && node.dk >= 0.0 {
            let so = params.pi * d[2] + 0.5 * params.sigma * params.sigma * d[3];
            second_order_margin = Some(second_order_margin.map_or(so, |m| m.min(so)));
        }
        stay_margin = stay_margin.min(d[0]);
        let reg = &sol.value.regions[node.region];
        // Regions of the value function can hold both actions only at their
        // ends, so split the margin list by action within each region.
        match margins.last_mut() {
            Some(m) if m.lower == reg.lower && m.risky == node.risky_i => {
                m.margin = m.margin.min(signed)
            }
            _ => margins.push(DeviationMargin {
                lower: reg.lower,
                upper: reg.upper,
                risky: node.risky_i,
                margin: signed,
            }),
        }
    }
    let indifference_residual = sol.k_star_star.and_then(|kss| {
        sol.value
            .eval(kss, 1)
            .and_then(|v1| sol.value.eval(kss, 2).map(|v2| (v1, v2)))
            .ok()
            .map(|(v1, v2)| deviation_gain(params, v1, v2).abs())
    });
    let max_bellman_residual = check_bellman(sol, params, grid_n);
    let lemma_checks = check_lemmas(sol, params, grid_n, tol);
    let passed = max_bellman_residual < tol
        && margins.iter().all(|m| m.margin >= -tol)
        && second_order_margin.is_none_or(|m| m >= -tol)
        && stay_margin >= -tol
        && indifference_residual.is_none_or(|r| r < tol)
        && lemma_checks.all();
    VerificationReport {
        max_bellman_residual,
        deviation_margin_by_region: margins,
        second_order_margin,
        stay_margin,
        indifference_residual,
        lemma_checks,
        grid_size: grid.len(),
        tol,
        passed,
    }
}
