//! Brute-force check on the closed forms: the contest discretized as a
//! discrete-time stochastic game on a lattice of gaps, solved by symmetric
//! best-response iteration followed by value iteration.
//!
//! Nodes sit at (j+½)h so that no node has Δk = 0. At an exact tie both
//! agents would count as leaders and the lattice would absorb there.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::model::ContestParams;
use crate::numeric::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Lattice spacing h.
    pub dk_step: f64,
    /// Period length.
    pub dt: f64,
    /// Truncation of the state space at ±k_max.
    pub k_max: f64,
    /// Cap on value-iteration sweeps.
    pub max_iter: usize,
    /// Sup-norm tolerance on the value change between sweeps.
    pub tol: f64,
}

impl GridSpec {
    /// Largest stable period, h²/(2σ² + |π|h).
    pub fn dt_bound(params: &ContestParams, h: f64) -> f64 {
        h * h / (2.0 * params.sigma * params.sigma + params.pi.abs() * h)
    }

    /// Half the stable period and the given truncation.
    pub fn new(params: &ContestParams, h: f64, k_max: f64) -> GridSpec {
        GridSpec {
            dk_step: h,
            dt: 0.5 * Self::dt_bound(params, h),
            k_max,
            max_iter: 5_000_000,
            tol: 1e-10,
        }
    }

    pub fn check(&self, params: &ContestParams) -> Result<()> {
        let h = self.dk_step;
        if !(h > 0.0 && h.is_finite()) {
            return Err(ContestError::StabilityViolation(format!("dk_step = {h}")));
        }
        if !(self.dt > 0.0) {
            return Err(ContestError::StabilityViolation(format!("dt = {}", self.dt)));
        }
        let bound = Self::dt_bound(params, h);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(ContestError::StabilityViolation(format!(
                "dt = {} exceeds h²/(2σ²+|π|h) = {bound}",
                self.dt
            )));
        }
        if params.hazard_total() * self.dt >= 0.5 {
            return Err(ContestError::StabilityViolation(format!(
                "(λ̄+λ̲)dt = {} must stay below 0.5",
                params.hazard_total() * self.dt
            )));
        }
        if !(self.k_max >= 2.0 * h) || !self.k_max.is_finite() {
            return Err(ContestError::StabilityViolation(format!(
                "k_max = {} must cover at least two nodes",
                self.k_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Drop,
    Safe,
    Risky,
}

impl Action {
    fn as_str(self) -> &'static str {
        match self {
            Action::Drop => "drop",
            Action::Safe => "safe",
            Action::Risky => "risky",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub dk: Vec<f64>,
    pub value_on_grid: Vec<f64>,
    pub policy: Vec<Action>,
    /// Smallest |Δk| at which the follower drops.
    pub k_star_est: f64,
    /// Sub-grid boundary from the quadratic contact of V at the dropout
    /// boundary (√V is locally linear there).
    pub k_star_refined: f64,
    /// Smallest leading gap with a risky action, when strictly inside (0, k*).
    pub k_star_star_est: Option<f64>,
    pub best_response_rounds: usize,
    pub value_sweeps: usize,
    pub k_max: f64,
    /// Values beyond the outermost nodes.
    pub boundary_values: (f64, f64),
}

struct Lattice<'a> {
    params: &'a ContestParams,
    h: f64,
    dt: f64,
    beta: f64,
    gain: Vec<f64>,
    sure_win: f64,
}

impl Lattice<'_> {
    fn probs(&self, own_risky: bool, opp_risky: bool) -> (f64, f64, f64) {
        let a = own_risky as u8 as f64;
        let b = opp_risky as u8 as f64;
        let m = (a - b) * self.params.pi * self.dt;
        let v = (a * a + b * b) * self.params.sigma * self.params.sigma * self.dt;
        let second = (v + m * m) / (self.h * self.h);
        (0.5 * second + m / (2.0 * self.h), 0.5 * second - m / (2.0 * self.h), 1.0 - second)
    }

    fn n(&self) -> usize {
        self.gain.len()
    }

    fn up(&self, v: &[f64], i: usize) -> f64 {
        if i + 1 < self.n() {
            v[i + 1]
        } else {
            self.sure_win
        }
    }

    fn down(&self, v: &[f64], i: usize) -> f64 {
        if i > 0 {
            v[i - 1]
        } else {
            0.0
        }
    }

    /// One Bellman update against the opponent policy (mirrored indices).
    fn bellman(&self, v: &[f64], opp: &[Action], out_v: &mut [f64], out_pol: &mut [Action]) {
        let n = self.n();
        for i in 0..n {
            let opp_action = opp[n - 1 - i];
            let q = |risky: bool| {
                let (pu, pd, p0) = self.probs(risky, opp_action == Action::Risky);
                self.gain[i] + self.beta * (pu * self.up(v, i) + pd * self.down(v, i) + p0 * v[i])
            };
            let (q_safe, q_risky) = (q(false), q(true));
            // Ties go to the safe move.
            let (act, best) = if q_risky > q_safe + 1e-13 {
                (Action::Risky, q_risky)
            } else {
                (Action::Safe, q_safe)
            };
            if opp_action == Action::Drop {
                out_v[i] = self.sure_win;
                out_pol[i] = act;
            } else if best > 0.0 {
                out_v[i] = best;
                out_pol[i] = act;
            } else {
                out_v[i] = 0.0;
                out_pol[i] = Action::Drop;
            }
        }
    }

    /// Exact value of a stationary policy pair (tridiagonal solve).
    fn evaluate(&self, own: &[Action], opp: &[Action]) -> Vec<f64> {
        let n = self.n();
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let opp_action = opp[n - 1 - i];
            if opp_action == Action::Drop {
                rhs[i] = self.sure_win;
                continue;
            }
            if own[i] == Action::Drop {
                continue;
            }
            let (pu, pd, p0) = self.probs(own[i] == Action::Risky, opp_action == Action::Risky);
            diag[i] = 1.0 - self.beta * p0;
            rhs[i] = self.gain[i];
            if i + 1 < n {
                upper[i] = -self.beta * pu;
            } else {
                rhs[i] += self.beta * pu * self.sure_win;
            }
            if i > 0 {
                lower[i] = -self.beta * pd;
            }
        }
        solve_tridiagonal(&lower, &diag, &upper, &rhs)
    }
}

/// Solves the lattice game for its symmetric equilibrium.
pub fn solve_grid_mpe(params: &ContestParams, spec: &GridSpec) -> Result<OracleResult> {
    params.validate()?;
    spec.check(params)?;
    let h = spec.dk_step;
    let half = (spec.k_max / h).round() as i64;
    let dk: Vec<f64> = (-half..half).map(|j| (j as f64 + 0.5) * h).collect();
    let n = dk.len();
    let dt = spec.dt;
    let discount = (-params.r * dt).exp();
    let lattice = Lattice {
        params,
        h,
        dt,
        beta: discount * (1.0 - params.hazard_total() * dt),
        gain: dk
            .iter()
            .map(|&x| params.prize_flow(x > 0.0) * dt * discount - params.c * dt)
            .collect(),
        sure_win: params.leader_constant(),
    };

    // Symmetric best-response iteration with policy iteration inside.
    let mut policy: Vec<Action> = dk
        .iter()
        .map(|&x| if x < 0.0 { Action::Risky } else { Action::Safe })
        .collect();
    let mut value = vec![0.0; n];
    let mut seen: HashSet<Vec<Action>> = HashSet::new();
    let mut scratch_v = vec![0.0; n];
    let mut scratch_p = policy.clone();
    let mut rounds = 0;
    for round in 0..200 {
        rounds = round + 1;
        let opp = policy.clone();
        let mut own = policy.clone();
        for _ in 0..10_000 {
            value = lattice.evaluate(&own, &opp);
            lattice.bellman(&value, &opp, &mut scratch_v, &mut scratch_p);
            if scratch_p == own {
                break;
            }
            own.clone_from(&scratch_p);
        }
        if own == policy || !seen.insert(own.clone()) {
            policy = own;
            break;
        }
        policy = own;
    }

    // Value-iteration polish until the symmetric policy is a fixed point.
    let mut sweeps = 0;
    let mut last_change = f64::INFINITY;
    loop {
        if sweeps >= spec.max_iter {
            return Err(ContestError::OracleNonConvergence {
                iterations: sweeps,
                last_change,
            });
        }
        lattice.bellman(&value, &policy, &mut scratch_v, &mut scratch_p);
        sweeps += 1;
        last_change = value
            .iter()
            .zip(&scratch_v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let same = scratch_p == policy;
        std::mem::swap(&mut value, &mut scratch_v);
        std::mem::swap(&mut policy, &mut scratch_p);
        if same && last_change < spec.tol {
            break;
        }
    }

    let last_drop = (0..n)
        .filter(|&i| dk[i] < 0.0 && policy[i] == Action::Drop)
        .max()
        .ok_or_else(|| {
            ContestError::NoConvergence("lattice equilibrium has no dropout region".into())
        })?;
    let k_star_est = -dk[last_drop];
    let k_star_refined = if last_drop + 2 < n {
        let (s1, s2) = (value[last_drop + 1].sqrt(), value[last_drop + 2].sqrt());
        let contact = dk[last_drop + 1] - h * s1 / (s2 - s1);
        if contact.is_finite() {
            -contact
        } else {
            k_star_est
        }
    } else {
        k_star_est
    };
    let first_leader = dk.iter().position(|&x| x > 0.0).unwrap_or(n);
    let k_star_star_est = (first_leader..n)
        .find(|&i| policy[i] == Action::Risky && policy[n - 1 - i] != Action::Drop)
        .filter(|&i| i > first_leader)
        .map(|i| dk[i]);
    Ok(OracleResult {
        dk,
        value_on_grid: value,
        policy,
        k_star_est,
        k_star_refined,
        k_star_star_est,
        best_response_rounds: rounds,
        value_sweeps: sweeps,
        k_max: half as f64 * h,
        boundary_values: (0.0, lattice.sure_win),
    })
}

/// Linear interpolation of the lattice value, with the absorbing values at ±k_max.
pub fn grid_value_at(result: &OracleResult, dk: f64) -> Result<f64> {
    if !(dk.abs() <= result.k_max) {
        return Err(ContestError::Domain(format!(
            "Δk = {dk} outside [−{0}, {0}]",
            result.k_max
        )));
    }
    let xs = &result.dk;
    let vs = &result.value_on_grid;
    let n = xs.len();
    let (x0, v0, x1, v1) = match xs.partition_point(|&x| x <= dk) {
        0 => (-result.k_max, result.boundary_values.0, xs[0], vs[0]),
        i if i == n => (xs[n - 1], vs[n - 1], result.k_max, result.boundary_values.1),
        i => (xs[i - 1], vs[i - 1], xs[i], vs[i]),
    };
    if dk == x0 {
        return Ok(v0);
    }
    Ok(v0 + (v1 - v0) * (dk - x0) / (x1 - x0))
}

impl OracleResult {
    /// CSV with columns dk,value,policy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dk,value,policy\n");
        for ((x, v), a) in self.dk.iter().zip(&self.value_on_grid).zip(&self.policy) {
            let _ = writeln!(out, "{x:.12e},{v:.12e},{}", a.as_str());
        }
        out
    }
}
