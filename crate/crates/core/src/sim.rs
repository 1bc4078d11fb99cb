//! Monte Carlo simulation of the contest under given strategies, plus the
//! analytic first-passage formulas for the Low-regime gap process.
//!
//! Each path evolves the gap Δk with Euler steps and a Brownian-bridge check
//! for boundary crossings between grid times. Success is drawn by thinning
//! an Exp(1) budget against the state hazards, so the hazard may switch with
//! the leader identity mid-path. Paths are seeded from (seed, path index)
//! and reduced in fixed-size chunks in index order, which makes results
//! independent of the worker count.

use std::fmt::Write as _;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::model::ContestParams;
use crate::solver::{EquilibriumSolution, Strategy};

const CHUNK: usize = 4096;
pub const TRACE_ROW_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    /// Initial gap Δk(0) from agent i's side.
    pub k0: f64,
    pub seed: u64,
    /// Paths still running at this time are stopped and counted.
    pub horizon_cap: f64,
    /// Discount rates θ at which E[e^{−θτ}] is estimated, τ the first time |Δk| reaches k*.
    pub laplace_thetas: Vec<f64>,
    /// Brownian-bridge crossing check between grid times.
    pub bridge: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, dt: f64, k0: f64, seed: u64) -> SimConfig {
        SimConfig {
            n_paths,
            dt,
            k0,
            seed,
            horizon_cap: 1e4,
            laplace_thetas: Vec::new(),
            bridge: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub theta: f64,
    pub estimate: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_discounted_payoff_i: Estimate,
    pub mean_discounted_payoff_j: Estimate,
    pub win_prob_i: Estimate,
    pub win_prob_j: Estimate,
    pub mean_success_time: Estimate,
    pub mean_follower_time: Estimate,
    pub laplace_at: Vec<LaplaceEstimate>,
    pub horizon_cap_reached: usize,
    pub n_paths: usize,
}

/// Per-path observations, fed into running sums.
#[derive(Debug, Clone, Copy, Default)]
struct PathOutcome {
    payoff_i: f64,
    payoff_j: f64,
    win_i: bool,
    win_j: bool,
    success_time: f64,
    follower_time: f64,
    tau: f64,
    capped: bool,
}

#[derive(Debug, Clone, Default)]
struct Sums {
    s: Vec<f64>,
    s2: Vec<f64>,
    n: usize,
    capped: usize,
}

impl Sums {
    fn new(width: usize) -> Sums {
        Sums {
            s: vec![0.0; width],
            s2: vec![0.0; width],
            n: 0,
            capped: 0,
        }
    }

    fn push(&mut self, values: &[f64]) {
        for ((s, s2), v) in self.s.iter_mut().zip(self.s2.iter_mut()).zip(values) {
            *s += v;
            *s2 += v * v;
        }
        self.n += 1;
    }

    fn merge(mut self, other: &Sums) -> Sums {
        for q in 0..self.s.len() {
            self.s[q] += other.s[q];
            self.s2[q] += other.s2[q];
        }
        self.n += other.n;
        self.capped += other.capped;
        self
    }

    fn estimate(&self, q: usize) -> Estimate {
        let n = self.n as f64;
        let mean = self.s[q] / n;
        let var = if self.n > 1 {
            ((self.s2[q] - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

struct Engine<'a> {
    params: &'a ContestParams,
    si: &'a Strategy,
    sj: &'a Strategy,
    cfg: &'a SimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub dk: f64,
    pub action_i: bool,
    pub action_j: bool,
}

impl Engine<'_> {
    fn solo_payoff(&self, t_end: f64, prize: f64) -> f64 {
        let d = (-self.params.r * t_end).exp();
        d * prize - self.params.c / self.params.r * (1.0 - d)
    }

    fn quit_payoff(&self, t_drop: f64) -> f64 {
        -self.params.c / self.params.r * (1.0 - (-self.params.r * t_drop).exp())
    }

    fn run(&self, path: u64, mut trace: Option<&mut Vec<TraceRow>>) -> PathOutcome {
        let p = self.params;
        let dt = self.cfg.dt;
        let sqrt_dt = dt.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(path);
        let (hi, lo) = (self.sj.stop_at, self.si.stop_at);
        let mut x = self.cfg.k0;
        let mut t = 0.0;
        let mut budget: f64 = rng.sample(Exp1);
        let mut out = PathOutcome::default();
        let mut decided = false;
        let want_tau = !self.cfg.laplace_thetas.is_empty();
        loop {
            if t >= self.cfg.horizon_cap {
                out.capped = true;
                if !decided {
                    out.success_time = t;
                    out.follower_time = t;
                    out.payoff_i = self.quit_payoff(t);
                    out.payoff_j = self.quit_payoff(t);
                }
                out.tau = t;
                return out;
            }
            let ai = self.si.is_risky_tie_follows(x);
            let aj = self.sj.is_risky_tie_follows(-x);
            if let Some(rows) = trace.as_deref_mut() {
                if rows.len() < TRACE_ROW_CAP && !decided {
                    rows.push(TraceRow { t, dk: x, action_i: ai, action_j: aj });
                }
            }
            if !decided {
                let h_i = if x >= 0.0 { p.hazard_lead } else { p.hazard_follow };
                let h_j = if x <= 0.0 { p.hazard_lead } else { p.hazard_follow };
                let total = h_i + h_j;
                if budget <= total * dt {
                    let ts = t + budget / total;
                    let u: f64 = rng.random();
                    let i_wins = u * total < h_i;
                    out.win_i = i_wins;
                    out.win_j = !i_wins;
                    let (prize_i, prize_j) = if i_wins {
                        (p.prize_win, p.prize_lose)
                    } else {
                        (p.prize_lose, p.prize_win)
                    };
                    out.payoff_i = self.solo_payoff(ts, prize_i);
                    out.payoff_j = self.solo_payoff(ts, prize_j);
                    out.success_time = ts;
                    out.follower_time = ts;
                    decided = true;
                    if !want_tau {
                        return out;
                    }
                } else {
                    budget -= total * dt;
                }
            }
            let a = ai as u8 as f64;
            let b = aj as u8 as f64;
            let drift = (a - b) * p.pi;
            let var = (a * a + b * b) * p.sigma * p.sigma;
            let z: f64 = rng.sample(StandardNormal);
            let x_new = x + drift * dt + var.sqrt() * sqrt_dt * z;
            let mut up = x_new >= hi;
            let mut down = x_new <= -lo;
            if self.cfg.bridge && !up && !down && var > 0.0 {
                let v = var * dt;
                let p_up = (-2.0 * (hi - x) * (hi - x_new) / v).exp();
                let p_down = (-2.0 * (x + lo) * (x_new + lo) / v).exp();
                let u: f64 = rng.random();
                up = u < p_up;
                down = !up && u < p_up + p_down;
            }
            t += dt;
            x = x_new;
            if up || down {
                out.tau = t;
                if !decided {
                    let solo: f64 = rng.sample(Exp1);
                    let t_success = t + solo / p.hazard_lead;
                    out.follower_time = t;
                    out.success_time = t_success;
                    if up {
                        out.win_i = true;
                        out.payoff_i = self.solo_payoff(t_success, p.prize_win);
                        out.payoff_j = self.quit_payoff(t);
                    } else {
                        out.win_j = true;
                        out.payoff_i = self.quit_payoff(t);
                        out.payoff_j = self.solo_payoff(t_success, p.prize_win);
                    }
                }
                return out;
            }
        }
    }

    fn observe(&self, o: &PathOutcome, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend_from_slice(&[
            o.payoff_i,
            o.payoff_j,
            o.win_i as u8 as f64,
            o.win_j as u8 as f64,
            o.success_time,
            o.follower_time,
        ]);
        buf.extend(self.cfg.laplace_thetas.iter().map(|th| (-th * o.tau).exp()));
    }
}

fn check_config(
    params: &ContestParams,
    si: &Strategy,
    sj: &Strategy,
    cfg: &SimConfig,
) -> Result<()> {
    params.validate_structure()?;
    if cfg.n_paths == 0 {
        return Err(ContestError::invalid("n_paths", "must be at least 1"));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(ContestError::invalid("dt", "must be positive"));
    }
    if !(cfg.horizon_cap > 0.0) {
        return Err(ContestError::invalid("horizon_cap", "must be positive"));
    }
    if cfg.laplace_thetas.iter().any(|th| !(*th > 0.0 && th.is_finite())) {
        return Err(ContestError::invalid("laplace_thetas", "must be positive"));
    }
    if !(si.stop_at > 0.0 && sj.stop_at > 0.0) {
        return Err(ContestError::invalid("strategy", "stopping boundaries must be positive"));
    }
    if !(cfg.k0 > -si.stop_at && cfg.k0 < sj.stop_at) {
        return Err(ContestError::Domain(format!(
            "k0 = {} outside the continuation region ({}, {})",
            cfg.k0, -si.stop_at, sj.stop_at
        )));
    }
    // Largest per-step move over the regions the strategies actually visit.
    let leader_risky = |s: &Strategy| s.risky_regions.iter().any(|iv| iv.upper.is_none_or(|u| u > 0.0));
    let both_risky = leader_risky(si) || leader_risky(sj);
    let vol = params.sigma * if both_risky { 2f64.sqrt() } else { 1.0 };
    let step = params.pi.abs() * cfg.dt + 3.0 * vol * cfg.dt.sqrt();
    let k = si.stop_at.min(sj.stop_at);
    if step >= k / 10.0 {
        return Err(ContestError::SimResolution(format!(
            "|drift|·dt + 3·vol·√dt = {step:.6} is not below k*/10 = {:.6}",
            k / 10.0
        )));
    }
    Ok(())
}

/// Simulates the contest with agent i playing `si` and agent j playing `sj`.
pub fn simulate(
    params: &ContestParams,
    si: &Strategy,
    sj: &Strategy,
    cfg: &SimConfig,
) -> Result<SimResult> {
    check_config(params, si, sj, cfg)?;
    let engine = Engine { params, si, sj, cfg };
    let width = 6 + cfg.laplace_thetas.len();
    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let chunks: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = Sums::new(width);
            let mut buf = Vec::with_capacity(width);
            let end = ((c + 1) * CHUNK).min(cfg.n_paths);
            for path in c * CHUNK..end {
                let o = engine.run(path as u64, None);
                sums.capped += o.capped as usize;
                engine.observe(&o, &mut buf);
                sums.push(&buf);
            }
            sums
        })
        .collect();
    let total = chunks
        .iter()
        .fold(Sums::new(width), |acc, s| acc.merge(s));
    Ok(SimResult {
        mean_discounted_payoff_i: total.estimate(0),
        mean_discounted_payoff_j: total.estimate(1),
        win_prob_i: total.estimate(2),
        win_prob_j: total.estimate(3),
        mean_success_time: total.estimate(4),
        mean_follower_time: total.estimate(5),
        laplace_at: cfg
            .laplace_thetas
            .iter()
            .enumerate()
            .map(|(q, &theta)| {
                let e = total.estimate(6 + q);
                LaplaceEstimate {
                    theta,
                    estimate: e.mean,
                    se: e.se,
                }
            })
            .collect(),
        horizon_cap_reached: total.capped,
        n_paths: cfg.n_paths,
    })
}

/// Both agents play the equilibrium strategy of `sol`.
pub fn simulate_equilibrium(
    params: &ContestParams,
    sol: &EquilibriumSolution,
    cfg: &SimConfig,
) -> Result<SimResult> {
    simulate(params, &sol.strategy, &sol.strategy, cfg)
}

/// One path's (t, Δk, actions) until the contest is decided, at most
/// [`TRACE_ROW_CAP`] rows.
pub fn trace_path(
    params: &ContestParams,
    si: &Strategy,
    sj: &Strategy,
    cfg: &SimConfig,
    path: u64,
) -> Result<Vec<TraceRow>> {
    check_config(params, si, sj, cfg)?;
    let engine = Engine { params, si, sj, cfg };
    let mut rows = Vec::new();
    engine.run(path, Some(&mut rows));
    Ok(rows)
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("t,dk,action_i,action_j\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{},{}",
            r.t, r.dk, r.action_i as u8, r.action_j as u8
        );
    }
    out
}

/// E[e^{−θτ}] for τ the first time a reflected Brownian motion with outward
/// drift `drift_mag` and volatility `sigma`, started at `k0`, reaches `k_star`.
pub fn laplace_psi_analytic(
    theta: f64,
    k_star: f64,
    k0: f64,
    drift_mag: f64,
    sigma: f64,
) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ContestError::Domain(format!("θ = {theta} must be positive")));
    }
    if !(k_star > 0.0 && k_star.is_finite()) {
        return Err(ContestError::Domain(format!("k* = {k_star} must be positive")));
    }
    if !(k0 >= 0.0 && k0 <= k_star) {
        return Err(ContestError::Domain(format!("k0 = {k0} outside [0, {k_star}]")));
    }
    if !(drift_mag >= 0.0) {
        return Err(ContestError::Domain(format!(
            "outward drift {drift_mag} must be non-negative"
        )));
    }
    if !(sigma > 0.0) {
        return Err(ContestError::Domain(format!("σ = {sigma} must be positive")));
    }
    let s2 = sigma * sigma;
    let gamma = (drift_mag * drift_mag + 2.0 * theta * s2).sqrt();
    // γ·cosh(a) + m·sinh(a) with the e^{a}/2 factor taken out.
    let scaled = |a: f64| {
        let e = (-2.0 * a).exp();
        gamma * (1.0 + e) + drift_mag * (1.0 - e)
    };
    let a0 = k0 * gamma / s2;
    let a1 = k_star * gamma / s2;
    Ok((drift_mag * (k_star - k0) / s2 + a0 - a1).exp() * scaled(a0) / scaled(a1))
}

/// Expected time both agents stay in and expected time to success, for the
/// Low-regime gap process started at |k0|.
pub fn expected_times(params: &ContestParams, k_star: f64, k0: f64) -> Result<(f64, f64)> {
    params.validate_structure()?;
    if params.pi > 0.0 {
        return Err(ContestError::Domain(
            "analytic first-passage times need π ≤ 0".into(),
        ));
    }
    let total = params.hazard_total();
    let psi_total = laplace_psi_analytic(total, k_star, k0.abs(), -params.pi, params.sigma)?;
    let psi_lead = laplace_psi_analytic(params.hazard_lead, k_star, k0.abs(), -params.pi, params.sigma)?;
    let follower = (1.0 - psi_total) / total;
    Ok((follower, follower + psi_lead / params.hazard_lead))
}
