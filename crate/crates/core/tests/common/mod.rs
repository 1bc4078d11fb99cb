#![allow(dead_code)]

use contest_core::{classify, ContestParams, RegimeKind};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// P = 10, c = 1, λ = 0.2, r = 0.05, σ = 0.5, so φ = 2.
pub fn bench(pi: f64) -> ContestParams {
    ContestParams::baseline(0.05, 1.0, 10.0, 0.2, pi, 0.5).unwrap()
}

pub const LOW_PI: f64 = 0.0;
pub const MEDIUM_PI: f64 = 0.05;
pub const HIGH_PI: f64 = 0.15;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random baseline parameters in `kind`, with π placed as a fraction of the
/// regime's π/σ range.
pub fn draw(rng: &mut ChaCha8Rng, kind: RegimeKind) -> ContestParams {
    let r = rng.random_range(0.01..0.2);
    let lambda = rng.random_range(0.05..0.5);
    let sigma = rng.random_range(0.1..1.5);
    let phi = rng.random_range(1.2..6.0);
    let base = ContestParams::baseline(r, 1.0, phi / lambda, lambda, 0.0, sigma).unwrap();
    let threshold = classify(&base).unwrap().threshold;
    let ratio = match kind {
        RegimeKind::Low => -rng.random_range(0.0..1.0) * threshold,
        RegimeKind::Medium => rng.random_range(0.02..0.98) * threshold,
        RegimeKind::High => rng.random_range(1.0..4.0) * threshold,
    };
    let p = ContestParams::baseline(r, 1.0, phi / lambda, lambda, ratio * sigma, sigma).unwrap();
    assert_eq!(classify(&p).unwrap().kind, kind);
    p
}

/// Random extended-model parameters (follower hazard and loser prize).
pub fn draw_extended(rng: &mut ChaCha8Rng, kind: RegimeKind) -> ContestParams {
    loop {
        let b = draw(rng, kind);
        let hazard_follow = rng.random_range(0.0..0.5) * b.hazard_lead;
        let prize_lose = rng.random_range(0.0..0.3) * b.prize_win;
        let Ok(p) = ContestParams::new(
            b.r,
            b.c,
            b.prize_win,
            prize_lose,
            b.hazard_lead,
            hazard_follow,
            b.pi,
            b.sigma,
        ) else {
            continue;
        };
        if classify(&p).map(|g| g.kind) == Ok(kind) {
            return p;
        }
    }
}
