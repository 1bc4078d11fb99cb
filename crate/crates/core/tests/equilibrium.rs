mod common;

use common::{draw, draw_extended, rng};
use contest_core::verify::check_deviations;
use contest_core::{solve, RegimeKind};

const KINDS: [RegimeKind; 3] = [RegimeKind::Low, RegimeKind::Medium, RegimeKind::High];

#[test]
fn random_baseline_draws_verify() {
    let mut rng = rng(11);
    for kind in KINDS {
        for _ in 0..100 {
            let p = draw(&mut rng, kind);
            let sol = solve(&p).unwrap_or_else(|e| panic!("{p:?}: {e}"));
            assert!(sol.residuals.max() < 1e-8, "{p:?}: {:?}", sol.residuals);
            let report = check_deviations(&sol, &p, 500);
            assert!(report.passed, "{p:?}: {report:?}");
        }
    }
}

#[test]
fn random_extended_draws_verify() {
    let mut rng = rng(12);
    for kind in KINDS {
        for _ in 0..30 {
            let p = draw_extended(&mut rng, kind);
            let sol = solve(&p).unwrap_or_else(|e| panic!("{p:?}: {e}"));
            let report = check_deviations(&sol, &p, 500);
            assert!(report.passed, "{p:?}: {report:?}");
        }
    }
}

#[test]
fn value_is_continuous_and_pinned() {
    let mut rng = rng(13);
    for kind in KINDS {
        for _ in 0..20 {
            let p = draw(&mut rng, kind);
            let sol = solve(&p).unwrap();
            assert!(sol.value_at(-sol.k_star).unwrap().abs() < 1e-9);
            let top = sol.value_at(sol.k_star).unwrap();
            assert!((top - p.leader_constant()).abs() < 1e-9 * p.leader_constant().max(1.0));
            let (c0, c1) = sol.value.continuity_jumps();
            assert!(c0 < 1e-8 && c1 < 1e-8, "{c0} {c1}");
        }
    }
}
