use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssdlab_core::egta::{
    estimate_payoffs, PlayoutSpec, PolicyClass, PolicyPool, PoolMember, StopRule, Tolerance,
};
use ssdlab_core::engine::load_map;
use ssdlab_core::games::{GameRules, GatheringParams};
use ssdlab_core::harness::Environment;
use ssdlab_core::Action;

const MAP: &str = "\
#########
#.A...A.#
#.A.AA..#
#..1..2.#
#########
";

fn env() -> Environment {
    let map = Arc::new(load_map(MAP).unwrap());
    Environment::new(GameRules::Gathering(GatheringParams::default()), map, 5).unwrap()
}

fn pool(label: PolicyClass, scripts: &[&[Action]]) -> PolicyPool {
    PolicyPool {
        label,
        members: scripts
            .iter()
            .enumerate()
            .map(|(i, s)| PoolMember::scripted(format!("s{i}"), 0.0, s.to_vec()))
            .collect(),
    }
}

const WANDER: &[Action] = &[
    Action::StepForward,
    Action::RotateLeft,
    Action::StepForward,
    Action::StepRight,
    Action::UseBeam,
    Action::StepBackward,
];

const SHOOT: &[Action] = &[Action::UseBeam, Action::RotateRight, Action::StepLeft];

#[test]
fn identical_pools_are_symmetric() {
    let c = pool(PolicyClass::Cooperator, &[WANDER, SHOOT]);
    let d = pool(PolicyClass::Defector, &[WANDER, SHOOT]);
    let play = PlayoutSpec {
        episodes_per_draw: 1,
        episode_length: 100,
        epsilon: 0.1,
    };
    let stop = StopRule {
        tolerance: Tolerance::Absolute(0.0),
        max_episodes_per_cell: 400,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = estimate_payoffs((&c, &d), &env(), &play, &stop, &mut rng)
        .unwrap()
        .matrix;
    let close = |a: ssdlab_core::egta::CellEstimate, b: ssdlab_core::egta::CellEstimate| {
        (a.mean - b.mean).abs() <= 4.0 * (a.se.powi(2) + b.se.powi(2)).sqrt().max(1e-9)
    };
    assert!(close(m.r, m.p), "R {:?} P {:?}", m.r, m.p);
    assert!(close(m.s, m.t), "S {:?} T {:?}", m.s, m.t);
}

#[test]
fn infinite_tolerance_stops_after_one_round() {
    let c = pool(PolicyClass::Cooperator, &[WANDER]);
    let d = pool(PolicyClass::Defector, &[SHOOT]);
    let play = PlayoutSpec {
        episodes_per_draw: 1,
        episode_length: 50,
        epsilon: 0.2,
    };
    let stop = StopRule {
        tolerance: Tolerance::Absolute(f64::INFINITY),
        max_episodes_per_cell: 1000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let est = estimate_payoffs((&c, &d), &env(), &play, &stop, &mut rng).unwrap();
    assert_eq!(est.rounds, 1);
    assert!(!est.budget_exhausted);
}

#[test]
fn tiny_budget_is_flagged() {
    let c = pool(PolicyClass::Cooperator, &[WANDER, SHOOT]);
    let d = pool(PolicyClass::Defector, &[SHOOT, WANDER]);
    let play = PlayoutSpec {
        episodes_per_draw: 1,
        episode_length: 60,
        epsilon: 0.5,
    };
    let stop = StopRule {
        tolerance: Tolerance::Absolute(1e-9),
        max_episodes_per_cell: 4,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let est = estimate_payoffs((&c, &d), &env(), &play, &stop, &mut rng).unwrap();
    assert!(est.budget_exhausted);
    assert!(est.matrix.r.se.is_finite());
}

#[test]
fn estimate_is_seed_deterministic() {
    let c = pool(PolicyClass::Cooperator, &[WANDER, SHOOT]);
    let d = pool(PolicyClass::Defector, &[SHOOT]);
    let play = PlayoutSpec {
        episodes_per_draw: 2,
        episode_length: 60,
        epsilon: 0.3,
    };
    let stop = StopRule {
        tolerance: Tolerance::Absolute(0.5),
        max_episodes_per_cell: 40,
    };
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        estimate_payoffs((&c, &d), &env(), &play, &stop, &mut rng).unwrap()
    };
    assert_eq!(run().matrix, run().matrix);
}
