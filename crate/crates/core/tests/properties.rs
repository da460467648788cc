mod common;

use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssdlab_core::egta::{classify_matrix, DilemmaClass, EmpiricalPayoffMatrix};
use ssdlab_core::engine::{apply_kinematics, load_map, render_observation, WorldState, OBS_LEN};
use ssdlab_core::games::{
    beam_use_rate, capture_mean, Event, GameRules, GatheringParams, WolfpackParams,
};
use ssdlab_core::harness::{run_episode, Environment, Mode};
use ssdlab_core::learner::{
    epsilon_greedy, EpsilonSchedule, ReplayBuffer, ScriptedController, Transition,
};
use ssdlab_core::{Action, GameKind, Observation};

use common::{random_map_text, random_world, reference_render, ssd_oracle};

fn action() -> impl Strategy<Value = Action> {
    (0usize..Action::COUNT).prop_map(|i| Action::ALL[i])
}

fn joint_script(len: usize) -> impl Strategy<Value = Vec<[Action; 2]>> {
    prop::collection::vec([action(), action()], 1..len)
}

fn random_env(seed: u64, kind: GameKind, rules: GameRules) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = random_map_text(&mut rng, 12, 10);
    let map = Arc::new(load_map(&text).unwrap());
    assert_eq!(rules.kind(), kind);
    Environment::new(rules, map, seed).unwrap()
}

fn gathering(n_apple: u32, n_tagged: u32) -> GameRules {
    GameRules::Gathering(GatheringParams { n_apple, n_tagged })
}

fn wolfpack(radius: u32) -> GameRules {
    GameRules::Wolfpack(WolfpackParams {
        capture_radius: radius,
        r_lone: 1.0,
        r_team: 3.0,
    })
}

fn assert_occupancy(state: &WorldState) {
    let mut seen = HashSet::new();
    for e in state.entities.iter().filter(|e| e.active) {
        assert!(state.map().is_floor(e.position), "entity {} on a wall", e.id);
        assert!(seen.insert(e.position), "two entities share {:?}", e.position);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_matches_paint_crop_rotate(seed in any::<u64>()) {
        let state = random_world(seed);
        for agent in 0..2 {
            if !state.entities[agent].active {
                continue;
            }
            let got = render_observation(&state, agent).unwrap();
            let want = reference_render(&state, agent);
            prop_assert_eq!(got.pixels(), want.pixels());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kinematics_preserve_occupancy(seed in any::<u64>(), script in joint_script(60)) {
        let mut state = random_world(seed);
        // random_world may stack inactive entities; start from a legal world
        for e in state.entities.iter_mut() {
            e.active = true;
        }
        let mut cells = HashSet::new();
        prop_assume!(state.entities.iter().all(|e| cells.insert(e.position)));
        let prey = state.entities.len() > 2;
        for joint in script {
            let mut j = joint.to_vec();
            if prey {
                j.push(joint[0]);
            }
            state.begin_frame(&j).unwrap();
            assert_occupancy(&state);
            state.end_frame();
            apply_kinematics(&mut state, &j).unwrap();
            assert_occupancy(&state);
        }
    }

    #[test]
    fn rollouts_are_deterministic(seed in any::<u64>(), script in joint_script(80), wolf in any::<bool>()) {
        let (kind, rules) = if wolf {
            (GameKind::Wolfpack, wolfpack(2))
        } else {
            (GameKind::Gathering, gathering(3, 4))
        };
        let mut a = random_env(seed, kind, rules.clone());
        let mut b = random_env(seed, kind, rules);
        for joint in &script {
            let oa = a.step(*joint).unwrap();
            let ob = b.step(*joint).unwrap();
            prop_assert_eq!(oa, ob);
            prop_assert_eq!(a.state(), b.state());
            assert_occupancy(a.state());
        }
    }

    #[test]
    fn four_left_turns_are_identity(seed in any::<u64>(), agent in 0usize..2) {
        let mut state = random_world(seed);
        for e in state.entities.iter_mut() {
            e.active = true;
        }
        let before = state.entities[agent].clone();
        let n = state.entities.len();
        for _ in 0..4 {
            let mut j = vec![Action::StandStill; n];
            j[agent] = Action::RotateLeft;
            apply_kinematics(&mut state, &j).unwrap();
            prop_assert_eq!(state.entities[agent].position, before.position);
        }
        prop_assert_eq!(state.entities[agent].orientation, before.orientation);
    }

    #[test]
    fn gathering_rewards_equal_apples_collected(
        seed in any::<u64>(),
        script in joint_script(150),
        n_apple in 1u32..8,
        n_tagged in 1u32..8,
    ) {
        let mut env = random_env(seed, GameKind::Gathering, gathering(n_apple, n_tagged));
        let mut taken_at: Vec<Option<u64>> = vec![None; env.state().apple_sites().len()];
        for joint in script {
            let frame = env.state().step;
            let (out, _) = env.step(joint).unwrap();
            let mut collected = [0.0; 2];
            for e in &out.events {
                if let Event::AppleCollected { agent, site } = e {
                    collected[*agent] += 1.0;
                    if let Some(t) = taken_at[*site] {
                        // reappears n_apple frames later, never earlier
                        prop_assert!(frame - t > n_apple as u64);
                    }
                    taken_at[*site] = Some(frame);
                }
            }
            prop_assert_eq!(out.rewards, collected);
            for (site, t) in taken_at.iter().enumerate() {
                if let Some(t) = *t {
                    prop_assert_eq!(env.state().apple_present(site), frame - t >= n_apple as u64);
                }
            }
        }
    }

    #[test]
    fn tagged_player_sits_out_exactly_n_frames(seed in any::<u64>(), n_tagged in 1u32..10) {
        let mut env = random_env(seed, GameKind::Gathering, gathering(5, n_tagged));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tag: Option<(u64, usize)> = None;
        for _ in 0..1000 {
            let frame = env.state().step;
            // mostly beams so that tags actually happen
            let pick = |rng: &mut ChaCha8Rng| {
                if rand::Rng::random_bool(rng, 0.5) {
                    Action::UseBeam
                } else {
                    Action::ALL[rand::Rng::random_range(rng, 0..8)]
                }
            };
            let joint = [pick(&mut rng), pick(&mut rng)];
            let (out, _) = env.step(joint).unwrap();
            if let Some((t, k)) = tag {
                // out during frames t+1 ..= t+n, back for frame t+n+1
                prop_assert_eq!(env.state().entities[k].active, frame >= t + n_tagged as u64);
                if frame >= t + n_tagged as u64 {
                    break;
                }
            } else if let Some(k) = out.events.iter().find_map(|e| match e {
                Event::Tagged { target, .. } => Some(*target),
                _ => None,
            }) {
                prop_assert!(!env.state().entities[k].active);
                tag = Some((frame, k));
            }
        }
    }

    #[test]
    fn capture_payouts_follow_pack_size(seed in any::<u64>(), script in joint_script(200), radius in 0u32..5) {
        let mut env = random_env(seed, GameKind::Wolfpack, wolfpack(radius));
        for joint in script {
            let (out, _) = env.step(joint).unwrap();
            let allowed = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 3.0]];
            prop_assert!(allowed.contains(&out.rewards), "{:?}", out.rewards);
            let captures: Vec<u8> = out.events.iter().filter_map(|e| match e {
                Event::Capture { wolves, .. } => Some(*wolves),
                _ => None,
            }).collect();
            match captures.as_slice() {
                [] => prop_assert_eq!(out.rewards, [0.0, 0.0]),
                [2] => prop_assert_eq!(out.rewards, [3.0, 3.0]),
                [1] => prop_assert_eq!(out.rewards[0] + out.rewards[1], 1.0),
                other => prop_assert!(false, "unexpected captures {:?}", other),
            }
        }
    }

    #[test]
    fn episode_metrics_stay_in_bounds(seed in any::<u64>(), len in 1usize..120, wolf in any::<bool>()) {
        let (kind, rules) = if wolf {
            (GameKind::Wolfpack, wolfpack(3))
        } else {
            (GameKind::Gathering, gathering(2, 3))
        };
        let mut env = random_env(seed, kind, rules);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut p0 = ScriptedController::new(vec![Action::UseBeam, Action::StepForward, Action::RotateLeft]);
        let mut p1 = ScriptedController::new(vec![Action::StepLeft, Action::UseBeam]);
        let log = run_episode(&mut env, [&mut p0, &mut p1], Mode::Eval { epsilon: 0.5 }, len, &mut rng).unwrap();
        prop_assert_eq!(log.len(), len);
        for i in 0..2 {
            let r = beam_use_rate(&log, i);
            prop_assert!((0.0..=1.0).contains(&r));
        }
        if let Some(m) = capture_mean(log.captures()) {
            prop_assert!((1.0..=2.0).contains(&m));
        }
    }

    #[test]
    fn classifier_is_total_and_matches_oracle(r in -10.0f64..10.0, p in -10.0f64..10.0, s in -10.0f64..10.0, t in -10.0f64..10.0) {
        let m = EmpiricalPayoffMatrix::exact(r, p, s, t);
        let class = classify_matrix(&m);
        let conds = ssd_oracle(r, p, s, t);
        let expected = if !conds.iter().all(|&c| c) {
            DilemmaClass::NotSocialDilemma(
                (1..=4u8).filter(|&k| !conds[k as usize - 1]).collect(),
            )
        } else if t > r && p > s {
            DilemmaClass::PrisonersDilemma
        } else if t > r {
            DilemmaClass::Chicken
        } else {
            DilemmaClass::StagHunt
        };
        prop_assert_eq!(&class, &expected);
        prop_assert_eq!(classify_matrix(&m), class);
    }

    #[test]
    fn greedy_action_ignores_positive_scaling(q in prop::collection::vec(-5.0f64..5.0, 8), k in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = epsilon_greedy(&q, 0.0, &mut rng);
        let scaled: Vec<f64> = q.iter().map(|v| v * k).collect();
        prop_assert_eq!(epsilon_greedy(&scaled, 0.0, &mut rng), a);
    }

    #[test]
    fn replay_buffer_evicts_oldest_first(cap in 1usize..20, n in 0usize..60) {
        let mut buf = ReplayBuffer::new(cap);
        for i in 0..n {
            buf.store(Transition {
                obs: Observation::blank(0),
                action: Action::StandStill,
                reward: i as f64,
                next_obs: Observation::blank(0),
                terminal: false,
            });
            prop_assert!(buf.len() <= cap);
        }
        let kept: Vec<f64> = buf.iter().map(|t| t.reward).collect();
        let want: Vec<f64> = (n.saturating_sub(cap)..n).map(|i| i as f64).collect();
        prop_assert_eq!(kept, want);
    }

    #[test]
    fn epsilon_schedule_is_monotone(start in 0.0f64..1.0, end in 0.0f64..1.0, decay in 0u64..1000, a in 0u64..2000, b in 0u64..2000) {
        prop_assume!(end <= start);
        let s = EpsilonSchedule { start, end, decay_steps: decay };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(s.epsilon_at(hi) <= s.epsilon_at(lo));
        if hi >= decay {
            prop_assert_eq!(s.epsilon_at(hi), end);
        }
    }
}

#[test]
fn observation_tensor_has_fixed_shape() {
    let state = random_world(11);
    let obs = render_observation(&state, 0).unwrap();
    let t = obs.tensor();
    assert_eq!(t.len(), OBS_LEN);
    assert!(t.iter().all(|v| (0.0..=1.0).contains(v)));
}
