use proptest::prelude::*;
use railframe::episode::{RAIL_X, RAIL_Z};
use railframe::harness::{evaluate_grid, gen_dataset, ExperimentConfig, GridSpec};
use railframe::railsim::{observe, reset, run_episode, step, Expert, HaltReason, StageFlags, StartCondition, WorldConfig};
use railframe::Execution;

fn start(world: &WorldConfig, x: f64, level: usize, h: f64, dx: f64, seed: u64) -> StartCondition {
    StartCondition {
        rails: [x, world.shelf_z(level) + h],
        shelf_index: level,
        bottle_x: x + dx,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Moving the whole world and the start together does not change what
    /// the expert achieves or what the camera sees.
    #[test]
    fn expert_outcome_is_translation_invariant(
        x in 1.1f64..1.8,
        level in 1usize..5,
        h in 0.115f64..0.125,
        dx in -0.008f64..0.008,
        shift_x in -0.5f64..0.5,
        seed in any::<u64>(),
    ) {
        let world = WorldConfig::env_b();
        let shift_z = 0.0625;
        let moved = world.translated(shift_x, shift_z);
        let a = start(&world, x, level, h, dx, seed);
        let b = StartCondition {
            rails: [a.rails[0] + shift_x, a.rails[1] + shift_z],
            bottle_x: a.bottle_x + shift_x,
            ..a
        };
        let ra = run_episode(&world, &a, 0, &mut Expert::new(&world), world.max_steps).unwrap();
        let rb = run_episode(&moved, &b, 0, &mut Expert::new(&moved), moved.max_steps).unwrap();
        prop_assert_eq!(ra.flags, rb.flags);
        prop_assert_eq!(ra.score(), 4);
        prop_assert!((ra.steps_used() as i64 - rb.steps_used() as i64).abs() <= 2);
        let sa = reset(&world, a.rails, level, a.bottle_x, seed).unwrap();
        let sb = reset(&moved, b.rails, level, b.bottle_x, seed).unwrap();
        let (oa, ob) = (observe(&world, &sa).to_array(), observe(&moved, &sb).to_array());
        for (u, v) in oa.iter().zip(&ob) {
            prop_assert!((u - v).abs() <= 1e-9);
        }
    }

    /// Stage flags never switch off and always form a prefix.
    #[test]
    fn flags_are_monotone_under_random_commands(seed in any::<u64>(), cmds in prop::collection::vec(prop::array::uniform5(-0.05f64..0.05), 50)) {
        let world = WorldConfig::env_b();
        let mut s = reset(&world, [1.4, world.shelf_z(2) + 0.12], 2, 1.4, seed).unwrap();
        let mut prev = StageFlags::default();
        for c in cmds {
            let mut cmd = s.robot;
            for j in 0..5 {
                cmd[j] += c[j];
            }
            s = step(&world, &s, &cmd).unwrap();
            prop_assert!(s.flags.is_ordered());
            prop_assert!(s.flags.dominates(&prev));
            prev = s.flags;
            if s.halted.is_some() {
                break;
            }
        }
    }
}

#[test]
fn expert_keeps_x_nearly_fixed() {
    let cfg = ExperimentConfig::default();
    let episodes = gen_dataset(&cfg, 40, 5, Execution::Parallel).unwrap();
    let range = |dim: usize| {
        episodes
            .iter()
            .map(|e| {
                let v: Vec<f64> = e.steps().iter().map(|s| s.state[dim]).collect();
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / episodes.len() as f64
    };
    let (x, z) = (range(RAIL_X), range(RAIL_Z));
    assert!(z >= 10.0 * x, "mean X range {x}, mean Z range {z}");
    for e in &episodes {
        assert!((150..=400).contains(&e.len()), "episode {} has {} steps", e.id, e.len());
    }
}

#[test]
fn expert_through_harness_scores_four_on_quick_grid() {
    let cfg = ExperimentConfig::default();
    let grid = GridSpec::default().subsampled(4);
    let records = evaluate_grid("expert", || Expert::new(&cfg.env_b), &grid, &cfg, &[0, 1], Execution::Parallel).unwrap();
    assert_eq!(records.len(), 2 * 6 * 9);
    assert_eq!(records.iter().filter(|r| !r.ood).count(), 2 * 36);
    for r in &records {
        assert_eq!(r.score, 4, "{r:?}");
        assert_eq!(r.halt, None);
        assert_eq!(r.score as usize, r.flags.as_array().iter().filter(|f| **f).count());
    }
}

#[test]
fn unsafe_controller_is_halted() {
    let cfg = ExperimentConfig::default();
    let world = &cfg.env_b;
    let s = start(world, 1.4, 2, 0.12, 0.0, 1);
    // Drive straight down into the board while inside the cabinet.
    let mut dive = |sim: &railframe::railsim::SimState, _: &railframe::episode::TaskObservation| {
        let mut c = sim.robot;
        c[RAIL_Z] -= 1.0;
        Ok(c)
    };
    let r = run_episode(world, &s, 0, &mut dive, world.max_steps).unwrap();
    assert_eq!(r.halt, Some(HaltReason::SafetyViolation));
    assert_eq!(r.score(), 0);
}
