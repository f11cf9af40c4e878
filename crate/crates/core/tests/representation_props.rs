use proptest::prelude::*;
use railframe::episode::{EnvLabel, Episode, JointVector, Step, TaskObservation, RAIL_X, RAIL_Z};
use railframe::representation::{make_chunks, EpisodeOrigin, RepresentationStrategy, StrategyKind};

fn joint() -> impl Strategy<Value = JointVector> {
    prop::array::uniform5(-3.0f64..3.0).prop_map(JointVector)
}

fn kind() -> impl Strategy<Value = StrategyKind> {
    prop::sample::select(StrategyKind::ALL.to_vec())
}

fn episode_from(states: &[JointVector], actions: &[JointVector]) -> Episode {
    let steps = states
        .iter()
        .zip(actions)
        .enumerate()
        .map(|(t, (s, a))| Step {
            t,
            state: *s,
            action: *a,
            obs: TaskObservation::default(),
        })
        .collect();
    Episode::new(0, EnvLabel::B, steps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn decode_inverts_encode(kind in kind(), a in joint(), s in joint(), o in joint()) {
        let strat = RepresentationStrategy::new(kind);
        let origin = EpisodeOrigin(o);
        let back = strat.decode_action(&strat.encode_action(&a, &s, &origin), &s, &origin);
        for d in 0..5 {
            prop_assert!((back[d] - a[d]).abs() <= 1e-12);
        }
    }

    #[test]
    fn non_rail_dims_untouched(kind in kind(), a in joint(), s in joint(), o in joint()) {
        let strat = RepresentationStrategy::new(kind);
        let origin = EpisodeOrigin(o);
        let enc_a = strat.encode_action(&a, &s, &origin);
        let enc_s = strat.encode_state(&s, &origin);
        for d in 2..5 {
            prop_assert_eq!(enc_a[d].to_bits(), a[d].to_bits());
            prop_assert_eq!(enc_s[d].to_bits(), s[d].to_bits());
        }
    }

    /// Shifting a whole episode along the rails leaves relative encodings
    /// unchanged (up to rounding) and moves absolute ones by the shift.
    #[test]
    fn rail_shift_equivariance(
        states in prop::collection::vec(joint(), 1..20),
        actions in prop::collection::vec(joint(), 20),
        dx in -2.0f64..2.0,
        dz in -2.0f64..2.0,
        kind in kind(),
        h in 1usize..6,
    ) {
        let actions = &actions[..states.len()];
        let shift = |v: &JointVector| {
            let mut w = *v;
            w[RAIL_X] += dx;
            w[RAIL_Z] += dz;
            w
        };
        let base = episode_from(&states, actions);
        let moved = episode_from(
            &states.iter().map(shift).collect::<Vec<_>>(),
            &actions.iter().map(shift).collect::<Vec<_>>(),
        );
        let strat = RepresentationStrategy::new(kind);
        let a = make_chunks(&base, &strat, h).unwrap();
        let b = make_chunks(&moved, &strat, h).unwrap();
        for (ca, cb) in a.iter().zip(&b) {
            prop_assert_eq!(&ca.mask, &cb.mask);
            let offset = |d: usize| if kind == StrategyKind::AbsAbs && d == RAIL_X { dx }
                else if kind == StrategyKind::AbsAbs && d == RAIL_Z { dz } else { 0.0 };
            for d in 0..5 {
                let state_expected = if kind == StrategyKind::ZeroChunk { 0.0 } else { offset(d) };
                prop_assert!((cb.state_enc[d] - ca.state_enc[d] - state_expected).abs() <= 1e-9);
                for (xa, xb) in ca.action_chunk.iter().zip(&cb.action_chunk) {
                    prop_assert!((xb[d] - xa[d] - offset(d)).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn chunk_mask_is_a_prefix(states in prop::collection::vec(joint(), 1..15), h in 1usize..20, kind in kind()) {
        let ep = episode_from(&states, &states);
        let chunks = make_chunks(&ep, &RepresentationStrategy::new(kind), h).unwrap();
        prop_assert_eq!(chunks.len(), states.len());
        for c in &chunks {
            prop_assert_eq!(c.action_chunk.len(), h);
            prop_assert_eq!(c.real_actions(), h.min(states.len() - c.t));
            prop_assert!(c.mask.windows(2).all(|w| w[0] || !w[1]));
            let last_real = c.action_chunk[c.real_actions() - 1];
            prop_assert!(c.action_chunk[c.real_actions()..].iter().all(|a| *a == last_real));
        }
    }
}
