use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use typek_core::equilibrium::DeviationMode;
use typek_core::rational::{int, ratio};
use typek_core::simulate::limit_average_of_path;
use typek_core::strategy::{constant_strategy, myopic_best_responder};
use typek_core::*;

fn plan(game: &StageGame, group: &str, path: &str) -> CoordinationPlan {
    CoordinationPlan::parse(game, group, path).unwrap()
}

/// Stationary comparison from one deviation phase onward: conforming earns
/// `u0` now and the path average afterwards; deviating earns `u0 + gain`
/// now and the minimax payoff afterwards.
fn deviation_pays(t: &DiscountThreshold, delta: &Rational) -> bool {
    let future = delta / (int(1) - delta);
    t.gain > future * &t.per_round_loss
}

#[test]
fn threshold_boundary_on_fixtures() {
    let cases = [
        (fig4(), "X,Y", "L,R|R,L"),
        (fig1(), "X,Y", "C,C"),
        (fig4(), "X,Y,Z", "R,R,L"),
    ];
    for (g, group, path) in cases {
        let p = plan(&g, group, path);
        let v = MinimaxKind::default().point(&g);
        for &m in p.group() {
            let t = discount_threshold(&g, &p, m, &v).unwrap();
            let above = &t.delta_star + ratio(1, 100);
            assert!(!deviation_pays(&t, &above), "{group} {path} member {m}");
            if t.delta_star > ratio(1, 100) {
                let below = &t.delta_star - ratio(1, 100);
                assert!(deviation_pays(&t, &below), "{group} {path} member {m}");
                let r = verify_type_k(&g, &p, &VerifyOptions::default().with_discount(Some(below)))
                    .unwrap();
                assert!(!r.verdict());
            }
        }
        let top = p
            .group()
            .iter()
            .map(|&m| discount_threshold(&g, &p, m, &v).unwrap().delta_star)
            .max()
            .unwrap();
        let r = verify_type_k(
            &g,
            &p,
            &VerifyOptions::default().with_discount(Some(top + ratio(1, 100))),
        )
        .unwrap();
        assert_eq!(r.verdict(), r.is_type_k(), "{group} {path}");
    }
}

#[test]
fn fig1_deviation_through_machines() {
    let g = fig1();
    let cc = plan(&g, "X,Y", "C,C");
    let z = myopic_best_responder(&g, 2, &cc).unwrap();
    let conform = [
        grim_trigger(&g, &cc, 0).unwrap(),
        grim_trigger(&g, &cc, 1).unwrap(),
        z.clone(),
    ];
    let defect = [
        constant_strategy(&g, 0, 0).unwrap(),
        grim_trigger(&g, &cc, 1).unwrap(),
        z,
    ];
    let t = discount_threshold(&g, &cc, 0, &minimax_point(&g)).unwrap();
    assert_eq!(t.delta_star, ratio(1, 4));
    for (delta, pays) in [
        (ratio(1, 10), true),
        (ratio(1, 5), true),
        (ratio(3, 10), false),
        (ratio(1, 2), false),
    ] {
        let on = deterministic_outcome(&g, &conform)
            .unwrap()
            .discounted_value(&g, &delta);
        let off = deterministic_outcome(&g, &defect)
            .unwrap()
            .discounted_value(&g, &delta);
        assert_eq!(off.get(0) > on.get(0), pays, "delta {delta}");
        assert_eq!(deviation_pays(&t, &delta), pays);
    }
    // at the threshold itself the two streams tie
    let d = ratio(1, 4);
    assert_eq!(
        deterministic_outcome(&g, &conform)
            .unwrap()
            .discounted_value(&g, &d)
            .get(0),
        deterministic_outcome(&g, &defect)
            .unwrap()
            .discounted_value(&g, &d)
            .get(0)
    );
}

#[test]
fn witnesses_replay_as_improvements() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = 0;
    for _ in 0..60 {
        let g = random_integer_game(&[2, 2, 2], -5, 5, &mut rng).unwrap();
        let joint = g.joint_actions(&[0, 1]);
        for a in &joint {
            let p = CoordinationPlan::new(vec![0, 1], vec![a.clone()]).unwrap();
            let r = verify_type_k(&g, &p, &VerifyOptions::default()).unwrap();
            let Some(w) = r.deviation_witness else {
                continue;
            };
            seen += 1;
            let alt = CoordinationPlan::new(vec![0, 1], w.path.clone()).unwrap();
            let outsider = myopic_best_responder(&g, 2, &alt).unwrap();
            let replay = limit_average_of_path(&g, &alt, &[outsider]).unwrap();
            assert_eq!(replay, w.payoff);
            for m in [0, 1] {
                assert!(replay.get(m) > r.profile_payoff.get(m));
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn strict_mode_rejects_the_alternating_plan() {
    let g = fig4();
    let alt = plan(&g, "X,Y", "L,R|R,L");
    let r = verify_type_k(
        &g,
        &alt,
        &VerifyOptions::default().with_mode(DeviationMode::Strict),
    )
    .unwrap();
    assert!(!r.is_type_k());
    assert!(verify_type_k(&g, &alt, &VerifyOptions::default())
        .unwrap()
        .is_type_k());
}

#[test]
fn fixture_equilibria_on_group_frontier() {
    let g4 = fig4();
    let frontier = group_frontier(&g4, &[0, 1]).unwrap();
    for p in [[9, 1, -1], [1, 9, -1], [5, 5, -1]] {
        assert!(frontier.contains(&PayoffVector::from_ints(&p)));
    }
    let plain = PayoffGeometry::feasible_hull(&g4).unwrap();
    let pts: Vec<PayoffVector> = [[3, 3, 4], [5, 5, -1]]
        .iter()
        .map(|p| PayoffVector::from_ints(p))
        .collect();
    assert_eq!(
        project_points(&pts, (0, 1)).unwrap(),
        vec![[int(3), int(3)], [int(5), int(5)]]
    );
    assert!(plain.folk_region_member(&pts[0]).unwrap());
}

/// A bounded deviation search only certifies optimality against paths of
/// that period. This fig4 plan passes at period 2 but a period-5 mixture
/// improves all three players, so it is off the group frontier.
#[test]
fn bounded_search_can_miss_longer_deviations() {
    let g = fig4();
    let p = plan(&g, "X,Y,Z", "R,L,R|R,R,R");
    let short = verify_type_k(&g, &p, &VerifyOptions::default().with_max_period(2)).unwrap();
    assert!(short.is_type_k());
    assert_eq!(
        short.profile_payoff,
        PayoffVector::new(vec![ratio(5, 2), ratio(11, 2), ratio(1, 2)])
    );
    assert!(!group_frontier(&g, &[0, 1, 2])
        .unwrap()
        .contains(&short.profile_payoff));
    let long = verify_type_k(&g, &p, &VerifyOptions::default().with_max_period(5)).unwrap();
    assert!(!long.is_type_k());
    let w = long.deviation_witness.unwrap();
    for m in 0..3 {
        assert!(w.payoff.get(m) > short.profile_payoff.get(m));
    }
}

/// On 100 random games: an equilibrium on its group frontier survives the
/// deviation search at every period, and one off the frontier is beaten by
/// some longer path (the bounded search certifies only its own period).
#[test]
fn random_equilibria_against_group_frontier() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a7e);
    let (mut on, mut off, mut refuted) = (0, 0, 0);
    for _ in 0..100 {
        let g = random_integer_game(&[2, 2, 2], -5, 5, &mut rng).unwrap();
        for r in enumerate_type_k(&g, &VerifyOptions::default().with_max_period(2)).unwrap() {
            assert_eq!(
                r.group_pareto_optimal,
                Some(
                    group_frontier(&g, r.plan.group())
                        .unwrap()
                        .contains(&r.profile_payoff)
                )
            );
            if r.group_pareto_optimal == Some(true) {
                on += 1;
                let longer = VerifyOptions::default().with_max_period(4);
                assert!(verify_type_k(&g, &r.plan, &longer).unwrap().eq5_holds);
            } else {
                off += 1;
                let longer = VerifyOptions::default().with_max_period(3);
                if !verify_type_k(&g, &r.plan, &longer).unwrap().eq5_holds {
                    refuted += 1;
                }
            }
        }
    }
    assert!(on > 0 && off > 0);
    assert!(refuted > 0);
}
