use num_traits::{One, Zero};
use proptest::prelude::*;
use typek_core::equilibrium::{is_stage_ne, lyndon_words};
use typek_core::rational::ratio;
use typek_core::simulate::{limit_average_of_path, path_average};
use typek_core::strategy::{
    fig2_coordinator, myopic_best_responder, phase_profiles, CoordinationSide,
};
use typek_core::*;

fn game_from(counts: &[usize], cells: &[i64]) -> StageGame {
    let n = counts.len();
    let players = (0..n).map(|i| format!("P{i}")).collect();
    let actions = counts
        .iter()
        .map(|&m| (0..m).map(|a| format!("a{a}")).collect())
        .collect();
    let mut next = cells.iter().copied();
    StageGame::from_fn("prop", players, actions, |_| {
        PayoffVector::from_ints(&(0..n).map(|_| next.next().unwrap()).collect::<Vec<_>>())
    })
    .unwrap()
}

fn any_game() -> impl Strategy<Value = StageGame> {
    prop::collection::vec(1usize..=3, 2..=3).prop_flat_map(|counts| {
        let len = counts.iter().product::<usize>() * counts.len();
        (Just(counts), prop::collection::vec(-6i64..=6, len)).prop_map(|(c, v)| game_from(&c, &v))
    })
}

fn game_222() -> impl Strategy<Value = StageGame> {
    prop::collection::vec(-5i64..=5, 24).prop_map(|v| game_from(&[2, 2, 2], &v))
}

/// Exact maximin of a player with two actions: the optimum of a concave
/// piecewise-linear function sits at an endpoint or a crossing of two lines.
fn two_action_maximin(game: &StageGame, player: usize) -> Rational {
    let cols: Vec<(Rational, Rational)> = game
        .joint_actions(&game.opponents(player))
        .into_iter()
        .map(|others| {
            let at = |a: usize| {
                let mut full = others.clone();
                full.insert(player, a);
                game.payoff(&ActionProfile::new(full))
                    .unwrap()
                    .get(player)
                    .clone()
            };
            (at(0), at(1))
        })
        .collect();
    let value = |p: &Rational| {
        cols.iter()
            .map(|(a, b)| p * a + (Rational::one() - p) * b)
            .min()
            .unwrap()
    };
    let mut candidates = vec![Rational::zero(), Rational::one()];
    for (i, (a1, b1)) in cols.iter().enumerate() {
        for (a2, b2) in &cols[i + 1..] {
            // p a1 + (1-p) b1 = p a2 + (1-p) b2
            let denom = (a1 - b1) - (a2 - b2);
            if !denom.is_zero() {
                let p = (b2 - b1) / denom;
                if p >= Rational::zero() && p <= Rational::one() {
                    candidates.push(p);
                }
            }
        }
    }
    candidates.iter().map(value).max().unwrap()
}

/// Stability by direct evaluation at a fixed small perturbation.
fn stable_at_eps(game: &StageGame, ne: &ActionProfile, eps: &Rational) -> bool {
    let n = game.num_players();
    let u = |p: &ActionProfile, i: usize| game.payoff(p).unwrap().get(i).clone();
    let base = ne.as_slice();
    for j in 0..n {
        for alt in (0..game.num_actions(j)).filter(|&a| a != base[j]) {
            if u(&ne.with(j, alt), j) >= u(ne, j) {
                return false;
            }
            for k in (0..n).filter(|&k| k != j) {
                let mixed = |b: usize| {
                    let p = ne.with(k, b);
                    (Rational::one() - eps) * u(&p, k) + eps * u(&p.with(j, alt), k)
                };
                let keep = mixed(base[k]);
                if (0..game.num_actions(k)).any(|b| mixed(b) > keep) {
                    return false;
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn document_round_trip(g in any_game()) {
        let back = parse_game(&to_document(&g)).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn payoff_totality(g in any_game()) {
        let mut count = 0;
        for p in g.profiles() {
            prop_assert_eq!(g.payoff(&p).unwrap().len(), g.num_players());
            prop_assert_eq!(g.profile_at(g.index_of(p.as_slice()).unwrap()), p);
            count += 1;
        }
        prop_assert_eq!(count, g.num_profiles());
    }

    #[test]
    fn minimax_bounds(g in any_game()) {
        let pure = minimax_point(&g);
        let corr = correlated_minimax_point(&g);
        for i in 0..g.num_players() {
            let column: Vec<&Rational> = g.payoff_table().iter().map(|u| u.get(i)).collect();
            let lo = *column.iter().min().unwrap();
            let hi = *column.iter().max().unwrap();
            prop_assert!(lo <= pure.get(i) && pure.get(i) <= hi);
            prop_assert!(corr.get(i) <= pure.get(i));
            // a best reply to the punishers earns exactly v_i
            let m = minimax_value(&g, i).unwrap();
            prop_assert_eq!(g.payoff(&ActionProfile::new(m.profile())).unwrap().get(i), &m.value);
            // the player can secure the pure maximin, which is at most v_i
            let maximin = (0..g.num_actions(i))
                .map(|a| g.profiles().filter(|p| p.action(i) == a).map(|p| g.payoff(&p).unwrap().get(i).clone()).min().unwrap())
                .max()
                .unwrap();
            prop_assert!(&maximin <= corr.get(i));
        }
    }

    #[test]
    fn correlated_minimax_matches_two_action_oracle(g in game_222()) {
        for i in 0..3 {
            prop_assert_eq!(correlated_minimax_value(&g, i).unwrap().value, two_action_maximin(&g, i));
        }
    }

    #[test]
    fn stability_matches_perturbation_oracle(g in game_222()) {
        let eps = ratio(1, 100);
        for ne in stage_pure_ne(&g) {
            prop_assert_eq!(stage_ne_stability(&g, &ne).unwrap(), stable_at_eps(&g, &ne, &eps));
        }
    }

    #[test]
    fn type_k_payoffs_dominate_minimax(g in game_222()) {
        for r in enumerate_type_k(&g, &VerifyOptions::default().with_max_period(2)).unwrap() {
            for i in 0..3 {
                let (u, v) = (r.profile_payoff.get(i), r.minimax_point.get(i));
                let ok = if r.plan.contains(i) { u > v } else { u >= v };
                prop_assert!(ok, "player {} payoff {} minimax {}", i, u, v);
            }
        }
    }

    #[test]
    fn multiple_stage_nes_give_type_k_equilibria(g in game_222()) {
        prop_assume!(g.profiles().filter(|p| is_stage_ne(&g, p.as_slice())).count() >= 2);
        prop_assert!(!enumerate_type_k(&g, &VerifyOptions::default().with_max_period(2)).unwrap().is_empty());
    }

    #[test]
    fn hull_idempotent_and_minimax_outside_folk(g in any_game()) {
        prop_assume!(g.num_players() <= 4);
        let geo = PayoffGeometry::feasible_hull(&g).unwrap();
        let again = PayoffGeometry::from_points(geo.vertices().to_vec(), geo.minimax_point().clone()).unwrap();
        prop_assert_eq!(again.vertices(), geo.vertices());
        for u in g.payoff_table() {
            prop_assert!(geo.contains(u).unwrap());
        }
        prop_assert!(!geo.folk_region_member(geo.minimax_point()).unwrap());
    }

    #[test]
    fn simulated_average_matches_limit_average(g in game_222(), word in 0usize..10) {
        let words = lyndon_words(4, 2);
        let joint = g.joint_actions(&[0, 1]);
        let path: Vec<Vec<usize>> = words[word].iter().map(|&j| joint[j].clone()).collect();
        let plan = CoordinationPlan::new(vec![0, 1], path).unwrap();
        let outsider = myopic_best_responder(&g, 2, &plan).unwrap();
        let limit = limit_average_of_path(&g, &plan, std::slice::from_ref(&outsider)).unwrap();
        prop_assert_eq!(&limit, &path_average(&g, &phase_profiles(&g, plan.group(), plan.path())));
        let strategies = vec![grim_trigger(&g, &plan, 0).unwrap(), grim_trigger(&g, &plan, 1).unwrap(), outsider];
        let horizon = 6 * plan.period() - 1;
        prop_assert_eq!(run(&g, &strategies, horizon, 1, None).unwrap().averages, limit);
    }

    #[test]
    fn grim_punishment_is_absorbing(g in game_222(), dev_round in 0usize..5) {
        let plan = CoordinationPlan::new(vec![0, 1], vec![vec![0, 0], vec![1, 1]]).unwrap();
        let grim = grim_trigger(&g, &plan, 1).unwrap();
        let punish = minimax_value(&g, 1).unwrap().best_reply;
        let mut r = grim.runner();
        for t in 0..100 {
            let x = if t == dev_round { 1 - plan.phase(t)[0] } else { plan.phase(t)[0] };
            let y = r.current_distribution().as_point().unwrap();
            if t > dev_round {
                prop_assert_eq!(y, punish);
            }
            r.observe(g.index_of(&[x, y, 0]).unwrap());
        }
    }

    #[test]
    fn coordinated_fig2_machines_stay_locked(seed in any::<u64>()) {
        let g = fig2();
        let machines = [fig2_coordinator(CoordinationSide::Row), fig2_coordinator(CoordinationSide::Column)];
        let trace = run(&g, &machines, 60, seed, None).unwrap().trace;
        if let Some(first) = trace.iter().position(|(p, _)| p.action(0) != p.action(1)) {
            for (p, _) in &trace[first..] {
                prop_assert_eq!(p, &trace[first].0);
            }
        }
    }
}

#[test]
fn type_k_phase_profiles_are_best_replies() {
    let g = fig4();
    for r in enumerate_type_k(&g, &VerifyOptions::default().with_max_period(2)).unwrap() {
        for full in &r.phase_profiles {
            for o in r.plan.outsiders(3) {
                let alt = (0..2).map(|a| {
                    let mut p = full.clone();
                    p[o] = a;
                    g.payoff(&ActionProfile::new(p)).unwrap().get(o).clone()
                });
                assert_eq!(
                    &alt.max().unwrap(),
                    g.payoff(&ActionProfile::new(full.clone())).unwrap().get(o)
                );
            }
        }
    }
}
