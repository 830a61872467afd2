//! Repeated play among reactive strategies.

use std::collections::HashMap;
use std::io::Write;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{ActionProfile, PayoffVector, StageGame};
use crate::rational::{format_decimal, format_rational, Rational};
use crate::strategy::{
    fig2_coordinator, grim_trigger, CoordinationPlan, CoordinationSide, ReactiveStrategy,
    StrategyError,
};

#[derive(Debug, thiserror::Error)]
pub enum SimulationError {
    #[error("{strategies} strategies supplied for {players} players")]
    Arity { players: usize, strategies: usize },
    #[error("strategy {slot} plays as player {plays}")]
    WrongSeat { slot: usize, plays: usize },
    #[error("discount factor must lie strictly between 0 and 1")]
    Discount,
    #[error("strategy `{0}` randomises, so its play is not periodic")]
    NotPeriodic(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("trace export failed: {0}")]
    Export(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationRun {
    pub horizon: usize,
    pub seed: u64,
    pub trace: Vec<(ActionProfile, PayoffVector)>,
    /// Mean payoff over rounds `0..=horizon`.
    pub averages: PayoffVector,
    pub discount: Option<Rational>,
    /// `sum_t discount^t u^t` over the trace.
    pub discounted: Option<PayoffVector>,
}

fn check_seats(game: &StageGame, strategies: &[ReactiveStrategy]) -> Result<(), SimulationError> {
    if strategies.len() != game.num_players() {
        return Err(SimulationError::Arity {
            players: game.num_players(),
            strategies: strategies.len(),
        });
    }
    for (slot, s) in strategies.iter().enumerate() {
        if s.player() != slot {
            return Err(SimulationError::WrongSeat {
                slot,
                plays: s.player(),
            });
        }
        s.fits(game)?;
    }
    Ok(())
}

fn check_discount(discount: Option<&Rational>) -> Result<(), SimulationError> {
    match discount {
        Some(d) if !(d > &Rational::zero() && d < &Rational::one()) => {
            Err(SimulationError::Discount)
        }
        _ => Ok(()),
    }
}

/// Plays rounds `0..=horizon` and records the trace.
///
/// The random stream is a ChaCha8 generator seeded with `seed`; every
/// randomised emission draws from it in player order.
pub fn run(
    game: &StageGame,
    strategies: &[ReactiveStrategy],
    horizon: usize,
    seed: u64,
    discount: Option<&Rational>,
) -> Result<SimulationRun, SimulationError> {
    check_seats(game, strategies)?;
    check_discount(discount)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runners: Vec<_> = strategies.iter().map(ReactiveStrategy::runner).collect();
    let n = game.num_players();
    let mut totals = PayoffVector::zeros(n);
    let mut discounted = discount.map(|_| PayoffVector::zeros(n));
    let mut weight = Rational::one();
    let mut trace = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        let actions: Vec<usize> = runners.iter().map(|r| r.act(&mut rng)).collect();
        let idx = game.index_unchecked(&actions);
        let payoff = game.payoff_at(idx).clone();
        totals.add_assign(&payoff);
        if let (Some(acc), Some(d)) = (discounted.as_mut(), discount) {
            acc.add_scaled(&payoff, &weight);
            weight *= d;
        }
        for r in runners.iter_mut() {
            r.observe(idx);
        }
        trace.push((ActionProfile::new(actions), payoff));
    }
    let averages = totals.scaled(&Rational::new(1.into(), (horizon as u64 + 1).into()));
    Ok(SimulationRun {
        horizon,
        seed,
        trace,
        averages,
        discount: discount.cloned(),
        discounted,
    })
}

/// Play of deterministic machines: a transient prefix followed by a cycle
/// repeated forever. Both hold joint profile indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicOutcome {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl CyclicOutcome {
    /// Limit-average payoff: the exact mean over one cycle.
    pub fn limit_average(&self, game: &StageGame) -> PayoffVector {
        let mut total = PayoffVector::zeros(game.num_players());
        for &idx in &self.cycle {
            total.add_assign(game.payoff_at(idx));
        }
        total.scaled(&Rational::new(1.into(), (self.cycle.len() as u64).into()))
    }

    /// Infinite-horizon `sum_t discount^t u^t` in closed form.
    pub fn discounted_value(&self, game: &StageGame, discount: &Rational) -> PayoffVector {
        let mut value = PayoffVector::zeros(game.num_players());
        let mut weight = Rational::one();
        for &idx in &self.prefix {
            value.add_scaled(game.payoff_at(idx), &weight);
            weight *= discount;
        }
        let mut cycle_sum = PayoffVector::zeros(game.num_players());
        let mut w = Rational::one();
        for &idx in &self.cycle {
            cycle_sum.add_scaled(game.payoff_at(idx), &w);
            w *= discount;
        }
        // w is now discount^L
        let scale = weight / (Rational::one() - w);
        value.add_scaled(&cycle_sum, &scale);
        value
    }

    /// Joint profile index in round `t`.
    pub fn at(&self, t: usize) -> usize {
        if t < self.prefix.len() {
            self.prefix[t]
        } else {
            self.cycle[(t - self.prefix.len()) % self.cycle.len()]
        }
    }
}

/// Runs deterministic machines until their joint state repeats.
pub fn deterministic_outcome(
    game: &StageGame,
    strategies: &[ReactiveStrategy],
) -> Result<CyclicOutcome, SimulationError> {
    check_seats(game, strategies)?;
    if let Some(s) = strategies.iter().find(|s| !s.is_deterministic()) {
        return Err(SimulationError::NotPeriodic(s.label().to_string()));
    }
    let mut runners: Vec<_> = strategies.iter().map(ReactiveStrategy::runner).collect();
    let mut seen: HashMap<(bool, Vec<usize>), usize> = HashMap::new();
    let mut played = Vec::new();
    loop {
        let key = (
            runners[0].has_started(),
            runners.iter().map(|r| r.state()).collect::<Vec<_>>(),
        );
        if let Some(&first) = seen.get(&key) {
            let cycle = played.split_off(first);
            return Ok(CyclicOutcome {
                prefix: played,
                cycle,
            });
        }
        seen.insert(key, played.len());
        let actions: Vec<usize> = runners
            .iter()
            .map(|r| {
                r.current_distribution()
                    .as_point()
                    .expect("checked deterministic")
            })
            .collect();
        let idx = game.index_unchecked(&actions);
        for r in runners.iter_mut() {
            r.observe(idx);
        }
        played.push(idx);
    }
}

/// Exact limit-average payoff when the group follows `plan` under grim
/// trigger and the outsiders run the given deterministic machines, listed
/// in ascending player order.
pub fn limit_average_of_path(
    game: &StageGame,
    plan: &CoordinationPlan,
    outsider_strategies: &[ReactiveStrategy],
) -> Result<PayoffVector, SimulationError> {
    let strategies = plan_strategies(game, plan, outsider_strategies)?;
    Ok(deterministic_outcome(game, &strategies)?.limit_average(game))
}

/// Grim-trigger machines for the members interleaved with the outsiders'.
pub fn plan_strategies(
    game: &StageGame,
    plan: &CoordinationPlan,
    outsider_strategies: &[ReactiveStrategy],
) -> Result<Vec<ReactiveStrategy>, SimulationError> {
    let outsiders = plan.outsiders(game.num_players());
    if outsiders.len() != outsider_strategies.len() {
        return Err(SimulationError::Arity {
            players: outsiders.len(),
            strategies: outsider_strategies.len(),
        });
    }
    let mut supplied = outsider_strategies.iter();
    (0..game.num_players())
        .map(|p| {
            if plan.contains(p) {
                Ok(grim_trigger(game, plan, p)?)
            } else {
                Ok(supplied
                    .next()
                    .expect("one outsider strategy per outsider")
                    .clone())
            }
        })
        .collect()
}

/// Exact mean of the per-phase payoffs of a periodic joint path.
pub fn path_average(game: &StageGame, phases: &[Vec<usize>]) -> PayoffVector {
    let mut total = PayoffVector::zeros(game.num_players());
    for full in phases {
        total.add_assign(game.payoff_slice(full));
    }
    total.scaled(&Rational::new(1.into(), (phases.len() as u64).into()))
}

/// Per-round empirical coordination probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub trials: usize,
    /// `coordinated[t - 1]` counts trials that reached a coordinated profile
    /// in one of the first `t` rounds.
    pub coordinated: Vec<usize>,
}

impl ConvergenceCurve {
    pub fn probability(&self, t: usize) -> f64 {
        self.coordinated[t - 1] as f64 / self.trials as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (1..=self.coordinated.len())
            .map(|t| self.probability(t))
            .collect()
    }
}

/// Runs `trials` independent two-player matches for `max_t` rounds and
/// records when play first lands on an off-diagonal profile `(L, R)` or
/// `(R, L)`. Trial `k` draws from the ChaCha8 stream `k` of `seed`, so
/// results do not depend on the worker count.
pub fn coordination_experiment(
    row: &ReactiveStrategy,
    col: &ReactiveStrategy,
    trials: usize,
    max_t: usize,
    seed: u64,
) -> ConvergenceCurve {
    let first_hits: Vec<Option<usize>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut r = row.runner();
            let mut c = col.runner();
            for t in 0..max_t {
                let a = r.act(&mut rng);
                let b = c.act(&mut rng);
                if a != b {
                    return Some(t);
                }
                let idx = 2 * a + b;
                r.observe(idx);
                c.observe(idx);
            }
            None
        })
        .collect();
    let mut coordinated = vec![0usize; max_t];
    for t in first_hits.into_iter().flatten() {
        for slot in coordinated.iter_mut().skip(t) {
            *slot += 1;
        }
    }
    ConvergenceCurve {
        trials,
        coordinated,
    }
}

/// The coordination experiment with both players running the
/// coordination-game machines from their uncoordinated start.
pub fn fig2_convergence_experiment(trials: usize, max_t: usize, seed: u64) -> ConvergenceCurve {
    coordination_experiment(
        &fig2_coordinator(CoordinationSide::Row),
        &fig2_coordinator(CoordinationSide::Column),
        trials,
        max_t,
        seed,
    )
}

/// Writes a trace as CSV: `t`, one action column per player, then one
/// `u_<player>` payoff column per player.
pub fn write_trace_csv<W: Write>(
    game: &StageGame,
    run: &SimulationRun,
    out: W,
    decimal: bool,
) -> Result<(), SimulationError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(game.players().iter().cloned());
    header.extend(game.players().iter().map(|p| format!("u_{p}")));
    w.write_record(&header)?;
    for (t, (profile, payoff)) in run.trace.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(
            profile
                .as_slice()
                .iter()
                .enumerate()
                .map(|(p, &a)| game.actions(p)[a].clone()),
        );
        row.extend(payoff.values().iter().map(|v| {
            if decimal {
                format_decimal(v, 6)
            } else {
                format_rational(v)
            }
        }));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `c (1 - d^(T+1)) / (1 - d)`: discounted sum of a constant stream over
/// rounds `0..=horizon`.
pub fn constant_stream_value(c: &Rational, discount: &Rational, horizon: usize) -> Rational {
    let mut power = Rational::one();
    for _ in 0..=horizon {
        power *= discount;
    }
    c * (Rational::one() - power) / (Rational::one() - discount)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{fig1, fig2, fig4};
    use crate::rational::{int, ratio};
    use crate::strategy::{constant_strategy, cyclic_strategy, myopic_best_responder, LOCKED_LR};

    #[test]
    fn fig1_grim_cooperation_averages_zero() {
        let g = fig1();
        let plan = CoordinationPlan::parse(&g, "X,Y", "C,C").unwrap();
        let z = constant_strategy(&g, 2, 0).unwrap();
        let strategies = plan_strategies(&g, &plan, &[z]).unwrap();
        let r = run(&g, &strategies, 99, 1, None).unwrap();
        assert_eq!(r.trace.len(), 100);
        assert_eq!(r.averages, PayoffVector::from_ints(&[0, 0, 0]));
    }

    #[test]
    fn fig4_alternating_path() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "X,Y", "L,R|R,L").unwrap();
        let z = myopic_best_responder(&g, 2, &plan).unwrap();
        let strategies = plan_strategies(&g, &plan, std::slice::from_ref(&z)).unwrap();
        let r = run(&g, &strategies, 199, 9, None).unwrap();
        assert_eq!(r.averages, PayoffVector::from_ints(&[5, 5, -1]));
        assert_eq!(
            limit_average_of_path(&g, &plan, &[z]).unwrap(),
            PayoffVector::from_ints(&[5, 5, -1])
        );
    }

    #[test]
    fn limit_average_examples() {
        let g = fig4();
        let rr = CoordinationPlan::parse(&g, "X,Y", "R,R").unwrap();
        let z = constant_strategy(&g, 2, 0).unwrap();
        assert_eq!(
            limit_average_of_path(&g, &rr, std::slice::from_ref(&z)).unwrap(),
            PayoffVector::from_ints(&[3, 3, 4])
        );
        let g2 = fig2();
        let lr = CoordinationPlan::parse(&g2, "Row,Col", "L,R").unwrap();
        assert_eq!(
            limit_average_of_path(&g2, &lr, &[]).unwrap(),
            PayoffVector::from_ints(&[1, 1])
        );
        let noisy = fig2_coordinator(CoordinationSide::Row);
        assert!(matches!(
            deterministic_outcome(&g2, &[noisy, fig2_coordinator(CoordinationSide::Column)]),
            Err(SimulationError::NotPeriodic(_))
        ));
    }

    #[test]
    fn constant_play_and_discounting() {
        let g = fig4();
        let s: Vec<_> = (0..3)
            .map(|p| constant_strategy(&g, p, 1).unwrap())
            .collect();
        let d = ratio(3, 10);
        let r = run(&g, &s, 5, 0, Some(&d)).unwrap();
        assert_eq!(r.averages, PayoffVector::from_ints(&[4, 4, 3]));
        let disc = r.discounted.unwrap();
        for (p, c) in [4, 4, 3].iter().enumerate() {
            assert_eq!(disc.get(p), &constant_stream_value(&int(*c), &d, 5));
        }
    }

    #[test]
    fn closed_form_discount_matches_long_truncation() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "X,Y", "L,R|R,L").unwrap();
        let z = myopic_best_responder(&g, 2, &plan).unwrap();
        let strategies = plan_strategies(&g, &plan, &[z]).unwrap();
        let outcome = deterministic_outcome(&g, &strategies).unwrap();
        let d = ratio(1, 2);
        // X: (9 + d) / (1 - d^2) = 9.5 / 0.75
        assert_eq!(outcome.discounted_value(&g, &d).get(0), &ratio(38, 3));
    }

    #[test]
    fn arity_and_discount_errors() {
        let g = fig2();
        let one = vec![constant_strategy(&g, 0, 0).unwrap()];
        assert!(matches!(
            run(&g, &one, 3, 0, None),
            Err(SimulationError::Arity { .. })
        ));
        let swapped = vec![
            constant_strategy(&g, 1, 0).unwrap(),
            constant_strategy(&g, 0, 0).unwrap(),
        ];
        assert!(matches!(
            run(&g, &swapped, 3, 0, None),
            Err(SimulationError::WrongSeat { .. })
        ));
        let ok = vec![
            constant_strategy(&g, 0, 0).unwrap(),
            constant_strategy(&g, 1, 0).unwrap(),
        ];
        assert!(matches!(
            run(&g, &ok, 3, 0, Some(&int(1))),
            Err(SimulationError::Discount)
        ));
    }

    #[test]
    fn seeded_runs_repeat() {
        let g = fig2();
        let s = vec![
            fig2_coordinator(CoordinationSide::Row),
            fig2_coordinator(CoordinationSide::Column),
        ];
        let a = run(&g, &s, 40, 11, None).unwrap();
        let b = run(&g, &s, 40, 11, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn already_coordinated_machines() {
        let row = fig2_coordinator(CoordinationSide::Row)
            .starting_in(LOCKED_LR)
            .unwrap();
        let col = fig2_coordinator(CoordinationSide::Column)
            .starting_in(LOCKED_LR)
            .unwrap();
        let curve = coordination_experiment(&row, &col, 500, 6, 1);
        assert!(curve.probabilities().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn cyclic_outsider_with_different_period() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "X,Y", "R,R").unwrap();
        let z = cyclic_strategy(&g, 2, &[0, 1]).unwrap();
        // (3,3,4) and (4,4,3) alternate
        assert_eq!(
            limit_average_of_path(&g, &plan, &[z]).unwrap().values(),
            &[ratio(7, 2), ratio(7, 2), ratio(7, 2)]
        );
    }

    #[test]
    fn trace_csv() {
        let g = fig2();
        let s = vec![
            constant_strategy(&g, 0, 0).unwrap(),
            constant_strategy(&g, 1, 1).unwrap(),
        ];
        let r = run(&g, &s, 1, 0, None).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&g, &r, &mut buf, false).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,Row,Col,u_Row,u_Col\n0,L,R,1,1\n1,L,R,1,1\n"
        );
    }
}
