//! Serializable report shapes for `--format json`. All exact numbers are
//! strings (`p/q`, or fixed decimals under `--decimal`).

use serde::{Deserialize, Serialize};
use typek_core::equilibrium::{DiscountCheck, VerificationReport};
use typek_core::minimax::{CorrelatedMinimax, MinimaxResult};
use typek_core::rational::{format_decimal, format_rational};
use typek_core::simulate::{ConvergenceCurve, SimulationRun};
use typek_core::{PayoffVector, Rational, StageGame};

#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub decimal: bool,
}

impl Numbers {
    pub fn fmt(&self, r: &Rational) -> String {
        if self.decimal {
            format_decimal(r, 6)
        } else {
            format_rational(r)
        }
    }

    pub fn vec(&self, v: &PayoffVector) -> Vec<String> {
        v.values().iter().map(|r| self.fmt(r)).collect()
    }
}

fn labels(game: &StageGame, profile: &[usize]) -> Vec<String> {
    profile
        .iter()
        .enumerate()
        .map(|(p, &a)| game.actions(p)[a].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaxRow {
    pub player: String,
    pub pure: String,
    /// Opponents' punishing actions, opponents in player order.
    pub punishers: Vec<String>,
    pub best_reply: String,
    pub correlated: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaxDoc {
    pub game: String,
    pub players: Vec<MinimaxRow>,
}

impl MinimaxDoc {
    pub fn new(
        game: &StageGame,
        pure: &[MinimaxResult],
        correlated: &[CorrelatedMinimax],
        n: Numbers,
    ) -> Self {
        let players = pure
            .iter()
            .zip(correlated)
            .map(|(m, c)| {
                let opponents = game.opponents(m.player);
                MinimaxRow {
                    player: game.player_label(m.player).to_string(),
                    pure: n.fmt(&m.value),
                    punishers: opponents
                        .iter()
                        .zip(&m.punisher_profile)
                        .map(|(&o, &a)| game.actions(o)[a].clone())
                        .collect(),
                    best_reply: game.actions(m.player)[m.best_reply].clone(),
                    correlated: n.fmt(&c.value),
                }
            })
            .collect();
        MinimaxDoc {
            game: game.name().to_string(),
            players,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdDoc {
    pub member: String,
    pub gain: String,
    pub per_round_loss: String,
    pub delta_star: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscountDoc {
    pub delta: String,
    pub holds: bool,
    pub thresholds: Vec<ThresholdDoc>,
}

impl DiscountDoc {
    fn new(game: &StageGame, d: &DiscountCheck, n: Numbers) -> Self {
        DiscountDoc {
            delta: n.fmt(&d.discount),
            holds: d.holds,
            thresholds: d
                .thresholds
                .iter()
                .map(|t| ThresholdDoc {
                    member: game.player_label(t.member).to_string(),
                    gain: n.fmt(&t.gain),
                    per_round_loss: n.fmt(&t.per_round_loss),
                    delta_star: n.fmt(&t.delta_star),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    /// Joint profile per phase, e.g. `L,R,L`.
    pub phases: Vec<String>,
    pub payoff: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub group: Vec<String>,
    pub k: usize,
    pub path: String,
    pub phases: Vec<String>,
    pub mode: String,
    pub max_period: usize,
    pub minimax_kind: String,
    pub minimax_point: Vec<String>,
    pub profile_payoff: Vec<String>,
    pub guaranteed: Vec<String>,
    pub eq4_holds: Vec<bool>,
    pub eq5_holds: bool,
    pub is_type_k: bool,
    pub verdict: bool,
    pub folk_strict: bool,
    pub is_stage_ne: bool,
    pub stage_stable: bool,
    pub group_pareto_optimal: Option<bool>,
    pub alternatives_checked: usize,
    pub witness: Option<WitnessDoc>,
    pub discount: Option<DiscountDoc>,
}

impl ReportDoc {
    pub fn new(game: &StageGame, r: &VerificationReport, n: Numbers) -> Self {
        let phase_keys =
            |phases: &[Vec<usize>]| phases.iter().map(|p| labels(game, p).join(",")).collect();
        ReportDoc {
            group: r
                .plan
                .group()
                .iter()
                .map(|&p| game.player_label(p).to_string())
                .collect(),
            k: r.k(),
            path: r.plan.path_label(game),
            phases: phase_keys(&r.phase_profiles),
            mode: r.mode.to_string(),
            max_period: r.max_period,
            minimax_kind: r.minimax_kind.to_string(),
            minimax_point: n.vec(&r.minimax_point),
            profile_payoff: n.vec(&r.profile_payoff),
            guaranteed: r.guaranteed_payoffs.iter().map(|g| n.fmt(g)).collect(),
            eq4_holds: r.eq4_holds.clone(),
            eq5_holds: r.eq5_holds,
            is_type_k: r.is_type_k(),
            verdict: r.verdict(),
            folk_strict: r.folk_strict,
            is_stage_ne: r.is_stage_ne,
            stage_stable: r.stage_stable,
            group_pareto_optimal: r.group_pareto_optimal,
            alternatives_checked: r.alternatives_checked,
            witness: r.deviation_witness.as_ref().map(|w| WitnessDoc {
                phases: phase_keys(&w.phase_profiles),
                payoff: n.vec(&w.payoff),
            }),
            discount: r.discount.as_ref().map(|d| DiscountDoc::new(game, d, n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationDoc {
    pub game: String,
    pub max_period: usize,
    pub mode: String,
    pub equilibria: Vec<ReportDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundDoc {
    pub t: usize,
    pub actions: Vec<String>,
    pub payoffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub game: String,
    pub strategies: Vec<String>,
    pub rounds: usize,
    pub seed: u64,
    pub averages: Vec<String>,
    pub discount: Option<String>,
    pub discounted: Option<Vec<String>>,
    pub trace: Vec<RoundDoc>,
}

impl SimulationDoc {
    pub fn new(game: &StageGame, strategies: Vec<String>, run: &SimulationRun, n: Numbers) -> Self {
        SimulationDoc {
            game: game.name().to_string(),
            strategies,
            rounds: run.horizon,
            seed: run.seed,
            averages: n.vec(&run.averages),
            discount: run.discount.as_ref().map(|d| n.fmt(d)),
            discounted: run.discounted.as_ref().map(|d| n.vec(d)),
            trace: run
                .trace
                .iter()
                .enumerate()
                .map(|(t, (p, u))| RoundDoc {
                    t,
                    actions: labels(game, p.as_slice()),
                    payoffs: n.vec(u),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub t: usize,
    pub coordinated: usize,
    pub empirical: f64,
    pub expected: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDoc {
    pub trials: usize,
    pub seed: u64,
    pub rounds: Vec<ConvergenceRow>,
}

impl ConvergenceDoc {
    pub fn new(curve: &ConvergenceCurve, seed: u64) -> Self {
        let rounds = (1..=curve.coordinated.len())
            .map(|t| {
                let expected = 1.0 - 0.5f64.powi(t as i32);
                ConvergenceRow {
                    t,
                    coordinated: curve.coordinated[t - 1],
                    empirical: curve.probability(t),
                    expected,
                    std_error: (expected * (1.0 - expected) / curve.trials as f64).sqrt(),
                }
            })
            .collect();
        ConvergenceDoc {
            trials: curve.trials,
            seed,
            rounds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use typek_core::equilibrium::VerifyOptions;
    use typek_core::rational::ratio;
    use typek_core::{fig2_convergence_experiment, fig4, verify_type_k, CoordinationPlan};

    #[test]
    fn report_round_trips() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "X,Y", "L,R|R,L").unwrap();
        let r = verify_type_k(
            &g,
            &plan,
            &VerifyOptions::default().with_discount(Some(ratio(3, 10))),
        )
        .unwrap();
        for decimal in [false, true] {
            let doc = ReportDoc::new(&g, &r, Numbers { decimal });
            let text = serde_json::to_string(&doc).unwrap();
            assert_eq!(serde_json::from_str::<ReportDoc>(&text).unwrap(), doc);
        }
        let doc = ReportDoc::new(&g, &r, Numbers { decimal: false });
        assert_eq!(doc.profile_payoff, ["5", "5", "-1"]);
        assert_eq!(doc.discount.unwrap().thresholds[0].delta_star, "1/4");
    }

    #[test]
    fn convergence_round_trips() {
        let doc = ConvergenceDoc::new(&fig2_convergence_experiment(50, 4, 3), 3);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(serde_json::from_str::<ConvergenceDoc>(&text).unwrap(), doc);
    }
}
