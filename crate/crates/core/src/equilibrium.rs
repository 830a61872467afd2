//! Type-k coordination and type-k equilibrium checks.
//!
//! A plan is a group `K` with a periodic joint path enforced by grim
//! trigger. Outsiders play myopic best replies to each phase. The checks:
//!
//! * coordination feasibility: every member's worst-case average over all
//!   pure outsider play beats their minimax payoff;
//! * no profitable joint deviation: no other periodic path of `K` (period up
//!   to a bound), with outsiders re-responding, improves the group;
//! * folk-region membership, stage-NE status and stability of the phases;
//! * the critical discount factor for each member.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::game::{ActionProfile, GameError, PayoffVector, StageGame};
use crate::geometry::{group_frontier, ParetoFrontier};
use crate::minimax::MinimaxKind;
use crate::rational::Rational;
use crate::simulate::path_average;
use crate::strategy::{phase_profiles, CoordinationPlan, StrategyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquilibriumError {
    #[error("deviation period bound {max_period} is below the plan period {plan_period}")]
    PeriodTooSmall {
        max_period: usize,
        plan_period: usize,
    },
    #[error("search needs {needed} candidate paths, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: usize },
    #[error("profile {0:?} is not a pure stage Nash equilibrium")]
    NotStageNe(Vec<usize>),
    #[error(
        "member {member} has no punishment margin: on-path average minus minimax is not positive"
    )]
    NoPunishmentMargin { member: usize },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// How a joint deviation is judged to be profitable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeviationMode {
    /// Profitable iff every member is strictly better off.
    #[default]
    Pareto,
    /// Profitable iff some member is strictly better off.
    Strict,
}

impl DeviationMode {
    fn improves(self, group: &[usize], candidate: &PayoffVector, baseline: &PayoffVector) -> bool {
        let mut better = group.iter().map(|&p| candidate.get(p) > baseline.get(p));
        match self {
            DeviationMode::Pareto => better.all(|b| b),
            DeviationMode::Strict => better.any(|b| b),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeviationMode::Pareto => "pareto",
            DeviationMode::Strict => "strict",
        }
    }
}

impl fmt::Display for DeviationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pareto" => Ok(DeviationMode::Pareto),
            "strict" => Ok(DeviationMode::Strict),
            other => Err(format!(
                "unknown deviation mode `{other}` (expected pareto or strict)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Longest period of the alternative paths searched for deviations.
    pub max_period: usize,
    pub mode: DeviationMode,
    pub minimax: MinimaxKind,
    pub discount: Option<Rational>,
    /// Upper bound on candidate paths examined per search.
    pub budget: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_period: 3,
            mode: DeviationMode::Pareto,
            minimax: MinimaxKind::default(),
            discount: None,
            budget: 20_000,
        }
    }
}

impl VerifyOptions {
    pub fn with_max_period(mut self, p: usize) -> Self {
        self.max_period = p;
        self
    }

    pub fn with_mode(mut self, mode: DeviationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_minimax(mut self, kind: MinimaxKind) -> Self {
        self.minimax = kind;
        self
    }

    pub fn with_discount(mut self, d: Option<Rational>) -> Self {
        self.discount = d;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eq4Check {
    /// Per member, in group order.
    pub guaranteed: Vec<Rational>,
    pub holds: Vec<bool>,
}

impl Eq4Check {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// An alternative path of the group that beats the plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    /// Member actions per phase, in group order.
    pub path: Vec<Vec<usize>>,
    /// Full joint profile per phase, outsiders re-responding.
    pub phase_profiles: Vec<Vec<usize>>,
    pub payoff: PayoffVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eq5Check {
    pub holds: bool,
    pub witness: Option<DeviationWitness>,
    pub alternatives_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountThreshold {
    pub member: usize,
    /// Best one-shot gain from deviating in some phase.
    pub gain: Rational,
    /// On-path average minus minimax.
    pub per_round_loss: Rational,
    /// The plan persists for every discount factor strictly above this.
    pub delta_star: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountCheck {
    pub discount: Rational,
    pub thresholds: Vec<DiscountThreshold>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub plan: CoordinationPlan,
    pub mode: DeviationMode,
    pub max_period: usize,
    pub minimax_kind: MinimaxKind,
    pub minimax_point: PayoffVector,
    /// Full joint profile per phase (members' path plus outsiders' replies).
    pub phase_profiles: Vec<Vec<usize>>,
    pub profile_payoff: PayoffVector,
    /// Per member, in group order.
    pub guaranteed_payoffs: Vec<Rational>,
    pub eq4_holds: Vec<bool>,
    pub eq5_holds: bool,
    pub deviation_witness: Option<DeviationWitness>,
    pub alternatives_checked: usize,
    pub folk_strict: bool,
    pub is_stage_ne: bool,
    pub stage_stable: bool,
    /// On the frontier of what the group can realise against the outsiders'
    /// replies, i.e. no path of any period improves every member. `None`
    /// when the game is too large for hull computations.
    pub group_pareto_optimal: Option<bool>,
    pub discount: Option<DiscountCheck>,
}

impl VerificationReport {
    /// Coordination is feasible for every member and no joint deviation pays.
    pub fn is_type_k(&self) -> bool {
        self.eq4_holds.iter().all(|&h| h) && self.eq5_holds
    }

    /// [`Self::is_type_k`], and the discount condition when one was asked for.
    pub fn verdict(&self) -> bool {
        self.is_type_k() && self.discount.as_ref().is_none_or(|d| d.holds)
    }

    /// Outsider actions per phase, outsiders in ascending player order.
    pub fn outsider_responses(&self, num_players: usize) -> Vec<Vec<usize>> {
        let outsiders = self.plan.outsiders(num_players);
        self.phase_profiles
            .iter()
            .map(|full| outsiders.iter().map(|&o| full[o]).collect())
            .collect()
    }

    /// Profile payoff at least the minimax payoff for every player.
    pub fn weakly_dominates_minimax(&self) -> bool {
        self.profile_payoff
            .values()
            .iter()
            .zip(self.minimax_point.values())
            .all(|(u, v)| u >= v)
    }

    pub fn k(&self) -> usize {
        self.plan.group().len()
    }
}

/// Lyndon words of length `1..=max_len` over `0..alphabet`, ordered by
/// length and then lexicographically. These are exactly the aperiodic
/// paths in least-rotation form.
pub fn lyndon_words(alphabet: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if alphabet == 0 || max_len == 0 {
        return out;
    }
    // Duval's generation in lexicographic order
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(w.clone());
        let m = w.len();
        while w.len() < max_len {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last + 1 == alphabet {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn mobius(n: u64) -> i128 {
    let mut n = n;
    let mut result = 1i128;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of Lyndon words of length `1..=max_len` (saturating).
pub fn lyndon_count(alphabet: usize, max_len: usize) -> u128 {
    let m = alphabet as i128;
    let mut total: i128 = 0;
    for n in 1..=max_len as u64 {
        let mut sum: i128 = 0;
        for d in (1..=n).filter(|d| n % d == 0) {
            let Some(pow) = m.checked_pow((n / d) as u32) else {
                return u128::MAX;
            };
            sum += mobius(d) * pow;
        }
        total = total.saturating_add(sum / n as i128);
    }
    total.max(0) as u128
}

/// One alternative path for a group with its outsider replies and payoff.
#[derive(Debug, Clone)]
struct Candidate {
    path: Vec<Vec<usize>>,
    phases: Vec<Vec<usize>>,
    payoff: PayoffVector,
}

fn group_candidates(
    game: &StageGame,
    group: &[usize],
    max_period: usize,
    budget: usize,
) -> Result<Vec<Candidate>, EquilibriumError> {
    let joint = game.joint_actions(group);
    let needed = lyndon_count(joint.len(), max_period);
    if needed > budget as u128 {
        return Err(EquilibriumError::BudgetExceeded { needed, budget });
    }
    Ok(lyndon_words(joint.len(), max_period)
        .into_iter()
        .map(|word| {
            let path: Vec<Vec<usize>> = word.iter().map(|&j| joint[j].clone()).collect();
            let phases = phase_profiles(game, group, &path);
            let payoff = path_average(game, &phases);
            Candidate {
                path,
                phases,
                payoff,
            }
        })
        .collect())
}

/// Worst-case average of each member over all pure outsider play, compared
/// strictly against the member's minimax payoff.
pub fn check_eq4(
    game: &StageGame,
    plan: &CoordinationPlan,
    minimax: &PayoffVector,
) -> Result<Eq4Check, EquilibriumError> {
    plan.validate(game)?;
    let outsiders = plan.outsiders(game.num_players());
    let outsider_joint = game.joint_actions(&outsiders);
    let period = Rational::from_integer((plan.period() as u64).into());
    let mut guaranteed = Vec::with_capacity(plan.group().len());
    for &member in plan.group() {
        let mut total = Rational::zero();
        for phase in plan.path() {
            let mut full = vec![0; game.num_players()];
            for (&p, &a) in plan.group().iter().zip(phase) {
                full[p] = a;
            }
            let worst = outsider_joint
                .iter()
                .map(|o| {
                    for (&p, &a) in outsiders.iter().zip(o) {
                        full[p] = a;
                    }
                    game.payoff_slice(&full).get(member).clone()
                })
                .min()
                .expect("at least one outsider joint action");
            total += worst;
        }
        guaranteed.push(total / &period);
    }
    let holds = plan
        .group()
        .iter()
        .zip(&guaranteed)
        .map(|(&m, g)| g > minimax.get(m))
        .collect();
    Ok(Eq4Check { guaranteed, holds })
}

fn scan_deviations(
    group: &[usize],
    plan_canonical: &[Vec<usize>],
    baseline: &PayoffVector,
    candidates: &[Candidate],
    mode: DeviationMode,
) -> Eq5Check {
    let mut checked = 0;
    for c in candidates {
        if c.path == plan_canonical {
            continue;
        }
        checked += 1;
        if mode.improves(group, &c.payoff, baseline) {
            return Eq5Check {
                holds: false,
                witness: Some(DeviationWitness {
                    path: c.path.clone(),
                    phase_profiles: c.phases.clone(),
                    payoff: c.payoff.clone(),
                }),
                alternatives_checked: checked,
            };
        }
    }
    Eq5Check {
        holds: true,
        witness: None,
        alternatives_checked: checked,
    }
}

/// Searches periodic joint paths of the group (period up to `max_period`,
/// up to rotation) for a profitable simultaneous deviation.
pub fn check_eq5(
    game: &StageGame,
    plan: &CoordinationPlan,
    max_period: usize,
    mode: DeviationMode,
    budget: usize,
) -> Result<Eq5Check, EquilibriumError> {
    plan.validate(game)?;
    if max_period < plan.period() {
        return Err(EquilibriumError::PeriodTooSmall {
            max_period,
            plan_period: plan.period(),
        });
    }
    let candidates = group_candidates(game, plan.group(), max_period, budget)?;
    let baseline = path_average(game, &phase_profiles(game, plan.group(), plan.path()));
    Ok(scan_deviations(
        plan.group(),
        &plan.canonical_path(),
        &baseline,
        &candidates,
        mode,
    ))
}

/// All pure profiles where no player gains by a unilateral pure deviation.
pub fn stage_pure_ne(game: &StageGame) -> Vec<ActionProfile> {
    game.profiles()
        .filter(|p| is_stage_ne(game, p.as_slice()))
        .collect()
}

pub fn is_stage_ne(game: &StageGame, profile: &[usize]) -> bool {
    let payoff = game.payoff_slice(profile);
    (0..game.num_players()).all(|p| &game.best_reply_value(p, profile).1 <= payoff.get(p))
}

/// Stability of a pure stage NE against small unilateral perturbations.
///
/// Player `j` moves weight `eps` onto `alt`. (a) every other player's NE
/// action must remain a best reply for all small `eps > 0`: the payoff gap
/// `d0 + eps (d1 - d0)` must be non-negative, decided by `d0` and, on a
/// tie, by the sign of `d1`. (b) the deviator must be strictly worse off,
/// i.e. `u_j(alt, ne_-j) < u_j(ne)`.
pub fn stage_ne_stability(game: &StageGame, ne: &ActionProfile) -> Result<bool, EquilibriumError> {
    game.index_of(ne.as_slice())?;
    if !is_stage_ne(game, ne.as_slice()) {
        return Err(EquilibriumError::NotStageNe(ne.as_slice().to_vec()));
    }
    let base = ne.as_slice();
    let n = game.num_players();
    for j in 0..n {
        for alt in (0..game.num_actions(j)).filter(|&a| a != base[j]) {
            let moved = ne.with(j, alt);
            if game.payoff_slice(moved.as_slice()).get(j) >= game.payoff_slice(base).get(j) {
                return Ok(false);
            }
            for k in (0..n).filter(|&k| k != j) {
                for other in (0..game.num_actions(k)).filter(|&b| b != base[k]) {
                    let d0 = game.payoff_slice(base).get(k)
                        - game.payoff_slice(ne.with(k, other).as_slice()).get(k);
                    let d1 = game.payoff_slice(moved.as_slice()).get(k)
                        - game.payoff_slice(moved.with(k, other).as_slice()).get(k);
                    let stays_best = d0.is_positive() || (d0.is_zero() && !d1.is_negative());
                    if !stays_best {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Critical discount factor for `member` under the plan.
///
/// `gain` is the best one-shot improvement available in any phase with
/// everybody else on their plan actions; `per_round_loss` is the on-path
/// average minus the member's minimax payoff. The plan persists when
/// `delta / (1 - delta) * per_round_loss > gain`.
pub fn discount_threshold(
    game: &StageGame,
    plan: &CoordinationPlan,
    member: usize,
    minimax: &PayoffVector,
) -> Result<DiscountThreshold, EquilibriumError> {
    plan.validate(game)?;
    if !plan.contains(member) {
        return Err(StrategyError::NotMember(member).into());
    }
    let phases = phase_profiles(game, plan.group(), plan.path());
    let average = path_average(game, &phases);
    let per_round_loss = average.get(member) - minimax.get(member);
    if !per_round_loss.is_positive() {
        return Err(EquilibriumError::NoPunishmentMargin { member });
    }
    let mut gain: Option<Rational> = None;
    for full in &phases {
        let on_path = game.payoff_slice(full).get(member);
        for alt in (0..game.num_actions(member)).filter(|&a| a != full[member]) {
            let mut dev = full.clone();
            dev[member] = alt;
            let g = game.payoff_slice(&dev).get(member) - on_path;
            if gain.as_ref().is_none_or(|best| &g > best) {
                gain = Some(g);
            }
        }
    }
    let gain = gain.unwrap_or_else(Rational::zero);
    let delta_star = if gain.is_positive() {
        &gain / (&gain + &per_round_loss)
    } else {
        Rational::zero()
    };
    Ok(DiscountThreshold {
        member,
        gain,
        per_round_loss,
        delta_star,
    })
}

fn discount_check(
    game: &StageGame,
    plan: &CoordinationPlan,
    minimax: &PayoffVector,
    discount: &Rational,
) -> Result<DiscountCheck, EquilibriumError> {
    let mut thresholds = Vec::new();
    let mut holds = true;
    for &m in plan.group() {
        match discount_threshold(game, plan, m, minimax) {
            Ok(t) => {
                holds &= discount > &t.delta_star;
                thresholds.push(t);
            }
            Err(EquilibriumError::NoPunishmentMargin { .. }) => holds = false,
            Err(e) => return Err(e),
        }
    }
    Ok(DiscountCheck {
        discount: discount.clone(),
        thresholds,
        holds,
    })
}

fn build_report(
    game: &StageGame,
    plan: &CoordinationPlan,
    opts: &VerifyOptions,
    minimax: &PayoffVector,
    phases: Vec<Vec<usize>>,
    eq5: Eq5Check,
    frontier: Option<&ParetoFrontier>,
) -> Result<VerificationReport, EquilibriumError> {
    let eq4 = check_eq4(game, plan, minimax)?;
    let profile_payoff = path_average(game, &phases);
    let folk_strict = profile_payoff
        .values()
        .iter()
        .zip(minimax.values())
        .all(|(u, v)| u > v);
    let is_ne = phases.iter().all(|full| is_stage_ne(game, full));
    let stable = is_ne
        && phases
            .iter()
            .map(|full| stage_ne_stability(game, &ActionProfile::new(full.clone())))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|s| s);
    let discount = opts
        .discount
        .as_ref()
        .map(|d| discount_check(game, plan, minimax, d))
        .transpose()?;
    let group_pareto_optimal = frontier.map(|f| f.contains(&profile_payoff));
    Ok(VerificationReport {
        plan: plan.clone(),
        mode: opts.mode,
        max_period: opts.max_period,
        minimax_kind: opts.minimax,
        minimax_point: minimax.clone(),
        phase_profiles: phases,
        profile_payoff,
        guaranteed_payoffs: eq4.guaranteed,
        eq4_holds: eq4.holds,
        eq5_holds: eq5.holds,
        deviation_witness: eq5.witness,
        alternatives_checked: eq5.alternatives_checked,
        folk_strict,
        is_stage_ne: is_ne,
        stage_stable: stable,
        group_pareto_optimal,
        discount,
    })
}

/// Runs every check on one plan.
pub fn verify_type_k(
    game: &StageGame,
    plan: &CoordinationPlan,
    opts: &VerifyOptions,
) -> Result<VerificationReport, EquilibriumError> {
    let minimax = opts.minimax.point(game);
    let eq5 = check_eq5(game, plan, opts.max_period, opts.mode, opts.budget)?;
    let phases = phase_profiles(game, plan.group(), plan.path());
    let frontier = group_frontier(game, plan.group()).ok();
    build_report(game, plan, opts, &minimax, phases, eq5, frontier.as_ref())
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every group of size at least two and every periodic path up to
/// `opts.max_period` that verifies as a type-k equilibrium, one report per
/// distinct `(group, payoff)`, sorted by group size, group, then payoff.
pub fn enumerate_type_k(
    game: &StageGame,
    opts: &VerifyOptions,
) -> Result<Vec<VerificationReport>, EquilibriumError> {
    let n = game.num_players();
    let groups: Vec<Vec<usize>> = (2..=n).flat_map(|k| subsets_of_size(n, k)).collect();
    let needed: u128 = groups
        .iter()
        .map(|g| lyndon_count(game.joint_actions(g).len(), opts.max_period))
        .fold(0u128, u128::saturating_add);
    if needed > opts.budget as u128 {
        return Err(EquilibriumError::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    let minimax = opts.minimax.point(game);
    let mut found: BTreeMap<(usize, Vec<usize>, PayoffVector), VerificationReport> =
        BTreeMap::new();
    for group in &groups {
        let candidates = group_candidates(game, group, opts.max_period, opts.budget)?;
        let mut frontier: Option<Option<ParetoFrontier>> = None;
        for c in &candidates {
            let key = (group.len(), group.clone(), c.payoff.clone());
            if found.contains_key(&key) {
                continue;
            }
            let plan = CoordinationPlan::new(group.clone(), c.path.clone())?;
            let eq4 = check_eq4(game, &plan, &minimax)?;
            if !eq4.all_hold() {
                continue;
            }
            let eq5 = scan_deviations(group, &c.path, &c.payoff, &candidates, opts.mode);
            if !eq5.holds {
                continue;
            }
            let frontier = frontier.get_or_insert_with(|| group_frontier(game, group).ok());
            let report = build_report(
                game,
                &plan,
                opts,
                &minimax,
                c.phases.clone(),
                eq5,
                frontier.as_ref(),
            )?;
            found.insert(key, report);
        }
    }
    Ok(found.into_values().collect())
}
