//! Python bindings. Exact numbers cross the boundary as `fractions.Fraction`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use typek_core::equilibrium::{DeviationMode, VerificationReport, VerifyOptions};
use typek_core::rational::{format_rational, parse_rational};
use typek_core::strategy::StrategyPreset;
use typek_core::{
    builtin_game, fig2_convergence_experiment, parse_game, to_document, CoordinationPlan,
    MinimaxKind, PayoffGeometry, PayoffVector, Rational, StageGame,
};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_rational(r),))
}

fn fractions<'py>(py: Python<'py>, v: &PayoffVector) -> PyResult<Bound<'py, PyList>> {
    let items = v
        .values()
        .iter()
        .map(|r| fraction(py, r))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

/// Accepts a Fraction, int, or a string such as `"3/10"` or `"0.3"`.
fn rational_arg(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&value.str()?.to_string()).map_err(err)
}

fn kind_arg(kind: &str) -> PyResult<MinimaxKind> {
    kind.parse().map_err(err)
}

fn labels(game: &StageGame, profile: &[usize]) -> Vec<String> {
    profile
        .iter()
        .enumerate()
        .map(|(p, &a)| game.actions(p)[a].clone())
        .collect()
}

#[pyclass(name = "StageGame", frozen, module = "typek")]
struct PyStageGame {
    inner: StageGame,
}

#[pymethods]
impl PyStageGame {
    /// One of the bundled fixtures: `fig1`, `fig2` or `fig4`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        builtin_game(name)
            .map(|inner| PyStageGame { inner })
            .ok_or_else(|| err(format!("unknown builtin game `{name}`")))
    }

    /// Parses a game document.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_game(text)
            .map(|inner| PyStageGame { inner })
            .map_err(err)
    }

    fn to_document(&self) -> String {
        to_document(&self.inner)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn players(&self) -> Vec<String> {
        self.inner.players().to_vec()
    }

    #[getter]
    fn actions(&self) -> Vec<Vec<String>> {
        self.inner.action_sets().to_vec()
    }

    /// Payoff vector at a profile given by action labels, e.g. `["D", "D", "L"]`.
    fn payoff<'py>(&self, py: Python<'py>, profile: Vec<String>) -> PyResult<Bound<'py, PyList>> {
        let key = profile.join(",");
        let p = self.inner.parse_profile_key(&key).map_err(err)?;
        fractions(py, self.inner.payoff(&p).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "StageGame(name={:?}, players={:?})",
            self.inner.name(),
            self.inner.players()
        )
    }
}

/// Minimax payoff per player; `kind` is `pure` or `correlated`.
#[pyfunction]
#[pyo3(signature = (game, kind = "pure"))]
fn minimax<'py>(py: Python<'py>, game: &PyStageGame, kind: &str) -> PyResult<Bound<'py, PyList>> {
    fractions(py, &kind_arg(kind)?.point(&game.inner))
}

/// Pure stage Nash equilibria as lists of action labels.
#[pyfunction]
fn stage_pure_ne(game: &PyStageGame) -> Vec<Vec<String>> {
    typek_core::stage_pure_ne(&game.inner)
        .iter()
        .map(|p| labels(&game.inner, p.as_slice()))
        .collect()
}

fn options(
    max_period: usize,
    mode: &str,
    minimax: &str,
    delta: Option<Rational>,
) -> PyResult<VerifyOptions> {
    Ok(VerifyOptions::default()
        .with_max_period(max_period)
        .with_mode(mode.parse::<DeviationMode>().map_err(err)?)
        .with_minimax(kind_arg(minimax)?)
        .with_discount(delta))
}

fn report_dict<'py>(
    py: Python<'py>,
    game: &StageGame,
    r: &VerificationReport,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item(
        "group",
        r.plan
            .group()
            .iter()
            .map(|&p| game.player_label(p).to_string())
            .collect::<Vec<_>>(),
    )?;
    d.set_item("path", r.plan.path_label(game))?;
    d.set_item(
        "phases",
        r.phase_profiles
            .iter()
            .map(|p| labels(game, p))
            .collect::<Vec<_>>(),
    )?;
    d.set_item("profile_payoff", fractions(py, &r.profile_payoff)?)?;
    d.set_item("minimax_point", fractions(py, &r.minimax_point)?)?;
    let guaranteed = r
        .guaranteed_payoffs
        .iter()
        .map(|g| fraction(py, g))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("guaranteed", guaranteed)?;
    d.set_item("eq4_holds", r.eq4_holds.clone())?;
    d.set_item("eq5_holds", r.eq5_holds)?;
    d.set_item("is_type_k", r.is_type_k())?;
    d.set_item("verdict", r.verdict())?;
    d.set_item("folk_strict", r.folk_strict)?;
    d.set_item("is_stage_ne", r.is_stage_ne)?;
    d.set_item("stage_stable", r.stage_stable)?;
    d.set_item("group_pareto_optimal", r.group_pareto_optimal)?;
    match &r.deviation_witness {
        Some(w) => {
            let wd = PyDict::new(py);
            wd.set_item(
                "phases",
                w.phase_profiles
                    .iter()
                    .map(|p| labels(game, p))
                    .collect::<Vec<_>>(),
            )?;
            wd.set_item("payoff", fractions(py, &w.payoff)?)?;
            d.set_item("witness", wd)?;
        }
        None => d.set_item("witness", py.None())?,
    }
    match &r.discount {
        Some(c) => {
            let cd = PyDict::new(py);
            cd.set_item("delta", fraction(py, &c.discount)?)?;
            cd.set_item("holds", c.holds)?;
            let stars = c
                .thresholds
                .iter()
                .map(|t| fraction(py, &t.delta_star))
                .collect::<PyResult<Vec<_>>>()?;
            cd.set_item("delta_star", stars)?;
            d.set_item("discount", cd)?;
        }
        None => d.set_item("discount", py.None())?,
    }
    Ok(d)
}

/// Checks one plan. `group` is like `"X,Y"`, `path` like `"L,R|R,L"`.
#[pyfunction]
#[pyo3(signature = (game, group, path, max_period = 3, mode = "pareto", minimax = "correlated", delta = None))]
#[allow(clippy::too_many_arguments)]
fn verify_type_k<'py>(
    py: Python<'py>,
    game: &PyStageGame,
    group: &str,
    path: &str,
    max_period: usize,
    mode: &str,
    minimax: &str,
    delta: Option<Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyDict>> {
    let plan = CoordinationPlan::parse(&game.inner, group, path).map_err(err)?;
    let delta = delta.map(|d| rational_arg(&d)).transpose()?;
    let r = typek_core::verify_type_k(
        &game.inner,
        &plan,
        &options(max_period, mode, minimax, delta)?,
    )
    .map_err(err)?;
    report_dict(py, &game.inner, &r)
}

/// Every type-k equilibrium with period up to `max_period`.
#[pyfunction]
#[pyo3(signature = (game, max_period = 3, mode = "pareto", minimax = "correlated"))]
fn enumerate_type_k<'py>(
    py: Python<'py>,
    game: &PyStageGame,
    max_period: usize,
    mode: &str,
    minimax: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let reports =
        typek_core::enumerate_type_k(&game.inner, &options(max_period, mode, minimax, None)?)
            .map_err(err)?;
    reports
        .iter()
        .map(|r| report_dict(py, &game.inner, r))
        .collect()
}

/// Critical discount factor of `member` under a plan.
#[pyfunction]
#[pyo3(signature = (game, group, path, member, minimax = "correlated"))]
fn discount_threshold<'py>(
    py: Python<'py>,
    game: &PyStageGame,
    group: &str,
    path: &str,
    member: &str,
    minimax: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let g = &game.inner;
    let plan = CoordinationPlan::parse(g, group, path).map_err(err)?;
    let m = g.player_index(member).map_err(err)?;
    let t =
        typek_core::discount_threshold(g, &plan, m, &kind_arg(minimax)?.point(g)).map_err(err)?;
    fraction(py, &t.delta_star)
}

/// Per-round probability that the fig2 machines have coordinated.
#[pyfunction]
#[pyo3(signature = (trials = 100_000, rounds = 10, seed = 0))]
fn convergence(py: Python<'_>, trials: usize, rounds: usize, seed: u64) -> Vec<f64> {
    py.detach(|| fig2_convergence_experiment(trials, rounds, seed).probabilities())
}

/// Plays one preset per player, e.g. `["grim", "grim", "myopic"]`.
#[pyfunction]
#[pyo3(signature = (game, strategies, group = None, path = None, rounds = 99, seed = 0))]
fn simulate<'py>(
    py: Python<'py>,
    game: &PyStageGame,
    strategies: Vec<String>,
    group: Option<&str>,
    path: Option<&str>,
    rounds: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = &game.inner;
    let plan = match (group, path) {
        (Some(k), Some(p)) => Some(CoordinationPlan::parse(g, k, p).map_err(err)?),
        (None, None) => None,
        _ => return Err(err("group and path go together")),
    };
    let machines = strategies
        .iter()
        .enumerate()
        .map(|(p, s)| {
            s.parse::<StrategyPreset>()
                .and_then(|preset| preset.build(g, p, plan.as_ref()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let result = typek_core::run(g, &machines, rounds, seed, None).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("averages", fractions(py, &result.averages)?)?;
    d.set_item(
        "trace",
        result
            .trace
            .iter()
            .map(|(p, _)| labels(g, p.as_slice()))
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Hull vertices, minimax point, optional group frontier and 2D projection.
#[pyfunction]
#[pyo3(signature = (game, group = None, project = None))]
fn geometry<'py>(
    py: Python<'py>,
    game: &PyStageGame,
    group: Option<&str>,
    project: Option<(String, String)>,
) -> PyResult<Bound<'py, PyDict>> {
    let g = &game.inner;
    let geo = PayoffGeometry::feasible_hull(g).map_err(err)?;
    let d = PyDict::new(py);
    let vertices = geo
        .vertices()
        .iter()
        .map(|v| fractions(py, v))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("vertices", vertices)?;
    d.set_item("minimax_point", fractions(py, geo.minimax_point())?)?;
    if let Some(k) = group {
        let members = k
            .split(',')
            .map(|s| g.player_index(s.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let frontier = geo.pareto_frontier(&members).map_err(err)?;
        let fv = frontier
            .vertices()
            .iter()
            .map(|v| fractions(py, v))
            .collect::<PyResult<Vec<_>>>()?;
        d.set_item("frontier", fv)?;
    }
    if let Some((a, b)) = project {
        let axes = (
            g.player_index(&a).map_err(err)?,
            g.player_index(&b).map_err(err)?,
        );
        let poly = geo
            .project(axes)
            .map_err(err)?
            .iter()
            .map(|[x, y]| Ok((fraction(py, x)?, fraction(py, y)?)))
            .collect::<PyResult<Vec<_>>>()?;
        d.set_item("projection", poly)?;
    }
    Ok(d)
}

#[pymodule]
fn typek(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStageGame>()?;
    m.add_function(wrap_pyfunction!(minimax, m)?)?;
    m.add_function(wrap_pyfunction!(stage_pure_ne, m)?)?;
    m.add_function(wrap_pyfunction!(verify_type_k, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_type_k, m)?)?;
    m.add_function(wrap_pyfunction!(discount_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(geometry, m)?)?;
    Ok(())
}
