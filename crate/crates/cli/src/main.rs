//! `typek`: command-line access to minimax, equilibrium checks, simulation
//! and payoff geometry for small repeated games.
//!
//! Exit status: 0 on success, 1 when a verification verdict is negative,
//! 2 on usage or input errors.

mod dto;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dto::{ConvergenceDoc, EnumerationDoc, MinimaxDoc, Numbers, ReportDoc, SimulationDoc};
use typek_core::equilibrium::{DeviationMode, EquilibriumError, VerifyOptions};
use typek_core::geometry::GeometryError;
use typek_core::rational::parse_rational;
use typek_core::simulate::{write_trace_csv, SimulationError};
use typek_core::strategy::{StrategyError, StrategyPreset};
use typek_core::{
    builtin_game, correlated_minimax_value, enumerate_type_k, fig2_convergence_experiment,
    minimax_value, parse_game, run, verify_type_k, CoordinationPlan, FormatError, GameError,
    MinimaxKind, PayoffGeometry, Rational, StageGame,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read `{path}`: {source}")]
    Read { path: String, source: io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Game(#[from] GameError),
    #[error("{0}")]
    Strategy(#[from] StrategyError),
    #[error("{0}")]
    Equilibrium(#[from] EquilibriumError),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Simulation(#[from] SimulationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "typek",
    version,
    about = "Repeated-game analysis: minimax, type-k equilibria, simulation, geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Render rationals as fixed 6-place decimals.
    #[arg(long, global = true)]
    decimal: bool,
}

#[derive(Debug, Args)]
struct GameArg {
    /// `builtin:fig1|fig2|fig4` or a path to a game document.
    #[arg(long)]
    game: String,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Coordinating players, e.g. `X,Y`.
    #[arg(long)]
    group: String,
    /// Member actions per phase, phases split by `|`, e.g. `L,R|R,L`.
    #[arg(long)]
    path: String,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Longest period of alternative group paths.
    #[arg(long, default_value_t = 3)]
    max_period: usize,
    #[arg(long, default_value = "pareto", value_parser = parse_mode)]
    mode: DeviationMode,
    #[arg(long, default_value = "correlated", value_parser = parse_kind)]
    minimax: MinimaxKind,
    /// Maximum number of candidate paths examined.
    #[arg(long, default_value_t = VerifyOptions::default().budget)]
    budget: usize,
}

impl SearchArgs {
    fn options(&self, discount: Option<Rational>) -> VerifyOptions {
        VerifyOptions {
            max_period: self.max_period,
            mode: self.mode,
            minimax: self.minimax,
            discount,
            budget: self.budget,
        }
    }
}

fn parse_mode(s: &str) -> Result<DeviationMode, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<MinimaxKind, String> {
    s.parse()
}

fn parse_delta(s: &str) -> Result<Rational, String> {
    let d = parse_rational(s).map_err(|e| e.to_string())?;
    if d <= Rational::from_integer(0.into()) || d >= Rational::from_integer(1.into()) {
        return Err(format!(
            "discount factor {s} must lie strictly between 0 and 1"
        ));
    }
    Ok(d)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pure and correlated minimax payoffs per player.
    Minimax {
        #[command(flatten)]
        game: GameArg,
    },
    /// Check one coordination plan.
    Verify {
        #[command(flatten)]
        game: GameArg,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Also require persistence at this discount factor.
        #[arg(long, value_parser = parse_delta)]
        delta: Option<Rational>,
    },
    /// List every type-k equilibrium up to the period bound.
    Enumerate {
        #[command(flatten)]
        game: GameArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Play reactive strategies for a number of rounds.
    Simulate {
        #[command(flatten)]
        game: GameArg,
        /// One preset per player: grim, myopic, fig2row, fig2col, const:A, path:A|B.
        #[arg(long)]
        strategies: String,
        /// Coordination group for grim and myopic presets.
        #[arg(long, requires = "path")]
        group: Option<String>,
        #[arg(long, requires = "group")]
        path: Option<String>,
        /// Last round index; rounds 0..=T are played.
        #[arg(long, default_value_t = 99)]
        rounds: usize,
        #[arg(long, env = "TYPEK_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_delta)]
        delta: Option<Rational>,
    },
    /// Feasible hull, frontier and projections.
    Geometry {
        #[command(flatten)]
        game: GameArg,
        /// Group whose Pareto frontier is reported.
        #[arg(long)]
        group: Option<String>,
        /// Two players to project onto, e.g. `X,Y`.
        #[arg(long)]
        project: Option<String>,
        #[arg(long, default_value = "correlated", value_parser = parse_kind)]
        minimax: MinimaxKind,
    },
    /// Coordination probability of the fig2 machines per round.
    Convergence {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        #[arg(long, env = "TYPEK_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn load_game(source: &str) -> Result<StageGame, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin_game(name).ok_or_else(|| {
            CliError::Usage(format!("unknown builtin game `{name}` (fig1, fig2, fig4)"))
        });
    }
    let text = fs::read_to_string(source).map_err(|source_err| CliError::Read {
        path: source.to_string(),
        source: source_err,
    })?;
    Ok(parse_game(&text)?)
}

fn players_of(game: &StageGame, spec: &str) -> Result<Vec<usize>, CliError> {
    Ok(spec
        .split(',')
        .map(|s| game.player_index(s.trim()))
        .collect::<Result<Vec<_>, _>>()?)
}

/// Left-aligned plain-text table.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| CliError::Write(io::Error::other(e));
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(row).map_err(to_io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Write(io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv is UTF-8"))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report is plain data") + "\n"
}

struct Rendered {
    text: String,
    success: bool,
}

impl From<String> for Rendered {
    fn from(text: String) -> Self {
        Rendered {
            text,
            success: true,
        }
    }
}

fn render(cmd: &Command, out: &OutputArgs) -> Result<Rendered, CliError> {
    let n = Numbers {
        decimal: out.decimal,
    };
    match cmd {
        Command::Minimax { game } => {
            let g = load_game(&game.game)?;
            let pure = (0..g.num_players())
                .map(|p| minimax_value(&g, p))
                .collect::<Result<Vec<_>, _>>()?;
            let corr = (0..g.num_players())
                .map(|p| correlated_minimax_value(&g, p))
                .collect::<Result<Vec<_>, _>>()?;
            let doc = MinimaxDoc::new(&g, &pure, &corr, n);
            let header = ["player", "pure", "punishers", "best_reply", "correlated"];
            let rows: Vec<Vec<String>> = doc
                .players
                .iter()
                .map(|r| {
                    vec![
                        r.player.clone(),
                        r.pure.clone(),
                        r.punishers.join(","),
                        r.best_reply.clone(),
                        r.correlated.clone(),
                    ]
                })
                .collect();
            Ok(match out.format {
                OutputFormat::Table => table(&header, &rows),
                OutputFormat::Csv => csv_text(&header, &rows)?,
                OutputFormat::Json => json(&doc),
            }
            .into())
        }
        Command::Verify {
            game,
            plan,
            search,
            delta,
        } => {
            let g = load_game(&game.game)?;
            let p = CoordinationPlan::parse(&g, &plan.group, &plan.path)?;
            let report = verify_type_k(&g, &p, &search.options(delta.clone()))?;
            let doc = ReportDoc::new(&g, &report, n);
            let text = match out.format {
                OutputFormat::Json => json(&doc),
                OutputFormat::Table | OutputFormat::Csv => {
                    let mut rows = vec![
                        ("verdict", verdict_label(&doc)),
                        ("group", doc.group.join(",")),
                        ("path", doc.path.clone()),
                        ("phases", doc.phases.join(" | ")),
                        ("mode", doc.mode.clone()),
                        ("max_period", doc.max_period.to_string()),
                        (
                            "minimax",
                            format!("{} ({})", tuple(&doc.minimax_point), doc.minimax_kind),
                        ),
                        ("profile_payoff", tuple(&doc.profile_payoff)),
                        ("guaranteed", tuple(&doc.guaranteed)),
                        ("eq4_holds", format!("{:?}", doc.eq4_holds)),
                        ("eq5_holds", doc.eq5_holds.to_string()),
                        ("folk_strict", doc.folk_strict.to_string()),
                        ("is_stage_ne", doc.is_stage_ne.to_string()),
                        ("stage_stable", doc.stage_stable.to_string()),
                        (
                            "group_pareto_optimal",
                            doc.group_pareto_optimal
                                .map_or("n/a".into(), |b| b.to_string()),
                        ),
                    ];
                    if let Some(w) = &doc.witness {
                        rows.push((
                            "witness",
                            format!("{} -> {}", w.phases.join(" | "), tuple(&w.payoff)),
                        ));
                    }
                    if let Some(d) = &doc.discount {
                        rows.push(("delta", format!("{} (holds: {})", d.delta, d.holds)));
                        for t in &d.thresholds {
                            rows.push((
                                "delta_star",
                                format!(
                                    "{}: {} (gain {}, loss {})",
                                    t.member, t.delta_star, t.gain, t.per_round_loss
                                ),
                            ));
                        }
                    }
                    let rows: Vec<Vec<String>> = rows
                        .into_iter()
                        .map(|(k, v)| vec![k.to_string(), v])
                        .collect();
                    if out.format == OutputFormat::Csv {
                        csv_text(&["field", "value"], &rows)?
                    } else {
                        table(&["field", "value"], &rows)
                    }
                }
            };
            Ok(Rendered {
                text,
                success: report.verdict(),
            })
        }
        Command::Enumerate { game, search } => {
            let g = load_game(&game.game)?;
            let opts = search.options(None);
            let reports = enumerate_type_k(&g, &opts)?;
            let doc = EnumerationDoc {
                game: g.name().to_string(),
                max_period: opts.max_period,
                mode: opts.mode.to_string(),
                equilibria: reports.iter().map(|r| ReportDoc::new(&g, r, n)).collect(),
            };
            let mut header = vec!["k", "group", "path"];
            header.extend(g.players().iter().map(String::as_str));
            header.extend(["folk_strict", "stage_ne", "stable"]);
            let rows: Vec<Vec<String>> = doc
                .equilibria
                .iter()
                .map(|r| {
                    let mut row = vec![r.k.to_string(), r.group.join(","), r.path.clone()];
                    row.extend(r.profile_payoff.iter().cloned());
                    row.extend([
                        r.folk_strict.to_string(),
                        r.is_stage_ne.to_string(),
                        r.stage_stable.to_string(),
                    ]);
                    row
                })
                .collect();
            Ok(match out.format {
                OutputFormat::Table => table(&header, &rows),
                OutputFormat::Csv => csv_text(&header, &rows)?,
                OutputFormat::Json => json(&doc),
            }
            .into())
        }
        Command::Simulate {
            game,
            strategies,
            group,
            path,
            rounds,
            seed,
            delta,
        } => {
            let g = load_game(&game.game)?;
            let plan = match (group, path) {
                (Some(k), Some(p)) => Some(CoordinationPlan::parse(&g, k, p)?),
                _ => None,
            };
            let presets = strategies
                .split(',')
                .map(str::parse::<StrategyPreset>)
                .collect::<Result<Vec<_>, _>>()?;
            if presets.len() != g.num_players() {
                return Err(CliError::Usage(format!(
                    "{} strategies given for {} players",
                    presets.len(),
                    g.num_players()
                )));
            }
            let machines = presets
                .iter()
                .enumerate()
                .map(|(p, s)| s.build(&g, p, plan.as_ref()))
                .collect::<Result<Vec<_>, _>>()?;
            let result = run(&g, &machines, *rounds, *seed, delta.as_ref())?;
            let doc = SimulationDoc::new(
                &g,
                presets.iter().map(|s| s.to_string()).collect(),
                &result,
                n,
            );
            Ok(match out.format {
                OutputFormat::Csv => {
                    let mut buf = Vec::new();
                    write_trace_csv(&g, &result, &mut buf, out.decimal)?;
                    String::from_utf8(buf).expect("csv is UTF-8")
                }
                OutputFormat::Json => json(&doc),
                OutputFormat::Table => {
                    let mut header = vec!["t".to_string()];
                    header.extend(g.players().iter().cloned());
                    header.extend(g.players().iter().map(|p| format!("u_{p}")));
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    let rows: Vec<Vec<String>> = doc
                        .trace
                        .iter()
                        .map(|r| {
                            std::iter::once(r.t.to_string())
                                .chain(r.actions.iter().cloned())
                                .chain(r.payoffs.iter().cloned())
                                .collect()
                        })
                        .collect();
                    let mut text = table(&header, &rows);
                    text += &format!("average {}\n", tuple(&doc.averages));
                    if let (Some(d), Some(v)) = (&doc.discount, &doc.discounted) {
                        text += &format!("discounted at {d} {}\n", tuple(v));
                    }
                    text
                }
            }
            .into())
        }
        Command::Geometry {
            game,
            group,
            project,
            minimax,
        } => {
            let g = load_game(&game.game)?;
            let geo = PayoffGeometry::feasible_hull_with(&g, *minimax)?;
            let mut export = geo.export(&g);
            if let Some(k) = group {
                let members = players_of(&g, k)?;
                export = export.with_frontier(&g, &geo.pareto_frontier(&members)?);
            }
            if let Some(axes) = project {
                let axes = players_of(&g, axes)?;
                let [a, b] = axes[..] else {
                    return Err(CliError::Usage(
                        "--project takes exactly two players".into(),
                    ));
                };
                export = export.with_projection(&g, (a, b), &geo.project((a, b))?);
            }
            let number = |s: &str| {
                if out.decimal {
                    parse_rational(s)
                        .map(|r| n.fmt(&r))
                        .unwrap_or_else(|_| s.to_string())
                } else {
                    s.to_string()
                }
            };
            Ok(match out.format {
                OutputFormat::Json => export.to_json() + "\n",
                OutputFormat::Csv => {
                    let mut buf = Vec::new();
                    export
                        .write_csv(&mut buf, &number)
                        .map_err(|e| CliError::Write(io::Error::other(e)))?;
                    String::from_utf8(buf).expect("csv is UTF-8")
                }
                OutputFormat::Table => {
                    let mut text = format!(
                        "minimax {}\n",
                        tuple(
                            &export
                                .minimax_point
                                .iter()
                                .map(|s| number(s))
                                .collect::<Vec<_>>()
                        )
                    );
                    let mut header = vec!["kind"];
                    header.extend(g.players().iter().map(String::as_str));
                    let mut rows: Vec<Vec<String>> = export
                        .vertices
                        .iter()
                        .map(|v| {
                            std::iter::once("vertex".to_string())
                                .chain(v.iter().map(|s| number(s)))
                                .collect()
                        })
                        .collect();
                    if let Some(f) = &export.frontier {
                        rows.extend(f.vertices.iter().map(|v| {
                            std::iter::once(format!("frontier[{}]", f.group.join(",")))
                                .chain(v.iter().map(|s| number(s)))
                                .collect()
                        }));
                    }
                    text += &table(&header, &rows);
                    if let Some(p) = &export.projection {
                        let rows: Vec<Vec<String>> = p
                            .polygon
                            .iter()
                            .map(|[x, y]| vec![number(x), number(y)])
                            .collect();
                        text += &format!(
                            "projection onto {},{} (counter-clockwise)\n",
                            p.axes[0], p.axes[1]
                        );
                        text += &table(&[p.axes[0].as_str(), p.axes[1].as_str()], &rows);
                    }
                    text
                }
            }
            .into())
        }
        Command::Convergence {
            trials,
            rounds,
            seed,
        } => {
            if *trials == 0 || *rounds == 0 {
                return Err(CliError::Usage(
                    "--trials and --rounds must be positive".into(),
                ));
            }
            let doc =
                ConvergenceDoc::new(&fig2_convergence_experiment(*trials, *rounds, *seed), *seed);
            let header = ["t", "coordinated", "empirical", "expected", "std_error"];
            let rows: Vec<Vec<String>> = doc
                .rounds
                .iter()
                .map(|r| {
                    vec![
                        r.t.to_string(),
                        r.coordinated.to_string(),
                        format!("{:.6}", r.empirical),
                        format!("{:.6}", r.expected),
                        format!("{:.6}", r.std_error),
                    ]
                })
                .collect();
            Ok(match out.format {
                OutputFormat::Table => table(&header, &rows),
                OutputFormat::Csv => csv_text(&header, &rows)?,
                OutputFormat::Json => json(&doc),
            }
            .into())
        }
    }
}

fn verdict_label(doc: &ReportDoc) -> String {
    match (doc.is_type_k, doc.verdict) {
        (true, true) => format!("type-{} equilibrium", doc.k),
        (true, false) => format!("type-{} equilibrium, fails the discount condition", doc.k),
        _ => "not a type-k equilibrium".into(),
    }
}

fn tuple(values: &[String]) -> String {
    format!("({})", values.join(", "))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rendered = match render(&cli.command, &cli.out) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out.output {
        Some(path) => fs::write(path, &rendered.text),
        None => io::stdout().write_all(rendered.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if rendered.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
