use std::error::Error;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use epidss_core::admiralty::{AdmiraltyGrade, GradedEvidence};
use epidss_core::bayes::{Evidence, NetworkDocument};
use epidss_core::consensus::{ExpertPosterior, PoolMethod};
use epidss_core::epi::{discretize_to_cpt, sample_ensemble, ParamPrior, Range, SirParams, Statistic};
use epidss_core::preparedness::template_document;
use epidss_core::risk::CostModel;
use epidss_service::{
    consensus, http, Branch, ConsensusRequest, CreateScenario, PosteriorQuery, Service, WhatIfRequest,
};
use serde::Serialize;

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "epidss", version, about = "Epidemic preparedness decision support")]
struct Cli {
    /// Scenario store directory.
    #[arg(long, env = "EPIDSS_STORE", default_value = "epidss-store", global = true)]
    store: PathBuf,
    /// Print the API documents as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the outbreak template network document.
    Template,
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    #[command(subcommand)]
    Evidence(EvidenceCmd),
    #[command(subcommand)]
    Cost(CostCmd),
    /// Posterior (and optionally risk) of one variable.
    Query {
        id: String,
        #[arg(long = "var")]
        variable: String,
        #[arg(long)]
        revision: Option<u64>,
        #[arg(long)]
        cost_model: Option<String>,
    },
    /// Compare the stored scenario with hypothetical observations.
    Whatif {
        id: String,
        #[arg(long = "var")]
        variable: String,
        #[command(flatten)]
        obs: Observations,
        #[arg(long)]
        cost_model: Option<String>,
    },
    /// Pool expert posteriors read from JSON files.
    Consensus {
        /// Files holding one expert posterior or an array of them.
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Sample an SIR ensemble, export its summaries and discretize a statistic.
    Ensemble(EnsembleArgs),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Create a scenario from a network document (the template by default).
    New {
        #[arg(long)]
        name: String,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    Show {
        id: String,
    },
    List,
}

#[derive(Subcommand)]
enum EvidenceCmd {
    /// Append graded evidence.
    Add {
        id: String,
        #[arg(long)]
        grade: AdmiraltyGrade,
        #[arg(long, default_value = "cli")]
        source: String,
        #[command(flatten)]
        obs: Observations,
    },
}

#[derive(Subcommand)]
enum CostCmd {
    /// Add or replace a named cost model.
    Set {
        id: String,
        #[arg(long)]
        name: String,
        #[arg(long = "var")]
        variable: String,
        /// `state=cost`, repeated.
        #[arg(long = "cost", value_parser = parse_pair::<f64>, required = true)]
        costs: Vec<(String, f64)>,
    },
}

#[derive(Args)]
struct Observations {
    /// Hard observation `Node=state`, repeatable.
    #[arg(long = "set", value_parser = parse_pair::<String>)]
    hard: Vec<(String, String)>,
    /// Likelihood `Node=l1,l2,..`, repeatable.
    #[arg(long = "soft", value_parser = parse_likelihood)]
    soft: Vec<(String, Vec<f64>)>,
}

impl Observations {
    fn evidence(self) -> Evidence {
        Evidence {
            hard: self.hard.into_iter().collect(),
            soft: self.soft.into_iter().collect(),
        }
    }
}

#[derive(Args)]
struct EnsembleArgs {
    /// `low:high` (or a single value).
    #[arg(long, value_parser = parse_range)]
    beta: Range,
    #[arg(long, value_parser = parse_range)]
    gamma: Range,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e6)]
    population: f64,
    #[arg(long, default_value_t = 10.0)]
    initial_infected: f64,
    #[arg(long, default_value_t = 200.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Write member summaries as CSV.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "attack-rate")]
    statistic: StatisticArg,
    /// Bin edges, comma separated; prints the resulting table row.
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StatisticArg {
    PeakInfected,
    AttackRate,
    PeakTime,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::PeakInfected => Statistic::PeakInfected,
            StatisticArg::AttackRate => Statistic::AttackRate,
            StatisticArg::PeakTime => Statistic::PeakTime,
        }
    }
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(String, T), String>
where
    T::Err: std::fmt::Display,
{
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.to_owned(), v.parse().map_err(|e| format!("`{v}`: {e}"))?))
}

fn parse_likelihood(s: &str) -> Result<(String, Vec<f64>), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NODE=l1,l2,.., got `{s}`"))?;
    let values = v
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    Ok((k.to_owned(), values))
}

fn parse_range(s: &str) -> Result<Range, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    match s.split_once(':') {
        Some((lo, hi)) => Ok(Range::new(num(lo)?, num(hi)?)),
        None => Ok(Range::point(num(s)?)),
    }
}

fn emit<T: Serialize>(json: bool, doc: &T, text: impl FnOnce() -> String) {
    let out = if json {
        serde_json::to_string_pretty(doc).expect("documents serialize")
    } else {
        text()
    };
    // a closed pipe (`| head`) is not an error worth a panic
    let _ = writeln!(io::stdout().lock(), "{out}");
}

fn format_dist(states: &[String], p: &[f64]) -> String {
    states
        .iter()
        .zip(p)
        .map(|(s, p)| format!("  {s:<12} {p:.6}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn format_branch(label: &str, states: &[String], b: &Branch) -> String {
    let mut out = format!("{label}:\n");
    match (&b.posterior, &b.error) {
        (Some(p), _) => out += &format_dist(states, p),
        (None, Some(e)) => out += &format!("  error: {e}"),
        (None, None) => {}
    }
    if let Some(r) = &b.risk {
        out += &format!(
            "\n  risk {:.6} (tail {:.6} at q={})",
            r.risk, r.tail_risk, r.tail_quantile
        );
    }
    out
}

fn read_experts(paths: &[PathBuf]) -> Result<Vec<ExpertPosterior>, Box<dyn Error>> {
    let mut experts = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.is_array() {
            experts.extend(serde_json::from_value::<Vec<ExpertPosterior>>(value)?);
        } else {
            experts.push(serde_json::from_value(value)?);
        }
    }
    Ok(experts)
}

fn run(cli: Cli) -> CliResult {
    let json = cli.json;
    let service = || Service::open(&cli.store);
    match cli.command {
        Command::Template => emit(false, &(), || template_document().to_json()),
        Command::Scenario(ScenarioCmd::New { name, network, seed }) => {
            let network = match network {
                Some(path) => NetworkDocument::from_json(&fs::read_to_string(path)?)?,
                None => template_document(),
            };
            let s = service()?.create_scenario(CreateScenario { name, network, seed })?;
            emit(json, &s, || format!("{} revision {}", s.id, s.revision));
        }
        Command::Scenario(ScenarioCmd::Show { id }) => {
            let s = service()?.scenario(&id)?;
            emit(json, &s, || {
                let mut out = format!(
                    "{} \"{}\" revision {} ({} evidence, {:?} engine, seed {})",
                    s.id,
                    s.name,
                    s.revision,
                    s.evidence.len(),
                    s.summary.engine.kind,
                    s.seed
                );
                for v in &s.network.variables {
                    out += &format!("\n{}:\n{}", v.id, format_dist(&v.states, &s.summary.marginals[&v.id]));
                }
                out
            });
        }
        Command::Scenario(ScenarioCmd::List) => {
            let list = service()?.list()?;
            emit(json, &list, || {
                list.iter()
                    .map(|s| format!("{}  r{}  {}", s.id, s.revision, s.name))
                    .collect::<Vec<_>>()
                    .join("\n")
            });
        }
        Command::Evidence(EvidenceCmd::Add { id, grade, source, obs }) => {
            let graded = GradedEvidence::new(obs.evidence(), grade, source);
            let r = service()?.submit_evidence(&id, graded)?;
            emit(json, &r, || format!("{} revision {}", r.scenario, r.revision));
        }
        Command::Cost(CostCmd::Set {
            id,
            name,
            variable,
            costs,
        }) => {
            let r = service()?.set_cost_model(&id, &name, CostModel::new(variable, costs))?;
            emit(json, &r, || format!("{} revision {}", r.scenario, r.revision));
        }
        Command::Query {
            id,
            variable,
            revision,
            cost_model,
        } => {
            let q = PosteriorQuery {
                variable,
                revision,
                cost_model,
            };
            let r = service()?.posterior(&id, &q)?;
            emit(json, &r, || {
                let mut out = format!(
                    "{} at revision {}:\n{}",
                    r.variable,
                    r.revision,
                    format_dist(&r.states, &r.posterior)
                );
                if let Some(risk) = &r.risk {
                    out += &format!(
                        "\nrisk {:.6} (tail {:.6} at q={})",
                        risk.risk, risk.tail_risk, risk.tail_quantile
                    );
                }
                out
            });
        }
        Command::Whatif {
            id,
            variable,
            obs,
            cost_model,
        } => {
            let req = WhatIfRequest {
                delta: obs.evidence(),
                query: variable,
                cost_model,
            };
            let r = service()?.what_if(&id, &req)?;
            emit(json, &r, || {
                format!(
                    "{} at revision {}\n{}\n{}",
                    r.query,
                    r.revision,
                    format_branch("baseline", &r.states, &r.baseline),
                    format_branch("hypothetical", &r.states, &r.hypothetical)
                )
            });
        }
        Command::Consensus { inputs } => {
            let req = ConsensusRequest {
                experts: read_experts(&inputs)?,
                method: PoolMethod::Linear,
            };
            let r = consensus(&req)?;
            emit(json, &r, || {
                let pooled: Vec<String> = r.pooled.iter().map(|p| format!("{p:.6}")).collect();
                let mut out = format!("pooled [{}]", pooled.join(", "));
                if let Some(c) = r.conflict {
                    out += &format!("\nconflict {c:.6}");
                }
                out
            });
        }
        Command::Ensemble(args) => ensemble(json, args)?,
        Command::Serve { addr } => {
            let app = http::router(Arc::new(service()?));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                log::info!("listening on {addr}");
                eprintln!("listening on http://{addr}");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EnsembleReport {
    members: usize,
    seed: u64,
    statistic: Statistic,
    thresholds: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    row: Option<Vec<f64>>,
}

fn ensemble(json: bool, a: EnsembleArgs) -> CliResult {
    let base = SirParams {
        population: a.population,
        initial_infected: a.initial_infected,
        horizon: a.horizon,
        dt: a.dt,
        ..SirParams::default()
    };
    let prior = ParamPrior {
        beta: a.beta,
        gamma: a.gamma,
    };
    let ens = sample_ensemble(&prior, &base, a.n, a.seed)?;
    if let Some(path) = &a.export {
        ens.export_csv(fs::File::create(path)?)?;
    }
    let statistic = Statistic::from(a.statistic);
    let row = if a.thresholds.is_empty() {
        None
    } else {
        Some(discretize_to_cpt(&ens, statistic, &a.thresholds)?)
    };
    let report = EnsembleReport {
        members: ens.len(),
        seed: a.seed,
        statistic,
        thresholds: a.thresholds,
        row,
    };
    emit(json, &report, || {
        let mut out = format!("{} members (seed {})", report.members, report.seed);
        if let Some(path) = &a.export {
            out += &format!(", summaries written to {}", path.display());
        }
        if let Some(row) = &report.row {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.6}")).collect();
            out += &format!("\nrow [{}]", cells.join(", "));
        }
        out
    });
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
