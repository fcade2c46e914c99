use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use credalcat::engine::{CredalBound, PickKind, PickPolicy, StoppingRule, TestEngine, TestModel};
use credalcat::model::{
    chain_bank, fig1, load_model, perturb_to_credal, single_skill_bank, AnyNetwork, ChainBankSpec, PerturbationSpec,
};
use credalcat::sim::{export_metrics, run_experiment, ExperimentConfig};
use credalcat::Error;
use credalcat_service::{Service, ServiceConfig};

/// Adaptive tests over Bayesian and credal networks.
#[derive(Debug, Parser)]
#[command(name = "credalcat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file. Exit 0 if valid, 1 with a violation list if the
    /// model is inconsistent, 2 if the file cannot be parsed.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the score table of the candidate questions.
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Answers given so far, as `QUESTION=STATE`; repeat or separate by commas.
        #[arg(long, value_delimiter = ',')]
        evidence: Vec<String>,
        /// Only this question.
        #[arg(long)]
        question: Option<String>,
        #[arg(long, value_enum, default_value_t = ScoreArg::Dm)]
        score: ScoreArg,
        /// Model kind; defaults to the kind of the file.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Bound that ranks credal scores [default: midpoint for dm, lower for entropy]
        #[arg(long, value_enum)]
        bound: Option<BoundArg>,
        /// Interval half-width turning a Bayesian file into a credal model
        /// for `--kind credal`.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run a simulation experiment and write its metrics as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Serve the session API.
    Serve {
        /// Directory of `*.model` files, registered under their file stem.
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Enables the score table and trace endpoints.
        #[arg(long)]
        instructor_token: Option<String>,
        /// Event log [default: <models>/events.jsonl]
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Bundled question banks.
    Bank {
        #[command(subcommand)]
        command: BankCommand,
    },
}

#[derive(Debug, Subcommand)]
enum BankCommand {
    /// Write a bundled bank as a model file.
    Export {
        #[arg(value_enum)]
        bank: BankArg,
        #[arg(long)]
        out: PathBuf,
        /// Write the credal version with this interval half-width.
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreArg {
    Entropy,
    Dm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Bayesian,
    Credal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundArg {
    Lower,
    Upper,
    Midpoint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BankArg {
    Fig1,
    SingleSkill,
    Chain,
}

/// Message and exit status of a failed command.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Schema { .. } | Error::Io(_) => Failure::usage(e.to_string()),
            Error::Invalid(vs) => Failure::domain(
                std::iter::once(format!("{} violation(s):", vs.len()))
                    .chain(vs.iter().map(|v| format!("  {v}")))
                    .collect::<Vec<_>>()
                    .join("\n"),
            ),
            other => Failure::domain(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_model(path: &Path) -> Result<AnyNetwork, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    load_model(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn validate(model: &Path) -> CmdResult {
    let net = read_model(model)?;
    let s = net.structure();
    println!(
        "{}: valid {} model, {} skills, {} questions",
        model.display(),
        match net.kind() {
            credalcat::model::ModelKind::Bayesian => "bayesian",
            credalcat::model::ModelKind::Credal => "credal",
        },
        s.skills().len(),
        s.questions().len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn score(
    model: &Path,
    evidence: &[String],
    question: Option<&str>,
    score: ScoreArg,
    kind: Option<KindArg>,
    bound: Option<BoundArg>,
    epsilon: Option<f64>,
) -> CmdResult {
    let net = read_model(model)?;
    let test_model = match (net, kind, epsilon) {
        (AnyNetwork::Bayesian(bn), Some(KindArg::Credal), Some(eps)) => {
            TestModel::Credal(Arc::new(perturb_to_credal(&bn, &PerturbationSpec::new(eps))?))
        }
        (AnyNetwork::Bayesian(_), Some(KindArg::Credal), None) => {
            return Err(Failure::usage("--kind credal with a Bayesian model needs --epsilon"))
        }
        (AnyNetwork::Credal(_), Some(KindArg::Bayesian), _) => {
            return Err(Failure::usage("the model is credal; drop --kind bayesian"))
        }
        (AnyNetwork::Credal(_), _, Some(_)) => return Err(Failure::usage("--epsilon needs a Bayesian model")),
        (AnyNetwork::Bayesian(_), None | Some(KindArg::Bayesian), Some(_)) => {
            return Err(Failure::usage("--epsilon needs --kind credal"))
        }
        (net, _, _) => TestModel::from(net),
    };
    let credal = matches!(test_model, TestModel::Credal(_));
    let mut policy = PickPolicy::new(match score {
        ScoreArg::Entropy => PickKind::EntropyGain,
        ScoreArg::Dm => PickKind::DmGain,
    });
    if let Some(b) = bound {
        policy.credal_bound = match b {
            BoundArg::Lower => CredalBound::Lower,
            BoundArg::Upper => CredalBound::Upper,
            BoundArg::Midpoint => CredalBound::Midpoint,
        };
    }
    let engine = TestEngine::new(test_model, policy, StoppingRule::exhaust())?;
    let mut session = engine.start(0)?;
    for item in evidence {
        let (q, state) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("evidence `{item}` is not QUESTION=STATE")))?;
        engine.submit_labels(&mut session, q.trim(), state.trim())?;
    }
    let s = engine.model().structure();
    if let Some(q) = question {
        let v = s.find(q).ok_or_else(|| Failure::domain(format!("unknown question `{q}`")))?;
        if s.variable(v).role != credalcat::Role::Question {
            return Err(Failure::domain(format!("`{q}` is not a question")));
        }
        if session.evidence().contains(v) {
            return Err(Failure::domain(format!("`{q}` is already answered")));
        }
    }
    let pick = engine.pick_next(&session)?;
    let name = match score {
        ScoreArg::Entropy => "entropy",
        ScoreArg::Dm => "dm",
    };
    println!("current {name} score: {:.4}", engine.current_score(&session)?);
    if credal {
        println!("{:<12} {:>10} {:>12} {:>12}", "question", "gain", "cond_lower", "cond_upper");
    } else {
        println!("{:<12} {:>10} {:>12}", "question", "gain", "conditional");
    }
    for entry in pick.scores.iter().filter(|e| question.is_none_or(|q| e.question == q)) {
        let c = entry.conditional.unwrap_or(credalcat::scores::ScoreValue::point(f64::NAN));
        if credal {
            println!("{:<12} {:>10.4} {:>12.4} {:>12.4}", entry.question, entry.value, c.lower, c.upper);
        } else {
            println!("{:<12} {:>10.4} {:>12.4}", entry.question, entry.value, c.lower);
        }
    }
    if question.is_none() {
        println!("next: {}", pick.question);
    }
    Ok(())
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> CmdResult {
    let text = std::fs::read_to_string(config).map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let exp = cfg.resolve(config.parent().unwrap_or(Path::new(".")))?;
    let series = run_experiment(&exp)?;
    export_metrics(&series, out)?;
    let last = exp.checkpoints.last().copied().unwrap_or(0);
    for s in &series {
        println!(
            "{:<12} accuracy {:.4}  brier {:.4}  at {last} questions",
            s.arm,
            s.accuracy.last().copied().unwrap_or(f64::NAN),
            s.brier.last().copied().unwrap_or(f64::NAN)
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn serve(models: &Path, host: &str, port: u16, token: Option<String>, data: Option<PathBuf>) -> CmdResult {
    if !models.is_dir() {
        return Err(Failure::usage(format!("{} is not a directory", models.display())));
    }
    let config = ServiceConfig {
        models_dir: Some(models.to_path_buf()),
        event_log: Some(data.unwrap_or_else(|| models.join("events.jsonl"))),
        instructor_token: token,
    };
    let service = Service::open(&config).map_err(Failure::domain)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::domain(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::domain(format!("cannot listen on {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Failure::domain(e.to_string()))?;
        println!("listening on http://{addr}");
        credalcat_service::serve(listener, Arc::new(service))
            .await
            .map_err(|e| Failure::domain(e.to_string()))
    })
}

fn export(bank: BankArg, out: &Path, epsilon: Option<f64>) -> CmdResult {
    let bn = match bank {
        BankArg::Fig1 => fig1(),
        BankArg::SingleSkill => single_skill_bank(),
        BankArg::Chain => chain_bank(&ChainBankSpec::default()),
    };
    let net = match epsilon {
        Some(eps) => AnyNetwork::Credal(perturb_to_credal(&bn, &PerturbationSpec::new(eps))?),
        None => AnyNetwork::Bayesian(bn),
    };
    std::fs::write(out, net.to_document()).map_err(|e| Failure::domain(format!("{}: {e}", out.display())))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Score {
            model,
            evidence,
            question,
            score: s,
            kind,
            bound,
            epsilon,
        } => score(&model, &evidence, question.as_deref(), s, kind, bound, epsilon),
        Command::Simulate { config, out, seed } => simulate(&config, &out, seed),
        Command::Serve {
            models,
            port,
            host,
            instructor_token,
            data,
        } => serve(&models, &host, port, instructor_token, data),
        Command::Bank {
            command: BankCommand::Export { bank, out, epsilon },
        } => export(bank, &out, epsilon),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
