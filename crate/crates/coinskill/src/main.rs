//! Command-line front end: `estimate` runs the full pipeline on a file or
//! a synthetic instance, `experiment` runs the built-in Monte Carlo
//! studies, and `check-graph` reports the identifiability verdict only.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition/parameter error,
//! 4 numerical divergence. Set `RUST_LOG` for log verbosity.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use coinskill::correlation::empirical_correlations;
use coinskill::diagnostics::noise_bound;
use coinskill::error::{Error, Result};
use coinskill::estimator::{pgd_estimate, Init, PgdConfig, SkillEstimate, Weighting};
use coinskill::experiment::{derive_seed, run_study, Study};
use coinskill::graph::{check_identifiability, interaction_stats, InteractionStats};
use coinskill::inference::{
    predict_binary, predict_multiclass, prediction_error, MulticlassIndicator, WeightVector,
};
use coinskill::io::{load_observations, load_truth, LoadedObservations};
use coinskill::model::{
    generate_assignment, sample_observations, sample_skills, sample_truth, AssignmentSpec,
    Instance, LabelKind, ObservationSet, SkillDistributionSpec,
};
use coinskill::report::{
    conditions_table, predictions_table, skills_table, write_json, EstimateReport,
    ExperimentReport,
};

#[derive(Parser)]
#[command(
    name = "coinskill",
    about = "Estimate crowdworker skills from unlabeled votes and aggregate task labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate skills and predict labels for one dataset.
    Estimate(EstimateArgs),
    /// Run a built-in Monte Carlo study and emit summary tables.
    Experiment(ExperimentArgs),
    /// Report the identifiability verdict of the interaction graph.
    CheckGraph(CheckGraphArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Observation file of worker,task,label triples (comma or tab
    /// delimited).
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Generate a synthetic clique instance instead of reading a file.
    #[arg(long)]
    synthetic: bool,
    /// Workers in the synthetic instance.
    #[arg(long, default_value_t = 11)]
    workers: usize,
    /// Tasks in the synthetic instance.
    #[arg(long, default_value_t = 300)]
    tasks: usize,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Label mode of the input file.
    #[arg(long, default_value = "binary", value_parser = ["binary", "multiclass"])]
    mode: String,
    /// Edge weighting B(N_ij): binary, identity or square.
    #[arg(long, default_value = "identity", value_parser = parse_weighting)]
    weighting: Weighting,
    /// Projection margin parameter.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Step size; defaults to 1 / (4 max_i sum_j B(N_ij)).
    #[arg(long)]
    step_size: Option<f64>,
    /// Convergence tolerance (infinity norm of the parameter change).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ground-truth file of task,label pairs; enables error reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output directory for report.json, skills.tsv and predictions.tsv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Multiclass only: score with a {-1,+1} match indicator instead of
    /// the default {0,1} indicator.
    #[arg(long)]
    plus_minus_indicator: bool,
    /// Multiclass only: average the per-class skill vectors into one
    /// common vector before scoring.
    #[arg(long)]
    common_skill: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// One of noise_vs_tasks, weighting_ablation, skill_distributions,
    /// graph_size.
    #[arg(long, value_parser = parse_study)]
    study: Study,
    #[arg(long, default_value_t = 300)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for experiment.json and conditions.tsv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckGraphArgs {
    #[command(flatten)]
    input: InputArgs,
}

fn parse_weighting(s: &str) -> std::result::Result<Weighting, String> {
    s.parse::<Weighting>().map_err(|e| e.to_string())
}

fn parse_study(s: &str) -> std::result::Result<Study, String> {
    s.parse::<Study>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => run_estimate(args),
        Command::Experiment(args) => run_experiment(args),
        Command::CheckGraph(args) => run_check_graph(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// A loaded or generated dataset plus optional synthetic truth.
struct Dataset {
    observations: ObservationSet,
    worker_ids: Vec<String>,
    task_ids: Vec<String>,
    class_labels: Vec<String>,
    truth: Option<Vec<i32>>,
    true_skills: Option<Vec<f64>>,
    notices: Vec<String>,
}

fn resolve_input(input: &InputArgs, multiclass: bool, seed: u64) -> Result<Dataset> {
    match (&input.input, input.synthetic) {
        (Some(path), false) => {
            let loaded = load_observations(path, multiclass)?;
            Ok(Dataset {
                worker_ids: loaded.worker_ids.clone(),
                task_ids: loaded.task_ids.clone(),
                class_labels: loaded.class_labels.clone(),
                notices: loaded.notices.clone(),
                observations: loaded.observations,
                truth: None,
                true_skills: None,
            })
        }
        (None, true) => {
            if multiclass {
                return Err(Error::Parameter(
                    "synthetic instances are binary; drop --mode multiclass".into(),
                ));
            }
            let skills = sample_skills(
                &SkillDistributionSpec::UniformGrid { lo: -0.3, hi: 0.8 },
                input.workers,
                derive_seed(seed, "skills", 0),
            )?;
            let assignment = generate_assignment(&AssignmentSpec::Full {
                num_workers: input.workers,
                num_tasks: input.tasks,
            })?;
            let truth = sample_truth(input.tasks, derive_seed(seed, "truth", 0));
            let instance = Instance::new(skills.clone(), assignment, truth.clone())?;
            let observations = sample_observations(&instance, derive_seed(seed, "labels", 0));
            Ok(Dataset {
                observations,
                worker_ids: (0..input.workers).map(|i| format!("w{i}")).collect(),
                task_ids: (0..input.tasks).map(|t| format!("t{t}")).collect(),
                class_labels: Vec::new(),
                truth: Some(truth.iter().map(|&g| g as i32).collect()),
                true_skills: Some(skills),
                notices: Vec::new(),
            })
        }
        _ => Err(Error::Parameter(
            "exactly one of --input and --synthetic is required".into(),
        )),
    }
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let multiclass = args.mode == "multiclass";
    let mut data = resolve_input(&args.input, multiclass, args.seed)?;
    if let Some(path) = &args.truth {
        let loaded = LoadedObservations {
            observations: data.observations.clone(),
            worker_ids: data.worker_ids.clone(),
            task_ids: data.task_ids.clone(),
            class_labels: data.class_labels.clone(),
            notices: Vec::new(),
        };
        data.truth = Some(load_truth(path, &loaded)?);
    }

    let stats = interaction_stats(&data.observations.assignment(), data.observations.num_workers())?;
    let verdict = check_identifiability(&stats);
    let pgd = PgdConfig {
        step_size: args.step_size,
        tau: args.tau,
        weighting: args.weighting,
        max_iters: args.max_iters,
        tol: args.tol,
        init: Init::Seeded(derive_seed(args.seed, "init", 0)),
        fix_sign: true,
    };
    let config_echo = serde_json::json!({
        "input": args.input.input,
        "synthetic": args.input.synthetic,
        "workers": args.input.workers,
        "tasks": args.input.tasks,
        "mode": args.mode,
        "pgd": &pgd,
        "seed": args.seed,
        "truth": args.truth,
        "plus_minus_indicator": args.plus_minus_indicator,
        "common_skill": args.common_skill,
    });

    let mut warnings = data.notices.clone();
    let report = if multiclass {
        estimate_multiclass(&args, &data, &stats, &pgd, &mut warnings)?
    } else {
        estimate_binary(&data, &stats, &pgd, &mut warnings)?
    };

    let (skills, skills_per_class, estimate, predictions, pe) = report;
    let robustness = match (&data.true_skills, &skills) {
        (Some(true_skills), Some(_)) => {
            let corr = empirical_correlations(&data.observations, &stats)?;
            noise_bound(&stats, true_skills, &corr).ok()
        }
        _ => None,
    };
    if !verdict.identifiable {
        warnings.push(
            "interaction graph is not identifiable; estimates may not be unique".into(),
        );
    }
    warnings.extend(estimate.warnings.iter().cloned());

    let report = EstimateReport {
        config: config_echo,
        identifiability: verdict,
        skills: skills.clone(),
        skills_per_class: skills_per_class.clone(),
        converged: estimate.converged,
        iterations: estimate.iterations,
        final_loss: estimate.final_loss,
        predictions: predictions.clone(),
        prediction_error: pe,
        robustness,
        warnings,
    };

    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("report.json"), &report)?;
    let per_class: Vec<Vec<f64>> = match (&skills, &skills_per_class) {
        (Some(s), _) => vec![s.clone()],
        (None, Some(pc)) => pc.clone(),
        _ => unreachable!(),
    };
    std::fs::write(
        args.out.join("skills.tsv"),
        skills_table(&data.worker_ids, &per_class),
    )?;
    let labels = if data.class_labels.is_empty() {
        None
    } else {
        Some(data.class_labels.as_slice())
    };
    std::fs::write(
        args.out.join("predictions.tsv"),
        predictions_table(&data.task_ids, &predictions, labels, data.truth.as_deref()),
    )?;
    if let Some(pe) = pe {
        println!("prediction_error\t{pe}");
    }
    println!(
        "converged\t{}\niterations\t{}\nfinal_loss\t{}",
        report.converged, report.iterations, report.final_loss
    );
    Ok(())
}

type EstimateOutput = (
    Option<Vec<f64>>,
    Option<Vec<Vec<f64>>>,
    SkillEstimate,
    Vec<i32>,
    Option<f64>,
);

fn estimate_binary(
    data: &Dataset,
    stats: &InteractionStats,
    pgd: &PgdConfig,
    _warnings: &mut Vec<String>,
) -> Result<EstimateOutput> {
    let corr = empirical_correlations(&data.observations, stats)?;
    let est = pgd_estimate(stats, &corr, pgd)?;
    let weights = WeightVector::from_skills(&est.skills)?;
    let predictions: Vec<i32> = predict_binary(&data.observations, &weights)?
        .iter()
        .map(|&y| y as i32)
        .collect();
    let pe = match &data.truth {
        Some(t) => Some(prediction_error(&predictions, t)?),
        None => None,
    };
    Ok((Some(est.skills.clone()), None, est, predictions, pe))
}

fn estimate_multiclass(
    args: &EstimateArgs,
    data: &Dataset,
    stats: &InteractionStats,
    pgd: &PgdConfig,
    warnings: &mut Vec<String>,
) -> Result<EstimateOutput> {
    let num_classes = match data.observations.kind() {
        LabelKind::Multiclass { classes } => classes,
        LabelKind::Binary => {
            return Err(Error::Parameter(
                "--mode multiclass needs a multiclass input file".into(),
            ))
        }
    };
    let mut per_class = Vec::with_capacity(num_classes);
    let mut last_est = None;
    for k in 1..=num_classes {
        let binary = data.observations.one_vs_rest(k)?;
        let corr = empirical_correlations(&binary, stats)?;
        let config = PgdConfig {
            init: Init::Seeded(derive_seed(args.seed, "init", k as u64)),
            ..pgd.clone()
        };
        let est = pgd_estimate(stats, &corr, &config)?;
        for w in &est.warnings {
            warnings.push(format!("class {k}: {w}"));
        }
        per_class.push(est.skills.clone());
        last_est = Some(est);
    }
    if args.common_skill {
        let w = stats.num_workers();
        let common: Vec<f64> = (0..w)
            .map(|i| per_class.iter().map(|s| s[i]).sum::<f64>() / num_classes as f64)
            .collect();
        per_class = vec![common; num_classes];
    }
    let indicator = if args.plus_minus_indicator {
        MulticlassIndicator::PlusMinus
    } else {
        MulticlassIndicator::ZeroOne
    };
    let predictions = predict_multiclass(&data.observations, &per_class, indicator)?;
    let pe = match &data.truth {
        Some(t) => Some(prediction_error(&predictions, t)?),
        None => None,
    };
    Ok((None, Some(per_class), last_est.unwrap(), predictions, pe))
}

fn run_experiment(args: ExperimentArgs) -> Result<()> {
    let rows = run_study(args.study, args.trials, args.seed)?;
    let report = ExperimentReport {
        config: serde_json::json!({
            "study": args.study,
            "trials": args.trials,
            "seed": args.seed,
        }),
        rows: rows.clone(),
    };
    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("experiment.json"), &report)?;
    let table = conditions_table(&rows);
    std::fs::write(args.out.join("conditions.tsv"), &table)?;
    print!("{table}");
    Ok(())
}

fn run_check_graph(args: CheckGraphArgs) -> Result<()> {
    let data = resolve_input(&args.input, false, 0)?;
    let stats = interaction_stats(&data.observations.assignment(), data.observations.num_workers())?;
    let verdict = check_identifiability(&stats);
    let mut text = serde_json::to_string_pretty(&verdict).expect("verdict serialization");
    text.push('\n');
    print!("{text}");
    Ok(())
}
