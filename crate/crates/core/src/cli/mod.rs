//! Pipelines behind the `fairleak` binary.
//!
//! Exit codes: 0 success, 1 theorem verification failed, 2 usage or
//! configuration error, 3 data error, 4 numeric divergence.
//!
//! All randomness derives from `--seed` via [`SeedPlan`] offsets
//! (split +1, target +2, attack +3, defense +4, sampling +5).

mod pipeline;
mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use pipeline::{
    attack_predictions, attack_suite, audit_dataset, audit_predictions, aux_halves, egd_sweep,
    expected_train_level, train_target, AuditArtifacts, AuditConfig, DefenseConfig, EpsSweepRow,
    TargetKind,
};
pub use report::{
    flatten_json, AttackRecord, AttackTable, AuditReport, ClassBalance, DatasetSummary,
    DefenseReport, LabelMode, SeedPlan, Utility, REPORT_VERSION,
};

use crate::data::{
    load_csv_with, load_predictions_csv, make_split, synth_biased, write_atomic, write_csv,
    write_predictions_csv, LoadOptions, PredictionFile, Predictions, SplitPlan, SynthSpec,
    TabularDataset,
};
use crate::fairness::{
    advdebias_train, egd_train, expected_positive, AdvDebiasConfig, EgdConfig, FairnessConstraint,
};
use crate::metrics::RocCurve;
use crate::models::{predict_soft, TrainConfig};
use crate::oracle::{verify_theorems, FormulaVariant};
use crate::{select, Error, Result, SoftPredictions};

#[derive(Debug, Parser)]
#[command(
    name = "fairleak",
    version,
    about = "Audit how much a classifier's outputs reveal a censored sensitive attribute"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base seed; every random stream is derived from it
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for outputs
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Treat censoring violations (a feature equal to S) as errors
    #[arg(long, global = true)]
    pub strict: bool,
    /// Format of reports
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Logreg,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DefenseArg {
    None,
    Egd,
    Advdebias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Dempar,
    Eqodds,
}

impl From<ConstraintArg> for FairnessConstraint {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::Dempar => FairnessConstraint::DemPar,
            ConstraintArg::Eqodds => FairnessConstraint::EqOdds,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct DataArgs {
    /// Dataset CSV with a header row
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub label_col: String,
    #[arg(long, default_value = "s")]
    pub sensitive_col: String,
}

#[derive(Debug, Args, Clone)]
pub struct SplitArgs {
    /// Fraction of rows held out as test data (the adversary's auxiliary data)
    #[arg(long, default_value_t = 0.2)]
    pub te_fraction: f64,
    /// Fraction of the test rows used to tune the attack
    #[arg(long, default_value_t = 0.8)]
    pub aux_tr_fraction: f64,
    /// Do not stratify splits on the sensitive attribute
    #[arg(long)]
    pub no_stratify: bool,
    /// Use a split written by `split` instead of drawing one
    #[arg(long)]
    pub split: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Mlp)]
    pub model: ModelArg,
    /// Hidden layer widths for the network
    #[arg(long, value_delimiter = ',', default_value = "32,32,32,32")]
    pub hidden: Vec<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

impl ModelArgs {
    fn target(&self) -> (TargetKind, TrainConfig) {
        let kind = match self.model {
            ModelArg::Logreg => TargetKind::Logreg,
            ModelArg::Mlp => TargetKind::Mlp {
                hidden: self.hidden.clone(),
            },
        };
        let mut cfg = kind.default_cfg();
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(lr) = self.lr {
            cfg.learning_rate = lr;
        }
        cfg.batch_size = self.batch_size.or(cfg.batch_size);
        (kind, cfg)
    }
}

#[derive(Debug, Args, Clone)]
pub struct DefenseArgs {
    #[arg(long, value_enum, default_value_t = ConstraintArg::Dempar)]
    pub constraint: ConstraintArg,
    /// Constraint slack for EGD
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// EGD rounds
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    /// Adversary weight for adversarial debiasing
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Adversarial debiasing rounds
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
}

impl DefenseArgs {
    fn egd(&self) -> EgdConfig {
        EgdConfig {
            constraint: self.constraint.into(),
            eps: self.eps,
            iterations: self.iterations,
            ..EgdConfig::default()
        }
    }

    fn advdebias(&self, hidden: &[usize]) -> AdvDebiasConfig {
        AdvDebiasConfig {
            adversary_weight: self.alpha,
            rounds: self.rounds,
            hidden: hidden.to_vec(),
            ..AdvDebiasConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a biased synthetic dataset (CSV plus a JSON sidecar)
    Synth {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p_s1: f64,
        /// P(Y=1|S=0),P(Y=1|S=1)
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5])]
        p_y1: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        mean_shift: f64,
        #[arg(long, default_value_t = 1.0)]
        leak_shift: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Match the requested cell frequencies exactly
        #[arg(long)]
        exact: bool,
        #[arg(short, long, default_value = "synth.csv")]
        output: PathBuf,
    },
    /// Draw a seeded train/test/auxiliary split (split.json)
    Split {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Train a target model without S (model.json, predictions.csv on test rows)
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run the attribute-inference attacks on a predictions CSV (columns score|hard, s[, y])
    Attack {
        #[arg(long)]
        predictions: PathBuf,
        /// Fraction of rows used to tune the attack
        #[arg(long, default_value_t = 0.8)]
        aux_tr_fraction: f64,
    },
    /// Train a fairness-constrained model (fair_model.json, fair_predictions.csv)
    FairTrain {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, value_enum, default_value_t = DefenseArg::Egd)]
        method: DefenseArg,
        #[command(flatten)]
        defense: DefenseArgs,
        #[arg(long, value_delimiter = ',', default_value = "32,32,32,32")]
        hidden: Vec<usize>,
    },
    /// Full audit: train, measure fairness and utility, attack, optionally defend (report.json, roc.json, eps_sweep.json)
    Audit {
        #[arg(
            long,
            conflicts_with = "predictions",
            required_unless_present = "predictions"
        )]
        data: Option<PathBuf>,
        /// Audit a predictions CSV instead of training a model
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long, default_value = "y")]
        label_col: String,
        #[arg(long, default_value = "s")]
        sensitive_col: String,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = DefenseArg::None)]
        defense: DefenseArg,
        #[command(flatten)]
        defense_args: DefenseArgs,
        /// EGD slack values to sweep when --defense egd
        #[arg(long, value_delimiter = ',', default_value = "1,0.3,0.1,0.01")]
        eps_sweep: Vec<f64>,
    },
    /// Check the attack/fairness identities on exact finite laws (exit 1 on failure)
    VerifyTheorems {
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        /// Negates the equalized-odds closed form, to confirm failures are caught
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Export plot data from an audit directory.
    ///
    /// roc.csv: upsilon,fpr,tpr. eps_sweep.csv: eps,dempar_level,attack_accuracy,accuracy.
    Plotdata {
        /// Directory holding roc.json (and optionally eps_sweep.json); defaults to --out-dir
        #[arg(long)]
        input_dir: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_path(g: &GlobalArgs, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        g.out_dir.join(p)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes `stem.json` or a flattened `stem.csv` (key,value) per `--format`.
fn emit(g: &GlobalArgs, stem: &str, value: &impl Serialize) -> Result<PathBuf> {
    match g.format {
        Format::Json => {
            let path = g.out_dir.join(format!("{stem}.json"));
            write_json(&path, value)?;
            Ok(path)
        }
        Format::Csv => {
            let path = g.out_dir.join(format!("{stem}.csv"));
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["key", "value"])?;
            for (k, v) in flatten_json(&serde_json::to_value(value)?) {
                wtr.write_record([k, v])?;
            }
            let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            write_atomic(&path, &bytes)?;
            Ok(path)
        }
    }
}

fn load(g: &GlobalArgs, d: &DataArgs) -> Result<TabularDataset> {
    load_csv_with(
        &d.data,
        &d.label_col,
        &d.sensitive_col,
        LoadOptions { strict: g.strict },
    )
}

fn resolve_split(ds: &TabularDataset, a: &SplitArgs, seeds: &SeedPlan) -> Result<SplitPlan> {
    match &a.split {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let plan: SplitPlan = serde_json::from_str(&text)?;
            plan.validate(ds.len())?;
            Ok(plan)
        }
        None => make_split(
            ds,
            a.te_fraction,
            a.aux_tr_fraction,
            seeds.split,
            !a.no_stratify,
        ),
    }
}

fn test_predictions(
    ds: &TabularDataset,
    split: &SplitPlan,
    scores: SoftPredictions,
) -> PredictionFile {
    PredictionFile {
        predictions: Predictions::Soft(scores.select(&split.te)),
        sensitive: select(ds.sensitive(), &split.te),
        labels: Some(select(ds.labels(), &split.te)),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let seeds = SeedPlan::from_base(g.seed);
    std::fs::create_dir_all(&g.out_dir)?;
    match &cli.command {
        Command::Synth {
            n,
            p_s1,
            p_y1,
            mean_shift,
            leak_shift,
            d,
            exact,
            output,
        } => {
            if p_y1.len() != 2 {
                return Err(Error::InvalidSpec(
                    "--p-y1 takes two comma-separated values".into(),
                ));
            }
            let spec = SynthSpec {
                n: *n,
                p_s1: *p_s1,
                p_y1_given_s: (p_y1[0], p_y1[1]),
                mean_shift: *mean_shift,
                leak_shift: *leak_shift,
                d: *d,
                exact_frequency: *exact,
            };
            let ds = synth_biased(&spec, g.seed)?;
            let path = out_path(g, output);
            write_csv(&ds, &path, "y", "s")?;
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".json");
            let meta = serde_json::json!({
                "seed": g.seed,
                "spec": spec,
                "label_col": "y",
                "sensitive_col": "s",
                "rows": ds.len(),
            });
            write_json(Path::new(&sidecar), &meta)?;
            log::info!("wrote {}", path.display());
        }
        Command::Split { data, split } => {
            let ds = load(g, data)?;
            let plan = resolve_split(&ds, split, &seeds)?;
            write_json(&g.out_dir.join("split.json"), &plan)?;
        }
        Command::Train { data, split, model } => {
            let ds = load(g, data)?;
            let plan = resolve_split(&ds, split, &seeds)?;
            let (kind, mut cfg) = model.target();
            cfg.seed = seeds.target;
            let m = train_target(&ds.subset(&plan.tr), &kind, &cfg)?;
            write_json(&g.out_dir.join("model.json"), &m)?;
            let scores = predict_soft(&m, ds.features())?;
            write_predictions_csv(
                &test_predictions(&ds, &plan, scores),
                g.out_dir.join("predictions.csv"),
            )?;
        }
        Command::Attack {
            predictions,
            aux_tr_fraction,
        } => {
            let file = load_predictions_csv(predictions)?;
            let cfg = AuditConfig {
                aux_tr_fraction: *aux_tr_fraction,
                ..AuditConfig::default()
            };
            let table = attack_predictions(&file, &cfg, &seeds)?;
            let path = emit(g, "attack", &table)?;
            log::info!("wrote {}", path.display());
        }
        Command::FairTrain {
            data,
            split,
            method,
            defense,
            hidden,
        } => {
            let ds = load(g, data)?;
            let plan = resolve_split(&ds, split, &seeds)?;
            let scores = match method {
                DefenseArg::Egd => {
                    let mut cfg = defense.egd();
                    cfg.base_cfg.seed = seeds.defense;
                    let rc = egd_train(&ds, &plan, &cfg)?;
                    write_json(&g.out_dir.join("fair_model.json"), &rc)?;
                    SoftPredictions(expected_positive(&rc, ds.features())?)
                }
                DefenseArg::Advdebias => {
                    let mut cfg = defense.advdebias(hidden);
                    cfg.target_cfg.seed = seeds.defense;
                    let m = advdebias_train(&ds, &plan, &cfg)?;
                    write_json(&g.out_dir.join("fair_model.json"), &m)?;
                    predict_soft(&m, ds.features())?
                }
                DefenseArg::None => {
                    return Err(Error::InvalidConfig(
                        "fair-train needs --method egd|advdebias".into(),
                    ))
                }
            };
            write_predictions_csv(
                &test_predictions(&ds, &plan, scores),
                g.out_dir.join("fair_predictions.csv"),
            )?;
        }
        Command::Audit {
            data,
            predictions,
            label_col,
            sensitive_col,
            split,
            model,
            defense,
            defense_args,
            eps_sweep,
        } => {
            let (target, target_cfg) = model.target();
            let defense_cfg = match defense {
                DefenseArg::None => DefenseConfig::None,
                DefenseArg::Egd => DefenseConfig::Egd(defense_args.egd()),
                DefenseArg::Advdebias => {
                    DefenseConfig::Advdebias(defense_args.advdebias(&model.hidden))
                }
            };
            let cfg = AuditConfig {
                te_fraction: split.te_fraction,
                aux_tr_fraction: split.aux_tr_fraction,
                stratify: !split.no_stratify,
                target,
                target_cfg,
                eps_sweep: if *defense == DefenseArg::Egd {
                    eps_sweep.clone()
                } else {
                    Vec::new()
                },
                defense: defense_cfg,
                ..AuditConfig::default()
            };
            let artifacts = match (data, predictions) {
                (Some(path), _) => {
                    let ds = load_csv_with(
                        path,
                        label_col,
                        sensitive_col,
                        LoadOptions { strict: g.strict },
                    )?;
                    audit_dataset(&ds, &cfg, g.seed)?
                }
                (None, Some(path)) => {
                    audit_predictions(&load_predictions_csv(path)?, &cfg, g.seed)?
                }
                (None, None) => {
                    return Err(Error::InvalidConfig(
                        "audit needs --data or --predictions".into(),
                    ))
                }
            };
            let path = emit(g, "report", &artifacts.report)?;
            write_json(&g.out_dir.join("roc.json"), &artifacts.roc)?;
            if let Some(rows) = &artifacts.eps_sweep {
                write_json(&g.out_dir.join("eps_sweep.json"), rows)?;
            }
            println!("{}", path.display());
        }
        Command::VerifyTheorems {
            sweeps,
            inject_fault,
        } => {
            let variant = if *inject_fault {
                FormulaVariant::Flipped
            } else {
                FormulaVariant::Correct
            };
            let report = verify_theorems(*sweeps, g.seed, variant)?;
            emit(g, "verification", &report)?;
            for c in &report.checks {
                println!(
                    "{:<28} {:>5} cases  max deviation {:.3e}  {}",
                    c.name,
                    c.cases,
                    c.max_deviation,
                    if c.passed { "ok" } else { "FAILED" }
                );
            }
            if !report.passed {
                return Ok(1);
            }
        }
        Command::Plotdata { input_dir } => {
            let dir = input_dir.as_deref().unwrap_or(&g.out_dir);
            let roc_path = dir.join("roc.json");
            if !roc_path.is_file() {
                return Err(Error::MissingArtifact(roc_path));
            }
            let roc: RocCurve = serde_json::from_str(&std::fs::read_to_string(&roc_path)?)?;
            let mut buf = Vec::new();
            roc.write_csv(&mut buf)?;
            write_atomic(&g.out_dir.join("roc.csv"), &buf)?;
            let sweep_path = dir.join("eps_sweep.json");
            if sweep_path.is_file() {
                let rows: Vec<EpsSweepRow> =
                    serde_json::from_str(&std::fs::read_to_string(&sweep_path)?)?;
                let mut wtr = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    wtr.serialize(r)?;
                }
                let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
                write_atomic(&g.out_dir.join("eps_sweep.csv"), &bytes)?;
            }
        }
    }
    Ok(0)
}
