//! `emgkit`: batch front end for synthesis, ratio analysis, feature
//! extraction, classifier training/evaluation, reports and plots.

mod manifest;
mod plot;
mod session_dir;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use emg_core::activity::RatioReport;
use emg_core::models::{evaluate, fit, EvalReport, ModelKind, TrainedModel};
use emg_core::pipeline::{analyze, session_envelope, session_features};
use emg_core::report::{accuracy_table, ratio_table, AccuracyEntry};
use emg_core::session::write_recording;
use emg_core::signal::DeviceProfile;
use emg_core::synth::{generate, preset, SynthError, SynthScenario};
use emg_core::{PipelineConfig, Session};
use manifest::{Digests, OutputSet, RunManifest};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "emgkit", version, about = "Surface-EMG analysis toolkit")]
struct Cli {
    /// Pipeline configuration (TOML). Unset keys take the built-in defaults.
    #[arg(long, global = true, env = "EMGKIT_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Device profile; overrides the one declared by a session.
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Sleeve,
    Armband,
}

impl ProfileArg {
    fn profile(self) -> DeviceProfile {
        match self {
            ProfileArg::Sleeve => DeviceProfile::sleeve(),
            ProfileArg::Armband => DeviceProfile::armband(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lda,
    Rf,
    Mlp,
    All,
}

impl ModelArg {
    fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelArg::Lda => vec![ModelKind::Lda],
            ModelArg::Rf => vec![ModelKind::Rf],
            ModelArg::Mlp => vec![ModelKind::Mlp],
            ModelArg::All => ModelKind::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session from a preset name or scenario file.
    Synth {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rest-to-active amplitude ratios of a session.
    Analyze {
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Windowed feature matrix of a session.
    Features {
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit classifiers on one session.
    Train {
        session: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        model: ModelArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate on a held-out session, fitting on `--train` or loading `--model-file`.
    Evaluate {
        #[arg(long, required_unless_present = "model_file")]
        train: Option<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        model: ModelArg,
        #[arg(long, conflicts_with = "train")]
        model_file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge analyze/evaluate outputs from several runs into summary tables.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Envelope traces as CSV and SVG.
    Plot {
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective configuration.
    Config,
}

/// Invocation problems that map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Evaluation result as written to `eval-<model>.json`.
#[derive(Debug, Serialize, Deserialize)]
struct EvalRecord {
    subject: String,
    device: String,
    train_session: String,
    test_session: String,
    report: EvalReport,
}

struct Ctx {
    config: PipelineConfig,
    profile: Option<DeviceProfile>,
    inputs: Digests,
}

impl Ctx {
    fn load(cli: &Cli) -> Result<Self> {
        let mut inputs = Digests::default();
        let mut config = match &cli.config {
            Some(path) => {
                let bytes =
                    std::fs::read(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                inputs.add("config", &bytes);
                let text = String::from_utf8(bytes).map_err(|_| usage(format!("{}: invalid UTF-8", path.display())))?;
                PipelineConfig::from_toml(&text)
                    .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        Ok(Ctx { config, profile: cli.profile.map(ProfileArg::profile), inputs })
    }

    fn session(&mut self, dir: &Path, role: &str) -> Result<Session> {
        session_dir::load(dir, self.profile.as_ref(), &mut self.inputs, role)
    }

    fn manifest(self, command: &str, parameters: BTreeMap<String, String>) -> RunManifest {
        RunManifest {
            tool: "emgkit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed: self.config.seed,
            config: serde_json::to_value(&self.config).expect("config serializes"),
            parameters,
            inputs: self.inputs,
            outputs: Digests::default(),
        }
    }
}

fn params<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn load_scenario(spec: &str, ctx: &mut Ctx) -> Result<SynthScenario> {
    let path = Path::new(spec);
    if spec.ends_with(".toml") || path.is_file() {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read scenario {spec}"))?;
        ctx.inputs.add("scenario", &bytes);
        let text = String::from_utf8(bytes).with_context(|| format!("{spec}: invalid UTF-8"))?;
        return SynthScenario::from_toml(&text).with_context(|| format!("scenario {spec}"));
    }
    preset(spec).map_err(|e| match e {
        SynthError::UnknownPreset { .. } => usage(e.to_string()),
        other => other.into(),
    })
}

fn cmd_synth(mut ctx: Ctx, scenario: &str, out: &Path) -> Result<()> {
    let mut s = load_scenario(scenario, &mut ctx)?.with_seed(ctx.config.seed);
    if let Some(p) = ctx.profile.clone() {
        s = s.with_profile(p);
    }
    let (session, truth) = generate(&s)?;
    let mut files = OutputSet::new(out);
    for (name, text) in session_dir::render(&session) {
        files.add(name, text);
    }
    files.add("ground_truth.toml", truth.to_toml());
    files.add("scenario.toml", s.to_toml());
    let manifest = ctx.manifest("synth", params([("scenario", s.name.clone()), ("profile", s.profile.name.clone())]));
    files.write(manifest)
}

fn cmd_analyze(mut ctx: Ctx, dir: &Path, out: &Path) -> Result<()> {
    let session = ctx.session(dir, "session")?;
    let report = analyze(&session, &ctx.config)?;
    let table = ratio_table(std::slice::from_ref(&report));
    let mut files = OutputSet::new(out);
    files.add("ratios.json", json(&report));
    files.add("table1.csv", table.to_csv());
    files.add("table1.txt", table.to_text());
    print!("{}", table.to_text());
    files.write(ctx.manifest("analyze", params([("subject", session.subject_id.clone())])))
}

fn cmd_features(mut ctx: Ctx, dir: &Path, out: &Path) -> Result<()> {
    let session = ctx.session(dir, "session")?;
    let m = session_features(&session, &ctx.config)?;
    let mut files = OutputSet::new(out);
    files.add("features.csv", m.to_csv());
    let p = params([
        ("rows", m.rows().to_string()),
        ("columns", m.width().to_string()),
        ("zero_power_cells", m.zero_power_cells.to_string()),
        ("source", m.source.clone()),
    ]);
    eprintln!("{} windows x {} features", m.rows(), m.width());
    files.write(ctx.manifest("features", p))
}

fn train_models(ctx: &Ctx, session: &Session, kinds: &[ModelKind]) -> Result<Vec<TrainedModel>> {
    let m = session_features(session, &ctx.config)?;
    let m = ctx.config.models.class_mode.apply(&m);
    kinds
        .iter()
        .map(|&k| fit(k, &m, &ctx.config.models, ctx.config.seed).with_context(|| format!("fitting {k}")))
        .collect()
}

fn cmd_train(mut ctx: Ctx, dir: &Path, model: ModelArg, out: &Path) -> Result<()> {
    let session = ctx.session(dir, "train")?;
    let models = train_models(&ctx, &session, &model.kinds())?;
    let mut files = OutputSet::new(out);
    for m in &models {
        files.add(format!("model-{}.json", m.kind().as_str()), json(m));
    }
    files.write(ctx.manifest("train", params([("subject", session.subject_id.clone())])))
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn cmd_evaluate(
    mut ctx: Ctx,
    train: Option<&Path>,
    test: &Path,
    model: ModelArg,
    model_file: Option<&Path>,
    out: &Path,
) -> Result<()> {
    if let Some(train) = train {
        if same_dir(train, test) {
            bail!("refusing to evaluate on the training session ({})", test.display());
        }
    }
    let mut files = OutputSet::new(out);
    let (models, train_subject) = match (train, model_file) {
        (_, Some(path)) => {
            let bytes = std::fs::read(path).with_context(|| format!("cannot read model {}", path.display()))?;
            ctx.inputs.add("model", &bytes);
            let text = String::from_utf8(bytes).context("model file is not UTF-8")?;
            (vec![TrainedModel::from_json(&text)?], String::new())
        }
        (Some(dir), None) => {
            let s = ctx.session(dir, "train")?;
            let models = train_models(&ctx, &s, &model.kinds())?;
            for m in &models {
                files.add(format!("model-{}.json", m.kind().as_str()), json(m));
            }
            (models, s.subject_id)
        }
        (None, None) => return Err(usage("either --train or --model-file is required")),
    };
    let test_session = ctx.session(test, "test")?;
    let features = ctx.config.models.class_mode.apply(&session_features(&test_session, &ctx.config)?);
    let device = test_session.recording.profile().name.clone();

    let mut entries = Vec::new();
    for m in &models {
        let report = evaluate(m, &features)?;
        eprintln!("{}: accuracy {:.4} on {} windows", m.kind(), report.accuracy, report.rows);
        entries.push(AccuracyEntry {
            subject: test_session.subject_id.clone(),
            device: device.clone(),
            model: m.kind(),
            accuracy: report.accuracy,
        });
        let record = EvalRecord {
            subject: test_session.subject_id.clone(),
            device: device.clone(),
            train_session: report.train_source.clone(),
            test_session: report.test_source.clone(),
            report,
        };
        files.add(format!("eval-{}.json", m.kind().as_str()), json(&record));
    }
    let table = accuracy_table(&entries);
    files.add("table2.csv", table.to_csv());
    files.add("table2.txt", table.to_text());
    print!("{}", table.to_text());
    let p = params([("train_subject", train_subject), ("test_subject", test_session.subject_id.clone())]);
    files.write(ctx.manifest("evaluate", p))
}

fn cmd_report(mut ctx: Ctx, runs: &[PathBuf], out: &Path) -> Result<()> {
    let mut ratios: Vec<RatioReport> = Vec::new();
    let mut entries: Vec<AccuracyEntry> = Vec::new();
    for (i, dir) in runs.iter().enumerate() {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .with_context(|| format!("cannot list {}", dir.display()))?
            .filter_map(|e| e.ok().and_then(|e| e.file_name().into_string().ok()))
            .filter(|n| n == "ratios.json" || (n.starts_with("eval-") && n.ends_with(".json")))
            .collect();
        names.sort();
        for name in names {
            let path = dir.join(&name);
            let bytes = std::fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
            ctx.inputs.add(&format!("run{i}/{name}"), &bytes);
            if name == "ratios.json" {
                ratios.push(serde_json::from_slice(&bytes).with_context(|| format!("{}", path.display()))?);
            } else {
                let r: EvalRecord = serde_json::from_slice(&bytes).with_context(|| format!("{}", path.display()))?;
                entries.push(AccuracyEntry {
                    subject: r.subject,
                    device: r.device,
                    model: r.report.model,
                    accuracy: r.report.accuracy,
                });
            }
        }
    }
    if ratios.is_empty() && entries.is_empty() {
        bail!("no ratios.json or eval-*.json found in the given run directories");
    }
    let mut files = OutputSet::new(out);
    if !ratios.is_empty() {
        let t = ratio_table(&ratios);
        print!("{}", t.to_text());
        files.add("table1.csv", t.to_csv());
        files.add("table1.txt", t.to_text());
    }
    if !entries.is_empty() {
        let t = accuracy_table(&entries);
        print!("{}", t.to_text());
        files.add("table2.csv", t.to_csv());
        files.add("table2.txt", t.to_text());
    }
    files.write(ctx.manifest("report", params([("runs", runs.len().to_string())])))
}

fn cmd_plot(mut ctx: Ctx, dir: &Path, out: &Path) -> Result<()> {
    let session = ctx.session(dir, "session")?;
    let report = emg_core::session::validate_session(&session);
    if !report.is_valid() {
        bail!("invalid session:\n{report}");
    }
    let env = session_envelope(&session.recording, &ctx.config)?;
    let mut files = OutputSet::new(out);
    files.add("envelope.csv", write_recording(env.as_recording()));
    let title = format!("{} envelope ({})", session.subject_id, session.recording.profile().name);
    files.add("envelope.svg", plot::envelope_svg(&env, &session.annotations, &title));
    files.write(ctx.manifest("plot", params([("subject", session.subject_id.clone())])))
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::load(&cli)?;
    match &cli.command {
        Command::Synth { scenario, out } => cmd_synth(ctx, scenario, out),
        Command::Analyze { session, out } => cmd_analyze(ctx, session, out),
        Command::Features { session, out } => cmd_features(ctx, session, out),
        Command::Train { session, model, out } => cmd_train(ctx, session, *model, out),
        Command::Evaluate { train, test, model, model_file, out } => {
            cmd_evaluate(ctx, train.as_deref(), test, *model, model_file.as_deref(), out)
        }
        Command::Report { runs, out } => cmd_report(ctx, runs, out),
        Command::Plot { session, out } => cmd_plot(ctx, session, out),
        Command::Config => {
            print!("{}", ctx.config.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { 2 } else { 1 })
        }
    }
}
