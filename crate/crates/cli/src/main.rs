use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use archmark_core::assignment::{DatabaseBuilder, JawKind, TrainingDatabase};
use archmark_core::landmarks::IncisorRule;
use archmark_core::mesh::{write_ascii_stl, write_binary_stl};
use archmark_core::pipeline::{analyze, load_mesh, write_ply, LandmarkReport, PipelineConfig, PipelineError};
use archmark_core::synth::{generate, train_synthetic, SynthSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, warn};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "archmark", version, about = "Find teeth and landmarks on scanned dental arches")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment, identify and landmark one or more STL models.
    Run(RunArgs),
    /// Write a synthetic jaw as STL from a JSON spec.
    Synth(SynthArgs),
    /// Build a reference database from labeled reports.
    Train(TrainArgs),
    /// Build reference databases from generated synthetic jaws.
    BuildDb(BuildDbArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    IncisalEdge,
    Labial,
}

#[derive(Args)]
struct RunArgs {
    #[arg(required = true)]
    stl: Vec<PathBuf>,
    #[arg(long)]
    jaw: JawKind,
    /// Reference database; the built-in one for the jaw when omitted.
    #[arg(long)]
    db: Option<PathBuf>,
    /// JSON file with pipeline settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path for a single model; stdout when omitted.
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Colored PLY for a single model.
    #[arg(long, conflicts_with = "out_dir")]
    ply: Option<PathBuf>,
    /// Directory for `<name>.json` and `<name>.ply` per model.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    height_threshold: Option<f64>,
    #[arg(long)]
    fussiness: Option<f64>,
    #[arg(long)]
    spill_radius: Option<f64>,
    #[arg(long, value_enum)]
    incisor_rule: Option<Rule>,
    /// Stop after identification.
    #[arg(long)]
    no_landmarks: bool,
}

#[derive(Args)]
struct SynthArgs {
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Ground truth as JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long)]
    jaw: JawKind,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildDbArgs {
    /// One jaw kind; all four when omitted.
    #[arg(long)]
    jaw: Option<JawKind>,
    #[arg(long, default_value_t = 24)]
    models: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory, one `<jaw>.json` per jaw.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("could not set thread count: {e}");
        }
    }
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a).map(|()| 0),
        Command::Train(a) => train(a).map(|()| 0),
        Command::BuildDb(a) => build_db(a).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn run_config(a: &RunArgs) -> Result<PipelineConfig> {
    let mut config = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let c: PipelineConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            if c.jaw_kind != a.jaw {
                bail!("config is for {}, --jaw says {}", c.jaw_kind, a.jaw);
            }
            c
        }
        None => PipelineConfig::new(a.jaw),
    };
    if let Some(v) = a.height_threshold {
        config.height_threshold_mm = v;
    }
    if let Some(v) = a.fussiness {
        config.fussiness = v;
    }
    if let Some(v) = a.spill_radius {
        config.spill_radius_mm = v;
    }
    if let Some(r) = a.incisor_rule {
        config.incisor_rule = match r {
            Rule::IncisalEdge => IncisorRule::IncisalEdge,
            Rule::Labial => IncisorRule::Labial,
        };
    }
    config.skip_landmarks |= a.no_landmarks;
    config.validate().map_err(PipelineError::from)?;
    Ok(config)
}

fn load_db(path: Option<&Path>, jaw: JawKind) -> Result<TrainingDatabase, PipelineError> {
    let db = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| PipelineError::Io {
                path: p.display().to_string(),
                source,
            })?;
            TrainingDatabase::from_json(&text)?
        }
        None => TrainingDatabase::shipped(jaw)?,
    };
    db.ensure_jaw(jaw)?;
    Ok(db)
}

/// Analyzes one file and writes its outputs; returns the exit code.
fn run_one(path: &Path, config: &PipelineConfig, db: &TrainingDatabase, json: Option<&Path>, ply: Option<&Path>) -> Result<u8> {
    let bytes = fs::read(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mesh = load_mesh(&bytes, config).with_context(|| format!("loading {}", path.display()))?;
    let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let analysis = analyze(&mesh, &id, config, db);
    let text = analysis.report.to_json();
    match json {
        Some(p) => fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    if let Some(p) = ply {
        let bytes = write_ply(&mesh, &analysis)?;
        fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(f) = &analysis.report.stage_failure {
        eprintln!("{id}: {:?} stage failed: {}", f.stage, f.message);
    }
    Ok(analysis.report.exit_code() as u8)
}

fn run(a: RunArgs) -> Result<u8> {
    let config = run_config(&a)?;
    let db = load_db(a.db.as_deref(), a.jaw)?;
    if a.stl.len() == 1 && a.out_dir.is_none() {
        return run_one(&a.stl[0], &config, &db, a.out.as_deref(), a.ply.as_deref());
    }
    let Some(dir) = &a.out_dir else {
        bail!("several models need --out-dir");
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let codes: Vec<Result<u8>> = a
        .stl
        .par_iter()
        .map(|p| {
            let stem = p.file_stem().map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
            let json = dir.join(format!("{stem}.json"));
            let ply = dir.join(format!("{stem}.ply"));
            run_one(p, &config, &db, Some(&json), Some(&ply)).with_context(|| format!("{}", p.display()))
        })
        .collect();
    let mut worst = 0;
    for r in codes {
        let code = match r {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                e.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code) as u8
            }
        };
        if worst == 0 {
            worst = code;
        }
    }
    Ok(worst)
}

fn synth(a: SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let mut spec: SynthSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.spec.display()))?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let model = generate(&spec)?;
    let soup = model.mesh.to_soup();
    let bytes = if a.ascii {
        write_ascii_stl(&soup, "archmark synthetic jaw").into_bytes()
    } else {
        write_binary_stl(&soup)
    };
    fs::write(&a.out, bytes).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(p) = &a.truth {
        let json = serde_json::to_string_pretty(&model.truth)?;
        fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    info!("wrote {} faces to {}", model.mesh.face_count(), a.out.display());
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut builder = DatabaseBuilder::new(a.jaw);
    for p in &a.reports {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let report = LandmarkReport::from_json(&text).with_context(|| format!("parsing {}", p.display()))?;
        if report.jaw_kind != a.jaw {
            bail!("{} is a {} report", p.display(), report.jaw_kind);
        }
        let parts: Vec<_> = report
            .teeth
            .iter()
            .flat_map(|t| t.parts.iter().map(|part| (part.code.clone(), part.characteristics)))
            .collect();
        let ignored = builder.add_model(&parts);
        if !ignored.is_empty() {
            warn!("{}: ignored unknown codes {ignored:?}", p.display());
        }
    }
    let db = builder.build();
    if let Err(e) = db.validate() {
        warn!("database is incomplete: {e}");
    }
    fs::write(&a.out, db.to_json() + "\n").with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn build_db(a: BuildDbArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let jaws: Vec<JawKind> = a.jaw.map_or_else(|| JawKind::ALL.to_vec(), |j| vec![j]);
    for jaw in jaws {
        let config = PipelineConfig::new(jaw);
        let (db, summary) = train_synthetic(jaw, a.models, a.seed, &config)?;
        db.validate().with_context(|| format!("{jaw} database"))?;
        let path = a.out_dir.join(format!("{jaw}.json"));
        fs::write(&path, db.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
        eprintln!(
            "{jaw}: {} models, {} labeled blobs, {} unlabeled, {} failed -> {}",
            summary.models,
            summary.labeled_blobs,
            summary.unlabeled_blobs,
            summary.failed.len(),
            path.display()
        );
    }
    Ok(())
}
