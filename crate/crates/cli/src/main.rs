//! `reloc`: scene generation, capture, tracking and evaluation from the shell.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure. Diagnostics go
//! to stderr; stdout and output files carry machine output only, and only
//! when the command succeeds.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reloc::eval::{run_experiment, ExperimentConfig};
use reloc::io::write_atomic;
use reloc::nav::Route;
use reloc::percept::{capture_scene, CameraModel, DetectorConfig, FrameLog};
use reloc::scene::{apply_changes, randomize_placements, ChangeSet, Scene};
use reloc::track::{compare_scenes, TrackerConfig};
use reloc::{Error, FORMAT_VERSION};

#[derive(Parser, Debug)]
#[command(name = "reloc", about = "Best-associated-frame relocation tracking", disable_version_flag = true)]
struct Cli {
    /// Print the tool version and supported file format version.
    #[arg(short = 'V', long)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a scene by seeded randomization and/or a changeset.
    SceneGen {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Changeset applied after any randomization.
        #[arg(long)]
        changes: Option<PathBuf>,
        /// Comma-separated classes to re-place. Defaults to every class resting
        /// on a surface when no changeset is given.
        #[arg(long, value_delimiter = ',')]
        movable: Vec<String>,
    },
    /// Traverse a route through a scene and write the frame log.
    Capture {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        route: PathBuf,
        #[arg(long)]
        camera: Option<PathBuf>,
        #[arg(long)]
        detector: Option<PathBuf>,
        /// Overrides the detector seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare pre-change and post-change frame logs.
    Track {
        pre: PathBuf,
        post: PathBuf,
        #[arg(long)]
        tracker: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a randomized-scenes experiment.
    Eval {
        config: PathBuf,
        /// Overrides the experiment and detector seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for the pre log and per-scene post logs and reports.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

fn scene_gen(
    scene: &Path,
    seed: u64,
    out: &Path,
    changes: Option<&Path>,
    movable: &[String],
) -> Result<(), Error> {
    let base = Scene::load(scene)?;
    let changes = changes.map(ChangeSet::load).transpose()?;
    let mut derived = base.clone();
    if changes.is_none() || !movable.is_empty() {
        let classes: BTreeSet<String> = if movable.is_empty() {
            base.objects()
                .iter()
                .filter(|o| o.surface_id.is_some())
                .map(|o| o.class_label.clone())
                .collect()
        } else {
            movable.iter().cloned().collect()
        };
        derived = randomize_placements(&derived, seed, &classes)?;
    }
    if let Some(cs) = &changes {
        derived = apply_changes(&derived, cs)?;
    }
    derived.save(out)
}

fn capture(
    scene: &Path,
    route: &Path,
    camera: Option<&Path>,
    detector: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Error> {
    let scene = Scene::load(scene)?;
    let route = Route::load(route)?;
    let camera: CameraModel = camera.map(load_json).transpose()?.unwrap_or_default();
    let mut detector: DetectorConfig = detector.map(load_json).transpose()?.unwrap_or_default();
    if let Some(seed) = seed {
        detector.seed = seed;
    }
    let log = capture_scene(&scene, &route, &camera, &detector)?;
    log.save(out)
}

fn track(
    pre: &Path,
    post: &Path,
    tracker: Option<&Path>,
    out: Option<&Path>,
    format: Format,
) -> Result<(), Error> {
    let pre = FrameLog::load(pre)?;
    let post = FrameLog::load(post)?;
    let cfg = match tracker {
        Some(p) => TrackerConfig::load(p)?,
        None => TrackerConfig::default(),
    };
    let report = compare_scenes(&pre, &post, &cfg)?;
    if let Some(out) = out {
        report.save(out)?;
    }
    match format {
        Format::Table => print!("{}", report.render_table()),
        Format::Json if out.is_none() => print!("{}", report.to_json()),
        Format::Json => {}
    }
    Ok(())
}

fn eval(config: &Path, seed: Option<u64>, out: Option<&Path>, artifacts: Option<&Path>) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    let outcome = run_experiment(&cfg)?;
    if let Some(dir) = artifacts {
        std::fs::create_dir_all(dir).map_err(|source| Error::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        outcome.pre_log.save(&dir.join("pre.jsonl"))?;
        for s in &outcome.scenes {
            s.post_log.save(&dir.join(format!("post_{:02}.jsonl", s.index)))?;
            s.report.save(&dir.join(format!("report_{:02}.json", s.index)))?;
            s.post_scene.save(&dir.join(format!("scene_{:02}.json", s.index)))?;
        }
    }
    if let Some(out) = out {
        write_atomic(out, outcome.to_json().as_bytes())?;
    }
    print!("{}", outcome.render_summary());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let Some(command) = cli.command else {
        return Err(Error::Config("no subcommand given (see --help)".into()));
    };
    match command {
        Command::SceneGen {
            scene,
            seed,
            out,
            changes,
            movable,
        } => scene_gen(&scene, seed, &out, changes.as_deref(), &movable),
        Command::Capture {
            scene,
            route,
            camera,
            detector,
            seed,
            out,
        } => capture(&scene, &route, camera.as_deref(), detector.as_deref(), seed, &out),
        Command::Track {
            pre,
            post,
            tracker,
            out,
            format,
        } => track(&pre, &post, tracker.as_deref(), out.as_deref(), format),
        Command::Eval {
            config,
            seed,
            out,
            artifacts,
        } => eval(&config, seed, out.as_deref(), artifacts.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.version {
        println!(
            "reloc {} (file format_version {FORMAT_VERSION})",
            env!("CARGO_PKG_VERSION")
        );
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
