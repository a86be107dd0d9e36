use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leafsynth::dataset::{export_annotations, mix_manifests, AnnotationStyle, DatasetManifest, Source};
use leafsynth::error::ExitKind;
use leafsynth::eval::{evaluate_directory, Pairing};
use leafsynth::pipeline::{generate_dataset, GenerationContext};
use leafsynth::stats::{compute_stats, write_heatmap, write_histogram, DEFAULT_GRID};
use leafsynth::{load_config, Error, GenerationConfig, Purpose, RandomSource, TextureMode};

/// Synthetic rosette-plant images with instance labels, plus evaluation tools.
#[derive(Parser)]
#[command(name = "leafsynth", version)]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a dataset of RGB images, label maps and a manifest.
    Generate(GenerateArgs),
    /// Score predicted label maps against ground truth (SBD, DiC).
    Evaluate(EvaluateArgs),
    /// Leaf-centroid heatmap and leaves-per-image histogram.
    Stats(StatsArgs),
    /// Plan a 50/50 real/synthetic batch schedule for one epoch.
    Mix(MixArgs),
    /// Write the geometry of one plant as a text mesh.
    DumpScene(DumpSceneArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `global_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Leaf texture directory (overrides `texture_bank_path`).
    #[arg(long)]
    textures: Option<PathBuf>,
    /// Background plate directory (overrides `background_bank_path`).
    #[arg(long)]
    backgrounds: Option<PathBuf>,
    /// Leaf template mesh (overrides `leaf_template_path`).
    #[arg(long)]
    template: Option<PathBuf>,
    /// plant: one texture for every leaf; leaf: one per leaf; arbitrary: any image bank, one per leaf.
    #[arg(long)]
    texture_mode: Option<TextureMode>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<GenerationConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => GenerationConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.global_seed = s;
        }
        if let Some(p) = &self.textures {
            cfg.texture_bank_path = Some(p.clone());
        }
        if let Some(p) = &self.backgrounds {
            cfg.background_bank_path = Some(p.clone());
        }
        if let Some(p) = &self.template {
            cfg.leaf_template_path = Some(p.clone());
        }
        if let Some(m) = self.texture_mode {
            cfg.texture_mode = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnnotationArg {
    /// Run-length encoded masks.
    Masks,
    /// Boxes and outline polygons.
    Polygons,
    /// No annotations file.
    None,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Number of images (default: `dataset_size`).
    #[arg(long)]
    count: Option<u64>,
    /// First image index.
    #[arg(long, default_value_t = 0)]
    start: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Style of `annotations.json`.
    #[arg(long, value_enum, default_value_t = AnnotationArg::Polygons)]
    annotation_style: AnnotationArg,
    /// Also annotate fully hidden leaves (area 0).
    #[arg(long)]
    include_hidden: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    /// Identical file names.
    Exact,
    /// File-name prefix before the first underscore.
    Plant,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground-truth label PNG directory.
    #[arg(long)]
    gt: PathBuf,
    /// Predicted label PNG directory.
    #[arg(long)]
    pred: PathBuf,
    /// CSV report (columns image,bd_gp,bd_pg,sbd,dic,abs_dic; last row is the mean).
    #[arg(long)]
    report: PathBuf,
    #[arg(long, value_enum, default_value_t = PairingArg::Exact)]
    pairing: PairingArg,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset directory, manifest.csv, or directory of label PNGs.
    #[arg(long)]
    source: PathBuf,
    /// Heatmap CSV; a grayscale PNG is written next to it.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// Leaf-count histogram CSV.
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Heatmap cells per side.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: u32,
}

#[derive(Args)]
struct MixArgs {
    /// Real-data manifest (needs at least index,rgb_path,label_path columns).
    #[arg(long)]
    real: PathBuf,
    /// Synthetic manifest.
    #[arg(long)]
    synthetic: PathBuf,
    /// Even batch size.
    #[arg(long, default_value_t = 6)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schedule CSV (batch,slot,source,index,rgb_path,label_path).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DumpSceneArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Image index whose plant is dumped.
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// Output file (stdout if unset).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Dataset(leafsynth::dataset::DatasetError::Io { path: path.to_owned(), source: e })
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Error> {
    let cfg = args.config.resolve()?;
    let count = args.count.unwrap_or(cfg.dataset_size as u64);
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = GenerationContext::new(cfg)?;
    log::info!("generating {count} images from index {} on {workers} workers", args.start);
    let step = (count / 20).max(1);
    let progress = |done: u64| {
        if done % step == 0 || done == count {
            log::info!("{done}/{count} images");
        }
    };
    let manifest = generate_dataset(&ctx, &args.out, args.start, count, workers, &progress)?;
    let style = match args.annotation_style {
        AnnotationArg::Masks => Some(AnnotationStyle::PerInstanceMasks),
        AnnotationArg::Polygons => Some(AnnotationStyle::BoxesAndPolygons),
        AnnotationArg::None => None,
    };
    if let Some(style) = style {
        export_annotations(&manifest, style, args.include_hidden)?.write(&args.out.join("annotations.json"))?;
    }
    println!("wrote {} images to {}", manifest.len(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), Error> {
    let pairing = match args.pairing {
        PairingArg::Exact => Pairing::ExactName,
        PairingArg::Plant => Pairing::PlantKey,
    };
    let report = evaluate_directory(&args.gt, &args.pred, pairing)?;
    report.write(&args.report)?;
    let m = report.mean();
    println!(
        "images {}  mean SBD {:.4}  mean DiC {:+.3}  mean |DiC| {:.3}",
        report.images.len(),
        m.sbd,
        m.dic,
        m.abs_dic
    );
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> Result<(), Error> {
    let stats = compute_stats(&args.source, args.grid)?;
    if let Some(p) = &args.heatmap {
        let png = write_heatmap(&stats.heatmap, p)?;
        log::info!("heatmap image {}", png.display());
    }
    if let Some(p) = &args.hist {
        write_histogram(&stats.histogram, p)?;
    }
    let h = &stats.histogram;
    println!(
        "images {}  leaves {}  count mean {:.4}  count variance {:.4}  centroid radial std {:.5}",
        h.images(),
        stats.heatmap.total,
        h.mean(),
        h.variance(),
        stats.heatmap.radial_std()
    );
    Ok(())
}

fn cmd_mix(args: &MixArgs) -> Result<(), Error> {
    let real = DatasetManifest::read(&args.real)?;
    let synthetic = DatasetManifest::read(&args.synthetic)?;
    let plan = mix_manifests(&real, &synthetic, args.batch, &mut RandomSource::dataset(args.seed, Purpose::Shuffle))?;
    let mut w = csv::Writer::from_path(&args.out).map_err(|e| io_error(&args.out, std::io::Error::other(e)))?;
    let csv_err = |e: csv::Error| io_error(&args.out, std::io::Error::other(e));
    w.write_record(["batch", "slot", "source", "index", "rgb_path", "label_path"]).map_err(csv_err)?;
    for (b, batch) in plan.batches.iter().enumerate() {
        for (slot, e) in batch.iter().enumerate() {
            let (name, m) = match e.source {
                Source::Real => ("real", &real),
                Source::Synthetic => ("synthetic", &synthetic),
            };
            let r = &m.records[e.record];
            let rgb = m.resolve(&r.rgb_path);
            let label = m.resolve(&r.label_path);
            w.write_record([
                b.to_string(),
                slot.to_string(),
                name.to_string(),
                r.index.to_string(),
                rgb.display().to_string(),
                label.display().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| io_error(&args.out, e))?;
    println!(
        "{} batches of {}; real passes {}, synthetic passes {}",
        plan.batches.len(),
        args.batch,
        plan.real_passes,
        plan.synthetic_passes
    );
    Ok(())
}

fn cmd_dump_scene(args: &DumpSceneArgs) -> Result<(), Error> {
    let ctx = GenerationContext::new(args.config.resolve()?)?;
    let (plant, _) = ctx.plant(args.index)?;
    let text = plant.dump_scene();
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(ExitKind::Validation as u8) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Mix(a) => cmd_mix(a),
        Command::DumpScene(a) => cmd_dump_scene(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_kind() as u8)
        }
    }
}
