//! Batch command-line front end: corpus generation, feature extraction,
//! forest training and prediction, end-to-end evaluation, spectrum
//! diagnostics, and recompression curves.
//!
//! Exit codes: 0 success, 2 configuration error (including usage errors),
//! 3 data error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use codec_forensics::classify::{
    model_load, model_save, rf_predict, rf_train, FeaturesPerSplit, ForestConfig,
};
use codec_forensics::codecs::CodecSettings;
use codec_forensics::cue_color::{extract_color_features, CenterChannel, ColorCueConfig};
use codec_forensics::cue_quant::{extract_quant_features, QuantCueConfig, QuantMode};
use codec_forensics::cue_rd::extract_rd_features;
use codec_forensics::harness::{
    avg_fourier_spectrum, block_peak_ratio, build_corpus, color_vectors, emit_report,
    quant_vectors, rd_vectors, read_color_csv, read_quant_csv, read_rd_csv,
    render_report, run_detection_experiment, write_color_csv, write_quant_csv, write_rd_csv,
    write_sidecar, write_spectrum_csv, Attack, ColorFeatureRow, CorpusSpec, CueKind,
    DatasetManifest, ExperimentConfig, FeatureSidecar, ManifestEntry, QuantFeatureRow, RdFeatureRow,
    RdProbe, ReportFormat, Split,
};
use codec_forensics::imagecore::{read_image, FilterId};
use codec_forensics::parallel::try_map_batch;
use codec_forensics::{Error, ErrorCategory, Result};

#[derive(Parser)]
#[command(
    name = "codec-forensics",
    version,
    about = "Compression forensics for block and learned-latent image codecs"
)]
struct Cli {
    /// Seed for every random choice this run makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic corpus management.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Feature extraction from a corpus manifest.
    Features {
        #[command(subcommand)]
        action: FeaturesAction,
    },
    /// Train a random forest on extracted features.
    Train(TrainArgs),
    /// Predict labels for extracted features with a saved model.
    Predict(PredictArgs),
    /// Run a full train/test experiment and emit a report.
    Evaluate(EvaluateArgs),
    /// Average residual spectrum with block-lattice peak ratio.
    Spectrum(SpectrumArgs),
    /// Rate and PSNR across successive recompressions of one image.
    RecompressCurve(CurveArgs),
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Render images and write a manifest.json under --out.
    Build(CorpusBuildArgs),
}

#[derive(Args)]
struct CorpusBuildArgs {
    /// Output directory for images/ and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Number of source images.
    #[arg(long, default_value_t = 8)]
    images: usize,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 128)]
    height: usize,
    /// Fraction of source images assigned to the train split.
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    /// Codec condition `codec_id:strength`; repeatable.
    #[arg(long = "codec")]
    codecs: Vec<CodecSettings>,
    /// Skip the uncompressed originals.
    #[arg(long)]
    no_original: bool,
    /// Add downscale-then-upscale preprocessed originals.
    #[arg(long)]
    preprocessed: bool,
    /// Add double-compressed variants for every ordered codec pair.
    #[arg(long)]
    double: bool,
    /// Add decoder-like synthesized images.
    #[arg(long)]
    synthesized: bool,
    /// Postprocessing attack on test-split images (`jpg90`, `rs75`); repeatable.
    #[arg(long = "attack")]
    attacks: Vec<Attack>,
}

#[derive(Subcommand)]
enum FeaturesAction {
    /// Extract one cue's features for every manifest entry into CSV.
    Extract(FeaturesExtractArgs),
}

#[derive(Args)]
struct FeaturesExtractArgs {
    #[arg(long, value_parser = CueKind::from_str)]
    cue: CueKind,
    #[arg(long)]
    manifest: PathBuf,
    /// Output CSV path; a .meta.json sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Square analysis patch side (color rows and quant latents).
    #[arg(long)]
    patch: Option<usize>,
    /// Highpass filter for the color cue.
    #[arg(long, default_value = "laplacian4", value_parser = FilterId::from_str)]
    filter: FilterId,
    /// Probe codec `codec_id:strength` (quant probe; rd fallback).
    #[arg(long, default_value = "sim_latent:1", value_parser = CodecSettings::from_str)]
    probe: CodecSettings,
    /// Probe rd chains with --probe even when the entry names its codec.
    #[arg(long)]
    fixed_probe: bool,
    /// Quant correlation mode to emit.
    #[arg(long, default_value = "both")]
    mode: String,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Feature CSV produced by `features extract`.
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_parser = CueKind::from_str)]
    cue: CueKind,
    /// Output model path (JSON).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500)]
    trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    /// Candidate features per split: `sqrt`, `all`, or a count.
    #[arg(long, default_value = "sqrt")]
    features_per_split: String,
    /// Center channel of the color-cue vectors to train on.
    #[arg(long, default_value = "b", value_parser = CenterChannel::from_str)]
    center: CenterChannel,
    /// Quant-cue mode to train on.
    #[arg(long, default_value = "full", value_parser = QuantMode::from_str)]
    mode: QuantMode,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_parser = CueKind::from_str)]
    cue: CueKind,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "b", value_parser = CenterChannel::from_str)]
    center: CenterChannel,
    #[arg(long, default_value = "full", value_parser = QuantMode::from_str)]
    mode: QuantMode,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = CueKind::from_str)]
    cue: CueKind,
    #[arg(long, default_value_t = 500)]
    trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value = "json", value_parser = ReportFormat::from_str)]
    format: ReportFormat,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock runtime in the report.
    #[arg(long)]
    runtime: bool,
    #[arg(long)]
    patch: Option<usize>,
    #[arg(long, default_value = "laplacian4", value_parser = FilterId::from_str)]
    filter: FilterId,
    #[arg(long, default_value = "b", value_parser = CenterChannel::from_str)]
    center: CenterChannel,
    #[arg(long, default_value = "full", value_parser = QuantMode::from_str)]
    mode: QuantMode,
    #[arg(long, default_value = "sim_latent:1", value_parser = CodecSettings::from_str)]
    probe: CodecSettings,
    #[arg(long)]
    fixed_probe: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output CSV of the normalized log-magnitude map.
    #[arg(long)]
    out: PathBuf,
    /// Restrict to entries with this label.
    #[arg(long)]
    label: Option<String>,
    /// Restrict to one split.
    #[arg(long, value_parser = Split::from_str)]
    split: Option<Split>,
    #[arg(long, default_value = "laplacian4", value_parser = FilterId::from_str)]
    filter: FilterId,
    /// Block size for the lattice peak ratio.
    #[arg(long, default_value_t = 8)]
    block: usize,
}

#[derive(Args)]
struct CurveArgs {
    /// Input image (PNG or PPM/PGM).
    #[arg(long)]
    image: PathBuf,
    /// Codec condition `codec_id:strength` per curve; repeatable, required.
    #[arg(long = "codec", required = true)]
    codecs: Vec<CodecSettings>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err.category() {
                ErrorCategory::Config => ExitCode::from(2),
                ErrorCategory::Data | ErrorCategory::Internal => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Corpus {
            action: CorpusAction::Build(args),
        } => corpus_build(cli.seed, args),
        Command::Features {
            action: FeaturesAction::Extract(args),
        } => features_extract(cli.seed, args),
        Command::Train(args) => train(cli.seed, args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(cli.seed, args),
        Command::Spectrum(args) => spectrum(args),
        Command::RecompressCurve(args) => recompress_curve(args),
    }
}

fn corpus_build(seed: u64, args: CorpusBuildArgs) -> Result<()> {
    let mut spec = CorpusSpec::new(&args.out);
    spec.n_images = args.images;
    spec.width = args.width;
    spec.height = args.height;
    spec.seed = seed;
    spec.train_fraction = args.train_fraction;
    spec.settings = args.codecs;
    spec.include_original = !args.no_original;
    spec.include_preprocessed = args.preprocessed;
    spec.include_double = args.double;
    spec.include_synthesized = args.synthesized;
    spec.attacks = args.attacks;
    let manifest = build_corpus(&spec)?;
    let counts = [Split::Train, Split::Val, Split::Test]
        .iter()
        .map(|&s| format!("{} {}", manifest.entries_in(s).len(), s.as_str()))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "wrote {} entries ({counts}) to {}",
        manifest.entries.len(),
        args.out.join("manifest.json").display()
    );
    Ok(())
}

fn features_extract(seed: u64, args: FeaturesExtractArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    manifest.validate()?;
    let entries = &manifest.entries;
    let (rows, params) = match args.cue {
        CueKind::Color => {
            let mut config = ColorCueConfig {
                filter_id: args.filter,
                ..ColorCueConfig::default()
            };
            if let Some(p) = args.patch {
                config.patch_width = p;
                config.patch_height = p;
            }
            let per_entry = try_map_batch(entries, |entry| -> Result<Vec<ColorFeatureRow>> {
                let img = read_image(&manifest.resolve(entry))?;
                let feats = extract_color_features(&img, &config)?;
                Ok(feats
                    .iter()
                    .flat_map(|f| {
                        f.values.iter().enumerate().map(|(row_index, &rho)| {
                            ColorFeatureRow {
                                entry_id: entry.entry_id.clone(),
                                center_channel: f.center_channel.as_str().to_string(),
                                row_index,
                                rho,
                            }
                        })
                    })
                    .collect())
            })?;
            let rows: Vec<ColorFeatureRow> = per_entry.into_iter().flatten().collect();
            let n = rows.len();
            write_color_csv(&args.out, &rows)?;
            (
                n,
                serde_json::json!({
                    "patch_width": config.patch_width,
                    "patch_height": config.patch_height,
                    "filter": config.filter_id.as_str(),
                }),
            )
        }
        CueKind::Rd => {
            let probe = if args.fixed_probe {
                RdProbe::Fixed(args.probe.clone())
            } else {
                RdProbe::MatchEntry {
                    fallback: args.probe.clone(),
                }
            };
            let rows = try_map_batch(entries, |entry| -> Result<RdFeatureRow> {
                let img = read_image(&manifest.resolve(entry))?;
                let settings = probe.settings_for(entry);
                let feature = extract_rd_features(&img, &settings)?;
                Ok(RdFeatureRow {
                    entry_id: entry.entry_id.clone(),
                    codec_id: settings.codec_id,
                    strength: settings.strength,
                    values: feature.flatten(),
                })
            })?;
            let n = rows.len();
            write_rd_csv(&args.out, &rows)?;
            (
                n,
                serde_json::json!({
                    "probe": format!("{}:{}", args.probe.codec_id, args.probe.strength),
                    "fixed_probe": args.fixed_probe,
                }),
            )
        }
        CueKind::Quant => {
            let modes: Vec<QuantMode> = match args.mode.as_str() {
                "both" => vec![QuantMode::Full, QuantMode::Truncated],
                other => vec![other.parse()?],
            };
            let mut config = QuantCueConfig::default();
            if let Some(p) = args.patch {
                config.patch = p;
            }
            let per_entry = try_map_batch(entries, |entry| -> Result<Vec<QuantFeatureRow>> {
                let img = read_image(&manifest.resolve(entry))?;
                let mut rows = Vec::new();
                for &mode in &modes {
                    let feature =
                        extract_quant_features(&img, &args.probe, &QuantCueConfig { mode, ..config })?;
                    rows.extend(feature.values.iter().enumerate().map(|(channel_index, &phi)| {
                        QuantFeatureRow {
                            entry_id: entry.entry_id.clone(),
                            mode: mode.as_str().to_string(),
                            channel_index,
                            phi,
                        }
                    }));
                }
                Ok(rows)
            })?;
            let rows: Vec<QuantFeatureRow> = per_entry.into_iter().flatten().collect();
            let n = rows.len();
            write_quant_csv(&args.out, &rows)?;
            (
                n,
                serde_json::json!({
                    "patch": config.patch,
                    "probe": format!("{}:{}", args.probe.codec_id, args.probe.strength),
                    "modes": modes.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
                }),
            )
        }
    };
    write_sidecar(
        &args.out,
        &FeatureSidecar::new(args.cue.as_str(), seed, params),
    )?;
    println!("wrote {rows} feature rows to {}", args.out.display());
    Ok(())
}

/// Per-entry feature vectors for one cue, keyed by entry id.
fn feature_table(
    cue: CueKind,
    path: &Path,
    center: CenterChannel,
    mode: QuantMode,
) -> Result<BTreeMap<String, Vec<f64>>> {
    Ok(match cue {
        CueKind::Color => color_vectors(&read_color_csv(path)?, center.as_str()),
        CueKind::Rd => rd_vectors(&read_rd_csv(path)?),
        CueKind::Quant => quant_vectors(&read_quant_csv(path)?, mode.as_str()),
    })
}

fn parse_features_per_split(s: &str) -> Result<FeaturesPerSplit> {
    match s {
        "sqrt" => Ok(FeaturesPerSplit::Sqrt),
        "all" => Ok(FeaturesPerSplit::All),
        other => other
            .parse::<usize>()
            .map(FeaturesPerSplit::Fixed)
            .map_err(|_| {
                Error::Manifest(format!(
                    "features-per-split must be `sqrt`, `all`, or a count, got `{other}`"
                ))
            }),
    }
}

fn train(seed: u64, args: TrainArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    manifest.validate()?;
    let table = feature_table(args.cue, &args.features, args.center, args.mode)?;
    let train_entries = manifest.require_split(Split::Train)?;
    let mut x = Vec::with_capacity(train_entries.len());
    let mut y = Vec::with_capacity(train_entries.len());
    for entry in &train_entries {
        let vector = table.get(&entry.entry_id).ok_or_else(|| {
            Error::FeatureRowsMissing {
                entry_id: entry.entry_id.clone(),
            }
        })?;
        x.push(vector.clone());
        y.push(entry.label.as_str());
    }
    let config = ForestConfig {
        n_trees: args.trees,
        max_depth: args.max_depth,
        features_per_split: parse_features_per_split(&args.features_per_split)?,
        min_leaf: args.min_leaf,
        seed,
    };
    let model = rf_train(&x, &y, &config)?;
    model_save(&model, &args.out)?;
    println!(
        "trained {} trees on {} samples ({} classes) -> {}",
        config.n_trees,
        x.len(),
        model.classes().len(),
        args.out.display()
    );
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = model_load(&args.model)?;
    let table = feature_table(args.cue, &args.features, args.center, args.mode)?;
    if table.is_empty() {
        return Err(Error::EmptyVector);
    }
    let ids: Vec<&String> = table.keys().collect();
    let x: Vec<Vec<f64>> = table.values().cloned().collect();
    let predictions = rf_predict(&model, &x)?;
    let mut out = String::from("entry_id,label");
    for class in model.classes() {
        out.push_str(&format!(",p_{class}"));
    }
    out.push('\n');
    for (id, pred) in ids.iter().zip(&predictions) {
        out.push_str(&format!("{id},{}", pred.label));
        for p in &pred.probabilities {
            out.push_str(&format!(",{p:.6}"));
        }
        out.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn evaluate(seed: u64, args: EvaluateArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let mut config = ExperimentConfig::new(args.cue);
    config.forest.n_trees = args.trees;
    config.forest.max_depth = args.max_depth;
    config.forest.seed = seed;
    config.color.filter_id = args.filter;
    config.color_center = args.center;
    config.quant.mode = args.mode;
    config.quant_probe = args.probe.clone();
    config.rd_probe = if args.fixed_probe {
        RdProbe::Fixed(args.probe.clone())
    } else {
        RdProbe::MatchEntry {
            fallback: args.probe,
        }
    };
    config.include_runtime = args.runtime;
    if let Some(p) = args.patch {
        config.color.patch_width = p;
        config.color.patch_height = p;
        config.quant.patch = p;
    }
    let report = run_detection_experiment(&manifest, &config)?;
    match &args.out {
        Some(path) => {
            emit_report(&report, args.format, path)?;
            println!(
                "overall accuracy {:.4} ({} test entries) -> {}",
                report.overall.accuracy,
                report.overall.total,
                path.display()
            );
        }
        None => print!("{}", render_report(&report, args.format)?),
    }
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    manifest.validate()?;
    let selected: Vec<&ManifestEntry> = manifest
        .entries
        .iter()
        .filter(|e| args.label.as_ref().is_none_or(|l| &e.label == l))
        .filter(|e| args.split.is_none_or(|s| e.split == s))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyVector);
    }
    let images = try_map_batch(&selected, |entry| read_image(&manifest.resolve(entry)))?;
    let map = avg_fourier_spectrum(&images, args.filter)?;
    write_spectrum_csv(&map, &args.out)?;
    let ratio = block_peak_ratio(&map, args.block)?;
    println!(
        "{} images, block {} peak ratio {ratio:.4} -> {}",
        images.len(),
        args.block,
        args.out.display()
    );
    Ok(())
}

fn recompress_curve(args: CurveArgs) -> Result<()> {
    let img = read_image(&args.image)?;
    let mut out = String::from("codec,strength,k,r_y_bits,r_z_bits,rate_bpp,p_inp_db,p_inc_db\n");
    for settings in &args.codecs {
        let feature = extract_rd_features(&img, settings)?;
        for k in 0..3 {
            // p_inp/p_inc exist from the second recompression on.
            let p_inp = if k >= 1 {
                format!("{:.4}", feature.p_inp[k - 1])
            } else {
                String::new()
            };
            let p_inc = if k >= 1 {
                format!("{:.4}", feature.p_inc[k - 1])
            } else {
                String::new()
            };
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{}\n",
                settings.codec_id,
                settings.strength,
                k + 1,
                feature.r_y[k],
                feature.r_z[k],
                feature.r[k],
                p_inp,
                p_inc
            ));
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}
