//! End-to-end detection experiments: extract one cue's features over a
//! manifest, train the forest on the train split, and score the test split
//! per class and per condition.

use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::classify::{rf_predict, rf_train, ForestConfig};
use crate::codecs::CodecSettings;
use crate::cue_color::{extract_color_features, CenterChannel, ColorCueConfig};
use crate::cue_quant::{extract_quant_features, ProbeSource, QuantCueConfig};
use crate::cue_rd::extract_rd_features;
use crate::error::{Error, Result};
use crate::harness::manifest::{DatasetManifest, ManifestEntry, Split};
use crate::harness::report::{CellStats, ExperimentReport};
use crate::imagecore::read_image;
use crate::parallel::try_map_batch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CueKind {
    Color,
    Rd,
    Quant,
}

impl CueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CueKind::Color => "color",
            CueKind::Rd => "rd",
            CueKind::Quant => "quant",
        }
    }
}

impl std::str::FromStr for CueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "color" => Ok(CueKind::Color),
            "rd" => Ok(CueKind::Rd),
            "quant" => Ok(CueKind::Quant),
            other => Err(Error::Manifest(format!("unknown cue {other:?}"))),
        }
    }
}

/// Which codec the recompression features probe with. `MatchEntry` follows
/// each entry's recorded codec and strength (the final compression is
/// presumed known), falling back to the given settings for entries without
/// codec provenance.
#[derive(Debug, Clone)]
pub enum RdProbe {
    Fixed(CodecSettings),
    MatchEntry { fallback: CodecSettings },
}

impl RdProbe {
    pub fn settings_for(&self, entry: &ManifestEntry) -> CodecSettings {
        match self {
            RdProbe::Fixed(s) => s.clone(),
            RdProbe::MatchEntry { fallback } => match (&entry.codec_id, entry.strength) {
                (Some(codec_id), Some(strength)) => CodecSettings {
                    codec_id: codec_id.clone(),
                    strength,
                    seed: 0,
                    external_command: None,
                },
                _ => fallback.clone(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub cue: CueKind,
    pub forest: ForestConfig,
    pub color: ColorCueConfig,
    pub color_center: CenterChannel,
    pub quant: QuantCueConfig,
    pub quant_probe: CodecSettings,
    pub rd_probe: RdProbe,
    pub include_runtime: bool,
}

impl ExperimentConfig {
    pub fn new(cue: CueKind) -> Self {
        ExperimentConfig {
            cue,
            forest: ForestConfig::default(),
            color: ColorCueConfig::default(),
            color_center: CenterChannel::B,
            quant: QuantCueConfig::default(),
            quant_probe: CodecSettings::sim_latent(1.0),
            rd_probe: RdProbe::MatchEntry {
                fallback: CodecSettings::sim_latent(4.0),
            },
            include_runtime: false,
        }
    }
}

/// Exact configuration echoed into every report.
pub fn config_echo(config: &ExperimentConfig) -> serde_json::Value {
    let rd_probe = match &config.rd_probe {
        RdProbe::Fixed(s) => serde_json::json!({"fixed": s}),
        RdProbe::MatchEntry { fallback } => serde_json::json!({"match_entry": {"fallback": fallback}}),
    };
    serde_json::json!({
        "cue": config.cue.as_str(),
        "forest": config.forest,
        "color": {
            "patch_width": config.color.patch_width,
            "patch_height": config.color.patch_height,
            "filter": config.color.filter_id.as_str(),
            "center": config.color_center.as_str(),
        },
        "quant": {
            "patch": config.quant.patch,
            "mode": config.quant.mode.as_str(),
            "probe_source": match config.quant.probe_source {
                ProbeSource::Analysis => "analysis",
                ProbeSource::Coded => "coded",
            },
            "probe": config.quant_probe,
        },
        "rd_probe": rd_probe,
    })
}

pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_string(&config_echo(config))?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Feature vector for one manifest entry under the configured cue.
pub fn entry_features(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    config: &ExperimentConfig,
) -> Result<Vec<f64>> {
    let img = read_image(&manifest.resolve(entry))?;
    match config.cue {
        CueKind::Color => {
            let features = extract_color_features(&img, &config.color)?;
            let idx = CenterChannel::ALL
                .iter()
                .position(|c| *c == config.color_center)
                .unwrap();
            Ok(features[idx].values.clone())
        }
        CueKind::Rd => {
            let settings = config.rd_probe.settings_for(entry);
            Ok(extract_rd_features(&img, &settings)?.flatten().to_vec())
        }
        CueKind::Quant => {
            let feature = extract_quant_features(&img, &config.quant_probe, &config.quant)?;
            Ok(feature.values)
        }
    }
}

fn tally<'a>(
    keys: impl Iterator<Item = &'a str>,
    hits: &[bool],
) -> std::collections::BTreeMap<String, CellStats> {
    let mut counts: std::collections::BTreeMap<String, (usize, usize)> =
        std::collections::BTreeMap::new();
    for (key, &hit) in keys.zip(hits) {
        let c = counts.entry(key.to_string()).or_default();
        c.1 += 1;
        if hit {
            c.0 += 1;
        }
    }
    counts
        .into_iter()
        .map(|(k, (correct, total))| (k, CellStats::new(correct, total)))
        .collect()
}

/// Validate the manifest, extract features, train on the train split, and
/// score the test split. Runtime is recorded only when the config opts in,
/// keeping default reports byte-identical across runs.
pub fn run_detection_experiment(
    manifest: &DatasetManifest,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    manifest.validate()?;
    let train = manifest.require_split(Split::Train)?;
    let test = manifest.require_split(Split::Test)?;
    let all: Vec<&ManifestEntry> = train.iter().chain(test.iter()).copied().collect();
    let features = try_map_batch(&all, |entry| entry_features(manifest, entry, config))?;
    let (x_train, x_test) = features.split_at(train.len());
    let y_train: Vec<&str> = train.iter().map(|e| e.label.as_str()).collect();
    let model = rf_train(x_train, &y_train, &config.forest)?;
    let preds = rf_predict(&model, x_test)?;
    let hits: Vec<bool> = preds
        .iter()
        .zip(&test)
        .map(|(p, e)| p.label == e.label)
        .collect();
    let conditions: Vec<String> = test.iter().map(|e| e.condition()).collect();
    let correct = hits.iter().filter(|&&h| h).count();
    let report = ExperimentReport {
        cue: config.cue.as_str().to_string(),
        classes: model.classes().to_vec(),
        n_train: train.len(),
        n_test: test.len(),
        overall: CellStats::new(correct, test.len()),
        per_class: tally(test.iter().map(|e| e.label.as_str()), &hits),
        per_condition: tally(conditions.iter().map(String::as_str), &hits),
        config_echo: config_echo(config),
        config_hash: config_hash(config)?,
        runtime_seconds: config
            .include_runtime
            .then(|| started.elapsed().as_secs_f64()),
    };
    report.validate()?;
    Ok(report)
}
