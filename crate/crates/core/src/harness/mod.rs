//! Experiment harness: corpus construction, manifest handling, feature
//! tables, forest-backed detection experiments, reports, and the spectrum
//! diagnostic.

pub mod corpus;
pub mod experiment;
pub mod features_io;
pub mod manifest;
pub mod report;
pub mod spectrum;
pub mod synth;

pub use corpus::{build_corpus, Attack, CorpusSpec};
pub use experiment::{
    config_echo, config_hash, entry_features, run_detection_experiment, CueKind,
    ExperimentConfig, RdProbe,
};
pub use features_io::{
    color_vectors, quant_vectors, rd_vectors, read_color_csv, read_quant_csv, read_rd_csv,
    read_sidecar, sidecar_path, write_color_csv, write_quant_csv, write_rd_csv, write_sidecar,
    ColorFeatureRow, FeatureSidecar, QuantFeatureRow, RdFeatureRow,
};
pub use manifest::{DatasetManifest, ManifestEntry, Split, MANIFEST_VERSION};
pub use report::{
    emit_report, render_report, report_from_json, CellStats, ExperimentReport, ReportFormat,
};
pub use spectrum::{avg_fourier_spectrum, block_peak_ratio, write_spectrum_csv, SpectrumMap};
pub use synth::{synth_decoder_like, synth_noise, synth_textured};
