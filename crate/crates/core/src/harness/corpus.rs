//! Corpus materialization: renders procedural sources, runs them through the
//! requested codecs (single and double chains), applies preprocessing and
//! robustness attacks, and writes a validated manifest next to the images.

use std::path::{Path, PathBuf};

use crate::codecs::{build_codec, CodecSettings};
use crate::cue_color::preprocess_only;
use crate::error::{Error, Result};
use crate::harness::manifest::{DatasetManifest, ManifestEntry, Split};
use crate::harness::synth::{synth_decoder_like, synth_textured};
use crate::imagecore::{resize_bilinear, write_image, ImageBuffer};
use crate::parallel::try_map_batch;

/// Postprocessing applied to held-out images before feature extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attack {
    /// Recompress with the block-DCT codec at this quality.
    Requality(u32),
    /// Bilinear resize to this percentage of the original size.
    Resize(u32),
}

impl Attack {
    pub fn tag(self) -> String {
        match self {
            Attack::Requality(q) => format!("jpg{q}"),
            Attack::Resize(p) => format!("rs{p}"),
        }
    }

    pub fn apply(self, img: &ImageBuffer) -> Result<ImageBuffer> {
        match self {
            Attack::Requality(q) => {
                let codec = build_codec(&CodecSettings::baseline_dct(q))?;
                Ok(codec.encode_decode(img)?.decoded)
            }
            Attack::Resize(p) => {
                let w = (img.width() * p as usize) / 100;
                let h = (img.height() * p as usize) / 100;
                resize_bilinear(img, w.max(1), h.max(1))
            }
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Attack::Requality(q) if (1..=100).contains(&q) => Ok(()),
            Attack::Resize(p) if (10..=100).contains(&p) => Ok(()),
            other => Err(Error::InvalidCodecSettings(format!(
                "attack {other:?} out of range"
            ))),
        }
    }
}

impl std::str::FromStr for Attack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |rest: &str| {
            rest.parse::<u32>()
                .map_err(|_| Error::InvalidCodecSettings(format!("bad attack {s:?}")))
        };
        if let Some(rest) = s.strip_prefix("jpg") {
            Ok(Attack::Requality(parse(rest)?))
        } else if let Some(rest) = s.strip_prefix("rs") {
            Ok(Attack::Resize(parse(rest)?))
        } else {
            Err(Error::InvalidCodecSettings(format!("unknown attack {s:?}")))
        }
    }
}

/// What to materialize. Double-compression chains run every ordered pair of
/// distinct `settings`; attacks copy every test-split entry.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub out_dir: PathBuf,
    pub n_images: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub settings: Vec<CodecSettings>,
    pub include_original: bool,
    pub include_preprocessed: bool,
    pub include_double: bool,
    pub include_synthesized: bool,
    pub attacks: Vec<Attack>,
}

impl CorpusSpec {
    pub fn new(out_dir: &Path) -> Self {
        CorpusSpec {
            out_dir: out_dir.to_path_buf(),
            n_images: 8,
            width: 128,
            height: 128,
            seed: 0,
            train_fraction: 0.5,
            settings: Vec::new(),
            include_original: true,
            include_preprocessed: false,
            include_double: false,
            include_synthesized: false,
            attacks: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_images == 0 {
            return Err(Error::Manifest("corpus needs at least one image".into()));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::Manifest("corpus images must be at least 16x16".into()));
        }
        if !(0.0..=1.0).contains(&self.train_fraction) {
            return Err(Error::Manifest("train_fraction must lie in [0, 1]".into()));
        }
        for s in &self.settings {
            build_codec(s)?;
        }
        for a in &self.attacks {
            a.validate()?;
        }
        Ok(())
    }
}

struct Variant {
    slug: String,
    label: &'static str,
    image: ImageBuffer,
    codec_id: Option<String>,
    strength: Option<f64>,
    prior_codec_id: Option<String>,
    prior_strength: Option<f64>,
    generator_id: Option<String>,
    postprocessing: Option<String>,
}

/// All variants for one source index, before attacks.
fn render_variants(spec: &CorpusSpec, index: usize) -> Result<Vec<Variant>> {
    let seed = spec.seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let source = synth_textured(spec.width, spec.height, seed);
    let mut variants = Vec::new();
    if spec.include_original {
        variants.push(Variant {
            slug: "orig".into(),
            label: "original",
            image: source.clone(),
            codec_id: None,
            strength: None,
            prior_codec_id: None,
            prior_strength: None,
            generator_id: Some("textured".into()),
            postprocessing: None,
        });
    }
    if spec.include_preprocessed {
        variants.push(Variant {
            slug: "pre".into(),
            label: "original",
            image: preprocess_only(&source)?,
            codec_id: None,
            strength: None,
            prior_codec_id: None,
            prior_strength: None,
            generator_id: Some("textured_preprocessed".into()),
            postprocessing: None,
        });
    }
    for (k, settings) in spec.settings.iter().enumerate() {
        let codec = build_codec(settings)?;
        let decoded = codec.encode_decode(&source)?.decoded;
        variants.push(Variant {
            slug: format!("s{k}"),
            label: "compressed",
            image: decoded,
            codec_id: Some(settings.codec_id.clone()),
            strength: Some(settings.strength),
            prior_codec_id: None,
            prior_strength: None,
            generator_id: None,
            postprocessing: None,
        });
    }
    if spec.include_double {
        for (a, first) in spec.settings.iter().enumerate() {
            for (b, second) in spec.settings.iter().enumerate() {
                if a == b {
                    continue;
                }
                let c0 = build_codec(first)?;
                let c1 = build_codec(second)?;
                let once = c0.encode_decode(&source)?.decoded;
                let twice = c1.encode_decode(&once)?.decoded;
                variants.push(Variant {
                    slug: format!("d{a}_{b}"),
                    label: "double",
                    image: twice,
                    codec_id: Some(second.codec_id.clone()),
                    strength: Some(second.strength),
                    prior_codec_id: Some(first.codec_id.clone()),
                    prior_strength: Some(first.strength),
                    generator_id: None,
                    postprocessing: None,
                });
            }
        }
    }
    if spec.include_synthesized {
        variants.push(Variant {
            slug: "synth".into(),
            label: "synthesized",
            image: synth_decoder_like(spec.width, spec.height, seed ^ 0xA5A5)?,
            codec_id: None,
            strength: None,
            prior_codec_id: None,
            prior_strength: None,
            generator_id: Some("decoder_synth".into()),
            postprocessing: None,
        });
    }
    Ok(variants)
}

/// Render, compress, attack, write, and return the validated manifest. The
/// manifest is also saved as `manifest.json` inside `out_dir`.
pub fn build_corpus(spec: &CorpusSpec) -> Result<DatasetManifest> {
    spec.validate()?;
    let images_dir = spec.out_dir.join("images");
    std::fs::create_dir_all(&images_dir)?;
    let n_train = (spec.train_fraction * spec.n_images as f64).round() as usize;
    let indices: Vec<usize> = (0..spec.n_images).collect();
    let per_image = try_map_batch(&indices, |&i| -> Result<Vec<ManifestEntry>> {
        let split = if i < n_train { Split::Train } else { Split::Test };
        let mut variants = render_variants(spec, i)?;
        if split == Split::Test {
            let mut attacked = Vec::new();
            for v in &variants {
                for atk in &spec.attacks {
                    attacked.push(Variant {
                        slug: format!("{}_{}", v.slug, atk.tag()),
                        label: v.label,
                        image: atk.apply(&v.image)?,
                        codec_id: v.codec_id.clone(),
                        strength: v.strength,
                        prior_codec_id: v.prior_codec_id.clone(),
                        prior_strength: v.prior_strength,
                        generator_id: v.generator_id.clone(),
                        postprocessing: Some(atk.tag()),
                    });
                }
            }
            variants.extend(attacked);
        }
        let mut entries = Vec::new();
        for v in variants {
            let image_id = if v.label == "synthesized" {
                format!("syn{i:04}")
            } else {
                format!("img{i:04}")
            };
            let file = format!("img{i:04}_{}.png", v.slug);
            write_image(&images_dir.join(&file), &v.image)?;
            entries.push(ManifestEntry {
                entry_id: format!("img{i:04}_{}", v.slug),
                image_id,
                image_path: format!("images/{file}"),
                label: v.label.to_string(),
                split,
                codec_id: v.codec_id,
                strength: v.strength,
                prior_codec_id: v.prior_codec_id,
                prior_strength: v.prior_strength,
                generator_id: v.generator_id,
                postprocessing: v.postprocessing,
            });
        }
        Ok(entries)
    })?;
    let entries: Vec<ManifestEntry> = per_image.into_iter().flatten().collect();
    let mut labels: Vec<String> = entries.iter().map(|e| e.label.clone()).collect();
    labels.sort();
    labels.dedup();
    let manifest = DatasetManifest::new(&spec.out_dir, labels, entries);
    manifest.validate()?;
    manifest.save(&spec.out_dir.join("manifest.json"))?;
    Ok(manifest)
}
