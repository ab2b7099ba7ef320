//! Acceptance gates for the toolkit: one test per numbered criterion in the
//! project checklist. Every test prints a single `[PASS]`/`[FAIL]` line (run
//! with `--nocapture` to see them all) and then asserts, so a red build
//! always names the criterion that broke.

use std::sync::OnceLock;

use codec_forensics::classify::{model_load, model_save, rf_predict, rf_train, ForestConfig};
use codec_forensics::codecs::{encode_decode, CodecSettings};
use codec_forensics::cue_color::{
    extract_color_features, preprocess_only, row_color_correlation, CenterChannel, ColorCueConfig,
};
use codec_forensics::cue_quant::{
    channel_phi, extract_quant_features, mean_phi, ProbeSource, QuantCueConfig, QuantMode,
};
use codec_forensics::cue_rd::{extract_rd_features, RdFeature, RD_DIM, RD_FEATURE_NAMES};
use codec_forensics::harness::{
    avg_fourier_spectrum, block_peak_ratio, synth_decoder_like, synth_noise, synth_textured,
    Attack,
};
use codec_forensics::imagecore::{FilterId, ImageBuffer, PSNR_CAP_DB};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn gate(criterion: usize, description: &str, pass: bool) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {description}");
    assert!(pass, "criterion {criterion} failed: {description}");
}

/// Combined absolute/relative tolerance of 1e-9.
fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-9 * want.abs().max(1.0)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Brute-force oracle for the row correlation: materialize both absolute
/// difference vectors, then accumulate dot product and norms in explicit
/// loops.
fn oracle_rho(r: &[f64], g: &[f64], b: &[f64], center: CenterChannel) -> f64 {
    let (c, o1, o2): (&[f64], &[f64], &[f64]) = match center {
        CenterChannel::R => (r, g, b),
        CenterChannel::G => (g, r, b),
        CenterChannel::B => (b, r, g),
    };
    let d1: Vec<f64> = (0..c.len()).map(|i| (o1[i] - c[i]).abs()).collect();
    let d2: Vec<f64> = (0..c.len()).map(|i| (c[i] - o2[i]).abs()).collect();
    let mut dot = 0.0;
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for i in 0..d1.len() {
        dot += d1[i] * d2[i];
        n1 += d1[i] * d1[i];
        n2 += d2[i] * d2[i];
    }
    if n1 == 0.0 || n2 == 0.0 {
        0.0
    } else {
        dot / (n1.sqrt() * n2.sqrt())
    }
}

/// Brute-force oracle for the channel correlation: materialize the rounded
/// (or sign-truncated) companion vector, then textbook cosine in loops.
fn oracle_phi(y: &[f64], mode: QuantMode) -> f64 {
    let companion: Vec<f64> = y
        .iter()
        .map(|&v| {
            let q = v.round();
            match mode {
                QuantMode::Full => q,
                QuantMode::Truncated => {
                    if q > 0.0 {
                        1.0
                    } else if q < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect();
    let mut dot = 0.0;
    let mut ny = 0.0;
    let mut nr = 0.0;
    for i in 0..y.len() {
        dot += y[i] * companion[i];
        ny += y[i] * y[i];
        nr += companion[i] * companion[i];
    }
    if ny == 0.0 || nr == 0.0 {
        0.0
    } else {
        dot / (ny.sqrt() * nr.sqrt())
    }
}

#[test]
fn c01_correlation_formulas_match_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut ok = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..64);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        for center in CenterChannel::ALL {
            let got = row_color_correlation(&r, &g, &b, center).unwrap();
            ok &= close(got, oracle_rho(&r, &g, &b, center));
        }
    }
    for _ in 0..1000 {
        let n = rng.random_range(1..64);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        for mode in [QuantMode::Full, QuantMode::Truncated] {
            let got = channel_phi(&y, mode).unwrap();
            ok &= close(got, oracle_phi(&y, mode));
        }
    }
    gate(
        1,
        "row and channel correlations match brute-force oracles on 1000 random vectors each",
        ok,
    );
}

#[test]
fn c02_chroma_pipeline_lifts_row_correlation() {
    let config = ColorCueConfig::default();
    let n = 50;
    let mut before = 0.0;
    let mut after = 0.0;
    for seed in 0..n {
        let img = synth_textured(512, 512, 7000 + seed);
        before += extract_color_features(&img, &config).unwrap()[0].mean();
        let pre = preprocess_only(&img).unwrap();
        after += extract_color_features(&pre, &config).unwrap()[0].mean();
    }
    let lift = (after - before) / n as f64;
    gate(
        2,
        &format!("chroma-pipeline preprocessing lifts mean rho(r) by >= 0.1 over {n} textured images (lift {lift:.3})"),
        lift >= 0.1,
    );
}

#[test]
fn c03_rho_values_are_bounded_and_flat_rows_hit_the_sentinel() {
    let config = ColorCueConfig {
        patch_width: 48,
        patch_height: 48,
        filter_id: FilterId::default(),
    };
    let mut bounded = true;
    for seed in 0..10u64 {
        let img = synth_textured(64, 64, 7600 + seed);
        let variants = [
            img.clone(),
            preprocess_only(&img).unwrap(),
            encode_decode(&img, &CodecSettings::sim_latent(8.0)).unwrap().decoded,
            encode_decode(&img, &CodecSettings::baseline_dct(40)).unwrap().decoded,
        ];
        for v in &variants {
            for f in &extract_color_features(v, &config).unwrap() {
                bounded &= f.values.iter().all(|&x| (0.0..=1.0).contains(&x));
            }
        }
    }
    let flat = ImageBuffer::from_rgb8(64, 64, &[93; 64 * 64 * 3]).unwrap();
    let sentinel = extract_color_features(&flat, &config)
        .unwrap()
        .iter()
        .all(|f| f.values.iter().all(|&x| x == 0.0));
    gate(
        3,
        "all emitted rho values lie in [0,1] and flat rows give exactly 0",
        bounded && sentinel,
    );
}

#[test]
fn c04_recompression_psnr_trends_hold() {
    let settings = [
        CodecSettings::baseline_dct(30),
        CodecSettings::baseline_dct(50),
        CodecSettings::baseline_dct(80),
        CodecSettings::sim_latent(2.0),
        CodecSettings::sim_latent(4.0),
        CodecSettings::sim_latent(8.0),
    ];
    let mut ok = 0usize;
    let mut total = 0usize;
    for i in 0..20u64 {
        let img = synth_textured(96, 96, 1200 + i);
        for s in &settings {
            let f = extract_rd_features(&img, s).unwrap();
            total += 1;
            if f.p_inp[1] <= f.p_inp[0] + 0.01 && f.p_inc[1] >= f.p_inc[0] - 0.5 {
                ok += 1;
            }
        }
    }
    let frac = ok as f64 / total as f64;
    gate(
        4,
        &format!("p_inp non-increasing (tol 0.01 dB) and p_inc(3) >= p_inc(2) - 0.5 dB in >= 95% of {total} cases ({frac:.3})"),
        frac >= 0.95,
    );
}

#[test]
fn c05_rd_feature_contract_is_exact() {
    let names_ok = RD_FEATURE_NAMES
        == [
            "r_y_1", "r_y_2", "r_y_3", "r_z_1", "r_z_2", "r_z_3", "r_1", "r_2", "r_3", "p_inp_2",
            "p_inp_3", "p_inc_2", "p_inc_3", "d_r32", "d_r21", "d_pinp", "d_pinc",
        ];

    let img = synth_textured(20, 14, 1500);
    let f = extract_rd_features(&img, &CodecSettings::identity()).unwrap();
    let bits = 24.0 * 20.0 * 14.0;
    let identity_ok = f.flatten()
        == [
            bits, bits, bits, 0.0, 0.0, 0.0, 24.0, 24.0, 24.0, PSNR_CAP_DB, PSNR_CAP_DB,
            PSNR_CAP_DB, PSNR_CAP_DB, 0.0, 0.0, 0.0, 0.0,
        ];

    let probe = synth_textured(48, 32, 1501);
    let mut redundancy_ok = true;
    let mut roundtrip_ok = true;
    for settings in [
        CodecSettings::identity(),
        CodecSettings::baseline_dct(70),
        CodecSettings::sim_latent(3.0),
    ] {
        let f = extract_rd_features(&probe, &settings).unwrap();
        redundancy_ok &= f.check_redundancy(48 * 32).is_ok();
        let v = f.flatten();
        roundtrip_ok &= v.len() == RD_DIM && RdFeature::unflatten(&v) == f;
    }
    gate(
        5,
        "17-dim feature layout, redundancy fields, and identity reference vector are exact",
        names_ok && identity_ok && redundancy_ok && roundtrip_ok,
    );
}

#[test]
fn c06_mean_phi_rises_with_rate_and_unquantized_images_beat_coarse_steps() {
    let steps = [16.0, 8.0, 4.0, 2.0];
    let probe = CodecSettings::sim_latent(1.0);
    let config = QuantCueConfig {
        patch: 64,
        mode: QuantMode::Full,
        probe_source: ProbeSource::Analysis,
    };
    let n = 30u64;
    let mut by_step = [0.0f64; 4];
    let mut pristine = 0.0f64;
    let mut synthesized = 0.0f64;
    for i in 0..n {
        let img = synth_textured(96, 96, 3300 + i);
        pristine += mean_phi(&extract_quant_features(&img, &probe, &config).unwrap());
        synthesized += mean_phi(
            &extract_quant_features(&synth_decoder_like(96, 96, 3400 + i).unwrap(), &probe, &config)
                .unwrap(),
        );
        for (j, &step) in steps.iter().enumerate() {
            let decoded = encode_decode(&img, &CodecSettings::sim_latent(step)).unwrap().decoded;
            by_step[j] += mean_phi(&extract_quant_features(&decoded, &probe, &config).unwrap());
        }
    }
    for v in &mut by_step {
        *v /= n as f64;
    }
    pristine /= n as f64;
    synthesized /= n as f64;
    // Rate grows as the step shrinks, so the means must rise along `steps`.
    let rising = by_step[0] < by_step[1] && by_step[1] < by_step[2] && by_step[2] < by_step[3];
    let coarse_below = pristine > by_step[0]
        && pristine > by_step[1]
        && synthesized > by_step[0]
        && synthesized > by_step[1];
    gate(
        6,
        &format!(
            "mean phi rises with rate ({:.3} < {:.3} < {:.3} < {:.3}) and pristine {:.3} / synthesized {:.3} beat the two coarsest steps",
            by_step[0], by_step[1], by_step[2], by_step[3], pristine, synthesized
        ),
        rising && coarse_below,
    );
}

#[test]
fn c07_color_cue_detects_compression_across_strengths() {
    let config = ColorCueConfig {
        patch_width: 128,
        patch_height: 128,
        filter_id: FilterId::default(),
    };
    let rho_b = |img: &ImageBuffer| -> Vec<f64> {
        extract_color_features(img, &config).unwrap()[2].values.clone()
    };
    let mut x_train: Vec<Vec<f64>> = Vec::new();
    let mut y_train: Vec<&str> = Vec::new();
    for i in 0..100u64 {
        let src = synth_textured(128, 128, 4000 + i);
        x_train.push(rho_b(&src));
        y_train.push("original");
        let comp = encode_decode(&src, &CodecSettings::sim_latent(8.0)).unwrap().decoded;
        x_train.push(rho_b(&comp));
        y_train.push("compressed");
    }
    let forest = ForestConfig {
        n_trees: 100,
        seed: 11,
        ..ForestConfig::default()
    };
    let model = rf_train(&x_train, &y_train, &forest).unwrap();

    let test_steps = [4.0, 8.0, 16.0];
    let mut orig_hits = 0usize;
    let mut comp_hits = [0usize; 3];
    let n_test = 25u64;
    for i in 0..n_test {
        let src = synth_textured(128, 128, 4600 + i);
        let p = rf_predict(&model, &[rho_b(&src)]).unwrap();
        if p[0].label == "original" {
            orig_hits += 1;
        }
        for (j, &step) in test_steps.iter().enumerate() {
            let comp = encode_decode(&src, &CodecSettings::sim_latent(step)).unwrap().decoded;
            let p = rf_predict(&model, &[rho_b(&comp)]).unwrap();
            if p[0].label == "compressed" {
                comp_hits[j] += 1;
            }
        }
    }
    let acc: Vec<f64> = comp_hits
        .iter()
        .map(|&h| (h + orig_hits) as f64 / (2 * n_test as usize) as f64)
        .collect();
    let mean = acc.iter().sum::<f64>() / acc.len() as f64;
    gate(
        7,
        &format!(
            "color-cue accuracy >= 0.9 at the coarsest step and >= 0.7 averaged (steps {test_steps:?}: {:.3} {:.3} {:.3}, mean {mean:.3})",
            acc[0], acc[1], acc[2]
        ),
        acc[2] >= 0.9 && mean >= 0.7,
    );
}

#[test]
fn c08_rd_cue_recalls_double_compression() {
    let final_q = 80u32;
    let probe = CodecSettings::baseline_dct(final_q);
    let single = |seed: u64| -> ImageBuffer {
        let src = synth_textured(96, 96, seed);
        encode_decode(&src, &CodecSettings::baseline_dct(final_q)).unwrap().decoded
    };
    let double = |seed: u64, first_q: u32| -> ImageBuffer {
        let src = synth_textured(96, 96, seed);
        let once = encode_decode(&src, &CodecSettings::baseline_dct(first_q)).unwrap().decoded;
        encode_decode(&once, &CodecSettings::baseline_dct(final_q)).unwrap().decoded
    };
    let first_q = |i: u64| if i % 2 == 0 { 30 } else { 50 };

    let mut x_train: Vec<Vec<f64>> = Vec::new();
    let mut y_train: Vec<&str> = Vec::new();
    for i in 0..60u64 {
        x_train.push(extract_rd_features(&single(5000 + i), &probe).unwrap().flatten().to_vec());
        y_train.push("single");
        x_train.push(
            extract_rd_features(&double(5000 + i, first_q(i)), &probe).unwrap().flatten().to_vec(),
        );
        y_train.push("double");
    }
    let forest = ForestConfig {
        n_trees: 100,
        seed: 13,
        ..ForestConfig::default()
    };
    let model = rf_train(&x_train, &y_train, &forest).unwrap();

    let mut recalled = 0usize;
    let n_test = 40u64;
    for i in 0..n_test {
        let f = extract_rd_features(&double(5600 + i, first_q(i)), &probe).unwrap();
        let p = rf_predict(&model, &[f.flatten().to_vec()]).unwrap();
        if p[0].label == "double" {
            recalled += 1;
        }
    }
    let recall = recalled as f64 / n_test as f64;
    gate(
        8,
        &format!("coarse-then-fine double compression recall >= 0.8 ({recall:.3})"),
        recall >= 0.8,
    );
}

/// Shared fixture for criteria 9 and 10: one compressed-vs-synthesized
/// benchmark, evaluated clean in both probe modes and under both attacks in
/// full mode. Compression alternates a sub-integer and a coarse step so the
/// full probe must read grid magnitudes, not just the zero pattern.
struct QuantBench {
    full_clean: f64,
    trunc_clean: f64,
    full_requality: f64,
    full_resize: f64,
}

static QUANT_BENCH: OnceLock<QuantBench> = OnceLock::new();

fn quant_bench() -> &'static QuantBench {
    QUANT_BENCH.get_or_init(|| {
        let steps = [0.5f64, 8.0];
        let probe = CodecSettings::sim_latent(1.0);
        let features = |img: &ImageBuffer, mode: QuantMode| -> Vec<f64> {
            let config = QuantCueConfig {
                patch: 32,
                mode,
                probe_source: ProbeSource::Analysis,
            };
            extract_quant_features(img, &probe, &config).unwrap().values
        };
        let compressed = |seed: u64, i: usize| -> ImageBuffer {
            let img = synth_textured(96, 96, seed);
            encode_decode(&img, &CodecSettings::sim_latent(steps[i % steps.len()]))
                .unwrap()
                .decoded
        };
        let make_set = |comp_base: u64, synth_base: u64, n: usize| -> Vec<(ImageBuffer, &str)> {
            (0..n)
                .flat_map(|i| {
                    [
                        (compressed(comp_base + i as u64, i), "compressed"),
                        (
                            synth_decoder_like(96, 96, synth_base + i as u64).unwrap(),
                            "synthesized",
                        ),
                    ]
                })
                .collect()
        };
        let train = make_set(9000, 9300, 8);
        let test = make_set(9500, 9800, 50);

        let forest = ForestConfig {
            n_trees: 50,
            seed: 5,
            ..ForestConfig::default()
        };
        let y: Vec<&str> = train.iter().map(|&(_, l)| l).collect();
        let accuracy = |mode: QuantMode, set: &[(ImageBuffer, &str)]| -> f64 {
            let x: Vec<Vec<f64>> = train.iter().map(|(img, _)| features(img, mode)).collect();
            let model = rf_train(&x, &y, &forest).unwrap();
            let xt: Vec<Vec<f64>> = set.iter().map(|(img, _)| features(img, mode)).collect();
            let preds = rf_predict(&model, &xt).unwrap();
            preds.iter().zip(set).filter(|(p, (_, l))| p.label == *l).count() as f64
                / set.len() as f64
        };

        let attacked = |attack: Attack| -> Vec<(ImageBuffer, &str)> {
            test.iter()
                .map(|(img, l)| (attack.apply(img).unwrap(), *l))
                .collect()
        };
        QuantBench {
            full_clean: accuracy(QuantMode::Full, &test),
            trunc_clean: accuracy(QuantMode::Truncated, &test),
            full_requality: accuracy(QuantMode::Full, &attacked(Attack::Requality(90))),
            full_resize: accuracy(QuantMode::Full, &attacked(Attack::Resize(90))),
        }
    })
}

#[test]
fn c09_quant_cue_separates_compressed_from_synthesized() {
    let bench = quant_bench();
    gate(
        9,
        &format!(
            "quant-cue accuracy: full >= 0.9 ({:.3}), truncated >= 0.7 ({:.3}) and strictly below full",
            bench.full_clean, bench.trunc_clean
        ),
        bench.full_clean >= 0.9
            && bench.trunc_clean >= 0.7
            && bench.trunc_clean < bench.full_clean,
    );
}

#[test]
fn c10_quant_cue_degrades_gracefully_under_attacks() {
    let bench = quant_bench();
    let drop_rq = bench.full_clean - bench.full_requality;
    let drop_rs = bench.full_clean - bench.full_resize;
    gate(
        10,
        &format!(
            "requality-90 and resize-90 cost <= 0.15 accuracy (drops {drop_rq:.3} / {drop_rs:.3})"
        ),
        drop_rq <= 0.15 && drop_rs <= 0.15,
    );
}

#[test]
fn c11_forest_solves_gaussian_blobs_and_retrains_byte_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut blob = |sign: f64| -> Vec<f64> {
        (0..10).map(|_| sign * 2.0 + gaussian(&mut rng)).collect()
    };
    let mut x_train: Vec<Vec<f64>> = Vec::new();
    let mut y_train: Vec<&str> = Vec::new();
    for _ in 0..500 {
        x_train.push(blob(1.0));
        y_train.push("pos");
        x_train.push(blob(-1.0));
        y_train.push("neg");
    }
    let mut x_test: Vec<Vec<f64>> = Vec::new();
    let mut y_test: Vec<&str> = Vec::new();
    for _ in 0..200 {
        x_test.push(blob(1.0));
        y_test.push("pos");
        x_test.push(blob(-1.0));
        y_test.push("neg");
    }
    let forest = ForestConfig {
        n_trees: 50,
        seed: 21,
        ..ForestConfig::default()
    };
    let model = rf_train(&x_train, &y_train, &forest).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.json");
    let path_b = dir.path().join("b.json");
    model_save(&model, &path_a).unwrap();
    let retrained = rf_train(&x_train, &y_train, &forest).unwrap();
    model_save(&retrained, &path_b).unwrap();
    let identical = std::fs::read(&path_a).unwrap() == std::fs::read(&path_b).unwrap();

    let loaded = model_load(&path_a).unwrap();
    let preds = rf_predict(&loaded, &x_test).unwrap();
    let hits = preds.iter().zip(&y_test).filter(|(p, l)| p.label == **l).count();
    let accuracy = hits as f64 / y_test.len() as f64;
    gate(
        11,
        &format!("blob accuracy >= 0.99 ({accuracy:.3}) and retraining is byte-identical ({identical})"),
        accuracy >= 0.99 && identical,
    );
}

#[test]
fn c12_compressed_noise_shows_block_lattice_peaks() {
    let clean: Vec<ImageBuffer> = (0..8u64).map(|i| synth_noise(128, 128, 500 + i, 12.0)).collect();
    let coded: Vec<ImageBuffer> = clean
        .iter()
        .map(|img| encode_decode(img, &CodecSettings::sim_latent(16.0)).unwrap().decoded)
        .collect();
    let ratio = |imgs: &[ImageBuffer]| -> f64 {
        let map = avg_fourier_spectrum(imgs, FilterId::default()).unwrap();
        block_peak_ratio(&map, 8).unwrap()
    };
    let clean_ratio = ratio(&clean);
    let coded_ratio = ratio(&coded);
    gate(
        12,
        &format!(
            "block-lattice peak ratio >= 3 on compressed noise ({coded_ratio:.2}) and < 1.5 on clean noise ({clean_ratio:.2})"
        ),
        coded_ratio >= 3.0 && clean_ratio < 1.5,
    );
}
