//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Thresholds are fixed here and are not configurable.

use emg_core::activity::{aggregate_report, phase_amplitude, AggregateMode};
use emg_core::config::{FilterConfig, ModelConfig};
use emg_core::features::{extract, freq_features, ExtractOptions, FeatureMatrix, SpectralWindow, WindowSpec};
use emg_core::models::{evaluate, fit, fit_lda, fit_rf, LdaParams, Mlp, MlpParams, ModelKind, RfParams};
use emg_core::pipeline::session_envelope;
use emg_core::session::{AnnotationTrack, Interval, Label, Task};
use emg_core::signal::{design_bandpass, design_notch, BiquadCascade, DeviceProfile, Recording, Units};
use emg_core::synth::{generate, preset};
use emg_core::PipelineConfig;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

const BIN: &str = env!("CARGO_BIN_EXE_emgkit");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn emgkit(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("EMGKIT_CONFIG").output().expect("spawn emgkit")
}

fn emgkit_ok(args: &[&str]) {
    let out = emgkit(args);
    assert!(out.status.success(), "emgkit {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

// ---------------------------------------------------------------- 1

fn impulse_dft_db(c: &BiquadCascade, f: f64, rate: f64, h: &[f64]) -> f64 {
    let _ = c;
    let w = 2.0 * PI * f / rate;
    let s: Complex64 = h.iter().enumerate().map(|(n, &v)| Complex64::from_polar(v, -w * n as f64)).sum();
    20.0 * s.norm().log10()
}

fn filter_fidelity() -> Outcome {
    let fs = 250.0;
    let bp = design_bandpass(50.0, 115.0, 4, fs).unwrap();
    let (at50, at115, at76) =
        (bp.magnitude_db_at(50.0, fs), bp.magnitude_db_at(115.0, fs), bp.magnitude_db_at(76.0, fs));
    let corners = (at50 + 3.0).abs() <= 0.3 && (at115 + 3.0).abs() <= 0.3 && at76 >= -0.1;
    let notch_depth = [50.0, 60.0]
        .iter()
        .map(|&f| -design_notch(f, 30.0, fs).unwrap().magnitude_db_at(f, fs))
        .fold(f64::INFINITY, f64::min);

    let chain = FilterConfig::default().preprocessor(&DeviceProfile::sleeve()).unwrap();
    let mut worst: f64 = 0.0;
    for c in [bp.clone(), chain.stages[1].clone(), chain.stages[2].clone(), chain.combined()] {
        let mut x = vec![0.0; 1 << 15];
        x[0] = 1.0;
        let h = c.filter_slice(&x);
        for (f, db) in c.frequency_response(fs, 126) {
            if db > -60.0 {
                worst = worst.max((db - impulse_dft_db(&c, f, fs, &h)).abs());
            }
        }
    }
    outcome(
        corners && notch_depth >= 30.0 && worst < 0.05,
        format!(
            "|H(50)|={at50:.3} dB |H(115)|={at115:.3} dB |H(76)|={at76:.4} dB, min notch depth {notch_depth:.1} dB, TF vs impulse-DFT max diff {worst:.2e} dB"
        ),
    )
}

// ---------------------------------------------------------------- 2

fn naive_features(x: &[f64], rate: f64) -> [f64; 8] {
    let n = x.len() as f64;
    let mav = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let wl: f64 = (1..x.len()).map(|i| (x[i] - x[i - 1]).abs()).sum();
    let signs: Vec<f64> = x.iter().filter(|v| **v != 0.0).map(|v| v.signum()).collect();
    let zc = signs.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    let y: Vec<f64> =
        x.iter().enumerate().map(|(i, v)| (v - mean) * (0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())).collect();
    let half = x.len() / 2;
    let mut power = Vec::with_capacity(half);
    for k in 1..=half {
        let s: Complex64 =
            y.iter().enumerate().map(|(t, &v)| Complex64::from_polar(v, -2.0 * PI * (k * t) as f64 / n)).sum();
        power.push(s.norm_sqr() / n * if 2 * k == x.len() { 1.0 } else { 2.0 });
    }
    let total: f64 = power.iter().sum();
    let freq = |k: usize| (k + 1) as f64 * rate / n;
    let mnf = power.iter().enumerate().map(|(k, p)| freq(k) * p).sum::<f64>() / total;
    let mut acc = 0.0;
    let mut mdf = freq(half - 1);
    for (k, p) in power.iter().enumerate() {
        acc += p;
        if acc >= total / 2.0 {
            mdf = freq(k);
            break;
        }
    }
    [mav, rms, var, wl, zc, mnf, mdf, total]
}

fn feature_parity() -> Outcome {
    let spec = WindowSpec { length: 250, offset: 10 };
    let windows = 10_000;
    let n = spec.length + spec.offset * (windows - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut x = Vec::with_capacity(n);
    while x.len() < n {
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let kind = rng.gen_range(0..3);
        for _ in 0..rng.gen_range(200..900) {
            let v: f64 = match kind {
                0 => StandardNormal.sample(&mut rng),
                1 => rng.gen_range(-2.0f64..2.0).round(),
                _ => rng.gen_range(-1.0..1.0) + 0.3,
            };
            x.push(scale * v);
        }
    }
    x.truncate(n);
    let profile = DeviceProfile::new("t", 250, Units::Microvolts, 1).unwrap();
    let rec = Recording::new(profile, vec![x.clone()], 0.0).unwrap();
    let track = AnnotationTrack::new(vec![Interval::new(0.0, n as f64 / 250.0, Label::Relax)]).unwrap();
    let m = extract(&rec, &track, spec, &ExtractOptions::default()).unwrap();

    let (mut worst_time, mut worst_freq) = (0.0f64, 0.0f64);
    let mut median_mismatch = 0;
    for w in 0..windows {
        let o = naive_features(&x[w * spec.offset..w * spec.offset + spec.length], 250.0);
        let row = m.row(w);
        for j in 0..8 {
            let err = (row[j] - o[j]).abs() / row[j].abs().max(o[j].abs()).max(f64::MIN_POSITIVE);
            if j < 5 {
                worst_time = worst_time.max(err);
            } else if j == 6 {
                median_mismatch += usize::from(row[j] != o[j]);
            } else {
                worst_freq = worst_freq.max(err);
            }
        }
    }
    let mut worst_bin: f64 = 0.0;
    for i in 0..200 {
        let f = 5.0 + i as f64 * 0.575;
        let s: Vec<f64> = (0..250).map(|t| (2.0 * PI * f * t as f64 / 250.0 + 0.3 * i as f64).sin()).collect();
        let ff = freq_features(&s, 250.0, SpectralWindow::Hann);
        worst_bin = worst_bin.max((ff.mean_frequency - f).abs()).max((ff.median_frequency - f).abs());
    }
    outcome(
        worst_time <= 1e-12 && worst_freq <= 1e-9 && median_mismatch == 0 && worst_bin <= 1.0,
        format!(
            "{windows} windows: time-domain max rel err {worst_time:.1e}, frequency-domain {worst_freq:.1e}, MDF mismatches {median_mismatch}; pure-sine MNF/MDF max error {worst_bin:.3} Hz"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn read_ratios(dir: &Path) -> BTreeMap<String, f64> {
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("ratios.json")).unwrap()).unwrap();
    v["conditions"].as_object().unwrap().iter().map(|(k, v)| (k.clone(), v.as_f64().unwrap())).collect()
}

fn ratio_reproduction(root: &Path) -> Outcome {
    let programmed = [("thumb_abduction", 18.4), ("finger_extension", 1.6), ("finger_flexion", 1.5)];
    let strong = preset("healthy_strong").unwrap();
    for (label, value) in programmed {
        let g = &strong.gains[&label.parse::<Label>().unwrap()];
        assert!((g.iter().sum::<f64>() / g.len() as f64 - value).abs() < 1e-9, "preset drifted from {value}");
    }
    let seeds = 100;
    let mut good = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let (s, a) = (root.join(format!("hs{seed}")), root.join(format!("hs{seed}-ratios")));
        emgkit_ok(&["synth", "--scenario", "healthy_strong", "--seed", &seed.to_string(), "--out", p(&s)]);
        emgkit_ok(&["analyze", p(&s), "--out", p(&a)]);
        let r = read_ratios(&a);
        let dev = programmed.iter().map(|(l, v)| (r[*l] / v - 1.0).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        good += usize::from(dev <= 0.10);
    }
    let mut stroke_worst: f64 = 0.0;
    let stroke_seeds = 20;
    for seed in 0..stroke_seeds {
        let (s, a) = (root.join(format!("st{seed}")), root.join(format!("st{seed}-ratios")));
        emgkit_ok(&["synth", "--scenario", "stroke_like", "--seed", &seed.to_string(), "--out", p(&s)]);
        emgkit_ok(&["analyze", p(&s), "--out", p(&a)]);
        stroke_worst = stroke_worst.max((read_ratios(&a)["thumb_abduction"] - 0.8).abs());
    }
    outcome(
        good >= 95 && stroke_worst <= 0.1,
        format!(
            "healthy_strong: {good}/{seeds} seeds within 10% of 18.4/1.6/1.5 (worst {:.1}%); stroke_like thumb |r-0.8| <= {stroke_worst:.3} over {stroke_seeds} seeds",
            worst * 100.0
        ),
    )
}

// ---------------------------------------------------------------- 4

fn invariances() -> Outcome {
    let cfg = PipelineConfig::default();
    let (s, _) = generate(&preset("healthy_weak").unwrap().with_seed(31)).unwrap();
    let env = session_envelope(&s.recording, &cfg).unwrap();
    let gestures = s.protocol.gestures.clone();
    let report = |env: &emg_core::signal::Envelope, track: &AnnotationTrack, gs: &[Label], mode| {
        let groups: Vec<_> = gs.iter().map(|&g| phase_amplitude(env, track, g, 0.5).unwrap()).collect();
        aggregate_report("s", Task::IsolatedMovement, &groups, mode, 1e-9).unwrap()
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let mode = AggregateMode::MeanOfChannelRatios;
    let base = report(&env, &s.annotations, &gestures, mode);

    let mut scale_err: f64 = 0.0;
    for c in [1e-3, 0.5, 7.0, 1e4] {
        let r = report(&env.scaled(c), &s.annotations, &gestures, mode);
        for (l, v) in &base.conditions {
            scale_err = scale_err.max(rel(*v, r.conditions[l]));
        }
    }
    let mut perm_err: f64 = 0.0;
    for perm in [[1, 2, 0], [2, 1, 0], [0, 2, 1]] {
        let r = report(&env.select_channels(&perm), &s.annotations, &gestures, mode);
        for (l, v) in &base.conditions {
            perm_err = perm_err.max(rel(*v, r.conditions[l]));
        }
    }
    let thumb = Label::ThumbAbduction;
    let only_thumb = AnnotationTrack::new(
        s.annotations.intervals().iter().filter(|iv| iv.label == thumb || iv.label == Label::Relax).cloned().collect(),
    )
    .unwrap();
    let swapped = only_thumb.relabelled(|l| if l == thumb { Label::Relax } else { thumb });
    let a = report(&env, &only_thumb, &[thumb], mode);
    let b = report(&env, &swapped, &[thumb], mode);
    let swap_err =
        a.per_channel[&thumb].iter().zip(&b.per_channel[&thumb]).map(|(x, y)| rel(*x, 1.0 / y)).fold(0.0, f64::max);
    let pooled = |r: &emg_core::activity::RatioReport| {
        let am = &r.amplitudes[&thumb];
        am.iter().map(|p| p.active_mean).sum::<f64>() / am.iter().map(|p| p.rest_mean).sum::<f64>()
    };
    let swap_agg_err = rel(pooled(&a), 1.0 / pooled(&b));
    outcome(
        scale_err <= 1e-12 && perm_err <= 1e-12 && swap_err <= 1e-12 && swap_agg_err <= 1e-12,
        format!(
            "scaling max rel change {scale_err:.1e}; permutation {perm_err:.1e}; phase swap r*r' - 1: per-channel {swap_err:.1e}, pooled {swap_agg_err:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- 5

const CLASSES: [Label; 3] = [Label::Relax, Label::HandOpen, Label::HandClose];

fn matrix(rows: Vec<Vec<f64>>, labels: Vec<Label>, source: &str) -> FeatureMatrix {
    let (d, n) = (rows[0].len(), rows.len());
    FeatureMatrix::new((0..d).map(|i| format!("f{i}")).collect(), rows, labels, (0..n).map(|i| i as f64).collect())
        .unwrap()
        .with_source(source)
}

fn gaussians(per_class: usize, sep: f64, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for (k, &l) in CLASSES.iter().enumerate() {
        for _ in 0..per_class {
            rows.push(
                (0..4)
                    .map(|j| {
                        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                            + if j == k { sep } else { 0.0 }
                    })
                    .collect::<Vec<f64>>(),
            );
            labels.push(l);
        }
    }
    matrix(rows, labels, &format!("g{seed}"))
}

fn xor(n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for i in 0..n {
        let (sa, sb) = ([1.0, -1.0][i % 2], [1.0, -1.0][(i / 2) % 2]);
        let a = sa + 0.3 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let b = sb + 0.3 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        rows.push(vec![a, b]);
        labels.push(if (sa > 0.0) == (sb > 0.0) { Label::HandOpen } else { Label::HandClose });
    }
    matrix(rows, labels, &format!("x{seed}"))
}

fn classifier_sanity() -> Outcome {
    let lda_gauss =
        evaluate(&fit_lda(&gaussians(300, 6.0, 1), &LdaParams::default()).unwrap(), &gaussians(300, 6.0, 2))
            .unwrap()
            .accuracy;

    let (xtr, xte) = (xor(2000, 3), xor(2000, 4));
    let rf_xor = evaluate(&fit_rf(&xtr, &RfParams::default(), 5).unwrap(), &xte).unwrap().accuracy;
    let lda_xor = evaluate(&fit_lda(&xtr, &LdaParams::default()).unwrap(), &xte).unwrap().accuracy;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut net = Mlp::init(8, 16, 3, &MlpParams::default(), &mut rng);
    for w in net.weights.iter_mut().filter(|w| **w == 0.0) {
        *w = rng.gen_range(-0.2..0.2);
    }
    let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..8).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let targets: Vec<usize> = (0..20).map(|i| i % 3).collect();
    let (_, grad) = net.loss_and_gradient(&refs, &targets);
    let h = 1e-6;
    let mut grad_err: f64 = 0.0;
    for i in 0..net.weights.len() {
        let mut a = net.clone();
        a.weights[i] += h;
        let mut b = net.clone();
        b.weights[i] -= h;
        let fd = (a.loss_and_gradient(&refs, &targets).0 - b.loss_and_gradient(&refs, &targets).0) / (2.0 * h);
        grad_err = grad_err.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6));
    }

    let shuffle = |m: FeatureMatrix, seed: u64| {
        let mut labels = m.labels.clone();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        matrix(m.iter_rows().map(<[f64]>::to_vec).collect(), labels, &m.source)
    };
    let (str_, ste) = (shuffle(gaussians(400, 3.0, 7), 70), shuffle(gaussians(1000, 3.0, 8), 80));
    let mut chance = Vec::new();
    for kind in ModelKind::ALL {
        let m = fit(kind, &str_, &ModelConfig::default(), 9).unwrap();
        chance.push((kind, evaluate(&m, &ste).unwrap().accuracy));
    }
    let chance_ok = chance.iter().all(|(_, a)| (a - 1.0 / 3.0).abs() <= 0.05);
    let chance_txt: Vec<String> = chance.iter().map(|(k, a)| format!("{k} {a:.3}")).collect();
    outcome(
        lda_gauss >= 0.99 && rf_xor >= 0.95 && (lda_xor - 0.5).abs() <= 0.05 && grad_err < 1e-4 && chance_ok,
        format!(
            "LDA gaussians {lda_gauss:.4}; XOR RF {rf_xor:.4} vs LDA {lda_xor:.4}; MLP gradient max rel err {grad_err:.1e}; shuffled labels (chance 0.333): {}",
            chance_txt.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- 6

fn best_accuracy(root: &Path, scenario: &str, tag: &str) -> (f64, Vec<String>) {
    let (a, b, e) =
        (root.join(format!("{tag}-train")), root.join(format!("{tag}-test")), root.join(format!("{tag}-eval")));
    emgkit_ok(&["synth", "--scenario", scenario, "--seed", "1", "--out", p(&a)]);
    emgkit_ok(&["synth", "--scenario", scenario, "--seed", "2", "--out", p(&b)]);
    emgkit_ok(&["evaluate", "--train", p(&a), "--test", p(&b), "--model", "all", "--out", p(&e)]);
    let mut best: f64 = 0.0;
    let mut txt = Vec::new();
    for k in ["lda", "rf", "mlp"] {
        let v: serde_json::Value =
            serde_json::from_slice(&std::fs::read(e.join(format!("eval-{k}.json"))).unwrap()).unwrap();
        let acc = v["report"]["accuracy"].as_f64().unwrap();
        best = best.max(acc);
        txt.push(format!("{} {acc:.4}", k.to_uppercase()));
    }
    (best, txt)
}

fn end_to_end(root: &Path) -> Outcome {
    let (clean, clean_txt) = best_accuracy(root, "gesture_session", "clean");
    let base = preset("gesture_session").unwrap();
    let noise = 2.0 * base.rest_floor;
    let degraded = base.degraded(0.25, noise);
    let path = root.join("degraded.toml");
    std::fs::write(&path, degraded.to_toml()).unwrap();
    let (worse, worse_txt) = best_accuracy(root, p(&path), "degraded");
    outcome(
        clean >= 0.90 && worse < clean,
        format!(
            "gesture_session train seed 1 / test seed 2: {} (best {clean:.4}); degraded SNR: {} (best {worse:.4})",
            clean_txt.join(", "),
            worse_txt.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- 7

fn digest_tree(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, hex::encode(Sha256::digest(std::fs::read(&path).unwrap())));
            }
        }
    }
    out
}

fn pipeline_run(root: &Path) {
    let d = |n: &str| root.join(n);
    emgkit_ok(&["synth", "--scenario", "gesture_session", "--seed", "11", "--out", p(&d("train"))]);
    emgkit_ok(&["synth", "--scenario", "gesture_session", "--seed", "12", "--out", p(&d("test"))]);
    emgkit_ok(&["synth", "--scenario", "healthy_strong", "--seed", "3", "--out", p(&d("hs"))]);
    emgkit_ok(&[
        "synth",
        "--scenario",
        "gesture_session",
        "--profile",
        "armband",
        "--seed",
        "4",
        "--out",
        p(&d("arm")),
    ]);
    emgkit_ok(&["analyze", p(&d("hs")), "--out", p(&d("analysis"))]);
    emgkit_ok(&["analyze", p(&d("arm")), "--out", p(&d("analysis-arm"))]);
    emgkit_ok(&["features", p(&d("train")), "--out", p(&d("features"))]);
    emgkit_ok(&["train", p(&d("train")), "--model", "all", "--seed", "5", "--out", p(&d("models"))]);
    emgkit_ok(&["evaluate", "--train", p(&d("train")), "--test", p(&d("test")), "--seed", "5", "--out", p(&d("eval"))]);
    emgkit_ok(&[
        "evaluate",
        "--model-file",
        p(&d("models").join("model-rf.json")),
        "--test",
        p(&d("test")),
        "--out",
        p(&d("eval-saved")),
    ]);
    emgkit_ok(&["plot", p(&d("hs")), "--out", p(&d("plot"))]);
    emgkit_ok(&["report", p(&d("analysis")), p(&d("analysis-arm")), p(&d("eval")), "--out", p(&d("report"))]);
}

fn determinism(root: &Path) -> Outcome {
    let (a, b) = (root.join("run-a"), root.join("run-b"));
    pipeline_run(&a);
    pipeline_run(&b);
    let (da, db) = (digest_tree(&a), digest_tree(&b));
    let differing: Vec<&String> = da.keys().filter(|k| db.get(*k) != Some(&da[*k])).collect();
    outcome(
        da.len() == db.len() && differing.is_empty() && da.len() > 30,
        format!(
            "{} output files across synth/analyze/features/train/evaluate/plot/report; {} differ",
            da.len(),
            differing.len()
        ),
    )
}

// ---------------------------------------------------------------- 8

/// Name, replacement recording, replacement annotations.
type Case = (String, Option<Vec<u8>>, Option<Vec<u8>>);

/// Guaranteed-invalid variants of a valid recording and annotation file.
fn fuzz_corpus(rec: &str, ann: &str) -> Vec<Case> {
    let lines: Vec<&str> = rec.lines().collect();
    let rows = lines.len() - 1;
    let mut cases: Vec<Case> = Vec::new();
    let mut add_rec = |name: String, text: Vec<u8>| cases.push((name, Some(text), None));
    let with_line = |i: usize, new: &str| {
        let mut l: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        l[i] = new.to_string();
        (l.join("\n") + "\n").into_bytes()
    };
    let fields = |i: usize| lines[i].split(',').map(str::to_string).collect::<Vec<_>>();

    add_rec("empty file".into(), Vec::new());
    add_rec("header only".into(), format!("{}\n", lines[0]).into_bytes());
    add_rec("comment only".into(), b"# nothing here\n".to_vec());
    add_rec("bad first column".into(), with_line(0, "t,ch1,ch2,ch3"));
    add_rec("missing header".into(), (lines[1..].join("\n") + "\n").into_bytes());
    add_rec("too few header channels".into(), with_line(0, "time,ch1,ch2"));
    add_rec("too many header channels".into(), with_line(0, "time,ch1,ch2,ch3,ch4"));
    add_rec("empty channel name".into(), with_line(0, "time,ch1,,ch3"));
    add_rec("binary garbage".into(), vec![0xff, 0xfe, 0x00, 0x12, 0x80, 0x81]);

    for &row in &[1usize, 2, 3, 250, rows / 2, rows - 1, rows] {
        let f = fields(row);
        let t = &f[0];
        let mut bad = |tag: &str, line: String| add_rec(format!("row {row}: {tag}"), with_line(row, &line));
        bad("NaN", format!("{t},NaN,{},{}", f[2], f[3]));
        bad("inf", format!("{t},{},inf,{}", f[1], f[3]));
        bad("-inf", format!("{t},{},{},-inf", f[1], f[2]));
        bad("overflow", format!("{t},1e999,{},{}", f[2], f[3]));
        bad("word", format!("{t},{},abc,{}", f[1], f[3]));
        bad("empty field", format!("{t},{},,{}", f[1], f[3]));
        bad("extra field", format!("{},0", lines[row]));
        bad("missing field", format!("{t},{},{}", f[1], f[2]));
        bad("truncated", lines[row][..lines[row].len() / 2].trim_end_matches(',').to_string() + ",");
        bad("off-grid time", format!("{},{},{},{}", t.parse::<f64>().unwrap() + 0.003 + 1.0, f[1], f[2], f[3]));
        bad("hex number", format!("{t},0x1F,{},{}", f[2], f[3]));
        let mut utf = with_line(row, &format!("{t},{},{},{}", f[1], f[2], f[3]));
        let pos = utf.len() - 2;
        utf.insert(pos, 0xC3);
        utf.insert(pos, 0xFF);
        add_rec(format!("row {row}: invalid UTF-8"), utf);
    }
    add_rec("duplicated row".into(), {
        let mut l: Vec<&str> = lines.clone();
        l.insert(100, lines[100]);
        (l.join("\n") + "\n").into_bytes()
    });
    add_rec("dropped row".into(), {
        let mut l: Vec<&str> = lines.clone();
        l.remove(500);
        (l.join("\n") + "\n").into_bytes()
    });
    add_rec("recording shorter than annotations".into(), (lines[..2000].join("\n") + "\n").into_bytes());

    let alines: Vec<&str> = ann.lines().collect();
    let mut add_ann =
        |name: &str, text: String| cases.push((format!("annotations: {name}"), None, Some(text.into_bytes())));
    let replace = |i: usize, new: &str| {
        let mut l: Vec<String> = alines.iter().map(|s| s.to_string()).collect();
        l[i] = new.to_string();
        l.join("\n") + "\n"
    };
    add_ann("empty file", String::new());
    add_ann("header only", format!("{}\n", alines[0]));
    add_ann("bad header", replace(0, "begin,end,label"));
    add_ann("unknown label", replace(1, "2,7,wave"));
    add_ann("overlap", replace(2, "6,12,relax"));
    add_ann("reversed interval", replace(1, "7,2,thumb_abduction"));
    add_ann("empty interval", replace(1, "2,2,thumb_abduction"));
    add_ann("NaN start", replace(1, "NaN,7,thumb_abduction"));
    add_ann("inf end", replace(1, "2,inf,thumb_abduction"));
    add_ann("extra field", replace(1, "2,7,thumb_abduction,x"));
    add_ann("missing field", replace(1, "2,7"));
    add_ann("word time", replace(1, "two,7,thumb_abduction"));
    add_ann("past recording end", format!("{}\n1000,1005,thumb_abduction\n", ann.trim_end()));
    add_ann("before recording start", replace(1, "-3,7,thumb_abduction"));
    add_ann("unsorted", {
        let mut l: Vec<&str> = alines.clone();
        l.swap(1, 3);
        l.join("\n") + "\n"
    });
    add_ann(
        "no relax intervals",
        alines.iter().filter(|l| !l.ends_with("relax")).copied().collect::<Vec<_>>().join("\n") + "\n",
    );
    cases
}

fn robustness(root: &Path) -> Outcome {
    let base = root.join("fuzz-base");
    emgkit_ok(&["synth", "--scenario", "stroke_like", "--seed", "1", "--out", p(&base)]);
    let rec = std::fs::read_to_string(base.join("recording.csv")).unwrap();
    let ann = std::fs::read_to_string(base.join("annotations.csv")).unwrap();
    let cases = fuzz_corpus(&rec, &ann);
    let mut failures = Vec::new();
    for (i, (name, r, a)) in cases.iter().enumerate() {
        let dir = root.join(format!("fuzz-{i}"));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::copy(base.join("session.toml"), dir.join("session.toml")).unwrap();
        std::fs::write(dir.join("recording.csv"), r.clone().unwrap_or_else(|| rec.clone().into_bytes())).unwrap();
        std::fs::write(dir.join("annotations.csv"), a.clone().unwrap_or_else(|| ann.clone().into_bytes())).unwrap();
        let out = emgkit(&["analyze", p(&dir), "--out", p(&dir.join("out"))]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        let code = out.status.code();
        let structured = stderr.starts_with("error: ") && stderr.trim().len() > "error: ".len();
        if !(matches!(code, Some(1) | Some(2)) && structured && !stderr.contains("panicked")) {
            failures.push(format!("{name}: exit {code:?}, stderr {stderr:?}"));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} malformed cases: all exited nonzero with an `error:` diagnostic, no panics", cases.len())
    } else {
        format!("{}/{} cases misbehaved, first: {}", failures.len(), cases.len(), failures[0])
    };
    outcome(cases.len() >= 100 && failures.is_empty(), detail)
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let root: PathBuf = tmp.path().to_path_buf();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        ("filter fidelity", Some(Duration::from_secs(5)), Box::new(filter_fidelity)),
        ("feature parity", Some(Duration::from_secs(30)), Box::new(feature_parity)),
        ("ratio-pipeline reproduction", Some(Duration::from_secs(120)), Box::new(|| ratio_reproduction(&root))),
        ("scale/permutation/phase-swap invariances", None, Box::new(invariances)),
        ("classifier sanity", Some(Duration::from_secs(120)), Box::new(classifier_sanity)),
        ("end-to-end classification", Some(Duration::from_secs(300)), Box::new(|| end_to_end(&root))),
        ("determinism", None, Box::new(|| determinism(&root))),
        ("robustness", None, Box::new(|| robustness(&root))),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        let elapsed = t.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        let budget = limit.map_or(String::new(), |l| format!(" / limit {}s", l.as_secs()));
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s{budget})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
