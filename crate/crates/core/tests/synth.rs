use emg_core::features::{SpectralEstimator, SpectralWindow};
use emg_core::session::Label;
use emg_core::synth::{generate, plateau_ranges, pooled_rms, preset, SynthScenario};

/// Activity component only: no sensor noise, powerline, drift or artifacts.
fn clean(name: &str) -> SynthScenario {
    let mut s = preset(name).unwrap();
    s.powerline.clear();
    s.drift = None;
    s.artifact_amplitude = 0.0;
    s.sensor_noise = 0.0;
    s
}

#[test]
fn plateau_rms_matches_programmed_levels() {
    let scenario = clean("healthy_strong");
    let seeds = 20;
    let mut sums = std::collections::BTreeMap::<(Label, usize), f64>::new();
    for seed in 0..seeds {
        let (session, truth) = generate(&scenario.clone().with_seed(seed)).unwrap();
        let rec = &session.recording;
        for (&label, programmed) in &truth.programmed_rms {
            let ranges = plateau_ranges(&truth.annotations, label, rec.profile().rate(), rec.len());
            assert!(!ranges.is_empty());
            for (c, ch) in rec.channels().iter().enumerate() {
                let measured = pooled_rms(ch, &ranges);
                assert!((measured / programmed[c] - 1.0).abs() < 0.06, "seed {seed} {label} ch{c}: {measured}");
                *sums.entry((label, c)).or_default() += measured / programmed[c];
            }
        }
    }
    for ((label, c), s) in sums {
        let mean = s / seeds as f64;
        assert!((mean - 1.0).abs() < 0.015, "{label} ch{c}: mean ratio {mean}");
    }
}

#[test]
fn activity_power_sits_in_the_emg_band() {
    let (session, _) = generate(&clean("gesture_session").with_seed(4)).unwrap();
    let est = SpectralEstimator::new(1000, 250.0, SpectralWindow::Hann);
    let ch = &session.recording.channels()[0];
    let (mut low, mut total) = (0.0, 0.0);
    for w in ch.chunks_exact(1000) {
        for (f, p) in est.power_spectrum(w) {
            total += p;
            if f < 15.0 {
                low += p;
            }
        }
    }
    assert!(low / total < 0.02, "{}", low / total);
}

#[test]
fn generation_is_a_pure_function_of_the_scenario() {
    let s = preset("gesture_session").unwrap().with_seed(77);
    let (a, ta) = generate(&s).unwrap();
    let reloaded = SynthScenario::from_toml(&s.to_toml()).unwrap();
    let (b, tb) = generate(&reloaded).unwrap();
    assert_eq!(ta, tb);
    for (x, y) in a.recording.channels().iter().zip(b.recording.channels()) {
        assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn transition_artifacts_stay_near_movement_edges() {
    let base = clean("healthy_weak").with_seed(6);
    let mut with = base.clone();
    with.artifact_amplitude = 50.0;
    with.transition_artifacts = true;
    let (a, truth) = generate(&base).unwrap();
    let (b, _) = generate(&with).unwrap();
    let rate = 250.0;
    let edges: Vec<f64> = truth
        .annotations
        .intervals()
        .iter()
        .filter(|iv| iv.label != Label::Relax)
        .flat_map(|iv| [iv.start, iv.end])
        .collect();
    let mut touched = 0;
    for (x, y) in a.recording.channels().iter().zip(b.recording.channels()) {
        for (i, (p, q)) in x.iter().zip(y).enumerate() {
            if p != q {
                touched += 1;
                let t = i as f64 / rate;
                assert!(edges.iter().any(|e| (t - e).abs() <= 0.16), "change at {t}");
            }
        }
    }
    assert!(touched > 0);
}

#[test]
fn lead_in_and_tail_extend_the_recording() {
    let s = preset("stroke_like").unwrap();
    let (session, truth) = generate(&s).unwrap();
    assert_eq!(truth.annotations.intervals()[0].start, s.lead_in);
    let expected = ((s.lead_in + s.protocol.duration() + s.tail) * 250.0).round() as usize;
    assert_eq!(session.recording.len(), expected);
}
