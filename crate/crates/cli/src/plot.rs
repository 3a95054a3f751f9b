//! Static SVG of per-channel envelopes with movement phases shaded grey.

use emg_core::session::{AnnotationTrack, Label};
use emg_core::signal::Envelope;
use std::fmt::Write as _;

const WIDTH: f64 = 960.0;
const PANEL: f64 = 150.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 40.0;
const MAX_POINTS: usize = 2400;

/// Min/max pairs per bucket so short bursts survive decimation.
fn decimate(x: &[f64]) -> Vec<(usize, f64)> {
    if x.len() <= MAX_POINTS {
        return x.iter().copied().enumerate().collect();
    }
    let bucket = x.len().div_ceil(MAX_POINTS / 2);
    let mut out = Vec::with_capacity(MAX_POINTS + 2);
    for (b, chunk) in x.chunks(bucket).enumerate() {
        let base = b * bucket;
        let (mut lo, mut hi) = (0, 0);
        for (i, v) in chunk.iter().enumerate() {
            if *v < chunk[lo] {
                lo = i;
            }
            if *v > chunk[hi] {
                hi = i;
            }
        }
        let (a, c) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push((base + a, chunk[a]));
        if c != a {
            out.push((base + c, chunk[c]));
        }
    }
    out
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

pub fn envelope_svg(env: &Envelope, track: &AnnotationTrack, title: &str) -> String {
    let rec = env.as_recording();
    let rate = rec.profile().rate();
    let t0 = rec.start_time();
    let duration = (rec.len().max(2) - 1) as f64 / rate;
    let units = rec.profile().units.symbol();
    let n = rec.channel_count();
    let height = TOP + n as f64 * PANEL + BOTTOM;
    let plot_w = WIDTH - LEFT - RIGHT;
    let x_of = |t: f64| LEFT + (t - t0) / duration * plot_w;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#, escape(title));

    for (c, (name, ch)) in rec.channel_names().iter().zip(rec.channels()).enumerate() {
        let y0 = TOP + c as f64 * PANEL;
        let (top, bottom) = (y0 + 8.0, y0 + PANEL - 12.0);
        let ymax = ch.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let y_of = |v: f64| bottom - v / ymax * (bottom - top);

        for iv in track.intervals().iter().filter(|iv| iv.label != Label::Relax) {
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#d0d0d0"><title>{}</title></rect>"##,
                x_of(iv.start),
                (x_of(iv.end) - x_of(iv.start)).max(0.0),
                bottom - top,
                iv.label
            );
        }
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{bottom:.2}" x2="{:.2}" y2="{bottom:.2}" stroke="black"/><line x1="{LEFT}" y1="{top:.2}" x2="{LEFT}" y2="{bottom:.2}" stroke="black"/>"#,
            WIDTH - RIGHT
        );
        let step = nice_step(ymax, 3);
        let mut v = 0.0;
        while v <= ymax * 1.0001 {
            let y = y_of(v);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 4.0,
                LEFT - 6.0,
                y + 4.0,
                trim_number(v)
            );
            v += step;
        }
        let _ = writeln!(
            s,
            r#"<text transform="translate(14 {:.2}) rotate(-90)" text-anchor="middle">{} ({units})</text>"#,
            (top + bottom) / 2.0,
            escape(name)
        );
        let points: Vec<String> = decimate(ch)
            .into_iter()
            .map(|(i, v)| format!("{:.2},{:.2}", x_of(t0 + i as f64 / rate), y_of(v)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="0.8" points="{}"/>"##,
            points.join(" ")
        );
    }

    let axis_y = TOP + n as f64 * PANEL - 12.0;
    let step = nice_step(duration, 10);
    let mut t = 0.0;
    while t <= duration + 1e-9 {
        let x = x_of(t0 + t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{axis_y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            axis_y + 4.0,
            axis_y + 16.0,
            trim_number(t0 + t)
        );
        t += step;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Time (s)</text>"#,
        LEFT + plot_w / 2.0,
        axis_y + 32.0
    );
    s.push_str("</svg>\n");
    s
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
