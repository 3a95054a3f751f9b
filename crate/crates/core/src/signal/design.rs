use super::{Biquad, BiquadCascade, FilterError};
use num_complex::Complex64;
use std::f64::consts::PI;

const MAX_ORDER: usize = 8;

/// Left-half-plane Butterworth prototype poles for a unit cutoff.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    let n = order as f64;
    (0..order).map(|k| Complex64::from_polar(1.0, PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n))).collect()
}

fn bilinear(s: Complex64, fs2: f64) -> Complex64 {
    (fs2 + s) / (fs2 - s)
}

fn prewarp(freq: f64, rate: f64) -> f64 {
    2.0 * rate * (PI * freq / rate).tan()
}

fn check_corner(freq: f64, rate: f64, what: &str) -> Result<(), FilterError> {
    if !(freq.is_finite() && rate.is_finite() && rate > 0.0) {
        return Err(FilterError::DesignInfeasible(format!("{what} {freq} Hz at rate {rate} Hz")));
    }
    if freq <= 0.0 || freq >= rate / 2.0 {
        return Err(FilterError::DesignInfeasible(format!(
            "{what} {freq} Hz must lie strictly between 0 and Nyquist ({} Hz)",
            rate / 2.0
        )));
    }
    Ok(())
}

/// Conjugate-pair section with unit gain at `omega_ref`.
fn pair_section(pole: Complex64, b: [f64; 3], omega_ref: f64) -> Biquad {
    let raw = Biquad { b0: b[0], b1: b[1], b2: b[2], a1: -2.0 * pole.re, a2: pole.norm_sqr() };
    raw.scaled(1.0 / raw.response(omega_ref).norm())
}

fn sort_sections(sections: &mut [Biquad]) {
    // Ascending pole radius; ties broken by pole angle.
    sections.sort_by(|x, y| {
        let key = |s: &Biquad| {
            let p = s.poles()[0];
            (p.norm(), p.arg().abs())
        };
        key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Butterworth bandpass. `order` is the low-pass prototype order, so the
/// result has `2 * order` poles spread over `order` sections.
pub fn design_bandpass(low: f64, high: f64, order: usize, rate: f64) -> Result<BiquadCascade, FilterError> {
    if order == 0 || !order.is_multiple_of(2) || order > MAX_ORDER {
        return Err(FilterError::InvalidOrder(order));
    }
    check_corner(low, rate, "low corner")?;
    check_corner(high, rate, "high corner")?;
    if low >= high {
        return Err(FilterError::DesignInfeasible(format!("low corner {low} Hz must be below high corner {high} Hz")));
    }

    let fs2 = 2.0 * rate;
    let (wl, wh) = (prewarp(low, rate), prewarp(high, rate));
    let bw = wh - wl;
    let w0_sq = wl * wh;
    let omega_center = 2.0 * (w0_sq.sqrt() / fs2).atan();

    let mut upper: Vec<Complex64> = Vec::with_capacity(order);
    for p in prototype_poles(order) {
        let pb = p * bw;
        let root = (pb * pb - 4.0 * w0_sq).sqrt();
        for s in [(pb + root) / 2.0, (pb - root) / 2.0] {
            let z = bilinear(s, fs2);
            if z.im > 0.0 {
                upper.push(z);
            }
        }
    }
    debug_assert_eq!(upper.len(), order);

    let mut sections: Vec<Biquad> =
        upper.into_iter().map(|z| pair_section(z, [1.0, 0.0, -1.0], omega_center)).collect();
    sort_sections(&mut sections);
    Ok(BiquadCascade { sections, design_descriptor: format!("butter{order}-bp-{low}-{high}@{rate}") })
}

/// Butterworth low-pass with unity DC gain. Odd orders get one first-order
/// section (stored as a biquad with `b2 = a2 = 0`).
pub fn design_lowpass(cutoff: f64, order: usize, rate: f64) -> Result<BiquadCascade, FilterError> {
    if order == 0 || order > MAX_ORDER {
        return Err(FilterError::InvalidOrder(order));
    }
    check_corner(cutoff, rate, "cutoff")?;

    let fs2 = 2.0 * rate;
    let wc = prewarp(cutoff, rate);
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for p in prototype_poles(order) {
        let z = bilinear(p * wc, fs2);
        if z.im > 1e-12 {
            sections.push(pair_section(z, [1.0, 2.0, 1.0], 0.0));
        } else if z.im.abs() <= 1e-12 {
            let raw = Biquad { b0: 1.0, b1: 1.0, b2: 0.0, a1: -z.re, a2: 0.0 };
            sections.push(raw.scaled(1.0 / raw.response(0.0).norm()));
        }
    }
    sort_sections(&mut sections);
    Ok(BiquadCascade { sections, design_descriptor: format!("butter{order}-lp-{cutoff}@{rate}") })
}

/// Second-order IIR notch (zeros on the unit circle at `center`), -3 dB
/// bandwidth `center / q`.
pub fn design_notch(center: f64, q: f64, rate: f64) -> Result<BiquadCascade, FilterError> {
    check_corner(center, rate, "notch center")?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(FilterError::DesignInfeasible(format!("quality factor {q} must be positive")));
    }
    let w0 = 2.0 * PI * center / rate;
    let alpha = w0.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    let c = -2.0 * w0.cos();
    let section = Biquad { b0: 1.0 / a0, b1: c / a0, b2: 1.0 / a0, a1: c / a0, a2: (1.0 - alpha) / a0 };
    Ok(BiquadCascade { sections: vec![section], design_descriptor: format!("notch-{center}-q{q}@{rate}") })
}
