//! Deterministic synthetic test images and 1D signals.

use crate::error::Result;
use crate::image::Image;

pub const DARK: f64 = 64.0;
pub const BRIGHT: f64 = 192.0;

/// `n × n` image: a centred bright square of side `n/2` on a dark background.
pub fn two_region_image(n: usize) -> Image {
    let (lo, hi) = (n / 4, n / 4 + n / 2);
    Image::from_fn(n, n, |x, y| {
        if (lo..hi).contains(&x) && (lo..hi).contains(&y) {
            BRIGHT
        } else {
            DARK
        }
    })
}

/// Staircase `u(i) = i/k`, `i = 0..=k`, on `[0, 1]` with spacing `1/k`.
pub fn staircase(k: usize) -> Result<Image> {
    let k = k.max(1);
    Image::from_signal((0..=k).map(|i| i as f64 / k as f64).collect())?.with_spacing(1.0 / k as f64)
}

/// Unit step on `[-1, 1]` smeared linearly over `[-1/k, 1/k]`, sampled at spacing `h`.
pub fn smeared_step(k: f64, h: f64) -> Result<Image> {
    let n = (2.0 / h).round() as usize;
    Image::from_signal(
        (0..=n)
            .map(|i| {
                let x = -1.0 + i as f64 * h;
                (0.5 + 0.5 * k * x).clamp(0.0, 1.0)
            })
            .collect(),
    )?
    .with_spacing(h)
}

/// Unit step smeared over `cells` grid cells of width `w / cells`, with flat
/// margins of `cells` cells on each side.
pub fn ramp_step(w: f64, cells: usize) -> Result<Image> {
    let n = 3 * cells + 1;
    Image::from_signal(
        (0..n)
            .map(|i| ((i as f64 - cells as f64) / cells as f64).clamp(0.0, 1.0))
            .collect(),
    )?
    .with_spacing(w / cells as f64)
}

/// Indicator of `d` consecutive samples in the middle of an `n`-sample signal,
/// so the derivative is a `+1/-1` pair of unit masses `d` cells apart.
pub fn spike_pair(n: usize, d: usize, h: f64) -> Result<Image> {
    let start = n.saturating_sub(d) / 2;
    Image::from_signal(
        (0..n)
            .map(|i| if i >= start && i < start + d { 1.0 } else { 0.0 })
            .collect(),
    )?
    .with_spacing(h)
}

/// Unit step in the middle of an `n`-sample signal: a single unit mass.
pub fn single_spike(n: usize, h: f64) -> Result<Image> {
    Image::from_signal((0..n).map(|i| if i >= n / 2 { 1.0 } else { 0.0 }).collect())?.with_spacing(h)
}

/// Isotropic Gaussian bump of the given amplitude and width (in pixels).
pub fn gaussian_blob(n: usize, amplitude: f64, width: f64) -> Image {
    let c = (n as f64 - 1.0) / 2.0;
    Image::from_fn(n, n, |x, y| {
        let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2);
        amplitude * (-r2 / (2.0 * width * width)).exp()
    })
}
