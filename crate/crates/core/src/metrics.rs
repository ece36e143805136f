//! Reconstruction quality: PSNR and mean SSIM on the `[0, 255]` scale.

use crate::error::{Error, Result};
use crate::image::Image;

const PEAK: f64 = 255.0;
const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricPair {
    pub psnr: f64,
    pub ssim: f64,
}

impl MetricPair {
    pub fn compute(u: &Image, reference: &Image) -> Result<Self> {
        Ok(Self {
            psnr: psnr(u, reference)?,
            ssim: ssim(u, reference)?,
        })
    }
}

/// `10 log10(255² / MSE)`; `+∞` for identical images.
pub fn psnr(u: &Image, reference: &Image) -> Result<f64> {
    u.ensure_same_shape(reference)?;
    let mse = u
        .data()
        .iter()
        .zip(reference.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / u.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

fn gaussian_window() -> Vec<f64> {
    let r = (WINDOW / 2) as f64;
    let w: Vec<f64> = (0..WINDOW)
        .map(|i| (-(i as f64 - r).powi(2) / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Local statistics of one window position.
struct Moments {
    mu_x: f64,
    mu_y: f64,
    var_x: f64,
    var_y: f64,
    cov: f64,
}

fn local_moments(u: &Image, reference: &Image) -> Vec<Moments> {
    let win = gaussian_window();
    let (w, h) = u.shape();
    let (a, b) = (u.data(), reference.data());
    let mut out = Vec::with_capacity((w - WINDOW + 1) * (h - WINDOW + 1));
    for y0 in 0..=h - WINDOW {
        for x0 in 0..=w - WINDOW {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (j, wy) in win.iter().enumerate() {
                let row = (y0 + j) * w + x0;
                for (i, wx) in win.iter().enumerate() {
                    let wt = wx * wy;
                    let (p, q) = (a[row + i], b[row + i]);
                    sx += wt * p;
                    sy += wt * q;
                    sxx += wt * p * p;
                    syy += wt * q * q;
                    sxy += wt * p * q;
                }
            }
            out.push(Moments {
                mu_x: sx,
                mu_y: sy,
                var_x: sxx - sx * sx,
                var_y: syy - sy * sy,
                cov: sxy - sx * sy,
            });
        }
    }
    out
}

fn check_window(u: &Image, reference: &Image) -> Result<()> {
    u.ensure_same_shape(reference)?;
    if u.width() < WINDOW || u.height() < WINDOW {
        return Err(Error::ImageTooSmall {
            width: u.width(),
            height: u.height(),
            window: WINDOW,
        });
    }
    Ok(())
}

/// Mean SSIM over all 11×11 Gaussian windows (σ = 1.5) lying inside the image,
/// with `K1 = 0.01`, `K2 = 0.03`, `L = 255`.
pub fn ssim(u: &Image, reference: &Image) -> Result<f64> {
    check_window(u, reference)?;
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let moments = local_moments(u, reference);
    let total: f64 = moments
        .iter()
        .map(|m| {
            ((2.0 * m.mu_x * m.mu_y + c1) * (2.0 * m.cov + c2))
                / ((m.mu_x * m.mu_x + m.mu_y * m.mu_y + c1) * (m.var_x + m.var_y + c2))
        })
        .sum();
    Ok(total / moments.len() as f64)
}

/// Mean of the contrast-structure factor `(2σ_xy + C2) / (σ_x² + σ_y² + C2)`,
/// the part of SSIM that ignores local means.
pub fn contrast_structure(u: &Image, reference: &Image) -> Result<f64> {
    check_window(u, reference)?;
    let c2 = (K2 * PEAK).powi(2);
    let moments = local_moments(u, reference);
    let total: f64 = moments
        .iter()
        .map(|m| (2.0 * m.cov + c2) / (m.var_x + m.var_y + c2))
        .sum();
    Ok(total / moments.len() as f64)
}
