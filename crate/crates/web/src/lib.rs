//! Browser bindings for `tvphi`: integrand curves, a synthetic denoising run
//! and the ramp/step limit traces. The plain-Rust functions back the exported
//! wrappers and are tested natively.

use tvphi::demos::{demo_ramp_blowup, demo_step_vanishing};
use tvphi::synthetic::two_region_image;
use tvphi::{add_gaussian_noise, denoise, psnr, ssim, Cutoff, PhiSpec, SolverConfig};
use wasm_bindgen::prelude::*;

/// `t`, `t^q` and `φ_{M,q}(t)` on `n` points of `[0, t_max]`, concatenated.
pub fn phi_curves_native(q: f64, cutoff: f64, t_max: f64, n: usize) -> tvphi::Result<Vec<f64>> {
    let power = PhiSpec::power(q)?;
    let lin = PhiSpec::linearized(q, cutoff)?;
    let ts: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n.max(2) - 1) as f64).collect();
    let mut out = ts.clone();
    out.extend(ts.iter().map(|&t| power.value(t)));
    out.extend(ts.iter().map(|&t| lin.value(t)));
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DenoiseOutput {
    pub size: usize,
    pub clean: Vec<u8>,
    pub noisy: Vec<u8>,
    pub denoised: Vec<u8>,
    /// PSNR and SSIM of the noisy and the denoised image.
    pub metrics: [f64; 4],
    pub iterations: usize,
}

fn to_gray(values: &[f64]) -> Vec<u8> {
    values.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect()
}

pub fn denoise_native(
    size: usize,
    sigma: f64,
    seed: u64,
    q: f64,
    cutoff: Option<f64>,
    alpha_infty: f64,
) -> tvphi::Result<DenoiseOutput> {
    let clean = two_region_image(size);
    let noisy = add_gaussian_noise(&clean, sigma, seed)?;
    let cutoff = cutoff.map_or(Cutoff::Infinite, Cutoff::Finite);
    let mut cfg = SolverConfig::new(q, cutoff, alpha_infty);
    cfg.noise_variance = (sigma * sigma).max(1.0);
    let (u, report) = denoise(&noisy, &cfg)?;
    Ok(DenoiseOutput {
        size,
        clean: to_gray(clean.data()),
        noisy: to_gray(noisy.data()),
        denoised: to_gray(u.data()),
        metrics: [
            psnr(&noisy, &clean)?,
            ssim(&noisy, &clean)?,
            psnr(&u, &clean)?,
            ssim(&u, &clean)?,
        ],
        iterations: report.iterations,
    })
}

/// Ramp `(k, TV, k^{1-q})` rows followed by step `(k, TV, (2/k)^{1-q})` rows.
pub fn limit_traces_native(q: f64) -> tvphi::Result<Vec<f64>> {
    let ramp = demo_ramp_blowup(q, &[1, 2, 4, 8, 16, 32, 64, 128, 256])?;
    let step = demo_step_vanishing(q, &[2, 4, 8, 16, 32, 64, 128], 1.0 / 1024.0)?;
    Ok(ramp
        .rows
        .iter()
        .chain(&step.rows)
        .flat_map(|r| [r.param, r.measured, r.analytic])
        .collect())
}

fn js(e: tvphi::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn phi_curves(q: f64, cutoff: f64, t_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    phi_curves_native(q, cutoff, t_max, n).map_err(js)
}

#[wasm_bindgen]
pub struct DenoiseResult(DenoiseOutput);

#[wasm_bindgen]
impl DenoiseResult {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.0.size
    }

    #[wasm_bindgen(getter)]
    pub fn clean(&self) -> Vec<u8> {
        self.0.clean.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn noisy(&self) -> Vec<u8> {
        self.0.noisy.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn denoised(&self) -> Vec<u8> {
        self.0.denoised.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn metrics(&self) -> Vec<f64> {
        self.0.metrics.to_vec()
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.0.iterations
    }
}

/// A negative `cutoff` selects the pure power integrand.
#[wasm_bindgen]
pub fn denoise_two_region(
    size: usize,
    sigma: f64,
    seed: u32,
    q: f64,
    cutoff: f64,
    alpha_infty: f64,
) -> Result<DenoiseResult, JsError> {
    let cutoff = (cutoff >= 0.0).then_some(cutoff);
    denoise_native(size, sigma, seed as u64, q, cutoff, alpha_infty)
        .map(DenoiseResult)
        .map_err(js)
}

#[wasm_bindgen]
pub fn limit_traces(q: f64) -> Result<Vec<f64>, JsError> {
    limit_traces_native(q).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_layout() {
        let v = phi_curves_native(0.5, 4.0, 16.0, 5).unwrap();
        assert_eq!(v.len(), 15);
        assert_eq!(&v[..5], &[0.0, 4.0, 8.0, 12.0, 16.0]);
        assert_eq!(v[5 + 1], 2.0);
        assert_eq!(v[10 + 1], 2.0);
        assert!((v[10 + 4] - (0.5 * 2.0 + 0.25 * 16.0)).abs() < 1e-12);
        assert!(phi_curves_native(-1.0, 4.0, 1.0, 3).is_err());
    }

    #[test]
    fn denoising_improves_psnr() {
        let out = denoise_native(32, 20.0, 3, 0.5, Some(10.0), 0.0253).unwrap();
        assert_eq!(out.denoised.len(), 32 * 32);
        assert!(out.metrics[2] > out.metrics[0]);
        let power = denoise_native(32, 20.0, 3, 0.5, None, 0.0253).unwrap();
        assert_eq!(power.noisy, out.noisy);
    }

    #[test]
    fn traces_match_analytic_values() {
        let v = limit_traces_native(0.5).unwrap();
        assert_eq!(v.len(), 3 * (9 + 7));
        for row in v.chunks(3) {
            assert!((row[1] - row[2]).abs() <= 0.01 * row[2]);
        }
    }
}
