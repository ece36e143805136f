//! Multiscale analysis functional `η` on lifted gradients.
//!
//! Each level compares the area of the lifted gradient `DU = (1, ∇u)` with the
//! area of its mollification. The gradient field is zero-extended and every
//! sum runs over the grid enlarged by the kernel radius, so the discrete sums
//! are the exact integrals over the whole plane of the extended field.
//!
//! Mollifiers are discrete Gaussians `e^{-t} I_n(t)` with `t = ε²`. They form
//! an exact semigroup under convolution (variances add), which makes the
//! level sequence nested; truncation at `⌈4ε⌉ + 2` taps is the only defect.

use crate::error::{Error, Result};
use crate::image::{convolve_plane, convolve_plane_adjoint, divergence, gradient, GradientField, Image, Kernel};

/// Dyadic family of discrete Gaussian mollifiers with weight `η_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifierFamily {
    scales: Vec<f64>,
    eta0: f64,
    taps: Vec<Vec<f64>>,
}

impl MollifierFamily {
    /// Scales `ε_ℓ = ε_1 2^{-(ℓ-1)}` for `ℓ = 1..=levels`.
    pub fn dyadic(eps1: f64, levels: usize, eta0: f64) -> Result<Self> {
        let scales = (0..levels).map(|l| eps1 * 0.5f64.powi(l as i32)).collect();
        Self::from_scales(scales, eta0)
    }

    /// Arbitrary strictly decreasing scales.
    pub fn from_scales(scales: Vec<f64>, eta0: f64) -> Result<Self> {
        if scales.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::Config("mollifier scales must be strictly decreasing".into()));
        }
        Self::from_scales_unchecked(scales, eta0)
    }

    /// Like [`from_scales`](Self::from_scales) without the ordering check;
    /// only useful for constructing non-nested counterexamples.
    pub fn from_scales_unchecked(scales: Vec<f64>, eta0: f64) -> Result<Self> {
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config("mollifier scales must be positive".into()));
        }
        if !(eta0.is_finite() && eta0 >= 0.0) {
            return Err(Error::Domain {
                what: "eta0",
                value: eta0,
            });
        }
        let taps = scales.iter().map(|&e| discrete_gaussian(e)).collect();
        Ok(Self { scales, eta0, taps })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn levels(&self) -> usize {
        self.scales.len()
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn with_eta0(&self, eta0: f64) -> Result<Self> {
        Self::from_scales_unchecked(self.scales.clone(), eta0)
    }

    pub fn is_nested(&self) -> bool {
        self.scales.windows(2).all(|p| p[1] < p[0])
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level == 0 || level > self.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                max: self.levels(),
            });
        }
        Ok(())
    }

    /// One-dimensional taps of level `level` (1-based).
    pub fn taps(&self, level: usize) -> Result<&[f64]> {
        self.check_level(level)?;
        Ok(&self.taps[level - 1])
    }

    /// Kernel of level `level` for a grid of dimension `dim`.
    pub fn kernel(&self, level: usize, dim: u32) -> Result<Kernel> {
        let taps = self.taps(level)?.to_vec();
        kernel_from_taps(taps, dim)
    }

    /// Kernel at an arbitrary scale, built the same way as the levels.
    pub fn kernel_at(&self, eps: f64, dim: u32) -> Result<Kernel> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Domain {
                what: "mollifier scale",
                value: eps,
            });
        }
        kernel_from_taps(discrete_gaussian(eps), dim)
    }

    /// `‖ρ_{√(a²+b²)} - ρ_a * ρ_b‖_1` for the 2D kernels.
    pub fn semigroup_defect(a: f64, b: f64) -> f64 {
        let ta = discrete_gaussian(a);
        let tb = discrete_gaussian(b);
        let composed = convolve_taps(&ta, &tb);
        let direct = discrete_gaussian(a.hypot(b));
        let n = composed.len().max(direct.len());
        let pad = |v: &[f64]| {
            let off = (n - v.len()) / 2;
            let mut out = vec![0.0; n];
            out[off..off + v.len()].copy_from_slice(v);
            out
        };
        let (c, d) = (pad(&composed), pad(&direct));
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += (c[i] * c[j] - d[i] * d[j]).abs();
            }
        }
        total
    }
}

fn kernel_from_taps(taps: Vec<f64>, dim: u32) -> Result<Kernel> {
    if dim == 1 {
        Kernel::separable(taps, vec![1.0])
    } else {
        Kernel::separable(taps.clone(), taps)
    }
}

fn convolve_taps(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Tap radius `⌈4ε⌉ + 2` of [`discrete_gaussian`].
pub fn gaussian_radius(eps: f64) -> usize {
    (4.0 * eps).ceil() as usize + 2
}

/// `e^{-t} I_n(t)` for `t = ε²`, `|n| <= ⌈4ε⌉ + 2`, renormalized to sum 1.
pub fn discrete_gaussian(eps: f64) -> Vec<f64> {
    let t = eps * eps;
    let radius = gaussian_radius(eps);
    let half: Vec<f64> = (0..=radius).map(|n| scaled_bessel_i(n, t)).collect();
    let mut taps: Vec<f64> = half.iter().rev().chain(half.iter().skip(1)).copied().collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|v| *v /= sum);
    taps
}

/// `e^{-t} I_n(t)` by its power series `Σ_k (t/2)^{2k+n} / (k! (k+n)!)`.
fn scaled_bessel_i(n: usize, t: f64) -> f64 {
    if t == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * t;
    let log_fact: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
    let mut term = (n as f64 * half.ln() - log_fact - t).exp();
    let mut sum = term;
    let mut k = 0usize;
    while k < 100_000 {
        k += 1;
        term *= half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if k as f64 > half && term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Discrete lifted gradient `DU = (1, ∇_h u)` per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedGradient {
    width: usize,
    height: usize,
    spacing: f64,
    cells: Vec<[f64; 3]>,
}

impl LiftedGradient {
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> &[[f64; 3]] {
        &self.cells
    }

    pub fn norm_at(&self, i: usize) -> f64 {
        let [a, b, c] = self.cells[i];
        (a * a + b * b + c * c).sqrt()
    }

    /// `Σ_k h^m |DU(k)|`, the total mass of the lifted measure.
    pub fn mass(&self) -> f64 {
        let m = crate::image::grid_dim(self.width, self.height) as i32;
        let total: f64 = (0..self.cells.len()).map(|i| self.norm_at(i)).sum();
        self.spacing.powi(m) * total
    }
}

pub fn lift(u: &Image) -> LiftedGradient {
    let g = gradient(u);
    let cells = g.gx().iter().zip(g.gy()).map(|(&x, &y)| [1.0, x, y]).collect();
    LiftedGradient {
        width: u.width(),
        height: u.height(),
        spacing: u.spacing(),
        cells,
    }
}

/// `√(1+a) - √(1+b)` without cancellation.
fn sqrt1p_diff(a: f64, b: f64) -> f64 {
    (a - b) / ((1.0 + a).sqrt() + (1.0 + b).sqrt())
}

struct Mollified {
    pad: (usize, usize),
    kernel: Kernel,
    cx: Vec<f64>,
    cy: Vec<f64>,
}

fn mollify(g: &GradientField, family: &MollifierFamily, level: usize) -> Result<Mollified> {
    let kernel = family.kernel(level, g.dim())?;
    let pad = (kernel.radius_x(), kernel.radius_y());
    let (w, h) = g.shape();
    let cx = convolve_plane(g.gx(), w, h, &kernel, pad);
    let cy = convolve_plane(g.gy(), w, h, &kernel, pad);
    Ok(Mollified { pad, kernel, cx, cy })
}

/// `η_ℓ(DU) = Σ h^m [√(1+|∇u|²) - √(1+|ρ_ℓ * ∇u|²)]` over the extended grid.
pub fn eta_level(u: &Image, family: &MollifierFamily, level: usize) -> Result<f64> {
    family.check_level(level)?;
    let g = gradient(u);
    let (w, h) = g.shape();
    let m = mollify(&g, family, level)?;
    let ew = w + 2 * m.pad.0;
    let mut total = 0.0;
    for (e, (cx, cy)) in m.cx.iter().zip(&m.cy).enumerate() {
        let (ex, ey) = (e % ew, e / ew);
        let inside = ex >= m.pad.0 && ex < m.pad.0 + w && ey >= m.pad.1 && ey < m.pad.1 + h;
        let orig = if inside {
            let i = (ey - m.pad.1) * w + (ex - m.pad.0);
            g.gx()[i] * g.gx()[i] + g.gy()[i] * g.gy()[i]
        } else {
            0.0
        };
        total += sqrt1p_diff(orig, cx * cx + cy * cy);
    }
    let value = total * g.cell_measure();
    if value < 0.0 {
        let (lo, hi) = u.min_max();
        if value < -1e-9 * lo.abs().max(hi.abs()).max(1.0) {
            log::warn!("eta level {level} negative ({value:e}) beyond rounding; clamped");
        }
        return Ok(0.0);
    }
    Ok(value)
}

/// `η = η_0 Σ_{ℓ=1}^{K} η_ℓ`.
pub fn eta(u: &Image, family: &MollifierFamily, levels: usize) -> Result<f64> {
    if levels > family.levels() {
        return Err(Error::LevelOutOfRange {
            level: levels,
            max: family.levels(),
        });
    }
    if levels == 0 || family.eta0() == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for level in 1..=levels {
        total += eta_level(u, family, level)?;
    }
    Ok(family.eta0() * total)
}

/// Whether `η_ℓ >= η_{ℓ+1} - tol` for all adjacent levels, with
/// `tol = 1e-6 η_1 + 1e-12`.
pub fn eta_level_decreasing_check(u: &Image, family: &MollifierFamily) -> Result<bool> {
    if family.levels() < 2 {
        return Err(Error::Config("need at least two levels".into()));
    }
    let values = (1..=family.levels())
        .map(|l| eta_level(u, family, l))
        .collect::<Result<Vec<_>>>()?;
    let tol = 1e-6 * values[0] + 1e-12;
    Ok(values.windows(2).all(|p| p[0] >= p[1] - tol))
}

/// `‖g‖_p - ‖ρ_ℓ * g‖_p` with `h^m`-weighted discrete norms over the extended grid.
pub fn eta_bar_level(g: &GradientField, family: &MollifierFamily, level: usize, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Domain {
            what: "norm exponent p (expected p > 1)",
            value: p,
        });
    }
    let m = mollify(g, family, level)?;
    let norm =
        |it: &mut dyn Iterator<Item = f64>| (g.cell_measure() * it.map(|v| v.powf(p)).sum::<f64>()).powf(1.0 / p);
    let orig = norm(&mut (0..g.gx().len()).map(|i| g.norm_at(i)));
    let smooth = norm(&mut m.cx.iter().zip(&m.cy).map(|(a, b)| a.hypot(*b)));
    Ok(orig - smooth)
}

/// Pieces of the first variation of `η` that the solver majorizes separately.
pub(crate) struct EtaSplit {
    /// `Σ_ℓ 1/√(1+|∇u|²)` per grid cell (convex part).
    pub convex_weight: Vec<f64>,
    /// `Σ_ℓ ρ̃_ℓ * (ρ_ℓ * ∇u / √(1+|ρ_ℓ * ∇u|²))` restricted to the grid (concave part).
    pub concave_field: GradientField,
}

pub(crate) fn eta_split(u: &Image, family: &MollifierFamily, levels: usize) -> Result<EtaSplit> {
    let g = gradient(u);
    let (w, h) = g.shape();
    let n = w * h;
    let mut convex_weight = vec![0.0; n];
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    let base: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + g.norm_at(i).powi(2)).sqrt()).collect();
    for level in 1..=levels {
        let m = mollify(&g, family, level)?;
        let scale: Vec<f64> =
            m.cx.iter()
                .zip(&m.cy)
                .map(|(a, b)| 1.0 / (1.0 + a * a + b * b).sqrt())
                .collect();
        let nx: Vec<f64> = m.cx.iter().zip(&scale).map(|(a, s)| a * s).collect();
        let ny: Vec<f64> = m.cy.iter().zip(&scale).map(|(a, s)| a * s).collect();
        let bx = convolve_plane_adjoint(&nx, w, h, &m.kernel, m.pad);
        let by = convolve_plane_adjoint(&ny, w, h, &m.kernel, m.pad);
        for i in 0..n {
            convex_weight[i] += base[i];
            fx[i] += bx[i];
            fy[i] += by[i];
        }
    }
    Ok(EtaSplit {
        convex_weight,
        concave_field: GradientField::new(w, h, fx, fy)?.with_spacing(u.spacing())?,
    })
}

/// `∇_u η` for the first `levels` levels.
pub fn eta_gradient(u: &Image, family: &MollifierFamily, levels: usize) -> Result<Image> {
    if levels > family.levels() {
        return Err(Error::LevelOutOfRange {
            level: levels,
            max: family.levels(),
        });
    }
    if levels == 0 || family.eta0() == 0.0 {
        return u.with_data(vec![0.0; u.len()]);
    }
    let g = gradient(u);
    let split = eta_split(u, family, levels)?;
    let c = family.eta0() * u.cell_measure();
    let fx: Vec<f64> = (0..u.len())
        .map(|i| c * (split.convex_weight[i] * g.gx()[i] - split.concave_field.gx()[i]))
        .collect();
    let fy: Vec<f64> = (0..u.len())
        .map(|i| c * (split.convex_weight[i] * g.gy()[i] - split.concave_field.gy()[i]))
        .collect();
    let field = GradientField::new(u.width(), u.height(), fx, fy)?.with_spacing(u.spacing())?;
    divergence(&field).map(|v| -v)
}
