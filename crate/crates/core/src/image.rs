//! Grid functions on a regular grid, forward-difference operators, zero-padded
//! convolution and seeded Gaussian noise.
//!
//! Pixels are stored row-major with `x` running along a row. An image whose
//! height (or width) is one is treated as a one-dimensional grid: its cell
//! measure is `h` rather than `h^2` and kernels act only along the long axis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A grayscale image `u_h` sampled on a grid of spacing `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    spacing: f64,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::Config(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite pixel value {bad}")));
        }
        Ok(Self {
            width,
            height,
            spacing: 1.0,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("valid constant image")
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("from_fn produced an invalid image")
    }

    /// A one-dimensional signal stored as an `n x 1` image.
    pub fn from_signal(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {spacing}")));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Spatial dimension of the grid (1 for single-row or single-column images).
    pub fn dim(&self) -> u32 {
        grid_dim(self.width, self.height)
    }

    /// Measure `h^m` of one grid cell.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// Replaces the pixel values, keeping shape and spacing.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.width, self.height, data)?.with_spacing(self.spacing)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_data(self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

pub(crate) fn grid_dim(width: usize, height: usize) -> u32 {
    if width == 1 || height == 1 {
        1
    } else {
        2
    }
}

/// Forward-difference gradient `∇_h u`, one 2-vector per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    spacing: f64,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl GradientField {
    pub fn new(width: usize, height: usize, gx: Vec<f64>, gy: Vec<f64>) -> Result<Self> {
        let n = width * height;
        if n == 0 || gx.len() != n || gy.len() != n {
            return Err(Error::Config(format!(
                "gradient components must both have {width}x{height} entries"
            )));
        }
        if gx.iter().chain(gy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite gradient component".into()));
        }
        Ok(Self {
            width,
            height,
            spacing: 1.0,
            gx,
            gy,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0.0; width * height], vec![0.0; width * height]).expect("valid zero field")
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {spacing}")));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dim(&self) -> u32 {
        grid_dim(self.width, self.height)
    }

    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn gx(&self) -> &[f64] {
        &self.gx
    }

    pub fn gy(&self) -> &[f64] {
        &self.gy
    }

    /// Euclidean norm of the gradient at pixel index `i`.
    pub fn norm_at(&self, i: usize) -> f64 {
        self.gx[i].hypot(self.gy[i])
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.gx.len()).map(|i| self.norm_at(i)).collect()
    }

    /// Euclidean inner product of the stacked components.
    pub fn dot(&self, other: &GradientField) -> f64 {
        self.gx
            .iter()
            .zip(&other.gx)
            .chain(self.gy.iter().zip(&other.gy))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Forward differences divided by `h`, zero at the last column/row.
pub fn gradient(u: &Image) -> GradientField {
    let (w, h) = u.shape();
    let inv = 1.0 / u.spacing();
    let d = u.data();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                gx[i] = (d[i + 1] - d[i]) * inv;
            }
            if y + 1 < h {
                gy[i] = (d[i + w] - d[i]) * inv;
            }
        }
    }
    GradientField {
        width: w,
        height: h,
        spacing: u.spacing(),
        gx,
        gy,
    }
}

/// Negative adjoint of [`gradient`]: `<∇u, g> = -<u, div g>`.
pub fn divergence(g: &GradientField) -> Image {
    let (w, h) = g.shape();
    let inv = 1.0 / g.spacing();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let mut v = 0.0;
            if x + 1 < w {
                v += g.gx[i];
            }
            if x > 0 {
                v -= g.gx[i - 1];
            }
            if y + 1 < h {
                v += g.gy[i];
            }
            if y > 0 {
                v -= g.gy[i - w];
            }
            out[y * w + x] = v * inv;
        }
    }
    Image::new(w, h, out)
        .and_then(|img| img.with_spacing(g.spacing()))
        .expect("divergence of a valid field")
}

/// A convolution kernel with odd side lengths, centred on its middle entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    weights: Vec<f64>,
    factors: Option<(Vec<f64>, Vec<f64>)>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::Config(format!("kernel sides must be odd, got {width}x{height}")));
        }
        if weights.len() != width * height || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("kernel weights malformed".into()));
        }
        Ok(Self {
            width,
            height,
            weights,
            factors: None,
        })
    }

    /// Outer product `col ⊗ row`; convolution then runs as two 1D passes.
    pub fn separable(row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        let mut weights = Vec::with_capacity(row.len() * col.len());
        for c in &col {
            for r in &row {
                weights.push(c * r);
            }
        }
        let mut k = Self::new(row.len(), col.len(), weights)?;
        k.factors = Some((row, col));
        Ok(k)
    }

    pub fn identity() -> Self {
        Self::separable(vec![1.0], vec![1.0]).expect("identity kernel")
    }

    pub fn box_filter(side: usize) -> Result<Self> {
        let w = 1.0 / side as f64;
        Self::separable(vec![w; side], vec![w; side])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn radius_x(&self) -> usize {
        self.width / 2
    }

    pub fn radius_y(&self) -> usize {
        self.height / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-9
    }

    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let i = (dy + self.radius_y() as isize) as usize * self.width + (dx + self.radius_x() as isize) as usize;
        self.weights[i]
    }

    /// Discrete p-norm of the weights.
    pub fn norm_p(&self, p: f64) -> f64 {
        self.weights.iter().map(|w| w.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Zero-padded convolution restricted to the input grid.
pub fn convolve(u: &Image, kernel: &Kernel) -> Result<Image> {
    if !kernel.is_normalized() {
        return Err(Error::Config(format!("kernel must sum to 1, sums to {}", kernel.sum())));
    }
    let out = convolve_plane(u.data(), u.width(), u.height(), kernel, (0, 0));
    u.with_data(out)
}

/// Convolves the zero extension of `src` (`w x h`) and samples the result on
/// the grid enlarged by `pad` cells on each side. Returns a
/// `(w + 2 pad.0) x (h + 2 pad.1)` row-major buffer.
pub(crate) fn convolve_plane(src: &[f64], w: usize, h: usize, k: &Kernel, pad: (usize, usize)) -> Vec<f64> {
    let (px, py) = pad;
    let ew = w + 2 * px;
    let eh = h + 2 * py;
    let (rx, ry) = (k.radius_x() as isize, k.radius_y() as isize);
    match &k.factors {
        Some((row, col)) => {
            // x pass: ew x h
            let mut tmp = vec![0.0; ew * h];
            for y in 0..h {
                let line = &src[y * w..(y + 1) * w];
                for ex in 0..ew {
                    let cx = ex as isize - px as isize;
                    let lo = (cx - rx).max(0);
                    let hi = (cx + rx).min(w as isize - 1);
                    let mut acc = 0.0;
                    let mut sx = lo;
                    while sx <= hi {
                        acc += row[(cx - sx + rx) as usize] * line[sx as usize];
                        sx += 1;
                    }
                    tmp[y * ew + ex] = acc;
                }
            }
            // y pass: ew x eh
            let mut out = vec![0.0; ew * eh];
            for ey in 0..eh {
                let cy = ey as isize - py as isize;
                let lo = (cy - ry).max(0);
                let hi = (cy + ry).min(h as isize - 1);
                let orow = &mut out[ey * ew..(ey + 1) * ew];
                let mut sy = lo;
                while sy <= hi {
                    let wgt = col[(cy - sy + ry) as usize];
                    let trow = &tmp[sy as usize * ew..(sy as usize + 1) * ew];
                    for (o, t) in orow.iter_mut().zip(trow) {
                        *o += wgt * t;
                    }
                    sy += 1;
                }
            }
            out
        }
        None => {
            let mut out = vec![0.0; ew * eh];
            for ey in 0..eh {
                let cy = ey as isize - py as isize;
                for ex in 0..ew {
                    let cx = ex as isize - px as isize;
                    let mut acc = 0.0;
                    for dy in -ry..=ry {
                        let sy = cy - dy;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        for dx in -rx..=rx {
                            let sx = cx - dx;
                            if sx < 0 || sx >= w as isize {
                                continue;
                            }
                            acc += k.at(dx, dy) * src[sy as usize * w + sx as usize];
                        }
                    }
                    out[ey * ew + ex] = acc;
                }
            }
            out
        }
    }
}

/// Adjoint of [`convolve_plane`]: correlates the extended buffer with the
/// kernel and restricts the result to the original `w x h` grid.
pub(crate) fn convolve_plane_adjoint(ext: &[f64], w: usize, h: usize, k: &Kernel, pad: (usize, usize)) -> Vec<f64> {
    let (px, py) = pad;
    let ew = w + 2 * px;
    let eh = h + 2 * py;
    debug_assert_eq!(ext.len(), ew * eh);
    let (rx, ry) = (k.radius_x() as isize, k.radius_y() as isize);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -ry..=ry {
                let ey = y as isize + py as isize + dy;
                if ey < 0 || ey >= eh as isize {
                    continue;
                }
                for dx in -rx..=rx {
                    let ex = x as isize + px as isize + dx;
                    if ex < 0 || ex >= ew as isize {
                        continue;
                    }
                    acc += k.at(dx, dy) * ext[ey as usize * ew + ex as usize];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Adds `sigma * N(0, 1)` to every pixel.
///
/// Standard normals come from the Box–Muller transform applied to uniforms
/// drawn from a ChaCha8 stream seeded with `seed`; both outputs of each
/// transform are used, in pixel order. No clamping is applied.
pub fn add_gaussian_noise(u: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Domain {
            what: "noise standard deviation",
            value: sigma,
        });
    }
    if sigma == 0.0 {
        return Ok(u.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spare: Option<f64> = None;
    let mut noisy = Vec::with_capacity(u.len());
    for &v in u.data() {
        let n = match spare.take() {
            Some(n) => n,
            None => {
                // 1 - U lies in (0, 1], so the log is finite.
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random::<f64>();
                let r = (-2.0 * u1.ln()).sqrt();
                let theta = std::f64::consts::TAU * u2;
                spare = Some(r * theta.sin());
                r * theta.cos()
            }
        };
        noisy.push(v + sigma * n);
    }
    u.with_data(noisy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;

    fn random_image(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = StdRng::seed_from_u64(seed);
        Image::from_fn(w, h, |_, _| rng_value(&mut rng))
    }

    fn rng_value(rng: &mut StdRng) -> f64 {
        rng.random_range(-1.0..1.0)
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = gradient(&Image::filled(7, 5, 3.5));
        assert!(g.gx().iter().chain(g.gy()).all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_short_row() {
        let u = Image::from_signal(vec![0.0, 1.0, 2.0]).unwrap();
        let g = gradient(&u);
        assert_eq!(g.gx(), &[1.0, 1.0, 0.0]);
        assert_eq!(g.gy(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_of_linear_ramp() {
        let u = Image::from_fn(8, 8, |x, _| x as f64);
        let g = gradient(&u);
        for y in 0..8 {
            for x in 0..7 {
                assert_eq!(g.gx()[y * 8 + x], 1.0);
            }
            assert_eq!(g.gx()[y * 8 + 7], 0.0);
        }
        assert!(g.gy().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_divides_by_spacing() {
        let u = Image::from_signal(vec![0.0, 1.0]).unwrap().with_spacing(0.25).unwrap();
        assert_eq!(gradient(&u).gx()[0], 4.0);
    }

    #[test]
    fn divergence_of_zero_field() {
        let d = divergence(&GradientField::zeros(6, 4));
        assert!(d.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_of_unit_impulse() {
        let (w, h) = (5, 4);
        let mut gx = vec![0.0; w * h];
        gx[2 * w + 1] = 1.0;
        let g = GradientField::new(w, h, gx, vec![0.0; w * h])
            .unwrap()
            .with_spacing(0.5)
            .unwrap();
        let d = divergence(&g);
        assert_eq!(d.get(1, 2), 2.0);
        assert_eq!(d.get(2, 2), -2.0);
        assert_eq!(d.data().iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn adjoint_identity_on_random_pair() {
        let u = random_image(16, 16, 1);
        let a = random_image(16, 16, 2);
        let b = random_image(16, 16, 3);
        let g = GradientField::new(16, 16, a.data().to_vec(), b.data().to_vec()).unwrap();
        let lhs = gradient(&u).dot(&g);
        let rhs: f64 = -u
            .data()
            .iter()
            .zip(divergence(&g).data())
            .map(|(x, y)| x * y)
            .sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn identity_kernel_is_noop() {
        let u = random_image(9, 7, 4);
        assert_eq!(convolve(&u, &Kernel::identity()).unwrap(), u);
    }

    #[test]
    fn box_kernel_spreads_impulse() {
        let mut data = vec![0.0; 49];
        data[3 * 7 + 3] = 1.0;
        let u = Image::new(7, 7, data).unwrap();
        let out = convolve(&u, &Kernel::box_filter(3).unwrap()).unwrap();
        for y in 0..7 {
            for x in 0..7 {
                let expected = if (2..=4).contains(&x) && (2..=4).contains(&y) {
                    1.0 / 9.0
                } else {
                    0.0
                };
                assert!((out.get(x, y) - expected).abs() < 1e-15);
            }
        }
        let total: f64 = out.data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_and_separable_paths_agree() {
        let sep = Kernel::separable(vec![0.25, 0.5, 0.25], vec![0.1, 0.2, 0.4, 0.2, 0.1]).unwrap();
        let dense = Kernel::new(3, 5, sep.weights().to_vec()).unwrap();
        let u = random_image(10, 8, 5);
        let a = convolve(&u, &sep).unwrap();
        let b = convolve(&u, &dense).unwrap();
        for (p, q) in a.data().iter().zip(b.data()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_interior_preserved() {
        let u = Image::filled(12, 12, 42.0);
        let out = convolve(&u, &Kernel::box_filter(5).unwrap()).unwrap();
        for y in 2..10 {
            for x in 2..10 {
                assert!((out.get(x, y) - 42.0).abs() < 1e-12);
            }
        }
        assert!(out.get(0, 0) < 42.0);
    }

    #[test]
    fn unnormalized_kernel_rejected() {
        let k = Kernel::new(3, 1, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(convolve(&Image::filled(4, 4, 1.0), &k), Err(Error::Config(_))));
        assert!(Kernel::new(2, 1, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn plane_adjoint_matches_inner_products() {
        let k = Kernel::separable(vec![0.2, 0.5, 0.3], vec![0.6, 0.3, 0.1]).unwrap();
        let (w, h, pad) = (6, 5, (1, 1));
        let f = random_image(w, h, 6);
        let e = random_image(w + 2, h + 2, 7);
        let kf = convolve_plane(f.data(), w, h, &k, pad);
        let kte = convolve_plane_adjoint(e.data(), w, h, &k, pad);
        let lhs: f64 = kf.iter().zip(e.data()).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.data().iter().zip(&kte).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let u = random_image(8, 8, 8);
        assert_eq!(add_gaussian_noise(&u, 0.0, 3).unwrap(), u);
    }

    #[test]
    fn noise_is_reproducible() {
        let u = Image::filled(32, 32, 128.0);
        let a = add_gaussian_noise(&u, 30.0, 7).unwrap();
        let b = add_gaussian_noise(&u, 30.0, 7).unwrap();
        let c = add_gaussian_noise(&u, 30.0, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_statistics() {
        let n = 512;
        let sigma = 30.0;
        let u = Image::filled(n, n, 0.0);
        let noisy = add_gaussian_noise(&u, sigma, 11).unwrap();
        let count = (n * n) as f64;
        let mean = noisy.data().iter().sum::<f64>() / count;
        let var = noisy.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
        assert!(mean.abs() <= 3.0 * sigma / count.sqrt());
        assert!((var.sqrt() - sigma).abs() <= 0.02 * sigma);
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(add_gaussian_noise(&Image::filled(2, 2, 0.0), -1.0, 0).is_err());
    }

    #[test]
    fn invalid_images_rejected() {
        assert!(Image::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(Image::filled(2, 2, 0.0).with_spacing(0.0).is_err());
    }

    #[test]
    fn one_dimensional_cell_measure() {
        let u = Image::from_signal(vec![0.0; 10]).unwrap().with_spacing(0.5).unwrap();
        assert_eq!(u.dim(), 1);
        assert_eq!(u.cell_measure(), 0.5);
        let v = Image::filled(3, 3, 0.0).with_spacing(0.5).unwrap();
        assert_eq!(v.cell_measure(), 0.25);
    }
}
