//! Gradient-magnitude histograms and log-domain least-squares fits of the
//! densities `C exp(-α φ(t))` for `φ(t) = t^q` and its linearization above a
//! cut-off `M`.
//!
//! The fit minimizes `Σ (log ĥ(t_i) - (log C - α φ(t_i)))²` over the bin
//! centres `t_i` of the nonempty bins, with `C` left free. For each candidate
//! exponent the pair `(log C, α)` has a closed-form linear least-squares
//! solution; `q` is grid-searched on `0.01..=1.99` and refined by golden-section
//! search. `C` is recomputed afterwards so that the fitted density integrates
//! to one on `[0, ∞)`.

use statrs::function::gamma::{gamma, gamma_lr};

use crate::energy::PhiSpec;
use crate::error::{Error, Result};
use crate::image::{gradient, Image};

pub const DEFAULT_BINS: usize = 64;
pub const DEFAULT_EDGE_THRESHOLD: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
}

impl Histogram {
    /// Uniform bins on `[0, max(values)]`; the last bin is closed.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        let max = values.iter().copied().fold(0.0, f64::max);
        Self::from_values_in_range(values, bins, if max > 0.0 { max } else { 1.0 })
    }

    /// Uniform bins on `[0, upper]`; values above `upper` are left out.
    pub fn from_values_in_range(values: &[f64], bins: usize, upper: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("need at least one bin".into()));
        }
        if !(upper.is_finite() && upper > 0.0) {
            return Err(Error::Domain {
                what: "histogram upper edge",
                value: upper,
            });
        }
        if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0) || v.is_infinite()) {
            return Err(Error::Domain {
                what: "histogram sample",
                value: bad,
            });
        }
        let width = upper / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            if v > upper {
                continue;
            }
            let b = ((v / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Self { edges, counts })
    }

    /// Builds a histogram from explicit edges and counts.
    pub fn from_parts(edges: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if edges.len() != counts.len() + 1 || counts.is_empty() {
            return Err(Error::Config("need one more edge than bins".into()));
        }
        if edges.windows(2).any(|p| !(p[1] > p[0])) || edges[0] < 0.0 {
            return Err(Error::Config(
                "edges must be nonnegative and strictly increasing".into(),
            ));
        }
        Ok(Self { edges, counts })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }

    pub fn bin_width(&self, bin: usize) -> f64 {
        self.edges[bin + 1] - self.edges[bin]
    }

    /// Log of the normalized density per bin; `None` for empty bins.
    pub fn log_density(&self) -> Vec<Option<f64>> {
        let n = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(b, &c)| (c > 0).then(|| (c as f64 / (n * self.bin_width(b))).ln()))
            .collect()
    }

    /// `(centre, log density)` of the nonempty bins.
    pub fn log_points(&self) -> Vec<(f64, f64)> {
        self.centers()
            .into_iter()
            .zip(self.log_density())
            .filter_map(|(t, ld)| ld.map(|v| (t, v)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_center,count,log_density\n");
        for ((t, c), ld) in self.centers().iter().zip(&self.counts).zip(self.log_density()) {
            let ld = ld.map(|v| format!("{v:.12e}")).unwrap_or_default();
            out.push_str(&format!("{t:.12e},{c},{ld}\n"));
        }
        out
    }
}

/// Histogram of `|∇_h u(k)|` over the pixels selected by `mask` (all if `None`).
pub fn gradient_histogram(u: &Image, bins: usize, mask: Option<&[bool]>) -> Result<Histogram> {
    if bins < 8 {
        return Err(Error::Config(format!("need at least 8 bins, got {bins}")));
    }
    let norms = gradient(u).norms();
    let values: Vec<f64> = match mask {
        Some(m) => {
            if m.len() != norms.len() {
                return Err(Error::Config("mask size does not match image".into()));
            }
            norms.into_iter().zip(m).filter(|(_, &k)| k).map(|(v, _)| v).collect()
        }
        None => norms,
    };
    if values.is_empty() {
        return Err(Error::EmptyMask);
    }
    Histogram::from_values(&values, bins)
}

/// Splits pixels into `(edge, smooth)` masks by `|∇_h u(k)| >= threshold`.
pub fn split_edges(u: &Image, threshold: f64) -> Result<(Vec<bool>, Vec<bool>)> {
    if !(threshold >= 0.0) {
        return Err(Error::Domain {
            what: "edge threshold",
            value: threshold,
        });
    }
    let edge: Vec<bool> = gradient(u).norms().into_iter().map(|t| t >= threshold).collect();
    let smooth = edge.iter().map(|e| !e).collect();
    Ok((edge, smooth))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    /// Normalization making `C exp(-α φ)` a probability density.
    pub c: f64,
    /// `log C` as fitted, before renormalization.
    pub log_c_fit: f64,
    pub alpha: f64,
    pub q: f64,
    /// Cut-off `M`; infinite for the pure power model.
    pub cutoff: f64,
    pub alpha_infty: f64,
    /// Sum of squared log errors.
    pub residual: f64,
}

impl FitResult {
    pub fn phi(&self) -> PhiSpec {
        if self.cutoff.is_finite() {
            PhiSpec::LinearizedPower {
                q: self.q,
                cutoff: self.cutoff,
            }
        } else {
            PhiSpec::PowerQ { q: self.q }
        }
    }

    /// `log C - α φ(t)` with the normalized `C`.
    pub fn log_density(&self, t: f64) -> f64 {
        self.c.ln() - self.alpha * self.phi().value(t)
    }

    pub fn to_csv(&self) -> String {
        let m = if self.cutoff.is_finite() {
            format!("{:.12e}", self.cutoff)
        } else {
            "inf".to_string()
        };
        format!(
            "C,alpha,q,M,alpha_infty,residual\n{:.12e},{:.12e},{:.12e},{m},{:.12e},{:.12e}\n",
            self.c, self.alpha, self.q, self.alpha_infty, self.residual
        )
    }
}

pub(crate) fn asymptotic_alpha(alpha: f64, q: f64, cutoff: f64) -> f64 {
    if cutoff.is_finite() {
        alpha * q * cutoff.powf(q - 1.0)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug)]
struct LineFit {
    log_c: f64,
    alpha: f64,
    residual: f64,
}

/// Least squares for `y ≈ log C - α x`.
fn line_fit(points: &[(f64, f64)], x_of: impl Fn(f64) -> f64) -> Option<LineFit> {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(t, _)| x_of(*t)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, (_, y)) in xs.iter().zip(points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) || !sxx.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let log_c = my - slope * mx;
    let residual = xs
        .iter()
        .zip(points)
        .map(|(x, (_, y))| (y - log_c - slope * x).powi(2))
        .sum();
    Some(LineFit {
        log_c,
        alpha: -slope,
        residual,
    })
}

fn fit_for(points: &[(f64, f64)], q: f64, cutoff: f64) -> Option<LineFit> {
    if cutoff.is_finite() {
        let phi = PhiSpec::LinearizedPower { q, cutoff };
        line_fit(points, |t| phi.value(t))
    } else {
        line_fit(points, |t| t.powf(q))
    }
}

const Q_GRID_STEP: f64 = 0.01;

fn q_grid() -> impl Iterator<Item = f64> {
    (1..=199).map(|i| i as f64 * Q_GRID_STEP)
}

/// Best `(q, fit)` over the grid for a fixed cut-off, smallest `q` on ties.
fn grid_search_q(points: &[(f64, f64)], cutoff: f64) -> Option<(f64, LineFit)> {
    let mut best: Option<(f64, LineFit)> = None;
    for q in q_grid() {
        if let Some(f) = fit_for(points, q, cutoff) {
            if best.is_none_or(|(_, b)| f.residual < b.residual) {
                best = Some((q, f));
            }
        }
    }
    best
}

/// Golden-section refinement of `q` within one grid step of `q0`.
fn refine_q(points: &[(f64, f64)], cutoff: f64, q0: f64, start: LineFit) -> (f64, LineFit) {
    let cost = |q: f64| fit_for(points, q, cutoff).map_or(f64::INFINITY, |f| f.residual);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((q0 - Q_GRID_STEP).max(1e-6), (q0 + Q_GRID_STEP).min(2.0 - 1e-6));
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = cost(d);
        }
    }
    let q = 0.5 * (a + b);
    match fit_for(points, q, cutoff) {
        Some(f) if f.residual < start.residual => (q, f),
        _ => (q0, start),
    }
}

/// `∫_0^∞ exp(-α φ(t)) dt`.
fn partition(alpha: f64, q: f64, cutoff: f64) -> f64 {
    let full = gamma(1.0 + 1.0 / q) * alpha.powf(-1.0 / q);
    if !cutoff.is_finite() {
        return full;
    }
    let head = full * gamma_lr(1.0 / q, alpha * cutoff.powf(q));
    let tail = (-alpha * cutoff.powf(q)).exp() / (alpha * q * cutoff.powf(q - 1.0));
    head + tail
}

fn finish(q: f64, cutoff: f64, f: LineFit) -> Result<FitResult> {
    if !(f.alpha > 0.0) {
        return Err(Error::DegenerateHistogram(format!(
            "fitted alpha {} is not positive",
            f.alpha
        )));
    }
    Ok(FitResult {
        c: 1.0 / partition(f.alpha, q, cutoff),
        log_c_fit: f.log_c,
        alpha: f.alpha,
        q,
        cutoff,
        alpha_infty: asymptotic_alpha(f.alpha, q, cutoff),
        residual: f.residual,
    })
}

fn fit_points(hist: &Histogram) -> Result<Vec<(f64, f64)>> {
    let points = hist.log_points();
    if points.len() < 3 {
        return Err(Error::DegenerateHistogram(format!(
            "{} nonempty bins, need at least 3",
            points.len()
        )));
    }
    Ok(points)
}

fn fit_fixed_cutoff(points: &[(f64, f64)], cutoff: f64) -> Result<FitResult> {
    let (q0, start) = grid_search_q(points, cutoff)
        .ok_or_else(|| Error::DegenerateHistogram("no exponent gives a nondegenerate fit".into()))?;
    let (q, f) = refine_q(points, cutoff, q0, start);
    finish(q, cutoff, f)
}

/// Fits `log ĥ(t) ≈ log C - α t^q`.
pub fn fit_power(hist: &Histogram) -> Result<FitResult> {
    fit_fixed_cutoff(&fit_points(hist)?, f64::INFINITY)
}

/// Fits the linearized model. With `cutoff = Some(M)` only `(C, α, q)` are
/// optimized; with `None` the cut-off is searched over the bin centres (and
/// `M = ∞`) jointly with `q`.
pub fn fit_linearized(hist: &Histogram, cutoff: Option<f64>) -> Result<FitResult> {
    let points = fit_points(hist)?;
    if let Some(m) = cutoff {
        if !(m > 0.0) {
            return Err(Error::Domain {
                what: "cut-off M",
                value: m,
            });
        }
        return fit_fixed_cutoff(&points, m);
    }
    let mut best: Option<(f64, f64, LineFit)> = None;
    for m in hist.centers() {
        if let Some((q, f)) = grid_search_q(&points, m) {
            if best.is_none_or(|(_, _, b)| f.residual < b.residual) {
                best = Some((m, q, f));
            }
        }
    }
    let free = best.map(|(m, q0, start)| {
        let (q, f) = refine_q(&points, m, q0, start);
        (m, q, f)
    });
    let power = grid_search_q(&points, f64::INFINITY).map(|(q0, start)| refine_q(&points, f64::INFINITY, q0, start));
    match (free, power) {
        (Some((m, q, f)), Some((_, p))) if f.residual <= p.residual => finish(q, m, f),
        (_, Some((q, p))) => finish(q, f64::INFINITY, p),
        (Some((m, q, f)), None) => finish(q, m, f),
        (None, None) => Err(Error::DegenerateHistogram("no nondegenerate fit".into())),
    }
}
