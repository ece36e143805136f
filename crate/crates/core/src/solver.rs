//! Majorize–minimize denoiser for
//! `G(u) = (h^m / 2σ²) Σ (u - z)² + α TV^φ_c(u) + η(u)`.
//!
//! Each outer iteration fixes a smoothing knee `γ_k`, replaces `φ` by its
//! quadratic-core majorant `φ_γ`, majorizes the convex part of `η` by a
//! weighted quadratic and linearizes its concave part. The resulting linear
//! system `(I - σ² div(A ∇)) u = z - σ² η_0 div F` is solved by
//! Jacobi-preconditioned conjugate gradients, followed by a backtracking
//! check on the smoothed objective. `γ` is halved each step down to `γ_min`.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use web_time::Instant;

use crate::energy::{sum_over_norms, tv_phi_c, PhiSpec, Smoothed};
use crate::error::{Error, Result};
use crate::image::{divergence, gradient, Image};
use crate::metrics::MetricPair;
use crate::multiscale::{eta, eta_split, MollifierFamily};

/// Cut-off `M` of the linearized integrand. `Finite(0.0)` is plain total
/// variation; `Infinite` is the pure power `t^q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    Finite(f64),
    Infinite,
}

impl Cutoff {
    pub fn value(&self) -> f64 {
        match *self {
            Self::Finite(m) => m,
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(m) => write!(f, "{m}"),
            Self::Infinite => f.write_str("Inf"),
        }
    }
}

impl FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Self::Infinite);
        }
        let m: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("cut-off must be a number or inf, got {s:?}")))?;
        if !(m >= 0.0) || m.is_infinite() {
            return Err(Error::Domain {
                what: "cut-off M",
                value: m,
            });
        }
        Ok(Self::Finite(m))
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub q: f64,
    pub cutoff: Cutoff,
    /// Asymptotic edge weight `α^∞ = α φ^∞`.
    pub alpha_infty: f64,
    /// `σ²` dividing the fidelity term; `α^∞` and `η_0` are in those units.
    pub noise_variance: f64,
    pub family: MollifierFamily,
    /// Number of `η` levels used; `0` disables `η`.
    pub levels: usize,
    pub gamma_init: f64,
    pub gamma_min: f64,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub obj_tol: f64,
}

impl SolverConfig {
    pub fn new(q: f64, cutoff: Cutoff, alpha_infty: f64) -> Self {
        Self {
            q,
            cutoff,
            alpha_infty,
            noise_variance: 1.0,
            family: MollifierFamily::dyadic(2.0, 3, 0.0).expect("default family"),
            levels: 0,
            gamma_init: 1.0,
            gamma_min: 1e-3,
            max_outer: 60,
            inner_tol: 1e-6,
            max_inner: 20_000,
            obj_tol: 1e-7,
        }
    }

    pub fn with_cutoff(&self, cutoff: Cutoff) -> Self {
        Self { cutoff, ..self.clone() }
    }

    /// The integrand: `Linear(1)` for `M = 0`, `t^q` for `M = ∞`, `φ_{M,q}` otherwise.
    pub fn phi(&self) -> Result<PhiSpec> {
        match self.cutoff {
            Cutoff::Finite(0.0) => PhiSpec::linear(1.0),
            Cutoff::Finite(m) => PhiSpec::linearized(self.q, m),
            Cutoff::Infinite => PhiSpec::power(self.q),
        }
    }

    /// `α = α^∞ / φ^∞`, or `α^∞` itself when `φ^∞ = 0`.
    pub fn alpha(&self) -> Result<f64> {
        let slope = self.phi()?.phi_infty();
        Ok(if slope > 0.0 {
            self.alpha_infty / slope
        } else {
            self.alpha_infty
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.phi()?;
        let positive = [
            ("noise variance", self.noise_variance),
            ("gamma_min", self.gamma_min),
            ("inner_tol", self.inner_tol),
            ("obj_tol", self.obj_tol),
        ];
        for (what, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{what} must be positive, got {v}")));
            }
        }
        if !(self.alpha_infty >= 0.0 && self.alpha_infty.is_finite()) {
            return Err(Error::Config(format!(
                "alpha_infty must be >= 0, got {}",
                self.alpha_infty
            )));
        }
        if !(self.gamma_init >= self.gamma_min) {
            return Err(Error::Config("need gamma_init >= gamma_min".into()));
        }
        if self.levels > self.family.levels() {
            return Err(Error::LevelOutOfRange {
                level: self.levels,
                max: self.family.levels(),
            });
        }
        Ok(())
    }

    fn eta_active(&self) -> bool {
        self.levels > 0 && self.family.eta0() > 0.0
    }
}

/// Objective value split into its terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Objective {
    pub fidelity: f64,
    pub regularizer: f64,
    pub eta: f64,
}

impl Objective {
    pub fn total(&self) -> f64 {
        self.fidelity + self.regularizer + self.eta
    }
}

fn fidelity(u: &Image, z: &Image, cfg: &SolverConfig) -> f64 {
    let ss: f64 = u.data().iter().zip(z.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    0.5 * u.cell_measure() * ss / cfg.noise_variance
}

/// `G(u)` with the unsmoothed integrand.
pub fn objective(u: &Image, z: &Image, cfg: &SolverConfig) -> Result<Objective> {
    u.ensure_same_shape(z)?;
    Ok(Objective {
        fidelity: fidelity(u, z, cfg),
        regularizer: cfg.alpha()? * tv_phi_c(u, &cfg.phi()?),
        eta: eta(u, &cfg.family, cfg.levels)?,
    })
}

/// `G(u)` with `φ` replaced by its smoothing at knee `gamma`.
pub fn smoothed_objective(u: &Image, z: &Image, cfg: &SolverConfig, gamma: f64) -> Result<Objective> {
    u.ensure_same_shape(z)?;
    let sm = cfg.phi()?.smoothed(gamma)?;
    smoothed_terms(u, z, cfg, cfg.alpha()?, &sm)
}

fn smoothed_terms(u: &Image, z: &Image, cfg: &SolverConfig, alpha: f64, sm: &Smoothed) -> Result<Objective> {
    Ok(Objective {
        fidelity: fidelity(u, z, cfg),
        regularizer: alpha * sum_over_norms(&gradient(u), |t| sm.value(t)),
        eta: eta(u, &cfg.family, cfg.levels)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub gamma: f64,
    /// Smoothed objective at knee `gamma` after the step.
    pub objective: Objective,
    pub inner_iterations: usize,
    pub halvings: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// Smoothed objective before the first step, at `gamma_init`.
    pub initial: Objective,
    pub trace: Vec<TraceEntry>,
    /// Unsmoothed objective of the returned image.
    pub objective: Objective,
    pub alpha: f64,
    pub wall_time: Duration,
}

impl SolverReport {
    pub fn objective_trace(&self) -> Vec<f64> {
        std::iter::once(self.initial.total())
            .chain(self.trace.iter().map(|e| e.objective.total()))
            .collect()
    }

    /// Whether the trace never rises by more than `1e-10` of its first value.
    pub fn is_monotone(&self) -> bool {
        let tr = self.objective_trace();
        let slack = 1e-10 * tr[0].abs();
        tr.windows(2).all(|p| p[1] <= p[0] + slack)
    }

    /// Per-iteration CSV; wall time is left out so runs compare byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,gamma,objective,fidelity,regularizer,eta,inner_iterations,halvings\n");
        let row = |out: &mut String, k: usize, gamma: f64, o: &Objective, inner: usize, halv: usize| {
            out.push_str(&format!(
                "{k},{gamma:e},{:.12e},{:.12e},{:.12e},{:.12e},{inner},{halv}\n",
                o.total(),
                o.fidelity,
                o.regularizer,
                o.eta
            ));
        };
        let g0 = self.trace.first().map_or(f64::NAN, |e| e.gamma);
        row(&mut out, 0, g0, &self.initial, 0, 0);
        for (k, e) in self.trace.iter().enumerate() {
            row(&mut out, k + 1, e.gamma, &e.objective, e.inner_iterations, e.halvings);
        }
        out
    }
}

/// Diffusion coefficients per cell and the symmetric operator `I - c div(A ∇)`.
struct Operator {
    width: usize,
    height: usize,
    spacing: f64,
    coef: Vec<f64>,
    diag: Vec<f64>,
}

impl Operator {
    fn new(like: &Image, coef: Vec<f64>) -> Self {
        let (w, h) = like.shape();
        let inv2 = 1.0 / (like.spacing() * like.spacing());
        let mut diag = vec![1.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let mut s = 0.0;
                if x + 1 < w {
                    s += coef[i];
                }
                if x > 0 {
                    s += coef[i - 1];
                }
                if y + 1 < h {
                    s += coef[i];
                }
                if y > 0 {
                    s += coef[i - w];
                }
                diag[i] += s * inv2;
            }
        }
        Self {
            width: w,
            height: h,
            spacing: like.spacing(),
            coef,
            diag,
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let (w, h) = (self.width, self.height);
        let inv2 = 1.0 / (self.spacing * self.spacing);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let mut acc = 0.0;
                if x + 1 < w {
                    acc += self.coef[i] * (v[i] - v[i + 1]);
                }
                if x > 0 {
                    acc += self.coef[i - 1] * (v[i] - v[i - 1]);
                }
                if y + 1 < h {
                    acc += self.coef[i] * (v[i] - v[i + w]);
                }
                if y > 0 {
                    acc += self.coef[i - w] * (v[i] - v[i - w]);
                }
                out[i] = v[i] + acc * inv2;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct CgOutcome {
    iterations: usize,
    residual: f64,
    converged: bool,
}

/// Jacobi-preconditioned conjugate gradients, warm-started from `x`. The
/// residual is measured in the preconditioned norm `‖r‖_{D⁻¹} / ‖b‖_{D⁻¹}`.
fn conjugate_gradient(op: &Operator, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> CgOutcome {
    let n = b.len();
    let bnorm = b
        .iter()
        .zip(&op.diag)
        .map(|(b, d)| b * b / d)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut zv: Vec<f64> = r.iter().zip(&op.diag).map(|(r, d)| r / d).collect();
    let mut p = zv.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &zv);
    let mut residual = rz.max(0.0).sqrt() / bnorm;
    let mut k = 0;
    while residual > tol && k < max_iter {
        op.apply(&p, &mut ap);
        let step = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for i in 0..n {
            zv[i] = r[i] / op.diag[i];
        }
        let rz_next = dot(&r, &zv);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = zv[i] + beta * p[i];
        }
        residual = rz.max(0.0).sqrt() / bnorm;
        k += 1;
    }
    CgOutcome {
        iterations: k,
        residual,
        converged: residual <= tol,
    }
}

fn interpolate(a: &Image, b: &Image, t: f64) -> Result<Image> {
    a.with_data(a.data().iter().zip(b.data()).map(|(x, y)| x + t * (y - x)).collect())
}

/// Solves one majorized subproblem at `u` and returns the proposal.
fn mm_step(u: &Image, z: &Image, cfg: &SolverConfig, alpha: f64, sm: &Smoothed) -> Result<(Image, CgOutcome)> {
    let g = gradient(u);
    let s2 = cfg.noise_variance;
    let mut coef: Vec<f64> = (0..u.len()).map(|i| s2 * alpha * sm.weight(g.norm_at(i))).collect();
    let mut rhs = z.data().to_vec();
    if cfg.eta_active() {
        let eta0 = cfg.family.eta0();
        let split = eta_split(u, &cfg.family, cfg.levels)?;
        for (c, w) in coef.iter_mut().zip(&split.convex_weight) {
            *c += s2 * eta0 * w;
        }
        let div_f = divergence(&split.concave_field);
        for (r, d) in rhs.iter_mut().zip(div_f.data()) {
            *r -= s2 * eta0 * d;
        }
    }
    let op = Operator::new(u, coef);
    let mut x = u.data().to_vec();
    let outcome = conjugate_gradient(&op, &rhs, &mut x, cfg.inner_tol, cfg.max_inner);
    Ok((u.with_data(x)?, outcome))
}

/// Denoises `z`. Deterministic: identical inputs give identical bytes.
pub fn denoise(z: &Image, cfg: &SolverConfig) -> Result<(Image, SolverReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let phi = cfg.phi()?;
    let alpha = cfg.alpha()?;
    let mut u = z.clone();
    let mut gamma = cfg.gamma_init;
    let mut sm = phi.smoothed(gamma)?;
    let initial = smoothed_terms(&u, z, cfg, alpha, &sm)?;
    let mut report = SolverReport {
        iterations: 0,
        initial,
        trace: Vec::new(),
        objective: initial,
        alpha,
        wall_time: Duration::ZERO,
    };
    let regularized = alpha > 0.0 || cfg.eta_active();
    if regularized {
        let mut current = initial.total();
        for _ in 0..cfg.max_outer {
            let (proposal, cg) = mm_step(&u, z, cfg, alpha, &sm)?;
            if !cg.converged {
                report.iterations = report.trace.len();
                report.objective = objective(&u, z, cfg)?;
                report.wall_time = start.elapsed();
                return Err(Error::Convergence {
                    iterations: cg.iterations,
                    residual: cg.residual,
                    report: Box::new(report),
                });
            }
            let mut t = 1.0;
            let mut halvings = 0;
            let mut accepted = None;
            loop {
                let cand = if halvings == 0 {
                    proposal.clone()
                } else {
                    interpolate(&u, &proposal, t)?
                };
                let obj = smoothed_terms(&cand, z, cfg, alpha, &sm)?;
                if obj.total() <= current {
                    accepted = Some((cand, obj));
                    break;
                }
                if halvings == 30 {
                    break;
                }
                t *= 0.5;
                halvings += 1;
            }
            let previous = current;
            let (next, obj) =
                accepted.unwrap_or_else(|| (u.clone(), smoothed_terms(&u, z, cfg, alpha, &sm).expect("valid image")));
            u = next;
            current = obj.total();
            report.trace.push(TraceEntry {
                gamma,
                objective: obj,
                inner_iterations: cg.iterations,
                halvings,
            });
            let decrease = (previous - current) / previous.abs().max(f64::MIN_POSITIVE);
            if gamma <= cfg.gamma_min && decrease < cfg.obj_tol {
                break;
            }
            let next_gamma = (gamma * 0.5).max(cfg.gamma_min);
            if next_gamma != gamma {
                gamma = next_gamma;
                sm = phi.smoothed(gamma)?;
                // φ_γ only decreases with γ, so the trace stays monotone
                current = smoothed_terms(&u, z, cfg, alpha, &sm)?.total();
            }
        }
    }
    report.iterations = report.trace.len();
    report.objective = objective(&u, z, cfg)?;
    report.wall_time = start.elapsed();
    log::info!(
        "denoise: {} iterations, objective {:.6e}, {:.3}s",
        report.iterations,
        report.objective.total(),
        report.wall_time.as_secs_f64()
    );
    Ok((u, report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub cutoff: Cutoff,
    pub alpha: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Denoises `z` once per cut-off with `α^∞` held fixed; rows follow `cutoffs`.
pub fn sweep_m(z: &Image, reference: &Image, base: &SolverConfig, cutoffs: &[Cutoff]) -> Result<Vec<SweepRow>> {
    z.ensure_same_shape(reference)?;
    cutoffs
        .par_iter()
        .map(|&m| {
            let cfg = base.with_cutoff(m);
            let (u, report) = denoise(z, &cfg)?;
            let metrics = MetricPair::compute(&u, reference)?;
            Ok(SweepRow {
                cutoff: m,
                alpha: report.alpha,
                psnr: metrics.psnr,
                ssim: metrics.ssim,
                objective: report.objective.total(),
                iterations: report.iterations,
            })
        })
        .collect()
}

/// Index of the largest value; the first (smallest-M) one on ties.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// `M,PSNR,SSIM,objective,iters`; the best PSNR and SSIM cells carry a trailing `*`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let best_psnr = argmax(rows.iter().map(|r| r.psnr));
    let best_ssim = argmax(rows.iter().map(|r| r.ssim));
    let mut out = String::from("M,PSNR,SSIM,objective,iters\n");
    for (i, r) in rows.iter().enumerate() {
        let mark = |best: Option<usize>| if best == Some(i) { "*" } else { "" };
        out.push_str(&format!(
            "{},{:.4}{},{:.4}{},{:.12e},{}\n",
            r.cutoff,
            r.psnr,
            mark(best_psnr),
            r.ssim,
            mark(best_ssim),
            r.objective,
            r.iterations
        ));
    }
    out
}
