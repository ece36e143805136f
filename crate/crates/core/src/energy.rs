//! Energy integrands `φ` and the discrete `TV^φ` functionals built on them.

use crate::error::{Error, Result};
use crate::image::{convolve, gradient, GradientField, Image};
use crate::multiscale::MollifierFamily;

/// The integrand `φ` applied to gradient magnitudes or jump heights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiSpec {
    /// `t^q`.
    PowerQ { q: f64 },
    /// `t^q` up to the cut-off `M`, continued by its tangent line beyond it.
    LinearizedPower { q: f64, cutoff: f64 },
    /// Huber regularisation of `t^q / q` with knee `gamma`.
    Huber { q: f64, gamma: f64 },
    /// `slope * t`; `slope = 1` gives ordinary total variation.
    Linear { slope: f64 },
}

fn check_exponent(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "exponent q (expected 0 < q < 2)",
            value: q,
        })
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

impl PhiSpec {
    pub fn power(q: f64) -> Result<Self> {
        check_exponent(q)?;
        Ok(Self::PowerQ { q })
    }

    pub fn linearized(q: f64, cutoff: f64) -> Result<Self> {
        check_exponent(q)?;
        check_positive("cut-off M", cutoff)?;
        Ok(Self::LinearizedPower { q, cutoff })
    }

    pub fn huber(q: f64, gamma: f64) -> Result<Self> {
        check_exponent(q)?;
        check_positive("Huber knee gamma", gamma)?;
        Ok(Self::Huber { q, gamma })
    }

    pub fn linear(slope: f64) -> Result<Self> {
        check_positive("slope", slope)?;
        Ok(Self::Linear { slope })
    }

    /// `φ(t)`; fails for negative or non-finite `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::Domain {
                what: "integrand argument",
                value: t,
            });
        }
        Ok(self.value(t))
    }

    /// `φ(t)` for `t >= 0`, unchecked.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::PowerQ { q } => t.powf(q),
            Self::LinearizedPower { q, cutoff } => {
                if t <= cutoff {
                    t.powf(q)
                } else {
                    (1.0 - q) * cutoff.powf(q) + q * cutoff.powf(q - 1.0) * t
                }
            }
            Self::Huber { q, gamma } => {
                if t > gamma {
                    t.powf(q) / q - (2.0 - q) / (2.0 * q) * gamma.powf(q)
                } else {
                    0.5 * gamma.powf(q - 2.0) * t * t
                }
            }
            Self::Linear { slope } => slope * t,
        }
    }

    /// `φ'(t)`. Power laws with `q < 1` are singular at the origin.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::Domain {
                what: "integrand argument",
                value: t,
            });
        }
        let power_slope = |q: f64, name| {
            if t > 0.0 {
                Ok(q * t.powf(q - 1.0))
            } else if q < 1.0 {
                Err(Error::Singularity(name))
            } else if q == 1.0 {
                Ok(1.0)
            } else {
                Ok(0.0)
            }
        };
        match *self {
            Self::PowerQ { q } => power_slope(q, "t^q"),
            Self::LinearizedPower { q, cutoff } => {
                if t > cutoff {
                    Ok(q * cutoff.powf(q - 1.0))
                } else {
                    power_slope(q, "linearized t^q")
                }
            }
            Self::Huber { q, gamma } => {
                if t > gamma {
                    Ok(t.powf(q - 1.0))
                } else {
                    Ok(gamma.powf(q - 2.0) * t)
                }
            }
            Self::Linear { slope } => Ok(slope),
        }
    }

    /// Recession constant `φ^∞ = lim φ(t)/t` as `t → ∞`.
    pub fn phi_infty(&self) -> f64 {
        let growth = |q: f64, lead: f64| {
            if q < 1.0 {
                0.0
            } else if q == 1.0 {
                lead
            } else {
                f64::INFINITY
            }
        };
        match *self {
            Self::PowerQ { q } => growth(q, 1.0),
            Self::LinearizedPower { q, cutoff } => q * cutoff.powf(q - 1.0),
            Self::Huber { q, .. } => growth(q, 1.0 / q),
            Self::Linear { slope } => slope,
        }
    }

    /// `φ_0 = lim φ(t)/t` as `t → 0`.
    pub fn phi_zero(&self) -> f64 {
        match *self {
            Self::PowerQ { q } | Self::LinearizedPower { q, .. } => {
                if q < 1.0 {
                    f64::INFINITY
                } else if q == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Huber { .. } => 0.0,
            Self::Linear { slope } => slope,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Self::PowerQ { q } | Self::LinearizedPower { q, .. } | Self::Huber { q, .. } => Some(q),
            Self::Linear { .. } => None,
        }
    }

    /// Majorizing Huber smoothing with knee `gamma`, used by the solver.
    pub fn smoothed(&self, gamma: f64) -> Result<Smoothed> {
        check_positive("smoothing knee gamma", gamma)?;
        let slope = self.derivative(gamma)?;
        Ok(Smoothed {
            base: *self,
            gamma,
            value_at_knee: self.value(gamma),
            slope_at_knee: slope,
        })
    }
}

/// `φ` with its core `[0, γ]` replaced by the quadratic in `t` that touches
/// `φ` with matching value and slope at `γ`.
///
/// For integrands where `φ(√s)` is concave in `s` the quadratic lies above
/// `φ`, and decreasing `γ` lowers the smoothed energy pointwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smoothed {
    base: PhiSpec,
    gamma: f64,
    value_at_knee: f64,
    slope_at_knee: f64,
}

impl Smoothed {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn base(&self) -> &PhiSpec {
        &self.base
    }

    pub fn value(&self, t: f64) -> f64 {
        if t >= self.gamma {
            self.base.value(t)
        } else {
            self.value_at_knee + self.slope_at_knee * (t * t - self.gamma * self.gamma) / (2.0 * self.gamma)
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t >= self.gamma {
            self.base.derivative(t).unwrap_or(self.slope_at_knee)
        } else {
            self.slope_at_knee * t / self.gamma
        }
    }

    /// Lagged-diffusivity weight `φ_γ'(t) / max(t, γ)`.
    pub fn weight(&self, t: f64) -> f64 {
        if t >= self.gamma {
            self.derivative(t) / t
        } else {
            self.slope_at_knee / self.gamma
        }
    }
}

/// Witness of the sandwich `c t - b <= φ(t) <= C (1 + t)` over a sample set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearGrowthCheck {
    pub member: bool,
    pub lower_slope: f64,
    pub lower_offset: f64,
    pub upper: f64,
}

/// Empirical check for linear growth from above and below on `samples`.
///
/// The lower slope is the secant of `φ` over the upper half of the sampled
/// range; a power law with `q < 1` drives it towards zero as the range grows.
/// Membership requires the lower slope to be at least `1e-3` of the upper
/// constant.
pub fn validate_linear_growth(spec: &PhiSpec, samples: &[f64]) -> Result<LinearGrowthCheck> {
    if samples.is_empty() {
        return Err(Error::Config("no sample points".into()));
    }
    if let Some(&bad) = samples.iter().find(|t| !(**t >= 0.0) || t.is_infinite()) {
        return Err(Error::Domain {
            what: "sample point",
            value: bad,
        });
    }
    let t_max = samples.iter().copied().fold(0.0, f64::max);
    if t_max == 0.0 {
        return Err(Error::Config("samples must include a positive point".into()));
    }
    let t_mid = samples
        .iter()
        .copied()
        .filter(|&t| t <= 0.5 * t_max)
        .fold(f64::NAN, f64::max);
    let lower_slope = if t_mid.is_nan() {
        spec.value(t_max) / t_max
    } else {
        (spec.value(t_max) - spec.value(t_mid)) / (t_max - t_mid)
    }
    .max(0.0);
    let lower_offset = samples
        .iter()
        .map(|&t| lower_slope * t - spec.value(t))
        .fold(0.0, f64::max);
    let upper = samples.iter().map(|&t| spec.value(t) / t.max(1.0)).fold(0.0, f64::max);
    Ok(LinearGrowthCheck {
        member: lower_slope > 0.0 && lower_slope >= 1e-3 * upper,
        lower_slope,
        lower_offset,
        upper,
    })
}

/// Coordinate-wise discrete model: `Σ_k Σ_i h^{m-1} φ(|u(k+e_i) - u(k)|)`.
pub fn tv_phi_d(u: &Image, spec: &PhiSpec) -> f64 {
    let (w, h) = u.shape();
    let d = u.data();
    let weight = u.spacing().powi(u.dim() as i32 - 1);
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                total += spec.value((d[i + 1] - d[i]).abs());
            }
            if y + 1 < h {
                total += spec.value((d[i + w] - d[i]).abs());
            }
        }
    }
    weight * total
}

pub(crate) fn sum_over_norms(g: &GradientField, f: impl Fn(f64) -> f64) -> f64 {
    let total: f64 = (0..g.gx().len()).map(|i| f(g.norm_at(i))).sum();
    g.cell_measure() * total
}

/// Isotropic gradient model: `Σ_k h^m φ(|∇_h u(k)|)`.
pub fn tv_phi_c(u: &Image, spec: &PhiSpec) -> f64 {
    sum_over_norms(&gradient(u), |t| spec.value(t))
}

/// Surrogate for `∫ φ(|∇u|) + φ^∞ |D^s u|`: cells whose gradient exceeds
/// `jump_threshold` are charged `φ^∞ |∇_h u|` as if they carried a jump.
pub fn tv_phi_sc(u: &Image, spec: &PhiSpec, jump_threshold: f64) -> f64 {
    let slope = spec.phi_infty();
    sum_over_norms(&gradient(u), |t| {
        if t <= jump_threshold {
            spec.value(t)
        } else {
            slope * t
        }
    })
}

/// `Σ_k h^m φ(|ρ_ε * ∇_h u|(k))` with the family's kernel at scale `eps`.
pub fn tv_phi_c_eps(u: &Image, spec: &PhiSpec, family: &MollifierFamily, eps: f64) -> Result<f64> {
    check_positive("mollifier scale", eps)?;
    let kernel = family.kernel_at(eps, u.dim())?;
    let g = gradient(u);
    let gx = convolve(&u.with_data(g.gx().to_vec())?, &kernel)?;
    let gy = convolve(&u.with_data(g.gy().to_vec())?, &kernel)?;
    let smooth =
        GradientField::new(u.width(), u.height(), gx.into_data(), gy.into_data())?.with_spacing(u.spacing())?;
    Ok(sum_over_norms(&smooth, |t| spec.value(t)))
}

/// Discrete area functional `Σ_k h^m √(1 + |∇_h u(k)|²)`.
pub fn area_functional(u: &Image) -> f64 {
    sum_over_norms(&gradient(u), |t| (1.0 + t * t).sqrt())
}
