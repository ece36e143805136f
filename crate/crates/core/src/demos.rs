//! Numerical witnesses of limiting laws for the `TV^φ` energies and `η`.
//!
//! Each demo evaluates the production energies on a family of synthetic
//! signals, tabulates measured against analytic values and returns a verdict.

use crate::energy::{tv_phi_c, tv_phi_c_eps, tv_phi_d, PhiSpec};
use crate::error::{Error, Result};
use crate::image::{gradient, Image};
use crate::multiscale::{eta, MollifierFamily};
use crate::synthetic;

#[derive(Clone, Debug, PartialEq)]
pub struct DemoRow {
    pub param: f64,
    pub measured: f64,
    pub analytic: f64,
    pub rel_error: f64,
    pub extra: Vec<f64>,
}

impl DemoRow {
    fn new(param: f64, measured: f64, analytic: f64, extra: Vec<f64>) -> Self {
        Self {
            param,
            measured,
            analytic,
            rel_error: rel_error(measured, analytic),
            extra,
        }
    }
}

pub fn rel_error(measured: f64, analytic: f64) -> f64 {
    if measured == analytic {
        0.0
    } else {
        (measured - analytic).abs() / analytic.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoTrace {
    pub name: &'static str,
    pub param_name: &'static str,
    pub extra_names: Vec<&'static str>,
    pub rows: Vec<DemoRow>,
    pub passed: bool,
    /// One-line summary of what the verdict checked.
    pub summary: String,
}

impl DemoTrace {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},measured,analytic,rel_error", self.param_name);
        for name in &self.extra_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.15e},{:.15e},{:.6e}",
                r.param, r.measured, r.analytic, r.rel_error
            ));
            for v in &r.extra {
                out.push_str(&format!(",{v:.15e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

fn check_sublinear(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "exponent q (expected 0 < q < 1)",
            value: q,
        })
    }
}

pub const RAMP_TOL: f64 = 1e-9;

/// `tv_phi_d` of the `k`-step staircase on `(0, 1)` against `k^{1-q}`.
pub fn demo_ramp_blowup(q: f64, ks: &[usize]) -> Result<DemoTrace> {
    check_sublinear(q)?;
    let phi = PhiSpec::power(q)?;
    let rows = ks
        .iter()
        .map(|&k| {
            let u = synthetic::staircase(k)?;
            Ok(DemoRow::new(
                k as f64,
                tv_phi_d(&u, &phi),
                (k as f64).powf(1.0 - q),
                vec![],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.rel_error <= RAMP_TOL);
    Ok(DemoTrace {
        name: "ramp",
        param_name: "k",
        extra_names: vec![],
        rows,
        passed,
        summary: format!("q={q}: relative error <= {RAMP_TOL:e} against k^(1-q)"),
    })
}

pub const STEP_TOL: f64 = 0.01;

/// `tv_phi_c` of the step smeared over `[-1/k, 1/k]` against `(2/k)^{1-q}`.
pub fn demo_step_vanishing(q: f64, ks: &[usize], h: f64) -> Result<DemoTrace> {
    check_sublinear(q)?;
    let max_k = ks.iter().copied().max().unwrap_or(1) as f64;
    if !(h > 0.0 && h <= 1.0 / (4.0 * max_k)) {
        return Err(Error::Domain {
            what: "grid spacing h (expected h <= 1/(4 max k))",
            value: h,
        });
    }
    let phi = PhiSpec::power(q)?;
    let rows = ks
        .iter()
        .map(|&k| {
            let u = synthetic::smeared_step(k as f64, h)?;
            Ok(DemoRow::new(
                k as f64,
                tv_phi_c(&u, &phi),
                (2.0 / k as f64).powf(1.0 - q),
                vec![],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let within = rows.iter().all(|r| r.rel_error <= STEP_TOL);
    let decreasing = rows.windows(2).all(|p| p[1].measured < p[0].measured);
    Ok(DemoTrace {
        name: "step",
        param_name: "k",
        extra_names: vec![],
        rows,
        passed: within && decreasing,
        summary: format!("q={q}: within {STEP_TOL} of (2/k)^(1-q) and strictly decreasing in k"),
    })
}

pub const LINLIMIT_TOL: f64 = 1e-12;

/// Unit step smeared over width `w`: energy `w φ_{M,q}(1/w)` against `φ^∞`.
/// Extra columns: measured residual and the exact `w (1-q) M^q`.
pub fn demo_linearized_limit(q: f64, cutoff: f64, widths: &[f64]) -> Result<DemoTrace> {
    check_sublinear(q)?;
    let phi = PhiSpec::linearized(q, cutoff)?;
    let limit = phi.phi_infty();
    let mut passed = true;
    let rows = widths
        .iter()
        .map(|&w| {
            if !(w > 0.0) {
                return Err(Error::Domain {
                    what: "width w",
                    value: w,
                });
            }
            let u = synthetic::ramp_step(w, 4)?;
            let measured = tv_phi_c(&u, &phi);
            let residual = measured - limit;
            let exact = if 1.0 / w >= cutoff {
                w * (1.0 - q) * cutoff.powf(q)
            } else {
                w * phi.value(1.0 / w) - limit
            };
            if 1.0 / w > cutoff && (residual - exact).abs() > LINLIMIT_TOL * limit.max(1.0) {
                passed = false;
            }
            Ok(DemoRow::new(w, measured, limit, vec![residual, exact]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DemoTrace {
        name: "linlimit",
        param_name: "w",
        extra_names: vec!["residual", "exact_residual"],
        rows,
        passed,
        summary: format!("q={q} M={cutoff}: residual equals w(1-q)M^q to {LINLIMIT_TOL:e} for 1/w > M"),
    })
}

pub const ANNIHILATION_SAMPLES: usize = 512;
pub const ANNIHILATION_SPACING: f64 = 1.0 / 256.0;
pub const ANNIHILATION_SUPERPOSITION_TOL: f64 = 0.05;

fn total_variation(u: &Image) -> f64 {
    gradient(u).gx().iter().map(|v| v.abs()).sum::<f64>() * u.spacing()
}

/// `η` of a `+1/-1` mass pair `d` samples apart against twice the single-mass
/// value. Extra columns: TV mass and the single-mass `η`.
pub fn demo_annihilation(separations: &[usize], family: &MollifierFamily) -> Result<DemoTrace> {
    let levels = family.levels();
    let single = synthetic::single_spike(ANNIHILATION_SAMPLES, ANNIHILATION_SPACING)?;
    let eta_single = eta(&single, family, levels)?;
    let rows = separations
        .iter()
        .map(|&d| {
            if d == 0 {
                return Err(Error::Config("separation must be at least one sample".into()));
            }
            let u = synthetic::spike_pair(ANNIHILATION_SAMPLES, d, ANNIHILATION_SPACING)?;
            let pair = eta(&u, family, levels)?;
            Ok(DemoRow::new(
                d as f64,
                pair,
                2.0 * eta_single,
                vec![total_variation(&u), eta_single],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let eps1 = family.scales().first().copied().unwrap_or(0.0);
    let mass_constant = rows.iter().all(|r| (r.extra[0] - 2.0).abs() <= 1e-12);
    let far = rows.iter().max_by(|a, b| a.param.total_cmp(&b.param));
    let near = rows
        .iter()
        .filter(|r| r.param <= eps1)
        .min_by(|a, b| a.param.total_cmp(&b.param));
    let superposition = far.is_some_and(|r| r.param < 4.0 * eps1 || r.rel_error <= ANNIHILATION_SUPERPOSITION_TOL);
    let amplified = match (near, far) {
        (Some(n), Some(f)) => n.measured >= 2.0 * f.measured,
        _ => false,
    };
    Ok(DemoTrace {
        name: "annihilation",
        param_name: "d",
        extra_names: vec!["tv_mass", "eta_single"],
        rows,
        passed: mass_constant && superposition && amplified && eta_single > 0.0,
        summary: format!(
            "eps1={eps1}: TV mass 2, eta(nearest pair) >= 2 eta(farthest pair), far pair within {ANNIHILATION_SUPERPOSITION_TOL} of 2 eta(single)"
        ),
    })
}

pub const COMPACT_TOL: f64 = 0.02;

/// `tv_phi_c_eps` over decreasing `ε` against `tv_phi_c`.
pub fn demo_compact_convergence(u: &Image, eps_list: &[f64], spec: &PhiSpec) -> Result<DemoTrace> {
    let family = MollifierFamily::from_scales_unchecked(eps_list.to_vec(), 0.0)?;
    let target = tv_phi_c(u, spec);
    let rows = eps_list
        .iter()
        .map(|&e| Ok(DemoRow::new(e, tv_phi_c_eps(u, spec, &family, e)?, target, vec![])))
        .collect::<Result<Vec<_>>>()?;
    let last_ok = rows
        .last()
        .is_some_and(|r| r.rel_error <= COMPACT_TOL || (target == 0.0 && r.measured == 0.0));
    let approaching = rows.windows(2).all(|p| p[1].rel_error <= p[0].rel_error + 1e-12);
    Ok(DemoTrace {
        name: "compact",
        param_name: "eps",
        extra_names: vec![],
        rows,
        passed: last_ok && approaching,
        summary: format!("error non-increasing as eps decreases, within {COMPACT_TOL} at the smallest eps"),
    })
}

pub const DEMO_NAMES: [&str; 5] = ["ramp", "step", "linlimit", "annihilation", "compact"];

/// Runs a demo with its default parameters.
pub fn run_default(name: &str) -> Result<DemoTrace> {
    match name {
        "ramp" => demo_ramp_blowup(0.5, &[1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]),
        "step" => demo_step_vanishing(0.5, &[2, 8, 32, 128], 1.0 / 512.0),
        "linlimit" => demo_linearized_limit(0.5, 4.0, &[1.0, 0.5, 0.25, 0.1, 0.05, 0.01, 0.001]),
        "annihilation" => demo_annihilation(&[1, 2, 4, 8, 16, 32, 64], &MollifierFamily::dyadic(8.0, 3, 1.0)?),
        "compact" => demo_compact_convergence(
            &synthetic::gaussian_blob(64, 100.0, 8.0),
            &[4.0, 2.0, 1.0, 0.5, 0.25],
            &PhiSpec::power(0.5)?,
        ),
        other => Err(Error::Config(format!("unknown demo {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_examples() {
        let t = demo_ramp_blowup(0.5, &[4, 1]).unwrap();
        assert!((t.rows[0].measured - 2.0).abs() < 1e-12);
        assert_eq!(t.rows[0].analytic, 2.0);
        assert!((t.rows[1].measured - 1.0).abs() < 1e-12);
        let t = demo_ramp_blowup(0.3, &[100]).unwrap();
        assert!((t.rows[0].analytic - 25.118_864_315_095_8).abs() < 1e-9);
        assert!(t.passed);
        assert!(demo_ramp_blowup(1.0, &[2]).is_err());
    }

    #[test]
    fn step_examples() {
        let t = demo_step_vanishing(0.5, &[2, 8], 1.0 / 512.0).unwrap();
        assert!((t.rows[0].measured - 1.0).abs() < 1e-9);
        assert!((t.rows[1].analytic - 0.5).abs() < 1e-12);
        assert!(t.passed);
        assert!(demo_step_vanishing(0.5, &[256], 1.0 / 512.0).is_err());
    }

    #[test]
    fn linlimit_examples() {
        let t = demo_linearized_limit(0.5, 4.0, &[0.01, 0.25]).unwrap();
        assert!((t.rows[0].measured - 0.26).abs() < 1e-12);
        assert_eq!(t.rows[0].analytic, 0.25);
        let knee = &t.rows[1];
        assert!((knee.extra[0] - knee.extra[1]).abs() < 1e-12);
        assert!(t.passed);
    }

    #[test]
    fn rel_error_column_is_consistent() {
        for name in DEMO_NAMES {
            let t = run_default(name).unwrap();
            for r in &t.rows {
                assert!((r.rel_error - rel_error(r.measured, r.analytic)).abs() <= 1e-12);
            }
            assert_eq!(t.to_csv().lines().count(), t.rows.len() + 1);
        }
    }

    #[test]
    fn compact_on_constant_is_zero() {
        let t =
            demo_compact_convergence(&Image::filled(16, 16, 3.0), &[2.0, 1.0], &PhiSpec::power(0.5).unwrap()).unwrap();
        assert!(t.rows.iter().all(|r| r.measured == 0.0));
        assert!(t.passed);
    }

    #[test]
    fn unknown_demo() {
        assert!(run_default("nope").is_err());
    }
}
