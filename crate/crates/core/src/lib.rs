//! Nonconvex total-variation energies for grayscale images.
//!
//! The crate covers the discrete `TV^φ` functionals for power-law, linearized
//! and Huber integrands, the multiscale functional `η` on lifted gradients, a
//! majorize–minimize denoiser for `½‖u - z‖² + α TV^φ(u) + η(DU)`, log-histogram
//! fitting of gradient statistics, PSNR/SSIM, and scripted numerical
//! witnesses of the limiting behaviour of these energies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod demos;
pub mod energy;
pub mod error;
pub mod image;
pub mod metrics;
pub mod multiscale;
pub mod pgm;
pub mod solver;
pub mod stats;
pub mod synthetic;

pub use energy::{
    area_functional, tv_phi_c, tv_phi_c_eps, tv_phi_d, tv_phi_sc, validate_linear_growth, LinearGrowthCheck, PhiSpec,
    Smoothed,
};
pub use error::{Error, Result};
pub use image::{add_gaussian_noise, convolve, divergence, gradient, GradientField, Image, Kernel};
pub use metrics::{psnr, ssim, MetricPair};
pub use multiscale::{
    eta, eta_bar_level, eta_gradient, eta_level, eta_level_decreasing_check, lift, LiftedGradient, MollifierFamily,
};
pub use solver::{denoise, objective, sweep_m, Cutoff, Objective, SolverConfig, SolverReport, SweepRow};
pub use stats::{fit_linearized, fit_power, gradient_histogram, split_edges, FitResult, Histogram};
