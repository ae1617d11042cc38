//! Momentum-space amplitudes by direct quadrature of the unitary Fourier
//! integral `ψ̃(k) = (2π)^{-1/2} ∫ ψ(r) e^{-ikr} dr`.
//!
//! Radial functions are zero-extended to `r < 0`, so the integral runs over
//! the sampled half-line only. Every k-point is an independent Simpson sum
//! over the position grid; the k-points are evaluated in parallel and
//! collected in grid order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{simpson_weights, NumericsError};
use crate::wavefunction::{Domain, SampledFunction, WavefunctionError};

pub const DEFAULT_MOMENTUM_POINTS: usize = 4096;
/// Automatic k_max is `K_MAX_FACTOR · δ · max(1, λ)`.
pub const K_MAX_FACTOR: f64 = 40.0;
/// Missing momentum mass at or above this fraction raises the truncation flag.
pub const TRUNCATION_WARNING: f64 = 0.01;

/// Phase factors are recomputed exactly every this many grid steps.
const RESEED_INTERVAL: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid momentum grid: {0}")]
    InvalidGrid(String),
    #[error("expected a position-space function")]
    WrongDomain,
    #[error(transparent)]
    Wavefunction(#[from] WavefunctionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Symmetric grid of `points` momenta on `[-k_max, k_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumGrid {
    pub k_max: f64,
    pub points: usize,
}

impl MomentumGrid {
    pub fn new(k_max: f64, points: usize) -> Result<Self, SpectralError> {
        if !(k_max > 0.0) || !k_max.is_finite() {
            return Err(SpectralError::InvalidGrid(format!(
                "k_max must be positive, got {k_max}"
            )));
        }
        if points < 2 {
            return Err(SpectralError::InvalidGrid(format!(
                "need at least 2 momentum points, got {points}"
            )));
        }
        Ok(Self { k_max, points })
    }

    /// Default extent for a state with screening δ and decay exponent λ.
    pub fn auto_k_max(delta: f64, lambda: f64) -> f64 {
        K_MAX_FACTOR * delta * lambda.max(1.0)
    }

    /// Abscissae, exactly antisymmetric: `k[N-1-i] == -k[i]`.
    pub fn abscissae(&self) -> Vec<f64> {
        let span = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.k_max * ((2 * i) as f64 - span) / span)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumGridSpec {
    pub points: usize,
    /// `None` uses [`MomentumGrid::auto_k_max`].
    pub k_max: Option<f64>,
}

impl Default for MomentumGridSpec {
    fn default() -> Self {
        Self {
            points: DEFAULT_MOMENTUM_POINTS,
            k_max: None,
        }
    }
}

impl MomentumGridSpec {
    pub fn resolve(&self, delta: f64, lambda: f64) -> Result<MomentumGrid, SpectralError> {
        MomentumGrid::new(
            self.k_max
                .unwrap_or_else(|| MomentumGrid::auto_k_max(delta, lambda)),
            self.points,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumTransform {
    pub function: SampledFunction,
    /// `∫|ψ̃|²dk / ∫|ψ|²dr` on the chosen grids.
    pub captured_mass: f64,
    /// Set when at least 1% of the momentum mass falls outside the grid.
    pub truncated: bool,
}

/// Fourier transform of a uniformly sampled position-space function.
pub fn fourier_transform(
    f: &SampledFunction,
    grid: &MomentumGrid,
) -> Result<MomentumTransform, SpectralError> {
    if f.domain() != Domain::Position {
        return Err(SpectralError::WrongDomain);
    }
    let h = f.step()?;
    let r = f.abscissae();
    let weights = simpson_weights(r.len(), h)?;
    let weighted: Vec<Complex64> = f
        .amplitudes()
        .iter()
        .zip(&weights)
        .map(|(a, w)| a * *w)
        .collect();
    let prefactor = (2.0 * PI).sqrt().recip();

    let ks = grid.abscissae();
    let amplitudes: Vec<Complex64> = ks
        .par_iter()
        .map(|&k| prefactor * phase_sum(&weighted, r, h, k))
        .collect();

    let function = SampledFunction::new(ks, amplitudes, Domain::Momentum)?;
    let captured_mass = function.norm_squared()? / f.norm_squared()?;
    Ok(MomentumTransform {
        function,
        captured_mass,
        truncated: 1.0 - captured_mass >= TRUNCATION_WARNING,
    })
}

/// `Σ_j w_j ψ_j e^{-ik r_j}` with the phase advanced by a fixed rotation per
/// step and re-seeded from `sin_cos` every [`RESEED_INTERVAL`] steps.
fn phase_sum(weighted: &[Complex64], r: &[f64], h: f64, k: f64) -> Complex64 {
    let (s, c) = (-k * h).sin_cos();
    let step = Complex64::new(c, s);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut phase = Complex64::new(1.0, 0.0);
    for (j, (wpsi, &rj)) in weighted.iter().zip(r).enumerate() {
        if j % RESEED_INTERVAL == 0 {
            let (s, c) = (-k * rj).sin_cos();
            phase = Complex64::new(c, s);
        }
        acc += wpsi * phase;
        phase *= step;
    }
    acc
}

/// `|∫|ψ|²dr - ∫|ψ̃|²dk|`.
pub fn parseval_residual(
    position: &SampledFunction,
    momentum: &SampledFunction,
) -> Result<f64, SpectralError> {
    Ok((position.norm_squared()? - momentum.norm_squared()?).abs())
}
