//! Radial eigenfunctions, sampled functions and probability densities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{
    energy_closed_form, BoundLevel, ModelError, ModelParams, QuantumNumbers, Rejection,
};
use crate::numerics::{simpson_samples, uniform_step, NumericsError};
use crate::specfun::{SpecfunError, TerminatingSeries};

/// Default number of radial samples.
pub const DEFAULT_RADIAL_POINTS: usize = 4096;
/// The grid starts at `R_MIN_SCALE / δ` instead of at the origin.
pub const R_MIN_SCALE: f64 = 1e-6;
/// Automatic `r_max` is where the density drops below this fraction of its peak.
pub const TAIL_FRACTION: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WavefunctionError {
    #[error("no bound state: {0}")]
    NoBoundState(Rejection),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cannot normalize: norm is {0}")]
    BadNorm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Position,
    Momentum,
}

/// Extent and resolution of a grid: `extent` is r_max or k_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub extent: f64,
    pub points: usize,
}

/// Complex samples on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    abscissae: Vec<f64>,
    amplitudes: Vec<Complex64>,
    domain: Domain,
}

impl SampledFunction {
    pub fn new(
        abscissae: Vec<f64>,
        amplitudes: Vec<Complex64>,
        domain: Domain,
    ) -> Result<Self, WavefunctionError> {
        if abscissae.len() < 2 {
            return Err(WavefunctionError::InvalidGrid(format!(
                "need at least 2 points, got {}",
                abscissae.len()
            )));
        }
        if abscissae.len() != amplitudes.len() {
            return Err(WavefunctionError::InvalidGrid(format!(
                "{} abscissae but {} amplitudes",
                abscissae.len(),
                amplitudes.len()
            )));
        }
        if abscissae.iter().any(|x| !x.is_finite()) || !abscissae.windows(2).all(|w| w[0] < w[1]) {
            return Err(WavefunctionError::InvalidGrid(
                "abscissae must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            abscissae,
            amplitudes,
            domain,
        })
    }

    /// Real samples of a function on a uniform grid.
    pub fn from_real<F: Fn(f64) -> f64>(
        abscissae: Vec<f64>,
        f: F,
        domain: Domain,
    ) -> Result<Self, WavefunctionError> {
        let amplitudes = abscissae
            .iter()
            .map(|&x| Complex64::new(f(x), 0.0))
            .collect();
        Self::new(abscissae, amplitudes, domain)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            extent: self.abscissae[self.len() - 1],
            points: self.len(),
        }
    }

    pub fn step(&self) -> Result<f64, WavefunctionError> {
        uniform_step(&self.abscissae)
            .ok_or_else(|| WavefunctionError::InvalidGrid("grid is not uniform".into()))
    }

    /// `∫|f|²` by composite Simpson on the (uniform) grid.
    pub fn norm_squared(&self) -> Result<f64, WavefunctionError> {
        let h = self.step()?;
        let y: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        Ok(simpson_samples(&y, h)?)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            abscissae: self.abscissae.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            domain: self.domain,
        }
    }

    /// Number of sign changes of the real part, ignoring samples whose
    /// magnitude is below `1e-10` of the maximum.
    pub fn sign_changes(&self) -> usize {
        let peak = self
            .amplitudes
            .iter()
            .map(|a| a.re.abs())
            .fold(0.0, f64::max);
        let floor = 1e-10 * peak;
        let mut last_sign = 0.0;
        let mut changes = 0;
        for a in &self.amplitudes {
            if a.re.abs() <= floor {
                continue;
            }
            let sign = a.re.signum();
            if last_sign != 0.0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
        changes
    }
}

/// Real, non-negative density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub domain: Domain,
}

impl Density {
    pub fn integral(&self) -> Result<f64, WavefunctionError> {
        let h = uniform_step(&self.abscissae)
            .ok_or_else(|| WavefunctionError::InvalidGrid("grid is not uniform".into()))?;
        Ok(simpson_samples(&self.values, h)?)
    }
}

/// Scales `f` so that `∫|f|² = 1`; also returns the applied factor.
pub fn normalize(f: &SampledFunction) -> Result<(SampledFunction, f64), WavefunctionError> {
    let norm_sq = f.norm_squared()?;
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(WavefunctionError::BadNorm(norm_sq));
    }
    let constant = norm_sq.sqrt().recip();
    Ok((f.scaled(Complex64::new(constant, 0.0)), constant))
}

/// Pointwise `|ψ|²`.
pub fn probability_density(f: &SampledFunction) -> Density {
    Density {
        abscissae: f.abscissae.clone(),
        values: f.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        domain: f.domain,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGridSpec {
    pub points: usize,
    /// `None` picks r_max from the tail of the density.
    pub r_max: Option<f64>,
}

impl Default for RadialGridSpec {
    fn default() -> Self {
        Self {
            points: DEFAULT_RADIAL_POINTS,
            r_max: None,
        }
    }
}

/// A bound eigenstate in closed form,
///
/// ```text
/// ψ(r) = (2πr)^{-1/2} ₂F₁(-n, λ+ν+√(ε+β₀+β₂); 2λ+1; s) s^λ (1-s)^ν,   s = e^{-δr}
/// ```
///
/// with the azimuthal phase `e^{imφ}` dropped. Amplitudes are unnormalized.
#[derive(Debug, Clone)]
pub struct Eigenstate {
    params: ModelParams,
    qn: QuantumNumbers,
    level: BoundLevel,
    series: TerminatingSeries,
}

impl Eigenstate {
    pub fn new(params: &ModelParams, qn: QuantumNumbers) -> Result<Self, WavefunctionError> {
        let report = energy_closed_form(params, qn)?;
        let level = report.level.map_err(WavefunctionError::NoBoundState)?;
        let (a, _, c) = level.set.hypergeometric_parameters();
        // The quantization condition makes the second numerator parameter -n.
        let series = TerminatingSeries::new(-(qn.n as f64), a, c)?;
        Ok(Self {
            params: *params,
            qn,
            level,
            series,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn quantum_numbers(&self) -> QuantumNumbers {
        self.qn
    }

    pub fn level(&self) -> &BoundLevel {
        &self.level
    }

    /// `R(r) = s^λ (1-s)^ν ₂F₁(...; s)`, evaluated in log space so that large
    /// exponents neither overflow nor underflow prematurely.
    pub fn radial_factor(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        let x = self.params.delta * r;
        let set = &self.level.set;
        let log_envelope = -set.lambda * x + set.nu * (-(-x).exp_m1()).ln();
        self.series.eval((-x).exp()) * log_envelope.exp()
    }

    /// `ψ(r)`, zero for `r <= 0`.
    pub fn psi(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        self.radial_factor(r) / (2.0 * PI * r).sqrt()
    }

    fn log_density(&self, r: f64) -> f64 {
        let x = self.params.delta * r;
        let set = &self.level.set;
        let log_envelope = -set.lambda * x + set.nu * (-(-x).exp_m1()).ln();
        let poly = self.series.eval((-x).exp()).abs();
        2.0 * (log_envelope + poly.ln()) - (2.0 * PI * r).ln()
    }

    /// Coefficient `q(r)` of the Greene-Aldrich radial equation `R'' + q R = 0`.
    ///
    /// With `s = e^{-δr}` this is the transformed equation in s multiplied
    /// through by `δ²s²`:
    /// `q = δ² [-ε + β₀ s/(1-s) - β₁ s/(1-s)² - β₂ s²/(1-s)² - η/(1-s)²]`.
    pub fn radial_equation_coefficient(&self, r: f64) -> f64 {
        let x = self.params.delta * r;
        let s = (-x).exp();
        let t = -(-x).exp_m1();
        let set = &self.level.set;
        let u = s / t;
        self.params.delta.powi(2)
            * (-set.epsilon + set.beta0 * u
                - set.beta1 * u / t
                - set.beta2 * u * u
                - set.eta / (t * t))
    }

    pub fn r_min(&self) -> f64 {
        R_MIN_SCALE / self.params.delta
    }

    /// Smallest radius beyond which the density stays below
    /// `TAIL_FRACTION` of its maximum, found on a geometric scan.
    pub fn auto_r_max(&self) -> f64 {
        const SCAN_POINTS: usize = 20_000;
        let lo = self.r_min();
        let hi = 1e8 / self.params.delta;
        let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
        let radii: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| lo * ratio.powi(i as i32))
            .collect();
        let logs: Vec<f64> = radii.iter().map(|&r| self.log_density(r)).collect();
        let peak = logs
            .iter()
            .cloned()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let threshold = peak + TAIL_FRACTION.ln();
        let last = logs.iter().rposition(|&v| v >= threshold).unwrap_or(0);
        radii[(last + 1).min(SCAN_POINTS - 1)]
    }

    pub fn grid(&self, spec: &RadialGridSpec) -> Result<Vec<f64>, WavefunctionError> {
        if spec.points < 2 {
            return Err(WavefunctionError::InvalidGrid(format!(
                "need at least 2 radial points, got {}",
                spec.points
            )));
        }
        let r_min = self.r_min();
        let r_max = spec.r_max.unwrap_or_else(|| self.auto_r_max());
        if !(r_max > r_min) {
            return Err(WavefunctionError::InvalidGrid(format!(
                "r_max = {r_max} must exceed r_min = {r_min}"
            )));
        }
        Ok(linspace(r_min, r_max, spec.points))
    }

    /// Largest interior residual of `R'' + qR = 0` on the grid of `spec`,
    /// relative to `max |qR|`. `R''` comes from the fourth-order five-point
    /// stencil, so the two outermost points at each end are skipped.
    pub fn ode_residual(&self, spec: &RadialGridSpec) -> Result<f64, WavefunctionError> {
        let r = self.grid(spec)?;
        if r.len() < 5 {
            return Err(WavefunctionError::InvalidGrid(
                "need at least 5 points".into(),
            ));
        }
        let h = r[1] - r[0];
        let big_r: Vec<f64> = r.iter().map(|&x| self.radial_factor(x)).collect();
        let q_r: Vec<f64> = r
            .iter()
            .zip(&big_r)
            .map(|(&x, &v)| self.radial_equation_coefficient(x) * v)
            .collect();
        let scale = q_r[2..r.len() - 2]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = (2..r.len() - 2)
            .map(|i| {
                let d2 = (-big_r[i - 2] + 16.0 * big_r[i - 1] - 30.0 * big_r[i]
                    + 16.0 * big_r[i + 1]
                    - big_r[i + 2])
                    / (12.0 * h * h);
                (d2 + q_r[i]).abs()
            })
            .fold(0.0f64, f64::max);
        Ok(worst / scale)
    }

    pub fn sample(&self, spec: &RadialGridSpec) -> Result<SampledFunction, WavefunctionError> {
        let grid = self.grid(spec)?;
        SampledFunction::from_real(grid, |r| self.psi(r), Domain::Position)
    }
}

/// Samples the (unnormalized) radial eigenfunction for `qn`.
pub fn radial_eigenfunction(
    params: &ModelParams,
    qn: QuantumNumbers,
    spec: &RadialGridSpec,
) -> Result<SampledFunction, WavefunctionError> {
    Eigenstate::new(params, qn)?.sample(spec)
}

/// `n` points from `a` to `b` inclusive, evenly spaced.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
        .collect()
}
