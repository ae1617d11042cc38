//! Shannon differential entropies of position and momentum densities and the
//! entropic uncertainty bound `S_r + S_k ≥ 1 + ln π`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{greene_aldrich_ratio, BoundLevel, ModelError, ModelParams, QuantumNumbers};
use crate::numerics::simpson_samples;
use crate::spectral::{
    fourier_transform, parseval_residual, MomentumGrid, MomentumGridSpec, SpectralError,
};
use crate::wavefunction::{
    normalize, probability_density, Density, Domain, Eigenstate, RadialGridSpec, SampledFunction,
    WavefunctionError,
};

/// `1 + ln π`, the one-dimensional bound in nats.
pub const BBM_BOUND: f64 = 2.144_729_885_849_400_2;
/// A report passes when `sum - BBM_BOUND >= -BBM_SLACK`.
pub const BBM_SLACK: f64 = 1e-3;
/// Density values below this contribute nothing to `-ρ ln ρ`.
pub const DENSITY_FLOOR: f64 = 1e-30;
/// Allowed `|∫ρ - 1|` on entry to the entropy integrals.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;
/// Allowed entropy change when both grids are doubled.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("expected a {expected:?} density, got {found:?}")]
    WrongDomain { expected: Domain, found: Domain },
    #[error("density integrates to {0}, not 1")]
    Unnormalized(f64),
    #[error("density has a negative or non-finite value {value} at index {index}")]
    InvalidDensity { index: usize, value: f64 },
    #[error(transparent)]
    Wavefunction(#[from] WavefunctionError),
}

/// `-∫ ρ ln ρ` over the density's grid, with `0 ln 0 = 0`.
pub fn shannon_entropy(rho: &Density) -> Result<f64, EntropyError> {
    if let Some((index, &value)) = rho
        .values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(EntropyError::InvalidDensity { index, value });
    }
    let mass = rho.integral()?;
    if !((mass - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
        return Err(EntropyError::Unnormalized(mass));
    }
    let integrand: Vec<f64> = rho
        .values
        .iter()
        .map(|&p| if p < DENSITY_FLOOR { 0.0 } else { -p * p.ln() })
        .collect();
    let h = rho.abscissae[1] - rho.abscissae[0];
    simpson_samples(&integrand, h).map_err(|e| EntropyError::Wavefunction(e.into()))
}

pub fn shannon_position(rho: &Density) -> Result<f64, EntropyError> {
    expect_domain(rho, Domain::Position)?;
    shannon_entropy(rho)
}

pub fn shannon_momentum(rho: &Density) -> Result<f64, EntropyError> {
    expect_domain(rho, Domain::Momentum)?;
    shannon_entropy(rho)
}

fn expect_domain(rho: &Density, expected: Domain) -> Result<(), EntropyError> {
    if rho.domain != expected {
        return Err(EntropyError::WrongDomain {
            expected,
            found: rho.domain,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s_r: f64,
    pub s_k: f64,
    pub sum: f64,
    pub bbm_bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub norm_residual_r: f64,
    pub norm_residual_k: f64,
}

impl EntropyReport {
    pub fn with_residuals(mut self, norm_residual_r: f64, norm_residual_k: f64) -> Self {
        self.norm_residual_r = norm_residual_r;
        self.norm_residual_k = norm_residual_k;
        self
    }
}

pub fn bbm_check(s_r: f64, s_k: f64) -> EntropyReport {
    let sum = s_r + s_k;
    let margin = sum - BBM_BOUND;
    EntropyReport {
        s_r,
        s_k,
        sum,
        bbm_bound: BBM_BOUND,
        margin,
        pass: margin >= -BBM_SLACK,
        norm_residual_r: 0.0,
        norm_residual_k: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineGrids {
    pub radial: RadialGridSpec,
    pub momentum: MomentumGridSpec,
    /// Repeat with both point counts doubled and compare entropies.
    pub convergence_check: bool,
}

impl Default for PipelineGrids {
    fn default() -> Self {
        Self {
            radial: RadialGridSpec::default(),
            momentum: MomentumGridSpec::default(),
            convergence_check: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Eigenfunction,
    PositionNormalization,
    PositionEntropy,
    FourierTransform,
    MomentumNormalization,
    MomentumEntropy,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Eigenfunction => "eigenfunction",
            Stage::PositionNormalization => "position normalization",
            Stage::PositionEntropy => "position entropy",
            Stage::FourierTransform => "fourier transform",
            Stage::MomentumNormalization => "momentum normalization",
            Stage::MomentumEntropy => "momentum entropy",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineCause {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Wavefunction(#[from] WavefunctionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage}: {cause}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub cause: PipelineCause,
}

impl PipelineError {
    fn at(stage: Stage) -> impl FnOnce(PipelineCause) -> Self {
        move |cause| Self { stage, cause }
    }

    /// True when the parameter point simply has no bound state.
    pub fn is_no_bound_state(&self) -> bool {
        matches!(
            self.cause,
            PipelineCause::Wavefunction(WavefunctionError::NoBoundState(_))
                | PipelineCause::Model(ModelError::NoBoundState(_))
        )
    }
}

/// Everything the pipeline learned about one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOutcome {
    pub report: EntropyReport,
    pub level: BoundLevel,
    pub r_max: f64,
    pub k_max: f64,
    pub parseval_residual: f64,
    pub captured_mass: f64,
    pub truncated: bool,
    /// `max(|ΔS_r|, |ΔS_k|)` under doubled point counts, when checked.
    pub entropy_shift: Option<f64>,
    pub under_resolved: bool,
    /// `(δ/(1 - e^{-δ⟨r⟩}))² ⟨r⟩²`, how far the centrifugal approximation
    /// strays from `1/r²` at the mean radius.
    pub greene_aldrich_ratio: f64,
    pub mean_radius: f64,
}

struct Pass {
    s_r: f64,
    s_k: f64,
    position: SampledFunction,
    norm_constant: f64,
    parseval: f64,
    captured_mass: f64,
    truncated: bool,
}

/// eigenfunction → normalize → S_r, Fourier transform → renormalize → S_k,
/// then the bound check.
///
/// `norm_residual_r` is `|∫|cψ|² - 1|` with the normalization constant `c`
/// from the default grid re-integrated on the doubled grid (zero when the
/// convergence check is off). `norm_residual_k` is the Parseval residual
/// before the momentum density is renormalized.
pub fn entropy_pipeline(
    params: &ModelParams,
    qn: QuantumNumbers,
    grids: &PipelineGrids,
) -> Result<PipelineOutcome, PipelineError> {
    let at = PipelineError::at;
    let state = Eigenstate::new(params, qn).map_err(|e| at(Stage::Eigenfunction)(e.into()))?;
    let r_max = grids.radial.r_max.unwrap_or_else(|| state.auto_r_max());
    let k_grid = grids
        .momentum
        .resolve(params.delta, state.level().set.lambda)
        .map_err(|e| at(Stage::FourierTransform)(e.into()))?;

    let radial = RadialGridSpec {
        points: grids.radial.points,
        r_max: Some(r_max),
    };
    let base = single_pass(&state, &radial, &k_grid)?;

    let (entropy_shift, norm_residual_r) = if grids.convergence_check {
        let fine_radial = RadialGridSpec {
            points: 2 * radial.points,
            ..radial
        };
        let fine_k = MomentumGrid::new(k_grid.k_max, 2 * k_grid.points)
            .map_err(|e| at(Stage::FourierTransform)(e.into()))?;
        let fine = single_pass(&state, &fine_radial, &fine_k)?;
        let unnormalized = state
            .sample(&fine_radial)
            .map_err(|e| at(Stage::Eigenfunction)(e.into()))?;
        let mass = unnormalized
            .norm_squared()
            .map_err(|e| at(Stage::PositionNormalization)(e.into()))?;
        (
            Some((fine.s_r - base.s_r).abs().max((fine.s_k - base.s_k).abs())),
            (mass * base.norm_constant.powi(2) - 1.0).abs(),
        )
    } else {
        (None, 0.0)
    };

    let rho = probability_density(&base.position);
    let weighted: Vec<f64> = rho
        .abscissae
        .iter()
        .zip(&rho.values)
        .map(|(r, p)| r * p)
        .collect();
    let h = rho.abscissae[1] - rho.abscissae[0];
    let mean_radius = simpson_samples(&weighted, h)
        .map_err(|e| at(Stage::PositionEntropy)(WavefunctionError::from(e).into()))?;
    let ga = greene_aldrich_ratio(params.delta, mean_radius)
        .map_err(|e| at(Stage::Eigenfunction)(e.into()))?;

    Ok(PipelineOutcome {
        report: bbm_check(base.s_r, base.s_k).with_residuals(norm_residual_r, base.parseval),
        level: *state.level(),
        r_max,
        k_max: k_grid.k_max,
        parseval_residual: base.parseval,
        captured_mass: base.captured_mass,
        truncated: base.truncated,
        entropy_shift,
        under_resolved: entropy_shift.is_some_and(|d| d > CONVERGENCE_TOLERANCE),
        greene_aldrich_ratio: ga,
        mean_radius,
    })
}

fn single_pass(
    state: &Eigenstate,
    radial: &RadialGridSpec,
    k_grid: &MomentumGrid,
) -> Result<Pass, PipelineError> {
    let at = PipelineError::at;
    let raw = state
        .sample(radial)
        .map_err(|e| at(Stage::Eigenfunction)(e.into()))?;
    let (position, norm_constant) =
        normalize(&raw).map_err(|e| at(Stage::PositionNormalization)(e.into()))?;
    let s_r = shannon_position(&probability_density(&position))
        .map_err(|e| at(Stage::PositionEntropy)(e.into()))?;

    let transform =
        fourier_transform(&position, k_grid).map_err(|e| at(Stage::FourierTransform)(e.into()))?;
    let parseval = parseval_residual(&position, &transform.function)
        .map_err(|e| at(Stage::FourierTransform)(e.into()))?;
    let (momentum, _) =
        normalize(&transform.function).map_err(|e| at(Stage::MomentumNormalization)(e.into()))?;
    let s_k = shannon_momentum(&probability_density(&momentum))
        .map_err(|e| at(Stage::MomentumEntropy)(e.into()))?;

    Ok(Pass {
        s_r,
        s_k,
        position,
        norm_constant,
        parseval,
        captured_mass: transform.captured_mass,
        truncated: transform.truncated,
    })
}
