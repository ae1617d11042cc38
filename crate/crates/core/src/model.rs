//! Physical model: parameters, effective potential, the Greene-Aldrich
//! substitution and the closed-form bound-state spectrum.
//!
//! Everything downstream works with the dimensionless couplings
//!
//! ```text
//! ε  = -2μE / (ħ²δ²)          β₀ = 2μV₁ / (ħ²δ)
//! β₁ = (2μω_c / ħδ)(m/α² + ξ/α)    β₂ = μ²ω_c² / (ħ²δ²)
//! η  = (m/α + ξ)² - 1/4
//! ```
//!
//! and the ansatz exponents `λ = √(ε+η)` (decay at large r) and
//! `ν = 1/2 + √(1/4 + β₁ + β₂ + η)` (behaviour at the origin).

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{bisect, geometric_bracket, NumericsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("λ is complex: ε + η = {0} < 0")]
    ComplexLambda(f64),
    #[error("ν is complex: 1/4 + β₁ + β₂ + η = {0} < 0")]
    ComplexNu(f64),
    #[error("no bound state: {0}")]
    NoBoundState(Rejection),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Physical constants, field and defect parameters.
///
/// Defaults use natural units `ħ = μ = e = c = 1`, in which `ω_c = B` and the
/// flux quantum is `Φ₀ = 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Effective mass μ.
    pub mass: f64,
    pub hbar: f64,
    /// Particle charge e (only used to convert B and Φ_AB).
    pub charge: f64,
    /// Speed of light c (only used to convert B and Φ_AB).
    pub light_speed: f64,
    /// Screening parameter δ.
    pub delta: f64,
    /// Yukawa coupling V₁.
    pub v1: f64,
    /// Cyclotron frequency ω_c = eB/(μc).
    pub omega_c: f64,
    /// Aharonov-Bohm flux in units of the flux quantum, ξ = Φ_AB/Φ₀.
    pub xi: f64,
    /// Disclination parameter α.
    pub alpha: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            charge: 1.0,
            light_speed: 1.0,
            delta: 0.1,
            v1: 1.0,
            omega_c: 0.0,
            xi: 0.0,
            alpha: 1.0,
        }
    }
}

impl ModelParams {
    /// Flux quantum Φ₀ = hc/e = 2πħc/e.
    pub fn flux_quantum(&self) -> f64 {
        2.0 * PI * self.hbar * self.light_speed / self.charge
    }

    /// Magnetic field B corresponding to the stored cyclotron frequency.
    pub fn field(&self) -> f64 {
        self.omega_c * self.mass * self.light_speed / self.charge
    }

    /// Aharonov-Bohm flux Φ_AB corresponding to the stored ξ.
    pub fn flux(&self) -> f64 {
        self.xi * self.flux_quantum()
    }

    /// Sets ω_c from a magnetic field B using the current mass, charge and c.
    pub fn set_field(&mut self, b: f64) {
        self.omega_c = self.charge * b / (self.mass * self.light_speed);
    }

    /// Sets ξ from a flux Φ_AB using the current ħ, charge and c.
    pub fn set_flux(&mut self, phi_ab: f64) {
        self.xi = phi_ab / self.flux_quantum();
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("mass", self.mass),
            ("hbar", self.hbar),
            ("charge", self.charge),
            ("light_speed", self.light_speed),
            ("delta", self.delta),
            ("alpha", self.alpha),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        let non_negative = [("v1", self.v1), ("omega_c", self.omega_c)];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be non-negative and finite",
                });
            }
        }
        if !self.xi.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "xi",
                value: self.xi,
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct QuantumNumbers {
    /// Radial index, also the number of nodes of the radial factor.
    pub n: u32,
    /// Magnetic quantum number.
    pub m: i32,
}

impl QuantumNumbers {
    pub fn new(n: u32, m: i32) -> Self {
        Self { n, m }
    }
}

impl fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, m={})", self.n, self.m)
    }
}

/// The energy-independent couplings β₀, β₁, β₂, η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eta: f64,
}

impl Couplings {
    pub fn new(params: &ModelParams, qn: QuantumNumbers) -> Self {
        let ModelParams {
            mass,
            hbar,
            delta,
            v1,
            omega_c,
            xi,
            alpha,
            ..
        } = *params;
        let m = qn.m as f64;
        Self {
            beta0: 2.0 * mass * v1 / (hbar * hbar * delta),
            beta1: 2.0 * mass * omega_c / (hbar * delta) * (m / (alpha * alpha) + xi / alpha),
            beta2: (mass * omega_c / (hbar * delta)).powi(2),
            eta: (m / alpha + xi).powi(2) - 0.25,
        }
    }

    /// The radicand of ν, `1/4 + β₁ + β₂ + η`.
    pub fn nu_radicand(&self) -> f64 {
        0.25 + self.beta1 + self.beta2 + self.eta
    }

    pub fn nu(&self) -> Result<f64, ModelError> {
        let radicand = self.nu_radicand();
        if radicand < 0.0 {
            return Err(ModelError::ComplexNu(radicand));
        }
        Ok(0.5 + radicand.sqrt())
    }

    /// The couplings evaluated at a trial dimensionless energy.
    pub fn at_epsilon(&self, epsilon: f64) -> Result<DimensionlessSet, ModelError> {
        let nu = self.nu()?;
        let lambda_sq = epsilon + self.eta;
        if lambda_sq < 0.0 {
            return Err(ModelError::ComplexLambda(lambda_sq));
        }
        Ok(DimensionlessSet {
            epsilon,
            beta0: self.beta0,
            beta1: self.beta1,
            beta2: self.beta2,
            eta: self.eta,
            lambda: lambda_sq.sqrt(),
            nu,
        })
    }
}

/// Dimensionless couplings together with the ansatz exponents at a given ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionlessSet {
    pub epsilon: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eta: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl DimensionlessSet {
    /// `√(ε + β₀ + β₂)`, the square root appearing in the quantization condition.
    pub fn kappa(&self) -> f64 {
        (self.epsilon + self.beta0 + self.beta2).sqrt()
    }

    /// `(λ + ν) - √(ε + β₀ + β₂) + n`; zero exactly at the n-th bound state.
    pub fn quantization_residual(&self, n: u32) -> f64 {
        self.lambda + self.nu - self.kappa() + n as f64
    }

    /// Parameters `(a, b, c)` of the hypergeometric factor of the eigenfunction.
    pub fn hypergeometric_parameters(&self) -> (f64, f64, f64) {
        let kappa = self.kappa();
        (
            self.lambda + self.nu + kappa,
            self.lambda + self.nu - kappa,
            2.0 * self.lambda + 1.0,
        )
    }
}

/// Builds the [`DimensionlessSet`] for `params`, `qn` at a trial ε.
pub fn dimensionless(
    params: &ModelParams,
    qn: QuantumNumbers,
    epsilon: f64,
) -> Result<DimensionlessSet, ModelError> {
    params.validate()?;
    Couplings::new(params, qn).at_epsilon(epsilon)
}

/// Free-function form of [`DimensionlessSet::quantization_residual`].
pub fn quantization_residual(set: &DimensionlessSet, n: u32) -> f64 {
    set.quantization_residual(n)
}

pub fn energy_from_epsilon(params: &ModelParams, epsilon: f64) -> f64 {
    -(params.hbar * params.delta).powi(2) * epsilon / (2.0 * params.mass)
}

pub fn epsilon_from_energy(params: &ModelParams, energy: f64) -> f64 {
    -2.0 * params.mass * energy / (params.hbar * params.delta).powi(2)
}

/// The effective radial potential, all four terms, with the angular
/// combinations `m/α² + ξ/α` and `(m/α² + ξ)² - 1/4` exactly as they appear
/// in the radial equation before the Greene-Aldrich substitution.
///
/// Note that the centrifugal numerator differs from the η used by the
/// spectrum (`(m/α + ξ)² - 1/4`); for α = 1 or m = 0 they coincide.
pub fn effective_potential(
    params: &ModelParams,
    qn: QuantumNumbers,
    r: f64,
) -> Result<f64, ModelError> {
    params.validate()?;
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    let ModelParams {
        mass,
        hbar,
        delta,
        v1,
        omega_c,
        xi,
        alpha,
        ..
    } = *params;
    let m = qn.m as f64;
    let decay = (-delta * r).exp();
    let one_minus = -(-delta * r).exp_m1();

    let yukawa = -v1 * decay / r;
    let paramagnetic =
        hbar * omega_c * (m / (alpha * alpha) + xi / alpha) * decay / (one_minus * r);
    let diamagnetic = 0.5 * mass * omega_c * omega_c * (decay / one_minus).powi(2);
    let centrifugal =
        hbar * hbar / (2.0 * mass) * ((m / (alpha * alpha) + xi).powi(2) - 0.25) / (r * r);
    Ok(yukawa + paramagnetic + diamagnetic + centrifugal)
}

/// Azimuthal components `(A₁_φ, A₂_φ)` of the vector potential: the screened
/// field term and the Aharonov-Bohm solenoid term.
pub fn vector_potential_phi(params: &ModelParams, r: f64) -> Result<(f64, f64), ModelError> {
    params.validate()?;
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    let x = params.delta * r;
    let field_term = params.field() * (-x).exp() / (params.alpha * -(-x).exp_m1());
    let flux_term = params.flux() / (2.0 * PI * r);
    Ok((field_term, flux_term))
}

/// Ratio of the Greene-Aldrich substitute `δ²/(1-e^{-δr})²` to `1/r²`.
///
/// Equals 1 in the limit δr → 0 and grows monotonically with δr; values far
/// from 1 mean the approximation is not trustworthy at that radius.
pub fn greene_aldrich_ratio(delta: f64, r: f64) -> Result<f64, ModelError> {
    if !(delta > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    let x = delta * r;
    Ok((x / -(-x).exp_m1()).powi(2))
}

/// Why a parameter point has no normalizable bound state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    ComplexNu { radicand: f64 },
    NonPositiveLambda { lambda: f64 },
    NonPositiveEpsilon { epsilon: f64 },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::ComplexNu { radicand } => {
                write!(f, "ν is complex (1/4 + β₁ + β₂ + η = {radicand})")
            }
            Rejection::NonPositiveLambda { lambda } => {
                write!(f, "λ = {lambda} <= 0, eigenfunction does not decay")
            }
            Rejection::NonPositiveEpsilon { epsilon } => {
                write!(f, "ε = {epsilon} <= 0, state is not bound")
            }
        }
    }
}

/// A bound level: energy, ε and the full dimensionless set at that ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundLevel {
    pub energy: f64,
    pub epsilon: f64,
    pub set: DimensionlessSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateReport {
    pub qn: QuantumNumbers,
    pub level: Result<BoundLevel, Rejection>,
}

impl BoundStateReport {
    pub fn exists(&self) -> bool {
        self.level.is_ok()
    }

    pub fn energy(&self) -> Option<f64> {
        self.level.as_ref().ok().map(|l| l.energy)
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.level.as_ref().ok().map(|l| l.epsilon)
    }

    pub fn rejection(&self) -> Option<Rejection> {
        self.level.err()
    }

    pub fn bound(&self) -> Result<&BoundLevel, ModelError> {
        self.level
            .as_ref()
            .map_err(|r| ModelError::NoBoundState(*r))
    }
}

/// Closed-form spectrum.
///
/// With `N = n + ν`, the quantization condition gives
/// `λ = (β₀ + β₂ - η - N²) / (2N)` and
/// `ε = -η + ¼ [(β₀ + β₂ - η - N²) / N]²`, and `E = -ħ²δ²ε / (2μ)`.
/// A non-positive λ is a spurious root of the squared condition and is
/// reported as "no bound state", as is ε <= 0.
pub fn energy_closed_form(
    params: &ModelParams,
    qn: QuantumNumbers,
) -> Result<BoundStateReport, ModelError> {
    params.validate()?;
    let couplings = Couplings::new(params, qn);
    let reject = |rejection| {
        Ok(BoundStateReport {
            qn,
            level: Err(rejection),
        })
    };

    let radicand = couplings.nu_radicand();
    if radicand < 0.0 {
        return reject(Rejection::ComplexNu { radicand });
    }
    let nu = 0.5 + radicand.sqrt();
    let big_n = qn.n as f64 + nu;
    let numerator = couplings.beta0 + couplings.beta2 - couplings.eta - big_n * big_n;
    let lambda = numerator / (2.0 * big_n);
    if !(lambda > 0.0) {
        return reject(Rejection::NonPositiveLambda { lambda });
    }
    let epsilon = -couplings.eta + 0.25 * (numerator / big_n).powi(2);
    if !(epsilon > 0.0) {
        return reject(Rejection::NonPositiveEpsilon { epsilon });
    }
    let set = DimensionlessSet {
        epsilon,
        beta0: couplings.beta0,
        beta1: couplings.beta1,
        beta2: couplings.beta2,
        eta: couplings.eta,
        lambda,
        nu,
    };
    Ok(BoundStateReport {
        qn,
        level: Ok(BoundLevel {
            energy: energy_from_epsilon(params, epsilon),
            epsilon,
            set,
        }),
    })
}

/// Root of the quantization condition in ε found by bracketing and bisection,
/// without using the closed form. Serves as an independent check on
/// [`energy_closed_form`].
///
/// The residual `g(ε) = √(ε+η) + ν - √(ε+β₀+β₂) + n` tends to `ν + n > 0` as
/// ε → ∞, so the upper end of the bracket is doubled until g turns positive.
pub fn solve_quantization(params: &ModelParams, qn: QuantumNumbers) -> Result<f64, ModelError> {
    params.validate()?;
    let couplings = Couplings::new(params, qn);
    couplings.nu()?;
    let residual = |epsilon: f64| match couplings.at_epsilon(epsilon) {
        Ok(set) => set.quantization_residual(qn.n),
        Err(_) => f64::NAN,
    };

    let lo = 1e-8f64.max(-couplings.eta);
    let g_lo = residual(lo);
    if !(g_lo < 0.0) {
        return Err(ModelError::NoBoundState(Rejection::NonPositiveLambda {
            lambda: f64::NAN,
        }));
    }
    let mut hi = (couplings.beta0 + couplings.beta2).max(2.0 * lo).max(1.0);
    while residual(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(NumericsError::NoSignChange {
                lo,
                hi,
                f_lo: g_lo,
                f_hi: f64::NAN,
            }
            .into());
        }
    }
    let (a, b) = geometric_bracket(residual, lo, hi, 256).ok_or(NumericsError::NoSignChange {
        lo,
        hi,
        f_lo: g_lo,
        f_hi: residual(hi),
    })?;
    let root = bisect(residual, a, b, 1e-12)?;
    Ok(root.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> ModelParams {
        ModelParams {
            delta: 1.0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn zero_field_couplings() {
        let set = dimensionless(&unit(), QuantumNumbers::new(0, 0), 1.0).unwrap();
        assert_eq!(set.beta0, 2.0);
        assert_eq!(set.beta1, 0.0);
        assert_eq!(set.beta2, 0.0);
    }

    #[test]
    fn eta_for_zero_angular_momentum() {
        for alpha in [0.1, 0.5, 1.0, 3.0] {
            let p = ModelParams { alpha, ..unit() };
            let c = Couplings::new(&p, QuantumNumbers::new(0, 0));
            assert_eq!(c.eta, -0.25);
        }
    }

    #[test]
    fn substituted_couplings() {
        let p = ModelParams {
            omega_c: 1.0,
            xi: 1.0,
            alpha: 0.5,
            ..unit()
        };
        let c = Couplings::new(&p, QuantumNumbers::new(0, 1));
        assert_relative_eq!(c.beta1, 12.0, max_relative = 1e-15);
        assert_relative_eq!(c.eta, 8.75, max_relative = 1e-15);
    }

    #[test]
    fn complex_exponents_are_domain_errors() {
        let p = unit();
        let qn = QuantumNumbers::new(0, 0);
        // η = -1/4, so ε < 1/4 makes λ complex.
        assert!(matches!(
            dimensionless(&p, qn, -0.5),
            Err(ModelError::ComplexLambda(_))
        ));
        let c = Couplings {
            beta0: 1.0,
            beta1: -5.0,
            beta2: 0.0,
            eta: 0.0,
        };
        assert!(matches!(c.at_epsilon(1.0), Err(ModelError::ComplexNu(_))));
    }

    #[test]
    fn effective_potential_reference_point() {
        let v = effective_potential(&unit(), QuantumNumbers::new(0, 0), 1.0).unwrap();
        assert_relative_eq!(v, -(-1f64).exp() - 0.125, max_relative = 1e-14);
        assert_relative_eq!(v, -0.49288, max_relative = 1e-5);
        assert!(effective_potential(&unit(), QuantumNumbers::new(0, 0), 0.0).is_err());
    }

    #[test]
    fn effective_potential_vanishes_far_away() {
        let p = ModelParams {
            omega_c: 2.0,
            xi: 0.3,
            alpha: 0.7,
            ..unit()
        };
        let qn = QuantumNumbers::new(0, 1);
        let near = effective_potential(&p, qn, 1e3).unwrap().abs();
        let far = effective_potential(&p, qn, 1e5).unwrap().abs();
        assert!(far < near && far < 1e-9);
    }

    #[test]
    fn vector_potential_components() {
        let mut p = unit();
        p.set_field(1.0);
        let (a1, a2) = vector_potential_phi(&p, 1.0).unwrap();
        let e = (-1f64).exp();
        assert_relative_eq!(a1, e / (1.0 - e), max_relative = 1e-14);
        assert_relative_eq!(a1, 0.58198, max_relative = 1e-5);
        assert_eq!(a2, 0.0);

        let mut q = unit();
        q.set_flux(3.0);
        let (a1, a2) = vector_potential_phi(&q, 2.0).unwrap();
        assert_eq!(a1, 0.0);
        assert_relative_eq!(a2, 3.0 / (4.0 * PI), max_relative = 1e-14);
    }

    #[test]
    fn natural_units_conversions() {
        let mut p = ModelParams::default();
        p.set_field(2.5);
        p.set_flux(1.0);
        assert_eq!(p.omega_c, 2.5);
        assert_relative_eq!(p.xi, 1.0 / (2.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(p.field(), 2.5);
        assert_relative_eq!(p.flux(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn greene_aldrich_reference_values() {
        assert_relative_eq!(
            greene_aldrich_ratio(0.01, 1.0).unwrap(),
            1.01004,
            max_relative = 1e-5
        );
        assert_relative_eq!(
            greene_aldrich_ratio(0.1, 10.0).unwrap(),
            2.5027,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            greene_aldrich_ratio(1e-3, 1e-6).unwrap(),
            1.0,
            max_relative = 1e-8
        );
        let mut last = 1.0;
        for k in 1..200 {
            let ratio = greene_aldrich_ratio(1.0, k as f64 * 0.05).unwrap();
            assert!(ratio > last);
            last = ratio;
        }
        assert!(greene_aldrich_ratio(0.0, 1.0).is_err());
        assert!(greene_aldrich_ratio(1.0, -1.0).is_err());
    }

    #[test]
    fn coulomb_limit() {
        let p = ModelParams {
            delta: 1e-4,
            ..ModelParams::default()
        };
        for (n, m) in [(0u32, 0i32), (1, 0), (0, 1), (1, 1), (0, -1)] {
            let e = energy_closed_form(&p, QuantumNumbers::new(n, m))
                .unwrap()
                .energy()
                .unwrap();
            let principal = n as f64 + m.unsigned_abs() as f64 + 0.5;
            let expected = -1.0 / (2.0 * principal * principal);
            assert_relative_eq!(e, expected, max_relative = 1e-3);
        }
    }

    #[test]
    fn flux_and_angular_momentum_trade_at_unit_alpha() {
        let base = ModelParams {
            v1: 40.0,
            omega_c: 0.7,
            ..ModelParams::default()
        };
        for n in 0..3 {
            let a = ModelParams { xi: 0.0, ..base };
            let b = ModelParams { xi: 1.0, ..base };
            let e1 = energy_closed_form(&a, QuantumNumbers::new(n, 1))
                .unwrap()
                .energy()
                .unwrap();
            let e2 = energy_closed_form(&b, QuantumNumbers::new(n, 0))
                .unwrap()
                .energy()
                .unwrap();
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn epsilon_energy_round_trip() {
        let p = ModelParams {
            mass: 0.067,
            hbar: 1.3,
            delta: 0.02,
            ..ModelParams::default()
        };
        for eps in [1e-6, 0.3, 17.0, 4.5e4] {
            let e = energy_from_epsilon(&p, eps);
            assert_relative_eq!(
                epsilon_from_energy(&p, e),
                eps,
                max_relative = 4.0 * f64::EPSILON
            );
        }
    }

    #[test]
    fn closed_form_zeroes_quantization_residual() {
        let p = ModelParams {
            v1: 20.0,
            omega_c: 1.0,
            xi: 0.2,
            alpha: 0.6,
            ..ModelParams::default()
        };
        let qn = QuantumNumbers::new(1, 1);
        let level = *energy_closed_form(&p, qn).unwrap().bound().unwrap();
        let set = level.set;
        assert!(set.quantization_residual(qn.n).abs() <= 1e-10 * set.kappa());
        // b = -n terminates the hypergeometric series.
        let (_, b, _) = set.hypergeometric_parameters();
        assert!((b + qn.n as f64).abs() < 1e-9);
        // Shifting n by one moves the residual by exactly one.
        let r0 = set.quantization_residual(2);
        let r1 = set.quantization_residual(3);
        assert_eq!(r1 - r0, 1.0);
    }

    #[test]
    fn residual_brackets_closed_form_root() {
        let p = ModelParams {
            v1: 5.0,
            omega_c: 0.5,
            xi: 0.1,
            ..ModelParams::default()
        };
        let qn = QuantumNumbers::new(0, 0);
        let eps = energy_closed_form(&p, qn).unwrap().epsilon().unwrap();
        let c = Couplings::new(&p, qn);
        let below = c.at_epsilon(0.9 * eps).unwrap().quantization_residual(0);
        let above = c.at_epsilon(1.1 * eps).unwrap().quantization_residual(0);
        assert!(below < 0.0 && above > 0.0);
    }

    #[test]
    fn bisection_oracle_matches_closed_form() {
        let p = ModelParams {
            v1: 3.0,
            omega_c: 0.2,
            xi: 0.4,
            alpha: 0.8,
            delta: 0.05,
            ..ModelParams::default()
        };
        for (n, m) in [(0, 0), (1, 0), (2, 1), (0, -1)] {
            let qn = QuantumNumbers::new(n, m);
            let closed = energy_closed_form(&p, qn).unwrap();
            let Some(eps) = closed.epsilon() else {
                continue;
            };
            let root = solve_quantization(&p, qn).unwrap();
            assert_relative_eq!(root, eps, max_relative = 1e-10);
        }
    }

    #[test]
    fn unbound_points_are_reported_not_raised() {
        // Strong field, weak binding: λ from the closed form is negative.
        let p = ModelParams {
            omega_c: 4.0,
            xi: 0.2,
            ..ModelParams::default()
        };
        let report = energy_closed_form(&p, QuantumNumbers::new(0, 0)).unwrap();
        assert!(!report.exists());
        assert!(matches!(
            report.rejection(),
            Some(Rejection::NonPositiveLambda { .. })
        ));
        assert!(solve_quantization(&p, QuantumNumbers::new(0, 0)).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let p = ModelParams {
            mass: 0.0,
            ..ModelParams::default()
        };
        assert!(energy_closed_form(&p, QuantumNumbers::new(0, 0)).is_err());
        let p = ModelParams {
            v1: -1.0,
            ..ModelParams::default()
        };
        assert!(p.validate().is_err());
        let p = ModelParams {
            alpha: f64::NAN,
            ..ModelParams::default()
        };
        assert!(p.validate().is_err());
    }
}
