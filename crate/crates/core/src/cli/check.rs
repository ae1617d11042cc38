//! `abring check`: a property suite over the library and the configured
//! sweep. Each property reports one line; the command fails if any does.

use std::f64::consts::PI;

use super::commands::{entropy_sweep, CliError, CommandOutput};
use super::config::RunConfig;
use crate::entropy::{shannon_momentum, shannon_position, BBM_BOUND};
use crate::model::{energy_closed_form, solve_quantization, ModelParams, QuantumNumbers};
use crate::specfun::hyp2f1;
use crate::spectral::{fourier_transform, MomentumGrid};
use crate::wavefunction::{
    linspace, normalize, probability_density, radial_eigenfunction, Domain, Eigenstate,
    RadialGridSpec, SampledFunction,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn hypergeometric_identities() -> CheckResult {
    let mut worst = 0.0f64;
    for i in 1..=9 {
        let s = i as f64 / 10.0;
        for (b, c) in [(0.5, 1.5), (3.2, 7.0), (12.0, 2.5)] {
            let rel = |got: f64, want: f64| ((got - want) / want).abs();
            worst = worst.max(rel(hyp2f1(0.0, b, c, s).unwrap_or(f64::NAN), 1.0));
            worst = worst.max(rel(
                hyp2f1(-1.0, b, c, s).unwrap_or(f64::NAN),
                1.0 - b / c * s,
            ));
            for n in 0..6 {
                let a = -(n as f64);
                worst = worst.max(rel(
                    hyp2f1(a, b, b, s).unwrap_or(f64::NAN),
                    (1.0 - s).powf(-a),
                ));
            }
        }
    }
    CheckResult::new(
        "hypergeometric identities",
        worst <= 1e-12,
        format!("max relative error {worst:.2e}"),
    )
}

fn gaussian_saturation() -> CheckResult {
    let r = linspace(-12.0, 12.0, 2401);
    let run = || -> Result<(f64, f64), String> {
        let f = SampledFunction::from_real(
            r,
            |x| PI.powf(-0.25) * (-0.5 * x * x).exp(),
            Domain::Position,
        )
        .map_err(|e| e.to_string())?;
        let grid = MomentumGrid::new(12.0, 2401).map_err(|e| e.to_string())?;
        let t = fourier_transform(&f, &grid).map_err(|e| e.to_string())?;
        let (m, _) = normalize(&t.function).map_err(|e| e.to_string())?;
        let s_r = shannon_position(&probability_density(&f)).map_err(|e| e.to_string())?;
        let s_k = shannon_momentum(&probability_density(&m)).map_err(|e| e.to_string())?;
        Ok((s_r, s_k))
    };
    match run() {
        Ok((s_r, s_k)) => {
            let half = 0.5 * BBM_BOUND;
            let pass = (s_r - half).abs() <= 1e-3
                && (s_k - half).abs() <= 1e-3
                && (s_r + s_k - BBM_BOUND).abs() <= 2e-3;
            CheckResult::new(
                "gaussian saturates the bound",
                pass,
                format!("S_r={s_r:.6} S_k={s_k:.6}"),
            )
        }
        Err(e) => CheckResult::new("gaussian saturates the bound", false, e),
    }
}

fn coulomb_limit() -> CheckResult {
    let params = ModelParams {
        delta: 1e-4,
        ..ModelParams::default()
    };
    let mut worst = 0.0f64;
    for n in 0..2 {
        for m in 0..2 {
            let exact = -0.5 / (n as f64 + m as f64 + 0.5).powi(2);
            let got = energy_closed_form(&params, QuantumNumbers::new(n, m))
                .ok()
                .and_then(|r| r.energy())
                .unwrap_or(f64::NAN);
            worst = worst.max(((got - exact) / exact).abs());
        }
    }
    CheckResult::new(
        "coulomb limit",
        worst <= 1e-3,
        format!("max relative error {worst:.2e}"),
    )
}

/// Checks that run at every bound sweep point without the entropy pipeline.
fn per_point(cfg: &RunConfig) -> Result<Vec<CheckResult>, CliError> {
    let mut oracle = 0.0f64;
    let mut ode = 0.0f64;
    let mut bound = 0;
    for p in cfg.points()? {
        let Ok(state) = Eigenstate::new(&p.params, p.qn) else {
            continue;
        };
        bound += 1;
        let closed = state.level().epsilon;
        let bisected = solve_quantization(&p.params, p.qn).unwrap_or(f64::NAN);
        oracle = oracle.max(((bisected - closed) / closed).abs());
        let spec = RadialGridSpec {
            points: cfg.grid.r_points,
            r_max: cfg.grid.r_max,
        };
        ode = ode.max(state.ode_residual(&spec).unwrap_or(f64::NAN));
    }
    Ok(vec![
        CheckResult::new(
            "quantization oracle",
            bound > 0 && oracle <= 1e-10,
            format!("{bound} bound points, max relative deviation {oracle:.2e}"),
        ),
        CheckResult::new(
            "radial equation residual",
            bound > 0 && ode <= 1e-6,
            format!("max relative residual {ode:.2e}"),
        ),
    ])
}

fn node_counts(cfg: &RunConfig) -> CheckResult {
    let params = match cfg.physical.to_params() {
        Ok(p) => p,
        Err(e) => return CheckResult::new("node count", false, e.to_string()),
    };
    let mut found = Vec::new();
    for n in 0..4 {
        let qn = QuantumNumbers::new(n, cfg.qn.m);
        match radial_eigenfunction(&params, qn, &RadialGridSpec::default()) {
            Ok(f) => found.push(f.sign_changes()),
            Err(e) => return CheckResult::new("node count", false, format!("n={n}: {e}")),
        }
    }
    CheckResult::new(
        "node count",
        found == [0, 1, 2, 3],
        format!("sign changes {found:?} for n = 0..3"),
    )
}

fn sweep_properties(cfg: &RunConfig) -> Result<Vec<CheckResult>, CliError> {
    let results = entropy_sweep(cfg)?;
    let bound: Vec<_> = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .collect();
    if bound.is_empty() {
        return Ok(vec![CheckResult::new(
            "sweep",
            false,
            "no bound states in the sweep",
        )]);
    }
    let min_margin = bound
        .iter()
        .map(|o| o.report.margin)
        .fold(f64::INFINITY, f64::min);
    let norm_r = bound
        .iter()
        .map(|o| o.report.norm_residual_r)
        .fold(0.0, f64::max);
    let norm_k = bound
        .iter()
        .map(|o| o.report.norm_residual_k)
        .fold(0.0, f64::max);
    let shift = bound
        .iter()
        .filter_map(|o| o.entropy_shift)
        .fold(0.0, f64::max);
    let resolved = bound.iter().all(|o| !o.under_resolved);
    Ok(vec![
        CheckResult::new(
            "entropic uncertainty bound",
            bound.iter().all(|o| o.report.pass),
            format!("{} states, smallest margin {min_margin:.6}", bound.len()),
        ),
        CheckResult::new(
            "position normalization",
            norm_r <= 1e-8,
            format!("max |norm - 1| {norm_r:.2e}"),
        ),
        CheckResult::new(
            "parseval",
            norm_k <= 1e-4,
            format!("max residual {norm_k:.2e}"),
        ),
        CheckResult::new(
            "entropy convergence",
            resolved,
            format!("max shift under doubled grids {shift:.2e}"),
        ),
    ])
}

pub fn run_checks(cfg: &RunConfig) -> Result<Vec<CheckResult>, CliError> {
    let mut out = vec![
        hypergeometric_identities(),
        gaussian_saturation(),
        coulomb_limit(),
    ];
    out.extend(per_point(cfg)?);
    out.push(node_counts(cfg));
    out.extend(sweep_properties(cfg)?);
    Ok(out)
}

/// Runs the suite; the flag is true when every property holds.
pub fn cmd_check(cfg: &RunConfig) -> Result<(CommandOutput, bool), CliError> {
    let results = run_checks(cfg)?;
    let mut text = String::new();
    for r in &results {
        text.push_str(&format!(
            "{} {}: {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        ));
    }
    let ok = results.iter().all(|r| r.pass);
    Ok((
        CommandOutput {
            text,
            warnings: Vec::new(),
        },
        ok,
    ))
}
