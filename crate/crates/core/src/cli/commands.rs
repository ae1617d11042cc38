//! The `energy`, `entropy`, `figures` and `check` subcommands.
//!
//! Every command returns its output as text (or writes files for
//! `figures`) so the binary only has to route bytes and exit codes. Sweep
//! points are evaluated in parallel and emitted in sweep order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, Flux, OutputFormat, Physical, RunConfig, SweepPoint};
use crate::entropy::{entropy_pipeline, PipelineOutcome};
use crate::model::{effective_potential, energy_closed_form, Rejection};
use crate::numerics::simpson_samples;
use crate::wavefunction::{linspace, normalize, Eigenstate, RadialGridSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no sweep point has a bound state")]
    NoComputableStates,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NoComputableStates => 3,
            CliError::Numerical(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

/// Command output plus warnings destined for stderr.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandOutput {
    pub text: String,
    pub warnings: Vec<String>,
}

fn point_label(p: &SweepPoint) -> String {
    format!(
        "n={} m={} B={} phi_ab={} alpha={}",
        p.qn.n,
        p.qn.m,
        p.b_field(),
        p.phi_ab(),
        p.physical.alpha
    )
}

#[derive(Serialize)]
struct EnergyRow {
    n: u32,
    m: i32,
    #[serde(rename = "B")]
    b: f64,
    xi: f64,
    alpha: f64,
    delta: f64,
    v1: f64,
    energy: Option<f64>,
    epsilon: Option<f64>,
    exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection: Option<Rejection>,
}

pub fn cmd_energy(cfg: &RunConfig, format: OutputFormat) -> Result<CommandOutput, CliError> {
    let rows = cfg
        .points()?
        .iter()
        .map(|p| {
            let report = energy_closed_form(&p.params, p.qn)
                .map_err(|e| CliError::Numerical(format!("{}: {e}", point_label(p))))?;
            Ok(EnergyRow {
                n: p.qn.n,
                m: p.qn.m,
                b: p.b_field(),
                xi: p.xi(),
                alpha: p.physical.alpha,
                delta: p.physical.delta,
                v1: p.physical.v1,
                energy: report.energy(),
                epsilon: report.epsilon(),
                exists: report.exists(),
                rejection: report.rejection(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let text = match format {
        OutputFormat::Json => to_json(&rows)?,
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record([
                "n", "m", "B", "xi", "alpha", "delta", "v1", "energy", "epsilon", "exists",
            ])
            .map_err(output_err)?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.m.to_string(),
                    r.b.to_string(),
                    r.xi.to_string(),
                    r.alpha.to_string(),
                    r.delta.to_string(),
                    r.v1.to_string(),
                    r.energy.map(|v| v.to_string()).unwrap_or_default(),
                    r.epsilon.map(|v| v.to_string()).unwrap_or_default(),
                    r.exists.to_string(),
                ])
                .map_err(output_err)?;
            }
            finish_csv(w)?
        }
    };
    Ok(CommandOutput {
        text,
        warnings: Vec::new(),
    })
}

#[derive(Serialize)]
struct EntropyRow {
    n: u32,
    m: i32,
    #[serde(rename = "B")]
    b: f64,
    phi_ab: f64,
    alpha: f64,
    exists: bool,
    energy: Option<f64>,
    report: Option<crate::entropy::EntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<Diagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection: Option<Rejection>,
}

#[derive(Serialize)]
struct Diagnostics {
    r_max: f64,
    k_max: f64,
    parseval_residual: f64,
    captured_mass: f64,
    truncated: bool,
    entropy_shift: Option<f64>,
    under_resolved: bool,
    greene_aldrich_ratio: f64,
    mean_radius: f64,
}

impl From<&PipelineOutcome> for Diagnostics {
    fn from(o: &PipelineOutcome) -> Self {
        Self {
            r_max: o.r_max,
            k_max: o.k_max,
            parseval_residual: o.parseval_residual,
            captured_mass: o.captured_mass,
            truncated: o.truncated,
            entropy_shift: o.entropy_shift,
            under_resolved: o.under_resolved,
            greene_aldrich_ratio: o.greene_aldrich_ratio,
            mean_radius: o.mean_radius,
        }
    }
}

/// Sweep results in sweep order; unbound points carry their rejection.
pub type SweepResults = Vec<(SweepPoint, Result<PipelineOutcome, Rejection>)>;

/// Runs the entropy pipeline at every sweep point, in parallel, keeping
/// sweep order.
pub fn entropy_sweep(cfg: &RunConfig) -> Result<SweepResults, CliError> {
    let grids = cfg.grid.pipeline_grids();
    cfg.points()?
        .into_par_iter()
        .map(|p| {
            let outcome = match entropy_pipeline(&p.params, p.qn, &grids) {
                Ok(o) => Ok(o),
                Err(e) if e.is_no_bound_state() => {
                    let report = energy_closed_form(&p.params, p.qn)
                        .map_err(|e| CliError::Numerical(format!("{}: {e}", point_label(&p))))?;
                    Err(report
                        .rejection()
                        .ok_or_else(|| CliError::Numerical(format!("{}: {e}", point_label(&p))))?)
                }
                Err(e) => return Err(CliError::Numerical(format!("{}: {e}", point_label(&p)))),
            };
            Ok((p, outcome))
        })
        .collect()
}

pub fn cmd_entropy(cfg: &RunConfig, format: OutputFormat) -> Result<CommandOutput, CliError> {
    let results = entropy_sweep(cfg)?;
    if results.iter().all(|(_, r)| r.is_err()) {
        return Err(CliError::NoComputableStates);
    }

    let mut warnings = Vec::new();
    for (p, r) in &results {
        match r {
            Ok(o) if o.under_resolved => warnings.push(format!(
                "{}: entropies changed by {:.2e} when the grids were doubled",
                point_label(p),
                o.entropy_shift.unwrap_or(f64::NAN)
            )),
            Ok(o) if o.truncated => warnings.push(format!(
                "{}: momentum grid captures only {:.4} of the mass",
                point_label(p),
                o.captured_mass
            )),
            Err(rej) => warnings.push(format!("{}: no bound state ({rej:?})", point_label(p))),
            _ => {}
        }
    }

    let rows: Vec<EntropyRow> = results
        .iter()
        .map(|(p, r)| EntropyRow {
            n: p.qn.n,
            m: p.qn.m,
            b: p.b_field(),
            phi_ab: p.phi_ab(),
            alpha: p.physical.alpha,
            exists: r.is_ok(),
            energy: r.as_ref().ok().map(|o| o.level.energy),
            report: r.as_ref().ok().map(|o| o.report),
            diagnostics: r.as_ref().ok().map(Diagnostics::from),
            rejection: r.as_ref().err().copied(),
        })
        .collect();

    let text = match format {
        OutputFormat::Json => to_json(&rows)?,
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record([
                "n", "m", "B", "phi_ab", "alpha", "s_r", "s_k", "sum", "pass",
            ])
            .map_err(output_err)?;
            for r in &rows {
                let cells = match &r.report {
                    Some(rep) => [
                        format!("{:.6}", rep.s_r),
                        format!("{:.6}", rep.s_k),
                        format!("{:.6}", rep.sum),
                        rep.pass.to_string(),
                    ],
                    None => Default::default(),
                };
                w.write_record(
                    [
                        r.n.to_string(),
                        r.m.to_string(),
                        r.b.to_string(),
                        r.phi_ab.to_string(),
                        r.alpha.to_string(),
                    ]
                    .into_iter()
                    .chain(cells),
                )
                .map_err(output_err)?;
            }
            finish_csv(w)?
        }
    };
    Ok(CommandOutput { text, warnings })
}

/// One curve family: the panel letter, the file-name stem and the value
/// overrides.
struct Panel {
    letter: char,
    stem: &'static str,
    values: Vec<f64>,
    apply: fn(&mut Physical, f64),
    base: fn(&SweepPoint) -> f64,
}

fn panels(cfg: &RunConfig) -> Vec<Panel> {
    vec![
        Panel {
            letter: 'a',
            stem: "B",
            values: cfg.figures.b_field.clone(),
            apply: |p, v| p.b_field = v,
            base: |p| p.b_field(),
        },
        Panel {
            letter: 'b',
            stem: "alpha",
            values: cfg.figures.alpha.clone(),
            apply: |p, v| p.alpha = v,
            base: |p| p.physical.alpha,
        },
        Panel {
            letter: 'c',
            stem: "phi",
            values: cfg.figures.phi_ab.clone(),
            apply: |p, v| p.flux = Flux::PhiAb(v),
            base: |p| p.phi_ab(),
        },
    ]
}

fn header(kind: &str, p: &SweepPoint) -> String {
    let x = &p.params;
    format!(
        "# {kind} n={} m={} mass={} hbar={} charge={} light_speed={} delta={} v1={} b_field={} phi_ab={} xi={} alpha={}\n",
        p.qn.n,
        p.qn.m,
        x.mass,
        x.hbar,
        x.charge,
        x.light_speed,
        x.delta,
        x.v1,
        p.b_field(),
        p.phi_ab(),
        p.xi(),
        x.alpha
    )
}

/// Writes effective-potential (`fig1*`) and density (`fig2*`) curves into
/// `dir`, returning the files in the order written.
pub fn cmd_figures(cfg: &RunConfig, dir: &Path) -> Result<(Vec<PathBuf>, Vec<String>), CliError> {
    let base = SweepPoint {
        physical: cfg.physical,
        qn: cfg.qn,
        params: cfg.physical.to_params().map_err(ConfigError::from)?,
    };
    let mut curves = Vec::new();
    for panel in panels(cfg) {
        let values = if panel.values.is_empty() {
            vec![(panel.base)(&base)]
        } else {
            panel.values.clone()
        };
        for v in values {
            let mut physical = cfg.physical;
            (panel.apply)(&mut physical, v);
            let point = SweepPoint {
                physical,
                qn: cfg.qn,
                params: physical.to_params().map_err(ConfigError::from)?,
            };
            curves.push((panel.letter, panel.stem, v, point));
        }
    }

    let fig = &cfg.figures;
    let potential_r = linspace(fig.r_max / fig.points as f64, fig.r_max, fig.points);
    let rendered: Vec<Vec<(String, Result<String, Rejection>)>> = curves
        .par_iter()
        .map(|(letter, stem, v, point)| {
            let mut text = header("effective potential", point);
            text.push_str("# r V_eff\n");
            for &r in &potential_r {
                let y = effective_potential(&point.params, point.qn, r)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                writeln!(text, "{r:.10e} {y:.10e}").unwrap();
            }
            let fig1 = (format!("fig1{letter}_{stem}{v}.dat"), Ok(text));
            let fig2 = (
                format!("fig2{letter}_{stem}{v}.dat"),
                density_curve(cfg, point)?,
            );
            Ok(vec![fig1, fig2])
        })
        .collect::<Result<_, CliError>>()?;

    fs::create_dir_all(dir).map_err(output_err)?;
    let mut written = Vec::new();
    let mut warnings = Vec::new();
    let mut any_density = false;
    for (name, body) in rendered.into_iter().flatten() {
        match body {
            Ok(text) => {
                any_density |= name.starts_with("fig2");
                let path = dir.join(&name);
                fs::write(&path, text).map_err(output_err)?;
                written.push(path);
            }
            Err(rej) => warnings.push(format!("{name} skipped: no bound state ({rej:?})")),
        }
    }
    if !any_density {
        return Err(CliError::NoComputableStates);
    }
    Ok((written, warnings))
}

/// `|ψ(r)|²` normalized on the pipeline's radial grid and sampled on the
/// figure grid.
fn density_curve(
    cfg: &RunConfig,
    point: &SweepPoint,
) -> Result<Result<String, Rejection>, CliError> {
    let state = match Eigenstate::new(&point.params, point.qn) {
        Ok(s) => s,
        Err(crate::wavefunction::WavefunctionError::NoBoundState(rej)) => return Ok(Err(rej)),
        Err(e) => return Err(CliError::Numerical(e.to_string())),
    };
    let numerical =
        |e: &dyn std::fmt::Display| CliError::Numerical(format!("{}: {e}", point_label(point)));
    let r_max = cfg
        .figures
        .density_r_max
        .unwrap_or_else(|| state.auto_r_max());
    let fine = state
        .sample(&RadialGridSpec {
            points: cfg.grid.r_points.max(cfg.figures.points),
            r_max: Some(r_max),
        })
        .map_err(|e| numerical(&e))?;
    let (_, c) = normalize(&fine).map_err(|e| numerical(&e))?;
    let r = linspace(state.r_min(), r_max, cfg.figures.points);
    let mut text = header("probability density", point);
    text.push_str("# r |psi|^2\n");
    for &x in &r {
        let rho = (c * state.psi(x)).powi(2);
        writeln!(text, "{x:.10e} {rho:.10e}").unwrap();
    }
    Ok(Ok(text))
}

/// Reads a two-column figure file back; used by tests and `check`.
pub fn read_curve(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .filter_map(|l| {
            let mut it = l.split_whitespace().map(|t| t.parse::<f64>());
            match (it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y))) => Some((x, y)),
                _ => None,
            }
        })
        .collect()
}

/// Simpson integral of a uniformly sampled curve.
pub fn curve_integral(curve: &[(f64, f64)]) -> Option<f64> {
    if curve.len() < 2 {
        return None;
    }
    let h = curve[1].0 - curve[0].0;
    let y: Vec<f64> = curve.iter().map(|p| p.1).collect();
    simpson_samples(&y, h).ok()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(output_err)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(output_err)?;
    s.push('\n');
    Ok(s)
}

fn output_err(e: impl std::fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}
