//! Turning command-line names into catalog systems, functions, and states.
//!
//! A model is selected by catalog id or by a descriptive alias, optionally
//! re-parameterized (masses, charges, potentials, body count). Function
//! arguments (`--f`, `--g`, `--H`) resolve against the chosen system in
//! three layers: named energies first, then the system's observables, then
//! as a parsed expression over the chart's coordinates and constants —
//! so `prho`, `lz`, and `pr^2/(2*m) - 1/r` all work where they make sense.

use std::sync::Arc;

use super::config::{pick_parsed, pick_string, ConfigFile};
use super::{CliError, ModelOpts};
use crate::expr::Expression;
use crate::models::{
    central_force, magnetic_pair, nbody_cartesian, pair_list, rho_model, rho_names,
    vol_model_with_potential, MagneticPairParams, SystemModel,
};
use crate::poisson::{Chart, PhasePoint};
use crate::reduction::SamplerSpec;

/// A resolved system plus the names `--f`/`--g`/`--H` may refer to.
#[derive(Debug)]
pub(crate) struct ModelContext {
    pub model: SystemModel,
    /// Named energies: the full energy under `H`, plus restriction-ladder
    /// energies where the system has them.
    pub named: Vec<(String, Expression)>,
}

/// Model parameters after flag/config merging, still untyped where the
/// interpretation depends on the chosen system.
pub(crate) struct ModelParams {
    pub name: Option<String>,
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub mass: Option<f64>,
    pub masses: Option<Vec<f64>>,
    pub charge: Option<f64>,
    pub field: Option<f64>,
    pub potential: Option<String>,
}

impl ModelParams {
    pub fn merge(opts: &ModelOpts, cfg: Option<&ConfigFile>) -> Result<ModelParams, CliError> {
        let masses = match pick_string(&opts.masses, cfg, "model", "masses") {
            None => None,
            Some(list) => Some(parse_mass_list(&list)?),
        };
        Ok(ModelParams {
            name: pick_string(&opts.model, cfg, "model", "name"),
            n: pick_parsed(opts.n, cfg, "model", "n")?,
            dim: pick_parsed(opts.dim, cfg, "model", "dim")?,
            mass: pick_parsed(opts.mass, cfg, "model", "mass")?,
            masses,
            charge: pick_parsed(opts.charge, cfg, "model", "charge")?,
            field: pick_parsed(opts.field, cfg, "model", "field")?,
            potential: pick_string(&opts.potential, cfg, "model", "potential"),
        })
    }
}

fn parse_mass_list(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| CliError::Validation(format!("masses entry `{s}`: {e}")))
        })
        .collect()
}

/// Reject parameters the chosen system has no use for, so a typo like
/// `--charge` on the central force fails loudly instead of silently.
fn reject_foreign_params(
    model: &str,
    params: &ModelParams,
    accepted: &[&str],
) -> Result<(), CliError> {
    let given = [
        ("n", params.n.is_some()),
        ("dim", params.dim.is_some()),
        ("mass", params.mass.is_some()),
        ("masses", params.masses.is_some()),
        ("charge", params.charge.is_some()),
        ("field", params.field.is_some()),
        ("potential", params.potential.is_some()),
    ];
    for (name, set) in given {
        if set && !accepted.contains(&name) {
            return Err(CliError::Validation(format!(
                "model `{model}` does not take `{name}`; it accepts: {}",
                if accepted.is_empty() {
                    "no parameters".to_string()
                } else {
                    accepted.join(", ")
                }
            )));
        }
    }
    Ok(())
}

fn parse_potential(text: &str) -> Result<Expression, CliError> {
    Expression::parse(text).map_err(|e| CliError::Validation(format!("potential: {e}")))
}

/// Default pair potential `−Σ 1/r_ij` for the Cartesian n-body chart,
/// spelled exactly like the catalog builds it.
fn default_nbody_potential(n: usize) -> String {
    let mut s = String::from("0");
    for (i, j) in pair_list(n) {
        s.push_str(&format!(" - 1/r{i}{j}"));
    }
    s
}

/// Build the system a name refers to, using catalog defaults for every
/// parameter not given.
pub(crate) fn resolve_model(params: &ModelParams) -> Result<ModelContext, CliError> {
    let Some(name) = params.name.as_deref() else {
        return Err(CliError::Validation(
            "no model chosen: pass --model or set [model] name \
             (`partint catalog` lists the built-ins)"
                .to_string(),
        ));
    };
    let model_err = |e: crate::models::ModelError| CliError::Validation(e.to_string());

    match name {
        "hc" | "central-force-cartesian" | "hc2" | "central-force" => {
            reject_foreign_params(name, params, &["mass", "potential"])?;
            let mass = params.mass.unwrap_or(1.0);
            let potential =
                parse_potential(params.potential.as_deref().unwrap_or("0 - 1/r"))?;
            let system = central_force(mass, &potential).map_err(model_err)?;
            if matches!(name, "hc" | "central-force-cartesian") {
                let h = system.cartesian.energy_expression().clone();
                Ok(ModelContext {
                    model: system.cartesian,
                    named: vec![("H".to_string(), h)],
                })
            } else {
                let k = system.reduced.energy_expression().clone();
                Ok(ModelContext {
                    named: vec![
                        ("H".to_string(), k.clone()),
                        ("K".to_string(), k),
                        ("G".to_string(), system.planar_energy),
                        ("J".to_string(), system.radial_energy),
                    ],
                    model: system.reduced,
                })
            }
        }
        "Hmf" | "magnetic-pair" => {
            reject_foreign_params(name, params, &["masses", "charge", "field"])?;
            let (m1, m2) = match params.masses.as_deref() {
                None => (1.0, 1.0),
                Some([m1, m2]) => (*m1, *m2),
                Some(other) => {
                    return Err(CliError::Validation(format!(
                        "the pair model takes exactly two masses, got {}",
                        other.len()
                    )))
                }
            };
            let pair = magnetic_pair(MagneticPairParams {
                m1,
                m2,
                charge: params.charge.unwrap_or(1.0),
                field: params.field.unwrap_or(1.0),
            })
            .map_err(model_err)?;
            let h = pair.model.energy_expression().clone();
            Ok(ModelContext {
                model: pair.model,
                named: vec![("H".to_string(), h)],
            })
        }
        "HN" | "nbody" => {
            reject_foreign_params(name, params, &["n", "dim", "masses", "potential"])?;
            let n = params.n.unwrap_or(3);
            let dim = params.dim.unwrap_or(3);
            let masses = params.masses.clone().unwrap_or_else(|| vec![1.0; n]);
            let potential = parse_potential(
                params
                    .potential
                    .as_deref()
                    .unwrap_or(&default_nbody_potential(n)),
            )?;
            let nb = nbody_cartesian(n, dim, &masses, &potential).map_err(model_err)?;
            let h = nb.model.energy_expression().clone();
            Ok(ModelContext {
                model: nb.model,
                named: vec![("H".to_string(), h)],
            })
        }
        "HRNrho" | "rho" => {
            reject_foreign_params(name, params, &["n", "masses", "potential"])?;
            let n = params.n.unwrap_or(3);
            let masses = params.masses.clone().unwrap_or_else(|| vec![1.0; n]);
            let potential = params
                .potential
                .as_deref()
                .map(parse_potential)
                .transpose()?;
            let model = rho_model(n, &masses, potential.as_ref()).map_err(model_err)?;
            let h = model.energy_expression().clone();
            Ok(ModelContext {
                model,
                named: vec![("H".to_string(), h)],
            })
        }
        other => {
            let n = if let Some(suffix) = other.strip_prefix("vol-N") {
                suffix.parse::<usize>().ok()
            } else if matches!(other, "vol" | "volume") {
                Some(params.n.unwrap_or(3))
            } else {
                None
            };
            let Some(n) = n else {
                return Err(CliError::Validation(format!(
                    "unknown model `{other}`; `partint catalog` lists the built-ins"
                )));
            };
            reject_foreign_params(other, params, &["n", "potential"])?;
            if let Some(flag_n) = params.n {
                if other.starts_with("vol-N") && flag_n != n {
                    return Err(CliError::Validation(format!(
                        "model `{other}` fixes the body count; drop the conflicting n = {flag_n}"
                    )));
                }
            }
            let potential = params
                .potential
                .as_deref()
                .map(parse_potential)
                .transpose()?;
            let model = vol_model_with_potential(n, potential.as_ref()).map_err(model_err)?;
            let h = model.energy_expression().clone();
            Ok(ModelContext {
                model,
                named: vec![("H".to_string(), h)],
            })
        }
    }
}

impl ModelContext {
    /// Resolve a function argument: named energy, observable, or expression
    /// over the chart.
    pub fn function(&self, text: &str) -> Result<Expression, CliError> {
        for (name, expr) in &self.named {
            if name == text {
                return Ok(expr.clone());
            }
        }
        if let Some(expr) = self.model.observable(text) {
            return Ok(expr.clone());
        }
        let expr = Expression::parse(text)
            .map_err(|e| CliError::Validation(format!("function `{text}`: {e}")))?;
        let chart = &self.model.chart;
        for sym in expr.free_symbols() {
            if chart.coord_index(sym).is_none() && chart.constants().get(sym).is_none() {
                return Err(CliError::Validation(format!(
                    "function `{text}`: symbol `{sym}` is neither a coordinate nor a \
                     constant of chart `{}` (coordinates: {})",
                    chart.name(),
                    chart.coord_names().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        Ok(expr)
    }

    /// The energy to verify against: an explicit name/expression, or the
    /// system's own energy.
    pub fn energy_argument(&self, text: Option<&str>) -> Result<(String, Expression), CliError> {
        match text {
            Some(t) => Ok((t.to_string(), self.function(t)?)),
            None => Ok((
                "H".to_string(),
                self.model.energy_expression().clone(),
            )),
        }
    }
}

/// Parse repeatable `name=value` assignments (`--set`, `--at`).
pub(crate) fn parse_assignments(
    pairs: &[String],
    what: &str,
) -> Result<Vec<(String, f64)>, CliError> {
    pairs
        .iter()
        .map(|pair| {
            let Some((name, value)) = pair.split_once('=') else {
                return Err(CliError::Validation(format!(
                    "{what} `{pair}`: expected `name=value`"
                )));
            };
            let name = name.trim();
            let value: f64 = value.trim().parse().map_err(|e| {
                CliError::Validation(format!("{what} `{pair}`: {e}"))
            })?;
            if !value.is_finite() {
                return Err(CliError::Validation(format!(
                    "{what} `{pair}`: value must be finite"
                )));
            }
            Ok((name.to_string(), value))
        })
        .collect()
}

/// Assemble the initial phase point from `[initial]` config entries and
/// `--set` overrides, optionally starting from a seeded draw out of the
/// model's sampling box.
pub(crate) fn initial_state(
    chart: &Arc<Chart>,
    model: &SystemModel,
    cfg: Option<&ConfigFile>,
    set_flags: &[String],
    sample_flag: bool,
    seed: u64,
) -> Result<PhasePoint, CliError> {
    let mut named: Vec<(String, f64)> = Vec::new();
    let mut sample = sample_flag;
    if let Some(c) = cfg {
        for entry in c.entries("initial") {
            if entry.key == "sample" {
                sample = sample
                    || entry.value.parse::<bool>().map_err(|_| {
                        CliError::Validation(format!(
                            "config [initial] sample (line {}): expected true or false, got `{}`",
                            entry.line, entry.value
                        ))
                    })?;
                continue;
            }
            let value: f64 = entry.value.parse().map_err(|e| {
                CliError::Validation(format!(
                    "config [initial] {} (line {}): {e}: `{}`",
                    entry.key, entry.line, entry.value
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Validation(format!(
                    "config [initial] {} (line {}): value must be finite",
                    entry.key, entry.line
                )));
            }
            named.push((entry.key.clone(), value));
        }
    }
    // Flags override file keys one coordinate at a time.
    for (name, value) in parse_assignments(set_flags, "--set")? {
        named.retain(|(n, _)| *n != name);
        named.push((name, value));
    }
    for (name, _) in &named {
        if chart.coord_index(name).is_none() {
            return Err(CliError::Validation(format!(
                "`{name}` is not a coordinate of chart `{}` (coordinates: {})",
                chart.name(),
                chart.coord_names().collect::<Vec<_>>().join(", ")
            )));
        }
    }

    let mut values: Vec<Option<f64>> = if sample {
        let spec = SamplerSpec::for_model(model, seed, 1)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let drawn = spec.draw(&mut spec.rng());
        drawn.into_iter().map(Some).collect()
    } else {
        vec![None; chart.dim()]
    };
    for (name, value) in &named {
        let i = chart.coord_index(name).expect("validated above");
        values[i] = Some(*value);
    }
    let ordered = chart
        .coord_names()
        .zip(values.iter())
        .map(|(name, v)| {
            v.ok_or_else(|| {
                CliError::Validation(format!(
                    "initial state is missing coordinate `{name}` of chart `{}`; \
                     set it in [initial] or via --set {name}=...",
                    chart.name()
                ))
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    PhasePoint::new(chart.clone(), ordered)
        .map_err(|e| CliError::Validation(e.to_string()))
}

/// Default harmonic-like potential `Σ ρ_ij` in the squared-distance symbols.
pub(crate) fn default_rho_potential(n: usize) -> String {
    rho_names(n).join(" + ")
}
