//! The six command implementations and their report renderers.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{pick_parsed, pick_string, ConfigFile};
use super::render::{num, trajectory_table, Machine};
use super::resolve::{
    default_rho_potential, initial_state, resolve_model, ModelContext, ModelParams,
};
use super::{
    classify_dynamics, classify_reduction, deliver, BracketArgs, CatalogArgs, CliError,
    CompareReductionArgs, IntegratorOpts, ModelOpts, RunOutput, SimulateArgs, VerifyIntegralArgs,
    VerifyInvolutionArgs,
};
use crate::dynamics::{integrate, IntegratorSpec, Scheme};
use crate::expr::Expression;
use crate::models::{nbody_cartesian, rho_names};
use crate::poisson::{poisson_bracket, PoissonError};
use crate::polyalg::{poly_from_expression, poly_poisson};
use crate::reduction::{
    compare_full_vs_reduced, verify_involution_numeric, verify_particular_integral,
    ComparisonReport, ComparisonSetup, IntegralReport, InvolutionOutcome, InvolutionReport,
    SamplerSpec, Verdict, INDEPENDENCE_MIN_SV, OFF_MANIFOLD_DELTAS, ON_MANIFOLD_TOL,
};

const DEFAULT_SAMPLES: usize = 64;

fn integrator_spec(
    opts: &IntegratorOpts,
    cfg: Option<&ConfigFile>,
) -> Result<IntegratorSpec, CliError> {
    let scheme_name = pick_string(&opts.scheme, cfg, "integrator", "scheme")
        .unwrap_or_else(|| "implicit-midpoint".to_string());
    let scheme: Scheme = scheme_name.parse().map_err(CliError::Validation)?;
    let dt = pick_parsed(opts.dt, cfg, "integrator", "dt")?.unwrap_or(1e-3);
    let steps = pick_parsed(opts.steps, cfg, "integrator", "steps")?.unwrap_or(1000);
    let spec = IntegratorSpec::new(scheme, dt, steps);
    spec.validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(spec)
}

fn sample_count(
    flag: Option<usize>,
    cfg: Option<&ConfigFile>,
) -> Result<usize, CliError> {
    Ok(pick_parsed(flag, cfg, "run", "samples")?.unwrap_or(DEFAULT_SAMPLES))
}

// ---------------------------------------------------------------- simulate

/// Observable columns: the model's own (where they are not already a
/// coordinate column), then any user-defined `name=expr` pairs.
fn simulate_observables(
    ctx: &ModelContext,
    args: &SimulateArgs,
    cfg: Option<&ConfigFile>,
) -> Result<Vec<(String, Expression)>, CliError> {
    let chart = &ctx.model.chart;
    let mut list: Vec<(String, Expression)> = ctx
        .model
        .observables
        .iter()
        .filter(|(name, _)| chart.coord_index(name).is_none())
        .cloned()
        .collect();
    let mut user = args.observables.clone();
    if user.is_empty() {
        if let Some(text) = pick_string(&None, cfg, "output", "observables") {
            user = text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
        }
    }
    for pair in &user {
        let Some((name, expr_text)) = pair.split_once('=') else {
            return Err(CliError::Validation(format!(
                "observable `{pair}`: expected `name=expr`"
            )));
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(CliError::Validation(format!(
                "observable `{pair}`: empty name"
            )));
        }
        if name == "t"
            || name == "energy"
            || chart.coord_index(name).is_some()
            || list.iter().any(|(n, _)| n == name)
        {
            return Err(CliError::Validation(format!(
                "observable `{name}`: the table already has a column of that name"
            )));
        }
        let expr = ctx.function(expr_text.trim())?;
        list.push((name.to_string(), expr));
    }
    Ok(list)
}

pub(crate) fn simulate(
    args: &SimulateArgs,
    cfg: Option<&ConfigFile>,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let params = ModelParams::merge(&args.model, cfg)?;
    let ctx = resolve_model(&params)?;
    let spec = integrator_spec(&args.integrator, cfg)?;
    let x0 = initial_state(
        &ctx.model.chart,
        &ctx.model,
        cfg,
        &args.set,
        args.sample_initial,
        seed,
    )?;
    let observables = simulate_observables(&ctx, args, cfg)?;
    let result =
        integrate(&ctx.model.energy, &x0, &spec, &observables).map_err(classify_dynamics)?;

    let table = trajectory_table(&result.trajectory);
    let output = pick_string(&args.output, cfg, "output", "path");
    let delivered = deliver(table, 0, output.as_deref(), out_dir)?;
    if let Some(e) = result.error {
        let done = result.trajectory.len().saturating_sub(1);
        let note = delivered
            .files
            .first()
            .map(|p| format!("; the table up to that point is at `{}`", p.display()))
            .unwrap_or_default();
        return Err(CliError::Runtime(format!(
            "{e} (after {done} of {} steps){note}",
            spec.steps
        )));
    }
    Ok(delivered)
}

// --------------------------------------------------------- verify-integral

fn verdict_slug(v: Verdict) -> &'static str {
    match v {
        Verdict::GlobalIntegral => "global-integral",
        Verdict::ParticularIntegral => "particular-integral",
        Verdict::Negative => "negative",
    }
}

fn render_integral_report(
    ctx: &ModelContext,
    f_text: &str,
    h_name: &str,
    seed: u64,
    report: &IntegralReport,
) -> String {
    let finest = *OFF_MANIFOLD_DELTAS.last().expect("fixed probe distances");
    let finest_estimates: Vec<f64> = report
        .coefficient_samples
        .iter()
        .filter(|s| s.delta == finest)
        .map(|s| s.estimate)
        .collect();
    let mean = finest_estimates.iter().sum::<f64>() / finest_estimates.len().max(1) as f64;
    let spread = finest_estimates
        .iter()
        .fold(0.0_f64, |acc, e| acc.max((e - mean).abs()));

    let mut out = String::new();
    let _ = writeln!(out, "== verify-integral ==");
    let _ = writeln!(
        out,
        "model: {} [chart {}]",
        ctx.model.id,
        ctx.model.chart.name()
    );
    let _ = writeln!(out, "f: {f_text}");
    let _ = writeln!(out, "H: {h_name}");
    let _ = writeln!(out, "zero-set samples: {} (seed {seed})", report.samples);
    let _ = writeln!(
        out,
        "on-manifold max scaled residual: {} (tolerance {})",
        num(report.on_manifold_max_residual),
        num(ON_MANIFOLD_TOL)
    );
    let _ = writeln!(
        out,
        "off-manifold max scaled residual: {}",
        num(report.off_manifold_max_residual)
    );
    let _ = writeln!(
        out,
        "coefficient {{f,H}}/f at distance {:.0e}: {} estimates, mean {}, spread {}",
        finest,
        finest_estimates.len(),
        num(mean),
        num(spread)
    );
    let _ = writeln!(
        out,
        "coefficient stability across the two finest distances: {}",
        num(report.coefficient_stability)
    );
    for fit in &report.slope_fits {
        let _ = writeln!(
            out,
            "slope of {{f,H}} against f at distance {:.0e}: {} ({} probes)",
            fit.delta,
            num(fit.slope),
            fit.points
        );
    }
    let _ = writeln!(
        out,
        "zero-level drift over {} steps from an on-set start: {}",
        report.trajectory_steps,
        num(report.trajectory_max_level)
    );
    let _ = writeln!(out, "verdict: {}", report.verdict);

    let mut m = Machine::new("verify-integral");
    m.push("model", ctx.model.id.as_str());
    m.push("chart", ctx.model.chart.name());
    m.push("f", f_text);
    m.push("H", h_name);
    m.push("seed", seed.to_string());
    m.push("samples", report.samples.to_string());
    m.push_num("on_manifold_max_residual", report.on_manifold_max_residual);
    m.push_num(
        "off_manifold_max_residual",
        report.off_manifold_max_residual,
    );
    m.push_num("coefficient_mean", mean);
    m.push_num("coefficient_spread", spread);
    m.push_num("coefficient_stability", report.coefficient_stability);
    for fit in &report.slope_fits {
        m.push_num(&format!("slope_{:.0e}", fit.delta), fit.slope);
    }
    m.push("trajectory_steps", report.trajectory_steps.to_string());
    m.push_num("trajectory_max_level", report.trajectory_max_level);
    m.push("verdict", verdict_slug(report.verdict));
    out.push('\n');
    out.push_str(&m.render());
    out
}

pub(crate) fn verify_integral(
    args: &VerifyIntegralArgs,
    cfg: Option<&ConfigFile>,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let params = ModelParams::merge(&args.model, cfg)?;
    let ctx = resolve_model(&params)?;
    let f_text = pick_string(&args.f, cfg, "run", "f").ok_or_else(|| {
        CliError::Validation(
            "verify-integral needs a function: pass --f or set [run] f".to_string(),
        )
    })?;
    let f = ctx.function(&f_text)?;
    let h_text = pick_string(&args.energy, cfg, "run", "h");
    let (h_name, h) = ctx.energy_argument(h_text.as_deref())?;
    let samples = sample_count(args.samples, cfg)?;
    let sampler = SamplerSpec::for_model(&ctx.model, seed, samples).map_err(classify_reduction)?;
    let report = verify_particular_integral(&f, &h, &ctx.model.chart, &sampler)
        .map_err(classify_reduction)?;
    let text = render_integral_report(&ctx, &f_text, &h_name, seed, &report);
    let exit = if report.verdict == Verdict::Negative { 3 } else { 0 };
    let output = pick_string(&args.output, cfg, "output", "path");
    deliver(text, exit, output.as_deref(), out_dir)
}

// ------------------------------------------------------- verify-involution

fn outcome_slug(outcome: InvolutionOutcome) -> &'static str {
    match outcome {
        InvolutionOutcome::Accepted => "accepted",
        InvolutionOutcome::TooManyFunctions => "too-many-functions",
        InvolutionOutcome::DependentGradients => "dependent-gradients",
        InvolutionOutcome::NonVanishingBracket => "non-vanishing-bracket",
    }
}

fn render_involution_report(
    ctx: &ModelContext,
    names: &[String],
    h_name: &str,
    seed: u64,
    report: &InvolutionReport,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "== verify-involution ==");
    let _ = writeln!(
        out,
        "model: {} [chart {}]",
        ctx.model.id,
        ctx.model.chart.name()
    );
    let _ = writeln!(
        out,
        "family: {} ({} members, {} degrees of freedom)",
        names.join(", "),
        report.family_size,
        report.dof
    );
    let _ = writeln!(out, "H: {h_name}");
    let _ = writeln!(
        out,
        "joint zero-set samples: {} (seed {seed})",
        report.joint_samples
    );
    if !report.pair_residuals.is_empty() {
        let _ = writeln!(
            out,
            "pairwise bracket residuals (tolerance {}):",
            num(ON_MANIFOLD_TOL)
        );
        for &(i, j, r) in &report.pair_residuals {
            let _ = writeln!(out, "  {{{}, {}}}: {}", names[i], names[j], num(r));
        }
    }
    let _ = writeln!(
        out,
        "min singular value of the gradient stack: {} (threshold {})",
        num(report.min_singular_value),
        num(INDEPENDENCE_MIN_SV)
    );
    let _ = writeln!(out, "outcome: {}", report.outcome);

    let mut m = Machine::new("verify-involution");
    m.push("model", ctx.model.id.as_str());
    m.push("chart", ctx.model.chart.name());
    m.push("family", names.join(","));
    m.push("H", h_name);
    m.push("seed", seed.to_string());
    m.push("samples", report.joint_samples.to_string());
    m.push("family_size", report.family_size.to_string());
    m.push("dof", report.dof.to_string());
    for &(i, j, r) in &report.pair_residuals {
        m.push_num(&format!("pair_{i}_{j}"), r);
    }
    m.push_num("max_pair_residual", report.max_pair_residual);
    m.push_num("min_singular_value", report.min_singular_value);
    m.push("outcome", outcome_slug(report.outcome));
    out.push('\n');
    out.push_str(&m.render());
    out
}

pub(crate) fn verify_involution(
    args: &VerifyInvolutionArgs,
    cfg: Option<&ConfigFile>,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let params = ModelParams::merge(&args.model, cfg)?;
    let ctx = resolve_model(&params)?;
    let f_texts: Vec<String> = if !args.f.is_empty() {
        args.f.clone()
    } else {
        pick_string(&None, cfg, "run", "family")
            .map(|list| {
                list.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    };
    if f_texts.is_empty() {
        return Err(CliError::Validation(
            "verify-involution needs family members: pass --f (repeatable) or set [run] family"
                .to_string(),
        ));
    }
    let fs = f_texts
        .iter()
        .map(|t| ctx.function(t))
        .collect::<Result<Vec<Expression>, CliError>>()?;
    let h_text = pick_string(&args.energy, cfg, "run", "h");
    let (h_name, h) = ctx.energy_argument(h_text.as_deref())?;
    let samples = sample_count(args.samples, cfg)?;
    let sampler = SamplerSpec::for_model(&ctx.model, seed, samples).map_err(classify_reduction)?;
    let report =
        verify_involution_numeric(&fs, &h, &ctx.model.chart, &sampler).map_err(classify_reduction)?;

    // Pair indices refer to the family with the energy appended when it was
    // not already a member.
    let mut names = f_texts.clone();
    if report.family_size > fs.len() {
        names.push(h_name.clone());
    }
    let text = render_involution_report(&ctx, &names, &h_name, seed, &report);
    let exit = if report.outcome == InvolutionOutcome::Accepted {
        0
    } else {
        3
    };
    let output = pick_string(&args.output, cfg, "output", "path");
    deliver(text, exit, output.as_deref(), out_dir)
}

// ------------------------------------------------------- compare-reduction

fn render_comparison_report(
    bodies: usize,
    dim: usize,
    masses: &[f64],
    potential_text: &str,
    spec: &IntegratorSpec,
    report: &ComparisonReport,
) -> String {
    let pair_names = rho_names(bodies);
    let masses_text = masses
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ");

    let mut out = String::new();
    let _ = writeln!(out, "== compare-reduction ==");
    let _ = writeln!(out, "bodies: {bodies} in dimension {dim}");
    let _ = writeln!(out, "masses: {masses_text}");
    let _ = writeln!(out, "potential: {potential_text}");
    let _ = writeln!(
        out,
        "scheme: {}, dt {}, steps {}",
        spec.scheme,
        num(spec.dt),
        report.steps
    );
    let _ = writeln!(
        out,
        "velocity-solve residual at the start: {}",
        num(report.momentum_match_residual)
    );
    let _ = writeln!(
        out,
        "start energies: full {}, center-of-mass {}, reduced {}",
        num(report.full_energy),
        num(report.cm_kinetic_energy),
        num(report.reduced_energy)
    );
    let _ = writeln!(
        out,
        "largest relative deviation of any squared distance: {}",
        num(report.max_relative_deviation)
    );
    for (name, dev) in pair_names.iter().zip(&report.per_pair_deviation) {
        let _ = writeln!(out, "  {name}: {}", num(*dev));
    }
    if let Some(vol) = &report.volume {
        let _ = writeln!(
            out,
            "content route: largest relative deviation {} (momentum residual {}, energy {})",
            num(vol.max_relative_deviation),
            num(vol.momentum_residual),
            num(vol.energy)
        );
    }

    let mut m = Machine::new("compare-reduction");
    m.push("bodies", bodies.to_string());
    m.push("dim", dim.to_string());
    m.push(
        "masses",
        masses.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","),
    );
    m.push("potential", potential_text);
    m.push("scheme", spec.scheme.name());
    m.push_num("dt", spec.dt);
    m.push("steps", report.steps.to_string());
    m.push_num("momentum_match_residual", report.momentum_match_residual);
    m.push_num("full_energy", report.full_energy);
    m.push_num("cm_kinetic_energy", report.cm_kinetic_energy);
    m.push_num("reduced_energy", report.reduced_energy);
    m.push_num("max_relative_deviation", report.max_relative_deviation);
    for (name, dev) in pair_names.iter().zip(&report.per_pair_deviation) {
        m.push_num(&format!("dev_{name}"), *dev);
    }
    if let Some(vol) = &report.volume {
        m.push_num("volume_max_relative_deviation", vol.max_relative_deviation);
        m.push_num("volume_momentum_residual", vol.momentum_residual);
        m.push_num("volume_energy", vol.energy);
    }
    out.push('\n');
    out.push_str(&m.render());
    out
}

pub(crate) fn compare_reduction(
    args: &CompareReductionArgs,
    cfg: Option<&ConfigFile>,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let params = ModelParams::merge(&args.model, cfg)?;
    match params.name.as_deref() {
        None | Some("nbody" | "HN") => {}
        Some(other) => {
            return Err(CliError::Validation(format!(
                "compare-reduction runs on the Cartesian n-body system; got model `{other}`"
            )))
        }
    }
    let n = params.n.unwrap_or(3);
    if n < 2 {
        return Err(CliError::Validation(
            "comparing representations needs at least two bodies".to_string(),
        ));
    }
    let dim = params.dim.unwrap_or(3);
    let masses = params.masses.clone().unwrap_or_else(|| vec![1.0; n]);
    let potential_text = params
        .potential
        .clone()
        .unwrap_or_else(|| default_rho_potential(n));
    let potential = Expression::parse(&potential_text)
        .map_err(|e| CliError::Validation(format!("potential: {e}")))?;
    let volume_potential = pick_string(&args.volume_potential, cfg, "model", "volume-potential")
        .map(|text| {
            Expression::parse(&text)
                .map_err(|e| CliError::Validation(format!("volume potential: {e}")))
        })
        .transpose()?;

    // A throwaway Cartesian system supplies the chart so named initial
    // values order themselves; the comparison rebuilds both sides itself.
    let probe_potential = Expression::parse("r12").expect("fixed probe symbol");
    let probe = nbody_cartesian(n, dim, &masses, &probe_potential)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let x0 = initial_state(&probe.model.chart, &probe.model, cfg, &args.set, false, 0)?;
    let spec = integrator_spec(&args.integrator, cfg)?;

    let setup = ComparisonSetup {
        bodies: n,
        dim,
        masses: masses.clone(),
        potential,
        volume_potential,
    };
    let report =
        compare_full_vs_reduced(&setup, x0.coords(), &spec).map_err(classify_reduction)?;
    let text = render_comparison_report(n, dim, &masses, &potential_text, &spec, &report);
    let output = pick_string(&args.output, cfg, "output", "path");
    deliver(text, 0, output.as_deref(), out_dir)
}

// ------------------------------------------------------------------ bracket

pub(crate) fn bracket(
    args: &BracketArgs,
    cfg: Option<&ConfigFile>,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let opts = ModelOpts {
        model: args.chart.clone(),
        ..ModelOpts::default()
    };
    let params = ModelParams::merge(&opts, cfg)?;
    let ctx = resolve_model(&params)?;
    let f_text = pick_string(&args.f, cfg, "run", "f").ok_or_else(|| {
        CliError::Validation("bracket needs --f (or [run] f)".to_string())
    })?;
    let g_text = pick_string(&args.g, cfg, "run", "g").ok_or_else(|| {
        CliError::Validation("bracket needs --g (or [run] g)".to_string())
    })?;
    let f = ctx.function(&f_text)?;
    let g = ctx.function(&g_text)?;
    let symbolic =
        args.symbolic || pick_parsed(None::<bool>, cfg, "run", "symbolic")?.unwrap_or(false);

    let mut out = String::new();
    let _ = writeln!(out, "== bracket ==");
    let _ = writeln!(
        out,
        "model: {} [chart {}]",
        ctx.model.id,
        ctx.model.chart.name()
    );
    let _ = writeln!(out, "f: {f_text}");
    let _ = writeln!(out, "g: {g_text}");
    let mut m = Machine::new("bracket");
    m.push("model", ctx.model.id.as_str());
    m.push("chart", ctx.model.chart.name());
    m.push("f", f_text.as_str());
    m.push("g", g_text.as_str());

    if symbolic {
        let to_poly = |name: &str, e: &Expression| {
            poly_from_expression(e).map_err(|err| {
                CliError::Validation(format!(
                    "`{name}` is outside the exact polynomial layer: {err}"
                ))
            })
        };
        let bracket = poly_poisson(&to_poly(&f_text, &f)?, &to_poly(&g_text, &g)?, &ctx.model.chart);
        let _ = writeln!(out, "exact bracket: {bracket}");
        m.push("mode", "symbolic");
        m.push("bracket", bracket.to_string());
    } else {
        let point = initial_state(&ctx.model.chart, &ctx.model, cfg, &args.at, false, 0)?;
        let value = poisson_bracket(&f, &g, &point).map_err(|e| match e {
            PoissonError::Eval(_) => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        })?;
        let _ = writeln!(out, "value: {}", num(value));
        m.push("mode", "numeric");
        m.push_num("value", value);
    }
    out.push('\n');
    out.push_str(&m.render());
    let output = pick_string(&args.output, cfg, "output", "path");
    deliver(out, 0, output.as_deref(), out_dir)
}

// ------------------------------------------------------------------ catalog

pub(crate) fn catalog(
    args: &CatalogArgs,
    cfg: Option<&ConfigFile>,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let mut out = String::new();
    for model in crate::models::catalog() {
        let chart = &model.chart;
        let _ = writeln!(out, "{:<8}{}", model.id, model.description);
        let _ = writeln!(
            out,
            "        chart {}: q = {}; p = {}",
            chart.name(),
            chart.q_names().join(", "),
            chart.p_names().join(", ")
        );
        let constants: Vec<String> = chart
            .constants()
            .iter()
            .map(|(name, value)| format!("{name} = {value}"))
            .collect();
        if !constants.is_empty() {
            let _ = writeln!(out, "        constants: {}", constants.join(", "));
        }
        if !model.observables.is_empty() {
            let names: Vec<&str> = model
                .observables
                .iter()
                .map(|(n, _)| n.as_str())
                .collect();
            let _ = writeln!(out, "        observables: {}", names.join(", "));
        }
    }
    let output = pick_string(&args.output, cfg, "output", "path");
    deliver(out, 0, output.as_deref(), out_dir)
}
