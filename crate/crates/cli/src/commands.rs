use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use povm_gap::berezin::{
    berezin_gap, berezin_sweep, build_berezin_povm, build_quadrature, default_quadrature, expansion_check, expansion_limit,
    QuantizationLevel, SphereQuadrature,
};
use povm_gap::generators::{projective, random_povm, sic_qubit, RandomKind};
use povm_gap::geometry::{best_fit, cloud_from_povm, diffusion_spectrum, gap_from_geometry, robustness_check, wasserstein};
use povm_gap::io::{parse_povm, povm_to_json_with_config, to_json};
use povm_gap::measurement::{convergence_rate, SimConfig};
use povm_gap::operator::{bloch_state, maximally_mixed};
use povm_gap::povm::{bottleneck, minimal_noise, spectral_gap, BottleneckMode};
use povm_gap::{DensityOperator, DiscretePovm, HermitianOperator};

use crate::args::*;

/// Marks a failure caused by the user's input (exit code 2).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_povm(path: &Path, tol: f64) -> Result<DiscretePovm> {
    parse_povm(&read_text(path)?, tol).with_context(|| path.display().to_string())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a Cli,
    result: T,
}

/// Rendered output of a command.
pub struct Output {
    pub text: String,
    /// Extra files to write, `(path, contents)`.
    pub files: Vec<(std::path::PathBuf, String)>,
}

impl Output {
    fn text(text: String) -> Self {
        Self { text, files: Vec::new() }
    }
}

fn envelope<T: Serialize>(cli: &Cli, result: T) -> Output {
    Output::text(to_json(&Envelope { config: cli, result }))
}

fn format_or(cli: &Cli, default: Format) -> Format {
    cli.global.format.unwrap_or(default)
}

fn json_only(cli: &Cli) -> Result<()> {
    if format_or(cli, Format::Json) == Format::Csv {
        return Err(input_error("this command has no CSV output"));
    }
    Ok(())
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Generate(args) => generate(cli, args),
        Command::Validate(f) => {
            json_only(cli)?;
            let povm = read_povm(&f.input, cli.global.tol)?;
            Ok(envelope(
                cli,
                json!({
                    "valid": true,
                    "dim": povm.dim(),
                    "outcomes": povm.len(),
                    "pure": povm.is_pure(),
                    "normalization_defect": povm.normalization_defect(),
                }),
            ))
        }
        Command::Gap(f) => {
            json_only(cli)?;
            let povm = read_povm(&f.input, cli.global.tol)?;
            let report = spectral_gap(&povm)?;
            let geometric = gap_from_geometry(&povm)?;
            let discrepancy = (geometric - report.gamma).abs();
            Ok(envelope(
                cli,
                json!({
                    "gamma": report.gamma,
                    "spectrum_e": report.spectrum_e,
                    "spectrum_b": report.spectrum_b,
                    "match_error": report.match_error,
                    "geometric_gap": geometric,
                    "geometric_discrepancy": discrepancy,
                }),
            ))
        }
        Command::Noise(f) => {
            json_only(cli)?;
            let povm = read_povm(&f.input, cli.global.tol)?;
            let noise = minimal_noise(&povm)?;
            let gamma = spectral_gap(&povm)?.gamma;
            Ok(envelope(
                cli,
                json!({
                    "minimal_noise": noise.value,
                    "minimizer": noise.minimizer,
                    "gamma": gamma,
                    "discrepancy": (noise.value - gamma).abs(),
                }),
            ))
        }
        Command::Bottleneck(args) => {
            json_only(cli)?;
            let povm = read_povm(&args.input, cli.global.tol)?;
            let mode = if args.heuristic {
                BottleneckMode::Heuristic { seed: cli.global.seed }
            } else {
                BottleneckMode::Exact
            };
            Ok(envelope(cli, bottleneck(&povm, mode)?))
        }
        Command::Simulate(args) => simulate(cli, args),
        Command::Geometry(GeometryCommand::Bestfit(f)) => {
            json_only(cli)?;
            let povm = read_povm(&f.input, cli.global.tol)?;
            let fit = best_fit(&cloud_from_povm(&povm))?;
            let gap = 1.0 - povm.dim() as f64 * fit.k;
            Ok(envelope(cli, json!({ "fit": fit, "geometric_gap": gap })))
        }
        Command::Geometry(GeometryCommand::Diffusion(args)) => diffusion(cli, args),
        Command::Wasserstein(args) => {
            json_only(cli)?;
            let a = read_povm(&args.first, cli.global.tol)?;
            let b = read_povm(&args.second, cli.global.tol)?;
            let report = robustness_check(&a, &b)?;
            let (_, solution) = wasserstein(&cloud_from_povm(&a), &cloud_from_povm(&b))?;
            Ok(envelope(
                cli,
                json!({
                    "delta": report.delta,
                    "gap_a": report.gamma_v,
                    "gap_b": report.gamma_w,
                    "bound": report.bound,
                    "margin": report.bound - (report.gamma_v - report.gamma_w).abs(),
                    "pass": report.holds,
                    "plan": solution.plan,
                    "duality_gap": solution.duality_gap,
                }),
            ))
        }
        Command::Berezin(cmd) => berezin(cli, cmd),
    }
}

fn quadrature(k: usize, ntheta: Option<usize>, nphi: Option<usize>) -> Result<SphereQuadrature> {
    let level = QuantizationLevel::new(k)?;
    Ok(match (ntheta, nphi) {
        (None, None) => default_quadrature(level)?,
        (t, p) => build_quadrature(level, t.unwrap_or(k + 1), p.unwrap_or(2 * k + 1))?,
    })
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<Output> {
    json_only(cli)?;
    let povm = match args.kind {
        GeneratorKind::Projective => {
            if args.dim == 0 {
                return Err(input_error("dimension must be positive"));
            }
            projective(args.dim)
        }
        GeneratorKind::SicQubit => sic_qubit(),
        GeneratorKind::Random => {
            let kind = if args.mixed { RandomKind::Mixed } else { RandomKind::Pure };
            random_povm(args.dim, args.outcomes, cli.global.seed, kind)?
        }
        GeneratorKind::Berezin => build_berezin_povm(&quadrature(args.k, args.ntheta, args.nphi)?)?,
    };
    let config = serde_json::to_value(cli)?;
    Ok(Output::text(povm_to_json_with_config(&povm, Some(config))))
}

fn initial_state(spec: &str, povm: &DiscretePovm) -> Result<DensityOperator> {
    let n = povm.dim();
    let index = |s: &str, len: usize| -> Result<usize> {
        let i: usize = s.parse().map_err(|_| input_error(format!("bad index in --rho0 {spec}")))?;
        if i >= len {
            return Err(input_error(format!("--rho0 {spec}: index out of range (< {len})")));
        }
        Ok(i)
    };
    if spec == "mixed" {
        return Ok(maximally_mixed(n)?);
    }
    if let Some(s) = spec.strip_prefix("outcome:") {
        return Ok(povm.outcomes()[index(s, povm.len())?].state.clone());
    }
    if let Some(s) = spec.strip_prefix("basis:") {
        let j = index(s, n)?;
        let mut d = vec![0.0; n];
        d[j] = 1.0;
        return Ok(DensityOperator::new(HermitianOperator::from_real_diagonal(&d)?)?);
    }
    if let Some(s) = spec.strip_prefix("bloch:") {
        if n != 2 {
            return Err(input_error("bloch vectors need dimension 2"));
        }
        let r: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| input_error(format!("bad bloch vector {s}")))?;
        if r.len() != 3 {
            return Err(input_error("bloch vectors have three components"));
        }
        return Ok(DensityOperator::new(bloch_state([r[0], r[1], r[2]]))?);
    }
    let text = read_text(Path::new(spec))?;
    let rho: DensityOperator =
        serde_json::from_str(&text).map_err(|e| input_error(format!("{spec}: line {}: {e}", e.line())))?;
    if rho.dim() != n {
        return Err(input_error(format!("{spec}: dimension {} does not match the POVM ({n})", rho.dim())));
    }
    Ok(rho)
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<Output> {
    let povm = read_povm(&args.input, cli.global.tol)?;
    let rho0 = initial_state(&args.rho0, &povm)?;
    let config = SimConfig::new(cli.global.seed, args.steps, args.trajectories)?;
    let report = convergence_rate(&povm, &rho0, &config)?;
    let csv = report.to_csv();
    let mut warnings = Vec::new();
    if !povm.is_pure() {
        warnings.push("POVM is not pure: the convergence rate is not guaranteed to match the gap".to_string());
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut out = match format_or(cli, Format::Json) {
        Format::Csv => Output::text(csv.clone()),
        Format::Json => {
            let fitted = report.ensemble_fit.as_ref().map(|f| f.slope);
            let relative_error = match (fitted, report.predicted_log_rate) {
                (Some(f), Some(p)) => Some(((f - p) / p).abs()),
                _ => None,
            };
            envelope(
                cli,
                json!({
                    "report": report,
                    "fitted_log_rate": fitted,
                    "relative_error": relative_error,
                    "warnings": warnings,
                }),
            )
        }
    };
    if let Some(path) = &args.csv {
        out.files.push((path.clone(), csv));
    }
    Ok(out)
}

fn diffusion(cli: &Cli, args: &DiffusionArgs) -> Result<Output> {
    if !(args.tau > 0.0) {
        return Err(input_error("--tau must be positive"));
    }
    let povm = read_povm(&args.input, cli.global.tol)?;
    let spec = diffusion_spectrum(&povm, args.threshold)?;
    let m = spec.distance_matrix(args.tau)?;
    Ok(match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut text = String::new();
            for row in m.row_iter() {
                let cells: Vec<String> = row.iter().map(|x| csv_float(*x)).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            Output::text(text)
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
            envelope(cli, json!({ "spectrum": spec, "distances": rows }))
        }
    })
}

fn berezin(cli: &Cli, cmd: &BerezinCommand) -> Result<Output> {
    match cmd {
        BerezinCommand::Gap(args) => {
            json_only(cli)?;
            let report = berezin_gap(&quadrature(args.k, args.ntheta, args.nphi)?)?;
            let error = report.closed_form_error();
            Ok(envelope(cli, json!({ "report": report, "closed_form_error": error })))
        }
        BerezinCommand::Sweep(args) => {
            let reports = berezin_sweep(args.kmax)?;
            Ok(match format_or(cli, Format::Json) {
                Format::Json => envelope(cli, reports),
                Format::Csv => {
                    let mut text = String::from("k,gap,gap_times_k,closed_form,defect\n");
                    for r in &reports {
                        text.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.k,
                            csv_float(r.gap),
                            csv_float(r.gap_times_k),
                            csv_float(r.closed_form),
                            csv_float(r.defect)
                        ));
                    }
                    Output::text(text)
                }
            })
        }
        BerezinCommand::Expansion(args) => {
            json_only(cli)?;
            let quad = default_quadrature(QuantizationLevel::new(args.k)?)?;
            let report = expansion_check(&quad, args.l)?;
            let limit = if args.k >= args.order + args.l.max(1) {
                Some(expansion_limit(args.l, args.k, args.order)?)
            } else {
                None
            };
            Ok(envelope(cli, json!({ "report": report, "limit": limit })))
        }
    }
}

/// Exit code for a failed run: 2 for invalid input, 1 for numerical failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<povm_gap::Error>() {
        Some(e) if !e.is_input_error() => 1,
        Some(_) => 2,
        None => 1,
    }
}
