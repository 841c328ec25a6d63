//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use maxmin::{
    bound_sweep, compare_operators, default_tail_epsilon, empirical_order, evaluate_on_grid,
    lipschitz_rate, run_suite, sup_norm_error, Activation, BoundSettings, BoxDomain, GridSpec,
    KernelProfile, LatticeMode, OperatorKind, Outcome, SuiteConfig,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::expr::TargetSpec;
use crate::CliError;

const DEFAULT_GRID: usize = 101;
const COMPARE_N: [u64; 6] = [20, 55, 77, 100, 150, 1000];
const RATES_N: [u64; 5] = [25, 50, 100, 200, 400];

fn activation(config: &RunConfig) -> Result<Activation, CliError> {
    let act: Activation = config.activation.as_deref().unwrap_or("logistic").parse()?;
    if let Some(warning) = act.assumption_warning() {
        eprintln!("warning: {warning}");
    }
    Ok(act)
}

fn profile(config: &RunConfig, act: Activation, r: usize) -> Result<KernelProfile, CliError> {
    let eps = config
        .tail_eps
        .unwrap_or_else(|| default_tail_epsilon(&act));
    Ok(KernelProfile::with_tail_epsilon(act, r, eps)?)
}

fn target_spec(config: &RunConfig, default: &str) -> Result<TargetSpec, CliError> {
    TargetSpec::parse(config.target.as_deref().unwrap_or(default))
}

fn domain(config: &RunConfig, spec: &TargetSpec) -> Result<BoxDomain, CliError> {
    match &config.domain {
        None => Ok(spec.natural_domain(spec.natural_dimension())),
        Some(bounds) => {
            if bounds.is_empty() || bounds.len() % 2 != 0 {
                return Err(CliError::Config(format!(
                    "domain needs pairs a1,b1[,a2,b2,...], got {} numbers",
                    bounds.len()
                )));
            }
            Ok(BoxDomain::new(
                bounds.chunks(2).map(|p| (p[0], p[1])).collect(),
            )?)
        }
    }
}

fn n_list(config: &RunConfig, default: &[u64]) -> Result<Vec<u64>, CliError> {
    let list = config.n.clone().unwrap_or_else(|| default.to_vec());
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::Config(
            "n values must be positive integers".into(),
        ));
    }
    Ok(list)
}

fn grid(config: &RunConfig, domain: BoxDomain) -> Result<GridSpec, CliError> {
    Ok(GridSpec::uniform(
        domain,
        config.grid.unwrap_or(DEFAULT_GRID),
    )?)
}

fn mode(config: &RunConfig) -> LatticeMode {
    if config.full_lattice {
        LatticeMode::Full
    } else {
        LatticeMode::Windowed
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Compute(format!("cannot create {}: {e}", path.display())))
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Compute(e.to_string())
}

pub fn compare(config: &RunConfig) -> Result<(), CliError> {
    let act = activation(config)?;
    let spec = target_spec(config, "table1")?;
    let domain = domain(config, &spec)?;
    let h = spec.build(&domain, config.extended)?;
    let ns = n_list(config, &COMPARE_N)?;
    let grid = grid(config, domain.clone())?;
    let profile = profile(config, act, domain.dimension())?;
    let table = compare_operators(&h, &ns, &profile, &grid, mode(config), config.extended)?;
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("error_table.csv"));
    table.write_csv(create(&out)?)?;
    print!("{table}");
    Ok(())
}

pub fn surface(config: &RunConfig) -> Result<(), CliError> {
    let act = activation(config)?;
    let default_target = match config.operator.as_deref() {
        Some("quasi_max_min") | Some("quasi") => "cosine_bump",
        _ => "table1",
    };
    let spec = target_spec(config, default_target)?;
    let domain = domain(config, &spec)?;
    let h = spec.build(&domain, config.extended)?;
    let kind: OperatorKind = match config.operator.as_deref() {
        Some(name) => name.parse()?,
        None if config.extended => OperatorKind::ExtendedMaxMin,
        None => OperatorKind::MaxMin,
    };
    let n = match n_list(config, &[50])?.as_slice() {
        [n] => *n,
        more => {
            return Err(CliError::Config(format!(
                "surface takes a single n, got {} values",
                more.len()
            )))
        }
    };
    let grid = grid(config, domain.clone())?;
    let profile = profile(config, act, domain.dimension())?;
    let field = evaluate_on_grid(kind, &h, n, &profile, &grid, mode(config))?;

    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("surface.csv"));
    field.write_csv(create(&out)?)?;
    let sidecar = out.with_extension("json");
    let mut meta = create(&sidecar)?;
    writeln!(meta, "{}", field.metadata_json()?).map_err(io_error)?;
    meta.flush().map_err(io_error)?;
    println!(
        "{kind} n={n}: {} points, sup deviation from target {}",
        field.values.len(),
        sup_norm_error(&field, &h)?
    );
    Ok(())
}

pub fn kernel(config: &RunConfig) -> Result<(), CliError> {
    let act = activation(config)?;
    let domain = match &config.domain {
        Some(_) => domain(config, &TargetSpec::Table1)?,
        None => BoxDomain::cube(-4.0, 4.0, 2)?,
    };
    let r = domain.dimension();
    let profile = profile(config, act, r)?;
    let points = config.grid.unwrap_or(DEFAULT_GRID);
    let line = GridSpec::uniform(BoxDomain::new(vec![domain.intervals()[0]])?, points)?;
    let surface = GridSpec::uniform(domain.clone(), points)?;

    let stem = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("kernel"));
    let phi_path = suffixed(&stem, "phi.csv");
    let rho_path = suffixed(&stem, "rho.csv");

    let mut phi_out = create(&phi_path)?;
    writeln!(phi_out, "y,phi").map_err(io_error)?;
    for y in line.points() {
        writeln!(phi_out, "{},{}", y[0], profile.phi(y[0])).map_err(io_error)?;
    }
    phi_out.flush().map_err(io_error)?;

    let mut rho_out = create(&rho_path)?;
    let header: Vec<String> = (1..=r)
        .map(|i| format!("y{i}"))
        .chain(["rho".to_string()])
        .collect();
    writeln!(rho_out, "{}", header.join(",")).map_err(io_error)?;
    for y in surface.points() {
        let coords: Vec<String> = y.iter().map(|v| v.to_string()).collect();
        writeln!(rho_out, "{},{}", coords.join(","), profile.rho(&y)?).map_err(io_error)?;
    }
    rho_out.flush().map_err(io_error)?;

    println!("activation        {act}");
    println!("phi(0)            {}", profile.phi(0.0));
    println!("phi(1)            {}", profile.phi(1.0));
    println!("max phi           {}", profile.phi_max);
    println!(
        "truncation radius {} (r = {r}, eps = {:e})",
        profile.truncation_radius, profile.tail_epsilon
    );
    println!("wrote {} and {}", phi_path.display(), rho_path.display());
    Ok(())
}

fn suffixed(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

pub fn verify(config: &RunConfig) -> Result<(), CliError> {
    let act = activation(config)?;
    let mut suite = SuiteConfig::new(act);
    suite.seed = config.seed.unwrap_or(0);
    suite.trials = config.trials.unwrap_or(1000);
    if suite.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    if let Some(eps) = config.tail_eps {
        suite.tail_epsilon = eps;
    }
    let report = run_suite(&suite)?;
    for result in &report.results {
        println!("{result}");
    }
    if let Some(out) = &config.out {
        let mut file = create(out)?;
        serde_json::to_writer_pretty(&mut file, &report)
            .map_err(|e| CliError::Compute(e.to_string()))?;
        writeln!(file).map_err(io_error)?;
        file.flush().map_err(io_error)?;
    }
    let failed: Vec<&str> = report
        .results
        .iter()
        .filter(|r| r.outcome == Outcome::Fail)
        .map(|r| r.id)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::PropertyFailure(format!(
            "properties failed: {}",
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct RatesSummary {
    empirical_order: f64,
    predicted_rate: f64,
    delta_exponent: f64,
    violations: Vec<u64>,
}

pub fn rates(config: &RunConfig, inject_error: Option<f64>) -> Result<(), CliError> {
    let act = activation(config)?;
    let kind = match config.operator.as_deref().unwrap_or("max_min").parse()? {
        k @ (OperatorKind::MaxMin | OperatorKind::QuasiMaxMin) => k,
        other => {
            return Err(CliError::Config(format!(
                "rates supports max_min and quasi_max_min, got {other}"
            )))
        }
    };
    let quasi = kind == OperatorKind::QuasiMaxMin;
    let spec = target_spec(config, if quasi { "cosine_bump" } else { "table1" })?;
    let domain = domain(config, &spec)?;
    let h = spec.build(&domain, false)?;
    let ns = n_list(config, &RATES_N)?;
    if ns.len() < 3 {
        return Err(CliError::Config(
            "rates needs at least 3 values of n".into(),
        ));
    }
    let grid = grid(config, domain.clone())?;
    let r = domain.dimension();
    let profile = profile(config, act, r)?;
    let settings = BoundSettings {
        alpha: config.alpha.unwrap_or(2.0),
        beta: config.beta.unwrap_or(1.0),
        delta_exponent: config.delta_exp,
        moment_resolution: if r <= 2 { 200 } else { 60 },
        omega_domain: quasi.then(|| widened(&domain, 2.0)).transpose()?,
        lattice_mode: mode(config),
    };
    let rate = lipschitz_rate(settings.alpha, settings.beta)?;
    let mut reports = bound_sweep(kind, &h, &ns, &profile, &grid, &settings)?;
    if let Some(extra) = inject_error {
        for report in &mut reports {
            let observed = report.observed_error.unwrap_or(0.0) + extra;
            report.observed_error = Some(observed);
            report.violated = observed > report.bound;
        }
    }
    let samples: Vec<(u64, f64)> = reports
        .iter()
        .map(|r| (r.n, r.observed_error.unwrap_or(0.0)))
        .collect();
    let summary = RatesSummary {
        empirical_order: empirical_order(&samples)?,
        predicted_rate: rate.rate,
        delta_exponent: settings.delta_exponent()?,
        violations: reports.iter().filter(|r| r.violated).map(|r| r.n).collect(),
    };

    let mut lines = Vec::new();
    for report in &reports {
        lines.push(serde_json::to_string(report).map_err(|e| CliError::Compute(e.to_string()))?);
    }
    lines.push(serde_json::to_string(&summary).map_err(|e| CliError::Compute(e.to_string()))?);
    for line in &lines {
        println!("{line}");
    }
    if let Some(out) = &config.out {
        let mut file = create(out)?;
        for line in &lines {
            writeln!(file, "{line}").map_err(io_error)?;
        }
        file.flush().map_err(io_error)?;
    }
    if summary.violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::PropertyFailure(format!(
            "observed error exceeds the bound at n = {:?}",
            summary.violations
        )))
    }
}

/// `domain` with every side pushed out by `margin`.
fn widened(domain: &BoxDomain, margin: f64) -> Result<BoxDomain, CliError> {
    Ok(BoxDomain::new(
        domain
            .intervals()
            .iter()
            .map(|&(a, b)| (a - margin, b + margin))
            .collect(),
    )?)
}
