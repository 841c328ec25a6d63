//! Error measurement, moduli of continuity, Jackson-type bounds and
//! convergence orders.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::activation::DecayExponent;
use crate::domain::{BoxDomain, GridSpec};
use crate::error::{Error, Result};
use crate::fit::ols_slope;
use crate::grid::{evaluate_on_grid, GridField};
use crate::kernel::{KernelProfile, MomentEstimate};
use crate::operators::{LatticeMode, OperatorKind};
use crate::target::{Support, TargetFunction};

/// Factor applied to the numerically estimated moment inside bounds.
pub const MOMENT_SAFETY_FACTOR: f64 = 1.05;

/// Discrete sup norm `max |field - h|` over the field's grid.
pub fn sup_norm_error(field: &GridField, h: &TargetFunction) -> Result<f64> {
    if h.dimension() != field.grid.dimension() {
        return Err(Error::DimensionMismatch {
            expected: field.grid.dimension(),
            got: h.dimension(),
        });
    }
    check_support(h, &field.grid.domain)?;
    if field.values.len() != field.grid.len() {
        return Err(Error::InvalidParameter(format!(
            "field has {} values for a grid of {} points",
            field.values.len(),
            field.grid.len()
        )));
    }
    Ok(field.max_deviation(h))
}

fn check_support(h: &TargetFunction, domain: &BoxDomain) -> Result<()> {
    if let Support::Box(support) = h.support() {
        let inside = support
            .intervals()
            .iter()
            .zip(domain.intervals())
            .all(|(&(sa, sb), &(a, b))| sa <= a && b <= sb);
        if !inside {
            return Err(Error::InvalidParameter(format!(
                "target `{}` is not defined on the whole domain {:?}",
                h.label(),
                domain.intervals()
            )));
        }
    }
    Ok(())
}

/// Grid estimate of `omega(h, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    /// Largest difference found over grid pairs; never exceeds the true value.
    pub lower: f64,
    /// Largest `|h(x) - h(y)| / ||x - y||^beta` over the same pairs.
    pub lipschitz_constant: f64,
    pub beta: f64,
    /// `max(lower, lipschitz_constant * delta^beta)`.
    pub upper: f64,
    pub points_per_axis: usize,
}

/// Estimates the modulus of continuity of `h` on `domain` by comparing every
/// pair of grid points at distance at most `delta`.
///
/// `resolution` is the number of points per axis; the grid spacing must not
/// exceed `delta / 4`. The Lipschitz fit uses the exponent `beta`.
pub fn modulus_of_continuity(
    h: &TargetFunction,
    domain: &BoxDomain,
    delta: f64,
    resolution: usize,
    beta: f64,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    if h.dimension() != domain.dimension() {
        return Err(Error::DimensionMismatch {
            expected: domain.dimension(),
            got: h.dimension(),
        });
    }
    check_support(h, domain)?;
    let grid = GridSpec::uniform(domain.clone(), resolution)?;
    let r = grid.dimension();
    let spacing: Vec<f64> = (0..r).map(|axis| grid.spacing(axis)).collect();
    let coarsest = spacing.iter().cloned().fold(0.0, f64::max);
    if coarsest > delta / 4.0 {
        return Err(Error::ResolutionTooCoarse {
            spacing: coarsest,
            limit: delta / 4.0,
        });
    }

    let values: Vec<f64> = grid.points().map(|p| h.eval(&p)).collect();
    let offsets = pair_offsets(&spacing, resolution, delta);
    let strides: Vec<usize> = (0..r)
        .map(|axis| resolution.pow((r - 1 - axis) as u32))
        .collect();

    let (lower, lipschitz_constant) = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let mut index = vec![0usize; r];
            let mut rest = flat;
            for axis in (0..r).rev() {
                index[axis] = rest % resolution;
                rest /= resolution;
            }
            let here = values[flat];
            let mut diff: f64 = 0.0;
            let mut ratio: f64 = 0.0;
            'offsets: for (offset, distance) in &offsets {
                let mut other = 0usize;
                for axis in 0..r {
                    let j = index[axis] as i64 + offset[axis];
                    if j < 0 || j >= resolution as i64 {
                        continue 'offsets;
                    }
                    other += j as usize * strides[axis];
                }
                let d = (here - values[other]).abs();
                diff = diff.max(d);
                ratio = ratio.max(d / distance.powf(beta));
            }
            (diff, ratio)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));

    Ok(ModulusEstimate {
        delta,
        lower,
        lipschitz_constant,
        beta,
        upper: lower.max(lipschitz_constant * delta.powf(beta)),
        points_per_axis: resolution,
    })
}

/// Nonzero integer offsets with positive leading entry and physical length
/// at most `delta`, together with that length.
fn pair_offsets(spacing: &[f64], resolution: usize, delta: f64) -> Vec<(Vec<i64>, f64)> {
    let r = spacing.len();
    let limit = delta * (1.0 + 1e-12);
    let reach: Vec<i64> = spacing
        .iter()
        .map(|&s| ((limit / s).floor() as i64).min(resolution as i64 - 1))
        .collect();
    let mut out = Vec::new();
    let mut offset: Vec<i64> = reach.iter().map(|&m| -m).collect();
    loop {
        let leading = offset.iter().find(|&&o| o != 0).copied().unwrap_or(0);
        if leading > 0 {
            let length = offset
                .iter()
                .zip(spacing)
                .map(|(&o, &s)| (o as f64 * s).powi(2))
                .sum::<f64>()
                .sqrt();
            if length <= limit {
                out.push((offset.clone(), length));
            }
        }
        let mut axis = r;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if offset[axis] < reach[axis] {
                offset[axis] += 1;
                break;
            }
            offset[axis] = -reach[axis];
        }
    }
}

/// Points per axis giving spacing at most `delta / 4` on every axis, and at
/// least `minimum`.
pub fn modulus_resolution(domain: &BoxDomain, delta: f64, minimum: usize) -> usize {
    let widest = domain
        .intervals()
        .iter()
        .map(|&(a, b)| b - a)
        .fold(0.0, f64::max);
    (((4.0 * widest / delta).ceil() as usize) + 1).max(minimum)
}

/// Jackson-type bound at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub delta_n: f64,
    /// Upper (Lipschitz-extrapolated) estimate of `omega(h, delta_n)`.
    pub omega_term: f64,
    /// Grid lower estimate of `omega(h, delta_n)`.
    pub omega_lower: f64,
    pub moment_term: f64,
    pub bound: f64,
    pub observed_error: Option<f64>,
    pub violated: bool,
}

/// `max(omega(h, delta_n), m_alpha / (phi(1)^r n^alpha delta_n^alpha))`.
///
/// `alpha` is taken from `moment.beta`; the moment is inflated by
/// [`MOMENT_SAFETY_FACTOR`].
pub fn jackson_bound(
    n: u64,
    delta_n: f64,
    profile: &KernelProfile,
    moment: &MomentEstimate,
    omega: &ModulusEstimate,
    observed_error: Option<f64>,
) -> Result<BoundReport> {
    let alpha = moment.beta;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    if let DecayExponent::Finite(decay) = profile.activation.decay_exponent() {
        if alpha > decay {
            return Err(Error::MomentMayBeInfinite { beta: alpha, decay });
        }
    }
    if delta_n.is_nan() || delta_n <= 0.0 || (omega.delta - delta_n).abs() > 1e-12 * delta_n {
        return Err(Error::InvalidParameter(format!(
            "modulus computed at delta = {} but delta_n = {delta_n}",
            omega.delta
        )));
    }
    let moment_term = MOMENT_SAFETY_FACTOR * moment.value
        / (profile.lattice_floor() * (n as f64).powf(alpha) * delta_n.powf(alpha));
    let bound = omega.upper.max(moment_term);
    Ok(BoundReport {
        n,
        delta_n,
        omega_term: omega.upper,
        omega_lower: omega.lower,
        moment_term,
        bound,
        observed_error,
        violated: observed_error.is_some_and(|e| e > bound),
    })
}

/// Predicted convergence exponent and the optimal `delta_n` exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateExponents {
    /// `alpha beta / (alpha + beta)`.
    pub rate: f64,
    /// `alpha / (alpha + beta)`; `delta_n = n^(-delta_exponent)`.
    pub delta_exponent: f64,
}

pub fn lipschitz_rate(alpha: f64, beta: f64) -> Result<RateExponents> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need alpha > 0 and 0 < beta <= 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(RateExponents {
        rate: alpha * beta / (alpha + beta),
        delta_exponent: alpha / (alpha + beta),
    })
}

/// Least-squares slope of `-ln(error)` against `ln(n)`.
pub fn empirical_order(samples: &[(u64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidSamples(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    for pair in samples.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::InvalidSamples(
                "n must be strictly increasing".into(),
            ));
        }
    }
    if let Some(&(n, e)) = samples.iter().find(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidSamples(format!(
            "error at n = {n} is {e}, must be > 0"
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, e)| -e.ln()).collect();
    ols_slope(&xs, &ys).ok_or_else(|| Error::InvalidSamples("degenerate abscissae".into()))
}

/// Parameters of a bound sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSettings {
    pub alpha: f64,
    pub beta: f64,
    /// Overrides `alpha / (alpha + beta)` in `delta_n = n^(-delta_exponent)`.
    pub delta_exponent: Option<f64>,
    /// Points per axis of the moment grid on `[0, 1]^r`.
    pub moment_resolution: usize,
    /// Box on which `omega` is estimated; defaults to the evaluation grid's domain.
    pub omega_domain: Option<BoxDomain>,
    pub lattice_mode: LatticeMode,
}

impl Default for BoundSettings {
    fn default() -> Self {
        BoundSettings {
            alpha: 2.0,
            beta: 1.0,
            delta_exponent: None,
            moment_resolution: 200,
            omega_domain: None,
            lattice_mode: LatticeMode::Windowed,
        }
    }
}

impl BoundSettings {
    pub fn delta_exponent(&self) -> Result<f64> {
        match self.delta_exponent {
            Some(d) if d > 0.0 && d < 1.0 => Ok(d),
            Some(d) => Err(Error::InvalidParameter(format!(
                "delta exponent must lie in (0, 1), got {d}"
            ))),
            None => Ok(lipschitz_rate(self.alpha, self.beta)?.delta_exponent),
        }
    }
}

/// Bound reports for `kind` over `n_list`, each with the observed grid error.
///
/// `kind` is [`OperatorKind::MaxMin`] for the box operators or
/// [`OperatorKind::QuasiMaxMin`] for quasi-interpolation, where the grid
/// domain only selects the evaluation points.
pub fn bound_sweep(
    kind: OperatorKind,
    h: &TargetFunction,
    n_list: &[u64],
    profile: &KernelProfile,
    grid: &GridSpec,
    settings: &BoundSettings,
) -> Result<Vec<BoundReport>> {
    lipschitz_rate(settings.alpha, settings.beta)?;
    let exponent = settings.delta_exponent()?;
    let moment =
        crate::kernel::absolute_moment(profile, settings.alpha, settings.moment_resolution)?;
    let omega_domain = settings
        .omega_domain
        .clone()
        .unwrap_or_else(|| grid.domain.clone());
    n_list
        .iter()
        .map(|&n| {
            let field = evaluate_on_grid(kind, h, n, profile, grid, settings.lattice_mode)?;
            let observed = sup_norm_error(&field, h)?;
            let delta_n = (n as f64).powf(-exponent);
            let resolution = modulus_resolution(&omega_domain, delta_n, 101);
            let omega =
                modulus_of_continuity(h, &omega_domain, delta_n, resolution, settings.beta)?;
            jackson_bound(n, delta_n, profile, &moment, &omega, Some(observed))
        })
        .collect()
}

/// One row of an operator comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: u64,
    pub classical: f64,
    pub max_product: f64,
    pub max_min: f64,
}

/// Description of the run behind an [`ErrorTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableMetadata {
    pub target: String,
    pub activation: String,
    pub domain: Vec<(f64, f64)>,
    pub points_per_axis: Vec<usize>,
    pub lattice_mode: LatticeMode,
    pub max_min_operator: OperatorKind,
}

/// Sup-norm errors of the three box operators for a list of `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    pub metadata: TableMetadata,
}

impl ErrorTable {
    /// Writes `n,classical,max_product,max_min` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        out.write_record(["n", "classical", "max_product", "max_min"])?;
        for row in &self.rows {
            out.write_record([
                row.n.to_string(),
                row.classical.to_string(),
                row.max_product.to_string(),
                row.max_min.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

impl fmt::Display for ErrorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>8}  {:>14}  {:>14}  {:>14}",
            "n", "classical", "max_product", "max_min"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:>8}  {:>14.8}  {:>14.8}  {:>14.8}",
                row.n, row.classical, row.max_product, row.max_min
            )?;
        }
        Ok(())
    }
}

/// Runs the classical, max-product and max-min operators for every `n` on a
/// shared grid. With `extended` the max-min column uses the extended
/// operator, for targets outside `[0, 1]`.
pub fn compare_operators(
    h: &TargetFunction,
    n_list: &[u64],
    profile: &KernelProfile,
    grid: &GridSpec,
    mode: LatticeMode,
    extended: bool,
) -> Result<ErrorTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n list is empty".into()));
    }
    for pair in n_list.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidParameter(
                "n list must be strictly increasing".into(),
            ));
        }
    }
    let max_min_kind = if extended {
        OperatorKind::ExtendedMaxMin
    } else {
        OperatorKind::MaxMin
    };
    let kinds = [
        OperatorKind::Classical,
        OperatorKind::MaxProduct,
        max_min_kind,
    ];
    let cells: Vec<(u64, OperatorKind)> = n_list
        .iter()
        .flat_map(|&n| kinds.iter().map(move |&k| (n, k)))
        .collect();
    let errors: Vec<f64> = cells
        .par_iter()
        .map(|&(n, kind)| {
            let field = evaluate_on_grid(kind, h, n, profile, grid, mode)?;
            sup_norm_error(&field, h)
        })
        .collect::<Result<_>>()?;
    let rows = n_list
        .iter()
        .zip(errors.chunks(3))
        .map(|(&n, e)| ErrorRow {
            n,
            classical: e[0],
            max_product: e[1],
            max_min: e[2],
        })
        .collect();
    Ok(ErrorTable {
        rows,
        metadata: TableMetadata {
            target: h.label().to_string(),
            activation: profile.activation.to_string(),
            domain: grid.domain.intervals().to_vec(),
            points_per_axis: grid.points_per_axis.clone(),
            lattice_mode: mode,
            max_min_operator: max_min_kind,
        },
    })
}
