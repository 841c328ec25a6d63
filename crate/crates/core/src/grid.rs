//! Dense operator evaluation on uniform grids and its CSV/JSON export.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{build_lattice, BoxDomain, GridSpec};
use crate::error::{Error, Result};
use crate::kernel::KernelProfile;
use crate::operators::{Evaluation, Evaluator, LatticeMode, OperatorKind, Regime};
use crate::target::TargetFunction;

/// Aggregated truncation statistics of a grid evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub lattice_mode: LatticeMode,
    pub base_radius: f64,
    pub max_radius: f64,
    pub widened_points: usize,
    pub inexact_points: usize,
    pub max_omitted_bound: f64,
    pub tail_epsilon: f64,
}

/// Metadata written next to a grid field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMetadata {
    pub operator: OperatorKind,
    pub n: u64,
    pub activation: String,
    pub target: String,
    pub dimension: usize,
    pub domain: Vec<(f64, f64)>,
    pub points_per_axis: Vec<usize>,
    pub truncation: TruncationReport,
}

/// Operator values on a grid in row-major order (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub metadata: FieldMetadata,
}

impl GridField {
    /// Writes `y1,...,yr,value` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let mut header: Vec<String> = (1..=self.grid.dimension())
            .map(|i| format!("y{i}"))
            .collect();
        header.push("value".into());
        out.write_record(&header)?;
        for (point, value) in self.grid.points().zip(&self.values) {
            let mut row: Vec<String> = point.iter().map(|v| v.to_string()).collect();
            row.push(value.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn metadata_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.metadata)?)
    }

    /// Largest `|value - h(point)|` over the grid.
    pub fn max_deviation(&self, h: &TargetFunction) -> f64 {
        self.grid
            .points()
            .zip(&self.values)
            .map(|(p, v)| (v - h.eval(&p)).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates `kind` at every point of `grid`.
///
/// Points are processed in parallel; each value depends only on its own
/// point, so the field is identical for any thread count.
pub fn evaluate_on_grid(
    kind: OperatorKind,
    h: &TargetFunction,
    n: u64,
    profile: &KernelProfile,
    grid: &GridSpec,
    mode: LatticeMode,
) -> Result<GridField> {
    let domain: &BoxDomain = &grid.domain;
    if grid.dimension() != profile.dimension {
        return Err(Error::DimensionMismatch {
            expected: profile.dimension,
            got: grid.dimension(),
        });
    }
    let evaluator = Evaluator::new(profile, mode);
    let regime = match kind {
        OperatorKind::ExtendedMaxMin => {
            let lattice = build_lattice(n, domain)?;
            let points: Vec<Vec<f64>> = grid.points().collect();
            let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
            Some(Regime::detect(h, &lattice, &refs)?)
        }
        _ => None,
    };
    let evaluations: Vec<Evaluation> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let y = grid.point(flat);
            match regime {
                Some(regime) => evaluator.extended_with_regime(h, n, domain, &y, regime),
                None => evaluator.evaluate(kind, h, n, domain, &y),
            }
        })
        .collect::<Result<_>>()?;

    let truncation = TruncationReport {
        lattice_mode: mode,
        base_radius: profile.truncation_radius,
        max_radius: evaluations
            .iter()
            .map(|e| e.stats.radius)
            .fold(0.0, f64::max),
        widened_points: evaluations.iter().filter(|e| e.stats.widened).count(),
        inexact_points: evaluations.iter().filter(|e| !e.stats.exact).count(),
        max_omitted_bound: evaluations
            .iter()
            .map(|e| e.stats.omitted_bound)
            .fold(0.0, f64::max),
        tail_epsilon: profile.tail_epsilon,
    };
    Ok(GridField {
        grid: grid.clone(),
        values: evaluations.iter().map(|e| e.value).collect(),
        metadata: FieldMetadata {
            operator: kind,
            n,
            activation: profile.activation.to_string(),
            target: h.label().to_string(),
            dimension: grid.dimension(),
            domain: domain.intervals().to_vec(),
            points_per_axis: grid.points_per_axis.clone(),
            truncation,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;

    #[test]
    fn constant_field() {
        let p = KernelProfile::new(Activation::Logistic, 2).unwrap();
        let grid = GridSpec::uniform(BoxDomain::unit(2), 3).unwrap();
        let h = TargetFunction::constant(0.5, 2).unwrap();
        let field = evaluate_on_grid(
            OperatorKind::MaxMin,
            &h,
            10,
            &p,
            &grid,
            LatticeMode::Windowed,
        )
        .unwrap();
        assert_eq!(field.values, vec![0.5; 9]);
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "y1,y2,value");
        assert_eq!(lines[2], "0,0.5,0.5");
        assert_eq!(lines.len(), 10);
        assert!(field.metadata_json().unwrap().contains("\"max_min\""));
    }

    #[test]
    fn thread_count_does_not_change_values() {
        let p = KernelProfile::new(Activation::Logistic, 2).unwrap();
        let grid = GridSpec::uniform(BoxDomain::unit(2), 17).unwrap();
        let h = TargetFunction::table1();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    evaluate_on_grid(
                        OperatorKind::Classical,
                        &h,
                        30,
                        &p,
                        &grid,
                        LatticeMode::Windowed,
                    )
                    .unwrap()
                })
        };
        let a = run(1);
        let b = run(4);
        assert!(a
            .values
            .iter()
            .zip(&b.values)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
