//! Functions to be approximated.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};

/// Where a target function may be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Box(BoxDomain),
    Everywhere,
}

/// Declared range of a target function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    /// Values in `[0, 1]`, checked at every sample the operators read.
    UnitInterval,
    /// `|h| <= bound`.
    Bounded { bound: f64 },
}

impl RangeClass {
    /// Upper bound on `|h|`.
    pub fn sup(&self) -> f64 {
        match *self {
            RangeClass::UnitInterval => 1.0,
            RangeClass::Bounded { bound } => bound,
        }
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A function `h` on a box (or on all of `R^r`) with a declared range class.
///
/// The evaluation rule is called concurrently from grid evaluation and must
/// be free of shared mutable state.
#[derive(Clone)]
pub struct TargetFunction {
    rule: Arc<EvalFn>,
    dimension: usize,
    support: Support,
    range: RangeClass,
    label: String,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("support", &self.support)
            .field("range", &self.range)
            .finish()
    }
}

impl TargetFunction {
    pub fn new<F>(
        label: impl Into<String>,
        dimension: usize,
        support: Support,
        range: RangeClass,
        rule: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(Error::InvalidParameter(
                "target dimension must be >= 1".into(),
            ));
        }
        if let Support::Box(domain) = &support {
            if domain.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: domain.dimension(),
                });
            }
        }
        if let RangeClass::Bounded { bound } = range {
            if !(bound.is_finite() && bound >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "invalid range bound {bound}"
                )));
            }
        }
        Ok(TargetFunction {
            rule: Arc::new(rule),
            dimension,
            support,
            range,
            label: label.into(),
        })
    }

    /// `h(y) = (y_1^2 + y_2^2) / 2` on `[0, 1]^2`.
    pub fn table1() -> Self {
        TargetFunction::new(
            "table1",
            2,
            Support::Box(BoxDomain::unit(2)),
            RangeClass::UnitInterval,
            |y| (y[0] * y[0] + y[1] * y[1]) / 2.0,
        )
        .expect("valid builtin")
    }

    /// Coordinate mean `(y_1 + ... + y_r) / r` on `[0, 1]^r`; `h(y) = y` for `r = 1`.
    pub fn identity(r: usize) -> Result<Self> {
        TargetFunction::new(
            "identity",
            r,
            Support::Box(BoxDomain::unit(r)),
            RangeClass::UnitInterval,
            move |y| y.iter().sum::<f64>() / r as f64,
        )
    }

    /// `(1 + cos y_1 ... cos y_r) / 4 + 1/4` on all of `R^r`, values in `[1/4, 3/4]`.
    pub fn cosine_bump(r: usize) -> Result<Self> {
        TargetFunction::new(
            "cosine_bump",
            r,
            Support::Everywhere,
            RangeClass::UnitInterval,
            |y| (1.0 + y.iter().map(|v| v.cos()).product::<f64>()) / 4.0 + 0.25,
        )
    }

    /// The constant `c`, defined everywhere, with range bound `|c|`.
    pub fn constant(c: f64, r: usize) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant must be finite, got {c}"
            )));
        }
        let range = RangeClass::Bounded { bound: c.abs() };
        TargetFunction::new(
            format!("const:{c}"),
            r,
            Support::Everywhere,
            range,
            move |_| c,
        )
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.rule)(y)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn range(&self) -> RangeClass {
        self.range
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_defined_everywhere(&self) -> bool {
        matches!(self.support, Support::Everywhere)
    }

    /// A derived target `g(y) = f(h(y))` with the same support.
    pub fn map<F>(&self, label: impl Into<String>, range: RangeClass, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.rule);
        TargetFunction {
            rule: Arc::new(move |y| f(inner(y))),
            dimension: self.dimension,
            support: self.support.clone(),
            range,
            label: label.into(),
        }
    }

    /// Same rule with a different declared range.
    pub fn with_range(mut self, range: RangeClass) -> Self {
        self.range = range;
        self
    }
}
