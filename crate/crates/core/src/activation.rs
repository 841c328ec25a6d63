//! Sigmoidal activation catalog.
//!
//! Every activation here is non-decreasing with limits 0 at `-inf` and 1 at
//! `+inf`. Catalog entries carry the structural flags used by the kernel and
//! operator modules:
//!
//! * (a) `mu(y) - 1/2` is odd,
//! * (b) `mu` is `C^2` and concave on `y >= 0`,
//! * (c) `mu(y) = O(|y|^-alpha)` as `y -> -inf`.
//!
//! The flags are declared per entry; [`check_conditions`] measures them on a
//! sampling grid so the declarations can be audited.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{logspace, ols_slope};

/// Largest exponent usable in the decay condition (c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayExponent {
    Finite(f64),
    /// Every `alpha > 0` works (exponential or compact-support decay).
    Unbounded,
}

impl DecayExponent {
    /// Whether `alpha` is admissible in condition (c).
    pub fn admits(self, alpha: f64) -> bool {
        match self {
            DecayExponent::Finite(limit) => alpha <= limit,
            DecayExponent::Unbounded => true,
        }
    }
}

impl fmt::Display for DecayExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayExponent::Finite(a) => write!(f, "{a}"),
            DecayExponent::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Declared structural conditions of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionFlags {
    pub satisfies_a: bool,
    pub satisfies_b: bool,
    pub satisfies_c: bool,
}

/// A sigmoidal activation from the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// `1 / (1 + e^-y)`.
    Logistic,
    /// `(tanh y + 1) / 2`.
    Tanh,
    /// Piecewise linear ramp on `[-1/2, 1/2]`.
    Ramp,
    /// Three-level step function `0, 1/2, 1`.
    ThreeStep,
    /// Continuous activation with algebraic tail `|y|^-gamma`.
    PowerTail { gamma: f64 },
    /// Gompertz function `exp(-alpha e^{-beta y})`.
    Gompertz { alpha: f64, beta: f64 },
}

impl Activation {
    pub fn power_tail(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power_tail requires gamma > 0, got {gamma}"
            )));
        }
        Ok(Activation::PowerTail { gamma })
    }

    pub fn gompertz(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gompertz requires alpha > 0 and beta > 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Activation::Gompertz { alpha, beta })
    }

    /// Evaluates `mu(y)`.
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Activation::Logistic => 1.0 / (1.0 + (-y).exp()),
            Activation::Tanh => (y.tanh() + 1.0) / 2.0,
            Activation::Ramp => {
                if y < -0.5 {
                    0.0
                } else if y <= 0.5 {
                    y + 0.5
                } else {
                    1.0
                }
            }
            Activation::ThreeStep => {
                if y < -0.5 {
                    0.0
                } else if y <= 0.5 {
                    0.5
                } else {
                    1.0
                }
            }
            Activation::PowerTail { gamma } => {
                let knee = 2f64.powf(1.0 / gamma);
                if y < -knee {
                    1.0 / ((-y).powf(gamma) + 2.0)
                } else if y <= knee {
                    2f64.powf(-1.0 / gamma - 2.0) * y + 0.5
                } else {
                    let t = y.powf(gamma);
                    (t + 1.0) / (t + 2.0)
                }
            }
            Activation::Gompertz { alpha, beta } => (-alpha * (-beta * y).exp()).exp(),
        }
    }

    pub fn flags(&self) -> ConditionFlags {
        match *self {
            Activation::Logistic | Activation::Tanh => ConditionFlags {
                satisfies_a: true,
                satisfies_b: true,
                satisfies_c: true,
            },
            Activation::Ramp | Activation::ThreeStep | Activation::PowerTail { .. } => {
                ConditionFlags {
                    satisfies_a: true,
                    satisfies_b: false,
                    satisfies_c: true,
                }
            }
            // Smooth, and concave on y >= 0 exactly when alpha <= 1.
            Activation::Gompertz { alpha, .. } => ConditionFlags {
                satisfies_a: false,
                satisfies_b: alpha <= 1.0,
                satisfies_c: true,
            },
        }
    }

    pub fn decay_exponent(&self) -> DecayExponent {
        match *self {
            Activation::PowerTail { gamma } => DecayExponent::Finite(gamma),
            _ => DecayExponent::Unbounded,
        }
    }

    /// Whether the activation is twice continuously differentiable.
    pub fn is_c2(&self) -> bool {
        matches!(
            self,
            Activation::Logistic | Activation::Tanh | Activation::Gompertz { .. }
        )
    }

    /// Radius outside of which the induced kernel `phi` vanishes identically.
    ///
    /// `mu` is constant outside `[-1/2, 1/2]` for the ramp and the step, so
    /// `phi(y) = 0` for `|y| > 3/2`.
    pub fn kernel_support_radius(&self) -> Option<f64> {
        match self {
            Activation::Ramp | Activation::ThreeStep => Some(1.5),
            _ => None,
        }
    }

    /// Catalog name without parameters.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Activation::Logistic => "logistic",
            Activation::Tanh => "tanh",
            Activation::Ramp => "ramp",
            Activation::ThreeStep => "three_step",
            Activation::PowerTail { .. } => "power_tail",
            Activation::Gompertz { .. } => "gompertz",
        }
    }

    /// Human-readable warning for activations outside the standing assumptions.
    pub fn assumption_warning(&self) -> Option<String> {
        let flags = self.flags();
        (!flags.satisfies_a).then(|| {
            format!("activation `{self}` does not satisfy condition (a); convergence guarantees do not apply")
        })
    }

    /// The fixed catalog with representative parameters.
    pub fn catalog() -> Vec<Activation> {
        vec![
            Activation::Logistic,
            Activation::Tanh,
            Activation::Ramp,
            Activation::ThreeStep,
            Activation::PowerTail { gamma: 0.4 },
            Activation::PowerTail { gamma: 0.8 },
            Activation::Gompertz {
                alpha: 1.0,
                beta: 1.0,
            },
        ]
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::PowerTail { gamma } => write!(f, "power_tail:gamma={gamma}"),
            Activation::Gompertz { alpha, beta } => {
                write!(f, "gompertz:alpha={alpha},beta={beta}")
            }
            other => f.write_str(other.kind_name()),
        }
    }
}

fn parse_params(kind: &str, text: &str) -> Result<Vec<(String, f64)>> {
    text.split(',')
        .map(|pair| {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::UnknownActivation(format!("{kind}:{text}")))?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("`{}` is not a number", value.trim()))
            })?;
            let key = match key.trim() {
                "γ" | "gamma" => "gamma",
                "α" | "alpha" => "alpha",
                "β" | "beta" => "beta",
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown parameter `{other}` for {kind}"
                    )))
                }
            };
            Ok((key.to_string(), value))
        })
        .collect()
}

fn take(params: &[(String, f64)], key: &str, kind: &str) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidParameter(format!("{kind} requires parameter `{key}`")))
}

impl FromStr for Activation {
    type Err = Error;

    /// Parses `logistic`, `tanh`, `ramp`, `three_step`, `power_tail:γ=<v>`
    /// and `gompertz:α=<v>,β=<v>`. ASCII spellings (`gamma`, `alpha`, `beta`)
    /// are accepted too.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p)),
            None => (s, None),
        };
        match (kind, params) {
            ("logistic", None) => Ok(Activation::Logistic),
            ("tanh", None) => Ok(Activation::Tanh),
            ("ramp", None) => Ok(Activation::Ramp),
            ("three_step", None) => Ok(Activation::ThreeStep),
            ("power_tail", Some(p)) => {
                let params = parse_params(kind, p)?;
                Activation::power_tail(take(&params, "gamma", kind)?)
            }
            ("gompertz", Some(p)) => {
                let params = parse_params(kind, p)?;
                Activation::gompertz(take(&params, "alpha", kind)?, take(&params, "beta", kind)?)
            }
            ("power_tail", None) | ("gompertz", None) => Err(Error::InvalidParameter(format!(
                "{kind} requires parameters, e.g. `power_tail:gamma=0.4`"
            ))),
            _ => Err(Error::UnknownActivation(s.to_string())),
        }
    }
}

/// Symmetric sampling grid `[-half_width, half_width]` used by the condition checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingGrid {
    pub half_width: f64,
    pub points: usize,
    /// Step of the second differences used for the concavity check.
    pub concavity_step: f64,
    /// Second differences above this count as a concavity defect.
    pub concavity_tolerance: f64,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid {
            half_width: 10.0,
            points: 2001,
            concavity_step: 1e-3,
            concavity_tolerance: 1e-8,
        }
    }
}

impl SamplingGrid {
    fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = 2.0 * self.half_width / (self.points - 1) as f64;
        (0..self.points).map(move |i| -self.half_width + i as f64 * step)
    }
}

/// Estimated decay exponent from the left tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayFit {
    Estimated(f64),
    Unbounded,
}

/// Numerically measured structural conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `max |mu(y) + mu(-y) - 1|` over the grid.
    pub symmetry_defect: f64,
    pub monotonicity_ok: bool,
    /// `mu(2) > mu(1)`.
    pub strict_rise_ok: bool,
    /// Largest deviation of `mu(+-1e300)` from the limits 1 and 0.
    pub limit_defect: f64,
    /// Largest positive second difference on `y >= 0`.
    pub concavity_defect: f64,
    /// Concavity is only meaningful for `C^2` activations.
    pub concavity_applicable: bool,
    pub satisfies_b: bool,
    pub decay_fit: DecayFit,
}

/// Samples `act` on `grid` and reports the measured conditions.
pub fn check_conditions(act: &Activation, grid: &SamplingGrid) -> Result<ConditionReport> {
    if !(grid.half_width >= 10.0 && grid.points >= 1000) {
        return Err(Error::InvalidParameter(format!(
            "condition grid must cover [-Y, Y] with Y >= 10 and at least 1000 points, got Y = {} with {} points",
            grid.half_width, grid.points
        )));
    }
    if !(grid.concavity_step > 0.0 && grid.concavity_tolerance >= 0.0) {
        return Err(Error::InvalidParameter(
            "concavity step must be positive".into(),
        ));
    }

    let mut symmetry_defect: f64 = 0.0;
    let mut monotonicity_ok = true;
    let mut concavity_defect: f64 = 0.0;
    let mut previous = f64::NEG_INFINITY;
    let h = grid.concavity_step;
    for y in grid.points() {
        let value = act.eval(y);
        symmetry_defect = symmetry_defect.max((value + act.eval(-y) - 1.0).abs());
        if value < previous {
            monotonicity_ok = false;
        }
        previous = value;
        if y >= 0.0 {
            let second = act.eval(y + h) - 2.0 * value + act.eval(y - h);
            concavity_defect = concavity_defect.max(second);
        }
    }

    let limit_defect = (act.eval(1e300) - 1.0).abs().max(act.eval(-1e300).abs());
    let concavity_applicable = act.is_c2();

    Ok(ConditionReport {
        symmetry_defect,
        monotonicity_ok,
        strict_rise_ok: act.eval(2.0) > act.eval(1.0),
        limit_defect,
        concavity_defect,
        concavity_applicable,
        satisfies_b: concavity_applicable && concavity_defect <= grid.concavity_tolerance,
        decay_fit: fit_decay(act),
    })
}

/// Log-log regression of `mu(-y)` against `y` over `y in [1e3, 1e6]`.
///
/// Tails that underflow or fit a slope steeper than 50 are reported as
/// unbounded (faster than any power).
pub fn fit_decay(act: &Activation) -> DecayFit {
    let ys = logspace(1e3, 1e6, 200);
    let mut log_y = Vec::with_capacity(ys.len());
    let mut log_mu = Vec::with_capacity(ys.len());
    for &y in &ys {
        let v = act.eval(-y);
        if !(v > 0.0 && v.is_finite()) {
            return DecayFit::Unbounded;
        }
        log_y.push(y.ln());
        log_mu.push(v.ln());
    }
    match ols_slope(&log_y, &log_mu) {
        Some(slope) if -slope <= 50.0 => DecayFit::Estimated(-slope),
        _ => DecayFit::Unbounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(Activation::Logistic.eval(0.0), 0.5);
        assert_eq!(Activation::Ramp.eval(0.75), 1.0);
        assert_eq!(Activation::ThreeStep.eval(0.0), 0.5);
        // 1 / (1 + e^-1), 40-digit reference.
        assert!((Activation::Logistic.eval(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn power_tail_pieces_join() {
        for gamma in [0.4, 0.8, 1.0, 2.5] {
            let act = Activation::power_tail(gamma).unwrap();
            let knee = 2f64.powf(1.0 / gamma);
            for edge in [-knee, knee] {
                let left = act.eval(edge - 1e-9);
                let right = act.eval(edge + 1e-9);
                assert!((left - right).abs() < 1e-8, "gamma {gamma} edge {edge}");
            }
            assert!((act.eval(knee) - 0.75).abs() < 1e-12);
            assert!((act.eval(-knee) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Activation::power_tail(0.0).is_err());
        assert!(Activation::power_tail(-1.0).is_err());
        assert!(Activation::gompertz(0.0, 1.0).is_err());
        assert!(Activation::gompertz(1.0, -2.0).is_err());
        assert!("power_tail:gamma=-0.3".parse::<Activation>().is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "logistic".parse::<Activation>().unwrap(),
            Activation::Logistic
        );
        assert_eq!(
            "power_tail:γ=0.4".parse::<Activation>().unwrap(),
            Activation::PowerTail { gamma: 0.4 }
        );
        assert_eq!(
            "gompertz:α=2,β=0.5".parse::<Activation>().unwrap(),
            Activation::Gompertz {
                alpha: 2.0,
                beta: 0.5
            }
        );
        assert_eq!(
            "gompertz:beta=0.5,alpha=2".parse::<Activation>().unwrap(),
            Activation::Gompertz {
                alpha: 2.0,
                beta: 0.5
            }
        );
        assert!("softplus".parse::<Activation>().is_err());
        assert!("power_tail".parse::<Activation>().is_err());
        for act in Activation::catalog() {
            assert_eq!(act.to_string().parse::<Activation>().unwrap(), act);
        }
    }

    #[test]
    fn logistic_and_tanh_conditions() {
        for act in [Activation::Logistic, Activation::Tanh] {
            let report = check_conditions(&act, &SamplingGrid::default()).unwrap();
            assert!(report.symmetry_defect <= 1e-12);
            assert!(report.concavity_defect <= 1e-12);
            assert!(report.satisfies_b);
            assert!(report.monotonicity_ok);
            assert_eq!(report.decay_fit, DecayFit::Unbounded);
        }
    }

    #[test]
    fn ramp_is_not_c2() {
        let report = check_conditions(&Activation::Ramp, &SamplingGrid::default()).unwrap();
        assert!(!report.concavity_applicable);
        assert!(!report.satisfies_b);
        assert!(report.symmetry_defect <= 1e-12);
    }

    #[test]
    fn gompertz_fails_symmetry() {
        let act = Activation::gompertz(1.0, 1.0).unwrap();
        let report = check_conditions(&act, &SamplingGrid::default()).unwrap();
        assert!(report.symmetry_defect > 0.1);
        assert!(act.assumption_warning().is_some());
        assert!(Activation::Logistic.assumption_warning().is_none());
    }

    #[test]
    fn power_tail_decay_fit() {
        let act = Activation::power_tail(0.4).unwrap();
        let DecayFit::Estimated(alpha) = fit_decay(&act) else {
            panic!("expected a finite fit");
        };
        // numpy polyfit over the same 200 log-spaced samples: 0.385462527217...
        assert!((alpha - 0.385_462_527_217_393_8).abs() < 1e-9);
        assert!((alpha - 0.4).abs() < 0.05);
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = SamplingGrid {
            half_width: 5.0,
            ..SamplingGrid::default()
        };
        assert!(check_conditions(&Activation::Logistic, &grid).is_err());
        let grid = SamplingGrid {
            points: 10,
            ..SamplingGrid::default()
        };
        assert!(check_conditions(&Activation::Logistic, &grid).is_err());
    }

    #[test]
    fn power_tail_condition_c_envelope() {
        // mu(-y) * y^gamma stays between positive constants past the knee.
        for gamma in [0.4, 0.8] {
            let act = Activation::power_tail(gamma).unwrap();
            let start = 2f64.powf(1.0 / gamma) + 1.0;
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for y in logspace(start, 1e12, 400) {
                let scaled = act.eval(-y) * y.powf(gamma);
                lo = lo.min(scaled);
                hi = hi.max(scaled);
            }
            assert!(lo > 0.3 && hi <= 1.0, "gamma {gamma}: [{lo}, {hi}]");
        }
    }
}
