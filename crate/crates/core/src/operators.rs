//! Neural network approximation operators on box domains and on `R^r`.
//!
//! All operators sample `h` on the lattice `k / n` and weight the samples by
//! `rho(n y - k)`:
//!
//! * classical: `sum h(k/n) rho / sum rho`,
//! * max-product: `max h(k/n) rho / max rho`,
//! * max-min: `max [ h(k/n) ∧ rho / max rho ]`,
//! * quasi-interpolation max-min: the max-min operator with `k` over `Z^r`,
//! * extended max-min: the max-min operator applied to `h`, `1/h`, `-h` or
//!   `-1/h` depending on which of `[0,1]`, `(1,inf)`, `[-1,0)`, `(-inf,-1)`
//!   holds the range of `h`.
//!
//! By default only lattice points near `n y` are enumerated. The classical
//! sum uses the kernel's truncation radius. The max-based operators start
//! from a small window and grow it until the terms outside provably cannot
//! change the result, so windowed and full-lattice evaluation agree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{build_lattice, BoxDomain, LatticeIndexSet};
use crate::error::{Error, Result};
use crate::kernel::KernelProfile;
use crate::target::{RangeClass, Support, TargetFunction};
use crate::window::{
    axis_window, for_each_term, full_axis, term_count, AxisWindow, MAX_WINDOW_TERMS,
};

const VANISHING_DENOMINATOR: f64 = 1e-300;
/// Omitted-term bound below which windows stop growing.
const NEGLIGIBLE_OMISSION: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Classical,
    MaxProduct,
    MaxMin,
    QuasiMaxMin,
    ExtendedMaxMin,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Classical => "classical",
            OperatorKind::MaxProduct => "max_product",
            OperatorKind::MaxMin => "max_min",
            OperatorKind::QuasiMaxMin => "quasi_max_min",
            OperatorKind::ExtendedMaxMin => "extended_max_min",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "classical" => Ok(OperatorKind::Classical),
            "max_product" => Ok(OperatorKind::MaxProduct),
            "max_min" => Ok(OperatorKind::MaxMin),
            "quasi_max_min" | "quasi" => Ok(OperatorKind::QuasiMaxMin),
            "extended_max_min" | "extended" => Ok(OperatorKind::ExtendedMaxMin),
            other => Err(Error::InvalidParameter(format!(
                "unknown operator `{other}`"
            ))),
        }
    }
}

/// How the lattice is enumerated around each evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeMode {
    /// Only indices within a window around `n y`.
    #[default]
    Windowed,
    /// Every index of `J_n^r`. Quasi-interpolation always uses windows.
    Full,
}

/// Truncation diagnostics for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointStats {
    /// Window radius finally used.
    pub radius: f64,
    /// Whether the window grew past the truncation radius.
    pub widened: bool,
    /// Whether the windowed value provably equals the full-lattice value.
    pub exact: bool,
    /// Bound on the contribution of omitted lattice terms. For the classical
    /// operator this is the omitted kernel mass relative to the denominator.
    pub omitted_bound: f64,
}

/// An operator value with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    pub stats: PointStats,
}

/// Range regimes of a bounded target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `[0, 1]`
    Unit,
    /// `(1, inf)`
    AboveOne,
    /// `[-1, 0)`
    NegativeUnit,
    /// `(-inf, -1)`
    BelowMinusOne,
}

impl Regime {
    pub fn of(value: f64) -> Option<Regime> {
        if value.is_nan() {
            None
        } else if (0.0..=1.0).contains(&value) {
            Some(Regime::Unit)
        } else if value > 1.0 {
            Some(Regime::AboveOne)
        } else if value >= -1.0 {
            Some(Regime::NegativeUnit)
        } else {
            Some(Regime::BelowMinusOne)
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Unit => "[0, 1]",
            Regime::AboveOne => "(1, inf)",
            Regime::NegativeUnit => "[-1, 0)",
            Regime::BelowMinusOne => "(-inf, -1)",
        }
    }

    /// Detects the common regime of `h` on every sample of `lattice` and on `extra` points.
    pub fn detect(
        h: &TargetFunction,
        lattice: &LatticeIndexSet,
        extra: &[&[f64]],
    ) -> Result<Regime> {
        let r = lattice.dimension();
        let n = lattice.n as f64;
        let mut found: Option<Regime> = None;
        let mut note = |value: f64, point: &[f64]| -> Result<()> {
            let regime = Regime::of(value)
                .ok_or_else(|| Error::InvalidSamples(format!("target is NaN at {point:?}")))?;
            match found {
                None => found = Some(regime),
                Some(prev) if prev != regime => {
                    return Err(Error::MixedRange {
                        first: prev.label(),
                        second: regime.label(),
                    })
                }
                _ => {}
            }
            Ok(())
        };
        let axes: Vec<AxisWindow> = lattice
            .ranges
            .iter()
            .map(|&(lo, hi)| AxisWindow {
                ks: (lo..=hi).collect(),
                phis: vec![1.0; (hi - lo + 1) as usize],
            })
            .collect();
        let mut point = vec![0.0; r];
        let mut outcome = Ok(());
        for_each_term(&axes, |k, _| {
            if outcome.is_err() {
                return;
            }
            for (p, &ki) in point.iter_mut().zip(k) {
                *p = ki as f64 / n;
            }
            outcome = note(h.eval(&point), &point);
        });
        outcome?;
        for p in extra {
            note(h.eval(p), p)?;
        }
        found.ok_or_else(|| Error::InvalidSamples("no samples".into()))
    }
}

/// Evaluates operators for one kernel profile.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    profile: &'a KernelProfile,
    mode: LatticeMode,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SampleCheck {
    Unit,
    NonNegative,
    Any,
}

impl<'a> Evaluator<'a> {
    pub fn new(profile: &'a KernelProfile, mode: LatticeMode) -> Self {
        Evaluator { profile, mode }
    }

    pub fn profile(&self) -> &KernelProfile {
        self.profile
    }

    pub fn mode(&self) -> LatticeMode {
        self.mode
    }

    /// Dispatches on `kind`. `domain` is ignored for quasi-interpolation.
    pub fn evaluate(
        &self,
        kind: OperatorKind,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
    ) -> Result<Evaluation> {
        match kind {
            OperatorKind::Classical => self.classical(h, n, domain, ybar),
            OperatorKind::MaxProduct => self.max_product(h, n, domain, ybar),
            OperatorKind::MaxMin => self.max_min(h, n, domain, ybar),
            OperatorKind::QuasiMaxMin => self.quasi_max_min(h, n, ybar),
            OperatorKind::ExtendedMaxMin => self.extended_max_min(h, n, domain, ybar),
        }
    }

    /// `sum h(k/n) rho(n y - k) / sum rho(n y - k)` over `J_n^r`.
    pub fn classical(
        &self,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
    ) -> Result<Evaluation> {
        let lattice = self.prepare(h, n, domain, ybar)?;
        let radius = self.profile.truncation_radius;
        let axes = self.axes(n, ybar, Some(&lattice), radius);
        let nf = n as f64;
        let mut point = vec![0.0; ybar.len()];
        let (mut num, mut den) = (0.0, 0.0);
        let mut failure = None;
        for_each_term(&axes, |k, rho| {
            if failure.is_some() {
                return;
            }
            lattice_point(k, nf, &mut point);
            match sample(h, &point, SampleCheck::Any) {
                Ok(v) => {
                    num += v * rho;
                    den += rho;
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        check_denominator(den)?;
        let omitted = lattice.len() - term_count(&axes);
        let omitted_bound = if omitted == 0 {
            0.0
        } else {
            omitted as f64 * self.profile.tail_term_bound(radius) / den
        };
        Ok(Evaluation {
            value: num / den,
            stats: PointStats {
                radius: self.effective_radius(radius),
                widened: false,
                exact: omitted == 0,
                omitted_bound,
            },
        })
    }

    /// `max h(k/n) rho(n y - k) / max rho(n y - k)` over `J_n^r`.
    pub fn max_product(
        &self,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
    ) -> Result<Evaluation> {
        let lattice = self.prepare(h, n, domain, ybar)?;
        let h_sup = h.range().sup();
        self.widening(n, ybar, Some(&lattice), |axes, tail| {
            let den = window_max(axes);
            check_denominator(den)?;
            let num = self.reduce_max(axes, h, n, SampleCheck::NonNegative, |v, rho| v * rho)?;
            let settled = den > tail && num >= h_sup * tail;
            Ok((num / den, settled, h_sup * tail / den))
        })
    }

    /// `max_k [ h(k/n) ∧ rho(n y - k) / max_d rho(n y - d) ]` over `J_n^r`.
    pub fn max_min(
        &self,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
    ) -> Result<Evaluation> {
        let lattice = self.prepare(h, n, domain, ybar)?;
        self.max_min_on(h, n, ybar, Some(&lattice))
    }

    /// The max-min operator with `k` ranging over `Z^r`.
    pub fn quasi_max_min(&self, h: &TargetFunction, n: u64, ybar: &[f64]) -> Result<Evaluation> {
        if !h.is_defined_everywhere() {
            return Err(Error::NotDefinedEverywhere);
        }
        self.check_dims(h, ybar)?;
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        self.max_min_on(h, n, ybar, None)
    }

    /// Max-min approximation of a bounded target whose range lies in a
    /// single regime.
    pub fn extended_max_min(
        &self,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
    ) -> Result<Evaluation> {
        let lattice = self.prepare(h, n, domain, ybar)?;
        let regime = Regime::detect(h, &lattice, &[ybar])?;
        self.extended_with_regime(h, n, domain, ybar, regime)
    }

    /// Extended max-min with a regime detected beforehand (see [`Regime::detect`]).
    pub fn extended_with_regime(
        &self,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
        regime: Regime,
    ) -> Result<Evaluation> {
        let unit = RangeClass::UnitInterval;
        let (transformed, finish): (TargetFunction, fn(f64) -> f64) = match regime {
            Regime::Unit => (h.clone().with_range(unit), |v| v),
            Regime::AboveOne => (h.map("1/h", unit, |v| 1.0 / v), |v| 1.0 / v),
            Regime::NegativeUnit => (h.map("-h", unit, |v| -v), |v| -v),
            Regime::BelowMinusOne => (h.map("1/(-h)", unit, |v| -1.0 / v), |v| -1.0 / v),
        };
        let mut eval = self.max_min(&transformed, n, domain, ybar)?;
        eval.value = finish(eval.value);
        Ok(eval)
    }

    fn max_min_on(
        &self,
        h: &TargetFunction,
        n: u64,
        ybar: &[f64],
        lattice: Option<&LatticeIndexSet>,
    ) -> Result<Evaluation> {
        let h_sup = h.range().sup();
        self.widening(n, ybar, lattice, |axes, tail| {
            let den = window_max(axes);
            check_denominator(den)?;
            let value =
                self.reduce_max(axes, h, n, SampleCheck::Unit, |v, rho| v.min(rho / den))?;
            // an omitted term is at most min(sup h, tail / den)
            let omitted = (tail / den).min(h_sup);
            let settled = den > tail && value >= omitted;
            Ok((value, settled, omitted))
        })
    }

    /// Runs `step` on windows growing from the kernel core until the omitted
    /// terms cannot affect the result, the window covers the whole lattice,
    /// or the term budget is exhausted. Past the truncation radius, growth
    /// also stops once the omitted bound is below `NEGLIGIBLE_OMISSION`.
    /// `step` returns `(value, settled, omitted_bound)`.
    fn widening(
        &self,
        n: u64,
        ybar: &[f64],
        lattice: Option<&LatticeIndexSet>,
        mut step: impl FnMut(&[AxisWindow], f64) -> Result<(f64, bool, f64)>,
    ) -> Result<Evaluation> {
        let base = self.profile.truncation_radius;
        let mut radius = self.profile.core_radius();
        loop {
            let axes = self.axes(n, ybar, lattice, radius);
            let covers = match lattice {
                Some(l) => self.mode == LatticeMode::Full || term_count(&axes) == l.len(),
                None => false,
            };
            let tail = self.profile.tail_term_bound(radius);
            let (value, settled, bound) = step(&axes, tail)?;
            let widened = radius > base;
            if covers || tail == 0.0 || settled {
                return Ok(Evaluation {
                    value,
                    stats: PointStats {
                        radius: self.effective_radius(radius),
                        widened,
                        exact: true,
                        omitted_bound: 0.0,
                    },
                });
            }
            let next = if radius < base {
                (2.0 * radius).min(base)
            } else {
                2.0 * radius
            };
            let mut next_terms: u128 = ybar.iter().map(|_| (2.0 * next + 3.0) as u128).product();
            if let Some(l) = lattice {
                next_terms = next_terms.min(l.len());
            }
            let negligible = radius >= base && bound <= NEGLIGIBLE_OMISSION;
            if negligible || next_terms > MAX_WINDOW_TERMS {
                return Ok(Evaluation {
                    value,
                    stats: PointStats {
                        radius,
                        widened,
                        exact: false,
                        omitted_bound: bound,
                    },
                });
            }
            radius = next;
        }
    }

    fn reduce_max(
        &self,
        axes: &[AxisWindow],
        h: &TargetFunction,
        n: u64,
        check: SampleCheck,
        combine: impl Fn(f64, f64) -> f64,
    ) -> Result<f64> {
        let nf = n as f64;
        let mut point = vec![0.0; axes.len()];
        let mut best: f64 = 0.0;
        let mut failure = None;
        for_each_term(axes, |k, rho| {
            if failure.is_some() {
                return;
            }
            lattice_point(k, nf, &mut point);
            match sample(h, &point, check) {
                Ok(v) => best = best.max(combine(v, rho)),
                Err(e) => failure = Some(e),
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(best),
        }
    }

    fn axes(
        &self,
        n: u64,
        ybar: &[f64],
        lattice: Option<&LatticeIndexSet>,
        radius: f64,
    ) -> Vec<AxisWindow> {
        let nf = n as f64;
        ybar.iter()
            .enumerate()
            .map(|(axis, &y)| {
                let center = nf * y;
                match (lattice, self.mode) {
                    (Some(l), LatticeMode::Full) => full_axis(self.profile, center, l.ranges[axis]),
                    (Some(l), LatticeMode::Windowed) => {
                        axis_window(self.profile, center, radius, Some(l.ranges[axis]))
                    }
                    (None, _) => axis_window(self.profile, center, radius, None),
                }
            })
            .collect()
    }

    fn effective_radius(&self, radius: f64) -> f64 {
        match self.mode {
            LatticeMode::Windowed => radius,
            LatticeMode::Full => f64::INFINITY,
        }
    }

    fn check_dims(&self, h: &TargetFunction, ybar: &[f64]) -> Result<()> {
        let r = self.profile.dimension;
        for got in [h.dimension(), ybar.len()] {
            if got != r {
                return Err(Error::DimensionMismatch { expected: r, got });
            }
        }
        Ok(())
    }

    fn prepare(
        &self,
        h: &TargetFunction,
        n: u64,
        domain: &BoxDomain,
        ybar: &[f64],
    ) -> Result<LatticeIndexSet> {
        self.check_dims(h, ybar)?;
        if domain.dimension() != self.profile.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.profile.dimension,
                got: domain.dimension(),
            });
        }
        if let Support::Box(support) = h.support() {
            let inside = domain
                .intervals()
                .iter()
                .zip(support.intervals())
                .all(|(&(a, b), &(sa, sb))| sa <= a && b <= sb);
            if !inside {
                return Err(Error::InvalidParameter(format!(
                    "operator domain {:?} exceeds the support of `{}`",
                    domain.intervals(),
                    h.label()
                )));
            }
        }
        let lattice = build_lattice(n, domain)?;
        if !domain.contains(ybar) {
            return Err(Error::PointOutsideDomain {
                point: ybar.to_vec(),
            });
        }
        Ok(lattice)
    }
}

fn lattice_point(k: &[i64], n: f64, point: &mut [f64]) {
    for (p, &ki) in point.iter_mut().zip(k) {
        *p = ki as f64 / n;
    }
}

fn sample(h: &TargetFunction, point: &[f64], check: SampleCheck) -> Result<f64> {
    let value = h.eval(point);
    let ok = match check {
        SampleCheck::Unit => (0.0..=1.0).contains(&value),
        SampleCheck::NonNegative => value >= 0.0 && value.is_finite(),
        SampleCheck::Any => value.is_finite(),
    };
    if ok {
        return Ok(value);
    }
    Err(match check {
        SampleCheck::Unit => Error::RangeViolation {
            value,
            point: point.to_vec(),
        },
        SampleCheck::NonNegative => Error::NegativeSample {
            value,
            point: point.to_vec(),
        },
        SampleCheck::Any => Error::InvalidSamples(format!("target is {value} at {point:?}")),
    })
}

fn window_max(axes: &[AxisWindow]) -> f64 {
    let mut best: f64 = 0.0;
    for_each_term(axes, |_, rho| best = best.max(rho));
    best
}

fn check_denominator(den: f64) -> Result<()> {
    if den < VANISHING_DENOMINATOR {
        Err(Error::KernelVanished { value: den })
    } else {
        Ok(())
    }
}

/// Classical operator at `ybar` with windowed lattice evaluation.
pub fn classical_nn(
    h: &TargetFunction,
    n: u64,
    domain: &BoxDomain,
    profile: &KernelProfile,
    ybar: &[f64],
) -> Result<f64> {
    Ok(Evaluator::new(profile, LatticeMode::Windowed)
        .classical(h, n, domain, ybar)?
        .value)
}

/// Max-product operator at `ybar` with windowed lattice evaluation.
pub fn max_product_nn(
    h: &TargetFunction,
    n: u64,
    domain: &BoxDomain,
    profile: &KernelProfile,
    ybar: &[f64],
) -> Result<f64> {
    Ok(Evaluator::new(profile, LatticeMode::Windowed)
        .max_product(h, n, domain, ybar)?
        .value)
}

/// Max-min operator at `ybar` with windowed lattice evaluation.
pub fn max_min_nn(
    h: &TargetFunction,
    n: u64,
    domain: &BoxDomain,
    profile: &KernelProfile,
    ybar: &[f64],
) -> Result<f64> {
    Ok(Evaluator::new(profile, LatticeMode::Windowed)
        .max_min(h, n, domain, ybar)?
        .value)
}

/// Max-min quasi-interpolation operator at `ybar`.
pub fn quasi_interpolation_max_min(
    h: &TargetFunction,
    n: u64,
    profile: &KernelProfile,
    ybar: &[f64],
) -> Result<f64> {
    Ok(Evaluator::new(profile, LatticeMode::Windowed)
        .quasi_max_min(h, n, ybar)?
        .value)
}

/// Extended max-min operator at `ybar` for targets outside `[0, 1]`.
pub fn extended_max_min(
    h: &TargetFunction,
    n: u64,
    domain: &BoxDomain,
    profile: &KernelProfile,
    ybar: &[f64],
) -> Result<f64> {
    Ok(Evaluator::new(profile, LatticeMode::Windowed)
        .extended_max_min(h, n, domain, ybar)?
        .value)
}
