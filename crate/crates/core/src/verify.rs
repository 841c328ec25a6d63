//! Seeded numerical property suite.
//!
//! Every property draws its random inputs from its own ChaCha stream, so
//! verdicts depend only on the seed and trial count, not on scheduling.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::activation::{check_conditions, Activation, DecayExponent, DecayFit, SamplingGrid};
use crate::domain::BoxDomain;
use crate::error::Result;
use crate::kernel::{
    absolute_moment, default_tail_epsilon, lattice_max_rho, lattice_max_rho_unbounded, phi,
    KernelProfile,
};
use crate::operators::{Evaluator, LatticeMode, OperatorKind};
use crate::target::{RangeClass, Support, TargetFunction};

/// Slack allowed in the operator inequalities.
const SLACK: f64 = 1e-12;

/// Suite parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    #[serde(serialize_with = "display")]
    pub activation: Activation,
    pub trials: usize,
    pub seed: u64,
    pub tail_epsilon: f64,
}

fn display<S: serde::Serializer>(a: &Activation, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(a)
}

impl SuiteConfig {
    pub fn new(activation: Activation) -> Self {
        SuiteConfig {
            activation,
            trials: 1000,
            seed: 0,
            tail_epsilon: default_tail_epsilon(&activation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Not applicable to this activation, or reported without a verdict.
    Info,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Info => "INFO",
        })
    }
}

/// Verdict for one property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub id: &'static str,
    pub outcome: Outcome,
    pub trials: usize,
    pub failures: usize,
    /// Largest violation observed (0 when none).
    pub worst: f64,
    pub note: String,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<26} trials={:<6} failures={:<4} worst={:.3e}",
            self.outcome, self.id, self.trials, self.failures, self.worst
        )?;
        if !self.note.is_empty() {
            write!(f, "  {}", self.note)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.outcome != Outcome::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

/// Property identifiers in report order.
pub const PROPERTIES: [&str; 14] = [
    "conditions",
    "phi_symmetry",
    "rho_factorization",
    "a2_a3_lattice_floor",
    "a1_a4_shell_decay",
    "a5_zero_moment",
    "b2_monotonicity",
    "b3_pseudo_linearity",
    "b4_subadditivity",
    "b5_contraction",
    "c1_max_difference",
    "c2_min_difference",
    "range_preservation",
    "constant_reproduction",
];

/// Runs every property in [`PROPERTIES`].
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    run_properties(config, &PROPERTIES)
}

/// Runs the named subset of [`PROPERTIES`], in the given order.
pub fn run_properties(config: &SuiteConfig, ids: &[&'static str]) -> Result<SuiteReport> {
    let profiles = [
        KernelProfile::with_tail_epsilon(config.activation, 1, config.tail_epsilon)?,
        KernelProfile::with_tail_epsilon(config.activation, 2, config.tail_epsilon)?,
    ];
    let results = ids
        .par_iter()
        .map(|&id| {
            let stream = PROPERTIES.iter().position(|&p| p == id).ok_or_else(|| {
                crate::Error::InvalidParameter(format!("unknown property `{id}`"))
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream as u64);
            let ctx = Context {
                config,
                profiles: &profiles,
            };
            ctx.run(id, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        config: config.clone(),
        results,
    })
}

struct Context<'a> {
    config: &'a SuiteConfig,
    profiles: &'a [KernelProfile; 2],
}

/// Tally of one property's trials.
struct Tally {
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            trials: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    /// Records a trial whose violation is `excess` (positive means failed).
    fn record(&mut self, excess: f64) {
        self.trials += 1;
        if excess > 0.0 || excess.is_nan() {
            self.failures += 1;
            self.worst = self.worst.max(if excess.is_nan() {
                f64::INFINITY
            } else {
                excess
            });
        }
    }

    fn finish(self, id: &'static str, note: impl Into<String>) -> PropertyResult {
        PropertyResult {
            id,
            outcome: if self.failures == 0 {
                Outcome::Pass
            } else {
                Outcome::Fail
            },
            trials: self.trials,
            failures: self.failures,
            worst: self.worst,
            note: note.into(),
        }
    }
}

fn info(id: &'static str, note: impl Into<String>) -> PropertyResult {
    PropertyResult {
        id,
        outcome: Outcome::Info,
        trials: 0,
        failures: 0,
        worst: 0.0,
        note: note.into(),
    }
}

/// Random target on `[0, 1]^r` that is only meaningful at the points `k / n`.
#[derive(Clone)]
struct LatticeTable {
    n: u64,
    r: usize,
    values: Arc<Vec<f64>>,
}

impl LatticeTable {
    fn random(rng: &mut ChaCha8Rng, n: u64, r: usize) -> Self {
        let len = (n as usize + 1).pow(r as u32);
        LatticeTable {
            n,
            r,
            values: Arc::new((0..len).map(|_| rng.gen::<f64>()).collect()),
        }
    }

    fn zip(&self, other: &LatticeTable, f: impl Fn(f64, f64) -> f64) -> Self {
        LatticeTable {
            n: self.n,
            r: self.r,
            values: Arc::new(
                self.values
                    .iter()
                    .zip(other.values.iter())
                    .map(|(&a, &b)| f(a, b))
                    .collect(),
            ),
        }
    }

    fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    fn target(&self) -> TargetFunction {
        let (n, values) = (self.n, Arc::clone(&self.values));
        TargetFunction::new(
            "lattice_table",
            self.r,
            Support::Box(BoxDomain::unit(self.r)),
            RangeClass::UnitInterval,
            move |y| {
                let flat = y.iter().fold(0usize, |acc, &yi| {
                    acc * (n as usize + 1) + (yi * n as f64).round() as usize
                });
                values[flat]
            },
        )
        .expect("valid table target")
    }
}

fn random_point(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    (0..r).map(|_| rng.gen::<f64>()).collect()
}

impl Context<'_> {
    fn profile(&self, r: usize) -> &KernelProfile {
        &self.profiles[r - 1]
    }

    fn condition_a(&self) -> bool {
        self.config.activation.flags().satisfies_a
    }

    fn run(&self, id: &'static str, rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
        match id {
            "conditions" => self.conditions(),
            "phi_symmetry" => Ok(self.phi_symmetry(rng)),
            "rho_factorization" => Ok(self.rho_factorization(rng)),
            "a2_a3_lattice_floor" => self.lattice_floor(rng),
            "a1_a4_shell_decay" => Ok(self.shell_decay()),
            "a5_zero_moment" => self.zero_moment(),
            "c1_max_difference" => Ok(self.c1(rng)),
            "c2_min_difference" => Ok(self.c2(rng)),
            "constant_reproduction" => self.constants(rng),
            _ => self.semiring(id, rng),
        }
    }

    fn conditions(&self) -> Result<PropertyResult> {
        let act = &self.config.activation;
        let flags = act.flags();
        let report = check_conditions(act, &SamplingGrid::default())?;
        let mut tally = Tally::new();
        let mut notes = Vec::new();
        tally.record(if report.monotonicity_ok { 0.0 } else { 1.0 });
        tally.record(report.limit_defect - 1e-12);
        if flags.satisfies_a {
            tally.record(report.symmetry_defect - 1e-12);
        } else {
            notes.push(format!(
                "condition (a) fails as declared (symmetry defect {:.3e})",
                report.symmetry_defect
            ));
        }
        if report.concavity_applicable {
            tally.record(if report.satisfies_b == flags.satisfies_b {
                0.0
            } else {
                1.0
            });
        }
        if let (DecayExponent::Finite(gamma), DecayFit::Estimated(fit)) =
            (act.decay_exponent(), report.decay_fit)
        {
            tally.record((fit - gamma).abs() - 0.1 * gamma);
            notes.push(format!("fitted decay {fit:.4}"));
        }
        if !report.strict_rise_ok {
            notes.push("mu(2) = mu(1)".into());
        }
        let mut result = tally.finish("conditions", notes.join("; "));
        if !flags.satisfies_a && result.outcome == Outcome::Pass {
            result.outcome = Outcome::Info;
        }
        Ok(result)
    }

    fn phi_symmetry(&self, rng: &mut ChaCha8Rng) -> PropertyResult {
        if !self.condition_a() {
            return info("phi_symmetry", "skipped: condition (a) not satisfied");
        }
        let p = self.profile(1);
        let mut tally = Tally::new();
        for _ in 0..self.config.trials {
            let y = rng.gen_range(-50.0..50.0);
            tally.record((p.phi(y) - p.phi(-y)).abs() - 1e-12);
        }
        tally.finish("phi_symmetry", "")
    }

    fn rho_factorization(&self, rng: &mut ChaCha8Rng) -> PropertyResult {
        let p = self.profile(2);
        let mut tally = Tally::new();
        for _ in 0..self.config.trials {
            let y = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let rho = p.rho(&y).unwrap_or(f64::NAN);
            let product = phi(&self.config.activation, y[0]) * phi(&self.config.activation, y[1]);
            tally.record(if rho == product {
                0.0
            } else {
                (rho - product).abs()
            });
        }
        tally.finish("rho_factorization", "")
    }

    fn lattice_floor(&self, rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
        if !self.condition_a() {
            return Ok(info(
                "a2_a3_lattice_floor",
                "skipped: condition (a) not satisfied",
            ));
        }
        let mut tally = Tally::new();
        for _ in 0..self.config.trials {
            let r = rng.gen_range(1..=2);
            let p = self.profile(r);
            let n: u64 = rng.gen_range(1..=200);
            // each side at least 1/n long, so every axis holds a lattice point
            let intervals: Vec<(f64, f64)> = (0..r)
                .map(|_| {
                    let a = rng.gen_range(-2.0..2.0);
                    (a, a + 1.0 / n as f64 + rng.gen_range(0.0..2.0))
                })
                .collect();
            let domain = BoxDomain::new(intervals.clone())?;
            let y: Vec<f64> = intervals
                .iter()
                .map(|&(a, b)| rng.gen_range(a..=b))
                .collect();
            let floor = p.lattice_floor() * (1.0 - 1e-12);
            tally.record(floor - lattice_max_rho(p, n, &domain, &y)?);
            tally.record(floor - lattice_max_rho_unbounded(p, n, &y)?);
        }
        Ok(tally.finish("a2_a3_lattice_floor", "box and unrestricted lattices"))
    }

    fn shell_decay(&self) -> PropertyResult {
        let p = self.profile(2);
        let mut tally = Tally::new();
        let shell = |radius: f64| {
            (0..3600)
                .map(|i| {
                    let t = i as f64 * std::f64::consts::TAU / 3600.0;
                    p.phi(radius * t.cos()) * p.phi(radius * t.sin())
                })
                .fold(0.0, f64::max)
        };
        let maxima: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|&r| shell(r)).collect();
        for pair in maxima.windows(2) {
            tally.record(pair[1] - pair[0]);
        }
        let mut note = format!(
            "shell maxima {:.3e} {:.3e} {:.3e} {:.3e}",
            maxima[0], maxima[1], maxima[2], maxima[3]
        );
        if self.config.activation.decay_exponent() == DecayExponent::Unbounded {
            tally.record(maxima[3] - 1e-12);
        } else {
            note.push_str("; algebraic tail, 1e-12 level not required");
        }
        tally.finish("a1_a4_shell_decay", note)
    }

    fn zero_moment(&self) -> Result<PropertyResult> {
        let mut tally = Tally::new();
        let mut values = Vec::new();
        for r in 1..=3 {
            let p = KernelProfile::with_tail_epsilon(
                self.config.activation,
                r,
                self.config.tail_epsilon,
            )?;
            let m0 = absolute_moment(&p, 0.0, 50)?.value;
            tally.record(m0 - 0.5f64.powi(r as i32));
            values.push(format!("{m0:.4e}"));
        }
        Ok(tally.finish(
            "a5_zero_moment",
            format!("m0 for r = 1, 2, 3: {}", values.join(" ")),
        ))
    }

    fn c1(&self, rng: &mut ChaCha8Rng) -> PropertyResult {
        let mut tally = Tally::new();
        for _ in 0..self.config.trials {
            let len = rng.gen_range(1..=20);
            let a: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let b: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
            tally.record((max(&a) - max(&b)).abs() - max(&diffs));
        }
        tally.finish("c1_max_difference", "")
    }

    fn c2(&self, rng: &mut ChaCha8Rng) -> PropertyResult {
        let mut tally = Tally::new();
        for _ in 0..self.config.trials {
            let (x, y, z): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
            tally.record((x.min(y) - x.min(z)).abs() - x.min((y - z).abs()));
        }
        tally.finish("c2_min_difference", "")
    }

    /// B-series and range preservation on random lattice tables.
    fn semiring(&self, id: &'static str, rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
        let mut tally = Tally::new();
        for _ in 0..self.config.trials {
            let r = rng.gen_range(1..=2);
            let n = rng.gen_range(2..=30);
            let p = self.profile(r);
            let eval = Evaluator::new(p, LatticeMode::Windowed);
            let domain = BoxDomain::unit(r);
            let y = random_point(rng, r);
            let l = |t: &LatticeTable| -> Result<f64> {
                Ok(eval.max_min(&t.target(), n, &domain, &y)?.value)
            };
            let h = LatticeTable::random(rng, n, r);
            let excess = match id {
                "b2_monotonicity" => {
                    let u = LatticeTable::random(rng, n, r);
                    let g = h.zip(&u, |a, b| (a + b).min(1.0));
                    l(&h)? - l(&g)? - SLACK
                }
                "b3_pseudo_linearity" => {
                    let g = LatticeTable::random(rng, n, r);
                    let (alpha, beta): (f64, f64) = (rng.gen(), rng.gen());
                    let combined = h.zip(&g, |a, b| alpha.min(a).max(beta.min(b)));
                    let expected = alpha.min(l(&h)?).max(beta.min(l(&g)?));
                    (l(&combined)? - expected).abs() - SLACK
                }
                "b4_subadditivity" => {
                    let u = LatticeTable::random(rng, n, r);
                    let g = h.zip(&u, |a, b| b * (1.0 - a));
                    let sum = h.zip(&g, |a, b| (a + b).min(1.0));
                    l(&sum)? - l(&h)? - l(&g)? - SLACK
                }
                "b5_contraction" => {
                    let g = LatticeTable::random(rng, n, r);
                    let diff = h.zip(&g, |a, b| (a - b).abs());
                    (l(&h)? - l(&g)?).abs() - l(&diff)? - SLACK
                }
                "range_preservation" => {
                    let value = l(&h)?;
                    (-value).max(value - h.max())
                }
                other => {
                    return Err(crate::Error::InvalidParameter(format!(
                        "unknown property `{other}`"
                    )))
                }
            };
            tally.record(excess);
        }
        Ok(tally.finish(id, "random lattice tables, n in [2, 30], r in {1, 2}"))
    }

    fn constants(&self, rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
        let mut tally = Tally::new();
        let points = self.config.trials.clamp(1, 25);
        for r in 1..=2 {
            let p = self.profile(r);
            let eval = Evaluator::new(p, LatticeMode::Windowed);
            let domain = BoxDomain::unit(r);
            for c in [0.0, 0.3, 1.0] {
                let h = TargetFunction::constant(c, r)?;
                for _ in 0..points {
                    let y = random_point(rng, r);
                    let n = rng.gen_range(1..=50);
                    for kind in [
                        OperatorKind::Classical,
                        OperatorKind::MaxProduct,
                        OperatorKind::MaxMin,
                        OperatorKind::QuasiMaxMin,
                    ] {
                        let value = eval.evaluate(kind, &h, n, &domain, &y)?.value;
                        tally.record((value - c).abs() - 1e-14);
                    }
                }
            }
        }
        Ok(tally.finish(
            "constant_reproduction",
            "c in {0, 0.3, 1}, four operators, r in {1, 2}",
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_suite_passes_and_is_reproducible() {
        let mut config = SuiteConfig::new(Activation::Logistic);
        config.trials = 100;
        config.seed = 7;
        let a = run_suite(&config).unwrap();
        for r in &a.results {
            assert_ne!(r.outcome, Outcome::Fail, "{r}");
        }
        let b = run_suite(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gompertz_reports_condition_a() {
        let mut config = SuiteConfig::new(Activation::gompertz(1.0, 1.0).unwrap());
        config.trials = 50;
        let report = run_suite(&config).unwrap();
        assert_eq!(report.get("conditions").unwrap().outcome, Outcome::Info);
        assert_eq!(report.get("phi_symmetry").unwrap().outcome, Outcome::Info);
        assert_eq!(
            report.get("b3_pseudo_linearity").unwrap().outcome,
            Outcome::Pass
        );
    }

    #[test]
    fn unknown_property_rejected() {
        let config = SuiteConfig::new(Activation::Logistic);
        assert!(run_properties(&config, &["b9"]).is_err());
    }
}
