//! Target functions given as text: builtins or expressions over `y1..yr`.

use std::sync::Arc;

use fasteval::{Compiler, Evaler, Instruction, Parser, Slab};
use maxmin::{BoxDomain, GridSpec, RangeClass, Support, TargetFunction};

use crate::CliError;

/// Number of samples used to check an expression's range.
const VALIDATION_SAMPLES: usize = 10_000;

/// A parsed `--target` value.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Table1,
    Identity,
    CosineBump,
    Constant(f64),
    Expression(String),
}

impl TargetSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        Ok(match text {
            "table1" => TargetSpec::Table1,
            "identity" => TargetSpec::Identity,
            "cosine_bump" => TargetSpec::CosineBump,
            _ => match text.strip_prefix("const:") {
                Some(c) => TargetSpec::Constant(
                    c.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("invalid constant `{c}`")))?,
                ),
                None if text.is_empty() => return Err(CliError::Config("empty target".into())),
                None => TargetSpec::Expression(text.to_string()),
            },
        })
    }

    /// Dimension implied by the target alone.
    pub fn natural_dimension(&self) -> usize {
        match self {
            TargetSpec::Table1 | TargetSpec::CosineBump | TargetSpec::Constant(_) => 2,
            TargetSpec::Identity => 1,
            TargetSpec::Expression(e) => highest_variable(e).max(1),
        }
    }

    /// Default domain when none is given.
    pub fn natural_domain(&self, r: usize) -> BoxDomain {
        match self {
            TargetSpec::CosineBump => BoxDomain::cube(-2.0, 2.0, r).expect("valid cube"),
            _ => BoxDomain::unit(r),
        }
    }

    /// Builds the target on `domain`. Expressions are checked to map the
    /// domain into `[0, 1]` unless `extended` is set.
    pub fn build(&self, domain: &BoxDomain, extended: bool) -> Result<TargetFunction, CliError> {
        let r = domain.dimension();
        let h = match self {
            TargetSpec::Table1 => {
                if r != 2 {
                    return Err(CliError::Config(format!(
                        "table1 is two-dimensional, domain has {r} axes"
                    )));
                }
                TargetFunction::table1()
            }
            TargetSpec::Identity => TargetFunction::identity(r)?,
            TargetSpec::CosineBump => TargetFunction::cosine_bump(r)?,
            TargetSpec::Constant(c) => TargetFunction::constant(*c, r)?,
            TargetSpec::Expression(text) => return expression_target(text, domain, extended),
        };
        Ok(h)
    }
}

/// Largest `k` such that `yk` appears in `text`.
fn highest_variable(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0;
    for (i, &b) in bytes.iter().enumerate() {
        let starts_word = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_');
        if b == b'y' && starts_word {
            let digits: String = text[i + 1..]
                .chars()
                .take_while(|c| c.is_ascii_digit())
                .collect();
            if let Ok(k) = digits.parse::<usize>() {
                best = best.max(k);
            }
        }
    }
    best
}

struct Compiled {
    slab: Slab,
    instruction: Instruction,
}

impl Compiled {
    fn new(text: &str) -> Result<Self, CliError> {
        let mut slab = Slab::new();
        let instruction = Parser::new()
            .parse(text, &mut slab.ps)
            .map_err(|e| CliError::Config(format!("cannot parse target `{text}`: {e}")))?
            .from(&slab.ps)
            .compile(&slab.ps, &mut slab.cs);
        Ok(Compiled { slab, instruction })
    }

    fn eval(&self, y: &[f64]) -> Result<f64, fasteval::Error> {
        let mut names = |name: &str, args: Vec<f64>| -> Option<f64> {
            match (name, args.as_slice()) {
                ("exp", [x]) => Some(x.exp()),
                (_, []) => {
                    let k: usize = name.strip_prefix('y')?.parse().ok()?;
                    (k >= 1).then(|| y.get(k - 1).copied()).flatten()
                }
                _ => None,
            }
        };
        self.instruction.eval(&self.slab, &mut names)
    }
}

fn expression_target(
    text: &str,
    domain: &BoxDomain,
    extended: bool,
) -> Result<TargetFunction, CliError> {
    let r = domain.dimension();
    let used = highest_variable(text);
    if used > r {
        return Err(CliError::Config(format!(
            "target uses y{used} but the domain has {r} axes"
        )));
    }
    let compiled = Compiled::new(text)?;

    let per_axis = (VALIDATION_SAMPLES as f64).powf(1.0 / r as f64).ceil() as usize;
    let grid = GridSpec::uniform(domain.clone(), per_axis.max(2))?;
    let mut largest: f64 = 0.0;
    for y in grid.points() {
        let v = compiled.eval(&y).map_err(|e| {
            CliError::Config(format!("cannot evaluate target `{text}` at {y:?}: {e}"))
        })?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("target `{text}` is {v} at {y:?}")));
        }
        if !(0.0..=1.0).contains(&v) && !extended {
            return Err(CliError::Config(format!(
                "target `{text}` takes the value {v} at {y:?}, outside [0, 1]; pass --extended for general bounded targets"
            )));
        }
        largest = largest.max(v.abs());
    }
    let range = if extended {
        RangeClass::Bounded { bound: largest }
    } else {
        RangeClass::UnitInterval
    };
    let compiled = Arc::new(compiled);
    Ok(TargetFunction::new(
        text,
        r,
        Support::Everywhere,
        range,
        move |y| compiled.eval(y).unwrap_or(f64::NAN),
    )?)
}
