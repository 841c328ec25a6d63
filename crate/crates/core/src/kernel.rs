//! Density kernels induced by a sigmoidal activation.
//!
//! `phi(y) = (mu(y + 1) - mu(y - 1)) / 2` and the r-variate product
//! `rho(y) = phi(y_1) * ... * phi(y_r)`. A [`KernelProfile`] fixes the
//! dimension and a truncation radius outside of which every lattice term is
//! certified to lie below `tail_epsilon`.

use rayon::prelude::*;
use serde::Serialize;

use crate::activation::{Activation, DecayExponent};
use crate::domain::{build_lattice, BoxDomain};
use crate::error::{Error, Result};
use crate::window::{axis_window, for_each_term};

/// Default certified tail level for truncated lattice sums and maxima.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-15;

/// Tail level used when none is given: `1e-15` for kernels with
/// exponential or compact decay, `1e-6` for algebraic tails, whose `1e-15`
/// radius would exceed any practical window.
pub fn default_tail_epsilon(act: &Activation) -> f64 {
    match act.decay_exponent() {
        DecayExponent::Unbounded => DEFAULT_TAIL_EPSILON,
        DecayExponent::Finite(_) => 1e-6,
    }
}

const MAX_TRUNCATION_RADIUS: f64 = 1e6;

/// Evaluates `phi_mu(y) = (mu(y + 1) - mu(y - 1)) / 2`.
///
/// For activations with `mu - 1/2` odd the kernel is even, and it is
/// evaluated at `-|y|` where both terms are small and no cancellation occurs.
pub fn phi(act: &Activation, y: f64) -> f64 {
    let y = if act.flags().satisfies_a { -y.abs() } else { y };
    (act.eval(y + 1.0) - act.eval(y - 1.0)) / 2.0
}

/// Location and value of the maximum of `phi`.
fn phi_peak(act: &Activation) -> (f64, f64) {
    if act.flags().satisfies_a {
        return (0.0, phi(act, 0.0));
    }
    let mut best = (0.0, phi(act, 0.0));
    for i in 0..=10_000 {
        let y = -50.0 + i as f64 * 0.01;
        let v = phi(act, y);
        if v > best.1 {
            best = (y, v);
        }
    }
    // golden-section refinement around the sampled maximum
    let (mut lo, mut hi) = (best.0 - 0.01, best.0 + 0.01);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if phi(act, x1) < phi(act, x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let mid = (lo + hi) / 2.0;
    let v = phi(act, mid);
    if v > best.1 {
        (mid, v)
    } else {
        best
    }
}

/// Radius `W` with `phi(y) < eps / phi_max^(r-1)` for every `|y| > W`, so
/// that any lattice term with one coordinate offset beyond `W` is below `eps`.
///
/// Found by doubling outward from 1 and bisecting the last bracket. Kernels
/// with compact support return the support radius directly.
pub fn truncation_radius(act: &Activation, r: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    if let Some(support) = act.kernel_support_radius() {
        return Ok(support);
    }
    let (peak_at, peak) = phi_peak(act);
    // shaded so that rounding noise in phi cannot push a term past eps
    let threshold = eps / peak.powi(r as i32 - 1) * (1.0 - 1e-9);
    let above = |t: f64| phi(act, t).max(phi(act, -t)) >= threshold;

    let mut hi = 1.0f64.max(2.0 * peak_at.abs());
    while above(hi) {
        hi *= 2.0;
        if hi > MAX_TRUNCATION_RADIUS {
            return Err(Error::SlowDecay { eps });
        }
    }
    let mut lo = hi / 2.0;
    if !above(lo) {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// An activation's kernel in a fixed dimension, with its truncation data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelProfile {
    #[serde(serialize_with = "serialize_display")]
    pub activation: Activation,
    pub dimension: usize,
    pub truncation_radius: f64,
    pub tail_epsilon: f64,
    /// Maximum of `phi` over the real line.
    pub phi_max: f64,
    phi_argmax: f64,
}

fn serialize_display<S: serde::Serializer>(
    act: &Activation,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(act)
}

impl KernelProfile {
    /// Profile with the default tail level `1e-15`.
    pub fn new(activation: Activation, dimension: usize) -> Result<Self> {
        KernelProfile::with_tail_epsilon(activation, dimension, DEFAULT_TAIL_EPSILON)
    }

    pub fn with_tail_epsilon(activation: Activation, dimension: usize, eps: f64) -> Result<Self> {
        let truncation_radius = truncation_radius(&activation, dimension, eps)?;
        let (phi_argmax, phi_max) = phi_peak(&activation);
        Ok(KernelProfile {
            activation,
            dimension,
            truncation_radius,
            tail_epsilon: eps,
            phi_max,
            phi_argmax,
        })
    }

    pub fn phi(&self, y: f64) -> f64 {
        phi(&self.activation, y)
    }

    /// `rho(y) = phi(y_1) * ... * phi(y_r)`.
    pub fn rho(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: y.len(),
            });
        }
        Ok(y.iter().fold(1.0, |acc, &yi| acc * self.phi(yi)))
    }

    /// `[phi(1)]^r`, the lower bound on lattice maxima of `rho`.
    pub fn lattice_floor(&self) -> f64 {
        self.phi(1.0).powi(self.dimension as i32)
    }

    /// Upper bound on `sup phi(y)` over `|y| > radius`.
    ///
    /// Past the peak every catalog kernel is non-increasing in `|y|`; closer
    /// in, the peak value itself is returned.
    pub fn axis_tail(&self, radius: f64) -> f64 {
        if let Some(support) = self.activation.kernel_support_radius() {
            if radius >= support {
                return 0.0;
            }
        }
        if radius < self.phi_argmax.abs() + 2.0 {
            return self.phi_max;
        }
        // margin for rounding noise in the differenced tails
        self.phi(radius).max(self.phi(-radius)) * (1.0 + 1e-9)
    }

    /// Smallest radius at which [`KernelProfile::axis_tail`] drops below the peak.
    pub fn core_radius(&self) -> f64 {
        let core = self.phi_argmax.abs() + 2.0;
        core.min(self.truncation_radius)
    }

    /// Upper bound on `rho(z)` for any `z` with some `|z_i| > radius`.
    pub fn tail_term_bound(&self, radius: f64) -> f64 {
        self.axis_tail(radius) * self.phi_max.powi(self.dimension as i32 - 1)
    }
}

/// Grid estimate of the generalized absolute moment `m_beta(rho)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub beta: f64,
    pub value: f64,
    /// Points per axis on the fundamental cell `[0, 1]^r`.
    pub resolution: usize,
    /// Box radius used to truncate `Z^r` around each sample point.
    pub lattice_window: i64,
}

/// Estimates `sup_y max_k rho(y - k) * ||y - k||^beta`.
///
/// The expression is invariant under integer shifts of `y`, so the supremum
/// is taken over a `resolution^r` grid on `[0, 1]^r`. The lattice is cut at a
/// box radius beyond which every term is provably smaller than the value
/// already attained at the cell center.
pub fn absolute_moment(
    profile: &KernelProfile,
    beta: f64,
    resolution: usize,
) -> Result<MomentEstimate> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    if let DecayExponent::Finite(decay) = profile.activation.decay_exponent() {
        if beta > decay {
            return Err(Error::MomentMayBeInfinite { beta, decay });
        }
    }
    if resolution < 50 {
        return Err(Error::InvalidParameter(format!(
            "moment resolution must be at least 50 points per axis, got {resolution}"
        )));
    }
    let r = profile.dimension;
    let sqrt_r = (r as f64).sqrt();
    let center = vec![0.5; r];
    let floor = profile.rho(&center)? * (0.5 * sqrt_r).powf(beta);
    let window = moment_window(profile, beta, floor)?;

    let total = resolution.pow(r as u32);
    let step = 1.0 / (resolution - 1) as f64;
    let value = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut y = vec![0.0; r];
            for axis in (0..r).rev() {
                y[axis] = (rest % resolution) as f64 * step;
                rest /= resolution;
            }
            let axes: Vec<_> = y
                .iter()
                .map(|&yi| axis_window(profile, yi, window as f64, None))
                .collect();
            let mut best: f64 = 0.0;
            for_each_term(&axes, |k, rho| {
                let norm2: f64 = y
                    .iter()
                    .zip(k)
                    .map(|(&yi, &ki)| (yi - ki as f64).powi(2))
                    .sum();
                best = best.max(rho * norm2.powf(beta / 2.0));
            });
            best
        })
        .reduce(|| 0.0, f64::max);

    Ok(MomentEstimate {
        beta,
        value,
        resolution,
        lattice_window: window,
    })
}

/// Smallest integer radius past which `rho(z) ||z||^beta < floor`.
fn moment_window(profile: &KernelProfile, beta: f64, floor: f64) -> Result<i64> {
    let r = profile.dimension as f64;
    // a term first excluded at scan point m has ||z|| <= sqrt(r) * (next scan point)
    let envelope = |m: f64| profile.tail_term_bound(m) * (r.sqrt() * (1.02 * m + 0.25)).powf(beta);
    let mut last_violation = 1.0f64;
    let mut m = 1.0f64;
    while m <= 1e4 {
        if envelope(m) >= floor {
            last_violation = m;
        }
        m = if m < 100.0 { m + 0.25 } else { m * 1.02 };
    }
    if last_violation > 5e3 {
        return Err(Error::SlowDecay {
            eps: profile.tail_epsilon,
        });
    }
    Ok(last_violation.ceil() as i64 + 1)
}

/// `max_{k in J_n^r} rho(n y - k)`, enumerated over the truncation window.
pub fn lattice_max_rho(
    profile: &KernelProfile,
    n: u64,
    domain: &BoxDomain,
    ybar: &[f64],
) -> Result<f64> {
    check_dimension(profile, domain.dimension())?;
    check_dimension(profile, ybar.len())?;
    let lattice = build_lattice(n, domain)?;
    if !domain.contains(ybar) {
        return Err(Error::PointOutsideDomain {
            point: ybar.to_vec(),
        });
    }
    let axes: Vec<_> = ybar
        .iter()
        .zip(&lattice.ranges)
        .map(|(&y, &bounds)| {
            axis_window(
                profile,
                n as f64 * y,
                profile.truncation_radius,
                Some(bounds),
            )
        })
        .collect();
    Ok(window_max(&axes))
}

/// `max_{k in Z^r} rho(n y - k)`, the unrestricted lattice used by
/// quasi-interpolation.
pub fn lattice_max_rho_unbounded(profile: &KernelProfile, n: u64, ybar: &[f64]) -> Result<f64> {
    check_dimension(profile, ybar.len())?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let axes: Vec<_> = ybar
        .iter()
        .map(|&y| axis_window(profile, n as f64 * y, profile.truncation_radius, None))
        .collect();
    Ok(window_max(&axes))
}

fn window_max(axes: &[crate::window::AxisWindow]) -> f64 {
    let mut best: f64 = 0.0;
    for_each_term(axes, |_, rho| best = best.max(rho));
    best
}

fn check_dimension(profile: &KernelProfile, got: usize) -> Result<()> {
    if got != profile.dimension {
        return Err(Error::DimensionMismatch {
            expected: profile.dimension,
            got,
        });
    }
    Ok(())
}
