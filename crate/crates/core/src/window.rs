//! Per-axis kernel windows and lexicographic iteration over their product.

use crate::kernel::KernelProfile;

/// Upper bound on the number of terms a single window may enumerate.
pub(crate) const MAX_WINDOW_TERMS: u128 = 1 << 22;

/// Lattice indices on one axis together with `phi(center - k)`.
#[derive(Debug, Clone)]
pub(crate) struct AxisWindow {
    pub ks: Vec<i64>,
    pub phis: Vec<f64>,
}

/// Indices `k` with `|center - k| <= radius`, clipped to `bounds` when given.
pub(crate) fn axis_window(
    profile: &KernelProfile,
    center: f64,
    radius: f64,
    bounds: Option<(i64, i64)>,
) -> AxisWindow {
    let mut lo = (center - radius).ceil() as i64;
    let mut hi = (center + radius).floor() as i64;
    if let Some((blo, bhi)) = bounds {
        lo = lo.max(blo);
        hi = hi.min(bhi);
    }
    let ks: Vec<i64> = (lo..=hi).collect();
    let phis = ks.iter().map(|&k| profile.phi(center - k as f64)).collect();
    AxisWindow { ks, phis }
}

/// Every index in `bounds`, ignoring the kernel radius.
pub(crate) fn full_axis(profile: &KernelProfile, center: f64, bounds: (i64, i64)) -> AxisWindow {
    let ks: Vec<i64> = (bounds.0..=bounds.1).collect();
    let phis = ks.iter().map(|&k| profile.phi(center - k as f64)).collect();
    AxisWindow { ks, phis }
}

pub(crate) fn term_count(axes: &[AxisWindow]) -> u128 {
    axes.iter().map(|a| a.ks.len() as u128).product()
}

/// Visits every multi-index of the window product in lexicographic order
/// (first axis slowest), passing the index and `rho = phi_1 * ... * phi_r`
/// multiplied left to right.
pub(crate) fn for_each_term(axes: &[AxisWindow], mut visit: impl FnMut(&[i64], f64)) {
    let r = axes.len();
    if axes.iter().any(|a| a.ks.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; r];
    let mut k: Vec<i64> = axes.iter().map(|a| a.ks[0]).collect();
    // prefix[i] = phi_1 * ... * phi_{i+1} for the current index.
    let mut prefix = vec![0.0; r];
    let refresh = |from: usize, idx: &[usize], prefix: &mut [f64]| {
        for axis in from..r {
            let value = axes[axis].phis[idx[axis]];
            prefix[axis] = if axis == 0 {
                value
            } else {
                prefix[axis - 1] * value
            };
        }
    };
    refresh(0, &idx, &mut prefix);
    loop {
        visit(&k, prefix[r - 1]);
        let mut axis = r;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].ks.len() {
                k[axis] = axes[axis].ks[idx[axis]];
                break;
            }
            idx[axis] = 0;
            k[axis] = axes[axis].ks[0];
        }
        refresh(axis, &idx, &mut prefix);
    }
}
