//! Least-squares helpers shared by the decay and convergence-order fits.

/// Ordinary least-squares slope of `ys` against `xs`.
///
/// Returns `None` when fewer than two points are given or the abscissae are
/// all equal.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let len = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / len;
    let mean_y = ys.iter().sum::<f64>() / len;
    let (sxy, sxx) = xs.iter().zip(ys).fold((0.0, 0.0), |(sxy, sxx), (&x, &y)| {
        let dx = x - mean_x;
        (sxy + dx * (y - mean_y), sxx + dx * dx)
    });
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `count` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (la + t * (lb - la)).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((ols_slope(&xs, &ys).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ols_slope(&[1.0], &[2.0]).is_none());
        assert!(ols_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1e3, 1e6, 4);
        assert!((v[0] - 1e3).abs() < 1e-9);
        assert!((v[1] - 1e4).abs() < 1e-7);
        assert!((v[3] - 1e6).abs() < 1e-4);
    }
}
