//! Statistics used by the verification harness: Kolmogorov–Smirnov distances
//! with their asymptotic critical values, Wilson score intervals for
//! exceedance frequencies, running moments and a least-squares slope.

use crate::numeric::{real, Real};

/// One-sample Kolmogorov–Smirnov statistic against a reference CDF.
///
/// Sorts `samples` in place and returns
/// `sup_x |F_n(x) - F(x)|` evaluated on both sides of each step.
pub fn ks_statistic<T: Real, F: Fn(T) -> T>(samples: &mut [T], cdf: F) -> T {
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN sample"));
    let n = real::<T>(samples.len() as f64);
    let mut sup = T::zero();
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        let lo = (real::<T>(i as f64) / n - fx).abs();
        let hi = (real::<T>((i + 1) as f64) / n - fx).abs();
        sup = sup.max(lo).max(hi);
    }
    sup
}

/// Two-sample Kolmogorov–Smirnov statistic. Sorts both slices in place.
pub fn ks_two_sample<T: Real>(a: &mut [T], b: &mut [T]) -> T {
    a.sort_unstable_by(|x, y| x.partial_cmp(y).expect("NaN sample"));
    b.sort_unstable_by(|x, y| x.partial_cmp(y).expect("NaN sample"));
    let na = real::<T>(a.len() as f64);
    let nb = real::<T>(b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut sup = T::zero();
    // Compare the ECDFs just after each distinct value, stepping over ties
    // in both samples at once.
    while i < a.len() && j < b.len() {
        let v = if a[i] < b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        let fa = real::<T>(i as f64) / na;
        let fb = real::<T>(j as f64) / nb;
        sup = sup.max((fa - fb).abs());
    }
    sup
}

/// Asymptotic one-sample KS critical value at significance `alpha`:
/// `sqrt(ln(2/alpha) / (2 n))`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_two_sample_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = ((2.0 / alpha).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Wilson score interval for a binomial proportion at `z` standard normal
/// units. Returns `(lower, upper)`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Streaming mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero until two observations arrive.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "slope needs at least two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_uniform_grid_is_small() {
        let n = 1000;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!(d <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn ks_detects_wrong_cdf() {
        let n = 1000;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&mut xs, |x: f64| x * x);
        assert!(d > 0.2);
    }

    #[test]
    fn two_sample_ks_identical_is_zero() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        let mut b = vec![4.0, 3.0, 2.0, 1.0];
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
    }

    #[test]
    fn two_sample_ks_known_value() {
        let mut a = vec![1.0f64, 1.0, 4.0, 4.0];
        let mut b = vec![1.0f64, 1.0, 1.0, 4.0];
        assert!((ks_two_sample(&mut a, &mut b) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ks_critical_matches_quoted_value() {
        // 0.001 significance at n = 1e5, quoted as ~0.00617.
        let c = ks_critical(0.001, 100_000);
        assert!((c - 0.00617).abs() < 5e-5, "got {c}");
    }

    #[test]
    fn wilson_is_ordered_and_contains_p_hat() {
        let (lo, hi) = wilson_interval(30, 100, 3.0);
        assert!(lo < 0.3 && 0.3 < hi);
        let (lo0, _) = wilson_interval(0, 50, 3.0);
        assert_eq!(lo0, 0.0);
    }

    #[test]
    fn moments_match_closed_form() {
        let mut m = RunningMoments::new();
        for x in [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0] {
            m.push(x);
        }
        assert!((m.mean() - 5.0).abs() < 1e-12);
        assert!((m.variance() - 32.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn slope_of_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        assert!((least_squares_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
