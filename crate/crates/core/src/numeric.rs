//! Scalar abstraction and the small numerical toolbox the rest of the crate
//! is built on: log-domain helpers, adaptive Simpson quadrature, bisection,
//! golden-section search and the error function.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::Error;

/// Scalar type the numerical core is generic over. Blanket-implemented for
/// `f32` and `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Lift an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from(x).expect("literal not representable in scalar type")
}

/// log(e^a + e^b) without leaving the log domain.
///
/// Returns the exact max when one argument is -inf, so expressions of the
/// form `-logaddexp(-kappa, t)` stay `<= kappa` in floating point.
pub fn logaddexp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == T::infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
///
/// Subintervals that hit the depth limit are accepted with their Richardson
/// estimate; the deferred error is tracked and reported as
/// [`Error::Quadrature`] if it overwhelms the requested tolerance.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T, Error<T>> {
    let two = real::<T>(2.0);
    let six = real::<T>(6.0);
    let m = (a + b) / two;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) * (fa + real::<T>(4.0) * fm + fb) / six;
    let mut deferred = T::zero();
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, 0, &mut deferred);
    if deferred > tol * real(10.0) {
        return Err(Error::Quadrature);
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    deferred: &mut T,
) -> T {
    let two = real::<T>(2.0);
    let four = real::<T>(4.0);
    let six = real::<T>(6.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) * (fa + four * flm + fm) / six;
    let right = (b - m) * (fm + four * frm + fb) / six;
    let delta = left + right - whole;
    let fifteen = real::<T>(15.0);
    if delta.abs() <= fifteen * tol || depth >= SIMPSON_MAX_DEPTH {
        if delta.abs() > fifteen * tol {
            *deferred = *deferred + delta.abs() / fifteen;
        }
        return left + right + delta / fifteen;
    }
    let half_tol = tol / two;
    simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth + 1, deferred)
        + simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth + 1, deferred)
}

/// Locate the boundary of a monotone predicate by bisection.
///
/// Requires `pred(hi)` true and `pred(lo)` false; shrinks the bracket until
/// it is narrower than `xtol` and returns the inner (true) endpoint.
pub fn bisect_boundary<T: Real, P: Fn(T) -> bool>(pred: P, mut lo: T, mut hi: T, xtol: T) -> T {
    debug_assert!(pred(hi));
    let two = real::<T>(2.0);
    while (hi - lo).abs() > xtol {
        let mid = (lo + hi) / two;
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Golden-section minimization of a unimodal `f` over `[a, b]`.
///
/// Returns `(x, f(x))` at the final bracket midpoint once the bracket is
/// narrower than `xtol`.
pub fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, xtol: T) -> (T, T) {
    let inv_phi = real::<T>(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    let two = real::<T>(2.0);
    let x = (a + b) / two;
    let fx = f(x);
    (x, fx)
}

/// Golden-section maximization; see [`golden_min`].
pub fn golden_max<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, xtol: T) -> (T, T) {
    let (x, neg) = golden_min(|x| -f(x), a, b, xtol);
    (x, -neg)
}

// ln Gamma(1/2) = ln sqrt(pi)
const LN_GAMMA_HALF: f64 = 0.572_364_942_924_700_1;

/// Regularized lower incomplete gamma P(1/2, x) by series expansion.
fn gamma_p_half_series<T: Real>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let half = real::<T>(0.5);
    let mut ap = half;
    let mut sum = T::one() / half;
    let mut del = sum;
    for _ in 0..500 {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (-x + half * x.ln() - real::<T>(LN_GAMMA_HALF)).exp()
}

/// Regularized upper incomplete gamma Q(1/2, x) by Lentz continued fraction.
fn gamma_q_half_cf<T: Real>(x: T) -> T {
    let half = real::<T>(0.5);
    let fpmin = T::min_positive_value() / T::epsilon();
    let mut b = x + T::one() - half;
    let mut c = T::one() / fpmin;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..500 {
        let an = -real::<T>(i as f64) * (real::<T>(i as f64) - half);
        b = b + real::<T>(2.0);
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x + half * x.ln() - real::<T>(LN_GAMMA_HALF)).exp() * h
}

/// Error function, accurate to close to machine precision.
pub fn erf<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let t = x * x;
    let mag = if t < real(1.5) {
        gamma_p_half_series(t)
    } else {
        T::one() - gamma_q_half_cf(t)
    };
    if x > T::zero() {
        mag
    } else {
        -mag
    }
}

/// Complementary error function, stable for large positive arguments.
pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return real::<T>(2.0) - erfc(-x);
    }
    let t = x * x;
    if t < real(1.5) {
        T::one() - gamma_p_half_series(t)
    } else {
        gamma_q_half_cf(t)
    }
}

/// Standard normal CDF.
pub fn normal_cdf<T: Real>(z: T) -> T {
    let sqrt2 = real::<T>(std::f64::consts::SQRT_2);
    real::<T>(0.5) * erfc(-z / sqrt2)
}

/// Standard normal quantile by bisection on [`normal_cdf`].
pub fn normal_quantile<T: Real>(p: T) -> Result<T, Error<T>> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("quantile level must be in (0, 1), got {p}"),
        });
    }
    let lo = real::<T>(-13.5);
    let hi = real::<T>(13.5);
    let xtol = T::epsilon().max(real(1e-14));
    Ok(bisect_boundary(|z| normal_cdf(z) >= p, lo, hi, xtol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logaddexp_infinities() {
        assert_eq!(logaddexp(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(logaddexp(3.0, f64::NEG_INFINITY), 3.0);
        assert_eq!(
            logaddexp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn logaddexp_matches_direct() {
        for &(a, b) in &[(0.0, 0.0), (-3.0, 2.0), (10.0, 10.5), (-700.0, -701.0)] {
            let direct = (f64::exp(a) + f64::exp(b)).ln();
            assert!((logaddexp(a, b) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_polynomial_is_near_exact() {
        let v = adaptive_simpson(|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn simpson_handles_step_integrand() {
        let v = adaptive_simpson(|x: f64| if x < 0.3 { 2.0 } else { 0.5 }, 0.0, 1.0, 1e-9).unwrap();
        assert!((v - (0.3 * 2.0 + 0.7 * 0.5)).abs() < 1e-7, "got {v}");
    }

    #[test]
    fn bisection_finds_threshold() {
        let x = bisect_boundary(|x: f64| x * x >= 2.0, 0.0, 2.0, 1e-13);
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_min() {
        // Comparison-based minimization resolves the argument to about
        // sqrt(machine epsilon) on a quadratic floor.
        let (x, fx) = golden_min(|x: f64| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-11);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn erf_reference_values() {
        // Reference values from standard tables.
        assert!((erf(1.0f64) - 0.842_700_792_949_714_9).abs() < 1e-14);
        assert!((erf(0.5f64) - 0.520_499_877_813_046_5).abs() < 1e-14);
        assert!((erf(-1.0f64) + 0.842_700_792_949_714_9).abs() < 1e-14);
        assert!((erf(3.0f64) - 0.999_977_909_503_001_4).abs() < 1e-14);
        assert!((erfc(2.0f64) - 0.004_677_734_981_047_265).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_and_quantile_roundtrip() {
        for &p in &[0.001, 0.1, 0.5, 0.9, 0.999] {
            let z = normal_quantile::<f64>(p).unwrap();
            assert!((normal_cdf(z) - p).abs() < 1e-12);
        }
        assert!((normal_cdf(0.0f64) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn erf_works_in_f32() {
        assert!((erf(1.0f32) - 0.842_700_8).abs() < 1e-6);
    }
}
