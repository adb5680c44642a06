//! Superlevel-set widths and the bound functionals built on them.
//!
//! For a standardized target with ratio r, the superlevel set
//! `S(gamma) = {x : r(x) >= gamma * r_max}` is an interval containing the
//! mode; `w(gamma)` is its length. The width profile drives every runtime
//! bound: `h(gamma, w) = log(1/w(gamma)) + 2 log(1/gamma)` and its infimum
//! over gamma, which the worst-case profile `w~` maximizes at fixed `r_max`.

use crate::error::Error;
use crate::measures::StandardizedTarget;
use crate::numeric::{adaptive_simpson, bisect_boundary, golden_min, real, Real};

/// Absolute x-tolerance for superlevel endpoints found by bisection.
fn endpoint_tol<T: Real>() -> T {
    real::<T>(1e-12).max(T::epsilon() * real(4.0))
}

/// `gamma~ = 1 - sqrt(1 - 1/r_max)`, the corner of the worst-case width
/// profile, evaluated in the cancellation-free form.
pub fn gamma_tilde<T: Real>(r_max: T) -> Result<T, Error<T>> {
    if !(r_max.is_finite() && r_max >= T::one()) {
        return Err(Error::param(
            "r_max",
            format!("must be finite and >= 1, got {r_max}"),
        ));
    }
    let inv = T::one() / r_max;
    Ok(inv / (T::one() + (T::one() - inv).sqrt()))
}

/// The two-parameter width template: 1 below `gamma_prime`, then
/// `(gamma_prime/gamma)^2`. At `gamma_prime = gamma~` this is the worst-case
/// width function.
pub fn v_template<T: Real>(gamma: T, gamma_prime: T) -> T {
    if gamma <= gamma_prime {
        T::one()
    } else {
        let q = gamma_prime / gamma;
        q * q
    }
}

fn check_gamma<T: Real>(gamma: T) -> Result<(), Error<T>> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::param(
            "gamma",
            format!("must lie in [0, 1], got {gamma}"),
        ));
    }
    Ok(())
}

fn numeric_superlevel<T: Real>(target: &StandardizedTarget<T>, gamma: T) -> (T, T) {
    let mode = target.mode();
    // Guard against the achieved maximum sitting a rounding step below
    // r_max; keeps gamma = 1 well defined for smooth ratios.
    let thresh = (gamma * target.r_max()).min(target.ratio(mode));
    let tol = endpoint_tol::<T>();
    let left = if target.ratio(T::zero()) >= thresh {
        T::zero()
    } else {
        bisect_boundary(|x| target.ratio(x) >= thresh, T::zero(), mode, tol)
    };
    let right = if target.ratio(T::one()) >= thresh {
        T::one()
    } else {
        bisect_boundary(|x| target.ratio(x) < thresh, mode, T::one(), tol)
    };
    (left, right)
}

/// The superlevel interval `S(gamma)`, closed form when the target has one,
/// otherwise by bisection on each side of the mode.
pub fn superlevel_interval<T: Real>(
    target: &StandardizedTarget<T>,
    gamma: T,
) -> Result<(T, T), Error<T>> {
    check_gamma(gamma)?;
    if let Some(iv) = target.closed_superlevel(gamma) {
        return Ok(iv);
    }
    Ok(numeric_superlevel(target, gamma))
}

/// Length of the superlevel interval.
pub fn width<T: Real>(target: &StandardizedTarget<T>, gamma: T) -> Result<T, Error<T>> {
    let (lo, hi) = superlevel_interval(target, gamma)?;
    Ok(hi - lo)
}

/// `log(1/w(gamma))`, infinite where the width vanishes.
pub fn f_functional<T: Real>(gamma: T, w: &WidthFunction<T>) -> T {
    let wg = w.eval(gamma);
    if wg > T::zero() {
        -wg.ln()
    } else {
        T::infinity()
    }
}

/// `2 log(1/gamma)`.
pub fn g_functional<T: Real>(gamma: T) -> T {
    if gamma > T::zero() {
        -real::<T>(2.0) * gamma.ln()
    } else {
        T::infinity()
    }
}

/// The bound functional `h = f + g`.
pub fn h_functional<T: Real>(gamma: T, w: &WidthFunction<T>) -> T {
    f_functional(gamma, w) + g_functional(gamma)
}

/// How a [`WidthFunction`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthKind {
    Numeric,
    ClosedFormWorstCase,
    ClosedFormStaircase,
}

/// Width profile of a standardized target.
#[derive(Clone)]
pub struct WidthFunction<T: Real> {
    target: StandardizedTarget<T>,
    kind: WidthKind,
}

impl<T: Real> WidthFunction<T> {
    /// Use the best available evaluation: closed form for the worst-case and
    /// staircase families, bisection otherwise.
    pub fn for_target(target: &StandardizedTarget<T>) -> Self {
        let kind = match target.closed_superlevel(T::zero()) {
            Some(_) if target.steps().is_some() => WidthKind::ClosedFormStaircase,
            Some(_) => WidthKind::ClosedFormWorstCase,
            None => WidthKind::Numeric,
        };
        WidthFunction {
            target: target.clone(),
            kind,
        }
    }

    /// Force bisection even when a closed form exists, so the two routes can
    /// be cross-checked.
    pub fn numeric(target: &StandardizedTarget<T>) -> Self {
        WidthFunction {
            target: target.clone(),
            kind: WidthKind::Numeric,
        }
    }

    pub fn kind(&self) -> WidthKind {
        self.kind
    }

    pub fn r_max(&self) -> T {
        self.target.r_max()
    }

    pub fn target(&self) -> &StandardizedTarget<T> {
        &self.target
    }

    /// `w(gamma)`; callers must keep gamma in [0, 1].
    pub fn eval(&self, gamma: T) -> T {
        let (lo, hi) = match self.kind {
            WidthKind::Numeric => numeric_superlevel(&self.target, gamma),
            _ => self
                .target
                .closed_superlevel(gamma)
                .expect("closed-form kind has closed superlevels"),
        };
        hi - lo
    }

    /// `\int_0^1 w`: exact for closed forms, adaptive quadrature otherwise.
    /// Equals `1/r_max` for any width function.
    pub fn integral(&self) -> Result<T, Error<T>> {
        match self.kind {
            WidthKind::ClosedFormWorstCase => {
                let gt = gamma_tilde(self.target.r_max())?;
                Ok(gt * (real::<T>(2.0) - gt))
            }
            WidthKind::ClosedFormStaircase => {
                let steps = self.target.steps().expect("staircase kind");
                let mut levels: Vec<T> = steps.iter().map(|s| s.level).collect();
                levels.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
                levels.dedup();
                let mut acc = T::zero();
                for (j, &level) in levels.iter().enumerate() {
                    let next = levels.get(j + 1).copied().unwrap_or(T::zero());
                    let lo = steps
                        .iter()
                        .find(|s| s.level >= level)
                        .map(|s| s.lo)
                        .unwrap();
                    let hi = steps
                        .iter()
                        .rev()
                        .find(|s| s.level >= level)
                        .map(|s| s.hi)
                        .unwrap();
                    acc = acc + (hi - lo) * (level - next);
                }
                Ok(acc / self.target.r_max())
            }
            WidthKind::Numeric => {
                let tol = real::<T>(1e-8).max(T::epsilon() * real(32.0));
                adaptive_simpson(|g| self.eval(g), T::zero(), T::one(), tol)
            }
        }
    }
}

/// Spec-level operation: `\int_0^1 w(gamma) d gamma` for a target, using the
/// best available evaluation.
pub fn width_integral<T: Real>(target: &StandardizedTarget<T>) -> Result<T, Error<T>> {
    WidthFunction::for_target(target).integral()
}

/// Minimize `h(gamma, w)` over a log-spaced gamma grid on [1e-6, 1], refined
/// by golden-section search (in log space) around the grid argmin.
///
/// Returns `(gamma_star, h_star)`.
pub fn inf_h<T: Real>(w: &WidthFunction<T>, grid_size: usize) -> Result<(T, T), Error<T>> {
    if grid_size < 100 {
        return Err(Error::param("grid_size", "need at least 100 grid points"));
    }
    let y_lo = real::<T>(-6.0 * std::f64::consts::LN_10);
    let y_hi = T::zero();
    let n = grid_size;
    let mut best_i = 0usize;
    let mut best_h = T::infinity();
    let mut best_gamma = T::one();
    for i in 0..n {
        let y = y_lo + (y_hi - y_lo) * real::<T>(i as f64 / (n - 1) as f64);
        let gamma = y.exp();
        let h = h_functional(gamma, w);
        if h < best_h {
            best_h = h;
            best_i = i;
            best_gamma = gamma;
        }
    }
    let step = (y_hi - y_lo) / real::<T>((n - 1) as f64);
    let lo = y_lo + step * real::<T>(best_i.saturating_sub(1) as f64);
    let hi = (y_lo + step * real::<T>((best_i + 1).min(n - 1) as f64)).min(y_hi);
    let (y_star, h_star) = golden_min(|y: T| h_functional(y.exp(), w), lo, hi, real(1e-12));
    if h_star < best_h {
        Ok((y_star.exp(), h_star))
    } else {
        Ok((best_gamma, best_h))
    }
}

/// One row of a width profile.
#[derive(Clone, Copy, Debug)]
pub struct WidthProfileRow<T> {
    pub gamma: T,
    pub width: T,
    pub f: T,
    pub g: T,
    pub h: T,
}

/// Evaluate `(gamma, w, f, g, h)` over a gamma grid.
pub fn width_profile<T: Real>(w: &WidthFunction<T>, grid: &[T]) -> Vec<WidthProfileRow<T>> {
    grid.iter()
        .map(|&gamma| WidthProfileRow {
            gamma,
            width: w.eval(gamma),
            f: f_functional(gamma, w),
            g: g_functional(gamma),
            h: h_functional(gamma, w),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        gaussian_family, staircase_from_breaks, trapezoid_family, uniform_ratio, worst_case_family,
    };

    #[test]
    fn gamma_tilde_values() {
        assert_eq!(gamma_tilde(1.0f64).unwrap(), 1.0);
        assert!((gamma_tilde(2.0f64).unwrap() - 0.292_893_218_813_452_5).abs() < 1e-15);
        assert!(gamma_tilde(100.0f64).unwrap() >= 0.005);
        assert!(gamma_tilde(0.5f64).is_err());
    }

    #[test]
    fn gamma_tilde_algebraic_identity() {
        for r in [1.0f64, 1.5, 2.0, 8.0, 64.0, 1024.0, 1e9] {
            let gt = gamma_tilde(r).unwrap();
            assert!(
                (gt * (2.0 - gt) - 1.0 / r).abs() <= 1e-12,
                "identity fails at r_max = {r}"
            );
            assert!(gt >= 1.0 / (2.0 * r));
        }
    }

    #[test]
    fn superlevel_of_full_support_target_at_zero_is_everything() {
        let t = gaussian_family(8.0f64).unwrap();
        assert_eq!(superlevel_interval(&t, 0.0).unwrap(), (0.0, 1.0));
        assert!(superlevel_interval(&t, 1.5).is_err());
    }

    #[test]
    fn worst_case_superlevel_closed_form() {
        let t = worst_case_family(4.0f64).unwrap();
        let gt = gamma_tilde(4.0f64).unwrap();
        for gamma in [0.5, 0.7, 0.9, 1.0] {
            let (lo, hi) = superlevel_interval(&t, gamma).unwrap();
            assert_eq!(lo, 0.0);
            assert!((hi - (gt / gamma).powi(2)).abs() < 1e-15);
        }
        assert_eq!(superlevel_interval(&t, gt / 2.0).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn degenerate_superlevel_at_one_contains_mode() {
        let t = gaussian_family(16.0f64).unwrap();
        let (lo, hi) = superlevel_interval(&t, 1.0).unwrap();
        assert!(lo <= t.mode() + 1e-9 && t.mode() - 1e-9 <= hi);
        assert!(hi - lo < 1e-6);
    }

    #[test]
    fn numeric_width_matches_worst_case_closed_form() {
        let t = worst_case_family(8.0f64).unwrap();
        let numeric = WidthFunction::numeric(&t);
        let gt = gamma_tilde(8.0f64).unwrap();
        for i in 0..=1000 {
            let gamma = i as f64 / 1000.0;
            let expected = v_template(gamma, gt);
            assert!(
                (numeric.eval(gamma) - expected).abs() < 1e-6,
                "mismatch at gamma = {gamma}"
            );
        }
    }

    #[test]
    fn staircase_width_is_exact() {
        let t = staircase_from_breaks(&[0.4f64, 0.9], &[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(width(&t, 0.75).unwrap(), 0.5);
        assert_eq!(width(&t, 0.0).unwrap(), 1.0);
        // Numeric bisection agrees at the jump to endpoint tolerance.
        let numeric = WidthFunction::numeric(&t);
        assert!((numeric.eval(0.75) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn width_is_monotone_and_nested() {
        use crate::rng::{RandomStream, SplitMix64Stream};
        let mut rng = SplitMix64Stream::from_seed(5);
        let targets = [
            worst_case_family(8.0f64).unwrap(),
            trapezoid_family(8.0).unwrap(),
            gaussian_family(8.0).unwrap(),
        ];
        for t in &targets {
            for _ in 0..1000 {
                let mut g = [rng.uniform::<f64>(), rng.uniform::<f64>()];
                g.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                let w1 = width(t, g[0]).unwrap();
                let w2 = width(t, g[1]).unwrap();
                assert!(w2 <= w1 + 1e-12, "{}: w({}) > w({})", t.label(), g[1], g[0]);
                let (a1, b1) = superlevel_interval(t, g[0]).unwrap();
                let (a2, b2) = superlevel_interval(t, g[1]).unwrap();
                assert!(a1 <= a2 + 1e-12 && b2 <= b1 + 1e-12);
            }
        }
    }

    #[test]
    fn boundary_mode_superlevels_clamp_to_the_edge() {
        // Mean outside the domain puts the mode at x = 1; the right endpoint
        // of every superlevel interval clamps there.
        let t = crate::families::gaussian_family_mean_sd(1.2f64, 0.4).unwrap();
        assert_eq!(t.mode(), 1.0);
        for gamma in [0.2, 0.5, 0.9] {
            let (lo, hi) = superlevel_interval(&t, gamma).unwrap();
            assert_eq!(hi, 1.0);
            assert!(lo < 1.0);
            assert!(width(&t, gamma).unwrap() <= 1.0);
        }
        assert!((width_integral(&t).unwrap() - 1.0 / t.r_max()).abs() < 1e-6);
    }

    #[test]
    fn width_integral_examples() {
        assert!((width_integral(&uniform_ratio::<f64>()).unwrap() - 1.0).abs() < 1e-9);
        let t = worst_case_family(2.0f64).unwrap();
        assert!((width_integral(&t).unwrap() - 0.5).abs() < 1e-6);
        let t = gaussian_family(8.0f64).unwrap();
        assert!((width_integral(&t).unwrap() - 1.0 / t.r_max()).abs() < 1e-6);
    }

    #[test]
    fn numeric_integral_agrees_with_closed_form() {
        let t = worst_case_family(8.0f64).unwrap();
        let exact = WidthFunction::for_target(&t).integral().unwrap();
        let numeric = WidthFunction::numeric(&t).integral().unwrap();
        assert!((exact - numeric).abs() < 1e-6);
        assert!((exact - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn h_functional_examples() {
        let w1 = WidthFunction::for_target(&uniform_ratio::<f64>());
        assert_eq!(h_functional(1.0, &w1), 0.0);

        let t = worst_case_family(2.0f64).unwrap();
        let w = WidthFunction::for_target(&t);
        let gt = gamma_tilde(2.0f64).unwrap();
        let h = h_functional(gt, &w);
        assert!((h - 2.0 * (1.0 / gt).ln()).abs() < 1e-12);
        assert!((h - 2.455_90).abs() < 1e-4);
        for gamma in [0.1, 0.5, 0.9] {
            assert!(h_functional(gamma, &w) >= g_functional(gamma));
        }
    }

    #[test]
    fn h_blows_up_where_width_collapses() {
        // The trapezoid peak has zero-width superlevel set at gamma = 1; the
        // bisection endpoints collapse to the x tolerance, so h is huge, and
        // a genuinely zero width maps to the infinite sentinel.
        let t = trapezoid_family(8.0f64).unwrap();
        let w = WidthFunction::for_target(&t);
        assert!(h_functional(1.0, &w) > 20.0);
        assert!(g_functional(0.0f64).is_infinite());
    }

    #[test]
    fn inf_h_on_worst_case_hits_the_plateau_value() {
        let t = worst_case_family(16.0f64).unwrap();
        let w = WidthFunction::for_target(&t);
        let gt = gamma_tilde(16.0f64).unwrap();
        let (_, val) = inf_h(&w, 400).unwrap();
        let plateau = 2.0 * (1.0 / gt).ln();
        assert!(val <= plateau + 1e-9, "{val} > {plateau}");
        assert!(val >= plateau - 1e-6);
        assert!(inf_h(&w, 50).is_err());
    }

    #[test]
    fn inf_h_of_uniform_is_zero() {
        let w = WidthFunction::for_target(&uniform_ratio::<f64>());
        let (gamma, val) = inf_h(&w, 200).unwrap();
        assert!(val.abs() < 1e-9);
        assert!((gamma - 1.0).abs() < 1e-6);
    }

    #[test]
    fn worst_case_dominates_other_families() {
        for r_max in [2.0f64, 8.0, 64.0] {
            let wc = worst_case_family(r_max).unwrap();
            let (_, h_wc) = inf_h(&WidthFunction::for_target(&wc), 400).unwrap();
            for t in [
                trapezoid_family(r_max).unwrap(),
                gaussian_family(r_max).unwrap(),
            ] {
                let (_, h_t) = inf_h(&WidthFunction::for_target(&t), 400).unwrap();
                assert!(
                    h_wc >= h_t - 1e-9,
                    "{} at r_max={r_max}: {h_wc} < {h_t}",
                    t.label()
                );
            }
        }
    }

    #[test]
    fn v_template_matches_worst_case_width() {
        let t = worst_case_family(8.0f64).unwrap();
        let w = WidthFunction::for_target(&t);
        let gt = gamma_tilde(8.0f64).unwrap();
        for i in 0..=500 {
            let gamma = i as f64 / 500.0;
            assert!((v_template(gamma, gt) - w.eval(gamma)).abs() < 1e-15);
        }
    }

    #[test]
    fn widths_evaluate_in_f32() {
        let t = worst_case_family(8.0f32).unwrap();
        let w = WidthFunction::numeric(&t);
        let gt = gamma_tilde(8.0f32).unwrap();
        for gamma in [0.0f32, 0.2, 0.7, 1.0] {
            assert!((w.eval(gamma) - v_template(gamma, gt)).abs() < 1e-4);
        }
    }

    #[test]
    fn w_at_zero_is_at_least_inverse_r_max() {
        for r_max in [1.0f64, 2.0, 8.0, 64.0] {
            for t in [
                worst_case_family(r_max).unwrap(),
                trapezoid_family(r_max).unwrap(),
                gaussian_family(r_max).unwrap(),
                crate::families::staircase_family(r_max).unwrap(),
            ] {
                let w0 = width(&t, 0.0).unwrap();
                assert!(w0 >= 1.0 / r_max);
                assert_eq!(w0, 1.0);
            }
        }
    }
}
