//! Built-in standardized target families.
//!
//! All families live on [0, 1] with uniform proposal and are parameterized by
//! the ratio maximum `r_max`:
//!
//! * `worst-case`: the density `r_max * min(1, gamma_tilde * x^{-1/2})` whose
//!   width profile maximizes the runtime bound at fixed `r_max`;
//! * `trapezoid`: a centered trapezoid (a triangle once `r_max >= 2`);
//! * `gaussian`: a truncated Gaussian bump over the uniform proposal;
//! * `staircase`: a piecewise-constant unimodal ratio with exact breakpoint
//!   arithmetic, also constructible from explicit steps.

use std::sync::Arc;

use crate::error::Error;
use crate::measures::{DynFn, Repr, StandardizedTarget, Step};
use crate::numeric::{adaptive_simpson, bisect_boundary, normal_cdf, real, Real};
use crate::width::gamma_tilde;

fn check_r_max<T: Real>(r_max: T) -> Result<(), Error<T>> {
    if !(r_max.is_finite() && r_max >= T::one()) {
        return Err(Error::param(
            "r_max",
            format!("must be finite and >= 1, got {r_max}"),
        ));
    }
    Ok(())
}

/// Verify by quadrature that a general-representation ratio integrates to 1.
fn check_normalized<T: Real>(target: &StandardizedTarget<T>) -> Result<(), Error<T>> {
    let total = adaptive_simpson(|x| target.ratio(x), T::zero(), T::one(), real(1e-8))?;
    if (total - T::one()).abs() > real(1e-6) {
        return Err(Error::param(
            "family",
            format!("ratio integrates to {total}, expected 1"),
        ));
    }
    Ok(())
}

/// The trivial target r = 1: the proposal itself.
pub fn uniform_ratio<T: Real>() -> StandardizedTarget<T> {
    let ratio: DynFn<T> = Arc::new(|_| T::one());
    let q_cdf: DynFn<T> = Arc::new(|x| x);
    StandardizedTarget::from_parts(
        Repr::General { ratio, q_cdf },
        real(0.5),
        T::one(),
        "uniform-ratio",
    )
    .expect("uniform ratio is always valid")
}

/// The worst-case family: ratio `r_max * min(1, gamma_tilde * x^{-1/2})`.
///
/// Its width function is 1 up to `gamma_tilde` and `(gamma_tilde/gamma)^2`
/// beyond, the profile that maximizes the bound functional among all width
/// functions at this `r_max`.
pub fn worst_case_family<T: Real>(r_max: T) -> Result<StandardizedTarget<T>, Error<T>> {
    check_r_max(r_max)?;
    let gt = gamma_tilde(r_max)?;
    // Plateau is [0, gt^2]; the stored mode is its midpoint.
    let mode = gt * gt / real(2.0);
    StandardizedTarget::from_parts(
        Repr::WorstCase { gamma_tilde: gt },
        mode,
        r_max,
        "worst-case",
    )
}

/// Centered trapezoid ratio reaching `r_max` at x = 1/2.
///
/// For `r_max <= 2` the trapezoid has full support with flanks hitting zero
/// exactly at the domain edges; beyond that it is the compactly supported
/// triangle of base `2 / r_max`.
pub fn trapezoid_family<T: Real>(r_max: T) -> Result<StandardizedTarget<T>, Error<T>> {
    check_r_max(r_max)?;
    let one = T::one();
    let two = real::<T>(2.0);
    let half = real::<T>(0.5);
    let target = if r_max == one {
        StandardizedTarget::from_parts(
            Repr::General {
                ratio: Arc::new(|_| T::one()),
                q_cdf: Arc::new(|x| x),
            },
            half,
            one,
            "trapezoid",
        )?
    } else if r_max <= two {
        // apex height of the untruncated triangle whose clip at r_max
        // integrates to one
        let apex = r_max * r_max / (two * (r_max - one));
        let xl = (r_max - one) / r_max;
        let rm = r_max;
        let ratio: DynFn<T> = Arc::new(move |x: T| rm.min(apex * (one - (two * x - one).abs())));
        let q_cdf: DynFn<T> = Arc::new(move |x: T| {
            if x <= xl {
                apex * x * x
            } else if x <= one - xl {
                apex * xl * xl + rm * (x - xl)
            } else {
                one - apex * (one - x) * (one - x)
            }
        });
        StandardizedTarget::from_parts(Repr::General { ratio, q_cdf }, half, r_max, "trapezoid")?
    } else {
        let xl = half - one / r_max;
        let xr = half + one / r_max;
        let rm = r_max;
        let ratio: DynFn<T> = Arc::new(move |x: T| rm * T::zero().max(one - rm * (x - half).abs()));
        let q_cdf: DynFn<T> = Arc::new(move |x: T| {
            if x <= xl {
                T::zero()
            } else if x <= half {
                rm * rm * (x - xl) * (x - xl) / two
            } else if x <= xr {
                one - rm * rm * (xr - x) * (xr - x) / two
            } else {
                one
            }
        });
        StandardizedTarget::from_parts(Repr::General { ratio, q_cdf }, half, r_max, "trapezoid")?
    };
    check_normalized(&target)?;
    Ok(target)
}

/// Truncated-Gaussian target over the uniform proposal, centered at 1/2 with
/// the scale solved so the ratio maximum equals `r_max`.
pub fn gaussian_family<T: Real>(r_max: T) -> Result<StandardizedTarget<T>, Error<T>> {
    check_r_max(r_max)?;
    if r_max == T::one() {
        return StandardizedTarget::from_parts(
            Repr::General {
                ratio: Arc::new(|_| T::one()),
                q_cdf: Arc::new(|x| x),
            },
            real(0.5),
            T::one(),
            "gaussian",
        );
    }
    // peak(s) = phi(0) / (s * Z(s)) decreases from +inf to 1 as the scale s
    // grows; solve peak(s) = r_max by bisection in log-scale space.
    let peak = |s: T| -> T {
        let z = real::<T>(2.0) * normal_cdf(T::one() / (real::<T>(2.0) * s)) - T::one();
        real::<T>(1.0 / (2.0 * std::f64::consts::PI).sqrt()) / (s * z)
    };
    let lo = real::<T>(1e-5) / r_max;
    let hi = real::<T>(16.0).max((r_max - T::one()).powf(real(-0.5)) * real(16.0));
    let y = bisect_boundary(|y: T| peak(y.exp()) <= r_max, lo.ln(), hi.ln(), real(1e-13));
    let s = y.exp();
    build_gaussian(real(0.5), s, "gaussian")
}

/// Truncated-Gaussian target with explicit mean and standard deviation. The
/// mode clamps to the domain, so off-center means exercise boundary modes.
pub fn gaussian_family_mean_sd<T: Real>(mean: T, sd: T) -> Result<StandardizedTarget<T>, Error<T>> {
    if !(sd.is_finite() && sd > T::zero()) {
        return Err(Error::param("sd", format!("must be positive, got {sd}")));
    }
    if !mean.is_finite() {
        return Err(Error::param("mean", "must be finite"));
    }
    build_gaussian(mean, sd, "gaussian-mean-sd")
}

fn build_gaussian<T: Real>(
    mean: T,
    sd: T,
    label: &'static str,
) -> Result<StandardizedTarget<T>, Error<T>> {
    let mass = normal_cdf((T::one() - mean) / sd) - normal_cdf((T::zero() - mean) / sd);
    if !(mass > real(1e-12)) {
        return Err(Error::param(
            "mean",
            "truncated Gaussian keeps essentially no mass in [0, 1]",
        ));
    }
    let norm = T::one() / (sd * real::<T>((2.0 * std::f64::consts::PI).sqrt()) * mass);
    let ratio: DynFn<T> = Arc::new(move |x: T| {
        let z = (x - mean) / sd;
        norm * (-z * z / real::<T>(2.0)).exp()
    });
    let cdf_lo = normal_cdf((T::zero() - mean) / sd);
    let q_cdf: DynFn<T> = Arc::new(move |x: T| {
        ((normal_cdf((x - mean) / sd) - cdf_lo) / mass)
            .max(T::zero())
            .min(T::one())
    });
    let mode = mean.max(T::zero()).min(T::one());
    let r_max = ratio(mode);
    let target =
        StandardizedTarget::from_parts(Repr::General { ratio, q_cdf }, mode, r_max, label)?;
    check_normalized(&target)?;
    Ok(target)
}

/// Canonical staircase: a plateau of height `r_max` and length `1/(2 r_max)`
/// centered at 1/2 on a pedestal chosen so the ratio integrates to one.
pub fn staircase_family<T: Real>(r_max: T) -> Result<StandardizedTarget<T>, Error<T>> {
    check_r_max(r_max)?;
    let two = real::<T>(2.0);
    let half = real::<T>(0.5);
    let plateau = T::one() / (two * r_max);
    let pedestal = r_max / (two * r_max - T::one());
    let b0 = half - plateau / two;
    let b1 = half + plateau / two;
    staircase_from_steps(&[b0, b1], &[pedestal, r_max, pedestal], "staircase")
}

/// Staircase from explicit interior breakpoints and per-piece levels
/// (`levels.len() == breaks.len() + 1`).
pub fn staircase_from_breaks<T: Real>(
    breaks: &[T],
    levels: &[T],
) -> Result<StandardizedTarget<T>, Error<T>> {
    staircase_from_steps(breaks, levels, "staircase-steps")
}

fn staircase_from_steps<T: Real>(
    breaks: &[T],
    levels: &[T],
    label: &'static str,
) -> Result<StandardizedTarget<T>, Error<T>> {
    if levels.len() != breaks.len() + 1 || levels.is_empty() {
        return Err(Error::param(
            "levels",
            "need exactly one more level than interior breakpoints",
        ));
    }
    let mut edges = Vec::with_capacity(levels.len() + 1);
    edges.push(T::zero());
    edges.extend_from_slice(breaks);
    edges.push(T::one());
    for w in edges.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::param(
                "breaks",
                "breakpoints must be strictly increasing inside (0, 1)",
            ));
        }
    }
    if levels.iter().any(|l| !(l.is_finite() && *l >= T::zero())) {
        return Err(Error::param("levels", "levels must be finite and >= 0"));
    }

    // Unimodality: non-decreasing up to the top plateau, then non-increasing,
    // with a single contiguous run of maximal steps.
    let r_max = levels.iter().cloned().fold(T::zero(), T::max);
    let first_max = levels.iter().position(|l| *l == r_max).unwrap();
    let last_max = levels.iter().rposition(|l| *l == r_max).unwrap();
    for i in 0..first_max {
        if levels[i] > levels[i + 1] {
            return Err(Error::param("levels", "ratio is not unimodal"));
        }
    }
    for i in last_max..levels.len() - 1 {
        if levels[i] < levels[i + 1] {
            return Err(Error::param("levels", "ratio is not unimodal"));
        }
    }
    if levels[first_max..=last_max].iter().any(|l| *l != r_max) {
        return Err(Error::param("levels", "ratio is not unimodal"));
    }

    let mut steps = Vec::with_capacity(levels.len());
    let mut cum = Vec::with_capacity(levels.len());
    let mut acc = T::zero();
    for (i, &level) in levels.iter().enumerate() {
        steps.push(Step {
            lo: edges[i],
            hi: edges[i + 1],
            level,
        });
        cum.push(acc);
        acc = acc + level * (edges[i + 1] - edges[i]);
    }
    if (acc - T::one()).abs() > real(1e-9) {
        return Err(Error::param(
            "levels",
            format!("staircase integrates to {acc}, expected 1"),
        ));
    }

    // Midpoint of the top plateau.
    let mode = (edges[first_max] + edges[last_max + 1]) / real(2.0);
    StandardizedTarget::from_parts(
        Repr::Staircase {
            steps: steps.into(),
            cum: cum.into(),
        },
        mode,
        r_max,
        label,
    )
}

/// Config-facing family descriptor, buildable at any scalar type.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    UniformRatio,
    WorstCase { r_max: f64 },
    Trapezoid { r_max: f64 },
    Gaussian { r_max: f64 },
    GaussianMeanSd { mean: f64, sd: f64 },
    Staircase { r_max: f64 },
    StaircaseSteps { breaks: Vec<f64>, levels: Vec<f64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::UniformRatio => "uniform-ratio",
            Family::WorstCase { .. } => "worst-case",
            Family::Trapezoid { .. } => "trapezoid",
            Family::Gaussian { .. } => "gaussian",
            Family::GaussianMeanSd { .. } => "gaussian-mean-sd",
            Family::Staircase { .. } => "staircase",
            Family::StaircaseSteps { .. } => "staircase-steps",
        }
    }

    /// All family names accepted in configuration files.
    pub fn known_names() -> &'static [&'static str] {
        &[
            "uniform-ratio",
            "worst-case",
            "trapezoid",
            "gaussian",
            "gaussian-mean-sd",
            "staircase",
            "staircase-steps",
        ]
    }

    pub fn build<T: Real>(&self) -> Result<StandardizedTarget<T>, Error<T>> {
        match self {
            Family::UniformRatio => Ok(uniform_ratio()),
            Family::WorstCase { r_max } => worst_case_family(real(*r_max)),
            Family::Trapezoid { r_max } => trapezoid_family(real(*r_max)),
            Family::Gaussian { r_max } => gaussian_family(real(*r_max)),
            Family::GaussianMeanSd { mean, sd } => gaussian_family_mean_sd(real(*mean), real(*sd)),
            Family::Staircase { r_max } => staircase_family(real(*r_max)),
            Family::StaircaseSteps { breaks, levels } => {
                let breaks: Vec<T> = breaks.iter().map(|b| real(*b)).collect();
                let levels: Vec<T> = levels.iter().map(|l| real(*l)).collect();
                staircase_from_breaks(&breaks, &levels)
            }
        }
    }

    /// Same family shape at a different `r_max`, for sweeps.
    pub fn with_r_max(&self, r_max: f64) -> Result<Family, Error<f64>> {
        match self {
            Family::WorstCase { .. } => Ok(Family::WorstCase { r_max }),
            Family::Trapezoid { .. } => Ok(Family::Trapezoid { r_max }),
            Family::Gaussian { .. } => Ok(Family::Gaussian { r_max }),
            Family::Staircase { .. } => Ok(Family::Staircase { r_max }),
            Family::UniformRatio if r_max == 1.0 => Ok(Family::UniformRatio),
            _ => Err(Error::param(
                "family",
                format!("{} cannot be re-parameterized by r_max", self.name()),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_simpson;

    fn families_at(r_max: f64) -> Vec<StandardizedTarget<f64>> {
        vec![
            worst_case_family(r_max).unwrap(),
            trapezoid_family(r_max).unwrap(),
            gaussian_family(r_max).unwrap(),
            staircase_family(r_max).unwrap(),
        ]
    }

    #[test]
    fn worst_case_degenerates_to_uniform_at_one() {
        let t = worst_case_family(1.0).unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert_eq!(t.ratio(x), 1.0);
            assert!((t.q_cdf(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn worst_case_matches_closed_density() {
        let t = worst_case_family(2.0).unwrap();
        let gt = 1.0 - 0.5f64.sqrt();
        for i in 1..=60 {
            let x = i as f64 / 60.0;
            let expected = 2.0 * 1.0f64.min(gt / x.sqrt());
            assert!((t.ratio(x) - expected).abs() < 1e-12);
        }
        // total mass r_max (2 gt - gt^2) = 1
        assert!((t.q_cdf(1.0) - 1.0).abs() < 1e-12);
        assert!((2.0 * (2.0 * gt - gt * gt) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_family_is_normalized_and_mode_correct() {
        for r_max in [1.0, 2.0, 8.0, 64.0] {
            for t in families_at(r_max) {
                let total = adaptive_simpson(|x| t.ratio(x), 0.0, 1.0, 1e-8).unwrap();
                assert!(
                    (total - 1.0).abs() < 1e-6,
                    "{} at r_max={r_max}: integral {total}",
                    t.label()
                );
                let eps = 1e-6;
                let rm = t.ratio(t.mode());
                assert!((rm - t.r_max()).abs() <= 1e-9 * t.r_max());
                if t.mode() > eps {
                    assert!(t.ratio(t.mode() - eps) <= rm + 1e-12);
                }
                if t.mode() < 1.0 - eps {
                    assert!(t.ratio(t.mode() + eps) <= rm + 1e-12);
                }
            }
        }
    }

    #[test]
    fn no_interior_dip_in_any_family() {
        // 1000 random ordered triples per family; a dip below both outer
        // values would contradict unimodality.
        use crate::rng::{RandomStream, SplitMix64Stream};
        let mut rng = SplitMix64Stream::from_seed(17);
        for t in families_at(8.0) {
            for _ in 0..1000 {
                let mut xs = [
                    rng.uniform::<f64>(),
                    rng.uniform::<f64>(),
                    rng.uniform::<f64>(),
                ];
                xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                let [a, b, c] = xs;
                let dip = t.ratio(b) < t.ratio(a).min(t.ratio(c)) - 1e-12;
                assert!(!dip, "interior dip in {} at {a},{b},{c}", t.label());
            }
        }
    }

    #[test]
    fn renyi_divergence_of_worst_case_is_log_r_max() {
        let t = worst_case_family(8.0f64).unwrap();
        assert!((t.renyi_inf() - 8.0f64.ln()).abs() < 1e-15);
        assert!((t.renyi_inf() - 2.0794).abs() < 1e-4);
        assert_eq!(uniform_ratio::<f64>().renyi_inf(), 0.0);
    }

    #[test]
    fn gaussian_peak_hits_requested_r_max() {
        for r_max in [1.5f64, 4.0, 64.0, 1024.0] {
            let t = gaussian_family(r_max).unwrap();
            assert!(
                (t.r_max() - r_max).abs() <= 1e-9 * r_max,
                "requested {r_max}, got {}",
                t.r_max()
            );
        }
    }

    #[test]
    fn gaussian_boundary_mode_clamps() {
        let t = gaussian_family_mean_sd(1.4f64, 0.5).unwrap();
        assert_eq!(t.mode(), 1.0);
        assert!(t.ratio(1.0) > t.ratio(0.9));
    }

    #[test]
    fn staircase_spec_example_widths() {
        // r = 2 on [0.4, 0.9), zero elsewhere.
        let t = staircase_from_breaks(&[0.4, 0.9], &[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.r_max(), 2.0);
        assert_eq!(t.mode(), 0.65);
        let (lo, hi) = t.closed_superlevel(0.75).unwrap();
        assert_eq!((lo, hi), (0.4, 0.9));
        assert_eq!(t.ratio(0.4), 2.0);
        assert_eq!(t.ratio(0.9), 0.0);
    }

    #[test]
    fn staircase_rejects_non_unimodal_levels() {
        assert!(staircase_from_breaks(&[0.25, 0.5, 0.75], &[2.0, 0.5, 2.0, 0.5]).is_err());
        assert!(staircase_from_breaks(&[0.5], &[1.0, 2.0]).is_err()); // not normalized
    }

    #[test]
    fn family_enum_round_trips_builds() {
        let fam = Family::WorstCase { r_max: 8.0 };
        let t = fam.build::<f64>().unwrap();
        assert_eq!(t.label(), "worst-case");
        assert_eq!(
            fam.with_r_max(16.0).unwrap(),
            Family::WorstCase { r_max: 16.0 }
        );
        assert!(Family::GaussianMeanSd { mean: 0.2, sd: 0.1 }
            .with_r_max(4.0)
            .is_err());
    }

    #[test]
    fn families_build_in_f32() {
        let t = Family::Staircase { r_max: 4.0 }.build::<f32>().unwrap();
        assert_eq!(t.r_max(), 4.0f32);
        let t = Family::WorstCase { r_max: 4.0 }.build::<f32>().unwrap();
        assert!(t.ratio(0.5f32) > 0.0);
    }
}
