//! Target/proposal pairs and their standardized form.
//!
//! A [`TargetProposalPair`] is a target measure Q and proposal measure P on
//! the real line with P >> Q and a unimodal density ratio r = dQ/dP. Pushing
//! both through the proposal CDF yields a [`StandardizedTarget`]: uniform
//! proposal on [0, 1], same ratio shape, same maximum. The sampler and the
//! width machinery only ever see standardized targets.

use std::sync::Arc;

use crate::error::Error;
use crate::numeric::{adaptive_simpson, golden_max, real, Real};

pub type DynFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Number of points in the grids used for validation sweeps.
const GRID_CHECK_POINTS: usize = 2048;
/// Tolerance for normalization and divergence agreement checks.
const CHECK_TOL: f64 = 1e-6;

/// Specification of a target/proposal pair on a finite support window.
///
/// `ratio_mode` may be omitted, in which case the constructor locates the
/// maximizer of the density ratio by golden-section search (exact to
/// tolerance for unimodal ratios).
pub struct PairSpec<T: Real> {
    pub q_density: DynFn<T>,
    pub p_density: DynFn<T>,
    pub p_cdf: DynFn<T>,
    /// Must be total on [0, 1], mapping the endpoints to the support edges.
    pub p_quantile: DynFn<T>,
    /// Analytic target CDF, if available. Without it, standardization backs
    /// the target CDF with a precomputed cumulative quadrature table.
    pub q_cdf: Option<DynFn<T>>,
    /// Window carrying (numerically) all the mass of both measures.
    pub support: (T, T),
    pub ratio_mode: Option<T>,
}

/// A proposal/target pair with p >> q and unimodal ratio.
pub struct TargetProposalPair<T: Real> {
    q_density: DynFn<T>,
    p_density: DynFn<T>,
    p_cdf: DynFn<T>,
    p_quantile: DynFn<T>,
    q_cdf: Option<DynFn<T>>,
    support: (T, T),
    ratio_mode: T,
    r_max: T,
}

impl<T: Real> TargetProposalPair<T> {
    pub fn new(spec: PairSpec<T>) -> Result<Self, Error<T>> {
        let (lo, hi) = spec.support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param("support", "must be a finite interval"));
        }
        let tol = real::<T>(1e-8);
        let p_total = adaptive_simpson(|x| (spec.p_density)(x), lo, hi, tol)?;
        if (p_total - T::one()).abs() > real(CHECK_TOL) {
            return Err(Error::param(
                "p_density",
                format!("does not integrate to 1 over the support (got {p_total})"),
            ));
        }
        let q_total = adaptive_simpson(|x| (spec.q_density)(x), lo, hi, tol)?;
        if (q_total - T::one()).abs() > real(CHECK_TOL) {
            return Err(Error::param(
                "q_density",
                format!("does not integrate to 1 over the support (got {q_total})"),
            ));
        }

        // Absolute continuity spot check on an even grid.
        for i in 0..GRID_CHECK_POINTS {
            let x = lo + (hi - lo) * real::<T>((i as f64 + 0.5) / GRID_CHECK_POINTS as f64);
            if (spec.p_density)(x) == T::zero() && (spec.q_density)(x) > T::zero() {
                return Err(Error::AbsoluteContinuity { x });
            }
        }

        let safe_ratio = {
            let q = Arc::clone(&spec.q_density);
            let p = Arc::clone(&spec.p_density);
            move |x: T| -> T {
                let px = p(x);
                let qx = q(x);
                if px > T::zero() {
                    qx / px
                } else if qx > T::zero() {
                    T::infinity()
                } else {
                    T::zero()
                }
            }
        };

        let ratio_mode = match spec.ratio_mode {
            Some(m) => m,
            None => golden_max(&safe_ratio, lo, hi, real(1e-10)).0,
        };
        let r_max = safe_ratio(ratio_mode);
        if !r_max.is_finite() {
            return Err(Error::InfiniteDivergence);
        }
        if r_max < T::one() - real(1e-9) {
            return Err(Error::param(
                "ratio_mode",
                format!("ratio at the declared mode is {r_max} < 1; not a maximizer"),
            ));
        }

        Ok(TargetProposalPair {
            q_density: spec.q_density,
            p_density: spec.p_density,
            p_cdf: spec.p_cdf,
            p_quantile: spec.p_quantile,
            q_cdf: spec.q_cdf,
            support: spec.support,
            ratio_mode,
            r_max,
        })
    }

    pub fn ratio_mode(&self) -> T {
        self.ratio_mode
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn support(&self) -> (T, T) {
        self.support
    }

    /// The Radon-Nikodym derivative q(x)/p(x).
    pub fn ratio(&self, x: T) -> Result<T, Error<T>> {
        let px = (self.p_density)(x);
        let qx = (self.q_density)(x);
        if px > T::zero() {
            Ok(qx / px)
        } else if qx > T::zero() {
            Err(Error::AbsoluteContinuity { x })
        } else {
            Ok(T::zero())
        }
    }

    /// Renyi infinity-divergence log r_max, validated against the grid
    /// supremum of the ratio.
    pub fn renyi_inf(&self) -> Result<T, Error<T>> {
        let mut sup = T::zero();
        for i in 0..=GRID_CHECK_POINTS {
            let u = real::<T>((i as f64 + 0.5) / (GRID_CHECK_POINTS as f64 + 1.0));
            let x = (self.p_quantile)(u);
            let r = self.ratio(x)?;
            if !r.is_finite() {
                return Err(Error::InfiniteDivergence);
            }
            sup = sup.max(r);
        }
        sup = sup.max(self.ratio(self.ratio_mode)?);
        if !sup.is_finite() {
            return Err(Error::InfiniteDivergence);
        }
        if (sup.ln() - self.r_max.ln()).abs() > real(CHECK_TOL) {
            return Err(Error::param(
                "r_max",
                format!(
                    "declared maximum {} disagrees with grid supremum {sup}",
                    self.r_max
                ),
            ));
        }
        Ok(self.r_max.ln())
    }

    /// Push both measures through the proposal CDF, making the proposal
    /// uniform on [0, 1] while preserving the ratio's shape and maximum.
    pub fn standardize(&self) -> Result<StandardizedTarget<T>, Error<T>> {
        // Phi must be strictly increasing on the support for the pushforward
        // to be invertible; check the round trip on a grid.
        for i in 1..64 {
            let u = real::<T>(i as f64 / 64.0);
            let x = (self.p_quantile)(u);
            let back = (self.p_cdf)(x);
            if (back - u).abs() > real(1e-8) {
                return Err(Error::Standardization(format!(
                    "proposal CDF round trip failed at u = {u} (got {back})"
                )));
            }
        }

        let quantile = Arc::clone(&self.p_quantile);
        let q_density = Arc::clone(&self.q_density);
        let p_density = Arc::clone(&self.p_density);
        let ratio: DynFn<T> = Arc::new(move |z: T| {
            let x = quantile(z.max(T::zero()).min(T::one()));
            let px = p_density(x);
            let qx = q_density(x);
            if px > T::zero() {
                qx / px
            } else if qx > T::zero() {
                T::infinity()
            } else {
                T::zero()
            }
        });

        let q_cdf: DynFn<T> = match &self.q_cdf {
            Some(qc) => {
                let qc = Arc::clone(qc);
                let quantile = Arc::clone(&self.p_quantile);
                Arc::new(move |z: T| qc(quantile(z.max(T::zero()).min(T::one()))))
            }
            None => cumulative_table(&ratio)?,
        };

        let mode = (self.p_cdf)(self.ratio_mode);
        StandardizedTarget::from_parts(
            Repr::General { ratio, q_cdf },
            mode,
            self.r_max,
            "standardized",
        )
    }
}

/// Precomputed cumulative quadrature of a [0,1] density, for pairs without an
/// analytic target CDF.
fn cumulative_table<T: Real>(density: &DynFn<T>) -> Result<DynFn<T>, Error<T>> {
    const PANELS: usize = 8192;
    let mut cum = Vec::with_capacity(PANELS + 1);
    cum.push(T::zero());
    let h = T::one() / real::<T>(PANELS as f64);
    let six = real::<T>(6.0);
    let mut acc = T::zero();
    let mut f_lo = density(T::zero());
    for i in 0..PANELS {
        let a = real::<T>(i as f64) * h;
        let b = a + h;
        let m = a + h / real(2.0);
        let f_hi = density(b);
        acc = acc + h * (f_lo + real::<T>(4.0) * density(m) + f_hi) / six;
        cum.push(acc);
        f_lo = f_hi;
    }
    let total = acc;
    if (total - T::one()).abs() > real(CHECK_TOL) {
        return Err(Error::param(
            "ratio",
            format!("standardized ratio integrates to {total}, expected 1"),
        ));
    }
    let cum: Arc<[T]> = cum.into();
    Ok(Arc::new(move |z: T| {
        let z = z.max(T::zero()).min(T::one());
        let pos = z * real::<T>(PANELS as f64);
        let idx = pos.to_usize().unwrap_or(0).min(PANELS - 1);
        let frac = pos - real::<T>(idx as f64);
        let v = cum[idx] + (cum[idx + 1] - cum[idx]) * frac;
        (v / total).min(T::one())
    }))
}

/// A single constant piece of a staircase ratio on `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step<T> {
    pub lo: T,
    pub hi: T,
    pub level: T,
}

#[derive(Clone)]
pub(crate) enum Repr<T: Real> {
    General {
        ratio: DynFn<T>,
        q_cdf: DynFn<T>,
    },
    WorstCase {
        gamma_tilde: T,
    },
    Staircase {
        steps: Arc<[Step<T>]>,
        cum: Arc<[T]>,
    },
}

/// A target on [0, 1] with uniform proposal: the density ratio r (which is
/// also the target density), its mode, its maximum and the target CDF.
#[derive(Clone)]
pub struct StandardizedTarget<T: Real> {
    repr: Repr<T>,
    mode: T,
    r_max: T,
    label: &'static str,
}

impl<T: Real> StandardizedTarget<T> {
    pub(crate) fn from_parts(
        repr: Repr<T>,
        mode: T,
        r_max: T,
        label: &'static str,
    ) -> Result<Self, Error<T>> {
        if !(mode >= T::zero() && mode <= T::one()) {
            return Err(Error::param(
                "mode",
                format!("must lie in [0, 1], got {mode}"),
            ));
        }
        if !(r_max.is_finite() && r_max >= T::one() - real(1e-9)) {
            return Err(Error::param(
                "r_max",
                format!("must be finite and >= 1, got {r_max}"),
            ));
        }
        Ok(StandardizedTarget {
            repr,
            mode,
            r_max,
            label,
        })
    }

    /// Density ratio r(x) = dQ'/dP'(x) on [0, 1].
    pub fn ratio(&self, x: T) -> T {
        match &self.repr {
            Repr::General { ratio, .. } => ratio(x),
            Repr::WorstCase { gamma_tilde } => {
                // r_max * min(1, gamma_tilde / sqrt(x)); the x = 0 endpoint
                // resolves to the plateau value through the min.
                self.r_max * T::one().min(*gamma_tilde / x.sqrt())
            }
            Repr::Staircase { steps, .. } => {
                for (i, s) in steps.iter().enumerate() {
                    if x < s.hi || i == steps.len() - 1 {
                        return s.level;
                    }
                }
                unreachable!("staircase covers [0, 1]")
            }
        }
    }

    /// Target CDF Q'([0, x]).
    pub fn q_cdf(&self, x: T) -> T {
        let x = x.max(T::zero()).min(T::one());
        match &self.repr {
            Repr::General { q_cdf, .. } => q_cdf(x),
            Repr::WorstCase { gamma_tilde } => {
                let g = *gamma_tilde;
                if x <= g * g {
                    self.r_max * x
                } else {
                    self.r_max * g * (real::<T>(2.0) * x.sqrt() - g)
                }
            }
            Repr::Staircase { steps, cum } => {
                for (i, s) in steps.iter().enumerate() {
                    if x < s.hi || i == steps.len() - 1 {
                        return cum[i] + s.level * (x - s.lo);
                    }
                }
                unreachable!("staircase covers [0, 1]")
            }
        }
    }

    /// A maximizer of the ratio (plateau midpoint for staircase targets).
    pub fn mode(&self) -> T {
        self.mode
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    /// log r_max, the Renyi infinity-divergence of the standardized pair.
    pub fn renyi_inf(&self) -> T {
        self.r_max.ln()
    }

    pub fn label(&self) -> &'static str {
        self.label
    }

    /// Replace the stored mode, validating that the replacement actually
    /// attains the maximum.
    pub fn with_mode(mut self, mode: T) -> Result<Self, Error<T>> {
        if !(mode >= T::zero() && mode <= T::one()) {
            return Err(Error::param("mode", "must lie in [0, 1]"));
        }
        let r = self.ratio(mode);
        if (r - self.r_max).abs() > real::<T>(1e-9) * self.r_max {
            return Err(Error::param(
                "mode",
                format!("ratio at {mode} is {r}, not the maximum {}", self.r_max),
            ));
        }
        self.mode = mode;
        Ok(self)
    }

    /// Superlevel interval in closed form, for representations that have one.
    pub fn closed_superlevel(&self, gamma: T) -> Option<(T, T)> {
        match &self.repr {
            Repr::General { .. } => None,
            Repr::WorstCase { gamma_tilde } => {
                if gamma <= *gamma_tilde {
                    Some((T::zero(), T::one()))
                } else {
                    let half = *gamma_tilde / gamma;
                    Some((T::zero(), half * half))
                }
            }
            Repr::Staircase { steps, .. } => {
                let thresh = gamma * self.r_max;
                let mut lo = None;
                let mut hi = None;
                for s in steps.iter() {
                    if s.level >= thresh {
                        if lo.is_none() {
                            lo = Some(s.lo);
                        }
                        hi = Some(s.hi);
                    }
                }
                Some((lo.unwrap_or(self.mode), hi.unwrap_or(self.mode)))
            }
        }
    }

    /// Staircase steps, when this target is piecewise constant.
    pub fn steps(&self) -> Option<&[Step<T>]> {
        match &self.repr {
            Repr::Staircase { steps, .. } => Some(steps),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{normal_cdf, normal_quantile};

    fn uniform_pair(q: DynFn<f64>, q_cdf: Option<DynFn<f64>>) -> PairSpec<f64> {
        PairSpec {
            q_density: q,
            p_density: Arc::new(|_| 1.0),
            p_cdf: Arc::new(|x: f64| x.clamp(0.0, 1.0)),
            p_quantile: Arc::new(|u| u),
            q_cdf,
            support: (0.0, 1.0),
            ratio_mode: None,
        }
    }

    #[test]
    fn identical_measures_have_unit_ratio_and_zero_divergence() {
        let pair = TargetProposalPair::new(uniform_pair(Arc::new(|_| 1.0), None)).unwrap();
        for x in [0.0, 0.31, 0.77, 1.0] {
            assert_eq!(pair.ratio(x).unwrap(), 1.0);
        }
        assert!(pair.renyi_inf().unwrap().abs() < 1e-9);
    }

    #[test]
    fn triangle_ratio_against_uniform() {
        // q(x) = 2(1-x): boundary mode at 0, r_max = 2, divergence log 2.
        let pair = TargetProposalPair::new(uniform_pair(Arc::new(|x: f64| 2.0 * (1.0 - x)), None))
            .unwrap();
        assert!((pair.ratio(0.0).unwrap() - 2.0).abs() < 1e-9);
        assert!(pair.ratio_mode() < 1e-8);
        assert!((pair.renyi_inf().unwrap() - 2.0f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn absolute_continuity_violation_is_reported() {
        // Target keeps mass on [0, 1] but proposal lives on [0, 1/2].
        let spec = PairSpec {
            q_density: Arc::new(|_| 1.0),
            p_density: Arc::new(|x: f64| if x <= 0.5 { 2.0 } else { 0.0 }),
            p_cdf: Arc::new(|x: f64| (2.0 * x).clamp(0.0, 1.0)),
            p_quantile: Arc::new(|u: f64| u / 2.0),
            q_cdf: None,
            support: (0.0, 1.0),
            ratio_mode: None,
        };
        let err = TargetProposalPair::new(spec)
            .err()
            .expect("construction must fail");
        match err {
            Error::AbsoluteContinuity { .. } => {}
            other => panic!("expected absolute continuity error, got {other:?}"),
        }
    }

    #[test]
    fn standardize_of_uniform_proposal_is_identity() {
        let q: DynFn<f64> = Arc::new(|x: f64| 2.0 * (1.0 - x));
        let qc: DynFn<f64> = Arc::new(|x: f64| 2.0 * x - x * x);
        let pair = TargetProposalPair::new(uniform_pair(q, Some(qc))).unwrap();
        let std = pair.standardize().unwrap();
        for i in 0..=50 {
            let z = i as f64 / 50.0;
            assert!((std.ratio(z) - 2.0 * (1.0 - z)).abs() < 1e-9);
            assert!((std.q_cdf(z) - (2.0 * z - z * z)).abs() < 1e-9);
        }
        assert!(std.mode() < 1e-8);
    }

    #[test]
    fn standardize_gaussian_proposal_preserves_divergence_and_mass() {
        // Proposal N(0,1), target N(0.5, 0.8^2): ratio is a Gaussian bump.
        let sd = 0.8;
        let spec = PairSpec {
            q_density: Arc::new(move |x: f64| {
                let z = (x - 0.5) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }),
            p_density: Arc::new(|x: f64| {
                (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }),
            p_cdf: Arc::new(|x: f64| normal_cdf(x)),
            p_quantile: Arc::new(|u: f64| normal_quantile(u.clamp(1e-15, 1.0 - 1e-15)).unwrap()),
            q_cdf: Some(Arc::new(move |x: f64| normal_cdf((x - 0.5) / sd))),
            support: (-9.0, 9.0),
            ratio_mode: None,
        };
        let pair = TargetProposalPair::new(spec).unwrap();
        let d_inf = pair.renyi_inf().unwrap();
        let std = pair.standardize().unwrap();

        // Grid supremum of the standardized ratio matches the original.
        let mut sup = 0.0f64;
        for i in 0..=20_000 {
            let z = (i as f64 + 0.5) / 20_002.0;
            sup = sup.max(std.ratio(z));
        }
        assert!((sup.ln() - d_inf).abs() < 1e-6, "{} vs {d_inf}", sup.ln());

        // Pushforward preserves total target mass.
        let total = adaptive_simpson(|z| std.ratio(z), 1e-12, 1.0, 1e-9).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "got {total}");
    }

    #[test]
    fn standardize_without_q_cdf_builds_consistent_table() {
        let q: DynFn<f64> = Arc::new(|x: f64| 2.0 * (1.0 - x));
        let pair = TargetProposalPair::new(uniform_pair(q, None)).unwrap();
        let std = pair.standardize().unwrap();
        for i in 0..=100 {
            let z = i as f64 / 100.0;
            assert!((std.q_cdf(z) - (2.0 * z - z * z)).abs() < 1e-6);
        }
    }

    #[test]
    fn non_invertible_proposal_cdf_fails_standardization() {
        // p_cdf inconsistent with p_quantile breaks the round trip.
        let spec = PairSpec {
            q_density: Arc::new(|_| 1.0),
            p_density: Arc::new(|_| 1.0),
            p_cdf: Arc::new(|_| 0.5),
            p_quantile: Arc::new(|u| u),
            q_cdf: None,
            support: (0.0, 1.0),
            ratio_mode: Some(0.5),
        };
        let pair = TargetProposalPair::new(spec).unwrap();
        match pair.standardize() {
            Err(Error::Standardization(_)) => {}
            other => panic!(
                "expected standardization error, got {:?}",
                other.map(|_| ())
            ),
        }
    }

    #[test]
    fn mode_override_requires_a_maximizer() {
        let q: DynFn<f64> = Arc::new(|x: f64| 2.0 * (1.0 - x));
        let qc: DynFn<f64> = Arc::new(|x: f64| 2.0 * x - x * x);
        let pair = TargetProposalPair::new(uniform_pair(q, Some(qc))).unwrap();
        let std = pair.standardize().unwrap();
        assert!(std.clone().with_mode(0.5).is_err());
        assert!(std.with_mode(0.0).is_ok());
    }
}
