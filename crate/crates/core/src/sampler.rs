//! Global-bound A* sampling on a standardized target.
//!
//! Each step proposes uniformly in the current search interval, draws the
//! next value of a decreasing truncated-Gumbel chain, scores the proposal as
//! `log r(X) + G`, and shrinks the interval toward the ratio's mode on the
//! proposal's side. The run terminates once the global upper bound
//! `log r_max + G_n` no longer exceeds the incumbent score, at which point
//! the incumbent is an exact sample from the target.

use rayon::prelude::*;

use crate::error::Error;
use crate::gumbel::{sample_tg_exp, TruncatedGumbelParams, Truncation};
use crate::measures::StandardizedTarget;
use crate::numeric::{real, Real};
use crate::rng::{RandomStream, SplitMix64Stream};
use crate::stats::ks_statistic;

/// Current search interval; the mode is never excluded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsState<T> {
    pub left: T,
    pub right: T,
    /// Number of completed steps.
    pub step: u32,
}

impl<T: Real> BoundsState<T> {
    pub fn initial() -> Self {
        BoundsState {
            left: T::zero(),
            right: T::one(),
            step: 0,
        }
    }

    /// Proposal mass of the interval (the proposal is uniform).
    pub fn mass(&self) -> T {
        self.right - self.left
    }
}

/// Gumbel chain state with the incumbent lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainState<T> {
    /// Most recent Gumbel value; `+inf` before the first draw.
    pub gumbel: T,
    /// Incumbent score `max_k log r(X_k) + G_k`.
    pub lower: T,
    /// Global bound `log r_max + G_n`.
    pub upper: T,
    /// Location and score of the incumbent, once one exists.
    pub incumbent: Option<(T, T)>,
}

impl<T: Real> ChainState<T> {
    pub fn initial() -> Self {
        ChainState {
            gumbel: T::infinity(),
            lower: T::neg_infinity(),
            upper: T::infinity(),
            incumbent: None,
        }
    }

    pub fn terminated(&self) -> bool {
        self.upper <= self.lower
    }
}

/// What a single step produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome<T> {
    Advanced(StepRecord<T>),
    /// The interval's mass underflowed to zero; the caller should stop and
    /// flag the trace.
    DegenerateInterval,
}

/// Per-step record: the proposal, its chain value and the interval mass the
/// step started from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord<T> {
    pub x: T,
    pub gumbel: T,
    pub mass: T,
    pub ratio: T,
}

/// Advance the sampler by one step, mutating `bounds` and `chain`.
pub fn step<T: Real, R: RandomStream>(
    target: &StandardizedTarget<T>,
    bounds: &mut BoundsState<T>,
    chain: &mut ChainState<T>,
    rng: &mut R,
) -> Result<StepOutcome<T>, Error<T>> {
    debug_assert!(!chain.terminated(), "step called after termination");
    let mass = bounds.mass();
    if !(mass > T::zero()) {
        return Ok(StepOutcome::DegenerateInterval);
    }
    let x = rng.uniform_in(bounds.left, bounds.right);
    let params = TruncatedGumbelParams::new(mass.ln(), Truncation::from_extended(chain.gumbel))?;
    let g = sample_tg_exp(&params, rng);
    let ratio = target.ratio(x);
    let score = ratio.ln() + g;
    if score > chain.lower {
        chain.lower = score;
        chain.incumbent = Some((x, score));
    }
    chain.gumbel = g;
    chain.upper = target.r_max().ln() + g;
    if x <= target.mode() {
        bounds.left = x;
    } else {
        bounds.right = x;
    }
    bounds.step += 1;
    debug_assert!(bounds.left <= target.mode() && target.mode() <= bounds.right);
    Ok(StepOutcome::Advanced(StepRecord {
        x,
        gumbel: g,
        mass,
        ratio,
    }))
}

/// Full instrumentation of one sampler run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace<T> {
    /// Total number of steps taken.
    pub steps: u32,
    /// The exact sample: the incumbent at termination.
    pub sample: T,
    /// Interval masses Z_1..Z_T (Z_1 = 1, non-increasing).
    pub masses: Vec<T>,
    /// Gumbel chain G_1..G_T (strictly decreasing).
    pub gumbels: Vec<T>,
    /// The gamma grid the hit tables refer to.
    pub gamma_grid: Vec<T>,
    /// First step whose proposal landed in S(gamma), per grid entry; `None`
    /// when the run terminated without hitting.
    pub hits: Vec<Option<u32>>,
    /// Residual steps K(gamma) = max(0, T - N(gamma)); zero when unhit.
    pub residuals: Vec<u32>,
    /// Set when the run ended by interval-mass underflow instead of the
    /// bound test; such traces are excluded from bound statistics.
    pub degenerate: bool,
}

/// Default step budget: an order of magnitude above the proven expectation,
/// so it only trips on misuse (e.g. a non-unimodal user ratio).
pub fn default_max_steps<T: Real>(r_max: T) -> u32 {
    let budget = real::<T>(40.0) * (r_max.ln() + T::one());
    budget
        .ceil()
        .to_u32()
        .unwrap_or(u32::MAX)
        .saturating_add(1000)
}

/// Run the sampler to termination, recording the trace.
///
/// `gamma_grid` must be sorted ascending with entries in (0, 1]. Runs that
/// exceed `max_steps` return [`Error::RunawayRun`] carrying the partial
/// trace.
pub fn run<T: Real, R: RandomStream>(
    target: &StandardizedTarget<T>,
    gamma_grid: &[T],
    rng: &mut R,
    max_steps: u32,
) -> Result<RunTrace<T>, Error<T>> {
    if max_steps == 0 {
        return Err(Error::param("max_steps", "must be at least 1"));
    }
    for pair in gamma_grid.windows(2) {
        if !(pair[0] <= pair[1]) {
            return Err(Error::param("gamma_grid", "must be sorted ascending"));
        }
    }
    if let (Some(first), Some(last)) = (gamma_grid.first(), gamma_grid.last()) {
        if !(*first > T::zero() && *last <= T::one()) {
            return Err(Error::param("gamma_grid", "entries must lie in (0, 1]"));
        }
    }

    let r_max = target.r_max();
    let mut bounds = BoundsState::initial();
    let mut chain = ChainState::initial();
    let mut masses = Vec::new();
    let mut gumbels = Vec::new();
    let mut hits = vec![None; gamma_grid.len()];
    let mut next_unhit = 0usize;
    let mut degenerate = false;

    loop {
        match step(target, &mut bounds, &mut chain, rng)? {
            StepOutcome::DegenerateInterval => {
                degenerate = true;
                break;
            }
            StepOutcome::Advanced(rec) => {
                masses.push(rec.mass);
                gumbels.push(rec.gumbel);
                while next_unhit < gamma_grid.len() && rec.ratio >= gamma_grid[next_unhit] * r_max {
                    hits[next_unhit] = Some(bounds.step);
                    next_unhit += 1;
                }
            }
        }
        if chain.terminated() {
            break;
        }
        if bounds.step >= max_steps {
            let steps = bounds.step;
            let sample = chain
                .incumbent
                .map(|(x, _)| x)
                .unwrap_or_else(|| target.mode());
            let residuals = residuals_from(&hits, steps);
            return Err(Error::RunawayRun {
                max_steps,
                trace: Box::new(RunTrace {
                    steps,
                    sample,
                    masses,
                    gumbels,
                    gamma_grid: gamma_grid.to_vec(),
                    hits,
                    residuals,
                    degenerate: false,
                }),
            });
        }
    }

    let steps = bounds.step;
    let sample = chain
        .incumbent
        .map(|(x, _)| x)
        .unwrap_or_else(|| target.mode());
    let residuals = residuals_from(&hits, steps);
    Ok(RunTrace {
        steps,
        sample,
        masses,
        gumbels,
        gamma_grid: gamma_grid.to_vec(),
        hits,
        residuals,
        degenerate,
    })
}

fn residuals_from(hits: &[Option<u32>], total: u32) -> Vec<u32> {
    hits.iter()
        .map(|h| h.map(|n| total.saturating_sub(n)).unwrap_or(0))
        .collect()
}

/// Empirical exactness check: KS distance between `n_samples` independent
/// sampler outputs and the analytic target CDF.
pub fn exactness_check<T: Real>(
    target: &StandardizedTarget<T>,
    n_samples: u64,
    rng: &SplitMix64Stream,
) -> Result<T, Error<T>> {
    let max_steps = default_max_steps(target.r_max());
    let mut samples: Vec<T> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.split(i);
            run(target, &[], &mut stream, max_steps).map(|trace| trace.sample)
        })
        .collect::<Result<_, _>>()?;
    Ok(ks_statistic(&mut samples, |x| target.q_cdf(x)))
}
