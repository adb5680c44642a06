//! Exact sampling for one-dimensional targets with a unimodal density ratio.
//!
//! Given a proposal P and a target Q with unimodal ratio r = dQ/dP bounded by
//! `r_max`, global-bound A* search over a decreasing truncated-Gumbel chain
//! draws exact samples from Q using `O(log r_max)` expected ratio
//! evaluations. The crate provides:
//!
//! * [`gumbel`]: truncated-Gumbel sampling (two independent constructions)
//!   and the truncated-Gumbel CDF;
//! * [`measures`] / [`families`]: target models, the pushforward that makes
//!   the proposal uniform, and built-in families including the worst-case
//!   density `r_max * min(1, gamma_tilde * x^{-1/2})`;
//! * [`sampler`]: the sampling loop with full per-run instrumentation;
//! * [`width`]: superlevel-set widths and the bound functionals;
//! * [`harness`] / [`report`]: Monte Carlo experiments that estimate every
//!   quantity in the runtime-bound chain and compare it against its proved
//!   bound, with CSV/JSON emission.
//!
//! The numerical core is generic over the scalar type via [`numeric::Real`]
//! (`f32` or `f64`); the harness and the aliases below fix `f64`.
//!
//! ```
//! use astar_sampling::families::worst_case_family;
//! use astar_sampling::rng::SplitMix64Stream;
//! use astar_sampling::sampler::{default_max_steps, run};
//! use astar_sampling::width::width_integral;
//!
//! let target = worst_case_family(8.0f64).unwrap();
//! let mut rng = SplitMix64Stream::from_seed(7);
//! let trace = run(&target, &[0.5], &mut rng, default_max_steps(8.0)).unwrap();
//! assert!((0.0..=1.0).contains(&trace.sample));
//! assert!(trace.steps >= 1);
//! assert!((width_integral(&target).unwrap() - 1.0 / 8.0).abs() < 1e-9);
//! ```

pub mod error;
pub mod families;
pub mod gumbel;
pub mod harness;
pub mod measures;
pub mod numeric;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod width;

pub use error::Error;
pub use families::Family;
pub use numeric::Real;
pub use rng::{RandomStream, SplitMix64Stream};

/// Scalar type used by the harness and the CLI.
pub type Scalar = f64;
/// Standardized target at the default scalar.
pub type Target = measures::StandardizedTarget<Scalar>;
/// Target/proposal pair at the default scalar.
pub type Pair = measures::TargetProposalPair<Scalar>;
/// Run trace at the default scalar.
pub type Trace = sampler::RunTrace<Scalar>;
/// Width function at the default scalar.
pub type Width = width::WidthFunction<Scalar>;
