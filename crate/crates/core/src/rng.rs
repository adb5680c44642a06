//! Seeded, splittable random streams.
//!
//! Every experiment in this crate is reproducible from a single root seed:
//! replica `i` draws from `root.split(i)`, and splitting depends only on the
//! stream's identity, never on how much of it has been consumed. This is what
//! makes the harness's output independent of the worker count.

use crate::numeric::{real, Real};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLIT_TAG: u64 = 0x0123_4567_89AB_CDEF;

/// SplitMix64 finalizer: a bijective mixer with full avalanche.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Abstract seeded generator with a splittable contract: `split(i)` yields a
/// stream independent of its parent and of every sibling, as a pure function
/// of the parent's identity and `i`.
pub trait RandomStream {
    fn next_u64(&mut self) -> u64;

    fn split(&self, index: u64) -> Self
    where
        Self: Sized;

    /// Uniform draw in `[0, 1)`.
    fn uniform<T: Real>(&mut self) -> T {
        let x = (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        let u = real::<T>(x);
        // f32 can round a [0,1) double up to 1.0; keep the contract exact.
        if u >= T::one() {
            T::one() - T::epsilon() / real(2.0)
        } else {
            u
        }
    }

    /// Uniform draw in the open interval `(0, 1)`.
    fn open01<T: Real>(&mut self) -> T {
        let x = ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
        let u = real::<T>(x);
        if u >= T::one() {
            T::one() - T::epsilon() / real(2.0)
        } else if u <= T::zero() {
            T::min_positive_value()
        } else {
            u
        }
    }

    /// Uniform draw in `[lo, hi)`.
    fn uniform_in<T: Real>(&mut self, lo: T, hi: T) -> T {
        lo + self.uniform::<T>() * (hi - lo)
    }

    /// Unit-rate exponential draw, strictly positive.
    fn exponential<T: Real>(&mut self) -> T {
        -self.open01::<T>().ln()
    }
}

/// Counter-based SplitMix64 stream.
///
/// The `key` is the stream's identity: the output sequence is
/// `mix(key + n * GOLDEN_GAMMA)` and children are keyed by hashing
/// `(key, index)`, so any two distinct paths through `split` yield
/// decorrelated sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64Stream {
    key: u64,
    state: u64,
}

impl SplitMix64Stream {
    pub fn from_seed(seed: u64) -> Self {
        let key = mix(seed ^ 0x5851_F42D_4C95_7F2D);
        SplitMix64Stream { key, state: key }
    }
}

impl RandomStream for SplitMix64Stream {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    fn split(&self, index: u64) -> Self {
        let child = mix(self.key ^ mix(index.wrapping_add(SPLIT_TAG)));
        SplitMix64Stream {
            key: child,
            state: child,
        }
    }
}
