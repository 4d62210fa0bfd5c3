//! Seeded random instances for property checks and verification suites.

use rand::Rng;

use crate::channels::{FeedbackFn, FsMac};
use crate::prob::{Alphabet, CausalKernel, PolicyPair, User};

/// A random pmf of length `len`; roughly one entry in five is forced to zero
/// so deterministic corners get exercised.
pub fn random_pmf(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    loop {
        let mut p: Vec<f64> = (0..len)
            .map(|_| {
                if len > 1 && rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        let s: f64 = p.iter().sum();
        if s > 1e-3 {
            p.iter_mut().for_each(|v| *v /= s);
            return p;
        }
    }
}

fn alphabet(size: usize) -> Alphabet {
    Alphabet::new(size).expect("positive size")
}

/// A random finite-state MAC with the given alphabet sizes.
pub fn random_channel(rng: &mut impl Rng, states: usize, x1: usize, x2: usize, y: usize) -> FsMac {
    FsMac::from_fn(
        alphabet(states),
        alphabet(x1),
        alphabet(x2),
        alphabet(y),
        |_, _, _| random_pmf(rng, y * states),
    )
    .expect("random rows are normalized")
}

/// A random channel whose output and state ignore the inputs:
/// `P(y, s' | x1, x2, s) = P(y, s' | s)`.
pub fn random_useless_channel(
    rng: &mut impl Rng,
    states: usize,
    x1: usize,
    x2: usize,
    y: usize,
) -> FsMac {
    let rows: Vec<Vec<f64>> = (0..states).map(|_| random_pmf(rng, y * states)).collect();
    FsMac::from_fn(
        alphabet(states),
        alphabet(x1),
        alphabet(x2),
        alphabet(y),
        |_, _, s| rows[s].clone(),
    )
    .expect("random rows are normalized")
}

/// A random causal kernel whose rows depend on the full input and feedback
/// histories.
pub fn random_kernel(
    rng: &mut impl Rng,
    user: User,
    depth: usize,
    input: Alphabet,
    feedback: Alphabet,
) -> CausalKernel {
    CausalKernel::from_fn(user, depth, input, feedback, |_, _, _| {
        random_pmf(rng, input.size())
    })
    .expect("random rows are normalized")
}

/// A random feedback-driven policy pair for a channel with output alphabet `y`.
pub fn random_policy_pair(
    rng: &mut impl Rng,
    depth: usize,
    x1: Alphabet,
    x2: Alphabet,
    f1: FeedbackFn,
    f2: FeedbackFn,
) -> PolicyPair {
    let q1 = random_kernel(rng, User::One, depth, x1, f1.range());
    let q2 = random_kernel(rng, User::Two, depth, x2, f2.range());
    PolicyPair::new(q1, q2, f1, f2).expect("consistent by construction")
}
