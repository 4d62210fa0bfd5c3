use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channels::{additive_modq_mac, gilbert_elliott_mac, FeedbackFn, NoiseChain};
use crate::prob::alphabet::decode;
use crate::prob::{sequence_likelihood, Alphabet, CausalKernel};
use crate::random::{random_channel, random_policy_pair, random_useless_channel};

fn b() -> Alphabet {
    Alphabet::binary()
}

/// Direct summation over decoded sequences with plain powers.
fn oracle_e(i: ErrorType, rho: f64, pol: &PolicyPair, ch: &FsMac, s0: usize) -> f64 {
    let n = pol.depth();
    let init: Vec<f64> = (0..ch.states().size())
        .map(|s| if s == s0 { 1.0 } else { 0.0 })
        .collect();
    let (a1, a2, ay) = (ch.x1().size(), ch.x2().size(), ch.y().size());
    let count = |a: usize| a.pow(n as u32);
    let zs =
        |f: &FeedbackFn, y: &[usize]| y[..n - 1].iter().map(|&v| f.apply(v)).collect::<Vec<_>>();
    let p = |x1: &[usize], x2: &[usize], y: &[usize]| sequence_likelihood(ch, &init, x1, x2, y);
    let s = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for yc in 0..count(ay) {
        let y = decode(yc, n, ay);
        let (z1, z2) = (zs(&pol.f1, &y), zs(&pol.f2, &y));
        let q1 = |x: &[usize]| pol.q1.seq_prob(x, &z1);
        let q2 = |x: &[usize]| pol.q2.seq_prob(x, &z2);
        match i {
            ErrorType::One => {
                for c2 in 0..count(a2) {
                    let x2 = decode(c2, n, a2);
                    let inner: f64 = (0..count(a1))
                        .map(|c1| {
                            let x1 = decode(c1, n, a1);
                            q1(&x1) * p(&x1, &x2, &y).powf(s)
                        })
                        .sum();
                    total += q2(&x2) * inner.powf(1.0 + rho);
                }
            }
            ErrorType::Two => {
                for c1 in 0..count(a1) {
                    let x1 = decode(c1, n, a1);
                    let inner: f64 = (0..count(a2))
                        .map(|c2| {
                            let x2 = decode(c2, n, a2);
                            q2(&x2) * p(&x1, &x2, &y).powf(s)
                        })
                        .sum();
                    total += q1(&x1) * inner.powf(1.0 + rho);
                }
            }
            ErrorType::Three => {
                let mut inner = 0.0;
                for c1 in 0..count(a1) {
                    for c2 in 0..count(a2) {
                        let (x1, x2) = (decode(c1, n, a1), decode(c2, n, a2));
                        inner += q1(&x1) * q2(&x2) * p(&x1, &x2, &y).powf(s);
                    }
                }
                total += inner.powf(1.0 + rho);
            }
        }
    }
    -total.log2() / n as f64
}

fn uniform(ch: &FsMac, n: usize) -> PolicyPair {
    PolicyPair::uniform(
        n,
        ch.x1(),
        ch.x2(),
        FeedbackFn::none(ch.y()),
        FeedbackFn::none(ch.y()),
    )
    .unwrap()
}

#[test]
fn zero_at_rho_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ch = random_channel(&mut rng, 2, 2, 2, 2);
    let pol = random_policy_pair(
        &mut rng,
        2,
        b(),
        b(),
        FeedbackFn::perfect(b()),
        FeedbackFn::perfect(b()),
    );
    let law = channel_causal_law(&ch, &InitialState::Given(1), 2).unwrap();
    for i in ErrorType::ALL {
        assert_eq!(gallager_e(i, 0.0, &pol, &law).unwrap(), 0.0);
        assert_eq!(gallager_f(i, 0.0, &pol, &ch).unwrap(), 0.0);
    }
    assert!(gallager_e(ErrorType::One, 1.5, &pol, &law).is_err());
}

#[test]
fn identity_channel_by_hand() {
    // y = x1, uniform x1: sum_y [sum_x1 (1/2) 1{y = x1}]^2 = 2 (1/4) = 1/2
    let ch = FsMac::single_user(Alphabet::unit(), b(), b(), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let law = channel_causal_law(&ch, &InitialState::Given(0), 1).unwrap();
    let e = gallager_e(ErrorType::One, 1.0, &uniform(&ch, 1), &law).unwrap();
    assert!((e - 1.0).abs() < 1e-15);
    // at general rho the same sum is 2 (1/2)^(1+rho)
    for rho in [0.25, 0.5, 0.75] {
        let e = gallager_e(ErrorType::One, rho, &uniform(&ch, 1), &law).unwrap();
        assert!((e - rho).abs() < 1e-14);
    }
}

#[test]
fn useless_channel_has_no_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ch = random_useless_channel(&mut rng, 2, 2, 2, 2);
    let pol = random_policy_pair(
        &mut rng,
        2,
        b(),
        b(),
        FeedbackFn::perfect(b()),
        FeedbackFn::none(b()),
    );
    let law = channel_causal_law(&ch, &InitialState::Given(0), 2).unwrap();
    for i in ErrorType::ALL {
        for rho in [0.1, 0.5, 1.0] {
            assert!(gallager_e(i, rho, &pol, &law).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn log_domain_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let n = rng.gen_range(1..=2);
        let ns = rng.gen_range(1..=2);
        let ch = random_channel(&mut rng, ns, 2, 2, 2);
        let pol = random_policy_pair(
            &mut rng,
            n,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        );
        let s0 = rng.gen_range(0..ns);
        let law = channel_causal_law(&ch, &InitialState::Given(s0), n).unwrap();
        let rho = rng.gen_range(0.01..1.0);
        for i in ErrorType::ALL {
            let e = gallager_e(i, rho, &pol, &law).unwrap();
            assert!((e - oracle_e(i, rho, &pol, &ch, s0)).abs() < 1e-12);
        }
    }
}

/// Single-letter exponent of a binary additive channel with i.i.d. inputs.
fn single_letter(i: ErrorType, rho: f64, p: f64, a: f64, c: f64) -> f64 {
    let q1 = [1.0 - a, a];
    let q2 = [1.0 - c, c];
    let w = |x1: usize, x2: usize, y: usize| if (x1 ^ x2) == y { 1.0 - p } else { p };
    let s = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for y in 0..2 {
        match i {
            ErrorType::One => {
                for x2 in 0..2 {
                    let inner: f64 = (0..2).map(|x1| q1[x1] * w(x1, x2, y).powf(s)).sum();
                    total += q2[x2] * inner.powf(1.0 + rho);
                }
            }
            ErrorType::Two => {
                for x1 in 0..2 {
                    let inner: f64 = (0..2).map(|x2| q2[x2] * w(x1, x2, y).powf(s)).sum();
                    total += q1[x1] * inner.powf(1.0 + rho);
                }
            }
            ErrorType::Three => {
                let inner: f64 = (0..4)
                    .map(|k| q1[k / 2] * q2[k % 2] * w(k / 2, k % 2, y).powf(s))
                    .sum();
                total += inner.powf(1.0 + rho);
            }
        }
    }
    -total.log2()
}

#[test]
fn product_inputs_on_memoryless_channel_single_letterize() {
    let p = 0.1;
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(p).unwrap()).unwrap();
    let (a, c) = (0.3, 0.6);
    let n = 6;
    let q1 = CausalKernel::iid(User::One, n, b(), Alphabet::unit(), &[1.0 - a, a]).unwrap();
    let q2 = CausalKernel::iid(User::Two, n, b(), Alphabet::unit(), &[1.0 - c, c]).unwrap();
    let pol = PolicyPair::new(q1, q2, FeedbackFn::none(b()), FeedbackFn::none(b())).unwrap();
    let law = channel_causal_law(&ch, &InitialState::Given(0), n).unwrap();
    for i in ErrorType::ALL {
        for rho in [0.05, 0.4, 1.0] {
            let e = gallager_e(i, rho, &pol, &law).unwrap();
            assert!((e - single_letter(i, rho, p, a, c)).abs() < 1e-12);
        }
    }
}

#[test]
fn f_examples() {
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.2).unwrap()).unwrap();
    let pol = uniform(&ch, 2);
    let law = channel_causal_law(&ch, &InitialState::Given(0), 2).unwrap();
    for i in ErrorType::ALL {
        assert_eq!(
            gallager_f(i, 0.7, &pol, &ch).unwrap(),
            gallager_e(i, 0.7, &pol, &law).unwrap()
        );
    }
    // both states look alike when the noise does not depend on the state
    let ge = gilbert_elliott_mac(0.2, 0.4, 0.1, 0.1).unwrap();
    let pol = uniform(&ge, 2);
    let laws = StateLaws::new(&ge, 2).unwrap();
    for i in ErrorType::ALL {
        let e = laws.e_per_state(i, 0.6, &pol).unwrap();
        assert!((e[0] - e[1]).abs() < 1e-13);
        assert!((laws.f(i, 0.6, &pol).unwrap() - (e[0] - 0.6 / 2.0)).abs() < 1e-13);
    }
}

#[test]
fn error_bound_examples() {
    assert_eq!(error_bound(8, 0.0, 0.5, 0.25, 1), 2f64.powi(-2));
    assert_eq!(error_bound(8, 0.5, 0.5, 0.25, 2), 2.0);
    // best rho on the 0.05 grid beats 1 for a rate well inside the region
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.1).unwrap()).unwrap();
    let n = 8;
    let pol = uniform(&ch, n);
    let laws = StateLaws::new(&ch, n).unwrap();
    let curve = exponent_curve(ErrorType::Three, &pol, &laws, &RhoGrid::default()).unwrap();
    let best = curve
        .rho
        .iter()
        .zip(&curve.f)
        .map(|(&rho, &f)| error_bound(n, 0.25, rho, f, 1))
        .fold(f64::INFINITY, f64::min);
    let oracle = curve
        .rho
        .iter()
        .map(|&rho| {
            (-(n as f64) * (single_letter(ErrorType::Three, rho, 0.1, 0.5, 0.5) - rho * 0.25))
                .exp2()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1.0);
    assert!((best - oracle).abs() <= 1e-12 * oracle.max(1e-300) + 1e-15);
}

#[test]
fn achievability_examples() {
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.0).unwrap()).unwrap();
    let pol = uniform(&ch, 1);
    let grid = RhoGrid::default();
    let zero = exponent_achievability(0.0, 0.0, &pol, &ch, &grid).unwrap();
    assert!(zero.achievable);
    let over = exponent_achievability(0.6, 0.6, &pol, &ch, &grid).unwrap();
    assert!(!over.achievable);
    let inside = exponent_achievability(0.4, 0.4, &pol, &ch, &grid).unwrap();
    assert!(inside.achievable && inside.rho_star > 0.0);
    assert!(inside.margins.iter().all(|&m| m > 0.0));
    assert!(exponent_achievability(-0.1, 0.0, &pol, &ch, &grid).is_err());
}

#[test]
fn exponent_shape_examples() {
    let fine = RhoGrid::uniform(50);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let useless = random_useless_channel(&mut rng, 2, 2, 2, 2);
    let rep = exponent_shape(ErrorType::Three, &uniform(&useless, 2), &useless, &fine).unwrap();
    assert!(rep.slope_at_zero.iter().all(|s| s.abs() < 1e-9));
    assert!(rep.directed_info.iter().all(|d| d.abs() < 1e-12));

    let id = FsMac::single_user(Alphabet::unit(), b(), b(), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let rep = exponent_shape(ErrorType::One, &uniform(&id, 1), &id, &fine).unwrap();
    assert!(
        (rep.slope_at_zero[0] - 1.0).abs() < 1e-4 && (rep.directed_info[0] - 1.0).abs() < 1e-15
    );

    for _ in 0..5 {
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let pol = random_policy_pair(
            &mut rng,
            2,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        );
        for i in ErrorType::ALL {
            let rep = exponent_shape(i, &pol, &ch, &fine).unwrap();
            assert!(rep.e_at_zero.iter().all(|&e| e < 1e-12));
            assert!(rep.max_slope_error < 1e-4, "{rep:?}");
            assert!(rep.monotone && rep.slope_bounded, "{rep:?}");
        }
    }
}

#[test]
fn concatenation_never_lowers_f() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..8 {
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let pol = random_policy_pair(
            &mut rng,
            1,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::none(b()),
        );
        for i in ErrorType::ALL {
            for rho in [0.3, 1.0] {
                let f1 = gallager_f(i, rho, &pol, &ch).unwrap();
                for k in [2, 3] {
                    let fk = gallager_f(i, rho, &pol.repeat(k).unwrap(), &ch).unwrap();
                    assert!(fk >= f1 - 1e-10, "{i:?} {rho} K={k}: {fk} < {f1}");
                }
            }
        }
    }
}

#[test]
fn supadditivity_margins() {
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.15).unwrap()).unwrap();
    let pol = uniform(&ch, 1);
    for i in ErrorType::ALL {
        assert!(
            f_supadditivity_check(i, &pol, &pol, &ch, 0.5)
                .unwrap()
                .abs()
                < 1e-12
        );
        assert_eq!(f_supadditivity_check(i, &pol, &pol, &ch, 0.0).unwrap(), 0.0);
    }
    let ge = gilbert_elliott_mac(0.1, 0.3, 0.01, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let a = random_policy_pair(
            &mut rng,
            1,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        );
        let c = random_policy_pair(
            &mut rng,
            1,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        );
        for i in ErrorType::ALL {
            assert!(f_supadditivity_check(i, &a, &c, &ge, 0.8).unwrap() >= -1e-10);
        }
    }
}

#[test]
fn curve_csv_layout() {
    let ge = gilbert_elliott_mac(0.2, 0.4, 0.05, 0.3).unwrap();
    let laws = StateLaws::new(&ge, 1).unwrap();
    let c = exponent_curve(
        ErrorType::Two,
        &uniform(&ge, 1),
        &laws,
        &RhoGrid::uniform(4),
    )
    .unwrap();
    let csv = c.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rho,E_s0,E_s1,F"));
    assert_eq!(lines.next(), Some("0,0,0,0"));
    assert_eq!(csv.lines().count(), 6);
    assert!(RhoGrid::refine_around(0.02).0.first() == Some(&0.0));
}
