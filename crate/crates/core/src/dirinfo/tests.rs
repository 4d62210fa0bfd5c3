use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channels::{
    additive_modq_mac, gilbert_elliott_mac, limited_isi_to_fsmac, mux_p2p_compose, FeedbackFn,
    LimitedIsiSpec, MuxTable, NoiseChain,
};
use crate::dirinfo::fast::{FastEval, LawTerms};
use crate::prob::alphabet::decode;
use crate::prob::pmf::binary_entropy;
use crate::prob::{Alphabet, CausalKernel, Dims};
use crate::random::{random_channel, random_policy_pair, random_useless_channel};

fn b() -> Alphabet {
    Alphabet::binary()
}

fn uniform_joint(ch: &FsMac, n: usize, init: InitialState) -> JointLaw {
    let law = channel_causal_law(ch, &init, n).unwrap();
    let pol = PolicyPair::uniform(
        n,
        ch.x1(),
        ch.x2(),
        FeedbackFn::none(ch.y()),
        FeedbackFn::none(ch.y()),
    )
    .unwrap();
    joint_law(&pol, &law).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (FsMac, PolicyPair) {
    let ns = rng.gen_range(1..=2);
    let ch = random_channel(rng, ns, 2, 2, 2);
    let f = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => FeedbackFn::none(b()),
        _ => FeedbackFn::perfect(b()),
    };
    let (f1, f2) = (f(rng), f(rng));
    let pol = random_policy_pair(rng, n, b(), b(), f1, f2);
    (ch, pol)
}

/// Brute-force `sum_i I(A^i; Y_i | C^i, Y^{i-1})` straight from the
/// definition, over decoded tuples.
fn oracle_di(joint: &JointLaw, a: (bool, bool), c: (bool, bool)) -> f64 {
    let d = *joint.dims();
    let n = d.n;
    let mut total = 0.0;
    for i in 1..=n {
        // key: (a-part, c-part, y^{i-1}, y_i)
        let mut pabcy: HashMap<(Vec<usize>, Vec<usize>, Vec<usize>, usize), f64> = HashMap::new();
        for (cell, &p) in joint.as_slice().iter().enumerate() {
            let y = decode(cell % d.n_y(), n, d.y.size());
            let x2 = decode((cell / d.n_y()) % d.n_x2(), n, d.x2.size());
            let x1 = decode(cell / (d.n_y() * d.n_x2()), n, d.x1.size());
            let pick = |sel: (bool, bool)| {
                let mut v = Vec::new();
                if sel.0 {
                    v.extend_from_slice(&x1[..i]);
                    v.push(99);
                }
                if sel.1 {
                    v.extend_from_slice(&x2[..i]);
                }
                v
            };
            *pabcy
                .entry((pick(a), pick(c), y[..i - 1].to_vec(), y[i - 1]))
                .or_default() += p;
        }
        let mut pac: HashMap<(Vec<usize>, Vec<usize>, Vec<usize>), f64> = HashMap::new();
        let mut pcy: HashMap<(Vec<usize>, Vec<usize>, usize), f64> = HashMap::new();
        let mut pc: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
        for ((a, c, yp, yi), &p) in &pabcy {
            *pac.entry((a.clone(), c.clone(), yp.clone())).or_default() += p;
            *pcy.entry((c.clone(), yp.clone(), *yi)).or_default() += p;
            *pc.entry((c.clone(), yp.clone())).or_default() += p;
        }
        for ((a, c, yp, yi), &p) in &pabcy {
            if p > 0.0 {
                let num = p * pc[&(c.clone(), yp.clone())];
                let den =
                    pac[&(a.clone(), c.clone(), yp.clone())] * pcy[&(c.clone(), yp.clone(), *yi)];
                total += p * (num / den).log2();
            }
        }
    }
    total
}

#[test]
fn independent_output_gives_zero() {
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.5).unwrap()).unwrap();
    let j = uniform_joint(&ch, 2, InitialState::Given(0));
    let di = directed_info(&j, Source::Both);
    assert!(di.total.abs() < 1e-15 && di.expectation_form.abs() < 1e-15);
}

#[test]
fn noiseless_bit_pipe_carries_two_bits() {
    let ch = FsMac::single_user(Alphabet::unit(), b(), b(), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let j = uniform_joint(&ch, 2, InitialState::Given(0));
    let di = directed_info(&j, Source::X1);
    assert_eq!(di.per_step, vec![1.0, 1.0]);
    assert_eq!(di.total, 2.0);
    assert!((di.expectation_form - 2.0).abs() < 1e-15);
}

#[test]
fn additive_bernoulli_sum_rate() {
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.1).unwrap()).unwrap();
    let j = uniform_joint(&ch, 1, InitialState::Given(0));
    let h = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
    let di = directed_info(&j, Source::Both);
    assert!((di.total - (1.0 - h)).abs() < 1e-14);
    assert!((di.expectation_form - (1.0 - h)).abs() < 1e-14);
}

#[test]
fn conditioned_examples() {
    // Y = X2: user 1 contributes nothing
    let ch = FsMac::memoryless(b(), b(), b(), |_, x2| {
        if x2 == 0 {
            vec![1.0, 0.0]
        } else {
            vec![0.0, 1.0]
        }
    })
    .unwrap();
    let j = uniform_joint(&ch, 1, InitialState::Given(0));
    assert_eq!(directed_info_cc(&j, User::One).total, 0.0);
    // Y = X1 xor X2: knowing X2, Y reveals X1
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.0).unwrap()).unwrap();
    let j = uniform_joint(&ch, 1, InitialState::Given(0));
    assert!((directed_info_cc(&j, User::One).total - 1.0).abs() < 1e-15);
}

#[test]
fn per_step_form_matches_definition_and_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.gen_range(1..=2);
        let (ch, pol) = random_instance(&mut rng, n);
        let law = channel_causal_law(&ch, &InitialState::Given(0), n).unwrap();
        let j = joint_law(&pol, &law).unwrap();
        for (kind, a, c) in [
            (DiKind::Directed(Source::Both), (true, true), (false, false)),
            (DiKind::Directed(Source::X1), (true, false), (false, false)),
            (DiKind::Conditioned(User::One), (true, false), (false, true)),
            (DiKind::Conditioned(User::Two), (false, true), (true, false)),
        ] {
            let br = directed_info_kind(&j, kind);
            let oracle = oracle_di(&j, a, c);
            assert!(
                (br.total - oracle).abs() < 1e-10,
                "{kind:?}: {} vs {oracle}",
                br.total
            );
            assert!((br.total - br.expectation_form).abs() < 1e-10);
            assert!(br.per_step.iter().all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn fast_evaluator_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let (ch, pol) = random_instance(&mut rng, n);
        let law = channel_causal_law(&ch, &InitialState::Given(0), n).unwrap();
        let j = joint_law(&pol, &law).unwrap();
        let dims: Dims = *law.dims();
        let terms = LawTerms::new(law);
        let mut ev = FastEval::new(&dims, true);
        ev.load_tables(&pol.tables(&dims).unwrap(), &terms);
        let t = ev.triple(&terms);
        for (k, kind) in DiKind::PENTAGON.iter().enumerate() {
            assert!((t[k] - directed_info_total(&j, *kind)).abs() < 1e-10);
        }
        assert!((ev.sum_rate(&terms) - t[2]).abs() < 1e-12);
    }
}

#[test]
fn given_state_examples() {
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.2).unwrap()).unwrap();
    let pol = PolicyPair::uniform(
        2,
        b(),
        b(),
        FeedbackFn::perfect(b()),
        FeedbackFn::perfect(b()),
    )
    .unwrap();
    let rep = directed_info_given_state(&pol, &ch, DiKind::Directed(Source::Both), None).unwrap();
    let j = uniform_joint(&ch, 2, InitialState::Given(0));
    assert!((rep.per_state[0] - directed_info(&j, Source::Both).total).abs() < 1e-15);

    let ge = gilbert_elliott_mac(0.3, 0.1, 0.15, 0.15).unwrap();
    for n in 1..=3 {
        let pol =
            PolicyPair::uniform(n, b(), b(), FeedbackFn::none(b()), FeedbackFn::none(b())).unwrap();
        for kind in DiKind::PENTAGON {
            let rep = directed_info_given_state(&pol, &ge, kind, Some(&InitialState::Stationary))
                .unwrap();
            assert!((rep.max - rep.min).abs() < 1e-12);
        }
    }
}

#[test]
fn state_knowledge_gap_is_bounded_by_state_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.gen_range(1..=2);
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let pol = random_policy_pair(
            &mut rng,
            n,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        );
        let w = crate::random::random_pmf(&mut rng, 2);
        for kind in [DiKind::Directed(Source::X1), DiKind::Conditioned(User::One)] {
            let rep = directed_info_given_state(
                &pol,
                &ch,
                kind,
                Some(&InitialState::Distribution(w.clone())),
            )
            .unwrap();
            let avg = rep.averaged.unwrap();
            assert!((avg.mixture - avg.conditioned).abs() <= avg.state_entropy + 1e-10);
            assert!(avg.state_entropy <= 1.0 + 1e-15);
        }
    }
}

#[test]
fn functional_matches_conditioned_directed_info() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let n = rng.gen_range(1..=3);
        let (ch, pol) = random_instance(&mut rng, n);
        let law = channel_causal_law(&ch, &InitialState::Given(0), n).unwrap();
        let j = joint_law(&pol, &law).unwrap();
        let f = functional_i(&pol, &law).unwrap();
        assert!((f - directed_info_cc(&j, User::One).total).abs() < 1e-10);
    }
}

#[test]
fn no_feedback_mutual_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let n = rng.gen_range(1..=3);
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let nf = FeedbackFn::none(b());
        let pol = random_policy_pair(&mut rng, n, b(), b(), nf.clone(), nf);
        let law = channel_causal_law(&ch, &InitialState::Given(1), n).unwrap();
        let j = joint_law(&pol, &law).unwrap();
        let mi = mutual_info(&j, VarSet::X1, VarSet::Y, VarSet::X2).unwrap();
        assert!((mi - directed_info_cc(&j, User::One).total).abs() < 1e-10);
        assert!((mi - functional_i(&pol, &law).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn functional_with_degenerate_second_user() {
    // Q2 a point mass: the functional is the single-user one for x2 = 1
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.25).unwrap()).unwrap();
    let law = channel_causal_law(&ch, &InitialState::Given(0), 1).unwrap();
    let q1 = CausalKernel::iid(User::One, 1, b(), Alphabet::unit(), &[0.3, 0.7]).unwrap();
    let q2 = CausalKernel::iid(User::Two, 1, b(), Alphabet::unit(), &[0.0, 1.0]).unwrap();
    let pol = PolicyPair::new(q1, q2, FeedbackFn::none(b()), FeedbackFn::none(b())).unwrap();
    // y = x1 xor 1 xor v: a BSC(0.25) on x1 with input (0.3, 0.7)
    let py1 = 0.3 * 0.25 + 0.7 * 0.75;
    let expect = binary_entropy(py1) - binary_entropy(0.25);
    assert!((functional_i(&pol, &law).unwrap() - expect).abs() < 1e-14);
}

#[test]
fn mutual_info_examples() {
    let ch = FsMac::single_user(Alphabet::unit(), b(), b(), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let j = uniform_joint(&ch, 1, InitialState::Given(0));
    assert!((mutual_info(&j, VarSet::X1, VarSet::Y, VarSet::EMPTY).unwrap() - 1.0).abs() < 1e-15);
    let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.5).unwrap()).unwrap();
    let j = uniform_joint(&ch, 2, InitialState::Given(0));
    assert!(
        mutual_info(&j, VarSet::X1, VarSet::Y, VarSet::EMPTY)
            .unwrap()
            .abs()
            < 1e-15
    );
    assert!(mutual_info(&j, VarSet::Y, VarSet::Y, VarSet::EMPTY).is_err());
}

#[test]
fn zero_check_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let useless = random_useless_channel(&mut rng, 2, 2, 2, 2);
    let v = zero_region_check(&useless, 2, &ZeroCheckOptions::perfect_feedback(&useless)).unwrap();
    assert!(v.uniform_zero && v.grid_zero && v.consistent);
    assert!(v.max_deviation <= 1e-12);
    assert_eq!(v.pairs_evaluated, 729 * 729);

    let noiseless = additive_modq_mac(2, &NoiseChain::bernoulli(0.0).unwrap()).unwrap();
    let v = zero_region_check(
        &noiseless,
        2,
        &ZeroCheckOptions::perfect_feedback(&noiseless),
    )
    .unwrap();
    assert!(!v.uniform_zero && !v.grid_zero && v.consistent);
}

#[test]
fn entropy_bounds_examples() {
    let half = entropy_rate_bounds(&NoiseChain::bernoulli(0.5).unwrap(), 4).unwrap();
    assert!((half.lower - 1.0).abs() < 1e-12 && (half.upper - 1.0).abs() < 1e-12);
    let p = 0.17;
    for n in 1..=5 {
        let e = entropy_rate_bounds(&NoiseChain::bernoulli(p).unwrap(), n).unwrap();
        assert!(
            (e.lower - binary_entropy(p)).abs() < 1e-12
                && (e.upper - binary_entropy(p)).abs() < 1e-12
        );
    }
    let ge = NoiseChain::gilbert_elliott(0.1, 0.1, 0.01, 0.3).unwrap();
    let mut prev: Option<EntropyBounds> = None;
    for n in 1..=8 {
        let e = entropy_rate_bounds(&ge, n).unwrap();
        assert!(e.lower <= e.upper + 1e-12);
        if let Some(p) = prev {
            assert!(e.upper <= p.upper + 1e-12 && e.lower >= p.lower - 1e-12);
        }
        prev = Some(e);
    }
    assert!(
        prev.unwrap().width() < 0.02,
        "width {}",
        prev.unwrap().width()
    );
}

#[test]
fn ge_identity_examples() {
    let clean = gilbert_elliott_mac(0.3, 0.3, 0.0, 0.0).unwrap();
    let r = ge_sumrate_identity_check(&clean, 3).unwrap();
    assert!((r.directed_info - 3.0).abs() < 1e-12 && r.noise_entropy.abs() < 1e-12);
    let dead = gilbert_elliott_mac(0.3, 0.3, 0.5, 0.5).unwrap();
    let r = ge_sumrate_identity_check(&dead, 3).unwrap();
    assert!(r.directed_info.abs() < 1e-12 && (r.noise_entropy - 3.0).abs() < 1e-12);
    let ge = gilbert_elliott_mac(0.2, 0.2, 0.05, 0.25).unwrap();
    assert!(ge_sumrate_identity_check(&ge, 4).unwrap().residual <= 1e-9);
    let plain = random_channel(&mut ChaCha8Rng::seed_from_u64(1), 1, 2, 2, 2);
    assert!(ge_sumrate_identity_check(&plain, 1).is_err());
}

#[test]
fn unit_delay_isi_loses_one_symbol() {
    // y_i = x1_{i-1}; the first output is the initial window symbol
    let mut output = Vec::new();
    for _z in 0..1 {
        for w1 in 0..4 {
            for _w2 in 0..4 {
                let y = w1 >> 1;
                output.extend(if y == 0 { [1.0, 0.0] } else { [0.0, 1.0] });
            }
        }
    }
    let spec = LimitedIsiSpec {
        m: 1,
        x1: b(),
        x2: b(),
        y: b(),
        z_transition: vec![vec![1.0]],
        output,
        initial_window: vec![0.25; 4],
        z_initial: None,
    };
    let ch = limited_isi_to_fsmac(&spec).unwrap();
    let j = uniform_joint(&ch, 3, InitialState::Declared);
    assert!((directed_info(&j, Source::Both).total - 2.0).abs() < 1e-12);
}

#[test]
fn multiplexer_data_processing() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p2p = random_channel(&mut rng, 2, 2, 1, 2);
    for mux in [MuxTable::xor(), MuxTable::and()] {
        let ch = mux_p2p_compose(&mux, &p2p).unwrap();
        for _ in 0..10 {
            let (a, c) = (rng.gen::<f64>(), rng.gen::<f64>());
            let n = 2;
            let nf = FeedbackFn::none(b());
            let q1 = CausalKernel::iid(User::One, n, b(), Alphabet::unit(), &[1.0 - a, a]).unwrap();
            let q2 = CausalKernel::iid(User::Two, n, b(), Alphabet::unit(), &[1.0 - c, c]).unwrap();
            let pol = PolicyPair::new(q1, q2, nf.clone(), nf.clone()).unwrap();
            let law = channel_causal_law(&ch, &InitialState::Given(0), n).unwrap();
            let mac = directed_info(&joint_law(&pol, &law).unwrap(), Source::Both).total;
            let mut q0 = [0.0; 2];
            for (x1, w1) in [1.0 - a, a].iter().enumerate() {
                for (x2, w2) in [1.0 - c, c].iter().enumerate() {
                    q0[mux.apply(x1, x2)] += w1 * w2;
                }
            }
            let k0 = CausalKernel::iid(User::One, n, b(), Alphabet::unit(), &q0).unwrap();
            let k_unit =
                CausalKernel::uniform(User::Two, n, Alphabet::unit(), Alphabet::unit()).unwrap();
            let pol0 = PolicyPair::new(k0, k_unit, nf.clone(), nf).unwrap();
            let law0 = channel_causal_law(&p2p, &InitialState::Given(0), n).unwrap();
            let single = directed_info(&joint_law(&pol0, &law0).unwrap(), Source::X1).total;
            assert!(mac <= single + 1e-10);
        }
    }
}
