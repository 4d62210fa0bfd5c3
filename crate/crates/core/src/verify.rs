//! Seeded property suites over random instances, with a machine-readable
//! pass/fail report.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{FeedbackFn, FsMac};
use crate::dirinfo::{
    directed_info_cc, directed_info_given_state, functional_i, mutual_info, zero_region_check,
    DiKind, Source, VarSet, ZeroCheckOptions,
};
use crate::error::{Error, Result};
use crate::exponents::{
    exponent_shape, f_supadditivity_check, gallager_e, Curvature, ErrorType, RhoGrid,
};
use crate::prob::alphabet::{decode, encode};
use crate::prob::{
    causal_conditional, channel_causal_law, joint_law, Alphabet, CausalRequest, InitialState,
    JointLaw, Prefixes, Stream, User,
};
use crate::random::{random_channel, random_pmf, random_policy_pair, random_useless_channel};
use crate::regions::{
    convex_hull, hausdorff_distance, minkowski_sum, scale_region, supadditivity_check,
    ConvexPolygon, Point, RatePoint, RateRegion,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemmas,
    Exponents,
    Geometry,
    Zero,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Lemmas,
        Suite::Exponents,
        Suite::Geometry,
        Suite::Zero,
    ];

    /// Instances per check when none is requested.
    pub fn default_count(self) -> usize {
        match self {
            Suite::Lemmas => 100,
            Suite::Exponents => 25,
            Suite::Geometry => 50,
            Suite::Zero => 20,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemmas => "lemmas",
            Suite::Exponents => "exponents",
            Suite::Geometry => "geometry",
            Suite::Zero => "zero",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown suite '{s}' (lemmas, exponents, geometry, zero)"
                ))
            })
    }
}

/// One property checked over many instances. A measured check passes on
/// an instance when its value is at most `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// Largest measured value, absent for yes/no properties.
    pub worst: Option<f64>,
    pub tolerance: Option<f64>,
}

impl Check {
    fn measured(name: &str, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            instances: 0,
            failures: 0,
            worst: Some(f64::NEG_INFINITY),
            tolerance: Some(tolerance),
        }
    }

    fn flag(name: &str) -> Self {
        Check {
            name: name.into(),
            instances: 0,
            failures: 0,
            worst: None,
            tolerance: None,
        }
    }

    fn record(&mut self, value: f64) {
        self.instances += 1;
        let tol = self.tolerance.unwrap_or(0.0);
        // NaN fails
        if value.is_nan() || value > tol {
            self.failures += 1;
        }
        let w = self.worst.get_or_insert(f64::NEG_INFINITY);
        if value.is_nan() || value > *w {
            *w = value;
        }
    }

    fn record_flag(&mut self, ok: bool) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    pub checks: Vec<Check>,
    /// Measurements that are reported but not asserted.
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs `suite` on `count` seeded instances per check.
pub fn run_suite(suite: Suite, seed: u64, count: usize) -> Result<VerifyReport> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be positive".into()));
    }
    match suite {
        Suite::Lemmas => identity_suite(seed, count),
        Suite::Exponents => exponent_suite(seed, count),
        Suite::Geometry => geometry_suite(seed, count),
        Suite::Zero => zero_suite(seed, count),
    }
}

fn b() -> Alphabet {
    Alphabet::binary()
}

fn random_feedback(rng: &mut ChaCha8Rng) -> FeedbackFn {
    if rng.gen_bool(1.0 / 3.0) {
        FeedbackFn::none(b())
    } else {
        FeedbackFn::perfect(b())
    }
}

/// Largest violation of both chain-rule factorizations of one joint law:
/// `P(x1, y) = P(x1 || y^{n-1}) P(y || x1)` over all cells, and
/// `P(x1, y || x2) = P(x1 || y^{n-1}, x2) P(y || x1, x2)` wherever the left
/// side is defined. The left sides come straight from prefix marginals.
pub fn chain_rule_violation(joint: &JointLaw) -> Result<f64> {
    let d = *joint.dims();
    let n = d.n;
    let (a1, a2, ay) = (d.x1.size(), d.x2.size(), d.y.size());
    let q1 = causal_conditional(joint, &CausalRequest::input(Stream::X1))?;
    let p1 = causal_conditional(joint, &CausalRequest::output_given(Stream::X1))?;
    let q1c = causal_conditional(joint, &CausalRequest::input_given_other(Stream::X1))?;
    let pc = causal_conditional(joint, &CausalRequest::channel())?;
    let p_x1y = joint.marginal(Prefixes::new(n, 0, n));
    // numerator and denominator marginals of each causal factor
    let num: Vec<Vec<f64>> = (1..=n)
        .map(|i| joint.marginal(Prefixes::new(i, i, i)))
        .collect();
    let den: Vec<Vec<f64>> = (1..=n)
        .map(|i| joint.marginal(Prefixes::new(i - 1, i, i - 1)))
        .collect();
    let key = |x1: &[usize], x2: &[usize], y: &[usize]| {
        (encode(x1, a1) * a2.pow(x2.len() as u32) + encode(x2, a2)) * ay.pow(y.len() as u32)
            + encode(y, ay)
    };
    let x2_any = vec![0; n];
    let mut worst: f64 = 0.0;
    // an undefined factor means a zero-probability history on the path
    let product = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(u, v)| u * v).unwrap_or(0.0);
    for c1 in 0..d.n_x1() {
        let x1 = decode(c1, n, a1);
        for cy in 0..d.n_y() {
            let y = decode(cy, n, ay);
            let lhs = p_x1y[c1 * d.n_y() + cy];
            let rhs = product(q1.eval(&x1, &x2_any, &y), p1.eval(&x1, &x2_any, &y));
            worst = worst.max((lhs - rhs).abs());
            'x2: for c2 in 0..d.n_x2() {
                let x2 = decode(c2, n, a2);
                let mut lhs = 1.0;
                for i in 1..=n {
                    let dn = den[i - 1][key(&x1[..i - 1], &x2[..i], &y[..i - 1])];
                    if dn <= 0.0 {
                        continue 'x2;
                    }
                    lhs *= num[i - 1][key(&x1[..i], &x2[..i], &y[..i])] / dn;
                }
                let rhs = product(q1c.eval(&x1, &x2, &y), pc.eval(&x1, &x2, &y));
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

fn identity_suite(seed: u64, count: usize) -> Result<VerifyReport> {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l1 = Check::measured("chain_rule_factorization", TOL);
    let mut l2 = Check::measured("state_knowledge_gap_minus_state_entropy", TOL);
    let mut l3 = Check::measured("functional_equals_conditioned_directed_info", TOL);
    let mut l4 = Check::measured("no_feedback_mutual_info_equals_directed_info", TOL);
    for k in 0..count {
        let n = 1 + k % 3;

        let states = rng.gen_range(1..=2);
        let ch = random_channel(&mut rng, states, 2, 2, 2);
        let (f1, f2) = (random_feedback(&mut rng), random_feedback(&mut rng));
        let pol = random_policy_pair(&mut rng, n, b(), b(), f1, f2);
        let law = channel_causal_law(&ch, &InitialState::Given(0), n)?;
        let j = joint_law(&pol, &law)?;
        l1.record(chain_rule_violation(&j)?);
        l3.record((functional_i(&pol, &law)? - directed_info_cc(&j, User::One).total).abs());

        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let pol = random_policy_pair(
            &mut rng,
            n,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        );
        let w = InitialState::Distribution(random_pmf(&mut rng, 2));
        let mut gap = f64::NEG_INFINITY;
        for kind in [DiKind::Directed(Source::X1), DiKind::Conditioned(User::One)] {
            let rep = directed_info_given_state(&pol, &ch, kind, Some(&w))?;
            let avg = rep
                .averaged
                .ok_or_else(|| Error::InvalidParameter("state average missing".into()))?;
            gap = gap.max((avg.mixture - avg.conditioned).abs() - avg.state_entropy);
        }
        l2.record(gap);

        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let nf = FeedbackFn::none(b());
        let pol = random_policy_pair(&mut rng, n, b(), b(), nf.clone(), nf);
        let law = channel_causal_law(&ch, &InitialState::Given(1), n)?;
        let j = joint_law(&pol, &law)?;
        let mi = mutual_info(&j, VarSet::X1, VarSet::Y, VarSet::X2)?;
        l4.record((mi - directed_info_cc(&j, User::One).total).abs());
    }
    Ok(VerifyReport {
        suite: Suite::Lemmas,
        seed,
        count,
        checks: vec![l1, l2, l3, l4],
        notes: vec![],
    })
}

fn exponent_suite(seed: u64, count: usize) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = RhoGrid::default();
    let mut e0 = Check::measured("e_at_rho_zero_exact", 0.0);
    let mut e0n = Check::measured("e_at_rho_zero_numeric", 1e-12);
    let mut slope = Check::measured("slope_at_zero_minus_directed_info_per_use", 1e-4);
    let mut mono = Check::flag("e_nondecreasing_in_rho");
    let mut bounded = Check::flag("slope_bounded_by_directed_info");
    let mut concat = Check::measured("f_concatenation_deficit", 1e-10);
    let mut curv = [0usize; 4];
    for k in 0..count {
        let n = 1 + k % 2;
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let (f1, f2) = (random_feedback(&mut rng), random_feedback(&mut rng));
        let pol = random_policy_pair(&mut rng, n, b(), b(), f1, f2);
        let law = channel_causal_law(&ch, &InitialState::Given(0), n)?;
        for i in ErrorType::ALL {
            e0.record(gallager_e(i, 0.0, &pol, &law)?.abs());
            let rep = exponent_shape(i, &pol, &ch, &grid)?;
            e0n.record(rep.e_at_zero.iter().copied().fold(0.0, f64::max));
            slope.record(rep.max_slope_error);
            mono.record_flag(rep.monotone);
            bounded.record_flag(rep.slope_bounded);
            for c in &rep.curvature {
                curv[match c {
                    Curvature::Convex => 0,
                    Curvature::Concave => 1,
                    Curvature::Flat => 2,
                    Curvature::Mixed => 3,
                }] += 1;
            }
            let mut deficit = f64::NEG_INFINITY;
            for rho in [0.25, 0.5, 1.0] {
                deficit = deficit.max(-f_supadditivity_check(i, &pol, &pol, &ch, rho)?);
            }
            concat.record(deficit);
        }
    }
    Ok(VerifyReport {
        suite: Suite::Exponents,
        seed,
        count,
        checks: vec![e0, e0n, slope, mono, bounded, concat],
        notes: vec![format!(
            "curvature of E along the rho grid (per state and error type): convex {}, concave {}, flat {}, mixed {}",
            curv[0], curv[1], curv[2], curv[3]
        )],
    })
}

const DIRECTIONS: usize = 3600;

fn support(points: &[Point], angle: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    points
        .iter()
        .map(|p| p[0] * c + p[1] * s)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn angles() -> impl Iterator<Item = f64> {
    (0..DIRECTIONS).map(|k| k as f64 * std::f64::consts::TAU / DIRECTIONS as f64)
}

/// Hausdorff distance between the convex hulls of two point sets, as the
/// largest gap between their support functions over sampled directions.
pub fn support_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    angles()
        .map(|t| (support(a, t) - support(b, t)).abs())
        .fold(0.0, f64::max)
}

fn random_cloud(rng: &mut ChaCha8Rng) -> Vec<Point> {
    let k = rng.gen_range(3..=12);
    (0..k)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect()
}

/// `r` times a polygonal quarter disc.
fn quarter_disc(r: f64, n: usize) -> Result<RateRegion> {
    let pts: Vec<RatePoint> = (0..=64)
        .map(|k| {
            let t = k as f64 * std::f64::consts::FRAC_PI_2 / 64.0;
            RatePoint::new(r * t.cos(), r * t.sin())
        })
        .collect();
    Ok(convex_hull(&pts)?.with_n(n))
}

/// The sequence `A_n = n/(n+1) D` for a quarter disc `D`, which satisfies
/// `(n+l) A_{n+l} ⊇ n A_n + l A_l`.
pub fn synthetic_supadditive_sequence(len: usize) -> Result<Vec<RateRegion>> {
    (1..=len)
        .map(|n| quarter_disc(n as f64 / (n as f64 + 1.0), n))
        .collect()
}

fn geometry_suite(seed: u64, count: usize) -> Result<VerifyReport> {
    const TOL: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hull = Check::measured("hull_vs_support_oracle", TOL);
    let mut sum = Check::measured("minkowski_vs_support_oracle", TOL);
    let mut haus = Check::measured("hausdorff_vs_support_oracle", TOL);
    let mut scale = Check::measured("scaling_vs_support_oracle", TOL);
    for _ in 0..count {
        let (ca, cb) = (random_cloud(&mut rng), random_cloud(&mut rng));
        let pa = ConvexPolygon::hull(&ca)?;
        let pb = ConvexPolygon::hull(&cb)?;
        hull.record(support_hausdorff(pa.vertices(), &ca));
        let pairwise: Vec<Point> = ca
            .iter()
            .flat_map(|a| cb.iter().map(move |b| [a[0] + b[0], a[1] + b[1]]))
            .collect();
        sum.record(support_hausdorff(pa.minkowski(&pb).vertices(), &pairwise));
        haus.record((pa.hausdorff(&pb) - support_hausdorff(&ca, &cb)).abs());
        let c = rng.gen_range(0.1..3.0);
        let scaled: Vec<Point> = ca.iter().map(|p| [c * p[0], c * p[1]]).collect();
        scale.record(support_hausdorff(pa.scale(c).vertices(), &scaled));
    }

    let len = 12;
    let seq = synthetic_supadditive_sequence(len)?;
    let pairs: Vec<(usize, usize)> = (1..=len / 2)
        .flat_map(|n| (1..=len / 2).map(move |l| (n, l)))
        .collect();
    let mut sup = Check::measured("synthetic_supadditivity_slack", 1e-12);
    for e in supadditivity_check(&seq, &pairs, 1e-12)?.entries {
        sup.record(e.slack);
    }
    // the closure of the union, built independently from all vertices
    let all: Vec<RatePoint> = seq.iter().flat_map(|r| r.vertices()).collect();
    let union = convex_hull(&all)?;
    let limit = quarter_disc(1.0, 0)?;
    let mut gaps = Check::measured("gap_to_closure_times_n", 1.0 - 1e-9);
    for (k, r) in seq.iter().enumerate() {
        gaps.record(hausdorff_distance(r, &limit) * (k + 1) as f64);
    }
    let mut conv = Check::measured("union_closure_vs_limit", 1.0 / (len as f64 + 1.0) + 1e-12);
    conv.record(hausdorff_distance(&union, &limit));
    let mut mono = Check::flag("gaps_strictly_decreasing");
    let d: Vec<f64> = seq.iter().map(|r| hausdorff_distance(r, &limit)).collect();
    mono.record_flag(d.windows(2).all(|w| w[1] < w[0]));
    let mut mink = Check::measured("minkowski_sum_of_scaled_members", 1e-12);
    for n in 1..=3 {
        // n A_n + A_1 inside (n+1) A_{n+1}
        let lhs = minkowski_sum(&scale_region(&seq[n - 1], n as f64)?, &seq[0]);
        let rhs = scale_region(&seq[n], (n + 1) as f64)?;
        mink.record(lhs.polygon().directed_distance(rhs.polygon()));
    }
    Ok(VerifyReport {
        suite: Suite::Geometry,
        seed,
        count,
        checks: vec![hull, sum, haus, scale, sup, gaps, conv, mono, mink],
        notes: vec![format!(
            "gaps to the limit: {:?}",
            d.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>()
        )],
    })
}

fn zero_suite(seed: u64, count: usize) -> Result<VerifyReport> {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = Check::flag("uniform_zero_iff_grid_zero");
    let mut useless = Check::flag("constructed_useless_channels_are_zero");
    let mut dev = Check::measured("zero_instances_output_independence", TOL);
    let mut zeros = 0;
    for k in 0..2 * count {
        let ch: FsMac = if k < count {
            random_useless_channel(&mut rng, 2, 2, 2, 2)
        } else {
            random_channel(&mut rng, 2, 2, 2, 2)
        };
        let mut opts = ZeroCheckOptions::perfect_feedback(&ch);
        opts.tol = TOL;
        let v = zero_region_check(&ch, 2, &opts)?;
        agree.record_flag(v.consistent);
        if k < count {
            useless.record_flag(v.uniform_zero && v.grid_zero);
        }
        if v.uniform_zero {
            zeros += 1;
            dev.record(v.max_deviation);
        }
    }
    Ok(VerifyReport {
        suite: Suite::Zero,
        seed,
        count,
        checks: vec![agree, useless, dev],
        notes: vec![format!(
            "{zeros} of {} channels tested zero at n = 2",
            2 * count
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("all".parse::<Suite>().is_err());
        assert!(run_suite(Suite::Zero, 0, 0).is_err());
    }

    #[test]
    fn checks_record_values_and_flags() {
        let mut c = Check::measured("x", 1e-3);
        assert!(!c.passed());
        c.record(1e-4);
        assert!(c.passed());
        c.record(f64::NAN);
        assert!(!c.passed() && c.worst.unwrap().is_nan());
        let mut f = Check::flag("y");
        f.record_flag(true);
        f.record_flag(false);
        assert_eq!((f.instances, f.failures), (2, 1));
    }

    #[test]
    fn chain_rule_holds_for_an_arbitrary_joint_law() {
        let d = crate::prob::Dims::new(2, b(), b(), b()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j = JointLaw::from_tensor(d, random_pmf(&mut rng, d.cells())).unwrap();
        assert!(chain_rule_violation(&j).unwrap() < 1e-14);
    }

    #[test]
    fn support_oracle_examples() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(support_hausdorff(&sq, &sq) == 0.0);
        let shifted: Vec<Point> = sq.iter().map(|p| [p[0] + 0.25, p[1]]).collect();
        assert!((support_hausdorff(&sq, &shifted) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn small_suites_pass() {
        for (s, n) in [
            (Suite::Lemmas, 6),
            (Suite::Exponents, 2),
            (Suite::Geometry, 10),
            (Suite::Zero, 2),
        ] {
            let r = run_suite(s, 7, n).unwrap();
            assert!(r.passed(), "{}", r.to_json().unwrap());
        }
    }
}
