//! Achievable and outer rate regions, assembled from policy pentagons.
//!
//! A [`RateRegion`] is a convex down-set in the nonnegative quadrant. It is
//! stored by its hull vertices, counterclockwise from the origin. Unions of
//! pentagons are convexified, which is what time sharing between policies
//! buys.

mod geometry;
mod sequence;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use geometry::{segment_distance, ConvexPolygon, Point};
pub use sequence::{
    limit_region_estimate, supadditivity_check, LimitEstimate, SupEntry, SupadditivityReport,
};

use crate::channels::{channel_hash, FeedbackFn, FsMac};
use crate::dirinfo::fast::{FastEval, LawTerms};
use crate::error::{Error, Result};
use crate::grid::PolicyGrid;
use crate::prob::pmf::fmt_sig;
use crate::prob::{channel_causal_law, Dims, InitialState, PolicyPair};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Self {
        RatePoint { r1, r2 }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Bounds on `R1`, `R2` and `R1 + R2`, in bits per channel use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pentagon {
    pub c1: f64,
    pub c2: f64,
    pub c12: f64,
}

impl Pentagon {
    /// Clamps each bound at zero.
    pub fn new(c1: f64, c2: f64, c12: f64) -> Self {
        Pentagon {
            c1: c1.max(0.0),
            c2: c2.max(0.0),
            c12: c12.max(0.0),
        }
    }

    /// The extreme points of the pentagon. Bounds that never bind are
    /// clipped at the sum-rate line.
    pub fn corners(&self) -> [RatePoint; 5] {
        let a = self.c1.min(self.c12);
        let b = self.c2.min(self.c12);
        [
            RatePoint::new(0.0, 0.0),
            RatePoint::new(a, 0.0),
            RatePoint::new(a, b.min(self.c12 - a)),
            RatePoint::new(a.min(self.c12 - b), b),
            RatePoint::new(0.0, b),
        ]
    }

    /// Componentwise `self >= other - tol`.
    pub fn dominates(&self, other: &Pentagon, tol: f64) -> bool {
        self.c1 >= other.c1 - tol && self.c2 >= other.c2 - tol && self.c12 >= other.c12 - tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Worst initial state with the `log|S| / n` penalty: achievable.
    Inner,
    /// No state penalty, under a chosen initial-state convention.
    Outer,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" => Ok(Variant::Inner),
            "outer" => Ok(Variant::Outer),
            _ => Err(Error::InvalidParameter(format!(
                "unknown variant '{s}' (inner|outer)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Inner => "inner",
            Variant::Outer => "outer",
        })
    }
}

/// The initial-state convention of an outer bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S0Mode {
    Given(usize),
    /// Each bound minimized over the initial state.
    Worst,
    /// State drawn from the stationary law of the state chain.
    Stationary,
}

impl FromStr for S0Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst" => Ok(S0Mode::Worst),
            "stationary" => Ok(S0Mode::Stationary),
            _ => s
                .strip_prefix("given:")
                .and_then(|id| id.parse().ok())
                .map(S0Mode::Given)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "unknown s0 mode '{s}' (given:ID|worst|stationary)"
                    ))
                }),
        }
    }
}

impl fmt::Display for S0Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            S0Mode::Given(s) => write!(f, "given:{s}"),
            S0Mode::Worst => f.write_str("worst"),
            S0Mode::Stationary => f.write_str("stationary"),
        }
    }
}

/// Provenance of a region, written to the JSON sidecar.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionMeta {
    pub n: usize,
    pub variant: Option<Variant>,
    pub s0: Option<S0Mode>,
    pub grid: Option<PolicyGrid>,
    pub feedback: Option<[String; 2]>,
    /// SHA-256 of the channel spec.
    pub channel: Option<String>,
    pub pairs_evaluated: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    polygon: ConvexPolygon,
    pub meta: RegionMeta,
}

impl RateRegion {
    /// The smallest convex down-set in the quadrant holding `points`.
    /// Negative coordinates are clamped to zero.
    pub fn from_points(points: &[RatePoint], meta: RegionMeta) -> Result<Self> {
        let mut pts: Vec<Point> = vec![[0.0, 0.0]];
        for p in points {
            if !p.r1.is_finite() || !p.r2.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite rate point {p:?}"
                )));
            }
            let (a, b) = (p.r1.max(0.0), p.r2.max(0.0));
            pts.extend([[a, b], [a, 0.0], [0.0, b]]);
        }
        Ok(RateRegion {
            polygon: ConvexPolygon::hull(&pts)?,
            meta,
        })
    }

    pub fn pentagon(p: &Pentagon, meta: RegionMeta) -> Self {
        Self::from_points(&p.corners(), meta).expect("pentagon corners are finite")
    }

    pub fn origin() -> Self {
        Self::from_points(&[], RegionMeta::default()).expect("origin")
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.meta.n = n;
        self
    }

    pub fn polygon(&self) -> &ConvexPolygon {
        &self.polygon
    }

    pub fn vertices(&self) -> Vec<RatePoint> {
        self.polygon
            .vertices()
            .iter()
            .map(|p| RatePoint::new(p[0], p[1]))
            .collect()
    }

    pub fn max_sum_rate(&self) -> f64 {
        self.polygon
            .vertices()
            .iter()
            .map(|p| p[0] + p[1])
            .fold(0.0, f64::max)
    }

    pub fn contains_point(&self, p: RatePoint, tol: f64) -> bool {
        self.polygon.distance_to([p.r1, p.r2]) <= tol
    }

    /// Header `R1,R2`, then the hull vertices counterclockwise from the
    /// origin, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R1,R2\n");
        for p in self.polygon.vertices() {
            s.push_str(&format!("{},{}\n", fmt_sig(p[0]), fmt_sig(p[1])));
        }
        s
    }

    pub fn from_csv(text: &str, meta: RegionMeta) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("R1,R2") {
            return Err(Error::Spec(
                "region CSV must start with the header R1,R2".into(),
            ));
        }
        let mut pts = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Spec(format!("region CSV line {}: '{line}'", k + 2));
            let (a, b) = line.split_once(',').ok_or_else(bad)?;
            pts.push(RatePoint::new(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ));
        }
        Self::from_points(&pts, meta)
    }

    /// Writes the CSV to `path` and the metadata to `path` with a `.json`
    /// extension.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv())?;
        std::fs::write(
            path.with_extension("json"),
            serde_json::to_string_pretty(&self.meta)?,
        )?;
        Ok(())
    }
}

pub fn convex_hull(points: &[RatePoint]) -> Result<RateRegion> {
    RateRegion::from_points(points, RegionMeta::default())
}

pub fn minkowski_sum(a: &RateRegion, b: &RateRegion) -> RateRegion {
    RateRegion {
        polygon: a.polygon.minkowski(&b.polygon),
        meta: RegionMeta::default(),
    }
}

pub fn scale_region(a: &RateRegion, c: f64) -> Result<RateRegion> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be finite and >= 0, got {c}"
        )));
    }
    Ok(RateRegion {
        polygon: a.polygon.scale(c),
        meta: a.meta.clone(),
    })
}

pub fn hausdorff_distance(a: &RateRegion, b: &RateRegion) -> f64 {
    a.polygon.hausdorff(&b.polygon)
}

/// Channel laws and penalty behind one pentagon variant, shared by all
/// policy pairs of a sweep.
pub(crate) struct PentagonLaws {
    dims: Dims,
    laws: Vec<LawTerms>,
    penalty: f64,
}

impl PentagonLaws {
    pub fn new(ch: &FsMac, n: usize, variant: Variant, s0: S0Mode) -> Result<Self> {
        let all = || {
            (0..ch.states().size())
                .map(InitialState::Given)
                .collect::<Vec<_>>()
        };
        let (inits, penalty) = match (variant, s0) {
            (Variant::Inner, _) => (all(), (ch.states().size() as f64).log2() / n as f64),
            (Variant::Outer, S0Mode::Worst) => (all(), 0.0),
            (Variant::Outer, S0Mode::Given(s)) => (vec![InitialState::Given(s)], 0.0),
            (Variant::Outer, S0Mode::Stationary) => (vec![InitialState::Stationary], 0.0),
        };
        let laws = inits
            .iter()
            .map(|i| channel_causal_law(ch, i, n).map(LawTerms::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(PentagonLaws {
            dims: *laws[0].law.dims(),
            laws,
            penalty,
        })
    }

    pub fn evaluator(&self) -> FastEval {
        FastEval::new(&self.dims, true)
    }

    pub fn pentagon(&self, ev: &mut FastEval, q1: &[f64], q2: &[f64]) -> Pentagon {
        let mut best = [f64::INFINITY; 3];
        for law in &self.laws {
            ev.load(q1, q2, law);
            for (b, v) in best.iter_mut().zip(ev.triple(law)) {
                *b = b.min(v);
            }
        }
        let n = self.dims.n as f64;
        Pentagon::new(
            best[0] / n - self.penalty,
            best[1] / n - self.penalty,
            best[2] / n - self.penalty,
        )
    }
}

fn single_pentagon(
    policy: &PolicyPair,
    ch: &FsMac,
    variant: Variant,
    s0: S0Mode,
) -> Result<Pentagon> {
    let laws = PentagonLaws::new(ch, policy.depth(), variant, s0)?;
    let t = policy.tables(&laws.dims)?;
    Ok(laws.pentagon(&mut laws.evaluator(), &t.q1, &t.q2))
}

/// Each bound is the worst-initial-state directed information per use,
/// minus `log2|S| / n`, clamped at zero.
pub fn pentagon_inner(policy: &PolicyPair, ch: &FsMac) -> Result<Pentagon> {
    single_pentagon(policy, ch, Variant::Inner, S0Mode::Worst)
}

/// The three directed-information bounds per use with no state penalty.
pub fn pentagon_outer(policy: &PolicyPair, ch: &FsMac, s0: S0Mode) -> Result<Pentagon> {
    single_pentagon(policy, ch, Variant::Outer, s0)
}

/// What [`region_union`] sweeps.
#[derive(Clone, Debug)]
pub struct RegionRequest {
    pub n: usize,
    pub grid: PolicyGrid,
    pub f1: FeedbackFn,
    pub f2: FeedbackFn,
    pub variant: Variant,
    /// Ignored by the inner variant, which always takes the worst state.
    pub s0: S0Mode,
}

impl RegionRequest {
    pub fn new(ch: &FsMac, n: usize, grid: PolicyGrid, variant: Variant) -> Self {
        RegionRequest {
            n,
            grid,
            f1: FeedbackFn::none(ch.y()),
            f2: FeedbackFn::none(ch.y()),
            variant,
            s0: S0Mode::Stationary,
        }
    }

    pub fn feedback(mut self, f1: FeedbackFn, f2: FeedbackFn) -> Self {
        self.f1 = f1;
        self.f2 = f2;
        self
    }

    pub fn s0(mut self, s0: S0Mode) -> Self {
        self.s0 = s0;
        self
    }
}

/// Convex hull of all pentagons over the policy grid: an inner
/// approximation of the exact union, limited by the grid.
pub fn region_union(ch: &FsMac, req: &RegionRequest) -> Result<RateRegion> {
    let laws = PentagonLaws::new(ch, req.n, req.variant, req.s0)?;
    let (k1, k2) = req
        .grid
        .kernel_lists(req.n, ch.x1(), ch.x2(), &req.f1, &req.f2)?;
    let t1: Vec<Vec<f64>> = k1.iter().map(|k| k.path_table(&req.f1, ch.y())).collect();
    let t2: Vec<Vec<f64>> = k2.iter().map(|k| k.path_table(&req.f2, ch.y())).collect();
    let rows: Vec<Vec<Point>> = t1
        .par_iter()
        .map_init(
            || laws.evaluator(),
            |ev, a| {
                let mut pts = vec![[0.0, 0.0]];
                for b in &t2 {
                    let p = laws.pentagon(ev, a, b);
                    pts.extend(p.corners().iter().map(|c| [c.r1, c.r2]));
                }
                ConvexPolygon::hull(&pts)
                    .expect("nonempty")
                    .vertices()
                    .to_vec()
            },
        )
        .collect();
    let pts: Vec<RatePoint> = rows
        .concat()
        .into_iter()
        .map(|p| RatePoint::new(p[0], p[1]))
        .collect();
    let meta = RegionMeta {
        n: req.n,
        variant: Some(req.variant),
        s0: Some(match req.variant {
            Variant::Inner => S0Mode::Worst,
            Variant::Outer => req.s0,
        }),
        grid: Some(req.grid.clone()),
        feedback: Some([req.f1.label(), req.f2.label()]),
        channel: Some(channel_hash(ch)),
        pairs_evaluated: (t1.len() * t2.len()) as u64,
    };
    RateRegion::from_points(&pts, meta)
}

/// Grid maximum of `I((X1, X2)^n -> Y^n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumRateMax {
    pub n: usize,
    /// Bits per use.
    pub rate: f64,
    pub pairs_evaluated: u64,
    /// Grid indices of a maximizing pair.
    pub argmax: (usize, usize),
}

pub fn max_sum_rate(
    ch: &FsMac,
    n: usize,
    grid: &PolicyGrid,
    f1: &FeedbackFn,
    f2: &FeedbackFn,
    initial: &InitialState,
) -> Result<SumRateMax> {
    let law = LawTerms::new(channel_causal_law(ch, initial, n)?);
    let dims = *law.law.dims();
    let (k1, k2) = grid.kernel_lists(n, ch.x1(), ch.x2(), f1, f2)?;
    let t1: Vec<Vec<f64>> = k1.iter().map(|k| k.path_table(f1, ch.y())).collect();
    let t2: Vec<Vec<f64>> = k2.iter().map(|k| k.path_table(f2, ch.y())).collect();
    let best = t1
        .par_iter()
        .enumerate()
        .map_init(
            || FastEval::new(&dims, false),
            |ev, (i, a)| {
                let mut best = (f64::NEG_INFINITY, (i, 0));
                for (j, b) in t2.iter().enumerate() {
                    ev.load(a, b, &law);
                    let v = ev.sum_rate(&law);
                    if v > best.0 {
                        best = (v, (i, j));
                    }
                }
                best
            },
        )
        .reduce(
            || (f64::NEG_INFINITY, (0, 0)),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    Ok(SumRateMax {
        n,
        rate: best.0 / n as f64,
        pairs_evaluated: (t1.len() * t2.len()) as u64,
        argmax: best.1,
    })
}
