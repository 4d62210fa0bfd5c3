//! Diagnostics for sequences of regions indexed by block length.

use serde::Serialize;

use super::{hausdorff_distance, minkowski_sum, scale_region, RateRegion, RegionMeta};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupEntry {
    pub n: usize,
    pub l: usize,
    /// How far `n R_n + l R_l` sticks out of `(n + l) R_{n+l}`, in total
    /// bits (not per use).
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupadditivityReport {
    pub tol: f64,
    pub entries: Vec<SupEntry>,
}

impl SupadditivityReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    pub fn max_slack(&self) -> f64 {
        self.entries.iter().map(|e| e.slack).fold(0.0, f64::max)
    }
}

fn find(regions: &[RateRegion], n: usize) -> Result<&RateRegion> {
    regions
        .iter()
        .find(|r| r.meta.n == n)
        .ok_or_else(|| Error::InvalidParameter(format!("no region with n = {n}")))
}

/// For each `(n, l)` measures whether `(n + l) R_{n+l}` contains
/// `n R_n + l R_l`. The regions are looked up by `meta.n`.
pub fn supadditivity_check(
    regions: &[RateRegion],
    pairs: &[(usize, usize)],
    tol: f64,
) -> Result<SupadditivityReport> {
    if let Some(first) = regions.first() {
        if regions.iter().any(|r| r.meta.channel != first.meta.channel) {
            return Err(Error::InvalidParameter(
                "regions come from different channels".into(),
            ));
        }
    }
    let mut entries = Vec::with_capacity(pairs.len());
    for &(n, l) in pairs {
        let lhs = scale_region(find(regions, n + l)?, (n + l) as f64)?;
        let rhs = minkowski_sum(
            &scale_region(find(regions, n)?, n as f64)?,
            &scale_region(find(regions, l)?, l as f64)?,
        );
        let slack = rhs.polygon().directed_distance(lhs.polygon());
        entries.push(SupEntry {
            n,
            l,
            slack,
            holds: slack <= tol,
        });
    }
    Ok(SupadditivityReport { tol, entries })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    /// Convex hull of the union of all regions given.
    pub region: RateRegion,
    /// `d(R_k, R_{k+1})` for consecutive entries of the input.
    pub steps: Vec<f64>,
    /// `d(R_k, estimate)` for every entry.
    pub to_limit: Vec<f64>,
}

pub fn limit_region_estimate(regions: &[RateRegion]) -> Result<LimitEstimate> {
    if regions.len() < 2 {
        return Err(Error::InvalidParameter(
            "limit estimate needs at least two regions".into(),
        ));
    }
    let pts: Vec<_> = regions.iter().flat_map(|r| r.vertices()).collect();
    let last = regions.last().map(|r| r.meta.clone()).unwrap_or_default();
    let region = RateRegion::from_points(
        &pts,
        RegionMeta {
            pairs_evaluated: regions.iter().map(|r| r.meta.pairs_evaluated).sum(),
            ..last
        },
    )?;
    Ok(LimitEstimate {
        steps: regions
            .windows(2)
            .map(|w| hausdorff_distance(&w[0], &w[1]))
            .collect(),
        to_limit: regions
            .iter()
            .map(|r| hausdorff_distance(r, &region))
            .collect(),
        region,
    })
}
