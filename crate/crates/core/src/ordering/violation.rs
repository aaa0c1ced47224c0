use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diagram::{check_measure, grid_params, DiagramPoint, Family};
use super::extend_to_pair;
use crate::channels::{ChannelJson, KrausChannel};
use crate::error::{Error, Result};
use crate::measures::{measure, Cut, MeasureKind};
use crate::states::{DensityMatrix, StateJson};

/// Minimal separation, in both `E_in` and `E_out`, for a reported violation.
pub const VIOLATION_MARGIN: f64 = 1e-4;

/// Points evaluated between violation checks.
const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    /// Werner and pure-state grids only.
    Grid,
    /// Coarser structured grids, then seeded random states.
    Random,
}

impl fmt::Display for SearchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStrategy::Grid => "grid",
            SearchStrategy::Random => "random",
        })
    }
}

impl FromStr for SearchStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(SearchStrategy::Grid),
            "random" => Ok(SearchStrategy::Random),
            _ => Err(Error::Parse(format!("unknown search strategy '{s}'"))),
        }
    }
}

/// Two states whose order under `E` is reversed by the channel:
/// `E(ρ1) > E(ρ2) + margin` yet `E(ρ1') < E(ρ2') - margin`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationCertificate {
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub origin1: (Family, f64),
    pub origin2: (Family, f64),
    /// The local qubit channel, acting on the first qubit.
    pub channel: KrausChannel,
    pub kind: MeasureKind,
    pub e_in1: f64,
    pub e_in2: f64,
    pub e_out1: f64,
    pub e_out2: f64,
    pub margin: f64,
    /// Largest margin the reported pair actually attains.
    pub achieved_margin: f64,
}

impl ViolationCertificate {
    /// Recomputes all four measure values from the stored states and checks
    /// the strict violation with the stored margin.
    pub fn verify(&self) -> Result<bool> {
        let pair = extend_to_pair(&self.channel)?;
        let cut = Cut::first();
        let e = |rho: &DensityMatrix| measure(self.kind, rho, &cut).map(|v| v.value);
        let in1 = e(&self.rho1)?;
        let in2 = e(&self.rho2)?;
        let out1 = e(&pair.apply(&self.rho1)?)?;
        let out2 = e(&pair.apply(&self.rho2)?)?;
        Ok(in1 > in2 + self.margin && out1 < out2 - self.margin)
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            measure: self.kind,
            rho1: self.rho1.to_json(),
            rho2: self.rho2.to_json(),
            origin1: Origin {
                family: self.origin1.0,
                param: self.origin1.1,
            },
            origin2: Origin {
                family: self.origin2.0,
                param: self.origin2.1,
            },
            channel: self.channel.to_json(),
            e_in1: self.e_in1,
            e_in2: self.e_in2,
            e_out1: self.e_out1,
            e_out2: self.e_out2,
            margin: self.margin,
            achieved_margin: self.achieved_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub family: Family,
    pub param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub measure: MeasureKind,
    pub rho1: StateJson,
    pub rho2: StateJson,
    pub origin1: Origin,
    pub origin2: Origin,
    pub channel: ChannelJson,
    pub e_in1: f64,
    pub e_in2: f64,
    pub e_out1: f64,
    pub e_out2: f64,
    pub margin: f64,
    pub achieved_margin: f64,
}

fn search_plan(strategy: SearchStrategy, budget: usize) -> Vec<(Family, f64)> {
    let (structured, random) = match strategy {
        SearchStrategy::Grid => (budget, 0),
        SearchStrategy::Random => (budget / 2, budget - budget / 2),
    };
    let werner_n = structured.div_ceil(2);
    let pure_n = structured - werner_n;
    let mut plan: Vec<(Family, f64)> = Vec::with_capacity(budget);
    plan.extend(
        grid_params(werner_n)
            .into_iter()
            .map(|p| (Family::Werner, p)),
    );
    plan.extend(grid_params(pure_n).into_iter().map(|p| (Family::Pure, p)));
    plan.extend((0..random).map(|i| (Family::Random, i as f64)));
    plan
}

/// Index pair `(hi, lo)` with `e_in[hi] >= e_in[lo] + m` and
/// `e_out[lo] >= e_out[hi] + m`, if one exists.
fn pair_with_margin(points: &[DiagramPoint], by_e_in: &[usize], m: f64) -> Option<(usize, usize)> {
    // prefix_best[k]: index of max e_out among by_e_in[..=k]
    let mut prefix_best = Vec::with_capacity(by_e_in.len());
    let mut best = by_e_in[0];
    for &i in by_e_in {
        if points[i].e_out.value > points[best].e_out.value {
            best = i;
        }
        prefix_best.push(best);
    }
    for (pos, &hi) in by_e_in.iter().enumerate() {
        let limit = points[hi].e_in.value - m;
        // number of points with e_in <= limit among the sorted prefix
        let count = by_e_in[..pos].partition_point(|&j| points[j].e_in.value <= limit);
        if count == 0 {
            continue;
        }
        let lo = prefix_best[count - 1];
        if points[lo].e_out.value >= points[hi].e_out.value + m {
            return Some((hi, lo));
        }
    }
    None
}

fn pair_margin(points: &[DiagramPoint], hi: usize, lo: usize) -> f64 {
    (points[hi].e_in.value - points[lo].e_in.value)
        .min(points[lo].e_out.value - points[hi].e_out.value)
}

/// Searches for a pair of two-qubit states whose `E`-order the unilocal
/// channel reverses. Evaluates at most `budget` states, structured families
/// first; returns `None` when no pair with margin `VIOLATION_MARGIN` turns up.
/// Among the points evaluated by the time a violation first appears, the
/// pair with the largest margin is reported.
pub fn find_violation(
    channel: &KrausChannel,
    kind: MeasureKind,
    strategy: SearchStrategy,
    budget: usize,
    seed: u64,
) -> Result<Option<ViolationCertificate>> {
    check_measure(kind)?;
    if budget == 0 {
        return Err(Error::Domain("search budget must be at least 1".into()));
    }
    let pair = extend_to_pair(channel)?;
    let plan = search_plan(strategy, budget);
    let mut points: Vec<DiagramPoint> = Vec::with_capacity(plan.len());
    let mut states: Vec<DensityMatrix> = Vec::with_capacity(plan.len());

    for chunk in plan.chunks(CHUNK) {
        let evaluated = chunk
            .par_iter()
            .map(|&(family, param)| {
                let rho = family.state(param, seed)?;
                let point = DiagramPoint::evaluate(family, param, &rho, &pair, kind)?;
                Ok((point, rho))
            })
            .collect::<Result<Vec<_>>>()?;
        for (p, rho) in evaluated {
            points.push(p);
            states.push(rho);
        }

        let mut by_e_in: Vec<usize> = (0..points.len()).collect();
        by_e_in.sort_by(|&a, &b| {
            points[a]
                .e_in
                .value
                .total_cmp(&points[b].e_in.value)
                .then(a.cmp(&b))
        });
        let Some(mut found) = pair_with_margin(&points, &by_e_in, VIOLATION_MARGIN * (1.0 + 1e-9))
        else {
            continue;
        };
        // widen the margin as far as the evaluated points allow
        let (mut lo_m, mut hi_m) = (pair_margin(&points, found.0, found.1), 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo_m + hi_m);
            match pair_with_margin(&points, &by_e_in, mid) {
                Some(p) => {
                    found = p;
                    lo_m = pair_margin(&points, p.0, p.1);
                }
                None => hi_m = mid,
            }
        }
        let (hi, lo) = found;
        let cert = ViolationCertificate {
            rho1: states[hi].clone(),
            rho2: states[lo].clone(),
            origin1: (points[hi].family, points[hi].param),
            origin2: (points[lo].family, points[lo].param),
            channel: channel.clone(),
            kind,
            e_in1: points[hi].e_in.value,
            e_in2: points[lo].e_in.value,
            e_out1: points[hi].e_out.value,
            e_out2: points[lo].e_out.value,
            margin: VIOLATION_MARGIN,
            achieved_margin: lo_m,
        };
        return Ok(Some(cert));
    }
    Ok(None)
}
