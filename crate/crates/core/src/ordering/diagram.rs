use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extend_to_pair;
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::TensorShape;
use crate::measures::{measure, Cut, MeasureKind, MeasureValue};
use crate::random;
use crate::states::{random_density_with, schmidt_pure, werner, DensityMatrix};

/// Width of the `E_out` bins used to form horizontal fibers.
pub const FIBER_BIN_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `q P+ + (1 - q) I/4`, parameter `q`.
    Werner,
    /// `α|00> + √(1-α²)|11>`, parameter `α`.
    Pure,
    /// Induced-measure random states, parameter is the sample index.
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Werner => "werner",
            Family::Pure => "pure",
            Family::Random => "random",
        }
    }

    /// State for grid parameter `param` (sample index for `Random`).
    pub fn state(self, param: f64, seed: u64) -> Result<DensityMatrix> {
        match self {
            Family::Werner => werner(param),
            Family::Pure => Ok(schmidt_pure(param)?.density()),
            Family::Random => {
                let mut rng = random::rng_for(seed, param as u64);
                let rank = 1 + (random::derive_seed(seed, param as u64) % 4) as usize;
                random_density_with(&TensorShape::qubits(2), rank, &mut rng)
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "werner" => Ok(Family::Werner),
            "pure" => Ok(Family::Pure),
            "random" => Ok(Family::Random),
            _ => Err(Error::Parse(format!("unknown state family '{s}'"))),
        }
    }
}

/// One sample of the `[E_in, E_out]` diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub family: Family,
    pub param: f64,
    pub e_in: MeasureValue,
    pub e_out: MeasureValue,
}

impl DiagramPoint {
    pub(crate) fn evaluate(
        family: Family,
        param: f64,
        rho: &DensityMatrix,
        pair_channel: &KrausChannel,
        kind: MeasureKind,
    ) -> Result<Self> {
        let cut = Cut::first();
        let out = pair_channel.apply(rho)?;
        Ok(Self {
            family,
            param,
            e_in: measure(kind, rho, &cut)?,
            e_out: measure(kind, &out, &cut)?,
        })
    }
}

pub(crate) fn grid_params(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

pub(crate) fn check_measure(kind: MeasureKind) -> Result<()> {
    if kind == MeasureKind::PureEntropy {
        return Err(Error::Domain(
            "pure-state entropy is undefined on the mixed outputs of a channel".into(),
        ));
    }
    Ok(())
}

/// Evaluates `E` before and after the unilocal channel along each family.
/// Structured families use `grid` evenly spaced parameters in `[0, 1]`; the
/// random family draws `grid` seeded states.
pub fn scan_diagram(
    channel: &KrausChannel,
    kind: MeasureKind,
    families: &[Family],
    grid: usize,
    seed: u64,
) -> Result<Vec<DiagramPoint>> {
    check_measure(kind)?;
    let pair = extend_to_pair(channel)?;
    let jobs: Vec<(Family, f64)> = families
        .iter()
        .flat_map(|&f| {
            let params = match f {
                Family::Random => (0..grid).map(|i| i as f64).collect(),
                _ => grid_params(grid),
            };
            params.into_iter().map(move |p| (f, p))
        })
        .collect();
    jobs.par_iter()
        .map(|&(family, param)| {
            let rho = family.state(param, seed)?;
            DiagramPoint::evaluate(family, param, &rho, &pair, kind)
        })
        .collect()
}

/// All input values sharing one `E_out` bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizontalFiber {
    /// Half-open `[lo, hi)` interval of `E_out`.
    pub e_out_bin: (f64, f64),
    /// Distinct `E_in` values, quantized to the bin grid, ascending.
    pub e_in_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberOverlap {
    /// Indices into [`FiberReport::fibers`].
    pub lower: usize,
    pub upper: usize,
    pub shared_e_in: Vec<f64>,
    /// Neither fiber is contained in the other.
    pub proper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub fibers: Vec<HorizontalFiber>,
    pub overlaps: Vec<FiberOverlap>,
}

fn bin_of(x: f64, width: f64) -> i64 {
    (x / width).floor() as i64
}

/// Buckets points by `E_out` and lists pairs of distinct buckets that reach
/// a common (quantized) `E_in`, the seed of an ordering counterexample.
pub fn fibers(points: &[DiagramPoint], bin_width: f64) -> Result<FiberReport> {
    if points.is_empty() {
        return Err(Error::Domain(
            "fiber analysis needs at least one point".into(),
        ));
    }
    if !(bin_width > 0.0) {
        return Err(Error::Domain(format!(
            "bin width {bin_width} must be positive"
        )));
    }
    let mut buckets: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for p in points {
        buckets
            .entry(bin_of(p.e_out.value, bin_width))
            .or_default()
            .push(bin_of(p.e_in.value, bin_width));
    }
    let mut keys = Vec::new();
    let mut fibers = Vec::new();
    for (k, mut ins) in buckets {
        ins.sort_unstable();
        ins.dedup();
        fibers.push(HorizontalFiber {
            e_out_bin: (k as f64 * bin_width, (k + 1) as f64 * bin_width),
            e_in_values: ins.iter().map(|&b| b as f64 * bin_width).collect(),
        });
        keys.push(ins);
    }
    let mut overlaps = Vec::new();
    for i in 0..keys.len() {
        for j in (i + 1)..keys.len() {
            let shared: Vec<i64> = keys[i]
                .iter()
                .filter(|b| keys[j].binary_search(b).is_ok())
                .copied()
                .collect();
            if shared.is_empty() {
                continue;
            }
            overlaps.push(FiberOverlap {
                lower: i,
                upper: j,
                proper: shared.len() < keys[i].len() && shared.len() < keys[j].len(),
                shared_e_in: shared.iter().map(|&b| b as f64 * bin_width).collect(),
            });
        }
    }
    Ok(FiberReport { fibers, overlaps })
}
