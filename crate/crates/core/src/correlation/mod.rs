//! The correlation ω̄ by three routes: exact move chains ending in a
//! nice-support closed form, finite-region limits, and the Coulomb-law
//! predictor.  Also the cluster transforms.

mod engine;
mod limits;
mod planner;

use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_count::count_hist_coords;
use crate::exact_value::{pochhammer, ExactValue};
use crate::kernels::coulomb_e;
use crate::lattice::{translate, Cluster, Defect, DefectConfig, Kind};

pub use engine::{balanced_limit, balanced_limit_ln, limit_ratio_hist, SPAN_CAP};
pub use limits::{
    corr_limit_balanced, corr_limit_charged, BalancedOptions, ChargedOptions, ChargedStrategy, InnerLimit,
    LimitEstimate, LimitJson,
};
pub use planner::{plan_moves, MovePlan, PlanStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NiceKind {
    None,
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterInfo {
    pub cluster: DefectConfig,
    pub charge: i64,
    pub support: Vec<i64>,
    pub nice_kind: NiceKind,
}

pub fn cluster_info(cluster: &DefectConfig) -> ClusterInfo {
    let support = cluster.support();
    ClusterInfo { cluster: cluster.clone(), charge: charge(cluster), nice_kind: nice_kind(&support), support }
}

/// Holes minus separations.
pub fn charge(cluster: &DefectConfig) -> i64 {
    cluster.charge()
}

/// Classifies a sorted support as a union of doublets `{2s+1, 2s+2}`,
/// optionally followed by a singleton `2s+1` to their right.
pub fn nice_kind(support: &[i64]) -> NiceKind {
    let pairs = support.len() / 2;
    for i in 0..pairs {
        let a = support[2 * i];
        if a.rem_euclid(2) != 1 || support[2 * i + 1] != a + 1 {
            return NiceKind::None;
        }
    }
    if support.len().is_multiple_of(2) {
        return NiceKind::Even;
    }
    match support.last() {
        Some(&x) if x.rem_euclid(2) == 1 => NiceKind::Odd,
        _ => NiceKind::None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Compress,
    Standardize,
    Canonical,
}

pub fn transform(config: &DefectConfig, kind: TransformKind) -> Result<DefectConfig> {
    match kind {
        TransformKind::Compress => compress(config),
        TransformKind::Standardize => standardize(config),
        TransformKind::Canonical => canonical(config),
    }
}

fn rebuild(defects: Vec<Defect>, names: Option<Vec<(String, Vec<i64>)>>) -> Result<DefectConfig> {
    let mut sorted = defects.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0].pos == w[1].pos) {
        return Err(Error::Overlap(format!("coordinate {} used twice", w[0].pos)));
    }
    let c = DefectConfig::new(defects)?;
    match names {
        None => Ok(c),
        Some(ns) => c.with_clusters(ns.into_iter().map(|(name, coords)| Cluster { name, coords }).collect()),
    }
}

fn cluster_names(config: &DefectConfig) -> Option<Vec<String>> {
    config.clusters().map(|cs| cs.iter().map(|c| c.name.clone()).collect())
}

fn compress(config: &DefectConfig) -> Result<DefectConfig> {
    let names = cluster_names(config);
    let mut all = Vec::new();
    let mut groups = Vec::new();
    for (idx, part) in config.cluster_configs().iter().enumerate() {
        let Some(start) = part.min_pos() else { continue };
        let mut coords = Vec::new();
        for (i, d) in part.defects().iter().enumerate() {
            let pos = start + i as i64;
            all.push(Defect { pos, kind: d.kind });
            coords.push(pos);
        }
        if let Some(ns) = &names {
            groups.push((ns[idx].clone(), coords));
        }
    }
    rebuild(all, names.map(|_| groups))
}

fn standardize(config: &DefectConfig) -> Result<DefectConfig> {
    let parts = config.cluster_configs();
    let mut ranges: Vec<(i64, i64)> =
        parts.iter().filter_map(|p| Some((p.min_pos()?, p.max_pos()?))).collect();
    ranges.sort();
    if ranges.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(Error::Precondition("standardize needs non-interleaved clusters".into()));
    }
    let k = config.holes().len();
    let support = config.support();
    let out = config.with_kinds(|x| {
        let rank = support.binary_search(&x).unwrap();
        if rank < k {
            Kind::Hole
        } else {
            Kind::Separation
        }
    });
    Ok(out)
}

struct NiceShape {
    doublets: Vec<i64>,
    singleton: Option<i64>,
}

fn nice_shape(config: &DefectConfig) -> Result<NiceShape> {
    let support = config.support();
    let kind = nice_kind(&support);
    if kind == NiceKind::None {
        return Err(Error::Precondition(format!("support of {config} is not nice")));
    }
    let doublets = support.chunks(2).filter(|c| c.len() == 2).map(|c| c[0]).collect();
    let singleton = if kind == NiceKind::Odd { support.last().copied() } else { None };
    Ok(NiceShape { doublets, singleton })
}

/// The canonical rearrangement: the first `i` doublets carry two defects of
/// the kind in excess, the remaining doublets a hole then a separation, and
/// a singleton takes the excess kind.
fn canonical(config: &DefectConfig) -> Result<DefectConfig> {
    let shape = nice_shape(config)?;
    let q = config.charge();
    let excess = if q >= 0 { Kind::Hole } else { Kind::Separation };
    let doubled = if shape.singleton.is_some() { (q.abs() - 1) / 2 } else { q.abs() / 2 } as usize;
    let mut out = Vec::new();
    for (j, &a) in shape.doublets.iter().enumerate() {
        let (ka, kb) = if j < doubled { (excess, excess) } else { (Kind::Hole, Kind::Separation) };
        out.push(Defect { pos: a, kind: ka });
        out.push(Defect { pos: a + 1, kind: kb });
    }
    if let Some(x) = shape.singleton {
        out.push(Defect { pos: x, kind: excess });
    }
    DefectConfig::new(out)
}

/// Holes on the first entry of each doublet and on the singleton,
/// separations on the second entry of each doublet.
fn dipole_pattern(shape: &NiceShape) -> DefectConfig {
    let mut out = Vec::new();
    for &a in &shape.doublets {
        out.push(Defect { pos: a, kind: Kind::Hole });
        out.push(Defect { pos: a + 1, kind: Kind::Separation });
    }
    if let Some(x) = shape.singleton {
        out.push(Defect { pos: x, kind: Kind::Hole });
    }
    DefectConfig::new(out).expect("distinct positions")
}

fn two_pow_halves(e: i64) -> ExactValue {
    ExactValue::from_prime_quarters([(2u64, 2 * e)])
}

/// Closed form on nice support.
pub fn corr_nice_support(config: &DefectConfig) -> Result<ExactValue> {
    let shape = nice_shape(config)?;
    let q = config.charge();
    let holes = config.holes().len() as i64;
    let seps = config.seps().len() as i64;
    let energy = coulomb_e(&dipole_pattern(&shape)) * coulomb_e(config);
    let Some(single) = shape.singleton else {
        let (pow2_halves, k, i) = if q >= 0 {
            let i = q / 2;
            (i * (i - 1), seps, i)
        } else {
            let i = -q / 2;
            (i * (i + 1), holes, i)
        };
        return Ok(two_pow_halves(pow2_halves) * ExactValue::pi_pow_halves(-2 * (k + i)) * energy);
    };
    let s = (single - 1) / 2;
    let mut poch = Rational::from(1);
    let half = Rational::from((1, 2));
    for &a in &shape.doublets {
        let r = (s - (a - 1) / 2) as u64;
        let h = pochhammer(&half, r);
        poch *= Rational::from(&h * &h);
        poch /= pochhammer(&Rational::from(1), r) * pochhammer(&Rational::from(1), r - 1);
    }
    let pref = if q > 0 {
        let i = (q - 1) / 2;
        two_pow_halves(i * i) * ExactValue::w()
    } else {
        let i = (-q - 1) / 2;
        two_pow_halves(i * (i + 2) + 1) * ExactValue::w()
    };
    Ok(pref * ExactValue::from_rational(&poch)? * energy)
}

/// Exact correlation through the default move plan.
pub fn corr_exact(config: &DefectConfig) -> Result<ExactValue> {
    corr_exact_with(config, PlanStrategy::Greedy)
}

pub fn corr_exact_with(config: &DefectConfig, strategy: PlanStrategy) -> Result<ExactValue> {
    let plan = plan_moves(&config.without_clusters(), strategy)?;
    Ok(plan.ratio * corr_nice_support(&plan.nice)?)
}

/// Reference with holes `0..k` followed by separations `k..k+l`.
pub fn compact_reference(k: usize, l: usize) -> DefectConfig {
    let holes: Vec<i64> = (0..k as i64).collect();
    let seps: Vec<i64> = (k as i64..(k + l) as i64).collect();
    DefectConfig::from_sets(&holes, &seps).expect("distinct")
}

/// `M(AR(config)) / M(AR(reference))` at size `n`.
pub fn corr_tilde_finite(config: &DefectConfig, n: u64) -> Result<Rational> {
    let reference = compact_reference(config.holes().len(), config.seps().len());
    let mut h = count_hist_coords(n, config)?;
    h.merge(&count_hist_coords(n, &reference)?, -1);
    h.finalize().to_rational()
}

/// Doublet-family ratio `M(AD_{2n}(H,S)) / M(AD_{2n})` for holes at labels
/// `2s_i+1` and separations at `2s_i+2`.
pub fn doublet_family_ratio(n: u64, s: &[u64]) -> Result<Rational> {
    let mut sorted = s.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.last().is_some_and(|&x| x >= n) {
        return Err(Error::InvalidRegion(format!("need distinct s_i below {n}")));
    }
    let half = Rational::from((1, 2));
    let one = Rational::from(1);
    let mut v = Rational::from(1);
    for &si in &sorted {
        v *= pochhammer(&half, si + 1) * pochhammer(&half, n - si - 1);
        v /= pochhammer(&one, si) * pochhammer(&one, n - si - 1);
    }
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let g = 2 * (sorted[j] - sorted[i]) as i64;
            v *= Rational::from((g * g, (g - 1) * (g + 1)));
        }
    }
    Ok(v)
}

/// `∏ ω̄(O_i) · ∏_{i<j} (√2 (p_j - p_i))^{q_i q_j / 2}` with each cluster
/// translated so that its leftmost defect sits at `p_i`.
pub fn coulomb_predict(clusters: &[(DefectConfig, i64)]) -> Result<ExactValue> {
    let mut placed = Vec::new();
    for (c, p) in clusters {
        let Some(lo) = c.min_pos() else { continue };
        placed.push((translate(c, p - lo), *p));
    }
    for w in placed.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::Precondition("cluster positions must increase".into()));
        }
        if w[0].0.max_pos() >= w[1].0.min_pos() {
            return Err(Error::Overlap(format!("clusters at {} and {} overlap", w[0].1, w[1].1)));
        }
    }
    let root2 = ExactValue::from_u64(2).sqrt()?;
    let mut v = ExactValue::one();
    for (c, _) in &placed {
        v = v * corr_exact(c)?;
    }
    for i in 0..placed.len() {
        for j in i + 1..placed.len() {
            let e = placed[i].0.charge() * placed[j].0.charge();
            let dist = root2.clone() * ExactValue::from_i64(placed[j].1 - placed[i].1);
            v = v * dist.pow_frac(e, 2)?;
        }
    }
    Ok(v)
}
