//! Closed-form perfect-matching counts of defected Aztec rectangles and of
//! the regions `R̄_{m,n}(T)`.

use std::collections::BTreeSet;

use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hist::{blocks_of, Hist};
use crate::lattice::{build_oe_labeling, oe_sets, DefectConfig, RegionSpec};
use crate::numeric::bits_for;

pub const EXACT_N_CAP: u64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Exact,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountResult {
    Exact(Integer),
    Log { value: Float, digits: usize },
}

impl CountResult {
    pub fn exact(&self) -> Option<&Integer> {
        match self {
            CountResult::Exact(v) => Some(v),
            _ => None,
        }
    }
    pub fn log(&self) -> Option<&Float> {
        match self {
            CountResult::Log { value, .. } => Some(value),
            _ => None,
        }
    }
}

fn to_sets(h: &[i64], s: &[i64]) -> (BTreeSet<i64>, BTreeSet<i64>) {
    (h.iter().copied().collect(), s.iter().copied().collect())
}

/// Multiplicity histogram of `M(AR_{2n,2n+k-l}(H,S))`.
pub fn count_hist(n: u64, holes: &[i64], seps: &[i64]) -> Result<Hist> {
    let (h, s) = to_sets(holes, seps);
    if h.len() != holes.len() || s.len() != seps.len() {
        return Err(Error::InvalidRegion("repeated label".into()));
    }
    let region = RegionSpec { n, k: h.len() as u64, l: s.len() as u64 };
    let lab = build_oe_labeling(region, &h, &s)?;
    Ok(hist_from_sets(n, s.len() as u64, &lab.o_set, &lab.e_set))
}

fn hist_from_sets(n: u64, l: u64, o: &[i64], e: &[i64]) -> Hist {
    let mut hist = Hist::new();
    hist.add_vandermonde(&blocks_of(o), 1);
    hist.add_vandermonde(&blocks_of(e), 1);
    hist.add_superfactorial(n, -2);
    hist.pow2 += (n * n + 2 * n) as i128 - l as i128;
    hist
}

/// Histogram of the count for a configuration given in axis coordinates,
/// placed in `AR_{2n,2n+k-l}` whose axis vertices are `-n ..= n+k-l-1`.
pub fn count_hist_coords(n: u64, config: &DefectConfig) -> Result<Hist> {
    let k = config.holes().len() as i64;
    let l = config.seps().len() as i64;
    let lo = -(n as i64);
    let hi = n as i64 + k - l - 1;
    if let (Some(a), Some(b)) = (config.min_pos(), config.max_pos()) {
        if a < lo || b > hi {
            return Err(Error::InvalidRegion(format!("defects not enclosed by window {lo}..={hi} at n = {n}")));
        }
    }
    if l as u64 > n {
        return Err(Error::InvalidRegion("2n - 2l must be nonnegative".into()));
    }
    let (o, e) = oe_sets(lo, hi, |x| config.kind_at(x));
    Ok(hist_from_sets(n, l as u64, &o, &e))
}

/// `2^{n²+2n-l} Δ(O) Δ(E) / sf(n)²` exactly (up to `cap`) or as a natural log.
pub fn count_ar_defects_capped(
    n: u64,
    holes: &[i64],
    seps: &[i64],
    mode: CountMode,
    digits: usize,
    cap: u64,
) -> Result<CountResult> {
    let hist = count_hist(n, holes, seps)?;
    match mode {
        CountMode::Exact => {
            if n > cap {
                return Err(Error::ExactCap { n, cap });
            }
            let v = hist.finalize().to_integer().expect("superfactorial division must be exact");
            Ok(CountResult::Exact(v))
        }
        CountMode::Log => Ok(CountResult::Log { value: hist.finalize().ln(bits_for(digits)), digits }),
    }
}

pub fn count_ar_defects(n: u64, holes: &[i64], seps: &[i64], mode: CountMode, digits: usize) -> Result<CountResult> {
    count_ar_defects_capped(n, holes, seps, mode, digits, EXACT_N_CAP)
}

/// `M(R̄_{m,n}(T)) = 2^{m(m+1)/2} Δ(T) / sf(m)`.
pub fn count_rbar(m: u64, n: u64, t: &[i64]) -> Result<Integer> {
    if t.len() as u64 != m || m == 0 {
        return Err(Error::InvalidRegion(format!("T must have exactly m = {m} elements")));
    }
    if t.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidRegion("T must be strictly increasing".into()));
    }
    if t[0] < 1 || t[t.len() - 1] > n as i64 {
        return Err(Error::InvalidRegion(format!("T must lie in 1..={n}")));
    }
    let mut h = Hist::new();
    h.add_vandermonde(&blocks_of(t), 1);
    h.add_superfactorial(m, -1);
    h.pow2 += (m * (m + 1) / 2) as i128;
    Ok(h.finalize().to_integer().expect("superfactorial division must be exact"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
    pub t_o: Vec<i64>,
    pub t_e: Vec<i64>,
}

/// Compares the rectangle count with `2^{n-l} M(R̄(T_o)) M(R̄(T_e))`, where
/// `T_o` and `T_e` are the O and E label sets (separations in both).
pub fn factorization_check(n: u64, holes: &[i64], seps: &[i64]) -> Result<FactorizationReport> {
    let (h, s) = to_sets(holes, seps);
    let region = RegionSpec { n, k: h.len() as u64, l: s.len() as u64 };
    let lab = build_oe_labeling(region, &h, &s)?;
    let lhs = count_ar_defects(n, holes, seps, CountMode::Exact, 0)?.exact().cloned().unwrap();
    let len = region.length() as u64;
    let rhs = Integer::from(1) << (n - region.l) as u32;
    let rhs = rhs * count_rbar(n, len, &lab.o_set)? * count_rbar(n, len, &lab.e_set)?;
    Ok(FactorizationReport {
        holds: lhs == rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        t_o: lab.o_set,
        t_e: lab.e_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(n: u64, h: &[i64], s: &[i64]) -> Integer {
        count_ar_defects(n, h, s, CountMode::Exact, 0).unwrap().exact().cloned().unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(exact(1, &[], &[]), 8);
        assert_eq!(exact(2, &[], &[]), 1024);
        assert_eq!(exact(2, &[1], &[]), 1024);
    }

    #[test]
    fn rbar_examples() {
        assert_eq!(count_rbar(1, 3, &[2]).unwrap(), 2);
        assert_eq!(count_rbar(2, 3, &[1, 3]).unwrap(), 16);
        assert_eq!(count_rbar(5, 9, &[1, 2, 4, 7, 9]).unwrap(), 34_406_400);
        assert!(count_rbar(2, 3, &[3, 1]).is_err());
    }

    #[test]
    fn factorization_small() {
        for (n, h, s) in [(1u64, vec![], vec![]), (2, vec![], vec![]), (2, vec![1], vec![])] {
            let r = factorization_check(n, &h, &s).unwrap();
            assert!(r.holds, "{r:?}");
        }
        assert_eq!(factorization_check(1, &[], &[]).unwrap().lhs, "8");
    }

    #[test]
    fn exact_cap_refuses() {
        let r = count_ar_defects_capped(5, &[], &[], CountMode::Exact, 0, 4);
        assert_eq!(r, Err(Error::ExactCap { n: 5, cap: 4 }));
    }

    #[test]
    fn disjointness_message() {
        let e = count_ar_defects(2, &[1], &[1], CountMode::Exact, 0).unwrap_err();
        assert!(e.to_string().contains("H and S must be disjoint"), "{e}");
    }
}
