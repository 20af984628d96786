//! Closed form of `lim_{n→∞} M(AR(c1)) / M(AR(c2))` for two configurations
//! of equal charge placed in the same growing window.
//!
//! Outside the hull of all defects both O/E strings are the same step-2
//! progressions, so every factor of the Vandermonde products that involves
//! only tail points cancels.  Cross factors between a hull point `x` and a
//! tail `l0, l0-2, ...` (or `r0, r0+2, ...`) telescope into `Γ((x-l0)/2)`
//! (resp. `Γ((r0-x)/2)`) up to powers of the tail length that cancel
//! between the two configurations.

use rug::Float;

use crate::error::{Error, Result};
use crate::exact_value::ExactValue;
use crate::hist::{blocks_of, Hist};
use crate::lattice::{DefectConfig, Kind};

/// Largest hull span handled before refusing.
pub const SPAN_CAP: i64 = 1 << 22;

struct Strings {
    o: Vec<i64>,
    e: Vec<i64>,
    /// rank parity of the first free cell after the hull
    tail_rank: u64,
}

fn hull_strings(c: &DefectConfig, lo: i64, hi: i64) -> Strings {
    let mut o = Vec::new();
    let mut e = Vec::new();
    let mut rank = lo.rem_euclid(2) as u64;
    for x in lo..=hi {
        match c.kind_at(x) {
            Some(Kind::Hole) => {}
            Some(Kind::Separation) => {
                o.push(x);
                e.push(x);
            }
            None => {
                if rank.is_multiple_of(2) {
                    o.push(x);
                } else {
                    e.push(x);
                }
                rank += 1;
            }
        }
    }
    Strings { o, e, tail_rank: rank % 2 }
}

/// Histogram of the limit ratio `c1 / c2`.
pub fn limit_ratio_hist(c1: &DefectConfig, c2: &DefectConfig) -> Result<Hist> {
    if c1.charge() != c2.charge() {
        return Err(Error::Precondition("limit ratio needs equal charges".into()));
    }
    let pts: Vec<i64> = c1.support().into_iter().chain(c2.support()).chain([0]).collect();
    let lo = pts.iter().min().unwrap() - 1;
    let hi = pts.iter().max().unwrap() + 1;
    if hi - lo > SPAN_CAP {
        return Err(Error::Schedule(format!("hull span {} exceeds {}", hi - lo, SPAN_CAP)));
    }
    let s1 = hull_strings(c1, lo, hi);
    let s2 = hull_strings(c2, lo, hi);
    debug_assert_eq!(s1.tail_rank, s2.tail_rank);
    let mut h = Hist::new();
    for (which, parity) in [(0usize, 0i64), (1, 1)] {
        // left tail: cells below lo with rank parity `parity` (rank ≡ x)
        let l0 = if (lo - 1).rem_euclid(2) == parity { lo - 1 } else { lo - 2 };
        let first_right = if s1.tail_rank as i64 == parity { hi + 1 } else { hi + 2 };
        for (s, w) in [(&s1, 1i128), (&s2, -1i128)] {
            let inside = if which == 0 { &s.o } else { &s.e };
            h.add_vandermonde(&blocks_of(inside), w);
            for &x in inside {
                h.add_gamma_half((x - l0) as u64, -w);
                h.add_gamma_half((first_right - x) as u64, -w);
            }
        }
    }
    h.pow2 += c2.seps().len() as i128 - c1.seps().len() as i128;
    Ok(h)
}

/// Exact correlation of a charge-zero configuration.
pub fn balanced_limit(c: &DefectConfig) -> Result<ExactValue> {
    if c.charge() != 0 {
        return Err(Error::Precondition("balanced limit needs charge 0".into()));
    }
    Ok(limit_ratio_hist(c, &DefectConfig::default())?.finalize().to_exact())
}

/// Natural log of the correlation of a charge-zero configuration.
pub fn balanced_limit_ln(c: &DefectConfig, prec: u32) -> Result<Float> {
    if c.charge() != 0 {
        return Err(Error::Precondition("balanced limit needs charge 0".into()));
    }
    Ok(limit_ratio_hist(c, &DefectConfig::default())?.finalize().ln(prec))
}
