mod common;

use aztec_core::exact_count::{count_ar_defects, count_rbar, CountMode};
use aztec_core::match_oracle::{count_matchings, rbar_graph, region_graph};
use common::{rbar_count, region_count};
use proptest::prelude::*;
use rug::Integer;

fn labels(n: u64) -> impl Strategy<Value = (u64, Vec<i64>, Vec<i64>)> {
    (1..=n, 0..=2u64, 0..=2u64).prop_flat_map(|(n, k, l)| {
        let l = l.min(n);
        let len = 2 * n + k - l;
        Just((1..=len as i64).collect::<Vec<_>>()).prop_shuffle().prop_map(move |v| {
            let mut h = v[..k as usize].to_vec();
            let mut s = v[k as usize..(k + l) as usize].to_vec();
            h.sort();
            s.sort();
            (n, h, s)
        })
    })
}

#[test]
fn plain_rectangles() {
    // AR_{2n,2n} is the Aztec diamond of order 2n
    for n in 1..=3u64 {
        let want = Integer::from(1) << (n * (2 * n + 1)) as u32;
        let got = count_ar_defects(n, &[], &[], CountMode::Exact, 0).unwrap();
        assert_eq!(got.exact(), Some(&want));
        assert_eq!(region_count(n as usize, &[], &[]), want);
    }
}

#[test]
fn wide_rbar_instance() {
    assert_eq!(count_rbar(5, 9, &[1, 2, 4, 7, 9]).unwrap(), 34_406_400);
    assert_eq!(rbar_count(5, 9, &[1, 2, 4, 7, 9]), 34_406_400);
}

#[test]
fn log_mode_matches_exact() {
    let exact = count_ar_defects(6, &[3, 9], &[5], CountMode::Exact, 0).unwrap();
    let log = count_ar_defects(6, &[3, 9], &[5], CountMode::Log, 40).unwrap();
    let want = rug::Float::with_val(200, exact.exact().unwrap()).ln();
    let diff = rug::Float::with_val(200, log.log().unwrap() - &want).abs();
    assert!(diff < 1e-30, "{diff}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn formula_equals_both_oracles((n, h, s) in labels(3)) {
        let formula = count_ar_defects(n, &h, &s, CountMode::Exact, 0).unwrap();
        let scan = region_count(n as usize, &h, &s);
        let rows = count_matchings(&region_graph(n as usize, &h, &s).unwrap()).unwrap();
        prop_assert_eq!(formula.exact(), Some(&scan));
        prop_assert_eq!(rows, scan);
    }

    #[test]
    fn rbar_formula((m, n, t) in (1..=3u64, 0..=3u64).prop_flat_map(|(m, extra)| {
        let n = m + extra;
        Just((1..=n as i64).collect::<Vec<_>>()).prop_shuffle().prop_map(move |v| {
            let mut t = v[..m as usize].to_vec();
            t.sort();
            (m, n, t)
        })
    })) {
        let formula = count_rbar(m, n, &t).unwrap();
        prop_assert_eq!(&formula, &rbar_count(m as usize, n as usize, &t));
        prop_assert_eq!(formula, count_matchings(&rbar_graph(m as usize, n as usize, &t).unwrap()).unwrap());
    }
}
