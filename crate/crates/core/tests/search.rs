use std::collections::{BTreeMap, BTreeSet};

use kakeya_core::bounds::theorem_threshold;
use kakeya_core::plane::{desarguesian_affine, load_plane};
use kakeya_core::search::{
    enumerate, find_witness, verify_theorem, SearchConfig, SearchError, DEFAULT_BUDGET,
};
use kakeya_core::{cover, Field};

/// Size histogram computed straight from the line equations, without the
/// plane's indexing: slope lines are {(x, mx + c)} and verticals {(c, y)}.
fn brute_force_sizes(q: u32) -> BTreeMap<u64, u64> {
    let f = Field::of_order(q).unwrap();
    let line = |class: u32, c: u32| -> Vec<(u32, u32)> {
        if class == q {
            (0..q).map(|y| (c, y)).collect()
        } else {
            (0..q).map(|x| (x, f.add(f.mul(class, x), c))).collect()
        }
    };
    let mut hist = BTreeMap::new();
    let total = (q as u64).pow(q + 1);
    for mut idx in 0..total {
        let mut pts = BTreeSet::new();
        for class in (0..=q).rev() {
            let c = (idx % q as u64) as u32;
            idx /= q as u64;
            pts.extend(line(class, c));
        }
        *hist.entry(pts.len() as u64).or_insert(0) += 1;
    }
    hist
}

fn report_hist(q: u32, reduce: bool) -> BTreeMap<u64, u64> {
    let plane = desarguesian_affine(&Field::of_order(q).unwrap());
    let r = enumerate(&plane, &SearchConfig::exhaustive().reduced(reduce)).unwrap();
    r.attained
        .iter()
        .map(|a| (a.size, a.count * r.orbit_size))
        .collect()
}

#[test]
fn exhaustive_counts_match_brute_force() {
    for q in [2, 3, 4, 5] {
        assert_eq!(report_hist(q, false), brute_force_sizes(q), "q = {q}");
    }
}

#[test]
fn reduced_counts_scale_to_full_counts() {
    for q in [2, 3, 4, 5] {
        assert_eq!(report_hist(q, true), report_hist(q, false), "q = {q}");
    }
}

#[test]
fn small_order_spectra() {
    assert_eq!(report_hist(2, false), BTreeMap::from([(3, 4), (4, 4)]));
    let h3 = report_hist(3, false);
    assert_eq!(h3.keys().next(), Some(&7));
    assert_eq!(h3.keys().last(), Some(&9));
    let plane = desarguesian_affine(&Field::of_order(4).unwrap());
    let r = enumerate(&plane, &SearchConfig::exhaustive()).unwrap();
    let above: Vec<u64> = r
        .attained_sizes()
        .into_iter()
        .filter(|&s| s >= r.theorem_cutoff)
        .collect();
    assert_eq!(r.theorem_cutoff, 13);
    assert_eq!(above, vec![13, 16]);
    assert_eq!(r.gaps, vec![14, 15]);
}

#[test]
fn theorem_conformance_small_orders() {
    for q in [2u32, 3, 4, 5, 7] {
        let plane = desarguesian_affine(&Field::of_order(q).unwrap());
        let r = enumerate(
            &plane,
            &SearchConfig::exhaustive().reduced(q >= 5).workers(4),
        )
        .unwrap();
        let s = verify_theorem(&r, &theorem_threshold(q as u64));
        assert!(s.conforms(), "q = {q}: {s:?}");
        assert_eq!(s.min_size, Some(s.desarguesian_minimum), "q = {q}");
        let qq = (q * q) as u64;
        if q >= 3 {
            assert!(
                s.q_minus_one_knot_sizes
                    .iter()
                    .all(|&n| n == qq - 2 * q as u64 + 4),
                "q = {q}"
            );
        }
    }
}

#[test]
fn q4_conformance_reports_both_intervals() {
    let plane = desarguesian_affine(&Field::of_order(4).unwrap());
    let r = enumerate(&plane, &SearchConfig::exhaustive()).unwrap();
    let s = verify_theorem(&r, &theorem_threshold(4));
    assert_eq!(s.conforming, vec![(13, 1), (16, 0)]);
}

#[test]
fn worker_count_does_not_change_reports() {
    let plane = desarguesian_affine(&Field::of_order(5).unwrap());
    let one = enumerate(&plane, &SearchConfig::exhaustive()).unwrap();
    for w in [2, 3, 7, 8] {
        assert_eq!(
            enumerate(&plane, &SearchConfig::exhaustive().workers(w)).unwrap(),
            one
        );
    }
}

#[test]
fn loaded_plane_gives_identical_unreduced_report() {
    let built = desarguesian_affine(&Field::of_order(4).unwrap());
    let loaded = load_plane(built.dump_string().as_bytes()).unwrap();
    assert_eq!(
        enumerate(&built, &SearchConfig::exhaustive()).unwrap(),
        enumerate(&loaded, &SearchConfig::exhaustive()).unwrap()
    );
    assert_eq!(
        enumerate(&built, &SearchConfig::sampled(300, 11)).unwrap(),
        enumerate(&loaded, &SearchConfig::sampled(300, 11)).unwrap()
    );
}

#[test]
fn witnesses_found_by_targeted_search() {
    let plane = desarguesian_affine(&Field::of_order(4).unwrap());
    assert_eq!(
        find_witness(&plane, 15, false, DEFAULT_BUDGET),
        Err(SearchError::NotFound(15))
    );
    assert_eq!(
        find_witness(&plane, 14, true, DEFAULT_BUDGET),
        Err(SearchError::NotFound(14))
    );
    let sel = find_witness(&plane, 10, false, DEFAULT_BUDGET).unwrap();
    assert_eq!(cover(&plane, &sel).unwrap().size(), 10);
    assert!(matches!(
        find_witness(&plane, 13, false, 10),
        Err(SearchError::BudgetExceeded {
            required: 1024,
            budget: 10
        })
    ));
}
