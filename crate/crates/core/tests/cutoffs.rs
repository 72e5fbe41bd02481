use tag_core::cache::CutoffCache;
use tag_core::cutoffs::{enumerate_cutoffs_cached, enumerate_intervals, is_cutoff, next_cutoff_search};
use tag_core::{
    enumerate_cutoffs, generate, next_cutoff, q_sequence, stable_interval, Horizon, Rational,
};

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q).unwrap()
}

fn terms(alpha: &Rational, n: usize) -> Vec<tag_core::Natural> {
    generate(alpha, Horizon::Terms(n)).unwrap().terms().to_vec()
}

#[test]
fn every_ratio_exceeds_alpha() {
    for alpha in [r(1, 1), r(2, 1), r(5, 2), r(3, 1), r(7, 2), r(43, 11), r(9, 2), r(19, 3)] {
        for point in q_sequence(&alpha, 150).unwrap() {
            assert!(point.q > alpha, "alpha {alpha}, index {}", point.index);
            assert_eq!(
                point.q,
                Rational::from(point.p_hat.clone()) / Rational::from(point.p.clone())
            );
        }
    }
}

#[test]
fn next_cutoff_is_the_first_change() {
    let mut c = Rational::one();
    while c < r(7, 1) {
        let search = next_cutoff_search(&c).unwrap();
        let next = search.cutoff.clone();
        assert!(next > c);
        let horizon = search.divergence_index + 40;
        let base = terms(&c, horizon);
        assert_ne!(terms(&next, horizon), base, "no change at {next}");
        // Points strictly inside the interval share the sequence.
        let mid = (&c + &next) / Rational::from(2u64);
        let just_below = &next - &Rational::new(1, 1_000_000_000i64).unwrap();
        for beta in [&mid, &just_below] {
            assert_eq!(terms(beta, horizon), base, "beta {beta} in [{c}, {next})");
            assert_eq!(next_cutoff(beta).unwrap(), next, "beta {beta}");
        }
        c = next;
    }
}

#[test]
fn stable_interval_from_interior_points() {
    let samples = [
        (r(10, 3), r(3, 1), r(7, 2), 4),
        (r(15, 4), r(11, 3), r(43, 11), 5),
        (r(2, 1), r(2, 1), r(5, 2), 2),
        (r(3, 2), r(1, 1), r(2, 1), 1),
        (r(44, 10), r(13, 3), r(31, 7), 7),
    ];
    for (alpha, lower, upper, degree) in samples {
        let interval = stable_interval(&alpha).unwrap();
        assert_eq!(
            (interval.lower.clone(), interval.upper.clone(), interval.degree),
            (lower, upper, degree),
            "alpha {alpha}"
        );
        assert!(interval.contains(&alpha));
    }
}

#[test]
fn one_degree_can_span_several_intervals() {
    let a = stable_interval(&r(7, 2)).unwrap();
    let b = stable_interval(&r(11, 3)).unwrap();
    assert_eq!((a.degree, b.degree), (5, 5));
    assert_ne!(a.lower, b.lower);
    assert_ne!(a.prefix, b.prefix);
}

#[test]
fn small_census_lists_integers_and_is_increasing() {
    let census = enumerate_cutoffs(&Rational::one(), &r(8, 1)).unwrap();
    assert!(census.cutoffs.windows(2).all(|w| w[0] < w[1]));
    for n in 1..=8u64 {
        assert!(census.cutoffs.contains(&Rational::from(n)));
    }
    assert_eq!(census.gamma, census.cutoffs.len());
    let tail = enumerate_cutoffs(&r(3, 1), &r(8, 1)).unwrap();
    assert_eq!(tail.gamma, census.gamma);
    assert_eq!(tail.cutoffs[0], r(3, 1));
    assert!(is_cutoff(&r(43, 11)).unwrap());
    assert!(!is_cutoff(&r(39, 10)).unwrap());
}

#[test]
fn cached_census_matches_fresh_one() {
    let bound = r(6, 1);
    let intervals = enumerate_intervals(&bound, None).unwrap();
    let mut cache = CutoffCache::new();
    cache.extend(intervals.iter().cloned());
    let dir = std::env::temp_dir().join(format!("tag-core-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cutoffs.json");
    cache.save(&path).unwrap();
    let loaded = CutoffCache::load(&path).unwrap();
    assert_eq!(loaded.len(), intervals.len());
    let cached = enumerate_cutoffs_cached(&Rational::one(), &bound, Some(&loaded)).unwrap();
    let fresh = enumerate_cutoffs(&Rational::one(), &bound).unwrap();
    assert_eq!(cached, fresh);
    assert_eq!(loaded.to_json().unwrap(), cache.to_json().unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_ranges_are_rejected() {
    assert!(enumerate_cutoffs(&r(1, 2), &r(3, 1)).is_err());
    assert!(enumerate_cutoffs(&r(4, 1), &r(3, 1)).is_err());
    assert!(next_cutoff(&r(1, 2)).is_err());
}
