mod common;

use std::collections::BTreeMap;

use cascade_forge::cascade::group_retweets;
use cascade_forge::coordination::positive_pairs;
use cascade_forge::synth::{generate, SynthConfig};
use cascade_forge::{build_user_vectors, cosine_similarity, label_coordinated, RetweetEvent, Seed, Timestamp, UserVector};
use common::*;
use proptest::prelude::*;

fn vector(user: &str, weights: &[(u8, f64)]) -> UserVector {
    UserVector {
        user: u(user),
        weights: weights.iter().map(|&(t, w)| (tid(&format!("t{t}")), w)).collect(),
    }
}

fn weights() -> impl Strategy<Value = Vec<(u8, f64)>> {
    prop::collection::vec((0u8..12, 0.1f64..5.0), 0..8)
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_matches_dense(a in weights(), b in weights()) {
        let va = vector("a", &a);
        let vb = vector("b", &b);
        let ab = cosine_similarity(&va, &vb);
        prop_assert_eq!(ab, cosine_similarity(&vb, &va));
        prop_assert!((ab - dense_cosine(&va.weights, &vb.weights)).abs() <= 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn inverted_index_finds_every_positive_pair(vs in prop::collection::vec(weights(), 2..12)) {
        let vectors: Vec<_> = vs.iter().enumerate().map(|(i, w)| vector(&format!("u{i:02}"), w)).collect();
        let mut want = BTreeMap::new();
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                let s = dense_cosine(&vectors[i].weights, &vectors[j].weights);
                if s > 0.0 {
                    want.insert((i, j), s);
                }
            }
        }
        let got = positive_pairs(&vectors);
        prop_assert_eq!(got.len(), want.len());
        for (i, j, s) in got {
            let key = (i.min(j), i.max(j));
            prop_assert!((want[&key] - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn coordinated_set_grows_with_percentile(vs in prop::collection::vec(weights(), 2..12), p in 1.0f64..60.0) {
        let vectors: Vec<_> = vs.iter().enumerate().map(|(i, w)| vector(&format!("u{i:02}"), w)).collect();
        let low = label_coordinated(&vectors, p).unwrap();
        let high = label_coordinated(&vectors, (p * 1.5).min(100.0)).unwrap();
        prop_assert!(low.coordinated.is_subset(&high.coordinated));
        prop_assert!(low.retained.len() <= high.retained.len());
    }
}

#[test]
fn one_exceptional_pair_at_median() {
    let vectors = vec![
        vector("a", &[(1, 1.0)]),
        vector("b", &[(1, 1.0)]),
        vector("c", &[(2, 1.0)]),
        vector("d", &[(3, 1.0)]),
    ];
    let l = label_coordinated(&vectors, 50.0).unwrap();
    assert_eq!(l.coordinated.iter().map(|u| u.as_str()).collect::<Vec<_>>(), ["a", "b"]);
}

#[test]
fn idf_drops_tweets_everybody_retweeted() {
    let ev = |who: &str, t: &str| RetweetEvent::new(u(who), tid(t), u("root"), Timestamp::from_unix(1)).unwrap();
    let vs = build_user_vectors(&[ev("a", "x"), ev("b", "x"), ev("a", "y"), ev("a", "y")]);
    assert!(vs[1].weights.is_empty());
    let w = vs[0].weights[&tid("y")];
    assert!((w - 2.0 * 2f64.ln()).abs() < 1e-15);
}

#[test]
fn planted_cohort_outranks_everybody_else() {
    let cfg = SynthConfig {
        n_users: 1000,
        coordinated_fraction: 0.01,
        pool_size: 50,
        exclusive_pool: true,
        seed: Seed(11),
        ..SynthConfig::default()
    };
    let out = generate(&cfg).unwrap();
    assert_eq!(out.truth.len(), 10);
    let (groups, _) = group_retweets(&out.tweets);
    let events: Vec<_> = groups.into_iter().flat_map(|g| g.retweets).collect();
    let vectors = build_user_vectors(&events);
    let mut cohort_min = f64::INFINITY;
    let mut other_max = 0f64;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let s = dense_cosine(&vectors[i].weights, &vectors[j].weights);
            let both = out.truth.contains(&vectors[i].user) && out.truth.contains(&vectors[j].user);
            if both {
                cohort_min = cohort_min.min(s);
            } else {
                other_max = other_max.max(s);
            }
        }
    }
    assert!(cohort_min > other_max, "cohort {cohort_min} vs others {other_max}");
}

#[test]
fn without_a_cohort_only_top_edges_are_labeled() {
    let cfg = SynthConfig {
        coordinated_fraction: 0.0,
        ..SynthConfig::default()
    };
    let out = generate(&cfg).unwrap();
    assert!(out.truth.is_empty());
    // the cut still keeps its top edges; only their endpoints get labeled
    let (groups, _) = group_retweets(&out.tweets);
    let events: Vec<_> = groups.into_iter().flat_map(|g| g.retweets).collect();
    let l = label_coordinated(&build_user_vectors(&events), 1.0).unwrap();
    assert!(l.coordinated.len() <= 2 * l.retained.len());
    assert!(l.coordinated.iter().all(|u| !out.truth.contains(u)));
}
