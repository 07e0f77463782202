//! Coordination scoring from co-retweet behavior.
//!
//! Each account is a TF-IDF vector over the tweets it retweeted. Pairs of
//! accounts are scored by cosine similarity, and the accounts touched by the
//! top-percentile edges of the resulting similarity network are labeled
//! coordinated.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::model::{CoordinationLabeling, ModelError, RetweetEvent, SimilarityEdge, TweetId, UserId};

pub const DEFAULT_PERCENTILE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct UserVector {
    pub user: UserId,
    pub weights: BTreeMap<TweetId, f64>,
}

impl UserVector {
    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// `tf(u, t)` is the raw retweet count, `idf(t) = ln(N / df(t))` with `N`
/// the number of distinct retweeters. Zero weights are dropped, so a tweet
/// retweeted by everybody disappears from every vector.
pub fn build_user_vectors(events: &[RetweetEvent]) -> Vec<UserVector> {
    let mut tf: BTreeMap<&UserId, BTreeMap<&TweetId, u32>> = BTreeMap::new();
    for ev in events {
        *tf.entry(&ev.retweeter)
            .or_default()
            .entry(&ev.original_tweet)
            .or_default() += 1;
    }
    let mut df: HashMap<&TweetId, u32> = HashMap::new();
    for tweets in tf.values() {
        for &t in tweets.keys() {
            *df.entry(t).or_default() += 1;
        }
    }
    let n_users = tf.len() as f64;
    tf.into_iter()
        .map(|(user, tweets)| {
            let weights = tweets
                .into_iter()
                .filter_map(|(t, count)| {
                    let w = count as f64 * (n_users / df[t] as f64).ln();
                    (w > 0.0).then(|| (t.clone(), w))
                })
                .collect();
            UserVector {
                user: user.clone(),
                weights,
            }
        })
        .collect()
}

/// Cosine similarity over the sparse intersection; 0 if either vector is 0.
pub fn cosine_similarity(a: &UserVector, b: &UserVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.weights.len() <= b.weights.len() {
        (a, b)
    } else {
        (b, a)
    };
    let dot: f64 = small
        .weights
        .iter()
        .filter_map(|(t, w)| large.weights.get(t).map(|v| w * v))
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// All pairs with positive similarity, as `(i, j, sim)` with `i < j`
/// indexing into `vectors`. Only pairs that share a retweeted tweet are
/// visited, through an inverted index tweet → users.
pub fn positive_pairs(vectors: &[UserVector]) -> Vec<(usize, usize, f64)> {
    let mut tweet_ids: HashMap<&TweetId, usize> = HashMap::new();
    let mut postings: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(vectors.len());
    for (ui, v) in vectors.iter().enumerate() {
        let mut row = Vec::with_capacity(v.weights.len());
        for (t, &w) in &v.weights {
            let ti = *tweet_ids.entry(t).or_insert_with(|| {
                postings.push(Vec::new());
                postings.len() - 1
            });
            postings[ti].push((ui, w));
            row.push((ti, w));
        }
        row.sort_unstable_by_key(|&(ti, _)| ti);
        rows.push(row);
    }
    let norms: Vec<f64> = vectors.iter().map(UserVector::norm).collect();

    (0..vectors.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut dots: HashMap<usize, f64> = HashMap::new();
            for &(ti, wi) in &rows[i] {
                for &(j, wj) in &postings[ti] {
                    if j > i {
                        *dots.entry(j).or_insert(0.0) += wi * wj;
                    }
                }
            }
            let mut out: Vec<(usize, usize, f64)> = dots
                .into_iter()
                .filter_map(|(j, dot)| {
                    let s = (dot / (norms[i] * norms[j])).clamp(0.0, 1.0);
                    (s > 0.0).then_some((i, j, s))
                })
                .collect();
            out.sort_unstable_by_key(|&(_, j, _)| j);
            out.into_iter()
        })
        .collect()
}

/// Number of edges kept for a percentile of `e_pos` positive edges:
/// `ceil(percentile / 100 * e_pos)`, robust to float noise at integers.
fn retained_count(percentile: f64, e_pos: usize) -> usize {
    let x = percentile / 100.0 * e_pos as f64;
    let r = x.round();
    let k = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (k as usize).min(e_pos)
}

/// Labels accounts on the `percentile` top edges of the similarity network.
///
/// Zero-similarity pairs are non-edges. Every edge tied with the weakest
/// kept edge is also kept.
pub fn label_coordinated(
    vectors: &[UserVector],
    percentile: f64,
) -> Result<CoordinationLabeling, ModelError> {
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(ModelError::BadPercentile(percentile));
    }
    let nonzero = vectors.iter().filter(|v| v.norm() > 0.0).count();
    if nonzero < 2 {
        log::warn!("coordination: {nonzero} user(s) with a non-zero vector; nobody labeled");
        return CoordinationLabeling::new(Vec::new(), BTreeMap::new(), percentile, true);
    }

    let mut pairs = positive_pairs(vectors);
    let mut max_similarity: BTreeMap<UserId, f64> = BTreeMap::new();
    for &(i, j, s) in &pairs {
        for k in [i, j] {
            let e = max_similarity.entry(vectors[k].user.clone()).or_insert(0.0);
            if s > *e {
                *e = s;
            }
        }
    }

    pairs.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then_with(|| vectors[a.0].user.cmp(&vectors[b.0].user))
            .then_with(|| vectors[a.1].user.cmp(&vectors[b.1].user))
    });
    let k = retained_count(percentile, pairs.len());
    let retained = if k == 0 {
        Vec::new()
    } else {
        let cut = pairs[k - 1].2;
        pairs
            .iter()
            .take_while(|p| p.2 >= cut)
            .map(|&(i, j, s)| {
                let (a, b) = (&vectors[i].user, &vectors[j].user);
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                SimilarityEdge {
                    a: a.clone(),
                    b: b.clone(),
                    similarity: s,
                }
            })
            .collect()
    };
    CoordinationLabeling::new(retained, max_similarity, percentile, false)
}
