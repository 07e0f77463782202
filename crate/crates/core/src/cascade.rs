//! Cascade reconstruction with the most-recent-friend rule, and the global,
//! nodal and edge-level measures computed on a reconstructed cascade.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{FriendMap, TweetRecord};
use crate::model::{Cascade, ModelError, RetweetEvent, Timestamp, TweetId, UserId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error("retweet by {retweeter} references tweet {found}, expected {expected}")]
    WrongTweet {
        retweeter: UserId,
        expected: TweetId,
        found: TweetId,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildOutcome {
    pub cascade: Cascade,
    /// Later retweets by a user already in the cascade.
    pub dropped_duplicates: usize,
}

/// Reconstructs one cascade.
///
/// Each retweeter's parent is the friend (possibly the root author) whose
/// post or retweet is the latest strictly before theirs; ties on time go to
/// the smallest user id. Retweeters with no such friend join `S`.
pub fn build_cascade(
    root_tweet: &TweetRecord,
    retweets: &[RetweetEvent],
    friends: &FriendMap,
) -> Result<BuildOutcome, CascadeError> {
    for ev in retweets {
        if ev.original_tweet != root_tweet.tweet_id {
            return Err(CascadeError::WrongTweet {
                retweeter: ev.retweeter.clone(),
                expected: root_tweet.tweet_id.clone(),
                found: ev.original_tweet.clone(),
            });
        }
    }

    let mut order: Vec<&RetweetEvent> = retweets.iter().collect();
    order.sort_by(|a, b| (a.timestamp, &a.retweeter).cmp(&(b.timestamp, &b.retweeter)));

    let root = &root_tweet.author;
    let mut posted: HashMap<&UserId, Timestamp> = HashMap::with_capacity(order.len() + 1);
    posted.insert(root, root_tweet.created_at);
    let mut timeline: Vec<(&UserId, Timestamp)> = vec![(root, root_tweet.created_at)];

    let mut members = Vec::with_capacity(order.len());
    let mut edges = Vec::new();
    let mut dropped = 0;
    for ev in order {
        let user = &ev.retweeter;
        if user == root || posted.contains_key(user) {
            dropped += 1;
            continue;
        }
        let t = ev.timestamp;
        if let Some(list) = friends.get(user) {
            let better = |a: &(&UserId, Timestamp), b: &(&UserId, Timestamp)| {
                // later time first, then smaller id
                b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0))
            };
            let best = if list.len() <= timeline.len() {
                list.friends()
                    .iter()
                    .filter_map(|f| posted.get(f).map(|&pt| (f, pt)))
                    .filter(|&(_, pt)| pt < t)
                    .min_by(better)
            } else {
                timeline
                    .iter()
                    .copied()
                    .filter(|&(u, pt)| pt < t && list.follows(u.as_str()))
                    .min_by(better)
            };
            if let Some((p, _)) = best {
                edges.push((p.clone(), user.clone()));
            }
        }
        posted.insert(user, t);
        timeline.push((user, t));
        members.push((user.clone(), t));
    }

    let cascade = Cascade::new(
        root_tweet.tweet_id.clone(),
        root.clone(),
        root_tweet.created_at,
        members,
        &edges,
    )?;
    Ok(BuildOutcome {
        cascade,
        dropped_duplicates: dropped,
    })
}

/// An original tweet together with every retweet of it.
#[derive(Clone, Debug)]
pub struct RetweetGroup {
    pub root: TweetRecord,
    pub retweets: Vec<RetweetEvent>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupReport {
    /// Retweets whose original is not in the stream.
    pub orphans: usize,
    /// Retweets of one's own tweet.
    pub self_retweets: usize,
    /// Retweets stamped before the original.
    pub before_original: usize,
}

/// Groups a tweet stream into one [`RetweetGroup`] per original tweet,
/// ordered by (creation time, tweet id). Retweets of retweets are resolved
/// to the original.
pub fn group_retweets(records: &[TweetRecord]) -> (Vec<RetweetGroup>, GroupReport) {
    fn resolve<'a>(by_id: &HashMap<&'a TweetId, &'a TweetRecord>, mut id: &'a TweetId) -> Option<&'a TweetRecord> {
        // bounded walk guards against retweet cycles
        for _ in 0..=by_id.len() {
            let rec = *by_id.get(id)?;
            match &rec.retweet_of {
                None => return Some(rec),
                Some(next) => id = next,
            }
        }
        None
    }
    let by_id: HashMap<&TweetId, &TweetRecord> = records.iter().map(|r| (&r.tweet_id, r)).collect();

    let mut report = GroupReport::default();
    let mut index: HashMap<&TweetId, usize> = HashMap::new();
    let mut groups: Vec<RetweetGroup> = Vec::new();
    let mut originals: Vec<&TweetRecord> = records.iter().filter(|r| !r.is_retweet()).collect();
    originals.sort_by(|a, b| (a.created_at, &a.tweet_id).cmp(&(b.created_at, &b.tweet_id)));
    originals.dedup_by(|a, b| a.tweet_id == b.tweet_id);
    for o in originals {
        index.insert(&o.tweet_id, groups.len());
        groups.push(RetweetGroup {
            root: o.clone(),
            retweets: Vec::new(),
        });
    }

    for r in records.iter().filter(|r| r.is_retweet()) {
        let Some(orig) = r.retweet_of.as_ref().and_then(|id| resolve(&by_id, id)) else {
            report.orphans += 1;
            continue;
        };
        if r.author == orig.author {
            report.self_retweets += 1;
            continue;
        }
        if r.created_at < orig.created_at {
            report.before_original += 1;
            continue;
        }
        let gi = index[&orig.tweet_id];
        groups[gi].retweets.push(RetweetEvent {
            retweeter: r.author.clone(),
            original_tweet: orig.tweet_id.clone(),
            original_author: orig.author.clone(),
            timestamp: r.created_at,
        });
    }
    (groups, report)
}

/// Builds every group in parallel; output order follows `groups`.
pub fn build_all(
    groups: &[RetweetGroup],
    friends: &FriendMap,
) -> Result<Vec<BuildOutcome>, CascadeError> {
    groups
        .par_iter()
        .map(|g| build_cascade(&g.root, &g.retweets, friends))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CascadeSize {
    pub s: usize,
    pub s_prime: usize,
    pub s_sparse: usize,
}

pub fn cascade_size(c: &Cascade) -> CascadeSize {
    let s = c.len();
    let s_prime = (0..s).filter(|&i| c.in_component(i)).count();
    CascadeSize {
        s,
        s_prime,
        s_sparse: s - s_prime,
    }
}

/// Longest root path within `C'`.
pub fn cascade_height(c: &Cascade) -> u32 {
    c.nodes()
        .iter()
        .enumerate()
        .filter(|&(i, _)| c.in_component(i))
        .map(|(_, n)| n.level)
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeFeatures {
    pub user: UserId,
    pub level: u32,
    pub action_delay_min: f64,
    pub out_degree: u32,
    pub coordinated: bool,
}

/// One row per non-root node.
pub fn node_features(c: &Cascade) -> Vec<NodeFeatures> {
    c.nodes()[1..]
        .iter()
        .map(|n| NodeFeatures {
            user: n.user.clone(),
            level: n.level,
            action_delay_min: n.action_delay_min,
            out_degree: n.out_degree,
            coordinated: n.coordinated,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct EdgeCounts {
    pub m: usize,
    pub m_cc: usize,
    pub m_cn: usize,
    pub m_nn: usize,
}

/// Counts edges by endpoint labels; c→n and n→c both count as cn.
pub fn classify_edges(c: &Cascade) -> EdgeCounts {
    let nodes = c.nodes();
    let mut out = EdgeCounts::default();
    for (p, ch) in c.edge_indices() {
        out.m += 1;
        match (nodes[p].coordinated, nodes[ch].coordinated) {
            (true, true) => out.m_cc += 1,
            (false, false) => out.m_nn += 1,
            _ => out.m_cn += 1,
        }
    }
    out
}
