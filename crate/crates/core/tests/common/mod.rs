//! Independent oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls into the code under test beyond constructors, so
//! agreement between the two is meaningful.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cascade_forge::ingest::{FriendMap, TweetRecord};
use cascade_forge::{Cascade, FriendList, RetweetEvent, Timestamp, TweetId, UserId};
use rand::Rng;

pub fn u(s: &str) -> UserId {
    UserId::new(s).unwrap()
}

pub fn tid(s: &str) -> TweetId {
    TweetId::new(s).unwrap()
}

// ---------------------------------------------------------------- trees

/// Builds a cascade from `(child, parent)` pairs, parents listed before
/// children; times follow list order. `None` puts the node in `S`.
pub fn tree(root: &str, rows: &[(String, Option<String>)], coordinated: &BTreeSet<String>) -> Cascade {
    let members = rows
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (u(n), Timestamp::from_unix(60 * (i as i64 + 1))))
        .collect();
    let edges: Vec<_> = rows
        .iter()
        .filter_map(|(n, p)| p.as_ref().map(|p| (u(p), u(n))))
        .collect();
    Cascade::new(tid("t"), u(root), Timestamp::from_unix(0), members, &edges)
        .unwrap()
        .with_labels(|x| coordinated.contains(x.as_str()))
}

/// Small builder for hand-written fixture trees.
#[derive(Default)]
pub struct TreeBuilder {
    nodes: Vec<(String, Option<String>)>,
    coordinated: BTreeSet<String>,
}

impl TreeBuilder {
    pub fn add(&mut self, name: &str, parent: &str, coordinated: bool) -> &mut Self {
        self.nodes.push((name.to_string(), Some(parent.to_string())));
        if coordinated {
            self.coordinated.insert(name.to_string());
        }
        self
    }

    /// `count` children of `parent` named `{prefix}{i}`.
    pub fn fan(&mut self, prefix: &str, count: usize, parent: &str, coordinated: bool) -> &mut Self {
        for i in 0..count {
            self.add(&format!("{prefix}{i}"), parent, coordinated);
        }
        self
    }

    pub fn build(&self) -> Cascade {
        tree("root", &self.nodes, &self.coordinated)
    }
}

/// Random labeled cascade of at most `max_nodes` nodes. Each non-root node
/// picks a uniformly random earlier parent, or joins `S` with probability
/// `sparse_prob`.
pub fn random_tree(rng: &mut impl Rng, max_nodes: usize, sparse_prob: f64) -> Cascade {
    let n = rng.random_range(1..=max_nodes);
    let frac: f64 = rng.random_range(0.0..0.8);
    let name = |i: usize| format!("n{i:03}");
    let rows: Vec<(String, Option<String>)> = (1..n)
        .map(|i| {
            let parent = (!rng.random_bool(sparse_prob)).then(|| name(rng.random_range(0..i)));
            (name(i), parent)
        })
        .collect();
    let coordinated: BTreeSet<String> = (0..n).filter(|_| rng.random_bool(frac)).map(name).collect();
    tree(&name(0), &rows, &coordinated)
}

// ------------------------------------------------------ infectivity oracle

/// Numerators and denominators of both ratios by deletion + reachability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatioOracle {
    pub removed: usize,
    pub removed_non_coordinated: usize,
    pub s_minus_one: usize,
    pub non_root_nc: usize,
}

fn reachable(c: &Cascade, deleted: &[bool]) -> Vec<bool> {
    // every node without a parent hangs off a virtual super-root
    let n = c.len();
    let mut kids = vec![Vec::new(); n];
    for w in 0..n {
        if let Some(p) = c.parent_of(w) {
            kids[p].push(w);
        }
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&i| c.parent_of(i).is_none() && !deleted[i])
        .collect();
    while let Some(v) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        stack.extend(kids[v].iter().copied().filter(|&w| !deleted[w]));
    }
    seen
}

/// A node counts as removed iff deleting the coordinated nodes other than
/// itself disconnects it.
pub fn ratio_oracle(c: &Cascade) -> RatioOracle {
    let nodes = c.nodes();
    let n = nodes.len();
    let coord: Vec<bool> = nodes.iter().map(|x| x.coordinated).collect();
    let mut removed = 0;
    let mut removed_nc = 0;
    let all_deleted = reachable(c, &coord);
    for v in 0..n {
        if coord[v] {
            let mut del = coord.clone();
            del[v] = false;
            if !reachable(c, &del)[v] {
                removed += 1;
            }
        } else if !all_deleted[v] {
            removed += 1;
            removed_nc += 1;
        }
    }
    RatioOracle {
        removed,
        removed_non_coordinated: removed_nc,
        s_minus_one: n - 1,
        non_root_nc: nodes[1..].iter().filter(|x| !x.coordinated).count(),
    }
}

// -------------------------------------------------- reconstruction oracle

/// Quadratic-scan reconstruction: for every retweeter, look at every
/// earlier poster and keep the latest followed one.
pub fn brute_force_edges(
    root: &TweetRecord,
    events: &[RetweetEvent],
    friends: &FriendMap,
) -> BTreeSet<(UserId, UserId)> {
    // earliest retweet per user
    let mut first: BTreeMap<UserId, Timestamp> = BTreeMap::new();
    for e in events {
        if e.retweeter == root.author {
            continue;
        }
        let t = first.entry(e.retweeter.clone()).or_insert(e.timestamp);
        if e.timestamp < *t {
            *t = e.timestamp;
        }
    }
    let mut posters: Vec<(UserId, Timestamp)> = first.into_iter().collect();
    posters.push((root.author.clone(), root.created_at));

    let mut edges = BTreeSet::new();
    for (user, t) in &posters {
        if *user == root.author {
            continue;
        }
        let Some(list) = friends.get(user) else { continue };
        let mut best: Option<&(UserId, Timestamp)> = None;
        for cand in &posters {
            if cand.1 >= *t || !list.friends().contains(&cand.0) {
                continue;
            }
            best = match best {
                None => Some(cand),
                Some(b) if cand.1 > b.1 || (cand.1 == b.1 && cand.0 < b.0) => Some(cand),
                keep => keep,
            };
        }
        if let Some(p) = best {
            edges.insert((p.0.clone(), user.clone()));
        }
    }
    edges
}

/// Random reconstruction instance: coarse timestamps force ties, some users
/// retweet twice, some have no friend list.
pub fn random_instance(rng: &mut impl Rng, max_events: usize) -> (TweetRecord, Vec<RetweetEvent>, FriendMap) {
    let n_users = rng.random_range(2..=60usize);
    let name = |i: usize| u(&format!("u{i:02}"));
    let root = TweetRecord {
        tweet_id: tid("t0"),
        author: name(0),
        created_at: Timestamp::from_unix(1_000),
        retweet_of: None,
    };
    let n_events = rng.random_range(0..=max_events);
    let events: Vec<RetweetEvent> = (0..n_events)
        .map(|_| {
            let who = rng.random_range(1..n_users);
            let t = 1_000 + rng.random_range(0..40) * 30;
            RetweetEvent::new(name(who), tid("t0"), name(0), Timestamp::from_unix(t)).unwrap()
        })
        .collect();
    let p: f64 = rng.random_range(0.02..0.5);
    let mut friends = FriendMap::new();
    for i in 0..n_users {
        if rng.random_bool(0.1) {
            continue;
        }
        let fs: Vec<UserId> = (0..n_users).filter(|&j| j != i && rng.random_bool(p)).map(name).collect();
        friends.insert(name(i), FriendList::new(name(i), fs).unwrap());
    }
    (root, events, friends)
}

// ---------------------------------------------------------- statistics

/// Mid-ranks by direct counting.
pub fn naive_mid_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided signed-rank p by enumerating all 2^n sign assignments.
pub fn enumerated_signed_rank_p(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks = naive_mid_ranks(&abs);
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, x)| **x > 0.0).map(|(r, _)| r).sum();
    let n = d.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

/// Dense cosine over the union of both supports.
pub fn dense_cosine(a: &BTreeMap<TweetId, f64>, b: &BTreeMap<TweetId, f64>) -> f64 {
    let keys: BTreeSet<&TweetId> = a.keys().chain(b.keys()).collect();
    let va: Vec<f64> = keys.iter().map(|k| a.get(*k).copied().unwrap_or(0.0)).collect();
    let vb: Vec<f64> = keys.iter().map(|k| b.get(*k).copied().unwrap_or(0.0)).collect();
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

// ------------------------------------------------------------ fixtures

/// Edge-taxonomy figure: 7 coordinated and 16 non-coordinated accounts
/// (root included) joined by 4 cc, 8 cn and 10 nn edges.
pub fn edge_taxonomy_tree() -> Cascade {
    let mut t = TreeBuilder::default();
    t.add("c1", "root", true)
        .add("c6", "root", true)
        .add("c7", "root", true)
        .add("c2", "c1", true)
        .add("c3", "c1", true)
        .add("c4", "c2", true)
        .add("c5", "c3", true)
        .add("n1", "c2", false)
        .add("n2", "c4", false)
        .add("n3", "c5", false)
        .add("n4", "c6", false)
        .add("n5", "c7", false)
        .add("n6", "n1", false)
        .add("n7", "n2", false)
        .add("n8", "n3", false)
        .add("n9", "n4", false)
        .add("n10", "n5", false)
        .add("n11", "root", false)
        .add("n12", "n11", false)
        .add("n13", "n12", false)
        .add("n14", "n6", false)
        .add("n15", "n7", false);
    t.build()
}

/// Trees matching the worked example rows: (label, nodes, coordinated,
/// C_IR, CtNC_IR, cascade).
pub fn example_rows() -> Vec<(&'static str, usize, usize, f64, f64, Cascade)> {
    // a: three coordinated children of the root, one with a single follower
    let mut a = TreeBuilder::default();
    a.fan("c", 3, "root", true).add("x", "c0", false);

    // b: a coordinated chain of two carrying every other account
    let mut b = TreeBuilder::default();
    b.add("c0", "root", true).add("c1", "c0", true).fan("x", 13, "c1", false);

    // c: coordinated accounts mostly feeding each other, the
    // non-coordinated ones hang off the root
    let mut c = TreeBuilder::default();
    c.fan("c", 9, "root", true).fan("d", 7, "c0", true).fan("x", 3, "root", false);

    // d: twenty coordinated spreaders, one of which reaches most of the tree
    let mut d = TreeBuilder::default();
    d.fan("c", 20, "root", true).fan("d", 88, "c0", true).fan("x", 658, "c0", false).fan("y", 144, "root", false);

    // e: two coordinated leaves in a root-driven star
    let mut e = TreeBuilder::default();
    e.fan("c", 2, "root", true).fan("x", 96, "root", false);

    vec![
        ("a", 5, 3, 0.25, 1.0, a.build()),
        ("b", 16, 2, 0.93, 1.0, b.build()),
        ("c", 20, 16, 0.37, 0.0, c.build()),
        ("d", 911, 108, 0.82, 0.82, d.build()),
        ("e", 99, 2, 0.0, 0.0, e.build()),
    ]
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
