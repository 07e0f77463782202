//! Synthetic follower graphs and retweet streams with a planted
//! coordinated cohort.
//!
//! Non-coordinated users retweet when exposed through accounts they follow,
//! one exposure trial per friend retweet, after an exponential delay of mean
//! `delay_scale_noncoord` minutes. A few also arrive "from trends" without
//! an exposure path. The cohort follows the authors of a shared pool of
//! tweets and retweets each pool tweet with probability
//! `min(1, cohort_retweet_prob * coordination_boost)`, after an exponential
//! delay of mean `delay_scale_coord` minutes from the original post.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};
use thiserror::Error;

use crate::ingest::{FriendMap, TweetRecord};
use crate::model::{FriendList, Timestamp, TweetId, UserId};
use crate::nullmodel::Seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Topology {
    /// Every ordered pair follows independently.
    ErdosRenyi { follow_prob: f64 },
    /// Out-degree drawn from a Zipf law, targets uniform.
    PowerLaw { exponent: f64, max_degree: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_cascades: usize,
    pub topology: Topology,
    pub coordinated_fraction: f64,
    pub coordination_boost: f64,
    pub cohort_retweet_prob: f64,
    /// Number of original tweets the cohort targets.
    pub pool_size: usize,
    /// When set, nobody outside the cohort retweets pool tweets.
    pub exclusive_pool: bool,
    /// Retweet probability per exposure for an active user.
    pub retweet_prob: f64,
    pub active_fraction: f64,
    /// Activity multiplier of users that are not active.
    pub passive_activity: f64,
    /// Per-cascade probability that an active user arrives without exposure.
    pub trend_prob: f64,
    /// Non-coordinated users with fewer retweets are removed from the stream.
    pub min_user_activity: usize,
    pub delay_scale_coord: f64,
    pub delay_scale_noncoord: f64,
    pub start: Timestamp,
    pub horizon_days: f64,
    pub seed: Seed,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 1000,
            n_cascades: 200,
            topology: Topology::ErdosRenyi { follow_prob: 0.03 },
            coordinated_fraction: 0.01,
            coordination_boost: 10.0,
            cohort_retweet_prob: 0.1,
            pool_size: 50,
            exclusive_pool: true,
            retweet_prob: 0.3,
            active_fraction: 0.07,
            passive_activity: 0.01,
            trend_prob: 0.02,
            min_user_activity: 3,
            delay_scale_coord: 45.0,
            delay_scale_noncoord: 120.0,
            // 2019-11-12T00:00:00Z
            start: Timestamp::from_unix(1_573_516_800),
            horizon_days: 30.0,
            seed: Seed(7),
        }
    }
}

impl SynthConfig {
    pub fn cohort_size(&self) -> usize {
        (self.coordinated_fraction * self.n_users as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Infeasible(m));
        if self.n_users < 2 {
            return bad("need at least 2 users".into());
        }
        if !(0.0..1.0).contains(&self.coordinated_fraction) {
            return bad(format!("coordinated_fraction {} outside [0, 1)", self.coordinated_fraction));
        }
        if self.cohort_size() >= self.n_users {
            return bad(format!("cohort of {} leaves no non-coordinated root", self.cohort_size()));
        }
        if self.coordination_boost < 1.0 {
            return bad(format!("coordination_boost {} < 1", self.coordination_boost));
        }
        if !(self.delay_scale_coord > 0.0 && self.delay_scale_noncoord > 0.0) {
            return bad("delay scales must be positive".into());
        }
        if self.pool_size > self.n_cascades {
            return bad(format!("pool of {} exceeds {} cascades", self.pool_size, self.n_cascades));
        }
        for (name, p) in [
            ("cohort_retweet_prob", self.cohort_retweet_prob),
            ("retweet_prob", self.retweet_prob),
            ("active_fraction", self.active_fraction),
            ("passive_activity", self.passive_activity),
            ("trend_prob", self.trend_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        match self.topology {
            Topology::ErdosRenyi { follow_prob } if !(0.0..=1.0).contains(&follow_prob) => {
                bad(format!("follow_prob {follow_prob} outside [0, 1]"))
            }
            Topology::PowerLaw { exponent, max_degree } if exponent <= 0.0 || max_degree == 0 => {
                bad("power-law topology needs exponent > 0 and max_degree >= 1".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthOutput {
    /// Originals and retweets sorted by (time, tweet id).
    pub tweets: Vec<TweetRecord>,
    pub friends: FriendMap,
    /// The planted cohort.
    pub truth: BTreeSet<UserId>,
}

fn delay_secs(rng: &mut ChaCha8Rng, mean_minutes: f64) -> i64 {
    let exp = Exp::new(1.0 / (mean_minutes * 60.0)).expect("positive rate");
    (exp.sample(rng).round() as i64).max(1)
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let n = config.n_users;
    let width = (n - 1).to_string().len();
    let ids: Vec<UserId> = (0..n)
        .map(|i| UserId::new(format!("u{i:0width$}")).expect("non-empty"))
        .collect();

    let mut rng = config.seed.rng(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let k = config.cohort_size();
    let mut is_cohort = vec![false; n];
    for &i in &order[..k] {
        is_cohort[i] = true;
    }
    let cohort: Vec<usize> = (0..n).filter(|&i| is_cohort[i]).collect();
    let regular: Vec<usize> = (0..n).filter(|&i| !is_cohort[i]).collect();

    let mut friends: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut topo = config.seed.rng(1);
    match config.topology {
        Topology::ErdosRenyi { follow_prob } => {
            for (u, fs) in friends.iter_mut().enumerate() {
                for v in 0..n {
                    if v != u && topo.random_bool(follow_prob) {
                        fs.insert(v);
                    }
                }
            }
        }
        Topology::PowerLaw { exponent, max_degree } => {
            let cap = max_degree.min(n - 1);
            let zipf = Zipf::new(cap as f64, exponent).expect("valid zipf");
            for (u, fs) in friends.iter_mut().enumerate() {
                let degree = zipf.sample(&mut topo) as usize;
                while fs.len() < degree {
                    let v = topo.random_range(0..n);
                    if v != u {
                        fs.insert(v);
                    }
                }
            }
        }
    }

    let activity: Vec<f64> = (0..n)
        .map(|_| {
            if topo.random_bool(config.active_fraction) {
                1.0
            } else {
                config.passive_activity
            }
        })
        .collect();

    let mut plan = config.seed.rng(2);
    let roots: Vec<usize> = (0..config.n_cascades)
        .map(|_| *regular.choose(&mut plan).expect("non-empty population"))
        .collect();
    let mut cascade_order: Vec<usize> = (0..config.n_cascades).collect();
    cascade_order.shuffle(&mut plan);
    let mut in_pool = vec![false; config.n_cascades];
    for &c in &cascade_order[..config.pool_size] {
        in_pool[c] = true;
        for &m in &cohort {
            friends[m].insert(roots[c]);
        }
    }

    let mut followers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, fs) in friends.iter().enumerate() {
        for &v in fs {
            followers[v].push(u);
        }
    }

    let spacing = (config.horizon_days * 86_400.0 / config.n_cascades.max(1) as f64) as i64;
    let cohort_p = (config.cohort_retweet_prob * config.coordination_boost).min(1.0);
    // (cascade, user, time)
    let mut retweets: Vec<(usize, usize, Timestamp)> = Vec::new();
    let mut originals: Vec<Timestamp> = Vec::with_capacity(config.n_cascades);
    for c in 0..config.n_cascades {
        let mut rng = config.seed.rng(100 + c as u64);
        let root = roots[c];
        let t0 = config
            .start
            .plus_seconds(c as i64 * spacing + rng.random_range(0..spacing.max(1)));
        originals.push(t0);

        let mut queue: BinaryHeap<Reverse<(Timestamp, usize)>> = BinaryHeap::new();
        queue.push(Reverse((t0, root)));
        if in_pool[c] {
            for &m in &cohort {
                if rng.random_bool(cohort_p) {
                    let t = t0.plus_seconds(delay_secs(&mut rng, config.delay_scale_coord));
                    queue.push(Reverse((t, m)));
                }
            }
        }
        let organic = !(in_pool[c] && config.exclusive_pool);
        if organic {
            for &u in &regular {
                if u != root && activity[u] >= 1.0 && rng.random_bool(config.trend_prob) {
                    let t = t0.plus_seconds(delay_secs(&mut rng, 3.0 * config.delay_scale_noncoord));
                    queue.push(Reverse((t, u)));
                }
            }
        }

        let mut done = vec![false; n];
        while let Some(Reverse((t, u))) = queue.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u != root {
                retweets.push((c, u, t));
            }
            if !organic {
                continue;
            }
            for &f in &followers[u] {
                if done[f] || is_cohort[f] {
                    continue;
                }
                if rng.random_bool((config.retweet_prob * activity[f]).min(1.0)) {
                    let tf = t.plus_seconds(delay_secs(&mut rng, config.delay_scale_noncoord));
                    queue.push(Reverse((tf, f)));
                }
            }
        }
    }

    let mut per_user = vec![0usize; n];
    for &(_, u, _) in &retweets {
        per_user[u] += 1;
    }
    retweets.retain(|&(_, u, _)| is_cohort[u] || per_user[u] >= config.min_user_activity);

    let tweet_width = config.n_cascades.max(1).to_string().len();
    let original_id = |c: usize| TweetId::new(format!("t{c:0tweet_width$}")).expect("non-empty");
    let mut tweets: Vec<TweetRecord> = (0..config.n_cascades)
        .map(|c| TweetRecord {
            tweet_id: original_id(c),
            author: ids[roots[c]].clone(),
            created_at: originals[c],
            retweet_of: None,
        })
        .collect();
    retweets.sort_by_key(|&(c, u, t)| (t, c, u));
    let rt_width = retweets.len().max(1).to_string().len();
    tweets.extend(retweets.iter().enumerate().map(|(j, &(c, u, t))| TweetRecord {
        tweet_id: TweetId::new(format!("r{j:0rt_width$}")).expect("non-empty"),
        author: ids[u].clone(),
        created_at: t,
        retweet_of: Some(original_id(c)),
    }));
    tweets.sort_by(|a, b| (a.created_at, &a.tweet_id).cmp(&(b.created_at, &b.tweet_id)));

    let friend_map: FriendMap = (0..n)
        .map(|u| {
            let list = FriendList::new(ids[u].clone(), friends[u].iter().map(|&v| ids[v].clone()))
                .expect("no self-follow");
            (ids[u].clone(), list)
        })
        .collect();
    let truth = cohort.iter().map(|&i| ids[i].clone()).collect();
    Ok(SynthOutput {
        tweets,
        friends: friend_map,
        truth,
    })
}
