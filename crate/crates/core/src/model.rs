//! Domain types shared by every stage of the pipeline.
//!
//! Everything here is immutable once built. The only behavior is the
//! validation performed by constructors, so a value that exists is a value
//! whose invariants hold.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("identifier must be non-empty")]
    EmptyId,
    #[error("invalid timestamp {0:?}")]
    BadTimestamp(String),
    #[error("user {0} lists itself as a friend")]
    SelfFriend(UserId),
    #[error("retweeter {0} is the original author")]
    SelfRetweet(UserId),
    #[error("retweet by {user} at {at} precedes the original tweet at {original}")]
    RetweetBeforeOriginal {
        user: UserId,
        at: Timestamp,
        original: Timestamp,
    },
    #[error("duplicate node {0} in cascade")]
    DuplicateNode(UserId),
    #[error("edge endpoint {0} is not a cascade node")]
    UnknownNode(UserId),
    #[error("node {0} has more than one parent")]
    DuplicateParent(UserId),
    #[error("edge into the root {0}")]
    EdgeIntoRoot(UserId),
    #[error("edge {parent} -> {child} does not move forward in time")]
    NonIncreasingTime { parent: UserId, child: UserId },
    #[error("cycle through node {0}")]
    Cycle(UserId),
    #[error("cascade counts violate s = s_c + s_n or m = m_cc + m_cn + m_nn")]
    InconsistentCounts,
    #[error("percentile {0} outside (0, 100]")]
    BadPercentile(f64),
    #[error("polynomial of order {order} needs {expected} parameters, got {got}")]
    BadParamCount {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("residual standard error must be non-negative, got {0}")]
    NegativeResidual(f64),
}

macro_rules! opaque_id {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
                let id = id.into();
                if id.is_empty() {
                    return Err(ModelError::EmptyId);
                }
                Ok(Self(id))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = ModelError;
            fn try_from(s: String) -> Result<Self, ModelError> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), self.0)
            }
        }
    };
}

opaque_id!(UserId);
opaque_id!(TweetId);

/// An absolute instant at one-second resolution (Unix seconds, UTC).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_unix(secs: i64) -> Self {
        Self(secs)
    }

    pub const fn unix(self) -> i64 {
        self.0
    }

    /// Parses RFC 3339; sub-second precision is truncated.
    pub fn parse_rfc3339(s: &str) -> Result<Self, ModelError> {
        DateTime::parse_from_rfc3339(s)
            .map(|t| Self(t.timestamp()))
            .map_err(|_| ModelError::BadTimestamp(s.to_string()))
    }

    pub fn to_rfc3339(self) -> String {
        DateTime::<Utc>::from_timestamp(self.0, 0)
            .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
            .unwrap_or_else(|| self.0.to_string())
    }

    /// Fractional minutes elapsed since `earlier`.
    pub fn minutes_since(self, earlier: Timestamp) -> f64 {
        (self.0 - earlier.0) as f64 / 60.0
    }

    pub fn plus_seconds(self, secs: i64) -> Self {
        Self(self.0 + secs)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

/// One observed retweet. The platform reports only the original tweet and
/// its author, never the intermediate account the retweeter saw it from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetweetEvent {
    pub retweeter: UserId,
    pub original_tweet: TweetId,
    pub original_author: UserId,
    pub timestamp: Timestamp,
}

impl RetweetEvent {
    pub fn new(
        retweeter: UserId,
        original_tweet: TweetId,
        original_author: UserId,
        timestamp: Timestamp,
    ) -> Result<Self, ModelError> {
        if retweeter == original_author {
            return Err(ModelError::SelfRetweet(retweeter));
        }
        Ok(Self {
            retweeter,
            original_tweet,
            original_author,
            timestamp,
        })
    }
}

/// The accounts a user follows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FriendList {
    user: UserId,
    friends: BTreeSet<UserId>,
}

impl FriendList {
    pub fn new(
        user: UserId,
        friends: impl IntoIterator<Item = UserId>,
    ) -> Result<Self, ModelError> {
        let friends: BTreeSet<UserId> = friends.into_iter().collect();
        if friends.contains(&user) {
            return Err(ModelError::SelfFriend(user));
        }
        Ok(Self { user, friends })
    }

    pub fn user(&self) -> &UserId {
        &self.user
    }

    pub fn friends(&self) -> &BTreeSet<UserId> {
        &self.friends
    }

    pub fn follows(&self, other: &str) -> bool {
        self.friends.contains(other)
    }

    pub fn len(&self) -> usize {
        self.friends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.friends.is_empty()
    }

    /// Set union with another list for the same user.
    pub fn merge(&mut self, other: FriendList) {
        self.friends.extend(other.friends);
    }
}

/// One user in a reconstructed cascade.
///
/// `level` is the distance from the root. Nodes outside the root's tree are
/// placed at distance 1 when they have no parent, and one further per hop
/// below such a node.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeNode {
    pub user: UserId,
    pub retweet_time: Timestamp,
    pub level: u32,
    pub action_delay_min: f64,
    pub out_degree: u32,
    pub coordinated: bool,
}

/// A reconstructed retweet cascade `C = (V, E)`.
///
/// Node 0 is the root (the original author). The root's weakly connected
/// component `C'` is a tree; every other node belongs to the sparse set `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cascade {
    root_tweet: TweetId,
    nodes: Vec<CascadeNode>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    in_component: Vec<bool>,
    labeled: bool,
}

impl Cascade {
    /// Builds and validates a cascade from its members and parent→child
    /// edges. Levels, delays and out-degrees are derived here.
    pub fn new(
        root_tweet: TweetId,
        root: UserId,
        root_time: Timestamp,
        members: Vec<(UserId, Timestamp)>,
        edges: &[(UserId, UserId)],
    ) -> Result<Self, ModelError> {
        let mut members = members;
        members.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));

        let mut index: HashMap<UserId, usize> = HashMap::with_capacity(members.len() + 1);
        index.insert(root.clone(), 0);
        let mut times = vec![root_time];
        let mut users = vec![root];
        for (user, t) in members {
            if t < root_time {
                return Err(ModelError::RetweetBeforeOriginal {
                    user,
                    at: t,
                    original: root_time,
                });
            }
            if index.insert(user.clone(), users.len()).is_some() {
                return Err(ModelError::DuplicateNode(user));
            }
            users.push(user);
            times.push(t);
        }

        let n = users.len();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, c) in edges {
            let pi = *index.get(p).ok_or_else(|| ModelError::UnknownNode(p.clone()))?;
            let ci = *index.get(c).ok_or_else(|| ModelError::UnknownNode(c.clone()))?;
            if ci == 0 {
                return Err(ModelError::EdgeIntoRoot(c.clone()));
            }
            if parent[ci].is_some() {
                return Err(ModelError::DuplicateParent(c.clone()));
            }
            if times[ci] <= times[pi] {
                return Err(ModelError::NonIncreasingTime {
                    parent: p.clone(),
                    child: c.clone(),
                });
            }
            parent[ci] = Some(pi);
            children[pi].push(ci);
        }
        for kids in &mut children {
            kids.sort_unstable();
        }

        // Strictly increasing times along edges already rule out cycles, but
        // a walk that fails to terminate would still be reported here.
        let mut level = vec![u32::MAX; n];
        let mut in_component = vec![false; n];
        level[0] = 0;
        in_component[0] = true;
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            for &v in &children[u] {
                level[v] = level[u] + 1;
                in_component[v] = true;
                stack.push(v);
            }
        }
        for start in 1..n {
            if parent[start].is_some() || level[start] != u32::MAX {
                continue;
            }
            level[start] = 1;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &children[u] {
                    level[v] = level[u] + 1;
                    stack.push(v);
                }
            }
        }
        if let Some(i) = level.iter().position(|&l| l == u32::MAX) {
            return Err(ModelError::Cycle(users[i].clone()));
        }

        let nodes = users
            .into_iter()
            .enumerate()
            .map(|(i, user)| CascadeNode {
                user,
                retweet_time: times[i],
                level: level[i],
                action_delay_min: times[i].minutes_since(root_time),
                out_degree: children[i].len() as u32,
                coordinated: false,
            })
            .collect();

        Ok(Self {
            root_tweet,
            nodes,
            parent,
            children,
            in_component,
            labeled: false,
        })
    }

    /// Returns a copy with coordination flags assigned by `is_coordinated`.
    pub fn with_labels(&self, mut is_coordinated: impl FnMut(&UserId) -> bool) -> Self {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.coordinated = is_coordinated(&node.user);
        }
        out.labeled = true;
        out
    }

    /// Returns a copy with the flags given per node index (root first).
    pub fn with_flags(&self, flags: &[bool]) -> Self {
        assert_eq!(flags.len(), self.nodes.len(), "one flag per node");
        let mut out = self.clone();
        for (node, &f) in out.nodes.iter_mut().zip(flags) {
            node.coordinated = f;
        }
        out.labeled = true;
        out
    }

    pub fn root_tweet(&self) -> &TweetId {
        &self.root_tweet
    }

    pub fn root(&self) -> &CascadeNode {
        &self.nodes[0]
    }

    pub fn root_time(&self) -> Timestamp {
        self.nodes[0].retweet_time
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    /// All nodes, root first, then retweeters by (time, id).
    pub fn nodes(&self) -> &[CascadeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent_of(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children_of(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Whether node `i` belongs to the root's component `C'`.
    pub fn in_component(&self, i: usize) -> bool {
        self.in_component[i]
    }

    pub fn is_sparse(&self, i: usize) -> bool {
        !self.in_component[i]
    }

    /// Edges as (parent, child) index pairs, ordered by child index.
    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, c)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&UserId, &UserId)> + '_ {
        self.edge_indices()
            .map(|(p, c)| (&self.nodes[p].user, &self.nodes[c].user))
    }

    pub fn edge_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }

    /// The sparse set `S`.
    pub fn sparse(&self) -> impl Iterator<Item = &UserId> + '_ {
        self.nodes
            .iter()
            .zip(&self.in_component)
            .filter(|(_, &c)| !c)
            .map(|(n, _)| &n.user)
    }

    /// Members other than the root, as given to [`Cascade::new`].
    pub fn members(&self) -> Vec<(UserId, Timestamp)> {
        self.nodes[1..]
            .iter()
            .map(|n| (n.user.clone(), n.retweet_time))
            .collect()
    }

    pub fn edge_list(&self) -> Vec<(UserId, UserId)> {
        self.edges().map(|(p, c)| (p.clone(), c.clone())).collect()
    }
}

/// A pairwise similarity retained in the coordination network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityEdge {
    pub a: UserId,
    pub b: UserId,
    pub similarity: f64,
}

/// Coordinated/non-coordinated verdict over a user population.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinationLabeling {
    /// Retained edges incident to each user.
    pub scores: BTreeMap<UserId, Vec<(UserId, f64)>>,
    pub coordinated: BTreeSet<UserId>,
    pub percentile: f64,
    /// Highest positive similarity per user over all scored pairs.
    pub max_similarity: BTreeMap<UserId, f64>,
    pub retained: Vec<SimilarityEdge>,
    /// Set when fewer than two users had a non-zero vector.
    pub insufficient_users: bool,
}

impl CoordinationLabeling {
    pub fn new(
        retained: Vec<SimilarityEdge>,
        max_similarity: BTreeMap<UserId, f64>,
        percentile: f64,
        insufficient_users: bool,
    ) -> Result<Self, ModelError> {
        if !(percentile > 0.0 && percentile <= 100.0) {
            return Err(ModelError::BadPercentile(percentile));
        }
        let mut scores: BTreeMap<UserId, Vec<(UserId, f64)>> = BTreeMap::new();
        let mut coordinated = BTreeSet::new();
        for e in &retained {
            scores
                .entry(e.a.clone())
                .or_default()
                .push((e.b.clone(), e.similarity));
            scores
                .entry(e.b.clone())
                .or_default()
                .push((e.a.clone(), e.similarity));
            coordinated.insert(e.a.clone());
            coordinated.insert(e.b.clone());
        }
        Ok(Self {
            scores,
            coordinated,
            percentile,
            max_similarity,
            retained,
            insufficient_users,
        })
    }

    pub fn is_coordinated(&self, user: &str) -> bool {
        self.coordinated.contains(user)
    }
}

/// The full per-cascade measurement record.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeMetrics {
    pub cascade_id: TweetId,
    pub s: usize,
    pub s_prime: usize,
    pub s_sparse: usize,
    pub s_c: usize,
    pub s_n: usize,
    pub m: usize,
    pub m_cc: usize,
    pub m_cn: usize,
    pub m_nn: usize,
    pub h_prime: u32,
    pub incidence: f64,
    pub c_ir: f64,
    pub ctnc_ir: f64,
    /// C_IR denominator was zero.
    pub c_ir_undefined: bool,
    /// CtNC_IR denominator was zero.
    pub ctnc_ir_undefined: bool,
}

impl CascadeMetrics {
    /// Rejects records whose node or edge counts do not add up.
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.s == self.s_c + self.s_n
            && self.m == self.m_cc + self.m_cn + self.m_nn
            && self.s == self.s_prime + self.s_sparse
            && (0.0..=1.0).contains(&self.c_ir)
            && (0.0..=1.0).contains(&self.ctnc_ir)
            && (0.0..=1.0).contains(&self.incidence);
        if ok {
            Ok(())
        } else {
            Err(ModelError::InconsistentCounts)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    ExponentialSaturation,
    Polynomial { order: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaStep {
    /// Order of the larger model in the nested comparison (order vs order - 1).
    pub order: usize,
    pub f_statistic: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_kind: ModelKind,
    /// Exponential: `[a, b]`. Polynomial: coefficients, lowest degree first.
    pub params: Vec<f64>,
    pub residual_std_error: f64,
    pub degrees_of_freedom: usize,
    pub selection_trace: Vec<AnovaStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn new(
        model_kind: ModelKind,
        params: Vec<f64>,
        residual_std_error: f64,
        degrees_of_freedom: usize,
        selection_trace: Vec<AnovaStep>,
        warnings: Vec<String>,
    ) -> Result<Self, ModelError> {
        if residual_std_error < 0.0 || residual_std_error.is_nan() {
            return Err(ModelError::NegativeResidual(residual_std_error));
        }
        let expected = match model_kind {
            ModelKind::ExponentialSaturation => 2,
            ModelKind::Polynomial { order } => order + 1,
        };
        if params.len() != expected {
            let order = match model_kind {
                ModelKind::Polynomial { order } => order,
                ModelKind::ExponentialSaturation => 1,
            };
            return Err(ModelError::BadParamCount {
                order,
                expected,
                got: params.len(),
            });
        }
        Ok(Self {
            model_kind,
            params,
            residual_std_error,
            degrees_of_freedom,
            selection_trace,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(s: &str) -> UserId {
        UserId::new(s).unwrap()
    }

    fn t(s: i64) -> Timestamp {
        Timestamp::from_unix(s)
    }

    fn tid() -> TweetId {
        TweetId::new("t0").unwrap()
    }

    #[test]
    fn ids_reject_empty() {
        assert_eq!(UserId::new(""), Err(ModelError::EmptyId));
        assert!(serde_json::from_str::<TweetId>("\"\"").is_err());
        assert_eq!(serde_json::from_str::<TweetId>("\"42\"").unwrap().as_str(), "42");
    }

    #[test]
    fn timestamp_round_trips_rfc3339() {
        let ts = Timestamp::parse_rfc3339("2019-11-12T00:00:00Z").unwrap();
        assert_eq!(ts.unix(), 1_573_516_800);
        assert_eq!(ts.to_rfc3339(), "2019-11-12T00:00:00Z");
        assert!(Timestamp::parse_rfc3339("yesterday").is_err());
        assert_eq!(t(90).minutes_since(t(0)), 1.5);
    }

    #[test]
    fn friend_list_rejects_self() {
        assert!(matches!(
            FriendList::new(u("a"), [u("a")]),
            Err(ModelError::SelfFriend(_))
        ));
    }

    #[test]
    fn cascade_derives_levels_and_degrees() {
        let c = Cascade::new(
            tid(),
            u("A"),
            t(0),
            vec![(u("B"), t(5)), (u("C"), t(10)), (u("D"), t(7))],
            &[(u("A"), u("B")), (u("B"), u("C"))],
        )
        .unwrap();
        let by = |id: &str| c.nodes().iter().find(|n| n.user.as_str() == id).unwrap();
        assert_eq!(by("A").level, 0);
        assert_eq!(by("B").level, 1);
        assert_eq!(by("C").level, 2);
        assert_eq!(by("D").level, 1);
        assert_eq!(by("B").out_degree, 1);
        assert_eq!(by("A").action_delay_min, 0.0);
        assert_eq!(c.sparse().cloned().collect::<Vec<_>>(), vec![u("D")]);
        assert_eq!(c.edge_count(), 2);
    }

    #[test]
    fn cascade_rejects_bad_structure() {
        let members = vec![(u("B"), t(5)), (u("C"), t(10))];
        let dup = Cascade::new(
            tid(),
            u("A"),
            t(0),
            members.clone(),
            &[(u("A"), u("C")), (u("B"), u("C"))],
        );
        assert!(matches!(dup, Err(ModelError::DuplicateParent(_))));

        let backwards = Cascade::new(tid(), u("A"), t(0), members.clone(), &[(u("C"), u("B"))]);
        assert!(matches!(backwards, Err(ModelError::NonIncreasingTime { .. })));

        let cycle = Cascade::new(
            tid(),
            u("A"),
            t(0),
            members.clone(),
            &[(u("B"), u("C")), (u("C"), u("B"))],
        );
        assert!(cycle.is_err());

        let equal = Cascade::new(
            tid(),
            u("A"),
            t(0),
            vec![(u("B"), t(5)), (u("C"), t(5))],
            &[(u("B"), u("C"))],
        );
        assert!(matches!(equal, Err(ModelError::NonIncreasingTime { .. })));

        let into_root = Cascade::new(tid(), u("A"), t(0), members, &[(u("B"), u("A"))]);
        assert!(into_root.is_err());
    }

    #[test]
    fn metrics_validation_checks_identities() {
        let mut m = CascadeMetrics {
            cascade_id: tid(),
            s: 4,
            s_prime: 3,
            s_sparse: 1,
            s_c: 1,
            s_n: 3,
            m: 2,
            m_cc: 0,
            m_cn: 1,
            m_nn: 1,
            h_prime: 2,
            incidence: 0.25,
            c_ir: 0.5,
            ctnc_ir: 0.5,
            c_ir_undefined: false,
            ctnc_ir_undefined: false,
        };
        assert!(m.validate().is_ok());
        m.s_n = 2;
        assert!(m.validate().is_err());
    }

    #[test]
    fn fit_result_checks_param_length() {
        assert!(FitResult::new(
            ModelKind::Polynomial { order: 3 },
            vec![1.0; 3],
            0.0,
            1,
            vec![],
            vec![]
        )
        .is_err());
        assert!(FitResult::new(ModelKind::ExponentialSaturation, vec![1.0, 2.0], -1.0, 1, vec![], vec![]).is_err());
    }
}
