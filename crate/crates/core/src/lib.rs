//! Retweet cascade reconstruction and coordinated-account analytics.
//!
//! The crate rebuilds who-retweeted-from-whom trees out of flat retweet
//! archives and friend lists ([`cascade`]), labels coordinated accounts from
//! co-retweet similarity ([`coordination`]), measures how much of each
//! cascade depends on those accounts ([`infectivity`]), and compares the
//! results against label-shuffled baselines ([`nullmodel`]) with the
//! statistics in [`stats`]. [`synth`] produces planted-cohort fixtures and
//! [`cli`] wires everything into the `cascade-forge` command.

pub mod cascade;
pub mod cli;
pub mod coordination;
pub mod infectivity;
pub mod ingest;
pub mod model;
pub mod nullmodel;
pub mod stats;
pub mod synth;
pub mod tables;

pub use cascade::{build_cascade, cascade_height, cascade_size, classify_edges, node_features};
pub use coordination::{build_user_vectors, cosine_similarity, label_coordinated, UserVector};
pub use infectivity::{cascade_metrics, infectivity_ratios, quadrant, Quadrant};
pub use model::{
    Cascade, CascadeMetrics, CascadeNode, CoordinationLabeling, FitResult, FriendList, ModelKind,
    RetweetEvent, Timestamp, TweetId, UserId,
};
pub use nullmodel::{bootstrap_means, shuffle_labels, Seed};
