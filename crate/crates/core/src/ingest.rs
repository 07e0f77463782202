//! Archive readers and the versioned cascade store.
//!
//! Three on-disk formats:
//!
//! * tweet stream: JSON Lines, one object per tweet with `id`, `author_id`,
//!   `created_at` (RFC 3339) and optional `retweeted_id`;
//! * friend lists: `user_id<TAB>friend_id,friend_id,...`;
//! * cascade store: a header line `{"format":"cascade","version":1}`
//!   followed by one JSON object per cascade.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Cascade, FriendList, ModelError, Timestamp, TweetId, UserId};

pub const CASCADE_FORMAT: &str = "cascade";
pub const CASCADE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {count} malformed line(s) exceeds limit {limit}; first at line {first_line}: {message}")]
    TooManyBadLines {
        path: PathBuf,
        count: usize,
        limit: usize,
        first_line: usize,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: expected cascade store header format={expected_format:?} version={expected_version}, found {found}")]
    Version {
        path: PathBuf,
        expected_format: &'static str,
        expected_version: u32,
        found: String,
    },
}

impl IngestError {
    fn io(path: &Path, source: io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One archived tweet. `retweet_of` is present iff the record is a retweet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TweetRecord {
    pub tweet_id: TweetId,
    pub author: UserId,
    pub created_at: Timestamp,
    pub retweet_of: Option<TweetId>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }
}

/// Archives disagree on whether ids are JSON strings or numbers.
#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum RawId {
    Text(String),
    Number(u64),
}

impl RawId {
    fn into_string(self) -> String {
        match self {
            RawId::Text(s) => s,
            RawId::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct RawTweet {
    id: RawId,
    author_id: RawId,
    created_at: String,
    #[serde(default)]
    retweeted_id: Option<RawId>,
}

#[derive(Serialize)]
struct RawTweetOut<'a> {
    id: &'a str,
    author_id: &'a str,
    created_at: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    retweeted_id: Option<&'a str>,
}

fn parse_tweet_line(line: &str) -> Result<TweetRecord, String> {
    let raw: RawTweet = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let tweet_id = TweetId::new(raw.id.into_string()).map_err(|e| format!("id: {e}"))?;
    let author = UserId::new(raw.author_id.into_string()).map_err(|e| format!("author_id: {e}"))?;
    let created_at = Timestamp::parse_rfc3339(&raw.created_at).map_err(|e| e.to_string())?;
    let retweet_of = match raw.retweeted_id {
        None => None,
        Some(r) => Some(TweetId::new(r.into_string()).map_err(|e| format!("retweeted_id: {e}"))?),
    };
    if retweet_of.as_ref() == Some(&tweet_id) {
        return Err("retweeted_id equals id".into());
    }
    Ok(TweetRecord {
        tweet_id,
        author,
        created_at,
        retweet_of,
    })
}

/// A line that failed to parse; `line` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadLine {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct TweetStream {
    pub records: Vec<TweetRecord>,
    pub bad_lines: Vec<BadLine>,
}

/// Reads a tweet stream in file order. Blank lines are ignored. More than
/// `max_bad_lines` malformed lines is a hard error.
pub fn load_tweet_stream(path: &Path, max_bad_lines: usize) -> Result<TweetStream, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_tweet_stream(BufReader::new(file), path, max_bad_lines)
}

pub fn read_tweet_stream(
    reader: impl BufRead,
    path: &Path,
    max_bad_lines: usize,
) -> Result<TweetStream, IngestError> {
    let mut out = TweetStream::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match parse_tweet_line(trimmed) {
            Ok(rec) => out.records.push(rec),
            Err(message) => out.bad_lines.push(BadLine {
                line: i + 1,
                message,
            }),
        }
    }
    if out.bad_lines.len() > max_bad_lines {
        let first = &out.bad_lines[0];
        return Err(IngestError::TooManyBadLines {
            path: path.to_path_buf(),
            count: out.bad_lines.len(),
            limit: max_bad_lines,
            first_line: first.line,
            message: first.message.clone(),
        });
    }
    for bad in &out.bad_lines {
        log::warn!("{}:{}: skipped malformed tweet: {}", path.display(), bad.line, bad.message);
    }
    Ok(out)
}

pub fn write_tweet_stream(path: &Path, records: &[TweetRecord]) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let raw = RawTweetOut {
            id: r.tweet_id.as_str(),
            author_id: r.author.as_str(),
            created_at: r.created_at.to_rfc3339(),
            retweeted_id: r.retweet_of.as_ref().map(|t| t.as_str()),
        };
        let line = serde_json::to_string(&raw).expect("tweet serializes");
        writeln!(w, "{line}").map_err(|e| IngestError::io(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

pub type FriendMap = HashMap<UserId, FriendList>;

/// Reads TAB-separated friend lists; repeated users are merged by union.
pub fn load_friend_lists(path: &Path) -> Result<FriendMap, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_friend_lists(BufReader::new(file), path)
}

pub fn read_friend_lists(reader: impl BufRead, path: &Path) -> Result<FriendMap, IngestError> {
    let mut map = FriendMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (user, rest) = line
            .split_once('\t')
            .ok_or_else(|| malformed("missing TAB separator".into()))?;
        let user = UserId::new(user.trim()).map_err(|e| malformed(format!("user: {e}")))?;
        let friends = rest
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(UserId::new)
            .collect::<Result<Vec<_>, ModelError>>()
            .map_err(|e| malformed(e.to_string()))?;
        let list = FriendList::new(user.clone(), friends).map_err(|e| malformed(e.to_string()))?;
        match map.get_mut(&user) {
            Some(existing) => existing.merge(list),
            None => {
                map.insert(user, list);
            }
        }
    }
    Ok(map)
}

/// Writes friend lists sorted by user so output is stable.
pub fn write_friend_lists(path: &Path, friends: &FriendMap) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut users: Vec<&UserId> = friends.keys().collect();
    users.sort();
    for user in users {
        let list = &friends[user];
        let joined: Vec<&str> = list.friends().iter().map(|f| f.as_str()).collect();
        writeln!(w, "{}\t{}", user, joined.join(",")).map_err(|e| IngestError::io(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct StoreHeader {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct StoredNode {
    user: UserId,
    time: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<UserId>,
    coordinated: bool,
}

#[derive(Serialize, Deserialize)]
struct StoredCascade {
    root_tweet: TweetId,
    labeled: bool,
    nodes: Vec<StoredNode>,
}

fn to_stored(c: &Cascade) -> StoredCascade {
    let nodes = c
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| StoredNode {
            user: n.user.clone(),
            time: n.retweet_time.to_rfc3339(),
            parent: c.parent_of(i).map(|p| c.nodes()[p].user.clone()),
            coordinated: n.coordinated,
        })
        .collect();
    StoredCascade {
        root_tweet: c.root_tweet().clone(),
        labeled: c.is_labeled(),
        nodes,
    }
}

fn from_stored(s: StoredCascade) -> Result<Cascade, String> {
    let mut it = s.nodes.into_iter();
    let root = it.next().ok_or("cascade without root")?;
    let root_time = Timestamp::parse_rfc3339(&root.time).map_err(|e| e.to_string())?;
    let mut members = Vec::new();
    let mut edges = Vec::new();
    let mut flags: HashMap<UserId, bool> = HashMap::new();
    flags.insert(root.user.clone(), root.coordinated);
    for n in it {
        let t = Timestamp::parse_rfc3339(&n.time).map_err(|e| e.to_string())?;
        if let Some(p) = n.parent {
            edges.push((p, n.user.clone()));
        }
        flags.insert(n.user.clone(), n.coordinated);
        members.push((n.user, t));
    }
    let c = Cascade::new(s.root_tweet, root.user, root_time, members, &edges)
        .map_err(|e| e.to_string())?;
    Ok(if s.labeled {
        c.with_labels(|u| flags.get(u).copied().unwrap_or(false))
    } else {
        c
    })
}

pub fn save_cascades(cascades: &[Cascade], path: &Path) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_cascades(&mut w, cascades).map_err(|e| IngestError::io(path, e))?;
    w.flush().map_err(|e| IngestError::io(path, e))
}

pub fn write_cascades(w: &mut impl Write, cascades: &[Cascade]) -> io::Result<()> {
    let header = StoreHeader {
        format: CASCADE_FORMAT.into(),
        version: CASCADE_VERSION,
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    for c in cascades {
        writeln!(w, "{}", serde_json::to_string(&to_stored(c))?)?;
    }
    Ok(())
}

pub fn load_cascades(path: &Path) -> Result<Vec<Cascade>, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_cascades(BufReader::new(file), path)
}

pub fn read_cascades(reader: impl BufRead, path: &Path) -> Result<Vec<Cascade>, IngestError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| IngestError::io(path, e))?,
        None => String::new(),
    };
    let ok = serde_json::from_str::<StoreHeader>(&header)
        .map(|h| h.format == CASCADE_FORMAT && h.version == CASCADE_VERSION)
        .unwrap_or(false);
    if !ok {
        return Err(IngestError::Version {
            path: path.to_path_buf(),
            expected_format: CASCADE_FORMAT,
            expected_version: CASCADE_VERSION,
            found: header,
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::Malformed {
            path: path.to_path_buf(),
            line: i + 2,
            message,
        };
        let stored: StoredCascade = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        out.push(from_stored(stored).map_err(malformed)?);
    }
    Ok(out)
}

/// Users appearing anywhere in a friend map, sorted.
pub fn known_users(friends: &FriendMap) -> BTreeSet<UserId> {
    let mut out = BTreeSet::new();
    for (u, l) in friends {
        out.insert(u.clone());
        out.extend(l.friends().iter().cloned());
    }
    out
}
