//! Read a tweet archive that contains damaged lines.

use std::io::Cursor;
use std::path::Path;

use cascade_forge::cascade::group_retweets;
use cascade_forge::ingest::read_tweet_stream;

const ARCHIVE: &str = r#"{"id":"1","author_id":"alice","created_at":"2019-11-12T09:00:00Z"}
{"id":2,"author_id":"bob","created_at":"2019-11-12T09:05:00Z","retweeted_id":"1"}
{"id":"3","author_id":"carol","created_at":"not a time","retweeted_id":"1"}
this line is not JSON
{"id":"4","author_id":"dave","created_at":"2019-11-12T09:20:00Z","retweeted_id":"2"}
"#;

fn main() {
    let stream = read_tweet_stream(Cursor::new(ARCHIVE), Path::new("archive.jsonl"), 5).unwrap();
    for bad in &stream.bad_lines {
        println!("skipped line {}: {}", bad.line, bad.message);
    }
    let (groups, report) = group_retweets(&stream.records);
    for g in &groups {
        println!("tweet {} by {}: {} retweets", g.root.tweet_id, g.root.author, g.retweets.len());
    }
    println!("{report:?}");

    // with no tolerance the same archive is rejected
    let strict = read_tweet_stream(Cursor::new(ARCHIVE), Path::new("archive.jsonl"), 0);
    println!("strict: {}", strict.unwrap_err());
}
