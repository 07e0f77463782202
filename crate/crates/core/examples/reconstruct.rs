//! Rebuild a retweet tree from timestamps and friend lists.

use cascade_forge::ingest::{FriendMap, TweetRecord};
use cascade_forge::{build_cascade, cascade_height, cascade_size, FriendList, RetweetEvent, Timestamp, TweetId, UserId};

fn id(s: &str) -> UserId {
    UserId::new(s).unwrap()
}

fn main() {
    let tweet = TweetId::new("1001").unwrap();
    let t0 = Timestamp::parse_rfc3339("2019-11-12T09:00:00Z").unwrap();
    let root = TweetRecord {
        tweet_id: tweet.clone(),
        author: id("alice"),
        created_at: t0,
        retweet_of: None,
    };

    let follows = [
        ("bob", &["alice"][..]),
        ("carol", &["alice", "bob"]),
        ("dave", &["carol"]),
        ("erin", &["zed"]), // follows nobody who posted
    ];
    let friends: FriendMap = follows
        .iter()
        .map(|(u, fs)| (id(u), FriendList::new(id(u), fs.iter().map(|f| id(f))).unwrap()))
        .collect();

    let rt = |who: &str, minutes: i64| RetweetEvent::new(id(who), tweet.clone(), id("alice"), t0.plus_seconds(60 * minutes)).unwrap();
    let events = [rt("bob", 5), rt("carol", 12), rt("dave", 30), rt("erin", 31), rt("bob", 40)];

    let out = build_cascade(&root, &events, &friends).unwrap();
    let c = &out.cascade;
    for (p, ch) in c.edges() {
        println!("{p} -> {ch}");
    }
    for n in c.nodes() {
        println!("{:6} level {} delay {:5.1} min, {} children", n.user.as_str(), n.level, n.action_delay_min, n.out_degree);
    }
    let size = cascade_size(c);
    println!(
        "s = {}, s' = {}, |S| = {}, h' = {}, duplicates dropped = {}",
        size.s,
        size.s_prime,
        size.s_sparse,
        cascade_height(c),
        out.dropped_duplicates
    );
}
