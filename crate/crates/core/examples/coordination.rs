//! Recover a planted cohort from co-retweet similarity.

use cascade_forge::cascade::group_retweets;
use cascade_forge::coordination::DEFAULT_PERCENTILE;
use cascade_forge::synth::{generate, SynthConfig};
use cascade_forge::{build_user_vectors, label_coordinated};

fn main() {
    let out = generate(&SynthConfig::default()).unwrap();
    let (groups, _) = group_retweets(&out.tweets);
    let events: Vec<_> = groups.into_iter().flat_map(|g| g.retweets).collect();

    let vectors = build_user_vectors(&events);
    let labels = label_coordinated(&vectors, DEFAULT_PERCENTILE).unwrap();

    let hits = labels.coordinated.intersection(&out.truth).count();
    println!("{} retweeters, {} similarity edges kept", vectors.len(), labels.retained.len());
    println!(
        "labeled {} accounts, {} of them planted (precision {:.2}, recall {:.2})",
        labels.coordinated.len(),
        hits,
        hits as f64 / labels.coordinated.len().max(1) as f64,
        hits as f64 / out.truth.len() as f64
    );
    for e in labels.retained.iter().take(5) {
        println!("  {} ~ {}  {:.4}", e.a, e.b, e.similarity);
    }
}
