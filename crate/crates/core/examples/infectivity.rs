//! Infection ratios and the quadrant taxonomy on hand-built trees.

use cascade_forge::infectivity::{dismantle, QUADRANT_HIGH, QUADRANT_LOW};
use cascade_forge::{cascade_metrics, quadrant, Cascade, Timestamp, TweetId, UserId};

/// Builds a tree from `(node, parent, coordinated)` rows in posting order.
fn tree(rows: &[(&str, &str, bool)]) -> Cascade {
    let u = |s: &str| UserId::new(s).unwrap();
    let members = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (u(r.0), Timestamp::from_unix(60 * (i as i64 + 1))))
        .collect();
    let edges: Vec<_> = rows.iter().map(|r| (u(r.1), u(r.0))).collect();
    Cascade::new(TweetId::new("t").unwrap(), u("root"), Timestamp::from_unix(0), members, &edges)
        .unwrap()
        .with_labels(|x| rows.iter().any(|r| r.2 && x.as_str() == r.0))
}

fn main() {
    let examples = [
        ("spreader near the root", tree(&[("c1", "root", true), ("a", "c1", false), ("b", "c1", false), ("d", "root", false)])),
        ("coordinated chain", tree(&[("c1", "root", true), ("c2", "c1", true), ("c3", "c2", true), ("a", "root", false)])),
        ("root driven", tree(&[("a", "root", false), ("b", "root", false), ("c1", "a", true)])),
    ];
    for (name, c) in &examples {
        let m = cascade_metrics(c).unwrap();
        let q = quadrant(m.c_ir, m.ctnc_ir, QUADRANT_LOW, QUADRANT_HIGH);
        println!("{name}: s={} s_c={} C_IR={:.3} CtNC_IR={:.3} -> {q}", m.s, m.s_c, m.c_ir, m.ctnc_ir);
        for t in dismantle(c) {
            println!("    removed {} with {} descendants ({} non-coordinated)", c.nodes()[t.root].user, t.descendants, t.non_coordinated);
        }
    }
}
