mod common;

use cascade_forge::cascade::classify_edges;
use cascade_forge::infectivity::{dismantle, quadrant, Quadrant, QUADRANT_HIGH, QUADRANT_LOW};
use cascade_forge::{cascade_metrics, infectivity_ratios};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn worked_example_rows() {
    for (label, nodes, coordinated, c_ir, ctnc_ir, cascade) in example_rows() {
        let m = cascade_metrics(&cascade).unwrap();
        assert_eq!((m.s, m.s_c), (nodes, coordinated), "row {label}");
        assert_eq!(round2(m.c_ir), c_ir, "row {label} C_IR {}", m.c_ir);
        assert_eq!(round2(m.ctnc_ir), ctnc_ir, "row {label} CtNC_IR {}", m.ctnc_ir);
        let o = ratio_oracle(&cascade);
        assert_eq!(o.removed as f64 / o.s_minus_one as f64, m.c_ir, "row {label}");
    }
}

#[test]
fn worked_example_quadrants() {
    let q: Vec<Quadrant> = example_rows()
        .iter()
        .map(|r| quadrant(r.3, r.4, QUADRANT_LOW, QUADRANT_HIGH))
        .collect();
    assert_eq!(
        q,
        [
            Quadrant::NearRootFiniteSize,
            Quadrant::KeySpreaders,
            Quadrant::Mixed,
            Quadrant::KeySpreaders,
            Quadrant::RootDriven,
        ]
    );
}

#[test]
fn edge_taxonomy_counts() {
    let c = edge_taxonomy_tree();
    let m = cascade_metrics(&c).unwrap();
    assert_eq!((m.s, m.s_c, m.s_n), (23, 7, 16));
    let e = classify_edges(&c);
    assert_eq!((e.m_cc, e.m_cn, e.m_nn), (4, 8, 10));
    assert_eq!(e.m, e.m_cc + e.m_cn + e.m_nn);
    assert_eq!(m.s, m.s_c + m.s_n);
}

#[test]
fn coordinated_root_takes_everything() {
    let mut t = TreeBuilder::default();
    t.add("a", "root", false).add("b", "a", false);
    let c = t.build().with_labels(|u| u.as_str() == "root");
    let ir = infectivity_ratios(&c).unwrap();
    assert_eq!((ir.c_ir, ir.ctnc_ir), (1.0, 1.0));
}

#[test]
fn random_trees_match_reachability_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..300 {
        let c = random_tree(&mut rng, 50, 0.1);
        let ir = infectivity_ratios(&c).unwrap();
        let o = ratio_oracle(&c);
        assert_eq!(ir.removed, o.removed);
        assert_eq!(ir.removed_non_coordinated, o.removed_non_coordinated);
    }
}

proptest! {
    #[test]
    fn dismantled_subtrees_are_disjoint(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_tree(&mut rng, 40, 0.15);
        let parts = dismantle(&c);
        let total: usize = parts.iter().map(|p| p.descendants + 1).sum();
        prop_assert!(total <= c.len());
        for p in &parts {
            prop_assert!(c.nodes()[p.root].coordinated);
            prop_assert!(p.non_coordinated <= p.descendants);
        }
    }

    #[test]
    fn ratios_stay_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_tree(&mut rng, 50, 0.1);
        let m = cascade_metrics(&c).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.c_ir));
        prop_assert!((0.0..=1.0).contains(&m.ctnc_ir));
        prop_assert!(m.validate().is_ok());
        prop_assert_eq!(m.m, m.m_cc + m.m_cn + m.m_nn);
        prop_assert_eq!(m.s, m.s_c + m.s_n);
    }
}
