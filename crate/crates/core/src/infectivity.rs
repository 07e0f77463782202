//! Dismantling-based infectivity ratios.
//!
//! Coordinated nodes are visited by increasing distance from the root. Each
//! one still present roots a subtree that is counted and then removed from
//! the cascade. `C_IR` normalizes the removed nodes (excluding the subtree
//! roots) by `s - 1`; `CtNC_IR` counts only the removed non-coordinated
//! nodes, normalized by the number of non-root non-coordinated nodes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cascade::{cascade_height, cascade_size, classify_edges};
use crate::model::{Cascade, CascadeMetrics};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InfectivityError {
    #[error("cascade {0} has no coordination labels")]
    Unlabeled(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfectivityRatios {
    pub c_ir: f64,
    pub ctnc_ir: f64,
    /// Sum of `v_C`.
    pub removed: usize,
    /// Sum of `v_CtNC`.
    pub removed_non_coordinated: usize,
    pub c_ir_undefined: bool,
    pub ctnc_ir_undefined: bool,
}

/// One subtree removed by the dismantling procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemovedSubtree {
    /// Node index of the coordinated subtree root.
    pub root: usize,
    /// Nodes in the subtree excluding its root (`v_C` entry).
    pub descendants: usize,
    /// Non-coordinated nodes in the subtree (`v_CtNC` entry).
    pub non_coordinated: usize,
}

/// Runs the dismantling and returns the removed subtrees in order.
pub fn dismantle(c: &Cascade) -> Vec<RemovedSubtree> {
    let nodes = c.nodes();
    let mut coordinated: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].coordinated).collect();
    coordinated.sort_by(|&a, &b| {
        (nodes[a].level, &nodes[a].user).cmp(&(nodes[b].level, &nodes[b].user))
    });

    let mut removed = vec![false; nodes.len()];
    let mut out = Vec::new();
    for start in coordinated {
        if removed[start] {
            continue;
        }
        let mut size = 0usize;
        let mut non_coordinated = 0usize;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            removed[v] = true;
            size += 1;
            if !nodes[v].coordinated {
                non_coordinated += 1;
            }
            stack.extend(c.children_of(v).iter().copied().filter(|&w| !removed[w]));
        }
        out.push(RemovedSubtree {
            root: start,
            descendants: size - 1,
            non_coordinated,
        });
    }
    out
}

pub fn infectivity_ratios(c: &Cascade) -> Result<InfectivityRatios, InfectivityError> {
    if !c.is_labeled() {
        return Err(InfectivityError::Unlabeled(c.root_tweet().to_string()));
    }
    let nodes = c.nodes();
    let subtrees = dismantle(c);
    let v_c: usize = subtrees.iter().map(|t| t.descendants).sum();
    let v_ctnc: usize = subtrees.iter().map(|t| t.non_coordinated).sum();

    let s = nodes.len();
    let non_root_nc = nodes[1..].iter().filter(|n| !n.coordinated).count();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(InfectivityRatios {
        c_ir: ratio(v_c, s - 1),
        ctnc_ir: ratio(v_ctnc, non_root_nc),
        removed: v_c,
        removed_non_coordinated: v_ctnc,
        c_ir_undefined: s == 1,
        ctnc_ir_undefined: non_root_nc == 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrant {
    /// The cascade depends only on the root.
    RootDriven,
    /// Coordinated accounts carry the message to non-coordinated ones.
    KeySpreaders,
    /// Coordinated nodes near the root with few descendants.
    NearRootFiniteSize,
    /// Coordinated descendants of coordinated nodes.
    SelfContained,
    Mixed,
}

pub const QUADRANT_LOW: f64 = 0.25;
pub const QUADRANT_HIGH: f64 = 0.75;

pub fn quadrant(c_ir: f64, ctnc_ir: f64, low: f64, high: f64) -> Quadrant {
    let lo = |x: f64| x <= low;
    let hi = |x: f64| x >= high;
    match (c_ir, ctnc_ir) {
        (a, b) if lo(a) && lo(b) => Quadrant::RootDriven,
        (a, b) if hi(a) && hi(b) => Quadrant::KeySpreaders,
        (a, b) if lo(a) && hi(b) => Quadrant::NearRootFiniteSize,
        (a, b) if hi(a) && lo(b) => Quadrant::SelfContained,
        _ => Quadrant::Mixed,
    }
}

impl Quadrant {
    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::RootDriven => "root_driven",
            Quadrant::KeySpreaders => "key_spreaders",
            Quadrant::NearRootFiniteSize => "near_root_finite_size",
            Quadrant::SelfContained => "self_contained",
            Quadrant::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quadrant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [
            Quadrant::RootDriven,
            Quadrant::KeySpreaders,
            Quadrant::NearRootFiniteSize,
            Quadrant::SelfContained,
            Quadrant::Mixed,
        ]
        .into_iter()
        .find(|q| q.as_str() == s)
        .ok_or_else(|| format!("unknown quadrant {s:?}"))
    }
}

/// Every per-cascade measure in one record.
pub fn cascade_metrics(c: &Cascade) -> Result<CascadeMetrics, InfectivityError> {
    let ir = infectivity_ratios(c)?;
    let size = cascade_size(c);
    let edges = classify_edges(c);
    let s_c = c.nodes().iter().filter(|n| n.coordinated).count();
    let m = CascadeMetrics {
        cascade_id: c.root_tweet().clone(),
        s: size.s,
        s_prime: size.s_prime,
        s_sparse: size.s_sparse,
        s_c,
        s_n: size.s - s_c,
        m: edges.m,
        m_cc: edges.m_cc,
        m_cn: edges.m_cn,
        m_nn: edges.m_nn,
        h_prime: cascade_height(c),
        incidence: s_c as f64 / size.s as f64,
        c_ir: ir.c_ir,
        ctnc_ir: ir.ctnc_ir,
        c_ir_undefined: ir.c_ir_undefined,
        ctnc_ir_undefined: ir.ctnc_ir_undefined,
    };
    debug_assert!(m.validate().is_ok());
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Timestamp, TweetId, UserId};

    fn u(s: &str) -> UserId {
        UserId::new(s).unwrap()
    }

    /// Tree from (child, parent) pairs listed parent-first; times follow
    /// list order. `None` parent puts the node in `S`.
    fn tree(rows: &[(&str, Option<&str>)], coordinated: &[&str]) -> Cascade {
        let members = rows
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (u(n), Timestamp::from_unix(i as i64 + 1)))
            .collect();
        let edges: Vec<_> = rows
            .iter()
            .filter_map(|(n, p)| p.map(|p| (u(p), u(n))))
            .collect();
        Cascade::new(TweetId::new("t").unwrap(), u("r"), Timestamp::from_unix(0), members, &edges)
            .unwrap()
            .with_labels(|x| coordinated.contains(&x.as_str()))
    }

    #[test]
    fn unlabeled_is_a_contract_error() {
        let c = Cascade::new(TweetId::new("t").unwrap(), u("r"), Timestamp::from_unix(0), vec![], &[]).unwrap();
        assert!(infectivity_ratios(&c).is_err());
    }

    #[test]
    fn nobody_coordinated() {
        let c = tree(&[("a", Some("r")), ("b", Some("a"))], &[]);
        let ir = infectivity_ratios(&c).unwrap();
        assert_eq!((ir.c_ir, ir.ctnc_ir), (0.0, 0.0));
    }

    #[test]
    fn one_coordinated_parent_of_two() {
        let c = tree(&[("c", Some("r")), ("x", Some("c")), ("y", Some("c"))], &["c"]);
        let ir = infectivity_ratios(&c).unwrap();
        assert!((ir.c_ir - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ir.ctnc_ir, 1.0);
    }

    #[test]
    fn nested_coordinated_node_is_not_counted_twice() {
        let c = tree(
            &[("c1", Some("r")), ("c2", Some("c1")), ("x", Some("c2")), ("y", Some("r"))],
            &["c1", "c2"],
        );
        let ir = infectivity_ratios(&c).unwrap();
        assert_eq!(ir.removed, 2);
        assert_eq!(ir.removed_non_coordinated, 1);
        assert_eq!(dismantle(&c).len(), 1);
    }

    #[test]
    fn sparse_coordinated_singleton_counts_nothing() {
        let c = tree(&[("a", Some("r")), ("s", None)], &["s"]);
        let ir = infectivity_ratios(&c).unwrap();
        assert_eq!((ir.removed, ir.removed_non_coordinated), (0, 0));
        assert!(!ir.ctnc_ir_undefined);
    }

    #[test]
    fn zero_denominators_are_flagged() {
        let c = tree(&[], &[]);
        let ir = infectivity_ratios(&c).unwrap();
        assert!(ir.c_ir_undefined && ir.ctnc_ir_undefined);
        assert_eq!((ir.c_ir, ir.ctnc_ir), (0.0, 0.0));

        let c = tree(&[("c", Some("r"))], &["c"]);
        let ir = infectivity_ratios(&c).unwrap();
        assert!(!ir.c_ir_undefined && ir.ctnc_ir_undefined);
    }

    #[test]
    fn quadrants() {
        assert_eq!(quadrant(0.0, 0.0, QUADRANT_LOW, QUADRANT_HIGH), Quadrant::RootDriven);
        assert_eq!(quadrant(0.82, 0.82, QUADRANT_LOW, QUADRANT_HIGH), Quadrant::KeySpreaders);
        assert_eq!(quadrant(0.5, 0.5, QUADRANT_LOW, QUADRANT_HIGH), Quadrant::Mixed);
        assert_eq!(quadrant(0.25, 1.0, QUADRANT_LOW, QUADRANT_HIGH), Quadrant::NearRootFiniteSize);
        assert_eq!(quadrant(0.93, 0.0, QUADRANT_LOW, QUADRANT_HIGH), Quadrant::SelfContained);
        for q in ["root_driven", "mixed", "key_spreaders"] {
            assert_eq!(q.parse::<Quadrant>().unwrap().as_str(), q);
        }
    }

    #[test]
    fn metrics_record_adds_up() {
        let c = tree(&[("c", Some("r")), ("x", Some("c")), ("s", None)], &["c"]);
        let m = cascade_metrics(&c).unwrap();
        assert_eq!((m.s, m.s_prime, m.s_sparse, m.s_c, m.s_n), (4, 3, 1, 1, 3));
        assert_eq!((m.m, m.m_cc, m.m_cn, m.m_nn), (2, 0, 2, 0));
        assert_eq!(m.h_prime, 2);
        assert_eq!(m.incidence, 0.25);
        m.validate().unwrap();
    }
}
