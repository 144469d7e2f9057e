//! Projections of transition systems onto participants, and weak
//! bisimulation between the projected behaviours.
//!
//! Projecting a bounded transition system onto a participant keeps the
//! graph shape and relabels every edge not fired by that participant with
//! ε. A system is locally bound-agnostic at k when each participant's
//! projection at bound k is weakly bisimilar to its projection at k+1; for
//! bound-independent systems this coincides with exhaustivity at k.

use std::time::Instant;

use crate::checks::{GraphStats, Property, PropertyVerdict};
use crate::explore::{build_full_ts, ExploreError, TransitionSystem};
use crate::model::{Action, Bound, Participant, System};

/// A labelled transition system whose labels are either a participant's own
/// actions or ε.
#[derive(Clone, Debug)]
pub struct ProjectedLts {
    participant: Participant,
    initial: usize,
    /// `None` labels are ε edges.
    adj: Vec<Vec<(Option<Action>, usize)>>,
}

impl ProjectedLts {
    pub fn participant(&self) -> &Participant {
        &self.participant
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn outgoing(&self, node: usize) -> &[(Option<Action>, usize)] {
        &self.adj[node]
    }
}

/// Project `ts` onto `p`: same graph, labels replaced by ε wherever the
/// firing participant is not `p`.
pub fn project(ts: &TransitionSystem, p: &Participant) -> ProjectedLts {
    let mut adj = vec![Vec::new(); ts.node_count()];
    for (from, action, to) in ts.edges() {
        let label = if action.subject() == p {
            Some(action.clone())
        } else {
            None
        };
        adj[from].push((label, to));
    }
    ProjectedLts {
        participant: p.clone(),
        initial: ts.initial(),
        adj,
    }
}

/// A packed set of node ids.
#[derive(Clone, PartialEq)]
struct NodeSet {
    blocks: Vec<u64>,
}

impl NodeSet {
    fn new(n: usize) -> Self {
        NodeSet {
            blocks: vec![0; n.div_ceil(64).max(1)],
        }
    }

    fn insert(&mut self, i: usize) -> bool {
        let slot = &mut self.blocks[i / 64];
        let mask = 1u64 << (i % 64);
        let fresh = *slot & mask == 0;
        *slot |= mask;
        fresh
    }

    fn contains(&self, i: usize) -> bool {
        self.blocks[i / 64] & (1u64 << (i % 64)) != 0
    }

    fn remove(&mut self, i: usize) {
        self.blocks[i / 64] &= !(1u64 << (i % 64));
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            (0..64)
                .filter(move |b| block & (1u64 << b) != 0)
                .map(move |b| bi * 64 + b)
        })
    }
}

/// Per-LTS tables for the bisimulation fixpoint: ε-closures, weak label
/// successors, and strong edges with interned labels.
struct WeakTables {
    closure: Vec<NodeSet>,
    /// weak[label][node] = nodes reachable through ε*·label·ε*.
    weak: Vec<Vec<NodeSet>>,
    strong: Vec<Vec<(Option<usize>, usize)>>,
}

fn epsilon_closure(lts: &ProjectedLts) -> Vec<NodeSet> {
    let n = lts.node_count();
    let mut closure = Vec::with_capacity(n);
    for start in 0..n {
        let mut set = NodeSet::new(n);
        let mut stack = vec![start];
        set.insert(start);
        while let Some(x) = stack.pop() {
            for (label, t) in lts.outgoing(x) {
                if label.is_none() && set.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        closure.push(set);
    }
    closure
}

fn weak_tables(lts: &ProjectedLts, labels: &[Action]) -> WeakTables {
    let n = lts.node_count();
    let closure = epsilon_closure(lts);
    let label_id = |a: &Action| labels.iter().position(|l| l == a);
    let strong: Vec<Vec<(Option<usize>, usize)>> = (0..n)
        .map(|x| {
            lts.outgoing(x)
                .iter()
                .map(|(label, t)| (label.as_ref().and_then(label_id), *t))
                .collect()
        })
        .collect();
    let mut weak = vec![vec![NodeSet::new(n); n]; labels.len()];
    for (l, table) in weak.iter_mut().enumerate() {
        // ε* · l
        let mut after_label = vec![NodeSet::new(n); n];
        for (x, row) in after_label.iter_mut().enumerate() {
            for y in closure[x].iter() {
                for (edge_label, t) in &strong[y] {
                    if *edge_label == Some(l) {
                        row.insert(*t);
                    }
                }
            }
        }
        // · ε*
        for (x, row) in table.iter_mut().enumerate() {
            for t in after_label[x].iter() {
                for z in closure[t].iter() {
                    row.insert(z);
                }
            }
        }
    }
    WeakTables {
        closure,
        weak,
        strong,
    }
}

/// Decide weak bisimilarity of the initial states by greatest-fixpoint
/// refinement of the full relation, with weak moves saturated through
/// ε-closures.
pub fn weak_bisim(a: &ProjectedLts, b: &ProjectedLts) -> bool {
    let mut labels: Vec<Action> = Vec::new();
    for lts in [a, b] {
        for x in 0..lts.node_count() {
            for (label, _) in lts.outgoing(x) {
                if let Some(l) = label {
                    if !labels.contains(l) {
                        labels.push(l.clone());
                    }
                }
            }
        }
    }
    labels.sort();
    let ta = weak_tables(a, &labels);
    let tb = weak_tables(b, &labels);
    let (na, nb) = (a.node_count(), b.node_count());
    // rel[x] = b-nodes related to a-node x; rel_t is the transpose
    let mut rel: Vec<NodeSet> = (0..na)
        .map(|_| {
            let mut s = NodeSet::new(nb);
            for y in 0..nb {
                s.insert(y);
            }
            s
        })
        .collect();
    let mut rel_t: Vec<NodeSet> = (0..nb)
        .map(|_| {
            let mut s = NodeSet::new(na);
            for x in 0..na {
                s.insert(x);
            }
            s
        })
        .collect();
    loop {
        let mut changed = false;
        for x in 0..na {
            let related: Vec<usize> = rel[x].iter().collect();
            for y in related {
                // x's strong moves answered by y's weak moves, inside rel
                let forward = ta.strong[x].iter().all(|(label, x2)| match label {
                    Some(l) => tb.weak[*l][y].iter().any(|y2| rel[*x2].contains(y2)),
                    None => tb.closure[y].iter().any(|y2| rel[*x2].contains(y2)),
                });
                // y's strong moves answered by x's weak moves
                let backward = forward
                    && tb.strong[y].iter().all(|(label, y2)| match label {
                        Some(l) => ta.weak[*l][x].iter().any(|x2| rel_t[*y2].contains(x2)),
                        None => ta.closure[x].iter().any(|x2| rel_t[*y2].contains(x2)),
                    });
                if !backward {
                    rel[x].remove(y);
                    rel_t[y].remove(x);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    rel[a.initial()].contains(b.initial())
}

/// Whether every participant behaves equivalently (weak bisimulation of its
/// projection) at bounds k and k+1 on the full transition systems.
pub fn check_bound_agnostic(
    system: &System,
    k: u32,
    node_cap: usize,
) -> Result<PropertyVerdict, ExploreError> {
    let start = Instant::now();
    let ts_k = build_full_ts(system, k, node_cap)?;
    let ts_k1 = build_full_ts(system, k + 1, node_cap)?;
    let mut verdict = PropertyVerdict {
        property: Property::BoundAgnostic,
        holds: true,
        bound: Bound::Finite(k),
        witness: None,
        stats: GraphStats {
            nodes: ts_k.node_count() + ts_k1.node_count(),
            edges: ts_k.edge_count() + ts_k1.edge_count(),
            wall: std::time::Duration::ZERO,
        },
    };
    for p in system.participants() {
        let pa = project(&ts_k, p);
        let pb = project(&ts_k1, p);
        if !weak_bisim(&pa, &pb) {
            verdict.holds = false;
            break;
        }
    }
    verdict.stats.wall = start.elapsed();
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::explore::DEFAULT_NODE_CAP;
    use crate::testutil::ping_system;

    fn full(name: &str, k: u32) -> (System, TransitionSystem) {
        let sys = corpus::load(name).unwrap();
        let ts = build_full_ts(&sys, k, DEFAULT_NODE_CAP).unwrap();
        (sys, ts)
    }

    #[test]
    fn projection_keeps_own_labels_and_blanks_the_rest() {
        let sys = ping_system();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        let q = sys.participants()[1].clone();
        let proj = project(&ts, &q);
        // path: ε edge (the send) then Q's receive
        let first = &proj.outgoing(proj.initial())[0];
        assert!(first.0.is_none());
        let second = &proj.outgoing(first.1)[0];
        assert_eq!(second.0.as_ref().unwrap().to_string(), "PQ?a");
        // projecting onto P keeps only P's send
        let p = sys.participants()[0].clone();
        let proj = project(&ts, &p);
        let first = &proj.outgoing(proj.initial())[0];
        assert_eq!(first.0.as_ref().unwrap().to_string(), "PQ!a");
        let second = &proj.outgoing(first.1)[0];
        assert!(second.0.is_none());
    }

    #[test]
    fn weak_bisim_is_reflexive_on_projections() {
        for name in ["client_server_logger", "balanced_loop", "token_relay"] {
            let (sys, ts) = full(name, 1);
            for p in sys.participants() {
                let proj = project(&ts, p);
                assert!(weak_bisim(&proj, &proj), "{} / {}", name, p);
            }
        }
    }

    #[test]
    fn weak_bisim_is_symmetric_and_transitive_on_samples() {
        let (sys, ts1) = full("client_server_logger", 1);
        let ts2 = build_full_ts(&sys, 2, DEFAULT_NODE_CAP).unwrap();
        let ts3 = build_full_ts(&sys, 3, DEFAULT_NODE_CAP).unwrap();
        for p in sys.participants() {
            let a = project(&ts1, p);
            let b = project(&ts2, p);
            let c = project(&ts3, p);
            let ab = weak_bisim(&a, &b);
            let ba = weak_bisim(&b, &a);
            let bc = weak_bisim(&b, &c);
            let ac = weak_bisim(&a, &c);
            assert_eq!(ab, ba, "symmetry for {}", p);
            if ab && bc {
                assert!(ac, "transitivity for {}", p);
            }
        }
    }

    #[test]
    fn client_server_logger_is_bound_agnostic_at_one() {
        let (sys, ts1) = full("client_server_logger", 1);
        let ts2 = build_full_ts(&sys, 2, DEFAULT_NODE_CAP).unwrap();
        for p in sys.participants() {
            assert!(weak_bisim(&project(&ts1, p), &project(&ts2, p)), "{}", p);
        }
        assert!(check_bound_agnostic(&sys, 1, DEFAULT_NODE_CAP)
            .unwrap()
            .holds);
    }

    #[test]
    fn optional_consumer_becomes_agnostic_at_two() {
        let sys = corpus::load("optional_consumer").unwrap();
        assert!(!check_bound_agnostic(&sys, 1, DEFAULT_NODE_CAP)
            .unwrap()
            .holds);
        assert!(check_bound_agnostic(&sys, 2, DEFAULT_NODE_CAP)
            .unwrap()
            .holds);
    }

    #[test]
    fn drift_loop_is_not_agnostic_at_small_bounds() {
        // not exhaustive at any bound, so projections keep changing
        let sys = corpus::load("drift_loop").unwrap();
        for k in 1..=2 {
            assert!(!check_bound_agnostic(&sys, k, DEFAULT_NODE_CAP)
                .unwrap()
                .holds);
        }
    }

    #[test]
    fn agnosticity_matches_exhaustivity_spot_checks() {
        for (name, k, expected) in [
            ("client_server_logger", 1, true),
            ("balanced_loop", 1, true),
            ("prefetch_loop", 2, true),
            ("optional_consumer", 1, false),
            ("optional_consumer", 2, true),
        ] {
            let sys = corpus::load(name).unwrap();
            let ts = build_full_ts(&sys, k, DEFAULT_NODE_CAP).unwrap();
            let exhaustive = crate::checks::check_exhaustive(&sys, &ts).holds;
            let agnostic = check_bound_agnostic(&sys, k, DEFAULT_NODE_CAP)
                .unwrap()
                .holds;
            assert_eq!(exhaustive, expected, "{} exhaustivity at {}", name, k);
            assert_eq!(agnostic, expected, "{} agnosticity at {}", name, k);
        }
    }
}
