//! Explicit bounded transition systems and their partial-order-reduced
//! variant.
//!
//! [`build_full_ts`] materializes every configuration reachable through
//! k-bounded executions. [`build_rts`] runs a persistent-set selective
//! search instead: the enabled actions at a configuration are partitioned
//! by subject into a sorted list of groups, and only the head group is
//! expanded at each step, the tail travelling down the stack so no group is
//! deferred forever. [`build_sync_ts`] builds the synchronous transition
//! system in which every send is immediately followed by its matching
//! receive.
//!
//! Graphs are stored flat — packed configurations in chunked arenas, edges
//! as action-id/target arrays — so that the larger benchmark instances stay
//! within memory.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::rc::Rc;

use thiserror::Error;

use crate::model::{fire_step, step_enabled, Action, Bound, Configuration, Direction, System};

/// Default ceiling on the number of materialized configurations.
pub const DEFAULT_NODE_CAP: usize = 5_000_000;

const CHUNK_BITS: usize = 16;
const CHUNK: usize = 1 << CHUNK_BITS;

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("exploration exceeded the cap of {cap} configurations")]
    NodeCapExceeded { cap: usize },
}

/// Which construction produced a transition system.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TsKind {
    /// All k-bounded steps.
    Full(u32),
    /// The reduced exploration at bound k.
    Reduced(u32),
    /// Send-receive exchanges only.
    Synchronous,
}

impl TsKind {
    /// The channel capacity under which this system's edges were fired.
    pub fn bound(self) -> Bound {
        match self {
            TsKind::Full(k) | TsKind::Reduced(k) => Bound::Finite(k),
            TsKind::Synchronous => Bound::Finite(1),
        }
    }
}

/// Open-addressed configuration index: hashes only, node payloads stay in
/// the arena.
struct NodeIndex {
    slots: Vec<u32>,
    mask: usize,
    len: usize,
}

const EMPTY_SLOT: u32 = u32::MAX;

impl NodeIndex {
    fn new() -> Self {
        NodeIndex {
            slots: vec![EMPTY_SLOT; 1 << 10],
            mask: (1 << 10) - 1,
            len: 0,
        }
    }

    fn grow(&mut self, nodes: &Arena) {
        let capacity = self.slots.len() * 2;
        let mut slots = vec![EMPTY_SLOT; capacity];
        let mask = capacity - 1;
        for &id in self.slots.iter().filter(|&&id| id != EMPTY_SLOT) {
            let mut at = nodes.get(id as usize).fingerprint() as usize & mask;
            while slots[at] != EMPTY_SLOT {
                at = (at + 1) & mask;
            }
            slots[at] = id;
        }
        self.slots = slots;
        self.mask = mask;
    }

    fn find(&self, nodes: &Arena, config: &Configuration) -> Option<usize> {
        let mut at = config.fingerprint() as usize & self.mask;
        loop {
            match self.slots[at] {
                EMPTY_SLOT => return None,
                id if nodes.get(id as usize) == config => return Some(id as usize),
                _ => at = (at + 1) & self.mask,
            }
        }
    }

    /// Insert a config known to be absent, returning its slot for the id.
    fn insert(&mut self, nodes: &Arena, config: &Configuration, id: u32) {
        if (self.len + 1) * 3 > self.slots.len() * 2 {
            self.grow(nodes);
        }
        let mut at = config.fingerprint() as usize & self.mask;
        while self.slots[at] != EMPTY_SLOT {
            at = (at + 1) & self.mask;
        }
        self.slots[at] = id;
        self.len += 1;
    }
}

/// Chunked configuration storage; avoids reallocation spikes on large
/// explorations.
struct Arena {
    chunks: Vec<Vec<Configuration>>,
    len: usize,
}

impl Arena {
    fn new() -> Self {
        Arena {
            chunks: vec![Vec::with_capacity(CHUNK.min(1024))],
            len: 0,
        }
    }

    fn push(&mut self, config: Configuration) -> usize {
        if self.chunks.last().unwrap().len() == CHUNK {
            self.chunks.push(Vec::with_capacity(CHUNK));
        }
        self.chunks.last_mut().unwrap().push(config);
        self.len += 1;
        self.len - 1
    }

    fn get(&self, id: usize) -> &Configuration {
        &self.chunks[id >> CHUNK_BITS][id & (CHUNK - 1)]
    }
}

/// An explicit labelled graph over configurations.
pub struct TransitionSystem {
    kind: TsKind,
    /// The action universe the edge labels index into.
    actions: Vec<Action>,
    nodes: Arena,
    index: NodeIndex,
    /// Per-node edge window into the flat arrays.
    out_start: Vec<u32>,
    out_len: Vec<u16>,
    edge_actions: Vec<u16>,
    edge_targets: Vec<u32>,
}

impl TransitionSystem {
    fn new(kind: TsKind, system: &System, initial: Configuration) -> Self {
        let mut ts = TransitionSystem {
            kind,
            actions: system.actions().to_vec(),
            nodes: Arena::new(),
            index: NodeIndex::new(),
            out_start: Vec::new(),
            out_len: Vec::new(),
            edge_actions: Vec::new(),
            edge_targets: Vec::new(),
        };
        ts.intern(initial, usize::MAX).unwrap();
        ts
    }

    fn intern(&mut self, config: Configuration, cap: usize) -> Result<usize, ExploreError> {
        if let Some(id) = self.index.find(&self.nodes, &config) {
            return Ok(id);
        }
        if self.nodes.len >= cap {
            return Err(ExploreError::NodeCapExceeded { cap });
        }
        let id = self.nodes.len;
        self.index.insert(&self.nodes, &config, id as u32);
        self.nodes.push(config);
        self.out_start.push(0);
        self.out_len.push(0);
        Ok(id)
    }

    /// Record the full outgoing edge batch of a node (each node commits at
    /// most once).
    fn commit_edges(&mut self, node: usize, edges: &[(u16, u32)]) {
        debug_assert_eq!(self.out_len[node], 0);
        self.out_start[node] = self.edge_actions.len() as u32;
        self.out_len[node] = edges.len() as u16;
        for &(action, target) in edges {
            self.edge_actions.push(action);
            self.edge_targets.push(target);
        }
    }

    pub fn kind(&self) -> TsKind {
        self.kind
    }

    pub fn bound(&self) -> Bound {
        self.kind.bound()
    }

    /// The initial configuration's node id (always 0).
    pub fn initial(&self) -> usize {
        0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len
    }

    pub fn edge_count(&self) -> usize {
        self.edge_actions.len()
    }

    pub fn node(&self, id: usize) -> &Configuration {
        self.nodes.get(id)
    }

    pub fn node_id(&self, config: &Configuration) -> Option<usize> {
        self.index.find(&self.nodes, config)
    }

    pub fn action(&self, id: u16) -> &Action {
        &self.actions[id as usize]
    }

    /// Outgoing edges of a node as `(action id, target)`, in exploration
    /// order.
    pub fn outgoing_ids(&self, id: usize) -> impl Iterator<Item = (u16, usize)> + '_ {
        let start = self.out_start[id] as usize;
        let len = self.out_len[id] as usize;
        self.edge_actions[start..start + len]
            .iter()
            .zip(&self.edge_targets[start..start + len])
            .map(|(&a, &t)| (a, t as usize))
    }

    /// Outgoing edges of a node with resolved action labels.
    pub fn outgoing(&self, id: usize) -> impl Iterator<Item = (&Action, usize)> + '_ {
        self.outgoing_ids(id).map(|(a, t)| (self.action(a), t))
    }

    /// Whether the node has an outgoing edge with exactly this action.
    pub fn has_edge(&self, id: usize, action_id: u16) -> bool {
        self.outgoing_ids(id).any(|(a, _)| a == action_id)
    }

    /// Iterate over all edges as `(from, action, to)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, &Action, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |n| self.outgoing(n).map(move |(a, t)| (n, a, t)))
    }

    /// Incoming edges in compressed form.
    pub fn reverse_adjacency(&self) -> ReverseAdjacency {
        let n = self.node_count();
        let mut counts = vec![0u32; n + 1];
        for &t in &self.edge_targets {
            counts[t as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut preds = vec![0u32; self.edge_targets.len()];
        let mut fill = counts.clone();
        for from in 0..n {
            let start = self.out_start[from] as usize;
            let len = self.out_len[from] as usize;
            for &t in &self.edge_targets[start..start + len] {
                let slot = fill[t as usize] as usize;
                preds[slot] = from as u32;
                fill[t as usize] += 1;
            }
        }
        ReverseAdjacency {
            starts: counts,
            preds,
        }
    }

    /// True if `other` contains every node and every edge of `self`.
    pub fn is_subgraph_of(&self, other: &TransitionSystem) -> bool {
        for from in 0..self.node_count() {
            let of = match other.node_id(self.node(from)) {
                Some(i) => i,
                None => return false,
            };
            for (action, to) in self.outgoing(from) {
                let ot = match other.node_id(self.node(to)) {
                    Some(i) => i,
                    None => return false,
                };
                if !other
                    .outgoing(of)
                    .any(|(a, t)| a == action && t == ot)
                {
                    return false;
                }
            }
        }
        true
    }
}

impl std::fmt::Debug for TransitionSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionSystem")
            .field("kind", &self.kind)
            .field("nodes", &self.node_count())
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// Predecessor lists in compressed sparse form.
pub struct ReverseAdjacency {
    starts: Vec<u32>,
    preds: Vec<u32>,
}

impl ReverseAdjacency {
    pub fn preds(&self, node: usize) -> &[u32] {
        &self.preds[self.starts[node] as usize..self.starts[node + 1] as usize]
    }
}

/// The enabled actions at a configuration, grouped by subject and arranged
/// into a list sorted by ascending group size.
///
/// Ties between equal-sized groups break on the subject's name; within a
/// group, actions sort by `(partner, direction, label)`. The fixed order
/// makes the reduced exploration reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub groups: Vec<Vec<Action>>,
}

impl Partition {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Partition the actions enabled at `config` under `bound`.
pub fn partition(system: &System, config: &Configuration, bound: Bound) -> Partition {
    let groups = partition_ids(system, config, bound);
    let partition = Partition {
        groups: groups
            .into_iter()
            .map(|g| g.into_iter().map(|a| system.action(a).clone()).collect())
            .collect(),
    };
    debug_assert!(partition
        .groups
        .iter()
        .all(|g| g.windows(2).all(|w| w[0].subject() == w[1].subject())));
    debug_assert!(partition
        .groups
        .windows(2)
        .all(|w| w[0].len() <= w[1].len()));
    partition
}

/// The same partition as action ids; participants sorted by name for the
/// tie-break.
fn partition_ids(system: &System, config: &Configuration, bound: Bound) -> Vec<Vec<u16>> {
    let mut groups: Vec<(usize, Vec<u16>)> = Vec::new();
    for p in 0..system.participant_count() {
        let state = config.local_state(p);
        let mut ids: Vec<u16> = system
            .steps_from(p, state)
            .iter()
            .filter(|step| step_enabled(config, step, bound))
            .map(|step| step.action_id)
            .collect();
        if ids.is_empty() {
            continue;
        }
        // within a group: (partner, direction, label)
        ids.sort_by(|&x, &y| {
            let a = system.action(x);
            let b = system.action(y);
            (a.partner(), a.direction, &a.label).cmp(&(b.partner(), b.direction, &b.label))
        });
        groups.push((p, ids));
    }
    groups.sort_by(|(pa, ga), (pb, gb)| {
        (ga.len(), system.participants()[*pa].name())
            .cmp(&(gb.len(), system.participants()[*pb].name()))
    });
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Build the full k-bounded transition system: all configurations reachable
/// from the initial one through k-bounded steps, and all such steps.
pub fn build_full_ts(
    system: &System,
    k: u32,
    node_cap: usize,
) -> Result<TransitionSystem, ExploreError> {
    let bound = Bound::Finite(k);
    let mut ts = TransitionSystem::new(TsKind::Full(k), system, system.initial_configuration());
    let mut queue = VecDeque::from([0usize]);
    let mut batch: Vec<(u16, u32)> = Vec::new();
    while let Some(n) = queue.pop_front() {
        batch.clear();
        let config = ts.node(n).clone();
        for p in 0..system.participant_count() {
            let state = config.local_state(p);
            for step in system.steps_from(p, state) {
                if let Ok(succ) = fire_step(system, &config, p, step, bound) {
                    let fresh = ts.node_id(&succ).is_none();
                    let t = ts.intern(succ, node_cap)?;
                    batch.push((step.action_id, t as u32));
                    if fresh {
                        queue.push_back(t);
                    }
                }
            }
        }
        ts.commit_edges(n, &batch);
    }
    Ok(ts)
}

/// Build the reduced k-bounded transition system.
///
/// Depth-first stack of `(configuration, pending group list)` pairs. On the
/// first visit of a configuration, the pending list (or, when exhausted, a
/// fresh partition) supplies the single group that is expanded; successors
/// inherit the remainder of the list. Later pops of a visited configuration
/// are dropped. Inherited actions that are no longer firable are skipped;
/// this only happens outside the bound-independent class.
pub fn build_rts(
    system: &System,
    k: u32,
    node_cap: usize,
) -> Result<TransitionSystem, ExploreError> {
    let bound = Bound::Finite(k);
    let mut ts = TransitionSystem::new(TsKind::Reduced(k), system, system.initial_configuration());
    type Pending = Rc<Vec<Vec<u16>>>;
    let empty: Pending = Rc::new(Vec::new());
    let mut visited = vec![false];
    let mut stack: Vec<(usize, Pending, usize)> = vec![(0, empty, 0)];
    let mut batch: Vec<(u16, u32)> = Vec::new();
    while let Some((n, pending, offset)) = stack.pop() {
        if visited[n] {
            continue;
        }
        visited[n] = true;
        let (pending, offset) = if offset >= pending.len() {
            (Rc::new(partition_ids(system, ts.node(n), bound)), 0)
        } else {
            (pending, offset)
        };
        if offset >= pending.len() {
            continue;
        }
        let config = ts.node(n).clone();
        batch.clear();
        for &aid in &pending[offset] {
            let subject = system.action_subject_id(aid);
            let state = config.local_state(subject);
            let step = match system
                .steps_from(subject, state)
                .iter()
                .find(|s| s.action_id == aid)
            {
                Some(step) => step,
                None => continue,
            };
            let succ = match fire_step(system, &config, subject, step, bound) {
                Ok(succ) => succ,
                Err(_) => continue,
            };
            let t = ts.intern(succ, node_cap)?;
            while visited.len() < ts.node_count() {
                visited.push(false);
            }
            batch.push((aid, t as u32));
            stack.push((t, pending.clone(), offset + 1));
        }
        ts.commit_edges(n, &batch);
    }
    Ok(ts)
}

/// Build the synchronous transition system: from each stable configuration,
/// a send may fire only when its matching receive can follow immediately,
/// and the pair contributes a send edge into the in-flight configuration
/// and a receive edge out of it.
pub fn build_sync_ts(system: &System, node_cap: usize) -> Result<TransitionSystem, ExploreError> {
    let bound = Bound::Finite(1);
    let mut ts =
        TransitionSystem::new(TsKind::Synchronous, system, system.initial_configuration());
    let mut queue = VecDeque::from([0usize]);
    let mut expanded = vec![false];
    // edges collected per node first: receive edges of in-flight nodes are
    // discovered while expanding their stable predecessors
    let mut pending_edges: Vec<Vec<(u16, u32)>> = vec![Vec::new()];
    while let Some(n) = queue.pop_front() {
        if expanded[n] {
            continue;
        }
        expanded[n] = true;
        let config = ts.node(n).clone();
        for p in 0..system.participant_count() {
            let state = config.local_state(p);
            for step in system.steps_from(p, state) {
                if step.direction != Direction::Send
                    || !step_enabled(&config, step, bound)
                {
                    continue;
                }
                let mid = fire_step(system, &config, p, step, bound)
                    .expect("enabled step must fire");
                let action = system.action(step.action_id);
                let receiver = system
                    .participant_id(&action.channel.receiver)
                    .expect("receiver is declared");
                let receive = system
                    .steps_from(receiver, mid.local_state(receiver))
                    .iter()
                    .find(|s| {
                        s.direction == Direction::Receive
                            && s.slot == step.slot
                            && s.label == step.label
                            && step_enabled(&mid, s, bound)
                    })
                    .copied();
                let Some(receive) = receive else { continue };
                let done = fire_step(system, &mid, receiver, &receive, bound)
                    .expect("matching receive must fire");
                let m = ts.intern(mid, node_cap)?;
                let fresh = ts.node_id(&done).is_none();
                let d = ts.intern(done, node_cap)?;
                while pending_edges.len() < ts.node_count() {
                    pending_edges.push(Vec::new());
                    expanded.push(false);
                }
                if !pending_edges[n].contains(&(step.action_id, m as u32)) {
                    pending_edges[n].push((step.action_id, m as u32));
                }
                if !pending_edges[m].contains(&(receive.action_id, d as u32)) {
                    pending_edges[m].push((receive.action_id, d as u32));
                }
                if fresh {
                    queue.push_back(d);
                }
            }
        }
    }
    for (n, edges) in pending_edges.iter().enumerate() {
        ts.commit_edges(n, edges);
    }
    Ok(ts)
}

/// Render the transition system in DOT. Node labels show the control vector
/// and queue contents; the initial node is drawn with a double border.
pub fn to_dot(system: &System, ts: &TransitionSystem) -> String {
    let mut out = String::new();
    let name = match ts.kind() {
        TsKind::Full(k) => format!("ts_{}", k),
        TsKind::Reduced(k) => format!("rts_{}", k),
        TsKind::Synchronous => "ts_sync".to_string(),
    };
    writeln!(out, "digraph {} {{", name).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for id in 0..ts.node_count() {
        let label = system
            .describe_configuration(ts.node(id))
            .replace('"', "\\\"");
        let marker = if id == ts.initial() { ", peripheries=2" } else { "" };
        writeln!(out, "  n{} [label=\"{}\"{}];", id, label, marker).unwrap();
    }
    for (from, action, to) in ts.edges() {
        writeln!(out, "  n{} -> n{} [label=\"{}\"];", from, to, action).unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

/// Enumerate every directed path from the initial node up to `max_len`
/// edges, as action sequences. Returns `None` once more than `max_paths`
/// would be produced.
pub fn enumerate_paths(
    ts: &TransitionSystem,
    max_len: usize,
    max_paths: usize,
) -> Option<Vec<Vec<Action>>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(
        ts: &TransitionSystem,
        node: usize,
        max_len: usize,
        max_paths: usize,
        current: &mut Vec<Action>,
        out: &mut Vec<Vec<Action>>,
    ) -> bool {
        if out.len() > max_paths {
            return false;
        }
        out.push(current.clone());
        if current.len() == max_len {
            return true;
        }
        let steps: Vec<(u16, usize)> = ts.outgoing_ids(node).collect();
        for (action, t) in steps {
            current.push(ts.action(action).clone());
            let ok = walk(ts, t, max_len, max_paths, current, out);
            current.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    if walk(ts, ts.initial(), max_len, max_paths, &mut current, &mut out) {
        Some(out)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::model::{successor, Automaton, Participant};
    use crate::testutil::{ping_system, recv, send};

    #[test]
    fn ping_full_ts_has_three_nodes_two_edges() {
        let sys = ping_system();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(ts.node_count(), 3);
        assert_eq!(ts.edge_count(), 2);
    }

    #[test]
    fn transition_free_system_is_a_single_node() {
        let p = Automaton::new(Participant::new("p"), "0", &[]);
        let q = Automaton::new(Participant::new("q"), "0", &[]);
        let sys = crate::model::System::new(vec![p, q]).unwrap();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!((ts.node_count(), ts.edge_count()), (1, 0));
        let rts = build_rts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!((rts.node_count(), rts.edge_count()), (1, 0));
    }

    #[test]
    fn balanced_loop_full_ts_is_finite_and_bounded() {
        let sys = corpus::load("balanced_loop").unwrap();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert!(ts.node_count() > 1);
        for n in 0..ts.node_count() {
            assert!(ts.node(n).is_k_bounded(1));
        }
    }

    #[test]
    fn ping_rts_equals_full_ts() {
        let sys = ping_system();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        let rts = build_rts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(rts.node_count(), ts.node_count());
        assert_eq!(rts.edge_count(), ts.edge_count());
        assert!(rts.is_subgraph_of(&ts));
    }

    #[test]
    fn singleton_group_is_explored_before_larger_ones() {
        // p has one send, z two sends from its initial state; the partition
        // at the initial configuration must list p's group first.
        let p = Automaton::new(
            Participant::new("p"),
            "0",
            &[("0", send("p", "q", "a"), "1")],
        );
        let q = Automaton::new(Participant::new("q"), "0", &[]);
        let z = Automaton::new(
            Participant::new("z"),
            "0",
            &[
                ("0", send("z", "r", "x"), "1"),
                ("0", send("z", "r", "y"), "1"),
            ],
        );
        let r = Automaton::new(Participant::new("r"), "0", &[]);
        let sys = crate::model::System::new(vec![p, q, z, r]).unwrap();
        let part = partition(&sys, &sys.initial_configuration(), Bound::Finite(1));
        assert_eq!(
            part.groups,
            vec![
                vec![send("p", "q", "a")],
                vec![send("z", "r", "x"), send("z", "r", "y")],
            ]
        );
        // with the sorted list the reduction keeps 3 transitions (4 states)
        let rts = build_rts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(rts.edge_count(), 3);
        assert_eq!(rts.node_count(), 4);
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert!(rts.is_subgraph_of(&ts));
    }

    #[test]
    fn equal_size_groups_break_ties_on_participant_name() {
        let p = Automaton::new(
            Participant::new("b"),
            "0",
            &[("0", send("b", "a", "m"), "1")],
        );
        let q = Automaton::new(
            Participant::new("a"),
            "0",
            &[("0", send("a", "b", "n"), "1")],
        );
        let sys = crate::model::System::new(vec![p, q]).unwrap();
        let part = partition(&sys, &sys.initial_configuration(), Bound::Finite(1));
        assert_eq!(part.groups[0][0].subject().name(), "a");
    }

    #[test]
    fn deadlocked_configuration_has_empty_partition() {
        let sys = ping_system();
        let s0 = sys.initial_configuration();
        let s1 = successor(&sys, &s0, &send("P", "Q", "a"), Bound::Finite(1)).unwrap();
        let s2 = successor(&sys, &s1, &recv("P", "Q", "a"), Bound::Finite(1)).unwrap();
        assert!(partition(&sys, &s2, Bound::Finite(1)).is_empty());
    }

    #[test]
    fn client_server_logger_rts_has_eleven_edges_at_bound_one() {
        let sys = corpus::load("client_server_logger").unwrap();
        let rts = build_rts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(rts.edge_count(), 11);
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        assert!(rts.is_subgraph_of(&ts));
        assert!(rts.edge_count() <= ts.edge_count());
    }

    #[test]
    fn builds_are_deterministic() {
        let sys = corpus::load("client_server_logger").unwrap();
        let collect = |ts: &TransitionSystem| -> Vec<(usize, String, usize)> {
            ts.edges()
                .map(|(f, a, t)| (f, a.to_string(), t))
                .collect()
        };
        let a = build_rts(&sys, 2, DEFAULT_NODE_CAP).unwrap();
        let b = build_rts(&sys, 2, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(collect(&a), collect(&b));
        let fa = build_full_ts(&sys, 2, DEFAULT_NODE_CAP).unwrap();
        let fb = build_full_ts(&sys, 2, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(collect(&fa), collect(&fb));
        for n in 0..fa.node_count() {
            assert_eq!(fa.node(n), fb.node(n));
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let sys = corpus::load("client_server_logger").unwrap();
        assert!(matches!(
            build_full_ts(&sys, 1, 3),
            Err(ExploreError::NodeCapExceeded { cap: 3 })
        ));
    }

    #[test]
    fn dot_output_is_well_formed() {
        let sys = ping_system();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        let dot = to_dot(&sys, &ts);
        assert!(dot.starts_with("digraph"));
        assert!(dot.trim_end().ends_with('}'));
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("PQ!a"));
        assert!(dot.contains("peripheries=2"));
        // single-node graph renders too
        let p = Automaton::new(Participant::new("p"), "0", &[]);
        let q = Automaton::new(Participant::new("q"), "0", &[]);
        let tiny = crate::model::System::new(vec![p, q]).unwrap();
        let ts = build_full_ts(&tiny, 1, DEFAULT_NODE_CAP).unwrap();
        let dot = to_dot(&tiny, &ts);
        assert_eq!(dot.matches("->").count(), 0);
        assert!(dot.contains("n0"));
    }

    #[test]
    fn path_enumeration_respects_caps() {
        let sys = ping_system();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        let paths = enumerate_paths(&ts, 12, 10_000).unwrap();
        // ε, the send, and send·receive
        assert_eq!(paths.len(), 3);
        assert!(enumerate_paths(&ts, 12, 1).is_none());
    }

    #[test]
    fn reverse_adjacency_inverts_the_edges() {
        let sys = corpus::load("client_server_logger").unwrap();
        let ts = build_full_ts(&sys, 1, DEFAULT_NODE_CAP).unwrap();
        let rev = ts.reverse_adjacency();
        for (from, _, to) in ts.edges() {
            assert!(rev.preds(to).contains(&(from as u32)));
        }
        let pred_total: usize = (0..ts.node_count()).map(|n| rev.preds(n).len()).sum();
        assert_eq!(pred_total, ts.edge_count());
    }
}
