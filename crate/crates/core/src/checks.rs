//! Decision procedures for the bounded properties of a system, evaluated
//! over an explicit (full or reduced) transition system.
//!
//! Output bound independence (OBI) and input bound independence (IBI)
//! guarantee that channel capacities neither restrict internal-choice sends
//! nor create input races. SIBI and CIBI are decidable strengthenings of
//! IBI: SIBI forbids a rival input's feeding send outright, CIBI permits it
//! behind a dependency chain rooted in the committed receive. Exhaustivity
//! asks that every send available at a reachable configuration can be fired
//! within the bound without its subject moving first. Safety combines
//! eventual reception and progress. The compatibility driver
//! [`check_kmc`] iterates the bound until these conditions certify a
//! verdict.

use std::collections::{HashSet, VecDeque};
use std::time::{Duration, Instant};

use crate::explore::{
    build_full_ts, build_rts, build_sync_ts, ExploreError, TransitionSystem, TsKind,
};
use crate::model::{
    enabled_for, successor, Action, Bound, Channel, Configuration, Direction, Execution,
    StateKind, System,
};

/// The properties this module can decide.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Property {
    SendDirected,
    ReceiveDirected,
    Obi,
    Ibi,
    Sibi,
    Cibi,
    Exhaustive,
    SafetyEr,
    SafetyPg,
    Stable,
    Kmc,
    Smc,
    BoundAgnostic,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::SendDirected => "send-directed",
            Property::ReceiveDirected => "receive-directed",
            Property::Obi => "obi",
            Property::Ibi => "ibi",
            Property::Sibi => "sibi",
            Property::Cibi => "cibi",
            Property::Exhaustive => "exhaustive",
            Property::SafetyEr => "eventual-reception",
            Property::SafetyPg => "progress",
            Property::Stable => "stable",
            Property::Kmc => "kmc",
            Property::Smc => "smc",
            Property::BoundAgnostic => "bound-agnostic",
        }
    }
}

/// A counterexample: a replayable path from the initial configuration to
/// the configuration where the property breaks.
#[derive(Clone, Debug)]
pub struct Witness {
    pub path: Execution,
    pub configuration: Configuration,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub wall: Duration,
}

/// The outcome of one property check at one bound.
#[derive(Clone, Debug)]
pub struct PropertyVerdict {
    pub property: Property,
    pub holds: bool,
    pub bound: Bound,
    pub witness: Option<Witness>,
    pub stats: GraphStats,
}

impl PropertyVerdict {
    fn new(property: Property, bound: Bound, ts: Option<&TransitionSystem>) -> Self {
        let stats = ts
            .map(|ts| GraphStats {
                nodes: ts.node_count(),
                edges: ts.edge_count(),
                wall: Duration::ZERO,
            })
            .unwrap_or_default();
        PropertyVerdict {
            property,
            holds: true,
            bound,
            witness: None,
            stats,
        }
    }

    fn fail(mut self, witness: Option<Witness>) -> Self {
        self.holds = false;
        self.witness = witness;
        self
    }

    fn timed(mut self, start: Instant) -> Self {
        self.stats.wall = start.elapsed();
        self
    }
}

/// Shortest action path from the initial node to `target`.
fn shortest_path(ts: &TransitionSystem, target: usize) -> Execution {
    if target == ts.initial() {
        return Vec::new();
    }
    let mut back: Vec<Option<(usize, Action)>> = vec![None; ts.node_count()];
    let mut queue = VecDeque::from([ts.initial()]);
    let mut seen = vec![false; ts.node_count()];
    seen[ts.initial()] = true;
    'bfs: while let Some(n) = queue.pop_front() {
        for (action, t) in ts.outgoing(n) {
            if !seen[t] {
                seen[t] = true;
                back[t] = Some((n, action.clone()));
                if t == target {
                    break 'bfs;
                }
                queue.push_back(t);
            }
        }
    }
    let mut path = Vec::new();
    let mut at = target;
    while let Some((prev, action)) = back[at].clone() {
        path.push(action);
        at = prev;
    }
    path.reverse();
    path
}

fn witness_at(ts: &TransitionSystem, node: usize, detail: String) -> Witness {
    Witness {
        path: shortest_path(ts, node),
        configuration: ts.node(node).clone(),
        detail,
    }
}

/// Dense bit rows over the system's action universe.
#[derive(Clone)]
struct ActionSets {
    width: usize,
    blocks: usize,
    rows: Vec<u64>,
}

impl ActionSets {
    fn new(nodes: usize, width: usize) -> Self {
        let blocks = width.div_ceil(64).max(1);
        ActionSets {
            width,
            blocks,
            rows: vec![0; nodes * blocks],
        }
    }

    fn set(&mut self, row: usize, bit: usize) {
        debug_assert!(bit < self.width);
        self.rows[row * self.blocks + bit / 64] |= 1u64 << (bit % 64);
    }

    fn get(&self, row: usize, bit: usize) -> bool {
        self.rows[row * self.blocks + bit / 64] & (1u64 << (bit % 64)) != 0
    }

    /// `rows[dst] |= rows[src]`; true if `dst` changed.
    fn merge(&mut self, dst: usize, src: usize) -> bool {
        let mut changed = false;
        for b in 0..self.blocks {
            let v = self.rows[src * self.blocks + b];
            let slot = dst * self.blocks + b;
            if self.rows[slot] | v != self.rows[slot] {
                self.rows[slot] |= v;
                changed = true;
            }
        }
        changed
    }
}

/// For every node, the set of actions firable on some path from it. With
/// `excluded = Some(p)`, paths may not move `p` before the firing.
fn firable_sets(system: &System, ts: &TransitionSystem, excluded: Option<usize>) -> ActionSets {
    let width = system.actions().len();
    let mut sets = ActionSets::new(ts.node_count(), width);
    let rev = ts.reverse_adjacency();
    let mut dirty: VecDeque<usize> = VecDeque::new();
    let mut queued = vec![true; ts.node_count()];
    for n in 0..ts.node_count() {
        for (aid, _) in ts.outgoing_ids(n) {
            sets.set(n, aid as usize);
        }
        dirty.push_back(n);
    }
    while let Some(n) = dirty.pop_front() {
        queued[n] = false;
        for &pred in rev.preds(n) {
            let pred = pred as usize;
            let admissible = match excluded {
                None => true,
                Some(p) => ts
                    .outgoing_ids(pred)
                    .any(|(aid, t)| t == n && system.action_subject_id(aid) != p),
            };
            if admissible && sets.merge(pred, n) && !queued[pred] {
                queued[pred] = true;
                dirty.push_back(pred);
            }
        }
    }
    sets
}

/// Whether every sending state reached in `ts` keeps all its sends enabled
/// under the bound whenever one of them is.
pub fn check_obi(system: &System, ts: &TransitionSystem) -> PropertyVerdict {
    let start = Instant::now();
    let bound = ts.bound();
    let verdict = PropertyVerdict::new(Property::Obi, bound, Some(ts));
    for n in 0..ts.node_count() {
        let config = ts.node(n);
        for p in 0..system.participant_count() {
            let machine = system.automaton(p);
            let state = config.local_state(p);
            if machine.state_kind(state) != StateKind::Sending {
                continue;
            }
            let enabled = enabled_for(system, config, bound, p);
            if enabled.is_empty() {
                continue;
            }
            let transitions = machine.transitions_from(state);
            if enabled.len() < transitions.len() {
                let missing = transitions
                    .iter()
                    .map(|(a, _)| a)
                    .find(|a| !enabled.contains(a))
                    .expect("some transition is disabled");
                let detail = format!(
                    "{} can fire a send here but {} is blocked",
                    system.participants()[p],
                    missing
                );
                return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
            }
        }
    }
    verdict.timed(start)
}

/// Whether no reached configuration enables two distinct receive actions of
/// the same participant.
pub fn check_ibi(system: &System, ts: &TransitionSystem) -> PropertyVerdict {
    let start = Instant::now();
    let bound = ts.bound();
    let verdict = PropertyVerdict::new(Property::Ibi, bound, Some(ts));
    for n in 0..ts.node_count() {
        let config = ts.node(n);
        for p in 0..system.participant_count() {
            let enabled = enabled_for(system, config, bound, p);
            if enabled.iter().any(Action::is_receive) && enabled.len() > 1 {
                let detail = format!(
                    "{} can consume from two sources: {} and {}",
                    system.participants()[p],
                    enabled[0],
                    enabled[1]
                );
                return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
            }
        }
    }
    verdict.timed(start)
}

/// The send that would feed a receive action.
fn feeding_send(receive: &Action) -> Action {
    Action {
        channel: receive.channel.clone(),
        direction: Direction::Send,
        label: receive.label.clone(),
    }
}

/// Rival receives of `p` at its local state in `config`: receive
/// transitions whose sender differs from the committed action's.
fn rival_receives<'a>(
    system: &'a System,
    config: &Configuration,
    p: usize,
    committed: &Action,
) -> impl Iterator<Item = &'a Action> {
    let machine = system.automaton(p);
    let state = config.local_state(p);
    let committed_sender = committed.channel.sender.clone();
    machine
        .transitions_from(state)
        .iter()
        .map(|(a, _)| a)
        .filter(move |a| a.is_receive() && a.channel.sender != committed_sender)
}

/// Whether a committed receive never races against another sender: the
/// rival input is not enabled, and its feeding send is not fired on any
/// path (from the configuration itself on a reduced system, from the
/// post-state on a full one).
pub fn check_sibi(system: &System, ts: &TransitionSystem) -> PropertyVerdict {
    let start = Instant::now();
    let bound = ts.bound();
    let verdict = PropertyVerdict::new(Property::Sibi, bound, Some(ts));
    let firable = firable_sets(system, ts, None);
    for n in 0..ts.node_count() {
        let config = ts.node(n);
        let steps: Vec<(Action, usize)> = ts
            .outgoing(n)
            .map(|(a, t)| (a.clone(), t))
            .collect();
        for (action, succ) in &steps {
            if !action.is_receive() {
                continue;
            }
            let p = system
                .participant_id(action.subject())
                .expect("subject is declared");
            for rival in rival_receives(system, config, p, action) {
                if steps.iter().any(|(a, _)| a == rival) {
                    let detail = format!(
                        "{} is committed to {} but rival {} is enabled",
                        action.subject(),
                        action,
                        rival
                    );
                    return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
                }
                let send = feeding_send(rival);
                let from = match ts.kind() {
                    TsKind::Reduced(_) => n,
                    _ => *succ,
                };
                if let Some(id) = system.action_id(&send) {
                    if firable.get(from, id) {
                        let detail = format!(
                            "{} is committed to {} but {} can still fire",
                            action.subject(),
                            action,
                            send
                        );
                        return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
                    }
                }
            }
        }
    }
    verdict.timed(start)
}

/// One-step dependency between actions at a configuration: same subject, or
/// same channel while that channel's queue is empty at `config`.
pub fn depends(system: &System, config: &Configuration, l1: &Action, l2: &Action) -> bool {
    if l1.subject() == l2.subject() {
        return true;
    }
    if l1.channel == l2.channel {
        if let Some(chan) = system.channel_id(&l1.channel) {
            return system.queue_len_of(config, chan) == 0;
        }
    }
    false
}

/// Dependency of `l_prime` on `l` through the intermediate execution `phi`,
/// chaining one-step dependencies evaluated at `config`.
pub fn depends_in(
    system: &System,
    config: &Configuration,
    l: &Action,
    phi: &[Action],
    l_prime: &Action,
) -> bool {
    match phi.split_first() {
        None => depends(system, config, l, l_prime),
        Some((head, rest)) => {
            (depends(system, config, l, head) && depends_in(system, config, head, rest, l_prime))
                || depends_in(system, config, l, rest, l_prime)
        }
    }
}

/// Chain frontier for the iterative dependency search: the subjects already
/// reachable along some chain, and the chain members' channels that are
/// empty at the base configuration.
#[derive(Clone, PartialEq, Eq, Hash)]
struct ChainFrontier {
    subjects: Vec<usize>,
    channels: Vec<usize>,
}

impl ChainFrontier {
    fn seed(system: &System, base: &Configuration, root: &Action) -> Self {
        let mut frontier = ChainFrontier {
            subjects: vec![system.participant_id(root.subject()).unwrap()],
            channels: Vec::new(),
        };
        if let Some(chan) = system.channel_id(&root.channel) {
            if system.queue_len_of(base, chan) == 0 {
                frontier.channels.push(chan);
            }
        }
        frontier
    }

    fn covers(&self, system: &System, action: &Action) -> bool {
        let subject = system.participant_id(action.subject()).unwrap();
        if self.subjects.contains(&subject) {
            return true;
        }
        match system.channel_id(&action.channel) {
            Some(chan) => self.channels.contains(&chan),
            None => false,
        }
    }

    fn extend(&self, system: &System, base: &Configuration, action: &Action) -> Self {
        let mut next = self.clone();
        let subject = system.participant_id(action.subject()).unwrap();
        if !next.subjects.contains(&subject) {
            next.subjects.push(subject);
            next.subjects.sort_unstable();
        }
        if let Some(chan) = system.channel_id(&action.channel) {
            if system.queue_len_of(base, chan) == 0 && !next.channels.contains(&chan) {
                next.channels.push(chan);
                next.channels.sort_unstable();
            }
        }
        next
    }
}

/// Search every path from `start` up to the first firing of `target_send`
/// for one carrying no dependency chain from `root` (chains evaluated at
/// `base`). Returns the offending path if any.
///
/// The frontier summary is exact for the recursive dependency relation, and
/// collapsing a cycle only shrinks the frontier, so a violating cyclic path
/// implies a violating one within the explored (node, frontier) lattice; no
/// length cap is needed.
fn uncovered_path_to_send(
    system: &System,
    ts: &TransitionSystem,
    base: &Configuration,
    root: &Action,
    start: usize,
    target_send: &Action,
) -> Option<Execution> {
    let seed = ChainFrontier::seed(system, base, root);
    let mut seen: HashSet<(usize, Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut queue: VecDeque<(usize, ChainFrontier, Execution)> = VecDeque::new();
    seen.insert((start, seed.subjects.clone(), seed.channels.clone()));
    queue.push_back((start, seed, Vec::new()));
    while let Some((node, frontier, path)) = queue.pop_front() {
        for (action, t) in ts.outgoing(node) {
            if action == target_send {
                if !frontier.covers(system, action) {
                    return Some(path.clone());
                }
                continue;
            }
            let next = if frontier.covers(system, action) {
                frontier.extend(system, base, action)
            } else {
                frontier.clone()
            };
            let key = (t, next.subjects.clone(), next.channels.clone());
            if seen.insert(key) {
                let mut next_path = path.clone();
                next_path.push(action.clone());
                queue.push_back((t, next, next_path));
            }
        }
    }
    None
}

/// Whether every rival input race is guarded by a dependency chain: a rival
/// receive's feeding send may fire later only if it depends, through the
/// intervening actions, on the committed receive.
pub fn check_cibi(system: &System, ts: &TransitionSystem) -> PropertyVerdict {
    let start = Instant::now();
    let bound = ts.bound();
    let verdict = PropertyVerdict::new(Property::Cibi, bound, Some(ts));
    for n in 0..ts.node_count() {
        let config = ts.node(n);
        let steps: Vec<(Action, usize)> = ts
            .outgoing(n)
            .map(|(a, t)| (a.clone(), t))
            .collect();
        for (action, succ) in &steps {
            if !action.is_receive() {
                continue;
            }
            let p = system
                .participant_id(action.subject())
                .expect("subject is declared");
            for rival in rival_receives(system, config, p, action) {
                if steps.iter().any(|(a, _)| a == rival) {
                    let detail = format!(
                        "{} is committed to {} but rival {} is enabled",
                        action.subject(),
                        action,
                        rival
                    );
                    return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
                }
                let send = feeding_send(rival);
                if system.action_id(&send).is_none() {
                    continue;
                }
                if let Some(phi) = uncovered_path_to_send(system, ts, config, action, *succ, &send)
                {
                    let rendered = if phi.is_empty() {
                        "the empty path".to_string()
                    } else {
                        phi.iter()
                            .map(|a| a.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    };
                    let detail = format!(
                        "{} fires with no dependency on {} along {}",
                        send, action, rendered
                    );
                    return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
                }
            }
        }
    }
    verdict.timed(start)
}

/// Whether every send available at a reached sending state can be fired on
/// some path that defers all other moves of its subject.
pub fn check_exhaustive(system: &System, ts: &TransitionSystem) -> PropertyVerdict {
    let start = Instant::now();
    let bound = ts.bound();
    let verdict = PropertyVerdict::new(Property::Exhaustive, bound, Some(ts));
    for p in 0..system.participant_count() {
        let firable = firable_sets(system, ts, Some(p));
        let machine = system.automaton(p);
        for n in 0..ts.node_count() {
            let config = ts.node(n);
            let state = config.local_state(p);
            if machine.state_kind(state) != StateKind::Sending {
                continue;
            }
            for (action, _) in machine.transitions_from(state) {
                let id = system.action_id(action).expect("action in universe");
                if !firable.get(n, id) {
                    let detail = format!(
                        "send {} can never fire from here without {} moving first",
                        action,
                        system.participants()[p]
                    );
                    return verdict.fail(Some(witness_at(ts, n, detail))).timed(start);
                }
            }
        }
    }
    verdict.timed(start)
}

/// Eventual reception and progress over the explored graph: every queued
/// message head can be consumed on some path, and every participant in a
/// receiving state can eventually fire a receive.
pub fn check_safety(system: &System, ts: &TransitionSystem) -> (PropertyVerdict, PropertyVerdict) {
    let start = Instant::now();
    let bound = ts.bound();
    let mut er = PropertyVerdict::new(Property::SafetyEr, bound, Some(ts));
    let mut pg = PropertyVerdict::new(Property::SafetyPg, bound, Some(ts));
    let firable = firable_sets(system, ts, None);
    let live = system.live_channels().to_vec();
    'er: for n in 0..ts.node_count() {
        let config = ts.node(n);
        for &c in &live {
            let channel = &system.channels()[c];
            if let Some(&head) = system.queue_of(config, c).first() {
                let receive = Action {
                    channel: channel.clone(),
                    direction: Direction::Receive,
                    label: system.label(head).clone(),
                };
                let consumable = system
                    .action_id(&receive)
                    .map(|id| firable.get(n, id))
                    .unwrap_or(false);
                if !consumable {
                    let detail = format!("queued message {} is never received", receive);
                    er = er.fail(Some(witness_at(ts, n, detail)));
                    break 'er;
                }
            }
        }
    }
    let mut receives: Vec<Vec<usize>> = vec![Vec::new(); system.participant_count()];
    for (id, action) in system.actions().iter().enumerate() {
        if action.is_receive() {
            let p = system.participant_id(action.subject()).unwrap();
            receives[p].push(id);
        }
    }
    'pg: for n in 0..ts.node_count() {
        let config = ts.node(n);
        for p in 0..system.participant_count() {
            let machine = system.automaton(p);
            if machine.state_kind(config.local_state(p)) != StateKind::Receiving {
                continue;
            }
            if !receives[p].iter().any(|&id| firable.get(n, id)) {
                let detail = format!(
                    "{} waits at state {} and never receives",
                    system.participants()[p],
                    machine.state_name(config.local_state(p))
                );
                pg = pg.fail(Some(witness_at(ts, n, detail)));
                break 'pg;
            }
        }
    }
    (er.timed(start), pg.timed(start))
}

/// Whether a configuration with all queues empty stays reachable from every
/// explored configuration.
pub fn check_stable_bounded(system: &System, ts: &TransitionSystem) -> PropertyVerdict {
    let start = Instant::now();
    let _ = system;
    let verdict = PropertyVerdict::new(Property::Stable, ts.bound(), Some(ts));
    let mut can_stabilize = vec![false; ts.node_count()];
    let rev = ts.reverse_adjacency();
    let mut queue = VecDeque::new();
    for n in 0..ts.node_count() {
        if ts.node(n).is_stable() {
            can_stabilize[n] = true;
            queue.push_back(n);
        }
    }
    while let Some(n) = queue.pop_front() {
        for &pred in rev.preds(n) {
            let pred = pred as usize;
            if !can_stabilize[pred] {
                can_stabilize[pred] = true;
                queue.push_back(pred);
            }
        }
    }
    match can_stabilize.iter().position(|&ok| !ok) {
        None => verdict.timed(start),
        Some(n) => {
            let detail = "no path drains all queues from here".to_string();
            verdict.fail(Some(witness_at(ts, n, detail))).timed(start)
        }
    }
}

/// Options for the iterative compatibility check.
#[derive(Clone, Copy, Debug)]
pub struct KmcOptions {
    pub max_bound: u32,
    pub node_cap: usize,
    /// Evaluate every property at each bound even where the driver could
    /// short-circuit; keeps reports complete at a small cost.
    pub eager: bool,
}

impl Default for KmcOptions {
    fn default() -> Self {
        KmcOptions {
            max_bound: 10,
            node_cap: crate::explore::DEFAULT_NODE_CAP,
            eager: false,
        }
    }
}

/// Verdict of the iterative check.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum KmcStatus {
    /// Certified compatible at this bound.
    Compatible(u32),
    /// No bound up to this one certified the system.
    Failed(u32),
}

#[derive(Clone, Debug)]
pub struct KmcResult {
    pub status: KmcStatus,
    /// All verdicts computed along the way, each tagged with its bound.
    pub per_property: Vec<PropertyVerdict>,
}

impl KmcResult {
    pub fn compatible_bound(&self) -> Option<u32> {
        match self.status {
            KmcStatus::Compatible(k) => Some(k),
            KmcStatus::Failed(_) => None,
        }
    }

    /// The verdicts recorded at a given bound.
    pub fn at_bound(&self, k: u32) -> Vec<&PropertyVerdict> {
        self.per_property
            .iter()
            .filter(|v| v.bound == Bound::Finite(k))
            .collect()
    }
}

/// Iteratively search for a certifying bound: at each k, build the reduced
/// system, require (send-directedness or OBI) and (receive-directedness or
/// SIBI or CIBI) and exhaustivity, then decide safety at that bound. The
/// first bound passing the premise settles the outcome either way.
pub fn check_kmc(system: &System, options: KmcOptions) -> Result<KmcResult, ExploreError> {
    let (send_directed, receive_directed) = system.directedness();
    let mut per_property = Vec::new();
    for k in 1..=options.max_bound {
        let rts = build_rts(system, k, options.node_cap)?;
        let bound = Bound::Finite(k);
        let mut dir_send = PropertyVerdict::new(Property::SendDirected, bound, Some(&rts));
        dir_send.holds = send_directed;
        let mut dir_recv = PropertyVerdict::new(Property::ReceiveDirected, bound, Some(&rts));
        dir_recv.holds = receive_directed;
        per_property.push(dir_send);
        per_property.push(dir_recv);

        let obi = check_obi(system, &rts);
        let obi_ok = send_directed || obi.holds;
        per_property.push(obi);
        let mut input_ok = receive_directed;
        if !input_ok || options.eager {
            let sibi = check_sibi(system, &rts);
            input_ok = input_ok || sibi.holds;
            per_property.push(sibi);
            if !input_ok || options.eager {
                let cibi = check_cibi(system, &rts);
                input_ok = input_ok || cibi.holds;
                per_property.push(cibi);
            }
        }
        if !(obi_ok && input_ok) && !options.eager {
            continue;
        }
        let exhaustive = check_exhaustive(system, &rts);
        let exhaustive_ok = exhaustive.holds;
        per_property.push(exhaustive);
        if !(obi_ok && input_ok && exhaustive_ok) {
            continue;
        }
        // the premise holds: this bound decides the verdict
        let (er, pg) = check_safety(system, &rts);
        let safe = er.holds && pg.holds;
        per_property.push(er);
        per_property.push(pg);
        let status = if safe {
            KmcStatus::Compatible(k)
        } else {
            KmcStatus::Failed(k)
        };
        return Ok(KmcResult {
            status,
            per_property,
        });
    }
    Ok(KmcResult {
        status: KmcStatus::Failed(options.max_bound),
        per_property,
    })
}

/// The plain bound-k compatibility property: safety plus exhaustivity over
/// the full k-bounded system, with no independence premise.
pub fn kmc_at_bound(
    system: &System,
    k: u32,
    node_cap: usize,
) -> Result<PropertyVerdict, ExploreError> {
    let start = Instant::now();
    let ts = build_full_ts(system, k, node_cap)?;
    let (er, pg) = check_safety(system, &ts);
    let exhaustive = check_exhaustive(system, &ts);
    let mut verdict = PropertyVerdict::new(Property::Kmc, Bound::Finite(k), Some(&ts));
    let failed = [&er, &pg, &exhaustive]
        .into_iter()
        .find(|v| !v.holds)
        .cloned();
    if let Some(failed) = failed {
        verdict = verdict.fail(failed.witness);
    }
    Ok(verdict.timed(start))
}

/// Exchanges available from a stable node of the synchronous system:
/// `(send, receive, landing node)` triples.
fn sync_exchanges(ts: &TransitionSystem, node: usize) -> Vec<(Action, Action, usize)> {
    let mut out = Vec::new();
    for (send, mid) in ts.outgoing(node) {
        for (receive, done) in ts.outgoing(mid) {
            out.push((send.clone(), receive.clone(), done));
        }
    }
    out
}

/// Synchronous multiparty compatibility over the synchronous transition
/// system: at every reachable stable configuration, each send of a sending
/// state — and at least one receive of a receiving state — must occur in a
/// synchronous run whose projection onto the participant is exactly that
/// action.
pub fn check_smc(system: &System, node_cap: usize) -> Result<PropertyVerdict, ExploreError> {
    let start = Instant::now();
    let ts = build_sync_ts(system, node_cap)?;
    let mut verdict = PropertyVerdict::new(Property::Smc, Bound::Finite(1), Some(&ts));
    let realizable = |from: usize, p: usize, action: &Action| -> bool {
        let participant = &system.participants()[p];
        let mut seen = vec![false; ts.node_count()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(n) = queue.pop_front() {
            for (send, receive, done) in sync_exchanges(&ts, n) {
                let fired = if send.subject() == participant {
                    &send
                } else if receive.subject() == participant {
                    &receive
                } else {
                    if !seen[done] {
                        seen[done] = true;
                        queue.push_back(done);
                    }
                    continue;
                };
                if fired == action {
                    return true;
                }
            }
        }
        false
    };
    for n in 0..ts.node_count() {
        let config = ts.node(n);
        if !config.is_stable() {
            continue;
        }
        for p in 0..system.participant_count() {
            let machine = system.automaton(p);
            let state = config.local_state(p);
            let transitions = machine.transitions_from(state);
            match machine.state_kind(state) {
                StateKind::Sending => {
                    for (action, _) in transitions {
                        if !realizable(n, p, action) {
                            let detail =
                                format!("send {} has no synchronous realization from here", action);
                            verdict = verdict.fail(Some(witness_at(&ts, n, detail)));
                            return Ok(verdict.timed(start));
                        }
                    }
                }
                StateKind::Receiving => {
                    if !transitions.iter().any(|(action, _)| realizable(n, p, action)) {
                        let detail = format!(
                            "{} waits here and no expected input has a synchronous realization",
                            system.participants()[p]
                        );
                        verdict = verdict.fail(Some(witness_at(&ts, n, detail)));
                        return Ok(verdict.timed(start));
                    }
                }
                StateKind::Final | StateKind::Mixed => {}
            }
        }
    }
    Ok(verdict.timed(start))
}

/// Replay a witness path from the initial configuration at the stated
/// bound; used to validate counterexamples.
pub fn witness_replays(system: &System, bound: Bound, witness: &Witness) -> bool {
    let mut config = system.initial_configuration();
    for action in &witness.path {
        match successor(system, &config, action, bound) {
            Ok(next) => config = next,
            Err(_) => return false,
        }
    }
    config == witness.configuration
}

/// Look up a channel between two named participants.
pub fn channel(system: &System, sender: &str, receiver: &str) -> Option<Channel> {
    let s = system
        .participants()
        .iter()
        .find(|p| p.name() == sender)?
        .clone();
    let r = system
        .participants()
        .iter()
        .find(|p| p.name() == receiver)?
        .clone();
    Some(Channel::new(s, r))
}
