//! Core domain types: participants, actions, automata, systems, and the
//! single-step bounded FIFO semantics.
//!
//! A system is a finite collection of communicating session automata (CSA),
//! one per participant, exchanging messages over point-to-point FIFO
//! channels. Every value here is immutable after construction and safe to
//! share read-only across threads.
//!
//! Configurations are packed into a single index buffer so that the
//! explorers can hold tens of millions of them: queue contents are kept
//! only for the channels some transition actually uses (the others exist
//! but stay empty forever, so equality remains canonical).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A participant name. Names are non-empty tokens over `[A-Za-z0-9_]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Participant(Arc<str>);

impl Participant {
    pub fn new(name: impl AsRef<str>) -> Self {
        Participant(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Participant({})", self.0)
    }
}

/// A message label drawn from the system's finite alphabet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageLabel(Arc<str>);

impl MessageLabel {
    pub fn new(label: impl AsRef<str>) -> Self {
        MessageLabel(Arc::from(label.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MessageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for MessageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MessageLabel({})", self.0)
    }
}

/// A directed FIFO channel from `sender` to `receiver` (`sender != receiver`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel {
    pub sender: Participant,
    pub receiver: Participant,
}

impl Channel {
    pub fn new(sender: Participant, receiver: Participant) -> Self {
        Channel { sender, receiver }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sender, self.receiver)
    }
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Channel({}{})", self.sender, self.receiver)
    }
}

/// Whether an action puts a message on a channel or consumes one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Direction {
    Send,
    Receive,
}

impl Direction {
    pub fn symbol(self) -> char {
        match self {
            Direction::Send => '!',
            Direction::Receive => '?',
        }
    }
}

/// A communication action: `pq!a` (p puts `a` on channel pq) or `pq?a`
/// (q consumes `a` from channel pq).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub channel: Channel,
    pub direction: Direction,
    pub label: MessageLabel,
}

impl Action {
    pub fn send(sender: Participant, receiver: Participant, label: MessageLabel) -> Self {
        Action {
            channel: Channel::new(sender, receiver),
            direction: Direction::Send,
            label,
        }
    }

    pub fn receive(sender: Participant, receiver: Participant, label: MessageLabel) -> Self {
        Action {
            channel: Channel::new(sender, receiver),
            direction: Direction::Receive,
            label,
        }
    }

    /// The participant that fires this action: the sender of a send, the
    /// receiver of a receive.
    pub fn subject(&self) -> &Participant {
        match self.direction {
            Direction::Send => &self.channel.sender,
            Direction::Receive => &self.channel.receiver,
        }
    }

    /// The other endpoint of the channel.
    pub fn partner(&self) -> &Participant {
        match self.direction {
            Direction::Send => &self.channel.receiver,
            Direction::Receive => &self.channel.sender,
        }
    }

    pub fn is_send(&self) -> bool {
        self.direction == Direction::Send
    }

    pub fn is_receive(&self) -> bool {
        self.direction == Direction::Receive
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.channel, self.direction.symbol(), self.label)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Action({})", self)
    }
}

/// A finite sequence of actions.
pub type Execution = Vec<Action>;

/// Channel capacity used when firing transitions. `Infinite` disables the
/// send-side capacity check (the unbounded semantics).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Bound {
    Finite(u32),
    Infinite,
}

impl Bound {
    /// True if a channel currently holding `len` messages can take one more.
    pub fn admits_send(self, len: usize) -> bool {
        match self {
            Bound::Finite(k) => len < k as usize,
            Bound::Infinite => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(k) => write!(f, "{}", k),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// How a state's outgoing transitions classify it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StateKind {
    Final,
    Sending,
    Receiving,
    Mixed,
}

/// One participant's finite state machine. Transitions are labelled by
/// actions; a state with no outgoing transition is final.
#[derive(Clone, Debug)]
pub struct Automaton {
    participant: Participant,
    state_names: Vec<Arc<str>>,
    initial: usize,
    /// Outgoing transitions per state, sorted by action for determinism.
    outgoing: Vec<Vec<(Action, usize)>>,
}

impl Automaton {
    /// Build an automaton from named states. States are numbered in order
    /// of first appearance, starting from the initial state; transitions
    /// with identical `(source, action, target)` collapse to one.
    pub fn new(
        participant: Participant,
        initial: &str,
        transitions: &[(&str, Action, &str)],
    ) -> Self {
        let mut names: Vec<Arc<str>> = vec![Arc::from(initial)];
        let mut index: HashMap<Arc<str>, usize> = HashMap::new();
        index.insert(names[0].clone(), 0);
        let intern = |name: &str, names: &mut Vec<Arc<str>>, index: &mut HashMap<Arc<str>, usize>| {
            if let Some(&i) = index.get(name) {
                i
            } else {
                let arc: Arc<str> = Arc::from(name);
                names.push(arc.clone());
                index.insert(arc, names.len() - 1);
                names.len() - 1
            }
        };
        let mut edges: BTreeSet<(usize, Action, usize)> = BTreeSet::new();
        for (src, action, dst) in transitions {
            let s = intern(src, &mut names, &mut index);
            let d = intern(dst, &mut names, &mut index);
            edges.insert((s, action.clone(), d));
        }
        let mut outgoing = vec![Vec::new(); names.len()];
        for (s, action, d) in edges {
            outgoing[s].push((action, d));
        }
        Automaton {
            participant,
            state_names: names,
            initial: 0,
            outgoing,
        }
    }

    pub fn participant(&self) -> &Participant {
        &self.participant
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.state_names[state]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn transitions_from(&self, state: usize) -> &[(Action, usize)] {
        &self.outgoing[state]
    }

    pub fn transition_count(&self) -> usize {
        self.outgoing.iter().map(Vec::len).sum()
    }

    pub fn state_kind(&self, state: usize) -> StateKind {
        let edges = &self.outgoing[state];
        if edges.is_empty() {
            return StateKind::Final;
        }
        let sends = edges.iter().filter(|(a, _)| a.is_send()).count();
        if sends == edges.len() {
            StateKind::Sending
        } else if sends == 0 {
            StateKind::Receiving
        } else {
            StateKind::Mixed
        }
    }
}

/// A rule broken by an automaton, reported as data by [`System::validate_csa`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    /// Two transitions share a source state and action but disagree on the
    /// target state.
    Determinism,
    /// A non-final state mixes send and receive transitions.
    MixedState,
    /// A transition's action is not fired by the automaton it belongs to.
    Subject,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Determinism => f.write_str("determinism"),
            ViolationKind::MixedState => f.write_str("mixed-state"),
            ViolationKind::Subject => f.write_str("subject"),
        }
    }
}

/// One CSA rule violation, naming the automaton and state where it occurs.
#[derive(Clone, Debug)]
pub struct Violation {
    pub participant: Participant,
    pub state: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} in machine {} at state {}: {}",
            self.kind, self.participant, self.state, self.detail
        )
    }
}

/// Errors rejected at [`System`] construction time.
#[derive(Debug, Error)]
pub enum SystemError {
    #[error("a system needs at least 2 participants, got {0}")]
    TooFewParticipants(usize),
    #[error("duplicate participant {0}")]
    DuplicateParticipant(Participant),
    #[error("machine {machine} mentions undeclared participant {undeclared}")]
    UndeclaredParticipant {
        machine: Participant,
        undeclared: Participant,
    },
    #[error("channel {0} has equal endpoints")]
    SelfChannel(Channel),
    #[error("system too large: {0}")]
    TooLarge(String),
}

/// One compiled transition: everything [`successor`] needs, resolved to
/// indices.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub action_id: u16,
    pub direction: Direction,
    /// Index into the live-channel list.
    pub slot: u16,
    pub label: u16,
    pub target: u16,
}

/// A named collection of automata over a shared participant set.
///
/// Construction interns the alphabet, the channel set, and the action set,
/// and compiles per-state transition tables; channels exist for every
/// ordered participant pair even when no transition mentions them, but
/// configurations materialize queues only for the mentioned (live) ones.
#[derive(Clone, Debug)]
pub struct System {
    participants: Vec<Participant>,
    participant_index: HashMap<Participant, usize>,
    automata: Vec<Automaton>,
    channels: Vec<Channel>,
    channel_index: HashMap<(usize, usize), usize>,
    /// Channel ids that appear in some action, ascending.
    live_channels: Vec<usize>,
    /// Channel id -> live slot.
    live_slot: Vec<Option<u16>>,
    labels: Vec<MessageLabel>,
    label_index: HashMap<MessageLabel, u16>,
    /// Every action appearing in some automaton, sorted.
    actions: Vec<Action>,
    action_index: HashMap<Action, usize>,
    /// The firing participant of each action.
    action_subject: Vec<u16>,
    /// Compiled transition tables: `steps[participant][state]`.
    steps: Vec<Vec<Vec<Step>>>,
}

impl System {
    /// Assemble a system. The iteration order of `automata` fixes the
    /// participant order used by configurations.
    pub fn new(automata: Vec<Automaton>) -> Result<Self, SystemError> {
        if automata.len() < 2 {
            return Err(SystemError::TooFewParticipants(automata.len()));
        }
        let participants: Vec<Participant> =
            automata.iter().map(|m| m.participant().clone()).collect();
        if participants.len() > u16::MAX as usize {
            return Err(SystemError::TooLarge("too many participants".into()));
        }
        let mut participant_index = HashMap::new();
        for (i, p) in participants.iter().enumerate() {
            if participant_index.insert(p.clone(), i).is_some() {
                return Err(SystemError::DuplicateParticipant(p.clone()));
            }
        }
        for m in &automata {
            if m.state_count() > u16::MAX as usize {
                return Err(SystemError::TooLarge("too many states".into()));
            }
            for state in 0..m.state_count() {
                for (action, _) in m.transitions_from(state) {
                    if action.channel.sender == action.channel.receiver {
                        return Err(SystemError::SelfChannel(action.channel.clone()));
                    }
                    for end in [&action.channel.sender, &action.channel.receiver] {
                        if !participant_index.contains_key(end) {
                            return Err(SystemError::UndeclaredParticipant {
                                machine: m.participant().clone(),
                                undeclared: end.clone(),
                            });
                        }
                    }
                }
            }
        }
        let mut channels = Vec::new();
        let mut channel_index = HashMap::new();
        for i in 0..participants.len() {
            for j in 0..participants.len() {
                if i != j {
                    channel_index.insert((i, j), channels.len());
                    channels.push(Channel::new(
                        participants[i].clone(),
                        participants[j].clone(),
                    ));
                }
            }
        }
        let mut label_set: BTreeSet<MessageLabel> = BTreeSet::new();
        let mut action_set: BTreeSet<Action> = BTreeSet::new();
        for m in &automata {
            for state in 0..m.state_count() {
                for (action, _) in m.transitions_from(state) {
                    label_set.insert(action.label.clone());
                    action_set.insert(action.clone());
                }
            }
        }
        let labels: Vec<MessageLabel> = label_set.into_iter().collect();
        if labels.len() > u16::MAX as usize {
            return Err(SystemError::TooLarge("too many labels".into()));
        }
        let label_index: HashMap<MessageLabel, u16> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u16))
            .collect();
        let actions: Vec<Action> = action_set.into_iter().collect();
        if actions.len() > u16::MAX as usize {
            return Err(SystemError::TooLarge("too many actions".into()));
        }
        let action_index: HashMap<Action, usize> = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut live: BTreeSet<usize> = BTreeSet::new();
        for action in &actions {
            let s = participant_index[&action.channel.sender];
            let r = participant_index[&action.channel.receiver];
            live.insert(channel_index[&(s, r)]);
        }
        let live_channels: Vec<usize> = live.into_iter().collect();
        let mut live_slot = vec![None; channels.len()];
        for (slot, &c) in live_channels.iter().enumerate() {
            live_slot[c] = Some(slot as u16);
        }
        let action_subject: Vec<u16> = actions
            .iter()
            .map(|a| participant_index[a.subject()] as u16)
            .collect();
        let steps: Vec<Vec<Vec<Step>>> = automata
            .iter()
            .map(|m| {
                (0..m.state_count())
                    .map(|state| {
                        m.transitions_from(state)
                            .iter()
                            .map(|(action, target)| {
                                let s = participant_index[&action.channel.sender];
                                let r = participant_index[&action.channel.receiver];
                                let chan = channel_index[&(s, r)];
                                Step {
                                    action_id: action_index[action] as u16,
                                    direction: action.direction,
                                    slot: live_slot[chan].expect("action channel is live"),
                                    label: label_index[&action.label],
                                    target: *target as u16,
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(System {
            participants,
            participant_index,
            automata,
            channels,
            channel_index,
            live_channels,
            live_slot,
            labels,
            label_index,
            actions,
            action_index,
            action_subject,
            steps,
        })
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn participant_count(&self) -> usize {
        self.participants.len()
    }

    pub fn participant_id(&self, p: &Participant) -> Option<usize> {
        self.participant_index.get(p).copied()
    }

    pub fn automaton(&self, participant: usize) -> &Automaton {
        &self.automata[participant]
    }

    pub fn automata(&self) -> &[Automaton] {
        &self.automata
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_id(&self, channel: &Channel) -> Option<usize> {
        let s = self.participant_id(&channel.sender)?;
        let r = self.participant_id(&channel.receiver)?;
        self.channel_index.get(&(s, r)).copied()
    }

    /// Channel ids whose queues can ever be non-empty.
    pub fn live_channels(&self) -> &[usize] {
        &self.live_channels
    }

    pub fn alphabet(&self) -> &[MessageLabel] {
        &self.labels
    }

    pub fn label_id(&self, label: &MessageLabel) -> Option<u16> {
        self.label_index.get(label).copied()
    }

    pub fn label(&self, id: u16) -> &MessageLabel {
        &self.labels[id as usize]
    }

    /// All distinct actions occurring in the automata, sorted.
    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, id: u16) -> &Action {
        &self.actions[id as usize]
    }

    pub fn action_id(&self, action: &Action) -> Option<usize> {
        self.action_index.get(action).copied()
    }

    /// The firing participant of an interned action.
    pub fn action_subject_id(&self, id: u16) -> usize {
        self.action_subject[id as usize] as usize
    }

    /// Compiled transitions of a participant's local state.
    pub fn steps_from(&self, participant: usize, state: usize) -> &[Step] {
        &self.steps[participant][state]
    }

    /// The contents of a channel's queue in a configuration (empty for
    /// channels no transition mentions).
    pub fn queue_of<'c>(&self, config: &'c Configuration, channel: usize) -> &'c [u16] {
        match self.live_slot[channel] {
            Some(slot) => config.live_queue(slot as usize),
            None => &[],
        }
    }

    pub fn queue_len_of(&self, config: &Configuration, channel: usize) -> usize {
        self.queue_of(config, channel).len()
    }

    /// The initial configuration: every automaton at its initial state, all
    /// queues empty.
    pub fn initial_configuration(&self) -> Configuration {
        let parts = self.participants.len();
        let lives = self.live_channels.len();
        let mut buf = vec![0u16; parts + lives];
        for (i, m) in self.automata.iter().enumerate() {
            buf[i] = m.initial() as u16;
        }
        Configuration {
            parts: parts as u16,
            lives: lives as u16,
            buf: buf.into_boxed_slice(),
        }
    }

    /// Check the CSA restrictions on every automaton: determinism, no mixed
    /// states, and subject consistency. Violations are data, not failures.
    pub fn validate_csa(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for m in &self.automata {
            for state in 0..m.state_count() {
                let edges = m.transitions_from(state);
                for (action, _) in edges {
                    if action.subject() != m.participant() {
                        out.push(Violation {
                            participant: m.participant().clone(),
                            state: m.state_name(state).to_string(),
                            kind: ViolationKind::Subject,
                            detail: format!(
                                "transition {} is fired by {}, not {}",
                                action,
                                action.subject(),
                                m.participant()
                            ),
                        });
                    }
                }
                for i in 0..edges.len() {
                    for j in (i + 1)..edges.len() {
                        if edges[i].0 == edges[j].0 && edges[i].1 != edges[j].1 {
                            out.push(Violation {
                                participant: m.participant().clone(),
                                state: m.state_name(state).to_string(),
                                kind: ViolationKind::Determinism,
                                detail: format!(
                                    "action {} leads to both {} and {}",
                                    edges[i].0,
                                    m.state_name(edges[i].1),
                                    m.state_name(edges[j].1)
                                ),
                            });
                        }
                    }
                }
                if m.state_kind(state) == StateKind::Mixed {
                    out.push(Violation {
                        participant: m.participant().clone(),
                        state: m.state_name(state).to_string(),
                        kind: ViolationKind::MixedState,
                        detail: "state mixes send and receive transitions".to_string(),
                    });
                }
            }
        }
        out
    }

    /// Whether every sending (resp. receiving) state of every automaton
    /// addresses a single partner.
    pub fn directedness(&self) -> (bool, bool) {
        let mut send_directed = true;
        let mut receive_directed = true;
        for m in &self.automata {
            for state in 0..m.state_count() {
                let edges = m.transitions_from(state);
                let mut send_partner: Option<&Participant> = None;
                let mut receive_partner: Option<&Participant> = None;
                for (action, _) in edges {
                    let slot = match action.direction {
                        Direction::Send => &mut send_partner,
                        Direction::Receive => &mut receive_partner,
                    };
                    match slot {
                        None => *slot = Some(action.partner()),
                        Some(p) if *p != action.partner() => match action.direction {
                            Direction::Send => send_directed = false,
                            Direction::Receive => receive_directed = false,
                        },
                        _ => {}
                    }
                }
            }
        }
        (send_directed, receive_directed)
    }

    pub fn is_directed(&self) -> bool {
        let (s, r) = self.directedness();
        s && r
    }

    /// Render a configuration as `(q1,q2,...; pq:[a b] ...)`, listing only
    /// non-empty queues.
    pub fn describe_configuration(&self, config: &Configuration) -> String {
        let mut out = String::from("(");
        for (i, m) in self.automata.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(m.state_name(config.local_state(i)));
        }
        out.push(';');
        let mut first = true;
        for (slot, &c) in self.live_channels.iter().enumerate() {
            let queue = config.live_queue(slot);
            if queue.is_empty() {
                continue;
            }
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&format!("{}:[", self.channels[c]));
            for (i, l) in queue.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(self.label(*l).name());
            }
            out.push(']');
        }
        out.push(')');
        out
    }
}

/// A global state: one local state per participant plus one FIFO word per
/// live channel, packed as `[control | cumulative queue ends | queue
/// data]`. Hashable so visited sets are exact.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Configuration {
    parts: u16,
    lives: u16,
    buf: Box<[u16]>,
}

impl Configuration {
    pub fn local_state(&self, participant: usize) -> usize {
        self.buf[participant] as usize
    }

    fn data_base(&self) -> usize {
        self.parts as usize + self.lives as usize
    }

    fn bounds(&self, slot: usize) -> (usize, usize) {
        let parts = self.parts as usize;
        let start = if slot == 0 {
            0
        } else {
            self.buf[parts + slot - 1] as usize
        };
        (start, self.buf[parts + slot] as usize)
    }

    /// The contents of the queue in the given live slot.
    pub fn live_queue(&self, slot: usize) -> &[u16] {
        let base = self.data_base();
        let (start, end) = self.bounds(slot);
        &self.buf[base + start..base + end]
    }

    pub fn live_queue_len(&self, slot: usize) -> usize {
        let (start, end) = self.bounds(slot);
        end - start
    }

    /// True if every queue holds at most `k` messages.
    pub fn is_k_bounded(&self, k: u32) -> bool {
        (0..self.lives as usize).all(|slot| self.live_queue_len(slot) <= k as usize)
    }

    /// True if all queues are empty.
    pub fn is_stable(&self) -> bool {
        self.buf.len() == self.data_base()
    }

    /// A copy with `participant` moved to `state` and `label` appended to
    /// the queue in `slot`.
    fn with_send(&self, participant: usize, state: u16, slot: usize, label: u16) -> Self {
        let parts = self.parts as usize;
        let base = self.data_base();
        let (_, end) = self.bounds(slot);
        let mut buf = Vec::with_capacity(self.buf.len() + 1);
        buf.extend_from_slice(&self.buf[..base + end]);
        buf.push(label);
        buf.extend_from_slice(&self.buf[base + end..]);
        buf[participant] = state;
        for s in slot..self.lives as usize {
            buf[parts + s] += 1;
        }
        Configuration {
            parts: self.parts,
            lives: self.lives,
            buf: buf.into_boxed_slice(),
        }
    }

    /// A copy with `participant` moved to `state` and the head of the queue
    /// in `slot` removed.
    fn with_receive(&self, participant: usize, state: u16, slot: usize) -> Self {
        let parts = self.parts as usize;
        let base = self.data_base();
        let (start, _) = self.bounds(slot);
        let mut buf = Vec::with_capacity(self.buf.len() - 1);
        buf.extend_from_slice(&self.buf[..base + start]);
        buf.extend_from_slice(&self.buf[base + start + 1..]);
        buf[participant] = state;
        for s in slot..self.lives as usize {
            buf[parts + s] -= 1;
        }
        Configuration {
            parts: self.parts,
            lives: self.lives,
            buf: buf.into_boxed_slice(),
        }
    }

    /// A deterministic content hash, stable across runs.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the packed buffer
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        h = h.wrapping_mul(0x100_0000_01b3) ^ u64::from(self.parts);
        for &v in self.buf.iter() {
            h ^= u64::from(v);
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        h ^ (h >> 29)
    }
}

/// Why an action cannot fire from a configuration.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DisabledReason {
    /// The subject's current state has no transition with this action.
    NoTransition,
    /// The target channel already holds `k` messages.
    QueueFull,
    /// The channel head does not match the expected label.
    QueueHeadMismatch,
    /// The channel is empty.
    QueueEmpty,
}

impl fmt::Display for DisabledReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisabledReason::NoTransition => f.write_str("no-transition"),
            DisabledReason::QueueFull => f.write_str("queue-full"),
            DisabledReason::QueueHeadMismatch => f.write_str("queue-head-mismatch"),
            DisabledReason::QueueEmpty => f.write_str("queue-empty"),
        }
    }
}

/// Fire a compiled step if it is enabled under `bound`.
pub fn fire_step(
    system: &System,
    config: &Configuration,
    participant: usize,
    step: &Step,
    bound: Bound,
) -> Result<Configuration, DisabledReason> {
    let _ = system;
    let slot = step.slot as usize;
    match step.direction {
        Direction::Send => {
            if !bound.admits_send(config.live_queue_len(slot)) {
                return Err(DisabledReason::QueueFull);
            }
            Ok(config.with_send(participant, step.target, slot, step.label))
        }
        Direction::Receive => match config.live_queue(slot).first() {
            None => Err(DisabledReason::QueueEmpty),
            Some(&head) if head != step.label => Err(DisabledReason::QueueHeadMismatch),
            Some(_) => Ok(config.with_receive(participant, step.target, slot)),
        },
    }
}

/// Whether a compiled step can fire under `bound`.
pub fn step_enabled(config: &Configuration, step: &Step, bound: Bound) -> bool {
    let slot = step.slot as usize;
    match step.direction {
        Direction::Send => bound.admits_send(config.live_queue_len(slot)),
        Direction::Receive => config.live_queue(slot).first() == Some(&step.label),
    }
}

/// Fire `action` from `config` under channel capacity `bound`.
///
/// A send is enabled when the subject's state has the transition and the
/// target queue has room; a receive when the transition exists and the
/// expected label heads the queue. The capacity check applies to sends
/// only.
pub fn successor(
    system: &System,
    config: &Configuration,
    action: &Action,
    bound: Bound,
) -> Result<Configuration, DisabledReason> {
    let subject = system
        .participant_id(action.subject())
        .ok_or(DisabledReason::NoTransition)?;
    let action_id = match system.action_id(action) {
        Some(id) => id as u16,
        None => return Err(DisabledReason::NoTransition),
    };
    let state = config.local_state(subject);
    let step = system
        .steps_from(subject, state)
        .iter()
        .find(|s| s.action_id == action_id)
        .ok_or(DisabledReason::NoTransition)?;
    fire_step(system, config, subject, step, bound)
}

/// All actions that can fire from `config` under `bound`, in participant
/// order then action order.
pub fn enabled(system: &System, config: &Configuration, bound: Bound) -> Vec<Action> {
    let mut out = Vec::new();
    for p in 0..system.participant_count() {
        collect_enabled_for(system, config, bound, p, &mut out);
    }
    out
}

/// The enabled actions of a single participant at `config`.
pub fn enabled_for(
    system: &System,
    config: &Configuration,
    bound: Bound,
    participant: usize,
) -> Vec<Action> {
    let mut out = Vec::new();
    collect_enabled_for(system, config, bound, participant, &mut out);
    out
}

fn collect_enabled_for(
    system: &System,
    config: &Configuration,
    bound: Bound,
    participant: usize,
    out: &mut Vec<Action>,
) {
    let state = config.local_state(participant);
    for step in system.steps_from(participant, state) {
        if step_enabled(config, step, bound) {
            out.push(system.action(step.action_id).clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{act, ping_system, recv, send};

    fn mk(p: &str) -> Participant {
        Participant::new(p)
    }

    #[test]
    fn ping_initial_enables_only_the_send() {
        let sys = ping_system();
        let s0 = sys.initial_configuration();
        let acts = enabled(&sys, &s0, Bound::Finite(1));
        assert_eq!(acts, vec![send("P", "Q", "a")]);
    }

    #[test]
    fn ping_after_send_enables_only_the_receive() {
        let sys = ping_system();
        let s0 = sys.initial_configuration();
        let s1 = successor(&sys, &s0, &send("P", "Q", "a"), Bound::Finite(1)).unwrap();
        let acts = enabled(&sys, &s1, Bound::Finite(1));
        assert_eq!(acts, vec![recv("P", "Q", "a")]);
        // the send is no longer available: P moved past it
        assert_eq!(
            successor(&sys, &s1, &send("P", "Q", "a"), Bound::Finite(1)),
            Err(DisabledReason::NoTransition)
        );
    }

    #[test]
    fn send_respects_queue_bound() {
        // P sends twice in a row; at k=1 the second send must wait.
        let p = Automaton::new(
            mk("P"),
            "0",
            &[
                ("0", send("P", "Q", "a"), "1"),
                ("1", send("P", "Q", "a"), "2"),
            ],
        );
        let q = Automaton::new(
            mk("Q"),
            "0",
            &[
                ("0", recv("P", "Q", "a"), "1"),
                ("1", recv("P", "Q", "a"), "2"),
            ],
        );
        let sys = System::new(vec![p, q]).unwrap();
        let s0 = sys.initial_configuration();
        let s1 = successor(&sys, &s0, &send("P", "Q", "a"), Bound::Finite(1)).unwrap();
        assert_eq!(
            successor(&sys, &s1, &send("P", "Q", "a"), Bound::Finite(1)),
            Err(DisabledReason::QueueFull)
        );
        // the unbounded semantics admits it
        assert!(successor(&sys, &s1, &send("P", "Q", "a"), Bound::Infinite).is_ok());
    }

    #[test]
    fn receive_errors_carry_the_reason() {
        let sys = ping_system();
        let s0 = sys.initial_configuration();
        assert_eq!(
            successor(&sys, &s0, &recv("P", "Q", "a"), Bound::Finite(1)),
            Err(DisabledReason::QueueEmpty)
        );
        let p = Automaton::new(mk("P"), "0", &[("0", send("P", "Q", "b"), "1")]);
        let q = Automaton::new(
            mk("Q"),
            "0",
            &[
                ("0", recv("P", "Q", "a"), "1"),
                ("0", recv("P", "Q", "b"), "2"),
            ],
        );
        let sys = System::new(vec![p, q]).unwrap();
        let s1 = successor(
            &sys,
            &sys.initial_configuration(),
            &send("P", "Q", "b"),
            Bound::Finite(1),
        )
        .unwrap();
        assert_eq!(
            successor(&sys, &s1, &recv("P", "Q", "a"), Bound::Finite(1)),
            Err(DisabledReason::QueueHeadMismatch)
        );
    }

    #[test]
    fn send_then_matching_receive_restores_queue_lengths() {
        let sys = ping_system();
        let s0 = sys.initial_configuration();
        let s1 = successor(&sys, &s0, &send("P", "Q", "a"), Bound::Finite(1)).unwrap();
        let s2 = successor(&sys, &s1, &recv("P", "Q", "a"), Bound::Finite(1)).unwrap();
        for c in 0..sys.channels().len() {
            assert_eq!(sys.queue_len_of(&s0, c), sys.queue_len_of(&s2, c));
        }
        assert!(s2.is_stable());
        assert!(!s1.is_stable());
        assert!(s1.is_k_bounded(1));
    }

    #[test]
    fn queue_contents_are_fifo() {
        let p = Automaton::new(
            mk("P"),
            "0",
            &[
                ("0", send("P", "Q", "a"), "1"),
                ("1", send("P", "Q", "b"), "2"),
            ],
        );
        let q = Automaton::new(
            mk("Q"),
            "0",
            &[
                ("0", recv("P", "Q", "a"), "1"),
                ("1", recv("P", "Q", "b"), "2"),
            ],
        );
        let sys = System::new(vec![p, q]).unwrap();
        let s0 = sys.initial_configuration();
        let s1 = successor(&sys, &s0, &send("P", "Q", "a"), Bound::Finite(2)).unwrap();
        let s2 = successor(&sys, &s1, &send("P", "Q", "b"), Bound::Finite(2)).unwrap();
        let chan = sys
            .channel_id(&Channel::new(mk("P"), mk("Q")))
            .unwrap();
        let word: Vec<&str> = sys
            .queue_of(&s2, chan)
            .iter()
            .map(|&l| sys.label(l).name())
            .collect();
        assert_eq!(word, vec!["a", "b"]);
        let s3 = successor(&sys, &s2, &recv("P", "Q", "a"), Bound::Finite(2)).unwrap();
        let word: Vec<&str> = sys
            .queue_of(&s3, chan)
            .iter()
            .map(|&l| sys.label(l).name())
            .collect();
        assert_eq!(word, vec!["b"]);
    }

    #[test]
    fn mixed_state_is_reported() {
        let p = Automaton::new(
            mk("p"),
            "q0",
            &[
                ("q0", send("p", "q", "a"), "q1"),
                ("q0", recv("q", "p", "b"), "q2"),
            ],
        );
        let q = Automaton::new(mk("q"), "q0", &[("q0", recv("p", "q", "a"), "q1")]);
        let sys = System::new(vec![p, q]).unwrap();
        let violations = sys.validate_csa();
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::MixedState && v.state == "q0"));
    }

    #[test]
    fn subject_violation_is_reported() {
        // machine p contains a transition fired by q
        let p = Automaton::new(mk("p"), "q0", &[("q0", send("q", "p", "a"), "q1")]);
        let q = Automaton::new(mk("q"), "q0", &[("q0", recv("q", "p", "a"), "q1")]);
        let sys = System::new(vec![p, q]).unwrap();
        let violations = sys.validate_csa();
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::Subject && v.participant == mk("p")));
    }

    #[test]
    fn nondeterminism_is_reported() {
        let p = Automaton::new(
            mk("p"),
            "q0",
            &[
                ("q0", send("p", "q", "a"), "q1"),
                ("q0", send("p", "q", "a"), "q2"),
            ],
        );
        let q = Automaton::new(mk("q"), "q0", &[("q0", recv("p", "q", "a"), "q1")]);
        let sys = System::new(vec![p, q]).unwrap();
        let violations = sys.validate_csa();
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::Determinism));
    }

    #[test]
    fn transition_free_automaton_is_directed_both_ways() {
        let p = Automaton::new(mk("p"), "q0", &[]);
        let q = Automaton::new(mk("q"), "q0", &[]);
        let sys = System::new(vec![p, q]).unwrap();
        assert_eq!(sys.directedness(), (true, true));
        assert!(enabled(&sys, &sys.initial_configuration(), Bound::Finite(1)).is_empty());
    }

    #[test]
    fn too_few_participants_is_rejected() {
        let p = Automaton::new(mk("p"), "q0", &[]);
        assert!(matches!(
            System::new(vec![p]),
            Err(SystemError::TooFewParticipants(1))
        ));
    }

    #[test]
    fn undeclared_endpoint_is_rejected() {
        let p = Automaton::new(mk("p"), "q0", &[("q0", send("p", "z", "a"), "q1")]);
        let q = Automaton::new(mk("q"), "q0", &[]);
        assert!(matches!(
            System::new(vec![p, q]),
            Err(SystemError::UndeclaredParticipant { .. })
        ));
    }

    #[test]
    fn action_accessors() {
        let a = act("p", "q", '!', "m");
        assert_eq!(a.subject(), &mk("p"));
        assert_eq!(a.partner(), &mk("q"));
        let b = act("p", "q", '?', "m");
        assert_eq!(b.subject(), &mk("q"));
        assert_eq!(b.partner(), &mk("p"));
        assert_eq!(a.to_string(), "pq!m");
        assert_eq!(b.to_string(), "pq?m");
    }

    #[test]
    fn fingerprints_are_content_hashes() {
        let sys = ping_system();
        let s0 = sys.initial_configuration();
        let s1 = successor(&sys, &s0, &send("P", "Q", "a"), Bound::Finite(1)).unwrap();
        assert_ne!(s0.fingerprint(), s1.fingerprint());
        assert_eq!(s0.fingerprint(), sys.initial_configuration().fingerprint());
    }
}
