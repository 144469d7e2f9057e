//! Predicates on recorded executions: FIFO validity, match-boundedness,
//! exchange decompositions, causal and projected equivalence, and replay
//! against a system.
//!
//! These are pure functions on action sequences; only [`replay`] needs a
//! system.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{
    successor, Action, Bound, Channel, Configuration, DisabledReason, Execution, Participant,
    System,
};

/// Cap for the minimal-k searches in [`trace_report`].
pub const DEFAULT_BOUND_SEARCH_CAP: u32 = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("the execution is not FIFO-valid")]
    InvalidTrace,
}

/// A step of the trace cannot fire during replay.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {index} cannot fire: {reason}")]
pub struct ReplayError {
    pub index: usize,
    pub reason: DisabledReason,
}

/// True iff the execution respects FIFO semantics: on every channel, the
/// receive projection of every prefix is a prefix of its send projection.
pub fn is_valid(phi: &[Action]) -> bool {
    let mut pending: BTreeMap<Channel, std::collections::VecDeque<&Action>> = BTreeMap::new();
    for action in phi {
        let queue = pending.entry(action.channel.clone()).or_default();
        if action.is_send() {
            queue.push_back(action);
        } else {
            match queue.pop_front() {
                Some(send) if send.label == action.label => {}
                _ => return false,
            }
        }
    }
    true
}

#[cfg(test)]
fn sends_on(phi: &[Action], channel: &Channel) -> usize {
    phi.iter()
        .filter(|a| a.is_send() && &a.channel == channel)
        .count()
}

fn receives_on(phi: &[Action], channel: &Channel) -> usize {
    phi.iter()
        .filter(|a| a.is_receive() && &a.channel == channel)
        .count()
}

/// The matched-send lag of a valid execution: the largest, over prefixes
/// and channels, of `min{sends so far, total receives} - receives so far`.
pub fn match_bound(phi: &[Action]) -> Result<usize, TraceError> {
    if !is_valid(phi) {
        return Err(TraceError::InvalidTrace);
    }
    let channels: BTreeSet<Channel> = phi.iter().map(|a| a.channel.clone()).collect();
    let total_receives: BTreeMap<&Channel, usize> =
        channels.iter().map(|c| (c, receives_on(phi, c))).collect();
    let mut sends: BTreeMap<&Channel, usize> = channels.iter().map(|c| (c, 0)).collect();
    let mut receives: BTreeMap<&Channel, usize> = channels.iter().map(|c| (c, 0)).collect();
    let mut worst = 0usize;
    // the empty prefix contributes 0; evaluate after each step
    for action in phi {
        let slot = if action.is_send() {
            sends.get_mut(&action.channel).unwrap()
        } else {
            receives.get_mut(&action.channel).unwrap()
        };
        *slot += 1;
        let lag =
            sends[&action.channel].min(total_receives[&action.channel]) - receives[&action.channel];
        worst = worst.max(lag);
    }
    Ok(worst)
}

/// True iff the matched-send lag never exceeds `k` on any prefix.
pub fn is_k_match_bounded(phi: &[Action], k: u32) -> Result<bool, TraceError> {
    Ok(match_bound(phi)? <= k as usize)
}

/// A decomposition into phases, as end offsets into the trace (the last
/// entry equals the trace length).
pub type Decomposition = Vec<usize>;

fn is_send_then_receive(phase: &[Action]) -> bool {
    let first_receive = phase
        .iter()
        .position(Action::is_receive)
        .unwrap_or(phase.len());
    phase[first_receive..].iter().all(Action::is_receive)
}

/// Decide whether the execution splits into send-receive phases of at most
/// `2k` actions such that a message left unmatched by its phase is never
/// received later. Returns a witnessing decomposition when it does.
pub fn is_k_exchange(phi: &[Action], k: u32) -> Result<(bool, Option<Decomposition>), TraceError> {
    if !is_valid(phi) {
        return Err(TraceError::InvalidTrace);
    }
    let max_phase = (2 * k) as usize;
    type Key = (usize, Vec<Channel>);
    // memoized search over (position, channels forbidden to receive)
    fn search(
        phi: &[Action],
        pos: usize,
        forbidden: &BTreeSet<Channel>,
        max_phase: usize,
        memo: &mut HashMap<Key, Option<Vec<usize>>>,
    ) -> Option<Vec<usize>> {
        if pos == phi.len() {
            return Some(vec![]);
        }
        let key: Key = (pos, forbidden.iter().cloned().collect());
        if let Some(cached) = memo.get(&key) {
            return cached.clone();
        }
        let mut result = None;
        'next: for end in (pos + 1)..=phi.len().min(pos + max_phase) {
            let phase = &phi[pos..end];
            if !is_send_then_receive(phase) {
                continue;
            }
            let mut sent: BTreeMap<&Channel, Vec<&Action>> = BTreeMap::new();
            let mut received: BTreeMap<&Channel, Vec<&Action>> = BTreeMap::new();
            for action in phase {
                if action.is_receive() && forbidden.contains(&action.channel) {
                    continue 'next;
                }
                if action.is_send() {
                    sent.entry(&action.channel).or_default().push(action);
                } else {
                    received.entry(&action.channel).or_default().push(action);
                }
            }
            let mut next_forbidden = forbidden.clone();
            let empty = Vec::new();
            let channels: BTreeSet<&Channel> =
                sent.keys().chain(received.keys()).copied().collect();
            for channel in channels {
                let s = sent.get(channel).unwrap_or(&empty);
                let r = received.get(channel).unwrap_or(&empty);
                let matches =
                    s.len() == r.len() && s.iter().zip(r.iter()).all(|(a, b)| a.label == b.label);
                if !matches {
                    next_forbidden.insert(channel.clone());
                }
            }
            if let Some(mut rest) = search(phi, end, &next_forbidden, max_phase, memo) {
                rest.insert(0, end);
                result = Some(rest);
                break;
            }
        }
        memo.insert(key, result.clone());
        result
    }
    let mut memo: HashMap<Key, Option<Vec<usize>>> = HashMap::new();
    match search(phi, 0, &BTreeSet::new(), max_phase, &mut memo) {
        Some(boundaries) => Ok((true, Some(boundaries))),
        None => Ok((false, None)),
    }
}

/// The projection of an execution onto one participant: the subsequence of
/// actions it fires.
pub fn project_onto(phi: &[Action], p: &Participant) -> Execution {
    phi.iter().filter(|a| a.subject() == p).cloned().collect()
}

fn subjects(phi: &[Action]) -> BTreeSet<Participant> {
    phi.iter().map(|a| a.subject().clone()).collect()
}

/// Both executions are valid and agree on every participant's projection.
pub fn causal_equiv(phi: &[Action], psi: &[Action]) -> bool {
    is_valid(phi) && is_valid(psi) && projected_equiv(phi, psi)
}

/// Per-participant projections agree; validity is not required.
pub fn projected_equiv(phi: &[Action], psi: &[Action]) -> bool {
    let mut participants = subjects(phi);
    participants.extend(subjects(psi));
    participants
        .iter()
        .all(|p| project_onto(phi, p) == project_onto(psi, p))
}

/// Fire the execution from the initial configuration at channel capacity
/// `bound`; the final configuration, or the first step that cannot fire.
pub fn replay(system: &System, phi: &[Action], bound: Bound) -> Result<Configuration, ReplayError> {
    let mut config = system.initial_configuration();
    for (index, action) in phi.iter().enumerate() {
        config = successor(system, &config, action, bound)
            .map_err(|reason| ReplayError { index, reason })?;
    }
    Ok(config)
}

/// The smallest capacity at which the whole execution replays: replay under
/// the unbounded semantics and record the deepest queue.
pub fn min_replay_bound(system: &System, phi: &[Action]) -> Result<u32, ReplayError> {
    let mut config = system.initial_configuration();
    let mut deepest = 1usize;
    for (index, action) in phi.iter().enumerate() {
        config = successor(system, &config, action, Bound::Infinite)
            .map_err(|reason| ReplayError { index, reason })?;
        for &c in system.live_channels() {
            deepest = deepest.max(system.queue_len_of(&config, c));
        }
    }
    Ok(deepest as u32)
}

/// Summary of every trace predicate, as reported by the CLI.
#[derive(Clone, Debug)]
pub struct TraceReport {
    pub valid: bool,
    /// Smallest capacity under which the trace replays from the initial
    /// configuration, when a system is supplied and replay succeeds.
    pub min_bounded_k: Option<u32>,
    /// Replay failure, when a system is supplied and replay fails.
    pub replay_error: Option<ReplayError>,
    /// Smallest k for which the trace is k-match-bounded (valid traces
    /// only, capped).
    pub min_match_bounded_k: Option<u32>,
    /// Smallest k admitting an exchange decomposition, if one exists below
    /// the cap.
    pub exchange_k: Option<u32>,
    pub decomposition: Option<Decomposition>,
}

/// Evaluate every predicate on the trace, searching minimal bounds up to
/// `cap`.
pub fn trace_report(phi: &[Action], system: Option<&System>, cap: u32) -> TraceReport {
    let valid = is_valid(phi);
    let (min_bounded_k, replay_error) = match system {
        None => (None, None),
        Some(sys) => match min_replay_bound(sys, phi) {
            Ok(k) => (Some(k), None),
            Err(e) => (None, Some(e)),
        },
    };
    let min_match_bounded_k = if valid {
        match match_bound(phi) {
            Ok(lag) => {
                let k = (lag as u32).max(1);
                (k <= cap).then_some(k)
            }
            Err(_) => None,
        }
    } else {
        None
    };
    let mut exchange_k = None;
    let mut decomposition = None;
    if valid {
        for k in 1..=cap {
            if let Ok((true, d)) = is_k_exchange(phi, k) {
                exchange_k = Some(k);
                decomposition = d;
                break;
            }
        }
    }
    TraceReport {
        valid,
        min_bounded_k,
        replay_error,
        min_match_bounded_k,
        exchange_k,
        decomposition,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::testutil::{recv, send};

    /// The crossing execution of the paired request/reply protocol: bounded
    /// by 1, yet admitting no exchange decomposition.
    fn crossing_trace() -> Execution {
        vec![
            send("p", "q", "a"),
            send("q", "p", "c"),
            recv("q", "p", "c"),
            send("q", "p", "d"),
            recv("p", "q", "a"),
            send("p", "q", "b"),
            recv("q", "p", "d"),
            recv("p", "q", "b"),
        ]
    }

    /// Its reordering where both of q's sends precede any consumption.
    fn crossing_trace_alt() -> Execution {
        vec![
            send("p", "q", "a"),
            send("q", "p", "c"),
            send("q", "p", "d"),
            recv("q", "p", "c"),
            recv("p", "q", "a"),
            send("p", "q", "b"),
            recv("q", "p", "d"),
            recv("p", "q", "b"),
        ]
    }

    /// Literal prefix-projection oracle for validity.
    fn valid_oracle(phi: &[Action]) -> bool {
        let channels: BTreeSet<Channel> = phi.iter().map(|a| a.channel.clone()).collect();
        for end in 0..=phi.len() {
            let prefix = &phi[..end];
            for channel in &channels {
                let sent: Vec<_> = prefix
                    .iter()
                    .filter(|a| a.is_send() && &a.channel == channel)
                    .map(|a| a.label.clone())
                    .collect();
                let received: Vec<_> = prefix
                    .iter()
                    .filter(|a| a.is_receive() && &a.channel == channel)
                    .map(|a| a.label.clone())
                    .collect();
                if received.len() > sent.len() || sent[..received.len()] != received[..] {
                    return false;
                }
            }
        }
        true
    }

    /// Literal formula oracle for the matched-send lag.
    fn match_bound_oracle(phi: &[Action]) -> usize {
        let channels: BTreeSet<Channel> = phi.iter().map(|a| a.channel.clone()).collect();
        let mut worst = 0usize;
        for end in 0..=phi.len() {
            let prefix = &phi[..end];
            for channel in &channels {
                let lag = sends_on(prefix, channel).min(receives_on(phi, channel)) as isize
                    - receives_on(prefix, channel) as isize;
                worst = worst.max(lag.max(0) as usize);
            }
        }
        worst
    }

    #[test]
    fn validity_examples() {
        assert!(is_valid(&[send("p", "q", "a"), recv("p", "q", "a")]));
        assert!(!is_valid(&[recv("p", "q", "a")]));
        assert!(is_valid(&crossing_trace()));
        // head label mismatch
        assert!(!is_valid(&[
            send("p", "q", "a"),
            send("p", "q", "b"),
            recv("p", "q", "b"),
        ]));
    }

    #[test]
    fn validity_agrees_with_the_prefix_oracle() {
        let candidates = [
            vec![],
            vec![send("p", "q", "a")],
            vec![recv("p", "q", "a")],
            crossing_trace(),
            crossing_trace_alt(),
            vec![send("p", "q", "a"), recv("p", "q", "a"), recv("p", "q", "a")],
            vec![send("s", "r", "a"), send("s", "p", "b"), recv("s", "r", "a")],
        ];
        for phi in &candidates {
            assert_eq!(is_valid(phi), valid_oracle(phi), "{:?}", phi);
        }
    }

    #[test]
    fn match_bound_examples() {
        // evaluated with the literal formula over all 8 prefixes
        assert_eq!(match_bound(&crossing_trace()).unwrap(), 1);
        assert!(is_k_match_bounded(&crossing_trace(), 1).unwrap());

        // repeated unmatched sends never count toward the lag
        let mut orphan = Vec::new();
        for _ in 0..4 {
            orphan.push(send("s", "r", "a"));
            orphan.push(send("s", "p", "b"));
            orphan.push(recv("s", "r", "a"));
        }
        assert_eq!(match_bound(&orphan).unwrap(), 1);

        let two_deep = vec![
            send("p", "q", "a"),
            send("p", "q", "a"),
            recv("p", "q", "a"),
            recv("p", "q", "a"),
        ];
        assert!(!is_k_match_bounded(&two_deep, 1).unwrap());
        assert!(is_k_match_bounded(&two_deep, 2).unwrap());

        assert_eq!(
            is_k_match_bounded(&[recv("p", "q", "a")], 1),
            Err(TraceError::InvalidTrace)
        );
    }

    #[test]
    fn match_bound_agrees_with_the_formula_oracle() {
        for phi in [
            crossing_trace(),
            crossing_trace_alt(),
            vec![
                send("p", "q", "a"),
                send("p", "q", "a"),
                recv("p", "q", "a"),
                recv("p", "q", "a"),
            ],
            vec![send("p", "q", "a")],
            vec![],
        ] {
            assert_eq!(match_bound(&phi).unwrap(), match_bound_oracle(&phi));
        }
    }

    #[test]
    fn exchange_examples() {
        // the crossing pattern admits no decomposition at any small k:
        // the first message is received outside any in-shape phase
        for k in 1..=4 {
            let (ok, _) = is_k_exchange(&crossing_trace(), k).unwrap();
            assert!(!ok, "k={}", k);
            let (ok, _) = is_k_exchange(&crossing_trace_alt(), k).unwrap();
            assert!(!ok, "alt k={}", k);
        }

        let pair = vec![send("p", "q", "a"), recv("p", "q", "a")];
        let (ok, decomposition) = is_k_exchange(&pair, 1).unwrap();
        assert!(ok);
        assert_eq!(decomposition.unwrap(), vec![2]);

        let two_deep = vec![
            send("p", "q", "a"),
            send("p", "q", "a"),
            recv("p", "q", "a"),
            recv("p", "q", "a"),
        ];
        let (ok, _) = is_k_exchange(&two_deep, 1).unwrap();
        assert!(!ok);
        let (ok, decomposition) = is_k_exchange(&two_deep, 2).unwrap();
        assert!(ok);
        assert_eq!(decomposition.unwrap(), vec![4]);
    }

    #[test]
    fn unmatched_sends_may_stay_unreceived_forever() {
        // a phase may leave a message unmatched as long as nobody ever
        // receives on that channel afterwards
        let orphan = vec![
            send("s", "r", "a"),
            send("s", "p", "b"),
            recv("s", "r", "a"),
            send("s", "r", "a"),
            send("s", "p", "b"),
            recv("s", "r", "a"),
        ];
        let (ok, _) = is_k_exchange(&orphan, 2).unwrap();
        assert!(ok);
    }

    #[test]
    fn equivalence_examples() {
        let phi = crossing_trace();
        assert!(causal_equiv(&phi, &phi));
        assert!(causal_equiv(&crossing_trace(), &crossing_trace_alt()));
        assert!(!causal_equiv(&[send("p", "q", "a")], &[send("p", "q", "b")]));

        // projected equivalence ignores validity
        assert!(projected_equiv(
            &[recv("p", "q", "a")],
            &[recv("p", "q", "a")]
        ));
        assert!(!causal_equiv(&[recv("p", "q", "a")], &[recv("p", "q", "a")]));
        // disjoint subjects commute
        assert!(projected_equiv(
            &[send("p", "q", "a"), send("r", "s", "b")],
            &[send("r", "s", "b"), send("p", "q", "a")]
        ));
    }

    #[test]
    fn replay_examples() {
        let sys = corpus::load("client_server_logger").unwrap();
        let trace = vec![
            send("c", "s", "req"),
            send("c", "s", "data"),
            recv("c", "s", "req"),
        ];
        // both requests in flight need a capacity of 2
        assert!(replay(&sys, &trace, Bound::Finite(2)).is_ok());
        assert_eq!(
            replay(&sys, &trace, Bound::Finite(1)),
            Err(ReplayError {
                index: 1,
                reason: DisabledReason::QueueFull
            })
        );
        assert_eq!(min_replay_bound(&sys, &trace), Ok(2));

        let ping = crate::testutil::ping_system();
        assert_eq!(
            replay(&ping, &[recv("P", "Q", "a")], Bound::Finite(1)),
            Err(ReplayError {
                index: 0,
                reason: DisabledReason::QueueEmpty
            })
        );

        let sys = corpus::load("cross_exchange").unwrap();
        let end = replay(&sys, &crossing_trace(), Bound::Finite(1)).unwrap();
        assert!(end.is_stable());
        assert_eq!(min_replay_bound(&sys, &crossing_trace()), Ok(1));
    }

    #[test]
    fn causally_equivalent_replays_reach_the_same_configuration() {
        let sys = corpus::load("cross_exchange").unwrap();
        let a = replay(&sys, &crossing_trace(), Bound::Finite(2)).unwrap();
        let b = replay(&sys, &crossing_trace_alt(), Bound::Finite(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_report_summarizes_everything() {
        let sys = corpus::load("cross_exchange").unwrap();
        let report = trace_report(&crossing_trace(), Some(&sys), DEFAULT_BOUND_SEARCH_CAP);
        assert!(report.valid);
        assert_eq!(report.min_bounded_k, Some(1));
        assert_eq!(report.min_match_bounded_k, Some(1));
        assert_eq!(report.exchange_k, None);
        assert!(report.decomposition.is_none());
        assert!(report.replay_error.is_none());

        let report = trace_report(&[recv("P", "Q", "a")], None, DEFAULT_BOUND_SEARCH_CAP);
        assert!(!report.valid);
        assert_eq!(report.min_match_bounded_k, None);
    }
}
