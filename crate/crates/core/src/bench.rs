//! Parametric benchmark family: chains of automaton pairs that send a
//! burst of messages and then drain the replies.
//!
//! A spec `(k_msgs, m_pairs, n_labels)` produces `2 * m_pairs` automata.
//! Both members of a pair first send `k_msgs` messages to the other, then
//! receive `k_msgs` back, each step offering `n_labels` alternative labels.
//! Distinct pairs share no channels, and every automaton is directed. The
//! full burst needs channel capacity `k_msgs`, so the certified bound grows
//! with the burst length while the reduced exploration grows only linearly
//! in `k_msgs` and `m_pairs`.

use std::fmt::Write as _;
use std::time::Instant;

use crate::checks::{check_kmc, KmcOptions};
use crate::model::{Action, Automaton, MessageLabel, Participant, System};

/// Parameters of one generated system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchSpec {
    /// Messages per burst (and the expected certified bound), at least 1.
    pub k_msgs: u32,
    /// Number of automaton pairs, at least 1.
    pub m_pairs: u32,
    /// Alternative labels per step, at least 1.
    pub n_labels: u32,
}

impl BenchSpec {
    pub fn new(k_msgs: u32, m_pairs: u32, n_labels: u32) -> Self {
        assert!(k_msgs >= 1 && m_pairs >= 1 && n_labels >= 1);
        BenchSpec {
            k_msgs,
            m_pairs,
            n_labels,
        }
    }
}

/// Build the system for a spec: participants `p1..p{2m}`, labels
/// `a1..a{n}`; machine `p{i}` talks to `p{i+1}` when i is odd and to
/// `p{i-1}` when i is even, sending its burst before receiving.
pub fn generate(spec: &BenchSpec) -> System {
    let count = (2 * spec.m_pairs) as usize;
    let participants: Vec<Participant> = (1..=count)
        .map(|i| Participant::new(format!("p{}", i)))
        .collect();
    let labels: Vec<MessageLabel> = (1..=spec.n_labels)
        .map(|l| MessageLabel::new(format!("a{}", l)))
        .collect();
    let mut automata = Vec::with_capacity(count);
    for (idx, me) in participants.iter().enumerate() {
        let partner = if (idx + 1) % 2 == 1 {
            &participants[idx + 1]
        } else {
            &participants[idx - 1]
        };
        let k = spec.k_msgs as usize;
        let state_names: Vec<String> = (0..=2 * k).map(|j| format!("s{}", j)).collect();
        let mut edges: Vec<(&str, Action, &str)> = Vec::new();
        for j in 0..k {
            for label in &labels {
                edges.push((
                    &state_names[j],
                    Action::send(me.clone(), partner.clone(), label.clone()),
                    &state_names[j + 1],
                ));
            }
        }
        for j in k..2 * k {
            for label in &labels {
                edges.push((
                    &state_names[j],
                    Action::receive(partner.clone(), me.clone(), label.clone()),
                    &state_names[j + 1],
                ));
            }
        }
        automata.push(Automaton::new(me.clone(), &state_names[0], &edges));
    }
    System::new(automata).expect("generated systems are well-formed")
}

/// One row of a suite run.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub spec: BenchSpec,
    /// Certified bound, when one was found within the limit.
    pub k_found: Option<u32>,
    /// Size of the reduced system at the decisive bound.
    pub nodes: usize,
    pub edges: usize,
    pub millis: u128,
    /// Resource-limit message, when the row was abandoned.
    pub error: Option<String>,
}

/// Run the compatibility check over every spec, collecting sizes and wall
/// times. A row hitting the exploration cap is recorded and the suite
/// continues.
pub fn run_suite(specs: &[BenchSpec], max_bound: u32, node_cap: usize) -> Vec<BenchRow> {
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let system = generate(spec);
        let start = Instant::now();
        let options = KmcOptions {
            max_bound,
            node_cap,
            eager: false,
        };
        match check_kmc(&system, options) {
            Ok(result) => {
                let k_found = result.compatible_bound();
                let decisive = k_found.unwrap_or(max_bound);
                let (nodes, edges) = result
                    .at_bound(decisive)
                    .last()
                    .map(|v| (v.stats.nodes, v.stats.edges))
                    .unwrap_or((0, 0));
                rows.push(BenchRow {
                    spec: *spec,
                    k_found,
                    nodes,
                    edges,
                    millis: start.elapsed().as_millis(),
                    error: None,
                });
            }
            Err(e) => rows.push(BenchRow {
                spec: *spec,
                k_found: None,
                nodes: 0,
                edges: 0,
                millis: start.elapsed().as_millis(),
                error: Some(e.to_string()),
            }),
        }
    }
    rows
}

/// Render suite rows as CSV.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("k_msgs,m_pairs,n_labels,k_found,nodes,edges,millis,error\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.spec.k_msgs,
            row.spec.m_pairs,
            row.spec.n_labels,
            row.k_found.map(|k| k.to_string()).unwrap_or_default(),
            row.nodes,
            row.edges,
            row.millis,
            row.error.clone().unwrap_or_default()
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{KmcStatus, PropertyVerdict};
    use crate::explore::{build_full_ts, DEFAULT_NODE_CAP};

    #[test]
    fn smallest_instance_shape() {
        let sys = generate(&BenchSpec::new(1, 1, 1));
        assert_eq!(sys.participant_count(), 2);
        for m in sys.automata() {
            assert_eq!(m.state_count(), 3);
            assert_eq!(m.transition_count(), 2);
        }
        assert!(sys.validate_csa().is_empty());
        assert!(sys.is_directed());
    }

    #[test]
    fn burst_of_two_needs_capacity_two() {
        let sys = generate(&BenchSpec::new(2, 1, 1));
        for m in sys.automata() {
            assert_eq!(m.state_count(), 5);
        }
        let result = check_kmc(
            &sys,
            KmcOptions {
                max_bound: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(result.status, KmcStatus::Compatible(2));
    }

    #[test]
    fn label_alternatives_multiply_paths() {
        let sys = generate(&BenchSpec::new(1, 1, 2));
        let m = sys.automaton(0);
        // n alternatives at each of the 2 steps: 4 maximal label paths
        let mut paths = 0;
        for (_, mid) in m.transitions_from(m.initial()) {
            paths += m.transitions_from(*mid).len();
        }
        assert_eq!(paths, 4);
    }

    #[test]
    fn generated_systems_are_bound_independent() {
        for spec in [
            BenchSpec::new(1, 2, 1),
            BenchSpec::new(2, 1, 2),
            BenchSpec::new(3, 2, 1),
        ] {
            let sys = generate(&spec);
            assert!(sys.is_directed(), "{:?}", spec);
            for k in 1..=2 {
                let ts = build_full_ts(&sys, k, DEFAULT_NODE_CAP).unwrap();
                assert!(crate::checks::check_obi(&sys, &ts).holds, "{:?} k={}", spec, k);
                assert!(crate::checks::check_ibi(&sys, &ts).holds, "{:?} k={}", spec, k);
            }
        }
    }

    #[test]
    fn certified_bound_never_exceeds_the_burst() {
        for k in 1..=3 {
            for m in 1..=2 {
                for n in 1..=2 {
                    let spec = BenchSpec::new(k, m, n);
                    let sys = generate(&spec);
                    let result = check_kmc(
                        &sys,
                        KmcOptions {
                            max_bound: k + 1,
                            ..Default::default()
                        },
                    )
                    .unwrap();
                    let found = result
                        .compatible_bound()
                        .unwrap_or_else(|| panic!("{:?} not certified", spec));
                    assert!(found <= k, "{:?} certified at {}", spec, found);
                }
            }
        }
    }

    #[test]
    fn suite_reports_one_row_per_spec() {
        let specs: Vec<BenchSpec> = (2..=4).map(|k| BenchSpec::new(k, 1, 1)).collect();
        let rows = run_suite(&specs, 6, DEFAULT_NODE_CAP);
        assert_eq!(rows.len(), 3);
        for (row, spec) in rows.iter().zip(&specs) {
            assert_eq!(row.k_found, Some(spec.k_msgs), "{:?}", spec);
            assert!(row.error.is_none());
            assert!(row.edges > 0);
        }
        // longer bursts explore more, but only linearly
        assert!(rows[1].edges >= rows[0].edges);
        assert!(rows[2].edges >= rows[1].edges);
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("k_msgs,"));
        let _: Vec<&PropertyVerdict> = Vec::new();
    }

    #[test]
    fn pair_count_scales_edge_counts_monotonically() {
        let mut previous = 0;
        for m in 1..=3 {
            let rows = run_suite(&[BenchSpec::new(1, m, 1)], 3, DEFAULT_NODE_CAP);
            assert_eq!(rows[0].k_found, Some(1));
            assert!(rows[0].edges >= previous);
            previous = rows[0].edges;
        }
    }
}
