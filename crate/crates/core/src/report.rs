//! The JSON report document emitted by the CLI.
//!
//! Rendering is deterministic: field order is fixed by the struct layout,
//! collections are vectors in evaluation order, and wall-clock times stay
//! out of the document so identical invocations produce identical bytes.

use serde::{Deserialize, Serialize};

use crate::checks::{KmcResult, KmcStatus, PropertyVerdict, Witness};
use crate::model::{Bound, System};
use crate::traces::TraceReport;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone)]
pub struct WitnessEntry {
    pub path: Vec<String>,
    pub configuration: String,
    pub detail: String,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone)]
pub struct VerdictEntry {
    pub property: String,
    pub bound: u32,
    pub holds: bool,
    pub nodes: usize,
    pub edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessEntry>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone)]
pub struct KmcEntry {
    pub max_bound: u32,
    /// The certified bound, absent when the search failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatible: Option<u32>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone)]
pub struct GraphEntry {
    pub bound: u32,
    pub nodes: usize,
    pub edges: usize,
}

/// Everything one `check` invocation computed.
#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone)]
pub struct ReportDocument {
    pub format: u32,
    pub system: String,
    pub participants: Vec<String>,
    pub send_directed: bool,
    pub receive_directed: bool,
    pub kmc: KmcEntry,
    /// Certification implies safety under the unbounded semantics too.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety_note: Option<String>,
    pub verdicts: Vec<VerdictEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smc: Option<VerdictEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_agnostic: Option<VerdictEntry>,
    /// The reduced graph at the decisive bound.
    pub graph: GraphEntry,
}

fn bound_value(bound: Bound) -> u32 {
    match bound {
        Bound::Finite(k) => k,
        Bound::Infinite => u32::MAX,
    }
}

pub fn witness_entry(system: &System, witness: &Witness) -> WitnessEntry {
    WitnessEntry {
        path: witness.path.iter().map(|a| a.to_string()).collect(),
        configuration: system.describe_configuration(&witness.configuration),
        detail: witness.detail.clone(),
    }
}

pub fn verdict_entry(system: &System, verdict: &PropertyVerdict) -> VerdictEntry {
    VerdictEntry {
        property: verdict.property.name().to_string(),
        bound: bound_value(verdict.bound),
        holds: verdict.holds,
        nodes: verdict.stats.nodes,
        edges: verdict.stats.edges,
        witness: verdict
            .witness
            .as_ref()
            .map(|w| witness_entry(system, w)),
    }
}

/// Assemble the document for one checked system.
pub fn build_report(
    system: &System,
    name: &str,
    max_bound: u32,
    kmc: &KmcResult,
    smc: Option<&PropertyVerdict>,
    bound_agnostic: Option<&PropertyVerdict>,
) -> ReportDocument {
    let (send_directed, receive_directed) = system.directedness();
    let compatible = kmc.compatible_bound();
    let decisive = match kmc.status {
        KmcStatus::Compatible(k) | KmcStatus::Failed(k) => k,
    };
    let graph = kmc
        .at_bound(decisive)
        .last()
        .map(|v| GraphEntry {
            bound: decisive,
            nodes: v.stats.nodes,
            edges: v.stats.edges,
        })
        .unwrap_or(GraphEntry {
            bound: decisive,
            nodes: 0,
            edges: 0,
        });
    let safety_note = compatible.map(|k| {
        format!(
            "certified at capacity {}: safe under any capacity at least {}, including unbounded channels",
            k, k
        )
    });
    ReportDocument {
        format: FORMAT_VERSION,
        system: name.to_string(),
        participants: system
            .participants()
            .iter()
            .map(|p| p.name().to_string())
            .collect(),
        send_directed,
        receive_directed,
        kmc: KmcEntry {
            max_bound,
            compatible,
        },
        safety_note,
        verdicts: kmc
            .per_property
            .iter()
            .map(|v| verdict_entry(system, v))
            .collect(),
        smc: smc.map(|v| verdict_entry(system, v)),
        bound_agnostic: bound_agnostic.map(|v| verdict_entry(system, v)),
        graph,
    }
}

pub fn render_json(report: &ReportDocument) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn parse_json(text: &str) -> Result<ReportDocument, serde_json::Error> {
    serde_json::from_str(text)
}

/// JSON form of a trace report.
#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone)]
pub struct TraceDocument {
    pub format: u32,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_bounded_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay_at_k: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_match_bounded_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exchange_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<usize>>,
}

pub fn build_trace_document(report: &TraceReport, replay_at_k: Option<String>) -> TraceDocument {
    TraceDocument {
        format: FORMAT_VERSION,
        valid: report.valid,
        min_bounded_k: report.min_bounded_k,
        replay_error: report.replay_error.as_ref().map(|e| e.to_string()),
        replay_at_k,
        min_match_bounded_k: report.min_match_bounded_k,
        exchange_k: report.exchange_k,
        decomposition: report.decomposition.clone(),
    }
}
