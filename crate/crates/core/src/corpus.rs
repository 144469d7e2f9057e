//! The bundled protocol corpus.
//!
//! Small systems exercising different combinations of the bounded
//! properties, embedded in the binary so the CLI and the test suites can
//! load them by name.

use crate::format::{parse_system, ParseError};
use crate::model::System;

/// `(name, .csa source)` pairs for every bundled system.
pub const ENTRIES: &[(&str, &str)] = &[
    (
        "client_server_logger",
        include_str!("../corpus/client_server_logger.csa"),
    ),
    ("input_race", include_str!("../corpus/input_race.csa")),
    ("drift_loop", include_str!("../corpus/drift_loop.csa")),
    ("balanced_loop", include_str!("../corpus/balanced_loop.csa")),
    ("prefetch_loop", include_str!("../corpus/prefetch_loop.csa")),
    ("narrow_choice", include_str!("../corpus/narrow_choice.csa")),
    (
        "narrow_choice_relaxed",
        include_str!("../corpus/narrow_choice_relaxed.csa"),
    ),
    (
        "stable_not_safe",
        include_str!("../corpus/stable_not_safe.csa"),
    ),
    ("orphan_stream", include_str!("../corpus/orphan_stream.csa")),
    ("cross_exchange", include_str!("../corpus/cross_exchange.csa")),
    (
        "four_player_game",
        include_str!("../corpus/four_player_game.csa"),
    ),
    (
        "rock_paper_scissors",
        include_str!("../corpus/rock_paper_scissors.csa"),
    ),
    ("token_relay", include_str!("../corpus/token_relay.csa")),
    (
        "optional_consumer",
        include_str!("../corpus/optional_consumer.csa"),
    ),
    ("ping", include_str!("../corpus/ping.csa")),
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|(n, _)| *n).collect()
}

pub fn source(name: &str) -> Option<&'static str> {
    ENTRIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Parse a bundled system by name.
pub fn load(name: &str) -> Result<System, ParseError> {
    let text = source(name).unwrap_or_else(|| panic!("no corpus entry named `{}`", name));
    parse_system(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses_and_is_valid_csa() {
        for (name, _) in ENTRIES {
            let sys = load(name).unwrap_or_else(|e| panic!("{} failed to load: {}", name, e));
            assert!(sys.validate_csa().is_empty(), "{} is not valid CSA", name);
        }
    }

    #[test]
    fn client_server_logger_shape() {
        let sys = load("client_server_logger").unwrap();
        assert_eq!(sys.participant_count(), 3);
        assert_eq!(sys.directedness(), (true, true));
    }

    #[test]
    fn narrow_choice_is_receive_directed_only() {
        for name in ["narrow_choice", "narrow_choice_relaxed"] {
            let sys = load(name).unwrap();
            assert_eq!(sys.directedness(), (false, true), "{}", name);
        }
    }
}
