//! Textual formats: the `.csa` system format and the one-action-per-line
//! trace format.
//!
//! A `.csa` file holds one `machine` block per participant:
//!
//! ```text
//! machine <Name>
//! init <state>
//! <src> <dst> <sender> <receiver> <!|?> <label>
//! end
//! ```
//!
//! Lines are whitespace-separated tokens; `#` starts a comment. Participant,
//! state, and label tokens are drawn from `[A-Za-z0-9_]+`.

use crate::model::{
    Action, Automaton, Channel, Direction, Execution, MessageLabel, Participant, System,
    Violation,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid system: {0}")]
    System(#[from] crate::model::SystemError),
    #[error("machine {machine} (line {line}) breaks the CSA rules:\n{}",
            .violations.iter().map(|v| format!("  {}", v)).collect::<Vec<_>>().join("\n"))]
    Validation {
        machine: Participant,
        line: usize,
        violations: Vec<Violation>,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn valid_token(tok: &str) -> bool {
    !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn check_token(line: usize, tok: &str, what: &str) -> Result<(), ParseError> {
    if valid_token(tok) {
        Ok(())
    } else {
        Err(syntax(
            line,
            format!("{} `{}` is not a token over [A-Za-z0-9_]", what, tok),
        ))
    }
}

/// Strip comments and split a file into (line number, tokens) records.
fn tokenize(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                None
            } else {
                Some((i + 1, tokens))
            }
        })
        .collect()
}

fn parse_direction(line: usize, tok: &str) -> Result<Direction, ParseError> {
    match tok {
        "!" => Ok(Direction::Send),
        "?" => Ok(Direction::Receive),
        other => Err(syntax(line, format!("expected `!` or `?`, got `{}`", other))),
    }
}

/// Parse a `.csa` file into a [`System`]. The CSA rules are checked after
/// parsing; any violation is reported against the offending machine block.
pub fn parse_system(text: &str) -> Result<System, ParseError> {
    struct Block {
        participant: Participant,
        start_line: usize,
        initial: String,
        transitions: Vec<(String, Action, String)>,
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut current: Option<Block> = None;
    for (line, tokens) in tokenize(text) {
        match tokens[0] {
            "machine" => {
                if current.is_some() {
                    return Err(syntax(line, "`machine` inside an unterminated block"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(line, "expected `machine <Name>`"));
                }
                check_token(line, tokens[1], "machine name")?;
                current = Some(Block {
                    participant: Participant::new(tokens[1]),
                    start_line: line,
                    initial: String::new(),
                    transitions: Vec::new(),
                });
            }
            "init" => {
                let block = current
                    .as_mut()
                    .ok_or_else(|| syntax(line, "`init` outside a machine block"))?;
                if tokens.len() != 2 {
                    return Err(syntax(line, "expected `init <state>`"));
                }
                check_token(line, tokens[1], "state")?;
                if !block.initial.is_empty() {
                    return Err(syntax(line, "duplicate `init`"));
                }
                block.initial = tokens[1].to_string();
            }
            "end" => {
                let block = current
                    .take()
                    .ok_or_else(|| syntax(line, "`end` outside a machine block"))?;
                if block.initial.is_empty() {
                    return Err(syntax(line, "machine block without `init`"));
                }
                blocks.push(block);
            }
            _ => {
                let block = current
                    .as_mut()
                    .ok_or_else(|| syntax(line, "transition outside a machine block"))?;
                if block.initial.is_empty() {
                    return Err(syntax(line, "`init` must precede transitions"));
                }
                if tokens.len() != 6 {
                    return Err(syntax(
                        line,
                        "expected `<src> <dst> <sender> <receiver> <!|?> <label>`",
                    ));
                }
                check_token(line, tokens[0], "state")?;
                check_token(line, tokens[1], "state")?;
                check_token(line, tokens[2], "participant")?;
                check_token(line, tokens[3], "participant")?;
                check_token(line, tokens[5], "label")?;
                let direction = parse_direction(line, tokens[4])?;
                let action = Action {
                    channel: Channel::new(
                        Participant::new(tokens[2]),
                        Participant::new(tokens[3]),
                    ),
                    direction,
                    label: MessageLabel::new(tokens[5]),
                };
                block
                    .transitions
                    .push((tokens[0].to_string(), action, tokens[1].to_string()));
            }
        }
    }
    if current.is_some() {
        return Err(syntax(0, "unterminated machine block at end of file"));
    }
    if blocks.is_empty() {
        return Err(syntax(0, "no machine blocks found"));
    }
    let automata: Vec<Automaton> = blocks
        .iter()
        .map(|b| {
            let edges: Vec<(&str, Action, &str)> = b
                .transitions
                .iter()
                .map(|(s, a, d)| (s.as_str(), a.clone(), d.as_str()))
                .collect();
            Automaton::new(b.participant.clone(), &b.initial, &edges)
        })
        .collect();
    let system = System::new(automata)?;
    let violations = system.validate_csa();
    if !violations.is_empty() {
        let machine = violations[0].participant.clone();
        let line = blocks
            .iter()
            .find(|b| b.participant == machine)
            .map(|b| b.start_line)
            .unwrap_or(0);
        return Err(ParseError::Validation {
            machine,
            line,
            violations,
        });
    }
    Ok(system)
}

/// Parse a trace file: one `<sender> <receiver> <!|?> <label>` per line.
pub fn parse_trace(text: &str) -> Result<Execution, ParseError> {
    let mut out = Vec::new();
    for (line, tokens) in tokenize(text) {
        if tokens.len() != 4 {
            return Err(syntax(
                line,
                "expected `<sender> <receiver> <!|?> <label>`",
            ));
        }
        check_token(line, tokens[0], "participant")?;
        check_token(line, tokens[1], "participant")?;
        check_token(line, tokens[3], "label")?;
        let direction = parse_direction(line, tokens[2])?;
        if tokens[0] == tokens[1] {
            return Err(syntax(line, "sender and receiver must differ"));
        }
        out.push(Action {
            channel: Channel::new(Participant::new(tokens[0]), Participant::new(tokens[1])),
            direction,
            label: MessageLabel::new(tokens[3]),
        });
    }
    Ok(out)
}
