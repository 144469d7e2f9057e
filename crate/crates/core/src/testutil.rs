//! Small construction helpers shared by the unit tests.

use crate::model::{Action, Automaton, Direction, MessageLabel, Participant, System};

pub fn act(sender: &str, receiver: &str, dir: char, label: &str) -> Action {
    let direction = match dir {
        '!' => Direction::Send,
        '?' => Direction::Receive,
        _ => panic!("direction must be ! or ?"),
    };
    Action {
        channel: crate::model::Channel::new(Participant::new(sender), Participant::new(receiver)),
        direction,
        label: MessageLabel::new(label),
    }
}

pub fn send(sender: &str, receiver: &str, label: &str) -> Action {
    act(sender, receiver, '!', label)
}

pub fn recv(sender: &str, receiver: &str, label: &str) -> Action {
    act(sender, receiver, '?', label)
}

/// `P` sends one message `a` to `Q`; `Q` consumes it.
pub fn ping_system() -> System {
    let p = Automaton::new(
        Participant::new("P"),
        "0",
        &[("0", send("P", "Q", "a"), "1")],
    );
    let q = Automaton::new(
        Participant::new("Q"),
        "0",
        &[("0", recv("P", "Q", "a"), "1")],
    );
    System::new(vec![p, q]).unwrap()
}
