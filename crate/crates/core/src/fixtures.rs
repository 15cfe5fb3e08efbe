//! Built-in example machines, shipped as JSON under `fixtures/`.

use crate::automata::{Machine, NfaEdge, StateActionTriple, Transitions};
use crate::format::parse_machine;

pub const NAMES: [&str; 7] = ["three_state_ta", "three_state_pa", "three_state_pta", "punctual_ta", "two_state_pa", "linear_tapd", "exp_sta"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "three_state_ta" => include_str!("../fixtures/three_state_ta.json"),
        "three_state_pa" => include_str!("../fixtures/three_state_pa.json"),
        "three_state_pta" => include_str!("../fixtures/three_state_pta.json"),
        "punctual_ta" => include_str!("../fixtures/punctual_ta.json"),
        "two_state_pa" => include_str!("../fixtures/two_state_pa.json"),
        "linear_tapd" => include_str!("../fixtures/linear_tapd.json"),
        "exp_sta" => include_str!("../fixtures/exp_sta.json"),
        _ => return None,
    })
}

/// Parses a built-in fixture. Panics on unknown names.
pub fn load(name: &str) -> Machine {
    let text = source(name).unwrap_or_else(|| panic!("no fixture named {name}"));
    parse_machine(text).expect("fixtures parse")
}

/// Two states, the same four edges as `two_state_pa` without probabilities.
pub fn two_state_nfa() -> Machine {
    let t = StateActionTriple::new(
        vec!["s1".into(), "s2".into()],
        0,
        vec!["g1".into(), "g2".into(), "g3".into(), "g4".into()],
    )
    .expect("valid triple");
    Machine::new(
        t,
        vec![],
        Transitions::Nfa(vec![
            NfaEdge { from: 0, action: 0, to: 0 },
            NfaEdge { from: 0, action: 1, to: 1 },
            NfaEdge { from: 1, action: 2, to: 1 },
            NfaEdge { from: 1, action: 3, to: 0 },
        ]),
    )
}
