use serde_json::{json, Map, Value};

use crate::automata::Machine;
use crate::error::{Error, Result};
use crate::exactmath::Rational;

/// Maps certifying that machine `B` (the translation) expresses machine `A`
/// (the source). States and actions map from `B` back to `A`; times map
/// forward, `t_B = time_scale * t_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub state_map: Vec<usize>,
    pub action_map: Vec<usize>,
    pub time_scale: Rational,
}

impl Witness {
    pub fn identity(m: &Machine) -> Witness {
        Witness {
            state_map: (0..m.num_states()).collect(),
            action_map: (0..m.triple.actions.len()).collect(),
            time_scale: Rational::one(),
        }
    }

    pub fn is_state_bijection(&self) -> bool {
        let mut seen = vec![false; self.state_map.len()];
        self.state_map.iter().all(|&a| a < seen.len() && !std::mem::replace(&mut seen[a], true))
    }

    /// `{state_map, action_map, time_map}` keyed by names.
    pub fn to_json(&self, a: &Machine, b: &Machine) -> Value {
        let mut sm = Map::new();
        for (tb, &ta) in self.state_map.iter().enumerate() {
            sm.insert(b.state_name(tb).to_string(), json!(a.state_name(ta)));
        }
        let mut am = Map::new();
        for (tb, &ta) in self.action_map.iter().enumerate() {
            am.insert(b.action_name(tb).to_string(), json!(a.action_name(ta)));
        }
        json!({
            "state_map": sm,
            "action_map": am,
            "time_map": { "scale": self.time_scale.to_string() },
        })
    }

    pub fn from_json(a: &Machine, b: &Machine, v: &Value) -> Result<Witness> {
        let lookup = |key: &str, names_b: &[String], names_a: &[String]| -> Result<Vec<usize>> {
            let obj = v
                .get(key)
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Parse(format!("witness needs an object '{key}'")))?;
            names_b
                .iter()
                .map(|nb| {
                    let na = obj
                        .get(nb)
                        .and_then(Value::as_str)
                        .ok_or_else(|| Error::Parse(format!("'{key}' has no entry for '{nb}'")))?;
                    names_a.iter().position(|x| x == na).ok_or_else(|| Error::Parse(format!("unknown name '{na}'")))
                })
                .collect()
        };
        let state_map = lookup("state_map", &b.triple.states, &a.triple.states)?;
        let action_map = lookup("action_map", &b.triple.actions, &a.triple.actions)?;
        let time_scale = match v.get("time_map").and_then(|t| t.get("scale")) {
            None => Rational::one(),
            Some(Value::String(s)) => s.parse()?,
            Some(other) => return Err(Error::Parse(format!("bad time scale {other}"))),
        };
        Ok(Witness { state_map, action_map, time_scale })
    }
}
