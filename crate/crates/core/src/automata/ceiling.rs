use super::constraint::ClockConstraint;
use super::machine::{Machine, Transitions};
use crate::error::{Error, Result};
use crate::exactmath::{DomainBox, Rational};

fn guards(m: &Machine) -> Vec<&ClockConstraint> {
    (0..m.num_edges()).filter_map(|i| m.guard(i)).collect()
}

/// `C_T = 1 + max |constant|` over all guard atoms; 1 when there are none.
pub fn clock_ceiling(m: &Machine) -> Rational {
    let max = guards(m)
        .into_iter()
        .flat_map(|g| g.constants())
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    max + Rational::one()
}

/// Per-edge domain boxes `[min, max] / C_T` of each clock's satisfying
/// interval, clipped to `[0,1]`; reset clocks start at 0.
pub fn normalize_domains(m: &Machine) -> Result<Vec<DomainBox>> {
    if !matches!(m.transitions, Transitions::Pta(_) | Transitions::Ta(_)) {
        return Err(Error::Unsupported(format!("{} machines have no guards", m.kind())));
    }
    let ct = clock_ceiling(m);
    let nclk = m.num_clocks();
    let mut out = Vec::with_capacity(m.num_edges());
    for i in 0..m.num_edges() {
        let g = m.guard(i).expect("guarded model");
        let intervals = g
            .intervals(nclk)
            .map_err(|e| Error::Unsupported(format!("edge {i}: {e}")))?;
        let mut bounds = Vec::with_capacity(nclk);
        for (k, iv) in intervals.iter().enumerate() {
            if iv.is_empty() {
                return Err(Error::Unsupported(format!(
                    "edge {i}: guard is unsatisfiable on clock {}",
                    m.clocks[k]
                )));
            }
            let clip = |x: Rational| x.max(Rational::zero()).min(Rational::one());
            let lo = if m.resets(i).contains(&k) {
                Rational::zero()
            } else {
                clip(&iv.lo / &ct)
            };
            let hi = match &iv.hi {
                Some(h) => clip(h / &ct),
                None => Rational::one(),
            };
            bounds.push((lo, hi));
        }
        let b = DomainBox::new(bounds).map_err(|_| {
            Error::Unsupported(format!("edge {i}: guard normalizes to a degenerate box"))
        })?;
        out.push(b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::machine::{PtaEdge, StateActionTriple};
    use crate::exactmath::q;

    fn pta(guard: ClockConstraint, resets: Vec<usize>) -> Machine {
        let t = StateActionTriple::new(vec!["s".into()], 0, vec!["a".into()]).unwrap();
        let e = PtaEdge { from: 0, action: 0, to: 0, prob: q(1, 1), guard, resets };
        Machine::new(t, vec!["c".into()], Transitions::Pta(vec![e]))
    }

    #[test]
    fn ceiling_examples() {
        assert_eq!(clock_ceiling(&pta(ClockConstraint::True, vec![])), q(1, 1));
        assert_eq!(clock_ceiling(&pta(ClockConstraint::upper(0, q(3, 1), false), vec![])), q(4, 1));
    }

    #[test]
    fn normalized_boxes() {
        // c <= 2 with ceiling forced to 5 by a second conjunct that is always true
        let g = ClockConstraint::upper(0, q(2, 1), false).and(ClockConstraint::upper(0, q(4, 1), false));
        let b = normalize_domains(&pta(g, vec![])).unwrap();
        assert_eq!(b[0].bounds(), &[(q(0, 1), q(2, 5))]);

        let g = ClockConstraint::lower(0, q(1, 1), false).and(ClockConstraint::upper(0, q(3, 1), false));
        let b = normalize_domains(&pta(g, vec![])).unwrap();
        assert_eq!(b[0].bounds(), &[(q(1, 4), q(3, 4))]);

        let b = normalize_domains(&pta(ClockConstraint::True, vec![0])).unwrap();
        assert_eq!(b[0].bounds(), &[(q(0, 1), q(1, 1))]);
    }

    #[test]
    fn disjunction_and_equality_are_unsupported() {
        let or = ClockConstraint::upper(0, q(1, 1), true).or(ClockConstraint::lower(0, q(2, 1), true));
        assert!(matches!(normalize_domains(&pta(or, vec![])), Err(Error::Unsupported(_))));
        let eq = ClockConstraint::equals(0, q(2, 1));
        assert!(matches!(normalize_domains(&pta(eq, vec![])), Err(Error::Unsupported(_))));
    }
}
