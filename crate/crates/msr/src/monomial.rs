use std::collections::BTreeMap;

use num_traits::One;
use sdemsr_diagram::{Diagram, Rational, VertexKind};

use crate::MsrError;

/// `scalar · Π x(t_i)^{m_i} · Π x̃(t_j)^{n_j}` over observation slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub x_legs: Vec<(usize, u32)>,
    pub xt_legs: Vec<(usize, u32)>,
    pub scalar: Rational,
}

fn merge(legs: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut m: BTreeMap<usize, u32> = BTreeMap::new();
    for &(s, k) in legs {
        *m.entry(s).or_default() += k;
    }
    m.into_iter().filter(|&(_, k)| k > 0).collect()
}

impl Monomial {
    /// Merges repeated slots; zero multiplicities are rejected.
    pub fn new(x_legs: &[(usize, u32)], xt_legs: &[(usize, u32)], scalar: Rational) -> Result<Self, MsrError> {
        if x_legs.iter().chain(xt_legs).any(|&(_, k)| k == 0) {
            return Err(MsrError::InvalidInput("leg multiplicities must be at least 1".into()));
        }
        Ok(Monomial { x_legs: merge(x_legs), xt_legs: merge(xt_legs), scalar })
    }

    /// `x(t_{s_1}) ⋯ x(t_{s_k})`; repeated slots become powers.
    pub fn x(slots: &[usize]) -> Self {
        let legs: Vec<(usize, u32)> = slots.iter().map(|&s| (s, 1)).collect();
        Monomial { x_legs: merge(&legs), xt_legs: Vec::new(), scalar: Rational::one() }
    }

    /// `x(t)^a x̃(t)^b` at one slot.
    pub fn local(slot: usize, a: u32, b: u32) -> Self {
        Monomial {
            x_legs: if a > 0 { vec![(slot, a)] } else { Vec::new() },
            xt_legs: if b > 0 { vec![(slot, b)] } else { Vec::new() },
            scalar: Rational::one(),
        }
    }

    pub fn x_count(&self) -> u32 {
        self.x_legs.iter().map(|l| l.1).sum()
    }

    pub fn xt_count(&self) -> u32 {
        self.xt_legs.iter().map(|l| l.1).sum()
    }

    pub fn slots(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.x_legs.iter().chain(&self.xt_legs).map(|l| l.0).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// All legs sit at one time.
    pub fn is_local(&self) -> bool {
        self.slots().len() <= 1
    }

    /// The monomial as a diagram without edges: one external vertex per slot.
    pub fn to_open_diagram(&self) -> Diagram {
        let vertices = self
            .slots()
            .into_iter()
            .map(|slot| {
                let find = |v: &[(usize, u32)]| v.iter().find(|l| l.0 == slot).map_or(0, |l| l.1);
                VertexKind::External { slot, legs: find(&self.x_legs), snaky: find(&self.xt_legs) }
            })
            .collect();
        Diagram { vertices, edges: Vec::new(), coefficient: self.scalar.clone(), chi_order: 0 }
    }
}

/// Rejects unbound slots and slots whose times coincide.
pub fn check_distinct_times(slots: &[usize], times: &[f64]) -> Result<(), MsrError> {
    for (i, &a) in slots.iter().enumerate() {
        let ta = *times.get(a).ok_or(MsrError::UnboundSlot(a))?;
        for &b in &slots[i + 1..] {
            let tb = *times.get(b).ok_or(MsrError::UnboundSlot(b))?;
            if a != b && ta == tb {
                return Err(MsrError::CoincidentTimes { a: a.min(b), b: a.max(b) });
            }
        }
    }
    Ok(())
}
