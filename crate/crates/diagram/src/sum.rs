use std::collections::BTreeMap;

use num_traits::Zero;

use crate::canon::{canonicalize, CanonError, CanonicalKey, DEFAULT_CANON_BOUND};
use crate::diagram::Diagram;
use crate::Rational;

/// Finite linear combination of canonical diagrams.
///
/// Each stored representative is in canonical form and its `coefficient`
/// field holds the accumulated coefficient of the class.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagramSum {
    terms: BTreeMap<CanonicalKey, Diagram>,
}

/// Per-key comparison of two sums.
#[derive(Clone, Debug)]
pub struct SumDiff {
    pub key: CanonicalKey,
    pub representative: Diagram,
    pub left: Rational,
    pub right: Rational,
}

impl DiagramSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects labelled diagrams into canonical classes.
    pub fn collect<'a>(items: impl IntoIterator<Item = &'a Diagram>) -> Result<Self, CanonError> {
        let mut s = Self::new();
        for d in items {
            s.add(d)?;
        }
        Ok(s)
    }

    /// Adds one diagram (its own coefficient) to the sum.
    pub fn add(&mut self, d: &Diagram) -> Result<(), CanonError> {
        if d.coefficient.is_zero() {
            return Ok(());
        }
        let c = canonicalize(d, DEFAULT_CANON_BOUND)?;
        self.add_canonical(c.key, c.diagram);
        Ok(())
    }

    /// Adds a diagram that is already in canonical form under `key`.
    pub fn add_canonical(&mut self, key: CanonicalKey, d: Diagram) {
        match self.terms.get_mut(&key) {
            Some(existing) => {
                existing.coefficient += &d.coefficient;
                if existing.coefficient.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                if !d.coefficient.is_zero() {
                    self.terms.insert(key, d);
                }
            }
        }
    }

    /// `self + other`.
    pub fn merge(&mut self, other: &DiagramSum) {
        for (k, d) in &other.terms {
            self.add_canonical(k.clone(), d.clone());
        }
    }

    pub fn scaled(&self, factor: &Rational) -> DiagramSum {
        let mut out = DiagramSum::new();
        for (k, d) in &self.terms {
            let mut d = d.clone();
            d.coefficient *= factor;
            out.add_canonical(k.clone(), d);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalKey, &Diagram)> {
        self.terms.iter()
    }

    pub fn diagrams(&self) -> impl Iterator<Item = &Diagram> {
        self.terms.values()
    }

    pub fn coefficient(&self, key: &CanonicalKey) -> Rational {
        self.terms.get(key).map(|d| d.coefficient.clone()).unwrap_or_else(Rational::zero)
    }

    /// Keys whose coefficients differ between `self` and `other`.
    pub fn diff(&self, other: &DiagramSum) -> Vec<SumDiff> {
        let mut out = Vec::new();
        for (k, d) in &self.terms {
            let r = other.coefficient(k);
            if r != d.coefficient {
                out.push(SumDiff { key: k.clone(), representative: d.clone(), left: d.coefficient.clone(), right: r });
            }
        }
        for (k, d) in &other.terms {
            if !self.terms.contains_key(k) {
                out.push(SumDiff {
                    key: k.clone(),
                    representative: d.clone(),
                    left: Rational::zero(),
                    right: d.coefficient.clone(),
                });
            }
        }
        out
    }
}

/// Truncated power series in the χ-order whose entries are diagram sums.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagramSeries {
    pub entries: Vec<DiagramSum>,
}

impl DiagramSeries {
    pub fn with_order(order: u32) -> Self {
        DiagramSeries { entries: vec![DiagramSum::new(); order as usize + 1] }
    }

    pub fn order(&self) -> u32 {
        self.entries.len().saturating_sub(1) as u32
    }

    pub fn get(&self, m: u32) -> &DiagramSum {
        &self.entries[m as usize]
    }
}
