use std::collections::BTreeMap;

use crate::SdeError;

/// One cardinality signature of the pairing census.
///
/// `internal[i]` is m_i, the number of pairings with both derivatives on
/// factor i; `cross` holds n_iℓ for i < ℓ in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusRow {
    pub internal: Vec<u32>,
    pub cross: Vec<((usize, usize), u32)>,
    /// Assignments of the n labelled pairings to types with this signature.
    pub direct_count: u64,
    /// `n! / (Π m_i! Π n_iℓ!)`.
    pub multinomial: u64,
    /// `n! / (Π m_i! · ñ!)` with `ñ = Σ n_iℓ`, as printed in the source text.
    pub printed_formula: u64,
    /// Distributions of the 2n single derivatives over the k factors that
    /// realise this signature.
    pub distribution_count: u64,
    /// `ñ` in the formulas above.
    pub cross_total: u32,
}

impl CensusRow {
    /// Direct enumeration agrees with the multinomial, and each cross
    /// pairing doubles the derivative distributions.
    pub fn consistent(&self) -> bool {
        self.direct_count == self.multinomial && self.distribution_count == self.multinomial << self.cross_total
    }

    pub fn printed_formula_matches(&self) -> bool {
        self.printed_formula == self.direct_count
    }
}

fn fact(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Enumerates how n pairings split over k factors and checks the counting
/// formulas against brute force.
pub fn contraction_pattern_census(n: u32, k: u32) -> Result<Vec<CensusRow>, SdeError> {
    if 2 * n > 8 || k > 4 {
        return Err(SdeError::BoundExceeded(format!("2n = {} and k = {k}; limits are 8 and 4", 2 * n)));
    }
    if k == 0 {
        return Err(SdeError::InvalidInput("at least one factor is needed".into()));
    }
    let k = k as usize;
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |l| (i, l))).collect();
    let n_types = k + pairs.len();
    let type_of = |a: usize, b: usize| if a == b { a } else { k + pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap() };

    let mut direct: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for code in 0..(n_types as u64).pow(n) {
        let mut sig = vec![0u32; n_types];
        let mut c = code;
        for _ in 0..n {
            sig[(c % n_types as u64) as usize] += 1;
            c /= n_types as u64;
        }
        *direct.entry(sig).or_default() += 1;
    }
    let mut dist: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for code in 0..(k as u64).pow(2 * n) {
        let mut sig = vec![0u32; n_types];
        let mut c = code;
        for _ in 0..n {
            let a = (c % k as u64) as usize;
            c /= k as u64;
            let b = (c % k as u64) as usize;
            c /= k as u64;
            sig[type_of(a, b)] += 1;
        }
        *dist.entry(sig).or_default() += 1;
    }

    Ok(direct
        .into_iter()
        .map(|(sig, count)| {
            let cross_total: u32 = sig[k..].iter().sum();
            let m_fact: u64 = sig[..k].iter().map(|&m| fact(m)).product();
            let n_fact: u64 = sig[k..].iter().map(|&m| fact(m)).product();
            CensusRow {
                internal: sig[..k].to_vec(),
                cross: pairs.iter().copied().zip(sig[k..].iter().copied()).collect(),
                direct_count: count,
                multinomial: fact(n) / (m_fact * n_fact),
                printed_formula: fact(n) / (m_fact * fact(cross_total)),
                distribution_count: dist.get(&sig).copied().unwrap_or(0),
                cross_total,
            }
        })
        .collect())
}
