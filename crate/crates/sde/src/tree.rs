use std::collections::BTreeMap;

use num_traits::{One, Zero};
use sdemsr_diagram::{factorial, Rational};
use sdemsr_model::{ExpansionBounds, ModelSpec};

use crate::SdeError;

/// Rooted tree of the perturbative solution. A node with `xi = false`
/// carries `χα_j`, one with `xi = true` carries `χβ_j√σ ξ`, where `j` is the
/// number of children. Children are kept sorted, so derived equality is
/// tree isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XiTree {
    pub xi: bool,
    pub children: Vec<XiTree>,
}

impl XiTree {
    pub fn new(xi: bool, mut children: Vec<XiTree>) -> Self {
        children.sort();
        XiTree { xi, children }
    }

    pub fn size(&self) -> u32 {
        1 + self.children.iter().map(XiTree::size).sum::<u32>()
    }

    pub fn xi_count(&self) -> u32 {
        self.xi as u32 + self.children.iter().map(XiTree::xi_count).sum::<u32>()
    }
}

/// `entries[n]` maps each order-n tree to its coefficient; `entries[0]` is
/// empty and stands for the constant x₀.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSeries {
    pub entries: Vec<BTreeMap<XiTree, Rational>>,
}

/// Expands the solution to order `order` by the recursion
///
/// ```text
/// x⁽ⁿ⁾ = G∗χ Σ_{j: Σℓ·j_ℓ = n−1} (α_k + β_k√σ ξ) Π_ℓ (x⁽ℓ⁾)^{j_ℓ} / j_ℓ!,   k = Σ j_ℓ,
/// ```
///
/// keeping only `k` up to the polynomial degree of α (resp. β).
pub fn perturb_solution(model: &ModelSpec, order: u32) -> Result<SolutionSeries, SdeError> {
    let bound = ExpansionBounds::default().for_model(model);
    if order > bound {
        return Err(SdeError::OrderTooLarge { order, bound });
    }
    let da = model.alpha.degree();
    let db = model.beta.degree();
    let mut entries: Vec<BTreeMap<XiTree, Rational>> = vec![BTreeMap::new()];
    for n in 1..=order as usize {
        let mut level: BTreeMap<XiTree, Rational> = BTreeMap::new();
        for j in partitions(n - 1) {
            let k: u32 = j.iter().sum();
            let mut weight = Rational::one();
            for &jl in &j {
                weight /= factorial(jl);
            }
            for (kids, c) in child_products(&entries, &j) {
                for (xi, deg) in [(false, da), (true, db)] {
                    if deg.is_some_and(|d| k <= d) {
                        *level.entry(XiTree::new(xi, kids.clone())).or_insert_with(Rational::zero) += &c * &weight;
                    }
                }
            }
        }
        level.retain(|_, c| !c.is_zero());
        entries.push(level);
    }
    Ok(SolutionSeries { entries })
}

/// Multiplicity vectors `j` (index ℓ−1 holds j_ℓ) with `Σ ℓ·j_ℓ = m`.
fn partitions(m: usize) -> Vec<Vec<u32>> {
    fn go(l: usize, rem: usize, m: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if l > m {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for j in 0..=rem / l {
            cur.push(j as u32);
            go(l + 1, rem - j * l, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, m, m, &mut Vec::new(), &mut out);
    out
}

/// All ordered products `Π_ℓ (x⁽ℓ⁾)^{j_ℓ}`, collected by child multiset.
fn child_products(entries: &[BTreeMap<XiTree, Rational>], j: &[u32]) -> BTreeMap<Vec<XiTree>, Rational> {
    let mut acc: BTreeMap<Vec<XiTree>, Rational> = BTreeMap::new();
    acc.insert(Vec::new(), Rational::one());
    for (i, &jl) in j.iter().enumerate() {
        for _ in 0..jl {
            let mut next = BTreeMap::new();
            for (kids, c) in &acc {
                for (t, ct) in &entries[i + 1] {
                    let mut k = kids.clone();
                    k.push(t.clone());
                    k.sort();
                    *next.entry(k).or_insert_with(Rational::zero) += c * ct;
                }
            }
            acc = next;
        }
    }
    acc
}

/// Every tree obtained by deleting one leaf: the inverse of one blooming
/// step.
pub fn unbloom(t: &XiTree) -> Vec<XiTree> {
    let mut out = Vec::new();
    for (i, c) in t.children.iter().enumerate() {
        if c.children.is_empty() {
            let mut kids = t.children.clone();
            kids.remove(i);
            out.push(XiTree::new(t.xi, kids));
        } else {
            for smaller in unbloom(c) {
                let mut kids = t.children.clone();
                kids[i] = smaller;
                out.push(XiTree::new(t.xi, kids));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
