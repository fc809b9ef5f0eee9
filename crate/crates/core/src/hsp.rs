//! Finite groups given by Cayley tables, their subgroups, and coset states.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{DensityMatrix, Ensemble};

/// Largest group order accepted by [`enumerate_subgroups`].
pub const MAX_ENUMERATION_ORDER: usize = 64;

/// A finite group; `table[a][b]` is the index of a∘b and 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    table: Vec<Vec<usize>>,
}

impl Group {
    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a + 1..n).all(|b| self.op(a, b) == self.op(b, a)))
    }

    /// Subgroup generated by `gens`, as sorted element indices.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut mask = vec![false; self.order()];
        mask[0] = true;
        for &g in gens {
            mask[g] = true;
        }
        self.close(&mut mask);
        (0..self.order()).filter(|&i| mask[i]).collect()
    }

    fn close(&self, mask: &mut [bool]) {
        // finite, so closure under the product already contains inverses
        let mut members: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let mut start = 0;
        while start < members.len() {
            let end = members.len();
            for i in 0..end {
                for j in 0..end {
                    if i < start && j < start {
                        continue;
                    }
                    for p in [self.op(members[i], members[j]), self.op(members[j], members[i])] {
                        if !mask[p] {
                            mask[p] = true;
                            members.push(p);
                        }
                    }
                }
            }
            start = end;
        }
    }
}

/// Validates a Cayley table. A valid table whose identity is not index 0 is
/// relabeled by swapping the identity with element 0.
pub fn group_from_cayley(table: Vec<Vec<usize>>) -> Result<Group> {
    let n = table.len();
    if n == 0 {
        return Err(Error::NotLatinSquare("table is empty".into()));
    }
    for (a, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotLatinSquare(format!("row {a} has {} entries, expected {n}", row.len())));
        }
        if let Some(&x) = row.iter().find(|&&x| x >= n) {
            return Err(Error::NotLatinSquare(format!("row {a} contains {x}, out of range 0..{n}")));
        }
    }
    for a in 0..n {
        let mut seen = vec![false; n];
        for b in 0..n {
            let x = table[a][b];
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotLatinSquare(format!("row {a} repeats {x}")));
            }
        }
        let mut seen = vec![false; n];
        for b in 0..n {
            let x = table[b][a];
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotLatinSquare(format!("column {a} repeats {x}")));
            }
        }
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
        .ok_or(Error::NoIdentity)?;
    let table = if e == 0 { table } else { swap_labels(&table, 0, e) };
    for a in 0..n {
        for b in 0..n {
            let ab = table[a][b];
            for c in 0..n {
                if table[ab][c] != table[a][table[b][c]] {
                    return Err(Error::NotAssociative { a, b, c });
                }
            }
        }
    }
    Ok(Group { table })
}

fn swap_labels(table: &[Vec<usize>], x: usize, y: usize) -> Vec<Vec<usize>> {
    let relabel = |i: usize| if i == x { y } else if i == y { x } else { i };
    let n = table.len();
    let mut out = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            out[relabel(a)][relabel(b)] = relabel(table[a][b]);
        }
    }
    out
}

/// Z_n under addition mod n.
pub fn cyclic_group(n: usize) -> Result<Group> {
    if n == 0 {
        return Err(Error::InvalidArgument("cyclic group order must be at least 1".into()));
    }
    Ok(Group { table: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect() })
}

/// Dihedral group of order 2m: index k < m is the rotation r^k, index m + k
/// is the reflection s r^k.
pub fn dihedral_group(m: usize) -> Result<Group> {
    if m == 0 {
        return Err(Error::InvalidArgument("dihedral parameter must be at least 1".into()));
    }
    let op = |x: usize, y: usize| -> usize {
        let (sx, a) = (x >= m, x % m);
        let (sy, b) = (y >= m, y % m);
        match (sx, sy) {
            (false, false) => (a + b) % m,
            (false, true) => m + (b + m - a) % m,
            (true, false) => m + (a + b) % m,
            (true, true) => (b + m - a) % m,
        }
    };
    let n = 2 * m;
    Ok(Group { table: (0..n).map(|x| (0..n).map(|y| op(x, y)).collect()).collect() })
}

/// A subgroup given by its strictly ascending element indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Subgroup {
    elements: Vec<usize>,
}

impl Subgroup {
    pub fn new(g: &Group, elements: Vec<usize>) -> Result<Self> {
        let n = g.order();
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::SubgroupMismatch("elements must be strictly ascending".into()));
        }
        if let Some(&x) = elements.iter().find(|&&x| x >= n) {
            return Err(Error::SubgroupMismatch(format!("element {x} is outside 0..{n}")));
        }
        if elements.first() != Some(&0) {
            return Err(Error::SubgroupMismatch("identity 0 is missing".into()));
        }
        let mut member = vec![false; n];
        for &x in &elements {
            member[x] = true;
        }
        for &a in &elements {
            for &b in &elements {
                if !member[g.op(a, b)] {
                    return Err(Error::SubgroupMismatch(format!("not closed: {a}*{b} = {}", g.op(a, b))));
                }
            }
        }
        if n % elements.len() != 0 {
            return Err(Error::SubgroupMismatch(format!(
                "order {} does not divide group order {n}",
                elements.len()
            )));
        }
        Ok(Self { elements })
    }

    pub fn trivial() -> Self {
        Self { elements: vec![0] }
    }

    pub fn whole(g: &Group) -> Self {
        Self { elements: (0..g.order()).collect() }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// All subgroups sorted by (order, elements). Starting from the trivial
/// subgroup, adjoins one generator at a time until nothing new appears.
pub fn enumerate_subgroups(g: &Group) -> Result<Vec<Subgroup>> {
    let n = g.order();
    if n > MAX_ENUMERATION_ORDER {
        return Err(Error::GroupTooLarge { order: n, cap: MAX_ENUMERATION_ORDER });
    }
    let to_mask = |els: &[usize]| els.iter().fold(0u64, |m, &x| m | (1u64 << x));
    let mut found: BTreeSet<u64> = BTreeSet::from([1u64]);
    let mut frontier = vec![vec![0usize]];
    while let Some(h) = frontier.pop() {
        let hm = to_mask(&h);
        for x in 0..n {
            if hm & (1 << x) != 0 {
                continue;
            }
            let mut gens = h.clone();
            gens.push(x);
            let k = g.generated(&gens);
            if found.insert(to_mask(&k)) {
                frontier.push(k);
            }
        }
    }
    let mut subs: Vec<Subgroup> = found
        .into_iter()
        .map(|m| Subgroup { elements: (0..n).filter(|&i| m & (1 << i) != 0).collect() })
        .collect();
    subs.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
    Ok(subs)
}

fn check_membership(g: &Group, h: &Subgroup) -> Result<()> {
    if h.elements.last().is_some_and(|&x| x >= g.order()) {
        return Err(Error::SubgroupMismatch(format!("subgroup has elements outside the group of order {}", g.order())));
    }
    Subgroup::new(g, h.elements.clone()).map(|_| ())
}

/// ρ_H = (1/|G|) Σ_a |aH⟩⟨aH| with |aH⟩ = |H|^{-1/2} Σ_{h∈H} |a∘h⟩.
pub fn coset_state(g: &Group, h: &Subgroup) -> Result<DensityMatrix> {
    check_membership(g, h)?;
    let n = g.order();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let w = Complex64::new(1.0 / (n as f64 * h.order() as f64), 0.0);
    for a in 0..n {
        let coset: Vec<usize> = h.elements.iter().map(|&x| g.op(a, x)).collect();
        for &x in &coset {
            for &y in &coset {
                m[(x, y)] += w;
            }
        }
    }
    DensityMatrix::new(ComplexMatrix::from_raw(m))
}

/// Coset states of the listed subgroups under uniform priors.
pub fn hsp_ensemble(g: &Group, subgroups: &[Subgroup]) -> Result<Ensemble> {
    if subgroups.is_empty() {
        return Err(Error::EmptyList);
    }
    let states = subgroups.iter().map(|h| coset_state(g, h)).collect::<Result<Vec<_>>>()?;
    Ensemble::uniform(states)
}
