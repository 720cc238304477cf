//! Ranked lattices, the minimal matroid embedding a lattice into a
//! geometric lattice, and the subspace lattices attached to filtration data
//! over the rationals.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::Subspace;
use crate::matroid::{k_subsets, mask_card, mask_members, Ground, Mask, Matroid, MatroidError};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("unknown lattice element {0:?}")]
    UnknownElement(String),
    #[error("duplicate lattice element {0:?}")]
    DuplicateElement(String),
    #[error("relation is not a partial order: {0}")]
    NotAPartialOrder(String),
    #[error("lattice axioms fail: {0}")]
    AxiomFailure(String),
    #[error("subspace generators have mismatched dimensions")]
    DimensionMismatch,
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// A finite lattice with a candidate rank function.
#[derive(Clone, Debug)]
pub struct RankedLattice {
    pub elements: Vec<String>,
    /// Full relation: `leq[a][b]` iff element a ≤ element b.
    pub leq: Vec<Vec<bool>>,
    pub rank: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct LatticeReport {
    pub is_lattice: bool,
    pub violations: Vec<String>,
}

impl LatticeReport {
    pub fn pass(&self) -> bool {
        self.is_lattice && self.violations.is_empty()
    }
}

impl RankedLattice {
    /// Build from comparability pairs; the reflexive-transitive closure is
    /// taken and antisymmetry is checked.
    pub fn new(
        elements: Vec<String>,
        pairs: &[(String, String)],
        rank: BTreeMap<String, usize>,
    ) -> Result<Self, LatticeError> {
        let n = elements.len();
        let mut index = BTreeMap::new();
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(LatticeError::DuplicateElement(e.clone()));
            }
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in pairs {
            let ia = *index
                .get(a)
                .ok_or_else(|| LatticeError::UnknownElement(a.clone()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| LatticeError::UnknownElement(b.clone()))?;
            leq[ia][ib] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(LatticeError::NotAPartialOrder(format!(
                        "{} and {} are mutually comparable",
                        elements[i], elements[j]
                    )));
                }
            }
        }
        let mut ranks = vec![0usize; n];
        for (e, r) in rank {
            let i = *index
                .get(&e)
                .ok_or_else(|| LatticeError::UnknownElement(e.clone()))?;
            ranks[i] = r;
        }
        Ok(RankedLattice {
            elements,
            leq,
            rank: ranks,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Least upper bound if it exists.
    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let uppers: Vec<usize> = (0..n)
            .filter(|&x| self.leq[a][x] && self.leq[b][x])
            .collect();
        uppers
            .iter()
            .copied()
            .find(|&x| uppers.iter().all(|&y| self.leq[x][y]))
    }

    /// Greatest lower bound if it exists.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        let lowers: Vec<usize> = (0..n)
            .filter(|&x| self.leq[x][a] && self.leq[x][b])
            .collect();
        lowers
            .iter()
            .copied()
            .find(|&x| lowers.iter().all(|&y| self.leq[y][x]))
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&x| (0..self.len()).all(|y| self.leq[x][y]))
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&x| (0..self.len()).all(|y| self.leq[y][x]))
    }

    /// Elements covered by `x`.
    pub fn lower_covers(&self, x: usize) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&y| {
                y != x
                    && self.leq[y][x]
                    && !(0..n).any(|z| z != x && z != y && self.leq[y][z] && self.leq[z][x])
            })
            .collect()
    }

    /// Check the lattice structure and the three rank axioms.
    pub fn validate(&self) -> LatticeReport {
        let mut violations = Vec::new();
        let n = self.len();
        let mut is_lattice = true;
        if self.bottom().is_none() || self.top().is_none() {
            is_lattice = false;
            violations.push("missing bottom or top element".to_string());
        }
        for a in 0..n {
            for b in a + 1..n {
                if self.join(a, b).is_none() {
                    is_lattice = false;
                    violations.push(format!(
                        "no join for {} and {}",
                        self.elements[a], self.elements[b]
                    ));
                }
                if self.meet(a, b).is_none() {
                    is_lattice = false;
                    violations.push(format!(
                        "no meet for {} and {}",
                        self.elements[a], self.elements[b]
                    ));
                }
            }
        }
        if let Some(bot) = self.bottom() {
            if self.rank[bot] != 0 {
                violations.push(format!(
                    "normalization: rank of bottom {} is {}",
                    self.elements[bot], self.rank[bot]
                ));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq[a][b] && self.rank[a] >= self.rank[b] {
                    violations.push(format!(
                        "increasing fails: {} < {} but ranks {} ≥ {}",
                        self.elements[a], self.elements[b], self.rank[a], self.rank[b]
                    ));
                }
            }
        }
        if is_lattice {
            for a in 0..n {
                for b in 0..n {
                    let (j, m) = (self.join(a, b).unwrap(), self.meet(a, b).unwrap());
                    if self.rank[m] + self.rank[j] > self.rank[a] + self.rank[b] {
                        violations.push(format!(
                            "semimodularity fails at {} and {}",
                            self.elements[a], self.elements[b]
                        ));
                    }
                }
            }
        }
        LatticeReport {
            is_lattice,
            violations,
        }
    }
}

/// An embedding of a ranked lattice into the lattice of flats of a matroid.
#[derive(Clone, Debug)]
pub struct LatticeEmbedding {
    pub source: RankedLattice,
    pub target: Matroid,
    /// Flat of the target assigned to each source element.
    pub phi: Vec<Mask>,
}

/// The minimal matroid whose lattice of flats contains the given lattice:
/// fresh ground elements per join-irreducible, one for each unit of rank
/// above the join of the smaller join-irreducibles, with rank function
/// `rk(S) = min_x (r(x) + |S \ φ(x)|)`.
pub fn dilworth_minimal_matroid(l: &RankedLattice) -> Result<LatticeEmbedding, LatticeError> {
    let report = l.validate();
    if !report.pass() {
        return Err(LatticeError::AxiomFailure(report.violations.join("; ")));
    }
    let n = l.len();
    // Join-irreducibles: exactly one lower cover.
    let jis: Vec<usize> = (0..n).filter(|&x| l.lower_covers(x).len() == 1).collect();
    let mut ground_labels: Vec<String> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for &j in &jis {
        let below: Vec<usize> = jis
            .iter()
            .copied()
            .filter(|&k| k != j && l.leq[k][j])
            .collect();
        let mut s = l.bottom().unwrap();
        for k in below {
            s = l.join(s, k).unwrap();
        }
        let mult = l.rank[j] - l.rank[s];
        for t in 1..=mult {
            ground_labels.push(format!("{}#{}", l.elements[j], t));
            owner.push(j);
        }
    }
    let m = ground_labels.len();
    if m > crate::matroid::MAX_GROUND {
        return Err(LatticeError::Matroid(MatroidError::GroundTooLarge));
    }
    let phi: Vec<Mask> = (0..n)
        .map(|x| {
            (0..m)
                .filter(|&g| l.leq[owner[g]][x])
                .fold(0, |acc, g| acc | 1 << g)
        })
        .collect();
    let top_rank = l.rank[l.top().unwrap()];
    let sims_rank = |s: Mask| -> usize {
        (0..n)
            .map(|x| l.rank[x] + mask_card(s & !phi[x]))
            .min()
            .unwrap()
    };
    let bases: Vec<Mask> = k_subsets(m, top_rank)
        .into_iter()
        .filter(|&b| sims_rank(b) == top_rank)
        .collect();
    let ground = Ground::new(ground_labels).map_err(LatticeError::Matroid)?;
    let matroid = Matroid::from_bases(ground, bases).map_err(LatticeError::Matroid)?;
    // The matroid rank derived from the basis family must agree with the
    // rank formula everywhere; this is the brute-force axiom check.
    let full: Mask = if m == 0 { 0 } else { (1u32 << m) - 1 };
    for s in 0..=full {
        if matroid.rank(s) != sims_rank(s) {
            return Err(LatticeError::AxiomFailure(format!(
                "rank formula disagrees with basis family on {:?}",
                matroid.ground().labels_of(s)
            )));
        }
    }
    let embedding = LatticeEmbedding {
        source: l.clone(),
        target: matroid,
        phi,
    };
    verify_embedding(&embedding)?;
    Ok(embedding)
}

fn verify_embedding(e: &LatticeEmbedding) -> Result<(), LatticeError> {
    let l = &e.source;
    let m = &e.target;
    let n = l.len();
    for x in 0..n {
        if m.rank(e.phi[x]) != l.rank[x] {
            return Err(LatticeError::AxiomFailure(format!(
                "rank of φ({}) differs from r",
                l.elements[x]
            )));
        }
        if !m.is_flat(e.phi[x]) {
            return Err(LatticeError::AxiomFailure(format!(
                "φ({}) is not a flat",
                l.elements[x]
            )));
        }
        for y in 0..n {
            if x != y && e.phi[x] == e.phi[y] {
                return Err(LatticeError::AxiomFailure("φ not injective".to_string()));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            let j = l.join(x, y).unwrap();
            let mt = l.meet(x, y).unwrap();
            if m.closure(e.phi[x] | e.phi[y]) != e.phi[j] {
                return Err(LatticeError::AxiomFailure(format!(
                    "φ does not preserve join of {} and {}",
                    l.elements[x], l.elements[y]
                )));
            }
            if e.phi[x] & e.phi[y] != e.phi[mt] {
                return Err(LatticeError::AxiomFailure(format!(
                    "φ does not preserve meet of {} and {}",
                    l.elements[x], l.elements[y]
                )));
            }
        }
    }
    Ok(())
}

/// Canonical display name for a subspace (its reduced row-echelon basis).
fn subspace_label(s: &Subspace) -> String {
    if s.dim() == 0 {
        return "0".to_string();
    }
    let rows: Vec<String> = s
        .basis
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(crate::rational::fmt_rat).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("span({})", rows.join(","))
}

/// The intersection lattice L′ and its join closure L for per-ray
/// filtration subspaces over ℚ, both ranked by dimension.
pub fn bundle_lattices(
    ambient: usize,
    filtration_subspaces: &[Vec<Vec<Vec<Rat>>>],
) -> Result<(RankedLattice, RankedLattice), LatticeError> {
    let mut around: Vec<Subspace> = vec![Subspace::full(ambient)];
    for ray in filtration_subspaces {
        for gens in ray {
            for g in gens {
                if g.len() != ambient {
                    return Err(LatticeError::DimensionMismatch);
                }
            }
            let s = Subspace::span(ambient, gens);
            if !around.contains(&s) {
                around.push(s);
            }
        }
    }
    // L′: closure under pairwise intersection.
    let mut lprime = around.clone();
    loop {
        let mut new = Vec::new();
        for a in &lprime {
            for b in &lprime {
                let c = a.intersect(b);
                if !lprime.contains(&c) && !new.contains(&c) {
                    new.push(c);
                }
            }
        }
        if new.is_empty() {
            break;
        }
        lprime.extend(new);
    }
    // L: closure of L′ under pairwise span, including the empty span.
    let mut l = lprime.clone();
    let zero = Subspace::span(ambient, &[]);
    if !l.contains(&zero) {
        l.push(zero);
    }
    loop {
        let mut new = Vec::new();
        for a in &l {
            for b in &l {
                let c = a.sum(b);
                if !l.contains(&c) && !new.contains(&c) {
                    new.push(c);
                }
            }
        }
        if new.is_empty() {
            break;
        }
        l.extend(new);
    }
    Ok((ranked_from_subspaces(lprime), ranked_from_subspaces(l)))
}

fn ranked_from_subspaces(mut spaces: Vec<Subspace>) -> RankedLattice {
    spaces.sort_by_key(|s| (s.dim(), subspace_label(s)));
    spaces.dedup();
    let elements: Vec<String> = spaces.iter().map(subspace_label).collect();
    let n = spaces.len();
    let mut leq = vec![vec![false; n]; n];
    for i in 0..n {
        for (j, t) in spaces.iter().enumerate() {
            leq[i][j] = t.contains(&spaces[i]);
        }
    }
    let rank = spaces.iter().map(|s| s.dim()).collect();
    RankedLattice {
        elements,
        leq,
        rank,
    }
}

/// Rank function of the polymatroid of a list of subspaces:
/// `rk(A) = dim Σ_{V∈A} V`.
pub fn polymatroid_rank(subspaces: &[Subspace], a: &[usize]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let ambient = subspaces[0].ambient;
    let mut acc = Subspace::span(ambient, &[]);
    for &i in a {
        acc = acc.sum(&subspaces[i]);
    }
    acc.dim()
}

/// Check the three polymatroid axioms over all subset pairs.
pub fn polymatroid_axioms_hold(subspaces: &[Subspace]) -> bool {
    let n = subspaces.len();
    let subsets: Vec<Vec<usize>> = (0..(1u32 << n)).map(|m| mask_members(m as Mask)).collect();
    let rk: Vec<usize> = subsets
        .iter()
        .map(|s| polymatroid_rank(subspaces, s))
        .collect();
    for (i, a) in subsets.iter().enumerate() {
        for (j, b) in subsets.iter().enumerate() {
            let union: Vec<usize> = {
                let mut u = a.clone();
                u.extend(b.iter().copied());
                u.sort_unstable();
                u.dedup();
                u
            };
            let inter: Vec<usize> = a.iter().copied().filter(|x| b.contains(x)).collect();
            let ru = polymatroid_rank(subspaces, &union);
            let ri = polymatroid_rank(subspaces, &inter);
            if ru + ri > rk[i] + rk[j] {
                return false;
            }
            if a.iter().all(|x| b.contains(x)) && rk[i] > rk[j] {
                return false;
            }
        }
    }
    rk[0] == 0
}
