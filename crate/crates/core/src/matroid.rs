//! Ordinary matroids with exact rank, closure, flat-lattice, modularity,
//! minor, and connectivity operations.
//!
//! Ground sets are small (at most 16 elements); subsets are bit masks over
//! the user-supplied label order, which is also the universal tie-break
//! order everywhere a "choose a flat/basis" step occurs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::QMat;
use crate::rational::Rat;

pub const MAX_GROUND: usize = 16;

/// Default cap on flat enumeration; override with `TROPBUNDLE_FLAT_CAP`.
pub const DEFAULT_FLAT_CAP: usize = 100_000;

pub fn flat_cap() -> usize {
    std::env::var("TROPBUNDLE_FLAT_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_FLAT_CAP)
}

/// A subset of the ground set as a bit mask in label order.
pub type Mask = u32;

pub fn mask_card(m: Mask) -> usize {
    m.count_ones() as usize
}

pub fn mask_members(m: Mask) -> Vec<usize> {
    (0..32).filter(|&i| m >> i & 1 == 1).collect()
}

pub fn mask_from(indices: &[usize]) -> Mask {
    indices.iter().fold(0, |acc, &i| acc | 1 << i)
}

/// Enumerate all `k`-subsets of `{0..n}` in lexicographic order of their
/// sorted member tuples.
pub fn k_subsets(n: usize, k: usize) -> Vec<Mask> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Mask>) {
        if cur.len() == k {
            out.push(mask_from(cur));
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(n, k, 0, &mut cur, &mut out);
    out
}

/// Compare subsets by their sorted member tuples (the universal tie-break).
pub fn lex_key(m: Mask) -> Vec<usize> {
    mask_members(m)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error("bases must be nonempty")]
    EmptyBases,
    #[error("basis {0:?} has cardinality {1}, expected {2}")]
    CardinalityMismatch(Vec<String>, usize, usize),
    #[error("exchange fails for bases {b1:?}, {b2:?} at element {i:?}")]
    ExchangeViolation {
        b1: Vec<String>,
        b2: Vec<String>,
        i: String,
    },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("ground set larger than {MAX_GROUND} elements")]
    GroundTooLarge,
    #[error("empty input")]
    EmptyInput,
    #[error("delete and contract sets overlap")]
    OverlapError,
    #[error("{0:?} is not a flat")]
    NotAFlat(Vec<String>),
    #[error("flat enumeration exceeds cap {0}")]
    FlatCapExceeded(usize),
    #[error("no relative complement found (corrupted input)")]
    NoComplement,
    #[error("interval is not a chain G ≤ F ≤ H")]
    BadInterval,
}

/// The labelled ground set; label order is the tie-break order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ground {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Ground {
    pub fn new(labels: Vec<String>) -> Result<Self, MatroidError> {
        if labels.len() > MAX_GROUND {
            return Err(MatroidError::GroundTooLarge);
        }
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(MatroidError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Ground { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn position(&self, label: &str) -> Result<usize, MatroidError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| MatroidError::UnknownLabel(label.to_string()))
    }

    pub fn mask_of(&self, labels: &[String]) -> Result<Mask, MatroidError> {
        let mut m = 0;
        for l in labels {
            m |= 1 << self.position(l)?;
        }
        Ok(m)
    }

    pub fn labels_of(&self, m: Mask) -> Vec<String> {
        mask_members(m)
            .into_iter()
            .map(|i| self.labels[i].clone())
            .collect()
    }

    pub fn full_mask(&self) -> Mask {
        if self.labels.is_empty() {
            0
        } else {
            (1u32 << self.labels.len()) - 1
        }
    }
}

/// A matroid in canonical form: an explicit basis family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matroid {
    ground: Ground,
    rank: usize,
    bases: Vec<Mask>,
}

impl Matroid {
    /// Construct from an explicit basis family, verifying basis exchange.
    pub fn from_bases(ground: Ground, mut bases: Vec<Mask>) -> Result<Self, MatroidError> {
        if bases.is_empty() {
            return Err(MatroidError::EmptyBases);
        }
        bases.sort_by_key(|&m| lex_key(m));
        bases.dedup();
        let rank = mask_card(bases[0]);
        for &b in &bases {
            if mask_card(b) != rank {
                return Err(MatroidError::CardinalityMismatch(
                    ground.labels_of(b),
                    mask_card(b),
                    rank,
                ));
            }
        }
        let m = Matroid {
            ground,
            rank,
            bases,
        };
        m.verify_exchange()?;
        Ok(m)
    }

    pub fn from_label_bases(
        labels: Vec<String>,
        bases: Vec<Vec<String>>,
    ) -> Result<Self, MatroidError> {
        let ground = Ground::new(labels)?;
        let masks = bases
            .iter()
            .map(|b| ground.mask_of(b))
            .collect::<Result<Vec<_>, _>>()?;
        Matroid::from_bases(ground, masks)
    }

    /// The realizable matroid of a list of rational column vectors.
    pub fn from_columns(labels: Vec<String>, columns: &[Vec<Rat>]) -> Result<Self, MatroidError> {
        if columns.is_empty() {
            return Err(MatroidError::EmptyInput);
        }
        let ground = Ground::new(labels)?;
        assert_eq!(ground.len(), columns.len());
        let dim = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == dim), "ragged columns");
        let rank_of = |mask: Mask| -> usize {
            let rows: Vec<Vec<Rat>> = mask_members(mask)
                .into_iter()
                .map(|i| columns[i].clone())
                .collect();
            if rows.is_empty() {
                0
            } else {
                QMat::from_rows(rows).rank()
            }
        };
        let full = ground.full_mask();
        let r = rank_of(full);
        let bases = k_subsets(ground.len(), r)
            .into_iter()
            .filter(|&b| rank_of(b) == r)
            .collect();
        Matroid::from_bases(ground, bases)
    }

    pub fn uniform(labels: Vec<String>, rank: usize) -> Result<Self, MatroidError> {
        let ground = Ground::new(labels)?;
        let bases = k_subsets(ground.len(), rank);
        Matroid::from_bases(ground, bases)
    }

    fn verify_exchange(&self) -> Result<(), MatroidError> {
        for &b1 in &self.bases {
            for &b2 in &self.bases {
                let only1 = b1 & !b2;
                for i in mask_members(only1) {
                    let stripped = b1 & !(1 << i);
                    let ok = mask_members(b2 & !b1)
                        .into_iter()
                        .any(|j| self.bases.binary_search_by_key(&lex_key(stripped | 1 << j), |&m| lex_key(m)).is_ok());
                    if !ok {
                        return Err(MatroidError::ExchangeViolation {
                            b1: self.ground.labels_of(b1),
                            b2: self.ground.labels_of(b2),
                            i: self.ground.label(i).to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ground(&self) -> &Ground {
        &self.ground
    }

    pub fn size(&self) -> usize {
        self.ground.len()
    }

    pub fn rank_total(&self) -> usize {
        self.rank
    }

    pub fn bases(&self) -> &[Mask] {
        &self.bases
    }

    pub fn is_basis(&self, m: Mask) -> bool {
        self.bases.binary_search_by_key(&lex_key(m), |&b| lex_key(b)).is_ok()
    }

    /// rank(S) = size of the largest independent subset of S.
    pub fn rank(&self, s: Mask) -> usize {
        self.bases
            .iter()
            .map(|&b| mask_card(b & s))
            .max()
            .unwrap_or(0)
    }

    pub fn is_independent(&self, s: Mask) -> bool {
        self.rank(s) == mask_card(s)
    }

    /// Smallest flat containing S.
    pub fn closure(&self, s: Mask) -> Mask {
        let r = self.rank(s);
        let mut out = s;
        for e in 0..self.size() {
            if out >> e & 1 == 0 && self.rank(s | 1 << e) == r {
                out |= 1 << e;
            }
        }
        out
    }

    pub fn is_flat(&self, s: Mask) -> bool {
        self.closure(s) == s
    }

    /// All circuits (minimal dependent sets), sorted by (size, lex).
    pub fn circuits(&self) -> Vec<Mask> {
        let n = self.size();
        let mut out = Vec::new();
        for size in 1..=n {
            for s in k_subsets(n, size) {
                if self.rank(s) == size - 1
                    && mask_members(s)
                        .into_iter()
                        .all(|e| self.is_independent(s & !(1 << e)))
                {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Finest partition of the ground set into connected components: two
    /// elements are connected when some circuit contains both; loops and
    /// coloops are singletons.
    pub fn connected_components(&self) -> Vec<Mask> {
        let n = self.size();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for c in self.circuits() {
            let members = mask_members(c);
            for w in members.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: BTreeMap<usize, Mask> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            *groups.entry(r).or_insert(0) |= 1 << i;
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Restriction to `ground \ delete` followed by contraction of
    /// `contract`, with labels preserved.
    pub fn minor(&self, delete: Mask, contract: Mask) -> Result<Matroid, MatroidError> {
        if delete & contract != 0 {
            return Err(MatroidError::OverlapError);
        }
        let keep = self.ground.full_mask() & !(delete | contract);
        let keep_idx = mask_members(keep);
        let labels: Vec<String> = keep_idx
            .iter()
            .map(|&i| self.ground.label(i).to_string())
            .collect();
        let ground = Ground::new(labels)?;
        let rc = self.rank(contract);
        let new_rank = self.rank(keep | contract) - rc;
        let mut bases = Vec::new();
        for s in k_subsets(keep_idx.len(), new_rank) {
            let lifted: Mask = mask_members(s).into_iter().map(|i| 1 << keep_idx[i]).sum();
            if self.rank(lifted | contract) == new_rank + rc {
                bases.push(s);
            }
        }
        Matroid::from_bases(ground, bases)
    }

    /// Modular-pair test; with `g = None`, tests F against every flat and
    /// returns the first failing partner as witness.  The partner may be an
    /// arbitrary subset (rank and intersection are evaluated on the sets).
    pub fn is_modular(&self, f: Mask, g: Option<Mask>) -> Result<(bool, Option<Mask>), MatroidError> {
        if !self.is_flat(f) {
            return Err(MatroidError::NotAFlat(self.ground.labels_of(f)));
        }
        let check = |g: Mask| -> bool {
            self.rank(f | g) + self.rank(f & g) == self.rank(f) + self.rank(g)
        };
        match g {
            Some(g) => {
                let ok = check(g);
                Ok((ok, if ok { None } else { Some(g) }))
            }
            None => {
                for g in self.flats()? {
                    if !check(g) {
                        return Ok((false, Some(g)));
                    }
                }
                Ok((true, None))
            }
        }
    }

    /// All flats, sorted by (rank, lex).
    pub fn flats(&self) -> Result<Vec<Mask>, MatroidError> {
        let cap = flat_cap();
        let mut by_rank: Vec<Vec<Mask>> = vec![Vec::new(); self.rank + 1];
        let bottom = self.closure(0);
        by_rank[0].push(bottom);
        let mut count = 1usize;
        for r in 0..self.rank {
            let mut next: Vec<Mask> = Vec::new();
            for &f in &by_rank[r] {
                for e in 0..self.size() {
                    if f >> e & 1 == 0 {
                        let g = self.closure(f | 1 << e);
                        if self.rank(g) == r + 1 && !next.contains(&g) {
                            next.push(g);
                            count += 1;
                            if count > cap {
                                return Err(MatroidError::FlatCapExceeded(cap));
                            }
                        }
                    }
                }
            }
            next.sort_by_key(|&m| lex_key(m));
            by_rank[r + 1] = next;
        }
        Ok(by_rank.into_iter().flatten().collect())
    }

    pub fn flat_lattice(&self) -> Result<FlatLattice, MatroidError> {
        let flats = self.flats()?;
        Ok(FlatLattice::new(self, flats))
    }

    /// Deterministic relative complement: the lex-least flat W in `[g, h]`
    /// with `W ∨ F = H`, `W ∧ F = G` and `rk W = rk H − rk F + rk G`.
    pub fn relative_complement(&self, f: Mask, g: Mask, h: Mask) -> Result<Mask, MatroidError> {
        for x in [f, g, h] {
            if !self.is_flat(x) {
                return Err(MatroidError::NotAFlat(self.ground.labels_of(x)));
            }
        }
        if g & f != g || f & h != f {
            return Err(MatroidError::BadInterval);
        }
        if f == h {
            return Ok(g);
        }
        let want_rank = self.rank(h) - self.rank(f) + self.rank(g);
        let mut best: Option<Mask> = None;
        for w in self.flats()? {
            if w & g != g || w & h != w {
                continue;
            }
            if self.rank(w) != want_rank {
                continue;
            }
            if self.closure(w | f) == h
                && w & f == g
                && best.is_none_or(|b| lex_key(w) < lex_key(b))
            {
                best = Some(w);
            }
        }
        best.ok_or(MatroidError::NoComplement)
    }

    /// No loops (every singleton has rank 1) and no parallel elements.
    pub fn is_simple(&self) -> bool {
        let n = self.size();
        for e in 0..n {
            if self.rank(1 << e) != 1 {
                return false;
            }
        }
        for e in 0..n {
            for f in e + 1..n {
                if self.rank(1 << e | 1 << f) == 1 {
                    return false;
                }
            }
        }
        true
    }
}

/// The lattice of flats with rank, join, meet, and covering queries.
#[derive(Clone, Debug)]
pub struct FlatLattice {
    flats: Vec<Mask>,
    ranks: Vec<usize>,
    index: BTreeMap<Mask, usize>,
    covers: Vec<Vec<usize>>,
}

impl FlatLattice {
    fn new(m: &Matroid, flats: Vec<Mask>) -> Self {
        let ranks: Vec<usize> = flats.iter().map(|&f| m.rank(f)).collect();
        let index: BTreeMap<Mask, usize> = flats.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        // f is covered by g when f < g with no flat strictly between.
        let mut covers = vec![Vec::new(); flats.len()];
        for (i, &f) in flats.iter().enumerate() {
            for (j, &g) in flats.iter().enumerate() {
                if f != g && f & g == f {
                    let between = flats
                        .iter()
                        .any(|&h| h != f && h != g && f & h == f && h & g == h);
                    if !between {
                        covers[i].push(j);
                    }
                }
            }
        }
        FlatLattice {
            flats,
            ranks,
            index,
            covers,
        }
    }

    pub fn flats(&self) -> &[Mask] {
        &self.flats
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    pub fn rank_of(&self, f: Mask) -> Option<usize> {
        self.index.get(&f).map(|&i| self.ranks[i])
    }

    pub fn contains(&self, f: Mask) -> bool {
        self.index.contains_key(&f)
    }

    /// Upper covers of `f`.
    pub fn covers_of(&self, f: Mask) -> Vec<Mask> {
        match self.index.get(&f) {
            None => Vec::new(),
            Some(&i) => self.covers[i].iter().map(|&j| self.flats[j]).collect(),
        }
    }

    pub fn meet(&self, f: Mask, g: Mask) -> Mask {
        f & g
    }

    pub fn flats_of_rank(&self, r: usize) -> Vec<Mask> {
        self.flats
            .iter()
            .zip(&self.ranks)
            .filter(|&(_, &rk)| rk == r)
            .map(|(&f, _)| f)
            .collect()
    }
}
