//! Valuated matroids: basis valuations into the min-plus semiring, circuit
//! generation, axiom verification, minors, direct sums, and projective
//! equivalence.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::QMat;
use crate::matroid::{
    k_subsets, lex_key, mask_card, mask_members, Ground, Mask, Matroid, MatroidError,
};
use crate::rational::Rat;
use crate::tropical::{ExtRat, TropicalVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VmError {
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error("no subset has finite valuation")]
    NoValuedBasis,
    #[error("valuation set {0:?} has wrong cardinality")]
    BadValuationSet(Vec<String>),
    #[error("{0:?} is not a basis of the underlying matroid")]
    NotABasis(Vec<String>),
    #[error("element {0:?} already belongs to the basis")]
    ElementInBasis(String),
    #[error("columns have mismatched dimensions")]
    DimensionMismatch,
    #[error("delete and contract sets overlap")]
    OverlapError,
    #[error("tropical exchange fails for {b1:?}, {b2:?} at {i:?}")]
    ExchangeViolation {
        b1: Vec<String>,
        b2: Vec<String>,
        i: String,
    },
}

/// A monomial `c · t^e` with rational coefficient; matrix entries for
/// realizable valuated matroids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rat,
    pub exp: i64,
}

impl Monomial {
    pub fn constant(c: Rat) -> Self {
        Monomial { coeff: c, exp: 0 }
    }
}

/// Sparse univariate polynomial over the rationals, used only for exact
/// determinants of monomial matrices.
#[derive(Clone, Debug, Default)]
struct Poly {
    terms: BTreeMap<i64, Rat>,
}

impl Poly {
    fn add_term(&mut self, exp: i64, coeff: Rat) {
        let entry = self.terms.entry(exp).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// Lowest exponent with nonzero coefficient; None for the zero
    /// polynomial.
    fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }
}

/// Determinant of a square monomial matrix by signed permutation expansion.
fn monomial_det(rows: &[Vec<Monomial>]) -> Poly {
    let n = rows.len();
    let mut out = Poly::default();
    if n == 0 {
        out.add_term(0, Rat::from_integer(1.into()));
        return out;
    }
    let mut cols: Vec<usize> = (0..n).collect();
    fn go(
        rows: &[Vec<Monomial>],
        row: usize,
        sign: bool,
        coeff: Rat,
        exp: i64,
        cols: &mut Vec<usize>,
        out: &mut Poly,
    ) {
        if cols.is_empty() {
            out.add_term(exp, if sign { -coeff } else { coeff });
            return;
        }
        for k in 0..cols.len() {
            let c = cols.remove(k);
            let m = &rows[row][c];
            if !m.coeff.is_zero() {
                go(
                    rows,
                    row + 1,
                    sign ^ (k % 2 == 1),
                    coeff.clone() * m.coeff.clone(),
                    exp + m.exp,
                    cols,
                    out,
                );
            }
            cols.insert(k, c);
        }
    }
    go(
        rows,
        0,
        false,
        Rat::from_integer(1.into()),
        0,
        &mut cols,
        &mut out,
    );
    out
}

/// A valuated matroid: a basis valuation from r-subsets of the ground set
/// into the tropical semiring.  Only finite values are stored; the
/// underlying matroid has the finitely valued subsets as bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuatedMatroid {
    ground: Ground,
    rank: usize,
    nu: BTreeMap<Mask, Rat>,
}

impl ValuatedMatroid {
    /// Construct from explicit finite values, verifying tropical exchange.
    pub fn new(ground: Ground, rank: usize, nu: BTreeMap<Mask, Rat>) -> Result<Self, VmError> {
        if nu.is_empty() {
            return Err(VmError::NoValuedBasis);
        }
        for &b in nu.keys() {
            if mask_card(b) != rank {
                return Err(VmError::BadValuationSet(ground.labels_of(b)));
            }
        }
        let vm = ValuatedMatroid { ground, rank, nu };
        vm.verify_exchange()?;
        vm.underlying()?;
        Ok(vm)
    }

    /// The trivial valuated structure on a matroid: ν ≡ 0 on bases.
    pub fn trivial(m: &Matroid) -> Self {
        let nu = m.bases().iter().map(|&b| (b, Rat::zero())).collect();
        ValuatedMatroid {
            ground: m.ground().clone(),
            rank: m.rank_total(),
            nu,
        }
    }

    /// Realizable valuated matroid from columns with monomial entries:
    /// `ν(B) = val(det(A_B))`.
    pub fn from_columns(labels: Vec<String>, columns: &[Vec<Monomial>]) -> Result<Self, VmError> {
        if columns.is_empty() {
            return Err(VmError::DimensionMismatch);
        }
        let dim = columns[0].len();
        if !columns.iter().all(|c| c.len() == dim) {
            return Err(VmError::DimensionMismatch);
        }
        let ground = Ground::new(labels).map_err(VmError::Matroid)?;
        let m = ground.len();
        // The matroid rank is the largest r with some nonvanishing r×r
        // minor; ν is read off the minors of that size.
        for r in (1..=dim.min(m)).rev() {
            let mut nu: BTreeMap<Mask, Rat> = BTreeMap::new();
            for b in k_subsets(m, r) {
                let mut best: Option<i64> = None;
                for rowset in k_subsets(dim, r) {
                    let sub: Vec<Vec<Monomial>> = mask_members(rowset)
                        .into_iter()
                        .map(|coord| {
                            mask_members(b)
                                .into_iter()
                                .map(|ci| columns[ci][coord].clone())
                                .collect()
                        })
                        .collect();
                    if let Some(v) = monomial_det(&sub).valuation() {
                        best = Some(best.map_or(v, |acc: i64| acc.min(v)));
                    }
                }
                if r == dim {
                    // Square case: ν is the valuation of the single minor.
                    if let Some(v) = best {
                        nu.insert(b, Rat::from_integer(v.into()));
                    }
                } else if best.is_some() {
                    // Sub-square case arises only when the configuration has
                    // rank < dim; the valuation of a basis is then the
                    // valuation of det over any full-rank row choice, which
                    // is well defined up to a global shift.  Use the minimum.
                    nu.insert(b, Rat::from_integer(best.unwrap().into()));
                }
            }
            if !nu.is_empty() {
                return ValuatedMatroid::new(ground, r, nu);
            }
        }
        Err(VmError::NoValuedBasis)
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

    pub fn nu(&self, b: Mask) -> ExtRat {
        match self.nu.get(&b) {
            Some(v) => ExtRat::Fin(v.clone()),
            None => ExtRat::Inf,
        }
    }

    pub fn finite_values(&self) -> &BTreeMap<Mask, Rat> {
        &self.nu
    }

    /// The underlying matroid: bases are the finitely valued subsets.
    pub fn underlying(&self) -> Result<Matroid, VmError> {
        Matroid::from_bases(self.ground.clone(), self.nu.keys().copied().collect())
            .map_err(VmError::Matroid)
    }

    fn verify_exchange(&self) -> Result<(), VmError> {
        let keys: Vec<Mask> = self.nu.keys().copied().collect();
        for &b1 in &keys {
            for &b2 in &keys {
                let lhs = self.nu[&b1].clone() + self.nu[&b2].clone();
                for i in mask_members(b1 & !b2) {
                    let mut ok = false;
                    for j in mask_members(b2 & !b1) {
                        let c1 = b1 & !(1 << i) | 1 << j;
                        let c2 = b2 & !(1 << j) | 1 << i;
                        if let (Some(v1), Some(v2)) = (self.nu.get(&c1), self.nu.get(&c2)) {
                            if lhs >= v1.clone() + v2.clone() {
                                ok = true;
                                break;
                            }
                        }
                    }
                    if !ok {
                        return Err(VmError::ExchangeViolation {
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

    /// The fundamental circuit of `i` over the basis `b`: entry
    /// `ν(B∪i∖j) − ν(B)` on `j ∈ B∪{i}`, `∞` elsewhere; the entry at `i`
    /// is 0.
    pub fn fundamental_circuit(&self, b: Mask, i: usize) -> Result<TropicalVector, VmError> {
        let Some(nb) = self.nu.get(&b) else {
            return Err(VmError::NotABasis(self.ground.labels_of(b)));
        };
        if b >> i & 1 == 1 {
            return Err(VmError::ElementInBasis(self.ground.label(i).to_string()));
        }
        let mut entries = vec![ExtRat::Inf; self.size()];
        for j in mask_members(b | 1 << i) {
            let swapped = (b | 1 << i) & !(1 << j);
            entries[j] = match self.nu.get(&swapped) {
                Some(v) => ExtRat::Fin(v.clone() - nb.clone()),
                None => ExtRat::Inf,
            };
        }
        Ok(TropicalVector { entries })
    }

    /// Projective representatives of all circuits: fundamental circuits
    /// over all `(B, i)`, normalised to minimum entry 0, deduplicated, and
    /// sorted by support.
    pub fn circuits(&self) -> Vec<TropicalVector> {
        let mut out: Vec<TropicalVector> = Vec::new();
        for &b in self.nu.keys() {
            for i in 0..self.size() {
                if b >> i & 1 == 1 {
                    continue;
                }
                let c = self.fundamental_circuit(b, i).unwrap().normalized();
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out.sort_by_key(|c| lex_key(c.support_mask()));
        out
    }

    /// Valuated minor: delete, then contract, with deterministic lex-least
    /// completion sets.
    pub fn minor(&self, delete: Mask, contract: Mask) -> Result<ValuatedMatroid, VmError> {
        if delete & contract != 0 {
            return Err(VmError::OverlapError);
        }
        let under = self.underlying()?;
        let full = self.ground.full_mask();
        let kept_after_delete = full & !delete;
        // Restriction: lex-least independent E ⊆ delete completing the
        // kept part to full rank.
        let need = self.rank - under.rank(kept_after_delete);
        let e_restrict = lex_least_completion(&under, delete, kept_after_delete, need)
            .expect("restriction completion exists");
        // Contraction: lex-least maximal independent subset of the
        // contracted set.
        let rc = under.rank(contract);
        let e_contract =
            lex_least_completion(&under, contract, 0, rc).expect("contraction completion exists");
        let keep = full & !(delete | contract);
        let keep_idx = mask_members(keep);
        let labels: Vec<String> = keep_idx
            .iter()
            .map(|&i| self.ground.label(i).to_string())
            .collect();
        let new_rank = self.rank - need - rc;
        let mut nu = BTreeMap::new();
        for b in k_subsets(keep_idx.len(), new_rank) {
            let lifted = mask_members(b)
                .into_iter()
                .fold(0, |acc, i| acc | 1 << keep_idx[i]);
            if let Some(v) = self.nu.get(&(lifted | e_restrict | e_contract)) {
                nu.insert(b, v.clone());
            }
        }
        ValuatedMatroid::new(Ground::new(labels).map_err(VmError::Matroid)?, new_rank, nu)
    }

    /// Direct sum; ground labels must be disjoint (callers prefix on
    /// collision).
    pub fn direct_sum(&self, other: &ValuatedMatroid) -> Result<ValuatedMatroid, VmError> {
        let mut labels = self.ground.labels().to_vec();
        labels.extend(other.ground.labels().iter().cloned());
        let ground = Ground::new(labels).map_err(VmError::Matroid)?;
        let off = self.size();
        let mut nu = BTreeMap::new();
        for (&b1, v1) in &self.nu {
            for (&b2, v2) in &other.nu {
                nu.insert(b1 | b2 << off, v1.clone() + v2.clone());
            }
        }
        ValuatedMatroid::new(ground, self.rank + other.rank, nu)
    }

    /// Projective equivalence: `ν₁(B) = ν₂(B) + Σ_{i∈B} b_i + λ` for some
    /// rational `b`, `λ`.  Returns the shift vector on success.
    pub fn projectively_equivalent(&self, other: &ValuatedMatroid) -> Option<Vec<Rat>> {
        if self.size() != other.size() || self.rank != other.rank {
            return None;
        }
        let keys1: Vec<Mask> = self.nu.keys().copied().collect();
        let keys2: Vec<Mask> = other.nu.keys().copied().collect();
        if keys1 != keys2 {
            return None;
        }
        let m = self.size();
        let mut rows = Vec::new();
        for &b in &keys1 {
            let mut row = vec![Rat::zero(); m + 2];
            for i in mask_members(b) {
                row[i] = Rat::from_integer(1.into());
            }
            row[m] = Rat::from_integer(1.into());
            row[m + 1] = self.nu[&b].clone() - other.nu[&b].clone();
            rows.push(row);
        }
        solve_affine(rows, m + 1).map(|sol| sol[..m].to_vec())
    }

    /// Isomorphism search: a ground bijection followed by the projective
    /// test.  Returns the permutation (our position → other position).
    pub fn equivalent_iso(&self, other: &ValuatedMatroid) -> Option<Vec<usize>> {
        if self.size() != other.size()
            || self.rank != other.rank
            || self.nu.len() != other.nu.len()
        {
            return None;
        }
        let m = self.size();
        let mut perm: Vec<usize> = (0..m).collect();
        permute_search(&mut perm, 0, &mut |p| {
            self.remap(p).projectively_equivalent(other).is_some()
        })
    }

    fn remap(&self, perm: &[usize]) -> ValuatedMatroid {
        let mut nu = BTreeMap::new();
        for (&b, v) in &self.nu {
            let nb = mask_members(b)
                .into_iter()
                .fold(0, |acc, i| acc | 1 << perm[i]);
            nu.insert(nb, v.clone());
        }
        ValuatedMatroid {
            ground: self.ground.clone(),
            rank: self.rank,
            nu,
        }
    }

    /// Axiom report: tropical exchange plus the four circuit axioms, brute
    /// force with counterexamples.
    pub fn check_axioms(&self) -> AxiomReport {
        let mut failures = Vec::new();
        if let Err(e) = self.verify_exchange() {
            failures.push(format!("tropical exchange: {e}"));
        }
        if let Err(e) = self.underlying() {
            failures.push(format!("underlying matroid: {e}"));
        }
        let circuits = self.circuits();
        check_circuit_axioms(&circuits, &mut failures);
        AxiomReport {
            pass: failures.is_empty(),
            failures,
        }
    }
}

/// Circuit-axiom verification over a projective representative family.
/// Scalar closure is tested symbolically: representatives are normalised,
/// so two circuits in one projective class must coincide.
pub fn check_circuit_axioms(circuits: &[TropicalVector], failures: &mut Vec<String>) {
    for c in circuits {
        if c.support().is_empty() {
            failures.push("circuit with empty support".to_string());
        }
    }
    for (a, c1) in circuits.iter().enumerate() {
        for (b, c2) in circuits.iter().enumerate() {
            if a == b {
                continue;
            }
            let s1 = c1.support_mask();
            let s2 = c2.support_mask();
            if s1 == s2 && c1 != c2 {
                failures.push(format!(
                    "representatives with equal support differ: {c1} vs {c2}"
                ));
            }
            if s1 & s2 == s1 && s1 != s2 {
                failures.push(format!("support of {c1} strictly inside support of {c2}"));
            }
        }
    }
    // Elimination: scale c2 to agree with c1 at i, then ask for a circuit
    // that is ∞ at i, keeps the value at a strictly smaller position j, and
    // dominates the tropical sum.
    for c1 in circuits {
        for c2 in circuits {
            for i in c1.support() {
                let (Some(v1), Some(v2)) = (c1.entries[i].finite(), c2.entries[i].finite())
                else {
                    continue;
                };
                let delta = v1.clone() - v2.clone();
                let c2s = c2.scaled(&delta);
                for j in 0..c1.len() {
                    if j == i || !(c1.entries[j] < c2s.entries[j]) {
                        continue;
                    }
                    let target = c1.entries[j].clone();
                    let lower = c1.trop_sum(&c2s);
                    let found = circuits.iter().any(|c3| {
                        if c3.entries[i].is_finite() {
                            return false;
                        }
                        let (Some(v3), Some(t)) = (c3.entries[j].finite(), target.finite())
                        else {
                            return false;
                        };
                        let mu = t.clone() - v3.clone();
                        c3.scaled(&mu).dominates(&lower)
                    });
                    if !found {
                        failures.push(format!(
                            "elimination fails for {c1}, {c2} at positions {i}, {j}"
                        ));
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Lex-least independent subset E of `pool` with `|E| = need` and
/// `rk(base ∪ E) = rk(base) + need`.
fn lex_least_completion(m: &Matroid, pool: Mask, base: Mask, need: usize) -> Option<Mask> {
    let base_rank = m.rank(base);
    let mut e = 0;
    let mut have = 0;
    for i in mask_members(pool) {
        if have == need {
            break;
        }
        if m.rank(base | e | 1 << i) == base_rank + have + 1 {
            e |= 1 << i;
            have += 1;
        }
    }
    (have == need).then_some(e)
}

/// Solve a rational affine system given as rows `[coeffs..., rhs]` with
/// `vars` unknowns; free variables are set to 0.
pub(crate) fn solve_affine(rows: Vec<Vec<Rat>>, vars: usize) -> Option<Vec<Rat>> {
    let mut m = QMat::from_rows(rows);
    let pivots = m.rref();
    if pivots.contains(&vars) {
        return None;
    }
    let mut sol = vec![Rat::zero(); vars];
    for (r, &c) in pivots.iter().enumerate() {
        sol[c] = m.at(r, vars).clone();
    }
    Some(sol)
}

/// Backtracking over permutations in lexicographic order; returns the first
/// permutation accepted by `check`.
fn permute_search(
    perm: &mut Vec<usize>,
    from: usize,
    check: &mut impl FnMut(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    let n = perm.len();
    if from == n {
        return check(perm).then(|| perm.clone());
    }
    for k in from..n {
        perm.swap(from, k);
        perm[from + 1..].sort_unstable();
        if let Some(found) = permute_search(perm, from + 1, check) {
            return Some(found);
        }
        perm[from + 1..].sort_unstable();
        perm.swap(from, k);
    }
    None
}
