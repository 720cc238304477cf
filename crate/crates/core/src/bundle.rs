//! Tropical toric reflexive sheaves and vector bundles: a simple valuated
//! matroid plus a descending filtration of flats for every ray of a fan.
//!
//! Operations: validation, compatibility certification, partial modularity,
//! direct sums and decomposition, tensoring by line bundles, isomorphism,
//! tropical minimality, and the Cox-presentation export.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fan::{Fan, FanError, SolveOutcome};
use crate::matroid::{lex_key, mask_card, mask_members, Mask, Matroid, MatroidError};
use crate::tropical::ExtRat;
use crate::valuated::{ValuatedMatroid, VmError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("the valuated matroid has loops or parallel elements")]
    NotSimple,
    #[error("step at ray {ray}, threshold {j}: {flat:?} is not a flat")]
    NotAFlat { ray: usize, j: i64, flat: Vec<String> },
    #[error("filtration of ray {ray} is not strictly descending at threshold {j}")]
    NotDescending { ray: usize, j: i64 },
    #[error("filtration of ray {ray} never reaches the empty flat")]
    MissingBound { ray: usize },
    #[error("expected one filtration per ray ({expected}), got {got}")]
    RayCountMismatch { expected: usize, got: usize },
    #[error("bundles live on different fans")]
    FanMismatch,
    #[error("operand is not indecomposable")]
    NotIndecomposable,
    #[error("rays {0} and {1} are not a partially modular pair")]
    NotPartiallyModular(usize, usize),
    #[error("flat lattice larger than the configured cap {0}")]
    LatticeTooLarge(usize),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Valuated(#[from] VmError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// Per-ray filtration stored by breakpoints: pairs `(j, F)` with strictly
/// increasing thresholds and strictly decreasing flats.  The value at `j` is
/// the full ground set before the first stored threshold and the flat of
/// the last stored threshold at or below `j`; the final flat is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub steps: Vec<(i64, Mask)>,
}

impl Filtration {
    /// The flat at threshold `j`.
    pub fn at(&self, j: i64, full: Mask) -> Mask {
        let mut cur = full;
        for &(jk, f) in &self.steps {
            if jk <= j {
                cur = f;
            } else {
                break;
            }
        }
        cur
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = i64> + '_ {
        self.steps.iter().map(|&(j, _)| j)
    }

    pub fn min_threshold(&self) -> Option<i64> {
        self.steps.first().map(|&(j, _)| j)
    }

    pub fn max_threshold(&self) -> Option<i64> {
        self.steps.last().map(|&(j, _)| j)
    }

    /// Drop steps that repeat the previous value (including a leading full
    /// ground set).
    pub fn normalized(steps: Vec<(i64, Mask)>, full: Mask) -> Filtration {
        let mut out: Vec<(i64, Mask)> = Vec::new();
        let mut prev = full;
        for (j, f) in steps {
            if f != prev {
                out.push((j, f));
                prev = f;
            }
        }
        Filtration { steps: out }
    }

    fn shifted(&self, offset: i64) -> Filtration {
        Filtration {
            steps: self.steps.iter().map(|&(j, f)| (j + offset, f)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BundleKind {
    Reflexive,
    CertifiedBundle,
}

/// The central object: `(ℳ, 𝒢, {E^i(j)})` on a fan.
#[derive(Clone, Debug)]
pub struct TropicalToricBundle {
    pub fan: Fan,
    pub vm: ValuatedMatroid,
    pub filtrations: Vec<Filtration>,
    pub kind: BundleKind,
}

/// A compatibility certificate: per maximal cone, a basis and an integer
/// weight for each basis element realising every filtration step as a join.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityCertificate {
    pub cones: Vec<ConeCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeCertificate {
    pub cone: Vec<usize>,
    pub basis: Mask,
    /// Weight `u_w` for each basis member, in mask order.
    pub weights: Vec<Vec<i64>>,
}

/// Structured certification failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifyFailure {
    /// No basis realises every filtration step of the cone as a join.
    NoBasisForCone { cone: Vec<usize> },
    /// Bases exist but none admits integer weights; the search is complete
    /// under the per-element membership reading of the compatibility join.
    NoIntegerWeights {
        cone: Vec<usize>,
        basis: Mask,
        message: String,
    },
}

pub type CertifyOutcome = Result<CompatibilityCertificate, CertifyFailure>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularityViolation {
    pub ray_i: usize,
    pub ray_j: usize,
    pub k: i64,
    pub l: i64,
    pub lhs: usize,
    pub rhs: usize,
}

/// One relation of the Cox presentation, indexed by a circuit.
#[derive(Clone, Debug)]
pub struct CoxGenerator {
    /// (ground position, coefficient, monomial exponent in ℤ^s).
    pub terms: Vec<(usize, ExtRat, Vec<i64>)>,
    /// ℤ^s-degree of the generator (the negated componentwise minimum).
    pub degree: Vec<i64>,
    /// Canonical class-group representative of the degree.
    pub degree_class: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CoxPresentation {
    /// Twist degree d_w per ground element, in ground order.
    pub twists: Vec<Vec<i64>>,
    pub generators: Vec<CoxGenerator>,
}

impl TropicalToricBundle {
    /// Validate and build a reflexive sheaf.
    pub fn new_sheaf(
        fan: Fan,
        vm: ValuatedMatroid,
        filtrations: Vec<Filtration>,
    ) -> Result<Self, BundleError> {
        Self::new_sheaf_with(fan, vm, filtrations, true)
    }

    /// Quotient handles contract away flats and may acquire parallel
    /// elements; they skip the simplicity check but keep every other
    /// invariant.
    pub(crate) fn new_sheaf_with(
        fan: Fan,
        vm: ValuatedMatroid,
        filtrations: Vec<Filtration>,
        require_simple: bool,
    ) -> Result<Self, BundleError> {
        if filtrations.len() != fan.ray_count() {
            return Err(BundleError::RayCountMismatch {
                expected: fan.ray_count(),
                got: filtrations.len(),
            });
        }
        let under = vm.underlying()?;
        if require_simple && !under.is_simple() {
            return Err(BundleError::NotSimple);
        }
        let full = vm.ground().full_mask();
        let mut normalized = Vec::with_capacity(filtrations.len());
        for (ray, filt) in filtrations.into_iter().enumerate() {
            let mut prev_j: Option<i64> = None;
            let mut prev_flat = full;
            for &(j, f) in &filt.steps {
                if let Some(pj) = prev_j {
                    if j <= pj {
                        return Err(BundleError::NotDescending { ray, j });
                    }
                }
                if !under.is_flat(f) {
                    return Err(BundleError::NotAFlat {
                        ray,
                        j,
                        flat: vm.ground().labels_of(f),
                    });
                }
                if f & prev_flat != f || f == prev_flat {
                    return Err(BundleError::NotDescending { ray, j });
                }
                prev_j = Some(j);
                prev_flat = f;
            }
            if prev_flat != 0 {
                return Err(BundleError::MissingBound { ray });
            }
            normalized.push(filt);
        }
        Ok(TropicalToricBundle {
            fan,
            vm,
            filtrations: normalized,
            kind: BundleKind::Reflexive,
        })
    }

    pub fn rank(&self) -> usize {
        self.vm.rank_total()
    }

    pub fn ground_size(&self) -> usize {
        self.vm.size()
    }

    pub fn step_at(&self, ray: usize, j: i64) -> Mask {
        self.filtrations[ray].at(j, self.vm.ground().full_mask())
    }

    /// Degree vectors: `(d_w)_i = max{j : w ∈ E^i(j)}`.
    pub fn degree_vectors(&self) -> Vec<Vec<i64>> {
        let m = self.ground_size();
        let s = self.fan.ray_count();
        let mut out = vec![vec![0i64; s]; m];
        for w in 0..m {
            for i in 0..s {
                // Membership decreases along the chain; the first stored
                // flat missing w ends its membership interval.
                let step = self.filtrations[i]
                    .steps
                    .iter()
                    .find(|&&(_, f)| f >> w & 1 == 0)
                    .expect("filtration ends at the empty flat");
                out[w][i] = step.0 - 1;
            }
        }
        out
    }

    /// Rebuild the filtrations from degree vectors:
    /// `E^i(j) = ⋁ {w : (d_w)_i ≥ j}`.
    pub fn filtration_from_degrees(
        vm: &ValuatedMatroid,
        ray_count: usize,
        degrees: &[Vec<i64>],
    ) -> Result<Vec<Filtration>, BundleError> {
        let under = vm.underlying()?;
        let full = vm.ground().full_mask();
        let mut out = Vec::with_capacity(ray_count);
        for i in 0..ray_count {
            let mut values: Vec<i64> = degrees.iter().map(|d| d[i]).collect();
            values.sort_unstable();
            values.dedup();
            let mut steps = Vec::new();
            for &v in &values {
                let members: Mask = degrees
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| d[i] > v)
                    .fold(0, |acc, (w, _)| acc | 1 << w);
                steps.push((v + 1, under.closure(members)));
            }
            out.push(Filtration::normalized(steps, full));
        }
        Ok(out)
    }

    /// Distinct filtration flats of a set of rays, excluding the bounds.
    fn proper_step_flats(&self, rays: &[usize]) -> Vec<Mask> {
        let full = self.vm.ground().full_mask();
        let mut flats = Vec::new();
        for &i in rays {
            for &(_, f) in &self.filtrations[i].steps {
                if f != 0 && f != full && !flats.contains(&f) {
                    flats.push(f);
                }
            }
        }
        flats.sort_by_key(|&f| lex_key(f));
        flats
    }

    /// Search a compatibility certificate per maximal cone.  A basis works
    /// for a cone when every step flat is the closure of the basis elements
    /// it contains; the weights solve `u_w · v_i = (d_w)_i` exactly, which
    /// the join condition forces for any basis.
    pub fn certify(&self) -> Result<CertifyOutcome, BundleError> {
        let under = self.vm.underlying()?;
        let degrees = self.degree_vectors();
        let mut cones = Vec::new();
        for cone in &self.fan.max_cones {
            let required = self.proper_step_flats(cone);
            let candidates: Vec<Mask> = under
                .bases()
                .iter()
                .copied()
                .filter(|&b| required.iter().all(|&f| under.closure(b & f) == f))
                .collect();
            if candidates.is_empty() {
                return Ok(Err(CertifyFailure::NoBasisForCone { cone: cone.clone() }));
            }
            let mut found = None;
            'basis: for &basis in &candidates {
                let mut weights = Vec::new();
                for w in mask_members(basis) {
                    let targets: Vec<(Option<i64>, Option<i64>)> = cone
                        .iter()
                        .map(|&i| (Some(degrees[w][i]), Some(degrees[w][i])))
                        .collect();
                    match self.fan.solve_on_cone(cone, &targets)? {
                        SolveOutcome::Solution(u) => weights.push(u),
                        SolveOutcome::Infeasible { .. } => continue 'basis,
                    }
                }
                let cert = ConeCertificate {
                    cone: cone.clone(),
                    basis,
                    weights,
                };
                if self.verify_cone_certificate(&cert) {
                    found = Some(cert);
                    break;
                }
            }
            match found {
                Some(cert) => cones.push(cert),
                None => {
                    return Ok(Err(CertifyFailure::NoIntegerWeights {
                        cone: cone.clone(),
                        basis: candidates[0],
                        message: "no certificate found (search-complete under per-element \
                                  membership interpretation)"
                            .to_string(),
                    }))
                }
            }
        }
        Ok(Ok(CompatibilityCertificate { cones }))
    }

    /// Re-evaluate the compatibility equation from a certificate: for every
    /// ray of the cone and every threshold, the join of the basis elements
    /// with `u_w · v_i ≥ j` must reproduce the stored flat.
    pub fn verify_cone_certificate(&self, cert: &ConeCertificate) -> bool {
        let Ok(under) = self.vm.underlying() else {
            return false;
        };
        let members = mask_members(cert.basis);
        if members.len() != cert.weights.len() {
            return false;
        }
        for &i in &cert.cone {
            let filt = &self.filtrations[i];
            let lo = filt.min_threshold().unwrap() - 1;
            let hi = filt.max_threshold().unwrap() + 1;
            for j in lo..=hi {
                let selected: Mask = members
                    .iter()
                    .zip(&cert.weights)
                    .filter(|&(_, u)| {
                        let dot: i64 = u
                            .iter()
                            .zip(&self.fan.rays[i])
                            .map(|(&a, &b)| a * b)
                            .sum();
                        dot >= j
                    })
                    .fold(0, |acc, (&w, _)| acc | 1 << w);
                let join = if selected == 0 {
                    0
                } else {
                    under.closure(selected)
                };
                if join != self.step_at(i, j) {
                    return false;
                }
            }
        }
        true
    }

    /// Partial modularity: the rank identity over all ray pairs and
    /// breakpoint pairs; returns the first violation.
    pub fn is_partially_modular(&self) -> Result<(bool, Option<ModularityViolation>), BundleError> {
        let under = self.vm.underlying()?;
        let s = self.fan.ray_count();
        for i in 0..s {
            for j in 0..s {
                let ks: Vec<i64> = self.filtrations[i].breakpoints().collect();
                let ls: Vec<i64> = self.filtrations[j].breakpoints().collect();
                for &k in &ks {
                    for &l in &ls {
                        let a_prev = self.step_at(i, k - 1);
                        let a = self.step_at(i, k);
                        let b_prev = self.step_at(j, l - 1);
                        let b = self.step_at(j, l);
                        let lhs = under.rank(under.closure((a_prev & b) | (a & b_prev)));
                        let rhs = under.rank(a_prev & b) + under.rank(a & b_prev);
                        let rhs = rhs as i64 - under.rank(a & b) as i64;
                        if (lhs as i64) != rhs {
                            return Ok((
                                false,
                                Some(ModularityViolation {
                                    ray_i: i,
                                    ray_j: j,
                                    k,
                                    l,
                                    lhs,
                                    rhs: rhs.max(0) as usize,
                                }),
                            ));
                        }
                    }
                }
            }
        }
        Ok((true, None))
    }

    fn pair_is_partially_modular(&self, i: usize, j: usize) -> Result<bool, BundleError> {
        let under = self.vm.underlying()?;
        for (x, y) in [(i, i), (i, j), (j, i), (j, j)] {
            let ks: Vec<i64> = self.filtrations[x].breakpoints().collect();
            let ls: Vec<i64> = self.filtrations[y].breakpoints().collect();
            for &k in &ks {
                for &l in &ls {
                    let a_prev = self.step_at(x, k - 1);
                    let a = self.step_at(x, k);
                    let b_prev = self.step_at(y, l - 1);
                    let b = self.step_at(y, l);
                    let lhs = under.rank(under.closure((a_prev & b) | (a & b_prev))) as i64;
                    let rhs = under.rank(a_prev & b) as i64 + under.rank(a & b_prev) as i64
                        - under.rank(a & b) as i64;
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// A basis adapted to the filtrations of two rays, built from relative
    /// complements along the two chains (lex tie-breaks throughout).
    pub fn pair_basis(&self, ray_i: usize, ray_j: usize) -> Result<Mask, BundleError> {
        if !self.pair_is_partially_modular(ray_i, ray_j)? {
            return Err(BundleError::NotPartiallyModular(ray_i, ray_j));
        }
        let under = self.vm.underlying()?;
        let full = self.vm.ground().full_mask();
        let chain = |ray: usize| -> Vec<Mask> {
            let mut c = vec![full];
            for &(_, f) in &self.filtrations[ray].steps {
                c.push(f);
            }
            c.reverse(); // ascending: ∅ = last stored flat … G
            c
        };
        let a = chain(ray_i);
        let b = chain(ray_j);
        let mut basis: Mask = 0;
        for ii in 1..a.len() {
            for jj in 1..b.len() {
                let target = a[ii] & b[jj];
                let x = under.closure((a[ii - 1] & b[jj]) | (a[ii] & b[jj - 1]));
                let w = if x == target {
                    0
                } else {
                    under.relative_complement(x, 0, target)?
                };
                // lex-least maximal independent subset of w, on top of what
                // we already have inside w
                let mut have = basis & w;
                for e in mask_members(w) {
                    if under.rank(have | 1 << e) == mask_card(have | 1 << e) {
                        have |= 1 << e;
                    }
                }
                basis |= have;
            }
        }
        // Postcondition guaranteed by partial modularity: every step flat
        // of the two rays is spanned by its part of the basis.
        assert!(under.is_basis(basis), "pair basis construction broke");
        assert!(self
            .proper_step_flats(&[ray_i, ray_j])
            .iter()
            .all(|&f| under.closure(basis & f) == f));
        Ok(basis)
    }

    /// Direct sum over a common fan; grounds are prefixed on label clash.
    pub fn direct_sum(&self, other: &TropicalToricBundle) -> Result<TropicalToricBundle, BundleError> {
        if self.fan != other.fan {
            return Err(BundleError::FanMismatch);
        }
        let clash = self
            .vm
            .ground()
            .labels()
            .iter()
            .any(|l| other.vm.ground().labels().contains(l));
        let (vm1, vm2) = if clash {
            (prefix_vm(&self.vm, "1:")?, prefix_vm(&other.vm, "2:")?)
        } else {
            (self.vm.clone(), other.vm.clone())
        };
        let vm = vm1.direct_sum(&vm2)?;
        let off = self.ground_size();
        let full = vm.ground().full_mask();
        let mut filtrations = Vec::new();
        for ray in 0..self.fan.ray_count() {
            let mut thresholds: Vec<i64> = self.filtrations[ray]
                .breakpoints()
                .chain(other.filtrations[ray].breakpoints())
                .collect();
            thresholds.sort_unstable();
            thresholds.dedup();
            let steps = thresholds
                .into_iter()
                .map(|j| {
                    let f1 = self.step_at(ray, j);
                    let f2 = other.step_at(ray, j);
                    (j, f1 | f2 << off)
                })
                .collect();
            filtrations.push(Filtration::normalized(steps, full));
        }
        TropicalToricBundle::new_sheaf(self.fan.clone(), vm, filtrations)
    }

    /// Split along the connected components of the underlying matroid; the
    /// components are the unique indecomposable summands.
    pub fn decompose(&self) -> Result<Vec<TropicalToricBundle>, BundleError> {
        let under = self.vm.underlying()?;
        let comps = under.connected_components();
        if comps.len() <= 1 {
            return Ok(vec![self.clone()]);
        }
        let full = self.vm.ground().full_mask();
        let mut out = Vec::new();
        for &comp in &comps {
            let vm = self.vm.minor(full & !comp, 0)?;
            let comp_idx = mask_members(comp);
            let comp_full = vm.ground().full_mask();
            let filtrations = self
                .filtrations
                .iter()
                .map(|filt| {
                    let steps = filt
                        .steps
                        .iter()
                        .map(|&(j, f)| {
                            let projected = comp_idx
                                .iter()
                                .enumerate()
                                .filter(|&(_, &orig)| f >> orig & 1 == 1)
                                .fold(0, |acc, (new, _)| acc | 1 << new);
                            (j, projected)
                        })
                        .collect();
                    Filtration::normalized(steps, comp_full)
                })
                .collect();
            out.push(TropicalToricBundle::new_sheaf(
                self.fan.clone(),
                vm,
                filtrations,
            )?);
        }
        Ok(out)
    }

    pub fn is_indecomposable(&self) -> Result<bool, BundleError> {
        Ok(self.vm.underlying()?.is_connected())
    }

    /// Tensor by the line bundle of the divisor vector `a`: the filtration
    /// of ray `i` at `j` becomes the old one at `j − a_i`.
    pub fn tensor_line(&self, a: &[i64]) -> Result<TropicalToricBundle, BundleError> {
        if a.len() != self.fan.ray_count() {
            return Err(BundleError::RayCountMismatch {
                expected: self.fan.ray_count(),
                got: a.len(),
            });
        }
        let filtrations = self
            .filtrations
            .iter()
            .zip(a)
            .map(|(f, &ai)| f.shifted(ai))
            .collect();
        TropicalToricBundle::new_sheaf(self.fan.clone(), self.vm.clone(), filtrations)
    }

    /// Isomorphism of indecomposable bundles: a valuated-matroid bijection
    /// together with a character shifting all filtrations.
    pub fn isomorphic(
        &self,
        other: &TropicalToricBundle,
    ) -> Result<Option<(Vec<usize>, Vec<i64>)>, BundleError> {
        if !self.is_indecomposable()? || !other.is_indecomposable()? {
            return Err(BundleError::NotIndecomposable);
        }
        if self.fan != other.fan
            || self.ground_size() != other.ground_size()
            || self.rank() != other.rank()
        {
            return Ok(None);
        }
        let m = self.ground_size();
        let mut perms = Vec::new();
        collect_perms(&mut (0..m).collect(), 0, &mut perms);
        for perm in perms {
            if self.remapped_vm(&perm).projectively_equivalent(&other.vm).is_none() {
                continue;
            }
            // Per-ray threshold offsets under the bijection.
            let mut deltas = Vec::with_capacity(self.fan.ray_count());
            let mut consistent = true;
            for ray in 0..self.fan.ray_count() {
                let ours: Vec<(i64, Mask)> = self.filtrations[ray]
                    .steps
                    .iter()
                    .map(|&(j, f)| (j, remap_mask(f, &perm)))
                    .collect();
                let theirs = &other.filtrations[ray].steps;
                if ours.len() != theirs.len() {
                    consistent = false;
                    break;
                }
                let mut delta: Option<i64> = None;
                for (&(j1, f1), &(j2, f2)) in ours.iter().zip(theirs) {
                    if f1 != f2 {
                        consistent = false;
                        break;
                    }
                    match delta {
                        None => delta = Some(j2 - j1),
                        Some(d) if d == j2 - j1 => {}
                        _ => {
                            consistent = false;
                            break;
                        }
                    }
                }
                if !consistent {
                    break;
                }
                deltas.push(delta.unwrap_or(0));
            }
            if !consistent {
                continue;
            }
            // E1^i(j) = E2^i(j + u·v_i) means the step thresholds of E2 are
            // those of E1 shifted by δ_i = −u·v_i... solve u·v_i = −δ_i?
            // Stored thresholds of E2 = thresholds of E1 + δ_i, and
            // E2^i(j + u·v_i) has thresholds of E2 minus u·v_i; equality
            // with E1 needs u·v_i = δ_i.
            let all_rays: Vec<usize> = (0..self.fan.ray_count()).collect();
            let targets: Vec<(Option<i64>, Option<i64>)> =
                deltas.iter().map(|&d| (Some(d), Some(d))).collect();
            if let SolveOutcome::Solution(u) = self.fan.solve_on_cone(&all_rays, &targets)? {
                return Ok(Some((perm, u)));
            }
        }
        Ok(None)
    }

    fn remapped_vm(&self, perm: &[usize]) -> ValuatedMatroid {
        let mut nu = BTreeMap::new();
        for (&b, v) in self.vm.finite_values() {
            let nb = mask_members(b)
                .into_iter()
                .fold(0, |acc, i| acc | 1 << perm[i]);
            nu.insert(nb, v.clone());
        }
        // Safe: a permutation of a valid valuated matroid stays valid.
        ValuatedMatroid::new(self.vm.ground().clone(), self.vm.rank_total(), nu).unwrap()
    }

    /// Tropical minimality: no proper join-closed subposet of the flat
    /// lattice containing all filtration steps is atomic and semimodular
    /// with its height rank.  Returns the witness subposet if one exists.
    pub fn is_tropically_minimal(&self, cap: usize) -> Result<(bool, Option<Vec<Mask>>), BundleError> {
        let under = self.vm.underlying()?;
        let lattice = under.flat_lattice()?;
        let full = self.vm.ground().full_mask();
        let all: Vec<Mask> = lattice.flats().to_vec();
        let proper: Vec<Mask> = all
            .iter()
            .copied()
            .filter(|&f| f != 0 && f != full)
            .collect();
        if proper.len() > cap {
            return Err(BundleError::LatticeTooLarge(cap));
        }
        let mandatory = self.proper_step_flats(&(0..self.fan.ray_count()).collect::<Vec<_>>());
        let n = proper.len();
        if n > 24 {
            return Err(BundleError::LatticeTooLarge(cap));
        }
        // Atom-set enumeration in (size, lex) order.
        let mut subsets: Vec<Vec<usize>> = (0u32..(1 << n)).map(mask_members).collect();
        subsets.sort_by_key(|s| (s.len(), s.iter().map(|&i| lex_key(proper[i])).collect::<Vec<_>>()));
        for subset in subsets {
            let atoms: Vec<Mask> = subset.iter().map(|&i| proper[i]).collect();
            // Join closure of the atoms plus the bottom.
            let mut poset: Vec<Mask> = vec![0];
            let mut frontier = atoms.clone();
            while let Some(f) = frontier.pop() {
                if poset.contains(&f) {
                    continue;
                }
                poset.push(f);
                for &g in poset.clone().iter() {
                    let join = under.closure(f | g);
                    if !poset.contains(&join) && !frontier.contains(&join) {
                        frontier.push(join);
                    }
                }
            }
            if !poset.contains(&full) || poset.len() >= all.len() {
                continue;
            }
            if !mandatory.iter().all(|f| poset.contains(f)) {
                continue;
            }
            if subposet_is_geometric(&under, &poset) {
                let mut witness = poset;
                witness.sort_by_key(|&f| (mask_card(f), lex_key(f)));
                return Ok((false, Some(witness)));
            }
        }
        Ok((true, None))
    }

    /// The Cox presentation: twist degrees, one relation per circuit
    /// representative, and the class-group degree of each relation.  Bend
    /// pairs are the single-term deletions of each generator.
    pub fn cox_presentation(&self) -> Result<CoxPresentation, BundleError> {
        let degrees = self.degree_vectors();
        let s = self.fan.ray_count();
        let mut generators = Vec::new();
        for c in self.vm.circuits() {
            let support = c.support();
            let mut min_vec = vec![i64::MAX; s];
            for &w in &support {
                for i in 0..s {
                    min_vec[i] = min_vec[i].min(degrees[w][i]);
                }
            }
            let terms: Vec<(usize, ExtRat, Vec<i64>)> = support
                .iter()
                .map(|&w| {
                    let u: Vec<i64> = (0..s).map(|i| degrees[w][i] - min_vec[i]).collect();
                    (w, c.entries[w].clone(), u)
                })
                .collect();
            let degree: Vec<i64> = min_vec.iter().map(|&v| -v).collect();
            let degree_class = self
                .fan
                .divisor_class(&degree)?
                .normal_form
                .iter()
                .map(|b| b.to_string())
                .collect();
            generators.push(CoxGenerator {
                terms,
                degree,
                degree_class,
            });
        }
        Ok(CoxPresentation {
            twists: degrees,
            generators,
        })
    }
}

fn prefix_vm(vm: &ValuatedMatroid, prefix: &str) -> Result<ValuatedMatroid, VmError> {
    let labels: Vec<String> = vm
        .ground()
        .labels()
        .iter()
        .map(|l| format!("{prefix}{l}"))
        .collect();
    ValuatedMatroid::new(
        crate::matroid::Ground::new(labels)?,
        vm.rank_total(),
        vm.finite_values().clone(),
    )
}

fn remap_mask(f: Mask, perm: &[usize]) -> Mask {
    mask_members(f).into_iter().fold(0, |acc, i| acc | 1 << perm[i])
}

fn collect_perms(perm: &mut Vec<usize>, from: usize, out: &mut Vec<Vec<usize>>) {
    let n = perm.len();
    if from == n {
        out.push(perm.clone());
        return;
    }
    for k in from..n {
        perm.swap(from, k);
        perm[from + 1..].sort_unstable();
        collect_perms(perm, from + 1, out);
        perm[from + 1..].sort_unstable();
        perm.swap(from, k);
    }
}

/// Is the join-closed subposet (with bottom) atomic and semimodular with
/// respect to its height function, i.e. the lattice of flats of a matroid?
fn subposet_is_geometric(under: &Matroid, poset: &[Mask]) -> bool {
    let n = poset.len();
    let leq = |a: Mask, b: Mask| a & b == a;
    // heights by longest chain from the bottom
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| mask_card(poset[i]));
    let mut height: BTreeMap<Mask, usize> = BTreeMap::new();
    for &i in &order {
        let h = (0..n)
            .filter(|&j| poset[j] != poset[i] && leq(poset[j], poset[i]))
            .map(|j| height[&poset[j]] + 1)
            .max()
            .unwrap_or(0);
        height.insert(poset[i], h);
    }
    // graded: covers increase height by exactly one
    for &x in poset {
        for &y in poset {
            if x != y && leq(x, y) {
                let between = poset
                    .iter()
                    .any(|&z| z != x && z != y && leq(x, z) && leq(z, y));
                if !between && height[&y] != height[&x] + 1 {
                    return false;
                }
            }
        }
    }
    // atomic: every element is the join of the height-1 elements below it
    let atoms: Vec<Mask> = poset
        .iter()
        .copied()
        .filter(|f| height[f] == 1)
        .collect();
    for &x in poset {
        let mut acc: Mask = 0;
        for &a in &atoms {
            if leq(a, x) {
                acc |= a;
            }
        }
        let join = if acc == 0 { 0 } else { under.closure(acc) };
        // the join inside the subposet is the matroid closure because the
        // subposet is join-closed
        if height[&x] > 0 && join != x {
            return false;
        }
    }
    // semimodular with the height rank; meet = largest poset element below
    for &x in poset {
        for &y in poset {
            let join = under.closure(x | y);
            if !poset.contains(&join) {
                return false;
            }
            let meet = poset
                .iter()
                .copied()
                .filter(|&z| leq(z, x) && leq(z, y))
                .max_by_key(|&z| height[&z])
                .unwrap_or(0);
            if height[&join] + height[&meet] > height[&x] + height[&y] {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::mask_from;
    use crate::testdata as td;

    #[test]
    fn sheaf_validation() {
        // Tangent sheaves validate; so do rank-1 sheaves.
        let _ = td::tangent_pn(2);
        let _ = td::line_bundle(td::p2_fan(), &[1, 0, 0]);

        // A non-flat step is rejected: closure({w1,w2}) is everything in
        // the rank-2 matroid on {e1, e2, e1+e2}.
        let m = Matroid::from_columns(
            td::labels(&["w1", "w2", "w3"]),
            &[
                vec![td::q(1), td::q(0)],
                vec![td::q(0), td::q(1)],
                vec![td::q(1), td::q(1)],
            ],
        )
        .unwrap();
        let vm = ValuatedMatroid::trivial(&m);
        let bad = TropicalToricBundle::new_sheaf(
            td::a3_fan(),
            vm.clone(),
            vec![
                Filtration {
                    steps: vec![(1, mask_from(&[0, 1])), (2, 0)],
                },
                Filtration { steps: vec![(1, 0)] },
                Filtration { steps: vec![(1, 0)] },
            ],
        );
        assert!(matches!(bad, Err(BundleError::NotAFlat { ray: 0, .. })));

        // A zero column is a loop; the sheaf constructor rejects it.
        let with_loop = Matroid::from_columns(
            td::labels(&["a", "b", "z"]),
            &[
                vec![td::q(1), td::q(0)],
                vec![td::q(0), td::q(1)],
                vec![td::q(0), td::q(0)],
            ],
        )
        .unwrap();
        let bad = TropicalToricBundle::new_sheaf(
            td::a2_fan(),
            ValuatedMatroid::trivial(&with_loop),
            vec![
                Filtration { steps: vec![(1, 0)] },
                Filtration { steps: vec![(1, 0)] },
            ],
        );
        assert!(matches!(bad, Err(BundleError::NotSimple)));

        // Steps must descend strictly.
        let u22 = Matroid::uniform(td::labels(&["a", "b"]), 2).unwrap();
        let bad = TropicalToricBundle::new_sheaf(
            td::a1_fan(),
            ValuatedMatroid::trivial(&u22),
            vec![Filtration {
                steps: vec![(1, mask_from(&[0])), (2, mask_from(&[1]))],
            }],
        );
        assert!(matches!(bad, Err(BundleError::NotDescending { ray: 0, j: 2 })));

        // Non-simple matroids are rejected.
        let parallel = Matroid::from_label_bases(
            td::labels(&["a", "b"]),
            vec![td::labels(&["a"]), td::labels(&["b"])],
        )
        .unwrap();
        let bad = TropicalToricBundle::new_sheaf(
            td::a1_fan(),
            ValuatedMatroid::trivial(&parallel),
            vec![Filtration { steps: vec![(1, 0)] }],
        );
        assert!(matches!(bad, Err(BundleError::NotSimple)));

        // A filtration that never reaches ∅ is rejected.
        let bad = TropicalToricBundle::new_sheaf(
            td::a1_fan(),
            ValuatedMatroid::trivial(
                &Matroid::from_label_bases(td::labels(&["a"]), vec![td::labels(&["a"])]).unwrap(),
            ),
            vec![Filtration { steps: vec![] }],
        );
        assert!(matches!(bad, Err(BundleError::MissingBound { ray: 0 })));
    }

    #[test]
    fn degree_vectors_examples() {
        let e = td::m1_bundle();
        assert_eq!(
            e.degree_vectors(),
            vec![
                vec![1, 0, 0],
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
            ]
        );

        // Trivial bundle: all degree vectors vanish.
        let t = td::trivial_bundle(
            td::p2_fan(),
            ValuatedMatroid::trivial(
                &Matroid::uniform(td::labels(&["1", "2", "3"]), 2).unwrap(),
            ),
        );
        assert!(t.degree_vectors().iter().all(|d| d.iter().all(|&x| x == 0)));

        // The six-element tropicalization has d = 0 on e1+e2+e3.
        let e3 = td::m3_bundle();
        assert_eq!(e3.degree_vectors()[5], vec![0, 0, 0]);
    }

    #[test]
    fn filtrations_round_trip_through_degrees() {
        for e in [
            td::m1_bundle(),
            td::m2_bundle(),
            td::m3_bundle(),
            td::tangent_pn(2),
            td::hn_example_bundle(),
            td::five_vector_p1_bundle(),
        ] {
            let d = e.degree_vectors();
            let rebuilt =
                TropicalToricBundle::filtration_from_degrees(&e.vm, e.fan.ray_count(), &d)
                    .unwrap();
            assert_eq!(rebuilt, e.filtrations);
        }
    }

    #[test]
    fn certify_tangent_bundles() {
        for n in [2usize, 3] {
            let e = td::tangent_pn(n);
            let cert = e.certify().unwrap().expect("tangent bundle certifies");
            assert_eq!(cert.cones.len(), e.fan.max_cones.len());
            for c in &cert.cones {
                assert!(e.verify_cone_certificate(c));
            }
        }
    }

    #[test]
    fn certify_failures() {
        // Singular surface: rationally fine, integrally obstructed.
        let e = td::singular_surface_sheaf();
        match e.certify().unwrap() {
            Err(CertifyFailure::NoIntegerWeights { cone, .. }) => {
                assert_eq!(cone, vec![0, 1]);
            }
            other => panic!("expected NoIntegerWeights, got {other:?}"),
        }

        // Affine 3-space: three atoms cannot sit inside a rank-2 basis.
        let e = td::a3_sheaf();
        match e.certify().unwrap() {
            Err(CertifyFailure::NoBasisForCone { cone }) => {
                assert_eq!(cone, vec![0, 1, 2]);
            }
            other => panic!("expected NoBasisForCone, got {other:?}"),
        }
    }

    #[test]
    fn certify_fano_bundle() {
        let e = td::fano_bundle();
        let cert = e.certify().unwrap().expect("Fano bundle certifies");
        let got: Vec<Vec<usize>> = cert
            .cones
            .iter()
            .map(|c| mask_members(c.basis))
            .collect();
        // Per-adjacent-ray-pair bases, lex-least valid choice per cone.
        let expect = vec![
            vec![0, 1, 3],
            vec![1, 2, 3],
            vec![0, 2, 3],
            vec![3, 4, 6],
            vec![1, 4, 5],
            vec![0, 5, 6],
            vec![0, 2, 6],
        ];
        assert_eq!(got, expect);
        for c in &cert.cones {
            assert!(e.verify_cone_certificate(c));
        }
    }

    #[test]
    fn partial_modularity() {
        // The non-splitting bundle fails with ranks 3 vs 4.
        let e = td::nonsplit_p1_bundle();
        let (ok, viol) = e.is_partially_modular().unwrap();
        assert!(!ok);
        let v = viol.unwrap();
        assert_eq!((v.lhs, v.rhs), (3, 4));
        assert_eq!((v.k, v.l), (1, 1));

        // The splitting bundle and any trivial bundle pass.
        assert!(td::split_p1_bundle().is_partially_modular().unwrap().0);
        let t = td::trivial_bundle(
            td::p2_fan(),
            ValuatedMatroid::trivial(
                &Matroid::uniform(td::labels(&["1", "2", "3"]), 2).unwrap(),
            ),
        );
        assert!(t.is_partially_modular().unwrap().0);
    }

    #[test]
    fn pair_bases() {
        // The five-vector bundle admits {w1, w3, w4} for both rays.
        let e = td::five_vector_p1_bundle();
        let b = e.pair_basis(0, 1).unwrap();
        assert_eq!(b, mask_from(&[0, 2, 3]));

        // Trivial bundle: the lex-least basis.
        let t = td::trivial_bundle(
            td::p2_fan(),
            ValuatedMatroid::trivial(
                &Matroid::uniform(td::labels(&["1", "2", "3"]), 2).unwrap(),
            ),
        );
        assert_eq!(t.pair_basis(0, 1).unwrap(), mask_from(&[0, 1]));

        // Two chains in the free rank-2 matroid pick out the two atoms.
        let m = Matroid::uniform(td::labels(&["a", "b"]), 2).unwrap();
        let e2 = TropicalToricBundle::new_sheaf(
            td::p1_fan(),
            ValuatedMatroid::trivial(&m),
            vec![
                Filtration {
                    steps: vec![(1, mask_from(&[0])), (2, 0)],
                },
                Filtration {
                    steps: vec![(1, mask_from(&[1])), (2, 0)],
                },
            ],
        )
        .unwrap();
        assert_eq!(e2.pair_basis(0, 1).unwrap(), mask_from(&[0, 1]));

        assert!(matches!(
            td::nonsplit_p1_bundle().pair_basis(0, 1),
            Err(BundleError::NotPartiallyModular(0, 1))
        ));
    }

    #[test]
    fn direct_sum_and_decompose_round_trip() {
        let e = td::split_p1_bundle();
        let parts = e.decompose().unwrap();
        assert_eq!(parts.len(), 3);
        // Summand degree vectors (2,0), (1,2), (0,1) in component order.
        let degs: Vec<Vec<i64>> = parts.iter().map(|p| p.degree_vectors()[0].clone()).collect();
        assert_eq!(degs, vec![vec![2, 0], vec![1, 2], vec![0, 1]]);
        for p in &parts {
            assert_eq!(p.rank(), 1);
        }
        let resummed = parts[0]
            .direct_sum(&parts[1])
            .unwrap()
            .direct_sum(&parts[2])
            .unwrap();
        assert_eq!(resummed.vm, e.vm);
        assert_eq!(resummed.filtrations, e.filtrations);

        // The non-splitting bundle is indecomposable.
        assert!(td::nonsplit_p1_bundle().is_indecomposable().unwrap());
        assert_eq!(td::nonsplit_p1_bundle().decompose().unwrap().len(), 1);
    }

    #[test]
    fn tensor_by_line_bundles() {
        let e = td::m1_bundle();
        let same = e.tensor_line(&[0, 0, 0]).unwrap();
        assert_eq!(same.filtrations, e.filtrations);
        let back = e
            .tensor_line(&[2, -1, 3])
            .unwrap()
            .tensor_line(&[-2, 1, -3])
            .unwrap();
        assert_eq!(back.filtrations, e.filtrations);
    }

    #[test]
    fn isomorphism_of_line_bundles() {
        // (a0, a1, a2) on the plane is isomorphic to (a0+a1+a2, 0, 0).
        let a = td::line_bundle(td::p2_fan(), &[2, 3, -1]);
        let b = td::line_bundle(td::p2_fan(), &[4, 0, 0]);
        let (_, u) = a.isomorphic(&b).unwrap().expect("isomorphic");
        assert_eq!(u, vec![-3, 1]);

        let c = td::line_bundle(td::p2_fan(), &[5, 0, 0]);
        assert!(a.isomorphic(&c).unwrap().is_none());

        // Tensoring by a character divisor is an isomorphism.
        let e = td::nonsplit_p1_bundle();
        let phi_u: Vec<i64> = e.fan.rays.iter().map(|v| 3 * v[0]).collect();
        let shifted = e.tensor_line(&phi_u).unwrap();
        let (_, u) = e.isomorphic(&shifted).unwrap().expect("isomorphic");
        assert_eq!(u, vec![3]);

        // Different underlying matroids: not isomorphic.
        let m2 = td::m2_bundle();
        let m1 = td::m1_bundle();
        assert!(matches!(
            m1.isomorphic(&m2),
            Err(BundleError::NotIndecomposable) | Ok(None)
        ));
    }

    #[test]
    fn tropical_minimality() {
        // The five-vector bundle is not minimal; the witness is the free
        // lattice on {w1, w3, w4} seen inside the big lattice.
        let e = td::five_vector_p1_bundle();
        let (min, witness) = e.is_tropically_minimal(18).unwrap();
        assert!(!min);
        let w = witness.unwrap();
        let expect: Vec<Mask> = vec![
            0,
            mask_from(&[0]),
            mask_from(&[2]),
            mask_from(&[3]),
            mask_from(&[0, 3]),
            mask_from(&[0, 1, 2]),
            mask_from(&[2, 3, 4]),
            mask_from(&[0, 1, 2, 3, 4]),
        ];
        assert_eq!(w, expect);

        // The tangent bundle and rank-1 sheaves are minimal.
        assert!(td::tangent_pn(2).is_tropically_minimal(18).unwrap().0);
        assert!(td::line_bundle(td::p2_fan(), &[1, 0, 0])
            .is_tropically_minimal(18)
            .unwrap()
            .0);
        // The splitting fixture is minimal.
        assert!(td::split_p1_bundle().is_tropically_minimal(18).unwrap().0);
    }

    #[test]
    fn cox_presentations() {
        // Tangent plane bundle: a single relation x e1 ⊕ y e2 ⊕ z e3.
        let e = td::tangent_pn(2);
        let p = e.cox_presentation().unwrap();
        assert_eq!(p.generators.len(), 1);
        let g = &p.generators[0];
        let exps: Vec<Vec<i64>> = g.terms.iter().map(|t| t.2.clone()).collect();
        assert_eq!(exps, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(g.terms.iter().all(|t| t.1 == ExtRat::zero()));
        assert_eq!(g.degree, vec![0, 0, 0]);

        // M1: single relation z0 y1 ⊕ z0 y2 ⊕ z1 y3 ⊕ z2 y4.
        let p = td::m1_bundle().cox_presentation().unwrap();
        assert_eq!(p.generators.len(), 1);
        let exps: Vec<Vec<i64>> = p.generators[0].terms.iter().map(|t| t.2.clone()).collect();
        assert_eq!(
            exps,
            vec![vec![1, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );

        // Free matroid: no relations.
        let free = td::trivial_bundle(
            td::p1_fan(),
            ValuatedMatroid::trivial(&Matroid::uniform(td::labels(&["1", "2"]), 2).unwrap()),
        );
        assert!(free.cox_presentation().unwrap().generators.is_empty());
    }
}
