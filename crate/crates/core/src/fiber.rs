//! Fibers and total spaces: circuit specialization at Cox points, the fiber
//! valuated matroid, tropical-linear-space membership, total-space
//! equations, and the intrinsic subcomplex.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bundle::TropicalToricBundle;
use crate::matroid::{lex_key, mask_card, mask_members, Ground, Mask, Matroid, MatroidError};
use crate::rational::Rat;
use crate::tropical::{ExtRat, TropicalVector};
use crate::valuated::{ValuatedMatroid, VmError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("point has wrong length {0}, fan has {1} rays")]
    LengthMismatch(usize, usize),
    #[error("point lies in the vanishing locus of the irrelevant ideal")]
    IrrelevantPoint,
    #[error("circuit valuations propagate inconsistently (internal error)")]
    InconsistentPropagation,
    #[error("intrinsic subcomplex needs a trivially valuated matroid")]
    NontrivialValuation,
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Valuated(#[from] VmError),
}

/// Cox coordinates of a point of the tropical toric variety: finite or
/// infinite per ray, with some maximal cone all of whose complementary rays
/// carry finite coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxPoint {
    pub z: Vec<ExtRat>,
}

impl CoxPoint {
    pub fn new(e: &TropicalToricBundle, z: Vec<ExtRat>) -> Result<CoxPoint, FiberError> {
        if z.len() != e.fan.ray_count() {
            return Err(FiberError::LengthMismatch(z.len(), e.fan.ray_count()));
        }
        let ok = e.fan.max_cones.iter().any(|cone| {
            (0..z.len()).all(|k| cone.contains(&k) || z[k].is_finite())
        });
        if !ok {
            return Err(FiberError::IrrelevantPoint);
        }
        Ok(CoxPoint { z })
    }
}

/// Specialize a circuit representative at a Cox point:
/// `c(z)_l = c_l ⊙ z^{u_l}` with `u_l = d_{w_l} − min(d_{w_j} : c_j ≠ ∞)`.
pub fn specialize_circuit(
    e: &TropicalToricBundle,
    c: &TropicalVector,
    z: &CoxPoint,
) -> TropicalVector {
    let degrees = e.degree_vectors();
    let s = e.fan.ray_count();
    let support = c.support();
    let mut min_vec = vec![i64::MAX; s];
    for &w in &support {
        for k in 0..s {
            min_vec[k] = min_vec[k].min(degrees[w][k]);
        }
    }
    let mut entries = vec![ExtRat::Inf; c.len()];
    for &l in &support {
        let mut acc = c.entries[l].clone();
        for k in 0..s {
            let exp = degrees[l][k] - min_vec[k];
            if exp == 0 {
                continue; // empty product contributes nothing at the stratum
            }
            match &z.z[k] {
                ExtRat::Inf => {
                    acc = ExtRat::Inf;
                    break;
                }
                ExtRat::Fin(v) => {
                    acc = acc.trop_mul(&ExtRat::Fin(v * Rat::from_integer(exp.into())));
                }
            }
        }
        entries[l] = acc;
    }
    TropicalVector { entries }
}

/// Specializations of all circuit representatives, deduplicated after
/// normalisation; the all-infinite ones are dropped.
pub fn specialized_circuits(e: &TropicalToricBundle, z: &CoxPoint) -> Vec<TropicalVector> {
    let mut out: Vec<TropicalVector> = Vec::new();
    for c in e.vm.circuits() {
        let s = specialize_circuit(e, &c, z).normalized();
        if !s.support().is_empty() && !out.contains(&s) {
            out.push(s);
        }
    }
    out.sort_by_key(|c| lex_key(c.support_mask()));
    out
}

/// The circuits of the fiber matroid: specializations of minimal nonempty
/// support.
pub fn fiber_circuits(e: &TropicalToricBundle, z: &CoxPoint) -> Vec<TropicalVector> {
    let all = specialized_circuits(e, z);
    all.iter()
        .filter(|c| {
            let s = c.support_mask();
            !all.iter()
                .any(|d| d.support_mask() != s && d.support_mask() & s == d.support_mask())
        })
        .cloned()
        .collect()
}

/// The fiber valuated matroid at a Cox point: underlying matroid from the
/// circuit supports, valuation propagated across the basis-exchange graph
/// from the lex-least basis.
pub fn fiber_matroid(
    e: &TropicalToricBundle,
    z: &CoxPoint,
) -> Result<ValuatedMatroid, FiberError> {
    let circuits = fiber_circuits(e, z);
    let m = e.ground_size();
    let labels = e.vm.ground().labels().to_vec();
    let supports: Vec<Mask> = circuits.iter().map(|c| c.support_mask()).collect();
    // Independent sets contain no circuit support.
    let is_independent =
        |s: Mask| -> bool { !supports.iter().any(|&c| c & s == c) };
    let full: Mask = if m == 0 { 0 } else { (1u32 << m) - 1 };
    let mut rank = 0;
    for s in 0..=full {
        if is_independent(s) {
            rank = rank.max(mask_card(s));
        }
    }
    let bases: Vec<Mask> = crate::matroid::k_subsets(m, rank)
        .into_iter()
        .filter(|&s| is_independent(s))
        .collect();
    let under = Matroid::from_bases(Ground::new(labels.clone())?, bases.clone())?;
    // Anchor ν at the lex-least basis and propagate along exchanges using
    // the fundamental-circuit entries read off the specialized circuits.
    let mut nu: BTreeMap<Mask, Rat> = BTreeMap::new();
    nu.insert(bases[0], Rat::from_integer(0.into()));
    let mut queue = vec![bases[0]];
    let circuit_for = |support_needed: Mask| -> Option<&TropicalVector> {
        circuits
            .iter()
            .find(|c| c.support_mask() == support_needed)
    };
    while let Some(b) = queue.pop() {
        let base_val = nu[&b].clone();
        for f in 0..m {
            if b >> f & 1 == 1 {
                continue;
            }
            // Fundamental circuit of f over b in the underlying matroid:
            // f together with the basis elements whose exchange keeps rank.
            let fc_support = {
                let mut c = 1 << f;
                for x in mask_members(b) {
                    if under.rank((b & !(1 << x)) | 1 << f) == rank {
                        c |= 1 << x;
                    }
                }
                c
            };
            let Some(rep) = circuit_for(fc_support) else {
                continue;
            };
            let lam = rep.entries[f]
                .finite()
                .ok_or(FiberError::InconsistentPropagation)?
                .clone();
            for x in mask_members(fc_support & b) {
                let b2 = (b & !(1 << x)) | 1 << f;
                let val_x = rep.entries[x]
                    .finite()
                    .ok_or(FiberError::InconsistentPropagation)?
                    .clone();
                // ν(B∖x∪f) − ν(B) = C_x − C_f for the fundamental circuit.
                let v2 = base_val.clone() + val_x - lam.clone();
                match nu.get(&b2) {
                    None => {
                        nu.insert(b2, v2);
                        queue.push(b2);
                    }
                    Some(existing) => {
                        if *existing != v2 {
                            return Err(FiberError::InconsistentPropagation);
                        }
                    }
                }
            }
        }
    }
    if nu.len() != bases.len() {
        return Err(FiberError::InconsistentPropagation);
    }
    Ok(ValuatedMatroid::new(Ground::new(labels)?, rank, nu)?)
}

/// Tropical-linear-space membership: for every fiber circuit the minimum of
/// `c(z)_w + a_w` is infinite or attained at least twice.
pub fn fiber_contains(e: &TropicalToricBundle, z: &CoxPoint, a: &TropicalVector) -> bool {
    for c in fiber_circuits(e, z) {
        let values: Vec<ExtRat> = c
            .entries
            .iter()
            .zip(&a.entries)
            .map(|(x, y)| x.trop_mul(y))
            .collect();
        let min = values.iter().min().cloned().unwrap_or(ExtRat::Inf);
        if min.is_inf() {
            continue;
        }
        if values.iter().filter(|v| **v == min).count() < 2 {
            return false;
        }
    }
    true
}

/// One tropical polynomial of the total-space system: terms
/// `c_l ⊙ z^{u_l} ⊙ y_l` over the support of a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalSpacePolynomial {
    /// (ground position, coefficient, z-exponent vector).
    pub terms: Vec<(usize, ExtRat, Vec<i64>)>,
    /// Class-group normal form of the polynomial degree.
    pub degree_class: Vec<String>,
}

/// The total-space equations, one per circuit representative, canonically
/// sorted.
pub fn total_space_system(
    e: &TropicalToricBundle,
) -> Result<Vec<TotalSpacePolynomial>, FiberError> {
    let degrees = e.degree_vectors();
    let s = e.fan.ray_count();
    let mut out = Vec::new();
    for c in e.vm.circuits() {
        let support = c.support();
        let mut min_vec = vec![i64::MAX; s];
        for &w in &support {
            for k in 0..s {
                min_vec[k] = min_vec[k].min(degrees[w][k]);
            }
        }
        let terms: Vec<(usize, ExtRat, Vec<i64>)> = support
            .iter()
            .map(|&w| {
                let u: Vec<i64> = (0..s).map(|k| degrees[w][k] - min_vec[k]).collect();
                (w, c.entries[w].clone(), u)
            })
            .collect();
        let neg_min: Vec<i64> = min_vec.iter().map(|&v| -v).collect();
        let degree_class = e
            .fan
            .divisor_class(&neg_min)
            .map_err(|_| FiberError::LengthMismatch(neg_min.len(), s))?
            .normal_form
            .iter()
            .map(|b| b.to_string())
            .collect();
        out.push(TotalSpacePolynomial {
            terms,
            degree_class,
        });
    }
    Ok(out)
}

/// A polyhedral cone given by integer ray generators plus a common
/// lineality space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeWithLineality {
    pub rays: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntrinsicSubcomplex {
    pub lineality: Vec<Vec<i64>>,
    pub cones: Vec<ConeWithLineality>,
}

/// The intrinsic subcomplex: the cone over the order complex of the proper
/// part of the intersection poset of the filtration flats, via indicator
/// vectors, with the all-ones lineality.  Maximal chains are emitted.
pub fn intrinsic_subcomplex(
    e: &TropicalToricBundle,
) -> Result<IntrinsicSubcomplex, FiberError> {
    if !e
        .vm
        .finite_values()
        .values()
        .all(|v| v == &Rat::from_integer(0.into()))
    {
        return Err(FiberError::NontrivialValuation);
    }
    let m = e.ground_size();
    let full = e.vm.ground().full_mask();
    // Intersection closure of the step flats together with the ground set.
    let mut lprime: Vec<Mask> = vec![full];
    for filt in &e.filtrations {
        for &(_, f) in &filt.steps {
            if !lprime.contains(&f) {
                lprime.push(f);
            }
        }
    }
    loop {
        let mut new = Vec::new();
        for &a in &lprime {
            for &b in &lprime {
                let c = a & b;
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
    let mut proper: Vec<Mask> = lprime
        .into_iter()
        .filter(|&f| f != 0 && f != full)
        .collect();
    proper.sort_by_key(|&f| (mask_card(f), lex_key(f)));
    // Maximal chains in the proper part.
    let mut chains: Vec<Vec<Mask>> = Vec::new();
    fn extend(proper: &[Mask], chain: &mut Vec<Mask>, chains: &mut Vec<Vec<Mask>>) {
        let last = *chain.last().unwrap();
        let uppers: Vec<Mask> = proper
            .iter()
            .copied()
            .filter(|&g| g != last && last & g == last)
            .collect();
        if uppers.is_empty() {
            chains.push(chain.clone());
            return;
        }
        // Only extend by covers inside the proper part.
        let mut extended = false;
        for g in &uppers {
            let between = uppers
                .iter()
                .any(|&h| h != *g && h & *g == h && last & h == last && h != last);
            if !between {
                chain.push(*g);
                extend(proper, chain, chains);
                chain.pop();
                extended = true;
            }
        }
        if !extended {
            chains.push(chain.clone());
        }
    }
    for (i, &f) in proper.iter().enumerate() {
        // start chains at minimal proper elements
        let minimal = !proper[..i]
            .iter()
            .chain(&proper[i + 1..])
            .any(|&g| g != f && g & f == g);
        if minimal {
            let mut chain = vec![f];
            extend(&proper, &mut chain, &mut chains);
        }
    }
    let indicator = |f: Mask| -> Vec<i64> { (0..m).map(|w| i64::from(f >> w & 1)).collect() };
    let mut cones: Vec<ConeWithLineality> = chains
        .into_iter()
        .map(|chain| ConeWithLineality {
            rays: chain.into_iter().map(indicator).collect(),
        })
        .collect();
    cones.sort_by(|a, b| a.rays.cmp(&b.rays));
    cones.dedup();
    Ok(IntrinsicSubcomplex {
        lineality: vec![vec![1; m]],
        cones,
    })
}
