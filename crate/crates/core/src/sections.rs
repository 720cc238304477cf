//! Parliaments of polytopes and global sections.
//!
//! Each ground element w cuts out the polytope `P_w = {u : u·v_i ≤ (d_w)_i}`;
//! the rank of the join of the elements whose polytope contains a character
//! u aggregates to h⁰.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::bundle::TropicalToricBundle;
use crate::linalg::QMat;
use crate::matroid::{k_subsets, mask_members, MatroidError};
use crate::rational::{rat_ceil, rat_floor, Rat};
use crate::valuated::VmError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SectionsError {
    #[error("polytope is unbounded; the fan cannot be complete")]
    Unbounded,
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Valuated(#[from] VmError),
}

/// A polytope `{u ∈ ℚ^n : u·v_i ≤ b_i}` with cached rational vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    pub normals: Vec<Vec<i64>>,
    pub bounds: Vec<i64>,
    pub vertices: Vec<Vec<Rat>>,
}

impl Polytope {
    /// Build from inequalities, verifying boundedness of the recession cone
    /// and enumerating vertices over facet subsets.
    pub fn new(normals: Vec<Vec<i64>>, bounds: Vec<i64>) -> Result<Polytope, SectionsError> {
        assert_eq!(normals.len(), bounds.len());
        let n = normals.first().map_or(0, |v| v.len());
        if !recession_trivial(&normals, n) {
            return Err(SectionsError::Unbounded);
        }
        let vertices = enumerate_vertices(&normals, &bounds, n);
        Ok(Polytope {
            normals,
            bounds,
            vertices,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains_int(&self, u: &[i64]) -> bool {
        self.normals
            .iter()
            .zip(&self.bounds)
            .all(|(v, &b)| v.iter().zip(u).map(|(&a, &x)| a * x).sum::<i64>() <= b)
    }

    /// All integer points: bounding box from the vertices, filtered by the
    /// inequalities.
    pub fn lattice_points(&self) -> Vec<Vec<i64>> {
        if self.vertices.is_empty() {
            return Vec::new();
        }
        let n = self.vertices[0].len();
        let mut lo = vec![BigInt::zero(); n];
        let mut hi = vec![BigInt::zero(); n];
        for k in 0..n {
            lo[k] = self
                .vertices
                .iter()
                .map(|v| rat_ceil(&v[k]))
                .min()
                .unwrap();
            hi[k] = self
                .vertices
                .iter()
                .map(|v| rat_floor(&v[k]))
                .max()
                .unwrap();
        }
        let lo: Vec<i64> = lo.iter().map(|b| i64::try_from(b.clone()).unwrap()).collect();
        let hi: Vec<i64> = hi.iter().map(|b| i64::try_from(b.clone()).unwrap()).collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        if (0..n).any(|k| lo[k] > hi[k]) {
            return Vec::new();
        }
        loop {
            if self.contains_int(&cur) {
                out.push(cur.clone());
            }
            let mut pos = n;
            let mut done = true;
            while pos > 0 {
                pos -= 1;
                if cur[pos] < hi[pos] {
                    cur[pos] += 1;
                    for (idx, v) in cur.iter_mut().enumerate().skip(pos + 1) {
                        *v = lo[idx];
                    }
                    done = false;
                    break;
                }
            }
            if n == 0 || done {
                break;
            }
        }
        out.sort_unstable();
        out
    }
}

/// The recession cone `{u : Vu ≤ 0}` is trivial iff the ray matrix has full
/// column rank and no (n−1)-subset of rows leaves a one-sided kernel
/// direction.
fn recession_trivial(normals: &[Vec<i64>], n: usize) -> bool {
    if n == 0 {
        return true;
    }
    let to_q = |rows: &[Vec<i64>]| {
        QMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
                .collect(),
        )
    };
    if to_q(normals).rank() < n {
        return false;
    }
    if n == 1 {
        // Bounded iff both signs occur among the normals.
        let pos = normals.iter().any(|v| v[0] > 0);
        let neg = normals.iter().any(|v| v[0] < 0);
        return pos && neg;
    }
    let dot =
        |v: &[i64], u: &[Rat]| -> Rat { v.iter().zip(u).map(|(&a, x)| x * Rat::from_integer(a.into())).sum() };
    for sub in k_subsets(normals.len(), n - 1) {
        let rows: Vec<Vec<i64>> = mask_members(sub)
            .into_iter()
            .map(|i| normals[i].clone())
            .collect();
        let m = to_q(&rows);
        if m.rank() != n - 1 {
            continue;
        }
        let ker = m.kernel();
        debug_assert_eq!(ker.len(), 1);
        let dir = &ker[0];
        for candidate in [dir.clone(), dir.iter().map(|x| -x.clone()).collect::<Vec<_>>()] {
            if normals.iter().all(|v| !dot(v, &candidate).is_positive())
                && candidate.iter().any(|x| !x.is_zero())
            {
                return false;
            }
        }
    }
    true
}

fn enumerate_vertices(normals: &[Vec<i64>], bounds: &[i64], n: usize) -> Vec<Vec<Rat>> {
    let s = normals.len();
    let mut out: Vec<Vec<Rat>> = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    for sub in k_subsets(s, n) {
        let idx = mask_members(sub);
        // Solve the n×n equality system exactly.
        let mut rows = Vec::with_capacity(n);
        for &i in &idx {
            let mut row: Vec<Rat> = normals[i]
                .iter()
                .map(|&x| Rat::from_integer(x.into()))
                .collect();
            row.push(Rat::from_integer(bounds[i].into()));
            rows.push(row);
        }
        let Some(sol) = crate::valuated::solve_affine(rows.clone(), n) else {
            continue;
        };
        // The subset must have full rank for sol to be the unique vertex.
        let coeff = QMat::from_rows(
            rows.iter()
                .map(|r| r[..n].to_vec())
                .collect::<Vec<_>>(),
        );
        if coeff.rank() != n {
            continue;
        }
        let feasible = normals.iter().zip(bounds).all(|(v, &b)| {
            let val: Rat = v
                .iter()
                .zip(&sol)
                .map(|(&a, x)| x * Rat::from_integer(a.into()))
                .sum();
            val <= Rat::from_integer(b.into())
        });
        if feasible && !out.contains(&sol) {
            out.push(sol);
        }
    }
    out
}

/// The parliament of polytopes: one polytope per ground element, from the
/// degree vectors.
pub fn parliament(e: &TropicalToricBundle) -> Result<Vec<Polytope>, SectionsError> {
    let degrees = e.degree_vectors();
    degrees
        .iter()
        .map(|d| Polytope::new(e.fan.rays.clone(), d.clone()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H0Report {
    pub total: usize,
    /// Character -> rank of the join of the elements whose polytope
    /// contains it; zero entries are omitted.
    pub breakdown: BTreeMap<Vec<i64>, usize>,
}

/// Global sections: `h⁰ = Σ_u rk(⋁ {w : u ∈ P_w})`.
pub fn h0(e: &TropicalToricBundle) -> Result<H0Report, SectionsError> {
    let polys = parliament(e)?;
    let under = e.vm.underlying()?;
    let mut characters: Vec<Vec<i64>> = Vec::new();
    for p in &polys {
        for pt in p.lattice_points() {
            if !characters.contains(&pt) {
                characters.push(pt);
            }
        }
    }
    characters.sort_unstable();
    let mut breakdown = BTreeMap::new();
    let mut total = 0;
    for u in characters {
        let members: u32 = polys
            .iter()
            .enumerate()
            .filter(|(_, p)| p.contains_int(&u))
            .fold(0, |acc, (w, _)| acc | 1 << w);
        let rk = under.rank(members);
        if rk > 0 {
            total += rk;
            breakdown.insert(u, rk);
        }
    }
    Ok(H0Report { total, breakdown })
}
